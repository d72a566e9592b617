//! Symbolic tensor containers on a chart: square matrices for bivectors,
//! cometrics and endomorphisms, dense index tables for higher rank, and the
//! small one-form/vector-field types everything else is phrased in.

use crate::chart::ChartRef;
use crate::error::{Error, Result};
use crate::expr::{EvalCtx, Expr, Point};
use nalgebra::DMatrix;

/// Square matrix of expressions, row-major.
#[derive(Debug, Clone)]
pub struct Matrix {
    dim: usize,
    comps: Vec<Expr>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Matrix {
        Matrix {
            dim,
            comps: vec![Expr::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Matrix {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Expr::one());
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Expr) -> Matrix {
        let mut comps = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                comps.push(f(i, j));
            }
        }
        Matrix { dim, comps }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.comps[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: Expr) {
        self.comps[i * self.dim + j] = e;
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.dim, |i, j| self.get(j, i).clone())
    }

    pub fn scale(&self, c: &Expr) -> Matrix {
        Matrix::from_fn(self.dim, |i, j| Expr::mul(c, self.get(i, j)))
    }

    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim);
        Matrix::from_fn(self.dim, |i, j| {
            Expr::sum((0..self.dim).map(|k| Expr::mul(self.get(i, k), rhs.get(k, j))))
        })
    }

    pub fn eval_at(&self, p: &Point) -> Result<DMatrix<f64>> {
        let mut ctx = EvalCtx::new(p);
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] = ctx.eval(self.get(i, j))?;
            }
        }
        Ok(out)
    }

    /// Determinant by cofactor expansion. Exponential in dim, which is why
    /// symbolic inversion is capped at dim 4.
    pub fn det(&self) -> Expr {
        let idx: Vec<usize> = (0..self.dim).collect();
        self.minor_det(&idx, &idx)
    }

    fn minor_det(&self, rows: &[usize], cols: &[usize]) -> Expr {
        if rows.len() == 1 {
            return self.get(rows[0], cols[0]).clone();
        }
        let mut acc = Expr::zero();
        let sub_rows: Vec<usize> = rows[1..].to_vec();
        for (pos, &c) in cols.iter().enumerate() {
            let sub_cols: Vec<usize> = cols.iter().copied().filter(|&cc| cc != c).collect();
            let term = Expr::mul(self.get(rows[0], c), &self.minor_det(&sub_rows, &sub_cols));
            acc = if pos % 2 == 0 {
                Expr::add(&acc, &term)
            } else {
                Expr::sub(&acc, &term)
            };
        }
        acc
    }

    /// Symbolic inverse via adjugate over determinant. dims above 4 are
    /// refused; use [`Matrix::inverse_at`] there.
    pub fn inverse_symbolic(&self) -> Result<Matrix> {
        const MAX: usize = 4;
        if self.dim > MAX {
            return Err(Error::SymbolicInversionDim {
                dim: self.dim,
                max: MAX,
            });
        }
        let det = self.det();
        if self.dim == 1 {
            return Ok(Matrix::from_fn(1, |_, _| Expr::div(&Expr::one(), &det)));
        }
        let all: Vec<usize> = (0..self.dim).collect();
        Ok(Matrix::from_fn(self.dim, |i, j| {
            // adjugate: cofactor of (j, i)
            let rows: Vec<usize> = all.iter().copied().filter(|&r| r != j).collect();
            let cols: Vec<usize> = all.iter().copied().filter(|&c| c != i).collect();
            let minor = self.minor_det(&rows, &cols);
            let signed = if (i + j) % 2 == 0 {
                minor
            } else {
                Expr::neg(&minor)
            };
            Expr::div(&signed, &det)
        }))
    }

    /// Per-point numeric inverse, any dim. Rejects near-singular values with
    /// a relative determinant cutoff.
    pub fn inverse_at(&self, p: &Point) -> Result<DMatrix<f64>> {
        let m = self.eval_at(p)?;
        let scale = m.amax().max(1.0).powi(self.dim as i32);
        let lu = m.clone().lu();
        let det = lu.determinant();
        if det.abs() < 1e-12 * scale {
            return Err(Error::SingularCometric {
                point: p.to_string(),
                det,
            });
        }
        lu.try_inverse().ok_or(Error::SingularCometric {
            point: p.to_string(),
            det,
        })
    }
}

/// Slot variance marker for dense tensors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variance {
    Contra,
    Co,
}

/// Dense rank-r tensor of expressions; row-major strides over the chart dim.
#[derive(Debug, Clone)]
pub struct TensorField {
    chart: ChartRef,
    variance: Vec<Variance>,
    comps: Vec<Expr>,
}

impl TensorField {
    pub fn zeros(chart: &ChartRef, variance: Vec<Variance>) -> TensorField {
        let n = chart.dim().pow(variance.len() as u32);
        TensorField {
            chart: chart.clone(),
            variance,
            comps: vec![Expr::zero(); n],
        }
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        let d = self.chart.dim();
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < d);
            acc * d + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> &Expr {
        &self.comps[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], e: Expr) {
        let o = self.offset(idx);
        self.comps[o] = e;
    }

    /// Largest absolute component value at a point.
    pub fn max_abs_at(&self, p: &Point) -> Result<f64> {
        let mut ctx = EvalCtx::new(p);
        let mut best: f64 = 0.0;
        for e in &self.comps {
            best = best.max(ctx.eval(e)?.abs());
        }
        Ok(best)
    }
}

fn check_chart(a: &ChartRef, b: &ChartRef) -> Result<()> {
    if a.name() == b.name() && a.coords() == b.coords() {
        Ok(())
    } else {
        Err(Error::ChartMismatch {
            expected: a.name().to_string(),
            got: b.name().to_string(),
        })
    }
}

/// Antisymmetric contravariant 2-tensor Π^{ij}.
#[derive(Debug, Clone)]
pub struct Bivector {
    chart: ChartRef,
    m: Matrix,
}

impl Bivector {
    /// Build from the strictly upper triangle; the rest is filled by
    /// antisymmetry.
    pub fn from_upper(chart: &ChartRef, upper: &[((usize, usize), Expr)]) -> Bivector {
        let mut m = Matrix::zeros(chart.dim());
        for ((i, j), e) in upper {
            assert!(i < j, "upper triangle requires i < j");
            m.set(*i, *j, e.clone());
            m.set(*j, *i, Expr::neg(e));
        }
        Bivector {
            chart: chart.clone(),
            m,
        }
    }

    /// Wrap a full component matrix. Antisymmetry is the caller's contract;
    /// the verification suites spot-check it at sample points.
    pub fn from_matrix(chart: &ChartRef, m: Matrix) -> Bivector {
        assert_eq!(m.dim(), chart.dim());
        Bivector {
            chart: chart.clone(),
            m,
        }
    }

    pub fn zero(chart: &ChartRef) -> Bivector {
        Bivector {
            chart: chart.clone(),
            m: Matrix::zeros(chart.dim()),
        }
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn comp(&self, i: usize, j: usize) -> &Expr {
        self.m.get(i, j)
    }

    /// Π(α, β) = Σ α_i β_j Π^{ij}.
    pub fn pair(&self, alpha: &OneForm, beta: &OneForm) -> Result<Expr> {
        check_chart(&self.chart, &alpha.chart)?;
        check_chart(&self.chart, &beta.chart)?;
        let d = self.chart.dim();
        let mut acc = Expr::zero();
        for i in 0..d {
            for j in 0..d {
                let t = Expr::mul(&Expr::mul(alpha.comp(i), beta.comp(j)), self.m.get(i, j));
                acc = Expr::add(&acc, &t);
            }
        }
        Ok(acc)
    }
}

/// Symmetric contravariant 2-tensor g^{ij}, pairing 1-forms.
#[derive(Debug, Clone)]
pub struct Cometric {
    chart: ChartRef,
    m: Matrix,
}

impl Cometric {
    /// Build from the upper triangle including the diagonal; the lower part
    /// is mirrored.
    pub fn from_upper(chart: &ChartRef, upper: &[((usize, usize), Expr)]) -> Cometric {
        let mut m = Matrix::zeros(chart.dim());
        for ((i, j), e) in upper {
            assert!(i <= j, "upper triangle requires i <= j");
            m.set(*i, *j, e.clone());
            if i != j {
                m.set(*j, *i, e.clone());
            }
        }
        Cometric {
            chart: chart.clone(),
            m,
        }
    }

    pub fn identity(chart: &ChartRef) -> Cometric {
        Cometric {
            chart: chart.clone(),
            m: Matrix::identity(chart.dim()),
        }
    }

    pub fn from_matrix(chart: &ChartRef, m: Matrix) -> Cometric {
        assert_eq!(m.dim(), chart.dim());
        Cometric {
            chart: chart.clone(),
            m,
        }
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn comp(&self, i: usize, j: usize) -> &Expr {
        self.m.get(i, j)
    }

    /// g(α, β) = Σ α_i β_j g^{ij}.
    pub fn pair(&self, alpha: &OneForm, beta: &OneForm) -> Result<Expr> {
        check_chart(&self.chart, &alpha.chart)?;
        check_chart(&self.chart, &beta.chart)?;
        let d = self.chart.dim();
        let mut acc = Expr::zero();
        for i in 0..d {
            for j in 0..d {
                let t = Expr::mul(&Expr::mul(alpha.comp(i), beta.comp(j)), self.m.get(i, j));
                acc = Expr::add(&acc, &t);
            }
        }
        Ok(acc)
    }

    /// Determinant, used as a sampling guard wherever the metric is needed.
    pub fn det(&self) -> Expr {
        self.m.det()
    }
}

/// Covariant symmetric 2-tensor g̃_{ij}, the matrix inverse of a cometric.
#[derive(Debug, Clone)]
pub struct Metric {
    chart: ChartRef,
    m: Matrix,
}

impl Metric {
    pub fn from_matrix(chart: &ChartRef, m: Matrix) -> Metric {
        assert_eq!(m.dim(), chart.dim());
        Metric {
            chart: chart.clone(),
            m,
        }
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn comp(&self, i: usize, j: usize) -> &Expr {
        self.m.get(i, j)
    }
}

/// g̃ = g^{-1}, symbolically. Charts above dim 4 must assemble their metric
/// another way (the warped constructions do it blockwise).
pub fn invert_cometric(g: &Cometric) -> Result<Metric> {
    Ok(Metric {
        chart: g.chart.clone(),
        m: g.m.inverse_symbolic()?,
    })
}

/// Covector field α = Σ α_i dx^i.
#[derive(Debug, Clone)]
pub struct OneForm {
    chart: ChartRef,
    comps: Vec<Expr>,
}

/// Vector field X = Σ X^i ∂_i.
#[derive(Debug, Clone)]
pub struct VectorField {
    chart: ChartRef,
    comps: Vec<Expr>,
}

macro_rules! ranked_one {
    ($T:ident) => {
        impl $T {
            pub fn new(chart: &ChartRef, comps: Vec<Expr>) -> $T {
                assert_eq!(comps.len(), chart.dim());
                $T {
                    chart: chart.clone(),
                    comps,
                }
            }

            pub fn zero(chart: &ChartRef) -> $T {
                $T {
                    chart: chart.clone(),
                    comps: vec![Expr::zero(); chart.dim()],
                }
            }

            /// i-th coordinate basis element.
            pub fn basis(chart: &ChartRef, i: usize) -> $T {
                let mut comps = vec![Expr::zero(); chart.dim()];
                comps[i] = Expr::one();
                $T {
                    chart: chart.clone(),
                    comps,
                }
            }

            pub fn chart(&self) -> &ChartRef {
                &self.chart
            }

            pub fn comp(&self, i: usize) -> &Expr {
                &self.comps[i]
            }

            pub fn comps(&self) -> &[Expr] {
                &self.comps
            }

            pub fn add(&self, rhs: &$T) -> Result<$T> {
                check_chart(&self.chart, &rhs.chart)?;
                Ok($T {
                    chart: self.chart.clone(),
                    comps: self
                        .comps
                        .iter()
                        .zip(&rhs.comps)
                        .map(|(a, b)| Expr::add(a, b))
                        .collect(),
                })
            }

            pub fn sub(&self, rhs: &$T) -> Result<$T> {
                check_chart(&self.chart, &rhs.chart)?;
                Ok($T {
                    chart: self.chart.clone(),
                    comps: self
                        .comps
                        .iter()
                        .zip(&rhs.comps)
                        .map(|(a, b)| Expr::sub(a, b))
                        .collect(),
                })
            }

            pub fn scale(&self, c: &Expr) -> $T {
                $T {
                    chart: self.chart.clone(),
                    comps: self.comps.iter().map(|a| Expr::mul(c, a)).collect(),
                }
            }

            pub fn eval_at(&self, p: &Point) -> Result<Vec<f64>> {
                let mut ctx = EvalCtx::new(p);
                self.comps.iter().map(|e| ctx.eval(e)).collect()
            }
        }
    };
}

ranked_one!(OneForm);
ranked_one!(VectorField);

impl OneForm {
    /// Exterior derivative of a scalar: (dφ)_i = ∂_i φ.
    pub fn d_scalar(chart: &ChartRef, phi: &Expr) -> OneForm {
        OneForm {
            chart: chart.clone(),
            comps: chart.coords().iter().map(|c| phi.diff(c)).collect(),
        }
    }

    /// α(X) = Σ α_i X^i.
    pub fn apply(&self, x: &VectorField) -> Result<Expr> {
        check_chart(&self.chart, &x.chart)?;
        Ok(Expr::sum(
            self.comps
                .iter()
                .zip(&x.comps)
                .map(|(a, b)| Expr::mul(a, b)),
        ))
    }
}

impl VectorField {
    /// Directional derivative X(φ) = Σ X^i ∂_i φ.
    pub fn apply_scalar(&self, phi: &Expr) -> Expr {
        Expr::sum(
            self.chart
                .coords()
                .iter()
                .zip(&self.comps)
                .map(|(c, xi)| Expr::mul(xi, &phi.diff(c))),
        )
    }

    /// Commutator [X, Y]^j = Σ_k X^k ∂_k Y^j − Y^k ∂_k X^j.
    pub fn lie_bracket(&self, rhs: &VectorField) -> Result<VectorField> {
        check_chart(&self.chart, &rhs.chart)?;
        let comps = (0..self.chart.dim())
            .map(|j| {
                Expr::sub(
                    &self.apply_scalar(rhs.comp(j)),
                    &rhs.apply_scalar(self.comp(j)),
                )
            })
            .collect();
        Ok(VectorField {
            chart: self.chart.clone(),
            comps,
        })
    }
}

/// Endomorphism field on 1-forms, (Jα)_k = Σ_a α_a J_{ak}.
#[derive(Debug, Clone)]
pub struct Endomorphism {
    chart: ChartRef,
    m: Matrix,
}

impl Endomorphism {
    pub fn from_matrix(chart: &ChartRef, m: Matrix) -> Endomorphism {
        assert_eq!(m.dim(), chart.dim());
        Endomorphism {
            chart: chart.clone(),
            m,
        }
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn apply(&self, alpha: &OneForm) -> Result<OneForm> {
        check_chart(&self.chart, &alpha.chart)?;
        let d = self.chart.dim();
        let comps = (0..d)
            .map(|k| Expr::sum((0..d).map(|a| Expr::mul(alpha.comp(a), self.m.get(a, k)))))
            .collect();
        Ok(OneForm {
            chart: self.chart.clone(),
            comps,
        })
    }
}

/// The unique J with g(Jα, β) = Π(α, β): component matrix Π·g̃.
pub fn j_field(g: &Cometric, gt: &Metric, pi: &Bivector) -> Result<Endomorphism> {
    check_chart(&g.chart, &pi.chart)?;
    check_chart(&g.chart, &gt.chart)?;
    Ok(Endomorphism {
        chart: g.chart.clone(),
        m: pi.m.matmul(&gt.m),
    })
}

/// ♯ of the metric pair: (♯α)^i = Σ_j g^{ij} α_j.
pub fn sharp_g(g: &Cometric, alpha: &OneForm) -> Result<VectorField> {
    check_chart(&g.chart, &alpha.chart)?;
    let d = g.chart.dim();
    let comps = (0..d)
        .map(|i| Expr::sum((0..d).map(|j| Expr::mul(g.m.get(i, j), alpha.comp(j)))))
        .collect();
    Ok(VectorField {
        chart: g.chart.clone(),
        comps,
    })
}

/// ♭ of the metric pair: α_i = Σ_j g̃_{ij} X^j. Inverts the cometric
/// symbolically, so dim ≤ 4; see [`flat_with_metric`] otherwise.
pub fn flat_g(g: &Cometric, x: &VectorField) -> Result<OneForm> {
    flat_with_metric(&invert_cometric(g)?, x)
}

pub fn flat_with_metric(gt: &Metric, x: &VectorField) -> Result<OneForm> {
    check_chart(&gt.chart, &x.chart)?;
    let d = gt.chart.dim();
    let comps = (0..d)
        .map(|i| Expr::sum((0..d).map(|j| Expr::mul(gt.m.get(i, j), x.comp(j)))))
        .collect();
    Ok(OneForm {
        chart: gt.chart.clone(),
        comps,
    })
}

pub(crate) fn same_chart(a: &ChartRef, b: &ChartRef) -> Result<()> {
    check_chart(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use std::sync::Arc;

    fn plane() -> ChartRef {
        Arc::new(Chart::new("plane", &["x", "y"], &[("x", -1.0, 1.0), ("y", -1.0, 1.0)]).unwrap())
    }

    #[test]
    fn identity_cometric_inverts_to_identity() {
        let ch = plane();
        let g = Cometric::identity(&ch);
        let gt = invert_cometric(&g).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_eq!(gt.comp(i, j).as_num(), Some(want));
            }
        }
    }

    #[test]
    fn diagonal_function_cometric_inverts_entrywise() {
        let ch = plane();
        let f = parse("1 + x^2", &ch);
        let g = Cometric::from_upper(&ch, &[((0, 0), Expr::one()), ((1, 1), f.clone())]);
        let gt = invert_cometric(&g).unwrap();
        let p = Point::from_pairs([("x", 0.5), ("y", 0.0)]);
        let want = 1.0 / (1.0 + 0.25);
        assert!((gt.comp(1, 1).eval(&p).unwrap() - want).abs() < 1e-15);
        assert_eq!(gt.comp(0, 1).eval(&p).unwrap(), 0.0);
    }

    fn parse(src: &str, ch: &ChartRef) -> Expr {
        crate::expr::parse_expr(src, ch.coords()).unwrap()
    }

    #[test]
    fn symbolic_inverse_matches_numeric_inverse() {
        let ch = Arc::new(
            Chart::new(
                "c3",
                &["x", "y", "z"],
                &[("x", 1.0, 2.0), ("y", 1.0, 2.0), ("z", 1.0, 2.0)],
            )
            .unwrap(),
        );
        // symmetric positive definite on the domain
        let g = Cometric::from_upper(
            &ch,
            &[
                ((0, 0), parse("2 + x^2", &ch)),
                ((0, 1), parse("x*y/10", &ch)),
                ((0, 2), parse("1/10", &ch)),
                ((1, 1), parse("3 + sin(z)", &ch)),
                ((1, 2), parse("y/10", &ch)),
                ((2, 2), parse("2 + z^2", &ch)),
            ],
        );
        let gt = invert_cometric(&g).unwrap();
        let points = crate::chart::sample_points(&ch, 50, 11, &[]).unwrap();
        for p in &points {
            let sym = gt.matrix().eval_at(p).unwrap();
            let num = g.matrix().inverse_at(p).unwrap();
            let prod = g.matrix().eval_at(p).unwrap() * &sym;
            for i in 0..3 {
                for j in 0..3 {
                    assert!((sym[(i, j)] - num[(i, j)]).abs() < 1e-9);
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((prod[(i, j)] - want).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn symbolic_inversion_refuses_dim_5() {
        let ch = Arc::new(
            Chart::new(
                "c5",
                &["a", "b", "c", "d", "e"],
                &[
                    ("a", 0.0, 1.0),
                    ("b", 0.0, 1.0),
                    ("c", 0.0, 1.0),
                    ("d", 0.0, 1.0),
                    ("e", 0.0, 1.0),
                ],
            )
            .unwrap(),
        );
        let g = Cometric::identity(&ch);
        let err = invert_cometric(&g).unwrap_err();
        assert!(matches!(
            err,
            Error::SymbolicInversionDim { dim: 5, max: 4 }
        ));
    }

    #[test]
    fn singular_matrix_is_rejected_numerically() {
        let m = Matrix::from_fn(2, |_, _| Expr::one());
        let p = Point::from_pairs([("x", 0.0), ("y", 0.0)]);
        let err = m.inverse_at(&p).unwrap_err();
        assert!(matches!(err, Error::SingularCometric { .. }));
    }

    #[test]
    fn sharp_flat_round_trip() {
        let ch = plane();
        let g = Cometric::from_upper(
            &ch,
            &[
                ((0, 0), parse("2 + x^2", &ch)),
                ((0, 1), parse("x/2", &ch)),
                ((1, 1), parse("1 + y^2", &ch)),
            ],
        );
        let alpha = OneForm::new(&ch, vec![parse("y", &ch), parse("x*y - 1", &ch)]);
        let back = flat_g(&g, &sharp_g(&g, &alpha).unwrap()).unwrap();
        let points = crate::chart::sample_points(&ch, 50, 3, &[]).unwrap();
        for p in &points {
            let a = alpha.eval_at(p).unwrap();
            let b = back.eval_at(p).unwrap();
            for i in 0..2 {
                assert!((a[i] - b[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sharp_with_scaled_metric() {
        let ch = plane();
        let g = Cometric::from_upper(&ch, &[((0, 0), Expr::num(2.0)), ((1, 1), Expr::one())]);
        let dx = OneForm::basis(&ch, 0);
        let x = sharp_g(&g, &dx).unwrap();
        assert_eq!(x.comp(0).as_num(), Some(2.0));
        assert_eq!(x.comp(1).as_num(), Some(0.0));
    }

    #[test]
    fn j_field_defining_relation() {
        let ch = plane();
        let g = Cometric::identity(&ch);
        let gt = invert_cometric(&g).unwrap();
        let pi = Bivector::from_upper(&ch, &[((0, 1), Expr::one())]);
        let j = j_field(&g, &gt, &pi).unwrap();
        // J dx = dy for the defining relation with this g and Π
        let jd = j.apply(&OneForm::basis(&ch, 0)).unwrap();
        assert_eq!(jd.comp(0).as_num(), Some(0.0));
        assert_eq!(jd.comp(1).as_num(), Some(1.0));
        // defining relation at sample points for all coframe pairs
        let points = crate::chart::sample_points(&ch, 20, 5, &[]).unwrap();
        for p in &points {
            for a in 0..2 {
                for b in 0..2 {
                    let alpha = OneForm::basis(&ch, a);
                    let beta = OneForm::basis(&ch, b);
                    let lhs = g
                        .pair(&j.apply(&alpha).unwrap(), &beta)
                        .unwrap()
                        .eval(p)
                        .unwrap();
                    let rhs = pi.pair(&alpha, &beta).unwrap().eval(p).unwrap();
                    assert!((lhs - rhs).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn j_field_zero_bivector() {
        let ch = plane();
        let g = Cometric::identity(&ch);
        let gt = invert_cometric(&g).unwrap();
        let j = j_field(&g, &gt, &Bivector::zero(&ch)).unwrap();
        for i in 0..2 {
            for j2 in 0..2 {
                assert_eq!(j.matrix().get(i, j2).as_num(), Some(0.0));
            }
        }
    }

    #[test]
    fn lie_bracket_coordinate_fields_commute() {
        let ch = plane();
        let x = VectorField::basis(&ch, 0);
        let y = VectorField::basis(&ch, 1);
        let b = x.lie_bracket(&y).unwrap();
        assert!(b.comp(0).is_zero() && b.comp(1).is_zero());
    }

    #[test]
    fn chart_mismatch_is_detected() {
        let a = plane();
        let b = Arc::new(
            Chart::new("other", &["u", "v"], &[("u", 0.0, 1.0), ("v", 0.0, 1.0)]).unwrap(),
        );
        let alpha = OneForm::basis(&a, 0);
        let beta = OneForm::basis(&b, 0);
        let g = Cometric::identity(&a);
        assert!(matches!(
            g.pair(&alpha, &beta),
            Err(Error::ChartMismatch { .. })
        ));
    }

    #[test]
    fn tensor_field_indexing() {
        let ch = plane();
        let mut t = TensorField::zeros(&ch, vec![Variance::Contra; 3]);
        t.set(&[1, 0, 1], Expr::num(7.0));
        assert_eq!(t.get(&[1, 0, 1]).as_num(), Some(7.0));
        assert_eq!(t.get(&[0, 1, 1]).as_num(), Some(0.0));
        let p = Point::from_pairs([("x", 0.0), ("y", 0.0)]);
        assert_eq!(t.max_abs_at(&p).unwrap(), 7.0);
    }
}
