//! Product charts with horizontal/vertical lifts, warped bivectors and
//! cometrics, the block connection over a product, and the auxiliary Poisson
//! tensors built from a pair of Hamiltonian directions.
//!
//! Everything here exists twice on purpose: each closed-form block expression
//! has a generic counterpart computed on the product chart by the poisson and
//! connection modules, and the verification suites compare the two routes at
//! sampled points.

use std::sync::Arc;

use serde::Deserialize;

use crate::chart::{sample_points, Chart, ChartDef, ChartRef, Triple};
use crate::connection::{ricci, scalar_curv, tri_left, tri_right, ContraConnection};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::forms::Form;
use crate::poisson::{anchor_apply, koszul_bracket};
use crate::tensor::{
    same_chart, Bivector, Cometric, Matrix, Metric, OneForm, TensorField, Variance, VectorField,
};

/// Base and fiber charts glued along concatenated coordinates.
#[derive(Debug, Clone)]
pub struct ProductChart {
    product: ChartRef,
    base: ChartRef,
    fiber: ChartRef,
}

impl ProductChart {
    pub fn new(base: &ChartRef, fiber: &ChartRef) -> Result<ProductChart> {
        let name = format!("{}x{}", base.name(), fiber.name());
        let product = Arc::new(Chart::product(&name, base, fiber)?);
        Ok(ProductChart {
            product,
            base: base.clone(),
            fiber: fiber.clone(),
        })
    }

    pub fn chart(&self) -> &ChartRef {
        &self.product
    }

    pub fn base(&self) -> &ChartRef {
        &self.base
    }

    pub fn fiber(&self) -> &ChartRef {
        &self.fiber
    }

    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber.dim()
    }

    fn check_vars(&self, e: &Expr, factor: &ChartRef, side: &str) -> Result<()> {
        for v in e.vars() {
            if !factor.coords().contains(&v) {
                return Err(Error::FactorMismatch(format!(
                    "variable `{v}` is not a {side} coordinate of `{}`",
                    self.product.name()
                )));
            }
        }
        Ok(())
    }

    /// Horizontal lift of a base scalar; coordinates are shared by name, so
    /// the expression itself is unchanged.
    pub fn lift_h(&self, phi: &Expr) -> Result<Expr> {
        self.check_vars(phi, &self.base, "base")?;
        Ok(phi.clone())
    }

    pub fn lift_v(&self, phi: &Expr) -> Result<Expr> {
        self.check_vars(phi, &self.fiber, "fiber")?;
        Ok(phi.clone())
    }

    pub fn lift_h_oneform(&self, a: &OneForm) -> Result<OneForm> {
        same_chart(&self.base, a.chart())?;
        let mut comps = a.comps().to_vec();
        comps.extend(std::iter::repeat_with(Expr::zero).take(self.fiber_dim()));
        Ok(OneForm::new(&self.product, comps))
    }

    pub fn lift_v_oneform(&self, a: &OneForm) -> Result<OneForm> {
        same_chart(&self.fiber, a.chart())?;
        let mut comps: Vec<Expr> = std::iter::repeat_with(Expr::zero)
            .take(self.base_dim())
            .collect();
        comps.extend(a.comps().iter().cloned());
        Ok(OneForm::new(&self.product, comps))
    }

    pub fn lift_h_vector(&self, x: &VectorField) -> Result<VectorField> {
        same_chart(&self.base, x.chart())?;
        let mut comps = x.comps().to_vec();
        comps.extend(std::iter::repeat_with(Expr::zero).take(self.fiber_dim()));
        Ok(VectorField::new(&self.product, comps))
    }

    pub fn lift_v_vector(&self, x: &VectorField) -> Result<VectorField> {
        same_chart(&self.fiber, x.chart())?;
        let mut comps: Vec<Expr> = std::iter::repeat_with(Expr::zero)
            .take(self.base_dim())
            .collect();
        comps.extend(x.comps().iter().cloned());
        Ok(VectorField::new(&self.product, comps))
    }

    pub fn lift_h_bivector(&self, pi: &Bivector) -> Result<Bivector> {
        same_chart(&self.base, pi.chart())?;
        let d1 = self.base_dim();
        let d = d1 + self.fiber_dim();
        let m = Matrix::from_fn(d, |i, j| {
            if i < d1 && j < d1 {
                pi.comp(i, j).clone()
            } else {
                Expr::zero()
            }
        });
        Ok(Bivector::from_matrix(&self.product, m))
    }

    pub fn lift_v_bivector(&self, pi: &Bivector) -> Result<Bivector> {
        same_chart(&self.fiber, pi.chart())?;
        let d1 = self.base_dim();
        let d = d1 + self.fiber_dim();
        let m = Matrix::from_fn(d, |i, j| {
            if i >= d1 && j >= d1 {
                pi.comp(i - d1, j - d1).clone()
            } else {
                Expr::zero()
            }
        });
        Ok(Bivector::from_matrix(&self.product, m))
    }

    /// Lift of a base form: index masks are unchanged.
    pub fn lift_h_form(&self, w: &Form) -> Result<Form> {
        same_chart(&self.base, w.chart())?;
        let mut out = Form::zero(&self.product, w.degree());
        for (&mask, e) in w.comps() {
            out.insert(mask, e.clone());
        }
        Ok(out)
    }

    /// Lift of a fiber form: every index shifts past the base block.
    pub fn lift_v_form(&self, w: &Form) -> Result<Form> {
        same_chart(&self.fiber, w.chart())?;
        let mut out = Form::zero(&self.product, w.degree());
        for (&mask, e) in w.comps() {
            out.insert(mask << self.base_dim(), e.clone());
        }
        Ok(out)
    }

    /// Decompose a product one-form into lifted factor pieces. Fails when a
    /// block component depends on the other factor's coordinates, i.e. when
    /// the form is not a sum of lifts.
    pub fn split_oneform(&self, a: &OneForm) -> Result<(OneForm, OneForm)> {
        same_chart(&self.product, a.chart())?;
        let d1 = self.base_dim();
        let base_comps: Vec<Expr> = (0..d1).map(|i| a.comp(i).clone()).collect();
        let fiber_comps: Vec<Expr> = (d1..self.product.dim())
            .map(|i| a.comp(i).clone())
            .collect();
        for e in &base_comps {
            self.check_vars(e, &self.base, "base")?;
        }
        for e in &fiber_comps {
            self.check_vars(e, &self.fiber, "fiber")?;
        }
        Ok((
            OneForm::new(&self.base, base_comps),
            OneForm::new(&self.fiber, fiber_comps),
        ))
    }
}

/// Factor structures plus the warping data: the conformal factor `f` scaling
/// the fiber cometric and the function `μ` scaling the fiber bivector, both
/// living on the base.
#[derive(Debug, Clone)]
pub struct WarpedStructure {
    pc: ProductChart,
    base: Triple,
    fiber: Triple,
    f: Expr,
    mu: Expr,
}

impl WarpedStructure {
    pub fn new(base: &Triple, fiber: &Triple, f: &Expr, mu: &Expr) -> Result<WarpedStructure> {
        let pc = ProductChart::new(base.chart(), fiber.chart())?;
        pc.lift_h(f)?;
        pc.lift_h(mu)?;
        // positivity is a domain property; probe the sampling box
        for p in sample_points(base.chart(), 32, 7, &[])? {
            if f.eval(&p)? <= 0.0 {
                return Err(Error::InvalidChart {
                    name: pc.chart().name().to_string(),
                    msg: format!("conformal factor is not positive at {p}"),
                });
            }
        }
        Ok(WarpedStructure {
            pc,
            base: base.clone(),
            fiber: fiber.clone(),
            f: f.clone(),
            mu: mu.clone(),
        })
    }

    pub fn product(&self) -> &ProductChart {
        &self.pc
    }

    pub fn base(&self) -> &Triple {
        &self.base
    }

    pub fn fiber(&self) -> &Triple {
        &self.fiber
    }

    pub fn f(&self) -> &Expr {
        &self.f
    }

    pub fn mu(&self) -> &Expr {
        &self.mu
    }

    /// Π = Π₁ block ⊕ μ·Π₂ block.
    pub fn warped_bivector(&self) -> Bivector {
        let d1 = self.pc.base_dim();
        let d = d1 + self.pc.fiber_dim();
        let m = Matrix::from_fn(d, |i, j| {
            if i < d1 && j < d1 {
                self.base.pi().comp(i, j).clone()
            } else if i >= d1 && j >= d1 {
                Expr::mul(&self.mu, self.fiber.pi().comp(i - d1, j - d1))
            } else {
                Expr::zero()
            }
        });
        Bivector::from_matrix(self.pc.chart(), m)
    }

    /// g = g₁ block ⊕ f·g₂ block.
    pub fn warped_cometric(&self) -> Cometric {
        let d1 = self.pc.base_dim();
        let d = d1 + self.pc.fiber_dim();
        let m = Matrix::from_fn(d, |i, j| {
            if i < d1 && j < d1 {
                self.base.g().comp(i, j).clone()
            } else if i >= d1 && j >= d1 {
                Expr::mul(&self.f, self.fiber.g().comp(i - d1, j - d1))
            } else {
                Expr::zero()
            }
        });
        Cometric::from_matrix(self.pc.chart(), m)
    }

    /// The inverse assembles blockwise: g̃₁ ⊕ (1/f)·g̃₂. This sidesteps
    /// symbolic inversion on the product, which is capped at dimension four.
    pub fn warped_metric(&self) -> Metric {
        let d1 = self.pc.base_dim();
        let d = d1 + self.pc.fiber_dim();
        let inv_f = Expr::div(&Expr::one(), &self.f);
        let m = Matrix::from_fn(d, |i, j| {
            if i < d1 && j < d1 {
                self.base.gt().comp(i, j).clone()
            } else if i >= d1 && j >= d1 {
                Expr::mul(&inv_f, self.fiber.gt().comp(i - d1, j - d1))
            } else {
                Expr::zero()
            }
        });
        Metric::from_matrix(self.pc.chart(), m)
    }

    pub fn triple(&self) -> Result<Triple> {
        Triple::with_metric(
            self.pc.chart(),
            self.warped_bivector(),
            self.warped_cometric(),
            self.warped_metric(),
        )
    }

    /// Closed-form Koszul bracket on the product for sums of lifts:
    /// `[α₁,β₁]₁^h + μ^h [α₂,β₂]₂^v + Π₂(α₂,β₂)^v (dμ)^h`.
    pub fn koszul_on_product(&self, alpha: &OneForm, beta: &OneForm) -> Result<OneForm> {
        let (a1, a2) = self.pc.split_oneform(alpha)?;
        let (b1, b2) = self.pc.split_oneform(beta)?;
        let base_part = koszul_bracket(self.base.pi(), &a1, &b1)?;
        let fiber_part = koszul_bracket(self.fiber.pi(), &a2, &b2)?;
        let cross_coeff = self.fiber.pi().pair(&a2, &b2)?;
        let dmu = OneForm::d_scalar(self.base.chart(), &self.mu);
        let mut out = self.pc.lift_h_oneform(&base_part)?;
        out = out.add(&self.pc.lift_v_oneform(&fiber_part)?.scale(&self.mu))?;
        out = out.add(&self.pc.lift_h_oneform(&dmu)?.scale(&cross_coeff))?;
        Ok(out)
    }

    /// Block connection over Π: factor rules inside each block, scaled by μ
    /// on the fiber, zero across.
    pub fn dmu_connection(
        &self,
        d1: &ContraConnection,
        d2: &ContraConnection,
    ) -> Result<ContraConnection> {
        same_chart(self.base.chart(), d1.chart())?;
        same_chart(self.fiber.chart(), d2.chart())?;
        let n1 = self.pc.base_dim();
        let mu = self.mu.clone();
        let pi = self.warped_bivector();
        ContraConnection::from_table(self.pc.chart(), &pi, |i, j, k| {
            if i < n1 && j < n1 && k < n1 {
                d1.gamma(i, j, k).clone()
            } else if i >= n1 && j >= n1 && k >= n1 {
                Expr::mul(&mu, d2.gamma(i - n1, j - n1, k - n1))
            } else {
                Expr::zero()
            }
        })
    }

    /// Torsion of the block connection assembled from factor data:
    /// `T₁^h + μ^h T₂^v − (dμ)^h Π₂^v`, valid for any μ.
    pub fn dmu_torsion_blocks(
        &self,
        d1: &ContraConnection,
        d2: &ContraConnection,
    ) -> Result<TensorField> {
        same_chart(self.base.chart(), d1.chart())?;
        same_chart(self.fiber.chart(), d2.chart())?;
        let n1 = self.pc.base_dim();
        let d = self.pc.chart().dim();
        let t1 = d1.torsion();
        let t2 = d2.torsion();
        let mut out = TensorField::zeros(
            self.pc.chart(),
            vec![Variance::Contra, Variance::Contra, Variance::Co],
        );
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let e = if i < n1 && j < n1 && k < n1 {
                        t1.get(&[i, j, k]).clone()
                    } else if i >= n1 && j >= n1 && k >= n1 {
                        Expr::mul(&self.mu, t2.get(&[i - n1, j - n1, k - n1]))
                    } else if i >= n1 && j >= n1 && k < n1 {
                        Expr::neg(&Expr::mul(
                            self.fiber.pi().comp(i - n1, j - n1),
                            &self.mu.diff(&self.base.chart().coords()[k]),
                        ))
                    } else {
                        Expr::zero()
                    };
                    out.set(&[i, j, k], e);
                }
            }
        }
        Ok(out)
    }

    /// Curvature of the block connection from factor data: the two diagonal
    /// blocks `R₁^h` and `(μ²)^h R₂^v`, plus the terms proportional to dμ
    /// that appear when μ is not constant.
    pub fn dmu_curvature_blocks(
        &self,
        d1: &ContraConnection,
        d2: &ContraConnection,
    ) -> Result<TensorField> {
        same_chart(self.base.chart(), d1.chart())?;
        same_chart(self.fiber.chart(), d2.chart())?;
        let n1 = self.pc.base_dim();
        let d = self.pc.chart().dim();
        let r1 = d1.curvature();
        let r2 = d2.curvature();
        let mu2 = Expr::mul(&self.mu, &self.mu);
        // ♯₁dx^A(μ) per base index
        let sharp_mu: Vec<Expr> = (0..n1)
            .map(|a| crate::poisson::anchor_coframe_apply(self.base.pi(), a, &self.mu))
            .collect();
        let dmu: Vec<Expr> = (0..n1)
            .map(|k| self.mu.diff(&self.base.chart().coords()[k]))
            .collect();
        let mut out = TensorField::zeros(
            self.pc.chart(),
            vec![
                Variance::Contra,
                Variance::Contra,
                Variance::Contra,
                Variance::Co,
            ],
        );
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let e = match (i < n1, j < n1, k < n1, l < n1) {
                            (true, true, true, true) => r1.get(&[i, j, k, l]).clone(),
                            (false, false, false, false) => {
                                Expr::mul(&mu2, r2.get(&[i - n1, j - n1, k - n1, l - n1]))
                            }
                            // R(dx^A, β₂^v)γ₂^v = ♯₁dx^A(μ) (D²γ₂-coefficients)
                            (true, false, false, false) => {
                                Expr::mul(&sharp_mu[i], d2.gamma(j - n1, k - n1, l - n1))
                            }
                            (false, true, false, false) => Expr::neg(&Expr::mul(
                                &sharp_mu[j],
                                d2.gamma(i - n1, k - n1, l - n1),
                            )),
                            // R(α₂^v, β₂^v)γ₁^h = −Π₂(α₂,β₂) D¹_{dμ}γ₁
                            (false, false, true, true) => Expr::neg(&Expr::mul(
                                self.fiber.pi().comp(i - n1, j - n1),
                                &Expr::sum((0..n1).map(|m| Expr::mul(&dmu[m], d1.gamma(m, k, l)))),
                            )),
                            _ => Expr::zero(),
                        };
                        out.set(&[i, j, k, l], e);
                    }
                }
            }
        }
        Ok(out)
    }

    /// The metric connection of the warped pair, built generically from the
    /// Koszul formula on the product chart.
    pub fn levi_civita(&self) -> Result<ContraConnection> {
        Ok(ContraConnection::levi_civita(&self.triple()?))
    }

    /// The same connection assembled from the closed-form block rules: factor
    /// connections inside the blocks, with the fiber-pair corrections
    /// `½Π₂(α₂,β₂)(dμ)^h + ½g₂(α₂,β₂)(J₁df)^h` and the mixed-slot rule
    /// `−(1/2f)[g₁(J₁df,α₁)β₂ + g₁(dμ,α₁)J₂β₂]`.
    pub fn levi_civita_blocks(&self) -> Result<ContraConnection> {
        let n1 = self.pc.base_dim();
        let d1 = ContraConnection::levi_civita(&self.base);
        let d2 = ContraConnection::levi_civita(&self.fiber);
        let j1 = self.base.j()?;
        let j2 = self.fiber.j()?;
        let df = OneForm::d_scalar(self.base.chart(), &self.f);
        let dmu = OneForm::d_scalar(self.base.chart(), &self.mu);
        let j1df = j1.apply(&df)?;
        // g₁(J₁df, dx^K) and g₁(dμ, dx^K) as coefficient rows
        let s_row: Vec<Expr> = (0..n1)
            .map(|k| Expr::sum((0..n1).map(|a| Expr::mul(j1df.comp(a), self.base.g().comp(a, k)))))
            .collect();
        let m_row: Vec<Expr> = (0..n1)
            .map(|k| Expr::sum((0..n1).map(|a| Expr::mul(dmu.comp(a), self.base.g().comp(a, k)))))
            .collect();
        let dmu_comps: Vec<Expr> = (0..n1)
            .map(|k| self.mu.diff(&self.base.chart().coords()[k]))
            .collect();
        let half = Expr::num(0.5);
        let neg_half_inv_f = Expr::div(&Expr::num(-0.5), &self.f);
        let pi = self.warped_bivector();
        ContraConnection::from_table(self.pc.chart(), &pi, |i, j, k| {
            let (bi, bj, bk) = (i < n1, j < n1, k < n1);
            match (bi, bj, bk) {
                (true, true, true) => d1.gamma(i, j, k).clone(),
                (false, false, false) => Expr::mul(&self.mu, d2.gamma(i - n1, j - n1, k - n1)),
                (false, false, true) => {
                    // ½Π₂(α₂,β₂) ∂_kμ + ½g₂(α₂,β₂) (J₁df)_k
                    let a = Expr::mul(self.fiber.pi().comp(i - n1, j - n1), &dmu_comps[k]);
                    let b = Expr::mul(self.fiber.g().comp(i - n1, j - n1), j1df.comp(k));
                    Expr::mul(&half, &Expr::add(&a, &b))
                }
                (true, false, false) | (false, true, false) => {
                    let (base_ix, fib_j) = if bi { (i, j - n1) } else { (j, i - n1) };
                    let fib_k = k - n1;
                    let delta = if fib_j == fib_k {
                        Expr::one()
                    } else {
                        Expr::zero()
                    };
                    let t = Expr::add(
                        &Expr::mul(&s_row[base_ix], &delta),
                        &Expr::mul(&m_row[base_ix], j2.matrix().get(fib_j, fib_k)),
                    );
                    Expr::mul(&neg_half_inv_f, &t)
                }
                _ => Expr::zero(),
            }
        })
    }

    fn base_rows(&self) -> Result<BaseRows> {
        let n1 = self.pc.base_dim();
        let ch1 = self.base.chart();
        let dmu_form = OneForm::d_scalar(ch1, &self.mu);
        let j1df_form = self.base.j()?.apply(&OneForm::d_scalar(ch1, &self.f))?;
        let g1 = self.base.g();
        let pi1 = self.base.pi();
        let pair_rows = |w: &OneForm| -> (Vec<Expr>, Vec<Expr>) {
            let gr = (0..n1)
                .map(|k| Expr::sum((0..n1).map(|a| Expr::mul(w.comp(a), g1.comp(a, k)))).simplify())
                .collect();
            let pr = (0..n1)
                .map(|k| {
                    Expr::sum((0..n1).map(|a| Expr::mul(w.comp(a), pi1.comp(a, k)))).simplify()
                })
                .collect();
            (gr, pr)
        };
        let (g_dmu, pi_dmu) = pair_rows(&dmu_form);
        let (g_j1df, pi_j1df) = pair_rows(&j1df_form);
        let dot = |w: &OneForm, row: &[Expr]| {
            Expr::sum((0..n1).map(|k| Expr::mul(w.comp(k), &row[k]))).simplify()
        };
        let ndmu = dot(&dmu_form, &g_dmu);
        let njdf = dot(&j1df_form, &g_j1df);
        let gmix = dot(&dmu_form, &g_j1df);
        let dmu = dmu_form.comps().to_vec();
        let j1df = j1df_form.comps().to_vec();
        Ok(BaseRows {
            dmu_form,
            j1df_form,
            dmu,
            j1df,
            g_dmu,
            g_j1df,
            pi_dmu,
            pi_j1df,
            ndmu,
            njdf,
            gmix,
        })
    }

    /// g₁(w, dx^K) for a base one-form.
    fn g1_row(&self, w: &OneForm, k: usize) -> Expr {
        let n1 = self.pc.base_dim();
        Expr::sum((0..n1).map(|a| Expr::mul(w.comp(a), self.base.g().comp(a, k))))
    }

    /// Π₂(e_a, J₂e_c) and g₂(e_a, J₂e_c) over fiber coframe indices.
    fn fiber_j_pairings(&self) -> Result<(Matrix, Matrix)> {
        let n2 = self.pc.fiber_dim();
        let endo = self.fiber.j()?;
        let j2m = endo.matrix();
        let pi2 = self.fiber.pi();
        let g2 = self.fiber.g();
        let p = Matrix::from_fn(n2, |a, c| {
            Expr::sum((0..n2).map(|k| Expr::mul(pi2.comp(a, k), j2m.get(c, k)))).simplify()
        });
        let g = Matrix::from_fn(n2, |a, c| {
            Expr::sum((0..n2).map(|k| Expr::mul(g2.comp(a, k), j2m.get(c, k)))).simplify()
        });
        Ok((p, g))
    }

    /// D-derivative of the full tensor `Π₁ ⊕ μΠ₂` along the metric
    /// connection, from the closed-form block rules. `d1`, `d2` must be the
    /// factor metric connections.
    pub fn dpi_blocks(&self, d1: &ContraConnection, d2: &ContraConnection) -> Result<TensorField> {
        same_chart(self.base.chart(), d1.chart())?;
        same_chart(self.fiber.chart(), d2.chart())?;
        let n1 = self.pc.base_dim();
        let d = self.pc.chart().dim();
        let rows = self.base_rows()?;
        let dp1 = d1.nabla_pi();
        let dp2 = d2.nabla_pi();
        let (pi2j, g2j) = self.fiber_j_pairings()?;
        let pi2 = self.fiber.pi();
        let g2 = self.fiber.g();
        let mu2 = Expr::mul(&self.mu, &self.mu);
        let mu_2f = Expr::div(&self.mu, &Expr::mul(&Expr::num(2.0), &self.f));
        let mu_f = Expr::div(&self.mu, &self.f);
        let half = Expr::num(0.5);
        let mut out = TensorField::zeros(self.pc.chart(), vec![Variance::Contra; 3]);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let e = match (i < n1, j < n1, k < n1) {
                        (true, true, true) => dp1.get(&[i, j, k]).clone(),
                        (false, false, false) => {
                            Expr::mul(&mu2, dp2.get(&[i - n1, j - n1, k - n1]))
                        }
                        (true, false, false) => {
                            // [Π₁(dx^A, dμ) + (μ/f) g₁(J₁df, dx^A)] Π₂^{bc}
                            let c = Expr::add(
                                &Expr::neg(&rows.pi_dmu[i]),
                                &Expr::mul(&mu_f, &rows.g_j1df[i]),
                            );
                            Expr::mul(&c, pi2.comp(j - n1, k - n1))
                        }
                        (false, true, false) => {
                            let (a, bx, c) = (i - n1, j, k - n1);
                            let lead = Expr::sub(
                                &Expr::mul(pi2.comp(a, c), &rows.g_j1df[bx]),
                                &Expr::mul(pi2j.get(a, c), &rows.g_dmu[bx]),
                            );
                            let tail = Expr::sub(
                                &Expr::mul(g2.comp(a, c), &rows.pi_j1df[bx]),
                                &Expr::mul(g2j.get(a, c), &rows.pi_dmu[bx]),
                            );
                            Expr::add(&Expr::mul(&mu_2f, &lead), &Expr::mul(&half, &tail))
                        }
                        (false, false, true) => {
                            let (a, b, cx) = (i - n1, j - n1, k);
                            let lead = Expr::sub(
                                &Expr::mul(pi2j.get(a, b), &rows.g_dmu[cx]),
                                &Expr::mul(pi2.comp(a, b), &rows.g_j1df[cx]),
                            );
                            let tail = Expr::sub(
                                &Expr::mul(g2j.get(a, b), &rows.pi_dmu[cx]),
                                &Expr::mul(g2.comp(a, b), &rows.pi_j1df[cx]),
                            );
                            Expr::add(&Expr::mul(&mu_2f, &lead), &Expr::mul(&half, &tail))
                        }
                        _ => Expr::zero(),
                    };
                    out.set(&[i, j, k], e);
                }
            }
        }
        Ok(out)
    }

    /// Curvature of the metric connection from the closed-form block rules,
    /// in the component convention R^{ijk}_l. `d1`, `d2` must be the factor
    /// metric connections.
    #[allow(clippy::needless_range_loop)] // index arithmetic across the block split
    pub fn lc_curvature_blocks(
        &self,
        d1: &ContraConnection,
        d2: &ContraConnection,
    ) -> Result<TensorField> {
        same_chart(self.base.chart(), d1.chart())?;
        same_chart(self.fiber.chart(), d2.chart())?;
        let n1 = self.pc.base_dim();
        let n2 = self.pc.fiber_dim();
        let d = self.pc.chart().dim();
        let ch1 = self.base.chart();
        let ch2 = self.fiber.chart();
        let rows = self.base_rows()?;
        let (pi2j, g2j) = self.fiber_j_pairings()?;
        let j2_endo = self.fiber.j()?;
        let j2m = j2_endo.matrix();
        let j2sq = j2m.matmul(j2m);
        let pi2 = self.fiber.pi();
        let g2 = self.fiber.g();
        let r1 = d1.curvature();
        let r2 = d2.curvature();
        let dp2 = d2.nabla_pi();
        let nj2 = d2.nabla_j(&self.fiber)?;

        let two_f = Expr::mul(&Expr::num(2.0), &self.f);
        let inv_4f2 = Expr::div(&Expr::num(0.25), &Expr::mul(&self.f, &self.f));
        let inv_4f = Expr::div(&Expr::num(0.25), &self.f);
        let mu_2f = Expr::div(&self.mu, &two_f);
        let mu2 = Expr::mul(&self.mu, &self.mu);
        let half = Expr::num(0.5);

        let dmu2f_form = rows.dmu_form.scale(&Expr::div(&half, &self.f));
        let mut d1_dmu = Vec::with_capacity(n1);
        let mut d1_j1df = Vec::with_capacity(n1);
        let mut d1_dmu2f = Vec::with_capacity(n1);
        for a in 0..n1 {
            let e = OneForm::basis(ch1, a);
            d1_dmu.push(d1.d_oneform(&e, &rows.dmu_form)?);
            d1_j1df.push(d1.d_oneform(&e, &rows.j1df_form)?);
            d1_dmu2f.push(d1.d_oneform(&e, &dmu2f_form)?);
        }
        let mut dmu_dir = Vec::with_capacity(n1);
        for c in 0..n1 {
            dmu_dir.push(d1.d_oneform(&rows.dmu_form, &OneForm::basis(ch1, c))?);
        }
        // w₂(e_a,e_b) = D²_{e_a}(J₂e_b) − D²_{e_b}(J₂e_a) − J₂([e_a,e_b]_{Π₂})
        let mut w2 = Vec::with_capacity(n2);
        for a in 0..n2 {
            let ea = OneForm::basis(ch2, a);
            let mut row = Vec::with_capacity(n2);
            for b in 0..n2 {
                let eb = OneForm::basis(ch2, b);
                let lhs = d2.d_oneform(&ea, &j2_endo.apply(&eb)?)?;
                let mid = d2.d_oneform(&eb, &j2_endo.apply(&ea)?)?;
                let br = j2_endo.apply(&koszul_bracket(pi2, &ea, &eb)?)?;
                row.push(lhs.sub(&mid)?.sub(&br)?);
            }
            w2.push(row);
        }

        // coefficient of (J₂γ₂)^v for a horizontal pair
        let c_hh: Vec<Vec<Expr>> = (0..n1)
            .map(|i| {
                (0..n1)
                    .map(|j| {
                        Expr::sub(&self.g1_row(&d1_dmu2f[j], i), &self.g1_row(&d1_dmu2f[i], j))
                    })
                    .collect()
            })
            .collect();
        // coefficient tables over base pairs (A, C) for the h-v-h family
        let t1t: Vec<Vec<Expr>> = (0..n1)
            .map(|a| {
                (0..n1)
                    .map(|c| {
                        let s = Expr::add(
                            &Expr::mul(&rows.g_j1df[a], &rows.g_j1df[c]),
                            &Expr::mul(&two_f, &self.g1_row(&d1_j1df[a], c)),
                        );
                        Expr::neg(&Expr::mul(&inv_4f2, &s))
                    })
                    .collect()
            })
            .collect();
        let t23t: Vec<Vec<Expr>> = (0..n1)
            .map(|a| {
                (0..n1)
                    .map(|c| {
                        let t2 = Expr::mul(
                            &inv_4f2,
                            &Expr::add(
                                &Expr::mul(&rows.g_dmu[a], &rows.g_j1df[c]),
                                &Expr::mul(&rows.g_j1df[a], &rows.g_dmu[c]),
                            ),
                        );
                        Expr::sub(&t2, &self.g1_row(&d1_dmu2f[a], c))
                    })
                    .collect()
            })
            .collect();
        let t4t: Vec<Vec<Expr>> = (0..n1)
            .map(|a| {
                (0..n1)
                    .map(|c| Expr::mul(&inv_4f2, &Expr::mul(&rows.g_dmu[a], &rows.g_dmu[c])))
                    .collect()
            })
            .collect();

        let item_hvh = |a: usize, b: usize, c: usize, e: usize| -> Expr {
            let delta = if b == e { Expr::one() } else { Expr::zero() };
            Expr::sum([
                Expr::mul(&t1t[a][c], &delta),
                Expr::mul(&t23t[a][c], j2m.get(b, e)),
                Expr::mul(&t4t[a][c], j2sq.get(b, e)),
            ])
        };
        let item_hvv = |a: usize, b: usize, c: usize, l: usize| -> Expr {
            let ca = &rows.g_dmu[a];
            let cb = &rows.g_j1df[a];
            if l < n1 {
                let coef_p = Expr::mul(
                    &inv_4f,
                    &Expr::add(
                        &Expr::mul(ca, pi2j.get(b, c)),
                        &Expr::mul(cb, pi2.comp(b, c)),
                    ),
                );
                let coef_g = Expr::mul(
                    &inv_4f,
                    &Expr::add(&Expr::mul(ca, g2j.get(b, c)), &Expr::mul(cb, g2.comp(b, c))),
                );
                Expr::sum([
                    Expr::mul(&coef_p, &rows.dmu[l]),
                    Expr::mul(&coef_g, &rows.j1df[l]),
                    Expr::mul(&Expr::mul(&half, pi2.comp(b, c)), d1_dmu[a].comp(l)),
                    Expr::mul(&Expr::mul(&half, g2.comp(b, c)), d1_j1df[a].comp(l)),
                ])
            } else {
                let e = l - n1;
                Expr::sub(
                    &Expr::mul(&Expr::mul(&mu_2f, ca), nj2.get(&[b, c, e])),
                    &Expr::mul(&rows.pi_dmu[a], d2.gamma(b, c, e)),
                )
            }
        };
        let item_vvh = |a: usize, b: usize, c: usize, l: usize| -> Expr {
            let pab = pi2.comp(a, b);
            if l < n1 {
                let lead = Expr::mul(
                    &Expr::div(pab, &two_f),
                    &Expr::sub(
                        &Expr::mul(&rows.g_dmu[c], &rows.j1df[l]),
                        &Expr::mul(&rows.g_j1df[c], &rows.dmu[l]),
                    ),
                );
                Expr::sub(&lead, &Expr::mul(pab, dmu_dir[c].comp(l)))
            } else {
                Expr::neg(&Expr::mul(
                    &Expr::mul(&mu_2f, &rows.g_dmu[c]),
                    w2[a][b].comp(l - n1),
                ))
            }
        };
        let item_vvv = |a: usize, b: usize, c: usize, l: usize| -> Expr {
            if l < n1 {
                let anti = Expr::sub(dp2.get(&[a, b, c]), dp2.get(&[b, a, c]));
                Expr::mul(&Expr::mul(&Expr::mul(&half, &self.mu), &anti), &rows.dmu[l])
            } else {
                let e = l - n1;
                let delta = |x: usize, y: usize| if x == y { Expr::one() } else { Expr::zero() };
                let vec_p = Expr::sum([
                    Expr::mul(pi2.comp(a, c), &delta(b, e)),
                    Expr::neg(&Expr::mul(pi2.comp(b, c), &delta(a, e))),
                    Expr::mul(&Expr::num(2.0), &Expr::mul(pi2.comp(a, b), &delta(c, e))),
                ]);
                let jvec_p = Expr::sum([
                    Expr::mul(pi2.comp(a, c), j2m.get(b, e)),
                    Expr::neg(&Expr::mul(pi2.comp(b, c), j2m.get(a, e))),
                    Expr::mul(&Expr::num(2.0), &Expr::mul(pi2.comp(a, b), j2m.get(c, e))),
                ]);
                let vec_g = Expr::sub(
                    &Expr::mul(g2.comp(a, c), &delta(b, e)),
                    &Expr::mul(g2.comp(b, c), &delta(a, e)),
                );
                let jvec_g = Expr::sub(
                    &Expr::mul(g2.comp(a, c), j2m.get(b, e)),
                    &Expr::mul(g2.comp(b, c), j2m.get(a, e)),
                );
                Expr::sum([
                    Expr::mul(&mu2, r2.get(&[a, b, c, e])),
                    Expr::mul(&Expr::mul(&inv_4f, &rows.ndmu), &jvec_p),
                    Expr::mul(&Expr::mul(&inv_4f, &rows.njdf), &vec_g),
                    Expr::mul(&Expr::mul(&inv_4f, &rows.gmix), &vec_p),
                    Expr::mul(&Expr::mul(&inv_4f, &rows.gmix), &jvec_g),
                ])
            }
        };

        let mut out = TensorField::zeros(
            self.pc.chart(),
            vec![
                Variance::Contra,
                Variance::Contra,
                Variance::Contra,
                Variance::Co,
            ],
        );
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let e = match (i < n1, j < n1, k < n1) {
                            (true, true, true) => {
                                if l < n1 {
                                    r1.get(&[i, j, k, l]).clone()
                                } else {
                                    Expr::zero()
                                }
                            }
                            (true, true, false) => {
                                if l >= n1 {
                                    Expr::mul(&c_hh[i][j], j2m.get(k - n1, l - n1))
                                } else {
                                    Expr::zero()
                                }
                            }
                            (true, false, true) => {
                                if l >= n1 {
                                    item_hvh(i, j - n1, k, l - n1)
                                } else {
                                    Expr::zero()
                                }
                            }
                            (false, true, true) => {
                                if l >= n1 {
                                    Expr::neg(&item_hvh(j, i - n1, k, l - n1))
                                } else {
                                    Expr::zero()
                                }
                            }
                            (true, false, false) => item_hvv(i, j - n1, k - n1, l),
                            (false, true, false) => Expr::neg(&item_hvv(j, i - n1, k - n1, l)),
                            (false, false, true) => item_vvh(i - n1, j - n1, k, l),
                            (false, false, false) => item_vvv(i - n1, j - n1, k - n1, l),
                        };
                        out.set(&[i, j, k, l], e);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Ricci form of the metric connection from the closed-form block rules.
    pub fn ricci_blocks(&self, d1: &ContraConnection, d2: &ContraConnection) -> Result<Matrix> {
        same_chart(self.base.chart(), d1.chart())?;
        same_chart(self.fiber.chart(), d2.chart())?;
        let n1 = self.pc.base_dim();
        let n2 = self.pc.fiber_dim();
        let dtot = self.pc.chart().dim();
        let ch1 = self.base.chart();
        let rows = self.base_rows()?;
        let (pi2j, _) = self.fiber_j_pairings()?;
        let j2_endo = self.fiber.j()?;
        let j2sq = j2_endo.matrix().matmul(j2_endo.matrix());
        let pi2 = self.fiber.pi();
        let g2 = self.fiber.g();
        let gt2 = self.fiber.gt();
        let r1m = ricci(&self.base, &d1.curvature());
        let r2m = ricci(&self.fiber, &d2.curvature());
        let nj2 = d2.nabla_j(&self.fiber)?;
        let dp2 = d2.nabla_pi();

        let norm_j2 = Expr::neg(&Expr::sum((0..n2).map(|i| j2sq.get(i, i).clone()))).simplify();
        let n2e = Expr::num(n2 as f64);
        let two_f = Expr::mul(&Expr::num(2.0), &self.f);
        let inv_4f2 = Expr::div(&Expr::num(0.25), &Expr::mul(&self.f, &self.f));
        let inv_4f = Expr::div(&Expr::num(0.25), &self.f);
        let mu_2f = Expr::div(&self.mu, &two_f);
        let mu2 = Expr::mul(&self.mu, &self.mu);
        let half = Expr::num(0.5);

        let mut d1_j1df = Vec::with_capacity(n1);
        for a in 0..n1 {
            d1_j1df.push(d1.d_oneform(&OneForm::basis(ch1, a), &rows.j1df_form)?);
        }
        // fiber traces: divergence of e_b, the J₂-commutator trace, and the
        // contraction pairing the vertical-horizontal entries
        let mut div2 = Vec::with_capacity(n2);
        let mut trdj2 = Vec::with_capacity(n2);
        let mut vh = Vec::with_capacity(n2);
        for b in 0..n2 {
            let mut acc_div = Expr::zero();
            let mut acc_tr = Expr::zero();
            let mut acc_vh = Expr::zero();
            for i in 0..n2 {
                for jx in 0..n2 {
                    let w = gt2.comp(i, jx);
                    acc_vh = Expr::add(&acc_vh, &Expr::mul(w, dp2.get(&[i, b, jx])));
                    for l in 0..n2 {
                        let wg = Expr::mul(w, g2.comp(l, jx));
                        acc_div = Expr::add(&acc_div, &Expr::mul(&wg, d2.gamma(i, b, l)));
                        acc_tr = Expr::sub(&acc_tr, &Expr::mul(&wg, nj2.get(&[i, b, l])));
                    }
                }
            }
            div2.push(acc_div.simplify());
            trdj2.push(acc_tr.simplify());
            vh.push(acc_vh.simplify());
        }
        let tri_r_mu = tri_right(d1, &self.mu);
        let tri_l_f = tri_left(&self.base, d1, &self.f)?;

        Ok(Matrix::from_fn(dtot, |p, q| match (p < n1, q < n1) {
            (true, true) => {
                let t_mu = Expr::mul(
                    &Expr::mul(&inv_4f2, &norm_j2),
                    &Expr::mul(&rows.g_dmu[p], &rows.g_dmu[q]),
                );
                let inner = Expr::add(
                    &Expr::mul(&rows.g_j1df[p], &rows.g_j1df[q]),
                    &Expr::mul(&two_f, &self.g1_row(&d1_j1df[p], q)),
                );
                let t_f = Expr::mul(&Expr::mul(&inv_4f2, &n2e), &inner);
                Expr::sum([r1m.get(p, q).clone(), t_mu, t_f])
            }
            (true, false) => {
                let b = q - n1;
                let lead = Expr::mul(&Expr::mul(&mu_2f, &rows.g_dmu[p]), &trdj2[b]);
                let coef = Expr::add(&rows.pi_dmu[p], &Expr::mul(&mu_2f, &rows.g_j1df[p]));
                Expr::add(&lead, &Expr::mul(&coef, &div2[b]))
            }
            (false, true) => Expr::neg(&Expr::mul(&Expr::mul(&mu_2f, &rows.g_dmu[q]), &vh[p - n1])),
            (false, false) => {
                let (a, b) = (p - n1, q - n1);
                Expr::sum([
                    Expr::mul(&mu2, r2m.get(a, b)),
                    Expr::neg(&Expr::mul(
                        &Expr::mul(&Expr::div(&half, &self.f), &rows.ndmu),
                        pi2j.get(a, b),
                    )),
                    Expr::neg(&Expr::mul(
                        &Expr::mul(&Expr::mul(&Expr::num(n2 as f64 - 2.0), &inv_4f), &rows.njdf),
                        g2.comp(a, b),
                    )),
                    Expr::neg(&Expr::mul(
                        &Expr::mul(&Expr::mul(&n2e, &inv_4f), &rows.gmix),
                        pi2.comp(a, b),
                    )),
                    Expr::mul(&Expr::mul(&half, &tri_r_mu), pi2.comp(a, b)),
                    Expr::mul(&Expr::mul(&half, &tri_l_f), g2.comp(a, b)),
                ])
            }
        }))
    }

    /// Scalar curvature from the closed-form block rule.
    pub fn scalar_blocks(&self, d1: &ContraConnection, d2: &ContraConnection) -> Result<Expr> {
        same_chart(self.base.chart(), d1.chart())?;
        same_chart(self.fiber.chart(), d2.chart())?;
        let n2 = self.pc.fiber_dim();
        let rows = self.base_rows()?;
        let j2_endo = self.fiber.j()?;
        let j2sq = j2_endo.matrix().matmul(j2_endo.matrix());
        let norm_j2 = Expr::neg(&Expr::sum((0..n2).map(|i| j2sq.get(i, i).clone()))).simplify();
        let s1 = scalar_curv(&self.base, &ricci(&self.base, &d1.curvature()));
        let s2 = scalar_curv(&self.fiber, &ricci(&self.fiber, &d2.curvature()));
        let inv_4f2 = Expr::div(&Expr::num(0.25), &Expr::mul(&self.f, &self.f));
        let mu2_f = Expr::div(&Expr::mul(&self.mu, &self.mu), &self.f);
        let n2e = n2 as f64;
        let tri_l_f = tri_left(&self.base, d1, &self.f)?;
        Ok(Expr::sum([
            s1,
            Expr::mul(&mu2_f, &s2),
            Expr::neg(&Expr::mul(&Expr::mul(&inv_4f2, &rows.ndmu), &norm_j2)),
            Expr::neg(&Expr::mul(
                &Expr::mul(&Expr::num(n2e * (n2e - 3.0)), &inv_4f2),
                &rows.njdf,
            )),
            Expr::mul(&Expr::div(&Expr::num(n2e), &self.f), &tri_l_f),
        ]))
    }

    /// Sectional value of the mixed coordinate plane span(dx^A, dx^{(b)}) in
    /// closed form; `d1` must be the base metric connection.
    pub fn sectional_hv_expr(
        &self,
        d1: &ContraConnection,
        base_ix: usize,
        fib_ix: usize,
    ) -> Result<Expr> {
        same_chart(self.base.chart(), d1.chart())?;
        let n2 = self.pc.fiber_dim();
        let rows = self.base_rows()?;
        let g1aa = self.base.g().comp(base_ix, base_ix);
        let g2bb = self.fiber.g().comp(fib_ix, fib_ix);
        let j2b = self
            .fiber
            .j()?
            .apply(&OneForm::basis(self.fiber.chart(), fib_ix))?;
        let mut norm_j2b = Expr::zero();
        for k in 0..n2 {
            for l in 0..n2 {
                norm_j2b = Expr::add(
                    &norm_j2b,
                    &Expr::mul(
                        &Expr::mul(j2b.comp(k), j2b.comp(l)),
                        self.fiber.g().comp(k, l),
                    ),
                );
            }
        }
        let d1_j1df_a =
            d1.d_oneform(&OneForm::basis(self.base.chart(), base_ix), &rows.j1df_form)?;
        let four_f2_naa = Expr::mul(
            &Expr::num(4.0),
            &Expr::mul(&Expr::mul(&self.f, &self.f), g1aa),
        );
        let t1 = Expr::div(
            &Expr::mul(
                &Expr::mul(&rows.g_dmu[base_ix], &rows.g_dmu[base_ix]),
                &Expr::div(&norm_j2b.simplify(), g2bb),
            ),
            &four_f2_naa,
        );
        let t2 = Expr::div(
            &Expr::mul(&rows.g_j1df[base_ix], &rows.g_j1df[base_ix]),
            &four_f2_naa,
        );
        let t3 = Expr::div(
            &self.g1_row(&d1_j1df_a, base_ix),
            &Expr::mul(&Expr::mul(&Expr::num(2.0), &self.f), g1aa),
        );
        Ok(Expr::sum([t1, t2, t3]))
    }

    /// Pieces of the sectional value of a vertical coordinate plane
    /// span(dx^{(a)}, dx^{(b)}): the multiplier of the fiber sectional value,
    /// the additive remainder, and the fiber-plane denominator.
    pub fn sectional_vv_parts(&self, a: usize, b: usize) -> Result<(Expr, Expr, Expr)> {
        let rows = self.base_rows()?;
        let g2 = self.fiber.g();
        let pab = self.fiber.pi().comp(a, b);
        let den2 = Expr::sub(
            &Expr::mul(g2.comp(a, a), g2.comp(b, b)),
            &Expr::mul(g2.comp(a, b), g2.comp(a, b)),
        )
        .simplify();
        let f2 = Expr::mul(&self.f, &self.f);
        let inv_4f2 = Expr::div(&Expr::num(0.25), &f2);
        let k2_coef = Expr::div(&Expr::mul(&self.mu, &self.mu), &self.f);
        let additive = Expr::sum([
            Expr::neg(&Expr::mul(
                &Expr::mul(&Expr::num(3.0), &Expr::mul(&inv_4f2, &rows.ndmu)),
                &Expr::div(&Expr::mul(pab, pab), &den2),
            )),
            Expr::neg(&Expr::mul(&inv_4f2, &rows.njdf)),
            Expr::mul(
                &Expr::div(&rows.gmix, &Expr::mul(&Expr::num(2.0), &f2)),
                &Expr::div(&Expr::mul(pab, g2.comp(a, b)), &den2),
            ),
        ]);
        Ok((k2_coef, additive, den2))
    }

    /// Covariant derivative of the curvature assembled blockwise: the factor
    /// table on base slots, μ³ times the fiber table on fiber slots, zero
    /// across. Matches the product computation when f is Casimir on the base
    /// and μ is constant.
    pub fn dr_blocks(&self, d1: &ContraConnection, d2: &ContraConnection) -> Result<TensorField> {
        same_chart(self.base.chart(), d1.chart())?;
        same_chart(self.fiber.chart(), d2.chart())?;
        let n1 = self.pc.base_dim();
        let d = self.pc.chart().dim();
        let nr1 = d1.nabla_r(&d1.curvature());
        let nr2 = d2.nabla_r(&d2.curvature());
        let mu3 = Expr::mul(&self.mu, &Expr::mul(&self.mu, &self.mu));
        let mut out = TensorField::zeros(
            self.pc.chart(),
            vec![Variance::Contra; 4]
                .into_iter()
                .chain([Variance::Co])
                .collect(),
        );
        let mut idx = [0usize; 5];
        loop {
            if idx.iter().all(|&x| x < n1) {
                out.set(&idx, nr1.get(&idx).clone());
            } else if idx.iter().all(|&x| x >= n1) {
                let fx: Vec<usize> = idx.iter().map(|&x| x - n1).collect();
                out.set(&idx, Expr::mul(&mu3, nr2.get(&fx)));
            }
            let mut pos = 5;
            while pos > 0 {
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < d {
                    break;
                }
                idx[pos] = 0;
                if pos == 0 {
                    return Ok(out);
                }
            }
        }
    }
}

/// Base-side pairing rows shared by the closed-form block evaluators: the
/// g₁/Π₁ contractions of dμ and J₁df and the three scalar pairings built
/// from them.
struct BaseRows {
    dmu_form: OneForm,
    j1df_form: OneForm,
    dmu: Vec<Expr>,
    j1df: Vec<Expr>,
    g_dmu: Vec<Expr>,
    g_j1df: Vec<Expr>,
    pi_dmu: Vec<Expr>,
    pi_j1df: Vec<Expr>,
    ndmu: Expr,
    njdf: Expr,
    gmix: Expr,
}

/// Serializable description of a warped pair: two factor charts plus the
/// conformal factor `f` (positive on the sampling box) and the bivector
/// weight `mu`, both expressions in base coordinates. The optional fields
/// feed the auxiliary product tensors: `f1`/`f2` are the Hamiltonian
/// directions of the wedge tensor, `mu1`/`mu2` the factor weights of the
/// two-parameter product tensor.
#[derive(Debug, Clone, Deserialize)]
pub struct WarpedDef {
    pub base: ChartDef,
    pub fiber: ChartDef,
    pub f: String,
    pub mu: String,
    #[serde(default)]
    pub f1: Option<String>,
    #[serde(default)]
    pub f2: Option<String>,
    #[serde(default)]
    pub mu1: Option<String>,
    #[serde(default)]
    pub mu2: Option<String>,
}

/// A parsed warped definition: the structure plus whichever optional
/// weights were present.
#[derive(Debug, Clone)]
pub struct WarpedInput {
    pub ws: WarpedStructure,
    pub f1: Option<Expr>,
    pub f2: Option<Expr>,
    pub mu1: Option<Expr>,
    pub mu2: Option<Expr>,
}

impl WarpedDef {
    pub fn from_json(src: &str) -> Result<WarpedDef> {
        Ok(serde_json::from_str(src)?)
    }

    pub fn into_input(self) -> Result<WarpedInput> {
        let (base_chart, base) = self.base.into_triple()?;
        let (fiber_chart, fiber) = self.fiber.into_triple()?;
        let f = base_chart.parse(&self.f)?;
        let mu = base_chart.parse(&self.mu)?;
        let ws = WarpedStructure::new(&base, &fiber, &f, &mu)?;
        let on_base = |s: &Option<String>| -> Result<Option<Expr>> {
            s.as_deref().map(|s| base_chart.parse(s)).transpose()
        };
        let on_fiber = |s: &Option<String>| -> Result<Option<Expr>> {
            s.as_deref().map(|s| fiber_chart.parse(s)).transpose()
        };
        Ok(WarpedInput {
            f1: on_base(&self.f1)?,
            mu1: on_base(&self.mu1)?,
            f2: on_fiber(&self.f2)?,
            mu2: on_fiber(&self.mu2)?,
            ws,
        })
    }
}

/// `X_{f₁}^h ∧ X_{f₂}^v`: the wedge of the two lifted Hamiltonian fields.
/// Always a Poisson tensor, whatever the factors.
pub fn wedge_tensor(
    pc: &ProductChart,
    pi1: &Bivector,
    pi2: &Bivector,
    f1: &Expr,
    f2: &Expr,
) -> Result<Bivector> {
    same_chart(pc.base(), pi1.chart())?;
    same_chart(pc.fiber(), pi2.chart())?;
    pc.lift_h(f1)?;
    pc.lift_v(f2)?;
    let x1 = anchor_apply(pi1, &OneForm::d_scalar(pc.base(), f1))?;
    let x2 = anchor_apply(pi2, &OneForm::d_scalar(pc.fiber(), f2))?;
    let n1 = pc.base_dim();
    let d = pc.chart().dim();
    let m = Matrix::from_fn(d, |i, j| {
        if i < n1 && j >= n1 {
            Expr::mul(x1.comp(i), x2.comp(j - n1))
        } else if i >= n1 && j < n1 {
            Expr::neg(&Expr::mul(x1.comp(j), x2.comp(i - n1)))
        } else {
            Expr::zero()
        }
    });
    Ok(Bivector::from_matrix(pc.chart(), m))
}

/// `μ₂^v Π₁^h + μ₁^h Π₂^v + μ₁^h μ₂^v (X_{f₁}^h ∧ X_{f₂}^v)`; Poisson when
/// the factors are Poisson and each μ_i is Casimir on its factor.
pub fn lambda_tensor(
    pc: &ProductChart,
    pi1: &Bivector,
    pi2: &Bivector,
    mu1: &Expr,
    mu2: &Expr,
    f1: &Expr,
    f2: &Expr,
) -> Result<Bivector> {
    pc.lift_h(mu1)?;
    pc.lift_v(mu2)?;
    let wedge = wedge_tensor(pc, pi1, pi2, f1, f2)?;
    let n1 = pc.base_dim();
    let d = pc.chart().dim();
    let mu12 = Expr::mul(mu1, mu2);
    let m = Matrix::from_fn(d, |i, j| {
        if i < n1 && j < n1 {
            Expr::mul(mu2, pi1.comp(i, j))
        } else if i >= n1 && j >= n1 {
            Expr::mul(mu1, pi2.comp(i - n1, j - n1))
        } else {
            Expr::mul(&mu12, wedge.comp(i, j))
        }
    });
    Ok(Bivector::from_matrix(pc.chart(), m))
}
