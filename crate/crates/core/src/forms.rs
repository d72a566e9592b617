//! Sparse exterior algebra on a chart. Degree-r forms and multivectors are
//! tables keyed by coordinate-index bitmasks over the sorted basis
//! dx^{i1}∧…∧dx^{ir} (resp. ∂_{i1}∧…∧∂_{ir}), i1 < … < ir.

use crate::chart::ChartRef;
use crate::error::{Error, Result};
use crate::expr::{EvalCtx, Expr, Point};
use crate::tensor::{same_chart, OneForm, VectorField};
use std::collections::BTreeMap;

pub type Mask = u32;

/// Sign of dx^I ∧ dx^J as ±(sorted union), or None when indices repeat.
pub fn mask_wedge(i: Mask, j: Mask) -> Option<(Mask, i32)> {
    if i & j != 0 {
        return None;
    }
    let mut inv = 0u32;
    let mut rest = j;
    while rest != 0 {
        let b = rest.trailing_zeros();
        inv += (i >> (b + 1)).count_ones();
        rest &= rest - 1;
    }
    Some((i | j, if inv.is_multiple_of(2) { 1 } else { -1 }))
}

fn mask_indices(mut m: Mask) -> Vec<usize> {
    let mut out = Vec::new();
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

macro_rules! alternating {
    ($T:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Debug, Clone)]
        pub struct $T {
            chart: ChartRef,
            degree: usize,
            comps: BTreeMap<Mask, Expr>,
        }

        impl $T {
            /// Degrees above the chart dim are fine: those spaces are trivial
            /// and the table just stays empty.
            pub fn zero(chart: &ChartRef, degree: usize) -> $T {
                $T {
                    chart: chart.clone(),
                    degree,
                    comps: BTreeMap::new(),
                }
            }

            /// Degree-0 element from a scalar.
            pub fn scalar(chart: &ChartRef, phi: &Expr) -> $T {
                let mut comps = BTreeMap::new();
                if !phi.is_zero() {
                    comps.insert(0, phi.clone());
                }
                $T {
                    chart: chart.clone(),
                    degree: 0,
                    comps,
                }
            }

            /// Basis element for a sorted index set given as a bitmask.
            pub fn basis(chart: &ChartRef, mask: Mask) -> Result<$T> {
                let degree = mask.count_ones() as usize;
                if degree > chart.dim()
                    || mask_indices(mask).last().is_some_and(|&i| i >= chart.dim())
                {
                    return Err(Error::DegreeOverflow {
                        degree,
                        dim: chart.dim(),
                    });
                }
                let mut comps = BTreeMap::new();
                comps.insert(mask, Expr::one());
                Ok($T {
                    chart: chart.clone(),
                    degree,
                    comps,
                })
            }

            pub fn chart(&self) -> &ChartRef {
                &self.chart
            }

            pub fn degree(&self) -> usize {
                self.degree
            }

            pub fn comps(&self) -> &BTreeMap<Mask, Expr> {
                &self.comps
            }

            pub fn comp(&self, mask: Mask) -> Expr {
                self.comps.get(&mask).cloned().unwrap_or_else(Expr::zero)
            }

            pub fn insert(&mut self, mask: Mask, e: Expr) {
                assert_eq!(mask.count_ones() as usize, self.degree, "degree mismatch");
                if e.is_zero() {
                    self.comps.remove(&mask);
                } else {
                    self.comps.insert(mask, e);
                }
            }

            /// Add `sign · e` into the slot for `mask`.
            pub fn accumulate(&mut self, mask: Mask, sign: i32, e: &Expr) {
                let signed = if sign >= 0 { e.clone() } else { Expr::neg(e) };
                let cur = self.comp(mask);
                let next = Expr::add(&cur, &signed);
                self.insert(mask, next);
            }

            pub fn add(&self, rhs: &$T) -> Result<$T> {
                same_chart(&self.chart, &rhs.chart)?;
                assert_eq!(self.degree, rhs.degree, "degree mismatch in add");
                let mut out = self.clone();
                for (m, e) in &rhs.comps {
                    out.accumulate(*m, 1, e);
                }
                Ok(out)
            }

            pub fn sub(&self, rhs: &$T) -> Result<$T> {
                same_chart(&self.chart, &rhs.chart)?;
                assert_eq!(self.degree, rhs.degree, "degree mismatch in sub");
                let mut out = self.clone();
                for (m, e) in &rhs.comps {
                    out.accumulate(*m, -1, e);
                }
                Ok(out)
            }

            pub fn scale(&self, c: &Expr) -> $T {
                let mut out = $T {
                    chart: self.chart.clone(),
                    degree: self.degree,
                    comps: BTreeMap::new(),
                };
                for (m, e) in &self.comps {
                    out.insert(*m, Expr::mul(c, e));
                }
                out
            }

            pub fn neg(&self) -> $T {
                self.scale(&Expr::num(-1.0))
            }

            pub fn wedge(&self, rhs: &$T) -> Result<$T> {
                same_chart(&self.chart, &rhs.chart)?;
                let mut out = $T::zero(&self.chart, self.degree + rhs.degree);
                for (ma, ea) in &self.comps {
                    for (mb, eb) in &rhs.comps {
                        if let Some((m, s)) = mask_wedge(*ma, *mb) {
                            out.accumulate(m, s, &Expr::mul(ea, eb));
                        }
                    }
                }
                Ok(out)
            }

            pub fn eval_at(&self, p: &Point) -> Result<BTreeMap<Mask, f64>> {
                let mut ctx = EvalCtx::new(p);
                let mut out = BTreeMap::new();
                for (m, e) in &self.comps {
                    out.insert(*m, ctx.eval(e)?);
                }
                Ok(out)
            }

            pub fn max_abs_at(&self, p: &Point) -> Result<f64> {
                let mut ctx = EvalCtx::new(p);
                let mut best: f64 = 0.0;
                for e in self.comps.values() {
                    best = best.max(ctx.eval(e)?.abs());
                }
                Ok(best)
            }
        }
    };
}

alternating!(
    Form,
    "Differential form of homogeneous degree, sparse over the sorted coframe basis."
);
alternating!(
    Multivector,
    "Contravariant alternating tensor of homogeneous degree, sparse over the sorted ∂ basis."
);

impl Form {
    pub fn from_oneform(alpha: &OneForm) -> Form {
        let mut out = Form {
            chart: alpha.chart().clone(),
            degree: 1,
            comps: BTreeMap::new(),
        };
        for (i, e) in alpha.comps().iter().enumerate() {
            out.insert(1 << i, e.clone());
        }
        out
    }

    pub fn to_oneform(&self) -> OneForm {
        assert_eq!(self.degree, 1);
        let comps = (0..self.chart.dim()).map(|i| self.comp(1 << i)).collect();
        OneForm::new(&self.chart, comps)
    }

    /// Exterior derivative.
    pub fn d(&self) -> Form {
        let mut out = Form::zero(&self.chart, self.degree + 1);
        for (mask, w) in &self.comps {
            for (m, coord) in self.chart.coords().iter().enumerate() {
                let dm = 1 << m;
                if let Some((nm, s)) = mask_wedge(dm, *mask) {
                    let dw = w.diff(coord);
                    if !dw.is_zero() {
                        out.accumulate(nm, s, &dw);
                    }
                }
            }
        }
        out
    }

    /// ω(X_1, …, X_r) with the determinant convention.
    pub fn apply_vectors(&self, args: &[&VectorField]) -> Result<Expr> {
        assert_eq!(args.len(), self.degree, "argument count != degree");
        for x in args {
            same_chart(&self.chart, x.chart())?;
        }
        let mut acc = Expr::zero();
        for (mask, w) in &self.comps {
            let rows = mask_indices(*mask);
            let det = alternating_det(&rows, args.len(), |s, t| args[t].comp(rows[s]).clone());
            acc = Expr::add(&acc, &Expr::mul(w, &det));
        }
        Ok(acc)
    }
}

impl Multivector {
    pub fn from_vector(x: &VectorField) -> Multivector {
        let mut out = Multivector {
            chart: x.chart().clone(),
            degree: 1,
            comps: BTreeMap::new(),
        };
        for (i, e) in x.comps().iter().enumerate() {
            out.insert(1 << i, e.clone());
        }
        out
    }

    pub fn to_vector(&self) -> VectorField {
        assert_eq!(self.degree, 1);
        let comps = (0..self.chart.dim()).map(|i| self.comp(1 << i)).collect();
        VectorField::new(&self.chart, comps)
    }

    /// Q(α_1, …, α_r) with the determinant convention.
    pub fn apply_forms(&self, args: &[&OneForm]) -> Result<Expr> {
        assert_eq!(args.len(), self.degree, "argument count != degree");
        for a in args {
            same_chart(&self.chart, a.chart())?;
        }
        let mut acc = Expr::zero();
        for (mask, w) in &self.comps {
            let rows = mask_indices(*mask);
            let det = alternating_det(&rows, args.len(), |s, t| args[t].comp(rows[s]).clone());
            acc = Expr::add(&acc, &Expr::mul(w, &det));
        }
        Ok(acc)
    }
}

/// ⟨ω, Q⟩ = Σ_I ω_I Q_I over the shared sorted basis.
pub fn pair_form_multivector(omega: &Form, q: &Multivector) -> Result<Expr> {
    same_chart(omega.chart(), q.chart())?;
    assert_eq!(omega.degree(), q.degree(), "degree mismatch in pairing");
    let mut acc = Expr::zero();
    for (m, e) in omega.comps() {
        acc = Expr::add(&acc, &Expr::mul(e, &q.comp(*m)));
    }
    Ok(acc)
}

/// det over r×r with entries supplied by closure (s = basis slot, t = arg).
fn alternating_det(rows: &[usize], r: usize, entry: impl Fn(usize, usize) -> Expr) -> Expr {
    debug_assert_eq!(rows.len(), r);
    if r == 0 {
        return Expr::one();
    }
    let mut acc = Expr::zero();
    let mut perm: Vec<usize> = (0..r).collect();
    loop {
        let sign = permutation_sign(&perm);
        let mut prod = Expr::one();
        for (s, &t) in perm.iter().enumerate() {
            prod = Expr::mul(&prod, &entry(s, t));
        }
        acc = if sign > 0 {
            Expr::add(&acc, &prod)
        } else {
            Expr::sub(&acc, &prod)
        };
        if !next_permutation(&mut perm) {
            break;
        }
    }
    acc
}

fn permutation_sign(perm: &[usize]) -> i32 {
    let mut inv = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}
