//! Poisson calculus on a chart: anchor map, scalar and Koszul brackets, the
//! Schouten self-bracket, and the Jacobi/Casimir/rank diagnostics built on
//! them.

use crate::chart::ChartRef;
use crate::error::Result;
use crate::expr::{EvalCtx, Expr, Point};
use crate::tensor::{same_chart, Bivector, OneForm, TensorField, Variance, VectorField};

/// Fully antisymmetric 3-contravariant tensor, e.g. the Schouten
/// self-bracket of a bivector.
pub type TrivectorField = TensorField;

/// ♯_Π α, the anchor of a 1-form: (♯α)^m = Σ_a α_a Π^{am}.
pub fn anchor_apply(pi: &Bivector, alpha: &OneForm) -> Result<VectorField> {
    same_chart(pi.chart(), alpha.chart())?;
    let d = pi.chart().dim();
    let comps = (0..d)
        .map(|m| Expr::sum((0..d).map(|a| Expr::mul(alpha.comp(a), pi.comp(a, m)))))
        .collect();
    Ok(VectorField::new(pi.chart(), comps))
}

/// ♯_Π dx^i as a derivation on scalars, used pervasively by the connection
/// formulas: (♯dx^i)(φ) = Σ_m Π^{im} ∂_m φ.
pub fn anchor_coframe_apply(pi: &Bivector, i: usize, phi: &Expr) -> Expr {
    let ch = pi.chart();
    Expr::sum(
        ch.coords()
            .iter()
            .enumerate()
            .map(|(m, c)| Expr::mul(pi.comp(i, m), &phi.diff(c))),
    )
}

/// {φ, ψ} = Π(dφ, dψ).
pub fn poisson_bracket(pi: &Bivector, phi: &Expr, psi: &Expr) -> Expr {
    let ch = pi.chart();
    let d = ch.dim();
    let mut acc = Expr::zero();
    for i in 0..d {
        for j in 0..d {
            let t = Expr::mul(
                &Expr::mul(&phi.diff(&ch.coords()[i]), &psi.diff(&ch.coords()[j])),
                pi.comp(i, j),
            );
            acc = Expr::add(&acc, &t);
        }
    }
    acc
}

/// Components of the Schouten self-bracket [Π,Π]_S: the cyclic sum over
/// (i,j,k) of Σ_l ∂_l Π^{ij} Π^{lk}. Π is Poisson iff this vanishes.
pub fn schouten_self(pi: &Bivector) -> TrivectorField {
    let ch = pi.chart();
    let d = ch.dim();
    let mut t = TensorField::zeros(ch, vec![Variance::Contra; 3]);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let mut acc = Expr::zero();
                for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                    for (l, coord) in ch.coords().iter().enumerate() {
                        let term = Expr::mul(&pi.comp(a, b).diff(coord), pi.comp(l, c));
                        acc = Expr::add(&acc, &term);
                    }
                }
                t.set(&[i, j, k], acc);
            }
        }
    }
    t
}

/// Jacobiator ∮ {{φ,ψ},χ} over the cyclic permutations.
pub fn jacobiator(pi: &Bivector, phi: &Expr, psi: &Expr, chi: &Expr) -> Expr {
    let mut acc = Expr::zero();
    for (a, b, c) in [(phi, psi, chi), (psi, chi, phi), (chi, phi, psi)] {
        acc = Expr::add(&acc, &poisson_bracket(pi, &poisson_bracket(pi, a, b), c));
    }
    acc
}

/// Outcome of a sampled yes/no diagnostic.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub pass: bool,
    pub max_residual: f64,
    pub samples: usize,
}

impl CheckOutcome {
    fn from_residual(max_residual: f64, samples: usize, tol: f64) -> CheckOutcome {
        CheckOutcome {
            pass: max_residual <= tol,
            max_residual,
            samples,
        }
    }
}

/// Passes iff [Π,Π]_S vanishes at every point, cross-checked through the
/// Jacobiator of five fixed polynomial triples.
pub fn is_poisson(pi: &Bivector, points: &[Point], tol: f64) -> Result<CheckOutcome> {
    let tri = schouten_self(pi);
    let mut worst: f64 = 0.0;
    for p in points {
        worst = worst.max(tri.max_abs_at(p)?);
    }
    let ch = pi.chart();
    for (a, b, c) in polynomial_triples(ch) {
        let jac = jacobiator(pi, &a, &b, &c);
        for p in points {
            worst = worst.max(jac.eval(p)?.abs());
        }
    }
    Ok(CheckOutcome::from_residual(worst, points.len(), tol))
}

fn polynomial_triples(ch: &ChartRef) -> Vec<(Expr, Expr, Expr)> {
    // five fixed low-degree triples touching every coordinate
    let d = ch.dim();
    let x = |i: usize| Expr::var(&ch.coords()[i % d]);
    let sq = |i: usize| Expr::powc(&x(i), 2.0);
    let mix = |i: usize, j: usize| Expr::mul(&x(i), &x(j));
    vec![
        (x(0), x(1), x(2)),
        (sq(0), x(1), mix(1, 2)),
        (mix(0, 1), sq(2), x(0)),
        (
            Expr::add(&x(0), &sq(1)),
            Expr::sub(&x(2), &mix(0, 1)),
            sq(2),
        ),
        (mix(0, 2), mix(1, 2), Expr::add(&sq(0), &x(1))),
    ]
}

/// Koszul bracket of 1-forms: L_{♯α}β − L_{♯β}α − d(Π(α,β)).
pub fn koszul_bracket(pi: &Bivector, alpha: &OneForm, beta: &OneForm) -> Result<OneForm> {
    same_chart(pi.chart(), alpha.chart())?;
    same_chart(pi.chart(), beta.chart())?;
    let sa = anchor_apply(pi, alpha)?;
    let sb = anchor_apply(pi, beta)?;
    let la = lie_derivative_oneform(&sa, beta)?;
    let lb = lie_derivative_oneform(&sb, alpha)?;
    let dpair = OneForm::d_scalar(pi.chart(), &pi.pair(alpha, beta)?);
    la.sub(&lb)?.sub(&dpair)
}

/// (L_X β)_j = Σ_k X^k ∂_k β_j + β_k ∂_j X^k.
pub fn lie_derivative_oneform(x: &VectorField, beta: &OneForm) -> Result<OneForm> {
    same_chart(x.chart(), beta.chart())?;
    let ch = x.chart();
    let d = ch.dim();
    let comps = (0..d)
        .map(|j| {
            let transport = x.apply_scalar(beta.comp(j));
            let strain = Expr::sum(
                (0..d).map(|k| Expr::mul(beta.comp(k), &x.comp(k).diff(&ch.coords()[j]))),
            );
            Expr::add(&transport, &strain)
        })
        .collect();
    Ok(OneForm::new(ch, comps))
}

/// Passes iff ♯_Π dφ vanishes at every point.
pub fn is_casimir(pi: &Bivector, phi: &Expr, points: &[Point], tol: f64) -> Result<CheckOutcome> {
    let x = anchor_apply(pi, &OneForm::d_scalar(pi.chart(), phi))?;
    let mut worst: f64 = 0.0;
    for p in points {
        let mut ctx = EvalCtx::new(p);
        for c in x.comps() {
            worst = worst.max(ctx.eval(c)?.abs());
        }
    }
    Ok(CheckOutcome::from_residual(worst, points.len(), tol))
}

/// Numeric rank of Π at a point, singular values cut at 1e-9 of the largest.
pub fn rank_at(pi: &Bivector, p: &Point) -> Result<usize> {
    let m = pi.matrix().eval_at(p)?;
    let svd = m.svd(false, false);
    let top = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if top == 0.0 {
        return Ok(0);
    }
    Ok(svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-9 * top)
        .count())
}
