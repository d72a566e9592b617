//! The bracket of differential forms induced by a contravariant connection,
//! and the metacurvature obstruction to its graded Jacobi identity.
//!
//! On scalars the bracket is `{φ, η} = D_{dφ} η`. The extension to higher
//! degree is pinned down by three properties: graded antisymmetry, `d` acting
//! as a derivation, and the wedge product rule. Those force a concrete
//! reduction: expand the left argument over the coordinate coframe, reduce
//! `{dx_i, η}` through the derivation property of `d`, and peel wedge factors
//! with the product rule. Well-definedness is not assumed; tests compare
//! independent reduction orders.

use crate::chart::ChartRef;
use crate::error::Result;
use crate::expr::{Expr, Point};
use crate::forms::{Form, Mask};
use crate::tensor::{same_chart, Bivector, OneForm};
use crate::ContraConnection;

#[derive(Debug, Clone)]
pub struct FormBracketContext {
    conn: ContraConnection,
}

/// Outcome of the metaflatness check: flatness of the connection together
/// with vanishing of the metacurvature, with the graded Jacobi residual
/// reported alongside since the two vanish together.
#[derive(Debug, Clone)]
pub struct MetaflatCheck {
    pub pass: bool,
    pub curvature_residual: f64,
    pub meta_residual: f64,
    pub jacobi_residual: f64,
    pub samples: usize,
}

impl FormBracketContext {
    pub fn new(conn: ContraConnection) -> FormBracketContext {
        FormBracketContext { conn }
    }

    pub fn conn(&self) -> &ContraConnection {
        &self.conn
    }

    pub fn pi(&self) -> &Bivector {
        self.conn.pi()
    }

    pub fn chart(&self) -> &ChartRef {
        self.conn.chart()
    }

    /// `{ω, η}` for homogeneous forms, degree p+q (trivially zero above the
    /// chart dimension).
    pub fn bracket(&self, omega: &Form, eta: &Form) -> Result<Form> {
        same_chart(self.chart(), omega.chart())?;
        same_chart(self.chart(), eta.chart())?;
        let p = omega.degree();
        let q = eta.degree();
        if p == 0 {
            let dphi = OneForm::d_scalar(self.chart(), &omega.comp(0));
            return self.conn.d_form(&dphi, eta);
        }
        let mut out = Form::zero(self.chart(), p + q);
        let sign = if (p * q).is_multiple_of(2) { 1.0 } else { -1.0 };
        for (&mask, a) in omega.comps() {
            // {a·dx_I, η} = (−1)^{pq} (D_{da}η) ∧ dx_I + a·{dx_I, η}
            let da = OneForm::d_scalar(self.chart(), a);
            let lead = self
                .conn
                .d_form(&da, eta)?
                .wedge(&Form::basis(self.chart(), mask)?)?;
            out = out.add(&lead.scale(&Expr::num(sign)))?;
            out = out.add(&self.bracket_coframe(mask, eta)?.scale(a))?;
        }
        Ok(out)
    }

    /// `{dx_I, η}` by peeling coframe factors off the front.
    fn bracket_coframe(&self, mask: Mask, eta: &Form) -> Result<Form> {
        let p = mask.count_ones() as usize;
        let q = eta.degree();
        if p == 1 {
            // {dx_i, η} = d(D_{dx_i}η) − D_{dx_i}(dη), forced by d being a
            // derivation applied to {x_i, η}
            let di = OneForm::basis(self.chart(), mask.trailing_zeros() as usize);
            let lead = self.conn.d_form(&di, eta)?.d();
            return lead.sub(&self.conn.d_form(&di, &eta.d())?);
        }
        let i1 = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i1);
        let s = if ((p - 1) * q).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        let b1 = self
            .bracket_coframe(1 << i1, eta)?
            .wedge(&Form::basis(self.chart(), rest)?)?;
        let b2 = Form::basis(self.chart(), 1 << i1)?.wedge(&self.bracket_coframe(rest, eta)?)?;
        b1.scale(&Expr::num(s)).add(&b2)
    }

    /// `−(−1)^{pq} {η, ω}`: the same bracket through the reduction of the
    /// other argument. Agreement with [`FormBracketContext::bracket`] is the
    /// well-definedness statement for the extension.
    pub fn bracket_flipped(&self, omega: &Form, eta: &Form) -> Result<Form> {
        let p = omega.degree();
        let q = eta.degree();
        let flipped = self.bracket(eta, omega)?;
        Ok(if (p * q).is_multiple_of(2) {
            flipped.neg()
        } else {
            flipped
        })
    }

    /// `M(dφ, α, β) = {φ,{α,β}} − {{φ,α},β} − {{φ,β},α}`, meaningful when the
    /// connection is flat (callers check; see [`FormBracketContext::is_metaflat`]).
    pub fn metacurvature(&self, phi: &Expr, alpha: &OneForm, beta: &OneForm) -> Result<Form> {
        let fphi = Form::scalar(self.chart(), phi);
        let fa = Form::from_oneform(alpha);
        let fb = Form::from_oneform(beta);
        let t1 = self.bracket(&fphi, &self.bracket(&fa, &fb)?)?;
        let t2 = self.bracket(&self.bracket(&fphi, &fa)?, &fb)?;
        let t3 = self.bracket(&self.bracket(&fphi, &fb)?, &fa)?;
        t1.sub(&t2)?.sub(&t3)
    }

    /// Left side of the graded Jacobi identity,
    /// `{{ω,η},λ} − {ω,{η,λ}} + (−1)^{pq}{η,{ω,λ}}`.
    pub fn jacobi_defect(&self, omega: &Form, eta: &Form, lambda: &Form) -> Result<Form> {
        let p = omega.degree();
        let q = eta.degree();
        let t1 = self.bracket(&self.bracket(omega, eta)?, lambda)?;
        let t2 = self.bracket(omega, &self.bracket(eta, lambda)?)?;
        let t3 = self.bracket(eta, &self.bracket(omega, lambda)?)?;
        let signed = if (p * q).is_multiple_of(2) {
            t3
        } else {
            t3.neg()
        };
        t1.sub(&t2)?.add(&signed)
    }

    /// Metaflatness over sampled points: curvature and metacurvature both
    /// below `tol`, with the metacurvature probed on every coordinate
    /// function plus two quadratics against all coframe pairs, and the
    /// graded Jacobi defect reported on five fixed low-degree form triples.
    pub fn is_metaflat(&self, pts: &[Point], tol: f64) -> Result<MetaflatCheck> {
        let ch = self.chart().clone();
        let d = ch.dim();
        let r = self.conn.curvature();
        let mut curvature_residual: f64 = 0.0;
        for p in pts {
            curvature_residual = curvature_residual.max(r.max_abs_at(p)?);
        }

        let mut probes: Vec<Expr> = ch.coords().iter().map(Expr::var).collect();
        let x0 = Expr::var(&ch.coords()[0]);
        probes.push(Expr::mul(&x0, &x0));
        if d > 1 {
            probes.push(Expr::mul(&x0, &Expr::var(&ch.coords()[1])));
        }
        let mut meta_residual: f64 = 0.0;
        for phi in &probes {
            for i in 0..d {
                for j in i..d {
                    let m =
                        self.metacurvature(phi, &OneForm::basis(&ch, i), &OneForm::basis(&ch, j))?;
                    for p in pts {
                        meta_residual = meta_residual.max(m.max_abs_at(p)?);
                    }
                }
            }
        }

        let mut jacobi_residual: f64 = 0.0;
        for defect in self.jacobi_probe_defects()? {
            for p in pts {
                jacobi_residual = jacobi_residual.max(defect.max_abs_at(p)?);
            }
        }

        Ok(MetaflatCheck {
            pass: curvature_residual <= tol && meta_residual <= tol,
            curvature_residual,
            meta_residual,
            jacobi_residual,
            samples: pts.len(),
        })
    }

    /// Five deterministic low-degree form triples for the Jacobi probe.
    fn jacobi_probe_defects(&self) -> Result<Vec<Form>> {
        let ch = self.chart().clone();
        let d = ch.dim();
        let coord = |i: usize| Expr::var(&ch.coords()[i % d]);
        let f0 = Form::scalar(&ch, &coord(0));
        let f1 = Form::scalar(&ch, &Expr::mul(&coord(0), &coord(1)));
        // every one-form probe keeps a component along each of the first two
        // coordinates so no single metacurvature entry can hide from all five
        let mut a0 = Form::basis(&ch, 1)?.scale(&Expr::add(&Expr::one(), &coord(1)));
        a0.insert(1 << (1 % d), coord(1));
        let mut a1 = Form::basis(&ch, 1)?.scale(&coord(0));
        a1.insert(1 << (1 % d), Expr::add(&Expr::num(2.0), &coord(0)));
        let a2 = Form::from_oneform(&OneForm::d_scalar(&ch, &Expr::mul(&coord(0), &coord(0))));
        let triples: [[&Form; 3]; 5] = [
            [&f0, &f1, &a0],
            [&f0, &a0, &a1],
            [&f1, &a1, &a2],
            [&a0, &a1, &f0],
            [&a0, &a1, &a2],
        ];
        triples
            .iter()
            .map(|[a, b, c]| self.jacobi_defect(a, b, c))
            .collect()
    }
}
