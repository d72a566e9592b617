//! Contravariant connections: the Levi-Civita construction from the Koszul
//! formula, derivatives of one-forms/vectors/forms/multivectors, torsion and
//! curvature with their contractions, and the divergence-style trace
//! operators.

use crate::chart::{ChartRef, Triple};
use crate::error::{Error, Result};
use crate::expr::{Expr, Point};
use crate::forms::{mask_wedge, Form, Multivector};
use crate::poisson::{anchor_apply, anchor_coframe_apply};
use crate::tensor::{same_chart, Bivector, Matrix, OneForm, TensorField, Variance, VectorField};

/// Connection coefficients Γ^{ij}_k with D_{dx^i} dx^j = Σ_k Γ^{ij}_k dx^k.
/// Carries its bivector, since every derivative formula routes scalars
/// through the anchor.
#[derive(Debug, Clone)]
pub struct ContraConnection {
    chart: ChartRef,
    pi: Bivector,
    gamma: Vec<Expr>,
}

impl ContraConnection {
    pub fn from_table(
        chart: &ChartRef,
        pi: &Bivector,
        mut coeff: impl FnMut(usize, usize, usize) -> Expr,
    ) -> Result<ContraConnection> {
        same_chart(chart, pi.chart())?;
        let d = chart.dim();
        let mut gamma = Vec::with_capacity(d * d * d);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    gamma.push(coeff(i, j, k));
                }
            }
        }
        Ok(ContraConnection {
            chart: chart.clone(),
            pi: pi.clone(),
            gamma,
        })
    }

    /// The torsion-free metric connection of (Π, g): Γ^{ij}_k = Σ_l K^{ijl}
    /// g̃_{lk}, where 2K^{ijl} collects the six Koszul terms evaluated on the
    /// coordinate coframe.
    pub fn levi_civita(t: &Triple) -> ContraConnection {
        let ch = t.chart();
        let d = ch.dim();
        let pi = t.pi();
        let g = t.g();
        let gt = t.gt();
        let coords = ch.coords();
        let mut two_k = vec![Expr::zero(); d * d * d];
        for i in 0..d {
            for j in 0..d {
                for l in 0..d {
                    let mut acc = Expr::zero();
                    for (m, cm) in coords.iter().enumerate() {
                        let transport = Expr::sub(
                            &Expr::add(
                                &Expr::mul(pi.comp(i, m), &g.comp(j, l).diff(cm)),
                                &Expr::mul(pi.comp(j, m), &g.comp(i, l).diff(cm)),
                            ),
                            &Expr::mul(pi.comp(l, m), &g.comp(i, j).diff(cm)),
                        );
                        let bracket = Expr::add(
                            &Expr::mul(&pi.comp(i, j).diff(cm), g.comp(m, l)),
                            &Expr::add(
                                &Expr::mul(&pi.comp(l, i).diff(cm), g.comp(m, j)),
                                &Expr::mul(&pi.comp(l, j).diff(cm), g.comp(m, i)),
                            ),
                        );
                        acc = Expr::add(&acc, &Expr::add(&transport, &bracket));
                    }
                    two_k[(i * d + j) * d + l] = acc;
                }
            }
        }
        let half = Expr::num(0.5);
        let mut gamma = Vec::with_capacity(d * d * d);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let contracted = Expr::sum(
                        (0..d).map(|l| Expr::mul(&two_k[(i * d + j) * d + l], gt.comp(l, k))),
                    );
                    gamma.push(Expr::mul(&half, &contracted).simplify());
                }
            }
        }
        ContraConnection {
            chart: ch.clone(),
            pi: pi.clone(),
            gamma,
        }
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn pi(&self) -> &Bivector {
        &self.pi
    }

    pub fn gamma(&self, i: usize, j: usize, k: usize) -> &Expr {
        let d = self.chart.dim();
        &self.gamma[(i * d + j) * d + k]
    }

    /// D_α φ = ♯α(φ).
    pub fn d_scalar(&self, alpha: &OneForm, phi: &Expr) -> Result<Expr> {
        Ok(anchor_apply(&self.pi, alpha)?.apply_scalar(phi))
    }

    /// (D_α β)_k = Σ_i α_i [♯dx^i(β_k) + Σ_j β_j Γ^{ij}_k].
    pub fn d_oneform(&self, alpha: &OneForm, beta: &OneForm) -> Result<OneForm> {
        same_chart(&self.chart, alpha.chart())?;
        same_chart(&self.chart, beta.chart())?;
        let d = self.chart.dim();
        let comps = (0..d)
            .map(|k| {
                Expr::sum((0..d).map(|i| {
                    let transport = anchor_coframe_apply(&self.pi, i, beta.comp(k));
                    let rotation =
                        Expr::sum((0..d).map(|j| Expr::mul(beta.comp(j), self.gamma(i, j, k))));
                    Expr::mul(alpha.comp(i), &Expr::add(&transport, &rotation))
                }))
            })
            .collect();
        Ok(OneForm::new(&self.chart, comps))
    }

    /// (D_α X)^j = Σ_i α_i [♯dx^i(X^j) − Σ_k Γ^{ij}_k X^k], the dual of
    /// [`ContraConnection::d_oneform`] under the pairing identity.
    pub fn d_vector(&self, alpha: &OneForm, x: &VectorField) -> Result<VectorField> {
        same_chart(&self.chart, alpha.chart())?;
        same_chart(&self.chart, x.chart())?;
        let d = self.chart.dim();
        let comps = (0..d)
            .map(|j| {
                Expr::sum((0..d).map(|i| {
                    let transport = anchor_coframe_apply(&self.pi, i, x.comp(j));
                    let rotation =
                        Expr::sum((0..d).map(|k| Expr::mul(x.comp(k), self.gamma(i, j, k))));
                    Expr::mul(alpha.comp(i), &Expr::sub(&transport, &rotation))
                }))
            })
            .collect();
        Ok(VectorField::new(&self.chart, comps))
    }

    /// Derivation over the wedge, extending the one-form action to degree r.
    pub fn d_form(&self, alpha: &OneForm, omega: &Form) -> Result<Form> {
        same_chart(&self.chart, alpha.chart())?;
        same_chart(&self.chart, omega.chart())?;
        let d = self.chart.dim();
        let sharp = anchor_apply(&self.pi, alpha)?;
        let mut out = Form::zero(&self.chart, omega.degree());
        for (&mask, w) in omega.comps() {
            out.accumulate(mask, 1, &sharp.apply_scalar(w));
            let mut rest_iter = mask;
            let mut s = 0usize;
            while rest_iter != 0 {
                let js = rest_iter.trailing_zeros() as usize;
                rest_iter &= rest_iter - 1;
                let rest = mask & !(1 << js);
                for k in 0..d {
                    // coefficient of dx^k in D_α dx^{js}
                    let c =
                        Expr::sum((0..d).map(|i| Expr::mul(alpha.comp(i), self.gamma(i, js, k))));
                    if c.is_zero() {
                        continue;
                    }
                    if let Some((nm, s2)) = mask_wedge(1 << k, rest) {
                        let sign = if s.is_multiple_of(2) { s2 } else { -s2 };
                        out.accumulate(nm, sign, &Expr::mul(w, &c));
                    }
                }
                s += 1;
            }
        }
        Ok(out)
    }

    /// Derivation over the wedge on multivectors, with
    /// D_α ∂_j = −Σ_m (Σ_i α_i Γ^{im}_j) ∂_m.
    pub fn d_multivector(&self, alpha: &OneForm, q: &Multivector) -> Result<Multivector> {
        same_chart(&self.chart, alpha.chart())?;
        same_chart(&self.chart, q.chart())?;
        let d = self.chart.dim();
        let sharp = anchor_apply(&self.pi, alpha)?;
        let mut out = Multivector::zero(&self.chart, q.degree());
        for (&mask, w) in q.comps() {
            out.accumulate(mask, 1, &sharp.apply_scalar(w));
            let mut rest_iter = mask;
            let mut s = 0usize;
            while rest_iter != 0 {
                let js = rest_iter.trailing_zeros() as usize;
                rest_iter &= rest_iter - 1;
                let rest = mask & !(1 << js);
                for m in 0..d {
                    let c = Expr::neg(&Expr::sum(
                        (0..d).map(|i| Expr::mul(alpha.comp(i), self.gamma(i, m, js))),
                    ));
                    if c.is_zero() {
                        continue;
                    }
                    if let Some((nm, s2)) = mask_wedge(1 << m, rest) {
                        let sign = if s.is_multiple_of(2) { s2 } else { -s2 };
                        out.accumulate(nm, sign, &Expr::mul(w, &c));
                    }
                }
                s += 1;
            }
        }
        Ok(out)
    }

    /// T^{ij}_k = Γ^{ij}_k − Γ^{ji}_k − ∂_k Π^{ij}.
    pub fn torsion(&self) -> TensorField {
        let d = self.chart.dim();
        let mut t = TensorField::zeros(
            &self.chart,
            vec![Variance::Contra, Variance::Contra, Variance::Co],
        );
        for i in 0..d {
            for j in 0..d {
                for (k, ck) in self.chart.coords().iter().enumerate() {
                    let e = Expr::sub(
                        &Expr::sub(self.gamma(i, j, k), self.gamma(j, i, k)),
                        &self.pi.comp(i, j).diff(ck),
                    );
                    t.set(&[i, j, k], e);
                }
            }
        }
        t
    }

    /// R^{ijk}_l with R(dx^i,dx^j)dx^k = Σ_l R^{ijk}_l dx^l, from
    /// D_α D_β − D_β D_α − D_{[α,β]} expanded on the coframe.
    pub fn curvature(&self) -> TensorField {
        let d = self.chart.dim();
        let coords = self.chart.coords();
        let mut r = TensorField::zeros(
            &self.chart,
            vec![
                Variance::Contra,
                Variance::Contra,
                Variance::Contra,
                Variance::Co,
            ],
        );
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    continue;
                }
                for k in 0..d {
                    for l in 0..d {
                        let lead = Expr::sub(
                            &anchor_coframe_apply(&self.pi, i, self.gamma(j, k, l)),
                            &anchor_coframe_apply(&self.pi, j, self.gamma(i, k, l)),
                        );
                        let quad = Expr::sum((0..d).map(|m| {
                            Expr::sub(
                                &Expr::mul(self.gamma(j, k, m), self.gamma(i, m, l)),
                                &Expr::mul(self.gamma(i, k, m), self.gamma(j, m, l)),
                            )
                        }));
                        let bracket = Expr::sum((0..d).map(|m| {
                            Expr::mul(&self.pi.comp(i, j).diff(&coords[m]), self.gamma(m, k, l))
                        }));
                        r.set(
                            &[i, j, k, l],
                            Expr::sub(&Expr::add(&lead, &quad), &bracket).simplify(),
                        );
                    }
                }
            }
        }
        r
    }

    /// (DΠ)^{ijk} = ♯dx^i(Π^{jk}) − Σ_m Γ^{ij}_m Π^{mk} − Σ_m Γ^{ik}_m Π^{jm}.
    /// Identically zero exactly on the metric-parallel (pseudo-Riemannian
    /// Poisson) structures.
    pub fn nabla_pi(&self) -> TensorField {
        let d = self.chart.dim();
        let mut t = TensorField::zeros(&self.chart, vec![Variance::Contra; 3]);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let lead = anchor_coframe_apply(&self.pi, i, self.pi.comp(j, k));
                    let left = Expr::sum(
                        (0..d).map(|m| Expr::mul(self.gamma(i, j, m), self.pi.comp(m, k))),
                    );
                    let right = Expr::sum(
                        (0..d).map(|m| Expr::mul(self.gamma(i, k, m), self.pi.comp(j, m))),
                    );
                    t.set(&[i, j, k], Expr::sub(&Expr::sub(&lead, &left), &right));
                }
            }
        }
        t
    }

    /// (D_{dx^i} J)(dx^j) as a rank-3 table [i][j][k]; vanishes wherever the
    /// structure is metric-parallel.
    pub fn nabla_j(&self, t: &Triple) -> Result<TensorField> {
        let j_endo = t.j()?;
        let d = self.chart.dim();
        let mut out = TensorField::zeros(
            &self.chart,
            vec![Variance::Contra, Variance::Contra, Variance::Co],
        );
        for i in 0..d {
            let di = OneForm::basis(&self.chart, i);
            for j in 0..d {
                let jdxj = j_endo.apply(&OneForm::basis(&self.chart, j))?;
                let lhs = self.d_oneform(&di, &jdxj)?;
                let rhs = j_endo.apply(&self.d_oneform(&di, &OneForm::basis(&self.chart, j))?)?;
                let diff = lhs.sub(&rhs)?;
                for k in 0..d {
                    out.set(&[i, j, k], diff.comp(k).clone());
                }
            }
        }
        Ok(out)
    }

    /// (D_{dx^i} R)^{jkl}_m per the derivative of curvature as a 1-form-valued
    /// tensor; the local-symmetry diagnostic.
    pub fn nabla_r(&self, r: &TensorField) -> TensorField {
        let d = self.chart.dim();
        let mut out = TensorField::zeros(
            &self.chart,
            vec![
                Variance::Contra,
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
                        for m in 0..d {
                            let lead = anchor_coframe_apply(&self.pi, i, r.get(&[j, k, l, m]));
                            let value_slot = Expr::sum(
                                (0..d)
                                    .map(|n| Expr::mul(r.get(&[j, k, l, n]), self.gamma(i, n, m))),
                            );
                            let arg1 = Expr::sum(
                                (0..d)
                                    .map(|n| Expr::mul(self.gamma(i, j, n), r.get(&[n, k, l, m]))),
                            );
                            let arg2 = Expr::sum(
                                (0..d)
                                    .map(|n| Expr::mul(self.gamma(i, k, n), r.get(&[j, n, l, m]))),
                            );
                            let arg3 = Expr::sum(
                                (0..d)
                                    .map(|n| Expr::mul(self.gamma(i, l, n), r.get(&[j, k, n, m]))),
                            );
                            let e = Expr::sub(
                                &Expr::sub(
                                    &Expr::sub(&Expr::add(&lead, &value_slot), &arg1),
                                    &arg2,
                                ),
                                &arg3,
                            );
                            out.set(&[i, j, k, l, m], e);
                        }
                    }
                }
            }
        }
        out
    }
}

/// R(α, β)γ by contraction of the component table.
pub fn apply_curvature(
    r: &TensorField,
    alpha: &OneForm,
    beta: &OneForm,
    gamma: &OneForm,
) -> Result<OneForm> {
    let ch = r.chart();
    same_chart(ch, alpha.chart())?;
    same_chart(ch, beta.chart())?;
    same_chart(ch, gamma.chart())?;
    let d = ch.dim();
    let comps = (0..d)
        .map(|l| {
            let mut acc = Expr::zero();
            for i in 0..d {
                if alpha.comp(i).is_zero() {
                    continue;
                }
                for j in 0..d {
                    if beta.comp(j).is_zero() {
                        continue;
                    }
                    for k in 0..d {
                        let coeff =
                            Expr::mul(&Expr::mul(alpha.comp(i), beta.comp(j)), gamma.comp(k));
                        acc = Expr::add(&acc, &Expr::mul(&coeff, r.get(&[i, j, k, l])));
                    }
                }
            }
            acc
        })
        .collect();
    Ok(OneForm::new(ch, comps))
}

/// Ricci as a bilinear form on the coframe:
/// r(dx^p, dx^q) = Σ_{i,j,l} g̃_{ij} R^{pij}_l g^{lq}.
pub fn ricci(t: &Triple, r: &TensorField) -> Matrix {
    let d = t.dim();
    Matrix::from_fn(d, |p, q| {
        let mut acc = Expr::zero();
        for i in 0..d {
            for j in 0..d {
                for l in 0..d {
                    let w = Expr::mul(t.gt().comp(i, j), t.g().comp(l, q));
                    acc = Expr::add(&acc, &Expr::mul(&w, r.get(&[p, i, j, l])));
                }
            }
        }
        acc
    })
}

/// S = Σ_{p,q} g̃_{pq} r(dx^p, dx^q).
pub fn scalar_curv(t: &Triple, ricci_m: &Matrix) -> Expr {
    let d = t.dim();
    let mut acc = Expr::zero();
    for p in 0..d {
        for q in 0..d {
            acc = Expr::add(&acc, &Expr::mul(t.gt().comp(p, q), ricci_m.get(p, q)));
        }
    }
    acc
}

/// K(α, β) = g(R(α,β)β, α) / (g(α,α)g(β,β) − g(α,β)²) at one point.
pub fn sectional(
    t: &Triple,
    r: &TensorField,
    alpha: &OneForm,
    beta: &OneForm,
    p: &Point,
) -> Result<f64> {
    let gaa = t.g().pair(alpha, alpha)?.eval(p)?;
    let gbb = t.g().pair(beta, beta)?.eval(p)?;
    let gab = t.g().pair(alpha, beta)?.eval(p)?;
    let den = gaa * gbb - gab * gab;
    let scale = (gaa * gbb).abs() + gab * gab;
    if den.abs() < 1e-9 * scale.max(1.0) {
        return Err(Error::DegeneratePlane {
            point: p.to_string(),
            den,
        });
    }
    let rv = apply_curvature(r, alpha, beta, beta)?;
    let num = t.g().pair(&rv, alpha)?.eval(p)?;
    Ok(num / den)
}

/// The two defining routes of the Poisson Hessian: entry (i,j) holds
/// H(dx^i, dx^j). Route one composes anchors, route two goes through J.
pub fn hessian(t: &Triple, conn: &ContraConnection, phi: &Expr) -> Result<(Matrix, Matrix)> {
    let ch = t.chart();
    let d = ch.dim();
    let pi = t.pi();
    let route1 = Matrix::from_fn(d, |i, j| {
        let inner = anchor_coframe_apply(pi, j, phi);
        let lead = anchor_coframe_apply(pi, i, &inner);
        let correction = Expr::sum(
            (0..d).map(|k| Expr::mul(conn.gamma(i, j, k), &anchor_coframe_apply(pi, k, phi))),
        );
        Expr::sub(&lead, &correction)
    });
    let jdphi = t.j()?.apply(&OneForm::d_scalar(ch, phi))?;
    let mut route2 = Matrix::zeros(d);
    for i in 0..d {
        let der = conn.d_oneform(&OneForm::basis(ch, i), &jdphi)?;
        for j in 0..d {
            let paired = t.g().pair(&der, &OneForm::basis(ch, j))?;
            route2.set(i, j, Expr::neg(&paired));
        }
    }
    Ok((route1, route2))
}

/// ◁(φ): trace of α ↦ D_α(J dφ).
pub fn tri_left(t: &Triple, conn: &ContraConnection, phi: &Expr) -> Result<Expr> {
    let ch = t.chart();
    let jdphi = t.j()?.apply(&OneForm::d_scalar(ch, phi))?;
    let mut acc = Expr::zero();
    for i in 0..ch.dim() {
        let der = conn.d_oneform(&OneForm::basis(ch, i), &jdphi)?;
        acc = Expr::add(&acc, der.comp(i));
    }
    Ok(acc)
}

/// ▷ as a vector field: the trace of α ↦ D_α dφ collapses to X^j = Σ_i
/// Γ^{ij}_i, independent of φ (the second-derivative part cancels by
/// antisymmetry of Π).
pub fn tri_right_field(conn: &ContraConnection) -> VectorField {
    let d = conn.chart().dim();
    let comps = (0..d)
        .map(|j| Expr::sum((0..d).map(|i| conn.gamma(i, j, i).clone())))
        .collect();
    VectorField::new(conn.chart(), comps)
}

/// ▷(φ), the trace operator applied to a scalar.
pub fn tri_right(conn: &ContraConnection, phi: &Expr) -> Expr {
    tri_right_field(conn).apply_scalar(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::poisson::koszul_bracket;
    use crate::tensor::Cometric;
    use std::sync::Arc;

    fn symplectic_triple() -> Triple {
        let ch =
            Arc::new(Chart::new("r2", &["x", "y"], &[("x", -1.0, 1.0), ("y", -1.0, 1.0)]).unwrap());
        let pi = Bivector::from_upper(&ch, &[((0, 1), Expr::one())]);
        Triple::new(&ch, pi, Cometric::identity(&ch)).unwrap()
    }

    fn so3_triple() -> Triple {
        let ch = Arc::new(
            Chart::new(
                "so3",
                &["x", "y", "z"],
                &[("x", 1.0, 2.0), ("y", 1.0, 2.0), ("z", 1.0, 2.0)],
            )
            .unwrap(),
        );
        let pi = Bivector::from_upper(
            &ch,
            &[
                ((0, 1), ch.parse("z").unwrap()),
                ((1, 2), ch.parse("x").unwrap()),
                ((0, 2), ch.parse("-y").unwrap()),
            ],
        );
        Triple::new(&ch, pi, Cometric::identity(&ch)).unwrap()
    }

    /// so(3)* bivector with a curved diagonal cometric; nothing special
    /// geometrically, which is what makes it a good generic testbed.
    fn curved_triple() -> Triple {
        let so3 = so3_triple();
        let ch = so3.chart().clone();
        let g = Cometric::from_upper(
            &ch,
            &[
                ((0, 0), Expr::one()),
                ((1, 1), ch.parse("1 + x^2").unwrap()),
                ((2, 2), ch.parse("2 + y^2/4").unwrap()),
            ],
        );
        Triple::new(&ch, so3.pi().clone(), g).unwrap()
    }

    #[test]
    fn constant_data_gives_flat_connection() {
        let t = symplectic_triple();
        let conn = ContraConnection::levi_civita(&t);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    assert!(conn.gamma(i, j, k).is_zero());
                }
            }
        }
        let r = conn.curvature();
        let p = Point::from_pairs([("x", 0.3), ("y", -0.7)]);
        assert_eq!(r.max_abs_at(&p).unwrap(), 0.0);
    }

    #[test]
    fn so3_coefficients_are_half_epsilon() {
        let t = so3_triple();
        let conn = ContraConnection::levi_civita(&t);
        let p = Point::from_pairs([("x", 1.3), ("y", 1.6), ("z", 1.9)]);
        let eps = |i: usize, j: usize, k: usize| -> f64 {
            match (i, j, k) {
                (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
                (2, 1, 0) | (1, 0, 2) | (0, 2, 1) => -1.0,
                _ => 0.0,
            }
        };
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let got = conn.gamma(i, j, k).eval(&p).unwrap();
                    assert!(
                        (got - 0.5 * eps(i, j, k)).abs() < 1e-12,
                        "Γ^{{{i}{j}}}_{k} = {got}"
                    );
                }
            }
        }
    }

    #[test]
    fn koszul_system_linear_solve_oracle() {
        // solve 2 Σ_k Γ^{ij}_k g^{kl} = rhs^{ijl} numerically per point and
        // compare with the symbolic construction
        let t = curved_triple();
        let ch = t.chart().clone();
        let conn = ContraConnection::levi_civita(&t);
        let pts = t.sample(30, 41, &[]).unwrap();
        let d = 3;
        for p in &pts {
            let gmat = t.g().matrix().eval_at(p).unwrap();
            for i in 0..d {
                for j in 0..d {
                    let mut rhs = nalgebra::DVector::zeros(d);
                    for l in 0..d {
                        let di = OneForm::basis(&ch, i);
                        let dj = OneForm::basis(&ch, j);
                        let dl = OneForm::basis(&ch, l);
                        let mut val = 0.0;
                        val += anchor_coframe_apply(t.pi(), i, t.g().comp(j, l))
                            .eval(p)
                            .unwrap();
                        val += anchor_coframe_apply(t.pi(), j, t.g().comp(i, l))
                            .eval(p)
                            .unwrap();
                        val -= anchor_coframe_apply(t.pi(), l, t.g().comp(i, j))
                            .eval(p)
                            .unwrap();
                        let b_ij = koszul_bracket(t.pi(), &di, &dj).unwrap();
                        let b_li = koszul_bracket(t.pi(), &dl, &di).unwrap();
                        let b_lj = koszul_bracket(t.pi(), &dl, &dj).unwrap();
                        val += t.g().pair(&b_ij, &dl).unwrap().eval(p).unwrap();
                        val += t.g().pair(&b_li, &dj).unwrap().eval(p).unwrap();
                        val += t.g().pair(&b_lj, &di).unwrap().eval(p).unwrap();
                        rhs[l] = val;
                    }
                    let solved = gmat
                        .clone()
                        .lu()
                        .solve(&rhs)
                        .expect("cometric invertible on domain");
                    for k in 0..d {
                        let got = conn.gamma(i, j, k).eval(p).unwrap();
                        assert!(
                            (2.0 * got - solved[k]).abs() < 1e-9,
                            "Γ^{{{i}{j}}}_{k}: {got} vs {}",
                            solved[k] / 2.0
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn metric_parallel_and_torsion_free() {
        for t in [so3_triple(), curved_triple()] {
            let ch = t.chart().clone();
            let conn = ContraConnection::levi_civita(&t);
            let pts = t.sample(100, 13, &[]).unwrap();
            let tor = conn.torsion();
            for p in &pts {
                assert!(tor.max_abs_at(p).unwrap() < 1e-9, "torsion at {p}");
            }
            // Eq-style parallelism on the coframe: ♯α(g(β,γ)) = g(D_αβ,γ) + g(β,D_αγ)
            for i in 0..3 {
                let di = OneForm::basis(&ch, i);
                for j in 0..3 {
                    let dj = OneForm::basis(&ch, j);
                    for l in 0..3 {
                        let dl = OneForm::basis(&ch, l);
                        let lhs = anchor_coframe_apply(t.pi(), i, t.g().comp(j, l));
                        let rhs = Expr::add(
                            &t.g().pair(&conn.d_oneform(&di, &dj).unwrap(), &dl).unwrap(),
                            &t.g().pair(&dj, &conn.d_oneform(&di, &dl).unwrap()).unwrap(),
                        );
                        for p in &pts {
                            let a = lhs.eval(p).unwrap();
                            let b = rhs.eval(p).unwrap();
                            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn curvature_matches_composition_oracle() {
        let t = curved_triple();
        let ch = t.chart().clone();
        let conn = ContraConnection::levi_civita(&t);
        let r = conn.curvature();
        let pts = t.sample(20, 29, &[]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let di = OneForm::basis(&ch, i);
                    let dj = OneForm::basis(&ch, j);
                    let dk = OneForm::basis(&ch, k);
                    let fwd = conn
                        .d_oneform(&di, &conn.d_oneform(&dj, &dk).unwrap())
                        .unwrap();
                    let bwd = conn
                        .d_oneform(&dj, &conn.d_oneform(&di, &dk).unwrap())
                        .unwrap();
                    let br = conn
                        .d_oneform(&koszul_bracket(t.pi(), &di, &dj).unwrap(), &dk)
                        .unwrap();
                    let oracle = fwd.sub(&bwd).unwrap().sub(&br).unwrap();
                    for l in 0..3 {
                        for p in &pts {
                            let a = r.get(&[i, j, k, l]).eval(p).unwrap();
                            let b = oracle.comp(l).eval(p).unwrap();
                            assert!(
                                (a - b).abs() < 1e-9 * a.abs().max(1.0),
                                "R^{{{i}{j}{k}}}_{l}: {a} vs {b}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn curvature_is_antisymmetric_in_the_leading_pair() {
        let t = curved_triple();
        let conn = ContraConnection::levi_civita(&t);
        let r = conn.curvature();
        let pts = t.sample(20, 31, &[]).unwrap();
        for p in &pts {
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        for l in 0..3 {
                            let a = r.get(&[i, j, k, l]).eval(p).unwrap();
                            let b = r.get(&[j, i, k, l]).eval(p).unwrap();
                            assert!((a + b).abs() < 1e-9 * a.abs().max(1.0));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn so3_curvature_ricci_scalar_values() {
        let t = so3_triple();
        let conn = ContraConnection::levi_civita(&t);
        let r = conn.curvature();
        let ric = ricci(&t, &r);
        let s = scalar_curv(&t, &ric);
        let p = Point::from_pairs([("x", 1.2), ("y", 1.8), ("z", 1.5)]);
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let want = -0.25 * (delta(i, k) * delta(j, l) - delta(i, l) * delta(j, k));
                        let got = r.get(&[i, j, k, l]).eval(&p).unwrap();
                        assert!((got - want).abs() < 1e-12, "R^{{{i}{j}{k}}}_{l}");
                    }
                }
                let want = 0.5 * delta(i, j);
                assert!((ric.get(i, j).eval(&p).unwrap() - want).abs() < 1e-12);
            }
        }
        assert!((s.eval(&p).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn ricci_matches_orthonormal_coframe_oracle() {
        // Gram-Schmidt an orthonormal coframe wrt g at each point and sum
        // g(R(θ, e_a)e_a, η); Riemannian cometric so no signature factors
        let t = curved_triple();
        let conn = ContraConnection::levi_civita(&t);
        let r = conn.curvature();
        let ric = ricci(&t, &r);
        let pts = t.sample(15, 37, &[]).unwrap();
        let d = 3usize;
        for p in &pts {
            let gm = t.g().matrix().eval_at(p).unwrap();
            // rows of `basis` hold coframe coefficient vectors e_a
            let mut basis: Vec<nalgebra::DVector<f64>> = Vec::new();
            for i in 0..d {
                let mut v = nalgebra::DVector::zeros(d);
                v[i] = 1.0;
                for b in &basis {
                    let proj = (b.transpose() * &gm * &v)[(0, 0)];
                    v -= b * proj;
                }
                let norm = (v.transpose() * &gm * &v)[(0, 0)].sqrt();
                basis.push(v / norm);
            }
            let mut rnum = vec![0.0; d * d * d * d];
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        for l in 0..d {
                            rnum[((i * d + j) * d + k) * d + l] =
                                r.get(&[i, j, k, l]).eval(p).unwrap();
                        }
                    }
                }
            }
            for ti in 0..d {
                for tj in 0..d {
                    // oracle for r(dx^ti, dx^tj)
                    let mut want = 0.0;
                    for e in &basis {
                        // R(dx^ti, e)e contracted, then g(·, dx^tj)
                        let mut val = vec![0.0; d];
                        for j in 0..d {
                            for k in 0..d {
                                for l in 0..d {
                                    val[l] += e[j] * e[k] * rnum[((ti * d + j) * d + k) * d + l];
                                }
                            }
                        }
                        for l in 0..d {
                            want += val[l] * gm[(l, tj)];
                        }
                    }
                    let got = ric.get(ti, tj).eval(p).unwrap();
                    assert!(
                        (got - want).abs() < 1e-9 * got.abs().max(1.0),
                        "ricci({ti},{tj}): {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn nabla_pi_formula_oracle_and_so3_value() {
        let t = so3_triple();
        let ch = t.chart().clone();
        let conn = ContraConnection::levi_civita(&t);
        let dpi = conn.nabla_pi();
        let pts = t.sample(25, 43, &[]).unwrap();
        for i in 0..3 {
            let di = OneForm::basis(&ch, i);
            for j in 0..3 {
                let dj = OneForm::basis(&ch, j);
                for k in 0..3 {
                    let dk = OneForm::basis(&ch, k);
                    let lead = anchor_coframe_apply(t.pi(), i, t.pi().comp(j, k));
                    let left = t
                        .pi()
                        .pair(&conn.d_oneform(&di, &dj).unwrap(), &dk)
                        .unwrap();
                    let right = t
                        .pi()
                        .pair(&dj, &conn.d_oneform(&di, &dk).unwrap())
                        .unwrap();
                    let oracle = Expr::sub(&Expr::sub(&lead, &left), &right);
                    for p in &pts {
                        let a = dpi.get(&[i, j, k]).eval(p).unwrap();
                        let b = oracle.eval(p).unwrap();
                        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
                    }
                }
            }
        }
        // spot value: (DΠ)^{001} = −y/2, the witness that so(3)* with the
        // flat cometric is not metric-parallel
        let p = Point::from_pairs([("x", 1.0), ("y", 1.4), ("z", 1.0)]);
        assert!((dpi.get(&[0, 0, 1]).eval(&p).unwrap() + 0.7).abs() < 1e-12);
    }

    #[test]
    fn symplectic_plane_is_metric_parallel() {
        let t = symplectic_triple();
        let conn = ContraConnection::levi_civita(&t);
        let dpi = conn.nabla_pi();
        let p = Point::from_pairs([("x", 0.2), ("y", 0.9)]);
        assert_eq!(dpi.max_abs_at(&p).unwrap(), 0.0);
        // metric-parallel structures also parallelize J
        let dj = conn.nabla_j(&t).unwrap();
        assert_eq!(dj.max_abs_at(&p).unwrap(), 0.0);
    }

    #[test]
    fn so3_is_locally_symmetric() {
        let t = so3_triple();
        let conn = ContraConnection::levi_civita(&t);
        let dr = conn.nabla_r(&conn.curvature());
        let pts = t.sample(25, 47, &[]).unwrap();
        for p in &pts {
            assert!(dr.max_abs_at(p).unwrap() < 1e-12);
        }
    }

    #[test]
    fn nabla_r_matches_composition_oracle() {
        let t = curved_triple();
        let ch = t.chart().clone();
        let conn = ContraConnection::levi_civita(&t);
        let r = conn.curvature();
        let dr = conn.nabla_r(&r);
        let pts = t.sample(6, 53, &[]).unwrap();
        for i in 0..3 {
            let di = OneForm::basis(&ch, i);
            for j in 0..3 {
                let dj = OneForm::basis(&ch, j);
                for k in 0..3 {
                    let dk = OneForm::basis(&ch, k);
                    for l in 0..3 {
                        let dl = OneForm::basis(&ch, l);
                        let term0 = conn
                            .d_oneform(&di, &apply_curvature(&r, &dj, &dk, &dl).unwrap())
                            .unwrap();
                        let term1 =
                            apply_curvature(&r, &conn.d_oneform(&di, &dj).unwrap(), &dk, &dl)
                                .unwrap();
                        let term2 =
                            apply_curvature(&r, &dj, &conn.d_oneform(&di, &dk).unwrap(), &dl)
                                .unwrap();
                        let term3 =
                            apply_curvature(&r, &dj, &dk, &conn.d_oneform(&di, &dl).unwrap())
                                .unwrap();
                        let oracle = term0
                            .sub(&term1)
                            .unwrap()
                            .sub(&term2)
                            .unwrap()
                            .sub(&term3)
                            .unwrap();
                        for m in 0..3 {
                            for p in &pts {
                                let a = dr.get(&[i, j, k, l, m]).eval(p).unwrap();
                                let b = oracle.comp(m).eval(p).unwrap();
                                assert!(
                                    (a - b).abs() < 1e-9 * a.abs().max(1.0),
                                    "(D_{i}R)^{{{j}{k}{l}}}_{m}: {a} vs {b}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn d_oneform_is_leibniz_in_the_second_slot() {
        let t = so3_triple();
        let ch = t.chart().clone();
        let conn = ContraConnection::levi_civita(&t);
        let phi = ch.parse("x*z + y^2").unwrap();
        let alpha = OneForm::new(
            &ch,
            vec![
                ch.parse("y").unwrap(),
                ch.parse("1").unwrap(),
                ch.parse("x*z").unwrap(),
            ],
        );
        let beta = OneForm::new(
            &ch,
            vec![
                ch.parse("z^2").unwrap(),
                ch.parse("x + y").unwrap(),
                ch.parse("2").unwrap(),
            ],
        );
        let lhs = conn.d_oneform(&alpha, &beta.scale(&phi)).unwrap();
        let rhs = conn
            .d_oneform(&alpha, &beta)
            .unwrap()
            .scale(&phi)
            .add(&beta.scale(&conn.d_scalar(&alpha, &phi).unwrap()))
            .unwrap();
        let pts = t.sample(100, 59, &[]).unwrap();
        for p in &pts {
            let a = lhs.eval_at(p).unwrap();
            let b = rhs.eval_at(p).unwrap();
            for c in 0..3 {
                assert!((a[c] - b[c]).abs() < 1e-9 * a[c].abs().max(1.0));
            }
        }
        // and function-linear in the first slot
        let flhs = conn.d_oneform(&alpha.scale(&phi), &beta).unwrap();
        let frhs = conn.d_oneform(&alpha, &beta).unwrap().scale(&phi);
        for p in &pts {
            let a = flhs.eval_at(p).unwrap();
            let b = frhs.eval_at(p).unwrap();
            for c in 0..3 {
                assert!((a[c] - b[c]).abs() < 1e-12 * a[c].abs().max(1.0));
            }
        }
    }

    #[test]
    fn duality_of_oneform_and_vector_derivatives() {
        // ♯α(β(X)) = (D_αβ)(X) + β(D_αX)
        let t = so3_triple();
        let ch = t.chart().clone();
        let conn = ContraConnection::levi_civita(&t);
        let alpha = OneForm::new(
            &ch,
            vec![
                ch.parse("x").unwrap(),
                ch.parse("z").unwrap(),
                ch.parse("1").unwrap(),
            ],
        );
        let beta = OneForm::new(
            &ch,
            vec![
                ch.parse("y*z").unwrap(),
                ch.parse("2").unwrap(),
                ch.parse("x^2").unwrap(),
            ],
        );
        let x = VectorField::new(
            &ch,
            vec![
                ch.parse("z").unwrap(),
                ch.parse("x*y").unwrap(),
                ch.parse("1 + z^2").unwrap(),
            ],
        );
        let lhs = conn.d_scalar(&alpha, &beta.apply(&x).unwrap()).unwrap();
        let rhs = Expr::add(
            &conn.d_oneform(&alpha, &beta).unwrap().apply(&x).unwrap(),
            &beta.apply(&conn.d_vector(&alpha, &x).unwrap()).unwrap(),
        );
        let pts = t.sample(100, 61, &[]).unwrap();
        for p in &pts {
            let a = lhs.eval(p).unwrap();
            let b = rhs.eval(p).unwrap();
            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn flat_constant_vector_has_zero_derivative() {
        let t = symplectic_triple();
        let ch = t.chart().clone();
        let conn = ContraConnection::levi_civita(&t);
        let x = VectorField::new(&ch, vec![Expr::num(3.0), Expr::num(-2.0)]);
        let alpha = OneForm::new(&ch, vec![ch.parse("x*y").unwrap(), ch.parse("y").unwrap()]);
        let d = conn.d_vector(&alpha, &x).unwrap();
        assert!(d.comp(0).is_zero() && d.comp(1).is_zero());
    }

    #[test]
    fn degree_one_form_and_multivector_paths_agree() {
        let t = so3_triple();
        let ch = t.chart().clone();
        let conn = ContraConnection::levi_civita(&t);
        let alpha = OneForm::new(
            &ch,
            vec![
                ch.parse("z").unwrap(),
                ch.parse("x").unwrap(),
                ch.parse("y^2").unwrap(),
            ],
        );
        let beta = OneForm::new(
            &ch,
            vec![
                ch.parse("x*y").unwrap(),
                ch.parse("z").unwrap(),
                ch.parse("1").unwrap(),
            ],
        );
        let via_form = conn
            .d_form(&alpha, &Form::from_oneform(&beta))
            .unwrap()
            .to_oneform();
        let direct = conn.d_oneform(&alpha, &beta).unwrap();
        let x = VectorField::new(
            &ch,
            vec![
                ch.parse("y").unwrap(),
                ch.parse("x + z").unwrap(),
                ch.parse("x*z").unwrap(),
            ],
        );
        let via_mv = conn
            .d_multivector(&alpha, &Multivector::from_vector(&x))
            .unwrap()
            .to_vector();
        let direct_v = conn.d_vector(&alpha, &x).unwrap();
        let pts = t.sample(40, 67, &[]).unwrap();
        for p in &pts {
            let a = via_form.eval_at(p).unwrap();
            let b = direct.eval_at(p).unwrap();
            let c = via_mv.eval_at(p).unwrap();
            let e = direct_v.eval_at(p).unwrap();
            for i in 0..3 {
                assert!((a[i] - b[i]).abs() < 1e-12 * a[i].abs().max(1.0));
                assert!((c[i] - e[i]).abs() < 1e-12 * c[i].abs().max(1.0));
            }
        }
    }

    #[test]
    fn form_derivative_dualizes_against_vector_arguments() {
        // (D_αω)(X,Y) = ♯α(ω(X,Y)) − ω(D_αX, Y) − ω(X, D_αY)
        let t = so3_triple();
        let ch = t.chart().clone();
        let conn = ContraConnection::levi_civita(&t);
        let alpha = OneForm::new(
            &ch,
            vec![
                ch.parse("1").unwrap(),
                ch.parse("x*z").unwrap(),
                ch.parse("y").unwrap(),
            ],
        );
        let mut omega = Form::zero(&ch, 2);
        omega.insert(0b011, ch.parse("z^2").unwrap());
        omega.insert(0b110, ch.parse("x").unwrap());
        let x = VectorField::new(
            &ch,
            vec![
                ch.parse("y*z").unwrap(),
                ch.parse("1").unwrap(),
                ch.parse("x").unwrap(),
            ],
        );
        let y = VectorField::new(
            &ch,
            vec![
                ch.parse("z").unwrap(),
                ch.parse("x^2").unwrap(),
                ch.parse("y + 1").unwrap(),
            ],
        );
        let lhs = conn
            .d_form(&alpha, &omega)
            .unwrap()
            .apply_vectors(&[&x, &y])
            .unwrap();
        let rhs = Expr::sub(
            &Expr::sub(
                &conn
                    .d_scalar(&alpha, &omega.apply_vectors(&[&x, &y]).unwrap())
                    .unwrap(),
                &omega
                    .apply_vectors(&[&conn.d_vector(&alpha, &x).unwrap(), &y])
                    .unwrap(),
            ),
            &omega
                .apply_vectors(&[&x, &conn.d_vector(&alpha, &y).unwrap()])
                .unwrap(),
        );
        let pts = t.sample(60, 71, &[]).unwrap();
        for p in &pts {
            let a = lhs.eval(p).unwrap();
            let b = rhs.eval(p).unwrap();
            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn multivector_derivative_dualizes_against_form_arguments() {
        // (D_αQ)(β,γ) = ♯α(Q(β,γ)) − Q(D_αβ, γ) − Q(β, D_αγ)
        let t = so3_triple();
        let ch = t.chart().clone();
        let conn = ContraConnection::levi_civita(&t);
        let alpha = OneForm::new(
            &ch,
            vec![
                ch.parse("y").unwrap(),
                ch.parse("z^2").unwrap(),
                ch.parse("1").unwrap(),
            ],
        );
        let mut q = Multivector::zero(&ch, 2);
        q.insert(0b011, ch.parse("x + z").unwrap());
        q.insert(0b101, ch.parse("y*z").unwrap());
        let beta = OneForm::new(
            &ch,
            vec![
                ch.parse("z").unwrap(),
                ch.parse("1").unwrap(),
                ch.parse("x*y").unwrap(),
            ],
        );
        let gam = OneForm::new(
            &ch,
            vec![
                ch.parse("x").unwrap(),
                ch.parse("y^2").unwrap(),
                ch.parse("2").unwrap(),
            ],
        );
        let lhs = conn
            .d_multivector(&alpha, &q)
            .unwrap()
            .apply_forms(&[&beta, &gam])
            .unwrap();
        let rhs = Expr::sub(
            &Expr::sub(
                &conn
                    .d_scalar(&alpha, &q.apply_forms(&[&beta, &gam]).unwrap())
                    .unwrap(),
                &q.apply_forms(&[&conn.d_oneform(&alpha, &beta).unwrap(), &gam])
                    .unwrap(),
            ),
            &q.apply_forms(&[&beta, &conn.d_oneform(&alpha, &gam).unwrap()])
                .unwrap(),
        );
        let pts = t.sample(60, 73, &[]).unwrap();
        for p in &pts {
            let a = lhs.eval(p).unwrap();
            let b = rhs.eval(p).unwrap();
            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn sectional_so3_is_one_quarter_and_scale_invariant() {
        let t = so3_triple();
        let ch = t.chart().clone();
        let conn = ContraConnection::levi_civita(&t);
        let r = conn.curvature();
        let pts = t.sample(20, 79, &[]).unwrap();
        let alpha = OneForm::new(
            &ch,
            vec![
                ch.parse("1").unwrap(),
                ch.parse("x").unwrap(),
                ch.parse("y - 3").unwrap(),
            ],
        );
        let beta = OneForm::new(
            &ch,
            vec![
                ch.parse("z").unwrap(),
                ch.parse("-1").unwrap(),
                ch.parse("x*y").unwrap(),
            ],
        );
        for p in &pts {
            let k = sectional(&t, &r, &alpha, &beta, p).unwrap();
            assert!((k - 0.25).abs() < 1e-9, "K = {k}");
            let k_sym = sectional(&t, &r, &beta, &alpha, p).unwrap();
            assert!((k - k_sym).abs() < 1e-9);
            let k_scaled = sectional(&t, &r, &alpha.scale(&Expr::num(2.0)), &beta, p).unwrap();
            assert!((k - k_scaled).abs() < 1e-9);
        }
    }

    #[test]
    fn sectional_rejects_degenerate_planes() {
        let t = so3_triple();
        let ch = t.chart().clone();
        let conn = ContraConnection::levi_civita(&t);
        let r = conn.curvature();
        let alpha = OneForm::basis(&ch, 0);
        let p = Point::from_pairs([("x", 1.5), ("y", 1.5), ("z", 1.5)]);
        let err = sectional(&t, &r, &alpha, &alpha, &p).unwrap_err();
        assert!(matches!(err, Error::DegeneratePlane { .. }));
    }

    #[test]
    fn flat_sectional_vanishes() {
        let t = symplectic_triple();
        let ch = t.chart().clone();
        let conn = ContraConnection::levi_civita(&t);
        let r = conn.curvature();
        let alpha = OneForm::basis(&ch, 0);
        let beta = OneForm::basis(&ch, 1);
        let p = Point::from_pairs([("x", 0.4), ("y", -0.2)]);
        assert_eq!(sectional(&t, &r, &alpha, &beta, &p).unwrap(), 0.0);
    }

    #[test]
    fn hessian_routes_agree_and_are_symmetric_for_poisson() {
        let t = so3_triple();
        let ch = t.chart().clone();
        let conn = ContraConnection::levi_civita(&t);
        let phi = ch.parse("x^2*y + z").unwrap();
        let (h1, h2) = hessian(&t, &conn, &phi).unwrap();
        let pts = t.sample(100, 83, &[]).unwrap();
        for p in &pts {
            for i in 0..3 {
                for j in 0..3 {
                    let a = h1.get(i, j).eval(p).unwrap();
                    let b = h2.get(i, j).eval(p).unwrap();
                    assert!(
                        (a - b).abs() < 1e-9 * a.abs().max(1.0),
                        "routes at ({i},{j})"
                    );
                    let sym = h1.get(j, i).eval(p).unwrap();
                    assert!(
                        (a - sym).abs() < 1e-9 * a.abs().max(1.0),
                        "symmetry at ({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn flat_hessian_is_anchored_second_derivative() {
        // constant Π, Γ = 0: H(dx^i,dx^j) = Σ Π^{ik}Π^{jl} ∂²φ/∂x_k∂x_l
        let t = symplectic_triple();
        let ch = t.chart().clone();
        let conn = ContraConnection::levi_civita(&t);
        let phi = ch.parse("x^2").unwrap();
        let (h1, h2) = hessian(&t, &conn, &phi).unwrap();
        let p = Point::from_pairs([("x", 0.7), ("y", -0.4)]);
        // ∂²φ = diag(2, 0) ⇒ only H(dy,dy) = Π^{10}Π^{10}·2 = 2 survives
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == 1 && j == 1 { 2.0 } else { 0.0 };
                assert_eq!(h1.get(i, j).eval(&p).unwrap(), want);
                assert_eq!(h2.get(i, j).eval(&p).unwrap(), want);
            }
        }
        // constants have vanishing Hessian
        let (c1, c2) = hessian(&t, &conn, &Expr::num(5.0)).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(c1.get(i, j).is_zero());
                assert!(c2.get(i, j).is_zero());
            }
        }
    }

    #[test]
    fn casimir_hessian_routes_both_vanish() {
        let t = so3_triple();
        let ch = t.chart().clone();
        let conn = ContraConnection::levi_civita(&t);
        let phi = ch.parse("x^2 + y^2 + z^2").unwrap();
        let (h1, h2) = hessian(&t, &conn, &phi).unwrap();
        let pts = t.sample(30, 89, &[]).unwrap();
        for p in &pts {
            for i in 0..3 {
                for j in 0..3 {
                    assert!(h1.get(i, j).eval(p).unwrap().abs() < 1e-12);
                    assert!(h2.get(i, j).eval(p).unwrap().abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn trace_operators_on_constants_vanish() {
        let t = so3_triple();
        let conn = ContraConnection::levi_civita(&t);
        let c = Expr::num(3.0);
        assert!(tri_left(&t, &conn, &c).unwrap().is_zero());
        assert!(tri_right(&conn, &c).is_zero());
    }

    #[test]
    fn tri_right_is_leibniz_and_matches_the_trace_definition() {
        let t = so3_triple();
        let ch = t.chart().clone();
        let conn = ContraConnection::levi_civita(&t);
        let phi = ch.parse("x*y + z").unwrap();
        let psi = ch.parse("z^2 - x").unwrap();
        let lhs = tri_right(&conn, &Expr::mul(&phi, &psi));
        let rhs = Expr::add(
            &Expr::mul(&phi, &tri_right(&conn, &psi)),
            &Expr::mul(&psi, &tri_right(&conn, &phi)),
        );
        let pts = t.sample(100, 97, &[]).unwrap();
        for p in &pts {
            let a = lhs.eval(p).unwrap();
            let b = rhs.eval(p).unwrap();
            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
            // direct trace: Σ_i [D_{dx^i} dφ]_i
            let mut trace = 0.0;
            for i in 0..3 {
                let der = conn
                    .d_oneform(&OneForm::basis(&ch, i), &OneForm::d_scalar(&ch, &phi))
                    .unwrap();
                trace += der.comp(i).eval(p).unwrap();
            }
            let field_val = tri_right(&conn, &phi).eval(p).unwrap();
            assert!((trace - field_val).abs() < 1e-9 * trace.abs().max(1.0));
        }
    }

    #[test]
    fn tri_left_matches_the_constant_cometric_coordinate_formula() {
        // valid only when g is constant: Σ ∂_kΠ^{ij} Π^{ki} ∂_jφ + Σ Π^{ij}Π^{ki} ∂²_{jk}φ
        for t in [symplectic_triple(), so3_triple()] {
            let ch = t.chart().clone();
            let conn = ContraConnection::levi_civita(&t);
            let phi = ch.parse("x^2*y + x").unwrap();
            let lhs = tri_left(&t, &conn, &phi).unwrap();
            let d = ch.dim();
            let mut oracle = Expr::zero();
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        let t1 = Expr::mul(
                            &Expr::mul(&t.pi().comp(i, j).diff(&ch.coords()[k]), t.pi().comp(k, i)),
                            &phi.diff(&ch.coords()[j]),
                        );
                        let t2 = Expr::mul(
                            &Expr::mul(t.pi().comp(i, j), t.pi().comp(k, i)),
                            &phi.diff(&ch.coords()[j]).diff(&ch.coords()[k]),
                        );
                        oracle = Expr::add(&oracle, &Expr::add(&t1, &t2));
                    }
                }
            }
            let pts = t.sample(50, 101, &[]).unwrap();
            for p in &pts {
                let a = lhs.eval(p).unwrap();
                let b = oracle.eval(p).unwrap();
                assert!(
                    (a - b).abs() < 1e-9 * a.abs().max(1.0),
                    "{} ◁ mismatch: {a} vs {b}",
                    t.chart().name()
                );
            }
        }
    }
}
