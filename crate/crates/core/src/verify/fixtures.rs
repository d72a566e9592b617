//! Built-in example fixtures with pinned suite outcomes. The failing entries
//! are deliberate: they witness the counterexample side of the equivalences.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::chart::{Chart, Triple};
use crate::connection::ContraConnection;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::tensor::{Bivector, Cometric};
use crate::warped::{WarpedInput, WarpedStructure};

use super::{Fixture, FixtureData, Status, SuiteId};

const NAMES: [(&str, &str); 13] = [
    (
        "symplecticR2",
        "constant symplectic plane, identity cometric",
    ),
    (
        "so3star",
        "linear so(3)* bracket on a cube away from the origin",
    ),
    (
        "nonmetaflat",
        "flat symplectic plane with a handmade symmetric connection term",
    ),
    (
        "flatProduct",
        "product of two symplectic planes, trivial weights",
    ),
    (
        "warpedCasimir",
        "so(3)* base with symplectic fiber, Casimir f, constant mu",
    ),
    (
        "warpedCasimirMu",
        "so(3)* base with symplectic fiber, Casimir f and Casimir mu",
    ),
    (
        "warpedCasimirSo3",
        "so(3)* base and so(3)* fiber, Casimir f, constant mu",
    ),
    (
        "warpedGeneric",
        "so(3)* base with symplectic fiber and a non-Casimir mu",
    ),
    (
        "warpedGenericSo3",
        "so(3)* base and so(3)* fiber with a non-Casimir mu",
    ),
    (
        "sympProductMuX",
        "two symplectic planes with a coordinate mu",
    ),
    (
        "wedgeProduct",
        "trivial weights plus Hamiltonian wedge scalars",
    ),
    (
        "lambdaCasimir",
        "weighted product tensor with Casimir weights",
    ),
    (
        "lambdaNonCasimir",
        "weighted product tensor with a non-Casimir weight",
    ),
];

/// Names and one-line summaries, in a stable order.
pub fn builtin_names() -> &'static [(&'static str, &'static str)] {
    &NAMES
}

/// Build one example by name.
pub fn builtin_fixture(name: &str) -> Result<Fixture> {
    let (_, summary) = NAMES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Definition(format!("unknown example `{name}`")))?;
    let (data, expected) = match name {
        "symplecticR2" => (
            FixtureData::Chart {
                triple: symp("r2", ["x", "y"], -1.0, 1.0)?,
                conn_override: None,
            },
            chart_expected(&[]),
        ),
        "so3star" => (
            FixtureData::Chart {
                triple: so3("so3", ["x", "y", "z"])?,
                conn_override: None,
            },
            chart_expected(&[]),
        ),
        "nonmetaflat" => {
            let triple = symp("tw", ["x", "y"], 1.0, 2.0)?;
            let y = triple.chart().parse("y")?;
            let conn = ContraConnection::from_table(triple.chart(), triple.pi(), |i, j, k| {
                if (i, j, k) == (0, 0, 0) {
                    y.clone()
                } else {
                    Expr::zero()
                }
            })?;
            (
                FixtureData::Chart {
                    triple,
                    conn_override: Some(conn),
                },
                chart_expected(&[(SuiteId::GenBracketAxioms, Status::Fail)]),
            )
        }
        "flatProduct" => (
            warped(
                symp("b", ["x", "y"], 1.0, 2.0)?,
                symp("f", ["u", "v"], 1.0, 2.0)?,
                "1",
                "1",
                Weights::default(),
            )?,
            warped_expected(&[
                (SuiteId::SymplecticCor, Status::Pass),
                (SuiteId::GeomTheorems, Status::Pass),
            ]),
        ),
        "warpedCasimir" => (
            warped(
                so3("so3", ["x", "y", "z"])?,
                symp("f", ["u", "v"], 1.0, 2.0)?,
                "x^2 + y^2 + z^2",
                "1",
                Weights::default(),
            )?,
            warped_expected(&[(SuiteId::GeomTheorems, Status::Pass)]),
        ),
        "warpedCasimirMu" => (
            warped(
                so3("so3", ["x", "y", "z"])?,
                symp("f", ["u", "v"], 1.0, 2.0)?,
                "x^2 + y^2 + z^2",
                "x^2 + y^2 + z^2",
                Weights::default(),
            )?,
            warped_expected(&[]),
        ),
        "warpedCasimirSo3" => (
            warped(
                so3("so3", ["x", "y", "z"])?,
                so3("so3f", ["u", "v", "w"])?,
                "x^2 + y^2 + z^2",
                "2",
                Weights::default(),
            )?,
            warped_expected(&[(SuiteId::GeomTheorems, Status::Pass)]),
        ),
        "warpedGeneric" => (
            warped(
                so3("so3", ["x", "y", "z"])?,
                symp("f", ["u", "v"], 1.0, 2.0)?,
                "1 + x^2",
                "x",
                Weights::default(),
            )?,
            warped_expected(&[
                (SuiteId::PoissonBasics, Status::Fail),
                (SuiteId::WarpedTensor, Status::Fail),
            ]),
        ),
        "warpedGenericSo3" => (
            warped(
                so3("so3", ["x", "y", "z"])?,
                so3("so3f", ["u", "v", "w"])?,
                "1 + x^2",
                "x",
                Weights::default(),
            )?,
            warped_expected(&[
                (SuiteId::PoissonBasics, Status::Fail),
                (SuiteId::WarpedTensor, Status::Fail),
            ]),
        ),
        "sympProductMuX" => (
            warped(
                symp("b", ["x", "y"], 1.0, 2.0)?,
                symp("f", ["u", "v"], 1.0, 2.0)?,
                "1",
                "x",
                Weights::default(),
            )?,
            warped_expected(&[
                (SuiteId::PoissonBasics, Status::Fail),
                (SuiteId::WarpedTensor, Status::Fail),
                (SuiteId::SymplecticCor, Status::Pass),
            ]),
        ),
        "wedgeProduct" => (
            warped(
                so3("so3", ["x", "y", "z"])?,
                symp("f", ["u", "v"], 1.0, 2.0)?,
                "1",
                "1",
                Weights {
                    f1: Some("x^2"),
                    f2: Some("u"),
                    ..Weights::default()
                },
            )?,
            warped_expected(&[
                (SuiteId::ExtraTensors, Status::Pass),
                (SuiteId::GeomTheorems, Status::Pass),
            ]),
        ),
        "lambdaCasimir" => (
            warped(
                so3("so3", ["x", "y", "z"])?,
                so3("so3f", ["u", "v", "w"])?,
                "1",
                "1",
                Weights {
                    f1: Some("x + z"),
                    f2: Some("u*v"),
                    mu1: Some("x^2 + y^2 + z^2"),
                    mu2: Some("u^2 + v^2 + w^2"),
                },
            )?,
            warped_expected(&[
                (SuiteId::ExtraTensors, Status::Pass),
                (SuiteId::GeomTheorems, Status::Pass),
            ]),
        ),
        "lambdaNonCasimir" => (
            warped(
                so3("so3", ["x", "y", "z"])?,
                so3("so3f", ["u", "v", "w"])?,
                "1",
                "1",
                Weights {
                    f1: Some("x + z"),
                    f2: Some("u*v"),
                    mu1: Some("x"),
                    mu2: Some("u^2 + v^2 + w^2"),
                },
            )?,
            warped_expected(&[
                (SuiteId::ExtraTensors, Status::Fail),
                (SuiteId::GeomTheorems, Status::Pass),
            ]),
        ),
        _ => unreachable!("name checked against the table"),
    };
    Ok(Fixture {
        name: name.to_string(),
        summary: summary.to_string(),
        data,
        expected,
    })
}

fn symp(name: &str, cs: [&str; 2], lo: f64, hi: f64) -> Result<Triple> {
    let ch = Arc::new(Chart::new(name, &cs, &[(cs[0], lo, hi), (cs[1], lo, hi)])?);
    let pi = Bivector::from_upper(&ch, &[((0, 1), Expr::one())]);
    Triple::new(&ch, pi, Cometric::identity(&ch))
}

fn so3(name: &str, cs: [&str; 3]) -> Result<Triple> {
    let ch = Arc::new(Chart::new(
        name,
        &cs,
        &[(cs[0], 1.0, 2.0), (cs[1], 1.0, 2.0), (cs[2], 1.0, 2.0)],
    )?);
    let pi = Bivector::from_upper(
        &ch,
        &[
            ((0, 1), Expr::var(cs[2])),
            ((1, 2), Expr::var(cs[0])),
            ((0, 2), Expr::neg(&Expr::var(cs[1]))),
        ],
    );
    Triple::new(&ch, pi, Cometric::identity(&ch))
}

#[derive(Default)]
struct Weights {
    f1: Option<&'static str>,
    f2: Option<&'static str>,
    mu1: Option<&'static str>,
    mu2: Option<&'static str>,
}

fn warped(base: Triple, fiber: Triple, f: &str, mu: &str, w: Weights) -> Result<FixtureData> {
    let f = base.chart().parse(f)?;
    let mu = base.chart().parse(mu)?;
    let ws = WarpedStructure::new(&base, &fiber, &f, &mu)?;
    let on_base = |s: Option<&str>| s.map(|s| base.chart().parse(s)).transpose();
    let on_fiber = |s: Option<&str>| s.map(|s| fiber.chart().parse(s)).transpose();
    Ok(FixtureData::Warped(Box::new(WarpedInput {
        f1: on_base(w.f1)?,
        mu1: on_base(w.mu1)?,
        f2: on_fiber(w.f2)?,
        mu2: on_fiber(w.mu2)?,
        ws,
    })))
}

fn with_overrides(
    mut m: BTreeMap<SuiteId, Status>,
    over: &[(SuiteId, Status)],
) -> BTreeMap<SuiteId, Status> {
    for (s, st) in over {
        m.insert(*s, *st);
    }
    m
}

fn chart_expected(over: &[(SuiteId, Status)]) -> BTreeMap<SuiteId, Status> {
    let base = SuiteId::ALL
        .into_iter()
        .map(|s| {
            let st = if s.needs_warped() {
                Status::Skip
            } else {
                Status::Pass
            };
            (s, st)
        })
        .collect();
    with_overrides(base, over)
}

/// Warped default: everything passes except the suites whose preconditions
/// do not hold for a typical pair (degenerate factors, no weights, a
/// nonconstant or non-Casimir scaling).
fn warped_expected(over: &[(SuiteId, Status)]) -> BTreeMap<SuiteId, Status> {
    let base = SuiteId::ALL
        .into_iter()
        .map(|s| {
            let st = match s {
                SuiteId::SymplecticCor | SuiteId::ExtraTensors | SuiteId::GeomTheorems => {
                    Status::Skip
                }
                _ => Status::Pass,
            };
            (s, st)
        })
        .collect();
    with_overrides(base, over)
}
