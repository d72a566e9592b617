//! Randomized verification harness: named suites of identities evaluated at
//! sampled points, with residuals collected into a serializable report.
//!
//! A suite either applies to a fixture or is recorded as skipped; it is never
//! silently dropped, so a report always accounts for everything that was
//! requested.

mod fixtures;
mod suites;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::chart::{ChartDef, Triple};
use crate::connection::ContraConnection;
use crate::error::{Error, Result};
use crate::warped::{WarpedDef, WarpedInput};

pub use fixtures::{builtin_fixture, builtin_names};

/// Outcome of one identity or one suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

/// The sixteen verification suites, in the order they run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteId {
    PoissonBasics,
    ConnectionAxioms,
    Operators,
    GenBracketAxioms,
    WarpedTensor,
    SymplecticCor,
    DmuTorsionCurvature,
    GenBracketLifts,
    ExtraTensors,
    WarpedConnection,
    WarpedDpi,
    WarpedCurvature,
    RicciCor,
    ScalarCor,
    SectionalCor,
    GeomTheorems,
}

impl SuiteId {
    pub const ALL: [SuiteId; 16] = [
        SuiteId::PoissonBasics,
        SuiteId::ConnectionAxioms,
        SuiteId::Operators,
        SuiteId::GenBracketAxioms,
        SuiteId::WarpedTensor,
        SuiteId::SymplecticCor,
        SuiteId::DmuTorsionCurvature,
        SuiteId::GenBracketLifts,
        SuiteId::ExtraTensors,
        SuiteId::WarpedConnection,
        SuiteId::WarpedDpi,
        SuiteId::WarpedCurvature,
        SuiteId::RicciCor,
        SuiteId::ScalarCor,
        SuiteId::SectionalCor,
        SuiteId::GeomTheorems,
    ];

    pub fn id(self) -> &'static str {
        match self {
            SuiteId::PoissonBasics => "poisson_basics",
            SuiteId::ConnectionAxioms => "connection_axioms",
            SuiteId::Operators => "operators",
            SuiteId::GenBracketAxioms => "gen_bracket_axioms",
            SuiteId::WarpedTensor => "warped_tensor",
            SuiteId::SymplecticCor => "symplectic_cor",
            SuiteId::DmuTorsionCurvature => "dmu_torsion_curvature",
            SuiteId::GenBracketLifts => "gen_bracket_lifts",
            SuiteId::ExtraTensors => "extra_tensors",
            SuiteId::WarpedConnection => "warped_connection",
            SuiteId::WarpedDpi => "warped_dpi",
            SuiteId::WarpedCurvature => "warped_curvature",
            SuiteId::RicciCor => "ricci_cor",
            SuiteId::ScalarCor => "scalar_cor",
            SuiteId::SectionalCor => "sectional_cor",
            SuiteId::GeomTheorems => "geom_theorems",
        }
    }

    pub fn parse(s: &str) -> Result<SuiteId> {
        SuiteId::ALL
            .into_iter()
            .find(|id| id.id() == s)
            .ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }

    /// One-line description of what the suite checks.
    pub fn anchor(self) -> &'static str {
        match self {
            SuiteId::PoissonBasics => {
                "scalar bracket pairing, Jacobi residuals, and exactness of the Koszul bracket"
            }
            SuiteId::ConnectionAxioms => {
                "metric parallelism, vanishing torsion, and the six-term linear system defining the metric connection"
            }
            SuiteId::Operators => {
                "the two Hessian routes, Hessian symmetry, and the left/right trace operators"
            }
            SuiteId::GenBracketAxioms => {
                "form bracket well-definedness and product rules, with the Jacobi and metacurvature checks gated on flatness"
            }
            SuiteId::WarpedTensor => {
                "blockwise Schouten self-bracket of the warped tensor and its Jacobi obstruction"
            }
            SuiteId::SymplecticCor => {
                "rank additivity and the nondegeneracy criterion for warped pairs of nondegenerate factors"
            }
            SuiteId::DmuTorsionCurvature => {
                "torsion and curvature of the block connection against their factor assemblies"
            }
            SuiteId::GenBracketLifts => {
                "form brackets of lifted factor forms against the lifted factor brackets"
            }
            SuiteId::ExtraTensors => {
                "the Hamiltonian wedge tensor and the weighted product tensor built from factor Casimirs"
            }
            SuiteId::WarpedConnection => {
                "metric connection of the warped pair against its closed-form blocks"
            }
            SuiteId::WarpedDpi => {
                "covariant derivative of the warped tensor against its closed-form blocks"
            }
            SuiteId::WarpedCurvature => {
                "curvature of the warped metric connection against its closed-form blocks"
            }
            SuiteId::RicciCor => "Ricci tensor of the warped pair against its closed-form blocks",
            SuiteId::ScalarCor => {
                "scalar curvature of the warped pair against its closed-form expression"
            }
            SuiteId::SectionalCor => {
                "sectional curvature of coordinate planes against the factor plane expressions"
            }
            SuiteId::GeomTheorems => {
                "transfer of flatness, Ricci flatness, local symmetry, parallelism, metaflatness and constant curvature between a pair and its factors; converse directions counterexample-tested"
            }
        }
    }

    /// Whether the suite needs a warped pair rather than a single chart.
    pub fn needs_warped(self) -> bool {
        !matches!(
            self,
            SuiteId::PoissonBasics
                | SuiteId::ConnectionAxioms
                | SuiteId::Operators
                | SuiteId::GenBracketAxioms
        )
    }
}

/// Residual summary for one identity.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub id: String,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub tol: f64,
    pub status: Status,
}

/// All identities of one suite.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub id: SuiteId,
    pub anchor: &'static str,
    pub identities: Vec<IdentityReport>,
    pub status: Status,
}

impl SuiteReport {
    fn skipped(id: SuiteId) -> SuiteReport {
        SuiteReport {
            id,
            anchor: id.anchor(),
            identities: Vec::new(),
            status: Status::Skip,
        }
    }

    fn from_accs(id: SuiteId, accs: Vec<IdAcc>, tol: f64) -> SuiteReport {
        let identities: Vec<IdentityReport> = accs.into_iter().map(|a| a.report(tol)).collect();
        let mut status = Status::Skip;
        for ir in &identities {
            match ir.status {
                Status::Fail => {
                    status = Status::Fail;
                    break;
                }
                Status::Pass => status = Status::Pass,
                Status::Skip => {}
            }
        }
        SuiteReport {
            id,
            anchor: id.anchor(),
            identities,
            status,
        }
    }
}

/// Full result of running suites on one fixture.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub tool_version: String,
    pub fixture: String,
    pub seed: u64,
    pub samples: usize,
    pub suites: Vec<SuiteReport>,
}

impl CheckReport {
    pub fn suite(&self, id: SuiteId) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.id == id)
    }

    /// True when every non-skipped suite passed.
    pub fn all_executed_pass(&self) -> bool {
        self.suites.iter().all(|s| s.status != Status::Fail)
    }
}

/// Sampling parameters shared by every suite of a run.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            samples: 64,
            tol: 1e-8,
            seed: 7,
        }
    }
}

/// Residual accumulator for one identity. `push` records a residual,
/// `push_flag` a yes/no equivalence as 0 or 1; an accumulator that saw no
/// residuals (or was created skipped) reports [`Status::Skip`].
pub(crate) struct IdAcc {
    id: &'static str,
    max: f64,
    sum: f64,
    n: usize,
    skip: bool,
}

impl IdAcc {
    pub(crate) fn new(id: &'static str) -> IdAcc {
        IdAcc {
            id,
            max: 0.0,
            sum: 0.0,
            n: 0,
            skip: false,
        }
    }

    pub(crate) fn skipped(id: &'static str) -> IdAcc {
        IdAcc {
            skip: true,
            ..IdAcc::new(id)
        }
    }

    pub(crate) fn push(&mut self, r: f64) {
        let r = if r.is_finite() { r } else { f64::MAX };
        self.max = self.max.max(r);
        self.sum += r;
        self.n += 1;
    }

    pub(crate) fn push_flag(&mut self, ok: bool) {
        self.push(if ok { 0.0 } else { 1.0 });
    }

    fn report(self, tol: f64) -> IdentityReport {
        let clamp = |v: f64| if v.is_finite() { v } else { f64::MAX };
        let status = if self.skip || self.n == 0 {
            Status::Skip
        } else if self.max <= tol {
            Status::Pass
        } else {
            Status::Fail
        };
        IdentityReport {
            id: self.id.to_string(),
            max_residual: clamp(self.max),
            mean_residual: clamp(if self.n > 0 {
                self.sum / self.n as f64
            } else {
                0.0
            }),
            tol,
            status,
        }
    }
}

/// Input data of a fixture: a single chart triple (with an optional
/// connection override for the form-bracket suite) or a warped pair.
pub enum FixtureData {
    Chart {
        triple: Triple,
        conn_override: Option<ContraConnection>,
    },
    Warped(Box<WarpedInput>),
}

/// A named input with expected suite outcomes. User-supplied definitions
/// carry an empty expectation map; built-in examples pin all sixteen.
pub struct Fixture {
    pub name: String,
    pub summary: String,
    pub data: FixtureData,
    pub expected: BTreeMap<SuiteId, Status>,
}

impl Fixture {
    /// Whether the report matches this fixture's expectations: every
    /// executed suite must land on its pinned status. Fixtures without
    /// expectations fall back to "nothing failed".
    pub fn matches(&self, report: &CheckReport) -> bool {
        if self.expected.is_empty() {
            return report.all_executed_pass();
        }
        report
            .suites
            .iter()
            .all(|s| self.expected.get(&s.id) == Some(&s.status))
    }
}

/// Parse a definition file: an object with `base`/`fiber` keys is a warped
/// pair, anything else a single chart.
pub fn load_definition(name: &str, src: &str) -> Result<Fixture> {
    let v: serde_json::Value = serde_json::from_str(src)?;
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Definition("expected a JSON object".to_string()))?;
    let data = if obj.contains_key("base") || obj.contains_key("fiber") {
        let def = WarpedDef::from_json(src)?;
        FixtureData::Warped(Box::new(def.into_input()?))
    } else {
        let def = ChartDef::from_json(src)?;
        let (_, triple) = def.into_triple()?;
        FixtureData::Chart {
            triple,
            conn_override: None,
        }
    };
    Ok(Fixture {
        name: name.to_string(),
        summary: String::new(),
        data,
        expected: BTreeMap::new(),
    })
}

/// Run the requested suites (all sixteen when `requested` is `None`) on one
/// fixture. With an explicit request, a suite that does not apply to the
/// fixture kind is an error; in a full run it is recorded as skipped.
pub fn run_fixture(
    fx: &Fixture,
    requested: Option<&[SuiteId]>,
    cfg: &RunConfig,
) -> Result<CheckReport> {
    let list: Vec<SuiteId> = match requested {
        Some(r) => r.to_vec(),
        None => SuiteId::ALL.to_vec(),
    };
    let mut reports = Vec::with_capacity(list.len());
    match &fx.data {
        FixtureData::Chart {
            triple,
            conn_override,
        } => {
            let arts = suites::ChartArts::new(triple, conn_override.as_ref());
            let pts = triple.sample(cfg.samples, cfg.seed, &[])?;
            for s in list {
                if s.needs_warped() {
                    if requested.is_some() {
                        return Err(Error::SuiteMismatch {
                            suite: s.id().to_string(),
                            fixture: fx.name.clone(),
                            why: "needs a warped pair, fixture is a single chart".to_string(),
                        });
                    }
                    reports.push(SuiteReport::skipped(s));
                    continue;
                }
                let accs = suites::run_chart_suite(s, &arts, &pts, cfg)?;
                reports.push(SuiteReport::from_accs(s, accs, cfg.tol));
            }
        }
        FixtureData::Warped(input) => {
            let arts = suites::WarpedArts::new(input)?;
            let pts = arts.tw.sample(cfg.samples, cfg.seed, &[])?;
            for s in list {
                let accs = suites::run_warped_suite(s, &arts, &pts, cfg)?;
                reports.push(SuiteReport::from_accs(s, accs, cfg.tol));
            }
        }
    }
    Ok(CheckReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        fixture: fx.name.clone(),
        seed: cfg.seed,
        samples: cfg.samples,
        suites: reports,
    })
}

/// Deterministic pretty-printed JSON, one trailing newline.
pub fn render_report(report: &CheckReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialization");
    s.push('\n');
    s
}
