//! Contravariant pseudo-Riemannian Poisson geometry on coordinate charts.
//!
//! The crate builds symbolic bivector/cometric data on a chart, derives the
//! contravariant Levi-Civita connection and its invariants (torsion,
//! curvature, Ricci, sectional), forms differential-form brackets and the
//! metacurvature, and assembles warped structures over product charts. All
//! claimed identities are checked numerically at randomized sample points.

pub mod chart;
pub mod connection;
pub mod error;
pub mod expr;
pub mod forms;
pub mod hawkins;
pub mod poisson;
pub mod tensor;
pub mod verify;
pub mod warped;

pub use chart::{sample_points, Chart, ChartDef, ChartRef, Triple};
pub use connection::ContraConnection;
pub use error::{Error, Result};
pub use expr::{parse_expr, EvalCtx, Expr, Point};
pub use forms::{Form, Mask, Multivector};
pub use hawkins::{FormBracketContext, MetaflatCheck};
pub use poisson::CheckOutcome;
pub use tensor::{
    Bivector, Cometric, Endomorphism, Matrix, Metric, OneForm, TensorField, VectorField,
};
pub use verify::{
    builtin_fixture, builtin_names, load_definition, render_report, run_fixture, CheckReport,
    Fixture, FixtureData, IdentityReport, RunConfig, Status, SuiteId, SuiteReport,
};
pub use warped::{ProductChart, WarpedDef, WarpedInput, WarpedStructure};
