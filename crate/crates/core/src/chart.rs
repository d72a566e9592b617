//! Coordinate charts with sampling boxes, the (Π, g) data bundle, and the
//! JSON chart-definition format.

use crate::error::{Error, Result};
use crate::expr::{parse_expr, Expr, Point};
use crate::tensor::{invert_cometric, Bivector, Cometric, Endomorphism, Matrix, Metric};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::sync::Arc;

pub type ChartRef = Arc<Chart>;

/// A named coordinate system with a closed sampling box per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    name: String,
    coords: Vec<String>,
    /// per-coordinate (lo, hi), parallel to `coords`
    domain: Vec<(f64, f64)>,
}

impl Chart {
    pub fn new(name: &str, coords: &[&str], domain: &[(&str, f64, f64)]) -> Result<Chart> {
        let coords: Vec<String> = coords.iter().map(|s| s.to_string()).collect();
        let map: BTreeMap<&str, (f64, f64)> =
            domain.iter().map(|(c, lo, hi)| (*c, (*lo, *hi))).collect();
        Chart::build(name.to_string(), coords, |c| map.get(c).copied())
    }

    fn build(
        name: String,
        coords: Vec<String>,
        mut lookup: impl FnMut(&str) -> Option<(f64, f64)>,
    ) -> Result<Chart> {
        if coords.is_empty() {
            return Err(Error::InvalidChart {
                name,
                msg: "no coordinates".into(),
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in &coords {
            if !seen.insert(c.clone()) {
                return Err(Error::CoordinateCollision(c.clone()));
            }
        }
        let mut dom = Vec::with_capacity(coords.len());
        for c in &coords {
            let (lo, hi) = lookup(c).ok_or_else(|| Error::InvalidChart {
                name: name.clone(),
                msg: format!("no domain interval for coordinate '{c}'"),
            })?;
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidChart {
                    name: name.clone(),
                    msg: format!("bad interval [{lo}, {hi}] for '{c}'"),
                });
            }
            dom.push((lo, hi));
        }
        Ok(Chart {
            name,
            coords,
            domain: dom,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn domain(&self, i: usize) -> (f64, f64) {
        self.domain[i]
    }

    /// Product chart: base coordinates first, then fiber. Coordinate names
    /// must be disjoint.
    pub fn product(name: &str, base: &Chart, fiber: &Chart) -> Result<Chart> {
        let mut coords = base.coords.clone();
        coords.extend(fiber.coords.iter().cloned());
        let mut dom: BTreeMap<String, (f64, f64)> = BTreeMap::new();
        for (c, d) in base.coords.iter().zip(&base.domain) {
            dom.insert(c.clone(), *d);
        }
        for (c, d) in fiber.coords.iter().zip(&fiber.domain) {
            dom.insert(c.clone(), *d);
        }
        Chart::build(name.to_string(), coords, |c| dom.get(c).copied())
    }

    pub fn parse(&self, src: &str) -> Result<Expr> {
        parse_expr(src, &self.coords)
    }
}

/// Deterministic uniform samples in the chart box. Each guard expression
/// must stay ≥ 1e-6 in absolute value; offending draws are rejected and
/// retried up to 1000 times per point.
pub fn sample_points(chart: &Chart, n: usize, seed: u64, guards: &[Expr]) -> Result<Vec<Point>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    'points: for _ in 0..n {
        for _ in 0..1000 {
            let mut p = Point::from_pairs(std::iter::empty::<(&str, f64)>());
            for (c, (lo, hi)) in chart.coords.iter().zip(&chart.domain) {
                let t: f64 = rng.gen();
                p.set(c, lo + t * (hi - lo));
            }
            // evaluation failures (log/root/pole outside its domain) count
            // as rejections, same as a too-small guard value
            let ok = guards
                .iter()
                .all(|g| matches!(g.eval(&p), Ok(v) if v.abs() >= 1e-6));
            if ok {
                out.push(p);
                continue 'points;
            }
        }
        return Err(Error::GuardExhausted { retries: 1000 });
    }
    Ok(out)
}

/// A chart together with its bivector, cometric and derived metric. The
/// bundle every connection-level computation starts from.
#[derive(Debug, Clone)]
pub struct Triple {
    chart: ChartRef,
    pi: Bivector,
    g: Cometric,
    gt: Metric,
}

impl Triple {
    /// Derives the metric by symbolic inversion (dim ≤ 4).
    pub fn new(chart: &ChartRef, pi: Bivector, g: Cometric) -> Result<Triple> {
        let gt = invert_cometric(&g)?;
        Triple::with_metric(chart, pi, g, gt)
    }

    /// Caller supplies the metric; used where the inverse is known blockwise
    /// (warped products) and for tests with hand-built metrics.
    pub fn with_metric(chart: &ChartRef, pi: Bivector, g: Cometric, gt: Metric) -> Result<Triple> {
        crate::tensor::same_chart(chart, pi.chart())?;
        crate::tensor::same_chart(chart, g.chart())?;
        crate::tensor::same_chart(chart, gt.chart())?;
        Ok(Triple {
            chart: chart.clone(),
            pi,
            g,
            gt,
        })
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn pi(&self) -> &Bivector {
        &self.pi
    }

    pub fn g(&self) -> &Cometric {
        &self.g
    }

    pub fn gt(&self) -> &Metric {
        &self.gt
    }

    pub fn j(&self) -> Result<Endomorphism> {
        crate::tensor::j_field(&self.g, &self.gt, &self.pi)
    }

    /// Sampling with the metric determinant auto-registered as a guard, so
    /// points never land where g̃ degenerates.
    pub fn sample(&self, n: usize, seed: u64, extra_guards: &[Expr]) -> Result<Vec<Point>> {
        let mut guards = vec![self.g.det()];
        guards.extend_from_slice(extra_guards);
        sample_points(&self.chart, n, seed, &guards)
    }
}

/// On-disk chart definition.
///
/// ```json
/// {
///   "name": "plane",
///   "coordinates": ["x", "y"],
///   "domain": { "x": [-1, 1], "y": [-1, 1] },
///   "cometric": [["1", "0"], ["0", "1"]],
///   "bivector": [["0", "1"], ["0", "0"]]
/// }
/// ```
///
/// The cometric may list only the upper triangle per row (row i starting at
/// column i); the bivector may list only the strictly upper triangle (row i
/// starting at column i+1, the last row omitted).
#[derive(Debug, Clone, Deserialize)]
pub struct ChartDef {
    pub name: String,
    pub coordinates: Vec<String>,
    pub domain: BTreeMap<String, (f64, f64)>,
    pub cometric: Vec<Vec<String>>,
    pub bivector: Vec<Vec<String>>,
}

impl ChartDef {
    pub fn from_json(src: &str) -> Result<ChartDef> {
        Ok(serde_json::from_str(src)?)
    }

    pub fn into_triple(self) -> Result<(ChartRef, Triple)> {
        let chart = Arc::new(Chart::build(
            self.name.clone(),
            self.coordinates.clone(),
            |c| self.domain.get(c).copied(),
        )?);
        let g = build_symmetric(&chart, &self.cometric, &self.name)?;
        let pi = build_antisymmetric(&chart, &self.bivector, &self.name)?;
        let triple = Triple::new(&chart, pi, g)?;
        Ok((chart, triple))
    }
}

fn build_symmetric(chart: &ChartRef, rows: &[Vec<String>], name: &str) -> Result<Cometric> {
    let d = chart.dim();
    if rows.len() != d {
        return Err(Error::InvalidChart {
            name: name.into(),
            msg: format!("cometric needs {d} rows, found {}", rows.len()),
        });
    }
    let mut m = Matrix::zeros(d);
    for (i, row) in rows.iter().enumerate() {
        let start = match row.len() {
            l if l == d => 0,
            l if l == d - i => i,
            l => {
                return Err(Error::InvalidChart {
                    name: name.into(),
                    msg: format!(
                        "cometric row {i} has {l} entries, expected {d} or {}",
                        d - i
                    ),
                })
            }
        };
        let triangular = row.len() == d - i;
        for (off, src) in row.iter().enumerate() {
            let j = start + off;
            let e = chart.parse(src)?;
            m.set(i, j, e.clone());
            if triangular && j > i {
                m.set(j, i, e);
            }
        }
    }
    Ok(Cometric::from_matrix(chart, m))
}

fn build_antisymmetric(chart: &ChartRef, rows: &[Vec<String>], name: &str) -> Result<Bivector> {
    let d = chart.dim();
    if rows.len() != d && rows.len() + 1 != d {
        return Err(Error::InvalidChart {
            name: name.into(),
            msg: format!(
                "bivector needs {d} (or {}) rows, found {}",
                d - 1,
                rows.len()
            ),
        });
    }
    let mut m = Matrix::zeros(d);
    for (i, row) in rows.iter().enumerate() {
        let start = match row.len() {
            l if l == d => 0,
            l if l + i + 1 == d => i + 1,
            l => {
                return Err(Error::InvalidChart {
                    name: name.into(),
                    msg: format!(
                        "bivector row {i} has {l} entries, expected {d} or {}",
                        d - i - 1
                    ),
                })
            }
        };
        for (off, src) in row.iter().enumerate() {
            let j = start + off;
            let e = chart.parse(src)?;
            // full rows: entries at j < i are the mirror, only j > i is read
            if j > i {
                m.set(i, j, e.clone());
                m.set(j, i, Expr::neg(&e));
            } else if j == i && !e.is_zero() {
                return Err(Error::InvalidChart {
                    name: name.into(),
                    msg: format!("bivector diagonal entry ({i},{i}) must be 0"),
                });
            }
        }
    }
    Ok(Bivector::from_matrix(chart, m))
}
