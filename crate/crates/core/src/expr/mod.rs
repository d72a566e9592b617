//! Symbolic scalar expressions: exact differentiation, numeric evaluation,
//! light simplification. Trees are immutable and cheaply shared, so repeated
//! differentiation produces DAGs rather than blow-up copies.

mod parser;

pub use parser::parse_expr;

use crate::error::{Error, Result};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug)]
pub enum Node {
    Num(f64),
    Var(String),
    Unary(UnOp, Expr),
    Bin(BinOp, Expr, Expr),
    /// Power with a constant exponent; general f^g is out of the language.
    Pow(Expr, f64),
}

/// Immutable expression handle. Clones share the underlying tree.
#[derive(Debug, Clone)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn num(c: f64) -> Expr {
        Expr(Arc::new(Node::Num(c)))
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr(Arc::new(Node::Var(name.into())))
    }

    pub fn zero() -> Expr {
        Expr::num(0.0)
    }

    pub fn one() -> Expr {
        Expr::num(1.0)
    }

    pub fn as_num(&self) -> Option<f64> {
        match self.node() {
            Node::Num(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_num() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_num() == Some(1.0)
    }

    // Smart constructors fold constants and prune 0/1 units so that the
    // block-sparse tensors built on top stay small without a separate
    // normalization pass.

    pub fn add(a: &Expr, b: &Expr) -> Expr {
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
            return Expr::num(x + y);
        }
        Expr(Arc::new(Node::Bin(BinOp::Add, a.clone(), b.clone())))
    }

    pub fn sub(a: &Expr, b: &Expr) -> Expr {
        if b.is_zero() {
            return a.clone();
        }
        if a.is_zero() {
            return Expr::neg(b);
        }
        if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
            return Expr::num(x - y);
        }
        Expr(Arc::new(Node::Bin(BinOp::Sub, a.clone(), b.clone())))
    }

    pub fn mul(a: &Expr, b: &Expr) -> Expr {
        if a.is_zero() || b.is_zero() {
            return Expr::zero();
        }
        if a.is_one() {
            return b.clone();
        }
        if b.is_one() {
            return a.clone();
        }
        if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
            return Expr::num(x * y);
        }
        Expr(Arc::new(Node::Bin(BinOp::Mul, a.clone(), b.clone())))
    }

    pub fn div(a: &Expr, b: &Expr) -> Expr {
        if b.is_one() {
            return a.clone();
        }
        if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
            // a zero divisor is kept as a node so evaluation reports it
            if y != 0.0 {
                return Expr::num(x / y);
            }
        }
        Expr(Arc::new(Node::Bin(BinOp::Div, a.clone(), b.clone())))
    }

    pub fn neg(a: &Expr) -> Expr {
        if let Some(x) = a.as_num() {
            return Expr::num(-x);
        }
        if let Node::Unary(UnOp::Neg, inner) = a.node() {
            return inner.clone();
        }
        Expr(Arc::new(Node::Unary(UnOp::Neg, a.clone())))
    }

    fn unary(op: UnOp, a: &Expr) -> Expr {
        if let Some(x) = a.as_num() {
            let v = match op {
                UnOp::Neg => -x,
                UnOp::Sin => x.sin(),
                UnOp::Cos => x.cos(),
                UnOp::Exp => x.exp(),
                UnOp::Ln => x.ln(),
                UnOp::Sqrt => x.sqrt(),
            };
            // non-finite folds (ln of 0, sqrt of negatives) stay symbolic so
            // evaluation can name the offending subexpression
            if v.is_finite() {
                return Expr::num(v);
            }
        }
        Expr(Arc::new(Node::Unary(op, a.clone())))
    }

    pub fn sin(a: &Expr) -> Expr {
        Expr::unary(UnOp::Sin, a)
    }

    pub fn cos(a: &Expr) -> Expr {
        Expr::unary(UnOp::Cos, a)
    }

    pub fn exp(a: &Expr) -> Expr {
        Expr::unary(UnOp::Exp, a)
    }

    pub fn ln(a: &Expr) -> Expr {
        Expr::unary(UnOp::Ln, a)
    }

    pub fn sqrt(a: &Expr) -> Expr {
        Expr::unary(UnOp::Sqrt, a)
    }

    pub fn powc(base: &Expr, exponent: f64) -> Expr {
        if exponent == 0.0 {
            return Expr::one();
        }
        if exponent == 1.0 {
            return base.clone();
        }
        if let Some(x) = base.as_num() {
            let v = x.powf(exponent);
            if v.is_finite() {
                return Expr::num(v);
            }
        }
        Expr(Arc::new(Node::Pow(base.clone(), exponent)))
    }

    /// Sum of an iterator of expressions; empty sums are 0.
    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        terms
            .into_iter()
            .fold(Expr::zero(), |acc, t| Expr::add(&acc, &t))
    }

    /// Exact partial derivative with respect to `coord`.
    pub fn diff(&self, coord: &str) -> Expr {
        match self.node() {
            Node::Num(_) => Expr::zero(),
            Node::Var(v) => {
                if v == coord {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Unary(op, a) => {
                let da = a.diff(coord);
                match op {
                    UnOp::Neg => Expr::neg(&da),
                    UnOp::Sin => Expr::mul(&Expr::cos(a), &da),
                    UnOp::Cos => Expr::neg(&Expr::mul(&Expr::sin(a), &da)),
                    UnOp::Exp => Expr::mul(self, &da),
                    UnOp::Ln => Expr::div(&da, a),
                    UnOp::Sqrt => Expr::div(&da, &Expr::mul(&Expr::num(2.0), self)),
                }
            }
            Node::Bin(op, a, b) => {
                let da = a.diff(coord);
                let db = b.diff(coord);
                match op {
                    BinOp::Add => Expr::add(&da, &db),
                    BinOp::Sub => Expr::sub(&da, &db),
                    BinOp::Mul => Expr::add(&Expr::mul(&da, b), &Expr::mul(a, &db)),
                    BinOp::Div => {
                        let num = Expr::sub(&Expr::mul(&da, b), &Expr::mul(a, &db));
                        Expr::div(&num, &Expr::powc(b, 2.0))
                    }
                }
            }
            Node::Pow(base, c) => {
                let db = base.diff(coord);
                let scaled = Expr::mul(&Expr::num(*c), &Expr::powc(base, c - 1.0));
                Expr::mul(&scaled, &db)
            }
        }
    }

    /// One bottom-up rebuild through the smart constructors: constant folding
    /// plus the 0/1 unit identities. Never loops, never reassociates.
    pub fn simplify(&self) -> Expr {
        match self.node() {
            Node::Num(_) | Node::Var(_) => self.clone(),
            Node::Unary(op, a) => {
                let a = a.simplify();
                match op {
                    UnOp::Neg => Expr::neg(&a),
                    _ => Expr::unary(*op, &a),
                }
            }
            Node::Bin(op, a, b) => {
                let a = a.simplify();
                let b = b.simplify();
                match op {
                    BinOp::Add => Expr::add(&a, &b),
                    BinOp::Sub => Expr::sub(&a, &b),
                    BinOp::Mul => Expr::mul(&a, &b),
                    BinOp::Div => Expr::div(&a, &b),
                }
            }
            Node::Pow(base, c) => Expr::powc(&base.simplify(), *c),
        }
    }

    /// Variable names appearing in the tree.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self.node() {
            Node::Num(_) => {}
            Node::Var(v) => {
                out.insert(v.clone());
            }
            Node::Unary(_, a) => a.collect_vars(out),
            Node::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Node::Pow(a, _) => a.collect_vars(out),
        }
    }

    /// Convenience single-shot evaluation; for bulk work use [`EvalCtx`].
    pub fn eval(&self, p: &Point) -> Result<f64> {
        EvalCtx::new(p).eval(self)
    }
}

/// Evaluation locus: a complete coordinate-name to value assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    values: BTreeMap<String, f64>,
}

impl Point {
    pub fn new(values: BTreeMap<String, f64>) -> Point {
        Point { values }
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Point {
        Point {
            values: pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.values.insert(name.to_string(), value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Merge of two points with disjoint coordinate sets.
    pub fn union(&self, other: &Point) -> Point {
        let mut values = self.values.clone();
        values.extend(other.values.iter().map(|(k, v)| (k.clone(), *v)));
        Point { values }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, (k, v)) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        write!(f, ")")
    }
}

/// Caching evaluator for one point. Shared subtrees are evaluated once,
/// keyed by node identity, which is what makes derivative DAGs cheap. Each
/// cached node is kept alive by the entry itself; otherwise a dropped tree
/// could hand its address to a fresh node and resurrect a stale value.
pub struct EvalCtx<'p> {
    point: &'p Point,
    cache: HashMap<usize, (f64, Expr)>,
}

impl<'p> EvalCtx<'p> {
    pub fn new(point: &'p Point) -> Self {
        EvalCtx {
            point,
            cache: HashMap::new(),
        }
    }

    pub fn eval(&mut self, e: &Expr) -> Result<f64> {
        if let Some((v, _)) = self.cache.get(&e.key()) {
            return Ok(*v);
        }
        let v = match e.node() {
            Node::Num(c) => *c,
            Node::Var(name) => self
                .point
                .get(name)
                .ok_or_else(|| Error::MissingCoordinate(name.clone()))?,
            Node::Unary(op, a) => {
                let x = self.eval(a)?;
                match op {
                    UnOp::Neg => -x,
                    UnOp::Sin => x.sin(),
                    UnOp::Cos => x.cos(),
                    UnOp::Exp => x.exp(),
                    UnOp::Ln => {
                        if x <= 0.0 {
                            return Err(Error::Domain {
                                what: format!("ln of {x}"),
                                subexpr: e.to_string(),
                            });
                        }
                        x.ln()
                    }
                    UnOp::Sqrt => {
                        if x < 0.0 {
                            return Err(Error::Domain {
                                what: format!("sqrt of {x}"),
                                subexpr: e.to_string(),
                            });
                        }
                        x.sqrt()
                    }
                }
            }
            Node::Bin(op, a, b) => {
                let x = self.eval(a)?;
                let y = self.eval(b)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(Error::Domain {
                                what: "division by zero".into(),
                                subexpr: e.to_string(),
                            });
                        }
                        x / y
                    }
                }
            }
            Node::Pow(base, c) => {
                let x = self.eval(base)?;
                let v = x.powf(*c);
                if !v.is_finite() {
                    return Err(Error::Domain {
                        what: format!("{x}^{c} not finite"),
                        subexpr: e.to_string(),
                    });
                }
                v
            }
        };
        self.cache.insert(e.key(), (v, e.clone()));
        Ok(v)
    }
}

// Operator sugar over references keeps the tensor formulas readable.

impl std::ops::Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl std::ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl std::ops::Div for &Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        Expr::div(self, rhs)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

fn precedence(e: &Expr) -> u8 {
    match e.node() {
        Node::Num(c) if *c < 0.0 => 1,
        Node::Num(_) | Node::Var(_) => 5,
        Node::Unary(UnOp::Neg, _) => 1,
        Node::Unary(_, _) => 5,
        Node::Bin(BinOp::Add | BinOp::Sub, _, _) => 1,
        Node::Bin(BinOp::Mul | BinOp::Div, _, _) => 2,
        Node::Pow(_, _) => 4,
    }
}

fn fmt_child(f: &mut fmt::Formatter<'_>, child: &Expr, min_prec: u8) -> fmt::Result {
    if precedence(child) < min_prec {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Num(c) => write!(f, "{c}"),
            Node::Var(v) => write!(f, "{v}"),
            Node::Unary(UnOp::Neg, a) => {
                write!(f, "-")?;
                fmt_child(f, a, 2)
            }
            Node::Unary(op, a) => {
                let name = match op {
                    UnOp::Sin => "sin",
                    UnOp::Cos => "cos",
                    UnOp::Exp => "exp",
                    UnOp::Ln => "ln",
                    UnOp::Sqrt => "sqrt",
                    UnOp::Neg => unreachable!(),
                };
                write!(f, "{name}({a})")
            }
            Node::Bin(op, a, b) => {
                let (sym, prec, right_bump) = match op {
                    BinOp::Add => ("+", 1, 0),
                    BinOp::Sub => ("-", 1, 1),
                    BinOp::Mul => ("*", 2, 0),
                    BinOp::Div => ("/", 2, 1),
                };
                fmt_child(f, a, prec)?;
                write!(f, " {sym} ")?;
                fmt_child(f, b, prec + right_bump)
            }
            Node::Pow(base, c) => {
                fmt_child(f, base, 5)?;
                if *c < 0.0 {
                    write!(f, "^({c})")
                } else {
                    write!(f, "^{c}")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(pairs: &[(&str, f64)]) -> Point {
        Point::from_pairs(pairs.iter().copied())
    }

    #[test]
    fn evaluates_polynomials() {
        let e = parse_expr("x^2*y", &["x".into(), "y".into()]).unwrap();
        assert_eq!(e.eval(&p(&[("x", 2.0), ("y", 3.0)])).unwrap(), 12.0);
    }

    #[test]
    fn derivative_of_product() {
        let e = parse_expr("x^2*y", &["x".into(), "y".into()]).unwrap();
        let d = e.diff("x");
        let at = p(&[("x", 3.0), ("y", 5.0)]);
        assert_eq!(d.eval(&at).unwrap(), 30.0);
    }

    #[test]
    fn derivative_of_sin_at_zero() {
        let e = parse_expr("sin(x)", &["x".into()]).unwrap();
        assert_eq!(e.diff("x").eval(&p(&[("x", 0.0)])).unwrap(), 1.0);
    }

    #[test]
    fn chain_rule_exp() {
        // d/dy (x^2 + exp(y)) at (1, 0) = 1
        let e = parse_expr("x^2 + exp(y)", &["x".into(), "y".into()]).unwrap();
        assert_eq!(
            e.diff("y").eval(&p(&[("x", 1.0), ("y", 0.0)])).unwrap(),
            1.0
        );
    }

    #[test]
    fn ln_domain_error() {
        let e = parse_expr("ln(x)", &["x".into()]).unwrap();
        let err = e.eval(&p(&[("x", 0.0)])).unwrap_err();
        assert!(matches!(err, Error::Domain { .. }), "{err}");
    }

    #[test]
    fn division_by_zero_reports_subexpression() {
        let e = parse_expr("1/(x - 1)", &["x".into()]).unwrap();
        let err = e.eval(&p(&[("x", 1.0)])).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("division by zero"), "{msg}");
        assert!(msg.contains("x - 1"), "{msg}");
    }

    #[test]
    fn exp_cos_at_origin() {
        let e = parse_expr("exp(x)*cos(y)", &["x".into(), "y".into()]).unwrap();
        assert_eq!(e.eval(&p(&[("x", 0.0), ("y", 0.0)])).unwrap(), 1.0);
    }

    #[test]
    fn simplify_units() {
        let x = Expr::var("x");
        let e = Expr(Arc::new(Node::Bin(BinOp::Mul, x.clone(), Expr::zero())));
        assert!(e.simplify().is_zero());

        let e = Expr(Arc::new(Node::Bin(
            BinOp::Add,
            Expr::num(2.0),
            Expr::num(3.0),
        )));
        assert_eq!(e.simplify().as_num(), Some(5.0));

        let e = Expr(Arc::new(Node::Bin(
            BinOp::Mul,
            Expr(Arc::new(Node::Pow(x.clone(), 1.0))),
            Expr::one(),
        )));
        let s = e.simplify();
        assert!(matches!(s.node(), Node::Var(v) if v == "x"));
    }

    #[test]
    fn simplify_preserves_value() {
        let e = parse_expr("(x + 0)*(1*y) + x^1 - 0/(1 + y)", &["x".into(), "y".into()]).unwrap();
        let s = e.simplify();
        let at = p(&[("x", 1.7), ("y", -0.3)]);
        let a = e.eval(&at).unwrap();
        let b = s.eval(&at).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn display_round_trips() {
        let coords = vec!["x".to_string(), "y".to_string()];
        for src in [
            "x^2*y - 3/(y + 1)",
            "-x^2",
            "sin(x)*cos(y) + exp(x*y)",
            "sqrt(x + 2)/ln(y + 3)",
            "x - (y - 1) - 2",
            "(x + y)^3",
            "2^-2*x",
        ] {
            let e = parse_expr(src, &coords).unwrap();
            let back = parse_expr(&e.to_string(), &coords).unwrap();
            let at = p(&[("x", 0.7), ("y", 1.3)]);
            let a = e.eval(&at).unwrap();
            let b = back.eval(&at).unwrap();
            assert!(
                (a - b).abs() <= 1e-12 * a.abs().max(1.0),
                "{src} printed as {e} evaluates {a} vs {b}"
            );
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let coords = vec!["x".to_string(), "y".to_string()];
        let e = parse_expr("sin(x*y) + exp(x/2)*y^3 - sqrt(x + 2)", &coords).unwrap();
        let d = e.diff("x");
        let at = p(&[("x", 0.8), ("y", 1.1)]);
        let h = 1e-6;
        let mut hi = at.clone();
        hi.set("x", 0.8 + h);
        let mut lo = at.clone();
        lo.set("x", 0.8 - h);
        let fd = (e.eval(&hi).unwrap() - e.eval(&lo).unwrap()) / (2.0 * h);
        let exact = d.eval(&at).unwrap();
        assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0));
    }

    #[test]
    fn shared_subtrees_evaluate_once() {
        let x = Expr::var("x");
        let mut big = Expr::sin(&x);
        for _ in 0..200 {
            big = Expr::add(&big, &big);
        }
        // exponential tree as a DAG; only linear many distinct nodes
        let at = p(&[("x", 0.5)]);
        let v = big.eval(&at).unwrap();
        assert!(v.is_finite());
    }

    #[test]
    fn cache_survives_node_recycling() {
        // Dropped nodes free heap slots that the allocator hands right back to
        // fresh nodes of the same size; the cache must not confuse the two.
        let at = p(&[("x", 2.0)]);
        let mut ctx = EvalCtx::new(&at);
        for i in 0..100 {
            let e = Expr::mul(&Expr::num(i as f64), &Expr::var("x"));
            assert_eq!(ctx.eval(&e).unwrap(), 2.0 * i as f64);
        }
    }
}
