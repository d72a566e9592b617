//! Property checks for the expression layer: the printed form must reparse
//! to the same function, and exact derivatives must track central
//! differences on arbitrary trees.

use proptest::prelude::*;
use warped_poisson::{parse_expr, Expr, Point};

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::var("x")),
        Just(Expr::var("y")),
        (-2.0..2.0f64).prop_map(Expr::num),
    ]
}

/// Square-shifted arguments keep ln, sqrt, and denominators away from their
/// singular sets, so every generated tree evaluates everywhere.
fn tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(3, 24, 2, |inner| {
        (inner.clone(), inner, 0..10u8).prop_map(|(a, b, op)| match op {
            0 => Expr::add(&a, &b),
            1 => Expr::sub(&a, &b),
            2 => Expr::mul(&a, &b),
            3 => Expr::sin(&a),
            4 => Expr::cos(&a),
            5 => Expr::sqrt(&shift(&a)),
            6 => Expr::ln(&shift(&a)),
            7 => Expr::div(&a, &shift(&b)),
            8 => Expr::exp(&Expr::div(&a, &shift(&a))),
            _ => Expr::powc(&a, 2.0),
        })
    })
}

fn shift(e: &Expr) -> Expr {
    Expr::add(&Expr::num(2.0), &Expr::mul(e, e))
}

proptest! {
    #[test]
    fn printed_form_reparses_to_the_same_function(e in tree()) {
        let coords = vec!["x".to_string(), "y".to_string()];
        let back = parse_expr(&e.to_string(), &coords).unwrap();
        for (x, y) in [(0.8, 1.15), (1.3, 0.4), (0.2, 1.9)] {
            let at = Point::from_pairs([("x", x), ("y", y)]);
            let a = e.eval(&at).unwrap();
            let b = back.eval(&at).unwrap();
            prop_assert!(
                (a - b).abs() <= 1e-12 * a.abs().max(1.0),
                "{e} evaluates {a}, reparse {b}"
            );
        }
    }

    #[test]
    fn derivative_matches_central_difference(e in tree()) {
        let at = Point::from_pairs([("x", 0.8), ("y", 1.15)]);
        let v = e.eval(&at).unwrap();
        let dx = e.diff("x").eval(&at).unwrap();
        // magnitude cap keeps the truncation term of the central difference
        // below the comparison tolerance
        prop_assume!(v.abs() <= 1e3 && dx.abs() <= 1e3);
        let h = 1e-5;
        let mut hi = at.clone();
        hi.set("x", 0.8 + h);
        let mut lo = at.clone();
        lo.set("x", 0.8 - h);
        let fd = (e.eval(&hi).unwrap() - e.eval(&lo).unwrap()) / (2.0 * h);
        prop_assert!(
            (fd - dx).abs() <= 1e-5 * dx.abs().max(1.0),
            "{e}: exact {dx} vs central difference {fd}"
        );
    }
}
