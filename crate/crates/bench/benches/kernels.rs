//! Hot-path timings: symbolic connection and curvature assembly, one
//! verification suite end to end, and batched expression evaluation.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use warped_poisson::{
    builtin_fixture, parse_expr, run_fixture, ContraConnection, FixtureData, Point, RunConfig,
    SuiteId,
};

fn connection_assembly(c: &mut Criterion) {
    let fx = builtin_fixture("so3star").unwrap();
    let FixtureData::Chart { triple, .. } = &fx.data else {
        unreachable!()
    };
    c.bench_function("levi_civita_so3star", |b| {
        b.iter(|| ContraConnection::levi_civita(black_box(triple)))
    });
    let conn = ContraConnection::levi_civita(triple);
    c.bench_function("curvature_so3star", |b| b.iter(|| conn.curvature()));
}

fn warped_blocks(c: &mut Criterion) {
    let fx = builtin_fixture("warpedCasimirMu").unwrap();
    let FixtureData::Warped(input) = &fx.data else {
        unreachable!()
    };
    c.bench_function("warped_levi_civita_blocks", |b| {
        b.iter(|| input.ws.levi_civita_blocks().unwrap())
    });
}

fn suite_run(c: &mut Criterion) {
    let fx = builtin_fixture("so3star").unwrap();
    let cfg = RunConfig {
        samples: 16,
        ..RunConfig::default()
    };
    c.bench_function("connection_axioms_suite_16pts", |b| {
        b.iter(|| run_fixture(&fx, Some(&[SuiteId::ConnectionAxioms]), &cfg).unwrap())
    });
}

fn expr_eval(c: &mut Criterion) {
    let coords = vec!["x".to_string(), "y".to_string()];
    let e = parse_expr(
        "sin(x*y)*exp(x/2) + (x^2 + y^2)^3/(1 + x^2*y^2) - ln(2 + x^2)",
        &coords,
    )
    .unwrap();
    let pts: Vec<Point> = (0..256)
        .map(|i| {
            let t = i as f64 / 256.0;
            Point::from_pairs([("x", 0.5 + t), ("y", 1.5 - t)])
        })
        .collect();
    c.bench_function("expr_eval_256pts", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for p in &pts {
                acc += e.eval(p).unwrap();
            }
            acc
        })
    });
}

criterion_group! {
    name = kernels;
    config = Criterion::default().sample_size(20);
    targets = connection_assembly, warped_blocks, suite_run, expr_eval
}
criterion_main!(kernels);
