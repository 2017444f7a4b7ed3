#![allow(dead_code)]

use fexlab::{Interval, Pim, PimSpec, Scalar};
use proptest::prelude::*;

pub fn q(n: i64, d: i64) -> Scalar {
    Scalar::ratio(n, d)
}

/// Exact maps with a finite alphabet.
pub fn finite_exact() -> Vec<(&'static str, Pim)> {
    vec![
        ("beta3", Pim::build(PimSpec::beta(q(3, 1))).unwrap()),
        ("beta5/2", Pim::build(PimSpec::beta(q(5, 2))).unwrap()),
        ("alpha-beta", Pim::build(PimSpec::AlphaBeta { alpha: q(1, 3), beta: q(5, 2) }).unwrap()),
        ("example-first", Pim::build(PimSpec::ExampleFirst).unwrap()),
        ("luroth-cuts", Pim::build(PimSpec::Luroth { cuts: Some(vec![q(0, 1), q(1, 5), q(1, 2), q(7, 8), q(1, 1)]) }).unwrap()),
        ("exchange", Pim::build(PimSpec::IntervalExchange {
            lengths: vec![q(1, 4), q(1, 3), q(5, 12)],
            translations: vec![q(3, 4), q(1, 6), q(-7, 12)],
        }).unwrap()),
        ("halves", Pim::build(PimSpec::IntervalExchange {
            lengths: vec![q(1, 2), q(1, 2)],
            translations: vec![q(1, 2), q(-1, 2)],
        }).unwrap()),
    ]
}

/// Exact maps with a countable alphabet.
pub fn lazy_exact() -> Vec<(&'static str, Pim)> {
    vec![
        ("gauss", Pim::build(PimSpec::gauss(q(1, 1))).unwrap()),
        ("gauss2", Pim::build(PimSpec::gauss(q(2, 1))).unwrap()),
        ("egyptian", Pim::build(PimSpec::egyptian()).unwrap()),
        ("luroth", Pim::build(PimSpec::Luroth { cuts: None }).unwrap()),
        ("cantor", Pim::build(PimSpec::Cantor).unwrap()),
    ]
}

pub fn float_maps() -> Vec<(&'static str, Pim)> {
    vec![
        ("tent", Pim::build(PimSpec::tent(Scalar::float(1.7))).unwrap()),
        ("quadratic", Pim::build(PimSpec::Quadratic { r: Scalar::float(0.9) }).unwrap()),
        ("golden", Pim::build(PimSpec::beta(Scalar::float((1.0 + 5f64.sqrt()) / 2.0))).unwrap()),
        ("rotation", Pim::build(PimSpec::rotation(Scalar::float(2f64.sqrt() - 1.0))).unwrap()),
    ]
}

pub fn all_maps() -> Vec<(&'static str, Pim)> {
    let mut v = finite_exact();
    v.extend(lazy_exact());
    v.extend(float_maps());
    v
}

/// The point `lo + t·(hi − lo)` for `t = k/1000`.
pub fn inside(i: &Interval, k: u32) -> Scalar {
    let t = match i.backend() {
        fexlab::Backend::Rational => q(k as i64, 1000),
        fexlab::Backend::Float => Scalar::float(k as f64 / 1000.0),
    };
    i.lo() + &(&t * &i.length())
}

/// A rational in `[0, 1)` with denominator below 4096.
pub fn unit_rational() -> impl Strategy<Value = Scalar> {
    (2i64..4096).prop_flat_map(|d| (0..d, Just(d))).prop_map(|(n, d)| q(n, d))
}

/// Same point on the requested map's backend.
pub fn on(pim: &Pim, x: &Scalar) -> Scalar {
    pim.backend().convert(x)
}

pub fn close(a: &Scalar, b: &Scalar, tol: f64) -> bool {
    match (a.as_rational(), b.as_rational()) {
        (Some(x), Some(y)) => x == y,
        _ => (a.to_f64() - b.to_f64()).abs() <= tol,
    }
}
