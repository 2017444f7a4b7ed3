mod common;

use common::{all_maps, finite_exact, on, q, unit_rational};
use fexlab::representation::{self, Seed};
use fexlab::{Backend, FlipLex, Interval, Pim, PimSpec, RefinementConfig};
use proptest::prelude::*;
use std::cmp::Ordering;

fn nested(outer: &Interval, inner: &Interval) -> bool {
    match outer.backend() {
        Backend::Rational => outer.contains_interval(inner),
        Backend::Float => {
            outer.lo().to_f64() - 1e-12 <= inner.lo().to_f64() && inner.hi().to_f64() <= outer.hi().to_f64() + 1e-12
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cylinders_nest_along_codes(x in unit_rational()) {
        for (name, pim) in all_maps() {
            let x = on(&pim, &x);
            let w = representation::encode(&pim, &x, 12).unwrap();
            let mut parent = None;
            for n in 1..=w.len() {
                let c = representation::cylinder(&pim, &w.digits[..n]).unwrap();
                let c = c.unwrap_or_else(|| panic!("{name}: empty cylinder on the code of {x}"));
                if let Some(p) = &parent {
                    prop_assert!(nested(p, &c.hull), "{} at n={}", name, n);
                }
                parent = Some(c.hull);
            }
        }
    }

    #[test]
    fn codes_are_sandwiched(x in unit_rational(), n in 1usize..16) {
        for (name, pim) in all_maps() {
            let x = on(&pim, &x);
            let w = representation::encode(&pim, &x, n).unwrap();
            if !w.is_complete() {
                continue;
            }
            let hull = representation::decode(&pim, &w.digits).unwrap();
            prop_assert!(hull.contains(&x), "{}: {} outside hull of {:?}", name, x, w.digits);
            let a = representation::f_expand(&pim, &w.digits, Seed::Zero).unwrap().value;
            let b = representation::f_expand(&pim, &w.digits, Seed::One).unwrap().value;
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(lo <= x && x <= hi, "{}: seeds [{}, {}] miss {}", name, lo, hi, x);
        }
    }

    #[test]
    fn order_matches_codes(x in unit_rational(), y in unit_rational(), n in 1usize..30) {
        for (name, pim) in all_maps() {
            let (x, y) = (on(&pim, &x), on(&pim, &y));
            let w = representation::encode(&pim, &x, n).unwrap();
            let v = representation::encode(&pim, &y, n).unwrap();
            if !w.is_complete() || !v.is_complete() {
                continue;
            }
            let verdict = representation::flip_lex_compare(&pim, &w.digits, &v.digits);
            let order = x.partial_cmp(&y).unwrap();
            match order {
                Ordering::Less => prop_assert!(matches!(verdict, FlipLex::Less | FlipLex::Equal), "{}: {} < {} but {:?}", name, x, y, verdict),
                Ordering::Greater => prop_assert!(matches!(verdict, FlipLex::Greater | FlipLex::Equal), "{}: {} > {} but {:?}", name, x, y, verdict),
                Ordering::Equal => prop_assert_eq!(verdict, FlipLex::Equal),
            }
            // distinct codes decide the order
            if verdict == FlipLex::Less {
                prop_assert!(x < y, "{}", name);
            }
        }
    }
}

fn closed_norm(pim: &Pim, n_max: usize) -> Vec<fexlab::Scalar> {
    let cfg = RefinementConfig { n_max, tol: pim.scalar(0, 1), digit_cap: 12, node_budget: 200_000 };
    let r = representation::refinement_norm_with(pim, &cfg).unwrap();
    (1..=r.levels.len()).map(|n| r.norm(n).unwrap().clone()).collect()
}

#[test]
fn refinement_norm_never_increases() {
    for (name, pim) in all_maps() {
        let norms = closed_norm(&pim, 5);
        assert!(!norms.is_empty(), "{name}");
        for w in norms.windows(2) {
            assert!(w[1] <= w[0], "{name}: {} then {}", w[0], w[1]);
        }
    }
}

#[test]
fn round_trip_within_norm() {
    for (name, pim) in finite_exact() {
        let norms = closed_norm(&pim, 6);
        for k in 1..200 {
            let x = q(k, 211);
            let w = representation::encode(&pim, &x, norms.len()).unwrap();
            if w.is_empty() {
                continue;
            }
            let mid = representation::decode(&pim, &w.digits).unwrap().midpoint();
            assert!((&mid - &x).abs() <= norms[w.len() - 1], "{name}: {x}");
        }
    }
}

#[test]
fn seeds_converge_to_the_same_limit() {
    // the all-ones Gauss word and a β-expansion of 1/3
    let gauss = Pim::build(PimSpec::gauss(q(1, 1))).unwrap();
    let beta = Pim::build(PimSpec::beta(q(2, 1))).unwrap();
    for (pim, digits) in [(&gauss, vec![1; 24]), (&beta, [0, 1].repeat(12))] {
        let mut prev = None;
        for n in 2..=digits.len() {
            let a = representation::f_expand(pim, &digits[..n], Seed::Zero).unwrap().value;
            let b = representation::f_expand(pim, &digits[..n], Seed::One).unwrap().value;
            let gap = (&a - &b).abs();
            if let Some(p) = prev {
                assert!(gap <= p);
            }
            prev = Some(gap);
        }
        assert!(prev.unwrap().to_f64() < 1e-6);
    }
}
