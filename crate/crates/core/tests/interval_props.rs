mod common;

use common::{finite_exact, inside, q, unit_rational};
use fexlab::{epsilon_dense, EndKind, Interval, Scalar};
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = EndKind> {
    prop_oneof![Just(EndKind::Closed), Just(EndKind::Open)]
}

fn interval() -> impl Strategy<Value = Interval> {
    (0i64..=24, 0i64..=24, kind(), kind()).prop_map(|(a, b, lk, hk)| {
        let (lo, hi) = (a.min(b), a.max(b));
        if lo == hi {
            Interval::point(q(lo, 24))
        } else {
            Interval::new(q(lo, 24), q(hi, 24), lk, hk).unwrap()
        }
    })
}

fn meet(a: Option<Interval>, b: Option<Interval>) -> Option<Interval> {
    a.zip(b).and_then(|(a, b)| a.intersect(&b).unwrap())
}

proptest! {
    #[test]
    fn intersect_commutes(i in interval(), j in interval()) {
        prop_assert_eq!(i.intersect(&j).unwrap(), j.intersect(&i).unwrap());
    }

    #[test]
    fn intersect_associates(i in interval(), j in interval(), k in interval()) {
        let left = meet(meet(Some(i.clone()), Some(j.clone())), Some(k.clone()));
        let right = meet(Some(i), meet(Some(j), Some(k)));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn intersection_membership_is_conjunction(i in interval(), j in interval(), n in 0i64..=48) {
        let x = q(n, 48);
        let both = i.contains(&x) && j.contains(&x);
        let inter = i.intersect(&j).unwrap();
        prop_assert_eq!(inter.is_some_and(|m| m.contains(&x)), both);
    }

    #[test]
    fn locate_agrees_with_cell_membership(x in unit_rational()) {
        for (name, pim) in finite_exact() {
            let part = pim.partition(0);
            let found = pim.locate(&x);
            for (d, cell) in part.cells() {
                prop_assert_eq!(cell.contains(&x), found == Some(*d), "{} at {}", name, x);
            }
        }
    }

    #[test]
    fn density_survives_added_points(pts in prop::collection::vec(unit_rational(), 0..40), extra in prop::collection::vec(unit_rational(), 0..10), m in 1i64..12) {
        let eps = q(1, m);
        let before = epsilon_dense(&pts, &eps).unwrap();
        let mut more = pts.clone();
        more.extend(extra);
        prop_assert!(!before || epsilon_dense(&more, &eps).unwrap());
    }

    #[test]
    fn density_is_antitone_on_nested_grids(pts in prop::collection::vec(unit_rational(), 1..60), m in 1i64..16, k in 2i64..4) {
        // the 1/(km) grid refines the 1/m grid, so dense on it implies dense on the coarser one
        let fine = epsilon_dense(&pts, &q(1, k * m)).unwrap();
        let coarse = epsilon_dense(&pts, &q(1, m)).unwrap();
        prop_assert!(!fine || coarse);
    }

    #[test]
    fn sampled_points_stay_inside(i in interval(), t in 1u32..1000) {
        prop_assume!(i.is_nontrivial());
        prop_assert!(i.interior_contains(&inside(&i, t)));
    }
}

#[test]
fn float_density_matches_exact_on_dyadic_points() {
    let pts: Vec<Scalar> = (0..16).map(|k| q(k, 16)).collect();
    let floats: Vec<Scalar> = pts.iter().map(|p| Scalar::float(p.to_f64())).collect();
    for m in 1..=20 {
        assert_eq!(
            epsilon_dense(&pts, &q(1, m)).unwrap(),
            epsilon_dense(&floats, &Scalar::float(1.0 / m as f64)).unwrap(),
            "m={m}"
        );
    }
}
