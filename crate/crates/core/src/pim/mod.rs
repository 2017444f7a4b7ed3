//! Piecewise interval maps: a partition of `[0, 1)` into cells and a strictly
//! monotone branch on each cell.
//!
//! Finite families store their branches up front. Countable families
//! (Gauss, Egyptian, Cantor, classic Lüroth) produce branches on demand from
//! the digit formula and memoize them; anything that has to touch "all
//! branches" of such a map takes a `digit_cap` and reports truncation.

mod branch;
mod families;
mod spec;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

pub use branch::{Branch, BranchLaw, Monotonicity};
pub use families::{cantor_dyadic, QUADRATIC_R_MIN};
pub use spec::{EgyptianSequence, MapSpec, PimSpec};

use crate::error::{Error, Result};
use crate::interval::{merge_intervals, Interval, IntervalPartition};
use crate::scalar::{Backend, Scalar};
use families::{Built, LazyRule};

/// A digit: the index of a partition cell.
pub type Digit = i64;

/// Which branch directions occur in a map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapKind {
    TypeA,
    TypeB,
    Mixed,
}

enum Family {
    Finite(Vec<Arc<Branch>>),
    Lazy { rule: LazyRule, cache: RwLock<HashMap<Digit, Arc<Branch>>> },
}

/// Digits of a map up to a cap, with a flag for omitted digits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitList {
    pub digits: Vec<Digit>,
    pub truncated: bool,
}

/// The fiber `F⁻¹(y)`, sorted by point.
#[derive(Clone, Debug, PartialEq)]
pub struct Preimages {
    pub points: Vec<(Digit, Scalar)>,
    pub truncated: bool,
}

/// `F(I ∩ D)` as disjoint sorted intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageSet {
    pub intervals: Vec<Interval>,
    pub truncated: bool,
}

impl ImageSet {
    pub fn contains(&self, y: &Scalar) -> bool {
        self.intervals.iter().any(|i| i.contains(y))
    }

    pub fn overlaps_interior(&self, other: &Interval) -> bool {
        self.intervals.iter().any(|i| i.overlaps_interior(other))
    }
}

pub struct Pim {
    spec: PimSpec,
    backend: Backend,
    family: Family,
    kind: MapKind,
    well_ordered: bool,
    surjective_hint: bool,
}

impl std::fmt::Debug for Pim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pim")
            .field("spec", &self.spec)
            .field("backend", &self.backend)
            .field("kind", &self.kind)
            .finish()
    }
}

impl Pim {
    /// Builds on the spec's default backend.
    pub fn build(spec: PimSpec) -> Result<Pim> {
        let backend = spec.default_backend();
        Self::build_on(spec, backend)
    }

    pub fn from_map_spec(m: &MapSpec) -> Result<Pim> {
        Self::build_on(m.spec.clone(), m.backend)
    }

    pub fn build_on(spec: PimSpec, backend: Backend) -> Result<Pim> {
        let spec = spec.on_backend(backend)?;
        match families::build(&spec, backend)? {
            Built::Finite(branches) => {
                let mut branches: Vec<Arc<Branch>> = branches.into_iter().map(Arc::new).collect();
                branches.sort_by_key(|b| b.digit());
                // cell structure is validated by the partition constructor
                IntervalPartition::new(
                    branches.iter().map(|b| (b.digit(), b.domain().clone())).collect(),
                )?;
                let kind = kind_of(branches.iter().map(|b| b.monotonicity()));
                let well_ordered = monotone_in_digit(&branches);
                let images = merge_intervals(branches.iter().map(|b| b.image().clone()).collect());
                let surjective_hint = images.iter().any(|i| i.contains_interval(&Interval::unit(backend)));
                Ok(Pim {
                    spec,
                    backend,
                    family: Family::Finite(branches),
                    kind,
                    well_ordered,
                    surjective_hint,
                })
            }
            Built::Lazy(rule) => {
                let (kind, well_ordered, surjective_hint) = match &rule {
                    LazyRule::Gauss { .. } => (MapKind::TypeB, true, true),
                    LazyRule::Egyptian { .. } => (MapKind::TypeA, true, false),
                    LazyRule::Cantor { .. } => (MapKind::TypeA, false, true),
                    LazyRule::Luroth { .. } => (MapKind::TypeA, true, true),
                };
                Ok(Pim {
                    spec,
                    backend,
                    family: Family::Lazy { rule, cache: RwLock::new(HashMap::new()) },
                    kind,
                    well_ordered,
                    surjective_hint,
                })
            }
        }
    }

    pub fn spec(&self) -> &PimSpec {
        &self.spec
    }

    pub fn map_spec(&self) -> MapSpec {
        MapSpec { spec: self.spec.clone(), backend: self.backend }
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    /// Cells are ordered monotonically in the digit, increasing or decreasing.
    pub fn well_ordered(&self) -> bool {
        self.well_ordered
    }

    /// The branch images cover `[0, 1)`. Stored, never enforced.
    pub fn surjective_hint(&self) -> bool {
        self.surjective_hint
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.family, Family::Finite(_))
    }

    pub fn scalar(&self, num: i64, den: i64) -> Scalar {
        self.backend.ratio(num, den)
    }

    pub fn parse_scalar(&self, s: &str) -> Result<Scalar> {
        self.backend.parse(s)
    }

    pub(crate) fn check(&self, x: &Scalar) -> Result<()> {
        if x.backend() == self.backend {
            Ok(())
        } else {
            Err(Error::MixedBackend)
        }
    }

    pub fn branch(&self, d: Digit) -> Option<Arc<Branch>> {
        match &self.family {
            Family::Finite(bs) => bs.binary_search_by_key(&d, |b| b.digit()).ok().map(|i| bs[i].clone()),
            Family::Lazy { rule, cache } => {
                if let Some(b) = cache.read().expect("branch cache poisoned").get(&d) {
                    return Some(b.clone());
                }
                let b = Arc::new(rule.branch(d)?);
                let mut w = cache.write().expect("branch cache poisoned");
                Some(w.entry(d).or_insert(b).clone())
            }
        }
    }

    pub fn branch_or_err(&self, d: Digit) -> Result<Arc<Branch>> {
        self.branch(d).ok_or(Error::UnknownDigit(d))
    }

    /// All digits of a finite map, or those `<= cap` of a countable one.
    pub fn digits(&self, cap: Digit) -> DigitList {
        match &self.family {
            Family::Finite(bs) => DigitList { digits: bs.iter().map(|b| b.digit()).collect(), truncated: false },
            Family::Lazy { rule, .. } => DigitList { digits: rule.digits_upto(cap), truncated: true },
        }
    }

    pub fn branches(&self, cap: Digit) -> (Vec<Arc<Branch>>, bool) {
        match &self.family {
            Family::Finite(bs) => (bs.clone(), false),
            Family::Lazy { rule, .. } => (
                rule.digits_upto(cap).into_iter().filter_map(|d| self.branch(d)).collect(),
                true,
            ),
        }
    }

    /// Branches whose cell meets `interval`; the flag is set when cells
    /// beyond the cap could meet it too.
    pub fn branches_meeting(&self, interval: &Interval, cap: Digit) -> (Vec<Arc<Branch>>, bool) {
        let (all, _) = self.branches(cap);
        let hits = all
            .into_iter()
            .filter(|b| matches!(b.domain().intersect(interval), Ok(Some(_))))
            .collect();
        let truncated = match &self.family {
            Family::Finite(_) => false,
            Family::Lazy { rule, .. } => {
                rule.tail_hull(cap).is_some_and(|t| t.overlaps_interior(interval) || matches!(t.intersect(interval), Ok(Some(_))))
            }
        };
        (hits, truncated)
    }

    /// Closed hull of the cells with digit `> cap`; `None` for finite maps.
    pub fn tail_hull(&self, cap: Digit) -> Option<Interval> {
        match &self.family {
            Family::Finite(_) => None,
            Family::Lazy { rule, .. } => rule.tail_hull(cap),
        }
    }

    /// The partition `ξ`, restricted to digits `<= cap` for countable maps.
    pub fn partition(&self, cap: Digit) -> IntervalPartition {
        let (bs, truncated) = self.branches(cap);
        IntervalPartition::with_truncation(
            bs.iter().map(|b| (b.digit(), b.domain().clone())).collect(),
            truncated,
        )
        .expect("branch cells form a partition")
    }

    /// `ξ(x)`: the digit of the cell containing `x`, or `None` off `D`.
    pub fn locate(&self, x: &Scalar) -> Option<Digit> {
        if x.backend() != self.backend {
            return None;
        }
        match &self.family {
            Family::Finite(bs) => bs.iter().find(|b| b.domain().contains(x)).map(|b| b.digit()),
            Family::Lazy { rule, .. } => {
                let d = rule.locate(x)?;
                // guards the float backend against boundary misplacement
                let b = self.branch(d)?;
                if b.domain().contains(x) {
                    Some(d)
                } else {
                    [d - 1, d + 1].into_iter().find(|e| self.branch(*e).is_some_and(|b| b.domain().contains(x)))
                }
            }
        }
    }

    /// One step: the digit of `x` and `F(x)`.
    pub fn step(&self, x: &Scalar) -> Option<(Digit, Scalar)> {
        let d = self.locate(x)?;
        let b = self.branch(d)?;
        Some((d, b.forward(x)))
    }

    /// `F(x)`, or `None` when `x` is not in `D`.
    pub fn apply(&self, x: &Scalar) -> Result<Option<Scalar>> {
        self.check(x)?;
        Ok(self.step(x).map(|(_, y)| y))
    }

    /// `f_d(y)`: the continuous monotone extension of `(F|Δ(d))⁻¹` to `[0, 1]`.
    pub fn inverse_branch(&self, d: Digit, y: &Scalar) -> Result<Scalar> {
        self.check(y)?;
        Ok(self.branch_or_err(d)?.f_d(y))
    }

    /// `F⁻¹(y)`: one point per branch whose image contains `y`.
    pub fn preimages(&self, y: &Scalar, digit_cap: Digit) -> Result<Preimages> {
        self.check(y)?;
        let (bs, _) = self.branches(digit_cap);
        let mut points: Vec<(Digit, Scalar)> = bs
            .iter()
            .filter(|b| b.image().contains(y))
            .filter_map(|b| {
                let x = b.inverse(y);
                b.domain().contains(&x).then_some((b.digit(), x))
            })
            .collect();
        points.sort_by(|a, b| a.1.cmp_same(&b.1));
        let truncated = match &self.family {
            Family::Finite(_) => false,
            Family::Lazy { rule, .. } => y < &rule.tail_image_sup(digit_cap),
        };
        Ok(Preimages { points, truncated })
    }

    /// `F(I ∩ D)`, computed branch by branch and merged.
    pub fn image_of_interval(&self, interval: &Interval, digit_cap: Digit) -> Result<ImageSet> {
        self.check(interval.lo())?;
        let (bs, truncated) = self.branches_meeting(interval, digit_cap);
        let pieces = bs
            .iter()
            .filter_map(|b| {
                let piece = b.domain().intersect(interval).ok()??;
                Some(b.map_interval(&piece))
            })
            .collect();
        Ok(ImageSet { intervals: merge_intervals(pieces), truncated })
    }

    /// Image of a finite union of intervals.
    pub fn image_of_set(&self, set: &[Interval], digit_cap: Digit) -> Result<ImageSet> {
        let mut pieces = Vec::new();
        let mut truncated = false;
        for i in set {
            let img = self.image_of_interval(i, digit_cap)?;
            truncated |= img.truncated;
            pieces.extend(img.intervals);
        }
        Ok(ImageSet { intervals: merge_intervals(pieces), truncated })
    }

    /// Spatial order of cells: `Less` when `Δ(d)` lies left of `Δ(e)`.
    pub fn cell_cmp(&self, d: Digit, e: Digit) -> Ordering {
        if d == e {
            return Ordering::Equal;
        }
        match (self.branch(d), self.branch(e)) {
            (Some(a), Some(b)) => a.domain().lo().cmp_same(b.domain().lo()),
            _ => d.cmp(&e),
        }
    }

    /// Smallest digit.
    pub fn first_digit(&self) -> Digit {
        match &self.family {
            Family::Finite(bs) => bs[0].digit(),
            Family::Lazy { rule, .. } => rule.first_digit(),
        }
    }

    /// Largest digit of a finite map.
    pub fn last_digit(&self) -> Option<Digit> {
        match &self.family {
            Family::Finite(bs) => bs.last().map(|b| b.digit()),
            Family::Lazy { .. } => None,
        }
    }
}

fn kind_of(monos: impl Iterator<Item = Monotonicity>) -> MapKind {
    let (mut inc, mut dec) = (false, false);
    for m in monos {
        match m {
            Monotonicity::Increasing => inc = true,
            Monotonicity::Decreasing => dec = true,
        }
    }
    match (inc, dec) {
        (true, false) => MapKind::TypeA,
        (false, true) => MapKind::TypeB,
        _ => MapKind::Mixed,
    }
}

fn monotone_in_digit(sorted_by_digit: &[Arc<Branch>]) -> bool {
    let orders: Vec<Ordering> = sorted_by_digit
        .windows(2)
        .map(|w| w[0].domain().lo().cmp_same(w[1].domain().lo()))
        .collect();
    orders.iter().all(|o| *o == Ordering::Less) || orders.iter().all(|o| *o == Ordering::Greater)
}
