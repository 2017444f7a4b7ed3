//! Orbit density diagnostics for forward and backward orbits, and the
//! homterval classification of intervals.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{grid_cells, grid_index, Interval};
use crate::pim::{Digit, Pim};
use crate::scalar::Scalar;

/// Gap witnesses kept in a [`DensityReport`].
pub const MAX_WITNESS_GAPS: usize = 32;

/// A forward orbit `x, F(x), F²(x), …`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub points: Vec<Scalar>,
    /// `digits[k]` is the cell of `points[k]`; one shorter than `points`
    /// when the last point left the domain.
    pub digits: Vec<Digit>,
    /// The last point is outside the domain.
    pub terminated: bool,
}

impl Orbit {
    /// CSV with columns `step,value,digit`; the digit is blank off the domain.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,value,digit\n");
        for (k, p) in self.points.iter().enumerate() {
            let d = self.digits.get(k).map(|d| d.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{k},{p},{d}");
        }
        out
    }
}

/// `[x, F(x), …]` for `n` steps, stopping after the first point outside the
/// domain.
pub fn forward_orbit(pim: &Pim, x: &Scalar, n: usize) -> Result<Orbit> {
    pim.check(x)?;
    let mut points = vec![x.clone()];
    let mut digits = Vec::new();
    let mut y = x.clone();
    for _ in 0..n {
        match pim.step(&y) {
            Some((d, next)) => {
                digits.push(d);
                points.push(next.clone());
                y = next;
            }
            None => return Ok(Orbit { points, digits, terminated: true }),
        }
    }
    let terminated = pim.locate(&y).is_none();
    Ok(Orbit { points, digits, terminated })
}

/// Grid coverage of a point set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub eps: Scalar,
    pub covered_cells: usize,
    pub total_cells: usize,
    pub dense: bool,
    /// Indices `k` of empty cells `[kε, (k+1)ε)`, at most [`MAX_WITNESS_GAPS`].
    pub witness_gaps: Vec<usize>,
    pub points: usize,
    /// Step at which a forward orbit left the domain, if it did.
    pub terminated_at: Option<usize>,
}

impl DensityReport {
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Scalar>, eps: &Scalar) -> Result<Self> {
        let cells = grid_cells(eps)?;
        let mut hit = vec![false; cells];
        let mut count = 0;
        for p in points {
            count += 1;
            if let Some(k) = grid_index(p, eps, cells)? {
                hit[k] = true;
            }
        }
        let covered = hit.iter().filter(|h| **h).count();
        let witness_gaps = hit.iter().enumerate().filter(|(_, h)| !**h).map(|(k, _)| k).take(MAX_WITNESS_GAPS).collect();
        Ok(DensityReport {
            eps: eps.clone(),
            covered_cells: covered,
            total_cells: cells,
            dense: covered == cells,
            witness_gaps,
            points: count,
            terminated_at: None,
        })
    }
}

/// ε-density of the forward orbit of `x` over `n` steps.
pub fn tt_estimate(pim: &Pim, x: &Scalar, n: usize, eps: &Scalar) -> Result<DensityReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    pim.check(eps)?;
    let orbit = forward_orbit(pim, x, n)?;
    let mut report = DensityReport::from_points(&orbit.points, eps)?;
    if orbit.terminated {
        report.terminated_at = Some(orbit.points.len() - 1);
    }
    Ok(report)
}

/// A point of a [`PreimageTree`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub value: Scalar,
    /// Branch through which the node maps to its parent.
    pub digit: Digit,
    /// Index of the parent in the previous level.
    pub parent: usize,
}

/// Levels of the backward orbit: level `k` holds points of `F^{−k}(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreimageTree {
    pub root: Scalar,
    /// Level 0 is the root alone. Each level is sorted and duplicate free.
    pub levels: Vec<Vec<TreeNode>>,
    pub depth: usize,
    pub digit_cap: Digit,
    pub node_budget: usize,
    /// Some preimage was skipped because of `digit_cap`.
    pub digit_truncated: bool,
    /// Expansion stopped at `node_budget`.
    pub budget_exhausted: bool,
}

impl PreimageTree {
    pub fn truncated(&self) -> bool {
        self.digit_truncated || self.budget_exhausted
    }

    pub fn node_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn values(&self) -> impl Iterator<Item = &Scalar> {
        self.levels.iter().flatten().map(|n| &n.value)
    }

    /// Values of level `k`, sorted.
    pub fn level_values(&self, k: usize) -> Vec<Scalar> {
        self.levels.get(k).map(|l| l.iter().map(|n| n.value.clone()).collect()).unwrap_or_default()
    }

    /// CSV with columns `level,value,digit`; the root has a blank digit.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,value,digit\n");
        for (k, level) in self.levels.iter().enumerate() {
            for n in level {
                if k == 0 {
                    let _ = writeln!(out, "0,{},", n.value);
                } else {
                    let _ = writeln!(out, "{k},{},{}", n.value, n.digit);
                }
            }
        }
        out
    }
}

/// Expands `F⁻¹` level by level from `x`.
///
/// Levels are sorted by value and deduplicated (exactly on the rational
/// backend, within `EPS_NUM` on the float backend), so the tree does not
/// depend on expansion order.
pub fn backward_tree(pim: &Pim, x: &Scalar, depth: usize, digit_cap: Digit, node_budget: usize) -> Result<PreimageTree> {
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    pim.check(x)?;
    let mut levels = vec![vec![TreeNode { value: x.clone(), digit: 0, parent: 0 }]];
    let mut digit_truncated = false;
    let mut budget_exhausted = false;
    let mut total = 1usize;
    for _ in 0..depth {
        let prev = levels.last().expect("root level");
        let mut next = Vec::new();
        for (i, node) in prev.iter().enumerate() {
            let pre = pim.preimages(&node.value, digit_cap)?;
            digit_truncated |= pre.truncated;
            next.extend(pre.points.into_iter().map(|(d, v)| TreeNode { value: v, digit: d, parent: i }));
        }
        next.sort_by(|a, b| a.value.cmp_same(&b.value).then(a.parent.cmp(&b.parent)));
        next.dedup_by(|a, b| a.value == b.value);
        if total + next.len() > node_budget {
            next.truncate(node_budget - total);
            budget_exhausted = true;
        }
        total += next.len();
        levels.push(next);
        if budget_exhausted {
            break;
        }
    }
    Ok(PreimageTree { root: x.clone(), levels, depth, digit_cap, node_budget, digit_truncated, budget_exhausted })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PttReport {
    /// Coverage of all tree levels together.
    pub density: DensityReport,
    /// Greedy backward chain `x₁ = x, F(x_{k+1}) = x_k`.
    pub chain: Vec<Scalar>,
    /// Coverage of the chain alone.
    pub chain_density: DensityReport,
    pub nodes: usize,
    pub digit_truncated: bool,
    pub budget_exhausted: bool,
}

/// ε-density of the backward orbit of `x`, plus a greedy search for a single
/// ε-dense backward chain.
pub fn ptt_estimate(
    pim: &Pim,
    x: &Scalar,
    depth: usize,
    digit_cap: Digit,
    node_budget: usize,
    eps: &Scalar,
) -> Result<PttReport> {
    pim.check(eps)?;
    let tree = backward_tree(pim, x, depth, digit_cap, node_budget)?;
    let density = DensityReport::from_points(tree.values(), eps)?;
    let chain = greedy_chain(&tree, eps)?;
    let chain_density = DensityReport::from_points(&chain, eps)?;
    Ok(PttReport {
        density,
        chain,
        chain_density,
        nodes: tree.node_count(),
        digit_truncated: tree.digit_truncated,
        budget_exhausted: tree.budget_exhausted,
    })
}

/// Walks down the tree, at each level taking the child that lands in a new
/// grid cell, smallest value first; when none does, the smallest child
/// that still has children of its own.
fn greedy_chain(tree: &PreimageTree, eps: &Scalar) -> Result<Vec<Scalar>> {
    let cells = grid_cells(eps)?;
    let mut hit = vec![false; cells];
    let mut chain = vec![tree.root.clone()];
    if let Some(k) = grid_index(&tree.root, eps, cells)? {
        hit[k] = true;
    }
    let mut current = 0usize;
    for k in 1..tree.levels.len() {
        let children: Vec<usize> = tree.levels[k].iter().enumerate().filter(|(_, n)| n.parent == current).map(|(i, _)| i).collect();
        if children.is_empty() {
            break;
        }
        let has_children = |i: usize| tree.levels.get(k + 1).is_some_and(|l| l.iter().any(|n| n.parent == i));
        let mut fresh = None;
        for &i in &children {
            if let Some(g) = grid_index(&tree.levels[k][i].value, eps, cells)? {
                if !hit[g] {
                    fresh = Some(i);
                    break;
                }
            }
        }
        let pick = fresh.or_else(|| children.iter().copied().find(|&i| has_children(i))).unwrap_or(children[0]);
        let v = &tree.levels[k][pick].value;
        if let Some(g) = grid_index(v, eps, cells)? {
            hit[g] = true;
        }
        chain.push(v.clone());
        current = pick;
    }
    Ok(chain)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Classification {
    /// `F^k(J)` meets two cells, or leaves the domain, in its interior.
    NotHomterval { k: usize },
    /// No two of the first `n` images overlap.
    WanderingUpTo { n: usize },
    /// `F^p(U) ⊆ U` holds exactly for the hull `U` of the images.
    AbsorbingPeriod { p: usize },
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomtervalVerdict {
    pub interval: Interval,
    pub classification: Classification,
    /// `J, F(J), F²(J), …` as far as they were computed.
    pub iterates: Vec<Interval>,
    /// The checked absorbing candidate, when an overlap was found.
    pub absorbing_candidate: Option<Interval>,
}

enum Step {
    Image(Interval),
    Split,
    Unknown,
}

fn step_interval(pim: &Pim, j: &Interval, digit_cap: Digit) -> Result<Step> {
    let (meeting, truncated) = pim.branches_meeting(j, digit_cap);
    let inner: Vec<_> = meeting.iter().filter(|b| b.domain().overlaps_interior(j)).collect();
    match inner.as_slice() {
        [b] if b.domain().closure().contains_interval(j) => {
            let piece = b.domain().intersect(j)?.expect("overlapping interiors intersect");
            Ok(Step::Image(b.map_interval(&piece)))
        }
        [] | [_] if truncated => Ok(Step::Unknown),
        _ => Ok(Step::Split),
    }
}

/// Classifies `J` by iterating its images.
///
/// Each image must sit inside one cell; otherwise the verdict is
/// `NotHomterval(k)`. Then the earliest overlap `F^n(J) ∩ F^{n+p}(J)` with
/// `n ≤ max_n`, `p ≤ max_p` is sought. Without one, `J` is wandering up to
/// `max_n`. With one, the hull `U` of `F^{n+ℓp}(J)` is tested for
/// `F^p(U) ⊆ U`.
pub fn classify_homterval(
    pim: &Pim,
    j: &Interval,
    max_p: usize,
    max_n: usize,
    digit_cap: Digit,
) -> Result<HomtervalVerdict> {
    if !j.is_nontrivial() {
        return Err(Error::InvalidInterval("J must have positive length".into()));
    }
    if max_p == 0 {
        return Err(Error::InvalidArgument("max_p must be at least 1".into()));
    }
    pim.check(j.lo())?;
    let mut iterates = vec![j.clone()];
    let verdict = |iterates: Vec<Interval>, classification, absorbing_candidate| HomtervalVerdict {
        interval: j.clone(),
        classification,
        iterates,
        absorbing_candidate,
    };
    for k in 0..max_n + max_p {
        match step_interval(pim, &iterates[k], digit_cap)? {
            Step::Image(next) => iterates.push(next),
            Step::Split => return Ok(verdict(iterates, Classification::NotHomterval { k }, None)),
            Step::Unknown => return Ok(verdict(iterates, Classification::Undetermined, None)),
        }
    }
    let overlap = (0..=max_n)
        .flat_map(|n| (1..=max_p).map(move |p| (n, p)))
        .find(|&(n, p)| iterates[n].overlaps_interior(&iterates[n + p]));
    let Some((n, p)) = overlap else {
        return Ok(verdict(iterates, Classification::WanderingUpTo { n: max_n }, None));
    };
    let hull = iterates[n..].iter().step_by(p).skip(1).fold(iterates[n].clone(), |u, i| u.hull(i));
    let mut image = vec![hull.clone()];
    for _ in 0..p {
        image = pim.image_of_set(&image, digit_cap)?.intervals;
    }
    let absorbed = image.iter().all(|i| hull.contains_interval(i));
    let class = if absorbed { Classification::AbsorbingPeriod { p } } else { Classification::Undetermined };
    Ok(verdict(iterates, class, Some(hull)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pim::PimSpec;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    fn first() -> Pim {
        Pim::build(PimSpec::ExampleFirst).unwrap()
    }

    #[test]
    fn forward_orbit_examples() {
        let e = Pim::build(PimSpec::egyptian()).unwrap();
        let o = forward_orbit(&e, &q(2, 3), 10).unwrap();
        assert_eq!(o.points, vec![q(2, 3), q(1, 6), q(0, 1)]);
        assert!(o.terminated);
        let b = Pim::build(PimSpec::beta(q(2, 1))).unwrap();
        let o = forward_orbit(&b, &q(1, 3), 4).unwrap();
        assert_eq!(o.points, vec![q(1, 3), q(2, 3), q(1, 3), q(2, 3), q(1, 3)]);
        assert_eq!(forward_orbit(&b, &q(1, 3), 0).unwrap().points, vec![q(1, 3)]);
        assert_eq!(o.to_csv().lines().nth(1), Some("0,1/3,0"));
    }

    #[test]
    fn tt_estimate_examples() {
        let e = Pim::build(PimSpec::egyptian()).unwrap();
        let r = tt_estimate(&e, &q(5, 7), 1000, &q(1, 10)).unwrap();
        assert!(!r.dense);
        assert!(r.terminated_at.is_some());
        let r = tt_estimate(&first(), &q(1, 8), 1000, &q(1, 10)).unwrap();
        assert!(!r.dense);
    }

    #[test]
    fn backward_tree_examples() {
        let t = backward_tree(&first(), &q(1, 2), 1, 0, 1000).unwrap();
        assert_eq!(t.level_values(1), vec![q(0, 1), q(1, 2), q(1, 1)]);
        let b = Pim::build(PimSpec::beta(q(2, 1))).unwrap();
        let t = backward_tree(&b, &q(0, 1), 3, 0, 1000).unwrap();
        assert_eq!(t.level_values(1), vec![q(0, 1), q(1, 2)]);
        assert_eq!(t.level_values(2), vec![q(0, 1), q(1, 4), q(1, 2), q(3, 4)]);
        assert_eq!(t.level_values(3), (0..8).map(|k| q(k, 8)).collect::<Vec<_>>());
        let e = Pim::build(PimSpec::egyptian()).unwrap();
        let t = backward_tree(&e, &q(0, 1), 2, 6, 10_000).unwrap();
        let l1 = t.level_values(1);
        for d in 2..=6 {
            assert!(l1.contains(&q(1, d)));
        }
        assert!(t.digit_truncated);
    }

    #[test]
    fn tree_nodes_map_to_parents() {
        let f = first();
        let t = backward_tree(&f, &q(1, 2), 6, 0, 100_000).unwrap();
        for k in 1..t.levels.len() {
            for n in &t.levels[k] {
                let parent = &t.levels[k - 1][n.parent].value;
                assert_eq!(f.apply(&n.value).unwrap().as_ref(), Some(parent));
            }
        }
    }

    #[test]
    fn backward_tree_budget() {
        let b = Pim::build(PimSpec::beta(q(2, 1))).unwrap();
        let t = backward_tree(&b, &q(0, 1), 10, 0, 20).unwrap();
        assert!(t.budget_exhausted);
        assert_eq!(t.node_count(), 20);
    }

    #[test]
    fn ptt_examples() {
        let b = Pim::build(PimSpec::beta(q(2, 1))).unwrap();
        assert!(ptt_estimate(&b, &q(0, 1), 10, 0, 100_000, &q(1, 100)).unwrap().density.dense);
        let f = first();
        assert!(ptt_estimate(&f, &q(1, 2), 12, 0, 1_000_000, &q(1, 100)).unwrap().density.dense);
        assert!(!ptt_estimate(&f, &q(1, 3), 12, 0, 1_000_000, &q(1, 4)).unwrap().density.dense);
    }

    #[test]
    fn greedy_chain_is_a_backward_chain() {
        let f = first();
        let r = ptt_estimate(&f, &q(1, 2), 8, 0, 100_000, &q(1, 10)).unwrap();
        for w in r.chain.windows(2) {
            assert_eq!(f.apply(&w[1]).unwrap().as_ref(), Some(&w[0]));
        }
    }

    #[test]
    fn homterval_beta2_splits() {
        let b = Pim::build(PimSpec::beta(q(2, 1))).unwrap();
        let v = classify_homterval(&b, &Interval::open(q(1, 10), q(2, 10)).unwrap(), 5, 10, 0).unwrap();
        // (0.1,0.2) → (0.2,0.4) → (0.4,0.8), which straddles 1/2
        assert_eq!(v.classification, Classification::NotHomterval { k: 2 });
    }

    #[test]
    fn homterval_identity_like_absorbing() {
        // an exchange of two halves maps (1/8, 3/8) to (5/8, 7/8) and back
        let m = Pim::build(PimSpec::IntervalExchange {
            lengths: vec![q(1, 2), q(1, 2)],
            translations: vec![q(1, 2), q(-1, 2)],
        })
        .unwrap();
        let v = classify_homterval(&m, &Interval::open(q(1, 8), q(3, 8)).unwrap(), 4, 10, 0).unwrap();
        assert_eq!(v.classification, Classification::AbsorbingPeriod { p: 2 });
    }

    #[test]
    fn homterval_wandering_up_to() {
        let m = Pim::build(PimSpec::IntervalExchange {
            lengths: vec![q(1, 2), q(1, 2)],
            translations: vec![q(1, 2), q(-1, 2)],
        })
        .unwrap();
        let v = classify_homterval(&m, &Interval::open(q(1, 8), q(3, 8)).unwrap(), 1, 10, 0).unwrap();
        assert_eq!(v.classification, Classification::WanderingUpTo { n: 10 });
    }

    #[test]
    fn homterval_rotation_matches_exact_rotation() {
        let alpha = 2f64.sqrt() - 1.0;
        let r = Pim::build(PimSpec::rotation(Scalar::float(alpha))).unwrap();
        let j = Interval::open(Scalar::float(0.1), Scalar::float(0.2)).unwrap();
        let v = classify_homterval(&r, &j, 10, 50, 0).unwrap();
        // oracle: the first k at which (0.1 + k(1−α), 0.2 + k(1−α)) mod 1
        // contains α or wraps past 1
        let k = (0..60)
            .find(|&k| {
                let lo = (0.1 + k as f64 * (1.0 - alpha)).rem_euclid(1.0);
                let hi = lo + 0.1;
                (lo < alpha && alpha < hi) || hi > 1.0
            })
            .unwrap();
        assert_eq!(v.classification, Classification::NotHomterval { k });
    }

    #[test]
    fn density_report_json() {
        let r = DensityReport::from_points(&[q(1, 4), q(3, 4)], &q(1, 2)).unwrap();
        assert!(r.dense);
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<DensityReport>(&s).unwrap(), r);
    }
}
