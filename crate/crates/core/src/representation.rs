//! Digit names of points, cylinders, and reconstruction from digits.

use std::cmp::Ordering;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::pim::{Branch, Digit, Monotonicity, Pim};
use crate::scalar::{Backend, Scalar};
use crate::word::Word;

/// Node budget used when the caller does not supply one.
pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

/// Frontier size at which cylinder enumeration switches from breadth-first
/// to depth-first subtrees.
const FRONTIER_TARGET: usize = 4096;
/// Subtrees expanded per parallel batch. Fixed so results do not depend on
/// the thread count.
const SUBTREE_BATCH: usize = 64;

/// The first `n` digits of `x`: `d_k = ξ(F^{k−1} x)`.
///
/// Stops with [`crate::WordStatus::Terminated`] when an iterate leaves the
/// domain.
pub fn encode(pim: &Pim, x: &Scalar, n: usize) -> Result<Word> {
    pim.check(x)?;
    let zero = pim.backend().zero();
    let one = pim.backend().one();
    if x < &zero || x >= &one {
        return Err(Error::OutOfDomain(format!("{x} is not in [0, 1)")));
    }
    let mut digits = Vec::with_capacity(n);
    let mut y = x.clone();
    for k in 1..=n {
        match pim.step(&y) {
            Some((d, next)) => {
                digits.push(d);
                y = next;
            }
            None => return Ok(Word::terminated(digits, k)),
        }
    }
    Ok(Word::new(digits))
}

/// A nonempty cylinder `Δ(d₁…dₙ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FundamentalInterval {
    pub word: Vec<Digit>,
    /// Closed hull `[aₙ, bₙ]`.
    pub hull: Interval,
    pub order: usize,
}

impl FundamentalInterval {
    /// The open core `(aₙ, bₙ)`.
    pub fn core(&self) -> Interval {
        self.hull.interior().expect("cylinders have positive length")
    }
}

/// `f_{d₁}(f_{d₂}(…f_{dₙ}(y)…))`.
fn compose_inverses(pim: &Pim, word: &[Digit], y: &Scalar) -> Result<Scalar> {
    let mut v = y.clone();
    for &d in word.iter().rev() {
        v = pim.branch_or_err(d)?.f_d(&v);
    }
    Ok(v)
}

/// `Δ(w)` as `f_{d₁}∘…∘f_{dₙ}([0, 1])`; `None` when that is a point.
pub fn cylinder(pim: &Pim, word: &[Digit]) -> Result<Option<FundamentalInterval>> {
    if word.is_empty() {
        return Err(Error::EmptyWord);
    }
    let a = compose_inverses(pim, word, &pim.backend().zero())?;
    let b = compose_inverses(pim, word, &pim.backend().one())?;
    let (lo, hi) = match a.cmp_same(&b) {
        Ordering::Less => (a, b),
        Ordering::Greater => (b, a),
        Ordering::Equal => return Ok(None),
    };
    Ok(Some(FundamentalInterval { word: word.to_vec(), hull: Interval::closed(lo, hi)?, order: word.len() }))
}

/// The closed hull of `Δ(w)`; its midpoint is the reconstructed point and
/// its length the error bound.
pub fn decode(pim: &Pim, word: &[Digit]) -> Result<Interval> {
    cylinder(pim, word)?.map(|c| c.hull).ok_or_else(|| Error::EmptyCylinder(word.to_vec()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Seed {
    Zero,
    One,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FExpansion {
    pub value: Scalar,
    /// False when `Δ(w)` is empty; the value is then a clamped artifact.
    pub admissible: bool,
}

/// Generalized f-expansion `f_{d₁}(f_{d₂}(…f_{dₙ}(seed)…))`.
pub fn f_expand(pim: &Pim, word: &[Digit], seed: Seed) -> Result<FExpansion> {
    let s = match seed {
        Seed::Zero => pim.backend().zero(),
        Seed::One => pim.backend().one(),
    };
    let value = compose_inverses(pim, word, &s)?;
    let admissible = word.is_empty() || cylinder(pim, word)?.is_some();
    Ok(FExpansion { value, admissible })
}

/// The global `f: ℝ → [0, 1]` of a well-ordered map: `f_d(t − d)` on
/// `[d, d+1)`. Left of every digit it takes `f_{min}(0)`; on a stretch with
/// no digit it holds the value `f_e(1)` of the nearest digit `e` below.
fn classical_f(pim: &Pim, t: &Scalar) -> Result<Scalar> {
    let zero = pim.backend().zero();
    let one = pim.backend().one();
    let first = pim.first_digit();
    let e = t.floor_i64().ok_or_else(|| Error::OutOfDomain(format!("{t} is out of range")))?;
    if e < first {
        return Ok(pim.branch_or_err(first)?.f_d(&zero));
    }
    if let Some(b) = pim.branch(e) {
        return Ok(b.f_d(&(t - &pim.backend().int(e))));
    }
    let below = match pim.last_digit() {
        Some(last) if e > last => last,
        _ => (first..e).rev().find(|d| pim.branch(*d).is_some()).unwrap_or(first),
    };
    Ok(pim.branch_or_err(below)?.f_d(&one))
}

/// Classical f-expansion `f(d₁ + f(d₂ + … f(dₙ)…))`.
pub fn classical_f_expand(pim: &Pim, word: &[Digit]) -> Result<Scalar> {
    if !pim.well_ordered() {
        return Err(Error::NotWellOrdered);
    }
    let Some((&last, rest)) = word.split_last() else {
        return Err(Error::EmptyWord);
    };
    let mut v = classical_f(pim, &pim.backend().int(last))?;
    for &d in rest.iter().rev() {
        v = classical_f(pim, &(&pim.backend().int(d) + &v))?;
    }
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FlipLex {
    Less,
    Equal,
    Greater,
    IncomparablePrefix,
}

/// Flip lexicographic comparison. At the first disagreement the cells are
/// compared spatially, and the verdict flips once per decreasing branch in
/// the shared prefix.
pub fn flip_lex_compare(pim: &Pim, w: &[Digit], v: &[Digit]) -> FlipLex {
    let Some(n) = w.iter().zip(v).position(|(a, b)| a != b) else {
        return if w.len() == v.len() { FlipLex::Equal } else { FlipLex::IncomparablePrefix };
    };
    let flips = w[..n]
        .iter()
        .filter(|d| pim.branch(**d).is_some_and(|b| b.monotonicity() == Monotonicity::Decreasing))
        .count();
    let spatial = pim.cell_cmp(w[n], v[n]);
    let spatial = if flips % 2 == 1 { spatial.reverse() } else { spatial };
    match spatial {
        Ordering::Less => FlipLex::Less,
        _ => FlipLex::Greater,
    }
}

/// Sorts equal-length words into flip lexicographic order.
pub fn sort_flip_lex(pim: &Pim, words: &mut [Word]) {
    words.sort_by(|a, b| match flip_lex_compare(pim, &a.digits, &b.digits) {
        FlipLex::Less => Ordering::Less,
        FlipLex::Greater => Ordering::Greater,
        _ => a.digits.len().cmp(&b.digits.len()),
    });
}

/// One node of the cylinder tree: the word, the closed image
/// `J = F^n(Δ(w))‾`, and when every branch has a Möbius inverse, the
/// composed inverse `f_w` on `J` as a matrix.
#[derive(Clone)]
struct Node {
    word: Vec<Digit>,
    j_lo: Scalar,
    j_hi: Scalar,
    chart: Option<Chart>,
}

/// A Möbius map `y ↦ (ay+b)/(cy+d)`. Exact charts keep integer entries and
/// are never normalized, so composing costs a few big-integer products.
#[derive(Clone, Debug)]
enum Chart {
    Exact([BigInt; 4]),
    Approx([f64; 4]),
}

impl Chart {
    fn identity(backend: Backend) -> Chart {
        match backend {
            Backend::Rational => Chart::Exact([BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one()]),
            Backend::Float => Chart::Approx([1.0, 0.0, 0.0, 1.0]),
        }
    }

    fn from_scalars(m: &[Scalar; 4]) -> Option<Chart> {
        if let Some(qs) = m.iter().map(|x| x.as_rational()).collect::<Option<Vec<_>>>() {
            let den = qs.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            let e = |q: &BigRational| q.numer() * (&den / q.denom());
            return Some(Chart::Exact([e(qs[0]), e(qs[1]), e(qs[2]), e(qs[3])]));
        }
        Some(Chart::Approx([m[0].to_f64(), m[1].to_f64(), m[2].to_f64(), m[3].to_f64()]))
    }

    fn eval(&self, y: &Scalar) -> Scalar {
        match (self, y) {
            (Chart::Exact(m), Scalar::Exact(q)) => {
                let (p, r) = (q.numer(), q.denom());
                let num = &m[0] * p + &m[1] * r;
                let den = &m[2] * p + &m[3] * r;
                Scalar::Exact(BigRational::new(num, den))
            }
            (Chart::Approx(m), y) => {
                let v = y.to_f64();
                Scalar::Approx((m[0] * v + m[1]) / (m[2] * v + m[3]))
            }
            (Chart::Exact(_), Scalar::Approx(_)) => unreachable!("chart and point share a backend"),
        }
    }

    fn then(&self, n: &Chart) -> Chart {
        match (self, n) {
            (Chart::Exact(m), Chart::Exact(n)) => Chart::Exact([
                &m[0] * &n[0] + &m[1] * &n[2],
                &m[0] * &n[1] + &m[1] * &n[3],
                &m[2] * &n[0] + &m[3] * &n[2],
                &m[2] * &n[1] + &m[3] * &n[3],
            ]),
            (Chart::Approx(m), Chart::Approx(n)) => Chart::Approx([
                m[0] * n[0] + m[1] * n[2],
                m[0] * n[1] + m[1] * n[3],
                m[2] * n[0] + m[3] * n[2],
                m[2] * n[1] + m[3] * n[3],
            ]),
            _ => unreachable!("charts share a backend"),
        }
    }
}

struct Child {
    node: Node,
    length: Scalar,
}

struct Expander<'a> {
    pim: &'a Pim,
    branches: Vec<Arc<Branch>>,
    /// Inverse charts per branch; empty unless every branch has one.
    inverses: Vec<Chart>,
    tail: Option<Interval>,
}

impl<'a> Expander<'a> {
    fn new(pim: &'a Pim, digit_cap: Digit) -> Self {
        let (branches, _) = pim.branches(digit_cap);
        let inverses: Option<Vec<Chart>> = branches
            .iter()
            .map(|b| b.law().inverse_mobius().and_then(|m| Chart::from_scalars(&m)))
            .collect();
        Expander { pim, branches, inverses: inverses.unwrap_or_default(), tail: pim.tail_hull(digit_cap) }
    }

    fn root(&self) -> Node {
        let b = self.pim.backend();
        let mobius = !self.inverses.is_empty();
        Node {
            word: Vec::new(),
            j_lo: b.zero(),
            j_hi: b.one(),
            chart: mobius.then(|| Chart::identity(b)),
        }
    }

    /// Children of `node` in increasing digit order, plus whether cells past
    /// the digit cap could also meet `J`. Children get a chart only when
    /// `want_chart` is set, since leaves never need one.
    fn expand(&self, node: &Node, want_chart: bool) -> (Vec<Child>, bool) {
        let mut out = Vec::new();
        for (i, br) in self.branches.iter().enumerate() {
            let cell = br.domain();
            let k_lo = if cell.lo() > &node.j_lo { cell.lo() } else { &node.j_lo };
            let k_hi = if cell.hi() < &node.j_hi { cell.hi() } else { &node.j_hi };
            if k_lo.cmp_same(k_hi) != Ordering::Less {
                continue;
            }
            let (h_lo, h_hi, chart) = match &node.chart {
                Some(m) => {
                    let chart = want_chart.then(|| m.then(&self.inverses[i]));
                    (m.eval(k_lo), m.eval(k_hi), chart)
                }
                None => {
                    let a = compose_inverses(self.pim, &node.word, k_lo).expect("known digits");
                    let b = compose_inverses(self.pim, &node.word, k_hi).expect("known digits");
                    (a, b, None)
                }
            };
            let length = (&h_hi - &h_lo).abs();
            if !length.is_positive() {
                continue;
            }
            let y_a = br.forward(k_lo);
            let y_b = br.forward(k_hi);
            let (j_lo, j_hi) = if y_a.cmp_same(&y_b) == Ordering::Greater { (y_b, y_a) } else { (y_a, y_b) };
            let mut word = Vec::with_capacity(node.word.len() + 1);
            word.extend_from_slice(&node.word);
            word.push(br.digit());
            out.push(Child { node: Node { word, j_lo, j_hi, chart }, length });
        }
        let truncated = self
            .tail
            .as_ref()
            .is_some_and(|t| t.lo().cmp_same(&node.j_hi) == Ordering::Less && node.j_lo.cmp_same(t.hi()) == Ordering::Less);
        (out, truncated)
    }
}

/// Sup of cylinder lengths at one order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelNorm {
    pub n: usize,
    pub sup_length: Scalar,
    pub cylinders: usize,
    /// A cylinder attaining the sup; the earliest in digit order on ties.
    pub widest: Vec<Digit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum RefinementVerdict {
    /// The sup dropped below `tol` first at order `n`.
    ShrinksBelow { tol: Scalar, n: usize },
    /// The sup never dropped below `tol`; `word` names the widest cylinder
    /// at the deepest order reached, a candidate homterval.
    Stalled { word: Vec<Digit>, length: Scalar },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub levels: Vec<LevelNorm>,
    /// Orders whose cylinder list is complete within the budget.
    pub exact_levels: usize,
    /// Some cylinder had cells beyond `digit_cap`, so sups are lower bounds.
    pub digit_truncated: bool,
    pub budget_exhausted: bool,
    pub nodes_visited: usize,
    pub node_budget: usize,
    pub digit_cap: Digit,
    pub verdict: RefinementVerdict,
}

impl RefinementReport {
    pub fn truncated(&self) -> bool {
        self.digit_truncated || self.budget_exhausted
    }

    /// The sup at order `n`, if that order was reached.
    pub fn norm(&self, n: usize) -> Option<&Scalar> {
        self.levels.get(n.checked_sub(1)?).map(|l| &l.sup_length)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementConfig {
    pub n_max: usize,
    pub tol: Scalar,
    pub digit_cap: Digit,
    pub node_budget: usize,
}

#[derive(Clone, Default)]
struct LevelAcc {
    sup: Option<Scalar>,
    widest: Vec<Digit>,
    count: usize,
}

impl LevelAcc {
    fn record(&mut self, word: &[Digit], length: &Scalar) {
        self.count += 1;
        if self.sup.as_ref().is_none_or(|s| length.cmp_same(s) == Ordering::Greater) {
            self.sup = Some(length.clone());
            self.widest = word.to_vec();
        }
    }

    fn merge(&mut self, other: LevelAcc) {
        self.count += other.count;
        if let Some(s) = other.sup {
            if self.sup.as_ref().is_none_or(|m| s.cmp_same(m) == Ordering::Greater) {
                self.sup = Some(s);
                self.widest = other.widest;
            }
        }
    }
}

struct Subtree {
    levels: Vec<LevelAcc>,
    count: usize,
    exhausted: bool,
    digit_truncated: bool,
}

fn dfs(ex: &Expander, root: Node, depth: usize, n_max: usize, cap: usize) -> Subtree {
    let mut levels = vec![LevelAcc::default(); n_max - depth];
    let mut count = 0;
    let mut digit_truncated = false;
    let mut stack = vec![(root, depth)];
    while let Some((node, d)) = stack.pop() {
        let (children, trunc) = ex.expand(&node, d + 1 < n_max);
        digit_truncated |= trunc;
        for c in &children {
            levels[d - depth].record(&c.node.word, &c.length);
            count += 1;
            if count > cap {
                return Subtree { levels, count, exhausted: true, digit_truncated };
            }
        }
        if d + 1 < n_max {
            // reversed so the smallest digit is expanded first
            stack.extend(children.into_iter().rev().map(|c| (c.node, d + 1)));
        }
    }
    Subtree { levels, count, exhausted: false, digit_truncated }
}

/// `‖ξ⁽ⁿ⁾‖` for `n = 1..=n_max` with the default node budget.
pub fn refinement_norm(pim: &Pim, n_max: usize, tol: &Scalar, digit_cap: Digit) -> Result<RefinementReport> {
    refinement_norm_with(
        pim,
        &RefinementConfig { n_max, tol: tol.clone(), digit_cap, node_budget: DEFAULT_NODE_BUDGET },
    )
}

/// Enumerates nonempty cylinders order by order and records the largest
/// length at each order.
///
/// Enumeration is breadth-first until the frontier is large, then
/// depth-first per frontier node in fixed-size parallel batches merged in
/// frontier order, so the report is independent of scheduling. Once
/// `node_budget` cylinders have been visited, the remaining orders hold
/// partial sups (lower bounds) and `exact_levels` says how far the report is
/// complete.
pub fn refinement_norm_with(pim: &Pim, cfg: &RefinementConfig) -> Result<RefinementReport> {
    if cfg.n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    pim.check(&cfg.tol)?;
    let ex = Expander::new(pim, cfg.digit_cap);
    let mut levels = vec![LevelAcc::default(); cfg.n_max];
    let mut visited = 0usize;
    let mut digit_truncated = false;
    let mut exhausted = false;
    let mut frontier = vec![ex.root()];
    let mut depth = 0;

    'bfs: while depth < cfg.n_max && frontier.len() <= FRONTIER_TARGET {
        let mut next = Vec::new();
        for node in &frontier {
            let (children, trunc) = ex.expand(node, depth + 1 < cfg.n_max);
            digit_truncated |= trunc;
            for c in children {
                levels[depth].record(&c.node.word, &c.length);
                visited += 1;
                next.push(c.node);
                if visited > cfg.node_budget {
                    exhausted = true;
                    break 'bfs;
                }
            }
        }
        frontier = next;
        depth += 1;
    }
    let exact_levels = depth;

    if !exhausted && depth < cfg.n_max {
        'batches: for batch in frontier.chunks(SUBTREE_BATCH) {
            let remaining = cfg.node_budget - visited;
            let results: Vec<Subtree> = batch
                .par_iter()
                .map(|node| dfs(&ex, node.clone(), depth, cfg.n_max, remaining))
                .collect();
            for sub in results {
                digit_truncated |= sub.digit_truncated;
                visited += sub.count;
                for (acc, lvl) in levels[depth..].iter_mut().zip(sub.levels) {
                    acc.merge(lvl);
                }
                if sub.exhausted || visited > cfg.node_budget {
                    exhausted = true;
                    break 'batches;
                }
            }
        }
    }
    let exact_levels = if exhausted { exact_levels } else { cfg.n_max };

    let zero = pim.backend().zero();
    let levels: Vec<LevelNorm> = levels
        .into_iter()
        .enumerate()
        .map(|(i, acc)| LevelNorm {
            n: i + 1,
            sup_length: acc.sup.unwrap_or_else(|| zero.clone()),
            cylinders: acc.count,
            widest: acc.widest,
        })
        .collect();
    let verdict = match levels.iter().find(|l| l.cylinders > 0 && l.sup_length < cfg.tol) {
        Some(l) => RefinementVerdict::ShrinksBelow { tol: cfg.tol.clone(), n: l.n },
        None => {
            let last = levels.iter().rev().find(|l| l.cylinders > 0).unwrap_or(&levels[0]);
            RefinementVerdict::Stalled { word: last.widest.clone(), length: last.sup_length.clone() }
        }
    };
    Ok(RefinementReport {
        levels,
        exact_levels,
        digit_truncated,
        budget_exhausted: exhausted,
        nodes_visited: visited,
        node_budget: cfg.node_budget,
        digit_cap: cfg.digit_cap,
        verdict,
    })
}

/// All length-`n` words with nonempty cylinders, in digit order, plus a flag
/// for cells beyond the cap.
pub(crate) fn enumerate_words(pim: &Pim, n: usize, digit_cap: Digit, node_budget: usize) -> Result<(Vec<Word>, bool)> {
    if n == 0 {
        return Err(Error::InvalidArgument("word length must be at least 1".into()));
    }
    let ex = Expander::new(pim, digit_cap);
    let mut out = Vec::new();
    let mut truncated = false;
    let mut visited = 0usize;
    let mut stack = vec![(ex.root(), 0usize)];
    while let Some((node, d)) = stack.pop() {
        let (children, trunc) = ex.expand(&node, d + 2 < n);
        truncated |= trunc;
        visited += children.len();
        if visited > node_budget {
            return Err(Error::BudgetExceeded(node_budget));
        }
        if d + 1 == n {
            out.extend(children.into_iter().map(|c| Word::new(c.node.word)));
        } else {
            stack.extend(children.into_iter().rev().map(|c| (c.node, d + 1)));
        }
    }
    Ok((out, truncated))
}
