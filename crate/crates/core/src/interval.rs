//! Subintervals of `[0, 1]` with explicit endpoint kinds, interval
//! partitions, and grid density.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pim::Digit;
use crate::scalar::{Backend, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndKind {
    Closed,
    Open,
}

impl EndKind {
    fn either_open(self, other: EndKind) -> EndKind {
        if self == EndKind::Open || other == EndKind::Open {
            EndKind::Open
        } else {
            EndKind::Closed
        }
    }

    fn both_open(self, other: EndKind) -> EndKind {
        if self == EndKind::Open && other == EndKind::Open {
            EndKind::Open
        } else {
            EndKind::Closed
        }
    }
}

/// An interval `lo..hi` with open or closed ends.
///
/// `lo <= hi` always holds, and `lo == hi` only for a closed point interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInterval")]
pub struct Interval {
    lo: Scalar,
    hi: Scalar,
    lo_kind: EndKind,
    hi_kind: EndKind,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInterval {
    lo: Scalar,
    hi: Scalar,
    lo_kind: EndKind,
    hi_kind: EndKind,
}

impl TryFrom<RawInterval> for Interval {
    type Error = Error;

    fn try_from(raw: RawInterval) -> Result<Self> {
        Interval::new(raw.lo, raw.hi, raw.lo_kind, raw.hi_kind)
    }
}

impl Interval {
    pub fn new(lo: Scalar, hi: Scalar, lo_kind: EndKind, hi_kind: EndKind) -> Result<Self> {
        match lo.try_cmp(&hi)? {
            Ordering::Greater => Err(Error::InvalidInterval(format!("lo {lo} > hi {hi}"))),
            Ordering::Equal if lo_kind == EndKind::Open || hi_kind == EndKind::Open => Err(
                Error::InvalidInterval(format!("degenerate interval at {lo} must be closed")),
            ),
            _ => Ok(Interval { lo, hi, lo_kind, hi_kind }),
        }
    }

    /// `[lo, hi)`, the default cell shape.
    pub fn half_open(lo: Scalar, hi: Scalar) -> Result<Self> {
        Self::new(lo, hi, EndKind::Closed, EndKind::Open)
    }

    pub fn closed(lo: Scalar, hi: Scalar) -> Result<Self> {
        Self::new(lo, hi, EndKind::Closed, EndKind::Closed)
    }

    pub fn open(lo: Scalar, hi: Scalar) -> Result<Self> {
        Self::new(lo, hi, EndKind::Open, EndKind::Open)
    }

    pub fn point(x: Scalar) -> Self {
        Interval { lo: x.clone(), hi: x, lo_kind: EndKind::Closed, hi_kind: EndKind::Closed }
    }

    /// `[0, 1)` in the given backend.
    pub fn unit(backend: Backend) -> Self {
        Interval::half_open(backend.zero(), backend.one()).expect("0 < 1")
    }

    /// Builds from two unordered endpoints; the kinds follow the endpoints.
    pub(crate) fn from_unordered(
        a: Scalar,
        a_kind: EndKind,
        b: Scalar,
        b_kind: EndKind,
    ) -> Option<Self> {
        let (lo, lo_kind, hi, hi_kind) = match a.cmp_same(&b) {
            Ordering::Greater => (b, b_kind, a, a_kind),
            _ => (a, a_kind, b, b_kind),
        };
        if lo.cmp_same(&hi) == Ordering::Equal {
            if lo_kind == EndKind::Closed && hi_kind == EndKind::Closed {
                Some(Interval::point(lo))
            } else {
                None
            }
        } else {
            Some(Interval { lo, hi, lo_kind, hi_kind })
        }
    }

    pub fn lo(&self) -> &Scalar {
        &self.lo
    }

    pub fn hi(&self) -> &Scalar {
        &self.hi
    }

    pub fn lo_kind(&self) -> EndKind {
        self.lo_kind
    }

    pub fn hi_kind(&self) -> EndKind {
        self.hi_kind
    }

    pub fn backend(&self) -> Backend {
        self.lo.backend()
    }

    pub fn length(&self) -> Scalar {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Scalar {
        let two = self.lo.from_int(2);
        (&self.lo + &self.hi) / two
    }

    pub fn is_point(&self) -> bool {
        self.lo.cmp_same(&self.hi) == Ordering::Equal
    }

    /// Positive length.
    pub fn is_nontrivial(&self) -> bool {
        !self.is_point()
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        let lo_ok = match x.try_cmp(&self.lo) {
            Ok(Ordering::Greater) => true,
            Ok(Ordering::Equal) => self.lo_kind == EndKind::Closed,
            _ => false,
        };
        lo_ok
            && match x.try_cmp(&self.hi) {
                Ok(Ordering::Less) => true,
                Ok(Ordering::Equal) => self.hi_kind == EndKind::Closed,
                _ => false,
            }
    }

    /// `x` in the open core `(lo, hi)`.
    pub fn interior_contains(&self, x: &Scalar) -> bool {
        matches!(x.try_cmp(&self.lo), Ok(Ordering::Greater))
            && matches!(x.try_cmp(&self.hi), Ok(Ordering::Less))
    }

    pub fn closure(&self) -> Interval {
        Interval {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            lo_kind: EndKind::Closed,
            hi_kind: EndKind::Closed,
        }
    }

    /// The open core; `None` for a point.
    pub fn interior(&self) -> Option<Interval> {
        if self.is_point() {
            None
        } else {
            Some(Interval {
                lo: self.lo.clone(),
                hi: self.hi.clone(),
                lo_kind: EndKind::Open,
                hi_kind: EndKind::Open,
            })
        }
    }

    /// Set intersection. A single shared closed endpoint yields a point.
    pub fn intersect(&self, other: &Interval) -> Result<Option<Interval>> {
        self.lo.same_backend(&other.lo)?;
        let (lo, lo_kind) = match self.lo.cmp_same(&other.lo) {
            Ordering::Less => (&other.lo, other.lo_kind),
            Ordering::Greater => (&self.lo, self.lo_kind),
            Ordering::Equal => (&self.lo, self.lo_kind.either_open(other.lo_kind)),
        };
        let (hi, hi_kind) = match self.hi.cmp_same(&other.hi) {
            Ordering::Less => (&self.hi, self.hi_kind),
            Ordering::Greater => (&other.hi, other.hi_kind),
            Ordering::Equal => (&self.hi, self.hi_kind.either_open(other.hi_kind)),
        };
        Ok(match lo.cmp_same(hi) {
            Ordering::Less => Some(Interval { lo: lo.clone(), hi: hi.clone(), lo_kind, hi_kind }),
            Ordering::Equal if lo_kind == EndKind::Closed && hi_kind == EndKind::Closed => {
                Some(Interval::point(lo.clone()))
            }
            _ => None,
        })
    }

    /// Intersection of the open cores is nonempty.
    pub fn overlaps_interior(&self, other: &Interval) -> bool {
        let lo = if self.lo.cmp_same(&other.lo) == Ordering::Less { &other.lo } else { &self.lo };
        let hi = if self.hi.cmp_same(&other.hi) == Ordering::Less { &self.hi } else { &other.hi };
        lo.cmp_same(hi) == Ordering::Less
    }

    /// `other` is a subset of `self`.
    pub fn contains_interval(&self, other: &Interval) -> bool {
        let lo_ok = match other.lo.cmp_same(&self.lo) {
            Ordering::Greater => true,
            Ordering::Equal => self.lo_kind == EndKind::Closed || other.lo_kind == EndKind::Open,
            Ordering::Less => false,
        };
        let hi_ok = match other.hi.cmp_same(&self.hi) {
            Ordering::Less => true,
            Ordering::Equal => self.hi_kind == EndKind::Closed || other.hi_kind == EndKind::Open,
            Ordering::Greater => false,
        };
        lo_ok && hi_ok
    }

    /// Union when the two intervals overlap or abut without a gap.
    pub fn union_if_connected(&self, other: &Interval) -> Option<Interval> {
        let (first, second) = if self.lo.cmp_same(&other.lo) == Ordering::Greater {
            (other, self)
        } else {
            (self, other)
        };
        let connected = match first.hi.cmp_same(&second.lo) {
            Ordering::Greater => true,
            Ordering::Equal => {
                first.hi_kind == EndKind::Closed || second.lo_kind == EndKind::Closed
            }
            Ordering::Less => false,
        };
        if !connected {
            return None;
        }
        let lo_kind = match first.lo.cmp_same(&second.lo) {
            Ordering::Equal => first.lo_kind.both_open(second.lo_kind),
            _ => first.lo_kind,
        };
        let (hi, hi_kind) = match first.hi.cmp_same(&second.hi) {
            Ordering::Less => (&second.hi, second.hi_kind),
            Ordering::Greater => (&first.hi, first.hi_kind),
            Ordering::Equal => (&first.hi, first.hi_kind.both_open(second.hi_kind)),
        };
        Some(Interval { lo: first.lo.clone(), hi: hi.clone(), lo_kind, hi_kind })
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Interval) -> Interval {
        let (lo, lo_kind) = match self.lo.cmp_same(&other.lo) {
            Ordering::Less => (&self.lo, self.lo_kind),
            Ordering::Greater => (&other.lo, other.lo_kind),
            Ordering::Equal => (&self.lo, self.lo_kind.both_open(other.lo_kind)),
        };
        let (hi, hi_kind) = match self.hi.cmp_same(&other.hi) {
            Ordering::Greater => (&self.hi, self.hi_kind),
            Ordering::Less => (&other.hi, other.hi_kind),
            Ordering::Equal => (&self.hi, self.hi_kind.both_open(other.hi_kind)),
        };
        Interval { lo: lo.clone(), hi: hi.clone(), lo_kind, hi_kind }
    }

    /// Strictly left of `other` (every point of `self` below every point of `other`).
    pub fn precedes(&self, other: &Interval) -> bool {
        match self.hi.cmp_same(&other.lo) {
            Ordering::Less => true,
            Ordering::Equal => self.hi_kind == EndKind::Open || other.lo_kind == EndKind::Open,
            Ordering::Greater => false,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            return write!(f, "{{{}}}", self.lo);
        }
        let l = if self.lo_kind == EndKind::Closed { '[' } else { '(' };
        let r = if self.hi_kind == EndKind::Closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

/// Merges a list of intervals into sorted, pairwise disconnected pieces.
pub fn merge_intervals(mut pieces: Vec<Interval>) -> Vec<Interval> {
    pieces.sort_by(|a, b| a.lo.cmp_same(&b.lo).then(kind_rank(a.lo_kind).cmp(&kind_rank(b.lo_kind))));
    let mut out: Vec<Interval> = Vec::with_capacity(pieces.len());
    for piece in pieces {
        if let Some(last) = out.last_mut() {
            if let Some(joined) = last.union_if_connected(&piece) {
                *last = joined;
                continue;
            }
        }
        out.push(piece);
    }
    out
}

fn kind_rank(k: EndKind) -> u8 {
    match k {
        EndKind::Closed => 0,
        EndKind::Open => 1,
    }
}

/// A finite indexed family of disjoint cells.
///
/// Maps with countably many cells hand out finite sub-families through
/// [`Pim::partition`](crate::pim::Pim::partition); `truncated` then records
/// that cells beyond the cap were left out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalPartition {
    cells: Vec<(Digit, Interval)>,
    truncated: bool,
}

impl IntervalPartition {
    pub fn new(cells: Vec<(Digit, Interval)>) -> Result<Self> {
        Self::with_truncation(cells, false)
    }

    pub fn with_truncation(cells: Vec<(Digit, Interval)>, truncated: bool) -> Result<Self> {
        if cells.len() < 2 && !truncated {
            return Err(Error::InvalidPartition("at least two cells are required".into()));
        }
        if let Some((_, first)) = cells.first() {
            let backend = first.backend();
            if cells.iter().any(|(_, c)| c.backend() != backend) {
                return Err(Error::MixedBackend);
            }
        }
        let mut digits: Vec<Digit> = cells.iter().map(|(d, _)| *d).collect();
        digits.sort_unstable();
        if digits.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPartition("repeated digit".into()));
        }
        let mut sorted: Vec<&Interval> = cells.iter().map(|(_, c)| c).collect();
        sorted.sort_by(|a, b| a.lo().cmp_same(b.lo()));
        for w in sorted.windows(2) {
            if !w[0].precedes(w[1]) {
                return Err(Error::InvalidPartition(format!("cells {} and {} overlap", w[0], w[1])));
            }
        }
        Ok(IntervalPartition { cells, truncated })
    }

    pub fn cells(&self) -> &[(Digit, Interval)] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn digits(&self) -> impl Iterator<Item = Digit> + '_ {
        self.cells.iter().map(|(d, _)| *d)
    }

    pub fn cell(&self, d: Digit) -> Option<&Interval> {
        self.cells.iter().find(|(e, _)| *e == d).map(|(_, c)| c)
    }

    /// Sum of cell lengths; 1 for a finite partition of full measure, a
    /// partial sum below 1 for a truncated family.
    pub fn total_length(&self) -> Scalar {
        let backend = self.cells.first().map(|(_, c)| c.backend()).unwrap_or(Backend::Rational);
        self.cells.iter().fold(backend.zero(), |acc, (_, c)| acc + c.length())
    }

    /// The digit of the cell containing `x`, if any.
    pub fn locate(&self, x: &Scalar) -> Option<Digit> {
        self.cells.iter().find(|(_, c)| c.contains(x)).map(|(d, _)| *d)
    }
}

/// Number of grid cells `[kε, (k+1)ε)` needed to cover `[0, 1)`.
pub fn grid_cells(eps: &Scalar) -> Result<usize> {
    if !eps.is_positive() {
        return Err(Error::InvalidArgument("ε must be positive".into()));
    }
    let n = eps.recip().ceil_i64().ok_or_else(|| Error::InvalidArgument("ε too small".into()))?;
    usize::try_from(n).map_err(|_| Error::InvalidArgument("ε too small".into()))
}

/// Index of the grid cell containing `p`, or `None` outside `[0, 1)`.
pub fn grid_index(p: &Scalar, eps: &Scalar, cells: usize) -> Result<Option<usize>> {
    p.same_backend(eps)?;
    if p.is_negative() {
        return Ok(None);
    }
    let k = match (p / eps).floor_i64() {
        Some(k) if k >= 0 => k as usize,
        _ => return Ok(None),
    };
    Ok((k < cells).then_some(k))
}

/// Occupancy of the left-closed ε-grid over `[0, 1)`.
pub fn grid_occupancy<'a>(points: impl IntoIterator<Item = &'a Scalar>, eps: &Scalar) -> Result<Vec<bool>> {
    let cells = grid_cells(eps)?;
    let mut hit = vec![false; cells];
    for p in points {
        if let Some(k) = grid_index(p, eps, cells)? {
            hit[k] = true;
        }
    }
    Ok(hit)
}

/// Every grid cell `[kε, (k+1)ε)`, `k = 0..⌈1/ε⌉`, holds at least one point.
pub fn epsilon_dense(points: &[Scalar], eps: &Scalar) -> Result<bool> {
    if points.is_empty() {
        return Ok(false);
    }
    Ok(grid_occupancy(points, eps)?.into_iter().all(|h| h))
}
