//! Branch construction for the built-in map families.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::interval::{EndKind, Interval};
use crate::pim::branch::{quadratic_turning_point, Branch, BranchLaw};
use crate::pim::spec::{EgyptianSequence, PimSpec};
use crate::pim::Digit;
use crate::scalar::{Backend, Scalar};

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) enum Built {
    Finite(Vec<Branch>),
    Lazy(LazyRule),
}

pub(crate) fn build(spec: &PimSpec, backend: Backend) -> Result<Built> {
    match spec {
        PimSpec::Beta { beta } => alpha_beta(&backend.zero(), beta).map(Built::Finite),
        PimSpec::AlphaBeta { alpha, beta } => alpha_beta(alpha, beta).map(Built::Finite),
        PimSpec::Gauss { r } => {
            if r < &r.from_int(1) {
                return Err(invalid(format!("Gauss map needs r >= 1, got {r}")));
            }
            let first = r.floor_i64().ok_or_else(|| invalid("r too large"))?;
            Ok(Built::Lazy(LazyRule::Gauss { r: r.clone(), first }))
        }
        PimSpec::Quadratic { r } => quadratic(r).map(Built::Finite),
        PimSpec::Tent { tau } => tent(tau).map(Built::Finite),
        PimSpec::Cantor => Ok(Built::Lazy(LazyRule::Cantor { backend })),
        PimSpec::Luroth { cuts: None } => Ok(Built::Lazy(LazyRule::Luroth { backend })),
        PimSpec::Luroth { cuts: Some(cuts) } => luroth_finite(cuts, backend).map(Built::Finite),
        PimSpec::Egyptian { sequence } => {
            if let EgyptianSequence::Prefix(p) = sequence {
                if p.first().is_some_and(|&a| a <= 1) {
                    return Err(invalid("Egyptian sequence needs a₁ > 1"));
                }
                if p.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(invalid("Egyptian sequence must be strictly increasing"));
                }
            }
            Ok(Built::Lazy(LazyRule::Egyptian { seq: sequence.clone(), backend }))
        }
        PimSpec::IntervalExchange { lengths, translations } => {
            interval_exchange(lengths, translations, backend).map(Built::Finite)
        }
        PimSpec::ExampleFirst => Ok(Built::Finite(example_first(backend))),
    }
}

/// `x ↦ α + βx mod 1` with digit `⌊α + βx⌋`.
fn alpha_beta(alpha: &Scalar, beta: &Scalar) -> Result<Vec<Branch>> {
    let one = beta.from_int(1);
    let zero = beta.from_int(0);
    if beta <= &one {
        return Err(invalid(format!("β must exceed 1, got {beta}")));
    }
    if alpha < &zero || alpha >= &one {
        return Err(invalid(format!("α must lie in [0,1), got {alpha}")));
    }
    let top = (alpha + beta).ceil_i64().ok_or_else(|| invalid("β too large"))?;
    let mut out = Vec::new();
    for d in 0..top {
        let lo = ((&alpha.from_int(d) - alpha) / beta).max(zero.clone());
        let hi = ((&alpha.from_int(d + 1) - alpha) / beta).min(one.clone());
        if lo >= hi {
            continue;
        }
        let law = BranchLaw::Affine { slope: beta.clone(), offset: alpha - &alpha.from_int(d) };
        out.push(Branch::new(d, Interval::half_open(lo, hi)?, law));
    }
    Ok(out)
}

fn tent(tau: &Scalar) -> Result<Vec<Branch>> {
    let one = tau.from_int(1);
    if tau <= &one || tau > &tau.from_int(2) {
        return Err(invalid(format!("tent map needs 1 < τ <= 2, got {tau}")));
    }
    let turn = one.clone() / tau;
    Ok(vec![
        Branch::new(
            0,
            Interval::half_open(tau.from_int(0), turn.clone())?,
            BranchLaw::Affine { slope: tau.clone(), offset: tau.from_int(0) },
        ),
        Branch::new(
            1,
            Interval::half_open(turn, one)?,
            BranchLaw::Affine { slope: -tau, offset: tau.from_int(2) },
        ),
    ])
}

/// Lower parameter bound for the quadratic family.
pub const QUADRATIC_R_MIN: f64 = 0.8;

fn quadratic(r: &Scalar) -> Result<Vec<Branch>> {
    let Scalar::Approx(rv) = r else {
        return Err(invalid("quadratic maps run on the float backend only"));
    };
    if !(*rv > QUADRATIC_R_MIN && *rv <= 1.0) {
        return Err(invalid(format!("quadratic map needs 0.8 < r <= 1, got {rv}")));
    }
    let c = Scalar::Approx(quadratic_turning_point(*rv));
    Ok(vec![
        Branch::new(
            0,
            Interval::half_open(Scalar::Approx(0.0), c.clone())?,
            BranchLaw::Quadratic { r: *rv, rising: true },
        ),
        Branch::new(
            1,
            Interval::half_open(c, Scalar::Approx(1.0))?,
            BranchLaw::Quadratic { r: *rv, rising: false },
        ),
    ])
}

fn full_linear(d: Digit, cell: Interval) -> Branch {
    let width = cell.length();
    let slope = width.recip();
    let offset = -(cell.lo() / &width);
    Branch::new(d, cell, BranchLaw::Affine { slope, offset })
}

fn luroth_finite(cuts: &[Scalar], backend: Backend) -> Result<Vec<Branch>> {
    if cuts.len() < 3 {
        return Err(invalid("Lüroth partition needs at least two cells"));
    }
    if cuts[0] != backend.zero() || cuts[cuts.len() - 1] != backend.one() {
        return Err(invalid("Lüroth cuts must start at 0 and end at 1"));
    }
    cuts.windows(2)
        .enumerate()
        .map(|(i, w)| {
            if w[0] >= w[1] {
                return Err(invalid("Lüroth cuts must be strictly increasing"));
            }
            Ok(full_linear(i as Digit, Interval::half_open(w[0].clone(), w[1].clone())?))
        })
        .collect()
}

fn interval_exchange(
    lengths: &[Scalar],
    translations: &[Scalar],
    backend: Backend,
) -> Result<Vec<Branch>> {
    if lengths.len() < 2 || lengths.len() != translations.len() {
        return Err(invalid("interval exchange needs >= 2 lengths and one translation per cell"));
    }
    let mut lo = backend.zero();
    let mut out = Vec::with_capacity(lengths.len());
    for (i, (len, shift)) in lengths.iter().zip(translations).enumerate() {
        if !len.is_positive() {
            return Err(invalid("cell lengths must be positive"));
        }
        let hi = &lo + len;
        let law = BranchLaw::Affine { slope: backend.one(), offset: shift.clone() };
        out.push(Branch::new(i as Digit, Interval::half_open(lo.clone(), hi.clone())?, law));
        lo = hi;
    }
    if lo != backend.one() {
        return Err(invalid(format!("cell lengths sum to {lo}, not 1")));
    }
    // translated cells must re-tile [0,1)
    let mut images: Vec<&Interval> = out.iter().map(|b| b.image()).collect();
    images.sort_by(|a, b| a.lo().cmp_same(b.lo()));
    let mut edge = backend.zero();
    for img in images {
        if img.lo() != &edge {
            return Err(invalid(format!("translated cells leave a gap or overlap at {edge}")));
        }
        edge = img.hi().clone();
    }
    if edge != backend.one() {
        return Err(invalid("translated cells do not end at 1"));
    }
    Ok(out)
}

fn example_first(b: Backend) -> Vec<Branch> {
    let q = |n, d| b.ratio(n, d);
    vec![
        Branch::new(
            0,
            Interval::half_open(q(0, 1), q(1, 4)).expect("valid"),
            BranchLaw::Affine { slope: q(-2, 1), offset: q(1, 2) },
        ),
        Branch::new(
            1,
            Interval::half_open(q(1, 4), q(3, 4)).expect("valid"),
            BranchLaw::Affine { slope: q(2, 1), offset: q(-1, 2) },
        ),
        Branch::new(
            2,
            Interval::closed(q(3, 4), q(1, 1)).expect("valid"),
            BranchLaw::Affine { slope: q(-2, 1), offset: q(5, 2) },
        ),
    ]
}

/// Countable families whose branches come from a digit formula.
#[derive(Clone, Debug)]
pub(crate) enum LazyRule {
    /// `Δ(d) = (r/(d+1), min(r/d, 1)]`, `d >= ⌊r⌋`.
    Gauss { r: Scalar, first: Digit },
    /// Digit `d = a_n`, `Δ(d) = [1/a_n, 1/a_{n−1})` with `a₀ = 1`.
    Egyptian { seq: EgyptianSequence, backend: Backend },
    /// Digit `d = 2^{m−1} + k` names the gap of level `m` at position `k`,
    /// whose Cantor-function value is the dyadic `(2k+1)/2^m`.
    Cantor { backend: Backend },
    /// `Δ(n) = [1/(n+1), 1/n)`, `n >= 1`.
    Luroth { backend: Backend },
}

impl LazyRule {
    pub(crate) fn first_digit(&self) -> Digit {
        match self {
            LazyRule::Gauss { first, .. } => *first,
            LazyRule::Egyptian { seq, .. } => seq_first(seq),
            LazyRule::Cantor { .. } | LazyRule::Luroth { .. } => 1,
        }
    }

    pub(crate) fn is_digit(&self, d: Digit) -> bool {
        match self {
            LazyRule::Gauss { first, .. } => d >= *first,
            LazyRule::Egyptian { seq, .. } => seq_contains(seq, d),
            LazyRule::Cantor { .. } => (1..(1 << 62)).contains(&d),
            LazyRule::Luroth { .. } => d >= 1,
        }
    }

    /// Valid digits `<= cap`, increasing.
    pub(crate) fn digits_upto(&self, cap: Digit) -> Vec<Digit> {
        match self {
            LazyRule::Egyptian { seq, .. } => {
                let mut out = Vec::new();
                let mut d = seq_first(seq);
                while d <= cap {
                    out.push(d);
                    match seq_next(seq, d) {
                        Some(n) => d = n,
                        None => break,
                    }
                }
                out
            }
            _ => (self.first_digit()..=cap).filter(|d| self.is_digit(*d)).collect(),
        }
    }

    pub(crate) fn branch(&self, d: Digit) -> Option<Branch> {
        if !self.is_digit(d) {
            return None;
        }
        Some(match self {
            LazyRule::Gauss { r, .. } => {
                let one = r.from_int(1);
                let lo = r / &r.from_int(d + 1);
                let hi = (r / &r.from_int(d)).min(one);
                let cell = Interval::new(lo, hi, EndKind::Open, EndKind::Closed).ok()?;
                Branch::new(d, cell, BranchLaw::Reciprocal { numer: r.clone(), shift: r.from_int(d) })
            }
            LazyRule::Egyptian { seq, backend } => {
                let prev = seq_prev(seq, d);
                let cell = Interval::half_open(backend.ratio(1, d), backend.ratio(1, prev)).ok()?;
                let law = BranchLaw::Affine { slope: backend.one(), offset: backend.ratio(-1, d) };
                Branch::new(d, cell, law)
            }
            LazyRule::Cantor { backend } => full_linear(d, cantor_gap(d, *backend)),
            LazyRule::Luroth { backend } => {
                let cell = Interval::half_open(backend.ratio(1, d + 1), backend.ratio(1, d)).ok()?;
                full_linear(d, cell)
            }
        })
    }

    pub(crate) fn locate(&self, x: &Scalar) -> Option<Digit> {
        let zero = x.from_int(0);
        let one = x.from_int(1);
        if x <= &zero {
            return None;
        }
        match self {
            LazyRule::Gauss { r, .. } => {
                if x > &one {
                    return None;
                }
                (r / x).floor_i64()
            }
            LazyRule::Egyptian { seq, .. } => {
                if x >= &one {
                    return None;
                }
                let need = x.recip().ceil_i64()?;
                seq_ceiling(seq, need)
            }
            LazyRule::Luroth { .. } => {
                if x >= &one {
                    return None;
                }
                Some(x.recip().ceil_i64()? - 1)
            }
            LazyRule::Cantor { .. } => {
                if x >= &one {
                    return None;
                }
                cantor_locate(x)
            }
        }
    }

    /// Closed hull of all cells with digit `> cap`, if any lie there.
    pub(crate) fn tail_hull(&self, cap: Digit) -> Option<Interval> {
        match self {
            LazyRule::Gauss { r, first } => {
                let next = cap.max(*first - 1).checked_add(1)?;
                Interval::closed(r.from_int(0), (r / &r.from_int(next)).min(r.from_int(1))).ok()
            }
            LazyRule::Egyptian { backend, .. } => {
                let last = self.digits_upto(cap).last().copied().unwrap_or(1);
                Interval::closed(backend.zero(), backend.ratio(1, last)).ok()
            }
            LazyRule::Luroth { backend } => {
                Interval::closed(backend.zero(), backend.ratio(1, cap.max(0) + 1)).ok()
            }
            LazyRule::Cantor { backend } => Interval::closed(backend.zero(), backend.one()).ok(),
        }
    }

    /// Upper bound on the image of any branch with digit `> cap`.
    pub(crate) fn tail_image_sup(&self, cap: Digit) -> Scalar {
        match self {
            LazyRule::Egyptian { backend, .. } => {
                let last = self.digits_upto(cap).last().copied().unwrap_or(1);
                backend.ratio(1, last)
            }
            LazyRule::Gauss { r, .. } => r.from_int(1),
            LazyRule::Cantor { backend } | LazyRule::Luroth { backend } => backend.one(),
        }
    }
}

fn seq_first(seq: &EgyptianSequence) -> Digit {
    match seq {
        EgyptianSequence::Integers | EgyptianSequence::PowersOfTwo | EgyptianSequence::Primes => 2,
        EgyptianSequence::Prefix(p) => p.first().copied().unwrap_or(2),
    }
}

fn seq_contains(seq: &EgyptianSequence, d: Digit) -> bool {
    match seq {
        EgyptianSequence::Integers => d >= 2,
        EgyptianSequence::PowersOfTwo => d >= 2 && (d & (d - 1)) == 0,
        EgyptianSequence::Primes => is_prime(d),
        EgyptianSequence::Prefix(p) => match p.last() {
            Some(&last) if d <= last => p.binary_search(&d).is_ok(),
            Some(_) => true,
            None => d >= 2,
        },
    }
}

fn seq_next(seq: &EgyptianSequence, d: Digit) -> Option<Digit> {
    match seq {
        EgyptianSequence::Integers => d.checked_add(1),
        EgyptianSequence::PowersOfTwo => d.checked_mul(2),
        EgyptianSequence::Primes => (d + 1..).find(|&n| is_prime(n)),
        EgyptianSequence::Prefix(p) => match p.iter().find(|&&a| a > d) {
            Some(&a) => Some(a),
            None => d.checked_add(1),
        },
    }
}

/// `a_{n−1}` for `d = a_n`, with `a₀ = 1`.
fn seq_prev(seq: &EgyptianSequence, d: Digit) -> Digit {
    match seq {
        EgyptianSequence::Integers => d - 1,
        EgyptianSequence::PowersOfTwo => d / 2,
        EgyptianSequence::Primes => (2..d).rev().find(|&n| is_prime(n)).unwrap_or(1),
        EgyptianSequence::Prefix(p) => {
            let first = p.first().copied().unwrap_or(2);
            if d == first {
                1
            } else if p.last().is_some_and(|&l| d > l) {
                d - 1
            } else {
                p.iter().rev().find(|&&a| a < d).copied().unwrap_or(1)
            }
        }
    }
}

/// Smallest sequence member `>= need`.
fn seq_ceiling(seq: &EgyptianSequence, need: i64) -> Option<Digit> {
    let need = need.max(2);
    match seq {
        EgyptianSequence::Integers => Some(need),
        EgyptianSequence::PowersOfTwo => {
            let mut p: i64 = 2;
            while p < need {
                p = p.checked_mul(2)?;
            }
            Some(p)
        }
        EgyptianSequence::Primes => (need..).find(|&n| is_prime(n)),
        EgyptianSequence::Prefix(p) => match p.iter().find(|&&a| a >= need) {
            Some(&a) => Some(a),
            None => Some(need.max(p.last().map_or(2, |l| l + 1))),
        },
    }
}

fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut k = 3;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 2;
    }
    true
}

/// Level `m` and position `k` of a Cantor gap digit.
fn cantor_level(d: Digit) -> (u32, i64) {
    let m = 64 - (d as u64).leading_zeros();
    (m, d - (1 << (m - 1)))
}

/// The dyadic value `(2k+1)/2^m` the Cantor function takes on gap `d`.
pub fn cantor_dyadic(d: Digit) -> (i64, i64) {
    let (m, k) = cantor_level(d);
    (2 * k + 1, 1 << m)
}

fn cantor_gap(d: Digit, backend: Backend) -> Interval {
    let (m, k) = cantor_level(d);
    let mut left = backend.zero();
    let mut scale = backend.one();
    let three = backend.int(3);
    for i in (0..m - 1).rev() {
        scale = scale / &three;
        if (k >> i) & 1 == 1 {
            left = left + &scale + &scale;
        }
    }
    let third = scale / &three;
    let lo = &left + &third;
    let hi = &lo + &third;
    Interval::open(lo, hi).expect("gap has positive length")
}

fn cantor_locate(x: &Scalar) -> Option<Digit> {
    let one = x.from_int(1);
    let two = x.from_int(2);
    let three = x.from_int(3);
    let third = &one / &three;
    let two_thirds = &two / &three;
    let max_levels = match x.backend() {
        Backend::Rational => 62,
        Backend::Float => 32,
    };
    let mut t = x.clone();
    let mut path: i64 = 0;
    let mut seen: Vec<Scalar> = Vec::new();
    for m in 1..=max_levels {
        match (t.cmp_same(&third), t.cmp_same(&two_thirds)) {
            (Ordering::Greater, Ordering::Less) => return Some((1 << (m - 1)) + path),
            (Ordering::Greater, _) => {
                path = 2 * path + 1;
                t = &t * &three - &two;
            }
            _ => {
                path *= 2;
                t = &t * &three;
            }
        }
        // a repeated point of the tripling orbit never reaches a gap
        if x.backend() == Backend::Rational {
            if seen.contains(&t) {
                return None;
            }
            seen.push(t.clone());
        }
    }
    None
}
