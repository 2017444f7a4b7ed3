use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::interval::Interval;
use crate::pim::Digit;
use crate::scalar::Scalar;

/// Direction of a branch: type A branches increase, type B branches decrease.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

impl Monotonicity {
    pub fn is_increasing(self) -> bool {
        self == Monotonicity::Increasing
    }

    pub fn label(self) -> &'static str {
        match self {
            Monotonicity::Increasing => "A",
            Monotonicity::Decreasing => "B",
        }
    }
}

/// Closed-form law of one branch.
#[derive(Clone, Debug)]
pub enum BranchLaw {
    /// `x ↦ slope·x + offset`
    Affine { slope: Scalar, offset: Scalar },
    /// `x ↦ numer/x − shift`
    Reciprocal { numer: Scalar, shift: Scalar },
    /// One lap of the renormalized logistic map `4rx(1−x)` on `[q(r), r]`;
    /// float only.
    Quadratic { r: f64, rising: bool },
}

impl BranchLaw {
    pub fn eval(&self, x: &Scalar) -> Scalar {
        match self {
            BranchLaw::Affine { slope, offset } => slope * x + offset,
            BranchLaw::Reciprocal { numer, shift } => numer / x - shift,
            BranchLaw::Quadratic { r, .. } => Scalar::Approx(quadratic_forward(*r, x.to_f64())),
        }
    }

    pub fn invert(&self, y: &Scalar) -> Scalar {
        match self {
            BranchLaw::Affine { slope, offset } => (y - offset) / slope,
            BranchLaw::Reciprocal { numer, shift } => numer / &(y + shift),
            BranchLaw::Quadratic { r, rising } => {
                Scalar::Approx(quadratic_inverse(*r, *rising, y.to_f64()))
            }
        }
    }

    /// The inverse as a Möbius matrix `[a, b, c, d]` for `y ↦ (ay+b)/(cy+d)`.
    pub fn inverse_mobius(&self) -> Option<[Scalar; 4]> {
        match self {
            BranchLaw::Affine { slope, offset } => {
                Some([slope.from_int(1), -offset, slope.from_int(0), slope.clone()])
            }
            BranchLaw::Reciprocal { numer, shift } => {
                Some([numer.from_int(0), numer.clone(), numer.from_int(1), shift.clone()])
            }
            BranchLaw::Quadratic { .. } => None,
        }
    }
}

/// `q(r) = 4r·r(1−r)`, the left end of the renormalization window.
fn window_left(r: f64) -> f64 {
    4.0 * r * r * (1.0 - r)
}

/// `F(x) = −4r((1 − r − 4r² + 4r³) − (1 − 8r² + 8r³)x + r(1 − 2r)²x²)`.
pub(crate) fn quadratic_forward(r: f64, x: f64) -> f64 {
    let c0 = 1.0 - r - 4.0 * r * r + 4.0 * r * r * r;
    let c1 = 1.0 - 8.0 * r * r + 8.0 * r * r * r;
    let c2 = r * (1.0 - 2.0 * r).powi(2);
    -4.0 * r * (c0 - c1 * x + c2 * x * x)
}

fn quadratic_inverse(r: f64, rising: bool, y: f64) -> f64 {
    let left = window_left(r);
    let width = r - left;
    let v = left + width * y;
    let root = (1.0 - v / r).max(0.0).sqrt();
    let u = if rising { (1.0 - root) / 2.0 } else { (1.0 + root) / 2.0 };
    (u - left) / width
}

/// Turning point of the renormalized quadratic map, `(1+2r−4r²)/(2r−4r²)`.
pub(crate) fn quadratic_turning_point(r: f64) -> f64 {
    (1.0 + 2.0 * r - 4.0 * r * r) / (2.0 * r - 4.0 * r * r)
}

/// `F|Δ(d)`: a strictly monotone branch on one cell.
#[derive(Clone, Debug)]
pub struct Branch {
    digit: Digit,
    domain: Interval,
    mono: Monotonicity,
    law: BranchLaw,
    image: Interval,
}

impl Branch {
    pub(crate) fn new(digit: Digit, domain: Interval, law: BranchLaw) -> Branch {
        let at_lo = law.eval(domain.lo());
        let at_hi = law.eval(domain.hi());
        let mono = match at_lo.cmp_same(&at_hi) {
            Ordering::Greater => Monotonicity::Decreasing,
            _ => Monotonicity::Increasing,
        };
        let image = Interval::from_unordered(at_lo, domain.lo_kind(), at_hi, domain.hi_kind())
            .unwrap_or_else(|| domain.clone());
        Branch { digit, domain, mono, law, image }
    }

    pub fn digit(&self) -> Digit {
        self.digit
    }

    /// `Δ(d)` with its endpoint kinds.
    pub fn domain(&self) -> &Interval {
        &self.domain
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.mono
    }

    pub fn law(&self) -> &BranchLaw {
        &self.law
    }

    /// `F(Δ(d))` with endpoint kinds carried over from the domain.
    pub fn image(&self) -> &Interval {
        &self.image
    }

    pub fn is_full(&self) -> bool {
        self.image.lo().is_zero() && (self.image.hi() - &self.image.hi().from_int(1)).is_zero()
    }

    pub fn forward(&self, x: &Scalar) -> Scalar {
        self.law.eval(x)
    }

    pub fn inverse(&self, y: &Scalar) -> Scalar {
        self.law.invert(y)
    }

    /// `f_d`: the branch inverse on the closed image hull, constant at the
    /// matching endpoint of the closed cell outside it. Continuous and
    /// monotone on `[0, 1]`.
    pub fn f_d(&self, y: &Scalar) -> Scalar {
        let increasing = self.mono.is_increasing();
        if y.cmp_same(self.image.lo()) != Ordering::Greater {
            return if increasing { self.domain.lo().clone() } else { self.domain.hi().clone() };
        }
        if y.cmp_same(self.image.hi()) != Ordering::Less {
            return if increasing { self.domain.hi().clone() } else { self.domain.lo().clone() };
        }
        self.inverse(y)
    }

    /// Image of a subinterval of the cell, endpoint kinds preserved.
    pub fn map_interval(&self, piece: &Interval) -> Interval {
        let a = self.forward(piece.lo());
        let b = self.forward(piece.hi());
        Interval::from_unordered(a, piece.lo_kind(), b, piece.hi_kind())
            .unwrap_or_else(|| Interval::point(self.forward(piece.lo())))
    }
}
