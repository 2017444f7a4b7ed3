//! Expansions of points under piecewise monotone interval maps.
//!
//! A map is given as a partition of `[0, 1)` into cells with a strictly
//! monotone branch on each. From there the crate computes digit names of
//! points, cylinder sets and their refinement, orbit and preimage density
//! diagnostics, and language properties of the induced subshift.
//!
//! ```
//! use fexlab::{representation, Pim, PimSpec, Scalar};
//!
//! let doubling = Pim::build(PimSpec::beta(Scalar::ratio(2, 1))).unwrap();
//! let w = representation::encode(&doubling, &Scalar::ratio(5, 8), 3).unwrap();
//! assert_eq!(w.digits, vec![1, 0, 1]);
//! let hull = representation::decode(&doubling, &w.digits).unwrap();
//! assert_eq!(hull.midpoint(), Scalar::ratio(11, 16));
//! ```

pub mod error;
pub mod interval;
pub mod pim;
pub mod representation;
pub mod scalar;
pub mod shift;
pub mod transitivity;
pub mod word;

pub use error::{Error, Result};
pub use interval::{epsilon_dense, merge_intervals, EndKind, Interval, IntervalPartition};
pub use pim::{Branch, Digit, EgyptianSequence, ImageSet, MapKind, MapSpec, Monotonicity, Pim, PimSpec, Preimages};
pub use representation::{
    classical_f_expand, cylinder, decode, encode, f_expand, flip_lex_compare, refinement_norm, refinement_norm_with,
    FlipLex, FundamentalInterval, RefinementConfig, RefinementReport, RefinementVerdict, Seed, DEFAULT_NODE_BUDGET,
};
pub use scalar::{Backend, Scalar, EPS_NUM};
pub use shift::{
    admissible_words, is_tt_language, language_contains, two_sided_tt_equiv, LanguageOracle, Sft, TtVerdict,
};
pub use transitivity::{
    backward_tree, classify_homterval, forward_orbit, ptt_estimate, tt_estimate, Classification, DensityReport,
    HomtervalVerdict, Orbit, PreimageTree,
};
pub use word::{Word, WordStatus};
