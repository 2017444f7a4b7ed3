use std::fmt;

use serde::{Deserialize, Serialize};

use crate::pim::Digit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum WordStatus {
    Complete,
    /// The orbit left the domain; digit number `step` could not be read.
    Terminated { step: usize },
}

/// A finite digit string, usually the truncation of a point's name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    pub digits: Vec<Digit>,
    #[serde(flatten)]
    pub status: WordStatus,
}

impl Word {
    pub fn new(digits: Vec<Digit>) -> Self {
        Word { digits, status: WordStatus::Complete }
    }

    pub fn terminated(digits: Vec<Digit>, step: usize) -> Self {
        Word { digits, status: WordStatus::Terminated { step } }
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.status == WordStatus::Complete
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word::new(self.digits[..n.min(self.digits.len())].to_vec())
    }

    /// `self` followed by `d`.
    pub fn extended(&self, d: Digit) -> Word {
        let mut digits = Vec::with_capacity(self.digits.len() + 1);
        digits.extend_from_slice(&self.digits);
        digits.push(d);
        Word::new(digits)
    }

    /// Repeats the digit block `times` times.
    pub fn repeat(block: &[Digit], times: usize) -> Word {
        Word::new(block.repeat(times))
    }
}

impl From<Vec<Digit>> for Word {
    fn from(digits: Vec<Digit>) -> Self {
        Word::new(digits)
    }
}

impl From<&[Digit]> for Word {
    fn from(digits: &[Digit]) -> Self {
        Word::new(digits.to_vec())
    }
}

/// `.d1 d2 d3`, with single-character digits run together.
impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(".")?;
        let compact = self.digits.iter().all(|d| (0..10).contains(d));
        for (i, d) in self.digits.iter().enumerate() {
            if i > 0 && !compact {
                f.write_str(" ")?;
            }
            write!(f, "{d}")?;
        }
        if let WordStatus::Terminated { step } = self.status {
            write!(f, " (terminated at {step})")?;
        }
        Ok(())
    }
}
