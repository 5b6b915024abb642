use serde::{Deserialize, Serialize};

/// Iteration budgets for Green's function evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct IterationCaps {
    /// Steps at the archimedean place.
    pub arch: usize,
    /// Steps at each finite place.
    pub padic: usize,
    /// Exact iterates longer than this many bits are replaced by enclosures.
    pub exact_bits: u64,
}

impl Default for IterationCaps {
    fn default() -> Self {
        Self { arch: 64, padic: 32, exact_bits: 4096 }
    }
}
