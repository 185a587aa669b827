use std::time::Duration;

use serde::{Deserialize, Serialize};

/// Enumeration and search limits. Every oracle refuses work beyond these with
/// `BudgetExceeded` instead of sampling.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    /// Group elements, or elements of `Π(G)`, an enumeration may visit.
    pub elements: u64,
    /// Elements of `Δ(G)` an oracle may enumerate.
    pub delta: u64,
    /// `Δ(G)` size allowed when searching a single-block section.
    pub section_delta: u64,
    /// Generator-lift assignments a complement search may try.
    pub assignments: u64,
    /// Wall-clock limit for a complement search.
    pub wall_clock: Option<Duration>,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            elements: 1 << 20,
            delta: 1 << 16,
            section_delta: 1 << 20,
            assignments: 1 << 24,
            wall_clock: None,
        }
    }
}

/// Seed used when no seed is given.
pub const DEFAULT_SEED: u64 = 0x5eed_0f_a0_7;
