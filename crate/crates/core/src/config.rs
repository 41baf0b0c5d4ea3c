use serde::{Deserialize, Serialize};

use crate::par::Execution;

/// Tolerances and budgets that the mathematics leaves open.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Convergence and invariance tolerance for numeric paths.
    pub tol: f64,
    /// Maximum number of averaging terms.
    pub n_max: usize,
    /// Maximum word length explored for group orbits.
    pub word_budget: usize,
    /// Largest number of candidate columns `(2M+1)^n` a search may enumerate.
    pub search_budget: u64,
    /// Constant `c` of the perturbation radius `c / sqrt(n)` in the sampling oracle.
    pub oracle_c: f64,
    /// Step budget for orbit iteration and exact period detection.
    pub max_steps: usize,
    /// Cap on element orders probed through exact powers.
    pub order_cap: u64,
    pub execution: Execution,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            tol: 1e-9,
            n_max: 100_000,
            word_budget: 8,
            search_budget: 10_000_000,
            oracle_c: 1.0,
            max_steps: 1_000_000,
            order_cap: 1_000,
            execution: Execution::default(),
        }
    }
}
