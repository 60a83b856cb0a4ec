use std::time::{Duration, Instant};

/// Resource limits for the search-based procedures.
#[derive(Clone, Debug, PartialEq)]
pub struct Budget {
    /// Wall-clock limit for one decision.
    pub time: Duration,
    /// Node limit for branch and bound.
    pub bb_nodes: usize,
    /// Random restarts of the alternating witness search.
    pub starts: usize,
    /// Alternations per restart.
    pub alternations: usize,
    /// Restarts of the psd factorization heuristic.
    pub psd_starts: usize,
    pub seed: u64,
    /// Residual below which a floating-point candidate is handed to exactification.
    pub tol: f64,
    /// Largest `rows(L)·(c-1) + rows(R)·(b-1)` handed to branch and bound.
    pub max_free_dims: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            time: Duration::from_secs(60),
            bb_nodes: 1_000_000,
            starts: 32,
            alternations: 200,
            psd_starts: 64,
            seed: 0,
            tol: 1e-9,
            max_free_dims: 24,
        }
    }
}

impl Budget {
    pub fn with_time(mut self, time: Duration) -> Self {
        self.time = time;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Small limits for screening-style calls.
    pub fn quick() -> Self {
        Self {
            time: Duration::from_millis(500),
            bb_nodes: 2_000,
            starts: 8,
            alternations: 50,
            psd_starts: 8,
            ..Self::default()
        }
    }
}

/// Deadline derived from a budget at the moment work starts.
#[derive(Clone, Copy, Debug)]
pub struct Deadline(Instant);

impl Deadline {
    pub fn after(d: Duration) -> Self {
        Self(Instant::now() + d)
    }

    pub fn expired(&self) -> bool {
        Instant::now() >= self.0
    }

    pub fn remaining(&self) -> Duration {
        self.0.saturating_duration_since(Instant::now())
    }
}
