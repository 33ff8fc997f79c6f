//! Reproducible random streams split from one master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Stream `stream_id` of the ChaCha8 generator seeded with `master_seed`.
/// Distinct stream ids give independent, reproducible sequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        RngStream {
            master_seed,
            stream_id,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Per-attempt vertex cap and per-sample attempt cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleBudget {
    pub max_vertices: usize,
    pub max_attempts: u64,
}

impl Default for SampleBudget {
    fn default() -> Self {
        SampleBudget {
            max_vertices: 10_000_000,
            max_attempts: 100_000_000,
        }
    }
}

impl SampleBudget {
    pub fn new(max_vertices: usize, max_attempts: u64) -> Self {
        assert!(
            max_vertices > 0 && max_attempts > 0,
            "budgets must be positive"
        );
        SampleBudget {
            max_vertices,
            max_attempts,
        }
    }
}
