//! Counter-based random streams: trial `t` of cell `c` always sees the same
//! numbers no matter which worker runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// Words reserved per trial; far more than any pipeline consumes.
const WORDS_PER_TRIAL_LOG2: u32 = 32;

/// Stream for one trial, keyed by (master seed, cell index, trial index).
pub fn trial_rng(master_seed: u64, cell: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(cell);
    rng.set_word_pos((trial as u128) << WORDS_PER_TRIAL_LOG2);
    rng
}

/// Stream ids at or above this value are reserved for auxiliary draws
/// (e.g. Monte Carlo decision priors) so they never collide with cells.
pub const AUX_STREAM_BASE: u64 = 1 << 62;
