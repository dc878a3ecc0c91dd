//! Deterministic random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// The generator for one `(experiment, n, replica)` cell. The master seed fixes the
/// key and the cell label selects an independent ChaCha stream, so results do not
/// depend on scheduling order.
pub fn stream_rng(master_seed: u64, label: &str, n: u64, replica: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(label.as_bytes());
    h.update([0u8]);
    h.update(n.to_le_bytes());
    h.update(replica.to_le_bytes());
    let stream = u64::from_le_bytes(h.finalize()[..8].try_into().unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// A child generator seeded from `rng`, for handing work to another thread.
pub fn fork(rng: &mut impl rand::RngCore) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(rng.next_u64())
}
