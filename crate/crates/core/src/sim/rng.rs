use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type NodeRng = ChaCha8Rng;

/// Private random stream of the node with identifier `id`. Distinct
/// `run_index` values give independent streams for parallel runs.
pub fn node_rng(seed: u64, id: u128, run_index: u64) -> NodeRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..24].copy_from_slice(&id.to_le_bytes());
    key[24..].copy_from_slice(b"nodestrm");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(run_index);
    rng
}
