use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for stream `stream` of a run seeded with `seed`.
///
/// Streams are independent, so work split by stream index gives the same
/// draws regardless of how many workers process it.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
