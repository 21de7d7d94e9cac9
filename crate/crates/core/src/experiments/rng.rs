use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Fixed stream identifiers under the master seed. A new purpose takes a new id,
/// so existing draws never shift.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    MicroInitialData = 1,
    MicroNodes = 2,
    MeanFieldNodes = 3,
    MeanFieldSampling = 4,
    Consistency = 5,
    StaticControlData = 6,
}

/// ChaCha8 keyed by the master seed, positioned on the purpose's stream.
pub fn stream_rng(master: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream as u64);
    rng
}

/// A 64-bit seed drawn from the purpose's stream, for APIs that take a seed.
pub fn stream_seed(master: u64, stream: Stream) -> u64 {
    rand::Rng::random(&mut stream_rng(master, stream))
}
