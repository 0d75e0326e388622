use rand::rngs::ChaCha8Rng;
use rand::SeedableRng;

/// Independent random streams derived from one master seed. Each concern
/// draws only from its own stream, so e.g. changing the number of
/// Monte-Carlo iterations cannot perturb the epidemic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Graph = 1,
    Init = 2,
    Contacts = 3,
    Disease = 4,
    Devices = 5,
    Policy = 6,
    Tests = 7,
    Ppto = 8,
}

pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
