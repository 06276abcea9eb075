//! Counter-based random streams keyed by (experiment, seed, purpose).

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// What a random stream is used for; each purpose gets an independent stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Purpose {
    Dipole,
    Target,
    Field,
    Haar,
    Other(u32),
}

impl Purpose {
    fn id(self) -> u64 {
        match self {
            Purpose::Dipole => 1,
            Purpose::Target => 2,
            Purpose::Field => 3,
            Purpose::Haar => 4,
            Purpose::Other(k) => 0x1_0000_0000 | u64::from(k),
        }
    }
}

pub fn stream(experiment: u64, seed: u64, purpose: Purpose) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&experiment.to_le_bytes());
    key[8..16].copy_from_slice(&seed.to_le_bytes());
    key[16..24].copy_from_slice(b"ucl-rng\0");
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(purpose.id());
    rng
}
