//! Seeded random streams: per-subsystem seed derivation, an exact Poisson
//! inversion sampler, and the radar status stream with its jamming
//! injection model.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Derives an independent stream seed from the root seed, a subsystem
/// label and an index (FNV-1a), so adding a subsystem never perturbs the
/// draws of another.
pub fn derive_seed(root: u64, label: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |byte: u8| {
        h ^= byte as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    };
    for b in root.to_le_bytes() {
        eat(b);
    }
    for b in label.bytes() {
        eat(b);
    }
    for b in index.to_le_bytes() {
        eat(b);
    }
    h
}

pub fn stream_rng(root: u64, label: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, label, index))
}

/// Poisson variate by inversion (sequential search of the CDF). Exact for
/// the means used here and free of distribution-crate dependencies.
pub fn poisson(rng: &mut ChaCha8Rng, lambda: f64) -> u64 {
    let u: f64 = rng.random();
    let mut p = (-lambda).exp();
    let mut cdf = p;
    let mut k: u64 = 0;
    while u > cdf {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
        if k > 100_000 {
            break;
        }
    }
    k
}

/// Jamming injection model: a seeded two-state on/off process with a 40%
/// duty cycle (mean on-interval 2.5 ticks, mean off-interval 3.75 ticks);
/// while an interval is on, the status count is drawn from
/// Poisson(20 * (1 + scale)) instead of Poisson(20).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JamInjection {
    pub enabled: bool,
    pub scale: f64,
}

impl Default for JamInjection {
    fn default() -> Self {
        Self {
            enabled: false,
            scale: 1.0,
        }
    }
}

impl JamInjection {
    pub fn on() -> Self {
        Self {
            enabled: true,
            scale: 1.0,
        }
    }
}

pub const STATUS_MEAN: f64 = 20.0;
const JAM_EXIT_PROB: f64 = 0.4; // mean on-interval 2.5 ticks
const JAM_ENTER_PROB: f64 = 4.0 / 15.0; // stationary duty cycle 40%

/// The radar status stream `n_t`: `ticks` Poisson(20) counts, with
/// injected jamming intervals perturbing the mean per the injection
/// model. Deterministic per seed.
pub fn generate_status_stream(seed: u64, ticks: u64, injection: JamInjection) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jamming = false;
    let mut out = Vec::with_capacity(ticks as usize);
    for _ in 0..ticks {
        if injection.enabled {
            let u: f64 = rng.random();
            jamming = if jamming {
                u >= JAM_EXIT_PROB
            } else {
                u < JAM_ENTER_PROB
            };
        }
        let lambda = if jamming {
            STATUS_MEAN * (1.0 + injection.scale)
        } else {
            STATUS_MEAN
        };
        out.push(poisson(&mut rng, lambda) as f64);
    }
    out
}
