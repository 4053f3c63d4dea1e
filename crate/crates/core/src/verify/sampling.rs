//! Seeded random configurations and parameters.
//!
//! Every sample gets its own seed derived from the base seed and its index,
//! so suites can be evaluated in parallel and in any order.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::Configuration;

/// A configuration together with the seed it was drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub seed: u64,
    pub config: Configuration,
}

/// SplitMix64 step; decorrelates consecutive indices.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One configuration of `count` points in `(margin, 2π − margin)` with
/// `margin = min_sep/2`, consecutive gaps ≥ `min_sep`, sorted decreasing.
pub fn draw_configuration<R: Rng>(rng: &mut R, count: usize, min_sep: f64) -> Result<Configuration> {
    if !(min_sep > 0.0) {
        return Err(Error::Constraint(format!("min_sep must be positive, got {min_sep}")));
    }
    let margin = min_sep / 2.0;
    let slack = TAU - 2.0 * margin - count.saturating_sub(1) as f64 * min_sep;
    if !(slack > 0.0) {
        return Err(Error::InfeasiblePacking { count, min_sep });
    }
    let mut u: Vec<f64> = (0..count).map(|_| rng.gen::<f64>() * slack).collect();
    u.sort_by(f64::total_cmp);
    let mut coords: Vec<f64> = u
        .iter()
        .enumerate()
        .map(|(i, ui)| margin + ui + i as f64 * min_sep)
        .collect();
    coords.reverse();
    Configuration::new(coords, min_sep)
}

/// `samples` reproducible configurations; sample `i` uses seed
/// `derive_seed(seed, i)`.
pub fn sample_configurations(count: usize, min_sep: f64, samples: usize, seed: u64) -> Result<Vec<Sample>> {
    (0..samples as u64)
        .map(|i| {
            let s = derive_seed(seed, i);
            draw_configuration(&mut rng_for(s), count, min_sep).map(|config| Sample { seed: s, config })
        })
        .collect()
}

/// Coupling drawn from the annulus 0.3 ≤ |λ| ≤ 3 with a uniform phase.
pub fn random_lambda<R: Rng>(rng: &mut R) -> Complex64 {
    let modulus = rng.gen_range(0.3..=3.0);
    Complex64::from_polar(modulus, rng.gen_range(-PI..PI))
}

/// A mass of modulus in [0.3, 2]; real (either sign) or complex with
/// equal probability.
pub fn random_mass<R: Rng>(rng: &mut R) -> Complex64 {
    let modulus = rng.gen_range(0.3..=2.0);
    if rng.gen_bool(0.5) {
        Complex64::new(if rng.gen_bool(0.5) { modulus } else { -modulus }, 0.0)
    } else {
        Complex64::from_polar(modulus, rng.gen_range(-PI..PI))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::periodic_distance;

    #[test]
    fn deterministic() {
        let a = sample_configurations(2, 0.2, 3, 7).unwrap();
        let b = sample_configurations(2, 0.2, 3, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0].config, a[1].config);
        assert_ne!(a, sample_configurations(2, 0.2, 3, 8).unwrap());
    }

    #[test]
    fn infeasible_packing() {
        assert_eq!(
            sample_configurations(5, 1.5, 1, 1),
            Err(Error::InfeasiblePacking { count: 5, min_sep: 1.5 })
        );
    }

    #[test]
    fn separated_and_ordered() {
        for s in sample_configurations(6, 0.2, 200, 11).unwrap() {
            let x = s.config.coords();
            for a in 0..x.len() {
                assert!(x[a] > 0.1 && x[a] < TAU - 0.1);
                for b in a + 1..x.len() {
                    let d = x[a] - x[b];
                    assert!(d > 0.2 && d < TAU - 0.2, "{x:?}");
                    assert!(periodic_distance(d) >= 0.2);
                }
            }
        }
    }

    #[test]
    fn parameter_ranges() {
        let mut rng = rng_for(3);
        for _ in 0..500 {
            let l = random_lambda(&mut rng).norm();
            assert!((0.3..=3.0 + 1e-12).contains(&l));
            let m = random_mass(&mut rng).norm();
            assert!((0.3 - 1e-12..=2.0 + 1e-12).contains(&m));
        }
    }
}
