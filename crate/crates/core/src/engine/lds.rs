//! Randomly shifted Sobol points for the path-independent estimators.
//!
//! Point `i` is computed directly from its Gray code, so each path can be
//! generated independently of the others. A digital shift drawn from the
//! master seed randomizes the sequence.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sobol::params::JoeKuoD6;
use sobol::Sobol;
use statrs::function::erf::erfc_inv;

use super::rng::NormalSource;

const RESOLUTION: usize = 53;
const DROP_BITS: u32 = 64 - RESOLUTION as u32;

#[derive(Debug, Clone)]
pub struct SobolSequence {
    dims: usize,
    directions: Vec<Vec<u64>>,
    shifts: Vec<u64>,
}

impl SobolSequence {
    /// Largest supported dimension.
    pub const MAX_DIMS: usize = 21_200;

    pub fn new(dims: usize, seed: u64) -> Option<Self> {
        if dims == 0 || dims > Self::MAX_DIMS {
            return None;
        }
        let params = if dims < 1000 {
            JoeKuoD6::standard()
        } else {
            JoeKuoD6::extended()
        };
        let directions = Sobol::<f64>::init_direction_vals::<u32>(dims, RESOLUTION, &params);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask = !((1u64 << DROP_BITS) - 1);
        let shifts = (0..dims).map(|_| rng.next_u64() & mask).collect();
        Some(Self {
            dims,
            directions,
            shifts,
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Shifted point `index` mapped to the open unit cube.
    pub fn point(&self, index: u64) -> Vec<f64> {
        let gray = index ^ (index >> 1);
        self.directions
            .iter()
            .zip(&self.shifts)
            .map(|(dirs, shift)| {
                let mut bits = gray;
                let mut acc = *shift;
                let mut j = 0;
                while bits != 0 && j < RESOLUTION {
                    if bits & 1 == 1 {
                        acc ^= dirs[j];
                    }
                    bits >>= 1;
                    j += 1;
                }
                ((acc >> DROP_BITS) as f64 + 0.5) * (1.0 / (1u64 << RESOLUTION) as f64)
            })
            .collect()
    }

    /// Gaussian draws of point `index`, one per dimension.
    pub fn normals(&self, index: u64) -> SobolNormals {
        let draws = self.point(index).into_iter().map(inverse_norm_cdf).collect();
        SobolNormals { draws, pos: 0 }
    }
}

/// Inverse of the standard normal distribution function on `(0, 1)`: a
/// starting guess from `erfc_inv`, polished by two Halley steps.
pub fn inverse_norm_cdf(u: f64) -> f64 {
    use std::f64::consts::{PI, SQRT_2};
    let mut z = -SQRT_2 * erfc_inv(2.0 * u);
    for _ in 0..2 {
        if !z.is_finite() {
            break;
        }
        let err = 0.5 * libm::erfc(-z / SQRT_2) - u;
        let t = err * (2.0 * PI).sqrt() * (0.5 * z * z).exp();
        z -= t / (1.0 + 0.5 * z * t);
    }
    z
}

#[derive(Debug, Clone)]
pub struct SobolNormals {
    draws: Vec<f64>,
    pos: usize,
}

impl NormalSource for SobolNormals {
    #[inline]
    fn next_normal(&mut self) -> f64 {
        let z = self.draws[self.pos];
        self.pos += 1;
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unshifted_points_match_the_iterator() {
        let params = JoeKuoD6::standard();
        let mut seq = SobolSequence::new(5, 0).unwrap();
        seq.shifts.iter_mut().for_each(|s| *s = 0);
        let reference: Vec<Vec<f64>> = Sobol::<f64>::new(5, &params).take(64).collect();
        for (i, want) in reference.iter().enumerate() {
            let got = seq.point(i as u64);
            for (g, w) in got.iter().zip(want) {
                assert!((g - w).abs() <= 1.0 / (1u64 << RESOLUTION) as f64, "point {i}");
            }
        }
    }

    #[test]
    fn coordinates_are_stratified() {
        // first 2^10 points hit each of 2^10 cells of every coordinate once
        let seq = SobolSequence::new(8, 99).unwrap();
        let mut seen = vec![vec![false; 1024]; 8];
        for i in 0..1024 {
            for (d, u) in seq.point(i).into_iter().enumerate() {
                assert!(u > 0.0 && u < 1.0);
                let cell = (u * 1024.0) as usize;
                assert!(!seen[d][cell]);
                seen[d][cell] = true;
            }
        }
    }

    #[test]
    fn inverse_cdf_roundtrip() {
        for u in [1e-10, 0.01, 0.3, 0.5, 0.975, 0.999999] {
            let z = inverse_norm_cdf(u);
            let back = 0.5 * libm::erfc(-z / std::f64::consts::SQRT_2);
            assert!((back - u).abs() < 1e-12 * u.max(1e-3), "{u}");
        }
        assert!((inverse_norm_cdf(0.975) - 1.959963984540054).abs() < 1e-9);
    }

    #[test]
    fn dimension_limits() {
        assert!(SobolSequence::new(0, 1).is_none());
        assert!(SobolSequence::new(SobolSequence::MAX_DIMS + 1, 1).is_none());
    }
}
