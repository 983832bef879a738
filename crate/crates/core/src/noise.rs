//! Seeded Laplace noise.
//!
//! Generator contract (stable within a major version): each player owns a
//! ChaCha20 stream keyed by `ChaCha20Rng::seed_from_u64(master_seed)` with
//! stream id equal to the player index. The draw for iteration `l` reads the
//! 64-bit word at block position `2 l`, so a `(seed, player, iteration)`
//! triple always yields the same sample, independent of call order.

use alloc::vec::Vec;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::math::{abs, ln, unit_open};
use crate::schedule::ScheduleSet;

/// Whether the privacy mechanism is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseMode {
    #[default]
    On,
    /// Mechanism disabled: transmitted estimates are sent unperturbed.
    ZeroNoise,
}

#[derive(Debug, Clone)]
pub struct NoiseStream {
    seed: u64,
    player: usize,
    rng: ChaCha20Rng,
}

impl NoiseStream {
    pub fn new(seed: u64, player: usize) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(player as u64);
        Self { seed, player, rng }
    }

    /// One stream per player, all derived from `seed`.
    pub fn for_players(seed: u64, n: usize) -> Vec<Self> {
        (0..n).map(|i| Self::new(seed, i)).collect()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn player(&self) -> usize {
        self.player
    }

    /// Positions the stream at the draw for `iteration`.
    pub fn seek(&mut self, iteration: usize) {
        self.rng.set_word_pos(2 * iteration as u128);
    }

    /// Uniform draw on the open interval `(-1/2, 1/2)`.
    fn next_centered(&mut self) -> f64 {
        unit_open(self.rng.next_u64()) - 0.5
    }

    /// Next draw from `Lap(b)`, advancing the stream by one position.
    pub fn sample_laplace(&mut self, b: f64) -> Result<f64> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::InvalidScale(b));
        }
        let u = self.next_centered();
        Ok(laplace_from_uniform(u, b))
    }

    /// Draw from `Lap(b)` for a given iteration.
    pub fn sample_at(&mut self, iteration: usize, b: f64) -> Result<f64> {
        self.seek(iteration);
        self.sample_laplace(b)
    }
}

/// Inverse CDF: `-b sign(u) ln(1 - 2|u|)` for `u` in `(-1/2, 1/2)`.
pub fn laplace_from_uniform(u: f64, b: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    -b * u.signum() * ln(1.0 - 2.0 * abs(u))
}

/// CDF of `Lap(b)`.
pub fn laplace_cdf(x: f64, b: f64) -> f64 {
    if x < 0.0 {
        0.5 * crate::math::exp(x / b)
    } else {
        1.0 - 0.5 * crate::math::exp(-x / b)
    }
}

/// `epsilon_i(l) ~ Lap(b_i(l))` for every player, or zeros when the
/// mechanism is disabled.
pub fn noise_vector(
    streams: &mut [NoiseStream],
    s: &ScheduleSet,
    l: usize,
    mode: NoiseMode,
) -> Result<Vec<f64>> {
    if streams.len() != s.n() {
        return Err(Error::DimensionMismatch {
            expected: s.n(),
            got: streams.len(),
        });
    }
    match mode {
        NoiseMode::ZeroNoise => Ok(alloc::vec![0.0; streams.len()]),
        NoiseMode::On => streams
            .iter_mut()
            .enumerate()
            .map(|(i, st)| st.sample_at(l, s.b(i, l)))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_draw_is_zero() {
        assert_eq!(laplace_from_uniform(0.0, 3.0), 0.0);
    }

    #[test]
    fn rejects_bad_scale() {
        let mut s = NoiseStream::new(1, 0);
        assert_eq!(s.sample_laplace(0.0), Err(Error::InvalidScale(0.0)));
        assert!(s.sample_laplace(-1.0).is_err());
        assert!(s.sample_laplace(f64::NAN).is_err());
    }

    #[test]
    fn draws_are_addressed_by_iteration() {
        let mut a = NoiseStream::new(42, 3);
        let mut b = NoiseStream::new(42, 3);
        let late = a.sample_at(10, 1.0).unwrap();
        let early = a.sample_at(2, 1.0).unwrap();
        assert_eq!(b.sample_at(2, 1.0).unwrap(), early);
        assert_eq!(b.sample_at(10, 1.0).unwrap(), late);
    }

    #[test]
    fn players_get_distinct_streams() {
        let x = NoiseStream::new(7, 0).sample_at(0, 1.0).unwrap();
        let y = NoiseStream::new(7, 1).sample_at(0, 1.0).unwrap();
        assert_ne!(x, y);
    }

    #[test]
    fn zero_noise_mode() {
        let s = ScheduleSet::remark5(3, 0.6).unwrap();
        let mut streams = NoiseStream::for_players(1, 3);
        let v = noise_vector(&mut streams, &s, 0, NoiseMode::ZeroNoise).unwrap();
        assert_eq!(v, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn scale_follows_schedule() {
        // b(0) = 2: the draw equals the unit-scale draw times two
        let s = ScheduleSet::remark5(2, 0.6).unwrap();
        let mut streams = NoiseStream::for_players(9, 2);
        let v = noise_vector(&mut streams, &s, 0, NoiseMode::On).unwrap();
        for (i, x) in v.iter().enumerate() {
            let unit = NoiseStream::new(9, i).sample_at(0, 1.0).unwrap();
            assert!(abs(x - 2.0 * unit) < 1e-12);
        }
    }

    #[test]
    fn cdf_endpoints() {
        assert_eq!(laplace_cdf(0.0, 1.0), 0.5);
        assert!(laplace_cdf(-50.0, 1.0) < 1e-20);
    }
}
