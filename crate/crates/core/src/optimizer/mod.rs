//! Discrete phase optimization of the IRS reflection coefficients.

mod exhaustive;
mod refinement;
mod schemes;

pub use exhaustive::{brute_force, Optimum, DEFAULT_SEARCH_BUDGET};
pub use refinement::{successive_refinement, RefinementReport};
pub use schemes::{
    optimize_grouped, optimize_position_based, optimize_with_estimate, GroupingSpec,
};

pub(crate) use refinement::refine;

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::link::{phase_of, PhaseConfig};

/// `{k 2 pi / L : k = 0..L-1}`.
pub fn phase_set(levels: usize) -> Result<Vec<f64>> {
    if levels == 0 {
        return Err(Error::ZeroLevels);
    }
    Ok((0..levels).map(|k| phase_of(k, levels)).collect())
}

/// Angular distance on the circle, in `[0, pi]`.
pub(crate) fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        TAU - d
    } else {
        d
    }
}

/// Index of the level in the phase set closest to `target` on the circle.
///
/// Ties go to the smaller index.
pub fn quantize_phase(target: f64, levels: usize) -> usize {
    debug_assert!(levels >= 1);
    let mut best = 0;
    let mut best_dist = circular_distance(target, 0.0);
    for k in 1..levels {
        let d = circular_distance(target, phase_of(k, levels));
        if d < best_dist {
            best = k;
            best_dist = d;
        }
    }
    best
}

/// Starting point of a refinement run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Initialization {
    /// Every phase set to zero.
    #[default]
    Zero,
    /// Independent uniform indices drawn from a seeded generator.
    Random { seed: u64 },
}

impl Initialization {
    pub fn phases(self, n: usize, levels: usize) -> Result<PhaseConfig> {
        match self {
            Initialization::Zero => PhaseConfig::zeros(n, levels),
            Initialization::Random { seed } => {
                if levels == 0 {
                    return Err(Error::ZeroLevels);
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                PhaseConfig::new((0..n).map(|_| rng.gen_range(0..levels)).collect(), levels)
            }
        }
    }
}

/// Settings shared by every refinement-based scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinementOptions {
    /// Number of discrete phase levels `L`.
    pub levels: usize,
    /// Stop once consecutive rates differ by at most this many bit/s/Hz.
    pub epsilon: f64,
    pub max_outer_iters: usize,
    pub init: Initialization,
}

impl Default for RefinementOptions {
    fn default() -> Self {
        Self {
            levels: 4,
            epsilon: 1e-6,
            max_outer_iters: 100,
            init: Initialization::Zero,
        }
    }
}

impl RefinementOptions {
    pub fn with_levels(levels: usize) -> Self {
        Self {
            levels,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::ZeroLevels);
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidOption(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}
