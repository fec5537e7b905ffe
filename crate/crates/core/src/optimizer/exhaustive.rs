use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::link::{cascade_matrix, unit_phasor, LinkBudget, PhaseConfig};
use crate::{CVector, Complex64};

/// Largest search space `brute_force` accepts by default.
pub const DEFAULT_SEARCH_BUDGET: u64 = 1_000_000;

/// Globally optimal phase configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub phases: PhaseConfig,
    /// `||h_d + H_r Theta h_v||^2` at the optimum.
    pub gain: f64,
    pub rate: f64,
}

/// Exhaustive search over all `L^N` phase configurations.
///
/// The gain of every candidate is evaluated directly from the effective
/// channel, not from the quadratic form, so the search doubles as an
/// independent reference for the refinement. Candidates are visited in
/// lexicographic order and only a strictly larger gain replaces the incumbent,
/// so ties resolve to the lexicographically smallest configuration.
pub fn brute_force(
    channels: &ChannelSet,
    budget: &LinkBudget,
    levels: usize,
    search_budget: u64,
) -> Result<Optimum> {
    channels.check()?;
    if levels == 0 {
        return Err(Error::ZeroLevels);
    }
    let n = channels.n();
    let size = u32::try_from(n)
        .ok()
        .and_then(|e| (levels as u64).checked_pow(e));
    match size {
        Some(s) if s <= search_budget => {}
        _ => {
            return Err(Error::BudgetExceeded {
                levels,
                elements: n,
                size: size.map_or_else(|| "more than 2^64".to_owned(), |s| s.to_string()),
                budget: search_budget,
            })
        }
    }

    let phi = cascade_matrix(channels);
    let table: Vec<Complex64> = (0..levels).map(|k| unit_phasor(k, levels)).collect();
    let gain_of = |idx: &[usize]| {
        let mut h: CVector = channels.h_d.clone();
        for (j, &k) in idx.iter().enumerate() {
            h.axpy(table[k], &phi.column(j), Complex64::new(1.0, 0.0));
        }
        h.norm_squared()
    };

    let mut idx = vec![0usize; n];
    let mut best = idx.clone();
    let mut best_gain = gain_of(&idx);
    // Odometer with the last element running fastest: lexicographic order.
    'outer: loop {
        let mut pos = n;
        loop {
            if pos == 0 {
                break 'outer;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < levels {
                break;
            }
            idx[pos] = 0;
        }
        let g = gain_of(&idx);
        if g > best_gain {
            best_gain = g;
            best.copy_from_slice(&idx);
        }
    }

    Ok(Optimum {
        phases: PhaseConfig::new(best, levels)?,
        gain: best_gain,
        rate: budget.rate(best_gain),
    })
}
