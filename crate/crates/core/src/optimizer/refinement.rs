use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::link::{
    build_quadratic_form, reflection_vector, unit_phasor, LinkBudget, PhaseConfig, QuadraticForm,
};
use crate::Complex64;

use super::{quantize_phase, RefinementOptions};

/// Outcome of a successive-refinement run.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementReport {
    pub final_phases: PhaseConfig,
    /// Rate after each outer iteration; entry 0 is the rate at the initial phases.
    pub rate_trace: Vec<f64>,
    /// Number of outer sweeps performed.
    pub iterations: usize,
    pub converged: bool,
}

impl RefinementReport {
    pub fn final_rate(&self) -> f64 {
        *self
            .rate_trace
            .last()
            .expect("trace always holds the initial rate")
    }
}

/// Cyclic coordinate ascent over the elements with discrete phases.
///
/// Each sweep visits every element once and moves it to the level nearest to
/// the phase of its local coefficient `kappa_n`. A move is only taken if it
/// strictly increases `Re{conj(v_n) kappa_n}`, so the gain never decreases;
/// with `kappa_n = 0` the element is left alone. `A v` is kept up to date
/// incrementally inside a sweep and recomputed from scratch at its start.
///
/// When `history` is given, the phases after every sweep are appended to it
/// (the initial phases first), aligned with `rate_trace`.
pub(crate) fn refine(
    form: &QuadraticForm,
    budget: &LinkBudget,
    opts: &RefinementOptions,
    init: &PhaseConfig,
    mut history: Option<&mut Vec<PhaseConfig>>,
) -> Result<RefinementReport> {
    opts.validate()?;
    let n = form.n();
    if init.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "initial phases have {} elements but the problem has {n}",
            init.len()
        )));
    }
    if init.levels() != opts.levels {
        return Err(Error::InvalidOption(format!(
            "initial phases use {} levels but the optimizer is set to {}",
            init.levels(),
            opts.levels
        )));
    }
    let levels = opts.levels;
    let table: Vec<Complex64> = (0..levels).map(|k| unit_phasor(k, levels)).collect();

    let mut phases = init.clone();
    let mut v = reflection_vector(&phases);
    let mut trace = vec![budget.rate(form.gain(&v))];
    if let Some(h) = history.as_deref_mut() {
        h.push(phases.clone());
    }
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_outer_iters {
        let mut av = &form.a * &v;
        for i in 0..n {
            let kappa = av[i] - form.a[(i, i)] * v[i] + form.b[i];
            if kappa == Complex64::new(0.0, 0.0) {
                continue;
            }
            let old = phases.indices()[i];
            let new = quantize_phase(kappa.arg(), levels);
            if new == old || (table[new].conj() * kappa).re <= (table[old].conj() * kappa).re {
                continue;
            }
            let delta = table[new] - v[i];
            v[i] = table[new];
            phases.set(i, new);
            av.axpy(delta, &form.a.column(i), Complex64::new(1.0, 0.0));
        }
        iterations += 1;
        let rate = budget.rate(form.gain(&v));
        let previous = *trace.last().unwrap();
        trace.push(rate);
        if let Some(h) = history.as_deref_mut() {
            h.push(phases.clone());
        }
        if (rate - previous).abs() <= opts.epsilon {
            converged = true;
            break;
        }
    }

    Ok(RefinementReport {
        final_phases: phases,
        rate_trace: trace,
        iterations,
        converged,
    })
}

/// Successive refinement with full channel knowledge.
pub fn successive_refinement(
    channels: &ChannelSet,
    budget: &LinkBudget,
    opts: &RefinementOptions,
    init: &PhaseConfig,
) -> Result<RefinementReport> {
    let form = build_quadratic_form(channels)?;
    refine(&form, budget, opts, init, None)
}
