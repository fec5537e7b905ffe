//! Effective channel, MRC combining, SNR/rate, and the quadratic form of the
//! channel gain in the reflection vector.

use std::f64::consts::TAU;

use crate::channel::{ChannelSet, Scenario};
use crate::error::{Error, Result};
use crate::{CMatrix, CVector, Complex64};

/// Discrete phase shifts of every IRS element.
///
/// Element `i` applies the phase `indices[i] * 2 pi / levels`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PhaseConfig {
    indices: Vec<usize>,
    levels: usize,
}

impl PhaseConfig {
    pub fn new(indices: Vec<usize>, levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::ZeroLevels);
        }
        if let Some((element, &index)) = indices.iter().enumerate().find(|(_, &k)| k >= levels) {
            return Err(Error::PhaseIndexOutOfRange {
                element,
                index,
                levels,
            });
        }
        Ok(Self { indices, levels })
    }

    /// All phases zero.
    pub fn zeros(n: usize, levels: usize) -> Result<Self> {
        Self::new(vec![0; n], levels)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Phase of element `i` in radians, in `[0, 2 pi)`.
    pub fn phase(&self, i: usize) -> f64 {
        phase_of(self.indices[i], self.levels)
    }

    pub(crate) fn set(&mut self, i: usize, index: usize) {
        debug_assert!(index < self.levels);
        self.indices[i] = index;
    }
}

pub(crate) fn phase_of(index: usize, levels: usize) -> f64 {
    index as f64 * (TAU / levels as f64)
}

pub(crate) fn unit_phasor(index: usize, levels: usize) -> Complex64 {
    Complex64::from_polar(1.0, phase_of(index, levels))
}

/// `v = [exp(j theta_1), ..., exp(j theta_N)]^T`.
pub fn reflection_vector(phases: &PhaseConfig) -> CVector {
    CVector::from_iterator(
        phases.len(),
        phases
            .indices
            .iter()
            .map(|&k| unit_phasor(k, phases.levels)),
    )
}

/// Transmit and noise power of the link, both strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    tx_power: f64,
    noise_power: f64,
}

impl LinkBudget {
    pub fn new(tx_power: f64, noise_power: f64) -> Result<Self> {
        for (name, value) in [("tx_power", tx_power), ("noise_power", noise_power)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositive { name, value });
            }
        }
        Ok(Self {
            tx_power,
            noise_power,
        })
    }

    pub fn from_scenario(scenario: &Scenario) -> Result<Self> {
        Self::new(scenario.tx_power, scenario.noise_power)
    }

    pub fn tx_power(&self) -> f64 {
        self.tx_power
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn snr(&self, gain: f64) -> f64 {
        self.tx_power * gain / self.noise_power
    }

    /// Achievable rate in bit/s/Hz for a channel gain `||h_eff||^2`.
    pub fn rate(&self, gain: f64) -> f64 {
        self.snr(gain).ln_1p() / std::f64::consts::LN_2
    }
}

fn check_phases(channels: &ChannelSet, phases: &PhaseConfig) -> Result<()> {
    channels.check()?;
    if phases.len() != channels.n() {
        return Err(Error::DimensionMismatch(format!(
            "phase configuration has {} elements but the IRS has {}",
            phases.len(),
            channels.n()
        )));
    }
    Ok(())
}

/// `h_d + H_r diag(v) h_v`.
pub fn effective_channel(channels: &ChannelSet, phases: &PhaseConfig) -> Result<CVector> {
    check_phases(channels, phases)?;
    let reflected = reflection_vector(phases).component_mul(&channels.h_v);
    Ok(&channels.h_d + &channels.h_r * reflected)
}

/// `||h_d + H_r diag(v) h_v||^2`, evaluated directly.
pub fn channel_gain(channels: &ChannelSet, phases: &PhaseConfig) -> Result<f64> {
    Ok(effective_channel(channels, phases)?.norm_squared())
}

pub fn snr(
    channels: &ChannelSet,
    phases: &PhaseConfig,
    tx_power: f64,
    noise_power: f64,
) -> Result<f64> {
    let budget = LinkBudget::new(tx_power, noise_power)?;
    Ok(budget.snr(channel_gain(channels, phases)?))
}

/// SNR after explicitly applying the unit-norm MRC combiner `w = h / ||h||`.
pub fn mrc_snr(
    channels: &ChannelSet,
    phases: &PhaseConfig,
    tx_power: f64,
    noise_power: f64,
) -> Result<f64> {
    let budget = LinkBudget::new(tx_power, noise_power)?;
    let h = effective_channel(channels, phases)?;
    let norm = h.norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let w = &h / Complex64::from(norm);
    let signal = w.dotc(&h).norm_sqr() * budget.tx_power;
    let noise = w.norm_squared() * budget.noise_power;
    Ok(signal / noise)
}

pub fn rate(
    channels: &ChannelSet,
    phases: &PhaseConfig,
    tx_power: f64,
    noise_power: f64,
) -> Result<f64> {
    let budget = LinkBudget::new(tx_power, noise_power)?;
    Ok(budget.rate(channel_gain(channels, phases)?))
}

/// `Phi = H_r diag(h_v)`: column `n` is the cascaded channel through element `n`.
pub fn cascade_matrix(channels: &ChannelSet) -> CMatrix {
    let mut phi = channels.h_r.clone();
    for (mut col, h) in phi.column_iter_mut().zip(channels.h_v.iter()) {
        col *= *h;
    }
    phi
}

/// The channel gain as a quadratic function of the reflection vector:
/// `v^H A v + 2 Re{v^H b} + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    /// `Phi^H Phi`, Hermitian positive semidefinite.
    pub a: CMatrix,
    /// `Phi^H h_d`.
    pub b: CVector,
    /// `||h_d||^2`.
    pub c: f64,
}

impl QuadraticForm {
    pub fn from_cascade(phi: &CMatrix, h_d: &CVector) -> Result<Self> {
        if phi.nrows() != h_d.len() {
            return Err(Error::DimensionMismatch(format!(
                "cascade has {} rows but h_d has length {}",
                phi.nrows(),
                h_d.len()
            )));
        }
        let a = phi.ad_mul(phi);
        let b = phi.ad_mul(h_d);
        Ok(Self {
            a,
            b,
            c: h_d.norm_squared(),
        })
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn gain(&self, v: &CVector) -> f64 {
        let av = &self.a * v;
        (v.dotc(&av).re + 2.0 * v.dotc(&self.b).re + self.c).max(0.0)
    }

    pub fn gain_of(&self, phases: &PhaseConfig) -> Result<f64> {
        if phases.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "phase configuration has {} elements but the form has {}",
                phases.len(),
                self.n()
            )));
        }
        Ok(self.gain(&reflection_vector(phases)))
    }
}

pub fn build_quadratic_form(channels: &ChannelSet) -> Result<QuadraticForm> {
    channels.check()?;
    QuadraticForm::from_cascade(&cascade_matrix(channels), &channels.h_d)
}

/// Splits the gain into the part that depends on element `n` and the rest:
/// `gain = 2 Re{conj(v_n) kappa_n} + tau_n` for any unit-modulus `v_n`.
pub fn element_local_terms(
    form: &QuadraticForm,
    v: &CVector,
    n: usize,
) -> Result<(Complex64, f64)> {
    let len = form.n();
    if v.len() != len {
        return Err(Error::DimensionMismatch(format!(
            "reflection vector has length {} but the form has {len}",
            v.len()
        )));
    }
    if n >= len {
        return Err(Error::ElementOutOfRange { index: n, len });
    }
    let kappa = (0..len)
        .filter(|&j| j != n)
        .map(|j| form.a[(n, j)] * v[j])
        .sum::<Complex64>()
        + form.b[n];

    let mut rest = Complex64::new(0.0, 0.0);
    let mut linear = Complex64::new(0.0, 0.0);
    for i in (0..len).filter(|&i| i != n) {
        let inner: Complex64 = (0..len)
            .filter(|&j| j != n)
            .map(|j| form.a[(i, j)] * v[j])
            .sum();
        rest += v[i].conj() * inner;
        linear += v[i].conj() * form.b[i];
    }
    let tau = rest.re + 2.0 * linear.re + form.a[(n, n)].re + form.c;
    Ok((kappa, tau))
}
