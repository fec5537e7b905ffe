//! Scene description and synthesis of the three links of the IRS-aided uplink.
//!
//! Coordinate frame (used everywhere in the crate):
//!
//! - origin at the base of the IRS; the IRS lies in the YZ plane at
//!   `(0, 0, a_irs)` with its boresight along +X;
//! - the BS panel lies parallel to the XZ plane at `(b_bs, -c_bs, a_bs)` with
//!   its boresight along +Y, i.e. facing the road segment in front of the IRS;
//! - the vehicle antenna sits at `(b_v, c_v, a_v)`, so `c_v` moves it along the
//!   road, parallel to the IRS.
//!
//! See [`geometry::ArrayFrame`] for how local array axes are derived from a
//! boresight direction.

mod fading;
pub mod file;
mod geometry;
mod path_loss;

pub use fading::{los_channel_matrix, rician_channel};
pub use geometry::{
    angles_between, device_positions, steering_vector, AnglePair, ArrayFrame, DevicePositions,
    Point3,
};
pub use path_loss::{path_loss_umi_los, path_loss_umi_los_db, UMI_LOS_FSPL_CONST_DB};

use crate::error::{Error, Result};
use crate::{CMatrix, CVector, Complex64};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Rician K-factor of a link: ratio of LOS power to diffuse power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KFactor {
    Finite(f64),
    /// Purely deterministic (LOS-only) link.
    Infinite,
}

impl KFactor {
    /// Amplitude weight of the LOS component, `sqrt(K / (1 + K))`.
    pub fn los_weight(self) -> f64 {
        match self {
            KFactor::Finite(k) => (k / (1.0 + k)).sqrt(),
            KFactor::Infinite => 1.0,
        }
    }

    /// Amplitude weight of the diffuse component, `sqrt(1 / (1 + K))`.
    pub fn nlos_weight(self) -> f64 {
        match self {
            KFactor::Finite(k) => (1.0 / (1.0 + k)).sqrt(),
            KFactor::Infinite => 0.0,
        }
    }

    fn is_valid(self) -> bool {
        match self {
            KFactor::Finite(k) => k.is_finite() && k >= 0.0,
            KFactor::Infinite => true,
        }
    }
}

/// Thermal noise power `k T B · NF` in watts.
pub fn thermal_noise_power(bandwidth_hz: f64, noise_figure_db: f64, temperature_k: f64) -> f64 {
    BOLTZMANN * temperature_k * bandwidth_hz * 10f64.powf(noise_figure_db / 10.0)
}

/// Converts dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Complete description of one link-level experiment point.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub bs_rows: usize,
    pub bs_cols: usize,
    pub irs_rows: usize,
    pub irs_cols: usize,
    pub a_irs: f64,
    pub a_bs: f64,
    pub b_bs: f64,
    pub c_bs: f64,
    pub a_v: f64,
    pub b_v: f64,
    pub c_v: f64,
    /// Carrier frequency, Hz.
    pub f_c: f64,
    /// Inter-element spacing in meters for both arrays; `None` means half a wavelength.
    pub element_spacing: Option<f64>,
    pub beta_r: KFactor,
    pub beta_v: KFactor,
    pub beta_d: KFactor,
    /// Transmit power of the vehicle, W.
    pub tx_power: f64,
    /// Noise power at each BS antenna, W.
    pub noise_power: f64,
}

impl Scenario {
    pub const DEFAULT_BANDWIDTH_HZ: f64 = 100e6;
    pub const DEFAULT_NOISE_FIGURE_DB: f64 = 7.0;
    pub const DEFAULT_TEMPERATURE_K: f64 = 290.0;
    pub const DEFAULT_TX_POWER_DBM: f64 = 20.0;

    /// The stochastic street-canyon setup: 4x2 BS panel, 16x16 IRS at 24.2 GHz,
    /// K-factors 2 (IRS-BS), 1 (vehicle-IRS) and infinite (direct), vehicle at
    /// the point closest to the IRS.
    pub fn reference() -> Self {
        Self {
            bs_rows: 4,
            bs_cols: 2,
            irs_rows: 16,
            irs_cols: 16,
            a_irs: 1.0,
            a_bs: 2.0,
            b_bs: 20.0,
            c_bs: 10.0,
            a_v: 1.0,
            b_v: 1.5,
            c_v: 0.0,
            f_c: 24.2e9,
            element_spacing: None,
            beta_r: KFactor::Finite(2.0),
            beta_v: KFactor::Finite(1.0),
            beta_d: KFactor::Infinite,
            tx_power: dbm_to_watts(Self::DEFAULT_TX_POWER_DBM),
            noise_power: thermal_noise_power(
                Self::DEFAULT_BANDWIDTH_HZ,
                Self::DEFAULT_NOISE_FIGURE_DB,
                Self::DEFAULT_TEMPERATURE_K,
            ),
        }
    }

    /// Number of BS antennas.
    pub fn m(&self) -> usize {
        self.bs_rows * self.bs_cols
    }

    /// Number of IRS elements.
    pub fn n(&self) -> usize {
        self.irs_rows * self.irs_cols
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.f_c
    }

    pub fn spacing(&self) -> f64 {
        self.element_spacing
            .unwrap_or_else(|| self.wavelength() / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        for (name, v) in [
            ("bs_rows", self.bs_rows),
            ("bs_cols", self.bs_cols),
            ("irs_rows", self.irs_rows),
            ("irs_cols", self.irs_cols),
        ] {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        for (name, v) in [
            ("a_irs", self.a_irs),
            ("a_bs", self.a_bs),
            ("b_bs", self.b_bs),
            ("c_bs", self.c_bs),
            ("a_v", self.a_v),
            ("b_v", self.b_v),
            ("c_v", self.c_v),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite, got {v}"));
            }
        }
        for (name, v) in [
            ("f_c", self.f_c),
            ("tx_power", self.tx_power),
            ("noise_power", self.noise_power),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if let Some(s) = self.element_spacing {
            if !(s.is_finite() && s > 0.0) {
                return bad(format!("element_spacing must be positive, got {s}"));
            }
        }
        for (name, k) in [
            ("beta_r", self.beta_r),
            ("beta_v", self.beta_v),
            ("beta_d", self.beta_d),
        ] {
            if !k.is_valid() {
                return bad(format!(
                    "{name} must be non-negative or infinite, got {k:?}"
                ));
            }
        }
        let p = device_positions(self);
        for (name, a, b) in [
            ("BS and IRS", p.bs, p.irs),
            ("vehicle and IRS", p.vehicle, p.irs),
            ("vehicle and BS", p.vehicle, p.bs),
        ] {
            if a == b {
                return bad(format!("{name} are at the same position"));
            }
        }
        Ok(())
    }
}

/// The three channels of the uplink.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// IRS to BS, M x N.
    pub h_r: CMatrix,
    /// Vehicle to IRS, length N.
    pub h_v: CVector,
    /// Vehicle to BS (direct), length M.
    pub h_d: CVector,
}

impl ChannelSet {
    pub fn new(h_r: CMatrix, h_v: CVector, h_d: CVector) -> Result<Self> {
        let set = Self { h_r, h_v, h_d };
        set.check()?;
        Ok(set)
    }

    /// Verifies that the dimensions agree and every entry is finite.
    pub fn check(&self) -> Result<()> {
        let (m, n) = self.h_r.shape();
        if m == 0 || n == 0 {
            return Err(Error::DimensionMismatch(format!(
                "h_r must be non-empty, got {m}x{n}"
            )));
        }
        if self.h_v.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "h_v has length {} but h_r has {n} columns",
                self.h_v.len()
            )));
        }
        if self.h_d.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "h_d has length {} but h_r has {m} rows",
                self.h_d.len()
            )));
        }
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !(self.h_r.iter().all(finite)
            && self.h_v.iter().all(finite)
            && self.h_d.iter().all(finite))
        {
            return Err(Error::InvalidScenario(
                "channel contains non-finite entries".into(),
            ));
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.h_r.nrows()
    }

    pub fn n(&self) -> usize {
        self.h_r.ncols()
    }

    /// Checks that the channel dimensions match a scenario's arrays.
    pub fn check_matches(&self, scenario: &Scenario) -> Result<()> {
        if self.m() != scenario.m() || self.n() != scenario.n() {
            return Err(Error::DimensionMismatch(format!(
                "channels are {}x{} but the scenario has M={} and N={}",
                self.m(),
                self.n(),
                scenario.m(),
                scenario.n()
            )));
        }
        Ok(())
    }

    /// Same channels with the IRS switched off (`h_v = 0`).
    pub fn without_irs(&self) -> Self {
        Self {
            h_r: self.h_r.clone(),
            h_v: CVector::zeros(self.n()),
            h_d: self.h_d.clone(),
        }
    }

    /// Stable 64-bit fingerprint of the exact bit patterns of every entry.
    pub fn digest(&self) -> u64 {
        let mut h = 0xcbf2_9ce4_8422_2325u64;
        let mut feed = |x: u64| {
            for byte in x.to_le_bytes() {
                h ^= u64::from(byte);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        feed(self.m() as u64);
        feed(self.n() as u64);
        for z in self
            .h_r
            .iter()
            .chain(self.h_v.iter())
            .chain(self.h_d.iter())
        {
            feed(z.re.to_bits());
            feed(z.im.to_bits());
        }
        h
    }
}
