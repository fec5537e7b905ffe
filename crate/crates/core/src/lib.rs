//! Link-level simulation and discrete passive-beamforming optimization for an
//! uplink assisted by an intelligent reflecting surface (IRS).
//!
//! The crate is organised bottom-up:
//!
//! - [`channel`]: scene geometry, steering vectors, path loss, LOS and Rician
//!   channel synthesis, and the plain-text channel file format.
//! - [`link`]: effective channel, MRC combining, SNR/rate and the quadratic
//!   form of the channel gain.
//! - [`optimizer`]: successive refinement over discrete phases, an exhaustive
//!   oracle, and the grouped and position-based reduced-information schemes.
//! - [`experiments`]: seeded, paired Monte Carlo sweeps.

pub mod channel;
pub mod error;
pub mod experiments;
pub mod link;
pub mod optimizer;

pub use num_complex::Complex64;

pub use channel::{AnglePair, ArrayFrame, ChannelSet, KFactor, Point3, Scenario};
pub use error::{Error, Result};

pub use experiments::{ExperimentResult, ResultRow, Scheme, SweepSpec, SweepVariable};
pub use link::{LinkBudget, PhaseConfig, QuadraticForm};
pub use optimizer::{GroupingSpec, Optimum, RefinementOptions, RefinementReport};

/// Dense complex matrix, column-major (nalgebra storage).
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<Complex64>;
