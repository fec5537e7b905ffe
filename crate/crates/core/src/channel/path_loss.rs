//! UMi street-canyon LOS path loss (3GPP TR 38.901, Table 7.4.1-1).
//!
//! Only the branch below the breakpoint distance is modelled:
//!
//! ```text
//! PL [dB] = 32.4 + 21 log10(d_3D / 1 m) + 20 log10(f_c / 1 GHz)
//! ```
//!
//! For the street-level geometries simulated here the breakpoint
//! `4 h'_BS h'_UT f_c / c` is always far beyond the link distances.
//! Distances below 1 m are clamped to 1 m.

use crate::error::{Error, Result};

/// Constant term of the pre-breakpoint formula, dB.
pub const UMI_LOS_FSPL_CONST_DB: f64 = 32.4;
const DISTANCE_EXPONENT_DB: f64 = 21.0;
const FREQUENCY_EXPONENT_DB: f64 = 20.0;
const MIN_DISTANCE_M: f64 = 1.0;

pub fn path_loss_umi_los_db(distance_3d_m: f64, f_c_hz: f64) -> Result<f64> {
    if !(distance_3d_m.is_finite() && distance_3d_m > 0.0) {
        return Err(Error::NonPositiveDistance(distance_3d_m));
    }
    if !(f_c_hz.is_finite() && f_c_hz > 0.0) {
        return Err(Error::NonPositive {
            name: "carrier frequency",
            value: f_c_hz,
        });
    }
    let d = distance_3d_m.max(MIN_DISTANCE_M);
    Ok(UMI_LOS_FSPL_CONST_DB
        + DISTANCE_EXPONENT_DB * d.log10()
        + FREQUENCY_EXPONENT_DB * (f_c_hz / 1e9).log10())
}

/// Linear power gain `10^(-PL/10)`.
pub fn path_loss_umi_los(distance_3d_m: f64, f_c_hz: f64) -> Result<f64> {
    Ok(10f64.powf(-path_loss_umi_los_db(distance_3d_m, f_c_hz)? / 10.0))
}
