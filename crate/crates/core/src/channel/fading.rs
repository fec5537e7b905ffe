use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{
    angles_between, device_positions, path_loss_umi_los, steering_vector, ArrayFrame, ChannelSet,
    KFactor, Scenario,
};
use crate::error::Result;
use crate::{CMatrix, CVector, Complex64};

/// Per-link linear path-loss gains of a LOS channel set.
struct LosLinks {
    channels: ChannelSet,
    pl_r: f64,
    pl_v: f64,
    pl_d: f64,
}

fn los_links(scenario: &Scenario) -> Result<LosLinks> {
    scenario.validate()?;
    let pos = device_positions(scenario);
    let (irs_frame, bs_frame) = (ArrayFrame::irs(), ArrayFrame::bs());
    let lambda = scenario.wavelength();
    let spacing = scenario.spacing();
    let bs_response = |to| -> Result<CVector> {
        let angles = angles_between(pos.bs, to, &bs_frame)?;
        Ok(steering_vector(
            scenario.bs_rows,
            scenario.bs_cols,
            spacing,
            lambda,
            angles,
        ))
    };
    let irs_response = |to| -> Result<CVector> {
        let angles = angles_between(pos.irs, to, &irs_frame)?;
        Ok(steering_vector(
            scenario.irs_rows,
            scenario.irs_cols,
            spacing,
            lambda,
            angles,
        ))
    };
    // sqrt(L) exp(-j 2 pi d / lambda)
    let link_coefficient = |d: f64| -> Result<(Complex64, f64)> {
        let pl = path_loss_umi_los(d, scenario.f_c)?;
        Ok((Complex64::from_polar(pl.sqrt(), -2.0 * PI * d / lambda), pl))
    };

    let (g_r, pl_r) = link_coefficient(pos.bs.distance(pos.irs))?;
    let a_bs_from_irs = bs_response(pos.irs)?;
    let a_irs_to_bs = irs_response(pos.bs)?;
    let h_r = CMatrix::from_fn(scenario.m(), scenario.n(), |i, j| {
        g_r * a_bs_from_irs[i] * a_irs_to_bs[j].conj()
    });

    let (g_v, pl_v) = link_coefficient(pos.irs.distance(pos.vehicle))?;
    let h_v = irs_response(pos.vehicle)? * g_v;

    let (g_d, pl_d) = link_coefficient(pos.bs.distance(pos.vehicle))?;
    let h_d = bs_response(pos.vehicle)? * g_d;

    Ok(LosLinks {
        channels: ChannelSet { h_r, h_v, h_d },
        pl_r,
        pl_v,
        pl_d,
    })
}

/// Deterministic LOS channels from the scene geometry.
///
/// Each link is `sqrt(L) exp(-j 2 pi d / lambda)` times the array responses at
/// both ends; `h_r` is the rank-1 outer product `a_bs a_irs^H`. The vehicle has
/// a single isotropic antenna. Consumes no randomness.
pub fn los_channel_matrix(scenario: &Scenario) -> Result<ChannelSet> {
    Ok(los_links(scenario)?.channels)
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn compose<R: Rng + ?Sized>(los: Complex64, k: KFactor, path_loss: f64, rng: &mut R) -> Complex64 {
    let diffuse = complex_normal(rng);
    match k {
        KFactor::Infinite => los,
        KFactor::Finite(_) => los * k.los_weight() + diffuse * (k.nlos_weight() * path_loss.sqrt()),
    }
}

/// Draws one Rician realization of all three links.
///
/// Every entry is `sqrt(K/(1+K)) LOS + sqrt(1/(1+K)) sqrt(L) g` with
/// `g ~ CN(0, 1)`, so `E|entry|^2` equals the path loss. Diffuse samples are
/// drawn for every entry regardless of `K` (h_r row-major, then h_v, then h_d),
/// so the random stream layout depends only on the dimensions. Links with an
/// infinite K-factor reproduce [`los_channel_matrix`] bit-for-bit.
pub fn rician_channel<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Result<ChannelSet> {
    let LosLinks {
        channels: los,
        pl_r,
        pl_v,
        pl_d,
    } = los_links(scenario)?;
    let (m, n) = (scenario.m(), scenario.n());

    let mut h_r = los.h_r;
    for i in 0..m {
        for j in 0..n {
            h_r[(i, j)] = compose(h_r[(i, j)], scenario.beta_r, pl_r, rng);
        }
    }
    let mut h_v = los.h_v;
    for z in h_v.iter_mut() {
        *z = compose(*z, scenario.beta_v, pl_v, rng);
    }
    let mut h_d = los.h_d;
    for z in h_d.iter_mut() {
        *z = compose(*z, scenario.beta_d, pl_d, rng);
    }
    Ok(ChannelSet { h_r, h_v, h_d })
}
