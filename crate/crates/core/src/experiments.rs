//! Seeded Monte Carlo sweeps over the vehicle position, transmit power or
//! number of phase-quantization bits.
//!
//! Every `(value, trial)` cell draws its channels from a seed that depends
//! only on the master seed and the trial index, so all schemes and all sweep
//! values of one trial see the same fading realization (common random
//! numbers). Trials run in parallel; results are reduced in
//! `(scheme, value, trial)` order, so the output does not depend on the number
//! of worker threads.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{dbm_to_watts, rician_channel, ChannelSet, Scenario};
use crate::error::{Error, Result};
use crate::link::{channel_gain, LinkBudget, PhaseConfig};
use crate::optimizer::{
    optimize_grouped, optimize_position_based, successive_refinement, GroupingSpec, Initialization,
    RefinementOptions,
};

/// How the IRS phases are chosen in a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// IRS absent: `h_v` forced to zero.
    NoIrs,
    /// Successive refinement with perfect knowledge of all channels.
    FullCsi,
    /// One shared phase per block of elements.
    Grouped(GroupingSpec),
    /// Refinement on geometry-derived LOS channels.
    PositionBased,
}

impl Scheme {
    /// Stable numeric id mixed into scheme-specific seeds.
    pub fn id(&self) -> u64 {
        match self {
            Scheme::NoIrs => 0,
            Scheme::FullCsi => 1,
            Scheme::PositionBased => 2,
            Scheme::Grouped(g) => 3 | (g.group_rows as u64) << 8 | (g.group_cols as u64) << 32,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::NoIrs => f.write_str("no_irs"),
            Scheme::FullCsi => f.write_str("full_csi"),
            Scheme::PositionBased => f.write_str("position_based"),
            Scheme::Grouped(g) => write!(f, "grouped_{}x{}", g.group_rows, g.group_cols),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    /// Accepts `no_irs`, `full_csi`, `position_based` and `grouped_RxC` (or
    /// `grouped:RxC`).
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "no_irs" => return Ok(Scheme::NoIrs),
            "full_csi" => return Ok(Scheme::FullCsi),
            "position_based" => return Ok(Scheme::PositionBased),
            _ => {}
        }
        let dims = s
            .strip_prefix("grouped_")
            .or_else(|| s.strip_prefix("grouped:"))
            .ok_or_else(|| Error::InvalidSweep(format!("unknown scheme `{s}`")))?;
        let (r, c) = dims
            .split_once('x')
            .ok_or_else(|| Error::InvalidSweep(format!("grouped scheme `{s}` needs RxC")))?;
        let parse = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| Error::InvalidSweep(format!("bad group size in `{s}`")))
        };
        Ok(Scheme::Grouped(GroupingSpec::new(parse(r)?, parse(c)?)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Vehicle offset `c_v` along the road, meters.
    VehicleOffset,
    /// Transmit power in dBm.
    TxPowerDbm,
    /// Phase-shifter resolution in bits; `L = 2^bits`.
    QuantizationBits,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::VehicleOffset => "c_v",
            SweepVariable::TxPowerDbm => "tx_power_dbm",
            SweepVariable::QuantizationBits => "quantization_bits",
        }
    }

    /// Default grid: `c_v` from -20 to 20 m in 1 m steps, 0..30 dBm in 2 dB
    /// steps, or 1..3 bits.
    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepVariable::VehicleOffset => (-20..=20).map(f64::from).collect(),
            SweepVariable::TxPowerDbm => (0..=15).map(|k| 2.0 * f64::from(k)).collect(),
            SweepVariable::QuantizationBits => vec![1.0, 2.0, 3.0],
        }
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c_v" | "vehicle_offset_c_v" => Ok(SweepVariable::VehicleOffset),
            "tx_power_dbm" | "tx_power" => Ok(SweepVariable::TxPowerDbm),
            "quantization_bits" => Ok(SweepVariable::QuantizationBits),
            other => Err(Error::InvalidSweep(format!(
                "unknown sweep variable `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base_scenario: Scenario,
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub trials: usize,
    pub master_seed: u64,
    /// Keep per-trial records (seed, channel digest, rate, trace).
    pub record_trials: bool,
}

impl SweepSpec {
    pub const DEFAULT_TRIALS: usize = 500;

    pub fn validate(&self) -> Result<()> {
        self.base_scenario.validate()?;
        if self.values.is_empty() {
            return Err(Error::InvalidSweep("sweep values must not be empty".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidSweep(
                "at least one scheme is required".into(),
            ));
        }
        if self.trials == 0 {
            return Err(Error::InvalidSweep("trials must be at least 1".into()));
        }
        for scheme in &self.schemes {
            if let Scheme::Grouped(g) = scheme {
                g.check_divides(self.base_scenario.irs_rows, self.base_scenario.irs_cols)?;
            }
        }
        let opts = RefinementOptions::default();
        for &v in &self.values {
            let (s, _) = apply_value(&self.base_scenario, &opts, self.variable, v)?;
            s.validate()?;
        }
        Ok(())
    }
}

/// Mean rate of one scheme at one sweep value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub scheme: String,
    pub value: f64,
    pub mean_rate: f64,
    pub std_error: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub scheme: String,
    pub value: f64,
    pub trial: usize,
    pub channel_seed: u64,
    pub channel_digest: u64,
    pub rate: f64,
    pub iterations: usize,
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub variable: SweepVariable,
    pub rows: Vec<ResultRow>,
    /// Empty unless the sweep asked for per-trial records.
    pub trials: Vec<TrialRecord>,
}

/// Column header of the result table.
pub const TABLE_HEADER: [&str; 6] = [
    "scheme",
    "value",
    "mean_rate_bps_hz",
    "std_error",
    "trials",
    "seed",
];

impl ExperimentResult {
    /// Writes the comma-separated result table: a header row, then one row per
    /// `(scheme, value)` with floats in shortest round-trip form.
    pub fn write_table<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let to_io = |e: csv::Error| Error::Io(e.into());
        w.write_record(TABLE_HEADER).map_err(to_io)?;
        for r in &self.rows {
            w.write_record([
                r.scheme.clone(),
                r.value.to_string(),
                r.mean_rate.to_string(),
                r.std_error.to_string(),
                r.trials.to_string(),
                r.seed.to_string(),
            ])
            .map_err(to_io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn table_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_table(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("table is UTF-8")
    }

    pub fn row(&self, scheme: &Scheme, value: f64) -> Option<&ResultRow> {
        let name = scheme.to_string();
        self.rows
            .iter()
            .find(|r| r.scheme == name && r.value == value)
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the channel realization used by trial `trial` of every scheme and
/// sweep value: `mix64(mix64(master) ^ trial)`.
pub fn channel_seed(master_seed: u64, trial: usize) -> u64 {
    mix64(mix64(master_seed) ^ trial as u64)
}

/// Seed for randomness private to one scheme within a trial (random
/// initialization): `mix64(channel_seed ^ mix64(scheme_id))`.
pub fn scheme_seed(channel_seed: u64, scheme: &Scheme) -> u64 {
    mix64(channel_seed ^ mix64(scheme.id()))
}

/// Scenario and optimizer settings at one sweep value.
pub fn apply_value(
    base: &Scenario,
    opts: &RefinementOptions,
    variable: SweepVariable,
    value: f64,
) -> Result<(Scenario, RefinementOptions)> {
    let mut scenario = base.clone();
    let mut opts = *opts;
    if !value.is_finite() {
        return Err(Error::InvalidSweep(format!(
            "sweep value {value} is not finite"
        )));
    }
    match variable {
        SweepVariable::VehicleOffset => scenario.c_v = value,
        SweepVariable::TxPowerDbm => scenario.tx_power = dbm_to_watts(value),
        SweepVariable::QuantizationBits => {
            if value.fract() != 0.0 || !(0.0..=16.0).contains(&value) {
                return Err(Error::InvalidSweep(format!(
                    "quantization bits must be an integer in 0..=16, got {value}"
                )));
            }
            opts.levels = 1 << value as u32;
        }
    }
    Ok((scenario, opts))
}

/// Outcome of one scheme on one channel draw.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub rate: f64,
    pub channel_digest: u64,
    pub iterations: usize,
    pub trace: Vec<f64>,
    pub phases: Option<PhaseConfig>,
}

/// Channels of the trial whose generator is seeded with `trial_seed`.
pub fn trial_channels(scenario: &Scenario, trial_seed: u64) -> Result<ChannelSet> {
    rician_channel(scenario, &mut ChaCha8Rng::seed_from_u64(trial_seed))
}

/// Draws the channels for `trial_seed` and applies `scheme` to them.
pub fn run_trial_outcome(
    scenario: &Scenario,
    scheme: &Scheme,
    opts: &RefinementOptions,
    trial_seed: u64,
) -> Result<TrialOutcome> {
    let channels = trial_channels(scenario, trial_seed)?;
    apply_scheme(scenario, &channels, scheme, opts, trial_seed)
}

/// Achieved rate of `scheme` on the channels drawn from `trial_seed`.
pub fn run_trial(
    scenario: &Scenario,
    scheme: &Scheme,
    opts: &RefinementOptions,
    trial_seed: u64,
) -> Result<f64> {
    Ok(run_trial_outcome(scenario, scheme, opts, trial_seed)?.rate)
}

/// Applies a scheme to given channels.
pub fn apply_scheme(
    scenario: &Scenario,
    channels: &ChannelSet,
    scheme: &Scheme,
    opts: &RefinementOptions,
    trial_seed: u64,
) -> Result<TrialOutcome> {
    channels.check_matches(scenario)?;
    let budget = LinkBudget::from_scenario(scenario)?;
    let mut opts = *opts;
    if let Initialization::Random { seed } = opts.init {
        opts.init = Initialization::Random {
            seed: mix64(seed ^ scheme_seed(trial_seed, scheme)),
        };
    }
    let channel_digest = channels.digest();
    let report = match scheme {
        Scheme::NoIrs => {
            let silent = channels.without_irs();
            let phases = PhaseConfig::zeros(channels.n(), opts.levels)?;
            let rate = budget.rate(channel_gain(&silent, &phases)?);
            return Ok(TrialOutcome {
                rate,
                channel_digest,
                iterations: 0,
                trace: vec![rate],
                phases: None,
            });
        }
        Scheme::FullCsi => {
            let init = opts.init.phases(channels.n(), opts.levels)?;
            successive_refinement(channels, &budget, &opts, &init)?
        }
        Scheme::Grouped(g) => optimize_grouped(
            channels,
            scenario.irs_rows,
            scenario.irs_cols,
            g,
            &budget,
            &opts,
        )?,
        Scheme::PositionBased => optimize_position_based(scenario, channels, &budget, &opts)?,
    };
    Ok(TrialOutcome {
        rate: report.final_rate(),
        channel_digest,
        iterations: report.iterations,
        trace: report.rate_trace,
        phases: Some(report.final_phases),
    })
}

/// Sample mean and standard error of the mean (zero for a single sample).
pub fn mean_and_std_error(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Mean and standard error of the per-trial differences `a[i] - b[i]`.
pub fn paired_difference(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert_eq!(a.len(), b.len(), "paired samples must have equal length");
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    mean_and_std_error(&diffs)
}

/// Runs every `(scheme, value, trial)` cell and averages over trials.
pub fn run_sweep(spec: &SweepSpec, opts: &RefinementOptions) -> Result<ExperimentResult> {
    spec.validate()?;
    opts.validate()?;
    let points = spec
        .values
        .iter()
        .map(|&v| apply_value(&spec.base_scenario, opts, spec.variable, v))
        .collect::<Result<Vec<_>>>()?;

    let cells: Vec<(usize, usize, usize)> = (0..spec.schemes.len())
        .flat_map(|s| {
            (0..spec.values.len()).flat_map(move |v| (0..spec.trials).map(move |t| (s, v, t)))
        })
        .collect();
    let outcomes = cells
        .par_iter()
        .map(|&(s, v, t)| {
            let (scenario, opts) = &points[v];
            run_trial_outcome(
                scenario,
                &spec.schemes[s],
                opts,
                channel_seed(spec.master_seed, t),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(spec.schemes.len() * spec.values.len());
    let mut trials = Vec::new();
    for (chunk, cell) in outcomes.chunks(spec.trials).zip(cells.chunks(spec.trials)) {
        let (s, v, _) = cell[0];
        let scheme = spec.schemes[s].to_string();
        let value = spec.values[v];
        let rates: Vec<f64> = chunk.iter().map(|o| o.rate).collect();
        let (mean_rate, std_error) = mean_and_std_error(&rates);
        rows.push(ResultRow {
            scheme: scheme.clone(),
            value,
            mean_rate,
            std_error,
            trials: spec.trials,
            seed: spec.master_seed,
        });
        if spec.record_trials {
            trials.extend(chunk.iter().zip(cell).map(|(o, &(_, _, t))| TrialRecord {
                scheme: scheme.clone(),
                value,
                trial: t,
                channel_seed: channel_seed(spec.master_seed, t),
                channel_digest: o.channel_digest,
                rate: o.rate,
                iterations: o.iterations,
                trace: o.trace.clone(),
            }));
        }
    }
    Ok(ExperimentResult {
        variable: spec.variable,
        rows,
        trials,
    })
}

/// Rate after every outer iteration of full-CSI refinement from zero phases on
/// the channels drawn from `seed`.
pub fn convergence_trace(
    scenario: &Scenario,
    opts: &RefinementOptions,
    seed: u64,
) -> Result<Vec<f64>> {
    let channels = trial_channels(scenario, seed)?;
    let budget = LinkBudget::from_scenario(scenario)?;
    let opts = RefinementOptions {
        init: Initialization::Zero,
        ..*opts
    };
    let init = PhaseConfig::zeros(channels.n(), opts.levels)?;
    Ok(successive_refinement(&channels, &budget, &opts, &init)?.rate_trace)
}
