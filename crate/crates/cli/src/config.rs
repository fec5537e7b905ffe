//! Experiment configuration files.
//!
//! A configuration is a TOML document with up to four sections:
//!
//! ```toml
//! [scenario]      # array sizes, geometry, carrier, K-factors, power, noise
//! [optimizer]     # levels or quantization_bits, epsilon, iteration cap, init
//! [grouping]      # group_rows, group_cols for the grouped scheme
//! [sweep]         # variable, values, schemes, trials, seed
//! ```
//!
//! Every key is optional; missing keys take the reference street-canyon values.
//! Unknown keys are rejected. Diagnostics name the offending key and, when it
//! comes from the file, its line.

use irs_core::channel::{dbm_to_watts, thermal_noise_power};
use irs_core::optimizer::Initialization;
use irs_core::{
    GroupingSpec, KFactor, RefinementOptions, Scenario, Scheme, SweepSpec, SweepVariable,
};
use serde::Deserialize;

/// Invalid configuration text or values.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

/// Everything a subcommand needs, with defaults filled in and validated.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub scenario: Scenario,
    pub options: RefinementOptions,
    pub grouping: GroupingSpec,
    /// Scheme used by `optimize`.
    pub scheme: Scheme,
    /// Sweep over `scenario`; also carries the master seed.
    pub sweep: SweepSpec,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    scenario: RawScenario,
    optimizer: RawOptimizer,
    grouping: RawGrouping,
    sweep: RawSweep,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawScenario {
    bs_rows: Option<usize>,
    bs_cols: Option<usize>,
    irs_rows: Option<usize>,
    irs_cols: Option<usize>,
    a_irs: Option<f64>,
    a_bs: Option<f64>,
    b_bs: Option<f64>,
    c_bs: Option<f64>,
    a_v: Option<f64>,
    b_v: Option<f64>,
    c_v: Option<f64>,
    f_c: Option<f64>,
    element_spacing: Option<f64>,
    beta_r: Option<RawKFactor>,
    beta_v: Option<RawKFactor>,
    beta_d: Option<RawKFactor>,
    tx_power_dbm: Option<f64>,
    tx_power: Option<f64>,
    noise_power: Option<f64>,
    bandwidth_hz: Option<f64>,
    noise_figure_db: Option<f64>,
    temperature_k: Option<f64>,
}

/// A K-factor: a number, `inf`, or the string `"inf"`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawKFactor {
    Number(f64),
    Text(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawOptimizer {
    scheme: Option<String>,
    levels: Option<usize>,
    quantization_bits: Option<u32>,
    epsilon: Option<f64>,
    max_outer_iters: Option<usize>,
    init: Option<String>,
    init_seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawGrouping {
    group_rows: Option<usize>,
    group_cols: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSweep {
    variable: Option<String>,
    values: Option<Vec<f64>>,
    schemes: Option<Vec<String>>,
    trials: Option<usize>,
    seed: Option<u64>,
}

/// Default grouping for the grouped scheme.
pub const DEFAULT_GROUPING: (usize, usize) = (2, 2);
/// Master seed used when the configuration gives none.
pub const DEFAULT_SEED: u64 = 1;
/// Schemes swept when the configuration lists none.
pub const DEFAULT_SCHEMES: [&str; 4] = ["no_irs", "full_csi", "grouped", "position_based"];

/// Parses configuration text with no overrides.
pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    parse_config_with(text, &[])
}

/// Parses configuration text, then applies `section.key=value` overrides.
///
/// Override values are read as TOML values; anything that does not parse as
/// one is taken as a bare string.
pub fn parse_config_with(text: &str, overrides: &[String]) -> Result<Config, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError(toml_message(&e)))?;
    let raw = if overrides.is_empty() {
        raw
    } else {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| ConfigError(toml_message(&e)))?;
        let mut keys = Vec::new();
        for item in overrides {
            keys.push(apply_override(&mut table, item)?);
        }
        table
            .try_into()
            .map_err(|e| ConfigError(format!("in --set {}: {}", keys.join(", "), e.message())))?
    };
    let locator = Locator { text, overrides };
    build(raw, &locator)
}

fn toml_message(e: &toml::de::Error) -> String {
    e.to_string().trim_end().to_string()
}

/// Inserts one `section.key=value` override into `table`; returns the key.
fn apply_override(table: &mut toml::Table, item: &str) -> Result<String, ConfigError> {
    let (key, value) = item.split_once('=').ok_or_else(|| {
        ConfigError(format!(
            "override `{item}` must have the form section.key=value"
        ))
    })?;
    let key = key.trim();
    let path: Vec<&str> = key.split('.').collect();
    if path.len() < 2 || path.iter().any(|p| p.is_empty()) {
        return Err(ConfigError(format!(
            "override key `{key}` must name a section and a key, e.g. scenario.c_v"
        )));
    }
    let value = value.trim();
    let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    let mut cursor = table;
    for part in &path[..path.len() - 1] {
        let entry = cursor
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cursor = entry
            .as_table_mut()
            .ok_or_else(|| ConfigError(format!("override `{key}`: `{part}` is not a section")))?;
    }
    cursor.insert(path[path.len() - 1].to_string(), parsed);
    Ok(key.to_string())
}

/// Finds where a key was set, for diagnostics.
struct Locator<'a> {
    text: &'a str,
    overrides: &'a [String],
}

impl Locator<'_> {
    /// `section.key (line N)`, `section.key (from --set)` or `section.key`.
    fn name(&self, section: &str, key: &str) -> String {
        let full = format!("{section}.{key}");
        let overridden = self
            .overrides
            .iter()
            .rev()
            .any(|o| o.split_once('=').is_some_and(|(k, _)| k.trim() == full));
        if overridden {
            return format!("`{full}` (from --set)");
        }
        match self.line_of(section, key) {
            Some(line) => format!("`{full}` (line {line})"),
            None => format!("`{full}`"),
        }
    }

    fn line_of(&self, section: &str, key: &str) -> Option<usize> {
        let mut current = String::new();
        for (i, line) in self.text.lines().enumerate() {
            let line = line.trim();
            if let Some(header) = line.strip_prefix('[') {
                current = header
                    .split(']')
                    .next()
                    .unwrap_or_default()
                    .trim()
                    .to_string();
                continue;
            }
            let dotted = format!("{section}.{key}");
            let rest = if current == section {
                line.strip_prefix(key)
            } else if current.is_empty() {
                line.strip_prefix(dotted.as_str())
            } else {
                None
            };
            if rest.is_some_and(|r| r.trim_start().starts_with('=')) {
                return Some(i + 1);
            }
        }
        None
    }

    fn err(&self, section: &str, key: &str, message: impl std::fmt::Display) -> ConfigError {
        ConfigError(format!("{}: {message}", self.name(section, key)))
    }
}

fn k_factor(
    raw: Option<RawKFactor>,
    default: KFactor,
    loc: &Locator,
    key: &str,
) -> Result<KFactor, ConfigError> {
    let k = match raw {
        None => return Ok(default),
        Some(RawKFactor::Number(k)) if k == f64::INFINITY => KFactor::Infinite,
        Some(RawKFactor::Number(k)) => KFactor::Finite(k),
        Some(RawKFactor::Text(s)) => match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => KFactor::Infinite,
            _ => {
                return Err(loc.err(
                    "scenario",
                    key,
                    format!("expected a number or \"inf\", got \"{s}\""),
                ))
            }
        },
    };
    if let KFactor::Finite(v) = k {
        if !(v.is_finite() && v >= 0.0) {
            return Err(loc.err(
                "scenario",
                key,
                format!("must be a non-negative number or inf, got {v}"),
            ));
        }
    }
    Ok(k)
}

fn positive(
    value: Option<f64>,
    loc: &Locator,
    section: &str,
    key: &str,
) -> Result<Option<f64>, ConfigError> {
    match value {
        Some(v) if !(v.is_finite() && v > 0.0) => Err(loc.err(
            section,
            key,
            format!("must be positive and finite, got {v}"),
        )),
        other => Ok(other),
    }
}

fn finite(value: Option<f64>, default: f64, loc: &Locator, key: &str) -> Result<f64, ConfigError> {
    match value {
        Some(v) if !v.is_finite() => {
            Err(loc.err("scenario", key, format!("must be finite, got {v}")))
        }
        Some(v) => Ok(v),
        None => Ok(default),
    }
}

fn dims(
    value: Option<usize>,
    default: usize,
    loc: &Locator,
    section: &str,
    key: &str,
) -> Result<usize, ConfigError> {
    match value {
        Some(0) => Err(loc.err(section, key, "must be at least 1")),
        Some(v) => Ok(v),
        None => Ok(default),
    }
}

fn scenario(raw: RawScenario, loc: &Locator) -> Result<Scenario, ConfigError> {
    let base = Scenario::reference();
    let s = "scenario";
    let tx_power = match (
        raw.tx_power_dbm,
        positive(raw.tx_power, loc, s, "tx_power")?,
    ) {
        (Some(_), Some(_)) => {
            return Err(loc.err(
                s,
                "tx_power",
                "give either tx_power (W) or tx_power_dbm, not both",
            ))
        }
        (Some(dbm), None) if dbm.is_finite() => dbm_to_watts(dbm),
        (Some(dbm), None) => {
            return Err(loc.err(s, "tx_power_dbm", format!("must be finite, got {dbm}")))
        }
        (None, Some(w)) => w,
        (None, None) => base.tx_power,
    };
    let physical = [
        ("bandwidth_hz", raw.bandwidth_hz),
        ("noise_figure_db", raw.noise_figure_db),
        ("temperature_k", raw.temperature_k),
    ];
    let noise_power = match positive(raw.noise_power, loc, s, "noise_power")? {
        Some(n) => {
            if let Some((key, _)) = physical.iter().find(|(_, v)| v.is_some()) {
                return Err(loc.err(s, key, "cannot be combined with an explicit noise_power"));
            }
            n
        }
        None => {
            let bandwidth = positive(raw.bandwidth_hz, loc, s, "bandwidth_hz")?
                .unwrap_or(Scenario::DEFAULT_BANDWIDTH_HZ);
            let temperature = positive(raw.temperature_k, loc, s, "temperature_k")?
                .unwrap_or(Scenario::DEFAULT_TEMPERATURE_K);
            let nf = finite(
                raw.noise_figure_db,
                Scenario::DEFAULT_NOISE_FIGURE_DB,
                loc,
                "noise_figure_db",
            )?;
            thermal_noise_power(bandwidth, nf, temperature)
        }
    };
    let scenario = Scenario {
        bs_rows: dims(raw.bs_rows, base.bs_rows, loc, s, "bs_rows")?,
        bs_cols: dims(raw.bs_cols, base.bs_cols, loc, s, "bs_cols")?,
        irs_rows: dims(raw.irs_rows, base.irs_rows, loc, s, "irs_rows")?,
        irs_cols: dims(raw.irs_cols, base.irs_cols, loc, s, "irs_cols")?,
        a_irs: finite(raw.a_irs, base.a_irs, loc, "a_irs")?,
        a_bs: finite(raw.a_bs, base.a_bs, loc, "a_bs")?,
        b_bs: finite(raw.b_bs, base.b_bs, loc, "b_bs")?,
        c_bs: finite(raw.c_bs, base.c_bs, loc, "c_bs")?,
        a_v: finite(raw.a_v, base.a_v, loc, "a_v")?,
        b_v: finite(raw.b_v, base.b_v, loc, "b_v")?,
        c_v: finite(raw.c_v, base.c_v, loc, "c_v")?,
        f_c: positive(raw.f_c, loc, s, "f_c")?.unwrap_or(base.f_c),
        element_spacing: positive(raw.element_spacing, loc, s, "element_spacing")?,
        beta_r: k_factor(raw.beta_r, base.beta_r, loc, "beta_r")?,
        beta_v: k_factor(raw.beta_v, base.beta_v, loc, "beta_v")?,
        beta_d: k_factor(raw.beta_d, base.beta_d, loc, "beta_d")?,
        tx_power,
        noise_power,
    };
    scenario
        .validate()
        .map_err(|e| ConfigError(format!("[scenario]: {e}")))?;
    Ok(scenario)
}

fn options(raw: &RawOptimizer, loc: &Locator) -> Result<RefinementOptions, ConfigError> {
    let o = "optimizer";
    let defaults = RefinementOptions::default();
    let levels = match (raw.levels, raw.quantization_bits) {
        (Some(_), Some(_)) => {
            return Err(loc.err(
                o,
                "quantization_bits",
                "give either levels or quantization_bits, not both",
            ))
        }
        (Some(0), None) => return Err(loc.err(o, "levels", "must be at least 1")),
        (Some(l), None) => l,
        (None, Some(b)) if b <= 16 => 1 << b,
        (None, Some(b)) => {
            return Err(loc.err(
                o,
                "quantization_bits",
                format!("must be at most 16, got {b}"),
            ))
        }
        (None, None) => defaults.levels,
    };
    let epsilon = positive(raw.epsilon, loc, o, "epsilon")?.unwrap_or(defaults.epsilon);
    let max_outer_iters = dims(
        raw.max_outer_iters,
        defaults.max_outer_iters,
        loc,
        o,
        "max_outer_iters",
    )?;
    let init = match raw.init.as_deref().unwrap_or("zero") {
        "zero" => {
            if raw.init_seed.is_some() {
                return Err(loc.err(o, "init_seed", "only used with init = \"random\""));
            }
            Initialization::Zero
        }
        "random" => Initialization::Random {
            seed: raw.init_seed.unwrap_or(0),
        },
        other => {
            return Err(loc.err(
                o,
                "init",
                format!("expected \"zero\" or \"random\", got \"{other}\""),
            ))
        }
    };
    Ok(RefinementOptions {
        levels,
        epsilon,
        max_outer_iters,
        init,
    })
}

fn scheme(
    name: &str,
    grouping: GroupingSpec,
    loc: &Locator,
    section: &str,
    key: &str,
) -> Result<Scheme, ConfigError> {
    if name == "grouped" {
        return Ok(Scheme::Grouped(grouping));
    }
    name.parse().map_err(|_| {
        loc.err(
            section,
            key,
            format!("unknown scheme \"{name}\"; expected no_irs, full_csi, grouped, grouped_RxC or position_based"),
        )
    })
}

fn build(raw: RawConfig, loc: &Locator) -> Result<Config, ConfigError> {
    let scenario = scenario(raw.scenario, loc)?;
    let options = options(&raw.optimizer, loc)?;

    let g = "grouping";
    let grouping = GroupingSpec {
        group_rows: dims(
            raw.grouping.group_rows,
            DEFAULT_GROUPING.0,
            loc,
            g,
            "group_rows",
        )?,
        group_cols: dims(
            raw.grouping.group_cols,
            DEFAULT_GROUPING.1,
            loc,
            g,
            "group_cols",
        )?,
    };
    if !scenario.irs_rows.is_multiple_of(grouping.group_rows) {
        return Err(loc.err(
            g,
            "group_rows",
            format!(
                "{} does not divide irs_rows = {}",
                grouping.group_rows, scenario.irs_rows
            ),
        ));
    }
    if !scenario.irs_cols.is_multiple_of(grouping.group_cols) {
        return Err(loc.err(
            g,
            "group_cols",
            format!(
                "{} does not divide irs_cols = {}",
                grouping.group_cols, scenario.irs_cols
            ),
        ));
    }

    let chosen = scheme(
        raw.optimizer.scheme.as_deref().unwrap_or("full_csi"),
        grouping,
        loc,
        "optimizer",
        "scheme",
    )?;

    let sw = "sweep";
    let variable: SweepVariable = match raw.sweep.variable.as_deref() {
        None => SweepVariable::VehicleOffset,
        Some(v) => v.parse().map_err(|_| {
            loc.err(
                sw,
                "variable",
                format!(
                    "unknown variable \"{v}\"; expected c_v, tx_power_dbm or quantization_bits"
                ),
            )
        })?,
    };
    let values = match raw.sweep.values {
        Some(v) if v.is_empty() => return Err(loc.err(sw, "values", "must not be empty")),
        Some(v) => v,
        None => variable.default_values(),
    };
    let names = raw
        .sweep
        .schemes
        .unwrap_or_else(|| DEFAULT_SCHEMES.iter().map(|s| s.to_string()).collect());
    if names.is_empty() {
        return Err(loc.err(sw, "schemes", "must list at least one scheme"));
    }
    let schemes = names
        .iter()
        .map(|n| scheme(n, grouping, loc, sw, "schemes"))
        .collect::<Result<Vec<_>, _>>()?;
    for scheme in &schemes {
        if let Scheme::Grouped(gs) = scheme {
            gs.check_divides(scenario.irs_rows, scenario.irs_cols)
                .map_err(|e| loc.err(sw, "schemes", e))?;
        }
    }
    let sweep = SweepSpec {
        base_scenario: scenario.clone(),
        variable,
        values,
        schemes,
        trials: dims(
            raw.sweep.trials,
            SweepSpec::DEFAULT_TRIALS,
            loc,
            sw,
            "trials",
        )?,
        master_seed: raw.sweep.seed.unwrap_or(DEFAULT_SEED),
        record_trials: false,
    };
    sweep.validate().map_err(|e| loc.err(sw, "values", e))?;
    Ok(Config {
        scenario,
        options,
        grouping,
        scheme: chosen,
        sweep,
    })
}
