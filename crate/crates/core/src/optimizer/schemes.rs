//! Reduced-information phase optimization: element grouping and LOS estimates
//! derived from the device positions.

use crate::channel::{los_channel_matrix, ChannelSet, Scenario};
use crate::error::{Error, Result};
use crate::link::{
    build_quadratic_form, cascade_matrix, channel_gain, LinkBudget, PhaseConfig, QuadraticForm,
};
use crate::CMatrix;

use super::{refine, RefinementOptions, RefinementReport};

/// Tiling of the IRS into contiguous `group_rows x group_cols` blocks that
/// share one phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupingSpec {
    pub group_rows: usize,
    pub group_cols: usize,
}

impl GroupingSpec {
    pub fn new(group_rows: usize, group_cols: usize) -> Result<Self> {
        if group_rows == 0 || group_cols == 0 {
            return Err(Error::InvalidOption(format!(
                "group dimensions must be positive, got {group_rows}x{group_cols}"
            )));
        }
        Ok(Self {
            group_rows,
            group_cols,
        })
    }

    pub fn check_divides(&self, irs_rows: usize, irs_cols: usize) -> Result<()> {
        if self.group_rows == 0
            || self.group_cols == 0
            || !irs_rows.is_multiple_of(self.group_rows)
            || !irs_cols.is_multiple_of(self.group_cols)
        {
            return Err(Error::NonDividingGrouping {
                group_rows: self.group_rows,
                group_cols: self.group_cols,
                irs_rows,
                irs_cols,
            });
        }
        Ok(())
    }

    /// Number of groups, i.e. optimization variables of the reduced problem.
    pub fn group_count(&self, irs_rows: usize, irs_cols: usize) -> Result<usize> {
        self.check_divides(irs_rows, irs_cols)?;
        Ok((irs_rows / self.group_rows) * (irs_cols / self.group_cols))
    }

    /// Group index of every element, elements in row-major order.
    pub fn membership(&self, irs_rows: usize, irs_cols: usize) -> Result<Vec<usize>> {
        self.check_divides(irs_rows, irs_cols)?;
        let groups_per_row = irs_cols / self.group_cols;
        Ok((0..irs_rows)
            .flat_map(|p| {
                (0..irs_cols)
                    .map(move |q| (p / self.group_rows) * groups_per_row + q / self.group_cols)
            })
            .collect())
    }
}

/// Optimizes one phase per group.
///
/// The reduced cascade has one column per group, the sum of its members'
/// columns of `H_r diag(h_v)`; the resulting group phases are copied to every
/// member. The trace is the exact full-array rate since both problems share
/// the same effective channel.
pub fn optimize_grouped(
    channels: &ChannelSet,
    irs_rows: usize,
    irs_cols: usize,
    grouping: &GroupingSpec,
    budget: &LinkBudget,
    opts: &RefinementOptions,
) -> Result<RefinementReport> {
    channels.check()?;
    if irs_rows * irs_cols != channels.n() {
        return Err(Error::DimensionMismatch(format!(
            "a {irs_rows}x{irs_cols} array does not match {} channel columns",
            channels.n()
        )));
    }
    let membership = grouping.membership(irs_rows, irs_cols)?;
    let groups = grouping.group_count(irs_rows, irs_cols)?;

    let phi = cascade_matrix(channels);
    let mut reduced = CMatrix::zeros(channels.m(), groups);
    let mut seen = vec![false; groups];
    for (element, &g) in membership.iter().enumerate() {
        if seen[g] {
            let mut col = reduced.column_mut(g);
            col += phi.column(element);
        } else {
            reduced.set_column(g, &phi.column(element));
            seen[g] = true;
        }
    }
    let form = QuadraticForm::from_cascade(&reduced, &channels.h_d)?;
    let init = opts.init.phases(groups, opts.levels)?;
    let report = refine(&form, budget, opts, &init, None)?;

    let expanded = membership
        .iter()
        .map(|&g| report.final_phases.indices()[g])
        .collect();
    Ok(RefinementReport {
        final_phases: PhaseConfig::new(expanded, opts.levels)?,
        ..report
    })
}

/// Optimizes against `estimate` and reports the rates the chosen phases
/// achieve on `true_channels`.
///
/// The returned trace holds the true-channel rate of the phases after every
/// sweep, so it need not be monotone; `converged` and `iterations` describe
/// the run on the estimate.
pub fn optimize_with_estimate(
    estimate: &ChannelSet,
    true_channels: &ChannelSet,
    budget: &LinkBudget,
    opts: &RefinementOptions,
) -> Result<RefinementReport> {
    true_channels.check()?;
    if estimate.m() != true_channels.m() || estimate.n() != true_channels.n() {
        return Err(Error::DimensionMismatch(format!(
            "estimate is {}x{} but the true channels are {}x{}",
            estimate.m(),
            estimate.n(),
            true_channels.m(),
            true_channels.n()
        )));
    }
    let form = build_quadratic_form(estimate)?;
    let init = opts.init.phases(estimate.n(), opts.levels)?;
    let mut history = Vec::new();
    let report = refine(&form, budget, opts, &init, Some(&mut history))?;
    let rate_trace = history
        .iter()
        .map(|p| Ok(budget.rate(channel_gain(true_channels, p)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RefinementReport {
        rate_trace,
        ..report
    })
}

/// Position-based passive beamforming: the optimizer only sees the pure-LOS
/// channels implied by the scene geometry.
pub fn optimize_position_based(
    scenario: &Scenario,
    true_channels: &ChannelSet,
    budget: &LinkBudget,
    opts: &RefinementOptions,
) -> Result<RefinementReport> {
    true_channels.check_matches(scenario)?;
    let estimate = los_channel_matrix(scenario)?;
    optimize_with_estimate(&estimate, true_channels, budget, opts)
}
