//! Fixtures shared by the benchmarks under `benches/`.

use irs_core::experiments::{channel_seed, trial_channels};
use irs_core::{ChannelSet, LinkBudget, Scenario};

/// Reference scenario with an `irs_rows x irs_cols` surface and a
/// `bs_rows x bs_cols` panel.
pub fn scenario(bs_rows: usize, bs_cols: usize, irs_rows: usize, irs_cols: usize) -> Scenario {
    Scenario {
        bs_rows,
        bs_cols,
        irs_rows,
        irs_cols,
        ..Scenario::reference()
    }
}

/// One Rician draw for `scenario` and its link budget.
pub fn instance(scenario: &Scenario, seed: u64) -> (ChannelSet, LinkBudget) {
    let channels = trial_channels(scenario, channel_seed(seed, 0)).expect("valid scenario");
    let budget = LinkBudget::from_scenario(scenario).expect("valid scenario");
    (channels, budget)
}
