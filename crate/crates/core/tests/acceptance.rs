//! Acceptance criteria for the simulator.
//!
//! Each test prints one `[PASS]`/`[FAIL]` line; run with
//! `cargo test -p irs-core --test acceptance -- --nocapture --test-threads=1`
//! to see them all in order.

use std::sync::OnceLock;

use irs_core::channel::{los_channel_matrix, rician_channel, KFactor, Scenario};
use irs_core::experiments::{
    apply_scheme, channel_seed, mean_and_std_error, paired_difference, run_sweep, run_trial,
    SweepSpec, SweepVariable,
};
use irs_core::link::{
    build_quadratic_form, channel_gain, effective_channel, element_local_terms, reflection_vector,
    LinkBudget, PhaseConfig,
};
use irs_core::optimizer::{
    brute_force, successive_refinement, GroupingSpec, RefinementOptions, RefinementReport,
    DEFAULT_SEARCH_BUDGET,
};
use irs_core::{CMatrix, CVector, ChannelSet, Complex64, Scheme};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const MASTER_SEED: u64 = 20_201_015;
const PAIRED_TRIALS: usize = 500;

fn report(id: u32, title: &str, pass: bool, detail: String) {
    println!(
        "[{}] criterion {id:>2}: {title}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} ({title}) failed: {detail}");
}

fn cn(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// I.i.d. CN(0, 1) channels.
fn iid_channels(seed: u64, m: usize, n: usize) -> ChannelSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h_r = CMatrix::from_fn(m, n, |_, _| cn(&mut rng));
    let h_v = CVector::from_fn(n, |_, _| cn(&mut rng));
    let h_d = CVector::from_fn(m, |_, _| cn(&mut rng));
    ChannelSet::new(h_r, h_v, h_d).unwrap()
}

fn random_phases(rng: &mut ChaCha8Rng, n: usize, levels: usize) -> PhaseConfig {
    PhaseConfig::new((0..n).map(|_| rng.gen_range(0..levels)).collect(), levels).unwrap()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// The 100 instances of criteria 1 and 2: M in {1, 4, 8} x N in {4, 16, 64}.
fn identity_instances() -> Vec<ChannelSet> {
    let shapes: Vec<(usize, usize)> = [1, 4, 8]
        .iter()
        .flat_map(|&m| [4, 16, 64].iter().map(move |&n| (m, n)))
        .collect();
    (0..100)
        .map(|i| {
            let (m, n) = shapes[i % shapes.len()];
            iid_channels(1_000 + i as u64, m, n)
        })
        .collect()
}

#[test]
fn criterion_01_quadratic_form_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut checks = 0;
    for ch in identity_instances() {
        let form = build_quadratic_form(&ch).unwrap();
        for _ in 0..20 {
            let p = random_phases(&mut rng, ch.n(), 16);
            let direct = effective_channel(&ch, &p).unwrap().norm_squared();
            worst = worst.max(rel_err(form.gain_of(&p).unwrap(), direct));
            checks += 1;
        }
    }
    report(
        1,
        "quadratic form equals ||h_d + H_r Theta h_v||^2",
        worst <= 1e-10,
        format!("{checks} checks, worst relative error {worst:.2e} (limit 1e-10)"),
    );
}

#[test]
fn criterion_02_local_term_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut checks = 0;
    for ch in identity_instances() {
        let form = build_quadratic_form(&ch).unwrap();
        for _ in 0..2 {
            let p = random_phases(&mut rng, ch.n(), 16);
            let v = reflection_vector(&p);
            let full = form.gain(&v);
            for n in 0..ch.n() {
                let (kappa, tau) = element_local_terms(&form, &v, n).unwrap();
                // Any unit-modulus substitute for v_n must also match.
                let mut w = v.clone();
                w[n] = Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
                let substituted = form.gain(&w);
                worst = worst
                    .max(rel_err(2.0 * (v[n].conj() * kappa).re + tau, full))
                    .max(rel_err(2.0 * (w[n].conj() * kappa).re + tau, substituted));
                checks += 2;
            }
        }
    }
    report(
        2,
        "per-element decomposition reproduces the quadratic form",
        worst <= 1e-10,
        format!("{checks} checks, worst relative error {worst:.2e} (limit 1e-10)"),
    );
}

struct OracleRun {
    channels: ChannelSet,
    report: RefinementReport,
    refined_gain: f64,
    optimal_gain: f64,
}

/// Criterion 3 instances: 200 with (N, M, L) = (6, 2, 2) and 100 with (4, 2, 4).
fn oracle_runs() -> &'static [OracleRun] {
    static RUNS: OnceLock<Vec<OracleRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let budget = LinkBudget::new(1.0, 1.0).unwrap();
        let cases = (0..200)
            .map(|i| (5_000 + i, 6, 2))
            .chain((0..100).map(|i| (7_000 + i, 4, 4)));
        cases
            .map(|(seed, n, levels)| {
                let channels = iid_channels(seed, 2, n);
                let opts = RefinementOptions::with_levels(levels);
                let init = PhaseConfig::zeros(n, levels).unwrap();
                let report = successive_refinement(&channels, &budget, &opts, &init).unwrap();
                let optimum =
                    brute_force(&channels, &budget, levels, DEFAULT_SEARCH_BUDGET).unwrap();
                // Both gains through the same evaluator so equal configurations
                // compare equal.
                OracleRun {
                    refined_gain: channel_gain(&channels, &report.final_phases).unwrap(),
                    optimal_gain: channel_gain(&channels, &optimum.phases).unwrap(),
                    channels,
                    report,
                }
            })
            .collect()
    })
}

/// Same comparison on channels drawn from the street-canyon model with a 2x1
/// BS; reported alongside criterion 3 for context only.
fn physical_oracle_summary() -> String {
    let base = Scenario {
        bs_rows: 2,
        bs_cols: 1,
        ..Scenario::reference()
    };
    let mut parts = Vec::new();
    for (rows, cols, levels, count) in [(2, 3, 2, 200u64), (2, 2, 4, 100)] {
        let s = Scenario {
            irs_rows: rows,
            irs_cols: cols,
            ..base.clone()
        };
        let budget = LinkBudget::from_scenario(&s).unwrap();
        let near = (0..count)
            .filter(|&t| {
                let seed = channel_seed(MASTER_SEED, t as usize);
                let ch = rician_channel(&s, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
                let opts = RefinementOptions::with_levels(levels);
                let r = successive_refinement(
                    &ch,
                    &budget,
                    &opts,
                    &PhaseConfig::zeros(s.n(), levels).unwrap(),
                )
                .unwrap();
                let best = brute_force(&ch, &budget, levels, DEFAULT_SEARCH_BUDGET).unwrap();
                channel_gain(&ch, &r.final_phases).unwrap()
                    >= 0.95 * channel_gain(&ch, &best.phases).unwrap()
            })
            .count();
        parts.push(format!("N={},L={levels}: {near}/{count}", rows * cols));
    }
    parts.join(", ")
}

#[test]
fn criterion_03_oracle_comparison() {
    let runs = oracle_runs();
    let mut ok = true;
    let mut detail = Vec::new();
    for (label, slice) in [("N=6,L=2", &runs[..200]), ("N=4,L=4", &runs[200..])] {
        let near = slice
            .iter()
            .filter(|r| r.refined_gain >= 0.95 * r.optimal_gain)
            .count();
        let exceed = slice
            .iter()
            .filter(|r| r.refined_gain > r.optimal_gain)
            .count();
        let frac = near as f64 / slice.len() as f64;
        ok &= frac >= 0.95 && exceed == 0;
        detail.push(format!(
            "{label}: {near}/{} within 0.95x of optimum ({:.1}%), {exceed} above it",
            slice.len(),
            100.0 * frac
        ));
    }
    detail.push(format!(
        "reference-geometry Rician instances: {}",
        physical_oracle_summary()
    ));
    report(
        3,
        "successive refinement vs exhaustive search",
        ok,
        detail.join("; "),
    );
}

#[test]
fn criterion_04_coordinate_optimality() {
    let mut violations = 0;
    let mut checks = 0;
    for run in oracle_runs() {
        let p = &run.report.final_phases;
        for i in 0..p.len() {
            for k in 0..p.levels() {
                if k == p.indices()[i] {
                    continue;
                }
                let mut idx = p.indices().to_vec();
                idx[i] = k;
                let q = PhaseConfig::new(idx, p.levels()).unwrap();
                let g = channel_gain(&run.channels, &q).unwrap();
                checks += 1;
                if g > run.refined_gain * (1.0 + 1e-12) {
                    violations += 1;
                }
            }
        }
    }
    report(
        4,
        "no single-element substitution improves the final gain",
        violations == 0,
        format!("{checks} substitutions checked, {violations} improvements"),
    );
}

#[test]
fn criterion_05_monotone_convergence() {
    let monotone = |t: &[f64]| t.windows(2).all(|w| w[1] >= w[0]);
    let oracle_ok = oracle_runs()
        .iter()
        .all(|r| monotone(&r.report.rate_trace) && r.report.converged);

    let opts = RefinementOptions::default();
    assert_eq!(
        (opts.levels, opts.epsilon, opts.max_outer_iters),
        (4, 1e-6, 100)
    );

    // Unit-power i.i.d. 16x16 instances.
    let budget = LinkBudget::new(1.0, 1.0).unwrap();
    let mut iid_ok = true;
    for seed in 0..10 {
        let ch = iid_channels(9_000 + seed, 8, 256);
        let r = successive_refinement(&ch, &budget, &opts, &PhaseConfig::zeros(256, 4).unwrap())
            .unwrap();
        iid_ok &= monotone(&r.rate_trace) && r.converged && r.iterations <= 100;
    }

    // Reference street scenario at the point closest to the IRS.
    let s = Scenario::reference();
    let budget = LinkBudget::from_scenario(&s).unwrap();
    let mut worst_iters = 0;
    let mut scenario_ok = true;
    for t in 0..50 {
        let ch = rician_channel(
            &s,
            &mut ChaCha8Rng::seed_from_u64(channel_seed(MASTER_SEED, t)),
        )
        .unwrap();
        let r = successive_refinement(&ch, &budget, &opts, &PhaseConfig::zeros(256, 4).unwrap())
            .unwrap();
        worst_iters = worst_iters.max(r.iterations);
        scenario_ok &= monotone(&r.rate_trace) && r.converged && r.iterations <= 10;
    }
    report(
        5,
        "traces are non-decreasing and converge quickly",
        oracle_ok && iid_ok && scenario_ok,
        format!(
            "oracle runs ok={oracle_ok}, i.i.d. 16x16 ok={iid_ok}, reference scenario ok={scenario_ok} \
             (worst {worst_iters} iterations over 50 draws, limit 10)"
        ),
    );
}

/// Per-trial rates on the reference scenario at `c_v = 0`, shared by
/// criteria 6 and 7.
struct PairedRates {
    full16: Vec<f64>,
    grouped16: Vec<f64>,
    full8: Vec<f64>,
    no_irs: Vec<f64>,
    position16: Vec<f64>,
}

fn rates(s: &Scenario, scheme: Scheme, opts: &RefinementOptions) -> Vec<f64> {
    (0..PAIRED_TRIALS)
        .map(|t| run_trial(s, &scheme, opts, channel_seed(MASTER_SEED, t)).unwrap())
        .collect()
}

fn paired_rates() -> &'static PairedRates {
    static RATES: OnceLock<PairedRates> = OnceLock::new();
    RATES.get_or_init(|| {
        let s = Scenario::reference();
        let s8 = Scenario {
            irs_rows: 8,
            irs_cols: 8,
            ..s.clone()
        };
        let opts = RefinementOptions::default();
        PairedRates {
            full16: rates(&s, Scheme::FullCsi, &opts),
            grouped16: rates(&s, Scheme::Grouped(GroupingSpec::new(2, 2).unwrap()), &opts),
            full8: rates(&s8, Scheme::FullCsi, &opts),
            no_irs: rates(&s, Scheme::NoIrs, &opts),
            position16: rates(&s, Scheme::PositionBased, &opts),
        }
    })
}

/// `a` beats `b` by more than three paired standard errors.
fn clear_gap(a: &[f64], b: &[f64]) -> (bool, String) {
    let (d, se) = paired_difference(a, b);
    (d > 3.0 * se && d > 0.0, format!("{d:.4} (se {se:.1e})"))
}

#[test]
fn criterion_06_grouping_identity_and_ordering() {
    let r = paired_rates();
    let (g1, d1) = clear_gap(&r.full16, &r.grouped16);
    let (g2, d2) = clear_gap(&r.grouped16, &r.full8);
    let (g3, d3) = clear_gap(&r.full8, &r.no_irs);

    let s = Scenario::reference();
    let opts = RefinementOptions::default();
    let unit = Scheme::Grouped(GroupingSpec::new(1, 1).unwrap());
    let mut identical = 0;
    for t in 0..PAIRED_TRIALS {
        let seed = channel_seed(MASTER_SEED, t);
        let ch = rician_channel(&s, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let full = apply_scheme(&s, &ch, &Scheme::FullCsi, &opts, seed).unwrap();
        let grouped = apply_scheme(&s, &ch, &unit, &opts, seed).unwrap();
        if full.rate.to_bits() == grouped.rate.to_bits()
            && full.trace == grouped.trace
            && full.phases == grouped.phases
        {
            identical += 1;
        }
    }

    let means = [&r.full16, &r.grouped16, &r.full8, &r.no_irs].map(|v| mean_and_std_error(v).0);
    report(
        6,
        "16x16 full > 16x16 grouped 2x2 > 8x8 full > no IRS; 1x1 grouping identical",
        g1 && g2 && g3 && identical == PAIRED_TRIALS,
        format!(
            "means {:.4} > {:.4} > {:.4} > {:.4}; gaps {d1}, {d2}, {d3}; 1x1 identical in {identical}/{PAIRED_TRIALS}",
            means[0], means[1], means[2], means[3]
        ),
    );
}

#[test]
fn criterion_07_position_based_scheme() {
    let r = paired_rates();
    let (below_full, d1) = clear_gap(&r.full16, &r.position16);
    let (above_none, d2) = clear_gap(&r.position16, &r.no_irs);

    let los = Scenario {
        beta_r: KFactor::Infinite,
        beta_v: KFactor::Infinite,
        beta_d: KFactor::Infinite,
        ..Scenario::reference()
    };
    assert_eq!(
        rician_channel(&los, &mut ChaCha8Rng::seed_from_u64(1)).unwrap(),
        los_channel_matrix(&los).unwrap()
    );
    let opts = RefinementOptions::default();
    let exact = (0..PAIRED_TRIALS).all(|t| {
        let seed = channel_seed(MASTER_SEED, t);
        run_trial(&los, &Scheme::PositionBased, &opts, seed)
            .unwrap()
            .to_bits()
            == run_trial(&los, &Scheme::FullCsi, &opts, seed)
                .unwrap()
                .to_bits()
    });

    report(
        7,
        "position-based lies strictly between full CSI and no IRS; exact with pure LOS",
        below_full && above_none && exact,
        format!(
            "full - position {d1}; position - no IRS {d2}; all-LOS equality per trial: {exact}"
        ),
    );
}

#[test]
fn criterion_08_quantization_study() {
    let s = Scenario::reference();
    let by_bits: Vec<Vec<f64>> = [1u32, 2, 3]
        .iter()
        .map(|&b| rates(&s, Scheme::FullCsi, &RefinementOptions::with_levels(1 << b)))
        .collect();
    let (gain_2_over_1, se1) = paired_difference(&by_bits[1], &by_bits[0]);
    let (gain_3_over_2, se2) = paired_difference(&by_bits[2], &by_bits[1]);
    let ratio = gain_2_over_1 / gain_3_over_2;
    report(
        8,
        "2-bit phases capture most of the quantization gain",
        gain_2_over_1 >= 3.0 * gain_3_over_2,
        format!(
            "gain 1->2 bits {gain_2_over_1:.4} (se {se1:.1e}), 2->3 bits {gain_3_over_2:.4} \
             (se {se2:.1e}), ratio {ratio:.2} (need >= 3)"
        ),
    );
}

#[test]
fn criterion_09_position_sweep() {
    let spec = SweepSpec {
        base_scenario: Scenario::reference(),
        variable: SweepVariable::VehicleOffset,
        values: SweepVariable::VehicleOffset.default_values(),
        schemes: vec![Scheme::FullCsi, Scheme::NoIrs],
        trials: PAIRED_TRIALS,
        master_seed: MASTER_SEED,
        record_trials: false,
    };
    let result = run_sweep(&spec, &RefinementOptions::default()).unwrap();
    let series = |scheme: Scheme| -> Vec<(f64, f64, f64)> {
        spec.values
            .iter()
            .map(|&v| {
                let row = result.row(&scheme, v).unwrap();
                (v, row.mean_rate, row.std_error)
            })
            .collect()
    };
    let full = series(Scheme::FullCsi);
    let none = series(Scheme::NoIrs);
    let argmax = |s: &[(f64, f64, f64)]| {
        s.iter()
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .map(|p| p.0)
            .unwrap()
    };
    let peak = argmax(&full);

    // Walk outwards from c_v = 0 on both sides and count increases.
    let mut inversions = Vec::new();
    for side in [1.0, -1.0] {
        let mut arm: Vec<_> = full.iter().filter(|p| p.0 * side >= 0.0).collect();
        arm.sort_by(|a, b| a.0.abs().partial_cmp(&b.0.abs()).unwrap());
        for w in arm.windows(2) {
            let (inner, outer) = (w[0], w[1]);
            if outer.1 > inner.1 {
                let tol = 2.0 * inner.2.hypot(outer.2);
                inversions.push((outer.0, outer.1 - inner.1, tol));
            }
        }
    }
    let within_noise = inversions.len() <= 1 && inversions.iter().all(|&(_, d, tol)| d <= tol);

    let irs_gain: Vec<(f64, f64, f64)> = full
        .iter()
        .zip(&none)
        .map(|(f, n)| (f.0, f.1 - n.1, 0.0))
        .collect();
    let at = |s: &[(f64, f64, f64)], v: f64| s.iter().find(|p| p.0 == v).unwrap().1;
    report(
        9,
        "full-CSI rate peaks at c_v = 0 and decays with |c_v|",
        peak == 0.0 && within_noise,
        format!(
            "full-CSI peak at c_v = {peak} m ({:.4} vs {:.4} at 0); {} increases moving away from 0 \
             (first few: {:?}); no-IRS peak at c_v = {} m; IRS gain peak at c_v = {} m ({:.4} bit/s/Hz)",
            at(&full, peak),
            at(&full, 0.0),
            inversions.len(),
            &inversions[..inversions.len().min(3)],
            argmax(&none),
            argmax(&irs_gain),
            at(&irs_gain, argmax(&irs_gain)),
        ),
    );
}

#[test]
fn criterion_10_determinism_across_threads() {
    let spec = SweepSpec {
        base_scenario: Scenario {
            irs_rows: 8,
            irs_cols: 8,
            ..Scenario::reference()
        },
        variable: SweepVariable::TxPowerDbm,
        values: vec![0.0, 10.0, 20.0],
        schemes: vec![
            Scheme::NoIrs,
            Scheme::FullCsi,
            Scheme::Grouped(GroupingSpec::new(2, 2).unwrap()),
            Scheme::PositionBased,
        ],
        trials: 40,
        master_seed: MASTER_SEED,
        record_trials: true,
    };
    let opts = RefinementOptions::default();
    let run_with = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| run_sweep(&spec, &opts).unwrap())
    };
    let one = run_with(1);
    let many = run_with(4);
    let again = run_with(3);
    let same = one.table_string() == many.table_string()
        && one.table_string() == again.table_string()
        && one == many
        && one == again;
    report(
        10,
        "sweep output is byte-identical for 1, 3 and 4 worker threads",
        same,
        format!(
            "{} table bytes compared, {} trial records",
            one.table_string().len(),
            one.trials.len()
        ),
    );
}

#[test]
fn criterion_11_channel_statistics() {
    const SAMPLES: usize = 100_000;
    let s = Scenario {
        bs_rows: 2,
        bs_cols: 1,
        irs_rows: 1,
        irs_cols: 2,
        beta_r: KFactor::Finite(2.0),
        beta_v: KFactor::Finite(0.0),
        beta_d: KFactor::Finite(5.0),
        ..Scenario::reference()
    };
    let los = los_channel_matrix(&s).unwrap();
    let links = [
        ("h_r", s.beta_r, los.h_r.iter().copied().collect::<Vec<_>>()),
        ("h_v", s.beta_v, los.h_v.iter().copied().collect()),
        ("h_d", s.beta_d, los.h_d.iter().copied().collect()),
    ];

    let mut samples: Vec<Vec<Vec<Complex64>>> = links
        .iter()
        .map(|(_, _, l)| vec![Vec::with_capacity(SAMPLES); l.len()])
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED);
    for _ in 0..SAMPLES {
        let ch = rician_channel(&s, &mut rng).unwrap();
        for (k, link) in [ch.h_r.as_slice(), ch.h_v.as_slice(), ch.h_d.as_slice()]
            .into_iter()
            .enumerate()
        {
            for (e, z) in link.iter().enumerate() {
                samples[k][e].push(*z);
            }
        }
    }

    let mut worst_z = 0.0f64;
    for ((name, k, los_entries), per_entry) in links.iter().zip(&samples) {
        for (los_entry, draws) in los_entries.iter().zip(per_entry) {
            let path_loss = los_entry.norm_sqr();
            let expected_mean = los_entry * k.los_weight();
            let re: Vec<f64> = draws.iter().map(|z| z.re).collect();
            let im: Vec<f64> = draws.iter().map(|z| z.im).collect();
            let pow: Vec<f64> = draws.iter().map(|z| z.norm_sqr()).collect();
            for (label, series, want) in [
                ("mean.re", &re, expected_mean.re),
                ("mean.im", &im, expected_mean.im),
                ("power", &pow, path_loss),
            ] {
                let (m, se) = mean_and_std_error(series);
                let z = (m - want).abs() / se;
                assert!(z.is_finite(), "{name} {label}: degenerate standard error");
                worst_z = worst_z.max(z);
            }
        }
    }
    report(
        11,
        "Rician mean and power match the LOS part and path loss",
        worst_z <= 5.0,
        format!("{SAMPLES} draws, worst deviation {worst_z:.2} standard errors (limit 5)"),
    );
}
