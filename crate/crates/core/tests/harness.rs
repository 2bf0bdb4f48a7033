use std::fs;
use std::path::Path;

use wavedecay::envelope::EnvelopeProblem;
use wavedecay::harness::config::experiment_config;
use wavedecay::harness::*;
use wavedecay::sim::{run, DampingProfile, EnergyForm, InitialData, SimConfig};
use wavedecay::{DampingLaw, Error, TimeWeight};

fn experiment(text: &str) -> ExperimentConfig {
    experiment_config(&text.parse::<FlatConfig>().unwrap()).unwrap()
}

const LINEAR: &str = "law = linear\nt_end = 165\nsample_every = 10\n";

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn linear_experiment_is_dominated_and_exponential() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&experiment(LINEAR), Some(dir.path())).unwrap();
    assert!(report.passed(), "{report:?}");
    assert!(report.bound_holds && report.worst_ratio <= 1.0 + BOUND_SLACK);
    assert!(report.lemma3_ok);
    assert_eq!(report.lemma.chain_ok, Some(true));
    assert!(report.identity_residual < 1e-10);
    let k_min = report.k_min.unwrap();
    assert_eq!(report.k, 2.0 * k_min);
    assert!(report.fitted_exp_rate.unwrap() > 0.0);
    assert!(report.has_flag("non-power-law-tail"));
    assert!(report.divergence.is_none());

    let series = read(dir.path(), "series.csv");
    assert!(series.starts_with("t,E_total,E_R,D_cum\n"));
    assert!(read(dir.path(), "envelope.csv").starts_with("t,S\n"));
    let csv = read(dir.path(), "report.csv");
    assert!(csv.contains("status,complete") && csv.contains("bound_holds,true"));
}

#[test]
fn artifacts_are_byte_identical_across_runs() {
    let cfg = experiment(
        "law = superlinear:r0=3\nrho = power:tau=-0.5\nt_end = 120\nsample_every = 25\ndr = 0.04\n",
    );
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_experiment(&cfg, Some(a.path())).unwrap();
    run_experiment(&cfg, Some(b.path())).unwrap();
    for name in ["series.csv", "envelope.csv", "report.csv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn strongly_decaying_weight_is_flagged() {
    let cfg =
        experiment("law = linear\nrho = power:tau=-2\nt_end = 110\nsample_every = 10\ndr = 0.04\n");
    let report = run_experiment(&cfg, None).unwrap();
    let div = report.divergence.unwrap();
    assert!(!div.diverges && div.integral.is_finite());
    assert!(report.has_flag("outside-decay-regime"));
    assert!(report.has_flag("rate-unsupported"));
}

#[test]
fn envelope_tail_of_superlinear_experiment_matches_table() {
    let cfg = experiment(
        "law = superlinear:r0=3\nrho = power:tau=-0.5\nt_end = 110\nsample_every = 10\ndr = 0.04\nenv_t_end = 1e12\n",
    );
    let report = run_experiment(&cfg, None).unwrap();
    let mu = report.envelope_mu.unwrap();
    assert!((mu + 0.5).abs() <= 0.05 * 0.5, "{mu}");
    assert_eq!(report.predicted.unwrap().exponent(), Some(-0.5));
}

#[test]
fn failing_analysis_leaves_flagged_partial_artifacts() {
    // M_a so small that E_u(0) is outside the range of h^{-1}.
    let cfg = experiment(
        "law = superlinear:r0=3\nt_end = 55\nsample_every = 50\ndr = 0.04\nK = 2\nMa = 1e-9\n",
    );
    let dir = tempfile::tempdir().unwrap();
    let err = run_experiment(&cfg, Some(dir.path())).unwrap_err();
    assert!(matches!(err, Error::Aborted(_)), "{err}");
    assert!(read(dir.path(), "report.csv").contains("status,aborted"));
    assert!(dir.path().join("series.csv").exists());
    assert!(!dir.path().join("envelope.csv").exists());
}

#[test]
fn sweep_preserves_order() {
    let configs: Vec<_> = ["linear", "superlinear:r0=3", "sublinear:theta0=0.5"]
        .iter()
        .map(|law| {
            experiment(&format!(
                "law = {law}\nt_end = 55\nsample_every = 50\ndr = 0.04\n"
            ))
        })
        .collect();
    let root = tempfile::tempdir().unwrap();
    let swept = run_sweep(&configs, Some(root.path()));
    for (i, (cfg, result)) in configs.iter().zip(&swept).enumerate() {
        let alone = run_experiment(cfg, None).unwrap();
        assert_eq!(result.as_ref().unwrap(), &alone);
        assert!(root.path().join(format!("run-{i:03}/report.csv")).exists());
    }
}

#[test]
fn config_rejects_unsampled_window() {
    let cfg: FlatConfig = "law = linear\nt_end = 100\nT = 55.005\n".parse().unwrap();
    assert!(experiment_config(&cfg).is_err());
    let cfg: FlatConfig = "law = linear\nt_end = 100\nfit_lo = 10\nfit_hi = 200\n"
        .parse()
        .unwrap();
    assert!(experiment_config(&cfg).is_err());
}

fn undamped(t_end: f64, data: InitialData) -> wavedecay::sim::TimeSeries {
    run(&SimConfig {
        law: DampingLaw::linear(),
        weight: TimeWeight::constant(),
        radius: 5.0,
        profile: DampingProfile::undamped(),
        dr: 0.04,
        dt: 0.02,
        t_end,
        data,
        sample_every: 5,
        r_max: None,
        energy_form: EnergyForm::Staggered,
    })
    .unwrap()
}

#[test]
fn free_waves_need_the_escape_time() {
    // Supported in [1.1, 2.9], so nothing leaves B_5 before t = 2.1.
    let series = undamped(70.0, InitialData::GaussianBump { c: 2.0, w: 0.15 });
    let template = |window: f64| {
        EnvelopeProblem::new(
            DampingLaw::linear(),
            TimeWeight::constant(),
            window,
            1.001,
            1.0,
            0.0,
        )
        .unwrap()
    };
    // Before escape E_R stays at E(0) while every envelope decays.
    let early = fit_minimal_k(&series, &template(1.0), (1.001, 1e6)).unwrap();
    assert!(!early.holds && early.k == 1e6 && early.worst_ratio > 1.0 + BOUND_SLACK);
    let late = fit_minimal_k(&series, &template(55.0), (1.001, 1e6)).unwrap();
    assert!(late.holds && late.k == 1.001);
}

#[test]
fn fitted_k_is_monotone_on_simulated_data() {
    let series = run(&SimConfig {
        law: DampingLaw::linear(),
        weight: TimeWeight::constant(),
        radius: 5.0,
        profile: DampingProfile::smooth_bump(3.0, 2.0).unwrap(),
        dr: 0.04,
        dt: 0.02,
        t_end: 40.0,
        data: InitialData::GaussianBump { c: 3.0, w: 0.3 },
        sample_every: 5,
        r_max: None,
        energy_form: EnergyForm::Staggered,
    })
    .unwrap();
    // A short window makes the bound bind, so K_min is non-trivial.
    let template = EnvelopeProblem::new(
        DampingLaw::linear(),
        TimeWeight::constant(),
        0.5,
        1.001,
        1.0,
        0.0,
    )
    .unwrap();
    let fit = fit_minimal_k(&series, &template, (1.001, 1e6)).unwrap();
    assert!(fit.holds && fit.k > 1.001 && fit.k.is_finite(), "{fit:?}");
    for factor in [1.01, 2.0, 100.0] {
        assert!(
            bound_check(&series, &template, factor * fit.k)
                .unwrap()
                .holds
        );
    }
    assert!(!bound_check(&series, &template, fit.k / 1.01).unwrap().holds);
}
