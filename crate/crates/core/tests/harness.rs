use std::fs;
use std::path::Path;

use nsp_radar::harness::{aggregate, emit_reports, load_config, load_summary, load_trials, run_scenario, ScenarioConfig};

fn configs_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/configs"))
}

/// A scaled-down scenario that still exercises every stage.
fn quick() -> ScenarioConfig {
    let mut cfg = load_config(&configs_dir().join("table1.json")).unwrap();
    cfg.trials = 4;
    cfg.use_fast_grids();
    cfg
}

#[test]
fn bundled_configs_load() {
    let cfg = load_config(&configs_dir().join("table1.json")).unwrap();
    assert_eq!(cfg.array.num_tx, 10);
    assert_eq!(cfg.array.num_rx, 7);
    assert_eq!(cfg.array.carrier_freq_hz, 3.55e9);
    assert_eq!(cfg.waveform.bandwidth_hz, 10e6);
    assert_eq!(cfg.waveform.observation_time_s, 1e-3);
    assert_eq!(cfg.scene.range_m, 5000.0);
    assert_eq!(cfg.scene.radial_velocity_mps, 2000.0);
    assert_eq!(cfg.scene.angle_deg, 0.0);
    assert_eq!(cfg, ScenarioConfig { output_dir: cfg.output_dir.clone(), ..ScenarioConfig::table1() });

    for name in ["equal_antennas", "table1_noisy", "pseudorandom"] {
        load_config(&configs_dir().join(format!("{name}.json"))).unwrap();
    }
}

#[test]
fn missing_and_empty_files_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert!(load_config(&dir.path().join("absent.json")).is_err());
    let empty = dir.path().join("empty.json");
    fs::write(&empty, "").unwrap();
    assert!(load_config(&empty).is_err());
}

#[test]
fn reports_have_the_documented_layout() {
    let mut cfg = quick();
    cfg.output.dump_waveform = true;
    cfg.output.per_trial_surfaces = true;
    let report = run_scenario(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = emit_reports(&report, dir.path()).unwrap();
    assert_eq!(written.len(), 6 + 3 * cfg.trials);

    let expected_rows = [("angle", 1801), ("delay", 101), ("doppler", 1001)];
    for (axis, rows) in expected_rows {
        let text = fs::read_to_string(dir.path().join(format!("surfaces_{axis}.csv"))).unwrap();
        assert!(!text.contains('\r'));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "grid_value,obj_original,obj_nsp_best,obj_nsp_worst");
        assert_eq!(lines.len(), rows + 1, "{axis}");
        for line in &lines[1..] {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 4, "{line}");
            for f in fields {
                f.parse::<f64>().unwrap();
            }
        }
    }

    let delay = fs::read_to_string(dir.path().join("surfaces_delay.csv")).unwrap();
    assert!(delay.lines().nth(51).unwrap().starts_with("3.33e-05,"));

    let wave = fs::read_to_string(dir.path().join("waveform.csv")).unwrap();
    assert_eq!(wave.lines().count(), 10_001);
    assert_eq!(wave.lines().next().unwrap().split(',').count(), 21);
    assert!(dir.path().join("trial_surfaces/trial_0003_doppler.csv").exists());
}

#[test]
fn summary_round_trips_and_matches_trials() {
    let report = run_scenario(&quick()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_reports(&report, dir.path()).unwrap();

    let summary = load_summary(&dir.path().join("summary.json")).unwrap();
    assert_eq!(summary, report.summary);
    let trials = load_trials(&dir.path().join("trials.json")).unwrap();
    assert_eq!(trials, report.trials);
    assert_eq!(aggregate(&trials, &summary.truth), summary.aggregates);
    assert_eq!(summary.config, quick());
}

#[test]
fn identical_seeds_give_identical_files_and_new_seeds_do_not() {
    let cfg = quick();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    emit_reports(&run_scenario(&cfg).unwrap(), a.path()).unwrap();
    emit_reports(&run_scenario(&cfg).unwrap(), b.path()).unwrap();
    let reseeded = ScenarioConfig { seed: cfg.seed + 1, ..cfg.clone() };
    emit_reports(&run_scenario(&reseeded).unwrap(), c.path()).unwrap();

    for name in ["surfaces_angle.csv", "surfaces_delay.csv", "surfaces_doppler.csv", "trials.json"] {
        let fa = fs::read(a.path().join(name)).unwrap();
        assert_eq!(fa, fs::read(b.path().join(name)).unwrap(), "{name}");
        assert_ne!(fa, fs::read(c.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn single_trial_delay_and_doppler_agree_across_waveforms() {
    let mut cfg = quick();
    cfg.trials = 1;
    let report = run_scenario(&cfg).unwrap();
    let t = &report.trials[0];
    let est: Vec<_> = t.cases.iter().map(|c| c.estimates.clone().unwrap()).collect();
    for e in &est {
        assert_eq!(e.delay_hat_samples, 333);
        assert_eq!(e.doppler_hat_hz, 47_100.0);
        assert_eq!(e.theta_hat_deg, 0.0);
    }
    // Less null space, less retained energy, lower peak.
    assert!(est[0].angle_peak > est[1].angle_peak);
    assert!(est[1].angle_peak > est[2].angle_peak);
}

#[test]
fn noisy_run_estimates_near_truth() {
    let mut cfg = quick();
    cfg.noise.noiseless = false;
    cfg.noise.snr_db = 0.0;
    let report = run_scenario(&cfg).unwrap();
    for agg in &report.summary.aggregates {
        assert!(agg.angle_deg.median_abs_error.unwrap() < 2.0, "{agg:?}");
        assert_eq!(agg.delay_samples.median_abs_error, Some(0.0), "{agg:?}");
    }
}

#[test]
fn noise_switch_keeps_channel_draws() {
    let quiet = quick();
    let mut loud = quick();
    loud.noise.noiseless = false;
    let a = run_scenario(&quiet).unwrap();
    let b = run_scenario(&loud).unwrap();
    for (x, y) in a.trials.iter().zip(&b.trials) {
        assert_eq!(x.seeds.channels, y.seeds.channels);
        assert_eq!(x.selection, y.selection);
    }
}

#[test]
fn pseudorandom_waveform_makes_equal_antenna_losses_differ() {
    let mut cfg = load_config(&configs_dir().join("pseudorandom.json")).unwrap();
    cfg.trials = 2;
    cfg.use_fast_grids();
    let report = run_scenario(&cfg).unwrap();
    for t in &report.trials {
        let losses = &t.selection.as_ref().unwrap().losses;
        let spread = losses.iter().cloned().fold(f64::MIN, f64::max) - losses.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread > 1e-6 * losses[0], "{losses:?}");
    }
}
