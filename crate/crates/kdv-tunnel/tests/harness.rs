use std::path::PathBuf;

use kdv_tunnel::harness::*;
use kdv_tunnel::soliton::OutcomeKind;
use kdv_tunnel::Error;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kdv-tunnel-harness-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

/// A small well scenario that simulates in well under a second.
fn small() -> Scenario {
    let cfg = ScenarioConfig::from_json(
        r#"{
            "label": "small", "U0": -1.0, "l": 10.0, "a0": 3.0, "x0": 5.0, "t_end": 4.0,
            "grid": { "x_min": -100.0, "x_max": 100.0, "n": 2048 },
            "solver": { "dt": 0.001, "dealias_fraction": 0.6666666666666666, "smoothing_delta": 0.5, "sample_interval": 0.25 }
        }"#,
    )
    .unwrap();
    Scenario::from_config(&cfg).unwrap()
}

#[test]
fn catalog_contents() {
    let labels: Vec<_> = catalog().into_iter().map(|s| s.label).collect();
    assert_eq!(labels, ["FIG1", "FIG5", "FIG6", "FIG7", "FIG8", "FIG9", "FIG10"]);
    let fig1 = scenario("fig1").unwrap();
    assert!(fig1.is_bare_well());
    assert_eq!(fig1.sample_times, [3.0, 5.0, 20.0, 100.0]);
    let fig7 = scenario("FIG7").unwrap();
    assert_eq!((fig7.well.u0, fig7.well.l, fig7.a0, fig7.x0, fig7.t_end), (-1.0, 100.0, 3.0, 50.0, 50.0));
    assert_eq!(fig7.eps, 1.0);
    assert_eq!(fig7.grid.n, 16384);
    let fig10 = scenario("FIG10").unwrap();
    assert_eq!(fig10.a0, 0.1);
    assert_eq!(fig10.note.as_deref(), Some(FIG10_NOTE));
    assert!(scenario("FIG2").is_none());
}

#[test]
fn config_round_trip_and_validation() {
    for s in catalog() {
        let cfg = s.to_config();
        let json = serde_json::to_string(&cfg).unwrap();
        let back = ScenarioConfig::from_json(&json).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(Scenario::from_config(&back).unwrap(), s);
    }
    assert!(matches!(ScenarioConfig::from_json(r#"{"U0": -1}"#), Err(Error::Config(_))));
    let mut cfg = small().to_config();
    cfg.u0 = 1.0;
    assert!(Scenario::from_config(&cfg).is_err());
    let mut cfg = small().to_config();
    cfg.t_end = 40.0;
    assert!(matches!(Scenario::from_config(&cfg), Err(Error::Grid(_))));
    let mut cfg = small().to_config();
    cfg.grid.n = 1000;
    assert!(Scenario::from_config(&cfg).is_err());
    let text = serde_json::to_string(&small().to_config()).unwrap().replace("\"l\":", "\"bogus\":1,\"l\":");
    assert!(ScenarioConfig::from_json(&text).is_err());
    assert!(ScenarioConfig::load(std::path::Path::new("/nonexistent/config.json")).is_err());
}

#[test]
fn horizon_and_amplitude_overrides() {
    let s = scenario("FIG1").unwrap().with_t_end(10.0).unwrap();
    assert_eq!(s.sample_times, [3.0, 5.0]);
    let s = scenario("FIG8").unwrap().with_amplitude(2.5).unwrap();
    assert_eq!(s.a0, 2.5);
    assert_eq!(s.label, "FIG8-a2.5");
}

#[test]
fn analytics_only_tunnel_report() {
    let r = run_scenario(&scenario("FIG7").unwrap(), Mode::AnalyticsOnly).unwrap();
    assert!(r.passed);
    assert!(r.measurement.is_none() && r.checks.is_empty() && r.health.is_empty());
    let p = r.prediction.as_ref().unwrap();
    assert_eq!(p.outcome, Some(OutcomeKind::Tunnel));
    assert_eq!(p.a_final, Some(1.0));
    assert_eq!(p.t_star, 25.0);
    assert_eq!(p.boundaries.len(), 500);
    assert!(r.trajectory.iter().all(|row| row.x_pred.is_some() && row.x_meas.is_none()));
}

#[test]
fn analytics_only_left_entry_predicts_phase() {
    let r = run_scenario(&scenario("FIG5").unwrap(), Mode::AnalyticsOnly).unwrap();
    let p = r.prediction.unwrap();
    assert_eq!(p.a_final, Some(8.0));
    assert_eq!(p.crossings.len(), 4);
    // Zero background on both sides: no net phase shift.
    assert_eq!(p.delta_x, Some(0.0));
    // FIG6 has no closed-form plan but still classifies.
    let r = run_scenario(&scenario("FIG6").unwrap(), Mode::AnalyticsOnly).unwrap();
    assert!(r.prediction.as_ref().unwrap().plan_error.is_some());
    assert!(r.diagnostics.iter().any(|d| d.starts_with("no closed-form plan")));
    assert_eq!(r.prediction.unwrap().outcome, Some(OutcomeKind::Tunnel));
}

#[test]
fn analytics_sweep_covers_every_embedding() {
    let table = sweep(&[0.1, 1.0, 2.0, 3.0], &scenario("FIG8").unwrap(), Mode::AnalyticsOnly).unwrap();
    let kinds: Vec<_> = table.rows.iter().map(|r| r.predicted.unwrap()).collect();
    assert_eq!(kinds, [OutcomeKind::EmbedDSW, OutcomeKind::EmbedLW, OutcomeKind::EmbedRW, OutcomeKind::Tunnel]);
    assert_eq!(table.eps_predicted, 1.0);
    assert!(table.eps_bracket.is_none());
    assert!(table.rows.iter().all(|r| r.error.is_none() && r.measured.is_none()));
    let json = sweep_json(&table);
    assert!(json.contains("\"eps_predicted\": 1.0"));
    assert!(matches!(sweep(&[1.0, 0.0], &scenario("FIG8").unwrap(), Mode::AnalyticsOnly), Err(Error::NonPositiveAmplitude(_))));
}

#[test]
fn past_the_well_nothing_interacts() {
    let mut cfg = small().to_config();
    cfg.eps = None;
    let mut rows = Vec::new();
    for a in [0.5, 1.0, 4.0] {
        cfg.a0 = a;
        cfg.x0 = 12.0;
        let s = Scenario::from_config(&cfg).unwrap();
        let r = run_scenario(&s, Mode::AnalyticsOnly).unwrap();
        rows.push(r.prediction.unwrap().outcome.unwrap());
    }
    assert!(rows.iter().all(|&k| k == OutcomeKind::NoInteraction));
}

#[test]
fn analytics_are_deterministic() {
    let a = run_scenario(&scenario("FIG9").unwrap(), Mode::AnalyticsOnly).unwrap();
    let b = run_scenario(&scenario("FIG9").unwrap(), Mode::AnalyticsOnly).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(trajectory_csv(&a), trajectory_csv(&b));
}

#[test]
fn empty_report_writes_nothing() {
    let mut r = run_scenario(&scenario("FIG7").unwrap(), Mode::AnalyticsOnly).unwrap();
    r.prediction = None;
    let dir = scratch("empty");
    assert!(matches!(render(&r, &dir), Err(Error::EmptyReport)));
    assert!(!dir.exists());
}

#[test]
fn report_round_trips_and_renders() {
    let r = run_scenario(&scenario("FIG1").unwrap(), Mode::AnalyticsOnly).unwrap();
    let dir = scratch("render");
    let files = render(&r, &dir).unwrap();
    let names: Vec<_> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["trajectory.csv", "boundaries.csv", "report.json", "overlay.svg"]);
    let json = std::fs::read_to_string(dir.join("report.json")).unwrap();
    let back = ComparisonReport::from_json(&json).unwrap();
    assert_eq!(back.to_json(), json);
    let svg = std::fs::read_to_string(dir.join("overlay.svg")).unwrap();
    assert_eq!(svg.matches("class=\"boundary\"").count(), 5);
    assert_eq!(svg.matches("class=\"trajectory\"").count(), 0);
    let csv = std::fs::read_to_string(dir.join("boundaries.csv")).unwrap();
    assert!(csv.starts_with("t,x_l,x_p,x_p_prime,x_r,regime,"));
    assert!(csv.contains(",pre,") && csv.contains(",post,"));
    let svg = overlay_svg(&run_scenario(&scenario("FIG7").unwrap(), Mode::AnalyticsOnly).unwrap());
    assert_eq!(svg.matches("class=\"trajectory\"").count(), 1);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn small_comparison_runs_end_to_end() {
    let s = small();
    let r = run_scenario(&s, Mode::Compare).unwrap();
    let m = r.measurement.as_ref().unwrap();
    assert!(m.steps > 0 && m.dt > 0.0);
    assert!(m.mass_drift < 1e-10, "{}", m.mass_drift);
    assert_eq!(r.health.iter().map(|c| c.name.as_str()).collect::<Vec<_>>(), ["mass_drift", "momentum_drift", "wrap_guard"]);
    assert!(r.check("class_match").is_some());
    // Sitting still on the floor before the fan arrives.
    let row = r.trajectory.iter().find(|row| row.t == 0.5).unwrap();
    assert!((row.x_meas.unwrap() - 5.0).abs() < 0.2, "{:?}", row);
    assert!(r.heatmap.is_some());
    let sim_only = run_scenario(&s, Mode::SimulationOnly).unwrap();
    assert!(sim_only.passed && sim_only.prediction.is_none() && sim_only.checks.is_empty());
    assert_eq!(sim_only.measurement.as_ref().unwrap().steps, m.steps);
    let svg = overlay_svg(&r);
    assert_eq!(svg.matches("class=\"track\"").count(), 1);
}

#[test]
fn track_is_cut_where_it_jumps_to_another_crest() {
    use kdv_tunnel::tracker::{TrackFlag, TrackPoint};
    let s = scenario("FIG8").unwrap().with_amplitude(1.0).unwrap();
    let pt = |t: f64, x: f64, a: f64| TrackPoint { t, x_peak: x, a_meas: a, ubar_local: -1.0, flag: TrackFlag::Ok };
    let mut pts: Vec<_> = (0..=225).map(|i| pt(0.1 * i as f64, 50.0 - 0.4 * i as f64, 1.0)).collect();
    assert_eq!(coherent_track(&pts, &s).len(), pts.len());
    pts.push(pt(23.6, -52.3, 1.6));
    pts.push(pt(40.0, -600.0, 0.05));
    assert_eq!(coherent_track(&pts, &s).len(), 226);
    let (kind, t_last) = measured_outcome(coherent_track(&pts, &s), &s, 8.0);
    assert_eq!(kind, Some(OutcomeKind::EmbedLW));
    assert_eq!(t_last, Some(22.5));
    // Judged on the raw track, the late crest would read as an early shock contact.
    assert_eq!(measured_outcome(&pts[..227], &s, 8.0).0, Some(OutcomeKind::EmbedDSW));
}
