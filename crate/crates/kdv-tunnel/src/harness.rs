//! Scenario catalog, prediction-vs-simulation comparison, amplitude sweeps
//! and report rendering. Everything here is concrete `f64`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meanfield::{boundaries, critical_time, Regime, WellSpec};
use crate::sim::{build_initial, conserved_quantities, wrap_guard, Grid, Solver, SolverConfig, WaveField};
use crate::soliton::{
    classify, critical_amplitude_dsw, phase_shift, q_invariant, trajectory_left, trajectory_well, transmit, AmpLaw,
    Law, OutcomeKind, Segment, TrajectoryPlan,
};
use crate::meanfield::Region;
use crate::tracker::{
    measure_edges, measure_phase_shift, DetectOptions, EdgeOptions, EdgeSet, FreeFlight, TrackFlag, TrackPoint,
    Tracker,
};

/// Caption of the embedding-in-shock figure gives `a_M = 1`; its data files
/// and the surrounding discussion use 0.1.
pub const FIG10_NOTE: &str = "caption states a_M = 1; data files and text indicate a = 0.1 (catalog uses 0.1)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub dt: f64,
    pub dealias_fraction: f64,
    pub smoothing_delta: f64,
    pub sample_interval: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
}

fn default_cfl() -> f64 {
    SolverConfig::<f64>::default().cfl
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverConfig::<f64>::default().into()
    }
}

impl From<SolverConfig<f64>> for SolverSpec {
    fn from(c: SolverConfig<f64>) -> Self {
        Self {
            dt: c.dt,
            dealias_fraction: c.dealias_fraction,
            smoothing_delta: c.smoothing_delta,
            sample_interval: c.sample_interval,
            cfl: c.cfl,
        }
    }
}

impl From<SolverSpec> for SolverConfig<f64> {
    fn from(s: SolverSpec) -> Self {
        Self {
            dt: s.dt,
            dealias_fraction: s.dealias_fraction,
            smoothing_delta: s.smoothing_delta,
            sample_interval: s.sample_interval,
            cfl: s.cfl,
        }
    }
}

/// Pass/fail thresholds for comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Trajectory RMSE as a fraction of the predicted traversal.
    pub traj_rel: f64,
    /// Final amplitude, relative, when the backgrounds differ.
    pub amp_rel: f64,
    /// Final amplitude, relative, when the soliton ends on its initial background.
    pub amp_rel_transparent: f64,
    /// Absolute phase offset when no shift is predicted.
    pub phase_abs: f64,
    /// Region edges, relative.
    pub edge_rel: f64,
    /// Plateau disappearance time, relative to `t*`.
    pub plateau_rel: f64,
    /// Relative mass and momentum drift.
    pub drift_rel: f64,
    /// Largest `|u|` near the domain ends relative to the initial peak.
    pub wrap_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            traj_rel: 0.05,
            amp_rel: 0.05,
            amp_rel_transparent: 0.02,
            phase_abs: 2.0,
            edge_rel: 0.10,
            plateau_rel: 0.15,
            drift_rel: 1e-6,
            wrap_rel: 1e-6,
        }
    }
}

/// JSON form of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_label")]
    pub label: String,
    #[serde(rename = "U0")]
    pub u0: f64,
    pub l: f64,
    pub a0: f64,
    pub x0: f64,
    pub t_end: f64,
    #[serde(default)]
    pub sample_times: Vec<f64>,
    /// Shock/linear-wave splitting amplitude; geometric default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn default_label() -> String {
    "custom".into()
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        Self::from_json(&text)
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), message: e.to_string() }
}

/// A validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub label: String,
    pub well: WellSpec<f64>,
    pub a0: f64,
    pub x0: f64,
    pub t_end: f64,
    pub sample_times: Vec<f64>,
    pub eps: f64,
    pub grid: Grid<f64>,
    pub solver: SolverConfig<f64>,
    pub tolerances: Tolerances,
    pub output_dir: Option<String>,
    pub note: Option<String>,
}

impl Scenario {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        let well = WellSpec::new(cfg.u0, cfg.l)?;
        let grid = Grid::new(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.n)?;
        let solver: SolverConfig<f64> = cfg.solver.into();
        solver.validate()?;
        if !(cfg.t_end > 0.0 && cfg.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be positive, got {}", cfg.t_end)));
        }
        if !(cfg.a0 >= 0.0 && cfg.a0.is_finite()) {
            return Err(Error::Config(format!("a0 must be non-negative, got {}", cfg.a0)));
        }
        let eps = cfg.eps.unwrap_or_else(|| critical_amplitude_dsw(cfg.x0, &well));
        let s = Self {
            label: cfg.label.clone(),
            well,
            a0: cfg.a0,
            x0: cfg.x0,
            t_end: cfg.t_end,
            sample_times: cfg.sample_times.clone(),
            eps,
            grid,
            solver,
            tolerances: cfg.tolerances,
            output_dir: cfg.output_dir.clone(),
            note: cfg.note.clone(),
        };
        s.validate()?;
        Ok(s)
    }

    /// Geometry checks: initial-data margins and no wrap-around.
    pub fn validate(&self) -> Result<()> {
        build_initial(&self.well, self.a0, self.x0, Grid::new(self.grid.x_min, self.grid.x_max, 256)?, self.solver.smoothing_delta)?;
        wrap_guard(&self.grid, &self.well, self.a0, self.x0, self.t_end, self.solver.smoothing_delta)
    }

    pub fn to_config(&self) -> ScenarioConfig {
        ScenarioConfig {
            label: self.label.clone(),
            u0: self.well.u0,
            l: self.well.l,
            a0: self.a0,
            x0: self.x0,
            t_end: self.t_end,
            sample_times: self.sample_times.clone(),
            eps: Some(self.eps),
            grid: GridSpec { x_min: self.grid.x_min, x_max: self.grid.x_max, n: self.grid.n },
            solver: self.solver.into(),
            tolerances: self.tolerances,
            output_dir: self.output_dir.clone(),
            note: self.note.clone(),
        }
    }

    /// Same scenario with a shorter or longer horizon.
    pub fn with_t_end(mut self, t_end: f64) -> Result<Self> {
        self.t_end = t_end;
        self.sample_times.retain(|&t| t <= t_end);
        self.validate()?;
        Ok(self)
    }

    /// Same scenario with another trial amplitude.
    pub fn with_amplitude(mut self, a0: f64) -> Result<Self> {
        self.a0 = a0;
        self.label = format!("{}-a{}", self.label, a0);
        self.validate()?;
        Ok(self)
    }

    pub fn is_bare_well(&self) -> bool {
        self.a0 == 0.0
    }
}

fn catalog_entry(label: &str, l: f64, a0: f64, x0: f64, t_end: f64, grid: (f64, f64), note: Option<&str>) -> Scenario {
    let cfg = ScenarioConfig {
        label: label.into(),
        u0: -1.0,
        l,
        a0,
        x0,
        t_end,
        sample_times: if a0 == 0.0 { vec![3.0, 5.0, 20.0, 100.0] } else { Vec::new() },
        eps: None,
        grid: GridSpec { x_min: grid.0, x_max: grid.1, n: 16384 },
        solver: SolverSpec::default(),
        tolerances: Tolerances::default(),
        output_dir: None,
        note: note.map(str::to_string),
    };
    Scenario::from_config(&cfg).expect("catalog scenarios are valid")
}

/// Built-in scenarios, one per figure. All use `U0 = -1`.
pub fn catalog() -> Vec<Scenario> {
    let default = (-700.0, 700.0);
    vec![
        catalog_entry("FIG1", 20.0, 0.0, 0.0, 100.0, (-1300.0, 300.0), None),
        catalog_entry("FIG5", 30.0, 8.0, -100.0, 30.0, default, None),
        catalog_entry("FIG6", 30.0, 5.0, -100.0, 30.0, default, None),
        catalog_entry("FIG7", 100.0, 3.0, 50.0, 50.0, default, None),
        catalog_entry("FIG8", 100.0, 2.0, 50.0, 50.0, default, None),
        catalog_entry("FIG9", 100.0, 1.0, 50.0, 50.0, default, None),
        catalog_entry("FIG10", 200.0, 0.1, 50.0, 100.0, (-1300.0, 500.0), Some(FIG10_NOTE)),
    ]
}

/// Catalog lookup by label, case-insensitive.
pub fn scenario(label: &str) -> Option<Scenario> {
    catalog().into_iter().find(|s| s.label.eq_ignore_ascii_case(label))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Compare,
    AnalyticsOnly,
    SimulationOnly,
}

impl Mode {
    fn analytics(self) -> bool {
        self != Mode::SimulationOnly
    }

    fn simulation(self) -> bool {
        self != Mode::AnalyticsOnly
    }
}

/// Predicted region edges at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRow {
    pub t: f64,
    pub x_l: f64,
    pub x_p: f64,
    pub x_p_prime: f64,
    pub x_r: f64,
    pub post_critical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSummary {
    pub outcome: Option<OutcomeKind>,
    pub eps: f64,
    pub t_star: f64,
    pub a_final: Option<f64>,
    /// Phase offset predicted for transmission between equal backgrounds.
    pub delta_x: Option<f64>,
    pub crossings: Vec<f64>,
    pub plan_error: Option<String>,
    pub boundaries: Vec<BoundaryRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSummary {
    pub outcome: Option<OutcomeKind>,
    /// Last time the soliton was cleanly detected.
    pub t_last_detected: Option<f64>,
    pub x_final: Option<f64>,
    pub a_final: Option<f64>,
    /// First clean detection right of the well after which it stays there.
    pub t_exit: Option<f64>,
    /// Offset from the free-flight line (solitons starting left of the well).
    pub delta_x: Option<f64>,
    pub plateau_end: Option<f64>,
    pub edges: Vec<EdgeSet<f64>>,
    pub mass_drift: f64,
    pub momentum_drift: f64,
    pub wrap_level: f64,
    pub steps: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeError {
    pub t: f64,
    pub edge: String,
    pub predicted: f64,
    pub measured: Option<f64>,
    pub rel_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub traj_rmse: Option<f64>,
    pub amp_rel_err: Option<f64>,
    pub phase_err: Option<f64>,
    pub class_match: Option<bool>,
    pub plateau_rel_err: Option<f64>,
    pub edge_errors: Vec<EdgeError>,
}

/// One tolerance test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value.is_finite() && value <= tolerance }
    }

    fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), value: if ok { 1.0 } else { 0.0 }, tolerance: 1.0, passed: ok }
    }
}

/// One output sample of the predicted and measured paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajRow {
    pub t: f64,
    pub x_pred: Option<f64>,
    pub a_pred: Option<f64>,
    pub x_meas: Option<f64>,
    pub a_meas: Option<f64>,
    pub flag: Option<TrackFlag>,
}

/// Coarse space-time picture of the field for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub x_min: f64,
    pub x_max: f64,
    pub times: Vec<f64>,
    pub rows: Vec<Vec<f32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub label: String,
    pub mode: Mode,
    pub config: ScenarioConfig,
    pub prediction: Option<PredictionSummary>,
    pub measurement: Option<MeasurementSummary>,
    pub metrics: Metrics,
    /// Prediction-vs-measurement comparisons; these decide `passed`.
    pub checks: Vec<Check>,
    /// Solver diagnostics (drift, wrap-around), reported but not scored.
    pub health: Vec<Check>,
    pub passed: bool,
    pub diagnostics: Vec<String>,
    #[serde(skip)]
    pub trajectory: Vec<TrajRow>,
    #[serde(skip)]
    pub heatmap: Option<Heatmap>,
}

impl ComparisonReport {
    /// Deterministic JSON encoding.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are always serialisable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Analytic predictions together with the full plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub summary: PredictionSummary,
    pub plan: Option<TrajectoryPlan<f64>>,
}

fn free_flight_plan(s: &Scenario) -> TrajectoryPlan<f64> {
    TrajectoryPlan {
        well: s.well,
        outcome: OutcomeKind::NoInteraction,
        segments: vec![Segment {
            region: Region::Right,
            t_start: 0.0,
            t_end: f64::INFINITY,
            law: Law::Linear { x_ref: s.x0, t_ref: 0.0, speed: 2.0 * s.a0 },
            amp: AmpLaw::Constant(s.a0),
            approximate: false,
        }],
        crossings: Vec::new(),
        a_final: Some(s.a0),
    }
}

fn output_times(s: &Scenario) -> Vec<f64> {
    let n = (s.t_end / s.solver.sample_interval - 1e-9).ceil() as usize;
    (0..=n).map(|k| (k as f64 * s.solver.sample_interval).min(s.t_end)).collect()
}

/// Everything the analytics predict, without touching the solver.
pub fn predict(s: &Scenario) -> Result<Prediction> {
    let well = &s.well;
    let t_star = critical_time(well);
    let mut rows = Vec::new();
    for t in output_times(s).into_iter().filter(|&t| t > 0.0) {
        let b = boundaries(well, t)?;
        rows.push(BoundaryRow {
            t,
            x_l: b.x_l,
            x_p: b.x_p,
            x_p_prime: b.x_p_prime,
            x_r: b.x_r,
            post_critical: b.regime == Regime::PostCritical,
        });
    }
    let mut summary = PredictionSummary {
        outcome: None,
        eps: s.eps,
        t_star,
        a_final: None,
        delta_x: None,
        crossings: Vec::new(),
        plan_error: None,
        boundaries: rows,
    };
    if s.is_bare_well() {
        return Ok(Prediction { summary, plan: None });
    }
    let kind = classify(s.a0, s.x0, well, s.eps)?;
    summary.outcome = Some(kind);
    let plan = if s.x0 <= well.origin {
        trajectory_left(s.a0, s.x0, well)
    } else if s.x0 < well.right_edge() {
        trajectory_well(s.a0, s.x0, well, s.eps)
    } else {
        Ok(free_flight_plan(s))
    };
    let u_start = well.initial(s.x0);
    match kind {
        OutcomeKind::Tunnel | OutcomeKind::NoInteraction => {
            summary.a_final = Some(transmit(s.a0, u_start, 0.0)?);
            if u_start == 0.0 {
                let q = q_invariant(s.a0, u_start)?;
                let (_, dx) = phase_shift((s.a0 / 2.0).sqrt(), q, 0.0, 0.0, s.x0)?;
                summary.delta_x = Some(dx);
            }
        }
        _ => {}
    }
    let plan = match plan {
        Ok(p) => {
            summary.crossings = p.crossings.clone();
            Some(p)
        }
        Err(e) => {
            summary.plan_error = Some(e.to_string());
            None
        }
    };
    Ok(Prediction { summary, plan })
}

fn rel(measured: f64, predicted: f64) -> f64 {
    (measured - predicted).abs() / predicted.abs().max(f64::MIN_POSITIVE)
}

/// Last `(t, x)` pairs of clean detections, for velocity estimates.
fn velocity(points: &[TrackPoint<f64>]) -> Option<f64> {
    let mut ok = points.iter().rev().filter(|p| p.flag == TrackFlag::Ok);
    let b = ok.next()?;
    let a = ok.find(|p| b.t - p.t >= 0.5)?;
    Some((b.x_peak - a.x_peak) / (b.t - a.t))
}

/// Leading part of a track that follows one soliton.
///
/// Once the soliton is lost the tracker can latch onto a shock crest or a
/// radiation bump. The track is cut at the first clean detection whose
/// position leaves the extrapolated path by more than a soliton width, or
/// whose amplitude changes by more than a factor of two.
pub fn coherent_track<'a>(points: &'a [TrackPoint<f64>], s: &Scenario) -> &'a [TrackPoint<f64>] {
    let width = (2.0 / s.a0.max(1e-6)).sqrt();
    let mut prev: Option<TrackPoint<f64>> = None;
    for (i, p) in points.iter().enumerate().filter(|(_, p)| p.flag == TrackFlag::Ok) {
        if let Some(q) = prev {
            let v = velocity(&points[..i]).unwrap_or(6.0 * s.well.initial(s.x0) + 2.0 * s.a0);
            let off = (p.x_peak - q.x_peak - v * (p.t - q.t)).abs();
            let ratio = p.a_meas / q.a_meas;
            if off > width.max(2.0) || !(0.5..=2.0).contains(&ratio) {
                return &points[..i];
            }
        }
        prev = Some(*p);
    }
    points
}

/// Outcome read off a track.
///
/// A soliton still cleanly detected at the end is classed by position; a
/// lost one by when it met the shock. The tracker loses the soliton once the
/// shock's crests enter its search window, so contact is placed one window
/// half-width (at the closing speed) after the last clean detection.
pub fn measured_outcome(points: &[TrackPoint<f64>], s: &Scenario, half_width: f64) -> (Option<OutcomeKind>, Option<f64>) {
    let Some(idx) = points.iter().rposition(|p| p.flag == TrackFlag::Ok) else {
        return (None, None);
    };
    let ok = points[idx];
    let well = &s.well;
    let tail = (0.05 * s.t_end).max(2.0 * s.solver.sample_interval);
    if ok.t >= s.t_end - tail {
        let kind = if s.x0 >= well.right_edge() {
            Some(OutcomeKind::NoInteraction)
        } else if ok.x_peak > well.right_edge() {
            Some(OutcomeKind::Tunnel)
        } else if s.x0 <= well.origin {
            None
        } else {
            Some(OutcomeKind::EmbedRW)
        };
        return (kind, Some(ok.t));
    }
    let v = velocity(&points[..=idx]).unwrap_or(2.0 * well.u0 + 2.0 * s.a0);
    let closing = 2.0 * well.u0 - v;
    let contact = if closing > 1e-3 { ok.t + half_width / closing } else { f64::INFINITY };
    let kind = if contact < critical_time(well) { OutcomeKind::EmbedDSW } else { OutcomeKind::EmbedLW };
    (Some(kind), Some(ok.t))
}

/// Track with a drift equal to the last measured velocity.
struct DriftGuide {
    v: f64,
    anchor: (f64, f64),
}

fn heat_window(s: &Scenario, pred: Option<&Prediction>) -> (f64, f64) {
    let g = &s.grid;
    let mut lo = s.well.origin.min(s.x0) + 12.0 * s.well.u0 * s.t_end;
    let mut hi = s.well.right_edge().max(s.x0);
    if let Some(p) = pred.and_then(|p| p.plan.as_ref()) {
        if let Ok(x) = p.position(s.t_end) {
            hi = hi.max(x);
            lo = lo.min(x);
        }
    }
    ((lo - 20.0).max(g.x_min), (hi + 20.0).min(g.x_max))
}

const HEAT_COLS: usize = 320;
const HEAT_ROWS: usize = 160;

struct SimOutput {
    points: Vec<TrackPoint<f64>>,
    edges: Vec<EdgeSet<f64>>,
    heat: Heatmap,
    mass_drift: f64,
    momentum_drift: f64,
    wrap_level: f64,
    steps: usize,
    dt: f64,
    half_width: f64,
}

fn simulate(s: &Scenario, pred: Option<&Prediction>) -> Result<SimOutput> {
    let field = build_initial(&s.well, s.a0, s.x0, s.grid, s.solver.smoothing_delta)?;
    let solver = Solver::new(s.grid, s.solver)?;
    let (m0, p0, _) = conserved_quantities(&field);
    let peak0 = field.max_abs();
    let opts = DetectOptions::for_amplitude(s.a0.max(1e-6));
    let half_width = opts.search_half_width();
    let guide = std::cell::RefCell::new(DriftGuide { v: 6.0 * s.well.initial(s.x0) + 2.0 * s.a0, anchor: (0.0, s.x0) });
    let mut tracker = Tracker::new(s.x0, 0.0, |t: f64| {
        let g = guide.borrow();
        g.anchor.1 + g.v * (t - g.anchor.0)
    }, opts);
    let (hx0, hx1) = heat_window(s, pred);
    let times = output_times(s);
    let stride = times.len().div_ceil(HEAT_ROWS).max(1);
    let mut heat = Heatmap { x_min: hx0, x_max: hx1, times: Vec::new(), rows: Vec::new() };
    let mut edges = Vec::new();
    let mut last: Option<WaveField<f64>> = None;
    let mut k = 0usize;
    let mut prev_ok: Option<(f64, f64)> = None;
    let stats = solver.evolve_with(&field, s.t_end, |f| {
        if k % stride == 0 || f.t >= s.t_end {
            heat.times.push(f.t);
            heat.rows.push(
                (0..HEAT_COLS)
                    .map(|c| {
                        let x = hx0 + (hx1 - hx0) * (c as f64 + 0.5) / HEAT_COLS as f64;
                        f.u[f.grid.index_of(x)] as f32
                    })
                    .collect(),
            );
        }
        k += 1;
        if s.is_bare_well() {
            if f.t > 0.0 {
                edges.push(measure_edges(f, &s.well, &EdgeOptions::default()));
            }
        } else if f.t > 0.0 {
            let p = tracker.observe(f)?;
            if p.flag == TrackFlag::Ok {
                let mut g = guide.borrow_mut();
                if let Some((t0, x0)) = prev_ok {
                    if p.t > t0 {
                        g.v = (p.x_peak - x0) / (p.t - t0);
                    }
                }
                g.anchor = (p.t, p.x_peak);
                prev_ok = Some((p.t, p.x_peak));
            }
        }
        if f.t >= s.t_end {
            last = Some(f.clone());
        }
        Ok(())
    })?;
    let end = last.ok_or_else(|| Error::Config("solver produced no final snapshot".into()))?;
    let (m1, p1, _) = conserved_quantities(&end);
    let drift = |a: f64, b: f64, scale: f64| (b - a).abs() / scale.max(1e-300);
    Ok(SimOutput {
        points: tracker.into_points(),
        edges,
        heat,
        mass_drift: drift(m0, m1, m0.abs().max(p0.sqrt())),
        momentum_drift: drift(p0, p1, p0),
        wrap_level: stats.edge_max / peak0.max(1e-300),
        steps: stats.steps,
        dt: stats.dt,
        half_width,
    })
}

fn exit_time(points: &[TrackPoint<f64>], s: &Scenario) -> Option<f64> {
    let edge = s.well.right_edge();
    let ok: Vec<&TrackPoint<f64>> = points.iter().filter(|p| p.flag == TrackFlag::Ok).collect();
    let last_inside = ok.iter().rposition(|p| p.x_peak <= edge);
    let first_out = match last_inside {
        Some(i) => ok.get(i + 1),
        None => ok.first(),
    }?;
    (first_out.x_peak > edge).then_some(first_out.t)
}

fn final_amplitude(points: &[TrackPoint<f64>], from: f64) -> Option<f64> {
    let mut v: Vec<f64> = points.iter().filter(|p| p.flag == TrackFlag::Ok && p.t >= from).map(|p| p.a_meas).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(v[v.len() / 2])
}

fn plateau_end(edges: &[EdgeSet<f64>]) -> Option<f64> {
    let seen = edges.iter().position(|e| e.plateau)?;
    edges[seen..].iter().find(|e| !e.plateau).map(|e| e.t)
}

fn edge_errors(pred: &PredictionSummary, edges: &[EdgeSet<f64>], times: &[f64]) -> Vec<EdgeError> {
    let mut out = Vec::new();
    for &t in times {
        let Some(row) = pred.boundaries.iter().find(|r| (r.t - t).abs() < 1e-9) else { continue };
        let Some(e) = edges.iter().find(|e| (e.t - t).abs() < 1e-9) else { continue };
        let mut list = vec![("x_L", row.x_l, e.x_l), ("x_P", row.x_p, e.x_p), ("x_R", row.x_r, e.x_r)];
        if !row.post_critical {
            list.insert(2, ("x_P'", row.x_p_prime, e.x_p_prime));
        }
        for (name, p, m) in list {
            out.push(EdgeError { t, edge: name.into(), predicted: p, measured: m, rel_err: m.map(|m| rel(m, p)) });
        }
    }
    out
}

/// Runs analytics and/or the solver for one scenario and scores them.
///
/// Solver and tracker failures end up in `diagnostics` of a failed report;
/// only invalid scenarios are returned as errors.
pub fn run_scenario(s: &Scenario, mode: Mode) -> Result<ComparisonReport> {
    s.validate()?;
    let tol = s.tolerances;
    let mut report = ComparisonReport {
        label: s.label.clone(),
        mode,
        config: s.to_config(),
        prediction: None,
        measurement: None,
        metrics: Metrics::default(),
        checks: Vec::new(),
        health: Vec::new(),
        passed: false,
        diagnostics: s.note.iter().cloned().collect(),
        trajectory: Vec::new(),
        heatmap: None,
    };
    let pred = if mode.analytics() {
        match predict(s) {
            Ok(p) => Some(p),
            Err(e) => {
                report.diagnostics.push(format!("prediction failed: {e}"));
                None
            }
        }
    } else {
        None
    };
    if let Some(p) = &pred {
        if let Some(e) = &p.summary.plan_error {
            report.diagnostics.push(format!("no closed-form plan: {e}"));
        }
    }
    let sim = if mode.simulation() {
        match simulate(s, pred.as_ref()) {
            Ok(o) => Some(o),
            Err(e) => {
                report.diagnostics.push(format!("simulation failed: {e}"));
                None
            }
        }
    } else {
        None
    };

    let plan = pred.as_ref().and_then(|p| p.plan.as_ref());
    let times = output_times(s);
    report.trajectory = times
        .iter()
        .map(|&t| {
            let x_pred = plan.and_then(|p| p.position(t).ok());
            let a_pred = plan.and_then(|p| p.amplitude(t).ok().flatten());
            let m = sim.as_ref().and_then(|o| o.points.iter().find(|p| (p.t - t).abs() < 1e-9));
            TrajRow {
                t,
                x_pred,
                a_pred,
                x_meas: m.filter(|p| p.flag == TrackFlag::Ok).map(|p| p.x_peak),
                a_meas: m.filter(|p| p.flag == TrackFlag::Ok).map(|p| p.a_meas),
                flag: m.map(|p| p.flag),
            }
        })
        .collect();

    if let Some(o) = &sim {
        let (outcome, t_last) = if s.is_bare_well() { (None, None) } else { measured_outcome(coherent_track(&o.points, s), s, o.half_width) };
        let t_exit = exit_time(&o.points, s);
        let last_ok = coherent_track(&o.points, s).iter().rev().find(|p| p.flag == TrackFlag::Ok);
        let a_final = match t_exit {
            Some(te) => final_amplitude(&o.points, te + 0.5 * (s.t_end - te)),
            None => last_ok.map(|p| p.a_meas),
        };
        let delta_x = match t_exit {
            Some(te) if s.x0 <= s.well.origin => {
                match measure_phase_shift(&o.points, FreeFlight { x0: s.x0, t0: 0.0 }, te) {
                    Ok(d) => Some(d),
                    Err(e) => {
                        report.diagnostics.push(format!("phase shift: {e}"));
                        None
                    }
                }
            }
            _ => None,
        };
        report.measurement = Some(MeasurementSummary {
            outcome,
            t_last_detected: t_last,
            x_final: last_ok.map(|p| p.x_peak),
            a_final,
            t_exit,
            delta_x,
            plateau_end: plateau_end(&o.edges),
            edges: s
                .sample_times
                .iter()
                .filter_map(|&t| o.edges.iter().find(|e| (e.t - t).abs() < 1e-9).copied())
                .collect(),
            mass_drift: o.mass_drift,
            momentum_drift: o.momentum_drift,
            wrap_level: o.wrap_level,
            steps: o.steps,
            dt: o.dt,
        });
        report.heatmap = Some(o.heat.clone());
        report.health.push(Check::at_most("mass_drift", o.mass_drift, tol.drift_rel));
        report.health.push(Check::at_most("momentum_drift", o.momentum_drift, tol.drift_rel));
        report.health.push(Check::at_most("wrap_guard", o.wrap_level, tol.wrap_rel));
    }
    if let Some(p) = &pred {
        report.prediction = Some(p.summary.clone());
    }

    if let (Some(p), Some(o), Some(m)) = (&pred, &sim, &report.measurement) {
        let ps = &p.summary;
        if s.is_bare_well() {
            let errs = edge_errors(ps, &o.edges, &s.sample_times);
            for e in &errs {
                let name = format!("edge {} t={}", e.edge, e.t);
                report.checks.push(Check::at_most(name, e.rel_err.unwrap_or(f64::INFINITY), tol.edge_rel));
            }
            report.metrics.edge_errors = errs;
            if s.t_end > ps.t_star {
                let r = m.plateau_end.map(|t| rel(t, ps.t_star));
                report.metrics.plateau_rel_err = r;
                report.checks.push(Check::at_most("plateau_end", r.unwrap_or(f64::INFINITY), tol.plateau_rel));
            }
        } else {
            let class_match = ps.outcome.is_some() && ps.outcome == m.outcome;
            report.metrics.class_match = Some(class_match);
            report.checks.push(Check::flag("class_match", class_match));
            if let Some(plan) = &p.plan {
                let mut sq = 0.0;
                let mut n = 0usize;
                for pt in o.points.iter().filter(|q| q.flag == TrackFlag::Ok && !plan.is_approximate(q.t)) {
                    if let Ok(x) = plan.position(pt.t) {
                        sq += (pt.x_peak - x).powi(2);
                        n += 1;
                    }
                }
                let traversal = plan.position(s.t_end).map(|x| (x - s.x0).abs()).unwrap_or(f64::NAN);
                if n > 0 && traversal > 0.0 {
                    let r = (sq / n as f64).sqrt() / traversal;
                    report.metrics.traj_rmse = Some(r);
                    if ps.outcome == Some(OutcomeKind::Tunnel) {
                        report.checks.push(Check::at_most("traj_rmse", r, tol.traj_rel));
                    }
                }
            }
            if let (Some(ap), Some(am)) = (ps.a_final, m.a_final) {
                let r = rel(am, ap);
                report.metrics.amp_rel_err = Some(r);
                let limit = if s.well.initial(s.x0) == 0.0 { tol.amp_rel_transparent } else { tol.amp_rel };
                report.checks.push(Check::at_most("amp_rel_err", r, limit));
            }
            if let (Some(dp), Some(dm)) = (ps.delta_x, m.delta_x) {
                let e = dm - dp;
                report.metrics.phase_err = Some(e);
                report.checks.push(Check::at_most("phase_err", e.abs(), tol.phase_abs));
            }
        }
    }
    report.passed = match mode {
        Mode::Compare => !report.checks.is_empty() && report.checks.iter().all(|c| c.passed) && report.measurement.is_some() && report.prediction.is_some(),
        Mode::AnalyticsOnly => report.prediction.is_some(),
        Mode::SimulationOnly => report.measurement.is_some(),
    };
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub a0: f64,
    pub predicted: Option<OutcomeKind>,
    pub measured: Option<OutcomeKind>,
    pub class_match: Option<bool>,
    pub t_last_detected: Option<f64>,
    pub x_final_pred: Option<f64>,
    pub x_final_meas: Option<f64>,
    pub a_final_pred: Option<f64>,
    pub a_final_meas: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub template: String,
    pub rows: Vec<SweepRow>,
    /// Splitting amplitude used by the predictions.
    pub eps_predicted: f64,
    /// Largest amplitude measured as shock-embedded and smallest measured as
    /// linear-wave-embedded, when both occur in order.
    pub eps_bracket: Option<(f64, f64)>,
    pub eps_empirical: Option<f64>,
}

/// Runs the template at each amplitude; failed rows carry their error.
pub fn sweep(a_values: &[f64], template: &Scenario, mode: Mode) -> Result<SweepTable> {
    if let Some(a) = a_values.iter().find(|a| !(**a > 0.0)) {
        return Err(Error::NonPositiveAmplitude(*a));
    }
    let mut rows = Vec::new();
    for &a in a_values {
        let mut row = SweepRow {
            a0: a,
            predicted: None,
            measured: None,
            class_match: None,
            t_last_detected: None,
            x_final_pred: None,
            x_final_meas: None,
            a_final_pred: None,
            a_final_meas: None,
            error: None,
        };
        match template.clone().with_amplitude(a).and_then(|s| run_scenario(&s, mode)) {
            Ok(r) => {
                let last = r.trajectory.last();
                row.predicted = r.prediction.as_ref().and_then(|p| p.outcome);
                row.x_final_pred = last.and_then(|t| t.x_pred);
                row.a_final_pred = last.and_then(|t| t.a_pred);
                if let Some(m) = &r.measurement {
                    row.measured = m.outcome;
                    row.t_last_detected = m.t_last_detected;
                    row.x_final_meas = m.x_final;
                    row.a_final_meas = m.a_final;
                }
                row.class_match = r.metrics.class_match;
                if !r.diagnostics.is_empty() && r.measurement.is_none() && mode.simulation() {
                    row.error = Some(r.diagnostics.join("; "));
                }
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        rows.push(row);
    }
    let dsw_max = rows.iter().filter(|r| r.measured == Some(OutcomeKind::EmbedDSW)).map(|r| r.a0).fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.max(a))));
    let lw_min = rows.iter().filter(|r| r.measured == Some(OutcomeKind::EmbedLW)).map(|r| r.a0).fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.min(a))));
    let eps_bracket = match (dsw_max, lw_min) {
        (Some(lo), Some(hi)) if lo < hi => Some((lo, hi)),
        _ => None,
    };
    Ok(SweepTable {
        template: template.label.clone(),
        rows,
        eps_predicted: template.eps,
        eps_bracket,
        eps_empirical: eps_bracket.map(|(lo, hi)| 0.5 * (lo + hi)),
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `t,x_pred,x_meas,a_pred,a_meas` rows.
pub fn trajectory_csv(report: &ComparisonReport) -> String {
    let mut s = String::from("t,x_pred,x_meas,a_pred,a_meas\n");
    for r in &report.trajectory {
        let _ = writeln!(s, "{},{},{},{},{}", r.t, opt(r.x_pred), opt(r.x_meas), opt(r.a_pred), opt(r.a_meas));
    }
    s
}

/// Predicted edges with the measured ones where available.
pub fn boundaries_csv(report: &ComparisonReport) -> String {
    let mut s = String::from("t,x_l,x_p,x_p_prime,x_r,regime,x_l_meas,x_p_meas,x_p_prime_meas,x_r_meas\n");
    let measured: BTreeMap<String, &EdgeSet<f64>> = report
        .measurement
        .iter()
        .flat_map(|m| m.edges.iter())
        .map(|e| (format!("{:.6}", e.t), e))
        .collect();
    if let Some(p) = &report.prediction {
        for b in &p.boundaries {
            let m = measured.get(&format!("{:.6}", b.t));
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                b.t,
                b.x_l,
                b.x_p,
                b.x_p_prime,
                b.x_r,
                if b.post_critical { "post" } else { "pre" },
                opt(m.and_then(|e| e.x_l)),
                opt(m.and_then(|e| e.x_p)),
                opt(m.and_then(|e| e.x_p_prime)),
                opt(m.and_then(|e| e.x_r)),
            );
        }
    }
    s
}

fn color(v: f32, lo: f32, hi: f32) -> String {
    let s = if hi > lo { ((v - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.5 };
    let r = (255.0 * s) as u8;
    let b = (255.0 * (1.0 - s)) as u8;
    let g = (255.0 * (1.0 - (2.0 * s - 1.0).abs()) * 0.8) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Space-time overlay: field heatmap, predicted region edges (the
/// post-critical inner edge drawn separately from the plateau corner) and
/// predicted and measured trajectories.
pub fn overlay_svg(report: &ComparisonReport) -> String {
    let (w, h) = (800.0, 500.0);
    let t_end = report.config.t_end;
    let (x0, x1) = match &report.heatmap {
        Some(hm) => (hm.x_min, hm.x_max),
        None => (report.config.grid.x_min, report.config.grid.x_max),
    };
    let px = |x: f64| (x - x0) / (x1 - x0) * w;
    let py = |t: f64| h - t / t_end * h;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<title>{}</title>\n",
        report.label
    );
    if let Some(hm) = &report.heatmap {
        let lo = hm.rows.iter().flatten().fold(f32::INFINITY, |m, v| m.min(*v));
        let hi = hm.rows.iter().flatten().fold(f32::NEG_INFINITY, |m, v| m.max(*v));
        let cw = w / HEAT_COLS as f64;
        for (i, row) in hm.rows.iter().enumerate() {
            let t_top = hm.times.get(i + 1).copied().unwrap_or(t_end);
            let (y0, y1) = (py(t_top), py(hm.times[i]));
            for (j, v) in row.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                    j as f64 * cw,
                    y0,
                    cw + 0.05,
                    (y1 - y0).max(0.5),
                    color(*v, lo, hi)
                );
            }
        }
    }
    let polyline = |pts: &[(f64, f64)], class: &str, style: &str| -> String {
        let body: Vec<String> = pts.iter().map(|(x, t)| format!("{:.2},{:.2}", px(*x), py(*t))).collect();
        format!("<polyline class=\"{class}\" fill=\"none\" {style} points=\"{}\"/>\n", body.join(" "))
    };
    if let Some(p) = &report.prediction {
        let b = &p.boundaries;
        let dashed = "stroke=\"black\" stroke-dasharray=\"6,4\" stroke-width=\"1.2\"";
        let curves: [Vec<(f64, f64)>; 5] = [
            b.iter().map(|r| (r.x_l, r.t)).collect(),
            b.iter().map(|r| (r.x_p, r.t)).collect(),
            b.iter().filter(|r| !r.post_critical).map(|r| (r.x_p_prime, r.t)).collect(),
            b.iter().filter(|r| r.post_critical).map(|r| (r.x_p_prime, r.t)).collect(),
            b.iter().map(|r| (r.x_r, r.t)).collect(),
        ];
        for c in curves.iter() {
            s.push_str(&polyline(c, "boundary", dashed));
        }
    }
    let pred: Vec<(f64, f64)> = report.trajectory.iter().filter_map(|r| r.x_pred.map(|x| (x, r.t))).collect();
    if !pred.is_empty() {
        s.push_str(&polyline(&pred, "trajectory", "stroke=\"white\" stroke-width=\"2\""));
    }
    let meas: Vec<(f64, f64)> = report.trajectory.iter().filter_map(|r| r.x_meas.map(|x| (x, r.t))).collect();
    if !meas.is_empty() {
        s.push_str(&polyline(&meas, "track", "stroke=\"black\" stroke-width=\"1\" stroke-dasharray=\"2,2\""));
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `trajectory.csv`, `boundaries.csv`, `report.json` and
/// `overlay.svg` into `dir`. Nothing is written for an empty report.
pub fn render(report: &ComparisonReport, dir: &Path) -> Result<Vec<PathBuf>> {
    if report.prediction.is_none() && report.measurement.is_none() {
        return Err(Error::EmptyReport);
    }
    let files = [
        ("trajectory.csv", trajectory_csv(report)),
        ("boundaries.csv", boundaries_csv(report)),
        ("report.json", report.to_json()),
        ("overlay.svg", overlay_svg(report)),
    ];
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut out = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| io_err(&path, e))?;
        out.push(path);
    }
    Ok(out)
}

/// Pretty JSON for a sweep table.
pub fn sweep_json(table: &SweepTable) -> String {
    serde_json::to_string_pretty(table).expect("sweep fields are always serialisable")
}
