//! Measurements on simulated fields: soliton peaks, region edges and the
//! post-interaction phase offset.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meanfield::WellSpec;
use crate::scalar::{c, Real};
use crate::sim::WaveField;

/// Quality of one tracked sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrackFlag {
    Ok,
    /// Several comparable peaks in the search window (typically inside a DSW).
    Ambiguous,
    /// Nothing rises above the prominence threshold.
    NoPeak,
}

impl TrackFlag {
    pub fn label(self) -> &'static str {
        match self {
            TrackFlag::Ok => "ok",
            TrackFlag::Ambiguous => "ambiguous",
            TrackFlag::NoPeak => "no_peak",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint<T> {
    pub t: T,
    pub x_peak: T,
    /// Peak height above `ubar_local`.
    pub a_meas: T,
    pub ubar_local: T,
    pub flag: TrackFlag,
}

/// Search interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Window<T> {
    pub fn around(center: T, half: T) -> Self {
        Self { lo: center - half, hi: center + half }
    }

    pub fn center(&self) -> T {
        (self.lo + self.hi) * c(0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectOptions<T> {
    /// Minimum `a_meas` for a detection.
    pub prominence: T,
    /// Expected soliton half-width `sqrt(2 / a)`.
    pub width: T,
    /// A second peak at least this fraction of the first makes the detection ambiguous.
    pub ambiguity_ratio: T,
}

impl<T: Real> DetectOptions<T> {
    /// Defaults for a soliton of initial amplitude `a0`.
    pub fn for_amplitude(a0: T) -> Self {
        let a0 = a0.abs().max(c(1e-6));
        Self { prominence: c::<T>(0.05) * a0, width: (c::<T>(2.0) / a0).sqrt(), ambiguity_ratio: c(0.5) }
    }

    /// Half-width of the tracking search window.
    pub fn search_half_width(&self) -> T {
        c::<T>(8.0).max(c::<T>(3.0) * self.width)
    }
}

fn median<T: Real>(mut v: Vec<T>) -> Option<T> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) * c(0.5) })
}

fn index_range<T: Real>(field: &WaveField<T>, lo: T, hi: T) -> (usize, usize) {
    let g = &field.grid;
    let dx = g.dx();
    let a = ((lo - g.x_min) / dx).ceil().max(T::zero());
    let b = ((hi - g.x_min) / dx).floor().min(c((g.n - 1) as f64));
    let a = a.to_usize().unwrap_or(0);
    let b = b.to_usize().unwrap_or(0);
    (a, b.max(a))
}

/// Median of `u` over `inner <= |x - x_peak| <= outer`.
fn background<T: Real>(field: &WaveField<T>, x_peak: T, inner: T, outer: T) -> Option<T> {
    let (a, b) = index_range(field, x_peak - outer, x_peak + outer);
    let vals = (a..=b)
        .filter(|&j| (field.grid.x(j) - x_peak).abs() >= inner)
        .map(|j| field.u[j])
        .collect();
    median(vals)
}

/// Vertex of the parabola through three equally spaced samples, as an
/// offset in grid units and the interpolated value.
fn parabolic_vertex<T: Real>(ym: T, y0: T, yp: T) -> (T, T) {
    let denom = ym - c::<T>(2.0) * y0 + yp;
    if denom >= T::zero() {
        return (T::zero(), y0);
    }
    let off = (ym - yp) * c(0.5) / denom;
    let off = off.max(c(-0.5)).min(c(0.5));
    (off, y0 - (ym - yp) * off * c(0.25))
}

/// Locates the dominant peak in `window`.
pub fn detect_soliton<T: Real>(field: &WaveField<T>, window: Window<T>, opts: &DetectOptions<T>) -> Result<TrackPoint<T>> {
    let t = field.t.as_f64();
    let hint = window.center().as_f64();
    let (a, b) = index_range(field, window.lo, window.hi);
    if b < a + 2 {
        return Err(Error::NoPeak { t, hint });
    }
    let u = &field.u;
    let mut jm = a;
    for j in a..=b {
        if u[j] > u[jm] {
            jm = j;
        }
    }
    // A maximum on the window boundary is a slope, not a peak.
    if jm == a || jm == b {
        return Err(Error::NoPeak { t, hint });
    }
    let (off, peak) = parabolic_vertex(u[jm - 1], u[jm], u[jm + 1]);
    let dx = field.grid.dx();
    let x_peak = field.grid.x(jm) + off * dx;
    // Background starts two full soliton widths (2 w each) from the peak.
    let w = opts.width.max(dx);
    let inner = c::<T>(4.0) * w;
    let outer = inner + (c::<T>(4.0) * w).max(c(5.0));
    let ubar = background(field, x_peak, inner, outer).ok_or(Error::NoPeak { t, hint })?;
    let a_meas = peak - ubar;
    if !(a_meas >= opts.prominence) {
        return Err(Error::NoPeak { t, hint });
    }
    let rival = (a + 1..b).any(|j| {
        (field.grid.x(j) - x_peak).abs() > c::<T>(2.0) * w
            && u[j] > u[j - 1]
            && u[j] >= u[j + 1]
            && u[j] - ubar >= opts.ambiguity_ratio * a_meas
    });
    if rival {
        return Err(Error::Ambiguous { t, hint });
    }
    Ok(TrackPoint { t: field.t, x_peak, a_meas, ubar_local: ubar, flag: TrackFlag::Ok })
}

/// Incremental tracker: each new field is searched around the last confirmed
/// position shifted by the drift of a guide law.
pub struct Tracker<T, G> {
    opts: DetectOptions<T>,
    guide: G,
    anchor: (T, T),
    points: Vec<TrackPoint<T>>,
}

impl<T: Real, G: Fn(T) -> T> Tracker<T, G> {
    /// `guide(t)` is a predicted position; only its increments are used.
    pub fn new(x_start: T, t_start: T, guide: G, opts: DetectOptions<T>) -> Self {
        Self { opts, guide, anchor: (t_start, x_start), points: Vec::new() }
    }

    pub fn observe(&mut self, field: &WaveField<T>) -> Result<TrackPoint<T>> {
        if let Some(last) = self.points.last() {
            if !(field.t > last.t) {
                return Err(Error::Config(format!("snapshot time {} not after {}", field.t, last.t)));
            }
        }
        let (ta, xa) = self.anchor;
        let center = xa + (self.guide)(field.t) - (self.guide)(ta);
        let window = Window::around(center, self.opts.search_half_width());
        let point = match detect_soliton(field, window, &self.opts) {
            Ok(p) => {
                self.anchor = (p.t, p.x_peak);
                p
            }
            Err(Error::Ambiguous { .. }) => {
                let (a, b) = index_range(field, window.lo, window.hi);
                let jm = (a..=b).fold(a, |m, j| if field.u[j] > field.u[m] { j } else { m });
                let ubar = median(field.u[a..=b].to_vec()).unwrap_or(T::zero());
                TrackPoint {
                    t: field.t,
                    x_peak: field.grid.x(jm),
                    a_meas: (field.u[jm] - ubar).max(T::zero()),
                    ubar_local: ubar,
                    flag: TrackFlag::Ambiguous,
                }
            }
            Err(Error::NoPeak { .. }) => {
                let (a, b) = index_range(field, window.lo, window.hi);
                let ubar = median(field.u[a..=b].to_vec()).unwrap_or(T::zero());
                TrackPoint { t: field.t, x_peak: center, a_meas: T::zero(), ubar_local: ubar, flag: TrackFlag::NoPeak }
            }
            Err(e) => return Err(e),
        };
        self.points.push(point);
        Ok(point)
    }

    pub fn points(&self) -> &[TrackPoint<T>] {
        &self.points
    }

    pub fn into_points(self) -> Vec<TrackPoint<T>> {
        self.points
    }
}

/// Tracks a soliton through time-ordered snapshots.
pub fn track<T: Real, G: Fn(T) -> T>(snapshots: &[WaveField<T>], x_start: T, guide: G, opts: DetectOptions<T>) -> Result<Vec<TrackPoint<T>>> {
    let Some(first) = snapshots.first() else {
        return Ok(Vec::new());
    };
    let mut tracker = Tracker::new(x_start, first.t, guide, opts);
    for f in snapshots {
        tracker.observe(f)?;
    }
    Ok(tracker.into_points())
}

/// Least-squares line `x = intercept + slope t`.
pub fn linear_fit<T: Real>(pts: &[(T, T)]) -> Option<(T, T)> {
    if pts.len() < 2 {
        return None;
    }
    let n: T = c(pts.len() as f64);
    let mt = pts.iter().fold(T::zero(), |s, p| s + p.0) / n;
    let mx = pts.iter().fold(T::zero(), |s, p| s + p.1) / n;
    let stt = pts.iter().fold(T::zero(), |s, p| s + (p.0 - mt) * (p.0 - mt));
    if stt <= T::zero() {
        return None;
    }
    let stx = pts.iter().fold(T::zero(), |s, p| s + (p.0 - mt) * (p.1 - mx));
    let slope = stx / stt;
    Some((mx - slope * mt, slope))
}

/// Free-flight reference: the soliton would sit at `x0` at `t0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeFlight<T> {
    pub x0: T,
    pub t0: T,
}

/// Offset between the post-exit linear fit and the free-flight line of the
/// same slope through `(t0, x0)`.
pub fn measure_phase_shift<T: Real>(points: &[TrackPoint<T>], reference: FreeFlight<T>, t_exit: T) -> Result<T> {
    let (Some(first), Some(last)) = (points.first(), points.last()) else {
        return Err(Error::InsufficientTail("empty track".into()));
    };
    let tail: Vec<(T, T)> = points
        .iter()
        .filter(|p| p.flag == TrackFlag::Ok && p.t >= t_exit)
        .map(|p| (p.t, p.x_peak))
        .collect();
    let run = last.t - first.t;
    let span = match (tail.first(), tail.last()) {
        (Some(a), Some(b)) => b.0 - a.0,
        _ => T::zero(),
    };
    if tail.len() < 2 || span < c::<T>(0.2) * run {
        return Err(Error::InsufficientTail(format!("post-exit span {span} of run {run}")));
    }
    let (b, s) = linear_fit(&tail).ok_or_else(|| Error::InsufficientTail("degenerate fit".into()))?;
    Ok(b + s * reference.t0 - reference.x0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeOptions<T> {
    /// Threshold as a fraction of `|U0|`.
    pub threshold: T,
    /// Minimum crest height above the floor, as a fraction of `|U0|`, for the leading DSW crest.
    pub crest: T,
}

impl<T: Real> Default for EdgeOptions<T> {
    fn default() -> Self {
        Self { threshold: c(0.02), crest: c(0.5) }
    }
}

/// Measured region edges; `None` where an edge was not detected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSet<T> {
    pub t: T,
    pub x_l: Option<T>,
    pub x_p: Option<T>,
    pub x_p_prime: Option<T>,
    pub x_r: Option<T>,
    pub plateau: bool,
}

/// Edges of the bare-well structure.
///
/// `x_r` and `x_p_prime` are the corners of a line fitted to the middle of
/// the rarefaction ramp; `x_p` is where the leading DSW crest's right flank
/// meets the floor; `x_l` is the zero of a line fitted to the oscillation
/// envelope.
pub fn measure_edges<T: Real>(field: &WaveField<T>, well: &WellSpec<T>, opts: &EdgeOptions<T>) -> EdgeSet<T> {
    let mut out = EdgeSet { t: field.t, x_l: None, x_p: None, x_p_prime: None, x_r: None, plateau: false };
    let u = &field.u;
    let g = &field.grid;
    let depth = well.u0.abs();
    let thr = opts.threshold * depth;
    let n = g.n;
    let slack = c::<T>(5.0).max(well.l * c(0.25));
    let Some(j_r) = (0..n).rev().find(|&j| g.x(j) <= well.right_edge() + slack && u[j].abs() > thr) else {
        return out;
    };
    // Rarefaction ramp: monotone run to the left of j_r.
    let tol = c::<T>(1e-3) * depth;
    let mut j0 = j_r;
    while j0 > 0 && u[j0 - 1] <= u[j0] + tol {
        j0 -= 1;
    }
    if j_r < j0 + 3 {
        return out;
    }
    let floor = u[j0..=j_r].iter().fold(T::infinity(), |m, &v| m.min(v));
    let band_lo = floor - floor * c(0.3);
    let band_hi = floor - floor * c(0.7);
    let ramp: Vec<(T, T)> = (j0..=j_r).filter(|&j| u[j] > band_lo && u[j] < band_hi).map(|j| (g.x(j), u[j])).collect();
    // Fit x as a function of u so the corners are direct evaluations.
    let inv: Vec<(T, T)> = ramp.iter().map(|&(x, v)| (v, x)).collect();
    let Some((x_at_zero, dxdu)) = linear_fit(&inv) else {
        return out;
    };
    out.x_r = Some(x_at_zero);
    let x_corner = x_at_zero + dxdu * well.u0;

    // Leading DSW crest left of the ramp.
    let crest_min = opts.crest * depth;
    let Some(jp) = (1..j0.min(n - 1)).rev().find(|&j| u[j] > u[j - 1] && u[j] >= u[j + 1] && u[j] - floor > crest_min) else {
        return out;
    };
    let mut k = jp;
    while k + 1 < j0 && u[k + 1] < u[k] && u[k] > well.u0 + thr {
        k += 1;
    }
    let x_p = g.x(k);
    out.x_p = Some(x_p);
    if x_corner > x_p {
        out.x_p_prime = Some(x_corner);
        out.plateau = true;
    }

    // Oscillation envelope over the DSW: half the crest-to-trough height.
    let maxima: Vec<usize> = (1..=jp).filter(|&j| u[j] > u[j - 1] && u[j] >= u[j + 1]).collect();
    let minima: Vec<usize> = (1..=jp).filter(|&j| u[j] < u[j - 1] && u[j] <= u[j + 1]).collect();
    let mut env = Vec::new();
    for &j in &maxima {
        let left = minima.iter().rev().find(|&&m| m < j);
        let right = minima.iter().find(|&&m| m > j);
        if let (Some(&l), Some(&r)) = (left, right) {
            env.push((g.x(j), (u[j] - (u[l] + u[r]) * c(0.5)) * c(0.5)));
        }
    }
    let emax = env.iter().fold(T::zero(), |m, e| m.max(e.1));
    let fit: Vec<(T, T)> = env
        .iter()
        .copied()
        .filter(|e| e.1 > emax * c(0.2) && e.1 < emax * c(0.8))
        .collect();
    if let Some((b, s)) = linear_fit(&fit) {
        if s > T::zero() {
            out.x_l = Some(-b / s);
        }
    }
    out
}

/// Track CSV with columns `t,x_peak,a_meas,ubar_local,flag`.
pub fn track_csv<T: Real>(points: &[TrackPoint<T>]) -> String {
    let mut s = String::from("t,x_peak,a_meas,ubar_local,flag\n");
    for p in points {
        s.push_str(&format!("{},{},{},{},{}\n", p.t, p.x_peak, p.a_meas, p.ubar_local, p.flag.label()));
    }
    s
}
