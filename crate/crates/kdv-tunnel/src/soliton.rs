//! Solitons riding on a slowly varying mean field.
//!
//! A soliton of amplitude `a` on background `ubar` carries the invariant
//! `q = 4 ubar + 2 a` and moves at `6 ubar + 2 a`. Conservation of `q` fixes
//! how the amplitude changes across the evolving well, and whether the
//! soliton makes it through (tunnels) or is absorbed (embeds).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meanfield::{
    critical_time, dsw_edge_at, rw_profile, MeanField, Region, WellSpec,
};
use crate::quadrature::bisect;
use crate::scalar::{c, Real};
use crate::whitham::embed_speed_lw;

/// Soliton amplitude and position on a local background.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonState<T> {
    pub ubar: T,
    pub a: T,
    pub x: T,
    /// Wavenumber of the accompanying wave train, carried for phase bookkeeping.
    pub k: T,
}

impl<T: Real> SolitonState<T> {
    pub fn new(ubar: T, a: T, x: T, k: T) -> Result<Self> {
        if !(a > T::zero()) {
            return Err(Error::NonPositiveAmplitude(a.as_f64()));
        }
        Ok(Self { ubar, a, x, k })
    }

    pub fn q(&self) -> T {
        c::<T>(4.0) * self.ubar + c::<T>(2.0) * self.a
    }

    /// Conjugate wavenumber `sqrt(2 a)`.
    pub fn ktilde(&self) -> T {
        (c::<T>(2.0) * self.a).sqrt()
    }

    pub fn speed(&self) -> T {
        c::<T>(6.0) * self.ubar + c::<T>(2.0) * self.a
    }
}

pub fn q_invariant<T: Real>(a: T, ubar: T) -> Result<T> {
    if !(a > T::zero()) {
        return Err(Error::NonPositiveAmplitude(a.as_f64()));
    }
    Ok(c::<T>(4.0) * ubar + c::<T>(2.0) * a)
}

pub fn soliton_speed<T: Real>(a: T, ubar: T) -> T {
    c::<T>(6.0) * ubar + c::<T>(2.0) * a
}

/// `(4 ubar - q)^(-1/2)`, defined only where the radicand is positive.
pub fn p_factor<T: Real>(q: T, ubar: T) -> Result<T> {
    let rad = c::<T>(4.0) * ubar - q;
    if !(rad > T::zero()) {
        return Err(Error::InadmissibleBackground { value: rad.as_f64() });
    }
    Ok(T::one() / rad.sqrt())
}

/// `p(q, u_in) / p(q, u_out)` formed from the radicands directly, so that the
/// common factor `i` cancels when both radicands are negative.
pub fn p_ratio<T: Real>(q: T, u_in: T, u_out: T) -> Result<T> {
    let four = c::<T>(4.0);
    let r_in = four * u_in - q;
    let r_out = four * u_out - q;
    if r_in == T::zero() || r_out == T::zero() || r_in.signum() != r_out.signum() {
        return Err(Error::InadmissibleBackground { value: (r_in * r_out).as_f64() });
    }
    Ok((r_out / r_in).sqrt())
}

/// Amplitude after moving from background `u_in` to `u_out` at fixed `q`.
pub fn transmit<T: Real>(a_in: T, u_in: T, u_out: T) -> Result<T> {
    if !(a_in > T::zero()) {
        return Err(Error::NonPositiveAmplitude(a_in.as_f64()));
    }
    let a_out = a_in + c::<T>(2.0) * (u_in - u_out);
    if a_out <= T::zero() {
        return Err(Error::NonTransmissible { a_out: a_out.as_f64() });
    }
    Ok(a_out)
}

/// Outgoing wavenumber and position shift across a change of background.
///
/// `k_out = k_in p(q, u_in) / p(q, u_out)`, `x_plus = x_minus k_in / k_out`.
pub fn phase_shift<T: Real>(k_in: T, q: T, u_in: T, u_out: T, x_minus: T) -> Result<(T, T)> {
    let k_out = k_in * p_ratio(q, u_in, u_out)?;
    if k_out == T::zero() {
        return Err(Error::Singular("outgoing wavenumber vanished"));
    }
    let x_plus = x_minus * k_in / k_out;
    Ok((k_out, x_plus - x_minus))
}

/// Long-time fate of the trial soliton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OutcomeKind {
    Tunnel,
    EmbedRW,
    EmbedLW,
    EmbedDSW,
    NoInteraction,
}

impl OutcomeKind {
    pub fn label(self) -> &'static str {
        match self {
            OutcomeKind::Tunnel => "Tunnel",
            OutcomeKind::EmbedRW => "EmbedRW",
            OutcomeKind::EmbedLW => "EmbedLW",
            OutcomeKind::EmbedDSW => "EmbedDSW",
            OutcomeKind::NoInteraction => "NoInteraction",
        }
    }
}

impl std::fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Outcome with the tunnelling-only fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome<T> {
    pub kind: OutcomeKind,
    pub a_out: Option<T>,
    pub delta_x: Option<T>,
}

/// Amplitude below which a soliton starting at `x0` inside the well reaches
/// the shock before the plateau closes: `-2 u0 (l - x0) / l` (with `x0`
/// measured from the well origin). This is the default splitting threshold
/// between shock and linear-wave embedding.
pub fn critical_amplitude_dsw<T: Real>(x0: T, well: &WellSpec<T>) -> T {
    let xr = (x0 - well.origin).max(T::zero()).min(well.l);
    -c::<T>(2.0) * well.u0 * (well.l - xr) / well.l
}

/// Approximate amplitude below which a soliton from `x0 < origin` crosses
/// the linear-wave region: `(l + 2 x0) u0 / l`.
pub fn critical_amplitude_lw<T: Real>(x0: T, well: &WellSpec<T>) -> Result<T> {
    let xr = x0 - well.origin;
    if !(xr < T::zero()) {
        return Err(Error::Domain { what: "x0 left of the well", value: xr.as_f64() });
    }
    Ok((well.l + c::<T>(2.0) * xr) * well.u0 / well.l)
}

/// Tolerance used to decide `a0 = -2 u0`.
fn threshold_tol<T: Real>(u0: T) -> T {
    c::<T>(1e-9).max(T::epsilon() * c(64.0)) * (-u0)
}

/// Predicted outcome class for a soliton of amplitude `a0` placed at `x0`.
pub fn classify<T: Real>(a0: T, x0: T, well: &WellSpec<T>, eps: T) -> Result<OutcomeKind> {
    if !(a0 > T::zero()) {
        return Err(Error::NonPositiveAmplitude(a0.as_f64()));
    }
    if x0 <= well.origin {
        return Ok(OutcomeKind::Tunnel);
    }
    if x0 >= well.right_edge() {
        return Ok(OutcomeKind::NoInteraction);
    }
    let threshold = -c::<T>(2.0) * well.u0;
    let tol = threshold_tol(well.u0);
    Ok(if a0 > threshold + tol {
        OutcomeKind::Tunnel
    } else if a0 >= threshold - tol {
        OutcomeKind::EmbedRW
    } else if a0 >= eps {
        OutcomeKind::EmbedLW
    } else {
        OutcomeKind::EmbedDSW
    })
}

/// Closed-form position law of one trajectory segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Law<T> {
    /// `x = x_ref + speed (t - t_ref)`.
    Linear { x_ref: T, t_ref: T, speed: T },
    /// `x = x_edge + coef t^(1/3) + lin t`, the path through a rarefaction
    /// fan centred at `x_edge`.
    CubeRoot { x_edge: T, coef: T, lin: T },
    /// Rides the shock-side edge of the linear-wave region (after `t*`).
    ShockEdge,
}

/// Closed-form amplitude law of one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmpLaw<T> {
    Constant(T),
    /// `(q - 4 ubar) / 2` with `ubar` the fan profile at the soliton.
    Fan { q: T },
    /// Amplitude has collapsed into the surrounding wave field.
    Absorbed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<T> {
    pub region: Region,
    pub t_start: T,
    pub t_end: T,
    pub law: Law<T>,
    pub amp: AmpLaw<T>,
    /// Set where the law is a known approximation (e.g. inside the shock).
    pub approximate: bool,
}

/// Piecewise trajectory prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPlan<T> {
    pub well: WellSpec<T>,
    pub outcome: OutcomeKind,
    pub segments: Vec<Segment<T>>,
    /// Times at which the soliton crosses from one region into the next.
    pub crossings: Vec<T>,
    pub a_final: Option<T>,
}

impl<T: Real> TrajectoryPlan<T> {
    fn segment_at(&self, t: T) -> Option<&Segment<T>> {
        self.segments.iter().find(|s| t >= s.t_start && t <= s.t_end)
    }

    pub fn position(&self, t: T) -> Result<T> {
        let s = self
            .segment_at(t)
            .ok_or_else(|| Error::InconsistentPlan(format!("no segment covers t = {t}")))?;
        eval_law(&self.well, &s.law, t)
    }

    /// Predicted amplitude, `None` once the soliton has been absorbed.
    pub fn amplitude(&self, t: T) -> Result<Option<T>> {
        let s = self
            .segment_at(t)
            .ok_or_else(|| Error::InconsistentPlan(format!("no segment covers t = {t}")))?;
        Ok(match s.amp {
            AmpLaw::Constant(a) => Some(a),
            AmpLaw::Fan { q } => {
                let x = eval_law(&self.well, &s.law, t)?;
                Some((q - c::<T>(4.0) * rw_profile(&self.well, x, t)) * c(0.5))
            }
            AmpLaw::Absorbed => None,
        })
    }

    pub fn region(&self, t: T) -> Option<Region> {
        self.segment_at(t).map(|s| s.region)
    }

    /// True if `t` falls in a segment flagged as approximate.
    pub fn is_approximate(&self, t: T) -> bool {
        self.segment_at(t).map(|s| s.approximate).unwrap_or(false)
    }
}

fn eval_law<T: Real>(well: &WellSpec<T>, law: &Law<T>, t: T) -> Result<T> {
    Ok(match *law {
        Law::Linear { x_ref, t_ref, speed } => x_ref + speed * (t - t_ref),
        Law::CubeRoot { x_edge, coef, lin } => x_edge + coef * t.cbrt() + lin * t,
        Law::ShockEdge => well.origin + dsw_edge_at(well, t)?,
    })
}

/// Closed-form plan for a soliton starting left of the well (`x0 < origin`).
///
/// Regions in order: left plateau, shock (background approximated by the
/// level on its left), middle plateau, fan, right plateau. Fails when the
/// soliton would only clear the shock after the plateau has closed; such
/// paths cross the linear-wave region and need [`trajectory_ode`].
pub fn trajectory_left<T: Real>(a_l: T, x0: T, well: &WellSpec<T>) -> Result<TrajectoryPlan<T>> {
    if !(a_l > T::zero()) {
        return Err(Error::NonPositiveAmplitude(a_l.as_f64()));
    }
    let o = well.origin;
    let xr = x0 - o;
    if !(xr < T::zero()) {
        return Err(Error::Domain { what: "x0 left of the well", value: xr.as_f64() });
    }
    let (u0, l) = (well.u0, well.l);
    let two = c::<T>(2.0);
    let t1 = -xr / (two * a_l - c::<T>(12.0) * u0);
    let t2 = t1 * (c::<T>(6.0) * u0 - a_l) / (u0 - a_l);
    let t_star = critical_time(well);
    if t2 > t_star {
        return Err(Error::InconsistentPlan(format!(
            "soliton leaves the shock at t = {t2} after the plateau closes at t* = {t_star}"
        )));
    }
    let t3 = (l + two * a_l * t2) / (two * a_l - c::<T>(4.0) * u0);
    let t4 = t3 * ((a_l - two * u0) / a_l).powf(c(1.5));
    let a_m = a_l - two * u0;
    let inf = T::infinity();
    let segments = vec![
        Segment {
            region: Region::Left,
            t_start: T::zero(),
            t_end: t1,
            law: Law::Linear { x_ref: x0, t_ref: T::zero(), speed: two * a_l },
            amp: AmpLaw::Constant(a_l),
            approximate: false,
        },
        Segment {
            region: Region::Dsw,
            t_start: t1,
            t_end: t2,
            law: Law::Linear { x_ref: o + c::<T>(12.0) * u0 * t1, t_ref: t1, speed: two * a_l },
            amp: AmpLaw::Constant(a_l),
            approximate: true,
        },
        Segment {
            region: Region::Plateau,
            t_start: t2,
            t_end: t3,
            law: Law::Linear { x_ref: o + two * u0 * t2, t_ref: t2, speed: two * (a_l + u0) },
            amp: AmpLaw::Constant(a_m),
            approximate: false,
        },
        Segment {
            region: Region::Rarefaction,
            t_start: t3,
            t_end: t4,
            law: Law::CubeRoot {
                x_edge: o + l,
                coef: -c::<T>(3.0) * (a_l - two * u0) * t3.powf(c(2.0 / 3.0)),
                lin: c::<T>(3.0) * a_l,
            },
            amp: AmpLaw::Fan { q: two * a_l },
            approximate: false,
        },
        Segment {
            region: Region::Right,
            t_start: t4,
            t_end: inf,
            law: Law::Linear { x_ref: o + l, t_ref: t4, speed: two * a_l },
            amp: AmpLaw::Constant(a_l),
            approximate: false,
        },
    ];
    Ok(TrajectoryPlan {
        well: *well,
        outcome: OutcomeKind::Tunnel,
        segments,
        crossings: vec![t1, t2, t3, t4],
        a_final: Some(a_l),
    })
}

/// Closed-form plan for a soliton starting inside the well.
///
/// `eps` is the shock/linear-wave splitting amplitude passed to [`classify`];
/// the plan fails if the geometry contradicts that class.
pub fn trajectory_well<T: Real>(a_m: T, x0: T, well: &WellSpec<T>, eps: T) -> Result<TrajectoryPlan<T>> {
    let kind = classify(a_m, x0, well, eps)?;
    let o = well.origin;
    let xr = x0 - o;
    if !(xr > T::zero() && xr < well.l) {
        return Err(Error::Domain { what: "x0 inside the well", value: xr.as_f64() });
    }
    let (u0, l) = (well.u0, well.l);
    let two = c::<T>(2.0);
    let six = c::<T>(6.0);
    let t_star = critical_time(well);
    let inf = T::infinity();
    let speed = six * u0 + two * a_m;
    let q = c::<T>(4.0) * u0 + two * a_m;
    // Contact times with the fan tail and with the shock edge.
    let t_fan = (l - xr) / (two * a_m);
    let closing = -(c::<T>(4.0) * u0 + two * a_m);
    let t_shock = if closing > T::zero() { xr / closing } else { inf };
    let hits_shock_first = t_shock < t_fan && t_shock < t_star;
    let geometric = if hits_shock_first { OutcomeKind::EmbedDSW } else { kind };
    if (kind == OutcomeKind::EmbedDSW) != hits_shock_first {
        return Err(Error::InconsistentPlan(format!(
            "class {kind} from eps = {eps} contradicts the geometry (shock contact at {t_shock}, fan contact at {t_fan})"
        )));
    }

    let mut segments = Vec::new();
    let mut crossings = Vec::new();
    let plateau_end = if hits_shock_first { t_shock } else { t_fan.min(t_star) };
    segments.push(Segment {
        region: Region::Plateau,
        t_start: T::zero(),
        t_end: plateau_end,
        law: Law::Linear { x_ref: x0, t_ref: T::zero(), speed },
        amp: AmpLaw::Constant(a_m),
        approximate: false,
    });
    crossings.push(plateau_end);

    if geometric == OutcomeKind::EmbedDSW {
        // Carried along the shock's right edge, which becomes the shock-side
        // edge of the linear-wave region after t*.
        segments.push(Segment {
            region: Region::Dsw,
            t_start: t_shock,
            t_end: t_star,
            law: Law::Linear { x_ref: o + two * u0 * t_shock, t_ref: t_shock, speed: two * u0 },
            amp: AmpLaw::Absorbed,
            approximate: true,
        });
        segments.push(Segment {
            region: Region::Dsw,
            t_start: t_star,
            t_end: inf,
            law: Law::ShockEdge,
            amp: AmpLaw::Absorbed,
            approximate: true,
        });
        return Ok(TrajectoryPlan { well: *well, outcome: geometric, segments, crossings, a_final: None });
    }

    // Path through the fan: x - (o + l) = coef t^(1/3) + 1.5 q t.
    let fan_law = Law::CubeRoot {
        x_edge: o + l,
        coef: -c::<T>(3.0) * a_m * t_fan.powf(c(2.0 / 3.0)),
        lin: c::<T>(1.5) * q,
    };
    if t_fan >= t_star {
        // Contact exactly at the critical point: straight into the linear-wave region.
        return Ok(linear_wave_tail(well, segments, crossings, x0 + speed * t_star, t_star, q));
    }
    match geometric {
        OutcomeKind::Tunnel => {
            let t_exit = t_fan * (a_m / (a_m + two * u0)).powf(c(1.5));
            let a_r = a_m + two * u0;
            segments.push(Segment {
                region: Region::Rarefaction,
                t_start: t_fan,
                t_end: t_exit,
                law: fan_law,
                amp: AmpLaw::Fan { q },
                approximate: false,
            });
            segments.push(Segment {
                region: Region::Right,
                t_start: t_exit,
                t_end: inf,
                law: Law::Linear { x_ref: o + l, t_ref: t_exit, speed: two * a_r },
                amp: AmpLaw::Constant(a_r),
                approximate: false,
            });
            crossings.push(t_exit);
            Ok(TrajectoryPlan { well: *well, outcome: geometric, segments, crossings, a_final: Some(a_r) })
        }
        OutcomeKind::EmbedRW => {
            segments.push(Segment {
                region: Region::Rarefaction,
                t_start: t_fan,
                t_end: inf,
                law: fan_law,
                amp: AmpLaw::Fan { q },
                approximate: false,
            });
            Ok(TrajectoryPlan { well: *well, outcome: geometric, segments, crossings, a_final: None })
        }
        OutcomeKind::EmbedLW => {
            // Drifts through the fan until the fan's left edge (cube-root law)
            // overtakes it after t*.
            let edge = |t: T| -> T {
                let scale = ((-c::<T>(4.0) * u0).sqrt() * l).powf(c(2.0 / 3.0));
                o + l - c::<T>(1.5) * scale * t.cbrt()
            };
            let path = |t: T| eval_law(well, &fan_law, t).unwrap_or(T::nan());
            let start = t_star.max(t_fan);
            let mut hi = start * c(2.0);
            let mut found = false;
            for _ in 0..60 {
                if path(hi) < edge(hi) {
                    found = true;
                    break;
                }
                hi = hi * c(2.0);
            }
            if !found {
                segments.push(Segment {
                    region: Region::Rarefaction,
                    t_start: t_fan,
                    t_end: inf,
                    law: fan_law,
                    amp: AmpLaw::Fan { q },
                    approximate: false,
                });
                return Ok(TrajectoryPlan { well: *well, outcome: geometric, segments, crossings, a_final: None });
            }
            let t_in = if path(start) <= edge(start) {
                start
            } else {
                bisect(|t| path(t) - edge(t), start, hi, T::epsilon() * hi * c(16.0), "fan exit time")?
            };
            segments.push(Segment {
                region: Region::Rarefaction,
                t_start: t_fan,
                t_end: t_in,
                law: fan_law,
                amp: AmpLaw::Fan { q },
                approximate: false,
            });
            crossings.push(t_in);
            Ok(linear_wave_tail(well, segments, crossings, path(t_in), t_in, q))
        }
        other => Err(Error::InconsistentPlan(format!("unexpected class {other} for a soliton in the well"))),
    }
}

fn linear_wave_tail<T: Real>(
    well: &WellSpec<T>,
    mut segments: Vec<Segment<T>>,
    crossings: Vec<T>,
    x_in: T,
    t_in: T,
    q: T,
) -> TrajectoryPlan<T> {
    let l23 = q * c(0.25);
    let v = embed_speed_lw(well.u0, l23.max(well.u0), T::zero()).unwrap_or(c::<T>(2.0) * well.u0);
    segments.push(Segment {
        region: Region::Linear,
        t_start: t_in,
        t_end: T::infinity(),
        law: Law::Linear { x_ref: x_in, t_ref: t_in, speed: v },
        amp: AmpLaw::Absorbed,
        approximate: true,
    });
    TrajectoryPlan { well: *well, outcome: OutcomeKind::EmbedLW, segments, crossings, a_final: None }
}

/// One sample of an integrated trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSample<T> {
    pub t: T,
    pub x: T,
    pub a: T,
    pub ubar: T,
    pub region: Region,
}

/// Where and when the amplitude collapsed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingEvent<T> {
    pub t: T,
    pub x: T,
    pub region: Region,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdePath<T> {
    pub q: T,
    pub samples: Vec<OdeSample<T>>,
    pub event: Option<EmbeddingEvent<T>>,
}

impl<T: Real> OdePath<T> {
    /// Outcome implied by the path: the region of the embedding event, or
    /// where the soliton ended up when no event occurred.
    pub fn outcome(&self) -> OutcomeKind {
        if let Some(ev) = self.event {
            return match ev.region {
                Region::Dsw => OutcomeKind::EmbedDSW,
                Region::Rarefaction => OutcomeKind::EmbedRW,
                _ => OutcomeKind::EmbedLW,
            };
        }
        let first = self.samples.first().map(|s| s.region);
        let last = self.samples.last().map(|s| s.region);
        let visited_other = self.samples.iter().any(|s| Some(s.region) != first);
        match (first, last) {
            (Some(Region::Right), _) if !visited_other => OutcomeKind::NoInteraction,
            (_, Some(Region::Right)) | (_, Some(Region::Left)) => OutcomeKind::Tunnel,
            (_, Some(Region::Rarefaction)) => OutcomeKind::EmbedRW,
            (_, Some(Region::Dsw)) => OutcomeKind::EmbedDSW,
            _ => OutcomeKind::EmbedLW,
        }
    }
}

/// Integrates `dx/dt = 2 ubar(x, t) + q` with `a = (q - 4 ubar) / 2` by the
/// classical fourth-order Runge-Kutta method. Stops at `t_end` or at the
/// first step where `a <= 0`.
pub fn trajectory_ode<T: Real, M: MeanField<T>>(
    a0: T,
    x0: T,
    field: &M,
    t_end: T,
    dt: T,
) -> Result<OdePath<T>> {
    if !(dt > T::zero()) || !(t_end > T::zero()) {
        return Err(Error::Config(format!("trajectory_ode needs dt > 0 and t_end > 0, got {dt}, {t_end}")));
    }
    let u_start = field.mean(x0, T::zero())?;
    let q = q_invariant(a0, u_start)?;
    let two = c::<T>(2.0);
    let rhs = |x: T, t: T| -> Result<T> { Ok(two * field.mean(x, t)? + q) };
    let steps = (t_end / dt).ceil().to_usize().unwrap_or(usize::MAX).max(1);
    let h = t_end / T::from_usize(steps).unwrap_or(T::one());
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(OdeSample { t: T::zero(), x: x0, a: a0, ubar: u_start, region: field.region(x0, T::zero())? });
    let (mut x, mut event) = (x0, None);
    for n in 0..steps {
        let t = h * T::from_usize(n).unwrap_or(T::zero());
        let half = h * c(0.5);
        let k1 = rhs(x, t)?;
        let k2 = rhs(x + half * k1, t + half)?;
        let k3 = rhs(x + half * k2, t + half)?;
        let k4 = rhs(x + h * k3, t + h)?;
        x = x + h / c(6.0) * (k1 + two * (k2 + k3) + k4);
        let t_next = t + h;
        let ubar = field.mean(x, t_next)?;
        let a = (q - c::<T>(4.0) * ubar) * c(0.5);
        let region = field.region(x, t_next)?;
        samples.push(OdeSample { t: t_next, x, a, ubar, region });
        if a <= T::zero() {
            event = Some(EmbeddingEvent { t: t_next, x, region });
            break;
        }
    }
    Ok(OdePath { q, samples, event })
}
