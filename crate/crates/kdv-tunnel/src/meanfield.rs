//! Large-scale evolution of the bare well.
//!
//! A well of depth `u0 < 0` on `[origin, origin + l]` splits into a dispersive
//! shock on its left edge and a rarefaction fan on its right edge, separated
//! by a plateau until the critical time. After that the plateau is replaced
//! by a region of decaying linear waves whose two edges are computed from the
//! hodograph solution. Positions here are absolute; all geometry moves with
//! `origin`.

use crate::elliptic::{ellip_e, ellip_k};
use crate::error::{Error, Result};
use crate::quadrature::{bisect, integrate, QuadOptions};
use crate::scalar::{c, Real};
use crate::whitham::{cnoidal_mean, whitham_velocities, Genus1State};

/// Rectangular well `u = u0` on `origin < x < origin + l`, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellSpec<T> {
    pub u0: T,
    pub l: T,
    pub origin: T,
}

impl<T: Real> WellSpec<T> {
    pub fn new(u0: T, l: T) -> Result<Self> {
        Self::with_origin(u0, l, T::zero())
    }

    pub fn with_origin(u0: T, l: T, origin: T) -> Result<Self> {
        if !(u0 < T::zero() && u0.is_finite()) {
            return Err(Error::Domain { what: "well depth u0 (must be negative)", value: u0.as_f64() });
        }
        if !(l > T::zero() && l.is_finite()) {
            return Err(Error::Domain { what: "well width l (must be positive)", value: l.as_f64() });
        }
        if !origin.is_finite() {
            return Err(Error::Domain { what: "well origin", value: origin.as_f64() });
        }
        Ok(Self { u0, l, origin })
    }

    pub fn right_edge(&self) -> T {
        self.origin + self.l
    }

    /// Ideal initial profile.
    pub fn initial(&self, x: T) -> T {
        if x > self.origin && x < self.right_edge() {
            self.u0
        } else {
            T::zero()
        }
    }
}

/// Time at which the plateau between the shock and the fan closes.
pub fn critical_time<T: Real>(well: &WellSpec<T>) -> T {
    well.l / (-c::<T>(4.0) * well.u0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    PreCritical,
    PostCritical,
}

/// Region edges at one instant.
///
/// `x_p` is always the edge on the rarefaction side of the central region
/// and `x_p_prime` the edge on the shock side once the plateau has closed.
/// Before the critical time `x_p` is the soliton edge of the shock and
/// `x_p_prime` the tail of the fan, so the tuple reads left to right as
/// `x_l <= x_p <= x_p_prime <= x_r`. Afterwards the order is
/// `x_l <= x_p_prime <= x_p <= x_r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionBoundaries<T> {
    pub t: T,
    pub x_l: T,
    pub x_p: T,
    pub x_p_prime: T,
    pub x_r: T,
    pub regime: Regime,
}

impl<T: Real> RegionBoundaries<T> {
    /// Edges sorted left to right.
    pub fn ordered(&self) -> [T; 4] {
        match self.regime {
            Regime::PreCritical => [self.x_l, self.x_p, self.x_p_prime, self.x_r],
            Regime::PostCritical => [self.x_l, self.x_p_prime, self.x_p, self.x_r],
        }
    }
}

/// Rarefaction-side edge after the critical time (cube-root law), relative to `origin`.
fn cube_root_edge<T: Real>(well: &WellSpec<T>, t: T) -> T {
    let scale = ((-c::<T>(4.0) * well.u0).sqrt() * well.l).powf(c(2.0 / 3.0));
    well.l - c::<T>(1.5) * scale * t.cbrt()
}

pub fn boundaries<T: Real>(well: &WellSpec<T>, t: T) -> Result<RegionBoundaries<T>> {
    if !(t > T::zero()) {
        return Err(Error::Domain { what: "boundary time (must be positive)", value: t.as_f64() });
    }
    let o = well.origin;
    let x_l = o + c::<T>(12.0) * well.u0 * t;
    let x_r = well.right_edge();
    let t_star = critical_time(well);
    if t < t_star {
        return Ok(RegionBoundaries {
            t,
            x_l,
            x_p: o + c::<T>(2.0) * well.u0 * t,
            x_p_prime: o + well.l + c::<T>(6.0) * well.u0 * t,
            x_r,
            regime: Regime::PreCritical,
        });
    }
    Ok(RegionBoundaries {
        t,
        x_l,
        x_p: o + cube_root_edge(well, t),
        x_p_prime: o + dsw_edge_at(well, t)?,
        x_r,
        regime: Regime::PostCritical,
    })
}

/// Point `(t, x)` (with `x` relative to `origin`) where the shock meets the
/// linear-wave region, parametrised by the elliptic parameter at that edge.
pub fn dsw_edge_parametric<T: Real>(well: &WellSpec<T>, m: T) -> Result<(T, T)> {
    if !(m > T::zero() && m < T::one()) {
        return Err(Error::Domain { what: "edge parameter m in (0, 1)", value: m.as_f64() });
    }
    let mu = ellip_e(m)? / ellip_k(m)?;
    let one = T::one();
    let den = (c::<T>(2.0) - m) * mu - c::<T>(2.0) * (one - m);
    if den <= T::zero() {
        return Err(Error::Singular("shock-edge denominator vanished"));
    }
    let sm = m.sqrt();
    let t = (one + (one - m) * (one - mu) / den) * well.l / (-c::<T>(4.0) * well.u0 * sm);
    let x = -(one + c::<T>(3.0) * m * (one - m) / den) * well.l / (c::<T>(2.0) * sm);
    Ok((t, x))
}

/// Shock-side edge of the linear-wave region at time `t >= t*`, relative to `origin`.
pub fn dsw_edge_at<T: Real>(well: &WellSpec<T>, t: T) -> Result<T> {
    let t_star = critical_time(well);
    if t < t_star {
        return Err(Error::Domain { what: "shock-edge time (must be >= t*)", value: t.as_f64() });
    }
    let hi = T::one() - c::<T>(64.0) * T::epsilon();
    let (t_hi, x_hi) = dsw_edge_parametric(well, hi)?;
    if t <= t_hi {
        // Within rounding of the critical point; interpolate to (t*, -l/2).
        let x_star = -well.l * c(0.5);
        let w = if t_hi > t_star { (t - t_star) / (t_hi - t_star) } else { T::zero() };
        return Ok(x_star + w * (x_hi - x_star));
    }
    let lo = c::<T>(1e-6).max(T::epsilon().sqrt());
    let m = bisect(
        |m| dsw_edge_parametric(well, m).map(|(tm, _)| tm - t).unwrap_or(T::nan()),
        lo,
        hi,
        T::epsilon() * c(8.0),
        "shock-edge parameter",
    )?;
    dsw_edge_parametric(well, m).map(|(_, x)| x)
}

/// Mean of the rarefaction-fan solution (plateau, fan, zero), absolute `x`.
pub fn rw_profile<T: Real>(well: &WellSpec<T>, x: T, t: T) -> T {
    let xr = x - well.origin;
    if xr >= well.l {
        return T::zero();
    }
    if t <= T::zero() {
        return well.initial(x);
    }
    let tail = well.l + c::<T>(6.0) * well.u0 * t;
    if xr > tail {
        (xr - well.l) / (c::<T>(6.0) * t)
    } else {
        well.u0
    }
}

/// Mean inside the self-similar shock from the well's left edge.
///
/// Solves `v2(u0, l2, 0) = (x - origin) / t` for `l2` and averages the cnoidal
/// wave. Outside the shock fan the plateau values are returned.
pub fn dsw_mean<T: Real>(well: &WellSpec<T>, x: T, t: T) -> Result<T> {
    let s = (x - well.origin) / t;
    let u0 = well.u0;
    if s <= c::<T>(12.0) * u0 {
        return Ok(T::zero());
    }
    if s >= c::<T>(2.0) * u0 {
        return Ok(u0);
    }
    let speed = |l2: T| -> T {
        Genus1State::new(u0, l2, T::zero())
            .and_then(|st| whitham_velocities(&st))
            .map(|v| v[1] - s)
            .unwrap_or(T::nan())
    };
    let l2 = bisect(speed, u0, T::zero(), T::epsilon() * (-u0) * c(16.0), "shock similarity variable")?;
    let st = Genus1State::new(u0, l2, T::zero())?;
    if st.m() >= T::one() - T::degeneracy_tol() {
        return Ok(u0);
    }
    cnoidal_mean(&st)
}

/// Potential of the hodograph (Euler-Darboux-Poisson) solution describing the
/// linear-wave region, for invariants `u0 <= l1 <= l2 <= 0`.
pub fn edp_potential<T: Real>(l1: T, l2: T, well: &WellSpec<T>) -> Result<T> {
    if !(l1 <= l2 && l2 <= T::zero()) {
        return Err(Error::Ordering(format!("potential needs l1 <= l2 <= 0, got ({l1}, {l2})")));
    }
    if l2 == T::zero() {
        return Ok(well.l);
    }
    let u0 = well.u0;
    if l1 == u0 {
        // The integrand collapses to a constant.
        return Ok(T::zero());
    }
    if l1 == l2 {
        return Err(Error::Singular("potential diverges for l1 = l2 != u0"));
    }
    // beta = l2 cos^2(theta) unfolds both endpoint singularities.
    let integrand = |theta: T| {
        let co = theta.cos();
        let beta = l2 * co * co;
        c::<T>(2.0) * ((beta - u0) / (beta - l1)).sqrt()
    };
    let opts = QuadOptions { max_intervals: 20_000, ..QuadOptions::default() };
    let (integral, _) = integrate(integrand, T::zero(), T::FRAC_PI_2(), opts, "hodograph potential")?;
    Ok(well.l - well.l / T::PI() * integral)
}

/// One point of the hodograph map for the linear-wave region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HodographPoint<T> {
    pub l1: T,
    pub l2: T,
    pub f: T,
    pub w1: T,
    pub w2: T,
    pub t: T,
    /// Position relative to the well origin.
    pub x: T,
    /// Difference between the step-`h` and step-`h/2` derivative estimates.
    pub fd_discrepancy: T,
}

fn partial<T: Real>(g: impl Fn(T) -> Result<T>, at: T, h: T) -> Result<(T, T)> {
    let d = |h: T| -> Result<T> { Ok((g(at + h)? - g(at - h)?) / (c::<T>(2.0) * h)) };
    let coarse = d(h)?;
    let fine = d(h * c(0.5))?;
    // Richardson extrapolation of the central difference.
    Ok(((c::<T>(4.0) * fine - coarse) / c(3.0), (fine - coarse).abs()))
}

/// Maps the invariant pair `(l1, l2)` (with `l3 = 0`) to `(t, x)`.
pub fn hodograph_point<T: Real>(l1: T, l2: T, well: &WellSpec<T>) -> Result<HodographPoint<T>> {
    let u0 = well.u0;
    if !(u0 <= l1 && l1 < l2 && l2 < T::zero()) {
        return Err(Error::Ordering(format!("hodograph needs u0 <= l1 < l2 < 0, got ({l1}, {l2})")));
    }
    let state = Genus1State::new(l1, l2, T::zero())?;
    let [v1, v2, _] = whitham_velocities(&state)?;
    if v2 == v1 {
        return Err(Error::Singular("hodograph with v1 = v2"));
    }
    let v = state.phase_speed();
    let gap = l2 - l1;
    let h = (c::<T>(1e-5) * (-u0)).min(gap * c(0.25)).max(T::epsilon().cbrt() * (-u0));
    let f = edp_potential(l1, l2, well)?;
    let (d1, e1) = partial(|a| edp_potential(a, l2, well), l1, h)?;
    let (d2, e2) = partial(|b| edp_potential(l1, b, well), l2, h)?;
    let w1 = f - (v - v1) * c(0.5) * d1;
    let w2 = f - (v - v2) * c(0.5) * d2;
    let t = (w1 - w2) / (v2 - v1);
    Ok(HodographPoint { l1, l2, f, w1, w2, t, x: w1 + v1 * t, fd_discrepancy: e1.max(e2) })
}

/// Time at which the linear-wave region carries invariants `(l1, l2)`.
pub fn interaction_time<T: Real>(l1: T, l2: T, well: &WellSpec<T>) -> Result<T> {
    hodograph_point(l1, l2, well).map(|p| p.t)
}

/// Crest level `l2 - l1 + l3` of a weak wave train; tends to `l3` as the
/// train decays.
pub fn lw_mean<T: Real>(l1: T, l2: T, l3: T) -> Result<T> {
    if l2 < l1 {
        return Err(Error::Ordering(format!("lw_mean needs l2 >= l1, got ({l1}, {l2})")));
    }
    Ok(l2 - l1 + l3)
}

/// Coarse region label of a point of the bare-well evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Left,
    Dsw,
    Plateau,
    Linear,
    Rarefaction,
    Right,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::Left => "L",
            Region::Dsw => "DSW",
            Region::Plateau => "plateau",
            Region::Linear => "LW",
            Region::Rarefaction => "RW",
            Region::Right => "R",
        }
    }
}

/// Region containing `(x, t)`. Points on an edge are assigned to the region
/// on its right.
pub fn region_of<T: Real>(well: &WellSpec<T>, x: T, t: T) -> Result<Region> {
    if t <= T::zero() {
        return Ok(if x <= well.origin {
            Region::Left
        } else if x < well.right_edge() {
            Region::Plateau
        } else {
            Region::Right
        });
    }
    let b = boundaries(well, t)?;
    let slack = T::epsilon().sqrt() * (well.l + x.abs());
    let left_of = |edge: T| x < edge - slack;
    let r = match b.regime {
        Regime::PreCritical => {
            if left_of(b.x_l) {
                Region::Left
            } else if left_of(b.x_p) {
                Region::Dsw
            } else if left_of(b.x_p_prime) {
                Region::Plateau
            } else if left_of(b.x_r) {
                Region::Rarefaction
            } else {
                Region::Right
            }
        }
        Regime::PostCritical => {
            if left_of(b.x_l) {
                Region::Left
            } else if left_of(b.x_p_prime) {
                Region::Dsw
            } else if left_of(b.x_p) {
                Region::Linear
            } else if left_of(b.x_r) {
                Region::Rarefaction
            } else {
                Region::Right
            }
        }
    };
    Ok(r)
}

/// Background seen by a soliton.
pub trait MeanField<T: Real> {
    fn mean(&self, x: T, t: T) -> Result<T>;
    fn region(&self, x: T, t: T) -> Result<Region>;
}

/// Mean field built from the modulation solution: cnoidal average inside
/// the shock, plateau, fan, and zero in the decaying linear-wave region.
///
/// After the critical time the shock interior is still taken from the
/// self-similar solution, which is exact only away from the interaction
/// region.
#[derive(Debug, Clone, Copy)]
pub struct WhithamMeanField<T> {
    pub well: WellSpec<T>,
}

impl<T: Real> MeanField<T> for WhithamMeanField<T> {
    fn mean(&self, x: T, t: T) -> Result<T> {
        Ok(match self.region(x, t)? {
            Region::Left | Region::Right | Region::Linear => T::zero(),
            Region::Plateau => self.well.u0,
            Region::Rarefaction => rw_profile(&self.well, x, t),
            Region::Dsw => dsw_mean(&self.well, x, t)?,
        })
    }

    fn region(&self, x: T, t: T) -> Result<Region> {
        region_of(&self.well, x, t)
    }
}

/// Crude mean field that replaces the shock by the undisturbed level on its
/// left (zero); used by the closed-form trajectory table.
#[derive(Debug, Clone, Copy)]
pub struct PiecewiseMeanField<T> {
    pub well: WellSpec<T>,
}

impl<T: Real> MeanField<T> for PiecewiseMeanField<T> {
    fn mean(&self, x: T, t: T) -> Result<T> {
        Ok(match self.region(x, t)? {
            Region::Left | Region::Right | Region::Linear | Region::Dsw => T::zero(),
            Region::Plateau => self.well.u0,
            Region::Rarefaction => rw_profile(&self.well, x, t),
        })
    }

    fn region(&self, x: T, t: T) -> Result<Region> {
        region_of(&self.well, x, t)
    }
}

/// Uniform background, handy for free-propagation checks.
#[derive(Debug, Clone, Copy)]
pub struct ConstantMeanField<T> {
    pub level: T,
}

impl<T: Real> MeanField<T> for ConstantMeanField<T> {
    fn mean(&self, _x: T, _t: T) -> Result<T> {
        Ok(self.level)
    }

    fn region(&self, _x: T, _t: T) -> Result<Region> {
        Ok(Region::Left)
    }
}
