//! Periodic (cnoidal) waves and their Whitham modulation speeds.
//!
//! Genus-1 states carry three ordered Riemann invariants. Genus-2 speeds are
//! computed from the hyperelliptic period integrals by quadrature, and the
//! closed forms of their degenerations (a soliton riding on a cnoidal or
//! linear wave) are provided alongside.

use crate::elliptic::{ellip_e, ellip_k, jacobi_cn, jacobi_zeta};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::scalar::{c, Real};

/// Ordered triple `l1 <= l2 <= l3` describing a single-phase wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Genus1State<T> {
    pub l1: T,
    pub l2: T,
    pub l3: T,
}

impl<T: Real> Genus1State<T> {
    pub fn new(l1: T, l2: T, l3: T) -> Result<Self> {
        if !(l1.is_finite() && l2.is_finite() && l3.is_finite()) {
            return Err(Error::Ordering("non-finite Riemann invariant".into()));
        }
        if !(l1 <= l2 && l2 <= l3) {
            return Err(Error::Ordering(format!("expected l1 <= l2 <= l3, got ({l1}, {l2}, {l3})")));
        }
        Ok(Self { l1, l2, l3 })
    }

    /// Elliptic parameter; zero for the fully collapsed state.
    pub fn m(&self) -> T {
        let width = self.l3 - self.l1;
        if width == T::zero() {
            T::zero()
        } else {
            ((self.l2 - self.l1) / width).min(T::one())
        }
    }

    /// Phase speed `2 (l1 + l2 + l3)`.
    pub fn phase_speed(&self) -> T {
        c::<T>(2.0) * (self.l1 + self.l2 + self.l3)
    }

    pub fn shifted(&self, by: T) -> Self {
        Self { l1: self.l1 + by, l2: self.l2 + by, l3: self.l3 + by }
    }
}

/// A cnoidal wave: invariants plus a phase offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CnoidalWave<T> {
    pub state: Genus1State<T>,
    pub xi0: T,
}

impl<T: Real> CnoidalWave<T> {
    pub fn new(state: Genus1State<T>, xi0: T) -> Result<Self> {
        if state.l3 <= state.l1 {
            return Err(Error::Degenerate("cnoidal wave needs l3 > l1"));
        }
        Ok(Self { state, xi0 })
    }

    pub fn phase_speed(&self) -> T {
        self.state.phase_speed()
    }

    /// Spatial period `2 K(m) / sqrt(l3 - l1)`; infinite in the soliton limit.
    pub fn wavelength(&self) -> Result<T> {
        let m = self.state.m();
        if m >= T::one() {
            return Ok(T::infinity());
        }
        Ok(c::<T>(2.0) * ellip_k(m)? / (self.state.l3 - self.state.l1).sqrt())
    }

    /// `u(x, t)` of the travelling wave.
    pub fn eval(&self, x: T, t: T) -> Result<T> {
        let s = self.state;
        let theta = (s.l3 - s.l1).sqrt() * (x - self.phase_speed() * t) + self.xi0;
        let cn = jacobi_cn(theta, s.m())?;
        Ok(s.l1 - s.l2 + s.l3 + c::<T>(2.0) * (s.l2 - s.l1) * cn * cn)
    }
}

/// Period average of the cnoidal wave.
pub fn cnoidal_mean<T: Real>(state: &Genus1State<T>) -> Result<T> {
    if state.l3 <= state.l1 {
        return Err(Error::Degenerate("cnoidal mean needs l3 > l1"));
    }
    let m = state.m();
    if m >= T::one() {
        return Err(Error::Degenerate("cnoidal mean diverges in the soliton limit"));
    }
    let ratio = ellip_e(m)? / ellip_k(m)?;
    Ok(state.l1 + state.l2 - state.l3 + c::<T>(2.0) * (state.l3 - state.l1) * ratio)
}

/// Characteristic speeds when `l2` has merged with `l1`.
pub fn harmonic_limit<T: Real>(l12: T, l3: T) -> [T; 3] {
    let v = c::<T>(12.0) * l12 - c::<T>(6.0) * l3;
    [v, v, c::<T>(6.0) * l3]
}

/// Characteristic speeds when `l2` has merged with `l3`.
pub fn soliton_limit<T: Real>(l1: T, l23: T) -> [T; 3] {
    let v = c::<T>(2.0) * l1 + c::<T>(4.0) * l23;
    [c::<T>(6.0) * l1, v, v]
}

/// The three genus-1 Whitham speeds, ordered `v1 <= v2 <= v3`.
///
/// Within [`Real::degeneracy_tol`] of either end of the parameter range the
/// closed-form limits are returned, because the general expressions are 0/0
/// there.
pub fn whitham_velocities<T: Real>(state: &Genus1State<T>) -> Result<[T; 3]> {
    let Genus1State { l1, l2, l3 } = *state;
    if l3 == l1 {
        return Ok(harmonic_limit(l1, l3));
    }
    let m = state.m();
    let tol = T::degeneracy_tol();
    if m < tol {
        return Ok(harmonic_limit(l1, l3));
    }
    if T::one() - m < tol {
        return Ok(soliton_limit(l1, l3));
    }
    let k = ellip_k(m)?;
    let e = ellip_e(m)?;
    let v = state.phase_speed();
    let four = c::<T>(4.0);
    let mk = (T::one() - m) * k;
    Ok([
        v - four * (l2 - l1) * k / (k - e),
        v - four * (l2 - l1) * mk / (e - mk),
        v + four * (l3 - l2) * k / e,
    ])
}

/// Ordered invariants `l[0] <= ... <= l[4]` of a two-phase wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Genus2State<T> {
    pub l: [T; 5],
}

impl<T: Real> Genus2State<T> {
    pub fn new(l: [T; 5]) -> Result<Self> {
        if l.iter().any(|v| !v.is_finite()) {
            return Err(Error::Ordering("non-finite Riemann invariant".into()));
        }
        if l.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Ordering(format!("genus-2 invariants must be strictly increasing: {l:?}")));
        }
        Ok(Self { l })
    }

    /// `int over band (lk - mu) mu^power / P(mu) dmu`, band 1 = [l1, l2], band 2 = [l3, l4].
    ///
    /// The square-root zeros at the band edges are unfolded with
    /// `mu = a + (b - a) sin^2(theta)`.
    pub fn band_integral(&self, band: usize, power: i32, lk: T) -> Result<T> {
        let (lo, hi, others) = match band {
            1 => (self.l[0], self.l[1], [self.l[2], self.l[3], self.l[4]]),
            2 => (self.l[2], self.l[3], [self.l[0], self.l[1], self.l[4]]),
            _ => return Err(Error::Config(format!("band index {band} not in 1..=2"))),
        };
        let width = hi - lo;
        let integrand = |theta: T| {
            let s = theta.sin();
            let mu = lo + width * s * s;
            let rest = others.iter().fold(T::one(), |acc, r| acc * (mu - *r)).abs();
            c::<T>(2.0) * (lk - mu) * mu.powi(power) / rest.sqrt()
        };
        let opts = QuadOptions {
            rel_tol: c::<T>(1e-11).max(T::epsilon() * c(100.0)),
            max_intervals: 20_000,
            ..QuadOptions::default()
        };
        integrate(integrand, T::zero(), T::FRAC_PI_2(), opts, "genus-2 band integral").map(|(v, _)| v)
    }
}

/// Genus-2 characteristic speed of invariant `k` (1-based).
pub fn genus2_velocity<T: Real>(state: &Genus2State<T>, k: usize) -> Result<T> {
    if !(1..=5).contains(&k) {
        return Err(Error::Config(format!("genus-2 index {k} not in 1..=5")));
    }
    let lk = state.l[k - 1];
    let i = |band, power| state.band_integral(band, power, lk);
    let (i10, i11, i12) = (i(1, 0)?, i(1, 1)?, i(1, 2)?);
    let (i20, i21, i22) = (i(2, 0)?, i(2, 1)?, i(2, 2)?);
    let den = i21 * i10 - i20 * i11;
    if den == T::zero() {
        return Err(Error::Singular("genus-2 speed denominator vanished"));
    }
    let sum = state.l.iter().fold(T::zero(), |a, b| a + *b);
    let twelve = c::<T>(12.0);
    Ok(-c::<T>(6.0) * sum + twelve * lk + twelve * (i22 * i10 - i20 * i12) / den)
}

/// Speed of a soliton (band `[l4, l5]` collapsed to `l45`) on the cnoidal wave `(l1, l2, l3)`.
pub fn v45_limit<T: Real>(l1: T, l2: T, l3: T, l45: T) -> Result<T> {
    Genus1State::new(l1, l2, l3)?;
    if l45 <= l3 {
        return Err(Error::Domain { what: "l45 must exceed l3", value: (l45 - l3).as_f64() });
    }
    let base = c::<T>(2.0) * (l1 + l2 + l3);
    let four = c::<T>(4.0);
    if l3 == l1 {
        return Ok(base + four * (l45 - l2));
    }
    let m = (l2 - l1) / (l3 - l1);
    if m >= T::one() {
        return Err(Error::Singular("v45 with l2 = l3"));
    }
    let psi = ((l45 - l3) / (l45 - l2)).sqrt().min(T::one()).asin();
    let z = jacobi_zeta(psi, m)?;
    let w = ((l45 - l2) * (l3 - l1) / ((l45 - l3) * (l45 - l1))).sqrt();
    Ok(base + four * (l45 - l2) / (T::one() - w * z))
}

/// Speed of a soliton (gap `[l2, l3]` collapsed to `l23`) inside the cnoidal wave `(l1, l4, l5)`.
pub fn v23_limit<T: Real>(l1: T, l23: T, l4: T, l5: T) -> Result<T> {
    if !(l1 < l23 && l23 < l4 && l4 < l5) {
        return Err(Error::Ordering(format!("v23 needs l1 < l23 < l4 < l5, got ({l1}, {l23}, {l4}, {l5})")));
    }
    let m = (l4 - l1) / (l5 - l1);
    let psi = ((l23 - l1) / (l4 - l1)).sqrt().min(T::one()).asin();
    let z = jacobi_zeta(psi, m)?;
    if z == T::zero() {
        return Err(Error::Singular("v23 with vanishing zeta"));
    }
    let root = ((l23 - l1) * (l4 - l23) * (l5 - l23)).sqrt();
    Ok(c::<T>(2.0) * (l1 + l4 + l5) - c::<T>(4.0) * root / ((l5 - l1).sqrt() * z))
}

/// Embedded-soliton speed in a rarefaction fan: `2 l1 + 4 l23`.
pub fn embed_speed_rw<T: Real>(l1: T, l23: T) -> T {
    c::<T>(2.0) * l1 + c::<T>(4.0) * l23
}

/// Embedded-soliton speed in a linear wave region, the middle genus-1 speed of `(l1, l23, l5)`.
pub fn embed_speed_lw<T: Real>(l1: T, l23: T, l5: T) -> Result<T> {
    if l23 >= l5 {
        return Err(Error::Singular("embedded speed with m_e = 1"));
    }
    Ok(whitham_velocities(&Genus1State::new(l1, l23, l5)?)?[1])
}
