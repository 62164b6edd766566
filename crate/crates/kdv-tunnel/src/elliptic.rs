//! Elliptic integrals and Jacobi functions in the parameter convention.
//!
//! Every routine takes the parameter `m` (the squared modulus). Complete and
//! incomplete integrals go through Carlson's symmetric forms; `cn`, `sn` and
//! `dn` use the descending arithmetic-geometric mean.

use crate::error::{domain, Error, Result};
use crate::scalar::{c, Real};

const MAX_DUPLICATIONS: usize = 200;

fn check_parameter<T: Real>(m: T, allow_one: bool) -> Result<()> {
    let ok = m >= T::zero() && (m < T::one() || (allow_one && m == T::one()));
    if ok {
        Ok(())
    } else {
        Err(domain("elliptic parameter m", m.as_f64()))
    }
}

fn check_angle<T: Real>(psi: T) -> Result<()> {
    if psi >= T::zero() && psi <= T::FRAC_PI_2() {
        Ok(())
    } else {
        Err(domain("amplitude angle psi", psi.as_f64()))
    }
}

/// Carlson's `R_F(x, y, z)`. At most one argument may be zero.
pub fn carlson_rf<T: Real>(x: T, y: T, z: T) -> Result<T> {
    let zero = T::zero();
    if x < zero || y < zero || z < zero || x.is_nan() || y.is_nan() || z.is_nan() {
        return Err(domain("R_F argument", x.min(y).min(z).as_f64()));
    }
    let zeros = [x, y, z].iter().filter(|v| **v == zero).count();
    if zeros > 1 {
        return Err(Error::Singular("R_F with two zero arguments"));
    }
    let (mut x, mut y, mut z) = (x, y, z);
    let a0 = (x + y + z) / c(3.0);
    let mut a = a0;
    let mut q = (c::<T>(3.0) * T::epsilon()).powf(c(-1.0 / 6.0))
        * (a0 - x).abs().max((a0 - y).abs()).max((a0 - z).abs());
    for _ in 0..MAX_DUPLICATIONS {
        if q < a.abs() {
            break;
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * sy + sy * sz + sz * sx;
        x = (x + lam) * c(0.25);
        y = (y + lam) * c(0.25);
        z = (z + lam) * c(0.25);
        a = (a + lam) * c(0.25);
        q = q * c(0.25);
    }
    let dx = T::one() - x / a;
    let dy = T::one() - y / a;
    let dz = -(dx + dy);
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    let series = T::one() - e2 / c(10.0) + e3 / c(14.0) + e2 * e2 / c(24.0)
        - c::<T>(3.0) * e2 * e3 / c(44.0);
    Ok(series / a.sqrt())
}

/// Carlson's `R_D(x, y, z)`. `z` must be positive, `x` and `y` not both zero.
pub fn carlson_rd<T: Real>(x: T, y: T, z: T) -> Result<T> {
    let zero = T::zero();
    if x < zero || y < zero || z <= zero || x.is_nan() || y.is_nan() || z.is_nan() {
        return Err(domain("R_D argument", x.min(y).min(z).as_f64()));
    }
    if x == zero && y == zero {
        return Err(Error::Singular("R_D with x = y = 0"));
    }
    let (mut x, mut y, mut z) = (x, y, z);
    let a0 = (x + y + c::<T>(3.0) * z) / c(5.0);
    let mut a = a0;
    let mut q = (T::epsilon() / c(4.0)).powf(c(-1.0 / 6.0))
        * (a0 - x).abs().max((a0 - y).abs()).max((a0 - z).abs());
    let mut sum = zero;
    let mut fac = T::one();
    for _ in 0..MAX_DUPLICATIONS {
        if q < a.abs() {
            break;
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * sy + sy * sz + sz * sx;
        sum = sum + fac / (sz * (z + lam));
        fac = fac * c(0.25);
        x = (x + lam) * c(0.25);
        y = (y + lam) * c(0.25);
        z = (z + lam) * c(0.25);
        a = (a + lam) * c(0.25);
        q = q * c(0.25);
    }
    let dx = T::one() - x / a;
    let dy = T::one() - y / a;
    let dz = -(dx + dy) / c(3.0);
    let xy = dx * dy;
    let z2 = dz * dz;
    let e2 = xy - c::<T>(6.0) * z2;
    let e3 = (c::<T>(3.0) * xy - c::<T>(8.0) * z2) * dz;
    let e4 = c::<T>(3.0) * (xy - z2) * z2;
    let e5 = xy * z2 * dz;
    let series = T::one() - c::<T>(3.0) * e2 / c(14.0) + e3 / c(6.0)
        + c::<T>(9.0) * e2 * e2 / c(88.0)
        - c::<T>(3.0) * e4 / c(22.0)
        - c::<T>(9.0) * e2 * e3 / c(52.0)
        + c::<T>(3.0) * e5 / c(26.0);
    Ok(fac * series / (a * a.sqrt()) + c::<T>(3.0) * sum)
}

/// Complete integral of the first kind, `0 <= m < 1`.
pub fn ellip_k<T: Real>(m: T) -> Result<T> {
    check_parameter(m, false)?;
    carlson_rf(T::zero(), T::one() - m, T::one())
}

/// Complete integral of the second kind, `0 <= m <= 1`.
pub fn ellip_e<T: Real>(m: T) -> Result<T> {
    check_parameter(m, true)?;
    if m == T::one() {
        return Ok(T::one());
    }
    let y = T::one() - m;
    Ok(carlson_rf(T::zero(), y, T::one())? - m / c(3.0) * carlson_rd(T::zero(), y, T::one())?)
}

/// Incomplete integral of the first kind `F(psi | m)`, `0 <= psi <= pi/2`, `0 <= m < 1`.
pub fn ellip_f<T: Real>(psi: T, m: T) -> Result<T> {
    check_angle(psi)?;
    check_parameter(m, false)?;
    if psi == T::zero() {
        return Ok(T::zero());
    }
    if psi == T::FRAC_PI_2() {
        return ellip_k(m);
    }
    let (s, co) = psi.sin_cos();
    carlson_rf(co * co, T::one() - m * s * s, T::one()).map(|rf| s * rf)
}

/// Incomplete integral of the second kind `E(psi | m)`, `0 <= psi <= pi/2`, `0 <= m <= 1`.
pub fn ellip_e_inc<T: Real>(psi: T, m: T) -> Result<T> {
    check_angle(psi)?;
    check_parameter(m, true)?;
    if psi == T::zero() {
        return Ok(T::zero());
    }
    if psi == T::FRAC_PI_2() {
        return ellip_e(m);
    }
    let (s, co) = psi.sin_cos();
    if m == T::one() {
        return Ok(s);
    }
    let (cc, d) = (co * co, T::one() - m * s * s);
    let rf = carlson_rf(cc, d, T::one())?;
    let rd = carlson_rd(cc, d, T::one())?;
    Ok(s * rf - m * s * s * s / c(3.0) * rd)
}

/// Jacobi zeta `Z(psi | m) = E(psi|m) - (E(m)/K(m)) F(psi|m)`; zero at both ends.
pub fn jacobi_zeta<T: Real>(psi: T, m: T) -> Result<T> {
    check_angle(psi)?;
    check_parameter(m, false)?;
    if psi == T::zero() || psi == T::FRAC_PI_2() || m == T::zero() {
        return Ok(T::zero());
    }
    let ratio = ellip_e(m)? / ellip_k(m)?;
    Ok(ellip_e_inc(psi, m)? - ratio * ellip_f(psi, m)?)
}

/// Jacobi `(sn, cn, dn)` at real argument `u`, `0 <= m <= 1`.
pub fn jacobi_sncndn<T: Real>(u: T, m: T) -> Result<(T, T, T)> {
    check_parameter(m, true)?;
    if !u.is_finite() {
        return Err(domain("jacobi argument u", u.as_f64()));
    }
    if m == T::zero() {
        let (s, co) = u.sin_cos();
        return Ok((s, co, T::one()));
    }
    if m == T::one() {
        let sech = T::one() / u.cosh();
        return Ok((u.tanh(), sech, sech));
    }
    // Reduce into one period so the phase doubling below stays accurate.
    let period = c::<T>(4.0) * ellip_k(m)?;
    let u = u - period * (u / period).round();

    let mut a = T::one();
    let mut b = (T::one() - m).sqrt();
    let mut ratios = Vec::with_capacity(16);
    let mut cn_coeff = m.sqrt();
    let tol = T::epsilon();
    let mut n = 0usize;
    while cn_coeff.abs() > tol * a && n < 64 {
        let a_next = (a + b) * c(0.5);
        cn_coeff = (a - b) * c(0.5);
        b = (a * b).sqrt();
        a = a_next;
        ratios.push(cn_coeff / a);
        n += 1;
    }
    let mut phi = a * u * c::<T>(2.0).powi(n as i32);
    let mut prev = phi;
    for r in ratios.iter().rev() {
        prev = phi;
        phi = (phi + (*r * phi.sin()).asin()) * c(0.5);
    }
    let (s, co) = phi.sin_cos();
    let dn = if n == 0 { T::one() } else { co / (prev - phi).cos() };
    Ok((s, co, dn))
}

/// Jacobi `cn(u | m)`.
pub fn jacobi_cn<T: Real>(u: T, m: T) -> Result<T> {
    jacobi_sncndn(u, m).map(|(_, cn, _)| cn)
}
