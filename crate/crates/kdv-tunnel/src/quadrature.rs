//! Adaptive Gauss-Kronrod (7/15-point) quadrature.

use crate::error::{Error, Result};
use crate::scalar::{c, Real};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        let floor = T::epsilon() * c(50.0);
        Self {
            abs_tol: floor,
            rel_tol: c::<T>(1e-12).max(floor),
            max_intervals: 4000,
        }
    }
}

struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn kronrod<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Panel<T> {
    let centre = (a + b) * c(0.5);
    let half = (b - a) * c(0.5);
    let fc = f(centre);
    let mut gauss = fc * c(WG[3]);
    let mut kron = fc * c(WGK[7]);
    for j in 0..7 {
        let dx = half * c(XGK[j]);
        let sum = f(centre - dx) + f(centre + dx);
        kron = kron + sum * c(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + sum * c(WG[j / 2]);
        }
    }
    Panel { a, b, value: kron * half, error: ((kron - gauss) * half).abs() }
}

/// Integrates `f` over `[a, b]` by global adaptive bisection.
///
/// Returns the estimate and its error bound, or a [`Error::Quadrature`] when
/// the budget is exhausted before the tolerance is met. The integrand must be
/// finite at interior points; endpoint singularities should be removed by the
/// caller through a substitution.
pub fn integrate<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    opts: QuadOptions<T>,
    label: &'static str,
) -> Result<(T, T)> {
    if a == b {
        return Ok((T::zero(), T::zero()));
    }
    let mut panels = vec![kronrod(&mut f, a, b)];
    loop {
        let value = panels.iter().fold(T::zero(), |s, p| s + p.value);
        let error = panels.iter().fold(T::zero(), |s, p| s + p.error);
        if !value.is_finite() {
            return Err(Error::Quadrature { integrand: label, estimate: f64::INFINITY });
        }
        if error <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            return Ok((value, error));
        }
        if panels.len() >= opts.max_intervals {
            return Err(Error::Quadrature { integrand: label, estimate: error.as_f64() });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = panels.swap_remove(worst);
        let mid = (p.a + p.b) * c(0.5);
        if mid <= p.a.min(p.b) || mid >= p.a.max(p.b) {
            // Interval cannot be split further in this precision.
            return Err(Error::Quadrature { integrand: label, estimate: error.as_f64() });
        }
        panels.push(kronrod(&mut f, p.a, mid));
        panels.push(kronrod(&mut f, mid, p.b));
    }
}

/// [`integrate`] with default tolerances.
pub fn integrate_default<T: Real, F: FnMut(T) -> T>(f: F, a: T, b: T, label: &'static str) -> Result<T> {
    integrate(f, a, b, QuadOptions::default(), label).map(|(v, _)| v)
}

/// Bisection on a bracketing interval; `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, tol: T, label: &'static str) -> Result<T> {
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::Bracket(label));
    }
    for _ in 0..200 {
        let mid = (lo + hi) * c(0.5);
        if (hi - lo).abs() <= tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == T::zero() {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * c(0.5))
}
