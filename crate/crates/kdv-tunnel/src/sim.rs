//! Pseudospectral solver for `u_t + 6 u u_x + u_xxx = 0` on a periodic grid.
//!
//! The dispersive term is integrated exactly in Fourier space; the nonlinear
//! term is advanced with the classical four-stage Runge-Kutta scheme in the
//! integrating-factor (Lawson) form. Products are dealiased by truncation.

use std::sync::Arc;

use realfft::num_complex::Complex;
use realfft::{ComplexToReal, FftNum, RealFftPlanner, RealToComplex};

use crate::error::{Error, Result};
use crate::meanfield::WellSpec;
use crate::scalar::{c, Real};

/// Scalar usable by the solver.
pub trait SimReal: Real + FftNum {}
impl<T: Real + FftNum> SimReal for T {}

/// Uniform periodic grid `x_j = x_min + j dx`, `j < n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    pub x_min: T,
    pub x_max: T,
    pub n: usize,
}

impl<T: Real> Grid<T> {
    pub fn new(x_min: T, x_max: T, n: usize) -> Result<Self> {
        if n < 256 || !n.is_power_of_two() {
            return Err(Error::Grid(format!("n = {n} must be a power of two >= 256")));
        }
        if !(x_max > x_min && x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::Grid(format!("empty domain [{x_min}, {x_max}]")));
        }
        Ok(Self { x_min, x_max, n })
    }

    pub fn length(&self) -> T {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> T {
        self.length() / c(self.n as f64)
    }

    pub fn x(&self, j: usize) -> T {
        self.x_min + self.dx() * c(j as f64)
    }

    pub fn xs(&self) -> Vec<T> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Nearest grid index to `x`, clamped to the grid.
    pub fn index_of(&self, x: T) -> usize {
        let j = ((x - self.x_min) / self.dx()).round();
        j.max(T::zero()).min(c((self.n - 1) as f64)).to_usize().unwrap_or(0)
    }
}

/// Samples of `u` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField<T> {
    pub grid: Grid<T>,
    pub u: Vec<T>,
    pub t: T,
}

impl<T: Real> WaveField<T> {
    pub fn new(grid: Grid<T>, u: Vec<T>, t: T) -> Result<Self> {
        if u.len() != grid.n {
            return Err(Error::Grid(format!("{} samples for a grid of {}", u.len(), grid.n)));
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Grid("non-finite sample".into()));
        }
        Ok(Self { grid, u, t })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self { grid, u: vec![T::zero(); grid.n], t: T::zero() }
    }

    /// Peak `|u|`; NaN if any sample is NaN.
    pub fn max_abs(&self) -> T {
        self.u.iter().fold(T::zero(), |m, v| if v.is_nan() || m.is_nan() { T::nan() } else { m.max(v.abs()) })
    }

    /// Mirror image about the domain centre (valid on the periodic grid).
    pub fn reflected(&self) -> Self {
        let n = self.grid.n;
        let u = (0..n).map(|j| self.u[(n - j) % n]).collect();
        Self { grid: self.grid, u, t: self.t }
    }

    /// CSV with a `# t=<time>` header and `x,u` columns.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# t={}\nx,u\n", self.t);
        for (j, v) in self.u.iter().enumerate() {
            out.push_str(&format!("{},{}\n", self.grid.x(j), v));
        }
        out
    }
}

/// Smooth unit step used to regularise the well edges.
fn smooth_step<T: Real>(s: T) -> T {
    (T::one() + s.tanh()) * c(0.5)
}

/// Exact soliton profile `a sech^2(sqrt(a/2)(x - x0))`.
pub fn soliton_profile<T: Real>(a: T, x0: T, x: T) -> T {
    if a <= T::zero() {
        return T::zero();
    }
    let arg = ((a * c(0.5)).sqrt() * (x - x0)).abs();
    if arg > c(350.0) {
        return T::zero();
    }
    let s = T::one() / arg.cosh();
    a * s * s
}

/// Well plus trial soliton, with the well's jumps smoothed over `delta`.
///
/// `a = 0` gives the bare well.
pub fn build_initial<T: Real>(well: &WellSpec<T>, a: T, x0: T, grid: Grid<T>, delta: T) -> Result<WaveField<T>> {
    if !(delta > T::zero()) {
        return Err(Error::Config(format!("smoothing width must be positive, got {delta}")));
    }
    if a < T::zero() {
        return Err(Error::NonPositiveAmplitude(a.as_f64()));
    }
    let soliton_width = if a > T::zero() { (c::<T>(2.0) / a).sqrt() } else { T::zero() };
    let margin = c::<T>(10.0) * soliton_width.max(delta);
    let lo = well.origin.min(if a > T::zero() { x0 } else { well.origin });
    let hi = well.right_edge().max(if a > T::zero() { x0 } else { well.right_edge() });
    if lo - margin < grid.x_min || hi + margin > grid.x_max {
        return Err(Error::Geometry(format!(
            "initial data on [{lo}, {hi}] needs margin {margin} inside [{}, {}]",
            grid.x_min, grid.x_max
        )));
    }
    let u = (0..grid.n)
        .map(|j| {
            let x = grid.x(j);
            let well_part = well.u0
                * (smooth_step((x - well.origin) / delta) - smooth_step((x - well.right_edge()) / delta));
            well_part + soliton_profile(a, x0, x)
        })
        .collect();
    WaveField::new(grid, u, T::zero())
}

/// Numerical parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    /// Upper bound on the time step.
    pub dt: T,
    /// Fraction of the resolved wavenumbers kept after each product.
    pub dealias_fraction: T,
    /// Width of the tanh ramps at the well edges.
    pub smoothing_delta: T,
    /// Snapshot cadence.
    pub sample_interval: T,
    /// Courant number in `dt <= cfl dx / max(1, 6 max|u|)`.
    pub cfl: T,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            dt: c(1e-3),
            dealias_fraction: c(2.0 / 3.0),
            smoothing_delta: c(0.5),
            sample_interval: c(0.1),
            cfl: c(0.3),
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: T| v > T::zero() && v.is_finite();
        if !pos(self.dt) || !pos(self.smoothing_delta) || !pos(self.sample_interval) || !pos(self.cfl) {
            return Err(Error::Config(format!("solver parameters must be positive: {self:?}")));
        }
        if !(self.dealias_fraction > T::zero() && self.dealias_fraction <= T::one()) {
            return Err(Error::Config(format!("dealias_fraction {} not in (0, 1]", self.dealias_fraction)));
        }
        Ok(())
    }

    /// Step actually used for a field with peak `max_abs` on `grid`.
    pub fn effective_dt(&self, grid: &Grid<T>, max_abs: T) -> T {
        let bound = self.cfl * grid.dx() / T::one().max(c::<T>(6.0) * max_abs);
        self.dt.min(bound)
    }
}

/// Running diagnostics of one evolution.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunStats<T> {
    pub steps: usize,
    pub dt: T,
    /// Largest `|u|` seen within five points of either domain end.
    pub edge_max: T,
}

/// Precomputed transforms and propagators for one grid and step.
pub struct Solver<T: SimReal> {
    grid: Grid<T>,
    config: SolverConfig<T>,
    forward: Arc<dyn RealToComplex<T>>,
    inverse: Arc<dyn ComplexToReal<T>>,
    k: Vec<T>,
    mask: Vec<T>,
}

impl<T: SimReal> std::fmt::Debug for Solver<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Solver").field("grid", &self.grid).field("config", &self.config).finish()
    }
}

struct Workspace<T> {
    spec: Vec<Complex<T>>,
    stage: Vec<Complex<T>>,
    tmp: Vec<Complex<T>>,
    acc: Vec<Complex<T>>,
    nl: Vec<Complex<T>>,
    real: Vec<T>,
    scratch_f: Vec<Complex<T>>,
    scratch_i: Vec<Complex<T>>,
    e_full: Vec<Complex<T>>,
    e_half: Vec<Complex<T>>,
    g: Vec<Complex<T>>,
}

impl<T: SimReal> Solver<T> {
    pub fn new(grid: Grid<T>, config: SolverConfig<T>) -> Result<Self> {
        config.validate()?;
        let mut planner = RealFftPlanner::<T>::new();
        let forward = planner.plan_fft_forward(grid.n);
        let inverse = planner.plan_fft_inverse(grid.n);
        let half = grid.n / 2;
        let k0 = T::TAU() / grid.length();
        let k: Vec<T> = (0..=half).map(|j| k0 * c(j as f64)).collect();
        let cutoff = config.dealias_fraction * c(half as f64);
        let mask = (0..=half)
            .map(|j| if j < half && c::<T>(j as f64) <= cutoff { T::one() } else { T::zero() })
            .collect();
        Ok(Self { grid, config, forward, inverse, k, mask })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn config(&self) -> &SolverConfig<T> {
        &self.config
    }

    fn workspace(&self, h: T) -> Workspace<T> {
        let m = self.k.len();
        let zero = Complex::new(T::zero(), T::zero());
        let phase = |k: T, dt: T| {
            let th = k * k * k * dt;
            Complex::new(th.cos(), th.sin())
        };
        let n = c::<T>(self.grid.n as f64);
        let norm = T::one() / (n * n);
        Workspace {
            spec: vec![zero; m],
            stage: vec![zero; m],
            tmp: vec![zero; m],
            acc: vec![zero; m],
            nl: vec![zero; m],
            real: vec![T::zero(); self.grid.n],
            scratch_f: vec![zero; self.forward.get_scratch_len()],
            scratch_i: vec![zero; self.inverse.get_scratch_len()],
            e_full: self.k.iter().map(|&k| phase(k, h)).collect(),
            e_half: self.k.iter().map(|&k| phase(k, h * c(0.5))).collect(),
            // -3 i k h, dealiased, with both transform normalisations folded in.
            g: self
                .k
                .iter()
                .zip(&self.mask)
                .map(|(&k, &mk)| Complex::new(T::zero(), -c::<T>(3.0) * k * h * mk * norm))
                .collect(),
        }
    }

    /// `g * FFT((IFFT(input))^2)` into `out`; `input` is left untouched.
    fn nonlinear(&self, ws_real: &mut [T], ws_tmp: &mut [Complex<T>], scratch_f: &mut [Complex<T>], scratch_i: &mut [Complex<T>], input: &[Complex<T>], g: &[Complex<T>], out: &mut [Complex<T>]) {
        ws_tmp.copy_from_slice(input);
        // Imaginary parts of the DC and Nyquist bins must vanish for c2r.
        let last = ws_tmp.len() - 1;
        ws_tmp[0].im = T::zero();
        ws_tmp[last].im = T::zero();
        self.inverse
            .process_with_scratch(ws_tmp, ws_real, scratch_i)
            .expect("inverse transform length is fixed by construction");
        for v in ws_real.iter_mut() {
            *v = *v * *v;
        }
        self.forward
            .process_with_scratch(ws_real, out, scratch_f)
            .expect("forward transform length is fixed by construction");
        for (o, gg) in out.iter_mut().zip(g) {
            *o = *o * *gg;
        }
    }

    /// Advances `field` to `t_end`, calling `on_sample` at `t = 0` and every
    /// `sample_interval` (plus at `t_end`). The step is the configured `dt`
    /// capped by the CFL bound on the initial data.
    pub fn evolve_with<F>(&self, field: &WaveField<T>, t_end: T, mut on_sample: F) -> Result<RunStats<T>>
    where
        F: FnMut(&WaveField<T>) -> Result<()>,
    {
        if field.grid != self.grid {
            return Err(Error::Grid("field grid differs from solver grid".into()));
        }
        if !(t_end >= field.t) {
            return Err(Error::Config(format!("t_end {t_end} before field time {}", field.t)));
        }
        let u_max0 = field.max_abs();
        let blow_up = c::<T>(100.0) * u_max0.max(T::epsilon());
        let dt_cap = self.config.effective_dt(&self.grid, u_max0);
        let interval = self.config.sample_interval;
        let steps_per_sample = (interval / dt_cap).ceil().to_usize().unwrap_or(1).max(1);
        let h = interval / c(steps_per_sample as f64);
        let mut ws = self.workspace(h);
        let n = self.grid.n;
        let norm = T::one() / c(n as f64);

        let mut real = field.u.clone();
        self.forward
            .process_with_scratch(&mut real, &mut ws.spec, &mut ws.scratch_f)
            .expect("forward transform length is fixed by construction");
        let mut stats = RunStats { steps: 0, dt: h, edge_max: edge_max(&field.u) };
        let mut snapshot = field.clone();
        on_sample(&snapshot)?;

        let t0 = field.t;
        let total = ((t_end - t0) / interval - c(1e-9)).ceil().to_usize().unwrap_or(0);
        for s in 1..=total {
            let t_target = (t0 + interval * c(s as f64)).min(t_end);
            let t_prev = t0 + interval * c((s - 1) as f64);
            let span = t_target - t_prev;
            let partial = span < interval * c(1.0 - 1e-9);
            let (steps, hh) = if partial {
                let k = (span / dt_cap).ceil().to_usize().unwrap_or(1).max(1);
                (k, span / c(k as f64))
            } else {
                (steps_per_sample, h)
            };
            if partial {
                let spec = std::mem::take(&mut ws.spec);
                ws = self.workspace(hh);
                ws.spec = spec;
            }
            for _ in 0..steps {
                self.step(&mut ws);
                stats.steps += 1;
            }
            ws.tmp.copy_from_slice(&ws.spec);
            let last = ws.tmp.len() - 1;
            ws.tmp[0].im = T::zero();
            ws.tmp[last].im = T::zero();
            self.inverse
                .process_with_scratch(&mut ws.tmp, &mut snapshot.u, &mut ws.scratch_i)
                .expect("inverse transform length is fixed by construction");
            for v in snapshot.u.iter_mut() {
                *v = *v * norm;
            }
            snapshot.t = t_target;
            let peak = snapshot.max_abs();
            if !peak.is_finite() || peak > blow_up {
                return Err(Error::BlowUp { t: t_target.as_f64(), max_abs: peak.as_f64() });
            }
            stats.edge_max = stats.edge_max.max(edge_max(&snapshot.u));
            on_sample(&snapshot)?;
        }
        Ok(stats)
    }

    /// Collects every snapshot of [`Solver::evolve_with`].
    pub fn evolve(&self, field: &WaveField<T>, t_end: T) -> Result<Vec<WaveField<T>>> {
        let mut out = Vec::new();
        self.evolve_with(field, t_end, |f| {
            out.push(f.clone());
            Ok(())
        })?;
        Ok(out)
    }

    fn step(&self, ws: &mut Workspace<T>) {
        let half = c::<T>(0.5);
        let two = c::<T>(2.0);
        let sixth = T::one() / c(6.0);
        let m = ws.spec.len();
        let Workspace { spec, stage, tmp, acc, nl: b, real, scratch_f, scratch_i, e_full, e_half, g } = ws;

        // a = N(v)
        self.nonlinear(real, tmp, scratch_f, scratch_i, spec, g, stage);
        for j in 0..m {
            acc[j] = e_full[j] * stage[j];
            stage[j] = e_half[j] * (spec[j] + stage[j] * half);
        }
        // b = N(E2 (v + a/2))
        self.nonlinear(real, tmp, scratch_f, scratch_i, stage, g, b);
        for j in 0..m {
            acc[j] = acc[j] + b[j] * e_half[j] * two;
            stage[j] = e_half[j] * spec[j] + b[j] * half;
        }
        // c = N(E2 v + b/2)
        self.nonlinear(real, tmp, scratch_f, scratch_i, stage, g, b);
        for j in 0..m {
            acc[j] = acc[j] + b[j] * e_half[j] * two;
            stage[j] = e_full[j] * spec[j] + e_half[j] * b[j];
        }
        // d = N(E v + E2 c)
        self.nonlinear(real, tmp, scratch_f, scratch_i, stage, g, b);
        for j in 0..m {
            let v = e_full[j] * spec[j] + (acc[j] + b[j]) * sixth;
            spec[j] = v * self.mask[j];
        }
    }
}

fn edge_max<T: Real>(u: &[T]) -> T {
    let n = u.len();
    let k = 5.min(n);
    u[..k].iter().chain(&u[n - k..]).fold(T::zero(), |m, v| m.max(v.abs()))
}

/// `(mass, momentum, energy) = (int u, int u^2, int (u^3 - u_x^2 / 2))`,
/// with `u_x` computed spectrally.
pub fn conserved_quantities<T: SimReal>(field: &WaveField<T>) -> (T, T, T) {
    let n = field.grid.n;
    let dx = field.grid.dx();
    let mut planner = RealFftPlanner::<T>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut real = field.u.clone();
    let mut spec = fwd.make_output_vec();
    fwd.process(&mut real, &mut spec).expect("transform length matches");
    let k0 = T::TAU() / field.grid.length();
    let last = spec.len() - 1;
    for (j, s) in spec.iter_mut().enumerate() {
        let k = if j == last { T::zero() } else { k0 * c(j as f64) };
        *s = Complex::new(-s.im * k, s.re * k);
    }
    spec[0].im = T::zero();
    spec[last] = Complex::new(T::zero(), T::zero());
    let mut ux = inv.make_output_vec();
    inv.process(&mut spec, &mut ux).expect("transform length matches");
    let norm = T::one() / c(n as f64);
    let (mut mass, mut mom, mut energy) = (T::zero(), T::zero(), T::zero());
    for (u, d) in field.u.iter().zip(&ux) {
        let d = *d * norm;
        mass = mass + *u;
        mom = mom + *u * *u;
        energy = energy + *u * *u * *u - d * d * c(0.5);
    }
    (mass * dx, mom * dx, energy * dx)
}

/// Checks that nothing launched by the initial data can wrap around the
/// periodic domain before `t_end`. The leftmost signal is the shock's
/// harmonic edge (speed `12 u0`); the rightmost is bounded by a soliton of
/// amplitude `a` on zero background (speed `2a`).
pub fn wrap_guard<T: Real>(grid: &Grid<T>, well: &WellSpec<T>, a: T, x0: T, t_end: T, delta: T) -> Result<()> {
    let width = if a > T::zero() { (c::<T>(2.0) / a).sqrt() } else { T::zero() };
    let margin = c::<T>(10.0) * width.max(delta);
    let left = well.origin.min(if a > T::zero() { x0 } else { well.origin }) + c::<T>(12.0) * well.u0 * t_end;
    let right = well.right_edge().max(if a > T::zero() { x0 + c::<T>(2.0) * a * t_end } else { well.right_edge() });
    if left - margin < grid.x_min || right + margin > grid.x_max {
        return Err(Error::Grid(format!(
            "signals reach [{left}, {right}] by t = {t_end}; domain [{}, {}] is too small",
            grid.x_min, grid.x_max
        )));
    }
    Ok(())
}
