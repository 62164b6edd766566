//! Quick end-to-end sanity checks, run by `kdv-tunnel selftest`.

use std::f64::consts::PI;

use crate::elliptic::{ellip_e, ellip_k};
use crate::meanfield::{boundaries, critical_time, WellSpec};
use crate::sim::{soliton_profile, Grid, Solver, SolverConfig, WaveField};
use crate::soliton::{classify, critical_amplitude_dsw, OutcomeKind};
use crate::tracker::{detect_soliton, DetectOptions, Window};
use crate::whitham::{genus2_velocity, soliton_limit, v45_limit, whitham_velocities, Genus1State, Genus2State};

#[derive(Debug, Clone, PartialEq)]
pub struct SelfCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> crate::Result<(bool, String)>) -> SelfCheck {
    match f() {
        Ok((passed, detail)) => SelfCheck { name, passed, detail },
        Err(e) => SelfCheck { name, passed: false, detail: format!("error: {e}") },
    }
}

pub fn run() -> Vec<SelfCheck> {
    vec![
        check("legendre relation", || {
            let m = 0.3;
            let (k, e, kp, ep) = (ellip_k(m)?, ellip_e(m)?, ellip_k(1.0 - m)?, ellip_e(1.0 - m)?);
            let r = (e * kp + ep * k - k * kp - PI / 2.0).abs();
            Ok((r < 1e-12, format!("residual {r:e}")))
        }),
        check("soliton-edge limit", || {
            let (l1, l3) = (-1.0f64, 1.0f64);
            let l2 = l3 - 1e-8 * (l3 - l1);
            let v = whitham_velocities(&Genus1State::new(l1, l2, l3)?)?;
            let lim = soliton_limit(l1, l3);
            let r = (v[2] - lim[2]).abs() / lim[2].abs();
            Ok((r < 1e-5, format!("v3 relative error {r:e}")))
        }),
        check("genus-2 band collapse", || {
            let g = 1e-6f64;
            let s = Genus2State::new([-1.0, -0.6, -0.2, 0.5 - g / 2.0, 0.5 + g / 2.0])?;
            let lim: f64 = v45_limit(-1.0, -0.6, -0.2, 0.5)?;
            let r = (genus2_velocity(&s, 4)? - lim).abs() / lim.abs();
            Ok((r < 1e-4, format!("v4 relative error {r:e}")))
        }),
        check("classification table", || {
            let well = WellSpec::new(-1.0f64, 100.0)?;
            let eps = critical_amplitude_dsw(50.0, &well);
            let got: Vec<OutcomeKind> =
                [0.1, 1.0, 2.0, 3.0].iter().map(|&a| classify(a, 50.0, &well, eps)).collect::<crate::Result<_>>()?;
            let want = [OutcomeKind::EmbedDSW, OutcomeKind::EmbedLW, OutcomeKind::EmbedRW, OutcomeKind::Tunnel];
            Ok((got == want, format!("{got:?}")))
        }),
        check("boundary continuity at t*", || {
            let well = WellSpec::new(-1.0f64, 20.0)?;
            let ts = critical_time(&well);
            let (a, b) = (boundaries(&well, ts * (1.0 - 1e-12))?, boundaries(&well, ts * (1.0 + 1e-12))?);
            let d = (a.x_p - b.x_p).abs().max((a.x_p_prime - b.x_p_prime).abs());
            Ok((d < 1e-9, format!("jump {d:e}")))
        }),
        check("free soliton", || {
            let grid = Grid::new(-40.0f64, 40.0, 512)?;
            let u = grid.xs().iter().map(|&x| soliton_profile(2.0, -20.0, x)).collect();
            let f = WaveField::new(grid, u, 0.0)?;
            let snaps = Solver::new(grid, SolverConfig::default())?.evolve(&f, 5.0)?;
            let last = snaps.last().expect("evolve emits the final state");
            let p = detect_soliton(last, Window::around(0.0, 5.0), &DetectOptions::for_amplitude(2.0))?;
            let speed_err = ((p.x_peak + 20.0) / 5.0 - 4.0).abs() / 4.0;
            let amp_err = (p.a_meas - 2.0).abs() / 2.0;
            Ok((speed_err < 5e-3 && amp_err < 1e-2, format!("speed error {speed_err:e}, amplitude error {amp_err:e}")))
        }),
    ]
}
