use kdv_tunnel::meanfield::WellSpec;
use kdv_tunnel::sim::*;
use kdv_tunnel::Error;
use proptest::prelude::*;

fn grid(n: usize) -> Grid<f64> {
    Grid::new(-40.0, 40.0, n).unwrap()
}

fn soliton(a: f64, x0: f64, g: Grid<f64>) -> WaveField<f64> {
    let u = g.xs().into_iter().map(|x| soliton_profile(a, x0, x)).collect();
    WaveField::new(g, u, 0.0).unwrap()
}

fn solver(g: Grid<f64>) -> Solver<f64> {
    Solver::new(g, SolverConfig { sample_interval: 0.5, ..SolverConfig::default() }).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn grid_validation() {
    assert!(matches!(Grid::new(0.0, 1.0, 100), Err(Error::Grid(_))));
    assert!(Grid::new(0.0, 1.0, 300).is_err());
    assert!(Grid::new(0.0, 1.0, 128).is_err());
    assert!(Grid::new(1.0, 1.0, 256).is_err());
    assert!(Grid::new(0.0, f64::INFINITY, 256).is_err());
    let g = grid(256);
    assert_eq!(g.dx(), 80.0 / 256.0);
    assert_eq!(g.x(0), -40.0);
    assert_eq!(g.xs().len(), 256);
    assert_eq!(g.index_of(0.0), 128);
    assert_eq!(g.index_of(-1e9), 0);
    assert_eq!(g.index_of(1e9), 255);
}

#[test]
fn field_validation() {
    let g = grid(256);
    assert!(WaveField::new(g, vec![0.0; 255], 0.0).is_err());
    let mut u = vec![0.0; 256];
    u[3] = f64::NAN;
    assert!(WaveField::new(g, u, 0.0).is_err());
}

#[test]
fn soliton_profile_values() {
    assert_eq!(soliton_profile(2.0, 1.0, 1.0), 2.0);
    let s = 1.0 / 1.0_f64.cosh();
    assert!((soliton_profile(2.0, 0.0, 1.0) - 2.0 * s * s).abs() < 1e-15);
    assert_eq!(soliton_profile(0.0, 0.0, 0.0), 0.0);
    assert_eq!(soliton_profile(2.0, 0.0, 1e4), 0.0);
}

#[test]
fn initial_data_geometry() {
    let g = Grid::new(-100.0, 100.0, 4096).unwrap();
    let well = WellSpec::new(-1.0_f64, 20.0).unwrap();
    let f = build_initial(&well, 2.0, -30.0, g, 0.5).unwrap();
    assert!((f.u[g.index_of(10.0)] + 1.0).abs() < 1e-12);
    assert!(f.u[g.index_of(60.0)].abs() < 1e-12);
    let j = g.index_of(-30.0);
    assert!((f.u[j] - soliton_profile(2.0, -30.0, g.x(j))).abs() < 1e-12);
    assert!(f.u[j] > 1.99);
    assert!((f.u[g.index_of(0.0)] + 0.5).abs() < 1e-12);
    // Bare well.
    let bare = build_initial(&well, 0.0, 0.0, g, 0.5).unwrap();
    assert!(bare.u[g.index_of(-30.0)].abs() < 1e-12);
    assert!(matches!(build_initial(&well, 2.0, -99.0, g, 0.5), Err(Error::Geometry(_))));
    assert!(matches!(build_initial(&well, 2.0, 0.0, g, 0.0), Err(Error::Config(_))));
    assert!(build_initial(&well, -1.0, 0.0, g, 0.5).is_err());
}

#[test]
fn smoothing_converges_to_the_sharp_well() {
    // Each smoothed edge differs from the jump by |u0| delta ln 2 in L1.
    let g = Grid::new(-64.0, 64.0, 65536).unwrap();
    let well = WellSpec::new(-1.5_f64, 20.0).unwrap();
    let mut prev = f64::INFINITY;
    for delta in [1.0, 0.5, 0.25, 0.125] {
        let f = build_initial(&well, 0.0, 0.0, g, delta).unwrap();
        let l1: f64 = g
            .xs()
            .iter()
            .zip(&f.u)
            .map(|(&x, &u)| {
                let sharp = if (0.0..20.0).contains(&x) { -1.5 } else { 0.0 };
                (u - sharp).abs()
            })
            .sum::<f64>()
            * g.dx();
        let want = 2.0 * 1.5 * delta * std::f64::consts::LN_2;
        assert!((l1 - want).abs() < 0.02 * want + 2.0 * g.dx(), "delta {delta}: {l1} vs {want}");
        assert!(l1 < prev);
        prev = l1;
    }
}

#[test]
fn soliton_invariants_are_exact() {
    // Mass 2 sqrt(2a), momentum (4/3) a^2 / sqrt(a/2), energy 6.4 at a = 2.
    let (m, p, e) = conserved_quantities(&soliton(2.0, 0.0, grid(1024)));
    assert!((m - 4.0).abs() < 1e-10);
    assert!((p - 16.0 / 3.0).abs() < 1e-10);
    assert!((e - 6.4).abs() < 1e-8);
}

#[test]
fn solver_config_validation() {
    let g = grid(256);
    let bad = |f: fn(&mut SolverConfig<f64>)| {
        let mut cfg = SolverConfig::default();
        f(&mut cfg);
        Solver::new(g, cfg).is_err()
    };
    assert!(bad(|c| c.dt = 0.0));
    assert!(bad(|c| c.cfl = -1.0));
    assert!(bad(|c| c.dealias_fraction = 1.5));
    assert!(bad(|c| c.sample_interval = f64::NAN));
    let cfg = SolverConfig::<f64> { dt: 1.0, ..SolverConfig::default() };
    assert_eq!(cfg.effective_dt(&g, 0.0), cfg.cfl * g.dx());
    assert!((cfg.effective_dt(&g, 10.0) - cfg.cfl * g.dx() / 60.0).abs() < 1e-15);
}

#[test]
fn zero_data_stays_zero() {
    let g = grid(256);
    let snaps = solver(g).evolve(&WaveField::zeros(g), 2.0).unwrap();
    assert!(snaps.iter().all(|s| s.max_abs() == 0.0));
}

#[test]
fn sampling_schedule() {
    let g = grid(256);
    let snaps = solver(g).evolve(&soliton(1.0, 0.0, g), 1.2).unwrap();
    let times: Vec<f64> = snaps.iter().map(|s| s.t).collect();
    assert_eq!(times, [0.0, 0.5, 1.0, 1.2]);
    let s = solver(g);
    assert!(s.evolve(&soliton(1.0, 0.0, grid(512)), 1.0).is_err());
    let mut late = soliton(1.0, 0.0, g);
    late.t = 3.0;
    assert!(s.evolve(&late, 1.0).is_err());
}

#[test]
fn free_soliton_travels_at_2a() {
    let g = grid(1024);
    let s = solver(g);
    let start = soliton(2.0, -10.0, g);
    let snaps = s.evolve(&start, 4.0).unwrap();
    let end = snaps.last().unwrap();
    let exact = soliton(2.0, 6.0, g);
    assert!(max_diff(&end.u, &exact.u) < 1e-4, "{}", max_diff(&end.u, &exact.u));
    let (m0, p0, e0) = conserved_quantities(&start);
    let (m1, p1, e1) = conserved_quantities(end);
    assert!((m1 - m0).abs() < 1e-10);
    assert!(((p1 - p0) / p0).abs() < 1e-6);
    assert!(((e1 - e0) / e0).abs() < 1e-6);
    wrap_guard(&g, &WellSpec::with_origin(-0.01, 1.0, 20.0).unwrap(), 2.0, -10.0, 4.0, 0.5).unwrap();
}

#[test]
fn time_reversal() {
    // u(-x, -t) solves the same equation, so evolving the mirror image
    // forward undoes the original run.
    let g = grid(512);
    let s = solver(g);
    let start = soliton(1.0, -5.0, g);
    let mut bump = start.clone();
    for (u, x) in bump.u.iter_mut().zip(g.xs()) {
        *u += 0.3 * (-(x - 8.0) * (x - 8.0) / 4.0).exp();
    }
    let fwd = s.evolve(&bump, 1.5).unwrap().pop().unwrap();
    let mut mirror = fwd.reflected();
    mirror.t = 0.0;
    let back = s.evolve(&mirror, 1.5).unwrap().pop().unwrap().reflected();
    assert!(max_diff(&back.u, &bump.u) < 1e-6, "{}", max_diff(&back.u, &bump.u));
}

#[test]
fn wrap_guard_limits() {
    let g = grid(1024);
    let well = WellSpec::new(-1.0, 10.0).unwrap();
    assert!(wrap_guard(&g, &well, 0.0, 0.0, 1.0, 0.5).is_ok());
    // The shock's harmonic edge moves left at 12 |u0|.
    assert!(wrap_guard(&g, &well, 0.0, 0.0, 3.5, 0.5).is_err());
    assert!(wrap_guard(&g, &well, 4.0, 0.0, 3.0, 0.5).is_err());
}

#[test]
fn blow_up_is_reported() {
    let g = grid(256);
    let cfg = SolverConfig { cfl: 40.0, dt: 1.0, sample_interval: 0.5, ..SolverConfig::default() };
    let s = Solver::new(g, cfg).unwrap();
    match s.evolve(&soliton(6.0, 0.0, g), 20.0) {
        Err(Error::BlowUp { t, .. }) => assert!(t > 0.0),
        other => panic!("expected blow-up, got {other:?}"),
    }
}

#[test]
fn csv_snapshot() {
    let g = grid(256);
    let csv = soliton(1.0, 0.0, g).to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# t=0"));
    assert_eq!(lines.next(), Some("x,u"));
    assert_eq!(lines.count(), 256);
    assert!(csv.contains("\n-40,"));
}

proptest! {
    #[test]
    fn reflection_is_an_involution(a in 0.1..5.0_f64, x0 in -20.0..20.0_f64) {
        let f = soliton(a, x0, grid(256));
        prop_assert_eq!(f.reflected().reflected(), f);
    }

    #[test]
    fn invariants_are_translation_invariant(a in 0.5..4.0_f64, shift in 1usize..200) {
        let g = grid(512);
        let f = soliton(a, 0.0, g);
        let mut rolled = f.clone();
        rolled.u.rotate_right(shift);
        let (m0, p0, e0) = conserved_quantities(&f);
        let (m1, p1, e1) = conserved_quantities(&rolled);
        prop_assert!((m0 - m1).abs() < 1e-10 && (p0 - p1).abs() < 1e-10 && (e0 - e1).abs() < 1e-8);
    }

    #[test]
    fn soliton_profile_is_even_with_peak_a(a in 0.01..20.0_f64, x0 in -10.0..10.0_f64, d in 0.0..30.0_f64) {
        let l = soliton_profile(a, x0, x0 - d);
        let r = soliton_profile(a, x0, x0 + d);
        prop_assert!((l - r).abs() <= 1e-14 * a);
        prop_assert!(r <= a && r >= 0.0);
    }
}
