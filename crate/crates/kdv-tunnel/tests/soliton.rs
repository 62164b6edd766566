use approx::assert_relative_eq;
use kdv_tunnel::meanfield::*;
use kdv_tunnel::soliton::*;
use kdv_tunnel::{Error, Result};
use proptest::prelude::*;

fn well(u0: f64, l: f64) -> WellSpec<f64> {
    WellSpec::new(u0, l).unwrap()
}

/// A single static step from `left` to `right` at `x = 0`.
struct Step {
    left: f64,
    right: f64,
}

impl MeanField<f64> for Step {
    fn mean(&self, x: f64, _t: f64) -> Result<f64> {
        Ok(if x < 0.0 { self.left } else { self.right })
    }

    fn region(&self, x: f64, _t: f64) -> Result<Region> {
        Ok(if x < 0.0 { Region::Left } else { Region::Right })
    }
}

#[test]
fn invariants_and_speeds() {
    assert_eq!(q_invariant(2.0, 0.0).unwrap(), 4.0);
    assert_eq!(soliton_speed(2.0, 0.0), 4.0);
    assert_eq!(q_invariant(8.0, -1.0).unwrap(), 12.0);
    assert!((soliton_speed(1e-12_f64, -0.7) - 6.0 * -0.7).abs() < 1e-11);
    assert!(matches!(q_invariant(0.0, 0.0), Err(Error::NonPositiveAmplitude(_))));
    let s = SolitonState::new(-1.0, 3.0, 50.0, 0.4).unwrap();
    assert_eq!(s.q(), 2.0);
    assert_eq!(s.speed(), 0.0);
    assert_relative_eq!(s.ktilde() * s.ktilde(), 6.0, max_relative = 1e-15);
    assert!(SolitonState::new(0.0, -1.0, 0.0, 1.0).is_err());
}

#[test]
fn p_factor_domain() {
    assert_relative_eq!(p_factor(-4.0, 0.0).unwrap(), 0.5, max_relative = 1e-15);
    assert!(matches!(p_factor(4.0, 1.0), Err(Error::InadmissibleBackground { .. })));
    assert!(matches!(p_factor(4.0, 0.0), Err(Error::InadmissibleBackground { .. })));
}

#[test]
fn transmission_across_steps() {
    assert_eq!(transmit(8.0, 0.0, -1.0).unwrap(), 10.0);
    assert_eq!(transmit(3.0, -1.0, 0.0).unwrap(), 1.0);
    assert!(matches!(transmit(2.0, -1.0, 0.0), Err(Error::NonTransmissible { .. })));
    assert!(transmit(-1.0, 0.0, 0.0).is_err());
}

#[test]
fn phase_shift_identity_and_well_crossing() {
    let (k, dx) = phase_shift(0.7, 4.0, 0.0, 0.0, -100.0).unwrap();
    assert_eq!((k, dx), (0.7, 0.0));
    // Well-to-right for a_M = 3: q = 2, radicands -6 and -2.
    let (k_out, dx) = phase_shift(1.0, 2.0, -1.0, 0.0, 10.0).unwrap();
    assert_relative_eq!(k_out, (1.0_f64 / 3.0).sqrt(), max_relative = 1e-14);
    assert_relative_eq!(dx, 10.0 * (3.0_f64.sqrt() - 1.0), max_relative = 1e-14);
    assert!(phase_shift(1.0, 2.0, 1.0, -1.0, 0.0).is_err());
}

#[test]
fn classification_table() {
    let w = well(-1.0, 100.0);
    let eps = critical_amplitude_dsw(50.0, &w);
    assert_eq!(eps, 1.0);
    let kinds: Vec<_> = [0.1, 1.0, 2.0, 3.0].iter().map(|&a| classify(a, 50.0, &w, eps).unwrap()).collect();
    assert_eq!(kinds, [OutcomeKind::EmbedDSW, OutcomeKind::EmbedLW, OutcomeKind::EmbedRW, OutcomeKind::Tunnel]);
    assert_eq!(classify(0.3, -10.0, &w, eps).unwrap(), OutcomeKind::Tunnel);
    assert_eq!(classify(0.3, 150.0, &w, eps).unwrap(), OutcomeKind::NoInteraction);
    assert_eq!(classify(0.5, 50.0, &w, 0.1).unwrap(), OutcomeKind::EmbedLW);
    assert!(classify(0.0, 50.0, &w, eps).is_err());
}

#[test]
fn critical_amplitudes() {
    let w = well(-1.0, 30.0);
    assert_eq!(critical_amplitude_lw(-15.0, &w).unwrap(), 0.0);
    assert_relative_eq!(critical_amplitude_lw(-100.0, &w).unwrap(), 17.0 / 3.0, max_relative = 1e-15);
    assert_relative_eq!(critical_amplitude_lw(-100.0, &well(-2.0, 30.0)).unwrap(), 34.0 / 3.0, max_relative = 1e-15);
    assert!(critical_amplitude_lw(5.0, &w).is_err());
    assert_eq!(critical_amplitude_dsw(0.0, &w), 2.0);
    assert_eq!(critical_amplitude_dsw(30.0, &w), 0.0);
}

/// Junction oracle for the left plan: each crossing is where the previous
/// straight path meets the bounding edge of the next region.
#[test]
fn left_plan_crossings_meet_the_region_edges() {
    let (a, x0) = (8.0, -100.0);
    let w = well(-1.0, 30.0);
    let plan = trajectory_left(a, x0, &w).unwrap();
    let [t1, t2, t3, t4] = plan.crossings[..] else { panic!("four crossings") };
    assert_relative_eq!(t1, 100.0 / 28.0, max_relative = 1e-14);
    assert_relative_eq!(t2, 50.0 / 9.0, max_relative = 1e-14);
    // Shock harmonic edge, shock soliton edge, fan tail, right edge.
    assert_relative_eq!(plan.position(t1).unwrap(), -12.0 * t1, max_relative = 1e-12);
    assert_relative_eq!(plan.position(t2).unwrap(), -2.0 * t2, max_relative = 1e-12);
    assert_relative_eq!(plan.position(t3).unwrap(), 30.0 - 6.0 * t3, max_relative = 1e-12);
    assert_relative_eq!(plan.position(t4).unwrap(), 30.0, max_relative = 1e-12);
    assert_relative_eq!(t4, t3 * (10.0_f64 / 8.0).powf(1.5), max_relative = 1e-14);
    assert_eq!(plan.a_final, Some(8.0));
    assert_eq!(plan.amplitude(t2 + 0.1).unwrap(), Some(10.0));
    assert_relative_eq!(plan.amplitude(t4 + 1.0).unwrap().unwrap(), 8.0, max_relative = 1e-14);
    assert!(plan.is_approximate(0.5 * (t1 + t2)));
    assert!(!plan.is_approximate(t4 + 1.0));
    assert_eq!(plan.region(t4 + 1.0), Some(Region::Right));
    assert_relative_eq!(plan.position(30.0).unwrap(), 30.0 + 16.0 * (30.0 - t4), max_relative = 1e-12);
}

#[test]
fn left_plan_rejects_linear_wave_crossings() {
    // a_L = 5 < 17/3 leaves the shock only after the plateau has closed.
    assert!(matches!(trajectory_left(5.0, -100.0, &well(-1.0, 30.0)), Err(Error::InconsistentPlan(_))));
    assert!(trajectory_left(8.0, 10.0, &well(-1.0, 30.0)).is_err());
}

#[test]
fn well_plan_tunnel() {
    let w = well(-1.0, 100.0);
    let plan = trajectory_well(3.0, 50.0, &w, 1.0).unwrap();
    assert_eq!(plan.outcome, OutcomeKind::Tunnel);
    let t_fan = plan.crossings[0];
    assert_relative_eq!(t_fan, 50.0 / 6.0, max_relative = 1e-14);
    // Speed on the floor is 6 u0 + 2 a = 0.
    assert_eq!(plan.position(4.0).unwrap(), 50.0);
    let t_exit = plan.crossings[1];
    assert_relative_eq!(plan.position(t_exit).unwrap(), 100.0, max_relative = 1e-12);
    assert_eq!(plan.a_final, Some(1.0));
    assert_relative_eq!(plan.amplitude(t_exit).unwrap().unwrap(), 1.0, max_relative = 1e-9);
    assert_relative_eq!(plan.position(t_exit + 5.0).unwrap(), 110.0, max_relative = 1e-12);
}

#[test]
fn well_plan_embedded_cases() {
    let w = well(-1.0, 100.0);
    let rw = trajectory_well(2.0, 50.0, &w, 1.0).unwrap();
    assert_eq!(rw.outcome, OutcomeKind::EmbedRW);
    assert_eq!(rw.a_final, None);
    // Inside the fan the speed tends to 2 u0 relative to the fan's own scaling:
    // x = l - 6 t_arr^(2/3) t^(1/3), so dx/dt -> 0 while the fan edge moves at 6 u0.
    let t = 1e6;
    let v = (rw.position(t * 1.001).unwrap() - rw.position(t).unwrap()) / (t * 0.001);
    assert!(v.abs() < 1e-2);

    let lw = trajectory_well(1.0, 50.0, &w, 1.0).unwrap();
    assert_eq!(lw.outcome, OutcomeKind::EmbedLW);
    assert_eq!(lw.segments.last().unwrap().region, Region::Linear);
    let dsw = trajectory_well(0.1, 50.0, &w, 1.0).unwrap();
    assert_eq!(dsw.outcome, OutcomeKind::EmbedDSW);
    assert!(dsw.segments[1..].iter().all(|s| s.approximate));
    // eps contradicting the geometry is reported.
    assert!(matches!(trajectory_well(0.5, 50.0, &w, 0.1), Err(Error::InconsistentPlan(_))));
}

#[test]
fn plans_are_continuous_at_junctions() {
    let cases: Vec<TrajectoryPlan<f64>> = vec![
        trajectory_left(8.0, -100.0, &well(-1.0, 30.0)).unwrap(),
        trajectory_left(12.0, -40.0, &well(-2.0, 25.0)).unwrap(),
        trajectory_well(3.0, 50.0, &well(-1.0, 100.0), 1.0).unwrap(),
        trajectory_well(2.0, 50.0, &well(-1.0, 100.0), 1.0).unwrap(),
        trajectory_well(1.0, 50.0, &well(-1.0, 100.0), 1.0).unwrap(),
        trajectory_well(0.1, 50.0, &well(-1.0, 100.0), 1.0).unwrap(),
    ];
    for plan in cases {
        for pair in plan.segments.windows(2) {
            assert_eq!(pair[0].t_end, pair[1].t_start);
            assert!(pair[0].t_start <= pair[0].t_end);
            let t = pair[0].t_end;
            let before = eval(&plan, &pair[0], t);
            let after = eval(&plan, &pair[1], t);
            assert!((before - after).abs() <= 1e-9 * (1.0 + before.abs()), "{:?} at {t}: {before} vs {after}", plan.outcome);
        }
    }
}

fn eval(plan: &TrajectoryPlan<f64>, s: &Segment<f64>, t: f64) -> f64 {
    let single = TrajectoryPlan { segments: vec![Segment { t_start: f64::NEG_INFINITY, t_end: f64::INFINITY, ..*s }], ..plan.clone() };
    single.position(t).unwrap()
}

#[test]
fn ode_free_flight_is_exact() {
    let path = trajectory_ode(2.0_f64, -5.0, &ConstantMeanField { level: 0.0 }, 10.0, 0.01).unwrap();
    for s in &path.samples {
        assert!((s.x - (-5.0 + 4.0 * s.t)).abs() < 1e-10);
        assert_eq!(s.a, 2.0);
    }
    assert!(path.event.is_none());
    assert!(trajectory_ode(2.0, 0.0, &ConstantMeanField { level: 0.0 }, 1.0, 0.0).is_err());
}

#[test]
fn ode_step_crossings_match_transmit() {
    // Up a step: 8 on 0 into -1 becomes 10.
    let path = trajectory_ode(8.0, -5.0, &Step { left: 0.0, right: -1.0 }, 2.0, 1e-3).unwrap();
    let end = path.samples.last().unwrap();
    assert!((end.a - transmit(8.0, 0.0, -1.0).unwrap()).abs() < 1e-6);
    // Out of the well: 3 on -1 becomes 1.
    let path = trajectory_ode(3.0, -5.0, &Step { left: -1.0, right: 0.0 }, 20.0, 1e-3);
    let path = path.unwrap();
    assert!(path.event.is_none());
    // Speed on -1 is 0, so the soliton never reaches the step; start it moving instead.
    let moving = trajectory_ode(3.5, -5.0, &Step { left: -1.0, right: 0.0 }, 20.0, 1e-3).unwrap();
    assert!((moving.samples.last().unwrap().a - transmit(3.5_f64, -1.0, 0.0).unwrap()).abs() < 1e-6);
    assert_eq!(path.samples.last().unwrap().x, -5.0);
    // A static step cannot embed a soliton: one too small to climb it moves away.
    let small = trajectory_ode(2.5, -5.0, &Step { left: -1.0, right: 0.5 }, 40.0, 1e-3).unwrap();
    assert!(small.event.is_none());
    assert!(small.samples.last().unwrap().x < -5.0);
}

#[test]
fn ode_follows_the_fan_law() {
    let w = well(-1.0, 100.0);
    let plan = trajectory_well(3.0, 50.0, &w, 1.0).unwrap();
    let path = trajectory_ode(3.0, 50.0, &PiecewiseMeanField { well: w }, 40.0, 1e-3).unwrap();
    let arrival = plan.crossings[0];
    for s in path.samples.iter().filter(|s| s.t > arrival + 1.0).step_by(2000) {
        let want = plan.position(s.t).unwrap();
        assert!((s.x - want).abs() <= 1e-3 * want.abs(), "t = {}: ode {} vs law {}", s.t, s.x, want);
    }
}

#[test]
fn ode_outcomes_agree_with_classification() {
    let w = well(-1.0, 100.0);
    let eps = critical_amplitude_dsw(50.0, &w);
    for a in [1.0, 1.5, 2.5, 3.0] {
        let path = trajectory_ode(a, 50.0, &WhithamMeanField { well: w }, 200.0, 1e-2).unwrap();
        assert_eq!(path.outcome(), classify(a, 50.0, &w, eps).unwrap(), "a = {a}");
    }
    let far = trajectory_ode(1.0, 150.0, &WhithamMeanField { well: w }, 20.0, 1e-2).unwrap();
    assert_eq!(far.outcome(), OutcomeKind::NoInteraction);
}

proptest! {
    #[test]
    fn q_is_conserved_along_ode_paths(a in 0.2..6.0_f64, x0 in 5.0..95.0_f64) {
        let path = trajectory_ode(a, x0, &WhithamMeanField { well: well(-1.0, 100.0) }, 30.0, 1e-2).unwrap();
        let t_span = path.samples.last().unwrap().t.max(1.0);
        for s in &path.samples {
            let q = 4.0 * s.ubar + 2.0 * s.a;
            prop_assert!((q - path.q).abs() <= 1e-8 * t_span * path.q.abs().max(1.0));
        }
    }

    #[test]
    fn phase_identity_for_equal_backgrounds(k in 0.01..5.0_f64, q in -10.0..10.0_f64, u in -3.0..3.0_f64, x in -200.0..200.0_f64) {
        prop_assume!((4.0 * u - q).abs() > 1e-6);
        let (k_out, dx) = phase_shift(k, q, u, u, x).unwrap();
        prop_assert!((k_out - k).abs() <= 1e-15 * k);
        prop_assert!(dx.abs() <= 1e-12 * (1.0 + x.abs()));
    }

    #[test]
    fn transmit_round_trips(a in 0.1..10.0_f64, u_in in -3.0..0.0_f64, u_out in -3.0..0.0_f64) {
        prop_assume!(a + 2.0 * (u_in - u_out) > 1e-3);
        let b = transmit(a, u_in, u_out).unwrap();
        prop_assert!((q_invariant(b, u_out).unwrap() - q_invariant(a, u_in).unwrap()).abs() < 1e-12);
        prop_assert!((transmit(b, u_out, u_in).unwrap() - a).abs() < 1e-12);
    }

    #[test]
    fn speed_shift_is_galilean(a in 0.1..10.0_f64, u in -3.0..3.0_f64, c in -2.0..2.0_f64) {
        // Same amplitude on a background raised by c moves 6c faster.
        prop_assert!((soliton_speed(a, u + c) - soliton_speed(a, u) - 6.0 * c).abs() < 1e-12);
    }

    #[test]
    fn left_plans_are_monotone_in_time(a in 6.0..15.0_f64, x0 in -200.0..-20.0_f64) {
        let w = well(-1.0, 30.0);
        let plan = trajectory_left(a, x0, &w);
        prop_assume!(plan.is_ok());
        let plan = plan.unwrap();
        prop_assert!(plan.crossings.windows(2).all(|p| p[0] <= p[1]));
        let mut prev = plan.position(0.0).unwrap();
        for k in 1..200 {
            let x = plan.position(0.25 * k as f64).unwrap();
            prop_assert!(x >= prev - 1e-9);
            prev = x;
        }
    }
}
