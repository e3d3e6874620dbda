use std::f64::consts::PI;

use goto_core::bench::{run_from, TrialConfig};
use goto_core::controllers::{Controller, ControllerId, ControllerPhase, Tuning};
use goto_core::policy::{PolicyMode, PolicyParams, PARAM_COUNT};
use goto_core::reward::{additive_reward, constellation_reward, constellation_reward_factored, RewardConfig};
use goto_core::se2::{constellation_distance, orientation_error, Constellation, DistanceBreakdown, Pose2};
use goto_core::sim::{Foot, FootstepAction, StepperConfig, StepperState};
use goto_core::trainer::{mirror_task, rollout_return, sample_task, RolloutConfig};
use proptest::collection::vec;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DETERMINISTIC: [ControllerId; 3] = [ControllerId::Fsm, ControllerId::Agility2, ControllerId::Agility3];

fn pose(span: f64) -> impl Strategy<Value = Pose2> {
    (-span..span, -span..span, -PI..PI).prop_map(|(x, y, t)| Pose2::new(x, y, t))
}

fn constellation() -> impl Strategy<Value = Constellation> {
    vec((-2.0..2.0f64, -2.0..2.0f64), 2..=64)
        .prop_filter_map("degenerate", |pts| {
            let pts: Vec<[f64; 2]> = pts.into_iter().map(|(x, y)| [x, y]).collect();
            Constellation::new(&pts).ok()
        })
}

fn action() -> impl Strategy<Value = FootstepAction> {
    prop_oneof![
        1 => Just(FootstepAction::STAND),
        5 => (-0.8..0.8f64, -0.8..0.8f64, -1.2..1.2f64).prop_map(|(x, y, t)| FootstepAction::step(x, y, t)),
    ]
}

/// Pose whose constellation centroid lands at `at` with heading `theta`.
fn pose_with_centroid(c: &Constellation, at: [f64; 2], theta: f64) -> Pose2 {
    let r = Pose2::new(0.0, 0.0, theta).transform_point(c.centroid());
    Pose2::new(at[0] - r[0], at[1] - r[1], theta)
}

fn close(a: &Pose2, b: &Pose2, tol: f64) -> bool {
    (a.x - b.x).abs() <= tol && (a.y - b.y).abs() <= tol && orientation_error(a.theta, b.theta) <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn distance_splits_into_position_and_rotation(a in pose(5.0), b in pose(5.0), c in constellation()) {
        let d = constellation_distance(&a, &b, &c);
        prop_assert!((d.total - (d.positional + d.rotational_exact)).abs() < 1e-9);
        let reference = d.positional + 2.0 * c.moment() * (1.0 - d.heading_error.cos());
        prop_assert!((d.total - reference).abs() < 1e-9);
    }

    #[test]
    fn distance_is_frame_invariant(a in pose(5.0), b in pose(5.0), g in pose(10.0), c in constellation()) {
        let d0 = constellation_distance(&a, &b, &c).total;
        let d1 = constellation_distance(&g.compose(&a), &g.compose(&b), &c).total;
        prop_assert!((d0 - d1).abs() < 1e-9);
    }

    #[test]
    fn rotation_term_is_periodic(a in pose(3.0), dt in -PI..PI, k in -3i32..=3, c in constellation()) {
        let b = Pose2::new(a.x, a.y, a.theta + dt);
        let b_k = Pose2::new(a.x, a.y, a.theta + dt + 2.0 * PI * k as f64);
        let r = constellation_distance(&a, &b, &c).rotational_exact;
        let r_k = constellation_distance(&a, &b_k, &c).rotational_exact;
        prop_assert!((r - r_k).abs() < 1e-9);
        prop_assert_eq!(constellation_distance(&a, &a, &c).rotational_exact, 0.0);
    }

    #[test]
    fn distance_grows_with_centroid_offset(
        c in constellation(),
        theta in -PI..PI,
        dt in -PI..PI,
        dir in -PI..PI,
        r1 in 0.0..3.0f64,
        extra in 0.01..3.0f64,
    ) {
        let a = pose_with_centroid(&c, [0.0, 0.0], theta);
        let (s, co) = dir.sin_cos();
        let near = pose_with_centroid(&c, [r1 * co, r1 * s], theta + dt);
        let r2 = r1 + extra;
        let far = pose_with_centroid(&c, [r2 * co, r2 * s], theta + dt);
        prop_assert!(constellation_distance(&a, &near, &c).total < constellation_distance(&a, &far, &c).total);
    }

    #[test]
    fn distance_grows_with_heading_error(
        c in constellation(),
        theta in -PI..PI,
        at in (-2.0..2.0f64, -2.0..2.0f64),
        t1 in 0.0..3.0f64,
        extra in 0.01..0.14f64,
        sign in prop::bool::ANY,
    ) {
        let s = if sign { 1.0 } else { -1.0 };
        let t2 = (t1 + extra).min(PI);
        let a = pose_with_centroid(&c, [0.0, 0.0], theta);
        let b1 = pose_with_centroid(&c, [at.0, at.1], theta + s * t1);
        let b2 = pose_with_centroid(&c, [at.0, at.1], theta + s * t2);
        prop_assert!(constellation_distance(&a, &b1, &c).total < constellation_distance(&a, &b2, &c).total);
    }

    #[test]
    fn circle_moment_is_radius_squared(r in 0.01..10.0f64, n in 2usize..=64) {
        let c = Constellation::circle(r, n).unwrap();
        prop_assert!((c.moment() - r * r).abs() < 1e-12);
    }

    #[test]
    fn reward_factorizes(a in pose(4.0), b in pose(4.0), c in constellation(), w in 0.0..2.0f64) {
        let cfg = RewardConfig { w_c: w, ..RewardConfig::default() };
        let d = constellation_distance(&a, &b, &c);
        prop_assert!((constellation_reward(&d, &cfg) - constellation_reward_factored(&d, &cfg)).abs() < 1e-12);
    }

    #[test]
    fn reward_in_unit_interval_and_decreasing(t1 in 0.0..100.0f64, extra in 1e-6..50.0f64) {
        let cfg = RewardConfig::default();
        let d = |t: f64| DistanceBreakdown { total: t, ..DistanceBreakdown::ZERO };
        let (r1, r2) = (constellation_reward(&d(t1), &cfg), constellation_reward(&d(t1 + extra), &cfg));
        prop_assert!(r1 > 0.0 && r1 <= 1.0);
        prop_assert!(r2 < r1);
    }

    #[test]
    fn reward_orders_states_like_distance(goal in pose(3.0), s1 in pose(3.0), s2 in pose(3.0)) {
        let cfg = RewardConfig::default();
        let c = Constellation::circle(1.0, 8).unwrap();
        let d1 = constellation_distance(&s1, &goal, &c);
        let d2 = constellation_distance(&s2, &goal, &c);
        let (r1, r2) = (constellation_reward(&d1, &cfg), constellation_reward(&d2, &cfg));
        if d1.total < d2.total {
            prop_assert!(r1 >= r2);
        } else if d2.total < d1.total {
            prop_assert!(r2 >= r1);
        }
    }

    #[test]
    fn stepper_is_deterministic(start in pose(2.0), actions in vec(action(), 0..40), seed in any::<u64>()) {
        let cfg = StepperConfig::default();
        let run = || {
            let mut s = StepperState::reset(&start, 0.02, &mut ChaCha8Rng::seed_from_u64(seed), &cfg);
            for a in &actions {
                s.step(a, &cfg).unwrap();
            }
            s
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn stepper_is_mirror_equivariant(start in pose(2.0), actions in vec(action(), 0..40), seed in any::<u64>()) {
        let cfg = StepperConfig::default();
        let mut s = StepperState::reset(&start, 0.02, &mut ChaCha8Rng::seed_from_u64(seed), &cfg);
        let mut m = s.mirrored();
        for a in &actions {
            s.step(a, &cfg).unwrap();
            m.step(&a.mirrored(), &cfg).unwrap();
            prop_assert!(close(&m.base(), &s.base().mirrored(), 1e-12));
        }
        prop_assert_eq!(m.step_log().len(), s.step_log().len());
        for (x, y) in m.step_log().iter().zip(s.step_log()) {
            prop_assert_eq!(x.foot, y.foot.other());
            prop_assert!(close(&x.pose, &y.pose.mirrored(), 1e-12));
            prop_assert!((x.energy - y.energy).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_and_footsteps_add_up(start in pose(2.0), actions in vec(action(), 0..60)) {
        let cfg = StepperConfig::default();
        let mut s = StepperState::nominal(&start, &cfg);
        for a in &actions {
            s.step(a, &cfg).unwrap();
        }
        let logged: f64 = s.step_log().iter().map(|r| r.energy).sum();
        prop_assert!((s.energy() - logged).abs() < 1e-9);
        prop_assert_eq!(s.footsteps(), actions.iter().filter(|a| !a.is_stand).count());
    }

    #[test]
    fn steps_stay_reachable(start in pose(2.0), actions in vec(action(), 1..60)) {
        let cfg = StepperConfig::default();
        let mut s = StepperState::nominal(&start, &cfg);
        for a in &actions {
            let stance = s.stance_foot();
            let side = s.swing().side();
            let out = s.step(a, &cfg).unwrap();
            if a.is_stand {
                continue;
            }
            let placed = s.step_log().last().unwrap().pose;
            let rel = stance.between(&placed);
            let (dx, dy) = (rel.x, rel.y - side * cfg.stance_width);
            prop_assert!(dx.hypot(dy) <= cfg.max_step_len + 1e-12);
            prop_assert!(rel.theta.abs() <= cfg.max_step_yaw + 1e-12);
            prop_assert!(out.applied.dx.hypot(out.applied.dy) <= cfg.max_step_len + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn baselines_are_mirror_equivariant(
        goal in (-2.0..2.0f64, -1.5..1.5f64, -PI..PI),
        seed in any::<u64>(),
    ) {
        let cfg = TrialConfig::default();
        let goal = Pose2::new(goal.0, goal.1, goal.2);
        let initial = StepperState::reset(&Pose2::IDENTITY, 0.02, &mut ChaCha8Rng::seed_from_u64(seed), &cfg.stepper);
        for id in DETERMINISTIC {
            let (a, _, ok_a) = run_from(&mut Controller::new(id, None).unwrap(), initial.clone(), &goal, &cfg).unwrap();
            let (b, _, ok_b) =
                run_from(&mut Controller::new(id, None).unwrap(), initial.mirrored(), &goal.mirrored(), &cfg).unwrap();
            prop_assert_eq!(ok_a, ok_b);
            prop_assert_eq!(a.step_log().len(), b.step_log().len());
            for (x, y) in a.step_log().iter().zip(b.step_log()) {
                prop_assert_eq!(x.foot.other(), y.foot);
                prop_assert!(close(&x.pose.mirrored(), &y.pose, 1e-12), "{:?}: {:?} vs {:?}", id, x, y);
            }
        }
    }

    #[test]
    fn baselines_settle_and_phases_advance(
        goal in (-2.0..2.0f64, -1.5..1.5f64, -PI..PI),
        seed in any::<u64>(),
    ) {
        let cfg = TrialConfig::default();
        let tune = Tuning::default();
        let goal = Pose2::new(goal.0, goal.1, goal.2);
        for id in DETERMINISTIC {
            let mut state =
                StepperState::reset(&Pose2::IDENTITY, 0.02, &mut ChaCha8Rng::seed_from_u64(seed), &cfg.stepper);
            let mut ctl = Controller::new(id, None).unwrap();
            let mut rank = ControllerPhase::rank(id, ctl.phase().unwrap().id);
            let mut settled = false;
            for k in 0..200 {
                if state.is_settled(&goal, tune.pos_tol, tune.ang_tol, &cfg.stepper) {
                    settled = true;
                    break;
                }
                let a = ctl.act(&state, &goal, k, &cfg.stepper, &tune).unwrap();
                state.step(&a, &cfg.stepper).unwrap();
                let next = ControllerPhase::rank(id, ctl.phase().unwrap().id);
                prop_assert!(next >= rank, "{:?} phase went back", id);
                rank = next;
            }
            settled |= state.is_settled(&goal, tune.pos_tol, tune.ang_tol, &cfg.stepper);
            prop_assert!(settled, "{:?} did not settle on {:?}", id, goal);
        }
    }

    #[test]
    fn backward_goal_favours_agility2(dist in 0.3..2.0f64, seed in any::<u64>()) {
        let cfg = TrialConfig::default();
        let goal = Pose2::new(-dist, 0.0, 0.0);
        let initial = StepperState::reset(&Pose2::IDENTITY, 0.0, &mut ChaCha8Rng::seed_from_u64(seed), &cfg.stepper);
        let steps = |id| {
            let (s, _, ok) = run_from(&mut Controller::new(id, None).unwrap(), initial.clone(), &goal, &cfg).unwrap();
            assert!(ok);
            s.footsteps()
        };
        prop_assert!(steps(ControllerId::Agility2) < steps(ControllerId::Agility3));
    }

    #[test]
    fn rollout_return_is_bounded_by_horizon(seed in any::<u64>(), scale in 0.0..2.0f64, mirror in prop::bool::ANY) {
        let cfg = RolloutConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut task = sample_task(&mut rng, cfg.horizon);
        if mirror {
            task = mirror_task(&task);
        }
        let params = PolicyParams(
            (0..PARAM_COUNT).map(|i| scale * (((i as u64).wrapping_mul(seed | 1) % 1000) as f64 / 500.0 - 1.0)).collect(),
        );
        for mode in [PolicyMode::Goto, PolicyMode::Hier] {
            let ret = rollout_return(&params, mode, &[task.clone()], &cfg).unwrap();
            prop_assert!(ret.is_finite() && ret <= cfg.horizon as f64);
        }
    }
}

#[test]
fn additive_reward_is_not_the_constellation_reward() {
    let c = Constellation::circle(1.0, 8).unwrap();
    let base = RewardConfig::default();
    let cfg = RewardConfig { a_p: 0.5, a_o: 0.5, w_p: base.w_c, w_o: base.w_c * c.moment(), ..base };
    let d = constellation_distance(&Pose2::IDENTITY, &Pose2::new(1.0, 0.5, 1.0), &c);
    let additive = additive_reward(d.positional, d.orientation_sq(), &cfg);
    let product = constellation_reward(&d, &cfg);
    assert!((additive - product).abs() > 1e-3, "{additive} vs {product}");
}

#[test]
fn swing_alternates_only_on_steps() {
    let cfg = StepperConfig::default();
    let mut s = StepperState::nominal(&Pose2::IDENTITY, &cfg);
    let first = s.swing();
    s.step(&FootstepAction::STAND, &cfg).unwrap();
    assert_eq!(s.swing(), first);
    s.step(&FootstepAction::step(0.1, 0.0, 0.0), &cfg).unwrap();
    assert_eq!(s.swing(), first.other());
    assert_eq!(Foot::Left.other(), Foot::Right);
}
