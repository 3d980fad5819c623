mod common;

use common::*;
use nalgebra::{DMatrix, DVector, SMatrix};
use proptest::prelude::*;
use quantized_backreach::backreach::backreach_step;
use quantized_backreach::dynamics::*;
use quantized_backreach::nnet::parse_nnet;
use quantized_backreach::partition::{partition_region, NMAC_RADIUS};
use quantized_backreach::quant::*;
use quantized_backreach::sim::{simulate, EncounterSpec, SimOptions};
use quantized_backreach::synthetic::{bearing_policy, random_network};
use rand::Rng;
use std::f64::consts::PI;

fn adv() -> impl Strategy<Value = Advisory> {
    prop::sample::select(Advisory::ALL.to_vec())
}

fn state() -> impl Strategy<Value = PlantState> {
    (
        prop::array::uniform4(-7e4..7e4f64),
        prop::array::uniform4(-1200.0..1200.0f64),
    )
        .prop_map(|(p, v)| PlantState::from_array([p[0], p[1], v[0], v[1], p[2], p[3], v[2], v[3]]))
}

fn axis_dirs(n: usize) -> Vec<DVector<f64>> {
    (0..n)
        .flat_map(|i| {
            let mut d = DVector::zeros(n);
            d[i] = 1.0;
            [d.clone(), -d]
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lp_matches_vertex_enumeration(seed in any::<u64>(), n in 2usize..5, m in 2usize..4, cuts in 0usize..6) {
        let mut r = rng(seed);
        let p = random_ah(&mut r, n, m, cuts);
        let w = DVector::from_fn(n, |_, _| r.random_range(-1.0..1.0));
        let lp = p.maximize(&w).unwrap().objective.unwrap();
        let ve = vertex_max(&p, &w).unwrap();
        prop_assert!(rel_close(lp, ve, 1e-7), "{lp} vs {ve}");
    }

    #[test]
    fn affine_map_commutes_with_points_and_support(seed in any::<u64>(), n in 2usize..5, k in 1usize..5) {
        let mut r = rng(seed);
        let p = random_ah(&mut r, n, 3, 2);
        let w = DMatrix::from_fn(k, n, |_, _| r.random_range(-2.0..2.0));
        let b = DVector::from_fn(k, |_, _| r.random_range(-5.0..5.0));
        let q = p.affine_map(&w, &b).unwrap();
        let alpha: Vec<f64> = (0..3).map(|_| r.random_range(-0.1..0.1)).collect();
        let direct = &w * p.point_at(&alpha) + &b;
        prop_assert!((q.point_at(&alpha) - direct).amax() < 1e-9);
        let d = DVector::from_fn(k, |_, _| r.random_range(-1.0..1.0));
        let lhs = q.maximize(&d).unwrap().objective.unwrap();
        let rhs = p.maximize(&(w.transpose() * &d)).unwrap().objective.unwrap() + d.dot(&b);
        prop_assert!(rel_close(lhs, rhs, 1e-7));
    }

    #[test]
    fn intersection_matches_vertex_oracle(seed in any::<u64>(), n in 2usize..4) {
        let mut r = rng(seed);
        let p = random_ah(&mut r, n, 3, 1);
        let g = DMatrix::from_fn(2, n, |_, _| r.random_range(-1.0..1.0));
        // Cuts through points near the center keep the result nonempty.
        let h = &g * p.center() + DVector::from_fn(2, |_, _| r.random_range(0.5..3.0));
        let q = p.intersect_halfspaces(&g, &h).unwrap();
        let w = DVector::from_fn(n, |_, _| r.random_range(-1.0..1.0));
        let lp = q.maximize(&w).unwrap().objective.unwrap();
        let ve = vertex_max(&q, &w).unwrap();
        prop_assert!(rel_close(lp, ve, 1e-7));
        prop_assert!(lp <= p.maximize(&w).unwrap().objective.unwrap() + 1e-7);
        let x = q.any_point().unwrap();
        prop_assert!(p.contains_point(&x).unwrap());
        prop_assert!(((&g * &x) - &h).max() <= 1e-6);
    }

    #[test]
    fn forward_back_round_trip(seed in any::<u64>(), a in adv()) {
        let mut r = rng(seed);
        let p = random_ah(&mut r, 8, 6, 3);
        let f = step_matrix(a, 1.0);
        let fwd = p.linear_transform(&DMatrix::from_fn(8, 8, |i, j| f[(i, j)])).unwrap();
        let back = backreach_step(&fwd, a);
        for d in axis_dirs(8) {
            let x = p.maximize(&d).unwrap().objective.unwrap();
            let y = back.maximize(&d).unwrap().objective.unwrap();
            prop_assert!(rel_close(x, y, 1e-7), "{x} vs {y}");
        }
    }

    #[test]
    fn step_preserves_speeds_and_composes(s in state(), a in adv(), t1 in 0.0..3.0f64, t2 in 0.0..3.0f64) {
        let once = propagate(&s, a, t1 + t2);
        let twice = propagate(&propagate(&s, a, t1), a, t2);
        for (x, y) in once.to_array().iter().zip(twice.to_array()) {
            prop_assert!((x - y).abs() < 1e-7 * (1.0 + x.abs()));
        }
        prop_assert!((once.own_speed() - s.own_speed()).abs() < 1e-9 * (1.0 + s.own_speed()));
        prop_assert!((once.int_speed() - s.int_speed()).abs() < 1e-9 * (1.0 + s.int_speed()));
        let m = step_matrix(a, 1.0) * back_step_matrix(a);
        prop_assert!((m - SMatrix::<f64, 8, 8>::identity()).amax() < 1e-12);
    }

    #[test]
    fn closed_form_matches_expm(a in adv(), t in 0.0..2.0f64) {
        let diff = (step_matrix(a, t) - expm(&rate(a), t)).amax();
        prop_assert!(diff < 1e-9);
    }

    #[test]
    fn wrap_ranges(x in -1e4..1e4f64) {
        let w = wrap_pi(x);
        prop_assert!(w > -PI - 1e-12 && w <= PI + 1e-12);
        prop_assert!(((x - w) / (2.0 * PI)).fract().abs() < 1e-6 || ((x - w) / (2.0 * PI)).fract().abs() > 1.0 - 1e-6);
        let z = wrap_two_pi(x);
        prop_assert!((0.0..2.0 * PI).contains(&z));
    }

    #[test]
    fn network_inputs_are_rotation_invariant(s in state(), phi in -PI..PI) {
        let rotated = {
            let (sn, cs) = phi.sin_cos();
            let a = s.to_array();
            let rot = |x: f64, y: f64| (cs * x - sn * y, sn * x + cs * y);
            let mut b = [0.0; 8];
            for k in [0, 2, 4, 6] {
                let (x, y) = rot(a[k], a[k + 1]);
                b[k] = x;
                b[k + 1] = y;
            }
            PlantState::from_array(b)
        };
        if s.own_speed() > 1.0 && s.rho() > 1.0 {
            let i = state_to_network_inputs(&s).unwrap();
            let j = state_to_network_inputs(&rotated).unwrap();
            prop_assert!((i.rho - j.rho).abs() < 1e-6);
            prop_assert!(wrap_pi(i.theta - j.theta).abs() < 1e-9);
            prop_assert!(wrap_pi(i.psi - j.psi).abs() < 1e-9);
        }
    }

    #[test]
    fn state_lies_in_its_cell(s in state(), q_pos in 50.0..1000.0f64, sectors in 4u32..720) {
        let p = QuantParams::new(q_pos, 100.0, 360.0 / sectors as f64, (1.0, 1700.0), (0.0, 1700.0)).unwrap();
        if s.own_speed() < 1.0 {
            return Ok(());
        }
        let q = quantize_state(&s, &p);
        let c = canonicalize(&s);
        let cell = cell_polytope(&q, &p);
        prop_assert!(cell.contains_point(&DVector::from_column_slice(&c.to_array())).unwrap());
        let d = dequantize_to_inputs(&q, &p);
        let exact = state_to_network_inputs(&c).unwrap();
        prop_assert!(rho_min(&q, &p) <= exact.rho + 1e-6);
        prop_assert!((d.rho - exact.rho).abs() <= q_pos * std::f64::consts::SQRT_2 / 2.0 + 1e-6);
    }

    #[test]
    fn candidates_cover_a_box_around_a_state(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = QuantParams::new(500.0, 100.0, 10.0, (100.0, 300.0), (500.0, 700.0)).unwrap();
        let heading: f64 = r.random_range(-PI..PI);
        let v: f64 = r.random_range(110.0..290.0);
        let mut a = [0.0; 8];
        a[0] = r.random_range(-3000.0..3000.0);
        a[1] = r.random_range(-3000.0..3000.0);
        a[2] = v * heading.cos();
        a[3] = v * heading.sin();
        a[6] = r.random_range(510.0..690.0);
        let s = PlantState::from_array(a);
        let mut lo = a;
        let mut hi = a;
        for (i, w) in [(0, 80.0), (1, 80.0), (2, 5.0), (3, 5.0), (4, 0.0), (5, 0.0), (6, 5.0), (7, 0.0)] {
            lo[i] -= w;
            hi[i] += w;
        }
        let set = quantized_backreach::geometry::AhPolytope::from_box(&lo, &hi).unwrap();
        let cands = possible_quantized_states(&set, &p).unwrap();
        prop_assert!(cands.contains(&quantize_state(&s, &p)));
        for q in &cands {
            let (g, h) = cell_halfspaces(q, &p);
            prop_assert!(set.intersect_halfspaces(&g, &h).unwrap().is_feasible().unwrap());
        }
    }

    #[test]
    fn collision_states_are_covered_by_a_partition(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = QuantParams::default();
        let rho = r.random_range(0.0..NMAC_RADIUS);
        let bearing: f64 = r.random_range(-PI..PI);
        let heading: f64 = r.random_range(-PI..PI);
        let vo = r.random_range(100.0..1200.0);
        let s = PlantState::from_array([
            rho * bearing.cos(), rho * bearing.sin(), vo * heading.cos(), vo * heading.sin(),
            0.0, 0.0, r.random_range(0.0..1200.0), 0.0,
        ]);
        let a = Advisory::ALL[r.random_range(0..5)];
        let key = partition_of(&s, a, 0, &p);
        let space = quantized_backreach::partition::enumerate_unsafe_partitions(&p, &[0]);
        prop_assert!(space.index_of(&key).is_some(), "{key}");
        let region = partition_region(&key, &p);
        prop_assert!(region.contains_point(&DVector::from_column_slice(&s.to_array())).unwrap());
    }

    #[test]
    fn nnet_text_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let net = random_network(&mut r, &[7, 4]);
        prop_assert_eq!(parse_nnet(&net.to_nnet_string()).unwrap(), net);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn trace_rows_follow_the_dynamics(rho in 5000.0..30_000.0f64, theta in -PI..PI, psi in -PI..PI,
                                      v_own in 100.0..1200.0f64, v_int in 0.0..1200.0f64) {
        let nets = bearing_policy(8000.0, 40f64.to_radians());
        let e = EncounterSpec { rho, theta, psi, v_own, v_int, tau0: 0.0, tau_dot: 0, max_steps: 80 };
        let t = simulate(&e, &nets, &SimOptions { rho_init: 20_000.0, ..SimOptions::default() }).unwrap();
        for w in t.rows.windows(2) {
            let next = propagate(&w[0].state, w[0].cmd, 1.0);
            for (x, y) in next.to_array().iter().zip(w[1].state.to_array()) {
                prop_assert!((x - y).abs() < 1e-9 * (1.0 + x.abs()));
            }
            prop_assert_eq!(w[1].alpha_prev, w[0].cmd);
            prop_assert!((w[1].state.rho() - w[1].rho).abs() < 1e-6);
        }
        if t.collided() {
            prop_assert!(t.rows.last().unwrap().rho < NMAC_RADIUS);
        }
    }
}
