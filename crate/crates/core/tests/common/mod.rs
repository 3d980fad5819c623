//! Independent oracles and scenario builders shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SMatrix};
use quantized_backreach::backreach::{verify_all, CheckConfig, Checker, Verdict, VerifyOptions};
use quantized_backreach::dynamics::{rate_matrix, Advisory, PlantState};
use quantized_backreach::exec::par_map;
use quantized_backreach::geometry::AhPolytope;
use quantized_backreach::nnet::NetworkSet;
use quantized_backreach::partition::{enumerate_unsafe_partitions, PartitionKey};
use quantized_backreach::quant::{canonicalize, quantize_state, rho_min, QuantParams};
use quantized_backreach::sim::{simulate, EncounterSpec, SimMode, SimOptions};
use quantized_backreach::synthetic::bearing_policy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::f64::consts::PI;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random bounded AH-polytope in `n` dimensions with `m` generators: a box
/// plus a few random cuts that keep the origin strictly inside.
pub fn random_ah(r: &mut ChaCha8Rng, n: usize, m: usize, cuts: usize) -> AhPolytope {
    let v = DMatrix::from_fn(n, m, |_, _| r.random_range(-3.0..3.0));
    let c = DVector::from_fn(n, |_, _| r.random_range(-10.0..10.0));
    let rows = 2 * m + cuts;
    let mut cm = DMatrix::zeros(rows, m);
    let mut d = DVector::zeros(rows);
    for i in 0..m {
        cm[(2 * i, i)] = 1.0;
        d[2 * i] = r.random_range(0.5..4.0);
        cm[(2 * i + 1, i)] = -1.0;
        d[2 * i + 1] = r.random_range(0.5..4.0);
    }
    for k in 0..cuts {
        for j in 0..m {
            cm[(2 * m + k, j)] = r.random_range(-1.0..1.0);
        }
        d[2 * m + k] = r.random_range(0.2..2.0);
    }
    AhPolytope::new(v, c, cm, d).unwrap()
}

fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let lu = a.clone().lu();
    if lu.determinant().abs() < 1e-10 {
        return None;
    }
    lu.solve(b)
}

/// Vertices of `{α : Cα ≤ d}` by brute force over every square subsystem.
pub fn vertices(cm: &DMatrix<f64>, d: &DVector<f64>) -> Vec<DVector<f64>> {
    let (k, m) = cm.shape();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        let a = DMatrix::from_fn(m, m, |r, c| cm[(idx[r], c)]);
        let b = DVector::from_fn(m, |r, _| d[idx[r]]);
        if let Some(x) = solve(&a, &b) {
            let ok = (0..k).all(|i| (cm.row(i) * &x)[0] <= d[i] + 1e-9 * (1.0 + d[i].abs()));
            if ok {
                out.push(x);
            }
        }
        // Next combination.
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < k - m + i {
                idx[i] += 1;
                for j in i + 1..m {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// max wᵀx over the AH-polytope through its generator-space vertices.
pub fn vertex_max(p: &AhPolytope, w: &DVector<f64>) -> Option<f64> {
    let vs = vertices(p.cons_mat(), p.cons_rhs());
    vs.iter()
        .map(|a| w.dot(&p.point_at(a.as_slice())))
        .fold(None, |m, v| Some(m.map_or(v, |m: f64| m.max(v))))
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub type M8 = SMatrix<f64, 8, 8>;

/// exp(A·t) by scaling and squaring with a Taylor core.
pub fn expm(a: &M8, t: f64) -> M8 {
    let x = a * t;
    let norm = x.abs().row_sum().max();
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let y = x / 2f64.powi(s);
    let mut term = M8::identity();
    let mut sum = M8::identity();
    for k in 1..=20 {
        term = term * y / k as f64;
        sum += term;
    }
    for _ in 0..s {
        sum = sum * sum;
    }
    sum
}

/// Classical RK4 for ẋ = A x.
pub fn rk4(a: &M8, x0: &SMatrix<f64, 8, 1>, t: f64, h: f64) -> SMatrix<f64, 8, 1> {
    let steps = (t / h).round() as usize;
    let mut x = *x0;
    for _ in 0..steps {
        let k1 = a * x;
        let k2 = a * (x + k1 * (h / 2.0));
        let k3 = a * (x + k2 * (h / 2.0));
        let k4 = a * (x + k3 * h);
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    x
}

pub fn rate(adv: Advisory) -> M8 {
    rate_matrix(adv)
}

pub fn random_state(r: &mut ChaCha8Rng) -> PlantState {
    let mut a = [0.0; 8];
    for (i, v) in a.iter_mut().enumerate() {
        *v = if matches!(i, 0 | 1 | 4 | 5) {
            r.random_range(-70_000.0..70_000.0)
        } else {
            r.random_range(-1200.0..1200.0)
        };
    }
    PlantState::from_array(a)
}

/// Scaled-down stand-in for the full closed loop: short range, narrow speed
/// bands, coarse heading sectors and a bearing-rule controller.
pub struct SoundnessScenario {
    pub params: QuantParams,
    pub nets: NetworkSet,
    pub rho_init: f64,
    pub samples: u64,
}

impl Default for SoundnessScenario {
    fn default() -> Self {
        SoundnessScenario {
            params: QuantParams::new(500.0, 100.0, 10.0, (100.0, 200.0), (600.0, 700.0)).unwrap(),
            nets: bearing_policy(1500.0, 40f64.to_radians()),
            rho_init: 2500.0,
            samples: 10_000,
        }
    }
}

pub struct SoundnessResult {
    pub partitions: usize,
    pub unsafe_partitions: usize,
    pub inconclusive: usize,
    pub initial_states: usize,
    pub collisions: usize,
    pub violations: Vec<String>,
    /// Everything except timing.
    pub primary: String,
}

/// Partition containing a collision state, with `prev` the command in effect.
pub fn partition_of(s: &PlantState, prev: Advisory, tau_dot: i8, p: &QuantParams) -> PartitionKey {
    let c = canonicalize(s);
    let q = quantize_state(s, p);
    PartitionKey {
        ix: ((c.x_own - c.x_int) / p.q_pos).floor() as i64,
        iy: ((c.y_own - c.y_int) / p.q_pos).floor() as i64,
        vown: q.v_own,
        vint: q.v_int,
        theta: q.theta_own,
        prev,
        tau_dot,
    }
}

/// Verifies every partition, then runs the quantized closed loop (no forced
/// COC) from seeded initial states and checks each collision against the
/// verdicts.
pub fn soundness_check(sc: &SoundnessScenario, jobs: usize) -> SoundnessResult {
    let space = enumerate_unsafe_partitions(&sc.params, &[0]);
    let checker = Checker::new(
        &sc.nets,
        sc.params,
        CheckConfig {
            rho_init: sc.rho_init,
            max_depth: 200,
        },
    );
    let report = verify_all(
        &space,
        None,
        &checker,
        &VerifyOptions {
            jobs,
            ..Default::default()
        },
    );
    let flagged: HashSet<PartitionKey> = report
        .findings
        .iter()
        .filter(|f| f.result.verdict == Verdict::Unsafe)
        .map(|f| f.key)
        .collect();
    let opts = SimOptions {
        mode: SimMode::Quantized(sc.params),
        rho_init: sc.rho_init,
        force_coc_outside: false,
        divergence_steps: 10,
    };
    let (vo, vi) = (sc.params.vown, sc.params.vint);
    let runs = par_map(sc.samples as usize, jobs, |i| {
        let mut r = rng(0x5eed_0000 + i as u64);
        let e = EncounterSpec {
            rho: r.random_range(sc.rho_init + 500.0..sc.rho_init + 4000.0),
            theta: r.random_range(-PI..PI),
            psi: r.random_range(-PI..PI),
            v_own: r.random_range(vo.lo..vo.hi),
            v_int: r.random_range(vi.lo..vi.hi),
            tau0: 0.0,
            tau_dot: 0,
            max_steps: 100,
        };
        let s = quantized_backreach::sim::spec_to_state(&e);
        if rho_min(&quantize_state(&s, &sc.params), &sc.params) <= sc.rho_init {
            return None;
        }
        let t = simulate(&e, &sc.nets, &opts).expect("stub networks cover every slot");
        if !t.collided() {
            return Some(None);
        }
        let last = t.rows.last().unwrap();
        Some(Some((
            i,
            partition_of(&last.state, last.alpha_prev, 0, &sc.params),
            t.commands(),
        )))
    });
    let mut res = SoundnessResult {
        partitions: space.len(),
        unsafe_partitions: report.unsafe_count,
        inconclusive: report.inconclusive,
        initial_states: 0,
        collisions: 0,
        violations: Vec::new(),
        primary: report.primary_output(),
    };
    for run in runs.into_iter().flatten() {
        res.initial_states += 1;
        if let Some((i, key, cmds)) = run {
            res.collisions += 1;
            res.primary
                .push_str(&format!("collision sample={i} partition={key}\n"));
            if !flagged.contains(&key) {
                res.violations
                    .push(format!("sample {i}: {key} after {cmds:?}"));
            }
        }
    }
    res
}
