//! Exact backward search over the quantized closed loop, per unsafe partition,
//! and the refinement loop that turns quantized counterexamples into real ones.

use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{back_step_matrix, Advisory, PlantState, VY_INT, Y_INT};
use crate::exec::par_map;
use crate::geometry::{AhPolytope, GeometryError};
use crate::nnet::NetworkSet;
use crate::partition::{enumerate_unsafe_partitions, PartitionKey, PartitionSpace};
use crate::quant::{
    cell_halfspaces, dequantize_to_inputs, possible_quantized_states, rho_min, QuantParams, Quantum,
};
use crate::sim::{simulate_state, CounterexampleTrace, SimOptions, RHO_INIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Safe,
    Unsafe,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub verdict: Verdict,
    /// Unsafe initial states (set at the start of the path).
    pub witness_region: Option<AhPolytope>,
    /// Commands along the path, oldest first.
    pub command_sequence: Vec<Advisory>,
    /// Advisory in effect before the first command.
    pub initial_prev: Option<Advisory>,
    pub tau_init: f64,
    /// Path length in steps.
    pub depth: usize,
    /// Search nodes expanded.
    pub nodes: u64,
    pub reason: Option<String>,
}

/// JSON-lines record for unsafe and inconclusive partitions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultSummary {
    pub index: usize,
    pub partition: String,
    pub verdict: Verdict,
    pub commands: Vec<Advisory>,
    pub initial_prev: Option<Advisory>,
    pub tau_init: f64,
    pub depth: usize,
    pub nodes: u64,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct CheckConfig {
    /// Cells whose smallest range exceeds this are valid starting states, ft.
    pub rho_init: f64,
    pub max_depth: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            rho_init: RHO_INIT,
            max_depth: 300,
        }
    }
}

/// One step back in time under `adv`.
pub fn backreach_step(s: &AhPolytope, adv: Advisory) -> AhPolytope {
    let w = back_step_matrix(adv);
    let w = DMatrix::from_fn(8, 8, |r, c| w[(r, c)]);
    s.linear_transform(&w)
        .expect("state sets are 8-dimensional")
}

enum Node {
    Safe,
    Unsafe(Box<Found>),
    Inconclusive(String),
}

struct Found {
    region: AhPolytope,
    commands: Vec<Advisory>,
    initial_prev: Advisory,
    tau_init: f64,
    depth: usize,
}

pub struct Checker<'a> {
    pub nets: &'a NetworkSet,
    pub params: QuantParams,
    pub config: CheckConfig,
    back: [DMatrix<f64>; 5],
}

impl<'a> Checker<'a> {
    pub fn new(nets: &'a NetworkSet, params: QuantParams, config: CheckConfig) -> Self {
        let back = Advisory::ALL.map(|a| {
            let w = back_step_matrix(a);
            DMatrix::from_fn(8, 8, |r, c| w[(r, c)])
        });
        Checker {
            nets,
            params,
            config,
            back,
        }
    }

    /// Searches backward from `s` (states reached under `alpha_prev`, at time
    /// to vertical separation `tau`) for a path that starts in range.
    pub fn check_state(
        &self,
        s: &AhPolytope,
        alpha_prev: Advisory,
        tau: f64,
        tau_dot: i8,
    ) -> CheckResult {
        let mut nodes = 0;
        let node = self.search(s, alpha_prev, tau, tau_dot as f64, 0, &mut nodes);
        let mut r = CheckResult {
            verdict: Verdict::Safe,
            witness_region: None,
            command_sequence: Vec::new(),
            initial_prev: None,
            tau_init: tau,
            depth: 0,
            nodes,
            reason: None,
        };
        match node {
            Node::Safe => {}
            Node::Unsafe(f) => {
                r.verdict = Verdict::Unsafe;
                r.witness_region = Some(f.region);
                r.command_sequence = f.commands;
                r.initial_prev = Some(f.initial_prev);
                r.tau_init = f.tau_init;
                r.depth = f.depth;
            }
            Node::Inconclusive(why) => {
                r.verdict = Verdict::Inconclusive;
                r.reason = Some(why);
            }
        }
        r
    }

    fn cell_intersection(
        &self,
        p: &AhPolytope,
        q: &crate::quant::QuantizedState,
    ) -> Result<AhPolytope, GeometryError> {
        let (g, h) = cell_halfspaces(q, &self.params);
        p.intersect_halfspaces_pruned(&g, &h)
    }

    fn search(
        &self,
        s: &AhPolytope,
        alpha_prev: Advisory,
        tau: f64,
        tau_dot: f64,
        depth: usize,
        nodes: &mut u64,
    ) -> Node {
        *nodes += 1;
        if depth >= self.config.max_depth {
            return Node::Inconclusive(format!(
                "search depth limit {} reached",
                self.config.max_depth
            ));
        }
        let p = match s.linear_transform(&self.back[alpha_prev.index()]) {
            Ok(p) => p,
            Err(e) => return Node::Inconclusive(e.to_string()),
        };
        let tau_prev = tau - tau_dot;
        let cands = match possible_quantized_states(&p, &self.params) {
            Ok(c) => c,
            Err(e) => return Node::Inconclusive(format!("predecessor cells: {e}")),
        };
        if cands.is_empty() {
            return Node::Safe;
        }
        let inputs: Vec<_> = cands
            .iter()
            .map(|q| dequantize_to_inputs(q, &self.params))
            .collect();

        let mut pending: Option<String> = None;
        for before in Advisory::ALL {
            let mut matches = Vec::new();
            for (q, inp) in cands.iter().zip(&inputs) {
                match self.nets.advise(before, tau_prev, inp) {
                    Ok(d) if d.advisory == alpha_prev => matches.push(*q),
                    Ok(_) => {}
                    Err(e) => {
                        pending.get_or_insert_with(|| e.to_string());
                        matches.clear();
                        break;
                    }
                }
            }
            if matches.is_empty() {
                continue;
            }
            if let Some(q) = matches
                .iter()
                .find(|q| rho_min(q, &self.params) > self.config.rho_init)
            {
                return match self.cell_intersection(&p, q) {
                    Ok(region) => Node::Unsafe(Box::new(Found {
                        region,
                        commands: vec![alpha_prev],
                        initial_prev: before,
                        tau_init: tau_prev,
                        depth: depth + 1,
                    })),
                    Err(e) => Node::Inconclusive(e.to_string()),
                };
            }
            let parts: Vec<Result<AhPolytope, GeometryError>> = if matches.len() == cands.len() {
                vec![Ok(p.clone())]
            } else {
                matches
                    .iter()
                    .map(|q| self.cell_intersection(&p, q))
                    .collect()
            };
            for part in parts {
                let node = match part {
                    Ok(part) => self.search(&part, before, tau_prev, tau_dot, depth + 1, nodes),
                    Err(e) => Node::Inconclusive(e.to_string()),
                };
                match node {
                    Node::Safe => {}
                    Node::Unsafe(mut f) => {
                        f.commands.push(alpha_prev);
                        return Node::Unsafe(f);
                    }
                    Node::Inconclusive(why) => {
                        pending.get_or_insert(why);
                    }
                }
            }
        }
        match pending {
            Some(why) => Node::Inconclusive(why),
            None => Node::Safe,
        }
    }
}

/// Concrete starting state inside the witness region: the Chebyshev center
/// with the intruder's y position and y velocity held at zero, or any LP
/// point when the region is too thin for a center.
pub fn extract_witness(r: &CheckResult) -> Result<PlantState, GeometryError> {
    let region = r.witness_region.as_ref().ok_or(GeometryError::Empty)?;
    let point = match region.chebyshev_center(&[Y_INT, VY_INT]) {
        Ok(p) => p,
        Err(GeometryError::DegenerateBasis(_)) => region.any_point()?,
        Err(e) => return Err(e),
    };
    let mut a = [0.0; 8];
    a.copy_from_slice(point.as_slice());
    Ok(PlantState::from_array(a))
}

/// Replays the witness on the unquantized loop; returns the trace only if it
/// ends in a near collision.
pub fn replay_and_confirm(
    w: &PlantState,
    r: &CheckResult,
    tau_dot: i8,
    nets: &NetworkSet,
    opts: &SimOptions,
    max_steps: usize,
) -> Option<CounterexampleTrace> {
    let trace = simulate_state(w, r.tau_init, tau_dot, max_steps, nets, opts).ok()?;
    trace.collided().then_some(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Safe,
    Unsafe,
    Inconclusive,
    /// Proven safe by an earlier run (resume file).
    Resumed,
    /// Not checked: interrupted or cancelled.
    Skipped,
}

#[derive(Debug, Clone)]
pub struct Finding {
    pub index: usize,
    pub key: PartitionKey,
    pub result: CheckResult,
    pub confirmed: Option<(PlantState, CounterexampleTrace)>,
}

impl Finding {
    pub fn summary(&self) -> ResultSummary {
        ResultSummary {
            index: self.index,
            partition: self.key.to_string(),
            verdict: self.result.verdict,
            commands: self.result.command_sequence.clone(),
            initial_prev: self.result.initial_prev,
            tau_init: self.result.tau_init,
            depth: self.result.depth,
            nodes: self.result.nodes,
            reason: self.result.reason.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub total: usize,
    pub safe: usize,
    pub unsafe_count: usize,
    pub inconclusive: usize,
    pub resumed: usize,
    pub skipped: usize,
    pub elapsed: Duration,
    /// Checked indices with their status, in index order.
    pub statuses: Vec<(usize, Status)>,
    /// Unsafe and inconclusive partitions, in index order.
    pub findings: Vec<Finding>,
}

impl VerifyReport {
    pub fn all_safe(&self) -> bool {
        self.unsafe_count == 0 && self.inconclusive == 0 && self.skipped == 0
    }

    /// Everything except timing, for comparing runs.
    pub fn primary_output(&self) -> String {
        let mut out = format!(
            "total={} safe={} unsafe={} inconclusive={} resumed={} skipped={}\n",
            self.total, self.safe, self.unsafe_count, self.inconclusive, self.resumed, self.skipped
        );
        for f in &self.findings {
            out.push_str(&serde_json::to_string(&f.summary()).expect("serializable"));
            out.push('\n');
        }
        out
    }
}

#[derive(Default)]
pub struct VerifyOptions<'a> {
    /// Worker count; 0 means one per core.
    pub jobs: usize,
    /// Partitions already proven safe.
    pub resume: Option<&'a HashSet<PartitionKey>>,
    /// Set to stop handing out work.
    pub cancel: Option<&'a AtomicBool>,
    /// Incremented once per finished partition.
    pub progress: Option<&'a AtomicUsize>,
    /// Replay each unsafe witness and stop at the first confirmed one.
    pub confirm: Option<ConfirmOptions>,
}

#[derive(Debug, Clone, Copy)]
pub struct ConfirmOptions {
    pub sim: SimOptions,
    pub max_steps: usize,
}

impl Default for ConfirmOptions {
    fn default() -> Self {
        ConfirmOptions {
            sim: SimOptions::default(),
            max_steps: 1000,
        }
    }
}

/// Checks the listed partitions (all of them when `indices` is `None`).
///
/// With confirmation enabled, the first confirmed counterexample in index
/// order cancels the remaining higher indices; lower indices are always
/// finished, so the reported counterexample does not depend on scheduling.
pub fn verify_all(
    space: &PartitionSpace,
    indices: Option<&[usize]>,
    checker: &Checker,
    opts: &VerifyOptions,
) -> VerifyReport {
    let start = Instant::now();
    let all: Vec<usize>;
    let indices = match indices {
        Some(i) => i,
        None => {
            all = (0..space.len()).collect();
            &all
        }
    };
    let best = AtomicUsize::new(usize::MAX);
    let outcomes = par_map(indices.len(), opts.jobs, |slot| {
        let index = indices[slot];
        let key = space.key(index);
        let out = if opts.resume.is_some_and(|r| r.contains(&key)) {
            (Status::Resumed, None)
        } else if opts.cancel.is_some_and(|c| c.load(Ordering::Relaxed))
            || index > best.load(Ordering::Acquire)
        {
            (Status::Skipped, None)
        } else {
            let part = space.partition(index);
            let result = checker.check_state(&part.region, key.prev, 0.0, key.tau_dot);
            match result.verdict {
                Verdict::Safe => (Status::Safe, None),
                Verdict::Inconclusive => (
                    Status::Inconclusive,
                    Some(Finding {
                        index,
                        key,
                        result,
                        confirmed: None,
                    }),
                ),
                Verdict::Unsafe => {
                    let confirmed = opts.confirm.and_then(|c| {
                        let w = extract_witness(&result).ok()?;
                        let trace = replay_and_confirm(
                            &w,
                            &result,
                            key.tau_dot,
                            checker.nets,
                            &c.sim,
                            c.max_steps,
                        )?;
                        best.fetch_min(index, Ordering::AcqRel);
                        Some((w, trace))
                    });
                    (
                        Status::Unsafe,
                        Some(Finding {
                            index,
                            key,
                            result,
                            confirmed,
                        }),
                    )
                }
            }
        };
        if let Some(p) = opts.progress {
            p.fetch_add(1, Ordering::Relaxed);
        }
        (index, out)
    });

    // Results past the first confirmed counterexample depend on timing; drop them.
    let cut = best.load(Ordering::Acquire);
    let mut report = VerifyReport {
        total: indices.len(),
        safe: 0,
        unsafe_count: 0,
        inconclusive: 0,
        resumed: 0,
        skipped: 0,
        elapsed: Duration::ZERO,
        statuses: Vec::with_capacity(indices.len()),
        findings: Vec::new(),
    };
    for (index, (mut status, finding)) in outcomes {
        if index > cut {
            status = Status::Skipped;
        }
        match status {
            Status::Safe => report.safe += 1,
            Status::Unsafe => report.unsafe_count += 1,
            Status::Inconclusive => report.inconclusive += 1,
            Status::Resumed => report.resumed += 1,
            Status::Skipped => report.skipped += 1,
        }
        report.statuses.push((index, status));
        if status != Status::Skipped {
            if let Some(f) = finding {
                report.findings.push(f);
            }
        }
    }
    report.elapsed = start.elapsed();
    report
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FalsifyError {
    #[error("quantum floor reached: {0}")]
    Floor(String),
    #[error("refinement round limit {0} reached")]
    Rounds(usize),
    #[error("interrupted")]
    Interrupted,
}

#[derive(Debug, Clone, Copy)]
pub struct FalsifyConfig {
    pub initial: QuantParams,
    pub check: CheckConfig,
    pub confirm: ConfirmOptions,
    pub min_q_pos: f64,
    pub min_q_vel: f64,
    pub max_theta_sectors: u32,
    pub max_rounds: usize,
    pub jobs: usize,
}

impl Default for FalsifyConfig {
    fn default() -> Self {
        FalsifyConfig {
            initial: QuantParams::default(),
            check: CheckConfig::default(),
            confirm: ConfirmOptions::default(),
            min_q_pos: 1.0,
            min_q_vel: 0.1,
            max_theta_sectors: 360 * 64,
            max_rounds: 64,
            jobs: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundLog {
    pub q_pos: f64,
    pub q_vel: f64,
    pub q_theta_deg: f64,
    pub full_pass: bool,
    pub checked: usize,
    pub unsafe_count: usize,
    pub inconclusive: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct Confirmed {
    pub key: PartitionKey,
    pub params: QuantParams,
    pub result: CheckResult,
    pub witness: PlantState,
    pub trace: CounterexampleTrace,
}

#[derive(Debug, Clone)]
pub enum FalsifyOutcome {
    Confirmed(Box<Confirmed>),
    /// A full pass at these quanta proved every partition safe.
    QuantizedSafe(QuantParams),
    GaveUp(FalsifyError),
}

pub const REFINE_ORDER: [Quantum; 3] = [Quantum::Position, Quantum::Velocity, Quantum::Heading];

/// Alternately halves the position, speed and heading quanta until a
/// quantized counterexample replays as a real one. After each refinement the
/// children of the previously unsafe partitions are checked first; only when
/// they are all safe does a full pass run at the new quanta.
pub fn falsify(
    nets: &NetworkSet,
    tau_dots: &[i8],
    cfg: &FalsifyConfig,
    cancel: Option<&AtomicBool>,
    log: &mut Vec<RoundLog>,
) -> FalsifyOutcome {
    let mut params = cfg.initial;
    let mut space = enumerate_unsafe_partitions(&params, tau_dots);
    let mut subset: Option<Vec<usize>> = None;
    let mut turn = 0;
    for _ in 0..cfg.max_rounds {
        let checker = Checker::new(nets, params, cfg.check);
        let opts = VerifyOptions {
            jobs: cfg.jobs,
            cancel,
            confirm: Some(cfg.confirm),
            ..Default::default()
        };
        let report = verify_all(&space, subset.as_deref(), &checker, &opts);
        log.push(RoundLog {
            q_pos: params.q_pos,
            q_vel: params.q_vel,
            q_theta_deg: params.q_theta_deg(),
            full_pass: subset.is_none(),
            checked: report.total,
            unsafe_count: report.unsafe_count,
            inconclusive: report.inconclusive,
            seconds: report.elapsed.as_secs_f64(),
        });
        if let Some(f) = report.findings.iter().find(|f| f.confirmed.is_some()) {
            let (witness, trace) = f.confirmed.clone().expect("checked above");
            return FalsifyOutcome::Confirmed(Box::new(Confirmed {
                key: f.key,
                params,
                result: f.result.clone(),
                witness,
                trace,
            }));
        }
        if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            return FalsifyOutcome::GaveUp(FalsifyError::Interrupted);
        }
        let unsafe_keys: HashSet<PartitionKey> = report
            .findings
            .iter()
            .filter(|f| f.result.verdict == Verdict::Unsafe)
            .map(|f| f.key)
            .collect();
        if unsafe_keys.is_empty() {
            if subset.is_none() {
                if report.inconclusive == 0 {
                    return FalsifyOutcome::QuantizedSafe(params);
                }
                return FalsifyOutcome::GaveUp(FalsifyError::Floor(format!(
                    "{} partitions inconclusive at q_pos={} q_vel={} q_theta={}°",
                    report.inconclusive,
                    params.q_pos,
                    params.q_vel,
                    params.q_theta_deg()
                )));
            }
            subset = None;
            continue;
        }
        let which = REFINE_ORDER[turn % REFINE_ORDER.len()];
        turn += 1;
        let next = params.halve(which);
        if next.q_pos < cfg.min_q_pos
            || next.q_vel < cfg.min_q_vel
            || next.theta_sectors > cfg.max_theta_sectors
        {
            return FalsifyOutcome::GaveUp(FalsifyError::Floor(format!(
                "next quanta q_pos={} q_vel={} q_theta={}° fall below the configured floor",
                next.q_pos,
                next.q_vel,
                next.q_theta_deg()
            )));
        }
        params = next;
        space = enumerate_unsafe_partitions(&params, tau_dots);
        let children: Vec<usize> = (0..space.len())
            .filter(|&i| unsafe_keys.contains(&space.key(i).parent(which)))
            .collect();
        subset = Some(children);
    }
    FalsifyOutcome::GaveUp(FalsifyError::Rounds(cfg.max_rounds))
}

/// Support values of `p` along each direction (maximum of `dᵀx`).
pub fn support_values(p: &AhPolytope, dirs: &[DVector<f64>]) -> Result<Vec<f64>, GeometryError> {
    dirs.iter()
        .map(|d| {
            let out = p.maximize(d)?;
            out.objective.ok_or(GeometryError::Empty)
        })
        .collect()
}
