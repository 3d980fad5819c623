//! Closed-loop simulation: once per second the controller picks an advisory
//! from the current geometry, then the plant flies one second under it.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{
    propagate, state_to_network_inputs, Advisory, DynamicsError, NetworkInput, PlantState,
};
use crate::exec::par_map;
use crate::nnet::{NetworkSet, SelectError};
use crate::partition::NMAC_RADIUS;
use crate::quant::{dequantize_to_inputs, quantize_state, QuantParams};

/// Range beyond which encounters start and the controller stays silent, ft.
pub const RHO_INIT: f64 = 60760.0;

/// Sampling box for random encounters.
pub const SAMPLE_RHO: (f64, f64) = (60760.0, 63160.0);
pub const SAMPLE_VOWN: (f64, f64) = (100.0, 1200.0);
pub const SAMPLE_VINT: (f64, f64) = (0.0, 1200.0);
pub const SAMPLE_TAU0: (u32, u32) = (25, 160);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Select(#[from] SelectError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncounterSpec {
    pub rho: f64,
    pub theta: f64,
    pub psi: f64,
    pub v_own: f64,
    pub v_int: f64,
    pub tau0: f64,
    pub tau_dot: i8,
    pub max_steps: usize,
}

/// Ownship at the origin heading east; intruder at range `rho`, bearing
/// `theta`, heading `psi`.
pub fn spec_to_state(e: &EncounterSpec) -> PlantState {
    let (st, ct) = e.theta.sin_cos();
    let (sp, cp) = e.psi.sin_cos();
    PlantState {
        x_own: 0.0,
        y_own: 0.0,
        vx_own: e.v_own,
        vy_own: 0.0,
        x_int: e.rho * ct,
        y_int: e.rho * st,
        vx_int: e.v_int * cp,
        vy_int: e.v_int * sp,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimMode {
    Exact,
    Quantized(QuantParams),
}

#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub mode: SimMode,
    pub rho_init: f64,
    /// Skip the controller (command COC) while the range exceeds `rho_init`.
    pub force_coc_outside: bool,
    /// Stop once the range has grown this many steps in a row beyond `rho_init` at τ = 0.
    pub divergence_steps: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            mode: SimMode::Exact,
            rho_init: RHO_INIT,
            force_coc_outside: true,
            divergence_steps: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    Collision,
    MaxSteps,
    Diverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub alpha_prev: Advisory,
    pub cmd: Advisory,
    pub tau: f64,
    /// 1-based grid coordinates of the network consulted, if any.
    pub network: Option<(usize, usize)>,
    pub rho: f64,
    pub theta_deg: f64,
    pub psi_deg: f64,
    pub state: PlantState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleTrace {
    pub initial: PlantState,
    pub tau0: f64,
    pub tau_dot: i8,
    pub rows: Vec<TraceRow>,
    pub stop: StopReason,
    pub network_calls: usize,
}

impl CounterexampleTrace {
    pub fn collided(&self) -> bool {
        self.stop == StopReason::Collision
    }

    pub fn commands(&self) -> Vec<Advisory> {
        self.rows.iter().map(|r| r.cmd).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "step,alpha_prev,cmd,rho_ft,theta_deg,psi_deg")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{:.1},{:.2},{:.2}",
                r.step, r.alpha_prev, r.cmd, r.rho, r.theta_deg, r.psi_deg
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Static plot of both ground tracks with one marker per step.
    pub fn to_svg(&self) -> String {
        let pts = |own: bool| -> Vec<(f64, f64)> {
            self.rows
                .iter()
                .map(|r| {
                    if own {
                        (r.state.x_own, r.state.y_own)
                    } else {
                        (r.state.x_int, r.state.y_int)
                    }
                })
                .collect()
        };
        let own = pts(true);
        let int = pts(false);
        let all: Vec<&(f64, f64)> = own.iter().chain(&int).collect();
        let (mut x0, mut x1, mut y0, mut y1) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for &&(x, y) in &all {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if all.is_empty() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        let span = (x1 - x0).max(y1 - y0).max(1.0);
        let size = 800.0;
        let pad = 40.0;
        let scale = (size - 2.0 * pad) / span;
        let map = |(x, y): (f64, f64)| (pad + (x - x0) * scale, size - pad - (y - y0) * scale);
        let mut svg = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        );
        for (track, color) in [(&own, "#1f4e9c"), (&int, "#b3261e")] {
            let path: Vec<String> = track
                .iter()
                .map(|&p| {
                    let (x, y) = map(p);
                    format!("{x:.1},{y:.1}")
                })
                .collect();
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                path.join(" ")
            ));
            for &p in track.iter() {
                let (x, y) = map(p);
                svg.push_str(&format!(
                    "<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"2\" fill=\"{color}\"/>\n"
                ));
            }
        }
        svg.push_str(&format!(
            "<text x=\"{pad}\" y=\"20\" font-family=\"monospace\" font-size=\"12\">ownship (blue) / intruder (red), {} steps, final range {:.1} ft</text>\n</svg>\n",
            self.rows.len(),
            self.rows.last().map_or(f64::NAN, |r| r.rho)
        ));
        svg
    }
}

pub fn simulate(
    e: &EncounterSpec,
    nets: &NetworkSet,
    opts: &SimOptions,
) -> Result<CounterexampleTrace, SimError> {
    simulate_state(
        &spec_to_state(e),
        e.tau0,
        e.tau_dot,
        e.max_steps,
        nets,
        opts,
    )
}

/// Closed loop from an arbitrary Cartesian state.
pub fn simulate_state(
    initial: &PlantState,
    tau0: f64,
    tau_dot: i8,
    max_steps: usize,
    nets: &NetworkSet,
    opts: &SimOptions,
) -> Result<CounterexampleTrace, SimError> {
    let mut s = *initial;
    let mut tau = tau0;
    let mut prev = Advisory::Coc;
    let mut rows = Vec::new();
    let mut network_calls = 0;
    let mut growing = 0usize;
    let mut last_rho = f64::INFINITY;
    let mut stop = StopReason::MaxSteps;
    for step in 1..=max_steps {
        let exact = state_to_network_inputs(&s)?;
        let inputs: NetworkInput = match opts.mode {
            SimMode::Exact => exact,
            SimMode::Quantized(p) => dequantize_to_inputs(&quantize_state(&s, &p), &p),
        };
        let (cmd, network) = if opts.force_coc_outside && inputs.rho > opts.rho_init {
            (Advisory::Coc, None)
        } else {
            network_calls += 1;
            let d = nets.advise(prev, tau, &inputs)?;
            (d.advisory, Some(d.network))
        };
        rows.push(TraceRow {
            step,
            alpha_prev: prev,
            cmd,
            tau,
            network,
            rho: exact.rho,
            theta_deg: exact.theta.to_degrees(),
            psi_deg: exact.psi.to_degrees(),
            state: s,
        });
        if exact.rho < NMAC_RADIUS && tau == 0.0 {
            stop = StopReason::Collision;
            break;
        }
        if tau == 0.0 && exact.rho > opts.rho_init && exact.rho > last_rho {
            growing += 1;
            if growing >= opts.divergence_steps {
                stop = StopReason::Diverged;
                break;
            }
        } else {
            growing = 0;
        }
        last_rho = exact.rho;
        s = propagate(&s, cmd, 1.0);
        tau = (tau + tau_dot as f64).max(0.0);
        prev = cmd;
    }
    Ok(CounterexampleTrace {
        initial: *initial,
        tau0,
        tau_dot,
        rows,
        stop,
        network_calls,
    })
}

/// The encounter drawn for sample `index`. Each sample has its own ChaCha8
/// stream under `seed`, so batches can be split across workers freely.
pub fn sample_spec(seed: u64, index: u64, tau_dot: i8, max_steps: usize) -> EncounterSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let two_pi = 2.0 * std::f64::consts::PI;
    let rho = rng.random_range(SAMPLE_RHO.0..=SAMPLE_RHO.1);
    // π − U[0, 2π) lands in (−π, π].
    let theta = std::f64::consts::PI - rng.random_range(0.0..two_pi);
    let psi = std::f64::consts::PI - rng.random_range(0.0..two_pi);
    let v_own = rng.random_range(SAMPLE_VOWN.0..=SAMPLE_VOWN.1);
    let v_int = rng.random_range(SAMPLE_VINT.0..=SAMPLE_VINT.1);
    let tau0 = if tau_dot == 0 {
        0.0
    } else {
        rng.random_range(SAMPLE_TAU0.0..=SAMPLE_TAU0.1) as f64
    };
    EncounterSpec {
        rho,
        theta,
        psi,
        v_own,
        v_int,
        tau0,
        tau_dot,
        max_steps,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McCase {
    pub index: u64,
    pub v_own: f64,
    pub v_int: f64,
    pub tau0: f64,
    pub spec: EncounterSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McStats {
    pub samples: u64,
    pub seed: u64,
    pub tau_dot: i8,
    pub unsafe_count: u64,
    pub cases: Vec<McCase>,
}

pub fn monte_carlo(
    batch_size: u64,
    tau_dot: i8,
    seed: u64,
    max_steps: usize,
    nets: &NetworkSet,
    opts: &SimOptions,
    jobs: usize,
) -> Result<McStats, SimError> {
    let outcomes = par_map(batch_size as usize, jobs, |i| {
        let spec = sample_spec(seed, i as u64, tau_dot, max_steps);
        simulate(&spec, nets, opts).map(|t| t.collided().then_some((i as u64, spec)))
    });
    let mut cases = Vec::new();
    for o in outcomes {
        if let Some((index, spec)) = o? {
            cases.push(McCase {
                index,
                v_own: spec.v_own,
                v_int: spec.v_int,
                tau0: spec.tau0,
                spec,
            });
        }
    }
    Ok(McStats {
        samples: batch_size,
        seed,
        tau_dot,
        unsafe_count: cases.len() as u64,
        cases,
    })
}
