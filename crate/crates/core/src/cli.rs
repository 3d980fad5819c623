//! `qbreach` command line: configuration, asset loading and the subcommands.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::backreach::{
    falsify, verify_all, CheckConfig, Checker, ConfirmOptions, FalsifyConfig, FalsifyOutcome,
    Status, Verdict, VerifyOptions,
};
use crate::dynamics::Advisory;
use crate::fixtures::{scenario, SCENARIO_NAMES};
use crate::nnet::{NetworkSet, ScoreRule};
use crate::partition::{enumerate_unsafe_partitions, PartitionKey};
use crate::quant::QuantParams;
use crate::sim::{
    monte_carlo, simulate, CounterexampleTrace, EncounterSpec, SimMode, SimOptions, RHO_INIT,
};
use crate::synthetic::bearing_policy;

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNSAFE: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

/// Missing or malformed assets and configuration; reported with exit code 3.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct InputError(String);

fn input_err(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

#[derive(Parser, Debug)]
#[command(
    name = "qbreach",
    version,
    about = "Verify or falsify the quantized ACAS Xu closed loop"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// key=value configuration file; flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory holding the 45 .nnet files
    #[arg(long, global = true)]
    pub nnet_dir: Option<PathBuf>,
    /// Use the built-in bearing-rule controller with this activation range (ft) instead of network files
    #[arg(long, global = true)]
    pub stub_range: Option<f64>,
    #[arg(long, global = true)]
    pub q_pos: Option<f64>,
    #[arg(long, global = true)]
    pub q_vel: Option<f64>,
    #[arg(long, global = true)]
    pub q_theta_deg: Option<f64>,
    #[arg(long, global = true)]
    pub vown_min: Option<f64>,
    #[arg(long, global = true)]
    pub vown_max: Option<f64>,
    #[arg(long, global = true)]
    pub vint_min: Option<f64>,
    #[arg(long, global = true)]
    pub vint_max: Option<f64>,
    /// 0, -1 or both
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub tau_dot: Option<String>,
    /// Worker threads (0 = one per core)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// File of partitions already proven safe; updated on exit
    #[arg(long, global = true)]
    pub resume: Option<PathBuf>,
    #[arg(long, global = true)]
    pub max_depth: Option<usize>,
    /// Range beyond which a state counts as an initial state (ft)
    #[arg(long, global = true)]
    pub rho_init: Option<f64>,
    /// Smallest position quantum the refinement may reach (ft)
    #[arg(long, global = true)]
    pub min_q_pos: Option<f64>,
    /// Pick the advisory with the largest score
    #[arg(long, global = true)]
    pub argmax: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check every unsafe partition
    Verify,
    /// Refine the quantization until a real counterexample is found
    Falsify {
        #[arg(long, default_value_t = 64)]
        max_rounds: usize,
    },
    /// Run one encounter
    Simulate {
        #[arg(long)]
        rho: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta_deg: f64,
        #[arg(long, allow_hyphen_values = true)]
        psi_deg: f64,
        #[arg(long)]
        v_own: f64,
        #[arg(long)]
        v_int: f64,
        #[arg(long, default_value_t = 0.0)]
        tau0: f64,
        #[arg(long, default_value_t = 200)]
        max_steps: usize,
        /// Feed the controller cell centers instead of exact inputs
        #[arg(long)]
        quantized: bool,
    },
    /// Random encounter batch
    Montecarlo {
        #[arg(long, default_value_t = 1_500_000)]
        samples: u64,
        #[arg(long, default_value_t = 200)]
        max_steps: usize,
    },
    /// Count (and optionally list) the unsafe partitions
    Partitions {
        #[arg(long)]
        list: bool,
    },
    /// Re-run a recorded trace and compare row by row
    Replay {
        #[arg(long)]
        scenario: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauDots {
    Level,
    Closing,
    Both,
}

impl TauDots {
    pub fn values(self) -> &'static [i8] {
        match self {
            TauDots::Level => &[0],
            TauDots::Closing => &[-1],
            TauDots::Both => &[0, -1],
        }
    }
}

impl std::str::FromStr for TauDots {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "0" => Ok(TauDots::Level),
            "-1" => Ok(TauDots::Closing),
            "both" => Ok(TauDots::Both),
            other => Err(input_err(format!(
                "tau-dot must be 0, -1 or both, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub nnet_dir: Option<PathBuf>,
    pub stub_range: Option<f64>,
    pub params: QuantParams,
    pub tau_dots: TauDots,
    pub jobs: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub resume: Option<PathBuf>,
    pub max_depth: usize,
    pub rho_init: f64,
    pub min_q_pos: f64,
    pub min_q_vel: f64,
    pub rule: ScoreRule,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            nnet_dir: None,
            stub_range: None,
            params: QuantParams::default(),
            tau_dots: TauDots::Both,
            jobs: 0,
            seed: 0,
            out: None,
            resume: None,
            max_depth: CheckConfig::default().max_depth,
            rho_init: RHO_INIT,
            min_q_pos: 1.0,
            min_q_vel: 0.1,
            rule: ScoreRule::Argmin,
        }
    }
}

/// Raw settings before validation; file values first, flags on top.
#[derive(Debug, Default)]
struct Settings {
    q_pos: Option<f64>,
    q_vel: Option<f64>,
    q_theta_deg: Option<f64>,
    vown: (Option<f64>, Option<f64>),
    vint: (Option<f64>, Option<f64>),
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| input_err(format!("bad value for {key}: {v:?}")))
}

impl RunConfig {
    pub fn from_args(a: &CommonArgs) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut s = Settings::default();
        if let Some(path) = &a.config {
            let text = fs::read_to_string(path)
                .map_err(|e| input_err(format!("cannot read config {}: {e}", path.display())))?;
            cfg.apply_file(&text, &mut s)?;
        }
        macro_rules! over {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src.clone() {
                    $dst = v;
                }
            };
        }
        if a.nnet_dir.is_some() {
            cfg.nnet_dir = a.nnet_dir.clone();
        }
        if a.stub_range.is_some() {
            cfg.stub_range = a.stub_range;
        }
        if a.out.is_some() {
            cfg.out = a.out.clone();
        }
        if a.resume.is_some() {
            cfg.resume = a.resume.clone();
        }
        over!(cfg.jobs, a.jobs);
        over!(cfg.seed, a.seed);
        over!(cfg.max_depth, a.max_depth);
        over!(cfg.rho_init, a.rho_init);
        over!(cfg.min_q_pos, a.min_q_pos);
        if let Some(t) = &a.tau_dot {
            cfg.tau_dots = t.parse()?;
        }
        if a.argmax {
            cfg.rule = ScoreRule::Argmax;
        }
        s.q_pos = a.q_pos.or(s.q_pos);
        s.q_vel = a.q_vel.or(s.q_vel);
        s.q_theta_deg = a.q_theta_deg.or(s.q_theta_deg);
        s.vown = (a.vown_min.or(s.vown.0), a.vown_max.or(s.vown.1));
        s.vint = (a.vint_min.or(s.vint.0), a.vint_max.or(s.vint.1));
        let d = QuantParams::default();
        cfg.params = QuantParams::new(
            s.q_pos.unwrap_or(d.q_pos),
            s.q_vel.unwrap_or(d.q_vel),
            s.q_theta_deg.unwrap_or(d.q_theta_deg()),
            (s.vown.0.unwrap_or(d.vown.lo), s.vown.1.unwrap_or(d.vown.hi)),
            (s.vint.0.unwrap_or(d.vint.lo), s.vint.1.unwrap_or(d.vint.hi)),
        )
        .map_err(|e| input_err(format!("invalid quantization: {e}")))?;
        if cfg.max_depth == 0 {
            return Err(input_err("max-depth must be positive"));
        }
        Ok(cfg)
    }

    fn apply_file(&mut self, text: &str, s: &mut Settings) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| input_err(format!("config line {}: expected key=value", n + 1)))?;
            let key = k.trim().replace('_', "-");
            let v = v.trim();
            match key.as_str() {
                "nnet-dir" => self.nnet_dir = Some(PathBuf::from(v)),
                "stub-range" => self.stub_range = Some(parse_num(&key, v)?),
                "q-pos" => s.q_pos = Some(parse_num(&key, v)?),
                "q-vel" => s.q_vel = Some(parse_num(&key, v)?),
                "q-theta-deg" => s.q_theta_deg = Some(parse_num(&key, v)?),
                "vown-min" => s.vown.0 = Some(parse_num(&key, v)?),
                "vown-max" => s.vown.1 = Some(parse_num(&key, v)?),
                "vint-min" => s.vint.0 = Some(parse_num(&key, v)?),
                "vint-max" => s.vint.1 = Some(parse_num(&key, v)?),
                "tau-dot" => self.tau_dots = v.parse()?,
                "jobs" => self.jobs = parse_num(&key, v)?,
                "seed" => self.seed = parse_num(&key, v)?,
                "out" => self.out = Some(PathBuf::from(v)),
                "resume" => self.resume = Some(PathBuf::from(v)),
                "max-depth" => self.max_depth = parse_num(&key, v)?,
                "rho-init" => self.rho_init = parse_num(&key, v)?,
                "min-q-pos" => self.min_q_pos = parse_num(&key, v)?,
                "min-q-vel" => self.min_q_vel = parse_num(&key, v)?,
                "argmax" => {
                    if parse_num::<bool>(&key, v)? {
                        self.rule = ScoreRule::Argmax;
                    }
                }
                other => {
                    return Err(input_err(format!(
                        "config line {}: unknown key {other:?}",
                        n + 1
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn networks(&self) -> Result<NetworkSet> {
        let mut nets = match (&self.nnet_dir, self.stub_range) {
            (_, Some(r)) => bearing_policy(r, 40f64.to_radians()),
            (Some(dir), None) => NetworkSet::load_dir(dir)
                .map_err(|e| input_err(format!("{}: {e}", dir.display())))?,
            (None, None) => {
                return Err(input_err("no networks: pass --nnet-dir (or --stub-range)"))
            }
        };
        nets.rule = self.rule;
        Ok(nets)
    }

    fn out_dir(&self) -> Result<Option<&Path>> {
        if let Some(dir) = &self.out {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        Ok(self.out.as_deref())
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<InputError>().is_some() {
                EXIT_INPUT
            } else {
                EXIT_INCONCLUSIVE
            }
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let cfg = RunConfig::from_args(&cli.common)?;
    match &cli.command {
        Command::Partitions { list } => cmd_partitions(&cfg, *list, &mut std::io::stdout().lock()),
        Command::Verify => cmd_verify(&cfg, install_interrupt()),
        Command::Falsify { max_rounds } => cmd_falsify(&cfg, *max_rounds, install_interrupt()),
        Command::Simulate {
            rho,
            theta_deg,
            psi_deg,
            v_own,
            v_int,
            tau0,
            max_steps,
            quantized,
        } => {
            let tau_dot = match cfg.tau_dots {
                TauDots::Level => 0,
                TauDots::Closing => -1,
                TauDots::Both if *tau0 == 0.0 => 0,
                TauDots::Both => -1,
            };
            let spec = EncounterSpec {
                rho: *rho,
                theta: theta_deg.to_radians(),
                psi: psi_deg.to_radians(),
                v_own: *v_own,
                v_int: *v_int,
                tau0: *tau0,
                tau_dot,
                max_steps: *max_steps,
            };
            cmd_simulate(&cfg, &spec, *quantized)
        }
        Command::Montecarlo { samples, max_steps } => cmd_montecarlo(&cfg, *samples, *max_steps),
        Command::Replay { scenario } => cmd_replay(&cfg, scenario),
    }
}

static INTERRUPTED: AtomicBool = AtomicBool::new(false);

fn install_interrupt() -> &'static AtomicBool {
    // A second registration fails harmlessly when `run` is called repeatedly.
    let _ = ctrlc::set_handler(|| INTERRUPTED.store(true, Ordering::SeqCst));
    &INTERRUPTED
}

pub fn cmd_partitions(cfg: &RunConfig, list: bool, w: &mut dyn Write) -> Result<i32> {
    let space = enumerate_unsafe_partitions(&cfg.params, cfg.tau_dots.values());
    writeln!(w, "{}", space.len())?;
    if list {
        for i in 0..space.len() {
            writeln!(w, "{}", space.key(i))?;
        }
    }
    Ok(EXIT_OK)
}

fn read_resume(path: &Path) -> Result<HashSet<PartitionKey>> {
    if !path.exists() {
        return Ok(HashSet::new());
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(n, l)| {
            l.trim()
                .parse()
                .map_err(|e| input_err(format!("{} line {}: {e}", path.display(), n + 1)))
        })
        .collect()
}

fn write_resume(path: &Path, keys: &[PartitionKey]) -> Result<()> {
    let mut text = String::with_capacity(keys.len() * 48);
    for k in keys {
        text.push_str(&k.to_string());
        text.push('\n');
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Prints progress to stderr every few seconds until dropped.
struct Ticker {
    stop: Arc<AtomicBool>,
    handle: Option<std::thread::JoinHandle<()>>,
}

impl Ticker {
    fn start(done: Arc<AtomicUsize>, total: usize) -> Self {
        let stop = Arc::new(AtomicBool::new(false));
        let flag = stop.clone();
        let handle = std::thread::spawn(move || {
            let mut waited = 0;
            while !flag.load(Ordering::Relaxed) {
                std::thread::sleep(Duration::from_millis(100));
                waited += 1;
                if waited % 50 == 0 {
                    eprintln!("progress: {}/{}", done.load(Ordering::Relaxed), total);
                }
            }
        });
        Ticker {
            stop,
            handle: Some(handle),
        }
    }
}

impl Drop for Ticker {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

pub fn cmd_verify(cfg: &RunConfig, cancel: &AtomicBool) -> Result<i32> {
    let nets = cfg.networks()?;
    let out = cfg.out_dir()?;
    let space = enumerate_unsafe_partitions(&cfg.params, cfg.tau_dots.values());
    let resume = match &cfg.resume {
        Some(p) => read_resume(p)?,
        None => HashSet::new(),
    };
    let checker = Checker::new(
        &nets,
        cfg.params,
        CheckConfig {
            rho_init: cfg.rho_init,
            max_depth: cfg.max_depth,
        },
    );
    let progress = Arc::new(AtomicUsize::new(0));
    let report = {
        let _ticker = Ticker::start(progress.clone(), space.len());
        let opts = VerifyOptions {
            jobs: cfg.jobs,
            resume: Some(&resume),
            cancel: Some(cancel),
            progress: Some(&progress),
            confirm: None,
        };
        verify_all(&space, None, &checker, &opts)
    };
    println!(
        "partitions={} safe={} unsafe={} inconclusive={} resumed={} skipped={} seconds={:.3}",
        report.total,
        report.safe,
        report.unsafe_count,
        report.inconclusive,
        report.resumed,
        report.skipped,
        report.elapsed.as_secs_f64()
    );
    if let Some(path) = &cfg.resume {
        let keys: Vec<PartitionKey> = report
            .statuses
            .iter()
            .filter(|(_, s)| matches!(s, Status::Safe | Status::Resumed))
            .map(|&(i, _)| space.key(i))
            .collect();
        write_resume(path, &keys)?;
    }
    if let Some(dir) = out {
        let mut f = fs::File::create(dir.join("results.jsonl"))?;
        for finding in &report.findings {
            serde_json::to_writer(&mut f, &finding.summary())?;
            writeln!(f)?;
        }
    }
    for finding in report
        .findings
        .iter()
        .filter(|f| f.result.verdict == Verdict::Unsafe)
        .take(10)
    {
        println!(
            "unsafe {} commands={}",
            finding.key,
            join_commands(&finding.result.command_sequence)
        );
    }
    if cancel.load(Ordering::Relaxed) {
        eprintln!("interrupted; {} partitions not checked", report.skipped);
    }
    Ok(if report.unsafe_count > 0 {
        EXIT_UNSAFE
    } else if report.inconclusive > 0 || report.skipped > 0 {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    })
}

fn join_commands(c: &[Advisory]) -> String {
    c.iter().map(|a| a.label()).collect::<Vec<_>>().join(",")
}

fn write_trace(dir: &Path, stem: &str, t: &CounterexampleTrace) -> Result<()> {
    fs::write(dir.join(format!("{stem}.csv")), t.to_csv())?;
    fs::write(dir.join(format!("{stem}.svg")), t.to_svg())?;
    fs::write(
        dir.join(format!("{stem}.json")),
        serde_json::to_string_pretty(t)?,
    )?;
    Ok(())
}

pub fn cmd_falsify(cfg: &RunConfig, max_rounds: usize, cancel: &AtomicBool) -> Result<i32> {
    let nets = cfg.networks()?;
    let out = cfg.out_dir()?;
    let fc = FalsifyConfig {
        initial: cfg.params,
        check: CheckConfig {
            rho_init: cfg.rho_init,
            max_depth: cfg.max_depth,
        },
        confirm: ConfirmOptions {
            sim: SimOptions {
                rho_init: cfg.rho_init,
                ..SimOptions::default()
            },
            max_steps: 1000,
        },
        min_q_pos: cfg.min_q_pos,
        min_q_vel: cfg.min_q_vel,
        max_rounds,
        jobs: cfg.jobs,
        ..FalsifyConfig::default()
    };
    let mut log = Vec::new();
    let outcome = falsify(&nets, cfg.tau_dots.values(), &fc, Some(cancel), &mut log);
    for r in &log {
        println!(
            "round q_pos={} q_vel={} q_theta={:.4} full={} checked={} unsafe={} inconclusive={} seconds={:.3}",
            r.q_pos, r.q_vel, r.q_theta_deg, r.full_pass, r.checked, r.unsafe_count, r.inconclusive, r.seconds
        );
    }
    if let Some(dir) = out {
        fs::write(dir.join("rounds.json"), serde_json::to_string_pretty(&log)?)?;
    }
    match outcome {
        FalsifyOutcome::Confirmed(c) => {
            let last = c.trace.rows.last().expect("collision trace has rows");
            println!(
                "confirmed partition={} steps={} final_rho={:.1} tau={}",
                c.key,
                c.trace.rows.len(),
                last.rho,
                last.tau
            );
            println!("{}", c.trace.to_csv());
            if let Some(dir) = out {
                write_trace(dir, "counterexample", &c.trace)?;
            }
            Ok(EXIT_OK)
        }
        FalsifyOutcome::QuantizedSafe(p) => {
            println!(
                "quantized system safe at q_pos={} q_vel={} q_theta={}; no counterexample",
                p.q_pos,
                p.q_vel,
                p.q_theta_deg()
            );
            Ok(EXIT_INCONCLUSIVE)
        }
        FalsifyOutcome::GaveUp(e) => {
            println!("gave up: {e}");
            Ok(EXIT_INCONCLUSIVE)
        }
    }
}

pub fn cmd_simulate(cfg: &RunConfig, spec: &EncounterSpec, quantized: bool) -> Result<i32> {
    let nets = cfg.networks()?;
    let opts = SimOptions {
        mode: if quantized {
            SimMode::Quantized(cfg.params)
        } else {
            SimMode::Exact
        },
        rho_init: cfg.rho_init,
        ..SimOptions::default()
    };
    let trace = simulate(spec, &nets, &opts).map_err(|e| anyhow!("simulation failed: {e}"))?;
    print!("{}", trace.to_csv());
    eprintln!(
        "stop={:?} steps={} network_calls={}",
        trace.stop,
        trace.rows.len(),
        trace.network_calls
    );
    if let Some(dir) = cfg.out_dir()? {
        write_trace(dir, "trace", &trace)?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_montecarlo(cfg: &RunConfig, samples: u64, max_steps: usize) -> Result<i32> {
    let nets = cfg.networks()?;
    let tau_dot = match cfg.tau_dots {
        TauDots::Level => 0,
        TauDots::Closing => -1,
        TauDots::Both => bail!(input_err("montecarlo needs a single --tau-dot (0 or -1)")),
    };
    let opts = SimOptions {
        rho_init: cfg.rho_init,
        ..SimOptions::default()
    };
    let stats = monte_carlo(
        samples, tau_dot, cfg.seed, max_steps, &nets, &opts, cfg.jobs,
    )
    .map_err(|e| anyhow!("simulation failed: {e}"))?;
    let json = serde_json::to_string_pretty(&stats)?;
    println!("{json}");
    if let Some(dir) = cfg.out_dir()? {
        fs::write(dir.join("montecarlo.json"), &json)?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_replay(cfg: &RunConfig, name: &str) -> Result<i32> {
    let sc = scenario(name).ok_or_else(|| {
        input_err(format!(
            "unknown scenario {name:?}; known: {}",
            SCENARIO_NAMES.join(", ")
        ))
    })?;
    let nets = cfg.networks()?;
    let trace = simulate(&sc.spec, &nets, &SimOptions::default())
        .map_err(|e| anyhow!("simulation failed: {e}"))?;
    println!("step,cmd,expected_cmd,rho_ft,expected_rho_ft");
    let mut mismatches = 0;
    for (i, want) in sc.rows.iter().enumerate() {
        match trace.rows.get(i) {
            Some(got) => {
                let ok = got.cmd == want.cmd && (got.rho - want.rho).abs() <= 0.5;
                if !ok {
                    mismatches += 1;
                }
                println!(
                    "{},{},{},{:.1},{:.1}",
                    want.step, got.cmd, want.cmd, got.rho, want.rho
                );
            }
            None => {
                mismatches += 1;
                println!("{},-,{},-,{:.1}", want.step, want.cmd, want.rho);
            }
        }
    }
    if trace.rows.len() != sc.rows.len() {
        mismatches += 1;
    }
    println!(
        "scenario={} rows={} expected_rows={} mismatches={}",
        sc.name,
        trace.rows.len(),
        sc.rows.len(),
        mismatches
    );
    if let Some(dir) = cfg.out_dir()? {
        write_trace(dir, sc.name, &trace)?;
    }
    Ok(if mismatches == 0 {
        EXIT_OK
    } else {
        EXIT_UNSAFE
    })
}

/// Fixed-speed configuration used for the restricted-range proof.
pub fn restricted_range_params() -> QuantParams {
    QuantParams::new(250.0, 100.0, 1.5, (200.0, 200.0), (185.0, 185.0)).expect("valid parameters")
}
