//! Command-line front end and the CSV result formats.
//!
//! Results CSV (schema `v1`), one summary row followed by one row per slot:
//!
//! ```text
//! schema,row,scenario_id,strategy,seed,objective_p1,objective_p2,iterations,converged,slot,x_u,y_u,tau,worst_eaves,p_0,...,p_{M-1}
//! ```
//!
//! Summary rows leave the per-slot columns empty and slot rows leave the
//! summary columns empty. The objective trace goes to a companion file with
//! columns `iteration,objective_p2`. Floats carry 12 significant digits.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::channel::{compute_link_gains, ChannelParams};
use crate::oracle::{grid_search_joint, GridSpec};
use crate::power_opt::PowerConstraints;
use crate::scenario::{generate_scenario, Scenario, ScenarioConfig};
use crate::solver::{run_algorithm1, run_baseline_with, SolveResult, SolverConfig, Strategy};

pub const SCHEMA_VERSION: &str = "v1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_ORACLE_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "uavsec", version, about = "Secrecy-aware UAV relay placement and uplink power control")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a scenario file from a JSON config.
    Generate {
        /// Scenario config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's `rng_seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one strategy and write the results CSV plus an objective trace.
    Solve {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = StrategyArg::Joint)]
        strategy: StrategyArg,
        #[arg(long)]
        out: PathBuf,
        /// Trace file; defaults to `<out stem>.trace.csv`.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Append wall-clock time to the summary row.
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Run all strategies on one scenario.
    Compare {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Compare the solver against exhaustive grid search on a small scenario.
    OracleCheck {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 101)]
        grid_res: usize,
        #[arg(long, default_value_t = 201)]
        power_levels: usize,
        /// Fail (exit 2) when solver/oracle falls below this.
        #[arg(long, default_value_t = 0.98)]
        min_ratio: f64,
        #[command(flatten)]
        params: ParamArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Reference SNR at 1 m (linear).
    #[arg(long, default_value_t = 1e4)]
    pub lambda0: f64,
    /// Average power budget per user, watts.
    #[arg(long, default_value_t = 0.1)]
    pub p_avg: f64,
    /// Peak power per user, watts.
    #[arg(long, default_value_t = 0.2)]
    pub p_max: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub chi: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Recorded in the output; the solver itself is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl ParamArgs {
    pub fn channel(&self) -> anyhow::Result<ChannelParams> {
        Ok(ChannelParams::from_lambda0(self.lambda0)?)
    }

    pub fn constraints(&self) -> anyhow::Result<PowerConstraints> {
        Ok(PowerConstraints::new(self.p_avg, self.p_max)?)
    }

    pub fn solver(&self) -> anyhow::Result<SolverConfig> {
        let cfg = SolverConfig {
            chi: self.chi,
            max_iterations: self.max_iter,
            ..SolverConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum StrategyArg {
    FixedFull,
    PositionOnly,
    PowerOnly,
    Joint,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::FixedFull => Strategy::FixedFull,
            StrategyArg::PositionOnly => Strategy::PositionOnly,
            StrategyArg::PowerOnly => Strategy::PowerOnly,
            StrategyArg::Joint => Strategy::Joint,
        }
    }
}

/// `%.12g`-style formatting.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        trim_zeros(&fixed)
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotRow {
    pub slot: usize,
    pub x_u: f64,
    pub y_u: f64,
    pub powers: Vec<f64>,
    pub tau: f64,
    pub worst_eaves: usize,
}

/// One solved strategy, as written to the results CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub scenario_id: String,
    pub strategy: Strategy,
    pub seed: u64,
    pub objective_p1: f64,
    pub objective_p2: f64,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time: f64,
    pub slots: Vec<SlotRow>,
}

impl RunRecord {
    pub fn new(
        scenario_id: &str,
        strategy: Strategy,
        seed: u64,
        scenario: &Scenario,
        params: &ChannelParams,
        result: &SolveResult,
        wall_time: f64,
    ) -> Self {
        let gains = compute_link_gains(scenario, &result.trajectory, params);
        let powers = &result.powers.powers;
        let slots = result
            .trajectory
            .positions
            .iter()
            .enumerate()
            .map(|(n, q)| SlotRow {
                slot: n,
                x_u: q.x,
                y_u: q.y,
                powers: result.powers.slot(n),
                tau: gains.tau(powers, n),
                worst_eaves: gains.worst_wiretap(powers, n).0,
            })
            .collect();
        Self {
            scenario_id: scenario_id.to_string(),
            strategy,
            seed,
            objective_p1: result.p1_objective,
            objective_p2: result.p2_objective,
            iterations: result.iterations,
            converged: result.converged,
            wall_time,
            slots,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W, with_timing: bool) -> anyhow::Result<()> {
        let num_users = self.slots.first().map_or(0, |s| s.powers.len());
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = [
            "schema", "row", "scenario_id", "strategy", "seed", "objective_p1", "objective_p2",
            "iterations", "converged", "slot", "x_u", "y_u", "tau", "worst_eaves",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        header.extend((0..num_users).map(|i| format!("p_{i}")));
        if with_timing {
            header.push("wall_time".into());
        }
        w.write_record(&header)?;

        let prefix = |row: &str| {
            vec![
                SCHEMA_VERSION.to_string(),
                row.to_string(),
                self.scenario_id.clone(),
                self.strategy.to_string(),
                self.seed.to_string(),
            ]
        };
        let mut summary = prefix("summary");
        summary.extend([
            fmt_float(self.objective_p1),
            fmt_float(self.objective_p2),
            self.iterations.to_string(),
            self.converged.to_string(),
        ]);
        summary.extend(std::iter::repeat(String::new()).take(5 + num_users));
        if with_timing {
            summary.push(fmt_float(self.wall_time));
        }
        w.write_record(&summary)?;

        for s in &self.slots {
            let mut row = prefix("slot");
            row.extend(std::iter::repeat(String::new()).take(4));
            row.extend([
                s.slot.to_string(),
                fmt_float(s.x_u),
                fmt_float(s.y_u),
                fmt_float(s.tau),
                s.worst_eaves.to_string(),
            ]);
            row.extend(s.powers.iter().map(|&p| fmt_float(p)));
            if with_timing {
                row.push(String::new());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn write_trace_csv<W: Write>(out: W, trace: &[f64]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "objective_p2"])?;
    for (j, v) in trace.iter().enumerate() {
        w.write_record([j.to_string(), fmt_float(*v)])?;
    }
    w.flush()?;
    Ok(())
}

fn scenario_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into())
}

fn default_trace_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.trace.csv"))
}

fn load_scenario(path: &Path) -> anyhow::Result<Scenario> {
    Scenario::load(path).with_context(|| format!("loading scenario {}", path.display()))
}

pub fn cmd_generate(config: &Path, seed: Option<u64>, out: &Path) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(config).with_context(|| format!("reading config {}", config.display()))?;
    let mut cfg: ScenarioConfig =
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", config.display()))?;
    if let Some(seed) = seed {
        cfg.rng_seed = seed;
    }
    let scenario = generate_scenario(&cfg)?;
    let mut json = scenario.to_json()?;
    json.push('\n');
    std::fs::write(out, json).with_context(|| format!("writing {}", out.display()))?;
    println!(
        "generated M={} K={} N={} seed={} -> {}",
        cfg.num_users,
        cfg.num_eavesdroppers,
        cfg.num_slots,
        cfg.rng_seed,
        out.display()
    );
    Ok(())
}

pub fn cmd_solve(
    scenario_path: &Path,
    strategy: Strategy,
    out: &Path,
    trace: Option<&Path>,
    timing: bool,
    params: &ParamArgs,
) -> anyhow::Result<RunRecord> {
    let scenario = load_scenario(scenario_path)?;
    let channel = params.channel()?;
    let constraints = params.constraints()?;
    let config = params.solver()?;

    let start = Instant::now();
    let result = run_baseline_with(&scenario, &channel, &constraints, strategy, &config)?;
    let elapsed = start.elapsed().as_secs_f64();

    let record = RunRecord::new(&scenario_id(scenario_path), strategy, params.seed, &scenario, &channel, &result, elapsed);
    let file = std::fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
    record.write_csv(std::io::BufWriter::new(file), timing)?;
    let trace_path = trace.map(Path::to_path_buf).unwrap_or_else(|| default_trace_path(out));
    let file = std::fs::File::create(&trace_path).with_context(|| format!("creating {}", trace_path.display()))?;
    write_trace_csv(std::io::BufWriter::new(file), &result.objective_trace)?;

    println!(
        "{} p1={} p2={} iterations={} converged={} wall_time={:.3}s",
        strategy,
        fmt_float(result.p1_objective),
        fmt_float(result.p2_objective),
        result.iterations,
        result.converged,
        elapsed
    );
    Ok(record)
}

pub fn cmd_compare(scenario_path: &Path, out: &Path, params: &ParamArgs) -> anyhow::Result<Vec<RunRecord>> {
    let scenario = load_scenario(scenario_path)?;
    let channel = params.channel()?;
    let constraints = params.constraints()?;
    let config = params.solver()?;
    let id = scenario_id(scenario_path);

    let mut records = Vec::with_capacity(Strategy::ALL.len());
    for strategy in Strategy::ALL {
        let start = Instant::now();
        let result = run_baseline_with(&scenario, &channel, &constraints, strategy, &config)?;
        let elapsed = start.elapsed().as_secs_f64();
        records.push(RunRecord::new(&id, strategy, params.seed, &scenario, &channel, &result, elapsed));
    }

    let file = std::fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record(["schema", "scenario_id", "strategy", "seed", "objective_p1", "objective_p2", "iterations", "converged"])?;
    for r in &records {
        w.write_record([
            SCHEMA_VERSION.to_string(),
            r.scenario_id.clone(),
            r.strategy.to_string(),
            r.seed.to_string(),
            fmt_float(r.objective_p1),
            fmt_float(r.objective_p2),
            r.iterations.to_string(),
            r.converged.to_string(),
        ])?;
        println!("{:<14} p1={}", r.strategy, fmt_float(r.objective_p1));
    }
    w.flush()?;
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub solver_objective: f64,
    pub oracle_objective: f64,
    pub ratio: f64,
    pub passed: bool,
}

/// Solver over oracle; `0/0` counts as 1 and a positive solver value over a
/// zero oracle as infinity.
pub fn objective_ratio(solver: f64, oracle: f64) -> f64 {
    if oracle > 0.0 {
        solver / oracle
    } else if solver > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

pub fn cmd_oracle_check(scenario_path: &Path, grid: GridSpec, min_ratio: f64, params: &ParamArgs) -> anyhow::Result<OracleReport> {
    let scenario = load_scenario(scenario_path)?;
    let channel = params.channel()?;
    let constraints = params.constraints()?;
    let config = params.solver()?;
    if !min_ratio.is_finite() {
        bail!("--min-ratio must be finite");
    }
    let oracle = grid_search_joint(&scenario, &channel, &constraints, &grid)?;
    let solved = run_algorithm1(&scenario, &channel, &constraints, &config)?;
    let ratio = objective_ratio(solved.p1_objective, oracle.objective_p1);
    let report = OracleReport {
        solver_objective: solved.p1_objective,
        oracle_objective: oracle.objective_p1,
        ratio,
        passed: ratio >= min_ratio,
    };
    println!(
        "solver={} oracle={} ratio={} floor={} {}",
        fmt_float(report.solver_objective),
        fmt_float(report.oracle_objective),
        fmt_float(report.ratio),
        fmt_float(min_ratio),
        if report.passed { "PASS" } else { "FAIL" }
    );
    Ok(report)
}

fn dispatch(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Generate { config, seed, out } => {
            cmd_generate(&config, seed, &out)?;
            Ok(EXIT_OK)
        }
        Command::Solve { scenario, strategy, out, trace, timing, params } => {
            cmd_solve(&scenario, strategy.into(), &out, trace.as_deref(), timing, &params)?;
            Ok(EXIT_OK)
        }
        Command::Compare { scenario, out, params } => {
            cmd_compare(&scenario, &out, &params)?;
            Ok(EXIT_OK)
        }
        Command::OracleCheck { scenario, grid_res, power_levels, min_ratio, params } => {
            let grid = GridSpec { position_resolution: grid_res, power_levels };
            let report = cmd_oracle_check(&scenario, grid, min_ratio, &params)?;
            Ok(if report.passed { EXIT_OK } else { EXIT_ORACLE_FAILED })
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}
