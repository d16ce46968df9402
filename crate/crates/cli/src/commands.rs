use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use oqw_core::coin::validate_coin;
use oqw_core::registry::{self, EXAMPLE_IDS};
use oqw_core::simulate::{
    empirical_stats, return_mass_partial_sum, simulate_ct_ensemble, simulate_discrete_ensemble, Execution,
    LatticeBudget, Trajectory,
};
use oqw_core::{classify_coin, Coin, DensityOperator, NumericPolicy};

use crate::report::{fmt12, verdict_json, verdict_text};
use crate::spec_file::CoinSpecFile;
use crate::{CliError, ExitStatus, Outcome};

#[derive(Debug, Parser)]
#[command(name = "oqw", version, about = "Recurrence analysis of homogeneous open quantum walks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the normalization of a coin file.
    Validate { path: PathBuf },
    /// Classify a coin as recurrent, transient or split.
    Classify {
        path: PathBuf,
        /// Zero threshold for drifts.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Simulate trajectories, or evolve the site distribution exactly.
    Simulate(SimulateArgs),
    /// Classify the built-in examples and compare with their known verdicts.
    Reproduce {
        /// Example id, or `all`.
        #[arg(default_value = "all")]
        id: String,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub path: PathBuf,
    /// Number of steps (discrete-time coins).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Time horizon (continuous-time coins).
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub trajectories: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Exact evolution of the return mass instead of Monte Carlo.
    #[arg(long)]
    pub exact: bool,
    /// CSV output: `k,p00,S` with --exact, otherwise the trajectory dump `traj,t,x1[,x2]`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Initial internal state: `mixed` or `e<k>` (1-based basis vector).
    #[arg(long, default_value = "mixed")]
    pub initial: String,
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Validate { path } => validate(&path),
        Command::Classify { path, tolerance, json } => classify(&path, tolerance, json),
        Command::Simulate(args) => simulate(&args),
        Command::Reproduce { id } => reproduce(&id),
    }
}

fn kind_label(coin: &Coin) -> &'static str {
    match coin {
        Coin::OneD(_) => "oqw1d",
        Coin::TwoD(_) => "oqw2d",
        Coin::Continuous(_) => "ctoqw2d",
    }
}

pub fn validate(path: &Path) -> Result<Outcome, CliError> {
    let coin = CoinSpecFile::load(path)?.to_coin()?;
    let report = validate_coin(&coin, &NumericPolicy::default());
    let mut out = String::new();
    let _ = writeln!(out, "kind: {}", kind_label(&coin));
    let _ = writeln!(out, "dimension: {}", coin.dim());
    for line in &report.messages {
        let _ = writeln!(out, "check: {line}");
    }
    let _ = writeln!(out, "deficiency: {:.6e}", report.deficiency);
    let _ = writeln!(out, "valid: {}", report.ok);
    Ok(Outcome {
        stdout: out,
        status: if report.ok { ExitStatus::Ok } else { ExitStatus::Numeric },
    })
}

pub fn classify(path: &Path, tolerance: Option<f64>, json: bool) -> Result<Outcome, CliError> {
    let coin = CoinSpecFile::load(path)?.to_coin()?;
    let mut policy = NumericPolicy::default();
    if let Some(t) = tolerance {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(CliError::structural(format!("tolerance must be a nonnegative number, got {t}")));
        }
        policy.drift_zero_tol = t;
    }
    let verdict = classify_coin(&coin, &policy)?;
    let stdout = if json {
        let mut s = serde_json::to_string_pretty(&verdict_json(&verdict)).expect("JSON values serialize");
        s.push('\n');
        s
    } else {
        verdict_text(&verdict)
    };
    Ok(Outcome::ok(stdout))
}

fn initial_state(spec: &str, d: usize) -> Result<DensityOperator, CliError> {
    if spec == "mixed" {
        return Ok(DensityOperator::maximally_mixed(d));
    }
    let index = spec
        .strip_prefix('e')
        .and_then(|k| k.parse::<usize>().ok())
        .filter(|&k| (1..=d).contains(&k))
        .ok_or_else(|| {
            CliError::structural(format!("initial state must be `mixed` or e1..e{d}, got `{spec}`"))
        })?;
    Ok(DensityOperator::basis_state(d, index - 1))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::structural(format!("cannot write {}: {e}", path.display())))
}

pub fn simulate(args: &SimulateArgs) -> Result<Outcome, CliError> {
    let coin = CoinSpecFile::load(&args.path)?.to_coin()?;
    oqw_core::coin::ensure_valid(&coin, &NumericPolicy::default())?;
    let rho0 = initial_state(&args.initial, coin.dim())?;
    let execution = Execution::default();
    let mut out = String::new();

    if args.exact {
        let steps = args
            .steps
            .ok_or_else(|| CliError::structural("--exact needs --steps"))?;
        if matches!(coin, Coin::Continuous(_)) {
            return Err(CliError::structural("--exact applies to discrete-time coins only"));
        }
        let sums = return_mass_partial_sum(&coin, &rho0, steps, &LatticeBudget::default(), execution)?;
        let _ = writeln!(out, "mode: exact");
        let _ = writeln!(out, "steps: {steps}");
        let _ = writeln!(out, "S({steps}): {}", fmt12(sums[steps]));
        let quarter = steps / 4;
        let _ = writeln!(out, "S({quarter}): {}", fmt12(sums[quarter]));
        if let Some(path) = &args.csv {
            let mut csv = String::from("k,p00,S\n");
            let mut prev = 0.0;
            for (k, s) in sums.iter().enumerate() {
                let _ = writeln!(csv, "{k},{},{}", fmt12(s - prev), fmt12(*s));
                prev = *s;
            }
            write_file(path, &csv)?;
        }
        return Ok(Outcome::ok(out));
    }

    let trajectories = match &coin {
        Coin::Continuous(ct) => {
            let tmax = args
                .tmax
                .ok_or_else(|| CliError::structural("continuous-time coins need --tmax"))?;
            simulate_ct_ensemble(ct, &rho0, tmax, args.trajectories, args.seed, execution)?
        }
        _ => {
            let steps = args
                .steps
                .ok_or_else(|| CliError::structural("discrete-time coins need --steps"))?;
            simulate_discrete_ensemble(&coin, &rho0, steps, args.trajectories, args.seed, execution)?
        }
    };
    let stats = empirical_stats(&trajectories)?;
    let axes = if matches!(coin, Coin::OneD(_)) { 1 } else { 2 };
    let _ = writeln!(out, "mode: monte-carlo");
    let _ = writeln!(out, "trajectories: {}", stats.trajectories);
    let _ = writeln!(out, "seed: {}", args.seed);
    let _ = writeln!(out, "horizon: {}", fmt12(stats.horizon));
    for axis in 0..axes {
        let (lo, hi) = stats.drift_ci[axis];
        let _ = writeln!(
            out,
            "drift_x{}: {} (95% CI [{}, {}])",
            axis + 1,
            fmt12(stats.drift[axis]),
            fmt12(lo),
            fmt12(hi)
        );
    }
    let _ = writeln!(out, "returns_to_origin: {}", stats.return_count);
    let _ = writeln!(out, "mean_time_at_origin: {}", fmt12(stats.mean_time_at_origin));
    if let Some(path) = &args.csv {
        write_file(path, &trajectory_csv(&trajectories, axes))?;
    }
    Ok(Outcome::ok(out))
}

fn trajectory_csv(trajectories: &[Trajectory], axes: usize) -> String {
    let mut csv = String::from(if axes == 1 { "traj,t,x1\n" } else { "traj,t,x1,x2\n" });
    for (k, t) in trajectories.iter().enumerate() {
        for (n, x) in t.positions.iter().enumerate() {
            let time = match &t.jump_times {
                Some(times) => fmt12(times[n]),
                None => n.to_string(),
            };
            if axes == 1 {
                let _ = writeln!(csv, "{k},{time},{}", x[0]);
            } else {
                let _ = writeln!(csv, "{k},{time},{},{}", x[0], x[1]);
            }
        }
    }
    csv
}

pub fn reproduce(id: &str) -> Result<Outcome, CliError> {
    let ids: Vec<&str> = if id == "all" { EXAMPLE_IDS.to_vec() } else { vec![id] };
    let policy = NumericPolicy::default();
    let mut out = String::new();
    let mut passed = 0;
    for id in &ids {
        let example = registry::example(id)?;
        let outcome = registry::run_example(&example, &policy);
        let ok = outcome.pass();
        passed += usize::from(ok);
        let _ = writeln!(out, "{:<8} {}  {}", example.id, if ok { "PASS" } else { "FAIL" }, example.summary);
        for case in &outcome.cases {
            let observed = match &case.observed {
                Ok(kind) => kind.to_string(),
                Err(e) => format!("error: {e}"),
            };
            let _ = writeln!(
                out,
                "           {:<4}  {:<22} expected {:<9} got {}",
                if case.pass { "ok" } else { "FAIL" },
                case.label,
                case.expected.to_string(),
                observed
            );
        }
    }
    let _ = writeln!(out, "{passed}/{} PASS", ids.len());
    Ok(Outcome {
        stdout: out,
        status: if passed == ids.len() { ExitStatus::Ok } else { ExitStatus::Numeric },
    })
}
