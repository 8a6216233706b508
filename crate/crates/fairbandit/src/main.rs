use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fairbandit::audit::audit_rows;
use fairbandit::config::{EnvironmentConfig, ExperimentConfig, PolytopeConfig, ScheduleName};
use fairbandit::dataset_io::write_means;
use fairbandit::polytope_file::load_polytope;
use fairbandit::presets::{preset_plan, Preset};
use fairbandit::sweep::{run_sweep, SweepOutput, SweepPlan, WORKERS_ENV};
use fairbandit::timing::timing_report;
use fairbandit::traces::{read_traces, write_file, write_summaries};
use fairbandit::{single_plan, HarnessError, Result};
use fairbandit_core::constraints::FairPolytope;
use fairbandit_core::lp::{compute_gamma, oracle_for, solve_oracle_bruteforce};
use fairbandit_core::TOL;

const AUDIT_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "fairbandit", version, about = "Fairness-constrained bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and print its summary rows.
    Run(ExperimentArgs),
    /// Run one of the standard parameter sweeps.
    Sweep {
        #[arg(long)]
        preset: Preset,
        /// Grid values replacing the preset's defaults (ell, alpha or u).
        #[arg(long, value_delimiter = ',', value_parser = parse_number)]
        grid: Option<Vec<f64>>,
        #[command(flatten)]
        experiment: ExperimentArgs,
    },
    /// Solve max mu^T p over a polytope file.
    Lp {
        #[arg(long)]
        polytope: PathBuf,
        #[arg(long, value_delimiter = ',', value_parser = parse_number, required = true)]
        mu: Vec<f64>,
        /// Use vertex enumeration instead of the greedy solver.
        #[arg(long)]
        brute_force: bool,
    },
    /// Gap between the best and second-best vertex for mu.
    Gamma {
        #[arg(long)]
        polytope: PathBuf,
        #[arg(long, value_delimiter = ',', value_parser = parse_number, required = true)]
        mu: Vec<f64>,
    },
    /// Time Fair-EPS against Fair-OFUL on one context.
    Timing {
        #[arg(long, default_value_t = 0)]
        context: usize,
        #[command(flatten)]
        experiment: ExperimentArgs,
    },
    /// Check every row of a trace file against the fairness bounds.
    Audit {
        /// Trace CSV to check.
        file: PathBuf,
        /// Only audit runs whose id starts with this prefix (e.g. `fair-`).
        #[arg(long)]
        run_prefix: Option<String>,
        #[command(flatten)]
        experiment: ExperimentArgs,
    },
    /// Print the per-context mean rewards of the configured environment.
    Model(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EnvKind {
    Synthetic,
    GeneratedRatings,
}

#[derive(Args, Clone)]
struct ExperimentArgs {
    /// TOML experiment configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated algorithm names.
    #[arg(long, value_delimiter = ',')]
    algo: Option<Vec<String>>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    reps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    contexts: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    env: Option<EnvKind>,
    #[arg(long, value_parser = parse_number)]
    alpha: Option<f64>,
    #[arg(long)]
    ratings: Option<PathBuf>,
    #[arg(long, requires = "ratings")]
    ontology: Option<PathBuf>,
    #[arg(long)]
    min_views: Option<usize>,
    /// Uniform lower bound for every group (fractions like 1/7 accepted).
    #[arg(long, value_parser = parse_number)]
    lower: Option<f64>,
    /// Uniform upper bound for every group.
    #[arg(long, value_parser = parse_number)]
    upper: Option<f64>,
    /// Derive bounds from a risk-difference target.
    #[arg(long, value_parser = parse_number, conflicts_with_all = ["lower", "upper", "polytope"])]
    beta: Option<f64>,
    #[arg(long, conflicts_with_all = ["lower", "upper"])]
    polytope: Option<PathBuf>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    refresh_every: Option<u64>,
    #[arg(long, value_enum)]
    schedule: Option<Schedule>,
    /// Constant of the experimental schedule min(1, c/t).
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    gamma_lower_bound: Option<f64>,
    /// Write per-round traces here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write summary rows here instead of standard output.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Record wall-clock seconds in summaries.
    #[arg(long)]
    wall_clock: bool,
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Schedule {
    Experimental,
    Theoretical,
}

fn parse_number(s: &str) -> std::result::Result<f64, String> {
    let parsed = match s.split_once('/') {
        Some((a, b)) => a
            .trim()
            .parse::<f64>()
            .and_then(|a| b.trim().parse::<f64>().map(|b| a / b)),
        None => s.trim().parse::<f64>(),
    };
    parsed.map_err(|e| format!("{s:?}: {e}"))
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(a) = &self.algo {
            c.algorithms = a.clone();
        }
        if let Some(v) = self.horizon {
            c.horizon = v;
        }
        if let Some(v) = self.reps {
            c.repetitions = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = &self.contexts {
            c.contexts = Some(v.clone());
        }
        match self.env {
            Some(EnvKind::Synthetic) if !matches!(c.environment, EnvironmentConfig::Synthetic { .. }) => {
                c.environment = EnvironmentConfig::default();
            }
            Some(EnvKind::GeneratedRatings) => {
                c.environment = EnvironmentConfig::GeneratedRatings {
                    users: fairbandit_core::env::SyntheticRatings::default().users,
                    views_per_user: fairbandit_core::env::SyntheticRatings::default().views_per_user,
                    seed: c.seed,
                    min_views: fairbandit_core::env::DEFAULT_MIN_VIEWS,
                };
            }
            _ => {}
        }
        if let (Some(ratings), Some(ontology)) = (&self.ratings, &self.ontology) {
            c.environment = EnvironmentConfig::Ratings {
                ratings: ratings.clone(),
                ontology: ontology.clone(),
                group_names: fairbandit_core::env::DEFAULT_GROUP_NAMES.iter().map(|s| s.to_string()).collect(),
                arms_per_group: fairbandit_core::env::DEFAULT_ARMS_PER_GROUP.to_vec(),
                min_views: fairbandit_core::env::DEFAULT_MIN_VIEWS,
            };
        } else if self.ratings.is_some() {
            return Err(HarnessError::Config("--ratings needs --ontology".into()));
        }
        if let Some(a) = self.alpha {
            match &mut c.environment {
                EnvironmentConfig::Synthetic { alpha, .. } => *alpha = a,
                _ => return Err(HarnessError::Config("--alpha applies to the synthetic environment".into())),
            }
        }
        if let Some(m) = self.min_views {
            match &mut c.environment {
                EnvironmentConfig::Ratings { min_views, .. } | EnvironmentConfig::GeneratedRatings { min_views, .. } => {
                    *min_views = m
                }
                EnvironmentConfig::Synthetic { .. } => {
                    return Err(HarnessError::Config("--min-views applies to ratings environments".into()))
                }
            }
        }
        if self.lower.is_some() || self.upper.is_some() {
            let (l0, u0) = c.polytope.uniform_bounds().unwrap_or((0.0, 1.0));
            c.polytope = PolytopeConfig::Uniform {
                lower: self.lower.unwrap_or(l0),
                upper: self.upper.unwrap_or(u0),
            };
        }
        if let Some(beta) = self.beta {
            c.polytope = PolytopeConfig::RiskDifference { beta };
        }
        if let Some(p) = &self.polytope {
            c.polytope = PolytopeConfig::File { path: p.clone() };
        }
        if let Some(v) = self.delta {
            c.policy.delta = v;
        }
        if let Some(v) = self.sigma {
            c.policy.sigma = Some(v);
        }
        if let Some(v) = self.refresh_every {
            c.policy.refresh_every = v;
        }
        if let Some(s) = self.schedule {
            c.policy.schedule = match s {
                Schedule::Experimental => ScheduleName::Experimental,
                Schedule::Theoretical => ScheduleName::Theoretical,
            };
        }
        if let Some(v) = self.c {
            c.policy.c = v;
        }
        if let Some(v) = self.gamma_lower_bound {
            c.policy.gamma_lower_bound = Some(v);
        }
        if let Some(p) = &self.trace {
            c.output.trace = Some(p.clone());
        }
        if let Some(p) = &self.summary {
            c.output.summary = Some(p.clone());
        }
        c.output.wall_clock |= self.wall_clock;
        c.check()?;
        Ok(c)
    }
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => write_file(p, bytes),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| HarnessError::io("<stdout>", e)),
    }
}

fn execute(mut plan: SweepPlan, config: &ExperimentConfig, workers: Option<usize>) -> Result<SweepOutput> {
    plan.workers = workers;
    let out = run_sweep(&plan)?;
    if let Some(path) = &config.output.trace {
        let bytes = out.write_traces(Vec::new())?;
        write_file(path, &bytes)?;
    }
    let mut buf = Vec::new();
    write_summaries(&out.rows, &mut buf)?;
    emit(config.output.summary.as_deref(), &buf)?;
    Ok(out)
}

fn print_csv(header: Vec<String>, row: Vec<String>) -> Result<()> {
    let mut w = csv::Writer::from_writer(std::io::stdout());
    w.write_record(header).map_err(|e| HarnessError::csv("<stdout>", e))?;
    w.write_record(row).map_err(|e| HarnessError::csv("<stdout>", e))?;
    w.flush().map_err(|e| HarnessError::io("<stdout>", e))
}

fn arm_columns(prefix: &str, k: usize) -> impl Iterator<Item = String> + '_ {
    (1..=k).map(move |i| format!("{prefix}{i}"))
}

fn audit_polytope(args: &ExperimentArgs) -> Result<FairPolytope> {
    if let Some(p) = &args.polytope {
        return load_polytope(p);
    }
    let config = args.resolve()?;
    let model = config.model()?;
    config.polytope.build(model.groups())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(args) => {
            let config = args.resolve()?;
            execute(single_plan(&config)?, &config, args.workers)?;
        }
        Command::Sweep {
            preset,
            grid,
            experiment,
        } => {
            let config = experiment.resolve()?;
            execute(preset_plan(preset, &config, grid)?, &config, experiment.workers)?;
        }
        Command::Lp {
            polytope,
            mu,
            brute_force,
        } => {
            let p = load_polytope(&polytope)?;
            let sol = if brute_force {
                solve_oracle_bruteforce(&mu, &p)?
            } else {
                oracle_for(&p)?.solve(&mu)?
            };
            let mut header = vec!["solver_tag".to_string(), "objective".to_string()];
            header.extend(arm_columns("p", p.k()));
            let mut row = vec![sol.solver.to_string(), sol.objective.to_string()];
            row.extend(sol.p.iter().map(f64::to_string));
            print_csv(header, row)?;
        }
        Command::Gamma { polytope, mu } => {
            let p = load_polytope(&polytope)?;
            let g = compute_gamma(&mu, &p)?;
            let mut header: Vec<String> = ["gamma", "vertex_count", "degenerate"].map(String::from).to_vec();
            header.extend(arm_columns("best_p", p.k()));
            header.extend(arm_columns("second_p", p.k()));
            let mut row = vec![g.gamma.to_string(), g.vertex_count.to_string(), g.degenerate.to_string()];
            row.extend(g.best_vertex.iter().map(f64::to_string));
            row.extend(g.second_vertex.iter().map(f64::to_string));
            print_csv(header, row)?;
        }
        Command::Timing { context, experiment } => {
            let config = experiment.resolve()?;
            let model = config.model()?;
            let polytope = config.polytope.build(model.groups())?;
            let report = timing_report(
                &model,
                &polytope,
                context,
                config.horizon,
                config.seed,
                &config.policy.params()?,
            )?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.serialize(&report).map_err(|e| HarnessError::csv("<timing>", e))?;
            let bytes = w.into_inner().map_err(|e| HarnessError::io("<timing>", e.into_error()))?;
            emit(config.output.summary.as_deref(), &bytes)?;
        }
        Command::Audit {
            file,
            run_prefix,
            experiment,
        } => {
            let polytope = audit_polytope(&experiment)?;
            let input = std::fs::File::open(&file).map_err(|e| HarnessError::io(&file, e))?;
            let mut rows = read_traces(input, &file)?;
            if let Some(prefix) = &run_prefix {
                rows.retain(|r| r.run_id.starts_with(prefix.as_str()));
            }
            let report = audit_rows(&rows, &polytope, TOL)?;
            println!(
                "audited {} rows in {} runs: {} violations",
                report.rows,
                report.runs,
                report.findings.len()
            );
            for f in report.findings.iter().take(20) {
                println!("  {} t={} context={} group={} mass={}", f.run_id, f.t, f.context, f.group + 1, f.mass);
            }
            if !report.passed() {
                return Ok(ExitCode::from(AUDIT_FAILED));
            }
        }
        Command::Model(args) => {
            let config = args.resolve()?;
            let model = config.model()?;
            let mut buf = Vec::new();
            write_means(&model, &mut buf)?;
            emit(config.output.summary.as_deref(), &buf)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
