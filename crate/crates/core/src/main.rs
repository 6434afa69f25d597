// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sensemix::config::ScenarioConfig;
use sensemix::envelope::lower_convex_envelope;
use sensemix::grid::{build_front, DesignGrid, FrontSample};
use sensemix::linalg::CMatrix;
use sensemix::lp::random_front_fuzz;
use sensemix::montecarlo::{estimate_pd, estimate_pd_mixture, estimate_pfa, McReport, SimConfig};
use sensemix::radar::{
    principal_eigen, sample_powers, sensing_optimal_distribution, DetectionCurve, RadarScenario,
};
use sensemix::table::{
    write_check_table, write_front_table, write_fuzz_table, write_mc_table, write_plan_table,
    FrontRecord, McRecord, PlanRecord,
};
use sensemix::verify::{all_passed, run_verify, VerifyConfig};

#[derive(Parser)]
#[command(
    name = "sensemix",
    version,
    about = "Sensing-optimal randomized transmit strategies over resource-performance fronts"
)]
struct Cli {
    /// Master seed for every randomized suite
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Write the output table here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output encoding
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Cost-binning tolerance when building fronts (default: 1e-9 of the
    /// largest cost)
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the resource-performance front of a scenario or a design grid
    Front(FrontArgs),
    /// Front annotated with its lower convex envelope and multipliers
    Envelope(FrontArgs),
    /// Optimal randomized power plans for one or more budgets
    Plan(PlanArgs),
    /// Monte Carlo detector runs against the closed-form operating points
    Simulate(SimulateArgs),
    /// Run the verification suites; nonzero exit on any failure
    Verify(VerifyArgs),
    /// Fuzz envelope mixtures against the exhaustive oracle
    Fuzz(FuzzArgs),
}

#[derive(clap::Args)]
struct FrontArgs {
    /// Scenario config (JSON); the front is sampled over transmit powers
    #[arg(long, conflicts_with = "grid")]
    scenario: Option<PathBuf>,
    /// Design grid table (design_id,cost,perf) to use directly
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Largest power to sample (scenario input only)
    #[arg(long)]
    pmax: Option<f64>,
    /// Number of sampled powers (scenario input only)
    #[arg(long, default_value_t = 201)]
    resolution: usize,
}

#[derive(clap::Args)]
struct PlanArgs {
    /// Scenario config (JSON)
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Comma-separated power budgets; default: the scenario's own budget
    #[arg(long)]
    budgets: Option<String>,
}

#[derive(clap::Args)]
struct SimulateArgs {
    /// Scenario config (JSON)
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Trials per run
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// Scenario config (JSON)
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Trials per Monte Carlo check
    #[arg(long, default_value_t = 20_000)]
    trials: usize,
    /// Random fronts checked against the oracle
    #[arg(long, default_value_t = 300)]
    fuzz_cases: usize,
    /// Corrupt a certified plan on purpose to demonstrate the failure path
    #[arg(long)]
    inject_fault: bool,
}

#[derive(clap::Args)]
struct FuzzArgs {
    #[arg(long, default_value_t = 1000)]
    cases: usize,
    /// Largest random grid size
    #[arg(long, default_value_t = 200)]
    grid_size: usize,
}

struct CliError {
    message: String,
}

impl CliError {
    fn new(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
        }
    }
}

impl<E: fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError {
            message: e.to_string(),
        }
    }
}

/// Scenario used when no config file is given: two antennas, unit detection
/// scale (snr_scale times the top gram eigenvalue is 1), rare false alarms.
fn default_scenario() -> RadarScenario {
    RadarScenario {
        gram: CMatrix::identity(2),
        mean_square_amp: 1.0,
        snapshots: 10,
        noise_psd: 10.0,
        pfa: 1e-5,
        power_budget: 7.0,
    }
}

fn load_scenario(path: &Option<PathBuf>) -> Result<RadarScenario, CliError> {
    match path {
        Some(p) => Ok(ScenarioConfig::from_file(p)?.to_scenario()?),
        None => Ok(default_scenario()),
    }
}

fn scenario_curve(scenario: &RadarScenario) -> Result<DetectionCurve, CliError> {
    scenario.validate()?;
    let eigen = principal_eigen(&scenario.gram)?;
    let alpha = scenario.snr_scale() * eigen.lambda_max;
    if alpha <= 0.0 {
        return Err(CliError::new("target channel carries no power"));
    }
    Ok(DetectionCurve::new(alpha, scenario.pfa)?)
}

fn emit(cli: &Cli, csv: String, json: String) -> Result<(), CliError> {
    let text = match cli.format {
        Format::Csv => csv,
        Format::Json => json,
    };
    match &cli.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::new(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_lines<T: serde::Serialize>(rows: &[T]) -> String {
    let mut text = serde_json::to_string_pretty(rows).expect("rows serialize");
    text.push('\n');
    text
}

/// Build the front and envelope from either input source.
fn load_front(
    cli: &Cli,
    args: &FrontArgs,
) -> Result<(DesignGrid, FrontSample), CliError> {
    let grid = match &args.grid {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::new(format!("cannot read {}: {e}", path.display())))?;
            sensemix::table::parse_grid_table(&text)?
        }
        None => {
            let scenario = load_scenario(&args.scenario)?;
            let curve = scenario_curve(&scenario)?;
            let p_t = curve.tangent_power();
            let p_max = args
                .pmax
                .unwrap_or_else(|| (2.0 * p_t).max(1.5 * scenario.power_budget).max(1.0));
            if !(p_max > 0.0) || !p_max.is_finite() {
                return Err(CliError::new(format!("pmax {p_max} is not a positive power")));
            }
            let mut powers = sample_powers(p_max, args.resolution.max(2));
            if p_t > 0.0 && p_t < p_max {
                powers.push(p_t);
            }
            sensemix::radar::power_design_grid(&curve, &powers)
        }
    };
    let bin_tol = cli.tolerance.unwrap_or_else(|| grid.default_bin_tol());
    if bin_tol < 0.0 || !bin_tol.is_finite() {
        return Err(CliError::new(format!("tolerance {bin_tol} is invalid")));
    }
    let front = build_front(&grid, bin_tol)?;
    Ok((grid, front))
}

fn front_records(front: &FrontSample, with_duals: bool) -> Result<Vec<FrontRecord>, CliError> {
    let env = lower_convex_envelope(front)?;
    let mut rows: Vec<FrontRecord> = front
        .points
        .iter()
        .map(|p| FrontRecord {
            xi: p.xi,
            g: p.g,
            is_contact: false,
            lambda: None,
            mu: None,
        })
        .collect();
    for (k, contact) in env.contacts.iter().enumerate() {
        rows[contact.index].is_contact = true;
        if with_duals {
            if let Some(seg) = env.segments.get(k) {
                rows[contact.index].lambda = Some(seg.lambda);
                rows[contact.index].mu = Some(seg.mu);
            }
        }
    }
    Ok(rows)
}

fn cmd_front(cli: &Cli, args: &FrontArgs, with_duals: bool) -> Result<ExitCode, CliError> {
    let (_, front) = load_front(cli, args)?;
    let rows = front_records(&front, with_duals)?;
    emit(cli, write_front_table(&rows), json_lines(&rows))?;
    Ok(ExitCode::SUCCESS)
}

fn parse_budgets(spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::new(format!("budget `{s}` is not a number")))
        })
        .collect()
}

fn cmd_plan(cli: &Cli, args: &PlanArgs) -> Result<ExitCode, CliError> {
    let scenario = load_scenario(&args.scenario)?;
    let budgets = match &args.budgets {
        Some(spec) => parse_budgets(spec)?,
        None => vec![scenario.power_budget],
    };
    if budgets.is_empty() {
        return Err(CliError::new("no budgets given"));
    }
    let mut rows = Vec::new();
    for &budget in &budgets {
        let mut s = scenario.clone();
        s.power_budget = budget;
        let mixture = sensing_optimal_distribution(&s)?;
        for (k, atom) in mixture.atoms.iter().enumerate() {
            rows.push(PlanRecord {
                budget,
                atom: k,
                weight: atom.weight,
                power: atom.power,
                rho: atom.rho,
                pd: atom.pd,
                expected_pd: mixture.expected_pd,
                deterministic_pd: mixture.deterministic_pd,
                inflection_power: mixture.inflection_power,
                tangent_power: mixture.tangent_power,
            });
        }
    }
    emit(cli, write_plan_table(&rows), json_lines(&rows))?;
    Ok(ExitCode::SUCCESS)
}

fn mc_record(label: &str, report: &McReport) -> McRecord {
    let (z_mean, z_se, z_exp) = match report.z_mean_h0.or(report.z_mean_h1) {
        Some(m) => (Some(m.sample_mean), Some(m.standard_error), Some(m.expected)),
        None => (None, None, None),
    };
    McRecord {
        label: label.to_string(),
        trials: report.trials,
        hits: report.hits,
        empirical: report.empirical_prob,
        target: report.target_prob,
        ci_half_width: report.ci_half_width,
        seed: report.seed,
        z_mean,
        z_standard_error: z_se,
        z_expected: z_exp,
    }
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> Result<ExitCode, CliError> {
    let scenario = load_scenario(&args.scenario)?;
    if !(scenario.power_budget > 0.0) {
        return Err(CliError::new("simulate needs a positive power budget"));
    }
    let eigen = principal_eigen(&scenario.gram)?;
    let covariance = eigen.with_power(scenario.power_budget).covariance();
    let sim = SimConfig {
        scenario: scenario.clone(),
        covariance,
        trials: args.trials,
        master_seed: cli.seed,
    };
    let mixture = sensing_optimal_distribution(&scenario)?;
    let rows = vec![
        mc_record("false-alarm", &estimate_pfa(&sim)?),
        mc_record("detection", &estimate_pd(&sim)?),
        mc_record(
            "mixture",
            &estimate_pd_mixture(&scenario, &mixture, args.trials, cli.seed)?,
        ),
    ];
    emit(cli, write_mc_table(&rows), json_lines(&rows))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> Result<ExitCode, CliError> {
    let scenario = load_scenario(&args.scenario)?;
    let cfg = VerifyConfig {
        seed: cli.seed,
        fuzz_cases: args.fuzz_cases,
        mc_trials: args.trials,
        inject_fault: args.inject_fault,
        ..VerifyConfig::default()
    };
    let records = run_verify(&scenario, &cfg);
    emit(cli, write_check_table(&records), json_lines(&records))?;
    if all_passed(&records) {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn cmd_fuzz(cli: &Cli, args: &FuzzArgs) -> Result<ExitCode, CliError> {
    let report = random_front_fuzz(cli.seed, args.cases, args.grid_size);
    emit(cli, write_fuzz_table(&report.rows), json_lines(&report.rows))?;
    if report.all_passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        if let Some((case, why)) = &report.first_failure {
            eprintln!("fuzz case {case} failed: {why}");
        }
        Ok(ExitCode::from(1))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Front(args) => cmd_front(&cli, args, false),
        Command::Envelope(args) => cmd_front(&cli, args, true),
        Command::Plan(args) => cmd_plan(&cli, args),
        Command::Simulate(args) => cmd_simulate(&cli, args),
        Command::Verify(args) => cmd_verify(&cli, args),
        Command::Fuzz(args) => cmd_fuzz(&cli, args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(2)
        }
    }
}
