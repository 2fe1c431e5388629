//! Command-line front end: `simulate`, `oracle`, and `ingest`.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 for
//! runtime faults (infeasible search spaces, malformed data files,
//! failed runs). `simulate` writes nothing on failure.

use crate::environment::derive_seed;
use crate::harness::{
    self, sublinearity_check, CheckpointSchedule, PolicySpec, RegretNotion, RegretTrace, RunSpec,
};
use crate::ingest;
use crate::model::{ProblemInstance, UtilityFunction};
use crate::optimizer::OptimizerConfig;
use crate::policies::{PolicyConfig, PolicyFamily, Treatment};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

/// Experiment description consumed by `simulate`.
///
/// `instance` is either an inline instance object or `{"path": "..."}`
/// relative to the config file. Flags override `horizon`, `seeds`, and
/// `output`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub instance: InstanceRef,
    pub policies: Vec<PolicyEntry>,
    pub horizon: u64,
    pub seeds: SeedSpec,
    #[serde(default)]
    pub checkpoints: CheckpointSchedule,
    pub output: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceRef {
    Path { path: PathBuf },
    Inline(Box<ProblemInstance>),
}

/// Seeds as an explicit list or `(base_seed, count)`; derived seeds are
/// `hash(base_seed, run_index)`, so sweeps are reproducible and
/// extendable.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    List(Vec<u64>),
    Derived { base_seed: u64, count: u64 },
}

impl SeedSpec {
    pub fn materialize(&self) -> Vec<u64> {
        match self {
            SeedSpec::List(seeds) => seeds.clone(),
            SeedSpec::Derived { base_seed, count } => {
                (0..*count).map(|i| derive_seed(*base_seed, i)).collect()
            }
        }
    }
}

/// One policy row of the experiment: an id plus the policy itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyEntry {
    pub id: String,
    #[serde(flatten)]
    pub policy: PolicyEntryKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicyEntryKind {
    Greedy {
        epsilon_scale: f64,
        treatment: TreatmentConfig,
    },
    Ucb {
        confidence_scale: f64,
        treatment: TreatmentConfig,
        #[serde(default)]
        baseline_single_type: bool,
    },
    Oracle {
        #[serde(default)]
        notion: NotionConfig,
    },
    Random {
        #[serde(default)]
        notion: NotionConfig,
    },
    Fixed {
        slots: Vec<usize>,
        #[serde(default)]
        notion: NotionConfig,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreatmentConfig {
    Personalized,
    Equal {
        utility: UtilityFunction,
        #[serde(default)]
        optimizer: OptimizerConfig,
    },
}

impl TreatmentConfig {
    fn to_treatment(&self) -> Treatment {
        match self {
            TreatmentConfig::Personalized => Treatment::Personalized,
            TreatmentConfig::Equal { utility, optimizer } => {
                Treatment::Equal { utility: *utility, optimizer: *optimizer }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NotionConfig {
    #[default]
    Personalized,
    Equal { utility: UtilityFunction },
}

impl NotionConfig {
    fn to_notion(&self) -> RegretNotion {
        match self {
            NotionConfig::Personalized => RegretNotion::Personalized,
            NotionConfig::Equal { utility } => RegretNotion::Equal { utility: *utility },
        }
    }
}

impl PolicyEntry {
    pub fn to_spec(&self) -> (PolicySpec, RegretNotion) {
        match &self.policy {
            PolicyEntryKind::Greedy { epsilon_scale, treatment } => {
                let config = PolicyConfig {
                    family: PolicyFamily::Greedy { epsilon_scale: *epsilon_scale },
                    treatment: treatment.to_treatment(),
                    baseline_single_type: false,
                };
                let spec = PolicySpec::Learned(config);
                let notion = spec.default_notion();
                (spec, notion)
            }
            PolicyEntryKind::Ucb { confidence_scale, treatment, baseline_single_type } => {
                let config = PolicyConfig {
                    family: PolicyFamily::Ucb { confidence_scale: *confidence_scale },
                    treatment: treatment.to_treatment(),
                    baseline_single_type: *baseline_single_type,
                };
                let spec = PolicySpec::Learned(config);
                let notion = spec.default_notion();
                (spec, notion)
            }
            PolicyEntryKind::Oracle { notion } => (PolicySpec::Oracle, notion.to_notion()),
            PolicyEntryKind::Random { notion } => (PolicySpec::UniformRandom, notion.to_notion()),
            PolicyEntryKind::Fixed { slots, notion } => {
                (PolicySpec::Fixed { slots: slots.clone() }, notion.to_notion())
            }
        }
    }
}

/// Per-policy aggregates written next to the CSV.
#[derive(Debug, Serialize)]
pub struct PolicySummary {
    pub id: String,
    pub seeds: usize,
    pub mean_final_regret: f64,
    pub mean_final_optimal_action_rate: f64,
    pub mean_wall_clock_s: f64,
    /// Mean `R(T)/R(T/2)` over seeds when both checkpoints exist.
    pub sublinearity_ratio: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct SimulationSummary {
    pub horizon: u64,
    pub seeds: usize,
    pub policies: Vec<PolicySummary>,
    pub total_wall_clock_s: f64,
}

#[derive(Parser, Debug)]
#[command(
    name = "rankbandit",
    about = "Simulate and fit multi-user-type learning-to-rank bandits under a position-based click model",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every (policy × seed) combination from an experiment config and
    /// write a results CSV plus a summary JSON.
    Simulate(SimulateArgs),
    /// Print the optimal rankings of an instance: per-type optima, the
    /// shared optimum, its value, and the gap to the runner-up.
    Oracle(OracleArgs),
    /// Fit an instance from a tab-separated click log and write it with a
    /// coverage report.
    Ingest(IngestArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Experiment config JSON.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for independent runs (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Override seeds: either `BASE:COUNT` or a comma-separated list.
    #[arg(long)]
    seeds: Option<String>,
    /// Override the horizon.
    #[arg(long)]
    horizon: Option<u64>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Instance JSON.
    #[arg(long)]
    instance: PathBuf,
    /// Collective utility for the shared optimum.
    #[arg(long, value_enum, default_value_t = UtilityArg::Utilitarian)]
    utility: UtilityArg,
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// Click log (TSV: user_type, arm, position, clicked; no header).
    #[arg(long)]
    log: PathBuf,
    #[arg(long)]
    num_types: usize,
    #[arg(long)]
    num_arms: usize,
    #[arg(long)]
    num_positions: usize,
    /// Cells with fewer impressions than this are reported uncovered.
    #[arg(long, default_value_t = 100)]
    min_count: u64,
    /// Output instance JSON; the coverage report lands next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum UtilityArg {
    Utilitarian,
    Nash,
}

impl UtilityArg {
    fn to_utility(self) -> UtilityFunction {
        match self {
            UtilityArg::Utilitarian => UtilityFunction::Utilitarian,
            UtilityArg::Nash => UtilityFunction::nash(),
        }
    }
}

const EXIT_OK: i32 = 0;
const EXIT_USAGE: i32 = 1;
const EXIT_FAULT: i32 = 2;

/// Usage or configuration problem (exit 1) vs runtime fault (exit 2).
#[derive(Debug)]
enum CliError {
    Usage(String),
    Fault(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Fault(_) => EXIT_FAULT,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Fault(m) => m,
        }
    }
}

/// Entry point used by the binary.
pub fn main_entry() -> i32 {
    run_from(std::env::args_os())
}

/// Testable entry point: parses `args` and runs the command.
pub fn run_from<I>(args: I) -> i32
where
    I: IntoIterator,
    I::Item: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version are successful exits; anything else is a
            // usage error.
            let code = if err.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = err.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Oracle(args) => cmd_oracle(&args),
        Command::Ingest(args) => cmd_ingest(&args),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.code()
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {what} {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("cannot parse {what} {}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<ProblemInstance, CliError> {
    let instance: ProblemInstance = read_json(path, "instance")?;
    let violations = instance.validate();
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| v.message.clone()).collect();
        return Err(CliError::Usage(format!(
            "instance {} is invalid: {}",
            path.display(),
            list.join("; ")
        )));
    }
    Ok(instance)
}

fn parse_seed_override(text: &str) -> Result<SeedSpec, CliError> {
    if let Some((base, count)) = text.split_once(':') {
        let base_seed = base
            .parse()
            .map_err(|e| CliError::Usage(format!("bad --seeds base {base:?}: {e}")))?;
        let count = count
            .parse()
            .map_err(|e| CliError::Usage(format!("bad --seeds count {count:?}: {e}")))?;
        return Ok(SeedSpec::Derived { base_seed, count });
    }
    let list: Result<Vec<u64>, _> = text.split(',').map(|s| s.trim().parse()).collect();
    match list {
        Ok(seeds) if !seeds.is_empty() => Ok(SeedSpec::List(seeds)),
        _ => Err(CliError::Usage(format!(
            "--seeds expects BASE:COUNT or a comma-separated list, got {text:?}"
        ))),
    }
}

/// Builds the run matrix from a validated config. Shared with the
/// acceptance suite.
pub fn build_run_specs(
    config: &ExperimentConfig,
    instance: &ProblemInstance,
) -> Result<Vec<RunSpec>, String> {
    if config.policies.is_empty() {
        return Err("config lists no policies".into());
    }
    if config.horizon < 1 {
        return Err("horizon must be at least 1".into());
    }
    let seeds = config.seeds.materialize();
    if seeds.is_empty() {
        return Err("config lists no seeds".into());
    }
    let checkpoints = config.checkpoints.materialize(config.horizon);
    let mut specs = Vec::with_capacity(config.policies.len() * seeds.len());
    for entry in &config.policies {
        let (policy, notion) = entry.to_spec();
        if let PolicySpec::Learned(pc) = &policy {
            pc.validate().map_err(|e| format!("policy {:?}: {e}", entry.id))?;
        }
        if let PolicySpec::Fixed { slots } = &policy {
            crate::model::Permutation::new(slots.clone(), instance.num_arms)
                .map_err(|e| format!("policy {:?}: {e}", entry.id))?;
        }
        for &seed in &seeds {
            let mut spec = RunSpec::new(&entry.id, policy.clone(), config.horizon, seed)
                .with_notion(notion);
            spec.checkpoints = checkpoints.clone();
            specs.push(spec);
        }
    }
    Ok(specs)
}

/// Runs the matrix in parallel and aggregates. Shared with the
/// acceptance suite.
pub fn execute_runs(
    instance: &ProblemInstance,
    specs: &[RunSpec],
) -> Result<Vec<RegretTrace>, String> {
    let results: Vec<Result<RegretTrace, String>> = specs
        .par_iter()
        .map(|spec| harness::run(instance, spec).map_err(|e| format!("run {}/{}: {e}", spec.policy_id, spec.seed)))
        .collect();
    results.into_iter().collect()
}

pub fn summarize(
    config_horizon: u64,
    seeds: usize,
    traces: &[RegretTrace],
) -> SimulationSummary {
    let mut ids: Vec<String> = traces.iter().map(|t| t.policy_id.clone()).collect();
    ids.sort();
    ids.dedup();
    let half = config_horizon / 2;
    let mut policies = Vec::new();
    let mut total_wall = 0.0;
    for id in ids {
        let group: Vec<&RegretTrace> = traces.iter().filter(|t| t.policy_id == id).collect();
        let n = group.len() as f64;
        let mean_final_regret =
            group.iter().map(|t| t.final_checkpoint().cumulative_regret).sum::<f64>() / n;
        let mean_rate =
            group.iter().map(|t| t.final_checkpoint().optimal_action_rate).sum::<f64>() / n;
        let mean_wall = group.iter().map(|t| t.final_checkpoint().wall_clock_s).sum::<f64>() / n;
        total_wall += group.iter().map(|t| t.final_checkpoint().wall_clock_s).sum::<f64>();
        let has_half = group.iter().all(|t| t.checkpoint_at(half).is_some());
        let ratio = if has_half && half >= 1 {
            let owned: Vec<RegretTrace> = group.iter().map(|&t| t.clone()).collect();
            sublinearity_check(&owned, half, config_horizon).mean_ratio
        } else {
            None
        };
        policies.push(PolicySummary {
            id,
            seeds: group.len(),
            mean_final_regret,
            mean_final_optimal_action_rate: mean_rate,
            mean_wall_clock_s: mean_wall,
            sublinearity_ratio: ratio,
        });
    }
    SimulationSummary { horizon: config_horizon, seeds, policies, total_wall_clock_s: total_wall }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let mut config: ExperimentConfig = read_json(&args.config, "config")?;
    if let Some(h) = args.horizon {
        config.horizon = h;
    }
    if let Some(text) = &args.seeds {
        config.seeds = parse_seed_override(text)?;
    }
    if let Some(out) = &args.out {
        config.output = out.clone();
    }
    let config_dir = args.config.parent().unwrap_or(Path::new(".")).to_path_buf();
    let instance = match &config.instance {
        InstanceRef::Inline(inst) => {
            let violations = inst.validate();
            if !violations.is_empty() {
                let list: Vec<String> =
                    violations.iter().map(|v| v.message.clone()).collect();
                return Err(CliError::Usage(format!("inline instance is invalid: {}", list.join("; "))));
            }
            (**inst).clone()
        }
        InstanceRef::Path { path } => {
            let resolved = if path.is_relative() { config_dir.join(path) } else { path.clone() };
            load_instance(&resolved)?
        }
    };

    if let Some(jobs) = args.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?;
    }

    let specs = build_run_specs(&config, &instance).map_err(CliError::Usage)?;
    let seeds = config.seeds.materialize().len();
    let traces = execute_runs(&instance, &specs).map_err(CliError::Fault)?;

    let output = if config.output.is_relative() && args.out.is_none() {
        config_dir.join(&config.output)
    } else {
        config.output.clone()
    };
    if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .map_err(|e| CliError::Fault(format!("cannot create {}: {e}", parent.display())))?;
    }
    let csv = harness::csv_to_string(&traces);
    fs::write(&output, csv)
        .map_err(|e| CliError::Fault(format!("cannot write {}: {e}", output.display())))?;
    let summary = summarize(config.horizon, seeds, &traces);
    let summary_path = output.with_extension("summary.json");
    fs::write(&summary_path, serde_json::to_string_pretty(&summary).expect("summary serializes"))
        .map_err(|e| CliError::Fault(format!("cannot write {}: {e}", summary_path.display())))?;

    println!("wrote {} rows for {} runs to {}", traces.iter().map(|t| t.checkpoints.len()).sum::<usize>(), traces.len(), output.display());
    for p in &summary.policies {
        println!(
            "  {:<24} mean final regret {:>12.3}  optimal-action rate {:>6.3}{}",
            p.id,
            p.mean_final_regret,
            p.mean_final_optimal_action_rate,
            p.sublinearity_ratio
                .map(|r| format!("  growth ratio {r:.3}"))
                .unwrap_or_default()
        );
    }
    println!("summary: {}", summary_path.display());
    Ok(())
}

#[derive(Serialize)]
struct OracleOutput<'a> {
    personalized_optima: Vec<OracleRow<'a>>,
    equal_optimum: OracleRow<'a>,
    gap: Option<f64>,
}

#[derive(Serialize)]
struct OracleRow<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    user_type: Option<usize>,
    slots: &'a [usize],
    value: f64,
}

fn cmd_oracle(args: &OracleArgs) -> Result<(), CliError> {
    let instance = load_instance(&args.instance)?;
    let oracle = harness::solve_oracle(&instance, args.utility.to_utility()).map_err(|e| {
        CliError::Fault(format!(
            "{e}; reduce num_positions or switch the experiment to the sampled optimizer"
        ))
    })?;
    let out = OracleOutput {
        personalized_optima: oracle
            .personalized_optima
            .iter()
            .enumerate()
            .map(|(i, s)| OracleRow { user_type: Some(i), slots: s.perm.slots(), value: s.value })
            .collect(),
        equal_optimum: OracleRow {
            user_type: None,
            slots: oracle.equal_optimum.perm.slots(),
            value: oracle.equal_optimum.value,
        },
        gap: oracle.gap,
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("oracle serializes"));
    Ok(())
}

fn cmd_ingest(args: &IngestArgs) -> Result<(), CliError> {
    let file = fs::File::open(&args.log)
        .map_err(|e| CliError::Usage(format!("cannot open log {}: {e}", args.log.display())))?;
    let records = ingest::read_tsv(BufReader::new(file))
        .map_err(|e| CliError::Fault(format!("{}: {e}", args.log.display())))?;
    let (instance, report) = ingest::fit_instance(
        &records,
        args.num_types,
        args.num_arms,
        args.num_positions,
        args.min_count,
    )
    .map_err(|e| CliError::Fault(e.to_string()))?;
    fs::write(&args.out, serde_json::to_string_pretty(&instance).expect("instance serializes"))
        .map_err(|e| CliError::Fault(format!("cannot write {}: {e}", args.out.display())))?;
    let coverage_path = args.out.with_extension("coverage.json");
    fs::write(&coverage_path, serde_json::to_string_pretty(&report).expect("report serializes"))
        .map_err(|e| CliError::Fault(format!("cannot write {}: {e}", coverage_path.display())))?;
    if !report.uncovered.is_empty() {
        eprintln!(
            "warning: {} cell(s) below min_count={} were filled uniformly; see {}",
            report.uncovered.len(),
            args.min_count,
            coverage_path.display()
        );
    }
    println!(
        "fitted instance from {} records -> {} (coverage: {})",
        records.len(),
        args.out.display(),
        coverage_path.display()
    );
    Ok(())
}
