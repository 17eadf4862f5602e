//! Command-line surface: generate artifacts, plan one-shot, run full
//! investigations, and report metrics from investigation logs.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 round limit
//! reached, 3 planning failure, 4 validation failure.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use stratplan_core::netadmin::{
    default_manifest, generate_domain, generate_problem, DomainConfig, Variant,
};
use stratplan_core::pddl::{emit_domain, emit_problem, parse_domain, parse_problem};
use stratplan_core::report::{build_report, report_csv, report_json};
use stratplan_core::round::{
    read_log, restore, snapshot, validate_registry, InvestigationConfig, PlannerMode, RoundEngine,
};
use stratplan_core::search::{validate_plan_file, PlanFile};
use stratplan_core::sensing::{
    generate_traces, read_trace_files, write_trace_files, AnalysisThresholds, AnomalySpec,
    TraceConfig,
};
use stratplan_core::{ground, plan_metric_with, plan_optimal_with, schedule_temporal, SearchLimits};

#[derive(Parser)]
#[command(
    name = "stratplan",
    about = "Strategic plan-sense-replan engine for network drill-down analysis",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Metric,
    Optimal,
    Temporal,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Sim,
    Traces,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Metric,
    Temporal,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the domain files and the sensing manifest.
    GenDomain {
        /// Output directory.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Domain configuration JSON file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Which variant files to write.
        #[arg(long, value_enum, default_value = "both")]
        variant: VariantArg,
    },
    /// Generate a problem instance.
    GenProblem {
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Number of initial hostsets.
        #[arg(long)]
        hostsets: usize,
        /// Number of investigation goals (defaults to all hostsets).
        #[arg(long)]
        goals: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generate synthetic traces with injected anomalies.
    GenTraces {
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 100)]
        hosts: usize,
        #[arg(long, default_value_t = 24)]
        hours: u32,
        /// Hosts with a volume anomaly.
        #[arg(long, default_value_t = 0)]
        volume: usize,
        /// Hosts contacting blacklisted domains.
        #[arg(long, default_value_t = 0)]
        blacklist_contact: usize,
        /// Hosts with geographically spread traffic.
        #[arg(long, default_value_t = 0)]
        geo_spread: usize,
        /// Background perturbation probability.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Plan once for a domain/problem pair and emit plan JSON.
    Plan {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, value_enum, default_value = "metric")]
        mode: ModeArg,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Planner wall budget in seconds.
        #[arg(long, default_value_t = 10)]
        budget_secs: u64,
    },
    /// Run a full investigation.
    Run {
        #[arg(long, value_enum, default_value = "sim")]
        backend: BackendArg,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 10_000)]
        rounds_max: u32,
        /// Write a world-state snapshot every N rounds (0 = never).
        #[arg(long, default_value_t = 0)]
        snapshot_every: u32,
        /// Initial hostsets (simulator backend).
        #[arg(long, default_value_t = 20)]
        hostsets: usize,
        /// Members per initial hostset (simulator backend).
        #[arg(long, default_value_t = 16)]
        members: usize,
        /// Trace directory from gen-traces (traces backend).
        #[arg(long)]
        traces_dir: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "metric")]
        mode: ModeArg,
        /// Investigation log output (JSON lines).
        #[arg(long, default_value = "investigation.jsonl")]
        out_log: PathBuf,
        /// Directory for snapshots.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Dump the deployment registry for audit.
        #[arg(long)]
        registry_json: Option<PathBuf>,
    },
    /// Project a metrics report from an investigation log.
    Report {
        #[arg(long)]
        log: PathBuf,
        /// Report JSON output (stdout when omitted).
        #[arg(long)]
        json: Option<PathBuf>,
        /// Per-round CSV output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check a plan, snapshot, or log against its invariants.
    Validate {
        #[arg(long)]
        domain: Option<PathBuf>,
        #[arg(long)]
        problem: Option<PathBuf>,
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long)]
        log: Option<PathBuf>,
    },
}

/// Process failure carrying its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

type CmdResult = Result<(), Failure>;

fn fail(code: u8, error: anyhow::Error) -> Failure {
    Failure { code, error }
}

trait ExitCtx<T> {
    /// Maps an error to a specific exit code.
    fn or_exit(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> ExitCtx<T> for Result<T, E> {
    fn or_exit(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| fail(code, e.into()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help/version requests are successes, not usage errors.
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}

/// Seed resolution: flag, then STRATPLAN_SEED, then 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("STRATPLAN_SEED") {
        Ok(text) => text
            .parse()
            .map_err(|_| fail(1, anyhow!("STRATPLAN_SEED is not a 64-bit integer: `{text}`"))),
        Err(_) => Ok(0),
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<DomainConfig, Failure> {
    match path {
        None => Ok(DomainConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))
                .or_exit(1)?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", p.display()))
                .or_exit(1)
        }
    }
}

fn write_file(path: &Path, contents: &str) -> CmdResult {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)
                .with_context(|| format!("creating {}", dir.display()))
                .or_exit(1)?;
        }
    }
    fs::write(path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .or_exit(1)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn dispatch(command: Command) -> CmdResult {
    match command {
        Command::GenDomain { out_dir, config, variant } => {
            let config = load_config(&config)?;
            let base = config.base_name.clone();
            if matches!(variant, VariantArg::Metric | VariantArg::Both) {
                let d = generate_domain(&config, Variant::Metric).or_exit(1)?;
                write_file(&out_dir.join(format!("{base}-metric.pddl")), &emit_domain(&d))?;
            }
            if matches!(variant, VariantArg::Temporal | VariantArg::Both) {
                let d = generate_domain(&config, Variant::Temporal).or_exit(1)?;
                write_file(&out_dir.join(format!("{base}-temporal.pddl")), &emit_domain(&d))?;
            }
            let manifest = default_manifest(&config);
            let manifest_json =
                serde_json::to_string_pretty(&manifest).expect("manifest serializes");
            write_file(&out_dir.join(format!("{base}-sensing.json")), &manifest_json)?;
            Ok(())
        }
        Command::GenProblem { out_dir, config, hostsets, goals, seed } => {
            let config = load_config(&config)?;
            let seed = resolve_seed(seed)?;
            let goals = goals.unwrap_or(hostsets);
            let problem = generate_problem(&config, hostsets, goals, seed).or_exit(1)?;
            let base = &config.base_name;
            write_file(&out_dir.join(format!("{base}-problem.pddl")), &emit_problem(&problem))
        }
        Command::GenTraces {
            out_dir,
            hosts,
            hours,
            volume,
            blacklist_contact,
            geo_spread,
            noise,
            seed,
        } => {
            let seed = resolve_seed(seed)?;
            let config = TraceConfig {
                n_hosts: hosts,
                duration_hours: hours,
                noise,
                ..TraceConfig::default()
            };
            let spec = AnomalySpec { volume, blacklist_contact, geo_spread };
            let (set, truth) = generate_traces(&config, &spec, seed).or_exit(1)?;
            write_trace_files(&out_dir, &set, &truth).or_exit(1)?;
            println!(
                "wrote {} ({} dns, {} flow, {} sampled records; {} anomalous hosts)",
                out_dir.display(),
                set.dns.len(),
                set.flows.len(),
                set.sampled.len(),
                truth.anomalous().count(),
            );
            Ok(())
        }
        Command::Plan { domain, problem, mode, out, budget_secs } => {
            let domain_text = fs::read_to_string(&domain)
                .with_context(|| format!("reading {}", domain.display()))
                .or_exit(1)?;
            let parsed_domain = parse_domain(&domain_text)
                .with_context(|| format!("parsing {}", domain.display()))
                .or_exit(1)?;
            let problem_text = fs::read_to_string(&problem)
                .with_context(|| format!("reading {}", problem.display()))
                .or_exit(1)?;
            let parsed_problem = parse_problem(&problem_text, &parsed_domain)
                .with_context(|| format!("parsing {}", problem.display()))
                .or_exit(1)?;
            let task = ground(&parsed_domain, &parsed_problem).or_exit(3)?;
            let limits = SearchLimits {
                wall_budget: std::time::Duration::from_secs(budget_secs),
            };
            let (plan, schedule) = match mode {
                ModeArg::Metric => (plan_metric_with(&task, &limits).or_exit(3)?, None),
                ModeArg::Optimal => (plan_optimal_with(&task, &limits).or_exit(3)?, None),
                ModeArg::Temporal => {
                    let p = plan_metric_with(&task, &limits).or_exit(3)?;
                    let s = schedule_temporal(&p, &task);
                    (p, Some(s))
                }
            };
            let file = PlanFile::new(&task, &plan, schedule.as_ref());
            let json = serde_json::to_string_pretty(&file).expect("plan serializes");
            match out {
                Some(path) => write_file(&path, &json)?,
                None => println!("{json}"),
            }
            Ok(())
        }
        Command::Run {
            backend,
            seed,
            rounds_max,
            snapshot_every,
            hostsets,
            members,
            traces_dir,
            config,
            mode,
            out_log,
            out_dir,
            registry_json,
        } => {
            let seed = resolve_seed(seed)?;
            let domain_config = load_config(&config)?;
            let investigation = InvestigationConfig {
                domain: domain_config,
                mode: match mode {
                    ModeArg::Metric => PlannerMode::Metric,
                    ModeArg::Optimal => PlannerMode::Optimal,
                    ModeArg::Temporal => PlannerMode::Temporal,
                },
                seed,
                round_limit: rounds_max,
                search: SearchLimits::default(),
            };
            let mut engine = match backend {
                BackendArg::Sim => {
                    RoundEngine::new_simulated(investigation, hostsets, members).or_exit(1)?
                }
                BackendArg::Traces => {
                    let dir = traces_dir.ok_or_else(|| {
                        fail(1, anyhow!("--backend traces requires --traces-dir"))
                    })?;
                    let (traces, _truth) = read_trace_files(&dir).or_exit(1)?;
                    RoundEngine::new_traced(investigation, traces, AnalysisThresholds::default())
                        .or_exit(1)?
                }
            };

            let mut limit_hit = false;
            while !engine.terminated() {
                if engine.round() >= rounds_max {
                    limit_hit = true;
                    break;
                }
                let round = engine.run_round().or_exit(3)?.round;
                if snapshot_every > 0 && round % snapshot_every == 0 {
                    let path = out_dir.join(format!("snapshot-r{round:05}.json"));
                    write_file(&path, &snapshot(engine.state()))?;
                }
            }

            if let Some(path) = &registry_json {
                write_file(path, &engine.registry_dump())?;
            }
            let log = engine.log();
            write_file(&out_log, &log.to_jsonl())?;
            let last_round = log.rounds.last().map(|r| r.round).unwrap_or(0);
            if limit_hit {
                return Err(fail(2, anyhow!("round limit {rounds_max} reached")));
            }
            println!("investigation complete in {last_round} rounds");
            Ok(())
        }
        Command::Report { log, json, csv } => {
            let log = read_log(&log).or_exit(4)?;
            let report = build_report(&log);
            let json_text = report_json(&report);
            match json {
                Some(path) => write_file(&path, &json_text)?,
                None => println!("{json_text}"),
            }
            if let Some(path) = csv {
                write_file(&path, &report_csv(&report))?;
            }
            Ok(())
        }
        Command::Validate { domain, problem, plan, snapshot: snap, log } => {
            let mut checked = false;
            if let Some(plan_path) = plan {
                let (domain_path, problem_path) = match (&domain, &problem) {
                    (Some(d), Some(p)) => (d, p),
                    _ => {
                        return Err(fail(
                            1,
                            anyhow!("--plan validation requires --domain and --problem"),
                        ))
                    }
                };
                let domain_text = fs::read_to_string(domain_path).or_exit(1)?;
                let parsed_domain = parse_domain(&domain_text).or_exit(1)?;
                let problem_text = fs::read_to_string(problem_path).or_exit(1)?;
                let parsed_problem = parse_problem(&problem_text, &parsed_domain).or_exit(1)?;
                let task = ground(&parsed_domain, &parsed_problem).or_exit(1)?;
                let plan_text = fs::read_to_string(&plan_path).or_exit(1)?;
                let file: PlanFile = serde_json::from_str(&plan_text)
                    .with_context(|| format!("parsing {}", plan_path.display()))
                    .or_exit(4)?;
                validate_plan_file(&task, &file).or_exit(4)?;
                println!("plan valid: executable and goal-achieving");
                checked = true;
            }
            if let Some(path) = snap {
                let text = fs::read_to_string(&path).or_exit(1)?;
                let state = restore(&text).or_exit(4)?;
                validate_registry(&state).or_exit(4)?;
                println!("snapshot valid: registry invariants hold");
                checked = true;
            }
            if let Some(path) = log {
                let parsed = read_log(&path).or_exit(4)?;
                check_log_invariants(&parsed).or_exit(4)?;
                println!("log valid: {} rounds", parsed.rounds.len());
                checked = true;
            }
            if !checked {
                return Err(fail(
                    1,
                    anyhow!("nothing to validate: pass --plan, --snapshot or --log"),
                ));
            }
            Ok(())
        }
    }
}

/// Log-level invariants: at most one sensing action per executed
/// prefix and only in final position; hostsets created at most once.
fn check_log_invariants(log: &stratplan_core::round::InvestigationLog) -> anyhow::Result<()> {
    for record in &log.rounds {
        let sensing: Vec<usize> = record
            .executed
            .iter()
            .enumerate()
            .filter(|(_, i)| i.name.starts_with("sense-"))
            .map(|(idx, _)| idx)
            .collect();
        if sensing.len() > 1 {
            return Err(anyhow!(
                "round {}: {} sensing actions in the executed prefix",
                record.round,
                sensing.len()
            ));
        }
        if let Some(&idx) = sensing.first() {
            if idx + 1 != record.executed.len() {
                return Err(anyhow!(
                    "round {}: sensing action at position {idx} is not last",
                    record.round
                ));
            }
        }
    }
    let mut seen: BTreeSet<&stratplan_core::Name> = BTreeSet::new();
    for record in &log.rounds {
        for created in &record.created {
            if !seen.insert(&created.hostset) {
                return Err(anyhow!("hostset {} created twice", created.hostset));
            }
        }
    }
    Ok(())
}
