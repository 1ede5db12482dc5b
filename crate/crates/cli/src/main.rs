use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use modelprobe_cli::commands::{
    cmd_baseline, cmd_bench, cmd_dcdn, cmd_interrogate, CorpusKind, CorpusSpec,
};
use modelprobe_cli::config::{
    parse_config_file, BackendKind, CapabilityKind, QueryClass, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "modelprobe",
    about = "Recover STRIPS-like action models of black-box agents by interventional querying and verify their causal structure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Domain file path or bundled domain name (drive, drive8, drive16,
    /// drive-paint, gripper, blocksworld, citydrive)
    #[arg(long)]
    domain: Option<String>,
    /// Problem file path or bundled problem name; defaults to the bundled
    /// domain's first problem
    #[arg(long)]
    problem: Option<String>,
    /// Query class: po | ap
    #[arg(long)]
    queries: Option<String>,
    /// Agent backend: truth | relational
    #[arg(long)]
    backend: Option<String>,
    /// Agent capability: teleport | walk
    #[arg(long)]
    capability: Option<String>,
    /// Maximum plan length the protocol accepts
    #[arg(long = "max-plan-len")]
    max_plan_len: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Query-count budget; the default is the class envelope
    #[arg(long)]
    budget: Option<usize>,
    /// Output directory for artifacts
    #[arg(long)]
    out: Option<PathBuf>,
    /// Network horizon for dcdn
    #[arg(long)]
    horizon: Option<usize>,
    /// Optional key=value config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
}

impl CommonArgs {
    fn build(&self) -> Result<RunConfig> {
        let config = self.build_without_domain()?;
        if config.domain.is_empty() {
            anyhow::bail!("--domain is required (flag or config file)");
        }
        Ok(config)
    }

    fn build_without_domain(&self) -> Result<RunConfig> {
        let mut config = RunConfig::default();
        if let Some(path) = &self.config {
            let map = parse_config_file(path)?;
            config.apply_file(&map)?;
        }
        if let Some(domain) = &self.domain {
            config.domain = domain.clone();
        }
        if let Some(problem) = &self.problem {
            config.problem = Some(problem.clone());
        }
        if let Some(queries) = &self.queries {
            config.queries = QueryClass::parse(queries)?;
        }
        if let Some(backend) = &self.backend {
            config.backend = BackendKind::parse(backend)?;
        }
        if let Some(capability) = &self.capability {
            config.capability = CapabilityKind::parse(capability)?;
        }
        if let Some(len) = self.max_plan_len {
            config.max_plan_len = len;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(budget) = self.budget {
            config.budget = Some(budget);
        }
        if let Some(out) = &self.out {
            config.out = out.clone();
        }
        if let Some(horizon) = self.horizon {
            config.horizon = horizon;
        }
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Learn the agent's action model through queries
    Interrogate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Learn from observational traces and compare against the truth
    Baseline {
        #[command(flatten)]
        common: CommonArgs,
        /// Corpus preset: all-blue | same-city | exhaustive | all-blue-paint | unbiased
        #[arg(long, default_value = "unbiased")]
        corpus: String,
        /// Number of walks in the corpus
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Steps per walk
        #[arg(long, default_value_t = 8)]
        length: usize,
    },
    /// Build the causal network, verify actual causes, export DOT
    Dcdn {
        #[command(flatten)]
        common: CommonArgs,
        /// Plan to evaluate layer-by-layer, e.g. "drive(t1,l1,l2);drive(t1,l2,l1)"
        #[arg(long)]
        plan: Option<String>,
    },
    /// Aggregate query counts and accuracy across domains and seeds
    Bench {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated bundled domain names
        #[arg(long, default_value = "drive,gripper,blocksworld")]
        suite: String,
        /// Comma-separated seeds
        #[arg(long, default_value = "0,1,2")]
        seeds: String,
        /// Worker pool width
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Interrogate { common } => {
            let config = common.build()?;
            let outcome = cmd_interrogate(&config)?;
            println!(
                "{}: {} queries (budget {}), accuracy {:.4}, {} unresolved",
                outcome.report.domain,
                outcome.report.queries,
                outcome.budget,
                outcome.report.accuracy,
                outcome.unresolved
            );
            for artifact in &outcome.artifacts {
                println!("wrote {}", artifact.display());
            }
            Ok(outcome.passed())
        }
        Command::Baseline {
            common,
            corpus,
            count,
            length,
        } => {
            let config = common.build()?;
            let spec = CorpusSpec {
                kind: CorpusKind::parse(&corpus)?,
                count,
                length,
            };
            let outcome = cmd_baseline(&config, &spec)?;
            println!(
                "spurious {} / missing {} (after stripping: {} / {})",
                outcome.spurious,
                outcome.missing,
                outcome.spurious_after_strip,
                outcome.missing_after_strip
            );
            for artifact in &outcome.artifacts {
                println!("wrote {}", artifact.display());
            }
            Ok(true)
        }
        Command::Dcdn { common, plan } => {
            let config = common.build()?;
            let outcome = cmd_dcdn(&config, plan.as_deref())?;
            println!(
                "network: {} nodes, {} edges; cause checks: {} ({} failed, {} inconclusive)",
                outcome.nodes, outcome.edges, outcome.checks, outcome.failures, outcome.inconclusive
            );
            for artifact in &outcome.artifacts {
                println!("wrote {}", artifact.display());
            }
            Ok(outcome.failures == 0)
        }
        Command::Bench {
            common,
            suite,
            seeds,
            jobs,
        } => {
            let config = common.build_without_domain()?;
            let suite: Vec<String> = suite
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect();
            let seeds: Vec<u64> = seeds
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<u64>())
                .collect::<Result<_, _>>()?;
            let outcome = cmd_bench(&config, &suite, &seeds, jobs)?;
            for row in &outcome.rows {
                println!(
                    "{}: po {:.1} vs ap {:.1} queries ({})",
                    row.domain, row.po_queries_mean, row.ap_queries_mean, row.status
                );
            }
            for artifact in &outcome.artifacts {
                println!("wrote {}", artifact.display());
            }
            Ok(outcome.all_ok())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::FAILURE
        }
    }
}
