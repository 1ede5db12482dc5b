//! The four workbench commands: interrogate a black-box agent, run the
//! observational baseline with a biased or exhaustive corpus, materialize
//! and verify a causal network, and benchmark query classes across domains
//! and seeds.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};

use modelprobe::agent::{Agent, Capability, ProtocolConfig};
use modelprobe::baseline::{
    generate_traces, learn_from_traces, strip_static, LearnOptions, Trace, TraceCorpus,
};
use modelprobe::causal::{build_dcdn, compare_sound_complete, export_dot, standard_cause_checks,
    AcBudget, CausalSetting, NodeId,
};
use modelprobe::interrogation::{
    learn_ap, learn_po, model_accuracy, p_star_size, CanonicalGrounding, InterrogationConfig,
    LearnedModel, Vocabulary,
};
use modelprobe::pddl::{serialize_domain, ProblemInstance};
use modelprobe::planner::StateConstraint;
use modelprobe::strips::{
    instantiate_with_parameters, palm_tuples_of, GroundAction, GroundAtom, LiftedModel, State,
};

use crate::config::{BackendKind, CapabilityKind, QueryClass, RunConfig};
use crate::report::{write_text, CsvTable};

/// Atom budget for the relational backend; beyond this the backend refuses.
const RELATIONAL_MAX_ATOMS: usize = 16;

fn build_agent(config: &RunConfig, model: &LiftedModel, problem: &ProblemInstance) -> Result<Agent> {
    let protocol = ProtocolConfig {
        max_plan_len: config.max_plan_len,
        cache: true,
    };
    match config.backend {
        BackendKind::Truth => {
            let capability = match config.capability {
                CapabilityKind::Teleport => Capability::Teleport,
                CapabilityKind::Walk => Capability::Walk,
            };
            Ok(Agent::ground_truth(
                model.clone(),
                problem.clone(),
                capability,
                protocol,
            )?)
        }
        BackendKind::Relational => {
            if config.capability == CapabilityKind::Walk {
                bail!("the relational backend answers from stored relations and is teleport-only");
            }
            Ok(Agent::relational(
                model,
                problem,
                protocol,
                RELATIONAL_MAX_ATOMS,
            )?)
        }
    }
}

/// The per-run summary row of `summary.csv`.
pub struct RunReport {
    pub domain: String,
    pub p_star: usize,
    pub actions: usize,
    pub queries: usize,
    pub t_mu_ms: f64,
    pub t_var: f64,
    pub accuracy: f64,
}

pub struct InterrogateOutcome {
    pub report: RunReport,
    pub budget: usize,
    pub budget_met: bool,
    pub unresolved: usize,
    pub artifacts: Vec<PathBuf>,
}

impl InterrogateOutcome {
    pub fn passed(&self) -> bool {
        self.report.accuracy == 1.0 && self.budget_met && self.unresolved == 0
    }
}

fn accuracy_trace(learned: &LearnedModel, truth: &LiftedModel, kind: QueryClass) -> CsvTable {
    let truth_tuples = palm_tuples_of(truth);
    let total = truth_tuples.len() as f64;
    let mut table = CsvTable::new("query_index,accuracy,kind");
    let mut correct = 0usize;
    let mut events = learned.fix_events.iter().peekable();
    for query in 0..learned.queries_used {
        while let Some(event) = events.peek() {
            if event.query_index > query {
                break;
            }
            if truth_tuples.contains(&event.tuple) {
                correct += 1;
            }
            events.next();
        }
        table.row(&[
            &(query + 1).to_string(),
            &format!("{:.6}", correct as f64 / total),
            kind.name(),
        ]);
    }
    table
}

/// Interrogates the configured agent and writes the learned model, the query
/// log, the accuracy trace and the summary row.
pub fn cmd_interrogate(config: &RunConfig) -> Result<InterrogateOutcome> {
    let (model, problem) = crate::config::load_task(config)?;
    let vocab = Vocabulary::of_model(&model);
    let mut agent = build_agent(config, &model, &problem)?;
    let learn_config = InterrogationConfig {
        seed: config.seed,
        ..InterrogationConfig::default()
    };
    let learned = match config.queries {
        QueryClass::Po => learn_po(&mut agent, &vocab, &learn_config)?,
        QueryClass::Ap => learn_ap(&mut agent, &vocab, &learn_config)?,
    };
    let accuracy = model_accuracy(&learned, &model)?;
    let p_star = p_star_size(&model.predicates, &model.headers());
    let action_count = model.actions.len();
    let queries = match config.queries {
        QueryClass::Po => agent.log().po_count(),
        QueryClass::Ap => agent.log().ap_count(),
    };
    let budget = config.budget.unwrap_or(match config.queries {
        QueryClass::Po => 4 * p_star * action_count,
        QueryClass::Ap => 2 * action_count,
    });
    let (t_mu_ms, t_var) = agent.log().timing_stats().unwrap_or((0.0, 0.0));

    std::fs::create_dir_all(&config.out)
        .with_context(|| format!("creating {}", config.out.display()))?;
    let mut artifacts = Vec::new();
    artifacts.push(write_text(
        &config.out.join("learned.pddl"),
        &serialize_domain(&learned.model),
    )?);
    artifacts.push(write_text(&config.out.join("query.log"), &agent.log().render())?);
    artifacts.push(
        accuracy_trace(&learned, &model, config.queries)
            .write(&config.out.join("accuracy.csv"))?,
    );
    let mut provenance = CsvTable::new("action,atom,location,mode,queries");
    for (tuple, queries) in &learned.provenance {
        let header = &model.action(&tuple.action)?.header;
        let supports: Vec<String> = queries.iter().map(|q| (q + 1).to_string()).collect();
        provenance.row(&[
            &tuple.action,
            &tuple.atom.display_with(header),
            &tuple.location.to_string(),
            &tuple.mode.to_string(),
            &supports.join(";"),
        ]);
    }
    artifacts.push(provenance.write(&config.out.join("provenance.csv"))?);
    let mut summary = CsvTable::new("domain,p_star,actions,queries,t_mu_ms,t_var,accuracy");
    summary.row(&[
        &model.name,
        &p_star.to_string(),
        &action_count.to_string(),
        &queries.to_string(),
        &format!("{t_mu_ms:.6}"),
        &format!("{t_var:.9}"),
        &format!("{accuracy:.6}"),
    ]);
    artifacts.push(summary.write(&config.out.join("summary.csv"))?);

    for (action, atom, location) in &learned.unresolved {
        let header = &model.action(action)?.header;
        eprintln!(
            "warning: unresolved {location} mode for {} of `{action}`",
            atom.display_with(header)
        );
    }

    Ok(InterrogateOutcome {
        report: RunReport {
            domain: model.name.clone(),
            p_star,
            actions: action_count,
            queries,
            t_mu_ms,
            t_var,
            accuracy,
        },
        budget,
        budget_met: queries <= budget,
        unresolved: learned.unresolved.len(),
        artifacts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusKind {
    AllBlue,
    SameCity,
    Exhaustive,
    AllBluePaint,
    Unbiased,
}

impl CorpusKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "all-blue" => Ok(CorpusKind::AllBlue),
            "same-city" => Ok(CorpusKind::SameCity),
            "exhaustive" => Ok(CorpusKind::Exhaustive),
            "all-blue-paint" => Ok(CorpusKind::AllBluePaint),
            "unbiased" => Ok(CorpusKind::Unbiased),
            other => bail!(
                "unknown corpus `{other}` (expected all-blue, same-city, exhaustive, all-blue-paint or unbiased)"
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub kind: CorpusKind,
    pub count: usize,
    pub length: usize,
}

fn all_blue_filter(problem: &ProblemInstance) -> Result<StateConstraint> {
    let require_true: BTreeSet<GroundAtom> = problem
        .init
        .iter()
        .filter(|a| a.predicate == "src_blue")
        .cloned()
        .collect();
    if require_true.is_empty() {
        bail!("the all-blue corpus needs src_blue atoms in the initial state");
    }
    Ok(StateConstraint {
        require_true,
        require_false: BTreeSet::new(),
    })
}

/// Keeps every truck inside the city of its initial location: at-atoms for
/// locations not same_city-connected to it are required false.
fn same_city_filter(model: &LiftedModel, problem: &ProblemInstance) -> Result<StateConstraint> {
    if !model.predicates.contains_key("same_city") || !model.predicates.contains_key("at") {
        bail!("the same-city corpus needs `at` and `same_city` predicates");
    }
    let mut require_false = BTreeSet::new();
    for atom in problem.init.iter().filter(|a| a.predicate == "at") {
        let truck = &atom.args[0];
        let home = &atom.args[1];
        for (object, ty) in &problem.objects {
            if ty != "loc" {
                continue;
            }
            let connected = problem
                .init
                .contains(&GroundAtom::new("same_city", &[home, object]));
            if !connected {
                require_false.insert(GroundAtom::new("at", &[truck, object]));
            }
        }
    }
    if require_false.is_empty() {
        bail!("the initial state connects every location; nothing to restrict");
    }
    Ok(StateConstraint {
        require_true: BTreeSet::new(),
        require_false,
    })
}

/// One-step traces from every executable truth assignment over each
/// action's canonical instantiation atoms: flips every atom both ways
/// whenever the preconditions allow it.
fn exhaustive_corpus(model: &LiftedModel, problem: &ProblemInstance) -> Result<Vec<Trace>> {
    let mut traces = Vec::new();
    for schema in model.actions.values() {
        let Some(grounding) = CanonicalGrounding::new(&schema.header, &problem.objects) else {
            bail!(
                "not enough objects to ground `{}` injectively",
                schema.name()
            );
        };
        let atoms: Vec<GroundAtom> =
            instantiate_with_parameters(model.predicates.values(), &schema.header)
                .iter()
                .map(|a| grounding.ground(a))
                .collect();
        if atoms.len() > 16 {
            bail!("`{}` instantiates too many atoms for the exhaustive corpus", schema.name());
        }
        for bits in 0..(1u64 << atoms.len()) {
            let state = State::from_atoms(
                atoms
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| bits & (1 << i) != 0)
                    .map(|(_, a)| a.clone()),
            );
            if let Ok(trace) =
                Trace::from_steps(model, state, vec![grounding.ground_action()])
            {
                traces.push(trace);
            }
        }
    }
    Ok(traces)
}

fn assemble_corpus(
    spec: &CorpusSpec,
    model: &LiftedModel,
    problem: &ProblemInstance,
    seed: u64,
) -> Result<TraceCorpus> {
    match spec.kind {
        CorpusKind::Unbiased => Ok(generate_traces(
            model,
            problem,
            spec.count,
            spec.length,
            seed,
            None,
        )?),
        CorpusKind::AllBlue => {
            let filter = all_blue_filter(problem)?;
            Ok(generate_traces(
                model,
                problem,
                spec.count,
                spec.length,
                seed,
                Some(&filter),
            )?)
        }
        CorpusKind::SameCity => {
            let filter = same_city_filter(model, problem)?;
            Ok(generate_traces(
                model,
                problem,
                spec.count,
                spec.length,
                seed,
                Some(&filter),
            )?)
        }
        CorpusKind::Exhaustive => Ok(TraceCorpus {
            traces: exhaustive_corpus(model, problem)?,
            warning: None,
        }),
        CorpusKind::AllBluePaint => {
            if model.action("paint").is_err() {
                bail!("the all-blue-paint corpus needs a paint action in the domain");
            }
            let filter = all_blue_filter(problem)?;
            let mut corpus =
                generate_traces(model, problem, spec.count, spec.length, seed, Some(&filter))?;
            // One observed paint transition with a visible color change:
            // start with one location unpainted and watch paint fire.
            let unpainted = problem
                .init
                .iter()
                .find(|a| a.predicate == "src_blue")
                .cloned()
                .expect("all-blue filter guaranteed src_blue atoms");
            let mut off_blue = problem.init.clone();
            off_blue.remove(&unpainted);
            corpus.traces.push(Trace::from_steps(
                model,
                off_blue,
                vec![GroundAction::new("paint", &[unpainted.args[0].as_str()])],
            )?);
            Ok(corpus)
        }
    }
}

pub struct BaselineOutcome {
    pub spurious: usize,
    pub missing: usize,
    pub spurious_after_strip: usize,
    pub missing_after_strip: usize,
    pub warning: Option<String>,
    pub artifacts: Vec<PathBuf>,
}

/// Generates the corpus, learns observationally, compares against the truth
/// and writes the corpus, the learned model and the spurious/missing lists.
pub fn cmd_baseline(config: &RunConfig, spec: &CorpusSpec) -> Result<BaselineOutcome> {
    let (model, problem) = crate::config::load_task(config)?;
    let vocab = Vocabulary::of_model(&model);
    let corpus = assemble_corpus(spec, &model, &problem, config.seed)?;
    if let Some(warning) = &corpus.warning {
        eprintln!("warning: {warning}");
    }
    let learned = learn_from_traces(
        &corpus.traces,
        &vocab,
        &model.headers(),
        &LearnOptions::default(),
    )?;
    let diff = compare_sound_complete(&learned, &model)?;
    let stripped = strip_static(&learned, &learned);
    let stripped_diff = compare_sound_complete(&stripped, &model)?;

    std::fs::create_dir_all(&config.out)?;
    let mut artifacts = Vec::new();
    artifacts.push(write_text(&config.out.join("corpus.txt"), &corpus.render())?);
    artifacts.push(write_text(
        &config.out.join("learned.pddl"),
        &serialize_domain(&learned),
    )?);
    let mut table = CsvTable::new("list,action,atom,location,mode");
    for (list, tuples) in [
        ("spurious", &diff.spurious),
        ("missing", &diff.missing),
        ("spurious_after_strip", &stripped_diff.spurious),
        ("missing_after_strip", &stripped_diff.missing),
    ] {
        for tuple in tuples {
            let header = &model.action(&tuple.action)?.header;
            table.row(&[
                list,
                &tuple.action,
                &tuple.atom.display_with(header),
                &tuple.location.to_string(),
                &tuple.mode.to_string(),
            ]);
        }
    }
    artifacts.push(table.write(&config.out.join("comparison.csv"))?);

    Ok(BaselineOutcome {
        spurious: diff.spurious.len(),
        missing: diff.missing.len(),
        spurious_after_strip: stripped_diff.spurious.len(),
        missing_after_strip: stripped_diff.missing.len(),
        warning: corpus.warning,
        artifacts,
    })
}

pub struct DcdnOutcome {
    pub nodes: usize,
    pub edges: usize,
    pub checks: usize,
    pub failures: usize,
    pub inconclusive: usize,
    pub artifacts: Vec<PathBuf>,
}

/// Builds the network, writes its DOT rendering, runs the enumerated
/// actual-cause family and (optionally) evaluates a plan layer by layer.
pub fn cmd_dcdn(config: &RunConfig, plan: Option<&str>) -> Result<DcdnOutcome> {
    let (model, problem) = crate::config::load_task(config)?;
    let dcdn = build_dcdn(&model, &problem, config.horizon)?;
    std::fs::create_dir_all(&config.out)?;
    let mut artifacts = Vec::new();
    artifacts.push(write_text(&config.out.join("dcdn.dot"), &export_dot(&dcdn))?);

    let rows = standard_cause_checks(&model, &problem, config.horizon, &AcBudget::default())?;
    let mut table = CsvTable::new("check,cause,formula,expected,verdict,ac1,ac2,ac3,detail");
    let mut failures = 0;
    let mut inconclusive = 0;
    for row in &rows {
        if row.failed() {
            failures += 1;
        }
        let detail = match &row.outcome {
            modelprobe::causal::CauseOutcome::Cause { witness, .. } => {
                format!("witness size {}", witness.len())
            }
            modelprobe::causal::CauseOutcome::NotCause { reason, .. } => reason.clone(),
            modelprobe::causal::CauseOutcome::Inconclusive { reason } => {
                inconclusive += 1;
                reason.clone()
            }
        };
        let (ac1, ac2, ac3) = row.condition_flags();
        table.row(&[
            &row.label,
            &row.cause,
            &row.formula,
            if row.expect_cause { "cause" } else { "not-cause" },
            row.verdict(),
            ac1,
            ac2,
            ac3,
            &detail,
        ]);
    }
    artifacts.push(table.write(&config.out.join("causes.csv"))?);

    if let Some(plan_text) = plan {
        let plan = parse_plan(plan_text)?;
        let setting = CausalSetting::new(&dcdn, &problem.init, &plan)?;
        let vals = dcdn.evaluate(&setting)?;
        let mut text = String::new();
        for t in 0..=config.horizon {
            let layer: Vec<String> = dcdn
                .atoms()
                .iter()
                .filter(|a| vals[&NodeId::StateVar((*a).clone(), t)])
                .map(|a| a.to_string())
                .collect();
            let _ = writeln!(text, "t={t} {{{}}}", layer.join(","));
        }
        artifacts.push(write_text(&config.out.join("evaluation.txt"), &text)?);
    }

    Ok(DcdnOutcome {
        nodes: dcdn.nodes().count(),
        edges: dcdn.edges().count(),
        checks: rows.len(),
        failures,
        inconclusive,
        artifacts,
    })
}

/// Parses `name(arg,…);name(arg,…)` plan text.
pub fn parse_plan(text: &str) -> Result<Vec<GroundAction>> {
    let mut plan = Vec::new();
    for item in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let Some((name, rest)) = item.split_once('(') else {
            // A zero-arity action may be written without parentheses.
            plan.push(GroundAction::new(item, &[]));
            continue;
        };
        let Some(args_text) = rest.strip_suffix(')') else {
            bail!("malformed plan step `{item}`");
        };
        let args: Vec<&str> = args_text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect();
        plan.push(GroundAction::new(name.trim(), &args));
    }
    Ok(plan)
}

pub struct BenchRow {
    pub domain: String,
    pub p_star: usize,
    pub actions: usize,
    pub seeds: usize,
    pub po_queries_mean: f64,
    pub po_queries_var: f64,
    pub ap_queries_mean: f64,
    pub ap_queries_var: f64,
    pub po_accuracy: f64,
    pub ap_accuracy: f64,
    pub po_t_mu_ms: f64,
    pub ap_t_mu_ms: f64,
    pub status: String,
}

pub struct BenchOutcome {
    pub rows: Vec<BenchRow>,
    pub artifacts: Vec<PathBuf>,
}

impl BenchOutcome {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.status == "ok")
    }
}

fn mean_var(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
    (mean, var)
}

fn bench_domain(domain: &str, base: &RunConfig, seeds: &[u64]) -> Result<BenchRow> {
    let mut config = base.clone();
    config.domain = domain.to_string();
    config.problem = None;
    let (model, problem) = crate::config::load_task(&config)?;
    let vocab = Vocabulary::of_model(&model);
    let p_star = p_star_size(&model.predicates, &model.headers());

    let mut po_counts = Vec::new();
    let mut ap_counts = Vec::new();
    let mut po_accuracy: f64 = 1.0;
    let mut ap_accuracy: f64 = 1.0;
    let mut po_times = Vec::new();
    let mut ap_times = Vec::new();
    for &seed in seeds {
        let learn_config = InterrogationConfig {
            seed,
            ..InterrogationConfig::default()
        };
        let mut agent = Agent::ground_truth(
            model.clone(),
            problem.clone(),
            Capability::Teleport,
            ProtocolConfig::default(),
        )?;
        let learned = learn_po(&mut agent, &vocab, &learn_config)?;
        po_counts.push(agent.log().po_count() as f64);
        po_accuracy = po_accuracy.min(model_accuracy(&learned, &model)?);
        po_times.push(agent.log().timing_stats().map(|(m, _)| m).unwrap_or(0.0));

        let mut agent = Agent::ground_truth(
            model.clone(),
            problem.clone(),
            Capability::Teleport,
            ProtocolConfig::default(),
        )?;
        let learned = learn_ap(&mut agent, &vocab, &learn_config)?;
        ap_counts.push(agent.log().ap_count() as f64);
        ap_accuracy = ap_accuracy.min(model_accuracy(&learned, &model)?);
        ap_times.push(agent.log().timing_stats().map(|(m, _)| m).unwrap_or(0.0));
    }
    let (po_mean, po_var) = mean_var(&po_counts);
    let (ap_mean, ap_var) = mean_var(&ap_counts);
    Ok(BenchRow {
        domain: domain.to_string(),
        p_star,
        actions: model.actions.len(),
        seeds: seeds.len(),
        po_queries_mean: po_mean,
        po_queries_var: po_var,
        ap_queries_mean: ap_mean,
        ap_queries_var: ap_var,
        po_accuracy,
        ap_accuracy,
        po_t_mu_ms: mean_var(&po_times).0,
        ap_t_mu_ms: mean_var(&ap_times).0,
        status: "ok".to_string(),
    })
}

/// Runs both query classes over every suite domain and seed, in a worker
/// pool, and writes the aggregate side-by-side table. Per-domain failures
/// are isolated: the suite continues and the row records the error.
pub fn cmd_bench(
    base: &RunConfig,
    suite: &[String],
    seeds: &[u64],
    jobs: usize,
) -> Result<BenchOutcome> {
    if suite.is_empty() {
        bail!("the bench suite lists no domains");
    }
    let jobs = jobs.max(1);
    let mut rows: Vec<BenchRow> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for chunk in suite.chunks(jobs.max(suite.len() / jobs).max(1)) {
            let base = base.clone();
            handles.push(scope.spawn(move || {
                chunk
                    .iter()
                    .map(|domain| match bench_domain(domain, &base, seeds) {
                        Ok(row) => row,
                        Err(error) => BenchRow {
                            domain: domain.clone(),
                            p_star: 0,
                            actions: 0,
                            seeds: seeds.len(),
                            po_queries_mean: 0.0,
                            po_queries_var: 0.0,
                            ap_queries_mean: 0.0,
                            ap_queries_var: 0.0,
                            po_accuracy: 0.0,
                            ap_accuracy: 0.0,
                            po_t_mu_ms: 0.0,
                            ap_t_mu_ms: 0.0,
                            status: format!("error: {error}"),
                        },
                    })
                    .collect::<Vec<_>>()
            }));
        }
        for handle in handles {
            rows.extend(handle.join().expect("bench worker panicked"));
        }
    });
    // Deterministic merge regardless of worker interleaving.
    rows.sort_by(|a, b| a.domain.cmp(&b.domain));

    std::fs::create_dir_all(&base.out)?;
    let mut table = CsvTable::new(
        "domain,p_star,actions,seeds,po_queries_mean,po_queries_var,ap_queries_mean,ap_queries_var,po_accuracy,ap_accuracy,po_t_mu_ms,ap_t_mu_ms,status",
    );
    for row in &rows {
        table.row(&[
            &row.domain,
            &row.p_star.to_string(),
            &row.actions.to_string(),
            &row.seeds.to_string(),
            &format!("{:.3}", row.po_queries_mean),
            &format!("{:.3}", row.po_queries_var),
            &format!("{:.3}", row.ap_queries_mean),
            &format!("{:.3}", row.ap_queries_var),
            &format!("{:.6}", row.po_accuracy),
            &format!("{:.6}", row.ap_accuracy),
            &format!("{:.6}", row.po_t_mu_ms),
            &format!("{:.6}", row.ap_t_mu_ms),
            &row.status,
        ]);
    }
    let artifact = table.write(&base.out.join("bench.csv"))?;
    Ok(BenchOutcome {
        rows,
        artifacts: vec![artifact],
    })
}
