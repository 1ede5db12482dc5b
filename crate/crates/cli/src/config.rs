//! Run configuration: defaults, an optional `key = value` config file, and
//! command-line flags layered on top in that order.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use modelprobe::agent::DEFAULT_MAX_PLAN_LEN;
use modelprobe::fixtures;
use modelprobe::pddl::{parse_domain, parse_problem, DomainSource, ProblemInstance};
use modelprobe::strips::LiftedModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryClass {
    Po,
    Ap,
}

impl QueryClass {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "po" => Ok(QueryClass::Po),
            "ap" => Ok(QueryClass::Ap),
            other => bail!("unknown query class `{other}` (expected po or ap)"),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            QueryClass::Po => "po",
            QueryClass::Ap => "ap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Truth,
    Relational,
}

impl BackendKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "truth" => Ok(BackendKind::Truth),
            "relational" => Ok(BackendKind::Relational),
            other => bail!("unknown backend `{other}` (expected truth or relational)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapabilityKind {
    Teleport,
    Walk,
}

impl CapabilityKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "teleport" => Ok(CapabilityKind::Teleport),
            "walk" => Ok(CapabilityKind::Walk),
            other => bail!("unknown capability `{other}` (expected teleport or walk)"),
        }
    }
}

/// Configuration shared by the subcommands. Flags override config-file
/// entries, which override these defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub domain: String,
    pub problem: Option<String>,
    pub queries: QueryClass,
    pub backend: BackendKind,
    pub capability: CapabilityKind,
    pub max_plan_len: usize,
    pub seed: u64,
    pub budget: Option<usize>,
    pub out: PathBuf,
    pub horizon: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain: String::new(),
            problem: None,
            queries: QueryClass::Po,
            backend: BackendKind::Truth,
            capability: CapabilityKind::Teleport,
            max_plan_len: DEFAULT_MAX_PLAN_LEN,
            seed: 0,
            budget: None,
            out: PathBuf::from("out"),
            horizon: 2,
        }
    }
}

/// Parses a `key = value` config file; `#` starts a comment.
pub fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (number, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{}:{}: expected key = value", path.display(), number + 1);
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

impl RunConfig {
    /// Applies config-file entries for any key the flags did not set.
    pub fn apply_file(&mut self, map: &BTreeMap<String, String>) -> Result<()> {
        for (key, value) in map {
            match key.as_str() {
                "domain" => self.domain = value.clone(),
                "problem" => self.problem = Some(value.clone()),
                "queries" => self.queries = QueryClass::parse(value)?,
                "backend" => self.backend = BackendKind::parse(value)?,
                "capability" => self.capability = CapabilityKind::parse(value)?,
                "max-plan-len" => self.max_plan_len = value.parse()?,
                "seed" => self.seed = value.parse()?,
                "budget" => self.budget = Some(value.parse()?),
                "out" => self.out = PathBuf::from(value),
                "horizon" => self.horizon = value.parse()?,
                other => bail!("unknown config key `{other}`"),
            }
        }
        Ok(())
    }
}

/// Resolves a domain given as a file path or a bundled fixture name, along
/// with its problem (explicit, or the fixture's default).
pub fn load_task(config: &RunConfig) -> Result<(LiftedModel, ProblemInstance)> {
    let domain_path = Path::new(&config.domain);
    if domain_path.exists() {
        let source = DomainSource::from_file(domain_path)?;
        let model = parse_domain(&source).map_err(|e| {
            anyhow::anyhow!("{}: {e}", source.origin)
        })?;
        let Some(problem_name) = &config.problem else {
            bail!("--problem is required when --domain is a file path");
        };
        let problem_path = Path::new(problem_name);
        let problem_source = DomainSource::from_file(problem_path)?;
        let problem = parse_problem(&problem_source, &model)
            .map_err(|e| anyhow::anyhow!("{}: {e}", problem_source.origin))?;
        return Ok((model, problem));
    }
    let Some(fixture) = fixtures::find(&config.domain) else {
        bail!(
            "`{}` is neither a readable file nor a bundled domain",
            config.domain
        );
    };
    let problem_name = match &config.problem {
        Some(name) => name.clone(),
        None => fixtures::default_problem(&config.domain)
            .expect("bundled domains have a default problem")
            .to_string(),
    };
    if Path::new(&problem_name).exists() {
        let model = parse_domain(&DomainSource::inline(fixture.domain))
            .map_err(|e| anyhow::anyhow!("bundled {}: {e}", config.domain))?;
        let problem_source = DomainSource::from_file(Path::new(&problem_name))?;
        let problem = parse_problem(&problem_source, &model)
            .map_err(|e| anyhow::anyhow!("{problem_name}: {e}"))?;
        return Ok((model, problem));
    }
    if !fixture.problems.iter().any(|(n, _)| *n == problem_name) {
        bail!(
            "bundled domain `{}` has no problem `{problem_name}`",
            config.domain
        );
    }
    Ok(fixtures::load(&config.domain, &problem_name))
}
