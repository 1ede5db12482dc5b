//! The black-box boundary: the query/response protocol, a ground-truth
//! simulated agent and a relational-table agent, with per-agent query
//! accounting and caching of repeated queries.
//!
//! Two query classes exist. A plan-outcome query hands the agent a state and
//! a plan and gets back the longest executable prefix length and the state it
//! leads to. An action-precondition query gets back the step at which the
//! plan failed together with the failed action's full lifted precondition
//! set; a sentinel action that can never execute is appended internally so
//! the response shape is uniform even when the plan succeeds.

pub mod relational;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::pddl::ProblemInstance;
use crate::planner::{random_walk_capped, reach_constraint, ReachOutcome, DEFAULT_STATE_CAP};
use crate::strips::{
    execute_plan, type_fits, ActionHeader, GroundAction, GroundAtom, LiftedAtom, LiftedModel,
    Literal, ModelError, State,
};

use relational::TransitionTables;

/// Name reported for the appended never-executable sentinel action.
pub const FAIL_ACTION: &str = "a_fail";

/// The sentinel's reserved precondition: a predicate name no parser in this
/// workspace can produce, so it never collides with a domain predicate.
pub fn fail_precondition() -> Literal {
    Literal::pos(LiftedAtom::new("~never", &[]))
}

/// Default maximum plan length accepted in a query. Any finite bound works;
/// this one just has to be respected by both sides of the protocol.
pub const DEFAULT_MAX_PLAN_LEN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum QueryKind {
    Po,
    Ap,
}

/// A query: an initial state plus a plan to run from it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Query {
    pub kind: QueryKind,
    pub initial: State,
    pub plan: Vec<GroundAction>,
}

impl Query {
    pub fn po(initial: State, plan: Vec<GroundAction>) -> Self {
        Query {
            kind: QueryKind::Po,
            initial,
            plan,
        }
    }

    pub fn ap(initial: State, plan: Vec<GroundAction>) -> Self {
        Query {
            kind: QueryKind::Ap,
            initial,
            plan,
        }
    }
}

/// Response to a plan-outcome query: longest executed prefix and the state
/// after it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponsePo {
    pub executed: usize,
    pub state: State,
}

/// Which action failed in an action-precondition response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailedAction {
    /// The appended sentinel failed, i.e. the original plan succeeded.
    Sentinel,
    /// A plan action failed; carries its header so the lifted precondition
    /// literals can be read without further lookups.
    Schema(ActionHeader),
}

impl FailedAction {
    pub fn name(&self) -> &str {
        match self {
            FailedAction::Sentinel => FAIL_ACTION,
            FailedAction::Schema(h) => &h.name,
        }
    }
}

/// Response to an action-precondition query: the count of successfully
/// executed original actions, the failed action and its full lifted
/// precondition set, plus the final state when the original plan succeeded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseAp {
    pub executed: usize,
    pub failed: FailedAction,
    pub failed_pre: BTreeSet<Literal>,
    pub final_state: Option<State>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Response {
    Po(ResponsePo),
    Ap(ResponseAp),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AgentError {
    #[error("plan of length {len} exceeds the protocol maximum {max}")]
    PlanTooLong { len: usize, max: usize },
    #[error("query kind does not match the requested operation")]
    KindMismatch,
    #[error("malformed query: {0}")]
    Malformed(ModelError),
    #[error("walk agents only accept start states certified reachable; {0} is not")]
    UncertifiedState(State),
    #[error("state {0} is outside the relational agent's universe")]
    StateOutsideUniverse(State),
    #[error("action {0} is outside the relational agent's universe")]
    ActionOutsideUniverse(GroundAction),
    #[error("state space of {atoms} ground atoms exceeds the relational budget of {max}")]
    UniverseTooLarge { atoms: usize, max: usize },
    #[error("the relational backend does not provide walk services")]
    WalkUnsupported,
}

/// Whether the agent accepts arbitrary query start states or only states it
/// has certified reachable. Teleporting realizes hard state interventions;
/// walking realizes soft ones through search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capability {
    Teleport,
    Walk,
}

#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    pub max_plan_len: usize,
    pub cache: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            max_plan_len: DEFAULT_MAX_PLAN_LEN,
            cache: true,
        }
    }
}

/// Ordered record of answered queries. Cache hits are tracked separately and
/// never re-recorded, so the per-kind counters equal the record list
/// partitioned by kind.
#[derive(Debug, Default)]
pub struct QueryLog {
    records: Vec<(Query, Response)>,
    cache_hits: usize,
    timings: Vec<std::time::Duration>,
}

impl QueryLog {
    pub fn records(&self) -> &[(Query, Response)] {
        &self.records
    }

    pub fn po_count(&self) -> usize {
        self.records
            .iter()
            .filter(|(q, _)| q.kind == QueryKind::Po)
            .count()
    }

    pub fn ap_count(&self) -> usize {
        self.records
            .iter()
            .filter(|(q, _)| q.kind == QueryKind::Ap)
            .count()
    }

    pub fn total(&self) -> usize {
        self.records.len()
    }

    pub fn cache_hits(&self) -> usize {
        self.cache_hits
    }

    /// Mean and variance of the per-query answer times, in milliseconds
    /// (variance in ms squared). None when nothing was asked.
    pub fn timing_stats(&self) -> Option<(f64, f64)> {
        if self.timings.is_empty() {
            return None;
        }
        let ms: Vec<f64> = self.timings.iter().map(|d| d.as_secs_f64() * 1e3).collect();
        let mean = ms.iter().sum::<f64>() / ms.len() as f64;
        let var = ms.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / ms.len() as f64;
        Some((mean, var))
    }

    /// Renders the log in the stable line-delimited schema documented in
    /// `docs/formats.md`: one record per line, states as sorted atom sets,
    /// plans as comma-separated ground actions.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (query, response) in &self.records {
            let kind = match query.kind {
                QueryKind::Po => "po",
                QueryKind::Ap => "ap",
            };
            let plan: Vec<String> = query.plan.iter().map(|a| a.to_string()).collect();
            let _ = write!(out, "{kind} si={} plan=[{}]", query.initial, plan.join(","));
            match response {
                Response::Po(r) => {
                    let _ = writeln!(out, " l={} sl={}", r.executed, r.state);
                }
                Response::Ap(r) => {
                    let pre: Vec<String> = r
                        .failed_pre
                        .iter()
                        .map(|lit| match &r.failed {
                            FailedAction::Schema(h) => lit.display_with(h),
                            FailedAction::Sentinel => {
                                let tag = if lit.positive { "" } else { "!" };
                                format!("{}{}", tag, lit.atom.predicate)
                            }
                        })
                        .collect();
                    let final_state = match &r.final_state {
                        Some(s) => s.to_string(),
                        None => "-".to_string(),
                    };
                    let _ = writeln!(
                        out,
                        " l={} failed={} pre={{{}}} final={}",
                        r.executed,
                        r.failed.name(),
                        pre.join(","),
                        final_state
                    );
                }
            }
        }
        out
    }
}

enum Backend {
    Truth {
        model: LiftedModel,
        problem: ProblemInstance,
    },
    Relational {
        tables: TransitionTables,
    },
}

/// An interrogable agent. One instance serializes its query stream; distinct
/// instances are independent.
pub struct Agent {
    backend: Backend,
    capability: Capability,
    protocol: ProtocolConfig,
    log: QueryLog,
    cache: BTreeMap<Query, Response>,
    certified: BTreeSet<State>,
}

impl Agent {
    /// A simulated agent holding the hidden ground-truth model.
    pub fn ground_truth(
        model: LiftedModel,
        problem: ProblemInstance,
        capability: Capability,
        protocol: ProtocolConfig,
    ) -> Result<Self, AgentError> {
        model.validate().map_err(AgentError::Malformed)?;
        let mut certified = BTreeSet::new();
        certified.insert(problem.init.clone());
        Ok(Agent {
            backend: Backend::Truth { model, problem },
            capability,
            protocol,
            log: QueryLog::default(),
            cache: BTreeMap::new(),
            certified,
        })
    }

    /// An agent that answers from pre-stored transition relations rather
    /// than a simulator. Always a teleport agent: the relations cover every
    /// state of the universe.
    pub fn relational(
        model: &LiftedModel,
        problem: &ProblemInstance,
        protocol: ProtocolConfig,
        max_atoms: usize,
    ) -> Result<Self, AgentError> {
        let tables = TransitionTables::build(model, problem, protocol.max_plan_len, max_atoms)?;
        Ok(Agent {
            backend: Backend::Relational { tables },
            capability: Capability::Teleport,
            protocol,
            log: QueryLog::default(),
            cache: BTreeMap::new(),
            certified: BTreeSet::new(),
        })
    }

    /// The instruction set the agent publishes: its action headers.
    pub fn action_headers(&self) -> Vec<ActionHeader> {
        match &self.backend {
            Backend::Truth { model, .. } => model.headers(),
            Backend::Relational { tables } => tables.headers(),
        }
    }

    pub fn capability(&self) -> Capability {
        self.capability
    }

    pub fn objects(&self) -> &crate::strips::TypedObjects {
        match &self.backend {
            Backend::Truth { problem, .. } => &problem.objects,
            Backend::Relational { tables } => tables.objects(),
        }
    }

    pub fn initial_state(&self) -> State {
        match &self.backend {
            Backend::Truth { problem, .. } => problem.init.clone(),
            Backend::Relational { tables } => tables.initial_state(),
        }
    }

    pub fn log(&self) -> &QueryLog {
        &self.log
    }

    pub fn max_plan_len(&self) -> usize {
        self.protocol.max_plan_len
    }

    fn validate_query(&self, query: &Query) -> Result<(), AgentError> {
        if query.plan.len() > self.protocol.max_plan_len {
            return Err(AgentError::PlanTooLong {
                len: query.plan.len(),
                max: self.protocol.max_plan_len,
            });
        }
        match &self.backend {
            Backend::Truth { model, problem } => {
                for atom in query.initial.iter() {
                    validate_atom(model, problem, atom)?;
                }
                for action in &query.plan {
                    let schema = model
                        .action(&action.schema)
                        .map_err(AgentError::Malformed)?;
                    if schema.header.arity() != action.args.len() {
                        return Err(AgentError::Malformed(ModelError::ActionArity {
                            action: action.schema.clone(),
                            expected: schema.header.arity(),
                            got: action.args.len(),
                        }));
                    }
                    for (param, obj) in schema.header.params.iter().zip(action.args.iter()) {
                        let ty = problem
                            .objects
                            .get(obj)
                            .ok_or_else(|| AgentError::Malformed(ModelError::UnknownObject(obj.clone())))?;
                        if !type_fits(ty, &param.ty) {
                            return Err(AgentError::Malformed(ModelError::TypeMismatch {
                                object: obj.clone(),
                                actual: ty.clone(),
                                expected: param.ty.clone(),
                            }));
                        }
                    }
                }
                if self.capability == Capability::Walk && !self.certified.contains(&query.initial) {
                    return Err(AgentError::UncertifiedState(query.initial.clone()));
                }
            }
            Backend::Relational { tables } => {
                tables.validate_query(query)?;
            }
        }
        Ok(())
    }

    fn answer(&mut self, query: Query) -> Result<Response, AgentError> {
        self.validate_query(&query)?;
        if self.protocol.cache {
            if let Some(hit) = self.cache.get(&query) {
                self.log.cache_hits += 1;
                return Ok(hit.clone());
            }
        }
        let started = std::time::Instant::now();
        let response = match &self.backend {
            Backend::Truth { model, problem: _ } => match query.kind {
                QueryKind::Po => {
                    let (executed, state) = execute_plan(model, &query.initial, &query.plan)
                        .map_err(AgentError::Malformed)?;
                    Response::Po(ResponsePo { executed, state })
                }
                QueryKind::Ap => Response::Ap(truth_answer_ap(model, &query)?),
            },
            Backend::Relational { tables } => match query.kind {
                QueryKind::Po => Response::Po(tables.answer_po(&query)?),
                QueryKind::Ap => Response::Ap(tables.answer_ap(&query)?),
            },
        };
        self.log.timings.push(started.elapsed());
        if self.protocol.cache {
            self.cache.insert(query.clone(), response.clone());
        }
        self.log.records.push((query, response.clone()));
        Ok(response)
    }

    /// Answers a plan-outcome query. Repeated identical queries are served
    /// from cache without incrementing the counters.
    pub fn answer_po(&mut self, query: &Query) -> Result<ResponsePo, AgentError> {
        if query.kind != QueryKind::Po {
            return Err(AgentError::KindMismatch);
        }
        match self.answer(query.clone())? {
            Response::Po(r) => Ok(r),
            Response::Ap(_) => unreachable!("kind checked above"),
        }
    }

    /// Answers an action-precondition query: the sentinel action is appended
    /// internally, execution runs to the first failure, and the response
    /// carries the failed action's full lifted precondition set.
    pub fn answer_ap(&mut self, query: &Query) -> Result<ResponseAp, AgentError> {
        if query.kind != QueryKind::Ap {
            return Err(AgentError::KindMismatch);
        }
        match self.answer(query.clone())? {
            Response::Ap(r) => Ok(r),
            Response::Po(_) => unreachable!("kind checked above"),
        }
    }

    /// Simulator service: random walks from the problem's initial state.
    /// Every visited state is certified as an acceptable query start state
    /// for walk agents.
    pub fn walk_states(&mut self, steps: usize, seed: u64) -> Result<Vec<State>, AgentError> {
        match &self.backend {
            Backend::Truth { model, problem } => {
                let states = random_walk_capped(model, problem, steps, seed, DEFAULT_STATE_CAP);
                self.certified.extend(states.iter().cloned());
                Ok(states)
            }
            Backend::Relational { .. } => Err(AgentError::WalkUnsupported),
        }
    }

    /// Simulator service: searches for a certified-reachable state
    /// satisfying the given constraints, starting from an already certified
    /// state.
    pub fn reach(
        &mut self,
        from: &State,
        require_true: BTreeSet<GroundAtom>,
        require_false: BTreeSet<GroundAtom>,
        bound: usize,
    ) -> Result<ReachOutcome, AgentError> {
        match &self.backend {
            Backend::Truth { model, problem } => {
                if self.capability == Capability::Walk && !self.certified.contains(from) {
                    return Err(AgentError::UncertifiedState(from.clone()));
                }
                let outcome =
                    reach_constraint(model, problem, from, require_true, require_false, bound);
                if let ReachOutcome::Reached(_, state) = &outcome {
                    self.certified.insert(state.clone());
                }
                Ok(outcome)
            }
            Backend::Relational { .. } => Err(AgentError::WalkUnsupported),
        }
    }

    /// Read-only access to the relational tables, when this agent has them.
    pub fn tables(&self) -> Option<&TransitionTables> {
        match &self.backend {
            Backend::Relational { tables } => Some(tables),
            Backend::Truth { .. } => None,
        }
    }
}

fn validate_atom(
    model: &LiftedModel,
    problem: &ProblemInstance,
    atom: &GroundAtom,
) -> Result<(), AgentError> {
    let decl = model
        .predicates
        .get(&atom.predicate)
        .ok_or_else(|| AgentError::Malformed(ModelError::UnknownPredicate(atom.predicate.clone())))?;
    if decl.arity() != atom.args.len() {
        return Err(AgentError::Malformed(ModelError::PredicateArity {
            predicate: atom.predicate.clone(),
            expected: decl.arity(),
            got: atom.args.len(),
        }));
    }
    for (obj, slot) in atom.args.iter().zip(decl.param_types.iter()) {
        let ty = problem
            .objects
            .get(obj)
            .ok_or_else(|| AgentError::Malformed(ModelError::UnknownObject(obj.clone())))?;
        if !type_fits(ty, slot) {
            return Err(AgentError::Malformed(ModelError::TypeMismatch {
                object: obj.clone(),
                actual: ty.clone(),
                expected: slot.clone(),
            }));
        }
    }
    Ok(())
}

fn truth_answer_ap(model: &LiftedModel, query: &Query) -> Result<ResponseAp, AgentError> {
    let mut state = query.initial.clone();
    for (i, action) in query.plan.iter().enumerate() {
        let (next, succ) =
            crate::strips::apply_action(model, &state, action).map_err(AgentError::Malformed)?;
        if !succ {
            let schema = model.action(&action.schema).map_err(AgentError::Malformed)?;
            return Ok(ResponseAp {
                executed: i,
                failed: FailedAction::Schema(schema.header.clone()),
                failed_pre: schema.pre.clone(),
                final_state: None,
            });
        }
        state = next;
    }
    // The appended sentinel fails; the original plan ran to completion.
    Ok(ResponseAp {
        executed: query.plan.len(),
        failed: FailedAction::Sentinel,
        failed_pre: [fail_precondition()].into_iter().collect(),
        final_state: Some(state),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn drive_agent(capability: Capability) -> Agent {
        let (model, problem) = fixtures::load("drive", "drive-3loc");
        Agent::ground_truth(model, problem, capability, ProtocolConfig::default()).unwrap()
    }

    fn at(t: &str, l: &str) -> GroundAtom {
        GroundAtom::new("at", &[t, l])
    }

    fn drive(t: &str, s: &str, d: &str) -> GroundAction {
        GroundAction::new("drive", &[t, s, d])
    }

    fn blue(l: &str) -> GroundAtom {
        GroundAtom::new("src_blue", &[l])
    }

    fn full_init() -> State {
        State::from_atoms([at("t1", "l1"), blue("l1"), blue("l2"), blue("l3")])
    }

    #[test]
    fn po_response_matches_plan_execution() {
        let mut agent = drive_agent(Capability::Teleport);
        let plan = vec![
            drive("t1", "l1", "l2"),
            drive("t1", "l2", "l3"),
            drive("t1", "l2", "l1"),
        ];
        let r = agent.answer_po(&Query::po(full_init(), plan)).unwrap();
        assert_eq!(r.executed, 2);
        assert_eq!(
            r.state,
            State::from_atoms([at("t1", "l3"), blue("l1"), blue("l2"), blue("l3")])
        );
    }

    #[test]
    fn empty_po_plan_returns_initial_state() {
        let mut agent = drive_agent(Capability::Teleport);
        let r = agent.answer_po(&Query::po(full_init(), vec![])).unwrap();
        assert_eq!(r.executed, 0);
        assert_eq!(r.state, full_init());
    }

    #[test]
    fn repeated_queries_hit_the_cache_once_counted() {
        let mut agent = drive_agent(Capability::Teleport);
        let q = Query::po(full_init(), vec![drive("t1", "l1", "l2")]);
        let a = agent.answer_po(&q).unwrap();
        let b = agent.answer_po(&q).unwrap();
        assert_eq!(a, b);
        assert_eq!(agent.log().po_count(), 1);
        assert_eq!(agent.log().cache_hits(), 1);
    }

    #[test]
    fn ap_failure_reports_the_failed_actions_preconditions() {
        let mut agent = drive_agent(Capability::Teleport);
        let q = Query::ap(full_init(), vec![drive("t1", "l2", "l3")]);
        let r = agent.answer_ap(&q).unwrap();
        assert_eq!(r.executed, 0);
        assert_eq!(r.failed.name(), "drive");
        assert_eq!(r.final_state, None);
        let header = match &r.failed {
            FailedAction::Schema(h) => h,
            other => panic!("unexpected {other:?}"),
        };
        let rendered: Vec<String> = r.failed_pre.iter().map(|l| l.display_with(header)).collect();
        assert_eq!(rendered, vec!["at(?t,?s)".to_string()]);
    }

    #[test]
    fn ap_success_reports_sentinel_and_final_state() {
        let mut agent = drive_agent(Capability::Teleport);
        let q = Query::ap(full_init(), vec![drive("t1", "l1", "l2")]);
        let r = agent.answer_ap(&q).unwrap();
        assert_eq!(r.executed, 1);
        assert_eq!(r.failed, FailedAction::Sentinel);
        assert_eq!(r.failed_pre.len(), 1);
        assert!(r.final_state.unwrap().contains(&at("t1", "l2")));
    }

    #[test]
    fn ap_empty_plan_succeeds_immediately() {
        let mut agent = drive_agent(Capability::Teleport);
        let r = agent.answer_ap(&Query::ap(full_init(), vec![])).unwrap();
        assert_eq!(r.executed, 0);
        assert_eq!(r.failed, FailedAction::Sentinel);
        assert_eq!(r.final_state, Some(full_init()));
    }

    #[test]
    fn plans_beyond_the_maximum_are_rejected() {
        let mut agent = drive_agent(Capability::Teleport);
        let plan = vec![drive("t1", "l1", "l2"); DEFAULT_MAX_PLAN_LEN + 1];
        let err = agent.answer_po(&Query::po(full_init(), plan)).unwrap_err();
        assert!(matches!(err, AgentError::PlanTooLong { .. }));
    }

    #[test]
    fn walk_agents_reject_uncertified_states() {
        let mut agent = drive_agent(Capability::Walk);
        let strange = State::from_atoms([at("t1", "l2"), at("t1", "l3")]);
        let err = agent
            .answer_po(&Query::po(strange, vec![]))
            .unwrap_err();
        assert!(matches!(err, AgentError::UncertifiedState(_)));
        // The initial state is always certified.
        agent.answer_po(&Query::po(full_init(), vec![])).unwrap();
    }

    #[test]
    fn walk_services_certify_reached_states() {
        let mut agent = drive_agent(Capability::Walk);
        let states = agent.walk_states(20, 11).unwrap();
        assert!(!states.is_empty());
        for state in &states {
            agent.answer_po(&Query::po(state.clone(), vec![])).unwrap();
        }
        let outcome = agent
            .reach(
                &full_init(),
                [at("t1", "l2")].into_iter().collect(),
                BTreeSet::new(),
                10_000,
            )
            .unwrap();
        match outcome {
            ReachOutcome::Reached(_, state) => {
                agent.answer_po(&Query::po(state, vec![])).unwrap();
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cache_toggle_changes_counters_not_responses() {
        let (model, problem) = fixtures::load("drive", "drive-3loc");
        let mut cached = Agent::ground_truth(
            model.clone(),
            problem.clone(),
            Capability::Teleport,
            ProtocolConfig::default(),
        )
        .unwrap();
        let mut uncached = Agent::ground_truth(
            model,
            problem,
            Capability::Teleport,
            ProtocolConfig {
                cache: false,
                ..ProtocolConfig::default()
            },
        )
        .unwrap();
        let q = Query::po(full_init(), vec![drive("t1", "l1", "l2")]);
        for _ in 0..3 {
            let a = cached.answer_po(&q).unwrap();
            let b = uncached.answer_po(&q).unwrap();
            assert_eq!(a, b);
        }
        assert_eq!(cached.log().po_count(), 1);
        assert_eq!(uncached.log().po_count(), 3);
    }

    #[test]
    fn malformed_queries_are_protocol_errors() {
        let mut agent = drive_agent(Capability::Teleport);
        let err = agent
            .answer_po(&Query::po(
                State::from_atoms([GroundAtom::new("at", &["t1", "l9"])]),
                vec![],
            ))
            .unwrap_err();
        assert!(matches!(err, AgentError::Malformed(_)));
    }

    #[test]
    fn log_renders_the_documented_schema() {
        let mut agent = drive_agent(Capability::Teleport);
        let init = State::from_atoms([at("t1", "l1")]);
        agent
            .answer_po(&Query::po(init.clone(), vec![drive("t1", "l1", "l2")]))
            .unwrap();
        agent
            .answer_ap(&Query::ap(init, vec![drive("t1", "l2", "l3")]))
            .unwrap();
        let text = agent.log().render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(
            lines[0],
            "po si={at(t1,l1)} plan=[drive(t1,l1,l2)] l=1 sl={at(t1,l2)}"
        );
        assert_eq!(
            lines[1],
            "ap si={at(t1,l1)} plan=[drive(t1,l2,l3)] l=0 failed=drive pre={at(?t,?s)} final=-"
        );
    }

    /// Monotone prefix: extending a plan never changes the executed prefix
    /// before the failure point, and a failed plan's count never grows.
    #[test]
    fn po_prefix_counts_are_monotone() {
        let mut agent = drive_agent(Capability::Teleport);
        let plans: Vec<Vec<GroundAction>> = vec![
            vec![drive("t1", "l1", "l2")],
            vec![drive("t1", "l1", "l2"), drive("t1", "l2", "l3")],
            vec![
                drive("t1", "l1", "l2"),
                drive("t1", "l2", "l3"),
                drive("t1", "l2", "l1"),
            ],
            vec![
                drive("t1", "l1", "l2"),
                drive("t1", "l2", "l3"),
                drive("t1", "l2", "l1"),
                drive("t1", "l1", "l2"),
            ],
        ];
        let mut last = 0;
        for plan in plans {
            let len = plan.len();
            let r = agent.answer_po(&Query::po(full_init(), plan)).unwrap();
            if last < len {
                assert!(r.executed >= last);
            }
            last = r.executed;
        }
        assert_eq!(last, 2);
    }

    /// AP fails at step l+1 exactly when PO reports prefix length l on the
    /// same query body.
    #[test]
    fn ap_and_po_agree_on_failure_position() {
        let mut agent = drive_agent(Capability::Teleport);
        let bodies = vec![
            vec![drive("t1", "l1", "l2")],
            vec![drive("t1", "l2", "l3")],
            vec![drive("t1", "l1", "l2"), drive("t1", "l2", "l3")],
            vec![drive("t1", "l1", "l3"), drive("t1", "l2", "l1")],
        ];
        for plan in bodies {
            let po = agent
                .answer_po(&Query::po(full_init(), plan.clone()))
                .unwrap();
            let ap = agent.answer_ap(&Query::ap(full_init(), plan.clone())).unwrap();
            assert_eq!(po.executed, ap.executed);
            if po.executed == plan.len() {
                assert_eq!(ap.failed, FailedAction::Sentinel);
                assert_eq!(ap.final_state, Some(po.state));
            } else {
                assert_eq!(ap.failed.name(), plan[po.executed].schema);
            }
        }
    }
}
