//! The learning engine: an online query policy that recovers every palm
//! tuple of a hidden model, in two variants.
//!
//! Plan-outcome learning drives single-action plans. Per action it first
//! searches for a state where the action executes (a hard state intervention
//! for teleport agents, realized by synthesizing truth assignments over
//! `P*(a)`; a soft one for walk agents, realized through reachability
//! search), then flips one `P*(a)` atom at a time: a flip that makes the
//! action fail pins that atom as a precondition with the polarity it had in
//! the executing state, a flip that leaves the action executable pins it as
//! a non-precondition and contributes an effect observation. Effects are
//! read off the state diffs of all successful probes; because no-op effects
//! are outlawed in well-formed models, every true effect is visible from at
//! least one probe.
//!
//! Action-precondition learning needs two queries per action: one from a
//! state where the action is guaranteed to fail, whose response hands back
//! the failed action's full precondition set verbatim, and one from a state
//! assembled to satisfy exactly that set, whose final-state diff yields the
//! effects.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::agent::{Agent, AgentError, Capability, FailedAction, Query, ResponsePo};
use crate::planner::ReachOutcome;
use crate::strips::{
    canonical_binding, instantiate_with_parameters, ActionHeader, GroundAction, GroundAtom,
    LiftedAtom, LiftedModel, Literal, Location, Mode, PalmTuple, PredicateDecl, State, TypeName,
    TypedObjects,
};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("agent protocol error: {0}")]
    Agent(#[from] AgentError),
    #[error("atom {0} mentions an object outside the canonical grounding")]
    NonCanonicalObject(GroundAtom),
    #[error("vocabulary mismatch: {0}")]
    VocabularyMismatch(String),
    #[error("agent responses are inconsistent: {0}")]
    InconsistentAgent(String),
}

/// The user-supplied side of an interrogation task: the predicate vocabulary
/// (with its type names) the model is to be expressed in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    pub name: String,
    pub types: BTreeSet<TypeName>,
    pub predicates: BTreeMap<String, PredicateDecl>,
}

impl Vocabulary {
    pub fn of_model(model: &LiftedModel) -> Self {
        Vocabulary {
            name: model.name.clone(),
            types: model.types.clone(),
            predicates: model.predicates.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct InterrogationConfig {
    pub seed: u64,
    /// Maximum queries spent searching for an executing state, per action.
    pub search_budget: usize,
    /// Steps of agent-side random walking used by walk agents.
    pub walk_steps: usize,
    /// Planner expansion bound for walk agents' reachability searches.
    pub reach_bound: usize,
}

impl Default for InterrogationConfig {
    fn default() -> Self {
        InterrogationConfig {
            seed: 0,
            search_budget: 1024,
            walk_steps: 400,
            reach_bound: 100_000,
        }
    }
}

/// An injective substitution of distinct objects for one schema's
/// parameters. Inverting it turns ground observations back into lifted
/// literals unambiguously.
#[derive(Debug, Clone)]
pub struct CanonicalGrounding {
    pub header: ActionHeader,
    pub binding: Vec<String>,
    inverse: BTreeMap<String, usize>,
}

impl CanonicalGrounding {
    pub fn new(header: &ActionHeader, objects: &TypedObjects) -> Option<Self> {
        let binding = canonical_binding(header, objects)?;
        let inverse = binding
            .iter()
            .enumerate()
            .map(|(i, obj)| (obj.clone(), i))
            .collect();
        Some(CanonicalGrounding {
            header: header.clone(),
            binding,
            inverse,
        })
    }

    pub fn ground_action(&self) -> GroundAction {
        GroundAction {
            schema: self.header.name.clone(),
            args: self.binding.clone(),
        }
    }

    pub fn ground(&self, atom: &LiftedAtom) -> GroundAtom {
        atom.ground(&self.binding)
    }

    /// Inverts the substitution: each ground argument maps back to the
    /// unique parameter it was bound to. An object outside the binding
    /// signals vocabulary leakage.
    pub fn lift(&self, atom: &GroundAtom) -> Result<LiftedAtom, LearnError> {
        let mut args = Vec::new();
        for obj in &atom.args {
            let idx = self
                .inverse
                .get(obj)
                .ok_or_else(|| LearnError::NonCanonicalObject(atom.clone()))?;
            args.push(*idx);
        }
        Ok(LiftedAtom {
            predicate: atom.predicate.clone(),
            args,
        })
    }
}

/// A palm tuple fixed by the learner, with the query (index into this run's
/// query sequence) that fixed it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixEvent {
    pub query_index: usize,
    pub tuple: PalmTuple,
}

/// The learner's output: the model, per-tuple provenance (indices of the
/// supporting queries in this run's sequence), the ordered fix events behind
/// the accuracy trace, and any modes a walk agent could not resolve. An
/// unresolved location is reported, never silently defaulted; it appears as
/// `absent` in the model's palm projection.
#[derive(Debug)]
pub struct LearnedModel {
    pub model: LiftedModel,
    pub provenance: BTreeMap<PalmTuple, Vec<usize>>,
    pub fix_events: Vec<FixEvent>,
    pub unresolved: BTreeSet<(String, LiftedAtom, Location)>,
    pub queries_used: usize,
}

/// One step of an online query policy: the next query to pose, or the
/// terminal signal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolicyStep {
    Ask(Query),
    Stop,
}

// Per-action bookkeeping shared by both learners.
struct ActionLearn {
    grounding: CanonicalGrounding,
    lifted: Vec<LiftedAtom>,
    ground: Vec<GroundAtom>,
    pre_modes: BTreeMap<usize, (Mode, Vec<usize>)>,
    eff_modes: BTreeMap<usize, (Mode, Vec<usize>)>,
    unresolved: BTreeSet<(usize, Location)>,
    last_query: Option<usize>,
}

impl ActionLearn {
    fn new(
        header: &ActionHeader,
        predicates: &BTreeMap<String, PredicateDecl>,
        objects: &TypedObjects,
    ) -> Option<Self> {
        let grounding = CanonicalGrounding::new(header, objects)?;
        let lifted: Vec<LiftedAtom> = instantiate_with_parameters(predicates.values(), header)
            .into_iter()
            .collect();
        let ground = lifted.iter().map(|a| grounding.ground(a)).collect();
        Some(ActionLearn {
            grounding,
            lifted,
            ground,
            pre_modes: BTreeMap::new(),
            eff_modes: BTreeMap::new(),
            unresolved: BTreeSet::new(),
            last_query: None,
        })
    }

    fn name(&self) -> &str {
        &self.grounding.header.name
    }

    /// Candidate executing state for a truth-assignment index over the
    /// action's atoms.
    fn state_of_bits(&self, bits: u64) -> State {
        State::from_atoms(
            self.ground
                .iter()
                .enumerate()
                .filter(|(i, _)| bits & (1 << i) != 0)
                .map(|(_, a)| a.clone()),
        )
    }

    /// Records pre mode for atom `i` from a flip probe outcome.
    fn record_pre(&mut self, i: usize, mode: Mode, query: usize, events: &mut Vec<FixEvent>) {
        self.pre_modes.insert(i, (mode, vec![query]));
        events.push(FixEvent {
            query_index: query,
            tuple: PalmTuple {
                action: self.name().to_string(),
                atom: self.lifted[i].clone(),
                location: Location::Pre,
                mode,
            },
        });
        self.last_query = Some(query);
    }

    /// Scans one successful probe's (sent, result) pair for effect
    /// witnesses. An observed add or delete is definitive in a
    /// deterministic setting.
    fn scan_effects(
        &mut self,
        sent: &State,
        result: &State,
        query: usize,
        events: &mut Vec<FixEvent>,
    ) {
        for (i, atom) in self.ground.iter().enumerate() {
            let before = sent.contains(atom);
            let after = result.contains(atom);
            let mode = match (before, after) {
                (false, true) => Mode::Pos,
                (true, false) => Mode::Neg,
                _ => continue,
            };
            if let Some((prior, _)) = self.eff_modes.get(&i) {
                debug_assert_eq!(*prior, mode, "deterministic agents cannot flip effects");
                continue;
            }
            self.eff_modes.insert(i, (mode, vec![query]));
            events.push(FixEvent {
                query_index: query,
                tuple: PalmTuple {
                    action: self.name().to_string(),
                    atom: self.lifted[i].clone(),
                    location: Location::Eff,
                    mode,
                },
            });
        }
        self.last_query = Some(query);
    }

    /// After all probes. An atom with no effect witness is concluded absent
    /// only when its own flip was answered: the executing state and the flip
    /// state then cover both of its polarities, so an unobserved add or
    /// delete is impossible in a deterministic setting. Otherwise the
    /// location stays unresolved.
    fn finalize(&mut self, events: &mut Vec<FixEvent>) {
        let closing_query = self.last_query.unwrap_or(0);
        for i in 0..self.lifted.len() {
            let pre_resolved = self.pre_modes.contains_key(&i);
            if !pre_resolved {
                self.unresolved.insert((i, Location::Pre));
            }
            if self.eff_modes.contains_key(&i) {
                continue;
            }
            if pre_resolved {
                self.eff_modes.insert(i, (Mode::Absent, vec![closing_query]));
                events.push(FixEvent {
                    query_index: closing_query,
                    tuple: PalmTuple {
                        action: self.name().to_string(),
                        atom: self.lifted[i].clone(),
                        location: Location::Eff,
                        mode: Mode::Absent,
                    },
                });
            } else {
                self.unresolved.insert((i, Location::Eff));
            }
        }
    }

    fn mark_all_unresolved(&mut self) {
        for i in 0..self.lifted.len() {
            self.unresolved.insert((i, Location::Pre));
            self.unresolved.insert((i, Location::Eff));
        }
    }
}

fn assemble(
    vocab: &Vocabulary,
    mut work: Vec<ActionLearn>,
    events: Vec<FixEvent>,
    queries_used: usize,
) -> LearnedModel {
    let mut actions = Vec::new();
    let mut provenance = BTreeMap::new();
    let mut unresolved = BTreeSet::new();
    for item in &mut work {
        let mut pre = BTreeSet::new();
        let mut eff = BTreeSet::new();
        for (section, modes) in [(Location::Pre, &item.pre_modes), (Location::Eff, &item.eff_modes)]
        {
            for (&i, (mode, queries)) in modes.iter() {
                let atom = item.lifted[i].clone();
                provenance.insert(
                    PalmTuple {
                        action: item.name().to_string(),
                        atom: atom.clone(),
                        location: section,
                        mode: *mode,
                    },
                    queries.clone(),
                );
                let literal = match mode {
                    Mode::Pos => Literal::pos(atom),
                    Mode::Neg => Literal::neg(atom),
                    Mode::Absent => continue,
                };
                match section {
                    Location::Pre => pre.insert(literal),
                    Location::Eff => eff.insert(literal),
                };
            }
        }
        for (i, location) in &item.unresolved {
            unresolved.insert((item.name().to_string(), item.lifted[*i].clone(), *location));
        }
        actions.push(crate::strips::ActionSchema {
            header: item.grounding.header.clone(),
            pre,
            eff,
        });
    }
    let model = LiftedModel::new(
        &vocab.name,
        vocab.types.iter().map(|t| t.as_str()).collect(),
        vocab.predicates.values().cloned().collect(),
        actions,
    );
    LearnedModel {
        model,
        provenance,
        fix_events: events,
        unresolved,
        queries_used,
    }
}

/// Deterministic enumeration order for executing-state candidates: all-true,
/// all-false, single flips off all-true, single flips off all-false, then
/// the remaining assignments in binary order.
struct CandidateCursor {
    k: usize,
    stage: VecDeque<u64>,
    lex: u64,
    seen: BTreeSet<u64>,
}

impl CandidateCursor {
    fn new(k: usize) -> Self {
        let all = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
        let mut stage = VecDeque::new();
        stage.push_back(all);
        if k > 0 {
            stage.push_back(0);
            for i in 0..k {
                stage.push_back(all ^ (1 << i));
            }
            for i in 0..k {
                stage.push_back(1 << i);
            }
        }
        CandidateCursor {
            k,
            stage,
            lex: 0,
            seen: BTreeSet::new(),
        }
    }

    fn next(&mut self) -> Option<u64> {
        while let Some(bits) = self.stage.pop_front() {
            if self.seen.insert(bits) {
                return Some(bits);
            }
        }
        let limit = if self.k >= 64 { u64::MAX } else { 1u64 << self.k };
        while self.lex < limit {
            let bits = self.lex;
            self.lex += 1;
            if self.seen.insert(bits) {
                return Some(bits);
            }
        }
        None
    }
}

enum Phase {
    Search(CandidateCursor, usize),
    Flip(usize),
}

enum Awaiting {
    Search { state: State },
    Flip { atom: usize, state: State },
}

/// The online plan-outcome policy for teleport agents: a function from the
/// answers received so far to the next query or Stop. Once it has emitted
/// Stop, every extension of the answer string maps to Stop.
pub struct PoPolicy {
    vocab: Vocabulary,
    work: Vec<ActionLearn>,
    skipped: Vec<ActionLearn>,
    current: usize,
    phase: Phase,
    base: Option<State>,
    awaiting: Option<Awaiting>,
    events: Vec<FixEvent>,
    queries_sent: usize,
    search_budget: usize,
    stopped: bool,
}

impl PoPolicy {
    pub fn new(
        vocab: Vocabulary,
        headers: Vec<ActionHeader>,
        objects: &TypedObjects,
        config: &InterrogationConfig,
    ) -> Self {
        let mut sorted = headers;
        sorted.sort();
        let mut work = Vec::new();
        let mut skipped = Vec::new();
        for header in &sorted {
            match ActionLearn::new(header, &vocab.predicates, objects) {
                Some(item) => work.push(item),
                None => {
                    // Not enough distinct objects to ground this schema; it
                    // stays entirely unresolved.
                    let mut item = ActionLearn {
                        grounding: CanonicalGrounding {
                            header: header.clone(),
                            binding: Vec::new(),
                            inverse: BTreeMap::new(),
                        },
                        lifted: instantiate_with_parameters(vocab.predicates.values(), header)
                            .into_iter()
                            .collect(),
                        ground: Vec::new(),
                        pre_modes: BTreeMap::new(),
                        eff_modes: BTreeMap::new(),
                        unresolved: BTreeSet::new(),
                        last_query: None,
                    };
                    item.mark_all_unresolved();
                    skipped.push(item);
                }
            }
        }
        let first_k = work.first().map(|w| w.lifted.len()).unwrap_or(0);
        PoPolicy {
            vocab,
            work,
            skipped,
            current: 0,
            phase: Phase::Search(CandidateCursor::new(first_k), 0),
            base: None,
            awaiting: None,
            events: Vec::new(),
            queries_sent: 0,
            search_budget: config.search_budget,
            stopped: false,
        }
    }

    fn begin_action(&mut self) {
        let k = self.work[self.current].lifted.len();
        self.phase = Phase::Search(CandidateCursor::new(k), 0);
    }

    /// Feeds the answer to the previously emitted query (None on the first
    /// call) and yields the next step.
    pub fn next(&mut self, answer: Option<&ResponsePo>) -> PolicyStep {
        if self.stopped {
            return PolicyStep::Stop;
        }
        if let Some(awaiting) = self.awaiting.take() {
            let response = answer.expect("an outstanding query requires its answer");
            let query_index = self.queries_sent - 1;
            let item = &mut self.work[self.current];
            match awaiting {
                Awaiting::Search { state } => {
                    if response.executed == 1 {
                        item.scan_effects(&state, &response.state, query_index, &mut self.events);
                        self.phase = Phase::Flip(0);
                        // Remember the executing state for the flip probes.
                        self.base = Some(state);
                    }
                }
                Awaiting::Flip { atom, state } => {
                    if response.executed == 1 {
                        item.record_pre(atom, Mode::Absent, query_index, &mut self.events);
                        item.scan_effects(&state, &response.state, query_index, &mut self.events);
                    } else {
                        let base = self.base.as_ref().expect("flips follow a found base");
                        let mode = if base.contains(&item.ground[atom]) {
                            Mode::Pos
                        } else {
                            Mode::Neg
                        };
                        item.record_pre(atom, mode, query_index, &mut self.events);
                    }
                }
            }
        }
        loop {
            if self.current >= self.work.len() {
                self.stopped = true;
                return PolicyStep::Stop;
            }
            let plan = vec![self.work[self.current].grounding.ground_action()];
            match &mut self.phase {
                Phase::Search(cursor, spent) => {
                    if *spent >= self.search_budget {
                        // Action unlearnable under budget: report all modes
                        // unknown and move on.
                        self.work[self.current].mark_all_unresolved();
                        self.advance_action();
                        continue;
                    }
                    match cursor.next() {
                        Some(bits) => {
                            *spent += 1;
                            let state = self.work[self.current].state_of_bits(bits);
                            self.awaiting = Some(Awaiting::Search {
                                state: state.clone(),
                            });
                            self.queries_sent += 1;
                            return PolicyStep::Ask(Query::po(state, plan));
                        }
                        None => {
                            self.work[self.current].mark_all_unresolved();
                            self.advance_action();
                            continue;
                        }
                    }
                }
                Phase::Flip(i) => {
                    let item = &self.work[self.current];
                    if *i >= item.lifted.len() {
                        self.work[self.current].finalize(&mut self.events);
                        self.base = None;
                        self.advance_action();
                        continue;
                    }
                    let atom = *i;
                    *i += 1;
                    let base = self.base.as_ref().expect("flip phase has a base state");
                    let state = base.toggled(&self.work[self.current].ground[atom]);
                    self.awaiting = Some(Awaiting::Flip {
                        atom,
                        state: state.clone(),
                    });
                    self.queries_sent += 1;
                    return PolicyStep::Ask(Query::po(state, plan));
                }
            }
        }
    }

    fn advance_action(&mut self) {
        self.current += 1;
        if self.current < self.work.len() {
            self.begin_action();
        }
    }

    fn into_learned(mut self) -> LearnedModel {
        let mut work = std::mem::take(&mut self.work);
        work.append(&mut self.skipped);
        work.sort_by(|a, b| a.name().cmp(b.name()).then(a.grounding.binding.cmp(&b.grounding.binding)));
        assemble(&self.vocab, work, self.events, self.queries_sent)
    }
}

/// Drives the plan-outcome policy against a teleport agent, or the
/// search-mediated variant against a walk agent, until Stop.
pub fn learn_po(
    agent: &mut Agent,
    vocab: &Vocabulary,
    config: &InterrogationConfig,
) -> Result<LearnedModel, LearnError> {
    match agent.capability() {
        Capability::Teleport => {
            let mut policy = PoPolicy::new(
                vocab.clone(),
                agent.action_headers(),
                &agent.objects().clone(),
                config,
            );
            let mut answer: Option<ResponsePo> = None;
            loop {
                match policy.next(answer.as_ref()) {
                    PolicyStep::Stop => break,
                    PolicyStep::Ask(query) => {
                        answer = Some(agent.answer_po(&query)?);
                    }
                }
            }
            Ok(policy.into_learned())
        }
        Capability::Walk => learn_po_walk(agent, vocab, config),
    }
}

fn learn_po_walk(
    agent: &mut Agent,
    vocab: &Vocabulary,
    config: &InterrogationConfig,
) -> Result<LearnedModel, LearnError> {
    let objects = agent.objects().clone();
    let mut headers = agent.action_headers();
    headers.sort();
    let mut work = Vec::new();
    let mut events = Vec::new();
    let mut queries = 0usize;

    let walked = agent.walk_states(config.walk_steps, config.seed)?;

    for header in &headers {
        let Some(mut item) = ActionLearn::new(header, &vocab.predicates, &objects) else {
            continue;
        };
        let plan = vec![item.grounding.ground_action()];

        // Soft state intervention: draw candidate executing states from the
        // agent's random walks, then from targeted reachability searches
        // over truth assignments of the action's atoms.
        let mut base: Option<State> = None;
        let mut spent = 0usize;
        let mut tried: BTreeSet<State> = BTreeSet::new();
        for state in &walked {
            if spent >= config.search_budget || base.is_some() {
                break;
            }
            if !tried.insert(state.clone()) {
                continue;
            }
            let response = agent.answer_po(&Query::po(state.clone(), plan.clone()))?;
            let index = queries;
            queries += 1;
            spent += 1;
            if response.executed == 1 {
                item.scan_effects(state, &response.state, index, &mut events);
                base = Some(state.clone());
            }
        }
        if base.is_none() {
            let mut cursor = CandidateCursor::new(item.lifted.len());
            while spent < config.search_budget {
                let Some(bits) = cursor.next() else { break };
                let (require_true, require_false) = constraint_of_bits(&item, bits);
                let from = agent.initial_state();
                match agent.reach(&from, require_true, require_false, config.reach_bound)? {
                    ReachOutcome::Reached(_, state) => {
                        if !tried.insert(state.clone()) {
                            continue;
                        }
                        let response = agent.answer_po(&Query::po(state.clone(), plan.clone()))?;
                        let index = queries;
                        queries += 1;
                        spent += 1;
                        if response.executed == 1 {
                            item.scan_effects(&state, &response.state, index, &mut events);
                            base = Some(state);
                            break;
                        }
                    }
                    ReachOutcome::NoPlan | ReachOutcome::Inconclusive => continue,
                }
            }
        }

        let Some(base) = base else {
            item.mark_all_unresolved();
            work.push(item);
            continue;
        };

        // Flip probes through reachability: a reached state must differ from
        // the base on exactly the flipped atom, over the action's atom set.
        for i in 0..item.lifted.len() {
            let target = base.toggled(&item.ground[i]);
            let mut require_true = BTreeSet::new();
            let mut require_false = BTreeSet::new();
            for atom in item.ground.iter() {
                if target.contains(atom) {
                    require_true.insert(atom.clone());
                } else {
                    require_false.insert(atom.clone());
                }
            }
            match agent.reach(&base, require_true, require_false, config.reach_bound)? {
                ReachOutcome::Reached(_, state) => {
                    let response = agent.answer_po(&Query::po(state.clone(), plan.clone()))?;
                    let index = queries;
                    queries += 1;
                    if response.executed == 1 {
                        item.record_pre(i, Mode::Absent, index, &mut events);
                        item.scan_effects(&state, &response.state, index, &mut events);
                    } else {
                        let mode = if base.contains(&item.ground[i]) {
                            Mode::Pos
                        } else {
                            Mode::Neg
                        };
                        item.record_pre(i, mode, index, &mut events);
                    }
                }
                ReachOutcome::NoPlan | ReachOutcome::Inconclusive => {
                    item.unresolved.insert((i, Location::Pre));
                }
            }
        }
        item.finalize(&mut events);
        work.push(item);
    }

    Ok(assemble(vocab, work, events, queries))
}

fn constraint_of_bits(
    item: &ActionLearn,
    bits: u64,
) -> (BTreeSet<GroundAtom>, BTreeSet<GroundAtom>) {
    let mut require_true = BTreeSet::new();
    let mut require_false = BTreeSet::new();
    for (i, atom) in item.ground.iter().enumerate() {
        if bits & (1 << i) != 0 {
            require_true.insert(atom.clone());
        } else {
            require_false.insert(atom.clone());
        }
    }
    (require_true, require_false)
}

/// Action-precondition learning: two queries per action when the first
/// probe fails as planned, and at most `1 + |P*(a)|` when the action has no
/// positive preconditions and a failing state has to be swept for.
pub fn learn_ap(
    agent: &mut Agent,
    vocab: &Vocabulary,
    _config: &InterrogationConfig,
) -> Result<LearnedModel, LearnError> {
    let objects = agent.objects().clone();
    let mut headers = agent.action_headers();
    headers.sort();
    let mut work = Vec::new();
    let mut events = Vec::new();
    let mut queries = 0usize;

    for header in &headers {
        let Some(mut item) = ActionLearn::new(header, &vocab.predicates, &objects) else {
            continue;
        };
        let plan = vec![item.grounding.ground_action()];
        let atom_set: BTreeSet<LiftedAtom> = item.lifted.iter().cloned().collect();

        // Query 1: from the all-false state. Any positive precondition makes
        // the action fail there and the response carries pre(a) verbatim.
        let first = agent.answer_ap(&Query::ap(State::empty(), plan.clone()))?;
        let first_index = queries;
        queries += 1;

        let mut pre: Option<(BTreeSet<Literal>, usize)> = None;
        match &first.failed {
            FailedAction::Schema(h) if h.name == *item.name() => {
                pre = Some((first.failed_pre.clone(), first_index));
            }
            FailedAction::Schema(h) => {
                return Err(LearnError::InconsistentAgent(format!(
                    "single-action plan failed on `{}`",
                    h.name
                )));
            }
            FailedAction::Sentinel => {
                // The action ran from the empty state: no positive
                // preconditions. Its effects are already visible here.
                let final_state = first.final_state.clone().ok_or_else(|| {
                    LearnError::InconsistentAgent("success response without a final state".into())
                })?;
                item.scan_effects(&State::empty(), &final_state, first_index, &mut events);
                // Sweep single-atom states for one where the action fails,
                // which would expose negative preconditions.
                for i in 0..item.ground.len() {
                    let probe = State::from_atoms([item.ground[i].clone()]);
                    let response = agent.answer_ap(&Query::ap(probe.clone(), plan.clone()))?;
                    let index = queries;
                    queries += 1;
                    match &response.failed {
                        FailedAction::Schema(_) => {
                            pre = Some((response.failed_pre.clone(), index));
                            break;
                        }
                        FailedAction::Sentinel => {
                            let out = response.final_state.clone().ok_or_else(|| {
                                LearnError::InconsistentAgent(
                                    "success response without a final state".into(),
                                )
                            })?;
                            item.scan_effects(&probe, &out, index, &mut events);
                        }
                    }
                }
                if pre.is_none() {
                    // No failing state exists: the precondition set is empty.
                    for i in 0..item.lifted.len() {
                        item.record_pre(i, Mode::Absent, first_index, &mut events);
                    }
                    item.finalize(&mut events);
                    work.push(item);
                    continue;
                }
            }
        }

        let (pre_literals, pre_index) = pre.expect("either branch produced a precondition set");
        for lit in &pre_literals {
            if !atom_set.contains(&lit.atom) {
                return Err(LearnError::InconsistentAgent(format!(
                    "reported precondition over an atom outside P*({})",
                    item.name()
                )));
            }
        }
        let modes: Vec<Mode> = item
            .lifted
            .iter()
            .map(|atom| {
                if pre_literals.contains(&Literal::pos(atom.clone())) {
                    Mode::Pos
                } else if pre_literals.contains(&Literal::neg(atom.clone())) {
                    Mode::Neg
                } else {
                    Mode::Absent
                }
            })
            .collect();
        for (i, mode) in modes.into_iter().enumerate() {
            item.record_pre(i, mode, pre_index, &mut events);
        }

        // Query 2: from the state assembled to satisfy exactly p_F, the
        // action succeeds and its effects appear in the final-state diff.
        let satisfying = State::from_atoms(pre_literals.iter().filter(|l| l.positive).map(|l| {
            item.grounding.ground(&l.atom)
        }));
        let second = agent.answer_ap(&Query::ap(satisfying.clone(), plan.clone()))?;
        let second_index = queries;
        queries += 1;
        match &second.failed {
            FailedAction::Sentinel => {
                let final_state = second.final_state.clone().ok_or_else(|| {
                    LearnError::InconsistentAgent("success response without a final state".into())
                })?;
                item.scan_effects(&satisfying, &final_state, second_index, &mut events);
            }
            FailedAction::Schema(_) => {
                return Err(LearnError::InconsistentAgent(format!(
                    "`{}` failed in a state satisfying its reported preconditions",
                    item.name()
                )));
            }
        }
        item.finalize(&mut events);
        work.push(item);
    }

    Ok(assemble(vocab, work, events, queries))
}

/// The fraction of the reference model's palm tuples the learned model got
/// right.
pub fn model_accuracy(learned: &LearnedModel, truth: &LiftedModel) -> Result<f64, LearnError> {
    check_vocabulary(&learned.model, truth)?;
    let learned_tuples = crate::strips::palm_tuples_of(&learned.model);
    let truth_tuples = crate::strips::palm_tuples_of(truth);
    let correct = learned_tuples.intersection(&truth_tuples).count();
    Ok(correct as f64 / truth_tuples.len() as f64)
}

pub(crate) fn check_vocabulary(a: &LiftedModel, b: &LiftedModel) -> Result<(), LearnError> {
    if a.predicates != b.predicates {
        return Err(LearnError::VocabularyMismatch(
            "predicate vocabularies differ".into(),
        ));
    }
    let ha: Vec<_> = a.headers();
    let hb: Vec<_> = b.headers();
    if ha != hb {
        return Err(LearnError::VocabularyMismatch(
            "action headers differ".into(),
        ));
    }
    Ok(())
}

/// Effect modes read from a single successful probe's state diff: an atom of
/// `P*(a)` absent before and present after is an add, present before and
/// absent after is a delete; anything else shows no effect in this probe.
pub fn effect_modes_from_diff(
    grounding: &CanonicalGrounding,
    atoms: &[LiftedAtom],
    sent: &State,
    result: &State,
) -> BTreeMap<LiftedAtom, Mode> {
    let mut out = BTreeMap::new();
    for atom in atoms {
        let ground = grounding.ground(atom);
        let mode = match (sent.contains(&ground), result.contains(&ground)) {
            (false, true) => Mode::Pos,
            (true, false) => Mode::Neg,
            _ => Mode::Absent,
        };
        out.insert(atom.clone(), mode);
    }
    out
}

/// Searches for a state in which the named action executes, returning it
/// together with the canonical ground action that was probed. Teleport
/// agents get synthesized truth assignments over `P*(a)` (hard state
/// interventions); walk agents get walk samples followed by targeted
/// reachability searches (soft ones). `Ok(None)` means the search budget was
/// exhausted with no executing state found.
pub fn find_executing_state(
    agent: &mut Agent,
    vocab: &Vocabulary,
    action: &str,
    config: &InterrogationConfig,
) -> Result<Option<(State, GroundAction)>, LearnError> {
    let objects = agent.objects().clone();
    let header = agent
        .action_headers()
        .into_iter()
        .find(|h| h.name == action)
        .ok_or_else(|| LearnError::VocabularyMismatch(format!("agent has no action `{action}`")))?;
    let Some(item) = ActionLearn::new(&header, &vocab.predicates, &objects) else {
        return Ok(None);
    };
    let plan = vec![item.grounding.ground_action()];
    let mut spent = 0usize;
    let mut tried: BTreeSet<State> = BTreeSet::new();

    if agent.capability() == Capability::Walk {
        for state in agent.walk_states(config.walk_steps, config.seed)? {
            if spent >= config.search_budget {
                return Ok(None);
            }
            if !tried.insert(state.clone()) {
                continue;
            }
            spent += 1;
            if agent.answer_po(&Query::po(state.clone(), plan.clone()))?.executed == 1 {
                return Ok(Some((state, plan.into_iter().next().unwrap())));
            }
        }
        let mut cursor = CandidateCursor::new(item.lifted.len());
        while spent < config.search_budget {
            let Some(bits) = cursor.next() else { break };
            let (require_true, require_false) = constraint_of_bits(&item, bits);
            let from = agent.initial_state();
            if let ReachOutcome::Reached(_, state) =
                agent.reach(&from, require_true, require_false, config.reach_bound)?
            {
                if !tried.insert(state.clone()) {
                    continue;
                }
                spent += 1;
                if agent.answer_po(&Query::po(state.clone(), plan.clone()))?.executed == 1 {
                    return Ok(Some((state, plan.into_iter().next().unwrap())));
                }
            }
        }
        return Ok(None);
    }

    let mut cursor = CandidateCursor::new(item.lifted.len());
    while spent < config.search_budget {
        let Some(bits) = cursor.next() else { break };
        spent += 1;
        let state = item.state_of_bits(bits);
        if agent.answer_po(&Query::po(state.clone(), plan.clone()))?.executed == 1 {
            return Ok(Some((state, plan.into_iter().next().unwrap())));
        }
    }
    Ok(None)
}

/// One single-atom flip probe from an executing state: `Ok(Some(mode))` pins
/// the atom's precondition mode, `Ok(None)` means a walk agent had no
/// reachable flip state within budget (the mode stays unresolved).
pub fn infer_precondition(
    agent: &mut Agent,
    vocab: &Vocabulary,
    action: &str,
    base: &State,
    atom: &LiftedAtom,
    config: &InterrogationConfig,
) -> Result<Option<Mode>, LearnError> {
    let objects = agent.objects().clone();
    let header = agent
        .action_headers()
        .into_iter()
        .find(|h| h.name == action)
        .ok_or_else(|| LearnError::VocabularyMismatch(format!("agent has no action `{action}`")))?;
    let Some(item) = ActionLearn::new(&header, &vocab.predicates, &objects) else {
        return Ok(None);
    };
    let ground = item.grounding.ground(atom);
    let plan = vec![item.grounding.ground_action()];

    let flip_state = match agent.capability() {
        Capability::Teleport => base.toggled(&ground),
        Capability::Walk => {
            let target = base.toggled(&ground);
            let mut require_true = BTreeSet::new();
            let mut require_false = BTreeSet::new();
            for a in item.ground.iter() {
                if target.contains(a) {
                    require_true.insert(a.clone());
                } else {
                    require_false.insert(a.clone());
                }
            }
            match agent.reach(base, require_true, require_false, config.reach_bound)? {
                ReachOutcome::Reached(_, state) => state,
                ReachOutcome::NoPlan | ReachOutcome::Inconclusive => return Ok(None),
            }
        }
    };
    let response = agent.answer_po(&Query::po(flip_state, plan))?;
    if response.executed == 1 {
        Ok(Some(Mode::Absent))
    } else if base.contains(&ground) {
        Ok(Some(Mode::Pos))
    } else {
        Ok(Some(Mode::Neg))
    }
}

/// The instantiation-pattern count budgets are stated against: distinct
/// (predicate, injective parameter-index tuple) pairs, unioned across all
/// action headers.
pub fn p_star_size(predicates: &BTreeMap<String, PredicateDecl>, headers: &[ActionHeader]) -> usize {
    let mut patterns: BTreeSet<LiftedAtom> = BTreeSet::new();
    for header in headers {
        for atom in instantiate_with_parameters(predicates.values(), header) {
            let distinct: BTreeSet<usize> = atom.args.iter().copied().collect();
            if distinct.len() == atom.args.len() {
                patterns.insert(atom);
            }
        }
    }
    patterns.len()
}
