//! The causal side of a learned model: a time-indexed causal decision
//! network over ground atoms, decision nodes and executability nodes, with
//! do-interventions via submodels, deterministic forward evaluation,
//! brute-force actual-cause checking (factuality, contingent counterfactual
//! dependence under a held-fixed witness set, minimality), palm-level
//! soundness/completeness comparison between two models, and DOT export.
//!
//! Node layout for a horizon-`T` network: one state node per ground atom per
//! time `0..=T`, one decision node and one executability node per ground
//! action per time `0..T`. Edges run only within a step or to the next one:
//! precondition atoms and the decision feed an action's executability node,
//! which feeds the action's effect atoms at the next step; non-static atoms
//! also persist to their successor. State atoms of static predicates are
//! exogenous at every time; everything else is endogenous, with initial
//! values fed in through the context.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::interrogation::check_vocabulary;
use crate::pddl::ProblemInstance;
use crate::strips::{
    ground_model, static_predicates, GroundAction, GroundAtom, LiftedModel, Mode, PalmTuple,
    State,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CausalError {
    #[error("a causal network needs a horizon of at least 1")]
    ZeroHorizon,
    #[error("node `{0}` is not part of the network")]
    UnknownNode(String),
    #[error("plan of length {len} does not fit horizon {horizon}")]
    PlanTooLong { len: usize, horizon: usize },
    #[error("more than one decision is set at time {0}; plans are sequences")]
    SimultaneousDecisions(usize),
    #[error("conflicting effects on {atom} at time {time}")]
    ConflictingEffects { atom: GroundAtom, time: usize },
    #[error("invalid intervention: {0}")]
    BadIntervention(String),
    #[error("vocabulary mismatch: {0}")]
    Vocabulary(String),
}

/// A node of the network. The `Display` form is the stable naming scheme
/// used in DOT output: `atom@t`, `dec:action@t`, `X:action@t`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum NodeId {
    StateVar(GroundAtom, usize),
    Decision(GroundAction, usize),
    Exec(GroundAction, usize),
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::StateVar(atom, t) => write!(f, "{atom}@{t}"),
            NodeId::Decision(action, t) => write!(f, "dec:{action}@{t}"),
            NodeId::Exec(action, t) => write!(f, "X:{action}@{t}"),
        }
    }
}

type GroundLits = Vec<(GroundAtom, bool)>;

/// A dynamic causal decision network grounded from a model and a problem's
/// objects.
#[derive(Debug)]
pub struct Dcdn {
    pub horizon: usize,
    atoms: Vec<GroundAtom>,
    actions: Vec<GroundAction>,
    statics: BTreeSet<String>,
    pre: BTreeMap<GroundAction, GroundLits>,
    eff: BTreeMap<GroundAction, GroundLits>,
    nodes: BTreeSet<NodeId>,
    edges: BTreeSet<(NodeId, NodeId)>,
}

/// Builds the network for `horizon >= 1` steps.
pub fn build_dcdn(
    model: &LiftedModel,
    problem: &ProblemInstance,
    horizon: usize,
) -> Result<Dcdn, CausalError> {
    if horizon == 0 {
        return Err(CausalError::ZeroHorizon);
    }
    let (atoms, actions) = ground_model(model, &problem.objects);
    let statics = static_predicates(model);

    let mut pre: BTreeMap<GroundAction, GroundLits> = BTreeMap::new();
    let mut eff: BTreeMap<GroundAction, GroundLits> = BTreeMap::new();
    for action in &actions {
        let schema = model.action(&action.schema).expect("grounded from model");
        pre.insert(
            action.clone(),
            schema
                .pre
                .iter()
                .map(|l| (l.atom.ground(&action.args), l.positive))
                .collect(),
        );
        eff.insert(
            action.clone(),
            schema
                .eff
                .iter()
                .map(|l| (l.atom.ground(&action.args), l.positive))
                .collect(),
        );
    }

    let mut nodes = BTreeSet::new();
    let mut edges = BTreeSet::new();
    for atom in &atoms {
        for t in 0..=horizon {
            nodes.insert(NodeId::StateVar(atom.clone(), t));
        }
    }
    for action in &actions {
        for t in 0..horizon {
            nodes.insert(NodeId::Decision(action.clone(), t));
            nodes.insert(NodeId::Exec(action.clone(), t));
        }
    }
    for t in 0..horizon {
        for action in &actions {
            let exec = NodeId::Exec(action.clone(), t);
            edges.insert((NodeId::Decision(action.clone(), t), exec.clone()));
            for (atom, _) in &pre[action] {
                edges.insert((NodeId::StateVar(atom.clone(), t), exec.clone()));
            }
            for (atom, _) in &eff[action] {
                edges.insert((exec.clone(), NodeId::StateVar(atom.clone(), t + 1)));
            }
        }
        for atom in &atoms {
            if !statics.contains(&atom.predicate) {
                edges.insert((
                    NodeId::StateVar(atom.clone(), t),
                    NodeId::StateVar(atom.clone(), t + 1),
                ));
            }
        }
    }

    Ok(Dcdn {
        horizon,
        atoms,
        actions,
        statics,
        pre,
        eff,
        nodes,
        edges,
    })
}

impl Dcdn {
    pub fn nodes(&self) -> impl Iterator<Item = &NodeId> {
        self.nodes.iter()
    }

    pub fn edges(&self) -> impl Iterator<Item = &(NodeId, NodeId)> {
        self.edges.iter()
    }

    pub fn contains(&self, node: &NodeId) -> bool {
        self.nodes.contains(node)
    }

    pub fn atoms(&self) -> &[GroundAtom] {
        &self.atoms
    }

    pub fn actions(&self) -> &[GroundAction] {
        &self.actions
    }

    /// State atoms of static predicates are outside the model's control at
    /// every time step.
    pub fn is_exogenous(&self, node: &NodeId) -> bool {
        match node {
            NodeId::StateVar(atom, _) => self.statics.contains(&atom.predicate),
            NodeId::Decision(..) | NodeId::Exec(..) => false,
        }
    }

    /// Endogenous nodes, in stable order.
    pub fn endogenous(&self) -> Vec<NodeId> {
        self.nodes
            .iter()
            .filter(|n| !self.is_exogenous(n))
            .cloned()
            .collect()
    }

    pub fn parents(&self, node: &NodeId) -> Vec<NodeId> {
        self.edges
            .iter()
            .filter(|(_, to)| to == node)
            .map(|(from, _)| from.clone())
            .collect()
    }

    pub fn children(&self, node: &NodeId) -> Vec<NodeId> {
        self.edges
            .iter()
            .filter(|(from, _)| from == node)
            .map(|(_, to)| to.clone())
            .collect()
    }

    /// All nodes reachable from `node` along directed edges.
    pub fn downstream(&self, node: &NodeId) -> BTreeSet<NodeId> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![node.clone()];
        while let Some(current) = stack.pop() {
            for (from, to) in &self.edges {
                if *from == current && seen.insert(to.clone()) {
                    stack.push(to.clone());
                }
            }
        }
        seen
    }
}

/// A causal setting: context values for the exogenous side (static atoms at
/// every step and non-static initial values) plus the decision sequence, and
/// any do-interventions layered on top as replaced structural functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalSetting {
    context: BTreeMap<NodeId, bool>,
    decisions: BTreeMap<NodeId, bool>,
    interventions: BTreeMap<NodeId, bool>,
}

impl CausalSetting {
    /// Builds the setting for an initial state and a plan of decisions
    /// (step `i` of the plan sets the matching decision node at time `i`).
    pub fn new(
        dcdn: &Dcdn,
        initial: &State,
        plan: &[GroundAction],
    ) -> Result<Self, CausalError> {
        if plan.len() > dcdn.horizon {
            return Err(CausalError::PlanTooLong {
                len: plan.len(),
                horizon: dcdn.horizon,
            });
        }
        let mut context = BTreeMap::new();
        for atom in &dcdn.atoms {
            let value = initial.contains(atom);
            context.insert(NodeId::StateVar(atom.clone(), 0), value);
            if dcdn.statics.contains(&atom.predicate) {
                for t in 1..=dcdn.horizon {
                    context.insert(NodeId::StateVar(atom.clone(), t), value);
                }
            }
        }
        let mut decisions = BTreeMap::new();
        for (t, action) in plan.iter().enumerate() {
            let node = NodeId::Decision(action.clone(), t);
            if !dcdn.contains(&node) {
                return Err(CausalError::UnknownNode(node.to_string()));
            }
            decisions.insert(node, true);
        }
        Ok(CausalSetting {
            context,
            decisions,
            interventions: BTreeMap::new(),
        })
    }

    pub fn interventions(&self) -> &BTreeMap<NodeId, bool> {
        &self.interventions
    }
}

/// Kind of an intervention: state-setting or decision-setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterventionKind {
    State,
    Decision,
}

#[derive(Debug, Clone)]
pub struct InterventionSpec {
    pub kind: InterventionKind,
    pub assignments: Vec<(NodeId, bool)>,
}

impl Dcdn {
    /// Returns the submodel setting: the intervened variables' structural
    /// functions are replaced by constants, everything else is untouched,
    /// and the original setting is not modified.
    pub fn intervene(
        &self,
        setting: &CausalSetting,
        spec: &InterventionSpec,
    ) -> Result<CausalSetting, CausalError> {
        let mut next = setting.clone();
        for (node, value) in &spec.assignments {
            if !self.contains(node) {
                return Err(CausalError::UnknownNode(node.to_string()));
            }
            match (spec.kind, node) {
                (InterventionKind::Decision, NodeId::Decision(..)) => {
                    next.interventions.insert(node.clone(), *value);
                }
                (InterventionKind::Decision, other) => {
                    return Err(CausalError::BadIntervention(format!(
                        "decision interventions only target decision nodes, not `{other}`"
                    )));
                }
                (InterventionKind::State, NodeId::StateVar(..)) => {
                    next.interventions.insert(node.clone(), *value);
                }
                (InterventionKind::State, other) => {
                    return Err(CausalError::BadIntervention(format!(
                        "state interventions only target state nodes, not `{other}`"
                    )));
                }
            }
        }
        Ok(next)
    }

    fn value_of(
        &self,
        node: &NodeId,
        setting: &CausalSetting,
        vals: &BTreeMap<NodeId, bool>,
    ) -> bool {
        if let Some(v) = setting.interventions.get(node) {
            return *v;
        }
        if let Some(v) = vals.get(node) {
            return *v;
        }
        unreachable!("evaluation proceeds in topological order")
    }

    /// Unique fixpoint by topological (time-layer) order, deterministic.
    /// Plans are sequences: once a decided action fails to execute, the
    /// remainder of the sequence is not reached, so later executability
    /// nodes are gated on no earlier step having failed (the same validity
    /// propagation the relational transition tables encode). A forced
    /// executability node bypasses the gate, as any replaced structural
    /// function does.
    pub fn evaluate(
        &self,
        setting: &CausalSetting,
    ) -> Result<BTreeMap<NodeId, bool>, CausalError> {
        let mut vals: BTreeMap<NodeId, bool> = BTreeMap::new();

        // Layer 0 and static atoms everywhere: context, unless intervened.
        for (node, value) in &setting.context {
            let v = setting.interventions.get(node).copied().unwrap_or(*value);
            vals.insert(node.clone(), v);
        }

        let mut valid = true;
        for t in 0..self.horizon {
            // Decisions: constants from the decision sequence (or do()).
            let mut true_decisions = 0usize;
            for action in &self.actions {
                let node = NodeId::Decision(action.clone(), t);
                let base = setting.decisions.get(&node).copied().unwrap_or(false);
                let v = setting.interventions.get(&node).copied().unwrap_or(base);
                if v {
                    true_decisions += 1;
                }
                vals.insert(node, v);
            }
            if true_decisions > 1 {
                return Err(CausalError::SimultaneousDecisions(t));
            }

            // Executability: decision and all precondition literals hold and
            // no earlier step of the sequence failed.
            let mut broken = false;
            for action in &self.actions {
                let node = NodeId::Exec(action.clone(), t);
                let decided = vals[&NodeId::Decision(action.clone(), t)];
                let value = if let Some(v) = setting.interventions.get(&node) {
                    *v
                } else {
                    let applicable = self.pre[action].iter().all(|(atom, positive)| {
                        self.value_of(&NodeId::StateVar(atom.clone(), t), setting, &vals)
                            == *positive
                    });
                    decided && applicable && valid
                };
                if decided && !value {
                    broken = true;
                }
                vals.insert(node, value);
            }
            if broken {
                valid = false;
            }

            // Next state layer: effect override from an executed action,
            // else persistence; statics came from the context already.
            let mut overrides: BTreeMap<GroundAtom, bool> = BTreeMap::new();
            for action in &self.actions {
                if !vals[&NodeId::Exec(action.clone(), t)] {
                    continue;
                }
                // Within one action, grounding may alias a delete and an add
                // onto the same atom; deletes apply before adds, as in plan
                // execution. Conflicts across distinct actions are errors.
                let mut net: BTreeMap<GroundAtom, bool> = BTreeMap::new();
                for (atom, positive) in &self.eff[action] {
                    if !positive {
                        net.insert(atom.clone(), false);
                    }
                }
                for (atom, positive) in &self.eff[action] {
                    if *positive {
                        net.insert(atom.clone(), true);
                    }
                }
                for (atom, value) in net {
                    if let Some(prior) = overrides.get(&atom) {
                        if *prior != value {
                            return Err(CausalError::ConflictingEffects { atom, time: t });
                        }
                    }
                    overrides.insert(atom, value);
                }
            }
            for atom in &self.atoms {
                let node = NodeId::StateVar(atom.clone(), t + 1);
                if vals.contains_key(&node) && !setting.interventions.contains_key(&node) {
                    continue; // static: context value already placed
                }
                let v = if let Some(forced) = setting.interventions.get(&node) {
                    *forced
                } else if let Some(value) = overrides.get(atom) {
                    *value
                } else {
                    vals[&NodeId::StateVar(atom.clone(), t)]
                };
                vals.insert(node, v);
            }
        }
        Ok(vals)
    }
}

/// A boolean combination of primitive events over network nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CausalFormula {
    Event(NodeId, bool),
    And(Vec<CausalFormula>),
    Not(Box<CausalFormula>),
}

impl CausalFormula {
    pub fn holds_in(&self, vals: &BTreeMap<NodeId, bool>) -> bool {
        match self {
            CausalFormula::Event(node, value) => vals.get(node) == Some(value),
            CausalFormula::And(parts) => parts.iter().all(|p| p.holds_in(vals)),
            CausalFormula::Not(inner) => !inner.holds_in(vals),
        }
    }

    pub fn variables(&self) -> BTreeSet<NodeId> {
        match self {
            CausalFormula::Event(node, _) => [node.clone()].into_iter().collect(),
            CausalFormula::And(parts) => parts.iter().flat_map(|p| p.variables()).collect(),
            CausalFormula::Not(inner) => inner.variables(),
        }
    }
}

impl fmt::Display for CausalFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CausalFormula::Event(node, value) => write!(f, "{node}={value}"),
            CausalFormula::And(parts) => {
                let texts: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "({})", texts.join(" & "))
            }
            CausalFormula::Not(inner) => write!(f, "!{inner}"),
        }
    }
}

/// Enumeration limits for the actual-cause search. The witness-set search is
/// worst-case exponential; beyond `full_enumeration_max_vars` endogenous
/// variables only witness sets up to `capped_subset_size` are tried and a
/// fruitless search is reported inconclusive rather than negative.
#[derive(Debug, Clone)]
pub struct AcBudget {
    pub full_enumeration_max_vars: usize,
    pub capped_subset_size: usize,
}

impl Default for AcBudget {
    fn default() -> Self {
        AcBudget {
            full_enumeration_max_vars: 24,
            capped_subset_size: 2,
        }
    }
}

/// Which requirement a failed check violated. `Degenerate` covers cause
/// sets the definition rules out before the three conditions apply (empty
/// conjunctions, exogenous variables).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailedCondition {
    Degenerate,
    Ac1,
    Ac2,
    Ac3,
}

/// Outcome of an actual-cause check. A found witness is definitive in any
/// budget; a definitive negative needs the full enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CauseOutcome {
    Cause {
        witness: BTreeSet<NodeId>,
        alternative: BTreeMap<NodeId, bool>,
    },
    NotCause {
        condition: FailedCondition,
        reason: String,
    },
    Inconclusive {
        reason: String,
    },
}

impl CauseOutcome {
    pub fn is_cause(&self) -> bool {
        matches!(self, CauseOutcome::Cause { .. })
    }
}

type Ac2Witness = (BTreeSet<NodeId>, BTreeMap<NodeId, bool>);

fn combinations(pool: &[NodeId], size: usize) -> Vec<BTreeSet<NodeId>> {
    let mut out = Vec::new();
    let mut indices: Vec<usize> = (0..size).collect();
    if size > pool.len() {
        return out;
    }
    loop {
        out.push(indices.iter().map(|&i| pool[i].clone()).collect());
        // Advance the combination cursor.
        let mut i = size;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if indices[i] != i + pool.len() - size {
                break;
            }
        }
        indices[i] += 1;
        for j in i + 1..size {
            indices[j] = indices[j - 1] + 1;
        }
    }
}

impl Dcdn {
    /// Searches for an AC2 witness: a set `W` held at its actual values and
    /// an alternative assignment to the cause variables under which the
    /// formula no longer holds.
    fn find_ac2_witness(
        &self,
        setting: &CausalSetting,
        cause: &BTreeMap<NodeId, bool>,
        phi: &CausalFormula,
        actual: &BTreeMap<NodeId, bool>,
        budget: &AcBudget,
    ) -> Result<Option<Ac2Witness>, bool> {
        // Err(true) = inconclusive budget exhaustion.
        let cause_nodes: Vec<NodeId> = cause.keys().cloned().collect();
        let pool: Vec<NodeId> = self
            .endogenous()
            .into_iter()
            .filter(|n| !cause.contains_key(n))
            .collect();
        let full = pool.len() + cause.len() <= budget.full_enumeration_max_vars;
        let max_size = if full {
            pool.len()
        } else {
            budget.capped_subset_size.min(pool.len())
        };

        // Alternative assignments: every non-actual assignment to the cause
        // variables, smallest flips first.
        let mut alternatives = Vec::new();
        for mask in 1u64..(1 << cause_nodes.len()) {
            let mut alt = BTreeMap::new();
            for (i, node) in cause_nodes.iter().enumerate() {
                let actual_value = cause[node];
                alt.insert(
                    node.clone(),
                    if mask & (1 << i) != 0 {
                        !actual_value
                    } else {
                        actual_value
                    },
                );
            }
            alternatives.push(alt);
        }
        alternatives.sort_by_key(|alt| {
            alt.iter()
                .filter(|(n, v)| cause[*n] != **v)
                .count()
        });

        for size in 0..=max_size {
            for witness in combinations(&pool, size) {
                for alt in &alternatives {
                    let mut spec_map: BTreeMap<NodeId, bool> = alt.clone();
                    for w in &witness {
                        spec_map.insert(w.clone(), actual[w]);
                    }
                    let mut submodel = setting.clone();
                    submodel.interventions.extend(spec_map);
                    match self.evaluate(&submodel) {
                        Ok(vals) => {
                            if !phi.holds_in(&vals) {
                                return Ok(Some((witness, alt.clone())));
                            }
                        }
                        // Settings that break the one-decision-per-step or
                        // effect-consistency rules are simply not witnesses.
                        Err(_) => continue,
                    }
                }
            }
        }
        if full {
            Ok(None)
        } else {
            Err(true)
        }
    }

    /// Halpern-style actual-cause check of `cause` (a conjunction `X = x`)
    /// for `phi` in the given setting, by brute-force enumeration.
    pub fn is_actual_cause(
        &self,
        setting: &CausalSetting,
        cause: &BTreeMap<NodeId, bool>,
        phi: &CausalFormula,
        budget: &AcBudget,
    ) -> Result<CauseOutcome, CausalError> {
        if cause.is_empty() {
            return Ok(CauseOutcome::NotCause {
                condition: FailedCondition::Degenerate,
                reason: "an empty conjunction cannot be a cause".into(),
            });
        }
        for node in cause.keys() {
            if !self.contains(node) {
                return Err(CausalError::UnknownNode(node.to_string()));
            }
            if self.is_exogenous(node) {
                return Ok(CauseOutcome::NotCause {
                    condition: FailedCondition::Degenerate,
                    reason: format!("`{node}` is exogenous; causes are endogenous variables"),
                });
            }
        }
        for node in phi.variables() {
            if !self.contains(&node) {
                return Err(CausalError::UnknownNode(node.to_string()));
            }
        }

        let actual = self.evaluate(setting)?;
        // AC1: the cause assignment and the formula both actually hold.
        for (node, value) in cause {
            if actual.get(node) != Some(value) {
                return Ok(CauseOutcome::NotCause {
                    condition: FailedCondition::Ac1,
                    reason: format!("AC1 fails: `{node}` is not actually {value}"),
                });
            }
        }
        if !phi.holds_in(&actual) {
            return Ok(CauseOutcome::NotCause {
                condition: FailedCondition::Ac1,
                reason: "AC1 fails: the formula does not actually hold".into(),
            });
        }

        // AC2: a witness set and an alternative assignment break the formula.
        let witness = match self.find_ac2_witness(setting, cause, phi, &actual, budget) {
            Ok(Some(found)) => found,
            Ok(None) => {
                return Ok(CauseOutcome::NotCause {
                    condition: FailedCondition::Ac2,
                    reason: "AC2 fails: no witness set and alternative break the formula".into(),
                })
            }
            Err(_) => {
                return Ok(CauseOutcome::Inconclusive {
                    reason: format!(
                        "witness enumeration capped at subsets of size {}",
                        budget.capped_subset_size
                    ),
                })
            }
        };

        // AC3: no strict subset already satisfies AC1 and AC2.
        let nodes: Vec<NodeId> = cause.keys().cloned().collect();
        if nodes.len() > 1 {
            for mask in 1u64..(1 << nodes.len()) - 1 {
                let subset: BTreeMap<NodeId, bool> = nodes
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, n)| (n.clone(), cause[n]))
                    .collect();
                match self.find_ac2_witness(setting, &subset, phi, &actual, budget) {
                    Ok(Some(_)) => {
                        let names: Vec<String> =
                            subset.keys().map(|n| n.to_string()).collect();
                        return Ok(CauseOutcome::NotCause {
                            condition: FailedCondition::Ac3,
                            reason: format!(
                                "AC3 fails: strict subset {{{}}} already suffices",
                                names.join(", ")
                            ),
                        });
                    }
                    Ok(None) => continue,
                    Err(_) => {
                        return Ok(CauseOutcome::Inconclusive {
                            reason: "minimality check exceeded the enumeration budget".into(),
                        })
                    }
                }
            }
        }

        Ok(CauseOutcome::Cause {
            witness: witness.0,
            alternative: witness.1,
        })
    }
}

/// Palm-level difference between a candidate model and a reference model.
/// The candidate is sound iff `spurious` is empty and complete iff `missing`
/// is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelDiff {
    pub spurious: BTreeSet<PalmTuple>,
    pub missing: BTreeSet<PalmTuple>,
}

impl ModelDiff {
    pub fn is_sound(&self) -> bool {
        self.spurious.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.missing.is_empty()
    }
}

/// Compares two models over a shared vocabulary: `spurious` collects the
/// candidate's non-absent palm tuples the reference does not have, `missing`
/// the reference's non-absent tuples the candidate lacks.
pub fn compare_sound_complete(
    candidate: &LiftedModel,
    reference: &LiftedModel,
) -> Result<ModelDiff, CausalError> {
    check_vocabulary(candidate, reference)
        .map_err(|e| CausalError::Vocabulary(e.to_string()))?;
    let cand = crate::strips::palm_tuples_of(candidate);
    let refr = crate::strips::palm_tuples_of(reference);
    let spurious = cand
        .iter()
        .filter(|t| t.mode != Mode::Absent && !refr.contains(*t))
        .cloned()
        .collect();
    let missing = refr
        .iter()
        .filter(|t| t.mode != Mode::Absent && !cand.contains(*t))
        .cloned()
        .collect();
    Ok(ModelDiff { spurious, missing })
}

/// Emits the network as a DOT digraph with deterministic node and edge
/// order. State nodes are ellipses, decisions boxes, executability nodes
/// diamonds; exogenous nodes are dashed.
pub fn export_dot(dcdn: &Dcdn) -> String {
    let mut out = String::new();
    out.push_str("digraph dcdn {\n");
    out.push_str("  rankdir=LR;\n");
    for node in &dcdn.nodes {
        let shape = match node {
            NodeId::StateVar(..) => "ellipse",
            NodeId::Decision(..) => "box",
            NodeId::Exec(..) => "diamond",
        };
        let style = if dcdn.is_exogenous(node) {
            ", style=dashed"
        } else {
            ""
        };
        out.push_str(&format!("  \"{node}\" [shape={shape}{style}];\n"));
    }
    for (from, to) in &dcdn.edges {
        out.push_str(&format!("  \"{from}\" -> \"{to}\";\n"));
    }
    out.push_str("}\n");
    out
}

/// One row of the standard cause-check family.
#[derive(Debug, Clone)]
pub struct CauseCheckRow {
    pub label: String,
    pub cause: String,
    pub formula: String,
    pub expect_cause: bool,
    pub outcome: CauseOutcome,
}

impl CauseCheckRow {
    /// Inconclusive rows are reported but only definitive disagreements
    /// count as failures.
    pub fn failed(&self) -> bool {
        !matches!(
            (&self.outcome, self.expect_cause),
            (CauseOutcome::Cause { .. }, true)
                | (CauseOutcome::NotCause { .. }, false)
                | (CauseOutcome::Inconclusive { .. }, _)
        )
    }

    pub fn verdict(&self) -> &'static str {
        match &self.outcome {
            CauseOutcome::Cause { .. } => "cause",
            CauseOutcome::NotCause { .. } => "not-cause",
            CauseOutcome::Inconclusive { .. } => "inconclusive",
        }
    }

    /// Per-condition columns for the report: pass, fail, or `-` when the
    /// check never reached that condition.
    pub fn condition_flags(&self) -> (&'static str, &'static str, &'static str) {
        match &self.outcome {
            CauseOutcome::Cause { .. } => ("pass", "pass", "pass"),
            CauseOutcome::NotCause { condition, .. } => match condition {
                FailedCondition::Degenerate => ("-", "-", "-"),
                FailedCondition::Ac1 => ("fail", "-", "-"),
                FailedCondition::Ac2 => ("pass", "fail", "-"),
                FailedCondition::Ac3 => ("pass", "pass", "fail"),
            },
            CauseOutcome::Inconclusive { .. } => ("-", "-", "-"),
        }
    }
}

/// The enumerated actual-cause family run by the verification command: for
/// every injective ground action, in a setting where it executes at time 0,
/// (a) each of its ground precondition atoms' initial values is an actual
/// cause of the executability node, (b) the executability node and the
/// decision node are each actual causes of every effect atom's value at time
/// 1, and (c) no static atom's initial value is a cause of the
/// executability node. With horizon >= 2, a two-step executable plan from
/// the problem's initial state adds the same precondition checks at time 1.
pub fn standard_cause_checks(
    model: &LiftedModel,
    problem: &ProblemInstance,
    horizon: usize,
    budget: &AcBudget,
) -> Result<Vec<CauseCheckRow>, CausalError> {
    let dcdn = build_dcdn(model, problem, horizon)?;
    let mut rows = Vec::new();

    for action in dcdn.actions.clone() {
        if !action.is_injective() {
            continue;
        }
        // A state where the action executes: positive preconditions hold,
        // negative ones do not, statics keep the problem's initial values
        // except where a precondition pins them.
        let mut atoms: Vec<GroundAtom> = Vec::new();
        for atom in problem.init.iter() {
            if dcdn.statics.contains(&atom.predicate) {
                atoms.push(atom.clone());
            }
        }
        for (atom, positive) in &dcdn.pre[&action] {
            if *positive {
                atoms.push(atom.clone());
            } else {
                atoms.retain(|a| a != atom);
            }
        }
        let initial = State::from_atoms(atoms);
        let setting = CausalSetting::new(&dcdn, &initial, std::slice::from_ref(&action))?;
        let exec0 = NodeId::Exec(action.clone(), 0);
        let phi_exec = CausalFormula::Event(exec0.clone(), true);

        for (atom, positive) in &dcdn.pre[&action] {
            let cause: BTreeMap<NodeId, bool> =
                [(NodeId::StateVar(atom.clone(), 0), *positive)].into_iter().collect();
            let outcome = dcdn.is_actual_cause(&setting, &cause, &phi_exec, budget)?;
            rows.push(CauseCheckRow {
                label: format!("pre->exec {action}"),
                cause: format!("{}@0={}", atom, positive),
                formula: phi_exec.to_string(),
                expect_cause: !dcdn.statics.contains(&atom.predicate),
                outcome,
            });
        }

        let actual = dcdn.evaluate(&setting)?;
        for (atom, _) in &dcdn.eff[&action] {
            let node = NodeId::StateVar(atom.clone(), 1);
            let value = actual[&node];
            let phi_eff = CausalFormula::Event(node.clone(), value);
            for (label, cause_node) in [
                ("exec->eff", exec0.clone()),
                ("dec->eff", NodeId::Decision(action.clone(), 0)),
            ] {
                let cause: BTreeMap<NodeId, bool> =
                    [(cause_node.clone(), true)].into_iter().collect();
                let outcome = dcdn.is_actual_cause(&setting, &cause, &phi_eff, budget)?;
                rows.push(CauseCheckRow {
                    label: format!("{label} {action}"),
                    cause: format!("{cause_node}=true"),
                    formula: phi_eff.to_string(),
                    expect_cause: true,
                    outcome,
                });
            }
        }

        for atom in &dcdn.atoms {
            if !dcdn.statics.contains(&atom.predicate) {
                continue;
            }
            let node = NodeId::StateVar(atom.clone(), 0);
            let value = actual[&node];
            let cause: BTreeMap<NodeId, bool> = [(node.clone(), value)].into_iter().collect();
            let outcome = dcdn.is_actual_cause(&setting, &cause, &phi_exec, budget)?;
            rows.push(CauseCheckRow {
                label: format!("static!->exec {action}"),
                cause: format!("{node}={value}"),
                formula: phi_exec.to_string(),
                expect_cause: false,
                outcome,
            });
        }
    }

    // A two-step plan from the problem's initial state exercises causes at
    // time 1.
    if horizon >= 2 {
        'outer: for first in dcdn.actions.clone() {
            if !first.is_injective() {
                continue;
            }
            let (mid, ok1) =
                crate::strips::apply_action(model, &problem.init, &first).expect("well-formed");
            if !ok1 {
                continue;
            }
            for second in dcdn.actions.clone() {
                if !second.is_injective() {
                    continue;
                }
                let (_, ok2) = crate::strips::apply_action(model, &mid, &second).expect("well-formed");
                if !ok2 {
                    continue;
                }
                let plan = vec![first.clone(), second.clone()];
                let setting = CausalSetting::new(&dcdn, &problem.init, &plan)?;
                let exec1 = NodeId::Exec(second.clone(), 1);
                let phi = CausalFormula::Event(exec1, true);
                for (atom, positive) in &dcdn.pre[&second] {
                    if dcdn.statics.contains(&atom.predicate) {
                        continue;
                    }
                    let cause: BTreeMap<NodeId, bool> =
                        [(NodeId::StateVar(atom.clone(), 1), *positive)].into_iter().collect();
                    let outcome = dcdn.is_actual_cause(&setting, &cause, &phi, budget)?;
                    rows.push(CauseCheckRow {
                        label: format!("pre->exec@1 {second} after {first}"),
                        cause: format!("{}@1={}", atom, positive),
                        formula: phi.to_string(),
                        expect_cause: true,
                        outcome,
                    });
                }
                break 'outer;
            }
        }
    }

    Ok(rows)
}
