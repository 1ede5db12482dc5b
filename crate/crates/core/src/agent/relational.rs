//! The relational-table agent backend. Transitions are stored in
//! propositional form as a relation `R(valid, s, a, s', succ)` that is a
//! total function from `(valid, s, a)`, a step-counting relation
//! `N(valid, n, n+)`, and a membership relation `S(p, s)`. Plan-outcome
//! queries are evaluated as an iterated join over these rows carrying six
//! live variables per step; action-precondition queries are a universal scan
//! over all states per candidate atom.
//!
//! The state universe is every subset of the problem's ground atoms, which
//! is what makes the precondition scan exact. That limits this backend to
//! desk scale; builds beyond the atom budget are refused outright.

use std::collections::{BTreeMap, BTreeSet};

use super::{
    fail_precondition, AgentError, FailedAction, Query, ResponseAp, ResponsePo,
};
use crate::pddl::ProblemInstance;
use crate::strips::{
    apply_action, canonical_binding, ground_model, instantiate_with_parameters, ActionHeader,
    GroundAction, GroundAtom, LiftedModel, Literal, PredicateDecl, State, TypedObjects,
};

/// Default ceiling on the number of ground atoms the relational backend will
/// enumerate (the universe has `2^atoms` states).
pub const DEFAULT_MAX_ATOMS: usize = 16;

type StateBits = u64;

pub struct TransitionTables {
    atoms: Vec<GroundAtom>,
    atom_index: BTreeMap<GroundAtom, usize>,
    actions: Vec<GroundAction>,
    action_index: BTreeMap<GroundAction, usize>,
    headers: BTreeMap<String, ActionHeader>,
    predicates: BTreeMap<String, PredicateDecl>,
    objects: TypedObjects,
    init: StateBits,
    /// `R`: total function `(valid, s, a) -> (s', succ)`.
    r: BTreeMap<(bool, StateBits, usize), (StateBits, bool)>,
    /// `N`: `(valid, n) -> n+`, for `0 <= n <= max_len`.
    n: BTreeMap<(bool, u16), u16>,
    /// `S`: `(p, s)` iff ground atom `p` is in state `s`.
    s_rel: BTreeSet<(usize, StateBits)>,
    max_len: usize,
}

impl TransitionTables {
    /// Enumerates the full `2^P x A` transition relation of the model over
    /// the problem's objects. Refuses state spaces beyond `max_atoms`.
    pub fn build(
        model: &LiftedModel,
        problem: &ProblemInstance,
        max_len: usize,
        max_atoms: usize,
    ) -> Result<Self, AgentError> {
        model.validate().map_err(AgentError::Malformed)?;
        let (atoms, actions) = ground_model(model, &problem.objects);
        if atoms.len() > max_atoms {
            return Err(AgentError::UniverseTooLarge {
                atoms: atoms.len(),
                max: max_atoms,
            });
        }
        let atom_index: BTreeMap<GroundAtom, usize> = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        let action_index: BTreeMap<GroundAction, usize> = actions
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();

        let states: u64 = 1u64 << atoms.len();
        let mut r = BTreeMap::new();
        let mut s_rel = BTreeSet::new();
        for bits in 0..states {
            let state = state_of(&atoms, bits);
            for (i, _) in atoms.iter().enumerate() {
                if bits & (1 << i) != 0 {
                    s_rel.insert((i, bits));
                }
            }
            for (ai, action) in actions.iter().enumerate() {
                let (next, succ) = apply_action(model, &state, action)
                    .expect("ground actions are well-formed over the model");
                let next_bits = if succ { bits_of(&atom_index, &next) } else { bits };
                r.insert((true, bits, ai), (next_bits, succ));
                // Applying an action in an already-invalid chain never
                // changes the state.
                r.insert((false, bits, ai), (bits, false));
            }
        }

        let mut n = BTreeMap::new();
        for i in 0..=max_len as u16 {
            n.insert((true, i), i + 1);
            n.insert((false, i), i);
        }

        // Init atoms are over the same objects, so always indexed.
        let init = bits_of(&atom_index, &problem.init);
        Ok(TransitionTables {
            atoms,
            atom_index,
            actions,
            action_index,
            headers: model
                .actions
                .values()
                .map(|a| (a.header.name.clone(), a.header.clone()))
                .collect(),
            predicates: model.predicates.clone(),
            objects: problem.objects.clone(),
            init,
            r,
            n,
            s_rel,
            max_len,
        })
    }

    pub fn headers(&self) -> Vec<ActionHeader> {
        self.headers.values().cloned().collect()
    }

    pub fn objects(&self) -> &TypedObjects {
        &self.objects
    }

    pub fn initial_state(&self) -> State {
        state_of(&self.atoms, self.init)
    }

    pub fn atoms(&self) -> &[GroundAtom] {
        &self.atoms
    }

    pub fn actions(&self) -> &[GroundAction] {
        &self.actions
    }

    /// Rows of `R` as `(valid, s, a, s', succ)` tuples.
    pub fn r_rows(&self) -> impl Iterator<Item = (bool, State, &GroundAction, State, bool)> + '_ {
        self.r.iter().map(|(&(valid, s, ai), &(s2, succ))| {
            (
                valid,
                state_of(&self.atoms, s),
                &self.actions[ai],
                state_of(&self.atoms, s2),
                succ,
            )
        })
    }

    /// Rows of `N` as `(valid, n, n+)` tuples.
    pub fn n_rows(&self) -> impl Iterator<Item = (bool, u16, u16)> + '_ {
        self.n.iter().map(|(&(valid, n), &n2)| (valid, n, n2))
    }

    pub fn state_count(&self) -> u64 {
        1u64 << self.atoms.len()
    }

    /// The plan-length bound the `N` relation was enumerated for.
    pub fn max_plan_len(&self) -> usize {
        self.max_len
    }

    fn bits(&self, state: &State) -> Result<StateBits, AgentError> {
        let mut bits = 0;
        for atom in state.iter() {
            let idx = self
                .atom_index
                .get(atom)
                .ok_or_else(|| AgentError::StateOutsideUniverse(state.clone()))?;
            bits |= 1 << idx;
        }
        Ok(bits)
    }

    pub(super) fn validate_query(&self, query: &Query) -> Result<(), AgentError> {
        self.bits(&query.initial)?;
        for action in &query.plan {
            if !self.action_index.contains_key(action) {
                return Err(AgentError::ActionOutsideUniverse(action.clone()));
            }
        }
        Ok(())
    }

    /// Evaluates the plan-outcome join chain
    /// `R(⊤,s0,a1,s1,succ1) ∧ N(succ1,0,n1) ∧ R(succ1,s1,a2,s2,succ2) ∧ …`,
    /// carrying only the live `(s, succ, n)` tuple between steps. The output
    /// is the pair of free variables `(n_D, s_D)`.
    pub fn answer_po(&self, query: &Query) -> Result<ResponsePo, AgentError> {
        let mut s = self.bits(&query.initial)?;
        let mut valid = true;
        let mut n: u16 = 0;
        for action in &query.plan {
            let ai = *self
                .action_index
                .get(action)
                .ok_or_else(|| AgentError::ActionOutsideUniverse(action.clone()))?;
            let &(s2, succ) = self
                .r
                .get(&(valid, s, ai))
                .expect("R is total over (valid, s, a)");
            n = *self.n.get(&(succ, n)).expect("N covers 0..=max_len");
            s = s2;
            valid = succ;
        }
        Ok(ResponsePo {
            executed: n as usize,
            state: state_of(&self.atoms, s),
        })
    }

    /// Action-precondition answering: simulate through `R` to the first
    /// failure, then report that action's lifted precondition set from the
    /// universal scan.
    pub fn answer_ap(&self, query: &Query) -> Result<ResponseAp, AgentError> {
        let mut s = self.bits(&query.initial)?;
        for (i, action) in query.plan.iter().enumerate() {
            let ai = *self
                .action_index
                .get(action)
                .ok_or_else(|| AgentError::ActionOutsideUniverse(action.clone()))?;
            let &(s2, succ) = self.r.get(&(true, s, ai)).expect("R is total");
            if !succ {
                let header = self.headers[&action.schema].clone();
                let failed_pre = self.action_preconditions(&action.schema)?;
                return Ok(ResponseAp {
                    executed: i,
                    failed: FailedAction::Schema(header),
                    failed_pre,
                    final_state: None,
                });
            }
            s = s2;
        }
        Ok(ResponseAp {
            executed: query.plan.len(),
            failed: FailedAction::Sentinel,
            failed_pre: [fail_precondition()].into_iter().collect(),
            final_state: Some(state_of(&self.atoms, s)),
        })
    }

    /// The universal scan behind action-precondition responses: an atom `p`
    /// of the canonical grounding is a positive precondition iff the action
    /// fails in every state lacking `p`, and a negative one iff it fails in
    /// every state containing `p`. Results are lifted through the canonical
    /// injective binding.
    pub fn action_preconditions(&self, schema: &str) -> Result<BTreeSet<Literal>, AgentError> {
        let header = self
            .headers
            .get(schema)
            .ok_or_else(|| {
                AgentError::Malformed(crate::strips::ModelError::UnknownAction(schema.to_string()))
            })?
            .clone();
        let binding = canonical_binding(&header, &self.objects).ok_or_else(|| {
            AgentError::Malformed(crate::strips::ModelError::UnknownObject(format!(
                "not enough distinct objects to ground `{schema}` injectively"
            )))
        })?;
        let ground = GroundAction {
            schema: schema.to_string(),
            args: binding.clone(),
        };
        let ai = *self
            .action_index
            .get(&ground)
            .expect("canonical grounding is within the enumerated actions");

        let candidates = instantiate_with_parameters(self.predicates.values(), &header);
        let mut result = BTreeSet::new();
        for lifted in candidates {
            let p = *self
                .atom_index
                .get(&lifted.ground(&binding))
                .expect("instantiations over problem objects are in the universe");
            let mut required_when_absent = true; // fails in every state lacking p
            let mut required_when_present = true; // fails in every state containing p
            for s in 0..self.state_count() {
                let succ = self.r[&(true, s, ai)].1;
                if self.s_rel.contains(&(p, s)) {
                    if succ {
                        required_when_present = false;
                    }
                } else if succ {
                    required_when_absent = false;
                }
                if !required_when_absent && !required_when_present {
                    break;
                }
            }
            if required_when_absent {
                result.insert(Literal::pos(lifted));
            } else if required_when_present {
                result.insert(Literal::neg(lifted));
            }
        }

        // Consistency: the scanned set must be exactly sufficient. Every
        // state satisfying all scanned literals has a successful transition.
        debug_assert!({
            (0..self.state_count()).all(|s| {
                let satisfied = result.iter().all(|lit| {
                    let p = self.atom_index[&lit.atom.ground(&binding)];
                    self.s_rel.contains(&(p, s)) == lit.positive
                });
                !satisfied || self.r[&(true, s, ai)].1
            })
        });
        Ok(result)
    }
}

fn state_of(atoms: &[GroundAtom], bits: StateBits) -> State {
    State::from_atoms(
        atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| bits & (1 << i) != 0)
            .map(|(_, a)| a.clone()),
    )
}

fn bits_of(index: &BTreeMap<GroundAtom, usize>, state: &State) -> StateBits {
    let mut bits = 0;
    for atom in state.iter() {
        bits |= 1 << index[atom];
    }
    bits
}
