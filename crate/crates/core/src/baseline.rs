//! Observational-data learner used as the comparison foil: learns
//! preconditions as the lifted intersection of the states an action was
//! applied in (plus negative literals from atoms false in every such state)
//! and effects as the union of observed diffs, from traces of successful
//! actions only. Optionally strips static predicates from learned
//! preconditions as the usual ad-hoc post-processing step.
//!
//! Traces never contain failed actions, which is exactly what blinds this
//! learner to the difference between correlation and causation: a biased
//! corpus makes it adopt spurious preconditions, and transitions missing
//! from the corpus leave real tuples unlearned.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::interrogation::Vocabulary;
use crate::pddl::ProblemInstance;
use crate::planner::StateConstraint;
use crate::strips::{
    apply_action, ground_model, instantiate_with_parameters, ActionHeader, ActionSchema,
    GroundAction, LiftedModel, Literal, Mode, ModelError, State,
};

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("step {index}: action {action} does not execute in its source state")]
    FailedStep { index: usize, action: GroundAction },
    #[error("inconsistent diffs for action `{action}` on atom `{atom}`: corrupted traces")]
    InconsistentDiffs { action: String, atom: String },
}

/// An alternating sequence of states and successfully executed ground
/// actions, validated against the generating model at construction.
#[derive(Debug, Clone)]
pub struct Trace {
    states: Vec<State>,
    actions: Vec<GroundAction>,
}

impl Trace {
    /// Builds a trace by executing `actions` from `initial`; every step must
    /// succeed.
    pub fn from_steps(
        model: &LiftedModel,
        initial: State,
        actions: Vec<GroundAction>,
    ) -> Result<Self, BaselineError> {
        let mut states = vec![initial];
        for (index, action) in actions.iter().enumerate() {
            let current = states.last().unwrap();
            let (next, succ) = apply_action(model, current, action)?;
            if !succ {
                return Err(BaselineError::FailedStep {
                    index,
                    action: action.clone(),
                });
            }
            states.push(next);
        }
        Ok(Trace { states, actions })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    /// The (source state, action, successor state) transitions.
    pub fn steps(&self) -> impl Iterator<Item = (&State, &GroundAction, &State)> {
        self.actions
            .iter()
            .enumerate()
            .map(|(i, a)| (&self.states[i], a, &self.states[i + 1]))
    }
}

/// A generated corpus. An unsatisfiable filter yields an empty corpus plus a
/// warning rather than an error.
#[derive(Debug)]
pub struct TraceCorpus {
    pub traces: Vec<Trace>,
    pub warning: Option<String>,
}

impl TraceCorpus {
    /// The stable line-delimited text form documented in `docs/formats.md`:
    /// one `state|action|state` record per transition, one blank line
    /// between traces.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, trace) in self.traces.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            for (before, action, after) in trace.steps() {
                out.push_str(&format!("{before}|{action}|{after}\n"));
            }
        }
        out
    }
}

/// Random walks of successful actions from the problem's initial state.
/// The optional filter restricts visited states: only actions whose
/// successor satisfies it are taken. Aliased ground actions (repeated
/// arguments) are not walked; observed agents act purposefully and aliased
/// steps would make lifted diffs ambiguous.
pub fn generate_traces(
    model: &LiftedModel,
    problem: &ProblemInstance,
    count: usize,
    length: usize,
    seed: u64,
    filter: Option<&StateConstraint>,
) -> Result<TraceCorpus, BaselineError> {
    if let Some(f) = filter {
        if !f.satisfied_by(&problem.init) {
            return Ok(TraceCorpus {
                traces: Vec::new(),
                warning: Some(
                    "the corpus filter is unsatisfiable from the initial state".to_string(),
                ),
            });
        }
    }
    let (_, all_actions) = ground_model(model, &problem.objects);
    let candidates: Vec<GroundAction> = all_actions
        .into_iter()
        .filter(|a| a.is_injective())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut traces = Vec::new();
    for _ in 0..count {
        let mut state = problem.init.clone();
        let mut actions = Vec::new();
        for _ in 0..length {
            let successors: Vec<(&GroundAction, State)> = candidates
                .iter()
                .filter_map(|a| {
                    let (next, succ) = apply_action(model, &state, a).ok()?;
                    if !succ {
                        return None;
                    }
                    if let Some(f) = filter {
                        if !f.satisfied_by(&next) {
                            return None;
                        }
                    }
                    Some((a, next))
                })
                .collect();
            if successors.is_empty() {
                break;
            }
            let (action, next) = &successors[rng.gen_range(0..successors.len())];
            actions.push((*action).clone());
            state = next.clone();
        }
        traces.push(Trace::from_steps(model, problem.init.clone(), actions)?);
    }
    Ok(TraceCorpus {
        traces,
        warning: None,
    })
}

#[derive(Debug, Clone)]
pub struct LearnOptions {
    /// Induce negative preconditions from atoms false in every source state.
    pub negative_preconditions: bool,
}

impl Default for LearnOptions {
    fn default() -> Self {
        LearnOptions {
            negative_preconditions: true,
        }
    }
}

/// Intersection/union learning over the corpus. Actions with no occurrences
/// come back all-absent. Effect induction uses occurrences with injective
/// argument bindings only, where each lifted atom maps to a unique ground
/// atom and a deterministic ground truth cannot produce contradictory
/// transitions; a contradiction therefore signals corrupted traces.
pub fn learn_from_traces(
    traces: &[Trace],
    vocab: &Vocabulary,
    headers: &[ActionHeader],
    options: &LearnOptions,
) -> Result<LiftedModel, BaselineError> {
    let mut sorted = headers.to_vec();
    sorted.sort();
    let mut actions = Vec::new();
    for header in &sorted {
        let atoms = instantiate_with_parameters(vocab.predicates.values(), header);
        let occurrences: Vec<(&State, &GroundAction, &State)> = traces
            .iter()
            .flat_map(|t| t.steps())
            .filter(|(_, a, _)| a.schema == header.name)
            .collect();

        let mut pre = Vec::new();
        let mut eff = Vec::new();
        if !occurrences.is_empty() {
            for atom in &atoms {
                let always_true = occurrences
                    .iter()
                    .all(|(before, action, _)| before.contains(&atom.ground(&action.args)));
                let always_false = occurrences
                    .iter()
                    .all(|(before, action, _)| !before.contains(&atom.ground(&action.args)));
                if always_true {
                    pre.push(Literal::pos(atom.clone()));
                } else if always_false && options.negative_preconditions {
                    pre.push(Literal::neg(atom.clone()));
                }

                // Effect transitions over injective occurrences: the value
                // after must be a function of the value before.
                let mut after_of: BTreeMap<bool, bool> = BTreeMap::new();
                for (before, action, after) in &occurrences {
                    if !action.is_injective() {
                        continue;
                    }
                    let ground = atom.ground(&action.args);
                    let b = before.contains(&ground);
                    let a = after.contains(&ground);
                    if let Some(prior) = after_of.get(&b) {
                        if *prior != a {
                            return Err(BaselineError::InconsistentDiffs {
                                action: header.name.clone(),
                                atom: atom.display_with(header),
                            });
                        }
                    } else {
                        after_of.insert(b, a);
                    }
                }
                if after_of.get(&false) == Some(&true) {
                    eff.push(Literal::pos(atom.clone()));
                }
                if after_of.get(&true) == Some(&false) {
                    eff.push(Literal::neg(atom.clone()));
                }
            }
        }
        actions.push(ActionSchema::new(header.clone(), pre, eff));
    }
    Ok(LiftedModel::new(
        &vocab.name,
        vocab.types.iter().map(|t| t.as_str()).collect(),
        vocab.predicates.values().cloned().collect(),
        actions,
    ))
}

/// The ad-hoc post-processing step: removes from `model`'s preconditions
/// every literal whose predicate is static according to `learned`'s own
/// effect profile. When the corpus showed some action changing the
/// predicate, it is not static there and the literal survives — which is
/// precisely why the step cannot rescue soundness in general.
pub fn strip_static(model: &LiftedModel, learned: &LiftedModel) -> LiftedModel {
    let statics = crate::strips::static_predicates(learned);
    let mut next = model.clone();
    for schema in next.actions.values_mut() {
        schema.pre.retain(|lit| !statics.contains(&lit.atom.predicate));
    }
    next
}

/// Palm tuples of the learned model restricted to non-absent modes, for
/// reporting.
pub fn learned_tuples(model: &LiftedModel) -> Vec<crate::strips::PalmTuple> {
    crate::strips::palm_tuples_of(model)
        .into_iter()
        .filter(|t| t.mode != Mode::Absent)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::compare_sound_complete;
    use crate::fixtures;
    use crate::strips::{GroundAtom, LiftedAtom, Location, PalmTuple};
    use std::collections::BTreeSet;

    fn at(t: &str, l: &str) -> GroundAtom {
        GroundAtom::new("at", &[t, l])
    }

    fn blue(l: &str) -> GroundAtom {
        GroundAtom::new("src_blue", &[l])
    }

    fn all_blue_filter(problem: &ProblemInstance) -> StateConstraint {
        let require_true = problem
            .init
            .iter()
            .filter(|a| a.predicate == "src_blue")
            .cloned()
            .collect();
        StateConstraint {
            require_true,
            require_false: BTreeSet::new(),
        }
    }

    #[test]
    fn empty_corpus_request_yields_no_traces() {
        let (model, problem) = fixtures::load("drive", "drive-3loc");
        let corpus = generate_traces(&model, &problem, 0, 5, 1, None).unwrap();
        assert!(corpus.traces.is_empty());
        assert!(corpus.warning.is_none());
    }

    #[test]
    fn filtered_walks_stay_inside_the_filter() {
        let (model, problem) = fixtures::load("drive", "drive-3loc");
        let filter = all_blue_filter(&problem);
        let corpus = generate_traces(&model, &problem, 5, 6, 11, Some(&filter)).unwrap();
        assert!(!corpus.traces.is_empty());
        for trace in &corpus.traces {
            assert!(!trace.is_empty());
            for state in trace.states() {
                assert!(filter.satisfied_by(state));
            }
        }
    }

    #[test]
    fn unsatisfiable_filter_warns_and_returns_empty() {
        let (model, mut problem) = fixtures::load("drive", "drive-3loc");
        problem.init.remove(&blue("l1"));
        let filter = StateConstraint {
            require_true: [blue("l1")].into_iter().collect(),
            require_false: BTreeSet::new(),
        };
        let corpus = generate_traces(&model, &problem, 3, 5, 1, Some(&filter)).unwrap();
        assert!(corpus.traces.is_empty());
        assert!(corpus.warning.is_some());
    }

    #[test]
    fn all_blue_corpus_learns_the_spurious_color_precondition() {
        let (model, problem) = fixtures::load("drive", "drive-3loc");
        let vocab = Vocabulary::of_model(&model);
        let filter = all_blue_filter(&problem);
        let corpus = generate_traces(&model, &problem, 8, 6, 3, Some(&filter)).unwrap();
        let learned =
            learn_from_traces(&corpus.traces, &vocab, &model.headers(), &LearnOptions::default())
                .unwrap();
        let pre = &learned.action("drive").unwrap().pre;
        assert!(pre.contains(&Literal::pos(LiftedAtom::new("at", &[0, 1]))));
        assert!(pre.contains(&Literal::pos(LiftedAtom::new("src_blue", &[1]))));
        let diff = compare_sound_complete(&learned, &model).unwrap();
        let spurious_tuple = PalmTuple {
            action: "drive".into(),
            atom: LiftedAtom::new("src_blue", &[1]),
            location: Location::Pre,
            mode: Mode::Pos,
        };
        assert!(diff.spurious.contains(&spurious_tuple));
    }

    #[test]
    fn single_occurrence_overfits_to_the_whole_state() {
        let (model, problem) = fixtures::load("drive", "drive-3loc");
        let vocab = Vocabulary::of_model(&model);
        let trace = Trace::from_steps(
            &model,
            problem.init.clone(),
            vec![GroundAction::new("drive", &["t1", "l1", "l2"])],
        )
        .unwrap();
        let learned =
            learn_from_traces(&[trace], &vocab, &model.headers(), &LearnOptions::default())
                .unwrap();
        let pre = &learned.action("drive").unwrap().pre;
        // Everything liftable that held is a precondition, everything that
        // did not hold is a negative one.
        assert_eq!(pre.len(), 4);
        assert!(pre.contains(&Literal::pos(LiftedAtom::new("at", &[0, 1]))));
        assert!(pre.contains(&Literal::neg(LiftedAtom::new("at", &[0, 2]))));
        assert!(pre.contains(&Literal::pos(LiftedAtom::new("src_blue", &[1]))));
        assert!(pre.contains(&Literal::pos(LiftedAtom::new("src_blue", &[2]))));
    }

    #[test]
    fn exhaustive_corpus_converges_to_the_truth() {
        let (model, _) = fixtures::load("drive", "drive-3loc");
        let vocab = Vocabulary::of_model(&model);
        let action = GroundAction::new("drive", &["t1", "l1", "l2"]);
        // Executions from states flipping every other P*(drive) atom both
        // ways while the precondition holds.
        let bases = [
            vec![at("t1", "l1")],
            vec![at("t1", "l1"), blue("l1")],
            vec![at("t1", "l1"), blue("l2")],
            vec![at("t1", "l1"), at("t1", "l2")],
        ];
        let traces: Vec<Trace> = bases
            .into_iter()
            .map(|atoms| {
                Trace::from_steps(&model, State::from_atoms(atoms), vec![action.clone()]).unwrap()
            })
            .collect();
        let learned =
            learn_from_traces(&traces, &vocab, &model.headers(), &LearnOptions::default())
                .unwrap();
        assert_eq!(learned, model);
        let diff = compare_sound_complete(&learned, &model).unwrap();
        assert!(diff.is_sound() && diff.is_complete());
    }

    #[test]
    fn same_city_corpus_misses_the_cross_city_action() {
        let (model, problem) = fixtures::load("citydrive", "citydrive-4loc");
        let vocab = Vocabulary::of_model(&model);
        // The observer only watches the truck inside its home city.
        let filter = StateConstraint {
            require_true: BTreeSet::new(),
            require_false: [at("t1", "l3"), at("t1", "l4")].into_iter().collect(),
        };
        let corpus = generate_traces(&model, &problem, 10, 8, 7, Some(&filter)).unwrap();
        assert!(corpus
            .traces
            .iter()
            .flat_map(|t| t.steps())
            .all(|(_, a, _)| a.schema == "drive-in-city"));
        let learned =
            learn_from_traces(&corpus.traces, &vocab, &model.headers(), &LearnOptions::default())
                .unwrap();
        let diff = compare_sound_complete(&learned, &model).unwrap();
        assert!(!diff.is_complete());
        let city_equality_tuple = PalmTuple {
            action: "drive-cross-city".into(),
            atom: LiftedAtom::new("same_city", &[1, 2]),
            location: Location::Pre,
            mode: Mode::Neg,
        };
        assert!(diff.missing.contains(&city_equality_tuple));
    }

    #[test]
    fn corrupted_traces_are_detected() {
        // Two generating models that disagree on drive's delete effect make
        // the per-atom transition function contradictory.
        let (model, problem) = fixtures::load("drive", "drive-3loc");
        let mut variant = model.clone();
        variant
            .actions
            .get_mut("drive")
            .unwrap()
            .eff
            .remove(&Literal::neg(LiftedAtom::new("at", &[0, 1])));
        let vocab = Vocabulary::of_model(&model);
        let action = GroundAction::new("drive", &["t1", "l1", "l2"]);
        let honest =
            Trace::from_steps(&model, problem.init.clone(), vec![action.clone()]).unwrap();
        let corrupted = Trace::from_steps(&variant, problem.init.clone(), vec![action]).unwrap();
        let err = learn_from_traces(
            &[honest, corrupted],
            &vocab,
            &model.headers(),
            &LearnOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, BaselineError::InconsistentDiffs { .. }));
    }

    #[test]
    fn stripping_removes_static_color_without_paint() {
        let (model, problem) = fixtures::load("drive", "drive-3loc");
        let vocab = Vocabulary::of_model(&model);
        let filter = all_blue_filter(&problem);
        let corpus = generate_traces(&model, &problem, 8, 6, 3, Some(&filter)).unwrap();
        let learned =
            learn_from_traces(&corpus.traces, &vocab, &model.headers(), &LearnOptions::default())
                .unwrap();
        let stripped = strip_static(&learned, &learned);
        let pre = &stripped.action("drive").unwrap().pre;
        assert!(pre.contains(&Literal::pos(LiftedAtom::new("at", &[0, 1]))));
        assert!(!pre.iter().any(|l| l.atom.predicate == "src_blue"));
    }

    #[test]
    fn stripping_fails_once_paint_makes_color_nonstatic() {
        let (model, problem) = fixtures::load("drive-paint", "drive-paint-3loc");
        let vocab = Vocabulary::of_model(&model);
        // Biased drive walks: every state all-blue.
        let filter = all_blue_filter(&problem);
        let corpus = generate_traces(&model, &problem, 8, 6, 3, Some(&filter)).unwrap();
        let mut traces = corpus.traces;
        // One observed paint transition with a visible color change.
        let mut off_blue = problem.init.clone();
        off_blue.remove(&blue("l1"));
        traces.push(
            Trace::from_steps(&model, off_blue, vec![GroundAction::new("paint", &["l1"])])
                .unwrap(),
        );
        let learned =
            learn_from_traces(&traces, &vocab, &model.headers(), &LearnOptions::default())
                .unwrap();
        // The corpus still pinned src_blue as a drive precondition…
        assert!(learned
            .action("drive")
            .unwrap()
            .pre
            .contains(&Literal::pos(LiftedAtom::new("src_blue", &[1]))));
        // …but paint's observed effect makes the predicate non-static, so
        // stripping no longer removes the spurious literal.
        let stripped = strip_static(&learned, &learned);
        assert!(stripped
            .action("drive")
            .unwrap()
            .pre
            .iter()
            .any(|l| l.atom.predicate == "src_blue"));
    }

    #[test]
    fn stripping_leaves_models_without_static_preconditions_unchanged() {
        let (model, _) = fixtures::load("drive", "drive-3loc");
        assert_eq!(strip_static(&model, &model), model);
    }

    #[test]
    fn unobserved_actions_are_all_absent() {
        let (model, _) = fixtures::load("drive", "drive-3loc");
        let vocab = Vocabulary::of_model(&model);
        let learned =
            learn_from_traces(&[], &vocab, &model.headers(), &LearnOptions::default()).unwrap();
        let schema = learned.action("drive").unwrap();
        assert!(schema.pre.is_empty() && schema.eff.is_empty());
    }

    #[test]
    fn corpus_rendering_is_line_delimited() {
        let (model, problem) = fixtures::load("drive", "drive-3loc");
        let corpus = generate_traces(&model, &problem, 2, 2, 9, None).unwrap();
        let text = corpus.render();
        for line in text.lines().filter(|l| !l.is_empty()) {
            assert_eq!(line.matches('|').count(), 2, "bad record: {line}");
        }
    }
}
