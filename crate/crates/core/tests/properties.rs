//! Property tests for the core invariants: failure idempotence, prefix
//! consistency, palm round-trips, instantiation counts, serialization
//! round-trips and parser totality.

use std::collections::BTreeSet;

use proptest::prelude::*;

use modelprobe::pddl::{parse_domain, serialize_domain, DomainSource};
use modelprobe::strips::{
    apply_action, execute_plan, instantiate_with_parameters, palm_tuples_of, static_predicates,
    ActionHeader, GroundAction, GroundAtom, LiftedAtom, LiftedModel, Location, Mode, PalmTuple,
    PredicateDecl, State, OBJECT_TYPE,
};

const OBJECTS: [&str; 3] = ["o1", "o2", "o3"];

/// Legal (pre, eff) mode pairs for one atom: contradictions are impossible
/// by construction and no-op effects are excluded.
fn mode_pair() -> impl Strategy<Value = (Mode, Mode)> {
    prop::sample::select(vec![
        (Mode::Absent, Mode::Absent),
        (Mode::Absent, Mode::Pos),
        (Mode::Absent, Mode::Neg),
        (Mode::Pos, Mode::Absent),
        (Mode::Pos, Mode::Neg),
        (Mode::Neg, Mode::Absent),
        (Mode::Neg, Mode::Pos),
    ])
}

type ActionSpec = (String, usize, Vec<(Mode, Mode)>);

#[derive(Debug, Clone)]
struct ModelSpec {
    predicates: Vec<(String, usize)>,
    actions: Vec<ActionSpec>,
}

fn model_spec() -> impl Strategy<Value = ModelSpec> {
    let predicates = prop::collection::vec(0usize..=2, 1..=3).prop_map(|arities| {
        arities
            .into_iter()
            .enumerate()
            .map(|(i, k)| (format!("p{i}"), k))
            .collect::<Vec<_>>()
    });
    predicates.prop_flat_map(|preds| {
        let preds_for_actions = preds.clone();
        prop::collection::vec(0usize..=2, 1..=2)
            .prop_flat_map(move |param_counts| {
                let mut action_strategies = Vec::new();
                for (i, params) in param_counts.iter().enumerate() {
                    let decls: Vec<PredicateDecl> = preds_for_actions
                        .iter()
                        .map(|(n, k)| PredicateDecl::new(n, &vec![OBJECT_TYPE; *k]))
                        .collect();
                    let header = header_of(&format!("a{i}"), *params);
                    let atom_count = instantiate_with_parameters(decls.iter(), &header).len();
                    let name = format!("a{i}");
                    let params = *params;
                    action_strategies.push(
                        prop::collection::vec(mode_pair(), atom_count)
                            .prop_map(move |modes| (name.clone(), params, modes)),
                    );
                }
                action_strategies
            })
            .prop_map(move |actions| ModelSpec {
                predicates: preds.clone(),
                actions,
            })
    })
}

fn header_of(name: &str, params: usize) -> ActionHeader {
    let names: Vec<String> = (0..params).map(|i| format!("?x{i}")).collect();
    ActionHeader {
        name: name.to_string(),
        params: names
            .into_iter()
            .map(|n| modelprobe::strips::Param {
                name: n,
                ty: OBJECT_TYPE.to_string(),
            })
            .collect(),
    }
}

fn build_model(spec: &ModelSpec) -> LiftedModel {
    let decls: Vec<PredicateDecl> = spec
        .predicates
        .iter()
        .map(|(n, k)| PredicateDecl::new(n, &vec![OBJECT_TYPE; *k]))
        .collect();
    let mut tuples: BTreeSet<PalmTuple> = BTreeSet::new();
    let mut headers = Vec::new();
    for (name, params, modes) in &spec.actions {
        let header = header_of(name, *params);
        let atoms: Vec<LiftedAtom> = instantiate_with_parameters(decls.iter(), &header)
            .into_iter()
            .collect();
        for (atom, (pre, eff)) in atoms.iter().zip(modes.iter()) {
            tuples.insert(PalmTuple {
                action: name.clone(),
                atom: atom.clone(),
                location: Location::Pre,
                mode: *pre,
            });
            tuples.insert(PalmTuple {
                action: name.clone(),
                atom: atom.clone(),
                location: Location::Eff,
                mode: *eff,
            });
        }
        headers.push(header);
    }
    let model = LiftedModel::from_palm_tuples("random", vec![], decls, headers, &tuples);
    model.validate().expect("mode pairs are legal by construction");
    model
}

fn ground_atoms(model: &LiftedModel) -> Vec<GroundAtom> {
    let objects = OBJECTS
        .iter()
        .map(|o| (o.to_string(), OBJECT_TYPE.to_string()))
        .collect();
    modelprobe::strips::ground_model(model, &objects).0
}

fn ground_actions(model: &LiftedModel) -> Vec<GroundAction> {
    let objects = OBJECTS
        .iter()
        .map(|o| (o.to_string(), OBJECT_TYPE.to_string()))
        .collect();
    modelprobe::strips::ground_model(model, &objects).1
}

proptest! {
    #[test]
    fn failed_applications_leave_the_state_bit_exact(
        spec in model_spec(),
        state_mask in any::<u64>(),
        action_pick in any::<prop::sample::Index>(),
    ) {
        let model = build_model(&spec);
        let atoms = ground_atoms(&model);
        let actions = ground_actions(&model);
        prop_assume!(!actions.is_empty());
        let state = State::from_atoms(
            atoms
                .iter()
                .enumerate()
                .filter(|(i, _)| state_mask & (1 << (i % 60)) != 0)
                .map(|(_, a)| a.clone()),
        );
        let action = &actions[action_pick.index(actions.len())];
        let (next, succ) = apply_action(&model, &state, action).unwrap();
        if !succ {
            prop_assert_eq!(next, state);
        }
    }

    #[test]
    fn plan_prefixes_replay_consistently(
        spec in model_spec(),
        state_mask in any::<u64>(),
        picks in prop::collection::vec(any::<prop::sample::Index>(), 0..5),
    ) {
        let model = build_model(&spec);
        let atoms = ground_atoms(&model);
        let actions = ground_actions(&model);
        prop_assume!(!actions.is_empty());
        let state = State::from_atoms(
            atoms
                .iter()
                .enumerate()
                .filter(|(i, _)| state_mask & (1 << (i % 60)) != 0)
                .map(|(_, a)| a.clone()),
        );
        let plan: Vec<GroundAction> = picks
            .iter()
            .map(|p| actions[p.index(actions.len())].clone())
            .collect();
        let (executed, final_state) = execute_plan(&model, &state, &plan).unwrap();
        prop_assert!(executed <= plan.len());
        // Replaying any prefix of the executed part yields the state the
        // next step was evaluated against.
        for k in 0..=executed {
            let (k_executed, k_state) = execute_plan(&model, &state, &plan[..k]).unwrap();
            prop_assert_eq!(k_executed, k);
            if k < executed {
                let (_, succ) = apply_action(&model, &k_state, &plan[k]).unwrap();
                prop_assert!(succ);
            } else {
                prop_assert_eq!(&k_state, &final_state);
            }
        }
        if executed < plan.len() {
            let (_, succ) = apply_action(&model, &final_state, &plan[executed]).unwrap();
            prop_assert!(!succ);
        }
    }

    #[test]
    fn palm_projection_round_trips(spec in model_spec()) {
        let model = build_model(&spec);
        let tuples = palm_tuples_of(&model);
        let expected: usize = model
            .actions
            .values()
            .map(|a| {
                2 * instantiate_with_parameters(model.predicates.values(), &a.header).len()
            })
            .sum();
        prop_assert_eq!(tuples.len(), expected);
        let rebuilt = LiftedModel::from_palm_tuples(
            "random",
            vec![],
            model.predicates.values().cloned().collect(),
            model.headers(),
            &tuples,
        );
        prop_assert_eq!(rebuilt, model);
    }

    #[test]
    fn untyped_instantiation_counts_are_powers(arity in 0usize..=3, params in 0usize..=3) {
        let decl = PredicateDecl::new("p", &vec![OBJECT_TYPE; arity]);
        let header = header_of("a", params);
        let atoms = instantiate_with_parameters([&decl], &header);
        let expected = if arity == 0 { 1 } else { params.pow(arity as u32) };
        prop_assert_eq!(atoms.len(), expected);
    }

    #[test]
    fn statics_never_appear_in_effects(spec in model_spec()) {
        let model = build_model(&spec);
        let statics = static_predicates(&model);
        for schema in model.actions.values() {
            for lit in &schema.eff {
                prop_assert!(!statics.contains(&lit.atom.predicate));
            }
        }
    }

    #[test]
    fn serialization_round_trips_structurally(spec in model_spec()) {
        let model = build_model(&spec);
        let text = serialize_domain(&model);
        let reparsed = parse_domain(&DomainSource::inline(&text)).unwrap();
        prop_assert_eq!(&reparsed, &model);
        prop_assert_eq!(serialize_domain(&reparsed), text);
    }

    #[test]
    fn parser_never_panics(input in "[ a-z0-9():?\\-_\n;]*") {
        let _ = parse_domain(&DomainSource::inline(&input));
    }

    #[test]
    fn parser_never_panics_on_near_pddl(body in "[():a-z?\\- \n]{0,200}") {
        let text = format!("(define (domain d) {body})");
        let _ = parse_domain(&DomainSource::inline(&text));
    }
}
