//! Ground-truth semantics of STRIPS-like models: grounding, precondition
//! checking, action application with failure-preserves-state semantics, plan
//! execution, parameter-bound predicate instantiation, static-predicate
//! classification and palm-tuple extraction.
//!
//! States are closed-world: an atom not listed in a state is false. All values
//! are immutable after construction and every operation here is a pure
//! function, so they can be evaluated from multiple threads without
//! synchronization.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// The root of the (flat) type hierarchy. Untyped domains are the degenerate
/// case where everything is an `object`.
pub const OBJECT_TYPE: &str = "object";

/// Name of a type in the flat hierarchy.
pub type TypeName = String;

/// A typed set of objects, as declared by a problem instance.
pub type TypedObjects = BTreeMap<String, TypeName>;

/// Returns true when a value of type `actual` may appear in a slot declared
/// as `slot`. With a flat hierarchy this is equality, plus `object` accepting
/// anything.
pub fn type_fits(actual: &str, slot: &str) -> bool {
    slot == OBJECT_TYPE || actual == slot
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("action `{action}` expects {expected} arguments, got {got}")]
    ActionArity {
        action: String,
        expected: usize,
        got: usize,
    },
    #[error("predicate `{predicate}` expects {expected} arguments, got {got}")]
    PredicateArity {
        predicate: String,
        expected: usize,
        got: usize,
    },
    #[error("object `{object}` of type `{actual}` does not fit slot of type `{expected}`")]
    TypeMismatch {
        object: String,
        actual: String,
        expected: String,
    },
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("action `{action}`: literal argument index {index} out of range")]
    ParameterIndex { action: String, index: usize },
    #[error("action `{action}`: atom `{atom}` appears with both polarities in {section}")]
    ContradictoryLiterals {
        action: String,
        atom: String,
        section: String,
    },
    #[error("action `{action}`: effect `{literal}` repeats a precondition literal (no-op effect)")]
    NoOpEffect { action: String, literal: String },
    #[error("`{context}`: type `{ty}` is not declared")]
    UndeclaredType { context: String, ty: String },
}

/// A predicate declaration: name plus the types of its argument slots. The
/// arity is the length of `param_types`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PredicateDecl {
    pub name: String,
    pub param_types: Vec<TypeName>,
}

impl PredicateDecl {
    pub fn new(name: &str, param_types: &[&str]) -> Self {
        PredicateDecl {
            name: name.to_string(),
            param_types: param_types.iter().map(|t| t.to_string()).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.param_types.len()
    }
}

/// A typed action parameter.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Param {
    pub name: String,
    pub ty: TypeName,
}

/// Action name plus its typed parameter list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ActionHeader {
    pub name: String,
    pub params: Vec<Param>,
}

impl ActionHeader {
    pub fn new(name: &str, params: &[(&str, &str)]) -> Self {
        ActionHeader {
            name: name.to_string(),
            params: params
                .iter()
                .map(|(n, t)| Param {
                    name: n.to_string(),
                    ty: t.to_string(),
                })
                .collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

/// A predicate atom whose arguments are positions in an action's parameter
/// list. Keeping indices instead of names makes comparisons independent of
/// parameter spelling.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LiftedAtom {
    pub predicate: String,
    pub args: Vec<usize>,
}

impl LiftedAtom {
    pub fn new(predicate: &str, args: &[usize]) -> Self {
        LiftedAtom {
            predicate: predicate.to_string(),
            args: args.to_vec(),
        }
    }

    /// Renders the atom with the parameter names of `header`.
    pub fn display_with(&self, header: &ActionHeader) -> String {
        let args: Vec<&str> = self
            .args
            .iter()
            .map(|&i| header.params[i].name.as_str())
            .collect();
        if args.is_empty() {
            self.predicate.clone()
        } else {
            format!("{}({})", self.predicate, args.join(","))
        }
    }

    /// Substitutes concrete objects for parameters. `binding[i]` is the
    /// object bound to parameter `i`.
    pub fn ground(&self, binding: &[String]) -> GroundAtom {
        GroundAtom {
            predicate: self.predicate.clone(),
            args: self.args.iter().map(|&i| binding[i].clone()).collect(),
        }
    }
}

/// A positive or negative occurrence of a lifted atom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Literal {
    pub atom: LiftedAtom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: LiftedAtom) -> Self {
        Literal {
            atom,
            positive: true,
        }
    }

    pub fn neg(atom: LiftedAtom) -> Self {
        Literal {
            atom,
            positive: false,
        }
    }

    pub fn display_with(&self, header: &ActionHeader) -> String {
        if self.positive {
            self.atom.display_with(header)
        } else {
            format!("!{}", self.atom.display_with(header))
        }
    }
}

/// An action schema: header, precondition literals and effect literals, all
/// lifted over the header's own parameters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ActionSchema {
    pub header: ActionHeader,
    pub pre: BTreeSet<Literal>,
    pub eff: BTreeSet<Literal>,
}

impl ActionSchema {
    pub fn new(header: ActionHeader, pre: Vec<Literal>, eff: Vec<Literal>) -> Self {
        ActionSchema {
            header,
            pre: pre.into_iter().collect(),
            eff: eff.into_iter().collect(),
        }
    }

    pub fn name(&self) -> &str {
        &self.header.name
    }
}

/// A STRIPS-like model: predicate vocabulary plus action schemas, with an
/// optional flat set of type names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedModel {
    pub name: String,
    pub types: BTreeSet<TypeName>,
    pub predicates: BTreeMap<String, PredicateDecl>,
    pub actions: BTreeMap<String, ActionSchema>,
}

impl LiftedModel {
    pub fn new(
        name: &str,
        types: Vec<&str>,
        predicates: Vec<PredicateDecl>,
        actions: Vec<ActionSchema>,
    ) -> Self {
        LiftedModel {
            name: name.to_string(),
            types: types.into_iter().map(|t| t.to_string()).collect(),
            predicates: predicates.into_iter().map(|p| (p.name.clone(), p)).collect(),
            actions: actions
                .into_iter()
                .map(|a| (a.header.name.clone(), a))
                .collect(),
        }
    }

    pub fn action(&self, name: &str) -> Result<&ActionSchema, ModelError> {
        self.actions
            .get(name)
            .ok_or_else(|| ModelError::UnknownAction(name.to_string()))
    }

    pub fn headers(&self) -> Vec<ActionHeader> {
        self.actions.values().map(|a| a.header.clone()).collect()
    }

    /// Checks the structural invariants: every literal references a declared
    /// predicate with matching arity and compatible parameter types, no atom
    /// carries both polarities within pre or within eff, and no effect
    /// literal repeats a precondition literal unchanged.
    pub fn validate(&self) -> Result<(), ModelError> {
        for decl in self.predicates.values() {
            for ty in &decl.param_types {
                if ty != OBJECT_TYPE && !self.types.contains(ty) {
                    return Err(ModelError::UndeclaredType {
                        context: decl.name.clone(),
                        ty: ty.clone(),
                    });
                }
            }
        }
        for schema in self.actions.values() {
            let action = schema.name().to_string();
            for param in &schema.header.params {
                if param.ty != OBJECT_TYPE && !self.types.contains(&param.ty) {
                    return Err(ModelError::UndeclaredType {
                        context: action,
                        ty: param.ty.clone(),
                    });
                }
            }
            for (section, lits) in [("pre", &schema.pre), ("eff", &schema.eff)] {
                for lit in lits.iter() {
                    let decl = self
                        .predicates
                        .get(&lit.atom.predicate)
                        .ok_or_else(|| ModelError::UnknownPredicate(lit.atom.predicate.clone()))?;
                    if decl.arity() != lit.atom.args.len() {
                        return Err(ModelError::PredicateArity {
                            predicate: decl.name.clone(),
                            expected: decl.arity(),
                            got: lit.atom.args.len(),
                        });
                    }
                    for (slot, &idx) in decl.param_types.iter().zip(lit.atom.args.iter()) {
                        let param = schema.header.params.get(idx).ok_or(
                            ModelError::ParameterIndex {
                                action: action.clone(),
                                index: idx,
                            },
                        )?;
                        if !type_fits(&param.ty, slot) {
                            return Err(ModelError::TypeMismatch {
                                object: param.name.clone(),
                                actual: param.ty.clone(),
                                expected: slot.clone(),
                            });
                        }
                    }
                    if lits.contains(&Literal {
                        atom: lit.atom.clone(),
                        positive: !lit.positive,
                    }) {
                        return Err(ModelError::ContradictoryLiterals {
                            action,
                            atom: lit.atom.display_with(&schema.header),
                            section: section.to_string(),
                        });
                    }
                }
            }
            for lit in schema.eff.iter() {
                if schema.pre.contains(lit) {
                    return Err(ModelError::NoOpEffect {
                        action,
                        literal: lit.display_with(&schema.header),
                    });
                }
            }
        }
        Ok(())
    }

    /// Rebuilds a model from a palm-tuple projection. Inverse of
    /// [`palm_tuples_of`] on well-formed models.
    pub fn from_palm_tuples(
        name: &str,
        types: Vec<&str>,
        predicates: Vec<PredicateDecl>,
        headers: Vec<ActionHeader>,
        tuples: &BTreeSet<PalmTuple>,
    ) -> Self {
        let actions = headers
            .into_iter()
            .map(|header| {
                let mut pre = BTreeSet::new();
                let mut eff = BTreeSet::new();
                for t in tuples.iter().filter(|t| t.action == header.name) {
                    let lit = match t.mode {
                        Mode::Pos => Literal::pos(t.atom.clone()),
                        Mode::Neg => Literal::neg(t.atom.clone()),
                        Mode::Absent => continue,
                    };
                    match t.location {
                        Location::Pre => pre.insert(lit),
                        Location::Eff => eff.insert(lit),
                    };
                }
                ActionSchema {
                    header,
                    pre,
                    eff,
                }
            })
            .collect();
        LiftedModel::new(name, types, predicates, actions)
    }
}

/// A predicate applied to concrete objects.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn new(predicate: &str, args: &[&str]) -> Self {
        GroundAtom {
            predicate: predicate.to_string(),
            args: args.iter().map(|a| a.to_string()).collect(),
        }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            write!(f, "{}", self.predicate)
        } else {
            write!(f, "{}({})", self.predicate, self.args.join(","))
        }
    }
}

/// A closed-world state: the set of true ground atoms.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct State {
    atoms: BTreeSet<GroundAtom>,
}

impl State {
    pub fn empty() -> Self {
        State::default()
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = GroundAtom>) -> Self {
        State {
            atoms: atoms.into_iter().collect(),
        }
    }

    pub fn contains(&self, atom: &GroundAtom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn insert(&mut self, atom: GroundAtom) {
        self.atoms.insert(atom);
    }

    pub fn remove(&mut self, atom: &GroundAtom) {
        self.atoms.remove(atom);
    }

    /// Returns a copy with `atom`'s truth value flipped.
    pub fn toggled(&self, atom: &GroundAtom) -> State {
        let mut next = self.clone();
        if next.contains(atom) {
            next.remove(atom);
        } else {
            next.insert(atom.clone());
        }
        next
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroundAtom> {
        self.atoms.iter()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.atoms.iter().map(|a| a.to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

/// A positive or negative occurrence of a ground atom (used for goals).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroundLiteral {
    pub atom: GroundAtom,
    pub positive: bool,
}

impl GroundLiteral {
    pub fn holds_in(&self, state: &State) -> bool {
        state.contains(&self.atom) == self.positive
    }
}

impl fmt::Display for GroundLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "!{}", self.atom)
        }
    }
}

/// An action schema applied to concrete objects.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroundAction {
    pub schema: String,
    pub args: Vec<String>,
}

impl GroundAction {
    pub fn new(schema: &str, args: &[&str]) -> Self {
        GroundAction {
            schema: schema.to_string(),
            args: args.iter().map(|a| a.to_string()).collect(),
        }
    }

    /// True when no object is bound to two different parameters.
    pub fn is_injective(&self) -> bool {
        let distinct: BTreeSet<&String> = self.args.iter().collect();
        distinct.len() == self.args.len()
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            write!(f, "{}", self.schema)
        } else {
            write!(f, "{}({})", self.schema, self.args.join(","))
        }
    }
}

/// Where a palm tuple lives in a schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Location {
    Pre,
    Eff,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Pre => write!(f, "pre"),
            Location::Eff => write!(f, "eff"),
        }
    }
}

/// How a lifted atom occurs at a location: positively, negatively, or not at
/// all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Mode {
    Pos,
    Neg,
    Absent,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Pos => write!(f, "+"),
            Mode::Neg => write!(f, "-"),
            Mode::Absent => write!(f, "absent"),
        }
    }
}

/// The atomic unit of a learned model: one lifted atom of `P*(action)`, a
/// location (pre or eff) and the mode of its occurrence there.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PalmTuple {
    pub action: String,
    pub atom: LiftedAtom,
    pub location: Location,
    pub mode: Mode,
}

impl PalmTuple {
    pub fn display_with(&self, header: &ActionHeader) -> String {
        format!(
            "({}, {}, {}, {})",
            self.atom.display_with(header),
            self.action,
            self.location,
            self.mode
        )
    }
}

/// All atoms formed by substituting the header's parameters into each
/// predicate, respecting parameter types. Parameter repetition is allowed:
/// `at(?x,?y)` under a 3-parameter untyped header yields 9 atoms.
pub fn instantiate_with_parameters<'a>(
    predicates: impl IntoIterator<Item = &'a PredicateDecl>,
    header: &ActionHeader,
) -> BTreeSet<LiftedAtom> {
    let mut out = BTreeSet::new();
    for decl in predicates {
        let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
        for slot in &decl.param_types {
            let mut next = Vec::new();
            for partial in &stack {
                for (i, param) in header.params.iter().enumerate() {
                    if type_fits(&param.ty, slot) {
                        let mut args = partial.clone();
                        args.push(i);
                        next.push(args);
                    }
                }
            }
            stack = next;
        }
        for args in stack {
            out.insert(LiftedAtom {
                predicate: decl.name.clone(),
                args,
            });
        }
    }
    out
}

/// The instantiation set `P*(a)` for one schema of the model.
pub fn action_atoms(model: &LiftedModel, action: &str) -> Result<BTreeSet<LiftedAtom>, ModelError> {
    let schema = model.action(action)?;
    Ok(instantiate_with_parameters(
        model.predicates.values(),
        &schema.header,
    ))
}

fn binding_for<'a>(
    model: &'a LiftedModel,
    action: &GroundAction,
) -> Result<&'a ActionSchema, ModelError> {
    let schema = model.action(&action.schema)?;
    if schema.header.arity() != action.args.len() {
        return Err(ModelError::ActionArity {
            action: action.schema.clone(),
            expected: schema.header.arity(),
            got: action.args.len(),
        });
    }
    Ok(schema)
}

/// True iff every positive precondition's ground atom is in `state` and every
/// negative one's is not.
pub fn check_preconditions(
    model: &LiftedModel,
    state: &State,
    action: &GroundAction,
) -> Result<bool, ModelError> {
    let schema = binding_for(model, action)?;
    Ok(schema.pre.iter().all(|lit| {
        let ground = lit.atom.ground(&action.args);
        state.contains(&ground) == lit.positive
    }))
}

/// Applies `action` to `state`. When the preconditions hold the result is
/// `(state \ deletes) ∪ adds` with `succ = true`; otherwise the input state
/// is returned unchanged with `succ = false`.
pub fn apply_action(
    model: &LiftedModel,
    state: &State,
    action: &GroundAction,
) -> Result<(State, bool), ModelError> {
    if !check_preconditions(model, state, action)? {
        return Ok((state.clone(), false));
    }
    let schema = binding_for(model, action)?;
    let mut next = state.clone();
    for lit in schema.eff.iter().filter(|l| !l.positive) {
        next.remove(&lit.atom.ground(&action.args));
    }
    for lit in schema.eff.iter().filter(|l| l.positive) {
        next.insert(lit.atom.ground(&action.args));
    }
    Ok((next, true))
}

/// Executes `plan` from `initial`, halting at the first failing step.
/// Returns the length of the longest successfully executed prefix and the
/// state it leads to.
pub fn execute_plan(
    model: &LiftedModel,
    initial: &State,
    plan: &[GroundAction],
) -> Result<(usize, State), ModelError> {
    let mut state = initial.clone();
    for (i, action) in plan.iter().enumerate() {
        let (next, succ) = apply_action(model, &state, action)?;
        if !succ {
            return Ok((i, state));
        }
        state = next;
    }
    Ok((plan.len(), state))
}

/// Complete enumeration of ground atoms and ground actions over a typed
/// object set, respecting slot types. Both lists come back sorted.
pub fn ground_model(
    model: &LiftedModel,
    objects: &TypedObjects,
) -> (Vec<GroundAtom>, Vec<GroundAction>) {
    let tuples = |slots: &[TypeName]| -> Vec<Vec<String>> {
        let mut stack: Vec<Vec<String>> = vec![Vec::new()];
        for slot in slots {
            let mut next = Vec::new();
            for partial in &stack {
                for (obj, ty) in objects.iter() {
                    if type_fits(ty, slot) {
                        let mut args = partial.clone();
                        args.push(obj.clone());
                        next.push(args);
                    }
                }
            }
            stack = next;
        }
        stack
    };

    let mut atoms = Vec::new();
    for decl in model.predicates.values() {
        for args in tuples(&decl.param_types) {
            atoms.push(GroundAtom {
                predicate: decl.name.clone(),
                args,
            });
        }
    }
    atoms.sort();

    let mut actions = Vec::new();
    for schema in model.actions.values() {
        let slots: Vec<TypeName> = schema.header.params.iter().map(|p| p.ty.clone()).collect();
        for args in tuples(&slots) {
            actions.push(GroundAction {
                schema: schema.name().to_string(),
                args,
            });
        }
    }
    actions.sort();
    (atoms, actions)
}

/// An injective, type-respecting binding for a header: the first distinct
/// objects of each required type, in parameter order. Returns `None` when
/// the object set cannot supply enough distinct objects.
pub fn canonical_binding(header: &ActionHeader, objects: &TypedObjects) -> Option<Vec<String>> {
    let mut used: BTreeSet<String> = BTreeSet::new();
    let mut binding = Vec::new();
    for param in &header.params {
        let obj = objects
            .iter()
            .find(|(name, ty)| type_fits(ty, &param.ty) && !used.contains(*name))?
            .0
            .clone();
        used.insert(obj.clone());
        binding.push(obj);
    }
    Some(binding)
}

/// Exactly the predicates absent (in either polarity) from every action's
/// effects. With no actions, every predicate is static.
pub fn static_predicates(model: &LiftedModel) -> BTreeSet<String> {
    let mut touched = BTreeSet::new();
    for schema in model.actions.values() {
        for lit in &schema.eff {
            touched.insert(lit.atom.predicate.clone());
        }
    }
    model
        .predicates
        .keys()
        .filter(|p| !touched.contains(*p))
        .cloned()
        .collect()
}

/// The complete palm-tuple projection of a model: for every action `a` and
/// atom `q ∈ P*(a)`, one tuple per location whose mode reflects membership
/// and polarity in `pre(a)` / `eff(a)`. Cardinality is `Σ_a 2·|P*(a)|`.
pub fn palm_tuples_of(model: &LiftedModel) -> BTreeSet<PalmTuple> {
    let mut out = BTreeSet::new();
    for schema in model.actions.values() {
        let atoms = instantiate_with_parameters(model.predicates.values(), &schema.header);
        for atom in atoms {
            for (location, lits) in [(Location::Pre, &schema.pre), (Location::Eff, &schema.eff)] {
                let mode = if lits.contains(&Literal::pos(atom.clone())) {
                    Mode::Pos
                } else if lits.contains(&Literal::neg(atom.clone())) {
                    Mode::Neg
                } else {
                    Mode::Absent
                };
                out.insert(PalmTuple {
                    action: schema.name().to_string(),
                    atom: atom.clone(),
                    location,
                    mode,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The running-example model: one action drive(?t,?s,?d) with
    /// pre {at(?t,?s)} and eff {-at(?t,?s), +at(?t,?d)}.
    pub fn drive_model() -> LiftedModel {
        let model = LiftedModel::new(
            "drive",
            vec!["truck", "loc"],
            vec![
                PredicateDecl::new("at", &["truck", "loc"]),
                PredicateDecl::new("src_blue", &["loc"]),
            ],
            vec![ActionSchema::new(
                ActionHeader::new("drive", &[("?t", "truck"), ("?s", "loc"), ("?d", "loc")]),
                vec![Literal::pos(LiftedAtom::new("at", &[0, 1]))],
                vec![
                    Literal::neg(LiftedAtom::new("at", &[0, 1])),
                    Literal::pos(LiftedAtom::new("at", &[0, 2])),
                ],
            )],
        );
        model.validate().expect("drive model is well-formed");
        model
    }

    fn drive(t: &str, s: &str, d: &str) -> GroundAction {
        GroundAction::new("drive", &[t, s, d])
    }

    fn at(t: &str, l: &str) -> GroundAtom {
        GroundAtom::new("at", &[t, l])
    }

    #[test]
    fn untyped_instantiation_allows_repetition() {
        // at(?x,?y) over load_truck(?v1,?v2,?v3): 3^2 = 9 atoms.
        let header = ActionHeader::new(
            "load_truck",
            &[("?v1", OBJECT_TYPE), ("?v2", OBJECT_TYPE), ("?v3", OBJECT_TYPE)],
        );
        let preds = [PredicateDecl::new("at", &[OBJECT_TYPE, OBJECT_TYPE])];
        let atoms = instantiate_with_parameters(preds.iter(), &header);
        assert_eq!(atoms.len(), 9);
        assert!(atoms.contains(&LiftedAtom::new("at", &[0, 0])));
        assert!(atoms.contains(&LiftedAtom::new("at", &[2, 1])));
    }

    #[test]
    fn typed_instantiation_of_drive_gives_four_atoms() {
        let model = drive_model();
        let atoms = action_atoms(&model, "drive").unwrap();
        let header = &model.action("drive").unwrap().header;
        let rendered: BTreeSet<String> = atoms.iter().map(|a| a.display_with(header)).collect();
        let expected: BTreeSet<String> = ["at(?t,?s)", "at(?t,?d)", "src_blue(?s)", "src_blue(?d)"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(rendered, expected);
    }

    #[test]
    fn zero_arity_predicate_has_one_instantiation() {
        let header = ActionHeader::new("noop", &[("?x", OBJECT_TYPE)]);
        let preds = [PredicateDecl::new("handempty", &[])];
        let atoms = instantiate_with_parameters(preds.iter(), &header);
        assert_eq!(atoms.len(), 1);
        assert!(atoms.contains(&LiftedAtom::new("handempty", &[])));
    }

    #[test]
    fn preconditions_hold_exactly_when_satisfied() {
        let model = drive_model();
        let sat = State::from_atoms([at("t1", "l1")]);
        assert!(check_preconditions(&model, &sat, &drive("t1", "l1", "l2")).unwrap());
        let unsat = State::from_atoms([at("t1", "l3")]);
        assert!(!check_preconditions(&model, &unsat, &drive("t1", "l1", "l2")).unwrap());
    }

    #[test]
    fn empty_precondition_is_vacuously_true() {
        let model = LiftedModel::new(
            "m",
            vec![],
            vec![PredicateDecl::new("p", &[])],
            vec![ActionSchema::new(
                ActionHeader::new("a", &[]),
                vec![],
                vec![Literal::pos(LiftedAtom::new("p", &[]))],
            )],
        );
        assert!(check_preconditions(&model, &State::empty(), &GroundAction::new("a", &[])).unwrap());
    }

    #[test]
    fn unknown_action_is_an_error() {
        let model = drive_model();
        let err = check_preconditions(&model, &State::empty(), &GroundAction::new("fly", &[]));
        assert_eq!(err.unwrap_err(), ModelError::UnknownAction("fly".into()));
    }

    #[test]
    fn apply_moves_the_truck() {
        let model = drive_model();
        let s = State::from_atoms([at("t1", "l1")]);
        let (next, succ) = apply_action(&model, &s, &drive("t1", "l1", "l2")).unwrap();
        assert!(succ);
        assert_eq!(next, State::from_atoms([at("t1", "l2")]));
    }

    #[test]
    fn failed_application_preserves_the_state() {
        let model = drive_model();
        let s = State::from_atoms([at("t1", "l3")]);
        let (next, succ) = apply_action(&model, &s, &drive("t1", "l1", "l2")).unwrap();
        assert!(!succ);
        assert_eq!(next, s);
    }

    #[test]
    fn empty_effects_leave_state_unchanged() {
        let model = LiftedModel::new(
            "m",
            vec![],
            vec![PredicateDecl::new("p", &[])],
            vec![ActionSchema::new(
                ActionHeader::new("a", &[]),
                vec![Literal::pos(LiftedAtom::new("p", &[]))],
                vec![],
            )],
        );
        let s = State::from_atoms([GroundAtom::new("p", &[])]);
        let (next, succ) = apply_action(&model, &s, &GroundAction::new("a", &[])).unwrap();
        assert!(succ);
        assert_eq!(next, s);
    }

    #[test]
    fn plan_execution_stops_at_first_failure() {
        // Third step fails: after two drives the truck is at l3, not l2.
        let model = drive_model();
        let init = State::from_atoms([at("t1", "l1")]);
        let plan = vec![
            drive("t1", "l1", "l2"),
            drive("t1", "l2", "l3"),
            drive("t1", "l2", "l1"),
        ];
        let (len, state) = execute_plan(&model, &init, &plan).unwrap();
        assert_eq!(len, 2);
        assert_eq!(state, State::from_atoms([at("t1", "l3")]));
    }

    #[test]
    fn empty_plan_executes_zero_steps() {
        let model = drive_model();
        let init = State::from_atoms([at("t1", "l1")]);
        let (len, state) = execute_plan(&model, &init, &[]).unwrap();
        assert_eq!(len, 0);
        assert_eq!(state, init);
    }

    #[test]
    fn plan_failing_at_first_step_returns_initial_state() {
        let model = drive_model();
        let init = State::from_atoms([at("t1", "l3")]);
        let plan = vec![drive("t1", "l1", "l2")];
        let (len, state) = execute_plan(&model, &init, &plan).unwrap();
        assert_eq!(len, 0);
        assert_eq!(state, init);
    }

    #[test]
    fn grounding_enumerates_atoms_and_actions() {
        let model = drive_model();
        let mut objects = TypedObjects::new();
        objects.insert("t1".into(), "truck".into());
        objects.insert("l1".into(), "loc".into());
        objects.insert("l2".into(), "loc".into());
        let (atoms, actions) = ground_model(&model, &objects);
        // 1 truck x 2 locs at-atoms, plus 2 src_blue atoms.
        assert_eq!(atoms.len(), 4);
        // 1 truck x 2 sources x 2 destinations.
        assert_eq!(actions.len(), 4);
        assert!(atoms.contains(&at("t1", "l2")));
        assert!(actions.contains(&drive("t1", "l2", "l2")));
    }

    #[test]
    fn grounding_with_no_objects_is_empty() {
        let model = drive_model();
        let (atoms, actions) = ground_model(&model, &TypedObjects::new());
        assert!(atoms.is_empty());
        assert!(actions.is_empty());
    }

    #[test]
    fn statics_are_the_predicates_missing_from_all_effects() {
        let model = drive_model();
        let statics = static_predicates(&model);
        assert_eq!(statics.into_iter().collect::<Vec<_>>(), vec!["src_blue"]);
    }

    #[test]
    fn all_predicates_are_static_without_actions() {
        let model = LiftedModel::new(
            "m",
            vec![],
            vec![PredicateDecl::new("p", &[]), PredicateDecl::new("q", &[])],
            vec![],
        );
        assert_eq!(static_predicates(&model).len(), 2);
    }

    #[test]
    fn drive_palm_projection_has_eight_tuples() {
        let model = drive_model();
        let tuples = palm_tuples_of(&model);
        assert_eq!(tuples.len(), 8);
        let find = |atom: LiftedAtom, location: Location| -> Mode {
            tuples
                .iter()
                .find(|t| t.atom == atom && t.location == location)
                .unwrap()
                .mode
        };
        assert_eq!(find(LiftedAtom::new("at", &[0, 1]), Location::Pre), Mode::Pos);
        assert_eq!(find(LiftedAtom::new("at", &[0, 1]), Location::Eff), Mode::Neg);
        assert_eq!(find(LiftedAtom::new("at", &[0, 2]), Location::Eff), Mode::Pos);
        assert_eq!(find(LiftedAtom::new("at", &[0, 2]), Location::Pre), Mode::Absent);
        assert_eq!(find(LiftedAtom::new("src_blue", &[1]), Location::Pre), Mode::Absent);
        assert_eq!(find(LiftedAtom::new("src_blue", &[2]), Location::Eff), Mode::Absent);
    }

    #[test]
    fn action_without_literals_projects_to_all_absent() {
        let model = LiftedModel::new(
            "m",
            vec![],
            vec![PredicateDecl::new("p", &[OBJECT_TYPE])],
            vec![ActionSchema::new(
                ActionHeader::new("a", &[("?x", OBJECT_TYPE)]),
                vec![],
                vec![],
            )],
        );
        let tuples = palm_tuples_of(&model);
        assert_eq!(tuples.len(), 2);
        assert!(tuples.iter().all(|t| t.mode == Mode::Absent));
    }

    #[test]
    fn palm_projection_inverts_to_the_same_model() {
        let model = drive_model();
        let tuples = palm_tuples_of(&model);
        let rebuilt = LiftedModel::from_palm_tuples(
            "drive",
            vec!["truck", "loc"],
            model.predicates.values().cloned().collect(),
            model.headers(),
            &tuples,
        );
        assert_eq!(rebuilt, model);
    }

    #[test]
    fn validation_rejects_noop_effects() {
        let model = LiftedModel::new(
            "m",
            vec![],
            vec![PredicateDecl::new("p", &[])],
            vec![ActionSchema::new(
                ActionHeader::new("a", &[]),
                vec![Literal::pos(LiftedAtom::new("p", &[]))],
                vec![Literal::pos(LiftedAtom::new("p", &[]))],
            )],
        );
        assert!(matches!(
            model.validate(),
            Err(ModelError::NoOpEffect { .. })
        ));
    }

    #[test]
    fn validation_rejects_contradictory_effects() {
        let model = LiftedModel::new(
            "m",
            vec![],
            vec![PredicateDecl::new("p", &[])],
            vec![ActionSchema::new(
                ActionHeader::new("a", &[]),
                vec![],
                vec![
                    Literal::pos(LiftedAtom::new("p", &[])),
                    Literal::neg(LiftedAtom::new("p", &[])),
                ],
            )],
        );
        assert!(matches!(
            model.validate(),
            Err(ModelError::ContradictoryLiterals { .. })
        ));
    }
}
