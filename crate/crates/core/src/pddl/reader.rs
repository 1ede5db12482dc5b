//! Reads position-tagged s-expressions into [`LiftedModel`] and
//! [`ProblemInstance`] values, validating against the supported subset
//! (`:strips`, `:typing`, `:negative-preconditions`). Anything outside the
//! subset is rejected with a diagnostic naming the construct and its source
//! position.

use std::collections::BTreeMap;

use super::sexpr::{parse, Position, Sexpr};
use super::{ParseError, ParseErrorKind, ProblemInstance};
use crate::strips::{
    type_fits, ActionHeader, ActionSchema, GroundAtom, GroundLiteral, LiftedAtom, LiftedModel,
    Literal, Param, PredicateDecl, State, TypedObjects, OBJECT_TYPE,
};

const SUPPORTED_REQUIREMENTS: [&str; 3] = [":strips", ":typing", ":negative-preconditions"];

/// Constructs we recognize but deliberately do not support; naming them makes
/// the rejection diagnostics actionable.
const UNSUPPORTED_HEADS: [&str; 12] = [
    "when", "forall", "exists", "or", "imply", "=", "increase", "decrease", "assign",
    "scale-up", "scale-down", "either",
];

fn err(pos: Position, kind: ParseErrorKind) -> ParseError {
    ParseError { pos, kind }
}

fn syntax(pos: Position, expected: &str, found: String) -> ParseError {
    err(
        pos,
        ParseErrorKind::Syntax {
            expected: expected.to_string(),
            found,
        },
    )
}

fn unsupported(pos: Position, construct: &str) -> ParseError {
    err(
        pos,
        ParseErrorKind::Unsupported {
            construct: construct.to_string(),
        },
    )
}

fn expect_sym<'a>(expr: &'a Sexpr, expected: &str) -> Result<(&'a str, Position), ParseError> {
    expr.as_sym()
        .ok_or_else(|| syntax(expr.pos(), expected, expr.describe()))
}

fn expect_name(expr: &Sexpr, what: &str) -> Result<(String, Position), ParseError> {
    let (sym, pos) = expect_sym(expr, what)?;
    if !is_name(sym) {
        return Err(syntax(pos, what, format!("`{sym}`")));
    }
    Ok((sym.to_string(), pos))
}

fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-' || c == '_')
}

fn is_variable(s: &str) -> bool {
    s.starts_with('?') && is_name(&s[1..])
}

/// One entry of a PDDL typed list: names plus the type they were declared
/// with (`object` when untyped).
struct TypedNames {
    names: Vec<(String, Position)>,
    ty: String,
    ty_pos: Position,
}

/// Parses `name+ [- type]` groups. `types_allowed` gates the `- type` form so
/// `(:types a b - vehicle)` can be rejected as a subtype chain while the same
/// shape stays legal in parameter lists.
fn parse_typed_list(
    items: &[Sexpr],
    what: &str,
    variables: bool,
) -> Result<Vec<TypedNames>, ParseError> {
    let mut groups = Vec::new();
    let mut pending: Vec<(String, Position)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let (sym, pos) = expect_sym(&items[i], what)?;
        if sym == "-" {
            if pending.is_empty() {
                return Err(syntax(pos, what, "`-`".to_string()));
            }
            let ty_expr = items
                .get(i + 1)
                .ok_or_else(|| syntax(pos, "a type name after `-`", "end of list".to_string()))?;
            let (ty, ty_pos) = expect_name(ty_expr, "a type name")?;
            groups.push(TypedNames {
                names: std::mem::take(&mut pending),
                ty,
                ty_pos,
            });
            i += 2;
            continue;
        }
        let ok = if variables {
            is_variable(sym)
        } else {
            is_name(sym)
        };
        if !ok {
            return Err(syntax(pos, what, format!("`{sym}`")));
        }
        pending.push((sym.to_string(), pos));
        i += 1;
    }
    if !pending.is_empty() {
        let ty_pos = pending[0].1;
        groups.push(TypedNames {
            names: pending,
            ty: OBJECT_TYPE.to_string(),
            ty_pos,
        });
    }
    Ok(groups)
}

struct DefineBody<'a> {
    name: String,
    sections: Vec<(&'a str, &'a [Sexpr], Position)>,
}

/// Unwraps `(define (<kind> <name>) <sections>…)`.
fn read_define<'a>(exprs: &'a [Sexpr], kind: &str) -> Result<DefineBody<'a>, ParseError> {
    let top_pos = Position { line: 1, col: 1 };
    let (items, pos) = match exprs {
        [single] => single
            .as_list()
            .ok_or_else(|| syntax(single.pos(), "(define …)", single.describe()))?,
        [] => return Err(syntax(top_pos, "(define …)", "empty input".to_string())),
        [_, extra, ..] => {
            return Err(syntax(
                extra.pos(),
                "a single (define …) form",
                "trailing content".to_string(),
            ))
        }
    };
    match items.first().and_then(|e| e.as_sym()) {
        Some(("define", _)) => {}
        _ => return Err(syntax(pos, "(define …)", "something else".to_string())),
    }
    let head = items
        .get(1)
        .ok_or_else(|| syntax(pos, &format!("({kind} <name>)"), "end of form".to_string()))?;
    let (head_items, head_pos) = head
        .as_list()
        .ok_or_else(|| syntax(head.pos(), &format!("({kind} <name>)"), head.describe()))?;
    match head_items.first().and_then(|e| e.as_sym()) {
        Some((k, _)) if k == kind => {}
        _ => {
            return Err(syntax(
                head_pos,
                &format!("({kind} <name>)"),
                "a different form".to_string(),
            ))
        }
    }
    let name_expr = head_items.get(1).ok_or_else(|| {
        syntax(head_pos, &format!("a {kind} name"), "end of form".to_string())
    })?;
    let (name, _) = expect_name(name_expr, &format!("a {kind} name"))?;
    let mut sections = Vec::new();
    for section in &items[2..] {
        let (sec_items, sec_pos) = section
            .as_list()
            .ok_or_else(|| syntax(section.pos(), "a (:section …) form", section.describe()))?;
        let (key, _) = sec_items
            .first()
            .and_then(|e| e.as_sym())
            .ok_or_else(|| syntax(sec_pos, "a :section keyword", "a list".to_string()))?;
        sections.push((key, &sec_items[1..], sec_pos));
    }
    Ok(DefineBody { name, sections })
}

pub fn read_domain(text: &str) -> Result<LiftedModel, ParseError> {
    let exprs = parse(text).map_err(|e| {
        err(
            e.pos,
            ParseErrorKind::Syntax {
                expected: "well-formed s-expressions".to_string(),
                found: e.message,
            },
        )
    })?;
    let body = read_define(&exprs, "domain")?;

    let mut types = Vec::new();
    let mut predicates: BTreeMap<String, PredicateDecl> = BTreeMap::new();
    let mut actions: BTreeMap<String, ActionSchema> = BTreeMap::new();
    let mut action_positions: BTreeMap<String, Position> = BTreeMap::new();

    for (key, items, pos) in &body.sections {
        match *key {
            ":requirements" => {
                for item in *items {
                    let (req, req_pos) = expect_sym(item, "a requirement flag")?;
                    if !SUPPORTED_REQUIREMENTS.contains(&req) {
                        return Err(unsupported(req_pos, &format!("requirement {req}")));
                    }
                }
            }
            ":types" => {
                for group in parse_typed_list(items, "a type name", false)? {
                    if group.ty != OBJECT_TYPE {
                        return Err(unsupported(
                            group.ty_pos,
                            &format!("subtype chain (`- {}`); only a flat hierarchy under `object` is supported", group.ty),
                        ));
                    }
                    for (name, name_pos) in group.names {
                        if name == OBJECT_TYPE {
                            return Err(syntax(
                                name_pos,
                                "a type name other than `object`",
                                "`object`".to_string(),
                            ));
                        }
                        types.push(name);
                    }
                }
            }
            ":predicates" => {
                for decl in *items {
                    let (decl_items, decl_pos) = decl
                        .as_list()
                        .ok_or_else(|| syntax(decl.pos(), "a predicate declaration", decl.describe()))?;
                    let name_expr = decl_items.first().ok_or_else(|| {
                        syntax(decl_pos, "a predicate name", "empty list".to_string())
                    })?;
                    let (name, name_pos) = expect_name(name_expr, "a predicate name")?;
                    let mut param_types = Vec::new();
                    for group in parse_typed_list(&decl_items[1..], "a predicate parameter", true)? {
                        for _ in group.names {
                            param_types.push(group.ty.clone());
                        }
                    }
                    let prior = predicates.insert(
                        name.clone(),
                        PredicateDecl {
                            name: name.clone(),
                            param_types,
                        },
                    );
                    if prior.is_some() {
                        return Err(err(
                            name_pos,
                            ParseErrorKind::Duplicate {
                                what: "predicate".to_string(),
                                name,
                            },
                        ));
                    }
                }
            }
            ":action" => {
                let (schema, schema_pos) = read_action(items, *pos, &predicates)?;
                let name = schema.name().to_string();
                if actions.insert(name.clone(), schema).is_some() {
                    return Err(err(
                        schema_pos,
                        ParseErrorKind::Duplicate {
                            what: "action".to_string(),
                            name,
                        },
                    ));
                }
                action_positions.insert(name, schema_pos);
            }
            ":constants" | ":functions" | ":constraints" | ":durative-action" | ":axiom"
            | ":derived" => return Err(unsupported(*pos, &format!("section {key}"))),
            other => return Err(syntax(*pos, "a supported domain section", format!("`{other}`"))),
        }
    }

    let model = LiftedModel::new(
        &body.name,
        types.iter().map(|t| t.as_str()).collect(),
        predicates.into_values().collect(),
        actions.into_values().collect(),
    );
    model.validate().map_err(|e| {
        let action = match &e {
            crate::strips::ModelError::ContradictoryLiterals { action, .. }
            | crate::strips::ModelError::NoOpEffect { action, .. }
            | crate::strips::ModelError::ParameterIndex { action, .. }
            | crate::strips::ModelError::UndeclaredType { context: action, .. } => Some(action.clone()),
            _ => None,
        };
        let pos = action
            .and_then(|n| action_positions.get(&n).copied())
            .unwrap_or(Position { line: 1, col: 1 });
        err(pos, ParseErrorKind::Model(e))
    })?;
    Ok(model)
}

fn read_action(
    items: &[Sexpr],
    pos: Position,
    predicates: &BTreeMap<String, PredicateDecl>,
) -> Result<(ActionSchema, Position), ParseError> {
    let name_expr = items
        .first()
        .ok_or_else(|| syntax(pos, "an action name", "end of form".to_string()))?;
    let (name, name_pos) = expect_name(name_expr, "an action name")?;

    let mut params: Vec<Param> = Vec::new();
    let mut pre: Vec<Literal> = Vec::new();
    let mut eff: Vec<Literal> = Vec::new();
    let mut saw_params = false;

    let mut i = 1;
    while i < items.len() {
        let (key, key_pos) = expect_sym(&items[i], "an action keyword")?;
        let value = items.get(i + 1).ok_or_else(|| {
            syntax(key_pos, &format!("a value after {key}"), "end of form".to_string())
        })?;
        match key {
            ":parameters" => {
                let (list, _) = value
                    .as_list()
                    .ok_or_else(|| syntax(value.pos(), "a parameter list", value.describe()))?;
                for group in parse_typed_list(list, "a parameter variable", true)? {
                    for (pname, ppos) in group.names {
                        if params.iter().any(|p| p.name == pname) {
                            return Err(err(
                                ppos,
                                ParseErrorKind::Duplicate {
                                    what: "parameter".to_string(),
                                    name: pname,
                                },
                            ));
                        }
                        params.push(Param {
                            name: pname,
                            ty: group.ty.clone(),
                        });
                    }
                }
                saw_params = true;
            }
            ":precondition" => {
                pre = read_condition(value, &params, predicates)?;
            }
            ":effect" => {
                eff = read_condition(value, &params, predicates)?;
            }
            other => return Err(syntax(key_pos, "an action keyword", format!("`{other}`"))),
        }
        i += 2;
    }
    if !saw_params {
        return Err(syntax(name_pos, ":parameters", "no parameter list".to_string()));
    }
    Ok((
        ActionSchema {
            header: ActionHeader {
                name,
                params,
            },
            pre: pre.into_iter().collect(),
            eff: eff.into_iter().collect(),
        },
        name_pos,
    ))
}

/// Reads a precondition or effect body: a single literal or an `(and …)` of
/// literals, with `(not …)` producing negative literals.
fn read_condition(
    expr: &Sexpr,
    params: &[Param],
    predicates: &BTreeMap<String, PredicateDecl>,
) -> Result<Vec<Literal>, ParseError> {
    let (items, pos) = expr
        .as_list()
        .ok_or_else(|| syntax(expr.pos(), "a condition", expr.describe()))?;
    let Some((head, _)) = items.first().and_then(|e| e.as_sym()) else {
        if items.is_empty() {
            return Ok(Vec::new()); // () is an empty condition
        }
        return Err(syntax(pos, "a condition", "a nested list".to_string()));
    };
    if head == "and" {
        let mut literals = Vec::new();
        for item in &items[1..] {
            literals.push(read_literal(item, params, predicates)?);
        }
        return Ok(literals);
    }
    Ok(vec![read_literal(expr, params, predicates)?])
}

fn read_literal(
    expr: &Sexpr,
    params: &[Param],
    predicates: &BTreeMap<String, PredicateDecl>,
) -> Result<Literal, ParseError> {
    let (items, pos) = expr
        .as_list()
        .ok_or_else(|| syntax(expr.pos(), "a literal", expr.describe()))?;
    let (head, head_pos) = items
        .first()
        .and_then(|e| e.as_sym())
        .ok_or_else(|| syntax(pos, "a predicate name", "a list".to_string()))?;
    if head == "not" {
        if items.len() != 2 {
            return Err(syntax(pos, "(not <atom>)", "wrong arity".to_string()));
        }
        let inner = read_literal(&items[1], params, predicates)?;
        if !inner.positive {
            return Err(syntax(items[1].pos(), "an atom", "a nested `not`".to_string()));
        }
        return Ok(Literal::neg(inner.atom));
    }
    if UNSUPPORTED_HEADS.contains(&head) {
        return Err(unsupported(head_pos, head));
    }
    let decl = predicates
        .get(head)
        .ok_or_else(|| err(head_pos, ParseErrorKind::UnknownPredicate(head.to_string())))?;
    let args = &items[1..];
    if args.len() != decl.arity() {
        return Err(err(
            pos,
            ParseErrorKind::Arity {
                name: head.to_string(),
                expected: decl.arity(),
                got: args.len(),
            },
        ));
    }
    let mut indices = Vec::new();
    for (arg, slot) in args.iter().zip(decl.param_types.iter()) {
        let (sym, sym_pos) = expect_sym(arg, "a parameter variable")?;
        if !is_variable(sym) {
            return Err(unsupported(
                sym_pos,
                &format!("constant `{sym}` in an action body (literals must use parameters)"),
            ));
        }
        let idx = params
            .iter()
            .position(|p| p.name == sym)
            .ok_or_else(|| err(sym_pos, ParseErrorKind::UnknownVariable(sym.to_string())))?;
        if !type_fits(&params[idx].ty, slot) {
            return Err(err(
                sym_pos,
                ParseErrorKind::TypeMismatch {
                    name: sym.to_string(),
                    actual: params[idx].ty.clone(),
                    expected: slot.clone(),
                },
            ));
        }
        indices.push(idx);
    }
    Ok(Literal::pos(LiftedAtom {
        predicate: head.to_string(),
        args: indices,
    }))
}

pub fn read_problem(text: &str, model: &LiftedModel) -> Result<ProblemInstance, ParseError> {
    let exprs = parse(text).map_err(|e| {
        err(
            e.pos,
            ParseErrorKind::Syntax {
                expected: "well-formed s-expressions".to_string(),
                found: e.message,
            },
        )
    })?;
    let body = read_define(&exprs, "problem")?;

    let mut domain_name = None;
    let mut objects = TypedObjects::new();
    let mut init = State::empty();
    let mut goal = Vec::new();

    for (key, items, pos) in &body.sections {
        match *key {
            ":domain" => {
                let name_expr = items
                    .first()
                    .ok_or_else(|| syntax(*pos, "a domain name", "end of form".to_string()))?;
                let (name, name_pos) = expect_name(name_expr, "a domain name")?;
                if name != model.name {
                    return Err(err(
                        name_pos,
                        ParseErrorKind::DomainMismatch {
                            declared: name,
                            parsed: model.name.clone(),
                        },
                    ));
                }
                domain_name = Some(name);
            }
            ":objects" => {
                for group in parse_typed_list(items, "an object name", false)? {
                    if group.ty != OBJECT_TYPE && !model.types.contains(&group.ty) {
                        return Err(err(
                            group.ty_pos,
                            ParseErrorKind::UnknownType(group.ty.clone()),
                        ));
                    }
                    for (name, name_pos) in group.names {
                        if objects.insert(name.clone(), group.ty.clone()).is_some() {
                            return Err(err(
                                name_pos,
                                ParseErrorKind::Duplicate {
                                    what: "object".to_string(),
                                    name,
                                },
                            ));
                        }
                    }
                }
            }
            ":init" => {
                for item in *items {
                    let atom = read_ground_atom(item, model, &objects)?;
                    init.insert(atom);
                }
            }
            ":goal" => {
                let value = items
                    .first()
                    .ok_or_else(|| syntax(*pos, "a goal condition", "end of form".to_string()))?;
                goal = read_ground_condition(value, model, &objects)?;
            }
            other => return Err(syntax(*pos, "a supported problem section", format!("`{other}`"))),
        }
    }

    if domain_name.is_none() {
        return Err(err(
            Position { line: 1, col: 1 },
            ParseErrorKind::Syntax {
                expected: "(:domain <name>)".to_string(),
                found: "no :domain section".to_string(),
            },
        ));
    }

    Ok(ProblemInstance {
        name: body.name,
        domain: model.name.clone(),
        objects,
        init,
        goal: goal.into_iter().collect(),
    })
}

fn read_ground_condition(
    expr: &Sexpr,
    model: &LiftedModel,
    objects: &TypedObjects,
) -> Result<Vec<GroundLiteral>, ParseError> {
    let (items, pos) = expr
        .as_list()
        .ok_or_else(|| syntax(expr.pos(), "a goal condition", expr.describe()))?;
    let Some((head, _)) = items.first().and_then(|e| e.as_sym()) else {
        if items.is_empty() {
            return Ok(Vec::new());
        }
        return Err(syntax(pos, "a goal condition", "a nested list".to_string()));
    };
    if head == "and" {
        let mut literals = Vec::new();
        for item in &items[1..] {
            literals.push(read_ground_literal(item, model, objects)?);
        }
        return Ok(literals);
    }
    Ok(vec![read_ground_literal(expr, model, objects)?])
}

fn read_ground_literal(
    expr: &Sexpr,
    model: &LiftedModel,
    objects: &TypedObjects,
) -> Result<GroundLiteral, ParseError> {
    let (items, pos) = expr
        .as_list()
        .ok_or_else(|| syntax(expr.pos(), "a literal", expr.describe()))?;
    if let Some(("not", _)) = items.first().and_then(|e| e.as_sym()) {
        if items.len() != 2 {
            return Err(syntax(pos, "(not <atom>)", "wrong arity".to_string()));
        }
        let atom = read_ground_atom(&items[1], model, objects)?;
        return Ok(GroundLiteral {
            atom,
            positive: false,
        });
    }
    let atom = read_ground_atom(expr, model, objects)?;
    Ok(GroundLiteral {
        atom,
        positive: true,
    })
}

fn read_ground_atom(
    expr: &Sexpr,
    model: &LiftedModel,
    objects: &TypedObjects,
) -> Result<GroundAtom, ParseError> {
    let (items, pos) = expr
        .as_list()
        .ok_or_else(|| syntax(expr.pos(), "a ground atom", expr.describe()))?;
    let (head, head_pos) = items
        .first()
        .and_then(|e| e.as_sym())
        .ok_or_else(|| syntax(pos, "a predicate name", "a list".to_string()))?;
    if UNSUPPORTED_HEADS.contains(&head) || head == "not" {
        return Err(unsupported(head_pos, &format!("{head} in :init")));
    }
    let decl = model
        .predicates
        .get(head)
        .ok_or_else(|| err(head_pos, ParseErrorKind::UnknownPredicate(head.to_string())))?;
    let args = &items[1..];
    if args.len() != decl.arity() {
        return Err(err(
            pos,
            ParseErrorKind::Arity {
                name: head.to_string(),
                expected: decl.arity(),
                got: args.len(),
            },
        ));
    }
    let mut names = Vec::new();
    for (arg, slot) in args.iter().zip(decl.param_types.iter()) {
        let (sym, sym_pos) = expect_sym(arg, "an object name")?;
        let ty = objects
            .get(sym)
            .ok_or_else(|| err(sym_pos, ParseErrorKind::UnknownObject(sym.to_string())))?;
        if !type_fits(ty, slot) {
            return Err(err(
                sym_pos,
                ParseErrorKind::TypeMismatch {
                    name: sym.to_string(),
                    actual: ty.clone(),
                    expected: slot.clone(),
                },
            ));
        }
        names.push(sym.to_string());
    }
    Ok(GroundAtom {
        predicate: head.to_string(),
        args: names,
    })
}
