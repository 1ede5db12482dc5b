//! Canonical PDDL serialization: actions and literals in sorted order,
//! requirements derived from the model, byte-identical output for equal
//! models.

use crate::strips::{ActionHeader, ActionSchema, LiftedModel, Literal, OBJECT_TYPE};

fn literal_text(lit: &Literal, header: &ActionHeader) -> String {
    let args: Vec<&str> = lit
        .atom
        .args
        .iter()
        .map(|&i| header.params[i].name.as_str())
        .collect();
    let atom = if args.is_empty() {
        format!("({})", lit.atom.predicate)
    } else {
        format!("({} {})", lit.atom.predicate, args.join(" "))
    };
    if lit.positive {
        atom
    } else {
        format!("(not {atom})")
    }
}

fn condition_text(literals: &[String]) -> String {
    if literals.is_empty() {
        "(and)".to_string()
    } else {
        format!("(and {})", literals.join(" "))
    }
}

fn uses_types(model: &LiftedModel) -> bool {
    !model.types.is_empty()
}

fn has_negative_preconditions(model: &LiftedModel) -> bool {
    model
        .actions
        .values()
        .any(|a| a.pre.iter().any(|l| !l.positive))
}

fn action_text(schema: &ActionSchema, typed: bool) -> String {
    let mut params = String::new();
    for (i, p) in schema.header.params.iter().enumerate() {
        if i > 0 {
            params.push(' ');
        }
        params.push_str(&p.name);
        if typed {
            params.push_str(&format!(" - {}", p.ty));
        }
    }
    let mut pre: Vec<String> = schema
        .pre
        .iter()
        .map(|l| literal_text(l, &schema.header))
        .collect();
    pre.sort();
    let mut eff: Vec<String> = schema
        .eff
        .iter()
        .map(|l| literal_text(l, &schema.header))
        .collect();
    eff.sort();
    format!(
        "  (:action {}\n    :parameters ({})\n    :precondition {}\n    :effect {})",
        schema.name(),
        params,
        condition_text(&pre),
        condition_text(&eff),
    )
}

/// Emits the model as PDDL in the supported subset. Pure function of the
/// model: identical models yield byte-identical text.
pub fn write_domain(model: &LiftedModel) -> String {
    let typed = uses_types(model);
    let mut out = String::new();
    out.push_str(&format!("(define (domain {})\n", model.name));

    let mut requirements = vec![":strips"];
    if typed {
        requirements.push(":typing");
    }
    if has_negative_preconditions(model) {
        requirements.push(":negative-preconditions");
    }
    out.push_str(&format!("  (:requirements {})\n", requirements.join(" ")));

    if typed {
        let types: Vec<&str> = model.types.iter().map(|t| t.as_str()).collect();
        out.push_str(&format!("  (:types {})\n", types.join(" ")));
    }

    out.push_str("  (:predicates\n");
    let preds: Vec<String> = model
        .predicates
        .values()
        .map(|decl| {
            let mut s = format!("    ({}", decl.name);
            for (i, ty) in decl.param_types.iter().enumerate() {
                s.push_str(&format!(" ?x{i}"));
                if typed {
                    s.push_str(&format!(" - {ty}"));
                } else {
                    debug_assert_eq!(ty, OBJECT_TYPE);
                }
            }
            s.push(')');
            s
        })
        .collect();
    out.push_str(&preds.join("\n"));
    out.push_str(")\n");

    let actions: Vec<String> = model
        .actions
        .values()
        .map(|a| action_text(a, typed))
        .collect();
    out.push_str(&actions.join("\n"));
    out.push_str(")\n");
    out
}
