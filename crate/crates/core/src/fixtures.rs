//! Bundled demonstration domains and problems, embedded so that tests and
//! the CLI's builtin suite work without touching the filesystem.

use crate::pddl::{parse_domain, parse_problem, DomainSource, ProblemInstance};
use crate::strips::LiftedModel;

pub struct Fixture {
    pub name: &'static str,
    pub domain: &'static str,
    pub problems: &'static [(&'static str, &'static str)],
}

pub const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "drive",
        domain: include_str!("../fixtures/drive.pddl"),
        problems: &[
            ("drive-3loc", include_str!("../fixtures/drive-3loc.pddl")),
            ("drive-2loc", include_str!("../fixtures/drive-2loc.pddl")),
        ],
    },
    Fixture {
        name: "drive8",
        domain: include_str!("../fixtures/drive8.pddl"),
        problems: &[("drive8-3loc", include_str!("../fixtures/drive8-3loc.pddl"))],
    },
    Fixture {
        name: "drive16",
        domain: include_str!("../fixtures/drive16.pddl"),
        problems: &[(
            "drive16-3loc",
            include_str!("../fixtures/drive16-3loc.pddl"),
        )],
    },
    Fixture {
        name: "drive-paint",
        domain: include_str!("../fixtures/drive-paint.pddl"),
        problems: &[(
            "drive-paint-3loc",
            include_str!("../fixtures/drive-paint-3loc.pddl"),
        )],
    },
    Fixture {
        name: "gripper",
        domain: include_str!("../fixtures/gripper.pddl"),
        problems: &[(
            "gripper-small",
            include_str!("../fixtures/gripper-small.pddl"),
        )],
    },
    Fixture {
        name: "blocksworld",
        domain: include_str!("../fixtures/blocksworld.pddl"),
        problems: &[
            ("blocksworld-3", include_str!("../fixtures/blocksworld-3.pddl")),
            ("blocksworld-2", include_str!("../fixtures/blocksworld-2.pddl")),
        ],
    },
    Fixture {
        name: "citydrive",
        domain: include_str!("../fixtures/citydrive.pddl"),
        problems: &[(
            "citydrive-4loc",
            include_str!("../fixtures/citydrive-4loc.pddl"),
        )],
    },
];

pub fn find(name: &str) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.name == name)
}

/// Parses a bundled domain together with one of its problems. Panics on a
/// name that is not bundled; the fixture sources themselves always parse.
pub fn load(domain: &str, problem: &str) -> (LiftedModel, ProblemInstance) {
    let fixture = find(domain).unwrap_or_else(|| panic!("no bundled domain `{domain}`"));
    let model = parse_domain(&DomainSource::inline(fixture.domain))
        .unwrap_or_else(|e| panic!("bundled domain `{domain}` failed to parse: {e}"));
    let text = fixture
        .problems
        .iter()
        .find(|(n, _)| *n == problem)
        .unwrap_or_else(|| panic!("no bundled problem `{problem}` for `{domain}`"))
        .1;
    let instance = parse_problem(&DomainSource::inline(text), &model)
        .unwrap_or_else(|e| panic!("bundled problem `{problem}` failed to parse: {e}"));
    (model, instance)
}

/// The default problem used when a bundled domain is run without an explicit
/// problem choice.
pub fn default_problem(domain: &str) -> Option<&'static str> {
    find(domain).and_then(|f| f.problems.first().map(|(n, _)| *n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_bundled_fixtures_parse_and_validate() {
        for fixture in FIXTURES {
            let model = parse_domain(&DomainSource::inline(fixture.domain)).unwrap();
            model.validate().unwrap();
            for (name, text) in fixture.problems {
                let problem = parse_problem(&DomainSource::inline(text), &model).unwrap();
                assert!(!problem.objects.is_empty(), "{name} has objects");
            }
        }
    }

    #[test]
    fn gripper_has_three_actions() {
        let (model, _) = load("gripper", "gripper-small");
        assert_eq!(model.actions.len(), 3);
    }

    #[test]
    fn blocksworld_has_four_actions() {
        let (model, _) = load("blocksworld", "blocksworld-3");
        assert_eq!(model.actions.len(), 4);
    }
}
