//! Reduction strategies for the bundled algebras.

use super::canonical::{EpsFormula, ReductionStep, Strategy, StrategyBranch};
use crate::algebras;
use crate::lie::StructureConstants;

fn pattern(rows: &[&str]) -> Vec<String> {
    rows.iter().map(|r| r.to_string()).collect()
}

fn ratio(
    generator: usize,
    num: (usize, usize),
    den: (usize, usize),
    negate: bool,
) -> ReductionStep {
    ReductionStep {
        generator,
        epsilon: EpsFormula::Ratio { num, den, negate },
    }
}

/// `ε = -ln|b_entry|`, naming the resulting sign.
fn neg_log(generator: usize, entry: (usize, usize), sign: &str) -> ReductionStep {
    ReductionStep {
        generator,
        epsilon: EpsFormula::LogAbs {
            entry,
            scale: -1,
            sign_name: sign.into(),
        },
    }
}

fn a1() -> Strategy {
    Strategy::new(
        "a1",
        vec![StrategyBranch {
            pattern: pattern(&["*.", "**"]),
            steps: vec![ratio(1, (2, 1), (1, 1), false), neg_log(2, (1, 1), "alpha")],
            renames: Vec::new(),
        }],
    )
}

fn a1_sum() -> Strategy {
    Strategy::new(
        "a1+a1",
        vec![
            StrategyBranch {
                pattern: pattern(&["*...", "**..", "..*.", "..**"]),
                steps: vec![
                    ratio(1, (2, 1), (1, 1), false),
                    neg_log(2, (1, 1), "alpha"),
                    ratio(3, (4, 3), (3, 3), false),
                    neg_log(4, (3, 3), "beta"),
                ],
                renames: Vec::new(),
            },
            StrategyBranch {
                pattern: pattern(&["..*.", "..**", "*...", "**.."]),
                steps: vec![
                    ratio(1, (2, 3), (1, 3), false),
                    ratio(3, (4, 1), (3, 1), false),
                    neg_log(2, (1, 3), "alpha"),
                    neg_log(4, (3, 1), "beta"),
                ],
                renames: Vec::new(),
            },
        ],
    )
}

fn heat5() -> Strategy {
    Strategy::new(
        "heat5",
        vec![
            StrategyBranch {
                pattern: pattern(&["*..*.", ".*...", "..*..", "...*.", ".****"]),
                steps: vec![
                    ratio(4, (5, 4), (4, 4), false),
                    ratio(2, (5, 2), (2, 2), true),
                    ratio(3, (5, 3), (3, 3), false),
                    neg_log(5, (3, 3), "alpha"),
                    neg_log(1, (4, 4), "beta"),
                ],
                renames: vec![("b22".into(), "b".into())],
            },
            StrategyBranch {
                pattern: pattern(&["*..*.", "..*..", ".*...", "...*.", "*****"]),
                steps: vec![
                    ratio(4, (5, 4), (4, 4), false),
                    ratio(2, (5, 3), (2, 3), true),
                    ratio(3, (5, 2), (3, 2), false),
                    neg_log(5, (3, 2), "alpha"),
                    neg_log(1, (4, 4), "beta"),
                ],
                renames: vec![("b23".into(), "b".into())],
            },
        ],
    )
}

pub fn bundled_strategy_names() -> &'static [&'static str] {
    &algebras::NAMES
}

pub fn bundled_strategy(name: &str) -> Option<Strategy> {
    match name {
        "a1" => Some(a1()),
        "a1+a1" => Some(a1_sum()),
        "heat5" => Some(heat5()),
        _ => None,
    }
}

/// The bundled strategy whose algebra has exactly these structure constants.
pub fn strategy_for_algebra(sc: &StructureConstants) -> Option<Strategy> {
    algebras::NAMES
        .iter()
        .find(|name| algebras::by_name(name).as_ref() == Some(sc))
        .and_then(|name| bundled_strategy(name))
}
