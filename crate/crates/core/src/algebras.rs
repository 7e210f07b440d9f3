//! Algebras that ship with the crate.

use crate::lie::StructureConstants;
use crate::rational::rat;

/// `[X1, X2] = X1`.
pub fn a1() -> StructureConstants {
    StructureConstants::from_brackets(2, [(1, 2, vec![(1, rat(1))])]).expect("valid brackets")
}

/// Two commuting copies of `a(1)`: `[X1, X2] = X1`, `[X3, X4] = X3`.
pub fn a1_sum() -> StructureConstants {
    a1().direct_sum(&a1())
}

/// Five-dimensional algebra of the PDE `u_tt + u_t = u_xx / u_x` in the catalog.
pub fn heat5() -> StructureConstants {
    StructureConstants::from_brackets(
        5,
        [
            (1, 4, vec![(4, rat(-1))]),
            (2, 5, vec![(2, rat(-1))]),
            (3, 5, vec![(3, rat(1))]),
            (4, 5, vec![(4, rat(1))]),
        ],
    )
    .expect("valid brackets")
}

/// Looks up a bundled algebra by name.
pub fn by_name(name: &str) -> Option<StructureConstants> {
    match name {
        "a1" => Some(a1()),
        "a1+a1" => Some(a1_sum()),
        "heat5" => Some(heat5()),
        _ => None,
    }
}

pub const NAMES: [&str; 3] = ["a1", "a1+a1", "heat5"];
