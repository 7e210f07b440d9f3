//! Runs the residual checks, group closure and `B` reduction for catalog
//! entries.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::auto::{
    canonicalize, solve_families, strategy_for_algebra, BMatrixFamily, SolveError, Strategy,
    StrategyError,
};
use crate::catalog::{CatalogEntry, CatalogMap, Equation};
use crate::group::{
    closure_and_table, CayleyTable, Fingerprint, GroupError, SampleSet, DEFAULT_SAMPLE_POINTS,
};
use crate::jets::{
    contact_residual, determining_residual, is_uniform, symmetry_residual, ContactMap, JetError,
};
use crate::lie::StructureConstants;
use crate::pde::{pde_contact_residual, pde_determining_residual, pde_symmetry_residual};
use crate::report::VerificationReport;
use crate::sampling::CheckOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Commutator,
    Contact,
    Symmetry,
    Determining,
    Uniform,
}

impl Check {
    pub const ALL: [Check; 5] = [
        Check::Commutator,
        Check::Contact,
        Check::Symmetry,
        Check::Determining,
        Check::Uniform,
    ];
    pub const DEFAULT: [Check; 4] = [
        Check::Commutator,
        Check::Contact,
        Check::Symmetry,
        Check::Determining,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Commutator => "commutator",
            Check::Contact => "contact",
            Check::Symmetry => "symmetry",
            Check::Determining => "determining",
            Check::Uniform => "uniform",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| format!("unknown check `{s}` (expected one of commutator, contact, symmetry, determining, uniform)"))
    }
}

/// One residual check on a map.
pub fn run_map_check(
    entry: &CatalogEntry,
    m: &CatalogMap,
    check: Check,
    opts: &CheckOptions,
) -> Result<Option<VerificationReport>, JetError> {
    let map = &m.map;
    Ok(match (check, &entry.equation) {
        (Check::Commutator, _) => None,
        (Check::Contact, Equation::Ode(_)) => Some(contact_residual(map, opts)),
        (Check::Contact, Equation::Pde(_)) => Some(pde_contact_residual(map, opts)),
        (Check::Symmetry, Equation::Ode(ode)) => Some(symmetry_residual(ode, map, opts)),
        (Check::Symmetry, Equation::Pde(pde)) => Some(pde_symmetry_residual(pde, map, opts)),
        (Check::Determining, eq) => match &m.b {
            _ if entry.generators.is_empty() => None,
            None => None,
            Some(b) => Some(match eq {
                Equation::Ode(_) => determining_residual(&entry.generators, b, map, opts)?,
                Equation::Pde(_) => pde_determining_residual(&entry.generators, b, map, opts)?,
            }),
        },
        (Check::Uniform, Equation::Ode(_)) => {
            let v = is_uniform(map, opts);
            Some(VerificationReport {
                passed: v.uniform,
                ..v.report
            })
        }
        (Check::Uniform, Equation::Pde(_)) => None,
    })
}

/// Every requested check on every map at every sweep assignment. `maps`
/// replaces the entry's own maps when given.
pub fn verify_entry(
    entry: &CatalogEntry,
    maps: Option<&[CatalogMap]>,
    checks: &[Check],
    opts: &CheckOptions,
) -> Result<Vec<VerificationReport>, JetError> {
    let mut out = Vec::new();
    if checks.contains(&Check::Commutator) && !entry.generators.is_empty() {
        let mut r = entry.commutator_report(opts)?;
        r.label = format!("{}/algebra", entry.name);
        out.push(r);
    }
    let instances: Vec<Vec<CatalogMap>> = match maps {
        Some(m) => vec![m.to_vec()],
        None => entry
            .sweep
            .iter()
            .map(|values| entry.maps_at(values))
            .collect(),
    };
    for maps in &instances {
        for m in maps {
            for &check in checks {
                if let Some(mut r) = run_map_check(entry, m, check, opts)? {
                    r.label = format!("{}/{}", entry.name, m.map.label);
                    out.push(r);
                }
            }
        }
    }
    Ok(out)
}

/// The identity map of the entry's jet space, with `B = I`.
pub fn identity_map(entry: &CatalogEntry) -> CatalogMap {
    let n = entry.algebra.dim();
    let b = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    CatalogMap {
        map: ContactMap::identity(entry.equation.kind()),
        b: Some(b),
        ordering: None,
    }
}

/// Closure of the entry's maps at the first sweep assignment.
pub fn group_of(
    entry: &CatalogEntry,
    max_size: usize,
    seed: u64,
) -> Result<CayleyTable, GroupError> {
    let maps: Vec<ContactMap> = entry.group_maps().into_iter().map(|m| m.map).collect();
    group_of_maps(&maps, max_size, seed)
}

pub fn group_of_maps(
    maps: &[ContactMap],
    max_size: usize,
    seed: u64,
) -> Result<CayleyTable, GroupError> {
    let kind = maps.first().ok_or(GroupError::Empty)?.kind;
    let set = SampleSet::new(kind, seed, DEFAULT_SAMPLE_POINTS, maps)?;
    let gens = maps
        .iter()
        .map(|m| set.element(m))
        .collect::<Result<Vec<_>, _>>()?;
    closure_and_table(&set, &gens, max_size)
}

/// Outcome of a closure against the catalog expectation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupOutcome {
    pub entry: String,
    pub fingerprint: Option<Fingerprint>,
    pub name: Option<String>,
    pub latin_square: bool,
    /// Orbit size reached when closure was abandoned.
    pub unbounded_at: Option<usize>,
    pub matches_expected: Option<bool>,
}

pub fn group_outcome(
    entry: &CatalogEntry,
    max_size: usize,
    seed: u64,
) -> Result<(GroupOutcome, Option<CayleyTable>), GroupError> {
    match group_of(entry, max_size, seed) {
        Ok(table) => {
            let f = table.fingerprint();
            let matches = entry
                .expected
                .fingerprint
                .as_ref()
                .map(|e| e == &f)
                .or(entry.expected.unbounded.then_some(false));
            let outcome = GroupOutcome {
                entry: entry.name.clone(),
                name: f.name().map(String::from),
                fingerprint: Some(f),
                latin_square: table.is_latin_square(),
                unbounded_at: None,
                matches_expected: matches,
            };
            Ok((outcome, Some(table)))
        }
        Err(GroupError::Unbounded { orbit_size, .. }) => {
            let matches = if entry.expected.unbounded {
                Some(true)
            } else {
                entry.expected.fingerprint.as_ref().map(|_| false)
            };
            let outcome = GroupOutcome {
                entry: entry.name.clone(),
                fingerprint: None,
                name: None,
                latin_square: false,
                unbounded_at: Some(orbit_size),
                matches_expected: matches,
            };
            Ok((outcome, None))
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone)]
pub enum AutoError {
    Solve(SolveError),
    Strategy(StrategyError),
}

impl fmt::Display for AutoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AutoError::Solve(e) => write!(f, "solver: {e}"),
            AutoError::Strategy(e) => write!(f, "canonicalization: {e}"),
        }
    }
}

/// Raw families, and canonical ones when a strategy is given.
pub fn auto_families(
    sc: &StructureConstants,
    strategy: Option<&Strategy>,
) -> Result<(Vec<BMatrixFamily>, Option<Vec<BMatrixFamily>>), AutoError> {
    let raw = solve_families(sc).map_err(AutoError::Solve)?;
    let canonical = match strategy {
        None => None,
        Some(s) => Some(canonicalize(sc, &raw, s).map_err(AutoError::Strategy)?),
    };
    Ok((raw, canonical))
}

/// The bundled strategy for the algebra, or the greedy one.
pub fn default_strategy(sc: &StructureConstants) -> Strategy {
    strategy_for_algebra(sc).unwrap_or_else(crate::auto::greedy_strategy)
}

/// Whether the canonical families are exactly the expected entry strings,
/// in any order.
pub fn canonical_matches(found: &[BMatrixFamily], expected: &[Vec<Vec<String>>]) -> bool {
    found.len() == expected.len() && found.iter().all(|f| expected.contains(&f.entry_strings()))
}
