//! Case-splitting solver for the automorphism constraints.
//!
//! Each branch keeps the current value of every unknown `b_il` as a
//! polynomial in the still-free unknowns. The branch repeatedly picks the
//! equation with the fewest unknowns and either splits on a monomial factor
//! (`v = 0` versus `v ≠ 0`), eliminates an unknown that appears linearly with
//! a constant coefficient, or solves a univariate quadratic. Branches whose
//! determinant vanishes identically are dropped.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::constraints::{entry_name, ConstraintSystem};
use super::family::{BMatrixFamily, ParamDecl, ParamDomain};
use crate::lie::StructureConstants;
use crate::poly::{Monomial, Poly, Var};
use crate::rational::{self, rat, ratio, rational_sqrt, Rational};

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Maximum number of branch nodes explored.
    pub node_budget: usize,
    /// Seed for the random determinant probes.
    pub seed: u64,
    /// Largest supported algebra dimension.
    pub max_dim: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            node_budget: 20_000,
            seed: 42,
            max_dim: 8,
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum SolveError {
    #[error("algebra dimension {dim} exceeds the solver bound {max}")]
    TooLarge { dim: usize, max: usize },
    #[error("node budget exhausted with {} unresolved branch(es)", unresolved.len())]
    Budget {
        partial: Vec<BMatrixFamily>,
        unresolved: Vec<String>,
    },
    #[error("{} branch(es) could not be reduced further", unresolved.len())]
    Unresolved {
        partial: Vec<BMatrixFamily>,
        unresolved: Vec<String>,
    },
}

type Tag = (usize, usize, usize);

#[derive(Debug, Clone)]
struct Branch {
    /// Current value of each variable; free variables map to themselves.
    values: Vec<Poly>,
    dim: usize,
    nonzero: BTreeSet<Var>,
    signs: Vec<(Var, String)>,
    eqs: Vec<(Tag, Poly)>,
}

enum Step {
    Split(Vec<Branch>),
    Stuck,
}

pub fn solve_families(sc: &StructureConstants) -> Result<Vec<BMatrixFamily>, SolveError> {
    solve_families_with(sc, &SolveOptions::default())
}

pub fn solve_families_with(
    sc: &StructureConstants,
    opts: &SolveOptions,
) -> Result<Vec<BMatrixFamily>, SolveError> {
    let n = sc.dim();
    if n > opts.max_dim {
        return Err(SolveError::TooLarge {
            dim: n,
            max: opts.max_dim,
        });
    }
    let sys = ConstraintSystem::generate(sc);
    let vars = (n * n) as Var;
    let root = Branch {
        values: (0..vars).map(Poly::var).collect(),
        dim: n,
        nonzero: BTreeSet::new(),
        signs: Vec::new(),
        eqs: sys
            .equations
            .iter()
            .map(|e| (e.source, e.poly.clone()))
            .collect(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut stack = vec![root];
    let mut families = Vec::new();
    let mut stuck = Vec::new();
    let mut nodes = 0usize;
    while let Some(mut branch) = stack.pop() {
        nodes += 1;
        if nodes > opts.node_budget {
            stack.push(branch);
            let unresolved = stack.iter().map(|b| describe(b, n)).collect();
            return Err(SolveError::Budget {
                partial: finish(families),
                unresolved,
            });
        }
        if !branch.simplify() || branch.singular(n, &mut rng) {
            continue;
        }
        if branch.eqs.is_empty() {
            families.push(branch.into_family(n));
            continue;
        }
        match branch.step() {
            // children are pushed in reverse so the first is explored first
            Step::Split(children) => stack.extend(children.into_iter().rev()),
            Step::Stuck => stuck.push(describe(&branch, n)),
        }
    }
    let families = finish(families);
    if stuck.is_empty() {
        Ok(families)
    } else {
        Err(SolveError::Unresolved {
            partial: families,
            unresolved: stuck,
        })
    }
}

fn finish(mut families: Vec<BMatrixFamily>) -> Vec<BMatrixFamily> {
    let key = |f: &BMatrixFamily| (f.support(), f.entry_strings(), format!("{:?}", f.params()));
    families.sort_by_key(key);
    families.dedup_by(|a, b| key(a) == key(b));
    families
}

fn describe(b: &Branch, n: usize) -> String {
    let name = |v: Var| var_name(n, &b.signs, v);
    let eqs: Vec<String> = b
        .eqs
        .iter()
        .map(|(_, p)| format!("{} = 0", p.display_with(&name)))
        .collect();
    eqs.join("; ")
}

fn var_name(n: usize, signs: &[(Var, String)], v: Var) -> String {
    if (v as usize) < n * n {
        entry_name(n, v)
    } else {
        signs
            .iter()
            .find(|(s, _)| *s == v)
            .map(|(_, name)| name.clone())
            .unwrap_or_else(|| format!("s{v}"))
    }
}

impl Branch {
    fn assign(&mut self, v: Var, value: Poly) {
        for p in self.values.iter_mut() {
            *p = p.substitute(v, &value);
        }
        for (_, e) in self.eqs.iter_mut() {
            *e = e.substitute(v, &value);
        }
        self.nonzero.remove(&v);
    }

    fn fresh_var(&self) -> Var {
        self.values.len() as Var + self.signs.len() as Var
    }

    /// Normalizes the equations; false if the branch is contradictory.
    fn simplify(&mut self) -> bool {
        let mut out: Vec<(Tag, Poly)> = Vec::new();
        for (tag, p) in std::mem::take(&mut self.eqs) {
            let removable = p
                .monomial_content()
                .factors()
                .iter()
                .filter(|(v, _)| self.nonzero.contains(v))
                .fold(Monomial::one(), |acc, &(v, e)| {
                    acc.mul(&Monomial::var(v).pow(e))
                });
            let p = p
                .div_monomial(&removable)
                .expect("content divides every term")
                .normalized();
            if p.is_zero() {
                continue;
            }
            if p.as_constant().is_some() {
                return false;
            }
            if !out.iter().any(|(_, q)| *q == p) {
                out.push((tag, p));
            }
        }
        self.eqs = out;
        true
    }

    fn singular(&self, n: usize, rng: &mut ChaCha8Rng) -> bool {
        use rand::Rng;
        let nvars = self.fresh_var() as usize;
        for _ in 0..3 {
            let point: Vec<Rational> = (0..nvars)
                .map(|v| {
                    let v = v as Var;
                    if self.signs.iter().any(|(s, _)| *s == v) {
                        rat(if rng.gen::<bool>() { 1 } else { -1 })
                    } else {
                        loop {
                            let r = ratio(rng.gen_range(-50..=50), rng.gen_range(1..=7));
                            if !r.is_zero() || !self.nonzero.contains(&v) {
                                break r;
                            }
                        }
                    }
                })
                .collect();
            let m: Vec<Vec<Rational>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|l| self.values[i * n + l].eval(&|v| point[v as usize].clone()))
                        .collect()
                })
                .collect();
            if !rational::determinant(&m).is_zero() {
                return false;
            }
        }
        true
    }

    fn step(&mut self) -> Step {
        let mut order: Vec<usize> = (0..self.eqs.len()).collect();
        order.sort_by_key(|&k| (self.eqs[k].1.vars().len(), self.eqs[k].0));
        for k in order {
            if let Some(children) = self.try_equation(k) {
                return Step::Split(children);
            }
        }
        Step::Stuck
    }

    fn try_equation(&self, k: usize) -> Option<Vec<Branch>> {
        let p = &self.eqs[k].1;

        // v·q = 0 with v of unknown sign status
        if let Some(&(v, _)) = p.monomial_content().factors().first() {
            let mut zero = self.clone();
            zero.assign(v, Poly::zero());
            let mut nonzero = self.clone();
            nonzero.nonzero.insert(v);
            return Some(vec![zero, nonzero]);
        }

        // a·v + r = 0 with constant a: eliminate the lowest such v, keeping
        // variables already known to be nonzero as parameters when possible
        let mut candidates: Vec<Var> = p.vars().into_iter().collect();
        candidates.sort_by_key(|v| (self.nonzero.contains(v), *v));
        for v in candidates {
            if let Some((a, r)) = p.linear_split(v) {
                if let Some(a) = a.as_constant() {
                    let mut child = self.clone();
                    child.assign(v, r.scale(&(-a.recip())));
                    return Some(vec![child]);
                }
            }
        }

        // univariate quadratic
        let vars = p.vars();
        if vars.len() == 1 {
            let v = *vars.iter().next().unwrap();
            let coeffs: Option<Vec<Rational>> =
                p.coefficients_in(v).iter().map(Poly::as_constant).collect();
            if let Some(c) = coeffs.filter(|c| c.len() == 3) {
                return self.solve_quadratic(v, &c[0], &c[1], &c[2]);
            }
        }
        None
    }

    fn solve_quadratic(
        &self,
        v: Var,
        c0: &Rational,
        c1: &Rational,
        c2: &Rational,
    ) -> Option<Vec<Branch>> {
        let disc = c1 * c1 - rat(4) * c0 * c2;
        if disc.is_negative() {
            return Some(Vec::new());
        }
        let two_a = rat(2) * c2;
        if c1.is_zero() {
            let square = -c0 / c2;
            let root = rational_sqrt(&square)?;
            if root.is_zero() {
                let mut child = self.clone();
                child.assign(v, Poly::zero());
                return Some(vec![child]);
            }
            // v = root·s with a fresh sign parameter s
            let mut child = self.clone();
            let s = child.fresh_var();
            let name = format!("s{}", entry_name(self.dim, v).trim_start_matches('b'));
            child.signs.push((s, name));
            child.nonzero.insert(s);
            child.assign(v, Poly::var(s).scale(&root));
            return Some(vec![child]);
        }
        let sq = rational_sqrt(&disc)?;
        let mut roots = vec![(-c1 + &sq) / &two_a];
        if !sq.is_zero() {
            roots.push((-c1 - &sq) / &two_a);
        }
        Some(
            roots
                .into_iter()
                .map(|r| {
                    let mut child = self.clone();
                    child.assign(v, Poly::constant(r));
                    child
                })
                .collect(),
        )
    }

    fn into_family(self, n: usize) -> BMatrixFamily {
        let nvars = self.fresh_var() as usize;
        let entries: Vec<Vec<Poly>> = (0..n)
            .map(|i| (0..n).map(|l| self.values[i * n + l].clone()).collect())
            .collect();
        // a factor of the determinant that is a bare parameter must be nonzero
        let forced = crate::poly::determinant(&entries).monomial_content();
        let params: Vec<ParamDecl> = (0..nvars)
            .map(|v| {
                let v = v as Var;
                let domain = if self.signs.iter().any(|(s, _)| *s == v) {
                    ParamDomain::Sign
                } else if self.nonzero.contains(&v) || forced.exponent(v) > 0 {
                    ParamDomain::Nonzero
                } else {
                    ParamDomain::Real
                };
                ParamDecl {
                    name: var_name(n, &self.signs, v),
                    domain,
                }
            })
            .collect();
        BMatrixFamily::new(entries, params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::StructureConstants;

    fn a1() -> StructureConstants {
        StructureConstants::from_brackets(2, [(1, 2, vec![(1, rat(1))])]).unwrap()
    }

    #[test]
    fn a1_has_single_raw_family() {
        let fams = solve_families(&a1()).unwrap();
        assert_eq!(fams.len(), 1);
        assert_eq!(
            fams[0].to_string(),
            "[ b11  0 ]\n[ b21  1 ]\nb11 nonzero\nb21 real\n"
        );
    }

    #[test]
    fn abelian_family_is_fully_free() {
        let fams = solve_families(&StructureConstants::abelian(2).unwrap()).unwrap();
        assert_eq!(fams.len(), 1);
        assert_eq!(fams[0].params().len(), 4);
        assert!(fams[0]
            .params()
            .iter()
            .all(|p| p.domain == ParamDomain::Real));
    }

    #[test]
    fn dimension_bound_is_enforced() {
        let sc = StructureConstants::abelian(9).unwrap();
        assert!(matches!(
            solve_families(&sc),
            Err(SolveError::TooLarge { dim: 9, max: 8 })
        ));
    }

    #[test]
    fn tiny_budget_reports_partial_result() {
        let opts = SolveOptions {
            node_budget: 2,
            ..SolveOptions::default()
        };
        match solve_families_with(&a1(), &opts) {
            Err(SolveError::Budget { unresolved, .. }) => assert!(!unresolved.is_empty()),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn square_condition_introduces_sign() {
        // one-dimensional toy: b11^2 - 1 = 0 solved directly
        let branch = Branch {
            values: vec![Poly::var(0)],
            dim: 1,
            nonzero: BTreeSet::new(),
            signs: Vec::new(),
            eqs: vec![((1, 1, 1), &Poly::var(0).pow(2) - &Poly::constant(rat(1)))],
        };
        let Step::Split(children) = branch.clone().step() else {
            panic!("quadratic not handled")
        };
        assert_eq!(children.len(), 1);
        let fam = children[0].clone().into_family(1);
        assert_eq!(fam.params()[0].domain, ParamDomain::Sign);
        assert_eq!(fam.entry_strings()[0][0], "s11");
    }
}
