use std::fmt;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::InputError;
use crate::lie::StructureConstants;
use crate::poly::{Poly, Var};
use crate::rational::{Rational, RationalMatrix};

/// One equation `Σ c_lmn b_il b_jm − Σ c_ijk b_kn = 0`, tagged by `(i, j, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub source: (usize, usize, usize),
    pub poly: Poly,
}

/// The structure-preservation equations on the entries of `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub dim: usize,
    pub equations: Vec<Constraint>,
}

/// Unknown `b_il` (1-based) as a polynomial variable.
pub fn entry_var(dim: usize, i: usize, l: usize) -> Var {
    ((i - 1) * dim + (l - 1)) as Var
}

pub fn entry_name(dim: usize, v: Var) -> String {
    let v = v as usize;
    let (i, l) = (v / dim + 1, v % dim + 1);
    if dim < 10 {
        format!("b{i}{l}")
    } else {
        format!("b{i}_{l}")
    }
}

impl ConstraintSystem {
    pub fn generate(sc: &StructureConstants) -> Self {
        let n = sc.dim();
        let b = |i: usize, l: usize| Poly::var(entry_var(n, i, l));
        let mut equations = Vec::new();
        for i in 1..=n {
            for j in i + 1..=n {
                for target in 1..=n {
                    let mut poly = Poly::zero();
                    for (&(l, m, k), c) in sc.nonzero() {
                        if k == target {
                            poly = &poly + &(&b(i, l) * &b(j, m)).scale(c);
                        }
                    }
                    for k in 1..=n {
                        let c = sc.get(i, j, k);
                        if !c.is_zero() {
                            poly = &poly - &b(k, target).scale(&c);
                        }
                    }
                    if !poly.is_zero() {
                        equations.push(Constraint {
                            source: (i, j, target),
                            poly,
                        });
                    }
                }
            }
        }
        ConstraintSystem { dim: n, equations }
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    fn check_dims(&self, rows: usize, cols: impl Iterator<Item = usize>) -> Result<(), InputError> {
        if rows != self.dim {
            return Err(InputError::DimensionMismatch {
                expected: self.dim,
                got: rows,
            });
        }
        for c in cols {
            if c != self.dim {
                return Err(InputError::DimensionMismatch {
                    expected: self.dim,
                    got: c,
                });
            }
        }
        Ok(())
    }

    /// Largest absolute residual over all equations.
    pub fn residual(&self, b: &[Vec<f64>]) -> Result<f64, InputError> {
        self.check_dims(b.len(), b.iter().map(Vec::len))?;
        let n = self.dim;
        let value = |v: Var| b[v as usize / n][v as usize % n];
        Ok(self
            .equations
            .iter()
            .map(|e| e.poly.eval_f64(&value).abs())
            .fold(0.0, f64::max))
    }

    /// Exact residual for a rational matrix.
    pub fn residual_exact(&self, b: &RationalMatrix) -> Result<Rational, InputError> {
        self.check_dims(b.len(), b.iter().map(Vec::len))?;
        let n = self.dim;
        let value = |v: Var| b[v as usize / n][v as usize % n].clone();
        Ok(self
            .equations
            .iter()
            .map(|e| e.poly.eval(&value).abs())
            .fold(Rational::zero(), |a, r| a.max(r)))
    }

    pub fn to_report(&self) -> Vec<ConstraintLine> {
        self.equations
            .iter()
            .map(|e| ConstraintLine {
                source: [e.source.0, e.source.1, e.source.2],
                equation: format!("{} = 0", e.poly.display_with(&|v| entry_name(self.dim, v))),
            })
            .collect()
    }
}

/// Serialized form of one constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintLine {
    pub source: [usize; 3],
    pub equation: String,
}

impl fmt::Display for ConstraintSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in self.to_report() {
            let [i, j, n] = line.source;
            writeln!(f, "({i},{j},{n}): {}", line.equation)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn a1() -> StructureConstants {
        StructureConstants::from_brackets(2, [(1, 2, vec![(1, rat(1))])]).unwrap()
    }

    #[test]
    fn a1_constraints_match_hand_expansion() {
        let sys = ConstraintSystem::generate(&a1());
        let text = sys.to_string();
        assert_eq!(
            text,
            "(1,2,1): b11*b22 - b12*b21 - b11 = 0\n(1,2,2): -b12 = 0\n"
        );
    }

    #[test]
    fn abelian_has_no_constraints() {
        assert!(ConstraintSystem::generate(&StructureConstants::abelian(3).unwrap()).is_empty());
    }

    #[test]
    fn residual_examples() {
        let sys = ConstraintSystem::generate(&a1());
        assert_eq!(
            sys.residual(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
            0.0
        );
        assert_eq!(
            sys.residual(&[vec![-1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
            0.0
        );
        assert_eq!(
            sys.residual(&[vec![2.0, 0.0], vec![0.0, 2.0]]).unwrap(),
            2.0
        );
        assert_eq!(
            sys.residual(&[vec![1.0, 0.0, 0.0]]),
            Err(InputError::DimensionMismatch {
                expected: 2,
                got: 1
            })
        );
        let exact = vec![vec![rat(2), rat(0)], vec![rat(0), rat(2)]];
        assert_eq!(sys.residual_exact(&exact).unwrap(), rat(2));
    }
}
