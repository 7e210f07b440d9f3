//! Finite-dimensional Lie algebras given by exact structure constants.
//!
//! Indices are 1-based throughout, so `c(i, j, k)` is the coefficient of
//! `X_k` in `[X_i, X_j]`. The adjoint matrix of `X_j` has row `i` equal to the
//! coefficients of `[X_j, X_i]`, and the one-parameter inner automorphism
//! `A(j, ε)` is `exp(-ε · ad(X_j))` in that row layout: row `i` of `A(j, ε)`
//! holds the coefficients of `Ad(exp(ε X_j)) X_i`.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::InputError;
use crate::rational::{self, format_rational, parse_rational, Rational, RationalMatrix};

/// Structure constants `c_ijk` of a Lie algebra, stored sparsely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureConstants {
    dim: usize,
    entries: BTreeMap<(usize, usize, usize), Rational>,
}

/// A failed identity found by [`StructureConstants::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `c_ijk + c_jik != 0`.
    Antisymmetry { i: usize, j: usize, k: usize },
    /// The Jacobi sum for `(i, j, k)` has a nonzero `X_l` component.
    Jacobi {
        i: usize,
        j: usize,
        k: usize,
        l: usize,
        value: Rational,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Antisymmetry { i, j, k } => write!(f, "antisymmetry fails at ({i},{j},{k})"),
            Violation::Jacobi { i, j, k, l, value } => {
                write!(
                    f,
                    "Jacobi identity fails at ({i},{j},{k}) component {l}: {}",
                    format_rational(value)
                )
            }
        }
    }
}

impl StructureConstants {
    /// The abelian algebra of dimension `dim`.
    pub fn abelian(dim: usize) -> Result<Self, InputError> {
        if dim == 0 {
            return Err(InputError::Invalid(
                "algebra dimension must be at least 1".into(),
            ));
        }
        Ok(Self {
            dim,
            entries: BTreeMap::new(),
        })
    }

    /// Builds the algebra from brackets `[X_i, X_j] = Σ coeff_k X_k`.
    /// The antisymmetric partner `[X_j, X_i]` is implied.
    pub fn from_brackets<I, C>(dim: usize, brackets: I) -> Result<Self, InputError>
    where
        I: IntoIterator<Item = (usize, usize, C)>,
        C: IntoIterator<Item = (usize, Rational)>,
    {
        let mut sc = Self::abelian(dim)?;
        let mut seen = BTreeSet::new();
        for (i, j, coeffs) in brackets {
            sc.check_index(i)?;
            sc.check_index(j)?;
            let key = (i.min(j), i.max(j));
            if !seen.insert(key) {
                return Err(InputError::Invalid(format!(
                    "bracket [X{i},X{j}] given twice"
                )));
            }
            for (k, c) in coeffs {
                sc.check_index(k)?;
                if c.is_zero() {
                    continue;
                }
                if i == j {
                    return Err(InputError::Invalid(format!("[X{i},X{i}] must vanish")));
                }
                sc.entries.insert((i, j, k), c.clone());
                sc.entries.insert((j, i, k), -c);
            }
        }
        Ok(sc)
    }

    /// Stores the given triples verbatim, without implying partners.
    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self, InputError>
    where
        I: IntoIterator<Item = ((usize, usize, usize), Rational)>,
    {
        let mut sc = Self::abelian(dim)?;
        for ((i, j, k), c) in entries {
            for idx in [i, j, k] {
                sc.check_index(idx)?;
            }
            if !c.is_zero() {
                sc.entries.insert((i, j, k), c);
            }
        }
        Ok(sc)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Rational {
        self.entries
            .get(&(i, j, k))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Nonzero entries as `((i, j, k), c_ijk)`.
    pub fn nonzero(&self) -> impl Iterator<Item = (&(usize, usize, usize), &Rational)> {
        self.entries.iter()
    }

    pub fn is_abelian(&self) -> bool {
        self.entries.is_empty()
    }

    /// Direct sum; the basis of `other` is appended after this one.
    pub fn direct_sum(&self, other: &StructureConstants) -> StructureConstants {
        let shift = self.dim;
        let mut entries = self.entries.clone();
        for (&(i, j, k), c) in &other.entries {
            entries.insert((i + shift, j + shift, k + shift), c.clone());
        }
        StructureConstants {
            dim: self.dim + other.dim,
            entries,
        }
    }

    fn check_index(&self, index: usize) -> Result<(), InputError> {
        if index == 0 || index > self.dim {
            Err(InputError::IndexOutOfRange {
                index,
                dim: self.dim,
            })
        } else {
            Ok(())
        }
    }

    /// Lists every violated antisymmetry or Jacobi identity; empty iff valid.
    pub fn validate(&self) -> Vec<Violation> {
        let n = self.dim;
        let mut out = Vec::new();
        for i in 1..=n {
            for j in 1..=n {
                for k in 1..=n {
                    if !(self.get(i, j, k) + self.get(j, i, k)).is_zero() && i <= j {
                        out.push(Violation::Antisymmetry { i, j, k });
                    }
                }
            }
        }
        for i in 1..=n {
            for j in 1..=n {
                for k in 1..=n {
                    for l in 1..=n {
                        let mut sum = Rational::zero();
                        for m in 1..=n {
                            sum += self.get(i, j, m) * self.get(m, k, l);
                            sum += self.get(j, k, m) * self.get(m, i, l);
                            sum += self.get(k, i, m) * self.get(m, j, l);
                        }
                        if !sum.is_zero() {
                            out.push(Violation::Jacobi {
                                i,
                                j,
                                k,
                                l,
                                value: sum,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Matrix of `X_i ↦ [X_j, X_i]`: entry `(i, k)` is `c_jik` (0-based storage).
    pub fn ad_matrix(&self, j: usize) -> Result<RationalMatrix, InputError> {
        self.check_index(j)?;
        let n = self.dim;
        let mut m = rational::zeros(n);
        for (&(a, i, k), c) in &self.entries {
            if a == j {
                m[i - 1][k - 1] = c.clone();
            }
        }
        Ok(m)
    }

    /// Coefficient matrices `C_0 .. C_{m-1}` of the terminating series
    /// `A(j, ε) = Σ ε^k C_k`, present iff `ad(X_j)` is nilpotent.
    pub fn adjoint_series(&self, j: usize) -> Result<Option<Vec<RationalMatrix>>, InputError> {
        let ad = self.ad_matrix(j)?;
        let neg: RationalMatrix = ad.iter().map(|r| r.iter().map(|c| -c).collect()).collect();
        let n = self.dim;
        let mut terms = vec![rational::identity(n)];
        let mut power = rational::identity(n);
        let mut factorial = Rational::one();
        for k in 1..=n {
            power = rational::mat_mul(&power, &neg);
            if rational::is_zero_matrix(&power) {
                return Ok(Some(terms));
            }
            factorial *= rational::rat(k as i64);
            terms.push(
                power
                    .iter()
                    .map(|r| r.iter().map(|c| c / &factorial).collect())
                    .collect(),
            );
        }
        Ok(None)
    }

    /// The inner-automorphism matrix `A(j, ε)`.
    pub fn adjoint_exp(&self, j: usize, epsilon: f64) -> Result<AdjointActionMatrix, InputError> {
        if !epsilon.is_finite() {
            return Err(InputError::NonFinite(epsilon));
        }
        let series = self.adjoint_series(j)?;
        let matrix = match &series {
            Some(terms) => evaluate_series(terms, epsilon),
            None => numeric_adjoint_exp(&self.ad_matrix(j)?, epsilon),
        };
        Ok(AdjointActionMatrix {
            generator: j,
            epsilon,
            matrix,
            series,
        })
    }

    /// `A(j, ε)` through the numeric matrix exponential, even when the exact
    /// series terminates.
    pub fn adjoint_exp_numeric(&self, j: usize, epsilon: f64) -> Result<Vec<Vec<f64>>, InputError> {
        if !epsilon.is_finite() {
            return Err(InputError::NonFinite(epsilon));
        }
        Ok(numeric_adjoint_exp(&self.ad_matrix(j)?, epsilon))
    }

    pub fn from_json(text: &str) -> Result<Self, InputError> {
        let file: AlgebraFile = serde_json::from_str(text)
            .map_err(|e| InputError::Invalid(format!("algebra file: {e}")))?;
        file.to_structure_constants()
    }

    pub fn to_file(&self) -> AlgebraFile {
        let mut brackets = Vec::new();
        for i in 1..=self.dim {
            for j in i + 1..=self.dim {
                let coeffs: BTreeMap<String, String> = (1..=self.dim)
                    .filter_map(|k| {
                        let c = self.get(i, j, k);
                        (!c.is_zero()).then(|| (k.to_string(), format_rational(&c)))
                    })
                    .collect();
                if !coeffs.is_empty() {
                    brackets.push(BracketEntry { i, j, coeffs });
                }
            }
        }
        AlgebraFile {
            dim: self.dim,
            brackets,
        }
    }
}

fn evaluate_series(terms: &[RationalMatrix], epsilon: f64) -> Vec<Vec<f64>> {
    let n = terms[0].len();
    let mut out = vec![vec![0.0; n]; n];
    let mut power = 1.0;
    for term in terms {
        for (row, trow) in out.iter_mut().zip(term) {
            for (v, c) in row.iter_mut().zip(trow) {
                *v += power * rational::to_f64(c);
            }
        }
        power *= epsilon;
    }
    out
}

fn numeric_adjoint_exp(ad: &RationalMatrix, epsilon: f64) -> Vec<Vec<f64>> {
    let n = ad.len();
    let m = DMatrix::from_fn(n, n, |i, k| -epsilon * rational::to_f64(&ad[i][k]));
    let e = m.exp();
    (0..n)
        .map(|i| (0..n).map(|k| e[(i, k)]).collect())
        .collect()
}

/// `A(j, ε)` together with its exact series when available.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointActionMatrix {
    pub generator: usize,
    pub epsilon: f64,
    pub matrix: Vec<Vec<f64>>,
    series: Option<Vec<RationalMatrix>>,
}

impl AdjointActionMatrix {
    /// Whether the exact terminating series was used.
    pub fn is_exact(&self) -> bool {
        self.series.is_some()
    }

    pub fn series(&self) -> Option<&[RationalMatrix]> {
        self.series.as_deref()
    }

    /// Exact `A(j, ε)` at a rational `ε`, available in the nilpotent case.
    pub fn exact_at(&self, epsilon: &Rational) -> Option<RationalMatrix> {
        let terms = self.series.as_ref()?;
        let n = terms[0].len();
        let mut out = rational::zeros(n);
        let mut power = Rational::one();
        for term in terms {
            for (row, trow) in out.iter_mut().zip(term) {
                for (v, c) in row.iter_mut().zip(trow) {
                    *v += &power * c;
                }
            }
            power *= epsilon;
        }
        Some(out)
    }
}

/// Replaces `B` by `A·B`, the representative of `B` under the inner
/// automorphism `A`.
pub fn apply_reduction(
    b: &[Vec<f64>],
    a: &AdjointActionMatrix,
) -> Result<Vec<Vec<f64>>, InputError> {
    let n = a.matrix.len();
    if b.len() != n || b.iter().any(|r| r.len() != n) {
        return Err(InputError::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    if is_singular(b) {
        return Err(InputError::SingularMatrix);
    }
    Ok(mat_mul(&a.matrix, b))
}

pub fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..m)
                .map(|j| row.iter().zip(b).map(|(x, brow)| x * brow[j]).sum())
                .collect()
        })
        .collect()
}

pub fn det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    DMatrix::from_fn(n, n, |i, j| a[i][j]).determinant()
}

/// Numerically singular relative to the row scale.
pub fn is_singular(a: &[Vec<f64>]) -> bool {
    let scale: f64 = a
        .iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
        .product();
    if scale == 0.0 {
        return true;
    }
    det(a).abs() <= 1e-12 * scale
}

/// On-disk algebra definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    pub dim: usize,
    #[serde(default)]
    pub brackets: Vec<BracketEntry>,
}

/// One bracket `[X_i, X_j] = Σ_k coeffs[k] X_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub coeffs: BTreeMap<String, String>,
}

impl AlgebraFile {
    pub fn to_structure_constants(&self) -> Result<StructureConstants, InputError> {
        let mut brackets = Vec::new();
        for b in &self.brackets {
            let mut coeffs = Vec::new();
            for (k, c) in &b.coeffs {
                let k: usize = k
                    .trim()
                    .parse()
                    .map_err(|_| InputError::Invalid(format!("bad basis index `{k}`")))?;
                coeffs.push((k, parse_rational(c)?));
            }
            brackets.push((b.i, b.j, coeffs));
        }
        StructureConstants::from_brackets(self.dim, brackets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    fn a1() -> StructureConstants {
        StructureConstants::from_brackets(2, [(1, 2, vec![(1, rat(1))])]).unwrap()
    }

    #[test]
    fn a1_is_valid() {
        assert!(a1().validate().is_empty());
        assert_eq!(a1().get(2, 1, 1), rat(-1));
    }

    #[test]
    fn sign_flip_breaks_antisymmetry() {
        let sc = StructureConstants::from_entries(2, [((1, 2, 1), rat(1)), ((2, 1, 1), rat(1))])
            .unwrap();
        let v = sc.validate();
        assert!(v.contains(&Violation::Antisymmetry { i: 1, j: 2, k: 1 }));
    }

    #[test]
    fn cyclic_three_dim_algebra_is_valid() {
        let sc = StructureConstants::from_brackets(
            3,
            [
                (1, 2, vec![(3, rat(1))]),
                (2, 3, vec![(1, rat(1))]),
                (3, 1, vec![(2, rat(1))]),
            ],
        )
        .unwrap();
        assert!(sc.validate().is_empty());
    }

    #[test]
    fn broken_jacobi_is_reported() {
        // [X1,X2]=X3, [X1,X3]=X1: Jacobi sum over (1,2,3) leaves a nonzero X3 term
        let sc = StructureConstants::from_brackets(
            3,
            [(1, 2, vec![(3, rat(1))]), (1, 3, vec![(1, rat(1))])],
        )
        .unwrap();
        assert!(sc
            .validate()
            .iter()
            .any(|v| matches!(v, Violation::Jacobi { .. })));
    }

    #[test]
    fn out_of_range_index_is_input_error() {
        let err = StructureConstants::from_brackets(2, [(1, 3, vec![(1, rat(1))])]).unwrap_err();
        assert_eq!(err, InputError::IndexOutOfRange { index: 3, dim: 2 });
    }

    #[test]
    fn ad_matrices_of_a1() {
        let sc = a1();
        let ad1 = sc.ad_matrix(1).unwrap();
        assert_eq!(ad1, vec![vec![rat(0), rat(0)], vec![rat(1), rat(0)]]);
        assert!(rational::is_zero_matrix(&rational::mat_mul(&ad1, &ad1)));
        let ad2 = sc.ad_matrix(2).unwrap();
        assert_eq!(ad2, vec![vec![rat(-1), rat(0)], vec![rat(0), rat(0)]]);
    }

    #[test]
    fn abelian_ad_is_zero() {
        let sc = StructureConstants::abelian(3).unwrap();
        for j in 1..=3 {
            assert!(rational::is_zero_matrix(&sc.ad_matrix(j).unwrap()));
        }
    }

    #[test]
    fn adjoint_exp_reproduces_printed_a1_matrices() {
        let sc = a1();
        let eps = 0.7;
        let a_1 = sc.adjoint_exp(1, eps).unwrap();
        assert!(a_1.is_exact());
        assert_eq!(a_1.matrix, vec![vec![1.0, 0.0], vec![-eps, 1.0]]);
        let exact = a_1.exact_at(&ratio(3, 5)).unwrap();
        assert_eq!(
            exact,
            vec![vec![rat(1), rat(0)], vec![ratio(-3, 5), rat(1)]]
        );

        let a_2 = sc.adjoint_exp(2, eps).unwrap();
        assert!(!a_2.is_exact());
        assert!((a_2.matrix[0][0] - eps.exp()).abs() <= 1e-12 * eps.exp());
        assert!(a_2.matrix[0][1].abs() < 1e-15 && a_2.matrix[1][0].abs() < 1e-15);
        assert!((a_2.matrix[1][1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_parameter_is_identity() {
        let sc = a1();
        for j in 1..=2 {
            assert_eq!(
                sc.adjoint_exp(j, 0.0).unwrap().matrix,
                vec![vec![1.0, 0.0], vec![0.0, 1.0]]
            );
        }
    }

    #[test]
    fn non_finite_parameter_rejected() {
        assert_eq!(
            a1().adjoint_exp(1, f64::NAN).unwrap_err().to_string(),
            "parameter must be finite, got NaN"
        );
    }

    #[test]
    fn reduction_examples() {
        let sc = a1();
        let (b11, b21) = (-2.5, 4.0);
        let b = vec![vec![b11, 0.0], vec![b21, 1.0]];
        let r = apply_reduction(&b, &sc.adjoint_exp(1, b21 / b11).unwrap()).unwrap();
        assert_eq!(r, vec![vec![b11, 0.0], vec![0.0, 1.0]]);

        let b = vec![vec![-3.0, 0.0], vec![0.0, 1.0]];
        let r = apply_reduction(&b, &sc.adjoint_exp(2, -(3.0f64).ln()).unwrap()).unwrap();
        assert!((r[0][0] + 1.0).abs() < 1e-14 && (r[1][1] - 1.0).abs() < 1e-15);

        let r = apply_reduction(&b, &sc.adjoint_exp(2, 0.0).unwrap()).unwrap();
        assert_eq!(r, b);

        let singular = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert_eq!(
            apply_reduction(&singular, &sc.adjoint_exp(1, 1.0).unwrap()),
            Err(InputError::SingularMatrix)
        );
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"dim": 2, "brackets": [{"i": 1, "j": 2, "coeffs": {"1": "1"}}]}"#;
        let sc = StructureConstants::from_json(text).unwrap();
        assert_eq!(sc, a1());
        let again = sc.to_file().to_structure_constants().unwrap();
        assert_eq!(again, sc);
    }
}
