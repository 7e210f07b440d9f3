//! Reduction of `B` families modulo inner automorphisms `B ↦ A(j, ε)·B`.
//!
//! A strategy lists, per support pattern of the raw family, the generators to
//! apply and how `ε` depends on the current entries. Two kinds of step exist:
//! a ratio `ε = ±b_num / b_den` for generators with nilpotent `ad`, and
//! `ε = κ·ln|b_e|` for generators with diagonal integer `ad`, which rescales
//! rows and replaces the nonzero parameter in `b_e` by a sign.
//! Free parameters that only get rescaled keep their names.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::family::{BMatrixFamily, ParamDecl, ParamDomain};
use crate::lie::StructureConstants;
use crate::poly::{Monomial, Poly, Var};
use crate::rational::{Rational, RationalMatrix};

/// How `ε` is computed from the current family entries (1-based indices).
#[derive(Debug, Clone, PartialEq)]
pub enum EpsFormula {
    /// `ε = ± b[num] / b[den]`.
    Ratio {
        num: (usize, usize),
        den: (usize, usize),
        negate: bool,
    },
    /// `ε = scale · ln|b[entry]|`; the parameter in the entry becomes a sign.
    LogAbs {
        entry: (usize, usize),
        scale: i64,
        sign_name: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionStep {
    pub generator: usize,
    pub epsilon: EpsFormula,
}

/// Steps for raw families with a given support pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyBranch {
    /// Rows of `*` (nonzero) and `.` (zero).
    pub pattern: Vec<String>,
    pub steps: Vec<ReductionStep>,
    /// Final parameter renames, `(from, to)`.
    pub renames: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    pub name: String,
    pub branches: Vec<StrategyBranch>,
    greedy: bool,
}

impl Strategy {
    pub fn new(name: impl Into<String>, branches: Vec<StrategyBranch>) -> Self {
        Strategy {
            name: name.into(),
            branches,
            greedy: false,
        }
    }

    pub fn is_greedy(&self) -> bool {
        self.greedy
    }
}

/// Best-effort reduction: zero entries with nilpotent generators, then
/// normalize nonzero pivots to signs with diagonal ones.
pub fn greedy_strategy() -> Strategy {
    Strategy {
        name: "greedy".into(),
        branches: Vec::new(),
        greedy: true,
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrategyError {
    #[error("strategy `{strategy}` has no branch for support pattern {support:?}")]
    NoBranch {
        strategy: String,
        support: Vec<String>,
    },
    #[error("step {step}: index out of range")]
    BadIndex { step: usize },
    #[error("step {step}: ε divides by b{}{}, which is identically zero", entry.0, entry.1)]
    ZeroDivisor { step: usize, entry: (usize, usize) },
    #[error("step {step}: ε divides by b{}{}, which is not known to be nonzero", entry.0, entry.1)]
    UncertainDivisor { step: usize, entry: (usize, usize) },
    #[error("step {step}: ad(X{generator}) is not nilpotent")]
    NotNilpotent { step: usize, generator: usize },
    #[error("step {step}: ad(X{generator}) is not diagonal with integer entries")]
    NotDiagonal { step: usize, generator: usize },
    #[error("step {step}: reduced entries are not polynomial in the parameters")]
    NotPolynomial { step: usize },
    #[error("step {step}: {detail}")]
    CannotAbsorb { step: usize, detail: String },
}

const SIGN_NAMES: [&str; 8] = [
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta",
];

/// Reduces every family with the given strategy. Results are deduplicated.
pub fn canonicalize(
    sc: &StructureConstants,
    families: &[BMatrixFamily],
    strategy: &Strategy,
) -> Result<Vec<BMatrixFamily>, StrategyError> {
    let mut out: Vec<BMatrixFamily> = Vec::new();
    for fam in families {
        let reduced = if strategy.greedy {
            greedy(sc, fam)
        } else {
            let support = fam.support();
            let branch = strategy
                .branches
                .iter()
                .find(|b| b.pattern == support)
                .ok_or_else(|| StrategyError::NoBranch {
                    strategy: strategy.name.clone(),
                    support: support.clone(),
                })?;
            apply_branch(sc, fam, branch)?
        };
        if !out.contains(&reduced) {
            out.push(reduced);
        }
    }
    Ok(out)
}

fn apply_branch(
    sc: &StructureConstants,
    fam: &BMatrixFamily,
    branch: &StrategyBranch,
) -> Result<BMatrixFamily, StrategyError> {
    let mut current = fam.clone();
    for (idx, step) in branch.steps.iter().enumerate() {
        current = apply_step(sc, &current, step, idx + 1)?;
    }
    for (from, to) in &branch.renames {
        current.rename_param(from, to);
    }
    Ok(current)
}

fn entry_at(
    fam: &BMatrixFamily,
    (r, c): (usize, usize),
    step: usize,
) -> Result<&Poly, StrategyError> {
    if r == 0 || c == 0 || r > fam.dim() || c > fam.dim() {
        return Err(StrategyError::BadIndex { step });
    }
    Ok(fam.entry(r - 1, c - 1))
}

/// Applies one reduction step to a family.
pub(crate) fn apply_step(
    sc: &StructureConstants,
    fam: &BMatrixFamily,
    step: &ReductionStep,
    index: usize,
) -> Result<BMatrixFamily, StrategyError> {
    let j = step.generator;
    if j == 0 || j > sc.dim() {
        return Err(StrategyError::BadIndex { step: index });
    }
    match &step.epsilon {
        EpsFormula::Ratio { num, den, negate } => {
            let mut numer = entry_at(fam, *num, index)?.clone();
            if *negate {
                numer = -&numer;
            }
            let denom = entry_at(fam, *den, index)?;
            if denom.is_zero() {
                return Err(StrategyError::ZeroDivisor {
                    step: index,
                    entry: *den,
                });
            }
            if !known_nonzero(fam, denom) {
                return Err(StrategyError::UncertainDivisor {
                    step: index,
                    entry: *den,
                });
            }
            let series = sc
                .adjoint_series(j)
                .map_err(|_| StrategyError::BadIndex { step: index })?
                .ok_or(StrategyError::NotNilpotent {
                    step: index,
                    generator: j,
                })?;
            apply_ratio(fam, &series, &numer, denom)
                .ok_or(StrategyError::NotPolynomial { step: index })
        }
        EpsFormula::LogAbs {
            entry,
            scale,
            sign_name,
        } => {
            let ad = sc
                .ad_matrix(j)
                .map_err(|_| StrategyError::BadIndex { step: index })?;
            let diag = integer_diagonal(&ad).ok_or(StrategyError::NotDiagonal {
                step: index,
                generator: j,
            })?;
            // row r is multiplied by |e|^(-scale · m_r)
            let exponents: Vec<i64> = diag.iter().map(|m| -scale * m).collect();
            apply_log(
                fam,
                entry_at(fam, *entry, index)?,
                &exponents,
                sign_name,
                index,
            )
        }
    }
}

fn known_nonzero(fam: &BMatrixFamily, p: &Poly) -> bool {
    match p.as_single_term() {
        Some((m, _)) => m
            .factors()
            .iter()
            .all(|&(v, _)| fam.params()[v as usize].domain.is_nonzero()),
        None => false,
    }
}

fn integer_diagonal(ad: &RationalMatrix) -> Option<Vec<i64>> {
    let n = ad.len();
    let mut out = Vec::with_capacity(n);
    for (i, row) in ad.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            if i != k && !v.is_zero() {
                return None;
            }
        }
        let d = &row[i];
        if !d.is_integer() {
            return None;
        }
        out.push(i64::try_from(d.to_integer()).ok()?);
    }
    Some(out)
}

fn times_matrix(c: &RationalMatrix, entries: &[Vec<Poly>]) -> Vec<Vec<Poly>> {
    let n = entries.len();
    (0..n)
        .map(|r| {
            (0..n)
                .map(|col| {
                    (0..n).fold(Poly::zero(), |acc, k| {
                        if c[r][k].is_zero() {
                            acc
                        } else {
                            &acc + &entries[k][col].scale(&c[r][k])
                        }
                    })
                })
                .collect()
        })
        .collect()
}

/// `A(ε)·B` with `A(ε) = Σ ε^k C_k` and `ε = numer / denom`; `denom` must
/// be a single term.
fn apply_ratio(
    fam: &BMatrixFamily,
    series: &[RationalMatrix],
    numer: &Poly,
    denom: &Poly,
) -> Option<BMatrixFamily> {
    let (dm, dc) = denom.as_single_term()?;
    let top = series.len() - 1;
    let n = fam.dim();
    let mut acc: Vec<Vec<Poly>> = vec![vec![Poly::zero(); n]; n];
    for (k, ck) in series.iter().enumerate() {
        let weight = &numer.pow(k as u32) * &denom.pow((top - k) as u32);
        let term = times_matrix(ck, fam.entries());
        for r in 0..n {
            for c in 0..n {
                if !term[r][c].is_zero() {
                    acc[r][c] = &acc[r][c] + &(&term[r][c] * &weight);
                }
            }
        }
    }
    let dm_pow = dm.pow(top as u32);
    let dc_pow = rational_pow(dc, top as i64);
    let mut entries = Vec::with_capacity(n);
    for row in acc {
        let mut out = Vec::with_capacity(n);
        for p in row {
            out.push(p.div_monomial(&dm_pow)?.scale(&dc_pow.recip()));
        }
        entries.push(out);
    }
    Some(BMatrixFamily::new(entries, fam.params().to_vec()))
}

fn rational_pow(r: &Rational, e: i64) -> Rational {
    let base = if e < 0 { r.recip() } else { r.clone() };
    (0..e.unsigned_abs()).fold(Rational::one(), |acc, _| acc * &base)
}

fn apply_log(
    fam: &BMatrixFamily,
    target: &Poly,
    exponents: &[i64],
    sign_name: &str,
    step: usize,
) -> Result<BMatrixFamily, StrategyError> {
    let absorb = |detail: String| StrategyError::CannotAbsorb { step, detail };
    let n = fam.dim();
    let (tm, tc) = target
        .as_single_term()
        .ok_or_else(|| absorb("target entry is not a single term".into()))?;
    let abs_c = tc.abs();
    let row_factor = |r: usize| rational_pow(&abs_c, exponents[r]);
    let mut entries: Vec<Vec<Poly>> = fam.entries().to_vec();
    let mut params: Vec<ParamDecl> = fam.params().to_vec();

    let pivot = match tm.factors() {
        [] => None,
        [(v, 1)] if params[*v as usize].domain == ParamDomain::Sign => None,
        [(v, 1)] if params[*v as usize].domain == ParamDomain::Nonzero => Some(*v),
        _ => {
            return Err(absorb(
                "target entry must be a nonzero parameter, sign, or constant".into(),
            ))
        }
    };
    let Some(p) = pivot else {
        // |e| is a constant: plain rational row scaling
        for (r, row) in entries.iter_mut().enumerate() {
            for e in row.iter_mut() {
                *e = e.scale(&row_factor(r));
            }
        }
        return Ok(BMatrixFamily::new(entries, params));
    };

    // occurrences of every parameter: (row, col, coefficient) when of the form c·q
    let mut rows_of: Vec<Vec<(usize, usize)>> = vec![Vec::new(); params.len()];
    for r in 0..n {
        for c in 0..n {
            for v in entries[r][c].vars() {
                rows_of[v as usize].push((r, c));
            }
        }
    }
    let linear_in = |e: &Poly, v: Var| -> Option<Rational> {
        let (m, c) = e.as_single_term()?;
        (m.factors() == [(v, 1)]).then(|| c.clone())
    };

    for &(r, c) in &rows_of[p as usize] {
        if exponents[r] != -1 || linear_in(&entries[r][c], p).is_none() {
            return Err(absorb(format!(
                "{} cannot be normalized at b{}{}",
                params[p as usize].name,
                r + 1,
                c + 1
            )));
        }
    }
    for r in 0..n {
        if exponents[r] == 0 {
            continue;
        }
        for c in 0..n {
            let e = &entries[r][c];
            if e.is_zero() || e.vars().contains(&p) {
                continue;
            }
            let vars = e.vars();
            let [q] = vars.iter().copied().collect::<Vec<_>>()[..] else {
                return Err(absorb(format!(
                    "b{}{} would pick up a non-polynomial factor",
                    r + 1,
                    c + 1
                )));
            };
            let domain = params[q as usize].domain;
            let consistent = rows_of[q as usize].iter().all(|&(r2, c2)| {
                exponents[r2] == exponents[r] && linear_in(&entries[r2][c2], q).is_some()
            });
            if !consistent || !matches!(domain, ParamDomain::Real | ParamDomain::Nonzero) {
                return Err(absorb(format!(
                    "{} cannot absorb the rescaling",
                    params[q as usize].name
                )));
            }
        }
    }

    // the absorbed parameters keep their names and entries; only p changes
    let sign = params.len() as Var;
    params.push(ParamDecl {
        name: sign_name.to_string(),
        domain: ParamDomain::Sign,
    });
    for &(r, c) in &rows_of[p as usize] {
        let coeff = linear_in(&entries[r][c], p).expect("checked above");
        entries[r][c] = Poly::term(coeff * row_factor(r), Monomial::var(sign));
    }
    Ok(BMatrixFamily::new(entries, params))
}

fn nonzero_count(fam: &BMatrixFamily) -> usize {
    fam.entries()
        .iter()
        .flatten()
        .filter(|p| !p.is_zero())
        .count()
}

fn greedy(sc: &StructureConstants, fam: &BMatrixFamily) -> BMatrixFamily {
    let n = fam.dim();
    let mut current = fam.clone();
    let mut signs_used = 0usize;
    let series: Vec<Option<Vec<RationalMatrix>>> = (1..=n)
        .map(|j| sc.adjoint_series(j).ok().flatten().filter(|s| s.len() == 2))
        .collect();
    let diagonals: Vec<Option<Vec<i64>>> = (1..=n)
        .map(|j| sc.ad_matrix(j).ok().and_then(|m| integer_diagonal(&m)))
        .collect();

    for _ in 0..4 * n * n {
        let mut progressed = false;
        'elim: for terms in series.iter().flatten() {
            let shift = times_matrix(&terms[1], current.entries());
            for r in 0..n {
                for c in 0..n {
                    let target = current.entry(r, c);
                    if target.is_zero()
                        || shift[r][c].is_zero()
                        || !known_nonzero(&current, &shift[r][c])
                    {
                        continue;
                    }
                    let numer = -target;
                    if let Some(next) = apply_ratio(&current, terms, &numer, &shift[r][c]) {
                        if nonzero_count(&next) < nonzero_count(&current) {
                            current = next;
                            progressed = true;
                            break 'elim;
                        }
                    }
                }
            }
        }
        if progressed {
            continue;
        }
        'scale: for diag in diagonals.iter().flatten() {
            if diag.iter().all(|&m| m == 0) {
                continue;
            }
            for r in 0..n {
                if diag[r] == 0 {
                    continue;
                }
                for c in 0..n {
                    let e = current.entry(r, c);
                    let is_param = matches!(
                        e.as_single_term().map(|(m, _)| m.factors().to_vec()).as_deref(),
                        Some([(v, 1)]) if current.params()[*v as usize].domain == ParamDomain::Nonzero
                    );
                    if !is_param {
                        continue;
                    }
                    // choose the log scale that sends row r to exponent -1
                    let scale = if diag[r] == 1 {
                        1
                    } else if diag[r] == -1 {
                        -1
                    } else {
                        continue;
                    };
                    let exponents: Vec<i64> = diag.iter().map(|m| -scale * m).collect();
                    let name = SIGN_NAMES
                        .get(signs_used)
                        .map_or_else(|| format!("s{signs_used}"), |s| s.to_string());
                    if let Ok(next) = apply_log(&current, &e.clone(), &exponents, &name, 0) {
                        current = next;
                        signs_used += 1;
                        progressed = true;
                        break 'scale;
                    }
                }
            }
        }
        if !progressed {
            break;
        }
    }
    current
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auto::solver::solve_families;
    use crate::auto::ConstraintSystem;
    use crate::rational::rat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn a1() -> StructureConstants {
        StructureConstants::from_brackets(2, [(1, 2, vec![(1, rat(1))])]).unwrap()
    }

    fn a1_strategy() -> Strategy {
        Strategy::new(
            "a1",
            vec![StrategyBranch {
                pattern: vec!["*.".into(), "**".into()],
                steps: vec![
                    ReductionStep {
                        generator: 1,
                        epsilon: EpsFormula::Ratio {
                            num: (2, 1),
                            den: (1, 1),
                            negate: false,
                        },
                    },
                    ReductionStep {
                        generator: 2,
                        epsilon: EpsFormula::LogAbs {
                            entry: (1, 1),
                            scale: -1,
                            sign_name: "alpha".into(),
                        },
                    },
                ],
                renames: Vec::new(),
            }],
        )
    }

    #[test]
    fn a1_reduces_to_signed_diagonal() {
        let sc = a1();
        let raw = solve_families(&sc).unwrap();
        let canon = canonicalize(&sc, &raw, &a1_strategy()).unwrap();
        assert_eq!(canon.len(), 1);
        assert_eq!(
            canon[0].to_string(),
            "[ alpha  0 ]\n[ 0      1 ]\nalpha in {-1, 1}\n"
        );
    }

    #[test]
    fn greedy_matches_bundled_on_a1() {
        let sc = a1();
        let raw = solve_families(&sc).unwrap();
        let canon = canonicalize(&sc, &raw, &greedy_strategy()).unwrap();
        assert_eq!(
            canon[0].entry_strings(),
            vec![vec!["alpha", "0"], vec!["0", "1"]]
        );
    }

    #[test]
    fn reduced_families_still_satisfy_constraints() {
        let sc = a1();
        let sys = ConstraintSystem::generate(&sc);
        let canon = canonicalize(&sc, &solve_families(&sc).unwrap(), &a1_strategy()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let (_, m) = canon[0].sample(&mut rng).unwrap();
            assert!(sys.residual_exact(&m).unwrap().is_zero());
        }
    }

    #[test]
    fn dividing_by_zero_entry_names_the_step() {
        let sc = a1();
        let raw = solve_families(&sc).unwrap();
        let bad = Strategy::new(
            "bad",
            vec![StrategyBranch {
                pattern: vec!["*.".into(), "**".into()],
                steps: vec![ReductionStep {
                    generator: 1,
                    epsilon: EpsFormula::Ratio {
                        num: (2, 1),
                        den: (1, 2),
                        negate: false,
                    },
                }],
                renames: Vec::new(),
            }],
        );
        let err = canonicalize(&sc, &raw, &bad).unwrap_err();
        assert_eq!(
            err,
            StrategyError::ZeroDivisor {
                step: 1,
                entry: (1, 2)
            }
        );
        assert_eq!(
            err.to_string(),
            "step 1: ε divides by b12, which is identically zero"
        );
    }

    #[test]
    fn ratio_step_requires_nilpotent_generator() {
        let sc = a1();
        let raw = solve_families(&sc).unwrap();
        let step = ReductionStep {
            generator: 2,
            epsilon: EpsFormula::Ratio {
                num: (2, 1),
                den: (1, 1),
                negate: false,
            },
        };
        assert_eq!(
            apply_step(&sc, &raw[0], &step, 1),
            Err(StrategyError::NotNilpotent {
                step: 1,
                generator: 2
            })
        );
    }

    #[test]
    fn missing_branch_is_reported() {
        let sc = a1();
        let fam = BMatrixFamily::constant(&vec![vec![rat(1), rat(0)], vec![rat(0), rat(1)]]);
        let err = canonicalize(&sc, &[fam], &a1_strategy()).unwrap_err();
        assert!(matches!(err, StrategyError::NoBranch { .. }));
    }
}
