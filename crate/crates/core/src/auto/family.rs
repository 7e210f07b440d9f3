use std::fmt;

use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::poly::{Poly, Var};
use crate::rational::{self, format_rational, rat, ratio, Rational, RationalMatrix};

/// Admissible values of a family parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamDomain {
    Real,
    Nonzero,
    Sign,
    Integer,
}

impl ParamDomain {
    pub fn is_nonzero(self) -> bool {
        matches!(self, ParamDomain::Nonzero | ParamDomain::Sign)
    }

    pub fn admits(self, value: &Rational) -> bool {
        match self {
            ParamDomain::Real => true,
            ParamDomain::Nonzero => !value.is_zero(),
            ParamDomain::Sign => value.is_one() || (-value).is_one(),
            ParamDomain::Integer => value.is_integer(),
        }
    }

    fn sample<R: Rng>(self, rng: &mut R) -> Rational {
        match self {
            ParamDomain::Sign => rat(if rng.gen::<bool>() { 1 } else { -1 }),
            ParamDomain::Integer => rat(rng.gen_range(-3..=3)),
            ParamDomain::Real | ParamDomain::Nonzero => loop {
                let v = ratio(rng.gen_range(-9..=9), rng.gen_range(1..=5));
                if self == ParamDomain::Real || !v.is_zero() {
                    break v;
                }
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamDecl {
    pub name: String,
    pub domain: ParamDomain,
}

/// An entry of the form `coefficient · parameter` or a plain constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicEntry {
    pub coefficient: Rational,
    pub parameter: Option<String>,
}

/// A parametric family of automorphism matrices. Entries are polynomials in
/// the declared parameters (variable `k` is `params[k]`).
#[derive(Debug, Clone, PartialEq)]
pub struct BMatrixFamily {
    dim: usize,
    entries: Vec<Vec<Poly>>,
    params: Vec<ParamDecl>,
}

impl BMatrixFamily {
    /// Builds a family, dropping parameters that no entry uses.
    pub fn new(entries: Vec<Vec<Poly>>, params: Vec<ParamDecl>) -> Self {
        let dim = entries.len();
        let mut fam = BMatrixFamily {
            dim,
            entries,
            params,
        };
        fam.compact();
        fam
    }

    /// A single constant matrix.
    pub fn constant(m: &RationalMatrix) -> Self {
        let entries = m
            .iter()
            .map(|r| r.iter().map(|c| Poly::constant(c.clone())).collect())
            .collect();
        Self::new(entries, Vec::new())
    }

    fn compact(&mut self) {
        let mut used = vec![false; self.params.len()];
        for p in self.entries.iter().flatten() {
            for v in p.vars() {
                used[v as usize] = true;
            }
        }
        if used.iter().all(|&u| u) {
            return;
        }
        let mut remap = vec![None; self.params.len()];
        let mut params = Vec::new();
        for (k, decl) in self.params.iter().enumerate() {
            if used[k] {
                remap[k] = Some(params.len() as Var);
                params.push(decl.clone());
            }
        }
        for p in self.entries.iter_mut().flatten() {
            *p = reindex(p, &remap);
        }
        self.params = params;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Vec<Poly>] {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> &Poly {
        &self.entries[row][col]
    }

    pub fn params(&self) -> &[ParamDecl] {
        &self.params
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    pub fn rename_param(&mut self, from: &str, to: &str) {
        if let Some(k) = self.param_index(from) {
            self.params[k].name = to.to_string();
        }
    }

    pub fn symbolic_entry(&self, row: usize, col: usize) -> Option<SymbolicEntry> {
        let p = &self.entries[row][col];
        if let Some(c) = p.as_constant() {
            return Some(SymbolicEntry {
                coefficient: c,
                parameter: None,
            });
        }
        let (m, c) = p.as_single_term()?;
        match m.factors() {
            [(v, 1)] => Some(SymbolicEntry {
                coefficient: c.clone(),
                parameter: Some(self.params[*v as usize].name.clone()),
            }),
            _ => None,
        }
    }

    /// Nonzero pattern, `*` for a nonzero entry and `.` for zero.
    pub fn support(&self) -> Vec<String> {
        self.entries
            .iter()
            .map(|r| {
                r.iter()
                    .map(|p| if p.is_zero() { '.' } else { '*' })
                    .collect()
            })
            .collect()
    }

    pub fn param_name(&self, v: Var) -> String {
        self.params[v as usize].name.clone()
    }

    pub fn entry_strings(&self) -> Vec<Vec<String>> {
        self.entries
            .iter()
            .map(|r| {
                r.iter()
                    .map(|p| p.display_with(&|v| self.param_name(v)))
                    .collect()
            })
            .collect()
    }

    pub fn sample_values<R: Rng>(&self, rng: &mut R) -> Vec<Rational> {
        self.params.iter().map(|p| p.domain.sample(rng)).collect()
    }

    pub fn instantiate(&self, values: &[Rational]) -> RationalMatrix {
        self.entries
            .iter()
            .map(|r| {
                r.iter()
                    .map(|p| p.eval(&|v| values[v as usize].clone()))
                    .collect()
            })
            .collect()
    }

    pub fn instantiate_f64(&self, values: &[f64]) -> Vec<Vec<f64>> {
        self.entries
            .iter()
            .map(|r| {
                r.iter()
                    .map(|p| p.eval_f64(&|v| values[v as usize]))
                    .collect()
            })
            .collect()
    }

    /// A random member of the family with nonzero determinant.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Option<(Vec<Rational>, RationalMatrix)> {
        for _ in 0..32 {
            let values = self.sample_values(rng);
            let m = self.instantiate(&values);
            if !rational::determinant(&m).is_zero() {
                return Some((values, m));
            }
        }
        None
    }

    /// False when the determinant vanished at three random instantiations.
    pub fn generically_nonsingular<R: Rng>(&self, rng: &mut R) -> bool {
        (0..3).any(|_| {
            let values = self.sample_values(rng);
            !rational::determinant(&self.instantiate(&values)).is_zero()
        })
    }

    /// Whether `m` is an instantiation of this family with admissible
    /// parameter values. Parameters are recovered from entries that are
    /// linear in a single unknown parameter.
    pub fn contains(&self, m: &RationalMatrix) -> bool {
        if m.len() != self.dim || m.iter().any(|r| r.len() != self.dim) {
            return false;
        }
        let mut known: Vec<Option<Rational>> = vec![None; self.params.len()];
        loop {
            let mut progress = false;
            for (r, row) in self.entries.iter().enumerate() {
                for (c, p) in row.iter().enumerate() {
                    let mut reduced = p.clone();
                    for (k, v) in known.iter().enumerate() {
                        if let Some(v) = v {
                            reduced = reduced.substitute(k as Var, &Poly::constant(v.clone()));
                        }
                    }
                    let vars = reduced.vars();
                    if vars.len() != 1 {
                        continue;
                    }
                    let v = *vars.iter().next().unwrap();
                    if let Some((a, rest)) = reduced.linear_split(v) {
                        let (Some(a), Some(rest)) = (a.as_constant(), rest.as_constant()) else {
                            continue;
                        };
                        known[v as usize] = Some((&m[r][c] - rest) / a);
                        progress = true;
                    }
                }
            }
            if !progress {
                break;
            }
        }
        let mut values = Vec::with_capacity(known.len());
        for (k, v) in known.into_iter().enumerate() {
            match v {
                Some(v) if self.params[k].domain.admits(&v) => values.push(v),
                _ => return false,
            }
        }
        &self.instantiate(&values) == m
    }

    pub fn to_file(&self) -> FamilyFile {
        FamilyFile {
            dim: self.dim,
            entries: self.entry_strings(),
            parameters: self.params.clone(),
        }
    }
}

fn reindex(p: &Poly, remap: &[Option<Var>]) -> Poly {
    let mut out = Poly::zero();
    for (m, c) in p.terms() {
        let mut t = Poly::constant(c.clone());
        for &(v, e) in m.factors() {
            let nv = remap[v as usize].expect("used parameter has an index");
            t = &t * &Poly::var(nv).pow(e);
        }
        out = &out + &t;
    }
    out
}

/// Serialized family, entries in row-major bracket layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyFile {
    pub dim: usize,
    pub entries: Vec<Vec<String>>,
    pub parameters: Vec<ParamDecl>,
}

impl fmt::Display for BMatrixFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let strings = self.entry_strings();
        let widths: Vec<usize> = (0..self.dim)
            .map(|c| {
                strings
                    .iter()
                    .map(|r| r[c].chars().count())
                    .max()
                    .unwrap_or(1)
            })
            .collect();
        for row in &strings {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(s, &w)| format!("{s}{}", " ".repeat(w - s.chars().count())))
                .collect();
            writeln!(f, "[ {} ]", cells.join("  ").trim_end())?;
        }
        for p in &self.params {
            match p.domain {
                ParamDomain::Real => writeln!(f, "{} real", p.name)?,
                ParamDomain::Nonzero => writeln!(f, "{} nonzero", p.name)?,
                ParamDomain::Sign => writeln!(f, "{} in {{-1, 1}}", p.name)?,
                ParamDomain::Integer => writeln!(f, "{} integer", p.name)?,
            }
        }
        Ok(())
    }
}

impl SymbolicEntry {
    pub fn describe(&self) -> String {
        match &self.parameter {
            None => format_rational(&self.coefficient),
            Some(p) if self.coefficient.is_one() => p.clone(),
            Some(p) => format!("{}*{p}", format_rational(&self.coefficient)),
        }
    }
}
