//! The bundled catalog of example equations, their symmetry algebras and
//! discrete symmetries, plus loaders for user files in the same format.
//!
//! Files are JSON with expressions as strings: one file per algebra, per
//! equation and per map, tied together by `manifest.json`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::error::InputError;
use crate::expr::ParseError;
use crate::group::Fingerprint;
use crate::jets::{commutator_check, ContactMap, GeneratorSpec, JetError, JetKind, Ode};
use crate::lie::{AlgebraFile, StructureConstants};
use crate::pde::{resolve_ordering, Pde};
use crate::rational::{parse_rational, to_f64, Rational};
use crate::report::VerificationReport;
use crate::sampling::CheckOptions;

/// Tolerance of the commutator check run when an entry is loaded.
pub const LOAD_TOL: f64 = 1e-10;

macro_rules! bundled {
    ($($path:literal),* $(,)?) => {
        &[$(($path, include_str!(concat!("../catalog/", $path)))),*]
    };
}

static FILES: &[(&str, &str)] = bundled![
    "manifest.json",
    "algebras/a1.alg",
    "algebras/abelian1.alg",
    "algebras/abelian2.alg",
    "algebras/a1a1.alg",
    "algebras/heat5.alg",
    "equations/ode31.json",
    "equations/ode38.json",
    "equations/ode44.json",
    "equations/mfamily.json",
    "equations/pde51.json",
    "maps/ode31_g1.json",
    "maps/ode31_g2.json",
    "maps/ode38_g1.json",
    "maps/ode38_g2.json",
    "maps/ode44_g1.json",
    "maps/ode44_g2.json",
    "maps/ode44_g3.json",
    "maps/mfamily_g1.json",
    "maps/mfamily_g2.json",
    "maps/mfamily_g3.json",
    "maps/pde51_g1.json",
    "maps/pde51_g2.json",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("{path}: {message}")]
    File { path: String, message: String },
    #[error("{path}: {source}")]
    Input { path: String, source: InputError },
    #[error("{path}: {source}")]
    Jet { path: String, source: JetError },
    #[error("no catalog entry `{0}`")]
    UnknownEntry(String),
    #[error("no catalog algebra `{0}`")]
    UnknownAlgebra(String),
    #[error("{path}: no ordering of the components is a contact map")]
    NoContactOrdering { path: String },
    #[error(
        "entry `{entry}`: generators fail the commutator check (max residual {max_residual:.3e})"
    )]
    Commutators { entry: String, max_residual: f64 },
}

fn file_err(path: &str, message: impl ToString) -> CatalogError {
    CatalogError::File {
        path: path.into(),
        message: message.to_string(),
    }
}

fn jet_err(path: &str) -> impl Fn(JetError) -> CatalogError + '_ {
    move |source| CatalogError::Jet {
        path: path.into(),
        source,
    }
}

fn parse_json<'a, T: Deserialize<'a>>(path: &str, text: &'a str) -> Result<T, CatalogError> {
    serde_json::from_str(text).map_err(|e| file_err(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindTag {
    Ode,
    Pde,
}

impl From<KindTag> for JetKind {
    fn from(k: KindTag) -> Self {
        match k {
            KindTag::Ode => JetKind::Ode,
            KindTag::Pde => JetKind::Pde,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct EquationFile {
    kind: KindTag,
    #[serde(default)]
    order: Option<usize>,
    rhs: String,
    #[serde(default)]
    params: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    label: String,
    kind: KindTag,
    #[serde(default)]
    components: Option<Vec<String>>,
    /// Alternative component orders; the first contact one is used.
    #[serde(default)]
    orderings: Option<Vec<Vec<String>>>,
    #[serde(default)]
    inverse: Option<Vec<String>>,
    #[serde(default)]
    params: Vec<String>,
    #[serde(default)]
    b: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpectedFile {
    #[serde(default)]
    canonical: Option<Vec<Vec<Vec<String>>>>,
    #[serde(default)]
    fingerprint: Option<Fingerprint>,
    #[serde(default)]
    unbounded: bool,
    #[serde(default)]
    uniform: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryFile {
    name: String,
    description: String,
    equation: String,
    #[serde(default)]
    equation_params: BTreeMap<String, String>,
    algebra: String,
    generators: Vec<String>,
    maps: Vec<String>,
    #[serde(default)]
    sweep: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    expected: ExpectedFile,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    algebras: BTreeMap<String, String>,
    entries: Vec<EntryFile>,
}

/// An ODE or a PDE.
#[derive(Debug, Clone, PartialEq)]
pub enum Equation {
    Ode(Ode),
    Pde(Pde),
}

impl Equation {
    pub fn kind(&self) -> JetKind {
        match self {
            Equation::Ode(_) => JetKind::Ode,
            Equation::Pde(_) => JetKind::Pde,
        }
    }
}

/// A discrete symmetry with its automorphism matrix when known.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogMap {
    pub map: ContactMap,
    pub b: Option<Vec<Vec<f64>>>,
    /// Index into the file's `orderings` that was selected, if it had any.
    pub ordering: Option<usize>,
}

/// What the catalog records about an entry's results.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Expected {
    /// Canonical `B` families, as rows of entry strings.
    pub canonical: Option<Vec<Vec<Vec<String>>>>,
    pub fingerprint: Option<Fingerprint>,
    /// The maps generate an infinite group.
    pub unbounded: bool,
    /// Every map is a uniform contact symmetry.
    pub uniform: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub description: String,
    pub equation: Equation,
    pub algebra_name: String,
    pub algebra: StructureConstants,
    pub generators: Vec<GeneratorSpec>,
    /// Maps as declared, possibly with free parameters.
    pub maps: Vec<CatalogMap>,
    /// Parameter assignments to verify; the first is used for group closure.
    pub sweep: Vec<Vec<(String, Rational)>>,
    pub expected: Expected,
}

impl CatalogEntry {
    /// The maps with parameters fixed to one sweep assignment.
    pub fn maps_at(&self, values: &[(String, Rational)]) -> Vec<CatalogMap> {
        self.maps
            .iter()
            .map(|m| CatalogMap {
                map: m.map.instantiate(values),
                ..m.clone()
            })
            .collect()
    }

    /// Maps at the first sweep assignment.
    pub fn group_maps(&self) -> Vec<CatalogMap> {
        self.maps_at(self.sweep.first().map(Vec::as_slice).unwrap_or(&[]))
    }

    pub fn commutator_report(&self, opts: &CheckOptions) -> Result<VerificationReport, JetError> {
        commutator_check(&self.generators, &self.algebra, &self.name, opts)
    }
}

#[derive(Debug, Clone)]
pub struct Catalog {
    pub algebras: BTreeMap<String, StructureConstants>,
    pub entries: Vec<CatalogEntry>,
}

/// Where catalog files come from.
pub trait Source {
    fn read(&self, path: &str) -> Result<String, CatalogError>;
}

struct Bundled;

impl Source for Bundled {
    fn read(&self, path: &str) -> Result<String, CatalogError> {
        FILES
            .iter()
            .find(|(p, _)| *p == path)
            .map(|(_, t)| t.to_string())
            .ok_or_else(|| file_err(path, "not bundled"))
    }
}

/// Files relative to a directory.
pub struct Directory<'a>(pub &'a Path);

impl Source for Directory<'_> {
    fn read(&self, path: &str) -> Result<String, CatalogError> {
        std::fs::read_to_string(self.0.join(path)).map_err(|e| file_err(path, e))
    }
}

impl Catalog {
    /// The catalog shipped with the crate.
    pub fn bundled() -> Result<Catalog, CatalogError> {
        Self::load(&Bundled)
    }

    pub fn load(source: &dyn Source) -> Result<Catalog, CatalogError> {
        let manifest: ManifestFile = parse_json("manifest.json", &source.read("manifest.json")?)?;
        let mut algebras = BTreeMap::new();
        for (name, path) in &manifest.algebras {
            algebras.insert(name.clone(), load_algebra(path, &source.read(path)?)?);
        }
        let mut entries = Vec::new();
        for e in manifest.entries {
            entries.push(load_entry(source, &algebras, e)?);
        }
        Ok(Catalog { algebras, entries })
    }

    pub fn entry(&self, name: &str) -> Result<&CatalogEntry, CatalogError> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| CatalogError::UnknownEntry(name.into()))
    }

    pub fn algebra(&self, name: &str) -> Result<&StructureConstants, CatalogError> {
        self.algebras
            .get(name)
            .ok_or_else(|| CatalogError::UnknownAlgebra(name.into()))
    }

    pub fn entry_names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name.as_str()).collect()
    }
}

/// Parses an algebra file and validates antisymmetry and the Jacobi identity.
pub fn load_algebra(path: &str, text: &str) -> Result<StructureConstants, CatalogError> {
    let file: AlgebraFile = parse_json(path, text)?;
    let sc = file
        .to_structure_constants()
        .map_err(|source| CatalogError::Input {
            path: path.into(),
            source,
        })?;
    let violations = sc.validate();
    if let Some(v) = violations.first() {
        return Err(file_err(path, format!("not a Lie algebra: {v}")));
    }
    Ok(sc)
}

/// Parses an equation file, fixing any declared parameters.
pub fn load_equation(
    path: &str,
    text: &str,
    values: &[(String, Rational)],
) -> Result<Equation, CatalogError> {
    let f: EquationFile = parse_json(path, text)?;
    let params: Vec<&str> = f.params.iter().map(String::as_str).collect();
    match f.kind {
        KindTag::Ode => {
            let order = f
                .order
                .ok_or_else(|| file_err(path, "an ODE needs `order`"))?;
            let ode = Ode::parse_with_params(order, &f.rhs, &params).map_err(jet_err(path))?;
            let ode = ode.instantiate(values);
            if let Some(p) = ode.rhs.used_params().into_iter().next() {
                return Err(file_err(path, format!("parameter `{p}` has no value")));
            }
            Ok(Equation::Ode(ode))
        }
        KindTag::Pde => {
            if !f.params.is_empty() || f.order.is_some() {
                return Err(file_err(
                    path,
                    "PDE equations take neither `order` nor `params`",
                ));
            }
            Ok(Equation::Pde(Pde::parse(&f.rhs).map_err(jet_err(path))?))
        }
    }
}

/// Parses a map file.
pub fn load_map(path: &str, text: &str) -> Result<CatalogMap, CatalogError> {
    let f: MapFile = parse_json(path, text)?;
    let kind = JetKind::from(f.kind);
    let params: Vec<&str> = f.params.iter().map(String::as_str).collect();
    let build = |texts: &[String]| -> Result<ContactMap, CatalogError> {
        let texts: Vec<&str> = texts.iter().map(String::as_str).collect();
        let mut map = ContactMap::parse(&f.label, kind, &texts, &params).map_err(jet_err(path))?;
        if let Some(inv) = &f.inverse {
            let inv: Vec<&str> = inv.iter().map(String::as_str).collect();
            map = map.with_inverse(&inv, &params).map_err(jet_err(path))?;
        }
        Ok(map)
    };
    let (map, ordering) = match (&f.components, &f.orderings) {
        (Some(c), None) => (build(c)?, None),
        (None, Some(orders)) if !orders.is_empty() => {
            let candidates: Vec<ContactMap> =
                orders.iter().map(|o| build(o)).collect::<Result<_, _>>()?;
            let opts = CheckOptions::default();
            let idx = match kind {
                JetKind::Pde => resolve_ordering(&candidates, &opts),
                JetKind::Ode => candidates
                    .iter()
                    .position(|m| crate::jets::contact_residual(m, &opts).passed),
            }
            .ok_or_else(|| CatalogError::NoContactOrdering { path: path.into() })?;
            (candidates[idx].clone(), Some(idx))
        }
        _ => {
            return Err(file_err(
                path,
                "give exactly one of `components` and a nonempty `orderings`",
            ))
        }
    };
    let b = match f.b {
        None => None,
        Some(rows) => Some(
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|s| parse_rational(s).map(|v| to_f64(&v)))
                        .collect::<Result<Vec<f64>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(|source| CatalogError::Input {
                    path: path.into(),
                    source,
                })?,
        ),
    };
    Ok(CatalogMap { map, b, ordering })
}

fn rationals(
    path: &str,
    values: &BTreeMap<String, String>,
) -> Result<Vec<(String, Rational)>, CatalogError> {
    values
        .iter()
        .map(|(k, v)| {
            parse_rational(v)
                .map(|r| (k.clone(), r))
                .map_err(|source| CatalogError::Input {
                    path: path.into(),
                    source,
                })
        })
        .collect()
}

fn load_entry(
    source: &dyn Source,
    algebras: &BTreeMap<String, StructureConstants>,
    e: EntryFile,
) -> Result<CatalogEntry, CatalogError> {
    let here = format!("manifest.json#{}", e.name);
    let eq_values = rationals(&here, &e.equation_params)?;
    let equation = load_equation(&e.equation, &source.read(&e.equation)?, &eq_values)?;
    let kind = equation.kind();
    let algebra = algebras
        .get(&e.algebra)
        .ok_or_else(|| CatalogError::UnknownAlgebra(e.algebra.clone()))?
        .clone();
    let generators = e
        .generators
        .iter()
        .map(|q| GeneratorSpec::characteristic(kind, q))
        .collect::<Result<Vec<_>, _>>()
        .map_err(jet_err(&here))?;
    let mut maps = Vec::new();
    for path in &e.maps {
        let m = load_map(path, &source.read(path)?)?;
        if m.map.kind != kind {
            return Err(file_err(
                path,
                "map acts on a different jet space than the equation",
            ));
        }
        maps.push(m);
    }
    let sweep = sweep_assignments(&here, &e.sweep)?;
    let entry = CatalogEntry {
        name: e.name,
        description: e.description,
        equation,
        algebra_name: e.algebra,
        algebra,
        generators,
        maps,
        sweep,
        expected: Expected {
            canonical: e.expected.canonical,
            fingerprint: e.expected.fingerprint,
            unbounded: e.expected.unbounded,
            uniform: e.expected.uniform,
        },
    };
    let report = entry
        .commutator_report(&CheckOptions::default().with_tol(LOAD_TOL))
        .map_err(jet_err(&here))?;
    if !report.passed {
        return Err(CatalogError::Commutators {
            entry: entry.name,
            max_residual: report.max_residual,
        });
    }
    Ok(entry)
}

/// Zips the per-parameter value lists: assignment `k` takes the `k`-th value
/// of every list.
fn sweep_assignments(
    path: &str,
    sweep: &BTreeMap<String, Vec<String>>,
) -> Result<Vec<Vec<(String, Rational)>>, CatalogError> {
    let Some(len) = sweep.values().map(Vec::len).next() else {
        return Ok(vec![Vec::new()]);
    };
    if sweep.values().any(|v| v.len() != len) || len == 0 {
        return Err(file_err(
            path,
            "sweep lists must be nonempty and of equal length",
        ));
    }
    (0..len)
        .map(|k| {
            sweep
                .iter()
                .map(|(name, vals)| {
                    parse_rational(&vals[k])
                        .map(|r| (name.clone(), r))
                        .map_err(|source| CatalogError::Input {
                            path: path.into(),
                            source,
                        })
                })
                .collect()
        })
        .collect()
}

impl From<ParseError> for CatalogError {
    fn from(e: ParseError) -> Self {
        file_err("<expression>", e)
    }
}
