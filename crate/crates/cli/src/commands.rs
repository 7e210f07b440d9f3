use std::path::Path;

use discsym_core::auto::{bundled_strategy, greedy_strategy, ConstraintSystem, SolveError};
use discsym_core::catalog::{
    load_algebra, load_equation, load_map, Catalog, CatalogEntry, CatalogMap, Expected,
};
use discsym_core::jets::ContactMap;
use discsym_core::lie::StructureConstants;
use discsym_core::sampling::CheckOptions;
use discsym_core::suite::{
    auto_families, canonical_matches, default_strategy, group_of_maps, group_outcome, identity_map,
    verify_entry, AutoError,
};

use crate::report::{
    AutoSummary, RunReport, EXIT_BUDGET, EXIT_CHECK_FAILED, EXIT_INPUT, EXIT_UNBOUNDED,
};
use crate::{AutoArgs, GroupArgs, VerifyArgs};

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn catalog(report: &mut RunReport) -> Option<Catalog> {
    match Catalog::bundled() {
        Ok(c) => Some(c),
        Err(e) => {
            report.error(EXIT_INPUT, format!("bundled catalog: {e}"));
            None
        }
    }
}

pub fn auto(args: &AutoArgs, report: &mut RunReport) {
    let Some(cat) = catalog(report) else { return };
    let mut targets: Vec<(String, StructureConstants)> = Vec::new();
    if let Some(path) = &args.file {
        let name = path.display().to_string();
        match read(path).and_then(|t| load_algebra(&name, &t).map_err(|e| e.to_string())) {
            Ok(sc) => targets.push((name, sc)),
            Err(e) => return report.error(EXIT_INPUT, e),
        }
    } else if let Some(name) = &args.catalog {
        match cat.algebra(name) {
            Ok(sc) => targets.push((name.clone(), sc.clone())),
            Err(e) => return report.error(EXIT_INPUT, e.to_string()),
        }
    } else {
        targets.extend(cat.algebras.iter().map(|(n, sc)| (n.clone(), sc.clone())));
    }
    let strategy = match args.strategy.as_deref() {
        None => None,
        Some("greedy") => Some(greedy_strategy()),
        Some(name) => match bundled_strategy(name) {
            Some(s) => Some(s),
            None => return report.error(EXIT_INPUT, format!("unknown strategy `{name}`")),
        },
    };
    for (name, sc) in targets {
        let expected = if args.file.is_some() {
            None
        } else {
            cat.entries
                .iter()
                .filter(|e| e.algebra_name == name)
                .find_map(|e| e.expected.canonical.clone())
        };
        auto_one(args, report, &name, &sc, strategy.as_ref(), expected);
    }
}

fn auto_one(
    args: &AutoArgs,
    report: &mut RunReport,
    name: &str,
    sc: &StructureConstants,
    strategy: Option<&discsym_core::auto::Strategy>,
    expected: Option<Vec<Vec<Vec<String>>>>,
) {
    let sys = ConstraintSystem::generate(sc);
    report.line(format!(
        "algebra {name}: dimension {}, {} constraint(s)",
        sc.dim(),
        sys.len()
    ));
    for l in sys.to_report() {
        let [i, j, n] = l.source;
        report.line(format!("  ({i},{j},{n}) {}", l.equation));
    }
    let mut summary = AutoSummary {
        algebra: name.into(),
        dim: sc.dim(),
        constraints: sys.to_report(),
        families: None,
        strategy: None,
        canonical: None,
        matches_expected: None,
    };
    if args.solve || args.canonicalize {
        let chosen = args
            .canonicalize
            .then(|| strategy.cloned().unwrap_or_else(|| default_strategy(sc)));
        match auto_families(sc, chosen.as_ref()) {
            Ok((raw, canonical)) => {
                report.line(format!(
                    "{} raw famil{}:",
                    raw.len(),
                    if raw.len() == 1 { "y" } else { "ies" }
                ));
                for f in &raw {
                    push_block(report, &f.to_string());
                }
                summary.families = Some(raw.iter().map(|f| f.to_file()).collect());
                if let (Some(canonical), Some(s)) = (canonical, chosen) {
                    report.line(format!("canonical forms (strategy {}):", s.name));
                    for f in &canonical {
                        push_block(report, &f.to_string());
                    }
                    if let Some(exp) = &expected {
                        let ok = canonical_matches(&canonical, exp);
                        report.line(format!(
                            "canonical forms {} the catalog",
                            if ok { "match" } else { "DIFFER FROM" }
                        ));
                        if !ok {
                            report.flag(EXIT_CHECK_FAILED);
                        }
                        summary.matches_expected = Some(ok);
                    }
                    summary.strategy = Some(s.name);
                    summary.canonical = Some(canonical.iter().map(|f| f.to_file()).collect());
                }
            }
            Err(AutoError::Solve(
                e @ (SolveError::Budget { .. } | SolveError::Unresolved { .. }),
            )) => {
                report.error(EXIT_BUDGET, format!("{name}: {e}"));
            }
            Err(e) => report.error(EXIT_INPUT, format!("{name}: {e}")),
        }
    }
    report.algebras.push(summary);
}

fn push_block(report: &mut RunReport, block: &str) {
    for l in block.lines() {
        report.line(format!("  {l}"));
    }
    report.line("");
}

/// `identity`, a label among the entry's maps, or a file path.
fn resolve_map(entry: &CatalogEntry, spec: &str) -> Result<CatalogMap, String> {
    if spec == "identity" {
        return Ok(identity_map(entry));
    }
    if let Some(m) = entry
        .group_maps()
        .into_iter()
        .find(|m| m.map.label == spec || m.map.label.starts_with(&format!("{spec}[")))
    {
        return Ok(m);
    }
    let path = Path::new(spec);
    load_map(spec, &read(path)?).map_err(|e| e.to_string())
}

fn user_entry(args: &VerifyArgs, path: &Path) -> Result<CatalogEntry, String> {
    let name = path.display().to_string();
    let equation = load_equation(&name, &read(path)?, &[]).map_err(|e| e.to_string())?;
    let kind = equation.kind();
    let (algebra_name, algebra) = match &args.algebra {
        Some(p) => (
            p.display().to_string(),
            load_algebra(&p.display().to_string(), &read(p)?).map_err(|e| e.to_string())?,
        ),
        None => (
            "none".into(),
            StructureConstants::abelian(1).map_err(|e| e.to_string())?,
        ),
    };
    let generators = args
        .generators
        .iter()
        .map(|q| discsym_core::jets::GeneratorSpec::characteristic(kind, q))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| format!("generator: {e}"))?;
    if !generators.is_empty() && generators.len() != algebra.dim() {
        return Err(format!(
            "{} generator(s) for an algebra of dimension {}",
            generators.len(),
            algebra.dim()
        ));
    }
    Ok(CatalogEntry {
        name: "user".into(),
        description: name,
        equation,
        algebra_name,
        algebra,
        generators,
        maps: Vec::new(),
        sweep: vec![Vec::new()],
        expected: Expected::default(),
    })
}

pub fn verify(args: &VerifyArgs, report: &mut RunReport) {
    report.seed = Some(args.seed);
    let opts = CheckOptions {
        samples: args.samples,
        seed: args.seed,
        tol: args.tol,
        ..CheckOptions::default()
    };
    let Some(cat) = catalog(report) else { return };
    let entries: Vec<CatalogEntry> = if let Some(path) = &args.equation {
        match user_entry(args, path) {
            Ok(e) => vec![e],
            Err(e) => return report.error(EXIT_INPUT, e),
        }
    } else if let Some(name) = &args.catalog {
        match cat.entry(name) {
            Ok(e) => vec![e.clone()],
            Err(e) => return report.error(EXIT_INPUT, e.to_string()),
        }
    } else {
        cat.entries.clone()
    };
    for entry in &entries {
        let maps = if args.map.is_empty() {
            None
        } else {
            match args
                .map
                .iter()
                .map(|m| resolve_map(entry, m))
                .collect::<Result<Vec<_>, _>>()
            {
                Ok(m) => Some(m),
                Err(e) => return report.error(EXIT_INPUT, e),
            }
        };
        if let Some(m) = maps
            .iter()
            .flatten()
            .find(|m| m.map.kind != entry.equation.kind())
        {
            return report.error(
                EXIT_INPUT,
                format!("map `{}` acts on a different jet space", m.map.label),
            );
        }
        match verify_entry(entry, maps.as_deref(), &args.checks, &opts) {
            Ok(reports) => reports.iter().for_each(|r| report.check(r)),
            Err(e) => report.error(EXIT_INPUT, format!("{}: {e}", entry.name)),
        }
    }
}

pub fn group(args: &GroupArgs, report: &mut RunReport) {
    report.seed = Some(args.seed);
    if !args.map.is_empty() {
        let mut maps: Vec<ContactMap> = Vec::new();
        for p in &args.map {
            match read(p)
                .and_then(|t| load_map(&p.display().to_string(), &t).map_err(|e| e.to_string()))
            {
                Ok(m) => maps.push(m.map),
                Err(e) => return report.error(EXIT_INPUT, e),
            }
        }
        match group_of_maps(&maps, args.max_size, args.seed) {
            Ok(t) => {
                report.line(format!("maps: {}", t.fingerprint()));
                if args.table {
                    push_block(report, &t.render());
                }
            }
            Err(discsym_core::group::GroupError::Unbounded {
                orbit_size,
                max_size,
            }) => {
                report.line(format!(
                    "maps: closure exceeds {max_size} elements (orbit {orbit_size}); unbounded"
                ));
                report.flag(EXIT_UNBOUNDED);
            }
            Err(e) => report.error(EXIT_INPUT, e.to_string()),
        }
        return;
    }
    let Some(cat) = catalog(report) else { return };
    let entries: Vec<&CatalogEntry> = match &args.catalog {
        Some(name) => match cat.entry(name) {
            Ok(e) => vec![e],
            Err(e) => return report.error(EXIT_INPUT, e.to_string()),
        },
        None => cat.entries.iter().collect(),
    };
    for entry in entries {
        match group_outcome(entry, args.max_size, args.seed) {
            Ok((o, table)) => {
                let verdict = match o.matches_expected {
                    Some(true) => " [matches catalog]",
                    Some(false) => " [DIFFERS FROM catalog]",
                    None => "",
                };
                match (&o.fingerprint, o.unbounded_at) {
                    (Some(f), _) => report.line(format!("{}: {f}{verdict}", o.entry)),
                    (None, Some(n)) => {
                        report.line(format!(
                            "{}: closure exceeds {} elements (orbit {n}); unbounded{verdict}",
                            o.entry, args.max_size
                        ));
                        report.flag(EXIT_UNBOUNDED);
                    }
                    (None, None) => {}
                }
                if o.matches_expected == Some(false) || (o.fingerprint.is_some() && !o.latin_square)
                {
                    report.flag(EXIT_CHECK_FAILED);
                }
                if let (true, Some(t)) = (args.table, table) {
                    push_block(report, &t.render());
                }
                report.groups.push(o);
            }
            Err(e) => report.error(EXIT_INPUT, format!("{}: {e}", entry.name)),
        }
    }
}
