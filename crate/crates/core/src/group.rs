//! Finite groups generated by discrete symmetries.
//!
//! Elements are compared by their values at a shared set of seeded sample
//! points, so composed expression trees never need simplifying.

use std::collections::{BTreeMap, VecDeque};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalContext, EvalError};
use crate::jets::{ContactMap, JetError, JetKind};
use crate::pde::draw_first_order;
use crate::sampling::{Sampler, DEFAULT_FLOOR, DEFAULT_SEED};

/// Relative agreement required for two elements to be equal.
pub const EQUALITY_TOL: f64 = 1e-9;
pub const DEFAULT_SAMPLE_POINTS: usize = 16;
const MAX_REDRAWS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroupError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("`{label}` fails to evaluate at a shared sample: {source}")]
    Eval { label: String, source: EvalError },
    #[error("`{0}` has no declared inverse and infinite order")]
    NoInverse(String),
    #[error("closure exceeds {max_size} elements (orbit reached {orbit_size}); the group looks unbounded")]
    Unbounded { max_size: usize, orbit_size: usize },
    #[error("product {0} * {1} left the element list")]
    NotClosed(usize, usize),
    #[error("no generators given")]
    Empty,
    #[error("could not find sample points where every generator is regular")]
    NoSamples,
}

/// Shared sample points: complex annulus points for ODE maps, real points
/// with `ux` in `[0.1, 2]` for PDE maps.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub kind: JetKind,
    points: Vec<Vec<Complex64>>,
    ctx: EvalContext,
}

impl SampleSet {
    /// Draws `count` points at which every map in `regular` evaluates.
    pub fn new(
        kind: JetKind,
        seed: u64,
        count: usize,
        regular: &[ContactMap],
    ) -> Result<Self, GroupError> {
        let ctx = EvalContext::with_floor(DEFAULT_FLOOR);
        let mut s = Sampler::new(seed);
        let mut points = Vec::with_capacity(count);
        for _ in 0..MAX_REDRAWS {
            if points.len() == count {
                break;
            }
            let pt = match kind {
                JetKind::Ode => s.annulus_point(3),
                JetKind::Pde => draw_first_order(&mut s),
            };
            if regular.iter().all(|m| m.apply(&pt, &ctx).is_ok()) {
                points.push(pt);
            }
        }
        if points.len() < count {
            return Err(GroupError::NoSamples);
        }
        Ok(SampleSet { kind, points, ctx })
    }

    pub fn for_maps(maps: &[ContactMap]) -> Result<Self, GroupError> {
        let kind = maps.first().ok_or(GroupError::Empty)?.kind;
        Self::new(kind, DEFAULT_SEED, DEFAULT_SAMPLE_POINTS, maps)
    }

    pub fn points(&self) -> &[Vec<Complex64>] {
        &self.points
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            label: "id".into(),
            map: ContactMap::identity(self.kind),
            values: self.points.clone(),
        }
    }

    pub fn element(&self, map: &ContactMap) -> Result<GroupElement, GroupError> {
        if map.kind != self.kind {
            return Err(
                JetError::Mismatch(format!("`{}` acts on the wrong jet space", map.label)).into(),
            );
        }
        let values = self.apply(map, &self.points)?;
        Ok(GroupElement {
            label: map.label.clone(),
            map: map.clone(),
            values,
        })
    }

    fn apply(
        &self,
        map: &ContactMap,
        pts: &[Vec<Complex64>],
    ) -> Result<Vec<Vec<Complex64>>, GroupError> {
        pts.iter()
            .map(|p| {
                map.apply(p, &self.ctx).map_err(|source| GroupError::Eval {
                    label: map.label.clone(),
                    source,
                })
            })
            .collect()
    }

    /// `a ∘ b`, with the composed map kept as an unsimplified expression.
    pub fn product(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement, GroupError> {
        let values = self.apply(&a.map, &b.values)?;
        let map = a.map.compose(&b.map)?;
        let label = match (a.label.as_str(), b.label.as_str()) {
            ("id", l) | (l, "id") => l.to_string(),
            (x, y) => format!("{x}*{y}"),
        };
        Ok(GroupElement { label, map, values })
    }

    /// Inverse by powering when the order is at most `max_order`, otherwise
    /// from the declared inverse expressions.
    pub fn inverse(&self, g: &GroupElement, max_order: usize) -> Result<GroupElement, GroupError> {
        if let Some(m) = self.element_order(g, max_order)? {
            let mut out = self.identity();
            for _ in 1..m {
                out = self.product(g, &out)?;
            }
            out.label = format!("{}^-1", g.label);
            return Ok(out);
        }
        let inv = g
            .map
            .inverse
            .clone()
            .ok_or_else(|| GroupError::NoInverse(g.label.clone()))?;
        let map = ContactMap {
            label: format!("{}^-1", g.label),
            kind: g.map.kind,
            components: inv,
            inverse: None,
        };
        self.element(&map)
    }

    /// Smallest `m <= max_order` with `g^m = id`, or `None`.
    pub fn element_order(
        &self,
        g: &GroupElement,
        max_order: usize,
    ) -> Result<Option<usize>, GroupError> {
        let id = self.identity();
        let mut power = g.values.clone();
        for m in 1..=max_order {
            if values_equal(&power, &id.values) {
                return Ok(Some(m));
            }
            power = self.apply(&g.map, &power)?;
        }
        Ok(None)
    }
}

/// A group element with its values at the shared samples.
#[derive(Debug, Clone)]
pub struct GroupElement {
    pub label: String,
    pub map: ContactMap,
    pub values: Vec<Vec<Complex64>>,
}

impl GroupElement {
    pub fn same_as(&self, other: &GroupElement) -> bool {
        values_equal(&self.values, &other.values)
    }
}

fn values_equal(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> bool {
    a.iter().zip(b).all(|(u, v)| {
        u.iter()
            .zip(v)
            .all(|(x, y)| (x - y).norm() <= EQUALITY_TOL * (1.0 + x.norm().max(y.norm())))
    })
}

/// `a ∘ b` as an expression-level substitution.
pub fn compose(a: &ContactMap, b: &ContactMap) -> Result<ContactMap, JetError> {
    a.compose(b)
}

/// Order, commutativity and element orders of a finite group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub order: usize,
    pub abelian: bool,
    /// Element order to number of elements of that order.
    pub order_multiset: BTreeMap<usize, usize>,
}

impl Fingerprint {
    pub fn new(order: usize, abelian: bool, orders: &[usize]) -> Self {
        let mut order_multiset = BTreeMap::new();
        for &o in orders {
            *order_multiset.entry(o).or_insert(0) += 1;
        }
        Fingerprint {
            order,
            abelian,
            order_multiset,
        }
    }

    /// Name of the group for the small orders where the fingerprint decides it.
    pub fn name(&self) -> Option<&'static str> {
        let m: Vec<(usize, usize)> = self.order_multiset.iter().map(|(&k, &v)| (k, v)).collect();
        let name = match (self.order, self.abelian, m.as_slice()) {
            (1, _, _) => "trivial",
            (2, _, _) => "Z2",
            (3, _, _) => "Z3",
            (4, true, [(1, 1), (2, 3)]) => "Z2xZ2",
            (4, true, [(1, 1), (2, 1), (4, 2)]) => "Z4",
            (6, true, _) => "Z6",
            (6, false, _) => "S3",
            (8, true, [(1, 1), (2, 7)]) => "Z2xZ2xZ2",
            (8, true, [(1, 1), (2, 3), (4, 4)]) => "Z4xZ2",
            (8, true, [(1, 1), (2, 1), (4, 2), (8, 4)]) => "Z8",
            (8, false, [(1, 1), (2, 5), (4, 2)]) => "D4",
            (8, false, [(1, 1), (2, 1), (4, 6)]) => "Q8",
            _ => return None,
        };
        Some(name)
    }
}

impl std::fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let ms: Vec<String> = self
            .order_multiset
            .iter()
            .map(|(k, v)| format!("{k}:{v}"))
            .collect();
        write!(
            f,
            "order {}, {}, orders {{{}}}",
            self.order,
            if self.abelian {
                "abelian"
            } else {
                "non-abelian"
            },
            ms.join(", ")
        )?;
        if let Some(n) = self.name() {
            write!(f, " ({n})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CayleyTable {
    pub elements: Vec<GroupElement>,
    /// `table[i][j]` is the index of `elements[i] ∘ elements[j]`.
    pub table: Vec<Vec<usize>>,
    pub orders: Vec<usize>,
    pub abelian: bool,
}

impl CayleyTable {
    pub fn is_latin_square(&self) -> bool {
        let n = self.elements.len();
        let perm = |line: Vec<usize>| {
            let mut seen = vec![false; n];
            line.into_iter()
                .all(|k| k < n && !std::mem::replace(&mut seen[k], true))
        };
        (0..n).all(|i| {
            perm(self.table[i].clone()) && perm((0..n).map(|r| self.table[r][i]).collect())
        })
    }

    pub fn fingerprint(&self) -> Fingerprint {
        Fingerprint::new(self.elements.len(), self.abelian, &self.orders)
    }

    /// Aligned text rendering, elements named `e0, e1, …`.
    pub fn render(&self) -> String {
        let n = self.elements.len();
        let w = format!("e{}", n.saturating_sub(1)).len();
        let mut out = String::new();
        for (i, e) in self.elements.iter().enumerate() {
            out.push_str(&format!(
                "{:>w$} = {} (order {})\n",
                format!("e{i}"),
                e.label,
                self.orders[i]
            ));
        }
        out.push_str(&format!("{:>w$} |", "*"));
        for j in 0..n {
            out.push_str(&format!(" {:>w$}", format!("e{j}")));
        }
        out.push('\n');
        out.push_str(&format!("{}-+{}\n", "-".repeat(w), "-".repeat((w + 1) * n)));
        for (i, row) in self.table.iter().enumerate() {
            out.push_str(&format!("{:>w$} |", format!("e{i}")));
            for k in row {
                out.push_str(&format!(" {:>w$}", format!("e{k}")));
            }
            out.push('\n');
        }
        out
    }
}

/// Breadth-first closure under left multiplication by the generators, then
/// the full product table.
pub fn closure_and_table(
    set: &SampleSet,
    generators: &[GroupElement],
    max_size: usize,
) -> Result<CayleyTable, GroupError> {
    if generators.is_empty() {
        return Err(GroupError::Empty);
    }
    let mut elements = vec![set.identity()];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for g in generators {
            let h = set.product(g, &elements[i])?;
            if find(&elements, &h).is_none() {
                elements.push(h);
                if elements.len() > max_size {
                    return Err(GroupError::Unbounded {
                        max_size,
                        orbit_size: elements.len(),
                    });
                }
                queue.push_back(elements.len() - 1);
            }
        }
    }
    let n = elements.len();
    let mut table = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let values = set.apply(&elements[i].map, &elements[j].values)?;
            let probe = GroupElement {
                label: String::new(),
                map: elements[j].map.clone(),
                values,
            };
            table[i][j] = find(&elements, &probe).ok_or(GroupError::NotClosed(i, j))?;
        }
    }
    let abelian = (0..n).all(|i| (0..i).all(|j| table[i][j] == table[j][i]));
    let orders = (0..n)
        .map(|i| {
            let (mut k, mut m) = (i, 1);
            while k != 0 {
                k = table[i][k];
                m += 1;
            }
            m
        })
        .collect();
    Ok(CayleyTable {
        elements,
        table,
        orders,
        abelian,
    })
}

fn find(elements: &[GroupElement], e: &GroupElement) -> Option<usize> {
    elements.iter().position(|x| x.same_as(e))
}
