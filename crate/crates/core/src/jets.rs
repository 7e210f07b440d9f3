//! Contact maps and generators on the jet space of a scalar ODE.
//!
//! Coordinates are `x, y, p = y'`, then `q = y''`, `r = y'''` and `y4, y5, …`.
//! Prolongation runs Taylor-mode differentiation along a curve through the
//! jet point, so `ŷ^(k) = (dŷ^(k-1)/ds) / (dx̂/ds)` is exact to rounding.

use num_complex::Complex64;
use thiserror::Error;

use crate::expr::{EvalContext, EvalError, Expr, Expression, ParseError};
use crate::lie::StructureConstants;
use crate::rational::{to_f64, Rational};
use crate::report::VerificationReport;
use crate::sampling::{run_check, CheckOptions, SampleError, Sampler};
use crate::scalar::{Dual, Scalar, Taylor};

pub const ODE_VARS: [&str; 3] = ["x", "y", "p"];
pub const PDE_VARS: [&str; 5] = ["t", "x", "u", "ut", "ux"];
const JET_NAMES: [&str; 8] = ["x", "y", "p", "q", "r", "y4", "y5", "y6"];
/// Highest ODE order with named jet coordinates.
pub const MAX_ORDER: usize = 6;
/// Smallest admissible `|dx̂/dx|` during prolongation.
pub const PROLONG_FLOOR: f64 = 1e-8;

/// Names of `x, y, y', …, y^(order)`.
pub fn jet_names(order: usize) -> &'static [&'static str] {
    &JET_NAMES[..order + 2]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetKind {
    /// `(x, y, p)`.
    Ode,
    /// `(t, x, u, ut, ux)`.
    Pde,
}

impl JetKind {
    pub fn vars(self) -> &'static [&'static str] {
        match self {
            JetKind::Ode => &ODE_VARS,
            JetKind::Pde => &PDE_VARS,
        }
    }

    pub fn dim(self) -> usize {
        self.vars().len()
    }

    /// Number of base coordinates (independent and dependent variables).
    pub fn base_dim(self) -> usize {
        match self {
            JetKind::Ode => 2,
            JetKind::Pde => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("expected {expected} components, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("dx̂ vanishes to working precision ({0:e})")]
    Singular(f64),
    #[error("order {0} outside 1..={MAX_ORDER}")]
    Order(usize),
    #[error("{0}")]
    Mismatch(String),
}

impl From<JetError> for SampleError {
    fn from(e: JetError) -> Self {
        match e {
            JetError::Eval(e) => e.into(),
            JetError::Singular(m) => SampleError::Singular(format!("singular Jacobian ({m:e})")),
            other => SampleError::Failed(other.to_string()),
        }
    }
}

/// A map of jet coordinates `(x, y, p)` or `(t, x, u, ut, ux)`, given by one
/// expression per image coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactMap {
    pub label: String,
    pub kind: JetKind,
    pub components: Vec<Expression>,
    /// Declared inverse, for elements of infinite order.
    pub inverse: Option<Vec<Expression>>,
}

/// Five-component maps of the PDE jet space share the representation.
pub type PdeContactMap = ContactMap;

impl ContactMap {
    pub fn parse(
        label: &str,
        kind: JetKind,
        texts: &[&str],
        params: &[&str],
    ) -> Result<Self, JetError> {
        let components = parse_components(kind, texts, params)?;
        Ok(ContactMap {
            label: label.into(),
            kind,
            components,
            inverse: None,
        })
    }

    pub fn ode(label: &str, texts: [&str; 3]) -> Result<Self, JetError> {
        Self::parse(label, JetKind::Ode, &texts, &[])
    }

    pub fn pde(label: &str, texts: [&str; 5]) -> Result<Self, JetError> {
        Self::parse(label, JetKind::Pde, &texts, &[])
    }

    pub fn identity(kind: JetKind) -> Self {
        let texts = kind.vars();
        Self::parse("identity", kind, texts, &[]).expect("identity parses")
    }

    pub fn with_inverse(mut self, texts: &[&str], params: &[&str]) -> Result<Self, JetError> {
        self.inverse = Some(parse_components(self.kind, texts, params)?);
        Ok(self)
    }

    pub fn params(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in self.components.iter().chain(self.inverse.iter().flatten()) {
            for p in c.used_params() {
                if !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Fixes parameter values; the label gains `[name=value]`.
    pub fn instantiate(&self, values: &[(String, Rational)]) -> ContactMap {
        let used = self.params();
        let tag: Vec<String> = values
            .iter()
            .filter(|(n, _)| used.contains(n))
            .map(|(n, v)| format!("{n}={}", crate::rational::format_rational(v)))
            .collect();
        let label = if tag.is_empty() {
            self.label.clone()
        } else {
            format!("{}[{}]", self.label, tag.join(","))
        };
        ContactMap {
            label,
            kind: self.kind,
            components: self
                .components
                .iter()
                .map(|c| c.instantiate(values))
                .collect(),
            inverse: self
                .inverse
                .as_ref()
                .map(|inv| inv.iter().map(|c| c.instantiate(values)).collect()),
        }
    }

    /// `self ∘ inner`: substitutes the components of `inner` for the variables.
    pub fn compose(&self, inner: &ContactMap) -> Result<ContactMap, JetError> {
        if self.kind != inner.kind {
            return Err(JetError::Mismatch(
                "cannot compose maps of different jet spaces".into(),
            ));
        }
        let components = self
            .components
            .iter()
            .map(|c| c.substitute(&inner.components))
            .collect();
        let inverse = match (&self.inverse, &inner.inverse) {
            (Some(a), Some(b)) => Some(b.iter().map(|c| c.substitute(a)).collect()),
            _ => None,
        };
        Ok(ContactMap {
            label: format!("{}*{}", self.label, inner.label),
            kind: self.kind,
            components,
            inverse,
        })
    }

    /// Image of a point.
    pub fn apply<S: Scalar>(&self, point: &[S], ctx: &EvalContext) -> Result<Vec<S>, EvalError> {
        self.components.iter().map(|c| c.eval(point, ctx)).collect()
    }

    /// Image of a point under the declared inverse.
    pub fn apply_inverse(
        &self,
        point: &[Complex64],
        ctx: &EvalContext,
    ) -> Option<Result<Vec<Complex64>, EvalError>> {
        self.inverse
            .as_ref()
            .map(|inv| inv.iter().map(|c| c.eval(point, ctx)).collect())
    }

    /// Replaces one component by itself plus `delta`.
    pub fn perturbed(&self, component: usize, delta: f64) -> ContactMap {
        let mut out = self.clone();
        let shift = Expression::parse(&format!("{delta}"), &[])
            .expect("literal")
            .root()
            .clone();
        let c = &self.components[component];
        let root = Expr::Add(Box::new(c.root().clone()), Box::new(shift));
        out.components[component] =
            Expression::from_parts(c.vars().to_vec(), c.params().to_vec(), root);
        out.label = format!("{}+{delta}@{component}", self.label);
        out
    }
}

fn parse_components(
    kind: JetKind,
    texts: &[&str],
    params: &[&str],
) -> Result<Vec<Expression>, JetError> {
    if texts.len() != kind.dim() {
        return Err(JetError::Arity {
            expected: kind.dim(),
            got: texts.len(),
        });
    }
    texts
        .iter()
        .map(|t| Ok(Expression::parse_with_params(t, kind.vars(), params)?))
        .collect()
}

/// A scalar ODE `y^(n) = ω(x, y, …, y^(n-1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ode {
    pub order: usize,
    pub rhs: Expression,
}

impl Ode {
    pub fn parse(order: usize, rhs: &str) -> Result<Self, JetError> {
        Self::parse_with_params(order, rhs, &[])
    }

    pub fn parse_with_params(order: usize, rhs: &str, params: &[&str]) -> Result<Self, JetError> {
        if order == 0 || order > MAX_ORDER {
            return Err(JetError::Order(order));
        }
        Ok(Ode {
            order,
            rhs: Expression::parse_with_params(rhs, &jet_names(order)[..order + 1], params)?,
        })
    }

    pub fn instantiate(&self, values: &[(String, Rational)]) -> Ode {
        Ode {
            order: self.order,
            rhs: self.rhs.instantiate(values),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorRepr {
    /// Characteristic function `Q`.
    Characteristic(Expression),
    /// Coefficients of every jet coordinate, in coordinate order.
    Explicit(Vec<Expression>),
}

/// A contact generator on the first jet space of an ODE `(ξ, η, η⁽¹⁾)` or a
/// PDE `(τ, ξ, φ, φ^t, φ^x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub kind: JetKind,
    pub repr: GeneratorRepr,
}

impl GeneratorSpec {
    pub fn characteristic(kind: JetKind, q: &str) -> Result<Self, JetError> {
        Ok(GeneratorSpec {
            kind,
            repr: GeneratorRepr::Characteristic(Expression::parse(q, kind.vars())?),
        })
    }

    pub fn explicit(kind: JetKind, coefficients: &[&str]) -> Result<Self, JetError> {
        Ok(GeneratorSpec {
            kind,
            repr: GeneratorRepr::Explicit(parse_components(kind, coefficients, &[])?),
        })
    }

    /// Coefficient functions at a point. For a characteristic `Q` on the ODE
    /// jet space, `ξ = -Q_p`, `η = Q - p Q_p`, `η⁽¹⁾ = Q_x + p Q_y`; on the PDE
    /// jet space `τ = -Q_ut`, `ξ = -Q_ux`, `φ = Q - ut Q_ut - ux Q_ux`,
    /// `φ^t = Q_t + ut Q_u`, `φ^x = Q_x + ux Q_u`.
    pub fn coefficients<S: Scalar>(
        &self,
        point: &[S],
        ctx: &EvalContext,
    ) -> Result<Vec<S>, EvalError> {
        match &self.repr {
            GeneratorRepr::Explicit(cs) => cs.iter().map(|c| c.eval(point, ctx)).collect(),
            GeneratorRepr::Characteristic(q) => {
                let (v, g) = q.gradient(point, ctx)?;
                Ok(match self.kind {
                    JetKind::Ode => {
                        let p = point[2].clone();
                        vec![
                            -g[2].clone(),
                            v - p.clone() * g[2].clone(),
                            g[0].clone() + p * g[1].clone(),
                        ]
                    }
                    JetKind::Pde => {
                        let (ut, ux) = (point[3].clone(), point[4].clone());
                        vec![
                            -g[3].clone(),
                            -g[4].clone(),
                            v - ut.clone() * g[3].clone() - ux.clone() * g[4].clone(),
                            g[0].clone() + ut * g[2].clone(),
                            g[1].clone() + ux * g[2].clone(),
                        ]
                    }
                })
            }
        }
    }

    /// `X f` at a point, for `f` given by its gradient there.
    pub fn apply_to<S: Scalar>(
        &self,
        point: &[S],
        gradient: &[S],
        ctx: &EvalContext,
    ) -> Result<S, EvalError> {
        let coef = self.coefficients(point, ctx)?;
        Ok(coef
            .into_iter()
            .zip(gradient)
            .fold(S::real(0.0), |acc, (c, g)| acc + c * g.clone()))
    }
}

/// Characteristic `Q` to coefficient functions.
pub fn characteristic_to_generator(q: &Expression) -> GeneratorSpec {
    GeneratorSpec {
        kind: JetKind::Ode,
        repr: GeneratorRepr::Characteristic(q.clone()),
    }
}

/// Transformed jet `(x̂, ŷ, ŷ', …, ŷ^(order))` at `jet = (x, y, y', …, y^(order))`.
pub fn prolong(
    map: &ContactMap,
    jet: &[Complex64],
    order: usize,
    ctx: &EvalContext,
) -> Result<Vec<Complex64>, JetError> {
    if map.kind != JetKind::Ode {
        return Err(JetError::Mismatch("prolong needs an ODE map".into()));
    }
    if order == 0 || order > MAX_ORDER {
        return Err(JetError::Order(order));
    }
    if jet.len() < order + 2 {
        return Err(JetError::Arity {
            expected: order + 2,
            got: jet.len(),
        });
    }
    let len = order;
    let mut factorial = 1.0;
    let mut ys = Vec::with_capacity(len);
    let mut ps = Vec::with_capacity(len);
    for k in 0..len {
        if k > 0 {
            factorial *= k as f64;
        }
        ys.push(jet[1 + k] / factorial);
        ps.push(jet[2 + k] / factorial);
    }
    let mut xs = vec![Complex64::new(0.0, 0.0); len];
    xs[0] = jet[0];
    if len > 1 {
        xs[1] = Complex64::new(1.0, 0.0);
    }
    let point = [Taylor::new(xs), Taylor::new(ys), Taylor::new(ps)];
    let image = map.apply(&point, ctx)?;
    let dx = image[0].derivative();
    let mut out = vec![image[0].value(), image[1].value(), image[2].value()];
    if order >= 2 {
        let m = dx.value().norm();
        if m <= PROLONG_FLOOR || !m.is_finite() {
            return Err(JetError::Singular(m));
        }
    }
    let mut current = image[2].clone();
    for _ in 2..=order {
        current = current.derivative().div_series(&dx);
        out.push(current.value());
    }
    Ok(out)
}

fn gradients(
    map: &ContactMap,
    point: &[Complex64],
    ctx: &EvalContext,
) -> Result<Vec<Dual<Complex64>>, EvalError> {
    let n = point.len();
    let seeded: Vec<Dual<Complex64>> = point
        .iter()
        .enumerate()
        .map(|(k, &v)| Dual::variable(v, k, n))
        .collect();
    map.apply(&seeded, ctx)
}

fn ctx_for(opts: &CheckOptions) -> EvalContext {
    EvalContext::with_floor(opts.floor)
}

/// `max(|ŷ_x + p ŷ_y - (x̂_x + p x̂_y) ŷ'|, |ŷ_p - x̂_p ŷ'|)` at `(x, y, p)`.
fn contact_defect(map: &ContactMap, pt: &[Complex64], ctx: &EvalContext) -> Result<f64, EvalError> {
    let img = gradients(map, &pt[..3], ctx)?;
    let (xh, yh, ph) = (&img[0], &img[1], img[2].v);
    let p = pt[2];
    let r1 = yh.partial(0) + p * yh.partial(1) - (xh.partial(0) + p * xh.partial(1)) * ph;
    let r2 = yh.partial(2) - xh.partial(2) * ph;
    Ok(r1.norm().max(r2.norm()))
}

/// First-order contact condition at seeded complex samples.
pub fn contact_residual(map: &ContactMap, opts: &CheckOptions) -> VerificationReport {
    let ctx = ctx_for(opts);
    run_check("contact", &map.label, opts, |s| {
        Ok(contact_defect(map, &s.annulus_point(3), &ctx)?)
    })
}

/// Symmetry condition on the solution manifold, relative to `1 + |ŷ^(n)|`.
/// A map that is not contact at the sample cannot be a symmetry, so the
/// contact defect there counts as residual too.
pub fn symmetry_residual(ode: &Ode, map: &ContactMap, opts: &CheckOptions) -> VerificationReport {
    let ctx = ctx_for(opts);
    let n = ode.order;
    run_check("symmetry", &map.label, opts, |s| {
        let mut jet = s.annulus_point(n + 1);
        jet.push(ode.rhs.eval(&jet, &ctx)?);
        let image = prolong(map, &jet, n, &ctx)?;
        let expected = ode.rhs.eval(&image[..n + 1], &ctx)?;
        let top = image[n + 1];
        Ok(((top - expected).norm() / (1.0 + top.norm())).max(contact_defect(map, &jet, &ctx)?))
    })
}

fn check_b(b: &[Vec<f64>], n: usize) -> Result<(), JetError> {
    if b.len() != n || b.iter().any(|r| r.len() != n) {
        return Err(JetError::Arity {
            expected: n,
            got: b.len(),
        });
    }
    Ok(())
}

/// `X_i ẑ = Σ_l b_il ζ_l(ẑ)` for each transformed base coordinate `ẑ`
/// (`x̂, ŷ` for ODEs, `t̂, x̂, û` for PDEs) and its coefficient `ζ`.
pub fn determining_residual(
    generators: &[GeneratorSpec],
    b: &[Vec<f64>],
    map: &ContactMap,
    opts: &CheckOptions,
) -> Result<VerificationReport, JetError> {
    check_b(b, generators.len())?;
    if generators.iter().any(|g| g.kind != map.kind) {
        return Err(JetError::Mismatch(
            "generators and map live on different jet spaces".into(),
        ));
    }
    let ctx = ctx_for(opts);
    let kind = map.kind;
    let base = kind.base_dim();
    Ok(run_check("determining", &map.label, opts, |s| {
        let pt = draw(kind, s);
        let img = gradients(map, &pt, &ctx)?;
        let hat: Vec<Complex64> = img.iter().map(|d| d.v).collect();
        let hat_coefs: Vec<Vec<Complex64>> = generators
            .iter()
            .map(|g| g.coefficients(&hat, &ctx))
            .collect::<Result<_, _>>()?;
        let mut worst: f64 = 0.0;
        for (i, g) in generators.iter().enumerate() {
            let coef = g.coefficients(&pt, &ctx)?;
            for (z, image) in img.iter().enumerate().take(base) {
                let lhs = coef
                    .iter()
                    .enumerate()
                    .fold(Complex64::new(0.0, 0.0), |a, (k, c)| {
                        a + c * image.partial(k)
                    });
                let rhs = (0..generators.len()).fold(Complex64::new(0.0, 0.0), |a, l| {
                    a + b[i][l] * hat_coefs[l][z]
                });
                worst = worst.max((lhs - rhs).norm());
            }
        }
        Ok(worst)
    }))
}

/// Jet point for the given space: complex annulus for ODEs, the real box
/// `ux ∈ [0.1, 2]`, others in `[-2, 2]` for PDEs.
pub(crate) fn draw(kind: JetKind, s: &mut Sampler) -> Vec<Complex64> {
    match kind {
        JetKind::Ode => s.annulus_point(3),
        JetKind::Pde => crate::pde::draw_first_order(s),
    }
}

/// `[X_i, X_j] - Σ_k c_ijk X_k` on every coordinate function.
pub fn commutator_check(
    generators: &[GeneratorSpec],
    sc: &StructureConstants,
    label: &str,
    opts: &CheckOptions,
) -> Result<VerificationReport, JetError> {
    let n = generators.len();
    if n != sc.dim() {
        return Err(JetError::Arity {
            expected: sc.dim(),
            got: n,
        });
    }
    let Some(kind) = generators.first().map(|g| g.kind) else {
        return Err(JetError::Arity {
            expected: 1,
            got: 0,
        });
    };
    if generators.iter().any(|g| g.kind != kind) {
        return Err(JetError::Mismatch(
            "generators live on different jet spaces".into(),
        ));
    }
    let ctx = ctx_for(opts);
    let c: Vec<(usize, usize, usize, f64)> = sc
        .nonzero()
        .map(|(&(i, j, k), v)| (i - 1, j - 1, k - 1, to_f64(v)))
        .collect();
    Ok(run_check("commutator", label, opts, |s| {
        let pt = draw(kind, s);
        let d = pt.len();
        let seeded: Vec<Dual<Complex64>> = pt
            .iter()
            .enumerate()
            .map(|(k, &v)| Dual::variable(v, k, d))
            .collect();
        let coefs: Vec<Vec<Dual<Complex64>>> = generators
            .iter()
            .map(|g| g.coefficients(&seeded, &ctx))
            .collect::<Result<_, _>>()?;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                for f in 0..d {
                    let act = |a: usize, b: usize| {
                        (0..d).fold(Complex64::new(0.0, 0.0), |acc, k| {
                            acc + coefs[a][k].v * coefs[b][f].partial(k)
                        })
                    };
                    let bracket = act(i, j) - act(j, i);
                    let expected = c
                        .iter()
                        .filter(|(ci, cj, _, _)| *ci == i && *cj == j)
                        .fold(Complex64::new(0.0, 0.0), |acc, (_, _, k, v)| {
                            acc + *v * coefs[*k][f].v
                        });
                    worst = worst.max((bracket - expected).norm());
                }
            }
        }
        Ok(worst)
    }))
}

/// Verdict of [`is_uniform`].
#[derive(Debug, Clone, PartialEq)]
pub struct UniformVerdict {
    pub uniform: bool,
    /// `∂ŷ/∂y` when it is constant.
    pub k: Option<f64>,
    pub report: VerificationReport,
}

/// Whether `x̂, ŷ'` are free of `y` and `ŷ = k y + Θ(x, p)` with constant real `k ≠ 0`.
pub fn is_uniform(map: &ContactMap, opts: &CheckOptions) -> UniformVerdict {
    const TOL: f64 = 1e-9;
    let ctx = ctx_for(opts);
    let mut k0: Option<Complex64> = None;
    let report = run_check("uniform", &map.label, &opts.with_tol(TOL), |s| {
        let pt = s.annulus_point(3);
        let img = gradients(map, &pt, &ctx)?;
        let k = img[1].partial(1);
        let first = *k0.get_or_insert(k);
        let drift = (k - first).norm() / (1.0 + first.norm());
        Ok(img[0]
            .partial(1)
            .norm()
            .max(img[2].partial(1).norm())
            .max(drift))
    });
    let k = k0
        .filter(|k| k.im.abs() <= TOL && k.re.abs() > TOL)
        .map(|k| k.re);
    UniformVerdict {
        uniform: report.passed && k.is_some(),
        k,
        report,
    }
}

/// `f_x h_p - f_p h_x - b` for `f, h` over `(x, p)`.
pub fn one_dim_compat_residual(
    f: &Expression,
    h: &Expression,
    b: f64,
    opts: &CheckOptions,
) -> VerificationReport {
    let ctx = ctx_for(opts);
    run_check("compat", "f,h", opts, |s| {
        let pt = s.annulus_point(2);
        let (_, gf) = f.gradient(&pt, &ctx)?;
        let (_, gh) = h.gradient(&pt, &ctx)?;
        Ok((gf[0] * gh[1] - gf[1] * gh[0] - b).norm())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() <= 1e-12 * (1.0 + b.norm())
    }

    fn ode31() -> Ode {
        Ode::parse(3, "q^2/x - q/p").unwrap()
    }

    #[test]
    fn characteristic_examples() {
        let ctx = EvalContext::default();
        let pt = [c(0.7, 0.2), c(-1.1, 0.4), c(0.5, -0.9)];
        let one = GeneratorSpec::characteristic(JetKind::Ode, "1").unwrap();
        let co = one.coefficients(&pt, &ctx).unwrap();
        assert_eq!(co, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let x2 = GeneratorSpec::characteristic(JetKind::Ode, "y - x*p/2").unwrap();
        let co = x2.coefficients(&pt, &ctx).unwrap();
        assert!(close(co[0], pt[0] / 2.0) && close(co[1], pt[1]) && close(co[2], pt[2] / 2.0));
    }

    #[test]
    fn prolongation_examples() {
        let ctx = EvalContext::default();
        let jet = [
            c(0.8, 0.1),
            c(-0.3, 0.5),
            c(1.2, -0.4),
            c(0.6, 0.7),
            c(-1.3, 0.2),
        ];
        let id = prolong(&ContactMap::identity(JetKind::Ode), &jet, 3, &ctx).unwrap();
        for k in 0..5 {
            assert!(close(id[k], jet[k]));
        }
        let legendre = ContactMap::ode("legendre", ["p", "x*p - y", "x"]).unwrap();
        let out = prolong(&legendre, &jet, 3, &ctx).unwrap();
        assert!(close(out[3], 1.0 / jet[3]));
        assert!(close(out[4], -jet[4] / (jet[3] * jet[3] * jet[3])));
        let g1 = ContactMap::ode("g1", ["i*x", "-y", "i*p"]).unwrap();
        let out = prolong(&g1, &jet, 3, &ctx).unwrap();
        assert!(close(out[3], jet[3]));
        assert!(close(out[4], -c(0.0, 1.0) * jet[4]));
    }

    #[test]
    fn singular_prolongation_is_reported() {
        let ctx = EvalContext::default();
        let flat = ContactMap::ode("flat", ["1", "y", "p"]).unwrap();
        let jet = [c(0.5, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)];
        assert!(matches!(
            prolong(&flat, &jet, 2, &ctx),
            Err(JetError::Singular(_))
        ));
    }

    #[test]
    fn contact_examples() {
        let opts = CheckOptions::default();
        let legendre = ContactMap::ode("legendre", ["p", "x*p - y", "x"]).unwrap();
        assert!(contact_residual(&legendre, &opts).max_residual < 1e-14);
        assert!(contact_residual(&ContactMap::identity(JetKind::Ode), &opts).passed);
        let bad = ContactMap::ode("bad", ["x", "y", "2*p"]).unwrap();
        let r = contact_residual(&bad, &opts);
        assert!(!r.passed && r.max_residual > 0.1);
    }

    #[test]
    fn ode31_symmetries() {
        let opts = CheckOptions::default();
        let g1 = ContactMap::ode("g1", ["i*x", "-y", "i*p"]).unwrap();
        assert!(symmetry_residual(&ode31(), &g1, &opts).max_residual <= 1e-10);
        assert!(symmetry_residual(&ode31(), &ContactMap::identity(JetKind::Ode), &opts).passed);
        let bent = ContactMap::ode("g1'", ["i*x", "-y + 0.01*x", "i*p"]).unwrap();
        assert!(!symmetry_residual(&ode31(), &bent, &opts).passed);
    }

    #[test]
    fn ode31_determining() {
        let opts = CheckOptions::default();
        let gens = vec![
            GeneratorSpec::characteristic(JetKind::Ode, "1").unwrap(),
            GeneratorSpec::characteristic(JetKind::Ode, "y - x*p/2").unwrap(),
        ];
        let g1 = ContactMap::ode("g1", ["i*x", "-y", "i*p"]).unwrap();
        let minus = vec![vec![-1.0, 0.0], vec![0.0, 1.0]];
        let plus = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(
            determining_residual(&gens, &minus, &g1, &opts)
                .unwrap()
                .passed
        );
        assert!(
            !determining_residual(&gens, &plus, &g1, &opts)
                .unwrap()
                .passed
        );
        let id = ContactMap::identity(JetKind::Ode);
        assert!(
            determining_residual(&gens, &plus, &id, &opts)
                .unwrap()
                .passed
        );
        assert!(determining_residual(&gens, &[vec![1.0]], &id, &opts).is_err());
    }

    #[test]
    fn commutators() {
        let opts = CheckOptions::default();
        let sc = StructureConstants::from_brackets(2, [(1, 2, vec![(1, rat(1))])]).unwrap();
        let gens = vec![
            GeneratorSpec::explicit(JetKind::Ode, &["0", "1", "0"]).unwrap(),
            GeneratorSpec::explicit(JetKind::Ode, &["x/2", "y", "p/2"]).unwrap(),
        ];
        assert!(
            commutator_check(&gens, &sc, "a1", &opts)
                .unwrap()
                .max_residual
                < 1e-14
        );
        let wrong = StructureConstants::from_brackets(2, [(1, 2, vec![(1, rat(-1))])]).unwrap();
        assert!(!commutator_check(&gens, &wrong, "a1", &opts).unwrap().passed);
        let single = vec![GeneratorSpec::characteristic(JetKind::Ode, "x*p").unwrap()];
        assert!(
            commutator_check(
                &single,
                &StructureConstants::abelian(1).unwrap(),
                "one",
                &opts
            )
            .unwrap()
            .passed
        );
    }

    #[test]
    fn uniformity() {
        let opts = CheckOptions::default();
        let g3 = ContactMap::ode("g3", ["x*p^2", "2*x*p - y", "p^-1"]).unwrap();
        let v = is_uniform(&g3, &opts);
        assert!(v.uniform);
        assert!((v.k.unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(
            is_uniform(&ContactMap::identity(JetKind::Ode), &opts).k,
            Some(1.0)
        );
        assert!(!is_uniform(&ContactMap::ode("s", ["x + y", "y", "p"]).unwrap(), &opts).uniform);
    }

    #[test]
    fn compatibility() {
        let opts = CheckOptions::default();
        let xp = ["x", "p"];
        let e = |t: &str| Expression::parse(t, &xp).unwrap();
        assert!(
            one_dim_compat_residual(&e("-(x + 2*pi*p)"), &e("p"), -1.0, &opts).max_residual
                <= 1e-12
        );
        assert!(one_dim_compat_residual(&e("x"), &e("p"), 1.0, &opts).passed);
        let r = one_dim_compat_residual(&e("x"), &e("x"), 1.0, &opts);
        assert!((r.max_residual - 1.0).abs() < 1e-15);
    }
}
