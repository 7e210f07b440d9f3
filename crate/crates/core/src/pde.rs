//! Contact maps of the jet space `(t, x, u, ut, ux)` of a scalar PDE in two
//! independent variables, prolonged to second derivatives.

use num_complex::Complex64;

use crate::expr::{EvalContext, Expression};
use crate::jets::{determining_residual, ContactMap, GeneratorSpec, JetError, JetKind};
use crate::report::VerificationReport;
use crate::sampling::{run_check, CheckOptions, Sampler};
use crate::scalar::Dual;

/// Variables of the right-hand side of `u_tt = F(t, x, u, ut, ux, utx, uxx)`.
pub const PDE_RHS_VARS: [&str; 7] = ["t", "x", "u", "ut", "ux", "utx", "uxx"];
/// Smallest admissible determinant of the total Jacobian of `(t̂, x̂)`.
pub const JACOBIAN_FLOOR: f64 = 1e-8;

/// `u_tt = F(t, x, u, ut, ux, utx, uxx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pde {
    pub rhs: Expression,
}

impl Pde {
    pub fn parse(rhs: &str) -> Result<Self, JetError> {
        Ok(Pde {
            rhs: Expression::parse(rhs, &PDE_RHS_VARS)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeJetPoint {
    pub t: f64,
    pub x: f64,
    pub u: f64,
    pub ut: f64,
    pub ux: f64,
    pub utt: f64,
    pub utx: f64,
    pub uxx: f64,
}

impl PdeJetPoint {
    pub fn first_order(&self) -> [Complex64; 5] {
        [self.t, self.x, self.u, self.ut, self.ux].map(|v| Complex64::new(v, 0.0))
    }
}

/// Transformed jet: `(t̂, x̂, û, û_t, û_x)` and the hatted second derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeProlongation {
    pub first: Vec<Complex64>,
    pub utt: Complex64,
    pub utx: Complex64,
    pub uxx: Complex64,
    /// `|û_t̂x̂ - û_x̂t̂|` from the two linear systems.
    pub mixed_mismatch: f64,
}

/// Total derivatives `(D_t f, D_x f)` of a function given by its gradient.
fn total(g: &Dual<Complex64>, jp: &PdeJetPoint) -> (Complex64, Complex64) {
    let d = |k| g.partial(k);
    let dt = d(0) + jp.ut * d(2) + jp.utt * d(3) + jp.utx * d(4);
    let dx = d(1) + jp.ux * d(2) + jp.utx * d(3) + jp.uxx * d(4);
    (dt, dx)
}

fn image_with_gradients(
    map: &ContactMap,
    jp: &PdeJetPoint,
    ctx: &EvalContext,
) -> Result<Vec<Dual<Complex64>>, JetError> {
    if map.kind != JetKind::Pde {
        return Err(JetError::Mismatch(
            "expected a map of (t, x, u, ut, ux)".into(),
        ));
    }
    let pt = jp.first_order();
    let seeded: Vec<Dual<Complex64>> = pt
        .iter()
        .enumerate()
        .map(|(k, &v)| Dual::variable(v, k, 5))
        .collect();
    Ok(map.apply(&seeded, ctx)?)
}

/// Second-order prolongation at a jet point.
pub fn pde_prolong(
    map: &ContactMap,
    jp: &PdeJetPoint,
    ctx: &EvalContext,
) -> Result<PdeProlongation, JetError> {
    let img = image_with_gradients(map, jp, ctx)?;
    let (a11, a21) = total(&img[0], jp);
    let (a12, a22) = total(&img[1], jp);
    let det = a11 * a22 - a12 * a21;
    if det.norm() <= JACOBIAN_FLOOR || !det.norm().is_finite() {
        return Err(JetError::Singular(det.norm()));
    }
    // J (v1, v2) = (D_t f, D_x f), with J = [[D_t t̂, D_t x̂], [D_x t̂, D_x x̂]]
    let solve = |g: &Dual<Complex64>| {
        let (r1, r2) = total(g, jp);
        ((r1 * a22 - a12 * r2) / det, (a11 * r2 - a21 * r1) / det)
    };
    let (utt, utx) = solve(&img[3]);
    let (uxt, uxx) = solve(&img[4]);
    Ok(PdeProlongation {
        first: img.iter().map(|d| d.v).collect(),
        utt,
        utx,
        uxx,
        mixed_mismatch: (utx - uxt).norm(),
    })
}

pub(crate) fn draw_first_order(s: &mut Sampler) -> Vec<Complex64> {
    vec![
        s.real(-2.0, 2.0),
        s.real(-2.0, 2.0),
        s.real(-2.0, 2.0),
        s.real(-2.0, 2.0),
        s.real(0.1, 2.0),
    ]
}

fn draw_jet(s: &mut Sampler) -> PdeJetPoint {
    let f = draw_first_order(s);
    PdeJetPoint {
        t: f[0].re,
        x: f[1].re,
        u: f[2].re,
        ut: f[3].re,
        ux: f[4].re,
        utt: s.uniform(-2.0, 2.0),
        utx: s.uniform(-2.0, 2.0),
        uxx: s.uniform(-2.0, 2.0),
    }
}

fn contact_at(map: &ContactMap, jp: &PdeJetPoint, ctx: &EvalContext) -> Result<f64, JetError> {
    let img = image_with_gradients(map, jp, ctx)?;
    let (tt, tx) = total(&img[0], jp);
    let (xt, xx) = total(&img[1], jp);
    let (ut, ux) = total(&img[2], jp);
    let (pt, px) = (img[3].v, img[4].v);
    Ok((ut - pt * tt - px * xt)
        .norm()
        .max((ux - pt * tx - px * xx).norm()))
}

/// First-order contact condition, evaluated at two independent draws of the
/// second-derivative slots so that any dependence on them shows up.
pub fn pde_contact_residual(map: &ContactMap, opts: &CheckOptions) -> VerificationReport {
    let ctx = EvalContext::with_floor(opts.floor);
    run_check("pde-contact", &map.label, opts, |s| {
        let jp = draw_jet(s);
        let again = PdeJetPoint {
            utt: s.uniform(-2.0, 2.0),
            utx: s.uniform(-2.0, 2.0),
            uxx: s.uniform(-2.0, 2.0),
            ..jp
        };
        Ok(contact_at(map, &jp, &ctx)?.max(contact_at(map, &again, &ctx)?))
    })
}

/// `|û_t̂t̂ - F(hatted jet)|` with `utt := F` at each sample; the contact
/// defect and the mixed derivative mismatch count as residual too.
pub fn pde_symmetry_residual(
    pde: &Pde,
    map: &ContactMap,
    opts: &CheckOptions,
) -> VerificationReport {
    let ctx = EvalContext::with_floor(opts.floor);
    run_check("pde-symmetry", &map.label, opts, |s| {
        let mut jp = draw_jet(s);
        let c = |v: f64| Complex64::new(v, 0.0);
        let args = [jp.t, jp.x, jp.u, jp.ut, jp.ux, jp.utx, jp.uxx].map(c);
        jp.utt = pde.rhs.eval(&args, &ctx)?.re;
        let pr = pde_prolong(map, &jp, &ctx)?;
        let mut hat = pr.first.clone();
        hat.extend([pr.utx, pr.uxx]);
        let expected = pde.rhs.eval(&hat, &ctx)?;
        let defect = contact_at(map, &jp, &ctx)?;
        Ok((pr.utt - expected)
            .norm()
            .max(pr.mixed_mismatch)
            .max(defect))
    })
}

/// `X_i ẑ = Σ_l b_il ζ_l(hatted)` for `ẑ ∈ {t̂, x̂, û}`.
pub fn pde_determining_residual(
    generators: &[GeneratorSpec],
    b: &[Vec<f64>],
    map: &ContactMap,
    opts: &CheckOptions,
) -> Result<VerificationReport, JetError> {
    if map.kind != JetKind::Pde {
        return Err(JetError::Mismatch(
            "expected a map of (t, x, u, ut, ux)".into(),
        ));
    }
    determining_residual(generators, b, map, opts)
}

/// Index of the first candidate that satisfies the contact condition.
pub fn resolve_ordering(candidates: &[ContactMap], opts: &CheckOptions) -> Option<usize> {
    candidates
        .iter()
        .position(|m| pde_contact_residual(m, opts).passed)
}
