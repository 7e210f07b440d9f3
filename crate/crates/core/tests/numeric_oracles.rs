//! Automatic derivatives and prolongations against finite differences, and
//! functoriality of prolongation under composition.

use discsym_core::catalog::Catalog;
use discsym_core::expr::{EvalContext, Expression};
use discsym_core::jets::{prolong, ContactMap, JetKind};
use discsym_core::pde::{pde_prolong, PdeJetPoint};
use discsym_core::sampling::Sampler;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VARS: [&str; 3] = ["x", "y", "p"];

fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..5) {
            0 => format!("{}", rng.gen_range(1..=5)),
            1 => format!("{}.{}", rng.gen_range(0..3), rng.gen_range(1..10)),
            k => VARS[k - 2].to_string(),
        };
    }
    let a = random_expr(rng, depth - 1);
    match rng.gen_range(0..9) {
        0 => format!("({a}) + ({})", random_expr(rng, depth - 1)),
        1 => format!("({a}) - ({})", random_expr(rng, depth - 1)),
        2 | 3 => format!("({a}) * ({})", random_expr(rng, depth - 1)),
        4 => format!("({a}) / (2 + ({}))", random_expr(rng, depth - 1)),
        5 => format!("({a})^{}", rng.gen_range(2..=3)),
        6 => format!("sin({a})"),
        7 => format!("cos({a})"),
        _ => format!("exp(({a})/4)"),
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn ad_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut sampler = Sampler::new(8);
    let ctx = EvalContext::default();
    let h = 1e-5;
    let mut compared = 0;
    let mut attempts = 0;
    while compared < 1000 {
        attempts += 1;
        assert!(attempts < 5000, "too many unusable samples");
        let text = random_expr(&mut rng, 4);
        let e = Expression::parse(&text, &VARS).unwrap();
        let pt = sampler.annulus_point(3);
        let Ok((v, grad)) = e.gradient(&pt, &ctx) else {
            continue;
        };
        if !v.norm().is_finite() || v.norm() > 1e4 || grad.iter().any(|g| g.norm() > 1e4) {
            continue;
        }
        let mut ok = true;
        for k in 0..3 {
            let mut up = pt.clone();
            let mut down = pt.clone();
            up[k] += h;
            down[k] -= h;
            let (Ok(a), Ok(b)) = (e.eval(&up, &ctx), e.eval(&down, &ctx)) else {
                ok = false;
                break;
            };
            let fd = (a - b) / (2.0 * h);
            let scale = grad[k].norm().max(1.0);
            assert!(
                (fd - grad[k]).norm() <= 1e-6 * scale,
                "{text} d/d{}: ad {} fd {fd}",
                VARS[k],
                grad[k]
            );
        }
        if ok {
            compared += 1;
        }
    }
}

fn ode_pool() -> Vec<ContactMap> {
    let cat = Catalog::bundled().unwrap();
    let mut pool = Vec::new();
    for name in ["ode31", "ode38", "ode44"] {
        pool.extend(
            cat.entry(name)
                .unwrap()
                .group_maps()
                .into_iter()
                .map(|m| m.map),
        );
    }
    pool.push(ContactMap::ode("shear", ["x + y", "y", "p/(1 + p)"]).unwrap());
    pool.push(ContactMap::ode("scale", ["2*x", "3*y + x", "3*p/2 + 1/2"]).unwrap());
    pool
}

/// Jet `(x, y, y', …, y^(order))` on the annulus.
fn ode_jet(s: &mut Sampler, order: usize) -> Vec<Complex64> {
    s.annulus_point(order + 2)
}

#[test]
fn prolongation_is_functorial() {
    let pool = ode_pool();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut s = Sampler::new(5);
    let ctx = EvalContext::default();
    let mut checked = 0;
    while checked < 100 {
        let a = &pool[rng.gen_range(0..pool.len())];
        let b = &pool[rng.gen_range(0..pool.len())];
        let ab = a.compose(b).unwrap();
        let jet = ode_jet(&mut s, 3);
        let (Ok(direct), Ok(inner)) = (prolong(&ab, &jet, 3, &ctx), prolong(b, &jet, 3, &ctx))
        else {
            continue;
        };
        let Ok(outer) = prolong(a, &inner, 3, &ctx) else {
            continue;
        };
        for (u, v) in direct.iter().zip(&outer) {
            assert!(
                (u - v).norm() <= 1e-8 * (1.0 + v.norm()),
                "{} then {}: {u} vs {v}",
                b.label,
                a.label
            );
        }
        checked += 1;
    }
}

/// `ŷ''` along the image of a cubic curve by finite differences.
#[test]
fn ode_prolongation_matches_differences_along_a_curve() {
    let ctx = EvalContext::default();
    let mut s = Sampler::new(13);
    let h = 1e-4;
    for map in ode_pool() {
        for _ in 0..20 {
            let jet = ode_jet(&mut s, 2);
            let (x0, y0, p0, q0) = (jet[0], jet[1], jet[2], jet[3]);
            let at = |d: f64| {
                let pt = [x0 + d, y0 + p0 * d + q0 * d * d / 2.0, p0 + q0 * d];
                map.apply(&pt, &ctx)
            };
            let (Ok(up), Ok(down)) = (at(h), at(-h)) else {
                continue;
            };
            let Ok(pr) = prolong(&map, &jet, 2, &ctx) else {
                continue;
            };
            let fd = (up[2] - down[2]) / (up[0] - down[0]);
            assert!(
                (fd - pr[3]).norm() <= 1e-5 * (1.0 + fd.norm()),
                "{}: fd {fd} vs {}",
                map.label,
                pr[3]
            );
        }
    }
}

fn pde_pool() -> Vec<ContactMap> {
    let cat = Catalog::bundled().unwrap();
    let mut pool: Vec<ContactMap> = cat
        .entry("pde51")
        .unwrap()
        .maps
        .iter()
        .map(|m| m.map.clone())
        .collect();
    pool.push(pool[1].compose(&pool[0]).unwrap());
    pool
}

/// Hatted second derivatives from a quadratic germ surface through the jet
/// point, pushed through the map and differenced.
#[test]
fn pde_prolongation_matches_a_germ_surface() {
    let ctx = EvalContext::default();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let h = 1e-4;
    for map in pde_pool() {
        for _ in 0..30 {
            let mut r = |lo: f64, hi: f64| rng.gen_range(lo..hi);
            let jp = PdeJetPoint {
                t: r(-2.0, 2.0),
                x: r(-2.0, 2.0),
                u: r(-2.0, 2.0),
                ut: r(-2.0, 2.0),
                ux: r(0.1, 2.0),
                utt: r(-2.0, 2.0),
                utx: r(-2.0, 2.0),
                uxx: r(-2.0, 2.0),
            };
            let image = |dt: f64, dx: f64| {
                let u = jp.u
                    + jp.ut * dt
                    + jp.ux * dx
                    + 0.5 * jp.utt * dt * dt
                    + jp.utx * dt * dx
                    + 0.5 * jp.uxx * dx * dx;
                let ut = jp.ut + jp.utt * dt + jp.utx * dx;
                let ux = jp.ux + jp.utx * dt + jp.uxx * dx;
                map.apply(&[c(jp.t + dt), c(jp.x + dx), c(u), c(ut), c(ux)], &ctx)
                    .unwrap()
            };
            let d = |k: usize| -> [Complex64; 2] {
                let (tp, tm, xp, xm) =
                    (image(h, 0.0), image(-h, 0.0), image(0.0, h), image(0.0, -h));
                [(tp[k] - tm[k]) / (2.0 * h), (xp[k] - xm[k]) / (2.0 * h)]
            };
            let (dth, dxh) = (d(0), d(1));
            let det = dth[0] * dxh[1] - dxh[0] * dth[1];
            // [d_t f, d_x f] = [[T_t, X_t], [T_x, X_x]] [f_T, f_X]
            let solve = |g: [Complex64; 2]| {
                (
                    (g[0] * dxh[1] - dxh[0] * g[1]) / det,
                    (dth[0] * g[1] - dth[1] * g[0]) / det,
                )
            };
            let (utt, utx) = solve(d(3));
            let (_, uxx) = solve(d(4));
            let pr = pde_prolong(&map, &jp, &ctx).unwrap();
            for (fd, ad) in [(utt, pr.utt), (utx, pr.utx), (uxx, pr.uxx)] {
                assert!(
                    (fd - ad).norm() <= 1e-5 * (1.0 + ad.norm()),
                    "{}: fd {fd} vs {ad}",
                    map.label
                );
            }
        }
    }
}

#[test]
fn pde_maps_live_on_the_pde_space() {
    assert!(pde_pool().iter().all(|m| m.kind == JetKind::Pde));
}
