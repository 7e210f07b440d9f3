use std::sync::OnceLock;

use discsym_core::auto::{solve_families, BMatrixFamily, ConstraintSystem};
use discsym_core::catalog::Catalog;
use discsym_core::expr::{EvalContext, Expression};
use discsym_core::jets::ContactMap;
use discsym_core::lie::{mat_mul, StructureConstants};
use discsym_core::rational::{mat_mul as rat_mul, to_f64_matrix};
use discsym_core::sampling::Sampler;
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Solved = (String, StructureConstants, Vec<BMatrixFamily>);

fn algebras() -> &'static [Solved] {
    static CACHE: OnceLock<Vec<Solved>> = OnceLock::new();
    CACHE.get_or_init(|| {
        Catalog::bundled()
            .unwrap()
            .algebras
            .into_iter()
            .map(|(name, sc)| {
                let fams = solve_families(&sc).unwrap();
                (name, sc, fams)
            })
            .collect()
    })
}

fn close(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
}

fn scale(m: &[Vec<f64>]) -> f64 {
    m.iter().flatten().fold(1.0, |a, v| a.max(v.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn inner_automorphisms_preserve_the_constraints(seed in any::<u64>(), eps in -1.5f64..1.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (name, sc, fams) in algebras() {
            let sys = ConstraintSystem::generate(sc);
            let f = &fams[rng.gen_range(0..fams.len())];
            let Some((_, b)) = f.sample(&mut rng) else { continue };
            let j = rng.gen_range(1..=sc.dim());
            let a = sc.adjoint_exp(j, eps).unwrap();
            let ab = mat_mul(&a.matrix, &to_f64_matrix(&b));
            let s = scale(&ab);
            let r = sys.residual(&ab).unwrap();
            prop_assert!(r <= 1e-9 * s * s, "{name}: A({j}, {eps}) B residual {r}");
            // the inner automorphism is itself a solution
            let r = sys.residual(&a.matrix).unwrap();
            prop_assert!(r <= 1e-9 * scale(&a.matrix).powi(2), "{name}: A({j}, {eps}) residual {r}");
        }
    }

    #[test]
    fn adjoint_action_is_a_one_parameter_group(e1 in -1.0f64..1.0, e2 in -1.0f64..1.0) {
        for (name, sc, _) in algebras() {
            for j in 1..=sc.dim() {
                let a = sc.adjoint_exp(j, e1).unwrap().matrix;
                let b = sc.adjoint_exp(j, e2).unwrap().matrix;
                let ab = sc.adjoint_exp(j, e1 + e2).unwrap().matrix;
                prop_assert!(close(&mat_mul(&a, &b), &ab, 1e-10), "{name} X{j}");
                let inv = sc.adjoint_exp(j, -e1).unwrap().matrix;
                let id = sc.adjoint_exp(j, 0.0).unwrap().matrix;
                prop_assert!(close(&mat_mul(&a, &inv), &id, 1e-10), "{name} X{j} inverse");
            }
        }
    }

    #[test]
    fn exact_and_numeric_exponentials_agree(eps in -2.0f64..2.0) {
        for (name, sc, _) in algebras() {
            for j in 1..=sc.dim() {
                let exact = sc.adjoint_exp(j, eps).unwrap();
                let numeric = sc.adjoint_exp_numeric(j, eps).unwrap();
                prop_assert!(close(&exact.matrix, &numeric, 1e-10), "{name} X{j} exact={}", exact.is_exact());
            }
        }
    }

    #[test]
    fn solutions_are_closed_under_products(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (name, sc, fams) in algebras() {
            let sys = ConstraintSystem::generate(sc);
            let f = &fams[rng.gen_range(0..fams.len())];
            let g = &fams[rng.gen_range(0..fams.len())];
            let (Some((_, a)), Some((_, b))) = (f.sample(&mut rng), g.sample(&mut rng)) else { continue };
            prop_assert!(sys.residual_exact(&rat_mul(&a, &b)).unwrap().is_zero(), "{name}");
        }
    }
}

const VARS: [&str; 3] = ["x", "y", "p"];

fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..5) {
            0 => format!("{}", rng.gen_range(1..=9)),
            1 => format!("{}/{}", rng.gen_range(1..=5), rng.gen_range(2..=7)),
            k => VARS[k - 2].to_string(),
        };
    }
    let a = random_expr(rng, depth - 1);
    let b = random_expr(rng, depth - 1);
    match rng.gen_range(0..9) {
        0 => format!("{a} + {b}"),
        1 => format!("{a} - {b}"),
        2 => format!("{a} * ({b})"),
        3 => format!("({a}) / (3 + {b})"),
        4 => format!("-({a})^2"),
        5 => format!("({a})^(1/3)"),
        6 => format!("exp({a})"),
        7 => format!("{a} - -{b}"),
        _ => format!("cos({a}) * sin({b})"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn printed_expressions_parse_back(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let text = random_expr(&mut rng, 4);
        let e = Expression::parse(&text, &VARS).unwrap();
        let printed = e.to_string();
        let back = Expression::parse(&printed, &VARS).unwrap();
        prop_assert_eq!(back.to_string(), printed.clone());
        let pt = Sampler::new(seed).annulus_point(3);
        let ctx = EvalContext::default();
        if let (Ok(a), Ok(b)) = (e.eval(&pt, &ctx), back.eval(&pt, &ctx)) {
            prop_assert_eq!(a.is_finite(), b.is_finite());
            if a.is_finite() {
                prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()), "{} vs {}", text, printed);
            }
        }
    }
}

fn catalog_maps() -> Vec<ContactMap> {
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
    pool
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn composition_is_associative(i in 0usize..64, j in 0usize..64, k in 0usize..64, seed in any::<u64>()) {
        let pool = catalog_maps();
        let (a, b, c) = (&pool[i % pool.len()], &pool[j % pool.len()], &pool[k % pool.len()]);
        let left = a.compose(b).unwrap().compose(c).unwrap();
        let right = a.compose(&b.compose(c).unwrap()).unwrap();
        let ctx = EvalContext::default();
        let mut s = Sampler::new(seed);
        for _ in 0..8 {
            let pt = s.annulus_point(3);
            let (Ok(l), Ok(r)) = (left.apply(&pt, &ctx), right.apply(&pt, &ctx)) else { continue };
            for (u, v) in l.iter().zip(&r) {
                prop_assert!((u - v).norm() <= 1e-9 * (1.0 + v.norm()));
            }
        }
    }
}
