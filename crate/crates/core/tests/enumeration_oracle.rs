//! The solver's families against brute-force enumeration of small integer
//! matrices. The constraint test here is written out from the structure
//! constants directly and does not go through the library's constraint
//! system.

use std::collections::BTreeMap;

use discsym_core::algebras;
use discsym_core::auto::{solve_families, BMatrixFamily};
use discsym_core::lie::StructureConstants;
use discsym_core::rational::{determinant, rat, to_f64, Rational};
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Oracle {
    n: usize,
    c: Vec<Vec<Vec<i64>>>,
    /// Constraints `(i, j)` and the last row they read.
    pairs: Vec<(usize, usize, usize)>,
}

impl Oracle {
    fn new(sc: &StructureConstants) -> Self {
        let n = sc.dim();
        let c: Vec<Vec<Vec<i64>>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n)
                            .map(|k| {
                                let v = to_f64(&sc.get(i + 1, j + 1, k + 1));
                                assert_eq!(v, v.round());
                                v as i64
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let last = (0..n).filter(|&k| c[i][j][k] != 0).fold(j, usize::max);
                pairs.push((i, j, last));
            }
        }
        Oracle { n, c, pairs }
    }

    fn pair_holds(&self, b: &[Vec<i64>], i: usize, j: usize) -> bool {
        (0..self.n).all(|m| {
            let mut s = 0;
            for l in 0..self.n {
                for k in 0..self.n {
                    s += self.c[l][k][m] * b[i][l] * b[j][k];
                }
            }
            for k in (0..self.n).filter(|&k| self.c[i][j][k] != 0) {
                s -= self.c[i][j][k] * b[k][m];
            }
            s == 0
        })
    }

    /// Every nonsingular matrix with entries in `values` preserving the
    /// brackets. Constraints that couple only two rows are tabulated and used
    /// for forward checking; the rest are tested once their rows are set.
    fn enumerate(&self, values: &[i64]) -> Vec<Vec<Vec<i64>>> {
        let rows: Vec<Vec<i64>> = (0..values.len().pow(self.n as u32))
            .map(|mut code| {
                (0..self.n)
                    .map(|_| {
                        let v = values[code % values.len()];
                        code /= values.len();
                        v
                    })
                    .collect()
            })
            .filter(|r: &Vec<i64>| r.iter().any(|&v| v != 0))
            .collect();
        let mut tables = BTreeMap::new();
        for &(i, j, last) in &self.pairs {
            if last != j {
                continue;
            }
            let mut scratch = vec![vec![0; self.n]; self.n];
            let table: Vec<Vec<bool>> = rows
                .iter()
                .map(|a| {
                    rows.iter()
                        .map(|b| {
                            scratch[i].clone_from(a);
                            scratch[j].clone_from(b);
                            self.pair_holds(&scratch, i, j)
                        })
                        .collect()
                })
                .collect();
            tables.insert((i, j), table);
        }
        let mut out = Vec::new();
        let domains = vec![(0..rows.len()).collect::<Vec<_>>(); self.n];
        self.extend(&rows, &tables, &mut Vec::new(), domains, &mut out);
        out
    }

    fn extend(
        &self,
        rows: &[Vec<i64>],
        tables: &BTreeMap<(usize, usize), Vec<Vec<bool>>>,
        chosen: &mut Vec<usize>,
        domains: Vec<Vec<usize>>,
        out: &mut Vec<Vec<Vec<i64>>>,
    ) {
        let r = chosen.len();
        if r == self.n {
            let m: Vec<Vec<Rational>> = chosen
                .iter()
                .map(|&k| rows[k].iter().map(|&v| rat(v)).collect())
                .collect();
            if !determinant(&m).is_zero() {
                out.push(chosen.iter().map(|&k| rows[k].clone()).collect());
            }
            return;
        }
        for &cand in &domains[r] {
            chosen.push(cand);
            let b: Vec<Vec<i64>> = chosen.iter().map(|&k| rows[k].clone()).collect();
            let direct_ok = self
                .pairs
                .iter()
                .filter(|p| p.2 == r && !tables.contains_key(&(p.0, p.1)))
                .all(|&(i, j, _)| self.pair_holds(&b, i, j));
            if direct_ok {
                let mut next = domains.clone();
                let mut alive = true;
                for (later, dom) in next.iter_mut().enumerate().skip(r + 1) {
                    if let Some(t) = tables.get(&(r, later)) {
                        dom.retain(|&x| t[cand][x]);
                        alive &= !dom.is_empty();
                    }
                }
                if alive {
                    self.extend(rows, tables, chosen, next, out);
                }
            }
            chosen.pop();
        }
    }
}

fn to_rational(m: &[Vec<i64>]) -> Vec<Vec<Rational>> {
    m.iter()
        .map(|r| r.iter().map(|&v| rat(v)).collect())
        .collect()
}

fn support(m: &[Vec<i64>]) -> String {
    m.iter()
        .map(|r| {
            r.iter()
                .map(|&v| if v == 0 { '.' } else { '*' })
                .collect::<String>()
        })
        .collect::<Vec<_>>()
        .join("/")
}

fn check_complete(sc: &StructureConstants, values: &[i64]) -> (usize, BTreeMap<String, usize>) {
    let oracle = Oracle::new(sc);
    let fams = solve_families(sc).unwrap();
    let found = oracle.enumerate(values);
    let mut clusters = BTreeMap::new();
    for m in &found {
        let r = to_rational(m);
        assert!(fams.iter().any(|f| f.contains(&r)), "{m:?} is in no family");
        *clusters.entry(support(m)).or_insert(0) += 1;
    }
    (found.len(), clusters)
}

fn check_sound(sc: &StructureConstants, fams: &[BMatrixFamily]) {
    let oracle = Oracle::new(sc);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for f in fams {
        for _ in 0..20 {
            let Some((_, m)) = f.sample(&mut rng) else {
                continue;
            };
            // scale to integers row by row is not possible in general, so
            // test the bracket identity in rationals
            let n = sc.dim();
            for (i, j, _) in &oracle.pairs {
                for k in 0..n {
                    let mut s = Rational::zero();
                    for l in 0..n {
                        for q in 0..n {
                            s += rat(oracle.c[l][q][k]) * &m[*i][l] * &m[*j][q];
                        }
                    }
                    for q in 0..n {
                        s -= rat(oracle.c[*i][*j][q]) * &m[q][k];
                    }
                    assert!(s.is_zero(), "family sample violates ({i},{j},{k})");
                }
            }
        }
    }
}

#[test]
fn a1_by_enumeration() {
    let sc = algebras::a1();
    let (count, _) = check_complete(&sc, &[-1, 0, 1]);
    // b12 = 0, b22 = 1, b11 = ±1, b21 free
    assert_eq!(count, 6);
    check_sound(&sc, &solve_families(&sc).unwrap());
}

#[test]
fn a1_sum_by_enumeration() {
    let sc = algebras::a1_sum();
    let (count, clusters) = check_complete(&sc, &[-1, 0, 1]);
    assert!(count > 0);
    // block-diagonal and block-swapping automorphisms
    assert!(clusters.keys().any(|s| s.starts_with("*...")));
    assert!(clusters.keys().any(|s| s.starts_with("..*.")));
    check_sound(&sc, &solve_families(&sc).unwrap());
}

#[test]
fn a1_sum_support_patterns_with_wider_values() {
    let sc = algebras::a1_sum();
    let (_, clusters) = check_complete(&sc, &[-1, 0, 1, 2]);
    let fams = solve_families(&sc).unwrap();
    // every observed support is a specialization of some family support
    for pattern in clusters.keys() {
        let fits = fams.iter().any(|f| {
            let fs = f.support().join("/");
            fs.chars()
                .zip(pattern.chars())
                .all(|(a, b)| a == b || a == '*')
        });
        assert!(fits, "{pattern}");
    }
}

#[test]
fn heat_algebra_by_enumeration() {
    let sc = algebras::heat5();
    let (count, _) = check_complete(&sc, &[-1, 0, 1]);
    assert!(count > 0);
    check_sound(&sc, &solve_families(&sc).unwrap());
}

/// An equation `(i, j, n)` is trivial iff it vanishes identically; a
/// polynomial of degree two that vanishes at 50 random integer matrices is
/// taken to be zero.
fn nontrivial_equations(sc: &StructureConstants) -> usize {
    use rand::Rng;
    let oracle = Oracle::new(sc);
    let n = oracle.n;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let points: Vec<Vec<Vec<i64>>> = (0..50)
        .map(|_| {
            (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(-20..=20)).collect())
                .collect()
        })
        .collect();
    let mut count = 0;
    for i in 0..n {
        for j in i + 1..n {
            for m in 0..n {
                let nonzero = points.iter().any(|b| {
                    let mut s = 0;
                    for l in 0..n {
                        for k in 0..n {
                            s += oracle.c[l][k][m] * b[i][l] * b[j][k];
                        }
                    }
                    for k in 0..n {
                        s -= oracle.c[i][j][k] * b[k][m];
                    }
                    s != 0
                });
                count += nonzero as usize;
            }
        }
    }
    count
}

#[test]
fn constraint_counts() {
    use discsym_core::auto::ConstraintSystem;
    for (sc, expected) in [
        (algebras::a1(), 2),
        (algebras::a1_sum(), 16),
        (algebras::heat5(), 38),
    ] {
        assert_eq!(nontrivial_equations(&sc), expected);
        assert_eq!(ConstraintSystem::generate(&sc).len(), expected);
    }
}
