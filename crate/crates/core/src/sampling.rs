//! Seeded sample points and the per-sample driver shared by every check.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::expr::EvalError;
use crate::report::{ReportBuilder, VerificationReport};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: usize = 100;
pub const DEFAULT_TOL: f64 = 1e-8;
/// Smallest admissible divisor magnitude at a sample.
pub const DEFAULT_FLOOR: f64 = 1e-6;
const MAX_ATTEMPTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub floor: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            tol: DEFAULT_TOL,
            floor: DEFAULT_FLOOR,
        }
    }
}

impl CheckOptions {
    pub fn with_tol(self, tol: f64) -> Self {
        CheckOptions { tol, ..self }
    }

    pub fn with_samples(self, samples: usize) -> Self {
        CheckOptions { samples, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        CheckOptions { seed, ..self }
    }
}

/// Why a sample produced no residual.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleError {
    /// Near a singular locus; another point is drawn.
    Singular(String),
    /// Evaluation failed outright; the sample is skipped.
    Failed(String),
}

impl From<EvalError> for SampleError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Singular { .. } | EvalError::NonFinite { .. } => {
                SampleError::Singular(e.to_string())
            }
            other => SampleError::Failed(other.to_string()),
        }
    }
}

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Area-uniform point of the annulus `0.3 <= |z| <= 2`.
    pub fn annulus(&mut self) -> Complex64 {
        let r2: f64 = self.rng.gen_range(0.09..=4.0);
        let theta: f64 = self.rng.gen_range(0.0..std::f64::consts::TAU);
        Complex64::from_polar(r2.sqrt(), theta)
    }

    pub fn annulus_point(&mut self, n: usize) -> Vec<Complex64> {
        (0..n).map(|_| self.annulus()).collect()
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..=hi)
    }

    pub fn real(&mut self, lo: f64, hi: f64) -> Complex64 {
        Complex64::new(self.uniform(lo, hi), 0.0)
    }
}

/// Runs `residual` on `opts.samples` seeded draws, redrawing near
/// singularities up to ten times before recording a skip.
pub fn run_check<F>(
    check: &str,
    label: &str,
    opts: &CheckOptions,
    mut residual: F,
) -> VerificationReport
where
    F: FnMut(&mut Sampler) -> Result<f64, SampleError>,
{
    let mut sampler = Sampler::new(opts.seed);
    let mut report = ReportBuilder::new(check, label, opts.samples, opts.tol);
    for index in 0..opts.samples {
        let mut last = String::new();
        let mut done = false;
        for _ in 0..MAX_ATTEMPTS {
            match residual(&mut sampler) {
                Ok(r) => {
                    report.residual(r);
                    done = true;
                    break;
                }
                Err(SampleError::Singular(reason)) => last = reason,
                Err(SampleError::Failed(reason)) => {
                    last = reason;
                    break;
                }
            }
        }
        if !done {
            report.skip(index, last);
        }
    }
    report.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annulus_points_stay_in_range_and_repeat() {
        let mut a = Sampler::new(7);
        let mut b = Sampler::new(7);
        for _ in 0..1000 {
            let z = a.annulus();
            assert!(z.norm() >= 0.3 - 1e-12 && z.norm() <= 2.0 + 1e-12);
            assert_eq!(z, b.annulus());
        }
    }

    #[test]
    fn persistent_singularity_is_skipped() {
        let opts = CheckOptions::default().with_samples(10);
        let report = run_check("t", "t", &opts, |_| Err(SampleError::Singular("x".into())));
        assert_eq!(report.skipped.len(), 10);
        assert!(!report.passed);
        let mut n = 0;
        let report = run_check("t", "t", &opts, |_| {
            n += 1;
            if n % 2 == 0 {
                Ok(0.0)
            } else {
                Err(SampleError::Singular("x".into()))
            }
        });
        assert!(report.passed && report.skipped.is_empty());
    }
}
