//! Scalars for expression evaluation: complex doubles, forward-mode duals
//! with any number of directions, and truncated Taylor series. The latter two
//! are generic so they nest (second partials are `Dual<Dual<Complex64>>`).

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

pub trait Scalar:
    Clone + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn constant(c: Complex64) -> Self;
    /// The plain value with all infinitesimal parts dropped.
    fn value(&self) -> Complex64;
    fn recip(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sqrt(&self) -> Self;

    fn real(c: f64) -> Self {
        Self::constant(Complex64::new(c, 0.0))
    }

    /// `|a|` for real-valued `a`; callers check the imaginary part first.
    fn abs(&self) -> Self {
        if self.value().re < 0.0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn scale(&self, c: Complex64) -> Self {
        self.clone() * Self::constant(c)
    }

    fn div(&self, other: &Self) -> Self {
        self.clone() * other.recip()
    }

    fn powi(&self, n: i64) -> Self {
        let base = if n < 0 { self.recip() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Self::real(1.0);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * sq.clone();
            }
            e >>= 1;
            if e > 0 {
                sq = sq.clone() * sq;
            }
        }
        acc
    }

    /// Principal-branch power `exp(e · ln a)`.
    fn pow(&self, e: &Self) -> Self {
        (e.clone() * self.ln()).exp()
    }
}

impl Scalar for Complex64 {
    fn constant(c: Complex64) -> Self {
        c
    }
    fn value(&self) -> Complex64 {
        *self
    }
    fn recip(&self) -> Self {
        Complex64::new(1.0, 0.0) / self
    }
    fn exp(&self) -> Self {
        Complex64::exp(*self)
    }
    fn ln(&self) -> Self {
        Complex64::ln(*self)
    }
    fn sin(&self) -> Self {
        Complex64::sin(*self)
    }
    fn cos(&self) -> Self {
        Complex64::cos(*self)
    }
    fn sqrt(&self) -> Self {
        Complex64::sqrt(*self)
    }
}

/// `v + Σ d_k ε_k` with `ε_j ε_k = 0`. Missing directions are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual<S> {
    pub v: S,
    pub d: Vec<S>,
}

impl<S: Scalar> Dual<S> {
    pub fn constant_of(v: S) -> Self {
        Dual { v, d: Vec::new() }
    }

    /// Independent variable number `index` out of `count` directions.
    pub fn variable(v: S, index: usize, count: usize) -> Self {
        let d = (0..count)
            .map(|k| S::real(if k == index { 1.0 } else { 0.0 }))
            .collect();
        Dual { v, d }
    }

    pub fn partial(&self, k: usize) -> S {
        self.d.get(k).cloned().unwrap_or_else(|| S::real(0.0))
    }

    fn chain(&self, v: S, slope: S) -> Self {
        Dual {
            v,
            d: self.d.iter().map(|x| slope.clone() * x.clone()).collect(),
        }
    }
}

fn zip_with<S: Clone>(a: &[S], b: &[S], zero: impl Fn() -> S, f: impl Fn(S, S) -> S) -> Vec<S> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| {
            let x = a.get(k).cloned().unwrap_or_else(&zero);
            let y = b.get(k).cloned().unwrap_or_else(&zero);
            f(x, y)
        })
        .collect()
}

impl<S: Scalar> Add for Dual<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual {
            v: self.v + o.v,
            d: zip_with(&self.d, &o.d, || S::real(0.0), |a, b| a + b),
        }
    }
}

impl<S: Scalar> Sub for Dual<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual {
            v: self.v - o.v,
            d: zip_with(&self.d, &o.d, || S::real(0.0), |a, b| a - b),
        }
    }
}

impl<S: Scalar> Mul for Dual<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (av, bv) = (self.v.clone(), o.v.clone());
        let d = zip_with(
            &self.d,
            &o.d,
            || S::real(0.0),
            |a, b| a * bv.clone() + av.clone() * b,
        );
        Dual { v: self.v * o.v, d }
    }
}

impl<S: Scalar> Neg for Dual<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual {
            v: -self.v,
            d: self.d.into_iter().map(|x| -x).collect(),
        }
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    fn constant(c: Complex64) -> Self {
        Dual::constant_of(S::constant(c))
    }
    fn value(&self) -> Complex64 {
        self.v.value()
    }
    fn recip(&self) -> Self {
        let r = self.v.recip();
        let slope = -(r.clone() * r.clone());
        self.chain(r, slope)
    }
    fn exp(&self) -> Self {
        let e = self.v.exp();
        self.chain(e.clone(), e)
    }
    fn ln(&self) -> Self {
        self.chain(self.v.ln(), self.v.recip())
    }
    fn sin(&self) -> Self {
        self.chain(self.v.sin(), self.v.cos())
    }
    fn cos(&self) -> Self {
        self.chain(self.v.cos(), -self.v.sin())
    }
    fn sqrt(&self) -> Self {
        let r = self.v.sqrt();
        let slope = r.recip().scale(Complex64::new(0.5, 0.0));
        self.chain(r, slope)
    }
}

/// Truncated power series `Σ c_k s^k`. Missing high coefficients are zero,
/// so constants are length-1 series; products truncate at the longer operand.
#[derive(Debug, Clone, PartialEq)]
pub struct Taylor<S> {
    pub c: Vec<S>,
}

impl<S: Scalar> Taylor<S> {
    pub fn new(c: Vec<S>) -> Self {
        assert!(!c.is_empty(), "series needs a constant term");
        Taylor { c }
    }

    pub fn coeff(&self, k: usize) -> S {
        self.c.get(k).cloned().unwrap_or_else(|| S::real(0.0))
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// `d/ds`; the result is one term shorter (a constant stays a zero constant).
    pub fn derivative(&self) -> Self {
        if self.c.len() == 1 {
            return Taylor {
                c: vec![S::real(0.0)],
            };
        }
        Taylor {
            c: (1..self.c.len())
                .map(|k| self.c[k].scale(Complex64::new(k as f64, 0.0)))
                .collect(),
        }
    }

    pub fn truncate(mut self, len: usize) -> Self {
        self.c.truncate(len.max(1));
        self
    }

    fn with_len(&self, n: usize) -> Vec<S> {
        (0..n).map(|k| self.coeff(k)).collect()
    }
}

fn kf(k: usize) -> Complex64 {
    Complex64::new(k as f64, 0.0)
}

impl<S: Scalar> Add for Taylor<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Taylor {
            c: zip_with(&self.c, &o.c, || S::real(0.0), |a, b| a + b),
        }
    }
}

impl<S: Scalar> Sub for Taylor<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Taylor {
            c: zip_with(&self.c, &o.c, || S::real(0.0), |a, b| a - b),
        }
    }
}

impl<S: Scalar> Mul for Taylor<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let c = (0..n)
            .map(|k| {
                (0..=k).fold(S::real(0.0), |acc, j| {
                    match (self.c.get(j), o.c.get(k - j)) {
                        (Some(a), Some(b)) => acc + a.clone() * b.clone(),
                        _ => acc,
                    }
                })
            })
            .collect();
        Taylor { c }
    }
}

impl<S: Scalar> Neg for Taylor<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Taylor {
            c: self.c.into_iter().map(|x| -x).collect(),
        }
    }
}

impl<S: Scalar> Scalar for Taylor<S> {
    fn constant(c: Complex64) -> Self {
        Taylor {
            c: vec![S::constant(c)],
        }
    }
    fn value(&self) -> Complex64 {
        self.c[0].value()
    }
    fn recip(&self) -> Self {
        let a = &self.c;
        let inv0 = a[0].recip();
        let mut b: Vec<S> = vec![inv0.clone()];
        for k in 1..a.len() {
            let s = (1..=k).fold(S::real(0.0), |acc, j| acc + a[j].clone() * b[k - j].clone());
            b.push(-(s * inv0.clone()));
        }
        Taylor { c: b }
    }
    fn exp(&self) -> Self {
        let a = &self.c;
        let mut e = vec![a[0].exp()];
        for k in 1..a.len() {
            let s = (1..=k).fold(S::real(0.0), |acc, j| {
                acc + a[j].scale(kf(j)) * e[k - j].clone()
            });
            e.push(s.scale(kf(k).inv()));
        }
        Taylor { c: e }
    }
    fn ln(&self) -> Self {
        let a = &self.c;
        let inv0 = a[0].recip();
        let mut l = vec![a[0].ln()];
        for k in 1..a.len() {
            let s = (1..k).fold(S::real(0.0), |acc, j| {
                acc + l[j].scale(kf(j)) * a[k - j].clone()
            });
            l.push((a[k].clone() - s.scale(kf(k).inv())) * inv0.clone());
        }
        Taylor { c: l }
    }
    fn sin(&self) -> Self {
        sin_cos(self).0
    }
    fn cos(&self) -> Self {
        sin_cos(self).1
    }
    fn sqrt(&self) -> Self {
        let a = &self.c;
        let r0 = a[0].sqrt();
        let half_inv = r0.recip().scale(Complex64::new(0.5, 0.0));
        let mut r = vec![r0];
        for k in 1..a.len() {
            let s = (1..k).fold(S::real(0.0), |acc, j| acc + r[j].clone() * r[k - j].clone());
            r.push((a[k].clone() - s) * half_inv.clone());
        }
        Taylor { c: r }
    }
}

fn sin_cos<S: Scalar>(t: &Taylor<S>) -> (Taylor<S>, Taylor<S>) {
    let a = &t.c;
    let mut s = vec![a[0].sin()];
    let mut c = vec![a[0].cos()];
    for k in 1..a.len() {
        let inv = kf(k).inv();
        let sk = (1..=k).fold(S::real(0.0), |acc, j| {
            acc + a[j].scale(kf(j)) * c[k - j].clone()
        });
        let ck = (1..=k).fold(S::real(0.0), |acc, j| {
            acc + a[j].scale(kf(j)) * s[k - j].clone()
        });
        s.push(sk.scale(inv));
        c.push(-ck.scale(inv));
    }
    (Taylor { c: s }, Taylor { c })
}

impl<S: Scalar> Taylor<S> {
    /// Quotient with the numerator's length; a shorter denominator is a
    /// polynomial, so its missing coefficients are zero.
    pub fn div_series(&self, other: &Self) -> Self {
        let n = self.c.len();
        let num = Taylor {
            c: self.with_len(n),
        };
        let den = Taylor {
            c: other.with_len(n),
        };
        (num * den.recip()).truncate(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() <= 1e-12 * (1.0 + b.norm())
    }

    #[test]
    fn dual_derivative_of_square() {
        let x = Dual::variable(c(3.0), 0, 1);
        let y = x.clone() * x;
        assert!(close(y.partial(0), c(6.0)));
    }

    #[test]
    fn nested_dual_gives_second_derivative() {
        // f = exp(2x), f'' = 4 exp(2x)
        let inner = Dual::variable(c(0.5), 0, 1);
        let x = Dual {
            v: inner.clone(),
            d: vec![Dual::constant_of(c(1.0))],
        };
        let f = x.scale(c(2.0)).exp();
        assert!(close(f.partial(0).partial(0), c(4.0) * c(1.0).exp()));
    }

    #[test]
    fn taylor_matches_known_series() {
        // exp(s) at 0
        let s = Taylor::new(vec![c(0.0), c(1.0), c(0.0), c(0.0), c(0.0)]);
        let e = s.exp();
        let want = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0];
        for (k, w) in want.iter().enumerate() {
            assert!(close(e.coeff(k), c(*w)));
        }
        // ln(1 + s) = s - s^2/2 + s^3/3
        let l = (Taylor::real(1.0) + s.clone()).ln();
        assert!(close(l.coeff(3), c(1.0 / 3.0)));
        // sin^2 + cos^2 = 1
        let t = Taylor::new(vec![c(0.3), c(1.2), c(-0.4), c(0.7)]);
        let one = t.sin() * t.sin() + t.cos() * t.cos();
        assert!(close(one.coeff(0), c(1.0)));
        for k in 1..4 {
            assert!(one.coeff(k).norm() < 1e-12);
        }
        let r = t.clone().exp().sqrt();
        let sq = r.clone() * r;
        for k in 0..4 {
            assert!(close(sq.coeff(k), t.exp().coeff(k)));
        }
        let q = t.recip() * t.clone();
        assert!(close(q.coeff(0), c(1.0)) && q.coeff(2).norm() < 1e-12);
    }

    #[test]
    fn powi_handles_negative_exponents() {
        let x = c(2.0);
        assert!(close(x.powi(-3), c(0.125)));
        assert!(close(x.powi(0), c(1.0)));
        assert!(close(x.powi(5), c(32.0)));
    }
}
