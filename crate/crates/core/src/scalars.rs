//! Root-of-unity scalars: exact exponents of q, quantum integers and factorials.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::{Add, Neg, Sub};

use crate::error::{FusionError, Result};

/// Rank and level data shared by every computation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QContext {
    /// Rank parameter: the algebra is sl_N.
    pub n: usize,
    /// Alcove level, at least N+1.
    pub ell: usize,
    /// Residual tolerance for equality assertions.
    pub tol: f64,
}

impl QContext {
    pub fn new(n: usize, ell: usize) -> Result<Self> {
        Self::with_tol(n, ell, 1e-9)
    }

    pub fn with_tol(n: usize, ell: usize, tol: f64) -> Result<Self> {
        if n < 2 {
            return Err(FusionError::Config(format!("N must be at least 2, got {n}")));
        }
        if ell < n + 1 {
            return Err(FusionError::Config(format!("ell must be at least N+1 = {}, got {ell}", n + 1)));
        }
        if !(tol > 0.0) {
            return Err(FusionError::Config(format!("tol must be positive, got {tol}")));
        }
        Ok(QContext { n, ell, tol })
    }

    /// The base scalar q = exp(iπ/ℓ).
    pub fn q(&self) -> Complex64 {
        Complex64::from_polar(1.0, PI / self.ell as f64)
    }

    /// Exponent with integer numerator over 2N.
    pub fn exp(&self, num: i64) -> QExponent {
        QExponent { num, den: 2 * self.n as i64 }
    }

    /// The exponent equal to the integer k.
    pub fn int_exp(&self, k: i64) -> QExponent {
        self.exp(k * 2 * self.n as i64)
    }
}

/// A rational exponent num/den of q with den = 2N.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QExponent {
    pub num: i64,
    pub den: i64,
}

impl QExponent {
    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Halve the exponent; exact when num is even, otherwise the denominator doubles.
    pub fn half(&self) -> HalfExponent {
        HalfExponent { num: self.num, den: 2 * self.den }
    }

    /// Reduce modulo 2ℓ, the period of q.
    pub fn modulo(&self, ell: usize) -> QExponent {
        let period = 2 * ell as i64 * self.den;
        QExponent { num: self.num.rem_euclid(period), den: self.den }
    }

    pub fn scale(&self, k: i64) -> QExponent {
        QExponent { num: self.num * k, den: self.den }
    }
}

impl Add for QExponent {
    type Output = QExponent;
    fn add(self, o: QExponent) -> QExponent {
        assert_eq!(self.den, o.den, "exponents over different denominators");
        QExponent { num: self.num + o.num, den: self.den }
    }
}

impl Sub for QExponent {
    type Output = QExponent;
    fn sub(self, o: QExponent) -> QExponent {
        self + (-o)
    }
}

impl Neg for QExponent {
    type Output = QExponent;
    fn neg(self) -> QExponent {
        QExponent { num: -self.num, den: self.den }
    }
}

/// Exponent over 4N, produced by square roots of ribbon scalars.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfExponent {
    pub num: i64,
    pub den: i64,
}

impl HalfExponent {
    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn modulo(&self, ell: usize) -> HalfExponent {
        let period = 2 * ell as i64 * self.den;
        HalfExponent { num: self.num.rem_euclid(period), den: self.den }
    }

    pub fn eval(&self, ctx: &QContext) -> Complex64 {
        Complex64::from_polar(1.0, PI * self.value() / ctx.ell as f64)
    }
}

/// q^r for an exact exponent r.
pub fn q_power(ctx: &QContext, r: QExponent) -> Complex64 {
    Complex64::from_polar(1.0, PI * r.value() / ctx.ell as f64)
}

/// q^x for a real exponent x; used only where the exponent is known in closed form.
pub fn q_real_power(ctx: &QContext, x: f64) -> Complex64 {
    Complex64::from_polar(1.0, PI * x / ctx.ell as f64)
}

/// Quantum integer [k]_q = sin(kπ/ℓ)/sin(π/ℓ).
pub fn q_int(ctx: &QContext, k: i64) -> Complex64 {
    let t = PI / ctx.ell as f64;
    Complex64::new((k as f64 * t).sin() / t.sin(), 0.0)
}

/// Quantum factorial [k]_q!; fails once a factor vanishes.
pub fn q_fact(ctx: &QContext, k: i64) -> Result<Complex64> {
    let mut acc = Complex64::new(1.0, 0.0);
    for j in 2..=k {
        let f = q_int(ctx, j);
        if f.norm() < ctx.tol {
            return Err(FusionError::VanishingQuantumFactorial { k, j });
        }
        acc *= f;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn q_power_examples() {
        let c = QContext::new(2, 3).unwrap();
        assert!(close(q_power(&c, c.int_exp(1)), Complex64::new(0.5, 3f64.sqrt() / 2.0)));
        assert!(close(q_power(&c, c.int_exp(0)), Complex64::new(1.0, 0.0)));
        // 3/2 = 6/4 over 2N = 4
        assert!(close(q_power(&c, c.exp(6)), Complex64::new(0.0, 1.0)));
    }

    #[test]
    fn q_int_examples() {
        let c3 = QContext::new(2, 3).unwrap();
        assert!(close(q_int(&c3, 2), Complex64::new(1.0, 0.0)));
        assert!(close(q_int(&c3, 1), Complex64::new(1.0, 0.0)));
        let c4 = QContext::new(2, 4).unwrap();
        assert!(close(q_int(&c4, 3), Complex64::new(1.0, 0.0)));
        // [2] = q + q^{-1}
        assert!(close(q_int(&c4, 2), c4.q() + c4.q().inv()));
    }

    #[test]
    fn q_fact_examples() {
        let c3 = QContext::new(2, 3).unwrap();
        assert!(close(q_fact(&c3, 2).unwrap(), Complex64::new(1.0, 0.0)));
        assert!(close(q_fact(&c3, 0).unwrap(), Complex64::new(1.0, 0.0)));
        assert!(matches!(q_fact(&c3, 3), Err(FusionError::VanishingQuantumFactorial { .. })));
        let c5 = QContext::new(2, 5).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((q_fact(&c5, 3).unwrap().re - golden * golden).abs() < 1e-12);
    }

    #[test]
    fn context_validation() {
        assert!(QContext::new(2, 2).is_err());
        assert!(QContext::new(1, 5).is_err());
        assert!((QContext::new(3, 4).unwrap().q().norm() - 1.0).abs() < 1e-15);
    }
}
