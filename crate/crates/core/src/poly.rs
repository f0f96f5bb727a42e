//! Dense integer polynomials, just enough for Poincaré polynomials.

use serde::{Deserialize, Serialize};

/// Integer polynomial stored by ascending degree, without trailing zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntPoly {
    coeffs: Vec<i64>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn monomial(coeff: i64, degree: usize) -> Self {
        let mut c = vec![0; degree + 1];
        c[degree] = coeff;
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, degree: usize) -> i64 {
        self.coeffs.get(degree).copied().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..len).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..len).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0i64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// `p(x) -> p(x^k)`.
    pub fn compose_power(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0; (self.coeffs.len() - 1) * k + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i * k] = *c;
        }
        Self::new(out)
    }

    /// Exact long division by a divisor whose leading coefficient is `±1`.
    ///
    /// Returns `(quotient, remainder)` with `deg(remainder) < deg(divisor)`.
    /// Panics if the divisor is zero or not monic up to sign.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.coeffs[dd];
        assert!(lead == 1 || lead == -1, "divisor must be monic up to sign");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![0i64; rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = rem[i + dd] * lead;
            quot[i] = c;
            if c != 0 {
                for (j, d) in divisor.coeffs.iter().enumerate() {
                    rem[i + j] -= c * d;
                }
            }
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + *c as f64)
    }

    pub fn eval_i128(&self, t: i128) -> i128 {
        self.coeffs.iter().rev().fold(0, |acc, c| acc * t + *c as i128)
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * i as i64).collect())
    }
}

/// A Poincaré polynomial `sum_k b_k t^k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoincarePolynomial {
    pub coefficients: Vec<i64>,
}

impl PoincarePolynomial {
    /// Keeps the coefficient vector exactly as given (trailing zeros allowed,
    /// so an empty space of dimension `d` still reports `d + 1` slots).
    pub fn from_coefficients(coefficients: Vec<i64>) -> Self {
        Self { coefficients }
    }

    pub fn as_int_poly(&self) -> IntPoly {
        IntPoly::new(self.coefficients.clone())
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * t + *c as f64)
    }

    /// Value at `t = 1`, the total Betti number.
    pub fn at_one(&self) -> i64 {
        self.coefficients.iter().sum()
    }

    pub fn coeff(&self, degree: usize) -> i64 {
        self.coefficients.get(degree).copied().unwrap_or(0)
    }
}

impl std::fmt::Display for PoincarePolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (k, &c) in self.coefficients.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                f.write_str(if c < 0 { " - " } else { " + " })?;
            } else if c < 0 {
                f.write_str("-")?;
            }
            let a = c.unsigned_abs();
            match k {
                0 => write!(f, "{a}")?,
                1 if a == 1 => f.write_str("t")?,
                1 => write!(f, "{a}t")?,
                _ if a == 1 => write!(f, "t^{k}")?,
                _ => write!(f, "{a}t^{k}")?,
            }
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}
