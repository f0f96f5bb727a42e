//! Length vectors and the combinatorial profile types derived from them.
//!
//! A [`LengthVector`] carries its arithmetic mode. In [`Arithmetic::Exact`]
//! mode the side lengths are integers (the caller has already scaled them) and
//! every subset comparison is decided exactly. In [`Arithmetic::Float`] mode a
//! signed subset sum `s` is treated as zero when `|s| <= 1e-12 * sum(l)`, and
//! sums in `(1e-12, 1e-9] * sum(l)` are rejected as ambiguous.

use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative band inside which a FLOAT signed sum counts as a median.
pub const MEDIAN_REL_TOL: f64 = 1e-12;
/// Relative band above [`MEDIAN_REL_TOL`] inside which a FLOAT signed sum is ambiguous.
pub const AMBIGUOUS_REL_TOL: f64 = 1e-9;
/// Default upper bound on `n` for exact subset enumeration (2^29 masks).
pub const DEFAULT_CAP: usize = 30;
/// Masks are `u64`, and anything near this is hours of work anyway.
pub const HARD_CAP: usize = 48;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    Exact,
    Float,
}

/// Planar polygon spaces `M_l` or spatial polygon spaces `N_l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Planar,
    Spatial,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Planar => f.write_str("planar"),
            Kind::Spatial => f.write_str("spatial"),
        }
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "planar" => Ok(Kind::Planar),
            "spatial" => Ok(Kind::Spatial),
            other => Err(Error::Parse(format!("unknown kind `{other}` (expected planar|spatial)"))),
        }
    }
}

/// Scalar types a side length can be stored as.
pub trait Length:
    Copy + Send + Sync + PartialOrd + fmt::Debug + Add<Output = Self> + Sub<Output = Self>
{
    const ZERO: Self;

    fn to_f64(self) -> f64;

    fn double(self) -> Self {
        self + self
    }
}

impl Length for i64 {
    const ZERO: Self = 0;

    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Length for f64 {
    const ZERO: Self = 0.0;

    fn to_f64(self) -> f64 {
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Exact(Vec<i64>),
    Float(Vec<f64>),
}

/// Positive side lengths `(l_1, ..., l_n)` with `n >= 3`.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthVector {
    repr: Repr,
}

/// Borrowed view of the lengths in their native scalar type.
#[derive(Clone, Copy, Debug)]
pub enum LengthsRef<'a> {
    Exact(&'a [i64]),
    Float(&'a [f64]),
}

impl LengthVector {
    /// Integer lengths. Sums must stay far from `i64::MAX` because the
    /// enumeration works with signed sums and doubled lengths.
    pub fn exact(lengths: Vec<i64>) -> Result<Self> {
        check_len(lengths.len())?;
        let mut total: i64 = 0;
        for (i, &l) in lengths.iter().enumerate() {
            if l <= 0 {
                return Err(Error::InvalidLengths(format!("l_{} = {l} is not positive", i + 1)));
            }
            total = total
                .checked_add(l)
                .filter(|t| *t <= i64::MAX / 4)
                .ok_or_else(|| Error::InvalidLengths("sum of lengths overflows".into()))?;
        }
        Ok(Self { repr: Repr::Exact(lengths) })
    }

    pub fn float(lengths: Vec<f64>) -> Result<Self> {
        check_len(lengths.len())?;
        for (i, &l) in lengths.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidLengths(format!("l_{} = {l} is not a positive finite number", i + 1)));
            }
        }
        Ok(Self { repr: Repr::Float(lengths) })
    }

    /// All sides equal to one, in EXACT mode.
    pub fn equilateral(n: usize) -> Result<Self> {
        Self::exact(vec![1; n])
    }

    pub fn n(&self) -> usize {
        match &self.repr {
            Repr::Exact(v) => v.len(),
            Repr::Float(v) => v.len(),
        }
    }

    pub fn mode(&self) -> Arithmetic {
        match self.repr {
            Repr::Exact(_) => Arithmetic::Exact,
            Repr::Float(_) => Arithmetic::Float,
        }
    }

    pub fn lengths(&self) -> LengthsRef<'_> {
        match &self.repr {
            Repr::Exact(v) => LengthsRef::Exact(v),
            Repr::Float(v) => LengthsRef::Float(v),
        }
    }

    pub fn get(&self, i: usize) -> f64 {
        match &self.repr {
            Repr::Exact(v) => v[i] as f64,
            Repr::Float(v) => v[i],
        }
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.get(i)).collect()
    }

    pub fn total(&self) -> f64 {
        match &self.repr {
            Repr::Exact(v) => v.iter().sum::<i64>() as f64,
            Repr::Float(v) => v.iter().sum(),
        }
    }

    /// Zero-based index of the first maximal entry (the planar anchor `i_0`).
    pub fn anchor_index(&self) -> usize {
        match &self.repr {
            Repr::Exact(v) => first_max_index(v),
            Repr::Float(v) => first_max_index(v),
        }
    }

    /// The vector with its first maximal entry swapped into the last slot.
    pub fn tilde_permute(&self) -> LengthVector {
        let i0 = self.anchor_index();
        let mut out = self.clone();
        let last = self.n() - 1;
        match &mut out.repr {
            Repr::Exact(v) => v.swap(i0, last),
            Repr::Float(v) => v.swap(i0, last),
        }
        out
    }

    /// True iff no subset has the same total length as its complement.
    pub fn is_generic(&self) -> Result<bool> {
        crate::exact::Enumerator::default().is_generic(self)
    }
}

impl fmt::Display for LengthVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for i in 0..self.n() {
            if i > 0 {
                f.write_str(",")?;
            }
            match &self.repr {
                Repr::Exact(v) => write!(f, "{}", v[i])?,
                Repr::Float(v) => write!(f, "{}", v[i])?,
            }
        }
        f.write_str(")")
    }
}

fn check_len(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidLengths(format!("need at least 3 sides, got {n}")));
    }
    Ok(())
}

pub(crate) fn first_max_index<T: PartialOrd + Copy>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Cardinality-indexed counts of short and median subsets containing an anchor.
///
/// `counts[p]` is the number of qualifying subsets of cardinality `p + 1`.
/// For planar profiles the anchor is `i_0`; for spatial profiles it is the
/// last index and `median_counts` is all zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetProfile {
    pub kind: Kind,
    pub counts: Vec<u64>,
    pub median_counts: Vec<u64>,
}

impl SubsetProfile {
    pub fn n(&self) -> usize {
        self.counts.len()
    }
}

/// Betti numbers of a polygon space.
///
/// Planar profiles hold `b_0..b_{n-3}`. Spatial profiles hold the even
/// degrees `b_0, b_2, ..., b_{2(n-3)}`; odd degrees vanish.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BettiProfile {
    pub kind: Kind,
    pub values: Vec<u64>,
}

impl BettiProfile {
    pub fn total(&self) -> u64 {
        self.values.iter().sum()
    }

    pub fn is_palindromic(&self) -> bool {
        self.values.iter().eq(self.values.iter().rev())
    }

    /// Topological degree of the `i`-th stored entry.
    pub fn degree(&self, i: usize) -> usize {
        match self.kind {
            Kind::Planar => i,
            Kind::Spatial => 2 * i,
        }
    }
}

/// Sum of all Betti numbers.
pub fn total_betti(b: &BettiProfile) -> u64 {
    b.total()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(v: &[i64]) -> LengthVector {
        LengthVector::exact(v.to_vec()).unwrap()
    }

    #[test]
    fn tilde_examples() {
        assert_eq!(ex(&[1, 1, 2]).tilde_permute(), ex(&[1, 1, 2]));
        assert_eq!(ex(&[3, 1, 2]).tilde_permute(), ex(&[2, 1, 3]));
        // first maximal index wins ties
        assert_eq!(ex(&[2, 2, 1]).tilde_permute(), ex(&[1, 2, 2]));
    }

    #[test]
    fn rejects_bad_vectors() {
        assert!(matches!(LengthVector::exact(vec![1, 2]), Err(Error::InvalidLengths(_))));
        assert!(matches!(LengthVector::exact(vec![1, 0, 2]), Err(Error::InvalidLengths(_))));
        assert!(matches!(LengthVector::float(vec![1.0, f64::NAN, 2.0]), Err(Error::InvalidLengths(_))));
        assert!(matches!(LengthVector::float(vec![1.0, -1.0, 2.0]), Err(Error::InvalidLengths(_))));
        assert!(matches!(
            LengthVector::exact(vec![i64::MAX / 2, i64::MAX / 2, 1]),
            Err(Error::InvalidLengths(_))
        ));
    }

    #[test]
    fn genericity_examples() {
        assert!(ex(&[1, 1, 1]).is_generic().unwrap());
        assert!(!ex(&[1, 1, 1, 1]).is_generic().unwrap());
        assert!(!ex(&[1, 2, 3]).is_generic().unwrap());
        for n in 3..12 {
            let eq = LengthVector::equilateral(n).unwrap();
            assert_eq!(eq.is_generic().unwrap(), n % 2 == 1, "n = {n}");
        }
    }

    #[test]
    fn float_genericity_tolerance() {
        let v = LengthVector::float(vec![0.1, 0.2, 0.3]).unwrap();
        // 0.1 + 0.2 - 0.3 is ~5.5e-17, well inside the median band
        assert!(!v.is_generic().unwrap());
        let v = LengthVector::float(vec![1.0, 2.0, 3.0 + 1e-10]).unwrap();
        assert!(matches!(v.is_generic(), Err(Error::ToleranceAmbiguous { .. })));
        let v = LengthVector::float(vec![1.0, 2.0, 3.0 + 1e-6]).unwrap();
        assert!(v.is_generic().unwrap());
    }

    #[test]
    fn total_betti_examples() {
        let b = BettiProfile { kind: Kind::Planar, values: vec![1, 8, 1] };
        assert_eq!(total_betti(&b), 10);
        let b = BettiProfile { kind: Kind::Planar, values: vec![1, 1] };
        assert_eq!(total_betti(&b), 2);
        let b = BettiProfile { kind: Kind::Spatial, values: vec![1, 1] };
        assert_eq!(total_betti(&b), 2);
        assert_eq!(b.degree(1), 2);
    }
}
