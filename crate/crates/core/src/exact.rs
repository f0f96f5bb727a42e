//! Exact short-subset enumeration and the Betti numbers / Poincaré polynomials
//! built from it.
//!
//! Every profile comes from one pass over the `2^(n-1)` subsets that contain
//! the anchor. Subsets are visited in Gray-code order so each step changes the
//! signed sum `sum_J l - sum_{J^c} l` by a single `±2 l_j`. The mask space is
//! split into blocks of `2^12` consecutive Gray codes; each block recomputes its
//! starting sum from scratch, which bounds floating-point drift and lets blocks
//! run in parallel. Counts are integers, so the result does not depend on how
//! the blocks are scheduled.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    BettiProfile, Kind, Length, LengthVector, LengthsRef, SubsetProfile, AMBIGUOUS_REL_TOL,
    DEFAULT_CAP, HARD_CAP, MEDIAN_REL_TOL,
};
use crate::poly::{IntPoly, PoincarePolynomial};

const BLOCK_BITS: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sign {
    Short,
    Median,
    Long,
}

trait Classify<T>: Sync {
    fn classify(&self, s: T) -> Result<Sign>;
}

struct ExactSign;

impl Classify<i64> for ExactSign {
    #[inline(always)]
    fn classify(&self, s: i64) -> Result<Sign> {
        Ok(match s.cmp(&0) {
            std::cmp::Ordering::Less => Sign::Short,
            std::cmp::Ordering::Equal => Sign::Median,
            std::cmp::Ordering::Greater => Sign::Long,
        })
    }
}

struct FloatSign {
    median: f64,
    ambiguous: f64,
    total: f64,
}

impl FloatSign {
    fn new(total: f64) -> Self {
        Self { median: MEDIAN_REL_TOL * total, ambiguous: AMBIGUOUS_REL_TOL * total, total }
    }
}

impl Classify<f64> for FloatSign {
    #[inline(always)]
    fn classify(&self, s: f64) -> Result<Sign> {
        if s < -self.ambiguous {
            Ok(Sign::Short)
        } else if s > self.ambiguous {
            Ok(Sign::Long)
        } else if s.abs() <= self.median {
            Ok(Sign::Median)
        } else {
            Err(Error::ToleranceAmbiguous { residual: s, total: self.total })
        }
    }
}

/// Short and median counts for subsets containing a fixed anchor, indexed by
/// the number of non-anchor elements in the subset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnchoredCounts {
    pub short: Vec<u64>,
    pub median: Vec<u64>,
}

impl AnchoredCounts {
    fn zeros(n: usize) -> Self {
        Self { short: vec![0; n], median: vec![0; n] }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.short.iter_mut().zip(&other.short) {
            *a += b;
        }
        for (a, b) in self.median.iter_mut().zip(&other.median) {
            *a += b;
        }
        self
    }

    fn has_median(&self) -> bool {
        self.median.iter().any(|&c| c != 0)
    }
}

fn enumerate<T: Length, C: Classify<T>>(lengths: &[T], anchor: usize, classify: &C) -> Result<AnchoredCounts> {
    let n = lengths.len();
    let others: Vec<T> = lengths
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != anchor)
        .map(|(_, l)| *l)
        .collect();
    let m = others.len();
    let low = (m as u32).min(BLOCK_BITS);
    let high = m as u32 - low;
    let steps: Vec<T> = others.iter().map(|l| l.double()).collect();
    let (low_steps, high_lengths) = steps.split_at(low as usize);

    let block = |hi: u64, acc: &mut AnchoredCounts| -> Result<()> {
        // Starting sum with every low bit cleared and high bits set per `hi`.
        let mut s = lengths[anchor];
        let mut card = 0usize;
        for (j, l) in others.iter().enumerate() {
            let in_set = j >= low as usize && (hi >> (j - low as usize)) & 1 == 1;
            if in_set {
                s = s + *l;
                card += 1;
            } else {
                s = s - *l;
            }
        }
        tally(classify.classify(s)?, card, acc);
        let mut gray = 0u64;
        for i in 1u64..(1u64 << low) {
            let bit = i.trailing_zeros();
            gray ^= 1 << bit;
            if gray & (1 << bit) != 0 {
                s = s + low_steps[bit as usize];
                card += 1;
            } else {
                s = s - low_steps[bit as usize];
                card -= 1;
            }
            tally(classify.classify(s)?, card, acc);
        }
        Ok(())
    };
    debug_assert_eq!(high_lengths.len(), high as usize);

    (0..(1u64 << high))
        .into_par_iter()
        .try_fold(
            || AnchoredCounts::zeros(n),
            |mut acc, hi| {
                block(hi, &mut acc)?;
                Ok(acc)
            },
        )
        .try_reduce(|| AnchoredCounts::zeros(n), |a, b| Ok(a.merge(b)))
}

#[inline(always)]
fn tally(sign: Sign, card: usize, acc: &mut AnchoredCounts) {
    match sign {
        Sign::Short => acc.short[card] += 1,
        Sign::Median => acc.median[card] += 1,
        Sign::Long => {}
    }
}

/// Exact enumeration with a configurable size cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Enumerator {
    cap: usize,
}

impl Default for Enumerator {
    fn default() -> Self {
        Self { cap: DEFAULT_CAP }
    }
}

impl Enumerator {
    pub fn with_cap(cap: usize) -> Result<Self> {
        if !(3..=HARD_CAP).contains(&cap) {
            return Err(Error::ConfigInvalid(format!("enumeration cap must be in 3..={HARD_CAP}, got {cap}")));
        }
        Ok(Self { cap })
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.cap {
            return Err(Error::CapExceeded { n, cap: self.cap });
        }
        Ok(())
    }

    /// Short/median counts over subsets containing `anchor` (zero-based).
    pub fn anchored_counts(&self, l: &LengthVector, anchor: usize) -> Result<AnchoredCounts> {
        self.check(l.n())?;
        assert!(anchor < l.n(), "anchor out of range");
        match l.lengths() {
            LengthsRef::Exact(v) => enumerate(v, anchor, &ExactSign),
            LengthsRef::Float(v) => enumerate(v, anchor, &FloatSign::new(l.total())),
        }
    }

    /// Every median pair `(J, J^c)` has one side containing the last index,
    /// so half the subsets suffice.
    pub fn is_generic(&self, l: &LengthVector) -> Result<bool> {
        Ok(!self.anchored_counts(l, l.n() - 1)?.has_median())
    }

    pub fn short_profile_planar(&self, l: &LengthVector) -> Result<SubsetProfile> {
        let counts = self.anchored_counts(l, l.anchor_index())?;
        Ok(SubsetProfile { kind: Kind::Planar, counts: counts.short, median_counts: counts.median })
    }

    pub fn short_profile_spatial(&self, l: &LengthVector) -> Result<SubsetProfile> {
        let counts = self.anchored_counts(l, l.n() - 1)?;
        if counts.has_median() {
            return Err(Error::NonGeneric);
        }
        Ok(SubsetProfile { kind: Kind::Spatial, counts: counts.short, median_counts: counts.median })
    }

    pub fn short_profile(&self, l: &LengthVector, kind: Kind) -> Result<SubsetProfile> {
        match kind {
            Kind::Planar => self.short_profile_planar(l),
            Kind::Spatial => self.short_profile_spatial(l),
        }
    }

    pub fn planar_betti(&self, l: &LengthVector) -> Result<BettiProfile> {
        Ok(planar_betti_from_profile(&self.short_profile_planar(l)?))
    }

    pub fn spatial_betti(&self, l: &LengthVector) -> Result<BettiProfile> {
        spatial_betti_from_profile(&self.short_profile_spatial(l)?)
    }

    pub fn betti(&self, l: &LengthVector, kind: Kind) -> Result<BettiProfile> {
        match kind {
            Kind::Planar => self.planar_betti(l),
            Kind::Spatial => self.spatial_betti(l),
        }
    }

    pub fn planar_poincare(&self, l: &LengthVector) -> Result<PoincarePolynomial> {
        Ok(planar_poincare_from_profile(&self.short_profile_planar(l)?))
    }

    pub fn spatial_poincare(&self, l: &LengthVector) -> Result<PoincarePolynomial> {
        spatial_poincare_from_profile(&self.short_profile_spatial(l)?)
    }

    pub fn poincare(&self, l: &LengthVector, kind: Kind) -> Result<PoincarePolynomial> {
        match kind {
            Kind::Planar => self.planar_poincare(l),
            Kind::Spatial => self.spatial_poincare(l),
        }
    }
}

pub fn short_profile_planar(l: &LengthVector) -> Result<SubsetProfile> {
    Enumerator::default().short_profile_planar(l)
}

pub fn short_profile_spatial(l: &LengthVector) -> Result<SubsetProfile> {
    Enumerator::default().short_profile_spatial(l)
}

pub fn planar_betti(l: &LengthVector) -> Result<BettiProfile> {
    Enumerator::default().planar_betti(l)
}

pub fn spatial_betti(l: &LengthVector) -> Result<BettiProfile> {
    Enumerator::default().spatial_betti(l)
}

pub fn planar_poincare(l: &LengthVector) -> Result<PoincarePolynomial> {
    Enumerator::default().planar_poincare(l)
}

pub fn spatial_poincare(l: &LengthVector) -> Result<PoincarePolynomial> {
    Enumerator::default().spatial_poincare(l)
}

/// `b_p = a_p + ã_p + a_{n-3-p}` for `p = 0..=n-3`.
pub fn planar_betti_from_profile(profile: &SubsetProfile) -> BettiProfile {
    let n = profile.n();
    let a = &profile.counts;
    let values = (0..=n - 3).map(|p| a[p] + profile.median_counts[p] + a[n - 3 - p]).collect();
    BettiProfile { kind: Kind::Planar, values }
}

/// `b_{2p} = sum_{j<=p} (â_j - â_{n-j-2})` for `p = 0..=n-3`.
pub fn spatial_betti_from_profile(profile: &SubsetProfile) -> Result<BettiProfile> {
    let n = profile.n();
    let a = &profile.counts;
    let mut running: i64 = 0;
    let mut values = Vec::with_capacity(n - 2);
    for p in 0..=n - 3 {
        running += a[p] as i64 - a[n - p - 2] as i64;
        if running < 0 {
            return Err(Error::Inconsistent(format!("negative partial sum {running} at b_{}", 2 * p)));
        }
        values.push(running as u64);
    }
    Ok(BettiProfile { kind: Kind::Spatial, values })
}

/// `q(t) + t^{n-3} q(1/t) + r(t)` with `q = sum a_k t^k` and `r = sum ã_k t^k`.
pub fn planar_poincare_from_profile(profile: &SubsetProfile) -> PoincarePolynomial {
    let n = profile.n();
    let top = n - 3;
    let q = IntPoly::new(profile.counts[..=top].iter().map(|&c| c as i64).collect());
    let q_reflected = IntPoly::new(profile.counts[..=top].iter().rev().map(|&c| c as i64).collect());
    let r = IntPoly::new(profile.median_counts[..=top].iter().map(|&c| c as i64).collect());
    let sum = q.add(&q_reflected).add(&r);
    PoincarePolynomial::from_coefficients((0..=top).map(|k| sum.coeff(k)).collect())
}

/// The generating polynomial `q̂(x) = sum_j â_j x^j`.
pub fn profile_polynomial(profile: &SubsetProfile) -> IntPoly {
    IntPoly::new(profile.counts.iter().map(|&c| c as i64).collect())
}

/// `(q̂(t^2) - t^{2(n-2)} q̂(t^{-2})) / (1 - t^2)`, by exact division in `x = t^2`.
///
/// The result is cross-checked against the closed form for its value at
/// `t = 1`, `(n-2) q̂(1) - 2 q̂'(1)`.
pub fn spatial_poincare_from_profile(profile: &SubsetProfile) -> Result<PoincarePolynomial> {
    let n = profile.n();
    let a = &profile.counts;
    if a[n - 1] != 0 {
        return Err(Error::Inconsistent("the full index set cannot be short".into()));
    }
    let mut numerator = IntPoly::zero();
    for (j, &c) in a.iter().enumerate().take(n - 1) {
        if c != 0 {
            let term = IntPoly::monomial(c as i64, j).sub(&IntPoly::monomial(c as i64, n - 2 - j));
            numerator = numerator.add(&term);
        }
    }
    let (quotient, remainder) = numerator.div_rem(&IntPoly::new(vec![1, -1]));
    if !remainder.is_zero() {
        return Err(Error::DivisionRemainder(remainder.coeffs().to_vec()));
    }
    if quotient.degree().is_some_and(|d| d > n - 3) {
        return Err(Error::Inconsistent(format!("quotient degree exceeds {}", n - 3)));
    }
    let total = spatial_total_from_profile(profile);
    if quotient.eval_i128(1) != total as i128 {
        return Err(Error::Inconsistent(format!(
            "division gives total {} but (n-2)q(1) - 2q'(1) = {total}",
            quotient.eval_i128(1)
        )));
    }
    let in_t = quotient.compose_power(2);
    Ok(PoincarePolynomial::from_coefficients((0..=2 * (n - 3)).map(|k| in_t.coeff(k)).collect()))
}

/// `(n-2) q̂(1) - 2 q̂'(1)`, the spatial total Betti number.
pub fn spatial_total_from_profile(profile: &SubsetProfile) -> i64 {
    let n = profile.n() as i64;
    let q = profile_polynomial(profile);
    (n - 2) * q.eval_i128(1) as i64 - 2 * q.derivative().eval_i128(1) as i64
}

/// Exact binomial coefficient. Panics on `u64` overflow.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).expect("binomial coefficient overflows u64")
}

/// Binomial coefficient as a float, for weights that may exceed `u64`.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Closed-form Betti numbers of the equilateral planar polygon space, `n = 2r+1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquilateralClosedForm {
    pub n: usize,
    pub r: usize,
    pub betti: BettiProfile,
    /// `2^{n-1} - C(n-1, r)`.
    pub total: u64,
    /// `B_n`, the constant in the generic bound `B(M_l) <= 2 B_{n-1}`; equals `total`.
    pub bound_constant: u64,
}

pub fn equilateral_planar(n: usize) -> Result<EquilateralClosedForm> {
    if n < 3 {
        return Err(Error::InvalidLengths(format!("need at least 3 sides, got {n}")));
    }
    if n.is_multiple_of(2) {
        return Err(Error::EvenN(n));
    }
    let r = (n - 1) / 2;
    let m = (n - 1) as u64;
    let values = (0..=n - 3)
        .map(|k| match k.cmp(&(r - 1)) {
            std::cmp::Ordering::Less => binomial(m, k as u64),
            std::cmp::Ordering::Equal => 2 * binomial(m, (r - 1) as u64),
            std::cmp::Ordering::Greater => binomial(m, (k + 2) as u64),
        })
        .collect();
    let total = (1u64 << (n - 1)) - binomial(m, r as u64);
    Ok(EquilateralClosedForm {
        n,
        r,
        betti: BettiProfile { kind: Kind::Planar, values },
        total,
        bound_constant: total,
    })
}

/// The closed-form sum `sum_{i=0}^{k-1} C(2k, i) (k - i)` for `n = 2k+1`,
/// commonly quoted as the equilateral spatial total.
///
/// It agrees with the enumerated total only at `n = 3`: for `n = 5` it gives
/// 6 while the space (a degree-5 del Pezzo surface) has total Betti number 7.
/// Use [`equilateral_spatial_betti`] for the per-degree values, whose total
/// matches enumeration.
pub fn equilateral_spatial_total(n: usize) -> Result<u64> {
    let k = spatial_half(n)?;
    Ok((0..k).map(|i| binomial(2 * k, i) * (k - i)).sum())
}

/// Equilateral spatial Betti numbers `b_{2p} = sum_{i<=p} C(n-1, i)` for
/// `p <= (n-3)/2`, mirrored by Poincaré duality above the middle degree.
///
/// The lower-half range is the one that reproduces the enumerated profile.
pub fn equilateral_spatial_betti(n: usize) -> Result<BettiProfile> {
    let k = spatial_half(n)? as usize;
    let half = k - 1;
    let lower: Vec<u64> = (0..=half)
        .scan(0u64, |acc, i| {
            *acc += binomial((n - 1) as u64, i as u64);
            Some(*acc)
        })
        .collect();
    let values = (0..=n - 3).map(|p| lower[p.min(n - 3 - p)]).collect();
    Ok(BettiProfile { kind: Kind::Spatial, values })
}

fn spatial_half(n: usize) -> Result<u64> {
    if n < 3 {
        return Err(Error::InvalidLengths(format!("need at least 3 sides, got {n}")));
    }
    if n.is_multiple_of(2) {
        return Err(Error::EvenN(n));
    }
    Ok(((n - 1) / 2) as u64)
}
