//! Random side lengths, the stopping time `τ`, and Monte Carlo estimators
//! built on the permutation representation of short-subset counts.
//!
//! For a length vector `l` and an ordering `σ` of the first `n - 1` sides,
//! `τ_σ(l)` is the first `t` with `l_n + sum_{i<=t} l_σ(i) - sum_{i>t} l_σ(i) >= 0`.
//! The event `τ_σ > p` says exactly that `{n} ∪ {σ(1..p)}` is short, so a
//! uniformly random `σ` turns each anchored count into `C(n-1, p) P(τ > p)`.
//!
//! # Reproducibility
//!
//! Work is cut into fixed-size chunks. Chunk `c` draws from a ChaCha8 stream
//! seeded with `splitmix64(seed ^ splitmix64(c))`, chunks run in parallel, and
//! their partial sums are combined in chunk order. A run is therefore a pure
//! function of `(seed, samples, chunk_size)` and does not depend on the
//! number of worker threads.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::binomial_f64;
use crate::model::{first_max_index, Kind, Length, LengthVector, LengthsRef};
use crate::stats::wilson_interval;

pub const DEFAULT_CHUNK_SIZE: u64 = 4096;

/// A diffuse law on `(0, ∞)` for a single side length.
///
/// Implementors are trusted to have a finite exponential moment; that cannot
/// be checked from samples.
pub trait LengthLaw: Sync {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64;
    fn mean(&self) -> f64;
    fn variance(&self) -> f64;

    /// Limiting standard deviation of `n^{-1/2} (τ - n/2)`, namely `σ / (2m)`.
    fn sigma_tau(&self) -> f64 {
        self.variance().sqrt() / (2.0 * self.mean())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Law {
    Uniform { low: f64, high: f64 },
    Exponential { rate: f64 },
    ShiftedExp { offset: f64, rate: f64 },
}

/// One of the built-in side-length laws.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomModel {
    law: Law,
}

impl RandomModel {
    /// `low = 0` is accepted; exact zeros are redrawn.
    pub fn uniform(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && low >= 0.0 && low < high) {
            return Err(Error::InvalidModel(format!("uniform needs 0 <= a < b, got ({low}, {high})")));
        }
        Ok(Self { law: Law::Uniform { low, high } })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidModel(format!("exponential rate must be positive, got {rate}")));
        }
        Ok(Self { law: Law::Exponential { rate } })
    }

    pub fn shifted_exp(offset: f64, rate: f64) -> Result<Self> {
        if !(offset.is_finite() && offset > 0.0 && rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidModel(format!(
                "shifted exponential needs offset > 0 and rate > 0, got ({offset}, {rate})"
            )));
        }
        Ok(Self { law: Law::ShiftedExp { offset, rate } })
    }

    pub fn law(&self) -> Law {
        self.law
    }
}

impl LengthLaw for RandomModel {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let x = match self.law {
                Law::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
                Law::Exponential { rate } => Exp::new(rate).expect("validated rate").sample(rng),
                Law::ShiftedExp { offset, rate } => offset + Exp::new(rate).expect("validated rate").sample(rng),
            };
            if x > 0.0 {
                return x;
            }
        }
    }

    fn mean(&self) -> f64 {
        match self.law {
            Law::Uniform { low, high } => 0.5 * (low + high),
            Law::Exponential { rate } => 1.0 / rate,
            Law::ShiftedExp { offset, rate } => offset + 1.0 / rate,
        }
    }

    fn variance(&self) -> f64 {
        match self.law {
            Law::Uniform { low, high } => (high - low).powi(2) / 12.0,
            Law::Exponential { rate } | Law::ShiftedExp { rate, .. } => 1.0 / (rate * rate),
        }
    }
}

impl fmt::Display for RandomModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.law {
            Law::Uniform { low, high } => write!(f, "uniform:{low},{high}"),
            Law::Exponential { rate } => write!(f, "exponential:{rate}"),
            Law::ShiftedExp { offset, rate } => write!(f, "shifted-exp:{offset},{rate}"),
        }
    }
}

/// Parses `uniform:a,b`, `exponential:rate` (or `exp:rate`) and
/// `shifted-exp:offset,rate`.
impl FromStr for RandomModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("model `{s}` must look like name:params")))?;
        let params: Vec<f64> = params
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| Error::Parse(format!("model parameter `{p}`: {e}"))))
            .collect::<Result<_>>()?;
        let arity = |k: usize| {
            if params.len() == k {
                Ok(())
            } else {
                Err(Error::Parse(format!("model `{name}` takes {k} parameter(s), got {}", params.len())))
            }
        };
        match name.trim().to_ascii_lowercase().as_str() {
            "uniform" => {
                arity(2)?;
                Self::uniform(params[0], params[1])
            }
            "exponential" | "exp" => {
                arity(1)?;
                Self::exponential(params[0])
            }
            "shifted-exp" | "shifted_exp" => {
                arity(2)?;
                Self::shifted_exp(params[0], params[1])
            }
            other => Err(Error::Parse(format!("unknown model `{other}`"))),
        }
    }
}

impl Serialize for RandomModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RandomModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A Monte Carlo mean with its standard error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
    /// 95% Wilson interval on the estimate's scale, for proportion-type estimates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wilson: Option<(f64, f64)>,
}

impl McEstimate {
    /// `|value - target| <= k * std_error`.
    pub fn covers(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(chunk)))
}

/// Runs `work(rng, count)` over consecutive chunks of `total` samples and
/// returns the per-chunk results in chunk order.
pub fn run_chunked<A, F>(total: u64, chunk_size: u64, seed: u64, work: F) -> Vec<A>
where
    A: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> A + Sync,
{
    let chunk_size = chunk_size.max(1);
    let chunks = total.div_ceil(chunk_size);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let count = chunk_size.min(total - c * chunk_size);
            work(&mut rng, count)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    count: u64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(self, o: Self) -> Self {
        Self { count: self.count + o.count, sum: self.sum + o.sum, sum_sq: self.sum_sq + o.sum_sq }
    }

    fn estimate(&self, seed: u64) -> McEstimate {
        let n = self.count as f64;
        let mean = self.sum / n;
        let var = if self.count > 1 { ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        McEstimate { value: mean, std_error: (var / n).sqrt(), n_samples: self.count, seed, wilson: None }
    }
}

/// Sample mean of `draw(rng)` over `samples` draws.
pub fn mc_mean<F>(samples: u64, chunk_size: u64, seed: u64, draw: F) -> McEstimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    run_chunked(samples, chunk_size, seed, |rng, count| {
        let mut m = Moments::default();
        for _ in 0..count {
            m.push(draw(rng));
        }
        m
    })
    .into_iter()
    .fold(Moments::default(), Moments::merge)
    .estimate(seed)
}

/// [`mc_mean`] for draws that can fail; the first error in chunk order wins.
pub fn mc_try_mean<F>(samples: u64, chunk_size: u64, seed: u64, draw: F) -> Result<McEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    let parts = run_chunked(samples, chunk_size, seed, |rng, count| {
        let mut m = Moments::default();
        for _ in 0..count {
            m.push(draw(rng)?);
        }
        Ok::<_, Error>(m)
    });
    let mut total = Moments::default();
    for part in parts {
        total = total.merge(part?);
    }
    Ok(total.estimate(seed))
}

pub fn fill_lengths<L: LengthLaw + ?Sized, R: Rng + ?Sized>(model: &L, rng: &mut R, buf: &mut [f64]) {
    for x in buf.iter_mut() {
        *x = model.sample(rng);
    }
}

/// `n` i.i.d. draws as a FLOAT length vector.
pub fn sample_length_vector<L: LengthLaw + ?Sized, R: Rng + ?Sized>(model: &L, n: usize, rng: &mut R) -> Result<LengthVector> {
    let mut buf = vec![0.0; n];
    fill_lengths(model, rng, &mut buf);
    LengthVector::float(buf)
}

/// Swaps the first maximal entry into the last slot, in place.
pub fn tilde_in_place<T: Length>(lengths: &mut [T]) {
    let i0 = first_max_index(lengths);
    let last = lengths.len() - 1;
    lengths.swap(i0, last);
}

/// `τ_σ(l)` where `order` lists the zero-based indices `0..n-1` in the order `σ`.
pub fn stopping_time<T: Length>(lengths: &[T], order: &[usize]) -> usize {
    let n = lengths.len();
    debug_assert_eq!(order.len(), n - 1);
    let mut s = lengths[n - 1];
    for &i in order {
        s = s - lengths[i];
    }
    if s >= T::ZERO {
        return 0;
    }
    for (t, &i) in order.iter().enumerate() {
        s = s + lengths[i].double();
        if s >= T::ZERO {
            return t + 1;
        }
    }
    // only reachable through rounding; the full prefix sum is positive
    n - 1
}

/// `τ(l) = τ_Id(l)`.
pub fn stopping_time_identity<T: Length>(lengths: &[T]) -> usize {
    let n = lengths.len();
    let mut s = lengths[n - 1];
    for &l in &lengths[..n - 1] {
        s = s - l;
    }
    if s >= T::ZERO {
        return 0;
    }
    for (t, &l) in lengths[..n - 1].iter().enumerate() {
        s = s + l.double();
        if s >= T::ZERO {
            return t + 1;
        }
    }
    n - 1
}

/// `τ_σ(l)`; `sigma` must be a permutation of `0..n-1`.
pub fn tau(l: &LengthVector, sigma: &[usize]) -> Result<usize> {
    let n = l.n();
    let mut seen = vec![false; n - 1];
    if sigma.len() != n - 1 {
        return Err(Error::Parse(format!("permutation has {} entries, expected {}", sigma.len(), n - 1)));
    }
    for &i in sigma {
        if i >= n - 1 || std::mem::replace(&mut seen[i], true) {
            return Err(Error::Parse(format!("{sigma:?} is not a permutation of 0..{}", n - 1)));
        }
    }
    Ok(match l.lengths() {
        LengthsRef::Exact(v) => stopping_time(v, sigma),
        LengthsRef::Float(v) => stopping_time(v, sigma),
    })
}

/// `τ̃(l) = τ_Id(l̃)`, always at most `n - 2`.
pub fn tau_tilde(l: &LengthVector) -> usize {
    match l.tilde_permute().lengths() {
        LengthsRef::Exact(v) => stopping_time_identity(v),
        LengthsRef::Float(v) => stopping_time_identity(v),
    }
}

/// Exact draw from `Binomial(trials, q)`: CDF inversion while `(1-q)^trials`
/// is representable, otherwise a sum of Bernoulli trials.
pub fn sample_binomial<R: Rng + ?Sized>(rng: &mut R, trials: u64, q: f64) -> u64 {
    if q <= 0.0 {
        return 0;
    }
    if q >= 1.0 {
        return trials;
    }
    let base = (1.0 - q).powf(trials as f64);
    if base > 1e-290 {
        let u: f64 = rng.random();
        let ratio = q / (1.0 - q);
        let mut k = 0;
        let mut pmf = base;
        let mut cdf = pmf;
        while u > cdf && k < trials {
            pmf *= (trials - k) as f64 / (k + 1) as f64 * ratio;
            k += 1;
            cdf += pmf;
        }
        k
    } else {
        (0..trials).filter(|_| rng.random::<f64>() < q).count() as u64
    }
}

/// Monte Carlo driver holding the seed and chunking rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub seed: u64,
    pub chunk_size: u64,
}

impl MonteCarlo {
    pub fn new(seed: u64) -> Self {
        Self { seed, chunk_size: DEFAULT_CHUNK_SIZE }
    }

    pub fn with_chunk_size(mut self, chunk_size: u64) -> Self {
        self.chunk_size = chunk_size.max(1);
        self
    }

    /// Estimates of `a_p` (planar, on `l̃`) or `â_p` (spatial, on `l`) for
    /// `p = 0..n-1` from `n_perms` uniform orderings. One ordering yields the
    /// whole nested indicator vector `{τ > p}`.
    pub fn short_profile(&self, l: &LengthVector, kind: Kind, n_perms: u64) -> Result<Vec<McEstimate>> {
        if n_perms == 0 {
            return Err(Error::ConfigInvalid("need at least one permutation".into()));
        }
        let base = match kind {
            Kind::Planar => l.tilde_permute(),
            Kind::Spatial => l.clone(),
        };
        let n = l.n();
        let histogram = |rng: &mut ChaCha8Rng, count: u64| {
            let mut hist = vec![0u64; n];
            let mut order: Vec<usize> = (0..n - 1).collect();
            for _ in 0..count {
                order.shuffle(rng);
                let t = match base.lengths() {
                    LengthsRef::Exact(v) => stopping_time(v, &order),
                    LengthsRef::Float(v) => stopping_time(v, &order),
                };
                hist[t] += 1;
            }
            hist
        };
        let hist = run_chunked(n_perms, self.chunk_size, self.seed, histogram).into_iter().fold(
            vec![0u64; n],
            |mut acc, h| {
                acc.iter_mut().zip(h).for_each(|(a, b)| *a += b);
                acc
            },
        );
        let total = n_perms as f64;
        let mut above = n_perms;
        Ok((0..n)
            .map(|p| {
                // above = #{τ > p}
                above -= hist[p];
                let weight = binomial_f64((n - 1) as u64, p as u64);
                let phat = above as f64 / total;
                let (lo, hi) = wilson_interval(above, n_perms, 1.959_963_984_540_054);
                McEstimate {
                    value: weight * phat,
                    std_error: weight * (phat * (1.0 - phat) / total).sqrt(),
                    n_samples: n_perms,
                    seed: self.seed,
                    wilson: Some((weight * lo, weight * hi)),
                }
            })
            .collect())
    }

    /// Mean planar Betti number `μ_n[b_p]` from one `τ̃` per sampled vector:
    /// `C(n-1,p) 1{τ̃ > p} + C(n-1,p+2) 1{τ̃ > n-p-3}`.
    pub fn mean_betti<L: LengthLaw>(&self, model: &L, n: usize, p: usize, samples: u64) -> Result<McEstimate> {
        check_sampling(n, samples)?;
        let m = (n - 1) as u64;
        let w_low = binomial_f64(m, p as u64);
        let w_high = binomial_f64(m, p as u64 + 2);
        Ok(mc_mean(samples, self.chunk_size, self.seed, |rng| {
            if p + 3 > n {
                return 0.0;
            }
            let mut buf = vec![0.0; n];
            fill_lengths(model, rng, &mut buf);
            tilde_in_place(&mut buf);
            let t = stopping_time_identity(&buf);
            planar_betti_sample(t, n, p, w_low, w_high)
        }))
    }

    /// Mean spatial Betti number `μ_n[b_{2p}]`. Each sampled vector contributes
    /// `sum_{j<=p} C(n-1,j) 1{τ>j} - sum_{j<=p} C(n-1,n-j-2) 1{τ>n-j-2}`, the
    /// binomial average over `k` taken in closed form.
    pub fn mean_betti_spatial<L: LengthLaw>(&self, model: &L, n: usize, p: usize, samples: u64) -> Result<McEstimate> {
        check_sampling(n, samples)?;
        let weights: Vec<f64> = (0..n).map(|j| binomial_f64((n - 1) as u64, j as u64)).collect();
        Ok(mc_mean(samples, self.chunk_size, self.seed, |rng| {
            if p + 3 > n {
                return 0.0;
            }
            let mut buf = vec![0.0; n];
            fill_lengths(model, rng, &mut buf);
            let t = stopping_time_identity(&buf);
            spatial_betti_sample(t, n, p, &weights)
        }))
    }

    /// Mean Poincaré polynomial at `t`, divided by [`poincare_normalizer`].
    pub fn mean_poincare<L: LengthLaw>(&self, model: &L, n: usize, t: f64, samples: u64, kind: Kind) -> Result<MeanPoincareEstimate> {
        check_t(t)?;
        check_sampling(n, samples)?;
        let q = binomial_parameter(kind, t);
        let normalized = mc_mean(samples, self.chunk_size, self.seed, |rng| {
            let mut buf = vec![0.0; n];
            fill_lengths(model, rng, &mut buf);
            if kind == Kind::Planar {
                tilde_in_place(&mut buf);
            }
            let tau = stopping_time_identity(&buf);
            let k = sample_binomial(rng, (n - 1) as u64, q);
            poincare_factor(kind, n, t, tau, k as usize)
        });
        Ok(MeanPoincareEstimate { kind, n, t, normalized, log_normalizer: poincare_normalizer(kind, n, t) })
    }

    /// `μ_n[(p(t)/normalizer)^ν]` by the replica trick: for each sampled
    /// vector, `ν` independent `(σ_i, k_i)` pairs and the product of their
    /// factors.
    pub fn poincare_moment<L: LengthLaw>(&self, model: &L, n: usize, t: f64, nu: u32, samples: u64, kind: Kind) -> Result<McEstimate> {
        check_t(t)?;
        check_sampling(n, samples)?;
        if nu == 0 {
            return Err(Error::ConfigInvalid("moment order must be at least 1".into()));
        }
        let q = binomial_parameter(kind, t);
        Ok(mc_mean(samples, self.chunk_size, self.seed, |rng| {
            let mut buf = vec![0.0; n];
            fill_lengths(model, rng, &mut buf);
            if kind == Kind::Planar {
                tilde_in_place(&mut buf);
            }
            let mut order: Vec<usize> = (0..n - 1).collect();
            (0..nu)
                .map(|_| {
                    order.shuffle(rng);
                    let tau = stopping_time(&buf, &order);
                    let k = sample_binomial(rng, (n - 1) as u64, q);
                    poincare_factor(kind, n, t, tau, k as usize)
                })
                .product()
        }))
    }

    /// I.i.d. draws of `τ` (or `τ̃`) on fresh vectors with the identity ordering.
    pub fn tau_samples<L: LengthLaw>(&self, model: &L, n: usize, samples: u64, use_tilde: bool) -> Result<Vec<usize>> {
        check_sampling(n, samples)?;
        Ok(run_chunked(samples, self.chunk_size, self.seed, |rng, count| {
            let mut buf = vec![0.0; n];
            (0..count)
                .map(|_| {
                    fill_lengths(model, rng, &mut buf);
                    if use_tilde {
                        tilde_in_place(&mut buf);
                    }
                    stopping_time_identity(&buf)
                })
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect())
    }

    /// Pairs `(τ_σ1(l̃), τ_σ2(l̃))` with one vector and two independent orderings per trial.
    pub fn tau_pairs<L: LengthLaw>(&self, model: &L, n: usize, samples: u64) -> Result<Vec<(usize, usize)>> {
        check_sampling(n, samples)?;
        Ok(run_chunked(samples, self.chunk_size, self.seed, |rng, count| {
            let mut buf = vec![0.0; n];
            let mut order: Vec<usize> = (0..n - 1).collect();
            (0..count)
                .map(|_| {
                    fill_lengths(model, rng, &mut buf);
                    tilde_in_place(&mut buf);
                    order.shuffle(rng);
                    let a = stopping_time(&buf, &order);
                    order.shuffle(rng);
                    let b = stopping_time(&buf, &order);
                    (a, b)
                })
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect())
    }

    /// Counts of `|τ/n - 1/2| >= eps` over `samples` fresh vectors.
    pub fn deviation_hits<L: LengthLaw>(&self, model: &L, n: usize, eps: f64, samples: u64, use_tilde: bool) -> Result<u64> {
        check_sampling(n, samples)?;
        let half = n as f64 / 2.0;
        let radius = eps * n as f64;
        Ok(run_chunked(samples, self.chunk_size, self.seed, |rng, count| {
            let mut buf = vec![0.0; n];
            let mut hits = 0u64;
            for _ in 0..count {
                fill_lengths(model, rng, &mut buf);
                if use_tilde {
                    tilde_in_place(&mut buf);
                }
                let t = stopping_time_identity(&buf) as f64;
                if (t - half).abs() >= radius {
                    hits += 1;
                }
            }
            hits
        })
        .into_iter()
        .sum())
    }
}

fn check_sampling(n: usize, samples: u64) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidLengths(format!("need at least 3 sides, got {n}")));
    }
    if samples == 0 {
        return Err(Error::ConfigInvalid("need at least one sample".into()));
    }
    Ok(())
}

fn check_t(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::TNonpositive(t))
    }
}

pub(crate) fn planar_betti_sample(tau_tilde: usize, n: usize, p: usize, w_low: f64, w_high: f64) -> f64 {
    let mut v = 0.0;
    if tau_tilde > p {
        v += w_low;
    }
    if tau_tilde + p + 3 > n {
        v += w_high;
    }
    v
}

pub(crate) fn spatial_betti_sample(tau: usize, n: usize, p: usize, weights: &[f64]) -> f64 {
    (0..=p)
        .map(|j| {
            let mut v = 0.0;
            if tau > j {
                v += weights[j];
            }
            if tau > n - j - 2 {
                v -= weights[n - j - 2];
            }
            v
        })
        .sum()
}

fn binomial_parameter(kind: Kind, t: f64) -> f64 {
    match kind {
        Kind::Planar => t / (1.0 + t),
        Kind::Spatial => t * t / (1.0 + t * t),
    }
}

/// Per-draw integrand of the mean Poincaré polynomial, already divided by
/// the normalizer. `tau` is `τ_σ(l̃)` (planar) or `τ_σ(l)` (spatial) and `k`
/// the binomial draw.
///
/// * planar: `1{τ > k} + t^{-2} 1{τ > n-1-k}`
/// * spatial, `t != 1`: `(1{τ > k} - t^{-2} 1{τ > n-1-k}) / (1 - t^2)`
/// * spatial, `t = 1`: `((n - 2 - 2k) / n) 1{τ > k}`
pub fn poincare_factor(kind: Kind, n: usize, t: f64, tau: usize, k: usize) -> f64 {
    let above = |x: usize| if tau > x { 1.0 } else { 0.0 };
    match kind {
        Kind::Planar => above(k) + above(n - 1 - k) / (t * t),
        Kind::Spatial if t == 1.0 => (n as f64 - 2.0 - 2.0 * k as f64) / n as f64 * above(k),
        Kind::Spatial => (above(k) - above(n - 1 - k) / (t * t)) / (1.0 - t * t),
    }
}

/// Natural log of the factor the mean Poincaré value is divided by:
/// `(1+t)^{n-1}` (planar), `(1+t^2)^{n-1}` (spatial, `t != 1`) or
/// `n 2^{n-1}` (spatial, `t = 1`).
pub fn poincare_normalizer(kind: Kind, n: usize, t: f64) -> f64 {
    let m = (n - 1) as f64;
    match kind {
        Kind::Planar => m * t.ln_1p(),
        Kind::Spatial if t == 1.0 => (n as f64).ln() + m * std::f64::consts::LN_2,
        Kind::Spatial => m * (t * t).ln_1p(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanPoincareEstimate {
    pub kind: Kind,
    pub n: usize,
    pub t: f64,
    pub normalized: McEstimate,
    pub log_normalizer: f64,
}

impl MeanPoincareEstimate {
    /// Estimate of the un-normalized mean (may overflow to infinity for large `n`).
    pub fn mean(&self) -> f64 {
        self.normalized.value * self.log_normalizer.exp()
    }
}

pub fn mc_short_profile(l: &LengthVector, kind: Kind, n_perms: u64, seed: u64) -> Result<Vec<McEstimate>> {
    MonteCarlo::new(seed).short_profile(l, kind, n_perms)
}

pub fn mc_mean_betti<L: LengthLaw>(model: &L, n: usize, p: usize, samples: u64, seed: u64) -> Result<McEstimate> {
    MonteCarlo::new(seed).mean_betti(model, n, p, samples)
}

pub fn mc_mean_poincare<L: LengthLaw>(model: &L, n: usize, t: f64, samples: u64, seed: u64, kind: Kind) -> Result<MeanPoincareEstimate> {
    MonteCarlo::new(seed).mean_poincare(model, n, t, samples, kind)
}

pub fn tau_samples<L: LengthLaw>(model: &L, n: usize, samples: u64, seed: u64, use_tilde: bool) -> Result<Vec<usize>> {
    MonteCarlo::new(seed).tau_samples(model, n, samples, use_tilde)
}
