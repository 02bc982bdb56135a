use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use statrs::distribution::{ContinuousCDF, Normal};

use super::weight::BalancedWeight;
use crate::binomial::{berry_esseen_bound, BinomialSpec};
use crate::error::{Error, Result};
use crate::hypercube::BitVector;

/// Largest support handled by the pairwise distance profile.
pub const MAX_PAIRWISE_SUPPORT: usize = 1 << 16;
/// Dimension up to which the distance profile uses a dense transform.
pub const DENSE_PROFILE_DIM: usize = 16;

pub(crate) fn finite_or_null<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_none()
    }
}

/// Masses of the three bands around `z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SplitCertificate {
    pub z: BitVector,
    /// Mass of `S₁ = {s : ⟨s,z⟩ < ⌊n/2⌋}`.
    #[serde(rename = "A")]
    pub a: f64,
    /// Mass of `S₂ = {s : ⟨s,z⟩ > ⌈n/2⌉}`.
    #[serde(rename = "B")]
    pub b: f64,
    /// Mass of the middle band.
    #[serde(rename = "C")]
    pub c: f64,
    /// `C / min(A, B)`, infinite when either side is empty.
    #[serde(serialize_with = "finite_or_null")]
    pub ratio: f64,
}

/// Which band a vertex at distance `d` from `z` belongs to: 0, 1 or 2 for
/// `S₁`, `S₂`, `S₃`.
#[inline]
pub fn band(n: usize, d: usize) -> usize {
    if d < n / 2 {
        0
    } else if d > n.div_ceil(2) {
        1
    } else {
        2
    }
}

pub fn band_ratio(a: f64, b: f64, c: f64) -> f64 {
    let m = a.min(b);
    if m <= 0.0 {
        f64::INFINITY
    } else {
        c / m
    }
}

/// Splits the weight by Hamming distance to `z`.
pub fn split(w: &BalancedWeight, z: BitVector) -> Result<SplitCertificate> {
    let n = w.dim();
    if z.dim() != n {
        return Err(Error::DimensionMismatch { left: n, right: z.dim() });
    }
    let mut m = [0.0f64; 3];
    let zb = z.bits();
    for &(s, ws) in w.entries() {
        m[band(n, (s.bits() ^ zb).count_ones() as usize)] += ws;
    }
    Ok(SplitCertificate {
        z,
        a: m[0],
        b: m[1],
        c: m[2],
        ratio: band_ratio(m[0], m[1], m[2]),
    })
}

fn binomial_row(n: usize) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for k in 1..=n {
        c = c * BigUint::from(n - k + 1) / BigUint::from(k);
        row.push(c.clone());
    }
    row
}

fn pow2(n: usize) -> BigInt {
    BigInt::one() << n
}

fn ratio_of(count: BigUint, n: usize) -> BigRational {
    BigRational::new(BigInt::from(count), pow2(n))
}

/// Exact `(E[A], E[B], E[C])` over uniform `z`; the same for every
/// balanced weight.
pub fn expected_band_masses(n: usize) -> Result<(BigRational, BigRational, BigRational)> {
    if n < 1 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    let row = binomial_row(n);
    let mut m = [BigUint::zero(), BigUint::zero(), BigUint::zero()];
    for (d, c) in row.into_iter().enumerate() {
        m[band(n, d)] += c;
    }
    let [a, b, c] = m;
    Ok((ratio_of(a, n), ratio_of(b, n), ratio_of(c, n)))
}

/// Number of `z ∈ {0,1}ⁿ` with `z ∈ S₁(s)` and `z ∈ S₁(t)` for any `s, t`
/// at distance `k`: writing `u`, `v` for the weights of `z` on the `n − k`
/// agreeing and `k` disagreeing coordinates, both `u + v` and `u + k − v`
/// must stay below `⌊n/2⌋`.
pub fn joint_indicator_count(n: usize, k: usize) -> Result<BigUint> {
    if k > n {
        return Err(Error::Domain(format!("distance {k} exceeds dimension {n}")));
    }
    Ok(joint_count_rows(n, k, &binomial_row(n - k), &binomial_row(k)))
}

fn joint_count_rows(n: usize, k: usize, outer: &[BigUint], inner: &[BigUint]) -> BigUint {
    let m = (n / 2) as i64;
    // prefix[j] = Σ_{u<j} C(n−k, u)
    let mut prefix = Vec::with_capacity(outer.len() + 1);
    let mut acc = BigUint::zero();
    prefix.push(acc.clone());
    for c in outer {
        acc += c;
        prefix.push(acc.clone());
    }
    let mut total = BigUint::zero();
    for (v, cv) in inner.iter().enumerate() {
        let v = v as i64;
        let limit = (m - v).min(m - k as i64 + v);
        if limit <= 0 {
            continue;
        }
        let limit = (limit as usize).min(n - k + 1);
        total += cv * &prefix[limit];
    }
    total
}

/// `E[I_s I_t]` for `⟨s,t⟩ = k`, exact.
pub fn joint_indicator_exact(n: usize, k: usize) -> Result<BigRational> {
    Ok(ratio_of(joint_indicator_count(n, k)?, n))
}

pub fn joint_indicator_prob(n: usize, k: usize) -> Result<f64> {
    Ok(joint_indicator_exact(n, k)?.to_f64().unwrap_or(0.0))
}

/// `[joint(n, 0), …, joint(n, n)]`, exact.
pub fn joint_indicator_table(n: usize) -> Vec<BigRational> {
    let rows: Vec<Vec<BigUint>> = (0..=n).map(binomial_row).collect();
    (0..=n)
        .map(|k| ratio_of(joint_count_rows(n, k, &rows[n - k], &rows[k]), n))
        .collect()
}

/// `1/2 − P(E ∩ F)` with `P(E ∩ F) = joint(n, ⌊n/3⌋)`.
pub fn fluctuation_gap(n: usize) -> Result<BigRational> {
    if n < 3 {
        return Err(Error::Parameter("n must be at least 3".into()));
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    Ok(half - joint_indicator_exact(n, n / 3)?)
}

/// Independent lower bound on the fluctuation gap at `n = 6r` built from
/// the events `H₁ = {‖z₁‖ ∈ [2r − √r, 2r]}` (`z₁` of length `4r`) and
/// `H₂ = {‖z₂‖ ∈ [r − 3√r, r − 2√r]}` (`z₂` of length `2r`), whose
/// intersection lies in `E ∖ F`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FluctuationBound {
    pub n: usize,
    pub r: usize,
    pub gap: f64,
    /// `P(H₁)` and `P(H₂)` from binomial cdf differences.
    pub p_h1: f64,
    pub p_h2: f64,
    /// Normal-approximation lower bounds with Berry–Esseen slack, clipped at 0.
    pub p_h1_normal: f64,
    pub p_h2_normal: f64,
}

impl FluctuationBound {
    pub fn exact_product(&self) -> f64 {
        self.p_h1 * self.p_h2
    }

    pub fn normal_product(&self) -> f64 {
        self.p_h1_normal * self.p_h2_normal
    }
}

pub fn fluctuation_bound(n: usize) -> Result<FluctuationBound> {
    if n < 6 || !n.is_multiple_of(6) {
        return Err(Error::Parameter(format!("n = {n} is not a positive multiple of 6")));
    }
    let r = n / 6;
    let rf = r as f64;
    let sr = rf.sqrt();
    let z1 = BinomialSpec::new(4 * r as u64, 0.5)?;
    let z2 = BinomialSpec::new(2 * r as u64, 0.5)?;
    let h1_lo = (2.0 * rf - sr).ceil() as i64;
    let h1_hi = 2 * r as i64;
    let h2_lo = ((rf - 3.0 * sr).ceil() as i64).max(0);
    let h2_hi = (rf - 2.0 * sr).floor() as i64;
    let p_range = |b: &BinomialSpec, lo: i64, hi: i64| {
        if hi < lo {
            0.0
        } else {
            (b.cdf(hi) - b.cdf(lo - 1)).max(0.0)
        }
    };
    let phi = Normal::standard();
    let be1 = berry_esseen_bound(4 * r as u64, 0.5)?;
    let be2 = berry_esseen_bound(2 * r as u64, 0.5)?;
    let sqrt2 = std::f64::consts::SQRT_2;
    let gap = fluctuation_gap(n)?.to_f64().unwrap_or(0.0);
    Ok(FluctuationBound {
        n,
        r,
        gap,
        p_h1: p_range(&z1, h1_lo, h1_hi),
        p_h2: p_range(&z2, h2_lo, h2_hi),
        p_h1_normal: (phi.cdf(0.0) - phi.cdf(-1.0) - 2.0 * be1).max(0.0),
        p_h2_normal: (phi.cdf(-2.0 * sqrt2) - phi.cdf(-3.0 * sqrt2) - 2.0 * be2).max(0.0),
    })
}

/// `Σ_{⟨s,t⟩ < ⌊n/3⌋} w(t)`.
pub fn small_weight_sum(w: &BalancedWeight, s: BitVector) -> Result<f64> {
    let n = w.dim();
    if s.dim() != n {
        return Err(Error::DimensionMismatch { left: n, right: s.dim() });
    }
    let radius = n / 3;
    Ok(w.entries()
        .iter()
        .filter(|(t, _)| ((t.bits() ^ s.bits()).count_ones() as usize) < radius)
        .map(|e| e.1)
        .sum())
}

/// In-place Walsh–Hadamard transform (unnormalized).
fn fwht(a: &mut [f64]) {
    let mut h = 1;
    while h < a.len() {
        for chunk in a.chunks_mut(2 * h) {
            let (x, y) = chunk.split_at_mut(h);
            for (u, v) in x.iter_mut().zip(y.iter_mut()) {
                let (p, q) = (*u, *v);
                *u = p + q;
                *v = p - q;
            }
        }
        h *= 2;
    }
}

/// Largest `small_weight_sum(w, s)` over all centers, with a maximizer.
pub fn max_small_weight_sum(w: &BalancedWeight) -> Result<(f64, BitVector)> {
    let n = w.dim();
    if n > DENSE_PROFILE_DIM {
        return Err(Error::Capacity(format!(
            "center scan is limited to n ≤ {DENSE_PROFILE_DIM}"
        )));
    }
    let size = 1usize << n;
    let radius = n / 3;
    // (w ⋆ g)(s) = Σ_t w(t) g(s ⊕ t) with g the indicator of small weight
    let mut fw = w.dense();
    let mut g: Vec<f64> = (0..size).map(|x| ((x.count_ones() as usize) < radius) as u8 as f64).collect();
    fwht(&mut fw);
    fwht(&mut g);
    for (a, b) in fw.iter_mut().zip(&g) {
        *a *= b;
    }
    fwht(&mut fw);
    let scale = 1.0 / size as f64;
    let (idx, best) = fw
        .iter()
        .enumerate()
        .map(|(i, v)| (i, v * scale))
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    Ok((best, BitVector::new(n, idx as u32).expect("index below 2^n")))
}

/// `D[k] = Σ_{⟨s,t⟩ = k} w(s) w(t)` over ordered pairs.
pub fn distance_profile(w: &BalancedWeight) -> Result<Vec<f64>> {
    let n = w.dim();
    let mut prof = vec![0.0; n + 1];
    if n <= DENSE_PROFILE_DIM {
        let mut a = w.dense();
        fwht(&mut a);
        for v in a.iter_mut() {
            *v *= *v;
        }
        fwht(&mut a);
        let scale = 1.0 / a.len() as f64;
        for (x, v) in a.iter().enumerate() {
            prof[x.count_ones() as usize] += v * scale;
        }
        // the transform leaves rounding noise around zero
        for v in prof.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        return Ok(prof);
    }
    let e = w.entries();
    if e.len() > MAX_PAIRWISE_SUPPORT {
        return Err(Error::Capacity(format!(
            "support of {} entries exceeds {MAX_PAIRWISE_SUPPORT}",
            e.len()
        )));
    }
    for (i, &(s, ws)) in e.iter().enumerate() {
        prof[0] += ws * ws;
        for &(t, wt) in &e[i + 1..] {
            prof[(s.bits() ^ t.bits()).count_ones() as usize] += 2.0 * ws * wt;
        }
    }
    Ok(prof)
}

/// `Var(A)` over uniform `z`: `Σ_k D[k]·joint(n,k) − joint(n,0)²`.
pub fn variance_exact(w: &BalancedWeight) -> Result<f64> {
    let n = w.dim();
    let prof = distance_profile(w)?;
    let joint: Vec<f64> = joint_indicator_table(n)
        .iter()
        .map(|r| r.to_f64().unwrap_or(0.0))
        .collect();
    let second: f64 = prof.iter().zip(&joint).map(|(d, j)| d * j).sum();
    Ok(second - joint[0] * joint[0])
}

/// Pair masses below and above the middle band.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExploreResult {
    /// `Σ_{⟨s,t⟩ < ⌊n/2⌋} w(s) w(t)`.
    pub lhs: f64,
    /// `Σ_{⟨s,t⟩ > ⌈n/2⌉} w(s) w(t)`.
    pub rhs: f64,
}

impl ExploreResult {
    pub fn ratio(&self) -> f64 {
        if self.rhs > 0.0 {
            self.lhs / self.rhs
        } else {
            f64::INFINITY
        }
    }
}

pub fn open_problem_explore(w: &BalancedWeight) -> Result<ExploreResult> {
    let n = w.dim();
    let prof = distance_profile(w)?;
    let mut out = ExploreResult { lhs: 0.0, rhs: 0.0 };
    for (d, v) in prof.iter().enumerate() {
        match band(n, d) {
            0 => out.lhs += v,
            1 => out.rhs += v,
            _ => {}
        }
    }
    Ok(out)
}
