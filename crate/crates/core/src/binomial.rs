//! Binomial numerics: log-space pmf/cdf, weighted Hamming ball volumes, the
//! point-mass versus tail ratio and its scan, growth-rate thresholds of the
//! pmf, the central binomial coefficient limit, and the Berry–Esseen bound.
//!
//! Throughout, a weighted Hamming ball `H(p, r)` in `[0,1]^n` has volume
//! `P[X ≤ r]` for `X ~ Binomial(n, 1 − p)`.

use std::f64::consts::{LN_2, PI};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Constant of the binomial Berry–Esseen bound.
pub const BERRY_ESSEEN_CONSTANT: f64 = 0.4215;

/// `Binomial(n, q)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BinomialSpec {
    n: u64,
    q: f64,
}

impl BinomialSpec {
    pub fn new(n: u64, q: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::Parameter("binomial trial count must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain(format!("success probability {q} outside [0, 1]")));
        }
        Ok(BinomialSpec { n, q })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `ln P[X = k]`, `-inf` outside the support.
    pub fn ln_pmf(&self, k: u64) -> f64 {
        ln_dbinom(k, self.n, self.q)
    }

    pub fn pmf(&self, k: u64) -> Result<f64> {
        if k > self.n {
            return Err(Error::Domain(format!("k = {k} outside 0..={}", self.n)));
        }
        Ok(self.ln_pmf(k).exp())
    }

    /// `[P[X = 0], …, P[X = n]]`.
    pub fn pmf_vec(&self) -> Vec<f64> {
        (0..=self.n).map(|k| self.ln_pmf(k).exp()).collect()
    }

    /// `ln P[X = k]` for every `k`.
    pub fn ln_pmf_vec(&self) -> Vec<f64> {
        (0..=self.n).map(|k| self.ln_pmf(k)).collect()
    }

    /// `P[X ≤ k]`; `k = -1` gives 0 and `k ≥ n` gives 1.
    pub fn cdf(&self, k: i64) -> f64 {
        if k < 0 {
            return 0.0;
        }
        if k as u64 >= self.n {
            return 1.0;
        }
        let k = k as u64;
        // sum the shorter side so the result keeps relative accuracy in the tail
        if k < self.n / 2 {
            (0..=k).map(|j| self.ln_pmf(j).exp()).sum::<f64>().min(1.0)
        } else {
            let upper: f64 = (k + 1..=self.n).map(|j| self.ln_pmf(j).exp()).sum();
            (1.0 - upper).max(0.0)
        }
    }
}

/// Deviance term `x ln(x/np) + np − x`, evaluated stably near `x ≈ np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
    }
    x * (x / np).ln() + np - x
}

/// Stirling series remainder `ln n! − [ (n + ½) ln n − n + ln √(2π) ]` at
/// integer `n`.
fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    #[allow(clippy::excessive_precision)]
    const TABLE: [f64; 16] = [
        0.0,
        0.081_061_466_795_327_258_219_670_2,
        0.041_340_695_955_409_294_093_822_1,
        0.027_677_925_684_998_339_148_789_29,
        0.020_790_672_103_765_093_111_522_77,
        0.016_644_691_189_821_192_163_194_87,
        0.013_876_128_823_070_747_998_745_73,
        0.011_896_709_945_891_770_095_055_72,
        0.010_411_265_261_972_096_497_478_567,
        0.009_255_462_182_712_732_917_728_637,
        0.008_330_563_433_362_871_256_469_318,
        0.007_573_675_487_951_840_794_972_024,
        0.006_942_840_107_209_529_865_664_152,
        0.006_408_994_188_004_207_068_439_631,
        0.005_951_370_112_758_847_735_624_416,
        0.005_554_733_551_962_801_371_038_690,
    ];
    if n <= 15 {
        return TABLE[n as usize];
    }
    let n = n as f64;
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Saddle-point evaluation of `ln P[Binomial(n, q) = k]`.
fn ln_dbinom(k: u64, n: u64, q: f64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let p0 = 1.0 - q;
    if q == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if p0 == 0.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    let nf = n as f64;
    if k == 0 {
        return if q < 0.1 {
            -bd0(nf, nf * p0) - nf * q
        } else {
            nf * (-q).ln_1p()
        };
    }
    if k == n {
        return if p0 < 0.1 {
            -bd0(nf, nf * q) - nf * p0
        } else {
            nf * q.ln()
        };
    }
    let kf = k as f64;
    let lc = stirlerr(n) - stirlerr(k) - stirlerr(n - k) - bd0(kf, nf * q) - bd0(nf - kf, nf * p0);
    let lf = LN_2PI + kf.ln() + (-kf / nf).ln_1p();
    lc - 0.5 * lf
}

pub fn binom_pmf(spec: &BinomialSpec, k: u64) -> Result<f64> {
    spec.pmf(k)
}

pub fn binom_cdf(spec: &BinomialSpec, k: i64) -> f64 {
    spec.cdf(k)
}

/// `ln Σ exp(xs)`; `-inf` for an empty or all `-inf` input.
fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Weighted Hamming ball `H(p, r) = {x ∈ [0,1]^n : #{i : xᵢ ≤ p} ≥ n − r}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HammingBallSpec {
    pub p: f64,
    pub r: u64,
    pub n: u64,
}

impl HammingBallSpec {
    pub fn new(p: f64, r: u64, n: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("threshold p = {p} outside [0, 1]")));
        }
        if r > n {
            return Err(Error::Domain(format!("radius {r} exceeds dimension {n}")));
        }
        BinomialSpec::new(n, 1.0 - p)?;
        Ok(HammingBallSpec { p, r, n })
    }

    fn law(&self) -> BinomialSpec {
        BinomialSpec {
            n: self.n,
            q: 1.0 - self.p,
        }
    }

    pub fn volume(&self) -> f64 {
        self.law().cdf(self.r as i64)
    }

    /// Volume of the boundary `H(p, r+1) ∖ H(p, r)`.
    pub fn boundary_volume(&self) -> f64 {
        if self.r == self.n {
            0.0
        } else {
            self.law().ln_pmf(self.r + 1).exp()
        }
    }
}

pub fn hamming_ball_volume(ball: &HammingBallSpec) -> f64 {
    ball.volume()
}

/// Smallest boundary volume among weighted Hamming balls of volume `lambda`:
/// for each radius `r < n` the threshold `p` solving `vol H(p, r) = lambda`
/// is found by bisection.
pub fn harper_boundary_bound(n: u64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Domain(format!("volume {lambda} outside (0, 1)")));
    }
    let mut best = f64::INFINITY;
    for r in 0..n {
        let vol = |p: f64| {
            BinomialSpec {
                n,
                q: 1.0 - p,
            }
            .cdf(r as i64)
        };
        // vol is increasing in p, from 0 at p = 0 to 1 at p = 1
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if vol(mid) < lambda {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let p = 0.5 * (lo + hi);
        let b = HammingBallSpec { p, r, n }.boundary_volume();
        best = best.min(b);
    }
    Ok(best)
}

/// `P[X = k] / min(P[X < k], P[X > k])` for `X ~ Binomial(n, 1 − p)`.
/// `None` when the smaller tail is empty.
pub fn step3_ratio(n: u64, p: f64, k: u64) -> Result<Option<f64>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p = {p} outside (0, 1)")));
    }
    if k > n {
        return Err(Error::Domain(format!("k = {k} outside 0..={n}")));
    }
    let lp = BinomialSpec::new(n, 1.0 - p)?.ln_pmf_vec();
    Ok(ratio_from_ln_pmf(&lp, k as usize))
}

fn ratio_from_ln_pmf(lp: &[f64], k: usize) -> Option<f64> {
    let lower = log_sum_exp(&lp[..k]);
    let upper = log_sum_exp(&lp[k + 1..]);
    let tail = lower.min(upper);
    if tail == f64::NEG_INFINITY {
        None
    } else {
        Some((lp[k] - tail).exp())
    }
}

/// All feasible ratios for one `(n, p)`: `(k, ratio)`.
fn ratios_for(n: u64, p: f64) -> Vec<(u64, f64)> {
    let lp = BinomialSpec { n, q: 1.0 - p }.ln_pmf_vec();
    // running log tails, so the whole row costs O(n)
    let len = lp.len();
    let mut lower = vec![f64::NEG_INFINITY; len];
    for k in 1..len {
        lower[k] = ln_add(lower[k - 1], lp[k - 1]);
    }
    let mut upper = vec![f64::NEG_INFINITY; len];
    for k in (0..len - 1).rev() {
        upper[k] = ln_add(upper[k + 1], lp[k + 1]);
    }
    (0..len)
        .filter_map(|k| {
            let tail = lower[k].min(upper[k]);
            (tail > f64::NEG_INFINITY).then(|| (k as u64, (lp[k] - tail).exp()))
        })
        .collect()
}

fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// Threshold grid used by [`binom_bound_scan`].
#[derive(Clone, Debug, PartialEq)]
pub enum PGrid {
    /// `points` log-spaced values in `[1/(8n), 1/2]` plus `1/(4n)`, without near-duplicates.
    LogSpaced { points: usize },
    Fixed(Vec<f64>),
}

impl Default for PGrid {
    fn default() -> Self {
        PGrid::LogSpaced { points: 32 }
    }
}

impl PGrid {
    pub fn values(&self, n: u64) -> Vec<f64> {
        match self {
            PGrid::Fixed(v) => v.clone(),
            PGrid::LogSpaced { points } => {
                let lo = (1.0 / (8.0 * n as f64)).ln();
                let hi = 0.5f64.ln();
                let mut v: Vec<f64> = match *points {
                    0 => Vec::new(),
                    1 => vec![0.5],
                    m => (0..m)
                        .map(|j| (lo + (hi - lo) * j as f64 / (m - 1) as f64).exp())
                        .collect(),
                };
                if let Some(last) = v.last_mut() {
                    *last = 0.5;
                }
                let quarter = 1.0 / (4.0 * n as f64);
                // a log-spaced point may land on 1/(4n) up to rounding
                v.retain(|&p| (p - quarter).abs() > 1e-9 * quarter);
                v.push(quarter);
                v.sort_by(f64::total_cmp);
                v
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub n: u64,
    pub p: f64,
    pub k: u64,
    pub ratio: f64,
    /// `ratio · √(np(1−p))`.
    pub scaled: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub n_max: u64,
    /// Smallest scaled ratio over the whole scan.
    pub c_hat: f64,
    pub argmin: ScanRow,
    /// Minimizing row for every `n`.
    pub per_n: Vec<ScanRow>,
    /// Minimizing row for every `(n, p)`.
    pub per_np: Vec<ScanRow>,
}

impl ScanReport {
    /// Running minimum of the per-`n` minima.
    pub fn running_min(&self) -> Vec<f64> {
        self.per_n
            .iter()
            .scan(f64::INFINITY, |m, r| {
                *m = m.min(r.scaled);
                Some(*m)
            })
            .collect()
    }
}

/// Every feasible row of the scan for one `(n, p)`.
pub fn step3_rows(n: u64, p: f64) -> Vec<ScanRow> {
    let sigma = (n as f64 * p * (1.0 - p)).sqrt();
    ratios_for(n, p)
        .into_iter()
        .map(|(k, ratio)| ScanRow {
            n,
            p,
            k,
            ratio,
            scaled: ratio * sigma,
        })
        .collect()
}

/// Minimum of `P[X=k]/min(P[X<k], P[X>k]) · √(np(1−p))` over
/// `n ∈ [2, n_max]`, the threshold grid, and all feasible `k`. Thresholds
/// are taken in `(0, 1/2]`; `p ↦ 1 − p` maps the ratio at `k` to the ratio
/// at `n − k`.
pub fn binom_bound_scan(n_max: u64, grid: &PGrid) -> Result<ScanReport> {
    if n_max < 2 {
        return Err(Error::Parameter("n_max must be at least 2".into()));
    }
    for n in [2, n_max] {
        if let Some(&bad) = grid.values(n).iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(Error::Domain(format!("grid value {bad} outside (0, 1)")));
        }
    }
    let per_np: Vec<Vec<ScanRow>> = (2..=n_max)
        .into_par_iter()
        .map(|n| {
            grid.values(n)
                .into_iter()
                .filter_map(|p| {
                    step3_rows(n, p)
                        .into_iter()
                        .min_by(|a, b| a.scaled.total_cmp(&b.scaled))
                })
                .collect()
        })
        .collect();
    let per_n: Vec<ScanRow> = per_np
        .iter()
        .filter_map(|rows| rows.iter().copied().min_by(|a, b| a.scaled.total_cmp(&b.scaled)))
        .collect();
    let argmin = per_n
        .iter()
        .copied()
        .min_by(|a, b| a.scaled.total_cmp(&b.scaled))
        .ok_or_else(|| Error::Degenerate("scan produced no feasible rows".into()))?;
    Ok(ScanReport {
        n_max,
        c_hat: argmin.scaled,
        argmin,
        per_n,
        per_np: per_np.into_iter().flatten().collect(),
    })
}

/// Bounds of the band where the pmf changes by less than a factor `1 + x`
/// per step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GrowthThresholds {
    /// Largest `k` with `G(k)/G(k−1) ≥ 1 + x` (with `G(−1) = 0`).
    pub k1: u64,
    /// Smallest `k` with `G(k+1)/G(k) ≤ 1/(1 + x)` (with `G(n+1) = 0`).
    pub k2: u64,
}

fn rational(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Domain(format!("{x} is not finite")))
}

fn floor_int(r: &BigRational) -> BigInt {
    r.numer().div_floor(r.denom())
}

fn ceil_int(r: &BigRational) -> BigInt {
    -((-r.numer()).div_floor(r.denom()))
}

/// Closed-form growth thresholds of `G(k) = P[X = k]`,
/// `X ~ Binomial(n, 1 − p)`, using
/// `G(k+1)/G(k) ≥ s ⟺ k ≤ (n(1−p) − sp)/((s−1)p + 1)` and
/// `G(k+1)/G(k) ≤ 1/s ⟺ k ≥ (sn(1−p) − p)/(p + s(1−p))`, `s = 1 + x`.
/// The arithmetic is exact in the binary values of `p` and `x`.
pub fn growth_thresholds(n: u64, p: f64, x: f64) -> Result<GrowthThresholds> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("x = {x} outside (0, 1)")));
    }
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::Domain(format!("p = {p} outside (0, 1/2]")));
    }
    let p = rational(p)?;
    let x = rational(x)?;
    let one = BigRational::one();
    let s = &one + &x;
    let nq = BigRational::from_integer(BigInt::from(n)) * (&one - &p);
    let rise = (&nq - &s * &p) / ((&s - &one) * &p + &one);
    let fall = (&s * &nq - &p) / (&p + &s * (&one - &p));
    let n_big = BigInt::from(n);

    let k1 = if rise.is_negative() {
        BigInt::zero()
    } else {
        (floor_int(&rise) + BigInt::one()).min(n_big.clone())
    };
    let k2 = ceil_int(&fall).max(BigInt::zero()).min(n_big);
    Ok(GrowthThresholds {
        k1: k1.to_u64().expect("bounded by n"),
        k2: k2.to_u64().expect("bounded by n"),
    })
}

/// `|C(n, ⌊n/2⌋) √n / 2ⁿ − √(2/π)|`.
pub fn stirling_check(n: u64) -> Result<f64> {
    if n < 1 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    let nf = n as f64;
    let ln_value = ln_binomial(n, n / 2) + 0.5 * nf.ln() - nf * LN_2;
    Ok((ln_value.exp() - (2.0 / PI).sqrt()).abs())
}

/// `0.4215 (p² + (1−p)²) / √(np(1−p))`; infinite at `p ∈ {0, 1}`.
pub fn berry_esseen_bound(n: u64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p = {p} outside [0, 1]")));
    }
    if n == 0 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    let var = n as f64 * p * (1.0 - p);
    if var == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(BERRY_ESSEEN_CONSTANT * (p * p + (1.0 - p) * (1.0 - p)) / var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn pmf_examples() {
        let b = BinomialSpec::new(4, 0.5).unwrap();
        assert!(close(b.pmf(2).unwrap(), 6.0 / 16.0, 1e-15));
        assert_eq!(BinomialSpec::new(7, 0.0).unwrap().pmf(0).unwrap(), 1.0);
        assert!(close(BinomialSpec::new(1, 0.5).unwrap().pmf(0).unwrap(), 0.5, 1e-15));
        assert!(matches!(b.pmf(5), Err(Error::Domain(_))));
        assert!(BinomialSpec::new(3, 1.5).is_err());
    }

    #[test]
    fn cdf_examples() {
        let b = BinomialSpec::new(4, 0.5).unwrap();
        assert!(close(b.cdf(2), 11.0 / 16.0, 1e-15));
        assert_eq!(b.cdf(4), 1.0);
        assert_eq!(b.cdf(-1), 0.0);
        let c = BinomialSpec::new(30, 0.3).unwrap();
        assert_eq!(c.cdf(30), 1.0);
        assert_eq!(c.cdf(-1), 0.0);
    }

    #[test]
    fn pmf_matches_exact_rational_for_small_n() {
        // exact C(n,k) qᵏ (1−q)ⁿ⁻ᵏ with q a dyadic rational
        for n in [1u64, 5, 17, 40, 64] {
            for q in [0.5, 0.25, 0.125, 0.9375] {
                let b = BinomialSpec::new(n, q).unwrap();
                let qr = rational(q).unwrap();
                let one = BigRational::one();
                let mut choose = BigInt::one();
                for k in 0..=n {
                    if k > 0 {
                        choose = choose * BigInt::from(n - k + 1) / BigInt::from(k);
                    }
                    let exact = BigRational::from_integer(choose.clone())
                        * num_traits::pow(qr.clone(), k as usize)
                        * num_traits::pow(&one - &qr, (n - k) as usize);
                    let e = exact.to_f64().unwrap();
                    let got = b.pmf(k).unwrap();
                    assert!(
                        (got - e).abs() <= 1e-13 * e.max(1e-300),
                        "n={n} q={q} k={k}: {got} vs {e}"
                    );
                }
            }
        }
    }

    #[test]
    fn ball_volume_examples() {
        let n = 6;
        let p = 0.3;
        let b0 = HammingBallSpec::new(p, 0, n).unwrap();
        assert!(close(b0.volume(), p.powi(6), 1e-15));
        assert_eq!(HammingBallSpec::new(p, n, n).unwrap().volume(), 1.0);
        let h = HammingBallSpec::new(0.5, 2, 4).unwrap();
        assert!(close(hamming_ball_volume(&h), 11.0 / 16.0, 1e-15));
    }

    #[test]
    fn step3_examples() {
        assert!(close(step3_ratio(2, 0.5, 1).unwrap().unwrap(), 2.0, 1e-12));
        assert_eq!(step3_ratio(4, 0.5, 0).unwrap(), None);
        assert!(close(step3_ratio(4, 0.5, 2).unwrap().unwrap(), 1.2, 1e-12));
        assert!(step3_ratio(4, 0.0, 2).is_err());
    }

    #[test]
    fn step3_symmetry_under_complement_threshold() {
        for n in [3u64, 10, 31] {
            for p in [0.1, 0.27, 0.5] {
                for k in 0..=n {
                    let a = step3_ratio(n, p, k).unwrap();
                    let b = step3_ratio(n, 1.0 - p, n - k).unwrap();
                    match (a, b) {
                        (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-9 * a),
                        (None, None) => {}
                        other => panic!("mismatch {other:?} at n={n} p={p} k={k}"),
                    }
                }
            }
        }
    }

    #[test]
    fn row_ratios_match_single_evaluations() {
        for (k, r) in ratios_for(25, 0.13) {
            let single = step3_ratio(25, 0.13, k).unwrap().unwrap();
            assert!((r - single).abs() <= 1e-12 * single);
        }
    }

    #[test]
    fn scan_single_point() {
        let rep = binom_bound_scan(2, &PGrid::Fixed(vec![0.5])).unwrap();
        assert!(close(rep.c_hat, 2.0 * 0.5f64.sqrt(), 1e-12));
        assert_eq!((rep.argmin.n, rep.argmin.k), (2, 1));
        assert!(binom_bound_scan(1, &PGrid::default()).is_err());
    }

    #[test]
    fn default_grid_has_33_points() {
        for n in [2u64, 50, 200] {
            let v = PGrid::default().values(n);
            assert_eq!(v.len(), 33);
            assert!(v.contains(&(1.0 / (4.0 * n as f64))));
            assert_eq!(*v.last().unwrap(), 0.5);
            assert!((v[0] - 1.0 / (8.0 * n as f64)).abs() < 1e-15);
        }
    }

    #[test]
    fn growth_examples() {
        let t = growth_thresholds(4, 0.5, 1.0 - f64::EPSILON).unwrap();
        assert_eq!(t.k1, 1);
        assert!(growth_thresholds(4, 0.6, 0.5).is_err());
        assert!(growth_thresholds(4, 0.5, 1.0).is_err());
        for n in [4u64, 10, 36] {
            let t = growth_thresholds(n, 0.5, 0.3).unwrap();
            assert_eq!(t.k1 + t.k2, n);
        }
    }

    #[test]
    fn stirling_examples() {
        assert!(close(stirling_check(4).unwrap(), (0.75 - (2.0 / PI).sqrt()).abs(), 1e-12));
        assert!(close(stirling_check(4).unwrap(), 0.0479, 1e-4));
        assert!(close(stirling_check(1).unwrap(), 0.2979, 1e-4));
        assert!(stirling_check(10_000).unwrap() < 0.01 * (2.0 / PI).sqrt());
    }

    #[test]
    fn berry_esseen_examples() {
        assert!(close(berry_esseen_bound(100, 0.5).unwrap(), 0.04215, 1e-15));
        assert!(close(berry_esseen_bound(25, 0.5).unwrap(), 0.0843, 1e-15));
        assert_eq!(berry_esseen_bound(10, 0.0).unwrap(), f64::INFINITY);
        assert!(berry_esseen_bound(10, -0.1).is_err());
    }

    #[test]
    fn harper_bound_at_ball_volumes() {
        // at the exact volume of H(1/2, 1) in n = 3 the bound is at most its shell
        let ball = HammingBallSpec::new(0.5, 1, 3).unwrap();
        let bound = harper_boundary_bound(3, ball.volume()).unwrap();
        assert!(bound <= ball.boundary_volume() + 1e-12);
    }
}
