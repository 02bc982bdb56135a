use l0iso::binomial::{
    berry_esseen_bound, binom_bound_scan, binom_cdf, binom_pmf, growth_thresholds, hamming_ball_volume,
    stirling_check, step3_ratio, BinomialSpec, HammingBallSpec, PGrid,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

fn big(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

fn choose(n: u64, k: u64) -> BigRational {
    (0..k).fold(BigRational::one(), |acc, i| acc * big(n - i) / big(i + 1))
}

fn pow(x: &BigRational, e: u64) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * x)
}

fn exact_pmf(n: u64, q: &BigRational, k: u64) -> BigRational {
    choose(n, k) * pow(q, k) * pow(&(BigRational::one() - q), n - k)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #[test]
    fn pmf_matches_exact_rational(n in 1u64..=64, num in 1u64..64, k_pick in any::<u64>()) {
        let q = num as f64 / 64.0;
        let k = k_pick % (n + 1);
        let spec = BinomialSpec::new(n, q).unwrap();
        let want = exact_pmf(n, &exact(q), k).to_f64().unwrap();
        let got = binom_pmf(&spec, k).unwrap();
        prop_assert!(rel_close(got, want, 1e-11), "n={} q={} k={}: {} vs {}", n, q, k, got, want);
    }

    #[test]
    fn step3_matches_exact_rational(n in 1u64..=40, num in 1u64..64, k_pick in any::<u64>()) {
        let p = num as f64 / 64.0;
        let k = k_pick % (n + 1);
        let q = BigRational::one() - exact(p);
        let pmf: Vec<BigRational> = (0..=n).map(|j| exact_pmf(n, &q, j)).collect();
        let lower: BigRational = pmf[..k as usize].iter().sum();
        let upper: BigRational = pmf[k as usize + 1..].iter().sum();
        let tail = lower.min(upper);
        let got = step3_ratio(n, p, k).unwrap();
        if tail.is_zero() {
            prop_assert!(got.is_none());
        } else {
            let want = (&pmf[k as usize] / tail).to_f64().unwrap();
            prop_assert!(rel_close(got.unwrap(), want, 1e-10), "{:?} vs {}", got, want);
        }
    }

    #[test]
    fn ball_volume_monotone(n in 1u64..=300, r_pick in any::<u64>(), p1 in 0.0f64..=1.0, p2 in 0.0f64..=1.0) {
        let r = r_pick % n;
        let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        let v = |p, r| hamming_ball_volume(&HammingBallSpec::new(p, r, n).unwrap());
        prop_assert!(v(lo, r) <= v(hi, r) + 1e-12);
        prop_assert!(v(lo, r) <= v(lo, r + 1) + 1e-12);
    }

    #[test]
    fn ball_boundary_is_next_shell(n in 1u64..=500, r_pick in any::<u64>(), p in 0.001f64..0.999) {
        let r = r_pick % n;
        let ball = HammingBallSpec::new(p, r, n).unwrap();
        let next = HammingBallSpec::new(p, r + 1, n).unwrap();
        let shell = BinomialSpec::new(n, 1.0 - p).unwrap().pmf(r + 1).unwrap();
        prop_assert!((ball.boundary_volume() - (next.volume() - ball.volume())).abs() < 1e-12);
        prop_assert!((ball.boundary_volume() - shell).abs() < 1e-12);
    }
}

#[test]
fn cdf_differences_are_pmf() {
    for n in [1u64, 2, 7, 64, 100, 999, 2500, 10_000] {
        for q in [1e-4, 0.01, 0.2, 0.5, 0.73, 0.999] {
            let spec = BinomialSpec::new(n, q).unwrap();
            let pmf = spec.pmf_vec();
            let total: f64 = pmf.iter().sum();
            assert!((total - 1.0).abs() <= 1e-12, "n={n} q={q} sum {total}");
            let mut prev = binom_cdf(&spec, -1);
            assert_eq!(prev, 0.0);
            for k in 0..=n {
                let cur = binom_cdf(&spec, k as i64);
                assert!(cur >= prev - 1e-15);
                assert!((cur - prev - pmf[k as usize]).abs() <= 1e-12, "n={n} q={q} k={k}");
                prev = cur;
            }
            assert!((binom_cdf(&spec, n as i64) - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn pmf_examples() {
    let s = BinomialSpec::new(4, 0.5).unwrap();
    assert!((binom_pmf(&s, 2).unwrap() - 6.0 / 16.0).abs() < 1e-15);
    assert!((binom_cdf(&s, 2) - 11.0 / 16.0).abs() < 1e-15);
    assert!(binom_pmf(&s, 5).is_err());
    assert_eq!(binom_pmf(&BinomialSpec::new(9, 0.0).unwrap(), 0).unwrap(), 1.0);
    assert_eq!(binom_pmf(&BinomialSpec::new(1, 0.5).unwrap(), 0).unwrap(), 0.5);
    let ball = HammingBallSpec::new(0.5, 2, 4).unwrap();
    assert!((hamming_ball_volume(&ball) - 11.0 / 16.0).abs() < 1e-15);
    let corner = HammingBallSpec::new(0.3, 0, 5).unwrap();
    assert!((hamming_ball_volume(&corner) - 0.3f64.powi(5)).abs() < 1e-15);
    assert!((hamming_ball_volume(&HammingBallSpec::new(0.3, 5, 5).unwrap()) - 1.0).abs() < 1e-15);
}

#[test]
fn step3_examples() {
    assert!((step3_ratio(2, 0.5, 1).unwrap().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(step3_ratio(4, 0.5, 0).unwrap(), None);
    assert!((step3_ratio(4, 0.5, 2).unwrap().unwrap() - 1.2).abs() < 1e-12);
}

fn brute_thresholds(n: u64, p: f64, x: f64) -> (u64, u64) {
    // integer cross-multiplication: p = pn/pd, x = xn/xd
    let (p, x) = (exact(p), exact(x));
    let (pn, pd) = (p.numer().clone(), p.denom().clone());
    let (xn, xd) = (x.numer().clone(), x.denom().clone());
    let qn = &pd - &pn;
    let sn = &xd + &xn;
    let int = |v: u64| BigInt::from(v);
    // G(k)/G(k−1) = (n−k+1) q / (k p) ≥ s, falling in k
    let k1 = (1..=n)
        .take_while(|&k| int(n - k + 1) * &qn * &xd >= &sn * int(k) * &pn)
        .last()
        .unwrap_or(0);
    // G(k+1)/G(k) = (n−k) q / ((k+1) p) ≤ 1/s
    let k2 = (0..n)
        .rev()
        .take_while(|&k| &sn * int(n - k) * &qn <= int(k + 1) * &pn * &xd)
        .last()
        .unwrap_or(n);
    (k1, k2)
}

#[test]
fn growth_thresholds_match_pmf_ratios() {
    let ps = [0.003, 0.05, 0.25, 0.3, 0.5];
    let xs = [0.02, 0.1, 0.5, 0.9];
    for n in 1..=500u64 {
        for &p in ps.iter().chain([1.0 / (4.0 * n as f64)].iter()) {
            for &x in &xs {
                let g = growth_thresholds(n, p, x).unwrap();
                assert_eq!((g.k1, g.k2), brute_thresholds(n, p, x), "n={n} p={p} x={x}");
            }
        }
    }
}

#[test]
fn growth_threshold_examples() {
    assert_eq!(growth_thresholds(4, 0.5, 1.0 - 1e-16).unwrap().k1, 1);
    for n in (2..=60).step_by(2) {
        for x in [0.05, 0.3, 0.7] {
            let g = growth_thresholds(n, 0.5, x).unwrap();
            assert_eq!(g.k1 + g.k2, n);
        }
    }
    let g = growth_thresholds(100, 0.25, 0.1).unwrap();
    assert_eq!((g.k1, g.k2), brute_thresholds(100, 0.25, 0.1));
    assert!(growth_thresholds(10, 0.6, 0.1).is_err());
    assert!(growth_thresholds(10, 0.5, 1.0).is_err());
}

#[test]
fn growth_band_width_scales_inversely_with_x() {
    // x = c₁/√(np(1−p)) with c₁ = 1/2, over 1/(4n) ≤ p ≤ 1/2 where x < 1
    let c1 = 0.5;
    let mut worst = 0.0f64;
    for n in 2..=400u64 {
        for p in PGrid::default().values(n) {
            if p < 1.0 / (4.0 * n as f64) {
                continue;
            }
            let x = c1 / (n as f64 * p * (1.0 - p)).sqrt();
            if x >= 1.0 {
                continue;
            }
            let g = growth_thresholds(n, p, x).unwrap();
            worst = worst.max(g.k2.saturating_sub(g.k1) as f64 * x);
        }
    }
    assert!(worst <= 2.0, "(k2 − k1)·x reached {worst}");
}

#[test]
fn stirling_examples() {
    assert!((stirling_check(4).unwrap() - (0.75 - (2.0 / std::f64::consts::PI).sqrt()).abs()).abs() < 1e-12);
    assert!((stirling_check(1).unwrap() - 0.2978845608).abs() < 1e-9);
    assert!(stirling_check(10_000).unwrap() < 0.01 * (2.0 / std::f64::consts::PI).sqrt());
    assert!(stirling_check(0).is_err());
}

#[test]
fn berry_esseen_examples() {
    assert!((berry_esseen_bound(100, 0.5).unwrap() - 0.04215).abs() < 1e-15);
    assert!((berry_esseen_bound(25, 0.5).unwrap() - 0.0843).abs() < 1e-15);
    assert!(berry_esseen_bound(25, 0.0).unwrap().is_infinite());
}

#[test]
fn scan_single_point() {
    let r = binom_bound_scan(2, &PGrid::Fixed(vec![0.5])).unwrap();
    assert!((r.c_hat - 2.0 * 0.5f64.sqrt()).abs() < 1e-12);
    assert_eq!((r.argmin.n, r.argmin.k), (2, 1));
}

#[test]
fn scan_to_200_stays_bounded_away_from_zero() {
    let r = binom_bound_scan(200, &PGrid::default()).unwrap();
    assert!((r.c_hat - 0.8444725776557908).abs() < 1e-9, "ĉ = {}", r.c_hat);
    assert_eq!((r.argmin.n, r.argmin.p, r.argmin.k), (200, 0.5, 100));
    assert!(r.per_np.iter().all(|row| row.scaled >= 0.1));
    assert_eq!(r.per_np.len(), 199 * 33);
    let running = r.running_min();
    let last_decade = running[running.len() - 10..].iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(last_decade >= 0.9 * r.c_hat);
}

#[test]
fn scan_covers_both_threshold_regimes() {
    let n = 50;
    let v = PGrid::default().values(n);
    assert_eq!(v.len(), 33);
    assert!((v[0] - 1.0 / 400.0).abs() < 1e-15);
    assert!(v.contains(&(1.0 / 200.0)));
    assert_eq!(*v.last().unwrap(), 0.5);
}
