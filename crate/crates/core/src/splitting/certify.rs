use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::bands::{band_ratio, finite_or_null, split};
use super::weight::{random_vertex, BalancedWeight};
use crate::error::{Error, Result};
use crate::hypercube::BitVector;

/// Default dimension from which certificates use random splitting planes.
pub const DEFAULT_N0: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateMethod {
    RandomPlane,
    AdHoc,
}

/// Best pair of axis-disjoint vertex sets found, with its masses.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsiCertificate {
    pub method: CertificateMethod,
    /// Splitting vertex of the random-plane method.
    pub z: Option<BitVector>,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub ratio: f64,
    pub trials: u64,
    pub seed: u64,
    /// Trials whose smaller side was empty.
    pub zero_min_trials: u64,
    /// Single-vertex sets of the ad-hoc method.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s1: Option<BitVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s2: Option<BitVector>,
    /// Which of the three ad-hoc cases produced the pair, and on which
    /// coordinate (1-based).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coordinate: Option<usize>,
}

/// Upper bound on `ψ` of any body inducing `w`. For `n ≥ n0` draws `trials`
/// uniform splitting vertices and keeps the smallest ratio (ties go to the
/// earliest trial); below `n0` it pairs heavy single vertices on either
/// side of a coordinate hyperplane.
pub fn certify_psi_upper_bound(w: &BalancedWeight, trials: u64, seed: u64, n0: usize) -> Result<PsiCertificate> {
    let n = w.dim();
    if n < 2 {
        return Err(Error::Parameter("certificates need n ≥ 2".into()));
    }
    if n < n0 {
        return ad_hoc(w, seed);
    }
    if trials == 0 {
        return Err(Error::Parameter("trials must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zs: Vec<BitVector> = (0..trials).map(|_| random_vertex(n, &mut rng)).collect();
    let results: Vec<_> = zs
        .par_iter()
        .map(|&z| split(w, z).expect("dimension matches"))
        .collect();
    let zero_min = results.iter().filter(|c| c.a.min(c.b) <= 0.0).count() as u64;
    let best = results
        .iter()
        .filter(|c| c.ratio.is_finite())
        .min_by(|x, y| x.ratio.total_cmp(&y.ratio));
    match best {
        None => Err(Error::NoCertificate {
            trials,
            zero_min,
        }),
        Some(c) => Ok(PsiCertificate {
            method: CertificateMethod::RandomPlane,
            z: Some(c.z),
            a: c.a,
            b: c.b,
            c: c.c,
            ratio: c.ratio,
            trials,
            seed,
            zero_min_trials: zero_min,
            s1: None,
            s2: None,
            case: None,
            coordinate: None,
        }),
    }
}

fn ad_hoc(w: &BalancedWeight, seed: u64) -> Result<PsiCertificate> {
    let n = w.dim();
    let mut best: Option<PsiCertificate> = None;
    let mut consider = |s: BitVector, t: BitVector, case: u8, i: usize| {
        if (s.bits() ^ t.bits()).count_ones() < 2 {
            return;
        }
        let (a, b) = (w.get(&s), w.get(&t));
        let c = (1.0 - a - b).max(0.0);
        let ratio = band_ratio(a, b, c);
        if best.as_ref().is_none_or(|cur| ratio < cur.ratio) {
            best = Some(PsiCertificate {
                method: CertificateMethod::AdHoc,
                z: None,
                a,
                b,
                c,
                ratio,
                trials: 0,
                seed,
                zero_min_trials: 0,
                s1: Some(s),
                s2: Some(t),
                case: Some(case),
                coordinate: Some(i + 1),
            });
        }
    };
    for i in 0..n {
        // support on each side of the hyperplane xᵢ = ½, heaviest first
        let mut side: [Vec<(BitVector, f64)>; 2] = [Vec::new(), Vec::new()];
        for &(s, ws) in w.entries() {
            side[s.coord(i) as usize].push((s, ws));
        }
        for v in side.iter_mut() {
            v.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
        }
        let heavy = |v: &Vec<(BitVector, f64)>| v.first().is_some_and(|e| e.1 > 0.25);
        if heavy(&side[0]) && heavy(&side[1]) {
            consider(side[0][0].0, side[1][0].0, 1, i);
        }
        // the light side supplies two candidates, one of which is at
        // distance ≥ 2 from the heaviest vertex of the other side
        for (light, other, case) in [(0usize, 1usize, 2u8), (1, 0, 3)] {
            if !heavy(&side[light]) && side[light].len() >= 2 && !side[other].is_empty() {
                let s = side[other][0].0;
                for &(t, _) in side[light].iter().take(2) {
                    consider(s, t, case, i);
                }
            }
        }
    }
    best.ok_or(Error::NoCertificate {
        trials: 0,
        zero_min: 0,
    })
}
