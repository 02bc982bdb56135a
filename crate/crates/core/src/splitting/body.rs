use std::fmt;
use std::io::Read;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::weight::{BalancedWeight, Imbalance, BALANCE_TOL};
use crate::error::{Error, Result};
use crate::hypercube::{check_dim, BitVector};

pub type Membership = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// A measurable body given either as a weighted point cloud or as a
/// membership test inside a bounding box.
#[derive(Clone)]
pub enum BodyOracle {
    Points { points: Vec<Vec<f64>>, weights: Vec<f64> },
    Membership { lo: Vec<f64>, hi: Vec<f64>, inside: Membership },
}

impl fmt::Debug for BodyOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyOracle::Points { points, .. } => write!(f, "BodyOracle::Points({} points)", points.len()),
            BodyOracle::Membership { lo, hi, .. } => {
                write!(f, "BodyOracle::Membership(lo={lo:?}, hi={hi:?})")
            }
        }
    }
}

impl BodyOracle {
    /// Point cloud; weights are normalized to total mass 1.
    pub fn points(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                left: points.len(),
                right: weights.len(),
            });
        }
        let n = points.first().map_or(0, Vec::len);
        check_dim(n)?;
        if let Some(p) = points.iter().find(|p| p.len() != n) {
            return Err(Error::DimensionMismatch { left: n, right: p.len() });
        }
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Domain("point coordinates must be finite".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::Domain("point weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::Degenerate("body has zero mass".into()));
        }
        Ok(BodyOracle::Points {
            points,
            weights: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn membership(lo: Vec<f64>, hi: Vec<f64>, inside: Membership) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                left: lo.len(),
                right: hi.len(),
            });
        }
        check_dim(lo.len())?;
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h && l.is_finite() && h.is_finite())) {
            return Err(Error::Domain("bounding box must have finite lo < hi".into()));
        }
        Ok(BodyOracle::Membership { lo, hi, inside })
    }

    /// Reads CSV rows `x₁,…,x_n,weight` (no header).
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let vals = rec
                .iter()
                .map(|f| f.parse::<f64>().map_err(|e| Error::Parse(format!("{f:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let (w, x) = vals
                .split_last()
                .ok_or_else(|| Error::Parse("empty CSV row".into()))?;
            points.push(x.to_vec());
            weights.push(*w);
        }
        Self::points(points, weights)
    }

    pub fn dim(&self) -> usize {
        match self {
            BodyOracle::Points { points, .. } => points[0].len(),
            BodyOracle::Membership { lo, .. } => lo.len(),
        }
    }

    /// Equal-weight Monte Carlo sample of a membership body, or the cloud
    /// itself. The second value is the per-coordinate tolerance of
    /// empirical masses (`2/√N` for samples, 0 for clouds).
    pub fn sample_cloud(&self, mc_samples: usize, seed: u64) -> Result<(Vec<Vec<f64>>, Vec<f64>, f64)> {
        match self {
            BodyOracle::Points { points, weights } => Ok((points.clone(), weights.clone(), 0.0)),
            BodyOracle::Membership { lo, hi, inside } => {
                if mc_samples == 0 {
                    return Err(Error::Parameter("mc_samples must be positive".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut points = Vec::new();
                let mut x = vec![0.0; lo.len()];
                for _ in 0..mc_samples {
                    for (i, xi) in x.iter_mut().enumerate() {
                        *xi = lo[i] + (hi[i] - lo[i]) * rng.random::<f64>();
                    }
                    if inside(&x) {
                        points.push(x.clone());
                    }
                }
                if points.is_empty() {
                    return Err(Error::Degenerate(format!(
                        "no Monte Carlo sample out of {mc_samples} fell inside the body"
                    )));
                }
                let w = 1.0 / points.len() as f64;
                let tol = 2.0 / (points.len() as f64).sqrt();
                let weights = vec![w; points.len()];
                Ok((points, weights, tol))
            }
        }
    }
}

/// Coordinatewise median point and the tolerance of its half-mass property.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MedianPoint {
    pub p: Vec<f64>,
    pub tolerance: f64,
}

/// Smallest value whose cumulative mass reaches 1/2.
fn weighted_median(vals: &mut [(f64, f64)]) -> f64 {
    vals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = vals.iter().map(|v| v.1).sum();
    let mut acc = 0.0;
    for &(x, w) in vals.iter() {
        acc += w;
        if acc >= 0.5 * total - BALANCE_TOL {
            return x;
        }
    }
    vals.last().map_or(0.0, |v| v.0)
}

fn median_of_cloud(points: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let n = points[0].len();
    (0..n)
        .map(|i| {
            let mut vals: Vec<(f64, f64)> = points.iter().zip(weights).map(|(p, &w)| (p[i], w)).collect();
            weighted_median(&mut vals)
        })
        .collect()
}

/// Per-coordinate median of the body: `K ∩ {xᵢ ≤ pᵢ}` carries at least
/// half the mass and `pᵢ` is the smallest such value.
pub fn median_point(body: &BodyOracle, mc_samples: usize, seed: u64) -> Result<MedianPoint> {
    let (points, weights, tolerance) = body.sample_cloud(mc_samples, seed)?;
    Ok(MedianPoint {
        p: median_of_cloud(&points, &weights),
        tolerance,
    })
}

/// The weight `w(s) = vol(K_s)` of the orthants around a median point.
#[derive(Clone, Debug)]
pub struct OrthantDecomposition {
    pub median: MedianPoint,
    pub weight: BalancedWeight,
    /// Deviation of the raw orthant masses from balance.
    pub raw_imbalance: Imbalance,
    /// Whether proportional fitting was needed.
    pub fitted: bool,
}

/// Orthant `s` of a point `x` relative to `p`: `sᵢ = 1` iff `xᵢ > pᵢ`.
pub fn orthant_of(x: &[f64], p: &[f64]) -> BitVector {
    let mut bits = 0u32;
    for (i, (xi, pi)) in x.iter().zip(p).enumerate() {
        if xi > pi {
            bits |= 1 << i;
        }
    }
    BitVector::new(x.len(), bits).expect("dimension checked by the body")
}

/// Orthant masses around `p`. If they are balanced within the body's
/// tolerance (exactly, for clouds) they are fitted to exact balance by
/// proportional fitting; otherwise this is an `Unbalanced` error.
pub fn orthant_weights(body: &BodyOracle, p: &[f64], mc_samples: usize, seed: u64) -> Result<OrthantDecomposition> {
    if p.len() != body.dim() {
        return Err(Error::DimensionMismatch {
            left: body.dim(),
            right: p.len(),
        });
    }
    let (points, weights, tolerance) = body.sample_cloud(mc_samples, seed)?;
    decompose(&points, &weights, p, tolerance)
}

fn decompose(points: &[Vec<f64>], weights: &[f64], p: &[f64], tolerance: f64) -> Result<OrthantDecomposition> {
    let n = p.len();
    let raw: Vec<(BitVector, f64)> = points.iter().zip(weights).map(|(x, &w)| (orthant_of(x, p), w)).collect();
    let unfitted = BalancedWeight::new(n, raw.iter().copied());
    let median = MedianPoint {
        p: p.to_vec(),
        tolerance,
    };
    match unfitted {
        Ok(weight) => {
            let raw_imbalance = weight.imbalance();
            Ok(OrthantDecomposition {
                median,
                weight,
                raw_imbalance,
                fitted: false,
            })
        }
        Err(_) => {
            let (weight, report) = BalancedWeight::fit(n, raw)?;
            let limit = tolerance.max(BALANCE_TOL);
            if report.initial.max() > limit {
                return Err(Error::Unbalanced(format!(
                    "orthant masses deviate from 1/2 by {:.3e}, above the tolerance {limit:.3e}",
                    report.initial.max()
                )));
            }
            Ok(OrthantDecomposition {
                median,
                weight,
                raw_imbalance: report.initial,
                fitted: true,
            })
        }
    }
}

/// Median point and orthant weights from one shared sample.
pub fn decompose_body(body: &BodyOracle, mc_samples: usize, seed: u64) -> Result<OrthantDecomposition> {
    let (points, weights, tolerance) = body.sample_cloud(mc_samples, seed)?;
    let p = median_of_cloud(&points, &weights);
    decompose(&points, &weights, &p, tolerance)
}
