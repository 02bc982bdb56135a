use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypercube::{check_dim, BitVector};

/// Tolerance for total mass and coordinate marginals.
pub const BALANCE_TOL: f64 = 1e-12;
/// Round cap for iterative proportional fitting.
pub const IPF_MAX_ROUNDS: usize = 10_000;

/// A distribution on `{0,1}^n` whose every coordinate marginal is 1/2.
#[derive(Clone, Debug, PartialEq)]
pub struct BalancedWeight {
    n: usize,
    /// Sorted by vertex, no duplicates, all masses positive.
    entries: Vec<(BitVector, f64)>,
}

/// One record of the weight file format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightEntry {
    pub s: BitVector,
    pub w: f64,
}

/// Largest deviation from the balance conditions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Imbalance {
    pub total: f64,
    pub marginal: f64,
}

impl Imbalance {
    pub fn max(&self) -> f64 {
        self.total.max(self.marginal)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IpfReport {
    pub rounds: usize,
    pub initial: Imbalance,
    pub fitted: Imbalance,
}

fn collect(n: usize, raw: impl IntoIterator<Item = (BitVector, f64)>) -> Result<Vec<(BitVector, f64)>> {
    check_dim(n)?;
    let mut map: BTreeMap<BitVector, f64> = BTreeMap::new();
    for (s, w) in raw {
        if s.dim() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: s.dim(),
            });
        }
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::Domain(format!("weight {w} at {s} is not a nonnegative number")));
        }
        *map.entry(s).or_insert(0.0) += w;
    }
    Ok(map.into_iter().filter(|&(_, w)| w > 0.0).collect())
}

fn imbalance(n: usize, entries: &[(BitVector, f64)]) -> Imbalance {
    let total: f64 = entries.iter().map(|e| e.1).sum();
    let mut ones = vec![0.0; n];
    for &(s, w) in entries {
        for (i, m) in ones.iter_mut().enumerate() {
            if s.coord(i) {
                *m += w;
            }
        }
    }
    let marginal = ones
        .iter()
        .map(|&m| (m - 0.5).abs().max((total - m - 0.5).abs()))
        .fold(0.0, f64::max);
    Imbalance {
        total: (total - 1.0).abs(),
        marginal,
    }
}

impl BalancedWeight {
    /// Validates that the masses already form a balanced weight.
    pub fn new(n: usize, raw: impl IntoIterator<Item = (BitVector, f64)>) -> Result<Self> {
        let entries = collect(n, raw)?;
        let imb = imbalance(n, &entries);
        if imb.max() > BALANCE_TOL {
            return Err(Error::Unbalanced(format!(
                "total mass off by {:.3e}, worst marginal off by {:.3e}",
                imb.total, imb.marginal
            )));
        }
        Ok(BalancedWeight { n, entries })
    }

    /// Rescales positive masses to a balanced weight on the same support by
    /// iterative proportional fitting over the coordinate marginals.
    pub fn fit(n: usize, raw: impl IntoIterator<Item = (BitVector, f64)>) -> Result<(Self, IpfReport)> {
        let mut entries = collect(n, raw)?;
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if total <= 0.0 {
            return Err(Error::Degenerate("weight has zero total mass".into()));
        }
        let initial = imbalance(n, &entries);
        for e in &mut entries {
            e.1 /= total;
        }
        let mut rounds = 0;
        loop {
            let imb = imbalance(n, &entries);
            if imb.max() <= BALANCE_TOL / 4.0 {
                return Ok((
                    BalancedWeight { n, entries },
                    IpfReport {
                        rounds,
                        initial,
                        fitted: imb,
                    },
                ));
            }
            if rounds == IPF_MAX_ROUNDS {
                return Err(Error::Unbalanced(format!(
                    "proportional fitting did not converge in {IPF_MAX_ROUNDS} rounds (residual {:.3e})",
                    imb.max()
                )));
            }
            for i in 0..n {
                let (mut zero, mut one) = (0.0, 0.0);
                for &(s, w) in &entries {
                    if s.coord(i) {
                        one += w;
                    } else {
                        zero += w;
                    }
                }
                if zero == 0.0 || one == 0.0 {
                    return Err(Error::Unbalanced(format!(
                        "support has no vertex with coordinate {} equal to {}",
                        i + 1,
                        if zero == 0.0 { 0 } else { 1 }
                    )));
                }
                for e in &mut entries {
                    e.1 *= if e.0.coord(i) { 0.5 / one } else { 0.5 / zero };
                }
            }
            rounds += 1;
        }
    }

    /// `2⁻ⁿ` on every vertex.
    pub fn uniform(n: usize) -> Result<Self> {
        check_dim(n)?;
        let m = 1u32 << n;
        let w = 1.0 / m as f64;
        Ok(BalancedWeight {
            n,
            entries: (0..m).map(|b| (BitVector::new(n, b).expect("in range"), w)).collect(),
        })
    }

    /// `½δ_s + ½δ_s̄`.
    pub fn antipodal(s: BitVector) -> Self {
        let mut entries = vec![(s, 0.5), (s.complement(), 0.5)];
        entries.sort_by_key(|e| e.0);
        BalancedWeight { n: s.dim(), entries }
    }

    /// A mixture of `pairs` antipodal pairs with random positive mixing
    /// weights. Exactly balanced up to rounding.
    pub fn random_antipodal<R: Rng + ?Sized>(n: usize, pairs: usize, rng: &mut R) -> Result<Self> {
        check_dim(n)?;
        if pairs == 0 {
            return Err(Error::Parameter("need at least one antipodal pair".into()));
        }
        let mut raw = Vec::with_capacity(2 * pairs);
        for _ in 0..pairs {
            let s = random_vertex(n, rng);
            let lambda = -(1.0 - rng.random::<f64>()).ln();
            raw.push((s, lambda));
            raw.push((s.complement(), lambda));
        }
        let total: f64 = raw.iter().map(|e| e.1).sum();
        for e in &mut raw {
            e.1 /= total;
        }
        Self::new(n, raw)
    }

    /// Random positive masses on `points` random vertices and their
    /// complements, fitted to balance. The fitted weight is generally not
    /// symmetric under `s ↦ s̄`. Fitting is slow when the support size is
    /// close to `n`; `points ≥ 2n` or `points` well below `n` behave well.
    pub fn random_fitted<R: Rng + ?Sized>(n: usize, points: usize, rng: &mut R) -> Result<Self> {
        check_dim(n)?;
        if points == 0 {
            return Err(Error::Parameter("need at least one support point".into()));
        }
        let mut raw = Vec::with_capacity(2 * points);
        for _ in 0..points {
            let s = random_vertex(n, rng);
            // heavy-ish spread so the fit has real work to do
            raw.push((s, rng.random::<f64>().powi(3) + 1e-3));
            raw.push((s.complement(), rng.random::<f64>().powi(3) + 1e-3));
        }
        Ok(Self::fit(n, raw)?.0)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Support with masses, sorted by vertex.
    pub fn entries(&self) -> &[(BitVector, f64)] {
        &self.entries
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, s: &BitVector) -> f64 {
        self.entries
            .binary_search_by_key(s, |e| e.0)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn imbalance(&self) -> Imbalance {
        imbalance(self.n, &self.entries)
    }

    /// `w(s) = w(s̄)` for every `s`, within `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.entries
            .iter()
            .all(|&(s, w)| (w - self.get(&s.complement())).abs() <= tol)
    }

    /// Dense array over all `2ⁿ` vertices, indexed by bit pattern.
    pub fn dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; 1 << self.n];
        for &(s, w) in &self.entries {
            out[s.index()] = w;
        }
        out
    }

    pub fn to_file_entries(&self) -> Vec<WeightEntry> {
        self.entries.iter().map(|&(s, w)| WeightEntry { s, w }).collect()
    }

    /// Parses the JSON weight file `[{"s":"0101","w":0.25}, …]`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Vec<WeightEntry> = serde_json::from_str(text)?;
        let n = raw
            .first()
            .map(|e| e.s.dim())
            .ok_or_else(|| Error::Parse("weight file has no entries".into()))?;
        Self::new(n, raw.into_iter().map(|e| (e.s, e.w)))
    }
}

pub(crate) fn random_vertex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BitVector {
    let bits = rng.random::<u32>() & crate::hypercube::mask(n);
    BitVector::new(n, bits).expect("masked to n bits")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    #[test]
    fn rejects_unbalanced() {
        let err = BalancedWeight::new(2, [(bv("00"), 0.5), (bv("01"), 0.5)]).unwrap_err();
        assert!(matches!(err, Error::Unbalanced(_)));
    }

    #[test]
    fn fit_fails_without_both_sides() {
        let err = BalancedWeight::fit(2, [(bv("00"), 0.5), (bv("01"), 0.5)]).unwrap_err();
        assert!(matches!(err, Error::Unbalanced(_)));
    }

    #[test]
    fn generators_are_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2usize, 5, 12, 24] {
            let a = BalancedWeight::random_antipodal(n, 5, &mut rng).unwrap();
            assert!(a.imbalance().max() <= BALANCE_TOL);
            assert!(a.is_symmetric(1e-15));
            let b = BalancedWeight::random_fitted(n, 2 * n, &mut rng).unwrap();
            assert!(b.imbalance().max() <= BALANCE_TOL);
        }
    }

    #[test]
    fn json_round_trip() {
        let w = BalancedWeight::antipodal(bv("0101"));
        let text = serde_json::to_string(&w.to_file_entries()).unwrap();
        assert_eq!(text, r#"[{"s":"1010","w":0.5},{"s":"0101","w":0.5}]"#);
        assert_eq!(BalancedWeight::from_json(&text).unwrap(), w);
    }
}
