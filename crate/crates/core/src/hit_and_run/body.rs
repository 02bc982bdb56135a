use std::fmt;
use std::sync::Arc;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack used when testing polytope constraints.
const FEAS_TOL: f64 = 1e-12;

pub type Inside = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// A convex body with a bounding box.
#[derive(Clone)]
pub enum ConvexBody {
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// `{x : A x ≤ b}` with a strictly feasible point.
    Polytope {
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        interior: Vec<f64>,
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Oracle {
        inside: Inside,
        lo: Vec<f64>,
        hi: Vec<f64>,
        interior: Vec<f64>,
        /// Known radii `r, R` with `r·B∞ ⊆ K ⊆ R·B∞`, if any.
        radius_hint: Option<(f64, f64)>,
    },
}

impl fmt::Debug for ConvexBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConvexBody::Box { lo, hi } => write!(f, "Box(lo={lo:?}, hi={hi:?})"),
            ConvexBody::Polytope { a, .. } => write!(f, "Polytope({} constraints)", a.len()),
            ConvexBody::Oracle { lo, hi, .. } => write!(f, "Oracle(lo={lo:?}, hi={hi:?})"),
        }
    }
}

/// Body file formats: `{"lo":[…],"hi":[…]}` or `{"A":[[…]],"b":[…]}` with
/// an optional `"interior"` point.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BodyFile {
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Polytope {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        interior: Option<Vec<f64>>,
    },
}

fn check_box(lo: &[f64], hi: &[f64]) -> Result<()> {
    if lo.len() != hi.len() {
        return Err(Error::DimensionMismatch {
            left: lo.len(),
            right: hi.len(),
        });
    }
    if lo.is_empty() {
        return Err(Error::InvalidDimension {
            n: 0,
            reason: "body needs at least one coordinate",
        });
    }
    if lo.iter().zip(hi).any(|(l, h)| !(l < h && l.is_finite() && h.is_finite())) {
        return Err(Error::Domain("box needs finite lo < hi in every coordinate".into()));
    }
    Ok(())
}

fn lp_err(e: minilp::Error) -> Error {
    Error::Lp(e.to_string())
}

fn dot(a: &[f64], x: &[f64]) -> f64 {
    a.iter().zip(x).map(|(u, v)| u * v).sum()
}

impl ConvexBody {
    pub fn cube(n: usize) -> Result<Self> {
        Self::boxed(vec![0.0; n], vec![1.0; n])
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_box(&lo, &hi)?;
        Ok(ConvexBody::Box { lo, hi })
    }

    /// Polytope `{x : A x ≤ b}`; the interior point is the center of the
    /// largest inscribed ball and the bounding box comes from one linear
    /// program per coordinate and direction.
    pub fn polytope(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let n = Self::check_rows(&a, &b)?;
        let interior = chebyshev_center(&a, &b, n)?;
        Self::polytope_with_interior(a, b, interior)
    }

    pub fn polytope_with_interior(a: Vec<Vec<f64>>, b: Vec<f64>, interior: Vec<f64>) -> Result<Self> {
        let n = Self::check_rows(&a, &b)?;
        if interior.len() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: interior.len(),
            });
        }
        if a.iter().zip(&b).any(|(row, bi)| dot(row, &interior) >= *bi) {
            return Err(Error::Degenerate("interior point is not strictly feasible".into()));
        }
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        for j in 0..n {
            for (dir, slot) in [
                (OptimizationDirection::Minimize, &mut lo[j]),
                (OptimizationDirection::Maximize, &mut hi[j]),
            ] {
                let mut pb = Problem::new(dir);
                let vars: Vec<_> = (0..n)
                    .map(|i| pb.add_var(if i == j { 1.0 } else { 0.0 }, (f64::NEG_INFINITY, f64::INFINITY)))
                    .collect();
                for (row, bi) in a.iter().zip(&b) {
                    pb.add_constraint(vars.iter().zip(row).map(|(v, c)| (*v, *c)).collect::<Vec<_>>(), ComparisonOp::Le, *bi);
                }
                let sol = pb.solve().map_err(|e| match e {
                    minilp::Error::Unbounded => Error::Degenerate(format!("polytope is unbounded along coordinate {}", j + 1)),
                    other => lp_err(other),
                })?;
                *slot = sol.objective();
            }
        }
        Ok(ConvexBody::Polytope { a, b, interior, lo, hi })
    }

    fn check_rows(a: &[Vec<f64>], b: &[f64]) -> Result<usize> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        let n = a.first().map_or(0, Vec::len);
        if n == 0 {
            return Err(Error::InvalidDimension {
                n: 0,
                reason: "polytope needs at least one constraint and one coordinate",
            });
        }
        if let Some(row) = a.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { left: n, right: row.len() });
        }
        if a.iter().flatten().chain(b).any(|x| !x.is_finite()) {
            return Err(Error::Domain("constraint data must be finite".into()));
        }
        Ok(n)
    }

    pub fn oracle(inside: Inside, lo: Vec<f64>, hi: Vec<f64>, interior: Vec<f64>) -> Result<Self> {
        check_box(&lo, &hi)?;
        if interior.len() != lo.len() {
            return Err(Error::DimensionMismatch {
                left: lo.len(),
                right: interior.len(),
            });
        }
        if !inside(&interior) {
            return Err(Error::State("interior point fails the membership test".into()));
        }
        Ok(ConvexBody::Oracle {
            inside,
            lo,
            hi,
            interior,
            radius_hint: None,
        })
    }

    /// Membership-oracle view of this body, answered by bisection chords.
    pub fn as_oracle(&self) -> ConvexBody {
        match self {
            ConvexBody::Oracle { .. } => self.clone(),
            _ => {
                let me = self.clone();
                ConvexBody::Oracle {
                    inside: Arc::new(move |x: &[f64]| me.contains(x)),
                    lo: self.lo().to_vec(),
                    hi: self.hi().to_vec(),
                    interior: self.interior_point(),
                    radius_hint: None,
                }
            }
        }
    }

    pub fn from_file(file: BodyFile) -> Result<Self> {
        match file {
            BodyFile::Box { lo, hi } => Self::boxed(lo, hi),
            BodyFile::Polytope { a, b, interior: None } => Self::polytope(a, b),
            BodyFile::Polytope {
                a,
                b,
                interior: Some(x),
            } => Self::polytope_with_interior(a, b, x),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo().len()
    }

    pub fn lo(&self) -> &[f64] {
        match self {
            ConvexBody::Box { lo, .. } | ConvexBody::Polytope { lo, .. } | ConvexBody::Oracle { lo, .. } => lo,
        }
    }

    pub fn hi(&self) -> &[f64] {
        match self {
            ConvexBody::Box { hi, .. } | ConvexBody::Polytope { hi, .. } | ConvexBody::Oracle { hi, .. } => hi,
        }
    }

    /// Euclidean diameter of the bounding box.
    pub fn diameter(&self) -> f64 {
        self.lo()
            .iter()
            .zip(self.hi())
            .map(|(l, h)| (h - l) * (h - l))
            .sum::<f64>()
            .sqrt()
    }

    pub fn interior_point(&self) -> Vec<f64> {
        match self {
            ConvexBody::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect(),
            ConvexBody::Polytope { interior, .. } | ConvexBody::Oracle { interior, .. } => interior.clone(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            ConvexBody::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| l <= v && v <= h),
            ConvexBody::Polytope { a, b, .. } => a
                .iter()
                .zip(b)
                .all(|(row, bi)| dot(row, x) <= bi + FEAS_TOL * (1.0 + bi.abs())),
            ConvexBody::Oracle { inside, .. } => inside(x),
        }
    }

    /// Maximal interval `[l, u]` of `t` with `x + t·d` in the body. Analytic
    /// for boxes and polytopes; bracketed bisection for oracles.
    pub fn chord_along(&self, x: &[f64], d: &[f64]) -> Result<(f64, f64)> {
        if x.len() != self.dim() || d.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: x.len().max(d.len()),
            });
        }
        if !self.contains(x) {
            return Err(Error::State("point lies outside the body".into()));
        }
        match self {
            ConvexBody::Box { lo, hi } => Ok(box_chord(lo, hi, x, d)),
            ConvexBody::Polytope { a, b, .. } => {
                let (mut l, mut u) = (f64::NEG_INFINITY, f64::INFINITY);
                for (row, bi) in a.iter().zip(b) {
                    let c = dot(row, d);
                    let slack = (bi - dot(row, x)).max(0.0);
                    if c > 0.0 {
                        u = u.min(slack / c);
                    } else if c < 0.0 {
                        l = l.max(slack / c);
                    }
                }
                Ok((l.min(0.0), u.max(0.0)))
            }
            ConvexBody::Oracle { inside, lo, hi, .. } => {
                let (bl, bu) = box_chord(lo, hi, x, d);
                let tol = 1e-10 * self.diameter();
                let u = bisect_ray(inside.as_ref(), x, d, bu, tol);
                let neg: Vec<f64> = d.iter().map(|v| -v).collect();
                let l = -bisect_ray(inside.as_ref(), x, &neg, -bl, tol);
                Ok((l, u))
            }
        }
    }

    /// Coordinate chord through `x` along `axis`, in absolute coordinates.
    pub fn chord(&self, x: &[f64], axis: usize) -> Result<(f64, f64)> {
        if axis >= self.dim() {
            return Err(Error::Domain(format!("axis {axis} out of range for dimension {}", self.dim())));
        }
        let mut e = vec![0.0; self.dim()];
        e[axis] = 1.0;
        let (l, u) = self.chord_along(x, &e)?;
        Ok((x[axis] + l, x[axis] + u))
    }
}

fn box_chord(lo: &[f64], hi: &[f64], x: &[f64], d: &[f64]) -> (f64, f64) {
    let (mut l, mut u) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..x.len() {
        if d[i] > 0.0 {
            u = u.min((hi[i] - x[i]) / d[i]);
            l = l.max((lo[i] - x[i]) / d[i]);
        } else if d[i] < 0.0 {
            u = u.min((lo[i] - x[i]) / d[i]);
            l = l.max((hi[i] - x[i]) / d[i]);
        }
    }
    (l.min(0.0), u.max(0.0))
}

/// Largest `t ∈ [0, limit]` with `x + t·d` inside, to within `tol`; returns
/// the inside end of the final bracket.
fn bisect_ray(inside: &(dyn Fn(&[f64]) -> bool + Send + Sync), x: &[f64], d: &[f64], limit: f64, tol: f64) -> f64 {
    let at = |t: f64| -> Vec<f64> { x.iter().zip(d).map(|(a, b)| a + t * b).collect() };
    if limit <= 0.0 {
        return 0.0;
    }
    if inside(&at(limit)) {
        return limit;
    }
    // bracket doubling from a small step, capped by the bounding box
    let mut good = 0.0;
    let mut step = (limit * 1e-3).max(tol);
    let mut bad = limit;
    loop {
        let t = good + step;
        if t >= limit {
            break;
        }
        if inside(&at(t)) {
            good = t;
            step *= 2.0;
        } else {
            bad = t;
            break;
        }
    }
    while bad - good > tol {
        let mid = 0.5 * (good + bad);
        if inside(&at(mid)) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

/// Center and radius of the largest ball inside `{A x ≤ b}`.
fn chebyshev_center(a: &[Vec<f64>], b: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut pb = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..n)
        .map(|_| pb.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    // capping the radius keeps the program bounded for unbounded bodies
    let r = pb.add_var(1.0, (0.0, 1e6));
    for (row, bi) in a.iter().zip(b) {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut terms: Vec<_> = vars.iter().zip(row).map(|(v, c)| (*v, *c)).collect();
        terms.push((r, norm));
        pb.add_constraint(terms, ComparisonOp::Le, *bi);
    }
    let sol = pb.solve().map_err(|e| match e {
        minilp::Error::Infeasible => Error::Degenerate("polytope is empty".into()),
        other => lp_err(other),
    })?;
    if sol[r] <= 1e-12 {
        return Err(Error::Degenerate("polytope has empty interior".into()));
    }
    Ok(vars.iter().map(|v| sol[*v]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simplex(n: usize) -> ConvexBody {
        let mut a = vec![];
        let mut b = vec![];
        for i in 0..n {
            let mut row = vec![0.0; n];
            row[i] = -1.0;
            a.push(row);
            b.push(0.0);
        }
        a.push(vec![1.0; n]);
        b.push(1.0);
        ConvexBody::polytope(a, b).unwrap()
    }

    #[test]
    fn box_chord_example() {
        let c = ConvexBody::cube(3).unwrap();
        assert_eq!(c.chord(&[0.5, 0.5, 0.5], 0).unwrap(), (0.0, 1.0));
    }

    #[test]
    fn simplex_chord_and_bbox() {
        let s = simplex(3);
        let (l, u) = s.chord(&[0.2, 0.3, 0.1], 0).unwrap();
        assert!(l.abs() < 1e-12 && (u - 0.6).abs() < 1e-12);
        for (l, h) in s.lo().iter().zip(s.hi()) {
            assert!(l.abs() < 1e-9 && (h - 1.0).abs() < 1e-9);
        }
        assert!(s.contains(&s.interior_point()));
        let o = s.as_oracle();
        let (lo, uo) = o.chord(&[0.2, 0.3, 0.1], 0).unwrap();
        assert!((lo - l).abs() < 1e-8 && (uo - u).abs() < 1e-8);
    }

    #[test]
    fn outside_point_is_a_state_error() {
        let c = ConvexBody::cube(2).unwrap();
        assert!(matches!(c.chord(&[1.5, 0.5], 0), Err(Error::State(_))));
    }

    #[test]
    fn unbounded_and_empty_polytopes() {
        let half_plane = ConvexBody::polytope(vec![vec![1.0, 0.0]], vec![1.0]);
        assert!(half_plane.is_err());
        let empty = ConvexBody::polytope(vec![vec![1.0], vec![-1.0]], vec![0.0, -1.0]);
        assert!(empty.is_err());
    }

    #[test]
    fn body_file_formats() {
        let f: BodyFile = serde_json::from_str(r#"{"lo":[0,0],"hi":[1,100]}"#).unwrap();
        assert!(matches!(ConvexBody::from_file(f).unwrap(), ConvexBody::Box { .. }));
        let f: BodyFile = serde_json::from_str(r#"{"A":[[1,0],[-1,0],[0,1],[0,-1]],"b":[1,0,1,0]}"#).unwrap();
        assert!(matches!(ConvexBody::from_file(f).unwrap(), ConvexBody::Polytope { .. }));
    }
}
