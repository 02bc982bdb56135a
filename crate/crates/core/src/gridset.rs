//! Unions of cells of a uniform grid on the unit cube.
//!
//! A [`GridSpec`] splits every axis of `[0,1]^n` into `k` equal half-open
//! intervals; a [`GridSet`] is a set of the resulting cells. Cell boundaries
//! have measure zero, so the cell-level boundary, axis-disjointness and
//! shaking below agree with their continuous counterparts almost everywhere.
//!
//! Cells are indexed row-major with coordinate 1 most significant, so the
//! linear order of indices is the lexicographic order of cell coordinates.

use std::fmt;

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::binomial;
use crate::bits::Bits;
use crate::error::{Error, Result};

/// Largest number of cells a grid may have.
pub const MAX_GRID_CELLS: usize = 1 << 24;
/// Largest grid on which anchored sets are enumerated exhaustively.
pub const MAX_ANCHORED_CELLS: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    k: usize,
}

impl GridSpec {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension {
                n,
                reason: "grid dimension must be at least 1",
            });
        }
        if k == 0 {
            return Err(Error::Parameter("cells per axis must be at least 1".into()));
        }
        let cells = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if cells > MAX_GRID_CELLS as u128 {
            return Err(Error::Capacity(format!(
                "grid {k}^{n} has more than {MAX_GRID_CELLS} cells"
            )));
        }
        Ok(GridSpec { n, k })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn cells_per_axis(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn cell_count(&self) -> usize {
        self.k.pow(self.n as u32)
    }

    /// Index distance between neighbouring cells along `axis`.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.k.pow((self.n - 1 - axis) as u32)
    }

    /// Breakpoint `j/k` on every axis.
    pub fn breakpoint(&self, j: usize) -> Ratio<u64> {
        Ratio::new(j as u64, self.k as u64)
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.n);
        coords.iter().fold(0, |acc, &c| acc * self.k + c)
    }

    pub fn coords(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for slot in out.iter_mut().rev() {
            *slot = index % self.k;
            index /= self.k;
        }
        out
    }

    #[inline]
    pub fn coord(&self, index: usize, axis: usize) -> usize {
        index / self.stride(axis) % self.k
    }

    /// First cell of every line parallel to `axis`.
    pub fn line_starts(&self, axis: usize) -> impl Iterator<Item = usize> + '_ {
        let stride = self.stride(axis);
        let block = stride * self.k;
        (0..self.cell_count() / block).flat_map(move |hi| (0..stride).map(move |lo| hi * block + lo))
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.k, self.n)
    }
}

/// Direction of a shaking transform: `Plus` pushes every fiber to the start
/// of its line, `Minus` to the end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Plus,
    Minus,
}

impl Direction {
    pub fn opposite(self) -> Direction {
        match self {
            Direction::Plus => Direction::Minus,
            Direction::Minus => Direction::Plus,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GridSetFile", into = "GridSetFile")]
pub struct GridSet {
    spec: GridSpec,
    cells: Bits,
}

#[derive(Serialize, Deserialize)]
struct GridSetFile {
    n: usize,
    k: usize,
    cells: Vec<Vec<usize>>,
}

impl TryFrom<GridSetFile> for GridSet {
    type Error = Error;

    fn try_from(file: GridSetFile) -> Result<Self> {
        let spec = GridSpec::new(file.n, file.k)?;
        let mut set = GridSet::empty(spec);
        for c in &file.cells {
            set.insert(c)?;
        }
        Ok(set)
    }
}

impl From<GridSet> for GridSetFile {
    fn from(set: GridSet) -> Self {
        GridSetFile {
            n: set.spec.n,
            k: set.spec.k,
            cells: set.cells.iter().map(|i| set.spec.coords(i)).collect(),
        }
    }
}

impl GridSet {
    pub fn empty(spec: GridSpec) -> Self {
        GridSet {
            spec,
            cells: Bits::new(spec.cell_count()),
        }
    }

    pub fn full(spec: GridSpec) -> Self {
        GridSet {
            spec,
            cells: Bits::full(spec.cell_count()),
        }
    }

    pub fn from_cells(spec: GridSpec, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut set = GridSet::empty(spec);
        let total = spec.cell_count();
        for i in indices {
            if i >= total {
                return Err(Error::Domain(format!("cell index {i} outside grid {spec}")));
            }
            set.cells.insert(i);
        }
        Ok(set)
    }

    pub fn from_predicate(spec: GridSpec, mut keep: impl FnMut(&[usize]) -> bool) -> Self {
        let cells = Bits::from_fn(spec.cell_count(), |i| keep(&spec.coords(i)));
        GridSet { spec, cells }
    }

    /// Each cell included independently with probability `density`.
    pub fn random<R: Rng + ?Sized>(spec: GridSpec, density: f64, rng: &mut R) -> Self {
        let cells = Bits::from_fn(spec.cell_count(), |_| rng.random_bool(density));
        GridSet { spec, cells }
    }

    #[inline]
    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn cells(&self) -> &Bits {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.count()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, coords: &[usize]) -> bool {
        coords.len() == self.spec.n
            && coords.iter().all(|&c| c < self.spec.k)
            && self.cells.contains(self.spec.index(coords))
    }

    pub fn contains_index(&self, index: usize) -> bool {
        self.cells.contains(index)
    }

    pub fn insert(&mut self, coords: &[usize]) -> Result<()> {
        if coords.len() != self.spec.n {
            return Err(Error::DimensionMismatch {
                left: self.spec.n,
                right: coords.len(),
            });
        }
        if let Some(&bad) = coords.iter().find(|&&c| c >= self.spec.k) {
            return Err(Error::Domain(format!(
                "cell coordinate {bad} outside 0..{}",
                self.spec.k
            )));
        }
        self.cells.insert(self.spec.index(coords));
        Ok(())
    }

    /// Cell indices in increasing (lexicographic) order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells.iter()
    }

    pub fn complement(&self) -> GridSet {
        GridSet {
            spec: self.spec,
            cells: self.cells.complement(),
        }
    }

    /// Exact volume `|cells| / kⁿ`.
    pub fn volume(&self) -> Ratio<u64> {
        Ratio::new(self.len() as u64, self.spec.cell_count() as u64)
    }

    /// Downward closed in the coordinatewise order of cells.
    pub fn is_anchored(&self) -> bool {
        self.cells.iter().all(|idx| {
            (0..self.spec.n).all(|axis| {
                let stride = self.spec.stride(axis);
                (idx / stride).is_multiple_of(self.spec.k) || self.cells.contains(idx - stride)
            })
        })
    }

    /// Cells within one coordinate of the set, including the set itself.
    pub fn closed_neighborhood(&self) -> GridSet {
        let spec = self.spec;
        let mut out = self.cells.clone();
        for axis in 0..spec.n {
            let stride = spec.stride(axis);
            for start in spec.line_starts(axis) {
                let hit = (0..spec.k).any(|t| self.cells.contains(start + t * stride));
                if hit {
                    for t in 0..spec.k {
                        out.insert(start + t * stride);
                    }
                }
            }
        }
        GridSet { spec, cells: out }
    }

    /// Cells outside the set that share all but at most one coordinate with
    /// some member.
    pub fn l0_boundary(&self) -> GridSet {
        let mut nb = self.closed_neighborhood();
        nb.cells.difference_with(&self.cells);
        nb
    }

    fn check_same_spec(&self, other: &GridSet) -> Result<()> {
        if self.spec != other.spec {
            Err(Error::RefinementRequired {
                left: self.spec.to_string(),
                right: other.spec.to_string(),
            })
        } else {
            Ok(())
        }
    }

    pub fn is_subset(&self, other: &GridSet) -> Result<bool> {
        self.check_same_spec(other)?;
        Ok(self.cells.is_subset(&other.cells))
    }

    /// Replace every fiber along `axis` by an initial (`Plus`) or terminal
    /// (`Minus`) segment with the same number of cells.
    pub fn shake(&self, axis: usize, direction: Direction) -> Result<GridSet> {
        let spec = self.spec;
        if axis >= spec.n {
            return Err(Error::Parameter(format!(
                "axis {axis} out of range for dimension {}",
                spec.n
            )));
        }
        let stride = spec.stride(axis);
        let mut out = Bits::new(spec.cell_count());
        for start in spec.line_starts(axis) {
            let m = (0..spec.k)
                .filter(|&t| self.cells.contains(start + t * stride))
                .count();
            let range = match direction {
                Direction::Plus => 0..m,
                Direction::Minus => spec.k - m..spec.k,
            };
            for t in range {
                out.insert(start + t * stride);
            }
        }
        Ok(GridSet { spec, cells: out })
    }

    /// Shake along axes `1..n` in order, then repeat the full pass once.
    pub fn full_shake(&self, direction: Direction) -> GridSet {
        let mut cur = self.clone();
        for _ in 0..2 {
            for axis in 0..self.spec.n {
                cur = cur.shake(axis, direction).expect("axis in range");
            }
        }
        cur
    }

    /// The same point set on the grid with `k·factor` cells per axis.
    pub fn refine(&self, factor: usize) -> Result<GridSet> {
        if factor == 0 {
            return Err(Error::Parameter("refinement factor must be at least 1".into()));
        }
        let k = self
            .spec
            .k
            .checked_mul(factor)
            .ok_or_else(|| Error::Capacity("cells per axis overflow".into()))?;
        let fine = GridSpec::new(self.spec.n, k)?;
        let coarse = self.spec;
        let cells = Bits::from_fn(fine.cell_count(), |idx| {
            let parent = fine
                .coords(idx)
                .iter()
                .fold(0, |acc, &c| acc * coarse.k + c / factor);
            self.cells.contains(parent)
        });
        Ok(GridSet { spec: fine, cells })
    }
}

impl fmt::Debug for GridSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GridSet[{}]", self.spec)?;
        f.debug_set()
            .entries(self.cells.iter().map(|i| self.spec.coords(i)))
            .finish()
    }
}

pub fn volume(a: &GridSet) -> Ratio<u64> {
    a.volume()
}

pub fn is_anchored(a: &GridSet) -> bool {
    a.is_anchored()
}

pub fn l0_boundary(a: &GridSet) -> GridSet {
    a.l0_boundary()
}

pub fn shake(a: &GridSet, axis: usize, direction: Direction) -> Result<GridSet> {
    a.shake(axis, direction)
}

pub fn full_shake(a: &GridSet, direction: Direction) -> GridSet {
    a.full_shake(direction)
}

pub fn refine(a: &GridSet, factor: usize) -> Result<GridSet> {
    a.refine(factor)
}

/// True iff every pair of cells from `a` and `b` differs in at least two
/// coordinates.
pub fn are_axis_disjoint(a: &GridSet, b: &GridSet) -> Result<bool> {
    a.check_same_spec(b)?;
    if a.is_empty() || b.is_empty() {
        return Ok(true);
    }
    Ok(a.closed_neighborhood().cells.is_disjoint(&b.cells))
}

/// The grid shadow of the weighted Hamming ball `H(j/k, r)`: cells with at
/// least `n − r` coordinates below breakpoint `j`.
pub fn hamming_ball(spec: GridSpec, j: usize, r: usize) -> Result<GridSet> {
    if j > spec.k {
        return Err(Error::Domain(format!("breakpoint {j} beyond k = {}", spec.k)));
    }
    if r > spec.n {
        return Err(Error::Domain(format!("radius {r} beyond n = {}", spec.n)));
    }
    let need = spec.n - r;
    Ok(GridSet::from_predicate(spec, |c| {
        c.iter().filter(|&&x| x < j).count() >= need
    }))
}

/// Visit every anchored set of the grid. Stops early and returns `false` if
/// the visitor returns `false`.
pub fn for_each_anchored(spec: GridSpec, mut visit: impl FnMut(&GridSet) -> bool) -> bool {
    fn rec(idx: usize, set: &mut GridSet, visit: &mut dyn FnMut(&GridSet) -> bool) -> bool {
        let spec = set.spec;
        if idx == spec.cell_count() {
            return visit(set);
        }
        if !rec(idx + 1, set, visit) {
            return false;
        }
        let below_present = (0..spec.n).all(|axis| {
            let stride = spec.stride(axis);
            (idx / stride).is_multiple_of(spec.k) || set.cells.contains(idx - stride)
        });
        if below_present {
            set.cells.insert(idx);
            let keep_going = rec(idx + 1, set, visit);
            set.cells.remove(idx);
            if !keep_going {
                return false;
            }
        }
        true
    }
    let mut set = GridSet::empty(spec);
    rec(0, &mut set, &mut visit)
}

/// One cardinality level of the anchored boundary profile.
#[derive(Clone, Debug, Serialize)]
pub struct HarperLevel {
    pub cells: usize,
    /// Fewest boundary cells over anchored sets with this many cells.
    pub min_boundary_cells: usize,
    /// Breakpoint Hamming balls `(j, r, boundary cells)` with this cardinality.
    pub balls: Vec<(usize, usize, usize)>,
    /// Continuous lower bound on the boundary volume at this volume.
    pub harper_bound: f64,
}

impl HarperLevel {
    pub fn min_boundary_volume(&self, spec: GridSpec) -> f64 {
        self.min_boundary_cells as f64 / spec.cell_count() as f64
    }
}

/// Exhaustive boundary profile of anchored grid sets, set against the
/// weighted Hamming balls whose radius and breakpoint live on the grid.
pub fn harper_profile(spec: GridSpec) -> Result<Vec<HarperLevel>> {
    let total = spec.cell_count();
    if total > MAX_ANCHORED_CELLS {
        return Err(Error::Capacity(format!(
            "anchored enumeration on {spec} exceeds {MAX_ANCHORED_CELLS} cells"
        )));
    }
    let mut min_boundary = vec![usize::MAX; total + 1];
    for_each_anchored(spec, |a| {
        let c = a.len();
        let b = a.l0_boundary().len();
        if b < min_boundary[c] {
            min_boundary[c] = b;
        }
        true
    });
    let mut balls: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); total + 1];
    for j in 1..spec.k {
        for r in 0..spec.n {
            let ball = hamming_ball(spec, j, r)?;
            balls[ball.len()].push((j, r, ball.l0_boundary().len()));
        }
    }
    (1..total)
        .map(|c| {
            let lambda = c as f64 / total as f64;
            Ok(HarperLevel {
                cells: c,
                min_boundary_cells: min_boundary[c],
                balls: std::mem::take(&mut balls[c]),
                harper_bound: binomial::harper_boundary_bound(spec.n as u64, lambda)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(n: usize, k: usize) -> GridSpec {
        GridSpec::new(n, k).unwrap()
    }

    fn set(n: usize, k: usize, cells: &[&[usize]]) -> GridSet {
        let mut s = GridSet::empty(spec(n, k));
        for c in cells {
            s.insert(c).unwrap();
        }
        s
    }

    #[test]
    fn index_order_is_lexicographic() {
        let g = spec(3, 4);
        let mut prev: Option<Vec<usize>> = None;
        for i in 0..g.cell_count() {
            let c = g.coords(i);
            assert_eq!(g.index(&c), i);
            if let Some(p) = prev {
                assert!(p < c);
            }
            prev = Some(c);
        }
    }

    #[test]
    fn volume_examples() {
        assert_eq!(GridSet::full(spec(3, 2)).volume(), Ratio::from_integer(1));
        assert_eq!(set(3, 2, &[&[1, 0, 1]]).volume(), Ratio::new(1, 8));
        assert_eq!(GridSet::empty(spec(2, 5)).volume(), Ratio::from_integer(0));
    }

    #[test]
    fn anchored_examples() {
        assert!(set(3, 3, &[&[0, 0, 0]]).is_anchored());
        assert!(!set(2, 2, &[&[1, 0]]).is_anchored());
        assert!(GridSet::full(spec(2, 4)).is_anchored());
        assert!(GridSet::empty(spec(2, 4)).is_anchored());
    }

    #[test]
    fn boundary_examples() {
        let a = set(2, 3, &[&[0, 0]]);
        let b = a.l0_boundary();
        assert_eq!(b, set(2, 3, &[&[0, 1], &[0, 2], &[1, 0], &[2, 0]]));
        assert_eq!(b.volume(), Ratio::new(4, 9));
        assert!(GridSet::full(spec(3, 3)).l0_boundary().is_empty());
    }

    #[test]
    fn hamming_ball_boundary_is_next_shell() {
        for (n, k) in [(2, 3), (3, 3), (3, 4), (4, 2)] {
            let g = spec(n, k);
            for j in 1..k {
                for r in 0..n {
                    let ball = hamming_ball(g, j, r).unwrap();
                    let next = hamming_ball(g, j, r + 1).unwrap();
                    let mut shell = next.clone();
                    shell.cells.difference_with(&ball.cells);
                    assert_eq!(ball.l0_boundary(), shell, "n={n} k={k} j={j} r={r}");
                }
            }
        }
    }

    #[test]
    fn axis_disjoint_examples() {
        let a = set(3, 2, &[&[0, 0, 0]]);
        let b = set(3, 2, &[&[1, 1, 1]]);
        assert!(are_axis_disjoint(&a, &b).unwrap());
        let c = set(3, 2, &[&[0, 0, 1]]);
        assert!(!are_axis_disjoint(&a, &c).unwrap());
        let other = GridSet::empty(spec(3, 3));
        assert!(matches!(
            are_axis_disjoint(&a, &other),
            Err(Error::RefinementRequired { .. })
        ));
    }

    #[test]
    fn shake_examples() {
        let a = set(1, 4, &[&[1], &[3]]);
        assert_eq!(a.shake(0, Direction::Plus).unwrap(), set(1, 4, &[&[0], &[1]]));
        assert_eq!(a.shake(0, Direction::Minus).unwrap(), set(1, 4, &[&[2], &[3]]));

        let b = set(2, 2, &[&[0, 1], &[1, 1]]);
        assert_eq!(b.shake(1, Direction::Plus).unwrap(), set(2, 2, &[&[0, 0], &[1, 0]]));

        let anchored = set(2, 3, &[&[0, 0], &[0, 1], &[1, 0]]);
        for axis in 0..2 {
            assert_eq!(anchored.shake(axis, Direction::Plus).unwrap(), anchored);
        }
        assert_eq!(anchored.full_shake(Direction::Plus), anchored);
        assert!(a.shake(1, Direction::Plus).is_err());
    }

    #[test]
    fn full_shake_of_random_sets_is_anchored() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = spec(3, 3);
        for i in 0..1000 {
            let density = 0.1 * (1 + i % 9) as f64;
            let a = GridSet::random(g, density, &mut rng);
            let s = a.full_shake(Direction::Plus);
            assert!(s.is_anchored());
            assert_eq!(s.volume(), a.volume());
        }
    }

    #[test]
    fn refine_examples() {
        let a = set(2, 2, &[&[1, 0]]);
        assert_eq!(a.refine(1).unwrap(), a);
        let r = a.refine(2).unwrap();
        assert_eq!(r.len(), 4);
        assert_eq!(r.volume(), Ratio::new(1, 4));
        assert_eq!(r, set(2, 4, &[&[2, 0], &[2, 1], &[3, 0], &[3, 1]]));
        assert!(matches!(
            GridSet::full(spec(4, 16)).refine(16),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn anchored_enumeration_counts() {
        // Down-sets of a k×k grid are lattice paths: C(2k, k).
        let mut count = 0;
        for_each_anchored(spec(2, 3), |a| {
            assert!(a.is_anchored());
            count += 1;
            true
        });
        assert_eq!(count, 20);
        let mut count = 0;
        for_each_anchored(spec(3, 2), |_| {
            count += 1;
            true
        });
        // Down-sets of the Boolean lattice B_3 (Dedekind number M(3)).
        assert_eq!(count, 20);
    }

    #[test]
    fn json_layout() {
        let a = set(2, 3, &[&[2, 0], &[0, 1]]);
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, r#"{"n":2,"k":3,"cells":[[0,1],[2,0]]}"#);
        let back: GridSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
        assert!(serde_json::from_str::<GridSet>(r#"{"n":2,"k":3,"cells":[[3,0]]}"#).is_err());
    }
}
