//! The discrete hypercube `{0,1}^n`: vertices, Hamming geometry, vertex
//! boundaries, the middle-layer construction, and exact brute force of the
//! isoperimetric coefficient over uniform grid sets.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::gridset::{GridSet, GridSpec};

/// Largest supported hypercube dimension.
pub const MAX_DIM: usize = 24;

/// Largest cell count `k^n` accepted by [`psi_grid_exact`]; the search visits
/// every one of the `2^(k^n)` cell subsets.
pub const MAX_PSI_CELLS: usize = 24;

/// A vertex of `{0,1}^n`. Coordinate `i` (zero based) is stored in bit `i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    bits: u32,
    n: u8,
}

impl BitVector {
    pub fn new(n: usize, bits: u32) -> Result<Self> {
        check_dim(n)?;
        if n < 32 && bits >> n != 0 {
            return Err(Error::Domain(format!(
                "bit pattern {bits:#x} has coordinates beyond dimension {n}"
            )));
        }
        Ok(BitVector { bits, n: n as u8 })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    pub fn from_coords(coords: &[u8]) -> Result<Self> {
        let mut bits = 0u32;
        for (i, &c) in coords.iter().enumerate() {
            match c {
                0 => {}
                1 => bits |= 1 << i,
                other => {
                    return Err(Error::Domain(format!("coordinate value {other} is not 0/1")))
                }
            }
        }
        Self::new(coords.len(), bits)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn bits(&self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn index(&self) -> usize {
        self.bits as usize
    }

    #[inline]
    pub fn coord(&self, i: usize) -> bool {
        self.bits >> i & 1 == 1
    }

    /// Number of nonzero coordinates.
    #[inline]
    pub fn l0_norm(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// The antipodal vertex `(1,…,1) − s`.
    #[inline]
    pub fn complement(&self) -> BitVector {
        BitVector {
            bits: !self.bits & mask(self.dim()),
            n: self.n,
        }
    }

    #[inline]
    pub fn flip(&self, i: usize) -> BitVector {
        BitVector {
            bits: self.bits ^ (1 << i),
            n: self.n,
        }
    }

    #[inline]
    pub fn xor(&self, other: &BitVector) -> BitVector {
        BitVector {
            bits: self.bits ^ other.bits,
            n: self.n,
        }
    }

    /// Number of coordinates where the two vertices differ.
    pub fn hamming_distance(&self, other: &BitVector) -> Result<usize> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok((self.bits ^ other.bits).count_ones() as usize)
    }
}

#[inline]
pub(crate) fn mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidDimension {
            n,
            reason: "dimension must be at least 1",
        })
    } else if n > MAX_DIM {
        Err(Error::InvalidDimension {
            n,
            reason: "dimension above the supported cap of 24",
        })
    } else {
        Ok(())
    }
}

pub fn l0_norm(x: &BitVector) -> usize {
    x.l0_norm()
}

pub fn hamming_distance(s: &BitVector, t: &BitVector) -> Result<usize> {
    s.hamming_distance(t)
}

/// Big-endian bitstring: coordinate 1 is the leftmost character.
impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim() {
            f.write_str(if self.coord(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let coords = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => Err(Error::Parse(format!("invalid bit {other:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        BitVector::from_coords(&coords)
    }
}

impl Serialize for BitVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A subset of `{0,1}^n`, stored as a dense bitset over the `2^n` vertices.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VertexSetFile", into = "VertexSetFile")]
pub struct VertexSet {
    n: usize,
    members: Bits,
}

#[derive(Serialize, Deserialize)]
struct VertexSetFile {
    n: usize,
    members: Vec<String>,
}

impl TryFrom<VertexSetFile> for VertexSet {
    type Error = Error;

    fn try_from(file: VertexSetFile) -> Result<Self> {
        let mut set = VertexSet::empty(file.n)?;
        for m in &file.members {
            let v: BitVector = m.parse()?;
            set.insert(v)?;
        }
        Ok(set)
    }
}

impl From<VertexSet> for VertexSetFile {
    fn from(set: VertexSet) -> Self {
        VertexSetFile {
            n: set.n,
            members: set.iter().map(|v| v.to_string()).collect(),
        }
    }
}

impl VertexSet {
    pub fn empty(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(VertexSet {
            n,
            members: Bits::new(1 << n),
        })
    }

    pub fn full(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(VertexSet {
            n,
            members: Bits::full(1 << n),
        })
    }

    pub fn from_predicate(n: usize, mut keep: impl FnMut(BitVector) -> bool) -> Result<Self> {
        check_dim(n)?;
        let members = Bits::from_fn(1 << n, |i| {
            keep(BitVector {
                bits: i as u32,
                n: n as u8,
            })
        });
        Ok(VertexSet { n, members })
    }

    pub fn from_vertices(n: usize, vertices: impl IntoIterator<Item = BitVector>) -> Result<Self> {
        let mut set = VertexSet::empty(n)?;
        for v in vertices {
            set.insert(v)?;
        }
        Ok(set)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.count()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        v.dim() == self.n && self.members.contains(v.index())
    }

    pub fn insert(&mut self, v: BitVector) -> Result<()> {
        if v.dim() != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: v.dim(),
            });
        }
        self.members.insert(v.index());
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = BitVector> + '_ {
        let n = self.n as u8;
        self.members.iter().map(move |i| BitVector { bits: i as u32, n })
    }

    pub fn bits(&self) -> &Bits {
        &self.members
    }

    fn check_same_dim(&self, other: &VertexSet) -> Result<()> {
        if self.n != other.n {
            Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            })
        } else {
            Ok(())
        }
    }

    pub fn union(&self, other: &VertexSet) -> Result<VertexSet> {
        self.check_same_dim(other)?;
        let mut out = self.clone();
        out.members.union_with(&other.members);
        Ok(out)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> Result<bool> {
        self.check_same_dim(other)?;
        Ok(self.members.is_disjoint(&other.members))
    }

    /// `A` together with every vertex at Hamming distance one from `A`.
    pub fn closed_neighborhood(&self) -> VertexSet {
        let mut out = self.members.clone();
        for i in 0..self.n {
            let flipped = flip_axis(&self.members, i);
            out.union_with(&flipped);
        }
        VertexSet {
            n: self.n,
            members: out,
        }
    }

    /// Vertices outside `A` adjacent to some vertex of `A`.
    pub fn vertex_boundary(&self) -> VertexSet {
        let mut nb = self.closed_neighborhood();
        nb.members.difference_with(&self.members);
        nb
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

const IN_WORD_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0F0F_0F0F_0F0F_0F0F,
    0x00FF_00FF_00FF_00FF,
    0x0000_FFFF_0000_FFFF,
    0x0000_0000_FFFF_FFFF,
];

/// Image of a vertex bitset under `x ↦ x ⊕ e_axis`.
fn flip_axis(set: &Bits, axis: usize) -> Bits {
    let mut out = set.clone();
    let words = out.words_mut();
    if axis < 6 {
        let shift = 1u32 << axis;
        let m = IN_WORD_MASKS[axis];
        for w in words.iter_mut() {
            *w = ((*w & m) << shift) | ((*w >> shift) & m);
        }
    } else {
        let stride = 1usize << (axis - 6);
        for wi in 0..words.len() {
            if wi & stride == 0 {
                words.swap(wi, wi | stride);
            }
        }
    }
    out
}

pub fn vertex_boundary(a: &VertexSet) -> VertexSet {
    a.vertex_boundary()
}

/// True iff every `a ∈ A`, `b ∈ B` differ in at least two coordinates.
pub fn are_axis_disjoint(a: &VertexSet, b: &VertexSet) -> Result<bool> {
    a.check_same_dim(b)?;
    if a.is_empty() || b.is_empty() {
        return Ok(true);
    }
    Ok(a.closed_neighborhood().members.is_disjoint(&b.members))
}

/// The middle-layer split of `{0,1}^n`.
#[derive(Clone, Debug)]
pub struct HalvingSplit {
    /// Vertices with weight above `⌈n/2⌉`.
    pub s1: VertexSet,
    /// Vertices with weight below `⌊n/2⌋`.
    pub s2: VertexSet,
    /// The middle layers.
    pub s3: VertexSet,
}

impl HalvingSplit {
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.s1.len(), self.s2.len(), self.s3.len())
    }

    /// `|S3| / min(|S1|, |S2|)`.
    pub fn ratio(&self) -> Ratio<u64> {
        let (a, b, c) = self.sizes();
        Ratio::new(c as u64, a.min(b) as u64)
    }
}

pub fn halving_construction(n: usize) -> Result<HalvingSplit> {
    check_dim(n)?;
    if n < 2 {
        return Err(Error::Degenerate(format!(
            "n = {n}: the upper and lower layers are empty, ratio undefined"
        )));
    }
    let lo = n / 2;
    let hi = n.div_ceil(2);
    let s1 = VertexSet::from_predicate(n, |x| x.l0_norm() > hi)?;
    let s2 = VertexSet::from_predicate(n, |x| x.l0_norm() < lo)?;
    let s3 = VertexSet::from_predicate(n, |x| (lo..=hi).contains(&x.l0_norm()))?;
    Ok(HalvingSplit { s1, s2, s3 })
}

/// Exact value of a grid-restricted isoperimetric ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsiValue {
    Finite(Ratio<u64>),
    /// No nonempty set leaves room for an axis-disjoint partner.
    Infinite,
}

impl PsiValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            PsiValue::Finite(r) => *r.numer() as f64 / *r.denom() as f64,
            PsiValue::Infinite => f64::INFINITY,
        }
    }
}

impl PartialOrd for PsiValue {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PsiValue {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match (self, other) {
            (PsiValue::Finite(a), PsiValue::Finite(b)) => a.cmp(b),
            (PsiValue::Finite(_), PsiValue::Infinite) => Less,
            (PsiValue::Infinite, PsiValue::Finite(_)) => Greater,
            (PsiValue::Infinite, PsiValue::Infinite) => Equal,
        }
    }
}

impl fmt::Display for PsiValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsiValue::Finite(r) => write!(f, "{r}"),
            PsiValue::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PsiGrid {
    pub spec: GridSpec,
    pub value: PsiValue,
    /// Minimizing first set; `None` when the value is infinite.
    pub witness: Option<GridSet>,
    /// Cells of the witness boundary, and of the residual set it leaves.
    pub boundary_cells: usize,
    pub residual_cells: usize,
}

#[derive(Clone, Copy)]
struct Candidate {
    num: u64,
    den: u64,
    mask: u32,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        let lhs = self.num * other.den;
        let rhs = other.num * self.den;
        lhs < rhs || (lhs == rhs && self.mask < other.mask)
    }
}

fn pick(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.better_than(&x) { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Minimum over nonempty cell sets `S₁` of `|∂S₁| / min(|S₁|, kⁿ − |S₁| − |∂S₁|)`
/// on the `kⁿ` grid, where the partner set is everything not within one
/// coordinate of `S₁`. Ties go to the smallest witness mask (cell `c` of the
/// row-major order is bit `c`).
pub fn psi_grid_exact(n: usize, k: usize) -> Result<PsiGrid> {
    let spec = GridSpec::new(n, k)?;
    let cells = spec.cell_count();
    if cells > MAX_PSI_CELLS {
        return Err(Error::Capacity(format!(
            "psi_grid_exact enumerates 2^(k^n) subsets; k^n = {cells} exceeds {MAX_PSI_CELLS}"
        )));
    }
    let neighbors: Vec<u32> = (0..cells)
        .map(|c| {
            let a = spec.coords(c);
            (0..cells)
                .filter(|&d| {
                    let b = spec.coords(d);
                    a.iter().zip(&b).filter(|(x, y)| x != y).count() <= 1
                })
                .fold(0u32, |m, d| m | (1 << d))
        })
        .collect();
    let total = cells as u32;
    let full: u32 = mask(cells);

    const CHUNK: u32 = 1 << 14;
    let chunks = (full as u64 / CHUNK as u64 + 1) as u32;
    let best = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let start = (ci * CHUNK).max(1);
            let end = ((ci as u64 + 1) * CHUNK as u64).min(full as u64 + 1) as u32;
            let mut best: Option<Candidate> = None;
            for set in start..end {
                let mut closed = 0u32;
                let mut rest = set;
                while rest != 0 {
                    closed |= neighbors[rest.trailing_zeros() as usize];
                    rest &= rest - 1;
                }
                let residual = total - closed.count_ones();
                if residual == 0 {
                    continue;
                }
                let boundary = (closed & !set).count_ones();
                let cand = Candidate {
                    num: boundary as u64,
                    den: set.count_ones().min(residual) as u64,
                    mask: set,
                };
                if best.is_none_or(|b| cand.better_than(&b)) {
                    best = Some(cand);
                }
            }
            best
        })
        .reduce(|| None, pick);

    Ok(match best {
        None => PsiGrid {
            spec,
            value: PsiValue::Infinite,
            witness: None,
            boundary_cells: 0,
            residual_cells: 0,
        },
        Some(c) => {
            let witness = GridSet::from_cells(
                spec,
                (0..cells).filter(|&i| c.mask >> i & 1 == 1),
            )?;
            let boundary = witness.l0_boundary();
            let boundary_cells = boundary.len();
            let residual_cells = cells - witness.len() - boundary_cells;
            PsiGrid {
                spec,
                value: PsiValue::Finite(Ratio::new(c.num, c.den)),
                witness: Some(witness),
                boundary_cells,
                residual_cells,
            }
        }
    })
}

/// The same minimum as [`psi_grid_exact`] restricted to anchored `S₁`,
/// found by enumerating down-sets only. Shaking never increases the
/// boundary of `S₁`, so the two minima agree.
pub fn psi_anchored(n: usize, k: usize) -> Result<PsiValue> {
    let spec = GridSpec::new(n, k)?;
    if spec.cell_count() > crate::gridset::MAX_ANCHORED_CELLS {
        return Err(Error::Capacity(format!(
            "anchored enumeration on {spec} exceeds {} cells",
            crate::gridset::MAX_ANCHORED_CELLS
        )));
    }
    let total = spec.cell_count();
    let mut best = PsiValue::Infinite;
    crate::gridset::for_each_anchored(spec, |a| {
        if a.is_empty() {
            return true;
        }
        let boundary = a.l0_boundary().len();
        let residual = total - a.len() - boundary;
        if residual > 0 {
            let v = PsiValue::Finite(Ratio::new(boundary as u64, a.len().min(residual) as u64));
            best = best.min(v);
        }
        true
    });
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    #[test]
    fn l0_norm_examples() {
        assert_eq!(l0_norm(&bv("000")), 0);
        assert_eq!(l0_norm(&bv("1011")), 3);
        assert_eq!(l0_norm(&bv("11111")), 5);
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_distance(&bv("0101"), &bv("0000")).unwrap(), 2);
        let s = bv("0110");
        assert_eq!(hamming_distance(&s, &s).unwrap(), 0);
        assert_eq!(hamming_distance(&s, &s.complement()).unwrap(), 4);
        assert!(matches!(
            hamming_distance(&bv("01"), &bv("010")),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bitstring_is_big_endian() {
        let v = bv("1000");
        assert!(v.coord(0));
        assert_eq!(v.bits(), 1);
        assert_eq!(v.to_string(), "1000");
        assert!("10x".parse::<BitVector>().is_err());
        assert!(BitVector::new(3, 0b1000).is_err());
        assert!(BitVector::zero(25).is_err());
    }

    #[test]
    fn axis_disjoint_examples() {
        let a = VertexSet::from_vertices(4, [bv("0000")]).unwrap();
        let b = VertexSet::from_vertices(4, [bv("1111")]).unwrap();
        let c = VertexSet::from_vertices(4, [bv("0001")]).unwrap();
        assert!(are_axis_disjoint(&a, &b).unwrap());
        assert!(!are_axis_disjoint(&a, &c).unwrap());
        let empty = VertexSet::empty(4).unwrap();
        assert!(are_axis_disjoint(&a, &empty).unwrap());

        let hi = VertexSet::from_predicate(4, |x| x.l0_norm() > 2).unwrap();
        let lo = VertexSet::from_predicate(4, |x| x.l0_norm() < 2).unwrap();
        assert!(are_axis_disjoint(&hi, &lo).unwrap());
    }

    #[test]
    fn boundary_examples() {
        let a = VertexSet::from_vertices(4, [bv("0000")]).unwrap();
        let unit: Vec<_> = ["1000", "0100", "0010", "0001"].iter().map(|s| bv(s)).collect();
        assert_eq!(a.vertex_boundary(), VertexSet::from_vertices(4, unit).unwrap());
        assert!(VertexSet::full(4).unwrap().vertex_boundary().is_empty());
        let ball = VertexSet::from_predicate(3, |x| x.l0_norm() <= 1).unwrap();
        let layer2 = VertexSet::from_predicate(3, |x| x.l0_norm() == 2).unwrap();
        let bd = ball.vertex_boundary();
        assert_eq!(bd.len(), 3);
        assert_eq!(bd, layer2);
    }

    #[test]
    fn flip_axis_matches_pointwise_flip() {
        for n in [3usize, 7, 9] {
            let set = VertexSet::from_predicate(n, |x| x.bits() % 5 == 1 || x.l0_norm() == 2).unwrap();
            for axis in 0..n {
                let got = flip_axis(set.bits(), axis);
                let want = Bits::from_fn(1 << n, |i| set.bits().contains(i ^ (1 << axis)));
                assert_eq!(got, want, "n={n} axis={axis}");
            }
        }
    }

    #[test]
    fn halving_examples() {
        let h4 = halving_construction(4).unwrap();
        assert_eq!(h4.sizes(), (5, 5, 6));
        assert_eq!(h4.ratio(), Ratio::new(6, 5));
        let h5 = halving_construction(5).unwrap();
        assert_eq!(h5.sizes(), (6, 6, 20));
        assert!(matches!(halving_construction(1), Err(Error::Degenerate(_))));
    }

    #[test]
    fn psi_small_examples() {
        let p = psi_grid_exact(2, 2).unwrap();
        assert_eq!(p.value, PsiValue::Finite(Ratio::from_integer(2)));
        let w = p.witness.unwrap();
        assert_eq!(w.len(), 1);
        assert!(w.contains(&[0, 0]));

        assert_eq!(psi_grid_exact(1, 2).unwrap().value, PsiValue::Infinite);
        assert!(matches!(psi_grid_exact(5, 2), Err(Error::Capacity(_))));
    }

    #[test]
    fn vertex_set_json_round_trip() {
        let a = VertexSet::from_vertices(4, [bv("0101"), bv("1000")]).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, r#"{"n":4,"members":["1000","0101"]}"#);
        let back: VertexSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
    }
}
