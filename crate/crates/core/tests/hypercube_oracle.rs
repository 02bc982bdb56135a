use l0iso::gridset::{GridSet, GridSpec};
use l0iso::hypercube::{
    are_axis_disjoint, halving_construction, psi_anchored, psi_grid_exact, vertex_boundary, BitVector,
    PsiValue, VertexSet,
};
use num_rational::Ratio;
use proptest::prelude::*;

fn differs(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Minimum of `|rest| / min(|S₁|, |S₂|)` over every assignment of cells to
/// `S₁`, `S₂` or neither, with `S₁`, `S₂` nonempty and axis-disjoint.
fn psi_by_pairs(n: usize, k: usize) -> PsiValue {
    let spec = GridSpec::new(n, k).unwrap();
    let cells = spec.cell_count();
    let coords: Vec<Vec<usize>> = (0..cells).map(|c| spec.coords(c)).collect();
    let mut best = PsiValue::Infinite;
    let mut label = vec![0u8; cells];
    let total = 3usize.pow(cells as u32);
    for code in 0..total {
        let mut c = code;
        for l in label.iter_mut() {
            *l = (c % 3) as u8;
            c /= 3;
        }
        let s1: Vec<usize> = (0..cells).filter(|&i| label[i] == 1).collect();
        let s2: Vec<usize> = (0..cells).filter(|&i| label[i] == 2).collect();
        if s1.is_empty() || s2.is_empty() {
            continue;
        }
        if s1.iter().any(|&a| s2.iter().any(|&b| differs(&coords[a], &coords[b]) < 2)) {
            continue;
        }
        let rest = cells - s1.len() - s2.len();
        let v = PsiValue::Finite(Ratio::new(rest as u64, s1.len().min(s2.len()) as u64));
        best = best.min(v);
    }
    best
}

#[test]
fn psi_matches_pair_enumeration() {
    for (n, k) in [(1, 2), (1, 3), (2, 2), (2, 3), (3, 2)] {
        assert_eq!(psi_grid_exact(n, k).unwrap().value, psi_by_pairs(n, k), "grid {n}x{k}");
    }
}

#[test]
fn psi_fixtures() {
    let r = |a, b| PsiValue::Finite(Ratio::new(a, b));
    assert_eq!(psi_grid_exact(2, 3).unwrap().value, r(5, 2));
    assert_eq!(psi_grid_exact(3, 2).unwrap().value, r(2, 1));
    assert_eq!(psi_grid_exact(2, 4).unwrap().value, r(2, 1));
    assert_eq!(psi_grid_exact(4, 2).unwrap().value, r(6, 5));
}

#[test]
fn psi_witness_reproduces_value() {
    for (n, k) in [(2, 2), (2, 3), (3, 2), (2, 4)] {
        let p = psi_grid_exact(n, k).unwrap();
        let w = p.witness.unwrap();
        let b = w.l0_boundary().len();
        let rest = w.spec().cell_count() - w.len() - b;
        assert_eq!(b, p.boundary_cells);
        assert_eq!(rest, p.residual_cells);
        assert_eq!(p.value, PsiValue::Finite(Ratio::new(b as u64, w.len().min(rest) as u64)));
    }
}

#[test]
fn psi_over_anchored_sets_agrees() {
    for (n, k) in [(1, 2), (2, 2), (2, 3), (3, 2), (2, 4), (4, 2)] {
        assert_eq!(psi_anchored(n, k).unwrap(), psi_grid_exact(n, k).unwrap().value);
    }
}

#[test]
fn psi_non_increasing_in_k() {
    let v: Vec<_> = (2..=4).map(|k| psi_grid_exact(2, k).unwrap().value).collect();
    // k = 3 is not a refinement of k = 2, so only refinements are ordered
    assert!(v[2] <= v[0]);
    let coarse = psi_grid_exact(2, 2).unwrap();
    let refined = coarse.witness.unwrap().refine(2).unwrap();
    let b = refined.l0_boundary().len();
    let rest = 16 - refined.len() - b;
    let ratio = PsiValue::Finite(Ratio::new(b as u64, refined.len().min(rest) as u64));
    assert!(v[2] <= ratio && ratio <= coarse.value);
}

#[test]
fn psi_below_halving_ratio() {
    for n in 2..=4 {
        let h = halving_construction(n).unwrap();
        assert!(psi_grid_exact(n, 2).unwrap().value <= PsiValue::Finite(h.ratio()));
    }
}

#[test]
fn psi_capacity() {
    assert!(psi_grid_exact(5, 2).is_err());
    assert!(psi_grid_exact(2, 5).is_err());
}

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn halving_sizes_match_binomial_sums() {
    for n in 2..=24usize {
        let h = halving_construction(n).unwrap();
        let (a, b, c) = h.sizes();
        let lo = n / 2;
        let hi = n.div_ceil(2);
        let s2: u64 = (0..lo).map(|j| binom(n as u64, j as u64)).sum();
        let s3: u64 = (lo..=hi).map(|j| binom(n as u64, j as u64)).sum();
        assert_eq!((a as u64, b as u64, c as u64), (s2, s2, s3));
        assert!(are_axis_disjoint(&h.s1, &h.s2).unwrap());
    }
}

#[test]
fn halving_pairs_checked_directly() {
    for n in 2..=9 {
        let h = halving_construction(n).unwrap();
        for a in h.s1.iter() {
            for b in h.s2.iter() {
                assert!(a.hamming_distance(&b).unwrap() >= 2);
            }
        }
    }
}

#[test]
fn cell_map_preserves_axis_disjointness() {
    // vertex s ↦ the cell with coordinates s on the 2ⁿ grid
    for n in 2..=5 {
        let h = halving_construction(n).unwrap();
        let spec = GridSpec::new(n, 2).unwrap();
        let to_cells = |v: &VertexSet| {
            let mut g = GridSet::empty(spec);
            for s in v.iter() {
                let c: Vec<usize> = (0..n).map(|i| s.coord(i) as usize).collect();
                g.insert(&c).unwrap();
            }
            g
        };
        let (a, b) = (to_cells(&h.s1), to_cells(&h.s2));
        assert!(l0iso::gridset::are_axis_disjoint(&a, &b).unwrap());
    }
}

fn vertex_set(n: usize, bits: &[bool]) -> VertexSet {
    VertexSet::from_predicate(n, |v| bits[v.index()]).unwrap()
}

proptest! {
    #[test]
    fn boundary_matches_definition(n in 1usize..=8, seed in any::<u64>()) {
        let size = 1usize << n;
        let bits: Vec<bool> = (0..size).map(|i| (seed.rotate_left(i as u32 % 64) ^ (i as u64 * 0x9e37_79b9)) & 3 == 0).collect();
        let a = vertex_set(n, &bits);
        let b = vertex_boundary(&a);
        for x in 0..size as u32 {
            let v = BitVector::new(n, x).unwrap();
            let near = a.iter().any(|u| u.hamming_distance(&v).unwrap() <= 1);
            prop_assert_eq!(b.contains(&v), near && !a.contains(&v));
        }
    }

    #[test]
    fn axis_disjoint_matches_pairwise(n in 1usize..=7, sa in any::<u64>(), sb in any::<u64>()) {
        let size = 1usize << n;
        let a = vertex_set(n, &(0..size).map(|i| (sa >> (i % 64)) & 1 == 1 && i % 3 == 0).collect::<Vec<_>>());
        let b = vertex_set(n, &(0..size).map(|i| (sb >> (i % 64)) & 1 == 1 && i % 5 == 1).collect::<Vec<_>>());
        let direct = a.iter().all(|x| b.iter().all(|y| x.hamming_distance(&y).unwrap() >= 2));
        prop_assert_eq!(are_axis_disjoint(&a, &b).unwrap(), direct);
    }
}

#[test]
fn boundary_examples() {
    let n = 4;
    let a = VertexSet::from_vertices(n, ["0000".parse().unwrap()]).unwrap();
    let b = vertex_boundary(&a);
    assert_eq!(b.len(), 4);
    assert!(b.iter().all(|v| v.l0_norm() == 1));
    assert!(vertex_boundary(&VertexSet::full(n).unwrap()).is_empty());
    let ball = VertexSet::from_predicate(3, |v| v.l0_norm() <= 1).unwrap();
    let shell = vertex_boundary(&ball);
    assert_eq!(shell.len(), 3);
    assert!(shell.iter().all(|v| v.l0_norm() == 2));
}
