//! The minor complexes M_d, their stair-chain embeddings into grid skeleta,
//! and certification of the embedding's chain-map and disjoint-support
//! properties.
//!
//! M_d lives on `d + 3` labeled vertices: for even `p` it is the
//! `p/2`-skeleton of the simplex on `p + 3` vertices, for odd `p` the cone
//! over `M_{p-1}` with the highest-labeled vertex as apex. Dimensions of any
//! two disjoint faces of M_d sum to at most `d`.
//!
//! The embedding sends the simplex with sorted labels `i_1 < ... < i_{k+1}`
//! to the stair-convex chain with those anchors in `[d+3]^m`; it is a chain
//! map and sends disjoint simplices to chains with disjoint closed supports.

use std::collections::BTreeSet;

use itertools::Itertools;

use crate::grid::{Cell, Chain, GridSpec};
use crate::homology::{path_complex, Complex, ComplexCell, SimplexCell};
use crate::stair::{stc_recursive, StairArgs};

/// M_d together with its dimension bookkeeping.
pub struct MinorComplex {
    pub d: usize,
    pub complex: Complex<SimplexCell>,
}

impl MinorComplex {
    pub fn vertex_count(&self) -> usize {
        self.complex.vertex_count()
    }

    pub fn dim(&self) -> usize {
        self.complex.dims() - 1
    }

    /// All simplices, every dimension, in canonical order.
    pub fn simplices(&self) -> Vec<SimplexCell> {
        (0..self.complex.dims())
            .flat_map(|k| self.complex.cells(k).to_vec())
            .collect()
    }

    /// Simplices not contained in any larger simplex.
    pub fn maximal_simplices(&self) -> Vec<SimplexCell> {
        let all: BTreeSet<SimplexCell> = self.simplices().into_iter().collect();
        all.iter()
            .filter(|s| {
                !all.iter()
                    .any(|t| t.dim() > s.dim() && is_subset(s.vertices(), t.vertices()))
            })
            .cloned()
            .collect()
    }
}

fn is_subset(a: &[u32], b: &[u32]) -> bool {
    a.iter().all(|v| b.contains(v))
}

/// Builds M_d on vertices `1..=d+3`.
pub fn build_md(d: usize) -> MinorComplex {
    MinorComplex {
        d,
        complex: Complex::from_cells(md_cells(d)),
    }
}

fn md_cells(p: usize) -> Vec<SimplexCell> {
    if p % 2 == 0 {
        // p/2-skeleton of the simplex on p + 3 vertices
        let vertices = (p + 3) as u32;
        let mut cells = Vec::new();
        for size in 1..=(p / 2 + 1) {
            for combo in (1..=vertices).combinations(size) {
                cells.push(SimplexCell::new(combo));
            }
        }
        cells
    } else {
        // cone over M_{p-1}; the apex is the new highest label p + 3
        let apex = (p + 3) as u32;
        let base = md_cells(p - 1);
        let mut cells = base.clone();
        cells.push(SimplexCell::new(vec![apex]));
        for cell in base {
            let mut v = cell.vertices().to_vec();
            v.push(apex);
            cells.push(SimplexCell::new(v));
        }
        cells
    }
}

/// The image of one simplex of M_d: the stair-convex chain in `[d+3]^m`
/// anchored at the sorted vertex labels. Panics if the simplex is not in
/// M_d or `m <= d`.
pub fn g_sharp(md: &MinorComplex, m: usize, simplex: &SimplexCell) -> Chain {
    assert!(m > md.d, "the embedding needs m > d");
    assert!(
        md.complex.id_of(simplex).is_some(),
        "simplex {simplex:?} is not a face of M_{}",
        md.d
    );
    let n = (md.d + 3) as u32;
    stc_recursive(&StairArgs::new(n, m, simplex.vertices().to_vec()))
}

/// Linear extension of the embedding to a Z2 sum of simplices.
pub fn g_sharp_chain<'a, I>(md: &MinorComplex, m: usize, simplices: I) -> Chain
where
    I: IntoIterator<Item = &'a SimplexCell>,
{
    let n = (md.d + 3) as u32;
    let mut acc = Chain::zero(GridSpec::new(n, m), 0);
    for s in simplices {
        acc = acc.add(&g_sharp(md, m, s));
    }
    acc
}

/// Checks the chain-map law for every simplex of M_d: the boundary of the
/// image equals the image of the simplicial boundary.
pub fn verify_chain_map(md: &MinorComplex, m: usize) -> bool {
    for simplex in md.simplices() {
        let image_boundary = g_sharp(md, m, &simplex).boundary();
        let facets = simplex.facets();
        let boundary_image = g_sharp_chain(md, m, facets.iter());
        if image_boundary != boundary_image {
            return false;
        }
    }
    true
}

/// Checks that every pair of vertex-disjoint simplices of M_d maps to
/// chains whose closed supports share no cell.
pub fn verify_disjoint_supports(md: &MinorComplex, m: usize) -> bool {
    let simplices = md.simplices();
    let closures: Vec<(&SimplexCell, BTreeSet<Cell>)> = simplices
        .iter()
        .map(|s| (s, g_sharp(md, m, s).support_closure()))
        .collect();
    for (i, (s, cs)) in closures.iter().enumerate() {
        for (t, ct) in closures.iter().skip(i + 1) {
            let disjoint_vertices = s.vertices().iter().all(|v| !t.vertices().contains(v));
            if disjoint_vertices && cs.intersection(ct).next().is_some() {
                return false;
            }
        }
    }
    true
}

/// Outcome of the small direct check of the non-embeddability conclusion
/// for maps from the 1-skeleton of `[2]^2` into a 1-dimensional path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VkfBaseCase {
    pub maps_checked: u64,
    pub all_found_intersecting_pair: bool,
}

/// Enumerates every nontrivial chain map from the 1-skeleton of the square
/// grid `[2]^2` into the path on `p` vertices and checks that some pair of
/// cells with dimension sum at most one, lying in no common axis-parallel
/// hyperplane, has intersecting image supports.
///
/// Vertex images range over all odd-cardinality vertex sets of the path;
/// edge images are forced, because a path has no 1-cycles.
pub fn verify_vkf_base_case(p: u32) -> VkfBaseCase {
    let square = crate::homology::grid_skeleton(GridSpec::new(2, 2), 1);
    let path = path_complex(p);
    let path_vertices = path.vertex_count();
    let sq_vertices: Vec<Cell> = square.cells(0).to_vec();
    let sq_edges: Vec<Cell> = square.cells(1).to_vec();

    // All odd-support 0-chains of the path, as vertex-id sets.
    let odd_chains: Vec<BTreeSet<usize>> = (0u32..(1 << path_vertices))
        .filter(|mask| mask.count_ones() % 2 == 1)
        .map(|mask| (0..path_vertices).filter(|i| mask >> i & 1 == 1).collect())
        .collect();

    let full = path.full_set();
    let mut maps_checked = 0u64;
    let mut all_found = true;
    let assignments = (0..sq_vertices.len())
        .map(|_| 0..odd_chains.len())
        .multi_cartesian_product();
    for choice in assignments {
        maps_checked += 1;
        let vertex_image: Vec<&BTreeSet<usize>> = choice.iter().map(|&i| &odd_chains[i]).collect();
        // Edge images are the unique fillings of the endpoint sums.
        let mut edge_image: Vec<BTreeSet<usize>> = Vec::with_capacity(sq_edges.len());
        for edge in &sq_edges {
            let mut rim: BTreeSet<usize> = BTreeSet::new();
            for corner in edge.corners() {
                let (d0, vid) = square.id_of(&corner).expect("corner in skeleton");
                debug_assert_eq!(d0, 0);
                for x in vertex_image[vid] {
                    if !rim.remove(x) {
                        rim.insert(*x);
                    }
                }
            }
            let alpha = path
                .fill_cycle(&full, 0, &rim)
                .expect("even 0-chains bound in a connected path");
            edge_image.push(alpha);
        }
        // Closed supports of all cell images.
        let closure_of = |dim: usize, chain: &BTreeSet<usize>| -> BTreeSet<(usize, usize)> {
            let set = path.close_downward(chain.iter().map(|&i| (dim, i)));
            let mut out = BTreeSet::new();
            for k in 0..=dim {
                for id in set.ids(k) {
                    out.insert((k, id));
                }
            }
            out
        };
        let mut supports: Vec<(Cell, BTreeSet<(usize, usize)>)> = Vec::new();
        for (vid, cell) in sq_vertices.iter().enumerate() {
            supports.push((cell.clone(), closure_of(0, vertex_image[vid])));
        }
        for (eid, cell) in sq_edges.iter().enumerate() {
            supports.push((cell.clone(), closure_of(1, &edge_image[eid])));
        }
        let mut found = false;
        'pairs: for (i, (sc, ss)) in supports.iter().enumerate() {
            for (tc, ts) in supports.iter().skip(i + 1) {
                if sc.dim() + tc.dim() > 1 {
                    continue;
                }
                let common_hyperplane = (0..2)
                    .any(|j| (1..=2u32).any(|a| sc.in_hyperplane(j, a) && tc.in_hyperplane(j, a)));
                if common_hyperplane {
                    continue;
                }
                if ss.intersection(ts).next().is_some() {
                    found = true;
                    break 'pairs;
                }
            }
        }
        if !found {
            all_found = false;
        }
    }
    VkfBaseCase {
        maps_checked,
        all_found_intersecting_pair: all_found,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn md_shapes() {
        // d = 1: cone over three isolated vertices, a 3-edge star on 4 vertices.
        let m1 = build_md(1);
        assert_eq!(m1.vertex_count(), 4);
        assert_eq!(m1.dim(), 1);
        assert_eq!(m1.complex.cells(1).len(), 3);

        // d = 2: 1-skeleton of the simplex on 5 vertices, the complete graph K5.
        let m2 = build_md(2);
        assert_eq!(m2.vertex_count(), 5);
        assert_eq!(m2.dim(), 1);
        assert_eq!(m2.complex.cells(1).len(), 10);

        // d = 3: cone over K5 on 6 vertices.
        let m3 = build_md(3);
        assert_eq!(m3.vertex_count(), 6);
        assert_eq!(m3.dim(), 2);

        for d in 1..=6 {
            let md = build_md(d);
            assert_eq!(md.vertex_count(), d + 3, "d={d}");
            assert_eq!(md.dim(), d.div_ceil(2), "d={d}");
        }
    }

    #[test]
    fn odd_d_maximal_faces_contain_the_apex() {
        for d in [1usize, 3, 5] {
            let md = build_md(d);
            let apex = (d + 3) as u32;
            for s in md.complex.cells(md.dim()) {
                assert!(
                    s.vertices().contains(&apex),
                    "d={d}: top face {s:?} misses the apex"
                );
            }
        }
    }

    #[test]
    fn disjoint_face_dimensions_sum_to_at_most_d() {
        for d in 1..=5usize {
            let md = build_md(d);
            let simplices = md.simplices();
            for s in &simplices {
                for t in &simplices {
                    let disjoint = s.vertices().iter().all(|v| !t.vertices().contains(v));
                    if disjoint {
                        assert!(s.dim() + t.dim() <= d, "d={d}: {s:?} {t:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn vertex_image_is_the_diagonal() {
        let md = build_md(2);
        let v3 = SimplexCell::new(vec![3]);
        let image = g_sharp(&md, 3, &v3);
        assert_eq!(image, Chain::vertex(GridSpec::new(5, 3), &[3, 3, 3]));
    }

    #[test]
    fn edge_image_is_the_bent_path() {
        let md = build_md(1);
        let edge = SimplexCell::new(vec![1, 4]);
        let image = g_sharp(&md, 2, &edge);
        let n = 4;
        let expected = Chain::vertex(GridSpec::new(n, 1), &[1])
            .product(&crate::grid::long_interval(n, 1, 4))
            .add(
                &crate::grid::long_interval(n, 1, 4)
                    .product(&Chain::vertex(GridSpec::new(n, 1), &[4])),
            );
        assert_eq!(image, expected);
    }

    #[test]
    fn chain_map_small_cases() {
        assert!(verify_chain_map(&build_md(1), 2));
        assert!(verify_chain_map(&build_md(2), 3));
    }

    #[test]
    fn disjoint_supports_small_cases() {
        assert!(verify_disjoint_supports(&build_md(1), 2));
        assert!(verify_disjoint_supports(&build_md(2), 3));
    }

    #[test]
    fn shared_vertex_gives_shared_diagonal_point() {
        // Simplices sharing the label a both contain the diagonal vertex
        // (a, ..., a) in their closed supports; the disjointness claim
        // excludes such pairs.
        let md = build_md(2);
        let e1 = SimplexCell::new(vec![1, 2]);
        let e2 = SimplexCell::new(vec![2, 4]);
        let c1 = g_sharp(&md, 3, &e1).support_closure();
        let c2 = g_sharp(&md, 3, &e2).support_closure();
        let diag = Cell::vertex(&[2, 2, 2]);
        assert!(c1.contains(&diag) && c2.contains(&diag));
    }

    #[test]
    fn vkf_base_case_tiny_paths() {
        for p in 2..=3u32 {
            let outcome = verify_vkf_base_case(p);
            assert!(outcome.all_found_intersecting_pair, "p={p}");
            let odd = 1u64 << (p - 1);
            assert_eq!(outcome.maps_checked, odd.pow(4), "p={p}");
        }
    }

    #[test]
    fn maximal_simplices_of_the_star() {
        let md = build_md(1);
        let maximal = md.maximal_simplices();
        assert_eq!(maximal.len(), 3);
        assert!(maximal.iter().all(|s| s.dim() == 1));
    }
}
