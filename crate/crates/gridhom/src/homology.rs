//! Reduced Z2 homology of finite cubical and simplicial complexes.
//!
//! A [`Complex`] is an ambient complex with a fixed cell indexing per
//! dimension; closed subcomplexes of it are [`CellSet`]s (index sets per
//! dimension). All homology queries take a subcomplex, so intersections of
//! members of a set system reuse the ambient indexing and reduce to set
//! intersections.
//!
//! Reduced homology augments the boundary at dimension 0 with the all-ones
//! map to Z2, so the 0th reduced Betti number is one less than the number of
//! connected components, uniformly with higher dimensions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::gf2::{Gf2Matrix, Gf2Vector};
use crate::grid::{self, GridSpec};

/// A cell type usable as the carrier of a finite regular complex.
pub trait ComplexCell: Clone + Ord + fmt::Debug + Send + Sync {
    fn dim(&self) -> usize;
    /// Codimension-1 faces, each listed once.
    fn facets(&self) -> Vec<Self>;
    /// The 0-dimensional faces.
    fn vertex_cells(&self) -> Vec<Self>;
}

impl ComplexCell for grid::Cell {
    fn dim(&self) -> usize {
        self.dim()
    }
    fn facets(&self) -> Vec<Self> {
        self.facets()
    }
    fn vertex_cells(&self) -> Vec<Self> {
        self.corners()
    }
}

/// An abstract simplex: a sorted set of vertex labels.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimplexCell(Vec<u32>);

impl SimplexCell {
    pub fn new(mut vertices: Vec<u32>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        assert!(!vertices.is_empty(), "a simplex needs at least one vertex");
        SimplexCell(vertices)
    }

    pub fn vertices(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Debug for SimplexCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{:?}}}", self.0)
    }
}

impl ComplexCell for SimplexCell {
    fn dim(&self) -> usize {
        self.0.len() - 1
    }
    fn facets(&self) -> Vec<Self> {
        if self.0.len() == 1 {
            return Vec::new();
        }
        (0..self.0.len())
            .map(|drop| {
                let mut v = self.0.clone();
                v.remove(drop);
                SimplexCell(v)
            })
            .collect()
    }
    fn vertex_cells(&self) -> Vec<Self> {
        self.0.iter().map(|&v| SimplexCell(vec![v])).collect()
    }
}

/// A finite regular complex with a canonical per-dimension cell indexing.
#[derive(Clone)]
pub struct Complex<C: ComplexCell> {
    cells: Vec<Vec<C>>,
    index: BTreeMap<C, (usize, usize)>,
    /// Per dimension, per cell: indices of its codimension-1 faces.
    facet_ids: Vec<Vec<Vec<usize>>>,
    /// Per dimension, per cell: indices of its vertices (0-cells).
    vertex_ids: Vec<Vec<Vec<usize>>>,
}

impl<C: ComplexCell> Complex<C> {
    /// Builds a complex from any set of cells, closing downward under faces.
    pub fn from_cells<I: IntoIterator<Item = C>>(cells: I) -> Self {
        let mut by_dim: Vec<BTreeSet<C>> = Vec::new();
        let mut stack: Vec<C> = cells.into_iter().collect();
        while let Some(c) = stack.pop() {
            let d = c.dim();
            if by_dim.len() <= d {
                by_dim.resize_with(d + 1, BTreeSet::new);
            }
            if by_dim[d].insert(c.clone()) {
                stack.extend(c.facets());
            }
        }
        let cells: Vec<Vec<C>> = by_dim.into_iter().map(|s| s.into_iter().collect()).collect();
        let mut index = BTreeMap::new();
        for (d, layer) in cells.iter().enumerate() {
            for (i, c) in layer.iter().enumerate() {
                index.insert(c.clone(), (d, i));
            }
        }
        let facet_ids = cells
            .iter()
            .map(|layer| {
                layer
                    .iter()
                    .map(|c| {
                        c.facets()
                            .into_iter()
                            .map(|f| index[&f].1)
                            .collect::<Vec<_>>()
                    })
                    .collect()
            })
            .collect();
        let vertex_ids = cells
            .iter()
            .map(|layer| {
                layer
                    .iter()
                    .map(|c| {
                        let mut v: Vec<usize> =
                            c.vertex_cells().into_iter().map(|f| index[&f].1).collect();
                        v.sort_unstable();
                        v.dedup();
                        v
                    })
                    .collect()
            })
            .collect();
        Complex {
            cells,
            index,
            facet_ids,
            vertex_ids,
        }
    }

    /// Number of dimension levels (top dimension + 1); 0 for the empty complex.
    pub fn dims(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self, k: usize) -> &[C] {
        self.cells.get(k).map_or(&[], |v| v.as_slice())
    }

    pub fn cell(&self, k: usize, id: usize) -> &C {
        &self.cells[k][id]
    }

    pub fn id_of(&self, cell: &C) -> Option<(usize, usize)> {
        self.index.get(cell).copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.cells(0).len()
    }

    /// Vertex ids of a cell.
    pub fn cell_vertices(&self, k: usize, id: usize) -> &[usize] {
        &self.vertex_ids[k][id]
    }

    pub fn full_set(&self) -> CellSet {
        CellSet {
            per_dim: self
                .cells
                .iter()
                .map(|layer| (0..layer.len()).collect())
                .collect(),
        }
    }

    pub fn empty_set(&self) -> CellSet {
        CellSet {
            per_dim: vec![BTreeSet::new(); self.cells.len()],
        }
    }

    /// The induced subcomplex on a set of vertex ids: all cells whose
    /// vertices lie in the set. Always closed.
    pub fn induced(&self, vertices: &BTreeSet<usize>) -> CellSet {
        let mut set = self.empty_set();
        for (d, layer) in self.vertex_ids.iter().enumerate() {
            for (i, vs) in layer.iter().enumerate() {
                if vs.iter().all(|v| vertices.contains(v)) {
                    set.per_dim[d].insert(i);
                }
            }
        }
        set
    }

    /// Downward closure of a set of cells, as a `CellSet`.
    pub fn close_downward<I: IntoIterator<Item = (usize, usize)>>(&self, cells: I) -> CellSet {
        let mut set = self.empty_set();
        let mut stack: Vec<(usize, usize)> = cells.into_iter().collect();
        while let Some((d, i)) = stack.pop() {
            if set.per_dim[d].insert(i) && d > 0 {
                for &f in &self.facet_ids[d][i] {
                    stack.push((d - 1, f));
                }
            }
        }
        set
    }

    pub fn is_closed(&self, set: &CellSet) -> bool {
        for (d, ids) in set.per_dim.iter().enumerate().skip(1) {
            for &i in ids {
                if !self.facet_ids[d][i]
                    .iter()
                    .all(|f| set.per_dim[d - 1].contains(f))
                {
                    return false;
                }
            }
        }
        true
    }

    /// Z2 boundary of a chain given as a set of k-cell ids.
    pub fn boundary_of_chain(&self, k: usize, chain: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        if k == 0 {
            return out;
        }
        for &i in chain {
            for &f in &self.facet_ids[k][i] {
                if !out.remove(&f) {
                    out.insert(f);
                }
            }
        }
        out
    }

    pub fn is_cycle(&self, k: usize, chain: &BTreeSet<usize>) -> bool {
        self.boundary_of_chain(k, chain).is_empty()
    }

    /// The boundary matrix of a subcomplex at dimension `k`, over the local
    /// index of present cells. For `k = 0` this is the one-row augmentation
    /// (the all-ones map to Z2) used by reduced homology.
    ///
    /// Returns the matrix together with the global ids giving each local row
    /// and column.
    fn local_boundary(&self, set: &CellSet, k: usize) -> (Gf2Matrix, Vec<usize>, Vec<usize>) {
        let cols: Vec<usize> = set.per_dim.get(k).map_or_else(Vec::new, |s| s.iter().copied().collect());
        if k == 0 {
            let mut m = Gf2Matrix::zeros(1, cols.len());
            for j in 0..cols.len() {
                m.set(0, j, true);
            }
            return (m, Vec::new(), cols);
        }
        let rows: Vec<usize> = set.per_dim.get(k - 1).map_or_else(Vec::new, |s| s.iter().copied().collect());
        let row_pos: BTreeMap<usize, usize> = rows.iter().enumerate().map(|(p, &g)| (g, p)).collect();
        let mut m = Gf2Matrix::zeros(rows.len(), cols.len());
        for (j, &cid) in cols.iter().enumerate() {
            for &f in &self.facet_ids[k][cid] {
                let &r = row_pos
                    .get(&f)
                    .expect("subcomplex is not closed: missing facet");
                m.set(r, j, true);
            }
        }
        (m, rows, cols)
    }

    /// Reduced Betti numbers of a closed subcomplex, indexed 0..=top.
    ///
    /// Panics if the set is not closed under faces. The empty complex has an
    /// empty Betti vector.
    pub fn betti(&self, set: &CellSet) -> Vec<usize> {
        assert!(self.is_closed(set), "betti of a non-closed cell set");
        let top = match set.top_dim() {
            Some(t) => t,
            None => return Vec::new(),
        };
        // rank of the augmented/ordinary boundary per dimension
        let mut ranks = Vec::with_capacity(top + 2);
        for k in 0..=top {
            let (m, _, _) = self.local_boundary(set, k);
            ranks.push(m.rank());
        }
        ranks.push(0); // no (top+1)-cells
        (0..=top)
            .map(|k| set.count_dim(k) - ranks[k] - ranks[k + 1])
            .collect()
    }

    /// Finds a chain of dimension `k + 1` inside the subcomplex whose
    /// boundary is the given cycle, if the cycle bounds there.
    ///
    /// Panics if `chain` is not a cycle or not contained in the set.
    pub fn fill_cycle(
        &self,
        set: &CellSet,
        k: usize,
        chain: &BTreeSet<usize>,
    ) -> Option<BTreeSet<usize>> {
        assert!(
            chain.iter().all(|&i| set.contains(k, i)),
            "cycle leaves the subcomplex"
        );
        assert!(self.is_cycle(k, chain), "fill_cycle on a non-cycle");
        if chain.is_empty() {
            return Some(BTreeSet::new());
        }
        let (m, rows, cols) = self.local_boundary(set, k + 1);
        if cols.is_empty() {
            return None;
        }
        let mut b = Gf2Vector::zeros(rows.len());
        for (p, g) in rows.iter().enumerate() {
            if chain.contains(g) {
                b.set(p, true);
            }
        }
        let x = m.solve(&b)?;
        Some(x.ones().map(|j| cols[j]).collect())
    }

    /// A deterministic homology basis of the subcomplex in dimension `k`:
    /// kernel-basis cycles of the (augmented) boundary, reduced against the
    /// boundary space in canonical cell order.
    pub fn homology_basis(&self, set: &CellSet, k: usize) -> Vec<BTreeSet<usize>> {
        let (bk, _, cols) = self.local_boundary(set, k);
        if cols.is_empty() {
            return Vec::new();
        }
        let cycles = bk.kernel_basis();
        let (bk1, _, cols_up) = self.local_boundary(set, k + 1);
        let mut echelon = Echelon::new();
        for j in 0..cols_up.len() {
            let mut col = Gf2Vector::zeros(cols.len());
            for r in 0..cols.len() {
                if bk1.get(r, j) {
                    col.set(r, true);
                }
            }
            echelon.insert(col);
        }
        let mut basis = Vec::new();
        for z in cycles {
            if echelon.insert(z.clone()) {
                basis.push(z.ones().map(|j| cols[j]).collect());
            }
        }
        basis
    }

    /// Coordinates of a cycle with respect to a homology basis, padded with
    /// zeros to length `b`.
    ///
    /// The result `v` satisfies: `chain + sum_j v_j * basis_j` bounds in the
    /// subcomplex. Panics if `b` is smaller than the basis (the shatter
    /// bound is violated) or if the chain is not a cycle of the subcomplex.
    pub fn homology_class(
        &self,
        set: &CellSet,
        k: usize,
        chain: &BTreeSet<usize>,
        basis: &[BTreeSet<usize>],
        b: usize,
    ) -> Gf2Vector {
        assert!(
            basis.len() <= b,
            "homology basis of size {} exceeds the coefficient bound {b}",
            basis.len()
        );
        assert!(self.is_cycle(k, chain), "homology class of a non-cycle");
        assert!(chain.iter().all(|&i| set.contains(k, i)));
        let mut out = Gf2Vector::zeros(b);
        if chain.is_empty() {
            return out;
        }
        let cols: Vec<usize> = set.per_dim[k].iter().copied().collect();
        let col_pos: BTreeMap<usize, usize> = cols.iter().enumerate().map(|(p, &g)| (g, p)).collect();
        let (bk1, _, cols_up) = self.local_boundary(set, k + 1);
        // Columns: boundaries of (k+1)-cells, then the basis cycles.
        let mut m = Gf2Matrix::zeros(cols.len(), cols_up.len() + basis.len());
        for j in 0..cols_up.len() {
            for r in 0..cols.len() {
                if bk1.get(r, j) {
                    m.set(r, j, true);
                }
            }
        }
        for (j, cycle) in basis.iter().enumerate() {
            for g in cycle {
                m.set(col_pos[g], cols_up.len() + j, true);
            }
        }
        let mut rhs = Gf2Vector::zeros(cols.len());
        for g in chain {
            rhs.set(col_pos[g], true);
        }
        let x = m
            .solve(&rhs)
            .expect("cycle not expressible over the boundary space and basis");
        for j in 0..basis.len() {
            if x.get(cols_up.len() + j) {
                out.set(j, true);
            }
        }
        out
    }
}

/// Incremental GF(2) row-echelon tracker.
struct Echelon {
    rows: Vec<(usize, Gf2Vector)>,
}

impl Echelon {
    fn new() -> Self {
        Echelon { rows: Vec::new() }
    }

    /// Reduces `v` against the rows; inserts and returns true if independent.
    fn insert(&mut self, mut v: Gf2Vector) -> bool {
        loop {
            let pivot = match v.ones().next() {
                Some(p) => p,
                None => return false,
            };
            match self.rows.iter().find(|(p, _)| *p == pivot) {
                Some((_, row)) => {
                    let row = row.clone();
                    v.xor_assign(&row);
                }
                None => {
                    self.rows.push((pivot, v));
                    return true;
                }
            }
        }
    }
}

/// A subcomplex of an ambient [`Complex`], as present-cell index sets per
/// dimension.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CellSet {
    per_dim: Vec<BTreeSet<usize>>,
}

impl CellSet {
    pub fn dims(&self) -> usize {
        self.per_dim.len()
    }

    pub fn contains(&self, k: usize, id: usize) -> bool {
        self.per_dim.get(k).is_some_and(|s| s.contains(&id))
    }

    pub fn ids(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        self.per_dim.get(k).into_iter().flatten().copied()
    }

    pub fn count_dim(&self, k: usize) -> usize {
        self.per_dim.get(k).map_or(0, |s| s.len())
    }

    pub fn total(&self) -> usize {
        self.per_dim.iter().map(|s| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.per_dim.iter().all(|s| s.is_empty())
    }

    pub fn top_dim(&self) -> Option<usize> {
        self.per_dim.iter().rposition(|s| !s.is_empty())
    }

    /// Cell-wise intersection.
    pub fn intersect(&self, other: &CellSet) -> CellSet {
        let dims = self.per_dim.len().max(other.per_dim.len());
        let mut per_dim = Vec::with_capacity(dims);
        for k in 0..dims {
            let a = self.per_dim.get(k);
            let b = other.per_dim.get(k);
            per_dim.push(match (a, b) {
                (Some(a), Some(b)) => a.intersection(b).copied().collect(),
                _ => BTreeSet::new(),
            });
        }
        CellSet { per_dim }
    }

    pub fn is_subset(&self, other: &CellSet) -> bool {
        self.per_dim.iter().enumerate().all(|(k, s)| {
            s.is_empty() || other.per_dim.get(k).is_some_and(|o| s.is_subset(o))
        })
    }

    /// The least-index vertex of the set, if any.
    pub fn least_vertex(&self) -> Option<usize> {
        self.per_dim.first().and_then(|s| s.iter().next().copied())
    }
}

/// The full grid complex on `[n]^m`.
pub fn grid_complex(spec: GridSpec) -> Complex<grid::Cell> {
    grid_skeleton(spec, spec.m)
}

/// The l-skeleton of the grid complex on `[n]^m`.
pub fn grid_skeleton(spec: GridSpec, l: usize) -> Complex<grid::Cell> {
    let mut cells = Vec::new();
    for k in 0..=l.min(spec.m) {
        cells.extend(grid::enumerate_cells(spec, k));
    }
    Complex::from_cells(cells)
}

/// The k-skeleton of the simplex on vertices `1..=n`.
pub fn simplex_skeleton(n: u32, k: usize) -> Complex<SimplexCell> {
    use itertools::Itertools;
    let mut cells = Vec::new();
    for size in 1..=(k + 1).min(n as usize) {
        for combo in (1..=n).combinations(size) {
            cells.push(SimplexCell::new(combo));
        }
    }
    Complex::from_cells(cells)
}

/// The simplicial path on vertices `1..=n`: a contractible 1-complex.
pub fn path_complex(n: u32) -> Complex<SimplexCell> {
    let mut cells: Vec<SimplexCell> = (1..=n).map(|v| SimplexCell::new(vec![v])).collect();
    for v in 1..n {
        cells.push(SimplexCell::new(vec![v, v + 1]));
    }
    Complex::from_cells(cells)
}
