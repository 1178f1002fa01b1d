//! Cells, chains, products and boundaries of grid complexes.
//!
//! The grid complex on `[n]^m` has the vertices `(x_1, ..., x_m)` with
//! `x_i` in `1..=n` as 0-cells, and products of unit segments as higher
//! cells: a k-cell is a product of m intervals `[a_i, b_i]` with
//! `a_i <= b_i <= a_i + 1`, exactly k of which are non-degenerate.
//!
//! Chains carry Z2 coefficients: a chain is a set of equal-dimension cells
//! and addition is symmetric difference. Cells are kept in lexicographic
//! order so chain equality is structural comparison.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// The shape of a grid complex: `n` vertices per axis, `m` axes.
///
/// `m = 0` denotes the empty product (a single vertex with no coordinates);
/// it only appears as the identity of the chain product.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct GridSpec {
    pub n: u32,
    pub m: usize,
}

impl GridSpec {
    pub fn new(n: u32, m: usize) -> Self {
        assert!(n >= 1, "grid needs at least one vertex per axis");
        GridSpec { n, m }
    }

    /// Closed-form count of k-cells: C(m,k) * (n-1)^k * n^(m-k).
    /// Saturates at `u64::MAX` instead of overflowing.
    pub fn cell_count(&self, k: usize) -> u64 {
        if k > self.m {
            return 0;
        }
        let n = self.n as u64;
        let mut acc = binomial_u64(self.m as u64, k as u64);
        for _ in 0..k {
            acc = acc.saturating_mul(n - 1);
        }
        for _ in 0..self.m - k {
            acc = acc.saturating_mul(n);
        }
        acc
    }
}

fn binomial_u64(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// A closed cell of a grid complex: one interval per axis.
///
/// Each interval `(a, b)` satisfies `a <= b <= a + 1`; the dimension is the
/// number of non-degenerate intervals. The derived ordering is lexicographic
/// on the interval sequence, which fixes the canonical cell order used
/// throughout.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    intervals: Vec<(u32, u32)>,
}

impl Cell {
    pub fn new(intervals: Vec<(u32, u32)>) -> Self {
        for &(a, b) in &intervals {
            assert!(a >= 1 && (b == a || b == a + 1), "malformed interval ({a},{b})");
        }
        Cell { intervals }
    }

    /// The 0-cell at the given coordinates.
    pub fn vertex(coords: &[u32]) -> Self {
        Cell::new(coords.iter().map(|&x| (x, x)).collect())
    }

    pub fn intervals(&self) -> &[(u32, u32)] {
        &self.intervals
    }

    pub fn axes(&self) -> usize {
        self.intervals.len()
    }

    pub fn dim(&self) -> usize {
        self.intervals.iter().filter(|&&(a, b)| b > a).count()
    }

    pub fn is_vertex(&self) -> bool {
        self.dim() == 0
    }

    /// Coordinates, when the cell is a vertex.
    pub fn coords(&self) -> Vec<u32> {
        assert!(self.is_vertex(), "coords() on a positive-dimensional cell");
        self.intervals.iter().map(|&(a, _)| a).collect()
    }

    /// True when every interval endpoint lies in `[1, n]`.
    pub fn fits(&self, spec: GridSpec) -> bool {
        self.axes() == spec.m && self.intervals.iter().all(|&(_, b)| b <= spec.n)
    }

    /// Codimension-1 faces: for each non-degenerate axis, the two cells with
    /// that interval collapsed to an endpoint.
    pub fn facets(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for (j, &(a, b)) in self.intervals.iter().enumerate() {
            if b > a {
                for v in [a, b] {
                    let mut ivs = self.intervals.clone();
                    ivs[j] = (v, v);
                    out.push(Cell { intervals: ivs });
                }
            }
        }
        out
    }

    /// The corner vertices of the cell (up to 2^dim of them).
    pub fn corners(&self) -> Vec<Cell> {
        let mut acc: Vec<Vec<(u32, u32)>> = vec![Vec::new()];
        for &(a, b) in &self.intervals {
            let mut next = Vec::with_capacity(acc.len() * 2);
            for prefix in &acc {
                let mut p = prefix.clone();
                p.push((a, a));
                next.push(p);
                if b > a {
                    let mut q = prefix.clone();
                    q.push((b, b));
                    next.push(q);
                }
            }
            acc = next;
        }
        acc.into_iter().map(|ivs| Cell { intervals: ivs }).collect()
    }

    /// True iff the hyperplane `x_j = a` contains this cell, i.e. interval
    /// `j` is the degenerate `(a, a)`.
    pub fn in_hyperplane(&self, j: usize, a: u32) -> bool {
        self.intervals[j] == (a, a)
    }

    /// Concatenation of interval sequences (product of cells).
    pub fn product(&self, other: &Cell) -> Cell {
        let mut ivs = self.intervals.clone();
        ivs.extend_from_slice(&other.intervals);
        Cell { intervals: ivs }
    }

    /// Compact text key, e.g. `[1,2][3,3]`, used by the homomorphism JSON.
    pub fn key(&self) -> String {
        self.intervals
            .iter()
            .map(|&(a, b)| format!("[{a},{b}]"))
            .collect()
    }

    /// Parses the `key` format back into a cell.
    pub fn from_key(s: &str) -> Result<Cell, crate::Error> {
        let bad = || crate::Error::InvalidInput(format!("malformed cell key {s:?}"));
        let mut intervals = Vec::new();
        let trimmed = s.trim();
        if !trimmed.starts_with('[') || !trimmed.ends_with(']') {
            return Err(bad());
        }
        for part in trimmed[1..trimmed.len() - 1].split("][") {
            let (a, b) = part.split_once(',').ok_or_else(bad)?;
            let a: u32 = a.trim().parse().map_err(|_| bad())?;
            let b: u32 = b.trim().parse().map_err(|_| bad())?;
            if a < 1 || (b != a && b != a + 1) {
                return Err(bad());
            }
            intervals.push((a, b));
        }
        Ok(Cell { intervals })
    }
}

impl fmt::Debug for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.key())
    }
}

/// The smallest axis-parallel flat containing a chain's support.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AxisFlat {
    pub m: usize,
    /// Axis index -> fixed value, for every axis constant on the support.
    pub fixed: BTreeMap<usize, u32>,
}

impl AxisFlat {
    pub fn dim(&self) -> usize {
        self.m - self.fixed.len()
    }
}

/// A Z2 chain: a set of equal-dimension cells of one grid complex.
#[derive(Clone)]
pub struct Chain {
    spec: GridSpec,
    dim: usize,
    cells: BTreeSet<Cell>,
}

impl PartialEq for Chain {
    /// The zero chain is the unique trivial chain of its grid: empty chains
    /// compare equal regardless of the dimension they were produced in.
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
            && self.cells == other.cells
            && (self.dim == other.dim || self.cells.is_empty())
    }
}

impl Eq for Chain {}

impl Chain {
    pub fn zero(spec: GridSpec, dim: usize) -> Self {
        Chain {
            spec,
            dim: dim.min(spec.m),
            cells: BTreeSet::new(),
        }
    }

    /// The empty-product chain: identity for `product`.
    pub fn unit(n: u32) -> Self {
        let mut cells = BTreeSet::new();
        cells.insert(Cell::new(Vec::new()));
        Chain {
            spec: GridSpec { n, m: 0 },
            dim: 0,
            cells,
        }
    }

    pub fn from_cells<I: IntoIterator<Item = Cell>>(spec: GridSpec, dim: usize, cells: I) -> Self {
        let mut set = BTreeSet::new();
        for cell in cells {
            assert!(cell.fits(spec), "cell {cell:?} does not fit {spec:?}");
            assert_eq!(cell.dim(), dim, "cell {cell:?} has wrong dimension");
            // Z2: inserting a duplicate cancels it.
            if !set.remove(&cell) {
                set.insert(cell);
            }
        }
        Chain { spec, dim, cells: set }
    }

    pub fn single(spec: GridSpec, cell: Cell) -> Self {
        let dim = cell.dim();
        Chain::from_cells(spec, dim, [cell])
    }

    /// The 0-chain of one vertex.
    pub fn vertex(spec: GridSpec, coords: &[u32]) -> Self {
        assert_eq!(coords.len(), spec.m);
        Chain::single(spec, Cell::vertex(coords))
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &BTreeSet<Cell> {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_zero(&self) -> bool {
        self.cells.is_empty()
    }

    /// Z2 sum: symmetric difference of supports. Cross-spec addition is a
    /// contract violation; adding a zero chain of any dimension is allowed.
    pub fn add(&self, other: &Chain) -> Chain {
        assert_eq!(self.spec, other.spec, "cross-spec chain addition");
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        assert_eq!(self.dim, other.dim, "chain addition across dimensions");
        let cells = self
            .cells
            .symmetric_difference(&other.cells)
            .cloned()
            .collect();
        Chain {
            spec: self.spec,
            dim: self.dim,
            cells,
        }
    }

    /// Boundary operator. Zero on 0-chains; on a 1-cell the two endpoints;
    /// on products it satisfies the product rule, extended linearly.
    pub fn boundary(&self) -> Chain {
        if self.dim == 0 {
            return Chain::zero(self.spec, 0);
        }
        let mut cells: BTreeSet<Cell> = BTreeSet::new();
        for cell in &self.cells {
            for f in cell.facets() {
                if !cells.remove(&f) {
                    cells.insert(f);
                }
            }
        }
        Chain {
            spec: self.spec,
            dim: self.dim - 1,
            cells,
        }
    }

    /// Bilinear product: axes concatenate, dimensions add, and the product
    /// with a zero chain is zero.
    pub fn product(&self, other: &Chain) -> Chain {
        assert_eq!(self.spec.n, other.spec.n, "product of grids with different n");
        let spec = GridSpec {
            n: self.spec.n,
            m: self.spec.m + other.spec.m,
        };
        let dim = self.dim + other.dim;
        let mut cells = BTreeSet::new();
        for a in &self.cells {
            for b in &other.cells {
                cells.insert(a.product(b));
            }
        }
        Chain { spec, dim, cells }
    }

    /// All faces of all support cells, the closed support of the chain.
    pub fn support_closure(&self) -> BTreeSet<Cell> {
        let mut out: BTreeSet<Cell> = BTreeSet::new();
        let mut stack: Vec<Cell> = self.cells.iter().cloned().collect();
        while let Some(c) = stack.pop() {
            if out.insert(c.clone()) {
                stack.extend(c.facets());
            }
        }
        out
    }

    /// The smallest axis-parallel flat containing the support.
    ///
    /// Panics on the zero chain, whose span is undefined.
    pub fn affine_span(&self) -> AxisFlat {
        assert!(!self.is_zero(), "affine span of the zero chain");
        let mut fixed = BTreeMap::new();
        'axis: for j in 0..self.spec.m {
            let mut value = None;
            for cell in &self.cells {
                let (a, b) = cell.intervals[j];
                if b > a {
                    continue 'axis;
                }
                match value {
                    None => value = Some(a),
                    Some(v) if v != a => continue 'axis,
                    _ => {}
                }
            }
            fixed.insert(j, value.expect("nonempty chain"));
        }
        AxisFlat {
            m: self.spec.m,
            fixed,
        }
    }
}

impl fmt::Debug for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Chain(dim {} in [{}]^{}: {:?})",
            self.dim, self.spec.n, self.spec.m, self.cells
        )
    }
}

/// The 1-chain of unit segments between `a` and `b` on a single axis, or
/// the 0-cell `{a}` when `a == b`. Satisfies `[a,c] = [a,b] + [b,c]` for
/// pairwise distinct endpoints.
pub fn long_interval(n: u32, a: u32, b: u32) -> Chain {
    assert!(
        (1..=n).contains(&a) && (1..=n).contains(&b),
        "interval endpoints ({a},{b}) out of range [1,{n}]"
    );
    let spec = GridSpec { n, m: 1 };
    if a == b {
        return Chain::vertex(spec, &[a]);
    }
    let (lo, hi) = (a.min(b), a.max(b));
    Chain::from_cells(spec, 1, (lo..hi).map(|c| Cell::new(vec![(c, c + 1)])))
}

/// All k-cells of the grid complex in lexicographic order. Empty for `k > m`.
pub fn enumerate_cells(spec: GridSpec, k: usize) -> Vec<Cell> {
    if k > spec.m {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(spec.cell_count(k) as usize);
    let mut current: Vec<(u32, u32)> = Vec::with_capacity(spec.m);
    fn rec(spec: GridSpec, k: usize, current: &mut Vec<(u32, u32)>, used: usize, out: &mut Vec<Cell>) {
        let axis = current.len();
        if axis == spec.m {
            if used == k {
                out.push(Cell::new(current.clone()));
            }
            return;
        }
        let remaining = spec.m - axis;
        if used > k || used + remaining < k {
            return;
        }
        for a in 1..=spec.n {
            // Degenerate before non-degenerate keeps lexicographic order.
            current.push((a, a));
            rec(spec, k, current, used, out);
            current.pop();
            if a < spec.n {
                current.push((a, a + 1));
                rec(spec, k, current, used + 1, out);
                current.pop();
            }
        }
    }
    rec(spec, k, &mut current, 0, &mut out);
    out.sort();
    out
}

/// JSON form of a chain: `{"n":…,"m":…,"dim":…,"cells":[[[a,b],…],…]}`.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct ChainJson {
    pub n: u32,
    pub m: usize,
    pub dim: usize,
    pub cells: Vec<Vec<[u32; 2]>>,
}

impl ChainJson {
    pub fn from_chain(chain: &Chain) -> Self {
        ChainJson {
            n: chain.spec.n,
            m: chain.spec.m,
            dim: chain.dim,
            cells: chain
                .cells
                .iter()
                .map(|c| c.intervals.iter().map(|&(a, b)| [a, b]).collect())
                .collect(),
        }
    }

    pub fn into_chain(self) -> Result<Chain, crate::Error> {
        if self.n < 1 {
            return Err(crate::Error::InvalidInput("chain JSON: n must be >= 1".into()));
        }
        let spec = GridSpec { n: self.n, m: self.m };
        let mut cells = Vec::with_capacity(self.cells.len());
        for raw in &self.cells {
            if raw.len() != self.m {
                return Err(crate::Error::InvalidInput(format!(
                    "chain JSON: cell {raw:?} has {} intervals, expected {}",
                    raw.len(),
                    self.m
                )));
            }
            for &[a, b] in raw {
                if a < 1 || b > self.n || (b != a && b != a + 1) {
                    return Err(crate::Error::InvalidInput(format!(
                        "chain JSON: malformed interval [{a},{b}]"
                    )));
                }
            }
            let cell = Cell::new(raw.iter().map(|&[a, b]| (a, b)).collect());
            if cell.dim() != self.dim {
                return Err(crate::Error::InvalidInput(format!(
                    "chain JSON: cell {cell:?} has dimension {}, expected {}",
                    cell.dim(),
                    self.dim
                )));
            }
            cells.push(cell);
        }
        Ok(Chain::from_cells(spec, self.dim, cells))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_segment_boundary() {
        let c = long_interval(3, 1, 2);
        let b = c.boundary();
        let expected = Chain::vertex(GridSpec::new(3, 1), &[1])
            .add(&Chain::vertex(GridSpec::new(3, 1), &[2]));
        assert_eq!(b, expected);
    }

    #[test]
    fn vertex_boundary_is_zero() {
        let spec = GridSpec::new(4, 2);
        assert!(Chain::vertex(spec, &[2, 3]).boundary().is_zero());
    }

    #[test]
    fn product_rule_on_square() {
        // boundary([1,2] x [2,3]) = {1}x[2,3] + {2}x[2,3] + [1,2]x{2} + [1,2]x{3}
        let n = 3;
        let seg12 = long_interval(n, 1, 2);
        let seg23 = long_interval(n, 2, 3);
        let square = seg12.product(&seg23);
        let expected = Chain::from_cells(
            GridSpec::new(n, 2),
            1,
            [
                Cell::new(vec![(1, 1), (2, 3)]),
                Cell::new(vec![(2, 2), (2, 3)]),
                Cell::new(vec![(1, 2), (2, 2)]),
                Cell::new(vec![(1, 2), (3, 3)]),
            ],
        );
        assert_eq!(square.boundary(), expected);
        assert!(square.boundary().boundary().is_zero());
    }

    #[test]
    fn product_with_zero_is_zero() {
        let c = long_interval(3, 1, 3);
        let z = Chain::zero(GridSpec::new(3, 1), 1);
        assert!(c.product(&z).is_zero());
        assert!(z.product(&c).is_zero());
    }

    #[test]
    fn product_distributes_over_sums() {
        // ([1,2]+[2,3]) x ({1}+{2}) has exactly four 1-cells in [3]^2
        let n = 3;
        let horiz = long_interval(n, 1, 3);
        let verts = Chain::vertex(GridSpec::new(n, 1), &[1])
            .add(&Chain::vertex(GridSpec::new(n, 1), &[2]));
        let p = horiz.product(&verts);
        assert_eq!(p.dim(), 1);
        assert_eq!(p.len(), 4);
    }

    #[test]
    fn long_interval_cases() {
        assert_eq!(long_interval(5, 2, 2), Chain::vertex(GridSpec::new(5, 1), &[2]));
        let c13 = long_interval(5, 1, 3);
        assert_eq!(c13.len(), 2);
        // [1,3] + [1,2] = [2,3]
        assert_eq!(c13.add(&long_interval(5, 1, 2)), long_interval(5, 2, 3));
    }

    #[test]
    fn long_interval_additivity_all_triples() {
        for a in 1..=6u32 {
            for b in 1..=6u32 {
                for c in 1..=6u32 {
                    if a != b && b != c && a != c {
                        let lhs = long_interval(6, a, c);
                        let rhs = long_interval(6, a, b).add(&long_interval(6, b, c));
                        assert_eq!(lhs, rhs, "triple ({a},{b},{c})");
                    }
                }
            }
        }
    }

    #[test]
    fn enumerate_cell_counts() {
        assert_eq!(enumerate_cells(GridSpec::new(2, 2), 2).len(), 1);
        assert_eq!(enumerate_cells(GridSpec::new(3, 2), 1).len(), 12);
        assert_eq!(enumerate_cells(GridSpec::new(3, 3), 0).len(), 27);
        assert!(enumerate_cells(GridSpec::new(3, 2), 3).is_empty());
        for n in 1..=6u32 {
            for m in 1..=5usize {
                let spec = GridSpec::new(n, m);
                for k in 0..=m {
                    let cells = enumerate_cells(spec, k);
                    assert_eq!(cells.len() as u64, spec.cell_count(k), "n={n} m={m} k={k}");
                    let set: BTreeSet<_> = cells.iter().cloned().collect();
                    assert_eq!(set.len(), cells.len(), "duplicates at n={n} m={m} k={k}");
                }
            }
        }
    }

    #[test]
    fn affine_span_examples() {
        let spec = GridSpec::new(3, 2);
        let v = Chain::vertex(spec, &[2, 3]);
        let flat = v.affine_span();
        assert_eq!(flat.dim(), 0);
        assert_eq!(flat.fixed.get(&0), Some(&2));
        assert_eq!(flat.fixed.get(&1), Some(&3));

        let c = Chain::vertex(GridSpec::new(3, 1), &[1]).product(&long_interval(3, 1, 2));
        let flat = c.affine_span();
        assert_eq!(flat.fixed.len(), 1);
        assert_eq!(flat.fixed.get(&0), Some(&1));

        let c2 = c.add(&Chain::vertex(GridSpec::new(3, 1), &[2]).product(&long_interval(3, 1, 2)));
        assert_eq!(c2.affine_span().fixed.len(), 0);
    }

    #[test]
    fn hyperplane_membership() {
        let cell = Cell::new(vec![(2, 2), (1, 2)]);
        assert!(cell.in_hyperplane(0, 2));
        assert!(!cell.in_hyperplane(1, 1));
    }

    #[test]
    fn chain_json_round_trip() {
        let c = long_interval(4, 1, 3).product(&Chain::vertex(GridSpec::new(4, 1), &[2]));
        let json = ChainJson::from_chain(&c);
        let back = json.into_chain().unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn chain_json_rejects_bad_interval() {
        let json = ChainJson {
            n: 3,
            m: 1,
            dim: 1,
            cells: vec![vec![[1, 3]]],
        };
        assert!(json.into_chain().is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        /// Picks a dimension and then a subset of that dimension's cells.
        fn chain_in(n: u32, m: usize) -> impl Strategy<Value = Chain> {
            (0..=m).prop_flat_map(move |k| {
                let spec = GridSpec::new(n, m);
                let cells = enumerate_cells(spec, k);
                let len = cells.len();
                proptest::collection::btree_set(0..len, 0..=len.min(12)).prop_map(
                    move |picked| {
                        Chain::from_cells(spec, k, picked.into_iter().map(|i| cells[i].clone()))
                    },
                )
            })
        }

        fn any_chain() -> impl Strategy<Value = Chain> {
            (2u32..=5, 1usize..=4).prop_flat_map(|(n, m)| chain_in(n, m))
        }

        fn chain_pair() -> impl Strategy<Value = (Chain, Chain)> {
            (2u32..=4).prop_flat_map(|n| {
                (
                    (1usize..=2).prop_flat_map(move |m| chain_in(n, m)),
                    (1usize..=2).prop_flat_map(move |m| chain_in(n, m)),
                )
            })
        }

        proptest! {
            #[test]
            fn boundary_of_boundary_vanishes(c in any_chain()) {
                prop_assert!(c.boundary().boundary().is_zero());
            }

            #[test]
            fn boundary_satisfies_the_product_rule((a, b) in chain_pair()) {
                let lhs = a.product(&b).boundary();
                let rhs = a.boundary().product(&b).add(&a.product(&b.boundary()));
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn addition_is_an_involution(c in any_chain()) {
                prop_assert!(c.add(&c).is_zero());
                prop_assert_eq!(&c.add(&Chain::zero(c.spec(), c.dim())), &c);
            }
        }
    }
}
