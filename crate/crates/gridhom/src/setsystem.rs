//! Finite set systems over an ambient complex: intersections, nerve
//! densities, f-vectors, homological shatter functions, the induced-skeleton
//! construction with prescribed intersection patterns, and supersaturation
//! counting.
//!
//! Members are closed subcomplexes of one ambient complex, so intersections
//! of subfamilies are cell-set intersections. Densities are exact rationals;
//! counts are exact integers.

use std::collections::BTreeSet;

use itertools::Itertools;
use num_bigint::{BigInt, BigUint};
use num_rational::Ratio;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::{self, GridSpec};
use crate::homology::{simplex_skeleton, CellSet, Complex, ComplexCell, SimplexCell};
use crate::{Error, Limits};

pub type BigRational = Ratio<BigInt>;

/// A named closed subcomplex of the ambient complex.
pub struct Member {
    pub name: String,
    pub cells: CellSet,
}

/// A finite set system: an ambient complex plus named members.
pub struct SetSystem<C: ComplexCell> {
    ambient: Complex<C>,
    members: Vec<Member>,
}

impl<C: ComplexCell> SetSystem<C> {
    pub fn new(ambient: Complex<C>, members: Vec<(String, CellSet)>) -> Result<Self, Error> {
        let mut seen = BTreeSet::new();
        for (name, cells) in &members {
            if !ambient.is_closed(cells) {
                return Err(Error::InvalidInput(format!(
                    "member {name:?} is not closed under faces"
                )));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::InvalidInput(format!("duplicate member name {name:?}")));
            }
        }
        Ok(SetSystem {
            ambient,
            members: members
                .into_iter()
                .map(|(name, cells)| Member { name, cells })
                .collect(),
        })
    }

    pub fn ambient(&self) -> &Complex<C> {
        &self.ambient
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member_index(&self, name: &str) -> Option<usize> {
        self.members.iter().position(|m| m.name == name)
    }

    /// Cell-wise intersection of a nonempty subfamily.
    pub fn intersect(&self, subset: &[usize]) -> CellSet {
        assert!(!subset.is_empty(), "intersection of the empty subfamily");
        let mut acc = self.members[subset[0]].cells.clone();
        for &i in &subset[1..] {
            acc = acc.intersect(&self.members[i].cells);
        }
        acc
    }

    /// Exact proportion of k-element subfamilies with nonempty intersection.
    pub fn delta(&self, k: usize, limits: &Limits) -> Result<BigRational, Error> {
        assert!(k >= 1 && k <= self.len(), "delta needs 1 <= k <= member count");
        let meeting = self.f_count(k, limits)?;
        let total = big_binomial(self.len() as u64, k as u64);
        Ok(Ratio::new(
            BigInt::from(meeting),
            BigInt::from(total),
        ))
    }

    /// Number of k-element subfamilies with nonempty intersection
    /// (the `(k-1)`-dimensional face count of the nerve).
    pub fn f_count(&self, k: usize, limits: &Limits) -> Result<BigUint, Error> {
        assert!(k >= 1 && k <= self.len());
        let total = big_binomial(self.len() as u64, k as u64);
        match u64::try_from(&total) {
            Ok(t) => limits.check_steps(t, "subfamily enumeration")?,
            Err(_) => {
                return Err(Error::ResourceLimit(
                    "subfamily enumeration is astronomically large".into(),
                ))
            }
        }
        let subsets: Vec<Vec<usize>> = (0..self.len()).combinations(k).collect();
        let count = subsets
            .par_iter()
            .filter(|s| !self.intersect(s).is_empty())
            .count();
        Ok(BigUint::from(count))
    }

    /// Nerve densities and face counts for `k = 1 ..= max_k`.
    pub fn nerve_profile(&self, max_k: usize, limits: &Limits) -> Result<NerveProfile, Error> {
        let mut entries = Vec::new();
        for k in 1..=max_k.min(self.len()) {
            let meeting = self.f_count(k, limits)?;
            let total = big_binomial(self.len() as u64, k as u64);
            let delta = Ratio::new(BigInt::from(meeting.clone()), BigInt::from(total.clone()));
            entries.push(NerveEntry {
                k,
                meeting: meeting.to_string(),
                subsets: total.to_string(),
                delta: rational_string(&delta),
            });
        }
        Ok(NerveProfile {
            n_members: self.len(),
            entries,
        })
    }

    /// The homological shatter value: the maximum of the reduced Betti
    /// numbers in dimensions `0 <= i < h` over all nonempty subfamilies of
    /// size at most `k`. Empty intersections contribute zero (their reduced
    /// homology sits in degree -1, outside the range).
    pub fn shatter(&self, h: usize, k: usize, limits: &Limits) -> Result<usize, Error> {
        assert!(h >= 1 && k >= 1);
        let mut subsets: Vec<Vec<usize>> = Vec::new();
        for size in 1..=k.min(self.len()) {
            let total = big_binomial(self.len() as u64, size as u64);
            match u64::try_from(&total) {
                Ok(t) => limits.check_steps(subsets.len() as u64 + t, "shatter enumeration")?,
                Err(_) => {
                    return Err(Error::ResourceLimit(
                        "shatter enumeration is astronomically large".into(),
                    ))
                }
            }
            subsets.extend((0..self.len()).combinations(size));
        }
        let best = subsets
            .par_iter()
            .map(|s| {
                let betti = self.ambient.betti(&self.intersect(s));
                betti.iter().take(h).copied().max().unwrap_or(0)
            })
            .max()
            .unwrap_or(0);
        Ok(best)
    }

    /// The k-uniform nerve hypergraph: vertices are member indices, edges
    /// the k-subfamilies with nonempty intersection.
    pub fn nerve_hypergraph(&self, k: usize, limits: &Limits) -> Result<Hypergraph, Error> {
        assert!(k >= 1 && k <= self.len());
        let total = big_binomial(self.len() as u64, k as u64);
        match u64::try_from(&total) {
            Ok(t) => limits.check_steps(t, "nerve hypergraph enumeration")?,
            Err(_) => {
                return Err(Error::ResourceLimit(
                    "nerve hypergraph enumeration is astronomically large".into(),
                ))
            }
        }
        let edges: BTreeSet<Vec<usize>> = (0..self.len())
            .combinations(k)
            .filter(|s| !self.intersect(s).is_empty())
            .collect();
        Ok(Hypergraph {
            vertex_count: self.len(),
            uniformity: k,
            edges,
        })
    }

    /// Evaluates both sides of the stepping-up inequality
    /// `delta(l) >= 1 - (1 - delta(k)) C(l, k)` exactly.
    ///
    /// The inequality is guaranteed for convex-like families only; the
    /// report states whether it held here.
    pub fn check_stepping_inequality(
        &self,
        k: usize,
        l: usize,
        limits: &Limits,
    ) -> Result<SteppingCheck, Error> {
        assert!(k <= l && l <= self.len());
        let delta_k = self.delta(k, limits)?;
        let delta_l = self.delta(l, limits)?;
        let choose = BigRational::from(BigInt::from(big_binomial(l as u64, k as u64)));
        let rhs = BigRational::one() - (BigRational::one() - delta_k.clone()) * choose;
        let holds = delta_l >= rhs;
        Ok(SteppingCheck {
            k,
            l,
            delta_k,
            delta_l,
            rhs,
            holds,
        })
    }
}

/// Exact binomial coefficient on machine-sized arguments.
pub fn big_binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

pub fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Nerve densities by subfamily size, with exact counts.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct NerveProfile {
    pub n_members: usize,
    pub entries: Vec<NerveEntry>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct NerveEntry {
    pub k: usize,
    /// k-subfamilies with nonempty intersection, exact.
    pub meeting: String,
    /// All k-subfamilies, exact.
    pub subsets: String,
    /// meeting / subsets as an exact `p/q` string.
    pub delta: String,
}

/// Both sides of the stepping-up inequality, exact.
#[derive(Debug, Clone)]
pub struct SteppingCheck {
    pub k: usize,
    pub l: usize,
    pub delta_k: BigRational,
    pub delta_l: BigRational,
    pub rhs: BigRational,
    pub holds: bool,
}

/// A uniform hypergraph on member indices.
#[derive(Debug, Clone)]
pub struct Hypergraph {
    pub vertex_count: usize,
    pub uniformity: usize,
    pub edges: BTreeSet<Vec<usize>>,
}

impl Hypergraph {
    /// The complete m-uniform hypergraph on n vertices.
    pub fn complete(n: usize, m: usize) -> Self {
        Hypergraph {
            vertex_count: n,
            uniformity: m,
            edges: (0..n).combinations(m).collect(),
        }
    }

    pub fn has_edge(&self, edge: &[usize]) -> bool {
        let mut e = edge.to_vec();
        e.sort_unstable();
        self.edges.contains(&e)
    }

    /// The sub-hypergraph induced on a vertex subset (same labels).
    pub fn induced(&self, vertices: &BTreeSet<usize>) -> Hypergraph {
        Hypergraph {
            vertex_count: self.vertex_count,
            uniformity: self.uniformity,
            edges: self
                .edges
                .iter()
                .filter(|e| e.iter().all(|v| vertices.contains(v)))
                .cloned()
                .collect(),
        }
    }
}

/// Counts the complete m-partite sub-hypergraphs with classes of size `t`:
/// families of m pairwise disjoint t-subsets of the vertices such that every
/// transversal m-tuple is an edge. Classes are unordered and listed in
/// canonical order, so each copy is counted once. Containment, not induced.
pub fn count_multipartite(
    h: &Hypergraph,
    m: usize,
    t: usize,
    limits: &Limits,
) -> Result<u64, Error> {
    assert_eq!(h.uniformity, m, "hypergraph uniformity must equal the class count");
    assert!(m >= 1 && t >= 1);
    let classes: Vec<Vec<usize>> = (0..h.vertex_count).combinations(t).collect();
    let mut count = 0u64;
    let mut steps = 0u64;
    let mut chosen: Vec<usize> = Vec::with_capacity(m);
    // Depth-first over strictly increasing class indices with disjointness.
    fn rec(
        h: &Hypergraph,
        classes: &[Vec<usize>],
        m: usize,
        start: usize,
        chosen: &mut Vec<usize>,
        used: &mut BTreeSet<usize>,
        count: &mut u64,
        steps: &mut u64,
        limits: &Limits,
    ) -> Result<(), Error> {
        if chosen.len() == m {
            *steps += 1;
            let all_edges = chosen
                .iter()
                .map(|&c| classes[c].iter().copied())
                .multi_cartesian_product()
                .all(|transversal| h.has_edge(&transversal));
            if all_edges {
                *count += 1;
            }
            return Ok(());
        }
        for c in start..classes.len() {
            *steps += 1;
            if *steps > limits.max_steps {
                return Err(Error::ResourceLimit(format!(
                    "multipartite counting aborted after {} nodes; partial count {}",
                    steps, count
                )));
            }
            if classes[c].iter().any(|v| used.contains(v)) {
                continue;
            }
            for &v in &classes[c] {
                used.insert(v);
            }
            chosen.push(c);
            rec(h, classes, m, c + 1, chosen, used, count, steps, limits)?;
            chosen.pop();
            for &v in &classes[c] {
                used.remove(&v);
            }
        }
        Ok(())
    }
    let mut used = BTreeSet::new();
    rec(
        h,
        &classes,
        m,
        0,
        &mut chosen,
        &mut used,
        &mut count,
        &mut steps,
        limits,
    )?;
    Ok(count)
}

/// The skeleton construction with a prescribed intersection pattern: the
/// ambient complex is the k-skeleton of the simplex on `1..=v`, and the
/// members are the subcomplexes induced by the given vertex-label sets.
/// Any nonempty intersection of members then has trivial homology away
/// from dimension k.
pub fn sharpness_system(
    k: usize,
    v: u32,
    sets: &[BTreeSet<u32>],
) -> Result<SetSystem<SimplexCell>, Error> {
    for (i, s) in sets.iter().enumerate() {
        if s.is_empty() {
            return Err(Error::InvalidInput(format!("member {i} has an empty vertex set")));
        }
        if s.iter().any(|&x| x < 1 || x > v) {
            return Err(Error::InvalidInput(format!(
                "member {i} uses labels outside 1..={v}"
            )));
        }
    }
    let ambient = simplex_skeleton(v, k);
    let members = sets
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let ids: BTreeSet<usize> = s
                .iter()
                .map(|&label| {
                    ambient
                        .id_of(&SimplexCell::new(vec![label]))
                        .expect("label in range")
                        .1
                })
                .collect();
            (format!("member{}", i + 1), ambient.induced(&ids))
        })
        .collect();
    SetSystem::new(ambient, members)
}

/// Deterministic random axis-aligned boxes: members are the subcomplexes of
/// the grid complex on `[grid_n]^d` induced by products of vertex ranges.
pub fn generate_boxes(
    d: usize,
    count: usize,
    grid_n: u32,
    seed: u64,
) -> Result<SetSystem<grid::Cell>, Error> {
    assert!(d >= 1 && grid_n >= 1);
    let spec = GridSpec::new(grid_n, d);
    let ambient = crate::homology::grid_complex(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members = Vec::with_capacity(count);
    for i in 0..count {
        let ranges: Vec<(u32, u32)> = (0..d)
            .map(|_| {
                let lo = rng.gen_range(1..=grid_n);
                let hi = rng.gen_range(lo..=grid_n);
                (lo, hi)
            })
            .collect();
        let vertex_ids: BTreeSet<usize> = ranges
            .iter()
            .map(|&(lo, hi)| lo..=hi)
            .multi_cartesian_product()
            .map(|coords| {
                ambient
                    .id_of(&grid::Cell::vertex(&coords))
                    .expect("vertex in grid")
                    .1
            })
            .collect();
        members.push((format!("box{}", i + 1), ambient.induced(&vertex_ids)));
    }
    SetSystem::new(ambient, members)
}

// ---------------------------------------------------------------------------
// JSON formats
// ---------------------------------------------------------------------------

/// JSON form of a set system. The ambient is either a simplicial facet list
/// or a grid (optionally a skeleton of it); members are induced vertex sets
/// or explicit cell lists, closed downward on load.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct SetSystemJson {
    pub ambient: AmbientJson,
    pub members: Vec<MemberJson>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct AmbientJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub facets: Option<Vec<Vec<u32>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridAmbientJson>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct GridAmbientJson {
    pub n: u32,
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skeleton: Option<usize>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct MemberJson {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertices: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cells: Option<serde_json::Value>,
}

/// A deserialized set system of either carrier kind.
pub enum LoadedSystem {
    Simplicial(SetSystem<SimplexCell>),
    Cubical(SetSystem<grid::Cell>),
}

pub fn load_system(json: &SetSystemJson, limits: &Limits) -> Result<LoadedSystem, Error> {
    match (&json.ambient.facets, &json.ambient.grid) {
        (Some(facets), None) => Ok(LoadedSystem::Simplicial(load_simplicial(
            facets,
            &json.members,
            limits,
        )?)),
        (None, Some(g)) => Ok(LoadedSystem::Cubical(load_cubical(g, &json.members, limits)?)),
        _ => Err(Error::InvalidInput(
            "ambient must have exactly one of `facets` or `grid`".into(),
        )),
    }
}

fn load_simplicial(
    facets: &[Vec<u32>],
    members: &[MemberJson],
    limits: &Limits,
) -> Result<SetSystem<SimplexCell>, Error> {
    if facets.is_empty() {
        return Err(Error::InvalidInput("ambient facet list is empty".into()));
    }
    let mut cell_bound = 0u64;
    for f in facets {
        if f.is_empty() {
            return Err(Error::InvalidInput("empty facet".into()));
        }
        if f.len() > 24 {
            return Err(Error::InvalidInput(format!(
                "facet with {} vertices would expand beyond any sensible cell budget",
                f.len()
            )));
        }
        cell_bound = cell_bound.saturating_add(1u64 << f.len());
    }
    if cell_bound > limits.max_cells {
        return Err(Error::ResourceLimit(format!(
            "ambient closure may reach {cell_bound} cells, above the cap of {}",
            limits.max_cells
        )));
    }
    let ambient = Complex::from_cells(facets.iter().map(|f| SimplexCell::new(f.clone())));
    let mut out = Vec::with_capacity(members.len());
    for m in members {
        let cells = match (&m.vertices, &m.cells) {
            (Some(v), None) => {
                let labels: Vec<u32> = serde_json::from_value(v.clone()).map_err(|e| {
                    Error::InvalidInput(format!("member {:?}: vertices must be labels: {e}", m.name))
                })?;
                let ids = labels
                    .iter()
                    .map(|&l| {
                        ambient
                            .id_of(&SimplexCell::new(vec![l]))
                            .map(|(_, i)| i)
                            .ok_or_else(|| {
                                Error::InvalidInput(format!(
                                    "member {:?}: vertex {l} not in the ambient complex",
                                    m.name
                                ))
                            })
                    })
                    .collect::<Result<BTreeSet<usize>, Error>>()?;
                ambient.induced(&ids)
            }
            (None, Some(c)) => {
                let simplices: Vec<Vec<u32>> = serde_json::from_value(c.clone()).map_err(|e| {
                    Error::InvalidInput(format!(
                        "member {:?}: cells must be vertex lists: {e}",
                        m.name
                    ))
                })?;
                let ids = simplices
                    .iter()
                    .map(|s| {
                        ambient
                            .id_of(&SimplexCell::new(s.clone()))
                            .ok_or_else(|| {
                                Error::InvalidInput(format!(
                                    "member {:?}: cell {s:?} not in the ambient complex",
                                    m.name
                                ))
                            })
                    })
                    .collect::<Result<Vec<(usize, usize)>, Error>>()?;
                ambient.close_downward(ids)
            }
            _ => {
                return Err(Error::InvalidInput(format!(
                    "member {:?} must have exactly one of `vertices` or `cells`",
                    m.name
                )))
            }
        };
        out.push((m.name.clone(), cells));
    }
    SetSystem::new(ambient, out)
}

fn load_cubical(
    g: &GridAmbientJson,
    members: &[MemberJson],
    limits: &Limits,
) -> Result<SetSystem<grid::Cell>, Error> {
    if g.n < 1 || g.m < 1 {
        return Err(Error::InvalidInput("grid ambient needs n >= 1 and m >= 1".into()));
    }
    let spec = GridSpec::new(g.n, g.m);
    let skeleton = g.skeleton.unwrap_or(g.m);
    if g.m > 16 {
        return Err(Error::InvalidInput("grid ambient with more than 16 axes".into()));
    }
    let total_cells: u64 = (0..=skeleton.min(g.m))
        .map(|k| spec.cell_count(k))
        .fold(0u64, |acc, c| acc.saturating_add(c));
    if total_cells > limits.max_cells {
        return Err(Error::ResourceLimit(format!(
            "grid ambient has {total_cells} cells, above the cap of {}",
            limits.max_cells
        )));
    }
    let ambient = crate::homology::grid_skeleton(spec, skeleton);
    let mut out = Vec::with_capacity(members.len());
    for m in members {
        let cells = match (&m.vertices, &m.cells) {
            (Some(v), None) => {
                let coords: Vec<Vec<u32>> = serde_json::from_value(v.clone()).map_err(|e| {
                    Error::InvalidInput(format!(
                        "member {:?}: vertices must be coordinate arrays: {e}",
                        m.name
                    ))
                })?;
                let ids = coords
                    .iter()
                    .map(|c| {
                        if c.len() != g.m {
                            return Err(Error::InvalidInput(format!(
                                "member {:?}: vertex {c:?} has wrong arity",
                                m.name
                            )));
                        }
                        ambient
                            .id_of(&grid::Cell::vertex(c))
                            .map(|(_, i)| i)
                            .ok_or_else(|| {
                                Error::InvalidInput(format!(
                                    "member {:?}: vertex {c:?} not in the grid",
                                    m.name
                                ))
                            })
                    })
                    .collect::<Result<BTreeSet<usize>, Error>>()?;
                ambient.induced(&ids)
            }
            (None, Some(c)) => {
                let raw: Vec<Vec<[u32; 2]>> = serde_json::from_value(c.clone()).map_err(|e| {
                    Error::InvalidInput(format!(
                        "member {:?}: cells must be interval lists: {e}",
                        m.name
                    ))
                })?;
                let ids = raw
                    .iter()
                    .map(|ivs| {
                        let cell = grid::Cell::new(ivs.iter().map(|&[a, b]| (a, b)).collect());
                        ambient.id_of(&cell).ok_or_else(|| {
                            Error::InvalidInput(format!(
                                "member {:?}: cell {cell:?} not in the ambient complex",
                                m.name
                            ))
                        })
                    })
                    .collect::<Result<Vec<(usize, usize)>, Error>>()?;
                ambient.close_downward(ids)
            }
            _ => {
                return Err(Error::InvalidInput(format!(
                    "member {:?} must have exactly one of `vertices` or `cells`",
                    m.name
                )))
            }
        };
        out.push((m.name.clone(), cells));
    }
    SetSystem::new(ambient, out)
}

/// Serializes a cubical system with induced members back to JSON (members
/// are written as their vertex coordinate lists).
pub fn cubical_system_to_json(system: &SetSystem<grid::Cell>, spec: GridSpec) -> SetSystemJson {
    let members = system
        .members()
        .iter()
        .map(|m| {
            let coords: Vec<Vec<u32>> = m
                .cells
                .ids(0)
                .map(|vid| system.ambient().cell(0, vid).coords())
                .collect();
            MemberJson {
                name: m.name.clone(),
                vertices: Some(serde_json::json!(coords)),
                cells: None,
            }
        })
        .collect();
    SetSystemJson {
        ambient: AmbientJson {
            facets: None,
            grid: Some(GridAmbientJson {
                n: spec.n,
                m: spec.m,
                skeleton: None,
            }),
        },
        members,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval_family() -> SetSystem<SimplexCell> {
        // Path on 0..4 (labels 1..=5), members induced by vertex ranges
        // mirroring the intervals [0,2], [1,3], [2,4].
        let facets: Vec<Vec<u32>> = (1..5).map(|v| vec![v, v + 1]).collect();
        let json = SetSystemJson {
            ambient: AmbientJson {
                facets: Some(facets),
                grid: None,
            },
            members: vec![
                MemberJson {
                    name: "a".into(),
                    vertices: Some(serde_json::json!([1, 2, 3])),
                    cells: None,
                },
                MemberJson {
                    name: "b".into(),
                    vertices: Some(serde_json::json!([2, 3, 4])),
                    cells: None,
                },
                MemberJson {
                    name: "c".into(),
                    vertices: Some(serde_json::json!([3, 4, 5])),
                    cells: None,
                },
            ],
        };
        match load_system(&json, &Limits::default()).unwrap() {
            LoadedSystem::Simplicial(s) => s,
            _ => unreachable!(),
        }
    }

    #[test]
    fn interval_family_densities() {
        let sys = interval_family();
        let l = Limits::default();
        assert_eq!(sys.delta(2, &l).unwrap(), BigRational::one());
        assert_eq!(sys.delta(3, &l).unwrap(), BigRational::one());
        // All three intersect exactly in the middle vertex.
        let triple = sys.intersect(&[0, 1, 2]);
        assert_eq!(triple.count_dim(0), 1);
        assert_eq!(triple.count_dim(1), 0);
    }

    #[test]
    fn single_member_and_disjoint_members() {
        let sys = interval_family();
        let one = sys.intersect(&[1]);
        assert_eq!(one, sys.members()[1].cells);

        // Two disjoint members on a longer path.
        let facets: Vec<Vec<u32>> = (1..8).map(|v| vec![v, v + 1]).collect();
        let json = SetSystemJson {
            ambient: AmbientJson {
                facets: Some(facets),
                grid: None,
            },
            members: vec![
                MemberJson {
                    name: "left".into(),
                    vertices: Some(serde_json::json!([1, 2])),
                    cells: None,
                },
                MemberJson {
                    name: "right".into(),
                    vertices: Some(serde_json::json!([6, 7, 8])),
                    cells: None,
                },
            ],
        };
        let sys2 = match load_system(&json, &Limits::default()).unwrap() {
            LoadedSystem::Simplicial(s) => s,
            _ => unreachable!(),
        };
        assert!(sys2.intersect(&[0, 1]).is_empty());
        let l = Limits::default();
        assert_eq!(sys2.delta(2, &l).unwrap(), BigRational::zero());
    }

    #[test]
    fn f_count_matches_delta_times_binomial() {
        let sys = interval_family();
        let l = Limits::default();
        for k in 1..=3usize {
            let f = sys.f_count(k, &l).unwrap();
            let delta = sys.delta(k, &l).unwrap();
            let total = BigRational::from(BigInt::from(big_binomial(3, k as u64)));
            assert_eq!(BigRational::from(BigInt::from(f)), delta * total);
        }
    }

    #[test]
    fn delta_monotone_vanishing() {
        // If no k-subfamily meets, no larger subfamily can.
        let sys = interval_family();
        let l = Limits::default();
        let mut seen_zero = false;
        for k in 1..=3 {
            let d = sys.delta(k, &l).unwrap();
            if seen_zero {
                assert!(d.is_zero());
            }
            if d.is_zero() {
                seen_zero = true;
            }
        }
    }

    #[test]
    fn nerve_hypergraph_edges() {
        let sys = interval_family();
        let l = Limits::default();
        let h = sys.nerve_hypergraph(2, &l).unwrap();
        assert_eq!(h.edges.len(), 3);
        assert!(h.has_edge(&[0, 2]));
    }

    #[test]
    fn count_multipartite_on_small_graphs() {
        let l = Limits::default();
        // K^2(1) in the complete graph on 4 vertices: one copy per edge.
        let k4 = Hypergraph::complete(4, 2);
        assert_eq!(count_multipartite(&k4, 2, 1, &l).unwrap(), 6);
        // K^2(2) in K4: the three balanced bipartitions.
        assert_eq!(count_multipartite(&k4, 2, 2, &l).unwrap(), 3);
        // The empty hypergraph has no copies.
        let empty = Hypergraph {
            vertex_count: 4,
            uniformity: 2,
            edges: BTreeSet::new(),
        };
        assert_eq!(count_multipartite(&empty, 2, 1, &l).unwrap(), 0);
        // A complete multipartite hypergraph contains itself.
        let mut h = Hypergraph {
            vertex_count: 4,
            uniformity: 2,
            edges: BTreeSet::new(),
        };
        for a in 0..2 {
            for b in 2..4 {
                h.edges.insert(vec![a, b]);
            }
        }
        assert!(count_multipartite(&h, 2, 2, &l).unwrap() >= 1);
    }

    #[test]
    fn stepping_inequality_on_intervals() {
        let sys = interval_family();
        let l = Limits::default();
        let check = sys.check_stepping_inequality(2, 3, &l).unwrap();
        assert!(check.holds);
        assert_eq!(check.delta_l, BigRational::one());
    }

    #[test]
    fn sharpness_full_sets() {
        // Both members the full 1-skeleton of the simplex on 4 vertices:
        // the intersection has first Betti number 3.
        let all: BTreeSet<u32> = (1..=4).collect();
        let sys = sharpness_system(1, 4, &[all.clone(), all]).unwrap();
        let both = sys.intersect(&[0, 1]);
        assert_eq!(sys.ambient().betti(&both), vec![0, 3]);
        let l = Limits::default();
        assert_eq!(sys.shatter(1, 2, &l).unwrap(), 0);
        assert_eq!(sys.shatter(2, 2, &l).unwrap(), 3);
    }

    #[test]
    fn sharpness_singletons_are_contractible() {
        let sets: Vec<BTreeSet<u32>> = (1..=3).map(|v| BTreeSet::from([v])).collect();
        let sys = sharpness_system(1, 4, &sets).unwrap();
        let l = Limits::default();
        assert_eq!(sys.shatter(2, 3, &l).unwrap(), 0);
    }

    #[test]
    fn sharpness_nerve_matches_label_sets() {
        // The nerve of the induced members equals the nerve of the label sets.
        let sets = [
            BTreeSet::from([1, 2]),
            BTreeSet::from([2, 3]),
            BTreeSet::from([3, 4]),
            BTreeSet::from([1, 4]),
        ];
        let sys = sharpness_system(1, 4, &sets).unwrap();
        let l = Limits::default();
        for k in 2..=4usize {
            for combo in (0..4).combinations(k) {
                let mut label_meet = sets[combo[0]].clone();
                for &i in &combo[1..] {
                    label_meet = label_meet.intersection(&sets[i]).copied().collect();
                }
                let cell_meet = sys.intersect(&combo);
                assert_eq!(label_meet.is_empty(), cell_meet.is_empty(), "{combo:?}");
            }
        }
        let h = sys.nerve_hypergraph(2, &l).unwrap();
        assert_eq!(h.edges.len(), 4);
    }

    #[test]
    fn generated_boxes_are_deterministic() {
        let a = generate_boxes(1, 4, 6, 42).unwrap();
        let b = generate_boxes(1, 4, 6, 42).unwrap();
        for (x, y) in a.members().iter().zip(b.members()) {
            assert_eq!(x.cells, y.cells);
        }
        let c = generate_boxes(1, 4, 6, 43).unwrap();
        let differs = a
            .members()
            .iter()
            .zip(c.members())
            .any(|(x, y)| x.cells != y.cells);
        assert!(differs, "different seeds should give different boxes");
    }

    #[test]
    fn single_box_has_full_density() {
        let sys = generate_boxes(2, 1, 4, 7).unwrap();
        let l = Limits::default();
        assert_eq!(sys.delta(1, &l).unwrap(), BigRational::one());
    }

    #[test]
    fn box_members_are_intervals_of_the_path() {
        let sys = generate_boxes(1, 6, 8, 5).unwrap();
        // Each member is a contractible range: Betti all zero.
        for m in sys.members() {
            if !m.cells.is_empty() {
                let betti = sys.ambient().betti(&m.cells);
                assert!(betti.iter().all(|&b| b == 0), "{}: {betti:?}", m.name);
            }
        }
    }

    #[test]
    fn cubical_json_round_trip() {
        let sys = generate_boxes(1, 3, 5, 11).unwrap();
        let json = cubical_system_to_json(&sys, GridSpec::new(5, 1));
        let back = match load_system(&json, &Limits::default()).unwrap() {
            LoadedSystem::Cubical(s) => s,
            _ => unreachable!(),
        };
        for (a, b) in sys.members().iter().zip(back.members()) {
            assert_eq!(a.cells, b.cells, "{}", a.name);
        }
    }

    #[test]
    fn explicit_cells_are_closed_downward() {
        let json = SetSystemJson {
            ambient: AmbientJson {
                facets: None,
                grid: Some(GridAmbientJson {
                    n: 3,
                    m: 2,
                    skeleton: None,
                }),
            },
            members: vec![MemberJson {
                name: "square".into(),
                vertices: None,
                cells: Some(serde_json::json!([[[1, 2], [1, 2]]])),
            }],
        };
        let sys = match load_system(&json, &Limits::default()).unwrap() {
            LoadedSystem::Cubical(s) => s,
            _ => unreachable!(),
        };
        let m = &sys.members()[0];
        assert_eq!(m.cells.count_dim(2), 1);
        assert_eq!(m.cells.count_dim(1), 4);
        assert_eq!(m.cells.count_dim(0), 4);
    }
}
