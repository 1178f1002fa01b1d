//! The colorful-instance pipeline: bookkeeping between grid vertices/flats
//! and colorful subfamilies, the inductive construction of a constrained
//! chain map, its re-verification, the heavy-intersection search, and the
//! stepping-up harness.
//!
//! The guaranteed grid sizes for the construction are astronomically large,
//! so the engine is best-effort: the caller supplies practical sizes and
//! receives either a certificate that re-verifies or a typed failure naming
//! the level that got stuck. Certification replaces the existence bound at
//! desk scale.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use itertools::Itertools;
use num_bigint::{BigInt, BigUint};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::grid::{enumerate_cells, AxisFlat, Cell, Chain, GridSpec};
use crate::homology::{CellSet, ComplexCell, SimplexCell};
use crate::setsystem::{
    big_binomial, load_system, rational_string, BigRational, LoadedSystem, SetSystem,
    SetSystemJson,
};
use crate::subgrid::{find_kernel_subgrid, Gf2Hom, Subgrid, SubgridJson};
use crate::{Error, Limits};

/// Which colorful subfamilies enter the shatter bound `b`.
///
/// `AllColorful` is the literal hypothesis (every colorful subfamily);
/// `UsedFlats` restricts to the sizes that actually arise as families of
/// axis-parallel flats spanned by cells of dimension at most `ceil(d/2)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum ShatterScope {
    #[default]
    AllColorful,
    UsedFlats,
}

/// A colorful instance: `m > d` color classes of `t` members each over an
/// ambient complex of dimension `d`, with every maximal colorful subfamily
/// required to intersect.
pub struct ColorfulInstance<C: ComplexCell> {
    pub d: usize,
    pub m: usize,
    pub t: u32,
    system: SetSystem<C>,
    /// `classes[j]` lists the member indices of color class `j`.
    classes: Vec<Vec<usize>>,
    /// Max reduced Betti number in dimensions below `ceil(d/2)` over the
    /// colorful subfamilies in scope.
    b: usize,
}

impl<C: ComplexCell> ColorfulInstance<C> {
    pub fn new(
        system: SetSystem<C>,
        d: usize,
        m: usize,
        t: u32,
        classes: Vec<Vec<usize>>,
        scope: ShatterScope,
        limits: &Limits,
    ) -> Result<Self, Error> {
        if !(d >= 1 && m > d) {
            return Err(Error::InvalidInput("need m > d >= 1".into()));
        }
        if classes.len() != m {
            return Err(Error::InvalidInput(format!(
                "expected {m} color classes, found {}",
                classes.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for (j, class) in classes.iter().enumerate() {
            if class.len() != t as usize {
                return Err(Error::InvalidInput(format!(
                    "class {j} has {} members, expected {t}",
                    class.len()
                )));
            }
            for &idx in class {
                if idx >= system.len() {
                    return Err(Error::InvalidInput(format!(
                        "class {j} references member {idx} outside the system"
                    )));
                }
                if !seen.insert(idx) {
                    return Err(Error::InvalidInput(format!(
                        "member {idx} appears in more than one class slot"
                    )));
                }
            }
        }
        let vertex_total = (t as u64).checked_pow(m as u32).ok_or_else(|| {
            Error::ResourceLimit("the colorful vertex grid overflows a machine word".into())
        })?;
        limits.check_steps(vertex_total, "colorful hypothesis check")?;
        let mut instance = ColorfulInstance {
            d,
            m,
            t,
            system,
            classes,
            b: 0,
        };
        // Hypothesis: every maximal colorful subfamily intersects.
        for v in crate::subgrid::vertices(t, m) {
            let fam = instance.colorful_of_vertex(&v);
            if instance.system.intersect(&fam).is_empty() {
                return Err(Error::InvalidInput(format!(
                    "colorful subfamily at grid vertex {v:?} has empty intersection"
                )));
            }
        }
        instance.b = instance.compute_b(scope, limits)?;
        Ok(instance)
    }

    pub fn system(&self) -> &SetSystem<C> {
        &self.system
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    /// The shatter bound observed on this instance.
    pub fn b(&self) -> usize {
        self.b
    }

    pub fn top_level(&self) -> usize {
        self.d.div_ceil(2)
    }

    /// The maximal colorful subfamily of a grid vertex: one member per
    /// class, picked by the coordinates. Sorted member indices.
    pub fn colorful_of_vertex(&self, v: &[u32]) -> Vec<usize> {
        assert_eq!(v.len(), self.m);
        let mut fam: Vec<usize> = v
            .iter()
            .enumerate()
            .map(|(j, &x)| {
                assert!((1..=self.t).contains(&x), "vertex outside [t]^m");
                self.classes[j][(x - 1) as usize]
            })
            .collect();
        fam.sort_unstable();
        fam
    }

    /// The colorful subfamily of an axis-parallel flat: one member per
    /// fixed axis. Its size is `m - dim(flat)`.
    pub fn colorful_of_flat(&self, flat: &AxisFlat) -> Vec<usize> {
        assert_eq!(flat.m, self.m);
        let mut fam: Vec<usize> = flat
            .fixed
            .iter()
            .map(|(&j, &a)| {
                assert!((1..=self.t).contains(&a));
                self.classes[j][(a - 1) as usize]
            })
            .collect();
        fam.sort_unstable();
        fam
    }

    fn compute_b(&self, scope: ShatterScope, limits: &Limits) -> Result<usize, Error> {
        let h_top = self.top_level();
        let min_size = match scope {
            ShatterScope::AllColorful => 1,
            ShatterScope::UsedFlats => self.m.saturating_sub(h_top).max(1),
        };
        let mut best = 0usize;
        let mut steps = 0u64;
        for size in min_size..=self.m {
            for class_subset in (0..self.m).combinations(size) {
                let choice_iters: Vec<_> = class_subset
                    .iter()
                    .map(|&j| self.classes[j].iter().copied())
                    .collect();
                for fam in choice_iters.into_iter().multi_cartesian_product() {
                    steps += 1;
                    limits.check_steps(steps, "colorful shatter-bound enumeration")?;
                    let y = self.system.intersect(&fam);
                    let betti = self.system.ambient().betti(&y);
                    let here = betti.iter().take(h_top).copied().max().unwrap_or(0);
                    best = best.max(here);
                }
            }
        }
        Ok(best)
    }
}

/// The image table of the constructed chain map: each cell of the final
/// source skeleton maps to a chain in the ambient complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbientChain {
    pub dim: usize,
    pub cells: BTreeSet<usize>,
}

/// The finished chain map: source grid, top dimension, and the cell table.
pub struct ChainMapRecord {
    pub source: GridSpec,
    pub top_dim: usize,
    pub table: BTreeMap<Cell, AmbientChain>,
}

/// A typed construction failure.
#[derive(Debug)]
pub enum BuildFailure {
    /// No kernel subgrid was found at the requested practical size.
    KernelNotFound { level: usize },
    Resource(Error),
}

impl From<Error> for BuildFailure {
    fn from(e: Error) -> Self {
        BuildFailure::Resource(e)
    }
}

fn eval_table(table: &BTreeMap<Cell, AmbientChain>, chain: &Chain) -> AmbientChain {
    let mut cells: BTreeSet<usize> = BTreeSet::new();
    for cell in chain.cells() {
        let entry = table
            .get(cell)
            .unwrap_or_else(|| panic!("image table is missing cell {cell:?}"));
        debug_assert_eq!(entry.dim, chain.dim());
        for &c in &entry.cells {
            if !cells.remove(&c) {
                cells.insert(c);
            }
        }
    }
    AmbientChain {
        dim: chain.dim(),
        cells,
    }
}

/// Caches per colorful family: the intersection subcomplex and, per
/// dimension, a fixed homology basis. Bases are computed once and reused for
/// the rest of the construction.
struct FamilyCache<'a, C: ComplexCell> {
    instance: &'a ColorfulInstance<C>,
    sets: HashMap<Vec<usize>, Rc<CellSet>>,
    bases: HashMap<(Vec<usize>, usize), Rc<Vec<BTreeSet<usize>>>>,
}

impl<'a, C: ComplexCell> FamilyCache<'a, C> {
    fn new(instance: &'a ColorfulInstance<C>) -> Self {
        FamilyCache {
            instance,
            sets: HashMap::new(),
            bases: HashMap::new(),
        }
    }

    fn set_of(&mut self, fam: &[usize]) -> Rc<CellSet> {
        if let Some(s) = self.sets.get(fam) {
            return s.clone();
        }
        let s = Rc::new(self.instance.system.intersect(fam));
        self.sets.insert(fam.to_vec(), s.clone());
        s
    }

    fn basis_of(&mut self, fam: &[usize], dim: usize) -> Rc<Vec<BTreeSet<usize>>> {
        let key = (fam.to_vec(), dim);
        if let Some(b) = self.bases.get(&key) {
            return b.clone();
        }
        let set = self.set_of(fam);
        let b = Rc::new(self.instance.system.ambient().homology_basis(&set, dim));
        self.bases.insert(key, b.clone());
        b
    }
}

/// Runs the inductive construction.
///
/// `grid_sizes[i]` is the side length of the level-`i` grid; the first entry
/// must equal the class size and the sequence must be non-increasing with
/// `ceil(d/2) + 1` entries. Level 0 sends each grid vertex to the least
/// vertex of its colorful intersection; each later level evaluates the
/// homology classes of boundary images, finds a kernel subgrid at the next
/// size, transports the table, and fills the boundaries of the new
/// top-dimensional cells inside their constraint subcomplexes.
pub fn build_constrained_chain_map<C: ComplexCell>(
    instance: &ColorfulInstance<C>,
    grid_sizes: &[u32],
    limits: &Limits,
) -> Result<(Subgrid, ChainMapRecord), BuildFailure> {
    let h_top = instance.top_level();
    let m = instance.m;
    assert_eq!(
        grid_sizes.len(),
        h_top + 1,
        "need one grid size per level 0..=ceil(d/2)"
    );
    assert_eq!(grid_sizes[0], instance.t, "level-0 grid must match the class size");
    assert!(
        grid_sizes.windows(2).all(|w| w[0] >= w[1] && w[1] >= 1),
        "grid sizes must be non-increasing and positive"
    );
    let ambient = instance.system.ambient();
    let mut cache = FamilyCache::new(instance);

    // Level 0: each vertex goes to the least point of its colorful
    // intersection.
    let spec0 = GridSpec::new(grid_sizes[0], m);
    let mut gamma = Subgrid::identity_prefix(grid_sizes[0], grid_sizes[0], m);
    let mut table: BTreeMap<Cell, AmbientChain> = BTreeMap::new();
    for cell in enumerate_cells(spec0, 0) {
        let fam = instance.colorful_of_vertex(&cell.coords());
        let y = cache.set_of(&fam);
        let p = y.least_vertex().expect("hypothesis checked at load");
        table.insert(
            cell,
            AmbientChain {
                dim: 0,
                cells: BTreeSet::from([p]),
            },
        );
    }

    for level in 0..h_top {
        let spec_i = GridSpec::new(grid_sizes[level], m);
        let next_n = grid_sizes[level + 1];
        // The obstruction homomorphism on (level+1)-cells.
        let mut hom = Gf2Hom::new(spec_i, level + 1, instance.b);
        for sigma in enumerate_cells(spec_i, level + 1) {
            let image = gamma.map_cell(&sigma);
            let fam = instance.colorful_of_flat(&image.affine_span());
            let y = cache.set_of(&fam);
            let boundary_image = eval_table(&table, &Chain::single(spec_i, sigma.clone()).boundary());
            let basis = cache.basis_of(&fam, level);
            let class = ambient.homology_class(&y, level, &boundary_image.cells, &basis, instance.b);
            hom.set_cell(sigma, class);
        }
        let phi = match find_kernel_subgrid(&hom, next_n, limits)? {
            Some(phi) => phi,
            None => return Err(BuildFailure::KernelNotFound { level }),
        };
        let gamma_next = Subgrid::compose(&gamma, &phi);
        let spec_next = GridSpec::new(next_n, m);
        let mut next_table: BTreeMap<Cell, AmbientChain> = BTreeMap::new();
        // Transport the lower-dimensional cells through the new subgrid.
        for dim in 0..=level {
            for cell in enumerate_cells(spec_next, dim) {
                let through = phi.map_cell(&cell);
                next_table.insert(cell, eval_table(&table, &through));
            }
        }
        // Fill the new top-dimensional cells inside their constraints.
        for tau in enumerate_cells(spec_next, level + 1) {
            let boundary_image =
                eval_table(&next_table, &Chain::single(spec_next, tau.clone()).boundary());
            let image = gamma_next.map_cell(&tau);
            let fam = instance.colorful_of_flat(&image.affine_span());
            let y = cache.set_of(&fam);
            let alpha = ambient
                .fill_cycle(&y, level, &boundary_image.cells)
                .expect("kernel membership contradicted: boundary image does not bound");
            next_table.insert(
                tau,
                AmbientChain {
                    dim: level + 1,
                    cells: alpha,
                },
            );
        }
        gamma = gamma_next;
        table = next_table;
    }

    Ok((
        gamma,
        ChainMapRecord {
            source: GridSpec::new(grid_sizes[h_top], m),
            top_dim: h_top,
            table,
        },
    ))
}

/// Independent re-verification of a finished record.
#[derive(Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstrainedVerdict {
    pub table_complete: bool,
    pub chain_map_ok: bool,
    pub support_ok: bool,
    pub nontrivial_ok: bool,
}

impl ConstrainedVerdict {
    pub fn all_ok(&self) -> bool {
        self.table_complete && self.chain_map_ok && self.support_ok && self.nontrivial_ok
    }
}

/// Checks, for every cell of the source skeleton: the table is complete,
/// the boundary of the image equals the image of the boundary, the image
/// support lies inside the intersection of the colorful family of the
/// mapped cell's span, and vertex images have odd support.
pub fn verify_constrained<C: ComplexCell>(
    instance: &ColorfulInstance<C>,
    gamma: &Subgrid,
    record: &ChainMapRecord,
) -> ConstrainedVerdict {
    let ambient = instance.system.ambient();
    let mut verdict = ConstrainedVerdict {
        table_complete: true,
        chain_map_ok: true,
        support_ok: true,
        nontrivial_ok: true,
    };
    let mut sets: HashMap<Vec<usize>, CellSet> = HashMap::new();
    for dim in 0..=record.top_dim {
        for cell in enumerate_cells(record.source, dim) {
            let entry = match record.table.get(&cell) {
                Some(e) => e,
                None => {
                    verdict.table_complete = false;
                    continue;
                }
            };
            // Chain-map law.
            let lhs = ambient.boundary_of_chain(entry.dim, &entry.cells);
            let rhs = eval_table(
                &record.table,
                &Chain::single(record.source, cell.clone()).boundary(),
            );
            if lhs != rhs.cells {
                verdict.chain_map_ok = false;
            }
            // Support constraint.
            let image = gamma.map_cell(&cell);
            let fam = instance.colorful_of_flat(&image.affine_span());
            let y = sets
                .entry(fam.clone())
                .or_insert_with(|| instance.system.intersect(&fam));
            if !entry.cells.iter().all(|&c| y.contains(entry.dim, c)) {
                verdict.support_ok = false;
            }
            // Nontriviality: vertex images supported on oddly many vertices.
            if dim == 0 && entry.cells.len() % 2 == 0 {
                verdict.nontrivial_ok = false;
            }
        }
    }
    verdict
}

/// A pair of source cells whose images overlap although no axis-parallel
/// hyperplane contains both, together with the combined colorful family.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct PairWitness {
    pub sigma: String,
    pub tau: String,
    pub dim_sum: usize,
    /// Member names of the union of the two colorful families.
    pub members: Vec<String>,
    /// The two families share no member (follows from the hyperplane
    /// condition; recorded so the report is self-certifying).
    pub families_disjoint: bool,
    pub joint_intersection_nonempty: bool,
}

/// Exhaustive search over cell pairs of the final skeleton for the
/// conclusion pattern: dimension sum at most `d`, no common axis-parallel
/// hyperplane, overlapping closed image supports. When found, reports the
/// union of the two colorful families and whether it intersects.
pub fn find_intersecting_pair<C: ComplexCell>(
    instance: &ColorfulInstance<C>,
    gamma: &Subgrid,
    record: &ChainMapRecord,
) -> Option<PairWitness> {
    let ambient = instance.system.ambient();
    let spec = record.source;
    let mut cells: Vec<Cell> = Vec::new();
    for dim in 0..=record.top_dim {
        cells.extend(enumerate_cells(spec, dim));
    }
    let closures: Vec<CellSet> = cells
        .iter()
        .map(|c| {
            let entry = &record.table[c];
            ambient.close_downward(entry.cells.iter().map(|&i| (entry.dim, i)))
        })
        .collect();
    for (i, sigma) in cells.iter().enumerate() {
        for (j, tau) in cells.iter().enumerate().skip(i + 1) {
            if sigma.dim() + tau.dim() > instance.d {
                continue;
            }
            let common_hyperplane = (0..spec.m).any(|axis| {
                (1..=spec.n).any(|a| sigma.in_hyperplane(axis, a) && tau.in_hyperplane(axis, a))
            });
            if common_hyperplane {
                continue;
            }
            let overlap = closures[i].intersect(&closures[j]);
            if overlap.is_empty() {
                continue;
            }
            let fam_s = instance.colorful_of_flat(&gamma.map_cell(sigma).affine_span());
            let fam_t = instance.colorful_of_flat(&gamma.map_cell(tau).affine_span());
            let union: BTreeSet<usize> = fam_s.iter().chain(&fam_t).copied().collect();
            let families_disjoint = union.len() == fam_s.len() + fam_t.len();
            let joint = instance
                .system
                .intersect(&union.iter().copied().collect::<Vec<_>>());
            return Some(PairWitness {
                sigma: sigma.key(),
                tau: tau.key(),
                dim_sum: sigma.dim() + tau.dim(),
                members: union
                    .iter()
                    .map(|&idx| instance.system.members()[idx].name.clone())
                    .collect(),
                families_disjoint,
                joint_intersection_nonempty: !joint.is_empty(),
            });
        }
    }
    None
}

/// Brute-force search for at least `2m - d` members of the union of all
/// classes with a common point. Returns the first qualifying member set in
/// lexicographic order.
pub fn find_heavy_intersection<C: ComplexCell>(
    instance: &ColorfulInstance<C>,
    limits: &Limits,
) -> Result<Option<Vec<usize>>, Error> {
    let threshold = 2 * instance.m - instance.d;
    let members: Vec<usize> = instance.classes.iter().flatten().copied().sorted().collect();
    if members.len() < threshold {
        return Ok(None);
    }
    let total = big_binomial(members.len() as u64, threshold as u64);
    match u64::try_from(&total) {
        Ok(t) => limits.check_steps(t, "heavy-intersection search")?,
        Err(_) => {
            return Err(Error::ResourceLimit(
                "heavy-intersection search is astronomically large".into(),
            ))
        }
    }
    for combo in members.into_iter().combinations(threshold) {
        if !instance.system.intersect(&combo).is_empty() {
            return Ok(Some(combo));
        }
    }
    Ok(None)
}

/// The exact value `t_0` of the guaranteed class size, from the downward
/// recurrence seeded at `d + 3`.
pub fn helly_t(b: u64, d: usize, m: usize, limits: &Limits) -> Result<BigUint, Error> {
    Ok(crate::subgrid::helly_t_chain(b, d, m, limits)?
        .first()
        .expect("chain is nonempty")
        .clone())
}

// ---------------------------------------------------------------------------
// Instance JSON and the assembled run report
// ---------------------------------------------------------------------------

/// JSON form of a colorful instance.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct InstanceJson {
    pub d: usize,
    pub m: usize,
    pub t: u32,
    pub system: SetSystemJson,
    /// Member names per color class, each of length `t`.
    pub classes: Vec<Vec<String>>,
}

/// A colorful instance over either carrier kind.
pub enum LoadedInstance {
    Simplicial(ColorfulInstance<SimplexCell>),
    Cubical(ColorfulInstance<crate::grid::Cell>),
}

pub fn load_instance(
    json: &InstanceJson,
    scope: ShatterScope,
    limits: &Limits,
) -> Result<LoadedInstance, Error> {
    fn classes_to_indices<C: ComplexCell>(
        system: &SetSystem<C>,
        classes: &[Vec<String>],
    ) -> Result<Vec<Vec<usize>>, Error> {
        classes
            .iter()
            .map(|class| {
                class
                    .iter()
                    .map(|name| {
                        system.member_index(name).ok_or_else(|| {
                            Error::InvalidInput(format!("class references unknown member {name:?}"))
                        })
                    })
                    .collect()
            })
            .collect()
    }
    match load_system(&json.system, limits)? {
        LoadedSystem::Simplicial(system) => {
            let classes = classes_to_indices(&system, &json.classes)?;
            Ok(LoadedInstance::Simplicial(ColorfulInstance::new(
                system, json.d, json.m, json.t, classes, scope, limits,
            )?))
        }
        LoadedSystem::Cubical(system) => {
            let classes = classes_to_indices(&system, &json.classes)?;
            Ok(LoadedInstance::Cubical(ColorfulInstance::new(
                system, json.d, json.m, json.t, classes, scope, limits,
            )?))
        }
    }
}

/// The assembled outcome of one full run: construction, re-verification,
/// and the heavy-intersection conclusion.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct HellyReport {
    pub schema_version: u32,
    pub success: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level_failed: Option<usize>,
    pub b: usize,
    pub grid_sizes: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subgrid: Option<SubgridJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<ConstrainedVerdict>,
    pub heavy_threshold: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heavy_witness: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair_witness: Option<PairWitness>,
}

/// Builds, verifies, and searches; the report is fully deterministic.
pub fn run_instance<C: ComplexCell>(
    instance: &ColorfulInstance<C>,
    grid_sizes: &[u32],
    limits: &Limits,
) -> Result<HellyReport, Error> {
    let heavy_threshold = 2 * instance.m - instance.d;
    match build_constrained_chain_map(instance, grid_sizes, limits) {
        Ok((gamma, record)) => {
            let verification = verify_constrained(instance, &gamma, &record);
            let pair = find_intersecting_pair(instance, &gamma, &record);
            let heavy = find_heavy_intersection(instance, limits)?;
            Ok(HellyReport {
                schema_version: 1,
                success: verification.all_ok(),
                level_failed: None,
                b: instance.b(),
                grid_sizes: grid_sizes.to_vec(),
                subgrid: Some(SubgridJson::from(&gamma)),
                verification: Some(verification),
                heavy_threshold,
                heavy_witness: heavy.map(|w| {
                    w.iter()
                        .map(|&i| instance.system().members()[i].name.clone())
                        .collect()
                }),
                pair_witness: pair,
            })
        }
        Err(BuildFailure::KernelNotFound { level }) => Ok(HellyReport {
            schema_version: 1,
            success: false,
            level_failed: Some(level),
            b: instance.b(),
            grid_sizes: grid_sizes.to_vec(),
            subgrid: None,
            verification: None,
            heavy_threshold,
            heavy_witness: None,
            pair_witness: None,
        }),
        Err(BuildFailure::Resource(e)) => Err(e),
    }
}

// ---------------------------------------------------------------------------
// Stepping-up harness
// ---------------------------------------------------------------------------

/// The stepping-up bookkeeping on one set system.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct SteppingUpReport {
    pub schema_version: u32,
    pub n_members: usize,
    pub k: usize,
    pub t: usize,
    pub d: usize,
    /// Number of k-subfamilies with nonempty intersection.
    pub k_wise_meeting: String,
    pub delta_k: String,
    /// Total kt-subsets and how many host a complete k-partite pattern.
    pub kt_subsets: String,
    pub hosts: u64,
    /// Hosts where the heavy search certified `2k - d` intersecting members.
    pub certified_hosts: u64,
    /// Distinct (k+1)-subfamilies certified intersecting by witnesses.
    pub certified_tuples: u64,
    pub heavy_threshold: usize,
    /// certified_hosts / kt_subsets, exact.
    pub rho_hat: String,
    /// The double-counting lower bound rho_hat / C(kt, k+1), exact.
    pub implied_lower_bound: String,
    /// The exhaustively computed density of (k+1)-subfamilies.
    pub delta_k_plus_1: String,
    /// implied_lower_bound <= delta_{k+1}.
    pub bound_holds: bool,
}

/// Runs the stepping-up bookkeeping: find the kt-subsets hosting a complete
/// k-partite intersection pattern with classes of size t, certify a heavy
/// subfamily inside each, aggregate the implied (k+1)-subfamilies, and
/// compare the implied density bound with the exhaustive value.
pub fn stepping_up_report<C: ComplexCell>(
    system: &SetSystem<C>,
    k: usize,
    t: usize,
    d: usize,
    limits: &Limits,
) -> Result<SteppingUpReport, Error> {
    assert!(k > d, "stepping up needs k >= d + 1");
    assert!(t >= 1);
    let n = system.len();
    let kt = k * t;
    if kt > n {
        return Err(Error::InvalidInput(format!(
            "need at least kt = {kt} members, found {n}"
        )));
    }
    let heavy_threshold = 2 * k - d;
    let hypergraph = system.nerve_hypergraph(k, limits)?;
    let total_kt = big_binomial(n as u64, kt as u64);
    match u64::try_from(&total_kt) {
        Ok(c) => limits.check_steps(c, "kt-subset enumeration")?,
        Err(_) => {
            return Err(Error::ResourceLimit(
                "kt-subset enumeration is astronomically large".into(),
            ))
        }
    }
    let mut hosts = 0u64;
    let mut certified_hosts = 0u64;
    let mut certified: BTreeSet<Vec<usize>> = BTreeSet::new();
    for subset in (0..n).combinations(kt) {
        // Relabel the induced sub-hypergraph onto 0..kt.
        let position: BTreeMap<usize, usize> =
            subset.iter().enumerate().map(|(p, &v)| (v, p)).collect();
        let induced = crate::setsystem::Hypergraph {
            vertex_count: kt,
            uniformity: k,
            edges: hypergraph
                .edges
                .iter()
                .filter(|e| e.iter().all(|v| position.contains_key(v)))
                .map(|e| e.iter().map(|v| position[v]).sorted().collect())
                .collect(),
        };
        if crate::setsystem::count_multipartite(&induced, k, t, limits)? == 0 {
            continue;
        }
        hosts += 1;
        // Heavy search inside the host.
        let witness = subset
            .iter()
            .copied()
            .combinations(heavy_threshold)
            .find(|combo| !system.intersect(combo).is_empty());
        if let Some(w) = witness {
            certified_hosts += 1;
            for tuple in w.into_iter().combinations(k + 1) {
                certified.insert(tuple);
            }
        }
    }
    let delta_k = system.delta(k, limits)?;
    let delta_k1 = system.delta(k + 1, limits)?;
    let rho_hat = Ratio::new(BigInt::from(certified_hosts), BigInt::from(total_kt.clone()));
    let implied = rho_hat.clone()
        / BigRational::from(BigInt::from(big_binomial(kt as u64, k as u64 + 1)));
    let bound_holds = implied <= delta_k1;
    Ok(SteppingUpReport {
        schema_version: 1,
        n_members: n,
        k,
        t,
        d,
        k_wise_meeting: system.f_count(k, limits)?.to_string(),
        delta_k: rational_string(&delta_k),
        kt_subsets: total_kt.to_string(),
        hosts,
        certified_hosts,
        certified_tuples: certified.len() as u64,
        heavy_threshold,
        rho_hat: rational_string(&rho_hat),
        implied_lower_bound: rational_string(&implied),
        delta_k_plus_1: rational_string(&delta_k1),
        bound_holds,
    })
}

/// Parses the exact `p/q` strings emitted in reports back into rationals.
pub fn parse_rational(s: &str) -> Result<BigRational, Error> {
    let bad = || Error::InvalidInput(format!("malformed rational {s:?}"));
    let (p, q) = s.split_once('/').ok_or_else(bad)?;
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q == BigInt::from(0) {
        return Err(bad());
    }
    Ok(Ratio::new(p, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setsystem::{AmbientJson, MemberJson};

    /// Nested arcs around the center of a path: every colorful intersection
    /// is a contractible arc containing the center.
    fn nested_arc_instance() -> ColorfulInstance<SimplexCell> {
        let facets: Vec<Vec<u32>> = (1..9).map(|v| vec![v, v + 1]).collect();
        let mut members = Vec::new();
        for class in 0..2 {
            for j in 1..=4u32 {
                members.push(MemberJson {
                    name: format!("c{class}a{j}"),
                    vertices: Some(serde_json::json!((j..=(10 - j)).collect::<Vec<u32>>())),
                    cells: None,
                });
            }
        }
        let json = InstanceJson {
            d: 1,
            m: 2,
            t: 4,
            system: SetSystemJson {
                ambient: AmbientJson {
                    facets: Some(facets),
                    grid: None,
                },
                members,
            },
            classes: vec![
                (1..=4).map(|j| format!("c0a{j}")).collect(),
                (1..=4).map(|j| format!("c1a{j}")).collect(),
            ],
        };
        match load_instance(&json, ShatterScope::AllColorful, &Limits::default()).unwrap() {
            LoadedInstance::Simplicial(inst) => inst,
            _ => unreachable!(),
        }
    }

    #[test]
    fn colorful_bookkeeping() {
        let inst = nested_arc_instance();
        // v -> G(v) is injective with |G(v)| = m.
        let mut seen = BTreeSet::new();
        for v in crate::subgrid::vertices(4, 2) {
            let fam = inst.colorful_of_vertex(&v);
            assert_eq!(fam.len(), 2);
            assert!(seen.insert(fam));
        }
        // A flat fixing one axis picks exactly one member.
        let flat = AxisFlat {
            m: 2,
            fixed: BTreeMap::from([(0usize, 2u32)]),
        };
        let fam = inst.colorful_of_flat(&flat);
        assert_eq!(fam.len(), 1);
        assert_eq!(inst.system().members()[fam[0]].name, "c0a2");
        // The full space fixes nothing.
        let full = AxisFlat {
            m: 2,
            fixed: BTreeMap::new(),
        };
        assert!(inst.colorful_of_flat(&full).is_empty());
    }

    #[test]
    fn nested_arcs_build_and_verify() {
        let inst = nested_arc_instance();
        assert_eq!(inst.b(), 0, "contractible intersections");
        let limits = Limits::default();
        let (gamma, record) =
            build_constrained_chain_map(&inst, &[4, 2], &limits).expect("build succeeds");
        let verdict = verify_constrained(&inst, &gamma, &record);
        assert!(verdict.all_ok(), "{verdict:?}");
        // Table covers dims 0 and 1 of the final 2x2 grid.
        assert_eq!(record.table.len(), 4 + 4);
        let heavy = find_heavy_intersection(&inst, &limits).unwrap();
        let witness = heavy.expect("three nested arcs share the center");
        assert_eq!(witness.len(), 3);
        assert!(!inst.system().intersect(&witness).is_empty());
    }

    #[test]
    fn nested_arcs_full_report() {
        let inst = nested_arc_instance();
        let report = run_instance(&inst, &[4, 2], &Limits::default()).unwrap();
        assert!(report.success);
        assert_eq!(report.heavy_threshold, 3);
        assert!(report.heavy_witness.is_some());
        // When the pair search finds the conclusion pattern, the combined
        // family must be a disjoint union of at least 2m - d intersecting
        // members.
        if let Some(pair) = &report.pair_witness {
            assert!(pair.families_disjoint);
            assert!(pair.joint_intersection_nonempty);
            assert!(pair.members.len() >= 3);
        }
    }

    #[test]
    fn planar_instance_with_three_classes() {
        // d = 2, m = 3 over a cubical ambient square: nested boxes around
        // the center, so all colorful intersections stay contractible.
        let mut members = Vec::new();
        for class in 0..3 {
            for j in 0..2u32 {
                // j = 0: the full 5x5 vertex square; j = 1: the inner 3x3.
                let lo = 1 + j;
                let hi = 5 - j;
                let coords: Vec<Vec<u32>> = (lo..=hi)
                    .flat_map(|x| (lo..=hi).map(move |y| vec![x, y]))
                    .collect();
                members.push(MemberJson {
                    name: format!("c{class}b{j}"),
                    vertices: Some(serde_json::json!(coords)),
                    cells: None,
                });
            }
        }
        let json = InstanceJson {
            d: 2,
            m: 3,
            t: 2,
            system: SetSystemJson {
                ambient: AmbientJson {
                    facets: None,
                    grid: Some(crate::setsystem::GridAmbientJson {
                        n: 5,
                        m: 2,
                        skeleton: None,
                    }),
                },
                members,
            },
            classes: (0..3)
                .map(|c| (0..2).map(|j| format!("c{c}b{j}")).collect())
                .collect(),
        };
        let inst = match load_instance(&json, ShatterScope::AllColorful, &Limits::default()) {
            Ok(LoadedInstance::Cubical(inst)) => inst,
            _ => unreachable!(),
        };
        assert_eq!(inst.b(), 0);
        assert_eq!(inst.top_level(), 1);
        let report = run_instance(&inst, &[2, 2], &Limits::default()).unwrap();
        assert!(report.success, "{report:?}");
        // 2m - d = 4 of the six members share a point.
        assert_eq!(report.heavy_threshold, 4);
        assert!(report.heavy_witness.is_some());
    }

    #[test]
    fn identical_members_build_trivially() {
        // Every member is the whole ambient path.
        let facets: Vec<Vec<u32>> = (1..5).map(|v| vec![v, v + 1]).collect();
        let all: Vec<u32> = (1..=5).collect();
        let members: Vec<MemberJson> = (0..4)
            .map(|i| MemberJson {
                name: format!("m{i}"),
                vertices: Some(serde_json::json!(all.clone())),
                cells: None,
            })
            .collect();
        let json = InstanceJson {
            d: 1,
            m: 2,
            t: 2,
            system: SetSystemJson {
                ambient: AmbientJson {
                    facets: Some(facets),
                    grid: None,
                },
                members,
            },
            classes: vec![
                vec!["m0".into(), "m1".into()],
                vec!["m2".into(), "m3".into()],
            ],
        };
        let inst = match load_instance(&json, ShatterScope::AllColorful, &Limits::default()) {
            Ok(LoadedInstance::Simplicial(inst)) => inst,
            _ => unreachable!(),
        };
        let report = run_instance(&inst, &[2, 2], &Limits::default()).unwrap();
        assert!(report.success);
        let witness = report.heavy_witness.unwrap();
        assert_eq!(witness.len(), 3);
    }

    #[test]
    fn empty_colorful_intersection_is_refused() {
        // Two disjoint arcs in different classes violate the hypothesis.
        let facets: Vec<Vec<u32>> = (1..6).map(|v| vec![v, v + 1]).collect();
        let json = InstanceJson {
            d: 1,
            m: 2,
            t: 1,
            system: SetSystemJson {
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
                        vertices: Some(serde_json::json!([5, 6])),
                        cells: None,
                    },
                ],
            },
            classes: vec![vec!["left".into()], vec!["right".into()]],
        };
        let err = load_instance(&json, ShatterScope::AllColorful, &Limits::default());
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn shatter_scopes_agree_on_contractible_instances() {
        let facets: Vec<Vec<u32>> = (1..9).map(|v| vec![v, v + 1]).collect();
        let mut members = Vec::new();
        for class in 0..2 {
            for j in 1..=2u32 {
                members.push(MemberJson {
                    name: format!("c{class}a{j}"),
                    vertices: Some(serde_json::json!((j..=(10 - j)).collect::<Vec<u32>>())),
                    cells: None,
                });
            }
        }
        let json = InstanceJson {
            d: 1,
            m: 2,
            t: 2,
            system: SetSystemJson {
                ambient: AmbientJson {
                    facets: Some(facets),
                    grid: None,
                },
                members,
            },
            classes: vec![
                (1..=2).map(|j| format!("c0a{j}")).collect(),
                (1..=2).map(|j| format!("c1a{j}")).collect(),
            ],
        };
        let all = match load_instance(&json, ShatterScope::AllColorful, &Limits::default()) {
            Ok(LoadedInstance::Simplicial(i)) => i.b(),
            _ => unreachable!(),
        };
        let used = match load_instance(&json, ShatterScope::UsedFlats, &Limits::default()) {
            Ok(LoadedInstance::Simplicial(i)) => i.b(),
            _ => unreachable!(),
        };
        assert_eq!(all, 0);
        assert_eq!(used, 0);
    }

    #[test]
    fn helly_t_matches_chain_head() {
        let limits = Limits::default();
        assert_eq!(
            helly_t(1, 1, 2, &limits).unwrap(),
            BigUint::from(211u32)
        );
    }

    #[test]
    fn stepping_up_on_nested_intervals() {
        // Ten nested intervals: every subfamily intersects, so every
        // kt-subset hosts a copy and the certified density is 1.
        let facets: Vec<Vec<u32>> = (1..30).map(|v| vec![v, v + 1]).collect();
        let members: Vec<MemberJson> = (1..=10u32)
            .map(|j| MemberJson {
                name: format!("i{j}"),
                vertices: Some(serde_json::json!((j..=(30 - j)).collect::<Vec<u32>>())),
                cells: None,
            })
            .collect();
        let json = SetSystemJson {
            ambient: AmbientJson {
                facets: Some(facets),
                grid: None,
            },
            members,
        };
        let system = match load_system(&json, &Limits::default()).unwrap() {
            LoadedSystem::Simplicial(s) => s,
            _ => unreachable!(),
        };
        let limits = Limits::default();
        let report = stepping_up_report(&system, 2, 2, 1, &limits).unwrap();
        assert_eq!(report.hosts, 210); // C(10, 4)
        assert_eq!(report.certified_hosts, 210);
        assert_eq!(report.delta_k_plus_1, "1/1");
        assert!(report.bound_holds);
        let implied = parse_rational(&report.implied_lower_bound).unwrap();
        let delta = parse_rational(&report.delta_k_plus_1).unwrap();
        assert!(implied <= delta);
    }

    #[test]
    fn stepping_up_zero_density_is_vacuous() {
        // Pairwise disjoint members: no k-subfamily meets, no hosts.
        let facets: Vec<Vec<u32>> = (1..12).map(|v| vec![v, v + 1]).collect();
        let members: Vec<MemberJson> = (0..4u32)
            .map(|j| MemberJson {
                name: format!("p{j}"),
                vertices: Some(serde_json::json!([3 * j + 1])),
                cells: None,
            })
            .collect();
        let json = SetSystemJson {
            ambient: AmbientJson {
                facets: Some(facets),
                grid: None,
            },
            members,
        };
        let system = match load_system(&json, &Limits::default()).unwrap() {
            LoadedSystem::Simplicial(s) => s,
            _ => unreachable!(),
        };
        let report = stepping_up_report(&system, 2, 2, 1, &Limits::default()).unwrap();
        assert_eq!(report.hosts, 0);
        assert_eq!(report.certified_tuples, 0);
        assert!(report.bound_holds);
    }

    #[test]
    fn planted_single_host() {
        // Exactly one 4-subset forms the complete bipartite pattern:
        // members a1, a2 meet b1, b2 around the center, everything else is
        // far away and pairwise disjoint from them.
        let facets: Vec<Vec<u32>> = (1..20).map(|v| vec![v, v + 1]).collect();
        let mk = |name: &str, lo: u32, hi: u32| MemberJson {
            name: name.into(),
            vertices: Some(serde_json::json!((lo..=hi).collect::<Vec<u32>>())),
            cells: None,
        };
        let json = SetSystemJson {
            ambient: AmbientJson {
                facets: Some(facets),
                grid: None,
            },
            members: vec![
                mk("a1", 8, 12),
                mk("a2", 9, 13),
                mk("b1", 10, 14),
                mk("b2", 7, 11),
                mk("far1", 1, 2),
                mk("far2", 18, 19),
            ],
        };
        let system = match load_system(&json, &Limits::default()).unwrap() {
            LoadedSystem::Simplicial(s) => s,
            _ => unreachable!(),
        };
        let report = stepping_up_report(&system, 2, 2, 1, &Limits::default()).unwrap();
        assert_eq!(report.hosts, 1);
        assert_eq!(report.certified_hosts, 1);
        assert!(report.certified_tuples >= 1);
        assert!(report.bound_holds);
    }
}
