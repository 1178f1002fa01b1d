//! Command-line surface for the chain-calculus toolkit.
//!
//! Every report is a single JSON document on standard output with a
//! `schema_version` field and stable key order; the two bound calculators
//! print bare decimal integers. Exit codes: 0 success, 1 malformed input,
//! 2 verification failure (with a replayable counterexample in the report),
//! 3 resource-limit abort.

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use gridhom::grid::{enumerate_cells, Chain, ChainJson, GridSpec};
use gridhom::helly::{
    load_instance, run_instance, stepping_up_report, InstanceJson, LoadedInstance, ShatterScope,
};
use gridhom::homology::{Complex, SimplexCell};
use gridhom::minor::{build_md, g_sharp, verify_chain_map, verify_disjoint_supports};
use gridhom::setsystem::{
    count_multipartite, cubical_system_to_json, generate_boxes, load_system, LoadedSystem,
    NerveProfile, SetSystem, SetSystemJson,
};
use gridhom::stair::{
    alternating_suite, boundary_suite, hyperplane_suite, stc_recursive, unwrap_suite, StairArgs,
    SuiteOutcome,
};
use gridhom::subgrid::{
    chi_coloring, find_kernel_subgrid, find_monochromatic_subgrid, helly_t_chain,
    is_monochromatic, n_mono, n_subgrid, verify_kernel, Gf2Hom, HomJson, Subgrid, SubgridJson,
};
use gridhom::{Error, Limits};

#[derive(Parser)]
#[command(name = "gridhom", version, about = "Z2 grid-complex chain calculus and set-system experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker thread cap; the GRIDHOM_THREADS environment variable overrides.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Cap on cells held by a single chain or complex.
    #[arg(long, global = true, default_value_t = 10_000_000)]
    max_cells: u64,
    /// Cap on enumerated units (subsets, subgrids, backtrack nodes).
    #[arg(long, global = true, default_value_t = 100_000_000)]
    max_steps: u64,
    /// Wall-clock budget in seconds, checked between work phases.
    #[arg(long, global = true)]
    wall_time: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SearchMode {
    Kernel,
    Mono,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScopeArg {
    All,
    Flats,
}

#[derive(Subcommand)]
enum Command {
    /// Run the exhaustive chain-identity suites plus seeded random laws.
    VerifyIdentities {
        #[arg(long, default_value_t = 4)]
        max_m: usize,
        #[arg(long, default_value_t = 6)]
        max_n: u32,
        /// Seeded random cases per law (boundary-squared, product rule,
        /// induced chain map).
        #[arg(long, default_value_t = 1000)]
        random_checks: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print a stair-convex chain as JSON.
    Stair {
        #[arg(long)]
        m: usize,
        /// Comma-separated strictly increasing anchors.
        #[arg(long, value_delimiter = ',')]
        anchors: Vec<u32>,
        /// Grid side length; defaults to the largest anchor.
        #[arg(long)]
        n: Option<u32>,
    },
    /// Reduced Betti numbers of a complex given as JSON.
    Betti {
        #[arg(long)]
        input: String,
    },
    /// Search for a kernel or monochromatic subgrid of a homomorphism.
    SubgridSearch {
        #[arg(long)]
        input: String,
        #[arg(long)]
        ell: u32,
        #[arg(long, value_enum, default_value_t = SearchMode::Kernel)]
        mode: SearchMode,
    },
    /// Exact monochromatic- and kernel-subgrid bounds (decimal output).
    RamseyBounds {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        ell: u64,
        /// Color count for the monochromatic bound.
        #[arg(long, conflicts_with_all = ["b", "k"])]
        q: Option<u64>,
        /// Target-group dimension for the kernel bound.
        #[arg(long, requires = "k")]
        b: Option<u64>,
        /// Chain dimension for the kernel bound.
        #[arg(long, requires = "b")]
        k: Option<usize>,
        /// Use the historically printed color-count exponent C(m, k+1).
        #[arg(long, default_value_t = false)]
        printed_exponent: bool,
    },
    /// Build M_d, its grid images, and the certification verdicts.
    Minor {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
    },
    /// Nerve densities of a set system up to subfamily size k.
    Nerve {
        #[arg(long)]
        system: String,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Homological shatter value over subfamilies of size at most k.
    Shatter {
        #[arg(long)]
        system: String,
        #[arg(long = "h")]
        h: usize,
        #[arg(long)]
        k: usize,
    },
    /// Count complete multipartite patterns in the nerve hypergraph.
    Supersaturation {
        #[arg(long)]
        system: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        t: usize,
    },
    /// Generate a seeded family of axis-aligned boxes with its nerve profile.
    GenBoxes {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        grid_n: u32,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run the constrained-chain-map pipeline on a colorful instance.
    HellyRun {
        #[arg(long)]
        instance: String,
        /// Comma-separated grid sizes t_0 >= t_1 >= ... (one per level).
        #[arg(long, value_delimiter = ',')]
        grids: Vec<u32>,
        #[arg(long, value_enum, default_value_t = ScopeArg::All)]
        scope: ScopeArg,
    },
    /// The exact guaranteed class size t_0 (decimal output).
    HellyT {
        #[arg(long)]
        b: u64,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
        /// Print the whole level chain instead of t_0 only.
        #[arg(long, default_value_t = false)]
        chain: bool,
    },
    /// Stepping-up bookkeeping: hosts, certificates, implied density bound.
    SteppingUp {
        #[arg(long)]
        system: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

/// Wall-clock budget, polled between work phases.
struct Deadline {
    start: Instant,
    budget_secs: Option<u64>,
}

impl Deadline {
    fn check(&self) -> Result<(), Error> {
        if let Some(budget) = self.budget_secs {
            if self.start.elapsed().as_secs() > budget {
                return Err(Error::ResourceLimit(format!(
                    "wall-time budget of {budget}s exhausted"
                )));
            }
        }
        Ok(())
    }
}

enum CliOutcome {
    Ok,
    VerificationFailed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders --help/--version through the error path too
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let threads = std::env::var("GRIDHOM_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .or(cli.threads);
    if let Some(t) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let limits = Limits {
        max_cells: cli.max_cells,
        max_steps: cli.max_steps,
        ..Limits::default()
    };
    let deadline = Deadline {
        start: Instant::now(),
        budget_secs: cli.wall_time,
    };
    match dispatch(cli.command, &limits, &deadline) {
        Ok(CliOutcome::Ok) => ExitCode::SUCCESS,
        Ok(CliOutcome::VerificationFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidInput(_) => ExitCode::from(1),
                Error::ResourceLimit(_) => ExitCode::from(3),
            }
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &str) -> Result<T, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::InvalidInput(format!(
            "{path}: parse error at line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })
}

fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report serialization")
    );
}

fn dispatch(command: Command, limits: &Limits, deadline: &Deadline) -> Result<CliOutcome, Error> {
    match command {
        Command::VerifyIdentities {
            max_m,
            max_n,
            random_checks,
            seed,
        } => cmd_verify_identities(max_m, max_n, random_checks, seed, deadline),
        Command::Stair { m, anchors, n } => cmd_stair(m, anchors, n, limits),
        Command::Betti { input } => cmd_betti(&input),
        Command::SubgridSearch { input, ell, mode } => cmd_subgrid_search(&input, ell, mode, limits),
        Command::RamseyBounds {
            m,
            ell,
            q,
            b,
            k,
            printed_exponent,
        } => cmd_ramsey_bounds(m, ell, q, b, k, printed_exponent, limits),
        Command::Minor { d, m } => cmd_minor(d, m),
        Command::Nerve { system, k, format } => cmd_nerve(&system, k, format, limits),
        Command::Shatter { system, h, k } => cmd_shatter(&system, h, k, limits),
        Command::Supersaturation { system, m, t } => cmd_supersaturation(&system, m, t, limits),
        Command::GenBoxes {
            d,
            count,
            seed,
            grid_n,
            format,
        } => cmd_gen_boxes(d, count, seed, grid_n, format, limits),
        Command::HellyRun {
            instance,
            grids,
            scope,
        } => cmd_helly_run(&instance, &grids, scope, limits),
        Command::HellyT { b, d, m, chain } => cmd_helly_t(b, d, m, chain, limits),
        Command::SteppingUp {
            system,
            k,
            t,
            d,
            format,
        } => cmd_stepping_up(&system, k, t, d, format, limits),
    }
}

// ---------------------------------------------------------------------------
// verify-identities
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct RandomLawOutcome {
    name: String,
    checked: u32,
    failures: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_failure: Option<ChainJson>,
}

#[derive(Serialize)]
struct VerifyReport {
    schema_version: u32,
    max_m: usize,
    max_n: u32,
    seed: u64,
    suites: Vec<SuiteOutcome>,
    random_laws: Vec<RandomLawOutcome>,
    passed: bool,
}

fn random_chain(spec: GridSpec, k: usize, rng: &mut ChaCha8Rng) -> Chain {
    let cells = enumerate_cells(spec, k);
    let chosen: Vec<_> = cells.into_iter().filter(|_| rng.gen_bool(0.35)).collect();
    Chain::from_cells(spec, k, chosen)
}

fn cmd_verify_identities(
    max_m: usize,
    max_n: u32,
    random_checks: u32,
    seed: u64,
    deadline: &Deadline,
) -> Result<CliOutcome, Error> {
    if max_m < 1 || max_n < 2 {
        return Err(Error::InvalidInput("need max_m >= 1 and max_n >= 2".into()));
    }
    let mut suites = Vec::new();
    for suite in [
        boundary_suite(max_m, max_n),
        unwrap_suite(max_m, max_n),
        alternating_suite(max_m, max_n),
        hyperplane_suite(max_m, max_n),
    ] {
        deadline.check()?;
        suites.push(suite);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random_laws = Vec::new();

    // boundary of boundary vanishes
    let mut failures = 0;
    let mut first = None;
    for _ in 0..random_checks {
        let m = rng.gen_range(1..=4usize);
        let n = rng.gen_range(2..=5u32);
        let spec = GridSpec::new(n, m);
        let k = rng.gen_range(1..=m);
        let c = random_chain(spec, k, &mut rng);
        if !c.boundary().boundary().is_zero() {
            failures += 1;
            first.get_or_insert_with(|| ChainJson::from_chain(&c));
        }
    }
    random_laws.push(RandomLawOutcome {
        name: "boundary-of-boundary".into(),
        checked: random_checks,
        failures,
        first_failure: first,
    });
    deadline.check()?;

    // product rule
    let mut failures = 0;
    let mut first = None;
    for _ in 0..random_checks {
        let n = rng.gen_range(2..=4u32);
        let m1 = rng.gen_range(1..=2usize);
        let m2 = rng.gen_range(1..=2usize);
        let k1 = rng.gen_range(0..=m1);
        let k2 = rng.gen_range(0..=m2);
        let a = random_chain(GridSpec::new(n, m1), k1, &mut rng);
        let b = random_chain(GridSpec::new(n, m2), k2, &mut rng);
        let lhs = a.product(&b).boundary();
        let rhs = a.boundary().product(&b).add(&a.product(&b.boundary()));
        if lhs != rhs {
            failures += 1;
            first.get_or_insert_with(|| ChainJson::from_chain(&a));
        }
    }
    random_laws.push(RandomLawOutcome {
        name: "product-rule".into(),
        checked: random_checks,
        failures,
        first_failure: first,
    });
    deadline.check()?;

    // induced chain map commutes with the boundary
    let mut failures = 0;
    let mut first = None;
    for _ in 0..random_checks {
        let m = rng.gen_range(1..=3usize);
        let n = rng.gen_range(3..=6u32);
        let ell = rng.gen_range(2..=n.min(4));
        let maps: Vec<Vec<u32>> = (0..m)
            .map(|_| {
                let mut vals: Vec<u32> = (1..=n).collect();
                for i in (1..vals.len()).rev() {
                    let j = rng.gen_range(0..=i);
                    vals.swap(i, j);
                }
                vals.truncate(ell as usize);
                vals.sort_unstable();
                vals
            })
            .collect();
        let g = Subgrid::new(ell, n, m, maps);
        let k = rng.gen_range(1..=m);
        let c = random_chain(GridSpec::new(ell, m), k, &mut rng);
        if g.chain_map(&c.boundary()) != g.chain_map(&c).boundary() {
            failures += 1;
            first.get_or_insert_with(|| ChainJson::from_chain(&c));
        }
    }
    random_laws.push(RandomLawOutcome {
        name: "induced-chain-map".into(),
        checked: random_checks,
        failures,
        first_failure: first,
    });

    let passed = suites.iter().all(|s| s.passed()) && random_laws.iter().all(|r| r.failures == 0);
    let report = VerifyReport {
        schema_version: 1,
        max_m,
        max_n,
        seed,
        suites,
        random_laws,
        passed,
    };
    print_json(&report);
    Ok(if passed {
        CliOutcome::Ok
    } else {
        CliOutcome::VerificationFailed
    })
}

// ---------------------------------------------------------------------------
// stair / betti
// ---------------------------------------------------------------------------

fn cmd_stair(
    m: usize,
    anchors: Vec<u32>,
    n: Option<u32>,
    limits: &Limits,
) -> Result<CliOutcome, Error> {
    if anchors.is_empty() {
        return Err(Error::InvalidInput("at least one anchor required".into()));
    }
    if anchors.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "anchors must be strictly increasing".into(),
        ));
    }
    let n = n.unwrap_or(*anchors.last().unwrap());
    if *anchors.last().unwrap() > n {
        return Err(Error::InvalidInput("anchors exceed the grid side".into()));
    }
    // The chain has at most one cell per composition and unit segment:
    // C(m, k) summands of at most (n - 1)^k cells each.
    let k = anchors.len() - 1;
    let bound = GridSpec::new(n, m).cell_count(k.min(m));
    if bound > limits.max_cells {
        return Err(Error::ResourceLimit(format!(
            "the chain may reach {bound} cells, above the cap of {}",
            limits.max_cells
        )));
    }
    let chain = stc_recursive(&StairArgs::new(n, m, anchors));
    print_json(&ChainJson::from_chain(&chain));
    Ok(CliOutcome::Ok)
}

#[derive(Serialize)]
struct BettiReport {
    schema_version: u32,
    betti: Vec<usize>,
}

fn cmd_betti(input: &str) -> Result<CliOutcome, Error> {
    let raw: serde_json::Value = read_json(input)?;
    let betti = if raw.get("facets").is_some() {
        let facets: Vec<Vec<u32>> = serde_json::from_value(raw["facets"].clone())
            .map_err(|e| Error::InvalidInput(format!("{input}: bad facet list: {e}")))?;
        if facets.is_empty() || facets.iter().any(|f| f.is_empty()) {
            return Err(Error::InvalidInput(format!("{input}: facets must be nonempty")));
        }
        let complex = Complex::from_cells(facets.into_iter().map(SimplexCell::new));
        complex.betti(&complex.full_set())
    } else {
        let closure = raw
            .get("closure")
            .map(|v| v.as_bool().unwrap_or(true))
            .unwrap_or(true);
        let chain_json: ChainJson = serde_json::from_value(raw)
            .map_err(|e| Error::InvalidInput(format!("{input}: bad chain JSON: {e}")))?;
        let chain = chain_json.into_chain()?;
        if !closure && chain.dim() > 0 {
            return Err(Error::InvalidInput(format!(
                "{input}: a positive-dimensional cell list is not face-closed; set \"closure\": true"
            )));
        }
        let complex = Complex::from_cells(chain.cells().iter().cloned());
        complex.betti(&complex.full_set())
    };
    print_json(&BettiReport {
        schema_version: 1,
        betti,
    });
    Ok(CliOutcome::Ok)
}

// ---------------------------------------------------------------------------
// subgrid-search / ramsey-bounds
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SubgridSearchReport {
    schema_version: u32,
    mode: String,
    ell: u32,
    found: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    subgrid: Option<SubgridJson>,
    /// Generator boxes re-checked for kernel mode; image vertices recolored
    /// for monochromatic mode.
    certificate_ok: bool,
}

fn cmd_subgrid_search(
    input: &str,
    ell: u32,
    mode: SearchMode,
    limits: &Limits,
) -> Result<CliOutcome, Error> {
    let json: HomJson = read_json(input)?;
    let hom = Gf2Hom::from_json(&json)?;
    let (found, certificate_ok, label) = match mode {
        SearchMode::Kernel => {
            let found = find_kernel_subgrid(&hom, ell, limits)?;
            let ok = found.as_ref().is_none_or(|g| verify_kernel(&hom, g));
            (found, ok, "kernel")
        }
        SearchMode::Mono => {
            let color = |v: &[u32]| chi_coloring(&hom, v);
            let spec = hom.spec();
            let found = find_monochromatic_subgrid(spec.n, spec.m, ell, None, &color, limits)?;
            let ok = found.as_ref().is_none_or(|g| is_monochromatic(g, &color));
            (found, ok, "mono")
        }
    };
    let report = SubgridSearchReport {
        schema_version: 1,
        mode: label.into(),
        ell,
        found: found.is_some(),
        subgrid: found.as_ref().map(SubgridJson::from),
        certificate_ok,
    };
    print_json(&report);
    Ok(if certificate_ok {
        CliOutcome::Ok
    } else {
        CliOutcome::VerificationFailed
    })
}

fn cmd_ramsey_bounds(
    m: usize,
    ell: u64,
    q: Option<u64>,
    b: Option<u64>,
    k: Option<usize>,
    printed_exponent: bool,
    limits: &Limits,
) -> Result<CliOutcome, Error> {
    if m < 1 || ell < 1 {
        return Err(Error::InvalidInput("need m >= 1 and ell >= 1".into()));
    }
    let ell = BigUint::from(ell);
    let value = match (q, b, k) {
        (Some(q), None, None) => {
            if q < 1 {
                return Err(Error::InvalidInput("need q >= 1".into()));
            }
            n_mono(m, &ell, &BigUint::from(q), limits)?
        }
        (None, Some(b), Some(k)) => {
            if k > m {
                return Err(Error::InvalidInput("need k <= m".into()));
            }
            n_subgrid(b, k, m, &ell, printed_exponent, limits)?
        }
        _ => {
            return Err(Error::InvalidInput(
                "pass either --q (monochromatic) or both --b and --k (kernel)".into(),
            ))
        }
    };
    println!("{value}");
    Ok(CliOutcome::Ok)
}

// ---------------------------------------------------------------------------
// minor
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct MinorReport {
    schema_version: u32,
    d: usize,
    m: usize,
    vertices: usize,
    dim: usize,
    facets: Vec<Vec<u32>>,
    images: Vec<MinorImage>,
    chain_map_ok: bool,
    disjoint_supports_ok: bool,
}

#[derive(Serialize)]
struct MinorImage {
    simplex: Vec<u32>,
    chain: ChainJson,
}

fn cmd_minor(d: usize, m: usize) -> Result<CliOutcome, Error> {
    if d < 1 || m <= d {
        return Err(Error::InvalidInput("need m > d >= 1".into()));
    }
    let md = build_md(d);
    let images: Vec<MinorImage> = md
        .simplices()
        .iter()
        .map(|s| MinorImage {
            simplex: s.vertices().to_vec(),
            chain: ChainJson::from_chain(&g_sharp(&md, m, s)),
        })
        .collect();
    let chain_map_ok = verify_chain_map(&md, m);
    let disjoint_supports_ok = verify_disjoint_supports(&md, m);
    let report = MinorReport {
        schema_version: 1,
        d,
        m,
        vertices: md.vertex_count(),
        dim: md.dim(),
        facets: md
            .maximal_simplices()
            .iter()
            .map(|s| s.vertices().to_vec())
            .collect(),
        images,
        chain_map_ok,
        disjoint_supports_ok,
    };
    let ok = chain_map_ok && disjoint_supports_ok;
    print_json(&report);
    Ok(if ok {
        CliOutcome::Ok
    } else {
        CliOutcome::VerificationFailed
    })
}

// ---------------------------------------------------------------------------
// set-system commands
// ---------------------------------------------------------------------------

fn load_system_file(path: &str, limits: &Limits) -> Result<LoadedSystem, Error> {
    let json: SetSystemJson = read_json(path)?;
    load_system(&json, limits)
}

#[derive(Serialize)]
struct NerveReport {
    schema_version: u32,
    profile: NerveProfile,
}

fn profile_csv(profile: &NerveProfile) -> String {
    let mut out = String::from("k,meeting,subsets,delta\n");
    for e in &profile.entries {
        out.push_str(&format!("{},{},{},{}\n", e.k, e.meeting, e.subsets, e.delta));
    }
    out
}

fn cmd_nerve(path: &str, k: usize, format: Format, limits: &Limits) -> Result<CliOutcome, Error> {
    let profile = match load_system_file(path, limits)? {
        LoadedSystem::Simplicial(s) => nerve_of(&s, k, limits)?,
        LoadedSystem::Cubical(s) => nerve_of(&s, k, limits)?,
    };
    match format {
        Format::Json => print_json(&NerveReport {
            schema_version: 1,
            profile,
        }),
        Format::Csv => print!("{}", profile_csv(&profile)),
    }
    Ok(CliOutcome::Ok)
}

fn nerve_of<C: gridhom::homology::ComplexCell>(
    system: &SetSystem<C>,
    k: usize,
    limits: &Limits,
) -> Result<NerveProfile, Error> {
    if k < 1 || k > system.len() {
        return Err(Error::InvalidInput(format!(
            "need 1 <= k <= {} (member count)",
            system.len()
        )));
    }
    system.nerve_profile(k, limits)
}

#[derive(Serialize)]
struct ShatterReport {
    schema_version: u32,
    h: usize,
    k: usize,
    value: usize,
}

fn cmd_shatter(path: &str, h: usize, k: usize, limits: &Limits) -> Result<CliOutcome, Error> {
    if h < 1 || k < 1 {
        return Err(Error::InvalidInput("need h >= 1 and k >= 1".into()));
    }
    let value = match load_system_file(path, limits)? {
        LoadedSystem::Simplicial(s) => s.shatter(h, k, limits)?,
        LoadedSystem::Cubical(s) => s.shatter(h, k, limits)?,
    };
    print_json(&ShatterReport {
        schema_version: 1,
        h,
        k,
        value,
    });
    Ok(CliOutcome::Ok)
}

#[derive(Serialize)]
struct SupersaturationReport {
    schema_version: u32,
    m: usize,
    t: usize,
    edges: usize,
    copies: u64,
}

fn cmd_supersaturation(
    path: &str,
    m: usize,
    t: usize,
    limits: &Limits,
) -> Result<CliOutcome, Error> {
    if m < 1 || t < 1 {
        return Err(Error::InvalidInput("need m >= 1 and t >= 1".into()));
    }
    let (edges, copies) = match load_system_file(path, limits)? {
        LoadedSystem::Simplicial(s) => {
            let h = s.nerve_hypergraph(m, limits)?;
            (h.edges.len(), count_multipartite(&h, m, t, limits)?)
        }
        LoadedSystem::Cubical(s) => {
            let h = s.nerve_hypergraph(m, limits)?;
            (h.edges.len(), count_multipartite(&h, m, t, limits)?)
        }
    };
    print_json(&SupersaturationReport {
        schema_version: 1,
        m,
        t,
        edges,
        copies,
    });
    Ok(CliOutcome::Ok)
}

#[derive(Serialize)]
struct GenBoxesReport {
    schema_version: u32,
    d: usize,
    count: usize,
    grid_n: u32,
    seed: u64,
    system: SetSystemJson,
    profile: NerveProfile,
}

fn cmd_gen_boxes(
    d: usize,
    count: usize,
    seed: u64,
    grid_n: u32,
    format: Format,
    limits: &Limits,
) -> Result<CliOutcome, Error> {
    if d < 1 || count < 1 || grid_n < 1 {
        return Err(Error::InvalidInput("need d, count, grid_n >= 1".into()));
    }
    let spec = GridSpec::new(grid_n, d);
    let total: u64 = (0..=d).map(|k| spec.cell_count(k)).sum();
    if total > limits.max_cells {
        return Err(Error::ResourceLimit(format!(
            "ambient grid has {total} cells, above the cap of {}",
            limits.max_cells
        )));
    }
    let system = generate_boxes(d, count, grid_n, seed)?;
    let profile = system.nerve_profile(count.min(4), limits)?;
    match format {
        Format::Json => print_json(&GenBoxesReport {
            schema_version: 1,
            d,
            count,
            grid_n,
            seed,
            system: cubical_system_to_json(&system, GridSpec::new(grid_n, d)),
            profile,
        }),
        Format::Csv => print!("{}", profile_csv(&profile)),
    }
    Ok(CliOutcome::Ok)
}

// ---------------------------------------------------------------------------
// helly commands
// ---------------------------------------------------------------------------

fn cmd_helly_run(
    path: &str,
    grids: &[u32],
    scope: ScopeArg,
    limits: &Limits,
) -> Result<CliOutcome, Error> {
    let json: InstanceJson = read_json(path)?;
    let scope = match scope {
        ScopeArg::All => ShatterScope::AllColorful,
        ScopeArg::Flats => ShatterScope::UsedFlats,
    };
    let expected = json.d.div_ceil(2) + 1;
    if grids.len() != expected {
        return Err(Error::InvalidInput(format!(
            "--grids needs {expected} sizes for d = {}",
            json.d
        )));
    }
    let report = match load_instance(&json, scope, limits)? {
        LoadedInstance::Simplicial(inst) => run_instance(&inst, grids, limits)?,
        LoadedInstance::Cubical(inst) => run_instance(&inst, grids, limits)?,
    };
    print_json(&report);
    // A failed kernel search at practical sizes is an honest miss (exit 0
    // with success=false); a certificate that fails re-verification is a
    // verification failure.
    Ok(if report.success || report.verification.is_none() {
        CliOutcome::Ok
    } else {
        CliOutcome::VerificationFailed
    })
}

fn cmd_helly_t(b: u64, d: usize, m: usize, chain: bool, limits: &Limits) -> Result<CliOutcome, Error> {
    if !(d >= 1 && m > d) {
        return Err(Error::InvalidInput("need m > d >= 1".into()));
    }
    let levels = helly_t_chain(b, d, m, limits)?;
    if chain {
        let strings: Vec<String> = levels.iter().map(|t| t.to_string()).collect();
        print_json(&serde_json::json!({
            "schema_version": 1,
            "b": b, "d": d, "m": m,
            "t_chain": strings,
        }));
    } else {
        println!("{}", levels[0]);
    }
    Ok(CliOutcome::Ok)
}

fn cmd_stepping_up(
    path: &str,
    k: usize,
    t: usize,
    d: usize,
    format: Format,
    limits: &Limits,
) -> Result<CliOutcome, Error> {
    if d < 1 || k < d + 1 || t < 1 {
        return Err(Error::InvalidInput("need d >= 1, k >= d + 1, t >= 1".into()));
    }
    let report = match load_system_file(path, limits)? {
        LoadedSystem::Simplicial(s) => stepping_up_report(&s, k, t, d, limits)?,
        LoadedSystem::Cubical(s) => stepping_up_report(&s, k, t, d, limits)?,
    };
    match format {
        Format::Json => print_json(&report),
        Format::Csv => {
            let mut out = String::from("field,value\n");
            for (name, value) in [
                ("n_members", report.n_members.to_string()),
                ("k", report.k.to_string()),
                ("t", report.t.to_string()),
                ("d", report.d.to_string()),
                ("k_wise_meeting", report.k_wise_meeting.clone()),
                ("delta_k", report.delta_k.clone()),
                ("kt_subsets", report.kt_subsets.clone()),
                ("hosts", report.hosts.to_string()),
                ("certified_hosts", report.certified_hosts.to_string()),
                ("certified_tuples", report.certified_tuples.to_string()),
                ("heavy_threshold", report.heavy_threshold.to_string()),
                ("rho_hat", report.rho_hat.clone()),
                ("implied_lower_bound", report.implied_lower_bound.clone()),
                ("delta_k_plus_1", report.delta_k_plus_1.clone()),
                ("bound_holds", report.bound_holds.to_string()),
            ] {
                out.push_str(&format!("{name},{value}\n"));
            }
            print!("{out}");
        }
    }
    Ok(if report.bound_holds {
        CliOutcome::Ok
    } else {
        CliOutcome::VerificationFailed
    })
}
