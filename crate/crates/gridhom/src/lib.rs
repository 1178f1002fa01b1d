//! Z2 chain calculus on cubical grid complexes and finite set systems.
//!
//! The crate provides:
//!
//! - bit-packed GF(2) linear algebra ([`gf2`]),
//! - cells, chains, products and boundaries of grid complexes ([`grid`]),
//! - stair-convex chains and machine verification of their boundary
//!   identities ([`stair`]),
//! - reduced Z2 homology of finite cubical and simplicial complexes
//!   ([`homology`]),
//! - subgrids, induced chain maps, and constructive monochromatic /
//!   kernel-subgrid searches with exact big-integer Ramsey bounds
//!   ([`subgrid`]),
//! - the minor complexes M_d and their stair-chain embeddings ([`minor`]),
//! - finite set systems with nerve densities, homological shatter
//!   functions and supersaturation counting ([`setsystem`]),
//! - the constrained-chain-map pipeline and stepping-up harness
//!   ([`helly`]).
//!
//! All chain arithmetic is over Z2. Searches are deterministic: identical
//! inputs (and seeds, where randomness is involved) give identical results.

pub mod gf2;
pub mod grid;
pub mod helly;
pub mod homology;
pub mod minor;
pub mod setsystem;
pub mod stair;
pub mod subgrid;

use thiserror::Error;

/// Errors produced by loaders, enumeration-heavy searches and the
/// big-integer bound calculators.
///
/// Contract violations (malformed cells, cross-spec arithmetic, out-of-range
/// anchors) panic instead: they indicate fixture bugs, not runtime
/// conditions. Input files are validated by the loaders before any chain
/// arithmetic runs, so a panic never originates from user data.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
}

/// Resource ceilings enforced before large allocations or enumerations.
#[derive(Debug, Clone)]
pub struct Limits {
    /// Maximum number of cells a single chain or complex may hold.
    pub max_cells: u64,
    /// Maximum number of enumerated units (subsets, subgrids, backtrack nodes).
    pub max_steps: u64,
    /// Maximum bit size of any big integer produced by the bound calculators.
    pub max_bignum_bits: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_cells: 10_000_000,
            max_steps: 100_000_000,
            max_bignum_bits: 1 << 22,
        }
    }
}

impl Limits {
    /// Returns `Err` if `count` exceeds the enumeration ceiling.
    pub fn check_steps(&self, count: u64, what: &str) -> Result<(), Error> {
        if count > self.max_steps {
            Err(Error::ResourceLimit(format!(
                "{what}: {count} units exceed the cap of {}",
                self.max_steps
            )))
        } else {
            Ok(())
        }
    }
}
