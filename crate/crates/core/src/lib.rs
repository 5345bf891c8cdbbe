//! Exact computations with iquiver algebras and their Hall algebras over prime fields.

pub mod boundalg;
pub mod config;
pub mod dynkin_bases;
pub mod error;
pub mod hall_engine;
pub mod iquiver;
pub mod linalg_ff;
pub mod repmod;
pub mod scalars;
pub mod verify_qsp;

pub use boundalg::{iquiver_algebra, path_algebra, BoundAlgebra};
pub use config::{CapsConfig, Config};
pub use error::{Error, Result};
pub use iquiver::{IQuiver, RawQuiver};
pub use linalg_ff::{FpMatrix, Subspace};
pub use repmod::{ModuleId, Registry, Rep};
pub use scalars::{LaurentV, QSqrt, Rational};

/// Deterministic RNG used by every randomized search.
pub fn seeded_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
