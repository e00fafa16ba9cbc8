//! Type-A fusion categories at roots of unity: Wenzl truncations, unitarized braidings,
//! the dual weak quasi-Hopf groupoid and numerical verification suites.

pub mod braiding;
pub mod error;
pub mod groupoid;
pub mod haar;
pub mod hecke;
pub mod linalg;
pub mod report;
pub mod scalars;
pub mod suite;
pub mod uqrep;
pub mod weights;
pub mod wenzl;

pub use error::{FusionError, Result};
pub use scalars::QContext;
pub use weights::Weight;
