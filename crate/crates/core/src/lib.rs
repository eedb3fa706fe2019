//! Desk-scale laboratory for doubly composite Chernoff-Stein problems.
//!
//! The crate covers finite-alphabet probability objects ([`alphabet`]),
//! the method of types ([`types`]), scalar divergences and their LP and
//! Frank-Wolfe backed variants ([`divergences`]), hypothesis families at
//! every block length ([`families`]) and the operational testing quantities
//! built on top of them ([`stein`]).
//!
//! All log-valued outputs use the base selected in [`units`].

pub mod alphabet;
pub mod divergences;
pub mod error;
pub mod families;
pub mod lp;
pub mod stein;
pub mod types;
pub mod units;
pub mod werner;

pub use alphabet::{Alphabet, Distribution, JointDistribution, ProbabilityVector, StochasticChannel};

pub use error::{Error, Result};

pub use divergences::{DivergenceReport, Polytope, SolverStatus};
pub use families::{FamilySpec, GeneratedSet};
pub use types::TypeVector;
