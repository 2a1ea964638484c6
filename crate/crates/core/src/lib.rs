//! Condenser capacities, circular inversion and Wiener-type tests for the
//! regularity of the point at infinity for p-Laplace type equations.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod error;
pub mod families;
pub mod inversion;
pub mod model;
pub mod pde;
pub mod wiener;

pub use error::{Error, Result};
pub use model::*;
pub use families::Family;
pub use wiener::{classify_infinity, CapacityBackend, Classification, CriterionVariant, DomainSpec, Regularity, Verdict, WienerReport};
