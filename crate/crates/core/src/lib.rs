//! Fractional (Riesz–Feller) regularizations of scalar conservation laws:
//! discrete operators, the stable-law semigroup kernel, viscous solvers,
//! inviscid entropy references, traveling waves and the experiment harness.

// `!(x > 0.0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod entropy_reference;
pub mod error;
pub mod experiments;
pub mod flux;
pub mod fractional_ops;
pub mod grid;
pub mod io;
pub mod mittag_leffler;
pub mod par;
pub mod semigroup_kernel;
pub mod special;
pub mod traveling_wave;
pub mod viscous_evolution;

pub use error::{FracError, Result};
pub use flux::{EntropyPair, FluxFn};
pub use fractional_ops::{Alpha, FracParams};
pub use grid::{Boundary, Field, GridSpec};
pub use par::Execution;
