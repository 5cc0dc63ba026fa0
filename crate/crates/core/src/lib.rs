//! Symmetry-guided gradient descent for parameterized quantum circuits.
//!
//! The crate simulates small circuits with dense matrices and trains them
//! with costs shaped by a symmetry group: either a penalty on the distance
//! between the conjugated observable `U†OU` and its group twirl, or by
//! measuring the twirled observable directly.
//!
//! ```
//! use sggd::circuits::{conjugated_observable, werner_ansatz};
//! use sggd::linalg::gates::swap;
//! use sggd::symmetry::{sce_residual, SymmetryGroup};
//!
//! let group = SymmetryGroup::local_unitary_pair(2).unwrap();
//! let obs = conjugated_observable(&werner_ansatz(), &[0.0], &swap()).unwrap();
//! let g = sce_residual(&group, &obs).unwrap().penalty;
//! assert!((g - 3.0).abs() < 1e-9);
//! ```

pub mod circuits;
pub mod cli;
pub mod config;
pub mod cost;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod random;
pub mod run;
pub mod states;
pub mod symmetry;
pub mod train;

pub use error::{Result, SggdError};
pub use linalg::{Operator, C64};
