//! Dark-bright soliton pairs of the 1D defocusing Gross-Pitaevskii system,
//! computed as constrained energy minimizers in lifted variables
//! `u = rho e^{i theta}`, together with the checks that certify them.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod functionals;
pub mod grid;
pub mod rearrange;
pub mod scalar_ref;
pub mod solver;
pub mod state;
pub mod suites;
pub mod surface;
pub mod tws;

pub use error::{Error, Result};
pub use functionals::{EnergyGradient, FunctionalReport};
pub use grid::{Grid, SampledField};
pub use solver::{MinimizeConfig, Multipliers, SolveResult};
pub use state::{ConstraintTargets, PairState};
pub use surface::{PropertyReport, SurfaceSample};
