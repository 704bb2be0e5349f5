//! The linearized self-duality operator, its regularized inverse, and the
//! perturbation equation solved on each block.

pub mod estimates;
pub mod operator;
pub mod perturb;

pub use crate::geometry::k_n;
pub use estimates::{estimate_report, new_error, CutoffField, EstimateContext, EstimateReport, NewError};
pub use operator::{linear_solve, GaugePair, LinearSolverConfig, LinearStats, LinearizedOperator};
pub use perturb::{nonlinear_residual, perturbation_solve, PerturbationConfig, SolveReport};
