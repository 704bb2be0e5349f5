//! Chains of blocks glued through necks, and the alternating method that
//! removes the self-dual curvature block by block.

pub mod chain;
pub mod iterate;
pub mod ledger;

pub use chain::{Assembly, BlockGeometry, BlockKind, ChainConfig, GluingDatum, GluingParameter, Transfer};
pub use iterate::{
    alternate, error_state, half_pass, initial_approximation, support_violation, DecayRecord, DecayTrace,
    ErrorState, WeldConfig, WeldRun, WeldedConnection, weld,
};
pub use ledger::{asd_residual, compatibility_check, energy_ledger, CompatibilityReport, EnergyLedger};
