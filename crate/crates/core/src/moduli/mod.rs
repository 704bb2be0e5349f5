//! Probes of the family of welded connections as the gluing parameter varies.

pub mod fingerprint;
pub mod path;
pub mod probes;
pub mod recurrence;

pub use fingerprint::{fingerprint, loop_holonomy, Fingerprint, LOOP_STEPS, PROFILE_BINS};
pub use path::{chordal, geodesic_path, separation, ParameterPath};
pub use probes::{
    center_equivalence, central_gauge_chain, compare_center, gauge_distinguish, lipschitz_probe, noise_floor,
    perturbation_gap, CenterReport, LipschitzReport, PathDerivative, ProbeConfig,
};
pub use recurrence::{
    proof_checkpoint, proof_series, recurrence_fuzz, recurrence_verify, FuzzReport, RecurrenceMode, RecurrenceReport,
    RecurrenceState, MAX_STEPS,
};
