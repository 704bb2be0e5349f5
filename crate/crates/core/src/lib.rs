//! Gluing anti-self-dual SU(2) connections along chains of blocks by the alternating method.
//!
//! Each block is a flat 4-torus chart carrying a background connection and two
//! marked points. Neighbouring blocks are joined through a conformal neck, and
//! the welded connection is built by solving the linearized self-duality
//! equation alternately on even and odd blocks.
//!
//! * [`geometry`]: charts, neck parameters, shells, the neck map and cutoffs.
//! * [`fields`]: connections, forms, curvature and gauge transformations.
//! * [`elliptic`]: the linearized operator and the perturbation solve.
//! * [`welding`]: chains, the initial approximation and the alternating iteration.
//! * [`moduli`]: the decay recurrence and probes of the resulting family.
//! * [`cli`]: scenario files and the `weld` command line.

pub mod cli;
pub mod elliptic;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod moduli;
pub mod welding;

#[cfg(doctest)]
pub mod book;

pub use error::{Result, WeldError};
