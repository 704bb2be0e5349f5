//! Connections, forms and the covariant calculus on a lattice chart.
//!
//! A connection is a background `A` plus a perturbation `a`. Everything acts on
//! ad(P)-valued forms stored as [`AdForm`] on a periodic [`Grid`].

pub mod algebra;
pub mod bpst;
pub mod calculus;
pub mod dump;
pub mod form;
pub mod gauge;
pub mod norms;

pub use algebra::{AlgElement, GroupElement};
pub use bpst::{bpst_background, Bpst, BpstGauge, Window};
pub use calculus::{
    bianchi_residual, bracket_wedge, cov_d, cov_d_plus, cov_d_star, curvature, curvature_plus, hodge_star, quadratic_plus,
    sd_project, Stencil,
};
pub use dump::{read_dump, write_dump, DumpHeader};
pub use form::{AdForm, Degree, Grid};
pub use gauge::{apply_gauge, exponential_gauge, GaugeBall, GaugeField};
pub use norms::{energy, instanton_charge, l2_norm, linf_norm, lp1_norm, lp_norm};

use crate::error::Result;

/// A connection `A + a` on one chart.
#[derive(Clone, Debug, PartialEq)]
pub struct Connection {
    pub background: AdForm,
    pub perturbation: AdForm,
}

impl Connection {
    pub fn new(background: AdForm) -> Self {
        let perturbation = AdForm::zeros(background.grid, Degree::One);
        Connection { background, perturbation }
    }

    pub fn grid(&self) -> Grid {
        self.background.grid
    }

    pub fn total(&self) -> AdForm {
        self.background.add(&self.perturbation)
    }

    /// Applies `g`: the background transforms affinely, the perturbation by `Ad_g`.
    pub fn gauge_transform(&self, st: &Stencil, g: &GaugeField) -> Result<Connection> {
        Ok(Connection {
            background: apply_gauge(st, g, &self.background)?,
            perturbation: gauge::adjoint_action(g, &self.perturbation),
        })
    }
}
