//! The new error term left by a cut-off solution, and measured estimate ratios.

use crate::error::{Result, WeldError};
use crate::fields::calculus::{cov_d_plus, curvature, curvature_plus, quadratic_plus, Stencil};
use crate::fields::form::{sd_from_two, AdForm, Degree, Grid, PAIRS};
use crate::fields::norms::{l2_norm, linf_norm, lp1_norm, lp_norm, Region};
use crate::geometry::{cutoff_at, k_n, norm, NeckParams, Vec4};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A sampled cutoff `psi` with its analytic gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct CutoffField {
    pub grid: Grid,
    pub psi: Vec<f64>,
    pub grad: Vec<Vec4>,
}

impl CutoffField {
    pub fn ones(grid: Grid) -> Self {
        CutoffField { grid, psi: vec![1.0; grid.points()], grad: vec![[0.0; 4]; grid.points()] }
    }

    /// Product of the radial cutoffs about each centre.
    pub fn around(grid: Grid, centers: &[Vec4], neck: &NeckParams) -> Result<Self> {
        let mut f = Self::ones(grid);
        for p in 0..grid.points() {
            let x = grid.coords(p);
            let mut psi = 1.0;
            let mut grad = [0.0; 4];
            for c in centers {
                let (v, g) = cutoff_at(grid.displacement(x, *c), neck)?;
                for mu in 0..4 {
                    grad[mu] = grad[mu] * v + psi * g[mu];
                }
                psi *= v;
            }
            f.psi[p] = psi;
            f.grad[p] = grad;
        }
        Ok(f)
    }

    /// `psi * f` pointwise.
    pub fn apply(&self, f: &AdForm) -> AdForm {
        f.weighted(&self.psi)
    }

    /// Points where `psi < 1`.
    pub fn transition(&self) -> Vec<bool> {
        self.psi.iter().map(|&v| v < 1.0).collect()
    }

    pub fn max_gradient(&self) -> f64 {
        self.grad.iter().map(norm).fold(0.0, f64::max)
    }
}

/// `(d psi ∧ b)^+` with the analytic gradient of `psi`.
pub fn dpsi_wedge_plus(psi: &CutoffField, b: &AdForm) -> Result<AdForm> {
    b.expect_degree(Degree::One)?;
    let mut out = AdForm::zeros(b.grid, Degree::SelfDual);
    for p in 0..b.grid.points() {
        let g = psi.grad[p];
        if g == [0.0; 4] {
            continue;
        }
        let x = b.at(p);
        let mut full = [0.0; 18];
        for (k, &(m, n)) in PAIRS.iter().enumerate() {
            for c in 0..3 {
                full[3 * k + c] = g[m] * x[3 * n + c] - g[n] * x[3 * m + c];
            }
        }
        sd_from_two(&full, out.at_mut(p));
    }
    Ok(out)
}

/// Closed-form new error together with its direct recomputation.
#[derive(Clone, Debug)]
pub struct NewError {
    /// `(d psi ∧ b)^+ + psi (psi - 1) (b ∧ b)^+`.
    pub tau: AdForm,
    /// `F^+(A + a + psi b) - F^+(A + a) - psi (d_{A+a}^+ b + (b ∧ b)^+)`.
    pub direct: AdForm,
    /// Max pointwise difference of the two.
    pub discrepancy: f64,
    /// Max of `|tau|` at points where `d psi = 0`, relative to `||tau||_inf`.
    pub support_violation: f64,
}

/// New error term after replacing `b` by `psi b`.
///
/// `connection` is `A + a`. Rejects inputs where `sigma` does not vanish where `psi < 1`.
pub fn new_error(st: &Stencil, connection: &AdForm, psi: &CutoffField, b: &AdForm, sigma: &AdForm, tol: f64) -> Result<NewError> {
    let s_inf = linf_norm(sigma, None);
    let overlap = psi
        .psi
        .iter()
        .enumerate()
        .filter(|(_, &v)| v < 1.0)
        .map(|(p, _)| sigma.point_norm(p))
        .fold(0.0, f64::max);
    if overlap > tol * s_inf.max(f64::MIN_POSITIVE) && overlap > 0.0 {
        return Err(WeldError::Precondition(format!(
            "sigma reaches the cutoff region ({overlap:.3e} vs sup {s_inf:.3e})"
        )));
    }
    let q = quadratic_plus(b)?;
    let mut tau = dpsi_wedge_plus(psi, b)?;
    let w: Vec<f64> = psi.psi.iter().map(|v| v * (v - 1.0)).collect();
    tau.axpy(1.0, &q.weighted(&w));

    let cut = psi.apply(b);
    let mut direct = curvature_plus(st, &connection.add(&cut))?;
    direct.axpy(-1.0, &curvature_plus(st, connection)?);
    let mut lin = cov_d_plus(st, connection, b)?;
    lin.axpy(1.0, &q);
    direct.axpy(-1.0, &psi.apply(&lin));

    let discrepancy = linf_norm(&tau.sub(&direct), None);
    let t_inf = linf_norm(&tau, None);
    let outside = (0..b.grid.points())
        .filter(|&p| psi.grad[p] == [0.0; 4])
        .map(|p| tau.point_norm(p))
        .fold(0.0, f64::max);
    let support_violation = if t_inf > 0.0 { outside / t_inf } else { 0.0 };
    Ok(NewError { tau, direct, discrepancy, support_violation })
}

/// Measured counterparts of the analytic estimates for one solve.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub delta: f64,
    pub tau_linf: f64,
    pub k_n: f64,
    pub values: BTreeMap<String, f64>,
}

/// Inputs for [`estimate_report`].
pub struct EstimateContext<'a> {
    pub stencil: &'a Stencil,
    pub neck: &'a NeckParams,
    pub p: f64,
    /// `A + a` before the update.
    pub connection: &'a AdForm,
    pub sigma: &'a AdForm,
    pub b: &'a AdForm,
    pub psi: &'a CutoffField,
    pub tau: &'a AdForm,
    /// Region standing in for `U` in the curvature comparison.
    pub region: Region<'a>,
    /// Optional neighbouring solve `(dt, b(t + dt), sigma(t + dt))` for path derivatives.
    pub path: Option<(f64, &'a AdForm, &'a AdForm)>,
}

/// Ratios of measured norms to the analytic bounds' scalings.
pub fn estimate_report(ctx: &EstimateContext) -> Result<EstimateReport> {
    let lam = ctx.neck.lambda;
    let n = ctx.neck.n;
    let p = ctx.p;
    let delta = linf_norm(ctx.sigma, ctx.region);
    let kn = k_n(n);
    let tau_linf = linf_norm(ctx.tau, None);
    let mut values = BTreeMap::new();
    if delta > 0.0 {
        let b2p = lp_norm(ctx.b, 2.0 * p, None);
        values.insert("C1".into(), b2p / (lam.powf((p + 2.0) / (2.0 * p)) * delta));
        values.insert("C2".into(), tau_linf / (kn * n.powi(4) * delta));
        let cut = ctx.psi.apply(ctx.b);
        let new = ctx.connection.add(&cut);
        values.insert("C3".into(), lp1_norm(ctx.stencil, &new, &cut, p, None)? / (lam.powf(2.0 / p) * delta));
        let df = curvature(ctx.stencil, &new)?.sub(&curvature(ctx.stencil, ctx.connection)?);
        values.insert("C4".into(), l2_norm(&df, ctx.region) / (lam * delta));
        if let Some((dt, b2, s2)) = ctx.path {
            let ds = linf_norm(&s2.sub(ctx.sigma), ctx.region) / dt;
            if ds > 0.0 {
                let db = lp_norm(&b2.sub(ctx.b), 2.0 * p, None) / dt;
                values.insert("C5".into(), db / (lam.powf((p + 2.0) / (2.0 * p)) * ds));
            }
        }
    }
    Ok(EstimateReport { delta, tau_linf, k_n: kn, values })
}
