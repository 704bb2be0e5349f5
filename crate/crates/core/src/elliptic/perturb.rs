//! The perturbation equation `D_A b + [a ∧ b]^+ + (b ∧ b)^+ = -sigma`.

use super::operator::{linear_solve, GaugePair, LinearSolverConfig, LinearizedOperator};
use crate::error::{Result, WeldError};
use crate::fields::calculus::{quadratic_plus, Stencil};
use crate::fields::form::{AdForm, Degree};
use crate::fields::norms::{l2_norm, linf_norm, lp1_norm, lp_norm};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Controls for [`perturbation_solve`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationConfig {
    pub linear: LinearSolverConfig,
    /// Relative tolerance on the full nonlinear residual.
    pub tol: f64,
    /// Absolute floor for the residual scale.
    pub floor: f64,
    pub max_picard: usize,
    /// Sobolev exponent `p`.
    pub p: f64,
    /// Bound on `||a||_{L^{2p}}`.
    pub eta: f64,
    /// Bound on `||sigma||_{L^inf}`.
    pub kappa: f64,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        PerturbationConfig {
            linear: LinearSolverConfig::default(),
            tol: 1e-9,
            floor: 1e-14,
            max_picard: 40,
            p: 8.0,
            eta: f64::INFINITY,
            kappa: f64::INFINITY,
        }
    }
}

/// Outcome of one perturbation solve.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Relative residual of the full nonlinear equation on the kept rows.
    pub residual: f64,
    /// Total inner iterations.
    pub iterations: usize,
    pub picard_iterations: usize,
    pub norms: BTreeMap<String, f64>,
    pub measured_constants: BTreeMap<String, f64>,
}

/// Full residual `D_A b + [a ∧ b]^+ + (b ∧ b)^+ + sigma` on the kept rows.
pub fn nonlinear_residual(op: &LinearizedOperator, b: &AdForm, sigma: &AdForm) -> Result<GaugePair> {
    let mut r = op.apply(b);
    let mut extra = quadratic_plus(b)?;
    extra.axpy(1.0, sigma);
    let mut add = GaugePair::from_plus(&extra)?;
    add = add.masked(op.rows);
    r.axpy(1.0, &add);
    Ok(r)
}

/// Solves the perturbation equation by Picard iteration on the quadratic term.
///
/// `rows` restricts the equation to a subset of grid points.
pub fn perturbation_solve(
    st: &Stencil,
    background: &AdForm,
    ambient: &AdForm,
    sigma: &AdForm,
    rows: Option<&[bool]>,
    cfg: &PerturbationConfig,
) -> Result<(AdForm, SolveReport)> {
    sigma.expect_degree(Degree::SelfDual)?;
    let a_norm = lp_norm(ambient, 2.0 * cfg.p, None);
    if a_norm > cfg.eta {
        return Err(WeldError::Hypothesis(format!("eta: ||a||_L2p = {a_norm:.4e} exceeds {:.4e}", cfg.eta)));
    }
    let s_inf = linf_norm(sigma, rows);
    if s_inf > cfg.kappa {
        return Err(WeldError::Hypothesis(format!("kappa: ||sigma||_inf = {s_inf:.4e} exceeds {:.4e}", cfg.kappa)));
    }
    let op = LinearizedOperator::new(st, background, ambient, rows, cfg.linear)?;
    let s_masked = GaugePair::from_plus(sigma)?.masked(rows);
    let scale = s_masked.norm().max(cfg.floor);
    let mut b = AdForm::zeros(background.grid, Degree::One);
    let mut report = SolveReport::default();
    if s_masked.norm() == 0.0 {
        fill_norms(&mut report, st, background, ambient, &b, sigma, rows, cfg.p)?;
        return Ok((b, report));
    }
    let mut last = f64::INFINITY;
    let mut growth = 0;
    for step in 0..cfg.max_picard {
        let q = quadratic_plus(&b)?;
        let mut rhs = sigma.clone();
        rhs.axpy(1.0, &q);
        let rhs = GaugePair::from_plus(&rhs.scaled(-1.0))?;
        let (nb, stats) = linear_solve(&op, &rhs, if step == 0 { None } else { Some(&b) })?;
        b = nb;
        report.iterations += stats.iterations;
        report.picard_iterations = step + 1;
        let res = nonlinear_residual(&op, &b, sigma)?.norm() / scale;
        report.residual = res;
        if res <= cfg.tol {
            break;
        }
        if !res.is_finite() || res > 1e3 {
            return Err(WeldError::Divergence { step, residual: res });
        }
        if res > last {
            growth += 1;
            if growth >= 3 {
                return Err(WeldError::Divergence { step, residual: res });
            }
        } else if res > 0.9 * last {
            // least-squares fixed point reached; the remaining residual is outside the range
            report.measured_constants.insert("stagnated".into(), 1.0);
            break;
        }
        last = res;
    }
    fill_norms(&mut report, st, background, ambient, &b, sigma, rows, cfg.p)?;
    Ok((b, report))
}

#[allow(clippy::too_many_arguments)]
fn fill_norms(
    report: &mut SolveReport,
    st: &Stencil,
    background: &AdForm,
    ambient: &AdForm,
    b: &AdForm,
    sigma: &AdForm,
    rows: Option<&[bool]>,
    p: f64,
) -> Result<()> {
    let total = background.add(ambient);
    let b_lp1 = lp1_norm(st, &total, b, p, None)?;
    let s_lp = lp_norm(sigma, p, rows);
    let n = &mut report.norms;
    n.insert("b_L2p".into(), lp_norm(b, 2.0 * p, None));
    n.insert("b_Lp1".into(), b_lp1);
    n.insert("b_L2".into(), l2_norm(b, None));
    n.insert("b_Linf".into(), linf_norm(b, None));
    n.insert("sigma_Lp".into(), s_lp);
    n.insert("sigma_Linf".into(), linf_norm(sigma, rows));
    n.insert("a_L2p".into(), lp_norm(ambient, 2.0 * p, None));
    if s_lp > 0.0 {
        report.measured_constants.insert("b_Lp1_over_sigma_Lp".into(), b_lp1 / s_lp);
    }
    Ok(())
}
