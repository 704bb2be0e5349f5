//! Lipschitz dependence on the gluing parameter and central-twist equivalence.

use super::fingerprint::{fingerprint, Fingerprint};
use super::path::{geodesic_path, separation};
use crate::error::{Result, WeldError};
use crate::fields::norms::{linf_norm, lp_norm};
use crate::fields::GroupElement;
use crate::welding::{error_state, initial_approximation, weld, Assembly, ChainConfig, GluingParameter, WeldConfig, WeldRun};
use serde::{Deserialize, Serialize};

/// How each weld inside a probe is run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub weld: WeldConfig,
    pub max_passes: usize,
    pub target: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { weld: WeldConfig { stop_at_floor: false, ..Default::default() }, max_passes: 30, target: 1e-6 }
    }
}

fn run(config: &ChainConfig, rho: &GluingParameter, probe: &ProbeConfig) -> Result<WeldRun> {
    weld(config.clone(), rho.clone(), probe.max_passes, probe.target, &probe.weld)
}

/// `sup_i ||a_i - a'_i||_{L^2p}` and the per-block values.
pub fn perturbation_gap(a: &WeldRun, b: &WeldRun, p: f64) -> Result<(f64, Vec<f64>)> {
    if a.connection.a.len() != b.connection.a.len() {
        return Err(WeldError::Precondition("welds over different windows".into()));
    }
    let per: Vec<f64> =
        a.connection.a.iter().zip(&b.connection.a).map(|(x, y)| lp_norm(&x.sub(y), 2.0 * p, None)).collect();
    Ok((per.iter().copied().fold(0.0, f64::max), per))
}

/// One interval of the finite-difference derivative trace along the geodesic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathDerivative {
    pub t0: f64,
    pub t1: f64,
    /// `sup_i ||d a_i / dt||_{L^2p} / K` of the terminal perturbations.
    pub alpha_over_k: f64,
    /// `sup_i ||d a_i^(0) / dt||_{L^2p} / K`.
    pub alpha0_over_k: f64,
    /// `sup_{i even} ||d sigma_i^(0) / dt||_inf / K`.
    pub s0_over_k: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    #[serde(rename = "K")]
    pub k: f64,
    pub lambda: f64,
    pub p: f64,
    pub per_block: Vec<f64>,
    pub max_gap: f64,
    /// `max_gap / K`.
    pub ratio: f64,
    /// `ratio / lambda^((2 + p) / 2p)`.
    pub scaled_ratio: f64,
    pub derivatives: Vec<PathDerivative>,
    /// Set when a weld along the path did not reach its target.
    pub partial: bool,
}

/// Compares the welds at `rho` and `rho2`, and optionally at `samples` interior
/// points of the geodesic between them.
pub fn lipschitz_probe(
    config: &ChainConfig,
    rho: &GluingParameter,
    rho2: &GluingParameter,
    samples: usize,
    probe: &ProbeConfig,
) -> Result<LipschitzReport> {
    let k = separation(rho, rho2)?;
    let p = probe.weld.solver.p;
    let lambda = config.neck.lambda;
    let path = geodesic_path(rho, rho2)?;
    let ts: Vec<f64> = (0..samples + 2).map(|j| j as f64 / (samples + 1) as f64).collect();
    let mut runs = Vec::with_capacity(ts.len());
    let mut partial = false;
    for (j, &t) in ts.iter().enumerate() {
        // the endpoints are taken verbatim so that the probe is symmetric
        let r = if j == 0 { rho.clone() } else if j + 1 == ts.len() { rho2.clone() } else { path.at(t) };
        let run = run(config, &r, probe)?;
        partial |= !run.trace.converged;
        runs.push(run);
    }
    let (max_gap, per_block) = perturbation_gap(&runs[0], &runs[runs.len() - 1], p)?;
    let mut derivatives = Vec::new();
    if samples > 0 && k > 0.0 {
        let initial: Vec<_> = runs
            .iter()
            .map(|r| {
                let w = initial_approximation(&r.assembly)?;
                let s = error_state(&r.assembly, &w)?;
                Ok((w, s))
            })
            .collect::<Result<_>>()?;
        for j in 0..runs.len() - 1 {
            let dt = ts[j + 1] - ts[j];
            let (alpha, _) = perturbation_gap(&runs[j], &runs[j + 1], p)?;
            let (w0, s0) = (&initial[j], &initial[j + 1]);
            let alpha0 =
                w0.0.a.iter().zip(&s0.0.a).map(|(x, y)| lp_norm(&x.sub(y), 2.0 * p, None)).fold(0.0, f64::max);
            let sig = (0..runs[j].assembly.window())
                .filter(|i| i % 2 == 0)
                .map(|i| linf_norm(&w0.1.sigma[i].sub(&s0.1.sigma[i]), Some(&runs[j].assembly.geometry[i].resolved)))
                .fold(0.0, f64::max);
            derivatives.push(PathDerivative {
                t0: ts[j],
                t1: ts[j + 1],
                alpha_over_k: alpha / dt / k,
                alpha0_over_k: alpha0 / dt / k,
                s0_over_k: sig / dt / k,
            });
        }
    }
    let ratio = if k > 0.0 { max_gap / k } else { 0.0 };
    Ok(LipschitzReport {
        k,
        lambda,
        p,
        per_block,
        max_gap,
        ratio,
        scaled_ratio: ratio / lambda.powf((2.0 + p) / (2.0 * p)),
        derivatives,
        partial,
    })
}

/// Central gauge chain `gamma_0 = 1`, `gamma_{i+1} = eps_i gamma_i`.
pub fn central_gauge_chain(flips: &[bool]) -> Vec<GroupElement> {
    let mut out = vec![GroupElement::IDENTITY];
    for &f in flips {
        let last = *out.last().unwrap();
        out.push(if f { last.neg() } else { last });
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterReport {
    /// One central element per block of the window.
    pub gamma: Vec<GroupElement>,
    /// Whether the chain closes up around a periodic window.
    pub closes: bool,
    /// `a_i(rho) == a_i(eps rho)` bit for bit.
    pub identical: bool,
    /// Largest pointwise difference of `|F|^2` densities.
    pub max_density_diff: f64,
    pub fingerprint_distance: f64,
}

/// Welds at `rho` and at the centrally twisted `eps rho` and compares them.
pub fn center_equivalence(
    config: &ChainConfig,
    rho: &GluingParameter,
    flips: &[bool],
    probe: &ProbeConfig,
) -> Result<(CenterReport, WeldRun, WeldRun)> {
    if flips.len() != config.necks() {
        return Err(WeldError::Precondition(format!("{} signs for {} necks", flips.len(), config.necks())));
    }
    let a = run(config, rho, probe)?;
    let b = run(config, &rho.center_action(flips), probe)?;
    let report = compare_center(flips, &a, &b)?;
    Ok((report, a, b))
}

/// Compares a weld with the weld of its central twist by `flips`.
pub fn compare_center(flips: &[bool], a: &WeldRun, b: &WeldRun) -> Result<CenterReport> {
    let config = &a.assembly.config;
    if flips.len() != config.necks() {
        return Err(WeldError::Precondition(format!("{} signs for {} necks", flips.len(), config.necks())));
    }
    let chain = central_gauge_chain(flips);
    let w = config.window();
    let closes = !config.periodic || chain[w] == chain[0];
    let identical = a
        .connection
        .a
        .iter()
        .zip(&b.connection.a)
        .all(|(x, y)| x.data.iter().zip(&y.data).all(|(u, v)| u.to_bits() == v.to_bits()));
    let mut max_density_diff: f64 = 0.0;
    for i in 0..w {
        let da = crate::fields::norms::energy_density(&a.assembly.stencil, &a.connection.total(&a.assembly, i))?;
        let db = crate::fields::norms::energy_density(&b.assembly.stencil, &b.connection.total(&b.assembly, i))?;
        max_density_diff = da.iter().zip(&db).map(|(x, y)| (x - y).abs()).fold(max_density_diff, f64::max);
    }
    let fingerprint_distance = gauge_distinguish(&a.assembly, &a.connection, &b.assembly, &b.connection)?;
    Ok(CenterReport { gamma: chain[..w].to_vec(), closes, identical, max_density_diff, fingerprint_distance })
}

fn same_chain(a: &Assembly, b: &Assembly) -> bool {
    a.window() == b.window()
        && a.stencil.grid == b.stencil.grid
        && (0..a.window()).all(|i| a.config.datum(i).label == b.config.datum(i).label)
}

/// Fingerprint distance between two welds of the same chain.
pub fn gauge_distinguish(
    a: &Assembly,
    wa: &crate::welding::WeldedConnection,
    b: &Assembly,
    wb: &crate::welding::WeldedConnection,
) -> Result<f64> {
    if !same_chain(a, b) {
        return Err(WeldError::Precondition("fingerprints compare welds of one chain only".into()));
    }
    fingerprint(a, wa)?.distance(&fingerprint(b, wb)?)
}

/// Noise floor of the fingerprint: the largest center-pair distance, but never
/// below the roundoff level of the fingerprint entries.
pub fn noise_floor(center_distances: &[f64], reference: &Fingerprint) -> f64 {
    let observed = center_distances.iter().copied().fold(0.0, f64::max);
    let roundoff = 64.0 * f64::EPSILON * reference.scale().max(1.0);
    observed.max(roundoff)
}
