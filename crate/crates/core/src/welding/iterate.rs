//! The initial approximation and the even/odd alternating iteration.

use super::chain::{Assembly, Transfer};
use crate::elliptic::{perturbation_solve, PerturbationConfig, SolveReport};
use crate::error::{Result, WeldError};
use crate::fields::calculus::curvature_plus;
use crate::fields::norms::{l2_norm, linf_norm, lp_norm};
use crate::fields::AdForm;
use crate::geometry::{norm, radial_cutoff, shell_radii};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Per-block perturbations `a_i` for one gluing parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct WeldedConnection {
    pub a: Vec<AdForm>,
    pub pass: usize,
}

impl WeldedConnection {
    /// `A_i + a_i`.
    pub fn total(&self, asm: &Assembly, i: usize) -> AdForm {
        asm.config.datum(i).background.add(&self.a[i])
    }
}

/// Iteration controls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeldConfig {
    pub solver: PerturbationConfig,
    /// `kappa = kappa_factor * delta_0`.
    pub kappa_factor: f64,
    /// `eta = eta_factor * max_i ||a_i^(0)||_{L^2p}`, floored by `eta_min`.
    pub eta_factor: f64,
    pub eta_min: f64,
    /// Multiple of the background stencil error below which iteration stops.
    pub floor_factor: f64,
    /// Consecutive non-contracting passes treated as a stall.
    pub stall_passes: usize,
    /// Stop once `delta_n` is below the stencil floor. When off, the floor is only recorded.
    pub stop_at_floor: bool,
}

impl Default for WeldConfig {
    fn default() -> Self {
        let mut solver = PerturbationConfig { tol: 1e-12, ..Default::default() };
        solver.linear.damping = 1e-11;
        solver.linear.tol = 1e-13;
        WeldConfig {
            solver,
            kappa_factor: 2.0,
            eta_factor: 4.0,
            eta_min: 1e-3,
            floor_factor: 10.0,
            stall_passes: 3,
            stop_at_floor: true,
        }
    }
}

/// Snapshot of the error field `sigma_i = F^+(A_i + a_i) - F^+(A_i)`.
#[derive(Clone, Debug)]
pub struct ErrorState {
    pub sigma: Vec<AdForm>,
    /// `||sigma_i||_inf` on the resolved points of each block.
    pub block_linf: Vec<f64>,
}

/// Computes `sigma_i` for every block.
pub fn error_state(asm: &Assembly, w: &WeldedConnection) -> Result<ErrorState> {
    let mut sigma = Vec::with_capacity(asm.window());
    let mut block_linf = Vec::with_capacity(asm.window());
    for i in 0..asm.window() {
        let mut s = curvature_plus(&asm.stencil, &w.total(asm, i))?;
        s.axpy(-1.0, &asm.background_plus[i]);
        block_linf.push(linf_norm(&s, Some(&asm.geometry[i].resolved)));
        sigma.push(s);
    }
    Ok(ErrorState { sigma, block_linf })
}

/// `delta` for a parity: sup of `||sigma_i||_inf` over blocks of that parity.
pub fn parity_delta(state: &ErrorState, parity: usize) -> f64 {
    state.block_linf.iter().enumerate().filter(|(i, _)| i % 2 == parity).map(|(_, v)| *v).fold(0.0, f64::max)
}

/// Relative L^2 mass of `sigma` on resolved points outside the outer shells of `parity` blocks.
pub fn support_violation(asm: &Assembly, state: &ErrorState, parity: usize) -> f64 {
    let mut total = 0.0;
    let mut outside = 0.0;
    for (i, s) in state.sigma.iter().enumerate() {
        let g = &asm.geometry[i];
        let all = l2_norm(s, Some(&g.resolved)).powi(2);
        total += all;
        let inside = if i % 2 == parity { l2_norm(s, Some(&g.shell)).powi(2) } else { 0.0 };
        outside += all - inside;
    }
    if total > 0.0 {
        (outside.max(0.0) / total).sqrt()
    } else {
        0.0
    }
}

fn source_cutoff(asm: &Assembly, t: &Transfer, source: [f64; 4]) -> f64 {
    let (r0, r1, _, _) = shell_radii(&asm.config.neck).expect("validated");
    let g = asm.config.datum(t.source_block).chart.grid();
    radial_cutoff(norm(&g.displacement(source, t.source_center)), r0, r1).0
}

/// Initial approximation: on each neck the even side takes the neighbour's
/// connection where the odd cutoff is on, the odd side keeps its own.
pub fn initial_approximation(asm: &Assembly) -> Result<WeldedConnection> {
    let (r0, r1, _, _) = shell_radii(&asm.config.neck)?;
    let grid = asm.stencil.grid;
    let mut a: Vec<AdForm> = (0..asm.window()).map(|_| AdForm::zeros(grid, crate::fields::Degree::One)).collect();
    let mut buf = [0.0; 12];
    for k in 0..asm.config.necks() {
        let (i, _) = asm.config.neck_blocks(k);
        // forward carries i -> j, backward carries j -> i
        let (to_even, to_odd) = if i % 2 == 0 { (&asm.backward[k], &asm.forward[k]) } else { (&asm.forward[k], &asm.backward[k]) };
        let even = to_even.target_block;
        let odd = to_odd.target_block;
        let a_odd = &asm.config.datum(odd).background;
        let a_even = &asm.config.datum(even).background;
        for tp in &to_even.points {
            let psi = source_cutoff(asm, to_even, tp.source);
            if psi == 0.0 {
                continue;
            }
            to_even.pull_one_form(a_odd, tp, 1.0, &mut buf);
            let p = tp.target as usize;
            let own = a_even.at(p).to_vec();
            let dst = a[even].at_mut(p);
            for c in 0..12 {
                dst[c] += psi * (buf[c] - own[c]);
            }
        }
        for tp in &to_odd.points {
            let r = norm(&tp.eta);
            let psi = radial_cutoff(r, r0, r1).0;
            if psi == 1.0 {
                continue;
            }
            to_odd.pull_one_form(a_even, tp, 1.0, &mut buf);
            let p = tp.target as usize;
            let own = a_odd.at(p).to_vec();
            let dst = a[odd].at_mut(p);
            for c in 0..12 {
                dst[c] += (psi - 1.0) * (own[c] - buf[c]);
            }
        }
    }
    Ok(WeldedConnection { a, pass: 0 })
}

/// Result of one half pass.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct HalfPassInfo {
    pub parity: usize,
    pub reports: Vec<(usize, SolveReport)>,
}

/// Solves on every block of `parity`, then applies `a_i += psi_i b_i` and the
/// conjugated pull-backs to the neighbours in a fixed order.
pub fn half_pass(
    asm: &Assembly,
    w: &WeldedConnection,
    state: &ErrorState,
    parity: usize,
    cfg: &PerturbationConfig,
) -> Result<(WeldedConnection, HalfPassInfo)> {
    let active: Vec<usize> = (0..asm.window()).filter(|i| i % 2 == parity).collect();
    let solved = active
        .par_iter()
        .map(|&i| {
            perturbation_solve(
                &asm.stencil,
                &asm.config.datum(i).background,
                &w.a[i],
                &state.sigma[i],
                Some(&asm.geometry[i].resolved),
                cfg,
            )
            .map(|(b, report)| (i, b, report))
            .map_err(|e| WeldError::Precondition(format!("block {i}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut solutions = Vec::new();
    let mut info = HalfPassInfo { parity, reports: Vec::new() };
    for (i, b, report) in solved {
        info.reports.push((i, report));
        solutions.push((i, b));
    }
    let mut next = w.clone();
    next.pass += 1;
    let mut buf = [0.0; 12];
    for (i, b) in &solutions {
        let g = &asm.geometry[*i];
        next.a[*i].axpy(1.0, &g.psi.apply(b));
        for (k, is_source) in asm.necks_of(*i) {
            let t = if is_source { &asm.forward[k] } else { &asm.backward[k] };
            for tp in &t.points {
                let psi = source_cutoff(asm, t, tp.source);
                if psi == 0.0 {
                    continue;
                }
                t.pull_one_form(b, tp, psi, &mut buf);
                let dst = next.a[t.target_block].at_mut(tp.target as usize);
                for c in 0..12 {
                    dst[c] += buf[c];
                }
            }
        }
    }
    Ok((next, info))
}

/// One line of the decay trace.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DecayRecord {
    /// Number of half passes applied.
    pub n: usize,
    /// Parity of the blocks carrying the error at this stage.
    pub parity: usize,
    pub delta: f64,
    /// `delta_n / delta_{n-1}`, absent for the initial record.
    pub ratio: Option<f64>,
    pub support_violation: f64,
    pub block_sigma: Vec<f64>,
    /// `sum_i ||a_i - a_i^(0)||_{L^2p}`.
    pub drift: f64,
    pub max_a_l2p: f64,
    pub solver_iterations: usize,
    pub solver_residual: f64,
}

/// The per-pass records of one run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DecayTrace {
    pub records: Vec<DecayRecord>,
    pub floor: f64,
    pub converged: bool,
}

impl DecayTrace {
    /// One JSON object per line.
    pub fn to_json_lines(&self) -> Result<String> {
        let mut s = String::new();
        for r in &self.records {
            s.push_str(&serde_json::to_string(r)?);
            s.push('\n');
        }
        Ok(s)
    }

    pub fn delta0(&self) -> f64 {
        self.records.first().map_or(0.0, |r| r.delta)
    }

    pub fn last(&self) -> Option<&DecayRecord> {
        self.records.last()
    }
}

/// Stencil error of the backgrounds: max of `|F^+(A_i)|` on the outer shells.
pub fn stencil_floor(asm: &Assembly) -> f64 {
    (0..asm.window())
        .map(|i| linf_norm(&asm.background_plus[i], Some(&asm.geometry[i].shell)))
        .fold(0.0, f64::max)
}

fn record(asm: &Assembly, w: &WeldedConnection, a0: &[AdForm], state: &ErrorState, p: f64) -> DecayRecord {
    let parity = w.pass % 2;
    let drift = w.a.iter().zip(a0).map(|(a, b)| lp_norm(&a.sub(b), 2.0 * p, None)).sum();
    let max_a = w.a.iter().map(|a| lp_norm(a, 2.0 * p, None)).fold(0.0, f64::max);
    DecayRecord {
        n: w.pass,
        parity,
        delta: parity_delta(state, parity),
        ratio: None,
        support_violation: support_violation(asm, state, parity),
        block_sigma: state.block_linf.clone(),
        drift,
        max_a_l2p: max_a,
        solver_iterations: 0,
        solver_residual: 0.0,
    }
}

/// Runs half passes of alternating parity until `delta_n <= target delta_0`
/// (or below the floor when `stop_at_floor` is set) or `max_passes` is reached.
pub fn alternate(asm: &Assembly, max_passes: usize, target: f64, cfg: &WeldConfig) -> Result<(WeldedConnection, DecayTrace)> {
    let mut w = initial_approximation(asm)?;
    let a0 = w.a.clone();
    let mut state = error_state(asm, &w)?;
    let p = cfg.solver.p;
    let mut trace = DecayTrace { floor: cfg.floor_factor * stencil_floor(asm), ..Default::default() };
    let first = record(asm, &w, &a0, &state, p);
    let delta0 = first.delta;
    let kappa = cfg.kappa_factor * delta0.max(f64::MIN_POSITIVE);
    let eta = (cfg.eta_factor * first.max_a_l2p).max(cfg.eta_min);
    trace.records.push(first);
    let mut solver = cfg.solver;
    solver.kappa = kappa;
    solver.eta = eta;
    let stop = if cfg.stop_at_floor { (target * delta0).max(trace.floor) } else { target * delta0 };
    let mut stalls = 0;
    while w.pass < max_passes {
        let delta = trace.last().unwrap().delta;
        if delta <= stop {
            trace.converged = true;
            break;
        }
        let parity = w.pass % 2;
        let (next, info) = half_pass(asm, &w, &state, parity, &solver)?;
        w = next;
        state = error_state(asm, &w)?;
        let mut r = record(asm, &w, &a0, &state, p);
        r.ratio = Some(r.delta / delta);
        r.solver_iterations = info.reports.iter().map(|(_, s)| s.iterations).sum();
        r.solver_residual = info.reports.iter().map(|(_, s)| s.residual).fold(0.0, f64::max);
        if r.ratio.unwrap() >= 1.0 {
            stalls += 1;
        } else {
            stalls = 0;
        }
        trace.records.push(r);
        if stalls >= cfg.stall_passes {
            return Err(WeldError::Stall {
                passes: w.pass,
                deltas: trace.records.iter().map(|r| r.delta).collect(),
            });
        }
    }
    if trace.last().unwrap().delta <= stop {
        trace.converged = true;
    }
    Ok((w, trace))
}

/// A finished weld with everything needed to inspect it.
#[derive(Clone, Debug)]
pub struct WeldRun {
    pub assembly: Assembly,
    pub connection: WeldedConnection,
    pub trace: DecayTrace,
}

/// Assembles the chain for `rho` and runs [`alternate`].
pub fn weld(
    config: super::chain::ChainConfig,
    rho: super::chain::GluingParameter,
    max_passes: usize,
    target: f64,
    cfg: &WeldConfig,
) -> Result<WeldRun> {
    let assembly = Assembly::new(config, rho)?;
    let (connection, trace) = alternate(&assembly, max_passes, target, cfg)?;
    Ok(WeldRun { assembly, connection, trace })
}
