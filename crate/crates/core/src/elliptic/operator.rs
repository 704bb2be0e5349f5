//! The linearized operator `b -> (d_A^* b, d_A^+ b + [a ∧ b]^+)` and its least-squares inverse.

use crate::error::{Result, WeldError};
use crate::fields::algebra::bracket_acc;
use crate::fields::calculus::Stencil;
use crate::fields::form::{sd_from_two, two_from_sd, AdForm, Degree, Grid, PAIRS};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// An element of `Omega^0 ⊕ Omega^+`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugePair {
    pub zero: AdForm,
    pub plus: AdForm,
}

impl GaugePair {
    pub fn zeros(grid: Grid) -> Self {
        GaugePair { zero: AdForm::zeros(grid, Degree::Zero), plus: AdForm::zeros(grid, Degree::SelfDual) }
    }

    /// The pair `(0, s)`.
    pub fn from_plus(s: &AdForm) -> Result<Self> {
        s.expect_degree(Degree::SelfDual)?;
        Ok(GaugePair { zero: AdForm::zeros(s.grid, Degree::Zero), plus: s.clone() })
    }

    pub fn dot(&self, o: &Self) -> f64 {
        self.zero.dot(&o.zero) + self.plus.dot(&o.plus)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn axpy(&mut self, s: f64, o: &Self) {
        self.zero.axpy(s, &o.zero);
        self.plus.axpy(s, &o.plus);
    }

    pub fn scaled(&self, s: f64) -> Self {
        GaugePair { zero: self.zero.scaled(s), plus: self.plus.scaled(s) }
    }

    pub fn masked(&self, rows: Option<&[bool]>) -> Self {
        let Some(m) = rows else { return self.clone() };
        let w: Vec<f64> = m.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        GaugePair { zero: self.zero.weighted(&w), plus: self.plus.weighted(&w) }
    }
}

/// Solver controls for [`linear_solve`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearSolverConfig {
    /// Damping relative to the spectral scale `h^{-2}`.
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LinearSolverConfig {
    fn default() -> Self {
        LinearSolverConfig { damping: 1e-8, tol: 1e-10, max_iter: 5000 }
    }
}

/// `D_A + [a ∧ .]^+` about a reference connection `A` with ambient perturbation `a`.
///
/// Rows outside `rows` are dropped from the least-squares problem.
pub struct LinearizedOperator<'a> {
    pub stencil: &'a Stencil,
    pub background: &'a AdForm,
    /// `A + a`, used by the bracket in the self-dual row.
    total: AdForm,
    pub rows: Option<&'a [bool]>,
    pub config: LinearSolverConfig,
}

impl<'a> LinearizedOperator<'a> {
    pub fn new(
        stencil: &'a Stencil,
        background: &'a AdForm,
        ambient: &AdForm,
        rows: Option<&'a [bool]>,
        config: LinearSolverConfig,
    ) -> Result<Self> {
        background.expect_degree(Degree::One)?;
        background.check_same(ambient)?;
        if stencil.grid != background.grid {
            return Err(WeldError::GridMismatch);
        }
        Ok(LinearizedOperator { stencil, background, total: background.add(ambient), rows, config })
    }

    pub fn grid(&self) -> Grid {
        self.background.grid
    }

    /// Damping weight `mu`.
    pub fn mu(&self) -> f64 {
        self.config.damping / self.grid().h().powi(2)
    }

    fn row_on(&self, p: usize) -> bool {
        self.rows.map_or(true, |m| m[p])
    }

    /// Forward action on a 1-form, with dropped rows set to zero.
    pub fn apply(&self, b: &AdForm) -> GaugePair {
        let mut out = GaugePair::zeros(self.grid());
        self.apply_into(&b.data, &mut out.zero.data, &mut out.plus.data);
        out
    }

    fn apply_into(&self, b: &[f64], zero: &mut [f64], plus: &mut [f64]) {
        let st = self.stencil;
        let w = st.w();
        let bg = &self.background.data;
        let tot = &self.total.data;
        zero.par_chunks_mut(3)
            .zip(plus.par_chunks_mut(9))
            .enumerate()
            .for_each(|(p, (z, s))| {
                if !self.row_on(p) {
                    z.iter_mut().for_each(|v| *v = 0.0);
                    s.iter_mut().for_each(|v| *v = 0.0);
                    return;
                }
                let nb = &st.nb[p];
                let bp = &b[12 * p..12 * p + 12];
                let ap = &bg[12 * p..12 * p + 12];
                let cp = &tot[12 * p..12 * p + 12];
                z.iter_mut().for_each(|v| *v = 0.0);
                for mu in 0..4 {
                    let up = 12 * nb[2 * mu] as usize + 3 * mu;
                    let dn = 12 * nb[2 * mu + 1] as usize + 3 * mu;
                    for c in 0..3 {
                        z[c] -= w * (b[up + c] - b[dn + c]);
                    }
                    bracket_acc(z, -1.0, &ap[3 * mu..3 * mu + 3], &bp[3 * mu..3 * mu + 3]);
                }
                let mut full = [0.0; 18];
                for (k, &(m, n)) in PAIRS.iter().enumerate() {
                    let um = 12 * nb[2 * m] as usize + 3 * n;
                    let dm = 12 * nb[2 * m + 1] as usize + 3 * n;
                    let un = 12 * nb[2 * n] as usize + 3 * m;
                    let dn = 12 * nb[2 * n + 1] as usize + 3 * m;
                    let o = &mut full[3 * k..3 * k + 3];
                    for c in 0..3 {
                        o[c] = w * (b[um + c] - b[dm + c]) - w * (b[un + c] - b[dn + c]);
                    }
                    bracket_acc(o, 1.0, &cp[3 * m..3 * m + 3], &bp[3 * n..3 * n + 3]);
                    bracket_acc(o, -1.0, &cp[3 * n..3 * n + 3], &bp[3 * m..3 * m + 3]);
                }
                sd_from_two(&full, s);
            });
    }

    /// Exact adjoint of [`apply`](Self::apply) under the coefficient inner product.
    pub fn adjoint(&self, y: &GaugePair) -> AdForm {
        let mut out = AdForm::zeros(self.grid(), Degree::One);
        self.adjoint_into(&y.zero.data, &y.plus.data, &mut out.data);
        out
    }

    fn adjoint_into(&self, zero: &[f64], plus: &[f64], out: &mut [f64]) {
        let st = self.stencil;
        let w = st.w();
        let bg = &self.background.data;
        let tot = &self.total.data;
        let npts = self.grid().points();
        let mut two = vec![0.0; npts * 18];
        let mut z0 = vec![0.0; npts * 3];
        two.par_chunks_mut(18)
            .zip(z0.par_chunks_mut(3))
            .enumerate()
            .for_each(|(p, (t, z))| {
                if self.row_on(p) {
                    two_from_sd(&plus[9 * p..9 * p + 9], t);
                    z.copy_from_slice(&zero[3 * p..3 * p + 3]);
                }
            });
        out.par_chunks_mut(12).enumerate().for_each(|(p, o)| {
            let nb = &st.nb[p];
            let ap = &bg[12 * p..12 * p + 12];
            let cp = &tot[12 * p..12 * p + 12];
            let zp = &z0[3 * p..3 * p + 3];
            let yp = &two[18 * p..18 * p + 18];
            o.iter_mut().for_each(|v| *v = 0.0);
            for nu in 0..4 {
                let oo = &mut o[3 * nu..3 * nu + 3];
                let up = 3 * nb[2 * nu] as usize;
                let dn = 3 * nb[2 * nu + 1] as usize;
                for c in 0..3 {
                    oo[c] += w * (z0[up + c] - z0[dn + c]);
                }
                bracket_acc(oo, 1.0, &ap[3 * nu..3 * nu + 3], zp);
                for mu in 0..4 {
                    let Some((k, s)) = crate::fields::form::pair_index(mu, nu) else { continue };
                    let u = 18 * nb[2 * mu] as usize + 3 * k;
                    let d = 18 * nb[2 * mu + 1] as usize + 3 * k;
                    for c in 0..3 {
                        oo[c] -= s * w * (two[u + c] - two[d + c]);
                    }
                    bracket_acc(oo, -s, &cp[3 * mu..3 * mu + 3], &yp[3 * k..3 * k + 3]);
                }
            }
        });
    }
}

/// Convergence record of one linear solve.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearStats {
    pub iterations: usize,
    /// `||op(b) - rhs|| / ||rhs||` on the kept rows.
    pub relative_residual: f64,
    /// `||op^*(op(b) - rhs) + mu b|| / ||op^* rhs||`.
    pub normal_residual: f64,
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.par_chunks(4096).zip(b.par_chunks(4096)).map(|(x, y)| x.iter().zip(y).map(|(u, v)| u * v).sum::<f64>()).sum()
}

fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    y.par_chunks_mut(4096).zip(x.par_chunks(4096)).for_each(|(a, b)| {
        for (u, v) in a.iter_mut().zip(b) {
            *u += s * v;
        }
    });
}

/// Damped least squares `min ||op(b) - rhs||^2 + mu ||b||^2` by CGLS.
///
/// Succeeds once the relative residual or the relative normal-equation
/// residual falls below the tolerance. `start` warm-starts the iteration.
pub fn linear_solve(op: &LinearizedOperator, rhs: &GaugePair, start: Option<&AdForm>) -> Result<(AdForm, LinearStats)> {
    let grid = op.grid();
    let rhs = rhs.masked(op.rows);
    let rn = rhs.norm();
    let mut x = start.cloned().unwrap_or_else(|| AdForm::zeros(grid, Degree::One));
    if rn == 0.0 && start.is_none() {
        return Ok((x, LinearStats::default()));
    }
    let mu = op.mu();
    let npts = grid.points();
    let mut rz = rhs.zero.data.clone();
    let mut rs = rhs.plus.data.clone();
    let mut qz = vec![0.0; npts * 3];
    let mut qs = vec![0.0; npts * 9];
    op.apply_into(&x.data, &mut qz, &mut qs);
    axpy(&mut rz, -1.0, &qz);
    axpy(&mut rs, -1.0, &qs);
    let mut s = vec![0.0; npts * 12];
    op.adjoint_into(&rhs.zero.data, &rhs.plus.data, &mut s);
    let atb = dot(&s, &s).sqrt().max(f64::MIN_POSITIVE);
    op.adjoint_into(&rz, &rs, &mut s);
    axpy(&mut s, -mu, &x.data);
    let mut p = s.clone();
    let mut gamma = dot(&s, &s);
    let mut history = Vec::new();
    let scale = if rn > 0.0 { rn } else { 1.0 };
    let tol = op.config.tol;
    let mut res = (dot(&rz, &rz) + dot(&rs, &rs)).sqrt() / scale;
    let mut nres = gamma.sqrt() / atb;
    history.push(res);
    let mut it = 0;
    while it < op.config.max_iter {
        if res <= tol || nres <= tol {
            break;
        }
        op.apply_into(&p, &mut qz, &mut qs);
        let delta = dot(&qz, &qz) + dot(&qs, &qs) + mu * dot(&p, &p);
        if delta <= 0.0 {
            break;
        }
        let alpha = gamma / delta;
        axpy(&mut x.data, alpha, &p);
        axpy(&mut rz, -alpha, &qz);
        axpy(&mut rs, -alpha, &qs);
        op.adjoint_into(&rz, &rs, &mut s);
        axpy(&mut s, -mu, &x.data);
        let g_new = dot(&s, &s);
        let beta = g_new / gamma;
        gamma = g_new;
        p.par_chunks_mut(4096).zip(s.par_chunks(4096)).for_each(|(a, b)| {
            for (u, v) in a.iter_mut().zip(b) {
                *u = v + beta * *u;
            }
        });
        it += 1;
        res = (dot(&rz, &rz) + dot(&rs, &rs)).sqrt() / scale;
        nres = gamma.sqrt() / atb;
        history.push(res);
    }
    let stats = LinearStats { iterations: it, relative_residual: res, normal_residual: nres, history };
    if res <= tol || nres <= tol {
        Ok((x, stats))
    } else {
        Err(WeldError::NonConvergence { iterations: it, residual: res, history: stats.history })
    }
}
