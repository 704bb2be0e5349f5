//! Gauge transformations and the exponential (radial) gauge.

use super::algebra::{quat_mul, AlgElement, GroupElement, SQRT2};
use super::calculus::Stencil;
use super::form::{AdForm, Degree, Grid};
use crate::error::{Result, WeldError};
use rayon::prelude::*;

/// A map from grid points to SU(2).
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeField {
    pub grid: Grid,
    pub values: Vec<GroupElement>,
}

impl GaugeField {
    pub fn identity(grid: Grid) -> Self {
        GaugeField { grid, values: vec![GroupElement::IDENTITY; grid.points()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 4]) -> GroupElement) -> Self {
        GaugeField { grid, values: (0..grid.points()).map(|p| f(grid.coords(p))).collect() }
    }

    /// Maurer-Cartan form `(dg) g^{-1}` by centred differences.
    pub fn maurer_cartan(&self, st: &Stencil) -> AdForm {
        let w = st.w();
        let mut out = AdForm::zeros(self.grid, Degree::One);
        out.data.par_chunks_mut(12).enumerate().for_each(|(p, o)| {
            let gi = self.values[p].inverse().0;
            for mu in 0..4 {
                let up = self.values[st.nb[p][2 * mu] as usize].0;
                let dn = self.values[st.nb[p][2 * mu + 1] as usize].0;
                let d = [0, 1, 2, 3].map(|k| w * (up[k] - dn[k]));
                let m = quat_mul(&d, &gi);
                for c in 0..3 {
                    o[3 * mu + c] = SQRT2 * m[c + 1];
                }
            }
        });
        out
    }
}

/// Gauge action on a 1-form connection, `A' = g A g^{-1} - (dg) g^{-1}`.
pub fn apply_gauge(st: &Stencil, g: &GaugeField, a: &AdForm) -> Result<AdForm> {
    a.expect_degree(Degree::One)?;
    if g.grid != a.grid {
        return Err(WeldError::GridMismatch);
    }
    let mut out = adjoint_action(g, a);
    out.axpy(-1.0, &g.maurer_cartan(st));
    Ok(out)
}

/// Pointwise `Ad_g` on a form of any degree.
pub fn adjoint_action(g: &GaugeField, f: &AdForm) -> AdForm {
    let mut out = f.clone();
    let nc = f.degree.components();
    out.data.par_chunks_mut(nc * 3).enumerate().for_each(|(p, o)| {
        let m = g.values[p].adjoint_matrix();
        for c in 0..nc {
            let v = [o[3 * c], o[3 * c + 1], o[3 * c + 2]];
            for r in 0..3 {
                o[3 * c + r] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2];
            }
        }
    });
    out
}

/// Parallel transport along the ray `center + t u`, `t in [0, r]`, solving `dg/dt = g A_u`.
///
/// Uses classical Runge-Kutta with multilinear samples of `a`.
pub fn radial_transport(a: &AdForm, center: [f64; 4], u: [f64; 4], r: f64, steps: usize) -> GroupElement {
    let mut g = GroupElement::IDENTITY.0;
    if r == 0.0 {
        return GroupElement::IDENTITY;
    }
    let dt = r / steps as f64;
    let mut buf = vec![0.0; 12];
    let mut field = |t: f64| -> [f64; 4] {
        let x = [0, 1, 2, 3].map(|m| center[m] + t * u[m]);
        a.sample_into(x, &mut buf);
        let mut v = [0.0; 3];
        for mu in 0..4 {
            for c in 0..3 {
                v[c] += buf[3 * mu + c] * u[mu];
            }
        }
        [0.0, v[0] / SQRT2, v[1] / SQRT2, v[2] / SQRT2]
    };
    let rhs = |g: &[f64; 4], q: &[f64; 4]| quat_mul(g, q);
    let add = |g: &[f64; 4], k: &[f64; 4], s: f64| [0, 1, 2, 3].map(|i| g[i] + s * k[i]);
    for i in 0..steps {
        let t = i as f64 * dt;
        let q0 = field(t);
        let qh = field(t + 0.5 * dt);
        let q1 = field(t + dt);
        let k1 = rhs(&g, &q0);
        let k2 = rhs(&add(&g, &k1, 0.5 * dt), &qh);
        let k3 = rhs(&add(&g, &k2, 0.5 * dt), &qh);
        let k4 = rhs(&add(&g, &k3, dt), &q1);
        for c in 0..4 {
            g[c] += dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
    }
    GroupElement(g).normalized()
}

/// One ball on which [`exponential_gauge`] puts a connection in radial gauge.
#[derive(Clone, Copy, Debug)]
pub struct GaugeBall {
    pub center: [f64; 4],
    /// Radius of the region where the radial component vanishes.
    pub radius: f64,
    /// Width of the shell over which the transformation returns to the identity.
    pub blend: f64,
}

/// Gauge transformation putting `a` into exponential gauge on each ball.
///
/// Inside `radius` the transformed connection has vanishing radial component.
/// On the blend shell `g = exp(chi(r) log g_boundary)` with a cubic ramp `chi`,
/// and outside it `g` is the identity. Balls must be disjoint.
pub fn exponential_gauge(a: &AdForm, balls: &[GaugeBall]) -> Result<GaugeField> {
    a.expect_degree(Degree::One)?;
    let grid = a.grid;
    let limit = 0.5 * grid.size;
    for b in balls {
        if b.radius + b.blend > limit {
            return Err(WeldError::GaugeRadius { radius: b.radius + b.blend, limit });
        }
    }
    let h = grid.h();
    let values = (0..grid.points())
        .into_par_iter()
        .map(|p| {
            let x = grid.coords(p);
            for b in balls {
                let d = grid.displacement(x, b.center);
                let r = norm4(&d);
                let outer = b.radius + b.blend;
                if r >= outer {
                    continue;
                }
                if r == 0.0 {
                    return GroupElement::IDENTITY;
                }
                let u = d.map(|t| t / r);
                let reach = r.min(b.radius);
                let steps = ((reach / (0.125 * h)).ceil() as usize).max(4);
                let g = radial_transport(a, b.center, u, reach, steps);
                if r <= b.radius {
                    return g;
                }
                let t = (r - b.radius) / b.blend;
                let chi = 1.0 - t * t * (3.0 - 2.0 * t);
                return g.log().scale(chi).exp();
            }
            GroupElement::IDENTITY
        })
        .collect();
    Ok(GaugeField { grid, values })
}

pub fn norm4(v: &[f64; 4]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]).sqrt()
}

/// Radial component of `g A g^{-1} - (dg) g^{-1}` at `center + t u`, with `g`
/// the transport along the ray and `dg/dt` taken by a centred difference of step `eps`.
pub fn radial_residual(a: &AdForm, center: [f64; 4], u: [f64; 4], t: f64, eps: f64, steps_per_unit: usize) -> f64 {
    let steps = |r: f64| ((r * steps_per_unit as f64).ceil() as usize).max(8);
    let g = radial_transport(a, center, u, t, steps(t));
    let gp = radial_transport(a, center, u, t + eps, steps(t + eps));
    let gm = radial_transport(a, center, u, t - eps, steps(t - eps));
    let x = [0, 1, 2, 3].map(|m| center[m] + t * u[m]);
    let v = a.sample(x);
    let mut ar = [0.0; 3];
    for mu in 0..4 {
        for c in 0..3 {
            ar[c] += v[3 * mu + c] * u[mu];
        }
    }
    let rot = g.adjoint(&AlgElement(ar));
    let d = [0, 1, 2, 3].map(|k| (gp.0[k] - gm.0[k]) / (2.0 * eps));
    let mc = quat_mul(&d, &g.inverse().0);
    let mc = AlgElement([SQRT2 * mc[1], SQRT2 * mc[2], SQRT2 * mc[3]]);
    // with dg/dt = g A_u the Maurer-Cartan term equals Ad_g A_u
    (rot - mc).norm()
}
