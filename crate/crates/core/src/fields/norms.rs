//! Lattice norms and curvature integrals.

use super::calculus::{covariant_gradient, curvature, sd_project, Stencil};
use super::form::{AdForm, Degree};
use crate::error::Result;
use std::f64::consts::PI;

/// Optional point mask restricting a norm to a region.
pub type Region<'a> = Option<&'a [bool]>;

fn included(region: Region, p: usize) -> bool {
    region.map_or(true, |m| m[p])
}

/// `L^p` norm, `(sum |f(x)|^p h^4)^{1/p}`, with the pointwise form norm.
pub fn lp_norm(f: &AdForm, p: f64, region: Region) -> f64 {
    let vol = f.grid.cell_volume();
    let mut acc = 0.0;
    for q in 0..f.grid.points() {
        if included(region, q) {
            acc += f.point_norm(q).powf(p);
        }
    }
    (acc * vol).powf(1.0 / p)
}

pub fn l2_norm(f: &AdForm, region: Region) -> f64 {
    let vol = f.grid.cell_volume();
    let mut acc = 0.0;
    let s = f.stride();
    for (q, chunk) in f.data.chunks(s).enumerate() {
        if included(region, q) {
            acc += chunk.iter().map(|v| v * v).sum::<f64>();
        }
    }
    (acc * vol).sqrt()
}

pub fn linf_norm(f: &AdForm, region: Region) -> f64 {
    (0..f.grid.points())
        .filter(|&q| included(region, q))
        .map(|q| f.point_norm(q))
        .fold(0.0, f64::max)
}

/// Sobolev norm `(||f||_p^p + ||nabla_A f||_p^p)^{1/p}`.
pub fn lp1_norm(st: &Stencil, a: &AdForm, f: &AdForm, p: f64, region: Region) -> Result<f64> {
    let grad = covariant_gradient(st, a, f)?;
    let vol = f.grid.cell_volume();
    let mut acc = 0.0;
    for q in 0..f.grid.points() {
        if !included(region, q) {
            continue;
        }
        acc += f.point_norm(q).powf(p);
        let g2: f64 = grad.iter().map(|g| g.point_norm(q).powi(2)).sum();
        acc += g2.sqrt().powf(p);
    }
    Ok((acc * vol).powf(1.0 / p))
}

/// Yang-Mills energy `||F_A||^2_{L^2}` over a region.
pub fn energy(st: &Stencil, a: &AdForm, region: Region) -> Result<f64> {
    let f = curvature(st, a)?;
    Ok(l2_norm(&f, region).powi(2))
}

/// Instanton number `(1 / 8 pi^2) ∫ tr(F ∧ F)`.
///
/// With `|X|^2 = -tr X^2` this is `(||F^-||^2 - ||F^+||^2) / 8 pi^2`, so an
/// anti-self-dual connection has positive charge.
pub fn instanton_charge(st: &Stencil, a: &AdForm, region: Region) -> Result<f64> {
    let f = curvature(st, a)?;
    let total = l2_norm(&f, region).powi(2);
    let plus = l2_norm(&sd_project(&f)?, region).powi(2);
    Ok((total - 2.0 * plus) / (8.0 * PI * PI))
}

/// Curvature energy density `|F_A|^2` at each point.
pub fn energy_density(st: &Stencil, a: &AdForm) -> Result<Vec<f64>> {
    let f = curvature(st, a)?;
    debug_assert_eq!(f.degree, Degree::Two);
    Ok(f.point_norms().into_iter().map(|v| v * v).collect())
}
