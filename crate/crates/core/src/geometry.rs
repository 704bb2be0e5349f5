//! Block charts, neck shells, the conformal neck map and cutoff functions.
//!
//! Around a marked point the neck annulus `r0 < |xi| < r3` splits into an inner
//! shell `(r0, r1)`, a middle zone `[r1, r2]` and an outer shell `(r2, r3)`,
//! with
//!
//! ```text
//! r0 = k sqrt(lambda) / N    r1 = sqrt(lambda) / N    r2 = N sqrt(lambda)    r3 = N sqrt(lambda) / k
//! ```
//!
//! The neck map `xi -> lambda R xi / |xi|^2` swaps the inner shell of one block
//! with the outer shell of its neighbour.

use crate::error::{Result, WeldError};
use crate::fields::form::PAIRS;
use crate::fields::Grid;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

pub type Vec4 = [f64; 4];

pub fn norm(v: &Vec4) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]).sqrt()
}

/// One block chart: a flat torus `[0, torus_size)^4` with two marked points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub torus_size: f64,
    pub resolution: usize,
    pub marked_l: Vec4,
    pub marked_r: Vec4,
}

impl ChartSpec {
    pub fn grid(&self) -> Grid {
        Grid::new(self.resolution, self.torus_size)
    }

    /// Torus distance between the marked points.
    pub fn marked_distance(&self) -> f64 {
        norm(&self.grid().displacement(self.marked_l, self.marked_r))
    }

    pub fn validate(&self, neck: &NeckParams) -> Result<()> {
        if self.resolution < 8 {
            return Err(WeldError::InvalidChart(format!("resolution {} < 8", self.resolution)));
        }
        if !(self.torus_size > 0.0) {
            return Err(WeldError::InvalidChart("torus size must be positive".into()));
        }
        if self.marked_l == self.marked_r {
            return Err(WeldError::InvalidChart("marked points coincide".into()));
        }
        let (_, _, _, r3) = shell_radii(neck)?;
        let d = self.marked_distance();
        if d <= 2.0 * r3 {
            return Err(WeldError::InvalidChart(format!(
                "marked points {d:.4} apart, need more than 2 r3 = {:.4}",
                2.0 * r3
            )));
        }
        Ok(())
    }

    pub fn marked(&self, side: Side) -> Vec4 {
        match side {
            Side::L => self.marked_l,
            Side::R => self.marked_r,
        }
    }
}

/// Which marked point of a block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    L,
    R,
}

fn default_q() -> i32 {
    4
}

fn default_budget() -> f64 {
    1e-2
}

/// Neck parameters `k`, `N`, `lambda` and the smallness constraint `lambda N^q <= budget`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeckParams {
    pub k: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub lambda: f64,
    #[serde(default = "default_q")]
    pub q: i32,
    #[serde(default = "default_budget")]
    pub budget: f64,
    #[serde(default)]
    pub reflection_axis: usize,
}

impl NeckParams {
    pub fn new(k: f64, n: f64, lambda: f64) -> Self {
        NeckParams { k, n, lambda, q: default_q(), budget: default_budget(), reflection_axis: 0 }
    }

    pub fn with_budget(mut self, q: i32, budget: f64) -> Self {
        self.q = q;
        self.budget = budget;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k < 1.0) {
            return Err(WeldError::InvalidNeck(format!("k = {} not in (0, 1)", self.k)));
        }
        if !(self.n > 1.0) {
            return Err(WeldError::InvalidNeck(format!("N = {} not > 1", self.n)));
        }
        if !(self.lambda > 0.0) {
            return Err(WeldError::InvalidNeck(format!("lambda = {} not > 0", self.lambda)));
        }
        if self.q < 2 {
            return Err(WeldError::InvalidNeck(format!("exponent q = {} < 2", self.q)));
        }
        if self.reflection_axis > 3 {
            return Err(WeldError::InvalidNeck(format!("reflection axis {} > 3", self.reflection_axis)));
        }
        let value = self.lambda * self.n.powi(self.q);
        if value > self.budget * (1.0 + 1e-12) {
            return Err(WeldError::NeckBudget { value, budget: self.budget, q: self.q });
        }
        Ok(())
    }

    pub fn radii(&self) -> Result<(f64, f64, f64, f64)> {
        shell_radii(self)
    }

    /// Constant `K_N = N / (N - 1/N)^3` governing the decay rate.
    pub fn k_n(&self) -> f64 {
        k_n(self.n)
    }
}

/// `K_N = N / (N - N^{-1})^3`.
pub fn k_n(n: f64) -> f64 {
    n / (n - 1.0 / n).powi(3)
}

/// Shell radii `(r0, r1, r2, r3)`.
pub fn shell_radii(neck: &NeckParams) -> Result<(f64, f64, f64, f64)> {
    neck.validate()?;
    let s = neck.lambda.sqrt();
    let r = (neck.k * s / neck.n, s / neck.n, neck.n * s, neck.n * s / neck.k);
    if !(r.0 < r.1 && r.1 < r.2 && r.2 < r.3) {
        return Err(WeldError::InvalidNeck(format!("radii not ordered: {r:?}")));
    }
    Ok(r)
}

/// Neck map `xi -> lambda R xi / |xi|^2`, with `R` negating coordinate `axis`.
pub fn neck_map(xi: Vec4, lambda: f64, axis: usize) -> Result<Vec4> {
    let r2 = xi.iter().map(|t| t * t).sum::<f64>();
    if r2 == 0.0 {
        return Err(WeldError::InvalidNeck("neck map is singular at the marked point".into()));
    }
    let mut eta = xi.map(|t| lambda * t / r2);
    eta[axis] = -eta[axis];
    Ok(eta)
}

/// Jacobian matrix `J[nu][mu] = d eta^nu / d xi^mu` of the neck map.
pub fn neck_jacobian(xi: Vec4, lambda: f64, axis: usize) -> [[f64; 4]; 4] {
    let r2 = xi.iter().map(|t| t * t).sum::<f64>();
    let mut j = [[0.0; 4]; 4];
    for nu in 0..4 {
        let s = if nu == axis { -lambda } else { lambda };
        for mu in 0..4 {
            let delta = if nu == mu { 1.0 } else { 0.0 };
            j[nu][mu] = s * (delta / r2 - 2.0 * xi[nu] * xi[mu] / (r2 * r2));
        }
    }
    j
}

/// Conformal factor `lambda / |xi|^2` of the neck map on the annulus.
pub fn neck_jacobian_norm(xi: Vec4, neck: &NeckParams) -> Result<f64> {
    let (r0, _, _, r3) = shell_radii(neck)?;
    let r = norm(&xi);
    let tol = 1e-12 * r3;
    if r < r0 - tol || r > r3 + tol {
        return Err(WeldError::OutsideNeck { radius: r, inner: r0, outer: r3 });
    }
    Ok(neck.lambda / (r * r))
}

/// Conformal factor of the inverse map at `xi`, namely `|xi|^2 / lambda`.
pub fn inverse_jacobian_norm(xi: Vec4, neck: &NeckParams) -> Result<f64> {
    Ok(1.0 / neck_jacobian_norm(xi, neck)?)
}

/// Pullback of the 2-form `w` through the neck map, evaluated at `xi`.
///
/// Components are ordered as [`PAIRS`]: `(phi^* w)_{mu nu} = J^a_mu J^b_nu w_ab(phi(xi))`.
pub fn pullback_two_form(xi: Vec4, lambda: f64, axis: usize, w: impl Fn(Vec4) -> [f64; 6]) -> Result<[f64; 6]> {
    let eta = neck_map(xi, lambda, axis)?;
    let j = neck_jacobian(xi, lambda, axis);
    let comps = w(eta);
    let mut m = [[0.0; 4]; 4];
    for (c, &(a, b)) in PAIRS.iter().enumerate() {
        m[a][b] = comps[c];
        m[b][a] = -comps[c];
    }
    Ok(PAIRS.map(|(mu, nu)| {
        let mut s = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                s += j[a][mu] * j[b][nu] * m[a][b];
            }
        }
        s
    }))
}

/// `L^2` norm of a 2-form over the annulus `r_in < |xi| < r_out`.
///
/// Midpoint rule with `radial` samples in the radius, `angular` samples in each
/// polar angle and `2 angular` in the azimuth of hyperspherical coordinates.
pub fn annulus_l2(w: impl Fn(Vec4) -> [f64; 6], r_in: f64, r_out: f64, radial: usize, angular: usize) -> f64 {
    let pi = std::f64::consts::PI;
    let (dr, da, dp) = ((r_out - r_in) / radial as f64, pi / angular as f64, pi / angular as f64);
    let mut total = 0.0;
    for ir in 0..radial {
        let r = r_in + (ir as f64 + 0.5) * dr;
        let mut shell = 0.0;
        for i1 in 0..angular {
            let psi = (i1 as f64 + 0.5) * da;
            for i2 in 0..angular {
                let theta = (i2 as f64 + 0.5) * da;
                let weight = psi.sin().powi(2) * theta.sin();
                for i3 in 0..2 * angular {
                    let phi = (i3 as f64 + 0.5) * dp;
                    let u = [
                        psi.cos(),
                        psi.sin() * theta.cos(),
                        psi.sin() * theta.sin() * phi.cos(),
                        psi.sin() * theta.sin() * phi.sin(),
                    ];
                    let v = w(u.map(|t| r * t));
                    shell += weight * v.iter().map(|t| t * t).sum::<f64>();
                }
            }
        }
        total += shell * r.powi(3);
    }
    (total * dr * da * da * dp).sqrt()
}

/// Cubic smoothstep ramp from 0 at `r0` to 1 at `r1`, returned with its radial derivative.
pub fn radial_cutoff(r: f64, r0: f64, r1: f64) -> (f64, f64) {
    if r <= r0 {
        (0.0, 0.0)
    } else if r >= r1 {
        (1.0, 0.0)
    } else {
        let w = r1 - r0;
        let t = (r - r0) / w;
        (t * t * (3.0 - 2.0 * t), 6.0 * t * (1.0 - t) / w)
    }
}

/// Cutoff `psi` about `center` and its gradient, using the Euclidean displacement.
pub fn cutoff(x: Vec4, center: Vec4, neck: &NeckParams) -> Result<(f64, Vec4)> {
    let d = [0, 1, 2, 3].map(|m| x[m] - center[m]);
    cutoff_at(d, neck)
}

/// Cutoff evaluated at a displacement from the marked point.
pub fn cutoff_at(d: Vec4, neck: &NeckParams) -> Result<(f64, Vec4)> {
    let (r0, r1, _, _) = shell_radii(neck)?;
    let r = norm(&d);
    let (psi, dr) = radial_cutoff(r, r0, r1);
    let grad = if dr == 0.0 { [0.0; 4] } else { d.map(|t| dr * t / r) };
    Ok((psi, grad))
}

/// Named regions of a block chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegionTag {
    U,
    LMinus,
    LPlus,
    RMinus,
    RPlus,
    OmegaL,
    OmegaR,
    ExcisedL,
    ExcisedR,
}

/// Radial zone about one marked point; the five zones partition the chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NeckZone {
    Excised,
    InnerShell,
    Middle,
    OuterShell,
    Outside,
}

pub fn neck_zone(r: f64, radii: (f64, f64, f64, f64)) -> NeckZone {
    let (r0, r1, r2, r3) = radii;
    if r <= r0 {
        NeckZone::Excised
    } else if r < r1 {
        NeckZone::InnerShell
    } else if r <= r2 {
        NeckZone::Middle
    } else if r < r3 {
        NeckZone::OuterShell
    } else {
        NeckZone::Outside
    }
}

/// Region tags of `x`, with distances measured on the torus.
pub fn classify_point(x: Vec4, chart: &ChartSpec, neck: &NeckParams) -> Result<BTreeSet<RegionTag>> {
    let radii = shell_radii(neck)?;
    let g = chart.grid();
    let mut tags = BTreeSet::new();
    let mut excised = false;
    for side in [Side::L, Side::R] {
        let r = norm(&g.displacement(x, chart.marked(side)));
        let (ex, minus, plus, omega) = match side {
            Side::L => (RegionTag::ExcisedL, RegionTag::LMinus, RegionTag::LPlus, RegionTag::OmegaL),
            Side::R => (RegionTag::ExcisedR, RegionTag::RMinus, RegionTag::RPlus, RegionTag::OmegaR),
        };
        match neck_zone(r, radii) {
            NeckZone::Excised => {
                tags.insert(ex);
                excised = true;
            }
            NeckZone::InnerShell => {
                tags.insert(minus);
                tags.insert(omega);
            }
            NeckZone::Middle => {
                tags.insert(omega);
            }
            NeckZone::OuterShell => {
                tags.insert(plus);
                tags.insert(omega);
            }
            NeckZone::Outside => {}
        }
    }
    if !excised {
        tags.insert(RegionTag::U);
    }
    Ok(tags)
}
