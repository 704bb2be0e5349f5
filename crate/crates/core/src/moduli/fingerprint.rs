//! Gauge-invariant fingerprints of welded connections.

use crate::error::{Result, WeldError};
use crate::fields::algebra::AlgElement;
use crate::fields::norms::energy_density;
use crate::fields::{AdForm, GroupElement};
use crate::geometry::{norm, Side, Vec4};
use crate::welding::{Assembly, WeldedConnection};
use serde::{Deserialize, Serialize};

/// Radial bins of the energy profile.
pub const PROFILE_BINS: usize = 8;
/// Side of the holonomy loops in grid steps.
pub const LOOP_STEPS: usize = 8;

/// Fixed-order numeric arrays: per block, the energy in radial shells about
/// the chart centre, then the traces of holonomies around square loops.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub profiles: Vec<[f64; PROFILE_BINS]>,
    /// Per block, one trace for each anchor (centre, left and right marked points).
    pub holonomy: Vec<[f64; 3]>,
}

impl Fingerprint {
    pub fn flatten(&self) -> Vec<f64> {
        self.profiles.iter().flatten().chain(self.holonomy.iter().flatten()).copied().collect()
    }

    /// Sup distance; a pseudometric on welded outputs.
    pub fn distance(&self, o: &Fingerprint) -> Result<f64> {
        let (a, b) = (self.flatten(), o.flatten());
        if a.len() != b.len() {
            return Err(WeldError::Precondition("fingerprints of different chains".into()));
        }
        Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
    }

    /// Largest entry magnitude, the scale for roundoff.
    pub fn scale(&self) -> f64 {
        self.flatten().iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

fn link(a: &AdForm, p: usize, q: usize, mu: usize, h: f64) -> GroupElement {
    let (x, y) = (a.at(p), a.at(q));
    AlgElement(std::array::from_fn(|c| 0.5 * h * (x[3 * mu + c] + y[3 * mu + c]))).exp()
}

/// Holonomy around the square of `LOOP_STEPS` cells in the `(0, 1)` plane centred at `anchor`.
pub fn loop_holonomy(a: &AdForm, anchor: Vec4) -> GroupElement {
    let grid = a.grid;
    let h = grid.h();
    let half = LOOP_STEPS as i64 / 2;
    let n = grid.n as i64;
    let base: [i64; 4] = std::array::from_fn(|m| (anchor[m] / h).round() as i64);
    let at = |c: [i64; 4]| grid.flat_index(std::array::from_fn(|m| c[m].rem_euclid(n) as usize));
    let mut c = base;
    c[0] -= half;
    c[1] -= half;
    let mut hol = GroupElement::IDENTITY;
    for (mu, sign) in [(0usize, 1i64), (1, 1), (0, -1), (1, -1)] {
        for _ in 0..LOOP_STEPS {
            let mut next = c;
            next[mu] += sign;
            let u = link(a, at(c), at(next), mu, h);
            hol = if sign > 0 { u * hol } else { u.inverse() * hol };
            c = next;
        }
    }
    hol
}

/// Fingerprint of `A_i + a_i` over the window.
pub fn fingerprint(asm: &Assembly, w: &WeldedConnection) -> Result<Fingerprint> {
    let mut profiles = Vec::with_capacity(asm.window());
    let mut holonomy = Vec::with_capacity(asm.window());
    for i in 0..asm.window() {
        let chart = asm.config.datum(i).chart;
        let grid = chart.grid();
        let total = w.total(asm, i);
        let dens = energy_density(&asm.stencil, &total)?;
        let centre = [0.5 * chart.torus_size; 4];
        let reach = 0.5 * chart.torus_size * 2.0; // half-diagonal of the chart
        let mut prof = [0.0; PROFILE_BINS];
        for (p, d) in dens.iter().enumerate() {
            let r = norm(&grid.displacement(grid.coords(p), centre));
            let b = ((r / reach * PROFILE_BINS as f64) as usize).min(PROFILE_BINS - 1);
            prof[b] += d * grid.cell_volume();
        }
        profiles.push(prof);
        let anchors = [centre, chart.marked(Side::L), chart.marked(Side::R)];
        holonomy.push(anchors.map(|x| loop_holonomy(&total, x).trace()));
    }
    Ok(Fingerprint { profiles, holonomy })
}
