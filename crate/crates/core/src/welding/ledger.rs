//! Energy accounting and the overlap compatibility check for welded chains.

use super::chain::Assembly;
use super::iterate::WeldedConnection;
use crate::error::Result;
use crate::fields::calculus::{curvature, curvature_plus};
use crate::fields::form::AdForm;
use crate::fields::norms::{l2_norm, linf_norm};
use crate::geometry::{neck_jacobian, neck_map, Side, Vec4};
use serde::{Deserialize, Serialize};

/// Energies of one block on its resolved region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockEnergy {
    pub index: usize,
    pub label: String,
    pub nonflat: bool,
    /// `||F(A_i + a_i)||^2`.
    pub welded: f64,
    /// `||F(A_i)||^2` on the same points.
    pub isolated: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub blocks: Vec<BlockEnergy>,
    pub total: f64,
    pub isolated_total: f64,
    pub nonflat_blocks: usize,
    /// Smallest `welded / isolated` over non-flat blocks.
    pub min_retained: Option<f64>,
    /// Largest `|welded / isolated - 1|` over non-flat blocks.
    pub max_relative_change: Option<f64>,
    /// `total / nonflat_blocks`.
    pub energy_per_nonflat: Option<f64>,
}

/// Per-block curvature energies of a welded connection.
pub fn energy_ledger(asm: &Assembly, w: &WeldedConnection) -> Result<EnergyLedger> {
    let mut blocks = Vec::with_capacity(asm.window());
    for i in 0..asm.window() {
        let d = asm.config.datum(i);
        let region = Some(asm.geometry[i].resolved.as_slice());
        let welded = l2_norm(&curvature(&asm.stencil, &w.total(asm, i))?, region).powi(2);
        let isolated = l2_norm(&curvature(&asm.stencil, &d.background)?, region).powi(2);
        blocks.push(BlockEnergy { index: i, label: d.label.clone(), nonflat: d.nonflat, welded, isolated });
    }
    let total = blocks.iter().map(|b| b.welded).sum();
    let isolated_total = blocks.iter().map(|b| b.isolated).sum();
    let nonflat: Vec<&BlockEnergy> = blocks.iter().filter(|b| b.nonflat).collect();
    let ratios = nonflat.iter().map(|b| b.welded / b.isolated);
    let min_retained = ratios.clone().reduce(f64::min);
    let max_relative_change = ratios.map(|r| (r - 1.0).abs()).reduce(f64::max);
    let n = nonflat.len();
    Ok(EnergyLedger {
        blocks,
        total,
        isolated_total,
        nonflat_blocks: n,
        min_retained,
        max_relative_change,
        energy_per_nonflat: (n > 0).then(|| total / n as f64),
    })
}

/// `max_i ||F^+(A_i + a_i)||_inf` on the resolved points.
pub fn asd_residual(asm: &Assembly, w: &WeldedConnection) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..asm.window() {
        let f = curvature_plus(&asm.stencil, &w.total(asm, i))?;
        worst = worst.max(linf_norm(&f, Some(&asm.geometry[i].resolved)));
    }
    Ok(worst)
}

/// Mismatch on one neck.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeckMismatch {
    pub neck: usize,
    /// Largest pointwise mismatch over the sample directions.
    pub mismatch: f64,
    /// Interpolation bound at the worst sample.
    pub tolerance: f64,
    /// Largest `mismatch / bound` over the samples.
    pub worst_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub necks: Vec<NeckMismatch>,
    pub max_mismatch: f64,
    pub worst_ratio: f64,
}

impl CompatibilityReport {
    pub fn within_tolerance(&self) -> bool {
        self.worst_ratio <= 1.0
    }
}

/// Vertices of the 24-cell: the unit directions sampled on each neck.
pub fn sample_directions() -> Vec<Vec4> {
    let mut out = Vec::with_capacity(24);
    for mu in 0..4 {
        for s in [1.0, -1.0] {
            let mut e = [0.0; 4];
            e[mu] = s;
            out.push(e);
        }
    }
    for bits in 0..16u32 {
        out.push(std::array::from_fn(|m| if bits >> m & 1 == 1 { -0.5 } else { 0.5 }));
    }
    out
}

/// Componentwise multilinear interpolation bound `(1/8) sum_mu max |second difference|`
/// over the corners of the cell holding `x`.
fn interpolation_bound(f: &AdForm, x: Vec4) -> [f64; 12] {
    let grid = f.grid;
    let h = grid.h();
    let base: [i64; 4] = std::array::from_fn(|m| (x[m] / h).floor() as i64);
    let n = grid.n as i64;
    let idx = |c: [i64; 4]| -> usize {
        let w: [usize; 4] = std::array::from_fn(|m| c[m].rem_euclid(n) as usize);
        grid.flat_index(w)
    };
    let mut out = [0.0; 12];
    for mu in 0..4 {
        let mut worst = [0.0f64; 12];
        for corner in 0..16u32 {
            let c: [i64; 4] = std::array::from_fn(|m| base[m] + (corner >> m & 1) as i64);
            let mut up = c;
            up[mu] += 1;
            let mut down = c;
            down[mu] -= 1;
            let (v, vu, vd) = (f.at(idx(c)), f.at(idx(up)), f.at(idx(down)));
            for k in 0..12 {
                worst[k] = worst[k].max((vu[k] - 2.0 * v[k] + vd[k]).abs());
            }
        }
        for k in 0..12 {
            out[k] += worst[k] / 8.0;
        }
    }
    out
}

fn vec_norm(v: &[f64]) -> f64 {
    v.iter().map(|t| t * t).sum::<f64>().sqrt()
}

/// Compares `A_j + a_j` with the conjugated pull-back of `A_i + a_i` on the
/// sphere `|eta| = sqrt(lambda)`, where the neck map is an isometry.
///
/// Both sides are read through their multilinear interpolants, so the
/// mismatch is judged against the sum of the two interpolation bounds.
pub fn compatibility_check(asm: &Assembly, w: &WeldedConnection) -> Result<CompatibilityReport> {
    let neck = &asm.config.neck;
    let rad = neck.lambda.sqrt();
    let dirs = sample_directions();
    let mut necks = Vec::new();
    for k in 0..asm.config.necks() {
        let (i, j) = asm.config.neck_blocks(k);
        let src = w.total(asm, i);
        let dst = w.total(asm, j);
        let mi = asm.config.datum(i).chart.marked(Side::R);
        let mj = asm.config.datum(j).chart.marked(Side::L);
        let ad = asm.rho.rho[k].adjoint_matrix();
        let mut entry = NeckMismatch { neck: k, mismatch: 0.0, tolerance: 0.0, worst_ratio: 0.0 };
        for u in &dirs {
            let eta = u.map(|t| rad * t);
            let xi = neck_map(eta, neck.lambda, neck.reflection_axis)?;
            let jac = neck_jacobian(eta, neck.lambda, neck.reflection_axis);
            let xj = std::array::from_fn(|m| mj[m] + eta[m]);
            let xs = std::array::from_fn(|m| mi[m] + xi[m]);
            let lhs = dst.sample(xj);
            let v = src.sample(xs);
            let mut diff = [0.0; 12];
            for mu in 0..4 {
                let mut acc = [0.0; 3];
                for nu in 0..4 {
                    for c in 0..3 {
                        acc[c] += v[3 * nu + c] * jac[nu][mu];
                    }
                }
                for r in 0..3 {
                    let pulled = ad[r][0] * acc[0] + ad[r][1] * acc[1] + ad[r][2] * acc[2];
                    diff[3 * mu + r] = lhs[3 * mu + r] - pulled;
                }
            }
            let frob = jac.iter().flatten().map(|t| t * t).sum::<f64>().sqrt();
            let bj = vec_norm(&interpolation_bound(&dst, xj));
            let bi = vec_norm(&interpolation_bound(&src, xs));
            // a conformal 4x4 matrix has operator norm equal to half its Frobenius norm
            let tol = bj + 0.5 * frob * bi;
            let m = vec_norm(&diff);
            if m > entry.mismatch {
                entry.mismatch = m;
                entry.tolerance = tol;
            }
            let ratio = if tol > 0.0 { m / tol } else if m > 0.0 { f64::INFINITY } else { 0.0 };
            entry.worst_ratio = entry.worst_ratio.max(ratio);
        }
        necks.push(entry);
    }
    let max_mismatch = necks.iter().map(|n| n.mismatch).fold(0.0, f64::max);
    let worst_ratio = necks.iter().map(|n| n.worst_ratio).fold(0.0, f64::max);
    Ok(CompatibilityReport { necks, max_mismatch, worst_ratio })
}
