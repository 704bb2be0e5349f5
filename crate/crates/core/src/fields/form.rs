//! Periodic grids and ad(P)-valued forms stored on them.

use crate::error::{Result, WeldError};
use serde::{Deserialize, Serialize};

/// Uniform periodic lattice with `n^4` points on the torus `[0, size)^4`.
///
/// The point with multi-index `(i, j, k, l)` sits at `h * (i, j, k, l)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    pub size: f64,
}

impl Grid {
    pub fn new(n: usize, size: f64) -> Self {
        Grid { n, size }
    }

    pub fn h(&self) -> f64 {
        self.size / self.n as f64
    }

    pub fn points(&self) -> usize {
        self.n.pow(4)
    }

    /// Volume of one lattice cell.
    pub fn cell_volume(&self) -> f64 {
        self.h().powi(4)
    }

    #[inline(always)]
    pub fn stride(&self, mu: usize) -> usize {
        self.n.pow(3 - mu as u32)
    }

    #[inline(always)]
    pub fn multi_index(&self, p: usize) -> [usize; 4] {
        let n = self.n;
        [p / (n * n * n), (p / (n * n)) % n, (p / n) % n, p % n]
    }

    #[inline(always)]
    pub fn flat_index(&self, i: [usize; 4]) -> usize {
        let n = self.n;
        ((i[0] * n + i[1]) * n + i[2]) * n + i[3]
    }

    pub fn coords(&self, p: usize) -> [f64; 4] {
        let h = self.h();
        self.multi_index(p).map(|i| i as f64 * h)
    }

    /// Neighbour tables: `nb[p][2 mu]` is `p + e_mu`, `nb[p][2 mu + 1]` is `p - e_mu`.
    pub fn neighbours(&self) -> Vec<[u32; 8]> {
        let n = self.n;
        (0..self.points())
            .map(|p| {
                let idx = self.multi_index(p);
                let mut out = [0u32; 8];
                for mu in 0..4 {
                    let s = self.stride(mu);
                    let up = if idx[mu] + 1 == n { p + s - n * s } else { p + s };
                    let dn = if idx[mu] == 0 { p + n * s - s } else { p - s };
                    out[2 * mu] = up as u32;
                    out[2 * mu + 1] = dn as u32;
                }
                out
            })
            .collect()
    }

    /// Minimal-image displacement `x - c` on the torus.
    pub fn displacement(&self, x: [f64; 4], c: [f64; 4]) -> [f64; 4] {
        let t = self.size;
        let mut d = [0.0; 4];
        for mu in 0..4 {
            let mut v = x[mu] - c[mu];
            v -= t * (v / t).round();
            d[mu] = v;
        }
        d
    }
}

/// Form degrees used by the solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Degree {
    Zero,
    One,
    Two,
    SelfDual,
}

impl Degree {
    /// Number of stored components per point.
    pub fn components(&self) -> usize {
        match self {
            Degree::Zero => 1,
            Degree::One => 4,
            Degree::Two => 6,
            Degree::SelfDual => 3,
        }
    }

    /// Form degree in the exterior algebra.
    pub fn order(&self) -> usize {
        match self {
            Degree::Zero => 0,
            Degree::One => 1,
            Degree::Two | Degree::SelfDual => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Degree::Zero => "zero",
            Degree::One => "one",
            Degree::Two => "two",
            Degree::SelfDual => "self_dual",
        }
    }
}

/// Index pairs of the six 2-form components.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Position of `(mu, nu)` in [`PAIRS`] with the sign of the permutation.
#[inline(always)]
pub fn pair_index(mu: usize, nu: usize) -> Option<(usize, f64)> {
    if mu == nu {
        return None;
    }
    let (a, b, s) = if mu < nu { (mu, nu, 1.0) } else { (nu, mu, -1.0) };
    let k = PAIRS.iter().position(|&p| p == (a, b)).unwrap();
    Some((k, s))
}

/// An ad(P)-valued differential form on a [`Grid`].
///
/// Storage is point-major: `data[(p * components + c) * 3 + a]`.
/// Self-dual forms are stored in the orthonormal basis
/// `(e01 + e23, e02 - e13, e03 + e12) / sqrt(2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdForm {
    pub grid: Grid,
    pub degree: Degree,
    pub data: Vec<f64>,
}

impl AdForm {
    pub fn zeros(grid: Grid, degree: Degree) -> Self {
        AdForm {
            grid,
            degree,
            data: vec![0.0; grid.points() * degree.components() * 3],
        }
    }

    pub fn from_fn(grid: Grid, degree: Degree, f: impl Fn([f64; 4], usize) -> [f64; 3]) -> Self {
        let mut out = Self::zeros(grid, degree);
        let nc = degree.components();
        for p in 0..grid.points() {
            let x = grid.coords(p);
            for c in 0..nc {
                let v = f(x, c);
                out.data[(p * nc + c) * 3..(p * nc + c) * 3 + 3].copy_from_slice(&v);
            }
        }
        out
    }

    pub fn stride(&self) -> usize {
        self.degree.components() * 3
    }

    #[inline(always)]
    pub fn at(&self, p: usize) -> &[f64] {
        let s = self.stride();
        &self.data[p * s..(p + 1) * s]
    }

    #[inline(always)]
    pub fn at_mut(&mut self, p: usize) -> &mut [f64] {
        let s = self.stride();
        &mut self.data[p * s..(p + 1) * s]
    }

    pub fn check_same(&self, o: &AdForm) -> Result<()> {
        if self.grid != o.grid {
            return Err(WeldError::GridMismatch);
        }
        if self.degree != o.degree {
            return Err(WeldError::DegreeMismatch {
                expected: self.degree.name().into(),
                found: o.degree.name().into(),
            });
        }
        Ok(())
    }

    pub fn expect_degree(&self, d: Degree) -> Result<()> {
        if self.degree != d {
            return Err(WeldError::DegreeMismatch {
                expected: d.name().into(),
                found: self.degree.name().into(),
            });
        }
        Ok(())
    }

    /// `self += s * o`.
    pub fn axpy(&mut self, s: f64, o: &AdForm) {
        debug_assert_eq!(self.data.len(), o.data.len());
        for (a, b) in self.data.iter_mut().zip(&o.data) {
            *a += s * b;
        }
    }

    pub fn scaled(&self, s: f64) -> AdForm {
        AdForm {
            grid: self.grid,
            degree: self.degree,
            data: self.data.iter().map(|v| s * v).collect(),
        }
    }

    pub fn add(&self, o: &AdForm) -> AdForm {
        let mut out = self.clone();
        out.axpy(1.0, o);
        out
    }

    pub fn sub(&self, o: &AdForm) -> AdForm {
        let mut out = self.clone();
        out.axpy(-1.0, o);
        out
    }

    /// Euclidean inner product of coefficient vectors, without the volume factor.
    pub fn dot(&self, o: &AdForm) -> f64 {
        self.data.iter().zip(&o.data).map(|(a, b)| a * b).sum()
    }

    /// Pointwise norm at `p`.
    pub fn point_norm(&self, p: usize) -> f64 {
        self.at(p).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Pointwise norms at every grid point.
    pub fn point_norms(&self) -> Vec<f64> {
        (0..self.grid.points()).map(|p| self.point_norm(p)).collect()
    }

    /// Multiplies every point value by a scalar weight.
    pub fn weighted(&self, w: &[f64]) -> AdForm {
        let mut out = self.clone();
        let s = self.stride();
        for (p, chunk) in out.data.chunks_mut(s).enumerate() {
            for v in chunk {
                *v *= w[p];
            }
        }
        out
    }

    /// Multilinear periodic interpolation of all components at an arbitrary point.
    pub fn sample(&self, x: [f64; 4]) -> Vec<f64> {
        let mut out = vec![0.0; self.stride()];
        self.sample_into(x, &mut out);
        out
    }

    pub fn sample_into(&self, x: [f64; 4], out: &mut [f64]) {
        let g = self.grid;
        let n = g.n as i64;
        let h = g.h();
        let mut base = [0usize; 4];
        let mut frac = [0.0; 4];
        for mu in 0..4 {
            let t = x[mu] / h;
            let f = t.floor();
            frac[mu] = t - f;
            base[mu] = (f as i64).rem_euclid(n) as usize;
        }
        out.iter_mut().for_each(|v| *v = 0.0);
        let s = self.stride();
        for corner in 0..16usize {
            let mut w = 1.0;
            let mut idx = [0usize; 4];
            for mu in 0..4 {
                let bit = (corner >> (3 - mu)) & 1;
                w *= if bit == 1 { frac[mu] } else { 1.0 - frac[mu] };
                idx[mu] = (base[mu] + bit) % g.n;
            }
            if w == 0.0 {
                continue;
            }
            let p = g.flat_index(idx);
            for (o, v) in out.iter_mut().zip(&self.data[p * s..(p + 1) * s]) {
                *o += w * v;
            }
        }
    }
}

/// Self-dual coefficients of a full 2-form given as six component slices.
#[inline(always)]
pub fn sd_from_two(f: &[f64], out: &mut [f64]) {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for a in 0..3 {
        out[a] = r * (f[a] + f[15 + a]);
        out[3 + a] = r * (f[3 + a] - f[12 + a]);
        out[6 + a] = r * (f[6 + a] + f[9 + a]);
    }
}

/// Full 2-form components of a self-dual form, the adjoint of [`sd_from_two`].
#[inline(always)]
pub fn two_from_sd(y: &[f64], out: &mut [f64]) {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for a in 0..3 {
        out[a] = r * y[a];
        out[15 + a] = r * y[a];
        out[3 + a] = r * y[3 + a];
        out[12 + a] = -r * y[3 + a];
        out[6 + a] = r * y[6 + a];
        out[9 + a] = r * y[6 + a];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbours_wrap() {
        let g = Grid::new(4, 1.0);
        let nb = g.neighbours();
        let p = g.flat_index([3, 0, 2, 1]);
        assert_eq!(nb[p][0] as usize, g.flat_index([0, 0, 2, 1]));
        assert_eq!(nb[p][3] as usize, g.flat_index([3, 3, 2, 1]));
    }

    #[test]
    fn sample_reproduces_grid_values_and_linear_functions() {
        let g = Grid::new(6, 3.0);
        let f = AdForm::from_fn(g, Degree::Zero, |x, _| [x[0] + 2.0 * x[3], 1.0, -x[1]]);
        let v = f.sample(g.coords(17));
        assert_eq!(&v[..], f.at(17));
        let y = [0.7, 1.1, 0.2, 0.9];
        let v = f.sample(y);
        assert!((v[0] - (y[0] + 2.0 * y[3])).abs() < 1e-12);
        assert!((v[2] + y[1]).abs() < 1e-12);
    }

    #[test]
    fn sd_embedding_is_adjoint() {
        let f: Vec<f64> = (0..18).map(|i| (i as f64 * 0.37).sin()).collect();
        let y: Vec<f64> = (0..9).map(|i| (i as f64 * 1.3).cos()).collect();
        let mut sd = [0.0; 9];
        sd_from_two(&f, &mut sd);
        let mut two = [0.0; 18];
        two_from_sd(&y, &mut two);
        let lhs: f64 = sd.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = two.iter().zip(&f).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-14);
    }
}
