//! Covariant exterior calculus with centred differences on the periodic lattice.

use super::algebra::{bracket_acc, SQRT2};
use super::form::{pair_index, sd_from_two, two_from_sd, AdForm, Degree, Grid, PAIRS};
use crate::error::{Result, WeldError};
use rayon::prelude::*;

/// Cached neighbour table for a grid.
#[derive(Clone, Debug)]
pub struct Stencil {
    pub grid: Grid,
    pub nb: Vec<[u32; 8]>,
}

impl Stencil {
    pub fn new(grid: Grid) -> Self {
        Stencil { grid, nb: grid.neighbours() }
    }

    /// Inverse of twice the spacing, the centred-difference weight.
    pub fn w(&self) -> f64 {
        0.5 / self.grid.h()
    }
}

fn map_points(out: &mut AdForm, f: impl Fn(usize, &mut [f64]) + Sync + Send) {
    let s = out.stride();
    out.data
        .par_chunks_mut(s)
        .enumerate()
        .for_each(|(p, o)| f(p, o));
}

/// Graded bracket `[a ∧ b]` for forms of degree zero, one or two.
///
/// For two 1-forms this is `[a_mu, b_nu] - [a_nu, b_mu]`, so `F = dA + [A ∧ A] / 2`.
pub fn bracket_wedge(a: &AdForm, b: &AdForm) -> Result<AdForm> {
    if a.grid != b.grid {
        return Err(WeldError::GridMismatch);
    }
    use Degree::*;
    let out_deg = match (a.degree, b.degree) {
        (Zero, d) | (d, Zero) => d,
        (One, One) => Two,
        (x, y) => {
            return Err(WeldError::DegreeMismatch {
                expected: "total degree at most two".into(),
                found: format!("{} and {}", x.name(), y.name()),
            })
        }
    };
    let mut out = AdForm::zeros(a.grid, out_deg);
    let (da, db) = (a.degree, b.degree);
    map_points(&mut out, |p, o| {
        let (x, y) = (a.at(p), b.at(p));
        match (da, db) {
            (Zero, _) => {
                for c in 0..db.components() {
                    bracket_acc(&mut o[3 * c..3 * c + 3], 1.0, &x[0..3], &y[3 * c..3 * c + 3]);
                }
            }
            (_, Zero) => {
                for c in 0..da.components() {
                    bracket_acc(&mut o[3 * c..3 * c + 3], 1.0, &x[3 * c..3 * c + 3], &y[0..3]);
                }
            }
            _ => {
                for (k, &(m, n)) in PAIRS.iter().enumerate() {
                    let oo = &mut o[3 * k..3 * k + 3];
                    bracket_acc(oo, 1.0, &x[3 * m..3 * m + 3], &y[3 * n..3 * n + 3]);
                    bracket_acc(oo, -1.0, &x[3 * n..3 * n + 3], &y[3 * m..3 * m + 3]);
                }
            }
        }
    });
    Ok(out)
}

/// Self-dual projection `(1 + *) / 2` of a 2-form, returned in self-dual storage.
///
/// A form already in self-dual storage is returned unchanged.
pub fn sd_project(f: &AdForm) -> Result<AdForm> {
    match f.degree {
        Degree::SelfDual => Ok(f.clone()),
        Degree::Two => {
            let mut out = AdForm::zeros(f.grid, Degree::SelfDual);
            map_points(&mut out, |p, o| sd_from_two(f.at(p), o));
            Ok(out)
        }
        d => Err(WeldError::DegreeMismatch {
            expected: "two".into(),
            found: d.name().into(),
        }),
    }
}

/// Anti-self-dual part `(1 - *) / 2` as a full 2-form.
pub fn asd_part(f: &AdForm) -> Result<AdForm> {
    let sd = sd_project(f)?;
    Ok(f.sub(&sd_to_two(&sd)))
}

/// Embeds a self-dual form into full 2-form storage.
pub fn sd_to_two(f: &AdForm) -> AdForm {
    let mut out = AdForm::zeros(f.grid, Degree::Two);
    map_points(&mut out, |p, o| two_from_sd(f.at(p), o));
    out
}

/// Hodge star on full 2-forms.
pub fn hodge_star(f: &AdForm) -> Result<AdForm> {
    f.expect_degree(Degree::Two)?;
    // *e01 = e23, *e02 = -e13, *e03 = e12 and the reverse maps
    const MAP: [(usize, f64); 6] = [(5, 1.0), (4, -1.0), (3, 1.0), (2, 1.0), (1, -1.0), (0, 1.0)];
    let mut out = AdForm::zeros(f.grid, Degree::Two);
    map_points(&mut out, |p, o| {
        let x = f.at(p);
        for (k, &(src, s)) in MAP.iter().enumerate() {
            for a in 0..3 {
                o[3 * k + a] = s * x[3 * src + a];
            }
        }
    });
    Ok(out)
}

/// Curvature `F = dA + [A ∧ A] / 2`.
pub fn curvature(st: &Stencil, a: &AdForm) -> Result<AdForm> {
    a.expect_degree(Degree::One)?;
    let w = st.w();
    let mut out = AdForm::zeros(a.grid, Degree::Two);
    map_points(&mut out, |p, o| {
        let nb = &st.nb[p];
        let x = a.at(p);
        for (k, &(m, n)) in PAIRS.iter().enumerate() {
            let up_m = a.at(nb[2 * m] as usize);
            let dn_m = a.at(nb[2 * m + 1] as usize);
            let up_n = a.at(nb[2 * n] as usize);
            let dn_n = a.at(nb[2 * n + 1] as usize);
            let oo = &mut o[3 * k..3 * k + 3];
            for c in 0..3 {
                oo[c] = w * (up_m[3 * n + c] - dn_m[3 * n + c]) - w * (up_n[3 * m + c] - dn_n[3 * m + c]);
            }
            bracket_acc(oo, 1.0, &x[3 * m..3 * m + 3], &x[3 * n..3 * n + 3]);
        }
    });
    Ok(out)
}

/// Self-dual curvature `F^+`.
pub fn curvature_plus(st: &Stencil, a: &AdForm) -> Result<AdForm> {
    a.expect_degree(Degree::One)?;
    let w = st.w();
    let mut out = AdForm::zeros(a.grid, Degree::SelfDual);
    map_points(&mut out, |p, o| {
        let mut full = [0.0; 18];
        curvature_at(st, a, p, w, &mut full);
        sd_from_two(&full, o);
    });
    Ok(out)
}

#[inline(always)]
fn curvature_at(st: &Stencil, a: &AdForm, p: usize, w: f64, full: &mut [f64; 18]) {
    let nb = &st.nb[p];
    let x = a.at(p);
    for (k, &(m, n)) in PAIRS.iter().enumerate() {
        let up_m = a.at(nb[2 * m] as usize);
        let dn_m = a.at(nb[2 * m + 1] as usize);
        let up_n = a.at(nb[2 * n] as usize);
        let dn_n = a.at(nb[2 * n + 1] as usize);
        let oo = &mut full[3 * k..3 * k + 3];
        for c in 0..3 {
            oo[c] = w * (up_m[3 * n + c] - dn_m[3 * n + c]) - w * (up_n[3 * m + c] - dn_n[3 * m + c]);
        }
        bracket_acc(oo, 1.0, &x[3 * m..3 * m + 3], &x[3 * n..3 * n + 3]);
    }
}

/// Covariant exterior derivative `d_A` on 0-forms and 1-forms.
pub fn cov_d(st: &Stencil, a: &AdForm, f: &AdForm) -> Result<AdForm> {
    a.expect_degree(Degree::One)?;
    let w = st.w();
    match f.degree {
        Degree::Zero => {
            let mut out = AdForm::zeros(f.grid, Degree::One);
            map_points(&mut out, |p, o| {
                let nb = &st.nb[p];
                let x = a.at(p);
                let s = f.at(p);
                for mu in 0..4 {
                    let up = f.at(nb[2 * mu] as usize);
                    let dn = f.at(nb[2 * mu + 1] as usize);
                    let oo = &mut o[3 * mu..3 * mu + 3];
                    for c in 0..3 {
                        oo[c] = w * (up[c] - dn[c]);
                    }
                    bracket_acc(oo, 1.0, &x[3 * mu..3 * mu + 3], s);
                }
            });
            Ok(out)
        }
        Degree::One => {
            let mut out = AdForm::zeros(f.grid, Degree::Two);
            map_points(&mut out, |p, o| {
                let nb = &st.nb[p];
                let x = a.at(p);
                let b = f.at(p);
                for (k, &(m, n)) in PAIRS.iter().enumerate() {
                    let up_m = f.at(nb[2 * m] as usize);
                    let dn_m = f.at(nb[2 * m + 1] as usize);
                    let up_n = f.at(nb[2 * n] as usize);
                    let dn_n = f.at(nb[2 * n + 1] as usize);
                    let oo = &mut o[3 * k..3 * k + 3];
                    for c in 0..3 {
                        oo[c] = w * (up_m[3 * n + c] - dn_m[3 * n + c]) - w * (up_n[3 * m + c] - dn_n[3 * m + c]);
                    }
                    bracket_acc(oo, 1.0, &x[3 * m..3 * m + 3], &b[3 * n..3 * n + 3]);
                    bracket_acc(oo, -1.0, &x[3 * n..3 * n + 3], &b[3 * m..3 * m + 3]);
                }
            });
            Ok(out)
        }
        d => Err(WeldError::DegreeMismatch {
            expected: "zero or one".into(),
            found: d.name().into(),
        }),
    }
}

/// `d_A^+ = P^+ d_A` on 1-forms, in self-dual storage.
pub fn cov_d_plus(st: &Stencil, a: &AdForm, b: &AdForm) -> Result<AdForm> {
    b.expect_degree(Degree::One)?;
    sd_project(&cov_d(st, a, b)?)
}

/// Formal adjoint `d_A^*` of [`cov_d`], on 1-forms and 2-forms.
///
/// Exact adjoint of the discrete operator under the coefficient inner product.
pub fn cov_d_star(st: &Stencil, a: &AdForm, f: &AdForm) -> Result<AdForm> {
    a.expect_degree(Degree::One)?;
    let w = st.w();
    match f.degree {
        Degree::One => {
            let mut out = AdForm::zeros(f.grid, Degree::Zero);
            map_points(&mut out, |p, o| {
                let nb = &st.nb[p];
                let x = a.at(p);
                let b = f.at(p);
                for mu in 0..4 {
                    let up = f.at(nb[2 * mu] as usize);
                    let dn = f.at(nb[2 * mu + 1] as usize);
                    for c in 0..3 {
                        o[c] -= w * (up[3 * mu + c] - dn[3 * mu + c]);
                    }
                    bracket_acc(o, -1.0, &x[3 * mu..3 * mu + 3], &b[3 * mu..3 * mu + 3]);
                }
            });
            Ok(out)
        }
        Degree::Two | Degree::SelfDual => {
            let two = if f.degree == Degree::SelfDual { sd_to_two(f) } else { f.clone() };
            let mut out = AdForm::zeros(f.grid, Degree::One);
            map_points(&mut out, |p, o| {
                let nb = &st.nb[p];
                let x = a.at(p);
                let y = two.at(p);
                for nu in 0..4 {
                    let oo = &mut o[3 * nu..3 * nu + 3];
                    for mu in 0..4 {
                        let Some((k, s)) = pair_index(mu, nu) else { continue };
                        let up = two.at(nb[2 * mu] as usize);
                        let dn = two.at(nb[2 * mu + 1] as usize);
                        for c in 0..3 {
                            oo[c] -= s * w * (up[3 * k + c] - dn[3 * k + c]);
                        }
                        bracket_acc(oo, -s, &x[3 * mu..3 * mu + 3], &y[3 * k..3 * k + 3]);
                    }
                }
            });
            Ok(out)
        }
        d => Err(WeldError::DegreeMismatch {
            expected: "one or two".into(),
            found: d.name().into(),
        }),
    }
}

/// Quadratic term `(b ∧ b)^+` with `(b ∧ b)_{mu nu} = [b_mu, b_nu]`.
pub fn quadratic_plus(b: &AdForm) -> Result<AdForm> {
    b.expect_degree(Degree::One)?;
    let mut out = AdForm::zeros(b.grid, Degree::SelfDual);
    map_points(&mut out, |p, o| {
        let x = b.at(p);
        let mut full = [0.0; 18];
        for (k, &(m, n)) in PAIRS.iter().enumerate() {
            bracket_acc(&mut full[3 * k..3 * k + 3], 1.0, &x[3 * m..3 * m + 3], &x[3 * n..3 * n + 3]);
        }
        sd_from_two(&full, o);
    });
    Ok(out)
}

/// Covariant derivative of every component, `nabla_mu f = delta_mu f + [A_mu, f]`.
///
/// Returns a vector of four forms of the same degree as `f`.
pub fn covariant_gradient(st: &Stencil, a: &AdForm, f: &AdForm) -> Result<[AdForm; 4]> {
    a.expect_degree(Degree::One)?;
    let w = st.w();
    let nc = f.degree.components();
    let mk = |mu: usize| {
        let mut out = AdForm::zeros(f.grid, f.degree);
        map_points(&mut out, |p, o| {
            let nb = &st.nb[p];
            let up = f.at(nb[2 * mu] as usize);
            let dn = f.at(nb[2 * mu + 1] as usize);
            let x = &a.at(p)[3 * mu..3 * mu + 3];
            let v = f.at(p);
            for c in 0..nc {
                for k in 0..3 {
                    o[3 * c + k] = w * (up[3 * c + k] - dn[3 * c + k]);
                }
                bracket_acc(&mut o[3 * c..3 * c + 3], 1.0, x, &v[3 * c..3 * c + 3]);
            }
        });
        out
    };
    Ok([mk(0), mk(1), mk(2), mk(3)])
}

/// Bianchi residual `d_A F` of the lattice curvature.
///
/// The 3-form is returned as a 1-form whose component `rho` holds the cyclic
/// sum over the three directions other than `rho`. It vanishes in the continuum.
pub fn bianchi_residual(st: &Stencil, a: &AdForm) -> Result<AdForm> {
    let f = curvature(st, a)?;
    let grad = covariant_gradient(st, a, &f)?;
    let mut out = AdForm::zeros(a.grid, Degree::One);
    map_points(&mut out, |p, o| {
        for rho in 0..4 {
            let t: Vec<usize> = (0..4).filter(|&m| m != rho).collect();
            let oo = &mut o[3 * rho..3 * rho + 3];
            for (l, m, n) in [(t[0], t[1], t[2]), (t[1], t[2], t[0]), (t[2], t[0], t[1])] {
                let (k, s) = pair_index(m, n).expect("distinct directions");
                let g = &grad[l].at(p)[3 * k..3 * k + 3];
                for c in 0..3 {
                    oo[c] += s * g[c];
                }
            }
        }
    });
    Ok(out)
}

/// Scales a coefficient triple by `sqrt(2)`; used when converting quaternion vectors.
#[inline(always)]
pub fn to_coeffs(v: [f64; 3]) -> [f64; 3] {
    v.map(|t| SQRT2 * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_form(g: Grid, d: Degree, seed: u64) -> AdForm {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut f = AdForm::zeros(g, d);
        f.data.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        f
    }

    #[test]
    fn adjointness_on_zero_and_one_forms() {
        let g = Grid::new(6, 3.0);
        let st = Stencil::new(g);
        let a = random_form(g, Degree::One, 1);
        let s = random_form(g, Degree::Zero, 2);
        let b = random_form(g, Degree::One, 3);
        let lhs = cov_d(&st, &a, &s).unwrap().dot(&b);
        let rhs = s.dot(&cov_d_star(&st, &a, &b).unwrap());
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));

        let y = random_form(g, Degree::SelfDual, 4);
        let lhs = cov_d_plus(&st, &a, &b).unwrap().dot(&y);
        let rhs = b.dot(&cov_d_star(&st, &a, &y).unwrap());
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn curvature_expands_quadratically() {
        let g = Grid::new(5, 2.0);
        let st = Stencil::new(g);
        let a = random_form(g, Degree::One, 5);
        let b = random_form(g, Degree::One, 6);
        let lhs = curvature(&st, &a.add(&b)).unwrap();
        let mut rhs = curvature(&st, &a).unwrap();
        rhs.axpy(1.0, &cov_d(&st, &a, &b).unwrap());
        rhs.axpy(0.5, &bracket_wedge(&b, &b).unwrap());
        let err = lhs.sub(&rhs).data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-12);
    }

    #[test]
    fn hodge_star_squares_to_identity() {
        let g = Grid::new(3, 1.0);
        let f = random_form(g, Degree::Two, 7);
        let ff = hodge_star(&hodge_star(&f).unwrap()).unwrap();
        assert_eq!(f, ff);
        let sd = sd_to_two(&sd_project(&f).unwrap());
        let star = hodge_star(&sd).unwrap();
        let err = sd.sub(&star).data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-15);
    }
}
