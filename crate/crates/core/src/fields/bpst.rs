//! The BPST instanton, transplanted onto a periodic chart.

use super::algebra::{quat_mul, SQRT2};
use super::form::{AdForm, Degree, Grid};
use serde::{Deserialize, Serialize};

/// A charge-one anti-self-dual instanton centred in a chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bpst {
    pub center: [f64; 4],
    pub scale: f64,
    #[serde(default)]
    pub gauge: BpstGauge,
    /// Cut-off making the field periodic. `None` leaves a jump at the chart seam.
    pub window: Option<Window>,
}

/// Regular gauge decays like `1/r`; singular gauge decays like `s^2/r^3` but
/// is singular at the centre.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BpstGauge {
    #[default]
    Regular,
    Singular,
}

/// Smoothstep window from 1 at `inner` to 0 at `outer`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Window {
    /// Applied to each coordinate of `x - center` and multiplied.
    Box { inner: f64, outer: f64 },
    /// Applied to the torus distance `|x - center|`.
    Ball { inner: f64, outer: f64 },
}

fn ramp(a: f64, inner: f64, outer: f64) -> f64 {
    if a <= inner {
        1.0
    } else if a >= outer {
        0.0
    } else {
        let s = (a - inner) / (outer - inner);
        1.0 - s * s * (3.0 - 2.0 * s)
    }
}

impl Bpst {
    /// Connection coefficients at displacement `y` from the centre.
    pub fn potential(&self, y: [f64; 4]) -> [[f64; 3]; 4] {
        let r2 = y.iter().map(|t| t * t).sum::<f64>();
        let s2 = self.scale * self.scale;
        let mut out = [[0.0; 3]; 4];
        if self.gauge == BpstGauge::Singular && r2 == 0.0 {
            return out;
        }
        for (mu, o) in out.iter_mut().enumerate() {
            let mut e = [0.0; 4];
            e[mu] = 1.0;
            let (q, den) = match self.gauge {
                BpstGauge::Regular => (quat_mul(&[y[0], -y[1], -y[2], -y[3]], &e), r2 + s2),
                BpstGauge::Singular => {
                    let q = quat_mul(&y, &[e[0], -e[1], -e[2], -e[3]]);
                    (q.map(|t| s2 * t), r2 * (r2 + s2))
                }
            };
            *o = [SQRT2 * q[1] / den, SQRT2 * q[2] / den, SQRT2 * q[3] / den];
        }
        out
    }

    /// Exact energy density `48 s^4 / (r^2 + s^2)^4`.
    pub fn density(&self, r: f64) -> f64 {
        let s2 = self.scale * self.scale;
        48.0 * s2 * s2 / (r * r + s2).powi(4)
    }

    pub fn window_at(&self, y: [f64; 4]) -> f64 {
        match self.window {
            None => 1.0,
            Some(Window::Box { inner, outer }) => y.iter().map(|t| ramp(t.abs(), inner, outer)).product(),
            Some(Window::Ball { inner, outer }) => {
                ramp(y.iter().map(|t| t * t).sum::<f64>().sqrt(), inner, outer)
            }
        }
    }

    /// Samples the (windowed) potential on a grid.
    pub fn on_grid(&self, grid: Grid) -> AdForm {
        AdForm::from_fn(grid, Degree::One, |x, mu| {
            let y = grid.displacement(x, self.center);
            let w = self.window_at(y);
            self.potential(y)[mu].map(|v| w * v)
        })
    }
}

/// Samples a BPST background on `grid`.
pub fn bpst_background(grid: Grid, center: [f64; 4], scale: f64, window: Option<Window>) -> AdForm {
    Bpst { center, scale, gauge: BpstGauge::Regular, window }.on_grid(grid)
}
