//! Blocks, chains, gluing parameters and the neck transfer maps between charts.

use crate::elliptic::CutoffField;
use crate::error::{Result, WeldError};
use crate::fields::calculus::{curvature_plus, Stencil};
use crate::fields::gauge::{apply_gauge, exponential_gauge, GaugeBall};
use crate::fields::{AdForm, Bpst, BpstGauge, Degree, GroupElement, Window};
use crate::geometry::{neck_jacobian, neck_map, norm, shell_radii, ChartSpec, NeckParams, Side, Vec4};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Background types available to a chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BlockKind {
    Flat,
    /// Singular-gauge BPST instanton with a box window. `center` defaults to the chart centre.
    Bpst {
        scale: f64,
        #[serde(default)]
        center: Option<Vec4>,
        window_inner: f64,
        window_outer: f64,
    },
}

/// A block: chart, marked points and a background in exponential gauge near them.
#[derive(Clone, Debug)]
pub struct GluingDatum {
    pub label: String,
    pub kind: BlockKind,
    pub chart: ChartSpec,
    pub background: AdForm,
    pub nonflat: bool,
}

impl GluingDatum {
    /// Builds the background and puts it in exponential gauge on balls of
    /// radius `r3 + h` about both marked points.
    pub fn build(label: &str, kind: BlockKind, chart: ChartSpec, neck: &NeckParams) -> Result<Self> {
        chart.validate(neck)?;
        let grid = chart.grid();
        let (_, _, _, r3) = shell_radii(neck)?;
        let h = grid.h();
        let (background, nonflat) = match kind {
            BlockKind::Flat => (AdForm::zeros(grid, Degree::One), false),
            BlockKind::Bpst { scale, center, window_inner, window_outer } => {
                let raw = Bpst {
                    center: center.unwrap_or([0.5 * chart.torus_size; 4]),
                    scale,
                    gauge: BpstGauge::Singular,
                    window: Some(Window::Box { inner: window_inner, outer: window_outer }),
                }
                .on_grid(grid);
                let balls = [Side::L, Side::R].map(|s| GaugeBall { center: chart.marked(s), radius: r3 + h, blend: 2.0 * h });
                let g = exponential_gauge(&raw, &balls)?;
                let st = Stencil::new(grid);
                (apply_gauge(&st, &g, &raw)?, true)
            }
        };
        Ok(GluingDatum { label: label.to_string(), kind, chart, background, nonflat })
    }
}

/// The window of blocks and the neck parameters.
#[derive(Clone, Debug)]
pub struct ChainConfig {
    pub neck: NeckParams,
    pub periodic: bool,
    pub catalog: Vec<GluingDatum>,
    /// `blocks[i]` indexes into `catalog`.
    pub blocks: Vec<usize>,
}

impl ChainConfig {
    pub fn window(&self) -> usize {
        self.blocks.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.neck.validate()?;
        let w = self.window();
        if w < 2 {
            return Err(WeldError::Precondition("a chain needs at least two blocks".into()));
        }
        if self.periodic && w % 2 != 0 {
            return Err(WeldError::Precondition(format!("periodic window length {w} must be even")));
        }
        if let Some(&b) = self.blocks.iter().find(|&&b| b >= self.catalog.len()) {
            return Err(WeldError::Precondition(format!("block refers to missing catalog entry {b}")));
        }
        let g0 = self.catalog[0].chart.grid();
        if self.catalog.iter().any(|d| d.chart.grid() != g0) {
            return Err(WeldError::Precondition("all catalog charts must share one grid".into()));
        }
        Ok(())
    }

    pub fn datum(&self, i: usize) -> &GluingDatum {
        &self.catalog[self.blocks[i]]
    }

    /// Number of necks: `W` when periodic, `W - 1` otherwise.
    pub fn necks(&self) -> usize {
        if self.periodic {
            self.window()
        } else {
            self.window() - 1
        }
    }

    /// Neck `k` joins the right point of block `k` to the left point of block `k + 1`.
    pub fn neck_blocks(&self, k: usize) -> (usize, usize) {
        (k, (k + 1) % self.window())
    }

    /// Marked points of block `i` that take part in a neck.
    pub fn glued_points(&self, i: usize) -> Vec<Vec4> {
        let w = self.window();
        let c = &self.datum(i).chart;
        let mut out = Vec::new();
        if self.periodic || i > 0 {
            out.push(c.marked_l);
        }
        if self.periodic || i + 1 < w {
            out.push(c.marked_r);
        }
        out
    }
}

/// One group element per neck.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GluingParameter {
    pub rho: Vec<GroupElement>,
}

impl GluingParameter {
    pub fn identity(necks: usize) -> Self {
        GluingParameter { rho: vec![GroupElement::IDENTITY; necks] }
    }

    /// Haar-random parameter.
    pub fn random(necks: usize, rng: &mut impl Rng) -> Self {
        let rho = (0..necks)
            .map(|_| loop {
                let q: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
                let n2: f64 = q.iter().map(|t| t * t).sum();
                if n2 > 1e-6 && n2 <= 1.0 {
                    break GroupElement(q).normalized();
                }
            })
            .collect();
        GluingParameter { rho }
    }

    /// Componentwise action of central elements `eps[k] = ±1`.
    pub fn center_action(&self, eps: &[bool]) -> Self {
        GluingParameter {
            rho: self.rho.iter().zip(eps).map(|(g, &flip)| if flip { g.neg() } else { *g }).collect(),
        }
    }

    pub fn validate(&self, necks: usize) -> Result<()> {
        if self.rho.len() != necks {
            return Err(WeldError::Precondition(format!("{} gluing elements for {necks} necks", self.rho.len())));
        }
        for (k, g) in self.rho.iter().enumerate() {
            let n = g.0.iter().map(|t| t * t).sum::<f64>().sqrt();
            if (n - 1.0).abs() > 1e-12 {
                return Err(WeldError::Precondition(format!("rho[{k}] has norm {n}")));
            }
        }
        Ok(())
    }
}

/// Grid point of a target block with the matching source location across a neck.
#[derive(Clone, Copy, Debug)]
pub struct TransferPoint {
    pub target: u32,
    /// `eta`, displacement from the target marked point.
    pub eta: Vec4,
    /// Position in the source chart.
    pub source: Vec4,
    /// `J[nu][mu] = d xi^nu / d eta^mu`.
    pub jac: [[f64; 4]; 4],
}

/// Pull-back data from a source block to a target block across one neck.
#[derive(Clone, Debug)]
pub struct Transfer {
    pub source_block: usize,
    pub target_block: usize,
    pub source_center: Vec4,
    pub target_center: Vec4,
    /// Conjugation applied to transported values.
    pub conj: GroupElement,
    pub points: Vec<TransferPoint>,
}

impl Transfer {
    /// Target points with `r0 < |eta| < r3`.
    pub fn build(
        cfg: &ChainConfig,
        source_block: usize,
        source_side: Side,
        target_block: usize,
        target_side: Side,
        conj: GroupElement,
    ) -> Result<Self> {
        let (r0, _, _, r3) = shell_radii(&cfg.neck)?;
        let sc = cfg.datum(source_block).chart.marked(source_side);
        let tchart = cfg.datum(target_block).chart;
        let tc = tchart.marked(target_side);
        let grid = tchart.grid();
        let lam = cfg.neck.lambda;
        let axis = cfg.neck.reflection_axis;
        let mut points = Vec::new();
        for p in 0..grid.points() {
            let eta = grid.displacement(grid.coords(p), tc);
            let r = norm(&eta);
            if r <= r0 || r >= r3 {
                continue;
            }
            let xi = neck_map(eta, lam, axis)?;
            let source = [0, 1, 2, 3].map(|m| sc[m] + xi[m]);
            points.push(TransferPoint { target: p as u32, eta, source, jac: neck_jacobian(eta, lam, axis) });
        }
        Ok(Transfer { source_block, target_block, source_center: sc, target_center: tc, conj, points })
    }

    /// Value of `Ad_conj Phi^* f` at a transfer point, with `f` a sampled 1-form
    /// scaled by `weight(xi)` at the source.
    pub fn pull_one_form(&self, f: &AdForm, tp: &TransferPoint, weight: f64, out: &mut [f64; 12]) {
        let v = f.sample(tp.source);
        let m = self.conj.adjoint_matrix();
        for mu in 0..4 {
            let mut acc = [0.0; 3];
            for nu in 0..4 {
                let j = tp.jac[nu][mu];
                for c in 0..3 {
                    acc[c] += v[3 * nu + c] * j;
                }
            }
            for r in 0..3 {
                out[3 * mu + r] = weight * (m[r][0] * acc[0] + m[r][1] * acc[1] + m[r][2] * acc[2]);
            }
        }
    }
}

/// Per-block masks derived from the chain geometry.
#[derive(Clone, Debug)]
pub struct BlockGeometry {
    /// Grid points at distance `< r2` from a glued marked point; holds the unresolved neck core.
    pub core: Vec<bool>,
    /// Complement of `core`: rows where the equation is imposed and error is measured.
    pub resolved: Vec<bool>,
    /// Resolved points within `r3 + h` of a glued marked point.
    pub shell: Vec<bool>,
    /// Product cutoff about the glued marked points.
    pub psi: CutoffField,
}

impl BlockGeometry {
    pub fn build(cfg: &ChainConfig, i: usize) -> Result<Self> {
        let (_, _, r2, r3) = shell_radii(&cfg.neck)?;
        let grid = cfg.datum(i).chart.grid();
        let h = grid.h();
        let centers = cfg.glued_points(i);
        let dist: Vec<f64> = (0..grid.points())
            .map(|p| {
                let x = grid.coords(p);
                centers.iter().map(|c| norm(&grid.displacement(x, *c))).fold(f64::INFINITY, f64::min)
            })
            .collect();
        let core: Vec<bool> = dist.iter().map(|&d| d < r2).collect();
        let resolved: Vec<bool> = core.iter().map(|c| !c).collect();
        let shell: Vec<bool> = dist.iter().map(|&d| d >= r2 && d < r3 + h).collect();
        let psi = CutoffField::around(grid, &centers, &cfg.neck)?;
        Ok(BlockGeometry { core, resolved, shell, psi })
    }
}

/// Chain, geometry and transfer maps for one gluing parameter.
#[derive(Clone, Debug)]
pub struct Assembly {
    pub config: ChainConfig,
    pub rho: GluingParameter,
    pub stencil: Stencil,
    pub geometry: Vec<BlockGeometry>,
    /// `F^+` of each background on the grid.
    pub background_plus: Vec<AdForm>,
    /// For each neck `k`: transfer from block `k` to `k + 1`, and back.
    pub forward: Vec<Transfer>,
    pub backward: Vec<Transfer>,
}

impl Assembly {
    pub fn new(config: ChainConfig, rho: GluingParameter) -> Result<Self> {
        config.validate()?;
        rho.validate(config.necks())?;
        let grid = config.datum(0).chart.grid();
        let stencil = Stencil::new(grid);
        let w = config.window();
        let geometry = (0..w).map(|i| BlockGeometry::build(&config, i)).collect::<Result<Vec<_>>>()?;
        let background_plus = (0..w)
            .map(|i| curvature_plus(&stencil, &config.datum(i).background))
            .collect::<Result<Vec<_>>>()?;
        let mut forward = Vec::new();
        let mut backward = Vec::new();
        for k in 0..config.necks() {
            let (i, j) = config.neck_blocks(k);
            let g = rho.rho[k];
            forward.push(Transfer::build(&config, i, Side::R, j, Side::L, g)?);
            backward.push(Transfer::build(&config, j, Side::L, i, Side::R, g.inverse())?);
        }
        Ok(Assembly { config, rho, stencil, geometry, background_plus, forward, backward })
    }

    pub fn window(&self) -> usize {
        self.config.window()
    }

    /// Necks touching block `i` as `(neck index, block is the source of forward)`.
    pub fn necks_of(&self, i: usize) -> Vec<(usize, bool)> {
        (0..self.config.necks())
            .filter_map(|k| {
                let (a, b) = self.config.neck_blocks(k);
                if a == i {
                    Some((k, true))
                } else if b == i {
                    Some((k, false))
                } else {
                    None
                }
            })
            .collect()
    }
}
