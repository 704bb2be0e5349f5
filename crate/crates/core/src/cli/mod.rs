//! Scenario files and the batch subcommands behind the `weld` binary.

use crate::error::{Result, WeldError};
use crate::fields::dump::write_dump;
use crate::fields::GroupElement;
use crate::geometry::{ChartSpec, NeckParams};
use crate::moduli::{self, ProbeConfig};
use crate::welding::{
    asd_residual, compatibility_check, energy_ledger, weld, BlockKind, ChainConfig, GluingDatum, GluingParameter,
    WeldConfig, WeldRun,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Scenario schema version understood by this build.
pub const SCENARIO_VERSION: u32 = 1;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "WELD_OUT_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogEntry {
    pub label: String,
    pub background: BlockKind,
}

/// How the gluing parameter is chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RhoSpec {
    Identity,
    /// Haar-random, drawn from the scenario seed.
    Random,
    /// Unit quaternions `[w, x, y, z]`, one per neck.
    Explicit { elements: Vec<[f64; 4]> },
    /// `of` with the entries at `flips` multiplied by `-1`.
    CenterTwist { of: Box<RhoSpec>, flips: Vec<usize> },
    /// `of` with entry `neck` multiplied by a rotation of `angle` about the first axis.
    Rotate { of: Box<RhoSpec>, neck: usize, angle: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PassLimits {
    pub max_passes: usize,
    pub target: f64,
}

impl Default for PassLimits {
    fn default() -> Self {
        PassLimits { max_passes: 30, target: 1e-6 }
    }
}

/// Settings used only by the probe subcommands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSettings {
    /// Second parameter for `lipschitz`.
    pub rho_alt: Option<RhoSpec>,
    /// Interior geodesic samples for the derivative trace.
    pub samples: usize,
    /// Random center patterns tried by `equiv`.
    pub center_patterns: usize,
    /// Non-central rotation angle applied on neck 0 by `equiv`.
    pub twist_angle: f64,
    /// Draws for `lemma`.
    pub lemma_draws: usize,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        ProbeSettings {
            rho_alt: None,
            samples: 0,
            center_patterns: 10,
            twist_angle: std::f64::consts::FRAC_PI_4,
            lemma_draws: 10_000,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSettings {
    pub dir: Option<PathBuf>,
    /// Write per-block field dumps after `weld`.
    pub dump_fields: bool,
}

/// A complete run description. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    pub chart: ChartSpec,
    pub neck: NeckParams,
    #[serde(default = "default_true")]
    pub periodic: bool,
    pub catalog: Vec<CatalogEntry>,
    /// Catalog labels, one per block of the window.
    pub blocks: Vec<String>,
    pub rho: RhoSpec,
    #[serde(default, skip_serializing)]
    pub solver: WeldConfig,
    #[serde(default)]
    pub passes: PassLimits,
    #[serde(default)]
    pub probe: ProbeSettings,
    #[serde(default)]
    pub output: OutputSettings,
}

fn default_true() -> bool {
    true
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| WeldError::Scenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Checks every precondition that does not need field computations.
    pub fn validate(&self) -> Result<()> {
        if self.version != SCENARIO_VERSION {
            return Err(WeldError::Scenario(format!(
                "version {} is not supported (expected {SCENARIO_VERSION})",
                self.version
            )));
        }
        self.neck.validate()?;
        self.chart.validate(&self.neck)?;
        if self.catalog.is_empty() {
            return Err(WeldError::Scenario("catalog is empty".into()));
        }
        for (i, e) in self.catalog.iter().enumerate() {
            if self.catalog[..i].iter().any(|o| o.label == e.label) {
                return Err(WeldError::Scenario(format!("duplicate catalog label {:?}", e.label)));
            }
            if let BlockKind::Bpst { scale, window_inner, window_outer, .. } = e.background {
                if !(scale > 0.0) {
                    return Err(WeldError::Scenario(format!("{}: scale must be positive", e.label)));
                }
                if !(window_inner < window_outer && window_outer <= 0.5 * self.chart.torus_size) {
                    return Err(WeldError::Scenario(format!(
                        "{}: window must satisfy inner < outer <= half the torus size",
                        e.label
                    )));
                }
            }
        }
        for b in &self.blocks {
            self.catalog_index(b)?;
        }
        let w = self.blocks.len();
        if w < 2 {
            return Err(WeldError::Scenario("a chain needs at least two blocks".into()));
        }
        if self.periodic && w % 2 != 0 {
            return Err(WeldError::Scenario(format!("periodic window length {w} must be even")));
        }
        if self.passes.target < 0.0 {
            return Err(WeldError::Scenario("target must be non-negative".into()));
        }
        let necks = self.necks();
        self.rho_from(&self.rho, necks, &mut self.rng())?;
        if let Some(alt) = &self.probe.rho_alt {
            self.rho_from(alt, necks, &mut self.rng())?;
        }
        Ok(())
    }

    fn catalog_index(&self, label: &str) -> Result<usize> {
        self.catalog
            .iter()
            .position(|e| e.label == label)
            .ok_or_else(|| WeldError::Scenario(format!("block label {label:?} is not in the catalog")))
    }

    pub fn necks(&self) -> usize {
        if self.periodic {
            self.blocks.len()
        } else {
            self.blocks.len() - 1
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// Builds the backgrounds and the chain.
    pub fn chain(&self) -> Result<ChainConfig> {
        let catalog = self
            .catalog
            .iter()
            .map(|e| GluingDatum::build(&e.label, e.background, self.chart, &self.neck))
            .collect::<Result<Vec<_>>>()?;
        let blocks = self.blocks.iter().map(|b| self.catalog_index(b)).collect::<Result<Vec<_>>>()?;
        let cfg = ChainConfig { neck: self.neck, periodic: self.periodic, catalog, blocks };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn rho_from(&self, spec: &RhoSpec, necks: usize, rng: &mut ChaCha8Rng) -> Result<GluingParameter> {
        let g = match spec {
            RhoSpec::Identity => GluingParameter::identity(necks),
            RhoSpec::Random => GluingParameter::random(necks, rng),
            RhoSpec::Explicit { elements } => GluingParameter { rho: elements.iter().map(|q| GroupElement(*q)).collect() },
            RhoSpec::CenterTwist { of, flips } => {
                let base = self.rho_from(of, necks, rng)?;
                if let Some(&k) = flips.iter().find(|&&k| k >= necks) {
                    return Err(WeldError::Scenario(format!("center twist on missing neck {k}")));
                }
                let eps: Vec<bool> = (0..necks).map(|k| flips.contains(&k)).collect();
                base.center_action(&eps)
            }
            RhoSpec::Rotate { of, neck, angle } => {
                let mut base = self.rho_from(of, necks, rng)?;
                if *neck >= necks {
                    return Err(WeldError::Scenario(format!("rotation on missing neck {neck}")));
                }
                base.rho[*neck] = GroupElement::from_axis_angle([1.0, 0.0, 0.0], *angle) * base.rho[*neck];
                base
            }
        };
        g.validate(necks)?;
        Ok(g)
    }

    /// The main gluing parameter, drawn from a fresh seeded generator.
    pub fn rho(&self) -> Result<GluingParameter> {
        self.rho_from(&self.rho, self.necks(), &mut self.rng())
    }

    pub fn probe_config(&self) -> ProbeConfig {
        ProbeConfig { weld: self.solver, max_passes: self.passes.max_passes, target: self.passes.target }
    }
}

/// The batch subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Weld,
    Decay,
    Lemma,
    Lipschitz,
    Equiv,
    Energy,
    Dump,
}

/// Command-line overrides applied on top of a scenario.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub max_passes: Option<usize>,
    pub target: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, s: &mut Scenario) {
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(out) = &self.out {
            s.output.dir = Some(out.clone());
        }
        if let Some(m) = self.max_passes {
            s.passes.max_passes = m;
        }
        if let Some(t) = self.target {
            s.passes.target = t;
        }
    }
}

/// What a subcommand produced.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    /// Human-readable lines for standard output.
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
    pub pass: bool,
}

fn out_dir(s: &Scenario) -> Result<PathBuf> {
    let dir = s.output.dir.clone().unwrap_or_else(|| PathBuf::from("weld-out"));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T, out: &mut Outcome) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value)? + "\n")?;
    out.files.push(path);
    Ok(())
}

fn run_weld(s: &Scenario) -> Result<WeldRun> {
    weld(s.chain()?, s.rho()?, s.passes.max_passes, s.passes.target, &s.solver)
}

/// Summary written next to a decay trace.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeldSummary {
    pub converged: bool,
    pub passes: usize,
    pub delta0: f64,
    pub delta_final: f64,
    pub floor: f64,
    pub max_ratio: Option<f64>,
    pub max_support_violation: f64,
    pub asd_residual: f64,
    pub compatibility: crate::welding::CompatibilityReport,
}

fn summarize(run: &WeldRun) -> Result<WeldSummary> {
    let t = &run.trace;
    let ratios = t.records.iter().filter_map(|r| r.ratio);
    Ok(WeldSummary {
        converged: t.converged,
        passes: run.connection.pass,
        delta0: t.delta0(),
        delta_final: t.last().map_or(0.0, |r| r.delta),
        floor: t.floor,
        max_ratio: ratios.reduce(f64::max),
        max_support_violation: t.records.iter().map(|r| r.support_violation).fold(0.0, f64::max),
        asd_residual: asd_residual(&run.assembly, &run.connection)?,
        compatibility: compatibility_check(&run.assembly, &run.connection)?,
    })
}

fn dump_fields(run: &WeldRun, dir: &Path, out: &mut Outcome) -> Result<()> {
    for i in 0..run.assembly.window() {
        let label = &run.assembly.config.datum(i).label;
        let (c, j) = write_dump(&run.connection.a[i], &format!("a_{i} ({label})"), &dir.join(format!("a_{i}")))?;
        out.files.extend([c, j]);
        let (c, j) =
            write_dump(&run.assembly.config.datum(i).background, &format!("A_{i} ({label})"), &dir.join(format!("A_{i}")))?;
        out.files.extend([c, j]);
    }
    Ok(())
}

fn decay_outcome(s: &Scenario, dumps: bool) -> Result<Outcome> {
    let run = run_weld(s)?;
    let dir = out_dir(s)?;
    let mut out = Outcome::default();
    let trace = run.trace.to_json_lines()?;
    let path = dir.join("trace.jsonl");
    std::fs::write(&path, &trace)?;
    out.files.push(path);
    out.lines.extend(trace.lines().map(str::to_string));
    let summary = summarize(&run)?;
    let decreasing = run.trace.records.windows(2).all(|w| w[1].delta < w[0].delta);
    out.pass = summary.converged && decreasing;
    out.lines.push(format!(
        "{} passes={} delta0={:.3e} delta={:.3e} floor={:.3e} compatibility_ratio={:.3}",
        if out.pass { "PASS" } else { "FAIL" },
        summary.passes,
        summary.delta0,
        summary.delta_final,
        summary.floor,
        summary.compatibility.worst_ratio
    ));
    write_json(&dir, "summary.json", &summary, &mut out)?;
    if dumps {
        dump_fields(&run, &dir, &mut out)?;
    }
    Ok(out)
}

/// Runs one subcommand. The scenario must already be validated.
pub fn run(cmd: Command, s: &Scenario) -> Result<Outcome> {
    match cmd {
        Command::Weld => decay_outcome(s, s.output.dump_fields),
        Command::Decay => decay_outcome(s, false),
        Command::Dump => {
            let run = run_weld(s)?;
            let dir = out_dir(s)?;
            let mut out = Outcome { pass: true, ..Default::default() };
            dump_fields(&run, &dir, &mut out)?;
            out.lines.push(format!("wrote {} files to {}", out.files.len(), dir.display()));
            Ok(out)
        }
        Command::Lemma => {
            let draws = s.probe.lemma_draws;
            let fuzz = moduli::recurrence_fuzz(draws, s.seed, false)?;
            let eps = 0.01;
            let check = moduli::proof_checkpoint(eps, 1.0);
            let pass = fuzz.violations == 0 && check <= 7.0 * eps;
            let dir = out_dir(s)?;
            let mut out = Outcome { pass, ..Default::default() };
            out.lines.push(format!(
                "{} draws={} violations={} max_alpha_over_bound={:.4} checkpoint={:.4}*eps*K",
                if pass { "PASS" } else { "FAIL" },
                draws,
                fuzz.violations,
                fuzz.max_ratio,
                check / eps
            ));
            write_json(&dir, "lemma.json", &fuzz, &mut out)?;
            Ok(out)
        }
        Command::Lipschitz => {
            let chain = s.chain()?;
            let necks = s.necks();
            let mut rng = s.rng();
            let rho = s.rho_from(&s.rho, necks, &mut rng)?;
            let alt = match &s.probe.rho_alt {
                Some(spec) => s.rho_from(spec, necks, &mut rng)?,
                None => GluingParameter::random(necks, &mut rng),
            };
            let report = moduli::lipschitz_probe(&chain, &rho, &alt, s.probe.samples, &s.probe_config())?;
            let dir = out_dir(s)?;
            let mut out = Outcome { pass: !report.partial, ..Default::default() };
            out.lines.push(format!(
                "K={:.4e} max_gap={:.4e} ratio={:.4e} scaled_ratio={:.4e}{}",
                report.k,
                report.max_gap,
                report.ratio,
                report.scaled_ratio,
                if report.partial { " (partial)" } else { "" }
            ));
            write_json(&dir, "lipschitz.json", &report, &mut out)?;
            Ok(out)
        }
        Command::Equiv => equiv(s),
        Command::Energy => {
            let run = run_weld(s)?;
            let ledger = energy_ledger(&run.assembly, &run.connection)?;
            let dir = out_dir(s)?;
            let mut out = Outcome { pass: true, ..Default::default() };
            for b in &ledger.blocks {
                out.lines.push(format!("block {} {:<8} welded={:.6} isolated={:.6}", b.index, b.label, b.welded, b.isolated));
            }
            out.lines.push(format!("total={:.6} nonflat={}", ledger.total, ledger.nonflat_blocks));
            write_json(&dir, "energy.json", &ledger, &mut out)?;
            Ok(out)
        }
    }
}

/// Report of the `equiv` subcommand.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquivReport {
    pub center: Vec<moduli::CenterReport>,
    pub noise_floor: f64,
    pub twist_distance: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Central twists against one non-central rotation.
pub fn equivalence_report(chain: &ChainConfig, rho: &GluingParameter, patterns: &[Vec<bool>], angle: f64, probe: &ProbeConfig) -> Result<EquivReport> {
    let base = weld(chain.clone(), rho.clone(), probe.max_passes, probe.target, &probe.weld)?;
    let center = patterns
        .iter()
        .map(|flips| {
            let other = weld(chain.clone(), rho.center_action(flips), probe.max_passes, probe.target, &probe.weld)?;
            moduli::compare_center(flips, &base, &other)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut twisted = rho.clone();
    twisted.rho[0] = GroupElement::from_axis_angle([1.0, 0.0, 0.0], angle) * twisted.rho[0];
    let other = weld(chain.clone(), twisted, probe.max_passes, probe.target, &probe.weld)?;
    let twist_distance = moduli::gauge_distinguish(&base.assembly, &base.connection, &other.assembly, &other.connection)?;
    let reference = moduli::fingerprint(&base.assembly, &base.connection)?;
    let distances: Vec<f64> = center.iter().map(|c| c.fingerprint_distance).collect();
    let noise_floor = moduli::noise_floor(&distances, &reference);
    let threshold = 100.0 * noise_floor;
    let pass = center.iter().all(|c| c.fingerprint_distance <= 1e-8) && twist_distance > threshold;
    Ok(EquivReport { center, noise_floor, twist_distance, threshold, pass })
}

/// Random center patterns with at least one flipped sign.
pub fn center_patterns(necks: usize, count: usize, rng: &mut impl rand::Rng) -> Vec<Vec<bool>> {
    (0..count)
        .map(|_| loop {
            let v: Vec<bool> = (0..necks).map(|_| rng.gen()).collect();
            if v.iter().any(|&b| b) {
                break v;
            }
        })
        .collect()
}

fn equiv(s: &Scenario) -> Result<Outcome> {
    let chain = s.chain()?;
    let mut rng = s.rng();
    let rho = s.rho_from(&s.rho, s.necks(), &mut rng)?;
    let patterns = center_patterns(s.necks(), s.probe.center_patterns, &mut rng);
    let report = equivalence_report(&chain, &rho, &patterns, s.probe.twist_angle, &s.probe_config())?;
    let dir = out_dir(s)?;
    let mut out = Outcome { pass: report.pass, ..Default::default() };
    let worst = report.center.iter().map(|c| c.fingerprint_distance).fold(0.0, f64::max);
    out.lines.push(format!(
        "{} center_max={:.3e} noise_floor={:.3e} twist={:.3e} threshold={:.3e}",
        if report.pass { "PASS" } else { "FAIL" },
        worst,
        report.noise_floor,
        report.twist_distance,
        report.threshold
    ));
    write_json(&dir, "equiv.json", &report, &mut out)?;
    Ok(out)
}

/// Resolves the output directory: flag, then scenario, then environment.
pub fn resolve_out_dir(flag: Option<PathBuf>, scenario: Option<&PathBuf>, env: Option<PathBuf>) -> Option<PathBuf> {
    flag.or_else(|| scenario.cloned()).or(env)
}

/// Reads a decay trace written by `weld` or `decay`.
pub fn read_trace(path: &Path) -> Result<Vec<crate::welding::DecayRecord>> {
    std::fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(WeldError::from))
        .collect()
}

/// The bundled four-block scenario: two BPST blocks and two flat blocks.
pub const BUNDLED_SCENARIO: &str = include_str!("../../../../scenarios/bpst4.json");
