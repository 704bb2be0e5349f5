//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are expected to fail; the run exits
//! non-zero if any other criterion fails or if a listed one starts passing.

mod common;

use common::{bundled, max_abs, random_form, smooth_connection, variant};
use instanton_weld::cli::center_patterns;
use instanton_weld::fields::calculus::{bianchi_residual, sd_to_two};
use instanton_weld::fields::gauge::adjoint_action;
use instanton_weld::fields::norms::{energy_density, lp_norm};
use instanton_weld::fields::{
    apply_gauge, bpst_background, cov_d, cov_d_plus, cov_d_star, curvature, hodge_star, l2_norm, sd_project, Degree,
    GaugeField, Grid, Stencil,
};
use instanton_weld::geometry::{annulus_l2, pullback_two_form, shell_radii, NeckParams, Vec4};
use instanton_weld::moduli::{
    compare_center, fingerprint, gauge_distinguish, noise_floor, perturbation_gap, proof_checkpoint, recurrence_fuzz,
    separation,
};
use instanton_weld::welding::{compatibility_check, energy_ledger, initial_approximation, weld, GluingParameter, WeldRun};
use instanton_weld::fields::GroupElement;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

const KNOWN_FAILURES: &[usize] = &[4, 6];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn weld_scenario(s: &instanton_weld::cli::Scenario, rho: &GluingParameter, max_passes: usize) -> WeldRun {
    weld(s.chain().unwrap(), rho.clone(), max_passes, s.passes.target, &s.solver).unwrap()
}

fn criterion_1() -> Verdict {
    let t = Instant::now();
    let fuzz = recurrence_fuzz(10_000, 20_260_501, false).unwrap();
    let eps = 0.01;
    let check = proof_checkpoint(eps, 1.0);
    let secs = t.elapsed().as_secs_f64();
    let pass = fuzz.violations == 0 && check <= 7.0 * eps && secs < 5.0;
    verdict(
        pass,
        format!(
            "{} draws, {} violations, max alpha/(10 eps K) = {:.4}; checkpoint {:.4} eps K <= 7 eps K; {secs:.2}s",
            fuzz.draws,
            fuzz.violations,
            fuzz.max_ratio,
            check / eps
        ),
    )
}

fn criterion_2() -> Verdict {
    let t = Instant::now();
    let g = Grid::new(12, 3.0);
    let st = Stencil::new(g);
    let f = random_form(g, Degree::Two, 11);

    // the projector on 2-forms, (1 + *) / 2, is idempotent bit for bit
    let p = f.add(&hodge_star(&f).unwrap()).scaled(0.5);
    let pp = p.add(&hodge_star(&p).unwrap()).scaled(0.5);
    let sd = sd_project(&f).unwrap();
    let idempotent = p == pp && sd_project(&sd).unwrap() == sd;
    let storage = max_abs(&sd_project(&sd_to_two(&sd)).unwrap().sub(&sd)) / max_abs(&sd);

    let a = random_form(g, Degree::One, 12);
    let s0 = random_form(g, Degree::Zero, 13);
    let b = random_form(g, Degree::One, 14);
    let y = random_form(g, Degree::SelfDual, 15);
    let l0 = cov_d(&st, &a, &s0).unwrap().dot(&b);
    let r0 = s0.dot(&cov_d_star(&st, &a, &b).unwrap());
    let l1 = cov_d_plus(&st, &a, &b).unwrap().dot(&y);
    let r1 = b.dot(&cov_d_star(&st, &a, &y).unwrap());
    let adj = ((l0 - r0).abs() / l0.abs().max(1.0)).max((l1 - r1).abs() / l1.abs().max(1.0));

    let smooth = smooth_connection(g);
    let fa = curvature(&st, &smooth).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let g0 = GluingParameter::random(1, &mut rng).rho[0];
    let constant = GaugeField::from_fn(g, |_| g0);
    let transformed = curvature(&st, &apply_gauge(&st, &constant, &smooth).unwrap()).unwrap();
    let covariance = max_abs(&transformed.sub(&adjoint_action(&constant, &fa))) / max_abs(&fa);
    let pointwise = GluingParameter::random(g.points(), &mut rng).rho;
    let local = GaugeField { grid: g, values: pointwise };
    let rotated = adjoint_action(&local, &fa);
    let n0 = l2_norm(&fa, None);
    let norm_change = (l2_norm(&rotated, None) - n0).abs() / n0;
    let dens0 = fa.point_norms();
    let dens1 = rotated.point_norms();
    let pointwise_change = dens0.iter().zip(&dens1).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / max_abs(&fa);

    let bianchi = |n: usize| {
        let g = Grid::new(n, 3.0);
        l2_norm(&bianchi_residual(&Stencil::new(g), &smooth_connection(g)).unwrap(), None)
    };
    let (b12, b24) = (bianchi(12), bianchi(24));
    let ratio = b12 / b24;
    let secs = t.elapsed().as_secs_f64();
    let pass = idempotent
        && storage <= 1e-15
        && adj <= 1e-10
        && covariance <= 1e-8
        && norm_change <= 1e-8
        && pointwise_change <= 1e-8
        && (3.0..=5.0).contains(&ratio)
        && secs < 60.0;
    verdict(
        pass,
        format!(
            "P+ idempotent exactly = {idempotent} (storage round trip {storage:.1e}); adjointness {adj:.1e}; \
             covariance {covariance:.1e}; norm change {:.1e}; Bianchi {b12:.3e} -> {b24:.3e}, ratio {ratio:.2}; {secs:.1}s",
            norm_change.max(pointwise_change)
        ),
    )
}

/// A curvature-like test form: an off-centre Gaussian in three components.
fn test_form(lambda: f64) -> impl Fn(Vec4) -> [f64; 6] {
    move |x: Vec4| {
        let c = [0.15, 0.05, 0.0, -0.1];
        let d2: f64 = (0..4).map(|m| (x[m] - c[m]).powi(2)).sum();
        let f = (-d2 / (4.0 * lambda)).exp();
        [f, f * x[1] / lambda.sqrt(), 0.0, 0.0, 0.3 * f, f]
    }
}

fn criterion_3() -> Verdict {
    let t = Instant::now();
    let neck = NeckParams::new(0.5, 2.0, 0.04).with_budget(4, 1.0);
    let (r0, _, _, r3) = shell_radii(&neck).unwrap();
    let w = test_form(neck.lambda);
    let mismatch = |radial: usize| {
        let direct = annulus_l2(&w, r0, r3, radial, 12);
        let pulled = annulus_l2(|x| pullback_two_form(x, neck.lambda, 0, &w).unwrap(), r0, r3, radial, 12);
        (pulled - direct).abs() / direct
    };
    let (m24, m48) = (mismatch(24), mismatch(48));
    let secs = t.elapsed().as_secs_f64();
    let pass = m24 <= 0.02 && m24 / m48 >= 3.0 && secs < 120.0;
    verdict(
        pass,
        format!(
            "mismatch {:.3}% at 24 radial samples, {:.3}% at 48, improvement {:.2}x; {secs:.1}s",
            100.0 * m24,
            100.0 * m48,
            m24 / m48
        ),
    )
}

fn criterion_4() -> Verdict {
    let t = Instant::now();
    let target = 8.0 * PI * PI;
    let (size, scale) = (4.0, 0.5);
    let measure = |n: usize| {
        let g = Grid::new(n, size);
        let c = [0.5 * size; 4];
        let dens = energy_density(&Stencil::new(g), &bpst_background(g, c, scale, None)).unwrap();
        // the regular gauge jumps at the chart seam, so integrate over a ball clear of it
        let radius = 0.5 * size - 2.0 * g.h();
        let (mut lattice, mut exact) = (0.0, 0.0);
        let s4 = scale.powi(4);
        for (p, d) in dens.iter().enumerate() {
            let y = g.displacement(g.coords(p), c);
            let r2: f64 = y.iter().map(|v| v * v).sum();
            if r2.sqrt() < radius {
                lattice += d;
                exact += 48.0 * s4 / (r2 + scale * scale).powi(4);
            }
        }
        let v = g.cell_volume();
        (lattice * v, exact * v)
    };
    let (e16, o16) = measure(16);
    let (e32, o32) = measure(32);
    let (d16, d32) = ((e16 - target).abs() / target, (e32 - target).abs() / target);
    let secs = t.elapsed().as_secs_f64();
    let pass = d16 <= 0.10 && d32 <= 0.03 && secs < 300.0;
    verdict(
        pass,
        format!(
            "{e16:.3} at 16^4 ({:.1}%), {e32:.3} at 32^4 ({:.1}%) vs 8 pi^2 = {target:.4}; \
             closed-form quadrature {o16:.3}, {o32:.3}; {secs:.1}s",
            100.0 * d16,
            100.0 * d32
        ),
    )
}

fn criterion_5(base: &WeldRun, secs: f64) -> Verdict {
    let t = &base.trace;
    let decreasing = t.records.windows(2).all(|w| w[1].delta < w[0].delta);
    let max_ratio = t.records.iter().filter_map(|r| r.ratio).fold(0.0, f64::max);
    let support = t.records.iter().map(|r| r.support_violation).fold(0.0, f64::max);
    let compat = compatibility_check(&base.assembly, &base.connection).unwrap();
    let passes = t.records.len() - 1;
    let pass = t.converged
        && decreasing
        && max_ratio <= 0.9
        && passes <= 30
        && support <= 1e-6
        && compat.within_tolerance()
        && secs < 900.0;
    verdict(
        pass,
        format!(
            "delta {:.3e} -> {:.3e} in {passes} passes, max ratio {max_ratio:.4}, support violation {support:.1e}, \
             compatibility {:.3} of tolerance, stencil floor {:.3e}; {secs:.0}s",
            t.delta0(),
            t.records.last().unwrap().delta,
            compat.worst_ratio,
            t.floor
        ),
    )
}

fn sup_lp(run: &WeldRun, p: f64) -> f64 {
    run.connection.a.iter().map(|a| lp_norm(a, 2.0 * p, None)).fold(0.0, f64::max)
}

fn sup_lp_initial(run: &WeldRun, p: f64) -> f64 {
    let w = initial_approximation(&run.assembly).unwrap();
    w.a.iter().map(|a| lp_norm(a, 2.0 * p, None)).fold(0.0, f64::max)
}

fn criterion_6(base: &WeldRun, rho: &GluingParameter, alt: &GluingParameter) -> Verdict {
    let t = Instant::now();
    let s = bundled();
    let p = s.solver.solver.p;
    let k = separation(rho, alt).unwrap();
    let alt_run = weld_scenario(&s, alt, s.passes.max_passes.max(30));
    let quarter = variant(&["bpst", "bpst", "flat", "flat"], 0.01);
    let q_run = weld_scenario(&quarter, rho, 30);
    let q_alt = weld_scenario(&quarter, alt, 30);
    let norm_hi = sup_lp(base, p);
    let norm_lo = sup_lp(&q_run, p);
    let lip_hi = perturbation_gap(base, &alt_run, p).unwrap().0 / k;
    let lip_lo = perturbation_gap(&q_run, &q_alt, p).unwrap().0 / k;
    let fit = |hi: f64, lo: f64| (hi / lo).ln() / 4f64.ln();
    let expected = (2.0 + p) / (2.0 * p);
    let (e_norm, e_lip) = (fit(norm_hi, norm_lo), fit(lip_hi, lip_lo));
    let e_init = fit(sup_lp_initial(base, p), sup_lp_initial(&q_run, p));
    let band = |e: f64| e >= 0.5 * expected && e <= 2.0 * expected;
    let converged = [&alt_run, &q_run, &q_alt].iter().all(|r| r.trace.converged);
    let secs = t.elapsed().as_secs_f64();
    let pass = converged && band(e_norm) && band(e_lip) && secs < 3600.0;
    verdict(
        pass,
        format!(
            "exponents at p = {p}: perturbation norm {norm_hi:.4e} -> {norm_lo:.4e}, exponent {e_norm:.3}; \
             Lipschitz ratio {lip_hi:.4e} -> {lip_lo:.4e}, exponent {e_lip:.3}; expected {expected:.3} within [{:.3}, {:.3}]; \
             initial approximation exponent {e_init:.3}; all welds converged = {converged}; {secs:.0}s",
            0.5 * expected,
            2.0 * expected
        ),
    )
}

fn criterion_7(base: &WeldRun, rho: &GluingParameter) -> Verdict {
    let t = Instant::now();
    let s = variant(&["bpst", "bpst", "bpst", "bpst"], 0.04);
    let four = weld_scenario(&s, rho, 30);
    let two = energy_ledger(&base.assembly, &base.connection).unwrap();
    let all = energy_ledger(&four.assembly, &four.connection).unwrap();
    let ratio = all.total / two.total;
    let retained = two.min_retained.unwrap().min(all.min_retained.unwrap());
    let secs = t.elapsed().as_secs_f64();
    let pass = four.trace.converged && (1.7..=2.3).contains(&ratio) && retained >= 0.5;
    verdict(
        pass,
        format!(
            "{} non-flat blocks {:.3}, {} non-flat blocks {:.3}, ratio {ratio:.4}; \
             smallest retained fraction {retained:.4}; {secs:.0}s",
            two.nonflat_blocks, two.total, all.nonflat_blocks, all.total
        ),
    )
}

fn criterion_8(rho: &GluingParameter) -> Verdict {
    let t = Instant::now();
    let s = bundled();
    // central twists act bit for bit identically, so a short weld suffices
    let passes = 1;
    let base = weld_scenario(&s, rho, passes);
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ 0x5eed);
    let patterns = center_patterns(s.necks(), 10, &mut rng);
    let mut distances = Vec::new();
    let mut identical = true;
    for flips in &patterns {
        let other = weld_scenario(&s, &rho.center_action(flips), passes);
        let r = compare_center(flips, &base, &other).unwrap();
        identical &= r.identical;
        distances.push(r.fingerprint_distance);
    }
    let mut twisted = rho.clone();
    twisted.rho[0] = GroupElement::from_axis_angle([1.0, 0.0, 0.0], PI / 4.0) * twisted.rho[0];
    let other = weld_scenario(&s, &twisted, passes);
    let twist = gauge_distinguish(&base.assembly, &base.connection, &other.assembly, &other.connection).unwrap();
    let floor = noise_floor(&distances, &fingerprint(&base.assembly, &base.connection).unwrap());
    let worst = distances.iter().copied().fold(0.0, f64::max);
    let secs = t.elapsed().as_secs_f64();
    let pass = worst <= 1e-8 && twist > 100.0 * floor;
    verdict(
        pass,
        format!(
            "center twists: max fingerprint distance {worst:.1e} over {} patterns (bitwise identical = {identical}); \
             pi/4 twist distance {twist:.3e} vs 100 x noise floor {:.3e}; {secs:.0}s",
            patterns.len(),
            100.0 * floor
        ),
    )
}

fn main() {
    let names = [
        "recurrence lemma",
        "algebra and calculus",
        "conformal invariance",
        "BPST energy",
        "welding convergence",
        "exponent checks",
        "energy growth",
        "center equivalence",
    ];
    let mut results: Vec<(usize, Verdict)> = Vec::new();
    let mut report = |id: usize, v: Verdict| {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {id} [{tag}] {}: {}", names[id - 1], v.detail);
        results.push((id, v));
    };
    report(1, criterion_1());
    report(2, criterion_2());
    report(3, criterion_3());
    report(4, criterion_4());

    let s = bundled();
    let mut rng = s.rng();
    let rho = s.rho_from(&s.rho, s.necks(), &mut rng).unwrap();
    let alt = GluingParameter::random(s.necks(), &mut rng);
    let t = Instant::now();
    let base = weld_scenario(&s, &rho, 30);
    report(5, criterion_5(&base, t.elapsed().as_secs_f64()));
    report(6, criterion_6(&base, &rho, &alt));
    report(7, criterion_7(&base, &rho));
    report(8, criterion_8(&rho));

    let mut unexpected = Vec::new();
    for (id, v) in &results {
        if v.pass == KNOWN_FAILURES.contains(id) {
            unexpected.push(*id);
        }
    }
    let passed = results.iter().filter(|(_, v)| v.pass).count();
    println!("acceptance: {passed}/{} criteria pass; known failures {KNOWN_FAILURES:?}", results.len());
    if !unexpected.is_empty() {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
