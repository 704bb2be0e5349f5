#![allow(dead_code)]

use instanton_weld::cli::{Scenario, BUNDLED_SCENARIO};
use instanton_weld::fields::{AdForm, Degree, Grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The bundled two-BPST, two-flat periodic chain.
pub fn bundled() -> Scenario {
    Scenario::from_json(BUNDLED_SCENARIO).expect("bundled scenario parses")
}

/// The bundled chart and catalog with another block list and neck scale.
pub fn variant(blocks: &[&str], lambda: f64) -> Scenario {
    let mut s = bundled();
    s.blocks = blocks.iter().map(|b| b.to_string()).collect();
    s.neck.lambda = lambda;
    s.validate().expect("variant scenario is valid");
    s
}

pub fn random_form(g: Grid, d: Degree, seed: u64) -> AdForm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = AdForm::zeros(g, d);
    f.data.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
    f
}

/// A smooth periodic connection with one Fourier mode per coefficient.
pub fn smooth_connection(g: Grid) -> AdForm {
    let k = 2.0 * std::f64::consts::PI / g.size;
    AdForm::from_fn(g, Degree::One, |x, mu| {
        std::array::from_fn(|c| {
            let ph = (mu * 3 + c) as f64 * 0.7;
            0.6 * (k * x[(mu + c + 1) % 4] + ph).sin() + 0.4 * (k * x[c] - ph).cos()
        })
    })
}

pub fn max_abs(f: &AdForm) -> f64 {
    f.data.iter().fold(0.0, |m, v| m.max(v.abs()))
}
