//! The two-sequence recurrence bounding path derivatives of the welded perturbations.

use crate::error::{Result, WeldError};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Inputs of the recurrence: `eps <= 1/100`, `alpha_0 <= eps K`, `s_0 <= K`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecurrenceState {
    pub epsilon: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub alpha0: f64,
    pub s0: f64,
}

impl RecurrenceState {
    pub fn validate(&self) -> Result<()> {
        let RecurrenceState { epsilon, k, alpha0, s0 } = *self;
        if !(epsilon >= 0.0 && epsilon <= 0.01) {
            return Err(WeldError::Precondition(format!("epsilon = {epsilon} must lie in [0, 1/100]")));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(WeldError::Precondition(format!("K = {k} must be positive")));
        }
        if !(alpha0 >= 0.0 && alpha0 <= epsilon * k) {
            return Err(WeldError::Precondition(format!("alpha_0 = {alpha0} must lie in [0, eps K]")));
        }
        if !(s0 >= 0.0 && s0 <= k) {
            return Err(WeldError::Precondition(format!("s_0 = {s0} must lie in [0, K]")));
        }
        Ok(())
    }
}

/// How the inequalities are turned into a sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RecurrenceMode {
    /// Both inequalities taken with equality.
    WorstCase,
    /// Each right-hand side scaled by an independent uniform factor in `[0, 1]`.
    Sampled { seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    pub max_alpha: f64,
    /// `10 eps K`.
    pub bound: f64,
    pub pass: bool,
    pub steps: usize,
    /// Largest `t_n = 2^n s_n` seen.
    pub max_t: f64,
}

/// Iteration cap; the `2^-n` factors make later terms vanish in `f64` long before this.
pub const MAX_STEPS: usize = 2000;

/// Runs the recurrence until the increments underflow and compares `sup alpha_n` with `10 eps K`.
pub fn recurrence_verify(state: &RecurrenceState, mode: RecurrenceMode) -> Result<RecurrenceReport> {
    state.validate()?;
    let mut rng = match mode {
        RecurrenceMode::WorstCase => None,
        RecurrenceMode::Sampled { seed } => Some(<rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed)),
    };
    let RecurrenceState { epsilon: eps, k, alpha0, s0 } = *state;
    let (mut alpha, mut s) = (alpha0, s0);
    let mut max_alpha = alpha;
    let mut max_t = s;
    let mut pow = 1.0; // 2^-n
    let mut steps = 0;
    for n in 0..MAX_STEPS {
        let (u, v) = match rng.as_mut() {
            Some(r) => (r.gen::<f64>(), r.gen::<f64>()),
            None => (1.0, 1.0),
        };
        let da = u * eps * (s + pow * alpha + pow * k);
        let next_s = 0.5 * s + v * (pow * alpha + 0.5 * pow * k);
        alpha += da;
        s = next_s;
        pow *= 0.5;
        steps = n + 1;
        max_alpha = max_alpha.max(alpha);
        if pow > 0.0 {
            max_t = max_t.max(s / pow);
        }
        if da <= f64::EPSILON * alpha.max(f64::MIN_POSITIVE) && s <= f64::EPSILON * k {
            break;
        }
    }
    let bound = 10.0 * eps * k;
    Ok(RecurrenceReport { max_alpha, bound, pass: max_alpha <= bound, steps, max_t })
}

/// The closed form `eps K (6 + 60 eps)` of the series bounding `alpha_{n+1} - alpha_0`.
pub fn proof_checkpoint(eps: f64, k: f64) -> f64 {
    eps * k * (6.0 + 60.0 * eps)
}

/// Partial sums of `sum_n eps/2^n [K(1 + (1 + 20 eps) n) + 10 eps K + K]`.
pub fn proof_series(eps: f64, k: f64, terms: usize) -> f64 {
    (0..terms)
        .map(|n| eps / 2f64.powi(n as i32) * (k * (1.0 + (1.0 + 20.0 * eps) * n as f64) + 10.0 * eps * k + k))
        .sum()
}

/// Outcome of a batch of random admissible runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub draws: usize,
    pub violations: usize,
    /// Largest `sup alpha_n / (10 eps K)` over the draws.
    pub max_ratio: f64,
    pub worst: Option<RecurrenceState>,
}

/// Draws admissible states and runs each in the given mode.
pub fn recurrence_fuzz(draws: usize, seed: u64, sampled: bool) -> Result<FuzzReport> {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    let mut report = FuzzReport { draws, violations: 0, max_ratio: 0.0, worst: None };
    for _ in 0..draws {
        let epsilon = rng.gen_range(0.0..=0.01);
        let k = 10f64.powf(rng.gen_range(-3.0..3.0));
        let state = RecurrenceState { epsilon, k, alpha0: rng.gen::<f64>() * epsilon * k, s0: rng.gen::<f64>() * k };
        let mode = if sampled { RecurrenceMode::Sampled { seed: rng.gen() } } else { RecurrenceMode::WorstCase };
        let r = recurrence_verify(&state, mode)?;
        if !r.pass {
            report.violations += 1;
        }
        let ratio = if r.bound > 0.0 { r.max_alpha / r.bound } else { 0.0 };
        if ratio > report.max_ratio || report.worst.is_none() {
            report.max_ratio = report.max_ratio.max(ratio);
            report.worst = Some(state);
        }
    }
    Ok(report)
}
