//! Constant-speed geodesics between gluing parameters.

use crate::error::{Result, WeldError};
use crate::fields::GroupElement;
use crate::welding::GluingParameter;
use serde::{Deserialize, Serialize};

/// Per-neck geodesics `t -> rho_i exp(t log(rho_i^{-1} rho'_i))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterPath {
    pub start: GluingParameter,
    pub end: GluingParameter,
}

/// Euclidean distance of unit quaternions, the `|rho_i - rho'_i|` of the estimates.
pub fn chordal(a: &GroupElement, b: &GroupElement) -> f64 {
    a.0.iter().zip(&b.0).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `K = sup_i |rho_i - rho'_i|`.
pub fn separation(a: &GluingParameter, b: &GluingParameter) -> Result<f64> {
    if a.rho.len() != b.rho.len() {
        return Err(WeldError::Precondition(format!("parameters of length {} and {}", a.rho.len(), b.rho.len())));
    }
    Ok(a.rho.iter().zip(&b.rho).map(|(x, y)| chordal(x, y)).fold(0.0, f64::max))
}

pub fn geodesic_path(start: &GluingParameter, end: &GluingParameter) -> Result<ParameterPath> {
    separation(start, end)?;
    Ok(ParameterPath { start: start.clone(), end: end.clone() })
}

impl ParameterPath {
    pub fn at(&self, t: f64) -> GluingParameter {
        GluingParameter { rho: self.start.rho.iter().zip(&self.end.rho).map(|(a, b)| a.slerp(b, t)).collect() }
    }

    /// `|d rho_i / dt|`, the geodesic distance of the endpoints.
    pub fn speeds(&self) -> Vec<f64> {
        self.start.rho.iter().zip(&self.end.rho).map(|(a, b)| a.distance(b)).collect()
    }

    pub fn separation(&self) -> f64 {
        separation(&self.start, &self.end).expect("lengths checked at construction")
    }
}
