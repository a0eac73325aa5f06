//! Blow-up chart catalog for the Le Corbeiller system: desingularized vector
//! fields, transition maps, blow-down to the original variables, equilibrium
//! records with analytic eigenvalues, blown-up singular-cycle segments, and
//! the closed-form local transition data of the decoupled radial subsystem.
//!
//! Chart coordinate conventions (blow-down target is (x, y, eps)):
//!
//! | chart   | coords                | blow-down                                     |
//! |---------|-----------------------|-----------------------------------------------|
//! | K1      | (x, r1, eps1)         | y = -r1, eps = r1 eps1                        |
//! | K2      | (x, y2, r2)           | y = r2 y2, eps = r2                           |
//! | K3      | (x, r3, eps3)         | y = r3, eps = r3 eps3                         |
//! | ExtK3   | (x, r, eps, q)        | y = r, eps = r eps; q = e^{-1/eps} on Q       |
//! | FrakK1  | (x, r1, eps, rho1)    | into ExtK3: r = rho1 r1, q = rho1             |
//! | CalK1   | (r1, eps, rho1, nu1)  | into FrakK1: x = -nu1, r1 *= nu1, rho1 *= nu1 |
//! | CalK2   | (x2, r2, eps)         | into FrakK1 on Q: nu2 = e^{-1/eps}            |
//! | TildeK1 | (x1, eps1, sigma1)    | into CalK2: (sigma1 x1, sigma1, sigma1 eps1)  |
//! | TildeK2 | (x2, r2, sigma2)      | into CalK2: (sigma2 x2, sigma2 r2, sigma2)    |
//! | HatK31  | (rhat1, sigma, shat1) | into TildeK2: (shat1, shat1^2 rhat1, sigma)   |
//! | HatK32  | (xhat2, sigma, shat2) | into TildeK2: (shat2 xhat2, shat2^2, sigma)   |
//! | K11     | (r11, eps1, s1)       | x = s1, y = -s1^2 r11, eps = s1^2 r11 eps1    |
//! | K12     | (x2, eps1, s2)        | x = s2 x2, y = -s2^2, eps = s2^2 eps1         |
//! | K21     | (y2, r21, s1)         | x = s1, y = s1^2 r21 y2, eps = s1^2 r21       |
//! | K22     | (x2, y2, s2)          | x = s2 x2, y = s2^2 y2, eps = s2^2            |
//! | K31     | (r31, eps3, s1)       | x = s1, y = s1^2 r31, eps = s1^2 r31 eps3     |
//! | K32     | (x2, eps3, s2)        | x = s2 x2, y = s2^2, eps = s2^2 eps3          |

mod blowdown;
mod catalog;
mod fields;
mod pi14;
mod segments;
mod transitions;
pub mod verify;

pub use blowdown::blow_down;
pub use catalog::{catalog_entries, equilibria_catalog, numeric_jacobian, numeric_spectrum, CatalogEntry, EquilibriumRecord};
pub use fields::eval_chart_field;
pub use pi14::{pi14_conservation_residual, pi14_transition};
pub use segments::{blown_up_singular_segments, segments_to_csv, tilde_k1_center_manifold_x1, BlownUpSegment};
pub use transitions::{chart_transition, transition_pairs};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::CorbeillerParams;

/// Identifier of a blow-up chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChartId {
    K1,
    K2,
    K3,
    ExtK3,
    FrakK1,
    CalK1,
    CalK2,
    TildeK1,
    TildeK2,
    HatK31,
    HatK32,
    K11,
    K12,
    K21,
    K22,
    K31,
    K32,
}

pub const ALL_CHARTS: [ChartId; 17] = [
    ChartId::K1,
    ChartId::K2,
    ChartId::K3,
    ChartId::ExtK3,
    ChartId::FrakK1,
    ChartId::CalK1,
    ChartId::CalK2,
    ChartId::TildeK1,
    ChartId::TildeK2,
    ChartId::HatK31,
    ChartId::HatK32,
    ChartId::K11,
    ChartId::K12,
    ChartId::K21,
    ChartId::K22,
    ChartId::K31,
    ChartId::K32,
];

impl ChartId {
    pub fn arity(&self) -> usize {
        match self {
            ChartId::ExtK3 | ChartId::FrakK1 | ChartId::CalK1 => 4,
            _ => 3,
        }
    }

    pub fn coord_names(&self) -> &'static [&'static str] {
        match self {
            ChartId::K1 => &["x", "r1", "eps1"],
            ChartId::K2 => &["x", "y2", "r2"],
            ChartId::K3 => &["x", "r3", "eps3"],
            ChartId::ExtK3 => &["x", "r", "eps", "q"],
            ChartId::FrakK1 => &["x", "r1", "eps", "rho1"],
            ChartId::CalK1 => &["r1", "eps", "rho1", "nu1"],
            ChartId::CalK2 => &["x2", "r2", "eps"],
            ChartId::TildeK1 => &["x1", "eps1", "sigma1"],
            ChartId::TildeK2 => &["x2", "r2", "sigma2"],
            ChartId::HatK31 => &["rhat1", "sigma", "shat1"],
            ChartId::HatK32 => &["xhat2", "sigma", "shat2"],
            ChartId::K11 => &["r11", "eps1", "s1"],
            ChartId::K12 => &["x2", "eps1", "s2"],
            ChartId::K21 => &["y2", "r21", "s1"],
            ChartId::K22 => &["x2", "y2", "s2"],
            ChartId::K31 => &["r31", "eps3", "s1"],
            ChartId::K32 => &["x2", "eps3", "s2"],
        }
    }

    /// Per-coordinate lower bounds: radius-like and eps-like coordinates live
    /// on [0, inf), the rest are free.
    pub fn nonneg_mask(&self) -> [bool; 4] {
        match self {
            ChartId::K1 => [false, true, true, false],
            ChartId::K2 => [false, false, true, false],
            ChartId::K3 => [false, true, true, false],
            ChartId::ExtK3 => [false, true, true, true],
            ChartId::FrakK1 => [false, true, true, true],
            ChartId::CalK1 => [true, true, true, true],
            ChartId::CalK2 => [false, true, true, false],
            ChartId::TildeK1 => [false, true, true, false],
            ChartId::TildeK2 => [false, true, true, false],
            ChartId::HatK31 => [true, true, true, false],
            ChartId::HatK32 => [false, true, true, false],
            ChartId::K11 => [true, true, true, false],
            ChartId::K12 => [false, true, true, false],
            ChartId::K21 => [false, true, true, false],
            ChartId::K22 => [false, false, true, false],
            ChartId::K31 => [true, true, true, false],
            ChartId::K32 => [false, true, true, false],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ChartId::K1 => "K1",
            ChartId::K2 => "K2",
            ChartId::K3 => "K3",
            ChartId::ExtK3 => "ExtK3",
            ChartId::FrakK1 => "FrakK1",
            ChartId::CalK1 => "CalK1",
            ChartId::CalK2 => "CalK2",
            ChartId::TildeK1 => "TildeK1",
            ChartId::TildeK2 => "TildeK2",
            ChartId::HatK31 => "HatK31",
            ChartId::HatK32 => "HatK32",
            ChartId::K11 => "K11",
            ChartId::K12 => "K12",
            ChartId::K21 => "K21",
            ChartId::K22 => "K22",
            ChartId::K31 => "K31",
            ChartId::K32 => "K32",
        }
    }
}

/// A point in one chart, carrying its parameter context.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub chart: ChartId,
    /// First `chart.arity()` entries are meaningful.
    pub coords: [f64; 4],
    pub params: CorbeillerParams,
}

impl ChartPoint {
    pub fn new(chart: ChartId, coords: &[f64], params: CorbeillerParams) -> Result<Self> {
        if coords.len() != chart.arity() {
            return Err(Error::InvalidChartPoint(format!(
                "{} expects {} coordinates, got {}",
                chart.name(),
                chart.arity(),
                coords.len()
            )));
        }
        let mut c = [0.0; 4];
        c[..coords.len()].copy_from_slice(coords);
        let pt = Self { chart, coords: c, params };
        pt.validate()?;
        Ok(pt)
    }

    pub fn coord_slice(&self) -> &[f64] {
        &self.coords[..self.chart.arity()]
    }

    pub fn validate(&self) -> Result<()> {
        let mask = self.chart.nonneg_mask();
        for (i, &v) in self.coord_slice().iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidChartPoint(format!(
                    "{}: coordinate {} is not finite",
                    self.chart.name(),
                    self.chart.coord_names()[i]
                )));
            }
            if mask[i] && v < 0.0 {
                return Err(Error::InvalidChartPoint(format!(
                    "{}: coordinate {} = {v} must be nonnegative",
                    self.chart.name(),
                    self.chart.coord_names()[i]
                )));
            }
        }
        Ok(())
    }
}

/// e^{-c/t} extended by 0 at t = 0; the smooth one-sided continuation every
/// desingularized field uses at its eps-like boundary.
pub fn exp_neg_inv(c: f64, t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-c / t).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lc() -> CorbeillerParams {
        CorbeillerParams::new(1.0, 0.25).unwrap()
    }

    #[test]
    fn arity_checked() {
        assert!(ChartPoint::new(ChartId::K1, &[0.1, 0.2, 0.3], lc()).is_ok());
        assert!(ChartPoint::new(ChartId::K1, &[0.1, 0.2], lc()).is_err());
        assert!(ChartPoint::new(ChartId::FrakK1, &[0.1, 0.2, 0.3, 0.4], lc()).is_ok());
    }

    #[test]
    fn radii_must_be_nonnegative() {
        assert!(ChartPoint::new(ChartId::K1, &[-1.0, 0.2, 0.3], lc()).is_ok()); // x is free
        assert!(ChartPoint::new(ChartId::K1, &[0.0, -0.2, 0.3], lc()).is_err());
        assert!(ChartPoint::new(ChartId::K22, &[-1.0, -2.0, 0.3], lc()).is_ok()); // x2, y2 free
        assert!(ChartPoint::new(ChartId::K22, &[0.0, 0.0, -0.1], lc()).is_err());
    }

    #[test]
    fn exp_neg_inv_boundary() {
        assert_eq!(exp_neg_inv(1.0, 0.0), 0.0);
        assert!((exp_neg_inv(1.0, 0.5) - (-2.0_f64).exp()).abs() < 1e-18);
        assert!((exp_neg_inv(2.0, 0.5) - (-4.0_f64).exp()).abs() < 1e-18);
    }
}
