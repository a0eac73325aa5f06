//! Numerical toolkit for two singularly perturbed oscillators with
//! exponential nonlinearities: simulation, singular-cycle construction,
//! slow-manifold asymptotics via the Lambert W function, Poincare return
//! maps with limit-cycle continuation in eps, and a catalog of blow-up
//! charts with machine-checked transition calculus.

pub mod charts;
pub mod cycles;
pub mod error;
pub mod models;
pub mod ode;
pub mod rng;
pub mod singular;
pub mod slowmf;

pub use error::{Error, Result};

/// Least-squares line fit y = a + b x. Returns (slope, r_squared).
pub fn lsq_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, r2)
}
