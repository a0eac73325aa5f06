//! Closed-form transition data for the local passage in the entry chart of
//! the exponential blow-up, where the radial subsystem
//!
//!   r' = r (1 + eps),  eps' = -eps^2,  rho' = -rho
//!
//! decouples and integrates to r(t) = r_in e^t (1 + delta t),
//! eps(t) = delta/(1 + delta t), rho(t) = e^{-1/delta} e^{-t}.
//!
//! With the exit radius pinned to R5 = e^{-1/delta}, the transition time is
//! T = -1/delta + W(1/(r_in delta)), the exit eps is 1/W(1/(r_in delta)), and
//! the exit rho is r_in delta W(1/(r_in delta)). The conserved quantity
//! r eps e^{-1/eps} ties entry and exit data together.

use crate::error::{Error, Result};
use crate::slowmf::lambert_w;

/// (T, eps_out, rho_out) for entry data (eps, rho) = (delta, e^{-1/delta})
/// and entry radius r_in, exiting at r = e^{-1/delta}.
pub fn pi14_transition(delta: f64, r_in: f64) -> Result<(f64, f64, f64)> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::DomainError(format!("delta = {delta} must lie in (0, 1)")));
    }
    if !(r_in > 0.0) {
        return Err(Error::DomainError(format!("r_in = {r_in} must be positive")));
    }
    let w = lambert_w(1.0 / (r_in * delta))?;
    let t = -1.0 / delta + w;
    let eps_out = 1.0 / w;
    let rho_out = r_in * delta * w;
    Ok((t, eps_out, rho_out))
}

/// Residual of the conservation law r_in delta e^{-1/delta} =
/// R5 eps_out e^{-1/eps_out} at the returned exit data.
pub fn pi14_conservation_residual(delta: f64, r_in: f64) -> Result<f64> {
    let (_, eps_out, _) = pi14_transition(delta, r_in)?;
    let r5 = (-1.0 / delta).exp();
    let lhs = r_in * delta * (-1.0 / delta).exp();
    let rhs = r5 * eps_out * (-1.0 / eps_out).exp();
    Ok((lhs - rhs).abs() / lhs.abs().max(1e-300))
}
