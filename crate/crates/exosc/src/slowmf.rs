//! Principal Lambert W function and the slow/invariant-manifold graphs of
//! both oscillators, with residual diagnostics against integrated
//! trajectories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{CorbeillerParams, HesterParams, Model};
use crate::ode::Trajectory;
use crate::singular::hester_jump_point;

/// Principal branch W0 on (-1/e, infinity), by Halley iteration from a
/// regime-specific start: branch-point expansion near -1/e, Taylor series
/// near 0, a crude log start on [0.3, e], and log - log log beyond e.
pub fn lambert_w(w: f64) -> Result<f64> {
    let brk = -(-1.0_f64).exp(); // -1/e
    if !w.is_finite() || w <= brk {
        return Err(Error::DomainError(format!("lambert_w requires w > -1/e, got {w}")));
    }
    if w == 0.0 {
        return Ok(0.0);
    }
    let mut z = if w < -0.3 {
        // sqrt expansion about the branch point
        let p = (2.0 * (std::f64::consts::E * w + 1.0)).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0
    } else if w.abs() < 0.3 {
        w * (1.0 - w + 1.5 * w * w)
    } else if w <= std::f64::consts::E {
        let l = w.ln_1p();
        l * (1.0 - l / (2.0 + l))
    } else {
        let l1 = w.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };
    for _ in 0..50 {
        let ez = z.exp();
        let f = z * ez - w;
        if f == 0.0 {
            break;
        }
        let zp1 = z + 1.0;
        let denom = ez * zp1 - (z + 2.0) * f / (2.0 * zp1);
        let step = f / denom;
        z -= step;
        if step.abs() <= 1e-16 * z.abs().max(1e-300) {
            break;
        }
    }
    Ok(z)
}

/// Z(s) = 1/W(1/s) for s > 0 with the continuous extension Z(0) = 0;
/// satisfies s = Z(s) e^{-1/Z(s)}.
pub fn z_function(s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::DomainError(format!("z_function requires s >= 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / lambert_w(1.0 / s)?)
}

/// Which truncation of the invariant-manifold graph to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ManifoldOrder {
    Leading,
    Full,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ManifoldSample {
    pub x: f64,
    pub y_graph: f64,
    pub order: ManifoldOrder,
}

/// Leading-order scaled ordinate h of the Hester slow manifold y = eps h(x):
/// the unique root h > y_j of x = mu (e^h - kappa e^{(1+alpha) h}) on the
/// attracting branch, found by bisection on [y_j, y_j + 60].
pub fn slow_manifold_hester(p: &HesterParams, x: f64) -> Result<f64> {
    let (x_j, y_j) = hester_jump_point(p)?;
    if x >= x_j {
        return Err(Error::OutOfDomain(format!("x = {x} must lie below the fold x_j = {x_j}")));
    }
    let f = |h: f64| crate::singular::critical_manifold_x(p, h) - x;
    let mut lo = y_j;
    let mut hi = y_j + 60.0;
    if f(hi) > 0.0 {
        return Err(Error::OutOfDomain(format!("x = {x} beyond the supported branch window")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Le Corbeiller invariant-manifold ordinate for x < 0.
///
/// Leading: y = eps W(-x/(eps b)).
/// Full: the leading term times (1 - eps b h / x) with the first-correction
/// constant h = 2; higher corrections are only defined implicitly and are
/// not evaluated.
pub fn slow_manifold_corbeiller(
    p: &CorbeillerParams,
    eps: f64,
    x: f64,
    order: ManifoldOrder,
) -> Result<f64> {
    if !(x < 0.0) {
        return Err(Error::OutOfDomain(format!("x = {x} must be negative")));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be > 0, got {eps}")));
    }
    let leading = eps * lambert_w(-x / (eps * p.b))?;
    Ok(match order {
        ManifoldOrder::Leading => leading,
        ManifoldOrder::Full => leading * (1.0 - eps * p.b * 2.0 / x),
    })
}

/// Max deviation of a trajectory from the manifold graph over an x-window,
/// after discarding the approach transient. Hester residuals are measured in
/// the scaled ordinate y/eps; Le Corbeiller residuals in y directly.
pub fn manifold_residual(
    model: Model,
    eps: f64,
    traj: &Trajectory,
    window: (f64, f64),
    order: ManifoldOrder,
) -> Result<f64> {
    let (lo, hi) = window;
    let mut residuals: Vec<f64> = Vec::new();
    for s in &traj.states {
        if s.x < lo || s.x > hi {
            continue;
        }
        let r = match model {
            Model::Hester(p) => {
                let h = slow_manifold_hester(&p, s.x)?;
                (s.y / eps - h).abs()
            }
            Model::Corbeiller(p) => {
                let y = slow_manifold_corbeiller(&p, eps, s.x, order)?;
                (s.y - y).abs()
            }
        };
        residuals.push(r);
    }
    if residuals.is_empty() {
        return Err(Error::EmptyWindow);
    }
    // transient cut: drop the prefix until the residual first falls below
    // three times its eventual windowed median
    let mut sorted = residuals.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    let start = residuals.iter().position(|&r| r <= 3.0 * median).unwrap_or(0);
    Ok(residuals[start..].iter().copied().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{corbeiller_field_normalized, State2};
    use crate::ode::{integrate, EventDirection, EventSpec, IntegratorConfig};

    /// Bisection oracle for W(w): solve z e^z = w independently of the
    /// Halley path.
    fn w_bisect(w: f64) -> f64 {
        let f = |z: f64| z * z.exp() - w;
        let (mut lo, mut hi) =
            if w >= 0.0 { (0.0, 1.0 + w.max(1.0).ln() * 2.0) } else { (-1.0, 0.0) };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn lambert_w_examples() {
        assert_eq!(lambert_w(0.0).unwrap(), 0.0);
        assert!((lambert_w(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-14);
        let w1 = lambert_w(1.0).unwrap();
        assert!((w1 - 0.5671432904097838).abs() < 1e-13);
        assert!((w1 - w_bisect(1.0)).abs() < 1e-13);

        let brk = -(-1.0_f64).exp();
        let w = lambert_w(brk + 1e-12).unwrap();
        assert!(w > -1.0 && (w + 1.0) < 2.5e-6, "W = {w}");
        assert!(lambert_w(brk).is_err());
        assert!(lambert_w(brk - 0.1).is_err());
    }

    #[test]
    fn lambert_w_identity_on_log_grid() {
        let brk = -(-1.0_f64).exp();
        let mut worst = 0.0_f64;
        // 10^4 points spread over (-1/e + 1e-6, 1e6]
        for i in 0..2000 {
            let t = i as f64 / 1999.0;
            let w = brk + 1e-6 + (brk.abs() - 1e-6) * t;
            let z = lambert_w(w).unwrap();
            worst = worst.max((z * z.exp() - w).abs() / w.abs().max(1.0));
        }
        for i in 0..8000 {
            let t = i as f64 / 7999.0;
            let w = 10f64.powf(-6.0 + 12.0 * t); // 1e-6 .. 1e6
            let z = lambert_w(w).unwrap();
            worst = worst.max((z * z.exp() - w).abs() / w.abs().max(1.0));
        }
        assert!(worst <= 1e-12, "worst relative identity residual {worst}");
    }

    #[test]
    fn lambert_w_log_asymptotics() {
        for w in [1e3, 1e4, 1e6] {
            let z = lambert_w(w).unwrap();
            let l = w.ln();
            let bound = 1.1 * l.ln() / l;
            assert!((z / l - 1.0).abs() <= bound, "w={w}: {} > {bound}", (z / l - 1.0).abs());
        }
    }

    #[test]
    fn z_function_examples() {
        assert_eq!(z_function(0.0).unwrap(), 0.0);
        assert!((z_function((-1.0_f64).exp()).unwrap() - 1.0).abs() < 1e-14);
        let z = z_function(0.1).unwrap();
        assert!((z - 1.0 / w_bisect(10.0)).abs() < 1e-12);
        assert!(z_function(-0.1).is_err());
    }

    #[test]
    fn z_identity_on_interval() {
        for i in 1..=300 {
            let s = 0.001 * i as f64; // (0, 0.3]
            let z = z_function(s).unwrap();
            let back = z * (-1.0 / z).exp();
            assert!((back - s).abs() <= 1e-12 * s, "s={s}: {back}");
        }
    }

    #[test]
    fn hester_manifold_examples() {
        let p = HesterParams::new(0.5, 0.4, 0.2, 0.3).unwrap();
        // at x = 0 the root is h = -(1/alpha) ln kappa = 2 ln 5
        let h = slow_manifold_hester(&p, 0.0).unwrap();
        assert!((h - 2.0 * 5.0_f64.ln()).abs() < 1e-12, "h = {h}");
        assert!((crate::singular::critical_manifold_x(&p, h)).abs() < 1e-12);

        // x -> x_j from below: h -> y_j
        let (x_j, y_j) = hester_jump_point(&p).unwrap();
        let h = slow_manifold_hester(&p, x_j - 1e-9).unwrap();
        assert!((h - y_j).abs() < 1e-3);

        // far left: residual of the defining equation stays tiny
        let h = slow_manifold_hester(&p, -10.0).unwrap();
        assert!((crate::singular::critical_manifold_x(&p, h) + 10.0).abs() < 1e-10);
        assert!(h > y_j && (h - 3.9834).abs() < 1e-3, "h = {h}");

        assert!(slow_manifold_hester(&p, x_j).is_err());
        assert!(slow_manifold_hester(&p, 2.0).is_err());
    }

    /// Branch correctness: x(h +- delta) brackets the input x.
    #[test]
    fn hester_manifold_brackets_input() {
        let p = HesterParams::new(0.5, 0.4, 0.2, 0.3).unwrap();
        let (_, y_j) = hester_jump_point(&p).unwrap();
        for x in [-10.0, -1.0, 0.0, 0.5, 1.0, 1.4] {
            let h = slow_manifold_hester(&p, x).unwrap();
            assert!(h > y_j);
            let lo = crate::singular::critical_manifold_x(&p, h + 1e-6);
            let hi = crate::singular::critical_manifold_x(&p, h - 1e-6);
            assert!(lo < x && x < hi, "x={x}: [{lo}, {hi}]");
        }
    }

    #[test]
    fn corbeiller_manifold_examples() {
        let p = CorbeillerParams::new(1.0, 0.25).unwrap();
        // x = -eps b e makes the argument of W equal to e
        let eps = 0.07;
        let y =
            slow_manifold_corbeiller(&p, eps, -eps * p.b * std::f64::consts::E, ManifoldOrder::Leading)
                .unwrap();
        assert!((y - eps).abs() < 1e-13);

        let y = slow_manifold_corbeiller(&p, 0.01, -0.5, ManifoldOrder::Leading).unwrap();
        assert!((y - 0.01 * w_bisect(200.0)).abs() < 1e-12);

        let yf = slow_manifold_corbeiller(&p, 0.01, -0.5, ManifoldOrder::Full).unwrap();
        assert!((yf - y * 1.01).abs() < 1e-14);

        assert!(slow_manifold_corbeiller(&p, 0.01, 0.2, ManifoldOrder::Leading).is_err());

        // monotone increasing in -x
        let mut prev = 0.0;
        for i in 1..50 {
            let x = -0.02 * i as f64;
            let y = slow_manifold_corbeiller(&p, 0.01, x, ManifoldOrder::Leading).unwrap();
            assert!(y > prev);
            prev = y;
        }
    }

    #[test]
    fn residual_of_graph_trajectory_is_zero() {
        // feed the graph itself as a fake trajectory
        let p = CorbeillerParams::new(1.0, 0.25).unwrap();
        let eps = 0.02;
        let mut traj = Trajectory::default();
        for i in 0..200 {
            let x = -0.9 + 0.6 * i as f64 / 199.0;
            let y = slow_manifold_corbeiller(&p, eps, x, ManifoldOrder::Leading).unwrap();
            traj.times.push(i as f64);
            traj.states.push(State2::new(x, y));
        }
        let r =
            manifold_residual(Model::Corbeiller(p), eps, &traj, (-0.8, -0.4), ManifoldOrder::Leading)
                .unwrap();
        assert!(r < 1e-14);

        let r = manifold_residual(Model::Corbeiller(p), eps, &traj, (5.0, 6.0), ManifoldOrder::Leading);
        assert!(matches!(r, Err(Error::EmptyWindow)));
    }

    /// Relative residual of the leading-order graph shrinks with eps.
    #[test]
    fn corbeiller_residual_ladder() {
        let p = CorbeillerParams::new(1.0, 0.25).unwrap();
        let mut prev = f64::INFINITY;
        for eps in [0.05, 0.02, 0.01] {
            let r = corbeiller_windowed_residual(&p, eps);
            assert!(r < prev, "residual ladder broke at eps={eps}: {r} >= {prev}");
            prev = r;
        }
    }

    fn corbeiller_windowed_residual(p: &CorbeillerParams, eps: f64) -> f64 {
        // start on the graph far left, ride the manifold across the window
        let x0 = -1.2;
        let y0 = slow_manifold_corbeiller(p, eps, x0, ManifoldOrder::Leading).unwrap();
        let field = move |s: State2| corbeiller_field_normalized(p, eps, s);
        let cfg = IntegratorConfig {
            rtol: 1e-10,
            atol: 1e-13,
            h_max: (10.0 * eps).min(0.1),
            ..Default::default()
        };
        let g = move |s: State2| s.x - (-0.25);
        let events = [EventSpec { id: 0, g: &g, direction: EventDirection::Rising, terminal: true }];
        let traj = integrate(&field, State2::new(x0, y0), (0.0, 4000.0), &cfg, &events).unwrap();
        let r =
            manifold_residual(Model::Corbeiller(*p), eps, &traj, (-0.8, -0.3), ManifoldOrder::Leading)
                .unwrap();
        // relative to the graph ordinate at the window midpoint
        r / slow_manifold_corbeiller(p, eps, -0.5, ManifoldOrder::Leading).unwrap()
    }
}
