//! Piecewise-smooth singular cycles: jump-off and drop points, the critical
//! manifold of the zoomed Hester system, and Hausdorff distances between
//! sampled curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{CorbeillerParams, HesterParams, Model, State2, System};
use crate::ode::{integrate, EventDirection, EventSpec, IntegratorConfig};

/// Number of arclength samples on the fast segment of a singular cycle.
/// Hausdorff comparisons at 1e-3 need spacing well below the cycle diameter.
pub const FAST_SEGMENT_SAMPLES: usize = 2000;

/// One labeled polyline segment of a singular cycle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CycleSegment {
    pub label: String,
    pub points: Vec<State2>,
}

/// Closed chain of segments forming the piecewise-smooth singular cycle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingularCycle {
    pub system: System,
    pub params: Model,
    pub segments: Vec<CycleSegment>,
}

impl SingularCycle {
    /// Largest gap between consecutive segment endpoints (including the wrap).
    pub fn closure_gap(&self) -> f64 {
        let n = self.segments.len();
        let mut worst = 0.0_f64;
        for i in 0..n {
            let a = self.segments[i].points.last().unwrap();
            let b = self.segments[(i + 1) % n].points.first().unwrap();
            worst = worst.max(a.dist(b));
        }
        worst
    }

    pub fn polylines(&self) -> Vec<&[State2]> {
        self.segments.iter().map(|s| s.points.as_slice()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("singular cycle serializes")
    }
}

/// Branch classification of a critical-manifold sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Attracting,
    Fold,
    Repelling,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CriticalManifoldSample {
    pub y2: f64,
    pub x: f64,
    pub branch: Branch,
}

/// Fold ordinate of the Hester critical manifold in the zoomed variable
/// y2 = y/eps. Defined for every valid parameter set; positive exactly when
/// kappa (1+alpha) < 1.
pub fn hester_fold_ordinate(p: &HesterParams) -> f64 {
    -(p.kappa_one_plus_alpha()).ln() / p.alpha
}

/// Jump-off point (x_j, y_j): the fold of the critical manifold, where the
/// slow flow leaves the attracting branch.
///
/// x_j = mu alpha / ((1+alpha)^{(1+alpha)/alpha} kappa^{1/alpha}),
/// y_j = -ln(kappa (1+alpha)) / alpha.
///
/// Requires kappa (1+alpha) strictly inside (0, 1); the boundary value 1 is
/// rejected because the existence theorem is silent there.
pub fn hester_jump_point(p: &HesterParams) -> Result<(f64, f64)> {
    if !p.cycle_condition() {
        return Err(Error::ConditionViolated(format!(
            "kappa (1+alpha) = {} must lie in (0, 1)",
            p.kappa_one_plus_alpha()
        )));
    }
    let a = p.alpha;
    let x_j = p.mu * a / ((1.0 + a).powf((1.0 + a) / a) * p.kappa.powf(1.0 / a));
    let y_j = hester_fold_ordinate(p);
    Ok((x_j, y_j))
}

/// x-coordinate on the critical manifold x = mu (e^{y2} - kappa e^{(1+alpha) y2}).
pub fn critical_manifold_x(p: &HesterParams, y2: f64) -> f64 {
    p.mu * (y2.exp() - p.kappa * ((1.0 + p.alpha) * y2).exp())
}

/// Sample of the critical manifold with its branch. Branch classification
/// uses the fold ordinate, which exists for every valid parameter set, so the
/// sampler works on both sides of the cycle condition.
pub fn critical_manifold_hester(p: &HesterParams, y2: f64) -> CriticalManifoldSample {
    let y_j = hester_fold_ordinate(p);
    let branch = if (y2 - y_j).abs() <= 1e-12 {
        Branch::Fold
    } else if y2 > y_j {
        Branch::Attracting
    } else {
        Branch::Repelling
    };
    CriticalManifoldSample { y2, x: critical_manifold_x(p, y2), branch }
}

/// Drop point of the Hester cycle: the first return to y = 0 of the lower
/// (linear focus) field started at (x_j, 0). Closed form
/// x_d = -x_j e^{-gamma pi / sqrt(1 - gamma^2)}.
pub fn drop_point_hester(p: &HesterParams) -> Result<f64> {
    let (x_j, _) = hester_jump_point(p)?;
    let om = (1.0 - p.gamma * p.gamma).sqrt();
    Ok(-x_j * (-p.gamma * std::f64::consts::PI / om).exp())
}

/// Same value by event integration of the lower piecewise-smooth field;
/// the independent cross-check of the closed form.
pub fn drop_point_hester_integrated(p: &HesterParams) -> Result<f64> {
    let (x_j, _) = hester_jump_point(p)?;
    lower_field_first_return(Model::Hester(*p), State2::new(x_j, 0.0), 0.0, 1e-11)
}

/// Drop point of the Le Corbeiller cycle: first return to y = 0 of the lower
/// field from the tangency (0, 0). The tangency is quadratic (the orbit
/// touches y = 0 with zero slope), so event monitoring starts only after a
/// short time advance to skip the trivial root.
pub fn drop_point_corbeiller(p: &CorbeillerParams) -> Result<f64> {
    lower_field_first_return(Model::Corbeiller(*p), State2::new(0.0, 0.0), 1e-6, 1e-11)
}

/// Lower-field expressions extended smoothly across y = 0.
fn lower_field(model: Model, s: State2) -> crate::models::FieldValue {
    match model {
        Model::Hester(p) => crate::models::FieldValue { dx: s.y, dy: -s.x - 2.0 * p.gamma * s.y },
        Model::Corbeiller(p) => {
            crate::models::FieldValue { dx: s.y + p.a, dy: -s.x + 2.0 * p.b * s.y }
        }
    }
}

fn lower_field_first_return(model: Model, start: State2, skip: f64, rtol: f64) -> Result<f64> {
    let field = move |s: State2| lower_field(model, s);
    let cfg = IntegratorConfig { rtol, atol: rtol * 1e-2, h_max: 0.05, ..Default::default() };
    let mut s0 = start;
    if skip > 0.0 {
        s0 = crate::ode::flow_map(&field, start, skip, &cfg)?;
    }
    let g = |s: State2| s.y;
    let events = [EventSpec { id: 0, g: &g, direction: EventDirection::Rising, terminal: true }];
    let traj = integrate(&field, s0, (0.0, 60.0), &cfg, &events)?;
    let ev = traj
        .events
        .last()
        .ok_or_else(|| Error::IntegrationFailure("no return to y = 0 within the time budget".into()))?;
    Ok(ev.state.x)
}

/// The singular cycle: a fast lower-field orbit from the jump point to the
/// drop point, closed by the slow segment on y = 0.
pub fn singular_cycle(model: Model) -> Result<SingularCycle> {
    let (jump, x_d) = match model {
        Model::Hester(p) => {
            let (x_j, _) = hester_jump_point(&p)?;
            (State2::new(x_j, 0.0), drop_point_hester(&p)?)
        }
        Model::Corbeiller(p) => (State2::new(0.0, 0.0), drop_point_corbeiller(&p)?),
    };

    let field = move |s: State2| lower_field(model, s);
    let cfg = IntegratorConfig { rtol: 1e-11, atol: 1e-13, h_max: 0.02, ..Default::default() };
    let skip = if matches!(model, Model::Corbeiller(_)) { 1e-6 } else { 0.0 };
    let mut s0 = jump;
    if skip > 0.0 {
        s0 = crate::ode::flow_map(&field, jump, skip, &cfg)?;
    }
    let g = |s: State2| s.y;
    let events = [EventSpec { id: 0, g: &g, direction: EventDirection::Rising, terminal: true }];
    let traj = integrate(&field, s0, (0.0, 60.0), &cfg, &events)?;
    if traj.events.is_empty() {
        return Err(Error::IntegrationFailure("fast segment did not return to y = 0".into()));
    }
    let mut fast: Vec<State2> = Vec::with_capacity(traj.states.len() + 1);
    fast.push(jump);
    fast.extend(traj.states.iter().copied());
    let fast = resample_polyline(&fast, FAST_SEGMENT_SAMPLES);

    let drop = State2::new(x_d, 0.0);
    let gamma1 = CycleSegment { label: "Gamma1".into(), points: fast };
    let gamma2 = CycleSegment { label: "Gamma2".into(), points: vec![drop, jump] };

    Ok(SingularCycle { system: model.system(), params: model, segments: vec![gamma1, gamma2] })
}

/// Resample a polyline to `n` points equally spaced in arclength.
pub fn resample_polyline(points: &[State2], n: usize) -> Vec<State2> {
    assert!(points.len() >= 2 && n >= 2);
    let mut cum = Vec::with_capacity(points.len());
    cum.push(0.0);
    for w in points.windows(2) {
        cum.push(cum.last().unwrap() + w[0].dist(&w[1]));
    }
    let total = *cum.last().unwrap();
    let mut out = Vec::with_capacity(n);
    let mut seg = 0usize;
    for i in 0..n {
        let target = total * i as f64 / (n - 1) as f64;
        while seg + 2 < cum.len() && cum[seg + 1] < target {
            seg += 1;
        }
        let d = cum[seg + 1] - cum[seg];
        let t = if d > 0.0 { ((target - cum[seg]) / d).clamp(0.0, 1.0) } else { 0.0 };
        out.push(State2::new(
            points[seg].x + t * (points[seg + 1].x - points[seg].x),
            points[seg].y + t * (points[seg + 1].y - points[seg].y),
        ));
    }
    out
}

fn resample_at_step(polylines: &[&[State2]], step: f64) -> Vec<State2> {
    let mut out = Vec::new();
    for pl in polylines {
        if pl.len() == 1 {
            out.push(pl[0]);
            continue;
        }
        let len: f64 = pl.windows(2).map(|w| w[0].dist(&w[1])).sum();
        let n = ((len / step).ceil() as usize + 1).max(2);
        out.extend(resample_polyline(pl, n));
    }
    out
}

/// Symmetric Hausdorff distance between two sets of polylines, each resampled
/// by arclength at `resample_step`.
pub fn hausdorff_distance(a: &[&[State2]], b: &[&[State2]], resample_step: f64) -> Result<f64> {
    if a.is_empty() || b.is_empty() || a.iter().any(|p| p.is_empty()) || b.iter().any(|p| p.is_empty())
    {
        return Err(Error::EmptyInput);
    }
    if !(resample_step > 0.0) {
        return Err(Error::InvalidParameter("resample_step must be positive".into()));
    }
    let pa = resample_at_step(a, resample_step);
    let pb = resample_at_step(b, resample_step);
    Ok(directed_hausdorff(&pa, &pb).max(directed_hausdorff(&pb, &pa)))
}

fn directed_hausdorff(a: &[State2], b: &[State2]) -> f64 {
    let mut worst_sq = 0.0_f64;
    for p in a {
        let mut best = f64::INFINITY;
        for q in b {
            let d = sq_dist(p, q);
            if d < best {
                best = d;
                if best <= worst_sq {
                    // this point cannot raise the maximum
                    break;
                }
            }
        }
        if best > worst_sq {
            worst_sq = best;
        }
    }
    worst_sq.sqrt()
}

fn sq_dist(p: &State2, q: &State2) -> f64 {
    (p.x - q.x).powi(2) + (p.y - q.y).powi(2)
}
