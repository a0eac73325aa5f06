//! Poincare-section machinery on the smooth systems: return maps, limit
//! cycles via a damped secant on the fixed-point equation, the Floquet
//! multiplier by central differences, existence classification from random
//! seeds, and eps-convergence studies against the singular cycle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Epsilon, Model, State2, System};
use crate::ode::{fmt17, integrate, EventDirection, EventSpec, IntegratorConfig, Trajectory};
use crate::rng::SplitMix64;
use crate::singular::{hausdorff_distance, singular_cycle};

/// Finite-difference step for the Floquet multiplier.
pub const FLOQUET_FD_STEP: f64 = 1e-3;
/// Multiplier magnitudes below this are indistinguishable from roundoff in
/// the finite difference and are flagged instead of reported as digits.
pub const FLOQUET_NOISE_FLOOR: f64 = 1e-12;

/// Section y = -delta with a crossing direction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SectionSpec {
    pub delta: f64,
    pub crossing: Crossing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Crossing {
    Descending,
    Ascending,
}

impl Default for SectionSpec {
    fn default() -> Self {
        Self { delta: 0.1, crossing: Crossing::Descending }
    }
}

impl SectionSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(Error::InvalidParameter("section delta must be positive".into()));
        }
        Ok(())
    }

    fn direction(&self) -> EventDirection {
        match self.crossing {
            Crossing::Descending => EventDirection::Falling,
            Crossing::Ascending => EventDirection::Rising,
        }
    }
}

/// A located attracting limit cycle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitCycle {
    pub system: System,
    pub params: Model,
    pub eps: f64,
    pub fixed_point_x: f64,
    /// Period in the rescaled time.
    pub period_t1: f64,
    /// Period in the original time, by quadrature of dt/dt1 along the cycle.
    pub period_t: f64,
    pub floquet: f64,
    pub floquet_noise_floor_flag: bool,
    pub points: Vec<State2>,
}

impl LimitCycle {
    pub fn closure_gap(&self) -> f64 {
        self.points.first().unwrap().dist(self.points.last().unwrap())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("limit cycle serializes")
    }
}

/// Per-eps entry of a convergence study. Failed entries keep their error text
/// and leave the dependent columns empty.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub hausdorff: Option<f64>,
    pub period_t1: Option<f64>,
    pub period_t: Option<f64>,
    pub log_floquet: Option<f64>,
    pub floor_flag: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub system: System,
    pub params: Model,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    /// CSV `eps,hausdorff,period,log_floquet,floor_flag`; period is in the
    /// original time.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,hausdorff,period,log_floquet,floor_flag\n");
        for r in &self.rows {
            let fmt_opt = |v: &Option<f64>| v.map(fmt17).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt17(r.eps),
                fmt_opt(&r.hausdorff),
                fmt_opt(&r.period_t),
                fmt_opt(&r.log_floquet),
                u8::from(r.floor_flag)
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Existence {
    CycleFound,
    ConvergesToEquilibrium,
    Indeterminate,
}

fn integrator_for(eps: f64, rtol: f64) -> IntegratorConfig {
    IntegratorConfig {
        rtol,
        atol: rtol * 1e-3,
        h_max: (10.0 * eps).min(0.1),
        max_steps: 50_000_000,
        ..Default::default()
    }
}

/// Generous bound on one return in rescaled time. The slow segment crosses
/// an O(1) window at speed eps h sigma, and the logistic factor sigma can sit
/// near 1e-3 for parameter sets with a high fold, so the bound carries a
/// large safety margin.
fn t1_budget(eps: f64) -> f64 {
    (3000.0 / eps).max(2000.0)
}

fn existence_gate(model: &Model) -> Result<()> {
    match model {
        Model::Hester(p) => {
            if !p.cycle_condition() {
                return Err(Error::ConditionViolated(format!(
                    "kappa (1+alpha) = {} must lie in (0, 1)",
                    p.kappa_one_plus_alpha()
                )));
            }
            Ok(())
        }
        // construction already enforces b in (0, 1), a > 0
        Model::Corbeiller(_) => Ok(()),
    }
}

/// x-coordinate of the next same-direction crossing of y = -delta by the
/// normalized flow started at (x, -delta).
pub fn return_map(model: &Model, eps: &Epsilon, section: &SectionSpec, x: f64) -> Result<f64> {
    Ok(return_map_full(model, eps, section, x, 1e-10)?.0)
}

/// Return map together with the crossing time and the trajectory.
fn return_map_full(
    model: &Model,
    eps: &Epsilon,
    section: &SectionSpec,
    x: f64,
    rtol: f64,
) -> Result<(f64, f64, Trajectory)> {
    section.validate()?;
    let e = eps.positive()?;
    let m = *model;
    let field = move |s: State2| m.normalized(e, s);
    let delta = section.delta;
    let g = move |s: State2| s.y + delta;
    let events = [EventSpec { id: 0, g: &g, direction: section.direction(), terminal: true }];
    let cfg = integrator_for(e, rtol);
    let budget = t1_budget(e);
    let traj = integrate(&field, State2::new(x, -delta), (0.0, budget), &cfg, &events)?;
    match traj.events.last() {
        Some(ev) => Ok((ev.state.x, ev.t, traj)),
        None => Err(Error::NoReturn(budget)),
    }
}

/// Transient-settled seed: flow three returns from the jump-off point.
fn seed_from_jump(model: &Model, eps: &Epsilon, section: &SectionSpec) -> Result<f64> {
    let e = eps.positive()?;
    let m = *model;
    let field = move |s: State2| m.normalized(e, s);
    let start = match model {
        Model::Hester(p) => {
            let (x_j, _) = crate::singular::hester_jump_point(p)?;
            State2::new(x_j, 0.0)
        }
        Model::Corbeiller(_) => State2::new(0.0, 0.0),
    };
    let delta = section.delta;
    let g = move |s: State2| s.y + delta;
    let events = [EventSpec { id: 0, g: &g, direction: section.direction(), terminal: true }];
    let cfg = integrator_for(e, 1e-9);
    let budget = t1_budget(e);
    let traj = integrate(&field, start, (0.0, budget), &cfg, &events)?;
    let mut x = traj.events.last().ok_or(Error::NoReturn(budget))?.state.x;
    for _ in 0..2 {
        x = return_map_full(model, eps, section, x, 1e-9)?.0;
    }
    Ok(x)
}

/// Locate the attracting limit cycle: damped secant on Pi(x) - x from a
/// transient-settled seed, Floquet multiplier by central differences, cycle
/// geometry and both periods from one final return.
pub fn find_cycle(model: &Model, eps: &Epsilon, section: &SectionSpec) -> Result<LimitCycle> {
    existence_gate(model)?;
    let e = eps.positive()?;
    let x_star = solve_fixed_point(model, eps, section, seed_from_jump(model, eps, section)?)?;

    // Floquet multiplier by central finite differences at the fixed point
    let rtol_fd = 1e-12;
    let fp = return_map_full(model, eps, section, x_star + FLOQUET_FD_STEP, rtol_fd)?.0;
    let fm = return_map_full(model, eps, section, x_star - FLOQUET_FD_STEP, rtol_fd)?.0;
    let floquet = (fp - fm) / (2.0 * FLOQUET_FD_STEP);
    let floor = floquet.abs() < FLOQUET_NOISE_FLOOR;

    // one full return for the polyline and both periods
    let m = *model;
    let (_, period_t1, traj) = return_map_full(model, eps, section, x_star, 1e-10)?;
    let mut points = traj.states.clone();
    points[0] = State2::new(x_star, -section.delta);
    // original time by trapezoid quadrature of dt/dt1 over the samples
    let mut period_t = 0.0;
    for (ts, ss) in traj.times.windows(2).zip(traj.states.windows(2)) {
        let f0 = m.time_dilation(e, ss[0].y);
        let f1 = m.time_dilation(e, ss[1].y);
        period_t += 0.5 * (f0 + f1) * (ts[1] - ts[0]);
    }

    // transversality at the fixed point
    let dy = m.normalized(e, State2::new(x_star, -section.delta)).dy;
    if dy.abs() <= 1e-6 {
        return Err(Error::ConditionViolated(format!(
            "section y = -{} is not transversal at the fixed point (|dy| = {})",
            section.delta,
            dy.abs()
        )));
    }

    Ok(LimitCycle {
        system: model.system(),
        params: *model,
        eps: e,
        fixed_point_x: x_star,
        period_t1,
        period_t,
        floquet,
        floquet_noise_floor_flag: floor,
        points,
    })
}

fn solve_fixed_point(model: &Model, eps: &Epsilon, section: &SectionSpec, seed: f64) -> Result<f64> {
    let pi = |x: f64| -> Result<f64> { return_map_full(model, eps, section, x, 1e-11).map(|r| r.0) };
    let mut x0 = seed;
    let mut f0 = pi(x0)? - x0;
    if f0.abs() < 1e-12 {
        return Ok(x0);
    }
    let mut x1 = x0 + f0; // fixed-point step doubles as the second secant node
    let mut f1 = pi(x1)? - x1;
    for _ in 0..60 {
        if f1.abs() < 1e-10 {
            return Ok(x1);
        }
        let denom = f1 - f0;
        let mut step = if denom.abs() > 1e-300 { -f1 * (x1 - x0) / denom } else { f1 };
        // damping: never jump farther than a section width
        let cap = section.delta.max(0.05);
        if step.abs() > cap {
            step = cap * step.signum();
        }
        let x2 = x1 + step;
        let f2 = pi(x2)? - x2;
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
    }
    if f1.abs() < 1e-9 {
        Ok(x1)
    } else {
        Err(Error::NoConvergence(format!("secant stalled at x = {x1}, residual {f1}")))
    }
}

/// Classify the long-run behavior from random seeds in a ball around the
/// equilibrium, with the default settling budget of 500 original-time units.
/// Deterministic for a fixed RNG seed.
pub fn classify_existence(
    model: &Model,
    eps: &Epsilon,
    ball_radius: f64,
    n_seeds: usize,
    rng_seed: u64,
) -> Existence {
    classify_existence_budget(model, eps, ball_radius, n_seeds, rng_seed, 500.0)
}

/// State reached after `tau_end` units of ORIGINAL time, advanced in the
/// rescaled time with the dilation factor accumulated by quadrature. The
/// rescaled clock runs up to ~1/(eps sigma) faster along the slow manifold,
/// so budgets stated in original time are the ones that match the physical
/// oscillation count.
pub fn flow_to_original_time(
    model: &Model,
    eps: f64,
    s0: State2,
    tau_end: f64,
    cfg: &IntegratorConfig,
) -> Result<State2> {
    let m = *model;
    let field = move |s: State2| m.normalized(eps, s);
    let chunk = 500.0_f64;
    let mut tau = 0.0;
    let mut state = s0;
    let mut spent_t1 = 0.0;
    let t1_cap = 1e7;
    while tau < tau_end {
        let traj = integrate(&field, state, (0.0, chunk), cfg, &[])?;
        for (ts, ss) in traj.times.windows(2).zip(traj.states.windows(2)) {
            let f0 = m.time_dilation(eps, ss[0].y);
            let f1 = m.time_dilation(eps, ss[1].y);
            let dtau = 0.5 * (f0 + f1) * (ts[1] - ts[0]);
            if tau + dtau >= tau_end {
                // linear interpolation in tau inside the step
                let frac = if dtau > 0.0 { (tau_end - tau) / dtau } else { 0.0 };
                return Ok(State2::new(
                    ss[0].x + frac * (ss[1].x - ss[0].x),
                    ss[0].y + frac * (ss[1].y - ss[0].y),
                ));
            }
            tau += dtau;
        }
        state = traj.last_state();
        spent_t1 += chunk;
        if spent_t1 > t1_cap {
            return Err(Error::IntegrationFailure(format!(
                "original-time budget {tau_end} not reached within t1 = {t1_cap}"
            )));
        }
    }
    Ok(state)
}

/// Classification with an explicit settling budget in original-time units.
pub fn classify_existence_budget(
    model: &Model,
    eps: &Epsilon,
    ball_radius: f64,
    n_seeds: usize,
    rng_seed: u64,
    tau_settle: f64,
) -> Existence {
    let Ok(e) = eps.positive() else { return Existence::Indeterminate };
    if n_seeds == 0 {
        return Existence::Indeterminate;
    }
    // the existence theorem is silent exactly on the boundary
    if let Model::Hester(p) = model {
        if (p.kappa_one_plus_alpha() - 1.0).abs() < 1e-12 {
            return Existence::Indeterminate;
        }
    }
    let mut rng = SplitMix64::new(rng_seed);
    let eq = model.equilibrium(eps);
    let seeds: Vec<State2> = (0..n_seeds)
        .map(|_| {
            let (dx, dy) = rng.in_disk(ball_radius);
            State2::new(eq.x + dx, eq.y + dy)
        })
        .collect();
    let cfg = integrator_for(e, 1e-9);

    let finals: Vec<Option<State2>> = seeds
        .iter()
        .map(|s0| flow_to_original_time(model, e, *s0, tau_settle, &cfg).ok())
        .collect();

    // cycle route: every settled seed's next section crossing must land on
    // the fixed point (distance measured inside the section)
    let section = SectionSpec::default();
    if let Ok(cycle) = find_cycle(model, eps, &section) {
        let approach_all = finals.iter().all(|fin| match fin {
            Some(s) => seed_hits_cycle(model, e, *s, &cycle, &section),
            None => false,
        });
        if approach_all {
            return Existence::CycleFound;
        }
    }

    let eq_all = finals.iter().all(|fin| match fin {
        Some(s) => s.dist(&eq) < 1e-4,
        None => false,
    });
    if eq_all {
        return Existence::ConvergesToEquilibrium;
    }
    Existence::Indeterminate
}

fn seed_hits_cycle(model: &Model, e: f64, s: State2, cycle: &LimitCycle, section: &SectionSpec) -> bool {
    let m = *model;
    let field = move |s: State2| m.normalized(e, s);
    let delta = section.delta;
    let g = move |s: State2| s.y + delta;
    let events = [EventSpec { id: 0, g: &g, direction: section.direction(), terminal: true }];
    let cfg = integrator_for(e, 1e-9);
    let budget = 3.0 * cycle.period_t1 + t1_budget(e);
    match integrate(&field, s, (0.0, budget), &cfg, &events) {
        Ok(traj) => match traj.events.last() {
            Some(ev) => (ev.state.x - cycle.fixed_point_x).abs() < 1e-3,
            None => false,
        },
        Err(_) => false,
    }
}

/// Cycle data, Hausdorff distance to the singular cycle, periods and
/// contraction data along a decreasing eps ladder. Per-eps failures are kept
/// as rows with their error text.
pub fn convergence_study(
    model: &Model,
    eps_list: &[f64],
    section: &SectionSpec,
) -> Result<ConvergenceReport> {
    if eps_list.is_empty() || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("eps_list must be nonempty, strictly decreasing".into()));
    }
    let sing = singular_cycle(*model)?;
    let sing_polys = sing.polylines();
    let mut rows = Vec::new();
    for &e in eps_list {
        let eps = Epsilon::new(e)?;
        match find_cycle(model, &eps, section) {
            Ok(cycle) => {
                let cyc_poly: Vec<&[State2]> = vec![&cycle.points];
                let hd = hausdorff_distance(&cyc_poly, &sing_polys, 1e-3)?;
                rows.push(ConvergenceRow {
                    eps: e,
                    hausdorff: Some(hd),
                    period_t1: Some(cycle.period_t1),
                    period_t: Some(cycle.period_t),
                    log_floquet: Some(cycle.floquet.abs().ln()),
                    floor_flag: cycle.floquet_noise_floor_flag,
                    error: None,
                });
            }
            Err(err) => rows.push(ConvergenceRow {
                eps: e,
                hausdorff: None,
                period_t1: None,
                period_t: None,
                log_floquet: None,
                floor_flag: false,
                error: Some(err.to_string()),
            }),
        }
    }
    Ok(ConvergenceReport { system: model.system(), params: *model, rows })
}
