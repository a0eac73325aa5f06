//! Adaptive explicit Runge-Kutta integration (Dormand-Prince 5(4)) with dense
//! output and root-resolved event detection.
//!
//! The embedded pair keeps the local error per step below rtol*||s|| + atol.
//! Events are located by sign-change bracketing on the dense interpolant
//! followed by bisection; bisection is preferred over Newton because the
//! event functions can have tiny derivatives near the switching layer.

use crate::error::{Error, Result};
use crate::models::{FieldValue, State2};

#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
    pub event_time_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            h_init: 1e-4,
            h_max: 0.1,
            max_steps: 10_000_000,
            event_time_tol: 1e-12,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0 && self.event_time_tol > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter("max_steps must be positive".into()));
        }
        Ok(())
    }

    pub fn with_tols(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventDirection {
    Rising,
    Falling,
    Any,
}

/// A scalar event function g with a crossing direction. Terminal events stop
/// the integration at the located root.
pub struct EventSpec<'a> {
    pub id: u32,
    pub g: &'a dyn Fn(State2) -> f64,
    pub direction: EventDirection,
    pub terminal: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct TrajEvent {
    /// Index of the last accepted sample at or before the event.
    pub index: usize,
    pub id: u32,
    pub t: f64,
    pub state: State2,
}

/// Time-stamped samples from one integration, plus located events.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State2>,
    pub events: Vec<TrajEvent>,
}

impl Trajectory {
    pub fn last_state(&self) -> State2 {
        *self.states.last().expect("trajectory has at least the initial sample")
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least the initial sample")
    }

    /// CSV with header `t,x,y`, one row per accepted step; events appended as
    /// comment lines `# event,<id>,<t>,<x>,<y>`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,y\n");
        for (t, s) in self.times.iter().zip(&self.states) {
            out.push_str(&format!("{},{},{}\n", fmt17(*t), fmt17(s.x), fmt17(s.y)));
        }
        for ev in &self.events {
            out.push_str(&format!(
                "# event,{},{},{},{}\n",
                ev.id,
                fmt17(ev.t),
                fmt17(ev.state.x),
                fmt17(ev.state.y)
            ));
        }
        out
    }
}

/// 17 significant digits, enough to round-trip an f64 exactly.
pub fn fmt17(v: f64) -> String {
    format!("{:.16e}", v)
}

// Dormand-Prince 5(4) tableau (autonomous form; stage times are not needed).
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th order minus embedded 4th order weights.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];
// Dense-output coefficients.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

#[derive(Clone, Copy)]
struct DenseSeg {
    t0: f64,
    h: f64,
    c: [[f64; 2]; 5],
}

impl DenseSeg {
    /// Quartic interpolant, exact at both step endpoints.
    fn eval(&self, t: f64) -> State2 {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let mut out = [0.0; 2];
        for i in 0..2 {
            out[i] = self.c[0][i]
                + th * (self.c[1][i] + th1 * (self.c[2][i] + th * (self.c[3][i] + th1 * self.c[4][i])));
        }
        State2::new(out[0], out[1])
    }
}

struct Stepper<'f> {
    field: &'f dyn Fn(State2) -> FieldValue,
    k: [[f64; 2]; 7],
}

impl<'f> Stepper<'f> {
    fn eval(&self, s: State2) -> [f64; 2] {
        let f = (self.field)(s);
        [f.dx, f.dy]
    }

    /// One DP5(4) attempt from (t, y) with step h. k[0] must hold f(y).
    /// Returns (y_next, error_norm, dense segment).
    fn attempt(&mut self, t: f64, y: State2, h: f64, cfg: &IntegratorConfig) -> (State2, f64, DenseSeg) {
        let y0 = [y.x, y.y];
        for stage in 1..7 {
            let mut ys = y0;
            for j in 0..stage {
                let a = A[stage][j];
                if a != 0.0 {
                    ys[0] += h * a * self.k[j][0];
                    ys[1] += h * a * self.k[j][1];
                }
            }
            self.k[stage] = self.eval(State2::new(ys[0], ys[1]));
        }
        // stage 6 used A[6] == 5th-order weights, so its ys is the solution
        let mut y1 = y0;
        for j in 0..6 {
            let a = A[6][j];
            if a != 0.0 {
                y1[0] += h * a * self.k[j][0];
                y1[1] += h * a * self.k[j][1];
            }
        }
        let mut err = 0.0_f64;
        for i in 0..2 {
            let mut e = 0.0;
            for j in 0..7 {
                e += E[j] * self.k[j][i];
            }
            e *= h;
            let sc = cfg.atol + cfg.rtol * y0[i].abs().max(y1[i].abs());
            err = err.max((e / sc).abs());
        }
        let mut dense = DenseSeg { t0: t, h, c: [[0.0; 2]; 5] };
        for i in 0..2 {
            let dy = y1[i] - y0[i];
            let bspl = h * self.k[0][i] - dy;
            dense.c[0][i] = y0[i];
            dense.c[1][i] = dy;
            dense.c[2][i] = bspl;
            dense.c[3][i] = dy - h * self.k[6][i] - bspl;
            let mut d = 0.0;
            for j in 0..7 {
                d += D[j] * self.k[j][i];
            }
            dense.c[4][i] = h * d;
        }
        (State2::new(y1[0], y1[1]), err, dense)
    }
}

struct EventState {
    g_prev: f64,
}

fn direction_ok(dir: EventDirection, g0: f64, g1: f64) -> bool {
    match dir {
        EventDirection::Rising => g0 < 0.0 && g1 >= 0.0,
        EventDirection::Falling => g0 > 0.0 && g1 <= 0.0,
        EventDirection::Any => (g0 < 0.0 && g1 >= 0.0) || (g0 > 0.0 && g1 <= 0.0),
    }
}

/// Integrate ds/dt = field(s) over t_span, recording every accepted step.
///
/// Events fire on sign changes of g along the dense interpolant, refined by
/// bisection to `event_time_tol`; a crossing sitting exactly at the initial
/// time never fires. Terminal events truncate the trajectory at the root.
pub fn integrate(
    field: &dyn Fn(State2) -> FieldValue,
    s0: State2,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
    events: &[EventSpec],
) -> Result<Trajectory> {
    cfg.validate()?;
    let (t0, t_end) = t_span;
    if t0 == t_end || !t0.is_finite() || !t_end.is_finite() {
        return Err(Error::InvalidParameter("t_span must be nondegenerate and finite".into()));
    }
    let dir = (t_end - t0).signum();
    let span = (t_end - t0).abs();
    let h_floor = 1e-14 * span;

    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![s0],
        events: Vec::new(),
    };
    let mut stepper = Stepper { field, k: [[0.0; 2]; 7] };
    stepper.k[0] = stepper.eval(s0);

    let mut ev_state: Vec<EventState> =
        events.iter().map(|e| EventState { g_prev: (e.g)(s0) }).collect();

    let mut t = t0;
    let mut y = s0;
    let mut h = cfg.h_init.min(cfg.h_max).min(span) * dir;
    let mut steps = 0usize;

    while (t_end - t) * dir > 0.0 {
        if steps >= cfg.max_steps {
            return Err(Error::MaxStepsExceeded(cfg.max_steps));
        }
        steps += 1;
        if h.abs() > (t_end - t).abs() {
            h = t_end - t;
        }
        let (y1, err, dense) = stepper.attempt(t, y, h, cfg);
        if err <= 1.0 && y1.x.is_finite() && y1.y.is_finite() {
            let t1 = t + h;
            // event scan on a refinement of the step
            const SUBDIV: usize = 8;
            let mut crossings: Vec<(f64, usize)> = Vec::new();
            for (ei, ev) in events.iter().enumerate() {
                let mut ta = t;
                let mut ga = ev_state[ei].g_prev;
                for m in 1..=SUBDIV {
                    let tb = t + h * (m as f64 / SUBDIV as f64);
                    let gb = (ev.g)(dense.eval(tb));
                    if direction_ok(ev.direction, ga, gb) {
                        crossings.push((bisect_event(&dense, ev, ta, tb, cfg.event_time_tol), ei));
                    }
                    ta = tb;
                    ga = gb;
                }
            }
            crossings.sort_by(|a, b| {
                ((a.0 - t) * dir).partial_cmp(&((b.0 - t) * dir)).expect("event times are finite")
            });
            for (te, ei) in crossings {
                let se = dense.eval(te);
                traj.events.push(TrajEvent {
                    index: traj.times.len() - 1,
                    id: events[ei].id,
                    t: te,
                    state: se,
                });
                if events[ei].terminal {
                    traj.times.push(te);
                    traj.states.push(se);
                    return Ok(traj);
                }
            }

            traj.times.push(t1);
            traj.states.push(y1);
            for (ei, ev) in events.iter().enumerate() {
                ev_state[ei].g_prev = (ev.g)(y1);
            }
            t = t1;
            y = y1;
            stepper.k[0] = stepper.k[6]; // FSAL: stage 7 already evaluated at y1
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * fac).clamp(-cfg.h_max, cfg.h_max);
            if h == 0.0 {
                h = h_floor * dir;
            }
        } else {
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
            h *= fac;
            if h.abs() < h_floor {
                return Err(Error::StepUnderflow(t));
            }
        }
    }
    Ok(traj)
}

fn bisect_event(dense: &DenseSeg, ev: &EventSpec, mut ta: f64, mut tb: f64, tol: f64) -> f64 {
    let mut ga = (ev.g)(dense.eval(ta));
    for _ in 0..200 {
        if (tb - ta).abs() <= tol {
            break;
        }
        let tm = 0.5 * (ta + tb);
        let gm = (ev.g)(dense.eval(tm));
        if ga != 0.0 && (ga > 0.0) != (gm > 0.0) {
            tb = tm;
        } else {
            ta = tm;
            ga = gm;
        }
    }
    tb
}

/// Final state of an event-free integration. Deterministic: identical inputs
/// give bit-identical outputs on one platform.
pub fn flow_map(
    field: &dyn Fn(State2) -> FieldValue,
    s0: State2,
    t_final: f64,
    cfg: &IntegratorConfig,
) -> Result<State2> {
    if t_final == 0.0 {
        return Ok(s0);
    }
    let traj = integrate(field, s0, (0.0, t_final), cfg, &[])?;
    Ok(traj.last_state())
}
