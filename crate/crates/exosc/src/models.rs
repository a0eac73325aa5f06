//! The two oscillator vector fields, their time-rescaled (normalized) forms,
//! their piecewise-smooth limits, and exact equilibria.
//!
//! The raw systems contain terms `exp(y/eps)` which overflow double precision
//! long before the dynamics become extreme, so every downstream consumer works
//! with the normalized fields: the raw right-hand side multiplied by the
//! strictly positive factor `1/(1 + exp((1+alpha) y/eps))` (respectively
//! `1/(1 + exp(y/eps))`). This leaves orbits unchanged and admits a
//! piecewise-smooth limit as eps -> 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent magnitude beyond which the raw fields refuse to evaluate.
/// exp(710) is already infinite in f64.
pub const RAW_EXP_GUARD: f64 = 700.0;

/// Which oscillator a generic operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum System {
    Hester,
    Corbeiller,
}

impl System {
    pub fn name(&self) -> &'static str {
        match self {
            System::Hester => "hester",
            System::Corbeiller => "corbeiller",
        }
    }
}

/// Parameters of the transistor-oscillator model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HesterParams {
    pub alpha: f64,
    pub mu: f64,
    pub kappa: f64,
    pub gamma: f64,
}

impl HesterParams {
    pub fn new(alpha: f64, mu: f64, kappa: f64, gamma: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("mu must be > 0, got {mu}")));
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa must be > 0, got {kappa}")));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in (0, 1), got {gamma} (gamma >= 1 is the stable-node regime, not supported)"
            )));
        }
        Ok(Self { alpha, mu, kappa, gamma })
    }

    /// kappa (1 + alpha), the quantity whose position relative to (0, 1)
    /// decides between a limit cycle and convergence to the equilibrium.
    pub fn kappa_one_plus_alpha(&self) -> f64 {
        self.kappa * (1.0 + self.alpha)
    }

    /// True iff kappa (1 + alpha) lies strictly inside (0, 1).
    pub fn cycle_condition(&self) -> bool {
        let k = self.kappa_one_plus_alpha();
        k > 0.0 && k < 1.0
    }
}

/// Parameters of the forced two-stroke oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorbeillerParams {
    pub a: f64,
    pub b: f64,
}

impl CorbeillerParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidParameter(format!("a must be > 0, got {a}")));
        }
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::InvalidParameter(format!("b must lie in (0, 1), got {b}")));
        }
        Ok(Self { a, b })
    }
}

/// Singular perturbation parameter. `PwsLimit` is the distinguished eps -> 0
/// sentinel; only operations defined in the piecewise-smooth limit accept it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Epsilon {
    Positive(f64),
    PwsLimit,
}

impl Epsilon {
    pub fn new(value: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::InvalidParameter(format!("eps must be > 0, got {value}")));
        }
        Ok(Epsilon::Positive(value))
    }

    pub fn pws_limit() -> Self {
        Epsilon::PwsLimit
    }

    pub fn is_pws_limit(&self) -> bool {
        matches!(self, Epsilon::PwsLimit)
    }

    /// The positive value, rejecting the sentinel.
    pub fn positive(&self) -> Result<f64> {
        match self {
            Epsilon::Positive(v) => Ok(*v),
            Epsilon::PwsLimit => Err(Error::InvalidParameter(
                "the eps -> 0 sentinel is only accepted by piecewise-smooth-limit operations".into(),
            )),
        }
    }
}

/// A phase-plane point. Serializes as the pair [x, y].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "(f64, f64)", from = "(f64, f64)")]
pub struct State2 {
    pub x: f64,
    pub y: f64,
}

impl From<State2> for (f64, f64) {
    fn from(s: State2) -> Self {
        (s.x, s.y)
    }
}

impl From<(f64, f64)> for State2 {
    fn from((x, y): (f64, f64)) -> Self {
        State2 { x, y }
    }
}

impl State2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &State2) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// A vector-field value in the rescaled time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldValue {
    pub dx: f64,
    pub dy: f64,
}

impl FieldValue {
    pub fn norm(&self) -> f64 {
        (self.dx * self.dx + self.dy * self.dy).sqrt()
    }
}

/// log(1 + e^u), computed as max(u, 0) + log1p(e^{-|u|}) so it never overflows.
pub fn softplus(u: f64) -> f64 {
    u.max(0.0) + (-u.abs()).exp().ln_1p()
}

/// The logistic factor 1/(1 + e^u), computed as exp(-softplus(u)).
pub fn logistic_factor(u: f64) -> f64 {
    (-softplus(u)).exp()
}

/// Normalized Hester field: the raw right-hand side times 1/(1 + e^{(1+alpha) y/eps}).
///
/// dy is assembled as (-x - 2 gamma y) sigma + mu exp(y/eps - softplus((1+alpha) y/eps))
/// - kappa mu (1 - sigma). The exponent of the middle term is <= 0 for every
/// input, so the result is finite for all finite states and all eps > 0.
pub fn hester_field_normalized(p: &HesterParams, eps: f64, s: State2) -> FieldValue {
    debug_assert!(eps > 0.0);
    let u = (1.0 + p.alpha) * s.y / eps;
    let sigma = logistic_factor(u);
    let mid = p.mu * (s.y / eps - softplus(u)).exp();
    FieldValue {
        dx: s.y * sigma,
        dy: (-s.x - 2.0 * p.gamma * s.y) * sigma + mid - p.kappa * p.mu * (1.0 - sigma),
    }
}

/// Normalized Le Corbeiller field: the raw right-hand side times 1/(1 + e^{y/eps}).
pub fn corbeiller_field_normalized(p: &CorbeillerParams, eps: f64, s: State2) -> FieldValue {
    debug_assert!(eps > 0.0);
    let sigma = logistic_factor(s.y / eps);
    FieldValue {
        dx: (s.y + p.a) * sigma,
        dy: (-s.x + 2.0 * p.b * s.y) * sigma - p.b * s.y * (1.0 - sigma),
    }
}

/// Literal Hester right-hand side. Errors once any exponent magnitude passes
/// the overflow guard; callers should switch to the normalized form there.
pub fn hester_field_raw(p: &HesterParams, eps: f64, s: State2) -> Result<FieldValue> {
    debug_assert!(eps > 0.0);
    let e1 = s.y / eps;
    let e2 = (1.0 + p.alpha) * s.y / eps;
    for e in [e1, e2] {
        if e.abs() > RAW_EXP_GUARD {
            return Err(Error::OverflowGuard(e.abs(), RAW_EXP_GUARD));
        }
    }
    Ok(FieldValue {
        dx: s.y,
        dy: -s.x - 2.0 * p.gamma * s.y + p.mu * (e1.exp() - p.kappa * e2.exp()),
    })
}

/// Literal Le Corbeiller right-hand side, same overflow guard.
pub fn corbeiller_field_raw(p: &CorbeillerParams, eps: f64, s: State2) -> Result<FieldValue> {
    debug_assert!(eps > 0.0);
    let e1 = s.y / eps;
    if e1.abs() > RAW_EXP_GUARD {
        return Err(Error::OverflowGuard(e1.abs(), RAW_EXP_GUARD));
    }
    Ok(FieldValue {
        dx: s.y + p.a,
        dy: -s.x + p.b * s.y * (2.0 - e1.exp()),
    })
}

/// Parameters of either system, for generic operations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Hester(HesterParams),
    Corbeiller(CorbeillerParams),
}

impl Model {
    pub fn system(&self) -> System {
        match self {
            Model::Hester(_) => System::Hester,
            Model::Corbeiller(_) => System::Corbeiller,
        }
    }

    pub fn normalized(&self, eps: f64, s: State2) -> FieldValue {
        match self {
            Model::Hester(p) => hester_field_normalized(p, eps, s),
            Model::Corbeiller(p) => corbeiller_field_normalized(p, eps, s),
        }
    }

    pub fn raw(&self, eps: f64, s: State2) -> Result<FieldValue> {
        match self {
            Model::Hester(p) => hester_field_raw(p, eps, s),
            Model::Corbeiller(p) => corbeiller_field_raw(p, eps, s),
        }
    }

    pub fn pws(&self, s: State2) -> Result<FieldValue> {
        pws_field(*self, s)
    }

    /// dt/dt1: the reciprocal of the time-rescaling factor; always in (0, 1].
    pub fn time_dilation(&self, eps: f64, y: f64) -> f64 {
        let u = match self {
            Model::Hester(p) => (1.0 + p.alpha) * y / eps,
            Model::Corbeiller(_) => y / eps,
        };
        logistic_factor(u)
    }

    pub fn equilibrium(&self, eps: &Epsilon) -> State2 {
        equilibrium(*self, eps)
    }
}

/// Piecewise-smooth limit field. Undefined on the switching manifold y = 0,
/// where the sliding vector field degenerates into a line of pseudo-equilibria.
pub fn pws_field(model: Model, s: State2) -> Result<FieldValue> {
    if s.y == 0.0 {
        return Err(Error::OnSwitchingManifold);
    }
    Ok(match model {
        Model::Hester(p) => {
            if s.y > 0.0 {
                FieldValue { dx: 0.0, dy: -p.kappa * p.mu }
            } else {
                FieldValue { dx: s.y, dy: -s.x - 2.0 * p.gamma * s.y }
            }
        }
        Model::Corbeiller(p) => {
            if s.y > 0.0 {
                FieldValue { dx: 0.0, dy: -p.b * s.y }
            } else {
                FieldValue { dx: s.y + p.a, dy: -s.x + 2.0 * p.b * s.y }
            }
        }
    })
}

/// The unique equilibrium of the raw system. Closed form; the raw field
/// vanishes there identically. Accepts the eps -> 0 sentinel.
pub fn equilibrium(model: Model, eps: &Epsilon) -> State2 {
    match model {
        Model::Hester(p) => State2::new(p.mu * (1.0 - p.kappa), 0.0),
        Model::Corbeiller(p) => {
            let decay = match eps {
                Epsilon::Positive(e) => (-p.a / e).exp(),
                Epsilon::PwsLimit => 0.0,
            };
            State2::new(-p.a * p.b * (2.0 - decay), -p.a)
        }
    }
}
