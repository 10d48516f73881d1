//! SVIR compartment model: parameters, state, vector fields, threshold and equilibria.
//!
//! The state is the quadruple of population fractions (S, V, I, R) of a
//! unit population. Birth and death rates coincide, so the total is
//! conserved by every vector field in this module.

use serde::{Deserialize, Serialize};

use crate::control::transmission_rate;
use crate::error::{Error, NumericalFailure, Result};

/// Slack allowed on nonnegativity and unit-sum checks after floating-point arithmetic.
pub const STATE_TOLERANCE: f64 = 1e-9;

/// Epidemiological and demographic rates, all per day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpidemicParams {
    /// Baseline transmission rate of susceptibles.
    pub beta0: f64,
    /// Recovery rate of infected.
    pub gamma: f64,
    /// Rate at which vaccinees become fully immune.
    pub gamma1: f64,
    /// Vaccine ineffectiveness; vaccinees are infected at `epsilon * beta`.
    pub epsilon: f64,
    /// Birth and death rate.
    pub mu: f64,
    /// Constant vaccination rate of the uncontrolled model. Only used
    /// by the reproduction number and the equilibria.
    pub alpha: f64,
}

impl EpidemicParams {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("beta0", self.beta0),
            ("gamma", self.gamma),
            ("gamma1", self.gamma1),
            ("mu", self.mu),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("must be positive, got {value}"),
                ));
            }
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::invalid(
                "alpha",
                format!("must be nonnegative, got {}", self.alpha),
            ));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::invalid(
                "epsilon",
                format!("must lie in [0, 1], got {}", self.epsilon),
            ));
        }
        Ok(())
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    /// Transmission rate of vaccinees at zero control, `epsilon * beta0`.
    pub fn beta1(&self) -> f64 {
        self.epsilon * self.beta0
    }
}

/// Population fractions of the four compartments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvirState {
    pub s: f64,
    pub v: f64,
    pub i: f64,
    pub r: f64,
}

impl SvirState {
    pub const LABELS: [&'static str; 4] = ["S", "V", "I", "R"];

    pub fn new(s: f64, v: f64, i: f64, r: f64) -> Result<Self> {
        let state = SvirState { s, v, i, r };
        state.validate()?;
        Ok(state)
    }

    /// Builds a state from S, V, I and closes the population with `R = 1 - S - V - I`.
    pub fn from_svi(s: f64, v: f64, i: f64) -> Result<Self> {
        Self::new(s, v, i, 1.0 - s - v - i)
    }

    pub fn validate(&self) -> Result<()> {
        for (label, value) in Self::LABELS.iter().zip(self.to_array()) {
            if !value.is_finite() || value < -STATE_TOLERANCE {
                return Err(Error::invalid(
                    format!("initial_state.{}", label.to_lowercase()),
                    format!("compartment fraction must be nonnegative, got {value}"),
                ));
            }
        }
        let total = self.total();
        if (total - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::invalid(
                "initial_state",
                format!("compartments must sum to 1, got {total}"),
            ));
        }
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.s + self.v + self.i + self.r
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.s, self.v, self.i, self.r]
    }

    pub(crate) fn from_array(a: [f64; 4]) -> Self {
        SvirState {
            s: a[0],
            v: a[1],
            i: a[2],
            r: a[3],
        }
    }
}

/// Admissible upper bounds of the two controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlBounds {
    pub u0_max: f64,
    pub u1_max: f64,
}

impl ControlBounds {
    pub fn new(u0_max: f64, u1_max: f64) -> Result<Self> {
        let bounds = ControlBounds { u0_max, u1_max };
        bounds.validate()?;
        Ok(bounds)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("u0_max", self.u0_max), ("u1_max", self.u1_max)] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(Error::invalid(
                    name,
                    format!("must lie in (0, 1], got {value}"),
                ));
            }
        }
        Ok(())
    }

    pub fn contains(&self, u: Control) -> bool {
        (0.0..=self.u0_max).contains(&u.u0) && (0.0..=self.u1_max).contains(&u.u1)
    }

    pub fn clamp(&self, u: Control) -> Control {
        Control {
            u0: u.u0.clamp(0.0, self.u0_max),
            u1: u.u1.clamp(0.0, self.u1_max),
        }
    }

    /// The constant strategy with both controls at their upper bounds.
    pub fn full(&self) -> Control {
        Control {
            u0: self.u0_max,
            u1: self.u1_max,
        }
    }
}

/// Pointwise control value: social restriction `u0` and vaccination rate `u1`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Control {
    pub u0: f64,
    pub u1: f64,
}

impl Control {
    pub const ZERO: Control = Control { u0: 0.0, u1: 0.0 };

    pub fn new(u0: f64, u1: f64) -> Self {
        Control { u0, u1 }
    }

    /// `(1 - w) * self + w * other`.
    pub fn lerp(self, other: Control, w: f64) -> Control {
        Control {
            u0: (1.0 - w) * self.u0 + w * other.u0,
            u1: (1.0 - w) * self.u1 + w * other.u1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub ds: f64,
    pub dv: f64,
    pub di: f64,
    pub dr: f64,
}

impl StateDerivative {
    pub fn to_array(&self) -> [f64; 4] {
        [self.ds, self.dv, self.di, self.dr]
    }

    pub fn sum(&self) -> f64 {
        self.ds + self.dv + self.di + self.dr
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Controlled vector field without bound checks.
///
/// The four rates are assembled from shared flux terms so that their sum
/// cancels exactly. Intermediate Runge-Kutta stages call this directly.
pub fn svir_field(x: &SvirState, u: Control, p: &EpidemicParams) -> StateDerivative {
    let beta = transmission_rate(p.beta0, u.u0);
    let infect_s = beta * x.s * x.i;
    let infect_v = p.epsilon * beta * x.v * x.i;
    let vaccinate = u.u1 * x.s;
    let immunize = p.gamma1 * x.v;

    // births all enter S; deaths leave every compartment at rate mu.
    // dR closes the balance, which equals gamma1*V + gamma*I - mu*R on N = 1.
    let ds = p.mu - infect_s - vaccinate - p.mu * x.s;
    let dv = vaccinate - infect_v - immunize - p.mu * x.v;
    let di = infect_s + infect_v - (p.gamma + p.mu) * x.i;
    let dr = -(ds + dv + di);
    StateDerivative { ds, dv, di, dr }
}

/// Right-hand side of the controlled SVIR system.
///
/// Controls must already lie in `[0, bound]`; out-of-range values are a
/// caller bug and are rejected, never clamped.
pub fn svir_rhs(
    x: &SvirState,
    u: Control,
    p: &EpidemicParams,
    bounds: &ControlBounds,
) -> Result<StateDerivative> {
    if !bounds.contains(u) {
        return Err(Error::precondition(format!(
            "control ({}, {}) outside [0, {}] x [0, {}]",
            u.u0, u.u1, bounds.u0_max, bounds.u1_max
        )));
    }
    if x.to_array().iter().any(|c| *c < -STATE_TOLERANCE) {
        return Err(Error::precondition(format!(
            "negative compartment in {x:?}"
        )));
    }
    Ok(svir_field(x, u, p))
}

/// Uncontrolled SVIR system with constant vaccination rate `alpha`.
pub fn basic_svir_rhs(x: &SvirState, p: &EpidemicParams) -> StateDerivative {
    svir_field(x, Control::new(0.0, p.alpha), p)
}

/// Basic reproduction number of the continuously vaccinated model.
pub fn r0_continuous(p: &EpidemicParams) -> f64 {
    let (mu, alpha) = (p.mu, p.alpha);
    let beta = p.beta0;
    let direct = mu * beta / ((mu + alpha) * (mu + p.gamma));
    let via_vaccinees = alpha * mu * p.beta1() / ((mu + p.gamma1) * (mu + alpha) * (mu + p.gamma));
    direct + via_vaccinees
}

pub fn disease_free_equilibrium(p: &EpidemicParams) -> SvirState {
    let s = p.mu / (p.mu + p.alpha);
    let v = p.alpha * s / (p.gamma1 + p.mu);
    SvirState::from_array([s, v, 0.0, 1.0 - s - v])
}

const BRACKET_WIDTH: f64 = 1e-14;
const EQUILIBRIUM_RESIDUAL: f64 = 1e-10;

/// Positive equilibrium of the uncontrolled model, present iff R0 > 1.
///
/// S and V are eliminated from the stationarity conditions, leaving a
/// scalar equation in I that is strictly decreasing on (0, 1]. The root is
/// bracketed and refined by bisection.
pub fn endemic_equilibrium(p: &EpidemicParams) -> Result<Option<SvirState>> {
    if r0_continuous(p) <= 1.0 {
        return Ok(None);
    }
    let beta = p.beta0;
    let beta1 = p.beta1();
    let s_of = |i: f64| p.mu / (beta * i + p.alpha + p.mu);
    let v_of = |i: f64| p.alpha * s_of(i) / (beta1 * i + p.gamma1 + p.mu);
    // I > 0 divided out of dI/dt = 0
    let excess = |i: f64| beta * s_of(i) + beta1 * v_of(i) - (p.gamma + p.mu);

    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    if excess(hi) >= 0.0 {
        return Err(NumericalFailure::RootSearch(format!(
            "no sign change on (0, 1]: excess(1) = {}",
            excess(hi)
        ))
        .into());
    }
    while hi - lo > BRACKET_WIDTH {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let i = 0.5 * (lo + hi);
    let (s, v) = (s_of(i), v_of(i));
    let state = SvirState::from_array([s, v, i, 1.0 - s - v - i]);
    if state.r < -STATE_TOLERANCE {
        return Err(NumericalFailure::RootSearch(format!(
            "root I = {i} leaves R = {} negative",
            state.r
        ))
        .into());
    }
    let residual = basic_svir_rhs(&state, p).max_abs();
    if residual >= EQUILIBRIUM_RESIDUAL {
        return Err(NumericalFailure::RootSearch(format!(
            "residual {residual:e} at I = {i} exceeds {EQUILIBRIUM_RESIDUAL:e}"
        ))
        .into());
    }
    Ok(Some(state))
}
