//! Transmission map, social-cost families, and the pointwise optimal control laws.

use serde::{Deserialize, Serialize};

use crate::adjoint::Costate;
use crate::error::{Error, Result};
use crate::model::{Control, ControlBounds, EpidemicParams, SvirState};

/// Transmission rate under social restriction `u0`: linear, zero at full restriction.
pub fn transmission_rate(beta0: f64, u0: f64) -> f64 {
    beta0 * (1.0 - u0)
}

/// Running cost of social restrictions, `c(u0)`, with `c(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum SocialCostModel {
    /// `b * u0^2`
    Quadratic { b: f64 },
    /// `exp(k * u0) - 1`
    Exponential { k: f64 },
}

impl SocialCostModel {
    pub fn validate(&self) -> Result<()> {
        let (name, value) = match *self {
            SocialCostModel::Quadratic { b } => ("b", b),
            SocialCostModel::Exponential { k } => ("k", k),
        };
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::invalid(
                format!("economic.social_cost.{name}"),
                format!("must be positive, got {value}"),
            ));
        }
        Ok(())
    }

    pub fn cost(&self, u0: f64) -> f64 {
        match *self {
            SocialCostModel::Quadratic { b } => b * u0 * u0,
            SocialCostModel::Exponential { k } => (k * u0).exp_m1(),
        }
    }

    pub fn derivative(&self, u0: f64) -> f64 {
        match *self {
            SocialCostModel::Quadratic { b } => 2.0 * b * u0,
            SocialCostModel::Exponential { k } => k * (k * u0).exp(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SocialCostModel::Quadratic { .. } => "quadratic",
            SocialCostModel::Exponential { .. } => "exponential",
        }
    }
}

/// Cost weights of the objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomicParams {
    /// Cost per unit infected fraction per day.
    pub c1: f64,
    /// Vaccination cost weight on `u1^2 * S`.
    pub c2: f64,
    pub social_cost: SocialCostModel,
}

impl EconomicParams {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("economic.c1", self.c1), ("economic.c2", self.c2)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("must be positive, got {value}"),
                ));
            }
        }
        self.social_cost.validate()
    }
}

/// Marginal benefit of lowering transmission: `S (l3 - l1) + eps V (l3 - l2)`.
pub fn switching_k(x: &SvirState, lambda: &Costate, epsilon: f64) -> f64 {
    x.s * (lambda.l3 - lambda.l1) + epsilon * x.v * (lambda.l3 - lambda.l2)
}

/// Minimiser of the Hamiltonian over `u0 in [0, u0_max]`.
///
/// For the exponential cost the stationary point only exists when
/// `beta0 I K > 0`; otherwise the Hamiltonian is nondecreasing in `u0` and
/// zero is optimal.
pub fn optimal_u0(
    model: &SocialCostModel,
    x: &SvirState,
    lambda: &Costate,
    p: &EpidemicParams,
    bounds: &ControlBounds,
) -> f64 {
    let pressure = p.beta0 * x.i * switching_k(x, lambda, p.epsilon);
    let raw = match *model {
        SocialCostModel::Quadratic { b } => pressure / (2.0 * b),
        SocialCostModel::Exponential { k } => {
            if pressure > 0.0 {
                (pressure / k).ln() / k
            } else {
                0.0
            }
        }
    };
    clamp_to(raw, bounds.u0_max)
}

/// Minimiser of the Hamiltonian over `u1 in [0, u1_max]`.
pub fn optimal_u1(lambda: &Costate, c2: f64, bounds: &ControlBounds) -> f64 {
    clamp_to((lambda.l1 - lambda.l2) / (2.0 * c2), bounds.u1_max)
}

pub fn optimal_control(
    x: &SvirState,
    lambda: &Costate,
    p: &EpidemicParams,
    econ: &EconomicParams,
    bounds: &ControlBounds,
) -> Control {
    Control {
        u0: optimal_u0(&econ.social_cost, x, lambda, p, bounds),
        u1: optimal_u1(lambda, econ.c2, bounds),
    }
}

// NaN maps to the lower bound so that the output is always admissible.
fn clamp_to(raw: f64, upper: f64) -> f64 {
    if raw.is_nan() {
        0.0
    } else {
        raw.clamp(0.0, upper)
    }
}
