//! Market calibration, investor profile and the investor-type lattice.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this distance from 1 the logarithmic formulas are used.
pub const LOG_GAMMA_TOL: f64 = 1e-9;

/// Relative guard band applied to the feasibility margin.
pub const FEASIBILITY_GUARD: f64 = 1e-12;

/// Risk-free rate, volatility and the Gaussian prior `N(theta0, v0)` of the
/// market price of risk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub r: f64,
    pub sigma: f64,
    pub theta0: f64,
    pub v0: f64,
}

impl MarketParams {
    pub fn new(r: f64, sigma: f64, theta0: f64, v0: f64) -> Result<Self> {
        let params = Self {
            r,
            sigma,
            theta0,
            v0,
        };
        params.validate()?;
        Ok(params)
    }

    /// Calibration with `theta0 = 0.08 / sigma`, `v0 = (0.0243 / sigma)^2`
    /// and a 5% risk-free rate.
    pub fn calibrated(sigma: f64) -> Result<Self> {
        Self::new(0.05, sigma, 0.08 / sigma, (0.0243 / sigma).powi(2))
    }

    /// Same as [`MarketParams::calibrated`] with the wider prior
    /// `v0 = (0.0452 / sigma)^2`.
    pub fn calibrated_wide_prior(sigma: f64) -> Result<Self> {
        Self::new(0.05, sigma, 0.08 / sigma, (0.0452 / sigma).powi(2))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r.is_finite() && self.r >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "r",
                value: self.r,
                reason: "must be finite and >= 0",
            });
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                value: self.sigma,
                reason: "must be finite and > 0",
            });
        }
        if !self.theta0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "theta0",
                value: self.theta0,
                reason: "must be finite",
            });
        }
        if !(self.v0.is_finite() && self.v0 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "v0",
                value: self.v0,
                reason: "must be finite and > 0",
            });
        }
        Ok(())
    }
}

/// Relative risk aversion and investment horizon (years).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvestorProfile {
    pub gamma: f64,
    pub horizon: f64,
}

impl InvestorProfile {
    pub fn new(gamma: f64, horizon: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                value: gamma,
                reason: "must be finite and > 0",
            });
        }
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "T",
                value: horizon,
                reason: "must be finite and >= 0",
            });
        }
        Ok(Self { gamma, horizon })
    }

    /// True when the logarithmic closed forms apply.
    pub fn is_log(&self) -> bool {
        (self.gamma - 1.0).abs() <= LOG_GAMMA_TOL
    }

    /// `gamma * (1 + v0 * T) - v0 * T`.
    pub fn feasibility_margin(&self, params: &MarketParams) -> f64 {
        let vt = params.v0 * self.horizon;
        self.gamma * (1.0 + vt) - vt
    }
}

/// Largest admissible horizon for `0 < gamma < 1`; infinite otherwise.
pub fn horizon_bound(gamma: f64, v0: f64) -> f64 {
    if gamma >= 1.0 {
        f64::INFINITY
    } else {
        gamma / (v0 * (1.0 - gamma))
    }
}

/// Smallest admissible risk aversion at horizon `T`, `v0 T / (1 + v0 T)`.
pub fn gamma_bound(horizon: f64, v0: f64) -> f64 {
    let vt = v0 * horizon;
    vt / (1.0 + vt)
}

/// Strict feasibility with a relative guard band on the margin.
pub fn feasibility_check(params: &MarketParams, profile: &InvestorProfile) -> bool {
    let margin = profile.feasibility_margin(params);
    let scale = profile.gamma * (1.0 + params.v0 * profile.horizon);
    margin > FEASIBILITY_GUARD * scale
}

pub(crate) fn ensure_feasible(params: &MarketParams, profile: &InvestorProfile) -> Result<()> {
    if feasibility_check(params, profile) {
        return Ok(());
    }
    let hint = if profile.gamma < 1.0 {
        format!(
            "for gamma < 1 the horizon must satisfy T < T_bar = {:.4}",
            horizon_bound(profile.gamma, params.v0)
        )
    } else {
        String::from("margin is below the guard band")
    };
    Err(Error::Infeasible {
        gamma: profile.gamma,
        horizon: profile.horizon,
        v0: params.v0,
        margin: profile.feasibility_margin(params),
        hint,
    })
}

/// Investor types, ordered from least to most informed: `U < M < R < I`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InvestorType {
    /// Unconditional: trades on the prior mean forever.
    U,
    /// Myopic: trades on the filtered estimate, no hedging demand.
    M,
    /// Rational: filtered estimate plus intertemporal hedging demand.
    R,
    /// Fully informed: observes the market price of risk.
    I,
}

impl InvestorType {
    pub const ALL: [InvestorType; 4] = [Self::U, Self::M, Self::R, Self::I];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::U => "U",
            Self::M => "M",
            Self::R => "R",
            Self::I => "I",
        }
    }
}

impl fmt::Display for InvestorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InvestorType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "U" | "UNCONDITIONAL" => Ok(Self::U),
            "M" | "MYOPIC" => Ok(Self::M),
            "R" | "RATIONAL" => Ok(Self::R),
            "I" | "INFORMED" => Ok(Self::I),
            other => Err(format!(
                "unknown investor type `{other}` (expected U, M, R or I)"
            )),
        }
    }
}
