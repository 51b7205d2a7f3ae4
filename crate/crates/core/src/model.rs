//! Closed-form expected utilities, value surfaces, the Bayesian filter and
//! the four investment strategies.
//!
//! Expected utilities are kept in the log domain. For every investor type the
//! power-utility value has the shape
//!
//! ```text
//!   V(x) = x^(1-g) / (1-g) * exp(phi * theta0^2 + psi)
//! ```
//!
//! and the exponent is always a multiple of `1 - g`. We therefore store
//! `rho = (phi * theta0^2 + psi) / (1 - g)`, which is the log of the
//! certainty equivalent per unit of initial wealth. `rho` has a finite limit
//! as `g -> 1` equal to the logarithmic closed form, so costs and values stay
//! accurate arbitrarily close to the log investor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ensure_feasible, InvestorProfile, InvestorType, MarketParams};

/// Ordered roots of `r^2 + (2/g - 1) r + (1 - g)/g = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MyopicRoots {
    pub r1: f64,
    pub r2: f64,
}

impl MyopicRoots {
    /// `r2 - r1`, computed from the discriminant rather than by subtraction.
    pub fn spread(gamma: f64) -> f64 {
        let k = 1.0 / gamma - 1.0;
        (4.0 * k * k + 1.0).sqrt()
    }

    pub fn residual(&self, gamma: f64) -> (f64, f64) {
        let f = |r: f64| r * r + (2.0 / gamma - 1.0) * r + (1.0 - gamma) / gamma;
        (f(self.r1), f(self.r2))
    }
}

/// Roots of the myopic quadratic. The larger-magnitude root comes from the
/// quadratic formula, the other one from the product of the roots.
pub fn myopic_roots(gamma: f64) -> MyopicRoots {
    let b = 2.0 / gamma - 1.0;
    let c = (1.0 - gamma) / gamma;
    let sqrt_disc = MyopicRoots::spread(gamma);
    let q = if b >= 0.0 {
        -0.5 * (b + sqrt_disc)
    } else {
        -0.5 * (b - sqrt_disc)
    };
    let other = c / q;
    if q < other {
        MyopicRoots { r1: q, r2: other }
    } else {
        MyopicRoots { r1: other, r2: q }
    }
}

/// Coefficient of `theta0^2` and constant term of the value exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiPsi {
    pub phi: f64,
    pub psi: f64,
}

/// `(phi, psi)` for the requested investor, evaluated verbatim from the
/// closed forms. Undefined for the log investor.
pub fn phi_psi(
    investor: InvestorType,
    params: &MarketParams,
    profile: &InvestorProfile,
) -> Result<PhiPsi> {
    ensure_feasible(params, profile)?;
    if profile.is_log() {
        return Err(Error::LogGammaUnsupported);
    }
    let g = profile.gamma;
    let t = profile.horizon;
    let v0 = params.v0;
    let q = 1.0 - g;
    let margin = profile.feasibility_margin(params);
    let bond = params.r * q * t;
    let pp = match investor {
        InvestorType::I => PhiPsi {
            phi: q * t / (2.0 * margin),
            psi: 0.5 * (g / margin).ln() + bond,
        },
        InvestorType::R => PhiPsi {
            phi: q * t / (2.0 * margin),
            psi: 0.5 * (g * (g / margin).ln() - q * (1.0 + v0 * t).ln()) + bond,
        },
        InvestorType::M => {
            let MyopicRoots { r1, r2 } = myopic_roots(g);
            let growth = (1.0 + v0 * t).powf(r2 - r1);
            let denom = r2 * growth - r1;
            PhiPsi {
                phi: q * (growth - 1.0) / (2.0 * g * v0 * denom),
                psi: 0.5 * (((r2 - r1) / denom).ln() + r2 * (1.0 + v0 * t).ln()) + bond,
            }
        }
        InvestorType::U => PhiPsi {
            phi: q * (g * t + q * v0 * t * t) / (2.0 * g * g),
            psi: bond,
        },
    };
    Ok(pp)
}

/// Log certainty equivalent per unit wealth for the logarithmic investor.
fn log_ce_log_utility(investor: InvestorType, params: &MarketParams, horizon: f64) -> f64 {
    let t = horizon;
    let base = params.r * t + 0.5 * params.theta0 * params.theta0 * t;
    match investor {
        InvestorType::U => base,
        InvestorType::M | InvestorType::R => {
            base + 0.5 * params.v0 * t - 0.5 * (params.v0 * t).ln_1p()
        }
        InvestorType::I => base + 0.5 * params.v0 * t,
    }
}

/// `ln(D / g)` with `D` the feasibility margin, written as `ln(1 - v0 T (1-g)/g)`.
fn log_margin_ratio(gamma: f64, v0t: f64) -> f64 {
    (-v0t * (1.0 - gamma) / gamma).ln_1p()
}

/// Log certainty equivalent per unit wealth for `g != 1`, i.e.
/// `(phi theta0^2 + psi) / (1 - g)` evaluated without cancellation near `g = 1`.
fn log_ce_power_utility(
    investor: InvestorType,
    params: &MarketParams,
    profile: &InvestorProfile,
) -> f64 {
    let g = profile.gamma;
    let t = profile.horizon;
    let v0 = params.v0;
    let v0t = v0 * t;
    let q = 1.0 - g;
    let th2 = params.theta0 * params.theta0;
    let bond = params.r * t;
    match investor {
        InvestorType::I => {
            let margin = profile.feasibility_margin(params);
            th2 * t / (2.0 * margin) - log_margin_ratio(g, v0t) / (2.0 * q) + bond
        }
        InvestorType::R => {
            let margin = profile.feasibility_margin(params);
            th2 * t / (2.0 * margin)
                + 0.5 * (-g * log_margin_ratio(g, v0t) / q - v0t.ln_1p())
                + bond
        }
        InvestorType::M => {
            let MyopicRoots { r2, .. } = myopic_roots(g);
            let spread = MyopicRoots::spread(g);
            let log_growth = v0t.ln_1p();
            let growth_m1 = (spread * log_growth).exp_m1();
            // r2 * P - r1 = r2 * (P - 1) + (r2 - r1)
            let denom = r2 * growth_m1 + spread;
            let phi_red = growth_m1 / (2.0 * g * v0 * denom);
            let psi_num = r2 * log_growth - (r2 * growth_m1 / spread).ln_1p();
            th2 * phi_red + psi_num / (2.0 * q) + bond
        }
        InvestorType::U => th2 * (g * t + q * v0 * t * t) / (2.0 * g * g) + bond,
    }
}

/// `ln(CE / x)` for the given investor. Requires feasibility.
pub fn log_certainty_equivalent(
    investor: InvestorType,
    params: &MarketParams,
    profile: &InvestorProfile,
) -> Result<f64> {
    ensure_feasible(params, profile)?;
    Ok(if profile.is_log() {
        log_ce_log_utility(investor, params, profile.horizon)
    } else {
        log_ce_power_utility(investor, params, profile)
    })
}

/// Log-domain representation of an expected CRRA utility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedUtility {
    pub gamma: f64,
    pub log_wealth: f64,
    /// `ln(CE / x)`.
    pub log_ce: f64,
}

impl ExpectedUtility {
    pub fn is_log(&self) -> bool {
        (self.gamma - 1.0).abs() <= crate::params::LOG_GAMMA_TOL
    }

    /// The exponent `phi * theta0^2 + psi` (zero-scaled for the log investor).
    pub fn exponent(&self) -> f64 {
        (1.0 - self.gamma) * self.log_ce
    }

    pub fn certainty_equivalent(&self) -> f64 {
        (self.log_wealth + self.log_ce).exp()
    }

    /// The expected utility as a real number. May overflow to infinity for
    /// extreme inputs; the log-domain fields stay finite.
    pub fn value(&self) -> f64 {
        if self.is_log() {
            return self.log_wealth + self.log_ce;
        }
        let q = 1.0 - self.gamma;
        q.signum() * (q * (self.log_wealth + self.log_ce) - q.abs().ln()).exp()
    }
}

pub fn expected_utility(
    investor: InvestorType,
    x: f64,
    params: &MarketParams,
    profile: &InvestorProfile,
) -> Result<ExpectedUtility> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::NonpositiveWealth(x));
    }
    let log_ce = log_certainty_equivalent(investor, params, profile)?;
    Ok(ExpectedUtility {
        gamma: profile.gamma,
        log_wealth: x.ln(),
        log_ce,
    })
}

/// Expected utility of terminal wealth under the investor's strategy.
pub fn value(
    investor: InvestorType,
    x: f64,
    params: &MarketParams,
    profile: &InvestorProfile,
) -> Result<f64> {
    expected_utility(investor, x, params, profile).map(|eu| eu.value())
}

/// Logarithmic-utility closed forms, usable for any horizon.
pub fn value_log(
    investor: InvestorType,
    x: f64,
    params: &MarketParams,
    horizon: f64,
) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::NonpositiveWealth(x));
    }
    Ok(x.ln() + log_ce_log_utility(investor, params, horizon))
}

/// Filtered state at time `t` given the observation `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterState {
    pub t: f64,
    pub y: f64,
    pub theta_hat: f64,
}

/// Posterior mean `(theta0 + v0 y) / (1 + v0 t)` of the market price of risk.
pub fn filter(t: f64, y: f64, params: &MarketParams) -> FilterState {
    FilterState {
        t,
        y,
        theta_hat: (params.theta0 + params.v0 * y) / (1.0 + params.v0 * t),
    }
}

/// Posterior variance `v0 / (1 + v0 t)`.
pub fn posterior_variance(t: f64, params: &MarketParams) -> f64 {
    params.v0 / (1.0 + params.v0 * t)
}

/// Coefficients of the exponent `q * th^2 + l * th + k` of a value surface,
/// where `th` is the filtered estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCoefficients {
    pub quadratic: f64,
    pub linear: f64,
    pub constant: f64,
}

/// Value surface `v(t, x, y)` of the rational, myopic or unconditional investor
/// (power utility only).
#[derive(Debug, Clone, Copy)]
pub struct Surface {
    investor: InvestorType,
    params: MarketParams,
    profile: InvestorProfile,
    roots: MyopicRoots,
}

impl Surface {
    pub fn new(
        investor: InvestorType,
        params: &MarketParams,
        profile: &InvestorProfile,
    ) -> Result<Self> {
        ensure_feasible(params, profile)?;
        if profile.is_log() {
            return Err(Error::LogGammaUnsupported);
        }
        if investor == InvestorType::I {
            return Err(Error::UnsupportedInvestorType(investor));
        }
        Ok(Self {
            investor,
            params: *params,
            profile: *profile,
            roots: myopic_roots(profile.gamma),
        })
    }

    pub fn investor(&self) -> InvestorType {
        self.investor
    }

    /// Exponent coefficients at time `t`. The formulas are evaluated as
    /// written, also slightly outside `[0, T]`, which finite-difference
    /// stencils near the endpoints rely on.
    pub fn coefficients(&self, t: f64) -> SurfaceCoefficients {
        let g = self.profile.gamma;
        let horizon = self.profile.horizon;
        let v0 = self.params.v0;
        let q = 1.0 - g;
        let margin = self.profile.feasibility_margin(&self.params);
        match self.investor {
            InvestorType::R => SurfaceCoefficients {
                quadratic: q * (1.0 + v0 * t) * (horizon - t) / (2.0 * (margin + v0 * t)),
                linear: 0.0,
                constant: 0.5
                    * (g * (g * (1.0 + v0 * horizon) / (margin + v0 * t)).ln()
                        - ((1.0 + v0 * horizon) / (1.0 + v0 * t)).ln()),
            },
            InvestorType::M => {
                let MyopicRoots { r1, r2 } = self.roots;
                let spread = MyopicRoots::spread(g);
                let log_t = (v0 * t).ln_1p();
                let log_horizon = (v0 * horizon).ln_1p();
                let p_t = (spread * log_t).exp();
                let p_horizon = (spread * log_horizon).exp();
                let gap = p_t * (spread * (log_horizon - log_t)).exp_m1();
                let denom = r2 * p_horizon - r1 * p_t;
                SurfaceCoefficients {
                    quadratic: q * (1.0 + v0 * t) * gap / (2.0 * g * v0 * denom),
                    linear: 0.0,
                    constant: 0.5 * ((spread / denom).ln() + r2 * log_horizon - r1 * log_t),
                }
            }
            InvestorType::U => {
                let theta0 = self.params.theta0;
                SurfaceCoefficients {
                    quadratic: 0.0,
                    linear: q / g * theta0 * (horizon - t),
                    constant: q * (horizon - t) / (2.0 * g * g)
                        * (q * (1.0 + v0 * horizon) / (1.0 + v0 * t) - 1.0)
                        * theta0
                        * theta0,
                }
            }
            InvestorType::I => unreachable!("rejected in Surface::new"),
        }
    }

    /// `ln h(t, y)`.
    pub fn log_h(&self, t: f64, y: f64) -> f64 {
        let th = filter(t, y, &self.params).theta_hat;
        let c = self.coefficients(t);
        c.quadratic * th * th + c.linear * th + c.constant
    }

    /// `(x e^{r(T-t)})^(1-g) / (1-g) * h(t, y)` without range checks.
    pub fn eval(&self, t: f64, x: f64, y: f64) -> f64 {
        let q = 1.0 - self.profile.gamma;
        let log_scaled = x.ln() + self.params.r * (self.profile.horizon - t);
        q.signum() * (q * log_scaled + self.log_h(t, y) - q.abs().ln()).exp()
    }

    pub fn value(&self, t: f64, x: f64, y: f64) -> Result<f64> {
        if !(0.0..=self.profile.horizon).contains(&t) {
            return Err(Error::TimeOutOfRange {
                t,
                horizon: self.profile.horizon,
            });
        }
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::NonpositiveWealth(x));
        }
        Ok(self.eval(t, x, y))
    }
}

/// `v(t, x, y)` for `investor` in `{R, M, U}`.
pub fn value_surface(
    investor: InvestorType,
    t: f64,
    x: f64,
    y: f64,
    params: &MarketParams,
    profile: &InvestorProfile,
) -> Result<f64> {
    Surface::new(investor, params, profile)?.value(t, x, y)
}

/// What the investor conditions on when choosing a weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observation {
    /// Filter output, used by the partially informed types.
    Filtered(FilterState),
    /// The realised market price of risk, used by the informed type.
    Revealed(f64),
}

/// Multiplier turning the myopic weight into the rational one:
/// `1 + (1-g)(T-t) v0 / (g(1+v0 T) - v0 T + v0 t)`.
pub fn hedging_multiplier(t: f64, params: &MarketParams, profile: &InvestorProfile) -> f64 {
    let margin = profile.feasibility_margin(params);
    1.0 + (1.0 - profile.gamma) * (profile.horizon - t) * params.v0 / (margin + params.v0 * t)
}

/// Fraction of wealth held in the risky asset at time `t`.
pub fn strategy(
    investor: InvestorType,
    t: f64,
    observation: Observation,
    params: &MarketParams,
    profile: &InvestorProfile,
) -> Result<f64> {
    ensure_feasible(params, profile)?;
    if !(0.0..=profile.horizon).contains(&t) {
        return Err(Error::TimeOutOfRange {
            t,
            horizon: profile.horizon,
        });
    }
    let scale = params.sigma * profile.gamma;
    match (investor, observation) {
        (InvestorType::U, _) => Ok(params.theta0 / scale),
        (InvestorType::I, Observation::Revealed(theta)) => Ok(theta / scale),
        (InvestorType::M, Observation::Filtered(state)) => Ok(state.theta_hat / scale),
        (InvestorType::R, Observation::Filtered(state)) => {
            Ok(state.theta_hat / scale * hedging_multiplier(t, params, profile))
        }
        (InvestorType::I, Observation::Filtered(_)) => Err(Error::InvalidParameter {
            name: "observation",
            value: t,
            reason: "the informed strategy needs the realised market price of risk",
        }),
        (_, Observation::Revealed(_)) => Err(Error::InvalidParameter {
            name: "observation",
            value: t,
            reason: "partially informed strategies need a filter state",
        }),
    }
}

/// `pi^R - pi^M` at the given filter state.
pub fn hedging_demand(
    state: &FilterState,
    params: &MarketParams,
    profile: &InvestorProfile,
) -> Result<f64> {
    let obs = Observation::Filtered(*state);
    let rational = strategy(InvestorType::R, state.t, obs, params, profile)?;
    let myopic = strategy(InvestorType::M, state.t, obs, params, profile)?;
    Ok(rational - myopic)
}
