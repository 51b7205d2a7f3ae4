//! Cumulated and annual wealth-equivalent costs between investor types, their
//! multiplicative decomposition and the asymptotic reference values.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::log_certainty_equivalent;
use crate::params::{
    ensure_feasible, gamma_bound, horizon_bound, InvestorProfile, InvestorType, MarketParams,
};

/// Negative costs above this are treated as rounding noise.
const NEGATIVE_COST_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostKind {
    Cumulated,
    Annual,
}

impl fmt::Display for CostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Cumulated => "cumulated",
            Self::Annual => "annual",
        })
    }
}

impl FromStr for CostKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cumulated" | "cumulative" | "c" => Ok(Self::Cumulated),
            "annual" | "a" => Ok(Self::Annual),
            other => Err(format!(
                "unknown cost kind `{other}` (expected cumulated or annual)"
            )),
        }
    }
}

/// An ordered pair `from <= to` of investor types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CostPair {
    from: InvestorType,
    to: InvestorType,
}

impl CostPair {
    pub const UM: CostPair = CostPair {
        from: InvestorType::U,
        to: InvestorType::M,
    };
    pub const MR: CostPair = CostPair {
        from: InvestorType::M,
        to: InvestorType::R,
    };
    pub const RI: CostPair = CostPair {
        from: InvestorType::R,
        to: InvestorType::I,
    };
    pub const UI: CostPair = CostPair {
        from: InvestorType::U,
        to: InvestorType::I,
    };
    /// The adjacent pairs in decomposition order.
    pub const ADJACENT: [CostPair; 3] = [Self::UM, Self::MR, Self::RI];

    pub fn new(from: InvestorType, to: InvestorType) -> Result<Self> {
        if from > to {
            return Err(Error::UnorderedPair { from, to });
        }
        Ok(Self { from, to })
    }

    pub fn from(&self) -> InvestorType {
        self.from
    }

    pub fn to(&self) -> InvestorType {
        self.to
    }
}

impl fmt::Display for CostPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.from, self.to)
    }
}

impl FromStr for CostPair {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        let mut chars = s.chars();
        let (Some(a), Some(b), None) = (chars.next(), chars.next(), chars.next()) else {
            return Err(format!(
                "cost pair `{s}` must be two letters, e.g. UM or RI"
            ));
        };
        let from: InvestorType = a.to_string().parse()?;
        let to: InvestorType = b.to_string().parse()?;
        CostPair::new(from, to).map_err(|e| e.to_string())
    }
}

/// `ln(CE_from / CE_to)`; always <= 0 for an ordered pair.
fn log_ce_gap(pair: CostPair, params: &MarketParams, profile: &InvestorProfile) -> Result<f64> {
    use InvestorType::*;
    ensure_feasible(params, profile)?;
    match (pair.from, pair.to) {
        (a, b) if a == b => Ok(0.0),
        // phi^I = phi^R, so only the psi difference survives:
        // C^RI = 1 - sqrt(D / (g (1 + v0 T))).
        (R, I) => {
            let g = profile.gamma;
            let v0t = params.v0 * profile.horizon;
            let log_ratio = if profile.is_log() {
                0.0
            } else {
                (-v0t * (1.0 - g) / g).ln_1p()
            };
            Ok(0.5 * (log_ratio - v0t.ln_1p()))
        }
        (M, R) if profile.is_log() => Ok(0.0),
        (a, b) => Ok(log_certainty_equivalent(a, params, profile)?
            - log_certainty_equivalent(b, params, profile)?),
    }
}

fn checked_cost(raw: f64, pair: CostPair) -> Result<f64> {
    if raw.is_nan() {
        return Err(Error::InternalConsistency(format!("cost {pair} is NaN")));
    }
    if raw < -NEGATIVE_COST_TOL {
        return Err(Error::InternalConsistency(format!(
            "cost {pair} = {raw:e} is negative; value ordering violated"
        )));
    }
    Ok(raw.max(0.0))
}

/// Fraction `C` of initial wealth such that `V^from(x) = V^to(x (1 - C))`.
pub fn cumulated_cost(
    pair: CostPair,
    params: &MarketParams,
    profile: &InvestorProfile,
) -> Result<f64> {
    let gap = log_ce_gap(pair, params, profile)?;
    checked_cost(-gap.exp_m1(), pair)
}

/// Annual fee `c` such that `V^from(x) = V^to(x (1 - c)^T)`.
pub fn annual_cost(
    pair: CostPair,
    params: &MarketParams,
    profile: &InvestorProfile,
) -> Result<f64> {
    ensure_feasible(params, profile)?;
    if profile.horizon <= 0.0 {
        return Err(Error::ZeroHorizon);
    }
    let gap = log_ce_gap(pair, params, profile)?;
    checked_cost(-(gap / profile.horizon).exp_m1(), pair)
}

pub fn cost(
    kind: CostKind,
    pair: CostPair,
    params: &MarketParams,
    profile: &InvestorProfile,
) -> Result<f64> {
    match kind {
        CostKind::Cumulated => cumulated_cost(pair, params, profile),
        CostKind::Annual => annual_cost(pair, params, profile),
    }
}

/// All four paper costs at one `(gamma, T)` plus the additive-approximation
/// error `c_UI - (c_UM + c_MR + c_RI)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub kind: CostKind,
    pub params: MarketParams,
    pub profile: InvestorProfile,
    pub c_um: f64,
    pub c_mr: f64,
    pub c_ri: f64,
    pub c_ui: f64,
    pub approx_error: f64,
}

impl CostReport {
    pub fn component_sum(&self) -> f64 {
        self.c_um + self.c_mr + self.c_ri
    }

    /// Shares of `UM`, `MR`, `RI` in the component sum. `None` when every
    /// component is zero.
    pub fn shares(&self) -> Option<[f64; 3]> {
        let total = self.component_sum();
        (total > 0.0).then(|| [self.c_um / total, self.c_mr / total, self.c_ri / total])
    }
}

pub fn cost_report(
    kind: CostKind,
    params: &MarketParams,
    profile: &InvestorProfile,
) -> Result<CostReport> {
    let c = |pair| cost(kind, pair, params, profile);
    let (c_um, c_mr, c_ri, c_ui) = (
        c(CostPair::UM)?,
        c(CostPair::MR)?,
        c(CostPair::RI)?,
        c(CostPair::UI)?,
    );
    Ok(CostReport {
        kind,
        params: *params,
        profile: *profile,
        c_um,
        c_mr,
        c_ri,
        c_ui,
        approx_error: c_ui - (c_um + c_mr + c_ri),
    })
}

/// Leading coefficients of a small-horizon expansion, `sum_k coefficients[k] T^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorReference {
    pub kind: CostKind,
    pub coefficients: Vec<f64>,
}

impl TaylorReference {
    pub fn eval(&self, horizon: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * horizon + c)
    }
}

/// Closed-form small-`T` expansions of the costs. Cumulated costs are given to
/// second order, annual costs to first order.
pub fn taylor_reference(
    kind: CostKind,
    pair: CostPair,
    params: &MarketParams,
    gamma: f64,
) -> Result<TaylorReference> {
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: gamma,
            reason: "must be > 0",
        });
    }
    let v0 = params.v0;
    let g = gamma;
    let coefficients = match (kind, pair) {
        (CostKind::Cumulated, CostPair::UM) => vec![0.0, 0.0, v0 * v0 / (4.0 * g)],
        (CostKind::Cumulated, CostPair::MR) => vec![0.0, 0.0, 0.0],
        (CostKind::Cumulated, CostPair::RI) => vec![
            0.0,
            v0 / (2.0 * g),
            v0 * v0 / (4.0 * g) * (1.0 / (2.0 * g) - 2.0),
        ],
        (CostKind::Cumulated, CostPair::UI) => vec![
            0.0,
            v0 / (2.0 * g),
            v0 * v0 / (4.0 * g) * (1.0 / (2.0 * g) - 1.0),
        ],
        (CostKind::Annual, CostPair::UM) => vec![0.0, v0 * v0 / (4.0 * g)],
        (CostKind::Annual, CostPair::MR) => vec![0.0, 0.0],
        (CostKind::Annual, CostPair::RI) => {
            let decay = (-v0 / (2.0 * g)).exp();
            vec![1.0 - decay, decay * v0 * v0 / (2.0 * g * g) * (0.5 - g)]
        }
        (CostKind::Annual, CostPair::UI) => {
            let decay = (-v0 / (2.0 * g)).exp();
            vec![
                1.0 - decay,
                decay * v0 * v0 / (2.0 * g * g) * (0.5 - 0.5 * g),
            ]
        }
        _ => {
            return Err(Error::UnsupportedLimit(format!(
                "no small-horizon expansion is tabulated for pair {pair}"
            )))
        }
    };
    Ok(TaylorReference { kind, coefficients })
}

/// Small-`T` expansion of the decomposition error (`E` or `e`).
pub fn taylor_error_reference(
    kind: CostKind,
    params: &MarketParams,
    gamma: f64,
) -> TaylorReference {
    let v0 = params.v0;
    let coefficients = match kind {
        CostKind::Cumulated => vec![0.0, 0.0, 0.0],
        CostKind::Annual => vec![
            0.0,
            ((-v0 / (2.0 * gamma)).exp() - 1.0) * v0 * v0 / (4.0 * gamma),
        ],
    };
    TaylorReference { kind, coefficients }
}

/// Limits for which closed-form reference values exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitPoint {
    /// `T -> 0+` at fixed gamma.
    HorizonToZero,
    /// `T -> infinity` for `gamma >= 1`, `T -> T_bar` for `gamma < 1`.
    HorizonToUpperBound,
    /// `gamma -> infinity` at fixed `T`.
    GammaToInfinity,
    /// `gamma -> gamma_bar` at fixed `T`.
    GammaToLowerBound,
}

/// `C^UM` (or `c^UM`) evaluated on the feasibility boundary, where the
/// unconditional and myopic values are still finite.
fn um_on_boundary(kind: CostKind, params: &MarketParams, gamma: f64, horizon: f64) -> f64 {
    // Nudge inside the boundary by a relative 1e-9; C^UM is continuous there.
    let profile = InvestorProfile {
        gamma: gamma * (1.0 + 1e-9),
        horizon,
    };
    let gap = log_certainty_equivalent(InvestorType::U, params, &profile).unwrap_or(f64::NAN)
        - log_certainty_equivalent(InvestorType::M, params, &profile).unwrap_or(f64::NAN);
    match kind {
        CostKind::Cumulated => -gap.exp_m1(),
        CostKind::Annual => -(gap / horizon).exp_m1(),
    }
}

/// Closed-form limiting value of a cost. `profile` supplies the fixed
/// coordinate (gamma for horizon limits, T for gamma limits).
pub fn limit_reference(
    kind: CostKind,
    pair: CostPair,
    limit: LimitPoint,
    params: &MarketParams,
    profile: &InvestorProfile,
) -> Result<f64> {
    let g = profile.gamma;
    let v0 = params.v0;
    if pair == CostPair::UI {
        let mut survive = 1.0;
        for p in CostPair::ADJACENT {
            survive *= 1.0 - limit_reference(kind, p, limit, params, profile)?;
        }
        return Ok(1.0 - survive);
    }
    if !CostPair::ADJACENT.contains(&pair) {
        return Err(Error::UnsupportedLimit(format!(
            "no limit is tabulated for pair {pair}"
        )));
    }
    let log = profile.is_log();
    let value = match (limit, kind) {
        (LimitPoint::GammaToInfinity, _) => 0.0,
        (LimitPoint::HorizonToZero, CostKind::Cumulated) => 0.0,
        (LimitPoint::HorizonToZero, CostKind::Annual) => match pair {
            CostPair::RI => -(-v0 / (2.0 * g)).exp_m1(),
            _ => 0.0,
        },
        (LimitPoint::HorizonToUpperBound, CostKind::Cumulated) => match pair {
            _ if g < 1.0 && !log => match pair {
                CostPair::UM => um_on_boundary(kind, params, g, horizon_bound(g, v0)),
                _ => 1.0,
            },
            CostPair::MR if log => 0.0,
            CostPair::RI if !log => 1.0 - (1.0 - 1.0 / g).sqrt(),
            _ => 1.0,
        },
        (LimitPoint::HorizonToUpperBound, CostKind::Annual) => match pair {
            _ if g < 1.0 && !log => match pair {
                CostPair::UM => um_on_boundary(kind, params, g, horizon_bound(g, v0)),
                _ => 1.0,
            },
            CostPair::UM if log => -(-v0 / 2.0).exp_m1(),
            CostPair::UM => 1.0,
            _ => 0.0,
        },
        (LimitPoint::GammaToLowerBound, _) => {
            let horizon = profile.horizon;
            if horizon <= 0.0 {
                return Err(Error::UnsupportedLimit(
                    "gamma -> gamma_bar needs a positive horizon".into(),
                ));
            }
            match pair {
                CostPair::UM => um_on_boundary(kind, params, gamma_bound(horizon, v0), horizon),
                _ => 1.0,
            }
        }
    };
    Ok(value)
}
