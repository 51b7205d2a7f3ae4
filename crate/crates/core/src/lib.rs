//! Welfare costs of information, predictability and learning for CRRA
//! investors facing an unknown, Gaussian market price of risk.
//!
//! * [`model`] closed-form expected utilities of the unconditional, myopic,
//!   rational and fully informed investors, their value surfaces, the
//!   Bayesian filter and the trading rules.
//! * [`cost`] cumulated and annual wealth-equivalent costs between investor
//!   types and their decomposition.
//! * [`mc`] a Monte Carlo oracle that re-derives every expected utility by
//!   simulating the market.
//! * [`report`] tables and figure series used by the command-line tool.

pub mod cost;
pub mod error;
pub mod mc;
pub mod model;
pub mod params;
pub mod report;

pub use cost::{
    annual_cost, cost, cost_report, cumulated_cost, limit_reference, taylor_reference, CostKind,
    CostPair, CostReport, LimitPoint,
};
pub use error::{Error, Result};
pub use model::{filter, phi_psi, strategy, value, value_log, value_surface, FilterState, PhiPsi};
pub use params::{feasibility_check, InvestorProfile, InvestorType, MarketParams};
