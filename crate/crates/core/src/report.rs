//! Cost tables, figure series and Monte Carlo cross-check reports, with CSV,
//! JSON and fixed-width text renderers.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{cost_report, CostKind, CostReport};
use crate::error::Result;
use crate::mc::{simulate_values, McConfig, McStrategy};
use crate::model::{expected_utility, ExpectedUtility};
use crate::params::{feasibility_check, gamma_bound, InvestorProfile, InvestorType, MarketParams};

pub const TABLE_GAMMAS: [f64; 6] = [11.0, 6.0, 4.0, 3.0, 1.0, 0.8];
pub const TABLE_HORIZONS: [f64; 5] = [30.0, 20.0, 10.0, 5.0, 1.0];
pub const TABLE_SIGMAS: [f64; 2] = [0.202, 0.140];

pub const CSV_HEADER: &str = "gamma,T,sigma,kind,c_UM,c_MR,c_RI,c_UI,err";

/// Market calibration for a run. Unset prior moments follow the volatility:
/// `theta0 = 0.08 / sigma`, `v0 = (0.0243 / sigma)^2` (or `(0.0452 / sigma)^2`
/// with `wide_prior`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub sigma: f64,
    pub theta0: Option<f64>,
    pub v0: Option<f64>,
    pub r: f64,
    pub wide_prior: bool,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            sigma: 0.202,
            theta0: None,
            v0: None,
            r: 0.05,
            wide_prior: false,
        }
    }
}

impl ScenarioSpec {
    pub fn with_sigma(sigma: f64) -> Self {
        Self {
            sigma,
            ..Self::default()
        }
    }

    pub fn market(&self) -> Result<MarketParams> {
        let excess_sd = if self.wide_prior { 0.0452 } else { 0.0243 };
        MarketParams::new(
            self.r,
            self.sigma,
            self.theta0.unwrap_or(0.08 / self.sigma),
            self.v0.unwrap_or((excess_sd / self.sigma).powi(2)),
        )
    }
}

/// One `(gamma, T)` cell of a cost table. Costs are fractions; percent
/// conversion happens only when rendering text.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub gamma: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub sigma: f64,
    pub kind: CostKind,
    pub c_um: f64,
    pub c_mr: f64,
    pub c_ri: f64,
    pub c_ui: f64,
    pub err: f64,
}

impl TableRow {
    pub fn from_report(report: &CostReport) -> Self {
        Self {
            gamma: report.profile.gamma,
            horizon: report.profile.horizon,
            sigma: report.params.sigma,
            kind: report.kind,
            c_um: report.c_um,
            c_mr: report.c_mr,
            c_ri: report.c_ri,
            c_ui: report.c_ui,
            err: report.approx_error,
        }
    }

    /// `[c_UM, c_MR, c_RI, c_UI, |err|]` in percent, unrounded.
    pub fn percent(&self) -> [f64; 5] {
        [
            100.0 * self.c_um,
            100.0 * self.c_mr,
            100.0 * self.c_ri,
            100.0 * self.c_ui,
            100.0 * self.err.abs(),
        ]
    }
}

/// Costs at every `(gamma, T)` in row-major order. A zero horizon yields
/// zero costs for the cumulated kind and an error for the annual kind.
pub fn cost_table(
    kind: CostKind,
    params: &MarketParams,
    gammas: &[f64],
    horizons: &[f64],
) -> Result<Vec<TableRow>> {
    gammas
        .iter()
        .flat_map(|&g| horizons.iter().map(move |&t| (g, t)))
        .map(|(g, t)| {
            let profile = InvestorProfile::new(g, t)?;
            Ok(TableRow::from_report(&cost_report(kind, params, &profile)?))
        })
        .collect()
}

/// Both volatility blocks of one of the two paper tables.
pub fn paper_table(kind: CostKind, extra_horizons: &[f64]) -> Result<Vec<TableRow>> {
    let mut horizons = TABLE_HORIZONS.to_vec();
    horizons.extend_from_slice(extra_horizons);
    let mut rows = Vec::new();
    for sigma in TABLE_SIGMAS {
        rows.extend(cost_table(
            kind,
            &ScenarioSpec::with_sigma(sigma).market()?,
            &TABLE_GAMMAS,
            &horizons,
        )?);
    }
    Ok(rows)
}

/// Percent value at two decimals, ties rounded away from zero.
pub fn format_percent(value: f64) -> String {
    let rounded = (value * 100.0).round() / 100.0;
    // -0.00 renders as 0.00
    format!("{:.2}", rounded + 0.0)
}

pub fn table_csv(rows: &[TableRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.gamma, r.horizon, r.sigma, r.kind, r.c_um, r.c_mr, r.c_ri, r.c_ui, r.err
        );
    }
    out
}

pub fn table_text(rows: &[TableRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>7} {:>6} {:>6} {:>9} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "gamma", "T", "sigma", "kind", "UM(%)", "MR(%)", "RI(%)", "UI(%)", "|err|(%)"
    );
    for r in rows {
        let p = r.percent();
        let _ = writeln!(
            out,
            "{:>7} {:>6} {:>6} {:>9} {:>8} {:>8} {:>8} {:>8} {:>8}",
            r.gamma,
            r.horizon,
            r.sigma,
            r.kind,
            format_percent(p[0]),
            format_percent(p[1]),
            format_percent(p[2]),
            format_percent(p[3]),
            format_percent(p[4]),
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Figure {
    /// Costs against `T <= 30` for `gamma in {0.8, 1, 3}`.
    CostsVsT,
    /// Costs against `T <= 250` for `gamma in {0.8, 1, 3}`.
    CostsVsTLong,
    /// Costs against `gamma <= 12` for `T in {5, 10, 20}`.
    CostsVsGamma,
}

impl Figure {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::CostsVsT => "costs-vs-T",
            Self::CostsVsTLong => "costs-vs-T-long",
            Self::CostsVsGamma => "costs-vs-gamma",
        }
    }

    /// `(gamma, T)` grid in emission order.
    pub fn grid(self, points: usize) -> Vec<(f64, f64)> {
        let along = |max: f64| (1..=points).map(move |k| max * k as f64 / points as f64);
        match self {
            Self::CostsVsT | Self::CostsVsTLong => {
                let t_max = if self == Self::CostsVsT { 30.0 } else { 250.0 };
                [0.8, 1.0, 3.0]
                    .into_iter()
                    .flat_map(|g| along(t_max).map(move |t| (g, t)))
                    .collect()
            }
            Self::CostsVsGamma => [5.0, 10.0, 20.0]
                .into_iter()
                .flat_map(|t| along(12.0).map(move |g| (g, t)))
                .collect(),
        }
    }
}

impl FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "costs-vs-T" | "costs-vs-t" => Ok(Self::CostsVsT),
            "costs-vs-T-long" | "costs-vs-t-long" => Ok(Self::CostsVsTLong),
            "costs-vs-gamma" => Ok(Self::CostsVsGamma),
            other => Err(format!(
                "unknown figure `{other}` (expected costs-vs-T, costs-vs-T-long or costs-vs-gamma)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FigurePoint {
    pub row: TableRow,
    /// Shares of `UM`, `MR`, `RI` in `c_UM + c_MR + c_RI`.
    pub shares: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub gamma: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureData {
    pub figure: Figure,
    pub kind: CostKind,
    pub points: Vec<FigurePoint>,
    pub skipped: Vec<SkippedPoint>,
}

/// Relative guard above `gamma_bar` for grid points.
const GAMMA_GUARD: f64 = 1e-6;

/// Series behind a figure. Infeasible grid points are skipped and listed.
pub fn figure_data(
    figure: Figure,
    kind: CostKind,
    params: &MarketParams,
    points: usize,
) -> FigureData {
    let evaluated: Vec<std::result::Result<FigurePoint, SkippedPoint>> = figure
        .grid(points.max(1))
        .into_par_iter()
        .map(|(gamma, horizon)| {
            let skip = |reason: String| SkippedPoint {
                gamma,
                horizon,
                reason,
            };
            let profile = InvestorProfile { gamma, horizon };
            let floor = gamma_bound(horizon, params.v0);
            if !feasibility_check(params, &profile) || gamma <= floor * (1.0 + GAMMA_GUARD) {
                return Err(skip(format!("infeasible: gamma_bar = {floor}")));
            }
            let report = cost_report(kind, params, &profile).map_err(|e| skip(e.to_string()))?;
            let shares = report
                .shares()
                .ok_or_else(|| skip("all component costs are zero".into()))?;
            Ok(FigurePoint {
                row: TableRow::from_report(&report),
                shares,
            })
        })
        .collect();
    let mut data = FigureData {
        figure,
        kind,
        points: Vec::new(),
        skipped: Vec::new(),
    };
    for e in evaluated {
        match e {
            Ok(p) => data.points.push(p),
            Err(s) => data.skipped.push(s),
        }
    }
    data
}

pub fn figure_csv(data: &FigureData) -> String {
    let mut out = String::new();
    out.push_str("figure,");
    out.push_str(CSV_HEADER);
    out.push_str(",share_UM,share_MR,share_RI\n");
    for p in &data.points {
        let r = &p.row;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            data.figure.as_str(),
            r.gamma,
            r.horizon,
            r.sigma,
            r.kind,
            r.c_um,
            r.c_mr,
            r.c_ri,
            r.c_ui,
            r.err,
            p.shares[0],
            p.shares[1],
            p.shares[2]
        );
    }
    out
}

/// Closed form vs simulation for one strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McCheckRow {
    pub strategy: String,
    pub closed_form: f64,
    pub mc_mean: f64,
    pub mc_se: f64,
    /// `None` when the standard error is zero and the estimate is off.
    pub z_score: Option<f64>,
    pub closed_form_ce: f64,
    pub mc_ce: f64,
    pub ce_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McCheckReport {
    pub params: MarketParams,
    pub profile: InvestorProfile,
    pub x: f64,
    pub config: McConfig,
    pub rows: Vec<McCheckRow>,
    pub max_abs_z: Option<f64>,
    pub z_threshold: f64,
    pub passed: bool,
}

pub const MC_Z_THRESHOLD: f64 = 4.0;

/// Relative resolution of a simulated mean. A standard error below it (e.g.
/// antithetic pairs that cancel exactly) measures rounding, not sampling
/// noise, and would turn last-digit differences into huge z-scores.
pub const MC_SE_FLOOR: f64 = 1e-12;

fn z_score(mc_mean: f64, closed: f64, se: f64) -> Option<f64> {
    let diff = mc_mean - closed;
    let se = se.max(MC_SE_FLOOR * mc_mean.abs().max(closed.abs()));
    if se > 0.0 {
        Some(diff / se)
    } else if diff == 0.0 {
        Some(0.0)
    } else {
        None
    }
}

/// Runs the oracle on common random numbers and compares against the closed
/// forms. With `zero_weight` a bond-only strategy is checked instead.
pub fn mc_check(
    investors: &[InvestorType],
    zero_weight: bool,
    x: f64,
    params: &MarketParams,
    profile: &InvestorProfile,
    config: &McConfig,
) -> Result<McCheckReport> {
    let strategies: Vec<McStrategy> = if zero_weight {
        vec![McStrategy::ZeroWeight]
    } else {
        investors.iter().map(|&t| t.into()).collect()
    };
    let estimates = simulate_values(&strategies, x, params, profile, config)?;
    let rows = strategies
        .iter()
        .zip(&estimates)
        .map(|(s, est)| {
            let closed: ExpectedUtility = match s {
                McStrategy::Investor(t) => expected_utility(*t, x, params, profile)?,
                McStrategy::ZeroWeight => ExpectedUtility {
                    gamma: profile.gamma,
                    log_wealth: x.ln(),
                    log_ce: params.r * profile.horizon,
                },
            };
            let name = match s {
                McStrategy::Investor(t) => t.to_string(),
                McStrategy::ZeroWeight => "zero-weight".to_string(),
            };
            let closed_value = closed.value();
            let closed_ce = closed.certainty_equivalent();
            Ok(McCheckRow {
                strategy: name,
                closed_form: closed_value,
                mc_mean: est.mean,
                mc_se: est.std_error,
                z_score: z_score(est.mean, closed_value, est.std_error),
                closed_form_ce: closed_ce,
                mc_ce: est.certainty_equivalent,
                ce_rel_error: est.certainty_equivalent / closed_ce - 1.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_abs_z = rows
        .iter()
        .map(|r| r.z_score.map(f64::abs))
        .try_fold(0.0f64, |acc, z| z.map(|z| acc.max(z)));
    let passed = max_abs_z.is_some_and(|z| z <= MC_Z_THRESHOLD);
    Ok(McCheckReport {
        params: *params,
        profile: *profile,
        x,
        config: *config,
        rows,
        max_abs_z,
        z_threshold: MC_Z_THRESHOLD,
        passed,
    })
}
