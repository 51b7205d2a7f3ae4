//! Monte Carlo oracle for the closed-form expected utilities.
//!
//! Paths are simulated under the physical measure: each path draws the market
//! price of risk `Theta ~ N(theta0, v0)` and a Brownian path `W`, observes
//! `Y_t = Theta t + W_t`, filters `Theta` from `Y` and trades with a weight
//! evaluated at the left end of every step. Log-wealth is integrated, so
//! simulated wealth is always positive.
//!
//! # Random streams
//!
//! Draw `k` (a path, or an antithetic pair of paths) uses
//! `ChaCha8Rng::seed_from_u64(seed)` switched to stream `k`. Its normals are
//! consumed in a fixed order: the prior draw for `Theta`, the terminal value
//! `W_T`, then one normal per time step for the Brownian bridge that fills in
//! the path between `0` and `T`. Because `W_T` is drawn first, strategies with
//! a constant weight see the same terminal wealth at every step count.
//! Antithetic partners negate every normal. Results do not depend on the
//! number of worker threads: samples are collected in path order and reduced
//! sequentially.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::CostPair;
use crate::error::{Error, Result};
use crate::model::{filter, hedging_multiplier, posterior_variance};
use crate::params::{ensure_feasible, InvestorProfile, InvestorType, MarketParams, LOG_GAMMA_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    /// Number of simulated paths (antithetic partners included).
    pub n_paths: usize,
    pub steps_per_year: usize,
    pub seed: u64,
    pub antithetic: bool,
}

impl McConfig {
    pub fn new(n_paths: usize, steps_per_year: usize, seed: u64, antithetic: bool) -> Result<Self> {
        let config = Self {
            n_paths,
            steps_per_year,
            seed,
            antithetic,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::InvalidConfig("n_paths must be >= 1".into()));
        }
        if self.steps_per_year == 0 {
            return Err(Error::InvalidConfig("steps_per_year must be >= 1".into()));
        }
        if self.antithetic && !self.n_paths.is_multiple_of(2) {
            return Err(Error::InvalidConfig(
                "antithetic sampling needs an even number of paths".into(),
            ));
        }
        Ok(())
    }

    /// Independent samples entering the standard error.
    fn draws(&self) -> usize {
        if self.antithetic {
            self.n_paths / 2
        } else {
            self.n_paths
        }
    }

    fn rng(&self, draw: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(draw as u64);
        rng
    }
}

/// Trading rule simulated by the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum McStrategy {
    Investor(InvestorType),
    /// Everything in the bond; terminal wealth is `x e^{rT}`.
    ZeroWeight,
}

impl From<InvestorType> for McStrategy {
    fn from(t: InvestorType) -> Self {
        Self::Investor(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub certainty_equivalent: f64,
    pub seed: u64,
    pub steps_per_year: usize,
    pub antithetic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McCostEstimate {
    pub pair: CostPair,
    pub cost: f64,
    pub std_error: f64,
    pub from: McEstimate,
    pub to: McEstimate,
}

/// Time grid shared by every path.
struct Grid {
    horizon: f64,
    dt: f64,
    times: Vec<f64>,
    hedge: Vec<f64>,
}

impl Grid {
    fn new(params: &MarketParams, profile: &InvestorProfile, steps_per_year: usize) -> Self {
        let horizon = profile.horizon;
        let steps = if horizon > 0.0 {
            ((horizon * steps_per_year as f64).round() as usize).max(1)
        } else {
            0
        };
        let dt = if steps > 0 {
            horizon / steps as f64
        } else {
            0.0
        };
        let times: Vec<f64> = (0..steps).map(|k| k as f64 * dt).collect();
        let hedge = times
            .iter()
            .map(|&t| hedging_multiplier(t, params, profile))
            .collect();
        Self {
            horizon,
            dt,
            times,
            hedge,
        }
    }
}

/// Terminal log-wealth of every strategy along one path.
#[allow(clippy::too_many_arguments)]
fn simulate_path(
    rng: &mut ChaCha8Rng,
    sign: f64,
    grid: &Grid,
    strategies: &[McStrategy],
    log_x: f64,
    params: &MarketParams,
    gamma: f64,
    out: &mut [f64],
) {
    let z_theta: f64 = rng.sample(StandardNormal);
    let z_end: f64 = rng.sample(StandardNormal);
    let theta = params.theta0 + sign * params.v0.sqrt() * z_theta;
    let w_end = sign * grid.horizon.sqrt() * z_end;
    let scale = 1.0 / (params.sigma * gamma);

    // Excess log-return over the bond, accumulated step by step.
    out.iter_mut().for_each(|o| *o = 0.0);
    let mut w = 0.0;
    let n = grid.times.len();
    for (k, (&t, &hedge)) in grid.times.iter().zip(&grid.hedge).enumerate() {
        let z: f64 = rng.sample(StandardNormal);
        let dw = if k + 1 == n {
            w_end - w
        } else {
            let remaining = grid.horizon - t;
            let mean = (w_end - w) * grid.dt / remaining;
            let var = grid.dt * (remaining - grid.dt) / remaining;
            mean + sign * var.sqrt() * z
        };
        let y = theta * t + w;
        let theta_hat = filter(t, y, params).theta_hat;
        for (o, strategy) in out.iter_mut().zip(strategies) {
            let pi = match strategy {
                McStrategy::ZeroWeight => continue,
                McStrategy::Investor(InvestorType::U) => params.theta0 * scale,
                McStrategy::Investor(InvestorType::M) => theta_hat * scale,
                McStrategy::Investor(InvestorType::R) => theta_hat * scale * hedge,
                McStrategy::Investor(InvestorType::I) => theta * scale,
            };
            let exposure = params.sigma * pi;
            *o += (exposure * theta - 0.5 * exposure * exposure) * grid.dt + exposure * dw;
        }
        w += dw;
    }
    let bond = log_x + params.r * grid.horizon;
    out.iter_mut().for_each(|o| *o += bond);
}

fn utility(log_wealth: f64, gamma: f64) -> f64 {
    if (gamma - 1.0).abs() <= LOG_GAMMA_TOL {
        log_wealth
    } else {
        let q = 1.0 - gamma;
        q.signum() * (q * log_wealth - q.abs().ln()).exp()
    }
}

fn certainty_equivalent(mean_utility: f64, gamma: f64) -> f64 {
    if (gamma - 1.0).abs() <= LOG_GAMMA_TOL {
        mean_utility.exp()
    } else {
        let q = 1.0 - gamma;
        ((q * mean_utility).ln() / q).exp()
    }
}

/// Mean and standard error, shifted by the first sample so that constant
/// samples give their exact value and zero spread.
fn mean_and_se(samples: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let mut it = samples.clone();
    let Some(shift) = it.next() else {
        return (f64::NAN, f64::NAN);
    };
    let mut n = 0usize;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for s in samples {
        let d = s - shift;
        n += 1;
        sum += d;
        sum_sq += d * d;
    }
    let nf = n as f64;
    let mean_d = sum / nf;
    let var = if n > 1 {
        ((sum_sq - nf * mean_d * mean_d) / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    (shift + mean_d, (var / nf).sqrt())
}

/// Per-draw utility samples (antithetic pairs averaged), indexed `[draw][strategy]`.
fn utility_samples(
    strategies: &[McStrategy],
    x: f64,
    params: &MarketParams,
    profile: &InvestorProfile,
    config: &McConfig,
) -> Result<Vec<Vec<f64>>> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::NonpositiveWealth(x));
    }
    params.validate()?;
    ensure_feasible(params, profile)?;
    config.validate()?;
    let grid = Grid::new(params, profile, config.steps_per_year);
    let gamma = profile.gamma;
    let log_x = x.ln();
    let k = strategies.len();
    let samples = (0..config.draws())
        .into_par_iter()
        .map(|draw| {
            let mut rng = config.rng(draw);
            let mut lw = vec![0.0; k];
            simulate_path(
                &mut rng, 1.0, &grid, strategies, log_x, params, gamma, &mut lw,
            );
            let mut u: Vec<f64> = lw.iter().map(|&l| utility(l, gamma)).collect();
            if config.antithetic {
                let mut rng = config.rng(draw);
                simulate_path(
                    &mut rng, -1.0, &grid, strategies, log_x, params, gamma, &mut lw,
                );
                for (ui, &l) in u.iter_mut().zip(&lw) {
                    *ui = 0.5 * (*ui + utility(l, gamma));
                }
            }
            u
        })
        .collect();
    Ok(samples)
}

fn estimate_from(samples: &[Vec<f64>], idx: usize, gamma: f64, config: &McConfig) -> McEstimate {
    let (mean, std_error) = mean_and_se(samples.iter().map(|s| s[idx]));
    McEstimate {
        mean,
        std_error,
        n_paths: config.n_paths,
        certainty_equivalent: certainty_equivalent(mean, gamma),
        seed: config.seed,
        steps_per_year: config.steps_per_year,
        antithetic: config.antithetic,
    }
}

/// Estimates for several strategies on common random numbers.
pub fn simulate_values(
    strategies: &[McStrategy],
    x: f64,
    params: &MarketParams,
    profile: &InvestorProfile,
    config: &McConfig,
) -> Result<Vec<McEstimate>> {
    let samples = utility_samples(strategies, x, params, profile, config)?;
    Ok((0..strategies.len())
        .map(|i| estimate_from(&samples, i, profile.gamma, config))
        .collect())
}

/// Estimate of `E[u(X_T)]` under one investor's strategy.
pub fn simulate_value(
    investor: InvestorType,
    x: f64,
    params: &MarketParams,
    profile: &InvestorProfile,
    config: &McConfig,
) -> Result<McEstimate> {
    Ok(simulate_values(&[investor.into()], x, params, profile, config)?[0])
}

/// Cost estimate from two value estimates on common random numbers. The
/// standard error uses the delta method on the paired samples.
pub fn simulate_cost(
    pair: CostPair,
    x: f64,
    params: &MarketParams,
    profile: &InvestorProfile,
    config: &McConfig,
) -> Result<McCostEstimate> {
    let strategies = [pair.from().into(), pair.to().into()];
    let samples = utility_samples(&strategies, x, params, profile, config)?;
    let gamma = profile.gamma;
    let from = estimate_from(&samples, 0, gamma, config);
    let to = estimate_from(&samples, 1, gamma, config);
    let cost = 1.0 - from.certainty_equivalent / to.certainty_equivalent;
    let linearised = samples.iter().map(|s| {
        if (gamma - 1.0).abs() <= LOG_GAMMA_TOL {
            s[0] - s[1]
        } else {
            let q = 1.0 - gamma;
            s[0] / (q * from.mean) - s[1] / (q * to.mean)
        }
    });
    let (_, se_log) = mean_and_se(linearised);
    Ok(McCostEstimate {
        pair,
        cost,
        std_error: (1.0 - cost) * se_log,
        from,
        to,
    })
}

/// Empirical check of the filter at one time point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterCheck {
    pub t: f64,
    pub n_paths: usize,
    pub mean_error: f64,
    pub error_variance: f64,
    pub error_variance_se: f64,
    pub posterior_variance: f64,
    pub mean_abs_error: f64,
    /// `sqrt(2/pi) * sqrt(posterior variance)`.
    pub expected_mean_abs_error: f64,
    /// OLS of `Theta - Theta_hat` on `Theta_hat`; `None` when the regressor is
    /// constant (at `t = 0`).
    pub slope: Option<f64>,
    pub slope_se: Option<f64>,
    pub intercept: f64,
    pub intercept_se: f64,
    pub unbiased: bool,
    pub variance_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub params: MarketParams,
    pub seed: u64,
    pub checks: Vec<FilterCheck>,
}

impl FilterReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.unbiased && c.variance_ok)
    }
}

/// Draws `Theta` and the observation `Y_t` at each requested time (sorted,
/// one Brownian path per draw) and checks conditional unbiasedness of the
/// filter and its posterior variance. Antithetic sampling is not used here.
pub fn filter_consistency_run(
    params: &MarketParams,
    config: &McConfig,
    times: &[f64],
) -> Result<FilterReport> {
    params.validate()?;
    config.validate()?;
    let mut times = times.to_vec();
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidConfig(
            "filter check times must be finite and >= 0".into(),
        ));
    }
    times.sort_by(f64::total_cmp);
    let n = config.n_paths;
    // [path][time] -> (theta, theta_hat)
    let draws: Vec<Vec<(f64, f64)>> = (0..n)
        .into_par_iter()
        .map(|path| {
            let mut rng = config.rng(path);
            let z: f64 = rng.sample(StandardNormal);
            let theta = params.theta0 + params.v0.sqrt() * z;
            let mut w = 0.0;
            let mut last = 0.0;
            times
                .iter()
                .map(|&t| {
                    let z: f64 = rng.sample(StandardNormal);
                    w += (t - last).sqrt() * z;
                    last = t;
                    (theta, filter(t, theta * t + w, params).theta_hat)
                })
                .collect()
        })
        .collect();

    let checks = times
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let nf = n as f64;
            let pairs = draws.iter().map(|d| d[j]);
            let (mean_error, mean_se) = mean_and_se(pairs.clone().map(|(th, h)| th - h));
            let mean_hat = pairs.clone().map(|(_, h)| h).sum::<f64>() / nf;
            let mut m2 = 0.0;
            let mut m4 = 0.0;
            let mut sxx = 0.0;
            let mut sxy = 0.0;
            let mut abs = 0.0;
            for (th, h) in pairs.clone() {
                let e = th - h - mean_error;
                m2 += e * e;
                m4 += e * e * e * e;
                sxx += (h - mean_hat) * (h - mean_hat);
                sxy += (h - mean_hat) * e;
                abs += (th - h).abs();
            }
            let var = m2 / (nf - 1.0).max(1.0);
            let var_se = ((m4 / nf - (m2 / nf).powi(2)) / nf).max(0.0).sqrt();
            let post = posterior_variance(t, params);
            let degenerate = sxx <= 1e-24 * nf;
            let (slope, slope_se, intercept, intercept_se) = if degenerate {
                (None, None, mean_error, mean_se)
            } else {
                let slope = sxy / sxx;
                let intercept = mean_error - slope * mean_hat;
                let resid: f64 = pairs
                    .clone()
                    .map(|(th, h)| {
                        let r = th - h - intercept - slope * h;
                        r * r
                    })
                    .sum();
                let s2 = resid / (nf - 2.0).max(1.0);
                let slope_se = (s2 / sxx).sqrt();
                let intercept_se = (s2 * (1.0 / nf + mean_hat * mean_hat / sxx)).sqrt();
                (Some(slope), Some(slope_se), intercept, intercept_se)
            };
            let slope_ok = match (slope, slope_se) {
                (Some(b), Some(se)) => b.abs() <= 3.0 * se,
                _ => true,
            };
            let intercept_ok = intercept.abs() <= 3.0 * intercept_se || intercept == 0.0;
            FilterCheck {
                t,
                n_paths: n,
                mean_error,
                error_variance: var,
                error_variance_se: var_se,
                posterior_variance: post,
                mean_abs_error: abs / nf,
                expected_mean_abs_error: (2.0 / std::f64::consts::PI).sqrt() * post.sqrt(),
                slope,
                slope_se,
                intercept,
                intercept_se,
                unbiased: slope_ok && intercept_ok,
                variance_ok: (var - post).abs() <= 3.0 * var_se,
            }
        })
        .collect();
    Ok(FilterReport {
        params: *params,
        seed: config.seed,
        checks,
    })
}
