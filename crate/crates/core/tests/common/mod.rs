//! Fixtures shared by the integration suites: published table values,
//! finite-difference stencils and a seeded sampler of feasible scenarios.
#![allow(dead_code)]

pub mod residuals;

use infocost::cost::{cumulated_cost, CostPair};
use infocost::params::{feasibility_check, InvestorProfile, MarketParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One printed row: `(gamma, T, [C_UM, C_MR, C_RI, C_UI, |E|] at sigma = 0.202,
/// same at sigma = 0.140)`, all in percent.
pub type PrintedRow = (f64, f64, [f64; 5], [f64; 5]);

/// Published cumulated costs.
pub const CUMULATED: [PrintedRow; 30] = [
    (
        11.0,
        30.0,
        [2.17, 0.46, 1.39, 3.97, 0.05],
        [14.23, 1.93, 2.18, 17.72, 0.62],
    ),
    (
        11.0,
        20.0,
        [0.74, 0.18, 1.03, 1.93, 0.02],
        [5.15, 0.91, 1.72, 7.63, 0.15],
    ),
    (
        11.0,
        10.0,
        [0.12, 0.03, 0.58, 0.72, 0.01],
        [0.82, 0.20, 1.06, 2.06, 0.02],
    ),
    (
        11.0,
        5.0,
        [0.02, 0.00, 0.31, 0.33, 0.00],
        [0.13, 0.03, 0.60, 0.76, 0.00],
    ),
    (
        11.0,
        1.0,
        [0.00, 0.00, 0.06, 0.07, 0.01],
        [0.00, 0.00, 0.13, 0.14, 0.01],
    ),
    (
        6.0,
        30.0,
        [3.46, 0.74, 2.56, 6.63, 0.13],
        [21.83, 3.23, 4.04, 27.41, 1.69],
    ),
    (
        6.0,
        20.0,
        [1.19, 0.28, 1.89, 3.33, 0.03],
        [8.11, 1.50, 3.18, 12.37, 0.42],
    ),
    (
        6.0,
        10.0,
        [0.20, 0.05, 1.06, 1.30, 0.01],
        [1.32, 0.31, 1.95, 3.55, 0.03],
    ),
    (
        6.0,
        5.0,
        [0.04, 0.01, 0.56, 0.61, 0.00],
        [0.22, 0.05, 1.10, 1.36, 0.01],
    ),
    (
        6.0,
        1.0,
        [0.00, 0.00, 0.12, 0.12, 0.00],
        [0.00, 0.00, 0.24, 0.25, 0.01],
    ),
    (
        4.0,
        30.0,
        [4.41, 0.96, 3.86, 8.97, 0.26],
        [26.97, 4.31, 6.12, 34.40, 3.00],
    ),
    (
        4.0,
        20.0,
        [1.53, 0.36, 2.85, 4.68, 0.06],
        [10.22, 1.96, 4.82, 16.22, 0.78],
    ),
    (
        4.0,
        10.0,
        [0.26, 0.06, 1.59, 1.91, 0.00],
        [1.70, 0.40, 2.94, 4.97, 0.07],
    ),
    (
        4.0,
        5.0,
        [0.05, 0.01, 0.85, 0.90, 0.01],
        [0.29, 0.07, 1.65, 2.00, 0.01],
    ),
    (
        4.0,
        1.0,
        [0.00, 0.00, 0.18, 0.18, 0.00],
        [0.01, 0.00, 0.37, 0.37, 0.01],
    ),
    (
        3.0,
        30.0,
        [4.93, 1.07, 5.18, 10.82, 0.36],
        [29.54, 5.03, 8.25, 38.60, 4.22],
    ),
    (
        3.0,
        20.0,
        [1.74, 0.40, 3.81, 5.86, 0.09],
        [11.32, 2.23, 6.48, 18.92, 1.11],
    ),
    (
        3.0,
        10.0,
        [0.31, 0.06, 2.13, 2.49, 0.01],
        [1.93, 0.44, 3.94, 6.20, 0.11],
    ),
    (
        3.0,
        5.0,
        [0.06, 0.01, 1.13, 1.20, 0.00],
        [0.34, 0.07, 2.21, 2.61, 0.01],
    ),
    (
        3.0,
        1.0,
        [0.00, 0.00, 0.24, 0.24, 0.00],
        [0.01, 0.00, 0.49, 0.50, 0.00],
    ),
    (
        1.0,
        30.0,
        [3.61, 0.00, 16.50, 19.51, 0.60],
        [12.19, 0.00, 27.53, 36.36, 3.36],
    ),
    (
        1.0,
        20.0,
        [1.75, 0.00, 11.94, 13.47, 0.22],
        [6.34, 0.00, 21.01, 26.01, 1.34],
    ),
    (
        1.0,
        10.0,
        [0.48, 0.00, 6.53, 6.98, 0.03],
        [1.88, 0.00, 12.34, 13.98, 0.24],
    ),
    (
        1.0,
        5.0,
        [0.12, 0.00, 3.43, 3.55, 0.00],
        [0.51, 0.00, 6.78, 7.26, 0.03],
    ),
    (
        1.0,
        1.0,
        [0.01, 0.00, 0.72, 0.72, 0.01],
        [0.02, 0.00, 1.47, 1.50, 0.01],
    ),
    (
        0.8,
        30.0,
        [7.35, 1.20, 21.16, 27.83, 1.88],
        [37.66, 11.44, 36.24, 64.80, 20.54],
    ),
    (
        0.8,
        20.0,
        [3.02, 0.35, 15.18, 18.03, 0.52],
        [15.34, 3.27, 27.20, 40.38, 5.43],
    ),
    (
        0.8,
        10.0,
        [0.70, 0.04, 8.24, 8.92, 0.06],
        [3.30, 0.39, 15.70, 18.80, 0.59],
    ),
    (
        0.8,
        5.0,
        [0.17, 0.01, 4.31, 4.48, 0.01],
        [0.76, 0.05, 8.55, 9.29, 0.07],
    ),
    (
        0.8,
        1.0,
        [0.01, 0.00, 0.90, 0.90, 0.01],
        [0.03, 0.00, 1.84, 1.87, 0.00],
    ),
];

/// Published annual costs.
pub const ANNUAL: [PrintedRow; 30] = [
    (
        11.0,
        30.0,
        [0.07, 0.02, 0.05, 0.13, 0.01],
        [0.51, 0.06, 0.07, 0.65, 0.01],
    ),
    (
        11.0,
        20.0,
        [0.04, 0.01, 0.05, 0.10, 0.00],
        [0.26, 0.05, 0.09, 0.40, 0.00],
    ),
    (
        11.0,
        10.0,
        [0.01, 0.00, 0.06, 0.07, 0.00],
        [0.08, 0.02, 0.11, 0.21, 0.00],
    ),
    (
        11.0,
        5.0,
        [0.00, 0.00, 0.06, 0.07, 0.01],
        [0.03, 0.01, 0.12, 0.15, 0.01],
    ),
    (
        11.0,
        1.0,
        [0.00, 0.00, 0.06, 0.07, 0.01],
        [0.00, 0.00, 0.13, 0.14, 0.01],
    ),
    (
        6.0,
        30.0,
        [0.12, 0.02, 0.09, 0.23, 0.00],
        [0.82, 0.11, 0.14, 1.06, 0.01],
    ),
    (
        6.0,
        20.0,
        [0.06, 0.01, 0.10, 0.17, 0.00],
        [0.42, 0.08, 0.16, 0.66, 0.00],
    ),
    (
        6.0,
        10.0,
        [0.02, 0.00, 0.11, 0.13, 0.00],
        [0.13, 0.03, 0.20, 0.36, 0.00],
    ),
    (
        6.0,
        5.0,
        [0.01, 0.00, 0.11, 0.12, 0.00],
        [0.04, 0.01, 0.22, 0.27, 0.00],
    ),
    (
        6.0,
        1.0,
        [0.00, 0.00, 0.12, 0.12, 0.00],
        [0.00, 0.00, 0.24, 0.25, 0.01],
    ),
    (
        4.0,
        30.0,
        [0.15, 0.03, 0.13, 0.31, 0.00],
        [1.04, 0.15, 0.21, 1.40, 0.00],
    ),
    (
        4.0,
        20.0,
        [0.08, 0.02, 0.14, 0.24, 0.00],
        [0.54, 0.10, 0.25, 0.88, 0.01],
    ),
    (
        4.0,
        10.0,
        [0.03, 0.01, 0.16, 0.19, 0.01],
        [0.17, 0.04, 0.30, 0.51, 0.00],
    ),
    (
        4.0,
        5.0,
        [0.01, 0.00, 0.17, 0.18, 0.00],
        [0.06, 0.01, 0.33, 0.40, 0.00],
    ),
    (
        4.0,
        1.0,
        [0.00, 0.00, 0.18, 0.18, 0.00],
        [0.01, 0.00, 0.37, 0.37, 0.01],
    ),
    (
        3.0,
        30.0,
        [0.17, 0.04, 0.18, 0.38, 0.01],
        [1.16, 0.17, 0.29, 1.61, 0.01],
    ),
    (
        3.0,
        20.0,
        [0.09, 0.02, 0.19, 0.30, 0.00],
        [0.60, 0.11, 0.33, 1.04, 0.00],
    ),
    (
        3.0,
        10.0,
        [0.03, 0.01, 0.22, 0.25, 0.01],
        [0.19, 0.04, 0.40, 0.64, 0.01],
    ),
    (
        3.0,
        5.0,
        [0.01, 0.00, 0.23, 0.24, 0.00],
        [0.07, 0.01, 0.45, 0.53, 0.00],
    ),
    (
        3.0,
        1.0,
        [0.00, 0.00, 0.24, 0.24, 0.00],
        [0.01, 0.00, 0.49, 0.50, 0.00],
    ),
    (
        1.0,
        30.0,
        [0.12, 0.00, 0.60, 0.72, 0.00],
        [0.43, 0.00, 1.07, 1.50, 0.00],
    ),
    (
        1.0,
        20.0,
        [0.09, 0.00, 0.63, 0.72, 0.00],
        [0.33, 0.00, 1.17, 1.50, 0.00],
    ),
    (
        1.0,
        10.0,
        [0.05, 0.00, 0.67, 0.72, 0.00],
        [0.19, 0.00, 1.31, 1.50, 0.00],
    ),
    (
        1.0,
        5.0,
        [0.02, 0.00, 0.70, 0.72, 0.00],
        [0.10, 0.00, 1.39, 1.50, 0.01],
    ),
    (
        1.0,
        1.0,
        [0.01, 0.00, 0.72, 0.72, 0.01],
        [0.02, 0.00, 1.47, 1.50, 0.01],
    ),
    (
        0.8,
        30.0,
        [0.25, 0.04, 0.79, 1.08, 0.00],
        [1.56, 0.40, 1.49, 3.42, 0.03],
    ),
    (
        0.8,
        20.0,
        [0.15, 0.02, 0.82, 0.99, 0.00],
        [0.83, 0.17, 1.57, 2.55, 0.02],
    ),
    (
        0.8,
        10.0,
        [0.07, 0.00, 0.86, 0.93, 0.00],
        [0.33, 0.04, 1.69, 2.06, 0.00],
    ),
    (
        0.8,
        5.0,
        [0.03, 0.00, 0.88, 0.91, 0.00],
        [0.15, 0.01, 1.77, 1.93, 0.00],
    ),
    (
        0.8,
        1.0,
        [0.01, 0.00, 0.90, 0.90, 0.00],
        [0.03, 0.00, 1.84, 1.87, 0.00],
    ),
];

/// Tolerance on the four cost columns, percentage points.
pub const COST_TOL_PP: f64 = 0.01;
/// Tolerance on the approximation-error column, percentage points.
pub const ERROR_TOL_PP: f64 = 0.02;

/// Slack for comparing against two-decimal printed values: the raw value may
/// sit a hair beyond the tolerance after an exact-half rounding.
pub const PRINT_SLACK: f64 = 1e-9;

pub fn table_params(sigma: f64) -> MarketParams {
    MarketParams::calibrated(sigma).unwrap()
}

/// Central five-point first derivative.
pub fn d1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Central three-point first derivative.
pub fn c1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Central three-point second derivative.
pub fn c2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

/// Central mixed derivative `f_xy`.
pub fn c11(f: impl Fn(f64, f64) -> f64, x: f64, y: f64, hx: f64, hy: f64) -> f64 {
    (f(x + hx, y + hy) - f(x + hx, y - hy) - f(x - hx, y + hy) + f(x - hx, y - hy))
        / (4.0 * hx * hy)
}

/// `n` evenly spaced points covering `[0, T]`.
pub fn time_grid(horizon: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| horizon * k as f64 / (n - 1) as f64)
}

/// Largest total cost admitted in randomized grids. Beyond it `1 - C` keeps
/// fewer than 13 significant digits, so identities evaluated through `1 - C`
/// cannot reach 1e-12 in double precision.
pub const MAX_TOTAL_COST: f64 = 0.999;

pub fn well_conditioned(params: &MarketParams, profile: &InvestorProfile) -> bool {
    cumulated_cost(CostPair::UI, params, profile).is_ok_and(|c| c < MAX_TOTAL_COST)
}

/// Feasible, well-conditioned `(params, profile)` draws with `sigma` in `[0.1, 0.4]`,
/// `gamma` in `[0.3, 15]` and `T` in `[0.1, 60]`; other draws are rejected.
pub fn feasible_scenarios(seed: u64, n: usize) -> Vec<(MarketParams, InvestorProfile)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let sigma = rng.random_range(0.1..0.4);
        let params = if rng.random_bool(0.5) {
            MarketParams::calibrated(sigma).unwrap()
        } else {
            MarketParams::calibrated_wide_prior(sigma).unwrap()
        };
        let gamma = if rng.random_bool(0.3) {
            rng.random_range(0.3..1.0)
        } else {
            rng.random_range(1.0..15.0)
        };
        let profile = InvestorProfile::new(gamma, rng.random_range(0.1..60.0)).unwrap();
        if feasibility_check(&params, &profile)
            && profile.feasibility_margin(&params) > 1e-3
            && well_conditioned(&params, &profile)
        {
            out.push((params, profile));
        }
    }
    out
}
