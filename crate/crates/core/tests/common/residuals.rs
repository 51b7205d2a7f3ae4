//! Finite-difference residuals of the coefficient ODEs and of the PDEs the
//! value surfaces solve.

use super::{c1, c11, c2, d1, time_grid};
use infocost::model::{filter, Surface};
use infocost::params::{InvestorProfile, InvestorType, MarketParams};

pub const ODE_POINTS: usize = 10_000;
pub const PDE_STEP: f64 = 1e-4;

/// `d theta_hat / dy`.
pub fn theta_y(t: f64, params: &MarketParams) -> f64 {
    params.v0 / (1.0 + params.v0 * t)
}

/// Largest absolute residual of the coefficient ODEs over the time grid.
pub fn ode_residual(
    investor: InvestorType,
    params: &MarketParams,
    profile: &InvestorProfile,
) -> f64 {
    let s = Surface::new(investor, params, profile).unwrap();
    let g = profile.gamma;
    let q = 1.0 - g;
    let horizon = profile.horizon;
    let step = horizon / (ODE_POINTS - 1) as f64;
    let quad = |t: f64| s.coefficients(t).quadratic;
    let lin = |t: f64| s.coefficients(t).linear;
    let cst = |t: f64| s.coefficients(t).constant;
    let mut worst = 0.0f64;
    for t in time_grid(horizon, ODE_POINTS) {
        let ty = theta_y(t, params);
        let c = s.coefficients(t);
        let (a, b) = (c.quadratic, c.linear);
        let residuals = match investor {
            InvestorType::R => [
                d1(quad, t, step)
                    + 2.0 * ty * ty / g * a * a
                    + 2.0 * q * ty / g * a
                    + q / (2.0 * g),
                d1(lin, t, step) + q * ty / g * b + 2.0 * ty * ty / g * a * b,
                d1(cst, t, step) + ty * ty * a + ty * ty / (2.0 * g) * b * b,
            ],
            InvestorType::M => [
                d1(quad, t, step) + 2.0 * ty * ty * a * a + 2.0 * q * ty / g * a + q / (2.0 * g),
                d1(lin, t, step) + q * ty / g * b + 2.0 * ty * ty * a * b,
                d1(cst, t, step) + ty * ty * a + ty * ty / 2.0 * b * b,
            ],
            InvestorType::U => {
                // exponent is a(t) * theta_hat + b(t)
                let theta0 = params.theta0;
                [
                    d1(lin, t, step) + q / g * theta0,
                    d1(cst, t, step) + q / g * theta0 * ty * b + 0.5 * ty * ty * b * b
                        - q / (2.0 * g) * theta0 * theta0,
                    a,
                ]
            }
            InvestorType::I => unreachable!(),
        };
        for r in residuals {
            worst = worst.max(r.abs());
        }
    }
    worst
}

pub fn interior_points(horizon: f64) -> Vec<(f64, f64, f64)> {
    let mut pts = Vec::new();
    for frac in [0.25, 0.5, 0.75] {
        for y in [-2.0, 0.0, 1.5, 5.0] {
            for x in [0.5, 1.0, 7.0] {
                pts.push((frac * horizon, x, y));
            }
        }
    }
    pts
}

/// Residual of the reduced equation for `h` (rational or myopic), written in
/// terms of `L = ln h`.
pub fn h_pde_residual(
    s: &Surface,
    params: &MarketParams,
    profile: &InvestorProfile,
    t: f64,
    y: f64,
) -> f64 {
    let g = profile.gamma;
    let q = 1.0 - g;
    let th = filter(t, y, params).theta_hat;
    let l_t = c1(|tt| s.log_h(tt, y), t, PDE_STEP);
    let l_y = c1(|yy| s.log_h(t, yy), y, PDE_STEP);
    let l_yy = c2(|yy| s.log_h(t, yy), y, PDE_STEP);
    let hyy_over_h = l_yy + l_y * l_y;
    match s.investor() {
        InvestorType::R => {
            l_t + th / g * l_y
                + q / (2.0 * g) * l_y * l_y
                + 0.5 * hyy_over_h
                + q / (2.0 * g) * th * th
        }
        InvestorType::M => l_t + th / g * l_y + 0.5 * hyy_over_h + q / (2.0 * g) * th * th,
        _ => unreachable!(),
    }
}

/// Partial derivatives of `v` at `(t, x, y)`.
pub struct Partials {
    pub v: f64,
    pub v_t: f64,
    pub v_x: f64,
    pub v_y: f64,
    pub v_xx: f64,
    pub v_xy: f64,
    pub v_yy: f64,
}

pub fn partials(s: &Surface, t: f64, x: f64, y: f64) -> Partials {
    let h = PDE_STEP;
    // relative step in x keeps the stencil well inside x > 0
    let hx = h * x;
    Partials {
        v: s.eval(t, x, y),
        v_t: c1(|tt| s.eval(tt, x, y), t, h),
        v_x: c1(|xx| s.eval(t, xx, y), x, hx),
        v_y: c1(|yy| s.eval(t, x, yy), y, h),
        v_xx: c2(|xx| s.eval(t, xx, y), x, hx),
        v_xy: c11(|xx, yy| s.eval(t, xx, yy), x, y, hx, h),
        v_yy: c2(|yy| s.eval(t, x, yy), y, h),
    }
}

/// PDE residual divided by `|v|`.
pub fn v_pde_residual(
    s: &Surface,
    params: &MarketParams,
    profile: &InvestorProfile,
    t: f64,
    x: f64,
    y: f64,
) -> f64 {
    let g = profile.gamma;
    let r = params.r;
    let th = filter(t, y, params).theta_hat;
    let p = partials(s, t, x, y);
    let res = match s.investor() {
        InvestorType::R => {
            p.v_t + r * x * p.v_x - (th * p.v_x + p.v_xy).powi(2) / (2.0 * p.v_xx)
                + th * p.v_y
                + 0.5 * p.v_yy
        }
        InvestorType::M => {
            p.v_t
                + r * x * p.v_x
                + th * th / g * x * p.v_x
                + th * p.v_y
                + th * th / (2.0 * g * g) * x * x * p.v_xx
                + th / g * x * p.v_xy
                + 0.5 * p.v_yy
        }
        InvestorType::U => {
            let theta0 = params.theta0;
            p.v_t
                + r * x * p.v_x
                + th * theta0 / g * x * p.v_x
                + th * p.v_y
                + theta0 * theta0 / (2.0 * g * g) * x * x * p.v_xx
                + theta0 / g * x * p.v_xy
                + 0.5 * p.v_yy
        }
        InvestorType::I => unreachable!(),
    };
    res / p.v.abs()
}
