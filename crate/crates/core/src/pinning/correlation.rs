//! Two-point functions `c(k) = P(k ∈ τ | 0 ∈ τ) − P(k ∈ τ)` on finite windows.

use serde::{Deserialize, Serialize};

use super::disorder::{DisorderField, PinningParams};
use super::partition::WindowModel;
use crate::error::{Error, Result};
use crate::renewal::{fit_decay_points, DecayFit, RenewalLaw};

/// Relative change below which a window is declared converged.
pub const WINDOW_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPointSeries {
    pub lags: Vec<usize>,
    pub c: Vec<f64>,
    pub window: (i64, i64),
    /// Largest `|c_W(k) − c_{2W}(k)| / |c_{2W}(k)|` against the doubled window.
    pub window_change: f64,
    pub converged: bool,
}

fn values_on(
    k: &RenewalLaw,
    site: &dyn Fn(i64) -> f64,
    params: PinningParams,
    (x, y): (i64, i64),
    lags: &[usize],
) -> Result<Vec<f64>> {
    if params.beta == 0.0 {
        // translation invariant: Z_{a,b} = G(b − a)
        let g = WindowModel::homogeneous(k, params.h, (y - x) as usize)?
            .forward(0, y - x, &[])?
            .log_z;
        let gz = |d: i64| g[d as usize];
        return Ok(lags
            .iter()
            .map(|&l| {
                let l = l as i64;
                let cond = gz(l) + gz(y - l) - gz(y);
                let free = gz(l - x) + gz(y - l) - gz(y - x);
                cond.exp() - free.exp()
            })
            .collect());
    }
    let m = WindowModel::from_sites(k, site, params, x, y)?;
    let from_x = m.forward(x, y, &[])?;
    let from_0 = m.forward(0, y, &[])?;
    let to_y = m.backward(x, y, &[])?;
    Ok(lags
        .iter()
        .map(|&l| {
            let l = l as i64;
            let back = to_y[(l - x) as usize];
            let cond = from_0.at(l) + back - from_0.total();
            let free = from_x.at(l) + back - from_x.total();
            cond.exp() - free.exp()
        })
        .collect())
}

/// `c(k)` on `[x, y]` with left anchor 0, checked against `[2x, 2y]`.
pub fn two_point(
    k: &RenewalLaw,
    omega: &DisorderField,
    params: PinningParams,
    window: (i64, i64),
    lags: &[usize],
) -> Result<TwoPointSeries> {
    let (x, y) = window;
    if !(x < 0 && y > 0) {
        return Err(Error::Domain(format!("window {window:?} must satisfy x < 0 < y")));
    }
    for &l in lags {
        if l == 0 || l as i64 >= y {
            return Err(Error::Domain(format!("lag {l} outside (0, {y})")));
        }
    }
    let site = |n: i64| omega.at(n);
    let c = values_on(k, &site, params, window, lags)?;
    let wide = values_on(k, &site, params, (2 * x, 2 * y), lags)?;
    let window_change = c
        .iter()
        .zip(&wide)
        .map(|(a, b)| if *b == 0.0 { (a - b).abs() } else { ((a - b) / b).abs() })
        .fold(0.0, f64::max);
    Ok(TwoPointSeries {
        lags: lags.to_vec(),
        c,
        window,
        window_change,
        converged: window_change < WINDOW_TOLERANCE,
    })
}

/// Exponential decay fit of `|c(k)|`; `ξ = 1/rate`.
pub fn correlation_length(series: &TwoPointSeries) -> Result<DecayFit> {
    let lo = series.lags.iter().copied().min().unwrap_or(0);
    let hi = series.lags.iter().copied().max().unwrap_or(0);
    fit_decay_points(&series.lags, &series.c, (lo, hi))
}
