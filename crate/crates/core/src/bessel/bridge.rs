//! Bessel bridge sampling by sequential inverse-CDF steps on an adaptive grid.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::density::{ln_transition_density, BesselSpec};
use crate::error::{Error, Result};
use crate::seeds;

const COARSE_POINTS: usize = 65;
const FINE_POINTS: usize = 257;
/// Half-width of the initial grid in units of the Brownian-bridge standard deviation.
const SPREAD: f64 = 14.0;
/// Grid points more than this far below the log-density maximum are treated as empty.
const LOG_RANGE: f64 = 40.0;
const FLOOR: f64 = 1e-9;
/// Fine-grid support: mass beyond `e^{-FINE_RANGE}` of the peak density is dropped.
const FINE_RANGE: f64 = 30.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BridgePath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let h = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| if i + 1 == points { hi } else { lo + h * i as f64 }).collect()
}

/// Draws the value after a step `dt` from `x`, given the bridge ends at `v` after `remaining`.
pub fn bridge_step(spec: &BesselSpec, x: f64, v: f64, dt: f64, remaining: f64, uniform: f64) -> Result<f64> {
    if dt >= remaining {
        return Ok(v);
    }
    let rest = remaining - dt;
    let log_q = |z: f64| ln_transition_density(spec, dt, x, z) + ln_transition_density(spec, rest, z, v);
    let m = x + (v - x) * dt / remaining;
    let s = (dt * rest / remaining).sqrt();
    let mut lo = (m - SPREAD * s).max(FLOOR);
    let mut hi = m + SPREAD * s;

    let mut coarse = Vec::new();
    let mut values = Vec::new();
    for _ in 0..16 {
        coarse = grid(lo, hi, COARSE_POINTS);
        values = coarse.iter().map(|&z| log_q(z)).collect::<Vec<f64>>();
        let top = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return Err(Error::Accuracy { what: "bridge step density".into(), achieved: f64::NAN, requested: 0.0 });
        }
        let mut grown = false;
        if values[COARSE_POINTS - 1] > top - LOG_RANGE {
            hi += SPREAD * s;
            grown = true;
        }
        if lo > FLOOR && values[0] > top - LOG_RANGE {
            lo = (lo - SPREAD * s).max(FLOOR);
            grown = true;
        }
        if !grown {
            break;
        }
    }
    let top = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let first = values.iter().position(|&l| l > top - FINE_RANGE).unwrap_or(0);
    let last = values.iter().rposition(|&l| l > top - FINE_RANGE).unwrap_or(COARSE_POINTS - 1);
    let fine = grid(coarse[first.saturating_sub(1)], coarse[(last + 1).min(COARSE_POINTS - 1)], FINE_POINTS);

    let logs: Vec<f64> = fine.iter().map(|&z| log_q(z)).collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let dens: Vec<f64> = logs.iter().map(|&l| (l - top).exp()).collect();
    let mut cdf = Vec::with_capacity(FINE_POINTS);
    cdf.push(0.0);
    for i in 1..FINE_POINTS {
        let area = 0.5 * (dens[i - 1] + dens[i]) * (fine[i] - fine[i - 1]);
        cdf.push(cdf[i - 1] + area);
    }
    let total = cdf[FINE_POINTS - 1];
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Accuracy { what: "bridge step normalization".into(), achieved: total, requested: 0.0 });
    }

    let target = uniform * total;
    let i = cdf.partition_point(|&c| c < target).clamp(1, FINE_POINTS - 1);
    // invert the trapezoid between fine[i-1] and fine[i] exactly
    let (z0, h) = (fine[i - 1], fine[i] - fine[i - 1]);
    let (f0, f1) = (dens[i - 1], dens[i]);
    let need = target - cdf[i - 1];
    let slope = (f1 - f0) / h;
    let dz = if slope.abs() < 1e-12 * (f0 + f1).max(1e-300) / h {
        need / f0.max(1e-300)
    } else {
        let disc = (f0 * f0 + 2.0 * slope * need).max(0.0);
        2.0 * need / (f0 + disc.sqrt())
    };
    Ok(z0 + dz.clamp(0.0, h))
}

/// Fills `values` with a bridge from `u` to `v` over `length` on `mesh` equal steps.
/// Returns `false` early, leaving a partial path, when `stop_at_or_below` is given and
/// an interior value falls to or below it.
pub(crate) fn fill_bridge<R: Rng + ?Sized>(
    spec: &BesselSpec,
    u: f64,
    v: f64,
    length: f64,
    mesh: usize,
    rng: &mut R,
    values: &mut Vec<f64>,
    stop_at_or_below: Option<f64>,
) -> Result<bool> {
    values.clear();
    values.push(u);
    let dt = length / mesh as f64;
    let mut x = u;
    for j in 1..mesh {
        let remaining = length - dt * (j - 1) as f64;
        x = bridge_step(spec, x, v, dt, remaining, rng.random())?;
        values.push(x);
        if stop_at_or_below.is_some_and(|lvl| x <= lvl) {
            return Ok(false);
        }
    }
    values.push(v);
    Ok(true)
}

pub fn bridge_sample(spec: &BesselSpec, u: f64, v: f64, length: f64, mesh: usize, seed: u64) -> Result<BridgePath> {
    if !(u > 0.0 && v > 0.0 && length > 0.0) || !u.is_finite() || !v.is_finite() || !length.is_finite() {
        return Err(Error::InvalidParameter(format!("bridge needs u, v, length > 0, got ({u}, {v}, {length})")));
    }
    if mesh < 2 {
        return Err(Error::InvalidParameter(format!("bridge mesh must be at least 2, got {mesh}")));
    }
    let mut rng = seeds::rng(seed);
    let mut values = Vec::with_capacity(mesh + 1);
    fill_bridge(spec, u, v, length, mesh, &mut rng, &mut values, None)?;
    let times = (0..=mesh).map(|j| length * j as f64 / mesh as f64).collect();
    Ok(BridgePath { times, values })
}
