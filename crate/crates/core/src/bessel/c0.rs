//! Monte Carlo estimate of `P_{u,v}(X₁ ≥ a | X_s > b on [0, 2])` for the Bessel
//! bridge of length 2, with an exact comparator for the unconditioned probability.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bridge::fill_bridge;
use super::density::{ln_transition_density, BesselSpec};
use crate::error::{Error, Result};
use crate::numerics::{integrate_panels, proportion, QuadOptions};
use crate::seeds;

/// Accepted-sample count below which a grid point is reported as a rare event.
pub const RARE_EVENT_THRESHOLD: u64 = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C0Point {
    pub u: f64,
    pub v: f64,
    pub trials: u64,
    pub accepted: u64,
    pub hits: u64,
    pub estimate: f64,
    pub stderr: f64,
    /// `P_{u,v}(X₁ ≥ a)` without conditioning, by quadrature.
    pub unconditional: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C0Report {
    pub points: Vec<C0Point>,
    pub minimum: f64,
    pub minimum_stderr: f64,
    /// Index into `points` of the minimum.
    pub argmin: usize,
    pub warnings: Vec<String>,
}

impl C0Report {
    /// Normal 95% interval of the grid minimum.
    pub fn minimum_ci(&self) -> (f64, f64) {
        (self.minimum - 1.96 * self.minimum_stderr, self.minimum + 1.96 * self.minimum_stderr)
    }
}

/// `P_{u,v}(X_{len/2} ≥ level)` for the bridge of total length `len`.
pub fn unconditional_midpoint_tail(spec: &BesselSpec, u: f64, v: f64, len: f64, level: f64) -> Result<f64> {
    let h = 0.5 * len;
    let ln_norm = ln_transition_density(spec, len, u, v);
    let f = |w: f64| (ln_transition_density(spec, h, u, w) + ln_transition_density(spec, h, w, v) - ln_norm).exp();
    let top = level.max(u).max(v) + 20.0 * len.sqrt() + 10.0;
    let mut breaks = vec![level];
    let steps = 32;
    for i in 1..=steps {
        breaks.push(level + (top - level) * i as f64 / steps as f64);
    }
    let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-10, max_intervals: 2000 };
    Ok(integrate_panels(f, &breaks, opts)?.value)
}

/// The interior mesh points of `[0, 2]` (spacing `2/mesh`) are required to stay above `b`;
/// the endpoints are not part of the conditioning.
pub fn estimate_c0(spec: &BesselSpec, uv_grid: &[(f64, f64)], trials: u64, mesh: usize, seed: u64) -> Result<C0Report> {
    if trials < 1000 {
        return Err(Error::InvalidParameter(format!("c0 estimate needs at least 1000 trials, got {trials}")));
    }
    if mesh < 2 || mesh % 2 != 0 {
        return Err(Error::InvalidParameter(format!("c0 mesh must be even and ≥ 2, got {mesh}")));
    }
    if uv_grid.is_empty() {
        return Err(Error::InvalidParameter("empty (u, v) grid".into()));
    }
    let length = 2.0;
    let mid = mesh / 2;
    let mut points = Vec::with_capacity(uv_grid.len());
    let mut warnings = Vec::new();
    for (gi, &(u, v)) in uv_grid.iter().enumerate() {
        if !(u > 0.0 && v > 0.0) {
            return Err(Error::InvalidParameter(format!("grid point ({u}, {v}) must be positive")));
        }
        let point_seed = seeds::derive(seed, gi as u64);
        let outcomes = (0..trials)
            .into_par_iter()
            .map(|t| -> Result<(u64, u64)> {
                let mut rng = seeds::rng(seeds::derive(point_seed, t));
                let mut values = Vec::with_capacity(mesh + 1);
                let kept = fill_bridge(spec, u, v, length, mesh, &mut rng, &mut values, Some(spec.b))?;
                Ok(if kept { (1, (values[mid] >= spec.a) as u64) } else { (0, 0) })
            })
            .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
        let (accepted, hits) = outcomes;
        let (estimate, stderr) = proportion(hits, accepted);
        if accepted < RARE_EVENT_THRESHOLD {
            warnings.push(format!(
                "conditioning event rare at (u, v) = ({u}, {v}): {accepted} of {trials} paths accepted"
            ));
        }
        points.push(C0Point {
            u,
            v,
            trials,
            accepted,
            hits,
            estimate,
            stderr,
            unconditional: unconditional_midpoint_tail(spec, u, v, length, spec.a)?,
        });
    }
    let argmin = points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.estimate.is_finite())
        .min_by(|a, b| a.1.estimate.total_cmp(&b.1.estimate))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::InsufficientData { needed: 1, got: 0 })?;
    Ok(C0Report {
        minimum: points[argmin].estimate,
        minimum_stderr: points[argmin].stderr,
        argmin,
        points,
        warnings,
    })
}
