//! Euler–Maruyama simulation of the Bessel SDE `dρ = dW + (δ−1)/(2ρ) dt`
//! started at `a` and absorbed at `b`, with a Brownian-bridge crossing test
//! between grid points.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::density::BesselSpec;
use crate::error::{Error, Result};
use crate::seeds;

/// Internal integration steps per unit time used by the excursion sampler.
pub const DEFAULT_STEPS_PER_UNIT: usize = 256;

/// Default number of rejection attempts before giving up on an excursion.
pub const DEFAULT_BUDGET: u64 = 2_000_000;

/// Remaining-time multiplier beyond which a path can no longer reach `b` in time
/// (probability below `2Φ(−6.5) ≈ 8·10⁻¹¹`, the drift only pushes upward).
const KILL_SIGMAS: f64 = 6.5;

struct Step {
    dt: f64,
    sqrt_dt: f64,
    drift: f64,
    b: f64,
}

impl Step {
    fn new(spec: &BesselSpec, dt: f64) -> Self {
        Self { dt, sqrt_dt: dt.sqrt(), drift: 0.5 * (spec.delta - 1.0), b: spec.b }
    }

    /// Advances `ρ` by one step; returns the hitting fraction of the step when `b` was reached.
    #[inline]
    fn advance<R: Rng + ?Sized>(&self, rho: &mut f64, rng: &mut R) -> Option<f64> {
        let z: f64 = rng.sample(StandardNormal);
        let old = *rho;
        let mut new = old + self.drift / old * self.dt + self.sqrt_dt * z;
        if new <= self.b {
            *rho = self.b;
            return Some((old - self.b) / (old - new));
        }
        // probability that the bridge between the two grid values dipped below b
        let cross = (-2.0 * (old - self.b) * (new - self.b) / self.dt).exp();
        if cross > 1e-300 && rng.random::<f64>() < cross {
            *rho = self.b;
            return Some(0.5);
        }
        if new <= 0.0 {
            new = -new;
        }
        *rho = new;
        None
    }
}

/// Hitting time of `b` from `a`, censored at `t_max` (`None` if not hit).
pub fn simulate_hitting_time<R: Rng + ?Sized>(spec: &BesselSpec, dt: f64, t_max: f64, rng: &mut R) -> Option<f64> {
    let step = Step::new(spec, dt);
    let mut rho = spec.a;
    let mut t = 0.0;
    let steps = (t_max / dt).ceil() as usize;
    for i in 0..steps {
        if let Some(frac) = step.advance(&mut rho, rng) {
            let hit = t + frac * dt;
            return (hit <= t_max).then_some(hit);
        }
        t = (i + 1) as f64 * dt;
        if rho - spec.b > KILL_SIGMAS * (t_max - t).max(0.0).sqrt() {
            return None;
        }
    }
    None
}

/// Hitting times of `paths` independent runs; run `i` uses the stream `derive(seed, i)`.
pub fn simulate_hitting_times(spec: &BesselSpec, paths: usize, dt: f64, t_max: f64, seed: u64) -> Vec<Option<f64>> {
    (0..paths as u64)
        .into_par_iter()
        .map(|i| simulate_hitting_time(spec, dt, t_max, &mut seeds::rng(seeds::derive(seed, i))))
        .collect()
}

/// A path from `a` conditioned on hitting `b` during `(n−1, n]`, recorded on
/// the mesh `j/mesh`, `0 ≤ j ≤ n·mesh`, and set to zero from the hitting time on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Excursion {
    pub n: usize,
    pub hit_time: f64,
    pub mesh: usize,
    pub values: Vec<f64>,
    pub attempts: u64,
}

impl Excursion {
    pub fn time(&self, j: usize) -> f64 {
        j as f64 / self.mesh as f64
    }
}

/// Rejection sampler for conditioned excursions.
#[derive(Clone, Copy, Debug)]
pub struct ExcursionSampler {
    pub spec: BesselSpec,
    pub steps_per_unit: usize,
    pub budget: u64,
}

impl ExcursionSampler {
    pub fn new(spec: BesselSpec) -> Self {
        Self { spec, steps_per_unit: DEFAULT_STEPS_PER_UNIT, budget: DEFAULT_BUDGET }
    }

    /// Draws an excursion seen on `mesh` points per unit time; `mesh` must divide
    /// the internal step count, so coarser meshes see a subset of the same path.
    pub fn sample(&self, n: usize, mesh: usize, seed: u64) -> Result<Excursion> {
        if n == 0 {
            return Err(Error::InvalidParameter("excursion length must be positive".into()));
        }
        if mesh == 0 || self.steps_per_unit % mesh != 0 {
            return Err(Error::InvalidParameter(format!(
                "mesh {mesh} must divide the {} internal steps per unit",
                self.steps_per_unit
            )));
        }
        let stride = self.steps_per_unit / mesh;
        let dt = 1.0 / self.steps_per_unit as f64;
        let step = Step::new(&self.spec, dt);
        let total_steps = n * self.steps_per_unit;
        let lower = (n - 1) as f64;
        let horizon = n as f64;
        let mut rng = seeds::rng(seed);
        let mut values = Vec::with_capacity(n * mesh + 1);
        for attempt in 1..=self.budget {
            values.clear();
            values.push(self.spec.a);
            let mut rho = self.spec.a;
            let mut hit = None;
            for i in 0..total_steps {
                if let Some(frac) = step.advance(&mut rho, &mut rng) {
                    hit = Some((i as f64 + frac) * dt);
                    break;
                }
                let t = (i + 1) as f64 * dt;
                if (i + 1) % stride == 0 {
                    values.push(rho);
                }
                if rho - self.spec.b > KILL_SIGMAS * (horizon - t).max(0.0).sqrt() {
                    break;
                }
            }
            let Some(t_hit) = hit else { continue };
            if t_hit <= lower || t_hit > horizon {
                continue;
            }
            values.resize(n * mesh + 1, 0.0);
            return Ok(Excursion { n, hit_time: t_hit, mesh, values, attempts: attempt });
        }
        Err(Error::Feasibility { what: format!("excursion of length {n}"), budget: self.budget })
    }
}

/// Conditioned excursion with default internal resolution and budget.
pub fn excursion_sample(spec: &BesselSpec, n: usize, mesh: usize, seed: u64) -> Result<Excursion> {
    ExcursionSampler::new(*spec).sample(n, mesh, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn excursion_contract() {
        let spec = BesselSpec::new(3.5).unwrap();
        for n in 1..=4 {
            for s in 0..5 {
                let e = excursion_sample(&spec, n, 16, s).unwrap();
                assert!(e.hit_time > (n - 1) as f64 && e.hit_time <= n as f64);
                assert_eq!(e.values[0], 1.0);
                assert_eq!(e.values.len(), n * 16 + 1);
                for (j, &v) in e.values.iter().enumerate() {
                    if e.time(j) < e.hit_time {
                        assert!(v > 0.5, "n={n} j={j} v={v}");
                    } else {
                        assert_eq!(v, 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn coarse_mesh_is_a_subsample() {
        let spec = BesselSpec::new(3.5).unwrap();
        let fine = excursion_sample(&spec, 3, 32, 7).unwrap();
        let coarse = excursion_sample(&spec, 3, 8, 7).unwrap();
        assert_eq!(fine.hit_time, coarse.hit_time);
        for j in 0..coarse.values.len() {
            assert_eq!(coarse.values[j], fine.values[4 * j]);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let spec = BesselSpec::new(3.5).unwrap();
        let s = ExcursionSampler { budget: 1, ..ExcursionSampler::new(spec) };
        let failures = (0..20).filter(|&i| matches!(s.sample(40, 4, i), Err(Error::Feasibility { .. }))).count();
        assert!(failures > 15);
        assert!(excursion_sample(&spec, 2, 3, 0).is_err());
    }
}
