//! Replica estimators of the quenched free energy `F` and the rate `μ`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::disorder::{sample_disorder, DisorderLaw, PinningParams};
use super::partition::WindowModel;
use crate::error::{Error, Result};
use crate::numerics::{log_sum_exp, mean_stderr, sorted_quantile};
use crate::renewal::RenewalLaw;
use crate::seeds;

const Z95: f64 = 1.959_963_984_540_054;
const BOOTSTRAP_RESAMPLES: usize = 2000;

/// Point estimate with standard error and a 95% interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub ci: (f64, f64),
}

/// `ln Z_{0,N,ω}` for independent disorder replicas; replica `i` uses `derive(seed, i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicaSet {
    pub n: usize,
    pub seeds: Vec<u64>,
    pub log_z: Vec<f64>,
}

pub fn replica_log_partitions(
    k: &RenewalLaw,
    law: DisorderLaw,
    params: PinningParams,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<ReplicaSet> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("N must be at least 2, got {n}")));
    }
    if replicas == 0 {
        return Err(Error::InvalidParameter("at least one replica is required".into()));
    }
    let seeds: Vec<u64> = (0..replicas as u64).map(|i| seeds::derive(seed, i)).collect();
    let log_z = seeds
        .par_iter()
        .map(|&s| {
            let om = sample_disorder(law, (0, n as i64), s)?;
            WindowModel::new(k, &om, params, 0, n as i64)?.log_z(0, n as i64, &[])
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ReplicaSet { n, seeds, log_z })
}

impl ReplicaSet {
    /// Mean of `(1/N) ln Z_{0,N,ω}`.
    pub fn free_energy(&self) -> Estimate {
        let per: Vec<f64> = self.log_z.iter().map(|z| z / self.n as f64).collect();
        let (value, stderr) = mean_stderr(&per);
        Estimate { value, stderr, ci: (value - Z95 * stderr, value + Z95 * stderr) }
    }

    fn mu_of(&self, idx: impl Iterator<Item = usize>) -> f64 {
        let neg: Vec<f64> = idx.map(|i| -self.log_z[i]).collect();
        -(log_sum_exp(&neg) - (neg.len() as f64).ln()) / self.n as f64
    }

    /// `−(1/N) ln( mean of 1/Z )` with a percentile bootstrap interval.
    pub fn mu(&self, bootstrap_seed: u64) -> Estimate {
        let r = self.log_z.len();
        let value = self.mu_of(0..r);
        if r == 1 {
            return Estimate { value, stderr: 0.0, ci: (value, value) };
        }
        let mut rng = seeds::rng(bootstrap_seed);
        let mut boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
            .map(|_| {
                let idx: Vec<usize> = (0..r).map(|_| rng.random_range(0..r)).collect();
                self.mu_of(idx.into_iter())
            })
            .collect();
        let (_, se) = mean_stderr(&boot);
        let stderr = se * (BOOTSTRAP_RESAMPLES as f64).sqrt();
        boot.sort_by(f64::total_cmp);
        Estimate { value, stderr, ci: (sorted_quantile(&boot, 0.025), sorted_quantile(&boot, 0.975)) }
    }
}

pub fn free_energy_estimate(
    k: &RenewalLaw,
    law: DisorderLaw,
    params: PinningParams,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<Estimate> {
    Ok(replica_log_partitions(k, law, params, n, replicas, seed)?.free_energy())
}

pub fn mu_estimate(
    k: &RenewalLaw,
    law: DisorderLaw,
    params: PinningParams,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<Estimate> {
    let set = replica_log_partitions(k, law, params, n, replicas, seed)?;
    Ok(set.mu(seeds::derive(seed, u64::MAX)))
}
