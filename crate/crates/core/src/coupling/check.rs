//! Empirical check of `|c(k)| ≤ P(T > k)` over an ensemble of pairs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dressed::DressOptions;
use super::goodness::fixed_blocks;
use super::pair::{CouplingResult, MeetKind, PairSimulator};
use crate::bessel::Decomposition;
use crate::error::{Error, Result};
use crate::numerics::{fit_line, proportion, LineFit};
use crate::pinning::{replica_log_partitions, two_point, DisorderField, Estimate, PinningParams};
use crate::renewal::RenewalLaw;
use crate::seeds;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingConfig {
    pub ks: Vec<i64>,
    pub pairs: usize,
    /// The window is `[−margin, k_max + margin]`.
    pub margin: i64,
    pub options: DressOptions,
    /// `R = c |ln μ| / μ`.
    pub block_c: f64,
    /// Upper bound on the block length actually used.
    pub max_block: i64,
    /// Fraction of empty blocks that counts as a sparse path.
    pub eta: f64,
    /// System size and replica count for the `F` and `μ` estimates.
    pub estimate_n: usize,
    pub estimate_replicas: usize,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        Self {
            ks: vec![8, 16, 32, 64],
            pairs: 10_000,
            margin: 256,
            options: DressOptions::default(),
            block_c: 4.0,
            max_block: 8,
            eta: 0.1,
            estimate_n: 2048,
            estimate_replicas: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingRow {
    pub k: i64,
    #[serde(rename = "P_T_gt_k")]
    pub p_t_gt_k: f64,
    pub stderr: f64,
    /// `|c(k)|`, averaged over the disorder ensemble.
    pub c_k: f64,
    pub good_block_mean: f64,
    /// `|c(k)| ≤ P̂(T > k) + 3σ`.
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub rows: Vec<CouplingRow>,
    pub free_energy: Estimate,
    pub mu: Estimate,
    /// `c |ln μ̂| / μ̂` before capping.
    pub block_length_raw: f64,
    pub block_length: i64,
    pub window: (i64, i64),
    pub met_integer_point: usize,
    pub met_excursion_crossing: usize,
    pub met_linear_gap_merge: usize,
    pub psi_mismatch_total: usize,
    pub mesh_fallback_total: usize,
    /// Fraction of pairs whose pinned path leaves at least `η M` blocks of `[1, k_max]` empty.
    pub sparse_fraction: f64,
    /// `ln P̂(T > k)` against the mean good-block count.
    pub decay_fit: Option<LineFit>,
    pub monotone: bool,
}

impl CouplingReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "k,P_T_gt_k,stderr,c_k,good_block_mean")?;
        for r in &self.rows {
            writeln!(w, "{},{:e},{:e},{:e},{}", r.k, r.p_t_gt_k, r.stderr, r.c_k, r.good_block_mean)?;
        }
        Ok(())
    }
}

fn validate(config: &CouplingConfig, omegas: &[DisorderField]) -> Result<i64> {
    config.options.validate()?;
    if omegas.is_empty() {
        return Err(Error::InvalidParameter("empty disorder ensemble".into()));
    }
    if config.pairs == 0 || config.ks.is_empty() || config.ks.iter().any(|&k| k <= 0) {
        return Err(Error::InvalidParameter("need pairs > 0 and positive k values".into()));
    }
    if config.margin <= 0 || !(config.block_c > 0.0) || config.max_block <= 0 || !(config.eta > 0.0 && config.eta <= 1.0) {
        return Err(Error::InvalidParameter("margin, c, block cap and η must be positive (η ≤ 1)".into()));
    }
    Ok(*config.ks.iter().max().expect("nonempty"))
}

/// Runs `pairs` pair simulations spread over the disorder ensemble; pair `i` uses field
/// `i mod |omegas|` and seed `derive(seed, i)`.
pub fn coupling_bound_check(
    law: &RenewalLaw,
    omegas: &[DisorderField],
    params: PinningParams,
    decomposition: &Decomposition,
    config: &CouplingConfig,
    seed: u64,
) -> Result<CouplingReport> {
    let k_max = validate(config, omegas)?;
    let set = replica_log_partitions(
        law,
        omegas[0].law,
        params,
        config.estimate_n,
        config.estimate_replicas,
        seeds::derive(seed, u64::MAX),
    )?;
    let free_energy = set.free_energy();
    if !(free_energy.ci.0 > 0.0) {
        return Err(Error::Phase(format!(
            "coupling check needs a localized point, F̂ = {:.3e} ± {:.1e}",
            free_energy.value, free_energy.stderr
        )));
    }
    let mu = set.mu(seeds::derive(seed, u64::MAX - 1));
    let mu_value = mu.value.min(free_energy.value);
    let block_length_raw = config.block_c * mu_value.ln().abs() / mu_value;
    let block_length = (block_length_raw.floor() as i64).clamp(1, config.max_block);

    let window = (-config.margin, k_max + config.margin);
    let sims = omegas
        .iter()
        .map(|om| PairSimulator::new(law, om, params, decomposition, window, k_max, config.options))
        .collect::<Result<Vec<_>>>()?;
    let block_sets: Vec<Vec<(i64, i64)>> = config.ks.iter().map(|&k| fixed_blocks(k, block_length)).collect();
    let all_blocks = fixed_blocks(k_max, block_length);

    // per pair: result, good-block counts per k, sparse indicator
    let outcomes = (0..config.pairs)
        .into_par_iter()
        .map(|i| -> Result<(CouplingResult, Vec<usize>, bool)> {
            let sim = &sims[i % sims.len()];
            let (res, p1, p2) = sim.run_detailed(seeds::derive(seed, i as u64), &[])?;
            let goods = block_sets
                .iter()
                .map(|b| super::goodness::good_blocks(&p1, &p2, b).iter().filter(|&&g| g).count())
                .collect();
            let empty = all_blocks
                .iter()
                .filter(|&&(l, r)| {
                    let j = p1.contacts.partition_point(|&c| c < l);
                    p1.contacts.get(j).is_none_or(|&c| c > r)
                })
                .count();
            let sparse = empty as f64 >= config.eta * all_blocks.len() as f64;
            Ok((res, goods, sparse))
        })
        .collect::<Result<Vec<_>>>()?;

    let lags: Vec<usize> = config.ks.iter().map(|&k| k as usize).collect();
    let c_by_omega = omegas
        .par_iter()
        .map(|om| two_point(law, om, params, window, &lags).map(|s| s.c))
        .collect::<Result<Vec<_>>>()?;

    let n = outcomes.len() as u64;
    let mut rows = Vec::with_capacity(config.ks.len());
    for (idx, &k) in config.ks.iter().enumerate() {
        let survivors = outcomes.iter().filter(|(r, _, _)| r.censored || r.t > k as f64).count() as u64;
        let (p, se) = proportion(survivors, n);
        let c_k = c_by_omega.iter().map(|c| c[idx].abs()).sum::<f64>() / c_by_omega.len() as f64;
        let good_block_mean = outcomes.iter().map(|(_, g, _)| g[idx] as f64).sum::<f64>() / n as f64;
        rows.push(CouplingRow { k, p_t_gt_k: p, stderr: se, c_k, good_block_mean, holds: c_k <= p + 3.0 * se });
    }
    let mut sorted = rows.clone();
    sorted.sort_by_key(|r| r.k);
    let monotone = sorted.windows(2).all(|w| w[1].p_t_gt_k <= w[0].p_t_gt_k);
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        sorted.iter().filter(|r| r.p_t_gt_k > 0.0).map(|r| (r.good_block_mean, r.p_t_gt_k.ln())).unzip();
    let decay_fit = if xs.len() >= 2 { fit_line(&xs, &ys).ok() } else { None };

    let count = |kind: MeetKind| outcomes.iter().filter(|(r, _, _)| r.met_kind == Some(kind)).count();
    Ok(CouplingReport {
        rows,
        free_energy,
        mu,
        block_length_raw,
        block_length,
        window,
        met_integer_point: count(MeetKind::IntegerPoint),
        met_excursion_crossing: count(MeetKind::ExcursionCrossing),
        met_linear_gap_merge: count(MeetKind::LinearGapMerge),
        psi_mismatch_total: outcomes.iter().map(|(r, _, _)| r.psi_mismatch).sum(),
        mesh_fallback_total: outcomes.iter().map(|(r, _, _)| r.mesh_fallback).sum(),
        sparse_fraction: outcomes.iter().filter(|(_, _, s)| *s).count() as f64 / n as f64,
        decay_fit,
        monotone,
    })
}
