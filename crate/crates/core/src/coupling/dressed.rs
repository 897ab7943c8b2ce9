//! Renewal trajectories dressed with per-gap excursion flags and, where
//! affordable, discretized Bessel excursions.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bessel::sde::DEFAULT_BUDGET;
use crate::bessel::{Decomposition, Excursion, ExcursionSampler};
use crate::error::{Error, Result};
use crate::seeds;

const FLAG_STREAM: u64 = 0;
const EXCURSION_STREAM: u64 = 1;

/// Resolution and cost limits for excursion paths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DressOptions {
    /// Longest gap that receives a discretized excursion.
    pub cap: usize,
    /// Recorded points per unit time; must divide `steps_per_unit`.
    pub mesh: usize,
    pub steps_per_unit: usize,
    pub budget: u64,
}

impl Default for DressOptions {
    fn default() -> Self {
        Self { cap: 64, mesh: 8, steps_per_unit: 64, budget: DEFAULT_BUDGET }
    }
}

impl DressOptions {
    pub fn validate(&self) -> Result<()> {
        if self.mesh == 0 || self.steps_per_unit == 0 || self.steps_per_unit % self.mesh != 0 {
            return Err(Error::InvalidParameter(format!(
                "mesh {} must divide steps_per_unit {}",
                self.mesh, self.steps_per_unit
            )));
        }
        if self.budget == 0 {
            return Err(Error::InvalidParameter("excursion budget must be positive".into()));
        }
        Ok(())
    }
}

/// Contacts `τ` (sorted), one flag per gap, and excursions for flagged gaps.
///
/// Gap `i` is `[contacts[i], contacts[i+1])`; a `false` flag means the linear ramp
/// `φ_u = contacts[i+1] − u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DressedPath {
    pub contacts: Vec<i64>,
    pub flags: Vec<bool>,
    pub excursions: Vec<Option<Excursion>>,
    pub mesh: usize,
    pub seed: u64,
}

impl DressedPath {
    /// A path with given flags and no excursion paths.
    pub fn from_parts(contacts: Vec<i64>, flags: Vec<bool>, mesh: usize) -> Result<Self> {
        if contacts.len() < 2 || flags.len() + 1 != contacts.len() {
            return Err(Error::InvalidParameter(format!(
                "{} contacts need {} flags, got {}",
                contacts.len(),
                contacts.len().saturating_sub(1),
                flags.len()
            )));
        }
        if contacts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("contacts must be strictly increasing".into()));
        }
        let excursions = vec![None; flags.len()];
        Ok(Self { contacts, flags, excursions, mesh, seed: 0 })
    }

    pub fn gap_count(&self) -> usize {
        self.flags.len()
    }

    pub fn gap(&self, i: usize) -> (i64, i64) {
        (self.contacts[i], self.contacts[i + 1])
    }

    pub fn contains(&self, t: i64) -> bool {
        self.contacts.binary_search(&t).is_ok()
    }

    /// Index of the gap `[a, b)` containing `t`.
    pub fn gap_index(&self, t: i64) -> Option<usize> {
        let i = self.contacts.partition_point(|&c| c <= t);
        (i >= 1 && i < self.contacts.len()).then(|| i - 1)
    }

    /// `ψ_t`, right-continuous: at a contact it is the flag of the gap starting there.
    pub fn psi_at(&self, t: i64) -> Option<bool> {
        self.gap_index(t).map(|i| self.flags[i])
    }

    /// Samples the excursion of gap `i` if it is flagged, short enough and not yet present.
    /// Returns whether an excursion is available afterwards.
    pub fn ensure_excursion(&mut self, i: usize, opts: &DressOptions, decomposition: &Decomposition) -> bool {
        if self.excursions[i].is_some() {
            return true;
        }
        let (a, b) = self.gap(i);
        let len = (b - a) as usize;
        if !self.flags[i] || len > opts.cap {
            return false;
        }
        let sampler = ExcursionSampler {
            spec: decomposition.hitting.spec,
            steps_per_unit: opts.steps_per_unit,
            budget: opts.budget,
        };
        let seed = seeds::derive_signed(seeds::derive(self.seed, EXCURSION_STREAM), a);
        match sampler.sample(len, opts.mesh, seed) {
            Ok(e) => {
                self.excursions[i] = Some(e);
                true
            }
            Err(_) => false,
        }
    }
}

/// Flags every gap of `tau` with probability `p K^(δ)(n)/K(n)`; the draw for the gap
/// starting at `a` uses its own stream, so flags of distinct gaps are independent.
pub fn dress_flags(tau: &[i64], decomposition: &Decomposition, mesh: usize, seed: u64) -> Result<DressedPath> {
    let flag_seed = seeds::derive(seed, FLAG_STREAM);
    let flags = tau
        .windows(2)
        .map(|w| {
            let n = (w[1] - w[0]) as usize;
            let u: f64 = seeds::rng(seeds::derive_signed(flag_seed, w[0])).random();
            u < decomposition.flag_probability(n)
        })
        .collect();
    let mut path = DressedPath::from_parts(tau.to_vec(), flags, mesh)?;
    path.seed = seed;
    Ok(path)
}

/// Flags plus an excursion for every flagged gap of length at most `opts.cap`.
pub fn dress_path(tau: &[i64], decomposition: &Decomposition, opts: &DressOptions, seed: u64) -> Result<DressedPath> {
    opts.validate()?;
    let mut path = dress_flags(tau, decomposition, opts.mesh, seed)?;
    for i in 0..path.gap_count() {
        path.ensure_excursion(i, opts, decomposition);
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::{decompose_k, discretize_k_delta, BesselSpec};
    use crate::renewal::{Family, RenewalLaw};

    pub(crate) fn decomposition() -> (RenewalLaw, Decomposition) {
        let k = RenewalLaw::power_law(Family::PowerLawConstL, 1.5, 256).unwrap();
        let spec = BesselSpec::for_gap_law(Family::PowerLawConstL, 1.5, 0.25).unwrap();
        let d = decompose_k(&k, &discretize_k_delta(&spec, 256).unwrap()).unwrap();
        (k, d)
    }

    #[test]
    fn lookup_and_psi() {
        let p = DressedPath::from_parts(vec![-3, 0, 4, 5], vec![true, false, true], 4).unwrap();
        assert_eq!(p.gap_index(-3), Some(0));
        assert_eq!(p.gap_index(3), Some(1));
        assert_eq!(p.gap_index(5), None);
        assert_eq!(p.gap_index(-4), None);
        assert_eq!(p.psi_at(0), Some(false));
        assert_eq!(p.psi_at(4), Some(true));
        assert!(p.contains(4) && !p.contains(3));
        assert!(DressedPath::from_parts(vec![0, 1], vec![], 4).is_err());
        assert!(DressedPath::from_parts(vec![1, 1], vec![true], 4).is_err());
    }

    #[test]
    fn zero_p_gives_no_flags() {
        let (k, d) = decomposition();
        let trivial = Decomposition::trivial(&k, d.hitting.clone());
        let tau: Vec<i64> = (0..200).map(|i| i * 2).collect();
        let p = dress_flags(&tau, &trivial, 4, 9).unwrap();
        assert!(p.flags.iter().all(|f| !f));
    }

    #[test]
    fn excursions_only_on_short_flagged_gaps() {
        let (_, d) = decomposition();
        let tau = vec![0, 1, 3, 4, 40, 41, 43];
        let opts = DressOptions { cap: 4, ..DressOptions::default() };
        let p = dress_path(&tau, &d, &opts, 5).unwrap();
        for i in 0..p.gap_count() {
            let (a, b) = p.gap(i);
            let has = p.excursions[i].is_some();
            assert_eq!(has, p.flags[i] && b - a <= 4, "gap {i}");
            if let Some(e) = &p.excursions[i] {
                assert_eq!(e.n as i64, b - a);
            }
        }
    }

    #[test]
    fn flags_of_distinct_gaps_uncorrelated() {
        let (_, d) = decomposition();
        // alternating gaps of lengths 2 and 3
        let mut tau = vec![0i64];
        for i in 0..40_000 {
            let last = *tau.last().unwrap();
            tau.push(last + 2 + (i % 2));
        }
        let p = dress_flags(&tau, &d, 4, 3).unwrap();
        let x: Vec<f64> = p.flags.iter().step_by(2).map(|&f| f as u8 as f64).collect();
        let y: Vec<f64> = p.flags.iter().skip(1).step_by(2).map(|&f| f as u8 as f64).collect();
        let m = x.len().min(y.len());
        let (mx, my) = (x[..m].iter().sum::<f64>() / m as f64, y[..m].iter().sum::<f64>() / m as f64);
        let cov: f64 = (0..m).map(|i| (x[i] - mx) * (y[i] - my)).sum::<f64>() / m as f64;
        let sx = (x[..m].iter().map(|v| (v - mx).powi(2)).sum::<f64>() / m as f64).sqrt();
        let sy = (y[..m].iter().map(|v| (v - my).powi(2)).sum::<f64>() / m as f64).sqrt();
        let corr = cov / (sx * sy);
        assert!(corr.abs() < 3.0 / (m as f64).sqrt(), "corr = {corr}");
        assert!((mx - d.flag_probability(2)).abs() < 3.0 * (mx * (1.0 - mx) / m as f64).sqrt() + 1e-12);
    }
}
