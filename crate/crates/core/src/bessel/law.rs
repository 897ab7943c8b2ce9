//! The discretized hitting law `K^(δ)(n) = P̂(T ∈ (n−1, n])` and the
//! decomposition `K = p K^(δ) + (1 − p) K̂` of a gap law against it.

use serde::{Deserialize, Serialize};

use super::density::{hitting_survival, hitting_unit_mass, BesselSpec};
use crate::error::{Error, Result};
use crate::renewal::{PowerTerm, RenewalLaw};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingLaw {
    pub spec: BesselSpec,
    /// `k_delta[n − 1] = K^(δ)(n)` for `1 ≤ n ≤ N_max`.
    pub k_delta: Vec<f64>,
    /// `P̂(T > N_max)`, computed independently of the table.
    pub tail_mass: f64,
    /// `C` with `Σ_{n > N_max} C n^{−δ/2} = tail_mass`; extends the law past the table.
    pub tail_scale: f64,
    /// `|Σ K^(δ) + tail_mass − 1|`.
    pub normalization_residual: f64,
}

impl HittingLaw {
    pub fn n_max(&self) -> usize {
        self.k_delta.len()
    }

    /// `K^(δ)(n)` for any `n ≥ 1`, using the `n^{−δ/2}` extension past the table.
    pub fn pmf(&self, n: usize) -> f64 {
        match n {
            0 => 0.0,
            n if n <= self.n_max() => self.k_delta[n - 1],
            n => self.tail_scale * (n as f64).powf(-self.spec.delta / 2.0),
        }
    }

    /// `n^{δ/2} K^(δ)(n)` over the table.
    pub fn plateau(&self) -> Vec<f64> {
        let e = self.spec.delta / 2.0;
        self.k_delta.iter().enumerate().map(|(i, k)| k * ((i + 1) as f64).powf(e)).collect()
    }

    /// `max/min − 1` of the plateau over `[N_max/2, N_max]`.
    pub fn plateau_variation(&self) -> f64 {
        let pl = self.plateau();
        let upper = &pl[self.n_max() / 2 - 1..];
        let hi = upper.iter().cloned().fold(f64::MIN, f64::max);
        let lo = upper.iter().cloned().fold(f64::MAX, f64::min);
        hi / lo - 1.0
    }
}

pub fn discretize_k_delta(spec: &BesselSpec, n_max: usize) -> Result<HittingLaw> {
    if n_max < 2 {
        return Err(Error::InvalidParameter(format!("N_max must be at least 2, got {n_max}")));
    }
    let k_delta = (1..=n_max).map(|n| hitting_unit_mass(spec, n)).collect::<Result<Vec<f64>>>()?;
    let tail_mass = hitting_survival(spec, n_max as f64)?;
    let unit = PowerTerm { a: 1.0, b: 0.0, s: spec.delta / 2.0, rate: 0.0 }.tail_sum(n_max + 1)?;
    let total: f64 = k_delta.iter().sum::<f64>() + tail_mass;
    Ok(HittingLaw {
        spec: *spec,
        tail_scale: tail_mass / unit,
        normalization_residual: (total - 1.0).abs(),
        k_delta,
        tail_mass,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub p: f64,
    pub k_hat: RenewalLaw,
    /// Gap length attaining the minimal ratio `K(n)/K^(δ)(n)`.
    pub argmin: usize,
    pub hitting: HittingLaw,
    /// `|K(n) − p K^(δ)(n) − (1 − p) K̂(n)|` maximized over the table.
    pub reconstruction_error: f64,
    /// Difference between the deduced and the analytic tail mass of `K̂`.
    pub normalization_residual: f64,
    /// Flag probabilities `p K^(δ)(n) / K(n)` for `1 ≤ n ≤ N_max` (index `n − 1`).
    flag: Vec<f64>,
    k_extension: RenewalLaw,
}

impl Decomposition {
    /// `p K^(δ)(n) / K(n)`, the probability that a gap of length `n` carries an excursion.
    pub fn flag_probability(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        if n <= self.flag.len() {
            return self.flag[n - 1];
        }
        (self.p * self.hitting.pmf(n) / self.k_extension.pmf(n)).min(1.0)
    }

    /// A degenerate decomposition with `p = 0` (no excursions).
    pub fn trivial(k: &RenewalLaw, hitting: HittingLaw) -> Self {
        Self {
            p: 0.0,
            k_hat: k.clone(),
            argmin: 0,
            reconstruction_error: 0.0,
            normalization_residual: 0.0,
            flag: vec![0.0; hitting.n_max()],
            hitting,
            k_extension: k.clone(),
        }
    }
}

/// Largest `p ≤ 1` with `K − p K^(δ) ≥ 0`, over the table and the extended tail.
pub fn decompose_k(k: &RenewalLaw, hitting: &HittingLaw) -> Result<Decomposition> {
    let n_max = hitting.n_max();
    if k.n_max() != n_max {
        return Err(Error::InvalidParameter(format!(
            "gap law has N_max = {}, hitting law has {}",
            k.n_max(),
            n_max
        )));
    }
    let mut p = 1.0f64;
    let mut argmin = 0;
    for n in 1..=n_max {
        let r = k.pmf(n) / hitting.pmf(n);
        if r < p {
            p = r;
            argmin = n;
        }
    }
    // the extension ratio is monotone for the implemented families; probe it geometrically
    let mut n = n_max + 1;
    while n < n_max << 20 {
        let r = k.pmf(n) / hitting.pmf(n);
        if r < p {
            p = r;
            argmin = n;
        }
        n *= 2;
    }
    if !(p > 0.0) {
        return Err(Error::Decomposition(format!("ratio K/K^(δ) degenerates (p = {p})")));
    }
    if p >= 1.0 {
        return Err(Error::Decomposition("K coincides with K^(δ); K̂ is undefined".into()));
    }
    let mut hat = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let kn = k.pmf(n);
        let v = (kn - p * hitting.pmf(n)) / (1.0 - p);
        if v < -1e-14 * kn {
            return Err(Error::Decomposition(format!("K̂({n}) = {v:.3e} < 0")));
        }
        hat.push(v.max(0.0));
    }
    let stored: f64 = hat.iter().sum();
    let analytic_tail = (k.tail_mass() - p * hitting.tail_mass) / (1.0 - p);
    let tail = (1.0 - stored).max(0.0);
    let reconstruction_error = (1..=n_max)
        .map(|n| (k.pmf(n) - p * hitting.pmf(n) - (1.0 - p) * hat[n - 1]).abs())
        .fold(0.0, f64::max);
    let flag = (1..=n_max).map(|n| (p * hitting.pmf(n) / k.pmf(n)).min(1.0)).collect();
    Ok(Decomposition {
        p,
        k_hat: RenewalLaw::tabulated(&hat, tail)?,
        argmin,
        hitting: hitting.clone(),
        reconstruction_error,
        normalization_residual: (tail - analytic_tail).abs(),
        flag,
        k_extension: k.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renewal::Family;

    #[test]
    fn small_table_properties() {
        let spec = BesselSpec::new(3.5).unwrap();
        let h = discretize_k_delta(&spec, 64).unwrap();
        assert!(h.k_delta.iter().all(|&k| k >= 0.0));
        assert!(h.normalization_residual < 1e-8, "{}", h.normalization_residual);
        assert!(h.pmf(65) > 0.0 && h.pmf(65) < h.pmf(64));
    }

    #[test]
    fn decomposition_identity() {
        let spec = BesselSpec::for_gap_law(Family::PowerLawConstL, 1.5, 0.25).unwrap();
        let h = discretize_k_delta(&spec, 64).unwrap();
        let k = RenewalLaw::power_law(Family::PowerLawConstL, 1.5, 64).unwrap();
        let d = decompose_k(&k, &h).unwrap();
        assert!(d.p > 0.0 && d.p < 1.0);
        let min_ratio = (1..=64).map(|n| k.pmf(n) / h.pmf(n)).fold(f64::INFINITY, f64::min);
        assert_eq!(d.p, min_ratio);
        assert!(d.k_hat.mass().iter().all(|&v| v >= 0.0));
        assert!(d.reconstruction_error < 1e-12);
        assert!(d.normalization_residual < 1e-8);
        for n in 1..200 {
            let f = d.flag_probability(n);
            assert!((0.0..=1.0).contains(&f));
        }
        let t = Decomposition::trivial(&k, h);
        assert_eq!(t.flag_probability(3), 0.0);
    }

    #[test]
    fn mismatched_tables_rejected() {
        let spec = BesselSpec::new(3.5).unwrap();
        let h = discretize_k_delta(&spec, 16).unwrap();
        let k = RenewalLaw::power_law(Family::PowerLawConstL, 1.5, 32).unwrap();
        assert!(decompose_k(&k, &h).is_err());
    }
}
