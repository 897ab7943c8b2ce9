use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;

/// Bounded, centered, unit-variance single-site laws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderLaw {
    /// `±1` with probability 1/2 each.
    Rademacher,
    /// Uniform on `[−√3, √3]`.
    UniformSym,
}

impl DisorderLaw {
    pub fn omega_max(self) -> f64 {
        match self {
            DisorderLaw::Rademacher => 1.0,
            DisorderLaw::UniformSym => 3f64.sqrt(),
        }
    }

    fn from_bits(self, bits: u64) -> f64 {
        match self {
            DisorderLaw::Rademacher => {
                if bits >> 63 == 0 {
                    -1.0
                } else {
                    1.0
                }
            }
            DisorderLaw::UniformSym => {
                // 53 random bits → (0, 1), then affine map
                let u = ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
                3f64.sqrt() * (2.0 * u - 1.0)
            }
        }
    }
}

/// Coupling constants of the interaction `(βω_n − h)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinningParams {
    pub beta: f64,
    pub h: f64,
}

impl PinningParams {
    pub fn new(beta: f64, h: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() || !h.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need finite beta ≥ 0 and finite h, got beta={beta}, h={h}"
            )));
        }
        Ok(Self { beta, h })
    }
}

/// IID field `ω_n`, `n ∈ [x, y]`.
///
/// The value at site `n` is a function of `(seed, n)` alone, so fields on
/// nested ranges with the same seed agree on their overlap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderField {
    pub law: DisorderLaw,
    pub range: (i64, i64),
    pub omega: Vec<f64>,
    pub seed: u64,
}

impl DisorderField {
    /// `ω_n` for any site, inside the stored range or not.
    pub fn at(&self, n: i64) -> f64 {
        if n >= self.range.0 && n <= self.range.1 {
            self.omega[(n - self.range.0) as usize]
        } else {
            site_value(self.law, self.seed, n)
        }
    }

    /// The field restricted or extended to another range, same seed.
    pub fn resampled(&self, range: (i64, i64)) -> Result<Self> {
        sample_disorder(self.law, range, self.seed)
    }
}

fn site_value(law: DisorderLaw, seed: u64, n: i64) -> f64 {
    law.from_bits(seeds::derive_signed(seed, n))
}

pub fn sample_disorder(law: DisorderLaw, range: (i64, i64), seed: u64) -> Result<DisorderField> {
    if range.0 > range.1 {
        return Err(Error::InvalidParameter(format!("empty disorder range {range:?}")));
    }
    let omega = (range.0..=range.1).map(|n| site_value(law, seed, n)).collect();
    Ok(DisorderField { law, range, omega, seed })
}
