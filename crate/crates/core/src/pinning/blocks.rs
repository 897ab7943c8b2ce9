//! Disorder-dependent blocks: `i_j` is the first `t` with `ln Z_{i_{j−1},t} ≥ c|ln F|`.

use serde::{Deserialize, Serialize};

use super::partition::{lse_conv, WindowModel};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaBlocks {
    /// `i_0 = 0 < i_1 < … < i_M ≤ k`.
    pub cuts: Vec<i64>,
    /// Number of complete blocks `M(ω)`.
    pub m: usize,
    pub c: f64,
    pub threshold: f64,
    pub k: i64,
}

impl OmegaBlocks {
    pub fn lengths(&self) -> Vec<i64> {
        self.cuts.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// First `t ∈ (a, b]` with `ln Z_{a,t} ≥ threshold`, by an incremental forward pass.
fn first_crossing(model: &WindowModel, a: i64, b: i64, threshold: f64) -> Option<i64> {
    let off = (a - model.x) as usize;
    let n = (b - a) as usize;
    let mut z = Vec::with_capacity(n + 1);
    z.push(0.0);
    for t in 1..=n {
        let v = model.energy[off + t] + lse_conv(&z, &model.log_k, t);
        if v >= threshold {
            return Some(a + t as i64);
        }
        z.push(v);
    }
    None
}

/// Greedy block partition of `[0, k]`; the model window must cover `[0, k]`.
pub fn omega_blocks(model: &WindowModel, free_energy: f64, c: f64, k: i64) -> Result<OmegaBlocks> {
    if !(free_energy > 0.0) {
        return Err(Error::Phase(format!("blocks need F > 0, got {free_energy}")));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("block constant c must be positive, got {c}")));
    }
    if model.x > 0 || model.y < k || k <= 0 {
        return Err(Error::Domain(format!(
            "window [{}, {}] does not cover [0, {k}]",
            model.x, model.y
        )));
    }
    let threshold = c * free_energy.ln().abs();
    let mut cuts = vec![0];
    let mut at = 0;
    while at < k {
        match first_crossing(model, at, k, threshold) {
            Some(t) => {
                cuts.push(t);
                at = t;
            }
            None => break,
        }
    }
    Ok(OmegaBlocks { m: cuts.len() - 1, cuts, c, threshold, k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pinning::disorder::{sample_disorder, DisorderLaw, PinningParams};
    use crate::pinning::partition::homogeneous_free_energy;
    use crate::renewal::{Family, RenewalLaw};

    #[test]
    fn greedy_cuts_are_first_crossings() {
        let k = RenewalLaw::power_law(Family::PowerLawConstL, 1.5, 128).unwrap();
        let om = sample_disorder(DisorderLaw::UniformSym, (0, 600), 2).unwrap();
        let m = WindowModel::new(&k, &om, PinningParams::new(1.0, -0.4).unwrap(), 0, 600).unwrap();
        let b = omega_blocks(&m, 0.05, 2.0, 600).unwrap();
        assert!(b.m >= 1);
        for w in b.cuts.windows(2) {
            let t = m.forward(w[0], w[1], &[]).unwrap();
            assert!(t.total() >= b.threshold);
            for s in w[0] + 1..w[1] {
                assert!(t.at(s) < b.threshold);
            }
        }
        assert!(*b.cuts.last().unwrap() <= 600);
        assert!(omega_blocks(&m, 0.0, 2.0, 600).is_err());
    }

    #[test]
    fn homogeneous_block_lengths() {
        let k = RenewalLaw::power_law(Family::PowerLawConstL, 1.5, 128).unwrap();
        let h = -0.4;
        let f = homogeneous_free_energy(&k, h).unwrap();
        let c = 4.0;
        let len = 2000;
        let m = WindowModel::homogeneous(&k, h, len).unwrap();
        let b = omega_blocks(&m, f, c, len as i64).unwrap();
        let scale = c * f.ln().abs() / f;
        for l in b.lengths() {
            let l = l as f64;
            assert!(l > scale / 2.0 && l < 2.0 * scale, "{l} vs {scale}");
        }
        assert!(b.m as f64 >= len as f64 * f / (2.0 * c * f.ln().abs()));
    }
}
