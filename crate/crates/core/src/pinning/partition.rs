//! Constrained partition functions `Z_{x,y,ω}` by log-domain dynamic programming.

use serde::{Deserialize, Serialize};

use super::disorder::{DisorderField, PinningParams};
use crate::error::{Error, Result};
use crate::renewal::RenewalLaw;

/// Largest window length accepted by the dynamic programs.
pub const MAX_WINDOW: usize = 1 << 20;

/// `ln Z_{a,t}` for `a ≤ t ≤ b`, where `a` is the anchor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionTable {
    pub window: (i64, i64),
    pub anchor: i64,
    /// Entry `i` holds `ln Z_{anchor, anchor + i}`; entry 0 is `ln Z_{a,a} = 0`.
    pub log_z: Vec<f64>,
    pub forbidden: Vec<i64>,
}

impl PartitionTable {
    /// `ln Z_{anchor, t}`.
    pub fn at(&self, t: i64) -> f64 {
        self.log_z[(t - self.anchor) as usize]
    }

    /// `ln Z_{x,y}` for the full window.
    pub fn total(&self) -> f64 {
        *self.log_z.last().expect("table is never empty")
    }
}

/// Site energies and gap weights of one finite window.
///
/// `energy[i] = βω_{x+i} − h` and `log_k[g] = ln K(g)` for `0 < g ≤ y − x`.
#[derive(Clone, Debug)]
pub struct WindowModel {
    pub x: i64,
    pub y: i64,
    pub log_k: Vec<f64>,
    pub energy: Vec<f64>,
}

impl WindowModel {
    pub fn new(k: &RenewalLaw, omega: &DisorderField, params: PinningParams, x: i64, y: i64) -> Result<Self> {
        if x >= y {
            return Err(Error::Domain(format!("window needs x < y, got [{x}, {y}]")));
        }
        if x < omega.range.0 || y > omega.range.1 {
            return Err(Error::Domain(format!(
                "window [{x}, {y}] outside disorder range {:?}",
                omega.range
            )));
        }
        Self::from_sites(k, |n| omega.at(n), params, x, y)
    }

    /// Builds a window from any site field, including sites outside a stored range.
    pub fn from_sites(
        k: &RenewalLaw,
        omega: impl Fn(i64) -> f64,
        params: PinningParams,
        x: i64,
        y: i64,
    ) -> Result<Self> {
        let len = (y - x) as usize;
        if len > MAX_WINDOW {
            return Err(Error::Size { requested: len, limit: MAX_WINDOW });
        }
        let log_k = (0..=len).map(|g| k.ln_pmf(g)).collect();
        let energy = (x..=y).map(|n| params.beta * omega(n) - params.h).collect();
        Ok(Self { x, y, log_k, energy })
    }

    /// Homogeneous window `[0, len]` with every energy equal to `−h`.
    pub fn homogeneous(k: &RenewalLaw, h: f64, len: usize) -> Result<Self> {
        Self::from_sites(k, |_| 0.0, PinningParams { beta: 0.0, h }, 0, len as i64)
    }

    pub fn len(&self) -> usize {
        (self.y - self.x) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn idx(&self, t: i64) -> usize {
        (t - self.x) as usize
    }

    fn allowed_mask(&self, a: i64, b: i64, forbidden: &[i64]) -> Result<Vec<bool>> {
        if a < self.x || b > self.y || a >= b {
            return Err(Error::Domain(format!(
                "segment [{a}, {b}] not inside window [{}, {}]",
                self.x, self.y
            )));
        }
        let mut mask = vec![true; (b - a + 1) as usize];
        for &f in forbidden {
            if f == a || f == b {
                return Err(Error::Domain(format!("forbidden site {f} is a segment endpoint")));
            }
            if f > a && f < b {
                mask[(f - a) as usize] = false;
            }
        }
        Ok(mask)
    }

    /// `ln Z_{a,t}` for `t ∈ [a, b]`, with forbidden sites excluded from `τ`.
    pub fn forward(&self, a: i64, b: i64, forbidden: &[i64]) -> Result<PartitionTable> {
        let mask = self.allowed_mask(a, b, forbidden)?;
        let off = self.idx(a);
        let n = mask.len();
        let mut z = vec![f64::NEG_INFINITY; n];
        z[0] = 0.0;
        for t in 1..n {
            if !mask[t] {
                continue;
            }
            z[t] = self.energy[off + t] + lse_conv(&z[..t], &self.log_k, t);
        }
        let mut forbidden: Vec<i64> = forbidden.iter().copied().filter(|&f| f > a && f < b).collect();
        forbidden.sort_unstable();
        Ok(PartitionTable { window: (a, b), anchor: a, log_z: z, forbidden })
    }

    /// `ln Z_{t,b}` for `t ∈ [a, b]` (entry `i` is `t = a + i`).
    pub fn backward(&self, a: i64, b: i64, forbidden: &[i64]) -> Result<Vec<f64>> {
        let mask = self.allowed_mask(a, b, forbidden)?;
        let off = self.idx(a);
        let n = mask.len();
        // w[t] = energy(t) + ln Z_{t,b}, the weight of entering t from the left
        let mut w = vec![f64::NEG_INFINITY; n];
        let mut z = vec![f64::NEG_INFINITY; n];
        z[n - 1] = 0.0;
        w[n - 1] = self.energy[off + n - 1];
        for s in (0..n - 1).rev() {
            if !mask[s] {
                continue;
            }
            let ahead = &w[s + 1..];
            let mut m = f64::NEG_INFINITY;
            for (g, &v) in ahead.iter().enumerate() {
                m = m.max(v + self.log_k[g + 1]);
            }
            let mut sum = 0.0;
            for (g, &v) in ahead.iter().enumerate() {
                sum += (v + self.log_k[g + 1] - m).exp();
            }
            z[s] = m + sum.ln();
            w[s] = self.energy[off + s] + z[s];
        }
        Ok(z)
    }

    /// `ln Z_{a,b}` with forbidden sites.
    pub fn log_z(&self, a: i64, b: i64, forbidden: &[i64]) -> Result<f64> {
        Ok(self.forward(a, b, forbidden)?.total())
    }

    /// Probability under `P_{x,y,ω}` that `τ` contains every `(site, true)`
    /// and avoids every `(site, false)` of the pattern.
    pub fn pattern_probability(&self, pattern: &[(i64, bool)]) -> Result<f64> {
        for &(s, _) in pattern {
            if s <= self.x || s >= self.y {
                return Err(Error::Domain(format!(
                    "pattern site {s} not strictly inside ({}, {})",
                    self.x, self.y
                )));
            }
        }
        let mut ins: Vec<i64> = pattern.iter().filter(|p| p.1).map(|p| p.0).collect();
        let outs: Vec<i64> = pattern.iter().filter(|p| !p.1).map(|p| p.0).collect();
        if ins.iter().any(|s| outs.contains(s)) {
            return Ok(0.0);
        }
        ins.sort_unstable();
        ins.dedup();
        let mut anchors = vec![self.x];
        anchors.extend(ins);
        anchors.push(self.y);
        let mut log_num = 0.0;
        for pair in anchors.windows(2) {
            log_num += self.log_z(pair[0], pair[1], &outs)?;
        }
        let log_den = self.log_z(self.x, self.y, &[])?;
        Ok((log_num - log_den).exp())
    }
}

/// `ln Σ_{s<t} exp(z[s] + log_k[t − s])` by two passes.
#[inline]
pub(crate) fn lse_conv(z: &[f64], log_k: &[f64], t: usize) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for (s, &zs) in z.iter().enumerate() {
        m = m.max(zs + log_k[t - s]);
    }
    let mut sum = 0.0;
    for (s, &zs) in z.iter().enumerate() {
        sum += (zs + log_k[t - s] - m).exp();
    }
    m + sum.ln()
}

/// Forward table `ln Z_{x,t,ω}` for `x ≤ t ≤ y`.
pub fn log_partition(
    k: &RenewalLaw,
    omega: &DisorderField,
    params: PinningParams,
    x: i64,
    y: i64,
    forbidden: Option<&[i64]>,
) -> Result<PartitionTable> {
    WindowModel::new(k, omega, params, x, y)?.forward(x, y, forbidden.unwrap_or(&[]))
}

/// Unique `F ≥ 0` with `Σ K(n) e^{−Fn} = e^h` (zero for `h ≥ 0`).
pub fn homogeneous_free_energy(k: &RenewalLaw, h: f64) -> Result<f64> {
    if !h.is_finite() {
        return Err(Error::InvalidParameter(format!("h must be finite, got {h}")));
    }
    if h >= 0.0 {
        return Ok(0.0);
    }
    let target = h.exp();
    let (mut lo, mut hi) = (0.0, -h);
    while hi - lo > 1e-14 * hi.max(1e-300) && hi - lo > 1e-300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if k.laplace(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
