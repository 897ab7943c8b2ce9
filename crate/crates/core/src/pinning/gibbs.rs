//! Single-site marginals and exact sampling of the constrained Gibbs measure.

use rand::Rng;

use super::partition::WindowModel;
use crate::error::{Error, Result};
use crate::seeds;

/// A window with forward (`ln Z_{x,t}`) and backward (`ln Z_{t,y}`) tables.
#[derive(Clone, Debug)]
pub struct GibbsWindow {
    pub model: WindowModel,
    pub fwd: Vec<f64>,
    pub bwd: Vec<f64>,
}

impl GibbsWindow {
    pub fn new(model: WindowModel) -> Result<Self> {
        let fwd = model.forward(model.x, model.y, &[])?.log_z;
        let bwd = model.backward(model.x, model.y, &[])?;
        Ok(Self { model, fwd, bwd })
    }

    pub fn window(&self) -> (i64, i64) {
        (self.model.x, self.model.y)
    }

    /// `ln Z_{x,y}`.
    pub fn log_z(&self) -> f64 {
        *self.fwd.last().expect("nonempty")
    }

    /// `P_{x,y,ω}(t ∈ τ) = Z_{x,t} Z_{t,y} / Z_{x,y}`.
    pub fn site_probability(&self, t: i64) -> Result<f64> {
        let (x, y) = self.window();
        if t < x || t > y {
            return Err(Error::Domain(format!("site {t} outside window [{x}, {y}]")));
        }
        let i = (t - x) as usize;
        Ok((self.fwd[i] + self.bwd[i] - self.log_z()).exp())
    }

    /// One exact draw of `τ ∩ [x, y]`, endpoints included.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<i64> {
        let m = &self.model;
        let n = m.len();
        let mut tau = vec![m.x];
        let mut s = 0usize;
        while s < n {
            let u: f64 = rng.random();
            let base = self.bwd[s];
            let mut acc = 0.0;
            let mut next = n;
            for t in s + 1..=n {
                let lw = m.log_k[t - s] + m.energy[t] + self.bwd[t] - base;
                if lw == f64::NEG_INFINITY {
                    continue;
                }
                acc += lw.exp();
                if u < acc {
                    next = t;
                    break;
                }
            }
            tau.push(m.x + next as i64);
            s = next;
        }
        tau
    }
}

/// `count` independent exact samples; sample `i` uses the stream `derive(seed, i)`.
pub fn sample_gibbs(window: &GibbsWindow, seed: u64, count: usize) -> Vec<Vec<i64>> {
    (0..count)
        .map(|i| window.sample(&mut seeds::rng(seeds::derive(seed, i as u64))))
        .collect()
}

/// Mean of the single-site marginals over the interior `x < k < y`.
pub fn contact_fraction(window: &GibbsWindow) -> f64 {
    let (x, y) = window.window();
    if y - x < 2 {
        return 0.0;
    }
    let s: f64 = (x + 1..y).map(|k| window.site_probability(k).expect("interior site")).sum();
    s / (y - x - 1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pinning::disorder::{sample_disorder, DisorderLaw, PinningParams};
    use crate::pinning::partition::homogeneous_free_energy;
    use crate::renewal::{renewal_mass, Family, RenewalLaw};

    fn law() -> RenewalLaw {
        RenewalLaw::power_law(Family::PowerLawConstL, 1.5, 128).unwrap()
    }

    #[test]
    fn endpoints_and_marginals() {
        let om = sample_disorder(DisorderLaw::UniformSym, (0, 20), 17).unwrap();
        let m = WindowModel::new(&law(), &om, PinningParams::new(1.0, -0.3).unwrap(), 0, 20).unwrap();
        let g = GibbsWindow::new(m.clone()).unwrap();
        let n = 100_000;
        let samples = sample_gibbs(&g, 5, n);
        let mut counts = [0u64; 21];
        for tau in &samples {
            assert_eq!(tau.first(), Some(&0));
            assert_eq!(tau.last(), Some(&20));
            assert!(tau.windows(2).all(|w| w[0] < w[1]));
            for &t in tau {
                counts[t as usize] += 1;
            }
        }
        for t in 1..20 {
            let p = g.site_probability(t).unwrap();
            let exact = m.pattern_probability(&[(t, true)]).unwrap();
            assert!((p - exact).abs() < 1e-12);
            let se = (p * (1.0 - p) / n as f64).sqrt();
            let emp = counts[t as usize] as f64 / n as f64;
            assert!((emp - p).abs() < 3.0 * se + 1e-9, "site {t}: {emp} vs {p}");
        }
    }

    #[test]
    fn free_first_gap_law() {
        let k = law();
        let len = 12usize;
        let g = GibbsWindow::new(WindowModel::homogeneous(&k, 0.0, len).unwrap()).unwrap();
        let u = renewal_mass(&k, len).unwrap();
        let n = 100_000;
        let mut hist = vec![0u64; len + 1];
        for tau in sample_gibbs(&g, 9, n) {
            hist[tau[1] as usize] += 1;
        }
        for gap in 1..=len {
            let p = k.pmf(gap) * u.u[len - gap] / u.u[len];
            let se = (p * (1.0 - p) / n as f64).sqrt();
            let emp = hist[gap] as f64 / n as f64;
            assert!((emp - p).abs() < 3.0 * se + 1e-9, "gap {gap}: {emp} vs {p}");
        }
    }

    #[test]
    fn contact_fraction_extremes() {
        let k = law();
        let g = GibbsWindow::new(WindowModel::homogeneous(&k, -30.0, 50).unwrap()).unwrap();
        assert!(contact_fraction(&g) > 0.999_999);
        let mean: f64 = (1..50).map(|t| g.site_probability(t).unwrap()).sum::<f64>() / 49.0;
        assert_eq!(contact_fraction(&g), mean);
    }

    #[test]
    fn contact_fraction_is_free_energy_derivative() {
        let k = law();
        let h = -0.4;
        let d = 1e-3;
        let slope = -(homogeneous_free_energy(&k, h + d).unwrap() - homogeneous_free_energy(&k, h - d).unwrap()) / (2.0 * d);
        let g = GibbsWindow::new(WindowModel::homogeneous(&k, h, 4000).unwrap()).unwrap();
        let frac = contact_fraction(&g);
        assert!((frac - slope).abs() < 1e-2, "{frac} vs {slope}");
    }
}
