//! Renewal gap laws and renewal mass sequences.
//!
//! A [`RenewalLaw`] is a probability on the positive integers. Power-law
//! families are `K(n) = C·L(n)·n^{-α}` with `L ≡ 1` or `L(n) = 1 + ln n`; their
//! tails beyond the stored range are summed by Euler–Maclaurin, so `p(n)` is
//! available for every `n` and the stored `tail_mass` is exact to rounding.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{fit_line, integrate_panels, QuadOptions};

/// Largest renewal index accepted by [`renewal_mass`].
pub const MAX_RENEWAL_INDEX: usize = 1 << 22;

/// Points with `|u(n) - u_inf|` at or below this value are ignored by decay fits.
pub const DECAY_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    PowerLawConstL,
    PowerLawLogL,
    Geometric,
    ExplicitFinite,
}

/// Exponential tilt `p(n) = K(n)·e^{-h-Fn}` applied to a power-law family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tilt {
    #[serde(rename = "F")]
    pub free_energy: f64,
    pub h: f64,
}

/// `f(x) = (a + b ln x)·x^{-s}·e^{-rate·x}`, the general summand of every
/// power-law series in this module.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PowerTerm {
    pub a: f64,
    pub b: f64,
    pub s: f64,
    pub rate: f64,
}

const EM_START: usize = 64;

impl PowerTerm {
    pub fn eval(&self, x: f64) -> f64 {
        (self.a + self.b * x.ln()) * x.powf(-self.s) * (-self.rate * x).exp()
    }

    /// Derivatives `f^{(0..=5)}(x)`.
    fn derivatives(&self, x: f64) -> [f64; 6] {
        // g^{(j)}(x) = (a_j + b_j ln x) x^{-s-j} for g = (a + b ln x) x^{-s}
        let mut g = [0.0; 6];
        let (mut aj, mut bj) = (self.a, self.b);
        let lx = x.ln();
        for (j, gj) in g.iter_mut().enumerate() {
            let sj = self.s + j as f64;
            *gj = (aj + bj * lx) * x.powf(-sj);
            let next_a = bj - sj * aj;
            bj *= -sj;
            aj = next_a;
        }
        let e = (-self.rate * x).exp();
        let mut out = [0.0; 6];
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            let mut binom = 1.0;
            for (j, gj) in g.iter().enumerate().take(k + 1) {
                acc += binom * gj * (-self.rate).powi((k - j) as i32);
                binom *= (k - j) as f64 / (j + 1) as f64;
            }
            *o = acc * e;
        }
        out
    }

    /// `∫_m^∞ f(x) dx`.
    fn integral_from(&self, m: f64) -> Result<f64> {
        if self.rate == 0.0 {
            if self.s <= 1.0 {
                return Ok(f64::INFINITY);
            }
            let s1 = self.s - 1.0;
            return Ok(m.powf(-s1) * ((self.a + self.b * m.ln()) / s1 + self.b / (s1 * s1)));
        }
        let mut breaks = vec![m];
        let mut x = m;
        while breaks.len() < 2 || (self.rate * x < 80.0 && breaks.len() < 1100) {
            x *= 2.0;
            breaks.push(x);
        }
        let opts = QuadOptions {
            abs_tol: 1e-300,
            rel_tol: 1e-13,
            max_intervals: 20_000,
        };
        Ok(integrate_panels(|t| self.eval(t), &breaks, opts)?.value)
    }

    /// `Σ_{n ≥ m} f(n)`; infinite when the series diverges.
    pub fn tail_sum(&self, m: usize) -> Result<f64> {
        let start = m.max(EM_START);
        let mut direct = 0.0;
        for n in m..start {
            direct += self.eval(n as f64);
        }
        let integral = self.integral_from(start as f64)?;
        if !integral.is_finite() {
            return Ok(f64::INFINITY);
        }
        let d = self.derivatives(start as f64);
        let em = integral + 0.5 * d[0] - d[1] / 12.0 + d[3] / 720.0 - d[5] / 30240.0;
        Ok(direct + em)
    }

    /// `Σ_{n ≥ 1} f(n)`.
    pub fn full_sum(&self) -> Result<f64> {
        self.tail_sum(1)
    }
}

/// Exponential-moment abscissa: a finite value or `+∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Abscissa {
    Finite(f64),
    Unbounded,
}

/// A law on `{1, 2, …}` with tabulated mass on `1..=N_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct RenewalLaw {
    family: Family,
    alpha: f64,
    c: f64,
    /// `mass[n] = p(n)` for `1 ≤ n ≤ N_max`; `mass[0] = 0`.
    mass: Vec<f64>,
    tail_mass: f64,
    /// Normalizing constant `C` of a power-law family.
    norm: f64,
    tilt: Option<Tilt>,
}

/// JSON form `{family, alpha, c, N_max, mass?, tilt?}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawSpec {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(rename = "N_max")]
    pub n_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tilt: Option<Tilt>,
}

fn log_l(family: Family) -> (f64, f64) {
    match family {
        Family::PowerLawLogL => (1.0, 1.0),
        _ => (1.0, 0.0),
    }
}

impl RenewalLaw {
    /// `K(n) = C n^{-α}` (`L ≡ 1`) or `K(n) = C (1 + ln n) n^{-α}`.
    pub fn power_law(family: Family, alpha: f64, n_max: usize) -> Result<Self> {
        if !matches!(family, Family::PowerLawConstL | Family::PowerLawLogL) {
            return Err(Error::InvalidParameter(format!("{family:?} is not a power-law family")));
        }
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "power-law exponent must exceed 1 for a normalizable law, got {alpha}"
            )));
        }
        check_n_max(n_max)?;
        let (a, b) = log_l(family);
        let term = PowerTerm { a, b, s: alpha, rate: 0.0 };
        let norm = 1.0 / term.full_sum()?;
        let mut mass = vec![0.0; n_max + 1];
        for (n, m) in mass.iter_mut().enumerate().skip(1) {
            *m = norm * term.eval(n as f64);
        }
        let tail_mass = norm * term.tail_sum(n_max + 1)?;
        Ok(Self { family, alpha, c: 0.0, mass, tail_mass, norm, tilt: None })
    }

    /// Normalized geometric law `p(n) = e^{-nc}(e^c - 1)`.
    pub fn geometric(c: f64, n_max: usize) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("geometric rate must be positive, got {c}")));
        }
        check_n_max(n_max)?;
        let mut mass = vec![0.0; n_max + 1];
        let front = c.exp_m1();
        for (n, m) in mass.iter_mut().enumerate().skip(1) {
            *m = (-(n as f64) * c).exp() * front;
        }
        let tail_mass = (-(n_max as f64) * c).exp();
        Ok(Self { family: Family::Geometric, alpha: 0.0, c, mass, tail_mass, norm: 1.0, tilt: None })
    }

    /// Law with finite support given by `probs[i] = p(i + 1)`.
    pub fn explicit(probs: &[f64]) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter("explicit law needs at least one mass".into()));
        }
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidParameter("explicit masses must be finite and nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("explicit masses sum to {total}, not 1")));
        }
        let mut mass = vec![0.0; probs.len() + 1];
        mass[1..].copy_from_slice(probs);
        Ok(Self {
            family: Family::ExplicitFinite,
            alpha: 0.0,
            c: 0.0,
            mass,
            tail_mass: 0.0,
            norm: 1.0,
            tilt: None,
        })
    }

    /// Tabulated masses `probs[i] = p(i + 1)` plus an unlocated `tail_mass`
    /// beyond the table; `p(n) = 0` is reported past the table.
    pub fn tabulated(probs: &[f64], tail_mass: f64) -> Result<Self> {
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) || !(tail_mass >= 0.0) {
            return Err(Error::InvalidParameter("tabulated masses must be finite and nonnegative".into()));
        }
        let total: f64 = probs.iter().sum::<f64>() + tail_mass;
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("tabulated law has total mass {total}")));
        }
        let mut law = Self::explicit(&[1.0])?;
        law.mass = std::iter::once(0.0).chain(probs.iter().copied()).collect();
        law.tail_mass = tail_mass;
        Ok(law)
    }

    pub fn from_spec(spec: &LawSpec) -> Result<Self> {
        let law = match spec.family {
            Family::PowerLawConstL | Family::PowerLawLogL => {
                let alpha = spec
                    .alpha
                    .ok_or_else(|| Error::InvalidParameter("power-law family requires alpha".into()))?;
                Self::power_law(spec.family, alpha, spec.n_max)?
            }
            Family::Geometric => {
                let c = spec.c.ok_or_else(|| Error::InvalidParameter("geometric family requires c".into()))?;
                Self::geometric(c, spec.n_max)?
            }
            Family::ExplicitFinite => {
                let mass = spec
                    .mass
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameter("explicit family requires mass".into()))?;
                Self::explicit(mass)?
            }
        };
        match spec.tilt {
            Some(t) => tilt_law(&law, t.free_energy, t.h),
            None => Ok(law),
        }
    }

    pub fn to_spec(&self) -> LawSpec {
        let base_alpha = matches!(self.family, Family::PowerLawConstL | Family::PowerLawLogL);
        LawSpec {
            family: self.family,
            alpha: base_alpha.then_some(self.alpha),
            c: (self.family == Family::Geometric).then_some(self.c),
            n_max: self.n_max(),
            mass: (self.family == Family::ExplicitFinite).then(|| self.mass[1..].to_vec()),
            tilt: self.tilt,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn tilt(&self) -> Option<Tilt> {
        self.tilt
    }

    pub fn n_max(&self) -> usize {
        self.mass.len() - 1
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Stored masses `p(1..=N_max)`.
    pub fn mass(&self) -> &[f64] {
        &self.mass[1..]
    }

    fn power_term(&self) -> PowerTerm {
        let (a, b) = log_l(self.family);
        let rate = self.tilt.map_or(0.0, |t| t.free_energy);
        PowerTerm { a, b, s: self.alpha, rate }
    }

    fn power_prefactor(&self) -> f64 {
        self.norm * self.tilt.map_or(1.0, |t| (-t.h).exp())
    }

    /// `p(n)` for any `n ≥ 1`, using the analytic extension beyond `N_max`.
    pub fn pmf(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        if n < self.mass.len() {
            return self.mass[n];
        }
        match self.family {
            Family::PowerLawConstL | Family::PowerLawLogL => self.power_prefactor() * self.power_term().eval(n as f64),
            Family::Geometric => (-(n as f64) * self.c).exp() * self.c.exp_m1(),
            Family::ExplicitFinite => 0.0,
        }
    }

    /// `ln p(n)` for any `n ≥ 1`, accurate where `p(n)` underflows.
    pub fn ln_pmf(&self, n: usize) -> f64 {
        if n == 0 {
            return f64::NEG_INFINITY;
        }
        match self.family {
            Family::PowerLawConstL | Family::PowerLawLogL => {
                let x = n as f64;
                let (a, b) = log_l(self.family);
                let (rate, h) = self.tilt.map_or((0.0, 0.0), |t| (t.free_energy, t.h));
                self.norm.ln() + (a + b * x.ln()).ln() - self.alpha * x.ln() - h - rate * x
            }
            Family::Geometric => -(n as f64) * self.c + self.c.exp_m1().ln(),
            Family::ExplicitFinite => self.pmf(n).ln(),
        }
    }

    /// `p(0..=n)` with the analytic extension; entry 0 is 0.
    pub fn table(&self, n: usize) -> Vec<f64> {
        (0..=n).map(|k| self.pmf(k)).collect()
    }

    /// `Σ_{n>m} p(n)`.
    pub fn tail_beyond(&self, m: usize) -> Result<f64> {
        if m >= self.n_max() {
            return match self.family {
                Family::PowerLawConstL | Family::PowerLawLogL => {
                    Ok(self.power_prefactor() * self.power_term().tail_sum(m + 1)?)
                }
                Family::Geometric => Ok((-(m as f64) * self.c).exp()),
                Family::ExplicitFinite => Ok(0.0),
            };
        }
        let stored: f64 = self.mass[m + 1..].iter().sum();
        Ok(stored + self.tail_mass)
    }

    /// `Σ_n p(n) e^{-zn}` for `z ≥ 0`.
    pub fn laplace(&self, z: f64) -> Result<f64> {
        match self.family {
            Family::PowerLawConstL | Family::PowerLawLogL => {
                let mut term = self.power_term();
                term.rate += z;
                Ok(self.power_prefactor() * term.full_sum()?)
            }
            Family::Geometric => Ok(self.c.exp_m1() / (self.c + z).exp_m1()),
            Family::ExplicitFinite => Ok(self
                .mass
                .iter()
                .enumerate()
                .map(|(n, p)| p * (-(n as f64) * z).exp())
                .sum()),
        }
    }

    /// Mean gap length, `+∞` when it diverges.
    pub fn mean(&self) -> Result<f64> {
        match self.family {
            Family::PowerLawConstL | Family::PowerLawLogL => {
                let mut term = self.power_term();
                term.s -= 1.0;
                if term.rate == 0.0 && term.s <= 1.0 {
                    return Ok(f64::INFINITY);
                }
                Ok(self.power_prefactor() * term.full_sum()?)
            }
            Family::Geometric => Ok(1.0 / (-self.c).exp_m1().abs()),
            Family::ExplicitFinite => Ok(self.mass.iter().enumerate().map(|(n, p)| n as f64 * p).sum()),
        }
    }

    /// `|Σ_{n≤N_max} p(n) + tail_mass − 1|`.
    pub fn normalization_residual(&self) -> f64 {
        (self.mass.iter().sum::<f64>() + self.tail_mass - 1.0).abs()
    }
}

fn check_n_max(n_max: usize) -> Result<()> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("N_max must be positive".into()));
    }
    if n_max > MAX_RENEWAL_INDEX {
        return Err(Error::Size { requested: n_max, limit: MAX_RENEWAL_INDEX });
    }
    Ok(())
}

/// `u(0..=N)` and the limit `u_inf`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenewalMassSequence {
    pub u: Vec<f64>,
    pub u_inf: f64,
}

impl RenewalMassSequence {
    /// CSV with columns `n,u_n,u_n_minus_u_inf`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,u_n,u_n_minus_u_inf")?;
        for (n, u) in self.u.iter().enumerate() {
            writeln!(w, "{n},{u:.17e},{:.17e}", u - self.u_inf)?;
        }
        Ok(())
    }
}

/// `u(n) = P(n ∈ τ)` for `0 ≤ n ≤ N` by the renewal equation.
pub fn renewal_mass(law: &RenewalLaw, n: usize) -> Result<RenewalMassSequence> {
    if n > MAX_RENEWAL_INDEX {
        return Err(Error::Size { requested: n, limit: MAX_RENEWAL_INDEX });
    }
    let p = law.table(n);
    let mut u = vec![0.0; n + 1];
    u[0] = 1.0;
    for k in 1..=n {
        let mut acc = 0.0;
        for m in 1..=k {
            acc += p[m] * u[k - m];
        }
        u[k] = acc;
    }
    Ok(RenewalMassSequence { u, u_inf: limit_mass(law)? })
}

/// `1/Σ n p(n)`, zero when the mean diverges.
pub fn limit_mass(law: &RenewalLaw) -> Result<f64> {
    let mean = law.mean()?;
    Ok(if mean.is_finite() { 1.0 / mean } else { 0.0 })
}

/// Tilted law `p_F(n) = K(n) e^{-h-Fn}`, which must be a probability.
pub fn tilt_law(k: &RenewalLaw, free_energy: f64, h: f64) -> Result<RenewalLaw> {
    if !(free_energy >= 0.0) || !free_energy.is_finite() || !h.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "tilt needs finite F ≥ 0 and finite h, got F={free_energy}, h={h}"
        )));
    }
    if k.tilt.is_some() {
        return Err(Error::InvalidParameter("law is already tilted".into()));
    }
    let total = (-h).exp() * k.laplace(free_energy)?;
    let residual = (total - 1.0).abs();
    if residual > 1e-10 {
        return Err(Error::InconsistentTilt { residual });
    }
    if free_energy == 0.0 && h == 0.0 {
        return Ok(k.clone());
    }
    match k.family {
        Family::PowerLawConstL | Family::PowerLawLogL => {
            let mut out = k.clone();
            out.tilt = Some(Tilt { free_energy, h });
            for n in 1..out.mass.len() {
                out.mass[n] = k.mass[n] * (-h - free_energy * n as f64).exp();
            }
            out.tail_mass = out.tail_beyond(out.n_max())?;
            Ok(out)
        }
        Family::Geometric => RenewalLaw::geometric(k.c + free_energy, k.n_max()),
        Family::ExplicitFinite => {
            let probs: Vec<f64> = (1..k.mass.len())
                .map(|n| k.mass[n] * (-h - free_energy * n as f64).exp())
                .collect();
            let s: f64 = probs.iter().sum();
            RenewalLaw::explicit(&probs.iter().map(|p| p / s).collect::<Vec<_>>())
        }
    }
}

/// `sup{z > 0 : Σ e^{zn} p(n) < ∞}`.
pub fn exp_moment_abscissa(law: &RenewalLaw) -> Abscissa {
    match law.family {
        Family::PowerLawConstL | Family::PowerLawLogL => Abscissa::Finite(law.tilt.map_or(0.0, |t| t.free_energy)),
        Family::Geometric => Abscissa::Finite(law.c),
        Family::ExplicitFinite => Abscissa::Unbounded,
    }
}

/// Least-squares exponential decay fit `|v(n)| ≈ e^{log_prefactor − rate·n}`.
///
/// When no point survives the floor the data are numerically flat: `exact_flag`
/// is set, `rate` is `+∞` and `max_residual` holds the largest `|v(n)|`.
/// Otherwise `max_residual` is the largest absolute residual of the log-linear fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub log_prefactor: f64,
    pub window: (usize, usize),
    pub max_residual: f64,
    pub exact_flag: bool,
    pub points_used: usize,
}

impl DecayFit {
    /// `1/rate`, zero for an exact (flat) fit.
    pub fn length(&self) -> f64 {
        if self.exact_flag {
            0.0
        } else {
            1.0 / self.rate
        }
    }
}

/// Fits the decay of `(n, |v|)` pairs; shared with correlation-length fits.
pub fn fit_decay_points(ns: &[usize], values: &[f64], window: (usize, usize)) -> Result<DecayFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut largest: f64 = 0.0;
    for (&n, &v) in ns.iter().zip(values) {
        if n < window.0 || n > window.1 {
            continue;
        }
        largest = largest.max(v.abs());
        if v.abs() > DECAY_FLOOR {
            xs.push(n as f64);
            ys.push(v.abs().ln());
        }
    }
    if xs.is_empty() {
        return Ok(DecayFit {
            rate: f64::INFINITY,
            log_prefactor: f64::NEG_INFINITY,
            window,
            max_residual: largest,
            exact_flag: true,
            points_used: 0,
        });
    }
    if xs.len() < 4 {
        return Err(Error::InsufficientData { needed: 4, got: xs.len() });
    }
    let fit = fit_line(&xs, &ys)?;
    Ok(DecayFit {
        rate: -fit.slope,
        log_prefactor: fit.intercept,
        window,
        max_residual: fit.max_residual,
        exact_flag: false,
        points_used: xs.len(),
    })
}

/// Fits `|u(n) − u_inf| ≈ C e^{-rn}` over the inclusive `window`.
pub fn fit_decay_rate(seq: &RenewalMassSequence, window: (usize, usize)) -> Result<DecayFit> {
    if window.0 > window.1 || window.1 >= seq.u.len() {
        return Err(Error::Domain(format!(
            "window {:?} outside sequence range 0..={}",
            window,
            seq.u.len().saturating_sub(1)
        )));
    }
    if !seq.u_inf.is_finite() {
        return Err(Error::Domain("u_inf must be finite".into()));
    }
    let ns: Vec<usize> = (window.0..=window.1).collect();
    let vs: Vec<f64> = ns.iter().map(|&n| seq.u[n] - seq.u_inf).collect();
    fit_decay_points(&ns, &vs, window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn half_half() -> RenewalLaw {
        RenewalLaw::explicit(&[0.5, 0.5]).unwrap()
    }

    #[test]
    fn hand_recursion() {
        let s = renewal_mass(&half_half(), 3).unwrap();
        assert_eq!(s.u, vec![1.0, 0.5, 0.75, 0.625]);
        assert_relative_eq!(s.u_inf, 2.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn half_half_closed_form_and_rate() {
        let s = renewal_mass(&half_half(), 60).unwrap();
        for n in 0..=60 {
            let exact = 2.0 / 3.0 + (-0.5f64).powi(n as i32) / 3.0;
            assert!((s.u[n] - exact).abs() < 1e-12);
        }
        let fit = fit_decay_rate(&s, (10, 50)).unwrap();
        assert!((fit.rate / 2f64.ln() - 1.0).abs() < 0.01, "rate {}", fit.rate);
        assert_eq!(exp_moment_abscissa(&half_half()), Abscissa::Unbounded);
    }

    #[test]
    fn geometric_is_flat() {
        let law = RenewalLaw::geometric(2f64.ln(), 1000).unwrap();
        let s = renewal_mass(&law, 1000).unwrap();
        assert_relative_eq!(s.u_inf, 0.5, max_relative = 1e-14);
        for n in 1..=1000 {
            assert!((s.u[n] - 0.5).abs() < 1e-12);
        }
        let fit = fit_decay_rate(&s, (1, 1000)).unwrap();
        assert!(fit.exact_flag);
        assert!(fit.max_residual < 1e-12);
        assert_eq!(fit.rate, f64::INFINITY);
        for n in 1..50 {
            assert_relative_eq!(law.pmf(n + 1) / law.pmf(n), (-(2f64.ln())).exp(), max_relative = 1e-14);
        }
    }

    #[test]
    fn geometric_abscissa() {
        let law = RenewalLaw::geometric(0.7, 10).unwrap();
        assert_eq!(exp_moment_abscissa(&law), Abscissa::Finite(0.7));
    }

    #[test]
    fn synthetic_decay() {
        let u: Vec<f64> = (0..200).map(|n| 0.25 + 0.3 * (-0.2 * n as f64).exp()).collect();
        let s = RenewalMassSequence { u, u_inf: 0.25 };
        let fit = fit_decay_rate(&s, (0, 100)).unwrap();
        assert!((fit.rate - 0.2).abs() < 1e-6);
        assert!((fit.log_prefactor - 0.3f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn too_few_points() {
        let u = vec![1.0, 0.5, 0.5 + 1e-3, 0.5 + 1e-4, 0.5, 0.5];
        let s = RenewalMassSequence { u, u_inf: 0.5 };
        assert!(matches!(
            fit_decay_rate(&s, (1, 5)),
            Err(Error::InsufficientData { needed: 4, got: 2 })
        ));
    }

    #[test]
    fn zeta_normalization() {
        // ζ(2) = π²/6 and ζ(2) - ζ'(2) = π²/6 + 0.937548254315843…
        let law = RenewalLaw::power_law(Family::PowerLawConstL, 2.0, 100).unwrap();
        assert_relative_eq!(law.pmf(1), 6.0 / std::f64::consts::PI.powi(2), max_relative = 1e-13);
        let law = RenewalLaw::power_law(Family::PowerLawLogL, 2.0, 100).unwrap();
        let z = std::f64::consts::PI.powi(2) / 6.0 + 0.937_548_254_315_843_8;
        assert_relative_eq!(law.pmf(1), 1.0 / z, max_relative = 1e-12);
    }

    #[test]
    fn power_law_invariants() {
        for fam in [Family::PowerLawConstL, Family::PowerLawLogL] {
            for alpha in [1.1, 1.5, 2.5] {
                let law = RenewalLaw::power_law(fam, alpha, 500).unwrap();
                assert!(law.normalization_residual() < 1e-12, "{fam:?} {alpha}");
                assert!(law.mass().iter().all(|&p| p >= 0.0));
                assert!((law.tail_beyond(300).unwrap() - law.mass()[300..].iter().sum::<f64>() - law.tail_mass()).abs() < 1e-15);
            }
        }
        let law = RenewalLaw::power_law(Family::PowerLawConstL, 1.5, 500).unwrap();
        let c = law.pmf(2) * 2f64.powf(1.5);
        for n in 2..=500 {
            assert_relative_eq!(law.pmf(n) * (n as f64).powf(1.5), c, max_relative = 1e-9);
        }
        assert_eq!(limit_mass(&law).unwrap(), 0.0);
        assert_eq!(exp_moment_abscissa(&law), Abscissa::Finite(0.0));
        assert!(RenewalLaw::power_law(Family::PowerLawConstL, 1.0, 10).is_err());
    }

    #[test]
    fn sandwich_bounds_with_exponent_window() {
        // d1 n^{-(α+ε)} ≤ K(n) ≤ d2 n^{-(α-ε)}: the ratios stay bounded on the stored range
        let eps = 0.1;
        for fam in [Family::PowerLawConstL, Family::PowerLawLogL] {
            let law = RenewalLaw::power_law(fam, 1.5, 4096).unwrap();
            let lower: Vec<f64> = (1..=4096).map(|n| law.pmf(n) * (n as f64).powf(1.5 + eps)).collect();
            let upper: Vec<f64> = (1..=4096).map(|n| law.pmf(n) * (n as f64).powf(1.5 - eps)).collect();
            let d1 = lower.iter().cloned().fold(f64::INFINITY, f64::min);
            let d2 = upper.iter().cloned().fold(0.0, f64::max);
            assert!(d1 > 0.0 && d2.is_finite());
            for n in 1..=4096 {
                let k = law.pmf(n);
                let x = n as f64;
                assert!(d1 / x.powf(1.5 + eps) <= k * (1.0 + 1e-12));
                assert!(k <= d2 / x.powf(1.5 - eps) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn euler_maclaurin_tail_matches_direct_sum() {
        let t = PowerTerm { a: 1.0, b: 1.0, s: 3.0, rate: 0.01 };
        let direct: f64 = (5..200_000).map(|n| t.eval(n as f64)).sum();
        assert_relative_eq!(t.tail_sum(5).unwrap(), direct, max_relative = 1e-12);
        let t = PowerTerm { a: 1.0, b: 0.0, s: 1.5, rate: 0.02 };
        let direct: f64 = (1..100_000).map(|n| t.eval(n as f64)).sum();
        assert_relative_eq!(t.full_sum().unwrap(), direct, max_relative = 1e-12);
    }

    #[test]
    fn identity_tilt_and_consistency_check() {
        let k = RenewalLaw::power_law(Family::PowerLawConstL, 1.5, 200).unwrap();
        assert_eq!(tilt_law(&k, 0.0, 0.0).unwrap(), k);
        assert!(matches!(tilt_law(&k, 0.1, -0.1), Err(Error::InconsistentTilt { .. })));
        let point = RenewalLaw::explicit(&[1.0]).unwrap();
        let t = tilt_law(&point, 0.3, -0.3).unwrap();
        assert_relative_eq!(t.pmf(1), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn json_roundtrip() {
        let k = RenewalLaw::power_law(Family::PowerLawLogL, 1.7, 64).unwrap();
        let s = serde_json::to_string(&k.to_spec()).unwrap();
        assert!(s.contains("\"N_max\":64"));
        let back = RenewalLaw::from_spec(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back, k);
        let e = RenewalLaw::from_spec(&serde_json::from_str(r#"{"family":"explicit_finite","N_max":2,"mass":[0.5,0.5]}"#).unwrap())
            .unwrap();
        assert_eq!(e, half_half());
    }

    #[test]
    fn csv_output() {
        let s = renewal_mass(&half_half(), 2).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,u_n,u_n_minus_u_inf\n0,1"));
        assert_eq!(text.lines().count(), 4);
        assert!(!text.contains('\r'));
    }

    fn explicit_law() -> impl Strategy<Value = RenewalLaw> {
        prop::collection::vec(0.0f64..1.0, 1..8).prop_filter_map("nonzero", |w| {
            let s: f64 = w.iter().sum();
            (s > 1e-3).then(|| {
                let p: Vec<f64> = w.iter().map(|x| x / s).collect();
                let fix = 1.0 - p.iter().sum::<f64>();
                let mut p = p;
                p[0] += fix;
                RenewalLaw::explicit(&p).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn renewal_equation_residual(law in explicit_law(), n in 1usize..120) {
            let s = renewal_mass(&law, n).unwrap();
            prop_assert_eq!(s.u[0], 1.0);
            for k in 1..=n {
                let rhs: f64 = (1..=k).map(|m| law.pmf(m) * s.u[k - m]).sum();
                prop_assert!((s.u[k] - rhs).abs() < 1e-12);
                prop_assert!(s.u[k] >= 0.0 && s.u[k] <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn tilted_laws_are_valid(alpha in 1.1f64..3.0, h in -1.0f64..-0.01, log_fam in any::<bool>()) {
            let fam = if log_fam { Family::PowerLawLogL } else { Family::PowerLawConstL };
            let k = RenewalLaw::power_law(fam, alpha, 128).unwrap();
            // bisection for Σ K e^{-Fn} = e^h
            let (mut lo, mut hi) = (0.0, -h);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if k.laplace(mid).unwrap() > h.exp() { lo = mid } else { hi = mid }
            }
            let t = tilt_law(&k, 0.5 * (lo + hi), h).unwrap();
            prop_assert!(t.normalization_residual() < 1e-12);
            prop_assert!(t.mass().iter().all(|&p| p >= 0.0));
            prop_assert_eq!(exp_moment_abscissa(&t), Abscissa::Finite(0.5 * (lo + hi)));
            prop_assert!(limit_mass(&t).unwrap() > 0.0);
        }
    }
}
