//! Bessel transition density and the first-passage density from `a` down to `b`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::special::{bessel_jy, ln_bessel_i};
use crate::error::{Error, Result};
use crate::numerics::{integrate, integrate_panels, QuadOptions};
use crate::renewal::Family;

/// Dimension `δ > 2`, index `ν = δ/2 − 1`, start level `a` and target level `b < a`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesselSpec {
    pub delta: f64,
    pub nu: f64,
    pub a: f64,
    pub b: f64,
}

impl BesselSpec {
    pub fn new(delta: f64) -> Result<Self> {
        Self::with_levels(delta, 1.0, 0.5)
    }

    pub fn with_levels(delta: f64, a: f64, b: f64) -> Result<Self> {
        if !(delta > 2.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("Bessel dimension must exceed 2, got {delta}")));
        }
        if !(a > b && b > 0.0) || !a.is_finite() {
            return Err(Error::InvalidParameter(format!("need a > b > 0, got a={a}, b={b}")));
        }
        Ok(Self { delta, nu: delta / 2.0 - 1.0, a, b })
    }

    /// Dimension matched to a gap law with tail exponent `alpha` (`K(n) ≈ n^{-alpha}`):
    /// `δ = 2(alpha + epsilon)`, so that the discretized hitting law decays like
    /// `n^{-(alpha + epsilon)}`.
    pub fn for_gap_law(family: Family, alpha: f64, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!("epsilon must be ≥ 0, got {epsilon}")));
        }
        match family {
            Family::PowerLawConstL => {}
            Family::PowerLawLogL if epsilon > 0.0 => {}
            Family::PowerLawLogL => {
                return Err(Error::InvalidParameter(
                    "epsilon = 0 is only allowed for the constant-L family".into(),
                ))
            }
            _ => return Err(Error::InvalidParameter(format!("{family:?} has no power-law tail"))),
        }
        Self::new(2.0 * (alpha + epsilon))
    }

    /// `P_a(T_b < ∞) = (b/a)^{δ−2}`.
    pub fn hit_probability(&self) -> f64 {
        (self.b / self.a).powf(2.0 * self.nu)
    }

    /// `∫_0^∞ p(t) dt = 2π (b/a)^ν` for the unnormalized first-passage density.
    pub fn hitting_normalization(&self) -> f64 {
        2.0 * PI * (self.b / self.a).powf(self.nu)
    }
}

/// `ln p_t^δ(x, y)`.
pub fn ln_transition_density(spec: &BesselSpec, t: f64, x: f64, y: f64) -> f64 {
    let nu = spec.nu;
    (y / t).ln() + nu * (y / x).ln() - (x * x + y * y) / (2.0 * t) + ln_bessel_i(nu, x * y / t)
}

/// `p_t^δ(x, y) = (y/t)(y/x)^ν e^{−(x²+y²)/(2t)} I_ν(xy/t)`.
pub fn transition_density(spec: &BesselSpec, t: f64, x: f64, y: f64) -> Result<f64> {
    if !(t > 0.0 && x > 0.0 && y > 0.0) {
        return Err(Error::Domain(format!("transition density needs t, x, y > 0, got ({t}, {x}, {y})")));
    }
    Ok(ln_transition_density(spec, t, x, y).exp())
}

/// `ln` of the damping cutoff: terms below `e^{-CUTOFF}` are dropped.
const CUTOFF: f64 = 36.9;

fn inner_opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-15, rel_tol: 1e-12, max_intervals: 4000 }
}

/// `B(w²)` of the spectral representation.
fn spectral_b(spec: &BesselSpec, w: f64) -> f64 {
    let jb = bessel_jy(spec.nu, spec.b * w);
    let ja = bessel_jy(spec.nu, spec.a * w);
    (jb.j * ja.y - ja.j * jb.y) / (jb.j * jb.j + jb.y * jb.y)
}

/// `∫_0^{w_max} B(w²) g(w) dw` on half-period panels; the first panel uses
/// `w = w₁ v⁴` to absorb the `w^{2ν−1}` behaviour at the origin.
fn spectral_integral(spec: &BesselSpec, g: impl Fn(f64) -> f64, w_max: f64) -> Result<f64> {
    let half = PI / (spec.a - spec.b);
    let w1 = half.min(w_max);
    let first = integrate(
        |v: f64| {
            let v3 = v * v * v;
            let w = w1 * v3 * v;
            4.0 * w1 * v3 * spectral_b(spec, w) * g(w)
        },
        0.0,
        1.0,
        inner_opts(),
    )?
    .value;
    if w_max <= w1 {
        return Ok(first);
    }
    let mut breaks = vec![w1];
    let mut w = w1;
    while w < w_max {
        w = (w + half).min(w_max);
        breaks.push(w);
    }
    let rest = integrate_panels(|w| spectral_b(spec, w) * g(w), &breaks, inner_opts())?.value;
    Ok(first + rest)
}

/// First-passage density of `T_b` from `a`, conditioned on `T_b < ∞`.
pub fn hitting_density(spec: &BesselSpec, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("hitting density needs t > 0, got {t}")));
    }
    let w_max = (2.0 * CUTOFF / t).sqrt();
    let raw = spectral_integral(spec, |w| 2.0 * w * (-0.5 * t * w * w).exp(), w_max)?;
    Ok(raw / spec.hitting_normalization())
}

/// `P̂(T_b > s)` for `s > 0`, by the damped spectral integral of `4B(w²)/w`.
pub fn hitting_survival(spec: &BesselSpec, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("survival needs s > 0, got {s}")));
    }
    let w_max = (2.0 * CUTOFF / s).sqrt();
    let raw = spectral_integral(spec, |w| 4.0 / w * (-0.5 * s * w * w).exp(), w_max)?;
    Ok(raw / spec.hitting_normalization())
}

/// Times below this carry less than `e^{-(a−b)²/(2 t)} ≈ e^{-60}` of mass for the default levels.
fn small_time(spec: &BesselSpec) -> f64 {
    let d = spec.a - spec.b;
    d * d / 125.0
}

/// `P̂(T_b ∈ (s0, s1])` by direct quadrature of the density (used near the origin).
pub fn hitting_mass_direct(spec: &BesselSpec, s0: f64, s1: f64) -> Result<f64> {
    let lo = s0.max(small_time(spec));
    if s1 <= lo {
        return Ok(0.0);
    }
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-11, max_intervals: 500 };
    let q = integrate(|t| hitting_density(spec, t).unwrap_or(f64::NAN), lo, s1, opts)?;
    if !q.value.is_finite() {
        return Err(Error::Accuracy { what: "hitting density".into(), achieved: f64::INFINITY, requested: 1e-12 });
    }
    Ok(q.value)
}

/// `P̂(T_b ∈ (n−1, n])` for `n ≥ 2` by the damped spectral integral.
pub fn hitting_unit_mass(spec: &BesselSpec, n: usize) -> Result<f64> {
    if n < 2 {
        return hitting_mass_direct(spec, 0.0, 1.0);
    }
    let s = (n - 1) as f64;
    let w_max = (2.0 * CUTOFF / s).sqrt();
    let raw = spectral_integral(
        spec,
        |w| {
            let w2 = 0.5 * w * w;
            4.0 / w * (-s * w2).exp() * (-(-w2).exp_m1())
        },
        w_max,
    )?;
    Ok(raw / spec.hitting_normalization())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec() -> BesselSpec {
        BesselSpec::new(3.5).unwrap()
    }

    #[test]
    fn transition_density_normalized() {
        let s = spec();
        let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 2000 };
        let total = integrate_panels(|y| transition_density(&s, 1.0, 1.0, y).unwrap(), &[1e-12, 1.0, 3.0, 6.0, 14.0], opts)
            .unwrap()
            .value;
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn transition_ratio_identity() {
        let s = spec();
        for &(t, x, y) in &[(0.3, 1.0, 2.0), (1.0, 0.5, 4.0), (7.0, 3.0, 0.2)] {
            let r = transition_density(&s, t, x, y).unwrap() / transition_density(&s, t, y, x).unwrap();
            assert_relative_eq!(r, (y / x).powf(s.delta - 1.0), max_relative = 1e-12);
        }
    }

    #[test]
    fn chapman_kolmogorov() {
        let s = spec();
        let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 2000 };
        let lhs = integrate_panels(
            |z| transition_density(&s, 0.5, 1.0, z).unwrap() * transition_density(&s, 0.5, z, 2.0).unwrap(),
            &[1e-12, 1.0, 2.0, 4.0, 9.0],
            opts,
        )
        .unwrap()
        .value;
        let rhs = transition_density(&s, 1.0, 1.0, 2.0).unwrap();
        assert!((lhs - rhs).abs() < 1e-5);
    }

    #[test]
    fn density_nonnegative_with_power_tail() {
        let s = spec();
        for &t in &[0.01, 0.05, 0.2, 1.0, 3.0, 20.0, 100.0] {
            assert!(hitting_density(&s, t).unwrap() >= -1e-14, "t = {t}");
        }
        let big = 400.0;
        let a = hitting_density(&s, big).unwrap() * big.powf(s.delta / 2.0);
        let b = hitting_density(&s, 2.0 * big).unwrap() * (2.0 * big).powf(s.delta / 2.0);
        assert!((a / b - 1.0).abs() < 0.05);
    }

    #[test]
    fn survival_and_unit_masses_agree() {
        let s = spec();
        let s1 = hitting_survival(&s, 1.0).unwrap();
        let k1 = hitting_unit_mass(&s, 1).unwrap();
        assert!((s1 + k1 - 1.0).abs() < 1e-10, "{s1} + {k1}");
        let k5 = hitting_unit_mass(&s, 5).unwrap();
        let diff = hitting_survival(&s, 4.0).unwrap() - hitting_survival(&s, 5.0).unwrap();
        assert_relative_eq!(k5, diff, max_relative = 1e-9);
    }

    #[test]
    fn gap_law_dimension() {
        let s = BesselSpec::for_gap_law(Family::PowerLawConstL, 1.5, 0.25).unwrap();
        assert_eq!(s.delta, 3.5);
        assert_eq!(s.nu, 0.75);
        assert!(BesselSpec::for_gap_law(Family::PowerLawLogL, 1.5, 0.0).is_err());
        assert!(BesselSpec::for_gap_law(Family::PowerLawConstL, 1.5, 0.0).is_ok());
        assert!(BesselSpec::new(2.0).is_err());
    }
}
