//! Bessel functions of real order `ν ≥ 0` and positive argument.
//!
//! * `I_ν` uses the ascending power series for `x ≤ 40` and the Hankel
//!   large-argument expansion beyond, always returned in scaled form
//!   `e^{-x} I_ν(x)` (or as a logarithm) so that large arguments never overflow.
//! * `J_ν`, `Y_ν` follow Temme's series for `x < 2` and Steed's complex
//!   continued fraction for `x ≥ 2`, joined to the requested order by
//!   recurrence (the classical `bessjy` scheme).

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, ln_gamma};

const SERIES_LIMIT: f64 = 40.0;

/// `I_ν(x)` as `mantissa · e^{exponent}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub exponent: f64,
}

impl Scaled {
    pub fn value(&self) -> f64 {
        self.mantissa * self.exponent.exp()
    }

    pub fn ln(&self) -> f64 {
        self.mantissa.ln() + self.exponent
    }
}

/// The three Bessel functions at a point.
#[derive(Clone, Copy, Debug)]
pub struct BesselValues {
    pub i: Scaled,
    pub j: f64,
    pub y: f64,
}

/// Evaluates `I_ν(x)`, `J_ν(x)` and `Y_ν(x)`.
pub fn special_functions(nu: f64, x: f64) -> BesselValues {
    let jy = bessel_jy(nu, x);
    BesselValues {
        i: Scaled {
            mantissa: bessel_i_scaled(nu, x),
            exponent: x,
        },
        j: jy.j,
        y: jy.y,
    }
}

/// `Σ_k (x²/4)^k / (k! (ν+1)_k)`, the series for `I_ν(x)·Γ(ν+1)/(x/2)^ν`.
fn i_series_reduced(nu: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * (nu + k));
        sum += term;
        if term < 1e-17 * sum {
            return sum;
        }
        k += 1.0;
    }
}

/// Hankel expansion of `√(2πx)·e^{-x} I_ν(x)`, summed to its smallest term.
fn i_asymptotic_reduced(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= -(mu - odd * odd) / (kf * 8.0 * x);
        if term.abs() >= last {
            break;
        }
        sum += term;
        last = term.abs();
        if last < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `ln I_ν(x)` for `x > 0`.
pub fn ln_bessel_i(nu: f64, x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        nu * (0.5 * x).ln() - ln_gamma(nu + 1.0) + i_series_reduced(nu, x).ln()
    } else {
        x - 0.5 * (2.0 * PI * x).ln() + i_asymptotic_reduced(nu, x).ln()
    }
}

/// `e^{-x} I_ν(x)` for `x > 0`.
pub fn bessel_i_scaled(nu: f64, x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        (ln_bessel_i(nu, x) - x).exp()
    } else {
        i_asymptotic_reduced(nu, x) / (2.0 * PI * x).sqrt()
    }
}

/// `J_ν`, `Y_ν` and their derivatives at one point.
#[derive(Clone, Copy, Debug)]
pub struct JY {
    pub j: f64,
    pub y: f64,
    pub jp: f64,
    pub yp: f64,
}

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAXIT: usize = 100_000;
const XMIN: f64 = 2.0;

/// `Γ`-function combinations used by Temme's series, for `|μ| ≤ 1/2`:
/// returns `(γ₁, γ₂, 1/Γ(1+μ), 1/Γ(1-μ))`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let gampl = 1.0 / gamma(1.0 + mu);
    let gammi = 1.0 / gamma(1.0 - mu);
    let gam2 = 0.5 * (gammi + gampl);
    let gam1 = if mu.abs() < 1e-3 {
        // Taylor series of (1/Γ(1-μ) - 1/Γ(1+μ)) / (2μ) around 0:
        // 1/Γ(1+z) = 1 + γz + c₂z² + c₃z³ + …  gives -γ - c₃μ².
        const EULER: f64 = 0.577_215_664_901_532_9;
        const C3: f64 = -0.042_002_635_034_095_24;
        -EULER - C3 * mu * mu
    } else {
        (gammi - gampl) / (2.0 * mu)
    };
    (gam1, gam2, gampl, gammi)
}

/// Bessel functions of the first and second kind for real order `ν ≥ 0`.
pub fn bessel_jy(nu: f64, x: f64) -> JY {
    assert!(x > 0.0 && nu >= 0.0, "bessel_jy requires x > 0, nu >= 0");
    let nl = if x < XMIN {
        (nu + 0.5) as usize
    } else {
        (nu - x + 1.5).max(0.0) as usize
    };
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    // CF1: J'_ν/J_ν by Lentz's method
    let mut isign = 1.0;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    for _ in 0..MAXIT {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            break;
        }
    }

    // downward recurrence from ν to μ = ν - nl
    let mut rjl = isign * FPMIN;
    let mut rjpl = h * rjl;
    let rjl1 = rjl;
    let rjp1 = rjpl;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;

    let (rjmu, mut rymu, mut ry1);
    if x < XMIN {
        let x2 = 0.5 * x;
        let pimu = PI * xmu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = xmu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(xmu);
        let mut ff = 2.0 / PI * fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let e = e.exp();
        let mut p = e / (gampl * PI);
        let mut q = 1.0 / (e * PI * gammi);
        let pimu2 = 0.5 * pimu;
        let fact3 = if pimu2.abs() < EPS { 1.0 } else { pimu2.sin() / pimu2 };
        let r = PI * pimu2 * fact3 * fact3;
        let mut c = 1.0;
        let d = -x2 * x2;
        let mut sum = ff + r * q;
        let mut sum1 = p;
        let mut i = 1.0;
        loop {
            ff = (i * ff + p + q) / (i * i - xmu2);
            c *= d / i;
            p /= i - xmu;
            q /= i + xmu;
            let del = c * (ff + r * q);
            sum += del;
            let del1 = c * p - i * del;
            sum1 += del1;
            if del.abs() < (1.0 + sum.abs()) * EPS || i > MAXIT as f64 {
                break;
            }
            i += 1.0;
        }
        rymu = -sum;
        ry1 = -sum1 * xi2;
        let rymup = xmu * xi * rymu - ry1;
        rjmu = w / (rymup - f * rymu);
    } else {
        // CF2: p + iq by Steed's method
        let mut a = 0.25 - xmu2;
        let mut p = -0.5 * xi;
        let mut q = 1.0;
        let br = 2.0 * x;
        let mut bi = 2.0;
        let mut fact = a * xi / (p * p + q * q);
        let mut cr = br + q * fact;
        let mut ci = bi + p * fact;
        let mut den = br * br + bi * bi;
        let mut dr = br / den;
        let mut di = -bi / den;
        let mut dlr = cr * dr - ci * di;
        let mut dli = cr * di + ci * dr;
        let mut temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        for i in 2..MAXIT {
            a += 2.0 * (i as f64 - 1.0);
            bi += 2.0;
            dr = a * dr + br;
            di = a * di + bi;
            if dr.abs() + di.abs() < FPMIN {
                dr = FPMIN;
            }
            fact = a / (cr * cr + ci * ci);
            cr = br + cr * fact;
            ci = bi - ci * fact;
            if cr.abs() + ci.abs() < FPMIN {
                cr = FPMIN;
            }
            den = dr * dr + di * di;
            dr /= den;
            di /= -den;
            dlr = cr * dr - ci * di;
            dli = cr * di + ci * dr;
            temp = p * dlr - q * dli;
            q = p * dli + q * dlr;
            p = temp;
            if (dlr - 1.0).abs() + dli.abs() < EPS {
                break;
            }
        }
        let gam = (p - f) / q;
        let mag = (w / ((p - f) * gam + q)).sqrt();
        rjmu = if rjl >= 0.0 { mag } else { -mag };
        rymu = rjmu * gam;
        let rymup = rymu * (p + q / gam);
        ry1 = xmu * xi * rymu - rymup;
    }

    let scale = rjmu / rjl;
    let j = rjl1 * scale;
    let jp = rjp1 * scale;
    for i in 1..=nl {
        let rytemp = (xmu + i as f64) * xi2 * ry1 - rymu;
        rymu = ry1;
        ry1 = rytemp;
    }
    let y = rymu;
    let yp = nu * xi * rymu - ry1;
    JY { j, y, jp, yp }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn half_integer_i_closed_form() {
        // I_{1/2}(x) = sqrt(2/(πx)) sinh x
        for &x in &[0.01, 0.5, 1.0, 7.3, 39.0, 41.0, 120.0] {
            let exact_scaled = (2.0 / (PI * x)).sqrt() * 0.5 * (1.0 - (-2.0 * x).exp());
            assert_relative_eq!(bessel_i_scaled(0.5, x), exact_scaled, max_relative = 1e-13);
        }
        let v = special_functions(0.5, 1.0).i.value();
        assert_relative_eq!(v, (2.0 / PI).sqrt() * 1.0_f64.sinh(), max_relative = 1e-14);
        assert!((v - 0.937_674).abs() < 1e-6);
    }

    #[test]
    fn i_series_and_asymptotic_overlap() {
        for &nu in &[0.0, 0.4, 0.75, 1.75, 3.0] {
            for &x in &[35.0, 40.0, 45.0] {
                let s = (ln_bessel_i_series(nu, x) - x).exp();
                let a = i_asymptotic_reduced(nu, x) / (2.0 * PI * x).sqrt();
                assert_relative_eq!(s, a, max_relative = 1e-13);
            }
        }
    }

    fn ln_bessel_i_series(nu: f64, x: f64) -> f64 {
        nu * (0.5 * x).ln() - ln_gamma(nu + 1.0) + i_series_reduced(nu, x).ln()
    }

    #[test]
    fn i_recurrence() {
        // I_{ν-1}(x) - I_{ν+1}(x) = (2ν/x) I_ν(x)
        for &nu in &[1.0, 1.75, 2.5] {
            for &x in &[0.3, 3.0, 30.0, 80.0] {
                let lhs = bessel_i_scaled(nu - 1.0, x) - bessel_i_scaled(nu + 1.0, x);
                let rhs = 2.0 * nu / x * bessel_i_scaled(nu, x);
                assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn jy_reference_values() {
        let r = bessel_jy(0.0, 1.0);
        assert_relative_eq!(r.j, 0.765_197_686_557_966_6, max_relative = 1e-13);
        assert_relative_eq!(r.y, 0.088_256_964_215_676_96, max_relative = 1e-12);
        let r = bessel_jy(1.0, 2.5);
        assert_relative_eq!(r.j, 0.497_094_102_464_274_4, max_relative = 1e-12);
        assert_relative_eq!(r.y, 0.145_918_137_966_786_3, max_relative = 1e-12);
        let r = bessel_jy(2.0, 10.0);
        assert_relative_eq!(r.j, 0.254_630_313_685_120_7, max_relative = 1e-12);
        assert_relative_eq!(r.y, -0.005_868_082_442_208_615, max_relative = 1e-10);
    }

    #[test]
    fn jy_half_integer_closed_form() {
        for &x in &[0.05, 0.7, 1.9, 2.1, 13.0, 49.0] {
            let s = (2.0 / (PI * x)).sqrt();
            let r = bessel_jy(0.5, x);
            assert_relative_eq!(r.j, s * x.sin(), epsilon = 1e-13 * s, max_relative = 1e-11);
            assert_relative_eq!(r.y, -s * x.cos(), epsilon = 1e-13 * s, max_relative = 1e-11);
        }
    }

    #[test]
    fn wronskian_on_grid() {
        for &nu in &[0.0, 0.25, 0.4, 0.75, 1.0, 1.75, 2.5, 4.0] {
            for &x in &[0.01, 0.2, 1.0, 1.99, 2.0, 5.0, 17.0, 50.0] {
                let a = bessel_jy(nu, x);
                let b = bessel_jy(nu + 1.0, x);
                let w = b.j * a.y - a.j * b.y;
                let expected = 2.0 / (PI * x);
                assert!(
                    ((w - expected) / expected).abs() < 1e-9,
                    "nu={nu} x={x}: {w} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn scaled_i_tail_limit() {
        // √w e^{-w} I_ν(w) → 1/√(2π), monotone in the tail for ν > 1/2
        let nu = 1.75;
        let mut prev = 0.0;
        for k in 0..8 {
            let w = 50.0 * 2f64.powi(k).min(8.0) + 50.0 * k as f64;
            let v = w.sqrt() * bessel_i_scaled(nu, w);
            assert!(v > prev);
            prev = v;
        }
        assert!((prev - (2.0 * PI).sqrt().recip()).abs() < 0.01);
    }
}
