//! Gamma function, Pochhammer symbols, Gauss hypergeometric series and associated
//! Legendre functions of real order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rising factorial `(q)_l = q (q+1) .. (q+l-1)`, with `(q)_0 = 1`.
pub fn pochhammer(q: f64, l: u32) -> f64 {
    (0..l).fold(1.0, |acc, i| acc * (q + i as f64))
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn nonpositive_integer(x: f64) -> Option<u64> {
    if x <= 0.0 && x == x.round() {
        Some((-x) as u64)
    } else {
        None
    }
}

/// `Gamma(x)`; errors at the poles `x = 0, -1, -2, ..`.
pub fn gamma_real(x: f64) -> Result<f64> {
    if nonpositive_integer(x).is_some() {
        return Err(Error::Pole(x));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma_unchecked(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS[0];
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

/// `1 / Gamma(x)`, equal to zero at the poles of Gamma.
pub fn recip_gamma(x: f64) -> f64 {
    if nonpositive_integer(x).is_some() {
        0.0
    } else {
        1.0 / gamma_unchecked(x)
    }
}

/// Parameters of `2F1(alpha, beta; gamma; z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyp2F1 {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub z: f64,
}

impl Hyp2F1 {
    pub fn new(alpha: f64, beta: f64, gamma: f64, z: f64) -> Self {
        Hyp2F1 { alpha, beta, gamma, z }
    }

    /// Degree of the polynomial when the series terminates.
    pub fn terminating_degree(&self) -> Option<u64> {
        match (nonpositive_integer(self.alpha), nonpositive_integer(self.beta)) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

const HYP_RTOL: f64 = 1e-13;
const HYP_MAX_TERMS: usize = 200_000;

/// Sums the Gauss series. Terminating parameter sets are summed exactly; otherwise
/// `|z| < 1` is required and summation stops once the estimated tail is below
/// `1e-13` of the partial sum.
pub fn hyp2f1(p: Hyp2F1) -> Result<f64> {
    if !(p.alpha.is_finite() && p.beta.is_finite() && p.gamma.is_finite() && p.z.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite 2F1 parameters {p:?}")));
    }
    let term_limit = p.terminating_degree();
    if let Some(g) = nonpositive_integer(p.gamma) {
        // A pole in the denominator is harmless only if the series stops before it.
        if term_limit.is_none_or(|m| m >= g) {
            return Err(Error::InvalidParameter(format!("gamma = {} is a non-positive integer", p.gamma)));
        }
    }
    let mut sum = 1.0;
    let mut term = 1.0;
    if let Some(m) = term_limit {
        for k in 0..m {
            let kf = k as f64;
            term *= (p.alpha + kf) * (p.beta + kf) / ((p.gamma + kf) * (kf + 1.0)) * p.z;
            sum += term;
        }
        return Ok(sum);
    }
    let az = p.z.abs();
    if az >= 1.0 {
        return Err(Error::NonTerminating(p.z));
    }
    for k in 0..HYP_MAX_TERMS {
        let kf = k as f64;
        let ratio = (p.alpha + kf) * (p.beta + kf) / ((p.gamma + kf) * (kf + 1.0));
        term *= ratio * p.z;
        sum += term;
        // Once the term ratio has settled below 1 the tail is bounded geometrically.
        let q = (ratio.abs() * az).max(az);
        if q < 1.0 && term.abs() * q / (1.0 - q) <= HYP_RTOL * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence(HYP_MAX_TERMS))
}

/// Sign of the order `+-s` of an associated Legendre function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderSign {
    Plus,
    Minus,
}

impl OrderSign {
    fn value(self) -> f64 {
        match self {
            OrderSign::Plus => 1.0,
            OrderSign::Minus => -1.0,
        }
    }
}

/// Two equivalent hypergeometric representations of `P_nu^{+-s}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LegendreForm {
    /// `((1+x)/(1-x))^{+-s/2} 2F1(nu+1, -nu; 1-+s; (1-x)/2) / Gamma(1-+s)`.
    Ratio,
    /// `2^{+-s} (1-x^2)^{-+s/2} 2F1(-+s-nu, 1-+s+nu; 1-+s; (1-x)/2) / Gamma(1-+s)`, the
    /// Euler transform of [`LegendreForm::Ratio`].
    Euler,
}

fn legendre_params(form: LegendreForm, nu: f64, sign: OrderSign, s: f64, x: f64) -> (Hyp2F1, f64) {
    let e = sign.value() * s;
    let z = 0.5 * (1.0 - x);
    match form {
        LegendreForm::Ratio => {
            (Hyp2F1::new(nu + 1.0, -nu, 1.0 - e, z), ((1.0 + x) / (1.0 - x)).powf(0.5 * e))
        }
        LegendreForm::Euler => {
            (Hyp2F1::new(-e - nu, 1.0 - e + nu, 1.0 - e, z), 2f64.powf(e) * (1.0 - x * x).powf(-0.5 * e))
        }
    }
}

/// Evaluates `P_nu^{+-s}(x)` through a chosen representation; the series need not terminate.
pub fn legendre_p_form(form: LegendreForm, nu: f64, sign: OrderSign, s: f64, x: f64) -> Result<f64> {
    check_legendre_args(s, x)?;
    let (hp, pref) = legendre_params(form, nu, sign, s, x);
    Ok(recip_gamma(1.0 - sign.value() * s) * pref * hyp2f1(hp)?)
}

fn check_legendre_args(s: f64, x: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!("order s = {s} outside (0, 1)")));
    }
    if !(x > -1.0 && x < 1.0) {
        return Err(Error::InvalidParameter(format!("argument x = {x} outside (-1, 1)")));
    }
    Ok(())
}

/// `P_nu^{+-s}(x)` for parameter sets where one of the two representations terminates.
pub fn legendre_p(nu: f64, sign: OrderSign, s: f64, x: f64) -> Result<f64> {
    check_legendre_args(s, x)?;
    for form in [LegendreForm::Ratio, LegendreForm::Euler] {
        let (hp, _) = legendre_params(form, nu, sign, s, x);
        if hp.terminating_degree().is_some() {
            return legendre_p_form(form, nu, sign, s, x);
        }
    }
    Err(Error::NonTerminating(0.5 * (1.0 - x)))
}

/// Residuals of the polar ODE and of the associated Legendre equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeResiduals {
    /// `y'' + a cot(theta) y' + lambda (lambda + a) y`.
    pub polar: f64,
    /// `(1-x^2) h'' - 2x h' + (nu^2 + nu - s^2/(1-x^2)) h` with `x = cos theta`,
    /// `y = sin^s(theta) h(x)` and `nu = lambda - s`.
    pub associated: f64,
}

/// Evaluates both residuals from `y, y', y''` at polar angle `theta in (0, pi)`.
pub fn ode_residuals(theta: f64, y: f64, dy: f64, d2y: f64, a: f64, lambda: f64) -> Result<OdeResiduals> {
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(Error::InvalidParameter(format!("theta = {theta} outside (0, pi)")));
    }
    if !(a > -1.0 && a < 1.0) {
        return Err(Error::InvalidParameter(format!("a = {a} outside (-1, 1)")));
    }
    let s = 0.5 * (1.0 - a);
    let (sn, cs) = theta.sin_cos();
    let polar = d2y + a * cs / sn * dy + lambda * (lambda + a) * y;

    // Recover h, h', h'' at x = cos(theta) from y = sin^s h.
    let ss = sn.powf(s);
    let h = y / ss;
    let dh = (s * cs / sn * y - dy) / (ss * sn);
    let d2h = (d2y - s * (s - 1.0) * cs * cs / (sn * sn) * y + s * y + (2.0 * s + 1.0) * ss * cs * dh) / (ss * sn * sn);
    let nu = lambda - s;
    let x = cs;
    let associated = (1.0 - x * x) * d2h - 2.0 * x * dh + (nu * nu + nu - s * s / (1.0 - x * x)) * h;
    Ok(OdeResiduals { polar, associated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn gamma_known_values() {
        assert_relative_eq!(gamma_real(0.5).unwrap(), PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gamma_real(5.0).unwrap(), 24.0, max_relative = 1e-14);
        assert_relative_eq!(gamma_real(-0.5).unwrap(), -2.0 * PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gamma_real(1.5).unwrap(), 0.5 * PI.sqrt(), max_relative = 1e-14);
        assert!(matches!(gamma_real(-2.0), Err(Error::Pole(_))));
        assert_eq!(recip_gamma(-3.0), 0.0);
        assert_eq!(recip_gamma(0.0), 0.0);
    }

    #[test]
    fn pochhammer_basics() {
        assert_eq!(pochhammer(3.5, 0), 1.0);
        assert_eq!(pochhammer(2.0, 3), 24.0);
        assert_eq!(pochhammer(-2.0, 3), 0.0);
    }

    #[test]
    fn terminating_series() {
        // 1 + (-1)(2)/(0.5) * 0.25 = 0
        assert_eq!(hyp2f1(Hyp2F1::new(-1.0, 2.0, 0.5, 0.25)).unwrap(), 0.0);
        // Terminating sums are accepted for any z.
        let v = hyp2f1(Hyp2F1::new(-2.0, 1.0, 1.0, 3.0)).unwrap();
        assert_relative_eq!(v, 1.0 - 6.0 + 9.0, max_relative = 1e-15);
    }

    #[test]
    fn nonterminating_series() {
        assert!(matches!(hyp2f1(Hyp2F1::new(0.5, 0.5, 1.5, 1.2)), Err(Error::NonTerminating(_))));
        // 2F1(1, 1; 2; z) = -ln(1 - z)/z
        let z = 0.6;
        assert_relative_eq!(hyp2f1(Hyp2F1::new(1.0, 1.0, 2.0, z)).unwrap(), -(1.0f64 - z).ln() / z, max_relative = 1e-12);
        // 2F1(1/2, 1/2; 3/2; z^2) = asin(z)/z
        let x: f64 = 0.7;
        assert_relative_eq!(hyp2f1(Hyp2F1::new(0.5, 0.5, 1.5, x * x)).unwrap(), x.asin() / x, max_relative = 1e-12);
    }

    #[test]
    fn legendre_examples() {
        let v = legendre_p(1.0, OrderSign::Plus, 0.5, 0.0).unwrap();
        assert_relative_eq!(v, -1.0 / PI.sqrt(), max_relative = 1e-13);
        let a = legendre_p_form(LegendreForm::Ratio, 1.5, OrderSign::Plus, 0.5, 0.5).unwrap();
        let b = legendre_p_form(LegendreForm::Euler, 1.5, OrderSign::Plus, 0.5, 0.5).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
        assert_eq!(legendre_p(1.5, OrderSign::Plus, 0.5, 0.5).unwrap(), b);
        assert!(legendre_p(0.3, OrderSign::Plus, 0.4, 0.1).is_err());
    }

    #[test]
    fn ode_residual_for_half_angle_cosine() {
        // a = 0, lambda = 3/2: y = sqrt(2)|cos(theta/2)|(2 cos(theta) - 1) = sqrt(2) cos(3 theta / 2).
        for k in 1..20 {
            let t = PI * k as f64 / 20.0;
            let c = 2f64.sqrt();
            let y = c * (1.5 * t).cos();
            let dy = -1.5 * c * (1.5 * t).sin();
            let d2y = -2.25 * y;
            let r = ode_residuals(t, y, dy, d2y, 0.0, 1.5).unwrap();
            assert!(r.polar.abs() < 1e-12);
            assert!(r.associated.abs() < 1e-10, "{r:?}");
        }
    }
}
