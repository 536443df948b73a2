//! Explicit homogeneous solutions of `div(|x_{n+1}|^a grad u) = 0` in the plane and
//! their embeddings into higher dimension.
//!
//! Three families are provided, all even in the normal variable `t = x_{n+1}`:
//! `Phi_m` (polynomial, degree `m`), `Psi_m` (degree `m + s`, vanishing on a half-line)
//! and `Pi_m` (degree `m + 2s`, vanishing on the whole line `t = 0`).

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Point, ScalarField};
use crate::poly::PolynomialND;
use crate::special::pochhammer;

/// Which explicit family a profile belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Phi,
    Psi,
    /// `Psi_m(-x_1, t)`: contact on the opposite half-line.
    PsiReflected,
    Pi,
}

/// A family member placed along a unit direction `e` of the thin hyperplane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousProfile {
    pub family: Family,
    pub degree: u32,
    pub s: f64,
    /// Unit vector in the thin hyperplane (normal component zero).
    pub direction: Point,
    pub amplitude: f64,
}

impl HomogeneousProfile {
    pub fn new(family: Family, degree: u32, s: f64, direction: Point, amplitude: f64) -> Result<Self> {
        let p = HomogeneousProfile { family, degree, s, direction, amplitude };
        p.validate(3)?;
        Ok(p)
    }

    /// Homogeneity degree.
    pub fn lambda(&self) -> f64 {
        family_lambda(self.family, self.degree, self.s)
    }

    /// Whether the member has a non-negative trace and non-positive flux on the plane,
    /// i.e. is a global solution of the thin obstacle problem.
    pub fn obstacle_admissible(&self) -> bool {
        match self.family {
            Family::Phi | Family::Pi => self.degree.is_multiple_of(2),
            Family::Psi | Family::PsiReflected => self.degree % 2 == 1,
        }
    }

    fn validate(&self, ambient_dim: usize) -> Result<()> {
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::InvalidParameter(format!("s = {} outside (0, 1)", self.s)));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::InvalidParameter("non-finite amplitude".into()));
        }
        let e = self.direction;
        let nrm = (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt();
        if (nrm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("direction {e:?} is not a unit vector")));
        }
        if e[ambient_dim - 1] != 0.0 || e[ambient_dim..].iter().any(|&v| v != 0.0) {
            return Err(Error::InvalidParameter(format!("direction {e:?} is not tangential in dimension {ambient_dim}")));
        }
        Ok(())
    }

    /// Raw (unnormalised) value at an ambient point.
    pub fn eval_raw(&self, x: &Point, ambient_dim: usize) -> f64 {
        let n = ambient_dim - 1;
        let xe: f64 = (0..n).map(|k| x[k] * self.direction[k]).sum();
        let t = x[n].abs();
        self.amplitude * family_eval(self.family, self.degree, xe, t, self.s)
    }
}

fn family_lambda(family: Family, m: u32, s: f64) -> f64 {
    match family {
        Family::Phi => m as f64,
        Family::Psi | Family::PsiReflected => m as f64 + s,
        Family::Pi => m as f64 + 2.0 * s,
    }
}

fn family_eval(family: Family, m: u32, x1: f64, x2: f64, s: f64) -> f64 {
    match family {
        Family::Phi => phi_eval(m, x1, x2, s),
        Family::Psi => psi_eval(m, x1, x2, s),
        Family::PsiReflected => psi_eval(m, -x1, x2, s),
        Family::Pi => pi_eval(m, x1, x2, s),
    }
}

/// Coefficients `alpha_k` of `Phi_m = sum_k alpha_k x1^{m-2k} x2^{2k}`.
pub fn phi_coefficients(m: u32, s: f64) -> Vec<f64> {
    let mut out = vec![1.0];
    let mut k = 0;
    while 2 * (k + 1) <= m {
        let j = (m - 2 * k) as f64;
        let kk = (k + 1) as f64;
        let next = -j * (j - 1.0) / (4.0 * kk * (kk - s)) * out[k as usize];
        out.push(next);
        k += 1;
    }
    out
}

/// Coefficients `beta_k` of `Psi_m = (rho + x1)^s sum_k beta_k (rho - x1)^k rho^{m-k}`.
pub fn psi_coefficients(m: u32, s: f64) -> Vec<f64> {
    let mf = m as f64;
    (0..=m)
        .map(|k| {
            pochhammer(mf + 1.0, k) * pochhammer(-mf, k)
                / (2f64.powi(k as i32) * pochhammer(1.0, k) * pochhammer(1.0 - s, k))
        })
        .collect()
}

/// Coefficients `gamma_k` of `Pi = |x2|^{2s} sum_k gamma_k x2^{2k} Lap^k p`.
pub fn pi_coefficients(m: u32, s: f64) -> Vec<f64> {
    (0..=m / 2)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign / (4f64.powi(k as i32) * pochhammer(1.0, k) * pochhammer(1.0 + s, k))
        })
        .collect()
}

pub fn phi_eval(m: u32, x1: f64, x2: f64, s: f64) -> f64 {
    phi_coefficients(m, s)
        .iter()
        .enumerate()
        .map(|(k, c)| c * x1.powi((m - 2 * k as u32) as i32) * x2.powi(2 * k as i32))
        .sum()
}

/// `rho + x1` and `rho - x1` without cancellation.
fn rho_pm(x1: f64, x2: f64) -> (f64, f64, f64) {
    let rho = x1.hypot(x2);
    let x22 = x2 * x2;
    if x1 >= 0.0 {
        let p = rho + x1;
        (rho, p, if p > 0.0 { x22 / p } else { 0.0 })
    } else {
        let m = rho - x1;
        (rho, x22 / m, m)
    }
}

pub fn psi_eval(m: u32, x1: f64, x2: f64, s: f64) -> f64 {
    let (rho, plus, minus) = rho_pm(x1, x2);
    if plus <= 0.0 {
        return 0.0;
    }
    let sum: f64 = psi_coefficients(m, s)
        .iter()
        .enumerate()
        .map(|(k, b)| b * minus.powi(k as i32) * rho.powi((m - k as u32) as i32))
        .sum();
    plus.powf(s) * sum
}

/// `Pi_m` built from `p = x1^m`.
pub fn pi_eval(m: u32, x1: f64, x2: f64, s: f64) -> f64 {
    let t = x2.abs();
    let sum: f64 = pi_coefficients(m, s)
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let k = k as u32;
            let falling: f64 = (0..2 * k).map(|i| (m - i) as f64).product();
            g * t.powi(2 * k as i32) * falling * x1.powi((m - 2 * k) as i32)
        })
        .sum();
    t.powf(2.0 * s) * sum
}

/// `Pi` built from a homogeneous polynomial `p` on the thin hyperplane.
pub fn pi_eval_poly(p: &PolynomialND, xprime: &[f64], t: f64, s: f64) -> f64 {
    let t = t.abs();
    let mut lap = p.clone();
    let mut acc = 0.0;
    for (k, g) in pi_coefficients(p.degree(), s).iter().enumerate() {
        acc += g * t.powi(2 * k as i32) * lap.eval(xprime);
        lap = lap.laplacian();
    }
    t.powf(2.0 * s) * acc
}

/// A trace `theta -> F(cos theta, sin theta)` on the upper unit half-circle with its first
/// two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarTrace {
    pub y: f64,
    pub dy: f64,
    pub d2y: f64,
}

/// Value and derivatives of `cos^p(theta) sin^q(theta)`.
fn trig_monomial(p: i32, q: f64, c: f64, sn: f64) -> (f64, f64, f64) {
    let pw = |b: f64, e: f64, coef: f64| if coef == 0.0 { 0.0 } else { coef * b.powf(e) };
    let pf = p as f64;
    let f = pw(c, pf, 1.0) * pw(sn, q, 1.0);
    let d1 = -pw(c, pf - 1.0, pf) * pw(sn, q + 1.0, 1.0) + pw(c, pf + 1.0, q) * pw(sn, q - 1.0, 1.0);
    let d2 = pw(c, pf - 2.0, pf * (pf - 1.0)) * pw(sn, q + 2.0, 1.0)
        - pw(c, pf, pf * (q + 1.0) + q * (pf + 1.0)) * pw(sn, q, 1.0)
        + pw(c, pf + 2.0, q * (q - 1.0)) * pw(sn, q - 2.0, 1.0);
    (f, d1, d2)
}

/// Closed-form trace of a raw family member (for `Pi`, with `p = x1^m`), `theta in (0, pi)`.
pub fn polar_trace(family: Family, m: u32, s: f64, theta: f64) -> PolarTrace {
    let (sn, c) = theta.sin_cos();
    let mut out = PolarTrace { y: 0.0, dy: 0.0, d2y: 0.0 };
    let mut add = |coef: f64, p: i32, q: f64| {
        let (f, d1, d2) = trig_monomial(p, q, c, sn);
        out.y += coef * f;
        out.dy += coef * d1;
        out.d2y += coef * d2;
    };
    match family {
        Family::Phi => {
            for (k, a) in phi_coefficients(m, s).iter().enumerate() {
                add(*a, (m - 2 * k as u32) as i32, 2.0 * k as f64);
            }
        }
        Family::Pi => {
            for (k, g) in pi_coefficients(m, s).iter().enumerate() {
                let k = k as u32;
                let falling: f64 = (0..2 * k).map(|i| (m - i) as f64).product();
                add(g * falling, (m - 2 * k) as i32, 2.0 * s + 2.0 * k as f64);
            }
        }
        Family::Psi | Family::PsiReflected => {
            // y = g(c) with g(c) = (1+c)^s P(c), P(c) = sum_k beta_k (1-c)^k; for the
            // reflected member theta -> pi - theta flips the sign of c and of y'.
            let (cc, flip) = if family == Family::Psi { (c, 1.0) } else { (-c, -1.0) };
            let betas = psi_coefficients(m, s);
            let (mut p0, mut p1, mut p2) = (0.0, 0.0, 0.0);
            let w = 1.0 - cc;
            for (k, b) in betas.iter().enumerate() {
                let kf = k as f64;
                p0 += b * w.powi(k as i32);
                if k >= 1 {
                    p1 -= b * kf * w.powi(k as i32 - 1);
                }
                if k >= 2 {
                    p2 += b * kf * (kf - 1.0) * w.powi(k as i32 - 2);
                }
            }
            let v = 1.0 + cc;
            let g0 = v.powf(s) * p0;
            let g1 = s * v.powf(s - 1.0) * p0 + v.powf(s) * p1;
            let g2 = s * (s - 1.0) * v.powf(s - 2.0) * p0 + 2.0 * s * v.powf(s - 1.0) * p1 + v.powf(s) * p2;
            out.y = g0;
            out.dy = -g1 * sn * flip;
            out.d2y = g2 * sn * sn - g1 * cc;
        }
    }
    out
}

/// Tanh-sinh quadrature of `f` over `(lo, hi)`; `f` receives the point and its distances
/// to both endpoints, computed without cancellation.
fn tanh_sinh<F: Fn(f64, f64, f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
    let half = 0.5 * (hi - lo);
    let tmax = 4.0;
    let node = |t: f64| -> (f64, f64) {
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        let gap = 2.0 * e / (1.0 + e); // 1 - |tanh(u)|
        let w = std::f64::consts::FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
        (gap, w)
    };
    let eval = |t: f64| -> f64 {
        let (gap, w) = node(t);
        let d = half * gap;
        if d <= 0.0 {
            return 0.0;
        }
        let (x, dl, dr) = if t >= 0.0 { (hi - d, hi - lo - d, d) } else { (lo + d, d, hi - lo - d) };
        w * f(x, dl, dr)
    };
    let mut step = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * step <= tmax {
        let t = k as f64 * step;
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut est = sum * step * half;
    for _ in 0..10 {
        step *= 0.5;
        let mut k = 1;
        while k as f64 * step <= tmax {
            let t = k as f64 * step;
            sum += eval(t) + eval(-t);
            k += 2;
        }
        let next = sum * step * half;
        let done = (next - est).abs() <= 1e-15 * next.abs();
        est = next;
        if done {
            break;
        }
    }
    est
}

/// `H(0, 1)` in the plane of the raw family member (with `a = 1 - 2s`).
fn raw_height(family: Family, m: u32, s: f64) -> f64 {
    let a = 1.0 - 2.0 * s;
    let lambda = family_lambda(family, m, s);
    let e = 2.0 * lambda + a + 1.0;
    let radial = (1.0 - 0.5f64.powf(e)) / e;
    let angular = tanh_sinh(
        |theta, dl, dr| {
            let y = polar_trace(family, m, s, theta).y;
            y * y * dl.min(dr).sin().powf(a)
        },
        0.0,
        std::f64::consts::PI,
    );
    // Factor 2 from the profile of the cutoff derivative and 2 for the lower half-plane.
    4.0 * radial * angular
}

type NormKey = (Family, u32, u64);
static NORM_CACHE: OnceLock<RwLock<HashMap<NormKey, f64>>> = OnceLock::new();

/// Factor `1 / sqrt(H(0,1))` turning a raw family member into a unit-height profile.
pub fn normalization(family: Family, m: u32, s: f64) -> f64 {
    let key = (if family == Family::PsiReflected { Family::Psi } else { family }, m, s.to_bits());
    let cache = NORM_CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(v) = cache.read().expect("cache lock").get(&key) {
        return *v;
    }
    let v = 1.0 / raw_height(key.0, m, s).sqrt();
    cache.write().expect("cache lock").insert(key, v);
    v
}

/// Family and degree of the admissible homogeneous solution with degree `lambda`.
pub fn classify_lambda(lambda: f64, s: f64) -> Option<(Family, u32)> {
    let near_int = |x: f64| {
        let r = x.round();
        ((x - r).abs() < 1e-9 && r >= 0.0).then_some(r as u32)
    };
    if let Some(k) = near_int(lambda / 2.0) {
        if k >= 1 {
            return Some((Family::Phi, 2 * k));
        }
    }
    if let Some(k) = near_int((lambda - s + 1.0) / 2.0) {
        if k >= 1 {
            return Some((Family::Psi, 2 * k - 1));
        }
    }
    if let Some(k) = near_int((lambda - 2.0 * s) / 2.0) {
        if k >= 1 {
            return Some((Family::Pi, 2 * k));
        }
    }
    None
}

/// Sign making a family member obstacle-admissible; `Pi` members change sign so that
/// their weighted flux through the plane is non-positive.
fn admissible_sign(family: Family) -> f64 {
    if family == Family::Pi {
        -1.0
    } else {
        1.0
    }
}

/// The two-dimensional homogeneous solution of degree `lambda in {2m, 2m-1+s, 2m+2s}`
/// normalised to `H(0, 1) = 1`.
pub fn h_lambda_eval(lambda: f64, x1: f64, x2: f64, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!("s = {s} outside (0, 1)")));
    }
    let (family, m) = classify_lambda(lambda, s)
        .ok_or_else(|| Error::InvalidParameter(format!("lambda = {lambda} is not an admissible degree for s = {s}")))?;
    Ok(admissible_sign(family) * normalization(family, m, s) * family_eval(family, m, x1, x2, s))
}

/// Samples a profile on a grid. With `normalized`, the member is scaled to unit height
/// (and `Pi` members take the admissible sign); otherwise the raw member is used.
pub fn embed_profile(profile: &HomogeneousProfile, spec: GridSpec, normalized: bool) -> Result<ScalarField> {
    profile.validate(spec.ambient_dim())?;
    if (profile.s - spec.s()).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "profile s = {} does not match grid s = {}",
            profile.s,
            spec.s()
        )));
    }
    let scale = if normalized {
        admissible_sign(profile.family) * normalization(profile.family, profile.degree, profile.s)
    } else {
        1.0
    };
    let dim = spec.ambient_dim();
    ScalarField::sample(spec, |x| scale * profile.eval_raw(x, dim))
}

/// Analytic description of a subset of the thin hyperplane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ThinSet {
    Empty,
    /// The whole thin hyperplane.
    Plane,
    /// `{x in plane : x . normal <= 0}`.
    HalfPlane { normal: Point },
    /// `{x in plane : x . normal = 0}`.
    Subspace { normal: Point },
}

impl ThinSet {
    /// Membership of a plane point, with `tol` slack in the defining inequality.
    pub fn contains(&self, x: &Point, tol: f64) -> bool {
        let dot = |n: &Point| x[0] * n[0] + x[1] * n[1] + x[2] * n[2];
        match self {
            ThinSet::Empty => false,
            ThinSet::Plane => true,
            ThinSet::HalfPlane { normal } => dot(normal) <= tol,
            ThinSet::Subspace { normal } => dot(normal).abs() <= tol,
        }
    }
}

/// Contact set, free boundary, nodal set and spine of a homogeneous profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSets {
    pub contact: ThinSet,
    pub free_boundary: ThinSet,
    pub nodal: ThinSet,
    pub spine: ThinSet,
}

/// Set structure of an obstacle-admissible profile of positive degree.
pub fn profile_sets(profile: &HomogeneousProfile) -> Result<ProfileSets> {
    if !profile.obstacle_admissible() || profile.degree == 0 {
        return Err(Error::InvalidParameter(format!(
            "{:?} of degree {} is not an admissible profile",
            profile.family, profile.degree
        )));
    }
    let e = profile.direction;
    let line = ThinSet::Subspace { normal: e };
    Ok(match profile.family {
        Family::Phi => ProfileSets { contact: line, free_boundary: line, nodal: line, spine: line },
        Family::Psi | Family::PsiReflected => {
            let normal = if profile.family == Family::Psi { e } else { [-e[0], -e[1], -e[2]] };
            ProfileSets { contact: ThinSet::HalfPlane { normal }, free_boundary: line, nodal: line, spine: line }
        }
        Family::Pi => ProfileSets { contact: ThinSet::Plane, free_boundary: ThinSet::Empty, nodal: line, spine: line },
    })
}

/// One summand `p_k(x'') F_j(+-x.e, t)` of a superposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionTerm {
    /// Harmonic homogeneous polynomial in the thin coordinates orthogonal to `e`.
    pub poly: PolynomialND,
    pub family: Family,
    pub degree: u32,
}

/// A sum of harmonic polynomials in `x''` times two-dimensional profiles in `(x.e, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Superposition {
    ambient_dim: usize,
    s: f64,
    direction: Point,
    terms: Vec<SuperpositionTerm>,
}

impl Superposition {
    pub fn eval(&self, x: &Point) -> f64 {
        let n = self.ambient_dim - 1;
        let e = self.direction;
        let xe: f64 = (0..n).map(|k| x[k] * e[k]).sum();
        let xpp: Vec<f64> = if n == 2 { vec![-e[1] * x[0] + e[0] * x[1]] } else { vec![] };
        let t = x[n].abs();
        self.terms
            .iter()
            .map(|term| term.poly.eval(&xpp) * family_eval(term.family, term.degree, xe, t, self.s))
            .sum()
    }

    /// Homogeneity degree of the sum.
    pub fn lambda(&self) -> f64 {
        let t = &self.terms[0];
        t.poly.degree() as f64 + family_lambda(t.family, t.degree, self.s)
    }
}

/// Validates and assembles a superposition in dimension `ambient_dim` along `direction`.
pub fn superpose_general(
    ambient_dim: usize,
    direction: Point,
    s: f64,
    terms: Vec<SuperpositionTerm>,
) -> Result<Superposition> {
    let probe = HomogeneousProfile { family: Family::Phi, degree: 0, s, direction, amplitude: 1.0 };
    if ambient_dim != 2 && ambient_dim != 3 {
        return Err(Error::InvalidParameter(format!("ambient_dim = {ambient_dim}")));
    }
    probe.validate(ambient_dim)?;
    let first = terms.first().ok_or_else(|| Error::InvalidParameter("empty superposition".into()))?;
    let psi_kind = |f: Family| matches!(f, Family::Psi | Family::PsiReflected);
    let total = first.poly.degree() + first.degree;
    for t in &terms {
        if t.poly.nvars() != ambient_dim - 2 {
            return Err(Error::InvalidParameter(format!(
                "polynomial in {} variables, expected {}",
                t.poly.nvars(),
                ambient_dim - 2
            )));
        }
        if t.family == Family::Pi || psi_kind(t.family) != psi_kind(first.family) {
            return Err(Error::InvalidParameter("terms must all be Phi or all be Psi type".into()));
        }
        if t.poly.degree() + t.degree != total {
            return Err(Error::InvalidParameter("terms have different homogeneity".into()));
        }
        if !t.poly.is_harmonic(1e-12) {
            return Err(Error::InvalidParameter("polynomial factor is not harmonic".into()));
        }
    }
    Ok(Superposition { ambient_dim, s, direction, terms })
}

/// Pointwise `Lap u + (a/t) du/dt` at an off-plane point using fourth-order central
/// differences with step `step`.
pub fn pde_residual_at<F: Fn(&Point) -> f64>(f: F, x: &Point, ambient_dim: usize, a: f64, step: f64) -> f64 {
    let n = ambient_dim - 1;
    let mut lap = 0.0;
    let mut dt = 0.0;
    let f0 = f(x);
    for k in 0..ambient_dim {
        let at = |d: f64| {
            let mut y = *x;
            y[k] += d;
            f(&y)
        };
        let (p1, m1, p2, m2) = (at(step), at(-step), at(2.0 * step), at(-2.0 * step));
        lap += (-p2 + 16.0 * p1 - 30.0 * f0 + 16.0 * m1 - m2) / (12.0 * step * step);
        if k == n {
            dt = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * step);
        }
    }
    lap + a / x[n] * dt
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ode_residuals;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn psi_one_matches_closed_form() {
        // s = 1/2: Psi_1 = sqrt(rho + x1) (2 x1 - rho) = sqrt(2) rho^{3/2} cos(3 theta / 2).
        for &(x1, x2) in &[(0.3, 0.4), (-0.5, 0.2), (0.0, 1.0), (-1.0, 0.0), (1.0, 0.0)] {
            let rho: f64 = x1 * x1 + x2 * x2;
            let rho = rho.sqrt();
            let th = f64::atan2(x2, x1);
            let exact = 2f64.sqrt() * rho.powf(1.5) * (1.5 * th).cos();
            assert_relative_eq!(psi_eval(1, x1, x2, 0.5), exact, epsilon = 1e-14);
        }
        assert_eq!(psi_eval(3, -0.7, 0.0, 0.3), 0.0);
    }

    #[test]
    fn coefficient_recursions() {
        let a = phi_coefficients(4, 0.5);
        // Phi_4 at s = 1/2 is Re (x1 + i x2)^4 = x1^4 - 6 x1^2 x2^2 + x2^4.
        assert_eq!(a.len(), 3);
        assert_relative_eq!(a[1], -6.0, epsilon = 1e-14);
        assert_relative_eq!(a[2], 1.0, epsilon = 1e-14);
        let b = psi_coefficients(1, 0.5);
        assert_relative_eq!(b[1], -2.0, epsilon = 1e-14);
        let g = pi_coefficients(2, 0.3);
        assert_relative_eq!(g[1], -1.0 / (4.0 * 1.3), epsilon = 1e-14);
    }

    #[test]
    fn polar_traces_solve_the_ode() {
        for &s in &[0.3, 0.5, 0.75] {
            let a = 1.0 - 2.0 * s;
            for family in [Family::Phi, Family::Psi, Family::PsiReflected, Family::Pi] {
                for m in 0..5 {
                    let lambda = family_lambda(family, m, s);
                    for k in 1..20 {
                        let th = PI * k as f64 / 20.0;
                        let tr = polar_trace(family, m, s, th);
                        let direct = family_eval(family, m, th.cos(), th.sin(), s);
                        assert_relative_eq!(tr.y, direct, epsilon = 1e-12);
                        let r = ode_residuals(th, tr.y, tr.dy, tr.d2y, a, lambda).unwrap();
                        assert!(r.polar.abs() < 1e-9, "{family:?} m={m} s={s}: {r:?}");
                        assert!(r.associated.abs() < 1e-8, "{family:?} m={m} s={s}: {r:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn lambda_classification() {
        assert_eq!(classify_lambda(1.5, 0.5), Some((Family::Psi, 1)));
        assert_eq!(classify_lambda(2.0, 0.3), Some((Family::Phi, 2)));
        assert_eq!(classify_lambda(2.6, 0.3), Some((Family::Pi, 2)));
        assert_eq!(classify_lambda(3.3, 0.3), Some((Family::Psi, 3)));
        assert_eq!(classify_lambda(1.0, 0.3), None);
        assert!(h_lambda_eval(1.0, 0.1, 0.2, 0.3).is_err());
    }

    #[test]
    fn normalization_matches_direct_polar_integral() {
        // Independent check by composite midpoint rule in polar coordinates.
        for (family, m, s) in [(Family::Psi, 1, 0.5), (Family::Phi, 2, 0.3), (Family::Pi, 2, 0.75)] {
            let a = 1.0 - 2.0 * s;
            let nr = 400;
            let nt = 4000;
            let mut acc = 0.0;
            for i in 0..nr {
                let r = 0.5 + 0.5 * (i as f64 + 0.5) / nr as f64;
                for j in 0..nt {
                    let th = PI * (j as f64 + 0.5) / nt as f64;
                    let v = family_eval(family, m, r * th.cos(), r * th.sin(), s);
                    acc += 2.0 * v * v / r * (r * th.sin()).powf(a) * r;
                }
            }
            let h = 2.0 * acc * (0.5 / nr as f64) * (PI / nt as f64);
            let n = normalization(family, m, s);
            assert_relative_eq!(n * n * h, 1.0, max_relative = 2e-3);
        }
    }

    #[test]
    fn admissible_sets() {
        let e = [1.0, 0.0, 0.0];
        let psi = HomogeneousProfile::new(Family::Psi, 1, 0.5, e, 1.0).unwrap();
        let sets = profile_sets(&psi).unwrap();
        assert!(sets.contact.contains(&[-0.3, 0.2, 0.0], 0.0));
        assert!(!sets.contact.contains(&[0.3, 0.2, 0.0], 0.0));
        let pi = HomogeneousProfile::new(Family::Pi, 0, 0.5, e, 1.0).unwrap();
        assert!(profile_sets(&pi).is_err());
        let phi1 = HomogeneousProfile::new(Family::Phi, 1, 0.5, e, 1.0).unwrap();
        assert!(profile_sets(&phi1).is_err());
    }

    #[test]
    fn superposition_validation() {
        let x = PolynomialND::power(1, 0, 1, 1.0);
        let c = PolynomialND::constant(1, 1.0);
        let e2 = [0.0, 1.0, 0.0];
        let u = superpose_general(
            3,
            e2,
            0.5,
            vec![
                SuperpositionTerm { poly: x.clone(), family: Family::Psi, degree: 0 },
                SuperpositionTerm { poly: c.clone(), family: Family::Psi, degree: 1 },
            ],
        )
        .unwrap();
        assert_relative_eq!(u.lambda(), 1.5);
        // x'' = x . e_perp with e_perp = (-1, 0) for e = e_2.
        let p = [0.2, 0.3, 0.4];
        let expect = -0.2 * psi_eval(0, 0.3, 0.4, 0.5) + psi_eval(1, 0.3, 0.4, 0.5);
        assert_relative_eq!(u.eval(&p), expect, epsilon = 1e-14);
        let nonharm = PolynomialND::power(1, 0, 2, 1.0);
        assert!(superpose_general(3, e2, 0.5, vec![SuperpositionTerm { poly: nonharm, family: Family::Phi, degree: 0 }]).is_err());
        let bad = vec![SuperpositionTerm { poly: x, family: Family::Pi, degree: 0 }];
        assert!(superpose_general(3, e2, 0.5, bad).is_err());
    }
}
