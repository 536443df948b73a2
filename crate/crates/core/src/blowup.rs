//! Normalised rescalings, fits of blow-ups against the two-variable homogeneous
//! solutions, spines and strata.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frequency::{frequency, frequency_components};
use crate::geometry::ThinPointSet;
use crate::grid::{dist, GridSpec, Point, ScalarField};
use crate::linalg::{least_squares, symmetric_eigen};
use crate::par;
use crate::poly::PolynomialND;
use crate::profiles::{classify_lambda, h_lambda_eval, pi_eval_poly, Family};

/// Largest number of cells per unit length on a rescaled grid.
const MAX_RESCALED_CELLS: usize = 48;

/// Cells per unit length used when rescaling by `r` a grid of spacing `h`.
pub fn rescaled_cells(r: f64, h: f64) -> usize {
    ((r / h).round() as usize).clamp(8, MAX_RESCALED_CELLS)
}

/// Samples `u_{x0,r}(y) = r^{(n+a)/2} u(x0 + r y) / H(x0, r)^{1/2}` on a grid of
/// half-width `1 + 2h'` with `h' = 1 / cells`.
pub fn rescale_field_with(field: &ScalarField, x0: &Point, r: f64, cells: usize) -> Result<ScalarField> {
    let g = field.spec();
    let h = frequency_components(field, x0, r)?.h;
    if h <= 1e-300 {
        return Err(Error::DegenerateHeight(h));
    }
    let hp = 1.0 / cells as f64;
    let half = (cells + 2) as f64 * hp;
    let dim = g.ambient_dim();
    let lim = g.half_width() * (1.0 + 1e-12);
    if (0..dim).any(|k| x0[k].abs() + r * half > lim) {
        return Err(Error::OutOfDomain(*x0));
    }
    let out = GridSpec::new(dim, half, hp, g.a())?;
    let n = g.thin_dim() as f64;
    let scale = r.powf((n + g.a()) / 2.0) / h.sqrt();
    let vals = par::map_range(out.node_count(), |i| {
        let y = out.node_coords(i);
        let mut p = [0.0; 3];
        for k in 0..dim {
            p[k] = x0[k] + r * y[k];
        }
        field.interpolate(&p).map(|v| scale * v)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    ScalarField::from_values(out, vals)
}

/// [`rescale_field_with`] at the resolution of the source grid.
pub fn rescale_field(field: &ScalarField, x0: &Point, r: f64) -> Result<ScalarField> {
    rescale_field_with(field, x0, r, rescaled_cells(r, field.spec().spacing()))
}

/// Nearest homogeneity degree from `{2m, 2m-1+s, 2m+2s : m >= 1}` within `window`.
pub fn classify_frequency(lambda: f64, s: f64, window: f64) -> Option<(f64, Family, u32)> {
    let mut best: Option<f64> = None;
    for m in 1..=16u32 {
        let m = m as f64;
        for c in [2.0 * m, 2.0 * m - 1.0 + s, 2.0 * m + 2.0 * s] {
            if (c - lambda).abs() <= window && best.is_none_or(|b| (c - lambda).abs() < (b - lambda).abs()) {
                best = Some(c);
            }
        }
    }
    let l = best?;
    let (family, m) = classify_lambda(l, s)?;
    Some((l, family, m))
}

/// Fit of one rescaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusFit {
    pub r: f64,
    /// `I(x0, r)`.
    pub frequency: f64,
    pub residual: f64,
    pub direction: Point,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupFit {
    pub center: Point,
    /// `I(x0, r_min)`.
    pub lambda_estimate: f64,
    pub classified_lambda: Option<f64>,
    pub family: Option<Family>,
    pub degree: Option<u32>,
    pub direction: Point,
    pub amplitude: f64,
    /// Relative weighted L2 mismatch on the unit ball at `r_min`.
    pub residual: f64,
    /// One entry per radius, in the order given.
    pub per_radius: Vec<RadiusFit>,
}

/// Samples of a rescaled field on the closed unit ball with quadrature weights for
/// `|x_{n+1}|^a dx`.
struct Samples {
    dim: usize,
    points: Vec<Point>,
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl Samples {
    fn new(v: &ScalarField) -> Self {
        let g = v.spec();
        let hp = g.spacing();
        let a = g.a();
        let dim = g.ambient_dim();
        let na = g.normal_axis();
        let layer = |j: usize| {
            let lo = if j == 0 { 0.0 } else { (j as f64 - 0.5) * hp };
            let hi = (j as f64 + 0.5) * hp;
            (hi.powf(1.0 + a) - lo.powf(1.0 + a)) / (1.0 + a)
        };
        let cell = hp.powi(dim as i32 - 1);
        let mut s = Samples { dim, points: Vec::new(), values: Vec::new(), weights: Vec::new() };
        for i in 0..g.node_count() {
            let p = g.node_coords(i);
            if crate::grid::norm(&p, dim) <= 1.0 {
                s.points.push(p);
                s.values.push(v.values()[i]);
                s.weights.push(cell * layer(g.multi(i)[na]));
            }
        }
        s
    }

    fn dot(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).zip(&self.weights).map(|((x, y), w)| x * y * w).sum()
    }

    /// Best amplitude and relative residual against one basis function.
    fn fit_single(&self, basis: &[f64]) -> (f64, f64) {
        let bb = self.dot(basis, basis);
        let vv = self.dot(&self.values, &self.values);
        let c = if bb > 0.0 { self.dot(&self.values, basis) / bb } else { 0.0 };
        let rr: f64 = self
            .values
            .iter()
            .zip(basis)
            .zip(&self.weights)
            .map(|((v, b), w)| (v - c * b).powi(2) * w)
            .sum();
        (c, (rr / vv).sqrt())
    }
}

fn direction_of(alpha: f64) -> Point {
    [alpha.cos(), alpha.sin(), 0.0]
}

/// Fits `c h_lambda(y . e(alpha), y_{n+1})` over angle and amplitude.
fn fit_two_variable(smp: &Samples, lambda: f64, s: f64) -> Result<RadiusFit> {
    let n = smp.dim - 1;
    let eval_at = |alpha: f64| -> Result<(f64, f64)> {
        let e = direction_of(alpha);
        let basis = smp
            .points
            .iter()
            .map(|p| {
                let xe: f64 = (0..n).map(|k| p[k] * e[k]).sum();
                h_lambda_eval(lambda, xe, p[n], s)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(smp.fit_single(&basis))
    };
    let pi = std::f64::consts::PI;
    let step = if n == 1 { pi } else { pi / 90.0 };
    let count = (2.0 * pi / step).round() as usize;
    let coarse = par::map_range(count, |k| eval_at(k as f64 * step).map(|(c, r)| (k as f64 * step, c, r)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut best = coarse.iter().copied().min_by(|x, y| x.2.total_cmp(&y.2)).expect("non-empty sweep");
    if n == 2 {
        // Golden-section refinement on the bracket around the coarse minimiser.
        let g = 0.5 * (5.0f64.sqrt() - 1.0);
        let (mut lo, mut hi) = (best.0 - step, best.0 + step);
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let mut f1 = eval_at(x1)?;
        let mut f2 = eval_at(x2)?;
        while hi - lo > 1e-5 {
            if f1.1 < f2.1 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = eval_at(x1)?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = eval_at(x2)?;
            }
        }
        let (x, f) = if f1.1 < f2.1 { (x1, f1) } else { (x2, f2) };
        if f.1 < best.2 {
            best = (x, f.0, f.1);
        }
    }
    let (mut alpha, mut c) = (best.0, best.1);
    if c < 0.0 && classify_lambda(lambda, s).is_some_and(|(f, m)| f == Family::Phi && m % 2 == 1) {
        alpha += pi;
        c = -c;
    }
    let alpha = alpha.rem_euclid(2.0 * pi);
    Ok(RadiusFit { r: 0.0, frequency: lambda, residual: best.2, direction: direction_of(alpha), amplitude: c })
}

/// Least-squares fit by `Pi` members built from every monomial of degree `m` on the plane.
fn fit_pi(smp: &Samples, m: u32, s: f64) -> Result<RadiusFit> {
    let n = smp.dim - 1;
    let monomials: Vec<PolynomialND> = if n == 1 {
        vec![PolynomialND::power(1, 0, m, 1.0)]
    } else {
        (0..=m).map(|i| PolynomialND::homogeneous(2, m, [(vec![m - i, i], 1.0)])).collect::<Result<Vec<_>>>()?
    };
    let basis: Vec<Vec<f64>> =
        monomials.iter().map(|q| smp.points.iter().map(|p| pi_eval_poly(q, &p[..n], p[n], s)).collect()).collect();
    let k = basis.len();
    let rows: Vec<Vec<f64>> = (0..smp.points.len())
        .map(|i| {
            let w = smp.weights[i].sqrt();
            let mut row: Vec<f64> = basis.iter().map(|b| w * b[i]).collect();
            row.push(w * smp.values[i]);
            row
        })
        .collect();
    let coef = least_squares(&rows, k).ok_or_else(|| Error::InvalidParameter("singular Pi fit".into()))?;
    let fitted: Vec<f64> = (0..smp.points.len()).map(|i| (0..k).map(|j| coef[j] * basis[j][i]).sum()).collect();
    let diff: Vec<f64> = smp.values.iter().zip(&fitted).map(|(v, f)| v - f).collect();
    let residual = (smp.dot(&diff, &diff) / smp.dot(&smp.values, &smp.values)).sqrt();
    let p_at = |alpha: f64| -> f64 {
        let e = direction_of(alpha);
        (0..k).map(|j| coef[j] * monomials[j].eval(&e[..n])).sum()
    };
    let (alpha, amp) = if n == 1 {
        (0.0, p_at(0.0))
    } else {
        (0..360)
            .map(|d| (d as f64).to_radians())
            .map(|al| (al, p_at(al)))
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .expect("non-empty")
    };
    Ok(RadiusFit { r: 0.0, frequency: 2.0 * s + m as f64, residual, direction: direction_of(alpha), amplitude: amp })
}

/// Fit of `u_{x0,r}` for one radius against the classified family, if any.
fn fit_radius(field: &ScalarField, x0: &Point, r: f64, class: Option<(f64, Family, u32)>) -> Result<RadiusFit> {
    let s = field.spec().s();
    let freq = frequency(field, x0, r)?;
    let Some((lambda, family, m)) = class else {
        return Ok(RadiusFit { r, frequency: freq, residual: 1.0, direction: [1.0, 0.0, 0.0], amplitude: 0.0 });
    };
    let v = rescale_field(field, x0, r)?;
    let smp = Samples::new(&v);
    let fit = if family == Family::Pi { fit_pi(&smp, m, s)? } else { fit_two_variable(&smp, lambda, s)? };
    Ok(RadiusFit { r, frequency: freq, ..fit })
}

/// Blow-up analysis at a free-boundary point over decreasing radii. The frequency at
/// the last radius is the degree estimate.
pub fn blowup_fit(field: &ScalarField, fb: &ThinPointSet, x0: &Point, radii: &[f64]) -> Result<BlowupFit> {
    if !fb.is_free_boundary(x0) {
        return Err(Error::NotFreeBoundary(*x0));
    }
    if radii.is_empty() || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("radii must be non-empty and strictly decreasing".into()));
    }
    let r_min = *radii.last().expect("non-empty");
    let lambda_estimate = frequency(field, x0, r_min)?;
    let class = classify_frequency(lambda_estimate, field.spec().s(), 0.1);
    let per_radius = radii.iter().map(|&r| fit_radius(field, x0, r, class)).collect::<Result<Vec<_>>>()?;
    let last = *per_radius.last().expect("non-empty");
    Ok(BlowupFit {
        center: *x0,
        lambda_estimate,
        classified_lambda: class.map(|c| c.0),
        family: class.map(|c| c.1),
        degree: class.map(|c| c.2),
        direction: last.direction,
        amplitude: last.amplitude,
        residual: last.residual,
        per_radius,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    /// Degree `1 + s`.
    Regular,
    /// Degree `2m`.
    Singular,
    /// Degree `2m - 1 + s` with `m >= 2`, or `2m + 2s`.
    Other,
    Unclassified,
}

pub fn stratum_of(lambda: f64, s: f64) -> Stratum {
    match classify_frequency(lambda, s, 0.1) {
        None => Stratum::Unclassified,
        Some((_, Family::Phi, _)) => Stratum::Singular,
        Some((_, Family::Psi, 1)) => Stratum::Regular,
        Some(_) => Stratum::Other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpineOptions {
    /// Radius at which frequencies are compared.
    pub r_min: f64,
    /// Candidate nodes are taken within this distance of the centre.
    pub window: f64,
    /// Allowed frequency difference to the centre.
    pub tolerance: f64,
    /// Candidates are thinned to at most this many.
    pub max_candidates: usize,
}

impl SpineOptions {
    pub fn new(r_min: f64, window: f64) -> Self {
        SpineOptions { r_min, window, tolerance: 0.05, max_candidates: 400 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpineStratum {
    pub center: Point,
    pub lambda_estimate: f64,
    pub spine_points: Vec<Point>,
    pub spine_dim: usize,
    pub stratum: Stratum,
}

/// Nodal points near `x0` sharing its frequency at `r_min`, the dimension of their
/// span, and the stratum of `x0`.
pub fn spine_and_stratum(field: &ScalarField, sets: &ThinPointSet, x0: &Point, opts: SpineOptions) -> Result<SpineStratum> {
    let g = field.spec();
    let lambda_estimate = frequency(field, x0, opts.r_min)?;
    let mut cand: Vec<Point> = sets
        .nodal_points()
        .into_iter()
        .filter(|y| dist(y, x0) <= opts.window + 1e-12 && g.ball_fits(y, opts.r_min) && dist(y, x0) > 0.0)
        .collect();
    if cand.len() > opts.max_candidates {
        let stride = cand.len().div_ceil(opts.max_candidates);
        cand = cand.into_iter().step_by(stride).collect();
    }
    let freqs = par::map_slice(&cand, |y| frequency(field, y, opts.r_min));
    let mut spine_points = vec![*x0];
    for (y, f) in cand.iter().zip(freqs) {
        // A vanishing height means the node sits in a region where u is identically zero.
        if let Ok(f) = f {
            if (f - lambda_estimate).abs() <= opts.tolerance {
                spine_points.push(*y);
            }
        }
    }
    let spine_dim = spread_rank(&spine_points, g.ambient_dim(), 2.0 * g.spacing());
    Ok(SpineStratum { center: *x0, lambda_estimate, spine_points, spine_dim, stratum: stratum_of(lambda_estimate, g.s()) })
}

/// Number of principal standard deviations of a point cloud exceeding `floor`.
pub fn spread_rank(points: &[Point], dim: usize, floor: f64) -> usize {
    if points.len() < 2 {
        return 0;
    }
    let n = points.len() as f64;
    let mut bar = [0.0; 3];
    for p in points {
        for k in 0..dim {
            bar[k] += p[k] / n;
        }
    }
    let mut cov = [[0.0; 3]; 3];
    for p in points {
        for i in 0..dim {
            for j in 0..dim {
                cov[i][j] += (p[i] - bar[i]) * (p[j] - bar[j]) / n;
            }
        }
    }
    let (vals, _) = symmetric_eigen(&cov, dim);
    vals[..dim].iter().filter(|v| v.max(0.0).sqrt() > floor).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frequency::frequency_components;
    use crate::geometry::{extract_sets, SetTolerances};
    use crate::profiles::{embed_profile, HomogeneousProfile};
    use approx::assert_relative_eq;

    fn profile(family: Family, m: u32, dim: usize, a: f64, h: f64, dir: Point) -> ScalarField {
        let spec = GridSpec::new(dim, 1.0, h, a).unwrap();
        let p = HomogeneousProfile::new(family, m, spec.s(), dir, 1.0).unwrap();
        embed_profile(&p, spec, true).unwrap()
    }

    #[test]
    fn classification_window() {
        assert_eq!(classify_frequency(1.53, 0.5, 0.1).map(|c| c.1), Some(Family::Psi));
        assert_eq!(classify_frequency(2.08, 0.5, 0.1).map(|c| c.1), Some(Family::Phi));
        assert_eq!(classify_frequency(3.05, 0.5, 0.1).map(|c| (c.1, c.2)), Some((Family::Pi, 2)));
        assert_eq!(classify_frequency(1.2, 0.5, 0.1), None);
        assert_eq!(stratum_of(1.5, 0.5), Stratum::Regular);
        assert_eq!(stratum_of(3.5, 0.5), Stratum::Other);
        assert_eq!(stratum_of(4.0, 0.5), Stratum::Singular);
        assert_eq!(stratum_of(2.6, 0.3), Stratum::Other);
    }

    #[test]
    fn rescaling_fixes_normalised_profiles() {
        let u = profile(Family::Psi, 1, 2, 0.0, 1.0 / 64.0, [1.0, 0.0, 0.0]);
        let v = rescale_field(&u, &[0.0; 3], 0.5).unwrap();
        let h1 = frequency_components(&v, &[0.0; 3], 1.0).unwrap().h;
        assert_relative_eq!(h1, 1.0, max_relative = 2e-3);
        for i in 0..v.spec().node_count() {
            let p = v.spec().node_coords(i);
            if crate::grid::norm(&p, 2) <= 1.0 {
                assert!((v.values()[i] - u.interpolate(&p).unwrap()).abs() <= 1e-3);
            }
        }
        assert!(matches!(rescale_field(&u, &[0.0; 3], 0.97), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn self_fit_recovers_direction() {
        let d = 30f64.to_radians();
        let u = profile(Family::Psi, 1, 3, 0.0, 1.0 / 32.0, [d.cos(), d.sin(), 0.0]);
        let sets = extract_sets(&u, SetTolerances::relative_defaults(&u));
        let fit = blowup_fit(&u, &sets, &[0.0; 3], &[0.5, 0.25]).unwrap();
        assert_eq!(fit.family, Some(Family::Psi));
        let angle = fit.direction[1].atan2(fit.direction[0]).to_degrees();
        assert!((angle - 30.0).abs() < 2.0, "{angle}");
        assert!(fit.residual <= 1e-3, "{fit:?}");
        assert!(matches!(blowup_fit(&u, &sets, &[0.5, 0.5, 0.0], &[0.25]), Err(Error::NotFreeBoundary(_))));
    }

    #[test]
    fn pi_fit_in_two_dimensions() {
        let u = profile(Family::Pi, 2, 2, 0.0, 1.0 / 64.0, [1.0, 0.0, 0.0]);
        let sets = extract_sets(&u, SetTolerances::relative_defaults(&u));
        let fit = blowup_fit(&u, &sets, &[0.0; 3], &[0.5]);
        // The whole plane is contact, so the origin is not a free-boundary node.
        assert!(fit.is_err());
        let v = rescale_field(&u, &[0.0; 3], 0.5).unwrap();
        let r = fit_pi(&Samples::new(&v), 2, 0.5).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
    }

    #[test]
    fn spine_of_singular_profile() {
        let u = profile(Family::Phi, 2, 3, 0.0, 1.0 / 32.0, [1.0, 0.0, 0.0]);
        let sets = extract_sets(&u, SetTolerances::relative_defaults(&u));
        let sp = spine_and_stratum(&u, &sets, &[0.0; 3], SpineOptions::new(0.25, 0.4)).unwrap();
        assert_eq!(sp.stratum, Stratum::Singular);
        assert_eq!(sp.spine_dim, 1);
        assert!(sp.spine_points.iter().all(|p| p[0].abs() <= 1.0 / 32.0 + 1e-12));
    }
}
