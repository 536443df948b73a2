//! Frequency function of a field about a point of the thin hyperplane, with the
//! cutoff `phi(t) = 1` on `[0, 1/2]`, `2(1 - t)` on `(1/2, 1]`, `0` beyond.
//!
//! Integrals run over grid cells inside the ball, doubled for the reflected half.
//! Uncut cells use two Gauss points per axis. Cells meeting the spheres of radius `r/2`
//! or `r` are subdivided, and each sub-cell enters the annulus terms with its exact
//! volume fraction on the far side of the tangent plane to the sphere.
//! Along the normal, each column of four nodes is interpolated on the basis
//! `1, t^{2s}, t^2, t^{2+2s}`, which covers both the smooth and the `t^{2s}` behaviour of
//! solutions next to the plane. In the layer touching the plane the field is
//! reconstructed with the profile `(t/h)^{2s}` and the singular term `(du/dt)^2 t^a` is
//! integrated exactly in `t`. Tangentially, the multilinear interpolant is corrected with
//! nodal central-difference gradients so that quadratics are reproduced.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Point, ScalarField};
use crate::linalg::solve_augmented;
use crate::par;

/// `H`, `D`, `E` and the frequency `I = r D / H` at one centre and radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyComponents {
    pub r: f64,
    pub h: f64,
    pub d: f64,
    pub e: f64,
    /// `D` computed from the boundary form `-(1/r) int phi' u du/drho w`.
    pub d_boundary: f64,
    /// `None` when `H` vanishes numerically.
    pub i: Option<f64>,
}

/// The cutoff profile.
pub fn cutoff(t: f64) -> f64 {
    if t <= 0.5 {
        1.0
    } else if t <= 1.0 {
        2.0 * (1.0 - t)
    } else {
        0.0
    }
}

/// Sub-cells per axis for cells cut by one of the spheres.
fn default_subdivision(dim: usize) -> usize {
    if dim == 2 {
        4
    } else {
        2
    }
}

/// Fraction of an axis-aligned cube of half-width `b` centred at distance `d` from the
/// origin, along unit direction `nrm`, lying in the half-space `{x . nrm <= radius}`.
fn halfspace_fraction(nrm: &Point, dim: usize, b: f64, d: f64, radius: f64) -> f64 {
    let delta = radius - d;
    let mut ext = [0.0; 3];
    let mut m = 0;
    let amax = (0..dim).map(|k| nrm[k].abs()).fold(0.0, f64::max) * 2.0 * b;
    for k in 0..dim {
        let a = 2.0 * b * nrm[k].abs();
        if a > 1e-3 * amax {
            ext[m] = a;
            m += 1;
        }
    }
    let half: f64 = ext[..m].iter().sum::<f64>() * 0.5;
    if delta >= half {
        return 1.0;
    }
    if delta <= -half {
        return 0.0;
    }
    let x = delta + half;
    let mut acc = 0.0;
    for mask in 0..(1usize << m) {
        let mut shift = 0.0;
        let mut sign = 1.0;
        for (k, e) in ext[..m].iter().enumerate() {
            if mask >> k & 1 == 1 {
                shift += e;
                sign = -sign;
            }
        }
        let y = x - shift;
        if y > 0.0 {
            acc += sign * y.powi(m as i32);
        }
    }
    let fact = [1.0, 1.0, 2.0, 6.0][m];
    let prod: f64 = ext[..m].iter().product();
    (acc / (fact * prod)).clamp(0.0, 1.0)
}

/// Accumulated integrals over one ball.
#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    h: f64,
    d: f64,
    e: f64,
    d_boundary: f64,
    l2: f64,
}

impl Sums {
    fn add(&mut self, o: &Sums) {
        self.h += o.h;
        self.d += o.d;
        self.e += o.e;
        self.d_boundary += o.d_boundary;
        self.l2 += o.l2;
    }
}

const GAUSS: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

/// Layers next to the plane reconstructed on the basis `1, t^{2s}, t^2, t^{2+2s}`; higher
/// layers use cubics, where that basis is numerically degenerate.
const MUNTZ_LAYERS: usize = 8;

/// Interpolation weights along one column of four nodes starting at `start`.
#[derive(Debug, Clone, Copy, Default)]
struct ColumnWeights {
    start: usize,
    w: [f64; 4],
    /// Derivative weights per unit length.
    dw: [f64; 4],
}

/// Weights reproducing `u` and `du/dt` at height `(j + xi) h` from nodes `start..start + 4`.
fn column_weights(j: usize, xi: f64, cells: usize, s: f64, h: f64) -> ColumnWeights {
    if cells < 4 {
        return ColumnWeights { start: j, w: [1.0 - xi, xi, 0.0, 0.0], dw: [-1.0 / h, 1.0 / h, 0.0, 0.0] };
    }
    let start = (j - 1).min(cells - 3);
    let tau = j as f64 + xi;
    let (shift, exps): (f64, [f64; 4]) =
        if j < MUNTZ_LAYERS { (0.0, [0.0, 2.0 * s, 2.0, 2.0 + 2.0 * s]) } else { (tau, [0.0, 1.0, 2.0, 3.0]) };
    let basis = |x: f64, e: f64| if e == 0.0 { 1.0 } else { x.powf(e) };
    let dbasis = |x: f64, e: f64| if e == 0.0 { 0.0 } else { e * x.powf(e - 1.0) };
    // Solve M^T c = b(tau) with M_ik = b_k(t_i); the derivative weights use b'(tau).
    let system = |rhs: &dyn Fn(f64) -> f64| {
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|k| {
                let mut row: Vec<f64> = (0..4).map(|i| basis((start + i) as f64 - shift, exps[k])).collect();
                row.push(rhs(exps[k]));
                row
            })
            .collect();
        solve_augmented(rows).expect("unisolvent column basis")
    };
    let x = tau - shift;
    let w = system(&|e| basis(x, e));
    let dw = system(&|e| dbasis(x, e));
    let mut out = ColumnWeights { start, ..Default::default() };
    for i in 0..4 {
        out.w[i] = w[i];
        out.dw[i] = dw[i] / h;
    }
    out
}

/// Cell-local reconstruction used by the quadrature.
struct CellGeom<'a> {
    field: &'a ScalarField,
    spec: GridSpec,
    s: f64,
    /// Local normal positions used by the quadrature: the two Gauss points, then the
    /// sub-cell midpoints.
    xis: Vec<f64>,
    /// Column weights indexed by `j * xis.len() + k`; row `j = 0` is unused.
    columns: Vec<ColumnWeights>,
}

impl<'a> CellGeom<'a> {
    fn new(field: &'a ScalarField) -> Self {
        let spec = *field.spec();
        let s = spec.s();
        let q = default_subdivision(spec.ambient_dim());
        let mut xis = GAUSS.to_vec();
        xis.extend((0..q).map(|l| (l as f64 + 0.5) / q as f64));
        let n = spec.cells();
        let mut columns = vec![ColumnWeights::default(); n * xis.len()];
        for j in 1..n {
            for (k, &xi) in xis.iter().enumerate() {
                columns[j * xis.len() + k] = column_weights(j, xi, n, s, spec.spacing());
            }
        }
        CellGeom { field, spec, s, xis, columns }
    }

    fn integrate(&self, x0: &Point, r: f64) -> Sums {
        let g = &self.spec;
        let dim = g.ambient_dim();
        let na = g.normal_axis();
        let h = g.spacing();
        let n = g.cells();
        let big_r = g.half_width();
        let mut lo = [0usize; 3];
        let mut hi = [1usize; 3];
        for k in 0..dim {
            if k == na {
                lo[k] = 0;
                hi[k] = ((r / h).ceil() as usize).min(n);
            } else {
                lo[k] = (((x0[k] - r + big_r) / h).floor().max(0.0)) as usize;
                hi[k] = ((((x0[k] + r + big_r) / h).ceil()) as usize).min(2 * n);
            }
        }
        let slabs: Vec<usize> = (lo[0]..hi[0]).collect();
        let parts = par::map_slice(&slabs, |&i0| {
            let mut acc = Sums::default();
            let range1 = if dim == 3 { lo[1]..hi[1] } else { 0..1 };
            for i1 in range1 {
                for j in lo[na]..hi[na] {
                    let mut c = [0usize; 3];
                    c[0] = i0;
                    if dim == 3 {
                        c[1] = i1;
                    }
                    c[na] = j;
                    self.cell(c, x0, r, &mut acc);
                }
            }
            acc
        });
        let mut total = Sums::default();
        for p in &parts {
            total.add(p);
        }
        total
    }

    /// Second-order nodal gradient: central differences, one-sided at the box faces.
    /// The normal component is only meaningful at nodes with `j >= 1`.
    fn node_grad(&self, idx: [usize; 3]) -> [f64; 3] {
        let g = &self.spec;
        let na = g.normal_axis();
        let h2 = 2.0 * g.spacing();
        let npa = g.nodes_per_axis();
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate().take(g.ambient_dim()) {
            let at = |off: isize| {
                let mut j = idx;
                j[k] = (idx[k] as isize + off) as usize;
                self.field.at(j)
            };
            *o = if idx[k] == 0 {
                if k == na {
                    0.0
                } else {
                    (-3.0 * at(0) + 4.0 * at(1) - at(2)) / h2
                }
            } else if idx[k] == npa[k] - 1 {
                (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / h2
            } else {
                (at(1) - at(-1)) / h2
            };
        }
        out
    }

    fn cell(&self, c: [usize; 3], x0: &Point, r: f64, acc: &mut Sums) {
        let g = &self.spec;
        let dim = g.ambient_dim();
        let na = g.normal_axis();
        let h = g.spacing();
        let a = g.a();
        let s = self.s;
        let origin = g.coords(c);
        let (mut dmin2, mut dmax2) = (0.0, 0.0);
        for k in 0..dim {
            let l = origin[k] - x0[k];
            let u = l + h;
            let near = if l > 0.0 {
                l
            } else if u < 0.0 {
                -u
            } else {
                0.0
            };
            let far = l.abs().max(u.abs());
            dmin2 += near * near;
            dmax2 += far * far;
        }
        let (dmin, dmax) = (dmin2.sqrt(), dmax2.sqrt());
        if dmin >= r {
            return;
        }
        let cut = |rad: f64| dmin < rad && dmax > rad;
        let q = if cut(r) || cut(0.5 * r) { default_subdivision(dim) } else { 1 };
        let layer = c[na];
        let first_layer = layer == 0;
        let ncol = 1usize << (dim - 1);
        let tangential: [usize; 2] = if dim == 3 { [0, 1] } else { [0, 0] };
        let ntan = dim - 1;
        // Column corners (tangential offsets) and the nodes each column reads.
        let col_index = |m: usize, j: usize| {
            let mut idx = c;
            for (b, &k) in tangential.iter().enumerate().take(ntan) {
                idx[k] += (m >> b) & 1;
            }
            idx[na] = j;
            idx
        };
        let rows: Vec<usize> = if first_layer { vec![0, 1] } else {
            let st = self.columns[layer * self.xis.len()].start;
            (st..st + 4).collect()
        };
        let mut vals = [[0.0; 4]; 4];
        let mut tgrads = [[[0.0; 2]; 4]; 4];
        for m in 0..ncol {
            for (i, &j) in rows.iter().enumerate() {
                let idx = col_index(m, j);
                vals[m][i] = self.field.at(idx);
                let gr = self.node_grad(idx);
                for b in 0..ntan {
                    tgrads[m][i][b] = gr[tangential[b]];
                }
            }
        }

        // Quadrature points: (local coordinates in [0, 1], normal position index,
        // volume, t-range). Uncut cells use two Gauss points per axis, except along the
        // normal of the first layer where the weight is integrated exactly.
        let mut points: Vec<([f64; 3], usize, f64, f64, f64)> = Vec::with_capacity(64);
        if q == 1 {
            let nn = if first_layer { 1 } else { 2 };
            let count = (1usize << ntan) * nn;
            let vol = h.powi(dim as i32) / count as f64;
            for l in 0..count {
                let mut xi = [0.0; 3];
                for b in 0..ntan {
                    xi[tangential[b]] = GAUSS[(l >> b) & 1];
                }
                let kn = if first_layer { 0 } else { l >> ntan };
                xi[na] = if first_layer { 0.5 } else { GAUSS[kn] };
                let t = origin[na] + xi[na] * h;
                let (t0, t1) = if first_layer { (0.0, h) } else { (t, t) };
                points.push((xi, kn, vol, t0, t1));
            }
        } else {
            let sub = h / q as f64;
            let vol = sub.powi(dim as i32);
            for l in 0..q.pow(dim as u32) {
                let mut rem = l;
                let mut xi = [0.0; 3];
                let mut li = [0usize; 3];
                for k in 0..dim {
                    li[k] = rem % q;
                    rem /= q;
                    xi[k] = (li[k] as f64 + 0.5) / q as f64;
                }
                let t0 = origin[na] + li[na] as f64 * sub;
                points.push((xi, 2 + li[na], vol, t0, t0 + sub));
            }
        }
        let b = 0.5 * h / q as f64;

        for &(xi, kn, vol, t0, t1) in &points {
            let mut pos = [0.0; 3];
            for k in 0..dim {
                pos[k] = origin[k] + xi[k] * h;
            }
            // Column values, normal derivatives and tangential gradients at this height.
            let mut cu = [0.0; 4];
            let mut cut_ = [0.0; 4];
            let mut cg = [[0.0; 2]; 4];
            let mut first_normal2 = 0.0;
            if first_layer {
                // Profile (t/h)^{2s} between the two lowest nodes; its singular derivative
                // is integrated exactly in t.
                let tc = pos[na];
                let eta = (tc / h).powf(2.0 * s);
                let deta = 2.0 * s * tc.powf(2.0 * s - 1.0) / h.powf(2.0 * s);
                for m in 0..ncol {
                    cu[m] = (1.0 - eta) * vals[m][0] + eta * vals[m][1];
                    cut_[m] = (vals[m][1] - vals[m][0]) * deta;
                    for bb in 0..ntan {
                        cg[m][bb] = (1.0 - eta) * tgrads[m][0][bb] + eta * tgrads[m][1][bb];
                    }
                }
                first_normal2 = 2.0 * s * (t1.powf(2.0 * s) - t0.powf(2.0 * s)) / (h.powf(4.0 * s) * (t1 - t0));
            } else {
                let cw = &self.columns[layer * self.xis.len() + kn];
                for m in 0..ncol {
                    for i in 0..4 {
                        cu[m] += cw.w[i] * vals[m][i];
                        cut_[m] += cw.dw[i] * vals[m][i];
                        for bb in 0..ntan {
                            cg[m][bb] += cw.w[i] * tgrads[m][i][bb];
                        }
                    }
                }
            }
            // Tangential blend: the multilinear interpolant averaged with nodal Taylor
            // expansions, which is exact on quadratics.
            let mut u = 0.0;
            let mut un = 0.0;
            let mut dn_slope = 0.0;
            let mut grad = [0.0; 3];
            for m in 0..ncol {
                let mut w = 1.0;
                let mut corr = 0.0;
                for bb in 0..ntan {
                    let k = tangential[bb];
                    let bit = (m >> bb) & 1 == 1;
                    w *= if bit { xi[k] } else { 1.0 - xi[k] };
                    let xc = origin[k] + if bit { h } else { 0.0 };
                    corr += cg[m][bb] * (pos[k] - xc);
                }
                u += w * (cu[m] + 0.5 * corr);
                un += w * cut_[m];
                dn_slope += w * (vals[m][1] - vals[m][0]);
                for bb in 0..ntan {
                    grad[tangential[bb]] += w * cg[m][bb];
                }
            }
            grad[na] = un;
            let weight = if t1 > t0 { (t1.powf(1.0 + a) - t0.powf(1.0 + a)) / ((1.0 + a) * (t1 - t0)) } else { t0.powf(a) };
            let mut rel = [0.0; 3];
            let mut tan2 = 0.0;
            for k in 0..dim {
                rel[k] = pos[k] - x0[k];
                if k != na {
                    tan2 += grad[k] * grad[k];
                }
            }
            let normal2 = if first_layer { dn_slope * dn_slope * first_normal2 } else { un * un * weight };
            let d = (0..dim).map(|k| rel[k] * rel[k]).sum::<f64>().sqrt();
            let (cov_outer, cov_inner) = if q == 1 {
                (if d < r { 1.0 } else { 0.0 }, if d < 0.5 * r { 1.0 } else { 0.0 })
            } else if d > 0.0 {
                let nrm = [rel[0] / d, rel[1] / d, rel[2] / d];
                (halfspace_fraction(&nrm, dim, b, d, r), halfspace_fraction(&nrm, dim, b, d, 0.5 * r))
            } else {
                (1.0, 1.0)
            };
            let phi = cutoff(d / r);
            let full = 2.0 * vol;
            acc.d += full * phi * (tan2 * weight + normal2);
            acc.l2 += full * cov_outer * weight * u * u;
            let ann = cov_outer - cov_inner;
            if ann > 0.0 && d > 0.0 {
                let drho = (0..dim).map(|k| grad[k] * rel[k]).sum::<f64>() / d;
                acc.h += full * ann * 2.0 * weight * u * u / d;
                acc.e += full * ann * 2.0 * weight * d / (r * r) * drho * drho;
                acc.d_boundary += full * ann * 2.0 / r * weight * u * drho;
            }
        }
    }
}

fn check_ball(spec: &GridSpec, x0: &Point, r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius {r} must be positive")));
    }
    if x0[spec.normal_axis()].abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("centre {x0:?} is not on the thin hyperplane")));
    }
    if !spec.ball_fits(x0, r) {
        return Err(Error::OutOfDomain(*x0));
    }
    Ok(())
}

fn integrate(field: &ScalarField, x0: &Point, r: f64) -> Result<Sums> {
    let spec = *field.spec();
    check_ball(&spec, x0, r)?;
    let geom = CellGeom::new(field);
    Ok(geom.integrate(x0, r))
}

const H_FLOOR: f64 = 1e-300;

/// `H`, `D`, `E` and `I` about `x0` at radius `r`.
pub fn frequency_components(field: &ScalarField, x0: &Point, r: f64) -> Result<FrequencyComponents> {
    let sums = integrate(field, x0, r)?;
    let i = (sums.h > H_FLOOR).then(|| r * sums.d / sums.h);
    Ok(FrequencyComponents { r, h: sums.h, d: sums.d, e: sums.e, d_boundary: sums.d_boundary, i })
}

/// `I(x0, r)`, failing when `H` vanishes.
pub fn frequency(field: &ScalarField, x0: &Point, r: f64) -> Result<f64> {
    let c = frequency_components(field, x0, r)?;
    c.i.ok_or(Error::DegenerateHeight(c.h))
}

/// `int_{B_r(x0)} u^2 |x_{n+1}|^a`.
pub fn l2_ball(field: &ScalarField, x0: &Point, r: f64) -> Result<f64> {
    Ok(integrate(field, x0, r)?.l2)
}

/// Frequency drop `I(x0, r_big) - I(x0, r_small)`.
pub fn frequency_gap(field: &ScalarField, x0: &Point, r_big: f64, r_small: f64) -> Result<f64> {
    if !(r_small > 0.0 && r_small < r_big) {
        return Err(Error::InvalidParameter(format!("need 0 < {r_small} < {r_big}")));
    }
    Ok(frequency(field, x0, r_big)? - frequency(field, x0, r_small)?)
}

/// Frequency along increasing radii with flagged monotonicity violations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyCurve {
    pub center: Point,
    pub rows: Vec<FrequencyComponents>,
    /// Pairs of consecutive radii `(r_k, r_{k+1})` where `I` drops by more than the slack.
    pub violations: Vec<(f64, f64)>,
}

pub fn frequency_curve(field: &ScalarField, x0: &Point, radii: &[f64], slack: f64) -> Result<FrequencyCurve> {
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("radii must be strictly increasing".into()));
    }
    for &r in radii {
        check_ball(field.spec(), x0, r)?;
    }
    let rows = par::map_slice(radii, |&r| frequency_components(field, x0, r))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut violations = Vec::new();
    for w in rows.windows(2) {
        if let (Some(a), Some(b)) = (w[0].i, w[1].i) {
            if b < a - slack {
                violations.push((w[0].r, w[1].r));
            }
        }
    }
    Ok(FrequencyCurve { center: *x0, rows, violations })
}

/// Finite-difference checks of the derivative identities for `H` and `D` and of the
/// Cauchy-Schwarz defect `H E - D^2` that drives monotonicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub r: f64,
    pub dr: f64,
    pub h_prime_fd: f64,
    pub h_prime_formula: f64,
    pub d_prime_fd: f64,
    pub d_prime_formula: f64,
    /// `D` from the volume form and from the boundary form.
    pub d_volume: f64,
    pub d_boundary: f64,
    /// `H E - D_boundary^2`.
    pub cs_defect: f64,
    pub h_times_e: f64,
}

impl IdentityReport {
    pub fn h_prime_rel_error(&self) -> f64 {
        (self.h_prime_fd - self.h_prime_formula).abs() / self.h_prime_formula.abs()
    }
    pub fn d_prime_rel_error(&self) -> f64 {
        (self.d_prime_fd - self.d_prime_formula).abs() / self.d_prime_formula.abs()
    }
    pub fn d_forms_rel_error(&self) -> f64 {
        (self.d_volume - self.d_boundary).abs() / self.d_volume.abs()
    }
}

pub fn verify_frequency_identities(field: &ScalarField, x0: &Point, r: f64, dr: f64) -> Result<IdentityReport> {
    if !(dr > 0.0 && dr < r) {
        return Err(Error::InvalidParameter(format!("step {dr} must lie in (0, r)")));
    }
    let rs = [r - dr, r, r + dr];
    let c = par::map_slice(&rs, |&rr| frequency_components(field, x0, rr))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let n = field.spec().thin_dim() as f64;
    let a = field.spec().a();
    let mid = c[1];
    Ok(IdentityReport {
        r,
        dr,
        h_prime_fd: (c[2].h - c[0].h) / (2.0 * dr),
        h_prime_formula: (n + a) / r * mid.h + 2.0 * mid.d,
        d_prime_fd: (c[2].d - c[0].d) / (2.0 * dr),
        d_prime_formula: (n + a - 1.0) / r * mid.d + 2.0 * mid.e,
        d_volume: mid.d,
        d_boundary: mid.d_boundary,
        cs_defect: mid.h * mid.e - mid.d_boundary * mid.d_boundary,
        h_times_e: mid.h * mid.e,
    })
}

/// `log2(H(2r) / H(r))`, equal to `n + a + 2 lambda` for a `lambda`-homogeneous field.
pub fn height_doubling_exponent(field: &ScalarField, x0: &Point, r: f64) -> Result<f64> {
    let h1 = frequency_components(field, x0, r)?.h;
    let h2 = frequency_components(field, x0, 2.0 * r)?.h;
    if h1 <= H_FLOOR {
        return Err(Error::DegenerateHeight(h1));
    }
    Ok((h2 / h1).log2())
}

/// `sup` of `I(y, rho)` over the given free-boundary points in the closed ball `B_rho(x)`.
pub fn theta_max(field: &ScalarField, fb_points: &[Point], x: &Point, rho: f64) -> Result<Option<f64>> {
    let dim = field.spec().ambient_dim();
    let near: Vec<Point> = fb_points
        .iter()
        .filter(|p| crate::grid::norm(&crate::grid::sub(p, x), dim) <= rho + 1e-12)
        .copied()
        .collect();
    let vals = par::map_slice(&near, |p| frequency(field, p, rho)).into_iter().collect::<Result<Vec<_>>>()?;
    Ok(vals.into_iter().reduce(f64::max))
}

/// Spatial oscillation of the frequency between two centres against the bound built
/// from frequency drops at both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationCheck {
    /// `|I(x1, R rho) - I(x2, R rho)|`.
    pub lhs: f64,
    /// `sqrt(gap(x1)) + sqrt(gap(x2))`, gaps between radii `2(R+2) rho` and `(R-4) rho / 2`.
    pub rhs: f64,
    pub gap1: f64,
    pub gap2: f64,
}

pub fn spatial_osc_check(field: &ScalarField, x1: &Point, x2: &Point, rho: f64, big_r: f64) -> Result<OscillationCheck> {
    if big_r <= 6.0 {
        return Err(Error::InvalidParameter(format!("R = {big_r} must exceed 6")));
    }
    let lhs = (frequency(field, x1, big_r * rho)? - frequency(field, x2, big_r * rho)?).abs();
    let (rb, rs) = (2.0 * (big_r + 2.0) * rho, (big_r - 4.0) * rho / 2.0);
    let gap1 = frequency_gap(field, x1, rb, rs)?;
    let gap2 = frequency_gap(field, x2, rb, rs)?;
    Ok(OscillationCheck { lhs, rhs: gap1.max(0.0).sqrt() + gap2.max(0.0).sqrt(), gap1, gap2 })
}

/// Normalised frequency gap `I(1) - I(1/2)` on the unit scale, and whether it is
/// below `eta` with the centre on the free boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityCheck {
    pub gap: f64,
    pub eta: f64,
    pub almost_homogeneous: bool,
}

/// Classifies almost homogeneity about `center` at unit scale `unit` (the field rescaled
/// by `unit` has the same frequency at radius 1 as the original at radius `unit`).
pub fn classify_almost_homogeneous(
    field: &ScalarField,
    eta: f64,
    center: &Point,
    unit: f64,
    center_on_free_boundary: bool,
) -> Result<HomogeneityCheck> {
    let gap = frequency_gap(field, center, unit, 0.5 * unit)?;
    Ok(HomogeneityCheck { gap, eta, almost_homogeneous: center_on_free_boundary && gap <= eta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{embed_profile, Family, HomogeneousProfile};
    use approx::assert_relative_eq;

    fn profile_field(family: Family, m: u32, a: f64, h: f64) -> ScalarField {
        let spec = GridSpec::new(2, 1.0, h, a).unwrap();
        let p = HomogeneousProfile::new(family, m, spec.s(), [1.0, 0.0, 0.0], 1.0).unwrap();
        embed_profile(&p, spec, true).unwrap()
    }

    #[test]
    fn halfspace_fraction_limits() {
        let n = [1.0, 0.0, 0.0];
        assert_eq!(halfspace_fraction(&n, 2, 0.5, 1.0, 1.0), 0.5);
        let d = [0.6, 0.8, 0.0];
        assert_relative_eq!(halfspace_fraction(&d, 2, 0.5, 1.0, 1.0), 0.5, epsilon = 1e-15);
        assert_eq!(halfspace_fraction(&d, 2, 0.5, 1.0, 3.0), 1.0);
        let f1 = halfspace_fraction(&d, 3, 0.5, 1.0, 1.2);
        let f2 = halfspace_fraction(&d, 3, 0.5, 1.0, 0.8);
        assert_relative_eq!(f1 + f2, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(0.25), 1.0);
        assert_eq!(cutoff(0.75), 0.5);
        assert_eq!(cutoff(1.5), 0.0);
    }

    #[test]
    fn frequency_of_homogeneous_profiles() {
        for (family, m, lambda_of_s) in [(Family::Phi, 2, 0.0), (Family::Psi, 1, 1.0), (Family::Pi, 2, 2.0)] {
            for a in [-0.4, 0.0, 0.5] {
                let u = profile_field(family, m, a, 1.0 / 128.0);
                let s = 0.5 * (1.0 - a);
                let lambda = m as f64 + lambda_of_s * s;
                let i = frequency(&u, &[0.0, 0.0, 0.0], 0.4).unwrap();
                assert!((i - lambda).abs() < 0.03, "{family:?} a={a}: {i} vs {lambda}");
            }
        }
    }

    #[test]
    fn rejects_bad_centres() {
        let u = profile_field(Family::Psi, 1, 0.0, 0.0625);
        assert!(frequency(&u, &[0.0, 0.1, 0.0], 0.2).is_err());
        assert!(frequency(&u, &[0.0, 0.0, 0.0], 0.99).is_err());
        let z = ScalarField::zeros(*u.spec());
        assert!(matches!(frequency(&z, &[0.0, 0.0, 0.0], 0.5), Err(Error::DegenerateHeight(_))));
    }

    #[test]
    fn cauchy_schwarz_defect_is_nonnegative() {
        let spec = GridSpec::new(2, 1.0, 1.0 / 64.0, 0.2).unwrap();
        let u = ScalarField::sample(spec, |p| (3.0 * p[0]).sin() + p[1].abs().powf(0.8) + p[0] * p[0]).unwrap();
        for r in [0.1, 0.3, 0.7] {
            let rep = verify_frequency_identities(&u, &[0.1, 0.0, 0.0], r, 1e-3).unwrap();
            assert!(rep.cs_defect >= -1e-12 * rep.h_times_e, "{rep:?}");
        }
    }
}
