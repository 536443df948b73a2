//! Discrete contact set, free boundary and nodal set on the thin hyperplane, and
//! measures built from them: beta numbers, Jones square function, oscillation sums and
//! Minkowski content of tubes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frequency::frequency_gap;
use crate::grid::{dist, GridSpec, Point, ScalarField};
use crate::linalg::{solve_augmented, symmetric_eigen};
use crate::par;
use crate::solver::plane_flux;

/// Thresholds for classifying plane nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetTolerances {
    /// A node is in contact when `|u| <= contact`.
    pub contact: f64,
    /// Bound on the tangential gradient for nodal points.
    pub grad: f64,
    /// Bound on the weighted normal flux for nodal points.
    pub flux: f64,
}

impl SetTolerances {
    /// `contact = 1e-6 max|u|`, `grad = flux = 1e-3 max|grad u|`.
    pub fn relative_defaults(field: &ScalarField) -> Self {
        let g = 1e-3 * max_gradient(field);
        SetTolerances { contact: 1e-6 * field.max_abs(), grad: g, flux: g }
    }
}

/// Largest central-difference gradient norm over interior off-plane nodes.
pub fn max_gradient(field: &ScalarField) -> f64 {
    let spec = *field.spec();
    let st = spec.strides();
    let h = spec.spacing();
    let u = field.values();
    let na = spec.normal_axis();
    par::map_range(spec.node_count(), |i| {
        let idx = spec.multi(i);
        if idx[na] == 0 || spec.is_box_boundary(idx) {
            return 0.0;
        }
        (0..spec.ambient_dim())
            .map(|k| {
                let d = (u[i + st[k]] - u[i - st[k]]) / (2.0 * h);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    })
    .into_iter()
    .fold(0.0, f64::max)
}

/// Weighted normal flux `lim t^a du/dt` at a plane node from a fit of the first six
/// values down the normal column by `t^{0, 1-a, 2, 3-a, 4, 5-a}`. Falls back to the
/// half-cell balance on grids with fewer than six layers.
pub fn column_fit_flux(field: &ScalarField, flat: usize) -> f64 {
    let g = field.spec();
    if g.cells() < 5 {
        return plane_flux(field, flat);
    }
    let w = column_fit_weights(g.a());
    let u = field.values();
    let b: f64 = (0..6).map(|j| w[j] * u[flat + j]).sum();
    (1.0 - g.a()) * b / g.spacing().powf(1.0 - g.a())
}

/// Row of the inverse fit matrix producing the `t^{1-a}` coefficient (in layer units).
fn column_fit_weights(a: f64) -> [f64; 6] {
    let e = [0.0, 1.0 - a, 2.0, 3.0 - a, 4.0, 5.0 - a];
    let mut w = [0.0; 6];
    // Columns of the inverse transpose: solve M^T w = e_1 with M_{jk} = j^{e_k}.
    let rows: Vec<Vec<f64>> = (0..6)
        .map(|k| {
            let mut r: Vec<f64> = (0..6).map(|j| if j == 0 { if e[k] == 0.0 { 1.0 } else { 0.0 } } else { (j as f64).powf(e[k]) }).collect();
            r.push(if k == 1 { 1.0 } else { 0.0 });
            r
        })
        .collect();
    if let Some(x) = solve_augmented(rows) {
        w.copy_from_slice(&x);
    }
    w
}

const CONTACT: u8 = 1;
const FREE_BOUNDARY: u8 = 2;
const NODAL: u8 = 4;

/// Classification of the plane nodes of a field.
#[derive(Debug, Clone, PartialEq)]
pub struct ThinPointSet {
    spec: GridSpec,
    tolerances: SetTolerances,
    /// One bit set per plane node, in plane-node order.
    flags: Vec<u8>,
}

/// One flagged plane node, as serialised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThinNodeRecord {
    pub index: Vec<usize>,
    pub point: Vec<f64>,
    pub contact: bool,
    pub free_boundary: bool,
    pub nodal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThinPointSetRecord {
    pub tolerances: SetTolerances,
    pub contact_count: usize,
    pub free_boundary_count: usize,
    pub nodal_count: usize,
    pub nodes: Vec<ThinNodeRecord>,
}

impl ThinPointSet {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }
    pub fn tolerances(&self) -> &SetTolerances {
        &self.tolerances
    }

    fn points_with(&self, bit: u8) -> Vec<Point> {
        self.flags
            .iter()
            .enumerate()
            .filter(|(_, f)| *f & bit != 0)
            .map(|(k, _)| self.spec.node_coords(self.spec.plane_flat(self.spec.plane_multi(k))))
            .collect()
    }

    pub fn contact_points(&self) -> Vec<Point> {
        self.points_with(CONTACT)
    }
    pub fn free_boundary_points(&self) -> Vec<Point> {
        self.points_with(FREE_BOUNDARY)
    }
    pub fn nodal_points(&self) -> Vec<Point> {
        self.points_with(NODAL)
    }

    /// Plane-node ordinal of a point lying on a node, if any.
    fn node_of(&self, p: &Point) -> Option<usize> {
        let g = &self.spec;
        if p[g.normal_axis()].abs() > 1e-9 * g.spacing() {
            return None;
        }
        let mut k = 0;
        let m = 2 * g.cells() + 1;
        for c in p.iter().take(g.thin_dim()) {
            let x = (c + g.half_width()) / g.spacing();
            let i = x.round();
            if (x - i).abs() > 1e-6 || i < 0.0 || i as usize >= m {
                return None;
            }
            k = k * m + i as usize;
        }
        Some(k)
    }

    /// Flags of the `k`-th plane node as `(contact, free_boundary, nodal)`.
    pub fn node_flags(&self, k: usize) -> (bool, bool, bool) {
        let f = self.flags[k];
        (f & CONTACT != 0, f & FREE_BOUNDARY != 0, f & NODAL != 0)
    }

    pub fn is_free_boundary(&self, p: &Point) -> bool {
        self.node_of(p).is_some_and(|k| self.flags[k] & FREE_BOUNDARY != 0)
    }

    pub fn record(&self) -> ThinPointSetRecord {
        let g = &self.spec;
        let nodes = self
            .flags
            .iter()
            .enumerate()
            .filter(|(_, f)| **f != 0)
            .map(|(k, f)| {
                let tan = g.plane_multi(k);
                let p = g.node_coords(g.plane_flat(tan));
                ThinNodeRecord {
                    index: tan[..g.thin_dim()].to_vec(),
                    point: p[..g.ambient_dim()].to_vec(),
                    contact: f & CONTACT != 0,
                    free_boundary: f & FREE_BOUNDARY != 0,
                    nodal: f & NODAL != 0,
                }
            })
            .collect();
        let count = |bit: u8| self.flags.iter().filter(|f| *f & bit != 0).count();
        ThinPointSetRecord {
            tolerances: self.tolerances,
            contact_count: count(CONTACT),
            free_boundary_count: count(FREE_BOUNDARY),
            nodal_count: count(NODAL),
            nodes,
        }
    }
}

/// Classifies plane nodes. Contact: `|u| <= contact`. Free boundary: interior contact
/// nodes with a non-contact neighbour on the plane. Nodal: interior contact nodes whose
/// tangential gradient and weighted normal flux ([`column_fit_flux`]) are within
/// tolerance, together with every free-boundary node.
pub fn extract_sets(field: &ScalarField, tol: SetTolerances) -> ThinPointSet {
    let g = *field.spec();
    let u = field.values();
    let h = g.spacing();
    let st = g.strides();
    let np = g.plane_node_count();
    let contact: Vec<bool> = (0..np).map(|k| u[g.plane_flat(g.plane_multi(k))].abs() <= tol.contact).collect();
    let m = 2 * g.cells() + 1;
    let plane_strides: Vec<usize> = if g.thin_dim() == 1 { vec![1] } else { vec![m, 1] };
    let flags = par::map_range(np, |k| {
        let tan = g.plane_multi(k);
        if !contact[k] {
            return 0;
        }
        if !g.plane_is_interior(tan) {
            return CONTACT;
        }
        let mut f = CONTACT;
        if plane_strides.iter().any(|&s| !contact[k + s] || !contact[k - s]) {
            f |= FREE_BOUNDARY | NODAL;
        }
        let i = g.plane_flat(tan);
        let grad2: f64 = (0..g.thin_dim())
            .map(|d| {
                let v = (u[i + st[d]] - u[i - st[d]]) / (2.0 * h);
                v * v
            })
            .sum();
        if grad2.sqrt() <= tol.grad && column_fit_flux(field, i).abs() <= tol.flux {
            f |= NODAL;
        }
        f
    });
    ThinPointSet { spec: g, tolerances: tol, flags }
}

/// Weighted point masses on the thin hyperplane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    ambient_dim: usize,
    points: Vec<Point>,
    masses: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(ambient_dim: usize, points: Vec<Point>, masses: Vec<f64>) -> Result<Self> {
        if ambient_dim != 2 && ambient_dim != 3 {
            return Err(Error::InvalidParameter(format!("ambient_dim = {ambient_dim}")));
        }
        if points.len() != masses.len() {
            return Err(Error::InvalidParameter("points and masses differ in length".into()));
        }
        if masses.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::InvalidParameter("masses must be positive".into()));
        }
        if points.iter().any(|p| p[ambient_dim - 1] != 0.0 || p[ambient_dim..].iter().any(|v| *v != 0.0)) {
            return Err(Error::InvalidParameter("points must lie on the thin hyperplane".into()));
        }
        Ok(DiscreteMeasure { ambient_dim, points, masses })
    }

    /// Mass `h^{n-1}` at every free-boundary node.
    pub fn from_free_boundary(set: &ThinPointSet) -> Self {
        let g = set.spec();
        let pts = set.free_boundary_points();
        let m = g.spacing().powi(g.thin_dim() as i32 - 1);
        let masses = vec![m; pts.len()];
        DiscreteMeasure { ambient_dim: g.ambient_dim(), points: pts, masses }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }
    pub fn points(&self) -> &[Point] {
        &self.points
    }
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }
    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Smallest distance between two distinct atoms (infinite with fewer than two atoms).
    pub fn min_separation(&self) -> f64 {
        let mut order: Vec<usize> = (0..self.points.len()).collect();
        order.sort_by(|&i, &j| self.points[i][0].total_cmp(&self.points[j][0]));
        let mut best = f64::INFINITY;
        for (a, &i) in order.iter().enumerate() {
            for &j in &order[a + 1..] {
                if self.points[j][0] - self.points[i][0] >= best {
                    break;
                }
                let d = dist(&self.points[i], &self.points[j]);
                if d > 0.0 {
                    best = best.min(d);
                }
            }
        }
        best
    }
}

/// Best-fit data of a measure restricted to an open ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaStats {
    pub center: Point,
    pub radius: f64,
    pub k: usize,
    pub mass: f64,
    pub barycenter: Point,
    /// Eigenvalues of the covariance form in decreasing order (unused entries zero).
    pub eigenvalues: [f64; 3],
    /// Unit eigenvectors matching `eigenvalues`; the first `k` span the best plane.
    pub eigenvectors: [Point; 3],
    pub beta: f64,
}

impl BetaStats {
    pub fn beta_sq(&self) -> f64 {
        self.beta * self.beta
    }
}

/// `beta^{(k)}(x0, r) = (r^{-k-2} sum_{l > k} lambda_l)^{1/2}` from the covariance of
/// `mu` restricted to `B_r(x0)`.
pub fn beta_number(mu: &DiscreteMeasure, x0: &Point, r: f64, k: usize) -> Result<BetaStats> {
    let dim = mu.ambient_dim;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius {r} must be positive")));
    }
    if k >= dim {
        return Err(Error::InvalidParameter(format!("k = {k} must be below {dim}")));
    }
    let mut mass = 0.0;
    let mut bar = [0.0; 3];
    let inside: Vec<usize> = (0..mu.points.len()).filter(|&i| dist(&mu.points[i], x0) < r).collect();
    for &i in &inside {
        mass += mu.masses[i];
        for c in 0..dim {
            bar[c] += mu.masses[i] * mu.points[i][c];
        }
    }
    let mut cov = [[0.0; 3]; 3];
    if mass > 0.0 {
        for b in bar.iter_mut() {
            *b /= mass;
        }
        for &i in &inside {
            let y = mu.points[i];
            for p in 0..dim {
                for q in 0..dim {
                    cov[p][q] += mu.masses[i] * (y[p] - bar[p]) * (y[q] - bar[q]);
                }
            }
        }
    }
    let (mut vals, cols) = symmetric_eigen(&cov, dim);
    let mut eigenvectors = [[0.0; 3]; 3];
    for (j, e) in eigenvectors.iter_mut().enumerate().take(dim) {
        for (i, c) in e.iter_mut().enumerate().take(dim) {
            *c = cols[i][j];
        }
    }
    for v in vals.iter_mut() {
        *v = v.max(0.0);
    }
    // Summing squared projections keeps the round-off of a flat configuration at the
    // level of the coordinates rather than of the covariance entries.
    let mut tail = 0.0;
    for &i in &inside {
        let y = mu.points[i];
        for e in &eigenvectors[k..dim] {
            let proj: f64 = (0..dim).map(|c| (y[c] - bar[c]) * e[c]).sum();
            tail += mu.masses[i] * proj * proj;
        }
    }
    let beta = (tail / r.powi(k as i32 + 2)).sqrt();
    Ok(BetaStats { center: *x0, radius: r, k, mass, barycenter: bar, eigenvalues: vals, eigenvectors, beta })
}

/// Jones square function `sum_q beta^2(x, r_q)` with `k = n - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JonesRecord {
    pub center: Point,
    pub total: f64,
    /// `(r_q, beta^2(x, r_q))`.
    pub per_scale: Vec<(f64, f64)>,
}

pub fn jones_square(mu: &DiscreteMeasure, x: &Point, scales: &[f64]) -> Result<JonesRecord> {
    let k = mu.ambient_dim - 2;
    let per_scale = scales
        .iter()
        .map(|&r| Ok((r, beta_number(mu, x, r, k)?.beta_sq())))
        .collect::<Result<Vec<_>>>()?;
    Ok(JonesRecord { center: *x, total: per_scale.iter().map(|p| p.1).sum(), per_scale })
}

/// `Osc = int_{B_rho(w)} sum_j beta^2(y, lambda^j rho) dmu(y)`, the scale sum truncated
/// once `lambda^j rho` drops below a tenth of the minimal atom separation.
pub fn osc_lambda(mu: &DiscreteMeasure, w: &Point, rho: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) || !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!("need rho > 0 and lambda in (0, 1), got {rho}, {lambda}")));
    }
    let k = mu.ambient_dim - 2;
    let floor = mu.min_separation() / 10.0;
    let atoms: Vec<usize> = (0..mu.points.len()).filter(|&i| dist(&mu.points[i], w) < rho).collect();
    let terms = par::map_slice(&atoms, |&i| -> Result<f64> {
        let mut acc = 0.0;
        let mut r = rho;
        while r >= floor && r > 0.0 {
            acc += beta_number(mu, &mu.points[i], r, k)?.beta_sq();
            r *= lambda;
        }
        Ok(mu.masses[i] * acc)
    });
    terms.into_iter().sum()
}

/// Flatness of the measure against the frequency drop it is controlled by.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFlatness {
    pub beta_sq: f64,
    /// `r^{-(n-1)} int_{B_r(p)} gap dmu` with the gap between radii `(2R+4) r` and `(R-5) r / 2`.
    pub freq_integral: f64,
    /// `r^{-(n-1)} mu(B_r(p))`.
    pub mass: f64,
}

pub fn mean_flatness_check(field: &ScalarField, mu: &DiscreteMeasure, p: &Point, r: f64, big_r: f64) -> Result<MeanFlatness> {
    if big_r <= 5.0 {
        return Err(Error::InvalidParameter(format!("R = {big_r} must exceed 5")));
    }
    let n = mu.ambient_dim - 1;
    let beta_sq = beta_number(mu, p, r, n - 1)?.beta_sq();
    let atoms: Vec<usize> = (0..mu.points.len()).filter(|&i| dist(&mu.points[i], p) < r).collect();
    let (rb, rs) = ((2.0 * big_r + 4.0) * r, (big_r - 5.0) * r / 2.0);
    let gaps = par::map_slice(&atoms, |&i| frequency_gap(field, &mu.points[i], rb, rs))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let scale = r.powi(-(n as i32 - 1));
    let freq_integral = scale * atoms.iter().zip(&gaps).map(|(&i, g)| mu.masses[i] * g).sum::<f64>();
    let mass = scale * atoms.iter().map(|&i| mu.masses[i]).sum::<f64>();
    Ok(MeanFlatness { beta_sq, freq_integral, mass })
}

/// Tube volume around free-boundary points in a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiRow {
    pub r: f64,
    pub volume: f64,
    /// `volume / r^2`, the codimension-two Minkowski ratio.
    pub ratio: f64,
}

/// Counts lattice cells (of the grid spacing, over the full space) whose centres lie
/// within `r` of a free-boundary point in the closed window `B'(center, radius)`.
pub fn minkowski_profile(set: &ThinPointSet, window_center: &Point, window_radius: f64, radii: &[f64]) -> Result<Vec<MinkowskiRow>> {
    let g = set.spec();
    let h = g.spacing();
    let dim = g.ambient_dim();
    if let Some(r) = radii.iter().find(|&&r| r < 2.0 * h) {
        return Err(Error::InvalidParameter(format!("radius {r} is below two grid spacings")));
    }
    let pts: Vec<Point> =
        set.free_boundary_points().into_iter().filter(|p| dist(p, window_center) <= window_radius + 1e-12).collect();
    let rows = par::map_slice(radii, |&r| {
        if pts.is_empty() {
            return MinkowskiRow { r, volume: 0.0, ratio: 0.0 };
        }
        // Cell (i_0, .., i_d) has centre ((i + 1/2) h); the box below covers every tube cell.
        let mut lo = [0i64; 3];
        let mut ext = [1usize; 3];
        for k in 0..dim {
            let mn = pts.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min) - r;
            let mx = pts.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max) + r;
            lo[k] = (mn / h).floor() as i64 - 1;
            ext[k] = ((mx / h).ceil() as i64 + 1 - lo[k]) as usize + 1;
        }
        let mut marked = vec![false; ext[..dim].iter().product()];
        let span = (r / h).ceil() as i64 + 1;
        for p in &pts {
            let base: Vec<i64> = (0..dim).map(|k| (p[k] / h).floor() as i64).collect();
            let mut offs = vec![-span; dim];
            'outer: loop {
                let mut d2 = 0.0;
                let mut flat = 0usize;
                for k in 0..dim {
                    let i = base[k] + offs[k];
                    let c = (i as f64 + 0.5) * h - p[k];
                    d2 += c * c;
                    flat = flat * ext[k] + (i - lo[k]) as usize;
                }
                if d2 <= r * r {
                    marked[flat] = true;
                }
                for k in (0..dim).rev() {
                    offs[k] += 1;
                    if offs[k] <= span {
                        continue 'outer;
                    }
                    offs[k] = -span;
                }
                break;
            }
        }
        let count = marked.iter().filter(|m| **m).count();
        let volume = count as f64 * h.powi(dim as i32);
        MinkowskiRow { r, volume, ratio: volume / (r * r) }
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn three_point_beta() {
        let mu = DiscreteMeasure::new(3, vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], vec![1.0; 3]).unwrap();
        let b = beta_number(&mu, &[0.0; 3], 2.0, 1).unwrap();
        assert_relative_eq!(b.eigenvalues[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(b.eigenvalues[1], 1.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(b.beta, (1.0f64 / 24.0).sqrt(), epsilon = 1e-14);
        let lone = beta_number(&mu, &[0.0; 3], 0.5, 1).unwrap();
        assert_eq!(lone.beta, 0.0);
        assert!(DiscreteMeasure::new(3, vec![[0.0, 0.0, 1.0]], vec![1.0]).is_err());
    }

    #[test]
    fn straight_measure_is_flat() {
        let pts: Vec<Point> = (0..50).map(|i| [0.3 * i as f64 / 50.0, 0.6 * i as f64 / 50.0, 0.0]).collect();
        let mu = DiscreteMeasure::new(3, pts, vec![0.01; 50]).unwrap();
        let j = jones_square(&mu, &[0.15, 0.3, 0.0], &[0.4, 0.2, 0.1]).unwrap();
        assert!(j.total < 1e-28, "{j:?}");
    }

    #[test]
    fn osc_of_three_points() {
        let mu = DiscreteMeasure::new(3, vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], vec![1.0; 3]).unwrap();
        let v = osc_lambda(&mu, &[0.0; 3], 2.0, 0.5).unwrap();
        // Only the scale 2 sees more than one atom collinear-free: each atom sees all three.
        let b2 = beta_number(&mu, &[0.0; 3], 2.0, 1).unwrap().beta_sq();
        let b2x = beta_number(&mu, &[1.0, 0.0, 0.0], 2.0, 1).unwrap().beta_sq();
        let b2y = beta_number(&mu, &[0.0, 1.0, 0.0], 2.0, 1).unwrap().beta_sq();
        assert!(v.is_finite() && v > 0.0);
        assert_relative_eq!(v, b2 + b2x + b2y, max_relative = 1e-12);
    }

    #[test]
    fn column_flux_is_exact_for_pi_profiles() {
        use crate::profiles::{embed_profile, Family, HomogeneousProfile};
        for s in [0.3, 0.5, 0.75] {
            let g = GridSpec::new(2, 1.0, 1.0 / 32.0, 1.0 - 2.0 * s).unwrap();
            let p = HomogeneousProfile::new(Family::Pi, 2, s, [1.0, 0.0, 0.0], 1.0).unwrap();
            let u = embed_profile(&p, g, false).unwrap();
            // Raw Pi_2 has trace t^{2s} x1^2 near the plane, so the flux is 2s x1^2.
            for i in [20usize, 32, 40] {
                let f = column_fit_flux(&u, g.plane_flat([i, 0]));
                let x = g.node_coords(g.plane_flat([i, 0]))[0];
                assert_relative_eq!(f, 2.0 * s * x * x, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn minkowski_of_segment_tube() {
        let g = GridSpec::new(3, 1.0, 1.0 / 64.0, 0.0).unwrap();
        let u = ScalarField::sample(g, |p| if p[2] == 0.0 && p[0] <= 0.0 { 0.0 } else { 1.0 }).unwrap();
        let set = extract_sets(&u, SetTolerances { contact: 1e-12, grad: 0.0, flux: 0.0 });
        let fb = set.free_boundary_points();
        assert!(fb.iter().all(|p| p[0] == 0.0));
        let rows = minkowski_profile(&set, &[0.0; 3], 0.5, &[0.125]).unwrap();
        // 65 atoms each covering one spacing: a segment of length 1 + h with two caps.
        let r: f64 = 0.125;
        let expect = std::f64::consts::PI * r * r * (1.0 + 1.0 / 64.0 + 4.0 * r / 3.0);
        assert_relative_eq!(rows[0].volume, expect, max_relative = 0.03);
    }
}
