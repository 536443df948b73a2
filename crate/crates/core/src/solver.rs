//! Projected SOR for the thin obstacle problem with zero obstacle on the plane.
//!
//! The discretisation is a symmetric flux-form stencil. Every edge carries one weight
//! used by both of its nodes, so each relaxation step is an exact coordinate
//! minimisation of [`energy`] and the energy never increases between sweeps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Point, ScalarField};
use crate::par;

/// Order in which nodes are relaxed within a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOrder {
    Lexicographic,
    /// Two half-sweeps over a checkerboard colouring; each half-sweep is data-parallel.
    RedBlack,
}

/// Starting iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initialization {
    /// Zero inside, boundary data on the boundary.
    Zero,
    /// Unconstrained weighted-harmonic extension of the boundary data, then clipped at zero on the plane.
    HarmonicExtension,
    /// Solution on the grid of twice the spacing, interpolated and clipped.
    Nested,
}

/// Relaxation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveParams {
    pub omega: f64,
    /// Stop once the largest nodal change in a sweep is at most this.
    pub tolerance: f64,
    /// Defaults to `200 * (nodes per tangential axis)` when absent.
    pub max_sweeps: Option<usize>,
    pub order: SweepOrder,
    pub init: Initialization,
    /// Record the energy every this many sweeps (the last sweep is always recorded).
    pub energy_stride: usize,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            omega: 1.5,
            tolerance: 1e-8,
            max_sweeps: None,
            order: SweepOrder::Lexicographic,
            init: Initialization::Zero,
            energy_stride: 1,
        }
    }
}

impl SolveParams {
    /// Near-optimal over-relaxation `2 / (1 + sin(pi h / 2R))` for the box, with red-black
    /// ordering and nested initialisation.
    pub fn accelerated(spec: &GridSpec) -> Self {
        let x = std::f64::consts::PI / (2.0 * spec.cells() as f64);
        SolveParams {
            omega: 2.0 / (1.0 + x.sin()),
            order: SweepOrder::RedBlack,
            init: Initialization::Nested,
            ..SolveParams::default()
        }
    }
}

/// Outcome of a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub sweeps_used: usize,
    pub final_update: f64,
    pub energy_history: Vec<f64>,
    pub converged: bool,
    pub omega: f64,
}

impl SolveReport {
    /// Whether the recorded energies never increase by more than `rel_slack` relative.
    pub fn energy_nonincreasing(&self, rel_slack: f64) -> bool {
        self.energy_history.windows(2).all(|w| w[1] <= w[0] + rel_slack * w[0].abs())
    }
}

/// Dirichlet data on the outer box boundary.
#[derive(Clone, Copy)]
pub enum BoundaryData<'a> {
    Function(&'a (dyn Fn(&Point) -> f64 + Sync)),
    /// Values taken from a field on the same grid.
    Field(&'a ScalarField),
}

impl BoundaryData<'_> {
    fn value(&self, spec: &GridSpec, flat: usize) -> f64 {
        match self {
            BoundaryData::Function(f) => f(&spec.node_coords(flat)),
            BoundaryData::Field(u) => u.values()[flat],
        }
    }
}

/// Edge weights per normal layer.
pub(crate) struct Stencil {
    /// Weight of tangential edges in layer `j`.
    pub tan: Vec<f64>,
    /// Weight of the normal edge between layers `j` and `j + 1`.
    pub up: Vec<f64>,
}

impl Stencil {
    pub fn new(spec: &GridSpec) -> Self {
        let h = spec.spacing();
        let a = spec.a();
        let n = spec.cells();
        let mut tan = Vec::with_capacity(n + 1);
        tan.push((0.5 * h).powf(1.0 + a) / ((1.0 + a) * h));
        for j in 1..=n {
            tan.push((j as f64 * h).powf(a));
        }
        let up = (0..n).map(|j| ((j as f64 + 0.5) * h).powf(a)).collect();
        Stencil { tan, up }
    }

    fn down(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.up[j - 1]
        }
    }
}

/// Flat indices of the plane nodes of the columns away from the tangential boundary.
pub(crate) fn interior_columns(spec: &GridSpec) -> Vec<usize> {
    let m = 2 * spec.cells() + 1;
    let st = spec.strides();
    match spec.thin_dim() {
        1 => (1..m - 1).map(|i| i * st[0]).collect(),
        _ => (1..m - 1).flat_map(|i| (1..m - 1).map(move |k| i * st[0] + k * st[1])).collect(),
    }
}

fn column_parity(spec: &GridSpec, base: usize) -> usize {
    let idx = spec.multi(base);
    (0..spec.thin_dim()).map(|k| idx[k]).sum::<usize>() % 2
}

struct Relaxer {
    spec: GridSpec,
    stencil: Stencil,
    columns: Vec<usize>,
    parity: Vec<usize>,
    tan_strides: Vec<usize>,
    omega: f64,
    obstacle: bool,
}

impl Relaxer {
    fn new(spec: GridSpec, omega: f64, obstacle: bool) -> Self {
        let columns = interior_columns(&spec);
        let parity = columns.iter().map(|&b| column_parity(&spec, b)).collect();
        let st = spec.strides();
        Relaxer {
            spec,
            stencil: Stencil::new(&spec),
            columns,
            parity,
            tan_strides: st[..spec.thin_dim()].to_vec(),
            omega,
            obstacle,
        }
    }

    #[inline]
    fn relaxed(&self, u: &[f64], i: usize, j: usize) -> f64 {
        let wt = self.stencil.tan[j];
        let wu = self.stencil.up[j];
        let wd = self.stencil.down(j);
        let mut nb = 0.0;
        for &s in &self.tan_strides {
            nb += u[i + s] + u[i - s];
        }
        let mut sum = wt * nb + wu * u[i + 1];
        if j > 0 {
            sum += wd * u[i - 1];
        }
        let diag = 2.0 * self.tan_strides.len() as f64 * wt + wu + wd;
        let old = u[i];
        let mut new = old + self.omega * (sum / diag - old);
        if j == 0 && self.obstacle && new < 0.0 {
            new = 0.0;
        }
        new
    }

    fn sweep_lexicographic(&self, u: &mut [f64]) -> f64 {
        let n = self.spec.cells();
        let mut max = 0.0f64;
        for &b in &self.columns {
            for j in 0..n {
                let i = b + j;
                let new = self.relaxed(u, i, j);
                max = max.max((new - u[i]).abs());
                u[i] = new;
            }
        }
        max
    }

    fn sweep_red_black(&self, u: &mut [f64], scratch: &mut [f64]) -> f64 {
        let n = self.spec.cells();
        let mut max = 0.0f64;
        for color in 0..2 {
            {
                let u_ro: &[f64] = u;
                par::for_each_chunk_mut(scratch, n, |c, out| {
                    let b = self.columns[c];
                    let first = (color + self.parity[c]) % 2;
                    for j in (first..n).step_by(2) {
                        out[j] = self.relaxed(u_ro, b + j, j);
                    }
                });
            }
            for (c, &b) in self.columns.iter().enumerate() {
                let first = (color + self.parity[c]) % 2;
                let out = &scratch[c * n..(c + 1) * n];
                for j in (first..n).step_by(2) {
                    max = max.max((out[j] - u[b + j]).abs());
                    u[b + j] = out[j];
                }
            }
        }
        max
    }
}

/// Fraction of the dual face of an edge lying inside the box, from the tangential
/// boundary positions of its endpoints.
fn dual_fraction(spec: &GridSpec, idx: [usize; 3], skip_axis: usize) -> f64 {
    let m = 2 * spec.cells();
    let mut f = 1.0;
    for k in 0..spec.thin_dim() {
        if k != skip_axis && (idx[k] == 0 || idx[k] == m) {
            f *= 0.5;
        }
    }
    f
}

/// Discrete weighted Dirichlet energy `int |grad u|^2 |x_{n+1}|^a` over the full box
/// (both half-spaces): the quadratic form of the solver stencil.
pub fn energy(field: &ScalarField) -> f64 {
    let spec = *field.spec();
    let st = Stencil::new(&spec);
    let u = field.values();
    let n = spec.cells();
    let strides = spec.strides();
    let nd = spec.thin_dim();
    let m = 2 * n + 1;
    let columns: Vec<usize> = (0..spec.plane_node_count()).map(|k| spec.plane_flat(spec.plane_multi(k))).collect();
    let partial = par::map_slice(&columns, |&b| {
        let idx = spec.multi(b);
        let mut acc = CompensatedSum::default();
        for j in 0..=n {
            let i = b + j;
            let top = if j == n { 0.5 } else { 1.0 };
            for k in 0..nd {
                if idx[k] + 1 < m {
                    let d = u[i + strides[k]] - u[i];
                    acc.add(st.tan[j] * top * dual_fraction(&spec, idx, k) * d * d);
                }
            }
            if j < n {
                let d = u[i + 1] - u[i];
                acc.add(st.up[j] * dual_fraction(&spec, idx, usize::MAX) * d * d);
            }
        }
        acc.value()
    });
    let mut total = CompensatedSum::default();
    partial.iter().for_each(|v| total.add(*v));
    2.0 * spec.spacing().powi(nd as i32 - 1) * total.value()
}

/// Neumaier summation.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }
    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Weighted normal flux `lim t^a du/dt` at a plane node from the half-cell balance.
pub fn plane_flux(field: &ScalarField, flat: usize) -> f64 {
    let spec = field.spec();
    let st = Stencil::new(spec);
    let u = field.values();
    let c = u[flat];
    let mut acc = st.up[0] * (u[flat + 1] - c);
    for k in 0..spec.thin_dim() {
        let s = spec.strides()[k];
        acc += st.tan[0] * (u[flat + s] + u[flat - s] - 2.0 * c);
    }
    acc / spec.spacing()
}

/// Worst violations of the complementarity conditions on interior plane nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplementarityReport {
    /// `max(0, -min u)` on the plane.
    pub max_negative_trace: f64,
    /// `max(0, max flux)`; the flux must be non-positive.
    pub max_positive_flux: f64,
    /// `max |u * flux|`.
    pub max_product: f64,
}

pub fn complementarity_report(field: &ScalarField) -> ComplementarityReport {
    let spec = field.spec();
    let mut r = ComplementarityReport { max_negative_trace: 0.0, max_positive_flux: 0.0, max_product: 0.0 };
    for k in 0..spec.plane_node_count() {
        let tan = spec.plane_multi(k);
        if !spec.plane_is_interior(tan) {
            continue;
        }
        let i = spec.plane_flat(tan);
        let u = field.values()[i];
        let f = plane_flux(field, i);
        r.max_negative_trace = r.max_negative_trace.max(-u);
        r.max_positive_flux = r.max_positive_flux.max(f);
        r.max_product = r.max_product.max((u * f).abs());
    }
    r
}

/// Solves the thin obstacle problem on `spec` with Dirichlet data on the box boundary.
pub fn solve_obstacle(
    spec: GridSpec,
    boundary: BoundaryData<'_>,
    params: &SolveParams,
) -> Result<(ScalarField, SolveReport)> {
    validate(&spec, &boundary, params)?;
    solve_inner(spec, boundary, params, true)
}

fn validate(spec: &GridSpec, boundary: &BoundaryData<'_>, params: &SolveParams) -> Result<()> {
    if !(params.omega > 0.0 && params.omega < 2.0) {
        return Err(Error::InvalidParameter(format!("omega = {} outside (0, 2)", params.omega)));
    }
    if !(params.tolerance > 0.0) || params.energy_stride == 0 {
        return Err(Error::InvalidParameter("tolerance and energy stride must be positive".into()));
    }
    if let BoundaryData::Field(u) = boundary {
        if u.spec() != spec {
            return Err(Error::InvalidParameter("boundary field lives on a different grid".into()));
        }
    }
    for k in 0..spec.plane_node_count() {
        let tan = spec.plane_multi(k);
        if !spec.plane_is_interior(tan) {
            let i = spec.plane_flat(tan);
            let g = boundary.value(spec, i);
            if !g.is_finite() {
                return Err(Error::NonFinite { node: i, value: g });
            }
            if g < 0.0 {
                return Err(Error::NegativeTrace { node: i, value: g });
            }
        }
    }
    Ok(())
}

fn initial_field(spec: GridSpec, boundary: BoundaryData<'_>, params: &SolveParams, obstacle: bool) -> Result<Vec<f64>> {
    let n = spec.cells();
    let mut u = match params.init {
        Initialization::Zero => vec![0.0; spec.node_count()],
        Initialization::HarmonicExtension => {
            let p = SolveParams { init: Initialization::Nested, ..*params };
            solve_inner(spec, boundary, &p, false)?.0.into_values()
        }
        Initialization::Nested => {
            if n >= 16 && n.is_multiple_of(2) {
                let coarse = GridSpec::new(spec.ambient_dim(), spec.half_width(), 2.0 * spec.spacing(), spec.a())?;
                let g = |p: &Point| boundary_at(&spec, boundary, p);
                let cp = SolveParams {
                    omega: if params.omega > 1.5 { 2.0 / (1.0 + (std::f64::consts::PI / n as f64).sin()) } else { params.omega },
                    tolerance: params.tolerance * 10.0,
                    max_sweeps: None,
                    energy_stride: usize::MAX,
                    ..*params
                };
                let (cu, _) = solve_inner(coarse, BoundaryData::Function(&g), &cp, obstacle)?;
                par::map_range(spec.node_count(), |i| cu.interpolate(&spec.node_coords(i)).unwrap_or(0.0))
            } else {
                vec![0.0; spec.node_count()]
            }
        }
    };
    for (i, v) in u.iter_mut().enumerate() {
        let idx = spec.multi(i);
        if spec.is_box_boundary(idx) {
            *v = boundary.value(&spec, i);
        } else if obstacle && idx[spec.normal_axis()] == 0 && *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(u)
}

/// Boundary data at an arbitrary boundary point, used when building coarse problems.
fn boundary_at(spec: &GridSpec, boundary: BoundaryData<'_>, p: &Point) -> f64 {
    match boundary {
        BoundaryData::Function(f) => f(p),
        BoundaryData::Field(u) => u.interpolate(p).unwrap_or_else(|_| {
            let q = [
                p[0].clamp(-spec.half_width(), spec.half_width()),
                p[1].clamp(-spec.half_width(), spec.half_width()),
                p[2].clamp(-spec.half_width(), spec.half_width()),
            ];
            u.interpolate(&q).unwrap_or(0.0)
        }),
    }
}

fn solve_inner(
    spec: GridSpec,
    boundary: BoundaryData<'_>,
    params: &SolveParams,
    obstacle: bool,
) -> Result<(ScalarField, SolveReport)> {
    let mut u = initial_field(spec, boundary, params, obstacle)?;
    let relax = Relaxer::new(spec, params.omega, obstacle);
    let max_sweeps = params.max_sweeps.unwrap_or(200 * (2 * spec.cells() + 1));
    let mut scratch = match params.order {
        SweepOrder::RedBlack => vec![0.0; relax.columns.len() * spec.cells()],
        SweepOrder::Lexicographic => Vec::new(),
    };
    let record = |u: Vec<f64>| -> Result<(ScalarField, f64)> {
        let f = ScalarField::from_values(spec, u)?;
        let e = energy(&f);
        Ok((f, e))
    };
    let mut history = Vec::new();
    if params.energy_stride != usize::MAX {
        let (f, e) = record(u)?;
        history.push(e);
        u = f.into_values();
    }
    let mut sweeps = 0;
    let mut update = f64::INFINITY;
    while sweeps < max_sweeps {
        update = match params.order {
            SweepOrder::Lexicographic => relax.sweep_lexicographic(&mut u),
            SweepOrder::RedBlack => relax.sweep_red_black(&mut u, &mut scratch),
        };
        sweeps += 1;
        if !update.is_finite() {
            return Err(Error::NonFinite { node: 0, value: update });
        }
        let done = update <= params.tolerance;
        if params.energy_stride != usize::MAX && (sweeps % params.energy_stride == 0 || done || sweeps == max_sweeps) {
            let (f, e) = record(u)?;
            history.push(e);
            u = f.into_values();
        }
        if done {
            break;
        }
    }
    let field = ScalarField::from_values(spec, u)?;
    let report = SolveReport {
        sweeps_used: sweeps,
        final_update: update,
        energy_history: history,
        converged: update <= params.tolerance,
        omega: params.omega,
    };
    Ok((field, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn energy_of_linear_function() {
        // int_{[-1,1]^2} |t|^a = 4 / (1 + a); exact for a = 0, a layer sum otherwise.
        for (a, tol) in [(0.0, 1e-12), (-0.3, 1e-2), (0.4, 1e-2)] {
            let g = GridSpec::new(2, 1.0, 0.0625, a).unwrap();
            let u = ScalarField::sample(g, |p| p[0]).unwrap();
            assert_relative_eq!(energy(&u), 4.0 / (1.0 + a), max_relative = tol);
        }
        let g = GridSpec::new(3, 1.0, 0.25, 0.0).unwrap();
        let u = ScalarField::sample(g, |p| p[1]).unwrap();
        assert_relative_eq!(energy(&u), 8.0, max_relative = 1e-12);
    }

    #[test]
    fn rejects_negative_trace_and_bad_omega() {
        let g = GridSpec::new(2, 1.0, 0.25, 0.0).unwrap();
        let f = |p: &Point| p[0];
        assert!(matches!(
            solve_obstacle(g, BoundaryData::Function(&f), &SolveParams::default()),
            Err(Error::NegativeTrace { .. })
        ));
        let one = |_: &Point| 1.0;
        let p = SolveParams { omega: 2.0, ..SolveParams::default() };
        assert!(solve_obstacle(g, BoundaryData::Function(&one), &p).is_err());
    }

    #[test]
    fn constant_data_is_reproduced() {
        let g = GridSpec::new(2, 1.0, 0.125, 0.3).unwrap();
        let one = |_: &Point| 1.0;
        let (u, rep) = solve_obstacle(g, BoundaryData::Function(&one), &SolveParams::default()).unwrap();
        assert!(rep.converged);
        assert!(u.values().iter().all(|v| (v - 1.0).abs() < 1e-6));
    }

    #[test]
    fn orders_agree_and_energy_decreases() {
        let g = GridSpec::new(3, 1.0, 0.125, -0.2).unwrap();
        let data = |p: &Point| p[0] * p[0] - 0.3 + p[1];
        let lex = SolveParams { tolerance: 1e-11, ..SolveParams::default() };
        let rb = SolveParams { order: SweepOrder::RedBlack, init: Initialization::HarmonicExtension, ..lex };
        // Clip the trace on the boundary plane.
        let g2 = |p: &Point| if p[2] == 0.0 { data(p).max(0.0) } else { data(p) };
        let (u1, r1) = solve_obstacle(g, BoundaryData::Function(&g2), &lex).unwrap();
        let (u2, r2) = solve_obstacle(g, BoundaryData::Function(&g2), &rb).unwrap();
        assert!(r1.converged && r2.converged);
        assert!(r1.energy_nonincreasing(1e-13));
        let diff = u1.values().iter().zip(u2.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 1e-8, "{diff}");
        let c = complementarity_report(&u1);
        assert!(c.max_negative_trace == 0.0 && c.max_positive_flux < 1e-8 && c.max_product < 1e-8, "{c:?}");
    }
}
