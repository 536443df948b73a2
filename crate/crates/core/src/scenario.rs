//! Scenario files: a grid, a field (explicit profile or dump, optionally used as boundary
//! data for a solve), set tolerances and a list of analyses. Running a scenario writes
//! deterministic reports into an output directory.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::blowup::{blowup_fit, BlowupFit};
use crate::error::{Error, Result};
use crate::frequency::frequency_curve;
use crate::geometry::{
    beta_number, extract_sets, jones_square, max_gradient, minkowski_profile, DiscreteMeasure, SetTolerances,
    ThinPointSet,
};
use crate::grid::{dist, GridSpec, Point, ScalarField};
use crate::profiles::{embed_profile, Family, HomogeneousProfile};
use crate::solver::{complementarity_report, solve_obstacle, BoundaryData, ComplementarityReport, SolveParams, SolveReport};
use crate::verify::Metric;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub grid: GridSpec,
    pub field: FieldSource,
    /// When present, the field supplies boundary data and the obstacle problem is solved.
    #[serde(default)]
    pub solve: Option<SolveConfig>,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    #[serde(default)]
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSource {
    Profile {
        family: Family,
        degree: u32,
        /// Unit direction in thin-hyperplane coordinates.
        #[serde(default = "default_direction")]
        direction: [f64; 2],
        #[serde(default = "one")]
        amplitude: f64,
        /// Scale to unit height at radius one.
        #[serde(default)]
        normalized: bool,
    },
    Dump {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    /// Red-black ordering, near-optimal relaxation and nested initialisation.
    #[serde(default = "yes")]
    pub accelerated: bool,
    #[serde(default = "default_solve_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub max_sweeps: Option<usize>,
    #[serde(default = "one_usize")]
    pub energy_stride: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { accelerated: true, tolerance: default_solve_tolerance(), max_sweeps: None, energy_stride: 1 }
    }
}

/// Set tolerances relative to `max |u|` (contact) and the largest gradient (the rest).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub contact_rel: f64,
    pub grad_rel: f64,
    pub flux_rel: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig { contact_rel: 1e-6, grad_rel: 1e-3, flux_rel: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Analysis {
    /// Frequency curves at the listed centres (thin coordinates), and optionally at every
    /// free-boundary node.
    Frequency {
        #[serde(default)]
        centers: Vec<[f64; 2]>,
        #[serde(default)]
        free_boundary_centers: bool,
        radii: Vec<f64>,
        #[serde(default = "default_slack")]
        slack: f64,
        #[serde(default)]
        expect_lambda: Option<f64>,
        #[serde(default = "default_lambda_tol")]
        lambda_tol: f64,
    },
    /// Blow-up fit at the free-boundary node nearest to `center` (default the origin).
    Blowup {
        #[serde(default)]
        center: Option<[f64; 2]>,
        /// Decreasing radii; the last one is `r_min`.
        radii: Vec<f64>,
        #[serde(default)]
        expect_lambda: Option<f64>,
        #[serde(default = "default_blowup_tol")]
        lambda_tol: f64,
        #[serde(default)]
        max_residual: Option<f64>,
    },
    /// Contact, free-boundary and nodal sets, beta numbers and Jones sums over the
    /// free-boundary measure, and a Minkowski profile.
    Geometry {
        #[serde(default)]
        beta_radii: Vec<f64>,
        #[serde(default)]
        jones_scales: Vec<f64>,
        #[serde(default)]
        max_jones: Option<f64>,
        #[serde(default)]
        minkowski: Option<MinkowskiConfig>,
    },
}

impl Analysis {
    pub fn kind(&self) -> &'static str {
        match self {
            Analysis::Frequency { .. } => "frequency",
            Analysis::Blowup { .. } => "blowup",
            Analysis::Geometry { .. } => "geometry",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinkowskiConfig {
    #[serde(default)]
    pub center: [f64; 2],
    pub radius: f64,
    pub radii: Vec<f64>,
    /// Accepted range of `volume / r^2`.
    #[serde(default)]
    pub expect_ratio: Option<[f64; 2]>,
}

fn default_direction() -> [f64; 2] {
    [1.0, 0.0]
}
fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn yes() -> bool {
    true
}
fn default_solve_tolerance() -> f64 {
    1e-10
}
fn default_slack() -> f64 {
    1e-3
}
fn default_lambda_tol() -> f64 {
    0.03
}
fn default_blowup_tol() -> f64 {
    0.05
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks everything that can be checked without computing.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let t = &self.tolerances;
        if !(t.contact_rel > 0.0 && t.grad_rel > 0.0 && t.flux_rel > 0.0) {
            return bad(format!("tolerances must be positive: {t:?}"));
        }
        if let Some(sv) = &self.solve {
            if !(sv.tolerance > 0.0) || sv.energy_stride == 0 {
                return bad("solve tolerance and energy_stride must be positive".into());
            }
        }
        if let FieldSource::Profile { .. } = &self.field {
            self.profile()?;
        }
        for (i, a) in self.analyses.iter().enumerate() {
            let positive = |v: &[f64]| v.iter().all(|&r| r > 0.0 && r.is_finite());
            let ok = match a {
                Analysis::Frequency { radii, slack, lambda_tol, centers, free_boundary_centers, .. } => {
                    !radii.is_empty()
                        && positive(radii)
                        && *slack >= 0.0
                        && *lambda_tol > 0.0
                        && (!centers.is_empty() || *free_boundary_centers)
                }
                Analysis::Blowup { radii, lambda_tol, max_residual, .. } => {
                    !radii.is_empty() && positive(radii) && *lambda_tol > 0.0 && max_residual.is_none_or(|m| m > 0.0)
                }
                Analysis::Geometry { beta_radii, jones_scales, minkowski, max_jones } => {
                    positive(beta_radii)
                        && positive(jones_scales)
                        && max_jones.is_none_or(|m| m >= 0.0)
                        && minkowski.as_ref().is_none_or(|m| m.radius > 0.0 && positive(&m.radii))
                }
            };
            if !ok {
                return bad(format!("analysis {i} ({}) has missing or non-positive parameters", a.kind()));
            }
        }
        Ok(())
    }

    fn profile(&self) -> Result<Option<(HomogeneousProfile, bool)>> {
        match &self.field {
            FieldSource::Profile { family, degree, direction, amplitude, normalized } => {
                let dir = if self.grid.ambient_dim() == 2 {
                    [direction[0], 0.0, 0.0]
                } else {
                    [direction[0], direction[1], 0.0]
                };
                let p = HomogeneousProfile::new(*family, *degree, self.grid.s(), dir, *amplitude)
                    .map_err(|e| Error::Config(e.to_string()))?;
                Ok(Some((p, *normalized)))
            }
            FieldSource::Dump { .. } => Ok(None),
        }
    }

    /// The field described by `field`, before any solve.
    pub fn source_field(&self) -> Result<ScalarField> {
        if let Some((p, normalized)) = self.profile()? {
            return embed_profile(&p, self.grid, normalized).map_err(|e| Error::Config(e.to_string()));
        }
        let FieldSource::Dump { path } = &self.field else { unreachable!() };
        let file = fs::File::open(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let f = ScalarField::read_dump(io::BufReader::new(file)).map_err(|e| Error::Config(e.to_string()))?;
        if *f.spec() != self.grid {
            return Err(Error::Config(format!("dump grid {:?} differs from the configured grid", f.spec())));
        }
        Ok(f)
    }
}

/// Tolerances as configured and as applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppliedTolerances {
    pub relative: ToleranceConfig,
    pub sets: SetTolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub report: SolveReport,
    pub complementarity: ComplementarityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalysisReport {
    Frequency { file: String, centers: usize, violations: usize },
    Blowup { file: String, fit: Box<BlowupFit> },
    Geometry {
        sets_file: String,
        contact_count: usize,
        free_boundary_count: usize,
        nodal_count: usize,
        files: Vec<String>,
    },
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub report_version: u32,
    pub config: ScenarioConfig,
    pub tolerances: AppliedTolerances,
    pub solve: Option<SolveSummary>,
    pub analyses: Vec<AnalysisReport>,
    pub checks: Vec<Metric>,
    pub passed: bool,
}

/// Writes floats with 17 significant digits and otherwise pretty-prints.
struct FixedFloats<'a>(PrettyFormatter<'a>);

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for FixedFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{:.16e}", value as f64)
    }
    forward! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

/// Serialises `value` as pretty JSON with fixed-precision floats.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("JSON is UTF-8"))
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "nan".into()
    }
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| num(v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

fn coord_header(dim: usize) -> Vec<&'static str> {
    ["cx", "cy", "cz"][..dim].to_vec()
}

fn thin_point(spec: &GridSpec, c: &[f64; 2]) -> Point {
    if spec.ambient_dim() == 2 {
        [c[0], 0.0, 0.0]
    } else {
        [c[0], c[1], 0.0]
    }
}

/// Outcome of a scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    pub summary: ScenarioSummary,
    pub output_dir: PathBuf,
}

impl ScenarioOutcome {
    pub fn passed(&self) -> bool {
        self.summary.passed
    }
    pub fn failing_checks(&self) -> Vec<&Metric> {
        self.summary.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Runs a scenario and writes its reports: `summary.json` always, `field.tfb` after a
/// solve, and one set of files per analysis. Configuration problems are returned as
/// [`Error::Config`]; numerical failures inside analyses become failing checks.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioOutcome> {
    config.validate()?;
    let out = config.output_dir.clone().ok_or_else(|| Error::Config("no output directory given".into()))?;
    fs::create_dir_all(&out)?;
    let source = config.source_field()?;
    let mut checks = Vec::new();

    let (field, solve) = match &config.solve {
        Some(sv) => {
            let spec = config.grid;
            let mut params = if sv.accelerated { SolveParams::accelerated(&spec) } else { SolveParams::default() };
            params.tolerance = sv.tolerance;
            params.max_sweeps = sv.max_sweeps;
            params.energy_stride = sv.energy_stride;
            let (u, report) = solve_obstacle(spec, BoundaryData::Field(&source), &params)?;
            let comp = complementarity_report(&u);
            checks.push(Metric::check(
                format!("solve converged (tolerance {:e})", sv.tolerance),
                report.converged,
                "converged",
            ));
            let mut w = BufWriter::new(fs::File::create(out.join("field.tfb"))?);
            u.write_dump(&mut w)?;
            w.flush()?;
            (u, Some(SolveSummary { report, complementarity: comp }))
        }
        None => (source, None),
    };

    let rel = config.tolerances;
    let g = max_gradient(&field);
    let set_tol = SetTolerances { contact: rel.contact_rel * field.max_abs(), grad: rel.grad_rel * g, flux: rel.flux_rel * g };
    let tolerances = AppliedTolerances { relative: rel, sets: set_tol };
    let sets = (!config.analyses.is_empty()).then(|| extract_sets(&field, set_tol));

    let mut analyses = Vec::new();
    for (i, a) in config.analyses.iter().enumerate() {
        let sets = sets.as_ref().expect("sets exist when analyses do");
        let report = match run_analysis(i, a, &field, sets, &out, &mut checks) {
            Ok(r) => r,
            Err(e) => {
                checks.push(Metric::check(format!("analysis {i} ({}) ran", a.kind()), false, format!("error: {e}")));
                AnalysisReport::Failed { error: e.to_string() }
            }
        };
        analyses.push(report);
    }

    let passed = checks.iter().all(|c| c.passed);
    let summary = ScenarioSummary {
        report_version: REPORT_VERSION,
        config: config.clone(),
        tolerances,
        solve,
        analyses,
        checks,
        passed,
    };
    fs::write(out.join("summary.json"), to_json_string(&summary)?)?;
    Ok(ScenarioOutcome { summary, output_dir: out })
}

fn nearest_free_boundary(sets: &ThinPointSet, target: &Point) -> Result<Point> {
    sets.free_boundary_points()
        .into_iter()
        .min_by(|p, q| dist(p, target).total_cmp(&dist(q, target)))
        .ok_or_else(|| Error::InvalidParameter("the field has no free-boundary nodes".into()))
}

fn run_analysis(
    i: usize,
    analysis: &Analysis,
    field: &ScalarField,
    sets: &ThinPointSet,
    out: &Path,
    checks: &mut Vec<Metric>,
) -> Result<AnalysisReport> {
    let spec = *field.spec();
    let dim = spec.ambient_dim();
    match analysis {
        Analysis::Frequency { centers, free_boundary_centers, radii, slack, expect_lambda, lambda_tol } => {
            let mut pts: Vec<Point> = centers.iter().map(|c| thin_point(&spec, c)).collect();
            if *free_boundary_centers {
                pts.extend(sets.free_boundary_points());
            }
            let mut sorted = radii.clone();
            sorted.sort_by(f64::total_cmp);
            let mut rows = Vec::new();
            let mut violations = 0;
            let mut worst: f64 = 0.0;
            for p in &pts {
                let curve = frequency_curve(field, p, &sorted, *slack)?;
                violations += curve.violations.len();
                for c in &curve.rows {
                    let mut row: Vec<f64> = p[..dim].to_vec();
                    row.extend([c.r, c.h, c.d, c.e, c.i.unwrap_or(f64::NAN)]);
                    rows.push(row);
                    if let Some(l) = expect_lambda {
                        worst = worst.max(c.i.map_or(f64::INFINITY, |v| (v - l).abs()));
                    }
                }
            }
            let file = format!("frequency_{i}.csv");
            let mut header = coord_header(dim);
            header.extend(["r", "H", "D", "E", "I"]);
            write_csv(&out.join(&file), &header, &rows)?;
            checks.push(Metric::at_most(
                format!("frequency {i}: monotonicity violations beyond slack {slack:e}"),
                violations as f64,
                0.0,
            ));
            if let Some(l) = expect_lambda {
                checks.push(Metric::at_most(format!("frequency {i}: max |I - {l}|"), worst, *lambda_tol));
            }
            Ok(AnalysisReport::Frequency { file, centers: pts.len(), violations })
        }
        Analysis::Blowup { center, radii, expect_lambda, lambda_tol, max_residual } => {
            let target = thin_point(&spec, &center.unwrap_or([0.0, 0.0]));
            let x0 = nearest_free_boundary(sets, &target)?;
            let mut sorted = radii.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            let fit = blowup_fit(field, sets, &x0, &sorted)?;
            let rows: Vec<Vec<f64>> = fit
                .per_radius
                .iter()
                .map(|f| {
                    let mut row = vec![f.r, f.frequency, f.residual, f.amplitude];
                    row.extend_from_slice(&f.direction[..dim]);
                    row
                })
                .collect();
            let file = format!("blowup_{i}.csv");
            let mut header = vec!["r", "I", "residual", "amplitude"];
            header.extend(["ex", "ey", "ez"][..dim].iter());
            write_csv(&out.join(&file), &header, &rows)?;
            if let Some(l) = expect_lambda {
                checks.push(Metric::at_most(
                    format!("blowup {i}: |lambda_estimate - {l}|"),
                    (fit.lambda_estimate - l).abs(),
                    *lambda_tol,
                ));
            }
            if let Some(m) = max_residual {
                checks.push(Metric::at_most(format!("blowup {i}: fit residual"), fit.residual, *m));
            }
            Ok(AnalysisReport::Blowup { file, fit: Box::new(fit) })
        }
        Analysis::Geometry { beta_radii, jones_scales, max_jones, minkowski } => {
            let record = sets.record();
            let sets_file = format!("sets_{i}.json");
            fs::write(out.join(&sets_file), to_json_string(&record)?)?;
            let mu = DiscreteMeasure::from_free_boundary(sets);
            let k = dim - 2;
            let mut files = Vec::new();
            if !beta_radii.is_empty() {
                let mut rows = Vec::new();
                for p in mu.points() {
                    for &r in beta_radii {
                        let b = beta_number(&mu, p, r, k)?;
                        let mut row = p[..dim].to_vec();
                        row.extend([r, b.mass, b.beta_sq()]);
                        rows.push(row);
                    }
                }
                let file = format!("beta_{i}.csv");
                let mut header = coord_header(dim);
                header.extend(["r", "mass", "beta_sq"]);
                write_csv(&out.join(&file), &header, &rows)?;
                files.push(file);
            }
            if !jones_scales.is_empty() {
                let mut rows = Vec::new();
                let mut worst: f64 = 0.0;
                for p in mu.points() {
                    let j = jones_square(&mu, p, jones_scales)?;
                    worst = worst.max(j.total);
                    let mut row = p[..dim].to_vec();
                    row.push(j.total);
                    rows.push(row);
                }
                let file = format!("jones_{i}.csv");
                let mut header = coord_header(dim);
                header.push("jones");
                write_csv(&out.join(&file), &header, &rows)?;
                files.push(file);
                if let Some(m) = max_jones {
                    checks.push(Metric::at_most(format!("geometry {i}: max Jones sum"), worst, *m));
                }
            }
            if let Some(mk) = minkowski {
                let table = minkowski_profile(sets, &thin_point(&spec, &mk.center), mk.radius, &mk.radii)?;
                let rows: Vec<Vec<f64>> = table.iter().map(|r| vec![r.r, r.volume, r.ratio]).collect();
                let file = format!("minkowski_{i}.csv");
                write_csv(&out.join(&file), &["r", "volume", "ratio"], &rows)?;
                files.push(file);
                if let Some([lo, hi]) = mk.expect_ratio {
                    for row in &table {
                        checks.push(Metric::within(format!("geometry {i}: volume / r^2 at r = {}", row.r), row.ratio, lo, hi));
                    }
                }
            }
            Ok(AnalysisReport::Geometry {
                sets_file,
                contact_count: record.contact_count,
                free_boundary_count: record.free_boundary_count,
                nodal_count: record.nodal_count,
                files,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn psi_config(dir: &Path) -> String {
        format!(
            r#"{{
  "grid": {{"ambient_dim": 2, "half_width": 1.0, "spacing": 0.015625, "a": 0.0}},
  "field": {{"kind": "profile", "family": "psi", "degree": 1, "normalized": true}},
  "analyses": [{{"kind": "frequency", "centers": [[0.0, 0.0]], "radii": [0.2, 0.4], "expect_lambda": 1.5}}],
  "output_dir": {:?}
}}"#,
            dir.display().to_string()
        )
    }

    #[test]
    fn exact_profile_frequency_check_passes() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ScenarioConfig::from_json(&psi_config(dir.path())).unwrap();
        let out = run_scenario(&cfg).unwrap();
        assert!(out.passed(), "{:?}", out.failing_checks());
        let csv = fs::read_to_string(dir.path().join("frequency_0.csv")).unwrap();
        assert_eq!(csv.lines().next().unwrap(), "cx,cy,r,H,D,E,I");
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn invalid_weight_is_a_config_error() {
        let text = psi_config(Path::new("/tmp")).replace("\"a\": 0.0", "\"a\": 1.5");
        assert!(matches!(ScenarioConfig::from_json(&text), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = psi_config(Path::new("/tmp")).replace("\"normalized\"", "\"normalised\"");
        assert!(matches!(ScenarioConfig::from_json(&text), Err(Error::Config(_))));
    }

    #[test]
    fn empty_analyses_write_only_the_summary() {
        let dir = tempfile::tempdir().unwrap();
        let text = psi_config(dir.path());
        let mut cfg = ScenarioConfig::from_json(&text).unwrap();
        cfg.analyses.clear();
        run_scenario(&cfg).unwrap();
        let names: Vec<String> =
            fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
        assert_eq!(names, vec!["summary.json".to_string()]);
        let summary: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["report_version"], 1);
        assert_eq!(summary["tolerances"]["relative"]["contact_rel"], 1e-6);
    }

    #[test]
    fn floats_have_seventeen_significant_digits() {
        let s = to_json_string(&vec![0.1f64, 2.0]).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("2.0000000000000000e0"), "{s}");
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![0.1, 2.0]);
    }
}
