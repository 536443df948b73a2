//! Rayon backend against sequential execution on the hot loops. Run once with default
//! features and once with `--no-default-features` to compare the two builds; the rayon
//! build also reports a one-thread pool.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use thinobs::frequency::frequency;
use thinobs::geometry::{extract_sets, minkowski_profile, SetTolerances};
use thinobs::profiles::{embed_profile, Family, HomogeneousProfile};
use thinobs::solver::{solve_obstacle, BoundaryData, SolveParams};
use thinobs::{GridSpec, Point, ScalarField};

fn psi(spec: GridSpec) -> ScalarField {
    let p = HomogeneousProfile::new(Family::Psi, 1, spec.s(), [1.0, 0.0, 0.0], 1.0).unwrap();
    embed_profile(&p, spec, true).unwrap()
}

/// Runs `f` under each backend available in this build.
fn backends(c: &mut Criterion, group: &str, f: impl Fn() + Sync) {
    let mut g = c.benchmark_group(group);
    g.sample_size(10);
    let label = if thinobs::par::is_parallel() { "rayon" } else { "sequential" };
    g.bench_function(BenchmarkId::new(label, "default"), |b| b.iter(&f));
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        g.bench_function(BenchmarkId::new("rayon", "1 thread"), |b| b.iter(|| pool.install(&f)));
    }
    g.finish();
}

fn red_black_sweeps(c: &mut Criterion) {
    let spec = GridSpec::new(3, 0.5, 1.0 / 64.0, 0.0).unwrap();
    let g = |x: &Point| x[0] * x[0] + x[1] * x[1] - 2.0 * x[2] * x[2] - 0.1;
    let params = SolveParams { tolerance: 1e-300, max_sweeps: Some(40), energy_stride: 40, ..SolveParams::accelerated(&spec) };
    backends(c, "red_black_40_sweeps_3d_64", || {
        solve_obstacle(spec, BoundaryData::Function(&g), &params).unwrap();
    });
}

fn frequency_many_centres(c: &mut Criterion) {
    let u = psi(GridSpec::new(3, 1.0, 1.0 / 32.0, 0.0).unwrap());
    let centres: Vec<Point> = (0..8).map(|i| [-0.2 + 0.05 * i as f64, 0.1, 0.0]).collect();
    backends(c, "frequency_8_centres_3d_32", || {
        for x in &centres {
            frequency(&u, x, 0.5).unwrap();
        }
    });
}

fn minkowski_tubes(c: &mut Criterion) {
    let u = psi(GridSpec::new(3, 0.5, 1.0 / 128.0, 0.0).unwrap());
    let sets = extract_sets(&u, SetTolerances::relative_defaults(&u));
    backends(c, "minkowski_3_radii_3d_128", || {
        minkowski_profile(&sets, &[0.0; 3], 0.4, &[0.1, 0.05, 0.025]).unwrap();
    });
}

criterion_group!(benches, red_black_sweeps, frequency_many_centres, minkowski_tubes);
criterion_main!(benches);
