use proptest::prelude::*;

use thinobs::blowup::rescale_field;
use thinobs::frequency::{cutoff, frequency_components};
use thinobs::geometry::{beta_number, DiscreteMeasure};
use thinobs::profiles::{embed_profile, Family, HomogeneousProfile};
use thinobs::solver::{solve_obstacle, BoundaryData, SolveParams};
use thinobs::special::{gamma_real, pochhammer};
use thinobs::{GridSpec, Point, ScalarField};

fn cloud(n: usize) -> impl Strategy<Value = (Vec<Point>, Vec<f64>)> {
    (
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n),
        prop::collection::vec(0.1..2.0f64, n),
    )
        .prop_map(|(p, m)| (p.into_iter().map(|(x, y)| [x, y, 0.0]).collect(), m))
}

/// Rotation of the thin plane.
fn rotate_z(p: &Point, th: f64) -> Point {
    [th.cos() * p[0] - th.sin() * p[1], th.sin() * p[0] + th.cos() * p[1], p[2]]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn beta_is_invariant_under_rigid_motions_and_scaling(
        (pts, ms) in cloud(12),
        shift in (-2.0..2.0f64, -2.0..2.0f64),
        th in 0.0..6.3f64,
        c in 0.2..5.0f64,
    ) {
        let k = 1;
        let x0 = [0.1, -0.2, 0.0];
        let r = 1.3;
        let base = beta_number(&DiscreteMeasure::new(3, pts.clone(), ms.clone()).unwrap(), &x0, r, k).unwrap().beta;
        let sh = [shift.0, shift.1, 0.0];
        let moved: Vec<Point> = pts.iter().map(|p| {
            let q = rotate_z(p, th);
            [q[0] + sh[0], q[1] + sh[1], q[2] + sh[2]]
        }).collect();
        let y0 = { let q = rotate_z(&x0, th); [q[0] + sh[0], q[1] + sh[1], q[2] + sh[2]] };
        let b = beta_number(&DiscreteMeasure::new(3, moved, ms.clone()).unwrap(), &y0, r, k).unwrap().beta;
        prop_assert!((b - base).abs() <= 1e-9 * (1.0 + base), "{b} vs {base}");
        // A k-dimensional measure scales its masses by c^k.
        let scaled: Vec<Point> = pts.iter().map(|p| [c * p[0], c * p[1], c * p[2]]).collect();
        let sm: Vec<f64> = ms.iter().map(|m| m * c.powi(k as i32)).collect();
        let b = beta_number(&DiscreteMeasure::new(3, scaled, sm).unwrap(), &[c * x0[0], c * x0[1], c * x0[2]], c * r, k).unwrap().beta;
        prop_assert!((b - base).abs() <= 1e-9 * (1.0 + base), "{b} vs {base}");
    }

    #[test]
    fn beta_vanishes_on_points_of_a_line(ts in prop::collection::vec(-1.0..1.0f64, 3..20), th in 0.0..3.2f64) {
        let pts: Vec<Point> = ts.iter().map(|t| [0.3 + t * th.cos(), t * th.sin(), 0.0]).collect();
        let mu = DiscreteMeasure::new(3, pts.clone(), vec![1.0; pts.len()]).unwrap();
        prop_assert!(beta_number(&mu, &[0.3, 0.0, 0.0], 1.5, 1).unwrap().beta <= 1e-10);
    }

    #[test]
    fn cutoff_is_a_nonincreasing_profile(a in 0.0..3.0f64, b in 0.0..3.0f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!((0.0..=1.0).contains(&cutoff(lo)));
        prop_assert!(cutoff(hi) <= cutoff(lo));
    }

    #[test]
    fn gamma_and_pochhammer_recurrences(x in 0.05..6.0f64, l in 0u32..10) {
        let g = gamma_real(x).unwrap();
        let g1 = gamma_real(x + 1.0).unwrap();
        prop_assert!((g1 - x * g).abs() <= 1e-12 * g1.abs());
        let lhs = pochhammer(x, l + 1);
        prop_assert!((lhs - pochhammer(x, l) * (x + l as f64)).abs() <= 1e-13 * lhs.abs());
        let ratio = gamma_real(x + l as f64).unwrap() / g;
        prop_assert!((pochhammer(x, l) - ratio).abs() <= 1e-11 * ratio.abs());
    }

    #[test]
    fn field_dump_roundtrips(vals in prop::collection::vec(-1e3..1e3f64, 17 * 9), a in -0.9..0.9f64) {
        let spec = GridSpec::new(2, 1.0, 0.125, a).unwrap();
        let f = ScalarField::from_values(spec, vals).unwrap();
        let mut buf = Vec::new();
        f.write_dump(&mut buf).unwrap();
        prop_assert_eq!(ScalarField::read_dump(&buf[..]).unwrap(), f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn psor_energy_never_increases(c in prop::collection::vec(-1.0..1.0f64, 4), a in -0.6..0.6f64) {
        let spec = GridSpec::new(2, 1.0, 1.0 / 16.0, a).unwrap();
        // Non-negative on the plane, arbitrary sign away from it.
        let g = move |x: &Point| (c[0] + c[1] * x[0]).powi(2) + c[2] * x[1] + c[3] * x[1] * x[1];
        let (u, report) = solve_obstacle(spec, BoundaryData::Function(&g), &SolveParams::default()).unwrap();
        prop_assert!(report.energy_nonincreasing(1e-13));
        let plane_min = (0..spec.plane_node_count())
            .map(|k| u.values()[spec.plane_flat(spec.plane_multi(k))])
            .fold(f64::INFINITY, f64::min);
        prop_assert!(plane_min >= 0.0);
    }

    #[test]
    fn rescaling_normalises_the_height(r in 0.3..0.6f64, s in 0.2..0.8f64) {
        let spec = GridSpec::new(2, 1.0, 1.0 / 64.0, 1.0 - 2.0 * s).unwrap();
        let p = HomogeneousProfile::new(Family::Psi, 1, s, [1.0, 0.0, 0.0], 1.0).unwrap();
        let u = embed_profile(&p, spec, false).unwrap();
        let v = rescale_field(&u, &[0.0; 3], r).unwrap();
        let c = frequency_components(&v, &[0.0; 3], 1.0).unwrap();
        prop_assert!((c.h - 1.0).abs() <= 0.01, "H = {}", c.h);
        let i = frequency_components(&u, &[0.0; 3], r).unwrap().i.unwrap();
        prop_assert!((c.i.unwrap() - i).abs() <= 0.01, "{:?} vs {i}", c.i);
    }
}
