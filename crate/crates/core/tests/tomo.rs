use projfeas::linalg::spmv;
use projfeas::tomo::*;
use proptest::prelude::*;

fn pixel_of(x: f64, y: f64, side: usize) -> usize {
    let w = 2.0 / side as f64;
    let v = (((x + 1.0) / w).floor() as usize).min(side - 1);
    let u = (((1.0 - y) / w).floor() as usize).min(side - 1);
    u * side + v
}

/// Distance from `(x, y)` to the nearest grid line.
fn grid_gap(x: f64, y: f64, side: usize) -> f64 {
    let w = 2.0 / side as f64;
    let g = |c: f64| {
        let s = (c + 1.0) / w;
        (s - s.round()).abs() * w
    };
    g(x).min(g(y))
}

fn forward_error(side: usize) -> f64 {
    let phantom = Phantom::head();
    let geometry = RayGeometry::new(60, 2 * side).unwrap();
    let p: ReconProblem<f64> = build_system(&phantom, &geometry, side, 0.0, 0).unwrap();
    let ax = spmv(&p.system, p.truth.data()).unwrap();
    let num: f64 = ax.iter().zip(&p.clean_data).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = p.clean_data.iter().map(|b| b * b).sum();
    (num / den).sqrt()
}

#[test]
fn rotated_ellipse_digitization_matches_point_test() {
    let e = Ellipse::new((0.1, -0.2), (0.7, 0.25), 0.6, 2.0).unwrap();
    let p = Phantom::new(vec![e]);
    let img: Image<f64> = digitize(&p, 16).unwrap();
    let (s, c) = 0.6f64.sin_cos();
    for u in 0..16 {
        for v in 0..16 {
            let x = -1.0 + (v as f64 + 0.5) / 8.0 - 0.1;
            let y = 1.0 - (u as f64 + 0.5) / 8.0 + 0.2;
            let (a, b) = ((c * x + s * y) / 0.7, (-s * x + c * y) / 0.25);
            let expected = if a * a + b * b <= 1.0 { 2.0 } else { 0.0 };
            assert_eq!(img.get(u, v), expected);
        }
    }
}

#[test]
fn analytic_integral_is_additive() {
    let head = Phantom::head();
    for ray in RayGeometry::new(7, 11).unwrap().rays() {
        let parts: f64 = head.ellipses.iter().map(|e| e.density * e.chord(&ray)).sum();
        assert_eq!(analytic_line_integral(&head, &ray), parts);
    }
}

#[test]
fn system_shape_matches_geometry() {
    let g = RayGeometry::new(12, 20).unwrap();
    let p: ReconProblem<f64> = build_system(&Phantom::head(), &g, 16, 0.0, 0).unwrap();
    assert_eq!(p.system.rows(), 240);
    assert_eq!(p.system.cols(), 256);
    assert_eq!(p.data, p.clean_data);
    assert_eq!((p.sigma, p.lambda), (5.0, 0.05));
}

#[test]
fn noise_is_seeded() {
    let g = RayGeometry::new(6, 10).unwrap();
    let a: ReconProblem<f64> = build_system(&Phantom::head(), &g, 8, 0.1, 4).unwrap();
    let b: ReconProblem<f64> = build_system(&Phantom::head(), &g, 8, 0.1, 4).unwrap();
    let c: ReconProblem<f64> = build_system(&Phantom::head(), &g, 8, 0.1, 5).unwrap();
    assert_eq!(a.data, b.data);
    assert_ne!(a.data, c.data);
    assert_ne!(a.data, a.clean_data);
}

#[test]
fn forward_model_refines_with_grid() {
    let errs: Vec<f64> = [16, 32, 64].into_iter().map(forward_error).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    assert!(errs[2] < 0.05, "{errs:?}");
}

#[test]
fn picture_distance_properties() {
    let t: Vec<f64> = vec![1.0, -2.0, 0.5];
    assert_eq!(picture_distance(&t, &t).unwrap(), 0.0);
    assert_eq!(picture_distance(&t, &[0.0; 3]).unwrap(), 1.0);
    let r = picture_distance(&t, &[1.5, -2.0, 0.0]).unwrap();
    assert!((r - 1.0 / 3.5).abs() < 1e-15);
    assert!(matches!(picture_distance(&[0.0; 3], &t), Err(projfeas::Error::ZeroReference)));
    assert!(picture_distance(&t, &[0.0; 2]).is_err());
}

#[test]
fn consistent_data_is_monotone_early() {
    let g = RayGeometry::new(30, 16).unwrap();
    let mut p: ReconProblem<f64> = build_system(&Phantom::head(), &g, 8, 0.0, 0).unwrap();
    p.data = spmv(&p.system, p.truth.data()).unwrap();
    let rec = reconstruct(&p, 8).unwrap();
    assert_eq!(rec.images.len(), 9);
    assert_eq!(rec.distance[0], 1.0);
    for k in 0..5 {
        assert!(rec.distance[k + 1] < rec.distance[k], "{:?}", rec.distance);
    }
    assert!(rec.objective[1] < rec.objective[0]);
    let best = rec.distance.iter().cloned().fold(f64::INFINITY, f64::min);
    assert_eq!(rec.distance[rec.best_cycle], best);
    assert_eq!(rec.best_image().data(), rec.images[rec.best_cycle].data());
}

#[test]
fn reconstruction_outputs() {
    let g = RayGeometry::new(10, 12).unwrap();
    let p: ReconProblem<f64> = build_system(&Phantom::head(), &g, 8, 0.0, 0).unwrap();
    let rec = reconstruct(&p, 3).unwrap();
    let mut csv = Vec::new();
    rec.write_csv(&mut csv, &["side=8".into()]).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().take(2).collect::<Vec<_>>(), ["# side=8", "cycle,objective,r"]);
    assert_eq!(text.lines().count(), 2 + 4);

    let mut pgm = Vec::new();
    rec.best_image().write_pgm16(&mut pgm).unwrap();
    assert!(pgm.starts_with(b"P5\n8 8\n65535\n"));
    assert_eq!(pgm.len(), b"P5\n8 8\n65535\n".len() + 2 * 64);

    let mut grid = Vec::new();
    p.truth.write_csv(&mut grid).unwrap();
    let grid = String::from_utf8(grid).unwrap();
    assert_eq!(grid.lines().count(), 8);
    assert!(grid.lines().all(|l| l.split(',').count() == 8));
}

#[test]
fn invalid_inputs() {
    let g = RayGeometry::new(4, 4).unwrap();
    assert!(build_system::<f64>(&Phantom::head(), &g, 8, -1.0, 0).is_err());
    assert!(build_system::<f64>(&Phantom::head(), &g, 1, 0.0, 0).is_err());
    assert!(RayGeometry::new(0, 4).is_err());
    let p: ReconProblem<f64> = build_system(&Phantom::head(), &g, 8, 0.0, 0).unwrap();
    assert!(reconstruct(&p, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn row_sum_is_field_chord(theta in 0.0f64..std::f64::consts::PI, offset in -1.5f64..1.5, side in 2usize..40) {
        let ray = Ray::new(theta, offset);
        let total: f64 = ray_row(&ray, side).iter().map(|&(_, l)| l).sum();
        prop_assert!((total - ray.field_chord()).abs() <= 1e-12);
    }

    #[test]
    fn support_matches_point_sampling(theta in 0.0f64..std::f64::consts::PI, offset in -1.3f64..1.3, side in 2usize..24) {
        let ray = Ray::new(theta, offset);
        let row = ray_row(&ray, side);
        let support: Vec<usize> = row.iter().map(|&(j, _)| j).collect();
        prop_assert!(support.windows(2).all(|w| w[0] < w[1]));
        let Some((t0, t1)) = ray.clip_to_field() else {
            prop_assert!(row.is_empty());
            return Ok(());
        };
        let samples = 20_000;
        let dt = (t1 - t0) / samples as f64;
        let mut seen = vec![0usize; side * side];
        for k in 0..samples {
            let (x, y) = ray.point(t0 + (k as f64 + 0.5) * dt);
            if grid_gap(x, y, side) > 1e-9 {
                let j = pixel_of(x, y, side);
                prop_assert!(support.contains(&j), "sample in pixel {} outside support", j);
                seen[j] += 1;
            }
        }
        for &(j, l) in &row {
            // a segment longer than two sample steps must contain a sample
            if l > 2.0 * dt {
                prop_assert!(seen[j] > 0, "pixel {} with length {} never sampled", j, l);
            }
            prop_assert!((seen[j] as f64 * dt - l).abs() <= 2.0 * dt + 1e-12);
        }
    }
}
