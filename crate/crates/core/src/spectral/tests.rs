use super::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn grid(nx: usize, ny: usize) -> Grid<f64> {
    Grid::new(nx, ny).unwrap()
}

fn max_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (p, q)| m.max((p - q).abs()))
}

fn random_field(g: &Grid<f64>, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn(g.shape(), |_| rng.gen_range(-1.0..1.0))
}

#[test]
fn grid_invariants_enforced() {
    assert!(Grid::<f64>::new(6, 9).is_err());
    assert!(Grid::<f64>::new(9, 9).is_err());
    assert!(Grid::<f64>::new(8, 8).is_err());
    let g = grid(8, 9);
    assert_eq!(g.y(0), 0.0);
    assert_eq!(g.y(8), 1.0);
    assert_eq!(g.wavenumber(4), -4);
    assert_eq!(g.index(-1), Some(7));
    assert_eq!(g.index(4), None);
}

#[test]
fn transform_of_constant_and_cosine() {
    let g = grid(16, 9);
    let one = transform_x(&g, &g.sample(|_, _| 1.0)).unwrap();
    for (i, k) in g.wavenumbers() {
        for z in one.row(i) {
            let expect = if k == 0 { 1.0 } else { 0.0 };
            assert!((z.re - expect).abs() < 1e-15 && z.im.abs() < 1e-15);
        }
    }
    let c = transform_x(&g, &g.sample(|x, _| x.cos())).unwrap();
    for (i, k) in g.wavenumbers() {
        for z in c.row(i) {
            let expect = if k.abs() == 1 { 0.5 } else { 0.0 };
            assert!((z.re - expect).abs() < 1e-15 && z.im.abs() < 1e-15);
        }
    }
    assert!(c.conjugate_symmetry_defect() < 1e-15);
}

#[test]
fn transform_rejects_wrong_shape() {
    let g = grid(8, 9);
    let bad = Array2::<f64>::zeros((8, 10));
    assert!(matches!(transform_x(&g, &bad), Err(Error::Shape { .. })));
}

#[test]
fn round_trip_random_fields() {
    let g = grid(64, 65);
    for seed in 0..5 {
        let f = random_field(&g, seed);
        let back = inverse_x(&transform_x(&g, &f).unwrap());
        let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max_diff(&f, &back) <= 1e-12 * scale);
    }
}

#[test]
fn discrete_parseval() {
    let g = grid(32, 33);
    for seed in 10..13 {
        let f = random_field(&g, seed);
        let spec = transform_x(&g, &f).unwrap();
        // physical side: trapezoid in x, Clenshaw-Curtis in y
        let w = g.weights();
        let mut s = 0.0;
        for j in 0..g.nx() {
            for m in 0..g.ny() {
                s += f[[j, m]].powi(2) * w[m];
            }
        }
        let phys = (s * 2.0 * PI / g.nx() as f64).sqrt();
        assert!((phys - spec.l2_norm()).abs() <= 1e-12 * phys);
    }
}

#[test]
fn diff_x_examples() {
    let g = grid(16, 9);
    let s = SpectralField::from_fn(&g, |x, _| x.sin());
    let ds = diff_x(&s, 1).to_physical();
    assert!(max_diff(&ds, &g.sample(|x, _| x.cos())) < 1e-14);
    let c = SpectralField::from_fn(&g, |_, y| 3.0 + y);
    assert!(diff_x(&c, 1).max_abs_coeff() == 0.0);
    let prof: Vec<Cx<f64>> = g.y_nodes().iter().map(|y| Cx::new(y * y, 0.0)).collect();
    let e3 = SpectralField::from_modes(&g, &[(3, prof.clone())], false).unwrap();
    let d2 = diff_x(&e3, 2);
    for (m, z) in d2.mode(3).iter().enumerate() {
        assert_eq!(*z, prof[m] * -9.0);
    }
}

#[test]
fn diff_y_examples() {
    let g = grid(8, 17);
    let f = SpectralField::from_fn(&g, |_, y| y * (1.0 - y));
    let df = diff_y(&f, 1).unwrap().to_physical();
    assert!(max_diff(&df, &g.sample(|_, y| 1.0 - 2.0 * y)) < 1e-12);
    let c = SpectralField::from_fn(&g, |_, _| 2.5);
    assert!(diff_y(&c, 1).unwrap().max_abs_physical() < 1e-12);
    assert!(matches!(diff_y(&f, 5), Err(Error::Unsupported(_))));

    let g = grid(8, 33);
    let s = SpectralField::from_fn(&g, |_, y| (PI * y).sin());
    let d2 = diff_y(&s, 2).unwrap().to_physical();
    assert!(max_diff(&d2, &g.sample(|_, y| -PI * PI * (PI * y).sin())) < 1e-9);
}

#[test]
fn cumulative_integration_examples() {
    let g = grid(8, 17);
    let one = SpectralField::from_fn(&g, |_, _| 1.0);
    assert!(max_diff(&integrate_y_cumulative(&one).to_physical(), &g.sample(|_, y| y)) < 1e-14);
    let lin = SpectralField::from_fn(&g, |_, y| 2.0 * y);
    assert!(max_diff(&integrate_y_cumulative(&lin).to_physical(), &g.sample(|_, y| y * y)) < 1e-14);
    let g = grid(8, 33);
    let c = SpectralField::from_fn(&g, |_, y| (PI * y).cos());
    let ic = integrate_y_cumulative(&c).to_physical();
    assert!(max_diff(&ic, &g.sample(|_, y| (PI * y).sin() / PI)) < 1e-10);
    assert!(ic.column(0).iter().all(|v| *v == 0.0));
}

#[test]
fn dealias_product_examples() {
    let g = grid(24, 9);
    let one = SpectralField::from_fn(&g, |_, _| 1.0);
    let h = SpectralField::from_fn(&g, |x, y| (2.0 * x).sin() * y + x.cos());
    let p = dealias_product(&one, &h).unwrap();
    assert!((&p - &h).max_abs_coeff() < 1e-15);
    let c = SpectralField::from_fn(&g, |x, _| x.cos());
    let cc = dealias_product(&c, &c).unwrap().to_physical();
    assert!(max_diff(&cc, &g.sample(|x, _| 0.5 * (1.0 + (2.0 * x).cos()))) < 1e-14);

    // 2 * 15 = 30 aliases to -18 on a 48-point grid, beyond the cutoff 16
    let g = grid(48, 9);
    let hi = SpectralField::from_fn(&g, |x, _| (15.0 * x).cos());
    let sq = dealias_product(&hi, &hi).unwrap();
    for (i, k) in g.wavenumbers() {
        if g.is_truncated(k) {
            assert!(sq.row(i).iter().all(|z| z.norm() == 0.0), "k={k}");
        } else if k != 0 {
            assert!(sq.row(i).iter().all(|z| z.norm() < 1e-15), "k={k}");
        }
    }
    assert!((sq.mode(0)[0].re - 0.5).abs() < 1e-14);
    let other = grid(32, 9);
    assert!(matches!(
        dealias_product(&hi, &SpectralField::zeros(&other)),
        Err(Error::GridMismatch)
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn diff_x_composes_exactly(seed in 0u64..1000, order in 1u32..3) {
        let g = grid(16, 9);
        let f = transform_x(&g, &random_field(&g, seed)).unwrap();
        let a = diff_x(&diff_x(&f, order), 1);
        let b = diff_x(&f, order + 1);
        let scale = b.max_abs_coeff().max(1.0);
        prop_assert!((&a - &b).max_abs_coeff() <= 1e-14 * scale);
    }

    #[test]
    fn integration_is_right_inverse_of_diff(seed in 0u64..1000) {
        let g = grid(8, 17);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = SpectralField::from_fn(&g, |x, y| {
            c[0] + c[1] * y + c[2] * y.powi(5) + (c[3] + c[4] * y * y) * x.cos() + c[5] * (2.0 * x).sin() * y.powi(3)
        });
        let back = diff_y(&integrate_y_cumulative(&f), 1).unwrap();
        prop_assert!((&back - &f).max_abs_coeff() < 1e-12);
    }
}
