use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use thinflow::ans::{
    energy_norm, error_vs_hydro, hydrostatic_trick_residual, mean_flux, mean_wall_stress, reconstruct_velocity,
    AnsSolver, AnsState, InfluenceOperator, Reference,
};
use thinflow::hydro::{FlowParams, HydroSolver, HydroState};
use thinflow::linalg::{solve2, Lu};
use thinflow::spectral::DirichletSolver;
use thinflow::{Cx, Error, Field64, Grid64, SpectralField};

fn h(y: f64) -> f64 {
    y * y * (1.0 - y) * (1.0 - y) * (1.0 - 2.0 * y)
}

fn datum(g: &Grid64, delta: f64) -> Field64 {
    SpectralField::from_fn(g, |x, y| -y * (1.0 - y) + delta * x.cos() * h(y))
}

fn max_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (p, q)| m.max((p - q).abs()))
}

#[test]
fn reconstruct_velocity_examples() {
    let g = Grid64::new(16, 33).unwrap();
    let mut s = AnsState::zeros(&g, 0.1);
    let (u, v) = reconstruct_velocity(&s);
    assert_eq!(u.max_abs_coeff() + v.max_abs_coeff(), 0.0);

    s.ubar = g.y_nodes().iter().map(|&y| y * (1.0 - y)).collect();
    let (u, v) = reconstruct_velocity(&s);
    assert!(max_diff(&u.to_physical(), &g.sample(|_, y| y * (1.0 - y))) < 1e-15);
    assert_eq!(v.max_abs_coeff(), 0.0);

    s.ubar.fill(0.0);
    s.phi = SpectralField::from_fn(&g, |x, y| x.sin() * (PI * y).sin().powi(2));
    let (u, v) = reconstruct_velocity(&s);
    let ue = g.sample(|x, y| 2.0 * PI * x.sin() * (PI * y).sin() * (PI * y).cos());
    let ve = g.sample(|x, y| -x.cos() * (PI * y).sin().powi(2));
    assert!(max_diff(&u.to_physical(), &ue) < 1e-10);
    assert!(max_diff(&v.to_physical(), &ve) < 1e-14);
    let div = &thinflow::spectral::diff_x(&u, 1) + &thinflow::spectral::diff_y(&v, 1).unwrap();
    assert!(div.max_abs_coeff() < 1e-12);
}

#[test]
fn hydrostatic_trick_examples() {
    let g = Grid64::new(16, 33).unwrap();
    let phi = SpectralField::from_fn(&g, |x, y| x.sin() * (PI * y).sin().powi(2));
    assert!(hydrostatic_trick_residual(&phi, 0.1).unwrap() <= 1e-10);
    assert_eq!(hydrostatic_trick_residual(&Field64::zeros(&g), 0.1).unwrap(), 0.0);
    // nonzero wall values break the integration by parts
    let bad = SpectralField::from_fn(&g, |x, y| x.sin() * (1.0 + y) + (x + 0.3).cos() * y * y);
    assert!(hydrostatic_trick_residual(&bad, 0.1).unwrap() > 0.1);
}

#[test]
fn heat_equation_oracle() {
    let g = Grid64::new(8, 33).unwrap();
    let u0 = SpectralField::from_fn(&g, |_, y| (PI * y).sin());
    let state = AnsState::from_velocity(&u0, 0.1, 0.0).unwrap();
    let mut s = AnsSolver::new(state, FlowParams::new(1e-4, 0.0)).unwrap();
    s.run_until(0.1).unwrap();
    let (u, _) = reconstruct_velocity(s.state());
    let exact = g.sample(|_, y| (-PI * PI * 0.1).exp() * (PI * y).sin());
    let err = max_diff(&u.to_physical(), &exact);
    assert!(err < 1e-6, "{err:e}");
}

#[test]
fn rest_stays_at_rest() {
    let g = Grid64::new(16, 17).unwrap();
    let mut s = AnsSolver::new(AnsState::zeros(&g, 0.1), FlowParams::new(1e-3, 0.0)).unwrap();
    for _ in 0..10 {
        s.step().unwrap();
    }
    assert_eq!(s.state().omega.max_abs_coeff(), 0.0);
    assert_eq!(s.state().ubar.iter().fold(0.0f64, |m, x| m.max(x.abs())), 0.0);
}

fn operators(g: &Grid64, eps: f64, h: f64) -> (DirichletSolver<f64>, DirichletSolver<f64>, InfluenceOperator<f64>) {
    let helm = DirichletSolver::helmholtz(g, eps, h).unwrap();
    let poisson = DirichletSolver::poisson(g, eps).unwrap();
    let inf = InfluenceOperator::new(g, &helm, &poisson).unwrap();
    (helm, poisson, inf)
}

#[test]
fn influence_correction_examples() {
    let g = Grid64::new(16, 33).unwrap();
    let (_, _, inf) = operators(&g, 0.1, 1e-3);
    let ny = g.ny();
    let d1 = &g.ops().d1;
    let dphi = |p: &Array1<Cx<f64>>, w: usize| (0..ny).fold(Cx::new(0.0, 0.0), |s, n| s + p[n] * d1[[w, n]]);

    // already no-slip: sin^2(pi y) has zero wall slope
    let mut om: Array1<Cx<f64>> = g
        .y_nodes()
        .iter()
        .map(|&y| Cx::new((2.0 * PI * y).cos(), 0.0))
        .collect();
    let mut ph: Array1<Cx<f64>> = g
        .y_nodes()
        .iter()
        .map(|&y| Cx::new((PI * y).sin().powi(2), 0.0))
        .collect();
    let a = inf.correct_mode(&g, 3, &mut om, &mut ph).unwrap();
    assert!(a[0].norm() < 1e-10 && a[1].norm() < 1e-10);

    // manufactured defect (1, 0) at the walls
    let mut ph: Array1<Cx<f64>> = g
        .y_nodes()
        .iter()
        .map(|&y| Cx::new(y * (1.0 - y) * (1.0 - y), 0.0))
        .collect();
    assert!((dphi(&ph, 0) - Cx::new(1.0, 0.0)).norm() < 1e-12);
    assert!(dphi(&ph, ny - 1).norm() < 1e-12);
    let mut om = Array1::from_elem(ny, Cx::new(0.0, 0.0));
    inf.correct_mode(&g, 2, &mut om, &mut ph).unwrap();
    assert!(dphi(&ph, 0).norm() <= 1e-10 && dphi(&ph, ny - 1).norm() <= 1e-10);

    // 2x2 solve against least squares via the normal equations
    for k in 1..8 {
        let m = inf.matrix(k);
        let b = [Cx::new(0.3, -0.1), Cx::new(-1.2, 0.5)];
        let x = solve2(m, b).unwrap();
        let mut ata = [[Cx::new(0.0, 0.0); 2]; 2];
        let mut atb = [Cx::new(0.0, 0.0); 2];
        for i in 0..2 {
            for j in 0..2 {
                for r in 0..2 {
                    ata[i][j] += m[r][i].conj() * m[r][j];
                }
            }
            for r in 0..2 {
                atb[i] += m[r][i].conj() * b[r];
            }
        }
        let y = solve2(&ata, atb).unwrap();
        for i in 0..2 {
            assert!((x[i] - y[i]).norm() <= 1e-12 * x[i].norm().max(1.0));
        }
    }
}

#[test]
fn influence_step_matches_dense_coupled_solve() {
    // one implicit Stokes step for a single mode: unknowns (omega, phi),
    // (I - h L) omega = r and L phi = omega in the interior, phi = d_y phi = 0 at the walls
    let g = Grid64::new(16, 25).unwrap();
    let (eps, h, k) = (0.2, 1e-3, 3i64);
    let (helm, poisson, inf) = operators(&g, eps, h);
    let ny = g.ny();
    let ops = g.ops();
    let k2 = (eps * k as f64).powi(2);
    let rhs: Array1<Cx<f64>> = g
        .y_nodes()
        .iter()
        .map(|&y| Cx::new((3.0 * y).sin() + y * y, (1.0 - y).powi(3)))
        .collect();

    let mut r = rhs.clone();
    r[0] = Cx::new(0.0, 0.0);
    r[ny - 1] = Cx::new(0.0, 0.0);
    let mut om = helm.solve(k, r.view());
    let mut pr = om.clone();
    pr[0] = Cx::new(0.0, 0.0);
    pr[ny - 1] = Cx::new(0.0, 0.0);
    let mut ph = poisson.solve(k, pr.view());
    inf.correct_mode(&g, k, &mut om, &mut ph).unwrap();

    let n = 2 * ny;
    let mut a = Array2::<f64>::zeros((n, n));
    let mut b = Array1::from_elem(n, Cx::new(0.0, 0.0));
    let mut row = 0;
    for m in 1..ny - 1 {
        for j in 0..ny {
            a[[row, j]] = -h * ops.d2[[m, j]];
        }
        a[[row, m]] += 1.0 + h * k2;
        b[row] = rhs[m];
        row += 1;
    }
    for m in 1..ny - 1 {
        for j in 0..ny {
            a[[row, ny + j]] = ops.d2[[m, j]];
        }
        a[[row, ny + m]] -= k2;
        a[[row, m]] = -1.0;
        row += 1;
    }
    for w in [0, ny - 1] {
        a[[row, ny + w]] = 1.0;
        row += 1;
        for j in 0..ny {
            a[[row, ny + j]] = ops.d1[[w, j]];
        }
        row += 1;
    }
    let x = Lu::factor(a).unwrap().solve_complex(b.view());
    for m in 0..ny {
        assert!((x[m] - om[m]).norm() < 1e-10 * om.iter().fold(1.0f64, |s, z| s.max(z.norm())));
        assert!((x[ny + m] - ph[m]).norm() < 1e-10);
    }
}

#[test]
fn convex_run_keeps_invariants() {
    let g = Grid64::new(32, 33).unwrap();
    let state = AnsState::from_velocity(&datum(&g, 0.05), 0.1, 0.0).unwrap();
    let mut s = AnsSolver::new(state, FlowParams::new(1e-4, 2.0)).unwrap();
    for _ in 0..100 {
        s.step().unwrap();
        let m = s.monitors().unwrap();
        assert!(m.noslip_defect <= 1e-8, "{m:?}");
        assert!(m.cancellation_residual <= 1e-9, "{m:?}");
        assert!(m.poisson_residual <= 1e-10, "{m:?}");
    }
    let (conds, _) = (s.influence().condition_numbers(), ());
    assert!(conds.iter().all(|c| *c < 1e8));
    let (rho, failing) = s.influence().contraction_probe();
    assert!(rho < 1.0 && failing.is_empty());
}

#[test]
fn linear_energy_is_non_increasing() {
    let g = Grid64::new(16, 33).unwrap();
    let u0 = SpectralField::from_fn(&g, |x, y| (PI * y).sin() + 0.3 * (2.0 * x).cos() * h(y) * 10.0);
    let state = AnsState::from_velocity(&u0, 0.3, 0.0).unwrap();
    let mut s = AnsSolver::new(state, FlowParams::new(1e-3, 0.0).linear()).unwrap();
    let mut e = energy_norm(s.state());
    for _ in 0..100 {
        s.step().unwrap();
        let e2 = energy_norm(s.state());
        assert!(e2 <= e * (1.0 + 1e-12), "{e2} > {e}");
        e = e2;
    }
}

#[test]
fn mean_flux_follows_wall_stress() {
    let g = Grid64::new(32, 33).unwrap();
    let state = AnsState::from_velocity(&datum(&g, 0.05), 0.1, 0.0).unwrap();
    let (dt, forcing) = (1e-4, 2.0);
    let mut s = AnsSolver::new(state, FlowParams::new(dt, forcing)).unwrap();
    for _ in 0..10 {
        s.step().unwrap();
    }
    let q0 = mean_flux(s.state());
    let mut stress = Vec::new();
    for _ in 0..20 {
        stress.push(mean_wall_stress(s.state()));
        s.step().unwrap();
    }
    stress.push(mean_wall_stress(s.state()));
    let q1 = mean_flux(s.state());
    // trapezoid rule in time for int (d_yy ubar - G) dt
    let mut integral = 0.0;
    for w in stress.windows(2) {
        integral += 0.5 * (w[0] + w[1]) * dt;
    }
    integral -= forcing * 20.0 * dt;
    assert!(((q1 - q0) - integral).abs() < 1e-8, "{} vs {}", q1 - q0, integral);
}

#[test]
fn error_vs_hydro_examples() {
    let g = Grid64::new(16, 33).unwrap();
    let u = datum(&g, 0.05);
    let hyd = HydroState::from_u(u.clone(), 0.0).unwrap();
    let eps = 0.05;
    let same = AnsState::from_velocity(&u, eps, 0.0).unwrap();
    let (l2, linf) = error_vs_hydro(&same, Reference::Hydro(&hyd)).unwrap();
    assert!(l2 < 1e-12 && linf < 1e-12, "{l2:e} {linf:e}");

    let field = SpectralField::from_fn(&g, |_, y| y * (1.0 - y) * (1.0 + y));
    let shifted = AnsState::from_velocity(&u.axpy(eps * eps, &field).unwrap(), eps, 0.0).unwrap();
    let (l2, _) = error_vs_hydro(&shifted, Reference::Hydro(&hyd)).unwrap();
    let expect = eps * eps * field.l2_norm();
    assert!((l2 - expect).abs() < 1e-12 * expect.max(1.0));

    let mut late = same.clone();
    late.t = 0.5;
    assert!(matches!(
        error_vs_hydro(&late, Reference::Hydro(&hyd)),
        Err(Error::TimeMismatch { .. })
    ));
}

#[test]
fn ans_tracks_hydrostatic_limit() {
    let g = Grid64::new(32, 33).unwrap();
    let params = FlowParams::new(1e-4, 2.0);
    let mut hyd = HydroSolver::new(datum(&g, 0.05), params).unwrap();
    hyd.run_until(0.01).unwrap();
    let mut errs = Vec::new();
    for eps in [0.2, 0.1] {
        let st = AnsState::from_velocity(&datum(&g, 0.05), eps, 0.0).unwrap();
        let mut a = AnsSolver::new(st, params).unwrap();
        a.run_until(0.01).unwrap();
        errs.push(error_vs_hydro(a.state(), Reference::Hydro(hyd.state())).unwrap().0);
    }
    let rate = (errs[0] / errs[1]).log2();
    assert!(rate > 1.5 && rate < 2.5, "{errs:?} rate {rate}");
}

#[test]
fn nonzero_depth_average_rejected() {
    let g = Grid64::new(16, 17).unwrap();
    let u = SpectralField::from_fn(&g, |x, y| x.cos() * y * (1.0 - y));
    assert!(matches!(AnsState::from_velocity(&u, 0.1, 0.0), Err(Error::Contract(_))));
    assert!(matches!(
        AnsState::from_velocity(&datum(&g, 0.0), 0.0, 0.0),
        Err(Error::Config(_))
    ));
}
