use num_complex::Complex64;
use proptest::prelude::*;
use thinflow::ans::InfluenceOperator;
use thinflow::corrector::*;
use thinflow::spectral::elliptic::DirichletSolver;
use thinflow::Grid64;

fn sym(zeta: f64, k: i64, eps: f64, lambda: f64) -> CorrectorSymbol<f64> {
    CorrectorSymbol::new(zeta, k, eps, lambda).unwrap()
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + b.norm())
}

const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[test]
fn gamma_examples() {
    assert_eq!(gamma_symbol(0.0, 0, 0.1, 1.0), Complex64::new(1.0, 0.0));
    for eps in [1e-3, 0.1, 1.0] {
        assert_eq!(gamma_symbol(0.0, 0, eps, 4.0), Complex64::new(2.0, 0.0));
    }
    let g = gamma_symbol(4.0, 0, 0.5, 3.0);
    assert_eq!(g, Complex64::new(2.0, 1.0));
    assert!(close(g * g, Complex64::new(3.0, 4.0), 1e-15));
}

#[test]
fn symbol_rejects_bad_parameters() {
    assert!(CorrectorSymbol::new(0.0, 1, 0.1, 0.5).is_err());
    assert!(CorrectorSymbol::new(0.0, 1, 0.0, 1.0).is_err());
    assert!(CorrectorSymbol::new(0.0, 1, 1.5, 1.0).is_err());
    assert!(CorrectorSymbol::new(f64::NAN, 1, 0.1, 1.0).is_err());
}

#[test]
fn real_symbol_has_equal_modulus() {
    let s = sym(0.0, 7, 0.3, 16.0);
    let c = s.chain();
    assert!(c.holds());
    assert_eq!(s.gamma().im, 0.0);
    assert!((c.upper_ratio - 1.0).abs() < 1e-15);
}

#[test]
fn single_precision_symbol_agrees() {
    let a = gamma_symbol(37.0f32, 12, 0.05, 4.0);
    let b = gamma_symbol(37.0f64, 12, 0.05, 4.0);
    assert!((a.re as f64 - b.re).abs() < 1e-5 * b.norm());
    assert!((a.im as f64 - b.im).abs() < 1e-5 * b.norm());
}

proptest! {
    #[test]
    fn root_squares_to_radicand_and_chain_holds(
        zeta in -1e4f64..1e4,
        k in -256i64..=256,
        eps in 1e-3f64..=1.0,
        lambda in 1.0f64..64.0,
    ) {
        let s = sym(zeta, k, eps, lambda);
        let g = s.gamma();
        prop_assert!(g.re > 0.0);
        let bk = (1.0 + (k * k) as f64).powf(1.0 / 3.0);
        let radicand = Complex64::new(eps * eps * (k * k) as f64 + lambda * bk, zeta);
        prop_assert!(close(g * g, radicand, 1e-13));
        prop_assert!(s.chain().holds());
        prop_assert!(s.chain().upper_ratio <= 2.0);
    }

    #[test]
    fn series_branch_is_continuous(r in 1e-8f64..1e-6, arg in -1.5f64..1.5, s in 0.0f64..5.0, a in 0.0f64..3.0) {
        let g = Complex64::from_polar(r, arg);
        let generic = -cexpm1(-g * s) / g * (-a * s).exp();
        let series = profile_factor_series(g, a, s);
        prop_assert!((generic - series).norm() <= 1e-10 * (1.0 + s));
    }
}

fn fd1(f: impl Fn(f64) -> Complex64, y: f64, h: f64) -> Complex64 {
    (f(y + h) - f(y - h)) / (2.0 * h)
}

#[test]
fn profile_boundary_data() {
    let s = sym(2.0, 3, 0.1, 1.0);
    let h = Complex64::new(0.7, -0.2);
    for conv in [SignConvention::Profile, SignConvention::Identities] {
        assert_eq!(
            corrector_profile(Side::Bottom, &s, h, 0.0, conv),
            Complex64::new(0.0, 0.0)
        );
        assert_eq!(corrector_profile(Side::Top, &s, h, 1.0, conv), Complex64::new(0.0, 0.0));
        for y in [0.0, 0.3, 2.0] {
            assert_eq!(
                corrector_profile(Side::Bottom, &s, Complex64::new(0.0, 0.0), y, conv).norm(),
                0.0
            );
        }
    }
    // one-sided difference from the wall
    let dh = 1e-7;
    let d0 = corrector_profile(Side::Bottom, &s, h, dh, SignConvention::Profile) / dh;
    assert!((d0 - h).norm() < 1e-6, "{d0}");
    let d0 = corrector_profile(Side::Bottom, &s, h, dh, SignConvention::Identities) / dh;
    assert!((d0 + h).norm() < 1e-6, "{d0}");
    let d1 = -corrector_profile(Side::Top, &s, h, 1.0 - dh, SignConvention::Profile) / dh;
    assert!((d1 - h).norm() < 1e-6, "{d1}");
}

#[test]
fn profile_derivative_identity() {
    // d_y phi = e^{-gamma y} h - eps|k| phi for the unnegated bottom profile
    let s = sym(-5.0, 4, 0.2, 4.0);
    let a = s.eps_k();
    for y in [0.1, 0.4, 1.5] {
        let f = |y| corrector_profile(Side::Bottom, &s, ONE, y, SignConvention::Profile);
        let d = fd1(f, y, 1e-5);
        let expected = (-s.gamma() * y).exp() - f(y) * a;
        assert!(close(d, expected, 1e-8), "{d} vs {expected}");
    }
}

#[test]
fn vorticity_examples_and_finite_differences() {
    let s = sym(2.0, 1, 0.1, 1.0);
    let g = s.gamma();
    let a = s.eps_k();
    let h = Complex64::new(0.4, 0.9);
    assert!(close(
        corrector_vorticity(Side::Bottom, &s, h, 0.0, SignConvention::Identities),
        (g + a) * h,
        1e-15
    ));
    assert!(close(
        corrector_vorticity(Side::Bottom, &s, h, 0.0, SignConvention::Profile),
        -(g + a) * h,
        1e-15
    ));
    assert!(corrector_vorticity(Side::Bottom, &s, h, 60.0, SignConvention::Profile).norm() < 1e-20);
    assert!(corrector_vorticity(Side::Top, &s, h, -60.0, SignConvention::Profile).norm() < 1e-20);
    for side in Side::BOTH {
        for conv in [SignConvention::Profile, SignConvention::Identities] {
            let y = 0.3;
            let p = |y| corrector_profile(side, &s, h, y, conv);
            let dh = 1e-4;
            let lap = (p(y + dh) - p(y) * 2.0 + p(y - dh)) / (dh * dh) - p(y) * (a * a);
            let om = corrector_vorticity(side, &s, h, y, conv);
            assert!((lap - om).norm() < 1e-6, "{side:?} {conv:?}: {lap} vs {om}");
            let dom = fd1(|y| corrector_vorticity(side, &s, h, y, conv), y, 1e-5);
            let exact = corrector_vorticity_dy(side, &s, h, y, conv);
            assert!((dom - exact).norm() < 1e-6, "{dom} vs {exact}");
        }
    }
}

#[test]
fn gauss_legendre_exactness() {
    for n in [1usize, 2, 5, 16, 64] {
        let r = GaussLegendre::<f64>::new(n).unwrap();
        for p in 0..(2 * n) as i32 {
            let got = r.integrate(&|x: f64| x.powi(p), -1.0, 1.0);
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p + 1) as f64 };
            assert!((got - exact).abs() < 1e-13, "n = {n}, p = {p}: {got}");
        }
    }
    let r = GaussLegendre::<f64>::new(12).unwrap();
    assert!((r.integrate(&f64::exp, 0.0, 1.0) - (1f64.exp() - 1.0)).abs() < 1e-15);
    assert!(GaussLegendre::<f64>::new(0).is_err());
}

fn exact_halfline_eps_k(s: &CorrectorSymbol<f64>) -> f64 {
    let (g, a) = (s.gamma(), s.eps_k());
    let d = s.gap();
    let integral = 1.0 / (2.0 * a) + 1.0 / (2.0 * g.re) - 2.0 * (1.0 / (g + a)).re;
    (a * a * integral / d.norm_sqr()).sqrt()
}

fn exact_unit_interval(s: &CorrectorSymbol<f64>) -> f64 {
    let (g, a) = (s.gamma(), s.eps_k());
    let d = s.gap();
    let part = |r: f64| {
        if r == 0.0 {
            1.0
        } else {
            -(-2.0 * r).exp_m1() / (2.0 * r)
        }
    };
    let cross = (ONE - (-(g + a)).exp()) / (g + a);
    ((part(a) + part(g.re) - 2.0 * cross.re) / d.norm_sqr()).sqrt()
}

#[test]
fn multipliers_match_closed_forms() {
    let q = Quadrature::standard();
    for (zeta, k, eps, lambda) in [
        (0.0, 1, 0.001, 1.0),
        (30.0, 16, 0.3, 4.0),
        (-1e3, 200, 0.5, 64.0),
        (5.0, 3, 0.01, 16.0),
    ] {
        let s = sym(zeta, k, eps, lambda);
        let decay = Multiplier::HalflineDecay.value(&s, &q);
        assert!((decay - (2.0 * s.gamma().re).powf(-0.5)).abs() < 1e-12 * decay);
        let v = Multiplier::HalflineEpsK.value(&s, &q);
        let e = exact_halfline_eps_k(&s);
        assert!((v - e).abs() < 1e-9 * e, "{v} vs {e}");
        let v = Multiplier::UnitInterval.value(&s, &q);
        let e = exact_unit_interval(&s);
        assert!((v - e).abs() < 1e-9 * e, "{v} vs {e}");
        // ||s^p (gamma + a) e^{-gamma s}||^2 = |gamma + a|^2 Gamma(2p + 1) / (2 Re gamma)^{2p + 1}
        let re = s.gamma().re;
        let amp = (s.gamma() + s.eps_k()).norm();
        for (theta_p, gamma_fn) in [(0.0, 2.0), (0.5, 6.0), (2.0, 720.0)] {
            let p = 1.0 + theta_p;
            let exact = amp * (gamma_fn / (2.0 * re).powf(2.0 * p + 1.0)).sqrt();
            let v = Multiplier::WeightedVorticity { theta_p }.value(&s, &q);
            assert!((v - exact).abs() < 1e-10 * exact, "{v} vs {exact}");
        }
    }
}

#[test]
fn halfline_decay_ratio_at_zero_frequency() {
    let q = Quadrature::standard();
    for lambda in [1.0, 4.0, 16.0, 64.0] {
        let r = Multiplier::HalflineDecay.ratio(&sym(0.0, 0, 0.1, lambda), &q);
        assert!((r - 0.5f64.sqrt()).abs() < 1e-13, "{r}");
    }
}

#[test]
fn weighted_decay_closed_form_and_lambda_doubling() {
    let q = Quadrature::standard();
    for lambda in [1.0f64, 9.0, 50.0] {
        let a: f64 = lambda.sqrt();
        let v = Multiplier::WeightedDecay { m: 0.0 }.value(&sym(0.0, 0, 0.5, lambda), &q);
        assert!((v * v - 1.0 / (4.0 * a)).abs() < 1e-12, "{v}");
    }
    for m in [-0.5, 0.0, 0.5, 1.0, 2.0] {
        let w = Multiplier::WeightedDecay { m };
        let r = w.value(&sym(0.0, 0, 0.1, 8.0), &q) / w.value(&sym(0.0, 0, 0.1, 4.0), &q);
        let expected = 2f64.powf(-(m + 0.5) / 2.0);
        assert!((r / expected - 1.0).abs() < 0.1, "m = {m}: {r} vs {expected}");
    }
}

#[test]
fn trace_examples() {
    let q = Quadrature::standard();
    let v = Multiplier::TraceValue { m: 0 }.value(&sym(0.0, 0, 0.2, 1.0), &q);
    assert!((v - (1.0 - (-1f64).exp())).abs() < 1e-15, "{v}");
    let d = Multiplier::TraceDerivative { m: 2 };
    let ratios: Vec<f64> = [1_000i64, 10_000, 100_000, 1_000_000]
        .iter()
        .map(|&k| d.ratio(&sym(0.0, k, 0.01, 1.0), &q))
        .collect();
    assert!(
        ratios.windows(2).all(|w| w[1] <= w[0]) && ratios[1] < ratios[0],
        "{ratios:?}"
    );
    assert!(ratios[3] < 1e-20, "{ratios:?}");
    assert_eq!(Multiplier::TraceValue { m: 1 }.value(&sym(0.0, 0, 0.2, 1.0), &q), 0.0);
}

#[test]
fn multiplier_bounds_hold_on_reference_grid() {
    let grid = SymbolGrid::reference();
    let reports = verify_multiplier_bounds(&grid, &Quadrature::standard()).unwrap();
    assert_eq!(reports.len(), 4);
    for r in &reports {
        assert!(r.pass, "{r:?}");
        assert!(r.converged);
    }
    let chain = &reports[0];
    assert_eq!(chain.violations, 0);
    assert!(chain.measured_c <= 2.0);
    assert!((reports[1].measured_c - 0.5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn symbol_chain_on_dense_grid() {
    let r = verify_symbol_chain(&SymbolGrid::dense()).unwrap();
    assert_eq!(r.grid.points, 513 * 401 * 4 * 7);
    assert_eq!(r.violations, 0);
    assert!(r.pass && r.measured_c <= 2.0);
}

#[test]
fn weighted_vorticity_and_trace_bounds_hold() {
    let grid = SymbolGrid::reference();
    let q = Quadrature::standard();
    let reports = verify_weighted_vorticity_bounds(&[-0.5, 0.0, 0.5, 1.0, 2.0], &[0.0, 1.0, 2.0], &grid, &q).unwrap();
    assert_eq!(reports.len(), 16);
    for r in reports.iter().chain(&verify_trace_bounds(&[0, 1, 2], &grid).unwrap()) {
        assert!(r.pass, "{r:?}");
        assert!(r.refinement_change.is_none_or(|c| c < 0.05), "{r:?}");
    }
    assert!(verify_weighted_vorticity_bounds(&[3.0], &[], &grid, &q).is_err());
    assert!(verify_weighted_vorticity_bounds(&[0.25], &[], &grid, &q).is_err());
}

#[test]
fn bound_report_json_schema() {
    let grid = SymbolGrid {
        zeta: vec![0.0],
        k: vec![1],
        lambda: vec![1.0],
        eps: vec![0.1],
    };
    let r = measure(&Multiplier::HalflineDecay, &grid, &Quadrature::standard()).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    for key in ["inequality", "grid", "measured_C", "budget_C", "pass"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let empty = SymbolGrid { k: vec![], ..grid };
    assert!(measure(&Multiplier::HalflineDecay, &empty, &Quadrature::standard()).is_err());
}

#[test]
fn scaling_exponents() {
    let q = Quadrature::standard();
    let mut ms = vec![Multiplier::HalflineDecay, Multiplier::UnitInterval];
    for theta_p in [-0.5, 0.0, 0.5, 1.0, 2.0] {
        ms.push(Multiplier::WeightedVorticity { theta_p });
    }
    for m in ms {
        let f = scaling_fit(&m, 1e-3, &q, 0.1).unwrap();
        assert!(f.pass, "{f:?}");
    }
}

#[test]
fn measured_constants_stable_under_refinement() {
    let grid = SymbolGrid::reference();
    let coarse = Quadrature::new(16, 4).unwrap();
    for m in [
        Multiplier::HalflineEpsK,
        Multiplier::UnitInterval,
        Multiplier::WeightedVorticity { theta_p: 1.0 },
    ] {
        let a = measure(&m, &grid, &coarse).unwrap().measured_c;
        let b = measure(&m, &grid, &coarse.refined().refined()).unwrap().measured_c;
        assert!((a - b).abs() < 0.05 * b, "{}: {a} vs {b}", m.id());
    }
}

#[test]
fn rbc_probe_at_default_resolution() {
    let grid = Grid64::new(64, 65).unwrap();
    let (eps, h) = (0.1, 2.0e-4 / 3.0);
    let helm = DirichletSolver::helmholtz(&grid, eps, h).unwrap();
    let poisson = DirichletSolver::poisson(&grid, eps).unwrap();
    let op = InfluenceOperator::new(&grid, &helm, &poisson).unwrap();
    let p = rbc_contraction_probe(&op);
    assert!(p.pass() && p.rho < 1.0);
    assert!(p.max_condition < 1e8);
    assert_eq!(p.radii.len(), 32);
    // eigenvalues of [[0, b], [c, 0]] are +-sqrt(bc)
    for (k, r) in (1..).zip(&p.radii) {
        let m = op.matrix(k);
        let direct = ((m[0][1] / m[0][0]) * (m[1][0] / m[1][1])).norm().sqrt();
        assert!((direct - r).abs() < 1e-12, "k = {k}");
    }
    assert_eq!(rbc_probe_for(&grid, eps, h).unwrap(), p);
}

#[test]
fn rbc_coarsening_scan_reports_every_resolution() {
    let steps = rbc_coarsening_scan(32, &[9, 33, 17], 0.1, 1e-4).unwrap();
    assert_eq!(steps.iter().map(|s| s.ny).collect::<Vec<_>>(), vec![33, 17, 9]);
    for s in &steps {
        assert!(s.first_failing.is_none() && s.rho.unwrap() < 1.0, "{s:?}");
    }
}
