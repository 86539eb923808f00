//! Randomized invariants of the discretization, the model families and the
//! h-curve machinery.

mod common;

use std::sync::Arc;

use approx::assert_relative_eq;
use common::{fd_gradient, fd_noise, max_relative_error};
use mpsolve_core::model::{critical_exponent, Lagrangian};
use mpsolve_core::truncation::h_bar_eval;
use mpsolve_core::{
    analyze_h, build_mesh, check_hypotheses, estimate_embedding_constant, lambda1, tau_eval,
    tau_prime_eval, DiscreteFunction, EmbeddingOptions, EnergyVariant, Exponents, Functional,
    HCurveConstants, LagrangianFamily, Mesh, ProblemSpec, SamplingPlan, TruncationProfile,
};
use proptest::prelude::*;

fn mesh_1d() -> Arc<Mesh> {
    build_mesh(1, 16).unwrap()
}

fn mesh_2d() -> Arc<Mesh> {
    build_mesh(2, 6).unwrap()
}

fn values(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-2.0..2.0f64, len)
}

fn spec(dim: usize, n: usize, family: LagrangianFamily) -> ProblemSpec {
    let p = family.p();
    ProblemSpec {
        dim,
        n,
        exponents: Exponents::new(p, 1.5, p + 2.0),
        lambda: 0.7,
        family,
        embedding: Default::default(),
    }
}

fn constants() -> impl Strategy<Value = HCurveConstants> {
    (1.5..4.0f64, 0.1..0.9f64, 0.5..4.0f64, 0.2..2.0f64, 0.1..2.0f64, 0.1..2.0f64).prop_map(
        |(p, qf, ds, alpha1, c_q, c_s)| HCurveConstants {
            alpha1,
            c_q,
            c_s,
            lambda: 1.0,
            p,
            q: 1.0 + (p - 1.0) * qf,
            s: p + ds,
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn norms_are_absolutely_homogeneous(v in values(15), c in -5.0..5.0f64, p in 1.2..4.0f64) {
        let m = mesh_1d();
        let u = DiscreteFunction::from_values(&m, v).unwrap();
        let cu = u.scaled(c);
        prop_assert!((cu.norm_lp(p) - c.abs() * u.norm_lp(p)).abs() <= 1e-12 * (1.0 + u.norm_lp(p) * c.abs()));
        let (a, b) = (cu.seminorm_w1p(p), c.abs() * u.seminorm_w1p(p));
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
    }

    #[test]
    fn seminorm_vanishes_only_at_zero(v in values(25), p in 1.2..4.0f64) {
        let m = mesh_2d();
        let u = DiscreteFunction::from_values(&m, v.clone()).unwrap();
        let zero = v.iter().all(|x| *x == 0.0);
        prop_assert_eq!(u.seminorm_w1p(p) == 0.0, zero);
        prop_assert_eq!(DiscreteFunction::zeros(&m).seminorm_w1p(p), 0.0);
    }

    #[test]
    fn energy_is_even_and_sign_variants_mirror(v in values(15)) {
        let m = mesh_1d();
        let f = Functional::new(&spec(1, 16, LagrangianFamily::PLaplacian { p: 2.0 }), &m).unwrap();
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let full = f.energy(&v, &EnergyVariant::FULL);
        prop_assert!((full - f.energy(&neg, &EnergyVariant::FULL)).abs() <= 1e-12 * (1.0 + full.abs()));
        let plus = f.energy(&neg, &EnergyVariant::PLUS);
        let minus = f.energy(&v, &EnergyVariant::MINUS);
        prop_assert!((plus - minus).abs() <= 1e-12 * (1.0 + plus.abs()));
    }

    #[test]
    fn plus_energy_is_nonnegative_on_nonpositive_functions(v in values(25)) {
        let m = mesh_2d();
        let f = Functional::new(&spec(2, 6, LagrangianFamily::PLaplacian { p: 3.0 }), &m).unwrap();
        let u: Vec<f64> = v.iter().map(|x| -x.abs()).collect();
        prop_assert!(f.energy(&u, &EnergyVariant::PLUS) >= 0.0);
    }

    #[test]
    fn weighted_family_gradient_matches_differences(v in values(25), dim2 in any::<bool>()) {
        let (dim, n, m) = if dim2 { (2, 6, mesh_2d()) } else { (1, 26, build_mesh(1, 26).unwrap()) };
        let family = LagrangianFamily::WeightedPLaplacian { p: 2.5, kappa: 0.5 };
        let f = Functional::new(&spec(dim, n, family), &m).unwrap();
        let rho = DiscreteFunction::from_values(&m, v.clone()).unwrap().seminorm_w1p(2.5);
        let tp = TruncationProfile::new(0.5 * rho, 2.0 * rho).unwrap();
        let terms = m.elements().len() + m.unknowns();
        for variant in [EnergyVariant::FULL, EnergyVariant::MINUS.with_truncation(tp)] {
            let g = f.gradient(&v, &variant);
            let fd = fd_gradient(|w| f.energy(w, &variant), &v);
            let scale = f.energy(&v, &variant).abs().max(1.0);
            let floor = (0..v.len()).map(|i| fd_noise(&v, i, scale, terms)).fold(0.0, f64::max) / 1e-6;
            prop_assert!(max_relative_error(&g, &fd, floor) <= 1e-6);
        }
    }

    #[test]
    fn lagrangian_derivatives_match_differences(
        t in -5.0..5.0f64,
        xi0 in 0.1..5.0f64,
        xi1 in -5.0..5.0f64,
        p in 1.5..4.0f64,
        kappa in 0.0..2.0f64,
    ) {
        let fam = LagrangianFamily::WeightedPLaplacian { p, kappa };
        let x = [0.3, 0.7];
        let xi = [xi0, xi1];
        let v = fam.eval(x, t, xi);
        let h = 1e-5;
        let d = |tt: f64, a: f64, b: f64| fam.eval(x, tt, [a, b]).density;
        let dt = (d(t + h, xi[0], xi[1]) - d(t - h, xi[0], xi[1])) / (2.0 * h);
        let d0 = (d(t, xi[0] + h, xi[1]) - d(t, xi[0] - h, xi[1])) / (2.0 * h);
        let d1 = (d(t, xi[0], xi[1] + h) - d(t, xi[0], xi[1] - h)) / (2.0 * h);
        let scale = v.density.abs().max(1e-3);
        prop_assert!((dt - v.dt).abs() <= 1e-5 * scale.max(v.dt.abs()));
        prop_assert!((d0 - v.flux[0]).abs() <= 1e-5 * scale.max(v.flux[0].abs()));
        prop_assert!((d1 - v.flux[1]).abs() <= 1e-5 * scale.max(v.flux[1].abs()));
    }

    #[test]
    fn h_bar_relations(c in constants(), frac in 0.1..0.9f64, xs in proptest::collection::vec(0.0..1.0f64, 200)) {
        let c = c.with_lambda(frac * lambda1(&c).unwrap());
        let an = analyze_h(&c).unwrap();
        let tp = an.profile().unwrap();
        for u in xs {
            let below = u * tp.r0;
            prop_assert_eq!(h_bar_eval(&c, &tp, below), mpsolve_core::h_eval(&c, below));
            let above = tp.r0 + u * 4.0 * tp.r1;
            prop_assert!(h_bar_eval(&c, &tp, above) >= 0.0);
            let beyond = tp.r1 * (1.0 + 3.0 * u);
            let concave_only = c.alpha1 * beyond.powf(c.p) - c.lambda / c.q * c.c_q.powf(c.q) * beyond.powf(c.q);
            prop_assert!((h_bar_eval(&c, &tp, beyond) - concave_only).abs() <= 1e-12 * concave_only.abs().max(1.0));
        }
    }

    #[test]
    fn lambda1_brackets_the_window(c in constants(), below in 0.01..0.999f64, above in 1.001..10.0f64) {
        let l1 = lambda1(&c).unwrap();
        prop_assert!(analyze_h(&c.with_lambda(below * l1)).unwrap().h_max > 0.0);
        let over = analyze_h(&c.with_lambda(above * l1)).unwrap();
        prop_assert!(over.h_max < 0.0 && over.r0.is_none() && over.r1.is_none());
    }

    #[test]
    fn coefficient_absorption_leaves_analysis_unchanged(c in constants(), frac in 0.1..0.9f64) {
        let c = c.with_lambda(frac * lambda1(&c).unwrap());
        let a = analyze_h(&c).unwrap();
        let moved = HCurveConstants { c_q: 2.0 * c.c_q, lambda: c.lambda / 2f64.powf(c.q), ..c };
        let b = analyze_h(&moved).unwrap();
        prop_assert!((a.r0.unwrap() - b.r0.unwrap()).abs() <= 1e-9 * a.r0.unwrap());
        prop_assert!((a.r1.unwrap() - b.r1.unwrap()).abs() <= 1e-9 * a.r1.unwrap());
        prop_assert!((a.h_max - b.h_max).abs() <= 1e-9 * a.h_max.abs().max(1e-12));
    }

    #[test]
    fn roots_are_zeros_of_h(c in constants(), frac in 0.05..0.95f64) {
        let c = c.with_lambda(frac * lambda1(&c).unwrap());
        let an = analyze_h(&c).unwrap();
        let (r0, r1) = (an.r0.unwrap(), an.r1.unwrap());
        prop_assert!(r0 < an.x_max && an.x_max < r1);
        for r in [r0, r1] {
            let scale = c.alpha1 * r.powf(c.p);
            prop_assert!(mpsolve_core::h_eval(&c, r).abs() <= 1e-10 * scale.max(1.0));
        }
    }

    #[test]
    fn tau_is_monotone(r0 in 0.1..5.0f64, w in 0.1..10.0f64, a in 0.0..20.0f64, b in 0.0..20.0f64) {
        let tp = TruncationProfile::new(r0, r0 + w).unwrap();
        let (x1, x2) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(tau_eval(&tp, x1) >= tau_eval(&tp, x2));
        let v = tau_eval(&tp, a);
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn tau_prime_matches_differences(r0 in 0.1..5.0f64, w in 0.5..10.0f64, u in 0.02..0.98f64) {
        let tp = TruncationProfile::new(r0, r0 + w).unwrap();
        let x = r0 + u * w;
        let h = 1e-6 * w;
        let fd = (tau_eval(&tp, x + h) - tau_eval(&tp, x - h)) / (2.0 * h);
        let exact = tau_prime_eval(&tp, x);
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1e-8));
    }
}

#[test]
fn tau_landmarks() {
    let tp = TruncationProfile::new(1.0, 3.0).unwrap();
    assert_eq!(tau_eval(&tp, 1.0), 1.0);
    assert_eq!(tau_eval(&tp, 0.2), 1.0);
    assert_eq!(tau_eval(&tp, 3.0), 0.0);
    assert_eq!(tau_eval(&tp, 7.0), 0.0);
    assert_relative_eq!(tau_eval(&tp, 2.0), 0.5, epsilon = 1e-15);
    assert_eq!(tau_prime_eval(&tp, 0.5), 0.0);
    assert_eq!(tau_prime_eval(&tp, 3.5), 0.0);
}

#[test]
fn hypothesis_constants_bound_samples() {
    let plan = SamplingPlan::default();
    for fam in [
        LagrangianFamily::PLaplacian { p: 2.0 },
        LagrangianFamily::WeightedPLaplacian { p: 2.5, kappa: 0.8 },
    ] {
        let p = fam.p();
        let r = check_hypotheses(&fam, p, p + 2.0, &plan);
        for i in 0..1000 {
            let t = -10.0 + 20.0 * (i as f64 * 0.618_034).fract();
            let xi = [-10.0 + 20.0 * (i as f64 * 0.414_214).fract(), 0.0];
            let v = fam.eval([0.5, 0.0], t, xi);
            assert!(v.density >= r.alpha1 * xi[0].abs().powf(p) * (1.0 - 1e-12));
        }
    }
}

#[test]
fn p_laplacian_growth_condition_is_tight() {
    for (p, s) in [(2.0, 4.0), (3.0, 5.0), (1.5, 2.5)] {
        let fam = LagrangianFamily::PLaplacian { p };
        for k in 1..200 {
            let xi = [0.05 * k as f64 - 5.0 + 0.013, 0.0];
            let v = fam.eval([0.2, 0.0], 0.3, xi);
            let axi = v.flux[0] * xi[0];
            let ratio = (s * v.density - axi - v.dt * 0.3) / axi;
            assert_relative_eq!(ratio, (s - p) / p, max_relative = 1e-12);
        }
    }
}

#[test]
fn embedding_constant_bounds_random_functions() {
    let m = build_mesh(2, 8).unwrap();
    let opts = EmbeddingOptions::default();
    for (p, ell) in [(2.0, 1.5), (2.0, 4.0), (3.0, 6.0)] {
        assert!(ell < critical_exponent(2, p));
        let c = estimate_embedding_constant(&m, p, ell, &opts).unwrap().value;
        for k in 0..50 {
            let u = DiscreteFunction::interpolate(&m, |x| {
                ((k + 1) as f64 * x[0]).sin() * (3.0 * x[1] + k as f64).cos() + x[0] * x[1]
            });
            assert!(u.norm_lp(ell) <= c * u.seminorm_w1p(p) + 1e-9);
        }
    }
}
