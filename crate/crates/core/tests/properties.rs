use fracpert::families::{check_functional_equation, estimate_exponential_bound};
use fracpert::laplace::{LaplaceQuadrature, LaplaceVerifier};
use fracpert::linalg::{max_abs_diff, norm};
use fracpert::problem::{random_matrix, random_symmetric};
use fracpert::resolvent::{corollary_scaled_check, lemma_bound_check, neumann_resolvent};
use fracpert::series::{Chain, SeriesEngine};
use fracpert::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64, d: usize, rho: f64, b_norm: f64) -> (GeneratorMatrix, GeneratorMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (
        random_symmetric(d, rho, &mut rng).unwrap(),
        random_matrix(d, b_norm, &mut rng).unwrap(),
    )
}

fn alphas() -> impl Strategy<Value = FractionalOrder> {
    prop::sample::select(vec![1.1, 1.25, 1.5, 1.75, 1.9, 2.0])
        .prop_map(|a| FractionalOrder::new(a).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_vanishes_off_the_half_line(a in 0.0f64..6.0, t in -10.0f64..=0.0) {
        prop_assert_eq!(g_kernel(KernelOrder::new(a).unwrap(), t), 0.0);
    }

    #[test]
    fn kernel_is_positive_on_the_half_line(a in 0.01f64..6.0, t in 1e-6f64..10.0) {
        prop_assert!(g_kernel(KernelOrder::new(a).unwrap(), t) > 0.0);
    }

    #[test]
    fn gamma_recurrence(x in 0.05f64..60.0) {
        let lhs = gamma(x + 1.0).unwrap();
        let rhs = x * gamma(x).unwrap();
        prop_assert!(((lhs - rhs) / rhs).abs() < 1e-13);
    }

    #[test]
    fn mittag_leffler_increases_for_positive_argument(a in 1.0f64..=2.0, b in 0.5f64..3.0, z in 0.0f64..20.0, dz in 0.01f64..5.0) {
        prop_assert!(ml_scalar(a, b, z + dz).unwrap() > ml_scalar(a, b, z).unwrap());
    }

    #[test]
    fn hyperbolic_identities(t in 0.0f64..5.0) {
        let c = ml_scalar(2.0, 1.0, t * t).unwrap();
        let s = t * ml_scalar(2.0, 2.0, t * t).unwrap();
        prop_assert!((c - t.cosh()).abs() <= 1e-13 * t.cosh());
        prop_assert!((s - t.sinh()).abs() <= 1e-13 * t.cosh());
    }

    #[test]
    fn kernel_semigroup(a in 0.2f64..2.5, b in 0.2f64..2.5, t in 0.05f64..3.0) {
        let conv = g_convolution(KernelOrder::new(a).unwrap(), KernelOrder::new(b).unwrap(), t);
        let exact = g_kernel(KernelOrder::new(a + b).unwrap(), t);
        prop_assert!(((conv - exact) / exact).abs() <= 1e-8);
    }

    #[test]
    fn cosine_family_commutes(alpha in alphas(), seed in any::<u64>(), d in 1usize..=4, s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let (a, _) = instance(seed, d, 3.0, 0.0);
        let f = Families::new(alpha, &a);
        let (cs, ct) = (f.cosine(s).unwrap(), f.cosine(t).unwrap());
        prop_assert!(norm(&(&cs * &ct - &ct * &cs)) <= 1e-10);
    }

    #[test]
    fn sine_and_riemann_liouville_bounds(alpha in alphas(), seed in any::<u64>(), d in 1usize..=4) {
        let (a, _) = instance(seed, d, 3.0, 0.0);
        let grid: Vec<f64> = (0..=40).map(|k| 0.05 * k as f64).collect();
        let bound = estimate_exponential_bound(alpha, &a, &grid).unwrap();
        let f = Families::new(alpha, &a);
        for &t in &grid {
            prop_assert!(norm(&f.cosine(t).unwrap()) <= bound.at(t) * (1.0 + 1e-12));
            prop_assert!(norm(&f.sine(t).unwrap()) <= bound.m * t * (bound.omega * t).exp() * (1.0 + 1e-12) + 1e-15);
            let g = g_kernel(KernelOrder::new(alpha.value()).unwrap(), t);
            prop_assert!(norm(&f.riemann_liouville(t).unwrap()) <= bound.at(t) * g + 1e-10);
        }
    }

    #[test]
    fn neumann_terms_decay_geometrically(seed in any::<u64>(), d in 1usize..=4, alpha in alphas(), shift in 0.5f64..4.0) {
        let (a, b) = instance(seed, d, 2.0, 0.5);
        let lambda = (2.0f64 + 0.5 + shift).powf(1.0 / alpha.value());
        let p = ResolventPoint::new(lambda, alpha).unwrap();
        let (r, rep) = neumann_resolvent(&p, &a, &b, 1e-14).unwrap();
        let r0 = rep.resolvent_norm;
        for (n, &tn) in rep.term_norms.iter().enumerate() {
            prop_assert!(tn <= r0 * rep.theta.powi(n as i32) * (1.0 + 1e-12));
        }
        // two-sided inverse of lambda^a I - A - B
        let dd = a.dim();
        let shifted = DMatrix::identity(dd, dd) * lambda.powf(alpha.value()) - a.matrix() - b.matrix();
        let eye = DMatrix::identity(dd, dd);
        prop_assert!(norm(&(&r * &shifted - &eye)) <= 1e-10);
        prop_assert!(norm(&(&shifted * &r - &eye)) <= 1e-10);
        let l = lemma_bound_check(&p, &a, &b).unwrap();
        let c = corollary_scaled_check(&p, &a, &b).unwrap();
        prop_assert!(l.lhs <= l.rhs + 1e-12);
        let scaled = lambda.powf(alpha.value() - 1.0) * l.lhs;
        prop_assert!((c.check.lhs - scaled).abs() <= 1e-14 * scaled.max(1e-300));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn functional_equation_is_antisymmetric(alpha in alphas(), seed in any::<u64>(), s in 0.1f64..2.0, t in 0.1f64..2.0) {
        let (a, _) = instance(seed, 2, 1.5, 0.0);
        let q = QuadratureConfig::default();
        let st = check_functional_equation(alpha, &a, s, t, &q).unwrap();
        let ts = check_functional_equation(alpha, &a, t, s, &q).unwrap();
        prop_assert!(st <= 1e-6 && ts <= 1e-6);
        prop_assert!(check_functional_equation(alpha, &a, s, s, &q).unwrap() <= 1e-10);
    }

    #[test]
    fn series_terms_respect_their_majorants(alpha in alphas(), seed in any::<u64>(), d in 1usize..=3) {
        let (a, b) = instance(seed, d, 2.0, 0.4);
        let grid = [0.25, 0.5, 1.0, 1.5, 2.0];
        let e = SeriesEngine::new(alpha, &grid, &a, &b, &QuadratureConfig::default()).unwrap();
        for chain in [Chain::Sine, Chain::Cosine] {
            let (_, rep) = e.sum(chain, 1e-9).unwrap();
            for n in 1..rep.n_used {
                prop_assert!(rep.per_term_norms[n] <= rep.majorant_values[n] * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn perturbed_sine_derivative_is_perturbed_cosine(alpha in alphas(), seed in any::<u64>()) {
        let (a, b) = instance(seed, 2, 1.0, 0.3);
        let (t, h) = (1.0, [0.02, 0.01]);
        let pts = [t, t - h[0], t + h[0], t - h[1], t + h[1]];
        let e = SeriesEngine::new(alpha, &pts, &a, &b, &QuadratureConfig::default()).unwrap();
        let (s, _) = e.sum(Chain::Sine, 1e-12).unwrap();
        let (c, _) = e.sum(Chain::Cosine, 1e-12).unwrap();
        let e0 = max_abs_diff(&((&s[2] - &s[1]) / (2.0 * h[0])), &c[0]);
        let e1 = max_abs_diff(&((&s[4] - &s[3]) / (2.0 * h[1])), &c[0]);
        let order = (e0 / e1).log2();
        prop_assert!((1.8..=2.2).contains(&order), "order {}", order);
    }
}

#[test]
fn sine_derivative_is_cosine_at_second_order() {
    for (seed, al) in [(1u64, 1.25), (2, 1.5), (3, 1.75), (4, 2.0)] {
        let (a, _) = instance(seed, 3, 2.0, 0.0);
        let f = Families::new(FractionalOrder::new(al).unwrap(), &a);
        let t = 1.2;
        let err = |h: f64| {
            max_abs_diff(
                &((f.sine(t + h).unwrap() - f.sine(t - h).unwrap()) / (2.0 * h)),
                &f.cosine(t).unwrap(),
            )
        };
        let order = (err(1e-3) / err(1e-4)).log10();
        assert!(order >= 1.9, "alpha {al}: order {order}");
    }
}

#[test]
fn riemann_liouville_is_fractional_integral_of_cosine() {
    let (a, _) = instance(21, 3, 2.0, 0.0);
    let q = QuadratureConfig::default();
    for al in [1.25, 1.5, 1.75] {
        let f = Families::new(FractionalOrder::new(al).unwrap(), &a);
        for k in 1..=20 {
            let t = 0.1 * k as f64;
            let via_integral = f.cosine_integral(al - 1.0, t, &q).unwrap();
            assert!(max_abs_diff(&via_integral, &f.riemann_liouville(t).unwrap()) <= 1e-6);
        }
    }
}

#[test]
fn series_transform_is_sum_of_term_transforms() {
    let (a, b) = instance(31, 2, 0.8, 0.15);
    let alpha = FractionalOrder::new(1.5).unwrap();
    let v = LaplaceVerifier::new(alpha, &a, &b, &LaplaceQuadrature::default()).unwrap();
    let lambda = v.bound().unwrap().omega + 2.0;
    let sum = v.series(Chain::Sine, lambda).unwrap();
    let mut acc = DMatrix::zeros(2, 2);
    for n in 0..sum.n_terms {
        acc += v.term(Chain::Sine, n, lambda).unwrap().value;
    }
    assert!(norm(&(acc - &sum.value)) <= 1e-10);
}

#[test]
fn laplace_residuals_shrink_with_horizon() {
    let a = GeneratorMatrix::scalar(0.5);
    let alpha = FractionalOrder::new(1.5).unwrap();
    let residual = |t_max: f64| {
        let lq = LaplaceQuadrature {
            t_max,
            panels: t_max as usize,
            tolerance: 1.0,
            ..LaplaceQuadrature::default()
        };
        let v = LaplaceVerifier::new(alpha, &a, &GeneratorMatrix::zeros(1), &lq).unwrap();
        let lambda = v.bound().unwrap().omega + 1.0;
        v.transform_relations(lambda).unwrap().max()
    };
    let (r5, r10, r20) = (residual(5.0), residual(10.0), residual(20.0));
    assert!(r5 > r10 && r10 > r20, "{r5} {r10} {r20}");
    assert!(r20 <= 1e-6);
}
