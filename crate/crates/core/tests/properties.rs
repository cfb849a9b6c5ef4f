use proptest::prelude::*;
use rand::Rng as _;

use karcher_core::measure::{convex_combine, truncate, FiniteMeasure};
use karcher_core::random::{random_invertible_with, random_measure_with, random_spd_with, random_sym_with};
use karcher_core::rng::{seeded, Rng};
use karcher_core::solver::{karcher_mean, resolvent, SolverConfig};
use karcher_core::spd::{geodesic, loewner_leq, thompson_distance, SpdMatrix, SymMatrix};
use karcher_core::transport::w1_distance;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 64,
        ..ProptestConfig::default()
    }
}

fn d(a: &SpdMatrix, b: &SpdMatrix) -> f64 {
    thompson_distance(a, b).unwrap()
}

fn mean(mu: &FiniteMeasure) -> SpdMatrix {
    karcher_mean(mu, &SolverConfig::with_tol(1e-12)).unwrap().mean
}

fn measure(rng: &mut Rng, dim: usize) -> FiniteMeasure {
    let k = rng.random_range(1..=5);
    random_measure_with(rng, dim, k, 0.6, false).unwrap()
}

fn sum(xs: &[SymMatrix]) -> SymMatrix {
    xs.iter().skip(1).fold(xs[0].clone(), |acc, x| &acc + x)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn thompson_is_a_metric(seed in any::<u64>(), dim in 1usize..=5) {
        let mut rng = seeded(seed);
        let (a, b, c) = (random_spd_with(&mut rng, dim, 0.8), random_spd_with(&mut rng, dim, 0.8), random_spd_with(&mut rng, dim, 0.8));
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() <= 1e-12 * (1.0 + d(&a, &b)));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
        prop_assert!(d(&a, &b) > 0.0);
    }

    #[test]
    fn thompson_congruence_and_inversion_invariance(seed in any::<u64>(), dim in 1usize..=5) {
        let mut rng = seeded(seed);
        let (a, b) = (random_spd_with(&mut rng, dim, 0.7), random_spd_with(&mut rng, dim, 0.7));
        let g = random_invertible_with(&mut rng, dim);
        let base = d(&a, &b);
        let moved = d(&a.congruence(&g).unwrap(), &b.congruence(&g).unwrap());
        prop_assert!((moved - base).abs() <= 1e-9 * (1.0 + base), "{} vs {}", moved, base);
        let inverted = d(&a.inv(), &b.inv());
        prop_assert!((inverted - base).abs() <= 1e-10 * (1.0 + base));
    }

    #[test]
    fn exponential_metric_increasing(seed in any::<u64>(), dim in 1usize..=5) {
        let mut rng = seeded(seed);
        let h = random_sym_with(&mut rng, dim);
        let k = random_sym_with(&mut rng, dim);
        let lhs = d(&h.exp().unwrap(), &k.exp().unwrap());
        prop_assert!(lhs >= (&h - &k).norm() - 1e-10 * (1.0 + lhs));
    }

    #[test]
    fn geodesic_is_affinely_parametrized(seed in any::<u64>(), dim in 1usize..=5, s in 0.0f64..=1.0, t in 0.0f64..=1.0) {
        let mut rng = seeded(seed);
        let (a, b) = (random_spd_with(&mut rng, dim, 0.7), random_spd_with(&mut rng, dim, 0.7));
        let (gs, gt) = (geodesic(&a, &b, s).unwrap(), geodesic(&a, &b, t).unwrap());
        let full = d(&a, &b);
        prop_assert!((d(&gs, &gt) - (s - t).abs() * full).abs() <= 1e-9 * (1.0 + full));
        prop_assert!(d(&geodesic(&b, &a, 1.0 - t).unwrap(), &gt) <= 1e-9 * (1.0 + full));
    }

    #[test]
    fn functional_calculus_is_consistent(seed in any::<u64>(), dim in 1usize..=6, p in -2.0f64..2.0, q in -2.0f64..2.0) {
        let mut rng = seeded(seed);
        let a = random_spd_with(&mut rng, dim, 0.6);
        let tol = 1e-10 * a.max_eigenvalue().max(1.0 / a.min_eigenvalue()).powf(4.0);
        let pq = a.powf(p + q).unwrap();
        let product = a.powf(p).unwrap().as_matrix() * a.powf(q).unwrap().as_matrix();
        prop_assert!((pq.as_matrix() - product).norm() <= tol * (1.0 + pq.as_matrix().norm()));
        let root = a.sqrt();
        prop_assert!((root.as_matrix() * root.as_matrix() - a.as_matrix()).norm() <= 1e-12 * (1.0 + a.as_matrix().norm()));
        prop_assert!(d(&a.log().exp().unwrap(), &a) <= 1e-12);
        let ident = a.inv_sqrt().as_matrix() * a.as_matrix() * a.inv_sqrt().as_matrix();
        prop_assert!((ident - nalgebra::DMatrix::identity(dim, dim)).norm() <= 1e-11);
    }

    #[test]
    fn mean_is_sandwiched_between_harmonic_and_arithmetic(seed in any::<u64>(), dim in 1usize..=5) {
        let mut rng = seeded(seed);
        let mu = measure(&mut rng, dim);
        let lam = mean(&mu);
        let arith = sum(&mu.iter().map(|(a, w)| a.as_sym() * w).collect::<Vec<_>>());
        let harm_inv = sum(&mu.iter().map(|(a, w)| a.inv().as_sym() * w).collect::<Vec<_>>());
        let harm = SpdMatrix::new(harm_inv).unwrap().inv();
        prop_assert!(loewner_leq(lam.as_sym(), &arith).unwrap());
        prop_assert!(loewner_leq(harm.as_sym(), lam.as_sym()).unwrap());
        let lo = mu.atoms().iter().map(|a| a.min_eigenvalue()).fold(f64::INFINITY, f64::min);
        let hi = mu.atoms().iter().map(|a| a.max_eigenvalue()).fold(0.0, f64::max);
        prop_assert!(lam.min_eigenvalue() >= lo * (1.0 - 1e-10) && lam.max_eigenvalue() <= hi * (1.0 + 1e-10));
    }

    #[test]
    fn mean_is_monotone(seed in any::<u64>(), dim in 1usize..=4) {
        let mut rng = seeded(seed);
        let mu = measure(&mut rng, dim);
        let bigger: Vec<SpdMatrix> = mu
            .atoms()
            .iter()
            .map(|a| {
                let bump = random_spd_with(&mut rng, dim, 0.5).as_sym() * rng.random_range(0.0..1.0);
                SpdMatrix::new(a.as_sym() + &bump).unwrap()
            })
            .collect();
        let nu = FiniteMeasure::new(bigger, mu.weights().to_vec()).unwrap();
        prop_assert!(loewner_leq(mean(&mu).as_sym(), mean(&nu).as_sym()).unwrap());
    }

    #[test]
    fn mean_is_congruence_inversion_and_scale_equivariant(seed in any::<u64>(), dim in 1usize..=4, c in 0.1f64..10.0) {
        let mut rng = seeded(seed);
        let mu = measure(&mut rng, dim);
        let lam = mean(&mu);
        let g = random_invertible_with(&mut rng, dim);
        let map = |f: &dyn Fn(&SpdMatrix) -> SpdMatrix| {
            FiniteMeasure::new(mu.atoms().iter().map(f).collect(), mu.weights().to_vec()).unwrap()
        };
        let moved = mean(&map(&|a| a.congruence(&g).unwrap()));
        prop_assert!(d(&moved, &lam.congruence(&g).unwrap()) <= 1e-8);
        let inverted = mean(&map(&|a| a.inv()));
        prop_assert!(d(&inverted, &lam.inv()) <= 1e-9);
        let scaled = mean(&map(&|a| SpdMatrix::new(a.as_sym() * c).unwrap()));
        prop_assert!(d(&scaled, &SpdMatrix::new(lam.as_sym() * c).unwrap()) <= 1e-9);
    }

    #[test]
    fn mean_minimizes_the_riemannian_cost(seed in any::<u64>(), dim in 1usize..=4) {
        let mut rng = seeded(seed);
        let mu = measure(&mut rng, dim);
        let lam = mean(&mu);
        let cost = |x: &SpdMatrix| -> f64 {
            let xi = x.inv_sqrt();
            mu.iter().map(|(a, w)| w * a.whitened_by(&xi).unwrap().log().frobenius_norm().powi(2)).sum()
        };
        let base = cost(&lam);
        for _ in 0..5 {
            let step = &random_sym_with(&mut rng, dim) * 1e-3;
            let nearby = step.exp().unwrap().congruence(lam.sqrt().as_matrix()).unwrap();
            prop_assert!(cost(&nearby) >= base - 1e-12);
        }
    }

    #[test]
    fn w1_is_a_metric_extending_thompson(seed in any::<u64>(), dim in 1usize..=4) {
        let mut rng = seeded(seed);
        let (mu, nu, eta) = (measure(&mut rng, dim), measure(&mut rng, dim), measure(&mut rng, dim));
        let w = |p: &FiniteMeasure, q: &FiniteMeasure| w1_distance(p, q).unwrap().0;
        prop_assert!(w(&mu, &mu).abs() <= 1e-13);
        prop_assert!((w(&mu, &nu) - w(&nu, &mu)).abs() <= 1e-12);
        prop_assert!(w(&mu, &eta) <= w(&mu, &nu) + w(&nu, &eta) + 1e-12);
        let (a, b) = (mu.atoms()[0].clone(), nu.atoms()[0].clone());
        prop_assert!((w(&FiniteMeasure::dirac(a.clone()), &FiniteMeasure::dirac(b.clone())) - d(&a, &b)).abs() <= 1e-14);
        // Kantorovich–Rubinstein lower bound with the 1-Lipschitz test function d(·, a)
        let moment_gap = (mu.first_moment(&a).unwrap() - nu.first_moment(&a).unwrap()).abs();
        prop_assert!(moment_gap <= w(&mu, &nu) + 1e-12);
        let (_, plan) = w1_distance(&mu, &nu).unwrap();
        prop_assert!(plan.marginal_error(&mu, &nu) <= 1e-12);
    }

    #[test]
    fn w1_is_jointly_convex(seed in any::<u64>(), dim in 1usize..=3, j in 0u32..=16) {
        let mut rng = seeded(seed);
        let t = j as f64 / 16.0;
        // uniform weights keep the common denominator of the mixtures small
        let mut m = || {
            let k = rng.random_range(1..=5);
            random_measure_with(&mut rng, dim, k, 0.6, true).unwrap()
        };
        let (m1, m2, n1, n2) = (m(), m(), m(), m());
        let lhs = w1_distance(&convex_combine(t, &m1, &m2).unwrap(), &convex_combine(t, &n1, &n2).unwrap()).unwrap().0;
        let rhs = (1.0 - t) * w1_distance(&m1, &n1).unwrap().0 + t * w1_distance(&m2, &n2).unwrap().0;
        prop_assert!(lhs <= rhs + 1e-10);
    }

    #[test]
    fn truncation_stays_in_the_ball_and_keeps_mass(seed in any::<u64>(), dim in 1usize..=4, r in 0.01f64..3.0) {
        let mut rng = seeded(seed);
        let mu = measure(&mut rng, dim);
        let center = random_spd_with(&mut rng, dim, 0.5);
        let t = truncate(&mu, &center, r).unwrap();
        prop_assert!(t.atoms().iter().all(|a| d(a, &center) < r));
        prop_assert!((t.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-14);
        prop_assert!(t.len() <= mu.len());
    }

    #[test]
    fn resolvent_fixes_the_mean_and_moves_toward_it(seed in any::<u64>(), dim in 1usize..=4, lambda in 0.01f64..10.0) {
        let mut rng = seeded(seed);
        let mu = measure(&mut rng, dim);
        let lam = mean(&mu);
        let cfg = SolverConfig::with_tol(1e-12);
        prop_assert!(d(&resolvent(lambda, &mu, &lam, &cfg).unwrap(), &lam) <= 1e-10);
        let x = random_spd_with(&mut rng, dim, 0.8);
        let jx = resolvent(lambda, &mu, &x, &cfg).unwrap();
        prop_assert!(d(&jx, &lam) <= d(&x, &lam) / (1.0 + lambda) + 1e-9);
    }
}
