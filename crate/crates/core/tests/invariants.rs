use rand::Rng as _;

use karcher_core::measure::{convex_combine, diameter, truncate, FiniteMeasure};
use karcher_core::random::{random_measure_with, random_spd_with, random_sym_with};
use karcher_core::rng::{seeded, substream};
use karcher_core::schemes::{entropy_lipschitz_check, nodice_sequence, stochastic_sequence, truncated_sequence};
use karcher_core::solver::{euler_flow, karcher_mean, semigroup, SolverConfig};
use karcher_core::spd::{exp_point, log_point, loewner_leq, matrix_fn, thompson_distance, SpdMatrix, SymMatrix};
use karcher_core::transport::w1_distance;

fn d(a: &SpdMatrix, b: &SpdMatrix) -> f64 {
    thompson_distance(a, b).unwrap()
}

#[test]
fn emi_on_a_thousand_pairs() {
    let mut rng = seeded(100);
    for i in 0..1000 {
        let dim = 2 + i % 5;
        let x = random_spd_with(&mut rng, dim, 0.8);
        let y = random_spd_with(&mut rng, dim, 0.8);
        assert!((&x.log() - &y.log()).norm() <= d(&x, &y) + 1e-10, "pair {i}");
    }
}

#[test]
fn order_sandwich() {
    let mut rng = seeded(101);
    for i in 0..200 {
        let dim = 1 + i % 6;
        let x = random_spd_with(&mut rng, dim, 0.8);
        let y = random_spd_with(&mut rng, dim, 0.8);
        let dist = d(&x, &y);
        let w = y.whitened_by(&x.inv_sqrt()).unwrap();
        let eye = SymMatrix::identity(dim);
        assert!(loewner_leq(&(&eye * (-dist).exp()), w.as_sym()).unwrap());
        assert!(loewner_leq(w.as_sym(), &(&eye * dist.exp())).unwrap());
        // e^{-d} X ≤ Y, the same statement unwhitened
        assert!(loewner_leq(&(x.as_sym() * (-dist).exp()), y.as_sym()).unwrap());
    }
}

#[test]
fn exp_point_inverts_log_point() {
    let mut rng = seeded(102);
    for i in 0..200 {
        let dim = 1 + i % 6;
        let x = random_spd_with(&mut rng, dim, 0.7);
        let a = random_spd_with(&mut rng, dim, 0.7);
        let back = exp_point(&x, &log_point(&x, &a).unwrap()).unwrap();
        assert!((back.as_matrix() - a.as_matrix()).norm() <= 1e-9 * (1.0 + a.as_matrix().norm()));
        let fc = matrix_fn(&matrix_fn(a.as_sym(), f64::ln).unwrap(), f64::exp).unwrap();
        assert!((fc.as_matrix() - a.as_matrix()).norm() <= 1e-9 * (1.0 + a.as_matrix().norm()));
    }
}

#[test]
fn truncation_diameter_and_mixture_mass() {
    let mut rng = seeded(103);
    for i in 0..100 {
        let dim = 1 + i % 4;
        let k = rng.random_range(1..=6);
        let mu = random_measure_with(&mut rng, dim, k, 0.8, false).unwrap();
        let nu = random_measure_with(&mut rng, dim, 3, 0.8, true).unwrap();
        let center = random_spd_with(&mut rng, dim, 0.5);
        let r = rng.random_range(0.05..3.0);
        let t = truncate(&mu, &center, r).unwrap();
        assert!(diameter(&t) <= diameter(&mu).max(2.0 * r) + 1e-12);
        let far: f64 = mu
            .iter()
            .map(|(a, w)| {
                let dist = d(&center, a);
                if dist >= r { w * dist } else { 0.0 }
            })
            .sum();
        assert!(w1_distance(&mu, &t).unwrap().0 <= far + 1e-12);
        let mix = convex_combine(rng.random_range(0.0..=1.0), &mu, &nu).unwrap();
        assert!((mix.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn mean_is_a_local_minimizer_of_the_trace_metric_cost() {
    let mut rng = seeded(104);
    for i in 0..10 {
        let dim = 1 + i % 4;
        let mu = random_measure_with(&mut rng, dim, 4, 0.7, false).unwrap();
        let lam = karcher_mean(&mu, &SolverConfig::with_tol(1e-12)).unwrap().mean;
        let cost = |x: &SpdMatrix| -> f64 {
            let xi = x.inv_sqrt();
            mu.iter().map(|(a, w)| w * a.whitened_by(&xi).unwrap().log().frobenius_norm().powi(2)).sum()
        };
        let base = cost(&lam);
        let root = lam.sqrt();
        for _ in 0..50 {
            let v = random_sym_with(&mut rng, dim);
            let step = &v * (1e-3 / v.frobenius_norm());
            let moved = step.exp().unwrap().congruence(root.as_matrix()).unwrap();
            assert!(cost(&moved) >= base - 1e-13);
        }
    }
}

#[test]
fn euler_error_against_the_semigroup_halves() {
    let cfg = SolverConfig::default();
    for seed in 0..3 {
        let mut rng = seeded(105 + seed);
        let mu = random_measure_with(&mut rng, 2, 3, 0.5, false).unwrap();
        let x = random_spd_with(&mut rng, 2, 0.5);
        let s = semigroup(1.0, &mu, &x, 1e-6, &cfg).unwrap();
        let errs: Vec<f64> = [64, 128, 256].iter().map(|&n| d(&euler_flow(1.0, n, &mu, &x).unwrap(), &s)).collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 2.0).abs() <= 0.6, "ratio {ratio} from {errs:?}");
        }
    }
}

#[test]
fn nodice_errors_decrease_across_decades() {
    let mut decreasing = 0;
    for i in 0..20u64 {
        let mut rng = substream(106, i);
        let k = [2, 3, 4, 5][(i % 4) as usize];
        let dim = 2 + (i % 3) as usize;
        let mu = random_measure_with(&mut rng, dim, k, 0.6, true).unwrap();
        let lam = karcher_mean(&mu, &SolverConfig::with_tol(1e-12)).unwrap().mean;
        let tr = nodice_sequence(&mu, 10_000, &lam).unwrap();
        // for k = 2 every even iterate is the mean itself, so compare the worst error within each cycle
        let at = |cycles: u64| {
            (0..k as u64).map(|j| tr.error_at(cycles * k as u64 - j).unwrap()).fold(0.0, f64::max)
        };
        if at(100) > at(1000) && at(1000) > at(10_000) {
            decreasing += 1;
        }
    }
    assert!(decreasing >= 18, "{decreasing}/20");
}

#[test]
fn scalar_schemes_are_running_log_averages() {
    let mut rng = seeded(107);
    let atoms: Vec<SpdMatrix> =
        (0..4).map(|_| SpdMatrix::from_diagonal(&[rng.random_range(-2.0f64..2.0).exp()]).unwrap()).collect();
    let mu = FiniteMeasure::new(atoms.clone(), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    let reference = SpdMatrix::identity(1);
    let log0 = |m: &SpdMatrix| m.as_sym().get(0, 0).ln();

    // stochastic: the reference is I, so each recorded error is |log S_n|
    let seed = 9;
    let tr = stochastic_sequence(&mu, 2000, seed, &reference).unwrap();
    let draws = karcher_core::schemes::draw_indices(&mu, 2000, seed);
    let mut avg = 0.0;
    for (n, &j) in draws.iter().enumerate() {
        avg += (log0(&mu.atoms()[j]) - avg) / (n + 1) as f64;
        assert!((tr.errors[n] - avg.abs()).abs() <= 1e-12, "step {}", n + 1);
    }
    // a truncation radius beyond every atom leaves the path unchanged
    let wide = truncated_sequence(&mu, 2000, seed, 100.0, &reference, &reference).unwrap();
    assert_eq!(wide.errors, tr.errors);

    let uniform = FiniteMeasure::uniform(atoms.clone()).unwrap();
    let tr = nodice_sequence(&uniform, 500, &reference).unwrap();
    let mut avg = 0.0;
    for n in 0..2000 {
        avg += (log0(&atoms[n % 4]) - avg) / (n + 1) as f64;
        assert!((tr.errors[n] - avg.abs()).abs() <= 1e-12);
    }
}

#[test]
fn entropy_lipschitz_on_dim_four_triples() {
    let mut rng = seeded(108);
    for _ in 0..500 {
        let a = random_spd_with(&mut rng, 4, 0.6);
        let x = random_spd_with(&mut rng, 4, 0.6);
        let y = random_spd_with(&mut rng, 4, 0.6);
        let (lhs, rhs) = entropy_lipschitz_check(&a, &x, &y).unwrap();
        assert!(lhs <= rhs + 1e-10);
    }
}

#[test]
fn expected_empirical_w1_decreases() {
    let mut rng = seeded(109);
    let mu = random_measure_with(&mut rng, 3, 4, 0.7, false).unwrap();
    let means: Vec<f64> = [4, 16, 64]
        .iter()
        .map(|&n| {
            (0..50)
                .map(|s| w1_distance(&mu, &karcher_core::sample_empirical(&mu, n, s).unwrap()).unwrap().0)
                .sum::<f64>()
                / 50.0
        })
        .collect();
    assert!(means[0] > means[1] && means[1] > means[2], "{means:?}");
}
