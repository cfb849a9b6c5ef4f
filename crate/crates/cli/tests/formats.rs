use proptest::prelude::*;

use karcher_cli::{random_spd, ProblemFile};
use karcher_core::random::random_measure_with;
use karcher_core::rng::seeded;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn problem_files_round_trip(seed in any::<u64>(), dim in 1usize..5, k in 1usize..6, uniform in any::<bool>()) {
        let mu = random_measure_with(&mut seeded(seed), dim, k, 0.8, uniform).unwrap();
        let file = ProblemFile::from_measure(&mu);
        let back = ProblemFile::parse(&file.to_json()).unwrap();
        prop_assert_eq!(&back, &file);
        let mu2 = back.to_measure().unwrap();
        // the measure renormalizes its weights, which can move them by an ulp
        for (a, b) in mu.weights().iter().zip(mu2.weights()) {
            prop_assert!((a - b).abs() <= 1e-15 * a);
        }
        for (x, y) in mu.atoms().iter().zip(mu2.atoms()) {
            prop_assert_eq!(x.to_rows(), y.to_rows());
        }
    }
}

#[test]
fn random_spd_is_deterministic_and_positive() {
    assert_eq!(random_spd(3, 0.0, 9).to_rows(), karcher_core::SpdMatrix::identity(3).to_rows());
    assert_eq!(random_spd(4, 0.7, 11).to_rows(), random_spd(4, 0.7, 11).to_rows());
    assert_ne!(random_spd(4, 0.7, 11).to_rows(), random_spd(4, 0.7, 12).to_rows());
    for seed in 0..10_000 {
        let x = random_spd(1 + (seed % 5) as usize, 1.0, seed);
        assert!(x.min_eigenvalue() > 0.0, "seed {seed}");
    }
}
