use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hypercorr::bounds::{
    binomial_lower_tail, binomial_upper_tail, chernoff_lower_report, chernoff_upper_report,
};
use hypercorr::combinatorics::{
    binomial, factorial, fixed_edge_count_closed_form, CycleType, HyperedgeSpace, Permutation,
};
use hypercorr::harness::wilson_interval;
use hypercorr::lambert::{lambert_w, Branch, BRANCH_POINT};
use hypercorr::models::{sample, AdjacencyTensor, ErSpec, GaussianSpec, Hypothesis, ModelSpec};
use hypercorr::secondmoment::{second_moment_er, second_moment_gaussian};
use hypercorr::statistics::{
    max_statistic_exact, max_statistic_heuristic, t_of_pi, upper_quantile,
};
use hypercorr::tensor_io::{read_tensor, write_tensor, Column, TensorHeader};

fn shape() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=10).prop_flat_map(|n| (Just(n), 1..=n.min(4)))
}

fn perm(n: usize, seed: u64) -> Permutation {
    Permutation::random(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn gaussian_tensor(n: usize, m: usize, seed: u64) -> AdjacencyTensor {
    let model = ModelSpec::Gaussian(GaussianSpec::new(n, m, 0.0).unwrap());
    sample(&model, Hypothesis::H0, &mut ChaCha8Rng::seed_from_u64(seed))
        .unwrap()
        .a1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_unrank_bijection((n, m) in shape()) {
        let space = HyperedgeSpace::new(n, m).unwrap();
        prop_assert_eq!(space.len() as u64, binomial(n, m));
        for r in 0..space.len() {
            let e = space.unrank(r).unwrap();
            prop_assert_eq!(space.rank(&e).unwrap(), r);
            prop_assert_eq!(space.rank_mask(e.mask()), r);
        }
    }

    #[test]
    fn orbit_profile_accounts_for_every_edge((n, m) in shape(), seed in any::<u64>()) {
        let p = perm(n, seed);
        let profile = HyperedgeSpace::shared(n, m).unwrap().orbit_profile(&p);
        prop_assert_eq!(profile.edge_total() as u64, binomial(n, m));
        prop_assert_eq!(fixed_edge_count_closed_form(&p.cycle_type(), m) as usize, profile.fixed());
    }

    #[test]
    fn group_laws(n in 1usize..=12, s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = perm(n, s1);
        let b = perm(n, s2);
        prop_assert!(a.compose(&a.inverse()).is_identity());
        prop_assert_eq!(a.compose(&b).inverse(), b.inverse().compose(&a.inverse()));
        let text = a.to_string();
        prop_assert_eq!(Permutation::parse_cycles(n, &text).unwrap(), a.clone());
        prop_assert_eq!(a.cycle_type().n(), n);
    }

    #[test]
    fn class_sizes_partition_the_group(n in 1usize..=12) {
        let total: u64 = CycleType::all(n).iter().map(CycleType::class_size).sum();
        prop_assert_eq!(total, factorial(n));
    }

    #[test]
    fn overlap_transpose_and_relabel((n, m) in shape(), s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let a1 = gaussian_tensor(n, m, s1);
        let a2 = gaussian_tensor(n, m, s2);
        let p = perm(n, s3);
        let t = t_of_pi(&a1, &a2, &p).unwrap();
        let tol = 1e-10 * (1.0 + t.abs());
        prop_assert!((t - t_of_pi(&a2, &a1, &p.inverse()).unwrap()).abs() <= tol);
        let tau = perm(n, s3 ^ 0x55);
        let moved = t_of_pi(&a1.relabel(&tau).unwrap(), &a2, &p.compose(&tau.inverse())).unwrap();
        prop_assert!((t - moved).abs() <= tol);
    }

    #[test]
    fn exact_bounds_heuristic_and_samples(n in 3usize..=6, s in any::<u64>(), er in any::<bool>()) {
        let model = if er {
            ModelSpec::Er(ErSpec::new(n, 3, 0.5, 0.7).unwrap())
        } else {
            ModelSpec::Gaussian(GaussianSpec::new(n, 3, 0.6).unwrap())
        };
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let pair = sample(&model, Hypothesis::H1, &mut rng).unwrap();
        let exact = max_statistic_exact(&pair.a1, &pair.a2, 9).unwrap();
        let heur = max_statistic_heuristic(&pair.a1, &pair.a2, 2, &mut rng).unwrap();
        prop_assert!(heur.value <= exact.value);
        prop_assert!(t_of_pi(&pair.a1, &pair.a2, pair.planted.as_ref().unwrap()).unwrap() <= exact.value);
        prop_assert_eq!(t_of_pi(&pair.a1, &pair.a2, &exact.argmax).unwrap(), exact.value);
    }

    #[test]
    fn chernoff_dominates_binomial_tails(trials in 1u64..=300, p in 0.01f64..0.99, delta in 0.01f64..2.0) {
        let up = chernoff_upper_report(trials, p, delta).unwrap();
        prop_assert!(up.dominates());
        prop_assert!(up.bound > 0.0 && up.bound <= 1.0);
        if delta < 1.0 {
            prop_assert!(chernoff_lower_report(trials, p, delta).unwrap().dominates());
        }
        let mu = trials as f64 * p;
        let upper = binomial_upper_tail(trials, p, mu).unwrap();
        let lower = binomial_lower_tail(trials, p, mu).unwrap();
        prop_assert!(upper + lower >= 1.0 - 1e-12);
    }

    #[test]
    fn lambert_residuals(x in BRANCH_POINT + 1e-6..1e6f64) {
        let w = lambert_w(x, Branch::Principal).unwrap();
        prop_assert!((w * w.exp() - x).abs() <= 1e-12 * (1.0 + x.abs()));
        if x < 0.0 {
            let w = lambert_w(x, Branch::Lower).unwrap();
            prop_assert!(w <= -1.0);
            prop_assert!((w * w.exp() - x).abs() <= 1e-12);
        }
    }

    #[test]
    fn quantile_is_monotone_in_level(xs in prop::collection::vec(-1e3f64..1e3, 1..200), a in 0.01f64..1.0, b in 0.01f64..1.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(upper_quantile(&xs, hi).unwrap() <= upper_quantile(&xs, lo).unwrap());
    }

    #[test]
    fn wilson_brackets_rate(trials in 1usize..500, frac in 0.0f64..=1.0) {
        let k = (frac * trials as f64).round() as usize;
        let (lo, hi) = wilson_interval(k, trials);
        let p = k as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
    }

    #[test]
    fn second_moments_ordered(n in 3usize..=6, m in 2usize..=3, rho in 0.0f64..0.99) {
        prop_assume!(m < n);
        let g = second_moment_gaussian(n, m, rho).unwrap().value;
        let e = second_moment_er(n, m, rho).unwrap().value;
        prop_assert!(1.0 <= e && e <= g * (1.0 + 1e-12));
    }

    #[test]
    fn tensor_file_round_trip((n, m) in shape(), values in prop::collection::vec(-1e6f64..1e6, 210)) {
        let len = binomial(n, m) as usize;
        let t = AdjacencyTensor::from_values(n, m, values[..len].to_vec()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let header = TensorHeader { n, m, model: None, hypothesis: None, seed: None };
        write_tensor(&path, &header, &t).unwrap();
        prop_assert_eq!(read_tensor(&path, Column::A1).unwrap().1, t);
    }
}
