use deep_ibp::ibp::{
    harmonic_number, left_order_form, logprob_mask_ibp, logprob_mask_marginal, sample_ibp_sequential, BinaryMatrix,
};
use deep_ibp::inference::{
    accept_prob_add, accept_prob_delete, init_state, log_ratio_add, log_ratio_delete, prune_empty_factors, sweep,
    ChainState, InitStrategy, LayerModel, LayerSampler, MoveStats,
};
use deep_ibp::model::{generate_dataset, log_joint, log_likelihood, propagate_sigma, GenerativeModel, HyperParams, WeightLayer};
use deep_ibp::oracle::{drop_empty_columns, enumerate_masks};
use deep_ibp::rng::rng_from_seed;
use ndarray::Array2;
use proptest::prelude::*;
use rand::Rng;

fn random_mask(bits: &[bool], n: usize, k: usize) -> BinaryMatrix {
    let cols = (0..k).map(|j| bits[j * n..(j + 1) * n].to_vec()).collect();
    BinaryMatrix::from_columns(n, cols).unwrap()
}

fn random_state(mask: BinaryMatrix, t: usize, seed: u64) -> (Array2<f64>, ChainState) {
    let mut rng = rng_from_seed(seed);
    let (n, k) = (mask.n_rows(), mask.n_cols());
    let slab = Array2::from_shape_fn((n, k), |(i, j)| if mask.get(i, j) { rng.random_range(-2.0..2.0) } else { 0.0 });
    let factors = Array2::from_shape_fn((k, t), |_| rng.random_range(-2.0..2.0));
    let x = Array2::from_shape_fn((n, t), |_| rng.random_range(-1.0..1.0));
    let state = ChainState::with_uniform_prior(WeightLayer::new(mask, slab).unwrap(), factors, 1.0).unwrap();
    (x, state)
}

fn model(alpha: f64) -> LayerModel {
    LayerModel::from_hyper(&HyperParams::single_layer(1, alpha, 2.0, 1.0), 0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn propagate_sigma_ignores_joint_sign_flips(pairs in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..6)) {
        let (w, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let neg = |v: &[f64]| v.iter().map(|a| -a).collect::<Vec<_>>();
        let s = propagate_sigma(&w, &y, 1e-6).unwrap();
        prop_assert!(s >= 1e-6);
        prop_assert_eq!(propagate_sigma(&neg(&w), &y, 1e-6).unwrap(), s);
        prop_assert_eq!(propagate_sigma(&w, &neg(&y), 1e-6).unwrap(), s);
        let zeros = vec![0.0; w.len()];
        prop_assert_eq!(propagate_sigma(&zeros, &y, 1e-6).unwrap(), 1e-6);
    }

    #[test]
    fn lof_is_idempotent_and_ibp_law_permutation_invariant(
        bits in prop::collection::vec(any::<bool>(), 12),
        k in 1usize..=4,
        alpha in 0.2f64..4.0,
        seed in any::<u64>(),
    ) {
        let n = 3;
        let z = random_mask(&bits, n, k);
        let lof = left_order_form(&z);
        prop_assert_eq!(left_order_form(&lof.canonical()), lof.clone());
        let mut order: Vec<usize> = (0..k).collect();
        let mut rng = rng_from_seed(seed);
        for i in (1..k).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let permuted = z.permute_columns(&order);
        prop_assert_eq!(left_order_form(&permuted), lof);
        let (active, active_permuted) = (drop_empty_columns(&z), drop_empty_columns(&permuted));
        prop_assert!(logprob_mask_ibp(&z, alpha).is_err() == z.has_empty_column());
        let a = logprob_mask_ibp(&active, alpha).unwrap();
        let b = logprob_mask_ibp(&active_permuted, alpha).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn finite_mask_law_normalizes(n in 1usize..=3, k in 1usize..=2, alpha in 0.05f64..10.0) {
        let total: f64 = enumerate_masks(n, k)
            .unwrap()
            .iter()
            .map(|z| logprob_mask_marginal(z, alpha).unwrap().exp())
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-10, "total {}", total);
    }

    #[test]
    fn add_and_delete_are_reciprocal(
        bits in prop::collection::vec(any::<bool>(), 24),
        n in 1usize..=4,
        k in 0usize..=5,
        alpha in 0.1f64..6.0,
        seed in any::<u64>(),
    ) {
        let before = random_mask(&bits, n, k);
        let mut after = before.clone();
        after.push_column(vec![false; n]);
        let m = model(alpha);
        let (_, small) = random_state(before, 3, seed);
        let (_, big) = random_state(after, 3, seed);
        let add = log_ratio_add(&small, &m);
        let del = log_ratio_delete(&big, k, &m).unwrap();
        prop_assert!((add + del).abs() < 1e-10, "add {} delete {}", add, del);

        let (pa, pd) = (accept_prob_add(&small, &m), accept_prob_delete(&big, k, &m).unwrap());
        prop_assert!((0.0..=1.0).contains(&pa) && (0.0..=1.0).contains(&pd));
        prop_assert!(pa == 1.0 || pd == 1.0);
        if add >= 0.0 {
            prop_assert_eq!(pa, 1.0);
        }
    }

    #[test]
    fn deleting_a_linked_factor_is_refused(n in 1usize..=4, seed in any::<u64>()) {
        let mut col = vec![false; n];
        col[seed as usize % n] = true;
        let (_, state) = random_state(BinaryMatrix::from_columns(n, vec![col]).unwrap(), 2, seed);
        prop_assert!(log_ratio_delete(&state, 0, &model(1.0)).is_err());
        prop_assert!(log_ratio_delete(&state, 1, &model(1.0)).is_err());
    }

    #[test]
    fn pruning_keeps_the_likelihood(bits in prop::collection::vec(any::<bool>(), 30), k in 0usize..=6, seed in any::<u64>()) {
        let n = 5;
        let (x, mut state) = random_state(random_mask(&bits, n, k), 4, seed);
        let ll = |s: &ChainState| log_likelihood(&x, &s.weights().weights().dot(s.factors()), 1e-6);
        let before = ll(&state);
        let empty = state.weights().mask.column_counts().iter().filter(|&&m| m == 0).count();
        prop_assert_eq!(prune_empty_factors(&mut state), empty);
        prop_assert_eq!(state.num_factors(), k - empty);
        prop_assert!(!state.weights().mask.has_empty_column());
        prop_assert_eq!(ll(&state), before);
    }

    #[test]
    fn factor_relabelling_keeps_the_joint(bits in prop::collection::vec(any::<bool>(), 16), seed in any::<u64>()) {
        let (n, k) = (4, 4);
        let (x, state) = random_state(random_mask(&bits, n, k), 5, seed);
        let m = model(2.0);
        let base = log_joint(&x, &state, &m).unwrap().total();
        for order in [[1, 0, 2, 3], [3, 2, 1, 0], [2, 3, 0, 1]] {
            let other = log_joint(&x, &state.permute_factors(&order), &m).unwrap().total();
            prop_assert!((base - other).abs() < 1e-9 * base.abs().max(1.0));
        }
    }

    #[test]
    fn culinary_sampler_never_serves_an_empty_dish(n in 1usize..=12, alpha in 0.1f64..8.0, seed in any::<u64>()) {
        let z = sample_ibp_sequential(n, alpha, &mut rng_from_seed(seed)).unwrap();
        prop_assert!(!z.has_empty_column());
        prop_assert_eq!(z.n_rows(), n);
    }

    #[test]
    fn generation_is_seed_reproducible(seed in any::<u64>(), width in 0usize..=4) {
        let hyper = HyperParams::single_layer(width, 3.0, 2.0, 1.0);
        let draw = || {
            let mut rng = rng_from_seed(seed);
            let g = GenerativeModel::sample(hyper.clone(), 5, &mut rng).unwrap();
            generate_dataset(&g, 7, &mut rng).unwrap()
        };
        prop_assert_eq!(draw(), draw());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn sweeps_keep_the_cache_and_counters_honest(seed in any::<u64>(), k0 in 0usize..=5, iters in 1usize..=4) {
        let mut rng = rng_from_seed(seed);
        let hyper = HyperParams::single_layer(3, 3.0, 2.0, 1.0);
        let g = GenerativeModel::sample(hyper.clone(), 5, &mut rng).unwrap();
        let x = generate_dataset(&g, 8, &mut rng).unwrap().pop().unwrap().into_inner();
        let m = LayerModel::from_hyper(&hyper, 0);
        let mut state = init_state(&x, InitStrategy::Fixed(k0), &m, None, &mut rng).unwrap();
        let sampler = LayerSampler::new(m, 0.5);
        let (mut cursor, mut stats) = (0usize, MoveStats::default());
        for _ in 0..iters {
            sweep(&x, &mut state, &sampler, &mut cursor, &mut stats, &mut rng).unwrap();
            let fresh = log_joint(&x, &state, &m).unwrap().total();
            prop_assert!((fresh - state.log_joint_cached()).abs() < 1e-8);
            let active = state.weights().weights().dot(state.factors());
            prop_assert!((&active - state.activation()).iter().all(|d| d.abs() < 1e-9));
        }
        prop_assert!(stats.is_consistent());
        prop_assert!(stats.add_accepted <= stats.add_proposed && stats.delete_accepted <= stats.delete_proposed);
        let net = k0 as i64 + stats.add_accepted as i64 - stats.delete_accepted as i64;
        prop_assert_eq!(net, state.num_factors() as i64);
    }
}

#[test]
fn harmonic_numbers() {
    assert_eq!(harmonic_number(0), 0.0);
    assert_eq!(harmonic_number(1), 1.0);
    assert!((harmonic_number(3) - 11.0 / 6.0).abs() < 1e-15);
    let reverse: f64 = (1..=100).rev().map(|j| 1.0 / j as f64).sum();
    assert!((harmonic_number(100) - reverse).abs() < 1e-14);
    // Asymptotic expansion with Euler's constant.
    let n = 100.0f64;
    let asym = n.ln() + 0.577_215_664_901_532_9 + 1.0 / (2.0 * n) - 1.0 / (12.0 * n * n) + 1.0 / (120.0 * n.powi(4));
    assert!((harmonic_number(100) - asym).abs() < 1e-12);
}
