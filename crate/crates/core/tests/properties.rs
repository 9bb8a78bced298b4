//! Property tests for invariants that hold for every model, policy and
//! feature stream, not just the hand-picked cases in the unit tests.

use lvrep::env::{self, build_random_block_mdp, BlockMdpSpec, Policy, TabularMdp};
use lvrep::explore::{self, BonusMode, BonusParams, CovarianceState};
use lvrep::features::{build_rff, exact_q, lvrep_feature, mc_q, FeatureVector, LinearQ};
use lvrep::latent_model::{self, LatentFactorModel, TransitionDataset};
use lvrep::planner::{self, AugmentedReward};
use lvrep::util::{dirichlet_row, seeded};
use proptest::prelude::*;
use rand::Rng;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(48)
}

fn random_policy(ns: usize, na: usize, seed: u64) -> Policy {
    let mut rng = seeded(seed);
    Policy::new(ns, na, (0..ns).flat_map(|_| dirichlet_row(na, 0.7, &mut rng)).collect()).unwrap()
}

fn random_mdp(ns: usize, na: usize, nz: usize, gamma: f64, seed: u64) -> (TabularMdp, LatentFactorModel) {
    let mut rng = seeded(seed);
    let model = LatentFactorModel::random(ns, na, nz, 0.5, &mut rng).unwrap();
    let reward = (0..ns * na).map(|_| rng.random::<f64>()).collect();
    let init = dirichlet_row(ns, 1.0, &mut rng);
    (model.to_mdp(reward, gamma, init).unwrap(), model)
}

fn sample_data(model: &LatentFactorModel, n: usize, seed: u64) -> TransitionDataset {
    let mut rng = seeded(seed);
    let mut data = TransitionDataset::new(model.n_states(), model.n_actions());
    for _ in 0..n {
        let s = rng.random_range(0..model.n_states());
        let a = rng.random_range(0..model.n_actions());
        data.push(s, a, latent_model::sample_next_state(model, s, a, &mut rng)).unwrap();
    }
    data
}

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn policy_values_satisfy_bellman_equations(
        ns in 2usize..9, na in 1usize..4, nz in 1usize..5, gamma in 0.0f64..0.98, seed in any::<u64>()
    ) {
        let (mdp, _) = random_mdp(ns, na, nz, gamma, seed);
        let policy = random_policy(ns, na, seed ^ 1);
        let pv = env::evaluate_policy(&mdp, &policy, None).unwrap();
        for s in 0..ns {
            let v: f64 = (0..na).map(|a| policy.prob(s, a) * pv.q[s * na + a]).sum();
            prop_assert!((v - pv.v[s]).abs() < 1e-9);
            for a in 0..na {
                let next: f64 = mdp.row(s, a).iter().zip(&pv.v).map(|(p, v)| p * v).sum();
                prop_assert!((pv.q[s * na + a] - mdp.reward_at(s, a) - gamma * next).abs() < 1e-9);
            }
        }
        let opt = env::exact_value_iteration(&mdp, None, 1e-11).unwrap();
        for s in 0..ns {
            prop_assert!(opt.v[s] >= pv.v[s] - 1e-8);
        }
    }

    #[test]
    fn occupancy_is_a_distribution_over_reachable_pairs(
        ns in 2usize..9, na in 1usize..4, gamma in 0.0f64..0.98, seed in any::<u64>()
    ) {
        let (mdp, _) = random_mdp(ns, na, 3, gamma, seed);
        let policy = random_policy(ns, na, seed ^ 2);
        let occ = env::occupancy_measure(&mdp, &policy).unwrap();
        prop_assert!((occ.dist.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(occ.dist.iter().all(|&d| d >= -1e-12));
        // Mass at (s, a) factors through pi(a|s).
        let marginal = occ.state_marginal();
        for (s, &m) in marginal.iter().enumerate() {
            for a in 0..na {
                prop_assert!((occ.at(s, a) - m * policy.prob(s, a)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn composed_transitions_are_stochastic_and_permutation_invariant(
        ns in 1usize..8, na in 1usize..4, nz in 1usize..6, seed in any::<u64>()
    ) {
        let mut rng = seeded(seed);
        let model = LatentFactorModel::random(ns, na, nz, 0.8, &mut rng).unwrap();
        let t = model.compose_transition();
        for row in t.chunks(ns) {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let mut perm: Vec<usize> = (0..nz).collect();
        perm.rotate_left(seed as usize % nz);
        let permuted = model.permute_latents(&perm).unwrap();
        prop_assert!(sup(&t, &permuted.compose_transition()) < 1e-14);
        let data = sample_data(&model, 50, seed ^ 3);
        let (a, b) = (
            latent_model::log_likelihood(&model, &data).unwrap(),
            latent_model::log_likelihood(&permuted, &data).unwrap(),
        );
        prop_assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn elbo_lower_bounds_likelihood_with_equality_at_posterior(
        ns in 2usize..7, na in 1usize..3, nz in 1usize..5, seed in any::<u64>()
    ) {
        let mut rng = seeded(seed);
        let model = LatentFactorModel::random(ns, na, nz, 1.0, &mut rng).unwrap();
        let data = sample_data(&model, 60, seed ^ 4);
        let ll = latent_model::log_likelihood(&model, &data).unwrap();
        let arbitrary: Vec<Vec<f64>> = data.triples().iter().map(|_| dirichlet_row(nz, 1.0, &mut rng)).collect();
        prop_assert!(latent_model::elbo(&model, &arbitrary, &data).unwrap() <= ll + 1e-9);
        let exact: Vec<Vec<f64>> = data
            .triples()
            .iter()
            .map(|&(s, a, s2)| latent_model::exact_posterior(&model, s, a, s2).unwrap())
            .collect();
        prop_assert!((latent_model::elbo(&model, &exact, &data).unwrap() - ll).abs() < 1e-9);
    }

    #[test]
    fn em_never_decreases_likelihood(
        ns in 2usize..8, na in 1usize..4, nz in 1usize..5, seed in any::<u64>()
    ) {
        let (truth, _) = random_mdp(ns, na, 3, 0.9, seed);
        let mut rng = seeded(seed ^ 5);
        let mut data = TransitionDataset::new(ns, na);
        for _ in 0..120 {
            let (s, a) = (rng.random_range(0..ns), rng.random_range(0..na));
            data.push(s, a, truth.sample_next(s, a, &mut rng)).unwrap();
        }
        let mut model = LatentFactorModel::random(ns, na, nz, 1.0, &mut rng).unwrap();
        let mut prev = latent_model::log_likelihood(&model, &data).unwrap();
        for _ in 0..15 {
            model = latent_model::em_step(&model, &data).unwrap();
            let ll = latent_model::log_likelihood(&model, &data).unwrap();
            prop_assert!(ll >= prev - 1e-9, "{} -> {}", prev, ll);
            prev = ll;
        }
    }

    #[test]
    fn linear_q_is_complete_for_factored_models(
        ns in 2usize..9, na in 1usize..4, nz in 1usize..5, gamma in 0.0f64..0.98, seed in any::<u64>()
    ) {
        let (mdp, model) = random_mdp(ns, na, nz, gamma, seed);
        let policy = random_policy(ns, na, seed ^ 6);
        let pv = env::evaluate_policy(&mdp, &policy, None).unwrap();
        let w = LinearQ::from_state_values(&model, &pv.v).unwrap();
        for s in 0..ns {
            for a in 0..na {
                let q = exact_q(&model, &w, mdp.reward(), gamma, s, a).unwrap();
                prop_assert!((q - pv.q[s * na + a]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn monte_carlo_q_concentrates_on_exact_q(nz in 1usize..5, seed in any::<u64>()) {
        let (mdp, model) = random_mdp(4, 2, nz, 0.9, seed);
        let mut rng = seeded(seed ^ 7);
        let rff = build_rff(1.0, 64, nz, &mut rng).unwrap();
        let weights: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
        let values = rff.latent_function(&weights, nz);
        let exact_w = LinearQ::new(1.0, values.clone()).unwrap();
        let rff_w = LinearQ::new(1.0, weights).unwrap();
        let spread = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let n_mc = 4000;
        for (s, a) in [(0, 0), (3, 1)] {
            let exact = exact_q(&model, &exact_w, mdp.reward(), 0.9, s, a).unwrap();
            let mc = mc_q(&model, &rff, &rff_w, mdp.reward(), 0.9, s, a, n_mc, &mut rng).unwrap();
            prop_assert!((mc - exact).abs() <= 6.0 * 0.9 * spread / (n_mc as f64).sqrt() + 1e-12);
        }
    }

    #[test]
    fn rff_estimates_are_bounded_and_scale_with_bandwidth(
        bandwidth in 0.2f64..5.0, seed in any::<u64>(),
        x in prop::collection::vec(-2.0f64..2.0, 3), y in prop::collection::vec(-2.0f64..2.0, 3)
    ) {
        let unit = build_rff(1.0, 128, 3, &mut seeded(seed)).unwrap();
        let scaled = build_rff(bandwidth, 128, 3, &mut seeded(seed)).unwrap();
        let k = unit.kernel_estimate(&x, &y);
        prop_assert!((-2.0..=2.0).contains(&k));
        prop_assert!((0.0..=2.0).contains(&unit.kernel_estimate(&x, &x)));
        let xs: Vec<f64> = x.iter().map(|v| v * bandwidth).collect();
        let ys: Vec<f64> = y.iter().map(|v| v * bandwidth).collect();
        prop_assert!((scaled.kernel_estimate(&xs, &ys) - k).abs() < 1e-9);
    }

    #[test]
    fn elliptical_potential_identity_and_bound(
        dim in 1usize..6, lambda in 0.1f64..4.0, n in 1usize..40, seed in any::<u64>()
    ) {
        let mut rng = seeded(seed);
        let mut state = CovarianceState::new(dim, lambda).unwrap();
        let mut log_sum = 0.0;
        let mut clipped_sum = 0.0;
        for _ in 0..n {
            let phi = FeatureVector(dirichlet_row(dim, 1.0, &mut rng));
            let x = state.quadratic_form(&phi).unwrap();
            log_sum += (1.0 + x).ln();
            clipped_sum += x.min(1.0);
            state.update(&phi).unwrap();
        }
        let ld = state.log_det_ratio().unwrap();
        prop_assert!((ld - log_sum).abs() < 1e-8 * ld.max(1.0));
        prop_assert!(clipped_sum <= 2.0 * ld + 1e-9);
    }

    #[test]
    fn incremental_inverse_matches_rebuild_and_bonus_shrinks(
        dim in 1usize..6, n in 1usize..30, alpha in 0.0f64..5.0, clip in 0.1f64..3.0, seed in any::<u64>()
    ) {
        let mut rng = seeded(seed);
        let feats: Vec<FeatureVector> = (0..n).map(|_| FeatureVector(dirichlet_row(dim, 1.0, &mut rng))).collect();
        let probe = FeatureVector(dirichlet_row(dim, 1.0, &mut rng));
        let params = BonusParams { alpha, lambda: 1.0, mode: BonusMode::NormClipped, clip };
        let mut state = CovarianceState::new(dim, 1.0).unwrap();
        let mut prev = explore::bonus(&state, &probe, &params).unwrap();
        for f in &feats {
            state.update(f).unwrap();
            let b = explore::bonus(&state, &probe, &params).unwrap();
            prop_assert!(b <= prev + 1e-12 && b <= clip && b >= 0.0);
            prev = b;
        }
        let rebuilt = CovarianceState::rebuild(&feats, dim, 1.0).unwrap();
        let diff = (state.sigma_inv() - rebuilt.sigma_inv()).abs().max();
        prop_assert!(diff < 1e-9);
    }

    #[test]
    fn linear_planner_matches_tabular_planning(
        ns in 2usize..7, na in 1usize..4, nz in 1usize..4, gamma in 0.0f64..0.9, seed in any::<u64>()
    ) {
        let (mdp, model) = random_mdp(ns, na, nz, gamma, seed);
        let mut rng = seeded(seed ^ 8);
        let bonus: Vec<f64> = (0..ns * na).map(|_| rng.random::<f64>()).collect();
        let aug = AugmentedReward::optimistic(mdp.reward().to_vec(), &bonus).unwrap();
        let tabular = planner::plan_on_model(&model, &aug, gamma, 1e-12).unwrap();
        let linear = planner::linear_q_planner(&model, &aug, gamma, 5000).unwrap();
        prop_assert!(sup(&tabular.q, &linear.q) < 1e-8);
        for s in 0..ns {
            let best = linear.q[s * na + linear.policy.greedy_actions()[s]];
            let tab_best = tabular.q[s * na + tabular.policy.greedy_actions()[s]];
            prop_assert!((best - tab_best).abs() < 1e-8);
        }
    }

    #[test]
    fn optimism_is_monotone_in_the_bonus(
        ns in 2usize..7, na in 1usize..4, gamma in 0.0f64..0.95, scale in 0.0f64..3.0, seed in any::<u64>()
    ) {
        let (mdp, model) = random_mdp(ns, na, 3, gamma, seed);
        let mut rng = seeded(seed ^ 9);
        let bonus: Vec<f64> = (0..ns * na).map(|_| rng.random::<f64>()).collect();
        let bigger: Vec<f64> = bonus.iter().map(|b| b * (1.0 + scale)).collect();
        let plan = |b: &[f64]| {
            planner::plan_on_model(&model, &AugmentedReward::optimistic(mdp.reward().to_vec(), b).unwrap(), gamma, 1e-11).unwrap()
        };
        let (low, high) = (plan(&bonus), plan(&bigger));
        prop_assert!(low.q.iter().zip(&high.q).all(|(l, h)| *h >= l - 1e-8));
        let pess = planner::plan_on_model(&model, &AugmentedReward::pessimistic(mdp.reward().to_vec(), &bonus).unwrap(), gamma, 1e-11).unwrap();
        let none = planner::plan_on_model(&model, &AugmentedReward::unadjusted(mdp.reward().to_vec()), gamma, 1e-11).unwrap();
        prop_assert!(pess.q.iter().zip(&none.q).zip(&low.q).all(|((p, n), o)| *p <= n + 1e-8 && *n <= o + 1e-8));
    }

    #[test]
    fn block_features_are_distributions(
        ns in 2usize..12, na in 1usize..4, nz in 1usize..5, seed in any::<u64>()
    ) {
        let nz = nz.min(ns);
        let (_, model) = build_random_block_mdp(&BlockMdpSpec::new(ns, na, nz, 1.0, seed)).unwrap();
        for s in 0..ns {
            for a in 0..na {
                let f = lvrep_feature(&model, s, a).unwrap();
                prop_assert_eq!(f.dim(), nz);
                prop_assert!((f.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}
