//! Spec invariants as property tests.

use num_rational::Rational64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gpc_core::construction::{
    ensemble_b_tilde, make_braided, make_ensemble_emulating, make_extended_braided, make_pc,
    make_staircase,
};
use gpc_core::density_evolution::{de_iterate, poisson_tail};
use gpc_core::graph_sim::{build_graph, peel, sample_erasures};
use gpc_core::potential::{loss_mixture, loss_single, potential_vs, sample_profile};
use gpc_core::{averaging_matrix, BinMatrix, EnsembleParams, ErasureProfile, EtaSpec, Family};

fn any_family() -> impl Strategy<Value = EtaSpec> {
    prop_oneof![
        Just(make_pc()),
        (2usize..30).prop_map(|l| make_staircase(l).unwrap()),
        (2usize..15).prop_map(|k| make_braided(2 * k).unwrap()),
        (1usize..8, 0usize..6).prop_map(|(w, extra)| {
            make_ensemble_emulating(EnsembleParams::new(w + extra, w).unwrap()).unwrap()
        }),
        (1usize..8, 0usize..10)
            .prop_map(|(w, extra)| make_extended_braided(w + extra, w).unwrap()),
    ]
}

fn random_eta() -> impl Strategy<Value = EtaSpec> {
    (1usize..6).prop_flat_map(|side| {
        proptest::collection::vec(any::<bool>(), side * (side + 1) / 2).prop_map(move |bits| {
            let mut eta = BinMatrix::square(side);
            let mut k = 0;
            for i in 0..side {
                for j in i..side {
                    if bits[k] {
                        eta.set_sym(i, j, 1);
                    }
                    k += 1;
                }
            }
            EtaSpec::new(eta, Rational64::from_integer(1), Family::Custom).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn families_are_symmetric_and_binary(spec in any_family()) {
        prop_assert!(spec.eta().is_symmetric());
        prop_assert!(spec.eta().is_binary());
        let b = averaging_matrix(&spec);
        prop_assert!(b.matrix().is_symmetric());
        // every entry is a multiple of γ
        for v in b.matrix().entries() {
            prop_assert!((v / spec.gamma()).is_integer());
        }
    }

    #[test]
    fn ensemble_b_tilde_is_quantized(w in 1usize..7, extra in 0usize..7) {
        let params = EnsembleParams::new(w + extra, w).unwrap();
        let bt = ensemble_b_tilde(params);
        prop_assert!(bt.is_symmetric());
        let w2 = Rational64::from_integer((w * w) as i64);
        for v in bt.entries() {
            let k = v * w2;
            prop_assert!(k.is_integer() && k.to_integer() >= 0 && k.to_integer() <= w as i64);
        }
    }

    #[test]
    fn de_states_are_monotone_and_bounded(
        spec in any_family(),
        t in 1u32..6,
        c in 0.0f64..20.0,
    ) {
        let b = averaging_matrix(&spec).to_sparse();
        let trace = de_iterate(&b, &ErasureProfile::regular(t).unwrap(), c, 40).unwrap();
        prop_assert!(trace.is_monotone(1e-12));
        for r in &trace.records {
            prop_assert!(r.x.iter().chain(&r.z).all(|v| (0.0..=1.0).contains(v)));
            // failure implies the weaker erasure event
            prop_assert!(r.x.iter().zip(&r.z).all(|(x, z)| z <= x));
        }
    }

    #[test]
    fn graph_counts_match_eta(spec in random_eta(), n in 2usize..9) {
        let g = build_graph(&spec, n).unwrap();
        let eta = spec.eta();
        let side = eta.rows();
        let (mut off, mut diag) = (0, 0);
        for i in 0..side {
            diag += eta.get(i, i) as usize;
            for j in i + 1..side {
                off += eta.get(i, j) as usize;
            }
        }
        prop_assert_eq!(g.vn_count(), n * n * off + n * (n - 1) / 2 * diag);
        prop_assert_eq!(g.cn_count(), side * n);
        let mut deg = vec![0usize; g.cn_count()];
        for (a, b) in g.edges() {
            prop_assert_ne!(a, b);
            deg[a] += 1;
            deg[b] += 1;
        }
        for i in 0..side {
            let expect = n * (0..side).filter(|&j| j != i && eta.get(i, j) == 1).count()
                + eta.get(i, i) as usize * (n - 1);
            prop_assert_eq!(g.cn_degree(i), expect);
            prop_assert!(deg[i * n..(i + 1) * n].iter().all(|&d| d == expect));
        }
    }

    #[test]
    fn peeling_is_monotone(l in 2usize..8, t in 1u32..4, c in 0.0f64..8.0, seed in any::<u64>()) {
        let g = build_graph(&make_staircase(l).unwrap(), 16).unwrap();
        let caps = vec![t; g.cn_count()];
        let g = g.with_capabilities(caps).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = sample_erasures(&g, c, &mut rng).unwrap();
        prop_assert!(state.is_consistent(&g));
        let mut prev = state.remaining();
        let mut w_prev = f64::INFINITY;
        for _ in 0..12 {
            let out = peel(&g, &mut state, 1);
            prop_assert!(state.is_consistent(&g));
            let now = state.remaining();
            prop_assert!(now.iter().all(|v| prev.binary_search(v).is_ok()));
            prop_assert!(out.w[0] <= w_prev);
            w_prev = out.w[0];
            prev = now;
        }
    }

    #[test]
    fn poisson_tail_is_monotone(t in 0u32..40, x in 0.0f64..80.0, dx in 0.0f64..5.0) {
        let a = poisson_tail(t, x).unwrap();
        let b = poisson_tail(t, x + dx).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a - 1e-15);
        prop_assert!(poisson_tail(t + 1, x).unwrap() <= a + 1e-15);
    }

    #[test]
    fn sampled_profiles_dominate_regular_loss(t_bar in 2.0f64..6.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let profile = sample_profile(t_bar, t_bar.ceil() as u32 + 4, &mut rng).unwrap();
        prop_assert!((profile.t_bar() - t_bar).abs() < 1e-9);
        for k in 0..=100 {
            let x = k as f64 * 0.5;
            prop_assert!(loss_mixture(&profile, x) >= loss_single(t_bar, x).unwrap() - 1e-12);
        }
    }

    #[test]
    fn potential_vanishes_at_zero(t in 1u32..12, c in 0.01f64..40.0) {
        prop_assert_eq!(potential_vs(0.0, c, &ErasureProfile::regular(t).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn profile_text_round_trip(masses in proptest::collection::btree_map(1u32..20, 1u32..100, 1..5)) {
        let total: u32 = masses.values().sum();
        let profile = ErasureProfile::new(
            masses.iter().map(|(&t, &m)| (t, f64::from(m) / f64::from(total))),
        ).unwrap();
        let parsed: ErasureProfile = profile.to_string().parse().unwrap();
        prop_assert_eq!(parsed, profile);
    }
}
