use proptest::prelude::*;

use localw1::bell::{exact_bell_distribution, read_bell_records, write_bell_records, BellSampler};
use localw1::experiments::bell_campaign::bell_truncation;
use localw1::experiments::props::{random_delta, random_state};
use localw1::experiments::shadow_campaign::shadow_truncation;
use localw1::metric::{
    locally_indistinguishable_bound, trace_norm_lower_bound, w1loc, w1loc_dual, w1loc_primal, w1loc_uniform_upper_bound,
    w1loc_upper_bound, PenaltySchedule,
};
use localw1::operator::{pauli_coefficients, QubitSet};
use localw1::shadows::{read_shadow_records, required_shadow_count, sample_shadows, write_shadow_records};
use localw1::states::{basis_state, ghz, seeded_rng, GhzSign, StateSpec};

fn schedule(n: usize, c: f64) -> PenaltySchedule {
    PenaltySchedule::geometric(c, n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn primal_equals_dual(n in 1usize..=4, seed: u64, c in 2.0f64..8.0) {
        let delta = random_delta(n, seed as usize, &mut seeded_rng(seed)).unwrap();
        let s = schedule(n, c);
        let p = w1loc_primal(&delta, &s).unwrap().value;
        let d = w1loc_dual(&delta, &s).unwrap().value;
        prop_assert!((p - d).abs() <= 1e-7 * p.max(1.0), "primal {p} dual {d}");
    }

    #[test]
    fn bounds_are_ordered(n in 1usize..=4, seed: u64) {
        let delta = random_delta(n, seed as usize, &mut seeded_rng(seed)).unwrap();
        let s = schedule(n, 4.0);
        let w = w1loc(&delta, &s).unwrap();
        let lo = trace_norm_lower_bound(&delta, &s).unwrap();
        let ub = w1loc_upper_bound(&delta, &s).unwrap();
        let uub = w1loc_uniform_upper_bound(&delta, &s).unwrap();
        prop_assert!(lo <= w + 1e-9 && w <= ub + 1e-9 && ub <= uub + 1e-9, "{lo} {w} {ub} {uub}");
    }

    #[test]
    fn norm_is_symmetric_and_homogeneous(n in 1usize..=3, seed: u64, lambda in -5.0f64..5.0) {
        let delta = random_delta(n, seed as usize, &mut seeded_rng(seed)).unwrap();
        let s = schedule(n, 4.0);
        let w = w1loc(&delta, &s).unwrap();
        prop_assert!(w >= 0.0);
        prop_assert!((w1loc(&delta.scale(-1.0), &s).unwrap() - w).abs() <= 1e-9 * w.max(1.0));
        prop_assert!((w1loc(&delta.scale(lambda), &s).unwrap() - lambda.abs() * w).abs() <= 1e-8 * w.max(1.0));
    }

    #[test]
    fn larger_penalties_shrink_the_norm(n in 1usize..=3, seed: u64, c in 2.0f64..6.0, extra in 0.0f64..4.0) {
        let delta = random_delta(n, seed as usize, &mut seeded_rng(seed)).unwrap();
        let small = w1loc(&delta, &schedule(n, c + extra)).unwrap();
        let large = w1loc(&delta, &schedule(n, c)).unwrap();
        prop_assert!(small <= large + 1e-9);
    }

    #[test]
    fn basis_states_give_hamming_distance(bits in prop::collection::vec(any::<(bool, bool)>(), 1..=5)) {
        let (x, y): (Vec<bool>, Vec<bool>) = bits.iter().copied().unzip();
        let n = x.len();
        let delta = basis_state(&x).unwrap().difference(&basis_state(&y).unwrap()).unwrap();
        let h = bits.iter().filter(|(a, b)| a != b).count() as f64;
        for s in [schedule(n, 4.0), PenaltySchedule::constant_one(n)] {
            prop_assert!((w1loc(&delta, &s).unwrap() - h).abs() <= 1e-9);
        }
    }

    #[test]
    fn pauli_expansion_round_trips(n in 1usize..=4, seed: u64) {
        let delta = random_delta(n, seed as usize, &mut seeded_rng(seed)).unwrap();
        let back = pauli_coefficients(&delta).to_operator();
        prop_assert!(back.max_abs_diff(&delta) < 1e-12);
    }

    #[test]
    fn partial_trace_of_product_factorises(seed: u64) {
        let mut rng = seeded_rng(seed);
        let a = random_state(2, &mut rng).unwrap();
        let b = random_state(1, &mut rng).unwrap();
        let ab = a.tensor(&b).unwrap();
        prop_assert!(ab.marginal(QubitSet::range(2)).unwrap().max_abs_diff(a.op()) < 1e-12);
    }

    #[test]
    fn shadow_records_round_trip(n in 1usize..=4, seed: u64, count in 1usize..40) {
        let rho = random_state(n, &mut seeded_rng(seed)).unwrap();
        let shadows = sample_shadows(&rho, count, &mut seeded_rng(seed ^ 1));
        let mut buf = Vec::new();
        write_shadow_records(&mut buf, &shadows).unwrap();
        prop_assert_eq!(read_shadow_records(buf.as_slice()).unwrap(), shadows);
    }

    #[test]
    fn bell_records_round_trip(n in 1usize..=4, seed: u64, count in 1usize..40) {
        let rho = random_state(n, &mut seeded_rng(seed)).unwrap();
        let records = BellSampler::new(&rho).unwrap().sample_many(count, &mut seeded_rng(seed ^ 2));
        let mut buf = Vec::new();
        write_bell_records(&mut buf, &records).unwrap();
        prop_assert_eq!(read_bell_records(buf.as_slice()).unwrap(), records);
    }

    #[test]
    fn bell_distribution_is_normalised(n in 1usize..=4, seed: u64) {
        let rho = random_state(n, &mut seeded_rng(seed)).unwrap();
        let p = exact_bell_distribution(&rho).unwrap();
        prop_assert_eq!(p.len(), 1 << (2 * n));
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_weights_are_monotone(w in 0.01f64..1.0, shrink in 0.05f64..1.0, c in 3.2f64..12.0, n in 1usize..=8) {
        let w2 = w * shrink;
        prop_assert!(bell_truncation(w2, c, n) >= bell_truncation(w, c, n));
        prop_assert!(shadow_truncation(w2, c, n) >= shadow_truncation(w, c, n));
        let k = bell_truncation(w, c, n);
        prop_assert!((1..=n).contains(&k));
    }

    #[test]
    fn shadow_count_grows_as_accuracy_tightens(k in 1usize..=4, m in 1usize..500, eps in 0.01f64..1.0) {
        let a = required_shadow_count(k, m, 0.1, eps).unwrap();
        let b = required_shadow_count(k, m, 0.1, eps / 2.0).unwrap();
        prop_assert!(b >= 4 * a - 4 && b <= 4 * a);
    }

    #[test]
    fn state_specs_round_trip(n in 1usize..=5, seed in 0u64..1000, rank in 1usize..4) {
        for spec in [
            StateSpec::HaarPure { n, seed },
            StateSpec::RandomMixed { n, rank: rank.min(1 << n), seed },
            StateSpec::Basis(vec![true; n]),
        ] {
            let text = spec.to_string();
            prop_assert_eq!(text.parse::<StateSpec>().unwrap(), spec);
        }
    }
}

#[test]
fn ghz_pair_meets_the_indistinguishability_bound() {
    // GHZ⁺ and GHZ⁻ agree on every proper marginal, and the bound with k = n
    // is attained.
    for n in 2..=6 {
        let s = schedule(n, 4.0);
        let delta = ghz(n, GhzSign::Plus).unwrap().difference(&ghz(n, GhzSign::Minus).unwrap()).unwrap();
        let w = w1loc(&delta, &s).unwrap();
        let bound = locally_indistinguishable_bound(n, n, &s).unwrap();
        assert!((w - bound).abs() < 1e-9, "n={n}: {w} vs {bound}");
    }
}
