use metalift::algebra::Ring;
use metalift::decide::{decide_lift, DecideOptions};
use metalift::group::GroupParams;
use metalift::io::{local_from_json, local_to_json};
use metalift::local::{RingContext, Valuation};
use metalift::modular::{decompose, module_of, Decomposition, ModularContext, SummandSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ring() -> RingContext {
    RingContext::new(&GroupParams::new(5, 2, 4, 7).unwrap(), 3, 2).unwrap()
}

fn summands(m: u64, q: u64, max: usize) -> impl Strategy<Value = Decomposition> {
    prop::collection::vec((0..m, 1..=q), 0..=max)
        .prop_map(|v| Decomposition(v.into_iter().map(|(epsilon, kappa)| SummandSpec { epsilon, kappa }).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn valuation_is_additive(seed in any::<u64>(), i in 0u32..20, j in 0u32..20) {
        let r = ring();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = r.random_element_with_valuation(&mut rng, i);
        let b = r.random_element_with_valuation(&mut rng, j);
        if let (Valuation::Exact(va), Valuation::Exact(vb)) = (r.valuation(&a), r.valuation(&b)) {
            prop_assert_eq!(r.valuation(&r.mul(&a, &b)), Valuation::Exact(va + vb));
            prop_assert_eq!(r.valuation(&a), r.valuation_by_division(&a));
        }
    }

    #[test]
    fn division_undoes_multiplication(seed in any::<u64>(), k in 1u32..6) {
        let r = ring();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = r.random_element(&mut rng, r.prec_cap);
        let back = r.divide_by_t_pow(&r.mul(&z, &r.t_pow(k)), k).unwrap();
        prop_assert!(r.equal_at(&back, &z).equal);
        prop_assert_eq!(back.prec, r.prec_cap - k);
    }

    #[test]
    fn json_round_trip(seed in any::<u64>(), prec in 1u32..60) {
        let r = ring();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = r.random_element(&mut rng, prec);
        let text = serde_json::to_string(&local_to_json(&r, &z)).unwrap();
        let back = local_from_json(&r, &serde_json::from_str(&text).unwrap()).unwrap();
        prop_assert_eq!(back, z);
    }

    #[test]
    fn canonical_is_idempotent(d in summands(4, 25, 6)) {
        let c = d.canonical(4);
        prop_assert_eq!(c.canonical(4), c.clone());
        prop_assert_eq!(c.dimension(), d.dimension());
    }

    #[test]
    fn decompose_recovers_sums(d in summands(4, 8, 3)) {
        let ctx = ModularContext::new(&GroupParams::new(5, 2, 4, 7).unwrap()).unwrap();
        let module = module_of(&ctx, &d).unwrap();
        prop_assert_eq!(decompose(&ctx, &module).unwrap(), d.canonical(4));
    }

    #[test]
    fn strict_implies_relaxed(d in summands(4, 25, 5)) {
        let g = GroupParams::new(5, 2, 4, 7).unwrap();
        let strict = decide_lift(&d, &g, 1, DecideOptions { strict_uniform_a: true });
        let relaxed = decide_lift(&d, &g, 1, DecideOptions::default());
        prop_assert!(!strict.is_liftable() || relaxed.is_liftable());
        if let Some(p) = relaxed.plan() {
            prop_assert!(p.validate(&g, 1).is_ok());
            prop_assert_eq!(p.predicted_decomposition(1, 4), d.canonical(4));
        }
    }
}
