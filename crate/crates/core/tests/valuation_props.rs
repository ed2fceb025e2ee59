use fairslice::allocations::value_matrix;
use fairslice::{envy_report, eval, rat, random, CakeInstance, ContiguousAllocation, Rational};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64, max_n: usize) -> (ChaCha8Rng, CakeInstance) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_n);
    let inst = random::piecewise_instance(&mut rng, n, 5, 40);
    (rng, inst)
}

fn random_allocation(rng: &mut ChaCha8Rng, n: usize) -> ContiguousAllocation {
    let mut cuts: Vec<Rational> = (1..n).map(|_| rat(rng.gen_range(0..=48), 48)).collect();
    cuts.sort();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    ContiguousAllocation::new(cuts, order).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eval_is_additive(seed in any::<u64>(), a in 0i64..=90, b in 0i64..=90, c in 0i64..=90) {
        let (_, inst) = instance(seed, 1);
        let mut p = [rat(a, 90), rat(b, 90), rat(c, 90)];
        p.sort();
        let v = inst.valuation(0);
        prop_assert_eq!(eval(v, &p[0], &p[2]).unwrap(), eval(v, &p[0], &p[1]).unwrap() + eval(v, &p[1], &p[2]).unwrap());
    }

    #[test]
    fn every_valuation_is_normalized(seed in any::<u64>()) {
        let (_, inst) = instance(seed, 4);
        for v in inst.valuations() {
            prop_assert!(eval(v, &Rational::zero(), &Rational::one()).unwrap().is_one());
        }
    }

    #[test]
    fn cut_query_inverts_eval_and_is_leftmost(seed in any::<u64>(), x in 0i64..=60, y in 0i64..=60) {
        let (_, inst) = instance(seed, 1);
        let v = inst.valuation(0);
        let (x, y) = (rat(x.min(y), 60), rat(x.max(y), 60));
        let alpha = eval(v, &x, &y).unwrap();
        let c = v.cut_query(&x, &alpha).unwrap().expect("reachable value");
        prop_assert!(c <= y);
        prop_assert!(c >= x);
        prop_assert_eq!(eval(v, &x, &c).unwrap(), alpha.clone());
        if c > x {
            let before = &c - rat(1, 1_000_000_000);
            let before = if before > x { before } else { x.clone() };
            prop_assert!(eval(v, &x, &before).unwrap() < alpha);
        }
    }

    #[test]
    fn pieces_of_any_allocation_sum_to_one(seed in any::<u64>()) {
        let (mut rng, inst) = instance(seed, 6);
        let a = random_allocation(&mut rng, inst.n());
        for row in value_matrix(&inst, &a).unwrap() {
            prop_assert!(row.into_iter().fold(Rational::zero(), |s, v| s + v).is_one());
        }
    }

    #[test]
    fn relabelling_agents_preserves_max_envy(seed in any::<u64>()) {
        let (mut rng, inst) = instance(seed, 6);
        let n = inst.n();
        let a = random_allocation(&mut rng, n);
        let mut sigma: Vec<usize> = (0..n).collect();
        sigma.shuffle(&mut rng);
        // New agent sigma[i] is old agent i.
        let mut vals = vec![inst.valuation(0).clone(); n];
        for i in 0..n {
            vals[sigma[i]] = inst.valuation(i).clone();
        }
        let relabelled = CakeInstance::new(vals).unwrap();
        let b = ContiguousAllocation::new(a.cuts.clone(), a.order.iter().map(|&i| sigma[i]).collect()).unwrap();
        prop_assert_eq!(envy_report(&inst, &a).unwrap().max_envy, envy_report(&relabelled, &b).unwrap().max_envy);
    }
}
