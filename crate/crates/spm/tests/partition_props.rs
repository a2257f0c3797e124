//! Property tests over randomly shaped piles.

use proptest::prelude::*;

use spm::diagram::{compare, infimum, OrderRel};
use spm::infinite::{chi, compare_infinite, inf_infinite, shot_vector, sup_infinite};
use spm::partition::Partition;

fn arb_partition() -> impl Strategy<Value = Partition> {
    proptest::collection::vec(1u32..=12, 0..=8).prop_map(|mut parts| {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition::new(parts).expect("sorted positives form a partition")
    })
}

fn evolve(n: u64, steps: usize, seed: u64) -> Partition {
    let mut s = Partition::column(n);
    let mut pick = seed;
    for _ in 0..steps {
        let succ = s.successors();
        if succ.is_empty() {
            break;
        }
        s = succ[(pick % succ.len() as u64) as usize].1.clone();
        pick = pick
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
    }
    s
}

/// A random reachable pile: evolve the single column a random number of
/// steps, picking transitions pseudo-randomly.
fn arb_reachable() -> impl Strategy<Value = Partition> {
    (0u64..=30, 0usize..=40, any::<u64>()).prop_map(|(n, steps, seed)| evolve(n, steps, seed))
}

/// Two reachable piles with the same grain count.
fn arb_reachable_pair() -> impl Strategy<Value = (Partition, Partition)> {
    (
        0u64..=30,
        0usize..=40,
        any::<u64>(),
        0usize..=40,
        any::<u64>(),
    )
        .prop_map(|(n, s1, x1, s2, x2)| (evolve(n, s1, x1), evolve(n, s2, x2)))
}

proptest! {
    #[test]
    fn falls_conserve_grains_and_raise_rank(s in arb_partition()) {
        for (i, t) in s.successors() {
            prop_assert_eq!(t.grains(), s.grains());
            prop_assert_eq!(t.rank(), s.rank() + 1);
            prop_assert!(s.height_diff(i).unwrap() >= 2);
        }
    }

    #[test]
    fn membership_is_closed_under_the_rule(s in arb_reachable()) {
        prop_assert!(s.is_spm());
        for (_, t) in s.successors() {
            prop_assert!(t.is_spm());
        }
    }

    #[test]
    fn stairs_agree_with_classification(s in arb_partition()) {
        let e = s.stair_length();
        for i in 1..=s.len() {
            let all_steps = (1..=i).all(|j| s.height_diff(j).unwrap() == 1);
            prop_assert_eq!(e >= i, all_steps);
        }
    }

    #[test]
    fn comparison_is_consistent_with_the_meet((a, b) in arb_reachable_pair()) {
        let m = infimum(&a, &b).unwrap();
        prop_assert!(matches!(
            compare(&a, &m).unwrap(),
            OrderRel::Greater | OrderRel::Equal
        ));
        prop_assert!(matches!(
            compare(&b, &m).unwrap(),
            OrderRel::Greater | OrderRel::Equal
        ));
        prop_assert_eq!(infimum(&b, &a).unwrap(), m.clone());
        prop_assert_eq!(infimum(&a, &a).unwrap(), a.clone());
        if compare(&a, &b).unwrap() == OrderRel::Greater {
            prop_assert_eq!(m, b.clone());
        }
    }

    #[test]
    fn shot_vectors_round_trip(s in arb_reachable()) {
        let state = chi(&s).unwrap();
        let decoded = shot_vector(&state).to_tail();
        prop_assert_eq!(decoded.as_ref(), Some(state.tail()));
    }

    #[test]
    fn infinite_meets_and_joins_bound_their_arguments(
        a in arb_reachable(),
        b in arb_reachable(),
    ) {
        let (sa, sb) = (chi(&a).unwrap(), chi(&b).unwrap());
        let meet = inf_infinite(&sa, &sb);
        let join = sup_infinite(&sa, &sb);
        for x in [&sa, &sb] {
            prop_assert!(matches!(
                compare_infinite(x, &meet),
                OrderRel::Greater | OrderRel::Equal
            ));
            prop_assert!(matches!(
                compare_infinite(&join, x),
                OrderRel::Greater | OrderRel::Equal
            ));
        }
        prop_assert_eq!(inf_infinite(&sb, &sa), meet);
        prop_assert_eq!(sup_infinite(&sb, &sa), join);
    }

    #[test]
    fn fall_and_grain_addition_commute(s in arb_partition()) {
        // A grain added on column i after a fall from i lands the pile on
        // the same state as adding the grain on column i+1 directly.
        for (i, t) in s.successors() {
            prop_assert_eq!(t.add_grain(i).unwrap(), s.add_grain(i + 1).unwrap());
        }
    }
}
