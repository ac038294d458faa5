mod common;

use proptest::prelude::*;

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn queue_pushes_commute_across_channels(q in queue(), a in message(), b in message()) {
        queue_commutation(&q, &a, &b)?;
    }

    #[test]
    fn bisimilarity_is_an_equivalence(seed in any::<u64>()) {
        bisim_laws(seed)?;
    }

    #[test]
    fn satisfaction_survives_other_players(seed in any::<u64>()) {
        satisfaction_preserved(seed)?;
    }

    #[test]
    fn exploration_is_deterministic(seed in any::<u64>()) {
        deterministic_exploration(seed)?;
    }
}

proptest! {
    #[test]
    fn same_channel_order_is_kept(q in queue(), a in message(), t in prop::sample::select(vec!["l", "m", "n"])) {
        let b = mixsess::Message::new(a.sender.clone(), t, a.receiver.clone());
        let ab = pushed(&q, &[&a, &b]);
        prop_assert_eq!(ab == pushed(&q, &[&b, &a]), a.tag == b.tag);
    }
}
