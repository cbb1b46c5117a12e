//! Property tests for the core invariants.

use botdna_core::alignment::{align_family, AlignScoring};
use botdna_core::encoding::{build_sequence, BehaviourSequence, Block, POSITION_ALPHABETS, VOCAB_SIZE};
use botdna_core::evolution::{mutation_key_set, scan_mutations};
use botdna_core::mutation::MutationType;
use botdna_core::similarity::{cosine, vectorize};
use proptest::prelude::*;

fn arb_block() -> impl Strategy<Value = Block> {
    (0..VOCAB_SIZE).prop_map(|i| Block::from_index(i).unwrap())
}

fn arb_sequence(max_len: usize) -> impl Strategy<Value = BehaviourSequence> {
    proptest::collection::vec((0i64..1_000, arb_block()), 1..=max_len)
        .prop_map(|posts| build_sequence("acc", &posts).unwrap())
}

/// Sequences drawn from a small shared pool, so alignment and scanning
/// see realistic repetition.
fn arb_pooled_sequence(max_len: usize) -> impl Strategy<Value = BehaviourSequence> {
    let pool: Vec<Block> = (0..8).map(|i| Block::from_index(i * 77).unwrap()).collect();
    proptest::collection::vec((0i64..1_000, 0..pool.len()), 1..=max_len).prop_map(move |posts| {
        let posts: Vec<(i64, Block)> = posts.into_iter().map(|(t, i)| (t, pool[i])).collect();
        build_sequence("acc", &posts).unwrap()
    })
}

proptest! {
    #[test]
    fn decode_encode_round_trip(block in arb_block()) {
        let features = block.decode().unwrap();
        prop_assert_eq!(features.encode(), block);
    }

    #[test]
    fn sequences_have_letter_length_divisible_by_seven(seq in arb_sequence(60)) {
        prop_assert_eq!(seq.letter_len() % 7, 0);
        prop_assert_eq!(seq.letter_len(), 7 * seq.block_len());
        // Position-wise alphabet membership.
        for block in &seq.blocks {
            for (pos, letter) in block.symbols().iter().enumerate() {
                prop_assert!(POSITION_ALPHABETS[pos].contains(letter));
            }
        }
        // Timestamps are non-decreasing after building.
        let ts = seq.timestamps.as_ref().unwrap();
        prop_assert!(ts.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn vector_total_matches_length(seq in arb_sequence(80)) {
        let vector = vectorize(&seq).unwrap();
        prop_assert_eq!(vector.total(), seq.block_len() as u64);
    }

    #[test]
    fn cosine_ignores_block_order(
        seq in arb_pooled_sequence(40),
        other in arb_pooled_sequence(40),
        seed in 0u64..1_000,
    ) {
        // Reversing timestamps permutes the block order but not counts.
        let mut shuffled_posts: Vec<(i64, Block)> = seq
            .blocks
            .iter()
            .enumerate()
            .map(|(i, b)| ((seed as i64 + i as i64 * 7919) % 1000, *b))
            .collect();
        shuffled_posts.reverse();
        let shuffled = build_sequence(&seq.account_id, &shuffled_posts).unwrap();

        let v1 = vectorize(&seq).unwrap();
        let v2 = vectorize(&shuffled).unwrap();
        prop_assert_eq!(&v1.counts, &v2.counts);

        let reference = vectorize(&other).unwrap();
        let a = cosine(&v1, &reference).unwrap();
        let b = cosine(&v2, &reference).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn alignment_degap_recovers_input(
        family in proptest::collection::vec(arb_pooled_sequence(20), 1..=8)
    ) {
        let family: Vec<BehaviourSequence> = family
            .into_iter()
            .enumerate()
            .map(|(i, mut seq)| {
                seq.account_id = format!("acc{}", i);
                seq
            })
            .collect();
        let (aligned, _) = align_family(1, &family, &AlignScoring::default()).unwrap();
        prop_assert_eq!(aligned.n_sequences(), family.len());
        for group in &aligned.groups {
            for member in &group.members {
                prop_assert_eq!(member.blocks.len(), group.aligned_len);
                let original = family
                    .iter()
                    .find(|s| s.account_id == member.account_id)
                    .unwrap();
                prop_assert_eq!(member.degap(), original.blocks.clone());
            }
        }
    }

    #[test]
    fn scan_accounts_for_every_position(seq in arb_pooled_sequence(50)) {
        let events = scan_mutations(&seq).unwrap();
        let m = seq.block_len();
        let distinct: std::collections::BTreeSet<Block> = seq.blocks.iter().copied().collect();

        // One Insertion-or-Substitution per distinct block, Identity for
        // every repeat position.
        let firsts = events
            .iter()
            .filter(|e| {
                matches!(e.mutation_type, MutationType::Insertion | MutationType::Substitution)
            })
            .count();
        let identities = events
            .iter()
            .filter(|e| e.mutation_type == MutationType::Identity)
            .count();
        prop_assert_eq!(firsts, distinct.len());
        prop_assert_eq!(identities, m - distinct.len());

        // Deletions: exactly the distinct blocks that vanish before the end.
        let deletions = events
            .iter()
            .filter(|e| e.mutation_type == MutationType::Deletion)
            .count();
        let vanished = distinct
            .iter()
            .filter(|b| seq.blocks.iter().rposition(|x| x == *b).unwrap() < m - 1)
            .count();
        prop_assert_eq!(deletions, vanished);

        // Scan positions stay within bounds; the key set drops Identity.
        for event in &events {
            prop_assert!(event.position <= m);
        }
        let keys = mutation_key_set(&events);
        prop_assert!(keys.len() <= distinct.len() * 2);
    }
}
