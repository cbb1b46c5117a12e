//! Per-family descriptive statistics: letter distributions, top and unique
//! blocks, and life-cycle segment frequencies.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::Range;

use crate::encoding::{BehaviourSequence, Block, Letter};
use crate::error::{Error, Result};

/// Direction of a block's frequency between the first and last life-cycle
/// segment, thresholded at tau.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trend {
    Increasing,
    Decreasing,
    Stable,
}

/// Classify the first-to-last segment movement of a block frequency.
pub fn classify_trend(first_seg: f64, last_seg: f64, tau: f64) -> Trend {
    let delta = last_seg - first_seg;
    if delta > tau {
        Trend::Increasing
    } else if delta < -tau {
        Trend::Decreasing
    } else {
        Trend::Stable
    }
}

/// Total count of each encoded letter across all member sequences.
/// Gap letters are not counted.
pub fn letter_distribution(sequences: &[&BehaviourSequence]) -> Result<BTreeMap<Letter, u64>> {
    if sequences.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut counts: BTreeMap<Letter, u64> = BTreeMap::new();
    for seq in sequences {
        for block in &seq.blocks {
            if block.is_gap() {
                continue;
            }
            for letter in block.letters() {
                *counts.entry(letter).or_insert(0) += 1;
            }
        }
    }
    Ok(counts)
}

/// Count each distinct non-gap block across the member sequences.
pub fn block_counts(sequences: &[&BehaviourSequence]) -> BTreeMap<Block, u64> {
    let mut counts: BTreeMap<Block, u64> = BTreeMap::new();
    for seq in sequences {
        for block in &seq.blocks {
            if !block.is_gap() {
                *counts.entry(*block).or_insert(0) += 1;
            }
        }
    }
    counts
}

/// The `n` most frequent blocks with their counts, ties broken by
/// lexicographic block string.
pub fn top_blocks(sequences: &[&BehaviourSequence], n: usize) -> Result<Vec<(Block, u64)>> {
    if sequences.is_empty() {
        return Err(Error::EmptyFamily);
    }
    Ok(rank_blocks(&block_counts(sequences), n))
}

fn rank_blocks(counts: &BTreeMap<Block, u64>, n: usize) -> Vec<(Block, u64)> {
    let mut ranked: Vec<(Block, u64)> = counts.iter().map(|(b, c)| (*b, *c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(n);
    ranked
}

/// Blocks whose corpus-wide occurrences fall entirely inside one family,
/// reported per family sorted by in-family count descending (top `n`).
pub fn unique_blocks(
    family_counts: &BTreeMap<usize, BTreeMap<Block, u64>>,
    n: usize,
) -> Result<BTreeMap<usize, Vec<(Block, u64)>>> {
    if family_counts.len() < 2 {
        return Err(Error::TooFewAccounts { got: family_counts.len(), need: 2 });
    }
    let mut owner: BTreeMap<Block, Option<usize>> = BTreeMap::new();
    for (&family, counts) in family_counts {
        for block in counts.keys() {
            owner
                .entry(*block)
                .and_modify(|o| *o = None)
                .or_insert(Some(family));
        }
    }
    let mut out: BTreeMap<usize, Vec<(Block, u64)>> = BTreeMap::new();
    for &family in family_counts.keys() {
        let unique: BTreeMap<Block, u64> = family_counts[&family]
            .iter()
            .filter(|(block, _)| owner[block] == Some(family))
            .map(|(b, c)| (*b, *c))
            .collect();
        out.insert(family, rank_blocks(&unique, n));
    }
    Ok(out)
}

/// Block index ranges of the three life-cycle segments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentSplit {
    pub ranges: [Range<usize>; 3],
    /// Sequence had fewer than 3 blocks and was assigned wholly to the
    /// third segment.
    pub too_short: bool,
}

/// Split `block_count` blocks into three equal activity segments of sizes
/// (floor(m/3), floor(m/3), m - 2*floor(m/3)); remainder blocks go to the
/// third segment. Sequences with fewer than 3 blocks land entirely in the
/// third segment and are flagged.
pub fn segment_split(block_count: usize) -> SegmentSplit {
    if block_count < 3 {
        return SegmentSplit {
            ranges: [0..0, 0..0, 0..block_count],
            too_short: true,
        };
    }
    let third = block_count / 3;
    SegmentSplit {
        ranges: [0..third, third..2 * third, 2 * third..block_count],
        too_short: false,
    }
}

/// Normalised per-segment block frequencies for a family.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentFrequencies {
    /// Per block: frequency in segments 1..3.
    pub freqs: BTreeMap<Block, [f64; 3]>,
    /// Total blocks per segment across the family (the denominators).
    pub segment_totals: [u64; 3],
    /// Number of member sequences shorter than 3 blocks.
    pub short_sequences: u32,
    /// Number of segments with zero blocks family-wide (frequency
    /// defined as 0 there).
    pub empty_segments: u32,
}

/// Compute Freq(block, segment) = family-wide count of the block in that
/// segment divided by the family-wide total blocks in that segment.
/// Frequencies cover every block of the family; callers typically report
/// the top-5 subset.
pub fn segment_frequencies(sequences: &[&BehaviourSequence]) -> Result<SegmentFrequencies> {
    if sequences.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut per_segment: [BTreeMap<Block, u64>; 3] =
        [BTreeMap::new(), BTreeMap::new(), BTreeMap::new()];
    let mut segment_totals = [0u64; 3];
    let mut short_sequences = 0u32;
    for seq in sequences {
        let split = segment_split(seq.blocks.len());
        if split.too_short {
            short_sequences += 1;
        }
        for (seg, range) in split.ranges.iter().enumerate() {
            for block in &seq.blocks[range.clone()] {
                if block.is_gap() {
                    continue;
                }
                *per_segment[seg].entry(*block).or_insert(0) += 1;
                segment_totals[seg] += 1;
            }
        }
    }

    let empty_segments = segment_totals.iter().filter(|&&t| t == 0).count() as u32;
    let mut freqs: BTreeMap<Block, [f64; 3]> = BTreeMap::new();
    for (seg, counts) in per_segment.iter().enumerate() {
        for (&block, &count) in counts {
            let entry = freqs.entry(block).or_insert([0.0; 3]);
            if segment_totals[seg] > 0 {
                entry[seg] = count as f64 / segment_totals[seg] as f64;
            }
        }
    }
    Ok(SegmentFrequencies {
        freqs,
        segment_totals,
        short_sequences,
        empty_segments,
    })
}

/// Full descriptive profile of one behavioural family.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyProfile {
    pub family_id: usize,
    pub letter_counts: BTreeMap<Letter, u64>,
    pub top_blocks: Vec<(Block, u64)>,
    pub unique_blocks: Vec<(Block, u64)>,
    pub segments: SegmentFrequencies,
    /// Trend of each top-5 block from segment 1 to segment 3.
    pub top5_trends: Vec<(Block, Trend)>,
}

/// Profile every family: letter distributions, top-10 and unique blocks,
/// segment frequencies, and top-5 block trends (threshold `tau`).
pub fn profile_families(
    families: &BTreeMap<usize, Vec<&BehaviourSequence>>,
    tau: f64,
) -> Result<Vec<FamilyProfile>> {
    let family_counts: BTreeMap<usize, BTreeMap<Block, u64>> = families
        .iter()
        .map(|(&id, seqs)| (id, block_counts(seqs)))
        .collect();
    let mut unique = if family_counts.len() >= 2 {
        unique_blocks(&family_counts, 10)?
    } else {
        BTreeMap::new()
    };

    let mut profiles = Vec::with_capacity(families.len());
    for (&family_id, seqs) in families {
        let letter_counts = letter_distribution(seqs)?;
        let top = top_blocks(seqs, 10)?;
        let segments = segment_frequencies(seqs)?;
        let top5_trends = top
            .iter()
            .take(5)
            .map(|(block, _)| {
                let f = segments.freqs.get(block).copied().unwrap_or([0.0; 3]);
                (*block, classify_trend(f[0], f[2], tau))
            })
            .collect();
        profiles.push(FamilyProfile {
            family_id,
            letter_counts,
            top_blocks: top,
            unique_blocks: unique.remove(&family_id).unwrap_or_default(),
            segments,
            top5_trends,
        });
    }
    Ok(profiles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::build_sequence;

    fn seq(id: &str, blocks: &[&str]) -> BehaviourSequence {
        let posts: Vec<(i64, Block)> = blocks
            .iter()
            .enumerate()
            .map(|(i, s)| (i as i64, Block::parse(s).unwrap()))
            .collect();
        build_sequence(id, &posts).unwrap()
    }

    fn b(s: &str) -> Block {
        Block::parse(s).unwrap()
    }

    #[test]
    fn letter_distribution_counts_each_position() {
        let s = seq("a", &["TXMKZDL"]);
        let counts = letter_distribution(&[&s]).unwrap();
        for symbol in b"TXMKZDL" {
            assert_eq!(counts[&Letter::new(*symbol).unwrap()], 1);
        }
        let doubled = letter_distribution(&[&s, &s]).unwrap();
        assert!(doubled.values().all(|&c| c == 2));
    }

    #[test]
    fn letter_distribution_total_is_seven_per_block() {
        let s1 = seq("a", &["TXMKZDL", "RUIJHQP", "TUMKZEL"]);
        let s2 = seq("b", &["TXMKZQL"]);
        let counts = letter_distribution(&[&s1, &s2]).unwrap();
        let total: u64 = counts.values().sum();
        assert_eq!(total, 7 * 4);
    }

    #[test]
    fn letter_distribution_order_invariant() {
        let s1 = seq("a", &["TXMKZDL", "RUIJHQP"]);
        let s2 = seq("b", &["TUMKZEL"]);
        assert_eq!(
            letter_distribution(&[&s1, &s2]).unwrap(),
            letter_distribution(&[&s2, &s1]).unwrap()
        );
    }

    #[test]
    fn top_blocks_ranking_and_ties() {
        let s = seq(
            "a",
            &["TXMKZDL", "TXMKZDL", "TXMKZDL", "TUMKZDL", "RUIJHQP"],
        );
        let top = top_blocks(&[&s], 10).unwrap();
        assert_eq!(top.len(), 3);
        assert_eq!(top[0], (b("TXMKZDL"), 3));
        // RUIJHQP and TUMKZDL tie at 1; lexicographic order wins.
        assert_eq!(top[1], (b("RUIJHQP"), 1));
        assert_eq!(top[2], (b("TUMKZDL"), 1));
    }

    #[test]
    fn unique_blocks_ownership() {
        let mut families: BTreeMap<usize, BTreeMap<Block, u64>> = BTreeMap::new();
        families.insert(1, [(b("TXMKZDL"), 5), (b("TUMKZDL"), 2)].into_iter().collect());
        families.insert(2, [(b("TXMKZDL"), 1), (b("TUMKZQL"), 9)].into_iter().collect());
        families.insert(3, [(b("TXMKZDL"), 4)].into_iter().collect());
        let unique = unique_blocks(&families, 10).unwrap();
        // Shared block is owned by nobody; family 3 has no unique blocks.
        assert_eq!(unique[&1], alloc::vec![(b("TUMKZDL"), 2)]);
        assert_eq!(unique[&2], alloc::vec![(b("TUMKZQL"), 9)]);
        assert!(unique[&3].is_empty());
    }

    #[test]
    fn segment_split_floor_arithmetic() {
        assert_eq!(segment_split(10).ranges, [0..3, 3..6, 6..10]);
        assert_eq!(segment_split(9).ranges, [0..3, 3..6, 6..9]);
        assert_eq!(segment_split(11).ranges, [0..3, 3..6, 6..11]);
        let short = segment_split(2);
        assert!(short.too_short);
        assert_eq!(short.ranges, [0..0, 0..0, 0..2]);
    }

    #[test]
    fn segment_frequencies_hand_fixture() {
        // acc1: [A,A,B,A,B,B] -> segs [A,A] [B,A] [B,B]
        // acc2: [A,B,C]       -> segs [A] [B] [C]
        let a = "TXMKZDL";
        let eb = "TUMKZDL";
        let c = "RUIJHQP";
        let s1 = seq("acc1", &[a, a, eb, a, eb, eb]);
        let s2 = seq("acc2", &[a, eb, c]);
        let sf = segment_frequencies(&[&s1, &s2]).unwrap();
        assert_eq!(sf.segment_totals, [3, 3, 3]);
        let freq = |name: &str| sf.freqs[&b(name)];
        assert!((freq(a)[0] - 1.0).abs() < 1e-12);
        assert!((freq(a)[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!((freq(eb)[1] - 2.0 / 3.0).abs() < 1e-12);
        assert!((freq(a)[2] - 0.0).abs() < 1e-12);
        assert!((freq(eb)[2] - 2.0 / 3.0).abs() < 1e-12);
        assert!((freq(c)[2] - 1.0 / 3.0).abs() < 1e-12);

        // Over the whole vocabulary each segment sums to 1.
        for segment in 0..3 {
            let total: f64 = sf.freqs.values().map(|f| f[segment]).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn segment_frequencies_absent_and_exclusive_blocks() {
        let a = "TXMKZDL";
        let o = "RUIJHQP";
        let s = seq("acc", &[a, a, a, a, a, o]);
        // segs: [A,A] [A,A] [A,O]
        let sf = segment_frequencies(&[&s]).unwrap();
        assert_eq!(sf.freqs[&b(o)][0], 0.0);
        assert_eq!(sf.freqs[&b(a)][0], 1.0);
        assert!((sf.freqs[&b(o)][2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn trends_threshold() {
        assert_eq!(classify_trend(0.10, 0.50, 0.01), Trend::Increasing);
        assert_eq!(classify_trend(0.50, 0.10, 0.01), Trend::Decreasing);
        assert_eq!(classify_trend(0.50, 0.505, 0.01), Trend::Stable);
    }

    #[test]
    fn profile_families_end_to_end() {
        let mut families: BTreeMap<usize, Vec<&BehaviourSequence>> = BTreeMap::new();
        let s1 = seq("a", &["TXMKZDL", "TXMKZDL", "TUMKZDL"]);
        let s2 = seq("b", &["TXMKZDL", "TXMKZQL", "TXMKZQL"]);
        let s3 = seq("c", &["RUIJHQP", "RUIJHQP", "RUIJHQP"]);
        families.insert(1, alloc::vec![&s1, &s2]);
        families.insert(2, alloc::vec![&s3]);
        let profiles = profile_families(&families, 0.01).unwrap();
        assert_eq!(profiles.len(), 2);
        let f1 = &profiles[0];
        assert_eq!(f1.family_id, 1);
        assert_eq!(f1.top_blocks[0].0, b("TXMKZDL"));
        // TXMKZDL is also used by nobody else; RUIJHQP is family 2 only.
        assert!(f1.unique_blocks.iter().any(|(blk, _)| *blk == b("TXMKZDL")));
        let f2 = &profiles[1];
        assert_eq!(f2.unique_blocks, alloc::vec![(b("RUIJHQP"), 3)]);
    }
}
