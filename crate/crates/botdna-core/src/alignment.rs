//! Within-family multiple sequence alignment at block granularity.
//!
//! Sequences are partitioned into four length groups at the empirical
//! quartiles, padded with trailing gap blocks to the group maximum, and
//! progressively aligned: a UPGMA guide tree is built from pairwise
//! block-level Needleman-Wunsch distances, then profiles are merged in
//! guide-tree order. Each block is one alignment symbol, so alignment can
//! only ever insert whole gap blocks and never splits a motif.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::clustering::average_linkage;
use crate::encoding::{BehaviourSequence, Block};
use crate::error::Result;
use crate::similarity::DissimilarityMatrix;

/// Block-level alignment scores. A pair scores `match_score` when the
/// blocks are identical, `partial` when at least 4 of 7 letters agree,
/// and `mismatch` otherwise; `gap` is the linear gap penalty, also used
/// whenever an existing pad gap block is involved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlignScoring {
    pub match_score: i64,
    pub partial: i64,
    pub mismatch: i64,
    pub gap: i64,
}

impl Default for AlignScoring {
    fn default() -> Self {
        AlignScoring {
            match_score: 2,
            partial: 1,
            mismatch: -1,
            gap: -2,
        }
    }
}

impl AlignScoring {
    /// Score one aligned block pair.
    pub fn score(&self, a: &Block, b: &Block) -> i64 {
        if a.is_gap() || b.is_gap() {
            self.gap
        } else if a == b {
            self.match_score
        } else if a.matching_letters(b) >= 4 {
            self.partial
        } else {
            self.mismatch
        }
    }
}

/// Sequences of one length quartile, prior to padding.
#[derive(Clone, Debug)]
pub struct LengthGroup {
    /// Quartile index in 1..=4.
    pub group_index: usize,
    pub members: Vec<BehaviourSequence>,
    /// Longest member length in blocks.
    pub max_len: usize,
}

/// One aligned (or padded) sequence; gap blocks mark absences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlignedSequence {
    pub account_id: String,
    pub blocks: Vec<Block>,
}

impl AlignedSequence {
    /// The original gap-free block sequence, in order.
    pub fn degap(&self) -> Vec<Block> {
        self.blocks.iter().copied().filter(|b| !b.is_gap()).collect()
    }
}

/// An aligned length group: all members share `aligned_len`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignedGroup {
    pub group_index: usize,
    pub members: Vec<AlignedSequence>,
    pub aligned_len: usize,
}

/// A family after per-group alignment. Positions are only comparable
/// within a group, so downstream pair analysis stays group-local.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignedFamily {
    pub family_id: usize,
    pub groups: Vec<AlignedGroup>,
}

impl AlignedFamily {
    pub fn n_sequences(&self) -> usize {
        self.groups.iter().map(|g| g.members.len()).sum()
    }

    /// Total aligned block positions over all member sequences, gap blocks
    /// included.
    pub fn total_aligned_blocks(&self) -> u64 {
        self.groups
            .iter()
            .map(|g| (g.members.len() * g.aligned_len) as u64)
            .sum()
    }
}

/// Empirical quantile by the inclusive linear-interpolation method: with
/// sorted values x_0..x_{n-1}, the p-quantile sits at rank h = (n-1) p and
/// interpolates between the neighbouring order statistics.
fn quantile_inclusive(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h as usize;
    let frac = h - lo as f64;
    if lo + 1 < n {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[n - 1]
    }
}

/// Partition a family into four length groups at the quartiles Q1, Q2, Q3
/// of block length: group 1 holds L < Q1, group 2 Q1 <= L < Q2, group 3
/// Q2 <= L < Q3, and group 4 L >= Q3. Empty groups are dropped. Families
/// with fewer than four sequences fall into a single group (flagged).
pub fn quartile_groups(family: &[BehaviourSequence]) -> (Vec<LengthGroup>, bool) {
    if family.is_empty() {
        return (Vec::new(), false);
    }
    if family.len() < 4 {
        let max_len = family.iter().map(|s| s.blocks.len()).max().unwrap_or(0);
        return (
            alloc::vec![LengthGroup {
                group_index: 4,
                members: family.to_vec(),
                max_len,
            }],
            true,
        );
    }

    let mut lengths: Vec<f64> = family.iter().map(|s| s.blocks.len() as f64).collect();
    lengths.sort_by(f64::total_cmp);
    let q1 = quantile_inclusive(&lengths, 0.25);
    let q2 = quantile_inclusive(&lengths, 0.50);
    let q3 = quantile_inclusive(&lengths, 0.75);

    let mut buckets: [Vec<BehaviourSequence>; 4] = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for seq in family {
        let len = seq.blocks.len() as f64;
        let bucket = if len < q1 {
            0
        } else if len < q2 {
            1
        } else if len < q3 {
            2
        } else {
            3
        };
        buckets[bucket].push(seq.clone());
    }

    let groups = buckets
        .into_iter()
        .enumerate()
        .filter(|(_, members)| !members.is_empty())
        .map(|(i, members)| {
            let max_len = members.iter().map(|s| s.blocks.len()).max().unwrap();
            LengthGroup {
                group_index: i + 1,
                members,
                max_len,
            }
        })
        .collect();
    (groups, false)
}

/// Pad every member with trailing gap blocks up to the group maximum.
pub fn pad_group(group: &LengthGroup) -> Vec<AlignedSequence> {
    group
        .members
        .iter()
        .map(|seq| {
            let mut blocks = seq.blocks.clone();
            blocks.resize(group.max_len, Block::GAP_BLOCK);
            AlignedSequence {
                account_id: seq.account_id.clone(),
                blocks,
            }
        })
        .collect()
}

/// Global pairwise alignment of two block sequences with linear gap
/// penalty. Traceback ties prefer diagonal, then up (gap in `b`), then
/// left (gap in `a`).
pub fn needleman_wunsch(
    a: &[Block],
    b: &[Block],
    scoring: &AlignScoring,
) -> (Vec<Block>, Vec<Block>) {
    let (cols_a, cols_b) = align_profiles(&[a.to_vec()], &[b.to_vec()], scoring);
    let pick = |seq: &[Block], cols: &[Option<usize>]| {
        cols.iter()
            .map(|c| c.map_or(Block::GAP_BLOCK, |i| seq[i]))
            .collect()
    };
    (pick(a, &cols_a), pick(b, &cols_b))
}

/// Optimal global alignment score of two block sequences.
pub fn needleman_wunsch_score(a: &[Block], b: &[Block], scoring: &AlignScoring) -> i64 {
    let n = b.len();
    let mut prev: Vec<i64> = (0..=n as i64).map(|j| j * scoring.gap).collect();
    let mut curr = alloc::vec![0i64; n + 1];
    for (i, block_a) in a.iter().enumerate() {
        curr[0] = (i as i64 + 1) * scoring.gap;
        for (j, block_b) in b.iter().enumerate() {
            let diag = prev[j] + scoring.score(block_a, block_b);
            let up = prev[j + 1] + scoring.gap;
            let left = curr[j] + scoring.gap;
            curr[j + 1] = diag.max(up).max(left);
        }
        core::mem::swap(&mut prev, &mut curr);
    }
    prev[n]
}

/// Profile-profile Needleman-Wunsch. Returns, per output column, the
/// source column of each profile (`None` marks an inserted gap). Column
/// pair scores are the sum of block-pair scores over all row pairs; the
/// gap penalty is scaled by the same row-pair count, which leaves optima
/// and tie structure identical to the average-score formulation.
fn align_profiles(
    prof_a: &[Vec<Block>],
    prof_b: &[Vec<Block>],
    scoring: &AlignScoring,
) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
    let m = prof_a[0].len();
    let n = prof_b[0].len();
    let pairs = (prof_a.len() * prof_b.len()) as i64;
    let gap = scoring.gap * pairs;

    let column_score = |i: usize, j: usize| -> i64 {
        let mut total = 0i64;
        for row_a in prof_a {
            for row_b in prof_b {
                total += scoring.score(&row_a[i], &row_b[j]);
            }
        }
        total
    };

    // 0 = diagonal, 1 = up (consume a), 2 = left (consume b).
    let mut score = alloc::vec![0i64; (m + 1) * (n + 1)];
    let mut trace = alloc::vec![0u8; (m + 1) * (n + 1)];
    let idx = |i: usize, j: usize| i * (n + 1) + j;
    for i in 1..=m {
        score[idx(i, 0)] = i as i64 * gap;
        trace[idx(i, 0)] = 1;
    }
    for j in 1..=n {
        score[idx(0, j)] = j as i64 * gap;
        trace[idx(0, j)] = 2;
    }
    for i in 1..=m {
        for j in 1..=n {
            let diag = score[idx(i - 1, j - 1)] + column_score(i - 1, j - 1);
            let up = score[idx(i - 1, j)] + gap;
            let left = score[idx(i, j - 1)] + gap;
            let (best, dir) = if diag >= up && diag >= left {
                (diag, 0)
            } else if up >= left {
                (up, 1)
            } else {
                (left, 2)
            };
            score[idx(i, j)] = best;
            trace[idx(i, j)] = dir;
        }
    }

    let mut cols_a: Vec<Option<usize>> = Vec::with_capacity(m + n);
    let mut cols_b: Vec<Option<usize>> = Vec::with_capacity(m + n);
    let (mut i, mut j) = (m, n);
    while i > 0 || j > 0 {
        match trace[idx(i, j)] {
            0 => {
                cols_a.push(Some(i - 1));
                cols_b.push(Some(j - 1));
                i -= 1;
                j -= 1;
            }
            1 => {
                cols_a.push(Some(i - 1));
                cols_b.push(None);
                i -= 1;
            }
            _ => {
                cols_a.push(None);
                cols_b.push(Some(j - 1));
                j -= 1;
            }
        }
    }
    cols_a.reverse();
    cols_b.reverse();
    (cols_a, cols_b)
}

/// A profile row tagged with the index of the sequence it came from.
type TaggedRow = (usize, Vec<Block>);

fn apply_columns(rows: &[TaggedRow], cols: &[Option<usize>]) -> Vec<TaggedRow> {
    rows.iter()
        .map(|(origin, row)| {
            let blocks = cols
                .iter()
                .map(|c| c.map_or(Block::GAP_BLOCK, |i| row[i]))
                .collect();
            (*origin, blocks)
        })
        .collect()
}

/// Progressive multiple alignment of one padded group. The guide tree is
/// average linkage over pairwise Needleman-Wunsch distances; profiles are
/// merged following its merge order. Member order of the output matches
/// the input.
pub fn progressive_msa(
    group_index: usize,
    padded: &[AlignedSequence],
    scoring: &AlignScoring,
) -> Result<AlignedGroup> {
    let n = padded.len();
    if n <= 1 {
        let aligned_len = padded.first().map_or(0, |s| s.blocks.len());
        return Ok(AlignedGroup {
            group_index,
            members: padded.to_vec(),
            aligned_len,
        });
    }

    // Guide-tree distance: deficit of the pair score from the all-match
    // ceiling; non-negative, zero only for identical sequences.
    let mut dist = alloc::vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let score = needleman_wunsch_score(&padded[i].blocks, &padded[j].blocks, scoring);
            let len = padded[i].blocks.len().max(padded[j].blocks.len()) as i64;
            let d = (scoring.match_score * len - score) as f64;
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    let ids = (0..n).map(|i| i.to_string()).collect();
    let guide = average_linkage(&DissimilarityMatrix::from_parts(ids, dist)?)?;

    // node -> profile rows tagged with their input index.
    let mut profiles: Vec<Option<Vec<TaggedRow>>> = padded
        .iter()
        .enumerate()
        .map(|(i, s)| Some(alloc::vec![(i, s.blocks.clone())]))
        .collect();
    for step in guide.steps() {
        let left = profiles[step.left].take().expect("left profile live");
        let right = profiles[step.right].take().expect("right profile live");
        let rows_a: Vec<Vec<Block>> = left.iter().map(|(_, r)| r.clone()).collect();
        let rows_b: Vec<Vec<Block>> = right.iter().map(|(_, r)| r.clone()).collect();
        let (cols_a, cols_b) = align_profiles(&rows_a, &rows_b, scoring);
        let mut merged = apply_columns(&left, &cols_a);
        merged.extend(apply_columns(&right, &cols_b));
        profiles.push(Some(merged));
    }

    let mut rows = profiles
        .into_iter()
        .next_back()
        .flatten()
        .expect("root profile");
    rows.sort_by_key(|(origin, _)| *origin);
    let aligned_len = rows[0].1.len();
    let members = rows
        .into_iter()
        .map(|(origin, blocks)| AlignedSequence {
            account_id: padded[origin].account_id.clone(),
            blocks,
        })
        .collect();
    Ok(AlignedGroup {
        group_index,
        members,
        aligned_len,
    })
}

/// Merge aligned groups into the family view, keeping group provenance.
pub fn merge_groups(family_id: usize, groups: Vec<AlignedGroup>) -> AlignedFamily {
    AlignedFamily {
        family_id,
        groups: groups.into_iter().filter(|g| !g.members.is_empty()).collect(),
    }
}

/// Quartile-group, pad, and progressively align one family. Returns the
/// aligned family and whether the small-family fallback (single group)
/// was taken.
pub fn align_family(
    family_id: usize,
    sequences: &[BehaviourSequence],
    scoring: &AlignScoring,
) -> Result<(AlignedFamily, bool)> {
    let (groups, too_small) = quartile_groups(sequences);
    let mut aligned = Vec::with_capacity(groups.len());
    for group in &groups {
        let padded = pad_group(group);
        aligned.push(progressive_msa(group.group_index, &padded, scoring)?);
    }
    Ok((merge_groups(family_id, aligned), too_small))
}

/// Per-position consensus of an aligned group: the most frequent non-gap
/// block (ties to the lexicographically smallest) and its fraction among
/// non-gap entries. All-gap columns yield the gap block at conservation 0.
pub fn consensus(group: &AlignedGroup) -> Vec<(Block, f64)> {
    let mut out = Vec::with_capacity(group.aligned_len);
    for pos in 0..group.aligned_len {
        let mut counts: alloc::collections::BTreeMap<Block, usize> =
            alloc::collections::BTreeMap::new();
        let mut non_gap = 0usize;
        for member in &group.members {
            let block = member.blocks[pos];
            if !block.is_gap() {
                *counts.entry(block).or_insert(0) += 1;
                non_gap += 1;
            }
        }
        let modal = counts
            .iter()
            .fold(None::<(Block, usize)>, |best, (&block, &count)| match best {
                Some((_, best_count)) if best_count >= count => best,
                _ => Some((block, count)),
            });
        match modal {
            Some((block, count)) => out.push((block, count as f64 / non_gap as f64)),
            None => out.push((Block::GAP_BLOCK, 0.0)),
        }
    }
    out
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

    fn seq_of_len(id: &str, len: usize) -> BehaviourSequence {
        let blocks: Vec<&str> = (0..len).map(|_| "TXMKZDL").collect();
        seq(id, &blocks)
    }

    fn b(s: &str) -> Block {
        Block::parse(s).unwrap()
    }

    #[test]
    fn quartiles_strict_split() {
        let family: Vec<BehaviourSequence> = [10, 20, 30, 40]
            .iter()
            .map(|&len| seq_of_len(&alloc::format!("len{}", len), len))
            .collect();
        let (groups, warn) = quartile_groups(&family);
        assert!(!warn);
        assert_eq!(groups.len(), 4);
        for (i, group) in groups.iter().enumerate() {
            assert_eq!(group.group_index, i + 1);
            assert_eq!(group.members.len(), 1);
            assert_eq!(group.members[0].blocks.len(), 10 * (i + 1));
        }
    }

    #[test]
    fn quartiles_all_equal_lengths_use_group_four() {
        let family: Vec<BehaviourSequence> =
            (0..5).map(|i| seq_of_len(&alloc::format!("s{}", i), 7)).collect();
        let (groups, warn) = quartile_groups(&family);
        assert!(!warn);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].group_index, 4);
        assert_eq!(groups[0].members.len(), 5);
    }

    #[test]
    fn quartiles_small_family_single_group() {
        let family = alloc::vec![seq_of_len("a", 3), seq_of_len("b", 9)];
        let (groups, warn) = quartile_groups(&family);
        assert!(warn);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].members.len(), 2);
    }

    #[test]
    fn quartile_sizes_match_sort_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let lengths: Vec<usize> = (0..100).map(|_| rng.gen_range(1..=80)).collect();
        let family: Vec<BehaviourSequence> = lengths
            .iter()
            .enumerate()
            .map(|(i, &len)| seq_of_len(&alloc::format!("s{}", i), len))
            .collect();
        let (groups, _) = quartile_groups(&family);
        let total: usize = groups.iter().map(|g| g.members.len()).sum();
        assert_eq!(total, 100);

        // Independent check: count lengths against interpolated quartiles.
        let mut sorted: Vec<f64> = lengths.iter().map(|&l| l as f64).collect();
        sorted.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = 99.0 * p;
            let lo = h as usize;
            sorted[lo] + (h - lo as f64) * (sorted[(lo + 1).min(99)] - sorted[lo])
        };
        let (q1, q2, q3) = (q(0.25), q(0.5), q(0.75));
        let expect = [
            lengths.iter().filter(|&&l| (l as f64) < q1).count(),
            lengths.iter().filter(|&&l| (l as f64) >= q1 && (l as f64) < q2).count(),
            lengths.iter().filter(|&&l| (l as f64) >= q2 && (l as f64) < q3).count(),
            lengths.iter().filter(|&&l| (l as f64) >= q3).count(),
        ];
        for group in &groups {
            assert_eq!(group.members.len(), expect[group.group_index - 1]);
        }
    }

    #[test]
    fn padding_extends_with_trailing_gaps() {
        let group = LengthGroup {
            group_index: 1,
            members: alloc::vec![seq_of_len("a", 5), seq_of_len("b", 8)],
            max_len: 8,
        };
        let padded = pad_group(&group);
        assert!(padded.iter().all(|s| s.blocks.len() == 8));
        assert_eq!(padded[0].blocks[5..], [Block::GAP_BLOCK; 3]);
        assert_eq!(padded[1].blocks, seq_of_len("b", 8).blocks);
    }

    #[test]
    fn nw_inserts_gap_opposite_unmatched_block() {
        // A,B,C vs A,C with far-apart blocks: the lone optimum aligns
        // A-A, B-gap, C-C.
        let a = [b("TXMKZDL"), b("RUIJHQP"), b("YXVKZEN")];
        let short = [b("TXMKZDL"), b("YXVKZEN")];
        let scoring = AlignScoring::default();
        let (row_a, row_b) = needleman_wunsch(&a, &short, &scoring);
        assert_eq!(row_a, a.to_vec());
        assert_eq!(row_b, alloc::vec![b("TXMKZDL"), Block::GAP_BLOCK, b("YXVKZEN")]);
        assert_eq!(needleman_wunsch_score(&a, &short, &scoring), 2);
    }

    #[test]
    fn identical_sequences_align_without_new_gaps() {
        let s = seq("a", &["TXMKZDL", "TUMKZDL", "RUIJHQP"]);
        let padded = alloc::vec![
            AlignedSequence { account_id: "a".into(), blocks: s.blocks.clone() },
            AlignedSequence { account_id: "b".into(), blocks: s.blocks.clone() },
        ];
        let aligned = progressive_msa(4, &padded, &AlignScoring::default()).unwrap();
        assert_eq!(aligned.aligned_len, 3);
        assert_eq!(aligned.members[0].blocks, s.blocks);
        assert_eq!(aligned.members[1].blocks, s.blocks);
    }

    #[test]
    fn single_sequence_unchanged() {
        let s = seq("a", &["TXMKZDL", "TUMKZDL"]);
        let padded = alloc::vec![AlignedSequence {
            account_id: "a".into(),
            blocks: s.blocks.clone(),
        }];
        let aligned = progressive_msa(2, &padded, &AlignScoring::default()).unwrap();
        assert_eq!(aligned.members[0].blocks, s.blocks);
    }

    #[test]
    fn two_sequence_msa_equals_pairwise_nw() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let scoring = AlignScoring::default();
        for _ in 0..20 {
            let len_a = rng.gen_range(1..=15);
            let len_b = rng.gen_range(1..=15);
            let random_blocks = |rng: &mut rand_chacha::ChaCha8Rng, len: usize| -> Vec<Block> {
                (0..len)
                    .map(|_| Block::from_index(rng.gen_range(0..648)).unwrap())
                    .collect()
            };
            let blocks_a = random_blocks(&mut rng, len_a);
            let blocks_b = random_blocks(&mut rng, len_b);
            let padded = alloc::vec![
                AlignedSequence { account_id: "a".into(), blocks: blocks_a.clone() },
                AlignedSequence { account_id: "b".into(), blocks: blocks_b.clone() },
            ];
            let msa = progressive_msa(1, &padded, &scoring).unwrap();
            let (nw_a, nw_b) = needleman_wunsch(&blocks_a, &blocks_b, &scoring);
            assert_eq!(msa.members[0].blocks, nw_a);
            assert_eq!(msa.members[1].blocks, nw_b);
        }
    }

    #[test]
    fn alignment_round_trips_original_order() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        // Small pool so sequences share blocks and align non-trivially.
        let pool: Vec<Block> = (0..6).map(|i| Block::from_index(i * 100).unwrap()).collect();
        for _ in 0..10 {
            let n = rng.gen_range(2..=6);
            let family: Vec<BehaviourSequence> = (0..n)
                .map(|i| {
                    let len = rng.gen_range(1..=12);
                    let blocks: Vec<(i64, Block)> = (0..len)
                        .map(|t| (t as i64, pool[rng.gen_range(0..pool.len())]))
                        .collect();
                    build_sequence(&alloc::format!("s{}", i), &blocks).unwrap()
                })
                .collect();
            let (aligned, _) = align_family(1, &family, &AlignScoring::default()).unwrap();
            for group in &aligned.groups {
                for member in &group.members {
                    assert_eq!(member.blocks.len(), group.aligned_len);
                    let original = family
                        .iter()
                        .find(|s| s.account_id == member.account_id)
                        .unwrap();
                    assert_eq!(member.degap(), original.blocks);
                }
            }
        }
    }

    #[test]
    fn merge_groups_counts_and_skips_empty() {
        let g1 = AlignedGroup {
            group_index: 1,
            members: alloc::vec![AlignedSequence { account_id: "a".into(), blocks: alloc::vec![] }],
            aligned_len: 0,
        };
        let empty = AlignedGroup {
            group_index: 2,
            members: alloc::vec![],
            aligned_len: 0,
        };
        let family = merge_groups(7, alloc::vec![g1, empty]);
        assert_eq!(family.family_id, 7);
        assert_eq!(family.groups.len(), 1);
        assert_eq!(family.n_sequences(), 1);
    }

    #[test]
    fn consensus_columns() {
        let x = b("TXMKZDL");
        let y = b("TUMKZDL");
        let group = AlignedGroup {
            group_index: 1,
            members: alloc::vec![
                AlignedSequence { account_id: "a".into(), blocks: alloc::vec![x, x, Block::GAP_BLOCK] },
                AlignedSequence { account_id: "b".into(), blocks: alloc::vec![x, y, Block::GAP_BLOCK] },
                AlignedSequence { account_id: "c".into(), blocks: alloc::vec![x, Block::GAP_BLOCK, Block::GAP_BLOCK] },
            ],
            aligned_len: 3,
        };
        let cons = consensus(&group);
        assert_eq!(cons[0], (x, 1.0));
        // Tie between X and Y among two non-gap entries: smaller string wins.
        assert_eq!(cons[1], (x.min(y), 0.5));
        assert_eq!(cons[2], (Block::GAP_BLOCK, 0.0));
    }
}
