//! Classification of aligned block differences into the six-event
//! mutation taxonomy, plus family-level mutation statistics.
//!
//! Every ordered pair of aligned sequences inside a length group is
//! compared position by position. The decision tree runs in a fixed
//! order, so each (pair, position) cell yields exactly one outcome:
//! Match, one of the six mutation types, or Unclassified (both blocks
//! present but failing every rule; excluded from statistics).

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::alignment::AlignedFamily;
use crate::encoding::{Block, Letter};
use crate::error::{Error, Result};

/// The mutation taxonomy. Insertion, Deletion, Substitution, and
/// Alteration are the primary types; Empty and Identity are bookkeeping
/// categories.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MutationType {
    Empty,
    Insertion,
    Deletion,
    Substitution,
    Alteration,
    Identity,
}

impl MutationType {
    pub const PRIMARY: [MutationType; 4] = [
        MutationType::Insertion,
        MutationType::Deletion,
        MutationType::Substitution,
        MutationType::Alteration,
    ];

    pub fn is_primary(self) -> bool {
        MutationType::PRIMARY.contains(&self)
    }

    pub fn name(self) -> &'static str {
        match self {
            MutationType::Empty => "empty",
            MutationType::Insertion => "insertion",
            MutationType::Deletion => "deletion",
            MutationType::Substitution => "substitution",
            MutationType::Alteration => "alteration",
            MutationType::Identity => "identity",
        }
    }
}

/// Outcome of classifying one (pair, position) cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Equal non-gap blocks; not a mutation.
    Match,
    /// Both blocks present but no rule applies; excluded from statistics.
    Unclassified,
    Event {
        mutation_type: MutationType,
        /// The replaced and replacing letter, set only for substitutions.
        sub_letter_pair: Option<(Letter, Letter)>,
    },
}

/// One detected mutation with full provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MutationEvent {
    pub family_id: usize,
    pub group_index: usize,
    pub source_id: String,
    pub target_id: String,
    pub position: usize,
    pub mutation_type: MutationType,
    pub block_a: Block,
    pub block_b: Block,
    pub sub_letter_pair: Option<(Letter, Letter)>,
}

impl MutationEvent {
    /// The block a statistic is attributed to: the non-gap block for
    /// insertions and deletions, the source-side block otherwise. Empty
    /// events carry no block.
    pub fn key_block(&self) -> Option<Block> {
        match self.mutation_type {
            MutationType::Empty => None,
            MutationType::Insertion | MutationType::Deletion => {
                if self.block_a.is_gap() {
                    Some(self.block_b)
                } else {
                    Some(self.block_a)
                }
            }
            _ => Some(self.block_a),
        }
    }
}

fn occurs_before(haystack: &[Block], needle: &Block, end: usize) -> bool {
    haystack[..end].iter().any(|b| b == needle)
}

fn occurs_elsewhere(haystack: &[Block], needle: &Block, skip: usize) -> bool {
    haystack
        .iter()
        .enumerate()
        .any(|(pos, b)| pos != skip && b == needle)
}

/// Classify the aligned blocks of two same-group sequences at position `k`.
///
/// Rules, evaluated in order:
/// 1. both gaps -> Empty;
/// 2. equal blocks -> Match;
/// 3. one gap: Deletion if the present block occurred earlier in the
///    gapped sequence, else Insertion;
/// 4. letter Hamming distance 1 -> Substitution;
/// 5. at least 4 of 7 letters equal and either block occurred earlier in
///    either sequence -> Alteration;
/// 6. source block occurs at another position of the target sequence (or
///    vice versa) -> Identity;
/// 7. otherwise Unclassified.
pub fn classify_pair_position(seq_a: &[Block], seq_b: &[Block], k: usize) -> Result<Outcome> {
    if seq_a.len() != seq_b.len() || k >= seq_a.len() {
        return Err(Error::GroupMismatch);
    }
    let block_a = seq_a[k];
    let block_b = seq_b[k];

    if block_a.is_gap() && block_b.is_gap() {
        return Ok(Outcome::Event {
            mutation_type: MutationType::Empty,
            sub_letter_pair: None,
        });
    }
    if block_a == block_b {
        return Ok(Outcome::Match);
    }
    if block_a.is_gap() || block_b.is_gap() {
        let (present, gapped) = if block_a.is_gap() {
            (&block_b, seq_a)
        } else {
            (&block_a, seq_b)
        };
        let mutation_type = if occurs_before(gapped, present, k) {
            MutationType::Deletion
        } else {
            MutationType::Insertion
        };
        return Ok(Outcome::Event {
            mutation_type,
            sub_letter_pair: None,
        });
    }
    if block_a.hamming(&block_b) == 1 {
        let position = (0..crate::encoding::BLOCK_LEN)
            .find(|&p| block_a.letter(p) != block_b.letter(p))
            .expect("hamming distance 1 has a differing position");
        return Ok(Outcome::Event {
            mutation_type: MutationType::Substitution,
            sub_letter_pair: Some((block_a.letter(position), block_b.letter(position))),
        });
    }
    if block_a.matching_letters(&block_b) >= 4 {
        let seen_earlier = occurs_before(seq_a, &block_a, k)
            || occurs_before(seq_a, &block_b, k)
            || occurs_before(seq_b, &block_a, k)
            || occurs_before(seq_b, &block_b, k);
        if seen_earlier {
            return Ok(Outcome::Event {
                mutation_type: MutationType::Alteration,
                sub_letter_pair: None,
            });
        }
    }
    if occurs_elsewhere(seq_b, &block_a, k) || occurs_elsewhere(seq_a, &block_b, k) {
        return Ok(Outcome::Event {
            mutation_type: MutationType::Identity,
            sub_letter_pair: None,
        });
    }
    Ok(Outcome::Unclassified)
}

/// All mutation events of a family plus cell bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyMutations {
    pub family_id: usize,
    pub events: Vec<MutationEvent>,
    pub match_cells: u64,
    pub unclassified_cells: u64,
}

/// Detect mutations over every ordered pair of aligned sequences within
/// each length group, at every aligned position. Match cells are counted
/// but not recorded; events come out ordered by (group, pair, position).
pub fn detect_family_mutations(family: &AlignedFamily) -> FamilyMutations {
    let mut events = Vec::new();
    let mut match_cells = 0u64;
    let mut unclassified_cells = 0u64;
    for group in &family.groups {
        let n = group.members.len();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let seq_a = &group.members[i].blocks;
                let seq_b = &group.members[j].blocks;
                for k in 0..group.aligned_len {
                    match classify_pair_position(seq_a, seq_b, k)
                        .expect("group members share aligned length")
                    {
                        Outcome::Match => match_cells += 1,
                        Outcome::Unclassified => unclassified_cells += 1,
                        Outcome::Event {
                            mutation_type,
                            sub_letter_pair,
                        } => events.push(MutationEvent {
                            family_id: family.family_id,
                            group_index: group.group_index,
                            source_id: group.members[i].account_id.clone(),
                            target_id: group.members[j].account_id.clone(),
                            position: k,
                            mutation_type,
                            block_a: seq_a[k],
                            block_b: seq_b[k],
                            sub_letter_pair,
                        }),
                    }
                }
            }
        }
    }
    FamilyMutations {
        family_id: family.family_id,
        events,
        match_cells,
        unclassified_cells,
    }
}

/// Mutation-type proportions in the two reported views.
#[derive(Clone, Debug, PartialEq)]
pub struct TypeFrequencies {
    /// Over the four primary types only.
    pub primary: BTreeMap<MutationType, f64>,
    /// Over the primary types plus Identity.
    pub with_identity: BTreeMap<MutationType, f64>,
    pub primary_total: u64,
    pub identity_total: u64,
}

/// Count(type) / TotalMutations per family, reported over primary types
/// and again with Identity included. Empty and unclassified cells never
/// count.
pub fn mutation_type_frequencies(events: &[MutationEvent]) -> Result<TypeFrequencies> {
    let mut counts: BTreeMap<MutationType, u64> = BTreeMap::new();
    for event in events {
        if event.mutation_type.is_primary() || event.mutation_type == MutationType::Identity {
            *counts.entry(event.mutation_type).or_insert(0) += 1;
        }
    }
    let primary_total: u64 = MutationType::PRIMARY
        .iter()
        .map(|t| counts.get(t).copied().unwrap_or(0))
        .sum();
    if primary_total == 0 {
        return Err(Error::NoMutations);
    }
    let identity_total = counts.get(&MutationType::Identity).copied().unwrap_or(0);

    let mut primary = BTreeMap::new();
    for t in MutationType::PRIMARY {
        let count = counts.get(&t).copied().unwrap_or(0);
        primary.insert(t, count as f64 / primary_total as f64);
    }
    let all_total = primary_total + identity_total;
    let mut with_identity = BTreeMap::new();
    for t in MutationType::PRIMARY.iter().chain([MutationType::Identity].iter()) {
        let count = counts.get(t).copied().unwrap_or(0);
        with_identity.insert(*t, count as f64 / all_total as f64);
    }
    Ok(TypeFrequencies {
        primary,
        with_identity,
        primary_total,
        identity_total,
    })
}

/// Mutation load of one block pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMutationProfile {
    pub block: Block,
    pub total: u64,
    pub proportions: BTreeMap<MutationType, f64>,
}

/// Per-block mutation totals and type proportions, ranked by total
/// descending (ties lexicographic). Covers primary and Identity events;
/// callers usually report the top five.
pub fn block_mutation_profiles(events: &[MutationEvent]) -> Vec<BlockMutationProfile> {
    let mut per_block: BTreeMap<Block, BTreeMap<MutationType, u64>> = BTreeMap::new();
    for event in events {
        if !(event.mutation_type.is_primary() || event.mutation_type == MutationType::Identity) {
            continue;
        }
        if let Some(block) = event.key_block() {
            *per_block
                .entry(block)
                .or_default()
                .entry(event.mutation_type)
                .or_insert(0) += 1;
        }
    }
    let mut profiles: Vec<BlockMutationProfile> = per_block
        .into_iter()
        .map(|(block, counts)| {
            let total: u64 = counts.values().sum();
            let proportions = counts
                .into_iter()
                .map(|(t, c)| (t, c as f64 / total as f64))
                .collect();
            BlockMutationProfile {
                block,
                total,
                proportions,
            }
        })
        .collect();
    profiles.sort_by(|a, b| b.total.cmp(&a.total).then(a.block.cmp(&b.block)));
    profiles
}

/// Directional substitution letter-pair frequencies, normalised by the
/// family's total aligned block positions (gap blocks included).
pub fn substitution_frequencies(
    events: &[MutationEvent],
    family: &AlignedFamily,
) -> BTreeMap<(Letter, Letter), f64> {
    let total_blocks = family.total_aligned_blocks();
    let mut counts: BTreeMap<(Letter, Letter), u64> = BTreeMap::new();
    for event in events {
        if let Some(pair) = event.sub_letter_pair {
            *counts.entry(pair).or_insert(0) += 1;
        }
    }
    counts
        .into_iter()
        .map(|(pair, count)| (pair, count as f64 / total_blocks as f64))
        .collect()
}

/// Fraction of the family's primary mutations falling on each aligned
/// position, tagged by length group. Scores sum to 1.
pub fn hotspot_scores(events: &[MutationEvent]) -> Result<BTreeMap<(usize, usize), f64>> {
    let mut counts: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut total = 0u64;
    for event in events {
        if event.mutation_type.is_primary() {
            *counts.entry((event.group_index, event.position)).or_insert(0) += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::NoMutations);
    }
    Ok(counts
        .into_iter()
        .map(|(key, count)| (key, count as f64 / total as f64))
        .collect())
}
