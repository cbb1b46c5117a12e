//! Alignment-free mutation scans and the mutation-propagation analytics:
//! within/between-family shared-mutation matrices, similarity-conditioned
//! transfer detection, and confusion-matrix aggregation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::encoding::{BehaviourSequence, Block};
use crate::error::{Error, Result};
use crate::mutation::MutationType;
use crate::similarity::SimilarityMatrix;

/// A mutation found by the single-pass scan of one account's sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanMutation {
    pub account_id: String,
    pub position: usize,
    pub mutation_type: MutationType,
    pub block: Block,
    /// The earlier recorded block this one substitutes (substitutions only).
    pub substituted_from: Option<Block>,
}

/// Identity of a mutation for sharing and transfer purposes.
pub type MutationKey = (MutationType, Block);

/// Scan one gap-free sequence left to right:
///
/// * first occurrence of a block records an Insertion, unless a previously
///   recorded block sits at letter Hamming distance 1, in which case it
///   records a Substitution paired with the earliest such block;
/// * re-occurrence of a recorded block is an Identity;
/// * after the pass, each recorded block whose last occurrence is before
///   the final position gets a Deletion at that last occurrence + 1.
pub fn scan_mutations(sequence: &BehaviourSequence) -> Result<Vec<ScanMutation>> {
    if sequence.blocks.is_empty() {
        return Err(Error::EmptySequence);
    }
    if !sequence.is_gap_free() {
        return Err(Error::GapInBlock);
    }
    let blocks = &sequence.blocks;
    let last_index = blocks.len() - 1;

    // Recorded (insertion or substitution) blocks in record order.
    let mut recorded: Vec<Block> = Vec::new();
    let mut recorded_set: BTreeSet<Block> = BTreeSet::new();
    let mut last_seen: BTreeMap<Block, usize> = BTreeMap::new();
    let mut events = Vec::new();

    for (position, block) in blocks.iter().enumerate() {
        last_seen.insert(*block, position);
        if recorded_set.contains(block) {
            events.push(ScanMutation {
                account_id: sequence.account_id.clone(),
                position,
                mutation_type: MutationType::Identity,
                block: *block,
                substituted_from: None,
            });
            continue;
        }
        let origin = recorded
            .iter()
            .find(|earlier| earlier.hamming(block) == 1)
            .copied();
        let mutation_type = if origin.is_some() {
            MutationType::Substitution
        } else {
            MutationType::Insertion
        };
        events.push(ScanMutation {
            account_id: sequence.account_id.clone(),
            position,
            mutation_type,
            block: *block,
            substituted_from: origin,
        });
        recorded.push(*block);
        recorded_set.insert(*block);
    }

    // Discontinued blocks, in record order.
    for block in &recorded {
        let last = last_seen[block];
        if last < last_index {
            events.push(ScanMutation {
                account_id: sequence.account_id.clone(),
                position: last + 1,
                mutation_type: MutationType::Deletion,
                block: *block,
                substituted_from: None,
            });
        }
    }
    Ok(events)
}

/// The distinct (type, block) mutation set of a scan, Identity excluded.
pub fn mutation_key_set(events: &[ScanMutation]) -> BTreeSet<MutationKey> {
    events
        .iter()
        .filter(|e| e.mutation_type != MutationType::Identity)
        .map(|e| (e.mutation_type, e.block))
        .collect()
}

/// Shared-mutation score: |intersection| / max(|a|, |b|), or 0 when either
/// set is empty.
pub fn shared_mutation_score(a: &BTreeSet<MutationKey>, b: &BTreeSet<MutationKey>) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let shared = a.intersection(b).count();
    shared as f64 / a.len().max(b.len()) as f64
}

/// Summary statistics of a shared-mutation matrix, over off-diagonal
/// entries only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SharedMatrixSummary {
    pub average: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    /// Fraction of off-diagonal entries that are exactly zero.
    pub sparsity: f64,
}

/// Pairwise shared-mutation scores within one family.
#[derive(Clone, Debug, PartialEq)]
pub struct SharedMutationMatrix {
    pub family_id: usize,
    pub ids: Vec<String>,
    /// Row-major n*n scores.
    pub values: Vec<f64>,
    pub summary: SharedMatrixSummary,
}

impl SharedMutationMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ids.len() + j]
    }
}

/// Build the within-family shared-mutation matrix from per-account
/// mutation sets.
pub fn family_shared_matrix(
    family_id: usize,
    accounts: &[(String, BTreeSet<MutationKey>)],
) -> Result<SharedMutationMatrix> {
    let n = accounts.len();
    if n < 2 {
        return Err(Error::TooFewAccounts { got: n, need: 2 });
    }
    let mut values = alloc::vec![0.0f64; n * n];
    for i in 0..n {
        values[i * n + i] = shared_mutation_score(&accounts[i].1, &accounts[i].1);
        for j in (i + 1)..n {
            let score = shared_mutation_score(&accounts[i].1, &accounts[j].1);
            values[i * n + j] = score;
            values[j * n + i] = score;
        }
    }

    let mut off_diagonal: Vec<f64> = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off_diagonal.push(values[i * n + j]);
            }
        }
    }
    off_diagonal.sort_by(f64::total_cmp);
    let count = off_diagonal.len();
    let average = off_diagonal.iter().sum::<f64>() / count as f64;
    let median = if count % 2 == 1 {
        off_diagonal[count / 2]
    } else {
        (off_diagonal[count / 2 - 1] + off_diagonal[count / 2]) / 2.0
    };
    let zeros = off_diagonal.iter().filter(|&&v| v == 0.0).count();
    let summary = SharedMatrixSummary {
        average,
        median,
        min: off_diagonal[0],
        max: off_diagonal[count - 1],
        sparsity: zeros as f64 / count as f64,
    };
    Ok(SharedMutationMatrix {
        family_id,
        ids: accounts.iter().map(|(id, _)| id.clone()).collect(),
        values,
        summary,
    })
}

/// Shared distinct mutations between two families and their density:
/// shared / (|A| + |B|).
pub fn between_family_density(
    a: &BTreeSet<MutationKey>,
    b: &BTreeSet<MutationKey>,
) -> (u64, f64) {
    let shared = a.intersection(b).count() as u64;
    let total = a.len() + b.len();
    if total == 0 {
        return (0, 0.0);
    }
    (shared, shared as f64 / total as f64)
}

/// Density recomputed from already-counted set sizes and a shared count,
/// as reported in summary tables.
pub fn density_from_counts(size_a: u64, size_b: u64, shared: u64) -> f64 {
    if size_a + size_b == 0 {
        return 0.0;
    }
    shared as f64 / (size_a + size_b) as f64
}

/// The most- and least-related members of a family by average similarity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedGroups {
    /// Top `n` member indices by average similarity, descending.
    pub most_related: Vec<usize>,
    /// Bottom `n` member indices by average similarity, ascending.
    pub least_related: Vec<usize>,
    /// Set when the family has fewer than 2n members, so the groups overlap.
    pub overlapping: bool,
}

/// Rank family members by their average similarity to the other members
/// (self-similarity excluded). Ties break on account id.
pub fn rank_by_avg_similarity(
    matrix: &SimilarityMatrix,
    members: &[usize],
    n: usize,
) -> RankedGroups {
    let mut averaged: Vec<(f64, &str, usize)> = members
        .iter()
        .map(|&i| {
            let total: f64 = members
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| matrix.get(i, j))
                .sum();
            let denom = (members.len() - 1).max(1) as f64;
            (total / denom, matrix.ids()[i].as_str(), i)
        })
        .collect();
    averaged.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
    let most_related: Vec<usize> = averaged.iter().take(n).map(|&(_, _, i)| i).collect();
    let mut reversed = averaged;
    reversed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
    let least_related: Vec<usize> = reversed.iter().take(n).map(|&(_, _, i)| i).collect();
    RankedGroups {
        overlapping: members.len() < 2 * n,
        most_related,
        least_related,
    }
}

/// One detected mutation transfer from a source to a target account.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transfer {
    pub block: Block,
    pub source_type: MutationType,
    pub target_type: MutationType,
    pub source_position: usize,
    pub target_position: usize,
}

/// Detect transfers: a (type, block) mutation first appearing at position
/// k in the source that appears in the target at position >= k. An
/// insertion in one account and a substitution arriving at the same block
/// in the other also pair up, under the same position constraint.
pub fn detect_transfers(source: &[ScanMutation], target: &[ScanMutation]) -> Vec<Transfer> {
    let first_positions = |events: &[ScanMutation]| -> BTreeMap<MutationKey, usize> {
        let mut firsts: BTreeMap<MutationKey, usize> = BTreeMap::new();
        for event in events {
            if event.mutation_type == MutationType::Identity {
                continue;
            }
            let key = (event.mutation_type, event.block);
            let entry = firsts.entry(key).or_insert(event.position);
            if event.position < *entry {
                *entry = event.position;
            }
        }
        firsts
    };
    let source_firsts = first_positions(source);
    let target_firsts = first_positions(target);

    let compatible = |a: MutationType, b: MutationType| -> bool {
        a == b
            || (matches!(a, MutationType::Insertion | MutationType::Substitution)
                && matches!(b, MutationType::Insertion | MutationType::Substitution))
    };

    let mut transfers = Vec::new();
    for (&(source_type, block), &source_position) in &source_firsts {
        for (&(target_type, target_block), &target_position) in &target_firsts {
            if target_block != block
                || !compatible(source_type, target_type)
                || target_position < source_position
            {
                continue;
            }
            transfers.push(Transfer {
                block,
                source_type,
                target_type,
                source_position,
                target_position,
            });
        }
    }
    transfers
}

/// Aggregated transfer confusion counts and scores for one sample group.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferConfusion {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// All counts were zero and the scores were defined as 0.
    pub degenerate: bool,
}

/// Precision, recall, and F1 with zero denominators mapping to 0.
pub fn precision_recall_f1(tp: u64, fp: u64, fn_: u64) -> (f64, f64, f64) {
    let precision = if tp + fp > 0 {
        tp as f64 / (tp + fp) as f64
    } else {
        0.0
    };
    let recall = if tp + fn_ > 0 {
        tp as f64 / (tp + fn_) as f64
    } else {
        0.0
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    (precision, recall, f1)
}

/// Aggregate the per-pair confusion matrices of a sample group against the
/// family mutation universe. For each ordered pair, TP counts universe
/// mutations exhibited by both accounts, FP target-only, FN source-only,
/// and TN neither.
pub fn transfer_confusion(
    group: &[BTreeSet<MutationKey>],
    universe: &BTreeSet<MutationKey>,
) -> Result<TransferConfusion> {
    if universe.is_empty() {
        return Err(Error::EmptyUniverse);
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0u64, 0u64, 0u64, 0u64);
    for (i, source) in group.iter().enumerate() {
        for (j, target) in group.iter().enumerate() {
            if i == j {
                continue;
            }
            for key in universe {
                match (source.contains(key), target.contains(key)) {
                    (true, true) => tp += 1,
                    (false, true) => fp += 1,
                    (true, false) => fn_ += 1,
                    (false, false) => tn += 1,
                }
            }
        }
    }
    let degenerate = tp == 0 && fp == 0 && fn_ == 0;
    let (precision, recall, f1) = precision_recall_f1(tp, fp, fn_);
    Ok(TransferConfusion {
        tp,
        fp,
        fn_,
        tn,
        precision,
        recall,
        f1,
        degenerate,
    })
}
