//! Block-frequency vectors and the all-pairs cosine similarity matrix.
//!
//! Sequences are compared through counts of whole blocks (non-overlapping
//! k-mers with k = 7 letters, i.e. one unit per post). Dot products use
//! pairwise tree summation so long sequences accumulate with bounded
//! rounding and results do not depend on evaluation schedule.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::encoding::{BehaviourSequence, Block};
use crate::error::{Error, Result};

/// Per-account counts of each distinct block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockFrequencyVector {
    pub account_id: String,
    pub counts: BTreeMap<Block, u64>,
}

impl BlockFrequencyVector {
    /// Total number of blocks counted.
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

/// Count each distinct block of a non-empty, gap-free sequence.
pub fn vectorize(sequence: &BehaviourSequence) -> Result<BlockFrequencyVector> {
    if sequence.blocks.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut counts: BTreeMap<Block, u64> = BTreeMap::new();
    for block in &sequence.blocks {
        if block.is_gap() {
            return Err(Error::GapInBlock);
        }
        *counts.entry(*block).or_insert(0) += 1;
    }
    Ok(BlockFrequencyVector {
        account_id: sequence.account_id.clone(),
        counts,
    })
}

/// Deterministic pairwise (tree) summation.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        let mut acc = 0.0;
        for &v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

fn squared_norm(v: &BlockFrequencyVector) -> f64 {
    let squares: Vec<f64> = v
        .counts
        .values()
        .map(|&c| {
            let c = c as f64;
            c * c
        })
        .collect();
    pairwise_sum(&squares)
}

/// Cosine similarity of two block-frequency vectors, in [0, 1].
pub fn cosine(a: &BlockFrequencyVector, b: &BlockFrequencyVector) -> Result<f64> {
    if a.total() == 0 || b.total() == 0 {
        return Err(Error::ZeroVector);
    }
    let products: Vec<f64> = a
        .counts
        .iter()
        .filter_map(|(block, &ca)| {
            b.counts
                .get(block)
                .map(|&cb| ca as f64 * cb as f64)
        })
        .collect();
    let dot = pairwise_sum(&products);
    let norm = libm::sqrt(squared_norm(a)) * libm::sqrt(squared_norm(b));
    // Counts are non-negative so the true value is within [0, 1]; clamp the
    // last-bit float excess.
    Ok((dot / norm).min(1.0))
}

/// Dense symmetric matrix of pairwise cosine similarities, diagonal 1.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityMatrix {
    ids: Vec<String>,
    values: Vec<f64>,
}

/// Dense symmetric matrix of pairwise dissimilarities (1 - similarity),
/// diagonal 0.
#[derive(Clone, Debug, PartialEq)]
pub struct DissimilarityMatrix {
    ids: Vec<String>,
    values: Vec<f64>,
}

macro_rules! square_matrix_impl {
    ($ty:ident) => {
        impl $ty {
            /// Number of accounts (rows).
            pub fn len(&self) -> usize {
                self.ids.len()
            }

            pub fn is_empty(&self) -> bool {
                self.ids.is_empty()
            }

            pub fn ids(&self) -> &[String] {
                &self.ids
            }

            pub fn get(&self, i: usize, j: usize) -> f64 {
                self.values[i * self.ids.len() + j]
            }

            pub fn row(&self, i: usize) -> &[f64] {
                let m = self.ids.len();
                &self.values[i * m..(i + 1) * m]
            }

            /// Raw row-major values.
            pub fn values(&self) -> &[f64] {
                &self.values
            }
        }
    };
}

square_matrix_impl!(SimilarityMatrix);
square_matrix_impl!(DissimilarityMatrix);

impl SimilarityMatrix {
    /// Assemble from row-major values, checking shape, symmetry, and the
    /// unit diagonal.
    pub fn from_parts(ids: Vec<String>, values: Vec<f64>) -> Result<SimilarityMatrix> {
        let m = ids.len();
        if m < 2 {
            return Err(Error::TooFewAccounts { got: m, need: 2 });
        }
        if values.len() != m * m {
            return Err(Error::InvalidMatrix("values are not m*m"));
        }
        for i in 0..m {
            if values[i * m + i] != 1.0 {
                return Err(Error::InvalidMatrix("diagonal must be exactly 1"));
            }
            for j in (i + 1)..m {
                if values[i * m + j] != values[j * m + i] {
                    return Err(Error::InvalidMatrix("matrix is not symmetric"));
                }
            }
        }
        Ok(SimilarityMatrix { ids, values })
    }
}

impl DissimilarityMatrix {
    /// Assemble from row-major values, checking shape, symmetry, and the
    /// zero diagonal.
    pub fn from_parts(ids: Vec<String>, values: Vec<f64>) -> Result<DissimilarityMatrix> {
        let m = ids.len();
        if values.len() != m * m {
            return Err(Error::InvalidMatrix("values are not m*m"));
        }
        for i in 0..m {
            if values[i * m + i] != 0.0 {
                return Err(Error::InvalidMatrix("diagonal must be exactly 0"));
            }
            for j in (i + 1)..m {
                if values[i * m + j] != values[j * m + i] {
                    return Err(Error::InvalidMatrix("matrix is not symmetric"));
                }
            }
        }
        Ok(DissimilarityMatrix { ids, values })
    }
}

/// Compute the all-pairs cosine similarity matrix. Each distinct pair is
/// evaluated once and mirrored, so the result is exactly symmetric; the
/// diagonal is exactly 1.
pub fn similarity_matrix(vectors: &[BlockFrequencyVector]) -> Result<SimilarityMatrix> {
    let m = vectors.len();
    if m < 2 {
        return Err(Error::TooFewAccounts { got: m, need: 2 });
    }
    let mut values = alloc::vec![0.0f64; m * m];
    for i in 0..m {
        values[i * m + i] = 1.0;
        for j in (i + 1)..m {
            let value = cosine(&vectors[i], &vectors[j])?;
            values[i * m + j] = value;
            values[j * m + i] = value;
        }
    }
    Ok(SimilarityMatrix {
        ids: vectors.iter().map(|v| v.account_id.clone()).collect(),
        values,
    })
}

/// Convert similarities to dissimilarities: D = 1 - M, diagonal exactly 0.
pub fn to_dissimilarity(matrix: &SimilarityMatrix) -> DissimilarityMatrix {
    let m = matrix.len();
    let mut values: Vec<f64> = matrix.values.iter().map(|&v| 1.0 - v).collect();
    for i in 0..m {
        values[i * m + i] = 0.0;
    }
    DissimilarityMatrix {
        ids: matrix.ids.clone(),
        values,
    }
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

    fn vector(id: &str, blocks: &[&str]) -> BlockFrequencyVector {
        vectorize(&seq(id, blocks)).unwrap()
    }

    #[test]
    fn vectorize_counts_blocks() {
        let v = vector("a", &["TXMKZDL", "TXMKZDL", "TUMKZDL"]);
        assert_eq!(v.counts[&Block::parse("TXMKZDL").unwrap()], 2);
        assert_eq!(v.counts[&Block::parse("TUMKZDL").unwrap()], 1);
        assert_eq!(v.total(), 3);
    }

    #[test]
    fn vectorize_single_block() {
        let v = vector("a", &["RUIJHQP"]);
        assert_eq!(v.counts.len(), 1);
        assert_eq!(v.total(), 1);
    }

    #[test]
    fn vectorize_rejects_empty_and_gaps() {
        let empty = BehaviourSequence {
            account_id: "a".into(),
            blocks: alloc::vec![],
            timestamps: None,
        };
        assert_eq!(vectorize(&empty), Err(Error::EmptySequence));

        let gapped = BehaviourSequence {
            account_id: "a".into(),
            blocks: alloc::vec![Block::GAP_BLOCK],
            timestamps: None,
        };
        assert_eq!(vectorize(&gapped), Err(Error::GapInBlock));
    }

    #[test]
    fn cosine_identical_is_one() {
        let a = vector("a", &["TXMKZDL", "TUMKZDL"]);
        let b = vector("b", &["TXMKZDL", "TUMKZDL"]);
        let value = cosine(&a, &b).unwrap();
        assert!((value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_disjoint_is_zero() {
        let a = vector("a", &["TXMKZDL"]);
        let b = vector("b", &["RUIJHQP"]);
        assert_eq!(cosine(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn cosine_half_overlap() {
        // {A:1, B:1} vs {A:1} -> 1/sqrt(2) = 0.7071...
        let a = vector("a", &["TXMKZDL", "TUMKZDL"]);
        let b = vector("b", &["TXMKZDL"]);
        let value = cosine(&a, &b).unwrap();
        assert!((value - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-4);
    }

    #[test]
    fn cosine_invariant_to_count_scaling() {
        let a = vector("a", &["TXMKZDL", "TUMKZDL", "TXMKZDL"]);
        let b = vector("b", &["TXMKZDL", "RUIJHQP"]);
        let mut scaled = a.clone();
        for count in scaled.counts.values_mut() {
            *count *= 7;
        }
        let lhs = cosine(&a, &b).unwrap();
        let rhs = cosine(&scaled, &b).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn matrix_identical_and_disjoint_pairs() {
        let a = vector("a", &["TXMKZDL"]);
        let b = vector("b", &["TXMKZDL"]);
        let m = similarity_matrix(&[a.clone(), b]).unwrap();
        assert_eq!(m.values(), &[1.0, 1.0, 1.0, 1.0]);

        let c = vector("c", &["RUIJHQP"]);
        let m = similarity_matrix(&[a, c]).unwrap();
        assert_eq!(m.values(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn matrix_requires_two_accounts() {
        let a = vector("a", &["TXMKZDL"]);
        assert!(matches!(
            similarity_matrix(&[a]),
            Err(Error::TooFewAccounts { got: 1, need: 2 })
        ));
    }

    #[test]
    fn dissimilarity_flips_values() {
        let a = vector("a", &["TXMKZDL", "TUMKZDL"]);
        let b = vector("b", &["TXMKZDL"]);
        let m = similarity_matrix(&[a, b]).unwrap();
        let d = to_dissimilarity(&m);
        assert_eq!(d.get(0, 0), 0.0);
        assert_eq!(d.get(1, 1), 0.0);
        assert!((d.get(0, 1) - (1.0 - m.get(0, 1))).abs() < 1e-15);
        assert_eq!(d.get(0, 1), d.get(1, 0));
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let values: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&values), 500500.0);
    }
}
