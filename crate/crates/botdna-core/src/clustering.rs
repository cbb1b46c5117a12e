//! Agglomerative average-linkage (UPGMA) clustering, dendrogram cutting,
//! and cluster-count validation metrics.
//!
//! The merge list uses stepwise labels: observations are nodes `0..m`, and
//! the cluster formed by merge `s` is node `m + s`. Ties on merge distance
//! are broken by the smallest (left, right) node pair so results are
//! deterministic across platforms.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::encoding::VOCAB_SIZE;
use crate::error::{Error, Result};
use crate::similarity::{BlockFrequencyVector, DissimilarityMatrix};

/// One agglomeration: nodes `left` and `right` merge at `height` into a
/// cluster of `size` observations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MergeStep {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

/// Stepwise dendrogram: `m - 1` merges over `m` observations.
#[derive(Clone, Debug, PartialEq)]
pub struct Dendrogram {
    n_observations: usize,
    steps: Vec<MergeStep>,
}

impl Dendrogram {
    pub fn n_observations(&self) -> usize {
        self.n_observations
    }

    pub fn steps(&self) -> &[MergeStep] {
        &self.steps
    }
}

/// Flat cluster labels: `families[i]` is the 1-based family of observation
/// `i`. Family ids are assigned by descending cluster size, ties broken by
/// the smallest member index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyAssignment {
    pub k: usize,
    pub families: Vec<usize>,
}

impl FamilyAssignment {
    /// Member indices per family, keyed by 1-based family id.
    pub fn members(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (idx, &fam) in self.families.iter().enumerate() {
            out.entry(fam).or_default().push(idx);
        }
        out
    }
}

/// Agglomerative clustering with the UPGMA (average linkage) update
/// d(A+B, C) = (|A| d(A,C) + |B| d(B,C)) / (|A| + |B|).
pub fn average_linkage(matrix: &DissimilarityMatrix) -> Result<Dendrogram> {
    let m = matrix.len();
    if m < 2 {
        return Err(Error::TooFewAccounts { got: m, need: 2 });
    }

    // Working copy indexed by slot; merged clusters keep the lower slot.
    let mut dist: Vec<f64> = matrix.values().to_vec();
    let mut active: Vec<bool> = alloc::vec![true; m];
    let mut label: Vec<usize> = (0..m).collect();
    let mut size: Vec<usize> = alloc::vec![1; m];
    let mut steps = Vec::with_capacity(m - 1);

    for step in 0..(m - 1) {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for i in 0..m {
            if !active[i] {
                continue;
            }
            for j in (i + 1)..m {
                if !active[j] {
                    continue;
                }
                let d = dist[i * m + j];
                let (lo, hi) = if label[i] < label[j] {
                    (label[i], label[j])
                } else {
                    (label[j], label[i])
                };
                let candidate = (d, lo, hi, i, j);
                let better = match best {
                    None => true,
                    Some((bd, blo, bhi, _, _)) => {
                        d < bd || (d == bd && (lo, hi) < (blo, bhi))
                    }
                };
                if better {
                    best = Some(candidate);
                }
            }
        }
        let (height, lo, hi, i, j) = best.expect("at least one active pair");

        let merged_size = size[i] + size[j];
        steps.push(MergeStep {
            left: lo,
            right: hi,
            height,
            size: merged_size,
        });

        let (si, sj) = (size[i] as f64, size[j] as f64);
        for c in 0..m {
            if !active[c] || c == i || c == j {
                continue;
            }
            let d = (si * dist[i * m + c] + sj * dist[j * m + c]) / (si + sj);
            dist[i * m + c] = d;
            dist[c * m + i] = d;
        }
        active[j] = false;
        size[i] = merged_size;
        label[i] = m + step;
    }

    Ok(Dendrogram {
        n_observations: m,
        steps,
    })
}

/// Cut the dendrogram into exactly `k` clusters by undoing the last
/// `k - 1` merges.
pub fn cut_tree(dendrogram: &Dendrogram, k: usize) -> Result<FamilyAssignment> {
    let m = dendrogram.n_observations;
    if k < 1 || k > m {
        return Err(Error::BadK { k, max: m });
    }

    // clusters[node] = member observations of that node, consumed on merge.
    let mut clusters: Vec<Option<Vec<usize>>> = (0..m).map(|i| Some(alloc::vec![i])).collect();
    for step in &dendrogram.steps[..m - k] {
        let mut left = clusters[step.left].take().expect("left node live");
        let right = clusters[step.right].take().expect("right node live");
        left.extend(right);
        clusters.push(Some(left));
    }

    let mut groups: Vec<Vec<usize>> = clusters.into_iter().flatten().collect();
    for group in &mut groups {
        group.sort_unstable();
    }
    // Family 1 is the largest cluster; ties go to the smallest member index.
    groups.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));

    let mut families = alloc::vec![0usize; m];
    for (rank, group) in groups.iter().enumerate() {
        for &idx in group {
            families[idx] = rank + 1;
        }
    }
    Ok(FamilyAssignment { k, families })
}

/// Validation metrics for one candidate cluster count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidationMetrics {
    pub k: usize,
    pub wcss: f64,
    pub silhouette: f64,
    pub calinski_harabasz: f64,
    pub davies_bouldin: f64,
}

/// Compute per-k validation metrics over an inclusive k range.
///
/// The silhouette uses the dissimilarity matrix directly (singleton
/// clusters contribute 0). WCSS, Calinski-Harabasz, and Davies-Bouldin
/// need a vector space, so they are evaluated on the L2-normalized
/// block-frequency vectors with Euclidean geometry and centroid means.
pub fn validation_metrics(
    matrix: &DissimilarityMatrix,
    vectors: &[BlockFrequencyVector],
    dendrogram: &Dendrogram,
    k_range: (usize, usize),
) -> Result<Vec<ValidationMetrics>> {
    let m = matrix.len();
    let (lo, hi) = k_range;
    if lo < 2 || hi > m.saturating_sub(1) || lo > hi {
        return Err(Error::BadKRange { lo, hi, max: m.saturating_sub(1) });
    }
    if vectors.len() != m {
        return Err(Error::InvalidMatrix("vector count != matrix size"));
    }

    let points: Vec<Vec<f64>> = vectors.iter().map(normalized_dense).collect();
    let mut out = Vec::with_capacity(hi - lo + 1);
    for k in lo..=hi {
        let assignment = cut_tree(dendrogram, k)?;
        out.push(metrics_for_assignment(matrix, &points, &assignment));
    }
    Ok(out)
}

fn normalized_dense(vector: &BlockFrequencyVector) -> Vec<f64> {
    let mut dense = alloc::vec![0.0f64; VOCAB_SIZE];
    for (block, &count) in &vector.counts {
        if let Some(idx) = block.index() {
            dense[idx] = count as f64;
        }
    }
    let norm = libm::sqrt(dense.iter().map(|v| v * v).sum::<f64>());
    if norm > 0.0 {
        for v in &mut dense {
            *v /= norm;
        }
    }
    dense
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>(),
    )
}

fn metrics_for_assignment(
    matrix: &DissimilarityMatrix,
    points: &[Vec<f64>],
    assignment: &FamilyAssignment,
) -> ValidationMetrics {
    let m = points.len();
    let members = assignment.members();
    let k = members.len();

    // Silhouette straight from the dissimilarity matrix.
    let mut silhouette_sum = 0.0;
    for i in 0..m {
        let own = assignment.families[i];
        let own_size = members[&own].len();
        if own_size <= 1 {
            continue; // convention: singleton silhouette is 0
        }
        let a: f64 = members[&own]
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| matrix.get(i, j))
            .sum::<f64>()
            / (own_size - 1) as f64;
        let mut b = f64::INFINITY;
        for (fam, idxs) in &members {
            if *fam == own {
                continue;
            }
            let mean = idxs.iter().map(|&j| matrix.get(i, j)).sum::<f64>() / idxs.len() as f64;
            if mean < b {
                b = mean;
            }
        }
        let denom = if a > b { a } else { b };
        if denom > 0.0 {
            silhouette_sum += (b - a) / denom;
        }
    }
    let silhouette = silhouette_sum / m as f64;

    // Centroid geometry on the normalized vectors.
    let dim = points[0].len();
    let mut grand = alloc::vec![0.0f64; dim];
    for p in points {
        for (g, v) in grand.iter_mut().zip(p) {
            *g += v;
        }
    }
    for g in &mut grand {
        *g /= m as f64;
    }

    let mut wcss = 0.0;
    let mut between = 0.0;
    let mut centroids: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut scatter: BTreeMap<usize, f64> = BTreeMap::new();
    for (fam, idxs) in &members {
        let mut centroid = alloc::vec![0.0f64; dim];
        for &i in idxs {
            for (c, v) in centroid.iter_mut().zip(&points[i]) {
                *c += v;
            }
        }
        for c in &mut centroid {
            *c /= idxs.len() as f64;
        }
        let mut within = 0.0;
        let mut spread = 0.0;
        for &i in idxs {
            let d = euclidean(&points[i], &centroid);
            within += d * d;
            spread += d;
        }
        wcss += within;
        let gd = euclidean(&centroid, &grand);
        between += idxs.len() as f64 * gd * gd;
        scatter.insert(*fam, spread / idxs.len() as f64);
        centroids.insert(*fam, centroid);
    }

    let calinski_harabasz = if k > 1 && m > k && wcss > 0.0 {
        (between / (k - 1) as f64) / (wcss / (m - k) as f64)
    } else {
        0.0
    };

    // Davies-Bouldin; centroid pairs at zero distance are skipped so the
    // score stays finite.
    let mut db_sum = 0.0;
    for (fam_i, centroid_i) in &centroids {
        let mut worst = 0.0f64;
        for (fam_j, centroid_j) in &centroids {
            if fam_i == fam_j {
                continue;
            }
            let d = euclidean(centroid_i, centroid_j);
            if d > 0.0 {
                let ratio = (scatter[fam_i] + scatter[fam_j]) / d;
                if ratio > worst {
                    worst = ratio;
                }
            }
        }
        db_sum += worst;
    }
    let davies_bouldin = db_sum / k as f64;

    ValidationMetrics {
        k: assignment.k,
        wcss,
        silhouette,
        calinski_harabasz,
        davies_bouldin,
    }
}

/// Adjusted Rand Index between two flat labelings of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must cover the same items");
    let n = a.len();
    if n == 0 {
        return 1.0;
    }
    let mut table: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut row: BTreeMap<usize, u64> = BTreeMap::new();
    let mut col: BTreeMap<usize, u64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_insert(0) += 1;
        *row.entry(x).or_insert(0) += 1;
        *col.entry(y).or_insert(0) += 1;
    }
    let choose2 = |v: u64| (v * v.saturating_sub(1)) / 2;
    let index: u64 = table.values().map(|&v| choose2(v)).sum();
    let row_sum: u64 = row.values().map(|&v| choose2(v)).sum();
    let col_sum: u64 = col.values().map(|&v| choose2(v)).sum();
    let total = choose2(n as u64);
    let expected = row_sum as f64 * col_sum as f64 / total as f64;
    let max_index = (row_sum + col_sum) as f64 / 2.0;
    if (max_index - expected).abs() < f64::EPSILON {
        return 1.0;
    }
    (index as f64 - expected) / (max_index - expected)
}
