//! Trigger-event aggregation: monthly and per-day event-emoji usage,
//! participation around the event window, and the mean behavioural
//! similarity of participating accounts.
//!
//! Calendar resolution and emoji extraction happen upstream; this module
//! aggregates prepared per-post observations.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::similarity::SimilarityMatrix;

/// One post's event-emoji usage, prepared by the ingestion layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmojiObservation {
    /// Account position in the similarity-matrix order.
    pub account_index: usize,
    /// Calendar month of the post, 1..=12.
    pub month: u32,
    /// Whole-day offset from the event day, when within the study window.
    pub day_offset: Option<i32>,
    /// Occurrences of event-specific emoji in the post text.
    pub emoji_count: u64,
}

/// Event-study aggregates for one family.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyEventStats {
    pub family_id: usize,
    /// Event-emoji occurrences per calendar month (index 0 = January),
    /// across all years.
    pub monthly_counts: [u64; 12],
    /// Per participating account: emoji occurrences by day offset.
    pub daily_counts: BTreeMap<usize, BTreeMap<i32, u64>>,
    /// Accounts using at least one event emoji before (offset < 0),
    /// during (offset 0), and after (offset > 0) the event.
    pub participants_before: u64,
    pub participants_during: u64,
    pub participants_after: u64,
    /// Accounts with any event-emoji usage inside the window.
    pub participants: Vec<usize>,
    /// Mean pairwise cosine similarity among the participants; defined as
    /// 0 when there are fewer than two.
    pub mean_participant_similarity: f64,
}

/// Aggregate observations into per-family event statistics. `families`
/// assigns each account index a 1-based family id; every family receives
/// an entry even when it never used the emoji set.
pub fn event_study(
    observations: &[EmojiObservation],
    families: &[usize],
    matrix: &SimilarityMatrix,
) -> Vec<FamilyEventStats> {
    let mut stats: BTreeMap<usize, FamilyEventStats> = BTreeMap::new();
    for &family_id in families {
        stats.entry(family_id).or_insert(FamilyEventStats {
            family_id,
            monthly_counts: [0; 12],
            daily_counts: BTreeMap::new(),
            participants_before: 0,
            participants_during: 0,
            participants_after: 0,
            participants: Vec::new(),
            mean_participant_similarity: 0.0,
        });
    }

    // (account, window part) participation dedup.
    let mut before: BTreeMap<usize, ()> = BTreeMap::new();
    let mut during: BTreeMap<usize, ()> = BTreeMap::new();
    let mut after: BTreeMap<usize, ()> = BTreeMap::new();
    let mut windowed: BTreeMap<usize, ()> = BTreeMap::new();

    for obs in observations {
        if obs.emoji_count == 0 {
            continue;
        }
        let family_id = families[obs.account_index];
        let entry = stats.get_mut(&family_id).expect("family registered");
        debug_assert!((1..=12).contains(&obs.month));
        entry.monthly_counts[(obs.month - 1) as usize] += obs.emoji_count;
        if let Some(offset) = obs.day_offset {
            *entry
                .daily_counts
                .entry(obs.account_index)
                .or_default()
                .entry(offset)
                .or_insert(0) += obs.emoji_count;
            windowed.insert(obs.account_index, ());
            match offset {
                o if o < 0 => before.insert(obs.account_index, ()),
                0 => during.insert(obs.account_index, ()),
                _ => after.insert(obs.account_index, ()),
            };
        }
    }

    for entry in stats.values_mut() {
        let of_family = |set: &BTreeMap<usize, ()>| -> Vec<usize> {
            set.keys()
                .copied()
                .filter(|&i| families[i] == entry.family_id)
                .collect()
        };
        entry.participants_before = of_family(&before).len() as u64;
        entry.participants_during = of_family(&during).len() as u64;
        entry.participants_after = of_family(&after).len() as u64;
        entry.participants = of_family(&windowed);
        entry.mean_participant_similarity = mean_pairwise(matrix, &entry.participants);
    }

    stats.into_values().collect()
}

/// Mean of the pairwise similarity values among `indices`; 0 when fewer
/// than two indices are given.
pub fn mean_pairwise(matrix: &SimilarityMatrix, indices: &[usize]) -> f64 {
    if indices.len() < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut pairs = 0u64;
    for (a, &i) in indices.iter().enumerate() {
        for &j in &indices[a + 1..] {
            total += matrix.get(i, j);
            pairs += 1;
        }
    }
    total / pairs as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;

    fn matrix_of(m: usize, value: f64) -> SimilarityMatrix {
        let ids: Vec<String> = (0..m).map(|i| alloc::format!("a{}", i)).collect();
        let mut values = alloc::vec![value; m * m];
        for i in 0..m {
            values[i * m + i] = 1.0;
        }
        SimilarityMatrix::from_parts(ids, values).unwrap()
    }

    #[test]
    fn no_emoji_means_empty_report() {
        let matrix = matrix_of(4, 0.5);
        let families = [1, 1, 2, 2];
        let obs = [EmojiObservation {
            account_index: 0,
            month: 12,
            day_offset: Some(0),
            emoji_count: 0,
        }];
        let report = event_study(&obs, &families, &matrix);
        assert_eq!(report.len(), 2);
        for family in &report {
            assert_eq!(family.monthly_counts, [0; 12]);
            assert!(family.participants.is_empty());
            assert_eq!(family.mean_participant_similarity, 0.0);
        }
    }

    #[test]
    fn single_participant_similarity_is_zero() {
        let matrix = matrix_of(3, 0.9);
        let families = [1, 1, 2];
        let obs = [EmojiObservation {
            account_index: 2,
            month: 12,
            day_offset: Some(-1),
            emoji_count: 3,
        }];
        let report = event_study(&obs, &families, &matrix);
        let family2 = report.iter().find(|f| f.family_id == 2).unwrap();
        assert_eq!(family2.participants, alloc::vec![2]);
        assert_eq!(family2.participants_before, 1);
        assert_eq!(family2.participants_during, 0);
        assert_eq!(family2.mean_participant_similarity, 0.0);
        assert_eq!(family2.monthly_counts[11], 3);
    }

    #[test]
    fn burst_peaks_at_event_day_and_month() {
        let matrix = matrix_of(3, 0.8);
        let families = [1, 1, 1];
        let mut obs = Vec::new();
        // Background usage in June, off-window.
        obs.push(EmojiObservation {
            account_index: 0,
            month: 6,
            day_offset: None,
            emoji_count: 1,
        });
        // Burst around the event: day 0 dominates.
        for account in 0..2usize {
            for (offset, count) in [(-1i32, 2u64), (0, 10), (1, 3)] {
                obs.push(EmojiObservation {
                    account_index: account,
                    month: 12,
                    day_offset: Some(offset),
                    emoji_count: count,
                });
            }
        }
        let report = event_study(&obs, &families, &matrix);
        let family = &report[0];
        let december = family.monthly_counts[11];
        assert!(december >= *family.monthly_counts.iter().max().unwrap());
        let day0: u64 = family.daily_counts.values().map(|d| d[&0]).sum();
        for offset in [-1, 1] {
            let total: u64 = family
                .daily_counts
                .values()
                .map(|d| d.get(&offset).copied().unwrap_or(0))
                .sum();
            assert!(day0 > total);
        }
        assert_eq!(family.participants, alloc::vec![0, 1]);
        assert_eq!(family.participants_during, 2);
        assert!((family.mean_participant_similarity - 0.8).abs() < 1e-12);
    }
}
