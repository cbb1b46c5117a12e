//! Trigger-event study over the raw corpus: emoji counting, calendar
//! windowing, and the bridge into the core aggregation.

use chrono::{DateTime, Datelike, NaiveDate, Utc};

use botdna_core::events::{event_study, EmojiObservation, FamilyEventStats};
use botdna_core::similarity::SimilarityMatrix;

use crate::config::EventConfig;
use crate::error::{CliError, Result};
use crate::ingest::Corpus;

/// Strip variation selectors so emoji with and without presentation
/// selectors compare equal.
fn strip_variation_selectors(text: &str) -> String {
    text.chars()
        .filter(|c| !matches!(*c, '\u{FE0E}' | '\u{FE0F}'))
        .collect()
}

/// Total occurrences of the configured emoji in a text, by exact
/// code-point containment after variation-selector normalization.
pub fn emoji_occurrences(text: &str, emojis: &[String]) -> u64 {
    if text.is_empty() {
        return 0;
    }
    let haystack = strip_variation_selectors(text);
    emojis
        .iter()
        .map(|emoji| {
            let needle = strip_variation_selectors(emoji);
            if needle.is_empty() {
                0
            } else {
                haystack.matches(&needle).count() as u64
            }
        })
        .sum()
}

/// Day offset of `timestamp` from the nearest yearly instance of the
/// event date, when within the window.
pub fn day_offset(timestamp: i64, event: &EventConfig) -> Option<i32> {
    let date = DateTime::<Utc>::from_timestamp(timestamp, 0)?.date_naive();
    let mut best: Option<i32> = None;
    for year in [date.year() - 1, date.year(), date.year() + 1] {
        let Some(event_date) = NaiveDate::from_ymd_opt(year, event.month, event.day) else {
            continue;
        };
        let offset = date.num_days_from_ce() - event_date.num_days_from_ce();
        if offset.unsigned_abs() <= event.window_days
            && best.is_none_or(|b: i32| offset.abs() < b.abs())
        {
            best = Some(offset);
        }
    }
    best
}

/// Run one event study over the corpus. `ids` fixes the account order of
/// the similarity matrix and `families` is parallel to it.
pub fn run_event_study(
    corpus: &Corpus,
    matrix: &SimilarityMatrix,
    families: &[usize],
    event: &EventConfig,
) -> Result<Vec<FamilyEventStats>> {
    event.validate()?;
    if !corpus.has_text() {
        return Err(CliError::NoTextAvailable);
    }
    let index_of: std::collections::BTreeMap<&str, usize> = matrix
        .ids()
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();

    let mut observations = Vec::new();
    for (account, records) in &corpus.accounts {
        let Some(&account_index) = index_of.get(account.as_str()) else {
            continue;
        };
        for record in records {
            let emoji_count = emoji_occurrences(&record.text, &event.emojis);
            if emoji_count == 0 {
                continue;
            }
            let Some(dt) = DateTime::<Utc>::from_timestamp(record.timestamp, 0) else {
                continue;
            };
            observations.push(EmojiObservation {
                account_index,
                month: dt.month(),
                day_offset: day_offset(record.timestamp, event),
                emoji_count,
            });
        }
    }
    Ok(event_study(&observations, families, matrix))
}
