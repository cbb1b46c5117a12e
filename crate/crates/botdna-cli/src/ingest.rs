//! Trace-file ingestion: parsing, validation, year filtering, and the
//! derivation of the three non-literal features (text-duplication class,
//! sentiment, media class) before encoding.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::OnceLock;

use chrono::{DateTime, Datelike, NaiveDate, NaiveDateTime, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};

use botdna_core::encoding::{
    build_sequence, BehaviourSequence, EmojiPresence, HashtagPresence, MediaKind, PostFeatures,
    PostingAction, Sentiment, TextClass, UrlPresence,
};

use crate::error::{CliError, Result};
use crate::sentiment::derive_sentiment;

/// One validated raw event.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostRecord {
    pub account_id: String,
    pub timestamp: i64,
    pub action: String,
    pub has_url: bool,
    pub media: String,
    pub has_hashtag: bool,
    pub has_emoji: bool,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sentiment: Option<String>,
}

impl PostRecord {
    pub fn action_kind(&self) -> PostingAction {
        match self.action.as_str() {
            "retweet" => PostingAction::Retweet,
            "reply" => PostingAction::Reply,
            _ => PostingAction::Tweet,
        }
    }

    pub fn media_kind(&self) -> MediaKind {
        match self.media.as_str() {
            "image" => MediaKind::Image,
            "video" => MediaKind::Video,
            _ => MediaKind::None,
        }
    }

    pub fn sentiment_label(&self) -> Option<Sentiment> {
        match self.sentiment.as_deref() {
            Some("positive") => Some(Sentiment::Positive),
            Some("negative") => Some(Sentiment::Negative),
            Some("neutral") => Some(Sentiment::Neutral),
            _ => None,
        }
    }
}

/// Parsed records grouped by account, each group timestamp-sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub accounts: BTreeMap<String, Vec<PostRecord>>,
    /// Inclusive year filter actually applied, when any.
    pub year_range: Option<(i32, i32)>,
}

impl Corpus {
    pub fn n_accounts(&self) -> usize {
        self.accounts.len()
    }

    pub fn n_records(&self) -> usize {
        self.accounts.values().map(Vec::len).sum()
    }

    pub fn has_text(&self) -> bool {
        self.accounts
            .values()
            .any(|records| records.iter().any(|r| !r.text.is_empty()))
    }
}

/// Why rows were skipped during parsing.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipReport {
    pub rows_total: u64,
    pub rows_skipped: u64,
    pub reasons: BTreeMap<String, u64>,
}

impl SkipReport {
    fn skip(&mut self, reason: &str) {
        self.rows_skipped += 1;
        *self.reasons.entry(reason.to_string()).or_insert(0) += 1;
    }
}

/// Supported trace formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceFormat {
    Jsonl,
    Csv,
}

impl TraceFormat {
    pub fn from_name(name: &str) -> Result<TraceFormat> {
        match name {
            "jsonl" => Ok(TraceFormat::Jsonl),
            "csv" => Ok(TraceFormat::Csv),
            other => Err(CliError::UnknownFormat(other.to_string())),
        }
    }
}

fn parse_bool(value: &serde_json::Value) -> Option<bool> {
    match value {
        serde_json::Value::Bool(b) => Some(*b),
        serde_json::Value::Number(n) => match n.as_i64() {
            Some(0) => Some(false),
            Some(1) => Some(true),
            _ => None,
        },
        serde_json::Value::String(s) => parse_bool_str(s),
        _ => None,
    }
}

fn parse_bool_str(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

/// Accepts epoch seconds or ISO-8601-style strings (RFC 3339,
/// `YYYY-MM-DD HH:MM:SS`, `YYYY-MM-DDTHH:MM:SS`, or a bare date), all
/// interpreted as UTC.
pub fn parse_timestamp(value: &serde_json::Value) -> Option<i64> {
    match value {
        serde_json::Value::Number(n) => n.as_i64(),
        serde_json::Value::String(s) => parse_timestamp_str(s),
        _ => None,
    }
}

fn parse_timestamp_str(s: &str) -> Option<i64> {
    let s = s.trim();
    if let Ok(epoch) = s.parse::<i64>() {
        return Some(epoch);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp());
    }
    for format in ["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, format) {
            return Some(dt.and_utc().timestamp());
        }
    }
    if let Ok(date) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Some(date.and_hms_opt(0, 0, 0)?.and_utc().timestamp());
    }
    None
}

fn record_from_fields(fields: &BTreeMap<String, serde_json::Value>) -> std::result::Result<PostRecord, &'static str> {
    let str_field = |key: &str| -> Option<String> {
        fields.get(key).and_then(|v| v.as_str()).map(str::to_string)
    };
    let account_id = str_field("account_id").filter(|s| !s.is_empty());
    let Some(account_id) = account_id else {
        return Err("missing_account_id");
    };
    let timestamp = match fields.get("timestamp") {
        None | Some(serde_json::Value::Null) => return Err("missing_timestamp"),
        Some(v) => parse_timestamp(v).ok_or("bad_timestamp")?,
    };
    if timestamp <= 0 {
        return Err("bad_timestamp");
    }
    let action = str_field("action").ok_or("missing_action")?;
    if !matches!(action.as_str(), "tweet" | "retweet" | "reply") {
        return Err("bad_action");
    }
    let media = match fields.get("media") {
        None | Some(serde_json::Value::Null) => "none".to_string(),
        Some(v) => v.as_str().ok_or("bad_media")?.to_string(),
    };
    if !matches!(media.as_str(), "image" | "video" | "none") {
        return Err("bad_media");
    }
    let bool_field = |key: &str| -> std::result::Result<bool, &'static str> {
        match fields.get(key) {
            None | Some(serde_json::Value::Null) => Ok(false),
            Some(v) => parse_bool(v).ok_or("bad_flag"),
        }
    };
    let sentiment = match fields.get("sentiment") {
        None | Some(serde_json::Value::Null) => None,
        Some(v) => {
            let s = v.as_str().ok_or("bad_sentiment")?;
            if s.is_empty() {
                None
            } else if matches!(s, "positive" | "negative" | "neutral") {
                Some(s.to_string())
            } else {
                return Err("bad_sentiment");
            }
        }
    };
    Ok(PostRecord {
        account_id,
        timestamp,
        action,
        has_url: bool_field("has_url")?,
        media,
        has_hashtag: bool_field("has_hashtag")?,
        has_emoji: bool_field("has_emoji")?,
        text: str_field("text").unwrap_or_default(),
        sentiment,
    })
}

/// Parse a JSONL or CSV trace file into a corpus. Malformed rows are
/// counted and skipped, never silently dropped; accounts with zero valid
/// rows are excluded. Errors with `NoValidRows` when nothing survives.
pub fn parse_trace_file(path: &Path, format: TraceFormat) -> Result<(Corpus, SkipReport)> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut report = SkipReport::default();
    let mut records: Vec<PostRecord> = Vec::new();

    match format {
        TraceFormat::Jsonl => {
            for line in BufReader::new(file).lines() {
                let line = line.map_err(|e| CliError::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                report.rows_total += 1;
                let fields: BTreeMap<String, serde_json::Value> = match serde_json::from_str(&line)
                {
                    Ok(fields) => fields,
                    Err(_) => {
                        report.skip("bad_json");
                        continue;
                    }
                };
                match record_from_fields(&fields) {
                    Ok(record) => records.push(record),
                    Err(reason) => report.skip(reason),
                }
            }
        }
        TraceFormat::Csv => {
            let mut reader = csv::Reader::from_reader(BufReader::new(file));
            let headers = reader.headers()?.clone();
            for row in reader.records() {
                let row = row?;
                report.rows_total += 1;
                let mut fields: BTreeMap<String, serde_json::Value> = BTreeMap::new();
                for (header, value) in headers.iter().zip(row.iter()) {
                    if !value.is_empty() {
                        fields.insert(
                            header.to_string(),
                            serde_json::Value::String(value.to_string()),
                        );
                    }
                }
                match record_from_fields(&fields) {
                    Ok(record) => records.push(record),
                    Err(reason) => report.skip(reason),
                }
            }
        }
    }

    if records.is_empty() {
        return Err(CliError::NoValidRows(path.to_path_buf()));
    }
    let mut accounts: BTreeMap<String, Vec<PostRecord>> = BTreeMap::new();
    for record in records {
        accounts.entry(record.account_id.clone()).or_default().push(record);
    }
    for group in accounts.values_mut() {
        group.sort_by_key(|r| r.timestamp);
    }
    Ok((
        Corpus {
            accounts,
            year_range: None,
        },
        report,
    ))
}

/// Keep only records whose UTC calendar year is within the inclusive
/// range; accounts left with no records are dropped.
pub fn filter_years(corpus: &Corpus, start_year: i32, end_year: i32) -> Result<Corpus> {
    if start_year > end_year {
        return Err(CliError::InvalidRange(start_year, end_year));
    }
    let mut accounts: BTreeMap<String, Vec<PostRecord>> = BTreeMap::new();
    for (account, records) in &corpus.accounts {
        let kept: Vec<PostRecord> = records
            .iter()
            .filter(|r| {
                let year = DateTime::<Utc>::from_timestamp(r.timestamp, 0)
                    .map(|dt| dt.year())
                    .unwrap_or(i32::MIN);
                (start_year..=end_year).contains(&year)
            })
            .cloned()
            .collect();
        if !kept.is_empty() {
            accounts.insert(account.clone(), kept);
        }
    }
    Ok(Corpus {
        accounts,
        year_range: Some((start_year, end_year)),
    })
}

fn normalize_regexes() -> &'static (Regex, Regex) {
    static RE: OnceLock<(Regex, Regex)> = OnceLock::new();
    RE.get_or_init(|| {
        (
            Regex::new(r"https?://\S+").expect("url regex"),
            Regex::new(r"@\w+").expect("mention regex"),
        )
    })
}

/// Text normalization used by duplication detection: lowercase, strip
/// URLs and @-mentions, trim, and collapse internal whitespace.
pub fn normalize_text(text: &str) -> String {
    let (url_re, mention_re) = normalize_regexes();
    let lowered = text.to_lowercase();
    let without_urls = url_re.replace_all(&lowered, " ");
    let without_mentions = mention_re.replace_all(&without_urls, " ");
    without_mentions
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Per-record text-duplication classes for one account's records, in
/// timestamp order: empty when the normalized text is empty, duplicate
/// when it equals the normalized text of any earlier post of the same
/// account, unique otherwise.
pub fn derive_duplication(records: &[PostRecord]) -> Vec<TextClass> {
    let mut seen: std::collections::HashSet<String> = std::collections::HashSet::new();
    let mut classes = Vec::with_capacity(records.len());
    for record in records {
        let normalized = normalize_text(&record.text);
        if normalized.is_empty() {
            classes.push(TextClass::Empty);
        } else if seen.contains(&normalized) {
            classes.push(TextClass::Duplicate);
        } else {
            classes.push(TextClass::Unique);
            seen.insert(normalized);
        }
    }
    classes
}

/// Encode every account of the corpus into its behavioural sequence.
pub fn encode_corpus(corpus: &Corpus) -> Result<Vec<BehaviourSequence>> {
    let mut sequences = Vec::with_capacity(corpus.accounts.len());
    for (account, records) in &corpus.accounts {
        let classes = derive_duplication(records);
        let posts: Vec<(i64, botdna_core::Block)> = records
            .iter()
            .zip(classes)
            .map(|(record, text_class)| {
                let features = PostFeatures {
                    action: record.action_kind(),
                    url: if record.has_url {
                        UrlPresence::Present
                    } else {
                        UrlPresence::Absent
                    },
                    media: record.media_kind(),
                    emoji: if record.has_emoji {
                        EmojiPresence::Present
                    } else {
                        EmojiPresence::Absent
                    },
                    hashtag: if record.has_hashtag {
                        HashtagPresence::Present
                    } else {
                        HashtagPresence::Absent
                    },
                    text: text_class,
                    sentiment: derive_sentiment(record.sentiment_label(), &record.text),
                };
                (record.timestamp, features.encode())
            })
            .collect();
        sequences.push(build_sequence(account, &posts)?);
    }
    Ok(sequences)
}
