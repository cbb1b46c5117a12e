//! Pipeline configuration and the synthetic-population spec.
//!
//! A run is fully described by one JSON config file; every parameter has
//! a default so minimal configs stay small. The file round-trips through
//! serde without loss.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use botdna_core::alignment::AlignScoring;

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputConfig {
    pub path: PathBuf,
    /// "jsonl" or "csv".
    #[serde(default = "default_format")]
    pub format: String,
}

fn default_format() -> String {
    "jsonl".to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MsaConfig {
    #[serde(default = "default_match")]
    pub match_score: i64,
    #[serde(default = "default_partial")]
    pub partial: i64,
    #[serde(default = "default_mismatch")]
    pub mismatch: i64,
    #[serde(default = "default_gap")]
    pub gap: i64,
}

fn default_match() -> i64 {
    2
}
fn default_partial() -> i64 {
    1
}
fn default_mismatch() -> i64 {
    -1
}
fn default_gap() -> i64 {
    -2
}

impl Default for MsaConfig {
    fn default() -> Self {
        MsaConfig {
            match_score: 2,
            partial: 1,
            mismatch: -1,
            gap: -2,
        }
    }
}

impl MsaConfig {
    pub fn scoring(&self) -> AlignScoring {
        AlignScoring {
            match_score: self.match_score,
            partial: self.partial,
            mismatch: self.mismatch,
            gap: self.gap,
        }
    }
}

/// One trigger event to study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventConfig {
    pub name: String,
    /// Calendar month 1..=12.
    pub month: u32,
    /// Day of month.
    pub day: u32,
    /// Days observed before and after the event day.
    #[serde(default = "default_window")]
    pub window_days: u32,
    /// Event-specific emoji (each entry one emoji, possibly with
    /// variation selectors, which are ignored during matching).
    pub emojis: Vec<String>,
}

fn default_window() -> u32 {
    5
}

impl EventConfig {
    /// Built-in Christmas study: December 25 with ten seasonal emoji.
    pub fn christmas() -> EventConfig {
        EventConfig {
            name: "christmas".into(),
            month: 12,
            day: 25,
            window_days: 5,
            emojis: ["\u{1F385}", "\u{1F384}", "\u{1F381}", "\u{26C4}", "\u{2603}",
                     "\u{1F98C}", "\u{1F514}", "\u{2744}", "\u{1F936}", "\u{1F31F}"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }

    /// Built-in Halloween study: October 31 with ten seasonal emoji.
    pub fn halloween() -> EventConfig {
        EventConfig {
            name: "halloween".into(),
            month: 10,
            day: 31,
            window_days: 5,
            emojis: ["\u{1F383}", "\u{1F47B}", "\u{1F987}", "\u{1F480}", "\u{1F577}",
                     "\u{1F578}", "\u{1F9D9}", "\u{1F9DB}", "\u{1F9DF}", "\u{26B0}"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=12).contains(&self.month) || !(1..=31).contains(&self.day) {
            return Err(CliError::InvalidConfig(format!(
                "event '{}' has an invalid date {}-{}",
                self.name, self.month, self.day
            )));
        }
        if self.window_days < 1 {
            return Err(CliError::InvalidConfig(format!(
                "event '{}' needs a window of at least 1 day",
                self.name
            )));
        }
        if self.emojis.is_empty() || self.emojis.len() > 10 {
            return Err(CliError::InvalidConfig(format!(
                "event '{}' needs 1..=10 emoji",
                self.name
            )));
        }
        Ok(())
    }
}

/// A planted mutation wave inside one synthetic family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedMutation {
    /// "substitution", "deletion", or "insertion".
    pub kind: String,
    /// Block the wave applies to.
    pub block: String,
    /// Replacement block (substitution waves only; must be one letter
    /// away from `block`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub into_block: Option<String>,
    /// Every `stride`-th account of the family is affected (1 = all).
    #[serde(default = "default_stride")]
    pub account_stride: usize,
    /// Fractional [start, end) window of each affected sequence.
    #[serde(default = "default_window_range")]
    pub window: (f64, f64),
}

fn default_stride() -> usize {
    2
}
fn default_window_range() -> (f64, f64) {
    (0.5, 1.0)
}

/// A planted emoji burst around an event date.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedBurst {
    pub month: u32,
    pub day: u32,
    pub year: i32,
    /// How many of the family's accounts take part (first N by index).
    pub participants: usize,
    /// Emoji inserted into the burst posts.
    pub emoji: String,
    /// (day offset, posts per participant) pairs; the default peaks
    /// on the event day.
    #[serde(default = "default_burst_offsets")]
    pub day_offsets: Vec<(i32, u32)>,
}

fn default_burst_offsets() -> Vec<(i32, u32)> {
    vec![(-2, 1), (-1, 2), (0, 6), (1, 2), (2, 1)]
}

/// One family archetype: a weighted block vocabulary plus planted
/// structure. Sequences repeat the weighted blocks as a deterministic
/// cycle with RNG noise, so family members share both frequency profile
/// and coarse positional structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchetypeSpec {
    pub name: String,
    pub accounts: usize,
    /// Inclusive block-length range; lengths spread evenly over accounts.
    pub length_range: (usize, usize),
    /// (block string, integer weight) pairs; the base cycle repeats each
    /// block `weight` times in order.
    pub blocks: Vec<(String, u32)>,
    /// Probability that a position deviates to a uniform draw from the
    /// family vocabulary.
    #[serde(default = "default_noise")]
    pub noise: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mutations: Vec<PlantedMutation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bursts: Vec<PlantedBurst>,
    /// Accounts at index >= this (when set) additionally weave in
    /// account-private blocks, making them dissimilar to the rest of the
    /// family. Used to plant most/least-related structure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergent_from: Option<usize>,
}

fn default_noise() -> f64 {
    0.05
}

/// Full synthetic-population spec: archetypes, a seed, and the calendar
/// span the posts cover.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub families: Vec<ArchetypeSpec>,
    #[serde(default = "default_start_year")]
    pub start_year: i32,
    #[serde(default = "default_span_years")]
    pub span_years: i32,
}

fn default_start_year() -> i32 {
    2015
}
fn default_span_years() -> i32 {
    2
}

impl SyntheticSpec {
    /// Four caricatured promotional-account families: plain unique
    /// tweeters, URL-heavy duplicators, rich-media content multipliers,
    /// and positive informed contributors.
    pub fn default_population(accounts_per_family: usize, seed: u64) -> SyntheticSpec {
        let archetype = |name: &str, blocks: &[(&str, u32)]| ArchetypeSpec {
            name: name.to_string(),
            accounts: accounts_per_family,
            length_range: (24, 72),
            blocks: blocks.iter().map(|(b, w)| (b.to_string(), *w)).collect(),
            noise: 0.05,
            mutations: Vec::new(),
            bursts: Vec::new(),
            divergent_from: None,
        };
        SyntheticSpec {
            seed,
            start_year: 2015,
            span_years: 2,
            families: vec![
                archetype(
                    "unique_tweeters",
                    &[("TXMKZQL", 6), ("TXMKZQP", 1), ("TXMKZDL", 1)],
                ),
                archetype(
                    "url_duplicators",
                    &[("TUMKZQL", 1), ("TUMKZDL", 5), ("TUMKZDP", 2), ("TUMKZEL", 1)],
                ),
                archetype(
                    "content_multipliers",
                    &[("RUIJHQP", 3), ("YUVJHQN", 2), ("TUIJHDP", 2), ("RXIJHQL", 1)],
                ),
                archetype(
                    "informed_contributors",
                    &[("TUIKZQP", 3), ("TUMJHQP", 2), ("TUVKZDP", 2), ("TXIKZQP", 1)],
                ),
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() {
            return Err(CliError::InvalidSpec("no families".into()));
        }
        for family in &self.families {
            if family.accounts == 0 {
                return Err(CliError::InvalidSpec(format!(
                    "family '{}' has zero accounts",
                    family.name
                )));
            }
            if family.blocks.is_empty() || family.blocks.iter().all(|(_, w)| *w == 0) {
                return Err(CliError::InvalidSpec(format!(
                    "family '{}' has an empty block profile",
                    family.name
                )));
            }
            if family.length_range.0 == 0 || family.length_range.0 > family.length_range.1 {
                return Err(CliError::InvalidSpec(format!(
                    "family '{}' has an invalid length range",
                    family.name
                )));
            }
            for (block, _) in &family.blocks {
                botdna_core::Block::parse(block)
                    .map_err(|e| CliError::InvalidSpec(format!("block '{}': {}", block, e)))?;
            }
            if !(0.0..=1.0).contains(&family.noise) {
                return Err(CliError::InvalidSpec(format!(
                    "family '{}' noise outside [0,1]",
                    family.name
                )));
            }
            for planted in &family.mutations {
                if !matches!(planted.kind.as_str(), "substitution" | "deletion" | "insertion") {
                    return Err(CliError::InvalidSpec(format!(
                        "unknown planted mutation kind '{}'",
                        planted.kind
                    )));
                }
                if planted.account_stride == 0 {
                    return Err(CliError::InvalidSpec("account_stride must be >= 1".into()));
                }
                let block = botdna_core::Block::parse(&planted.block)
                    .map_err(|e| CliError::InvalidSpec(format!("planted block: {}", e)))?;
                if planted.kind == "substitution" {
                    let Some(into) = &planted.into_block else {
                        return Err(CliError::InvalidSpec(
                            "substitution wave needs into_block".into(),
                        ));
                    };
                    let into = botdna_core::Block::parse(into)
                        .map_err(|e| CliError::InvalidSpec(format!("into_block: {}", e)))?;
                    if block.hamming(&into) != 1 {
                        return Err(CliError::InvalidSpec(
                            "substitution wave blocks must differ in exactly one letter".into(),
                        ));
                    }
                }
                if !(0.0..=1.0).contains(&planted.window.0)
                    || !(0.0..=1.0).contains(&planted.window.1)
                    || planted.window.0 >= planted.window.1
                {
                    return Err(CliError::InvalidSpec("planted window must satisfy 0 <= start < end <= 1".into()));
                }
            }
        }
        Ok(())
    }
}

/// Everything a pipeline run needs, serializable as one JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Trace input; optional because synthetic runs generate their own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputConfig>,
    /// Inclusive UTC calendar-year filter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year_range: Option<(i32, i32)>,
    /// Number of behavioural families to cut.
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub msa: MsaConfig,
    /// Trend threshold tau for segment frequencies.
    #[serde(default = "default_tau")]
    pub trend_tau: f64,
    /// Size of the most/least-related sample groups.
    #[serde(default = "default_group_size")]
    pub rank_group_size: usize,
    /// Largest k evaluated by the validation metrics.
    #[serde(default = "default_k_max")]
    pub validation_k_max: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<EventConfig>,
    /// Optional display names per 1-based family id, carried into the
    /// profile report.
    #[serde(default, skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub family_names: std::collections::BTreeMap<usize, String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_threads")]
    pub threads: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSpec>,
}

fn default_k() -> usize {
    4
}
fn default_tau() -> f64 {
    0.01
}
fn default_group_size() -> usize {
    10
}
fn default_k_max() -> usize {
    10
}
fn default_threads() -> usize {
    1
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: None,
            year_range: None,
            k: default_k(),
            msa: MsaConfig::default(),
            trend_tau: default_tau(),
            rank_group_size: default_group_size(),
            validation_k_max: default_k_max(),
            events: Vec::new(),
            family_names: std::collections::BTreeMap::new(),
            seed: 0,
            threads: 1,
            synthetic: None,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let raw = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let config: PipelineConfig = serde_json::from_str(&raw)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(CliError::InvalidConfig("k must be >= 1".into()));
        }
        if self.threads == 0 {
            return Err(CliError::InvalidConfig("threads must be >= 1".into()));
        }
        if self.rank_group_size == 0 {
            return Err(CliError::InvalidConfig("rank_group_size must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.trend_tau) {
            return Err(CliError::InvalidConfig("trend_tau outside [0,1]".into()));
        }
        if let Some(input) = &self.input {
            crate::ingest::TraceFormat::from_name(&input.format)
                .map_err(|_| CliError::InvalidConfig(format!("unknown format '{}'", input.format)))?;
        }
        for event in &self.events {
            event.validate()?;
        }
        if let Some(spec) = &self.synthetic {
            spec.validate()?;
        }
        Ok(())
    }
}
