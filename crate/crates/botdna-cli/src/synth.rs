//! Seeded synthetic population generator.
//!
//! Each archetype family emits accounts whose sequences repeat the
//! archetype's weighted block cycle with RNG noise, planted mutation
//! waves, optional divergent members, and event-emoji bursts. The raw
//! trace rows are synthesized backwards from ingestion semantics, so the
//! derived features (duplication class, sentiment) reproduce the planted
//! blocks. One seed fully determines the output bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::{NaiveDate, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use botdna_core::encoding::{Block, TextClass, VOCAB_SIZE};

use crate::config::{ArchetypeSpec, PlantedBurst, PlantedMutation, SyntheticSpec};
use crate::error::{CliError, Result};
use crate::ingest::PostRecord;

/// Ground truth emitted next to the synthetic trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// account_id -> 1-based archetype index.
    pub labels: BTreeMap<String, usize>,
    /// Archetype names, index 0 = family 1.
    pub family_names: Vec<String>,
    pub planted_mutations: BTreeMap<String, Vec<PlantedMutation>>,
    pub planted_bursts: BTreeMap<String, Vec<PlantedBurst>>,
}

/// A generated population, ready to serialize.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticPopulation {
    /// Rows sorted by (account_id, timestamp).
    pub records: Vec<PostRecord>,
    pub truth: GroundTruth,
}

impl SyntheticPopulation {
    /// The trace as JSONL bytes.
    pub fn trace_jsonl(&self) -> String {
        let mut out = String::new();
        for record in &self.records {
            let line = serde_json::to_string(record).expect("record serializes");
            let _ = writeln!(out, "{}", line);
        }
        out
    }
}

fn sentiment_name(letter: u8) -> &'static str {
    match letter {
        b'P' => "positive",
        b'N' => "negative",
        _ => "neutral",
    }
}

fn expand_cycle(blocks: &[(String, u32)]) -> Result<Vec<Block>> {
    let mut cycle = Vec::new();
    for (name, weight) in blocks {
        let block = Block::parse(name)
            .map_err(|e| CliError::InvalidSpec(format!("block '{}': {}", name, e)))?;
        for _ in 0..*weight {
            cycle.push(block);
        }
    }
    Ok(cycle)
}

/// Deterministic account-private block that avoids the family vocabulary.
fn private_block(family_index: usize, account: usize, slot: usize, vocab: &[Block]) -> Block {
    let mut index = (account * 53 + slot * 211 + family_index * 7) % VOCAB_SIZE;
    loop {
        let candidate = Block::from_index(index).expect("index in range");
        if !vocab.contains(&candidate) {
            return candidate;
        }
        index = (index + 1) % VOCAB_SIZE;
    }
}

struct AccountTexts {
    canonical: String,
    introduced: bool,
    counter: u64,
}

impl AccountTexts {
    fn new(family: &str) -> AccountTexts {
        AccountTexts {
            canonical: format!("promo template {}", family),
            introduced: false,
            counter: 0,
        }
    }

    /// Text realizing the requested duplication class against ingestion's
    /// account-local history rules. The first unique-class post introduces
    /// the canonical template so later duplicate-class posts can repeat it;
    /// a duplicate requested before any introduction degrades to the
    /// introduction itself.
    fn text_for(&mut self, class: TextClass) -> String {
        match class {
            TextClass::Empty => String::new(),
            TextClass::Duplicate => {
                if !self.introduced {
                    self.introduced = true;
                }
                self.canonical.clone()
            }
            TextClass::Unique => {
                if !self.introduced {
                    self.introduced = true;
                    self.canonical.clone()
                } else {
                    self.counter += 1;
                    format!("note {}", self.counter)
                }
            }
        }
    }
}

fn record_for_block(account_id: &str, timestamp: i64, block: Block, texts: &mut AccountTexts) -> PostRecord {
    let symbols = block.symbols();
    let text = texts.text_for(match symbols[5] {
        b'D' => TextClass::Duplicate,
        b'Q' => TextClass::Unique,
        _ => TextClass::Empty,
    });
    PostRecord {
        account_id: account_id.to_string(),
        timestamp,
        action: match symbols[0] {
            b'R' => "retweet",
            b'Y' => "reply",
            _ => "tweet",
        }
        .to_string(),
        has_url: symbols[1] == b'U',
        media: match symbols[2] {
            b'I' => "image",
            b'V' => "video",
            _ => "none",
        }
        .to_string(),
        has_hashtag: symbols[4] == b'H',
        has_emoji: symbols[3] == b'J',
        text,
        sentiment: Some(sentiment_name(symbols[6]).to_string()),
    }
}

fn burst_records(
    family: &ArchetypeSpec,
    burst: &PlantedBurst,
    account_index: usize,
    account_id: &str,
) -> Result<Vec<PostRecord>> {
    let date = NaiveDate::from_ymd_opt(burst.year, burst.month, burst.day)
        .ok_or_else(|| CliError::InvalidSpec(format!("burst date {}-{}-{}", burst.year, burst.month, burst.day)))?;
    let noon = Utc
        .from_utc_datetime(&date.and_hms_opt(12, 0, 0).expect("noon exists"))
        .timestamp();
    let mut records = Vec::new();
    for (offset, posts) in &burst.day_offsets {
        for c in 0..*posts {
            let timestamp = noon + *offset as i64 * 86_400 + c as i64 * 60 + account_index as i64;
            records.push(PostRecord {
                account_id: account_id.to_string(),
                timestamp,
                action: "tweet".to_string(),
                has_url: false,
                media: "none".to_string(),
                has_hashtag: false,
                has_emoji: true,
                text: format!("{} seasonal post {} {}", burst.emoji, offset, c),
                sentiment: Some("positive".to_string()),
            });
        }
    }
    let _ = family;
    Ok(records)
}

/// Generate the population for a validated spec.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticPopulation> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let span_start = Utc
        .with_ymd_and_hms(spec.start_year, 1, 1, 0, 0, 0)
        .single()
        .ok_or_else(|| CliError::InvalidSpec("bad start_year".into()))?
        .timestamp();
    let span_end = Utc
        .with_ymd_and_hms(spec.start_year + spec.span_years, 1, 1, 0, 0, 0)
        .single()
        .ok_or_else(|| CliError::InvalidSpec("bad span".into()))?
        .timestamp();
    let span_seconds = span_end - span_start;

    let mut records: Vec<PostRecord> = Vec::new();
    let mut truth = GroundTruth {
        labels: BTreeMap::new(),
        family_names: spec.families.iter().map(|f| f.name.clone()).collect(),
        planted_mutations: BTreeMap::new(),
        planted_bursts: BTreeMap::new(),
    };

    for (family_index, family) in spec.families.iter().enumerate() {
        let family_number = family_index + 1;
        if !family.mutations.is_empty() {
            truth
                .planted_mutations
                .insert(family.name.clone(), family.mutations.clone());
        }
        if !family.bursts.is_empty() {
            truth
                .planted_bursts
                .insert(family.name.clone(), family.bursts.clone());
        }
        let cycle = expand_cycle(&family.blocks)?;
        let vocab: Vec<Block> = {
            let mut v: Vec<Block> = cycle.clone();
            v.sort();
            v.dedup();
            v
        };

        let (lo, hi) = family.length_range;
        for account in 0..family.accounts {
            let account_id = format!("{}_{:03}", family.name, account);
            truth.labels.insert(account_id.clone(), family_number);

            let length = if family.accounts == 1 {
                hi
            } else {
                lo + (hi - lo) * account / (family.accounts - 1)
            };
            let step = span_seconds / (length as i64 + 2);
            let mut texts = AccountTexts::new(&family.name);

            for t in 0..length {
                let mut block = cycle[t % cycle.len()];
                if family.noise > 0.0 && rng.gen_bool(family.noise) {
                    block = vocab[rng.gen_range(0..vocab.len())];
                }
                if let Some(divergent_from) = family.divergent_from {
                    if account >= divergent_from && t % 3 == 2 {
                        block = private_block(family_index, account, (t / 3) % 3, &vocab);
                    }
                }
                let progress = t as f64 / length as f64;
                for planted in &family.mutations {
                    if account % planted.account_stride != 0 {
                        continue;
                    }
                    match planted.kind.as_str() {
                        "substitution" => {
                            if progress >= planted.window.0
                                && progress < planted.window.1
                                && block == Block::parse(&planted.block).expect("validated")
                            {
                                block = Block::parse(planted.into_block.as_ref().expect("validated"))
                                    .expect("validated");
                            }
                        }
                        "deletion" => {
                            let target = Block::parse(&planted.block).expect("validated");
                            if progress >= planted.window.0 && block == target {
                                // Swap in the first cycle block that is not
                                // the discontinued one.
                                if let Some(replacement) =
                                    cycle.iter().find(|b| **b != target)
                                {
                                    block = *replacement;
                                }
                            }
                        }
                        "insertion" => {
                            let slot =
                                (planted.window.0 * (length as f64 - 1.0)).round() as usize;
                            if t == slot {
                                block = Block::parse(&planted.block).expect("validated");
                            }
                        }
                        _ => unreachable!("validated kinds"),
                    }
                }
                let timestamp = span_start + (t as i64 + 1) * step + account as i64;
                records.push(record_for_block(&account_id, timestamp, block, &mut texts));
            }

            for burst in &family.bursts {
                if account < burst.participants {
                    records.extend(burst_records(family, burst, account, &account_id)?);
                }
            }
        }
    }

    records.sort_by(|a, b| {
        a.account_id
            .cmp(&b.account_id)
            .then(a.timestamp.cmp(&b.timestamp))
    });
    Ok(SyntheticPopulation { records, truth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{encode_corpus, parse_trace_file, TraceFormat};
    use std::io::Write;

    #[test]
    fn four_archetypes_produce_labelled_accounts() {
        let spec = SyntheticSpec::default_population(20, 11);
        let population = generate_synthetic(&spec).unwrap();
        assert_eq!(population.truth.labels.len(), 80);
        let mut per_family = [0usize; 4];
        for family in population.truth.labels.values() {
            per_family[family - 1] += 1;
        }
        assert_eq!(per_family, [20, 20, 20, 20]);
    }

    #[test]
    fn same_seed_is_byte_identical() {
        let spec = SyntheticSpec::default_population(6, 3);
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        assert_eq!(a.trace_jsonl(), b.trace_jsonl());
        assert_eq!(
            serde_json::to_string(&a.truth).unwrap(),
            serde_json::to_string(&b.truth).unwrap()
        );

        let other = SyntheticSpec {
            seed: 4,
            ..spec.clone()
        };
        assert_ne!(generate_synthetic(&other).unwrap().trace_jsonl(), a.trace_jsonl());
    }

    #[test]
    fn trace_survives_ingestion_and_realizes_planted_blocks() {
        let mut spec = SyntheticSpec::default_population(4, 5);
        for family in &mut spec.families {
            family.noise = 0.0;
            family.length_range = (16, 16);
        }
        let population = generate_synthetic(&spec).unwrap();
        let mut file = tempfile::Builder::new().suffix(".jsonl").tempfile().unwrap();
        file.write_all(population.trace_jsonl().as_bytes()).unwrap();
        let (corpus, report) = parse_trace_file(file.path(), TraceFormat::Jsonl).unwrap();
        assert_eq!(report.rows_skipped, 0);
        assert_eq!(corpus.n_accounts(), 16);

        // Encoded sequences reproduce each family's planned cycle exactly.
        let sequences = encode_corpus(&corpus).unwrap();
        for sequence in &sequences {
            let family = spec
                .families
                .iter()
                .find(|f| sequence.account_id.starts_with(&f.name))
                .unwrap();
            let cycle = expand_cycle(&family.blocks).unwrap();
            for (t, block) in sequence.blocks.iter().enumerate() {
                assert_eq!(
                    *block,
                    cycle[t % cycle.len()],
                    "account {} position {}",
                    sequence.account_id,
                    t
                );
            }
        }
    }

    #[test]
    fn burst_posts_carry_the_emoji_on_the_right_days() {
        let mut spec = SyntheticSpec::default_population(3, 9);
        spec.families[2].bursts.push(PlantedBurst {
            month: 12,
            day: 25,
            year: 2015,
            participants: 2,
            emoji: "\u{1F384}".into(),
            day_offsets: vec![(-1, 1), (0, 3), (1, 1)],
        });
        let population = generate_synthetic(&spec).unwrap();
        let with_emoji: Vec<&PostRecord> = population
            .records
            .iter()
            .filter(|r| r.text.contains('\u{1F384}'))
            .collect();
        // 2 participants x 5 posts.
        assert_eq!(with_emoji.len(), 10);
        let accounts: std::collections::BTreeSet<&str> =
            with_emoji.iter().map(|r| r.account_id.as_str()).collect();
        assert_eq!(accounts.len(), 2);
        let christmas_noon = Utc.with_ymd_and_hms(2015, 12, 25, 12, 0, 0).unwrap().timestamp();
        let on_day: usize = with_emoji
            .iter()
            .filter(|r| (r.timestamp - christmas_noon).abs() < 43_200)
            .count();
        assert_eq!(on_day, 6);
    }

    #[test]
    fn divergent_accounts_use_private_blocks() {
        let mut spec = SyntheticSpec::default_population(6, 2);
        spec.families = vec![spec.families[1].clone()];
        spec.families[0].noise = 0.0;
        spec.families[0].length_range = (24, 24);
        spec.families[0].divergent_from = Some(3);
        let population = generate_synthetic(&spec).unwrap();
        let mut file = tempfile::Builder::new().suffix(".jsonl").tempfile().unwrap();
        file.write_all(population.trace_jsonl().as_bytes()).unwrap();
        let (corpus, _) = parse_trace_file(file.path(), TraceFormat::Jsonl).unwrap();
        let sequences = encode_corpus(&corpus).unwrap();

        let vocab: Vec<Block> = expand_cycle(&spec.families[0].blocks).unwrap();
        let foreign = |seq: &botdna_core::BehaviourSequence| {
            seq.blocks.iter().filter(|b| !vocab.contains(b)).count()
        };
        for sequence in &sequences {
            let index: usize = sequence.account_id.rsplit('_').next().unwrap().parse().unwrap();
            if index >= 3 {
                assert!(foreign(sequence) >= 6, "{} should diverge", sequence.account_id);
            } else {
                // Core accounts can deviate only at the duplicate-template
                // introduction post.
                assert!(foreign(sequence) <= 1, "{} should stay on-profile", sequence.account_id);
            }
        }
    }
}
