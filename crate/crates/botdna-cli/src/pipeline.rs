//! Stage orchestration and artifact persistence.
//!
//! The pipeline runs ingest -> encode -> similarity -> cluster -> profile
//! -> align -> mutations -> evolve (plus an events stage when trigger
//! events are configured), writing every intermediate artifact under the
//! output directory and recording a manifest of (stage, parameters, file
//! hashes). Re-running with unchanged inputs and config reproduces every
//! byte, independent of the thread count.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use botdna_core::alignment::{align_family, consensus, AlignedFamily, AlignedGroup, AlignedSequence};
use botdna_core::clustering::{average_linkage, cut_tree, validation_metrics, FamilyAssignment};
use botdna_core::encoding::{BehaviourSequence, Block};
use botdna_core::evolution::{
    between_family_density, detect_transfers, family_shared_matrix, mutation_key_set,
    rank_by_avg_similarity, scan_mutations, transfer_confusion, MutationKey, ScanMutation,
};
use botdna_core::mutation::{
    block_mutation_profiles, detect_family_mutations, hotspot_scores, mutation_type_frequencies,
    substitution_frequencies, FamilyMutations, MutationType,
};
use botdna_core::profile::profile_families;
use botdna_core::similarity::{
    cosine, similarity_matrix, to_dissimilarity, vectorize, BlockFrequencyVector, SimilarityMatrix,
};

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::events::run_event_study;
use crate::formats;
use crate::ingest::{encode_corpus, filter_years, parse_trace_file, Corpus, PostRecord, TraceFormat};

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const SKIP_REPORT_FILE: &str = "skip_report.json";
pub const SEQUENCES_FILE: &str = "sequences.jsonl";
pub const SIMILARITY_CSV: &str = "similarity.csv";
pub const SIMILARITY_BIN: &str = "similarity.bin";
pub const DENDROGRAM_FILE: &str = "dendrogram.newick";
pub const ASSIGNMENT_FILE: &str = "assignment.csv";
pub const METRICS_FILE: &str = "metrics.json";
pub const PROFILES_FILE: &str = "profiles.json";
pub const SEGMENT_FREQS_FILE: &str = "segment_freqs.csv";
pub const ALIGNED_FILE: &str = "aligned.jsonl";
pub const CONSENSUS_FILE: &str = "consensus.csv";
pub const MUTATION_EVENTS_FILE: &str = "mutation_events.csv";
pub const MUTATION_STATS_FILE: &str = "mutation_stats.json";
pub const SCAN_EVENTS_FILE: &str = "scan_events.csv";
pub const EVOLUTION_FILE: &str = "evolution.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const RUN_REPORT_FILE: &str = "run_report.json";

/// Counters surfaced at the end of a run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub counters: BTreeMap<String, u64>,
}

impl RunReport {
    pub fn bump(&mut self, key: &str, by: u64) {
        if by > 0 {
            *self.counters.entry(key.to_string()).or_insert(0) += by;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageEntry {
    pub stage: String,
    pub params: serde_json::Value,
    pub files: Vec<FileEntry>,
}

/// The provenance record of one full pipeline run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub stages: Vec<StageEntry>,
}

impl Manifest {
    fn record(
        &mut self,
        out_dir: &Path,
        stage: &str,
        params: serde_json::Value,
        files: &[String],
    ) -> Result<()> {
        let mut entries = Vec::with_capacity(files.len());
        for name in files {
            entries.push(FileEntry {
                path: name.clone(),
                sha256: formats::file_sha256(&out_dir.join(name))?,
            });
        }
        self.stages.push(StageEntry {
            stage: stage.to_string(),
            params,
            files: entries,
        });
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Stage: ingest

pub fn stage_ingest(config: &PipelineConfig, out_dir: &Path) -> Result<Corpus> {
    let input = config
        .input
        .as_ref()
        .ok_or_else(|| CliError::InvalidConfig("no input configured".into()))?;
    let format = TraceFormat::from_name(&input.format)?;
    let (corpus, report) = parse_trace_file(&input.path, format)?;
    let corpus = match config.year_range {
        Some((start, end)) => filter_years(&corpus, start, end)?,
        None => corpus,
    };
    if corpus.accounts.is_empty() {
        return Err(CliError::NoValidRows(input.path.clone()));
    }
    let mut lines = String::new();
    for records in corpus.accounts.values() {
        for record in records {
            lines.push_str(&serde_json::to_string(record)?);
            lines.push('\n');
        }
    }
    formats::write_string(&out_dir.join(CORPUS_FILE), &lines)?;
    formats::write_json(&out_dir.join(SKIP_REPORT_FILE), &report)?;
    Ok(corpus)
}

pub fn load_corpus(out_dir: &Path) -> Result<Corpus> {
    let path = out_dir.join(CORPUS_FILE);
    if !path.exists() {
        return Err(CliError::MissingArtifact(path));
    }
    let file = std::fs::File::open(&path).map_err(|e| CliError::io(&path, e))?;
    let mut accounts: BTreeMap<String, Vec<PostRecord>> = BTreeMap::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line.map_err(|e| CliError::io(&path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: PostRecord = serde_json::from_str(&line)?;
        accounts.entry(record.account_id.clone()).or_default().push(record);
    }
    for group in accounts.values_mut() {
        group.sort_by_key(|r| r.timestamp);
    }
    Ok(Corpus {
        accounts,
        year_range: None,
    })
}

// ---------------------------------------------------------------------------
// Stage: encode

#[derive(Serialize, Deserialize)]
struct SequenceRow {
    account_id: String,
    blocks: Vec<String>,
    timestamps: Vec<i64>,
}

pub fn stage_encode(corpus: &Corpus, out_dir: &Path) -> Result<Vec<BehaviourSequence>> {
    let sequences = encode_corpus(corpus)?;
    let mut lines = String::new();
    for seq in &sequences {
        let row = SequenceRow {
            account_id: seq.account_id.clone(),
            blocks: seq.blocks.iter().map(|b| b.to_string()).collect(),
            timestamps: seq.timestamps.clone().unwrap_or_default(),
        };
        lines.push_str(&serde_json::to_string(&row)?);
        lines.push('\n');
    }
    formats::write_string(&out_dir.join(SEQUENCES_FILE), &lines)?;
    Ok(sequences)
}

pub fn load_sequences(out_dir: &Path) -> Result<Vec<BehaviourSequence>> {
    let path = out_dir.join(SEQUENCES_FILE);
    if !path.exists() {
        return Err(CliError::MissingArtifact(path));
    }
    let raw = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let mut sequences = Vec::new();
    for line in raw.lines().filter(|l| !l.trim().is_empty()) {
        let row: SequenceRow = serde_json::from_str(line)?;
        let blocks = row
            .blocks
            .iter()
            .map(|s| Block::parse(s))
            .collect::<botdna_core::Result<Vec<Block>>>()
            .map_err(|e| CliError::BadArtifact {
                path: path.clone(),
                reason: e.to_string(),
            })?;
        sequences.push(BehaviourSequence {
            account_id: row.account_id,
            blocks,
            timestamps: if row.timestamps.is_empty() {
                None
            } else {
                Some(row.timestamps)
            },
        });
    }
    Ok(sequences)
}

// ---------------------------------------------------------------------------
// Stage: similarity

/// All-pairs cosine matrix with row-parallel fill. Every cell is an
/// independent pure function of its two vectors, so any thread count
/// produces bit-identical values.
pub fn parallel_similarity(
    vectors: &[BlockFrequencyVector],
    threads: usize,
) -> Result<SimilarityMatrix> {
    if threads <= 1 {
        return Ok(similarity_matrix(vectors)?);
    }
    let m = vectors.len();
    if m < 2 {
        return Err(botdna_core::Error::TooFewAccounts { got: m, need: 2 }.into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::InvalidConfig(format!("thread pool: {}", e)))?;
    let rows: std::result::Result<Vec<Vec<f64>>, botdna_core::Error> = pool.install(|| {
        use rayon::prelude::*;
        (0..m)
            .into_par_iter()
            .map(|i| {
                let mut row = vec![0.0f64; m];
                for j in 0..m {
                    row[j] = if i == j {
                        1.0
                    } else {
                        cosine(&vectors[i], &vectors[j])?
                    };
                }
                Ok(row)
            })
            .collect()
    });
    let values: Vec<f64> = rows?.into_iter().flatten().collect();
    let ids = vectors.iter().map(|v| v.account_id.clone()).collect();
    Ok(SimilarityMatrix::from_parts(ids, values)?)
}

pub fn stage_similarity(
    sequences: &[BehaviourSequence],
    threads: usize,
    out_dir: &Path,
) -> Result<(Vec<BlockFrequencyVector>, SimilarityMatrix)> {
    let vectors = sequences
        .iter()
        .map(vectorize)
        .collect::<botdna_core::Result<Vec<_>>>()?;
    let matrix = parallel_similarity(&vectors, threads)?;
    formats::write_string(
        &out_dir.join(SIMILARITY_CSV),
        &formats::matrix_csv(matrix.ids(), matrix.values()),
    )?;
    formats::write_matrix_binary(&out_dir.join(SIMILARITY_BIN), matrix.ids(), matrix.values())?;
    Ok((vectors, matrix))
}

// ---------------------------------------------------------------------------
// Stage: cluster

#[derive(Serialize, Deserialize)]
struct MetricsRow {
    k: usize,
    wcss: f64,
    silhouette: f64,
    calinski_harabasz: f64,
    davies_bouldin: f64,
}

pub fn stage_cluster(
    matrix: &SimilarityMatrix,
    vectors: &[BlockFrequencyVector],
    config: &PipelineConfig,
    out_dir: &Path,
) -> Result<FamilyAssignment> {
    let dissimilarity = to_dissimilarity(matrix);
    let dendrogram = average_linkage(&dissimilarity)?;
    let assignment = cut_tree(&dendrogram, config.k)?;

    formats::write_string(
        &out_dir.join(DENDROGRAM_FILE),
        &formats::newick(&dendrogram, matrix.ids()),
    )?;
    formats::write_string(
        &out_dir.join(ASSIGNMENT_FILE),
        &formats::assignment_csv(matrix.ids(), &assignment.families),
    )?;

    let k_hi = config.validation_k_max.min(matrix.len().saturating_sub(1));
    let rows: Vec<MetricsRow> = if k_hi >= 2 {
        validation_metrics(&dissimilarity, vectors, &dendrogram, (2, k_hi))?
            .into_iter()
            .map(|m| MetricsRow {
                k: m.k,
                wcss: m.wcss,
                silhouette: m.silhouette,
                calinski_harabasz: m.calinski_harabasz,
                davies_bouldin: m.davies_bouldin,
            })
            .collect()
    } else {
        Vec::new()
    };
    formats::write_json(&out_dir.join(METRICS_FILE), &rows)?;
    Ok(assignment)
}

pub fn load_assignment(out_dir: &Path, expected_ids: &[String]) -> Result<FamilyAssignment> {
    let path = out_dir.join(ASSIGNMENT_FILE);
    let (ids, families) = formats::parse_assignment_csv(&path)?;
    if ids != expected_ids {
        return Err(CliError::BadArtifact {
            path,
            reason: "assignment account order does not match sequences".into(),
        });
    }
    let k = families.iter().copied().max().unwrap_or(0);
    Ok(FamilyAssignment { k, families })
}

// ---------------------------------------------------------------------------
// Stage: profile

#[derive(Serialize, Deserialize)]
struct ProfileDoc {
    family_id: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    display_name: Option<String>,
    members: usize,
    letter_counts: BTreeMap<String, u64>,
    top_blocks: Vec<(String, u64)>,
    unique_blocks: Vec<(String, u64)>,
    top5_trends: Vec<(String, String)>,
    segment_totals: [u64; 3],
    short_sequences: u32,
    empty_segments: u32,
}

fn family_members<'a>(
    sequences: &'a [BehaviourSequence],
    assignment: &FamilyAssignment,
) -> BTreeMap<usize, Vec<&'a BehaviourSequence>> {
    let mut families: BTreeMap<usize, Vec<&BehaviourSequence>> = BTreeMap::new();
    for (seq, &family) in sequences.iter().zip(&assignment.families) {
        families.entry(family).or_default().push(seq);
    }
    families
}

pub fn stage_profile(
    sequences: &[BehaviourSequence],
    assignment: &FamilyAssignment,
    config: &PipelineConfig,
    out_dir: &Path,
    report: &mut RunReport,
) -> Result<()> {
    let families = family_members(sequences, assignment);
    let profiles = profile_families(&families, config.trend_tau)?;

    let mut docs = Vec::with_capacity(profiles.len());
    let mut segment_csv = String::from("family_id,block,seg1,seg2,seg3\n");
    for profile in &profiles {
        report.bump("profile.short_sequences", profile.segments.short_sequences as u64);
        report.bump("profile.empty_segments", profile.segments.empty_segments as u64);
        for (block, _) in profile.top_blocks.iter().take(5) {
            let freqs = profile.segments.freqs.get(block).copied().unwrap_or([0.0; 3]);
            segment_csv.push_str(&format!(
                "{},{},{:?},{:?},{:?}\n",
                profile.family_id, block, freqs[0], freqs[1], freqs[2]
            ));
        }
        docs.push(ProfileDoc {
            family_id: profile.family_id,
            display_name: config.family_names.get(&profile.family_id).cloned(),
            members: families[&profile.family_id].len(),
            letter_counts: profile
                .letter_counts
                .iter()
                .map(|(l, c)| (l.to_string(), *c))
                .collect(),
            top_blocks: profile
                .top_blocks
                .iter()
                .map(|(b, c)| (b.to_string(), *c))
                .collect(),
            unique_blocks: profile
                .unique_blocks
                .iter()
                .map(|(b, c)| (b.to_string(), *c))
                .collect(),
            top5_trends: profile
                .top5_trends
                .iter()
                .map(|(b, t)| (b.to_string(), format!("{:?}", t).to_lowercase()))
                .collect(),
            segment_totals: profile.segments.segment_totals,
            short_sequences: profile.segments.short_sequences,
            empty_segments: profile.segments.empty_segments,
        });
    }
    formats::write_json(&out_dir.join(PROFILES_FILE), &docs)?;
    formats::write_string(&out_dir.join(SEGMENT_FREQS_FILE), &segment_csv)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Stage: align

#[derive(Serialize, Deserialize)]
struct AlignedRow {
    family_id: usize,
    group_index: usize,
    account_id: String,
    blocks: Vec<String>,
}

pub fn stage_align(
    sequences: &[BehaviourSequence],
    assignment: &FamilyAssignment,
    config: &PipelineConfig,
    out_dir: &Path,
    report: &mut RunReport,
) -> Result<Vec<AlignedFamily>> {
    let scoring = config.msa.scoring();
    let families = family_members(sequences, assignment);
    let mut aligned_families = Vec::with_capacity(families.len());
    let mut rows = String::new();
    let mut consensus_csv = String::from("family_id,group_index,position,consensus,conservation\n");
    let mut fasta_files = Vec::new();

    for (&family_id, members) in &families {
        let owned: Vec<BehaviourSequence> = members.iter().map(|s| (*s).clone()).collect();
        let (aligned, too_small) = align_family(family_id, &owned, &scoring)?;
        if too_small {
            report.bump("align.small_families", 1);
        }
        for group in &aligned.groups {
            for member in &group.members {
                let row = AlignedRow {
                    family_id,
                    group_index: group.group_index,
                    account_id: member.account_id.clone(),
                    blocks: member.blocks.iter().map(|b| b.to_string()).collect(),
                };
                rows.push_str(&serde_json::to_string(&row)?);
                rows.push('\n');
            }
            for (position, (block, conservation)) in consensus(group).iter().enumerate() {
                consensus_csv.push_str(&format!(
                    "{},{},{},{},{:?}\n",
                    family_id, group.group_index, position, block, conservation
                ));
            }
        }
        let fasta_name = format!("aligned_family_{}.fasta", family_id);
        formats::write_string(&out_dir.join(&fasta_name), &formats::alignment_fasta(&aligned))?;
        fasta_files.push(fasta_name);
        aligned_families.push(aligned);
    }
    formats::write_string(&out_dir.join(ALIGNED_FILE), &rows)?;
    formats::write_string(&out_dir.join(CONSENSUS_FILE), &consensus_csv)?;
    Ok(aligned_families)
}

pub fn load_aligned(out_dir: &Path) -> Result<Vec<AlignedFamily>> {
    let path = out_dir.join(ALIGNED_FILE);
    if !path.exists() {
        return Err(CliError::MissingArtifact(path));
    }
    let raw = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let mut families: BTreeMap<usize, BTreeMap<usize, Vec<AlignedSequence>>> = BTreeMap::new();
    for line in raw.lines().filter(|l| !l.trim().is_empty()) {
        let row: AlignedRow = serde_json::from_str(line)?;
        let blocks = row
            .blocks
            .iter()
            .map(|s| Block::parse(s))
            .collect::<botdna_core::Result<Vec<Block>>>()
            .map_err(|e| CliError::BadArtifact {
                path: path.clone(),
                reason: e.to_string(),
            })?;
        families
            .entry(row.family_id)
            .or_default()
            .entry(row.group_index)
            .or_default()
            .push(AlignedSequence {
                account_id: row.account_id,
                blocks,
            });
    }
    Ok(families
        .into_iter()
        .map(|(family_id, groups)| AlignedFamily {
            family_id,
            groups: groups
                .into_iter()
                .map(|(group_index, members)| {
                    let aligned_len = members.first().map_or(0, |m| m.blocks.len());
                    AlignedGroup {
                        group_index,
                        members,
                        aligned_len,
                    }
                })
                .collect(),
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Stage: mutations

#[derive(Serialize, Deserialize)]
struct BlockProfileDoc {
    block: String,
    total: u64,
    proportions: BTreeMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
struct HotspotDoc {
    group_index: usize,
    position: usize,
    score: f64,
}

#[derive(Serialize, Deserialize)]
struct MutationStatsDoc {
    family_id: usize,
    primary_total: u64,
    identity_total: u64,
    match_cells: u64,
    empty_cells: u64,
    unclassified_cells: u64,
    primary_proportions: BTreeMap<String, f64>,
    with_identity_proportions: BTreeMap<String, f64>,
    top_mutated_blocks: Vec<BlockProfileDoc>,
    substitution_frequencies: BTreeMap<String, f64>,
    hotspots: Vec<HotspotDoc>,
}

pub fn stage_mutations(
    aligned: &[AlignedFamily],
    out_dir: &Path,
    report: &mut RunReport,
) -> Result<Vec<FamilyMutations>> {
    let header = "family_id,group_index,source,target,position,type,block_a,block_b,letter_from,letter_to";
    let mut csv_rows: Vec<String> = Vec::new();
    let mut stats_docs = Vec::new();
    let mut scans = Vec::with_capacity(aligned.len());

    for family in aligned {
        let scan = detect_family_mutations(family);
        report.bump("mutations.unclassified_cells", scan.unclassified_cells);
        for event in &scan.events {
            let (from, to) = event
                .sub_letter_pair
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .unwrap_or_default();
            csv_rows.push(format!(
                "{},{},{},{},{},{},{},{},{},{}",
                event.family_id,
                event.group_index,
                event.source_id,
                event.target_id,
                event.position,
                event.mutation_type.name(),
                event.block_a,
                event.block_b,
                from,
                to
            ));
        }

        let empty_cells = scan
            .events
            .iter()
            .filter(|e| e.mutation_type == MutationType::Empty)
            .count() as u64;
        let doc = match mutation_type_frequencies(&scan.events) {
            Ok(freqs) => {
                let hotspots = hotspot_scores(&scan.events)?;
                MutationStatsDoc {
                    family_id: family.family_id,
                    primary_total: freqs.primary_total,
                    identity_total: freqs.identity_total,
                    match_cells: scan.match_cells,
                    empty_cells,
                    unclassified_cells: scan.unclassified_cells,
                    primary_proportions: freqs
                        .primary
                        .iter()
                        .map(|(t, v)| (t.name().to_string(), *v))
                        .collect(),
                    with_identity_proportions: freqs
                        .with_identity
                        .iter()
                        .map(|(t, v)| (t.name().to_string(), *v))
                        .collect(),
                    top_mutated_blocks: block_mutation_profiles(&scan.events)
                        .into_iter()
                        .take(5)
                        .map(|p| BlockProfileDoc {
                            block: p.block.to_string(),
                            total: p.total,
                            proportions: p
                                .proportions
                                .iter()
                                .map(|(t, v)| (t.name().to_string(), *v))
                                .collect(),
                        })
                        .collect(),
                    substitution_frequencies: substitution_frequencies(&scan.events, family)
                        .iter()
                        .map(|((l1, l2), v)| (format!("{}->{}", l1, l2), *v))
                        .collect(),
                    hotspots: hotspots
                        .iter()
                        .map(|(&(group_index, position), &score)| HotspotDoc {
                            group_index,
                            position,
                            score,
                        })
                        .collect(),
                }
            }
            Err(botdna_core::Error::NoMutations) => {
                report.bump("mutations.families_without_mutations", 1);
                MutationStatsDoc {
                    family_id: family.family_id,
                    primary_total: 0,
                    identity_total: 0,
                    match_cells: scan.match_cells,
                    empty_cells,
                    unclassified_cells: scan.unclassified_cells,
                    primary_proportions: BTreeMap::new(),
                    with_identity_proportions: BTreeMap::new(),
                    top_mutated_blocks: Vec::new(),
                    substitution_frequencies: BTreeMap::new(),
                    hotspots: Vec::new(),
                }
            }
            Err(other) => return Err(other.into()),
        };
        stats_docs.push(doc);
        scans.push(scan);
    }

    formats::write_lines(&out_dir.join(MUTATION_EVENTS_FILE), header, csv_rows)?;
    formats::write_json(&out_dir.join(MUTATION_STATS_FILE), &stats_docs)?;
    Ok(scans)
}

// ---------------------------------------------------------------------------
// Stage: evolve

#[derive(Serialize, Deserialize)]
struct ConfusionDoc {
    tp: u64,
    fp: u64,
    #[serde(rename = "fn")]
    fn_: u64,
    tn: u64,
    precision: f64,
    recall: f64,
    f1: f64,
    degenerate: bool,
}

#[derive(Serialize, Deserialize)]
struct SharedSummaryDoc {
    average: f64,
    median: f64,
    min: f64,
    max: f64,
    sparsity: f64,
}

#[derive(Serialize, Deserialize)]
struct FamilyEvolutionDoc {
    family_id: usize,
    accounts: usize,
    mutation_set_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    shared_summary: Option<SharedSummaryDoc>,
    most_related: Vec<String>,
    least_related: Vec<String>,
    groups_overlap: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    confusion_most_related: Option<ConfusionDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    confusion_least_related: Option<ConfusionDoc>,
    transfers_most_related: u64,
}

#[derive(Serialize, Deserialize)]
struct DensityDoc {
    family_a: usize,
    family_b: usize,
    mutations_a: usize,
    mutations_b: usize,
    shared: u64,
    density: f64,
}

#[derive(Serialize, Deserialize)]
struct EvolutionDoc {
    families: Vec<FamilyEvolutionDoc>,
    densities: Vec<DensityDoc>,
}

fn confusion_doc(c: botdna_core::evolution::TransferConfusion) -> ConfusionDoc {
    ConfusionDoc {
        tp: c.tp,
        fp: c.fp,
        fn_: c.fn_,
        tn: c.tn,
        precision: c.precision,
        recall: c.recall,
        f1: c.f1,
        degenerate: c.degenerate,
    }
}

pub fn stage_evolve(
    sequences: &[BehaviourSequence],
    assignment: &FamilyAssignment,
    matrix: &SimilarityMatrix,
    config: &PipelineConfig,
    out_dir: &Path,
    report: &mut RunReport,
) -> Result<()> {
    // Alignment-free scans, one per account, in matrix order.
    let mut scans: Vec<Vec<ScanMutation>> = Vec::with_capacity(sequences.len());
    let mut scan_rows: Vec<String> = Vec::new();
    for seq in sequences {
        let events = scan_mutations(seq)?;
        for event in &events {
            scan_rows.push(format!(
                "{},{},{},{},{}",
                event.account_id,
                event.position,
                event.mutation_type.name(),
                event.block,
                event
                    .substituted_from
                    .map(|b| b.to_string())
                    .unwrap_or_default()
            ));
        }
        scans.push(events);
    }
    formats::write_lines(
        &out_dir.join(SCAN_EVENTS_FILE),
        "account_id,position,type,block,substituted_from",
        scan_rows,
    )?;

    let key_sets: Vec<std::collections::BTreeSet<MutationKey>> =
        scans.iter().map(|events| mutation_key_set(events)).collect();

    let mut family_docs = Vec::new();
    let mut family_sets: BTreeMap<usize, std::collections::BTreeSet<MutationKey>> = BTreeMap::new();
    let members_by_family: BTreeMap<usize, Vec<usize>> = assignment.members();

    let mut transfer_files = Vec::new();
    for (&family_id, members) in &members_by_family {
        let mut family_set = std::collections::BTreeSet::new();
        for &i in members {
            family_set.extend(key_sets[i].iter().copied());
        }

        let accounts: Vec<(String, std::collections::BTreeSet<MutationKey>)> = members
            .iter()
            .map(|&i| (matrix.ids()[i].clone(), key_sets[i].clone()))
            .collect();
        let shared_summary = if accounts.len() >= 2 {
            let shared = family_shared_matrix(family_id, &accounts)?;
            formats::write_string(
                &out_dir.join(format!("shared_matrix_family_{}.csv", family_id)),
                &formats::matrix_csv(&shared.ids, &shared.values),
            )?;
            Some(SharedSummaryDoc {
                average: shared.summary.average,
                median: shared.summary.median,
                min: shared.summary.min,
                max: shared.summary.max,
                sparsity: shared.summary.sparsity,
            })
        } else {
            report.bump("evolve.families_too_small_for_matrix", 1);
            None
        };

        let ranked = rank_by_avg_similarity(matrix, members, config.rank_group_size);
        if ranked.overlapping {
            report.bump("evolve.overlapping_rank_groups", 1);
        }
        let group_sets = |indices: &[usize]| -> Vec<std::collections::BTreeSet<MutationKey>> {
            indices.iter().map(|&i| key_sets[i].clone()).collect()
        };
        let confusion_for = |indices: &[usize]| -> Result<Option<ConfusionDoc>> {
            if indices.len() < 2 || family_set.is_empty() {
                return Ok(None);
            }
            Ok(Some(confusion_doc(transfer_confusion(
                &group_sets(indices),
                &family_set,
            )?)))
        };
        let confusion_most_related = confusion_for(&ranked.most_related)?;
        let confusion_least_related = confusion_for(&ranked.least_related)?;

        // Transfer log across ordered most-related pairs.
        let mut transfer_rows: Vec<String> = Vec::new();
        let mut transfers_most_related = 0u64;
        for &i in &ranked.most_related {
            for &j in &ranked.most_related {
                if i == j {
                    continue;
                }
                for transfer in detect_transfers(&scans[i], &scans[j]) {
                    transfers_most_related += 1;
                    transfer_rows.push(format!(
                        "{},{},{},{},{},{},{}",
                        matrix.ids()[i],
                        matrix.ids()[j],
                        transfer.block,
                        transfer.source_type.name(),
                        transfer.target_type.name(),
                        transfer.source_position,
                        transfer.target_position
                    ));
                }
            }
        }
        let transfer_name = format!("transfers_family_{}.csv", family_id);
        formats::write_lines(
            &out_dir.join(&transfer_name),
            "source,target,block,source_type,target_type,source_position,target_position",
            transfer_rows,
        )?;
        transfer_files.push(transfer_name);

        family_docs.push(FamilyEvolutionDoc {
            family_id,
            accounts: members.len(),
            mutation_set_size: family_set.len(),
            shared_summary,
            most_related: ranked.most_related.iter().map(|&i| matrix.ids()[i].clone()).collect(),
            least_related: ranked
                .least_related
                .iter()
                .map(|&i| matrix.ids()[i].clone())
                .collect(),
            groups_overlap: ranked.overlapping,
            confusion_most_related,
            confusion_least_related,
            transfers_most_related,
        });
        family_sets.insert(family_id, family_set);
    }

    let mut densities = Vec::new();
    let family_ids: Vec<usize> = family_sets.keys().copied().collect();
    for (i, &family_a) in family_ids.iter().enumerate() {
        for &family_b in &family_ids[i + 1..] {
            let (shared, density) =
                between_family_density(&family_sets[&family_a], &family_sets[&family_b]);
            densities.push(DensityDoc {
                family_a,
                family_b,
                mutations_a: family_sets[&family_a].len(),
                mutations_b: family_sets[&family_b].len(),
                shared,
                density,
            });
        }
    }

    formats::write_json(
        &out_dir.join(EVOLUTION_FILE),
        &EvolutionDoc {
            families: family_docs,
            densities,
        },
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Stage: events

#[derive(Serialize, Deserialize)]
struct FamilyEventDoc {
    family_id: usize,
    monthly_counts: Vec<u64>,
    participants_before: u64,
    participants_during: u64,
    participants_after: u64,
    participants: Vec<String>,
    mean_participant_similarity: f64,
}

pub fn stage_events(
    corpus: &Corpus,
    matrix: &SimilarityMatrix,
    assignment: &FamilyAssignment,
    config: &PipelineConfig,
    out_dir: &Path,
) -> Result<Vec<String>> {
    let mut files = Vec::new();
    for event in &config.events {
        let stats = run_event_study(corpus, matrix, &assignment.families, event)?;

        let docs: Vec<FamilyEventDoc> = stats
            .iter()
            .map(|s| FamilyEventDoc {
                family_id: s.family_id,
                monthly_counts: s.monthly_counts.to_vec(),
                participants_before: s.participants_before,
                participants_during: s.participants_during,
                participants_after: s.participants_after,
                participants: s
                    .participants
                    .iter()
                    .map(|&i| matrix.ids()[i].clone())
                    .collect(),
                mean_participant_similarity: s.mean_participant_similarity,
            })
            .collect();
        let json_name = format!("events_{}.json", event.name);
        formats::write_json(&out_dir.join(&json_name), &docs)?;
        files.push(json_name);

        let mut monthly = String::from("family_id,month,count\n");
        for s in &stats {
            for (month0, count) in s.monthly_counts.iter().enumerate() {
                monthly.push_str(&format!("{},{},{}\n", s.family_id, month0 + 1, count));
            }
        }
        let monthly_name = format!("events_{}_monthly.csv", event.name);
        formats::write_string(&out_dir.join(&monthly_name), &monthly)?;
        files.push(monthly_name);

        let mut daily = String::from("family_id,account_id,day_offset,count\n");
        for s in &stats {
            for (&account_index, offsets) in &s.daily_counts {
                for (offset, count) in offsets {
                    daily.push_str(&format!(
                        "{},{},{},{}\n",
                        s.family_id,
                        matrix.ids()[account_index],
                        offset,
                        count
                    ));
                }
            }
        }
        let daily_name = format!("events_{}_daily.csv", event.name);
        formats::write_string(&out_dir.join(&daily_name), &daily)?;
        files.push(daily_name);
    }
    Ok(files)
}

// ---------------------------------------------------------------------------
// Full pipeline

/// Run every stage, persisting artifacts and the manifest. Returns the
/// manifest.
pub fn run_pipeline(config: &PipelineConfig, out_dir: &Path) -> Result<Manifest> {
    config.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut manifest = Manifest::default();
    let mut report = RunReport::default();

    let corpus = stage_ingest(config, out_dir).map_err(|e| e.in_stage("ingest"))?;
    manifest.record(
        out_dir,
        "ingest",
        serde_json::json!({"input": config.input, "year_range": config.year_range}),
        &[CORPUS_FILE.into(), SKIP_REPORT_FILE.into()],
    )?;

    let sequences = stage_encode(&corpus, out_dir).map_err(|e| e.in_stage("encode"))?;
    manifest.record(out_dir, "encode", serde_json::json!({}), &[SEQUENCES_FILE.into()])?;

    let (vectors, matrix) = stage_similarity(&sequences, config.threads, out_dir)
        .map_err(|e| e.in_stage("similarity"))?;
    manifest.record(
        out_dir,
        "similarity",
        serde_json::json!({}),
        &[SIMILARITY_CSV.into(), SIMILARITY_BIN.into()],
    )?;

    let assignment =
        stage_cluster(&matrix, &vectors, config, out_dir).map_err(|e| e.in_stage("cluster"))?;
    manifest.record(
        out_dir,
        "cluster",
        serde_json::json!({"k": config.k, "validation_k_max": config.validation_k_max}),
        &[DENDROGRAM_FILE.into(), ASSIGNMENT_FILE.into(), METRICS_FILE.into()],
    )?;

    stage_profile(&sequences, &assignment, config, out_dir, &mut report)
        .map_err(|e| e.in_stage("profile"))?;
    manifest.record(
        out_dir,
        "profile",
        serde_json::json!({"trend_tau": config.trend_tau}),
        &[PROFILES_FILE.into(), SEGMENT_FREQS_FILE.into()],
    )?;

    let aligned = stage_align(&sequences, &assignment, config, out_dir, &mut report)
        .map_err(|e| e.in_stage("align"))?;
    let mut align_files: Vec<String> = vec![ALIGNED_FILE.into(), CONSENSUS_FILE.into()];
    for family in &aligned {
        align_files.push(format!("aligned_family_{}.fasta", family.family_id));
    }
    manifest.record(out_dir, "align", serde_json::json!({"msa": config.msa}), &align_files)?;

    stage_mutations(&aligned, out_dir, &mut report).map_err(|e| e.in_stage("mutations"))?;
    manifest.record(
        out_dir,
        "mutations",
        serde_json::json!({}),
        &[MUTATION_EVENTS_FILE.into(), MUTATION_STATS_FILE.into()],
    )?;

    stage_evolve(&sequences, &assignment, &matrix, config, out_dir, &mut report)
        .map_err(|e| e.in_stage("evolve"))?;
    let mut evolve_files: Vec<String> = vec![SCAN_EVENTS_FILE.into(), EVOLUTION_FILE.into()];
    let mut family_ids: Vec<usize> = assignment.members().keys().copied().collect();
    family_ids.sort_unstable();
    for family_id in &family_ids {
        let shared = format!("shared_matrix_family_{}.csv", family_id);
        if out_dir.join(&shared).exists() {
            evolve_files.push(shared);
        }
        evolve_files.push(format!("transfers_family_{}.csv", family_id));
    }
    manifest.record(
        out_dir,
        "evolve",
        serde_json::json!({"rank_group_size": config.rank_group_size}),
        &evolve_files,
    )?;

    if !config.events.is_empty() {
        let files = stage_events(&corpus, &matrix, &assignment, config, out_dir)
            .map_err(|e| e.in_stage("events"))?;
        manifest.record(
            out_dir,
            "events",
            serde_json::json!({"events": config.events}),
            &files,
        )?;
    }

    formats::write_json(&out_dir.join(RUN_REPORT_FILE), &report)?;
    formats::write_json(&out_dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use botdna_core::encoding::build_sequence;

    fn pooled_sequences(count: usize, seed: u64) -> Vec<BehaviourSequence> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let pool: Vec<Block> = (0..12).map(|i| Block::from_index(i * 54).unwrap()).collect();
        (0..count)
            .map(|i| {
                let len = rng.gen_range(5..=60);
                let posts: Vec<(i64, Block)> = (0..len)
                    .map(|t| (t as i64, pool[rng.gen_range(0..pool.len())]))
                    .collect();
                build_sequence(&format!("acc{:03}", i), &posts).unwrap()
            })
            .collect()
    }

    #[test]
    fn parallel_similarity_matches_serial_exactly() {
        let sequences = pooled_sequences(50, 99);
        let vectors: Vec<BlockFrequencyVector> =
            sequences.iter().map(|s| vectorize(s).unwrap()).collect();
        let serial = similarity_matrix(&vectors).unwrap();
        for threads in [2, 4, 8] {
            let parallel = parallel_similarity(&vectors, threads).unwrap();
            assert_eq!(serial.values(), parallel.values(), "threads = {}", threads);
        }
    }

    #[test]
    fn sequence_and_alignment_artifacts_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let sequences = pooled_sequences(8, 7);
        written_eq(&sequences, dir.path());
    }

    fn written_eq(sequences: &[BehaviourSequence], dir: &Path) {
        let mut lines = String::new();
        for seq in sequences {
            let row = SequenceRow {
                account_id: seq.account_id.clone(),
                blocks: seq.blocks.iter().map(|b| b.to_string()).collect(),
                timestamps: seq.timestamps.clone().unwrap_or_default(),
            };
            lines.push_str(&serde_json::to_string(&row).unwrap());
            lines.push('\n');
        }
        formats::write_string(&dir.join(SEQUENCES_FILE), &lines).unwrap();
        let loaded = load_sequences(dir).unwrap();
        assert_eq!(loaded, sequences);

        // Aligned artifact round trip.
        let assignment = FamilyAssignment {
            k: 1,
            families: vec![1; sequences.len()],
        };
        let config = PipelineConfig::default();
        let mut report = RunReport::default();
        let aligned = stage_align(sequences, &assignment, &config, dir, &mut report).unwrap();
        let loaded = load_aligned(dir).unwrap();
        assert_eq!(loaded, aligned);
    }
}
