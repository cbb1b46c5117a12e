//! Artifact file formats: CSV and binary matrices, Newick dendrograms,
//! FASTA-like alignments, and deterministic JSON.
//!
//! The binary matrix layout is: magic `BDNM`, format version u32, account
//! count m as u64, then m length-prefixed UTF-8 ids (u32 length), then
//! m*m f64 values in row-major order. All integers and floats are
//! little-endian.

use std::fs;
use std::io::Write;
use std::path::Path;

use botdna_core::alignment::AlignedFamily;
use botdna_core::clustering::Dendrogram;
use botdna_core::similarity::SimilarityMatrix;

use crate::error::{CliError, Result};

const MATRIX_MAGIC: &[u8; 4] = b"BDNM";
const MATRIX_VERSION: u32 = 1;

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn write_string(path: &Path, content: &str) -> Result<()> {
    write_bytes(path, content.as_bytes())
}

/// Serialize as pretty JSON with a trailing newline.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut content = serde_json::to_string_pretty(value)?;
    content.push('\n');
    write_string(path, &content)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    if !path.exists() {
        return Err(CliError::MissingArtifact(path.to_path_buf()));
    }
    let raw = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(serde_json::from_str(&raw)?)
}

/// SHA-256 of a file, hex encoded.
pub fn file_sha256(path: &Path) -> Result<String> {
    use sha2::{Digest, Sha256};
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Square matrix CSV: header `account_id,<id1>,<id2>,...`, one row per
/// account with full precision values.
pub fn matrix_csv(ids: &[String], values: &[f64]) -> String {
    let m = ids.len();
    let mut out = String::from("account_id");
    for id in ids {
        out.push(',');
        out.push_str(id);
    }
    out.push('\n');
    for (i, id) in ids.iter().enumerate() {
        out.push_str(id);
        for j in 0..m {
            out.push(',');
            out.push_str(&format!("{:?}", values[i * m + j]));
        }
        out.push('\n');
    }
    out
}

/// Write the compact binary matrix layout.
pub fn write_matrix_binary(path: &Path, ids: &[String], values: &[f64]) -> Result<()> {
    let mut bytes: Vec<u8> = Vec::with_capacity(16 + values.len() * 8);
    bytes.extend_from_slice(MATRIX_MAGIC);
    bytes.extend_from_slice(&MATRIX_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(ids.len() as u64).to_le_bytes());
    for id in ids {
        let raw = id.as_bytes();
        bytes.extend_from_slice(&(raw.len() as u32).to_le_bytes());
        bytes.extend_from_slice(raw);
    }
    for value in values {
        bytes.extend_from_slice(&value.to_le_bytes());
    }
    write_bytes(path, &bytes)
}

/// Read the binary matrix layout back.
pub fn read_matrix_binary(path: &Path) -> Result<(Vec<String>, Vec<f64>)> {
    if !path.exists() {
        return Err(CliError::MissingArtifact(path.to_path_buf()));
    }
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let bad = |reason: &str| CliError::BadArtifact {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    if bytes.len() < 16 || &bytes[..4] != MATRIX_MAGIC {
        return Err(bad("missing BDNM magic"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != MATRIX_VERSION {
        return Err(bad("unsupported version"));
    }
    let m = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let mut cursor = 16usize;
    let mut ids = Vec::with_capacity(m);
    for _ in 0..m {
        if cursor + 4 > bytes.len() {
            return Err(bad("truncated id table"));
        }
        let len = u32::from_le_bytes(bytes[cursor..cursor + 4].try_into().unwrap()) as usize;
        cursor += 4;
        if cursor + len > bytes.len() {
            return Err(bad("truncated id"));
        }
        let id = std::str::from_utf8(&bytes[cursor..cursor + len])
            .map_err(|_| bad("id is not utf-8"))?;
        ids.push(id.to_string());
        cursor += len;
    }
    if bytes.len() - cursor != m * m * 8 {
        return Err(bad("value block has wrong size"));
    }
    let mut values = Vec::with_capacity(m * m);
    for chunk in bytes[cursor..].chunks_exact(8) {
        values.push(f64::from_le_bytes(chunk.try_into().unwrap()));
    }
    Ok((ids, values))
}

/// Load a similarity matrix from its binary artifact.
pub fn load_similarity(path: &Path) -> Result<SimilarityMatrix> {
    let (ids, values) = read_matrix_binary(path)?;
    SimilarityMatrix::from_parts(ids, values).map_err(|e| CliError::BadArtifact {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Render a dendrogram in Newick format. Branch lengths are the height
/// difference between a node and its parent merge; leaves sit at height 0.
/// Leaf names are passed through verbatim, so ids should avoid Newick
/// metacharacters (the pipeline's ids do).
pub fn newick(dendrogram: &Dendrogram, ids: &[String]) -> String {
    let m = dendrogram.n_observations();
    let steps = dendrogram.steps();
    fn subtree(
        node: usize,
        parent_height: f64,
        m: usize,
        steps: &[botdna_core::clustering::MergeStep],
        ids: &[String],
        out: &mut String,
    ) {
        if node < m {
            out.push_str(&ids[node]);
            out.push_str(&format!(":{:?}", parent_height));
        } else {
            let step = &steps[node - m];
            out.push('(');
            subtree(step.left, step.height, m, steps, ids, out);
            out.push(',');
            subtree(step.right, step.height, m, steps, ids, out);
            out.push(')');
            out.push_str(&format!(":{:?}", parent_height - step.height));
        }
    }
    let mut out = String::new();
    if m == 1 {
        out.push_str(&ids[0]);
    } else {
        let root = m + steps.len() - 1;
        let root_height = steps[root - m].height;
        let step = &steps[root - m];
        out.push('(');
        subtree(step.left, root_height, m, steps, ids, &mut out);
        out.push(',');
        subtree(step.right, root_height, m, steps, ids, &mut out);
        out.push(')');
    }
    out.push(';');
    out
}

/// FASTA-like rendering of an aligned family: one record per account,
/// blocks spelled out as letters, gap blocks as `-------`, wrapped at 70
/// characters.
pub fn alignment_fasta(family: &AlignedFamily) -> String {
    let mut out = String::new();
    for group in &family.groups {
        for member in &group.members {
            out.push_str(&format!(
                ">{} family={} group={}\n",
                member.account_id, family.family_id, group.group_index
            ));
            let letters: String = member.blocks.iter().map(|b| b.to_string()).collect();
            for chunk in letters.as_bytes().chunks(70) {
                out.push_str(std::str::from_utf8(chunk).expect("ascii"));
                out.push('\n');
            }
        }
    }
    out
}

/// Family assignment CSV: `account_id,family_id` rows.
pub fn assignment_csv(ids: &[String], families: &[usize]) -> String {
    let mut out = String::from("account_id,family_id\n");
    for (id, family) in ids.iter().zip(families) {
        out.push_str(&format!("{},{}\n", id, family));
    }
    out
}

/// Parse the assignment CSV back into (ids, family ids).
pub fn parse_assignment_csv(path: &Path) -> Result<(Vec<String>, Vec<usize>)> {
    if !path.exists() {
        return Err(CliError::MissingArtifact(path.to_path_buf()));
    }
    let raw = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut ids = Vec::new();
    let mut families = Vec::new();
    for (lineno, line) in raw.lines().enumerate() {
        if lineno == 0 || line.is_empty() {
            continue;
        }
        let (id, family) = line.split_once(',').ok_or_else(|| CliError::BadArtifact {
            path: path.to_path_buf(),
            reason: format!("line {} is not id,family", lineno + 1),
        })?;
        ids.push(id.to_string());
        families.push(family.parse::<usize>().map_err(|_| CliError::BadArtifact {
            path: path.to_path_buf(),
            reason: format!("bad family id on line {}", lineno + 1),
        })?);
    }
    Ok((ids, families))
}

/// Append one CSV row, quoting nothing: callers pass clean cells.
pub fn push_csv_row(out: &mut String, cells: &[String]) {
    out.push_str(&cells.join(","));
    out.push('\n');
}

/// Write with a buffered writer when assembling large CSV logs.
pub fn write_lines<I: IntoIterator<Item = String>>(path: &Path, header: &str, rows: I) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut writer = std::io::BufWriter::new(file);
    writeln!(writer, "{}", header).map_err(|e| CliError::io(path, e))?;
    for row in rows {
        writeln!(writer, "{}", row).map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}
