//! Behavioural "digital DNA" analysis for account activity streams.
//!
//! Event histories are encoded as fixed-order 7-letter blocks, one per
//! post, and concatenated into per-account symbolic sequences. On top of
//! that representation this crate provides:
//!
//! * block-frequency vectors and all-pairs cosine similarity,
//! * average-linkage (UPGMA) clustering into behavioural families with
//!   validation metrics,
//! * per-family profiles: letter distributions, top and unique blocks,
//!   and life-cycle segment trends,
//! * within-family progressive multiple sequence alignment at block
//!   granularity,
//! * a six-type mutation taxonomy over aligned sequence pairs with
//!   frequency, substitution, and hotspot statistics,
//! * alignment-free mutation scans, shared-mutation matrices, mutation
//!   transferability scoring, and trigger-event aggregation.
//!
//! The crate is `no_std` (with `alloc`) and performs no IO; ingestion,
//! persistence, and the command-line pipeline live in the companion
//! `botdna-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod alignment;
pub mod clustering;
pub mod encoding;
pub mod error;
pub mod events;
pub mod evolution;
pub mod mutation;
pub mod profile;
pub mod similarity;

pub use crate::encoding::{
    build_sequence, decode_block, encode_post, BehaviourSequence, Block, Letter, PostFeatures,
};
pub use crate::error::{Error, Result};
