//! Symbolic alphabet, behavioural blocks, and sequence construction.
//!
//! Every post is reduced to seven categorical features and encoded as a
//! fixed-order 7-letter block. An account's timestamp-ordered blocks,
//! concatenated, form its behavioural sequence. The non-gap block
//! vocabulary has exactly 3*2*3*2*2*3*3 = 648 members.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Number of letters per block (one per categorical feature).
pub const BLOCK_LEN: usize = 7;

/// Number of distinct gap-free blocks.
pub const VOCAB_SIZE: usize = 648;

/// The gap symbol used by alignment.
pub const GAP: u8 = b'-';

/// Letters admitted at each block position, in fixed feature order:
/// posting action, URL, media, emoji, hashtag, text, sentiment.
pub const POSITION_ALPHABETS: [&[u8]; BLOCK_LEN] =
    [b"TRY", b"UX", b"IVM", b"JK", b"HZ", b"DQE", b"PNL"];

/// The seven categorical features, in block position order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Feature {
    PostingAction,
    Url,
    Media,
    Emoji,
    Hashtag,
    Text,
    Sentiment,
}

impl Feature {
    /// All features in block position order.
    pub const ALL: [Feature; BLOCK_LEN] = [
        Feature::PostingAction,
        Feature::Url,
        Feature::Media,
        Feature::Emoji,
        Feature::Hashtag,
        Feature::Text,
        Feature::Sentiment,
    ];

    /// Block position occupied by this feature.
    pub fn position(self) -> usize {
        match self {
            Feature::PostingAction => 0,
            Feature::Url => 1,
            Feature::Media => 2,
            Feature::Emoji => 3,
            Feature::Hashtag => 4,
            Feature::Text => 5,
            Feature::Sentiment => 6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PostingAction {
    Tweet,
    Retweet,
    Reply,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UrlPresence {
    Present,
    Absent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MediaKind {
    Image,
    Video,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EmojiPresence {
    Present,
    Absent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HashtagPresence {
    Present,
    Absent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TextClass {
    Duplicate,
    Unique,
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sentiment {
    Positive,
    Negative,
    Neutral,
}

/// The seven categorical feature values extracted from one post.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PostFeatures {
    pub action: PostingAction,
    pub url: UrlPresence,
    pub media: MediaKind,
    pub emoji: EmojiPresence,
    pub hashtag: HashtagPresence,
    pub text: TextClass,
    pub sentiment: Sentiment,
}

impl PostFeatures {
    /// Encode into the fixed-order 7-letter block.
    pub fn encode(&self) -> Block {
        encode_post(self)
    }
}

/// One symbol of the behavioural alphabet, including the gap character.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(u8);

impl Letter {
    /// The gap letter `-`.
    pub const GAP: Letter = Letter(GAP);

    /// Wrap a raw symbol, requiring it to be a known letter or the gap.
    pub fn new(symbol: u8) -> Option<Letter> {
        if symbol == GAP || Letter(symbol).feature().is_some() {
            Some(Letter(symbol))
        } else {
            None
        }
    }

    pub fn symbol(self) -> u8 {
        self.0
    }

    pub fn is_gap(self) -> bool {
        self.0 == GAP
    }

    /// The feature this letter encodes, or `None` for the gap.
    pub fn feature(self) -> Option<Feature> {
        for (pos, alphabet) in POSITION_ALPHABETS.iter().enumerate() {
            if alphabet.contains(&self.0) {
                return Some(Feature::ALL[pos]);
            }
        }
        None
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0 as char)
    }
}

/// A fixed-order 7-letter motif encoding one post, or the all-gap block
/// introduced by alignment. Partially gapped blocks are rejected, so a
/// block is always either fully encoded or a pure gap.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Block([u8; BLOCK_LEN]);

impl Block {
    /// The all-gap block `-------`.
    pub const GAP_BLOCK: Block = Block([GAP; BLOCK_LEN]);

    /// Build a block from raw symbols, enforcing the per-position alphabet.
    /// Either all seven symbols are gaps, or none are.
    pub fn from_letters(letters: [u8; BLOCK_LEN]) -> Result<Block> {
        if letters == [GAP; BLOCK_LEN] {
            return Ok(Block::GAP_BLOCK);
        }
        for (position, &symbol) in letters.iter().enumerate() {
            if !POSITION_ALPHABETS[position].contains(&symbol) {
                return Err(Error::InvalidLetter { position, symbol });
            }
        }
        Ok(Block(letters))
    }

    /// Parse a 7-character string such as `"TXMKZDL"` or `"-------"`.
    pub fn parse(s: &str) -> Result<Block> {
        let bytes = s.as_bytes();
        if bytes.len() != BLOCK_LEN {
            return Err(Error::BadBlockLength { got: bytes.len() });
        }
        let mut letters = [0u8; BLOCK_LEN];
        letters.copy_from_slice(bytes);
        Block::from_letters(letters)
    }

    pub fn is_gap(&self) -> bool {
        *self == Block::GAP_BLOCK
    }

    pub fn letters(&self) -> [Letter; BLOCK_LEN] {
        let mut out = [Letter::GAP; BLOCK_LEN];
        for (i, &b) in self.0.iter().enumerate() {
            out[i] = Letter(b);
        }
        out
    }

    pub fn symbols(&self) -> &[u8; BLOCK_LEN] {
        &self.0
    }

    /// Letter at a block position.
    pub fn letter(&self, position: usize) -> Letter {
        Letter(self.0[position])
    }

    /// Number of positions whose letters differ. Meaningful for gap-free
    /// blocks; a gap block differs from any encoded block at all positions.
    pub fn hamming(&self, other: &Block) -> usize {
        self.0
            .iter()
            .zip(other.0.iter())
            .filter(|(a, b)| a != b)
            .count()
    }

    /// Number of positions whose letters agree.
    pub fn matching_letters(&self, other: &Block) -> usize {
        BLOCK_LEN - self.hamming(other)
    }

    /// Dense index of a gap-free block in `0..VOCAB_SIZE`.
    pub fn index(&self) -> Option<usize> {
        if self.is_gap() {
            return None;
        }
        let mut idx = 0usize;
        for (position, &symbol) in self.0.iter().enumerate() {
            let alphabet = POSITION_ALPHABETS[position];
            let digit = alphabet.iter().position(|&c| c == symbol)?;
            idx = idx * alphabet.len() + digit;
        }
        Some(idx)
    }

    /// Inverse of [`Block::index`].
    pub fn from_index(mut index: usize) -> Option<Block> {
        if index >= VOCAB_SIZE {
            return None;
        }
        let mut letters = [0u8; BLOCK_LEN];
        for position in (0..BLOCK_LEN).rev() {
            let alphabet = POSITION_ALPHABETS[position];
            letters[position] = alphabet[index % alphabet.len()];
            index /= alphabet.len();
        }
        Some(Block(letters))
    }

    /// Decode back to feature values. Errors on the gap block.
    pub fn decode(&self) -> Result<PostFeatures> {
        decode_block(self)
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in self.0.iter() {
            write!(f, "{}", b as char)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl core::str::FromStr for Block {
    type Err = Error;

    fn from_str(s: &str) -> Result<Block> {
        Block::parse(s)
    }
}

/// Encode one post's feature values as a block, in the fixed feature order
/// posting action, URL, media, emoji, hashtag, text, sentiment.
pub fn encode_post(features: &PostFeatures) -> Block {
    Block([
        match features.action {
            PostingAction::Tweet => b'T',
            PostingAction::Retweet => b'R',
            PostingAction::Reply => b'Y',
        },
        match features.url {
            UrlPresence::Present => b'U',
            UrlPresence::Absent => b'X',
        },
        match features.media {
            MediaKind::Image => b'I',
            MediaKind::Video => b'V',
            MediaKind::None => b'M',
        },
        match features.emoji {
            EmojiPresence::Present => b'J',
            EmojiPresence::Absent => b'K',
        },
        match features.hashtag {
            HashtagPresence::Present => b'H',
            HashtagPresence::Absent => b'Z',
        },
        match features.text {
            TextClass::Duplicate => b'D',
            TextClass::Unique => b'Q',
            TextClass::Empty => b'E',
        },
        match features.sentiment {
            Sentiment::Positive => b'P',
            Sentiment::Negative => b'N',
            Sentiment::Neutral => b'L',
        },
    ])
}

/// Recover the feature values encoded by a gap-free block.
pub fn decode_block(block: &Block) -> Result<PostFeatures> {
    if block.is_gap() {
        return Err(Error::GapInBlock);
    }
    let s = block.0;
    Ok(PostFeatures {
        action: match s[0] {
            b'T' => PostingAction::Tweet,
            b'R' => PostingAction::Retweet,
            _ => PostingAction::Reply,
        },
        url: match s[1] {
            b'U' => UrlPresence::Present,
            _ => UrlPresence::Absent,
        },
        media: match s[2] {
            b'I' => MediaKind::Image,
            b'V' => MediaKind::Video,
            _ => MediaKind::None,
        },
        emoji: match s[3] {
            b'J' => EmojiPresence::Present,
            _ => EmojiPresence::Absent,
        },
        hashtag: match s[4] {
            b'H' => HashtagPresence::Present,
            _ => HashtagPresence::Absent,
        },
        text: match s[5] {
            b'D' => TextClass::Duplicate,
            b'Q' => TextClass::Unique,
            _ => TextClass::Empty,
        },
        sentiment: match s[6] {
            b'P' => Sentiment::Positive,
            b'N' => Sentiment::Negative,
            _ => Sentiment::Neutral,
        },
    })
}

/// One account's timestamp-ordered behavioural sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BehaviourSequence {
    pub account_id: String,
    pub blocks: Vec<Block>,
    /// Epoch seconds parallel to `blocks`, non-decreasing, when known.
    pub timestamps: Option<Vec<i64>>,
}

impl BehaviourSequence {
    /// Sequence length in letters: 7 times the block count.
    pub fn letter_len(&self) -> usize {
        self.blocks.len() * BLOCK_LEN
    }

    pub fn block_len(&self) -> usize {
        self.blocks.len()
    }

    /// True if no block of the sequence is a gap block.
    pub fn is_gap_free(&self) -> bool {
        self.blocks.iter().all(|b| !b.is_gap())
    }
}

/// Build an account's behavioural sequence by sorting its encoded posts by
/// timestamp. Equal timestamps keep their input order.
pub fn build_sequence(account_id: &str, posts: &[(i64, Block)]) -> Result<BehaviourSequence> {
    if posts.is_empty() {
        return Err(Error::EmptyPostList);
    }
    let mut ordered: Vec<(i64, Block)> = posts.to_vec();
    ordered.sort_by_key(|&(t, _)| t);
    let (timestamps, blocks) = ordered.into_iter().unzip();
    Ok(BehaviourSequence {
        account_id: String::from(account_id),
        blocks,
        timestamps: Some(timestamps),
    })
}
