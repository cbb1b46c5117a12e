//! Deterministic lexicon-based sentiment fallback.
//!
//! Rows that already carry a sentiment label use it verbatim; everything
//! else is scored against the signed word lexicon shipped in
//! `data/sentiment_lexicon.txt`: score = (#positive tokens) - (#negative
//! tokens), positive when > 0, negative when < 0, else neutral.

use std::collections::HashSet;
use std::sync::OnceLock;

use botdna_core::encoding::Sentiment;

const LEXICON_SOURCE: &str = include_str!("../data/sentiment_lexicon.txt");

struct Lexicon {
    positive: HashSet<&'static str>,
    negative: HashSet<&'static str>,
}

fn lexicon() -> &'static Lexicon {
    static LEXICON: OnceLock<Lexicon> = OnceLock::new();
    LEXICON.get_or_init(|| {
        let mut positive = HashSet::new();
        let mut negative = HashSet::new();
        for line in LEXICON_SOURCE.lines() {
            let line = line.trim();
            if let Some(word) = line.strip_prefix('+') {
                positive.insert(word);
            } else if let Some(word) = line.strip_prefix('-') {
                negative.insert(word);
            }
        }
        Lexicon { positive, negative }
    })
}

/// Score free text against the lexicon.
pub fn score_text(text: &str) -> Sentiment {
    let lex = lexicon();
    let mut score = 0i64;
    for token in text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
    {
        let token = token.to_lowercase();
        if lex.positive.contains(token.as_str()) {
            score += 1;
        } else if lex.negative.contains(token.as_str()) {
            score -= 1;
        }
    }
    match score {
        s if s > 0 => Sentiment::Positive,
        s if s < 0 => Sentiment::Negative,
        _ => Sentiment::Neutral,
    }
}

/// A pre-labelled row keeps its label; otherwise the lexicon decides.
pub fn derive_sentiment(labelled: Option<Sentiment>, text: &str) -> Sentiment {
    labelled.unwrap_or_else(|| score_text(text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_neutral() {
        assert_eq!(score_text(""), Sentiment::Neutral);
    }

    #[test]
    fn single_positive_token() {
        assert_eq!(score_text("such a great day"), Sentiment::Positive);
    }

    #[test]
    fn negatives_outweigh() {
        assert_eq!(score_text("great product but awful, terrible support"), Sentiment::Negative);
    }

    #[test]
    fn label_passthrough_beats_text() {
        assert_eq!(
            derive_sentiment(Some(Sentiment::Negative), "wonderful amazing great"),
            Sentiment::Negative
        );
        assert_eq!(derive_sentiment(None, "i love this"), Sentiment::Positive);
    }

    #[test]
    fn tokenisation_is_case_and_punctuation_insensitive() {
        assert_eq!(score_text("GREAT!!!"), Sentiment::Positive);
        assert_eq!(score_text("the word greatest is not in the lexicon"), Sentiment::Neutral);
    }
}
