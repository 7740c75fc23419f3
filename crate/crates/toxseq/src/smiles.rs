//! Character-level SMILES lexing, vocabulary construction, integer
//! encoding/decoding, and lightweight structural validation.
//!
//! Tokenization is strictly per character: two-letter atoms such as `Cl` are
//! split into `C` and `l`. Chemical fidelity is not the tokenizer's job; the
//! network learns multi-character patterns on its own.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::tensor::Matrix;

/// Reserved index for right-padding.
pub const PAD_INDEX: usize = 0;
/// Reserved index for characters not present in the vocabulary.
pub const UNK_INDEX: usize = 1;
/// Placeholder rendered for unknown tokens when decoding. `?` is outside the
/// SMILES lexical classes, so it can never collide with a real vocabulary
/// character.
pub const UNK_CHAR: char = '?';

#[derive(Debug, Error, PartialEq)]
pub enum CodecError {
    #[error("corpus has no non-empty strings")]
    EmptyCorpus,
    #[error("cannot encode an empty string")]
    EmptyString,
    #[error("token {token} at position {position} is not valid for this vocabulary")]
    IndexOutOfVocabulary { position: usize, token: usize },
    #[error("vocabulary file is malformed at line {line}: {reason}")]
    MalformedVocabFile { line: usize, reason: String },
    #[error("io error: {0}")]
    Io(String),
}

/// Bijective character/index map with reserved padding and unknown slots.
///
/// Characters occupy indices `2..size` in first-appearance order over the
/// corpus they were built from, which makes construction deterministic for a
/// fixed corpus order. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    chars: Vec<char>,
    index_of: HashMap<char, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from a corpus scan. Empty strings in the corpus
    /// are skipped; if nothing remains the corpus is rejected.
    pub fn build<S: AsRef<str>>(corpus: &[S]) -> Result<Self, CodecError> {
        let mut chars = Vec::new();
        let mut index_of = HashMap::new();
        let mut saw_any = false;
        for s in corpus {
            for c in s.as_ref().chars() {
                saw_any = true;
                if !index_of.contains_key(&c) {
                    index_of.insert(c, 2 + chars.len());
                    chars.push(c);
                }
            }
        }
        if !saw_any {
            return Err(CodecError::EmptyCorpus);
        }
        Ok(Vocabulary { chars, index_of })
    }

    /// Total number of indices, reserved slots included.
    pub fn size(&self) -> usize {
        self.chars.len() + 2
    }

    /// Index of a character, if present. Never returns the reserved indices.
    pub fn index_of(&self, c: char) -> Option<usize> {
        self.index_of.get(&c).copied()
    }

    /// Character at an index. The reserved indices 0 and 1 map to no
    /// character.
    pub fn char_of(&self, index: usize) -> Option<char> {
        if index < 2 {
            None
        } else {
            self.chars.get(index - 2).copied()
        }
    }

    /// Serializes to the vocabulary file format: one `index<TAB>character`
    /// line per entry, sorted by index, reserved entries first.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        out.push_str("0\t<PAD>\n1\t<UNK>\n");
        for (i, c) in self.chars.iter().enumerate() {
            out.push_str(&format!("{}\t{}\n", i + 2, c));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), CodecError> {
        fs::write(path, self.to_file_string()).map_err(|e| CodecError::Io(e.to_string()))
    }

    pub fn from_file_string(text: &str) -> Result<Self, CodecError> {
        let mut chars = Vec::new();
        let mut index_of = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let malformed = |reason: &str| CodecError::MalformedVocabFile {
                line: lineno + 1,
                reason: reason.to_string(),
            };
            let (idx_str, entry) = line
                .split_once('\t')
                .ok_or_else(|| malformed("missing tab separator"))?;
            let idx: usize = idx_str
                .parse()
                .map_err(|_| malformed("index is not an integer"))?;
            if idx != lineno {
                return Err(malformed("indices are not contiguous from 0"));
            }
            match idx {
                0 if entry != "<PAD>" => return Err(malformed("index 0 must be <PAD>")),
                1 if entry != "<UNK>" => return Err(malformed("index 1 must be <UNK>")),
                0 | 1 => {}
                _ => {
                    let mut it = entry.chars();
                    let c = it.next().ok_or_else(|| malformed("empty character"))?;
                    if it.next().is_some() {
                        return Err(malformed("entry is more than one character"));
                    }
                    if index_of.insert(c, idx).is_some() {
                        return Err(malformed("duplicate character"));
                    }
                    chars.push(c);
                }
            }
        }
        if chars.is_empty() && index_of.is_empty() && text.lines().count() < 2 {
            return Err(CodecError::MalformedVocabFile {
                line: 1,
                reason: "missing reserved entries".to_string(),
            });
        }
        Ok(Vocabulary { chars, index_of })
    }

    pub fn load(path: &Path) -> Result<Self, CodecError> {
        let text = fs::read_to_string(path).map_err(|e| CodecError::Io(e.to_string()))?;
        Self::from_file_string(&text)
    }
}

/// Fixed-length integer token sequence plus its true (pre-padding) length.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedSequence {
    pub tokens: Vec<usize>,
    pub true_length: usize,
}

/// Encodes a string to indices, right-padded to `max_len`. Unknown characters
/// map to [`UNK_INDEX`]. Returns the sequence and a flag that is true when
/// the input was longer than `max_len` and got truncated.
pub fn encode(
    vocab: &Vocabulary,
    smiles: &str,
    max_len: usize,
) -> Result<(EncodedSequence, bool), CodecError> {
    assert!(max_len >= 1, "max_len must be at least 1");
    if smiles.is_empty() {
        return Err(CodecError::EmptyString);
    }
    let mut tokens = Vec::with_capacity(max_len);
    let mut truncated = false;
    for c in smiles.chars() {
        if tokens.len() == max_len {
            truncated = true;
            break;
        }
        tokens.push(vocab.index_of(c).unwrap_or(UNK_INDEX));
    }
    let true_length = tokens.len();
    tokens.resize(max_len, PAD_INDEX);
    Ok((
        EncodedSequence {
            tokens,
            true_length,
        },
        truncated,
    ))
}

/// Inverse of [`encode`] over the non-padded prefix. Unknown tokens render
/// as [`UNK_CHAR`].
pub fn decode(vocab: &Vocabulary, seq: &EncodedSequence) -> Result<String, CodecError> {
    if seq.true_length == 0 || seq.true_length > seq.tokens.len() {
        return Err(CodecError::IndexOutOfVocabulary {
            position: 0,
            token: seq.tokens.first().copied().unwrap_or(0),
        });
    }
    let mut out = String::with_capacity(seq.true_length);
    for (position, &token) in seq.tokens[..seq.true_length].iter().enumerate() {
        if token == UNK_INDEX {
            out.push(UNK_CHAR);
        } else {
            match vocab.char_of(token) {
                Some(c) => out.push(c),
                None => return Err(CodecError::IndexOutOfVocabulary { position, token }),
            }
        }
    }
    Ok(out)
}

/// One-hot expansion of an encoded sequence, one row per token slot. This is
/// an inspection/export aid; the network consumes integer indices through its
/// embedding table, never these rows.
pub fn one_hot(vocab: &Vocabulary, seq: &EncodedSequence) -> Matrix {
    let mut m = Matrix::zeros(seq.tokens.len(), vocab.size());
    for (r, &t) in seq.tokens.iter().enumerate() {
        if t < vocab.size() {
            *m.at_mut(r, t) = 1.0;
        }
    }
    m
}

/// Lexical classes a SMILES character may belong to.
fn is_allowed_char(c: char) -> bool {
    c.is_ascii_uppercase()
        || c.is_ascii_lowercase()
        || c.is_ascii_digit()
        || matches!(c, '-' | '=' | '#' | '(' | ')' | '[' | ']' | '@' | '+' | '/' | '\\' | '.')
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IssueKind {
    EmptyString,
    DisallowedCharacter(char),
    UnmatchedOpenParen,
    UnmatchedCloseParen,
    UnpairedRingDigit(char),
}

impl fmt::Display for IssueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IssueKind::EmptyString => write!(f, "empty string"),
            IssueKind::DisallowedCharacter(c) => write!(f, "disallowed character '{c}'"),
            IssueKind::UnmatchedOpenParen => write!(f, "unmatched '('"),
            IssueKind::UnmatchedCloseParen => write!(f, "unmatched ')'"),
            IssueKind::UnpairedRingDigit(d) => write!(f, "unpaired ring-closure digit '{d}'"),
        }
    }
}

/// Outcome of [`validate_smiles`]: plausible iff no issues were found.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// `(character position, issue)` pairs, sorted by position.
    pub issues: Vec<(usize, IssueKind)>,
}

impl ValidationReport {
    pub fn is_plausible(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Structural plausibility check. Three rules: parentheses must balance and
/// never go negative, every ring-closure digit must appear an even number of
/// times, and every character must belong to the SMILES lexical classes
/// (letters, digits, `-=#()[]@+/\.`). This is a lexical screen, not a
/// chemistry parser: valence, aromaticity, and stereochemistry semantics are
/// out of scope.
pub fn validate_smiles(smiles: &str) -> ValidationReport {
    let mut issues = Vec::new();
    if smiles.is_empty() {
        issues.push((0, IssueKind::EmptyString));
        return ValidationReport { issues };
    }
    let mut open_stack = Vec::new();
    let mut digit_count = [0usize; 10];
    let mut digit_last_pos = [0usize; 10];
    for (pos, c) in smiles.chars().enumerate() {
        if !is_allowed_char(c) {
            issues.push((pos, IssueKind::DisallowedCharacter(c)));
            continue;
        }
        match c {
            '(' => open_stack.push(pos),
            ')' => {
                if open_stack.pop().is_none() {
                    issues.push((pos, IssueKind::UnmatchedCloseParen));
                }
            }
            '0'..='9' => {
                let d = c as usize - '0' as usize;
                digit_count[d] += 1;
                digit_last_pos[d] = pos;
            }
            _ => {}
        }
    }
    for pos in open_stack {
        issues.push((pos, IssueKind::UnmatchedOpenParen));
    }
    for d in 0..10 {
        if digit_count[d] % 2 == 1 {
            issues.push((
                digit_last_pos[d],
                IssueKind::UnpairedRingDigit((b'0' + d as u8) as char),
            ));
        }
    }
    issues.sort_by_key(|(pos, _)| *pos);
    ValidationReport { issues }
}
