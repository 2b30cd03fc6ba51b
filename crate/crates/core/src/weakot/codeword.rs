use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::Bit;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodewordError {
    #[error("codeword set is empty")]
    Empty,
    #[error("word {0:?} has length {1}, expected {2}")]
    Length(String, usize, usize),
    #[error("invalid character {0:?} in word (only 0 and 1)")]
    Char(char),
}

/// The agreed set of legal n-bit strings for Alice's per-run bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodewordSet {
    n: usize,
    words: Vec<Vec<Bit>>,
}

fn parse_word(s: &str) -> Result<Vec<Bit>, CodewordError> {
    s.chars()
        .map(|ch| match ch {
            '0' => Ok(Bit::Zero),
            '1' => Ok(Bit::One),
            other => Err(CodewordError::Char(other)),
        })
        .collect()
}

pub fn word_string(w: &[Bit]) -> String {
    w.iter().map(|b| if *b == Bit::One { '1' } else { '0' }).collect()
}

impl CodewordSet {
    pub fn new(words: Vec<Vec<Bit>>) -> Result<Self, CodewordError> {
        let Some(first) = words.first() else {
            return Err(CodewordError::Empty);
        };
        let n = first.len();
        if n == 0 {
            return Err(CodewordError::Empty);
        }
        for w in &words {
            if w.len() != n {
                return Err(CodewordError::Length(word_string(w), w.len(), n));
            }
        }
        let mut words = words;
        words.sort();
        words.dedup();
        Ok(Self { n, words })
    }

    pub fn from_strs<S: AsRef<str>>(words: &[S]) -> Result<Self, CodewordError> {
        Self::new(words.iter().map(|w| parse_word(w.as_ref())).collect::<Result<_, _>>()?)
    }

    /// `{000, 001, 010, 100}`.
    pub fn default_s() -> Self {
        Self::from_strs(&["000", "001", "010", "100"]).expect("static set")
    }

    /// All `2^n` strings.
    pub fn full(n: usize) -> Self {
        let words = (0..1usize << n)
            .map(|v| (0..n).map(|i| Bit::from((v >> (n - 1 - i)) & 1 == 1)).collect())
            .collect();
        Self::new(words).expect("n >= 1")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn enumerate(&self) -> &[Vec<Bit>] {
        &self.words
    }

    pub fn contains(&self, word: &[Bit]) -> bool {
        self.words.binary_search_by(|w| w.as_slice().cmp(word)).is_ok()
    }

    pub fn contains_str(&self, word: &str) -> bool {
        parse_word(word).is_ok_and(|w| self.contains(&w))
    }

    /// Number of words agreeing with every `(position, bit)` pair.
    pub fn count_completions(&self, partial: &[(usize, Bit)]) -> usize {
        self.words
            .iter()
            .filter(|w| partial.iter().all(|&(i, b)| w.get(i) == Some(&b)))
            .count()
    }

    /// Admissibility of position `i` for one string: completions with bit `i`
    /// equal to 0 and to 1 both exist and are equally many.
    pub fn admissible_at(&self, partial: &[(usize, Bit)], i: usize) -> bool {
        let mut with = partial.to_vec();
        with.push((i, Bit::Zero));
        let zeros = self.count_completions(&with);
        with.pop();
        with.push((i, Bit::One));
        let ones = self.count_completions(&with);
        zeros >= 1 && zeros == ones
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &[Bit] {
        &self.words[rng.random_range(0..self.words.len())]
    }
}

impl fmt::Display for CodewordSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let words: Vec<String> = self.words.iter().map(|w| word_string(w)).collect();
        write!(f, "{{{}}}", words.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_set_membership() {
        let s = CodewordSet::default_s();
        assert_eq!(s.len(), 4);
        assert!(s.contains_str("010"));
        assert!(!s.contains_str("011"));
        assert!(!s.contains_str("01"));
    }

    #[test]
    fn completions_agree_with_enumeration() {
        let s = CodewordSet::default_s();
        // "00" at positions 1 and 2 leaves 000 and 100
        assert_eq!(s.count_completions(&[(1, Bit::Zero), (2, Bit::Zero)]), 2);
        assert_eq!(s.count_completions(&[]), 4);
        assert_eq!(s.count_completions(&[(0, Bit::One), (1, Bit::One)]), 0);
    }

    #[test]
    fn admissibility_examples() {
        let s = CodewordSet::default_s();
        assert!(s.admissible_at(&[(0, Bit::Zero), (1, Bit::Zero)], 2));
        assert!(!s.admissible_at(&[(0, Bit::One), (1, Bit::Zero)], 2));
        let cube = CodewordSet::full(3);
        assert_eq!(cube.len(), 8);
        for a in Bit::BOTH {
            for b in Bit::BOTH {
                assert!(cube.admissible_at(&[(0, a), (2, b)], 1));
            }
        }
    }

    #[test]
    fn rejects_malformed_words() {
        assert_eq!(CodewordSet::from_strs::<&str>(&[]), Err(CodewordError::Empty));
        assert!(matches!(CodewordSet::from_strs(&["01", "1"]), Err(CodewordError::Length(..))));
        assert_eq!(CodewordSet::from_strs(&["0x"]), Err(CodewordError::Char('x')));
    }
}
