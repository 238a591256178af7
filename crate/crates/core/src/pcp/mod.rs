//! Post Correspondence instances over `{A, B}`, their padded form, the dyadic
//! word weights `a_weight` / `b_weight`, and a brute-force bounded solver.

mod file;

use std::fmt;

use num::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rational::Rational;

pub use file::{parse_pcp, render_pcp, PcpParseError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PcpError {
    #[error("instance has no pairs")]
    NoPairs,
    #[error("pair {index} contains an empty word")]
    EmptyWord { index: usize },
    #[error("pair {index} contains the padding symbol")]
    PaddedInput { index: usize },
    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("witness is empty")]
    EmptyWitness,
    #[error("padding symbol in a word passed to a_weight")]
    PaddingInWeight,
    #[error("bound K must be at least 1")]
    ZeroBound,
    #[error("bound K = {k} exceeds the number of pairs n = {n}")]
    BoundAboveN { k: usize, n: usize },
    #[error("instance has no bound K")]
    MissingBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    A,
    B,
    /// The padding symbol `•`.
    Pad,
}

impl Letter {
    pub fn as_char(self) -> char {
        match self {
            Letter::A => 'A',
            Letter::B => 'B',
            Letter::Pad => '•',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'A' => Some(Letter::A),
            'B' => Some(Letter::B),
            '•' => Some(Letter::Pad),
            _ => None,
        }
    }

    pub const ALL: [Letter; 3] = [Letter::A, Letter::B, Letter::Pad];
}

pub type Word = Vec<Letter>;

pub fn word_to_string(w: &[Letter]) -> String {
    if w.is_empty() {
        return "ε".into();
    }
    w.iter().map(|l| l.as_char()).collect()
}

/// Parses a word over `{A, B, •}`; `-` or `ε` is the empty word.
pub fn word_from_str(s: &str) -> Option<Word> {
    if s == "-" || s == "ε" {
        return Some(Vec::new());
    }
    s.chars().map(Letter::from_char).collect()
}

/// A PCP instance; `bound` present marks the bounded problem.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PcpInstance {
    pairs: Vec<(Word, Word)>,
    bound: Option<usize>,
}

impl PcpInstance {
    pub fn new(pairs: Vec<(Word, Word)>, bound: Option<usize>) -> Result<Self, PcpError> {
        if pairs.is_empty() {
            return Err(PcpError::NoPairs);
        }
        for (i, (u, v)) in pairs.iter().enumerate() {
            if u.contains(&Letter::Pad) || v.contains(&Letter::Pad) {
                return Err(PcpError::PaddedInput { index: i + 1 });
            }
        }
        if bound == Some(0) {
            return Err(PcpError::ZeroBound);
        }
        Ok(Self { pairs, bound })
    }

    /// Convenience constructor from `("A", "AA")`-style pairs.
    pub fn from_strs(pairs: &[(&str, &str)], bound: Option<usize>) -> Result<Self, PcpError> {
        let pairs = pairs
            .iter()
            .enumerate()
            .map(|(i, (u, v))| {
                let u = word_from_str(u).ok_or(PcpError::PaddedInput { index: i + 1 })?;
                let v = word_from_str(v).ok_or(PcpError::PaddedInput { index: i + 1 })?;
                Ok((u, v))
            })
            .collect::<Result<Vec<_>, PcpError>>()?;
        Self::new(pairs, bound)
    }

    pub fn pairs(&self) -> &[(Word, Word)] {
        &self.pairs
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn bound(&self) -> Option<usize> {
        self.bound
    }

    pub fn with_bound(&self, bound: Option<usize>) -> Result<Self, PcpError> {
        Self::new(self.pairs.clone(), bound)
    }

    /// SHA-256 of the canonical file rendering.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(render_pcp(self).as_bytes()))
    }
}

/// Instance whose words are all padded with `•` to a common length `m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PaddedInstance {
    base: PcpInstance,
    m: usize,
    padded: Vec<(Word, Word)>,
}

impl PaddedInstance {
    pub fn base(&self) -> &PcpInstance {
        &self.base
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn bound(&self) -> Option<usize> {
        self.base.bound()
    }

    pub fn padded_pairs(&self) -> &[(Word, Word)] {
        &self.padded
    }
}

/// Pads every word with trailing `•` up to the longest word length.
pub fn pad(instance: &PcpInstance) -> Result<PaddedInstance, PcpError> {
    for (i, (u, v)) in instance.pairs.iter().enumerate() {
        if u.is_empty() || v.is_empty() {
            return Err(PcpError::EmptyWord { index: i + 1 });
        }
    }
    let m = instance
        .pairs
        .iter()
        .map(|(u, v)| u.len().max(v.len()))
        .max()
        .unwrap_or(0);
    let fill = |w: &Word| {
        let mut w = w.clone();
        w.resize(m, Letter::Pad);
        w
    };
    let padded = instance.pairs.iter().map(|(u, v)| (fill(u), fill(v))).collect();
    Ok(PaddedInstance {
        base: instance.clone(),
        m,
        padded,
    })
}

/// Erases every `•`.
pub fn trim(word: &[Letter]) -> Word {
    word.iter().copied().filter(|l| *l != Letter::Pad).collect()
}

/// Argument of the indicator functions: a letter or the bottom marker `Z′`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightSymbol {
    A,
    B,
    Bottom,
}

pub fn a_indicator(x: WeightSymbol) -> u8 {
    match x {
        WeightSymbol::A | WeightSymbol::Bottom => 1,
        WeightSymbol::B => 0,
    }
}

pub fn b_indicator(x: WeightSymbol) -> u8 {
    match x {
        WeightSymbol::B | WeightSymbol::Bottom => 1,
        WeightSymbol::A => 0,
    }
}

fn weight(word: &[Letter], indicator: fn(WeightSymbol) -> u8) -> Result<Rational, PcpError> {
    let mut symbols = Vec::with_capacity(word.len() + 1);
    for l in word {
        symbols.push(match l {
            Letter::A => WeightSymbol::A,
            Letter::B => WeightSymbol::B,
            Letter::Pad => return Err(PcpError::PaddingInWeight),
        });
    }
    symbols.push(WeightSymbol::Bottom);
    let two = Rational::from_integer(2.into());
    let mut scale = Rational::one();
    let mut sum = Rational::zero();
    for s in symbols {
        scale /= &two;
        if indicator(s) == 1 {
            sum += &scale;
        }
    }
    Ok(sum)
}

/// `a_weight(w Z′) = Σ a_indicator(x_i) / 2^i`, with the bottom marker appended to `word`.
pub fn a_weight(word: &[Letter]) -> Result<Rational, PcpError> {
    weight(word, a_indicator)
}

/// Same as [`a_weight`] with `b_indicator`.
pub fn b_weight(word: &[Letter]) -> Result<Rational, PcpError> {
    weight(word, b_indicator)
}

/// A candidate solution: 1-based pair indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Witness {
    indices: Vec<usize>,
}

impl Witness {
    pub fn new(indices: Vec<usize>) -> Result<Self, PcpError> {
        if indices.is_empty() {
            return Err(PcpError::EmptyWitness);
        }
        Ok(Self { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Concatenated upper and lower words selected by `indices`.
pub fn concat(instance: &PcpInstance, indices: &[usize]) -> Result<(Word, Word), PcpError> {
    let n = instance.n();
    let mut u = Vec::new();
    let mut v = Vec::new();
    for &i in indices {
        if i == 0 || i > n {
            return Err(PcpError::IndexOutOfRange { index: i, n });
        }
        let (a, b) = &instance.pairs[i - 1];
        u.extend_from_slice(a);
        v.extend_from_slice(b);
    }
    Ok((u, v))
}

pub fn verify_witness(instance: &PcpInstance, w: &Witness) -> Result<bool, PcpError> {
    let (u, v) = concat(instance, w.indices())?;
    Ok(u == v)
}

/// Lexicographically least witness of length `1..=k`, by exhaustive enumeration.
///
/// Each length is searched in parallel over the first index; the smallest
/// first index with a hit wins, so the answer does not depend on scheduling.
pub fn solve_bounded(instance: &PcpInstance, k: usize) -> Option<Witness> {
    let n = instance.n();
    for len in 1..=k {
        let hit = (1..=n)
            .into_par_iter()
            .find_map_first(|first| search_with_prefix(instance, first, len));
        if hit.is_some() {
            return hit;
        }
    }
    None
}

fn search_with_prefix(instance: &PcpInstance, first: usize, len: usize) -> Option<Witness> {
    let n = instance.n();
    let mut idx = vec![1usize; len];
    idx[0] = first;
    loop {
        let (u, v) = concat(instance, &idx).expect("indices in range");
        if u == v {
            return Some(Witness { indices: idx });
        }
        // odometer over positions 1..len
        let mut pos = len;
        loop {
            if pos == 1 {
                return None;
            }
            pos -= 1;
            if idx[pos] < n {
                idx[pos] += 1;
                idx[pos + 1..].iter_mut().for_each(|x| *x = 1);
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests;
