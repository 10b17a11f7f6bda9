use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error};

/// A generator or its inverse. Generators are numbered from zero and printed
/// as `a, b, c, …`; inverses as the upper-case letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub generator: u8,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: u8, inverse: bool) -> Self {
        Self { generator, inverse }
    }

    pub fn inv(self) -> Self {
        Self {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }

    fn key(self) -> (u8, bool) {
        (self.generator, self.inverse)
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A word in the generators of a free group.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1].inv())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_reduced()
            && match (self.0.first(), self.0.last()) {
                (Some(f), Some(l)) if self.len() > 1 => *f != l.inv(),
                _ => true,
            }
    }

    pub fn rotate(&self, k: usize) -> Self {
        let mut v = self.0.clone();
        if !v.is_empty() {
            let k = k % v.len();
            v.rotate_left(k);
        }
        Self(v)
    }

    /// Lexicographically minimal rotation of the word and of its inverse.
    pub fn canonical_class(&self) -> Self {
        let inv = self.inverse();
        (0..self.len().max(1))
            .flat_map(|k| [self.rotate(k), inv.rotate(k)])
            .min()
            .unwrap_or_default()
    }

    /// True unless the word is a proper power `u^k`, `k > 1`.
    pub fn is_primitive(&self) -> bool {
        let n = self.len();
        (1..n)
            .filter(|p| n.is_multiple_of(*p))
            .all(|p| self.rotate(p) != *self)
    }

    /// All cyclically reduced words of exactly `len` letters over `rank` generators.
    pub fn cyclically_reduced(rank: u8, len: usize) -> Vec<Word> {
        Self::reduced(rank, len)
            .into_iter()
            .filter(Word::is_cyclically_reduced)
            .collect()
    }

    /// All freely reduced words of exactly `len` letters.
    pub fn reduced(rank: u8, len: usize) -> Vec<Word> {
        let letters: Vec<Letter> = (0..rank)
            .flat_map(|g| [Letter::new(g, false), Letter::new(g, true)])
            .collect();
        let mut words = vec![Word::empty()];
        for _ in 0..len {
            let mut next = Vec::with_capacity(words.len() * letters.len());
            for w in &words {
                for &l in &letters {
                    if w.0.last().is_some_and(|last| *last == l.inv()) {
                        continue;
                    }
                    let mut v = w.0.clone();
                    v.push(l);
                    next.push(Word(v));
                }
            }
            words = next;
        }
        words
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for l in &self.0 {
            let c = (b'a' + l.generator) as char;
            write!(f, "{}", if l.inverse { c.to_ascii_uppercase() } else { c })?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "1" {
            return Ok(Word::empty());
        }
        s.chars()
            .map(|c| {
                if c.is_ascii_lowercase() {
                    Ok(Letter::new(c as u8 - b'a', false))
                } else if c.is_ascii_uppercase() {
                    Ok(Letter::new(c as u8 - b'A', true))
                } else {
                    invalid(format!("bad letter {c:?} in word {s:?}"))
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }
}
