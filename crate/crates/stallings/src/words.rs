//! Free-group word arithmetic over a fixed symmetric alphabet S ∪ S⁻¹.
//!
//! Letters are interned small integers: generator `g` gets index `2g`, its
//! inverse `2g + 1`, so inversion is one XOR and the natural letter order is
//! `a < A < b < B < …`. Words are always freely reduced — every constructor
//! reduces — and compare by `(length, letters)` so enumeration order and all
//! downstream tie-breaking are deterministic.
//!
//! Textual syntax: lowercase = generator, uppercase = inverse, concatenated
//! (`abAB`); any other character is rejected.

use std::fmt;

use crate::{Error, Result};

/// The generating alphabet: `rank` generators plus their formal inverses.
///
/// Rank is capped at 26 so letters map to `a..z`/`A..Z`. Normality and
/// amenability machinery additionally requires rank ≥ 2 (free groups of rank
/// ≥ 2 are the nonamenable ones); those operations enforce it at their entry
/// points rather than here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Alphabet {
    rank: u8,
}

impl Alphabet {
    /// `rank` generators. Errors unless `1 ≤ rank ≤ 26`.
    pub fn new(rank: usize) -> Result<Self> {
        if rank == 0 || rank > 26 {
            return Err(Error::InvalidArgument(format!(
                "alphabet rank must be in 1..=26, got {rank}"
            )));
        }
        Ok(Alphabet { rank: rank as u8 })
    }

    pub fn rank(&self) -> usize {
        self.rank as usize
    }

    /// Number of letters, `2·rank`.
    pub fn num_letters(&self) -> usize {
        2 * self.rank()
    }

    /// All letters in index order: `a, a⁻¹, b, b⁻¹, …`.
    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        (0..self.num_letters() as u8).map(Letter)
    }

    /// The positive generators in order.
    pub fn generators(&self) -> impl Iterator<Item = Letter> {
        (0..self.rank).map(Letter::positive)
    }

    pub fn contains(&self, l: Letter) -> bool {
        l.0 < 2 * self.rank
    }
}

/// One letter of S ∪ S⁻¹, interned as a small integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(u8);

impl Letter {
    /// The positive letter for generator `g`.
    pub fn positive(g: u8) -> Letter {
        Letter(2 * g)
    }

    /// The inverse letter for generator `g`.
    pub fn negative(g: u8) -> Letter {
        Letter(2 * g + 1)
    }

    pub fn from_index(i: usize) -> Letter {
        debug_assert!(i < 52);
        Letter(i as u8)
    }

    /// Dense index in `0..2·rank`; the letter order is `a, A, b, B, …`.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Which generator this letter or its inverse is.
    pub fn generator(self) -> u8 {
        self.0 >> 1
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// O(1) involution: `l.inverse().inverse() == l`.
    pub fn inverse(self) -> Letter {
        Letter(self.0 ^ 1)
    }

    fn char(self) -> char {
        let base = if self.is_positive() { b'a' } else { b'A' };
        (base + self.generator()) as char
    }

    fn from_char(alphabet: Alphabet, c: char) -> Result<Letter> {
        let l = match c {
            'a'..='z' => Letter::positive(c as u8 - b'a'),
            'A'..='Z' => Letter::negative(c as u8 - b'A'),
            _ => {
                return Err(Error::MalformedWord(format!(
                    "character {c:?} is not a letter"
                )))
            }
        };
        if !alphabet.contains(l) {
            return Err(Error::MalformedWord(format!(
                "letter {c:?} is outside the rank-{} alphabet",
                alphabet.rank()
            )));
        }
        Ok(l)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.char())
    }
}

/// A freely reduced word — an element of F(S). The empty word is the identity.
///
/// ```
/// use stallings::words::{Alphabet, Word};
/// let f2 = Alphabet::new(2).unwrap();
/// let w = Word::parse(f2, "abBa").unwrap();
/// assert_eq!(w.to_string(), "aa");
/// assert_eq!(w.concat(&w.inverse()), Word::empty());
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    /// The identity.
    pub fn empty() -> Word {
        Word {
            letters: Vec::new(),
        }
    }

    /// Freely reduce an arbitrary letter sequence (stack cancellation).
    /// Idempotent and length-nonincreasing.
    pub fn reduce(letters: impl IntoIterator<Item = Letter>) -> Word {
        let mut stack: Vec<Letter> = Vec::new();
        for l in letters {
            if stack.last() == Some(&l.inverse()) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Word { letters: stack }
    }

    /// Parse textual syntax (`abAB`), reducing the result.
    pub fn parse(alphabet: Alphabet, s: &str) -> Result<Word> {
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            letters.push(Letter::from_char(alphabet, c)?);
        }
        Ok(Word::reduce(letters))
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn first(&self) -> Option<Letter> {
        self.letters.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    /// w⁻¹: reverse and invert letters. Already reduced when w is.
    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Reduced product `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        Word::reduce(self.letters.iter().chain(other.letters.iter()).copied())
    }

    /// Reduced k-th power.
    pub fn pow(&self, k: usize) -> Word {
        let mut out = Word::empty();
        for _ in 0..k {
            out = out.concat(self);
        }
        out
    }

    /// True iff the first letter is not the inverse of the last (every word
    /// of length ≤ 1 qualifies, including the identity).
    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(f), Some(l)) => f != l.inverse(),
            _ => true,
        }
    }

    /// Split `w = conjugator · core · conjugator⁻¹` with `core` cyclically
    /// reduced. The core is empty iff `w` is empty.
    ///
    /// ```
    /// use stallings::words::{Alphabet, Word};
    /// let f2 = Alphabet::new(2).unwrap();
    /// let w = Word::parse(f2, "baB").unwrap();
    /// let (conj, core) = w.cyclically_reduce();
    /// assert_eq!((conj.to_string(), core.to_string()), ("b".into(), "a".into()));
    /// assert_eq!(conj.concat(&core).concat(&conj.inverse()), w);
    /// ```
    pub fn cyclically_reduce(&self) -> (Word, Word) {
        let w = &self.letters;
        let mut i = 0;
        let mut j = w.len();
        while i + 1 < j && w[i] == w[j - 1].inverse() {
            i += 1;
            j -= 1;
        }
        (
            Word {
                letters: w[..i].to_vec(),
            },
            Word {
                letters: w[i..j].to_vec(),
            },
        )
    }

    /// Append one letter, keeping the word reduced.
    pub(crate) fn push_reduced(&mut self, l: Letter) {
        if self.letters.last() == Some(&l.inverse()) {
            self.letters.pop();
        } else {
            self.letters.push(l);
        }
    }

    /// Remove and return the last letter (a prefix of a reduced word is
    /// reduced).
    pub(crate) fn pop_letter(&mut self) -> Option<Letter> {
        self.letters.pop()
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// `(length, letters)` order: shorter words first, then letter-lexicographic.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl serde::Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// All freely reduced words of length ≤ `max_len` (including the identity),
/// in `(length, letters)` order.
pub fn enumerate_reduced(alphabet: Alphabet, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut layer_start = 0;
    for _ in 0..max_len {
        let layer_end = out.len();
        for i in layer_start..layer_end {
            let forbidden = out[i].last().map(|l| l.inverse());
            for l in alphabet.letters() {
                if Some(l) == forbidden {
                    continue;
                }
                let mut next = out[i].clone();
                next.letters.push(l);
                out.push(next);
            }
        }
        layer_start = layer_end;
    }
    out
}

/// The set C_n: all *nonempty* cyclically reduced words of length ≤ `max_len`,
/// in `(length, letters)` order. Closed under inversion.
pub fn enumerate_cyclically_reduced(alphabet: Alphabet, max_len: usize) -> Vec<Word> {
    enumerate_reduced(alphabet, max_len)
        .into_iter()
        .filter(|w| !w.is_empty() && w.is_cyclically_reduced())
        .collect()
}
