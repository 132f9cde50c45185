//! Words in a free group of fixed rank `n` over the letters `x1..xn` and
//! their inverses.
//!
//! Text syntax: `a`..`z` stand for `x1`..`x26`, the matching uppercase letter
//! for the inverse, and the empty string for the identity. Letters are
//! totally ordered `x1 < x1⁻¹ < x2 < x2⁻¹ < …`, which is also the order used
//! for canonical rotations and for Whitehead graph vertices.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

pub const MAX_RANK: usize = 26;

pub(crate) fn check_rank(rank: usize) -> Result<()> {
    if (2..=MAX_RANK).contains(&rank) {
        Ok(())
    } else {
        Err(Error::InvalidRank(rank))
    }
}

/// A generator `x_i` or its inverse.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    index: u8,
    inverted: bool,
}

impl Letter {
    /// `index` is 1-based.
    pub fn new(index: usize, inverted: bool) -> Letter {
        assert!(
            (1..=MAX_RANK).contains(&index),
            "letter index {index} out of range"
        );
        Letter {
            index: index as u8,
            inverted,
        }
    }

    pub fn positive(index: usize) -> Letter {
        Letter::new(index, false)
    }

    pub fn negative(index: usize) -> Letter {
        Letter::new(index, true)
    }

    pub fn index(self) -> usize {
        self.index as usize
    }

    pub fn is_inverted(self) -> bool {
        self.inverted
    }

    pub fn sign(self) -> i8 {
        if self.inverted {
            -1
        } else {
            1
        }
    }

    pub fn inverse(self) -> Letter {
        Letter {
            index: self.index,
            inverted: !self.inverted,
        }
    }

    /// The letter with the same index and positive sign.
    pub fn unsigned(self) -> Letter {
        Letter {
            index: self.index,
            inverted: false,
        }
    }

    /// Position in the order `x1, x1⁻¹, x2, x2⁻¹, …`, starting at 0.
    pub fn ordinal(self) -> usize {
        2 * (self.index as usize - 1) + self.inverted as usize
    }

    pub fn from_ordinal(ordinal: usize) -> Letter {
        Letter::new(ordinal / 2 + 1, ordinal % 2 == 1)
    }

    pub fn to_char(self) -> char {
        let c = (b'a' + self.index - 1) as char;
        if self.inverted {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        if c.is_ascii_lowercase() {
            Some(Letter::new((c as u8 - b'a') as usize + 1, false))
        } else if c.is_ascii_uppercase() {
            Some(Letter::new((c as u8 - b'A') as usize + 1, true))
        } else {
            None
        }
    }

    /// All `2n` letters in letter order.
    pub fn all(rank: usize) -> impl Iterator<Item = Letter> {
        (0..2 * rank).map(Letter::from_ordinal)
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ordinal().cmp(&other.ordinal())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

fn write_letters(f: &mut fmt::Formatter<'_>, letters: &[Letter]) -> fmt::Result {
    for l in letters {
        write!(f, "{}", l.to_char())?;
    }
    Ok(())
}

fn letters_string(letters: &[Letter]) -> String {
    letters.iter().map(|l| l.to_char()).collect()
}

/// Highest letter index occurring in `text`, ignoring characters that are
/// not letters.
pub fn max_letter_index(text: &str) -> usize {
    text.chars()
        .filter_map(Letter::from_char)
        .map(Letter::index)
        .max()
        .unwrap_or(0)
}

/// A word in `F_n`, not necessarily reduced.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<Letter>,
    rank: usize,
}

impl Word {
    pub fn new(letters: Vec<Letter>, rank: usize) -> Result<Word> {
        check_rank(rank)?;
        if let Some(l) = letters.iter().find(|l| l.index() > rank) {
            return Err(Error::RankExceeded {
                index: l.index(),
                rank,
            });
        }
        Ok(Word { letters, rank })
    }

    pub fn identity(rank: usize) -> Result<Word> {
        Word::new(Vec::new(), rank)
    }

    pub fn letter(letter: Letter, rank: usize) -> Result<Word> {
        Word::new(vec![letter], rank)
    }

    /// Parses the letter sequence exactly as written, without reduction.
    pub fn parse(text: &str, rank: usize) -> Result<Word> {
        check_rank(rank)?;
        let letters = text
            .chars()
            .enumerate()
            .map(|(position, ch)| Letter::from_char(ch).ok_or(Error::Syntax { position, ch }))
            .collect::<Result<Vec<_>>>()?;
        Word::new(letters, rank)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.letters.windows(2).all(|p| p[0] != p[1].inverse())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_reduced()
            && match (self.letters.first(), self.letters.last()) {
                (Some(&first), Some(&last)) => self.letters.len() == 1 || first != last.inverse(),
                _ => true,
            }
    }

    pub fn free_reduce(&self) -> Word {
        let mut stack: Vec<Letter> = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            if stack.last() == Some(&l.inverse()) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Word {
            letters: stack,
            rank: self.rank,
        }
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
            rank: self.rank,
        }
    }

    /// Concatenation without reduction.
    pub fn concat(&self, other: &Word) -> Result<Word> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch {
                left: self.rank,
                right: other.rank,
            });
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(Word {
            letters,
            rank: self.rank,
        })
    }

    /// Reduced product `self · other`.
    pub fn mul(&self, other: &Word) -> Result<Word> {
        Ok(self.concat(other)?.free_reduce())
    }

    /// Reduced conjugate `p · self · p⁻¹`.
    pub fn conjugate_by(&self, p: &Word) -> Result<Word> {
        p.mul(self)?.mul(&p.inverse())
    }

    /// Writes the reduced form of `self` as `conjugator · c · conjugator⁻¹`
    /// with `c` cyclically reduced.
    pub fn cyclic_reduce(&self) -> Result<(CyclicWord, Word)> {
        let reduced = self.free_reduce();
        let letters = reduced.letters;
        if letters.is_empty() {
            return Err(Error::TrivialElement);
        }
        let mut lo = 0;
        let mut hi = letters.len();
        while hi - lo >= 2 && letters[lo] == letters[hi - 1].inverse() {
            lo += 1;
            hi -= 1;
        }
        let core = CyclicWord::from_letters(letters[lo..hi].to_vec(), self.rank)?;
        let conjugator = Word {
            letters: letters[..lo].to_vec(),
            rank: self.rank,
        };
        Ok((core, conjugator))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_letters(f, &self.letters)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word(\"{self}\", rank {})", self.rank)
    }
}

/// Start index of the lexicographically least rotation of `s`.
pub fn least_rotation<T: Ord>(s: &[T]) -> usize {
    let n = s.len();
    let (mut i, mut j, mut k) = (0usize, 1usize, 0usize);
    while i < n && j < n && k < n {
        match s[(i + k) % n].cmp(&s[(j + k) % n]) {
            Ordering::Equal => k += 1,
            Ordering::Greater => {
                i += k + 1;
                if i == j {
                    i += 1;
                }
                k = 0;
            }
            Ordering::Less => {
                j += k + 1;
                if i == j {
                    j += 1;
                }
                k = 0;
            }
        }
    }
    i.min(j)
}

/// The least rotation of a cyclically reduced letter sequence.
pub fn canonical_rotation(letters: &[Letter]) -> Vec<Letter> {
    if letters.is_empty() {
        return Vec::new();
    }
    let start = least_rotation(letters);
    letters[start..]
        .iter()
        .chain(&letters[..start])
        .copied()
        .collect()
}

/// A conjugacy class of a nontrivial element, stored as the least rotation
/// of a cyclically reduced word. `[g]` and `[g⁻¹]` are distinct classes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CyclicWord {
    letters: Vec<Letter>,
    rank: usize,
}

impl CyclicWord {
    /// `letters` must be nonempty and cyclically reduced; any rotation is
    /// accepted.
    pub fn from_letters(letters: Vec<Letter>, rank: usize) -> Result<CyclicWord> {
        let word = Word::new(letters, rank)?;
        if word.is_empty() {
            return Err(Error::TrivialElement);
        }
        if !word.is_cyclically_reduced() {
            return Err(Error::NotCyclicallyReduced(word.to_string()));
        }
        Ok(CyclicWord {
            letters: canonical_rotation(&word.letters),
            rank,
        })
    }

    /// Parses text that is already cyclically reduced.
    pub fn parse(text: &str, rank: usize) -> Result<CyclicWord> {
        let word = Word::parse(text, rank)?;
        CyclicWord::from_letters(word.letters, rank)
    }

    /// The conjugacy class of the element represented by `word`.
    pub fn class_of(word: &Word) -> Result<CyclicWord> {
        Ok(word.cyclic_reduce()?.0)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_word(&self) -> Word {
        Word {
            letters: self.letters.clone(),
            rank: self.rank,
        }
    }

    /// Cyclically consecutive pairs `(c[i], c[i+1 mod len])`, wrap pair
    /// included. A length-1 word yields the single pair `(x, x)`.
    pub fn cyclic_pairs(&self) -> impl Iterator<Item = (Letter, Letter)> + '_ {
        let n = self.letters.len();
        (0..n).map(move |i| (self.letters[i], self.letters[(i + 1) % n]))
    }
}

impl Ord for CyclicWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank
            .cmp(&other.rank)
            .then(self.letters.len().cmp(&other.letters.len()))
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for CyclicWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_letters(f, &self.letters)
    }
}

impl fmt::Debug for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CyclicWord(\"{}\")", letters_string(&self.letters))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(text: &str) -> Word {
        Word::parse(text, 3).unwrap()
    }

    #[test]
    fn parse_transliterates() {
        let word = Word::parse("abA", 2).unwrap();
        assert_eq!(
            word.letters(),
            &[
                Letter::positive(1),
                Letter::positive(2),
                Letter::negative(1)
            ]
        );
        assert!(Word::parse("", 2).unwrap().is_empty());
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            Word::parse("abc", 2),
            Err(Error::RankExceeded { index: 3, rank: 2 })
        );
        assert_eq!(
            Word::parse("a1", 2),
            Err(Error::Syntax {
                position: 1,
                ch: '1'
            })
        );
        assert_eq!(Word::parse("a", 1), Err(Error::InvalidRank(1)));
    }

    #[test]
    fn free_reduce_examples() {
        assert_eq!(w("abBA").free_reduce().to_string(), "");
        assert_eq!(w("abA").free_reduce().to_string(), "abA");
        assert_eq!(w("aBba").free_reduce().to_string(), "aa");
    }

    #[test]
    fn invert_examples() {
        assert_eq!(w("ab").inverse().to_string(), "BA");
        assert_eq!(w("").inverse().to_string(), "");
        assert_eq!(w("aBa").inverse().to_string(), "AbA");
    }

    #[test]
    fn cyclic_reduce_examples() {
        let (c, p) = w("abA").cyclic_reduce().unwrap();
        assert_eq!((c.to_string(), p.to_string()), ("b".into(), "a".into()));
        let (c, p) = w("ab").cyclic_reduce().unwrap();
        assert_eq!((c.to_string(), p.to_string()), ("ab".into(), "".into()));
        let (c, p) = w("aabAA").cyclic_reduce().unwrap();
        assert_eq!((c.to_string(), p.to_string()), ("b".into(), "aa".into()));
        assert_eq!(w("abBA").cyclic_reduce(), Err(Error::TrivialElement));
    }

    #[test]
    fn canonical_rotation_examples() {
        assert_eq!(CyclicWord::parse("ba", 2).unwrap().to_string(), "ab");
        assert_eq!(CyclicWord::parse("aab", 2).unwrap().to_string(), "aab");
        assert_eq!(CyclicWord::parse("bab", 2).unwrap().to_string(), "abb");
        // a < A < b < B
        assert_eq!(CyclicWord::parse("bA", 2).unwrap().to_string(), "Ab");
        assert!(CyclicWord::parse("abA", 2).is_err());
    }

    #[test]
    fn mixed_rank_is_an_error() {
        let a2 = Word::parse("a", 2).unwrap();
        let a3 = Word::parse("a", 3).unwrap();
        assert_eq!(
            a2.concat(&a3),
            Err(Error::RankMismatch { left: 2, right: 3 })
        );
    }

    fn arb_word(rank: usize, max_len: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec((1..=rank, any::<bool>()), 0..max_len).prop_map(move |v| {
            Word::new(
                v.into_iter().map(|(i, s)| Letter::new(i, s)).collect(),
                rank,
            )
            .unwrap()
        })
    }

    fn brute_least_rotation(letters: &[Letter]) -> Vec<Letter> {
        (0..letters.len())
            .map(|s| {
                letters[s..]
                    .iter()
                    .chain(&letters[..s])
                    .copied()
                    .collect::<Vec<_>>()
            })
            .min()
            .unwrap_or_default()
    }

    proptest! {
        #[test]
        fn reduce_is_idempotent(word in arb_word(3, 16)) {
            let r = word.free_reduce();
            prop_assert!(r.is_reduced());
            prop_assert!(r.len() <= word.len());
            prop_assert_eq!(r.free_reduce(), r.clone());
            prop_assert!(word.mul(&word.inverse()).unwrap().is_empty());
            prop_assert_eq!(word.inverse().inverse(), word);
        }

        #[test]
        fn cyclic_reduce_recovers_word(word in arb_word(3, 16)) {
            let reduced = word.free_reduce();
            if let Ok((c, p)) = word.cyclic_reduce() {
                prop_assert!(c.to_word().is_cyclically_reduced());
                prop_assert!(c.len() <= reduced.len());
                // c is a rotation of the stripped middle, so conjugate back
                // through the class rather than letter-for-letter.
                let back = c.to_word().conjugate_by(&p).unwrap();
                prop_assert_eq!(CyclicWord::class_of(&back).unwrap(), c.clone());
                let middle = p.inverse().mul(&reduced).unwrap().mul(&p).unwrap();
                prop_assert!(middle.is_cyclically_reduced());
                prop_assert_eq!(CyclicWord::from_letters(middle.letters().to_vec(), 3).unwrap(), c);
            } else {
                prop_assert!(reduced.is_empty());
            }
        }

        #[test]
        fn conjugation_invariance(u in arb_word(3, 8), word in arb_word(3, 10)) {
            if let Ok(c) = CyclicWord::class_of(&word) {
                let conj = word.conjugate_by(&u).unwrap();
                prop_assert_eq!(CyclicWord::class_of(&conj).unwrap(), c);
            }
        }

        #[test]
        fn least_rotation_matches_brute_force(word in arb_word(2, 12)) {
            prop_assert_eq!(canonical_rotation(word.letters()), brute_least_rotation(word.letters()));
        }

        #[test]
        fn print_parse_round_trip(word in arb_word(4, 12)) {
            let r = word.free_reduce();
            prop_assert_eq!(Word::parse(&r.to_string(), 4).unwrap(), r);
        }
    }
}
