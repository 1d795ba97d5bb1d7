//! Words in free groups, used both for surface-group gains and for tree isometries.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A generator or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub const fn new(generator: usize, inverse: bool) -> Self {
        Letter { generator, inverse }
    }

    pub const fn pos(generator: usize) -> Self {
        Letter { generator, inverse: false }
    }

    pub const fn neg(generator: usize) -> Self {
        Letter { generator, inverse: true }
    }

    pub fn inv(self) -> Self {
        Letter { generator: self.generator, inverse: !self.inverse }
    }

    pub fn cancels(self, other: Letter) -> bool {
        self.generator == other.generator && self.inverse != other.inverse
    }
}

/// Alphabet for tree words: generator 0 is `x`, 1 is `y`, and so on; uppercase denotes the inverse.
const TREE_ALPHABET: &[u8] = b"xyzwvutsrqponmlkjihgfedcba";

/// A freely reduced word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// Free reduction of an arbitrary letter sequence.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            match out.last() {
                Some(&last) if last.cancels(l) => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        Word(out)
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn mul(&self, other: &Word) -> Word {
        Word::from_letters(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn push(&self, l: Letter) -> Word {
        self.mul(&Word::letter(l))
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n].to_vec())
    }

    /// Length weighted per generator.
    pub fn weighted_len(&self, weights: &[f64]) -> f64 {
        self.0.iter().map(|l| weights[l.generator]).sum()
    }

    /// Cyclic reduction: strip cancelling first/last letter pairs.
    pub fn cyclically_reduced(&self) -> Word {
        let mut lo = 0;
        let mut hi = self.0.len();
        while hi - lo >= 2 && self.0[lo].cancels(self.0[hi - 1]) {
            lo += 1;
            hi -= 1;
        }
        Word(self.0[lo..hi].to_vec())
    }

    /// Whether `self` is a cyclic rotation of `other` (both taken as is).
    pub fn is_rotation_of(&self, other: &Word) -> bool {
        if self.len() != other.len() {
            return false;
        }
        if self.is_identity() {
            return true;
        }
        let n = self.len();
        (0..n).any(|shift| (0..n).all(|i| self.0[(i + shift) % n] == other.0[i]))
    }

    /// Whether `self` is conjugate in the free group to `other`.
    pub fn is_conjugate_to(&self, other: &Word) -> bool {
        self.cyclically_reduced().is_rotation_of(&other.cyclically_reduced())
    }

    /// Render with surface generator names (`a1 b1 a1^-1 …`).
    pub fn to_surface_string(&self) -> String {
        if self.is_identity() {
            return "e".to_string();
        }
        self.0.iter().map(|l| surface_letter_name(*l)).collect::<Vec<_>>().join(" ")
    }

    /// Parse whitespace-separated surface tokens; `e` or an empty string is the identity.
    pub fn parse_surface(s: &str, genus: usize) -> Result<Word> {
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            if tok == "e" {
                continue;
            }
            let (body, inverse) = match tok.strip_suffix("^-1") {
                Some(b) => (b, true),
                None => (tok, false),
            };
            let bad = || Error::InvalidInput(format!("bad surface generator `{tok}`"));
            let kind = body.chars().next().ok_or_else(bad)?;
            let idx: usize = body[1..].parse().map_err(|_| bad())?;
            if idx == 0 || idx > genus {
                return Err(bad());
            }
            let generator = match kind {
                'a' => 2 * (idx - 1),
                'b' => 2 * (idx - 1) + 1,
                _ => return Err(bad()),
            };
            letters.push(Letter::new(generator, inverse));
        }
        Ok(Word::from_letters(letters))
    }

    /// Render as a tree word (`xyY`), `e` for the identity.
    pub fn to_tree_string(&self) -> String {
        if self.is_identity() {
            return "e".to_string();
        }
        self.0
            .iter()
            .map(|l| {
                let c = TREE_ALPHABET[l.generator] as char;
                if l.inverse {
                    c.to_ascii_uppercase()
                } else {
                    c
                }
            })
            .collect()
    }

    pub fn parse_tree(s: &str, rank: usize) -> Result<Word> {
        let s = s.trim();
        if s == "e" || s.is_empty() {
            return Ok(Word::identity());
        }
        let mut letters = Vec::new();
        for c in s.chars() {
            let lower = c.to_ascii_lowercase();
            let generator = TREE_ALPHABET
                .iter()
                .position(|&b| b as char == lower)
                .filter(|&g| g < rank)
                .ok_or_else(|| Error::InvalidInput(format!("letter `{c}` is not a generator of rank {rank}")))?;
            letters.push(Letter::new(generator, c.is_ascii_uppercase()));
        }
        Ok(Word::from_letters(letters))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_surface_string())
    }
}

pub fn surface_letter_name(l: Letter) -> String {
    let kind = if l.generator % 2 == 0 { 'a' } else { 'b' };
    let idx = l.generator / 2 + 1;
    if l.inverse {
        format!("{kind}{idx}^-1")
    } else {
        format!("{kind}{idx}")
    }
}

pub fn surface_generator_name(generator: usize) -> String {
    surface_letter_name(Letter::pos(generator))
}

/// The fundamental group of the closed genus-`g` surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceGroup {
    pub genus: usize,
}

impl SurfaceGroup {
    pub fn new(genus: usize) -> Result<Self> {
        if genus < 2 {
            return Err(Error::InvalidGenus(genus));
        }
        Ok(SurfaceGroup { genus })
    }

    pub fn generator_count(&self) -> usize {
        2 * self.genus
    }

    pub fn a(&self, i: usize) -> Letter {
        Letter::pos(2 * i)
    }

    pub fn b(&self, i: usize) -> Letter {
        Letter::pos(2 * i + 1)
    }

    /// The boundary word `a₁ b₁ a₁⁻¹ b₁⁻¹ ⋯` as a letter sequence.
    pub fn boundary_letters(&self) -> Vec<Letter> {
        (0..self.genus)
            .flat_map(|i| {
                let (a, b) = (self.a(i), self.b(i));
                [a, b, a.inv(), b.inv()]
            })
            .collect()
    }

    pub fn relator(&self) -> Word {
        Word::from_letters(self.boundary_letters())
    }

    /// Whether `w` is trivially trivial in Γ: freely trivial or conjugate to
    /// the relator or its inverse.
    pub fn is_relator_conjugate(&self, w: &Word) -> bool {
        let r = self.relator();
        w.is_identity() || w.is_conjugate_to(&r) || w.is_conjugate_to(&r.inverse())
    }
}
