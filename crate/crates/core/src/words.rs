//! Free-group words over a named basis.
//!
//! Letters are stored as `(generator index, inverted)` pairs. A [`ReducedWord`]
//! always holds a freely reduced letter sequence; every constructor reduces or
//! checks its input, so downstream code can compare words structurally.
//!
//! Text syntax: a lowercase token names a generator, the same token with its
//! first character uppercased names the inverse (`"a1 A1 a2"` reduces to `a2`).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered generator labels of a free group of rank `n >= 2`.
#[derive(Clone, Debug)]
pub struct Basis {
    names: Arc<Vec<String>>,
}

impl Basis {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() < 2 {
            return Err(Error::BasisTooSmall(names.len()));
        }
        for (i, name) in names.iter().enumerate() {
            let mut chars = name.chars();
            let ok = match chars.next() {
                Some(c) => c.is_ascii_lowercase() && name.chars().all(|c| c.is_ascii_graphic()),
                None => false,
            };
            if !ok {
                return Err(Error::InvalidLabel(name.clone()));
            }
            if names[..i].contains(name) {
                return Err(Error::DuplicateLabel(name.clone()));
            }
        }
        Ok(Self { names: Arc::new(names) })
    }

    /// The basis `a1, ..., an`.
    pub fn standard(n: usize) -> Result<Self> {
        Self::new((1..=n).map(|i| format!("a{i}")))
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.names.iter().position(|n| n == label)
    }

    /// Copy of this basis with generator `index` renamed.
    pub fn with_renamed(&self, index: usize, label: impl Into<String>) -> Result<Self> {
        let mut names = self.names.as_ref().clone();
        names[index] = label.into();
        Self::new(names)
    }

    pub fn render_letter(&self, letter: Letter) -> String {
        let name = self.name(letter.index);
        if letter.inverted {
            let mut chars = name.chars();
            let first = chars.next().map(|c| c.to_ascii_uppercase()).unwrap_or_default();
            format!("{first}{}", chars.as_str())
        } else {
            name.to_string()
        }
    }

    pub fn parse_letter(&self, token: &str) -> Result<Letter> {
        let mut chars = token.chars();
        let first = chars.next().ok_or_else(|| Error::Parse("empty token".into()))?;
        let inverted = first.is_ascii_uppercase();
        let label = format!("{}{}", first.to_ascii_lowercase(), chars.as_str());
        let index = self
            .index_of(&label)
            .ok_or_else(|| Error::Parse(format!("unknown generator `{token}`")))?;
        Ok(Letter { index, inverted })
    }
}

impl PartialEq for Basis {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.names, &other.names) || self.names == other.names
    }
}

impl Eq for Basis {}

impl std::hash::Hash for Basis {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.names.hash(state);
    }
}

/// A generator or its inverse.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub index: usize,
    pub inverted: bool,
}

impl Letter {
    pub const fn pos(index: usize) -> Self {
        Self { index, inverted: false }
    }

    pub const fn neg(index: usize) -> Self {
        Self { index, inverted: true }
    }

    pub const fn inverse(self) -> Self {
        Self { index: self.index, inverted: !self.inverted }
    }

    /// `+1` or `-1`.
    pub const fn sign(self) -> i8 {
        if self.inverted {
            -1
        } else {
            1
        }
    }

    /// Dense id in `0..2n`: `2 * index + inverted`.
    pub const fn id(self) -> usize {
        2 * self.index + self.inverted as usize
    }

    pub const fn from_id(id: usize) -> Self {
        Self { index: id / 2, inverted: id % 2 == 1 }
    }

    pub fn is_inverse_of(self, other: Letter) -> bool {
        self.index == other.index && self.inverted != other.inverted
    }
}

/// Appends `letter` to an already reduced stack, cancelling if needed.
pub(crate) fn push_reduced(stack: &mut Vec<Letter>, letter: Letter) {
    match stack.last() {
        Some(&last) if last.is_inverse_of(letter) => {
            stack.pop();
        }
        _ => stack.push(letter),
    }
}

/// A freely reduced word over a basis. The empty word is the identity.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ReducedWord {
    basis: Basis,
    letters: Vec<Letter>,
}

impl ReducedWord {
    pub fn identity(basis: &Basis) -> Self {
        Self { basis: basis.clone(), letters: Vec::new() }
    }

    pub fn generator(basis: &Basis, index: usize) -> Result<Self> {
        Self::reduce(basis, [Letter::pos(index)])
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn reduce(basis: &Basis, letters: impl IntoIterator<Item = Letter>) -> Result<Self> {
        let rank = basis.rank();
        let mut stack = Vec::new();
        for letter in letters {
            if letter.index >= rank {
                return Err(Error::LetterOutOfRange { index: letter.index, rank });
            }
            push_reduced(&mut stack, letter);
        }
        Ok(Self { basis: basis.clone(), letters: stack })
    }

    /// Wraps letters already known to be reduced and in range.
    pub(crate) fn from_reduced(basis: &Basis, letters: Vec<Letter>) -> Self {
        debug_assert!(letters.windows(2).all(|w| !w[0].is_inverse_of(w[1])));
        debug_assert!(letters.iter().all(|l| l.index < basis.rank()));
        Self { basis: basis.clone(), letters }
    }

    pub fn parse(basis: &Basis, text: &str) -> Result<Self> {
        let letters = text
            .split_whitespace()
            .map(|tok| basis.parse_letter(tok))
            .collect::<Result<Vec<_>>>()?;
        Self::reduce(basis, letters)
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.letters.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    pub fn concat(&self, other: &ReducedWord) -> Result<ReducedWord> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch);
        }
        let mut stack = self.letters.clone();
        for &l in &other.letters {
            push_reduced(&mut stack, l);
        }
        Ok(Self { basis: self.basis.clone(), letters: stack })
    }

    pub fn invert(&self) -> ReducedWord {
        Self {
            basis: self.basis.clone(),
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Every letter has exponent `+1`. The empty word is positive.
    pub fn is_positive(&self) -> bool {
        self.letters.iter().all(|l| !l.inverted)
    }

    /// Every letter has exponent `-1`. The empty word is negative.
    pub fn is_negative(&self) -> bool {
        self.letters.iter().all(|l| l.inverted)
    }

    pub fn prefix(&self, len: usize) -> ReducedWord {
        let len = len.min(self.letters.len());
        Self::from_reduced(&self.basis, self.letters[..len].to_vec())
    }

    pub fn suffix_from(&self, start: usize) -> ReducedWord {
        let start = start.min(self.letters.len());
        Self::from_reduced(&self.basis, self.letters[start..].to_vec())
    }

    pub fn starts_with(&self, other: &ReducedWord) -> bool {
        self.basis == other.basis && self.letters.starts_with(&other.letters)
    }

    pub fn ends_with(&self, other: &ReducedWord) -> bool {
        self.basis == other.basis && self.letters.ends_with(&other.letters)
    }

    /// Number of occurrences of generator `index` with either sign.
    pub fn occurrences(&self, index: usize) -> usize {
        self.letters.iter().filter(|l| l.index == index).count()
    }

    /// Substitutes `images[i]` for generator `i` (inverse image for its
    /// inverse) and reduces. All images must share one target basis.
    pub fn substitute(&self, target: &Basis, images: &[ReducedWord]) -> Result<ReducedWord> {
        if images.len() != self.basis.rank() {
            return Err(Error::ImageCount { got: images.len(), rank: self.basis.rank() });
        }
        if images.iter().any(|w| &w.basis != target) {
            return Err(Error::BasisMismatch);
        }
        let mut stack = Vec::with_capacity(self.letters.len() * 2);
        for &l in &self.letters {
            let img = &images[l.index].letters;
            if l.inverted {
                for &x in img.iter().rev() {
                    push_reduced(&mut stack, x.inverse());
                }
            } else {
                for &x in img {
                    push_reduced(&mut stack, x);
                }
            }
        }
        Ok(Self { basis: target.clone(), letters: stack })
    }

    pub fn render(&self) -> String {
        self.letters.iter().map(|&l| self.basis.render_letter(l)).collect::<Vec<_>>().join(" ")
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&self.render())
        }
    }
}

impl fmt::Debug for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ReducedWord({self})")
    }
}

/// A basis substitution together with its inverse witness.
///
/// `forward[i]` expresses old generator `i` over the new basis and
/// `backward[j]` expresses new generator `j` over the old basis. Construction
/// checks that both compositions fix every generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisChange {
    from: Basis,
    to: Basis,
    forward: Vec<ReducedWord>,
    backward: Vec<ReducedWord>,
}

impl BasisChange {
    pub fn new(
        from: &Basis,
        to: &Basis,
        forward: Vec<ReducedWord>,
        backward: Vec<ReducedWord>,
    ) -> Result<Self> {
        if from.rank() != to.rank() {
            return Err(Error::BasisMismatch);
        }
        for i in 0..from.rank() {
            let g = ReducedWord::generator(from, i)?;
            let there = g.substitute(to, &forward)?;
            let back = there.substitute(from, &backward)?;
            if back != g {
                return Err(Error::InvalidBasisChange(from.name(i).to_string()));
            }
            let h = ReducedWord::generator(to, i)?;
            let back = h.substitute(from, &backward)?.substitute(to, &forward)?;
            if back != h {
                return Err(Error::InvalidBasisChange(to.name(i).to_string()));
            }
        }
        Ok(Self { from: from.clone(), to: to.clone(), forward, backward })
    }

    pub fn identity(basis: &Basis) -> Self {
        let gens: Vec<_> = (0..basis.rank())
            .map(|i| ReducedWord::from_reduced(basis, vec![Letter::pos(i)]))
            .collect();
        Self { from: basis.clone(), to: basis.clone(), forward: gens.clone(), backward: gens }
    }

    /// Replaces each generator whose bit is set in `flips` by its inverse.
    /// Flipped generators are relabelled: `a1` becomes `x0`, anything else
    /// gets a trailing `'`.
    pub fn sign_flip(basis: &Basis, flips: &[bool]) -> Result<Self> {
        let mut to = basis.clone();
        for (i, &flip) in flips.iter().enumerate() {
            if flip {
                let old = basis.name(i);
                let label = if old == "a1" && basis.index_of("x0").is_none() {
                    "x0".to_string()
                } else {
                    format!("{old}'")
                };
                to = to.with_renamed(i, label)?;
            }
        }
        let forward = (0..basis.rank())
            .map(|i| {
                let l = Letter { index: i, inverted: flips.get(i).copied().unwrap_or(false) };
                ReducedWord::from_reduced(&to, vec![l])
            })
            .collect();
        let backward = (0..basis.rank())
            .map(|i| {
                let l = Letter { index: i, inverted: flips.get(i).copied().unwrap_or(false) };
                ReducedWord::from_reduced(basis, vec![l])
            })
            .collect();
        Self::new(basis, &to, forward, backward)
    }

    pub fn source(&self) -> &Basis {
        &self.from
    }

    pub fn target(&self) -> &Basis {
        &self.to
    }

    pub fn forward_images(&self) -> &[ReducedWord] {
        &self.forward
    }

    pub fn backward_images(&self) -> &[ReducedWord] {
        &self.backward
    }

    pub fn is_identity(&self) -> bool {
        self.from == self.to
            && self.forward.iter().enumerate().all(|(i, w)| w.letters() == [Letter::pos(i)])
    }

    /// Rewrites a word over the source basis in the target basis.
    pub fn apply(&self, w: &ReducedWord) -> Result<ReducedWord> {
        if w.basis() != &self.from {
            return Err(Error::BasisMismatch);
        }
        w.substitute(&self.to, &self.forward)
    }

    /// Rewrites a word over the target basis back in the source basis.
    pub fn revert(&self, w: &ReducedWord) -> Result<ReducedWord> {
        if w.basis() != &self.to {
            return Err(Error::BasisMismatch);
        }
        w.substitute(&self.from, &self.backward)
    }

    pub fn inverse(&self) -> BasisChange {
        Self {
            from: self.to.clone(),
            to: self.from.clone(),
            forward: self.backward.clone(),
            backward: self.forward.clone(),
        }
    }
}

/// Standalone form of [`BasisChange::apply`].
pub fn change_basis(w: &ReducedWord, change: &BasisChange) -> Result<ReducedWord> {
    change.apply(w)
}
