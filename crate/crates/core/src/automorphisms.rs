//! Automorphisms of `F_n` as generator-image tables.
//!
//! Inverses are never solved for. An [`Automorphism`] may carry an inverse
//! witness table, which is checked on attachment; the family `alpha_n` and its
//! inverse are built explicitly.
//!
//! Image lengths of powers grow like `lambda^t`, so `power(t)` for `t` around
//! 20 at rank 5 and above will exhaust memory.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{Basis, BasisChange, Letter, ReducedWord};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automorphism {
    basis: Basis,
    images: Vec<ReducedWord>,
    inverse: Option<Vec<ReducedWord>>,
}

impl Automorphism {
    pub fn new(basis: &Basis, images: Vec<ReducedWord>) -> Result<Self> {
        if images.len() != basis.rank() {
            return Err(Error::ImageCount { got: images.len(), rank: basis.rank() });
        }
        for (i, img) in images.iter().enumerate() {
            if img.basis() != basis {
                return Err(Error::BasisMismatch);
            }
            if img.is_empty() {
                return Err(Error::EmptyImage(basis.name(i).to_string()));
            }
        }
        Ok(Self { basis: basis.clone(), images, inverse: None })
    }

    /// Attaches an inverse witness after checking both compositions.
    pub fn with_inverse(mut self, inverse: Vec<ReducedWord>) -> Result<Self> {
        let witness = Automorphism::new(&self.basis, inverse)?;
        if !verify_inverse(&self, &witness) {
            return Err(Error::InverseWitness);
        }
        self.inverse = Some(witness.images);
        Ok(self)
    }

    pub fn identity(basis: &Basis) -> Self {
        let gens: Vec<_> = (0..basis.rank())
            .map(|i| ReducedWord::from_reduced(basis, vec![Letter::pos(i)]))
            .collect();
        Self { basis: basis.clone(), images: gens.clone(), inverse: Some(gens) }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    pub fn images(&self) -> &[ReducedWord] {
        &self.images
    }

    pub fn image(&self, index: usize) -> &ReducedWord {
        &self.images[index]
    }

    pub fn inverse_witness(&self) -> Option<&[ReducedWord]> {
        self.inverse.as_deref()
    }

    /// The witnessed inverse, carrying `self` as its own witness.
    pub fn inverse(&self) -> Option<Automorphism> {
        self.inverse.as_ref().map(|inv| Self {
            basis: self.basis.clone(),
            images: inv.clone(),
            inverse: Some(self.images.clone()),
        })
    }

    pub fn apply(&self, w: &ReducedWord) -> Result<ReducedWord> {
        if w.basis() != &self.basis {
            return Err(Error::BasisMismatch);
        }
        w.substitute(&self.basis, &self.images)
    }

    /// `self ∘ g`, i.e. `a ↦ self(g(a))`.
    pub fn compose(&self, g: &Automorphism) -> Result<Automorphism> {
        if self.basis != g.basis {
            return Err(Error::BasisMismatch);
        }
        let images = g.images.iter().map(|w| self.apply(w)).collect::<Result<Vec<_>>>()?;
        let inverse = match (&self.inverse, &g.inverse) {
            (Some(fi), Some(gi)) => Some(
                fi.iter()
                    .map(|w| w.substitute(&self.basis, gi))
                    .collect::<Result<Vec<_>>>()?,
            ),
            _ => None,
        };
        Ok(Self { basis: self.basis.clone(), images, inverse })
    }

    /// `self^t` for `t >= 1` by repeated composition.
    pub fn power(&self, t: u32) -> Result<Automorphism> {
        if t == 0 {
            return Ok(Self::identity(&self.basis));
        }
        let mut acc = self.clone();
        for _ in 1..t {
            acc = self.compose(&acc)?;
        }
        Ok(acc)
    }

    pub fn is_positive(&self) -> bool {
        self.images.iter().all(ReducedWord::is_positive)
    }

    pub fn total_image_length(&self) -> usize {
        self.images.iter().map(ReducedWord::len).sum()
    }

    /// The same automorphism written over `change.target()`.
    pub fn in_basis(&self, change: &BasisChange) -> Result<Automorphism> {
        if change.source() != &self.basis {
            return Err(Error::BasisMismatch);
        }
        let conj = |table: &[ReducedWord]| -> Result<Vec<ReducedWord>> {
            change
                .backward_images()
                .iter()
                .map(|w| change.apply(&w.substitute(&self.basis, table)?))
                .collect()
        };
        let images = conj(&self.images)?;
        let inverse = match &self.inverse {
            Some(inv) => Some(conj(inv)?),
            None => None,
        };
        Ok(Self { basis: change.target().clone(), images, inverse })
    }

    /// One line per generator: `a1 -> a1 a2 a3`.
    pub fn render_table(&self) -> String {
        self.images
            .iter()
            .enumerate()
            .map(|(i, w)| format!("{} -> {}", self.basis.name(i), w.render()))
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Parses the line format of [`render_table`](Self::render_table). The
    /// basis is read off the left-hand sides in order. An optional inverse
    /// table follows a line consisting of `---`. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn parse_table(text: &str) -> Result<Automorphism> {
        let mut sections: Vec<Vec<(String, String)>> = vec![Vec::new()];
        for raw in text.lines() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line == "---" {
                sections.push(Vec::new());
                continue;
            }
            let (lhs, rhs) = line
                .split_once("->")
                .ok_or_else(|| Error::Parse(format!("expected `gen -> word`, got `{line}`")))?;
            sections.last_mut().unwrap().push((lhs.trim().to_string(), rhs.trim().to_string()));
        }
        if sections.len() > 2 {
            return Err(Error::Parse("at most one `---` separator allowed".into()));
        }
        let basis = Basis::new(sections[0].iter().map(|(l, _)| l.clone()))?;
        let table = |rows: &[(String, String)]| -> Result<Vec<ReducedWord>> {
            if rows.len() != basis.rank() {
                return Err(Error::ImageCount { got: rows.len(), rank: basis.rank() });
            }
            rows.iter()
                .enumerate()
                .map(|(i, (l, r))| {
                    if l != basis.name(i) {
                        return Err(Error::Parse(format!("row {i} defines `{l}`, expected `{}`", basis.name(i))));
                    }
                    ReducedWord::parse(&basis, r)
                })
                .collect()
        };
        let f = Automorphism::new(&basis, table(&sections[0])?)?;
        match sections.get(1) {
            Some(rows) => f.with_inverse(table(rows)?),
            None => Ok(f),
        }
    }

    pub fn to_json(&self) -> AutomorphismJson {
        let tokens = |w: &ReducedWord| w.letters().iter().map(|&l| self.basis.render_letter(l)).collect();
        AutomorphismJson {
            basis: self.basis.names().to_vec(),
            images: self.images.iter().map(tokens).collect(),
            inverse: self.inverse.as_ref().map(|inv| inv.iter().map(tokens).collect()),
        }
    }

    pub fn from_json(json: &AutomorphismJson) -> Result<Automorphism> {
        let basis = Basis::new(json.basis.clone())?;
        let table = |rows: &[Vec<String>]| -> Result<Vec<ReducedWord>> {
            rows.iter().map(|toks| ReducedWord::parse(&basis, &toks.join(" "))).collect()
        };
        let f = Automorphism::new(&basis, table(&json.images)?)?;
        match &json.inverse {
            Some(inv) => f.with_inverse(table(inv)?),
            None => Ok(f),
        }
    }
}

/// JSON mirror of an image table, letters as text tokens.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomorphismJson {
    pub basis: Vec<String>,
    pub images: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub inverse: Option<Vec<Vec<String>>>,
}

/// True iff `f ∘ g` and `g ∘ f` both fix every generator.
pub fn verify_inverse(f: &Automorphism, g: &Automorphism) -> bool {
    if f.basis != g.basis {
        return false;
    }
    (0..f.rank()).all(|i| {
        let gen = [Letter::pos(i)];
        let fg = g.images[i].substitute(&f.basis, &f.images);
        let gf = f.images[i].substitute(&f.basis, &g.images);
        matches!((fg, gf), (Ok(a), Ok(b)) if a.letters() == gen && b.letters() == gen)
    })
}

/// `alpha_n`: `a1 ↦ a1 a2 … an` and `ak ↦ ak a1 a2 … ak` for `k >= 2`,
/// with its inverse attached as witness.
pub fn make_alpha(n: usize) -> Result<Automorphism> {
    let basis = Basis::standard(n).map_err(|_| Error::RankTooSmall(n, 2))?;
    let f = Automorphism::new(&basis, alpha_images(&basis))?;
    let (inv, _) = make_alpha_inverse(n)?;
    f.with_inverse(inv.images)
}

fn alpha_images(basis: &Basis) -> Vec<ReducedWord> {
    let n = basis.rank();
    let mut images = vec![ReducedWord::from_reduced(basis, (0..n).map(Letter::pos).collect())];
    for k in 1..n {
        let mut letters = vec![Letter::pos(k)];
        letters.extend((0..=k).map(Letter::pos));
        images.push(ReducedWord::from_reduced(basis, letters));
    }
    images
}

/// Words used to build `alpha_n^{-1}` and its repelling fixed points, all
/// over the original basis `a1, ..., an`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InverseScaffold {
    /// `x_0 = a1^{-1}`, `x_{k+1} = a_{n-k} x_k^2`.
    pub x_words: Vec<ReducedWord>,
    /// `y_k = x_{n-1} x_k^{-1} x_0^{-1}` for `k = 0..n-2`.
    pub y_words: Vec<ReducedWord>,
    /// `y = x_{n-1} x_0^{-1}`.
    pub y_word: ReducedWord,
    /// `z = x_0^{-1} a_n^{-1} … a_2^{-1} x_{n-1}`.
    pub z_word: ReducedWord,
}

impl InverseScaffold {
    pub fn in_basis(&self, change: &BasisChange) -> Result<InverseScaffold> {
        let conv = |ws: &[ReducedWord]| ws.iter().map(|w| change.apply(w)).collect::<Result<Vec<_>>>();
        Ok(Self {
            x_words: conv(&self.x_words)?,
            y_words: conv(&self.y_words)?,
            y_word: change.apply(&self.y_word)?,
            z_word: change.apply(&self.z_word)?,
        })
    }

    /// Whether every scaffold word is positive in its basis.
    pub fn all_positive(&self) -> bool {
        self.x_words
            .iter()
            .chain(&self.y_words)
            .chain([&self.y_word, &self.z_word])
            .all(ReducedWord::is_positive)
    }
}

/// The basis change `a1 ↦ x0^{-1}` onto `{x0, a2, …, an}`.
pub fn x0_basis_change(n: usize) -> Result<BasisChange> {
    let basis = Basis::standard(n).map_err(|_| Error::RankTooSmall(n, 2))?;
    let mut flips = vec![false; n];
    flips[0] = true;
    BasisChange::sign_flip(&basis, &flips)
}

/// `alpha_n^{-1}` over the original basis, built from the recursion
/// `x_{k+1} = a_{n-k} x_k^2`: `a1 ↦ x_{n-1}^{-1}` and `a_{n-k} ↦ a_{n-k} x_k`.
pub fn make_alpha_inverse(n: usize) -> Result<(Automorphism, InverseScaffold)> {
    let basis = Basis::standard(n).map_err(|_| Error::RankTooSmall(n, 2))?;
    let gen = |i: usize| ReducedWord::from_reduced(&basis, vec![Letter::pos(i)]);
    let mut x_words = vec![gen(0).invert()];
    for k in 0..n - 1 {
        let xk = &x_words[k];
        let next = gen(n - 1 - k).concat(xk)?.concat(xk)?;
        x_words.push(next);
    }
    let x0 = x_words[0].clone();
    let last = x_words[n - 1].clone();

    let mut images = vec![ReducedWord::identity(&basis); n];
    images[0] = last.invert();
    for k in 0..n - 1 {
        images[n - 1 - k] = gen(n - 1 - k).concat(&x_words[k])?;
    }

    let y_words = (0..n - 1)
        .map(|k| last.concat(&x_words[k].invert())?.concat(&x0.invert()))
        .collect::<Result<Vec<_>>>()?;
    let y_word = last.concat(&x0.invert())?;
    let mut z_word = x0.invert();
    for i in (1..n).rev() {
        z_word = z_word.concat(&gen(i).invert())?;
    }
    let z_word = z_word.concat(&last)?;

    let inv = Automorphism::new(&basis, images)?.with_inverse(alpha_images(&basis))?;
    Ok((inv, InverseScaffold { x_words, y_words, y_word, z_word }))
}

/// Searches the `2^n` generator sign flips for a basis in which every image
/// is positive. The identity pattern is tried first.
pub fn positivity_basis(f: &Automorphism) -> Option<BasisChange> {
    let n = f.rank();
    if n > 20 {
        return None;
    }
    (0u32..1 << n).find_map(|mask| {
        let flips: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let change = BasisChange::sign_flip(f.basis(), &flips).ok()?;
        let g = f.in_basis(&change).ok()?;
        g.is_positive().then_some(change)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(b: &Basis, text: &str) -> ReducedWord {
        ReducedWord::parse(b, text).unwrap()
    }

    #[test]
    fn alpha_three_table() {
        let f = make_alpha(3).unwrap();
        let b = f.basis().clone();
        assert_eq!(f.image(0), &w(&b, "a1 a2 a3"));
        assert_eq!(f.image(1), &w(&b, "a2 a1 a2"));
        assert_eq!(f.image(2), &w(&b, "a3 a1 a2 a3"));
        assert_eq!(f.apply(&w(&b, "a2")).unwrap(), w(&b, "a2 a1 a2"));
        assert!(f.apply(&ReducedWord::identity(&b)).unwrap().is_empty());
    }

    #[test]
    fn alpha_four_third_image() {
        let f = make_alpha(4).unwrap();
        assert_eq!(f.image(2).render(), "a3 a1 a2 a3");
    }

    #[test]
    fn alpha_image_lengths() {
        for n in 3..=10 {
            let f = make_alpha(n).unwrap();
            let lens: Vec<_> = f.images().iter().map(ReducedWord::len).collect();
            let mut expect = vec![n];
            expect.extend(3..=n + 1);
            assert_eq!(lens, expect, "n = {n}");
        }
    }

    #[test]
    fn rank_one_rejected() {
        assert!(matches!(make_alpha(1), Err(Error::RankTooSmall(1, 2))));
        assert!(matches!(make_alpha_inverse(1), Err(Error::RankTooSmall(1, 2))));
    }

    #[test]
    fn alpha_three_inverse_table() {
        let (g, _) = make_alpha_inverse(3).unwrap();
        let b = g.basis().clone();
        assert_eq!(g.image(2), &w(&b, "a3 A1"));
        assert_eq!(g.image(1), &w(&b, "a2 a3 A1 A1"));
        assert_eq!(g.image(0), &w(&b, "a1 a1 A3 a1 a1 A3 A2"));
    }

    #[test]
    fn alpha_maps_x_words() {
        for n in 2..=8 {
            let f = make_alpha(n).unwrap();
            let (_, s) = make_alpha_inverse(n).unwrap();
            let b = f.basis().clone();
            let prefix = |k: usize| {
                ReducedWord::reduce(&b, (0..k).map(Letter::pos)).unwrap()
            };
            // alpha(x_j) = (a1 ... a_{n-j})^{-1}
            for (j, x) in s.x_words.iter().enumerate() {
                assert_eq!(f.apply(x).unwrap(), prefix(n - j).invert(), "n={n} j={j}");
            }
            // alpha(a_{n-k} x_k) = a_{n-k}
            for k in 0..n - 1 {
                let g = ReducedWord::generator(&b, n - 1 - k).unwrap();
                let lhs = f.apply(&g.concat(&s.x_words[k]).unwrap()).unwrap();
                assert_eq!(lhs, g);
            }
        }
    }

    #[test]
    fn alpha_three_sends_x2_inverse_to_a1() {
        let f = make_alpha(3).unwrap();
        let b = f.basis().clone();
        assert_eq!(f.apply(&w(&b, "a1 a1 A3 a1 a1 A3 A2")).unwrap(), w(&b, "a1"));
    }

    #[test]
    fn verify_inverse_examples() {
        let f = make_alpha(3).unwrap();
        let (g, _) = make_alpha_inverse(3).unwrap();
        assert!(verify_inverse(&f, &g));
        assert!(!verify_inverse(&f, &f));
        let id = Automorphism::identity(f.basis());
        assert!(verify_inverse(&id, &id));
        let composed = f.compose(&g).unwrap();
        assert_eq!(composed.images(), Automorphism::identity(f.basis()).images());
    }

    #[test]
    fn power_one_is_self() {
        let f = make_alpha(3).unwrap();
        assert_eq!(f.power(1).unwrap(), f);
    }

    #[test]
    fn power_cube_two_ways() {
        let f = make_alpha(3).unwrap();
        let a1 = ReducedWord::generator(f.basis(), 0).unwrap();
        let mut iter = a1.clone();
        for _ in 0..3 {
            iter = f.apply(&iter).unwrap();
        }
        let via_power = f.power(3).unwrap().apply(&a1).unwrap();
        assert_eq!(iter, via_power);
        assert_eq!(via_power.len(), 33);
    }

    #[test]
    fn scaffold_positive_in_x0_basis() {
        for n in 2..=9 {
            let (_, s) = make_alpha_inverse(n).unwrap();
            let change = x0_basis_change(n).unwrap();
            let t = s.in_basis(&change).unwrap();
            assert!(t.all_positive(), "n = {n}");
            assert_eq!(t.x_words[0].render(), "x0");
        }
    }

    #[test]
    fn positivity_witnesses() {
        let f = make_alpha(3).unwrap();
        assert!(positivity_basis(&f).unwrap().is_identity());
        let (g, _) = make_alpha_inverse(3).unwrap();
        let change = positivity_basis(&g).unwrap();
        assert_eq!(change.target().names(), ["x0", "a2", "a3"]);
        assert!(g.in_basis(&change).unwrap().is_positive());

        let b = Basis::standard(2).unwrap();
        let h = Automorphism::new(&b, vec![w(&b, "a2"), w(&b, "a1 A2")]).unwrap();
        assert!(positivity_basis(&h).is_none());
    }

    #[test]
    fn table_round_trip() {
        let f = make_alpha(4).unwrap();
        let mut text = f.render_table();
        text.push_str("\n---\n");
        text.push_str(&f.inverse().unwrap().render_table());
        let g = Automorphism::parse_table(&text).unwrap();
        assert_eq!(g, f);
        let j = Automorphism::from_json(&f.to_json()).unwrap();
        assert_eq!(j, f);
    }

    #[test]
    fn table_rejects_bad_witness() {
        let text = "a1 -> a1 a2\na2 -> a2\n---\na1 -> a1\na2 -> a2\n";
        assert_eq!(Automorphism::parse_table(text).unwrap_err(), Error::InverseWitness);
    }
}
