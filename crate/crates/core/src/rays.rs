//! Infinite words fixed by the boundary map of an automorphism.
//!
//! A [`Ray`] is a seed plus the automorphism that grows it. The seed carries
//! the attraction certificate: `f(seed)` reduces to `seed · tail` with `tail`
//! nonempty. Prefixes are produced by iterating `f` on the cached iterate and
//! checking at every step that the previous iterate survives as a prefix.

use std::sync::Arc;

use serde::Serialize;

use crate::automorphisms::{make_alpha, make_alpha_inverse, x0_basis_change, Automorphism, InverseScaffold};
use crate::error::{Error, Result};
use crate::words::{Basis, BasisChange, Letter, ReducedWord};

/// Default verification depth for prefixes.
pub const DEFAULT_DEPTH: usize = 200;

/// Whether `f(seed)` strictly extends `seed` with no cancellation into it.
pub fn is_attracting_seed(f: &Automorphism, seed: &ReducedWord) -> Result<bool> {
    if seed.is_empty() {
        return Err(Error::EmptySeed);
    }
    let image = f.apply(seed)?;
    Ok(image.len() > seed.len() && image.starts_with(seed))
}

#[derive(Clone, Debug)]
pub struct Ray {
    name: String,
    auto: Arc<Automorphism>,
    seed: ReducedWord,
    cached: ReducedWord,
}

impl Ray {
    /// Builds a ray after checking the attraction certificate.
    pub fn new(name: impl Into<String>, auto: Arc<Automorphism>, seed: ReducedWord) -> Result<Self> {
        let name = name.into();
        if !is_attracting_seed(&auto, &seed)? {
            return Err(Error::NotAttracting(name));
        }
        Ok(Self { name, auto, cached: seed.clone(), seed })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn seed(&self) -> &ReducedWord {
        &self.seed
    }

    pub fn automorphism(&self) -> &Automorphism {
        &self.auto
    }

    pub fn cached_prefix(&self) -> &ReducedWord {
        &self.cached
    }

    /// The same seed, re-certified under another automorphism (typically a
    /// power of the original one).
    pub fn with_automorphism(&self, auto: Arc<Automorphism>) -> Result<Ray> {
        Ray::new(self.name.clone(), auto, self.seed.clone())
    }

    /// The first `depth` letters of the fixed word.
    pub fn expand(&mut self, depth: usize) -> Result<ReducedWord> {
        while self.cached.len() < depth {
            let next = self.auto.apply(&self.cached)?;
            if next.len() <= self.cached.len() || !next.starts_with(&self.cached) {
                return Err(Error::NotAttracting(self.name.clone()));
            }
            self.cached = next;
        }
        Ok(self.cached.prefix(depth))
    }
}

fn letters(basis: &Basis, ls: impl IntoIterator<Item = Letter>) -> Result<ReducedWord> {
    ReducedWord::reduce(basis, ls)
}

/// `X_1, …, X_n, Y_2, …, Y_n` for `alpha_n`, `n >= 3`.
pub fn seeded_attracting_family(n: usize) -> Result<Vec<Ray>> {
    if n < 3 {
        return Err(Error::RankTooSmall(n, 3));
    }
    let f = Arc::new(make_alpha(n)?);
    attracting_family_for(f)
}

/// The attracting family seeded for `f`, where `f` is `alpha_n` or a power.
/// `X_i` is seeded by `alpha_n(a_i)`, `Y_i` by its inverse.
pub(crate) fn attracting_family_for(f: Arc<Automorphism>) -> Result<Vec<Ray>> {
    let n = f.rank();
    let basis = f.basis().clone();
    let alpha_img = |i: usize| -> Result<ReducedWord> {
        let mut ls = vec![Letter::pos(i)];
        if i == 0 {
            ls.extend((1..n).map(Letter::pos));
        } else {
            ls.extend((0..=i).map(Letter::pos));
        }
        letters(&basis, ls)
    };
    let mut rays = Vec::with_capacity(2 * n - 1);
    for i in 0..n {
        rays.push(Ray::new(format!("X{}", i + 1), f.clone(), alpha_img(i)?)?);
    }
    for i in 1..n {
        rays.push(Ray::new(format!("Y{}", i + 1), f.clone(), alpha_img(i)?.invert())?);
    }
    Ok(rays)
}

/// The `2n` attracting fixed words of `alpha_n^{-1}`, built over the basis
/// `{x0, a2, …, an}` where `alpha_n^{-1}` is positive.
#[derive(Clone, Debug)]
pub struct RepellingFamily {
    pub change: BasisChange,
    pub inverse: Arc<Automorphism>,
    pub scaffold: InverseScaffold,
    pub rays: Vec<Ray>,
}

impl RepellingFamily {
    /// Renders a word of the new basis back over `a1, …, an`.
    pub fn to_original(&self, w: &ReducedWord) -> Result<ReducedWord> {
        self.change.revert(w)
    }
}

pub fn seeded_repelling_family(n: usize) -> Result<RepellingFamily> {
    if n < 3 {
        return Err(Error::RankTooSmall(n, 3));
    }
    repelling_family_unchecked(n, 1)
}

/// Repelling family for `alpha_n^{-t}`; also used at `n = 2`, where the
/// family exists but two of its members are related by a fixed element.
pub(crate) fn repelling_family_unchecked(n: usize, power: u32) -> Result<RepellingFamily> {
    let change = x0_basis_change(n)?;
    let (inv, scaffold) = make_alpha_inverse(n)?;
    let g = inv.in_basis(&change)?;
    let g = Arc::new(if power > 1 { g.power(power)? } else { g });
    let s = scaffold.in_basis(&change)?;
    let basis = change.target().clone();
    let gen = |i: usize| ReducedWord::from_reduced(&basis, vec![Letter::pos(i)]);
    let x0 = &s.x_words[0];
    let x_last = &s.x_words[n - 1];

    let mut rays = Vec::with_capacity(2 * n);
    for k in 0..n - 1 {
        let seed = gen(n - 1 - k).concat(&s.x_words[k])?;
        rays.push(Ray::new(format!("Xk{k}"), g.clone(), seed)?);
    }
    for k in 0..n - 1 {
        let seed = gen(n - 1 - k).concat(&x0.invert())?.concat(&s.y_words[k].invert())?;
        rays.push(Ray::new(format!("Yk{k}"), g.clone(), seed)?);
    }
    let seed = x0.invert().concat(&s.y_word.invert())?;
    rays.push(Ray::new("Y", g.clone(), seed)?);
    let seed = x0.invert().concat(x_last)?;
    rays.push(Ray::new("Z", g.clone(), seed)?);

    Ok(RepellingFamily { change, inverse: g, scaffold: s, rays })
}

/// Both sides of `alpha^{-1}(x0^{-1} x_{n-1}) = x0^{-1} x_{n-1} alpha^{-1}(z)`,
/// reduced over `{x0, a2, …, an}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZIdentity {
    pub lhs: ReducedWord,
    pub rhs: ReducedWord,
}

impl ZIdentity {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

pub fn z_identity(n: usize) -> Result<ZIdentity> {
    let fam = repelling_family_unchecked(n, 1)?;
    let s = &fam.scaffold;
    let head = s.x_words[0].invert().concat(&s.x_words[n - 1])?;
    let lhs = fam.inverse.apply(&head)?;
    let rhs = head.concat(&fam.inverse.apply(&s.z_word)?)?;
    Ok(ZIdentity { lhs, rhs })
}

/// How a divergence between two rays was detected.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceKind {
    /// Different first letters.
    InitialLetter,
    /// Same letter index at the divergence point, opposite signs.
    Sign,
    /// Different generators after a common prefix.
    Letter,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairDivergence {
    pub first: String,
    pub second: String,
    /// 0-based index of the first differing letter; `None` if the prefixes
    /// agree up to the checked depth.
    pub position: Option<usize>,
    pub kind: Option<DivergenceKind>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DistinctnessReport {
    pub depth: usize,
    pub pairs: Vec<PairDivergence>,
}

impl DistinctnessReport {
    pub fn distinct(&self) -> bool {
        self.pairs.iter().all(|p| p.position.is_some())
    }

    pub fn max_divergence(&self) -> Option<usize> {
        self.pairs.iter().filter_map(|p| p.position).max()
    }

    /// Errors with the first pair that agrees to full depth.
    pub fn certify(&self) -> Result<()> {
        match self.pairs.iter().find(|p| p.position.is_none()) {
            Some(p) => Err(Error::InconclusiveDistinctness(p.first.clone(), p.second.clone(), self.depth)),
            None => Ok(()),
        }
    }
}

/// Expands every ray to `depth` and records the first divergence of every pair.
pub fn pairwise_distinct(rays: &mut [Ray], depth: usize) -> Result<DistinctnessReport> {
    let prefixes = rays.iter_mut().map(|r| r.expand(depth)).collect::<Result<Vec<_>>>()?;
    let mut pairs = Vec::new();
    for i in 0..rays.len() {
        for j in i + 1..rays.len() {
            let (a, b) = (prefixes[i].letters(), prefixes[j].letters());
            let pos = a.iter().zip(b).position(|(x, y)| x != y);
            let kind = pos.map(|p| {
                if p == 0 {
                    DivergenceKind::InitialLetter
                } else if a[p].index == b[p].index {
                    DivergenceKind::Sign
                } else {
                    DivergenceKind::Letter
                }
            });
            pairs.push(PairDivergence {
                first: rays[i].name().to_string(),
                second: rays[j].name().to_string(),
                position: pos,
                kind,
            });
        }
    }
    Ok(DistinctnessReport { depth, pairs })
}

/// Whether some word `w` of length at most `max_w` could satisfy `w·X = Y`
/// on the first `depth` letters: `w` cancels `c` letters of `X` and leaves a
/// prefix of `Y` of length `j`, with `c + j <= max_w`.
pub fn translate_equal_within(x: &ReducedWord, y: &ReducedWord, max_w: usize, depth: usize) -> bool {
    let (x, y) = (x.letters(), y.letters());
    for c in 0..=max_w {
        for j in 0..=max_w - c {
            if c == 0 && j == 0 {
                continue;
            }
            let len = depth.min(x.len().saturating_sub(c)).min(y.len().saturating_sub(j));
            if len > 0 && x[c..c + len] == y[j..j + len] {
                return true;
            }
        }
    }
    false
}

/// A certified ray rendered for reports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RayRecord {
    pub name: String,
    pub seed: ReducedWord,
    pub prefix: ReducedWord,
}

/// Certified attracting and repelling fixed words of `alpha_n^t`.
#[derive(Clone, Debug)]
pub struct FixedPointInventory {
    pub n: usize,
    pub power: u32,
    pub depth: usize,
    pub attracting: Vec<RayRecord>,
    /// Attracting for the inverse, over `{x0, a2, …, an}`.
    pub repelling: Vec<RayRecord>,
    pub attracting_distinct: DistinctnessReport,
    pub repelling_distinct: DistinctnessReport,
    certified: bool,
}

impl FixedPointInventory {
    pub fn total(&self) -> usize {
        self.attracting.len() + self.repelling.len()
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    /// An uncertified inventory with arbitrary counts, for exercising the
    /// bound checks.
    pub fn fabricated(n: usize, attracting: usize, repelling: usize) -> Self {
        let basis = Basis::standard(n.max(2)).expect("rank >= 2");
        let rec = |k: usize| RayRecord {
            name: format!("R{k}"),
            seed: ReducedWord::identity(&basis),
            prefix: ReducedWord::identity(&basis),
        };
        let empty = DistinctnessReport { depth: 0, pairs: Vec::new() };
        Self {
            n,
            power: 1,
            depth: 0,
            attracting: (0..attracting).map(rec).collect(),
            repelling: (0..repelling).map(rec).collect(),
            attracting_distinct: empty.clone(),
            repelling_distinct: empty,
            certified: false,
        }
    }

    /// Marks a fabricated inventory certified. Test fixtures only.
    #[doc(hidden)]
    pub fn force_certified(mut self) -> Self {
        self.certified = true;
        self
    }
}

fn records(rays: &mut [Ray], depth: usize) -> Result<Vec<RayRecord>> {
    rays.iter_mut()
        .map(|r| {
            Ok(RayRecord { name: r.name().to_string(), seed: r.seed().clone(), prefix: r.expand(depth)? })
        })
        .collect()
}

/// Builds and certifies both families for `alpha_n`.
pub fn build_inventory(n: usize, depth: usize) -> Result<FixedPointInventory> {
    build_inventory_for_power(n, 1, depth)
}

/// Both families re-certified for `alpha_n^t` and `alpha_n^{-t}`.
pub fn build_inventory_for_power(n: usize, power: u32, depth: usize) -> Result<FixedPointInventory> {
    if n == 2 {
        return Err(Error::DegenerateRankTwo);
    }
    if n < 2 {
        return Err(Error::RankTooSmall(n, 3));
    }
    let power = power.max(1);
    let f = Arc::new(make_alpha(n)?.power(power)?);
    let mut attracting = attracting_family_for(f)?;
    let mut repelling = repelling_family_unchecked(n, power)?.rays;
    let attracting_distinct = pairwise_distinct(&mut attracting, depth)?;
    let repelling_distinct = pairwise_distinct(&mut repelling, depth)?;
    attracting_distinct.certify()?;
    repelling_distinct.certify()?;
    Ok(FixedPointInventory {
        n,
        power,
        depth,
        attracting: records(&mut attracting, depth)?,
        repelling: records(&mut repelling, depth)?,
        attracting_distinct,
        repelling_distinct,
        certified: true,
    })
}

/// Reading of "occurrences of `a_i` in `alpha(a_i)`" used for the orbit bound.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OccurrenceConvention {
    /// `sum_i #{a_i^{±1} in f(a_i)}`, the trace of the transition matrix.
    #[default]
    SelfOccurrenceSum,
    /// `max_i #{a_i^{±1} in f(a_i)}`.
    MaxSelfOccurrence,
}

/// Upper bound on the number of `Fix(f)`-orbits of attracting fixed points
/// obtained from self-occurrence counts.
pub fn attracting_orbit_bound(f: &Automorphism, convention: OccurrenceConvention) -> usize {
    let counts = (0..f.rank()).map(|i| f.image(i).occurrences(i));
    match convention {
        OccurrenceConvention::SelfOccurrenceSum => counts.sum(),
        OccurrenceConvention::MaxSelfOccurrence => counts.max().unwrap_or(0),
    }
}

/// Record of the rank-two relation `Y_0 = w · Y` with
/// `w = a2 x0^{-1} a2^{-1} x0` fixed by `alpha_2`.
#[derive(Clone, Debug)]
pub struct RankTwoRelation {
    /// `w` over `a1, a2`.
    pub w: ReducedWord,
    pub fixed_by_alpha2: bool,
    pub depth: usize,
    pub prefix_consistent: bool,
    /// The same commutator pattern in `F_3` is moved by `alpha_3`.
    pub fixed_by_alpha3: bool,
}

impl RankTwoRelation {
    pub fn holds(&self) -> bool {
        self.fixed_by_alpha2 && self.prefix_consistent && !self.fixed_by_alpha3
    }
}

pub fn n2_degenerate_relation() -> Result<RankTwoRelation> {
    let depth = 40;
    let mut fam = repelling_family_unchecked(2, 1)?;
    let nb = fam.change.target().clone();
    let w_new = ReducedWord::parse(&nb, "a2 X0 A2 x0")?;
    let w = fam.to_original(&w_new)?;
    let alpha2 = make_alpha(2)?;
    let fixed_by_alpha2 = alpha2.apply(&w)? == w;

    let y0 = fam.rays.iter_mut().find(|r| r.name() == "Yk0").expect("Yk0 present").expand(depth)?;
    let y = fam.rays.iter_mut().find(|r| r.name() == "Y").expect("Y present").expand(depth + w_new.len())?;
    let rhs = w_new.concat(&y)?;
    let prefix_consistent = rhs.len() >= depth && rhs.prefix(depth) == y0;

    let alpha3 = make_alpha(3)?;
    let w3 = ReducedWord::parse(alpha3.basis(), &w.render())?;
    let fixed_by_alpha3 = alpha3.apply(&w3)? == w3;

    Ok(RankTwoRelation { w, fixed_by_alpha2, depth, prefix_consistent, fixed_by_alpha3 })
}
