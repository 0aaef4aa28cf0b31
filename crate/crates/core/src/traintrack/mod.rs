//! Train-track data for a positive automorphism realised on the rose.
//!
//! Directions at the single vertex are identified with letters: `a_i` is the
//! germ leaving along `a_i`, `A_i` the germ leaving along `a_i^{-1}`. A path
//! passing through the vertex from letter `u` into letter `v` takes the turn
//! `{u^{-1}, v}`.

mod matrix;
mod nielsen;

use serde::Serialize;

pub use matrix::{
    is_irreducible, is_primitive, pf_data, primitivity_exponent, wielandt_bound, PfData, TransitionMatrix,
};
pub use nielsen::{
    auto_bound, find_inps, find_inps_with, find_periodic_inps, fixed_subgroup_trivial, nielsen_graph_has_cycle, verify_nielsen_path,
    BackwardOutcome, FixedSubgroupVerdict, InpMode, InpSearch, Leg, NielsenPath, PeriodicInpReport, PowerInps, RosePoint, SearchLimits,
    DEFAULT_MEMORY_BUDGET,
};

use crate::automorphisms::Automorphism;
use crate::error::{Error, Result};
use crate::words::{Basis, Letter};

pub type Direction = Letter;

/// Unordered pair of directions, stored with the smaller id first.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Turn(pub Direction, pub Direction);

impl Turn {
    pub fn new(a: Direction, b: Direction) -> Self {
        if a.id() <= b.id() {
            Turn(a, b)
        } else {
            Turn(b, a)
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.0 == self.1
    }

    /// The turn taken between consecutive letters `u v` of a path.
    pub fn between(u: Letter, v: Letter) -> Self {
        Turn::new(u.inverse(), v)
    }

    pub fn render(&self, basis: &Basis) -> String {
        format!("{{{}, {}}}", basis.render_letter(self.0), basis.render_letter(self.1))
    }
}

#[derive(Clone, Debug)]
pub struct RoseTrainTrack {
    auto: Automorphism,
    /// `images[d.id()]` is `f(d)` as letters, inverted for inverse letters.
    images: Vec<Vec<Letter>>,
    dmap: Vec<Direction>,
    gate_of: Vec<usize>,
    gates: Vec<Vec<Direction>>,
    illegal: Vec<Turn>,
}

impl RoseTrainTrack {
    /// Requires every image to be a positive word, so that the rose map is a
    /// train track with no cancellation inside images.
    pub fn build(f: &Automorphism) -> Result<Self> {
        if !f.is_positive() {
            return Err(Error::NotPositive);
        }
        let n = f.rank();
        let images: Vec<Vec<Letter>> = (0..2 * n)
            .map(|id| {
                let d = Letter::from_id(id);
                let w = f.image(d.index);
                if d.inverted {
                    w.invert().into_letters()
                } else {
                    w.letters().to_vec()
                }
            })
            .collect();
        let dmap: Vec<Direction> = images.iter().map(|w| w[0]).collect();

        // Fibres of dmap^{2n}: two directions that ever meet stay together,
        // and they meet within 2n steps.
        let mut far: Vec<Direction> = (0..2 * n).map(Letter::from_id).collect();
        for _ in 0..2 * n {
            far = far.iter().map(|d| dmap[d.id()]).collect();
        }
        let mut gate_of = vec![usize::MAX; 2 * n];
        let mut gates: Vec<Vec<Direction>> = Vec::new();
        for id in 0..2 * n {
            if gate_of[id] != usize::MAX {
                continue;
            }
            let g = gates.len();
            let members: Vec<Direction> =
                (id..2 * n).filter(|&j| far[j] == far[id]).map(Letter::from_id).collect();
            for m in &members {
                gate_of[m.id()] = g;
            }
            gates.push(members);
        }
        let mut illegal = Vec::new();
        for gate in &gates {
            for (i, &a) in gate.iter().enumerate() {
                for &b in &gate[i + 1..] {
                    illegal.push(Turn::new(a, b));
                }
            }
        }
        illegal.sort();
        Ok(Self { auto: f.clone(), images, dmap, gate_of, gates, illegal })
    }

    pub fn automorphism(&self) -> &Automorphism {
        &self.auto
    }

    pub fn basis(&self) -> &Basis {
        self.auto.basis()
    }

    pub fn rank(&self) -> usize {
        self.auto.rank()
    }

    pub fn directions(&self) -> impl Iterator<Item = Direction> {
        (0..2 * self.rank()).map(Letter::from_id)
    }

    /// `f(l)` as a letter sequence; for an inverse letter this is the
    /// inverted image.
    pub fn image_of(&self, l: Letter) -> &[Letter] {
        &self.images[l.id()]
    }

    pub fn dmap(&self, d: Direction) -> Direction {
        self.dmap[d.id()]
    }

    pub fn gate(&self, d: Direction) -> usize {
        self.gate_of[d.id()]
    }

    pub fn gates(&self) -> &[Vec<Direction>] {
        &self.gates
    }

    pub fn illegal_turns(&self) -> &[Turn] {
        &self.illegal
    }

    pub fn is_illegal(&self, t: Turn) -> bool {
        t.is_degenerate() || self.gate(t.0) == self.gate(t.1)
    }

    /// Whether the path may pass from letter `u` into letter `v`.
    pub fn legal_step(&self, u: Letter, v: Letter) -> bool {
        !self.is_illegal(Turn::between(u, v))
    }

    /// Single letters are legal; longer words need every turn legal.
    pub fn is_legal_word(&self, letters: &[Letter]) -> bool {
        letters.windows(2).all(|w| self.legal_step(w[0], w[1]))
    }

    /// Directions fixed by the derivative map.
    pub fn fixed_directions(&self) -> Vec<Direction> {
        self.directions().filter(|&d| self.dmap(d) == d).collect()
    }

    /// Lengths of the cycles of the derivative map.
    pub fn dmap_cycle_lengths(&self) -> Vec<usize> {
        let size = 2 * self.rank();
        let mut seen = vec![false; size];
        let mut lengths = Vec::new();
        for start in 0..size {
            // walk until a repeat; the repeat point lies on a cycle
            let mut d = start;
            for _ in 0..size {
                d = self.dmap[d].id();
            }
            if seen[d] {
                continue;
            }
            let mut len = 0;
            let mut e = d;
            loop {
                seen[e] = true;
                len += 1;
                e = self.dmap[e].id();
                if e == d {
                    break;
                }
            }
            lengths.push(len);
        }
        lengths.sort_unstable();
        lengths
    }

    /// Least common multiple of the derivative-map cycle lengths.
    pub fn dmap_period(&self) -> u32 {
        fn gcd(a: u32, b: u32) -> u32 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        self.dmap_cycle_lengths().into_iter().fold(1, |acc, l| {
            let l = l as u32;
            acc / gcd(acc, l) * l
        })
    }

    pub fn transition_matrix(&self) -> TransitionMatrix {
        TransitionMatrix::of(&self.auto)
    }

    pub fn render_direction(&self, d: Direction) -> String {
        self.basis().render_letter(d)
    }

    pub fn summary(&self) -> TrainTrackSummary {
        let b = self.basis();
        TrainTrackSummary {
            dmap: self
                .directions()
                .map(|d| (b.render_letter(d), b.render_letter(self.dmap(d))))
                .collect(),
            gates: self.gates.iter().map(|g| g.iter().map(|&d| b.render_letter(d)).collect()).collect(),
            illegal_turns: self
                .illegal
                .iter()
                .map(|t| (b.render_letter(t.0), b.render_letter(t.1)))
                .collect(),
            fixed_directions: self.fixed_directions().len(),
        }
    }
}

/// Report-friendly rendering of the train-track structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrainTrackSummary {
    pub dmap: Vec<(String, String)>,
    pub gates: Vec<Vec<String>>,
    pub illegal_turns: Vec<(String, String)>,
    pub fixed_directions: usize,
}
