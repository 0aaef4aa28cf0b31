//! Indivisible Nielsen path searches on the rose.
//!
//! A candidate is `γ1 γ2^{-1}` with legal legs meeting at an illegal turn.
//! Each leg starts at a fixed (straight mode) or period-two (twisted mode)
//! point inside its first letter `x`: the point lies in the `k`-th of the
//! `|f(x)|` subsegments that `f` maps onto single letters, so the part of
//! `f(γ)` after the image of that point is `f(x)[k+1..] · f(rest)`. Writing
//! `I_i` for this word, the functional equations read
//!
//! * straight: `I_i = rest_i · γ3`
//! * twisted:  `I_1 = rest_2 · γ3`, `I_2 = rest_1 · γ3`
//!
//! Two independent engines solve them. The forward engine notices that the
//! equations force every leg to be a prefix of the fixed (or period-two) ray
//! leaving its start point, and then checks every pair of prefixes up to the
//! length limit. The backward engine starts at the illegal turn and grows
//! both legs towards their start points, tracking how much of each image is
//! still unexplained; states repeat as the search regresses, and a search
//! whose state space closes is complete without any length limit.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use num_rational::Ratio;
use petgraph::unionfind::UnionFind;
use serde::Serialize;

use super::{is_primitive, pf_data, RoseTrainTrack, TransitionMatrix};
use crate::automorphisms::Automorphism;
use crate::error::{Error, Result};
use crate::words::{Basis, Letter, ReducedWord};

/// Budget, in letters, for the image tables of powers.
pub const DEFAULT_MEMORY_BUDGET: usize = 50_000_000;

/// Length limit when no cancellation bound is available.
const FALLBACK_MAX_LEN: usize = 16;

/// Rough cap on the letters the forward engine may hold for its rays. When
/// the cancellation bound would exceed it, the default leg length is cut and
/// conclusiveness has to come from the backward engine closing.
const FORWARD_LETTER_BUDGET: usize = 4_000_000;

fn default_forward_len(tt: &RoseTrainTrack, bound: Option<usize>) -> usize {
    let mut len = bound.unwrap_or(FALLBACK_MAX_LEN);
    let max_image = tt.directions().map(|d| tt.image_of(d).len()).max().unwrap_or(1);
    let starts = 2 * tt.automorphism().total_image_length();
    while len > 4 && starts * len * max_image > FORWARD_LETTER_BUDGET {
        len /= 2;
    }
    len
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InpMode {
    /// `f(γ_i) = γ_i γ3`
    Straight,
    /// `f(γ1) = γ2 γ3`, `f(γ2) = γ1 γ3`
    Twisted,
}

impl InpMode {
    fn partner(self, i: usize) -> usize {
        match self {
            InpMode::Straight => i,
            InpMode::Twisted => 1 - i,
        }
    }
}

/// A leg: a partial first letter `start` entered at subsegment `offset`,
/// followed by the full letters `rest`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Leg {
    pub start: Letter,
    pub offset: usize,
    pub rest: Vec<Letter>,
}

impl Leg {
    pub fn letters(&self) -> Vec<Letter> {
        std::iter::once(self.start).chain(self.rest.iter().copied()).collect()
    }

    pub fn last(&self) -> Letter {
        self.rest.last().copied().unwrap_or(self.start)
    }

    /// Letter count, the partial first letter included.
    pub fn len(&self) -> usize {
        1 + self.rest.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NielsenPath {
    pub mode: InpMode,
    pub basis: Basis,
    pub legs: [Leg; 2],
    pub gamma3: Vec<Letter>,
    /// Position of each start point inside its first letter, in `[0, 1)`.
    pub starts: [Ratio<u64>; 2],
}

impl NielsenPath {
    fn new(tt: &RoseTrainTrack, mode: InpMode, legs: [Leg; 2], gamma3: Vec<Letter>) -> Self {
        let len = |l: &Leg| tt.image_of(l.start).len() as u64;
        let starts = match mode {
            InpMode::Straight => {
                let p = |l: &Leg| Ratio::new(l.offset as u64, len(l) - 1);
                [p(&legs[0]), p(&legs[1])]
            }
            InpMode::Twisted => {
                let (l1, l2) = (len(&legs[0]), len(&legs[1]));
                let (k1, k2) = (legs[0].offset as u64, legs[1].offset as u64);
                let d = l1 * l2 - 1;
                [Ratio::new(k1 * l2 + k2, d), Ratio::new(k2 * l1 + k1, d)]
            }
        };
        let mut np = Self { mode, basis: tt.basis().clone(), legs, gamma3, starts };
        if np.legs[1] < np.legs[0] {
            np.legs.swap(0, 1);
            np.starts.swap(0, 1);
        }
        np
    }

    /// The two endpoints of `γ1 γ2^{-1}` as points of the rose.
    pub fn endpoints(&self) -> [RosePoint; 2] {
        let point = |i: usize| {
            let x = self.legs[i].start;
            let p = self.starts[i];
            let along = if x.inverted { Ratio::from_integer(1) - p } else { p };
            if along == Ratio::from_integer(0) || along == Ratio::from_integer(1) {
                RosePoint::Vertex
            } else {
                RosePoint::Interior { edge: x.index, position: along }
            }
        };
        [point(0), point(1)]
    }

    pub fn gamma1(&self) -> ReducedWord {
        ReducedWord::from_reduced(&self.basis, self.legs[0].letters())
    }

    pub fn gamma2(&self) -> ReducedWord {
        ReducedWord::from_reduced(&self.basis, self.legs[1].letters())
    }

    pub fn gamma3_word(&self) -> ReducedWord {
        ReducedWord::from_reduced(&self.basis, self.gamma3.clone())
    }

    fn key(&self) -> (InpMode, Leg, Leg, Vec<Letter>) {
        (self.mode, self.legs[0].clone(), self.legs[1].clone(), self.gamma3.clone())
    }

    pub fn render(&self) -> String {
        format!(
            "γ1 = {} (from {}), γ2 = {} (from {}), γ3 = {}",
            self.gamma1(),
            self.starts[0],
            self.gamma2(),
            self.starts[1],
            self.gamma3_word()
        )
    }
}

/// A point of the rose: the vertex, or a point inside edge `a_{edge+1}` at
/// `position ∈ (0, 1)` along its positive orientation.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RosePoint {
    Vertex,
    Interior { edge: usize, position: Ratio<u64> },
}

fn tail(tt: &RoseTrainTrack, x: Letter, k: usize) -> &[Letter] {
    &tt.image_of(x)[k + 1..]
}

fn straight_start_ok(tt: &RoseTrainTrack, x: Letter, k: usize) -> bool {
    let img = tt.image_of(x);
    k + 1 < img.len() && img[k] == x
}

fn twisted_starts_ok(tt: &RoseTrainTrack, (x1, k1): (Letter, usize), (x2, k2): (Letter, usize)) -> bool {
    let (i1, i2) = (tt.image_of(x1), tt.image_of(x2));
    let (l1, l2) = (i1.len(), i2.len());
    if k1 >= l1 || k2 >= l2 || i1[k1] != x2 || i2[k2] != x1 || l1 * l2 == 1 {
        return false;
    }
    let d = l1 * l2 - 1;
    k1 * l2 + k2 < d && k2 * l1 + k1 < d
}

fn junction_ok(tt: &RoseTrainTrack, e1: Letter, e2: Letter) -> bool {
    e1 != e2 && tt.gate(e1.inverse()) == tt.gate(e2.inverse())
}

/// Independent check of every defining condition.
pub fn verify_nielsen_path(tt: &RoseTrainTrack, np: &NielsenPath) -> bool {
    let [l1, l2] = &np.legs;
    if np.gamma3.is_empty() || !tt.is_legal_word(&l1.letters()) || !tt.is_legal_word(&l2.letters()) {
        return false;
    }
    if !junction_ok(tt, l1.last(), l2.last()) {
        return false;
    }
    let starts_ok = match np.mode {
        InpMode::Straight => {
            straight_start_ok(tt, l1.start, l1.offset) && straight_start_ok(tt, l2.start, l2.offset)
        }
        InpMode::Twisted => twisted_starts_ok(tt, (l1.start, l1.offset), (l2.start, l2.offset)),
    };
    if !starts_ok {
        return false;
    }
    (0..2).all(|i| {
        let leg = &np.legs[i];
        let mut image: Vec<Letter> = tail(tt, leg.start, leg.offset).to_vec();
        for &l in &leg.rest {
            image.extend_from_slice(tt.image_of(l));
        }
        let mut expected = np.legs[np.mode.partner(i)].rest.clone();
        expected.extend_from_slice(&np.gamma3);
        image == expected
    })
}

// ---------------------------------------------------------------- forward

/// Ray data for one start point: `ray` is long enough for every leg with at
/// most `max_rest` full letters, `image_len[m] = |I(m)|`.
struct StartRay {
    x: Letter,
    k: usize,
    ray: Vec<Letter>,
    image_len: Vec<usize>,
    legal_upto: usize,
}

fn apply_letters(tt: &RoseTrainTrack, head: &[Letter], w: &[Letter]) -> Vec<Letter> {
    let mut out = head.to_vec();
    for &l in w {
        out.extend_from_slice(tt.image_of(l));
    }
    out
}

fn image_lengths(tt: &RoseTrainTrack, t: usize, ray: &[Letter], max_rest: usize) -> Vec<usize> {
    let mut lens = Vec::with_capacity(max_rest + 1);
    let mut acc = t;
    lens.push(acc);
    for &l in &ray[..max_rest] {
        acc += tt.image_of(l).len();
        lens.push(acc);
    }
    lens
}

fn legal_prefix(tt: &RoseTrainTrack, x: Letter, ray: &[Letter], max_rest: usize) -> usize {
    let mut prev = x;
    for (m, &l) in ray[..max_rest].iter().enumerate() {
        if prev.is_inverse_of(l) || !tt.legal_step(prev, l) {
            return m;
        }
        prev = l;
    }
    max_rest
}

fn hash_slice(s: &[Letter]) -> u64 {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    s.hash(&mut h);
    h.finish()
}

fn forward_straight(tt: &RoseTrainTrack, max_len: usize) -> Vec<NielsenPath> {
    let max_rest = max_len.saturating_sub(1);
    let mut rays = Vec::new();
    for x in tt.directions() {
        for k in 0..tt.image_of(x).len() {
            if !straight_start_ok(tt, x, k) {
                continue;
            }
            let t = tail(tt, x, k);
            let mut ray = t.to_vec();
            while ray.len() < max_rest {
                ray = apply_letters(tt, t, &ray);
            }
            let ray = apply_letters(tt, t, &ray[..max_rest]);
            let image_len = image_lengths(tt, t.len(), &ray, max_rest);
            let legal_upto = legal_prefix(tt, x, &ray, max_rest);
            rays.push(StartRay { x, k, ray, image_len, legal_upto });
        }
    }
    // γ3 = ray[m..|I(m)|]; bucket candidates by (length, hash) of γ3
    let mut buckets: HashMap<(usize, u64), Vec<(usize, usize)>> = HashMap::new();
    for (s, r) in rays.iter().enumerate() {
        for m in 0..=r.legal_upto {
            let g = &r.ray[m..r.image_len[m]];
            buckets.entry((g.len(), hash_slice(g))).or_default().push((s, m));
        }
    }
    let last = |s: usize, m: usize| if m == 0 { rays[s].x } else { rays[s].ray[m - 1] };
    let mut out = Vec::new();
    for group in buckets.values() {
        for (a, &(s1, m1)) in group.iter().enumerate() {
            for &(s2, m2) in &group[a + 1..] {
                let g1 = &rays[s1].ray[m1..rays[s1].image_len[m1]];
                let g2 = &rays[s2].ray[m2..rays[s2].image_len[m2]];
                if g1 != g2 || !junction_ok(tt, last(s1, m1), last(s2, m2)) {
                    continue;
                }
                let leg = |s: usize, m: usize| Leg { start: rays[s].x, offset: rays[s].k, rest: rays[s].ray[..m].to_vec() };
                out.push(NielsenPath::new(tt, InpMode::Straight, [leg(s1, m1), leg(s2, m2)], g1.to_vec()));
            }
        }
    }
    out
}

fn forward_twisted(tt: &RoseTrainTrack, max_len: usize) -> Vec<NielsenPath> {
    let max_rest = max_len.saturating_sub(1);
    let starts: Vec<(Letter, usize)> =
        tt.directions().flat_map(|x| (0..tt.image_of(x).len()).map(move |k| (x, k))).collect();
    let mut out = Vec::new();
    for (a, &s1) in starts.iter().enumerate() {
        for &s2 in &starts[a..] {
            if !twisted_starts_ok(tt, s1, s2) {
                continue;
            }
            let (t1, t2) = (tail(tt, s1.0, s1.1), tail(tt, s2.0, s2.1));
            // R1 = T2 f(R2), R2 = T1 f(R1)
            let (mut r1, mut r2): (Vec<Letter>, Vec<Letter>) = (Vec::new(), Vec::new());
            let mut rounds = 0;
            while r1.len() < max_rest || r2.len() < max_rest {
                let n1 = apply_letters(tt, t2, &r2[..r2.len().min(max_rest)]);
                let n2 = apply_letters(tt, t1, &r1[..r1.len().min(max_rest)]);
                r1 = n1;
                r2 = n2;
                rounds += 1;
                if rounds > 4 * max_rest + 8 {
                    break;
                }
            }
            if r1.len() < max_rest || r2.len() < max_rest {
                continue;
            }
            let (n1, n2) = (apply_letters(tt, t2, &r2[..max_rest]), apply_letters(tt, t1, &r1[..max_rest]));
            let (r1, r2) = (n1, n2);
            let p1 = image_lengths(tt, t1.len(), &r1, max_rest);
            let p2 = image_lengths(tt, t2.len(), &r2, max_rest);
            let legal1 = legal_prefix(tt, s1.0, &r1, max_rest);
            let legal2 = legal_prefix(tt, s2.0, &r2, max_rest);
            // |I1(m1)| - m2 = |I2(m2)| - m1, and p2[m2] + m2 is increasing in m2
            let by_level: HashMap<usize, usize> = (0..=legal2).map(|m2| (p2[m2] + m2, m2)).collect();
            for m1 in 0..=legal1 {
                let Some(&m2) = by_level.get(&(p1[m1] + m1)) else { continue };
                if p1[m1] <= m2 {
                    continue;
                }
                let g = &r2[m2..p1[m1]];
                if g != &r1[m1..p2[m2]] {
                    continue;
                }
                let e1 = if m1 == 0 { s1.0 } else { r1[m1 - 1] };
                let e2 = if m2 == 0 { s2.0 } else { r2[m2 - 1] };
                if !junction_ok(tt, e1, e2) {
                    continue;
                }
                let legs = [
                    Leg { start: s1.0, offset: s1.1, rest: r1[..m1].to_vec() },
                    Leg { start: s2.0, offset: s2.1, rest: r2[..m2].to_vec() },
                ];
                out.push(NielsenPath::new(tt, InpMode::Twisted, legs, g.to_vec()));
            }
        }
    }
    out
}

// --------------------------------------------------------------- backward

/// Signed discrepancy between the two readings of the suffix of `I_i`
/// built so far: `A = U_partner · γ3` against `B = f(U_i)` (plus the start
/// tail once closed). `Surplus(W)` means `A = W·B`, `Deficit(W)` means
/// `B = W·A`. The identity is `Surplus([])`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Q {
    Surplus(VecDeque<Letter>),
    Deficit(VecDeque<Letter>),
}

impl Q {
    fn identity() -> Self {
        Q::Surplus(VecDeque::new())
    }

    fn deficit(w: VecDeque<Letter>) -> Self {
        if w.is_empty() {
            Q::identity()
        } else {
            Q::Deficit(w)
        }
    }

    fn signed(&self) -> i64 {
        match self {
            Q::Surplus(w) => w.len() as i64,
            Q::Deficit(w) => -(w.len() as i64),
        }
    }

    fn is_identity(&self) -> bool {
        self.signed() == 0
    }

    fn compare(a: &[Letter], b: &[Letter]) -> Option<Q> {
        if a.ends_with(b) {
            Some(Q::Surplus(a[..a.len() - b.len()].iter().copied().collect()))
        } else if b.ends_with(a) {
            Some(Q::deficit(b[..b.len() - a.len()].iter().copied().collect()))
        } else {
            None
        }
    }

    /// `A ← u·A`
    fn left_prepend(&self, u: Letter) -> Option<Q> {
        match self {
            Q::Surplus(w) => {
                if w.front().is_some_and(|&f| f.is_inverse_of(u)) {
                    return None;
                }
                let mut w = w.clone();
                w.push_front(u);
                Some(Q::Surplus(w))
            }
            Q::Deficit(w) => {
                if w.back() == Some(&u) {
                    let mut w = w.clone();
                    w.pop_back();
                    Some(Q::deficit(w))
                } else {
                    None
                }
            }
        }
    }

    /// `B ← p·B`
    fn right_remove(&self, p: &[Letter]) -> Option<Q> {
        match self {
            Q::Surplus(w) => {
                let (wl, pl) = (w.len(), p.len());
                if wl >= pl && w.iter().skip(wl - pl).eq(p.iter()) {
                    let mut w = w.clone();
                    w.truncate(wl - pl);
                    Some(Q::Surplus(w))
                } else if pl > wl && p[pl - wl..].iter().eq(w.iter()) {
                    Some(Q::deficit(p[..pl - wl].iter().copied().collect()))
                } else {
                    None
                }
            }
            Q::Deficit(w) => {
                let mut w = w.clone();
                for &l in p.iter().rev() {
                    w.push_front(l);
                }
                Some(Q::deficit(w))
            }
        }
    }
}

/// A leg under construction; `u_rev` holds its full letters back to front.
#[derive(Clone, Debug)]
struct PartialLeg {
    u_rev: Vec<Letter>,
    closed: Option<(Letter, usize)>,
}

impl PartialLeg {
    fn front(&self) -> Option<Letter> {
        self.u_rev.last().copied()
    }

    fn status(&self) -> LegStatus {
        match self.closed {
            Some((x, k)) => LegStatus::Closed(x, k),
            None => LegStatus::Open(self.front().expect("open legs are nonempty")),
        }
    }

    fn to_leg(&self) -> Leg {
        let (start, offset) = self.closed.expect("closed leg");
        Leg { start, offset, rest: self.u_rev.iter().rev().copied().collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum LegStatus {
    Open(Letter),
    Closed(Letter, usize),
}

type StateKey = (Q, Q, LegStatus, LegStatus);

/// Resource limits for the backward engine.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchLimits {
    pub max_states: usize,
    /// Longest common image suffix explored before a branch is abandoned
    /// as inconclusive; `None` derives it from the image lengths.
    pub max_suffix: Option<usize>,
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self { max_states: 2_000_000, max_suffix: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BackwardOutcome {
    /// Every branch ended in a contradiction, a sound repeat, or a solution.
    pub closed: bool,
    pub states: usize,
    /// Some branch returned to a state already on the search stack.
    pub cyclic_regress: bool,
    pub hit_state_cap: bool,
    pub hit_suffix_cap: bool,
    /// Accepted states that failed independent verification (always 0 unless
    /// the engine is wrong).
    pub rejected: usize,
}

struct Backward<'a> {
    tt: &'a RoseTrainTrack,
    mode: InpMode,
    max_states: usize,
    max_suffix: usize,
    out: BackwardOutcome,
    failed: HashSet<StateKey>,
    on_stack: HashSet<StateKey>,
    found: Vec<NielsenPath>,
}

impl<'a> Backward<'a> {
    fn new(tt: &'a RoseTrainTrack, mode: InpMode, limits: SearchLimits) -> Self {
        let c = tt.automorphism().total_image_length();
        Self {
            tt,
            mode,
            max_states: limits.max_states,
            max_suffix: limits.max_suffix.unwrap_or(4 * c + 64),
            out: BackwardOutcome::default(),
            failed: HashSet::new(),
            on_stack: HashSet::new(),
            found: Vec::new(),
        }
    }

    fn tick(&mut self) -> bool {
        self.out.states += 1;
        if self.out.states > self.max_states {
            self.out.hit_state_cap = true;
        }
        !self.out.hit_state_cap
    }

    /// Start letters `x` (with offset) that may precede `front` on a leg
    /// whose partner is closed at `partner`.
    fn close_options(&self, front: Option<Letter>, only: Option<Letter>, partner: Option<(Letter, usize)>) -> Vec<(Letter, usize)> {
        let tt = self.tt;
        let xs: Vec<Letter> = match only {
            Some(x) => vec![x],
            None => tt.directions().collect(),
        };
        let mut opts = Vec::new();
        for x in xs {
            if let Some(f) = front {
                if x.is_inverse_of(f) || !tt.legal_step(x, f) {
                    continue;
                }
            }
            for k in 0..tt.image_of(x).len() {
                let ok = match (self.mode, partner) {
                    (InpMode::Straight, _) => straight_start_ok(tt, x, k),
                    (InpMode::Twisted, Some(p)) => twisted_starts_ok(tt, (x, k), p),
                    (InpMode::Twisted, None) => true,
                };
                if ok {
                    opts.push((x, k));
                }
            }
        }
        opts
    }

    fn run(&mut self) {
        let tt = self.tt;
        for turn in tt.illegal_turns().to_vec() {
            let e = [turn.0.inverse(), turn.1.inverse()];
            let mut starts: [Vec<(PartialLeg, Vec<Letter>)>; 2] = [Vec::new(), Vec::new()];
            for i in 0..2 {
                let img = tt.image_of(e[i]);
                starts[i].push((PartialLeg { u_rev: vec![e[i]], closed: None }, img.iter().rev().copied().collect()));
                for (x, k) in self.close_options(None, Some(e[i]), None) {
                    let t = tail(tt, x, k).iter().rev().copied().collect();
                    starts[i].push((PartialLeg { u_rev: Vec::new(), closed: Some((x, k)) }, t));
                }
            }
            for (l0, k0) in &starts[0] {
                for (l1, k1) in &starts[1] {
                    if let (InpMode::Twisted, Some(a), Some(b)) = (self.mode, l0.closed, l1.closed) {
                        if !twisted_starts_ok(tt, a, b) {
                            continue;
                        }
                    }
                    self.phase1([l0.clone(), l1.clone()], [k0.clone(), k1.clone()]);
                    if self.out.hit_state_cap {
                        return;
                    }
                }
            }
        }
    }

    /// Grows the legs until the images `f(γ1)`, `f(γ2)` (held reversed in
    /// `k_rev`) stop agreeing; their common suffix is then `γ3`.
    fn phase1(&mut self, legs: [PartialLeg; 2], k_rev: [Vec<Letter>; 2]) {
        if !self.tick() {
            return;
        }
        let tt = self.tt;
        let s = k_rev[0].iter().zip(&k_rev[1]).take_while(|(a, b)| a == b).count();
        let (l0, l1) = (k_rev[0].len(), k_rev[1].len());
        if s < l0.min(l1) {
            if s > 0 {
                let g: Vec<Letter> = k_rev[0][..s].iter().rev().copied().collect();
                self.phase2_start(legs, &k_rev, g);
            }
            return;
        }
        let image_letter = |leg: &PartialLeg| leg.closed.map(|(x, k)| tt.image_of(x)[k]);
        let short = if l0 < l1 {
            0
        } else if l1 < l0 {
            1
        } else if legs[0].closed.is_none() {
            0
        } else if legs[1].closed.is_none() {
            1
        } else {
            if s > 0 && image_letter(&legs[0]) != image_letter(&legs[1]) {
                let g: Vec<Letter> = k_rev[0].iter().rev().copied().collect();
                self.phase2_start(legs, &k_rev, g);
            }
            return;
        };
        if s > self.max_suffix {
            self.out.hit_suffix_cap = true;
            return;
        }
        let long = 1 - short;
        if legs[short].closed.is_some() {
            // the common suffix would run into the start tail of the short leg
            if s == 0 || Some(k_rev[long][s]) == image_letter(&legs[short]) {
                return;
            }
            let g: Vec<Letter> = k_rev[short].iter().rev().copied().collect();
            self.phase2_start(legs, &k_rev, g);
            return;
        }
        let front = legs[short].front().expect("open leg");
        for u in tt.directions() {
            if u.is_inverse_of(front) || !tt.legal_step(u, front) {
                continue;
            }
            let mut nl = legs.clone();
            nl[short].u_rev.push(u);
            let mut nk = k_rev.clone();
            nk[short].extend(tt.image_of(u).iter().rev());
            self.phase1(nl, nk);
            if self.out.hit_state_cap {
                return;
            }
        }
        for (x, k) in self.close_options(Some(front), None, legs[long].closed) {
            let mut nl = legs.clone();
            nl[short].closed = Some((x, k));
            let mut nk = k_rev.clone();
            nk[short].extend(tail(tt, x, k).iter().rev());
            self.phase1(nl, nk);
            if self.out.hit_state_cap {
                return;
            }
        }
    }

    fn phase2_start(&mut self, legs: [PartialLeg; 2], k_rev: &[Vec<Letter>; 2], gamma3: Vec<Letter>) {
        let mut q = [Q::identity(), Q::identity()];
        for (i, qi) in q.iter_mut().enumerate() {
            let mut a: Vec<Letter> = legs[self.mode.partner(i)].u_rev.iter().rev().copied().collect();
            a.extend_from_slice(&gamma3);
            let b: Vec<Letter> = k_rev[i].iter().rev().copied().collect();
            match Q::compare(&a, &b) {
                Some(v) => *qi = v,
                None => return,
            }
        }
        self.phase2(legs, q, &gamma3);
    }

    fn viable(&self, legs: &[PartialLeg; 2], q: &[Q; 2]) -> bool {
        match self.mode {
            InpMode::Straight => (0..2).all(|i| match legs[i].closed {
                None => q[i].signed() > 0,
                Some(_) => q[i].is_identity(),
            }),
            InpMode::Twisted => {
                if q[0].signed() + q[1].signed() < 0 {
                    return false;
                }
                (0..2).all(|i| legs[i].closed.is_none() || (q[i].signed() <= 0 && q[1 - i].signed() >= 0))
            }
        }
    }

    /// Extends the legs backwards, consuming the discrepancies, until both
    /// legs are closed at valid start points with nothing left unexplained.
    fn phase2(&mut self, legs: [PartialLeg; 2], q: [Q; 2], gamma3: &[Letter]) {
        if !self.viable(&legs, &q) {
            return;
        }
        if legs[0].closed.is_some() && legs[1].closed.is_some() {
            if q[0].is_identity() && q[1].is_identity() {
                let np = NielsenPath::new(self.tt, self.mode, [legs[0].to_leg(), legs[1].to_leg()], gamma3.to_vec());
                if verify_nielsen_path(self.tt, &np) {
                    self.found.push(np);
                } else {
                    self.out.rejected += 1;
                }
            }
            return;
        }
        let key: StateKey = (q[0].clone(), q[1].clone(), legs[0].status(), legs[1].status());
        if self.failed.contains(&key) {
            return;
        }
        if self.on_stack.contains(&key) {
            self.out.cyclic_regress = true;
            return;
        }
        if !self.tick() {
            return;
        }
        self.on_stack.insert(key.clone());
        let before = self.found.len();

        // Moves on different legs commute, so acting on one chosen open leg
        // loses nothing.
        let i = (0..2)
            .filter(|&i| legs[i].closed.is_none())
            .max_by_key(|&i| (q[i].signed(), std::cmp::Reverse(i)))
            .expect("an open leg");
        let j = self.mode.partner(i);
        let tt = self.tt;
        let front = legs[i].front().expect("open leg");
        for u in tt.directions() {
            if u.is_inverse_of(front) || !tt.legal_step(u, front) {
                continue;
            }
            let mut nq = q.clone();
            let Some(a) = nq[j].left_prepend(u) else { continue };
            nq[j] = a;
            let Some(b) = nq[i].right_remove(tt.image_of(u)) else { continue };
            nq[i] = b;
            let mut nl = legs.clone();
            nl[i].u_rev.push(u);
            self.phase2(nl, nq, gamma3);
            if self.out.hit_state_cap {
                break;
            }
        }
        if !self.out.hit_state_cap {
            for (x, k) in self.close_options(Some(front), None, legs[1 - i].closed) {
                let mut nq = q.clone();
                let Some(b) = nq[i].right_remove(tail(tt, x, k)) else { continue };
                nq[i] = b;
                let mut nl = legs.clone();
                nl[i].closed = Some((x, k));
                self.phase2(nl, nq, gamma3);
                if self.out.hit_state_cap {
                    break;
                }
            }
        }
        self.on_stack.remove(&key);
        if self.found.len() == before && !self.out.hit_state_cap {
            self.failed.insert(key);
        }
    }
}

fn backward(tt: &RoseTrainTrack, mode: InpMode, limits: SearchLimits) -> (Vec<NielsenPath>, BackwardOutcome) {
    let mut engine = Backward::new(tt, mode, limits);
    engine.run();
    let mut out = engine.out;
    // Pruning a repeated state is sound only when INPs are finite in number,
    // which every edge growing guarantees. A fixed edge makes repeats real
    // (e.g. the family a1 a2^-k a1^-1 when a2 is fixed).
    let expanding = tt.directions().all(|d| tt.image_of(d).len() >= 2);
    out.closed = !out.hit_state_cap && !out.hit_suffix_cap && (expanding || !out.cyclic_regress);
    (engine.found, out)
}

// ---------------------------------------------------------------- reports

/// Leg-length bound (in letters) beyond which no Nielsen path can exist,
/// with its justification line. `None` when the map is not expanding.
pub fn auto_bound(tt: &RoseTrainTrack) -> Option<(usize, String)> {
    let m = TransitionMatrix::of(tt.automorphism());
    if !is_primitive(&m).ok()? {
        return None;
    }
    let pf = pf_data(&m, 1e-12).ok()?;
    if pf.lambda <= 1.0 {
        return None;
    }
    let c = tt.automorphism().total_image_length() as f64;
    let bound = (2.0 * c * pf.max_entry() / ((pf.lambda - 1.0) * pf.min_entry())).ceil() as usize + 1;
    let why = format!(
        "legs have PF-length at most 2C/(λ-1) with C = Σ|f(E)| = {c} (overestimate of the cancellation constant) \
         and λ = {:.6}; in letters: ceil(2C·max v/((λ-1)·min v)) + 1 = {bound}",
        pf.lambda
    );
    Some((bound, why))
}

#[derive(Clone, Debug)]
pub struct InpSearch {
    pub mode: InpMode,
    pub max_len: usize,
    pub paths: Vec<NielsenPath>,
    pub forward_found: usize,
    pub backward_found: usize,
    pub backward: BackwardOutcome,
    /// Both engines found the same paths with legs of at most `max_len` letters.
    pub engines_agree: bool,
    pub auto_bound: Option<usize>,
    pub conclusive: bool,
    /// No illegal turns, so no candidate junction exists.
    pub not_applicable: bool,
    pub justification: String,
}

impl InpSearch {
    pub fn is_conclusive_empty(&self) -> bool {
        self.conclusive && self.paths.is_empty()
    }
}

pub fn find_inps(tt: &RoseTrainTrack, mode: InpMode, max_len: Option<usize>) -> InpSearch {
    find_inps_with(tt, mode, max_len, SearchLimits::default())
}

/// Runs both engines (concurrently) and reconciles their answers. With
/// `max_len = None` the forward engine runs up to the cancellation bound,
/// capped to keep its ray tables small.
pub fn find_inps_with(tt: &RoseTrainTrack, mode: InpMode, max_len: Option<usize>, limits: SearchLimits) -> InpSearch {
    let not_applicable = tt.illegal_turns().is_empty();
    let bound = auto_bound(tt);
    let max_len = max_len.unwrap_or_else(|| default_forward_len(tt, bound.as_ref().map(|b| b.0))).max(1);

    let (fwd, (bwd, outcome)) = std::thread::scope(|s| {
        let handle = s.spawn(|| backward(tt, mode, limits));
        let fwd = match mode {
            InpMode::Straight => forward_straight(tt, max_len),
            InpMode::Twisted => forward_twisted(tt, max_len),
        };
        (fwd, handle.join().expect("backward engine panicked"))
    });

    let fwd_keys: HashSet<_> = fwd.iter().map(NielsenPath::key).collect();
    let bwd_keys: HashSet<_> = bwd.iter().map(NielsenPath::key).collect();
    let bwd_short: HashSet<_> = bwd
        .iter()
        .filter(|p| p.legs.iter().all(|l| l.len() <= max_len))
        .map(NielsenPath::key)
        .collect();
    let engines_agree = fwd_keys == bwd_short;

    let mut paths: Vec<NielsenPath> = Vec::new();
    let mut seen = HashSet::new();
    for p in fwd.into_iter().chain(bwd) {
        if seen.insert(p.key()) {
            paths.push(p);
        }
    }
    paths.sort_by_key(NielsenPath::key);

    let within_bound = bound.as_ref().is_some_and(|b| max_len >= b.0);
    let conclusive = engines_agree && (outcome.closed || within_bound);

    let mut justification = String::new();
    if not_applicable {
        justification.push_str("no illegal turns: every turn is legal and no junction exists; ");
    }
    if outcome.closed {
        let _ = write!(
            justification,
            "backward search closed after {} states{}",
            outcome.states,
            if outcome.cyclic_regress { " (periodic regress detected)" } else { "" }
        );
    } else if !outcome.hit_state_cap && !outcome.hit_suffix_cap {
        let _ = write!(
            justification,
            "backward search met a periodic regress after {} states on a map with a non-expanding edge, so repeats may hide infinite families",
            outcome.states
        );
    } else {
        let _ = write!(
            justification,
            "backward search stopped at its {} cap after {} states",
            if outcome.hit_state_cap { "state" } else { "suffix" },
            outcome.states
        );
    }
    let _ = write!(justification, "; forward search to {max_len} letters");
    match &bound {
        Some((b, why)) => {
            let _ = write!(
                justification,
                " {} the bound {b} ({why})",
                if within_bound { "reaches" } else { "is below" }
            );
        }
        None => justification.push_str(" (no cancellation bound: map not expanding)"),
    }
    if !engines_agree {
        justification.push_str("; ENGINES DISAGREE");
    }

    InpSearch {
        mode,
        max_len,
        forward_found: fwd_keys.len(),
        backward_found: bwd_keys.len(),
        paths,
        backward: outcome,
        engines_agree,
        auto_bound: bound.map(|b| b.0),
        conclusive,
        not_applicable,
        justification,
    }
}

#[derive(Clone, Debug)]
pub struct PowerInps {
    pub power: u32,
    pub straight: InpSearch,
    pub twisted: InpSearch,
}

#[derive(Clone, Debug)]
pub struct PeriodicInpReport {
    pub t_max: u32,
    pub powers: Vec<PowerInps>,
}

impl PeriodicInpReport {
    pub fn all_conclusive_empty(&self) -> bool {
        self.powers.iter().all(|p| p.straight.is_conclusive_empty() && p.twisted.is_conclusive_empty())
    }
}

fn power_within_budget(f: &Automorphism, t: u32, budget: usize) -> Result<Automorphism> {
    let mut acc = Automorphism::identity(f.basis());
    for _ in 0..t {
        acc = acc.compose(f)?;
        if acc.total_image_length() > budget {
            return Err(Error::MemoryBudget(budget));
        }
    }
    Ok(acc)
}

/// Searches `f^t` for `t = 1..=t_max`; `t_max` defaults to the period of the
/// derivative map.
pub fn find_periodic_inps(
    tt: &RoseTrainTrack,
    t_max: Option<u32>,
    max_len: Option<usize>,
    budget: usize,
) -> Result<PeriodicInpReport> {
    let t_max = t_max.unwrap_or_else(|| tt.dmap_period()).max(1);
    let mut powers = Vec::new();
    for t in 1..=t_max {
        let ft = power_within_budget(tt.automorphism(), t, budget)?;
        let ttt = RoseTrainTrack::build(&ft)?;
        powers.push(PowerInps {
            power: t,
            straight: find_inps(&ttt, InpMode::Straight, max_len),
            twisted: find_inps(&ttt, InpMode::Twisted, max_len),
        });
    }
    Ok(PeriodicInpReport { t_max, powers })
}

#[derive(Clone, Debug)]
pub struct FixedSubgroupVerdict {
    /// Fix is certified trivial. `false` means "not certified", not
    /// "nontrivial".
    pub certified_trivial: bool,
    /// The graph whose vertices are endpoints of Nielsen paths and whose
    /// edges are the Nielsen paths contains a cycle.
    pub nielsen_cycle: bool,
    pub search: InpSearch,
    pub reason: String,
}

/// Whether the Nielsen paths, seen as edges between their endpoints, close
/// up into a loop.
pub fn nielsen_graph_has_cycle(paths: &[NielsenPath]) -> bool {
    let mut ids: HashMap<RosePoint, usize> = HashMap::new();
    let edges: Vec<(usize, usize)> = paths
        .iter()
        .map(|p| {
            let [a, b] = p.endpoints();
            let next = ids.len();
            let a = *ids.entry(a).or_insert(next);
            let next = ids.len();
            let b = *ids.entry(b).or_insert(next);
            (a, b)
        })
        .collect();
    let mut uf = UnionFind::<usize>::new(ids.len());
    edges.into_iter().any(|(a, b)| !uf.union(a, b))
}

/// On an expanding train track every fixed element is carried by a loop of
/// Nielsen paths, i.e. by a cycle in the Nielsen graph. A conclusive
/// straight search whose Nielsen graph is a forest (in particular an empty
/// one) certifies that the fixed subgroup is trivial.
pub fn fixed_subgroup_trivial(tt: &RoseTrainTrack) -> FixedSubgroupVerdict {
    let search = find_inps(tt, InpMode::Straight, None);
    let expanding = is_primitive(&tt.transition_matrix()).unwrap_or(false);
    let nielsen_cycle = nielsen_graph_has_cycle(&search.paths);
    let (certified_trivial, reason) = if !expanding {
        (false, "transition matrix not primitive; the train track is not expanding".to_string())
    } else if search.not_applicable {
        (false, "no illegal turns".to_string())
    } else if !search.conclusive {
        (false, format!("search inconclusive: {}", search.justification))
    } else if nielsen_cycle {
        (false, format!("{} Nielsen path(s) close up into a loop", search.paths.len()))
    } else if search.paths.is_empty() {
        (true, format!("no indivisible Nielsen paths: {}", search.justification))
    } else {
        (
            true,
            format!(
                "{} Nielsen path(s), none closing up into a loop: {}",
                search.paths.len(),
                search.justification
            ),
        )
    };
    FixedSubgroupVerdict { certified_trivial, nielsen_cycle, search, reason }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphisms::{make_alpha, make_alpha_inverse, x0_basis_change};

    fn tt(n: usize) -> RoseTrainTrack {
        RoseTrainTrack::build(&make_alpha(n).unwrap()).unwrap()
    }

    #[test]
    fn q_moves() {
        let u = Letter::pos(0);
        let v = Letter::pos(1);
        let s = Q::identity().left_prepend(u).unwrap();
        assert_eq!(s.signed(), 1);
        assert_eq!(s.right_remove(&[u]).unwrap(), Q::identity());
        assert_eq!(s.right_remove(&[v, u]).unwrap(), Q::Deficit([v].into_iter().collect()));
        assert!(s.right_remove(&[v]).is_none());
        let d = Q::Deficit([v].into_iter().collect());
        assert_eq!(d.left_prepend(v).unwrap(), Q::identity());
        assert!(d.left_prepend(u).is_none());
    }

    #[test]
    fn alpha_has_no_inps() {
        for n in 3..=5 {
            let t = tt(n);
            for mode in [InpMode::Straight, InpMode::Twisted] {
                let r = find_inps(&t, mode, None);
                assert!(r.is_conclusive_empty(), "n = {n}, {mode:?}: {}", r.justification);
                assert!(r.engines_agree);
            }
        }
    }

    #[test]
    fn rank_two_is_not_certified() {
        let t = RoseTrainTrack::build(&make_alpha(2).unwrap()).unwrap();
        let r = find_inps(&t, InpMode::Straight, None);
        assert!(!r.is_conclusive_empty());
        assert!(r.engines_agree, "{}", r.justification);
        assert!(!fixed_subgroup_trivial(&t).certified_trivial);
    }

    #[test]
    fn inverse_in_positive_basis_has_trivial_fix() {
        let change = x0_basis_change(3).unwrap();
        let g = make_alpha_inverse(3).unwrap().0.in_basis(&change).unwrap();
        let t = RoseTrainTrack::build(&g).unwrap();
        let v = fixed_subgroup_trivial(&t);
        assert!(v.certified_trivial, "{}", v.reason);
    }

    #[test]
    fn identity_not_applicable() {
        let f = Automorphism::identity(&Basis::standard(3).unwrap());
        let t = RoseTrainTrack::build(&f).unwrap();
        let r = find_inps(&t, InpMode::Straight, Some(6));
        assert!(r.not_applicable);
        assert!(r.paths.is_empty());
        assert!(!fixed_subgroup_trivial(&t).certified_trivial);
    }

    #[test]
    fn periodic_alpha3() {
        let r = find_periodic_inps(&tt(3), Some(2), None, DEFAULT_MEMORY_BUDGET).unwrap();
        assert_eq!(r.powers.len(), 2);
        assert!(r.all_conclusive_empty());
    }

    #[test]
    fn memory_budget_enforced() {
        assert_eq!(find_periodic_inps(&tt(3), Some(4), None, 50).unwrap_err(), Error::MemoryBudget(50));
    }
}
