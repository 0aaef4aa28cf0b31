//! Vertex blow-up of the rose and the irreducibility test built on it.
//!
//! The single vertex is replaced by a simplex whose vertices are the gates.
//! Turns taken by edge images, closed under the derivative map, become
//! simplex edges; the rose edges are glued back at the gates of their two
//! germs. For a primitive train track with no periodic fixed classes the
//! automorphism is irreducible with irreducible powers exactly when the
//! retained simplex edges connect all gate vertices.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::automorphisms::{positivity_basis, Automorphism};
use crate::error::{Error, Result};
use crate::traintrack::{
    find_periodic_inps, nielsen_graph_has_cycle, primitivity_exponent, PeriodicInpReport, RoseTrainTrack, Turn,
    DEFAULT_MEMORY_BUDGET,
};
use crate::words::Letter;

/// Turns `{x^{-1}, y}` for every adjacent pair `x y` inside an edge image.
pub fn taken_turns(tt: &RoseTrainTrack) -> BTreeSet<Turn> {
    let mut out = BTreeSet::new();
    for i in 0..tt.rank() {
        for w in tt.image_of(Letter::pos(i)).windows(2) {
            out.insert(Turn::between(w[0], w[1]));
        }
    }
    out
}

/// Closure of a turn set under `{d, d'} ↦ {Df(d), Df(d')}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TurnClosure {
    pub turns: BTreeSet<Turn>,
    /// Turns of the closure whose image collapses to a single direction.
    pub degenerate: BTreeSet<Turn>,
}

pub fn turn_closure(tt: &RoseTrainTrack, seeds: &BTreeSet<Turn>) -> TurnClosure {
    let mut turns: BTreeSet<Turn> = seeds.iter().copied().filter(|t| !t.is_degenerate()).collect();
    let mut degenerate = BTreeSet::new();
    let mut work: Vec<Turn> = turns.iter().copied().collect();
    while let Some(t) = work.pop() {
        let img = Turn::new(tt.dmap(t.0), tt.dmap(t.1));
        if img.is_degenerate() {
            degenerate.insert(t);
        } else if turns.insert(img) {
            work.push(img);
        }
    }
    TurnClosure { turns, degenerate }
}

/// Components of a graph on `size` vertices, each sorted, in order of first vertex.
fn components(size: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::<usize>::new(size);
    for (a, b) in edges {
        uf.union(a, b);
    }
    let labels = uf.into_labeling();
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut index_of_label = std::collections::HashMap::new();
    for (v, l) in labels.into_iter().enumerate() {
        let idx = *index_of_label.entry(l).or_insert_with(|| {
            comps.push(Vec::new());
            comps.len() - 1
        });
        comps[idx].push(v);
    }
    comps
}

/// The blown-up graph with the retained simplex edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlowupGraph {
    /// `gates[g]` lists the directions glued to gate vertex `g`.
    pub gates: Vec<Vec<Letter>>,
    /// Simplex edges from the closure of the taken turns.
    pub simplex_edges: BTreeSet<(usize, usize)>,
    /// Simplex edges from the taken turns alone.
    pub pre_closure_edges: BTreeSet<(usize, usize)>,
    /// Rose edge `a_i` joins `gate(a_i)` to `gate(A_i)`.
    pub old_edges: Vec<(usize, usize)>,
    pub taken: BTreeSet<Turn>,
    pub closure: TurnClosure,
}

fn gate_edges(tt: &RoseTrainTrack, turns: &BTreeSet<Turn>) -> BTreeSet<(usize, usize)> {
    turns
        .iter()
        .filter_map(|t| {
            let (a, b) = (tt.gate(t.0), tt.gate(t.1));
            (a != b).then(|| (a.min(b), a.max(b)))
        })
        .collect()
}

impl BlowupGraph {
    /// The graph obtained from an arbitrary seed turn set.
    pub fn from_turns(tt: &RoseTrainTrack, seeds: &BTreeSet<Turn>) -> Self {
        let closure = turn_closure(tt, seeds);
        Self {
            gates: tt.gates().to_vec(),
            simplex_edges: gate_edges(tt, &closure.turns),
            pre_closure_edges: gate_edges(tt, seeds),
            old_edges: (0..tt.rank()).map(|i| (tt.gate(Letter::pos(i)), tt.gate(Letter::neg(i)))).collect(),
            taken: seeds.clone(),
            closure,
        }
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn simplex_components(&self) -> Vec<Vec<usize>> {
        components(self.gate_count(), self.simplex_edges.iter().copied())
    }

    pub fn pre_closure_components(&self) -> Vec<Vec<usize>> {
        components(self.gate_count(), self.pre_closure_edges.iter().copied())
    }

    /// Components at the level of germs (directions), before and after the
    /// closure: the finer picture in which germs of one gate are not merged.
    pub fn germ_components(&self, after_closure: bool) -> Vec<Vec<Letter>> {
        let size = self.gates.iter().map(Vec::len).sum();
        let turns = if after_closure { &self.closure.turns } else { &self.taken };
        components(size, turns.iter().map(|t| (t.0.id(), t.1.id())))
            .into_iter()
            .map(|c| c.into_iter().map(Letter::from_id).collect())
            .collect()
    }

    pub fn to_dot(&self, tt: &RoseTrainTrack) -> String {
        let b = tt.basis();
        let label = |g: usize| self.gates[g].iter().map(|&d| b.render_letter(d)).collect::<Vec<_>>().join(",");
        let mut s = String::from("graph gamma2 {\n");
        for g in 0..self.gate_count() {
            let _ = writeln!(s, "  g{g} [label=\"{{{}}}\"];", label(g));
        }
        for &(a, c) in &self.simplex_edges {
            let _ = writeln!(s, "  g{a} -- g{c} [kind=simplex];");
        }
        for (i, &(a, c)) in self.old_edges.iter().enumerate() {
            let _ = writeln!(s, "  g{a} -- g{c} [kind=old, label=\"{}\", style=bold];", b.name(i));
        }
        s.push_str("}\n");
        s
    }
}

pub fn build_gamma2(tt: &RoseTrainTrack) -> BlowupGraph {
    BlowupGraph::from_turns(tt, &taken_turns(tt))
}

/// The induced map on fundamental groups is onto iff the retained simplex
/// edges connect every gate vertex.
pub fn theta_surjective(g: &BlowupGraph) -> bool {
    g.simplex_components().len() == 1
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Iwip,
    /// Not irreducible with irreducible powers: the transition matrix has
    /// no positive power, or the hypotheses hold and the simplex splits.
    Reducible,
    Inconclusive,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    Certified,
    Failed,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct IwipCertificate {
    /// Sign flips applied to reach a positive basis, if any.
    pub basis_change: Option<crate::words::BasisChange>,
    pub train_track: RoseTrainTrack,
    pub primitive: bool,
    pub primitivity_exponent: Option<usize>,
    pub gamma2: BlowupGraph,
    pub theta_surjective: bool,
    pub no_periodic_fixed_factor: Flag,
    pub periodic: Option<PeriodicInpReport>,
    pub verdict: Verdict,
    pub reasoning: Vec<String>,
}

/// Assembles the irreducibility certificate. Powers `1..=t_max` are
/// searched for Nielsen loops (default: the derivative-map period, at least 1).
pub fn iwip_certificate(f: &Automorphism, t_max: Option<u32>) -> Result<IwipCertificate> {
    let (g, basis_change) = if f.is_positive() {
        (f.clone(), None)
    } else {
        let change = positivity_basis(f).ok_or(Error::NotPositive)?;
        (f.in_basis(&change)?, Some(change))
    };
    let tt = RoseTrainTrack::build(&g)?;
    let mut reasoning = Vec::new();
    if basis_change.is_some() {
        reasoning.push(format!("positive in the basis {}", g.basis().names().join(", ")));
    }

    let exponent = primitivity_exponent(&tt.transition_matrix())?;
    let primitive = exponent.is_some();
    match exponent {
        Some(k) => reasoning.push(format!("transition matrix primitive: M^{k} > 0")),
        None => reasoning.push("transition matrix not primitive".into()),
    }

    let gamma2 = build_gamma2(&tt);
    let theta = theta_surjective(&gamma2);
    reasoning.push(format!(
        "{} gate vertices; retained simplex edges form {} component(s)",
        gamma2.gate_count(),
        gamma2.simplex_components().len()
    ));

    let (flag, periodic) = if primitive {
        let report = find_periodic_inps(&tt, t_max, None, DEFAULT_MEMORY_BUDGET)?;
        let mut flag = Flag::Certified;
        for p in &report.powers {
            let s = &p.straight;
            if nielsen_graph_has_cycle(&s.paths) {
                flag = Flag::Failed;
                reasoning.push(format!("power {}: Nielsen paths close up into a fixed loop", p.power));
            } else if !s.conclusive {
                if flag == Flag::Certified {
                    flag = Flag::Inconclusive;
                }
                reasoning.push(format!("power {}: Nielsen path search inconclusive", p.power));
            } else {
                reasoning.push(format!(
                    "power {}: {} Nielsen path(s), no loop; no fixed conjugacy class",
                    p.power,
                    s.paths.len()
                ));
            }
        }
        (flag, Some(report))
    } else {
        (Flag::Inconclusive, None)
    };

    let verdict = if !primitive {
        reasoning.push("a rose map without a primitive transition matrix has an invariant sub-rose for some power".into());
        Verdict::Reducible
    } else if flag != Flag::Certified {
        Verdict::Inconclusive
    } else if theta {
        Verdict::Iwip
    } else {
        Verdict::Reducible
    };

    Ok(IwipCertificate {
        basis_change,
        train_track: tt,
        primitive,
        primitivity_exponent: exponent,
        gamma2,
        theta_surjective: theta,
        no_periodic_fixed_factor: flag,
        periodic,
        verdict,
        reasoning,
    })
}
