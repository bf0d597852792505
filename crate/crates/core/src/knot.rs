//! Oriented link diagrams in PD notation and their sl(N) polynomials.
//!
//! A crossing is `X[a,b,c,d]` (positive) or `Y[a,b,c,d]` (negative) with the
//! four arcs listed clockwise starting at the incoming under-strand, so `c`
//! is the outgoing under-strand. The over-strand runs b -> d at a positive
//! crossing and d -> b at a negative one. `O[k]` adds a crossingless circle.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{CanonicalForm, ColoredGraph, Edge, Endpoint, GraphExpr, Vertex, VertexKind};
use crate::laurent::{quantum_integer, LaurentPoly};
use crate::rewrite::{Engine, EngineError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KnotError {
    #[error("malformed PD token {0:?}")]
    Malformed(String),
    #[error("arc {arc} appears {count} time(s), expected 2")]
    DanglingArc { arc: u64, count: usize },
    #[error("arc {0} enters (or leaves) two crossings")]
    OrientationConflict(u64),
    #[error("arc {0} is used by a circle and a crossing")]
    CircleArcReused(u64),
}

#[derive(Debug, Error)]
pub enum InvariantError {
    #[error("state {state} of the resolution: {source}")]
    Engine { state: String, source: EngineError },
    #[error("value is not divisible by [N]")]
    NotDivisible,
}

impl InvariantError {
    pub fn canonical(&self) -> Option<&CanonicalForm> {
        match self {
            InvariantError::Engine { source: EngineError::Irreducible { canonical }, .. } => Some(canonical),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Positive,
    Negative,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Crossing {
    pub sign: Sign,
    pub arcs: [u64; 4],
}

impl Crossing {
    pub fn over_in(&self) -> u64 {
        match self.sign {
            Sign::Positive => self.arcs[1],
            Sign::Negative => self.arcs[3],
        }
    }

    pub fn over_out(&self) -> u64 {
        match self.sign {
            Sign::Positive => self.arcs[3],
            Sign::Negative => self.arcs[1],
        }
    }

    pub fn ins(&self) -> [u64; 2] {
        [self.arcs[0], self.over_in()]
    }

    pub fn outs(&self) -> [u64; 2] {
        [self.arcs[2], self.over_out()]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PdDiagram {
    pub crossings: Vec<Crossing>,
    /// Arc labels of crossingless circles.
    pub circles: Vec<u64>,
}

fn parse_token(tok: &str) -> Result<(char, Vec<u64>), KnotError> {
    let bad = || KnotError::Malformed(tok.to_string());
    let mut chars = tok.chars();
    let letter = chars.next().ok_or_else(bad)?;
    let body = chars.as_str().trim();
    let inner = body.strip_prefix('[').and_then(|b| b.strip_suffix(']')).ok_or_else(bad)?;
    let nums = inner
        .split(',')
        .map(|s| s.trim().parse::<u64>().ok().filter(|&v| v > 0).ok_or_else(bad))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((letter, nums))
}

pub fn parse_pd(text: &str) -> Result<PdDiagram, KnotError> {
    let mut crossings = Vec::new();
    let mut circles = Vec::new();
    for tok in text.split([';', '\n']).map(str::trim).filter(|t| !t.is_empty()) {
        let (letter, nums) = parse_token(tok)?;
        match (letter, nums.as_slice()) {
            ('X', &[a, b, c, d]) => crossings.push(Crossing { sign: Sign::Positive, arcs: [a, b, c, d] }),
            ('Y', &[a, b, c, d]) => crossings.push(Crossing { sign: Sign::Negative, arcs: [a, b, c, d] }),
            ('O', &[k]) => circles.push(k),
            _ => return Err(KnotError::Malformed(tok.to_string())),
        }
    }
    let d = PdDiagram { crossings, circles };
    d.validate()?;
    Ok(d)
}

impl PdDiagram {
    pub fn validate(&self) -> Result<(), KnotError> {
        let mut seen: BTreeMap<u64, (usize, usize)> = BTreeMap::new();
        for c in &self.crossings {
            for a in c.ins() {
                seen.entry(a).or_default().0 += 1;
            }
            for a in c.outs() {
                seen.entry(a).or_default().1 += 1;
            }
        }
        for (&arc, &(i, o)) in &seen {
            if i + o != 2 {
                return Err(KnotError::DanglingArc { arc, count: i + o });
            }
            if i != 1 {
                return Err(KnotError::OrientationConflict(arc));
            }
        }
        let mut circ = BTreeSet::new();
        for &k in &self.circles {
            if seen.contains_key(&k) || !circ.insert(k) {
                return Err(KnotError::CircleArcReused(k));
            }
        }
        Ok(())
    }

    pub fn writhe(&self) -> i64 {
        self.crossings.iter().map(|c| if c.sign == Sign::Positive { 1 } else { -1 }).sum()
    }

    /// Number of link components.
    pub fn components(&self) -> usize {
        // each arc continues through its head crossing along the same strand
        let mut next: BTreeMap<u64, u64> = BTreeMap::new();
        for c in &self.crossings {
            next.insert(c.arcs[0], c.arcs[2]);
            next.insert(c.over_in(), c.over_out());
        }
        let mut seen = BTreeSet::new();
        let mut count = self.circles.len();
        for &start in next.keys() {
            if seen.contains(&start) {
                continue;
            }
            count += 1;
            let mut a = start;
            while seen.insert(a) {
                a = next[&a];
            }
        }
        count
    }

    /// Whether the crossings glue into a sphere: V - E + F = 2 on every
    /// connected piece, with faces traced by turning at each crossing.
    pub fn is_planar(&self) -> bool {
        let mut ends: BTreeMap<u64, Vec<(usize, usize)>> = BTreeMap::new();
        for (x, c) in self.crossings.iter().enumerate() {
            for (slot, &a) in c.arcs.iter().enumerate() {
                ends.entry(a).or_default().push((x, slot));
            }
        }
        // a dart is an arc end to leave from
        let other_end = |from: (usize, usize)| -> (usize, usize) {
            let e = &ends[&self.crossings[from.0].arcs[from.1]];
            if e[0] == from { e[1] } else { e[0] }
        };
        let mut seen = BTreeSet::new();
        let mut faces = 0;
        for x in 0..self.crossings.len() {
            for slot in 0..4 {
                if seen.contains(&(x, slot)) {
                    continue;
                }
                faces += 1;
                let mut d = (x, slot);
                while seen.insert(d) {
                    let (y, t) = other_end(d);
                    d = (y, (t + 1) % 4);
                }
            }
        }
        let mut parent: Vec<usize> = (0..self.crossings.len()).collect();
        fn find(p: &mut Vec<usize>, i: usize) -> usize {
            if p[i] != i {
                let r = find(p, p[i]);
                p[i] = r;
            }
            p[i]
        }
        for e in ends.values() {
            let (a, b) = (find(&mut parent, e[0].0), find(&mut parent, e[1].0));
            parent[a] = b;
        }
        let pieces = (0..parent.len()).filter(|&i| find(&mut parent, i) == i).count();
        let v = self.crossings.len() as i64;
        v - 2 * v + faces as i64 == 2 * pieces as i64
    }

    /// Crossing change at every crossing.
    pub fn mirror(&self) -> PdDiagram {
        let crossings = self
            .crossings
            .iter()
            .map(|c| {
                let [a, b, cc, d] = c.arcs;
                match c.sign {
                    Sign::Positive => Crossing { sign: Sign::Negative, arcs: [b, cc, d, a] },
                    Sign::Negative => Crossing { sign: Sign::Positive, arcs: [d, a, b, cc] },
                }
            })
            .collect();
        PdDiagram { crossings, circles: self.circles.clone() }
    }

    pub fn disjoint_union(&self, other: &PdDiagram) -> PdDiagram {
        let shift = self.crossings.iter().flat_map(|c| c.arcs).chain(self.circles.iter().copied()).max().unwrap_or(0);
        let mut out = self.clone();
        out.crossings.extend(other.crossings.iter().map(|c| Crossing { sign: c.sign, arcs: c.arcs.map(|a| a + shift) }));
        out.circles.extend(other.circles.iter().map(|a| a + shift));
        out
    }
}

impl fmt::Display for PdDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut toks: Vec<String> = self
            .crossings
            .iter()
            .map(|c| {
                let l = if c.sign == Sign::Positive { 'X' } else { 'Y' };
                let [a, b, cc, d] = c.arcs;
                format!("{l}[{a},{b},{cc},{d}]")
            })
            .collect();
        toks.extend(self.circles.iter().map(|k| format!("O[{k}]")));
        f.write_str(&toks.join(";"))
    }
}

/// Closure of a braid on `strands` strands. Letter `i` (1-based) crosses
/// strands i and i+1, positively for `i > 0`.
pub fn braid_closure_pd(strands: usize, word: &[i32]) -> PdDiagram {
    let mut pos: Vec<u64> = (1..=strands as u64).collect();
    let mut next = strands as u64 + 1;
    let mut crossings = Vec::new();
    for &l in word {
        let i = l.unsigned_abs() as usize - 1;
        assert!(i + 1 < strands, "braid letter {l} out of range");
        let (left, right) = (pos[i], pos[i + 1]);
        let (to_right, to_left) = (next, next + 1);
        next += 2;
        // the left strand moves right and vice versa
        crossings.push(if l > 0 {
            Crossing { sign: Sign::Positive, arcs: [right, left, to_left, to_right] }
        } else {
            Crossing { sign: Sign::Negative, arcs: [left, to_left, to_right, right] }
        });
        pos[i] = to_left;
        pos[i + 1] = to_right;
    }
    let rename: BTreeMap<u64, u64> = pos.iter().enumerate().map(|(p, &a)| (a, p as u64 + 1)).collect();
    for c in &mut crossings {
        c.arcs = c.arcs.map(|a| *rename.get(&a).unwrap_or(&a));
    }
    let circles = (0..strands).filter(|&p| pos[p] == p as u64 + 1).map(|p| p as u64 + 1).collect();
    PdDiagram { crossings, circles }
}

/// Which resolution picture receives which pair of coefficients.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum Convention {
    /// Positive: q^{1-N} smoothing - q^{-N} wide. Negative: q^{N-1} smoothing - q^N wide.
    #[default]
    A,
    /// The same coefficient pairs with the two pictures exchanged.
    B,
}

fn coefficients(sign: Sign, n: u32, conv: Convention) -> (LaurentPoly, LaurentPoly) {
    let n = n as i64;
    let (first, second) = match sign {
        Sign::Positive => (LaurentPoly::monomial(1 - n, 1), LaurentPoly::monomial(-n, -1)),
        Sign::Negative => (LaurentPoly::monomial(n - 1, 1), LaurentPoly::monomial(n, -1)),
    };
    match conv {
        Convention::A => (first, second),
        Convention::B => (second, first),
    }
}

/// One term of the resolution: `wide[i]` says whether crossing i became the
/// wide edge graph.
#[derive(Clone, Debug)]
pub struct ResolvedState {
    pub wide: Vec<bool>,
    pub coeff: LaurentPoly,
    pub graph: ColoredGraph,
}

impl ResolvedState {
    pub fn label(&self) -> String {
        self.wide.iter().map(|&w| if w { 'W' } else { 'S' }).collect()
    }
}

fn state_graph(d: &PdDiagram, wide: &[bool]) -> ColoredGraph {
    // where each arc's head leads: another arc (smoothed) or a merge vertex
    let mut cont: BTreeMap<u64, u64> = BTreeMap::new();
    let mut ends_at: BTreeMap<u64, usize> = BTreeMap::new();
    let mut starts_at: BTreeMap<u64, usize> = BTreeMap::new();
    for (i, c) in d.crossings.iter().enumerate() {
        if wide[i] {
            for a in c.ins() {
                ends_at.insert(a, i);
            }
            for a in c.outs() {
                starts_at.insert(a, i);
            }
        } else {
            cont.insert(c.arcs[0], c.over_out());
            cont.insert(c.over_in(), c.arcs[2]);
        }
    }
    let mut g = ColoredGraph::default();
    for (i, &w) in wide.iter().enumerate() {
        if w {
            g.vertices.push(Vertex { id: format!("m{i}"), kind: VertexKind::Merge });
            g.vertices.push(Vertex { id: format!("s{i}"), kind: VertexKind::Split });
        }
    }
    let vidx = |id: String| g.vertices.iter().position(|v| v.id == id).unwrap();
    let mut edges = Vec::new();
    for (i, &w) in wide.iter().enumerate() {
        if w {
            edges.push(Edge {
                id: format!("w{i}"),
                color: 2,
                tail: Endpoint::Vertex(vidx(format!("m{i}"))),
                head: Endpoint::Vertex(vidx(format!("s{i}"))),
            });
        }
    }
    let mut used = BTreeSet::new();
    for (&start, &i) in &starts_at {
        let mut a = start;
        used.insert(a);
        while let Some(&b) = cont.get(&a) {
            a = b;
            used.insert(a);
        }
        edges.push(Edge {
            id: format!("e{start}"),
            color: 1,
            tail: Endpoint::Vertex(vidx(format!("s{i}"))),
            head: Endpoint::Vertex(vidx(format!("m{}", ends_at[&a]))),
        });
    }
    g.edges = edges;
    // arcs never reaching a vertex close up into circles
    for &a in cont.keys() {
        if used.contains(&a) {
            continue;
        }
        let mut b = a;
        while used.insert(b) {
            b = cont[&b];
        }
        g.circles.push(1);
    }
    g.circles.extend(d.circles.iter().map(|_| 1));
    g
}

/// All 2^c states, unmerged, in binary order of the `wide` choices.
pub fn resolve(d: &PdDiagram, n: u32, conv: Convention) -> Vec<ResolvedState> {
    let c = d.crossings.len();
    assert!(c < 31, "too many crossings to resolve");
    (0..1u32 << c)
        .map(|mask| {
            let wide: Vec<bool> = (0..c).map(|i| mask >> i & 1 == 1).collect();
            let coeff = d.crossings.iter().zip(&wide).fold(LaurentPoly::one(), |acc, (x, &w)| {
                let (s, t) = coefficients(x.sign, n, conv);
                &acc * if w { &t } else { &s }
            });
            let graph = state_graph(d, &wide);
            ResolvedState { wide, coeff, graph }
        })
        .collect()
}

/// The resolution with isomorphic state graphs merged.
pub fn resolve_expr(d: &PdDiagram, n: u32, conv: Convention) -> GraphExpr {
    let mut expr = GraphExpr::new();
    for s in resolve(d, n, conv) {
        expr.add_term(s.coeff, s.graph);
    }
    expr
}

pub fn link_invariant_with(engine: &Engine, d: &PdDiagram, n: u32, conv: Convention) -> Result<LaurentPoly, InvariantError> {
    resolve(d, n, conv)
        .into_par_iter()
        .map(|s| {
            let v = engine.evaluate(&s.graph, n).map_err(|source| InvariantError::Engine { state: s.label(), source })?;
            Ok(&s.coeff * &v)
        })
        .try_reduce(LaurentPoly::zero, |a, b| Ok(a + b))
}

pub fn link_invariant(d: &PdDiagram, n: u32) -> Result<LaurentPoly, InvariantError> {
    link_invariant_with(&Engine::default(), d, n, Convention::A)
}

/// Divides by the unknot value `[N]`.
pub fn normalize(p: &LaurentPoly, n: u32) -> Result<LaurentPoly, InvariantError> {
    p.div_exact(&quantum_integer(n)).ok_or(InvariantError::NotDivisible)
}

pub mod examples {
    use super::{braid_closure_pd, PdDiagram};

    pub fn unknot() -> PdDiagram {
        PdDiagram { crossings: vec![], circles: vec![1] }
    }

    pub fn trefoil() -> PdDiagram {
        braid_closure_pd(2, &[1, 1, 1])
    }

    pub fn figure_eight() -> PdDiagram {
        braid_closure_pd(3, &[1, -2, 1, -2])
    }

    pub fn hopf() -> PdDiagram {
        braid_closure_pd(2, &[1, 1])
    }
}
