//! Oriented colored trivalent graphs, optionally with labelled boundary legs.
//!
//! A vertex is either a merge (two incoming edges, one outgoing) or a split
//! (one incoming, two outgoing). The flux condition requires the outgoing
//! color of a merge to be the sum of its incoming colors, and dually for a
//! split. Free loop components without vertices are kept as `circles`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::laurent::LaurentPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Merge,
    Split,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    Vertex(usize),
    Leg(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub id: String,
    pub kind: VertexKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub color: u8,
    pub tail: Endpoint,
    pub head: Endpoint,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ColoredGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    /// Colors of free loop components.
    pub circles: Vec<u8>,
    /// Boundary leg labels; `Endpoint::Leg(i)` refers to `legs[i]`.
    pub legs: Vec<String>,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("unknown endpoint `{0}`")]
    UnknownEndpoint(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("malformed graph file: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    BadValence { vertex: String, incoming: usize, outgoing: usize },
    FluxViolation { vertex: String, incoming: Vec<u8>, outgoing: Vec<u8> },
    ColorOutOfRange { edge: String, color: u8, n: u32 },
    LegMisuse { leg: String, uses: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BadValence { vertex, incoming, outgoing } => {
                write!(f, "vertex {vertex}: {incoming} incoming / {outgoing} outgoing edge ends")
            }
            Violation::FluxViolation { vertex, incoming, outgoing } => {
                write!(f, "vertex {vertex}: flux {incoming:?} in vs {outgoing:?} out")
            }
            Violation::ColorOutOfRange { edge, color, n } => {
                write!(f, "edge {edge}: color {color} outside 1..={n}")
            }
            Violation::LegMisuse { leg, uses } => write!(f, "leg {leg} used {uses} times"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Error)]
#[error("{} violation(s): {}", violations.len(), violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

/// Incident edges of one vertex, split by direction. A self-loop appears in
/// both lists.
#[derive(Clone, Debug, Default)]
pub struct VertexIncidence {
    pub ins: Vec<usize>,
    pub outs: Vec<usize>,
}

impl ColoredGraph {
    pub fn circle(color: u8) -> Self {
        ColoredGraph { circles: vec![color], ..Default::default() }
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_closed(&self) -> bool {
        self.legs.is_empty()
    }

    pub fn leg_index(&self, label: &str) -> Option<usize> {
        self.legs.iter().position(|l| l == label)
    }

    pub fn incidence(&self) -> Vec<VertexIncidence> {
        let mut inc = vec![VertexIncidence::default(); self.vertices.len()];
        for (i, e) in self.edges.iter().enumerate() {
            if let Endpoint::Vertex(v) = e.tail {
                inc[v].outs.push(i);
            }
            if let Endpoint::Vertex(v) = e.head {
                inc[v].ins.push(i);
            }
        }
        inc
    }

    pub fn max_color(&self) -> u8 {
        self.edges
            .iter()
            .map(|e| e.color)
            .chain(self.circles.iter().copied())
            .max()
            .unwrap_or(0)
    }

    /// Checks valence, orientation, flux, leg usage and that every color lies
    /// in `1..=n`.
    pub fn validate(&self, n: u32) -> Result<(), ValidationReport> {
        let mut violations = Vec::new();
        for e in &self.edges {
            if e.color == 0 || e.color as u32 > n {
                violations.push(Violation::ColorOutOfRange { edge: e.id.clone(), color: e.color, n });
            }
        }
        for (i, &c) in self.circles.iter().enumerate() {
            if c == 0 || c as u32 > n {
                violations.push(Violation::ColorOutOfRange { edge: format!("circle#{i}"), color: c, n });
            }
        }
        for (v, inc) in self.vertices.iter().zip(self.incidence()) {
            let (want_in, want_out) = match v.kind {
                VertexKind::Merge => (2, 1),
                VertexKind::Split => (1, 2),
            };
            if inc.ins.len() != want_in || inc.outs.len() != want_out {
                violations.push(Violation::BadValence {
                    vertex: v.id.clone(),
                    incoming: inc.ins.len(),
                    outgoing: inc.outs.len(),
                });
                continue;
            }
            let cin: Vec<u8> = inc.ins.iter().map(|&e| self.edges[e].color).collect();
            let cout: Vec<u8> = inc.outs.iter().map(|&e| self.edges[e].color).collect();
            let sin: u32 = cin.iter().map(|&c| c as u32).sum();
            let sout: u32 = cout.iter().map(|&c| c as u32).sum();
            if sin != sout {
                violations.push(Violation::FluxViolation { vertex: v.id.clone(), incoming: cin, outgoing: cout });
            }
        }
        let mut uses = vec![0usize; self.legs.len()];
        for e in &self.edges {
            for ep in [e.tail, e.head] {
                if let Endpoint::Leg(l) = ep {
                    uses[l] += 1;
                }
            }
        }
        for (l, &u) in uses.iter().enumerate() {
            if u != 1 {
                violations.push(Violation::LegMisuse { leg: self.legs[l].clone(), uses: u });
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ValidationReport { violations })
        }
    }

    /// Connected components: one graph per vertex-connected piece, followed by
    /// one graph per free circle.
    pub fn split_components(&self) -> Vec<ColoredGraph> {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        // Edges between two legs form their own component.
        let mut wires = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            match (e.tail, e.head) {
                (Endpoint::Vertex(a), Endpoint::Vertex(b)) => {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra] = rb;
                }
                (Endpoint::Leg(_), Endpoint::Leg(_)) => wires.push(i),
                _ => {}
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..n {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
        let mut order: Vec<Vec<usize>> = groups.into_values().collect();
        order.sort_by_key(|vs| vs[0]);

        let mut out = Vec::new();
        for vs in order {
            let mut vmap = HashMap::new();
            let mut g = ColoredGraph::default();
            for &v in &vs {
                vmap.insert(v, g.vertices.len());
                g.vertices.push(self.vertices[v].clone());
            }
            let mut lmap = HashMap::new();
            for e in &self.edges {
                let touches = [e.tail, e.head]
                    .iter()
                    .any(|ep| matches!(ep, Endpoint::Vertex(v) if vmap.contains_key(v)));
                if !touches {
                    continue;
                }
                let mut map_ep = |ep: Endpoint| match ep {
                    Endpoint::Vertex(v) => Endpoint::Vertex(vmap[&v]),
                    Endpoint::Leg(l) => Endpoint::Leg(*lmap.entry(l).or_insert_with(|| {
                        g.legs.push(self.legs[l].clone());
                        g.legs.len() - 1
                    })),
                };
                let (tail, head) = (map_ep(e.tail), map_ep(e.head));
                g.edges.push(Edge { id: e.id.clone(), color: e.color, tail, head });
            }
            out.push(g);
        }
        for i in wires {
            let e = &self.edges[i];
            let (Endpoint::Leg(a), Endpoint::Leg(b)) = (e.tail, e.head) else { unreachable!() };
            out.push(ColoredGraph {
                edges: vec![Edge { id: e.id.clone(), color: e.color, tail: Endpoint::Leg(0), head: Endpoint::Leg(1) }],
                legs: vec![self.legs[a].clone(), self.legs[b].clone()],
                ..Default::default()
            });
        }
        for &c in &self.circles {
            out.push(ColoredGraph::circle(c));
        }
        out
    }

    /// Disjoint union. Leg labels must be distinct between the two graphs.
    pub fn disjoint_union(&self, other: &ColoredGraph) -> ColoredGraph {
        let mut g = self.clone();
        let (nv, nl) = (g.vertices.len(), g.legs.len());
        let shift = |ep: Endpoint| match ep {
            Endpoint::Vertex(v) => Endpoint::Vertex(v + nv),
            Endpoint::Leg(l) => Endpoint::Leg(l + nl),
        };
        g.vertices.extend(other.vertices.iter().map(|v| Vertex { id: format!("{}'", v.id), kind: v.kind }));
        g.edges.extend(other.edges.iter().map(|e| Edge {
            id: format!("{}'", e.id),
            color: e.color,
            tail: shift(e.tail),
            head: shift(e.head),
        }));
        g.legs.extend(other.legs.iter().cloned());
        g.circles.extend(other.circles.iter().copied());
        g
    }

    /// Replaces vertex and edge ids by `v0, v1, ...` and `e0, e1, ...`.
    pub fn renumbered(mut self) -> ColoredGraph {
        for (i, v) in self.vertices.iter_mut().enumerate() {
            v.id = format!("v{i}");
        }
        for (i, e) in self.edges.iter_mut().enumerate() {
            e.id = format!("e{i}");
        }
        self
    }

    /// Reorders vertices by `perm` (new index of old vertex `i` is `perm[i]`)
    /// and edges by `edge_perm`. The result is isomorphic to `self`.
    pub fn permuted(&self, perm: &[usize], edge_perm: &[usize]) -> ColoredGraph {
        let mut vertices = self.vertices.clone();
        for (old, v) in self.vertices.iter().enumerate() {
            vertices[perm[old]] = v.clone();
        }
        let map_ep = |ep: Endpoint| match ep {
            Endpoint::Vertex(v) => Endpoint::Vertex(perm[v]),
            l => l,
        };
        let mut edges = self.edges.clone();
        for (old, e) in self.edges.iter().enumerate() {
            edges[edge_perm[old]] = Edge { id: e.id.clone(), color: e.color, tail: map_ep(e.tail), head: map_ep(e.head) };
        }
        ColoredGraph { vertices, edges, circles: self.circles.clone(), legs: self.legs.clone() }
    }

    pub fn canonical_form(&self) -> CanonicalForm {
        canon::canonical_form(self)
    }

    pub fn from_json(text: &str) -> Result<(ColoredGraph, Option<u32>), GraphError> {
        let file: GraphFile = serde_json::from_str(text)?;
        let n = file.n;
        Ok((file.into_graph()?, n))
    }

    pub fn to_file(&self, n: Option<u32>) -> GraphFile {
        let name = |ep: Endpoint| match ep {
            Endpoint::Vertex(v) => self.vertices[v].id.clone(),
            Endpoint::Leg(l) => self.legs[l].clone(),
        };
        GraphFile {
            n,
            vertices: self.vertices.iter().map(|v| VertexRecord { id: v.id.clone(), kind: v.kind }).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeRecord { id: e.id.clone(), color: e.color, tail: name(e.tail), head: name(e.head) })
                .collect(),
            circles: self.circles.clone(),
            legs: self.legs.clone(),
        }
    }

    pub fn to_json(&self, n: Option<u32>) -> String {
        serde_json::to_string_pretty(&self.to_file(n)).expect("graph serialization")
    }
}

/// On-disk graph format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphFile {
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default)]
    pub vertices: Vec<VertexRecord>,
    #[serde(default)]
    pub edges: Vec<EdgeRecord>,
    #[serde(default)]
    pub circles: Vec<u8>,
    #[serde(default)]
    pub legs: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: String,
    pub kind: VertexKind,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub id: String,
    pub color: u8,
    pub tail: String,
    pub head: String,
}

impl GraphFile {
    pub fn into_graph(self) -> Result<ColoredGraph, GraphError> {
        let mut b = GraphBuilder::new();
        for l in &self.legs {
            b.leg(l);
        }
        for v in &self.vertices {
            b.vertex(&v.id, v.kind);
        }
        for e in &self.edges {
            b.edge(&e.id, e.color, &e.tail, &e.head);
        }
        for &c in &self.circles {
            b.circle(c);
        }
        b.build()
    }
}

/// Builds a graph from string ids; endpoints are resolved at `build` time.
#[derive(Default)]
pub struct GraphBuilder {
    vertices: Vec<Vertex>,
    legs: Vec<String>,
    edges: Vec<(String, u8, String, String)>,
    circles: Vec<u8>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, id: &str, kind: VertexKind) -> &mut Self {
        self.vertices.push(Vertex { id: id.to_string(), kind });
        self
    }

    pub fn merge(&mut self, id: &str) -> &mut Self {
        self.vertex(id, VertexKind::Merge)
    }

    pub fn split(&mut self, id: &str) -> &mut Self {
        self.vertex(id, VertexKind::Split)
    }

    pub fn leg(&mut self, label: &str) -> &mut Self {
        self.legs.push(label.to_string());
        self
    }

    pub fn edge(&mut self, id: &str, color: u8, tail: &str, head: &str) -> &mut Self {
        self.edges.push((id.to_string(), color, tail.to_string(), head.to_string()));
        self
    }

    pub fn circle(&mut self, color: u8) -> &mut Self {
        self.circles.push(color);
        self
    }

    pub fn build(&self) -> Result<ColoredGraph, GraphError> {
        let mut names: HashMap<&str, Endpoint> = HashMap::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if names.insert(&v.id, Endpoint::Vertex(i)).is_some() {
                return Err(GraphError::DuplicateId(v.id.clone()));
            }
        }
        for (i, l) in self.legs.iter().enumerate() {
            if names.insert(l, Endpoint::Leg(i)).is_some() {
                return Err(GraphError::DuplicateId(l.clone()));
            }
        }
        let resolve = |s: &str| names.get(s).copied().ok_or_else(|| GraphError::UnknownEndpoint(s.to_string()));
        let mut edges = Vec::with_capacity(self.edges.len());
        for (id, color, t, h) in &self.edges {
            edges.push(Edge { id: id.clone(), color: *color, tail: resolve(t)?, head: resolve(h)? });
        }
        Ok(ColoredGraph {
            vertices: self.vertices.clone(),
            edges,
            circles: self.circles.clone(),
            legs: self.legs.clone(),
        })
    }
}

/// Isomorphism-invariant string key of a graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CanonicalForm(pub String);

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl CanonicalForm {
    pub fn as_bytes(&self) -> &[u8] {
        self.0.as_bytes()
    }
}

mod canon {
    //! Color refinement followed by individualization over the first
    //! non-singleton cell; the lexicographically least encoding over all
    //! leaves is the canonical form.

    use super::*;

    // Half-edge descriptor: (direction, edge color, code of the far end).
    // Far-end code: 0 self-loop, 1 + rank for legs, 1000 + class for vertices.
    type HalfSig = (u8, u8, u32);

    struct Ctx<'a> {
        g: &'a ColoredGraph,
        inc: Vec<VertexIncidence>,
        leg_rank: Vec<u32>,
    }

    impl Ctx<'_> {
        fn halves(&self, v: usize, colors: &[u32]) -> Vec<HalfSig> {
            let mut out = Vec::with_capacity(3);
            let far = |ep: Endpoint| -> u32 {
                match ep {
                    Endpoint::Vertex(w) if w == v => 0,
                    Endpoint::Vertex(w) => 1000 + colors[w],
                    Endpoint::Leg(l) => 1 + self.leg_rank[l],
                }
            };
            for &e in &self.inc[v].ins {
                let edge = &self.g.edges[e];
                out.push((0, edge.color, far(edge.tail)));
            }
            for &e in &self.inc[v].outs {
                let edge = &self.g.edges[e];
                out.push((1, edge.color, far(edge.head)));
            }
            out.sort_unstable();
            out
        }

        fn refine(&self, mut colors: Vec<u32>) -> Vec<u32> {
            let n = colors.len();
            let mut classes = count_classes(&colors);
            loop {
                let sigs: Vec<(u32, Vec<HalfSig>)> = (0..n).map(|v| (colors[v], self.halves(v, &colors))).collect();
                let mut sorted: Vec<&(u32, Vec<HalfSig>)> = sigs.iter().collect();
                sorted.sort();
                sorted.dedup();
                let next: Vec<u32> = sigs
                    .iter()
                    .map(|s| sorted.binary_search(&s).unwrap() as u32)
                    .collect();
                let nc = count_classes(&next);
                colors = next;
                if nc == classes {
                    return colors;
                }
                classes = nc;
            }
        }

        fn encode(&self, colors: &[u32]) -> Vec<i64> {
            // colors is discrete: it is the position of each vertex.
            let n = colors.len();
            let mut kinds = vec![0i64; n];
            for (v, &c) in colors.iter().enumerate() {
                kinds[c as usize] = match self.g.vertices[v].kind {
                    VertexKind::Merge => 1,
                    VertexKind::Split => 2,
                };
            }
            let code = |ep: Endpoint| match ep {
                Endpoint::Vertex(v) => colors[v] as i64,
                Endpoint::Leg(l) => -1 - self.leg_rank[l] as i64,
            };
            let mut edges: Vec<(i64, i64, i64)> =
                self.g.edges.iter().map(|e| (code(e.tail), code(e.head), e.color as i64)).collect();
            edges.sort_unstable();
            let mut circles: Vec<i64> = self.g.circles.iter().map(|&c| c as i64).collect();
            circles.sort_unstable();
            let mut out = Vec::with_capacity(2 + n + 3 * edges.len() + circles.len());
            out.push(n as i64);
            out.extend(kinds);
            out.push(edges.len() as i64);
            for (t, h, c) in edges {
                out.extend([t, h, c]);
            }
            out.extend(circles);
            out
        }

        fn search(&self, colors: Vec<u32>, best: &mut Option<Vec<i64>>) {
            let colors = self.refine(colors);
            let n = colors.len();
            if count_classes(&colors) == n {
                let enc = self.encode(&colors);
                if best.as_ref().is_none_or(|b| enc < *b) {
                    *best = Some(enc);
                }
                return;
            }
            let mut sizes = vec![0usize; n];
            for &c in &colors {
                sizes[c as usize] += 1;
            }
            let target = (0..n).find(|&c| sizes[c] > 1).unwrap() as u32;
            for v in 0..n {
                if colors[v] != target {
                    continue;
                }
                let ind: Vec<u32> = colors
                    .iter()
                    .enumerate()
                    .map(|(w, &c)| 2 * c + if w == v { 0 } else { 1 })
                    .collect();
                self.search(compress(&ind), best);
            }
        }
    }

    fn count_classes(colors: &[u32]) -> usize {
        let mut c: Vec<u32> = colors.to_vec();
        c.sort_unstable();
        c.dedup();
        c.len()
    }

    fn compress(colors: &[u32]) -> Vec<u32> {
        let mut vals: Vec<u32> = colors.to_vec();
        vals.sort_unstable();
        vals.dedup();
        colors.iter().map(|c| vals.binary_search(c).unwrap() as u32).collect()
    }

    pub fn canonical_form(g: &ColoredGraph) -> CanonicalForm {
        let mut sorted_legs: Vec<&String> = g.legs.iter().collect();
        sorted_legs.sort();
        let leg_rank = g
            .legs
            .iter()
            .map(|l| sorted_legs.binary_search(&l).unwrap() as u32)
            .collect();
        let ctx = Ctx { g, inc: g.incidence(), leg_rank };
        let init: Vec<u32> = g
            .vertices
            .iter()
            .map(|v| match v.kind {
                VertexKind::Merge => 0,
                VertexKind::Split => 1,
            })
            .collect();
        let mut best = None;
        if g.vertices.is_empty() {
            best = Some(ctx.encode(&[]));
        } else {
            ctx.search(compress(&init), &mut best);
        }
        let body: Vec<String> = best.unwrap().iter().map(|x| x.to_string()).collect();
        let legs: Vec<&str> = sorted_legs.iter().map(|s| s.as_str()).collect();
        CanonicalForm(format!("{}|{}", body.join(","), legs.join(",")))
    }
}

/// Formal linear combination of graphs with Laurent coefficients, keyed by
/// canonical form. Zero coefficients are never stored.
#[derive(Clone, Debug, Default)]
pub struct GraphExpr {
    terms: BTreeMap<CanonicalForm, (ColoredGraph, LaurentPoly)>,
}

impl GraphExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(g: ColoredGraph) -> Self {
        let mut e = Self::new();
        e.add_term(LaurentPoly::one(), g);
        e
    }

    pub fn add_term(&mut self, coeff: LaurentPoly, g: ColoredGraph) {
        if coeff.is_zero() {
            return;
        }
        let key = g.canonical_form();
        match self.terms.remove(&key) {
            Some((g0, c0)) => {
                let c = c0 + coeff;
                if !c.is_zero() {
                    self.terms.insert(key, (g0, c));
                }
            }
            None => {
                self.terms.insert(key, (g, coeff));
            }
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CanonicalForm, &ColoredGraph, &LaurentPoly)> {
        self.terms.iter().map(|(k, (g, c))| (k, g, c))
    }

    pub fn into_terms(self) -> Vec<(LaurentPoly, ColoredGraph)> {
        self.terms.into_values().map(|(g, c)| (c, g)).collect()
    }
}
