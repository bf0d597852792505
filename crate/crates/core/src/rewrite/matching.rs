//! Pattern embedding and replacement splicing.

use std::collections::{HashMap, HashSet};

use crate::graph::{ColoredGraph, Edge, Endpoint, GraphExpr, Vertex, VertexIncidence};

use super::rules::MoveRule;

/// Images of pattern vertices and edges in a host graph. For vertex-free
/// patterns (circles), `circle` names the host circle that was matched.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Embedding {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub circle: Option<usize>,
}

/// Pattern preprocessed for matching.
struct Prepared<'a> {
    p: &'a ColoredGraph,
    inc: Vec<VertexIncidence>,
    order: Vec<usize>,
}

impl<'a> Prepared<'a> {
    fn new(p: &'a ColoredGraph) -> Self {
        let inc = p.incidence();
        let n = p.vertices.len();
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            order.push(start);
            let mut i = order.len() - 1;
            while i < order.len() {
                let v = order[i];
                for &e in inc[v].ins.iter().chain(&inc[v].outs) {
                    for ep in [p.edges[e].tail, p.edges[e].head] {
                        if let Endpoint::Vertex(w) = ep {
                            if !seen[w] {
                                seen[w] = true;
                                order.push(w);
                            }
                        }
                    }
                }
                i += 1;
            }
        }
        Prepared { p, inc, order }
    }
}

/// Color-preserving bijections from `pat` edges onto `host` edges.
fn bijections(pat: &[usize], host: &[usize], pc: &ColoredGraph, hc: &ColoredGraph) -> Vec<Vec<usize>> {
    if pat.len() != host.len() {
        return Vec::new();
    }
    let ok = |perm: &[usize]| pat.iter().zip(perm).all(|(&a, &b)| pc.edges[a].color == hc.edges[b].color);
    match host.len() {
        1 => {
            if ok(host) {
                vec![host.to_vec()]
            } else {
                vec![]
            }
        }
        2 => {
            let mut out = Vec::new();
            let id = vec![host[0], host[1]];
            let sw = vec![host[1], host[0]];
            if ok(&id) {
                out.push(id);
            }
            if host[0] != host[1] && ok(&sw) {
                out.push(sw);
            }
            out
        }
        _ => Vec::new(),
    }
}

struct Search<'a, 'b> {
    pat: &'b Prepared<'a>,
    g: &'b ColoredGraph,
    ginc: Vec<VertexIncidence>,
    vmap: Vec<Option<usize>>,
    emap: Vec<Option<usize>>,
    used: Vec<bool>,
    out: Vec<Embedding>,
    seen: HashSet<(Vec<usize>, Vec<usize>)>,
    limit: usize,
}

impl Search<'_, '_> {
    fn is_internal(&self, pe: usize) -> bool {
        let e = &self.pat.p.edges[pe];
        matches!((e.tail, e.head), (Endpoint::Vertex(_), Endpoint::Vertex(_)))
    }

    fn run(&mut self, step: usize) {
        if self.out.len() >= self.limit {
            return;
        }
        if step == self.pat.order.len() {
            self.record();
            return;
        }
        let pv = self.pat.order[step];
        let kind = self.pat.p.vertices[pv].kind;
        // A mapped internal edge at pv forces its image.
        let mut forced = None;
        for &pe in self.pat.inc[pv].ins.iter().chain(&self.pat.inc[pv].outs) {
            if let Some(ge) = self.emap[pe] {
                let pe_ = &self.pat.p.edges[pe];
                let ge_ = &self.g.edges[ge];
                let host_ep = if pe_.head == Endpoint::Vertex(pv) { ge_.head } else { ge_.tail };
                match host_ep {
                    Endpoint::Vertex(w) => forced = Some(w),
                    Endpoint::Leg(_) => return,
                }
                break;
            }
        }
        let candidates: Vec<usize> = match forced {
            Some(w) => vec![w],
            None => (0..self.g.vertices.len()).collect(),
        };
        for gv in candidates {
            if self.used[gv] || self.g.vertices[gv].kind != kind {
                continue;
            }
            let ins = bijections(&self.pat.inc[pv].ins, &self.ginc[gv].ins, self.pat.p, self.g);
            if ins.is_empty() {
                continue;
            }
            let outs = bijections(&self.pat.inc[pv].outs, &self.ginc[gv].outs, self.pat.p, self.g);
            for bi in &ins {
                for bo in &outs {
                    let pairs: Vec<(usize, usize)> = self.pat.inc[pv]
                        .ins
                        .iter()
                        .copied()
                        .zip(bi.iter().copied())
                        .chain(self.pat.inc[pv].outs.iter().copied().zip(bo.iter().copied()))
                        .collect();
                    let mut assigned = Vec::new();
                    let mut ok = true;
                    for &(pe, ge) in &pairs {
                        match self.emap[pe] {
                            Some(x) if x != ge => {
                                ok = false;
                                break;
                            }
                            Some(_) => {}
                            None => {
                                if self.is_internal(pe) && !self.internal_target_ok(pe, ge) {
                                    ok = false;
                                    break;
                                }
                                self.emap[pe] = Some(ge);
                                assigned.push(pe);
                            }
                        }
                    }
                    if ok {
                        self.vmap[pv] = Some(gv);
                        self.used[gv] = true;
                        self.run(step + 1);
                        self.used[gv] = false;
                        self.vmap[pv] = None;
                    }
                    for pe in assigned {
                        self.emap[pe] = None;
                    }
                }
            }
        }
    }

    /// Internal pattern edges map to host edges between vertices, and no host
    /// edge is the image of two internal pattern edges.
    fn internal_target_ok(&self, pe: usize, ge: usize) -> bool {
        let h = &self.g.edges[ge];
        if !matches!((h.tail, h.head), (Endpoint::Vertex(_), Endpoint::Vertex(_))) {
            return false;
        }
        let p = &self.pat.p.edges[pe];
        for (pep, hep) in [(p.tail, h.tail), (p.head, h.head)] {
            if let (Endpoint::Vertex(pv), Endpoint::Vertex(hv)) = (pep, hep) {
                if let Some(img) = self.vmap[pv] {
                    if img != hv {
                        return false;
                    }
                }
            }
        }
        !self.emap.iter().enumerate().any(|(q, m)| *m == Some(ge) && q != pe)
    }

    fn record(&mut self) {
        let vertices: Vec<usize> = self.vmap.iter().map(|v| v.unwrap()).collect();
        let edges: Vec<usize> = self.emap.iter().map(|e| e.unwrap()).collect();
        // An internal image may not double as a leg image.
        for (pe, &ge) in edges.iter().enumerate() {
            if self.is_internal(pe) && edges.iter().enumerate().any(|(q, &g2)| q != pe && g2 == ge) {
                return;
            }
        }
        let legs: Vec<usize> = (0..edges.len()).filter(|&pe| !self.is_internal(pe)).map(|pe| edges[pe]).collect();
        if self.seen.insert((vertices.clone(), legs)) {
            self.out.push(Embedding { vertices, edges, circle: None });
        }
    }
}

/// All embeddings of `pattern` into `g`, up to `limit`. Two embeddings with
/// the same vertex images and the same leg images count once.
pub fn find_matches_limited(g: &ColoredGraph, rule: &MoveRule, limit: usize) -> Vec<Embedding> {
    let p = &rule.pattern;
    if p.vertices.is_empty() {
        let want = p.circles[0];
        return g
            .circles
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == want)
            .take(limit)
            .map(|(i, _)| Embedding { vertices: vec![], edges: vec![], circle: Some(i) })
            .collect();
    }
    if p.vertices.len() > g.vertices.len() {
        return Vec::new();
    }
    let prepared = Prepared::new(p);
    let mut s = Search {
        pat: &prepared,
        g,
        ginc: g.incidence(),
        vmap: vec![None; p.vertices.len()],
        emap: vec![None; p.edges.len()],
        used: vec![false; g.vertices.len()],
        out: Vec::new(),
        seen: HashSet::new(),
        limit,
    };
    s.run(0);
    s.out
}

pub fn find_matches(g: &ColoredGraph, rule: &MoveRule) -> Vec<Embedding> {
    find_matches_limited(g, rule, usize::MAX)
}

/// Host endpoint during splicing: kept host vertex, host leg, or dangling
/// pattern leg awaiting fusion.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum End {
    V(usize),
    HostLeg(usize),
    Open(usize),
}

struct Wire {
    id: String,
    color: u8,
    tail: End,
    head: End,
}

/// Replaces the embedded pattern by `replacement`, gluing along leg labels.
pub fn splice(g: &ColoredGraph, rule: &MoveRule, emb: &Embedding, replacement: &ColoredGraph) -> ColoredGraph {
    let p = &rule.pattern;
    if let Some(ci) = emb.circle {
        let mut out = g.clone();
        out.circles.remove(ci);
        out.circles.extend(replacement.circles.iter().copied());
        return out;
    }
    let matched: HashSet<usize> = emb.vertices.iter().copied().collect();
    let mut vnew = vec![usize::MAX; g.vertices.len()];
    let mut vertices: Vec<Vertex> = Vec::new();
    for (i, v) in g.vertices.iter().enumerate() {
        if !matched.contains(&i) {
            vnew[i] = vertices.len();
            vertices.push(v.clone());
        }
    }
    let label_idx: HashMap<&str, usize> = p.legs.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();

    // Host edge ends inside the match become open pattern legs.
    let mut open_head: HashMap<usize, usize> = HashMap::new();
    let mut open_tail: HashMap<usize, usize> = HashMap::new();
    let mut internal: HashSet<usize> = HashSet::new();
    for (pe, &ge) in emb.edges.iter().enumerate() {
        let e = &p.edges[pe];
        match (e.tail, e.head) {
            (Endpoint::Leg(l), _) => {
                open_head.insert(ge, l);
            }
            (_, Endpoint::Leg(l)) => {
                open_tail.insert(ge, l);
            }
            _ => {
                internal.insert(ge);
            }
        }
    }
    let host_end = |ep: Endpoint| match ep {
        Endpoint::Vertex(v) => End::V(vnew[v]),
        Endpoint::Leg(l) => End::HostLeg(l),
    };
    let mut wires: Vec<Wire> = Vec::new();
    for (i, e) in g.edges.iter().enumerate() {
        if internal.contains(&i) {
            continue;
        }
        let tail = open_tail.get(&i).map_or_else(|| host_end(e.tail), |&l| End::Open(l));
        let head = open_head.get(&i).map_or_else(|| host_end(e.head), |&l| End::Open(l));
        wires.push(Wire { id: e.id.clone(), color: e.color, tail, head });
    }

    // Insert the replacement with fresh vertex indices.
    let base = vertices.len();
    let tag = rule.label.to_lowercase();
    for v in &replacement.vertices {
        vertices.push(Vertex { id: format!("{}:{}", tag, v.id), kind: v.kind });
    }
    let rep_end = |ep: Endpoint| match ep {
        Endpoint::Vertex(v) => End::V(base + v),
        Endpoint::Leg(l) => End::Open(label_idx[replacement.legs[l].as_str()]),
    };
    for e in &replacement.edges {
        wires.push(Wire { id: format!("{}:{}", tag, e.id), color: e.color, tail: rep_end(e.tail), head: rep_end(e.head) });
    }

    // Fuse each open label: the wire ending there continues as the wire
    // starting there.
    let mut circles = g.circles.clone();
    circles.extend(replacement.circles.iter().copied());
    for l in 0..p.legs.len() {
        let into = wires.iter().position(|w| w.head == End::Open(l));
        let from = wires.iter().position(|w| w.tail == End::Open(l));
        let (Some(a), Some(b)) = (into, from) else {
            panic!("leg {} is not glued on both sides", p.legs[l]);
        };
        debug_assert_eq!(wires[a].color, wires[b].color, "color mismatch across leg {}", p.legs[l]);
        if a == b {
            circles.push(wires[a].color);
            wires.remove(a);
            continue;
        }
        let head = wires[b].head;
        wires[a].head = head;
        wires.remove(b);
    }

    let end = |e: End| match e {
        End::V(v) => Endpoint::Vertex(v),
        End::HostLeg(l) => Endpoint::Leg(l),
        End::Open(_) => unreachable!("all pattern legs fused"),
    };
    ColoredGraph {
        vertices,
        edges: wires
            .into_iter()
            .map(|w| Edge { id: w.id, color: w.color, tail: end(w.tail), head: end(w.head) })
            .collect(),
        circles,
        legs: g.legs.clone(),
    }
}

/// Applies `rule` at `emb` with coefficients instantiated at `n`.
pub fn apply_move(g: &ColoredGraph, rule: &MoveRule, emb: &Embedding, n: u32) -> GraphExpr {
    let mut expr = GraphExpr::new();
    for (coeff, rep) in &rule.terms {
        expr.add_term(coeff.at(n), splice(g, rule, emb, rep));
    }
    expr
}
