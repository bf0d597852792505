//! Random and exhaustive generation of small closed admissible graphs.

use std::collections::HashSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{CanonicalForm, ColoredGraph, Edge, Endpoint, Vertex, VertexKind};

#[derive(Clone, Debug)]
pub struct GenConfig {
    /// Even upper bound on the vertex count.
    pub max_vertices: usize,
    pub palette: Vec<u8>,
    pub seed: u64,
    /// Upper bound on extra free circles.
    pub max_circles: usize,
    /// Only emit graphs whose vertices form one component and have no circles.
    pub connected_only: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { max_vertices: 8, palette: vec![1, 2], seed: 0, max_circles: 1, connected_only: false }
    }
}

/// Vertex shape: kind, small colors, big color.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Shape {
    kind: VertexKind,
    small: (u8, u8),
}

impl Shape {
    fn big(&self) -> u8 {
        self.small.0 + self.small.1
    }

    /// (incoming colors, outgoing colors)
    fn stubs(&self) -> (Vec<u8>, Vec<u8>) {
        let s = vec![self.small.0, self.small.1];
        match self.kind {
            VertexKind::Merge => (s, vec![self.big()]),
            VertexKind::Split => (vec![self.big()], s),
        }
    }
}

fn shapes(palette: &[u8]) -> Vec<(u8, u8)> {
    let mut out = Vec::new();
    for &a in palette {
        for &b in palette {
            if a <= b && palette.contains(&(a + b)) {
                out.push((a, b));
            }
        }
    }
    out
}

/// Wires stubs by the given per-color permutations into a graph.
fn assemble(types: &[Shape], out_targets: &[(usize, usize)], circles: &[u8]) -> ColoredGraph {
    // out_targets[i] = (vertex, in-stub slot) receiving the i-th out stub
    let mut vertices = Vec::new();
    for (i, s) in types.iter().enumerate() {
        vertices.push(Vertex { id: format!("v{i}"), kind: s.kind });
    }
    let mut edges = Vec::new();
    let mut k = 0;
    for (v, s) in types.iter().enumerate() {
        let (_, outs) = s.stubs();
        for c in outs {
            let (w, _) = out_targets[k];
            edges.push(Edge { id: format!("e{}", edges.len()), color: c, tail: Endpoint::Vertex(v), head: Endpoint::Vertex(w) });
            k += 1;
        }
    }
    ColoredGraph { vertices, edges, circles: circles.to_vec(), legs: vec![] }
}

fn in_stubs(types: &[Shape]) -> Vec<(usize, usize, u8)> {
    let mut v = Vec::new();
    for (i, s) in types.iter().enumerate() {
        for (slot, c) in s.stubs().0.into_iter().enumerate() {
            v.push((i, slot, c));
        }
    }
    v
}

fn out_colors(types: &[Shape]) -> Vec<u8> {
    types.iter().flat_map(|s| s.stubs().1).collect()
}

fn is_connected(g: &ColoredGraph) -> bool {
    g.split_components().len() <= 1
}

/// Random closed graph: vertex shapes chosen so every color balances, then
/// a uniform stub matching per color.
pub fn random_graph(cfg: &GenConfig) -> ColoredGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    random_graph_with(cfg, &mut rng)
}

pub fn random_graph_with(cfg: &GenConfig, rng: &mut impl Rng) -> ColoredGraph {
    let kinds = shapes(&cfg.palette);
    loop {
        let pairs = if kinds.is_empty() || cfg.max_vertices < 2 { 0 } else { rng.random_range(1..=cfg.max_vertices / 2) };
        // Each merge shape is paired with a split of the same shape.
        let mut types = Vec::new();
        for _ in 0..pairs {
            let small = *kinds.choose(rng).unwrap();
            types.push(Shape { kind: VertexKind::Merge, small });
            types.push(Shape { kind: VertexKind::Split, small });
        }
        let ins = in_stubs(&types);
        let outs = out_colors(&types);
        let mut targets = vec![(0, 0); outs.len()];
        let mut colors: Vec<u8> = outs.clone();
        colors.sort_unstable();
        colors.dedup();
        for c in colors {
            let o: Vec<usize> = (0..outs.len()).filter(|&i| outs[i] == c).collect();
            let mut t: Vec<(usize, usize)> = ins.iter().filter(|s| s.2 == c).map(|s| (s.0, s.1)).collect();
            t.shuffle(rng);
            for (i, tgt) in o.into_iter().zip(t) {
                targets[i] = tgt;
            }
        }
        let ncirc = if cfg.connected_only || cfg.max_circles == 0 {
            0
        } else {
            rng.random_range(0..=cfg.max_circles)
        };
        let circles: Vec<u8> = (0..ncirc).map(|_| *cfg.palette.choose(rng).unwrap()).collect();
        let g = assemble(&types, &targets, &circles);
        if cfg.connected_only && !is_connected(&g) {
            continue;
        }
        if g.vertices.is_empty() && g.circles.is_empty() && cfg.max_circles > 0 {
            continue;
        }
        debug_assert!(g.validate(cfg.palette.iter().copied().max().unwrap_or(1) as u32).is_ok());
        return g;
    }
}

/// Every multiset of at most `k` colors from `palette`.
fn circle_multisets(palette: &[u8], k: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::new();
        for m in &frontier {
            for &c in palette {
                if m.last().is_none_or(|&l| l <= c) {
                    let mut m2: Vec<u8> = m.clone();
                    m2.push(c);
                    next.push(m2);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// All isomorphism classes within the bounds, deduplicated by canonical form.
pub fn enumerate_graphs(cfg: &GenConfig) -> Vec<ColoredGraph> {
    assert!(cfg.max_vertices <= 8, "exhaustive enumeration is limited to 8 vertices");
    let kinds = shapes(&cfg.palette);
    let mut seen: HashSet<CanonicalForm> = HashSet::new();
    let mut out = Vec::new();
    let circle_sets = if cfg.connected_only { vec![vec![]] } else { circle_multisets(&cfg.palette, cfg.max_circles) };

    let mut emit = |g: ColoredGraph, out: &mut Vec<ColoredGraph>| {
        if seen.insert(g.canonical_form()) {
            out.push(g);
        }
    };

    if !cfg.connected_only {
        for cs in &circle_sets {
            emit(ColoredGraph { circles: cs.clone(), ..Default::default() }, &mut out);
        }
    }
    for pairs in 1..=cfg.max_vertices / 2 {
        if kinds.is_empty() {
            break;
        }
        // multisets of shapes, each used by one merge and one split
        let mut combos: Vec<Vec<(u8, u8)>> = vec![vec![]];
        for _ in 0..pairs {
            let mut next = Vec::new();
            for c in &combos {
                for (i, &k) in kinds.iter().enumerate() {
                    let last = c.last().map(|l| kinds.iter().position(|x| x == l).unwrap());
                    if last.is_none_or(|l| l <= i) {
                        let mut c2 = c.clone();
                        c2.push(k);
                        next.push(c2);
                    }
                }
            }
            combos = next;
        }
        for combo in combos {
            let mut types = Vec::new();
            for &small in &combo {
                types.push(Shape { kind: VertexKind::Merge, small });
            }
            for &small in &combo {
                types.push(Shape { kind: VertexKind::Split, small });
            }
            for g in stub_matchings(&types) {
                if cfg.connected_only && !is_connected(&g) {
                    continue;
                }
                for cs in &circle_sets {
                    let mut h = g.clone();
                    h.circles = cs.clone();
                    emit(h, &mut out);
                }
            }
        }
    }
    out
}

/// All graphs from color-respecting stub matchings, with the two equal-color
/// in-stubs of a vertex treated as unordered.
fn stub_matchings(types: &[Shape]) -> Vec<ColoredGraph> {
    let ins = in_stubs(types);
    let outs = out_colors(types);
    let mut used = vec![false; ins.len()];
    let mut targets = vec![(0usize, 0usize); outs.len()];
    let mut chosen_for = vec![usize::MAX; ins.len()];
    let mut result = Vec::new();

    #[allow(clippy::too_many_arguments)]
    fn rec(
        i: usize,
        types: &[Shape],
        ins: &[(usize, usize, u8)],
        outs: &[u8],
        used: &mut [bool],
        chosen_for: &mut [usize],
        targets: &mut [(usize, usize)],
        result: &mut Vec<ColoredGraph>,
    ) {
        if i == outs.len() {
            result.push(assemble(types, targets, &[]));
            return;
        }
        for j in 0..ins.len() {
            if used[j] || ins[j].2 != outs[i] {
                continue;
            }
            // slot 1 of a vertex only after slot 0 when both carry the same color
            let (v, slot, c) = ins[j];
            if slot == 1 && ins[j - 1].0 == v && ins[j - 1].2 == c && !used[j - 1] {
                continue;
            }
            used[j] = true;
            chosen_for[j] = i;
            targets[i] = (v, slot);
            rec(i + 1, types, ins, outs, used, chosen_for, targets, result);
            used[j] = false;
            chosen_for[j] = usize::MAX;
        }
    }
    rec(0, types, &ins, &outs, &mut used, &mut chosen_for, &mut targets, &mut result);
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_graphs_validate() {
        for seed in 0..200 {
            for palette in [vec![1, 2], vec![1, 2, 3]] {
                let cfg = GenConfig { max_vertices: 12, palette, seed, ..Default::default() };
                let g = random_graph(&cfg);
                assert!(g.vertices.len() <= 12);
                g.validate(3).unwrap();
            }
        }
    }

    #[test]
    fn small_random_graphs() {
        let cfg = GenConfig { max_vertices: 0, seed: 3, max_circles: 2, ..Default::default() };
        assert!(random_graph(&cfg).vertices.is_empty());
        for seed in 0..20 {
            let cfg = GenConfig { max_vertices: 2, seed, connected_only: true, ..Default::default() };
            let g = random_graph(&cfg);
            assert_eq!(g.canonical_form(), crate::fixtures::theta().canonical_form());
        }
    }

    #[test]
    fn enumeration_two_vertices() {
        let cfg = GenConfig { max_vertices: 2, connected_only: true, ..Default::default() };
        let all = enumerate_graphs(&cfg);
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].canonical_form(), crate::fixtures::theta().canonical_form());
    }

    #[test]
    fn enumeration_circles_only() {
        let cfg = GenConfig { max_vertices: 0, palette: vec![1], max_circles: 1, ..Default::default() };
        assert_eq!(enumerate_graphs(&cfg).len(), 2);
        let cfg = GenConfig { max_vertices: 0, palette: vec![1, 2], max_circles: 1, ..Default::default() };
        assert_eq!(enumerate_graphs(&cfg).len(), 3);
    }

    #[test]
    fn enumeration_is_duplicate_free() {
        let cfg = GenConfig { max_vertices: 6, connected_only: true, ..Default::default() };
        let all = enumerate_graphs(&cfg);
        let keys: HashSet<_> = all.iter().map(|g| g.canonical_form()).collect();
        assert_eq!(keys.len(), all.len());
        for g in &all {
            g.validate(2).unwrap();
        }
        // Re-deduplicating changes nothing.
        let again: HashSet<_> = all.iter().map(|g| g.clone().renumbered().canonical_form()).collect();
        assert_eq!(again, keys);
    }

    #[test]
    fn random_graphs_are_found_by_enumeration() {
        let cfg = GenConfig { max_vertices: 6, max_circles: 0, ..Default::default() };
        let all: HashSet<_> = enumerate_graphs(&cfg).iter().map(|g| g.canonical_form()).collect();
        for seed in 0..50 {
            let g = random_graph(&GenConfig { seed, ..cfg.clone() });
            assert!(all.contains(&g.canonical_form()));
        }
    }
}
