//! Counting admissible coordinate-subspace colorings.
//!
//! An edge of color k receives a k-element subset of `{0..N}` (a bitmask).
//! At every vertex the two small subsets are disjoint with union the big one.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::graph::{ColoredGraph, Endpoint, VertexKind};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubsetColoring {
    /// Edge id to subset mask.
    pub assignment: BTreeMap<String, u64>,
    /// One subset per circle component, in the graph's circle order.
    pub circles: Vec<u64>,
}

impl SubsetColoring {
    pub fn subset(mask: u64) -> Vec<u32> {
        (0..64).filter(|i| mask >> i & 1 == 1).collect()
    }
}

/// All `k`-element subsets of `{0..n}` as masks, in increasing order.
pub fn subsets(n: u32, k: u32) -> Vec<u64> {
    if k > n || n > 63 {
        return Vec::new();
    }
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut x: u64 = (1 << k) - 1;
    let limit = 1u64 << n;
    while x < limit {
        out.push(x);
        // next mask with the same popcount
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
    out
}

pub fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Vertex as (big edge, small edge, small edge).
fn triples(g: &ColoredGraph) -> Vec<[usize; 3]> {
    g.incidence()
        .iter()
        .zip(&g.vertices)
        .map(|(inc, v)| match v.kind {
            VertexKind::Merge => [inc.outs[0], inc.ins[0], inc.ins[1]],
            VertexKind::Split => [inc.ins[0], inc.outs[0], inc.outs[1]],
        })
        .collect()
}

/// Greedy elimination order: next vertex shares the most edges with the
/// processed part.
fn vertex_order(g: &ColoredGraph, tri: &[[usize; 3]]) -> Vec<usize> {
    let n = tri.len();
    let mut done = vec![false; n];
    let mut touched = vec![false; g.edges.len()];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let best = (0..n)
            .filter(|&v| !done[v])
            .max_by_key(|&v| (tri[v].iter().filter(|&&e| touched[e]).count(), std::cmp::Reverse(v)))
            .unwrap();
        done[best] = true;
        for &e in &tri[best] {
            touched[e] = true;
        }
        order.push(best);
    }
    order
}

/// Extensions of a partial assignment at one vertex. `known[i]` is the
/// current mask of `tri[i]` if assigned.
fn extend(n: u32, colors: [u32; 3], known: [Option<u64>; 3], mut f: impl FnMut([u64; 3])) {
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let ok = |m: [u64; 3]| m[1] & m[2] == 0 && m[1] | m[2] == m[0];
    match known {
        [Some(z), Some(x), Some(y)] => {
            if ok([z, x, y]) {
                f([z, x, y]);
            }
        }
        [Some(z), Some(x), None] => {
            if x & !z == 0 {
                f([z, x, z ^ x]);
            }
        }
        [Some(z), None, Some(y)] => {
            if y & !z == 0 {
                f([z, z ^ y, y]);
            }
        }
        [Some(z), None, None] => {
            for x in subsets(colors[0], colors[1]) {
                let xm = deposit(x, z);
                f([z, xm, z ^ xm]);
            }
        }
        [None, Some(x), Some(y)] => {
            if x & y == 0 {
                f([x | y, x, y]);
            }
        }
        [None, Some(x), None] => {
            for y in subsets(n - colors[1], colors[2]) {
                let ym = deposit(y, full & !x);
                f([x | ym, x, ym]);
            }
        }
        [None, None, Some(y)] => {
            for x in subsets(n - colors[2], colors[1]) {
                let xm = deposit(x, full & !y);
                f([xm | y, xm, y]);
            }
        }
        [None, None, None] => {
            for x in subsets(n, colors[1]) {
                for y in subsets(n - colors[1], colors[2]) {
                    let ym = deposit(y, full & !x);
                    f([x | ym, x, ym]);
                }
            }
        }
    }
}

/// Scatters the low bits of `src` onto the set bits of `mask`, in order.
fn deposit(src: u64, mask: u64) -> u64 {
    let mut out = 0;
    let mut m = mask;
    let mut i = 0;
    while m != 0 {
        let bit = m & m.wrapping_neg();
        if src >> i & 1 == 1 {
            out |= bit;
        }
        m ^= bit;
        i += 1;
    }
    out
}

/// Number of subset colorings of a closed graph, by frontier dynamic
/// programming over a greedy vertex order.
pub fn count_colorings(g: &ColoredGraph, n: u32) -> BigUint {
    assert!(n <= 63, "N above 63 is not supported");
    if g.edges.iter().any(|e| e.color as u32 > n) {
        return BigUint::zero();
    }
    debug_assert!(g.is_closed());
    let mut total = BigUint::one();
    for &c in &g.circles {
        total *= binomial(n, c as u32);
    }
    if g.vertices.is_empty() {
        return total;
    }
    let tri = triples(g);
    let order = vertex_order(g, &tri);
    let mut remaining: Vec<u8> = g
        .edges
        .iter()
        .map(|e| [e.tail, e.head].iter().filter(|ep| matches!(ep, Endpoint::Vertex(_))).count() as u8)
        .collect();
    // frontier: sorted edge indices with assigned masks
    let mut frontier: Vec<usize> = Vec::new();
    let mut states: HashMap<Vec<u64>, BigUint> = HashMap::from([(Vec::new(), BigUint::one())]);
    for v in order {
        let t = tri[v];
        let colors = t.map(|e| g.edges[e].color as u32);
        let pos: [Option<usize>; 3] = t.map(|e| frontier.iter().position(|&f| f == e));
        for &e in &t {
            remaining[e] -= 1;
        }
        let mut next_frontier: Vec<usize> = frontier.iter().copied().filter(|&e| remaining[e] > 0).collect();
        for &e in &t {
            if remaining[e] > 0 && !next_frontier.contains(&e) {
                next_frontier.push(e);
            }
        }
        next_frontier.sort_unstable();
        let mut next: HashMap<Vec<u64>, BigUint> = HashMap::new();
        for (state, count) in &states {
            let known = pos.map(|p| p.map(|i| state[i]));
            extend(n, colors, known, |m| {
                let key: Vec<u64> = next_frontier
                    .iter()
                    .map(|&e| match t.iter().position(|&x| x == e) {
                        Some(i) => m[i],
                        None => state[frontier.iter().position(|&f| f == e).unwrap()],
                    })
                    .collect();
                *next.entry(key).or_insert_with(BigUint::zero) += count;
            });
        }
        states = next;
        frontier = next_frontier;
        if states.is_empty() {
            return BigUint::zero();
        }
    }
    let inner: BigUint = states.into_values().sum();
    total * inner
}

/// Explicit colorings, at most `limit`.
pub fn enumerate_colorings(g: &ColoredGraph, n: u32, limit: usize) -> Vec<SubsetColoring> {
    let mut out = Vec::new();
    if limit == 0 || g.edges.iter().any(|e| e.color as u32 > n) {
        return out;
    }
    let tri = triples(g);
    let order = vertex_order(g, &tri);
    let mut masks: Vec<Option<u64>> = vec![None; g.edges.len()];
    let circle_choices: Vec<Vec<u64>> = g.circles.iter().map(|&c| subsets(n, c as u32)).collect();

    #[allow(clippy::too_many_arguments)]
    fn rec(
        step: usize,
        g: &ColoredGraph,
        n: u32,
        tri: &[[usize; 3]],
        order: &[usize],
        masks: &mut Vec<Option<u64>>,
        circle_choices: &[Vec<u64>],
        limit: usize,
        out: &mut Vec<SubsetColoring>,
    ) {
        if out.len() >= limit {
            return;
        }
        if step == order.len() {
            // cartesian product over circle subsets
            let mut idx = vec![0usize; circle_choices.len()];
            if circle_choices.iter().any(|c| c.is_empty()) {
                return;
            }
            loop {
                out.push(SubsetColoring {
                    assignment: g.edges.iter().zip(masks.iter()).map(|(e, m)| (e.id.clone(), m.unwrap())).collect(),
                    circles: idx.iter().zip(circle_choices).map(|(&i, c)| c[i]).collect(),
                });
                if out.len() >= limit {
                    return;
                }
                let mut k = 0;
                loop {
                    if k == idx.len() {
                        return;
                    }
                    idx[k] += 1;
                    if idx[k] < circle_choices[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
            }
        }
        let t = tri[order[step]];
        let colors = t.map(|e| g.edges[e].color as u32);
        let known = t.map(|e| masks[e]);
        let mut exts = Vec::new();
        extend(n, colors, known, |m| exts.push(m));
        for m in exts {
            let saved = t.map(|e| masks[e]);
            for i in 0..3 {
                masks[t[i]] = Some(m[i]);
            }
            rec(step + 1, g, n, tri, order, masks, circle_choices, limit, out);
            for i in 0..3 {
                masks[t[i]] = saved[i];
            }
        }
    }
    rec(0, g, n, &tri, &order, &mut masks, &circle_choices, limit, &mut out);
    out
}

/// True when `c` satisfies the vertex condition everywhere.
pub fn is_valid_coloring(g: &ColoredGraph, n: u32, c: &SubsetColoring) -> bool {
    let full = (1u64 << n) - 1;
    let mask = |id: &str| c.assignment.get(id).copied();
    for e in &g.edges {
        match mask(&e.id) {
            Some(m) if m & !full == 0 && m.count_ones() == e.color as u32 => {}
            _ => return false,
        }
    }
    for t in triples(g) {
        let [z, x, y] = t.map(|e| mask(&g.edges[e].id).unwrap());
        if x & y != 0 || x | y != z {
            return false;
        }
    }
    c.circles.len() == g.circles.len()
        && c.circles.iter().zip(&g.circles).all(|(&m, &k)| m & !full == 0 && m.count_ones() == k as u32)
}

/// Brute force over every subset per edge. Exponential; meant for graphs
/// with a handful of edges.
pub fn count_colorings_exhaustive(g: &ColoredGraph, n: u32) -> u64 {
    let choices: Vec<Vec<u64>> = g.edges.iter().map(|e| subsets(n, e.color as u32)).collect();
    let tri = triples(g);
    let mut idx = vec![0usize; choices.len()];
    let mut count = 0u64;
    if choices.iter().any(|c| c.is_empty()) {
        return 0;
    }
    loop {
        let m: Vec<u64> = idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
        if tri.iter().all(|t| m[t[1]] & m[t[2]] == 0 && m[t[1]] | m[t[2]] == m[t[0]]) {
            count += 1;
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                let circ: u64 = g.circles.iter().map(|&c| binomial(n, c as u32).to_u64_digits().first().copied().unwrap_or(0)).product();
                return count * circ;
            }
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}
