//! Oracles that share no code with the algorithms they check.
#![allow(dead_code)]

use std::collections::BTreeMap;

use moyforge::graph::{ColoredGraph, Endpoint, VertexKind};
use moyforge::knot::{PdDiagram, Sign};
use moyforge::LaurentPoly;

/// Kauffman bracket of the unoriented diagram, as a polynomial in A.
/// With arcs listed clockwise from the incoming under-strand, the A-smoothing
/// joins (a,d) and (b,c).
pub fn kauffman_bracket(d: &PdDiagram) -> LaurentPoly {
    let c = d.crossings.len();
    let delta = LaurentPoly::from_terms([(2, -1), (-2, -1)]);
    let labels: Vec<u64> = {
        let mut v: Vec<u64> = d.crossings.iter().flat_map(|x| x.arcs).collect();
        v.sort();
        v.dedup();
        v
    };
    let index: BTreeMap<u64, usize> = labels.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let mut total = LaurentPoly::zero();
    for mask in 0u32..1 << c {
        let mut parent: Vec<usize> = (0..labels.len()).collect();
        fn find(p: &mut [usize], i: usize) -> usize {
            let mut i = i;
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let mut a_count = 0i64;
        for (i, x) in d.crossings.iter().enumerate() {
            let [a, b, cc, dd] = x.arcs.map(|l| index[&l]);
            let pairs = if mask >> i & 1 == 0 {
                a_count += 1;
                [(a, dd), (b, cc)]
            } else {
                [(a, b), (cc, dd)]
            };
            for (u, v) in pairs {
                let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                parent[ru] = rv;
            }
        }
        let loops = (0..labels.len()).filter(|&i| find(&mut parent, i) == i).count() + d.circles.len();
        let b_count = c as i64 - a_count;
        total += &LaurentPoly::monomial(a_count - b_count, 1) * &delta.pow(loops as u32 - 1);
    }
    total
}

/// Jones polynomial normalized to 1 on the unknot, written in q with
/// A^2 = -q.
pub fn jones(d: &PdDiagram) -> LaurentPoly {
    let w: i64 = d.crossings.iter().map(|x| if x.sign == Sign::Positive { 1 } else { -1 }).sum();
    let sign = if w % 2 == 0 { 1 } else { -1 };
    let f = &LaurentPoly::monomial(-3 * w, sign) * &kauffman_bracket(d);
    let terms: Vec<(i64, num_bigint::BigInt)> = f
        .terms()
        .map(|(e, c)| {
            assert_eq!(e % 2, 0, "odd power of A in a normalized bracket");
            let k = e / 2;
            let s = if k % 2 == 0 { 1 } else { -1 };
            (k, c * num_bigint::BigInt::from(s))
        })
        .collect();
    LaurentPoly::from_terms(terms)
}

/// Number of subset colorings: each k-colored edge picks a k-subset of
/// {0..n-1}; at every vertex the two small subsets are disjoint with union
/// the big one. Plain recursion over edges.
pub fn naive_colorings(g: &ColoredGraph, n: u32) -> u128 {
    let subsets = |k: u32| -> Vec<u32> { (0u32..1 << n).filter(|m| m.count_ones() == k).collect() };
    let options: Vec<Vec<u32>> = g.edges.iter().map(|e| subsets(e.color as u32)).collect();
    let mut at_vertex: Vec<(Option<usize>, Vec<usize>, Vec<usize>)> = vec![(None, vec![], vec![]); g.vertices.len()];
    for (i, e) in g.edges.iter().enumerate() {
        if let Endpoint::Vertex(v) = e.head {
            at_vertex[v].1.push(i);
        }
        if let Endpoint::Vertex(v) = e.tail {
            at_vertex[v].2.push(i);
        }
    }
    let ok = |assign: &[u32]| {
        g.vertices.iter().zip(&at_vertex).all(|(v, (_, ins, outs))| {
            let (big, small) = match v.kind {
                VertexKind::Merge => (outs[0], (ins[0], ins[1])),
                VertexKind::Split => (ins[0], (outs[0], outs[1])),
            };
            assign[small.0] & assign[small.1] == 0 && assign[small.0] | assign[small.1] == assign[big]
        })
    };
    fn rec(i: usize, assign: &mut Vec<u32>, options: &[Vec<u32>], ok: &dyn Fn(&[u32]) -> bool) -> u128 {
        if i == options.len() {
            return ok(assign) as u128;
        }
        let mut total = 0;
        for &m in &options[i] {
            assign.push(m);
            total += rec(i + 1, assign, options, ok);
            assign.pop();
        }
        total
    }
    let core = rec(0, &mut Vec::new(), &options, &ok);
    let choose = |k: u32| -> u128 { if k > n { return 0; } (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128) };
    g.circles.iter().fold(core, |acc, &k| acc * choose(k as u32))
}
