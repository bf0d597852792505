mod common;

use moyforge::generator::{random_graph, GenConfig};
use moyforge::graph::{ColoredGraph, VertexKind};
use moyforge::moduli_rep::{
    is_admissible, lift_coloring, local_dimension, random_decoration, to_representation, verify_vertex_relations, CMat, Decoration, C64,
};
use moyforge::rewrite::{apply_move, find_matches_limited, Engine, Strategy};
use moyforge::{count_colorings, enumerate_colorings, fixtures, LaurentPoly};
use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::sample::subsequence;

fn graph(seed: u64, max_vertices: usize) -> ColoredGraph {
    random_graph(&GenConfig { max_vertices, palette: vec![1, 2], seed, max_circles: 1, connected_only: false })
}

fn shuffled(n: usize, key: &[u64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by_key(|&i| (key.get(i).copied().unwrap_or(0), i));
    idx
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_ignores_ids_and_order(seed in 0u64..10_000, keys in proptest::collection::vec(any::<u64>(), 24)) {
        let g = graph(seed, 10);
        let p = shuffled(g.vertices.len(), &keys);
        let ep = shuffled(g.edges.len(), &keys[12..]);
        let mut h = g.permuted(&p, &ep);
        for (i, v) in h.vertices.iter_mut().enumerate() {
            v.id = format!("x{}", keys[i % keys.len()] % 1000 + 1000 * i as u64);
        }
        prop_assert_eq!(h.canonical_form(), g.canonical_form());
    }

    #[test]
    fn flux_breaking_mutations_are_rejected(seed in 0u64..10_000, pick in any::<prop::sample::Index>(), up in any::<bool>()) {
        let g = graph(seed, 10);
        prop_assert!(g.validate(2).is_ok());
        if !g.edges.is_empty() {
            let mut h = g.clone();
            let e = pick.index(h.edges.len());
            let c = h.edges[e].color;
            h.edges[e].color = if up || c == 1 { c + 1 } else { c - 1 };
            prop_assert!(h.validate(4).is_err());
        }
        if !g.vertices.is_empty() {
            let mut h = g.clone();
            let v = pick.index(h.vertices.len());
            h.vertices[v].kind = match h.vertices[v].kind { VertexKind::Merge => VertexKind::Split, VertexKind::Split => VertexKind::Merge };
            prop_assert!(h.validate(4).is_err());
        }
    }

    #[test]
    fn evaluation_at_one_counts_colorings(seed in 0u64..100_000, n in 2u32..5) {
        let g = graph(seed, 12);
        let p = Engine::default().evaluate(&g, n).unwrap();
        prop_assert_eq!(p.eval_at_one(), BigInt::from(count_colorings(&g, n)));
        prop_assert_eq!(p.bar(), p);
    }

    #[test]
    fn counter_matches_naive_enumeration(seed in 0u64..100_000, n in 1u32..5) {
        let g = graph(seed, 6);
        prop_assume!(g.edges.len() <= 8);
        prop_assert_eq!(count_colorings(&g, n), common::naive_colorings(&g, n).into());
    }

    #[test]
    fn disjoint_union_multiplies(a in 0u64..10_000, b in 0u64..10_000, n in 2u32..5) {
        let (g, h) = (graph(a, 8), graph(b, 8));
        let u = g.disjoint_union(&h);
        prop_assert_eq!(count_colorings(&u, n), count_colorings(&g, n) * count_colorings(&h, n));
        let e = Engine::default();
        prop_assert_eq!(e.evaluate(&u, n).unwrap(), &e.evaluate(&g, n).unwrap() * &e.evaluate(&h, n).unwrap());
    }

    #[test]
    fn every_first_move_gives_the_same_value(seed in 0u64..100_000, n in 2u32..5) {
        let g = graph(seed, 10);
        let engine = Engine::default();
        let value = engine.evaluate(&g, n).unwrap();
        for rule in engine.rules() {
            for emb in find_matches_limited(&g, rule, 4) {
                let expr = apply_move(&g, rule, &emb, n);
                let total: LaurentPoly = expr.iter().map(|(_, t, c)| c * &engine.evaluate(t, n).unwrap()).sum();
                prop_assert_eq!(&total, &value, "rule {}", rule.label);
            }
        }
    }

    #[test]
    fn randomized_order_agrees_with_priority(seed in 0u64..100_000, rs in any::<u64>(), n in 2u32..5) {
        let g = graph(seed, 12);
        let a = Engine::with_strategy(Strategy::Priority).evaluate(&g, n).unwrap();
        let b = Engine::with_strategy(Strategy::Randomized(rs)).evaluate(&g, n).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn generated_graphs_validate(seed in any::<u64>(), max in 0usize..14) {
        let g = graph(seed, max);
        prop_assert!(g.validate(2).is_ok());
        prop_assert!(g.is_closed());
        prop_assert!(g.vertices.len() <= max);
    }
}

fn perturb(d: &Decoration, eps: f64, salt: u64) -> Decoration {
    let mut x = salt.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = move || {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let frames = d
        .frames
        .iter()
        .map(|(k, f)| {
            let noise = CMat::from_fn(f.nrows(), f.ncols(), |_, _| C64::new(next(), next()));
            (k.clone(), (f + noise * C64::new(eps, 0.0)).qr().q().columns(0, f.ncols()).into_owned())
        })
        .collect();
    Decoration { n: d.n, frames, circles: d.circles.clone() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn representation_dictionary(seed in any::<u64>(), which in 0usize..3, n in 3usize..6) {
        let g = [ColoredGraph::circle(1), fixtures::theta(), fixtures::braid_web()][which].clone();
        let d = random_decoration(&g, n, 20, seed).unwrap();
        let r = to_representation(&d, &g);
        prop_assert!(r.special_unitary_residual() <= 1e-10);
        prop_assert!(r.conjugacy_residual() <= 1e-10);
        prop_assert!(r.to_decoration(&g).distance(&d) <= 1e-10);
    }

    #[test]
    fn relations_are_continuous_in_admissibility(seed in any::<u64>(), n in 3usize..6, exp in 4i32..12) {
        let g = fixtures::theta();
        let d = perturb(&random_decoration(&g, n, 20, seed).unwrap(), 10f64.powi(-exp), seed);
        for tol in [1e-9, 1e-6, 1e-3] {
            if is_admissible(&d, &g, tol / 10.0).unwrap().admissible {
                prop_assert!(verify_vertex_relations(&to_representation(&d, &g), &g) <= tol);
            }
        }
    }

    #[test]
    fn circle_dimension_at_coordinate_points(n in 2u32..7, idx in any::<prop::sample::Index>()) {
        let g = ColoredGraph::circle(1);
        let cols = enumerate_colorings(&g, n, 64);
        let d = lift_coloring(&cols[idx.index(cols.len())], n as usize);
        prop_assert_eq!(local_dimension(&d, &g).unwrap().dimension, 2 * (n as usize - 1));
    }

    #[test]
    fn lifted_colorings_are_exactly_admissible(seed in 0u64..1000, n in 2u32..5, pick in subsequence((0..16usize).collect::<Vec<_>>(), 1..4)) {
        let g = graph(seed, 8);
        let cols = enumerate_colorings(&g, n, 16);
        for i in pick.into_iter().filter(|&i| i < cols.len()) {
            let r = is_admissible(&lift_coloring(&cols[i], n as usize), &g, 0.0).unwrap();
            prop_assert!(r.admissible);
        }
    }
}
