//! Randomized property suites over generated inputs, shared by the command
//! line front end and the test suites.

use num_bigint::BigInt;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::fixtures;
use crate::generator::{random_graph, GenConfig};
use crate::graph::{ColoredGraph, Edge, Endpoint, Vertex, VertexKind};
use crate::knot::{braid_closure_pd, examples, link_invariant_with, Convention};
use crate::laurent::quantum_integer;
use crate::moduli_rep::{check_trace_lemma, random_decoration, to_representation, verify_vertex_relations};
use crate::rewrite::{find_matches_limited, reducing_rules, splice, trick_rules, Engine, EngineError, MoveRule};
use crate::states::{count_colorings, count_colorings_exhaustive};

pub const SUITES: [&str; 5] = ["moy-recursions", "theorem-q1", "rep-relations", "trace-lemma", "reidemeister"];

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("unknown suite {0:?}; expected one of {SUITES:?}")]
    UnknownSuite(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub cases: usize,
    pub failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
}

impl CheckRow {
    fn new(check: impl Into<String>) -> Self {
        CheckRow { check: check.into(), cases: 0, failures: 0, max_residual: None }
    }

    fn record(&mut self, ok: bool) {
        self.cases += 1;
        self.failures += !ok as usize;
    }

    fn residual(&mut self, r: f64, tol: f64) {
        self.record(r <= tol);
        self.max_residual = Some(self.max_residual.unwrap_or(0.0).max(r));
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub size: usize,
    pub rows: Vec<CheckRow>,
    /// Smallest failing input, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<serde_json::Value>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.failures == 0)
    }
}

/// Keeps the failing input with the fewest vertices.
#[derive(Default)]
struct Smallest(Option<(usize, serde_json::Value)>);

impl Smallest {
    fn offer(&mut self, g: &ColoredGraph, extra: serde_json::Value) {
        let size = g.vertices.len() + g.circles.len();
        if self.0.as_ref().is_none_or(|(s, _)| size < *s) {
            let graph: serde_json::Value = serde_json::from_str(&g.to_json(None)).expect("graph json");
            self.0 = Some((size, serde_json::json!({ "graph": graph, "context": extra })));
        }
    }

    fn take(self) -> Option<serde_json::Value> {
        self.0.map(|(_, v)| v)
    }
}

pub fn run_suite(name: &str, seed: u64, size: usize) -> Result<SuiteReport, VerifyError> {
    let (rows, counterexample) = match name {
        "moy-recursions" => moy_recursions(seed, size),
        "theorem-q1" => eval_matches_count(seed, size),
        "rep-relations" => rep_relations(seed, size),
        "trace-lemma" => trace_lemma(seed, size),
        "reidemeister" => reidemeister(),
        other => return Err(VerifyError::UnknownSuite(other.to_string())),
    };
    Ok(SuiteReport { suite: name.to_string(), seed, size, rows, counterexample })
}

/// Embeds the rule's pattern into `host`. An in-leg paired with an out-leg
/// of the same color either cuts a host edge of that color or is joined
/// directly; legs left over are closed through a merge tree followed by a
/// split tree, which balances because the pattern conserves flux.
pub fn plant(rule: &MoveRule, host: &ColoredGraph, rng: &mut impl Rng) -> Option<ColoredGraph> {
    let p = &rule.pattern;
    let mut g = host.clone();
    let off = g.vertices.len();
    g.vertices.extend(p.vertices.iter().map(|v| Vertex { id: format!("pat.{}", v.id), kind: v.kind }));
    let mut ins = Vec::new();
    let mut outs = Vec::new();
    for e in &p.edges {
        match (e.tail, e.head) {
            (Endpoint::Vertex(t), Endpoint::Vertex(h)) => g.edges.push(Edge {
                id: format!("pat.{}", e.id),
                color: e.color,
                tail: Endpoint::Vertex(t + off),
                head: Endpoint::Vertex(h + off),
            }),
            (Endpoint::Leg(_), Endpoint::Vertex(h)) => ins.push((e.color, h + off)),
            (Endpoint::Vertex(t), Endpoint::Leg(_)) => outs.push((e.color, t + off)),
            _ => return None,
        }
    }
    let edge = |g: &mut ColoredGraph, color: u8, tail: Endpoint, head: Endpoint| {
        let id = format!("plant{}", g.edges.len());
        g.edges.push(Edge { id, color, tail, head });
    };
    outs.shuffle(rng);
    let mut cut = vec![false; host.edges.len()];
    let mut unpaired = Vec::new();
    for (color, h) in ins {
        let Some(j) = outs.iter().position(|o| o.0 == color) else {
            unpaired.push((color, h));
            continue;
        };
        let (_, t) = outs.remove(j);
        let candidates: Vec<usize> = (0..host.edges.len()).filter(|&i| !cut[i] && host.edges[i].color == color).collect();
        match candidates.choose(rng) {
            Some(&i) if rng.random_bool(0.75) => {
                cut[i] = true;
                let e = &host.edges[i];
                edge(&mut g, color, e.tail, Endpoint::Vertex(h));
                edge(&mut g, color, Endpoint::Vertex(t), e.head);
            }
            _ => edge(&mut g, color, Endpoint::Vertex(t), Endpoint::Vertex(h)),
        }
    }
    if let Some((&(mut color, mut at), rest)) = outs.split_first() {
        for &(c, t) in rest {
            let m = g.vertices.len();
            g.vertices.push(Vertex { id: format!("plant.m{m}"), kind: VertexKind::Merge });
            edge(&mut g, color, Endpoint::Vertex(at), Endpoint::Vertex(m));
            edge(&mut g, c, Endpoint::Vertex(t), Endpoint::Vertex(m));
            (color, at) = (color + c, m);
        }
        let (&(last_c, last_h), init) = unpaired.split_last()?;
        for &(c, h) in init {
            let s = g.vertices.len();
            g.vertices.push(Vertex { id: format!("plant.s{s}"), kind: VertexKind::Split });
            edge(&mut g, color, Endpoint::Vertex(at), Endpoint::Vertex(s));
            edge(&mut g, c, Endpoint::Vertex(s), Endpoint::Vertex(h));
            (color, at) = (color.checked_sub(c)?, s);
        }
        if color != last_c {
            return None;
        }
        edge(&mut g, color, Endpoint::Vertex(at), Endpoint::Vertex(last_h));
    } else if !unpaired.is_empty() {
        return None;
    }
    let mut i = 0;
    g.edges.retain(|_| {
        i += 1;
        i > cut.len() || !cut[i - 1]
    });
    g.circles.extend(&p.circles);
    Some(g)
}

fn host_config(rule: &MoveRule, seed: u64) -> GenConfig {
    let three = rule.pattern.max_color() >= 3;
    GenConfig { max_vertices: 6, palette: if three { vec![1, 2, 3] } else { vec![1, 2] }, seed, max_circles: 1, connected_only: false }
}

/// Whether `count(g) = sum of coefficient(1) * count(term)` for the rule at `n`.
pub fn recursion_holds(g: &ColoredGraph, rule: &MoveRule, n: u32) -> Option<bool> {
    let emb = find_matches_limited(g, rule, 1).into_iter().next()?;
    let lhs = BigInt::from(count_colorings(g, n));
    let rhs: BigInt = rule
        .terms
        .iter()
        .map(|(c, t)| c.at_one(n) * BigInt::from(count_colorings(&splice(g, rule, &emb, t), n)))
        .sum();
    Some(lhs == rhs)
}

/// Graphs containing the rule's pattern, planted into random hosts.
pub fn graphs_containing(rule: &MoveRule, count: usize, seed: u64) -> Vec<ColoredGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut attempt = 0u64;
    while out.len() < count && attempt < 20 * count as u64 + 100 {
        attempt += 1;
        let host = random_graph(&host_config(rule, seed.wrapping_mul(7919).wrapping_add(attempt)));
        if let Some(g) = plant(rule, &host, &mut rng) {
            out.push(g);
        }
    }
    out
}

fn moy_recursions(seed: u64, size: usize) -> (Vec<CheckRow>, Option<serde_json::Value>) {
    let mut worst = Smallest::default();
    let mut rows = Vec::new();
    for rule in reducing_rules().iter().chain(&trick_rules()) {
        let mut row = CheckRow::new(format!("{} count recursion", rule.label));
        let graphs = graphs_containing(rule, size, seed);
        if graphs.len() < size {
            // not enough planted graphs counts as a failure of the suite
            row.failures += size - graphs.len();
        }
        for g in &graphs {
            for n in 2..=4 {
                let ok = recursion_holds(g, rule, n).unwrap_or(false);
                row.record(ok);
                if !ok {
                    worst.offer(g, serde_json::json!({ "rule": rule.label, "N": n }));
                }
            }
        }
        rows.push(row);
    }
    (rows, worst.take())
}

fn eval_matches_count(seed: u64, size: usize) -> (Vec<CheckRow>, Option<serde_json::Value>) {
    let engine = Engine::default();
    let graphs: Vec<ColoredGraph> = (0..size as u64)
        .map(|i| random_graph(&GenConfig { max_vertices: 12, palette: vec![1, 2], seed: seed.wrapping_add(i), max_circles: 1, connected_only: false }))
        .collect();
    // (graph index, graph, N, engine agrees, exhaustive count agrees)
    type Outcome<'a> = (usize, &'a ColoredGraph, u32, Result<bool, EngineError>, Option<bool>);
    let results: Vec<Outcome> = graphs
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, g)| {
            let engine = &engine;
            (2..=4u32).map(move |n| {
                let count = count_colorings(g, n);
                let eval = engine.evaluate(g, n).map(|p| p.eval_at_one() == BigInt::from(count.clone()));
                let naive = (g.edges.len() <= 8).then(|| BigInt::from(count_colorings_exhaustive(g, n)) == BigInt::from(count));
                (i, g, n, eval, naive)
            })
        })
        .collect();
    let mut eq = CheckRow::new("P_N(1) = colorings, N = 2..4");
    let mut irr = CheckRow::new("no irreducible graphs");
    let mut naive = CheckRow::new("colorings = exhaustive count (<= 8 edges)");
    let mut worst = Smallest::default();
    for (i, g, n, eval, nv) in results {
        match eval {
            Ok(ok) => {
                eq.record(ok);
                irr.record(true);
                if !ok {
                    worst.offer(g, serde_json::json!({ "index": i, "N": n, "check": "eval" }));
                }
            }
            Err(e) => {
                irr.record(false);
                worst.offer(g, serde_json::json!({ "index": i, "N": n, "error": e.to_string() }));
            }
        }
        if let Some(ok) = nv {
            naive.record(ok);
            if !ok {
                worst.offer(g, serde_json::json!({ "index": i, "N": n, "check": "exhaustive" }));
            }
        }
    }
    (vec![eq, irr, naive], worst.take())
}

fn rep_relations(seed: u64, size: usize) -> (Vec<CheckRow>, Option<serde_json::Value>) {
    const TOL: f64 = 1e-9;
    let graphs = [("circle", ColoredGraph::circle(1)), ("theta", fixtures::theta()), ("braid-web", fixtures::braid_web())];
    let mut sampled = CheckRow::new("admissible sample found");
    let mut rel = CheckRow::new("vertex relations");
    let mut conj = CheckRow::new("conjugacy classes");
    let mut su = CheckRow::new("special unitary");
    let mut round = CheckRow::new("dictionary roundtrip");
    let mut first_failure = None;
    for i in 0..size {
        let (name, g) = &graphs[i % 3];
        let n = 3 + (i / 3) % 3;
        let Ok(d) = random_decoration(g, n, 20, seed.wrapping_add(i as u64)) else {
            sampled.record(false);
            first_failure.get_or_insert_with(|| serde_json::json!({ "graph": name, "N": n, "sample": i }));
            continue;
        };
        sampled.record(true);
        let r = to_representation(&d, g);
        let before = (rel.failures, conj.failures, su.failures, round.failures);
        rel.residual(verify_vertex_relations(&r, g), TOL);
        conj.residual(r.conjugacy_residual(), TOL);
        su.residual(r.special_unitary_residual(), TOL);
        round.residual(r.to_decoration(g).distance(&d), TOL);
        if before != (rel.failures, conj.failures, su.failures, round.failures) {
            first_failure.get_or_insert_with(|| serde_json::json!({ "graph": name, "N": n, "decoration": d.to_json() }));
        }
    }
    (vec![sampled, rel, conj, su, round], first_failure)
}

fn trace_lemma(seed: u64, size: usize) -> (Vec<CheckRow>, Option<serde_json::Value>) {
    let rows = (3..=6)
        .map(|n| {
            let s = check_trace_lemma(n, size, seed.wrapping_add(n as u64));
            CheckRow {
                check: format!("tr(ST) = ζ²(N-4) iff orthogonal, N = {n}"),
                cases: s.trials,
                failures: s.failures,
                max_residual: Some(s.max_orthogonal_residual),
            }
        })
        .collect();
    (rows, None)
}

/// Braid-closure pairs related by second and third Reidemeister moves.
pub const R2_R3_PAIRS: [(usize, &[i32], &[i32]); 4] = [
    (2, &[1, 1, 1], &[1, 1, -1, 1, 1]),
    (3, &[1, 2, 1, 2], &[2, 1, 2, 2]),
    (3, &[1, -2, 1, -2], &[1, 2, -2, -2, 1, -2]),
    (3, &[1, 2, 1], &[2, 1, 2]),
];

fn reidemeister() -> (Vec<CheckRow>, Option<serde_json::Value>) {
    let engine = Engine::default();
    let inv = |d: &crate::knot::PdDiagram, n| link_invariant_with(&engine, d, n, Convention::A).ok();
    let mut r23 = CheckRow::new("R2/R3 pairs equal");
    let mut r1 = CheckRow::new("R1 stabilization changes at most a monomial");
    let mut mirror = CheckRow::new("mirror is q -> 1/q");
    let mut unknot = CheckRow::new("unknot is [N]");
    let mut bad = None;
    for n in 2..=5 {
        for (s, a, b) in R2_R3_PAIRS {
            let ok = inv(&braid_closure_pd(s, a), n).is_some_and(|x| Some(x) == inv(&braid_closure_pd(s, b), n));
            r23.record(ok);
            if !ok {
                bad.get_or_insert_with(|| serde_json::json!({ "braids": [a, b], "N": n }));
            }
        }
        // appending the new generator on an extra strand adds one kink
        for (s, w, sign) in [(2, &[1, 1, 1][..], 1), (2, &[1, 1, 1][..], -1), (3, &[1, -2, 1, -2][..], 1), (3, &[1, -2, 1, -2][..], -1)] {
            let mut stab = w.to_vec();
            stab.push(sign * s as i32);
            let (x, y) = (inv(&braid_closure_pd(s, w), n), inv(&braid_closure_pd(s + 1, &stab), n));
            r1.record(matches!((x, y), (Some(x), Some(y)) if y.monomial_ratio(&x).is_some()));
        }
        for d in [examples::trefoil(), examples::figure_eight()] {
            let ok = matches!((inv(&d, n), inv(&d.mirror(), n)), (Some(x), Some(y)) if y == x.bar());
            mirror.record(ok);
        }
        unknot.record(inv(&examples::unknot(), n) == Some(quantum_integer(n)));
    }
    (vec![r23, r1, mirror, unknot], bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planting_embeds_every_rule() {
        for rule in reducing_rules().iter().chain(&trick_rules()) {
            let graphs = graphs_containing(rule, 10, 3);
            assert_eq!(graphs.len(), 10, "{}", rule.label);
            for g in &graphs {
                g.validate(255).unwrap();
                assert!(g.is_closed());
                assert!(!find_matches_limited(g, rule, 1).is_empty(), "{}", rule.label);
            }
        }
    }

    #[test]
    fn small_suites_pass() {
        for name in SUITES {
            let report = run_suite(name, 1, 12).unwrap();
            assert!(report.passed(), "{}", serde_json::to_string_pretty(&report).unwrap());
        }
        assert!(run_suite("nope", 0, 1).is_err());
    }
}
