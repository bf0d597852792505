//! Evaluation of closed graphs by exhaustive local rewriting.
//!
//! Each step either applies a reducing rule (every output term has fewer
//! vertices, or one circle fewer) or, when none matches, searches a bounded
//! number of reassociation moves for a graph where one does. Results are
//! memoized per connected component on the canonical form.

mod matching;
mod rules;

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, HashSet, VecDeque};
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{CanonicalForm, ColoredGraph, ValidationReport};
use crate::laurent::{quantum_binomial, LaurentPoly};

pub use matching::{apply_move, find_matches, find_matches_limited, splice, Embedding};
pub use rules::{reducing_rules, trick_rule, trick_rules, Coefficient, MoveRule, RuleName};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("no rule applies to graph {canonical}")]
    Irreducible { canonical: CanonicalForm },
    #[error("graph has boundary legs")]
    NotClosed,
    #[error(transparent)]
    Invalid(#[from] ValidationReport),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// First matching rule in priority order, first embedding found.
    Priority,
    /// Uniform choice among all applicable reducing moves, seeded per graph.
    Randomized(u64),
}

#[derive(Clone, Debug, Default, Serialize, PartialEq, Eq)]
pub struct EngineStats {
    pub moves_applied: u64,
    pub trick_moves: u64,
    pub memo_hits: u64,
    pub memo_misses: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceStep {
    pub rule: String,
    pub graph: CanonicalForm,
    /// Reassociation moves performed before the rule matched.
    pub tricks: usize,
    pub terms: Vec<(String, CanonicalForm)>,
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub strategy: Strategy,
    /// Maximum memo entries; further results are computed but not stored.
    pub memo_cap: usize,
    pub trick_depth: usize,
    pub trace: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        let memo_cap = std::env::var("MOYFORGE_MEMO_CAP")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(1 << 20);
        EngineConfig { strategy: Strategy::Priority, memo_cap, trick_depth: 4, trace: false }
    }
}

pub struct Engine {
    cfg: EngineConfig,
    reducing: Vec<MoveRule>,
    tricks: Vec<MoveRule>,
    memo: Mutex<HashMap<(CanonicalForm, u32), LaurentPoly>>,
    moves: AtomicU64,
    trick_moves: AtomicU64,
    hits: AtomicU64,
    misses: AtomicU64,
    trace: Mutex<Vec<TraceStep>>,
}

type Choice = (ColoredGraph, usize, Embedding, usize);

fn measure(g: &ColoredGraph) -> (usize, usize) {
    (g.vertices.len(), g.edges.len() + g.circles.len())
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new(EngineConfig::default())
    }
}

impl Engine {
    pub fn new(cfg: EngineConfig) -> Self {
        Engine {
            cfg,
            reducing: reducing_rules(),
            tricks: trick_rules(),
            memo: Mutex::new(HashMap::new()),
            moves: AtomicU64::new(0),
            trick_moves: AtomicU64::new(0),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
            trace: Mutex::new(Vec::new()),
        }
    }

    pub fn with_strategy(strategy: Strategy) -> Self {
        Engine::new(EngineConfig { strategy, ..Default::default() })
    }

    pub fn stats(&self) -> EngineStats {
        EngineStats {
            moves_applied: self.moves.load(Ordering::Relaxed),
            trick_moves: self.trick_moves.load(Ordering::Relaxed),
            memo_hits: self.hits.load(Ordering::Relaxed),
            memo_misses: self.misses.load(Ordering::Relaxed),
        }
    }

    pub fn take_trace(&self) -> Vec<TraceStep> {
        std::mem::take(&mut *self.trace.lock().unwrap())
    }

    pub fn rules(&self) -> &[MoveRule] {
        &self.reducing
    }

    /// P_N of a closed graph. Colors above `n` make the value zero.
    pub fn evaluate(&self, g: &ColoredGraph, n: u32) -> Result<LaurentPoly, EngineError> {
        if !g.is_closed() {
            return Err(EngineError::NotClosed);
        }
        g.validate(u8::MAX as u32)?;
        self.eval_graph(g, n)
    }

    fn eval_graph(&self, g: &ColoredGraph, n: u32) -> Result<LaurentPoly, EngineError> {
        let mut acc = LaurentPoly::one();
        for c in g.split_components() {
            let v = self.eval_component(&c, n)?;
            if v.is_zero() {
                return Ok(v);
            }
            acc = &acc * &v;
        }
        Ok(acc)
    }

    fn eval_component(&self, c: &ColoredGraph, n: u32) -> Result<LaurentPoly, EngineError> {
        if c.max_color() as u32 > n {
            return Ok(LaurentPoly::zero());
        }
        if c.vertices.is_empty() {
            return Ok(match c.circles.first() {
                Some(&k) => {
                    self.moves.fetch_add(1, Ordering::Relaxed);
                    if self.cfg.trace {
                        self.trace.lock().unwrap().push(TraceStep {
                            rule: format!("CIRCLE_{k}"),
                            graph: c.canonical_form(),
                            tricks: 0,
                            terms: Vec::new(),
                        });
                    }
                    quantum_binomial(n, k as u32).expect("exact")
                }
                None => LaurentPoly::one(),
            });
        }
        let key = (c.canonical_form(), n);
        if let Some(v) = self.memo.lock().unwrap().get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(v.clone());
        }
        self.misses.fetch_add(1, Ordering::Relaxed);

        let Some((g, ri, emb, tricks)) = self.choose(c, &key.0) else {
            return Err(EngineError::Irreducible { canonical: key.0 });
        };
        let rule = &self.reducing[ri];
        self.moves.fetch_add(1, Ordering::Relaxed);
        self.trick_moves.fetch_add(tricks as u64, Ordering::Relaxed);
        let before = measure(&g);
        let mut total = LaurentPoly::zero();
        let mut trace_terms = Vec::new();
        for (coeff, rep) in &rule.terms {
            let k = coeff.at(n);
            let h = splice(&g, rule, &emb, rep);
            assert!(measure(&h) < before, "{} did not reduce {}", rule.label, key.0);
            if self.cfg.trace {
                trace_terms.push((k.to_string(), h.canonical_form()));
            }
            if k.is_zero() {
                continue;
            }
            total += &k * &self.eval_graph(&h, n)?;
        }
        if self.cfg.trace {
            self.trace.lock().unwrap().push(TraceStep {
                rule: rule.label.clone(),
                graph: key.0.clone(),
                tricks,
                terms: trace_terms,
            });
        }
        let mut memo = self.memo.lock().unwrap();
        if memo.len() < self.cfg.memo_cap {
            memo.insert(key, total.clone());
        }
        Ok(total)
    }

    fn reducing_move(&self, g: &ColoredGraph, key: &CanonicalForm) -> Option<(usize, Embedding)> {
        match self.cfg.strategy {
            Strategy::Priority => self
                .reducing
                .iter()
                .enumerate()
                .find_map(|(i, r)| find_matches_limited(g, r, 1).pop().map(|e| (i, e))),
            Strategy::Randomized(seed) => {
                let mut all = Vec::new();
                for (i, r) in self.reducing.iter().enumerate() {
                    all.extend(find_matches_limited(g, r, 64).into_iter().map(|e| (i, e)));
                }
                let mut h = DefaultHasher::new();
                key.hash(&mut h);
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ h.finish());
                all.choose(&mut rng).cloned()
            }
        }
    }

    /// A reducing move on `c`, or on a graph reached from `c` by at most
    /// `trick_depth` reassociations (breadth first).
    fn choose(&self, c: &ColoredGraph, key: &CanonicalForm) -> Option<Choice> {
        if let Some((ri, emb)) = self.reducing_move(c, key) {
            return Some((c.clone(), ri, emb, 0));
        }
        let mut seen: HashSet<CanonicalForm> = HashSet::from([key.clone()]);
        let mut queue: VecDeque<(ColoredGraph, usize)> = VecDeque::from([(c.clone(), 0)]);
        while let Some((g, depth)) = queue.pop_front() {
            if depth == self.cfg.trick_depth {
                continue;
            }
            for rule in &self.tricks {
                for emb in find_matches(&g, rule) {
                    let h = splice(&g, rule, &emb, &rule.terms[0].1);
                    let hk = h.canonical_form();
                    if !seen.insert(hk.clone()) {
                        continue;
                    }
                    if let Some((ri, e)) = self.reducing_move(&h, &hk) {
                        return Some((h, ri, e, depth + 1));
                    }
                    queue.push_back((h, depth + 1));
                }
            }
        }
        None
    }
}

/// P_N with a fresh priority-order engine.
pub fn evaluate(g: &ColoredGraph, n: u32) -> Result<LaurentPoly, EngineError> {
    Engine::default().evaluate(g, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::GraphBuilder;
    use crate::laurent::quantum_integer;

    fn rule(label: &str) -> MoveRule {
        reducing_rules().into_iter().find(|r| r.label == label).unwrap()
    }

    #[test]
    fn circle_values() {
        for n in 2..9 {
            assert_eq!(evaluate(&ColoredGraph::circle(1), n).unwrap(), quantum_integer(n));
            assert_eq!(evaluate(&ColoredGraph::circle(2), n).unwrap(), quantum_binomial(n, 2).unwrap());
        }
        assert!(evaluate(&ColoredGraph::circle(3), 2).unwrap().is_zero());
    }

    #[test]
    fn theta_value() {
        for n in 2..8 {
            let want = quantum_integer(n) * quantum_integer(n - 1);
            assert_eq!(evaluate(&fixtures::theta(), n).unwrap(), want);
            let alt = LaurentPoly::from_terms([(1, 1), (-1, 1)]) * quantum_binomial(n, 2).unwrap();
            assert_eq!(alt, want);
        }
    }

    #[test]
    fn digon_on_theta_has_one_match() {
        let r = rule("MOY2(1,1)");
        let ms = find_matches(&fixtures::theta(), &r);
        assert_eq!(ms.len(), 1);
        let expr = apply_move(&fixtures::theta(), &r, &ms[0], 4);
        let terms = expr.into_terms();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].0, quantum_integer(2));
        assert_eq!(terms[0].1, ColoredGraph::circle(2));
    }

    #[test]
    fn loop_on_theta_gives_circle() {
        let r = rule("MOY1(1,1)");
        let ms = find_matches(&fixtures::theta(), &r);
        assert_eq!(ms.len(), 2);
        for m in ms {
            let terms = apply_move(&fixtures::theta(), &r, &m, 5).into_terms();
            assert_eq!(terms[0].0, quantum_integer(4));
            assert_eq!(terms[0].1, ColoredGraph::circle(1));
        }
    }

    #[test]
    fn circle_pattern_matches() {
        assert_eq!(find_matches(&ColoredGraph::circle(1), &rule("MOY0")).len(), 1);
        assert!(find_matches(&ColoredGraph::circle(1), &rule("MOY3")).is_empty());
    }

    #[test]
    fn disjoint_union_multiplies() {
        let t = fixtures::theta();
        let u = t.disjoint_union(&fixtures::braid_web());
        for n in 2..5 {
            let a = evaluate(&t, n).unwrap();
            let b = evaluate(&fixtures::braid_web(), n).unwrap();
            assert_eq!(evaluate(&u, n).unwrap(), a * b);
        }
    }

    #[test]
    fn braid_closures_follow_hecke_traces() {
        // tr(b1) on two strands = [2][N][N-1]; tr(b1 b2) on three = [N][N-1]^2.
        for n in 2..7u32 {
            let qn = quantum_integer(n);
            let qn1 = quantum_integer(n - 1);
            let two = quantum_integer(2);
            assert_eq!(evaluate(&fixtures::braid_closure(2, &[1, 1]), n).unwrap(), &two * &(&qn * &qn1));
            assert_eq!(evaluate(&fixtures::braid_closure(3, &[1, 2]), n).unwrap(), &qn * &(&qn1 * &qn1));
        }
    }

    #[test]
    fn open_graph_is_rejected() {
        let g = GraphBuilder::new().leg("a").leg("b").edge("e", 1, "a", "b").build().unwrap();
        assert!(matches!(evaluate(&g, 3), Err(EngineError::NotClosed)));
    }

    #[test]
    fn strategies_agree_on_fixtures() {
        for g in [fixtures::theta(), fixtures::braid_web(), fixtures::braid_closure(3, &[1, 2, 1])] {
            for n in 2..6 {
                let a = evaluate(&g, n).unwrap();
                for seed in 0..4 {
                    let b = Engine::with_strategy(Strategy::Randomized(seed)).evaluate(&g, n).unwrap();
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn trace_records_steps() {
        let e = Engine::new(EngineConfig { trace: true, ..Default::default() });
        e.evaluate(&fixtures::braid_web(), 3).unwrap();
        let t = e.take_trace();
        assert!(!t.is_empty());
        assert!(e.stats().moves_applied as usize >= t.len());
    }
}
