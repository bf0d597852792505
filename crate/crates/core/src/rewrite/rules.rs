//! Local relations as pattern/replacement pairs sharing boundary-leg labels.

use std::fmt;

use num_bigint::BigInt;
use serde::Serialize;

use crate::graph::{ColoredGraph, GraphBuilder};
use crate::laurent::{quantum_binomial, quantum_integer_signed, LaurentPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum RuleName {
    #[serde(rename = "MOY0")]
    Moy0,
    #[serde(rename = "MOY1")]
    Moy1,
    #[serde(rename = "MOY2")]
    Moy2,
    #[serde(rename = "MOY3")]
    Moy3,
    #[serde(rename = "MOY4")]
    Moy4,
    #[serde(rename = "TRICK")]
    Trick,
    #[serde(rename = "CIRCLE_K")]
    CircleK,
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RuleName::Moy0 => "MOY0",
            RuleName::Moy1 => "MOY1",
            RuleName::Moy2 => "MOY2",
            RuleName::Moy3 => "MOY3",
            RuleName::Moy4 => "MOY4",
            RuleName::Trick => "TRICK",
            RuleName::CircleK => "CIRCLE_K",
        };
        f.write_str(s)
    }
}

/// Rule coefficient as a function of N.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coefficient {
    /// `[N + offset]`, with `[-n] = -[n]`.
    QInt(i64),
    /// `[N + offset choose k]`, zero when the top is below `k`.
    QBinom(i64, u32),
    Fixed(LaurentPoly),
}

impl Coefficient {
    pub fn one() -> Self {
        Coefficient::Fixed(LaurentPoly::one())
    }

    pub fn at(&self, n: u32) -> LaurentPoly {
        match self {
            Coefficient::QInt(off) => quantum_integer_signed(n as i64 + off),
            Coefficient::QBinom(off, k) => {
                let top = n as i64 + off;
                if top < *k as i64 {
                    LaurentPoly::zero()
                } else {
                    quantum_binomial(top as u32, *k).expect("quantum binomial is exact")
                }
            }
            Coefficient::Fixed(p) => p.clone(),
        }
    }

    pub fn at_one(&self, n: u32) -> BigInt {
        self.at(n).eval_at_one()
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let top = |off: i64| match off {
            0 => "N".to_string(),
            o if o < 0 => format!("N{o}"),
            o => format!("N+{o}"),
        };
        match self {
            Coefficient::QInt(o) => write!(f, "[{}]", top(*o)),
            Coefficient::QBinom(o, k) => write!(f, "[{} choose {k}]", top(*o)),
            Coefficient::Fixed(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MoveRule {
    pub name: RuleName,
    /// Distinguishes color variants within one family, e.g. `MOY1(2,1)`.
    pub label: String,
    pub pattern: ColoredGraph,
    pub terms: Vec<(Coefficient, ColoredGraph)>,
}

impl MoveRule {
    /// True when every replacement term has fewer vertices than the pattern.
    pub fn is_reducing(&self) -> bool {
        let pv = self.pattern.vertices.len();
        let pc = self.pattern.circles.len();
        self.terms
            .iter()
            .all(|(_, t)| t.vertices.len() < pv || (pv == 0 && t.circles.len() < pc))
    }

    /// Sum of the coefficients at q = 1, weighted per term.
    pub fn coefficients_at_one(&self, n: u32) -> Vec<BigInt> {
        self.terms.iter().map(|(c, _)| c.at_one(n)).collect()
    }
}

fn build(b: &mut GraphBuilder) -> ColoredGraph {
    b.build().expect("rule graph")
}

fn circle_rule(k: u8) -> MoveRule {
    let (name, label) = if k == 1 { (RuleName::Moy0, "MOY0".to_string()) } else { (RuleName::CircleK, format!("CIRCLE_{k}")) };
    MoveRule {
        name,
        label,
        pattern: ColoredGraph::circle(k),
        terms: vec![(Coefficient::QBinom(0, k as u32), ColoredGraph::default())],
    }
}

fn wire(legs: &[&str], color_pairs: &[(&str, u8, &str)]) -> ColoredGraph {
    let mut b = GraphBuilder::new();
    for l in legs {
        b.leg(l);
    }
    for (i, (t, c, h)) in color_pairs.iter().enumerate() {
        b.edge(&format!("r{i}"), *c, t, h);
    }
    build(&mut b)
}

/// An m-colored strand passing an n-colored loop. Variant `a` merges first,
/// variant `b` splits first.
fn loop_rules(m: u8, n: u8) -> [MoveRule; 2] {
    let a = build(
        GraphBuilder::new()
            .leg("a")
            .leg("b")
            .merge("v0")
            .split("v1")
            .edge("a", m, "a", "v0")
            .edge("l", n, "v1", "v0")
            .edge("w", m + n, "v0", "v1")
            .edge("b", m, "v1", "b"),
    );
    let b = build(
        GraphBuilder::new()
            .leg("a")
            .leg("b")
            .split("v0")
            .merge("v1")
            .edge("a", m, "a", "v1")
            .edge("w", n, "v0", "v1")
            .edge("l", m + n, "v1", "v0")
            .edge("b", m, "v0", "b"),
    );
    let coeff = Coefficient::QBinom(-(m as i64), n as u32);
    let out = wire(&["a", "b"], &[("a", m, "b")]);
    [
        MoveRule { name: RuleName::Moy1, label: format!("MOY1({m},{n})"), pattern: a, terms: vec![(coeff.clone(), out.clone())] },
        MoveRule { name: RuleName::Moy1, label: format!("MOY1'({m},{n})"), pattern: b, terms: vec![(coeff, out)] },
    ]
}

/// An (m+n)-edge splitting into m and n which merge straight back.
fn digon_rule(m: u8, n: u8) -> MoveRule {
    let pattern = build(
        GraphBuilder::new()
            .leg("p")
            .leg("q")
            .split("v0")
            .merge("v1")
            .edge("p", m + n, "p", "v0")
            .edge("x", m, "v0", "v1")
            .edge("y", n, "v0", "v1")
            .edge("q", m + n, "v1", "q"),
    );
    let coeff = Coefficient::Fixed(quantum_binomial((m + n) as u32, m as u32).expect("exact"));
    MoveRule {
        name: RuleName::Moy2,
        label: format!("MOY2({m},{n})"),
        pattern,
        terms: vec![(coeff, wire(&["p", "q"], &[("p", m + n, "q")]))],
    }
}

/// Directed square `m1 -x-> s1 -r-> m2 -y-> s2 -s-> m1` of merges and splits.
/// Legs: `a` into m1, `b` out of s1, `c` into m2, `d` out of s2.
fn square_pattern(x: u8, r: u8, y: u8, s: u8) -> ColoredGraph {
    build(
        GraphBuilder::new()
            .leg("a")
            .leg("b")
            .leg("c")
            .leg("d")
            .merge("m1")
            .split("s1")
            .merge("m2")
            .split("s2")
            .edge("a", x - s, "a", "m1")
            .edge("x", x, "m1", "s1")
            .edge("b", x - r, "s1", "b")
            .edge("r", r, "s1", "m2")
            .edge("c", y - r, "c", "m2")
            .edge("y", y, "m2", "s2")
            .edge("d", y - s, "s2", "d")
            .edge("s", s, "s2", "m1"),
    )
}

const SQUARE_LEGS: [&str; 4] = ["a", "b", "c", "d"];

/// `from` splits off a 1-colored rung which joins `via`, giving `to`; the
/// remainder of `from` leaves as `rest`.
fn h_shape(from: (&str, u8), rest: (&str, u8), via: (&str, u8), to: (&str, u8)) -> ColoredGraph {
    let mut b = GraphBuilder::new();
    for l in SQUARE_LEGS {
        b.leg(l);
    }
    b.split("hs").merge("hm");
    b.edge(from.0, from.1, from.0, "hs")
        .edge(rest.0, rest.1, "hs", rest.0)
        .edge("z", 1, "hs", "hm")
        .edge(via.0, via.1, via.0, "hm")
        .edge(to.0, to.1, "hm", to.0);
    build(&mut b)
}

fn square_rules() -> Vec<MoveRule> {
    let straight = |ab: u8, cd: u8| wire(&SQUARE_LEGS, &[("a", ab, "b"), ("c", cd, "d")]);
    let crossed = |ad: u8, cb: u8| wire(&SQUARE_LEGS, &[("a", ad, "d"), ("c", cb, "b")]);
    let rule = |label: &str, pattern: ColoredGraph, terms| MoveRule { name: RuleName::Moy3, label: label.into(), pattern, terms };
    vec![
        rule(
            "MOY3",
            square_pattern(2, 1, 2, 1),
            vec![(Coefficient::QInt(-2), straight(1, 1)), (Coefficient::one(), crossed(1, 1))],
        ),
        rule(
            "MOY3(3,1,2,1)",
            square_pattern(3, 1, 2, 1),
            vec![
                (Coefficient::QInt(-3), straight(2, 1)),
                (Coefficient::one(), h_shape(("a", 2), ("d", 1), ("c", 1), ("b", 2))),
            ],
        ),
        rule(
            "MOY3(3,2,3,1)",
            square_pattern(3, 2, 3, 1),
            vec![
                (Coefficient::QInt(-3), h_shape(("a", 2), ("b", 1), ("c", 1), ("d", 2))),
                (Coefficient::one(), crossed(2, 1)),
            ],
        ),
        rule(
            "MOY3(3,2,3,2)",
            square_pattern(3, 2, 3, 2),
            vec![(Coefficient::QBinom(-2, 2), straight(1, 1)), (Coefficient::QInt(-2), crossed(1, 1))],
        ),
    ]
}

/// Wide edge followed by a 1-rung through a second wide edge and back.
fn moy4_rule() -> MoveRule {
    let pattern = build(
        GraphBuilder::new()
            .leg("p")
            .leg("q")
            .leg("a")
            .leg("b")
            .split("v1")
            .merge("v2")
            .split("v3")
            .merge("v4")
            .edge("p", 2, "p", "v1")
            .edge("c", 1, "v1", "v4")
            .edge("d", 1, "v1", "v2")
            .edge("a", 1, "a", "v2")
            .edge("r", 2, "v2", "v3")
            .edge("e", 1, "v3", "v4")
            .edge("b", 1, "v3", "b")
            .edge("q", 2, "v4", "q"),
    );
    let legs = ["p", "q", "a", "b"];
    let thick = build(
        GraphBuilder::new()
            .leg("p")
            .leg("q")
            .leg("a")
            .leg("b")
            .merge("m")
            .split("s")
            .edge("p", 2, "p", "m")
            .edge("a", 1, "a", "m")
            .edge("f", 3, "m", "s")
            .edge("q", 2, "s", "q")
            .edge("b", 1, "s", "b"),
    );
    MoveRule {
        name: RuleName::Moy4,
        label: "MOY4".into(),
        pattern,
        terms: vec![
            (Coefficient::one(), wire(&legs, &[("p", 2, "q"), ("a", 1, "b")])),
            (Coefficient::one(), thick),
        ],
    }
}

/// Reassociation of two stacked merges (or splits) with leaf colors
/// `x, y, z`: `(x y) z` becomes `x (y z)`.
pub fn trick_rule(kind_merge: bool, x: u8, y: u8, z: u8) -> MoveRule {
    let legs = ["x", "y", "z", "o"];
    let mk = |first: (&str, &str), inner: u8, second: &str| {
        let mut b = GraphBuilder::new();
        for l in legs {
            b.leg(l);
        }
        let col = |s: &str| match s {
            "x" => x,
            "y" => y,
            _ => z,
        };
        if kind_merge {
            b.merge("v1").merge("v2");
            b.edge(first.0, col(first.0), first.0, "v1");
            b.edge(first.1, col(first.1), first.1, "v1");
            b.edge("i", inner, "v1", "v2");
            b.edge(second, col(second), second, "v2");
            b.edge("o", x + y + z, "v2", "o");
        } else {
            b.split("v1").split("v2");
            b.edge("o", x + y + z, "o", "v2");
            b.edge("i", inner, "v2", "v1");
            b.edge(second, col(second), "v2", second);
            b.edge(first.0, col(first.0), "v1", first.0);
            b.edge(first.1, col(first.1), "v1", first.1);
        }
        build(&mut b)
    };
    let pattern = mk(("x", "y"), x + y, "z");
    let replacement = mk(("y", "z"), y + z, "x");
    MoveRule {
        name: RuleName::Trick,
        label: format!("TRICK{}({x},{y},{z})", if kind_merge { "" } else { "'" }),
        pattern,
        terms: vec![(Coefficient::one(), replacement)],
    }
}

/// All reducing rules in priority order, for colors up to 3.
pub fn reducing_rules() -> Vec<MoveRule> {
    let mut rules = vec![circle_rule(1), circle_rule(2), circle_rule(3)];
    for (m, n) in [(1, 1), (1, 2), (2, 1)] {
        rules.extend(loop_rules(m, n));
    }
    rules.push(digon_rule(1, 1));
    rules.push(digon_rule(1, 2));
    rules.extend(square_rules());
    rules.push(moy4_rule());
    rules
}

/// Value-preserving reassociation moves with total color at most 3.
pub fn trick_rules() -> Vec<MoveRule> {
    let mut rules = Vec::new();
    for kind_merge in [true, false] {
        rules.push(trick_rule(kind_merge, 1, 1, 1));
    }
    rules
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::quantum_integer;
    use crate::states::subsets;
    use std::collections::HashMap;

    fn leg_set(g: &ColoredGraph) -> Vec<String> {
        let mut l = g.legs.clone();
        l.sort();
        l
    }

    #[test]
    fn patterns_and_terms_share_legs() {
        for r in reducing_rules().iter().chain(trick_rules().iter()) {
            r.pattern.validate(3).unwrap();
            for (_, t) in &r.terms {
                assert_eq!(leg_set(t), leg_set(&r.pattern), "{}", r.label);
                t.validate(3).unwrap();
            }
        }
    }

    #[test]
    fn reducing_rules_reduce() {
        for r in reducing_rules() {
            assert!(r.is_reducing(), "{}", r.label);
        }
    }

    #[test]
    fn coefficients_at_one_are_the_integer_factors() {
        let rules = reducing_rules();
        let by = |l: &str| rules.iter().find(|r| r.label == l).unwrap().clone();
        for n in 2..9u32 {
            let n_big = BigInt::from(n);
            assert_eq!(by("MOY0").coefficients_at_one(n), vec![n_big.clone()]);
            assert_eq!(by("MOY1(1,1)").coefficients_at_one(n), vec![&n_big - 1]);
            assert_eq!(by("MOY2(1,1)").coefficients_at_one(n), vec![BigInt::from(2)]);
            assert_eq!(by("MOY3").coefficients_at_one(n), vec![&n_big - 2, BigInt::from(1)]);
            assert_eq!(by("MOY4").coefficients_at_one(n), vec![BigInt::from(1), BigInt::from(1)]);
        }
    }

    /// Counts colorings of an open graph, keyed by the subsets on its legs
    /// (in sorted label order).
    fn transfer(g: &ColoredGraph, n: u32) -> HashMap<Vec<u64>, i64> {
        use crate::graph::Endpoint;
        let choices: Vec<Vec<u64>> = g.edges.iter().map(|e| subsets(n, e.color as u32)).collect();
        let inc = g.incidence();
        let mut labels: Vec<(String, usize)> = Vec::new();
        for (i, e) in g.edges.iter().enumerate() {
            for ep in [e.tail, e.head] {
                if let Endpoint::Leg(l) = ep {
                    labels.push((g.legs[l].clone(), i));
                }
            }
        }
        labels.sort();
        let mut out = HashMap::new();
        let mut idx = vec![0usize; choices.len()];
        if choices.iter().any(|c| c.is_empty()) {
            return out;
        }
        loop {
            let m: Vec<u64> = idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
            let ok = g.vertices.iter().zip(&inc).all(|(v, vi)| {
                let (big, small) = match v.kind {
                    crate::graph::VertexKind::Merge => (vi.outs[0], [vi.ins[0], vi.ins[1]]),
                    crate::graph::VertexKind::Split => (vi.ins[0], [vi.outs[0], vi.outs[1]]),
                };
                m[small[0]] & m[small[1]] == 0 && m[small[0]] | m[small[1]] == m[big]
            });
            if ok {
                *out.entry(labels.iter().map(|(_, e)| m[*e]).collect()).or_insert(0) += 1;
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return out;
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

    #[test]
    fn rules_hold_locally_at_q_one() {
        for r in reducing_rules().iter().filter(|r| !r.pattern.vertices.is_empty()).chain(trick_rules().iter()) {
            for n in 3..=5u32 {
                let lhs = transfer(&r.pattern, n);
                let mut rhs: HashMap<Vec<u64>, i64> = HashMap::new();
                for (c, t) in &r.terms {
                    let k: i64 = c.at_one(n).try_into().unwrap();
                    for (key, v) in transfer(t, n) {
                        *rhs.entry(key).or_insert(0) += k * v;
                    }
                }
                rhs.retain(|_, v| *v != 0);
                assert_eq!(lhs, rhs, "{} at N={n}", r.label);
            }
        }
    }

    #[test]
    fn square_coefficient_is_quantum_integer() {
        for n in 3..8 {
            assert_eq!(Coefficient::QInt(-2).at(n), quantum_integer(n - 2));
        }
        assert_eq!(Coefficient::QInt(-3).at(2), -quantum_integer(1));
    }
}
