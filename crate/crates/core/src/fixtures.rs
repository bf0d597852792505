//! Small named graphs used in tests, benches and the command line.

use crate::graph::{ColoredGraph, GraphBuilder};

/// Two 1-colored edges from a split to a merge, closed by a 2-colored edge.
pub fn theta() -> ColoredGraph {
    GraphBuilder::new()
        .merge("m")
        .split("s")
        .edge("x", 1, "s", "m")
        .edge("y", 1, "s", "m")
        .edge("z", 2, "m", "s")
        .build()
        .expect("theta")
}

/// Closure of a braid-like web on `strands` strands. Each letter `i` inserts a
/// wide edge (merge of strands `i`, `i+1` into a 2-edge, then split back).
/// Strands never touched become 1-colored circles.
pub fn braid_closure(strands: usize, word: &[usize]) -> ColoredGraph {
    let mut b = GraphBuilder::new();
    let mut touches: Vec<Vec<usize>> = vec![Vec::new(); strands];
    for (t, &i) in word.iter().enumerate() {
        assert!(i >= 1 && i < strands, "generator {i} out of range");
        b.merge(&format!("m{t}")).split(&format!("s{t}"));
        b.edge(&format!("w{t}"), 2, &format!("m{t}"), &format!("s{t}"));
        touches[i - 1].push(t);
        touches[i].push(t);
    }
    for (i, ts) in touches.iter().enumerate() {
        if ts.is_empty() {
            b.circle(1);
            continue;
        }
        for (j, &t) in ts.iter().enumerate() {
            let next = ts[(j + 1) % ts.len()];
            b.edge(&format!("a{i}_{j}"), 1, &format!("s{t}"), &format!("m{next}"));
        }
    }
    b.build().expect("braid closure")
}

/// Closure of `b1 b2 b1 b2` on three strands: four wide edges, eight
/// 1-colored edges, and a middle strand meeting every wide edge.
pub fn braid_web() -> ColoredGraph {
    braid_closure(3, &[1, 2, 1, 2])
}
