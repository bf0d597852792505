//! Shared inputs for the benchmarks.

use moyforge::{random_graph, ColoredGraph, GenConfig};

/// `count` closed {1,2} graphs with up to `max_vertices` vertices, fixed per seed.
pub fn corpus(seed: u64, count: usize, max_vertices: usize) -> Vec<ColoredGraph> {
    (0..count as u64)
        .map(|i| random_graph(&GenConfig { max_vertices, palette: vec![1, 2], seed: seed + i, max_circles: 1, connected_only: false }))
        .collect()
}
