//! Evaluation of the MOY polynomial of oriented colored trivalent graphs,
//! state counting, the moduli space of decorations and its representation
//! into SU(N), and link invariants computed from webs.

pub mod fixtures;
pub mod generator;
pub mod graph;
pub mod knot;
pub mod laurent;
pub mod moduli_rep;
pub mod rewrite;
pub mod states;
pub mod verify;

pub use graph::{CanonicalForm, ColoredGraph, Edge, Endpoint, GraphBuilder, GraphError, GraphExpr, VertexKind, Violation};
pub use laurent::{quantum_binomial, quantum_integer, LaurentPoly};
pub use rewrite::{evaluate, Engine, EngineConfig, EngineError, Strategy};
pub use states::{count_colorings, enumerate_colorings, SubsetColoring};
pub use generator::{enumerate_graphs, random_graph, GenConfig};
pub use moduli_rep::{is_admissible, lift_coloring, random_decoration, to_representation, Decoration, MeridianRep};
pub use knot::{link_invariant, parse_pd, resolve, Convention, PdDiagram};
