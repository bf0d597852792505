//! Admissible decorations by complex subspaces and the matching meridian
//! representations into SU(N).
//!
//! A k-colored edge carries a k-dimensional subspace of C^N, stored as an
//! orthonormal frame. Its meridian maps to `ζ^k (I - 2P)` with `ζ = e^{iπ/N}`
//! and P the orthogonal projector, so the two small meridians at a vertex
//! multiply to the big one exactly when the small subspaces are orthogonal.

mod chart;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ColoredGraph, VertexKind};
use crate::states::SubsetColoring;

pub use chart::{lines, local_dimension, project_to_variety, random_decoration, LocalDimension};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

#[derive(Debug, Error, PartialEq)]
pub enum ModuliError {
    #[error("edge {edge}: frame has shape {rows}x{cols}, expected {n}x{k}")]
    DimensionMismatch { edge: String, rows: usize, cols: usize, n: usize, k: usize },
    #[error("edge {0} has no frame")]
    MissingEdge(String),
    #[error("no admissible decoration found after {0} attempts")]
    SamplingFailed(usize),
    #[error("decoration is not admissible (residual {0:e})")]
    NotAdmissible(f64),
    #[error("singular value {0:e} (relative) too close to the rank threshold")]
    Inconclusive(f64),
    #[error("malformed decoration: {0}")]
    Format(String),
}

/// Orthonormal frame per edge and per circle.
#[derive(Clone, Debug)]
pub struct Decoration {
    pub n: usize,
    pub frames: BTreeMap<String, CMat>,
    pub circles: Vec<CMat>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VertexResidual {
    pub vertex: String,
    /// Largest |<a, b>| between the two small frames.
    pub orthogonality: f64,
    /// Frobenius norm of `P_a + P_b - P_c`.
    pub span: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub max_residual: f64,
    /// Largest deviation of any frame from orthonormality.
    pub frame_residual: f64,
    pub vertices: Vec<VertexResidual>,
}

pub fn projector(f: &CMat) -> CMat {
    f * f.adjoint()
}

pub fn frame_residual(f: &CMat) -> f64 {
    let k = f.ncols();
    (f.adjoint() * f - CMat::identity(k, k)).camax()
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn zeta(n: usize) -> C64 {
    C64::from_polar(1.0, PI / n as f64)
}

impl Decoration {
    pub fn frame(&self, id: &str) -> Result<&CMat, ModuliError> {
        self.frames.get(id).ok_or_else(|| ModuliError::MissingEdge(id.to_string()))
    }

    /// Applies a global unitary to every subspace.
    pub fn transformed(&self, u: &CMat) -> Decoration {
        Decoration {
            n: self.n,
            frames: self.frames.iter().map(|(k, f)| (k.clone(), u * f)).collect(),
            circles: self.circles.iter().map(|f| u * f).collect(),
        }
    }

    /// Largest projector distance to `other` over all edges and circles.
    pub fn distance(&self, other: &Decoration) -> f64 {
        let mut worst: f64 = 0.0;
        for (id, f) in &self.frames {
            let Some(g) = other.frames.get(id) else { return f64::INFINITY };
            worst = worst.max((projector(f) - projector(g)).norm());
        }
        for (f, g) in self.circles.iter().zip(&other.circles) {
            worst = worst.max((projector(f) - projector(g)).norm());
        }
        worst
    }

    pub fn to_json(&self) -> String {
        let enc = |f: &CMat| -> Vec<Vec<[f64; 2]>> {
            (0..f.ncols()).map(|j| (0..f.nrows()).map(|i| [f[(i, j)].re, f[(i, j)].im]).collect()).collect()
        };
        let file = DecorationFile {
            n: self.n,
            edges: self.frames.iter().map(|(k, f)| (k.clone(), enc(f))).collect(),
            circles: self.circles.iter().map(enc).collect(),
        };
        serde_json::to_string_pretty(&file).expect("decoration serialization")
    }

    pub fn from_json(text: &str) -> Result<Decoration, ModuliError> {
        let file: DecorationFile = serde_json::from_str(text).map_err(|e| ModuliError::Format(e.to_string()))?;
        let dec = |vs: &Vec<Vec<[f64; 2]>>| -> Result<CMat, ModuliError> {
            if vs.iter().any(|v| v.len() != file.n) {
                return Err(ModuliError::Format("vector length differs from N".into()));
            }
            Ok(CMat::from_fn(file.n, vs.len(), |i, j| C64::new(vs[j][i][0], vs[j][i][1])))
        };
        Ok(Decoration {
            n: file.n,
            frames: file.edges.iter().map(|(k, v)| Ok((k.clone(), dec(v)?))).collect::<Result<_, ModuliError>>()?,
            circles: file.circles.iter().map(dec).collect::<Result<_, _>>()?,
        })
    }
}

/// Serialized form: each subspace as a list of basis vectors of `[re, im]`.
#[derive(Serialize, Deserialize)]
struct DecorationFile {
    #[serde(rename = "N")]
    n: usize,
    edges: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    circles: Vec<Vec<Vec<[f64; 2]>>>,
}

/// (big, small, small) edge indices per vertex.
pub(crate) fn vertex_triples(g: &ColoredGraph) -> Vec<[usize; 3]> {
    g.incidence()
        .iter()
        .zip(&g.vertices)
        .map(|(inc, v)| match v.kind {
            VertexKind::Merge => [inc.outs[0], inc.ins[0], inc.ins[1]],
            VertexKind::Split => [inc.ins[0], inc.outs[0], inc.outs[1]],
        })
        .collect()
}

pub(crate) fn check_shapes(d: &Decoration, g: &ColoredGraph) -> Result<(), ModuliError> {
    let check = |id: &str, f: &CMat, k: usize| {
        if f.nrows() != d.n || f.ncols() != k {
            Err(ModuliError::DimensionMismatch { edge: id.to_string(), rows: f.nrows(), cols: f.ncols(), n: d.n, k })
        } else {
            Ok(())
        }
    };
    for e in &g.edges {
        check(&e.id, d.frame(&e.id)?, e.color as usize)?;
    }
    if d.circles.len() != g.circles.len() {
        return Err(ModuliError::Format(format!("{} circle frames for {} circles", d.circles.len(), g.circles.len())));
    }
    for (i, (f, &k)) in d.circles.iter().zip(&g.circles).enumerate() {
        check(&format!("circle#{i}"), f, k as usize)?;
    }
    Ok(())
}

pub fn is_admissible(d: &Decoration, g: &ColoredGraph, tol: f64) -> Result<AdmissibilityReport, ModuliError> {
    check_shapes(d, g)?;
    let mut frame_res: f64 = 0.0;
    for f in d.frames.values().chain(&d.circles) {
        frame_res = frame_res.max(frame_residual(f));
    }
    let mut vertices = Vec::new();
    let mut worst = frame_res;
    for (v, t) in g.vertices.iter().zip(vertex_triples(g)) {
        let [z, x, y] = t.map(|e| d.frames[&g.edges[e].id].clone());
        let orthogonality = (x.adjoint() * &y).iter().map(|c| c.norm()).fold(0.0, f64::max);
        let span = (projector(&x) + projector(&y) - projector(&z)).norm();
        worst = worst.max(orthogonality).max(span);
        vertices.push(VertexResidual { vertex: v.id.clone(), orthogonality, span });
    }
    Ok(AdmissibilityReport { admissible: worst <= tol, max_residual: worst, frame_residual: frame_res, vertices })
}

pub fn coordinate_frame(n: usize, mask: u64) -> CMat {
    let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
    CMat::from_fn(n, idx.len(), |i, j| if idx[j] == i { c(1.0) } else { c(0.0) })
}

/// Coordinate-subspace decoration of a subset coloring.
pub fn lift_coloring(col: &SubsetColoring, n: usize) -> Decoration {
    Decoration {
        n,
        frames: col.assignment.iter().map(|(k, &m)| (k.clone(), coordinate_frame(n, m))).collect(),
        circles: col.circles.iter().map(|&m| coordinate_frame(n, m)).collect(),
    }
}

/// Key of the i-th circle in a `MeridianRep`.
pub fn circle_id(i: usize) -> String {
    format!("circle#{i}")
}

/// Meridian images, one special unitary matrix per edge and per circle.
#[derive(Clone, Debug)]
pub struct MeridianRep {
    pub n: usize,
    pub zeta: C64,
    pub matrices: BTreeMap<String, CMat>,
    /// Color of each edge, needed to read off conjugacy classes.
    pub colors: BTreeMap<String, u8>,
}

fn power(z: C64, k: u8) -> C64 {
    z.powi(k as i32)
}

/// `ζ^k diag(-1 (k times), 1, ..., 1)`.
pub fn phi(n: usize, k: u8) -> CMat {
    let z = power(zeta(n), k);
    CMat::from_fn(n, n, |i, j| if i != j { c(0.0) } else if i < k as usize { -z } else { z })
}

pub fn to_representation(d: &Decoration, g: &ColoredGraph) -> MeridianRep {
    let n = d.n;
    let z = zeta(n);
    let mut matrices = BTreeMap::new();
    let mut colors = BTreeMap::new();
    let circles = g.circles.iter().enumerate().map(|(i, &k)| (circle_id(i), k, &d.circles[i]));
    for (id, k, f) in g.edges.iter().map(|e| (e.id.clone(), e.color, &d.frames[&e.id])).chain(circles) {
        let m = (CMat::identity(n, n) - projector(f) * c(2.0)) * power(z, k);
        matrices.insert(id.clone(), m);
        colors.insert(id, k);
    }
    MeridianRep { n, zeta: z, matrices, colors }
}

/// Largest Frobenius residual of `ρ(small) ρ(small') = ρ(big)` over vertices.
pub fn verify_vertex_relations(r: &MeridianRep, g: &ColoredGraph) -> f64 {
    vertex_triples(g)
        .iter()
        .map(|t| {
            let [z, x, y] = t.map(|e| &r.matrices[&g.edges[e].id]);
            (x * y - z).norm()
        })
        .fold(0.0, f64::max)
}

impl MeridianRep {
    /// Largest of `|M^H M - I|` and `|det M - 1|` over all matrices.
    pub fn special_unitary_residual(&self) -> f64 {
        let n = self.n;
        self.matrices
            .values()
            .map(|m| (m.adjoint() * m - CMat::identity(n, n)).norm().max((m.determinant() - c(1.0)).norm()))
            .fold(0.0, f64::max)
    }

    /// `ζ^{-k} M`, which is Hermitian with eigenvalues ±1 for a k-colored edge.
    fn reflection(&self, id: &str) -> CMat {
        let k = self.colors[id];
        &self.matrices[id] * power(self.zeta, k).inv()
    }

    /// Distance of each matrix's spectrum from that of its class
    /// representative `phi(n, k)`.
    pub fn conjugacy_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (id, &k) in &self.colors {
            let h = self.reflection(id);
            let herm = (&h - h.adjoint()).norm();
            let mut ev: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
            ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let target = (0..self.n).map(|i| if i < k as usize { -1.0 } else { 1.0 });
            let spec = ev.iter().zip(target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            worst = worst.max(herm).max(spec);
        }
        worst
    }

    /// Recovers each edge's subspace as the eigenspace of `ζ^{-k} M` for -1.
    pub fn to_decoration(&self, g: &ColoredGraph) -> Decoration {
        let frames = g.edges.iter().map(|e| (e.id.clone(), self.eigenspace(&e.id))).collect();
        let circles = (0..g.circles.len()).map(|i| self.eigenspace(&circle_id(i))).collect();
        Decoration { n: self.n, frames, circles }
    }

    fn eigenspace(&self, id: &str) -> CMat {
        let h = self.reflection(id);
        let h = (&h + h.adjoint()) * c(0.5);
        let eig = h.symmetric_eigen();
        let mut idx: Vec<usize> = (0..self.n).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let k = self.colors[id] as usize;
        CMat::from_fn(self.n, k, |i, j| eig.eigenvectors[(i, idx[j])])
    }
}

/// Unit eigenvector of `ζ^{-1} S` for eigenvalue -1.
fn reflection_axis(s: &CMat, z: C64) -> CMat {
    let n = s.nrows();
    let h = s * z.inv();
    let h = (&h + h.adjoint()) * c(0.5);
    let eig = h.symmetric_eigen();
    let i = (0..n).min_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap()).unwrap();
    eig.eigenvectors.columns(i, 1).into_owned()
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceLemmaStats {
    pub n: usize,
    pub trials: usize,
    pub orthogonal_trials: usize,
    pub failures: usize,
    /// Largest `|tr(ST) - ζ²(N-4)|` among orthogonal pairs.
    pub max_orthogonal_residual: f64,
    /// Smallest `|tr(ST) - ζ²(N-4)|` among non-orthogonal pairs.
    pub min_generic_gap: f64,
}

pub fn random_unit(n: usize, rng: &mut impl rand::Rng) -> CMat {
    chart::haar_frame(n, 1, rng)
}

/// Checks `tr(ST) = ζ²(N-4)` if and only if the (-ζ)-eigenvectors of S and
/// T are orthogonal, for random S, T conjugate to `phi(n, 1)`. Half of the
/// trials use orthogonal eigenvectors.
pub fn check_trace_lemma(n: usize, trials: usize, seed: u64) -> TraceLemmaStats {
    const TOL: f64 = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = zeta(n);
    let target = z * z * c(n as f64 - 4.0);
    let id = CMat::identity(n, n);
    let mut stats = TraceLemmaStats {
        n,
        trials,
        orthogonal_trials: 0,
        failures: 0,
        max_orthogonal_residual: 0.0,
        min_generic_gap: f64::INFINITY,
    };
    for t in 0..trials {
        let u = random_unit(n, &mut rng);
        let mut v = random_unit(n, &mut rng);
        if t % 2 == 0 {
            v = &v - &u * (u.adjoint() * &v)[(0, 0)];
            v /= c(v.norm());
        }
        let s = (&id - projector(&u) * c(2.0)) * z;
        let tm = (&id - projector(&v) * c(2.0)) * z;
        let (ua, va) = (reflection_axis(&s, z), reflection_axis(&tm, z));
        let overlap = (ua.adjoint() * &va)[(0, 0)].norm();
        let gap = ((&s * &tm).trace() - target).norm();
        let orthogonal = overlap <= TOL;
        if orthogonal {
            stats.orthogonal_trials += 1;
            stats.max_orthogonal_residual = stats.max_orthogonal_residual.max(gap);
        } else {
            stats.min_generic_gap = stats.min_generic_gap.min(gap);
        }
        if orthogonal != (gap <= TOL) {
            stats.failures += 1;
        }
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::states::enumerate_colorings;

    fn theta_decoration(a: CMat, b: CMat, z: CMat) -> Decoration {
        Decoration {
            n: a.nrows(),
            frames: BTreeMap::from([("x".to_string(), a), ("y".to_string(), b), ("z".to_string(), z)]),
            circles: vec![],
        }
    }

    #[test]
    fn circle_is_always_admissible() {
        let d = Decoration { n: 3, frames: BTreeMap::new(), circles: vec![coordinate_frame(3, 0b010)] };
        assert!(is_admissible(&d, &ColoredGraph::circle(1), 1e-12).unwrap().admissible);
    }

    #[test]
    fn theta_coordinate_and_skew() {
        let (e1, e2, e12) = (coordinate_frame(3, 1), coordinate_frame(3, 2), coordinate_frame(3, 3));
        let good = theta_decoration(e1.clone(), e2, e12.clone());
        let rep = is_admissible(&good, &fixtures::theta(), 1e-12).unwrap();
        assert!(rep.admissible && rep.max_residual == 0.0);

        let s = 0.5f64.sqrt();
        let skew = CMat::from_column_slice(3, 1, &[c(s), c(s), c(0.0)]);
        let bad = theta_decoration(e1, skew, e12);
        let rep = is_admissible(&bad, &fixtures::theta(), 1e-9).unwrap();
        assert!(!rep.admissible);
        assert!((rep.vertices[0].orthogonality - s).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let e1 = coordinate_frame(3, 1);
        let d = theta_decoration(e1.clone(), e1.clone(), e1);
        assert!(matches!(is_admissible(&d, &fixtures::theta(), 1e-9), Err(ModuliError::DimensionMismatch { .. })));
    }

    #[test]
    fn lifted_colorings_are_exact() {
        let g = fixtures::braid_web();
        let cols = enumerate_colorings(&g, 3, 100);
        assert_eq!(cols.len(), 24);
        for col in cols {
            let rep = is_admissible(&lift_coloring(&col, 3), &g, 0.0).unwrap();
            assert!(rep.admissible, "{}", rep.max_residual);
        }
    }

    #[test]
    fn class_representatives() {
        for n in 2..7 {
            let d = theta_decoration(coordinate_frame(n, 1), coordinate_frame(n, 2), coordinate_frame(n, 3));
            let r = to_representation(&d, &fixtures::theta());
            assert!((&r.matrices["x"] - phi(n, 1)).norm() < 1e-14);
            let p2 = phi(n, 2);
            assert!((&r.matrices["z"] - &p2).norm() < 1e-14);
            let z = zeta(n);
            assert!((p2.trace() - z * z * c(n as f64 - 4.0)).norm() < 1e-12);
            assert!(verify_vertex_relations(&r, &fixtures::theta()) < 1e-14);
            assert!(r.special_unitary_residual() < 1e-12);
        }
    }

    #[test]
    fn skew_decoration_breaks_relation() {
        let s = 0.5f64.sqrt();
        let skew = CMat::from_column_slice(3, 1, &[c(s), c(s), c(0.0)]);
        let d = theta_decoration(coordinate_frame(3, 1), skew, coordinate_frame(3, 3));
        let r = to_representation(&d, &fixtures::theta());
        assert!(verify_vertex_relations(&r, &fixtures::theta()) > 0.1);
    }

    #[test]
    fn trace_lemma_examples() {
        let stats = check_trace_lemma(4, 200, 1);
        assert_eq!(stats.failures, 0);
        assert_eq!(stats.orthogonal_trials, 100);
        assert!(stats.max_orthogonal_residual < 1e-10);

        // |<u, v>| = 1/2 at N = 3
        let n = 3;
        let z = zeta(n);
        let id = CMat::identity(n, n);
        let u = coordinate_frame(n, 1);
        let v = CMat::from_column_slice(3, 1, &[c(0.5), c(0.75f64.sqrt()), c(0.0)]);
        let s = (&id - projector(&u) * c(2.0)) * z;
        let t = (&id - projector(&v) * c(2.0)) * z;
        let target = z * z * c(n as f64 - 4.0);
        assert!(((&s * &t).trace() - target).norm() > 0.5);
        // S = T
        assert!(((&s * &s).trace() - target).norm() > 0.5);
    }

    #[test]
    fn dictionary_roundtrip() {
        for g in [ColoredGraph::circle(1), fixtures::theta(), fixtures::braid_web()] {
            for n in 3..6 {
                let d = random_decoration(&g, n, 20, n as u64).unwrap();
                let r = to_representation(&d, &g);
                assert!(r.conjugacy_residual() < 1e-9);
                assert!(r.special_unitary_residual() < 1e-9);
                assert!(verify_vertex_relations(&r, &g) < 1e-9);
                assert!(r.to_decoration(&g).distance(&d) < 1e-9);
            }
        }
    }

    #[test]
    fn json_roundtrip() {
        let d = theta_decoration(coordinate_frame(3, 1), coordinate_frame(3, 2), coordinate_frame(3, 3));
        let back = Decoration::from_json(&d.to_json()).unwrap();
        assert_eq!(back.distance(&d), 0.0);
    }
}
