//! Sampling, projection and tangent-space probes on the decoration variety.
//!
//! Near a frame F (N x k, orthonormal) the Grassmannian is charted by
//! `X -> orth(F + F_perp X)` with X in C^{(N-k) x k}. Vertex constraints are
//! the Hermitian residuals `P_a + P_b - P_c`, which vanish exactly on
//! admissible decorations.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{check_shapes, is_admissible, lift_coloring, projector, vertex_triples, CMat, Decoration, ModuliError, C64};
use crate::graph::ColoredGraph;
use crate::states::enumerate_colorings;

const ADMISSIBLE_TOL: f64 = 1e-10;
const RANK_THRESHOLD: f64 = 1e-6;
// subspaces closer than this are treated as meeting during propagation
const PROPAGATION_TOL: f64 = 1e-7;

pub(crate) fn haar_frame(n: usize, k: usize, rng: &mut impl Rng) -> CMat {
    let g = CMat::from_fn(n, k, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    orth(g)
}

fn orth(m: CMat) -> CMat {
    let k = m.ncols();
    if k == 0 {
        return m;
    }
    m.qr().q().columns(0, k).into_owned()
}

/// Orthonormal basis of the column span, dropping numerically dependent directions.
fn span_basis(m: &CMat, n: usize) -> CMat {
    if m.ncols() == 0 {
        return CMat::zeros(n, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.unwrap();
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > PROPAGATION_TOL).collect();
    CMat::from_fn(n, keep.len(), |i, j| u[(i, keep[j])])
}

/// Orthonormal basis of the orthogonal complement of an orthonormal frame.
fn complement(f: &CMat) -> CMat {
    let n = f.nrows();
    let h = CMat::identity(n, n) - projector(f);
    let eig = h.symmetric_eigen();
    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    CMat::from_fn(n, keep.len(), |i, j| eig.eigenvectors[(i, keep[j])])
}

fn hstack(n: usize, parts: &[&CMat]) -> CMat {
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = CMat::zeros(n, cols);
    let mut at = 0;
    for p in parts {
        out.columns_mut(at, p.ncols()).copy_from(p);
        at += p.ncols();
    }
    out
}

/// One pass of edge-by-edge propagation. Each edge is chosen as the span of
/// everything it must contain plus a random complement inside everything it
/// must avoid; `None` on contradiction.
fn propagate(g: &ColoredGraph, n: usize, rng: &mut impl Rng) -> Option<Vec<CMat>> {
    let triples = vertex_triples(g);
    let m = g.edges.len();
    let mut at_edge: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (v, t) in triples.iter().enumerate() {
        for &e in t {
            if !at_edge[e].contains(&v) {
                at_edge[e].push(v);
            }
        }
    }
    let mut chosen: Vec<Option<CMat>> = vec![None; m];
    for _ in 0..m {
        // most constrained unchosen edge, ties broken at random
        let mut best: Vec<usize> = Vec::new();
        let mut best_score = -1i64;
        for e in (0..m).filter(|&e| chosen[e].is_none()) {
            let score: i64 = at_edge[e]
                .iter()
                .flat_map(|&v| triples[v].iter())
                .filter(|&&o| o != e && chosen[o].is_some())
                .count() as i64;
            if score > best_score {
                best_score = score;
                best.clear();
            }
            if score == best_score {
                best.push(e);
            }
        }
        let e = *best.choose(rng)?;
        let k = g.edges[e].color as usize;
        let mut lower: Vec<&CMat> = Vec::new();
        let mut avoid: Vec<CMat> = Vec::new();
        for &v in &at_edge[e] {
            let [big, s1, s2] = triples[v];
            if e == big {
                lower.extend([s1, s2].iter().filter_map(|&s| chosen[s].as_ref()));
            } else {
                let other = if s1 == e { s2 } else { s1 };
                if let Some(f) = &chosen[other] {
                    avoid.push(f.clone());
                }
                if let Some(f) = &chosen[big] {
                    avoid.push(complement(f));
                }
            }
        }
        let w = span_basis(&hstack(n, &lower), n);
        if w.ncols() > k {
            return None;
        }
        let avoid = hstack(n, &avoid.iter().collect::<Vec<_>>());
        if avoid.ncols() > 0 && (avoid.adjoint() * &w).iter().any(|c| c.norm() > PROPAGATION_TOL) {
            return None;
        }
        let blocked = span_basis(&hstack(n, &[&w, &avoid]), n);
        let free = complement(&blocked);
        let need = k - w.ncols();
        if free.ncols() < need {
            return None;
        }
        let extra = &free * haar_frame(free.ncols(), need, rng);
        chosen[e] = Some(hstack(n, &[&w, &extra]));
    }
    chosen.into_iter().collect()
}

fn edge_frames(d: &Decoration, g: &ColoredGraph) -> Vec<CMat> {
    g.edges.iter().map(|e| d.frames[&e.id].clone()).collect()
}

fn assemble(g: &ColoredGraph, n: usize, frames: Vec<CMat>, circles: Vec<CMat>) -> Decoration {
    Decoration { n, frames: g.edges.iter().map(|e| e.id.clone()).zip(frames).collect(), circles }
}

/// Real residual vector: real and imaginary parts of every vertex's `P_a + P_b - P_c`.
fn residual(frames: &[CMat], triples: &[[usize; 3]], n: usize) -> DVector<f64> {
    let mut r = DVector::zeros(triples.len() * 2 * n * n);
    for (v, &[z, x, y]) in triples.iter().enumerate() {
        let m = projector(&frames[x]) + projector(&frames[y]) - projector(&frames[z]);
        for (i, c) in m.iter().enumerate() {
            r[v * 2 * n * n + 2 * i] = c.re;
            r[v * 2 * n * n + 2 * i + 1] = c.im;
        }
    }
    r
}

/// Jacobian of `residual` in the chart coordinates of every edge.
fn jacobian(frames: &[CMat], comps: &[CMat], triples: &[[usize; 3]], n: usize) -> DMatrix<f64> {
    let cols: usize = frames.iter().map(|f| 2 * f.ncols() * (n - f.ncols())).sum();
    let mut jac = DMatrix::zeros(triples.len() * 2 * n * n, cols);
    let mut col = 0;
    for (e, (f, cp)) in frames.iter().zip(comps).enumerate() {
        for i in 0..cp.ncols() {
            for j in 0..f.ncols() {
                for s in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                    let a = cp.column(i) * s;
                    let dp = &a * f.column(j).adjoint() + f.column(j) * a.adjoint();
                    for (v, t) in triples.iter().enumerate() {
                        // an edge can fill several slots of one vertex
                        let w = t[1..].iter().filter(|&&x| x == e).count() as f64 - (t[0] == e) as u8 as f64;
                        if w == 0.0 {
                            continue;
                        }
                        for (idx, c) in dp.iter().enumerate() {
                            jac[(v * 2 * n * n + 2 * idx, col)] += w * c.re;
                            jac[(v * 2 * n * n + 2 * idx + 1, col)] += w * c.im;
                        }
                    }
                    col += 1;
                }
            }
        }
    }
    jac
}

/// Moves every frame by chart coordinates `delta`.
fn step(frames: &[CMat], comps: &[CMat], delta: &DVector<f64>) -> Vec<CMat> {
    let mut at = 0;
    frames
        .iter()
        .zip(comps)
        .map(|(f, cp)| {
            let (k, r) = (f.ncols(), cp.ncols());
            let mut x = CMat::zeros(r, k);
            for i in 0..r {
                for j in 0..k {
                    x[(i, j)] = C64::new(delta[at], delta[at + 1]);
                    at += 2;
                }
            }
            orth(f + cp * x)
        })
        .collect()
}

/// Gauss-Newton descent onto the variety. Returns the final residual.
fn project(frames: &mut Vec<CMat>, triples: &[[usize; 3]], n: usize) -> f64 {
    let mut res = residual(frames, triples, n).amax();
    for _ in 0..60 {
        if res < 1e-14 {
            break;
        }
        let comps: Vec<CMat> = frames.iter().map(complement).collect();
        let jac = jacobian(frames, &comps, triples, n);
        let r = residual(frames, triples, n);
        let svd = jac.svd(true, true);
        let eps = 1e-10 * svd.singular_values.max();
        let Ok(delta) = svd.solve(&(-r), eps) else { break };
        let next = step(frames, &comps, &delta);
        let next_res = residual(&next, triples, n).amax();
        if next_res >= res {
            break;
        }
        *frames = next;
        res = next_res;
    }
    res
}

/// Projects a nearly admissible decoration onto the variety.
pub fn project_to_variety(d: &Decoration, g: &ColoredGraph) -> Result<Decoration, ModuliError> {
    check_shapes(d, g)?;
    let mut frames = edge_frames(d, g);
    project(&mut frames, &vertex_triples(g), d.n);
    Ok(assemble(g, d.n, frames, d.circles.clone()))
}

/// Random walk on the variety from a lifted coloring: random unitary, then
/// rounds of random tangent steps each followed by projection.
fn walk_from_coloring(g: &ColoredGraph, n: usize, rng: &mut impl Rng) -> Option<Vec<CMat>> {
    let cols = enumerate_colorings(g, n as u32, 64);
    let start = lift_coloring(cols.choose(rng)?, n);
    let u = haar_frame(n, n, rng);
    let mut frames: Vec<CMat> = edge_frames(&start, g).iter().map(|f| &u * f).collect();
    let triples = vertex_triples(g);
    for _ in 0..6 {
        let comps: Vec<CMat> = frames.iter().map(complement).collect();
        let dim: usize = comps.iter().zip(&frames).map(|(c, f)| 2 * c.ncols() * f.ncols()).sum();
        let delta = DVector::from_fn(dim, |_, _| 0.3 * rng.sample::<f64, _>(StandardNormal));
        let mut moved = step(&frames, &comps, &delta);
        if project(&mut moved, &triples, n) < 1e-13 {
            frames = moved;
        }
    }
    Some(frames)
}

pub fn random_decoration(g: &ColoredGraph, n: usize, max_attempts: usize, seed: u64) -> Result<Decoration, ModuliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let triples = vertex_triples(g);
    let circles: Vec<CMat> = g.circles.iter().map(|&k| haar_frame(n, k as usize, &mut rng)).collect();
    if g.edges.iter().any(|e| e.color as usize > n) || g.circles.iter().any(|&k| k as usize > n) {
        return Err(ModuliError::SamplingFailed(0));
    }
    let accept = |frames: Vec<CMat>| {
        let d = assemble(g, n, frames, circles.clone());
        let ok = is_admissible(&d, g, ADMISSIBLE_TOL).map(|r| r.admissible).unwrap_or(false);
        ok.then_some(d)
    };
    for _ in 0..max_attempts {
        if let Some(mut frames) = propagate(g, n, &mut rng) {
            project(&mut frames, &triples, n);
            if let Some(d) = accept(frames) {
                return Ok(d);
            }
        }
    }
    for _ in 0..max_attempts.min(8) {
        if let Some(frames) = walk_from_coloring(g, n, &mut rng) {
            if let Some(d) = accept(frames) {
                return Ok(d);
            }
        }
    }
    Err(ModuliError::SamplingFailed(max_attempts))
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalDimension {
    /// Real dimension of the product of Grassmannians.
    pub chart_dimension: usize,
    pub rank: usize,
    pub dimension: usize,
}

/// Real dimension of the tangent space of the decoration variety at `d`.
pub fn local_dimension(d: &Decoration, g: &ColoredGraph) -> Result<LocalDimension, ModuliError> {
    let report = is_admissible(d, g, ADMISSIBLE_TOL)?;
    if !report.admissible {
        return Err(ModuliError::NotAdmissible(report.max_residual));
    }
    let n = d.n;
    let grass = |k: usize| 2 * k * (n - k);
    let chart_dimension: usize = g.edges.iter().map(|e| grass(e.color as usize)).chain(g.circles.iter().map(|&k| grass(k as usize))).sum();
    let frames = edge_frames(d, g);
    let comps: Vec<CMat> = frames.iter().map(complement).collect();
    let triples = vertex_triples(g);
    if triples.is_empty() {
        return Ok(LocalDimension { chart_dimension, rank: 0, dimension: chart_dimension });
    }
    let sv = jacobian(&frames, &comps, &triples, n).singular_values();
    let thr = RANK_THRESHOLD * sv.max();
    if let Some(&s) = sv.iter().find(|&&s| s > thr / 10.0 && s < thr * 10.0) {
        return Err(ModuliError::Inconclusive(s / sv.max()));
    }
    let rank = sv.iter().filter(|&&s| s > thr).count();
    Ok(LocalDimension { chart_dimension, rank, dimension: chart_dimension - rank })
}

/// Line of each 1-colored edge, keyed by id, for inspecting strata.
pub fn lines(d: &Decoration) -> BTreeMap<&str, &CMat> {
    d.frames.iter().filter(|(_, f)| f.ncols() == 1).map(|(k, f)| (k.as_str(), f)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::moduli_rep::{to_representation, verify_vertex_relations};

    fn overlap(a: &CMat, b: &CMat) -> f64 {
        (a.adjoint() * b)[(0, 0)].norm()
    }

    #[test]
    fn circle_dimension() {
        for n in 2..6 {
            let g = ColoredGraph::circle(1);
            let d = random_decoration(&g, n, 10, n as u64).unwrap();
            assert_eq!(local_dimension(&d, &g).unwrap().dimension, 2 * (n - 1));
            let col = &enumerate_colorings(&g, n as u32, 1)[0];
            assert_eq!(local_dimension(&lift_coloring(col, n), &g).unwrap().dimension, 2 * (n - 1));
        }
    }

    #[test]
    fn theta_sampling_and_dimension() {
        let g = fixtures::theta();
        for seed in 0..5 {
            let d = random_decoration(&g, 3, 10, seed).unwrap();
            assert!(overlap(&d.frames["x"], &d.frames["y"]) < 1e-10);
            assert_eq!(local_dimension(&d, &g).unwrap().dimension, 6);
            let d4 = random_decoration(&g, 4, 10, seed).unwrap();
            let r = to_representation(&d4, &g);
            assert!(verify_vertex_relations(&r, &g) < 1e-9);
        }
    }

    /// Line shared by every edge of a braid strand, if there is one.
    fn strand_line<'a>(ls: &BTreeMap<&str, &'a CMat>, s: usize) -> Option<&'a CMat> {
        let es: Vec<&CMat> = ls.iter().filter(|(k, _)| k.starts_with(&format!("a{s}_"))).map(|(_, f)| *f).collect();
        es.iter().all(|e| (overlap(e, es[0]) - 1.0).abs() < 1e-8).then_some(es[0])
    }

    #[test]
    fn braid_web_generic_stratum() {
        // The fiber over a flag is a wedge of three lines; one branch has
        // every strand constant, the other two are reached by other seeds.
        let g = fixtures::braid_web();
        let mut generic = 0;
        for seed in 10..20 {
            let d = random_decoration(&g, 3, 50, seed).unwrap();
            assert_eq!(local_dimension(&d, &g).unwrap().dimension, 8);
            let ls = lines(&d);
            let Some(reps) = (0..3).map(|s| strand_line(&ls, s)).collect::<Option<Vec<_>>>() else { continue };
            generic += 1;
            assert!(overlap(reps[0], reps[1]) < 1e-8);
            assert!(overlap(reps[1], reps[2]) < 1e-8);
            let o = overlap(reps[0], reps[2]);
            assert!(o > 1e-4 && o < 1.0 - 1e-4, "{o}");
        }
        assert!(generic > 0);
    }

    #[test]
    fn projection_repairs_small_noise() {
        let g = fixtures::theta();
        let d = random_decoration(&g, 4, 10, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let noisy = Decoration {
            n: 4,
            frames: d.frames.iter().map(|(k, f)| (k.clone(), orth(f + haar_frame(4, f.ncols(), &mut rng) * C64::new(1e-4, 0.0)))).collect(),
            circles: vec![],
        };
        assert!(!is_admissible(&noisy, &g, 1e-10).unwrap().admissible);
        let fixed = project_to_variety(&noisy, &g).unwrap();
        assert!(is_admissible(&fixed, &g, 1e-12).unwrap().admissible);
    }
}
