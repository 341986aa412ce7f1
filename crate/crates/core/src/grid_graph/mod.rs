//! Stochastic p+q grid graphs and their (scaled) normalized Laplacians.
//!
//! Each pixel of an H x W image is a vertex at integer coordinates. A vertex
//! links to its `p` nearest neighbors within the distance threshold `T` plus
//! `q` further neighbors sampled uniformly from the rest of the threshold
//! ball; edge weights follow the Gaussian kernel exp(-d^2 / sigma^2) where
//! sigma is the mean over vertices of the distance to their farthest vertex.

mod coarsen;
mod io;

pub use coarsen::{coarsen, CoarseningHierarchy, HierarchyLevel};
pub use io::{read_graph, write_graph, GraphFile, GRAPH_FORMAT_VERSION};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Parameters of the stochastic p+q construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphParams {
    /// Fixed nearest neighbors per vertex.
    pub p: u32,
    /// Stochastically sampled extra neighbors per vertex.
    pub q: u32,
    /// Euclidean distance threshold for potential neighbors, in pixels.
    pub threshold: f64,
    /// Seed for the stochastic part of the selection.
    pub seed: u64,
}

impl GraphParams {
    pub fn validate(&self) -> Result<()> {
        if self.p + self.q < 1 {
            return Err(Error::InvalidInput("p + q must be at least 1".into()));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::InvalidInput(format!(
                "distance threshold must be positive, got {}",
                self.threshold
            )));
        }
        Ok(())
    }
}

/// A weighted undirected graph over pixel coordinates.
#[derive(Debug, Clone)]
pub struct GridGraph {
    pub n_vertices: usize,
    /// 2D coordinate (x, y) of each vertex.
    pub coords: Vec<[f64; 2]>,
    /// Symmetric nonnegative adjacency with zero diagonal.
    pub adjacency: CsrMatrix,
    /// Gaussian kernel bandwidth used for the edge weights.
    pub sigma: f64,
    /// Edges added to re-connect components, as (src, dst) with src < dst.
    /// These may exceed the distance threshold; everything else honours it.
    pub forced_edges: Vec<(u32, u32)>,
}

impl GridGraph {
    /// Undirected edges as (src, dst, weight) with src < dst, sorted.
    pub fn edges(&self) -> Vec<(u32, u32, f64)> {
        self.adjacency
            .iter_entries()
            .filter(|&(i, j, _)| i < j)
            .map(|(i, j, w)| (i as u32, j as u32, w))
            .collect()
    }

    pub fn total_edge_weight(&self) -> f64 {
        self.edges().iter().map(|&(_, _, w)| w).sum()
    }
}

/// Row-major pixel coordinates of an H x W grid: vertex r*W + c sits at (c, r).
pub fn grid_coords(height: usize, width: usize) -> Vec<[f64; 2]> {
    let mut coords = Vec::with_capacity(height * width);
    for r in 0..height {
        for c in 0..width {
            coords.push([c as f64, r as f64]);
        }
    }
    coords
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Kernel bandwidth: mean over vertices of the distance to their farthest
/// vertex.
pub fn compute_sigma(coords: &[[f64; 2]]) -> Result<f64> {
    if coords.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "sigma needs at least 2 coordinates, got {}",
            coords.len()
        )));
    }
    let mut total = 0.0;
    for (i, &zi) in coords.iter().enumerate() {
        let mut farthest: f64 = 0.0;
        for (j, &zj) in coords.iter().enumerate() {
            if i != j {
                farthest = farthest.max(dist(zi, zj));
            }
        }
        total += farthest;
    }
    let sigma = total / coords.len() as f64;
    if sigma <= 0.0 {
        return Err(Error::InvalidInput("all coordinates coincide".into()));
    }
    Ok(sigma)
}

fn gaussian_weight(d: f64, sigma: f64) -> f64 {
    (-(d * d) / (sigma * sigma)).exp()
}

/// Potential neighbors of vertex (r, c): every other grid vertex within the
/// threshold, as (distance, vertex index) sorted by (distance, index).
fn potential_neighbors(
    height: usize,
    width: usize,
    r: usize,
    c: usize,
    threshold: f64,
) -> Vec<(f64, usize)> {
    let radius = threshold.floor() as isize;
    let mut out = Vec::new();
    for dr in -radius..=radius {
        for dc in -radius..=radius {
            if dr == 0 && dc == 0 {
                continue;
            }
            let (nr, nc) = (r as isize + dr, c as isize + dc);
            if nr < 0 || nc < 0 || nr >= height as isize || nc >= width as isize {
                continue;
            }
            let d = ((dr * dr + dc * dc) as f64).sqrt();
            if d <= threshold {
                out.push((d, nr as usize * width + nc as usize));
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    out
}

/// Build the stochastic p+q graph of an H x W pixel grid.
///
/// Per vertex, the directed selection is its min(p, |N|) nearest potential
/// neighbors (ties by index) plus min(q, rest) sampled uniformly without
/// replacement from the remainder; the adjacency is the symmetric closure.
/// Identical params and seed give an identical graph. If the closure is
/// disconnected, the shortest inter-component edges are added until it is
/// connected; those edges are recorded in `forced_edges`.
pub fn build_stochastic_graph(
    height: usize,
    width: usize,
    params: &GraphParams,
) -> Result<GridGraph> {
    let n = height * width;
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "grid must have at least 2 vertices, got {height}x{width}"
        )));
    }
    params.validate()?;
    let coords = grid_coords(height, width);
    let sigma = compute_sigma(&coords)?;

    // One undirected entry per edge, keyed (min, max). The weight depends
    // only on the distance, so the symmetric closure never conflicts.
    let mut edge_weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for r in 0..height {
        for c in 0..width {
            let i = r * width + c;
            let nbrs = potential_neighbors(height, width, r, c, params.threshold);
            if nbrs.is_empty() {
                return Err(Error::DisconnectedGraph(format!(
                    "threshold {} leaves vertex {i} with no potential neighbors",
                    params.threshold
                )));
            }
            let n_fixed = (params.p as usize).min(nbrs.len());
            let pool = &nbrs[n_fixed..];
            let n_random = (params.q as usize).min(pool.len());

            let mut chosen: Vec<(f64, usize)> = nbrs[..n_fixed].to_vec();
            if n_random > 0 {
                // Per-vertex stream keeps the draw independent of scan order.
                let mut rng = ChaCha12Rng::seed_from_u64(params.seed);
                rng.set_stream(i as u64);
                let picks = rand::seq::index::sample(&mut rng, pool.len(), n_random);
                for k in picks.iter() {
                    chosen.push(pool[k]);
                }
            }
            for (d, j) in chosen {
                let key = (i.min(j), i.max(j));
                edge_weights.entry(key).or_insert_with(|| gaussian_weight(d, sigma));
            }
        }
    }

    // Connectivity repair: join the two closest components until one remains.
    let mut forced_edges = Vec::new();
    loop {
        let comp = components(n, edge_weights.keys());
        let n_comp = *comp.iter().max().unwrap() + 1;
        if n_comp == 1 {
            break;
        }
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                if comp[i] != comp[j] {
                    let d = dist(coords[i], coords[j]);
                    if best.map(|(bd, _, _)| d < bd).unwrap_or(true) {
                        best = Some((d, i, j));
                    }
                }
            }
        }
        let (d, i, j) = best.expect("more than one component implies a crossing pair");
        edge_weights.insert((i, j), gaussian_weight(d, sigma));
        forced_edges.push((i as u32, j as u32));
    }

    let mut triplets = Vec::with_capacity(edge_weights.len() * 2);
    for (&(i, j), &w) in &edge_weights {
        triplets.push((i, j, w));
        triplets.push((j, i, w));
    }
    let adjacency = CsrMatrix::from_triplets(n, &triplets)?;
    Ok(GridGraph { n_vertices: n, coords, adjacency, sigma, forced_edges })
}

/// Connected-component labels from an undirected edge list.
fn components<'a>(n: usize, edges: impl Iterator<Item = &'a (usize, usize)>) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(i, j) in edges {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri.max(rj)] = ri.min(rj);
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    for v in 0..n {
        let root = find(&mut parent, v);
        if label[root] == usize::MAX {
            label[root] = next;
            next += 1;
        }
        label[v] = label[root];
    }
    label
}

/// Symmetric normalized Laplacian L = I - D^{-1/2} A D^{-1/2}.
pub fn normalized_laplacian(graph: &GridGraph) -> Result<CsrMatrix> {
    let degrees = graph.adjacency.row_sums();
    for (i, &d) in degrees.iter().enumerate() {
        if d <= 0.0 {
            return Err(Error::DegenerateGraph(format!(
                "vertex {i} has zero degree; normalized Laplacian undefined"
            )));
        }
    }
    let n = graph.n_vertices;
    let mut triplets = Vec::with_capacity(graph.adjacency.nnz() + n);
    for i in 0..n {
        triplets.push((i, i, 1.0));
    }
    for (i, j, w) in graph.adjacency.iter_entries() {
        triplets.push((i, j, -w / (degrees[i] * degrees[j]).sqrt()));
    }
    CsrMatrix::from_triplets(n, &triplets)
}

/// Largest-eigenvalue estimate with a convergence flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaMaxEstimate {
    pub value: f64,
    /// False when power iteration exhausted `max_iter`; `value` is then the
    /// analytic normalized-Laplacian bound 2.0.
    pub converged: bool,
}

/// Power-iteration estimate of the largest eigenvalue of a symmetric PSD
/// matrix. Never fails: on non-convergence it returns the bound 2.0 with
/// `converged = false`.
pub fn estimate_lambda_max(matrix: &CsrMatrix, tol: f64, max_iter: usize) -> LambdaMaxEstimate {
    let n = matrix.n();
    if n == 0 {
        return LambdaMaxEstimate { value: 0.0, converged: true };
    }
    if n == 1 {
        let value = matrix.row(0).map(|(_, v)| v).sum();
        return LambdaMaxEstimate { value, converged: true };
    }
    // Fixed pseudo-random start vector: a deterministic vector with, in
    // practice, nonzero overlap with the dominant eigenspace (the all-ones
    // vector is exactly orthogonal to it on bipartite regular graphs).
    let mut rng = ChaCha12Rng::seed_from_u64(0x5347_434E);
    let mut v: Vec<f64> = (0..n).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
    normalize(&mut v);

    let mut prev_rq = f64::NAN;
    for _ in 0..max_iter {
        let w = matrix.mul_vec(&v);
        let rq: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-300 {
            // v lies in the kernel; for a PSD matrix reached from a generic
            // start this means the matrix is (numerically) zero.
            return LambdaMaxEstimate { value: rq.max(0.0), converged: true };
        }
        v = w;
        normalize(&mut v);
        if prev_rq.is_finite() && (rq - prev_rq).abs() <= tol * rq.abs().max(1e-12) {
            return LambdaMaxEstimate { value: rq, converged: true };
        }
        prev_rq = rq;
    }
    LambdaMaxEstimate { value: 2.0, converged: false }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Laplacian rescaled so its spectrum fits Chebyshev's [-1, 1] domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledLaplacian {
    /// (2 / lambda_max) L - I.
    pub matrix: CsrMatrix,
    /// Largest eigenvalue of L used for the scaling.
    pub lambda_max: f64,
}

pub fn scale_laplacian(laplacian: &CsrMatrix, lambda_max: f64) -> Result<ScaledLaplacian> {
    if !(lambda_max > 0.0) {
        return Err(Error::InvalidInput(format!(
            "lambda_max must be positive, got {lambda_max}"
        )));
    }
    Ok(ScaledLaplacian {
        matrix: laplacian.scale_add_identity(2.0 / lambda_max, -1.0),
        lambda_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_of_unit_square_is_sqrt2() {
        // Every corner's farthest vertex is the opposite corner.
        let coords = grid_coords(2, 2);
        let sigma = compute_sigma(&coords).unwrap();
        assert!((sigma - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sigma_of_two_points() {
        let sigma = compute_sigma(&[[0.0, 0.0], [0.0, 3.0]]).unwrap();
        assert_eq!(sigma, 3.0);
    }

    #[test]
    fn sigma_requires_two_points() {
        assert!(matches!(compute_sigma(&[[0.0, 0.0]]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn sigma_3x3_matches_exhaustive_oracle() {
        // Independent oracle: brute-force max distance per vertex.
        let coords = grid_coords(3, 3);
        let mut expected = 0.0;
        for i in 0..9 {
            let mut far: f64 = 0.0;
            for j in 0..9 {
                if i != j {
                    far = far.max(dist(coords[i], coords[j]));
                }
            }
            expected += far / 9.0;
        }
        // Corners see 2*sqrt(2), edge midpoints sqrt(5), the center sqrt(2).
        let closed_form = (4.0 * 2.0 * 2f64.sqrt() + 4.0 * 5f64.sqrt() + 2f64.sqrt()) / 9.0;
        assert!((expected - closed_form).abs() < 1e-15);
        assert!((compute_sigma(&coords).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn center_of_5x5_has_24_potential_neighbors_at_2sqrt2() {
        let t = 2.0 * 2f64.sqrt();
        let nbrs = potential_neighbors(5, 5, 2, 2, t);
        assert_eq!(nbrs.len(), 24);
        // 8 nearest = the ring at distance 1 and sqrt(2).
        assert!(nbrs[..8].iter().all(|&(d, _)| d <= 2f64.sqrt() + 1e-12));
    }

    #[test]
    fn one_by_two_grid_single_edge_weight() {
        let params = GraphParams { p: 1, q: 0, threshold: 1.0, seed: 7 };
        let g = build_stochastic_graph(1, 2, &params).unwrap();
        let edges = g.edges();
        assert_eq!(g.sigma, 1.0);
        assert_eq!(edges.len(), 1);
        assert_eq!(edges[0].0, 0);
        assert_eq!(edges[0].1, 1);
        assert!((edges[0].2 - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn q0_t1_p4_is_four_nn_grid() {
        let params = GraphParams { p: 4, q: 0, threshold: 1.0, seed: 0 };
        let g = build_stochastic_graph(3, 3, &params).unwrap();
        // 3x3 lattice: 12 undirected axis edges, all of length 1.
        let edges = g.edges();
        assert_eq!(edges.len(), 12);
        let w = gaussian_weight(1.0, g.sigma);
        for (i, j, weight) in edges {
            let d = dist(g.coords[i as usize], g.coords[j as usize]);
            assert!((d - 1.0).abs() < 1e-12);
            assert!((weight - w).abs() < 1e-15);
        }
    }

    #[test]
    fn selection_counts_at_center_of_5x5() {
        let params = GraphParams { p: 8, q: 2, threshold: 2.0 * 2f64.sqrt(), seed: 11 };
        let nbrs = potential_neighbors(5, 5, 2, 2, params.threshold);
        assert_eq!(nbrs.len(), 24);
        assert_eq!((params.p as usize).min(nbrs.len()), 8);
        assert_eq!((params.q as usize).min(nbrs.len() - 8), 2);
    }

    #[test]
    fn tiny_grid_rejected() {
        let params = GraphParams { p: 1, q: 0, threshold: 1.0, seed: 0 };
        assert!(matches!(
            build_stochastic_graph(1, 1, &params),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn zero_p_plus_q_rejected() {
        let params = GraphParams { p: 0, q: 0, threshold: 1.0, seed: 0 };
        assert!(build_stochastic_graph(2, 2, &params).is_err());
    }

    #[test]
    fn threshold_below_one_errors_disconnected() {
        let params = GraphParams { p: 1, q: 0, threshold: 0.5, seed: 0 };
        assert!(matches!(
            build_stochastic_graph(2, 2, &params),
            Err(Error::DisconnectedGraph(_))
        ));
    }

    #[test]
    fn laplacian_of_single_edge() {
        let params = GraphParams { p: 1, q: 0, threshold: 1.0, seed: 0 };
        let g = build_stochastic_graph(1, 2, &params).unwrap();
        let l = normalized_laplacian(&g).unwrap().to_dense();
        assert!((l[[0, 0]] - 1.0).abs() < 1e-15);
        assert!((l[[0, 1]] + 1.0).abs() < 1e-15);
        assert!((l[[1, 0]] + 1.0).abs() < 1e-15);
        assert!((l[[1, 1]] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lambda_max_of_single_edge_is_two() {
        let l = CsrMatrix::from_triplets(
            2,
            &[(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 1.0)],
        )
        .unwrap();
        let est = estimate_lambda_max(&l, 1e-10, 1000);
        assert!(est.converged);
        assert!((est.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn lambda_max_of_identity_is_one() {
        let est = estimate_lambda_max(&CsrMatrix::identity(5), 1e-10, 1000);
        assert!(est.converged);
        assert!((est.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lambda_max_non_convergence_falls_back_to_bound() {
        let l = CsrMatrix::from_triplets(
            2,
            &[(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 1.0)],
        )
        .unwrap();
        let est = estimate_lambda_max(&l, 0.0, 1);
        assert!(!est.converged);
        assert_eq!(est.value, 2.0);
    }

    #[test]
    fn scale_laplacian_single_edge() {
        let l = CsrMatrix::from_triplets(
            2,
            &[(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 1.0)],
        )
        .unwrap();
        let scaled = scale_laplacian(&l, 2.0).unwrap();
        let d = scaled.matrix.to_dense();
        assert_eq!(d[[0, 0]], 0.0);
        assert_eq!(d[[0, 1]], -1.0);
        assert_eq!(d[[1, 1]], 0.0);
    }

    #[test]
    fn scale_identity_by_one_is_identity() {
        let scaled = scale_laplacian(&CsrMatrix::identity(3), 1.0).unwrap();
        assert_eq!(scaled.matrix.to_dense(), CsrMatrix::identity(3).to_dense());
    }

    #[test]
    fn scale_rejects_nonpositive_lambda() {
        assert!(scale_laplacian(&CsrMatrix::identity(2), 0.0).is_err());
    }
}
