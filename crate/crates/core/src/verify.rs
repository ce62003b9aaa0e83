//! Independent brute-force oracles for every claimed property: stretch
//! factor, fault-tolerant stretch, vertex-disjoint path counts via max-flow,
//! and the Euclidean MST weight baseline.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::geometry::{point_distance, Point};
use crate::spanner::SpannerGraph;

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub stretch: f64,
    pub max_degree: usize,
    pub edge_count: usize,
    pub weight: f64,
    pub emst_weight: f64,
    pub weight_ratio: f64,
    pub vfts_ok: bool,
    pub vfts_mode: String,
    pub worst_pair: (u32, u32),
    pub worst_fault_set: Vec<u32>,
}

fn flat(points: &[Point]) -> (Vec<f64>, usize) {
    let d = points.first().map(|p| p.dim()).unwrap_or(1);
    let mut out = Vec::with_capacity(points.len() * d);
    for p in points {
        out.extend_from_slice(&p.coords);
    }
    (out, d)
}

/// Single-source shortest path lengths on the surviving vertices.
/// `alive[u] == false` vertices are skipped entirely.
fn dijkstra(
    g: &SpannerGraph,
    pts: &[f64],
    dim: usize,
    src: u32,
    alive: &[bool],
    dist: &mut [f64],
) {
    dist.fill(f64::INFINITY);
    if !alive[src as usize] {
        return;
    }
    let mut heap: BinaryHeap<Reverse<(u64, u32)>> = BinaryHeap::new();
    dist[src as usize] = 0.0;
    heap.push(Reverse((0, src)));
    while let Some(Reverse((dbits, u))) = heap.pop() {
        let du = f64::from_bits(dbits);
        if du > dist[u as usize] {
            continue;
        }
        let pu = &pts[u as usize * dim..u as usize * dim + dim];
        for &v in g.neighbors(u) {
            if !alive[v as usize] {
                continue;
            }
            let pv = &pts[v as usize * dim..v as usize * dim + dim];
            let nd = du + point_distance(pu, pv);
            if nd < dist[v as usize] {
                dist[v as usize] = nd;
                heap.push(Reverse((nd.to_bits(), v)));
            }
        }
    }
}

/// Maximum over all vertex pairs of graph distance over Euclidean distance,
/// with the lexicographically smallest maximizing pair as witness.
/// A disconnected graph reports infinity with a disconnected witness pair.
pub fn stretch_factor(g: &SpannerGraph, points: &[Point]) -> (f64, (u32, u32)) {
    let (pts, dim) = flat(points);
    stretch_factor_flat(g, &pts, dim)
}

pub fn stretch_factor_flat(g: &SpannerGraph, pts: &[f64], dim: usize) -> (f64, (u32, u32)) {
    let n = g.n;
    let alive = vec![true; n];
    stretch_under_faults(g, pts, dim, &alive, f64::INFINITY)
}

/// Stretch restricted to the `alive` vertices. Stops early (returning what
/// it has) once the running maximum exceeds `bail_above`.
fn stretch_under_faults(
    g: &SpannerGraph,
    pts: &[f64],
    dim: usize,
    alive: &[bool],
    bail_above: f64,
) -> (f64, (u32, u32)) {
    let n = g.n;
    let mut dist = vec![f64::INFINITY; n];
    let mut worst = 1.0f64;
    let mut pair = (0u32, 0u32);
    let mut first = true;
    for u in 0..n as u32 {
        if !alive[u as usize] {
            continue;
        }
        dijkstra(g, pts, dim, u, alive, &mut dist);
        let pu = &pts[u as usize * dim..u as usize * dim + dim];
        for v in u + 1..n as u32 {
            if !alive[v as usize] {
                continue;
            }
            let pv = &pts[v as usize * dim..v as usize * dim + dim];
            let ratio = dist[v as usize] / point_distance(pu, pv);
            if first || ratio > worst {
                worst = ratio;
                pair = (u, v);
                first = false;
                if worst > bail_above {
                    return (worst, pair);
                }
            }
        }
    }
    if first {
        (1.0, (0, 0))
    } else {
        (worst, pair)
    }
}

/// Verify the (k,t) fault-tolerance property.
///
/// When the number of fault sets of size at most `k` fits in `budget` the
/// check is exhaustive; otherwise `budget` uniform random size-k fault sets
/// are drawn from a fixed-seed generator. Returns the verdict, the mode
/// used, and a failing fault set if one was found.
pub fn verify_vfts(
    g: &SpannerGraph,
    points: &[Point],
    t: f64,
    k: usize,
    budget: u64,
) -> (bool, String, Option<Vec<u32>>) {
    let (pts, dim) = flat(points);
    verify_vfts_flat(g, &pts, dim, t, k, budget)
}

pub fn verify_vfts_flat(
    g: &SpannerGraph,
    pts: &[f64],
    dim: usize,
    t: f64,
    k: usize,
    budget: u64,
) -> (bool, String, Option<Vec<u32>>) {
    let n = g.n;
    let k = k.min(n.saturating_sub(2));
    let total = fault_set_count(n, k);
    let mut alive = vec![true; n];
    if total <= budget as u128 {
        let mut fault: Vec<u32> = Vec::with_capacity(k);
        let mut ok = true;
        let mut witness = None;
        exhaustive_fault_sets(n as u32, k, &mut fault, &mut |f| {
            if !ok {
                return;
            }
            if !check_fault_set(g, pts, dim, t, f, &mut alive) {
                ok = false;
                witness = Some(f.to_vec());
            }
        });
        (ok, "exhaustive".into(), witness)
    } else {
        // deterministic linear-congruential sampling of size-k subsets
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let mut fault: Vec<u32> = Vec::with_capacity(k);
        for _ in 0..budget {
            fault.clear();
            while fault.len() < k {
                let c = (next() % n as u64) as u32;
                if !fault.contains(&c) {
                    fault.push(c);
                }
            }
            fault.sort_unstable();
            if !check_fault_set(g, pts, dim, t, &fault, &mut alive) {
                return (false, "sampled".into(), Some(fault));
            }
        }
        (true, "sampled".into(), None)
    }
}

fn fault_set_count(n: usize, k: usize) -> u128 {
    let mut total: u128 = 0;
    for i in 0..=k {
        let mut c: u128 = 1;
        for j in 0..i {
            c = c.saturating_mul((n - j) as u128) / (j as u128 + 1);
        }
        total = total.saturating_add(c);
    }
    total
}

fn exhaustive_fault_sets(n: u32, k: usize, fault: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
    f(fault);
    if fault.len() == k {
        return;
    }
    let start = fault.last().map(|&x| x + 1).unwrap_or(0);
    for v in start..n {
        fault.push(v);
        exhaustive_fault_sets(n, k, fault, f);
        fault.pop();
    }
}

fn check_fault_set(
    g: &SpannerGraph,
    pts: &[f64],
    dim: usize,
    t: f64,
    fault: &[u32],
    alive: &mut [bool],
) -> bool {
    alive.fill(true);
    for &v in fault {
        alive[v as usize] = false;
    }
    let (s, _) = stretch_under_faults(g, pts, dim, alive, t);
    s <= t
}

/// Maximum number of internally vertex-disjoint `u`-`v` paths, via max-flow
/// with unit vertex capacities. Adjacent pairs trivially return `n`.
pub fn vertex_disjoint_path_count(g: &SpannerGraph, u: u32, v: u32) -> usize {
    assert!(u != v, "path count needs distinct endpoints");
    if g.has_edge(u, v) {
        return g.n;
    }
    // split every vertex w into w_in = 2w, w_out = 2w + 1 with capacity 1
    let n = g.n;
    let size = 2 * n;
    let mut head: Vec<Vec<usize>> = vec![Vec::new(); size];
    let mut to: Vec<u32> = Vec::new();
    let mut cap: Vec<u8> = Vec::new();
    let add = |head: &mut Vec<Vec<usize>>, to: &mut Vec<u32>, cap: &mut Vec<u8>, a: usize, b: usize, c: u8| {
        head[a].push(to.len());
        to.push(b as u32);
        cap.push(c);
        head[b].push(to.len());
        to.push(a as u32);
        cap.push(0);
    };
    for w in 0..n {
        let c = if w as u32 == u || w as u32 == v { u8::MAX } else { 1 };
        add(&mut head, &mut to, &mut cap, 2 * w, 2 * w + 1, c);
    }
    for (a, nbrs) in (0..n).map(|a| (a, g.neighbors(a as u32))) {
        for &b in nbrs {
            add(&mut head, &mut to, &mut cap, 2 * a + 1, 2 * b as usize, 1);
        }
    }
    let src = 2 * u as usize + 1;
    let dst = 2 * v as usize;
    // Edmonds-Karp
    let mut flow = 0usize;
    let mut prev_edge = vec![usize::MAX; size];
    loop {
        prev_edge.fill(usize::MAX);
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(src);
        let mut seen = vec![false; size];
        seen[src] = true;
        while let Some(x) = queue.pop_front() {
            if x == dst {
                break;
            }
            for &e in &head[x] {
                let y = to[e] as usize;
                if cap[e] > 0 && !seen[y] {
                    seen[y] = true;
                    prev_edge[y] = e;
                    queue.push_back(y);
                }
            }
        }
        if !seen[dst] {
            break;
        }
        let mut x = dst;
        while x != src {
            let e = prev_edge[x];
            cap[e] -= 1;
            cap[e ^ 1] += 1;
            x = to[e ^ 1] as usize;
        }
        flow += 1;
        if flow > g.n {
            break;
        }
    }
    flow
}

/// Edge list of the Euclidean minimum spanning tree (dense Prim).
pub fn emst_edges(points: &[Point]) -> Vec<(u32, u32)> {
    let (pts, dim) = flat(points);
    emst_edges_flat(&pts, dim)
}

pub fn emst_edges_flat(pts: &[f64], dim: usize) -> Vec<(u32, u32)> {
    let n = pts.len() / dim;
    if n <= 1 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut best_from = vec![0u32; n];
    let mut edges = Vec::with_capacity(n - 1);
    in_tree[0] = true;
    let p0 = &pts[0..dim];
    for v in 1..n {
        best[v] = point_distance(p0, &pts[v * dim..v * dim + dim]);
    }
    for _ in 1..n {
        let mut u = usize::MAX;
        let mut bd = f64::INFINITY;
        for v in 0..n {
            if !in_tree[v] && best[v] < bd {
                bd = best[v];
                u = v;
            }
        }
        in_tree[u] = true;
        let (a, b) = (best_from[u].min(u as u32), best_from[u].max(u as u32));
        edges.push((a, b));
        let pu = &pts[u * dim..u * dim + dim];
        for v in 0..n {
            if !in_tree[v] {
                let d = point_distance(pu, &pts[v * dim..v * dim + dim]);
                if d < best[v] {
                    best[v] = d;
                    best_from[v] = u as u32;
                }
            }
        }
    }
    edges.sort_unstable();
    edges
}

/// Total length of an edge list, summed in sorted-edge order so that any
/// two routes to the same edge set agree bit for bit.
pub fn edge_set_weight(pts: &[f64], dim: usize, edges: &[(u32, u32)]) -> f64 {
    let mut sorted = edges.to_vec();
    sorted.sort_unstable();
    sorted
        .iter()
        .map(|&(u, v)| {
            point_distance(
                &pts[u as usize * dim..u as usize * dim + dim],
                &pts[v as usize * dim..v as usize * dim + dim],
            )
        })
        .sum()
}

/// Weight of the Euclidean minimum spanning tree.
pub fn emst_weight(points: &[Point]) -> f64 {
    let (pts, dim) = flat(points);
    emst_weight_flat(&pts, dim)
}

pub fn emst_weight_flat(pts: &[f64], dim: usize) -> f64 {
    edge_set_weight(pts, dim, &emst_edges_flat(pts, dim))
}

/// Compose the oracles into one report.
pub fn full_report(
    g: &SpannerGraph,
    points: &[Point],
    t: f64,
    k: usize,
    budget: u64,
) -> VerificationReport {
    let (pts, dim) = flat(points);
    let (stretch, worst_pair) = stretch_factor_flat(g, &pts, dim);
    let weight = g.weight(&pts, dim);
    let emst = emst_weight_flat(&pts, dim);
    let (vfts_ok, vfts_mode, witness) = verify_vfts_flat(g, &pts, dim, t, k, budget);
    VerificationReport {
        stretch,
        max_degree: g.max_degree(),
        edge_count: g.edge_count(),
        weight,
        emst_weight: emst,
        weight_ratio: if emst > 0.0 { weight / emst } else { 1.0 },
        vfts_ok,
        vfts_mode,
        worst_pair,
        worst_fault_set: witness.unwrap_or_default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts2(coords: &[[f64; 2]]) -> Vec<Point> {
        coords.iter().map(|c| Point::new(c.to_vec()).unwrap()).collect()
    }

    #[test]
    fn stretch_of_complete_graph_is_one() {
        let points = pts2(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let g = SpannerGraph::from_edges(3, 2.0, 0, &[(0, 1), (0, 2), (1, 2)]);
        let (s, _) = stretch_factor(&g, &points);
        assert_eq!(s, 1.0);
    }

    #[test]
    fn stretch_of_right_isoceles_missing_hypotenuse() {
        let points = pts2(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]);
        let g = SpannerGraph::from_edges(3, 2.0, 0, &[(0, 1), (1, 2)]);
        let (s, pair) = stretch_factor(&g, &points);
        assert!((s - 2.0f64.sqrt()).abs() < 1e-12);
        assert_eq!(pair, (0, 2));
    }

    #[test]
    fn stretch_of_collinear_path_is_one() {
        let points = pts2(&[[0.0, 0.0], [1.0, 0.0], [2.5, 0.0], [4.0, 0.0]]);
        let g = SpannerGraph::from_edges(4, 2.0, 0, &[(0, 1), (1, 2), (2, 3)]);
        let (s, _) = stretch_factor(&g, &points);
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disconnected_graph_reports_infinity() {
        let points = pts2(&[[0.0, 0.0], [1.0, 0.0], [5.0, 0.0]]);
        let g = SpannerGraph::from_edges(3, 2.0, 0, &[(0, 1)]);
        let (s, pair) = stretch_factor(&g, &points);
        assert!(s.is_infinite());
        assert_eq!(pair, (0, 2));
    }

    #[test]
    fn vfts_complete_graph_passes_any_k() {
        let points = pts2(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]);
        let mut edges = Vec::new();
        for i in 0..4u32 {
            for j in i + 1..4 {
                edges.push((i, j));
            }
        }
        let g = SpannerGraph::from_edges(4, 2.0, 2, &edges);
        let (ok, mode, w) = verify_vfts(&g, &points, 1.0, 2, 1_000_000);
        assert!(ok, "witness {w:?}");
        assert_eq!(mode, "exhaustive");
    }

    #[test]
    fn vfts_star_fails_on_center_fault() {
        let points = pts2(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]]);
        let g = SpannerGraph::from_edges(4, 2.0, 1, &[(0, 1), (0, 2), (0, 3)]);
        let (ok, _, witness) = verify_vfts(&g, &points, 10.0, 1, 1_000_000);
        assert!(!ok);
        assert_eq!(witness.unwrap(), vec![0]);
    }

    #[test]
    fn vfts_k0_matches_stretch() {
        let points = pts2(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]);
        let g = SpannerGraph::from_edges(3, 2.0, 0, &[(0, 1), (1, 2)]);
        let (ok_low, _, _) = verify_vfts(&g, &points, 1.2, 0, 1_000);
        let (ok_high, _, _) = verify_vfts(&g, &points, 1.5, 0, 1_000);
        assert!(!ok_low); // stretch is sqrt(2) ~ 1.414
        assert!(ok_high);
    }

    #[test]
    fn disjoint_paths_on_cycle() {
        let edges = [(0u32, 1u32), (1, 2), (2, 3), (3, 4), (4, 0)];
        let g = SpannerGraph::from_edges(5, 2.0, 0, &edges);
        assert_eq!(vertex_disjoint_path_count(&g, 0, 2), 2);
        // adjacent pair short-circuits
        assert_eq!(vertex_disjoint_path_count(&g, 0, 1), 5);
    }

    #[test]
    fn disjoint_paths_disconnected_is_zero() {
        let g = SpannerGraph::from_edges(4, 2.0, 0, &[(0, 1), (2, 3)]);
        assert_eq!(vertex_disjoint_path_count(&g, 0, 2), 0);
    }

    #[test]
    fn emst_simple_cases() {
        let two = pts2(&[[0.0, 0.0], [3.0, 4.0]]);
        assert!((emst_weight(&two) - 5.0).abs() < 1e-12);
        let square = pts2(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]);
        assert!((emst_weight(&square) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn full_report_two_point_spanner() {
        let points = pts2(&[[0.0, 0.0], [2.0, 0.0]]);
        let g = SpannerGraph::from_edges(2, 2.0, 0, &[(0, 1)]);
        let r = full_report(&g, &points, 2.0, 0, 1_000);
        assert_eq!(r.stretch, 1.0);
        assert_eq!(r.weight_ratio, 1.0);
        assert!(r.vfts_ok);
    }
}
