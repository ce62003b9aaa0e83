//! Greedy low-weight t-spanner construction (bounded degree, k = 0).
//!
//! Bounded-separated pairs are processed in increasing edge-distance order.
//! A pair contributes the edge between its representatives unless either
//! side already has an edge leaving its floating-virtual box in the meta-cone
//! toward the partner; every added edge is indexed under the frame cones
//! containing its direction, at every tree box containing an endpoint.

use crate::error::Result;
use crate::geometry::{point_distance, ConeFrame};
use crate::pair_decomp::{process_pairs_sorted, DEFAULT_CHUNK_LIMIT};
use crate::params::choose_parameters;
use crate::split_tree::{build_tree_flat, CompressedSplitTree};

/// Undirected geometric graph over point indices.
#[derive(Debug, Clone)]
pub struct SpannerGraph {
    pub n: usize,
    pub t: f64,
    pub k: usize,
    adj: Vec<Vec<u32>>,
    edge_count: usize,
}

impl SpannerGraph {
    pub fn new(n: usize, t: f64, k: usize) -> Self {
        SpannerGraph { n, t, k, adj: vec![Vec::new(); n], edge_count: 0 }
    }

    pub fn from_edges(n: usize, t: f64, k: usize, edges: &[(u32, u32)]) -> Self {
        let mut g = SpannerGraph::new(n, t, k);
        for &(u, v) in edges {
            g.insert_edge(u, v);
        }
        g
    }

    /// Insert an undirected edge; self-loops and duplicates are rejected.
    pub fn insert_edge(&mut self, u: u32, v: u32) -> bool {
        if u == v || self.has_edge(u, v) {
            return false;
        }
        self.adj[u as usize].push(v);
        self.adj[v as usize].push(u);
        self.edge_count += 1;
        true
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        let (a, b) = if self.adj[u as usize].len() <= self.adj[v as usize].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.adj[a as usize].contains(&b)
    }

    pub fn neighbors(&self, u: u32) -> &[u32] {
        &self.adj[u as usize]
    }

    pub fn degree(&self, u: u32) -> usize {
        self.adj[u as usize].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Sorted unique edge list, the canonical form for output and weights.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (u, nbrs) in self.adj.iter().enumerate() {
            for &v in nbrs {
                if (u as u32) < v {
                    out.push((u as u32, v));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Total Euclidean length, summed over the canonical edge order.
    pub fn weight(&self, pts: &[f64], dim: usize) -> f64 {
        self.edges()
            .iter()
            .map(|&(u, v)| {
                point_distance(
                    &pts[u as usize * dim..u as usize * dim + dim],
                    &pts[v as usize * dim..v as usize * dim + dim],
                )
            })
            .sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let edges: Vec<[u32; 2]> = self.edges().iter().map(|&(u, v)| [u, v]).collect();
        if self.k > 0 {
            serde_json::json!({ "n": self.n, "t": self.t, "k": self.k, "edges": edges })
        } else {
            serde_json::json!({ "n": self.n, "t": self.t, "edges": edges })
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct IndexEntry {
    key: u32,
    y: u32,
}

/// For each tree box, frame cone and dimension, the recorded edges whose
/// outer endpoint reaches furthest below/above the box in that dimension.
#[derive(Debug)]
pub struct CrossingEdgeIndex {
    dim: usize,
    entries: Vec<Vec<IndexEntry>>,
}

impl CrossingEdgeIndex {
    pub fn new(node_count: usize, dim: usize) -> Self {
        CrossingEdgeIndex { dim, entries: vec![Vec::new(); node_count] }
    }

    #[inline]
    fn slot_key(&self, cone: u32, h: usize, high_side: bool) -> u32 {
        cone * (2 * self.dim as u32) + 2 * h as u32 + high_side as u32
    }

    /// Record edge `x -> y` (x is the inside endpoint) under every cone of
    /// `bases` containing its direction, at every ancestor box of `x`.
    pub fn record_edge(
        &mut self,
        tree: &CompressedSplitTree,
        frame: &ConeFrame,
        x: u32,
        y: u32,
        bases: &[u32],
    ) {
        let d = self.dim;
        let px = tree.point(x);
        let py = tree.point(y);
        let dir: Vec<f64> = (0..d).map(|i| py[i] - px[i]).collect();
        let mut cones: Vec<u32> = Vec::with_capacity(2);
        for &c in bases {
            if frame.cones[c as usize].contains_direction(&dir) {
                cones.push(c);
            }
        }
        if cones.is_empty() {
            return;
        }
        let mut node = tree.leaf_of(x);
        loop {
            for &c in &cones {
                for h in 0..d {
                    for high in [false, true] {
                        let key = self.slot_key(c, h, high);
                        let list = &mut self.entries[node as usize];
                        match list.binary_search_by_key(&key, |e| e.key) {
                            Ok(i) => {
                                let cur = tree.point(list[i].y)[h];
                                let new = py[h];
                                if (high && new > cur) || (!high && new < cur) {
                                    list[i].y = y;
                                }
                            }
                            Err(i) => list.insert(i, IndexEntry { key, y }),
                        }
                    }
                }
            }
            match tree.parent_of(node) {
                Some(p) => node = p,
                None => break,
            }
        }
    }

    /// Is some recorded edge of `node`, in a direction of `bases`, crossing
    /// the given floating-virtual box?
    pub fn crossing_edge_exists(
        &self,
        tree: &CompressedSplitTree,
        node: u32,
        fv_lo: &[f64],
        fv_hi: &[f64],
        bases: &ConeSelection,
    ) -> bool {
        let d = self.dim;
        let list = &self.entries[node as usize];
        for e in list {
            let cone = e.key / (2 * d as u32);
            if !bases.contains(cone) {
                continue;
            }
            let rem = e.key % (2 * d as u32);
            let h = (rem / 2) as usize;
            let yh = tree.point(e.y)[h];
            if rem & 1 == 1 {
                if yh > fv_hi[h] {
                    return true;
                }
            } else if yh < fv_lo[h] {
                return true;
            }
        }
        false
    }
}

/// Set of frame cone indices selected for one meta-cone. In the plane this
/// is a contiguous circular run of sectors; otherwise an explicit list.
#[derive(Debug, Clone)]
pub enum ConeSelection {
    Range { start: u32, len: u32, total: u32 },
    List(Vec<u32>),
}

impl ConeSelection {
    #[inline]
    pub fn contains(&self, c: u32) -> bool {
        match self {
            ConeSelection::Range { start, len, total } => {
                let off = (c + total - start) % total;
                off < *len
            }
            ConeSelection::List(v) => v.binary_search(&c).is_ok(),
        }
    }

    pub fn iter(&self) -> Box<dyn Iterator<Item = u32> + '_> {
        match self {
            ConeSelection::Range { start, len, total } => {
                let (s, l, t) = (*start, *len, *total);
                Box::new((0..l).map(move |i| (s + i) % t))
            }
            ConeSelection::List(v) => Box::new(v.iter().copied()),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ConeSelection::Range { len, .. } => *len as usize,
            ConeSelection::List(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Select all frame cones whose axis is within `theta1 + half_angle` of
/// `dir`. Equivalent to [`crate::geometry::general_cone_direction`] with the
/// center-to-center direction, shaped for the hot path.
pub(crate) fn select_meta_cones(frame: &ConeFrame, dir: &[f64], theta1: f64) -> ConeSelection {
    if frame.dim() == 2 {
        let m = frame.len() as u32;
        let sector = std::f64::consts::TAU / m as f64;
        let half = sector / 2.0;
        let w = theta1 + half + crate::geometry::ANGLE_TOL;
        if 2.0 * w >= std::f64::consts::TAU - sector {
            return ConeSelection::Range { start: 0, len: m, total: m };
        }
        let phi = dir[1].atan2(dir[0]);
        // axis angles are (i + 0.5) * sector; keep i with |angle diff| <= w
        let lo = ((phi - w) / sector - 0.5).ceil() as i64;
        let hi = ((phi + w) / sector - 0.5).floor() as i64;
        if hi < lo {
            // window narrower than one sector: take the nearest axis
            let i = ((phi / sector - 0.5).round() as i64).rem_euclid(m as i64) as u32;
            return ConeSelection::Range { start: i, len: 1, total: m };
        }
        let start = lo.rem_euclid(m as i64) as u32;
        let len = ((hi - lo + 1) as u32).min(m);
        ConeSelection::Range { start, len, total: m }
    } else {
        let mut v: Vec<u32> = Vec::new();
        for (i, c) in frame.cones.iter().enumerate() {
            if let Ok(a) = crate::geometry::angle_between(&c.axis, dir) {
                if a <= theta1 + c.half_angle + crate::geometry::ANGLE_TOL {
                    v.push(i as u32);
                }
            }
        }
        ConeSelection::List(v)
    }
}

/// Counters reported by the construction pipelines.
#[derive(Debug, Clone, Copy, Default)]
pub struct BuildStats {
    /// Bounded-separated pairs processed.
    pub pairs: u64,
    /// Edges in the produced graph.
    pub edges: usize,
}

/// Build the low-weight bounded-degree t-spanner of a point set.
pub fn build_spanner(points: &[crate::geometry::Point], t: f64) -> Result<SpannerGraph> {
    let (g, _) = build_spanner_flat(flatten(points)?, dims(points)?, t, DEFAULT_CHUNK_LIMIT)?;
    Ok(g)
}

pub(crate) fn flatten(points: &[crate::geometry::Point]) -> Result<Vec<f64>> {
    let d = dims(points)?;
    let mut flat = Vec::with_capacity(points.len() * d);
    for p in points {
        if p.dim() != d {
            return Err(crate::error::Error::DimensionMismatch(d, p.dim()));
        }
        flat.extend_from_slice(&p.coords);
    }
    Ok(flat)
}

pub(crate) fn dims(points: &[crate::geometry::Point]) -> Result<usize> {
    points.first().map(|p| p.dim()).ok_or(crate::error::Error::EmptyPointSet)
}

/// Flat-layout entry point, also returning pipeline statistics.
pub fn build_spanner_flat(
    pts: Vec<f64>,
    dim: usize,
    t: f64,
    chunk_limit: usize,
) -> Result<(SpannerGraph, BuildStats)> {
    let params = choose_parameters(t, dim, 0)?;
    let n = pts.len() / dim;
    let tree = build_tree_flat(pts, dim, params.beta)?;
    let mut graph = SpannerGraph::new(n, t, 0);
    let mut stats = BuildStats::default();
    if n < 2 {
        return Ok((graph, stats));
    }
    let frame = crate::geometry::build_frame(params.alpha, dim)?;
    let theta1 = params.theta1();
    let mut index = CrossingEdgeIndex::new(tree.node_count(), dim);
    let mut dir = vec![0.0; dim];
    let mut rdir = vec![0.0; dim];

    process_pairs_sorted(&tree, &params, chunk_limit, |a, b, sc| {
        stats.pairs += 1;
        for i in 0..dim {
            dir[i] = 0.5 * (sc.lo2[i] + sc.hi2[i]) - 0.5 * (sc.lo1[i] + sc.hi1[i]);
            rdir[i] = -dir[i];
        }
        let cones_ab = select_meta_cones(&frame, &dir, theta1);
        let cones_ba = select_meta_cones(&frame, &rdir, theta1);
        if index.crossing_edge_exists(&tree, a, &sc.lo1, &sc.hi1, &cones_ab) {
            return;
        }
        if index.crossing_edge_exists(&tree, b, &sc.lo2, &sc.hi2, &cones_ba) {
            return;
        }
        let u = tree.representative(a);
        let v = tree.representative(b);
        if graph.insert_edge(u, v) {
            let pu = tree.point(u);
            let pv = tree.point(v);
            let fwd: Vec<f64> = (0..dim).map(|i| pv[i] - pu[i]).collect();
            let bwd: Vec<f64> = fwd.iter().map(|c| -c).collect();
            let fwd_cones = frame.cones_containing(&fwd);
            let bwd_cones = frame.cones_containing(&bwd);
            index.record_edge(&tree, &frame, u, v, &fwd_cones);
            index.record_edge(&tree, &frame, v, u, &bwd_cones);
        }
    });
    stats.edges = graph.edge_count();
    Ok((graph, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    fn pts2(coords: &[[f64; 2]]) -> Vec<Point> {
        coords.iter().map(|c| Point::new(c.to_vec()).unwrap()).collect()
    }

    #[test]
    fn two_points_single_edge() {
        let g = build_spanner(&pts2(&[[0.0, 0.0], [3.0, 4.0]]), 2.0).unwrap();
        assert_eq!(g.edges(), vec![(0, 1)]);
    }

    #[test]
    fn single_point_empty_graph() {
        let g = build_spanner(&pts2(&[[1.0, 1.0]]), 2.0).unwrap();
        assert_eq!(g.n, 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn equilateral_triangle_keeps_all_edges_at_low_t() {
        let h = 3.0f64.sqrt() / 2.0;
        let g = build_spanner(&pts2(&[[0.0, 0.0], [1.0, 0.0], [0.5, h]]), 1.5).unwrap();
        // any two-edge detour has stretch 2 > 1.5, so all three edges stay
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn graph_json_shape() {
        let g = SpannerGraph::from_edges(3, 2.0, 0, &[(0, 1), (1, 2)]);
        let v = g.to_json();
        assert_eq!(v["n"], 3);
        assert_eq!(v["edges"][0][0], 0);
        assert!(v.get("k").is_none());
        let gk = SpannerGraph::from_edges(3, 2.0, 2, &[(0, 1)]);
        assert_eq!(gk.to_json()["k"], 2);
    }

    #[test]
    fn insert_edge_rejects_loops_and_duplicates() {
        let mut g = SpannerGraph::new(3, 2.0, 0);
        assert!(g.insert_edge(0, 1));
        assert!(!g.insert_edge(1, 0));
        assert!(!g.insert_edge(2, 2));
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn meta_cone_selection_matches_generic_rule() {
        let frame = crate::geometry::build_frame(0.13, 2).unwrap();
        for k in 0..200 {
            let phi = k as f64 * 0.0317;
            let dir = [phi.cos() * 2.0, phi.sin() * 2.0];
            let sel = select_meta_cones(&frame, &dir, 0.3);
            for c in 0..frame.len() as u32 {
                let ang =
                    crate::geometry::angle_between(&frame.cones[c as usize].axis, &dir).unwrap();
                let wanted = ang
                    <= 0.3 + frame.cones[c as usize].half_angle + crate::geometry::ANGLE_TOL;
                // the fast path may differ only within float noise of the boundary
                if (ang - (0.3 + frame.cones[c as usize].half_angle)).abs() > 1e-7 {
                    assert_eq!(sel.contains(c), wanted, "cone {c} dir angle {phi}");
                }
            }
        }
    }
}
