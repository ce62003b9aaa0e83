//! k-vertex fault-tolerant t-spanner construction.
//!
//! Pairs are processed in the same edge-distance order as the plain spanner.
//! Boxes with at most `k` points are cliqued internally and every point gets
//! degree-balanced edges across the pair; between two k-boxes the algorithm
//! tops the number of vertex-disjoint crossing edges in the meta-cone up to
//! `k + 1`, always pairing lowest-degree eligible points.

use std::collections::HashMap;

use crate::error::Result;
use crate::geometry::{ConeFrame, Point};
use crate::pair_decomp::{process_pairs_sorted, DEFAULT_CHUNK_LIMIT};
use crate::params::choose_parameters;
use crate::spanner::{select_meta_cones, BuildStats, ConeSelection, SpannerGraph};
use crate::split_tree::{assign_representatives, build_tree_flat, CompressedSplitTree, RepSets};

/// One entry of a per-(box, cone) disjoint-crossing-edge list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisjointEdge {
    pub inside: u32,
    pub outside: u32,
    /// Distance of the outer endpoint from the box (the merge key).
    pub outer_dist: f64,
}

/// Maximum-cardinality vertex-disjoint subset of the given edges, computed
/// as a maximum bipartite matching between inside and outside endpoints.
/// Deterministic: inside endpoints are processed in ascending order.
pub fn max_disjoint_matching(edges: &[(u32, u32)]) -> Vec<(u32, u32)> {
    let mut uniq: Vec<(u32, u32)> = edges.to_vec();
    uniq.sort_unstable();
    uniq.dedup();
    let mut lefts: Vec<u32> = uniq.iter().map(|e| e.0).collect();
    lefts.sort_unstable();
    lefts.dedup();
    let mut rights: Vec<u32> = uniq.iter().map(|e| e.1).collect();
    rights.sort_unstable();
    rights.dedup();
    let adj: Vec<Vec<usize>> = lefts
        .iter()
        .map(|&l| {
            uniq.iter()
                .filter(|e| e.0 == l)
                .map(|e| rights.binary_search(&e.1).unwrap())
                .collect()
        })
        .collect();
    let mut match_right: Vec<usize> = vec![usize::MAX; rights.len()];
    let mut visited = vec![false; rights.len()];

    fn try_augment(
        u: usize,
        adj: &[Vec<usize>],
        match_right: &mut [usize],
        visited: &mut [bool],
    ) -> bool {
        for &r in &adj[u] {
            if !visited[r] {
                visited[r] = true;
                if match_right[r] == usize::MAX
                    || try_augment(match_right[r], adj, match_right, visited)
                {
                    match_right[r] = u;
                    return true;
                }
            }
        }
        false
    }

    for u in 0..lefts.len() {
        visited.fill(false);
        try_augment(u, &adj, &mut match_right, &mut visited);
    }
    let mut out: Vec<(u32, u32)> = match_right
        .iter()
        .enumerate()
        .filter(|(_, &l)| l != usize::MAX)
        .map(|(r, &l)| (lefts[l], rights[r]))
        .collect();
    out.sort_unstable();
    out
}

/// Greedy merge of children disjoint-edge lists: repeatedly take the edge
/// with the furthest outer endpoint, skip edges reusing an endpoint already
/// taken, stop at `k + 1`.
pub fn merge_children_disjoint(child_lists: &[&[DisjointEdge]], k: usize) -> Vec<DisjointEdge> {
    let mut cursors = vec![0usize; child_lists.len()];
    let mut used_outer: Vec<u32> = Vec::new();
    let mut used_inner: Vec<u32> = Vec::new();
    let mut out = Vec::new();
    while out.len() < k + 1 {
        let mut best: Option<(usize, f64)> = None;
        for (ci, list) in child_lists.iter().enumerate() {
            // skip over edges clashing with already-taken endpoints
            while cursors[ci] < list.len()
                && (used_outer.contains(&list[cursors[ci]].outside)
                    || used_inner.contains(&list[cursors[ci]].inside))
            {
                cursors[ci] += 1;
            }
            if cursors[ci] < list.len() {
                let d = list[cursors[ci]].outer_dist;
                if best.map(|(_, bd)| d > bd).unwrap_or(true) {
                    best = Some((ci, d));
                }
            }
        }
        match best {
            Some((ci, _)) => {
                let e = child_lists[ci][cursors[ci]];
                cursors[ci] += 1;
                used_outer.push(e.outside);
                used_inner.push(e.inside);
                out.push(e);
            }
            None => break,
        }
    }
    out
}

/// Points of `candidates` outside `excluded` whose directional degree is at
/// most `k`, ascending by (degree, index).
pub fn eligible_low_degree(
    candidates: &[u32],
    excluded: &[u32],
    k: usize,
    mut deg_of: impl FnMut(u32) -> u32,
) -> Vec<u32> {
    let mut v: Vec<(u32, u32)> = candidates
        .iter()
        .copied()
        .filter(|p| !excluded.contains(p))
        .map(|p| (deg_of(p), p))
        .filter(|&(d, _)| d <= k as u32)
        .collect();
    v.sort_unstable();
    v.into_iter().map(|(_, p)| p).collect()
}

#[derive(Debug, Clone, Copy)]
struct AcEntry {
    cone: u32,
    u: u32,
    v: u32,
}

struct Builder<'a> {
    tree: &'a CompressedSplitTree,
    frame: &'a ConeFrame,
    k: usize,
    reps: RepSets,
    graph: SpannerGraph,
    /// Per tree box, edges crossing it, ordered by cone.
    all_crossing: Vec<Vec<AcEntry>>,
    /// Directional degree: edges at a point attributed to its lowest-index
    /// containing cone.
    deg: HashMap<u64, u32>,
    cliqued: Vec<bool>,
    dim: usize,
}

impl<'a> Builder<'a> {
    fn deg_of(&self, p: u32, cone: u32) -> u32 {
        *self.deg.get(&(((p as u64) << 32) | cone as u64)).unwrap_or(&0)
    }

    fn bump_deg(&mut self, p: u32, cone: u32) {
        *self.deg.entry(((p as u64) << 32) | cone as u64).or_insert(0) += 1;
    }

    /// Insert an edge with all bookkeeping. Returns false when it already
    /// existed.
    fn add_edge(&mut self, u: u32, v: u32) -> bool {
        if !self.graph.insert_edge(u, v) {
            return false;
        }
        let d = self.dim;
        let pu = self.tree.point(u).to_vec();
        let pv = self.tree.point(v).to_vec();
        let fwd: Vec<f64> = (0..d).map(|i| pv[i] - pu[i]).collect();
        let bwd: Vec<f64> = fwd.iter().map(|c| -c).collect();
        self.bump_deg(u, self.frame.primary_cone(&fwd));
        self.bump_deg(v, self.frame.primary_cone(&bwd));
        self.record_crossing(u, v, &fwd);
        self.record_crossing(v, u, &bwd);
        true
    }

    /// Register edge `x -> y` on every box containing `x` but not `y`.
    fn record_crossing(&mut self, x: u32, y: u32, dir: &[f64]) {
        let cones = self.frame.cones_containing(dir);
        let mut node = self.tree.leaf_of(x);
        let cap = ((self.k + 1) * (self.k + 1)) as usize;
        loop {
            if self.tree.node_contains_point(node, y) {
                break;
            }
            let list = &mut self.all_crossing[node as usize];
            for &c in &cones {
                let at = list.partition_point(|e| e.cone <= c);
                list.insert(at, AcEntry { cone: c, u: x, v: y });
                let run = list.iter().filter(|e| e.cone == c).count();
                debug_assert!(
                    run <= cap,
                    "crossing list for box {node} cone {c} exceeded (k+1)^2 = {cap}"
                );
            }
            match self.tree.parent_of(node) {
                Some(p) => node = p,
                None => break,
            }
        }
    }

    /// Candidate crossing edges of a box in the selected cone directions,
    /// deduplicated.
    fn gather(&self, node: u32, sel: &ConeSelection, out: &mut Vec<(u32, u32)>) {
        out.clear();
        for e in &self.all_crossing[node as usize] {
            if sel.contains(e.cone) {
                out.push((e.u, e.v));
            }
        }
        out.sort_unstable();
        out.dedup();
    }

    /// Size of the maximum disjoint crossing set and its inside endpoints.
    fn disjoint_info(&self, node: u32, sel: &ConeSelection, scratch: &mut Vec<(u32, u32)>) -> (usize, Vec<u32>) {
        self.gather(node, sel, scratch);
        if scratch.is_empty() {
            return (0, Vec::new());
        }
        let matched = max_disjoint_matching(scratch);
        let x: Vec<u32> = matched.iter().map(|e| e.0).collect();
        (matched.len(), x)
    }

    /// Majority cone of the partner's representatives as seen from the
    /// center of this side's floating box; ties toward the lowest index.
    fn majority_cone(&self, partner_reps: &[u32], fv_lo: &[f64], fv_hi: &[f64]) -> u32 {
        let d = self.dim;
        let mut counts: HashMap<u32, u32> = HashMap::new();
        let mut dir = vec![0.0; d];
        for &r in partner_reps {
            let p = self.tree.point(r);
            for i in 0..d {
                dir[i] = p[i] - 0.5 * (fv_lo[i] + fv_hi[i]);
            }
            *counts.entry(self.frame.primary_cone(&dir)).or_insert(0) += 1;
        }
        let mut best = (0u32, u32::MAX);
        for (&cone, &cnt) in &counts {
            if cnt > best.0 || (cnt == best.0 && cone < best.1) {
                best = (cnt, cone);
            }
        }
        best.1
    }

    fn clique(&mut self, node: u32) {
        if self.cliqued[node as usize] {
            return;
        }
        self.cliqued[node as usize] = true;
        let pts: Vec<u32> = self.tree.points_in(node).to_vec();
        for (i, &u) in pts.iter().enumerate() {
            for &v in &pts[i + 1..] {
                self.add_edge(u, v);
            }
        }
    }
}

/// Build the (k,t) vertex fault-tolerant spanner.
pub fn build_vfts(points: &[Point], t: f64, k: usize) -> Result<SpannerGraph> {
    let flat = crate::spanner::flatten(points)?;
    let dim = crate::spanner::dims(points)?;
    let (g, _) = build_vfts_flat(flat, dim, t, k, DEFAULT_CHUNK_LIMIT)?;
    Ok(g)
}

/// Flat-layout entry point, also returning pipeline statistics.
pub fn build_vfts_flat(
    pts: Vec<f64>,
    dim: usize,
    t: f64,
    k: usize,
    chunk_limit: usize,
) -> Result<(SpannerGraph, BuildStats)> {
    if k == 0 {
        return Err(crate::error::Error::InvalidParameter(
            "fault parameter must be >= 1 (use the plain spanner for k = 0)".into(),
        ));
    }
    let params = choose_parameters(t, dim, k)?;
    let n = pts.len() / dim;
    let tree = build_tree_flat(pts, dim, params.beta)?;
    let mut stats = BuildStats::default();
    if n < 2 {
        return Ok((SpannerGraph::new(n, t, k), stats));
    }
    let frame = crate::geometry::build_frame(params.alpha, dim)?;
    let theta1 = params.theta1();
    let reps = assign_representatives(&tree, k);
    let mut b = Builder {
        tree: &tree,
        frame: &frame,
        k,
        reps,
        graph: SpannerGraph::new(n, t, k),
        all_crossing: vec![Vec::new(); tree.node_count()],
        deg: HashMap::new(),
        cliqued: vec![false; tree.node_count()],
        dim,
    };
    let mut dir = vec![0.0; dim];
    let mut rdir = vec![0.0; dim];
    let mut scratch: Vec<(u32, u32)> = Vec::new();

    process_pairs_sorted(&tree, &params, chunk_limit, |na, nb, sc| {
        stats.pairs += 1;
        for i in 0..dim {
            dir[i] = 0.5 * (sc.lo2[i] + sc.hi2[i]) - 0.5 * (sc.lo1[i] + sc.hi1[i]);
            rdir[i] = -dir[i];
        }
        let sel_ab = select_meta_cones(&frame, &dir, theta1);
        let sel_ba = select_meta_cones(&frame, &rdir, theta1);
        let reps_a: Vec<u32> = b.reps.reps(na).to_vec();
        let reps_b: Vec<u32> = b.reps.reps(nb).to_vec();
        let p = reps_a.len();
        let q = reps_b.len();
        // cone used for degree bookkeeping on each side
        let cone_a = b.majority_cone(&reps_b, &sc.lo1, &sc.hi1);
        let cone_b = b.majority_cone(&reps_a, &sc.lo2, &sc.hi2);

        if p <= k && q <= k {
            b.clique(na);
            b.clique(nb);
            for &u in &reps_a {
                if b.deg_of(u, cone_a) > k as u32 {
                    continue;
                }
                let partner = reps_b
                    .iter()
                    .copied()
                    .filter(|&v| !b.graph.has_edge(u, v))
                    .min_by_key(|&v| (b.deg_of(v, cone_b), v));
                if let Some(v) = partner {
                    b.add_edge(u, v);
                }
            }
            for &v in &reps_b {
                if b.deg_of(v, cone_b) > k as u32 {
                    continue;
                }
                let partner = reps_a
                    .iter()
                    .copied()
                    .filter(|&u| !b.graph.has_edge(u, v))
                    .min_by_key(|&u| (b.deg_of(u, cone_a), u));
                if let Some(u) = partner {
                    b.add_edge(u, v);
                }
            }
        } else if p > k && q > k {
            let (la, xa) = b.disjoint_info(na, &sel_ab, &mut scratch);
            let (lb, xb) = b.disjoint_info(nb, &sel_ba, &mut scratch);
            let l = la.max(lb);
            if l >= k + 1 {
                return;
            }
            let m = k + 1 - l;
            let ya = eligible_low_degree(b.tree.points_in(na), &xa, k, |u| b.deg_of(u, cone_a));
            if ya.is_empty() {
                return;
            }
            let yb = eligible_low_degree(b.tree.points_in(nb), &xb, k, |v| b.deg_of(v, cone_b));
            let m = m.min(ya.len()).min(yb.len());
            for i in 0..m {
                b.add_edge(ya[i], yb[i]);
            }
        } else {
            // exactly one side is a k-box
            let (small, big, sel_big, cone_small, cone_big, small_reps) = if p <= k {
                (na, nb, &sel_ba, cone_a, cone_b, &reps_a)
            } else {
                (nb, na, &sel_ab, cone_b, cone_a, &reps_b)
            };
            b.clique(small);
            for &u in small_reps {
                let du = b.deg_of(u, cone_small);
                if du > k as u32 {
                    continue;
                }
                let (gprime, xbig) = b.disjoint_info(big, sel_big, &mut scratch);
                if gprime >= k + 1 {
                    continue;
                }
                let want = (k + 1 - du as usize).min(k + 1 - gprime);
                if want == 0 {
                    continue;
                }
                let y = eligible_low_degree(b.tree.points_in(big), &xbig, k, |v| {
                    b.deg_of(v, cone_big)
                });
                for &v in y.iter().take(want) {
                    if !b.graph.has_edge(u, v) {
                        b.add_edge(u, v);
                    }
                }
            }
        }
    });
    stats.edges = b.graph.edge_count();
    Ok((b.graph, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts2(coords: &[[f64; 2]]) -> Vec<Point> {
        coords.iter().map(|c| Point::new(c.to_vec()).unwrap()).collect()
    }

    #[test]
    fn two_points_k1_single_edge() {
        let g = build_vfts(&pts2(&[[0.0, 0.0], [5.0, 1.0]]), 2.0, 1).unwrap();
        assert_eq!(g.edges(), vec![(0, 1)]);
        assert_eq!(g.k, 1);
    }

    #[test]
    fn k_zero_is_rejected() {
        assert!(build_vfts(&pts2(&[[0.0, 0.0], [1.0, 1.0]]), 2.0, 0).is_err());
    }

    #[test]
    fn small_sets_become_complete() {
        // n = k + 2 in general position: every pair must be adjacent or have
        // k+1 disjoint paths; with so few points that forces near-complete.
        let coords = [[0.0, 0.0], [3.0, 0.4], [1.1, 2.9], [2.3, 1.7]];
        let g = build_vfts(&pts2(&coords), 2.0, 2).unwrap();
        let points = pts2(&coords);
        let (ok, mode, w) = crate::verify::verify_vfts(&g, &points, 2.0, 2, 100_000);
        assert!(ok, "witness {w:?}");
        assert_eq!(mode, "exhaustive");
        for u in 0..4u32 {
            for v in u + 1..4 {
                assert!(
                    g.has_edge(u, v)
                        || crate::verify::vertex_disjoint_path_count(&g, u, v) >= 3
                );
            }
        }
    }

    #[test]
    fn matching_on_disjoint_and_shared_endpoints() {
        assert_eq!(max_disjoint_matching(&[(1, 10), (2, 11)]).len(), 2);
        assert_eq!(max_disjoint_matching(&[(1, 10), (1, 11)]).len(), 1);
        // shared outer endpoint
        assert_eq!(max_disjoint_matching(&[(1, 10), (2, 10)]).len(), 1);
        assert_eq!(max_disjoint_matching(&[]).len(), 0);
    }

    #[test]
    fn merge_children_cases() {
        let e = |i: u32, o: u32, d: f64| DisjointEdge { inside: i, outside: o, outer_dist: d };
        // one child empty: the other truncated to k+1
        let a = [e(1, 10, 5.0), e(2, 11, 4.0), e(3, 12, 3.0)];
        let out = merge_children_disjoint(&[&a, &[]], 1);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].outside, 10);
        // shared outer node: exactly one kept
        let b = [e(4, 10, 4.5)];
        let out = merge_children_disjoint(&[&a, &b], 2);
        let outs: Vec<u32> = out.iter().map(|x| x.outside).collect();
        assert_eq!(outs.iter().filter(|&&o| o == 10).count(), 1);
        // sorted by furthest outer endpoint
        assert!(out.windows(2).all(|w| w[0].outer_dist >= w[1].outer_dist));
    }

    #[test]
    fn eligible_low_degree_ordering() {
        let degs = [3u32, 0, 2, 0, 9];
        let out = eligible_low_degree(&[0, 1, 2, 3, 4], &[2], 3, |p| degs[p as usize]);
        // degree 9 filtered, 2 excluded, ties by index
        assert_eq!(out, vec![1, 3, 0]);
    }
}
