//! Compressed split tree with tight-virtual boxes and representatives.
//!
//! The tree is built by repeatedly cutting the current enclosing box through
//! the midpoint of its longest side and shrinking each half to the minimal
//! enclosing box of its points. Every node also carries a tight-virtual box:
//! same longest side as the enclosing box, aspect ratio at most `beta`,
//! nested inside the parent's tight-virtual box half.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{box_size_flat, AABox, Point};

pub const NO_NODE: u32 = u32::MAX;

/// View of one tree vertex.
#[derive(Debug, Clone)]
pub struct SplitTreeNode {
    pub id: u32,
    pub enclosing: AABox,
    pub tight_virtual: AABox,
    pub parent: Option<u32>,
    pub children: Option<[u32; 2]>,
    /// Contiguous range into the tree's point permutation.
    pub points: (u32, u32),
    pub level: u32,
    pub representatives: Vec<u32>,
}

#[derive(Debug, Serialize)]
struct NodeDump {
    id: u32,
    parent: Option<u32>,
    children: Vec<u32>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    tv_lo: Vec<f64>,
    tv_hi: Vec<f64>,
    reps: Vec<u32>,
    level: u32,
}

#[derive(Debug, Clone)]
pub struct CompressedSplitTree {
    dim: usize,
    n: usize,
    beta: f64,
    /// Original point coordinates, flat, `n * dim`.
    pts: Vec<f64>,
    /// Leaf-order permutation of point indices.
    perm: Vec<u32>,
    /// Slot of each point in `perm` (inverse permutation).
    pos: Vec<u32>,
    /// Leaf node of each point.
    leaf: Vec<u32>,
    parent: Vec<u32>,
    children: Vec<[u32; 2]>,
    level: Vec<u32>,
    range: Vec<(u32, u32)>,
    enc_lo: Vec<f64>,
    enc_hi: Vec<f64>,
    tv_lo: Vec<f64>,
    tv_hi: Vec<f64>,
    tv_size: Vec<f64>,
    /// Split dimension / coordinate of internal nodes.
    split_dim: Vec<u32>,
    split_coord: Vec<f64>,
    /// k = 0 representative of each node.
    rep: Vec<u32>,
}

/// Representative sets for the fault-tolerant construction: boxes with at
/// most `k` points list all of them, k-boxes list `k + 1`.
#[derive(Debug, Clone)]
pub struct RepSets {
    pub k: usize,
    offsets: Vec<u32>,
    data: Vec<u32>,
}

impl RepSets {
    pub fn reps(&self, node: u32) -> &[u32] {
        let s = self.offsets[node as usize] as usize;
        let e = self.offsets[node as usize + 1] as usize;
        &self.data[s..e]
    }
}

/// Build the compressed split tree of a point set.
pub fn build_tree(points: &[Point], beta: f64) -> Result<CompressedSplitTree> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let dim = points[0].dim();
    let mut flat = Vec::with_capacity(points.len() * dim);
    for p in points {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch(dim, p.dim()));
        }
        if p.coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoordinate);
        }
        flat.extend_from_slice(&p.coords);
    }
    build_tree_flat(flat, dim, beta)
}

/// Same as [`build_tree`] on an `n * dim` flat coordinate array.
pub fn build_tree_flat(pts: Vec<f64>, dim: usize, beta: f64) -> Result<CompressedSplitTree> {
    if dim == 0 || pts.len() % dim != 0 {
        return Err(Error::InvalidParameter("bad flat point array".into()));
    }
    let n = pts.len() / dim;
    if n == 0 {
        return Err(Error::EmptyPointSet);
    }
    if (beta - 2.0).abs() > 1e-12 {
        // The halved parent tight-virtual box has sides as small as half the
        // parent size, and a child's longest side can equal the parent's, so
        // the nesting chain is only constructible at aspect bound exactly 2.
        return Err(Error::InvalidParameter(
            "tight-virtual construction requires beta = 2".into(),
        ));
    }
    if pts.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFiniteCoordinate);
    }

    // duplicate detection via one lexicographic sort
    {
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_unstable_by(|&a, &b| {
            let pa = &pts[a as usize * dim..a as usize * dim + dim];
            let pb = &pts[b as usize * dim..b as usize * dim + dim];
            pa.partial_cmp(pb).unwrap()
        });
        for w in order.windows(2) {
            let pa = &pts[w[0] as usize * dim..w[0] as usize * dim + dim];
            let pb = &pts[w[1] as usize * dim..w[1] as usize * dim + dim];
            if pa == pb {
                return Err(Error::DuplicatePoints);
            }
        }
    }

    // one sorted index array per dimension, partitioned in lockstep
    let mut arrays: Vec<Vec<u32>> = (0..dim)
        .map(|i| {
            let mut a: Vec<u32> = (0..n as u32).collect();
            a.sort_unstable_by(|&x, &y| {
                let cx = pts[x as usize * dim + i];
                let cy = pts[y as usize * dim + i];
                cx.partial_cmp(&cy).unwrap().then(x.cmp(&y))
            });
            a
        })
        .collect();

    let cap = 2 * n - 1;
    let mut t = CompressedSplitTree {
        dim,
        n,
        beta,
        pts,
        perm: Vec::new(),
        pos: vec![0; n],
        leaf: vec![NO_NODE; n],
        parent: Vec::with_capacity(cap),
        children: Vec::with_capacity(cap),
        level: Vec::with_capacity(cap),
        range: Vec::with_capacity(cap),
        enc_lo: Vec::with_capacity(cap * dim),
        enc_hi: Vec::with_capacity(cap * dim),
        tv_lo: Vec::with_capacity(cap * dim),
        tv_hi: Vec::with_capacity(cap * dim),
        tv_size: Vec::with_capacity(cap),
        split_dim: Vec::with_capacity(cap),
        split_coord: Vec::with_capacity(cap),
        rep: Vec::new(),
    };

    // root node
    t.push_node(NO_NODE, 0, 0, n as u32, &arrays);
    t.root_tv();

    let mut side = vec![false; n];
    let mut scratch: Vec<u32> = Vec::with_capacity(n);
    let mut stack: Vec<u32> = vec![0];

    while let Some(node) = stack.pop() {
        let (s, e) = t.range[node as usize];
        let (s, e) = (s as usize, e as usize);
        if e - s == 1 {
            let p = arrays[0][s];
            t.perm.push(p);
            continue;
        }
        // split perpendicular to the longest enclosing side, lowest dim wins ties
        let base = node as usize * dim;
        let mut j = 0;
        let mut longest = f64::NEG_INFINITY;
        for i in 0..dim {
            let side_len = t.enc_hi[base + i] - t.enc_lo[base + i];
            if side_len > longest {
                longest = side_len;
                j = i;
            }
        }
        let m = 0.5 * (t.enc_lo[base + j] + t.enc_hi[base + j]);
        t.split_dim[node as usize] = j as u32;
        t.split_coord[node as usize] = m;

        // points exactly on the plane go to the lower half
        let mut nl = 0usize;
        for &p in &arrays[j][s..e] {
            let lowside = t.pts[p as usize * dim + j] <= m;
            side[p as usize] = lowside;
            if lowside {
                nl += 1;
            }
        }
        debug_assert!(nl > 0 && nl < e - s, "midpoint split cannot empty a side");

        for arr in arrays.iter_mut() {
            scratch.clear();
            let mut w = s;
            for r in s..e {
                let p = arr[r];
                if side[p as usize] {
                    arr[w] = p;
                    w += 1;
                } else {
                    scratch.push(p);
                }
            }
            arr[w..e].copy_from_slice(&scratch);
        }

        let lo_id = t.push_node(node, t.level[node as usize] + 1, s as u32, (s + nl) as u32, &arrays);
        let hi_id =
            t.push_node(node, t.level[node as usize] + 1, (s + nl) as u32, e as u32, &arrays);
        t.children[node as usize] = [lo_id, hi_id];
        t.child_tv(node, lo_id, true);
        t.child_tv(node, hi_id, false);
        // low child first in leaf order
        stack.push(hi_id);
        stack.push(lo_id);
    }

    debug_assert_eq!(t.perm.len(), n);
    for (slot, &p) in t.perm.iter().enumerate() {
        t.pos[p as usize] = slot as u32;
    }
    // leaves know their point only after the permutation is final
    for id in 0..t.node_count() as u32 {
        if t.children[id as usize][0] == NO_NODE {
            let (s, _) = t.range[id as usize];
            let p = t.perm[s as usize];
            t.leaf[p as usize] = id;
        }
    }
    t.assign_base_representatives();
    Ok(t)
}

impl CompressedSplitTree {
    fn push_node(&mut self, parent: u32, level: u32, s: u32, e: u32, arrays: &[Vec<u32>]) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(parent);
        self.children.push([NO_NODE, NO_NODE]);
        self.level.push(level);
        self.range.push((s, e));
        for (i, arr) in arrays.iter().enumerate() {
            let lo = self.pts[arr[s as usize] as usize * self.dim + i];
            let hi = self.pts[arr[e as usize - 1] as usize * self.dim + i];
            self.enc_lo.push(lo);
            self.enc_hi.push(hi);
        }
        self.tv_lo.extend(std::iter::repeat(0.0).take(self.dim));
        self.tv_hi.extend(std::iter::repeat(0.0).take(self.dim));
        self.tv_size.push(0.0);
        self.split_dim.push(u32::MAX);
        self.split_coord.push(f64::NAN);
        id
    }

    fn root_tv(&mut self) {
        let d = self.dim;
        let size = box_size_flat(&self.enc_lo[..d], &self.enc_hi[..d]);
        for i in 0..d {
            let s = self.enc_hi[i] - self.enc_lo[i];
            let t = s.max(size / self.beta);
            let c = 0.5 * (self.enc_lo[i] + self.enc_hi[i]);
            self.tv_lo[i] = c - 0.5 * t;
            self.tv_hi[i] = c + 0.5 * t;
        }
        self.tv_size[0] = size;
    }

    /// Tight-virtual box of a child: longest side equals the child's
    /// enclosing size, aspect at most beta, inside the parent tight-virtual
    /// box halved at the split plane.
    fn child_tv(&mut self, parent: u32, child: u32, low_side: bool) {
        let d = self.dim;
        let pb = parent as usize * d;
        let cb = child as usize * d;
        let j = self.split_dim[parent as usize] as usize;
        let m = self.split_coord[parent as usize];
        let size = box_size_flat(&self.enc_lo[cb..cb + d], &self.enc_hi[cb..cb + d]);
        for i in 0..d {
            let mut c_lo = self.tv_lo[pb + i];
            let mut c_hi = self.tv_hi[pb + i];
            if i == j {
                if low_side {
                    c_hi = c_hi.min(m);
                } else {
                    c_lo = c_lo.max(m);
                }
            }
            let s = self.enc_hi[cb + i] - self.enc_lo[cb + i];
            let t = s.max(size / self.beta);
            let want = 0.5 * (self.enc_lo[cb + i] + self.enc_hi[cb + i]) - 0.5 * t;
            let lo = want.clamp(c_lo, (c_hi - t).max(c_lo));
            self.tv_lo[cb + i] = lo;
            self.tv_hi[cb + i] = lo + t;
        }
        self.tv_size[child as usize] = size;
    }

    /// Bottom-up single-representative assignment: two credits per point,
    /// each point ends up representing at most two boxes.
    fn assign_base_representatives(&mut self) {
        let nodes = self.node_count();
        let mut credit = vec![2u8; self.n];
        let mut avail = vec![NO_NODE; nodes];
        self.rep = vec![NO_NODE; nodes];
        // children always have larger ids, so descending id order is a
        // valid post-order
        for id in (0..nodes).rev() {
            let [c1, c2] = self.children[id];
            if c1 == NO_NODE {
                let p = self.perm[self.range[id].0 as usize];
                self.rep[id] = p;
                credit[p as usize] -= 1;
                avail[id] = p;
            } else {
                let a = avail[c1 as usize];
                let b = avail[c2 as usize];
                debug_assert!(a != NO_NODE && b != NO_NODE);
                let (take, keep) = if a < b { (a, b) } else { (b, a) };
                debug_assert!(credit[take as usize] > 0);
                self.rep[id] = take;
                credit[take as usize] -= 1;
                avail[id] = keep;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len_points(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> u32 {
        0
    }

    pub fn is_leaf(&self, id: u32) -> bool {
        self.children[id as usize][0] == NO_NODE
    }

    pub fn children_of(&self, id: u32) -> Option<[u32; 2]> {
        let c = self.children[id as usize];
        if c[0] == NO_NODE { None } else { Some(c) }
    }

    pub fn parent_of(&self, id: u32) -> Option<u32> {
        let p = self.parent[id as usize];
        if p == NO_NODE { None } else { Some(p) }
    }

    pub fn level_of(&self, id: u32) -> u32 {
        self.level[id as usize]
    }

    pub fn point(&self, p: u32) -> &[f64] {
        &self.pts[p as usize * self.dim..(p as usize + 1) * self.dim]
    }

    pub fn points_flat(&self) -> &[f64] {
        &self.pts
    }

    /// Point indices contained in a node, in leaf order.
    pub fn points_in(&self, id: u32) -> &[u32] {
        let (s, e) = self.range[id as usize];
        &self.perm[s as usize..e as usize]
    }

    pub fn point_count(&self, id: u32) -> usize {
        let (s, e) = self.range[id as usize];
        (e - s) as usize
    }

    pub fn leaf_of(&self, p: u32) -> u32 {
        self.leaf[p as usize]
    }

    /// O(1) subtree membership: is `node` an ancestor of (or equal to) the
    /// leaf holding point `p`?
    pub fn node_contains_point(&self, node: u32, p: u32) -> bool {
        let (s, e) = self.range[node as usize];
        let slot = self.pos[p as usize];
        s <= slot && slot < e
    }

    pub fn enclosing(&self, id: u32) -> (&[f64], &[f64]) {
        let b = id as usize * self.dim;
        (&self.enc_lo[b..b + self.dim], &self.enc_hi[b..b + self.dim])
    }

    pub fn tight_virtual(&self, id: u32) -> (&[f64], &[f64]) {
        let b = id as usize * self.dim;
        (&self.tv_lo[b..b + self.dim], &self.tv_hi[b..b + self.dim])
    }

    pub fn tv_size_of(&self, id: u32) -> f64 {
        self.tv_size[id as usize]
    }

    pub fn representative(&self, id: u32) -> u32 {
        self.rep[id as usize]
    }

    /// Parent tight-virtual box halved at the parent's split plane, on the
    /// side containing `id`. This is the container every floating-virtual
    /// box of `id` must stay inside.
    pub fn halved_parent_tv(&self, id: u32, out_lo: &mut [f64], out_hi: &mut [f64]) {
        let p = self.parent[id as usize];
        debug_assert!(p != NO_NODE, "root has no halved parent box");
        let d = self.dim;
        let pb = p as usize * d;
        out_lo.copy_from_slice(&self.tv_lo[pb..pb + d]);
        out_hi.copy_from_slice(&self.tv_hi[pb..pb + d]);
        let j = self.split_dim[p as usize] as usize;
        let m = self.split_coord[p as usize];
        if self.children[p as usize][0] == id {
            out_hi[j] = out_hi[j].min(m);
        } else {
            out_lo[j] = out_lo[j].max(m);
        }
    }

    pub fn node(&self, id: u32) -> SplitTreeNode {
        let (el, eh) = self.enclosing(id);
        let (tl, th) = self.tight_virtual(id);
        SplitTreeNode {
            id,
            enclosing: AABox { lo: el.to_vec(), hi: eh.to_vec() },
            tight_virtual: AABox { lo: tl.to_vec(), hi: th.to_vec() },
            parent: self.parent_of(id),
            children: self.children_of(id),
            points: self.range[id as usize],
            level: self.level[id as usize],
            representatives: vec![self.rep[id as usize]],
        }
    }

    /// Debug/test dump of the whole tree.
    pub fn dump_json(&self) -> serde_json::Value {
        let nodes: Vec<NodeDump> = (0..self.node_count() as u32)
            .map(|id| {
                let (el, eh) = self.enclosing(id);
                let (tl, th) = self.tight_virtual(id);
                NodeDump {
                    id,
                    parent: self.parent_of(id),
                    children: self.children_of(id).map(|c| c.to_vec()).unwrap_or_default(),
                    lo: el.to_vec(),
                    hi: eh.to_vec(),
                    tv_lo: tl.to_vec(),
                    tv_hi: th.to_vec(),
                    reps: vec![self.rep[id as usize]],
                    level: self.level[id as usize],
                }
            })
            .collect();
        serde_json::to_value(nodes).expect("tree dump serializes")
    }
}

/// Standalone tight-virtual box construction for one child, mirroring what
/// the tree builder does internally.
pub fn child_tight_virtual(
    parent_tv: &AABox,
    split_dim: usize,
    split_coord: f64,
    child_low_side: bool,
    child_enclosing: &AABox,
    beta: f64,
) -> Result<AABox> {
    let d = parent_tv.dim();
    if child_enclosing.dim() != d {
        return Err(Error::DimensionMismatch(d, child_enclosing.dim()));
    }
    if (beta - 2.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter("beta must be 2".into()));
    }
    let mut c_lo = parent_tv.lo.clone();
    let mut c_hi = parent_tv.hi.clone();
    if child_low_side {
        c_hi[split_dim] = c_hi[split_dim].min(split_coord);
    } else {
        c_lo[split_dim] = c_lo[split_dim].max(split_coord);
    }
    let size = crate::geometry::box_size(child_enclosing);
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    for i in 0..d {
        let s = child_enclosing.hi[i] - child_enclosing.lo[i];
        let t = s.max(size / beta);
        if t > c_hi[i] - c_lo[i] + 1e-9 * size.max(1.0) {
            return Err(Error::Precondition(
                "child enclosing box does not fit the halved parent box".into(),
            ));
        }
        let want = 0.5 * (child_enclosing.lo[i] + child_enclosing.hi[i]) - 0.5 * t;
        let l = want.clamp(c_lo[i], (c_hi[i] - t).max(c_lo[i]));
        lo[i] = l;
        hi[i] = l + t;
    }
    AABox::new(lo, hi)
}

/// Fill per-node representative sets for the fault parameter `k`.
///
/// Boxes with at most `k` points list every point; k-boxes reuse the
/// children's pools while per-point credit (2 per point) lasts and then top
/// up with the smallest-index points of the box.
pub fn assign_representatives(tree: &CompressedSplitTree, k: usize) -> RepSets {
    let nodes = tree.node_count();
    let mut lists: Vec<Vec<u32>> = vec![Vec::new(); nodes];
    if k == 0 {
        for id in 0..nodes {
            lists[id] = vec![tree.representative(id as u32)];
        }
    } else {
        let mut credit = vec![2u8; tree.len_points()];
        for id in (0..nodes).rev() {
            let count = tree.point_count(id as u32);
            if count <= k {
                let mut all: Vec<u32> = tree.points_in(id as u32).to_vec();
                all.sort_unstable();
                lists[id] = all;
                continue;
            }
            let mut cand: Vec<u32> = Vec::new();
            if let Some([c1, c2]) = tree.children_of(id as u32) {
                cand.extend_from_slice(&lists[c1 as usize]);
                cand.extend_from_slice(&lists[c2 as usize]);
                cand.sort_unstable();
                cand.dedup();
                cand.retain(|&p| credit[p as usize] > 0);
            }
            let mut chosen: Vec<u32> = cand.into_iter().take(k + 1).collect();
            for &p in &chosen {
                credit[p as usize] -= 1;
            }
            if chosen.len() < k + 1 {
                let mut rest: Vec<u32> =
                    tree.points_in(id as u32).iter().copied().filter(|p| !chosen.contains(p)).collect();
                rest.sort_unstable();
                chosen.extend(rest.into_iter().take(k + 1 - chosen.len()));
            }
            chosen.sort_unstable();
            debug_assert_eq!(chosen.len(), k + 1);
            lists[id] = chosen;
        }
    }
    let mut offsets = Vec::with_capacity(nodes + 1);
    let mut data = Vec::new();
    offsets.push(0u32);
    for l in &lists {
        data.extend_from_slice(l);
        offsets.push(data.len() as u32);
    }
    RepSets { k, offsets, data }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts2(coords: &[[f64; 2]]) -> Vec<Point> {
        coords.iter().map(|c| Point::new(c.to_vec()).unwrap()).collect()
    }

    #[test]
    fn single_point_tree() {
        let t = build_tree(&pts2(&[[3.0, 4.0]]), 2.0).unwrap();
        assert_eq!(t.node_count(), 1);
        assert!(t.is_leaf(0));
        let (lo, hi) = t.enclosing(0);
        assert_eq!(lo, &[3.0, 4.0]);
        assert_eq!(hi, &[3.0, 4.0]);
        assert_eq!(t.tv_size_of(0), 0.0);
    }

    #[test]
    fn unit_square_structure() {
        let t = build_tree(&pts2(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]), 2.0).unwrap();
        assert_eq!(t.node_count(), 7);
        let (lo, hi) = t.enclosing(0);
        assert_eq!((lo, hi), (&[0.0, 0.0][..], &[1.0, 1.0][..]));
        // longest-side tie broken toward dimension 0
        let [l, r] = t.children_of(0).unwrap();
        let (llo, lhi) = t.enclosing(l);
        assert_eq!((llo, lhi), (&[0.0, 0.0][..], &[0.0, 1.0][..]));
        let (rlo, rhi) = t.enclosing(r);
        assert_eq!((rlo, rhi), (&[1.0, 0.0][..], &[1.0, 1.0][..]));
        let leaves = (0..7).filter(|&i| t.is_leaf(i)).count();
        assert_eq!(leaves, 4);
    }

    #[test]
    fn duplicate_points_rejected() {
        let e = build_tree(&pts2(&[[0.0, 0.0], [1.0, 1.0], [0.0, 0.0]]), 2.0);
        assert!(matches!(e, Err(Error::DuplicatePoints)));
    }

    #[test]
    fn beta_other_than_two_rejected() {
        let e = build_tree(&pts2(&[[0.0, 0.0], [1.0, 1.0]]), 1.5);
        assert!(e.is_err());
    }

    #[test]
    fn split_plane_ties_go_low() {
        // 3 collinear points, midpoint exactly on the middle point
        let t = build_tree(&pts2(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]), 2.0).unwrap();
        let [l, r] = t.children_of(0).unwrap();
        assert_eq!(t.point_count(l), 2); // 0.0 and 1.0 (on-plane) go low
        assert_eq!(t.point_count(r), 1);
    }

    #[test]
    fn two_point_representative_usage() {
        let t = build_tree(&pts2(&[[0.0, 0.0], [5.0, 0.0]]), 2.0).unwrap();
        let mut uses = [0usize; 2];
        for id in 0..t.node_count() as u32 {
            uses[t.representative(id) as usize] += 1;
        }
        // each leaf represents itself; the root reuses one of them
        assert_eq!(uses.iter().sum::<usize>(), 3);
        assert!(uses.iter().all(|&u| u <= 2));
    }

    #[test]
    fn rep_sets_small_k() {
        // 5 points, k = 2: boxes with <= 2 points list all, others exactly 3
        let t = build_tree(
            &pts2(&[[0.0, 0.0], [1.0, 0.1], [2.0, -0.1], [3.0, 0.2], [4.0, 0.0]]),
            2.0,
        )
        .unwrap();
        let reps = assign_representatives(&t, 2);
        for id in 0..t.node_count() as u32 {
            let c = t.point_count(id);
            let r = reps.reps(id);
            if c <= 2 {
                assert_eq!(r.len(), c);
            } else {
                assert_eq!(r.len(), 3);
            }
            let mut sorted = r.to_vec();
            sorted.dedup();
            assert_eq!(sorted.len(), r.len(), "representatives must be distinct");
            for &p in r {
                assert!(t.node_contains_point(id, p));
            }
        }
    }

    #[test]
    fn child_tight_virtual_example() {
        let parent = AABox::new(vec![0.0, 0.0], vec![2.0, 2.0]).unwrap();
        let child = AABox::new(vec![0.1, 0.0], vec![0.2, 2.0]).unwrap();
        let tv = child_tight_virtual(&parent, 0, 1.0, true, &child, 2.0).unwrap();
        assert!(tv.contains_box(&child));
        assert_eq!(crate::geometry::box_size(&tv), 2.0);
        assert!(tv.aspect_ratio() <= 2.0 + 1e-12);
        assert!(tv.hi[0] <= 1.0 + 1e-12);
    }

    #[test]
    fn child_tight_virtual_fixed_point() {
        // child already has aspect <= beta and spans its own longest side
        let parent = AABox::new(vec![0.0, 0.0], vec![4.0, 4.0]).unwrap();
        let child = AABox::new(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        let tv = child_tight_virtual(&parent, 0, 2.0, true, &child, 2.0).unwrap();
        assert_eq!(tv, child);
    }

    #[test]
    fn node_contains_point_matches_subtree() {
        let t = build_tree(
            &pts2(&[[0.0, 0.0], [1.0, 0.3], [0.4, 2.0], [3.0, 1.0], [2.2, 2.2], [0.9, 1.4]]),
            2.0,
        )
        .unwrap();
        for id in 0..t.node_count() as u32 {
            let inside: std::collections::HashSet<u32> =
                t.points_in(id).iter().copied().collect();
            for p in 0..t.len_points() as u32 {
                assert_eq!(t.node_contains_point(id, p), inside.contains(&p));
            }
        }
    }
}
