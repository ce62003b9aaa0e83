//! Well-separated and bounded-separated pair decompositions.
//!
//! The WSPD comes out of the usual split-tree recursion: recurse on the
//! children of the larger tight-virtual box until the pair is separated.
//! Each WSPD pair is then refined into a pair of almost-equal-size
//! floating-virtual boxes whose distance is between `rho1` and `rho2` times
//! their size; the distance between those boxes is the pair's edge-distance,
//! the processing key of both construction algorithms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{box_distance_flat, box_size_flat, point_distance, AABox};
use crate::params::{verify_inequalities, SpannerParams};
use crate::split_tree::CompressedSplitTree;

/// One well-separated pair of tree nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WspdPair {
    pub a: u32,
    pub b: u32,
}

/// One bounded-separated pair: the two tree boxes plus the floating-virtual
/// boxes that realize the bounded separation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BspdPair {
    pub b1: u32,
    pub b1p: u32,
    pub fv1: AABox,
    pub fv2: AABox,
    pub edge_distance: f64,
}

/// Build the WSPD of the tree with separation constant `wsep`.
///
/// Pairs are emitted in a fixed deterministic order; the union of their
/// interaction products covers every unordered point pair exactly once.
pub fn build_wspd(tree: &CompressedSplitTree, wsep: f64) -> Vec<WspdPair> {
    let mut out = Vec::new();
    enumerate_wspd(tree, wsep, |a, b| out.push(WspdPair { a, b }));
    out
}

/// Streaming WSPD enumeration; `emit` sees each pair exactly once, always in
/// the same order.
pub(crate) fn enumerate_wspd(
    tree: &CompressedSplitTree,
    wsep: f64,
    mut emit: impl FnMut(u32, u32),
) {
    if tree.len_points() < 2 {
        return;
    }
    let mut stack: Vec<(u32, u32)> = vec![(tree.root(), tree.root())];
    while let Some((a, b)) = stack.pop() {
        if a == b {
            if let Some([c1, c2]) = tree.children_of(a) {
                stack.push((c1, c2));
                stack.push((c2, c2));
                stack.push((c1, c1));
            }
            continue;
        }
        let sa = tree.tv_size_of(a);
        let sb = tree.tv_size_of(b);
        let (alo, ahi) = tree.tight_virtual(a);
        let (blo, bhi) = tree.tight_virtual(b);
        let dist = box_distance_flat(alo, ahi, blo, bhi);
        if dist >= wsep * sa.max(sb) {
            emit(a, b);
        } else if sa >= sb {
            let [c1, c2] = tree.children_of(a).expect("non-leaf, positive size");
            stack.push((c2, b));
            stack.push((c1, b));
        } else {
            let [c1, c2] = tree.children_of(b).expect("non-leaf, positive size");
            stack.push((a, c2));
            stack.push((a, c1));
        }
    }
}

/// Place a box of size between `theta(big)/2` and `theta(big)` that contains
/// `small_tv` and stays inside `container` (per-dimension alignment: start
/// at the container's low corner, slide up just enough to cover the小 box).
pub fn find_equal_size_floating_box(
    big: &AABox,
    small_tv: &AABox,
    container: &AABox,
) -> Result<AABox> {
    let d = big.dim();
    if small_tv.dim() != d || container.dim() != d {
        return Err(Error::DimensionMismatch(d, small_tv.dim().max(container.dim())));
    }
    if !container.contains_box(small_tv) {
        return Err(Error::Precondition("container must contain the small box".into()));
    }
    let target = crate::geometry::box_size(big);
    if crate::geometry::box_size(small_tv) > target {
        return Err(Error::Precondition("small box exceeds the target size".into()));
    }
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    for i in 0..d {
        let avail = container.hi[i] - container.lo[i];
        let len = target.min(avail);
        if len + 1e-12 * target.max(1.0) < small_tv.hi[i] - small_tv.lo[i] {
            return Err(Error::Precondition("container side too small for the pair".into()));
        }
        let u = container.lo[i].max(small_tv.hi[i] - len);
        lo[i] = u;
        hi[i] = u + len;
    }
    AABox::new(lo, hi)
}

/// Scratch buffers for the floating-virtual box kernel.
pub(crate) struct FvScratch {
    /// Floating box of the pair's first node.
    pub lo1: Vec<f64>,
    pub hi1: Vec<f64>,
    /// Floating box of the pair's second node.
    pub lo2: Vec<f64>,
    pub hi2: Vec<f64>,
    cont_s_lo: Vec<f64>,
    cont_s_hi: Vec<f64>,
    cont_g_lo: Vec<f64>,
    cont_g_hi: Vec<f64>,
    fv0_lo: Vec<f64>,
    fv0_hi: Vec<f64>,
    out_g_lo: Vec<f64>,
    out_g_hi: Vec<f64>,
    out_s_lo: Vec<f64>,
    out_s_hi: Vec<f64>,
    center: Vec<f64>,
}

impl FvScratch {
    pub fn new(dim: usize) -> Self {
        let z = || vec![0.0; dim];
        FvScratch {
            lo1: z(),
            hi1: z(),
            lo2: z(),
            hi2: z(),
            cont_s_lo: z(),
            cont_s_hi: z(),
            cont_g_lo: z(),
            cont_g_hi: z(),
            fv0_lo: z(),
            fv0_hi: z(),
            out_g_lo: z(),
            out_g_hi: z(),
            out_s_lo: z(),
            out_s_hi: z(),
            center: z(),
        }
    }
}

/// Per-dimension placement of a box of side `min(target, container side)`
/// containing `inner`, anchored toward the container corner nearest the
/// partner box center.
#[inline]
fn fit_box_toward(
    target: f64,
    in_lo: &[f64],
    in_hi: &[f64],
    c_lo: &[f64],
    c_hi: &[f64],
    toward: &[f64],
    out_lo: &mut [f64],
    out_hi: &mut [f64],
) {
    for i in 0..in_lo.len() {
        let len = target.min(c_hi[i] - c_lo[i]);
        let u = if toward[i] >= 0.5 * (in_lo[i] + in_hi[i]) {
            (c_hi[i] - len).min(in_lo[i]).max(c_lo[i])
        } else {
            c_lo[i].max(in_hi[i] - len)
        };
        out_lo[i] = u;
        out_hi[i] = u + len;
    }
}

/// Compute the floating-virtual boxes and edge-distance of one pair.
///
/// On return `sc.lo1/hi1` is the floating box of `a` and `sc.lo2/hi2` the
/// one of `b`; the returned value is their distance (the edge-distance).
pub(crate) fn floating_boxes(
    tree: &CompressedSplitTree,
    params: &SpannerParams,
    a: u32,
    b: u32,
    sc: &mut FvScratch,
) -> f64 {
    let d = tree.dim();
    let sa = tree.tv_size_of(a);
    let sb = tree.tv_size_of(b);
    let a_is_big = sa >= sb;
    let (g, s) = if a_is_big { (a, b) } else { (b, a) };
    let size_g = sa.max(sb);

    let (g_tvlo, g_tvhi) = tree.tight_virtual(g);
    let (s_tvlo, s_tvhi) = tree.tight_virtual(s);
    tree.halved_parent_tv(s, &mut sc.cont_s_lo, &mut sc.cont_s_hi);

    // almost-equal-size floating box around the smaller node
    for i in 0..d {
        sc.center[i] = 0.5 * (g_tvlo[i] + g_tvhi[i]);
    }
    fit_box_toward(
        size_g,
        s_tvlo,
        s_tvhi,
        &sc.cont_s_lo,
        &sc.cont_s_hi,
        &sc.center,
        &mut sc.fv0_lo,
        &mut sc.fv0_hi,
    );
    let d0 = box_distance_flat(g_tvlo, g_tvhi, &sc.fv0_lo, &sc.fv0_hi);

    if d0 <= params.rho2 * size_g {
        sc.out_g_lo.copy_from_slice(g_tvlo);
        sc.out_g_hi.copy_from_slice(g_tvhi);
        sc.out_s_lo.copy_from_slice(&sc.fv0_lo);
        sc.out_s_hi.copy_from_slice(&sc.fv0_hi);
    } else {
        // grow equal cubes of side d0 / rho2 inside both halved parent boxes
        let delta = (d0 / params.rho2)
            .max(size_g)
            .max(box_size_flat(&sc.fv0_lo, &sc.fv0_hi));
        tree.halved_parent_tv(g, &mut sc.cont_g_lo, &mut sc.cont_g_hi);
        for i in 0..d {
            sc.center[i] = 0.5 * (s_tvlo[i] + s_tvhi[i]);
        }
        fit_box_toward(
            delta,
            g_tvlo,
            g_tvhi,
            &sc.cont_g_lo,
            &sc.cont_g_hi,
            &sc.center,
            &mut sc.out_g_lo,
            &mut sc.out_g_hi,
        );
        for i in 0..d {
            sc.center[i] = 0.5 * (g_tvlo[i] + g_tvhi[i]);
        }
        fit_box_toward(
            delta,
            &sc.fv0_lo,
            &sc.fv0_hi,
            &sc.cont_s_lo,
            &sc.cont_s_hi,
            &sc.center,
            &mut sc.out_s_lo,
            &mut sc.out_s_hi,
        );
    }
    if a_is_big {
        sc.lo1.copy_from_slice(&sc.out_g_lo);
        sc.hi1.copy_from_slice(&sc.out_g_hi);
        sc.lo2.copy_from_slice(&sc.out_s_lo);
        sc.hi2.copy_from_slice(&sc.out_s_hi);
    } else {
        sc.lo1.copy_from_slice(&sc.out_s_lo);
        sc.hi1.copy_from_slice(&sc.out_s_hi);
        sc.lo2.copy_from_slice(&sc.out_g_lo);
        sc.hi2.copy_from_slice(&sc.out_g_hi);
    }
    box_distance_flat(&sc.lo1, &sc.hi1, &sc.lo2, &sc.hi2)
}

/// Refine a WSPD into the bounded-separated pair decomposition.
pub fn derive_bspd(
    tree: &CompressedSplitTree,
    wspd: &[WspdPair],
    params: &SpannerParams,
) -> Result<Vec<BspdPair>> {
    if !verify_inequalities(params) {
        return Err(Error::InvalidParameter("parameter system fails its inequalities".into()));
    }
    if params.d != tree.dim() {
        return Err(Error::DimensionMismatch(params.d, tree.dim()));
    }
    let mut sc = FvScratch::new(tree.dim());
    let mut out = Vec::with_capacity(wspd.len());
    for p in wspd {
        let dist = floating_boxes(tree, params, p.a, p.b, &mut sc);
        out.push(BspdPair {
            b1: p.a,
            b1p: p.b,
            fv1: AABox { lo: sc.lo1.clone(), hi: sc.hi1.clone() },
            fv2: AABox { lo: sc.lo2.clone(), hi: sc.hi2.clone() },
            edge_distance: dist,
        });
    }
    Ok(out)
}

/// `N>=` neighbor sets: for each node, the partners whose parent box is at
/// least as large as the node's own parent box. Ties record both directions.
pub fn neighbor_sets(tree: &CompressedSplitTree, pairs: &[WspdPair]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new(); tree.node_count()];
    for p in pairs {
        let pa = tree.parent_of(p.a).expect("paired nodes are not the root");
        let pb = tree.parent_of(p.b).expect("paired nodes are not the root");
        let sa = tree.tv_size_of(pa);
        let sb = tree.tv_size_of(pb);
        if sb >= sa {
            out[p.a as usize].push(p.b);
        }
        if sa >= sb {
            out[p.b as usize].push(p.a);
        }
    }
    out
}

/// Compact record used by the construction pipelines: 16 bytes per pair.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PairRec {
    pub key: f64,
    pub a: u32,
    pub b: u32,
}

/// Default cap on materialized pairs per processing chunk (~0.9 GB).
pub(crate) const DEFAULT_CHUNK_LIMIT: usize = 56_000_000;

fn pair_order(
    tree: &CompressedSplitTree,
    x: &PairRec,
    ix: usize,
    y: &PairRec,
    iy: usize,
) -> std::cmp::Ordering {
    match x.key.partial_cmp(&y.key).unwrap() {
        std::cmp::Ordering::Equal => {}
        o => return o,
    }
    // ties: Euclidean distance between the base representatives, then the
    // emission index
    let dx = point_distance(
        tree.point(tree.representative(x.a)),
        tree.point(tree.representative(x.b)),
    );
    let dy = point_distance(
        tree.point(tree.representative(y.a)),
        tree.point(tree.representative(y.b)),
    );
    dx.partial_cmp(&dy).unwrap().then(ix.cmp(&iy))
}

/// Drive `handle` over every bounded-separated pair in increasing
/// edge-distance order without materializing more than `chunk_limit` pair
/// records at a time. Multi-chunk runs re-enumerate the decomposition per
/// chunk; the order seen by `handle` is identical either way.
pub(crate) fn process_pairs_sorted(
    tree: &CompressedSplitTree,
    params: &SpannerParams,
    chunk_limit: usize,
    mut handle: impl FnMut(u32, u32, &FvScratch),
) {
    let mut sc = FvScratch::new(tree.dim());

    // pass 1: count, and keep a thinned deterministic sample of keys
    let mut count = 0usize;
    const SAMPLE_CAP: usize = 1 << 16;
    let mut sample: Vec<f64> = Vec::with_capacity(SAMPLE_CAP);
    let mut stride = 1usize;
    enumerate_wspd(tree, params.wsep, |a, b| {
        if count % stride == 0 {
            if sample.len() == SAMPLE_CAP {
                let mut keep = 0;
                for i in (0..sample.len()).step_by(2) {
                    sample[keep] = sample[i];
                    keep += 1;
                }
                sample.truncate(keep);
                stride *= 2;
            }
            if count % stride == 0 {
                sample.push(floating_boxes(tree, params, a, b, &mut sc));
            }
        }
        count += 1;
    });
    if count == 0 {
        return;
    }

    let chunks = count.div_ceil(chunk_limit.max(1));
    let bounds: Vec<f64> = if chunks <= 1 {
        Vec::new()
    } else {
        sample.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let mut b: Vec<f64> = (1..chunks)
            .map(|j| sample[(j * sample.len() / chunks).min(sample.len() - 1)])
            .collect();
        b.dedup();
        b
    };

    let mut buf: Vec<PairRec> = Vec::new();
    let mut order: Vec<u32> = Vec::new();
    let ranges = bounds.len() + 1;
    for chunk in 0..ranges {
        let lo = if chunk == 0 { f64::NEG_INFINITY } else { bounds[chunk - 1] };
        let hi = if chunk == ranges - 1 { f64::INFINITY } else { bounds[chunk] };
        buf.clear();
        enumerate_wspd(tree, params.wsep, |a, b| {
            let key = floating_boxes(tree, params, a, b, &mut sc);
            if key >= lo && key < hi {
                buf.push(PairRec { key, a, b });
            }
        });
        order.clear();
        order.extend(0..buf.len() as u32);
        order.sort_unstable_by(|&x, &y| {
            pair_order(tree, &buf[x as usize], x as usize, &buf[y as usize], y as usize)
        });
        for &i in order.iter() {
            let r = buf[i as usize];
            let key = floating_boxes(tree, params, r.a, r.b, &mut sc);
            debug_assert_eq!(key, r.key);
            handle(r.a, r.b, &sc);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{box_distance, box_size, Point};
    use crate::params::choose_parameters;
    use crate::split_tree::build_tree;

    fn pts2(coords: &[[f64; 2]]) -> Vec<Point> {
        coords.iter().map(|c| Point::new(c.to_vec()).unwrap()).collect()
    }

    #[test]
    fn two_points_single_pair() {
        let t = build_tree(&pts2(&[[0.0, 0.0], [7.0, 1.0]]), 2.0).unwrap();
        let w = build_wspd(&t, 10.0);
        assert_eq!(w.len(), 1);
        assert!(t.is_leaf(w[0].a) && t.is_leaf(w[0].b));
    }

    #[test]
    fn coverage_identity_small() {
        // every unordered point pair is covered exactly once
        let coords: Vec<[f64; 2]> = (0..12)
            .map(|i| {
                let a = i as f64 * 0.7;
                [a.cos() * (1.0 + 0.11 * i as f64), a.sin() * (2.0 - 0.07 * i as f64)]
            })
            .collect();
        let t = build_tree(&pts2(&coords), 2.0).unwrap();
        let w = build_wspd(&t, 30.0);
        let n = coords.len();
        let mut seen = vec![0u32; n * n];
        for p in &w {
            for &x in t.points_in(p.a) {
                for &y in t.points_in(p.b) {
                    let (i, j) = (x.min(y) as usize, x.max(y) as usize);
                    seen[i * n + j] += 1;
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                assert_eq!(seen[i * n + j], 1, "pair ({i},{j})");
            }
        }
        let total: usize = w.iter().map(|p| t.point_count(p.a) * t.point_count(p.b)).sum();
        assert_eq!(total, n * (n - 1) / 2);
    }

    #[test]
    fn equal_size_floating_box_cases() {
        let container = AABox::new(vec![0.0, 0.0], vec![4.0, 4.0]).unwrap();
        let small = AABox::new(vec![3.8, 3.8], vec![3.9, 3.9]).unwrap();
        let big = AABox::new(vec![10.0, 10.0], vec![12.0, 12.0]).unwrap();
        let fv = find_equal_size_floating_box(&big, &small, &container).unwrap();
        let s = box_size(&fv);
        assert!((1.0..=2.0 + 1e-12).contains(&s));
        assert!(fv.contains_box(&small));
        assert!(container.contains_box(&fv));

        // already the right size: returned unchanged
        let exact = AABox::new(vec![1.0, 1.0], vec![3.0, 3.0]).unwrap();
        let fv2 = find_equal_size_floating_box(&big, &exact, &container).unwrap();
        assert_eq!(fv2, exact);

        // flush against the high container corner forces a flush output
        let flush = AABox::new(vec![3.8, 3.8], vec![4.0, 4.0]).unwrap();
        let fv3 = find_equal_size_floating_box(&big, &flush, &container).unwrap();
        assert_eq!(fv3.hi, vec![4.0, 4.0]);
    }

    #[test]
    fn bspd_pair_invariants_tiny() {
        let coords = [[0.0, 0.0], [0.3, 1.1], [5.0, 5.0], [9.0, 2.0], [2.0, 7.5], [8.0, 8.0]];
        let t = build_tree(&pts2(&coords), 2.0).unwrap();
        let params = choose_parameters(2.0, 2, 0).unwrap();
        let w = build_wspd(&t, params.wsep);
        let b = derive_bspd(&t, &w, &params).unwrap();
        assert_eq!(b.len(), w.len());
        let mut buf_lo = vec![0.0; 2];
        let mut buf_hi = vec![0.0; 2];
        for p in &b {
            let (tl, th) = t.tight_virtual(p.b1);
            let tv1 = AABox::new(tl.to_vec(), th.to_vec()).unwrap();
            let (tl2, th2) = t.tight_virtual(p.b1p);
            let tv2 = AABox::new(tl2.to_vec(), th2.to_vec()).unwrap();
            assert!(p.fv1.contains_box(&tv1));
            assert!(p.fv2.contains_box(&tv2));
            t.halved_parent_tv(p.b1, &mut buf_lo, &mut buf_hi);
            let c1 = AABox::new(buf_lo.clone(), buf_hi.clone()).unwrap();
            assert!(c1.contains_box(&p.fv1));
            let (s1, s2) = (box_size(&p.fv1), box_size(&p.fv2));
            let ratio = s1 / s2;
            assert!((0.5 - 1e-9..=2.0 + 1e-9).contains(&ratio), "ratio {ratio}");
            let d = box_distance(&p.fv1, &p.fv2).unwrap();
            assert!((d - p.edge_distance).abs() <= 1e-12 * d.max(1.0));
            let m = s1.max(s2);
            assert!(d >= params.rho1 * m - 1e-9 * m, "lower separation");
            assert!(d <= params.rho2 * m + 1e-9 * m, "upper separation");
        }
    }

    #[test]
    fn neighbor_sets_two_points() {
        let t = build_tree(&pts2(&[[0.0, 0.0], [7.0, 1.0]]), 2.0).unwrap();
        let w = build_wspd(&t, 10.0);
        let n = neighbor_sets(&t, &w);
        let (a, b) = (w[0].a, w[0].b);
        // tie: both leaves have the root as parent, both directions recorded
        assert_eq!(n[a as usize], vec![b]);
        assert_eq!(n[b as usize], vec![a]);
    }

    #[test]
    fn chunked_processing_matches_single_pass() {
        let coords: Vec<[f64; 2]> = (0..40)
            .map(|i| {
                let x = (i * 37 % 83) as f64 * 0.13;
                let y = (i * 61 % 97) as f64 * 0.09;
                [x, y]
            })
            .collect();
        let t = build_tree(&pts2(&coords), 2.0).unwrap();
        let params = choose_parameters(2.0, 2, 0).unwrap();
        let mut single: Vec<(u32, u32)> = Vec::new();
        process_pairs_sorted(&t, &params, usize::MAX, |a, b, _| single.push((a, b)));
        let mut chunked: Vec<(u32, u32)> = Vec::new();
        process_pairs_sorted(&t, &params, 7, |a, b, _| chunked.push((a, b)));
        assert!(!single.is_empty());
        assert_eq!(single, chunked);
    }
}
