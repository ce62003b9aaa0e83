//! Points, axis-aligned boxes, cones and cone frames.
//!
//! Everything else in the crate speaks this vocabulary. Boxes are closed
//! axis-aligned products of intervals; cones are represented by a unit axis
//! and a half-angle, with closed boundaries so a frame covers every
//! direction without gaps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used for all angle comparisons, absorbing `acos` rounding.
pub const ANGLE_TOL: f64 = 1e-9;

/// A point in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("point needs dimension >= 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoordinate);
        }
        Ok(Point { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Closed axis-aligned box `{ x : lo[i] <= x[i] <= hi[i] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AABox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AABox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch(lo.len(), hi.len()));
        }
        if lo.is_empty() {
            return Err(Error::InvalidParameter("box needs dimension >= 1".into()));
        }
        if lo.iter().chain(hi.iter()).any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoordinate);
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::InvalidParameter("box has lo > hi".into()));
        }
        Ok(AABox { lo, hi })
    }

    /// Smallest enclosing box of a nonempty point slice (flat layout).
    pub fn enclosing_flat(pts: &[f64], dim: usize, idx: &[u32]) -> AABox {
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &p in idx {
            let c = &pts[p as usize * dim..(p as usize + 1) * dim];
            for i in 0..dim {
                lo[i] = lo[i].min(c[i]);
                hi[i] = hi[i].max(c[i]);
            }
        }
        AABox { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        self.lo.iter().zip(&self.hi).zip(p).all(|((l, h), c)| *l <= *c && *c <= *h)
    }

    pub fn contains_box(&self, other: &AABox) -> bool {
        self.lo.iter().zip(&other.lo).all(|(a, b)| a <= b)
            && self.hi.iter().zip(&other.hi).all(|(a, b)| a >= b)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    /// Longest side over the shortest; degenerate boxes report 1.
    pub fn aspect_ratio(&self) -> f64 {
        let mut longest = 0.0f64;
        let mut shortest = f64::INFINITY;
        for (l, h) in self.lo.iter().zip(&self.hi) {
            let s = h - l;
            longest = longest.max(s);
            shortest = shortest.min(s);
        }
        if longest == 0.0 {
            1.0
        } else {
            longest / shortest
        }
    }
}

/// Size of a box: the length of its longest side.
pub fn box_size(b: &AABox) -> f64 {
    box_size_flat(&b.lo, &b.hi)
}

#[inline]
pub(crate) fn box_size_flat(lo: &[f64], hi: &[f64]) -> f64 {
    let mut s = 0.0f64;
    for i in 0..lo.len() {
        s = s.max(hi[i] - lo[i]);
    }
    s
}

/// Euclidean distance between two boxes: `min_{x in b1, y in b2} ||x - y||`.
pub fn box_distance(b1: &AABox, b2: &AABox) -> Result<f64> {
    if b1.dim() != b2.dim() {
        return Err(Error::DimensionMismatch(b1.dim(), b2.dim()));
    }
    Ok(box_distance_flat(&b1.lo, &b1.hi, &b2.lo, &b2.hi))
}

#[inline]
pub(crate) fn box_distance_flat(lo1: &[f64], hi1: &[f64], lo2: &[f64], hi2: &[f64]) -> f64 {
    let mut sq = 0.0f64;
    for i in 0..lo1.len() {
        let gap = (lo1[i] - hi2[i]).max(lo2[i] - hi1[i]).max(0.0);
        sq += gap * gap;
    }
    sq.sqrt()
}

#[inline]
pub(crate) fn point_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut sq = 0.0f64;
    for i in 0..a.len() {
        let g = a[i] - b[i];
        sq += g * g;
    }
    sq.sqrt()
}

/// Angle between two nonzero vectors, in `[0, pi]`.
pub fn angle_between(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(u.len(), v.len()));
    }
    let nu = norm(u);
    let nv = norm(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::Precondition("angle of zero vector is undefined".into()));
    }
    let cosv = (dot(u, v) / (nu * nv)).clamp(-1.0, 1.0);
    Ok(cosv.acos())
}

#[inline]
pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

#[inline]
pub(crate) fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

/// A cone of directions: all unit vectors within `half_angle` of `axis`.
/// Boundaries are closed, so adjacent frame cones overlap rather than gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub axis: Vec<f64>,
    pub half_angle: f64,
}

impl Cone {
    pub fn new(axis: Vec<f64>, half_angle: f64) -> Result<Self> {
        let n = norm(&axis);
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("cone axis must be a unit vector".into()));
        }
        if !(half_angle > 0.0 && half_angle < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidParameter("cone half-angle must be in (0, pi/2)".into()));
        }
        Ok(Cone { axis, half_angle })
    }

    /// Direction membership with the global angle tolerance.
    pub fn contains_direction(&self, dir: &[f64]) -> bool {
        match angle_between(&self.axis, dir) {
            Ok(a) => a <= self.half_angle + ANGLE_TOL,
            Err(_) => false,
        }
    }
}

/// True iff `q` lies in the cone with apex `apex`. Errors when `q == apex`.
pub fn cone_contains(apex: &Point, cone: &Cone, q: &Point) -> Result<bool> {
    if apex.dim() != q.dim() {
        return Err(Error::DimensionMismatch(apex.dim(), q.dim()));
    }
    let dir: Vec<f64> = q.coords.iter().zip(&apex.coords).map(|(a, b)| a - b).collect();
    if norm(&dir) == 0.0 {
        return Err(Error::Precondition("cone membership undefined at the apex".into()));
    }
    let ang = angle_between(&dir, &cone.axis)?;
    Ok(ang <= cone.half_angle + ANGLE_TOL)
}

/// A finite family of cones covering every direction of `R^d`.
///
/// In the plane the frame is a fan of equal sectors and cone lookup is pure
/// index arithmetic; in higher dimensions the axes come from projecting a
/// uniform grid on every cube face onto the sphere.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeFrame {
    pub cones: Vec<Cone>,
    /// `2 * max half-angle`: the per-cone angular span bound.
    pub angular_span: f64,
    dim: usize,
    /// Number of sectors when `dim == 2` (index arithmetic fast path).
    sectors: usize,
}

impl ConeFrame {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.cones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cones.is_empty()
    }

    /// Indices of every frame cone containing the given direction.
    pub fn cones_containing(&self, dir: &[f64]) -> Vec<u32> {
        if self.dim == 2 {
            let c = self.sector_of(dir);
            let m = self.sectors as u32;
            let mut out = Vec::with_capacity(2);
            for cand in [(c + m - 1) % m, c, (c + 1) % m] {
                if self.cones[cand as usize].contains_direction(dir) {
                    out.push(cand);
                }
            }
            out.sort_unstable();
            out.dedup();
            out
        } else {
            (0..self.cones.len() as u32)
                .filter(|&i| self.cones[i as usize].contains_direction(dir))
                .collect()
        }
    }

    /// Lowest-index cone containing the direction. The frame covers the
    /// sphere, so this always exists.
    pub fn primary_cone(&self, dir: &[f64]) -> u32 {
        if self.dim == 2 {
            let c = self.sector_of(dir);
            let m = self.sectors as u32;
            let prev = (c + m - 1) % m;
            let next = (c + 1) % m;
            let mut best = u32::MAX;
            for cand in [prev, c, next] {
                if self.cones[cand as usize].contains_direction(dir) && cand < best {
                    best = cand;
                }
            }
            debug_assert!(best != u32::MAX);
            best
        } else {
            *self
                .cones_containing(dir)
                .first()
                .expect("frame covers every direction")
        }
    }

    fn sector_of(&self, dir: &[f64]) -> u32 {
        debug_assert_eq!(self.dim, 2);
        let ang = dir[1].atan2(dir[0]).rem_euclid(std::f64::consts::TAU);
        let m = self.sectors;
        let sector = (ang / (std::f64::consts::TAU / m as f64)) as usize;
        sector.min(m - 1) as u32
    }
}

/// Build a frame of angular span at most `alpha` covering `R^d`.
pub fn build_frame(alpha: f64, dim: usize) -> Result<ConeFrame> {
    if !(alpha > 0.0 && alpha < std::f64::consts::FRAC_PI_3) {
        return Err(Error::InvalidParameter(format!(
            "frame span must be in (0, pi/3), got {alpha}"
        )));
    }
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    if dim == 1 {
        let half = alpha / 2.0;
        let cones = vec![Cone { axis: vec![1.0], half_angle: half }, Cone {
            axis: vec![-1.0],
            half_angle: half,
        }];
        return Ok(ConeFrame { cones, angular_span: alpha, dim, sectors: 0 });
    }
    if dim == 2 {
        let m = (std::f64::consts::TAU / alpha).ceil() as usize;
        let sector = std::f64::consts::TAU / m as f64;
        let half = sector / 2.0;
        let cones = (0..m)
            .map(|k| {
                let a = k as f64 * sector + half;
                Cone { axis: vec![a.cos(), a.sin()], half_angle: half }
            })
            .collect();
        return Ok(ConeFrame { cones, angular_span: sector, dim, sectors: m });
    }
    // d >= 3: project a g^(d-1) grid on each face of the cube [-1,1]^d onto
    // the sphere. The half-angle per cell is an upper bound on the angular
    // radius of the cell from its center, so the cones cover by construction.
    let mut g = 1usize;
    loop {
        let radius = max_cell_angular_radius(dim, g);
        if 2.0 * radius <= alpha {
            break;
        }
        g += 1;
        if g > 4096 {
            return Err(Error::InvalidParameter("frame span too small".into()));
        }
    }
    let radius = max_cell_angular_radius(dim, g);
    let mut cones = Vec::new();
    let mut cell = vec![0usize; dim - 1];
    for face_dim in 0..dim {
        for face_sign in [-1.0f64, 1.0] {
            cell.iter_mut().for_each(|c| *c = 0);
            loop {
                // cell center in face coordinates
                let mut axis = vec![0.0; dim];
                axis[face_dim] = face_sign;
                let mut j = 0;
                for i in 0..dim {
                    if i != face_dim {
                        axis[i] = -1.0 + (2.0 * cell[j] as f64 + 1.0) / g as f64;
                        j += 1;
                    }
                }
                let n = norm(&axis);
                axis.iter_mut().for_each(|c| *c /= n);
                cones.push(Cone { axis, half_angle: radius.min(alpha / 2.0) });
                // advance the (d-1)-digit counter
                let mut i = 0;
                loop {
                    if i == dim - 1 {
                        break;
                    }
                    cell[i] += 1;
                    if cell[i] < g {
                        break;
                    }
                    cell[i] = 0;
                    i += 1;
                }
                if i == dim - 1 {
                    break;
                }
            }
        }
    }
    Ok(ConeFrame { cones, angular_span: 2.0 * radius.min(alpha / 2.0), dim, sectors: 0 })
}

/// Upper bound on the angle between a grid cell's center direction and any
/// point of the cell, maximized over the cells of one cube face.
///
/// The maximum of the angle along a segment is attained at an endpoint or at
/// the single critical point of `t -> cos angle(p0 + t v, c)`, which solves a
/// linear equation; sampling every cell edge at those points is exact for the
/// edges, and a fine subdivision of the cell interior plus the unit-Lipschitz
/// bound of the angle map (|p| >= 1 on the face) covers the rest.
fn max_cell_angular_radius(dim: usize, g: usize) -> f64 {
    let f = dim - 1; // face dimension
    let mut worst = 0.0f64;
    let mut cell = vec![0usize; f];
    loop {
        // cell on the face x_d = 1, coordinates in [-1,1]^(d-1)
        let lo: Vec<f64> = cell.iter().map(|&c| -1.0 + 2.0 * c as f64 / g as f64).collect();
        let hi: Vec<f64> =
            cell.iter().map(|&c| -1.0 + 2.0 * (c as f64 + 1.0) / g as f64).collect();
        let mut center: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
        center.push(1.0);

        let mut cell_worst = 0.0f64;
        // corners
        let corners = 1usize << f;
        let mut corner = vec![0.0; dim];
        for mask in 0..corners {
            for i in 0..f {
                corner[i] = if mask >> i & 1 == 1 { hi[i] } else { lo[i] };
            }
            corner[f] = 1.0;
            cell_worst = cell_worst.max(angle_between(&center, &corner).unwrap());
        }
        // interior grid + Lipschitz margin (angle is 1-Lipschitz in p since |p| >= 1)
        const SUB: usize = 8;
        let mut probe = vec![0.0; dim];
        probe[f] = 1.0;
        let mut digits = vec![0usize; f];
        loop {
            for i in 0..f {
                probe[i] = lo[i] + (hi[i] - lo[i]) * digits[i] as f64 / SUB as f64;
            }
            cell_worst = cell_worst.max(angle_between(&center, &probe).unwrap());
            let mut i = 0;
            loop {
                if i == f {
                    break;
                }
                digits[i] += 1;
                if digits[i] <= SUB {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
            if i == f {
                break;
            }
        }
        let step = (2.0 / g as f64) / SUB as f64;
        let margin = 0.5 * step * (f as f64).sqrt();
        worst = worst.max(cell_worst + margin);

        let mut i = 0;
        loop {
            if i == f {
                break;
            }
            cell[i] += 1;
            if cell[i] < g {
                break;
            }
            cell[i] = 0;
            i += 1;
        }
        if i == f {
            break;
        }
    }
    worst
}

/// Subset of frame cones through which every point of `base` sees all of
/// `target`: all cones whose axis lies within `theta1 + half_angle` of the
/// center-to-center direction.
pub fn general_cone_direction(
    base: &AABox,
    target: &AABox,
    frame: &ConeFrame,
    theta1: f64,
) -> Result<Vec<u32>> {
    if base.dim() != target.dim() || base.dim() != frame.dim() {
        return Err(Error::DimensionMismatch(base.dim(), frame.dim()));
    }
    let d = box_distance(base, target)?;
    if d <= 0.0 {
        return Err(Error::Precondition(
            "general cone direction needs disjoint boxes".into(),
        ));
    }
    let bc = base.center();
    let tc = target.center();
    let dir: Vec<f64> = tc.iter().zip(&bc).map(|(a, b)| a - b).collect();
    let mut out = Vec::new();
    for (i, cone) in frame.cones.iter().enumerate() {
        let ang = angle_between(&cone.axis, &dir)?;
        if ang <= theta1 + cone.half_angle + ANGLE_TOL {
            out.push(i as u32);
        }
    }
    Ok(out)
}

/// Max pairwise angle between the axes of the given cones (the frame
/// analogue of the angular span of a set of bases).
pub fn cone_set_span(frame: &ConeFrame, cones: &[u32]) -> f64 {
    let mut span = 0.0f64;
    for (i, &a) in cones.iter().enumerate() {
        for &b in &cones[i + 1..] {
            let ang =
                angle_between(&frame.cones[a as usize].axis, &frame.cones[b as usize].axis)
                    .unwrap();
            span = span.max(ang);
        }
    }
    span
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boxed(lo: &[f64], hi: &[f64]) -> AABox {
        AABox::new(lo.to_vec(), hi.to_vec()).unwrap()
    }

    #[test]
    fn box_distance_overlapping_is_zero() {
        let b1 = boxed(&[0.0, 0.0], &[1.0, 1.0]);
        let b2 = boxed(&[0.5, 0.5], &[1.5, 1.5]);
        assert_eq!(box_distance(&b1, &b2).unwrap(), 0.0);
    }

    #[test]
    fn box_distance_axis_gap() {
        let b1 = boxed(&[0.0, 0.0], &[1.0, 1.0]);
        let b2 = boxed(&[2.0, 0.0], &[3.0, 1.0]);
        assert_eq!(box_distance(&b1, &b2).unwrap(), 1.0);
    }

    #[test]
    fn box_distance_dimension_mismatch() {
        let b1 = boxed(&[0.0, 0.0], &[1.0, 1.0]);
        let b2 = boxed(&[0.0], &[1.0]);
        assert!(box_distance(&b1, &b2).is_err());
    }

    #[test]
    fn box_size_cases() {
        assert_eq!(box_size(&boxed(&[0.0, 0.0], &[1.0, 2.0])), 2.0);
        assert_eq!(box_size(&boxed(&[3.0, 3.0], &[3.0, 3.0])), 0.0);
        assert_eq!(box_size(&boxed(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0])), 1.0);
    }

    #[test]
    fn frame_planar_sector_counts() {
        let f = build_frame(std::f64::consts::FRAC_PI_4, 2).unwrap();
        assert_eq!(f.len(), 8);
        for c in &f.cones {
            assert!((c.half_angle - std::f64::consts::PI / 8.0).abs() < 1e-12);
        }
        let f16 = build_frame(std::f64::consts::PI / 8.0, 2).unwrap();
        assert_eq!(f16.len(), 16);
    }

    #[test]
    fn frame_rejects_bad_alpha() {
        assert!(build_frame(0.0, 2).is_err());
        assert!(build_frame(1.2, 2).is_err()); // >= pi/3
    }

    #[test]
    fn cone_contains_basics() {
        let apex = Point::new(vec![0.0, 0.0]).unwrap();
        let cone = Cone::new(vec![1.0, 0.0], std::f64::consts::FRAC_PI_4).unwrap();
        let a = Point::new(vec![1.0, 0.0]).unwrap();
        let b = Point::new(vec![0.0, 1.0]).unwrap();
        let boundary = Point::new(vec![1.0, 1.0]).unwrap();
        assert!(cone_contains(&apex, &cone, &a).unwrap());
        assert!(!cone_contains(&apex, &cone, &b).unwrap());
        assert!(cone_contains(&apex, &cone, &boundary).unwrap());
        assert!(cone_contains(&apex, &cone, &apex).is_err());
    }

    #[test]
    fn angle_between_cases() {
        assert!((angle_between(&[1.0, 0.0], &[0.0, 1.0]).unwrap()
            - std::f64::consts::FRAC_PI_2)
            .abs()
            < 1e-15);
        assert_eq!(angle_between(&[2.0, 0.0], &[5.0, 0.0]).unwrap(), 0.0);
        assert!((angle_between(&[1.0, 0.0], &[-1.0, 0.0]).unwrap() - std::f64::consts::PI)
            .abs()
            < 1e-15);
        assert!(angle_between(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn general_cone_direction_collinear() {
        let frame = build_frame(std::f64::consts::FRAC_PI_4, 2).unwrap();
        let base = boxed(&[0.0, -0.001], &[0.001, 0.001]);
        let target = boxed(&[100.0, -0.001], &[100.001, 0.001]);
        let cones = general_cone_direction(&base, &target, &frame, 1e-6).unwrap();
        // the +x direction lies on the shared boundary of sectors 7 and 0
        for &c in &cones {
            assert!(frame.cones[c as usize].contains_direction(&[1.0, 0.0]));
        }
        assert!(!cones.is_empty());
        let overlapping = boxed(&[0.0, 0.0], &[1.0, 1.0]);
        assert!(general_cone_direction(&overlapping, &overlapping, &frame, 0.1).is_err());
    }

    #[test]
    fn cones_containing_agrees_with_scan_in_plane() {
        let frame = build_frame(0.11, 2).unwrap();
        for k in 0..500 {
            let a = k as f64 * 0.01273;
            let dir = [a.cos(), a.sin()];
            let fast = frame.cones_containing(&dir);
            let slow: Vec<u32> = (0..frame.len() as u32)
                .filter(|&i| frame.cones[i as usize].contains_direction(&dir))
                .collect();
            assert_eq!(fast, slow, "direction angle {a}");
        }
    }
}
