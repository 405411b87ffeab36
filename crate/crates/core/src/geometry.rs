//! Planar oriented-box primitives.
//!
//! Boxes are closed sets. Two boxes whose boundaries merely touch do not
//! overlap, so a minimum translation vector is never zero-length.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

/// Penetration depths at or below this are treated as touching.
pub const CONTACT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at angle `theta` from the +x axis.
    #[inline]
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { x: c, y: s }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = (theta + PI).rem_euclid(2.0 * PI) - PI;
    // rem_euclid can round up to exactly 2*pi for inputs a hair below a multiple of it
    if t >= PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// Oriented rectangle in the table plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obb2 {
    pub center: Vec2,
    pub hx: f64,
    pub hy: f64,
    pub yaw: f64,
}

impl Obb2 {
    pub fn new(center: Vec2, hx: f64, hy: f64, yaw: f64) -> Self {
        Self {
            center,
            hx,
            hy,
            yaw: wrap_angle(yaw),
        }
    }

    pub fn axis_aligned(center: Vec2, hx: f64, hy: f64) -> Self {
        Self::new(center, hx, hy, 0.0)
    }

    pub fn is_valid(&self) -> bool {
        self.center.is_finite()
            && self.hx > 0.0
            && self.hy > 0.0
            && self.hx.is_finite()
            && self.hy.is_finite()
            && (-PI..PI).contains(&self.yaw)
    }

    /// Local x and y axes in world coordinates.
    #[inline]
    pub fn axes(&self) -> [Vec2; 2] {
        let (s, c) = self.yaw.sin_cos();
        [Vec2::new(c, s), Vec2::new(-s, c)]
    }

    /// Corners in counter-clockwise order, starting at local (+hx, +hy).
    pub fn corners(&self) -> [Vec2; 4] {
        let [u, v] = self.axes();
        let a = u * self.hx;
        let b = v * self.hy;
        let c = self.center;
        [c + a + b, c - a + b, c - a - b, c + a - b]
    }

    /// Closed point-membership test.
    #[inline]
    pub fn contains(&self, p: Vec2) -> bool {
        let [u, v] = self.axes();
        let d = p - self.center;
        d.dot(u).abs() <= self.hx && d.dot(v).abs() <= self.hy
    }

    pub fn translated(&self, by: Vec2) -> Self {
        Self {
            center: self.center + by,
            ..*self
        }
    }

    /// Half-width of the box's projection onto a unit axis.
    #[inline]
    fn projected_radius(&self, axis: Vec2) -> f64 {
        let [u, v] = self.axes();
        self.hx * u.dot(axis).abs() + self.hy * v.dot(axis).abs()
    }
}

pub fn obb_corners(b: &Obb2) -> [Vec2; 4] {
    b.corners()
}

/// Separating-axis test over the four face normals. Returns the minimum
/// translation that moves `a` out of `b`, or `None` if the boxes are disjoint
/// or only touch.
pub fn obb_overlap_mtv(a: &Obb2, b: &Obb2) -> Option<Vec2> {
    let [au, av] = a.axes();
    let [bu, bv] = b.axes();
    let delta = a.center - b.center;
    let mut best: Option<(f64, Vec2)> = None;
    for axis in [au, av, bu, bv] {
        let dist = delta.dot(axis);
        let pen = a.projected_radius(axis) + b.projected_radius(axis) - dist.abs();
        if pen <= CONTACT_EPS {
            return None;
        }
        if best.is_none_or(|(p, _)| pen < p) {
            // concentric boxes have no preferred side; fall back to +axis
            let dir = if dist < 0.0 { -axis } else { axis };
            best = Some((pen, dir));
        }
    }
    best.map(|(pen, dir)| dir * pen)
}

pub fn obb_overlaps(a: &Obb2, b: &Obb2) -> bool {
    obb_overlap_mtv(a, b).is_some()
}

fn point_segment_dist_sq(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    let t = if len_sq > 0.0 {
        ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p - (a + ab * t)).norm_sq()
}

fn segments_cross(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2) -> bool {
    let cross = |o: Vec2, p: Vec2, q: Vec2| (p.x - o.x) * (q.y - o.y) - (p.y - o.y) * (q.x - o.x);
    let d1 = cross(b0, b1, a0);
    let d2 = cross(b0, b1, a1);
    let d3 = cross(a0, a1, b0);
    let d4 = cross(a0, a1, b1);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

fn segment_dist_sq(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2) -> f64 {
    if segments_cross(a0, a1, b0, b1) {
        return 0.0;
    }
    point_segment_dist_sq(a0, b0, b1)
        .min(point_segment_dist_sq(a1, b0, b1))
        .min(point_segment_dist_sq(b0, a0, a1))
        .min(point_segment_dist_sq(b1, a0, a1))
}

/// Minimum distance between the boundaries of two boxes; zero when they
/// overlap.
pub fn obb_separation_distance(a: &Obb2, b: &Obb2) -> f64 {
    if obb_overlaps(a, b) {
        return 0.0;
    }
    let ca = a.corners();
    let cb = b.corners();
    let mut best = f64::INFINITY;
    for i in 0..4 {
        let (a0, a1) = (ca[i], ca[(i + 1) % 4]);
        for j in 0..4 {
            let (b0, b1) = (cb[j], cb[(j + 1) % 4]);
            best = best.min(segment_dist_sq(a0, a1, b0, b1));
        }
    }
    best.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_4;

    fn same_corner_set(a: [Vec2; 4], b: [Vec2; 4]) -> bool {
        a.iter()
            .all(|p| b.iter().any(|q| (*p - *q).norm() < 1e-12))
    }

    fn signed_area(c: &[Vec2; 4]) -> f64 {
        (0..4)
            .map(|i| {
                let (p, q) = (c[i], c[(i + 1) % 4]);
                p.x * q.y - q.x * p.y
            })
            .sum::<f64>()
            / 2.0
    }

    #[test]
    fn unit_square_corners() {
        let b = Obb2::axis_aligned(Vec2::ZERO, 1.0, 1.0);
        let want = [
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
            Vec2::new(-1.0, -1.0),
            Vec2::new(1.0, -1.0),
        ];
        assert!(same_corner_set(b.corners(), want));
        assert!(signed_area(&b.corners()) > 0.0);
        let r = Obb2::new(Vec2::ZERO, 1.0, 1.0, PI / 2.0);
        assert!(same_corner_set(r.corners(), want));
    }

    #[test]
    fn rotated_rect_corners() {
        let b = Obb2::new(Vec2::new(1.0, 0.0), 1.0, 0.5, FRAC_PI_4);
        let c = b.corners();
        let (s, co) = FRAC_PI_4.sin_cos();
        // (+hx,+hy) rotated by yaw
        let want0 = Vec2::new(1.0 + co * 1.0 - s * 0.5, s * 1.0 + co * 0.5);
        assert!((c[0] - want0).norm() < 1e-12);
        let centroid = c.iter().fold(Vec2::ZERO, |acc, p| acc + *p) * 0.25;
        assert!((centroid - Vec2::new(1.0, 0.0)).norm() < 1e-12);
        assert!((signed_area(&c) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_squares() {
        let a = Obb2::axis_aligned(Vec2::ZERO, 1.0, 1.0);
        let b = Obb2::axis_aligned(Vec2::new(3.0, 0.0), 1.0, 1.0);
        assert!(obb_overlap_mtv(&a, &b).is_none());
    }

    #[test]
    fn mtv_pushes_first_away_from_second() {
        let a = Obb2::axis_aligned(Vec2::ZERO, 0.5, 0.5);
        let b = Obb2::axis_aligned(Vec2::new(0.6, 0.0), 0.5, 0.5);
        let m = obb_overlap_mtv(&a, &b).unwrap();
        assert!((m.x + 0.4).abs() < 1e-12 && m.y.abs() < 1e-12);
        let m2 = obb_overlap_mtv(&b, &a).unwrap();
        assert!((m2.x - 0.4).abs() < 1e-12);
    }

    #[test]
    fn touching_is_not_overlap() {
        let a = Obb2::axis_aligned(Vec2::ZERO, 0.5, 0.5);
        let b = Obb2::axis_aligned(Vec2::new(1.0, 0.0), 0.5, 0.5);
        assert!(obb_overlap_mtv(&a, &b).is_none());
        assert_eq!(obb_separation_distance(&a, &b), 0.0);
    }

    #[test]
    fn rotated_mtv_resolves() {
        let a = Obb2::new(Vec2::new(0.1, 0.05), 0.3, 0.2, FRAC_PI_4);
        let b = Obb2::new(Vec2::new(0.4, 0.2), 0.25, 0.1, -0.3);
        let m = obb_overlap_mtv(&a, &b).expect("constructed to overlap");
        let moved = a.translated(m);
        assert!(obb_overlap_mtv(&moved, &b).is_none());
        // any shorter step along the same direction keeps them overlapping
        let shorter = a.translated(m * 0.99);
        assert!(obb_overlap_mtv(&shorter, &b).is_some());
    }

    #[test]
    fn separation_examples() {
        let a = Obb2::axis_aligned(Vec2::ZERO, 0.02, 0.02);
        let b = Obb2::axis_aligned(Vec2::new(0.1, 0.0), 0.02, 0.02);
        assert!((obb_separation_distance(&a, &b) - 0.06).abs() < 1e-12);
        let c = Obb2::axis_aligned(Vec2::new(0.03, 0.0), 0.02, 0.02);
        assert_eq!(obb_separation_distance(&a, &c), 0.0);
    }

    fn boundary_samples(b: &Obb2, per_edge: usize) -> Vec<Vec2> {
        let c = b.corners();
        let mut out = Vec::with_capacity(4 * per_edge);
        for i in 0..4 {
            let (p, q) = (c[i], c[(i + 1) % 4]);
            for k in 0..per_edge {
                let t = k as f64 / per_edge as f64;
                out.push(p + (q - p) * t);
            }
        }
        out
    }

    #[test]
    fn separation_matches_boundary_sampling() {
        // corner-to-corner diagonal arrangement
        let a = Obb2::new(Vec2::ZERO, 0.02, 0.01, 0.3);
        let b = Obb2::new(Vec2::new(0.06, 0.05), 0.015, 0.025, -0.9);
        let sa = boundary_samples(&a, 2000);
        let sb = boundary_samples(&b, 2000);
        let brute = sa
            .iter()
            .flat_map(|p| sb.iter().map(move |q| (*p - *q).norm()))
            .fold(f64::INFINITY, f64::min);
        let d = obb_separation_distance(&a, &b);
        assert!(d > 0.0);
        assert!((d - brute).abs() < 1e-4, "sat {d} brute {brute}");
    }

    fn random_box(rng: &mut ChaCha8Rng) -> Obb2 {
        Obb2::new(
            Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            rng.gen_range(0.05..0.6),
            rng.gen_range(0.05..0.6),
            rng.gen_range(-PI..PI),
        )
    }

    #[test]
    fn sat_agrees_with_point_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 1000 {
            let a = random_box(&mut rng);
            let b = random_box(&mut rng);
            // dense interior sampling of `a`, tested against `b`
            let n = 60;
            let [u, v] = a.axes();
            let mut hit = false;
            'outer: for i in 0..=n {
                for j in 0..=n {
                    let lx = a.hx * (2.0 * i as f64 / n as f64 - 1.0);
                    let ly = a.hy * (2.0 * j as f64 / n as f64 - 1.0);
                    if b.contains(a.center + u * lx + v * ly) {
                        hit = true;
                        break 'outer;
                    }
                }
            }
            let sat = obb_overlaps(&a, &b);
            if hit {
                assert!(sat, "sampling found overlap SAT missed: {a:?} {b:?}");
            } else if sat {
                // sampling can miss slivers; the MTV must then be tiny
                let depth = obb_overlap_mtv(&a, &b).unwrap().norm();
                assert!(depth < 0.05, "SAT overlap {depth} but no sample hit");
            }
            checked += 1;
        }
    }

    fn arb_box() -> impl Strategy<Value = Obb2> {
        (-1.0..1.0f64, -1.0..1.0f64, 0.02..0.5f64, 0.02..0.5f64, -PI..PI)
            .prop_map(|(x, y, hx, hy, yaw)| Obb2::new(Vec2::new(x, y), hx, hy, yaw))
    }

    proptest! {
        #[test]
        fn separation_is_symmetric_and_consistent(a in arb_box(), b in arb_box()) {
            let d_ab = obb_separation_distance(&a, &b);
            let d_ba = obb_separation_distance(&b, &a);
            prop_assert!((d_ab - d_ba).abs() < 1e-12);
            let overlap = obb_overlaps(&a, &b);
            if d_ab > 1e-9 {
                prop_assert!(!overlap);
            }
            if overlap {
                prop_assert_eq!(d_ab, 0.0);
            }
        }

        #[test]
        fn mtv_separates(a in arb_box(), b in arb_box()) {
            if let Some(m) = obb_overlap_mtv(&a, &b) {
                let moved = a.translated(m);
                // re-test with 1e-9 slack
                let residual = obb_overlap_mtv(&moved, &b).map_or(0.0, |r| r.norm());
                prop_assert!(residual < 1e-9);
            }
        }

        #[test]
        fn translation_invariance(a in arb_box(), b in arb_box(), tx in -5.0..5.0f64, ty in -5.0..5.0f64) {
            let t = Vec2::new(tx, ty);
            let (a2, b2) = (a.translated(t), b.translated(t));
            let d1 = obb_separation_distance(&a, &b);
            let d2 = obb_separation_distance(&a2, &b2);
            prop_assert!((d1 - d2).abs() < 1e-9);
            let m1 = obb_overlap_mtv(&a, &b).map_or(0.0, |m| m.norm());
            let m2 = obb_overlap_mtv(&a2, &b2).map_or(0.0, |m| m.norm());
            prop_assert!((m1 - m2).abs() < 1e-9);
        }

        #[test]
        fn wrap_angle_range(t in -100.0..100.0f64) {
            let w = wrap_angle(t);
            prop_assert!((-PI..PI).contains(&w));
            prop_assert!(((t - w) / (2.0 * PI)).fract().abs() < 1e-9
                || (1.0 - ((t - w) / (2.0 * PI)).fract().abs()) < 1e-9);
        }
    }
}
