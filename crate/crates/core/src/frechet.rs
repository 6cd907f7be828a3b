//! The perpendicular-cross benchmark instance and its closed-form optimum.
//!
//! For the two unit-half-length segments crossing at the origin, the set of
//! minimizers of `d_H²(s, s1) + d_H²(s, s2)` has an exact description: a
//! segment is optimal if and only if it passes through the origin and its
//! endpoints lie in two different closed regions `A1..A4`, where `A_i` is
//! the part of the closed unit disk in quadrant `i` outside the two
//! half-radius disks sitting on that quadrant's axes. The optimal value is
//! exactly 1. This module makes those predicates executable so the rest of
//! the crate can be validated against a known continuous optimum.
//!
//! Membership uses non-strict inequalities throughout (the regions are
//! closed), so points on shared boundary arcs certify several regions; the
//! optimality predicate accepts a segment whenever some pair of distinct
//! region labels can be chosen for its endpoints.

use rand::Rng;

use crate::geometry::{point_segment_distance_sq, Point, Segment, DEFAULT_TOL};
use crate::objective::{Weighted, WeightedSegment};

/// One of the four closed quadrant regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    A1,
    A2,
    A3,
    A4,
}

const REGIONS: [Region; 4] = [Region::A1, Region::A2, Region::A3, Region::A4];

/// A subset of `{A1, A2, A3, A4}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RegionSet(u8);

impl RegionSet {
    pub fn empty() -> Self {
        RegionSet(0)
    }

    pub fn insert(&mut self, r: Region) {
        self.0 |= 1 << r as u8;
    }

    pub fn contains(&self, r: Region) -> bool {
        self.0 & (1 << r as u8) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = Region> + '_ {
        REGIONS.into_iter().filter(|r| self.contains(*r))
    }

    /// Whether two labels `i != j` can be picked with `i` from `self` and
    /// `j` from `other`.
    pub fn has_distinct_pair(&self, other: &RegionSet) -> bool {
        if self.is_empty() || other.is_empty() {
            return false;
        }
        let union = RegionSet(self.0 | other.0);
        union.len() >= 2
    }
}

/// The benchmark instance: a horizontal and a vertical segment of length 2
/// crossing at the origin.
pub fn instance() -> (Segment, Segment) {
    (
        Segment::new(Point::new(-1.0, 0.0), Point::new(1.0, 0.0)).unwrap(),
        Segment::new(Point::new(0.0, -1.0), Point::new(0.0, 1.0)).unwrap(),
    )
}

/// The instance as a unit-weight input set.
pub fn instance_items() -> Vec<WeightedSegment> {
    let (s1, s2) = instance();
    vec![Weighted::unit(s1), Weighted::unit(s2)]
}

/// Sum of squared Hausdorff distances from `s` to the two instance segments.
pub fn instance_cost(s: &Segment) -> f64 {
    let (s1, s2) = instance();
    crate::geometry::hausdorff_segments_sq(s, &s1) + crate::geometry::hausdorff_segments_sq(s, &s2)
}

/// Disk centers excluded from each quadrant region.
fn quadrant_disks(r: Region) -> [Point; 2] {
    match r {
        Region::A1 => [Point::new(0.5, 0.0), Point::new(0.0, 0.5)],
        Region::A2 => [Point::new(-0.5, 0.0), Point::new(0.0, 0.5)],
        Region::A3 => [Point::new(-0.5, 0.0), Point::new(0.0, -0.5)],
        Region::A4 => [Point::new(0.5, 0.0), Point::new(0.0, -0.5)],
    }
}

fn quadrant_signs(r: Region) -> (f64, f64) {
    match r {
        Region::A1 => (1.0, 1.0),
        Region::A2 => (-1.0, 1.0),
        Region::A3 => (-1.0, -1.0),
        Region::A4 => (1.0, -1.0),
    }
}

fn in_region(p: Point, r: Region, slack: f64) -> bool {
    let (sx, sy) = quadrant_signs(r);
    if sx * p.x < -slack || sy * p.y < -slack {
        return false;
    }
    let rr = 1.0 + slack;
    if p.x * p.x + p.y * p.y > rr * rr {
        return false;
    }
    let hold = 0.5 - slack;
    quadrant_disks(r)
        .iter()
        .all(|c| p.dist_sq(*c) >= hold * hold)
}

/// All closed regions containing `p`.
pub fn region_membership(p: Point) -> RegionSet {
    let mut set = RegionSet::empty();
    for r in REGIONS {
        if in_region(p, r, 0.0) {
            set.insert(r);
        }
    }
    set
}

/// Whether `s` attains the optimal value 1 on the benchmark instance:
/// it passes through the origin (within [`DEFAULT_TOL`]) and its endpoints
/// certify two distinct regions.
pub fn is_frechet_mean(s: &Segment) -> bool {
    if point_segment_distance_sq(Point::new(0.0, 0.0), s) > DEFAULT_TOL * DEFAULT_TOL {
        return false;
    }
    let ra = region_membership(s.a);
    let rb = region_membership(s.b);
    ra.has_distinct_pair(&rb)
}

/// Translates `t` so that its midpoint coincides with the midpoint of `s`.
/// This never increases the Hausdorff distance to `s`.
pub fn center_translate(s: &Segment, t: &Segment) -> Segment {
    let ms = s.midpoint();
    let mt = t.midpoint();
    let dx = ms.x - mt.x;
    let dy = ms.y - mt.y;
    Segment {
        a: Point::new(t.a.x + dx, t.a.y + dy),
        b: Point::new(t.b.x + dx, t.b.y + dy),
    }
}

/// Samples a segment from the optimal set: a direction through the origin
/// with endpoints drawn from the two opposite regions it crosses.
pub fn sample_frechet_mean(rng: &mut impl Rng) -> Segment {
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    let (sin, cos) = theta.sin_cos();
    // Along direction theta, radii in [max(|cos|,|sin|), 1] stay outside the
    // two excluded disks of the quadrant the ray points into.
    let lo = cos.abs().max(sin.abs());
    let r1 = rng.random_range(lo..=1.0);
    let r2 = rng.random_range(lo..=1.0);
    Segment {
        a: Point::new(r1 * cos, r1 * sin),
        b: Point::new(-r2 * cos, -r2 * sin),
    }
}

/// Samples a segment that fails the optimality predicate even when every
/// inequality is relaxed by `margin`, so its cost exceeds 1 by a genuinely
/// positive amount.
pub fn sample_robust_negative(rng: &mut impl Rng, margin: f64) -> Segment {
    loop {
        let a = Point::new(rng.random_range(-1.3..1.3), rng.random_range(-1.3..1.3));
        let b = Point::new(rng.random_range(-1.3..1.3), rng.random_range(-1.3..1.3));
        let Ok(s) = Segment::new(a, b) else { continue };
        let through = point_segment_distance_sq(Point::new(0.0, 0.0), &s) <= margin * margin;
        let mut ra = RegionSet::empty();
        let mut rb = RegionSet::empty();
        for r in REGIONS {
            if in_region(a, r, margin) {
                ra.insert(r);
            }
            if in_region(b, r, margin) {
                rb.insert(r);
            }
        }
        if !(through && ra.has_distinct_pair(&rb)) {
            return s;
        }
    }
}
