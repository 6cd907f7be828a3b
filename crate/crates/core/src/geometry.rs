//! Planar distance primitives for points, segments, and supporting lines.
//!
//! The Hausdorff distance between two segments reduces to four directed
//! point-to-segment distances, and each of those is realized by one of three
//! closed formulas depending on where the point falls relative to the slab
//! spanned by the segment. [`candidate_family`] collects the eight scalar
//! expressions (four endpoint distances, four point-to-line distances), one
//! of which always equals the segment Hausdorff distance; that piecewise
//! structure is what the rest of the crate builds on.
//!
//! Everything here works on squared distances internally and takes square
//! roots only at the API boundary.

use crate::error::{Error, Result};

/// Library-wide tolerance for treating two distances as equal.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist_sq(&self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(&self, other: Point) -> f64 {
        self.dist_sq(other).sqrt()
    }

    /// Lexicographic order by (x, y). Coordinates are always finite here.
    pub fn lex_cmp(&self, other: &Point) -> std::cmp::Ordering {
        (self.x, self.y)
            .partial_cmp(&(other.x, other.y))
            .expect("finite coordinates")
    }
}

/// A closed straight-line segment with positive length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    /// Builds a segment, rejecting non-finite coordinates and zero length.
    pub fn new(a: Point, b: Point) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::invalid("segment endpoint is not finite"));
        }
        if a == b {
            return Err(Error::invalid("zero-length segment"));
        }
        Ok(Segment { a, b })
    }

    /// Internal constructor for callers that already guarantee validity.
    pub(crate) fn new_unchecked(a: Point, b: Point) -> Self {
        debug_assert!(a.is_finite() && b.is_finite() && a != b);
        Segment { a, b }
    }

    pub fn len_sq(&self) -> f64 {
        self.a.dist_sq(self.b)
    }

    pub fn len(&self) -> f64 {
        self.len_sq().sqrt()
    }

    pub fn midpoint(&self) -> Point {
        Point::new((self.a.x + self.b.x) / 2.0, (self.a.y + self.b.y) / 2.0)
    }

    pub fn reversed(&self) -> Segment {
        Segment { a: self.b, b: self.a }
    }

    /// Orientation-normal form: endpoints in lexicographic order.
    pub fn canonical(&self) -> Segment {
        if self.a.lex_cmp(&self.b) == std::cmp::Ordering::Greater {
            self.reversed()
        } else {
            *self
        }
    }
}

/// Which of the three faces induced by the perpendiculars at the endpoints
/// of a segment contains a query point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionLabel {
    /// The closed slab between the two perpendiculars.
    SlabSigma,
    /// The closed halfplane behind endpoint `a`.
    HalfplaneTauA,
    /// The closed halfplane behind endpoint `b`.
    HalfplaneTauB,
}

/// Classifies `p` against the slab decomposition of `s`.
///
/// Boundary ties go to [`RegionLabel::SlabSigma`]; all three distance
/// formulas agree there, so the choice only fixes the branch taken.
pub fn classify_point(p: Point, s: &Segment) -> RegionLabel {
    debug_assert!(s.len_sq() > 0.0, "degenerate segment");
    let abx = s.b.x - s.a.x;
    let aby = s.b.y - s.a.y;
    let t = (p.x - s.a.x) * abx + (p.y - s.a.y) * aby;
    if t < 0.0 {
        RegionLabel::HalfplaneTauA
    } else if t > abx * abx + aby * aby {
        RegionLabel::HalfplaneTauB
    } else {
        RegionLabel::SlabSigma
    }
}

/// Squared distance from `p` to the segment `s`.
pub fn point_segment_distance_sq(p: Point, s: &Segment) -> f64 {
    match classify_point(p, s) {
        RegionLabel::HalfplaneTauA => p.dist_sq(s.a),
        RegionLabel::HalfplaneTauB => p.dist_sq(s.b),
        RegionLabel::SlabSigma => line_distance_sq(p, s),
    }
}

pub fn point_segment_distance(p: Point, s: &Segment) -> f64 {
    point_segment_distance_sq(p, s).sqrt()
}

/// Squared distance from `p` to the supporting line of `s`.
pub fn line_distance_sq(p: Point, s: &Segment) -> f64 {
    let num = (s.b.x - s.a.x) * (s.a.y - p.y) - (s.a.x - p.x) * (s.b.y - s.a.y);
    num * num / s.len_sq()
}

/// Squared Hausdorff distance between two segments: the maximum of the four
/// directed endpoint-to-segment distances.
pub fn hausdorff_segments_sq(s1: &Segment, s2: &Segment) -> f64 {
    let d1 = point_segment_distance_sq(s1.a, s2).max(point_segment_distance_sq(s1.b, s2));
    let d2 = point_segment_distance_sq(s2.a, s1).max(point_segment_distance_sq(s2.b, s1));
    d1.max(d2)
}

pub fn hausdorff_segments(s1: &Segment, s2: &Segment) -> f64 {
    hausdorff_segments_sq(s1, s2).sqrt()
}

/// The eight scalar values, one of which realizes the Hausdorff distance of
/// the generating pair: four endpoint-to-endpoint distances and four
/// endpoint-to-supporting-line distances.
#[derive(Debug, Clone, Copy)]
pub struct CandidateFamily {
    /// |aa'|, |ab'|, |ba'|, |bb'|
    pub endpoint: [f64; 4],
    /// d(a, line(a'b')), d(b, line(a'b')), d(a', line(ab)), d(b', line(ab))
    pub line: [f64; 4],
}

impl CandidateFamily {
    pub fn values(&self) -> [f64; 8] {
        [
            self.endpoint[0],
            self.endpoint[1],
            self.endpoint[2],
            self.endpoint[3],
            self.line[0],
            self.line[1],
            self.line[2],
            self.line[3],
        ]
    }

    /// Whether `value` matches one of the eight entries within `tol`.
    pub fn contains(&self, value: f64, tol: f64) -> bool {
        self.values().iter().any(|v| (v - value).abs() <= tol)
    }
}

/// Computes the candidate family of a segment pair.
pub fn candidate_family(s1: &Segment, s2: &Segment) -> CandidateFamily {
    CandidateFamily {
        endpoint: [
            s1.a.dist(s2.a),
            s1.a.dist(s2.b),
            s1.b.dist(s2.a),
            s1.b.dist(s2.b),
        ],
        line: [
            line_distance_sq(s1.a, s2).sqrt(),
            line_distance_sq(s1.b, s2).sqrt(),
            line_distance_sq(s2.a, s1).sqrt(),
            line_distance_sq(s2.b, s1).sqrt(),
        ],
    }
}
