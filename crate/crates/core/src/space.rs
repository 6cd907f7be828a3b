//! Abstraction over the clustered objects.
//!
//! The seeding, coreset, optimizer, and pipeline stages only need a handful
//! of operations on the objects they cluster: a squared distance, a
//! parameterization as a flat coordinate vector, an orientation-normal form,
//! and a way to keep candidates away from degeneracy during continuous
//! optimization. Segments and polylines both implement this trait, so the
//! whole pipeline is written once. A two-vertex polyline behaves exactly
//! like a segment (same arithmetic, same parameter order), which makes the
//! one-segment polyline pipeline reproduce the segment pipeline bit for bit.

use std::cmp::Ordering;

use crate::error::Result;
use crate::geometry::{hausdorff_segments_sq, Point, Segment};

pub trait ShapeSpace: Sync {
    type Object: Clone + PartialEq + Send + Sync + std::fmt::Debug;

    /// Number of real parameters per object.
    fn dim(&self) -> usize;

    /// Squared Hausdorff distance between two objects.
    fn dist_sq(&self, a: &Self::Object, b: &Self::Object) -> f64;

    /// Appends the object's parameters to `out` (length [`Self::dim`]).
    fn embed_into(&self, obj: &Self::Object, out: &mut Vec<f64>);

    /// Inverse of [`Self::embed_into`]. `params` must have length
    /// [`Self::dim`]; degenerate coordinates are allowed here and are
    /// handled by [`Self::inflate`].
    fn extract(&self, params: &[f64]) -> Self::Object;

    /// Orientation-normal form, equal to `obj` as a point set.
    fn canonical(&self, obj: &Self::Object) -> Self::Object;

    /// Calls `f` on every defining vertex of the object.
    fn for_each_point(&self, obj: &Self::Object, f: &mut dyn FnMut(Point));

    /// Length of the shortest piece of the object.
    fn min_extent(&self, obj: &Self::Object) -> f64;

    /// Pushes every piece of `obj` up to length at least `floor`, taking
    /// directions from `prev` where the piece itself has collapsed to a
    /// point.
    fn inflate(&self, obj: &Self::Object, floor: f64, prev: &Self::Object) -> Self::Object;

    /// Validates an object as pipeline input.
    fn validate_input(&self, obj: &Self::Object) -> Result<()>;

    /// Normal form for a returned center. Inputs may be simpler than the
    /// center parameterization (a polyline with fewer pieces); this maps
    /// them onto the full parameterization without changing the point set.
    fn normalize_center(&self, obj: &Self::Object) -> Self::Object {
        obj.clone()
    }

    fn embed(&self, obj: &Self::Object) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        self.embed_into(obj, &mut out);
        out
    }

    /// Deterministic total order on objects via their parameter vectors.
    fn lex_cmp(&self, a: &Self::Object, b: &Self::Object) -> Ordering {
        let pa = self.embed(a);
        let pb = self.embed(b);
        for (x, y) in pa.iter().zip(pb.iter()) {
            match x.partial_cmp(y).expect("finite parameters") {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        Ordering::Equal
    }
}

/// The space of plane segments, parameterized by `(ax, ay, bx, by)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SegmentSpace;

impl ShapeSpace for SegmentSpace {
    type Object = Segment;

    fn dim(&self) -> usize {
        4
    }

    fn dist_sq(&self, a: &Segment, b: &Segment) -> f64 {
        hausdorff_segments_sq(a, b)
    }

    fn embed_into(&self, obj: &Segment, out: &mut Vec<f64>) {
        out.extend_from_slice(&[obj.a.x, obj.a.y, obj.b.x, obj.b.y]);
    }

    fn extract(&self, params: &[f64]) -> Segment {
        assert_eq!(params.len(), 4);
        Segment {
            a: Point::new(params[0], params[1]),
            b: Point::new(params[2], params[3]),
        }
    }

    fn canonical(&self, obj: &Segment) -> Segment {
        obj.canonical()
    }

    fn for_each_point(&self, obj: &Segment, f: &mut dyn FnMut(Point)) {
        f(obj.a);
        f(obj.b);
    }

    fn min_extent(&self, obj: &Segment) -> f64 {
        obj.len()
    }

    fn inflate(&self, obj: &Segment, floor: f64, prev: &Segment) -> Segment {
        inflate_pair(obj.a, obj.b, floor, prev.a, prev.b)
            .map(|(a, b)| Segment { a, b })
            .unwrap_or(*obj)
    }

    fn validate_input(&self, obj: &Segment) -> Result<()> {
        Segment::new(obj.a, obj.b).map(|_| ())
    }
}

/// Re-inflates the pair `(a, b)` symmetrically about its midpoint to length
/// `floor` when it is shorter than that. Returns `None` when no change is
/// needed. Shared by the segment space and the two-vertex polyline case so
/// both produce identical bits.
pub(crate) fn inflate_pair(
    a: Point,
    b: Point,
    floor: f64,
    prev_a: Point,
    prev_b: Point,
) -> Option<(Point, Point)> {
    let len = a.dist(b);
    if len >= floor {
        return None;
    }
    let (dx, dy) = if len > 0.0 {
        ((b.x - a.x) / len, (b.y - a.y) / len)
    } else {
        let plen = prev_a.dist(prev_b);
        if plen > 0.0 {
            ((prev_b.x - prev_a.x) / plen, (prev_b.y - prev_a.y) / plen)
        } else {
            (1.0, 0.0)
        }
    };
    let mx = (a.x + b.x) / 2.0;
    let my = (a.y + b.y) / 2.0;
    let h = floor / 2.0;
    Some((
        Point::new(mx - dx * h, my - dy * h),
        Point::new(mx + dx * h, my + dy * h),
    ))
}
