//! The k-means cost functional over weighted objects.
//!
//! `cost(S, c) = Σ_s w_s · min_i d_H²(s, c_i)`, with ties in the inner
//! minimum broken toward the lowest center index and the outer sum taken in
//! item-index order so results are reproducible bit for bit.

use crate::error::{Error, Result};
use crate::geometry::Segment;
use crate::polyline::Polyline;
use crate::space::ShapeSpace;

/// An input object together with its positive weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Weighted<T> {
    pub item: T,
    pub weight: f64,
}

pub type WeightedSegment = Weighted<Segment>;
pub type WeightedPolyline = Weighted<Polyline>;

impl<T> Weighted<T> {
    pub fn new(item: T, weight: f64) -> Result<Self> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::invalid(format!("nonpositive weight {weight}")));
        }
        Ok(Weighted { item, weight })
    }

    pub fn unit(item: T) -> Self {
        Weighted { item, weight: 1.0 }
    }
}

/// Per-item nearest center and squared distance to it.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub center_index: Vec<usize>,
    pub dist_sq: Vec<f64>,
}

impl Assignment {
    pub fn len(&self) -> usize {
        self.center_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.center_index.is_empty()
    }
}

/// Assigns every item to its nearest center (ties toward the lowest index).
pub fn assign<S: ShapeSpace>(
    space: &S,
    items: &[Weighted<S::Object>],
    centers: &[S::Object],
) -> Assignment {
    debug_assert!(!centers.is_empty());
    let mut center_index = Vec::with_capacity(items.len());
    let mut dist_sq = Vec::with_capacity(items.len());
    for it in items {
        let mut best = 0usize;
        let mut best_d = space.dist_sq(&it.item, &centers[0]);
        for (j, c) in centers.iter().enumerate().skip(1) {
            let d = space.dist_sq(&it.item, c);
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        center_index.push(best);
        dist_sq.push(best_d);
    }
    Assignment { center_index, dist_sq }
}

/// Weighted total of an assignment's squared distances, summed in item order.
pub fn cost_of_assignment<T>(items: &[Weighted<T>], assignment: &Assignment) -> f64 {
    debug_assert_eq!(items.len(), assignment.len());
    let mut total = 0.0;
    for (it, d) in items.iter().zip(assignment.dist_sq.iter()) {
        total += it.weight * d;
    }
    total
}

/// The k-means cost of a center tuple.
pub fn cost<S: ShapeSpace>(
    space: &S,
    items: &[Weighted<S::Object>],
    centers: &[S::Object],
) -> f64 {
    cost_of_assignment(items, &assign(space, items, centers))
}

/// Flattens a center tuple into its parameter vector.
pub fn embed_centers<S: ShapeSpace>(space: &S, centers: &[S::Object]) -> Vec<f64> {
    let mut out = Vec::with_capacity(space.dim() * centers.len());
    for c in centers {
        space.embed_into(c, &mut out);
    }
    out
}

/// Inverse of [`embed_centers`]; the vector length must be a positive
/// multiple of the parameter dimension.
pub fn extract_centers<S: ShapeSpace>(space: &S, params: &[f64]) -> Result<Vec<S::Object>> {
    let d = space.dim();
    if params.is_empty() || !params.len().is_multiple_of(d) {
        return Err(Error::invalid(format!(
            "parameter vector length {} is not a positive multiple of {d}",
            params.len()
        )));
    }
    Ok(params.chunks_exact(d).map(|chunk| space.extract(chunk)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{hausdorff_segments_sq, Point};
    use crate::space::SegmentSpace;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn seg(ax: f64, ay: f64, bx: f64, by: f64) -> Segment {
        Segment::new(Point::new(ax, ay), Point::new(bx, by)).unwrap()
    }

    fn cross_pair() -> Vec<WeightedSegment> {
        vec![
            Weighted::unit(seg(-1.0, 0.0, 1.0, 0.0)),
            Weighted::unit(seg(0.0, -1.0, 0.0, 1.0)),
        ]
    }

    fn random_segment(rng: &mut impl Rng) -> Segment {
        loop {
            let a = Point::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let b = Point::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            if let Ok(s) = Segment::new(a, b) {
                return s;
            }
        }
    }

    #[test]
    fn weight_must_be_positive() {
        assert!(Weighted::new(seg(0.0, 0.0, 1.0, 0.0), 0.0).is_err());
        assert!(Weighted::new(seg(0.0, 0.0, 1.0, 0.0), -1.0).is_err());
        assert!(Weighted::new(seg(0.0, 0.0, 1.0, 0.0), f64::NAN).is_err());
    }

    #[test]
    fn embed_extract_examples() {
        let sp = SegmentSpace;
        let c = vec![seg(0.0, 0.0, 1.0, 0.0)];
        assert_eq!(embed_centers(&sp, &c), vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(extract_centers(&sp, &[0.0, 0.0, 1.0, 0.0]).unwrap(), c);
        assert!(extract_centers(&sp, &[1.0, 2.0, 3.0]).is_err());
        assert!(extract_centers::<SegmentSpace>(&sp, &[]).is_err());
    }

    #[test]
    fn embed_extract_round_trip_random() {
        let sp = SegmentSpace;
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..100 {
            let centers: Vec<Segment> = (0..3).map(|_| random_segment(&mut rng)).collect();
            let z = embed_centers(&sp, &centers);
            assert_eq!(extract_centers(&sp, &z).unwrap(), centers);
        }
    }

    #[test]
    fn assign_cross_pair_single_center() {
        let sp = SegmentSpace;
        let items = cross_pair();
        let centers = vec![items[0].item];
        let asg = assign(&sp, &items, &centers);
        assert_eq!(asg.center_index, vec![0, 0]);
        assert_eq!(asg.dist_sq, vec![0.0, 1.0]);
        assert_eq!(cost_of_assignment(&items, &asg), 1.0);
    }

    #[test]
    fn cost_zero_when_centers_cover_input() {
        let sp = SegmentSpace;
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let items: Vec<WeightedSegment> = (0..6)
            .map(|_| Weighted::new(random_segment(&mut rng), rng.random_range(0.1..3.0)).unwrap())
            .collect();
        let centers: Vec<Segment> = items.iter().map(|w| w.item).collect();
        assert_eq!(cost(&sp, &items, &centers), 0.0);
    }

    #[test]
    fn cost_of_diagonal_center_on_cross_pair() {
        let sp = SegmentSpace;
        let items = cross_pair();
        let center = vec![seg(0.6, 0.6, -0.6, -0.6)];
        assert!((cost(&sp, &items, &center) - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn assign_matches_exhaustive_recomputation() {
        let sp = SegmentSpace;
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for _ in 0..20 {
            let items: Vec<WeightedSegment> = (0..12)
                .map(|_| Weighted::unit(random_segment(&mut rng)))
                .collect();
            let centers: Vec<Segment> = (0..2).map(|_| random_segment(&mut rng)).collect();
            let asg = assign(&sp, &items, &centers);
            for (i, it) in items.iter().enumerate() {
                let d0 = hausdorff_segments_sq(&it.item, &centers[0]);
                let d1 = hausdorff_segments_sq(&it.item, &centers[1]);
                let (want_idx, want_d) = if d1 < d0 { (1, d1) } else { (0, d0) };
                assert_eq!(asg.center_index[i], want_idx);
                assert_eq!(asg.dist_sq[i], want_d);
            }
        }
    }

    #[test]
    fn orientation_and_scale_invariance() {
        let sp = SegmentSpace;
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for _ in 0..50 {
            let items: Vec<WeightedSegment> = (0..8)
                .map(|_| Weighted::unit(random_segment(&mut rng)))
                .collect();
            let centers: Vec<Segment> = (0..2).map(|_| random_segment(&mut rng)).collect();
            let base = cost(&sp, &items, &centers);

            let flipped: Vec<WeightedSegment> = items
                .iter()
                .map(|w| Weighted::unit(w.item.reversed()))
                .collect();
            let flipped_centers: Vec<Segment> = centers.iter().map(|c| c.reversed()).collect();
            assert!((cost(&sp, &flipped, &flipped_centers) - base).abs() < 1e-9);

            // Powers of two scale exactly in floating point.
            let scale = |s: &Segment, l: f64| {
                seg(s.a.x * l, s.a.y * l, s.b.x * l, s.b.y * l)
            };
            let items4: Vec<WeightedSegment> = items
                .iter()
                .map(|w| Weighted::unit(scale(&w.item, 4.0)))
                .collect();
            let centers4: Vec<Segment> = centers.iter().map(|c| scale(c, 4.0)).collect();
            assert_eq!(cost(&sp, &items4, &centers4), 16.0 * base);

            let lam = 1.7;
            let items_l: Vec<WeightedSegment> = items
                .iter()
                .map(|w| Weighted::unit(scale(&w.item, lam)))
                .collect();
            let centers_l: Vec<Segment> = centers.iter().map(|c| scale(c, lam)).collect();
            let scaled = cost(&sp, &items_l, &centers_l);
            assert!((scaled - lam * lam * base).abs() <= 1e-9 * base.max(1.0));
        }
    }

    #[test]
    fn rigid_motion_invariance() {
        let sp = SegmentSpace;
        let mut rng = ChaCha12Rng::seed_from_u64(29);
        let (st, ct) = (0.6f64.sin(), 0.6f64.cos());
        let motion = |p: Point| Point::new(ct * p.x - st * p.y + 2.5, st * p.x + ct * p.y - 1.0);
        for _ in 0..30 {
            let items: Vec<WeightedSegment> = (0..8)
                .map(|_| Weighted::unit(random_segment(&mut rng)))
                .collect();
            let centers: Vec<Segment> = (0..2).map(|_| random_segment(&mut rng)).collect();
            let base = cost(&sp, &items, &centers);
            let mv = |s: &Segment| Segment::new(motion(s.a), motion(s.b)).unwrap();
            let items_m: Vec<WeightedSegment> =
                items.iter().map(|w| Weighted::unit(mv(&w.item))).collect();
            let centers_m: Vec<Segment> = centers.iter().map(mv).collect();
            let moved = cost(&sp, &items_m, &centers_m);
            assert!((moved - base).abs() <= 1e-9 * base.max(1.0));
        }
    }

    #[test]
    fn adding_a_center_never_increases_cost() {
        let sp = SegmentSpace;
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        for _ in 0..50 {
            let items: Vec<WeightedSegment> = (0..10)
                .map(|_| Weighted::unit(random_segment(&mut rng)))
                .collect();
            let mut centers: Vec<Segment> = vec![random_segment(&mut rng)];
            let mut prev = cost(&sp, &items, &centers);
            for _ in 0..3 {
                centers.push(random_segment(&mut rng));
                let next = cost(&sp, &items, &centers);
                assert!(next <= prev);
                prev = next;
            }
        }
    }
}
