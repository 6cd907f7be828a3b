//! Polylines of bounded complexity and their Hausdorff distance.
//!
//! [`hausdorff_polylines`] computes the true set distance between the unions
//! of segments. The directed distance from a polyline piece `s` to a
//! polyline `Q` is the maximum over `x ∈ s` of the point-to-set distance
//! `δ(x, Q) = min_j δ(x, q_j)`. Each `δ(·, q_j)` restricted to `s` is convex
//! and piecewise smooth with breakpoints where `x(t)` crosses the slab
//! boundaries of `q_j`, and between breakpoints each squared branch is a
//! quadratic in `t`. The maximum of a minimum of convex functions on an
//! interval is attained at an interval endpoint or where the two lowest
//! branches cross, so it suffices to evaluate `δ(x(t), Q)` at: the piece
//! endpoints, the slab/line breakpoints, and the roots of the pairwise
//! quadratic equations `δ_i² = δ_j²` inside each breakpoint cell. A coarse
//! uniform grid is thrown in as a backstop against ill-conditioned roots.
//!
//! The max-min combination of piecewise segment distances that upper-bounds
//! the set distance is exposed separately as
//! [`hausdorff_polylines_maxmin`].

use crate::error::{Error, Result};
use crate::geometry::{hausdorff_segments_sq, Point, Segment};
use crate::space::{inflate_pair, ShapeSpace};

/// An ordered chain of at least two distinct consecutive vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    vertices: Vec<Point>,
}

impl Polyline {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::invalid("polyline needs at least two vertices"));
        }
        for v in &vertices {
            if !v.is_finite() {
                return Err(Error::invalid("polyline vertex is not finite"));
            }
        }
        for w in vertices.windows(2) {
            if w[0] == w[1] {
                return Err(Error::invalid("consecutive polyline vertices coincide"));
            }
        }
        Ok(Polyline { vertices })
    }

    pub fn from_segment(s: &Segment) -> Self {
        Polyline { vertices: vec![s.a, s.b] }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn num_pieces(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn pieces(&self) -> impl Iterator<Item = Segment> + '_ {
        self.vertices
            .windows(2)
            .map(|w| Segment::new_unchecked(w[0], w[1]))
    }

    pub fn total_len(&self) -> f64 {
        self.pieces().map(|s| s.len()).sum()
    }

    /// Vertex sequence or its reversal, whichever is lexicographically
    /// smaller; equal to `self` as a point set.
    pub fn canonical(&self) -> Polyline {
        let fwd = &self.vertices;
        for i in 0..fwd.len() {
            let j = fwd.len() - 1 - i;
            match fwd[i].lex_cmp(&fwd[j]) {
                std::cmp::Ordering::Less => return self.clone(),
                std::cmp::Ordering::Greater => {
                    let mut rev = self.vertices.clone();
                    rev.reverse();
                    return Polyline { vertices: rev };
                }
                std::cmp::Ordering::Equal => continue,
            }
        }
        self.clone()
    }

    /// Inserts midpoints on the longest pieces (lowest index on ties) until
    /// the polyline has exactly `target` vertices. The point set is
    /// unchanged.
    pub fn upsampled_to(&self, target: usize) -> Polyline {
        let mut vs = self.vertices.clone();
        while vs.len() < target {
            let mut best = 0usize;
            let mut best_len = -1.0;
            for i in 0..vs.len() - 1 {
                let len = vs[i].dist_sq(vs[i + 1]);
                if len > best_len {
                    best_len = len;
                    best = i;
                }
            }
            let mid = Point::new(
                (vs[best].x + vs[best + 1].x) / 2.0,
                (vs[best].y + vs[best + 1].y) / 2.0,
            );
            vs.insert(best + 1, mid);
        }
        Polyline { vertices: vs }
    }
}

/// Squared Hausdorff distance between the point sets of two polylines.
pub fn hausdorff_polylines_sq(p: &Polyline, q: &Polyline) -> f64 {
    if p.vertices == q.vertices {
        return 0.0;
    }
    if p.num_pieces() == 1 && q.num_pieces() == 1 {
        let ps = Segment::new_unchecked(p.vertices[0], p.vertices[1]);
        let qs = Segment::new_unchecked(q.vertices[0], q.vertices[1]);
        return hausdorff_segments_sq(&ps, &qs);
    }
    let q_pieces: Vec<Segment> = q.pieces().collect();
    let p_pieces: Vec<Segment> = p.pieces().collect();
    let max_pieces = p_pieces.len().max(q_pieces.len());
    let mut scratch = Scratch {
        bounds: Vec::with_capacity(2 + 3 * max_pieces),
        cands: Vec::with_capacity(24 + 5 * max_pieces * max_pieces),
        geo: Vec::with_capacity(max_pieces),
    };
    directed_sq(&p_pieces, &q_pieces, &mut scratch)
        .max(directed_sq(&q_pieces, &p_pieces, &mut scratch))
}

pub fn hausdorff_polylines(p: &Polyline, q: &Polyline) -> f64 {
    hausdorff_polylines_sq(p, q).sqrt()
}

/// The max-min combination over piece pairs. An upper bound on
/// [`hausdorff_polylines`], equal to it only in special configurations.
pub fn hausdorff_polylines_maxmin(p: &Polyline, q: &Polyline) -> f64 {
    let ps: Vec<Segment> = p.pieces().collect();
    let qs: Vec<Segment> = q.pieces().collect();
    let dir = |from: &[Segment], to: &[Segment]| -> f64 {
        from.iter()
            .map(|s| {
                to.iter()
                    .map(|t| hausdorff_segments_sq(s, t))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    dir(&ps, &qs).max(dir(&qs, &ps)).sqrt()
}

/// A piece with its direction and squared length precomputed. The distance
/// below takes exactly the same branches and produces exactly the same bits
/// as [`crate::geometry::point_segment_distance_sq`].
struct PieceGeom {
    a: Point,
    b: Point,
    dx: f64,
    dy: f64,
    len2: f64,
}

impl PieceGeom {
    fn new(s: &Segment) -> Self {
        PieceGeom {
            a: s.a,
            b: s.b,
            dx: s.b.x - s.a.x,
            dy: s.b.y - s.a.y,
            len2: s.len_sq(),
        }
    }

    #[inline]
    fn dist_sq(&self, p: Point) -> f64 {
        let apx = p.x - self.a.x;
        let apy = p.y - self.a.y;
        let t = apx * self.dx + apy * self.dy;
        if t < 0.0 {
            apx * apx + apy * apy
        } else if t > self.len2 {
            let bx = p.x - self.b.x;
            let by = p.y - self.b.y;
            bx * bx + by * by
        } else {
            let cr = self.dx * apy - self.dy * apx;
            cr * cr / self.len2
        }
    }
}

fn directed_sq(from: &[Segment], to: &[Segment], scratch: &mut Scratch) -> f64 {
    let Scratch { bounds, cands, geo } = scratch;
    geo.clear();
    geo.extend(to.iter().map(PieceGeom::new));
    from.iter()
        .map(|s| piece_max_sq(s, geo, bounds, cands))
        .fold(0.0, f64::max)
}

struct Scratch {
    bounds: Vec<f64>,
    cands: Vec<f64>,
    geo: Vec<PieceGeom>,
}

/// Quadratic coefficients of `t -> δ²(x(t), piece)` on a cell where the
/// classification of `x(t)` against `piece` does not change. `x(t) = origin
/// + t·dir`.
fn branch_quadratic(origin: Point, dir: (f64, f64), piece: &PieceGeom, t_mid: f64) -> (f64, f64, f64) {
    let x_mid = Point::new(origin.x + t_mid * dir.0, origin.y + t_mid * dir.1);
    let t = (x_mid.x - piece.a.x) * piece.dx + (x_mid.y - piece.a.y) * piece.dy;
    if t < 0.0 {
        point_quadratic(origin, dir, piece.a)
    } else if t > piece.len2 {
        point_quadratic(origin, dir, piece.b)
    } else {
        // δ² = (cr0 + t·cr1)² / |piece|²
        let cr0 = piece.dx * (origin.y - piece.a.y) - piece.dy * (origin.x - piece.a.x);
        let cr1 = piece.dx * dir.1 - piece.dy * dir.0;
        (
            cr1 * cr1 / piece.len2,
            2.0 * cr0 * cr1 / piece.len2,
            cr0 * cr0 / piece.len2,
        )
    }
}

fn point_quadratic(origin: Point, dir: (f64, f64), p: Point) -> (f64, f64, f64) {
    let ox = origin.x - p.x;
    let oy = origin.y - p.y;
    (
        dir.0 * dir.0 + dir.1 * dir.1,
        2.0 * (ox * dir.0 + oy * dir.1),
        ox * ox + oy * oy,
    )
}

fn push_root(ts: &mut Vec<f64>, t: f64, lo: f64, hi: f64) {
    if t.is_finite() && t > lo && t < hi {
        ts.push(t);
    }
}

fn quadratic_roots(a: f64, b: f64, c: f64, lo: f64, hi: f64, out: &mut Vec<f64>) {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return;
    }
    if a.abs() <= 1e-14 * scale {
        if b.abs() > 1e-14 * scale {
            push_root(out, -c / b, lo, hi);
        }
        return;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return;
    }
    let sq = disc.sqrt();
    push_root(out, (-b - sq) / (2.0 * a), lo, hi);
    push_root(out, (-b + sq) / (2.0 * a), lo, hi);
}

/// Maximum of `δ²(x, Q)` over the piece `s`, via the candidate points
/// described in the module docs.
fn piece_max_sq(s: &Segment, q: &[PieceGeom], bounds: &mut Vec<f64>, cands: &mut Vec<f64>) -> f64 {
    let origin = s.a;
    let dir = (s.b.x - s.a.x, s.b.y - s.a.y);

    // Cell boundaries: slab and supporting-line crossings, all linear in t.
    bounds.clear();
    bounds.extend_from_slice(&[0.0, 1.0]);
    for piece in q {
        let d0 = (origin.x - piece.a.x) * piece.dx + (origin.y - piece.a.y) * piece.dy;
        let d1 = dir.0 * piece.dx + dir.1 * piece.dy;
        if d1 != 0.0 {
            push_root(bounds, -d0 / d1, 0.0, 1.0);
            push_root(bounds, (piece.len2 - d0) / d1, 0.0, 1.0);
        }
        let cr0 = piece.dx * (origin.y - piece.a.y) - piece.dy * (origin.x - piece.a.x);
        let cr1 = piece.dx * dir.1 - piece.dy * dir.0;
        if cr1 != 0.0 {
            push_root(bounds, -cr0 / cr1, 0.0, 1.0);
        }
    }
    bounds.sort_by(|x, y| x.partial_cmp(y).unwrap());
    bounds.dedup();

    cands.clear();
    cands.extend_from_slice(bounds);
    // Pairwise branch crossings inside each cell.
    for ci in 1..bounds.len() {
        let (lo, hi) = (bounds[ci - 1], bounds[ci]);
        if hi - lo <= 1e-15 {
            continue;
        }
        let tm = 0.5 * (lo + hi);
        for i in 0..q.len() {
            let (ai, bi, ci) = branch_quadratic(origin, dir, &q[i], tm);
            for qj in &q[i + 1..] {
                let (aj, bj, cj) = branch_quadratic(origin, dir, qj, tm);
                quadratic_roots(ai - aj, bi - bj, ci - cj, lo, hi, cands);
            }
        }
    }
    // Coarse backstop grid.
    for i in 1..16 {
        cands.push(i as f64 / 16.0);
    }

    let mut best = 0.0f64;
    for &t in cands.iter() {
        let x = Point::new(origin.x + t * dir.0, origin.y + t * dir.1);
        let d = q
            .iter()
            .map(|g| g.dist_sq(x))
            .fold(f64::INFINITY, f64::min);
        best = best.max(d);
    }
    best
}

/// The space of polylines with exactly `ell` pieces, parameterized by their
/// `ell + 1` vertices in order.
#[derive(Debug, Clone, Copy)]
pub struct PolylineSpace {
    pub ell: usize,
}

impl PolylineSpace {
    pub fn new(ell: usize) -> Result<Self> {
        if ell == 0 {
            return Err(Error::invalid("ell must be >= 1"));
        }
        Ok(PolylineSpace { ell })
    }
}

impl ShapeSpace for PolylineSpace {
    type Object = Polyline;

    fn dim(&self) -> usize {
        2 * (self.ell + 1)
    }

    fn dist_sq(&self, a: &Polyline, b: &Polyline) -> f64 {
        hausdorff_polylines_sq(a, b)
    }

    fn embed_into(&self, obj: &Polyline, out: &mut Vec<f64>) {
        let full = obj.upsampled_to(self.ell + 1);
        debug_assert_eq!(full.vertices.len(), self.ell + 1);
        for v in full.vertices {
            out.push(v.x);
            out.push(v.y);
        }
    }

    fn extract(&self, params: &[f64]) -> Polyline {
        assert_eq!(params.len(), self.dim());
        Polyline {
            vertices: params
                .chunks_exact(2)
                .map(|c| Point::new(c[0], c[1]))
                .collect(),
        }
    }

    fn canonical(&self, obj: &Polyline) -> Polyline {
        obj.canonical()
    }

    fn for_each_point(&self, obj: &Polyline, f: &mut dyn FnMut(Point)) {
        for v in &obj.vertices {
            f(*v);
        }
    }

    fn min_extent(&self, obj: &Polyline) -> f64 {
        obj.pieces()
            .map(|s| s.len())
            .fold(f64::INFINITY, f64::min)
    }

    fn inflate(&self, obj: &Polyline, floor: f64, prev: &Polyline) -> Polyline {
        if obj.vertices.len() == 2 {
            // Same arithmetic as the segment space.
            return match inflate_pair(
                obj.vertices[0],
                obj.vertices[1],
                floor,
                prev.vertices[0],
                prev.vertices[1],
            ) {
                Some((a, b)) => Polyline { vertices: vec![a, b] },
                None => obj.clone(),
            };
        }
        let same_shape = prev.vertices.len() == obj.vertices.len();
        let mut vs = obj.vertices.clone();
        for i in 1..vs.len() {
            let len = vs[i - 1].dist(vs[i]);
            if len >= floor {
                continue;
            }
            let (dx, dy) = if len > 0.0 {
                ((vs[i].x - vs[i - 1].x) / len, (vs[i].y - vs[i - 1].y) / len)
            } else if same_shape {
                let pl = prev.vertices[i - 1].dist(prev.vertices[i]);
                if pl > 0.0 {
                    (
                        (prev.vertices[i].x - prev.vertices[i - 1].x) / pl,
                        (prev.vertices[i].y - prev.vertices[i - 1].y) / pl,
                    )
                } else {
                    (1.0, 0.0)
                }
            } else {
                (1.0, 0.0)
            };
            vs[i] = Point::new(vs[i - 1].x + dx * floor, vs[i - 1].y + dy * floor);
        }
        Polyline { vertices: vs }
    }

    fn validate_input(&self, obj: &Polyline) -> Result<()> {
        Polyline::new(obj.vertices.clone())?;
        if obj.vertices.len() > self.ell + 1 {
            return Err(Error::invalid(format!(
                "polyline has {} pieces, more than ell = {}",
                obj.num_pieces(),
                self.ell
            )));
        }
        Ok(())
    }

    fn normalize_center(&self, obj: &Polyline) -> Polyline {
        obj.upsampled_to(self.ell + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{hausdorff_segments, point_segment_distance_sq};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn poly(vs: &[(f64, f64)]) -> Polyline {
        Polyline::new(vs.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
    }

    fn random_polyline(rng: &mut impl Rng, pieces: usize, lo: f64, hi: f64) -> Polyline {
        loop {
            let vs: Vec<Point> = (0..=pieces)
                .map(|_| Point::new(rng.random_range(lo..hi), rng.random_range(lo..hi)))
                .collect();
            if let Ok(p) = Polyline::new(vs) {
                return p;
            }
        }
    }

    /// Directed max over a dense inclusive arc-length sample.
    fn sampled_hausdorff(p: &Polyline, q: &Polyline, samples: usize) -> f64 {
        let dir = |from: &Polyline, to: &Polyline| -> f64 {
            let pieces: Vec<Segment> = to.pieces().collect();
            let total = from.total_len();
            let mut worst = 0.0f64;
            for s in from.pieces() {
                let n = ((samples as f64) * s.len() / total).ceil().max(2.0) as usize;
                for i in 0..=n {
                    let t = i as f64 / n as f64;
                    let x = Point::new(
                        s.a.x + t * (s.b.x - s.a.x),
                        s.a.y + t * (s.b.y - s.a.y),
                    );
                    let d = pieces
                        .iter()
                        .map(|seg| point_segment_distance_sq(x, seg))
                        .fold(f64::INFINITY, f64::min);
                    worst = worst.max(d);
                }
            }
            worst
        };
        dir(p, q).max(dir(q, p)).sqrt()
    }

    #[test]
    fn validation() {
        assert!(Polyline::new(vec![Point::new(0.0, 0.0)]).is_err());
        assert!(Polyline::new(vec![Point::new(0.0, 0.0), Point::new(0.0, 0.0)]).is_err());
        assert!(poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]).num_pieces() == 2);
    }

    #[test]
    fn identical_polylines_have_zero_distance() {
        let p = poly(&[(0.0, 0.0), (1.0, 0.0), (1.5, 1.0)]);
        assert_eq!(hausdorff_polylines(&p, &p), 0.0);
    }

    #[test]
    fn single_piece_matches_segment_distance() {
        let mut rng = ChaCha12Rng::seed_from_u64(83);
        for _ in 0..200 {
            let p = random_polyline(&mut rng, 1, -5.0, 5.0);
            let q = random_polyline(&mut rng, 1, -5.0, 5.0);
            let sp = Segment::new(p.vertices[0], p.vertices[1]).unwrap();
            let sq = Segment::new(q.vertices[0], q.vertices[1]).unwrap();
            assert_eq!(
                hausdorff_polylines(&p, &q),
                hausdorff_segments(&sp, &sq)
            );
        }
    }

    #[test]
    fn matches_dense_sampling() {
        let mut rng = ChaCha12Rng::seed_from_u64(89);
        for _ in 0..120 {
            let pieces_p = rng.random_range(1..=3);
            let pieces_q = rng.random_range(1..=3);
            let p = random_polyline(&mut rng, pieces_p, -1.0, 1.0);
            let q = random_polyline(&mut rng, pieces_q, -1.0, 1.0);
            let exact = hausdorff_polylines(&p, &q);
            let est = sampled_hausdorff(&p, &q, 20_000);
            assert!(
                (exact - est).abs() <= 1e-4,
                "exact {exact} vs sampled {est}\np={p:?}\nq={q:?}"
            );
            // The sampled estimate can only undershoot the true maximum.
            assert!(est <= exact + 1e-9);
        }
    }

    #[test]
    fn maxmin_upper_bounds_set_distance() {
        let mut rng = ChaCha12Rng::seed_from_u64(97);
        for _ in 0..300 {
            let np = rng.random_range(1..=3);
            let nq = rng.random_range(1..=3);
            let p = random_polyline(&mut rng, np, -2.0, 2.0);
            let q = random_polyline(&mut rng, nq, -2.0, 2.0);
            let true_d = hausdorff_polylines(&p, &q);
            let upper = hausdorff_polylines_maxmin(&p, &q);
            assert!(true_d <= upper + 1e-9, "p={p:?} q={q:?}");
        }
    }

    #[test]
    fn symmetry_and_triangle_inequality() {
        let mut rng = ChaCha12Rng::seed_from_u64(101);
        for _ in 0..200 {
            let a = random_polyline(&mut rng, 2, -2.0, 2.0);
            let b = random_polyline(&mut rng, 2, -2.0, 2.0);
            let c = random_polyline(&mut rng, 2, -2.0, 2.0);
            let dab = hausdorff_polylines(&a, &b);
            assert_eq!(dab, hausdorff_polylines(&b, &a));
            let dac = hausdorff_polylines(&a, &c);
            let dcb = hausdorff_polylines(&c, &b);
            assert!(dab <= dac + dcb + 1e-6);
        }
    }

    #[test]
    fn upsampling_preserves_the_point_set() {
        let p = poly(&[(0.0, 0.0), (4.0, 0.0)]);
        let up = p.upsampled_to(4);
        assert_eq!(up.vertices().len(), 4);
        assert_eq!(hausdorff_polylines(&p, &up), 0.0);
    }

    #[test]
    fn canonical_picks_reversal_consistently() {
        let p = poly(&[(1.0, 0.0), (0.5, 0.2), (0.0, 0.0)]);
        let c = p.canonical();
        assert_eq!(c.vertices()[0], Point::new(0.0, 0.0));
        assert_eq!(c.canonical(), c);
        assert!(hausdorff_polylines(&p, &c) <= 1e-12);
    }

    #[test]
    fn space_embed_extract_round_trip() {
        let sp = PolylineSpace::new(2).unwrap();
        let p = poly(&[(0.0, 0.0), (1.0, 0.5), (2.0, 0.0)]);
        let z = sp.embed(&p);
        assert_eq!(z.len(), 6);
        assert_eq!(sp.extract(&z), p);
    }

    #[test]
    fn space_validates_piece_budget() {
        let sp = PolylineSpace::new(1).unwrap();
        let p = poly(&[(0.0, 0.0), (1.0, 0.5), (2.0, 0.0)]);
        assert!(sp.validate_input(&p).is_err());
        let q = poly(&[(0.0, 0.0), (1.0, 0.5)]);
        assert!(sp.validate_input(&q).is_ok());
    }
}
