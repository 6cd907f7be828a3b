//! Continuous minimization of the clustering cost, plus an exhaustive grid
//! oracle for certifying results on tiny instances.
//!
//! [`local_search`] alternates between assigning items to their nearest
//! center and re-solving each cluster's weighted 1-mean problem by
//! derivative-free simplex descent (the objective is piecewise algebraic,
//! so there are no gradients at region boundaries). A cluster's center is
//! replaced only when the candidate strictly improves the cluster cost, so
//! the cost trace is non-increasing by construction and termination is by
//! cost stagnation alone — flat optimum sets are fine. The whole procedure
//! restarts from several D²-sampled discrete seeds and keeps the best
//! outcome, which also guarantees the result is never worse than the best
//! discrete seed.
//!
//! [`grid_brute_force`] evaluates every center tuple with vertices on a
//! bounded lattice. Tuples are scanned via the item-partition identity
//! `min_tuples Σ_s min_i d²(s, c_i) = min_partition Σ_parts min_c Σ_{s in
//! part} d²(s, c)`, which gives the exact same minimum as direct tuple
//! enumeration at a fraction of the work.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Point, DEFAULT_TOL};
use crate::objective::{assign, cost_of_assignment, Assignment, Weighted};
use crate::rng::{stream, tag};
use crate::seeding::d2_sample;
use crate::space::ShapeSpace;

/// Relative floor below the instance diameter at which a center is
/// considered collapsed and gets re-inflated.
const COLLAPSE_FLOOR_REL: f64 = 1e-7;
/// Required relative improvement for a center update to be accepted.
const ACCEPT_REL: f64 = 1e-12;
/// Simplex descent budget per solve, scaled by the parameter dimension.
const NM_EVALS_PER_DIM: usize = 80;
const NM_FTOL_REL: f64 = 1e-11;

#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    /// Independent D²-seeded restarts.
    pub restarts: usize,
    /// Maximum alternating-minimization iterations per restart.
    pub max_iters: usize,
    /// Stop when an iteration improves the cost by less than this fraction.
    pub cost_tol_rel: f64,
    /// Initial simplex step as a fraction of the cluster diameter.
    pub simplex_scale: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 16,
            max_iters: 60,
            cost_tol_rel: 1e-6,
            simplex_scale: 0.1,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::invalid("restarts and max_iters must be >= 1"));
        }
        if !(self.cost_tol_rel > 0.0 && self.cost_tol_rel.is_finite()) {
            return Err(Error::invalid("cost_tol_rel must be positive"));
        }
        if !(self.simplex_scale > 0.0 && self.simplex_scale.is_finite()) {
            return Err(Error::invalid("simplex_scale must be positive"));
        }
        Ok(())
    }
}

/// One row of the optimization log.
#[derive(Debug, Clone)]
pub struct TraceEntry<T> {
    pub restart: usize,
    pub iter: usize,
    pub cost: f64,
    pub centers: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct ClusteringResult<T> {
    pub centers: Vec<T>,
    pub assignment: Assignment,
    pub cost: f64,
    pub trace: Vec<TraceEntry<T>>,
}

/// Accepts `result` when its cost is within a `(1 + epsilon)` factor of the
/// oracle's (plus the library tolerance).
pub fn certify<T>(result: &ClusteringResult<T>, oracle: &ClusteringResult<T>, epsilon: f64) -> bool {
    result.cost <= (1.0 + epsilon) * oracle.cost + DEFAULT_TOL
}

fn bounding_box<S: ShapeSpace>(space: &S, items: &[Weighted<S::Object>]) -> (Point, Point) {
    let mut min = Point::new(f64::INFINITY, f64::INFINITY);
    let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for it in items {
        space.for_each_point(&it.item, &mut |p| {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        });
    }
    (min, max)
}

fn diameter_of(min: Point, max: Point) -> f64 {
    min.dist(max)
}

fn count_distinct<S: ShapeSpace>(space: &S, items: &[Weighted<S::Object>]) -> usize {
    let mut keys: Vec<Vec<f64>> = items
        .iter()
        .map(|it| space.embed(&space.canonical(&it.item)))
        .collect();
    keys.sort_by(|a, b| a.partial_cmp(b).expect("finite parameters"));
    keys.dedup();
    keys.len()
}

/// Alternating minimization over `k` centers, best of several restarts.
pub fn local_search<S: ShapeSpace>(
    space: &S,
    items: &[Weighted<S::Object>],
    k: usize,
    cfg: &OptimizerConfig,
) -> Result<ClusteringResult<S::Object>> {
    cfg.validate()?;
    if items.is_empty() {
        return Err(Error::invalid("empty input"));
    }
    if k == 0 {
        return Err(Error::invalid("k must be >= 1"));
    }
    let distinct = count_distinct(space, items);
    if k > distinct {
        return Err(Error::invalid(format!(
            "k = {k} exceeds the {distinct} distinct inputs"
        )));
    }

    let canonical: Vec<Weighted<S::Object>> = items
        .iter()
        .map(|it| Weighted {
            item: space.canonical(&it.item),
            weight: it.weight,
        })
        .collect();
    let (lo, hi) = bounding_box(space, &canonical);
    let floor = COLLAPSE_FLOOR_REL * diameter_of(lo, hi).max(f64::MIN_POSITIVE);

    let mut restarts: Vec<Restart<S::Object>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_restart(space, &canonical, k, cfg, floor, r))
        .collect();

    let mut best = 0usize;
    for i in 1..restarts.len() {
        let a = &restarts[i];
        let b = &restarts[best];
        let better = a
            .cost
            .partial_cmp(&b.cost)
            .expect("finite cost")
            .then_with(|| lex_key_cmp(&a.key, &b.key))
            .is_lt();
        if better {
            best = i;
        }
    }

    let trace: Vec<TraceEntry<S::Object>> = restarts
        .iter_mut()
        .flat_map(|r| std::mem::take(&mut r.trace))
        .collect();
    let winner = restarts.swap_remove(best);

    let mut centers: Vec<S::Object> = winner
        .centers
        .iter()
        .map(|c| space.canonical(&space.normalize_center(c)))
        .collect();
    centers.sort_by(|a, b| space.lex_cmp(a, b));
    let assignment = assign(space, &canonical, &centers);
    let cost = cost_of_assignment(&canonical, &assignment);

    Ok(ClusteringResult { centers, assignment, cost, trace })
}

fn lex_key_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.partial_cmp(y).expect("finite parameters") {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

struct Restart<T> {
    cost: f64,
    centers: Vec<T>,
    key: Vec<f64>,
    trace: Vec<TraceEntry<T>>,
}

fn run_restart<S: ShapeSpace>(
    space: &S,
    items: &[Weighted<S::Object>],
    k: usize,
    cfg: &OptimizerConfig,
    floor: f64,
    restart: usize,
) -> Restart<S::Object> {
    let mut rng = stream(cfg.seed, &[tag::RESTART, restart as u64]);
    let seed_idx = d2_sample(space, items, k, &mut rng, true);
    let mut centers: Vec<S::Object> =
        seed_idx.iter().map(|&i| items[i].item.clone()).collect();
    let mut asg = assign(space, items, &centers);
    reseed_empty(space, items, &mut centers, &mut asg);
    let mut cost = cost_of_assignment(items, &asg);
    let mut trace = vec![TraceEntry {
        restart,
        iter: 0,
        cost,
        centers: centers.clone(),
    }];

    for iter in 1..=cfg.max_iters {
        if cost == 0.0 {
            break;
        }
        let mut next = centers.clone();
        let mut improved_any = false;
        for (slot, center) in next.iter_mut().enumerate() {
            let members: Vec<usize> = (0..items.len())
                .filter(|&i| asg.center_index[i] == slot)
                .collect();
            if members.is_empty() {
                continue;
            }
            if let Some(obj) = improve_center(space, items, &members, center, floor, cfg) {
                *center = obj;
                improved_any = true;
            }
        }
        let mut next_asg = assign(space, items, &next);
        reseed_empty(space, items, &mut next, &mut next_asg);
        let next_cost = cost_of_assignment(items, &next_asg);
        if next_cost > cost {
            // Can only be rounding noise; keep the better state.
            break;
        }
        let drop = cost - next_cost;
        centers = next;
        asg = next_asg;
        trace.push(TraceEntry {
            restart,
            iter,
            cost: next_cost,
            centers: centers.clone(),
        });
        let stagnant = !improved_any || drop < cfg.cost_tol_rel * cost;
        cost = next_cost;
        if stagnant {
            break;
        }
    }

    let mut key = Vec::with_capacity(space.dim() * centers.len());
    for c in &centers {
        space.embed_into(c, &mut key);
    }
    Restart { cost, centers, key, trace }
}

/// Refills empty slots with the item of maximal weighted squared distance.
fn reseed_empty<S: ShapeSpace>(
    space: &S,
    items: &[Weighted<S::Object>],
    centers: &mut [S::Object],
    asg: &mut Assignment,
) {
    for _ in 0..=centers.len() {
        let mut counts = vec![0usize; centers.len()];
        for &c in &asg.center_index {
            counts[c] += 1;
        }
        let Some(slot) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let mut best_i = 0usize;
        let mut best_v = -1.0;
        for (i, it) in items.iter().enumerate() {
            let v = it.weight * asg.dist_sq[i];
            if v > best_v {
                best_v = v;
                best_i = i;
            }
        }
        if best_v <= 0.0 {
            // Every item is already represented exactly; a duplicate center
            // slot stays empty and is harmless.
            return;
        }
        centers[slot] = items[best_i].item.clone();
        *asg = assign(space, items, centers);
    }
}

/// Weighted 1-mean refinement of one cluster. Returns a replacement center
/// only when it strictly improves the cluster cost.
fn improve_center<S: ShapeSpace>(
    space: &S,
    items: &[Weighted<S::Object>],
    members: &[usize],
    current: &S::Object,
    floor: f64,
    cfg: &OptimizerConfig,
) -> Option<S::Object> {
    let cluster_cost = |obj: &S::Object| -> f64 {
        let mut total = 0.0;
        for &i in members {
            total += items[i].weight * space.dist_sq(&items[i].item, obj);
        }
        total
    };
    let current_cost = cluster_cost(current);
    if current_cost == 0.0 {
        return None;
    }

    // Start 1: the member that is itself the cheapest discrete center.
    let mut best_member = &items[members[0]].item;
    let mut best_member_cost = cluster_cost(best_member);
    for &i in &members[1..] {
        let c = cluster_cost(&items[i].item);
        if c < best_member_cost {
            best_member_cost = c;
            best_member = &items[i].item;
        }
    }

    // Start 2: the object joining the weighted means of the parameter
    // vectors.
    let dim = space.dim();
    let mut acc = vec![0.0; dim];
    let mut wsum = 0.0;
    let mut buf = Vec::with_capacity(dim);
    for &i in members {
        buf.clear();
        space.embed_into(&items[i].item, &mut buf);
        for (a, v) in acc.iter_mut().zip(buf.iter()) {
            *a += items[i].weight * v;
        }
        wsum += items[i].weight;
    }
    for a in &mut acc {
        *a /= wsum;
    }
    let mean = space.inflate(&space.extract(&acc), floor, current);
    let mean_cost = cluster_cost(&mean);

    let mut best: (S::Object, f64) = if best_member_cost <= mean_cost {
        (best_member.clone(), best_member_cost)
    } else {
        (mean.clone(), mean_cost)
    };

    // Cluster diameter sets the simplex scale.
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &i in members {
        space.for_each_point(&items[i].item, &mut |p| {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        });
    }
    let diam = diameter_of(lo, hi);

    if diam > 0.0 {
        let step = cfg.simplex_scale * diam;
        let max_evals = NM_EVALS_PER_DIM * dim;
        for start in [best_member.clone(), mean] {
            let x0 = space.embed(&start);
            let f = |params: &[f64]| cluster_cost(&space.inflate(&space.extract(params), floor, &start));
            let (x, fx) = nelder_mead(f, &x0, step, max_evals, NM_FTOL_REL);
            if fx < best.1 {
                best = (space.inflate(&space.extract(&x), floor, &start), fx);
            }
        }
    }

    if best.1 < current_cost * (1.0 - ACCEPT_REL) {
        Some(best.0)
    } else {
        None
    }
}

/// Standard Nelder–Mead over `f`, returning the best point ever evaluated.
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    step: f64,
    max_evals: usize,
    ftol_rel: f64,
) -> (Vec<f64>, f64) {
    let d = x0.len();
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    pts.push(x0.to_vec());
    for i in 0..d {
        let mut p = x0.to_vec();
        p[i] += step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut evals = pts.len();

    let mut best_x = pts[0].clone();
    let mut best_f = vals[0];
    for (p, &v) in pts.iter().zip(vals.iter()) {
        if v < best_f {
            best_f = v;
            best_x = p.clone();
        }
    }

    while evals < max_evals {
        // Order: best first, worst last.
        let mut order: Vec<usize> = (0..pts.len()).collect();
        order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).expect("finite objective"));
        let (ib, iw) = (order[0], order[d]);
        let isw = order[d - 1];
        if vals[iw] - vals[ib] <= ftol_rel * (vals[ib].abs() + vals[iw].abs()) + 1e-300 {
            break;
        }

        let mut centroid = vec![0.0; d];
        for &i in order.iter().take(d) {
            for (c, v) in centroid.iter_mut().zip(pts[i].iter()) {
                *c += v;
            }
        }
        for c in &mut centroid {
            *c /= d as f64;
        }

        let blend = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
            a.iter().zip(b.iter()).map(|(x, y)| x + t * (x - y)).collect()
        };

        let reflect = blend(&centroid, &pts[iw], 1.0);
        let fr = f(&reflect);
        evals += 1;
        if fr < best_f {
            best_f = fr;
            best_x = reflect.clone();
        }

        if fr < vals[ib] {
            let expand = blend(&centroid, &pts[iw], 2.0);
            let fe = f(&expand);
            evals += 1;
            if fe < best_f {
                best_f = fe;
                best_x = expand.clone();
            }
            if fe < fr {
                pts[iw] = expand;
                vals[iw] = fe;
            } else {
                pts[iw] = reflect;
                vals[iw] = fr;
            }
        } else if fr < vals[isw] {
            pts[iw] = reflect;
            vals[iw] = fr;
        } else {
            let contract = if fr < vals[iw] {
                blend(&centroid, &pts[iw], 0.5)
            } else {
                blend(&centroid, &pts[iw], -0.5)
            };
            let fc = f(&contract);
            evals += 1;
            if fc < best_f {
                best_f = fc;
                best_x = contract.clone();
            }
            if fc < vals[iw].min(fr) {
                pts[iw] = contract;
                vals[iw] = fc;
            } else {
                // Shrink toward the best vertex.
                let anchor = pts[ib].clone();
                for i in 0..pts.len() {
                    if i == ib {
                        continue;
                    }
                    for (p, a) in pts[i].iter_mut().zip(anchor.iter()) {
                        *p = a + 0.5 * (*p - a);
                    }
                    vals[i] = f(&pts[i]);
                    evals += 1;
                    if vals[i] < best_f {
                        best_f = vals[i];
                        best_x = pts[i].clone();
                    }
                }
            }
        }
    }
    (best_x, best_f)
}

/// An axis-aligned evaluation lattice for the brute-force oracle.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub min: Point,
    pub max: Point,
    /// Lattice points per axis.
    pub resolution: usize,
    /// Cap on the estimated number of inner-loop operations.
    pub budget: f64,
}

pub const DEFAULT_GRID_BUDGET: f64 = 4e9;

impl GridSpec {
    pub fn new(min: Point, max: Point, resolution: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min.x < max.x && min.y < max.y) {
            return Err(Error::invalid("grid bounding box is empty"));
        }
        if resolution < 2 {
            return Err(Error::invalid("grid resolution must be >= 2"));
        }
        Ok(GridSpec { min, max, resolution, budget: DEFAULT_GRID_BUDGET })
    }

    /// Box of all input vertices, inflated on each side by the instance
    /// diameter.
    pub fn covering<S: ShapeSpace>(
        space: &S,
        items: &[Weighted<S::Object>],
        resolution: usize,
    ) -> Result<Self> {
        let (lo, hi) = bounding_box(space, items);
        let diam = diameter_of(lo, hi).max(1.0);
        GridSpec::new(
            Point::new(lo.x - diam, lo.y - diam),
            Point::new(hi.x + diam, hi.y + diam),
            resolution,
        )
    }

    fn lattice(&self) -> Vec<Point> {
        let r = self.resolution;
        let sx = (self.max.x - self.min.x) / (r - 1) as f64;
        let sy = (self.max.y - self.min.y) / (r - 1) as f64;
        let mut pts = Vec::with_capacity(r * r);
        for i in 0..r {
            for j in 0..r {
                pts.push(Point::new(
                    self.min.x + i as f64 * sx,
                    self.min.y + j as f64 * sy,
                ));
            }
        }
        pts
    }
}

/// Exhaustive minimization over center tuples with vertices on the lattice.
///
/// Candidate objects are deduplicated by orientation and tuples by center
/// order, so each distinct solution is evaluated once. Fails with a
/// resource-limit error when the estimated work exceeds the budget.
pub fn grid_brute_force<S: ShapeSpace>(
    space: &S,
    items: &[Weighted<S::Object>],
    k: usize,
    grid: &GridSpec,
) -> Result<ClusteringResult<S::Object>> {
    if items.is_empty() {
        return Err(Error::invalid("empty input"));
    }
    if k == 0 {
        return Err(Error::invalid("k must be >= 1"));
    }
    let n = items.len();
    let verts = space.dim() / 2;
    let g = grid.resolution * grid.resolution;
    let cand_est = (g as f64).powi(verts as i32);
    let assigns_est = (k as f64).powi(n as i32);
    let ops = cand_est * n as f64 + assigns_est * cand_est * n as f64;
    if !ops.is_finite() || ops > grid.budget {
        return Err(Error::ResourceLimit(format!(
            "grid enumeration needs ~{ops:.3e} operations, budget is {:.3e}",
            grid.budget
        )));
    }

    let lattice = grid.lattice();
    let candidates = enumerate_candidates(space, &lattice, verts);
    if candidates.is_empty() {
        return Err(Error::invalid("grid produced no valid candidate centers"));
    }

    // Distance matrix: candidate-major, item-minor.
    let dmat: Vec<f64> = candidates
        .par_iter()
        .flat_map_iter(|c| items.iter().map(move |it| space.dist_sq(&it.item, c)))
        .collect();

    let assignments = canonical_assignments(n, k);
    let best = assignments
        .par_iter()
        .enumerate()
        .map(|(ai, asg)| {
            let parts = asg.iter().copied().max().unwrap() + 1;
            let mut best_per_part = vec![(f64::INFINITY, usize::MAX); parts];
            for (ci, row) in dmat.chunks_exact(n).enumerate() {
                let mut sums = vec![0.0f64; parts];
                for i in 0..n {
                    sums[asg[i]] += items[i].weight * row[i];
                }
                for (part, sum) in sums.into_iter().enumerate() {
                    if sum < best_per_part[part].0 {
                        best_per_part[part] = (sum, ci);
                    }
                }
            }
            let value: f64 = best_per_part.iter().map(|(s, _)| s).sum();
            let centers: Vec<usize> = best_per_part.iter().map(|(_, c)| *c).collect();
            (value, ai, centers)
        })
        .reduce(
            || (f64::INFINITY, usize::MAX, Vec::new()),
            |a, b| {
                if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );

    let (_, _, center_idx) = best;
    let mut centers: Vec<S::Object> = center_idx
        .iter()
        .map(|&c| candidates[c].clone())
        .collect();
    while centers.len() < k {
        centers.push(centers[0].clone());
    }
    centers.sort_by(|a, b| space.lex_cmp(a, b));
    let assignment = assign(space, items, &centers);
    let cost = cost_of_assignment(items, &assignment);
    Ok(ClusteringResult { centers, assignment, cost, trace: Vec::new() })
}

/// All canonical objects with `verts` vertices on the lattice: consecutive
/// vertices distinct and the vertex sequence not larger than its reversal.
fn enumerate_candidates<S: ShapeSpace>(
    space: &S,
    lattice: &[Point],
    verts: usize,
) -> Vec<S::Object> {
    let g = lattice.len();
    let mut out = Vec::new();
    let mut idx = vec![0usize; verts];
    let mut params = Vec::with_capacity(2 * verts);
    'outer: loop {
        // Reject chains with coincident consecutive vertices.
        let mut ok = true;
        for w in idx.windows(2) {
            if w[0] == w[1] {
                ok = false;
                break;
            }
        }
        // Orientation dedup: keep sequences not exceeding their reversal.
        if ok {
            let mut keep = true;
            for i in 0..verts {
                match idx[i].cmp(&idx[verts - 1 - i]) {
                    std::cmp::Ordering::Less => break,
                    std::cmp::Ordering::Greater => {
                        keep = false;
                        break;
                    }
                    std::cmp::Ordering::Equal => continue,
                }
            }
            if keep {
                params.clear();
                for &i in &idx {
                    params.push(lattice[i].x);
                    params.push(lattice[i].y);
                }
                out.push(space.extract(&params));
            }
        }
        // Advance the multi-index.
        for slot in (0..verts).rev() {
            idx[slot] += 1;
            if idx[slot] < g {
                continue 'outer;
            }
            idx[slot] = 0;
        }
        break;
    }
    out
}

/// Item-to-part assignments in first-use label order (one representative
/// per partition into at most `k` parts).
fn canonical_assignments(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fn rec(cur: &mut Vec<usize>, pos: usize, used: usize, k: usize, out: &mut Vec<Vec<usize>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for label in 0..used.min(k - 1) + 1 {
            cur[pos] = label;
            let next_used = used.max(label + 1);
            rec(cur, pos + 1, next_used, k, out);
        }
    }
    rec(&mut cur, 0, 0, k, &mut out);
    out
}
