//! Discrete bicriteria seeding by weighted D²-sampling.
//!
//! Picks `k' = min(n, ⌈βk⌉)` centers from the input itself, each new center
//! drawn with probability proportional to `w_s ·` (current squared distance
//! to the nearest chosen center), and keeps the best of several independent
//! rounds. The result is the constant-factor, β-inflated approximation that
//! the sensitivity bounds are built on; the achieved ratio is reported, not
//! guaranteed.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::objective::Weighted;
use crate::rng::{stream, tag};
use crate::space::ShapeSpace;

/// Outcome of one seeding run: discrete centers (as input indices) and the
/// induced partition of the input.
#[derive(Debug, Clone)]
pub struct BicriteriaResult {
    /// Indices into the input of the chosen centers.
    pub center_indices: Vec<usize>,
    /// Item index -> slot in `center_indices`.
    pub assignment: Vec<usize>,
    /// Number of items per cluster (all positive).
    pub cluster_sizes: Vec<usize>,
    /// Total input weight per cluster.
    pub cluster_weights: Vec<f64>,
    /// Weighted cost per cluster: Σ w · d²(item, center).
    pub cluster_costs: Vec<f64>,
    /// Sum of the per-cluster costs.
    pub total_cost: f64,
    /// The configured expansion factor.
    pub beta: f64,
    /// Achieved cost over a caller-supplied reference optimum, when known.
    pub alpha_empirical: Option<f64>,
}

impl BicriteriaResult {
    pub fn k_prime(&self) -> usize {
        self.center_indices.len()
    }

    /// Records the achieved approximation ratio against a reference optimum
    /// (for instance a grid oracle on a small instance).
    pub fn measure_alpha(&mut self, reference_opt: f64) {
        self.alpha_empirical = if reference_opt > 0.0 {
            Some(self.total_cost / reference_opt)
        } else if self.total_cost == 0.0 {
            Some(1.0)
        } else {
            None
        };
    }
}

/// Runs `rounds` independent D²-sampling rounds with `⌈βk⌉` centers each and
/// returns the cheapest. Identical seeds give identical results; round `r`
/// draws from its own stream derived from `(seed, r)`.
pub fn bicriteria_seed<S: ShapeSpace>(
    space: &S,
    items: &[Weighted<S::Object>],
    k: usize,
    beta: f64,
    rounds: usize,
    seed: u64,
) -> Result<BicriteriaResult> {
    let n = items.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "k = {k} must satisfy 1 <= k <= {n}"
        )));
    }
    if !(beta.is_finite() && beta >= 1.0) {
        return Err(Error::invalid(format!("beta = {beta} must be >= 1")));
    }
    if rounds == 0 {
        return Err(Error::invalid("rounds must be >= 1"));
    }
    let k_prime = n.min((beta * k as f64).ceil() as usize);

    let outcomes: Vec<(f64, Vec<usize>)> = (0..rounds)
        .into_par_iter()
        .map(|round| {
            let mut rng = stream(seed, &[tag::SEEDING_ROUND, round as u64]);
            let centers = d2_sample(space, items, k_prime, &mut rng, false);
            let cost = discrete_cost(space, items, &centers);
            (cost, centers)
        })
        .collect();

    let best = outcomes
        .into_iter()
        .enumerate()
        .min_by(|(i, (ca, _)), (j, (cb, _))| {
            ca.partial_cmp(cb).expect("finite cost").then(i.cmp(j))
        })
        .expect("at least one round")
        .1
         .1;

    Ok(partition_result(space, items, best, beta))
}

/// Draws up to `k_prime` center indices by weighted D²-sampling. When the
/// remaining sampling mass is zero (every item coincides with a chosen
/// center) the tail is filled with the lowest unchosen indices — with
/// `distinct` set, only indices whose point set differs from every chosen
/// center.
pub(crate) fn d2_sample<S: ShapeSpace>(
    space: &S,
    items: &[Weighted<S::Object>],
    k_prime: usize,
    rng: &mut impl Rng,
    distinct: bool,
) -> Vec<usize> {
    let n = items.len();
    let mut chosen: Vec<usize> = Vec::with_capacity(k_prime);
    let mut min_dsq = vec![f64::INFINITY; n];

    // First draw: proportional to the weights alone.
    let total_w: f64 = items.iter().map(|w| w.weight).sum();
    let first = sample_prefix(rng, total_w, items.iter().map(|w| w.weight));
    chosen.push(first);
    for (i, it) in items.iter().enumerate() {
        min_dsq[i] = space.dist_sq(&it.item, &items[first].item);
    }

    while chosen.len() < k_prime {
        let total: f64 = items
            .iter()
            .zip(min_dsq.iter())
            .map(|(w, d)| w.weight * d)
            .sum();
        let next = if total > 0.0 {
            sample_prefix(
                rng,
                total,
                items.iter().zip(min_dsq.iter()).map(|(w, d)| w.weight * d),
            )
        } else {
            // Everything is already represented exactly; fill deterministically.
            let fill = (0..n).find(|i| !chosen.contains(i) && (!distinct || min_dsq[*i] > 0.0));
            match fill {
                Some(i) => i,
                None => break,
            }
        };
        chosen.push(next);
        for (i, it) in items.iter().enumerate() {
            let d = space.dist_sq(&it.item, &items[next].item);
            if d < min_dsq[i] {
                min_dsq[i] = d;
            }
        }
    }
    chosen
}

fn sample_prefix(rng: &mut impl Rng, total: f64, weights: impl Iterator<Item = f64>) -> usize {
    let target = rng.random_range(0.0..total);
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        acc += w;
        last = i;
        if target < acc {
            return i;
        }
    }
    last
}

fn discrete_cost<S: ShapeSpace>(
    space: &S,
    items: &[Weighted<S::Object>],
    centers: &[usize],
) -> f64 {
    let mut total = 0.0;
    for it in items {
        let mut best = f64::INFINITY;
        for &c in centers {
            best = best.min(space.dist_sq(&it.item, &items[c].item));
        }
        total += it.weight * best;
    }
    total
}

/// Assigns every item to its nearest chosen center (ties toward the lowest
/// slot), drops slots that end up empty, and aggregates per-cluster stats.
fn partition_result<S: ShapeSpace>(
    space: &S,
    items: &[Weighted<S::Object>],
    centers: Vec<usize>,
    beta: f64,
) -> BicriteriaResult {
    let n = items.len();
    let mut raw_assignment = vec![0usize; n];
    let mut used = vec![false; centers.len()];
    for (i, it) in items.iter().enumerate() {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (slot, &c) in centers.iter().enumerate() {
            let d = space.dist_sq(&it.item, &items[c].item);
            if d < best_d {
                best_d = d;
                best = slot;
            }
        }
        raw_assignment[i] = best;
        used[best] = true;
    }

    // Compact away empty slots (possible only via the zero-mass fill path).
    let mut remap = vec![usize::MAX; centers.len()];
    let mut kept: Vec<usize> = Vec::new();
    for (slot, &c) in centers.iter().enumerate() {
        if used[slot] {
            remap[slot] = kept.len();
            kept.push(c);
        }
    }

    let k_prime = kept.len();
    let mut assignment = vec![0usize; n];
    let mut cluster_sizes = vec![0usize; k_prime];
    let mut cluster_weights = vec![0.0; k_prime];
    let mut cluster_costs = vec![0.0; k_prime];
    let mut total_cost = 0.0;
    for (i, it) in items.iter().enumerate() {
        let slot = remap[raw_assignment[i]];
        let d = space.dist_sq(&it.item, &items[kept[slot]].item);
        assignment[i] = slot;
        cluster_sizes[slot] += 1;
        cluster_weights[slot] += it.weight;
        cluster_costs[slot] += it.weight * d;
        total_cost += it.weight * d;
    }

    BicriteriaResult {
        center_indices: kept,
        assignment,
        cluster_sizes,
        cluster_weights,
        cluster_costs,
        total_cost,
        beta,
        alpha_empirical: None,
    }
}
