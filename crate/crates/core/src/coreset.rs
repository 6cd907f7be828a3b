//! Sensitivity upper bounds and importance-sampled coresets.
//!
//! Given a discrete bicriteria seeding, each item's sensitivity is bounded
//! by a two-term expression: a `32α` share of its cluster plus a `16α` share
//! of the item's squared distance to its cluster center relative to the
//! cluster cost. On unit weights the cluster shares are `1/|S'_i|`; with
//! general weights the share is the item's fraction of the cluster weight,
//! which reduces to the same thing. Summed over a cluster the two terms
//! contribute exactly `32α` and, when the cluster cost is positive, `16α`,
//! so the total is `48αk'` whenever every cluster cost is positive.
//!
//! A coreset is `m` i.i.d. draws from the normalized sensitivities, with
//! each drawn item reweighted by the inverse of its expected draw count so
//! that the coreset cost of any fixed center tuple is an unbiased estimate
//! of the full cost. Repeated draws are merged.

use rand::distr::Distribution;
use rand::distr::weighted::WeightedIndex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::objective::Weighted;
use crate::rng::stream;
use crate::seeding::BicriteriaResult;
use crate::space::ShapeSpace;

/// Per-item sensitivity upper bounds and the bookkeeping they came from.
#[derive(Debug, Clone)]
pub struct SensitivityProfile {
    /// Upper bound per item, each at least `1/n`.
    pub sigma: Vec<f64>,
    /// Sum of `sigma`.
    pub total: f64,
    /// Item index -> cluster slot in the seeding result.
    pub cluster_index: Vec<usize>,
    /// Weighted cost per cluster.
    pub cluster_costs: Vec<f64>,
    /// Item count per cluster.
    pub cluster_sizes: Vec<usize>,
    /// The approximation-factor constant used in the bounds.
    pub alpha: f64,
}

/// Computes the sensitivity upper bounds for `items` with respect to the
/// clustering induced by `seed_result`.
pub fn sensitivities<S: ShapeSpace>(
    space: &S,
    items: &[Weighted<S::Object>],
    seed_result: &BicriteriaResult,
    alpha: f64,
) -> Result<SensitivityProfile> {
    let n = items.len();
    if !alpha.is_finite() || alpha < 1.0 {
        return Err(Error::invalid(format!("alpha = {alpha} must be >= 1")));
    }
    if seed_result.assignment.len() != n {
        return Err(Error::Internal(format!(
            "seeding assignment covers {} items, input has {n}",
            seed_result.assignment.len()
        )));
    }
    let k_prime = seed_result.k_prime();
    if seed_result.cluster_sizes.len() != k_prime || seed_result.cluster_sizes.contains(&0) {
        return Err(Error::Internal("empty cluster in seeding partition".into()));
    }

    // Recompute per-cluster weight and cost from scratch so the profile does
    // not depend on how the seeding result was produced.
    let mut dsq = vec![0.0; n];
    let mut cluster_weights = vec![0.0; k_prime];
    let mut cluster_costs = vec![0.0; k_prime];
    for (i, it) in items.iter().enumerate() {
        let slot = seed_result.assignment[i];
        if slot >= k_prime {
            return Err(Error::Internal(format!("cluster index {slot} out of range")));
        }
        let center = &items[seed_result.center_indices[slot]].item;
        dsq[i] = space.dist_sq(&it.item, center);
        cluster_weights[slot] += it.weight;
        cluster_costs[slot] += it.weight * dsq[i];
    }

    let floor = 1.0 / n as f64;
    let mut clamped = false;
    let mut sigma = Vec::with_capacity(n);
    for (i, it) in items.iter().enumerate() {
        let slot = seed_result.assignment[i];
        let share = (32.0 * alpha * it.weight) / cluster_weights[slot];
        let spread = if cluster_costs[slot] > 0.0 {
            (16.0 * alpha * it.weight * dsq[i]) / cluster_costs[slot]
        } else {
            // Zero-cost cluster: every member coincides with the center and
            // the share term already covers it.
            0.0
        };
        let mut s = share + spread;
        if s < floor {
            s = floor;
            clamped = true;
        }
        sigma.push(s);
    }

    // Away from the clamp the cluster terms telescope exactly; prefer the
    // closed form so the advertised total does not pick up summation noise.
    let total = if clamped {
        sigma.iter().sum()
    } else {
        let positive = cluster_costs.iter().filter(|c| **c > 0.0).count();
        32.0 * alpha * k_prime as f64 + 16.0 * alpha * positive as f64
    };

    Ok(SensitivityProfile {
        sigma,
        total,
        cluster_index: seed_result.assignment.clone(),
        cluster_costs,
        cluster_sizes: seed_result.cluster_sizes.clone(),
        alpha,
    })
}

/// Sample count of the sensitivity-sampling bound:
/// `m = ⌈c · (Σ̃/ε²) · (max(1, log₂ Σ̃) + log₂(1/δ))⌉`.
pub fn coreset_size(epsilon: f64, delta: f64, total_sensitivity: f64, c: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::invalid(format!("epsilon = {epsilon} not in (0, 1/2)")));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::invalid(format!("delta = {delta} not in (0, 1/2)")));
    }
    if !(total_sensitivity.is_finite() && total_sensitivity > 0.0) {
        return Err(Error::invalid(format!(
            "total sensitivity = {total_sensitivity} must be positive"
        )));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::invalid(format!("sampling constant c = {c} must be positive")));
    }
    let m = c * (total_sensitivity / (epsilon * epsilon))
        * (total_sensitivity.log2().max(1.0) + (1.0 / delta).log2());
    if !m.is_finite() || m > 1e12 {
        return Err(Error::ResourceLimit(format!(
            "coreset sample count {m:.3e} is not drawable"
        )));
    }
    Ok((m.ceil() as usize).max(1))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoresetItem {
    /// Index into the input the draw came from.
    pub index: usize,
    /// Merged importance weight, positive and finite.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoresetMeta {
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    /// Number of draws (before merging).
    pub m: usize,
    pub seed: u64,
    pub total_sensitivity: f64,
}

/// A weighted subsample of the input, sorted by input index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coreset {
    pub items: Vec<CoresetItem>,
    pub meta: CoresetMeta,
}

impl Coreset {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Materializes the coreset as a weighted input for the optimizer.
    pub fn materialize<T: Clone>(&self, items: &[Weighted<T>]) -> Vec<Weighted<T>> {
        self.items
            .iter()
            .map(|ci| Weighted {
                item: items[ci.index].item.clone(),
                weight: ci.weight,
            })
            .collect()
    }
}

/// Draws `m` items i.i.d. proportionally to the profile's sensitivities and
/// merges repeats. A drawn item `s` carries weight
/// `(count_s / m) · (Σ̃ / σ̃_s) · w_s`.
pub fn build_coreset<T>(
    items: &[Weighted<T>],
    profile: &SensitivityProfile,
    m: usize,
    seed: u64,
) -> Result<Coreset> {
    let n = items.len();
    if m == 0 {
        return Err(Error::invalid("coreset sample count m must be >= 1"));
    }
    if profile.sigma.len() != n {
        return Err(Error::Internal(format!(
            "profile covers {} items, input has {n}",
            profile.sigma.len()
        )));
    }
    let dist = WeightedIndex::new(profile.sigma.iter().copied())
        .map_err(|e| Error::Internal(format!("bad sensitivity weights: {e}")))?;
    let mut rng = stream(seed, &[crate::rng::tag::CORESET]);
    let mut counts = vec![0u64; n];
    for _ in 0..m {
        counts[dist.sample(&mut rng)] += 1;
    }
    let items: Vec<CoresetItem> = counts
        .iter()
        .enumerate()
        .filter(|(_, c)| **c > 0)
        .map(|(i, c)| CoresetItem {
            index: i,
            weight: (*c as f64 / m as f64) * (profile.total / profile.sigma[i]) * items[i].weight,
        })
        .collect();
    Ok(Coreset {
        items,
        meta: CoresetMeta {
            epsilon: None,
            delta: None,
            m,
            seed,
            total_sensitivity: profile.total,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, Segment};
    use crate::objective::{cost, WeightedSegment};
    use crate::seeding::bicriteria_seed;
    use crate::space::{SegmentSpace, ShapeSpace};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn seg(ax: f64, ay: f64, bx: f64, by: f64) -> Segment {
        Segment::new(Point::new(ax, ay), Point::new(bx, by)).unwrap()
    }

    fn random_items(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<WeightedSegment> {
        (0..n)
            .map(|_| loop {
                let a = Point::new(rng.random_range(lo..hi), rng.random_range(lo..hi));
                let b = Point::new(rng.random_range(lo..hi), rng.random_range(lo..hi));
                if let Ok(s) = Segment::new(a, b) {
                    return Weighted::unit(s);
                }
            })
            .collect()
    }

    #[test]
    fn identical_cluster_gives_share_only() {
        let sp = SegmentSpace;
        let alpha = 16.0;
        let n = 50usize;
        let items: Vec<WeightedSegment> =
            (0..n).map(|_| Weighted::unit(seg(0.0, 0.0, 1.0, 0.0))).collect();
        let seedres = bicriteria_seed(&sp, &items, 1, 1.0, 1, 0).unwrap();
        assert_eq!(seedres.k_prime(), 1);
        let prof = sensitivities(&sp, &items, &seedres, alpha).unwrap();
        for s in &prof.sigma {
            assert_eq!(*s, 32.0 * alpha / n as f64);
        }
        assert_eq!(prof.total, 32.0 * alpha);
    }

    #[test]
    fn total_is_48_alpha_kprime_for_positive_cluster_costs() {
        let sp = SegmentSpace;
        let mut rng = ChaCha12Rng::seed_from_u64(201);
        let items = random_items(&mut rng, 40, -8.0, 8.0);
        let seedres = bicriteria_seed(&sp, &items, 2, 2.0, 6, 3).unwrap();
        let prof = sensitivities(&sp, &items, &seedres, 16.0).unwrap();
        if prof.cluster_costs.iter().all(|c| *c > 0.0) {
            assert_eq!(prof.total, 48.0 * 16.0 * seedres.k_prime() as f64);
        }
        for s in &prof.sigma {
            assert!(*s >= 1.0 / items.len() as f64);
        }
    }

    #[test]
    fn sampled_sensitivity_bound_holds() {
        let sp = SegmentSpace;
        let mut rng = ChaCha12Rng::seed_from_u64(211);
        let items = random_items(&mut rng, 50, -6.0, 6.0);
        let k = 2usize;
        let seedres = bicriteria_seed(&sp, &items, k, 4.0, 8, 17).unwrap();
        let prof = sensitivities(&sp, &items, &seedres, 16.0).unwrap();
        for _ in 0..2000 {
            let centers: Vec<Segment> = (0..k)
                .map(|_| loop {
                    let a = Point::new(rng.random_range(-12.0..12.0), rng.random_range(-12.0..12.0));
                    let b = Point::new(rng.random_range(-12.0..12.0), rng.random_range(-12.0..12.0));
                    if let Ok(s) = Segment::new(a, b) {
                        return s;
                    }
                })
                .collect();
            let f: Vec<f64> = items
                .iter()
                .map(|it| {
                    it.weight
                        * centers
                            .iter()
                            .map(|c| sp.dist_sq(&it.item, c))
                            .fold(f64::INFINITY, f64::min)
                })
                .collect();
            let total: f64 = f.iter().sum();
            if total == 0.0 {
                continue;
            }
            for (i, fi) in f.iter().enumerate() {
                assert!(
                    fi / total <= prof.sigma[i] + 1e-12,
                    "sensitivity bound falsified at item {i}"
                );
            }
        }
    }

    #[test]
    fn sensitivities_are_scale_invariant() {
        let sp = SegmentSpace;
        let mut rng = ChaCha12Rng::seed_from_u64(223);
        let items = random_items(&mut rng, 30, -5.0, 5.0);
        // Powers of two rescale distances exactly.
        let scaled: Vec<WeightedSegment> = items
            .iter()
            .map(|w| {
                Weighted::unit(seg(
                    w.item.a.x * 4.0,
                    w.item.a.y * 4.0,
                    w.item.b.x * 4.0,
                    w.item.b.y * 4.0,
                ))
            })
            .collect();
        let s1 = bicriteria_seed(&sp, &items, 2, 4.0, 5, 11).unwrap();
        let s2 = bicriteria_seed(&sp, &scaled, 2, 4.0, 5, 11).unwrap();
        assert_eq!(s1.center_indices, s2.center_indices);
        let p1 = sensitivities(&sp, &items, &s1, 16.0).unwrap();
        let p2 = sensitivities(&sp, &scaled, &s2, 16.0).unwrap();
        assert_eq!(p1.sigma, p2.sigma);
    }

    #[test]
    fn coreset_size_examples() {
        assert!(coreset_size(0.5, 0.25, 10.0, 1.0).is_err());
        assert!(coreset_size(0.2, 0.5, 10.0, 1.0).is_err());
        assert!(coreset_size(0.2, 0.25, 0.0, 1.0).is_err());
        assert!(coreset_size(0.2, 0.25, 10.0, 0.0).is_err());

        // Σ̃ = 48·16·4, ε = 0.2, δ = 0.25, c = 1.
        let total: f64 = 48.0 * 16.0 * 4.0;
        let expect =
            ((total / 0.04) * (total.log2() + 4.0f64.log2())).ceil() as usize;
        assert_eq!(coreset_size(0.2, 0.25, total, 1.0).unwrap(), expect);
        assert_eq!(expect, 1_043_326);

        let m1 = coreset_size(0.2, 0.25, total, 1.0).unwrap();
        let m2 = coreset_size(0.2, 0.25, 2.0 * total, 1.0).unwrap();
        assert!(m2 > m1);
    }

    #[test]
    fn single_item_coreset_is_exact() {
        let sp = SegmentSpace;
        let items = vec![Weighted::new(seg(0.0, 0.0, 1.0, 0.0), 2.5).unwrap()];
        let seedres = bicriteria_seed(&sp, &items, 1, 4.0, 1, 0).unwrap();
        let prof = sensitivities(&sp, &items, &seedres, 16.0).unwrap();
        for m in [1usize, 7, 64] {
            let cs = build_coreset(&items, &prof, m, 5).unwrap();
            assert_eq!(cs.len(), 1);
            assert_eq!(cs.items[0].index, 0);
            assert_eq!(cs.items[0].weight, 2.5);
        }
    }

    #[test]
    fn coreset_estimate_is_unbiased() {
        let sp = SegmentSpace;
        let mut rng = ChaCha12Rng::seed_from_u64(227);
        let items = random_items(&mut rng, 12, -4.0, 4.0);
        let seedres = bicriteria_seed(&sp, &items, 2, 2.0, 4, 1).unwrap();
        let prof = sensitivities(&sp, &items, &seedres, 16.0).unwrap();
        let centers = vec![seg(-3.0, -3.0, 2.0, 2.5), seg(1.0, -2.0, 3.0, 1.0)];
        let full = cost(&sp, &items, &centers);

        // Per-draw value and its analytic variance.
        let sum_sigma: f64 = prof.sigma.iter().sum();
        let f: Vec<f64> = items
            .iter()
            .map(|it| {
                centers
                    .iter()
                    .map(|c| sp.dist_sq(&it.item, c))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let mean_draw: f64 = items
            .iter()
            .zip(f.iter())
            .zip(prof.sigma.iter())
            .map(|((it, fi), s)| (s / sum_sigma) * (prof.total / s) * it.weight * fi)
            .sum();
        let second: f64 = items
            .iter()
            .zip(f.iter())
            .zip(prof.sigma.iter())
            .map(|((it, fi), s)| {
                let v = (prof.total / s) * it.weight * fi;
                (s / sum_sigma) * v * v
            })
            .sum();
        let var_draw = second - mean_draw * mean_draw;

        let m = 10_000usize;
        let cs = build_coreset(&items, &prof, m, 99).unwrap();
        let sub = cs.materialize(&items);
        let est = cost(&sp, &sub, &centers);
        let se = (var_draw / m as f64).sqrt();
        assert!(
            (est - full).abs() <= 3.0 * se + 1e-9,
            "estimate {est} vs full {full} (se {se})"
        );
    }

    #[test]
    fn cross_pair_coreset_preserves_costs() {
        let sp = SegmentSpace;
        let items = crate::frechet::instance_items();
        let mut ok = 0usize;
        let seeds = 40u64;
        for seed in 0..seeds {
            let seedres = bicriteria_seed(&sp, &items, 1, 4.0, 4, seed).unwrap();
            let prof = sensitivities(&sp, &items, &seedres, 16.0).unwrap();
            let cs = build_coreset(&items, &prof, 64, seed).unwrap();
            let sub = cs.materialize(&items);
            let mut rng = ChaCha12Rng::seed_from_u64(1000 + seed);
            let all_good = (0..100).all(|_| {
                let c = loop {
                    let a = Point::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                    let b = Point::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                    if let Ok(s) = Segment::new(a, b) {
                        break s;
                    }
                };
                let full = cost(&sp, &items, &[c]);
                let sub_cost = cost(&sp, &sub, &[c]);
                (sub_cost - full).abs() <= 0.2 * full
            });
            if all_good {
                ok += 1;
            }
        }
        assert!(ok * 4 >= seeds as usize * 3, "only {ok}/{seeds} seeds preserved costs");
    }
}
