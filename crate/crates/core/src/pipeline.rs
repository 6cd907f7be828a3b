//! The end-to-end pipeline: seed, bound sensitivities, sample a coreset,
//! optimize on it, and evaluate candidates on the full input.
//!
//! Repetitions run independently on derived seeds and the candidate with the
//! lowest full-input cost wins. The user-facing accuracy `ε` is split by
//! solving `(1+ε')²/(1−ε') = 1+ε` for the inner tolerance `ε'`, which is
//! then used both for the coreset guarantee and as the optimizer's
//! stagnation threshold; the failure probability is split evenly between
//! seeding and sampling. Results are canonicalized (center orientation
//! normalized, centers sorted, assignment remapped) so identical inputs and
//! seeds produce byte-identical serialized output.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde_json::json;

use crate::coreset::{build_coreset, coreset_size, sensitivities, Coreset};
use crate::error::{Error, Result};
use crate::objective::{assign, cost, cost_of_assignment, Assignment, Weighted};
use crate::optimizer::{local_search, OptimizerConfig, TraceEntry};
use crate::rng::{derive_seed, tag};
use crate::seeding::bicriteria_seed;
use crate::space::ShapeSpace;

/// Default sampling constant for [`coreset_size`]. The sampling bound only
/// fixes a shape; this constant is calibrated so that desk-scale
/// coresets are comfortably smaller than the input while still preserving
/// costs. See the acceptance suite.
pub const DEFAULT_CORESET_CONSTANT: f64 = 1e-4;

pub const DEFAULT_BETA: f64 = 4.0;
pub const DEFAULT_ALPHA: f64 = 16.0;

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub k: usize,
    /// Target relative error, in (0, 1/2).
    pub epsilon: f64,
    /// Target failure probability, in (0, 1/2).
    pub delta: f64,
    /// Pieces per object (1 for plain segments).
    pub ell: usize,
    pub seed: u64,
    /// Sampling constant `c` in the coreset size bound.
    pub coreset_constant: f64,
    /// Bicriteria expansion factor.
    pub beta: f64,
    /// Approximation-factor constant assumed in the sensitivity bounds.
    pub alpha: f64,
    /// Seeding rounds; default `⌈10·log₂(2/δ)⌉`.
    pub rounds: Option<usize>,
    /// Independent repetitions; default `⌈log₂(1/δ)⌉`, at least 1.
    pub repetitions: Option<usize>,
    pub optimizer: OptimizerConfig,
}

impl PipelineConfig {
    pub fn new(k: usize, epsilon: f64, delta: f64) -> Result<Self> {
        let cfg = PipelineConfig {
            k,
            epsilon,
            delta,
            ell: 1,
            seed: 0,
            coreset_constant: DEFAULT_CORESET_CONSTANT,
            beta: DEFAULT_BETA,
            alpha: DEFAULT_ALPHA,
            rounds: None,
            repetitions: None,
            optimizer: OptimizerConfig::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k must be >= 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::invalid(format!(
                "epsilon = {} not in (0, 1/2)",
                self.epsilon
            )));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::invalid(format!(
                "delta = {} not in (0, 1/2)",
                self.delta
            )));
        }
        if self.ell == 0 {
            return Err(Error::invalid("ell must be >= 1"));
        }
        if !(self.coreset_constant > 0.0 && self.coreset_constant.is_finite()) {
            return Err(Error::invalid("coreset constant must be positive"));
        }
        if self.beta.is_nan() || self.beta < 1.0 || self.alpha.is_nan() || self.alpha < 1.0 {
            return Err(Error::invalid("alpha and beta must be >= 1"));
        }
        let e = self.epsilon_inner();
        let composed = (1.0 + e) * (1.0 + e) / (1.0 - e);
        if composed.is_nan() || composed > 1.0 + self.epsilon {
            return Err(Error::Internal("epsilon split failed to verify".into()));
        }
        Ok(())
    }

    /// The inner tolerance `ε'` solving `(1+ε')²/(1−ε') = 1+ε`, nudged down
    /// until the composed error provably stays within `ε`.
    pub fn epsilon_inner(&self) -> f64 {
        let target = 1.0 + self.epsilon;
        let compose = |x: f64| (1.0 + x) * (1.0 + x) / (1.0 - x);
        let mut lo = 0.0f64;
        let mut hi = self.epsilon.min(0.49);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if compose(mid) <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut e = lo;
        while e > 0.0 && compose(e) > target {
            e *= 0.999;
        }
        e
    }

    pub fn effective_rounds(&self) -> usize {
        self.rounds
            .unwrap_or_else(|| (10.0 * (2.0 / self.delta).log2()).ceil() as usize)
            .max(1)
    }

    pub fn effective_repetitions(&self) -> usize {
        self.repetitions
            .unwrap_or_else(|| (1.0 / self.delta).log2().ceil() as usize)
            .max(1)
    }
}

/// The chosen solution plus everything needed to reproduce and audit it.
#[derive(Debug, Clone)]
pub struct PipelineResult<T> {
    pub k: usize,
    pub ell: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub epsilon_inner: f64,
    pub seed: u64,
    /// Cost of the returned centers on the full input.
    pub cost: f64,
    /// Canonicalized centers, sorted by their parameter vectors.
    pub centers: Vec<T>,
    /// Full-input assignment against the sorted centers.
    pub assignment: Assignment,
    /// Index of the winning repetition.
    pub repetition: usize,
    /// Full-input cost of every repetition's candidate.
    pub repetition_costs: Vec<f64>,
    /// The winning repetition's coreset.
    pub coreset: Coreset,
    /// The winning repetition's optimizer trace.
    pub trace: Vec<TraceEntry<T>>,
    pub wall_clock: Duration,
}

struct Repetition<T> {
    full_cost: f64,
    centers: Vec<T>,
    coreset: Coreset,
    trace: Vec<TraceEntry<T>>,
}

/// Runs the full pipeline on `items`.
pub fn run_pipeline<S: ShapeSpace>(
    space: &S,
    items: &[Weighted<S::Object>],
    cfg: &PipelineConfig,
) -> Result<PipelineResult<S::Object>> {
    let started = Instant::now();
    cfg.validate()?;
    if items.is_empty() {
        return Err(Error::invalid("empty input"));
    }
    for (i, it) in items.iter().enumerate() {
        space.validate_input(&it.item).map_err(|e| {
            Error::invalid(format!("item {i}: {e}"))
        })?;
        if !(it.weight.is_finite() && it.weight > 0.0) {
            return Err(Error::invalid(format!("item {i}: nonpositive weight")));
        }
    }
    if cfg.k > items.len() {
        return Err(Error::invalid(format!(
            "k = {} exceeds the {} inputs",
            cfg.k,
            items.len()
        )));
    }

    // Orientation is an artifact of the parameterization; normalizing it up
    // front makes every downstream stage exactly invariant under input
    // flips.
    let canonical: Vec<Weighted<S::Object>> = items
        .iter()
        .map(|it| Weighted {
            item: space.canonical(&it.item),
            weight: it.weight,
        })
        .collect();

    let eps_inner = cfg.epsilon_inner();
    let reps = cfg.effective_repetitions();
    let outcomes: Vec<Result<Repetition<S::Object>>> = (0..reps)
        .into_par_iter()
        .map(|r| run_repetition(space, &canonical, cfg, eps_inner, r))
        .collect();

    let mut repetitions = Vec::with_capacity(reps);
    for out in outcomes {
        repetitions.push(out?);
    }

    let repetition_costs: Vec<f64> = repetitions.iter().map(|r| r.full_cost).collect();
    let mut best = 0usize;
    for (i, r) in repetitions.iter().enumerate().skip(1) {
        if r.full_cost < repetitions[best].full_cost {
            best = i;
        }
    }
    let winner = repetitions.swap_remove(best);

    let mut centers: Vec<S::Object> = winner
        .centers
        .iter()
        .map(|c| space.canonical(&space.normalize_center(c)))
        .collect();
    centers.sort_by(|a, b| space.lex_cmp(a, b));
    let assignment = assign(space, &canonical, &centers);
    let total = cost_of_assignment(&canonical, &assignment);

    Ok(PipelineResult {
        k: cfg.k,
        ell: cfg.ell,
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        epsilon_inner: eps_inner,
        seed: cfg.seed,
        cost: total,
        centers,
        assignment,
        repetition: best,
        repetition_costs,
        coreset: winner.coreset,
        trace: winner.trace,
        wall_clock: started.elapsed(),
    })
}

fn run_repetition<S: ShapeSpace>(
    space: &S,
    items: &[Weighted<S::Object>],
    cfg: &PipelineConfig,
    eps_inner: f64,
    rep: usize,
) -> Result<Repetition<S::Object>> {
    let rep_seed = derive_seed(cfg.seed, &[tag::REPETITION, rep as u64]);
    let seed_result = bicriteria_seed(
        space,
        items,
        cfg.k,
        cfg.beta,
        cfg.effective_rounds(),
        derive_seed(rep_seed, &[1]),
    )?;
    let profile = sensitivities(space, items, &seed_result, cfg.alpha)?;
    // Failure probability is split evenly between seeding and sampling.
    let m = coreset_size(eps_inner, cfg.delta / 2.0, profile.total, cfg.coreset_constant)?;
    let mut coreset = build_coreset(items, &profile, m, derive_seed(rep_seed, &[2]))?;
    coreset.meta.epsilon = Some(eps_inner);
    coreset.meta.delta = Some(cfg.delta / 2.0);

    let subset = coreset.materialize(items);
    // The coreset may not retain k distinct objects; optimize what it has
    // and pad the tuple afterwards.
    let distinct = {
        let mut keys: Vec<Vec<f64>> = subset
            .iter()
            .map(|it| space.embed(&space.canonical(&it.item)))
            .collect();
        keys.sort_by(|a, b| a.partial_cmp(b).expect("finite parameters"));
        keys.dedup();
        keys.len()
    };
    let k_eff = cfg.k.min(distinct).max(1);
    let opt_cfg = OptimizerConfig {
        cost_tol_rel: eps_inner,
        seed: derive_seed(rep_seed, &[3]),
        ..cfg.optimizer.clone()
    };
    let solved = local_search(space, &subset, k_eff, &opt_cfg)?;
    let mut centers = solved.centers;
    while centers.len() < cfg.k {
        centers.push(centers[0].clone());
    }
    let full_cost = cost(space, items, &centers);
    Ok(Repetition {
        full_cost,
        centers,
        coreset,
        trace: solved.trace,
    })
}

/// Builds only the coreset of repetition 0, for `--coreset-only` runs.
pub fn coreset_only<S: ShapeSpace>(
    space: &S,
    items: &[Weighted<S::Object>],
    cfg: &PipelineConfig,
) -> Result<Coreset> {
    cfg.validate()?;
    if items.is_empty() {
        return Err(Error::invalid("empty input"));
    }
    for (i, it) in items.iter().enumerate() {
        space
            .validate_input(&it.item)
            .map_err(|e| Error::invalid(format!("item {i}: {e}")))?;
    }
    if cfg.k > items.len() {
        return Err(Error::invalid("k exceeds input size"));
    }
    let canonical: Vec<Weighted<S::Object>> = items
        .iter()
        .map(|it| Weighted {
            item: space.canonical(&it.item),
            weight: it.weight,
        })
        .collect();
    let eps_inner = cfg.epsilon_inner();
    let rep_seed = derive_seed(cfg.seed, &[tag::REPETITION, 0]);
    let seed_result = bicriteria_seed(
        space,
        &canonical,
        cfg.k,
        cfg.beta,
        cfg.effective_rounds(),
        derive_seed(rep_seed, &[1]),
    )?;
    let profile = sensitivities(space, &canonical, &seed_result, cfg.alpha)?;
    let m = coreset_size(eps_inner, cfg.delta / 2.0, profile.total, cfg.coreset_constant)?;
    let mut coreset = build_coreset(&canonical, &profile, m, derive_seed(rep_seed, &[2]))?;
    coreset.meta.epsilon = Some(eps_inner);
    coreset.meta.delta = Some(cfg.delta / 2.0);
    Ok(coreset)
}

impl<T> PipelineResult<T> {
    /// Stable JSON form: centers as vertex lists, keys sorted, wall-clock
    /// excluded so identical runs serialize identically.
    pub fn to_json<S>(&self, space: &S) -> serde_json::Value
    where
        S: ShapeSpace<Object = T>,
    {
        let centers: Vec<serde_json::Value> = self
            .centers
            .iter()
            .map(|c| {
                let mut vertices: Vec<[f64; 2]> = Vec::new();
                space.for_each_point(c, &mut |p| vertices.push([p.x, p.y]));
                json!(vertices)
            })
            .collect();
        json!({
            "k": self.k,
            "ell": self.ell,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "epsilon_inner": self.epsilon_inner,
            "seed": self.seed,
            "cost": self.cost,
            "centers": centers,
            "assignment": self.assignment.center_index,
            "dist_sq": self.assignment.dist_sq,
            "repetition": self.repetition,
            "repetition_costs": self.repetition_costs,
            "coreset_meta": {
                "epsilon": self.coreset.meta.epsilon,
                "delta": self.coreset.meta.delta,
                "m": self.coreset.meta.m,
                "size": self.coreset.len(),
                "seed": self.coreset.meta.seed,
                "total_sensitivity": self.coreset.meta.total_sensitivity,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frechet;
    use crate::geometry::{Point, Segment};
    use crate::objective::WeightedSegment;
    use crate::space::SegmentSpace;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

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
    fn epsilon_split_is_valid() {
        for eps in [0.05, 0.1, 0.2, 0.4, 0.49] {
            let cfg = PipelineConfig::new(1, eps, 0.25).unwrap();
            let e = cfg.epsilon_inner();
            assert!(e > 0.0 && e < eps);
            let composed = (1.0 + e) * (1.0 + e) / (1.0 - e);
            assert!(composed <= 1.0 + eps);
            assert!(composed >= 1.0 + 0.9 * eps, "split too loose: {composed}");
        }
    }

    #[test]
    fn config_validation() {
        assert!(PipelineConfig::new(0, 0.1, 0.25).is_err());
        assert!(PipelineConfig::new(1, 0.5, 0.25).is_err());
        assert!(PipelineConfig::new(1, 0.1, 0.5).is_err());
        let cfg = PipelineConfig::new(1, 0.25, 0.25).unwrap();
        assert_eq!(cfg.effective_repetitions(), 2);
    }

    #[test]
    fn cross_instance_pipeline() {
        let sp = SegmentSpace;
        let items = frechet::instance_items();
        let mut cfg = PipelineConfig::new(1, 0.1, 0.25).unwrap();
        cfg.optimizer.restarts = 4;
        let res = run_pipeline(&sp, &items, &cfg).unwrap();
        assert!(res.cost <= 1.1, "cost {}", res.cost);
        assert!(frechet::is_frechet_mean(&res.centers[0]));
    }

    #[test]
    fn distinct_inputs_reach_zero_cost() {
        let sp = SegmentSpace;
        let mut rng = ChaCha12Rng::seed_from_u64(401);
        let items = random_items(&mut rng, 3, -4.0, 4.0);
        let mut cfg = PipelineConfig::new(3, 0.2, 0.25).unwrap();
        cfg.optimizer.restarts = 4;
        let res = run_pipeline(&sp, &items, &cfg).unwrap();
        assert_eq!(res.cost, 0.0);
    }

    #[test]
    fn deterministic_and_orientation_invariant() {
        let sp = SegmentSpace;
        let mut rng = ChaCha12Rng::seed_from_u64(409);
        let items = random_items(&mut rng, 24, -6.0, 6.0);
        let mut cfg = PipelineConfig::new(2, 0.2, 0.25).unwrap();
        cfg.seed = 5;
        cfg.optimizer.restarts = 4;

        let a = run_pipeline(&sp, &items, &cfg).unwrap();
        let b = run_pipeline(&sp, &items, &cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a.to_json(&sp)).unwrap(),
            serde_json::to_string(&b.to_json(&sp)).unwrap()
        );

        let flipped: Vec<WeightedSegment> = items
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let s = if i % 2 == 0 { w.item.reversed() } else { w.item };
                Weighted::unit(s)
            })
            .collect();
        let c = run_pipeline(&sp, &flipped, &cfg).unwrap();
        assert!((a.cost - c.cost).abs() < 1e-9);
        assert_eq!(
            serde_json::to_string(&a.to_json(&sp)).unwrap(),
            serde_json::to_string(&c.to_json(&sp)).unwrap()
        );
    }

    #[test]
    fn best_repetition_is_returned() {
        let sp = SegmentSpace;
        let mut rng = ChaCha12Rng::seed_from_u64(419);
        let items = random_items(&mut rng, 30, -6.0, 6.0);
        let mut cfg = PipelineConfig::new(2, 0.2, 0.25).unwrap();
        cfg.repetitions = Some(3);
        cfg.optimizer.restarts = 4;
        let res = run_pipeline(&sp, &items, &cfg).unwrap();
        assert_eq!(res.repetition_costs.len(), 3);
        for c in &res.repetition_costs {
            assert!(res.repetition_costs[res.repetition] <= *c);
        }
        // The recomputed cost matches the winning repetition's evaluation.
        assert!((res.cost - res.repetition_costs[res.repetition]).abs() <= 1e-12);
    }

    #[test]
    fn pipeline_close_to_direct_local_search() {
        let sp = SegmentSpace;
        let mut rng = ChaCha12Rng::seed_from_u64(431);
        let mut pass = 0usize;
        let seeds = 8u64;
        for seed in 0..seeds {
            let items = random_items(&mut rng, 200, -10.0, 10.0);
            let mut cfg = PipelineConfig::new(2, 0.2, 0.25).unwrap();
            cfg.seed = seed;
            cfg.optimizer.restarts = 8;
            let piped = run_pipeline(&sp, &items, &cfg).unwrap();
            let direct_cfg = OptimizerConfig { restarts: 8, seed, ..Default::default() };
            let direct = local_search(&sp, &items, 2, &direct_cfg).unwrap();
            if piped.cost <= 1.25 * direct.cost + 1e-9 {
                pass += 1;
            }
        }
        assert!(pass >= 6, "pipeline within 1.25x of direct in only {pass}/{seeds} seeds");
    }
}
