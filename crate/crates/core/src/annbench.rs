//! Synthetic steerable-coefficient datasets and nearest-neighbor λ measurement.
//!
//! Ground truth is brute force over the rotational alignment distance. The
//! embedded search is exact Euclidean brute force (`λ_black_box = 1`), so the
//! achieved `λ` isolates the distortion of the embedding itself.

use serde::{Deserialize, Serialize};

use crate::bispectrum::FrequencyProfile;
use crate::embedding::{embed_batch, Embedding};
use crate::error::{check_dim, Error, Result};
use crate::exec::{self, Execution};
use crate::group::GroupAction;
use crate::linalg;
use crate::maxfilter::{quotient_distance, CircleSolverConfig};
use crate::point::OrbitPoint;
use crate::rng;
use crate::stability::{RatioSample, SamplerConfig, StabilityReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetProvenance {
    pub seed: u64,
    pub decay: f64,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientDataset {
    pub profile: FrequencyProfile,
    /// Interleaved `(re, im)` coefficient vectors of length `2p`.
    pub points: Vec<OrbitPoint>,
    pub provenance: DatasetProvenance,
}

impl CoefficientDataset {
    /// The circle action with weight `k` repeated `p_k` times.
    pub fn action(&self) -> Result<GroupAction> {
        self.profile.induced_action().map(GroupAction::Circle)
    }
}

/// `m` vectors with `a_{k,q}` standard complex Gaussian scaled by `(1+|k|)^{-decay}`,
/// drawn from the named substream of `seed`.
pub fn synth_points(profile: &FrequencyProfile, m: usize, decay: f64, seed: u64, stream: &str) -> Vec<OrbitPoint> {
    let scales: Vec<f64> = profile.weights().iter().map(|&k| (1.0 + k.unsigned_abs() as f64).powf(-decay)).collect();
    let mut r = rng::substream(seed, stream);
    (0..m)
        .map(|_| {
            let mut coords = Vec::with_capacity(2 * scales.len());
            for &s in &scales {
                let c = rng::gaussian_vec(&mut r, 2, s * std::f64::consts::FRAC_1_SQRT_2);
                coords.extend(c);
            }
            OrbitPoint::new(coords)
        })
        .collect()
}

pub fn synth_dataset(profile: &FrequencyProfile, m: usize, decay: f64, seed: u64) -> Result<CoefficientDataset> {
    if m == 0 {
        return Err(Error::Empty("dataset size m must be at least 1".into()));
    }
    if !(decay >= 0.0 && decay.is_finite()) {
        return Err(Error::InvalidConfig(format!("decay must be a finite nonnegative number, got {decay}")));
    }
    Ok(CoefficientDataset {
        profile: profile.clone(),
        points: synth_points(profile, m, decay, seed, rng::DATASET),
        provenance: DatasetProvenance { seed, decay, m },
    })
}

fn argmin(values: &[f64]) -> (usize, f64) {
    // strict comparison keeps the smallest index on ties
    values.iter().enumerate().fold((0, f64::INFINITY), |best, (i, &v)| if v < best.1 { (i, v) } else { best })
}

/// Brute-force quotient nearest neighbor; ties go to the smallest index.
pub fn true_nearest<P: AsRef<[f64]> + Sync>(
    action: &GroupAction,
    query: &[f64],
    points: &[P],
    hi_res: &CircleSolverConfig,
    exec: Execution,
) -> Result<(usize, f64)> {
    if points.is_empty() {
        return Err(Error::Empty("dataset is empty".into()));
    }
    let d = exec::try_map_indexed(exec, points.len(), |j| quotient_distance(action, query, points[j].as_ref(), hi_res))?;
    Ok(argmin(&d))
}

/// Euclidean nearest neighbor among embedded points; ties go to the smallest index.
pub fn embedded_nearest(embedded_points: &[Vec<f64>], embedded_query: &[f64]) -> Result<(usize, f64)> {
    if embedded_points.is_empty() {
        return Err(Error::Empty("dataset is empty".into()));
    }
    for p in embedded_points {
        check_dim(embedded_query.len(), p.len())?;
    }
    let d: Vec<f64> = embedded_points.iter().map(|p| linalg::dist(p, embedded_query)).collect();
    Ok(argmin(&d))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub true_index: usize,
    pub true_distance: f64,
    pub returned_index: usize,
    pub returned_distance: f64,
    pub embedded_distance: f64,
    pub achieved_lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnReport {
    pub queries: Vec<QueryOutcome>,
    pub max_lambda: f64,
    pub mean_lambda: f64,
    pub lambda_black_box: f64,
    /// Observed extremes over all (query, dataset point) pairs of this run.
    pub alpha_hat: f64,
    pub beta_hat: f64,
    /// `(β̂/α̂)·λ_black_box`.
    pub bound: f64,
    /// Every query satisfies `λ ≤ bound·(1 + 1e-6)`.
    pub bound_holds: bool,
    pub stability: StabilityReport,
}

pub const BOUND_SLACK: f64 = 1e-6;

/// Runs every query against the dataset both in the quotient (ground truth)
/// and through the embedding, and checks the `β̂/α̂` transfer bound.
pub fn evaluate_lambda<E, P, Q>(
    embedding: &E,
    action: &GroupAction,
    points: &[P],
    queries: &[Q],
    cfg: &SamplerConfig,
    exec: Execution,
) -> Result<AnnReport>
where
    E: Embedding + ?Sized,
    P: AsRef<[f64]> + Sync,
    Q: AsRef<[f64]> + Sync,
{
    if queries.is_empty() {
        return Err(Error::Empty("no queries".into()));
    }
    if points.is_empty() {
        return Err(Error::Empty("dataset is empty".into()));
    }
    let emb_points = embed_batch(embedding, points, exec)?;
    let emb_queries = embed_batch(embedding, queries, exec)?;
    let m = points.len();

    struct Row {
        outcome: QueryOutcome,
        samples: Vec<RatioSample>,
        excluded: usize,
    }
    let rows = exec::try_map_indexed(exec, queries.len(), |qi| {
        let q = queries[qi].as_ref();
        let dists = points
            .iter()
            .map(|p| quotient_distance(action, q, p.as_ref(), &cfg.distance_solver))
            .collect::<Result<Vec<f64>>>()?;
        let emb: Vec<f64> = emb_points.iter().map(|p| linalg::dist(p, &emb_queries[qi])).collect();
        let (true_index, true_distance) = argmin(&dists);
        let (returned_index, embedded_distance) = argmin(&emb);
        let returned_distance = dists[returned_index];
        let floor = |j: usize| cfg.dist_floor_rel * (linalg::norm(q) + linalg::norm(points[j].as_ref()));
        let achieved_lambda = if true_distance <= floor(true_index) { 1.0 } else { returned_distance / true_distance };
        let mut samples = Vec::with_capacity(m);
        let mut excluded = 0;
        for j in 0..m {
            if dists[j] > floor(j) {
                samples.push(RatioSample { pair: qi * m + j, ratio: emb[j] / dists[j], distance: dists[j] });
            } else {
                excluded += 1;
            }
        }
        Ok(Row {
            outcome: QueryOutcome { true_index, true_distance, returned_index, returned_distance, embedded_distance, achieved_lambda },
            samples,
            excluded,
        })
    })?;

    let excluded = rows.iter().map(|r| r.excluded).sum();
    let samples: Vec<RatioSample> = rows.iter().flat_map(|r| r.samples.iter().copied()).collect();
    let stability = StabilityReport::from_samples(&samples, excluded, cfg.histogram_bins, |pair| {
        (queries[pair / m].as_ref().to_vec(), points[pair % m].as_ref().to_vec())
    })?;
    let outcomes: Vec<QueryOutcome> = rows.into_iter().map(|r| r.outcome).collect();
    let lambda_black_box = 1.0;
    let bound = stability.beta_hat / stability.alpha_hat * lambda_black_box;
    let max_lambda = outcomes.iter().map(|o| o.achieved_lambda).fold(f64::NEG_INFINITY, f64::max);
    let mean_lambda = outcomes.iter().map(|o| o.achieved_lambda).sum::<f64>() / outcomes.len() as f64;
    Ok(AnnReport {
        bound_holds: outcomes.iter().all(|o| o.achieved_lambda <= bound * (1.0 + BOUND_SLACK)),
        queries: outcomes,
        max_lambda,
        mean_lambda,
        lambda_black_box,
        alpha_hat: stability.alpha_hat,
        beta_hat: stability.beta_hat,
        bound,
        stability,
    })
}
