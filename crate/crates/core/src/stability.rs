//! Empirical stability probes for invariant embeddings.
//!
//! Every ratio here is `‖f(x) − f(y)‖ / d([x],[y])` with the denominator
//! computed by the high-resolution circle solver, independent of whatever
//! solver configuration the embedding itself uses. Observed extremes are
//! bounds in one direction only: `α̂` can only overestimate the true lower
//! Lipschitz constant and `β̂` can only underestimate the upper one.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::embedding::Embedding;
use crate::error::{check_dim, Error, Result};
use crate::exec::{self, Execution};
use crate::group::{GroupAction, WeightedCircleAction};
use crate::linalg;
use crate::maxfilter::{maximize, max_filter_circle, quotient_distance, CircleSolverConfig, TrigPolynomial};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    /// Standard deviation of each Gaussian sample coordinate.
    pub scale: f64,
    /// Pairs with `d([x],[y]) ≤ dist_floor_rel · (‖x‖ + ‖y‖)` are skipped.
    pub dist_floor_rel: f64,
    pub histogram_bins: usize,
    pub distance_solver: CircleSolverConfig,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            scale: 1.0,
            dist_floor_rel: 1e-9,
            histogram_bins: 20,
            distance_solver: CircleSolverConfig::high_resolution(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairWitness {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub ratio: f64,
    pub distance: f64,
}

/// Minimum and maximum ratio observed at one scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalePoint {
    pub scale: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Always `"observed"`: these are sample extremes, not certified bounds.
    pub kind: String,
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub num_pairs: usize,
    pub num_excluded: usize,
    pub worst_pair: PairWitness,
    /// `(bucket lower edge, count)` over `[α̂, β̂]`.
    pub ratio_histogram: Vec<(f64, usize)>,
    /// Extremes grouped by the decade of the pair distance, largest first.
    pub scale_trace: Vec<ScalePoint>,
}

/// One evaluated pair; `pair` indexes the caller's pair list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioSample {
    pub pair: usize,
    pub ratio: f64,
    pub distance: f64,
}

/// `Some((ratio, distance))`, or `None` when the pair is below the distance floor.
pub fn pair_ratio<E: Embedding + ?Sized>(
    embedding: &E,
    action: &GroupAction,
    x: &[f64],
    y: &[f64],
    cfg: &SamplerConfig,
) -> Result<Option<(f64, f64)>> {
    let d = quotient_distance(action, x, y, &cfg.distance_solver)?;
    if d <= cfg.dist_floor_rel * (linalg::norm(x) + linalg::norm(y)) {
        return Ok(None);
    }
    let num = linalg::dist(&embedding.embed(x)?, &embedding.embed(y)?);
    let ratio = num / d;
    if !ratio.is_finite() {
        return Err(Error::NonFinite("embedding ratio".into()));
    }
    Ok(Some((ratio, d)))
}

impl StabilityReport {
    /// Aggregates evaluated pairs; `lookup` returns the points of pair `i`.
    pub fn from_samples<F>(samples: &[RatioSample], num_excluded: usize, bins: usize, lookup: F) -> Result<Self>
    where
        F: Fn(usize) -> (Vec<f64>, Vec<f64>),
    {
        let first = samples.first().ok_or_else(|| Error::Degenerate("every sampled pair fell below the distance floor".into()))?;
        let worst = samples.iter().fold(*first, |a, b| if b.ratio < a.ratio { *b } else { a });
        let alpha = worst.ratio;
        let beta = samples.iter().map(|s| s.ratio).fold(f64::NEG_INFINITY, f64::max);
        let bins = bins.max(1);
        let width = (beta - alpha) / bins as f64;
        let mut counts = vec![0usize; bins];
        for s in samples {
            let b = if width > 0.0 { (((s.ratio - alpha) / width) as usize).min(bins - 1) } else { 0 };
            counts[b] += 1;
        }
        let ratio_histogram = counts.into_iter().enumerate().map(|(i, c)| (alpha + i as f64 * width, c)).collect();

        let mut decades: std::collections::BTreeMap<i32, ScalePoint> = Default::default();
        for s in samples {
            let dec = s.distance.log10().floor() as i32;
            let e = decades.entry(dec).or_insert(ScalePoint {
                scale: 10f64.powi(dec),
                min_ratio: f64::INFINITY,
                max_ratio: f64::NEG_INFINITY,
                pairs: 0,
            });
            e.min_ratio = e.min_ratio.min(s.ratio);
            e.max_ratio = e.max_ratio.max(s.ratio);
            e.pairs += 1;
        }
        let (x, y) = lookup(worst.pair);
        Ok(StabilityReport {
            kind: "observed".into(),
            alpha_hat: alpha,
            beta_hat: beta,
            num_pairs: samples.len(),
            num_excluded,
            worst_pair: PairWitness { x, y, ratio: worst.ratio, distance: worst.distance },
            ratio_histogram,
            scale_trace: decades.into_values().rev().collect(),
        })
    }
}

/// Evaluates a fixed list of pairs in parallel and aggregates the ratios.
pub fn report_for_pairs<E: Embedding + ?Sized>(
    embedding: &E,
    action: &GroupAction,
    pairs: &[(Vec<f64>, Vec<f64>)],
    cfg: &SamplerConfig,
    exec: Execution,
) -> Result<StabilityReport> {
    let evaluated = exec::try_map_indexed(exec, pairs.len(), |i| pair_ratio(embedding, action, &pairs[i].0, &pairs[i].1, cfg))?;
    let samples: Vec<RatioSample> = evaluated
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.map(|(ratio, distance)| RatioSample { pair: i, ratio, distance }))
        .collect();
    StabilityReport::from_samples(&samples, pairs.len() - samples.len(), cfg.histogram_bins, |i| pairs[i].clone())
}

/// Monte Carlo estimate of the bilipschitz bounds over Gaussian pairs.
pub fn estimate_bilipschitz<E: Embedding + ?Sized>(
    embedding: &E,
    action: &GroupAction,
    cfg: &SamplerConfig,
    num_pairs: usize,
    seed: u64,
    exec: Execution,
) -> Result<StabilityReport> {
    if num_pairs == 0 {
        return Err(Error::InvalidConfig("num_pairs must be positive".into()));
    }
    check_dim(action.dim_real(), embedding.input_dim())?;
    let dim = action.dim_real();
    let mut stream = rng::substream(seed, rng::SAMPLER);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..num_pairs)
        .map(|_| (rng::gaussian_vec(&mut stream, dim, cfg.scale), rng::gaussian_vec(&mut stream, dim, cfg.scale)))
        .collect();
    report_for_pairs(embedding, action, &pairs, cfg, exec)
}

/// Min/max ratio over random pairs in the ball of radius `t` around `x`,
/// for each `t` in `scales`. The same unit-ball draws are reused at every
/// scale.
#[allow(clippy::too_many_arguments)]
pub fn local_lower_probe<E: Embedding + ?Sized>(
    embedding: &E,
    action: &GroupAction,
    x: &[f64],
    scales: &[f64],
    pairs_per_scale: usize,
    seed: u64,
    cfg: &SamplerConfig,
    exec: Execution,
) -> Result<Vec<ScalePoint>> {
    check_dim(action.dim_real(), x.len())?;
    if linalg::norm(x) == 0.0 {
        return Err(Error::InvalidConfig("local probe needs a nonzero base point".into()));
    }
    if scales.is_empty() || scales.iter().any(|t| !t.is_finite() || *t <= 0.0) || scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidConfig("scales must be positive and strictly decreasing".into()));
    }
    if pairs_per_scale == 0 {
        return Err(Error::InvalidConfig("pairs_per_scale must be positive".into()));
    }
    let dim = x.len();
    let mut stream = rng::substream(seed, "local-probe");
    let unit: Vec<(Vec<f64>, Vec<f64>)> =
        (0..pairs_per_scale).map(|_| (rng::ball_vec(&mut stream, dim, 1.0), rng::ball_vec(&mut stream, dim, 1.0))).collect();
    let mut trace = Vec::with_capacity(scales.len());
    for &t in scales {
        let pairs: Vec<(Vec<f64>, Vec<f64>)> =
            unit.iter().map(|(a, b)| (linalg::axpy(t, a, x), linalg::axpy(t, b, x))).collect();
        let r = exec::try_map_indexed(exec, pairs.len(), |i| pair_ratio(embedding, action, &pairs[i].0, &pairs[i].1, cfg))?;
        let ratios: Vec<f64> = r.into_iter().flatten().map(|(ratio, _)| ratio).collect();
        if ratios.is_empty() {
            return Err(Error::Degenerate(format!("no usable pairs at scale {t}")));
        }
        trace.push(ScalePoint {
            scale: t,
            min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
            max_ratio: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            pairs: ratios.len(),
        });
    }
    Ok(trace)
}

/// Ratios for the pairs `(base + t·v, base + 2t·v)`.
pub fn pair_ratio_trace<E: Embedding + ?Sized>(
    embedding: &E,
    action: &GroupAction,
    base: &[f64],
    direction: &[f64],
    scales: &[f64],
    cfg: &SamplerConfig,
) -> Result<Vec<(f64, f64)>> {
    check_dim(action.dim_real(), base.len())?;
    check_dim(base.len(), direction.len())?;
    scales
        .iter()
        .map(|&t| {
            let p = linalg::axpy(t, direction, base);
            let q = linalg::axpy(2.0 * t, direction, base);
            let r = pair_ratio(embedding, action, &p, &q, cfg)?
                .ok_or_else(|| Error::Degenerate(format!("pair at scale {t} is below the distance floor")))?;
            Ok((t, r.0))
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    cov / var
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateDirectionResult {
    /// Unit vector in `N_x ∩ x^⊥` minimizing `‖Df(x) v‖`.
    pub v: Vec<f64>,
    /// `‖Df(x) v‖`.
    pub residual: f64,
    /// Dimension of `N_x ∩ x^⊥`.
    pub restricted_dim: usize,
    /// Whether halving the finite-difference step left the Jacobian stable.
    pub converged: bool,
    /// Max entrywise change of the Jacobian under step halving.
    pub jacobian_change: f64,
    /// `(t, ‖f(x+tv) − f(x)‖ / d([x+tv],[x]))`.
    pub ratio_trace: Vec<(f64, f64)>,
}

fn jacobian<E: Embedding + ?Sized>(f: &E, x: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let n = f.output_dim();
    let mut j = DMatrix::zeros(n, x.len());
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        let fp = f.embed(&xp)?;
        xp[i] = x[i] - h;
        let fm = f.embed(&xp)?;
        xp[i] = x[i];
        for r in 0..n {
            j[(r, i)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    if j.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("finite-difference Jacobian".into()));
    }
    Ok(j)
}

pub const DEFAULT_TRACE_SCALES: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

/// Direction in `N_x ∩ x^⊥` along which the numerical derivative of `f`
/// is smallest. At non-principal points where `f` is differentiable, an
/// exact kernel direction exists.
pub fn find_degenerate_direction<E: Embedding + ?Sized>(
    f: &E,
    action: &GroupAction,
    x: &[f64],
    fd_step: Option<f64>,
    cfg: &SamplerConfig,
) -> Result<DegenerateDirectionResult> {
    check_dim(action.dim_real(), x.len())?;
    check_dim(f.input_dim(), x.len())?;
    let h = fd_step.unwrap_or(1e-5 * (1.0 + linalg::norm(x)));
    let jac = jacobian(f, x, h)?;
    let jac_half = jacobian(f, x, h / 2.0)?;
    let jacobian_change = (&jac - &jac_half).amax();
    let converged = jacobian_change <= 1e-4 * (1.0 + jac.amax());

    let mut span = action.tangent_vectors(x);
    span.push(x.to_vec());
    let basis = linalg::orthogonal_complement(&span, x.len(), 1e-10);
    let m = basis.ncols();
    if m == 0 {
        return Err(Error::Degenerate("N_x ∩ x^⊥ is trivial".into()));
    }
    let restricted = &jac * &basis;
    // pad with zero rows so the SVD reports all m singular values
    let rows = restricted.nrows().max(m);
    let mut padded = DMatrix::zeros(rows, m);
    padded.view_mut((0, 0), (restricted.nrows(), m)).copy_from(&restricted);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::NonFinite("SVD did not converge".into()))?;
    let (imin, _) = svd.singular_values.iter().enumerate().fold((0, f64::INFINITY), |a, (i, &s)| if s < a.1 { (i, s) } else { a });
    let u: DVector<f64> = v_t.row(imin).transpose();
    let mut v: Vec<f64> = (&basis * u).iter().copied().collect();
    let vn = linalg::norm(&v);
    v.iter_mut().for_each(|c| *c /= vn);
    let residual = (&jac * DVector::from_column_slice(&v)).norm();

    let fx = f.embed(x)?;
    let mut ratio_trace = Vec::new();
    for t in DEFAULT_TRACE_SCALES {
        let xt = linalg::axpy(t, &v, x);
        let d = quotient_distance(action, &xt, x, &cfg.distance_solver)?;
        if d > 0.0 {
            ratio_trace.push((t, linalg::dist(&f.embed(&xt)?, &fx) / d));
        }
    }
    Ok(DegenerateDirectionResult { v, residual, restricted_dim: m, converged, jacobian_change, ratio_trace })
}

/// `k·cos θ − cos 2θ`.
pub fn figure3_polynomial(k: f64) -> TrigPolynomial {
    use num_complex::Complex64;
    TrigPolynomial::new(vec![(1, Complex64::new(k, 0.0)), (2, Complex64::new(-1.0, 0.0))]).expect("distinct frequencies")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure3Point {
    pub k: f64,
    pub max_value: f64,
    pub argmax: Vec<f64>,
}

pub fn figure3_repro(k_values: &[f64], config: &CircleSolverConfig) -> Result<Vec<Figure3Point>> {
    k_values
        .iter()
        .map(|&k| {
            let r = maximize(&figure3_polynomial(k), config)?;
            Ok(Figure3Point { k, max_value: r.value, argmax: r.angles() })
        })
        .collect()
}

/// `(θ_j, k cos θ_j − cos 2θ_j)` at `θ_j = −π + 2πj/samples`.
pub fn figure3_curve(k: f64, samples: usize) -> Vec<(f64, f64)> {
    let p = figure3_polynomial(k);
    (0..samples)
        .map(|j| {
            let t = -PI + 2.0 * PI * j as f64 / samples as f64;
            (t, p.eval(t))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VoronoiClass {
    /// Single maximizer, stable under grid refinement.
    Unique,
    Multiple,
    /// The alignment objective is constant.
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoronoiProbe {
    pub multiplicity: usize,
    pub class: VoronoiClass,
}

/// Numerical evidence for whether `z` aligns with `[x]` at a unique point.
pub fn voronoi_multiplicity_probe(
    action: &WeightedCircleAction,
    x: &[f64],
    z: &[f64],
    config: &CircleSolverConfig,
) -> Result<VoronoiProbe> {
    let coarse = max_filter_circle(action, x, z, config)?;
    if coarse.flat {
        return Ok(VoronoiProbe { multiplicity: coarse.multiplicity, class: VoronoiClass::Flat });
    }
    let fine_cfg = CircleSolverConfig { oversample: 4 * config.oversample, ..*config };
    let fine = max_filter_circle(action, x, z, &fine_cfg)?;
    let class = if coarse.multiplicity == 1 && fine.multiplicity == 1 { VoronoiClass::Unique } else { VoronoiClass::Multiple };
    Ok(VoronoiProbe { multiplicity: fine.multiplicity.max(coarse.multiplicity), class })
}
