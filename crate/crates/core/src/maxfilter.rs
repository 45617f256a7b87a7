//! The max filtering map `⟨⟨[x],[z]⟩⟩ = max_g ⟨x, g z⟩` and the quotient
//! distance it induces.
//!
//! Finite groups are handled by enumeration. For weighted circle actions the
//! objective `θ ↦ ⟨x, g_θ z⟩` is a trigonometric polynomial; it is sampled on
//! a uniform grid with one inverse FFT, every discrete local maximum is
//! refined inside its bracketing grid interval, and the refined peaks are
//! clustered into argmax witnesses.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::group::{FiniteGroupAction, GroupAction, WeightedCircleAction};
use crate::linalg;

const TAU: f64 = 2.0 * PI;

/// Wraps an angle into `[−π, π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta - TAU * ((theta + PI) / TAU).floor();
    if t >= PI {
        t - TAU
    } else {
        t
    }
}

fn circular_gap(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// `f(θ) = Re Σ_m c_m e^{i w_m θ}` with distinct integer frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPolynomial {
    terms: Vec<(i64, Complex64)>,
}

impl TrigPolynomial {
    pub fn new(mut terms: Vec<(i64, Complex64)>) -> Result<Self> {
        terms.sort_by_key(|t| t.0);
        if terms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidConfig("trigonometric polynomial frequencies must be distinct".into()));
        }
        Ok(TrigPolynomial { terms })
    }

    pub fn terms(&self) -> &[(i64, Complex64)] {
        &self.terms
    }

    pub fn max_frequency(&self) -> u64 {
        self.terms.iter().map(|t| t.0.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.terms.iter().map(|&(w, c)| (c * Complex64::cis(w as f64 * theta)).re).sum()
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        self.terms.iter().map(|&(w, c)| -(w as f64) * (c * Complex64::cis(w as f64 * theta)).im).sum()
    }

    pub fn second_derivative(&self, theta: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(w, c)| -((w * w) as f64) * (c * Complex64::cis(w as f64 * theta)).re)
            .sum()
    }

    fn nonconstant_mass(&self) -> f64 {
        self.terms.iter().filter(|t| t.0 != 0).map(|t| t.1.norm()).sum()
    }

    fn constant(&self) -> f64 {
        self.terms.iter().find(|t| t.0 == 0).map_or(0.0, |t| t.1.re)
    }

    /// True when every non-constant coefficient vanishes relative to the rest.
    pub fn is_flat(&self) -> bool {
        let m = self.nonconstant_mass();
        m <= 1e-13 * (m + self.constant().abs())
    }

    /// Upper bound on `|f''|`.
    pub fn curvature_bound(&self) -> f64 {
        self.terms.iter().map(|&(w, c)| (w * w) as f64 * c.norm()).sum()
    }

    /// `f(2πt/n)` for `t = 0..n`, via one length-`n` inverse DFT.
    pub fn sample_grid(&self, n: usize) -> Vec<f64> {
        thread_local! {
            static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for &(w, c) in &self.terms {
            buf[w.rem_euclid(n as i64) as usize] += c;
        }
        let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n));
        fft.process(&mut buf);
        buf.into_iter().map(|v| v.re).collect()
    }
}

/// Grid angle `2πt/n` expressed in `[−π, π)`.
pub fn grid_angle(t: usize, n: usize) -> f64 {
    wrap_angle(TAU * t as f64 / n as f64)
}

/// Local refinement strategy after the grid search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefineMethod {
    /// Golden-section search on the bracketing grid interval.
    #[default]
    Golden,
    /// Safeguarded Newton iteration on `f′` from the grid bracket.
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CircleSolverConfig {
    /// Grid size is `oversample · (2K + 1)`, at least 8.
    pub oversample: usize,
    pub refine_iters: usize,
    pub refine_method: RefineMethod,
    /// Safeguarded root-finding steps on `f′` after the main refinement.
    pub polish_iters: usize,
    /// Peaks within `cluster_tol_rel · (1 + |max|)` of the max are witnesses.
    pub cluster_tol_rel: f64,
}

impl Default for CircleSolverConfig {
    fn default() -> Self {
        CircleSolverConfig {
            oversample: 8,
            refine_iters: 40,
            refine_method: RefineMethod::Golden,
            polish_iters: 60,
            cluster_tol_rel: 1e-6,
        }
    }
}

impl CircleSolverConfig {
    /// The expensive configuration used for ground-truth distances.
    pub fn high_resolution() -> Self {
        CircleSolverConfig { oversample: 64, refine_iters: 60, ..Default::default() }
    }

    pub fn grid_size(&self, max_frequency: u64) -> usize {
        (self.oversample * (2 * max_frequency as usize + 1)).max(8)
    }

    pub fn validate(&self) -> Result<()> {
        if self.oversample == 0 {
            return Err(Error::InvalidConfig("oversample must be positive".into()));
        }
        if !(self.cluster_tol_rel > 0.0 && self.cluster_tol_rel.is_finite()) {
            return Err(Error::InvalidConfig("cluster tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Where a maximum is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Witness {
    /// `θ* ∈ [−π, π)`; the maximizing orbit point is `g_{θ*} z`.
    Angle(f64),
    /// Index of a maximizing element of a finite group.
    Element(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxFilterResult {
    pub value: f64,
    pub witnesses: Vec<Witness>,
    /// Number of distinct maximizers (clusters); the grid size when flat.
    pub multiplicity: usize,
    /// The objective is constant, every group element attains the max.
    pub flat: bool,
}

impl MaxFilterResult {
    pub fn angles(&self) -> Vec<f64> {
        self.witnesses
            .iter()
            .filter_map(|w| match w {
                Witness::Angle(t) => Some(*t),
                Witness::Element(_) => None,
            })
            .collect()
    }
}

/// A refined local maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub theta: f64,
    pub value: f64,
}

/// Coefficients `c_w = Σ_{j: k_j = w} conj(x_j) z_j`, so that
/// `⟨x, g_θ z⟩ = Re Σ_w c_w e^{i w θ}`.
pub fn alignment_polynomial(action: &WeightedCircleAction, x: &[f64], z: &[f64]) -> Result<TrigPolynomial> {
    check_dim(action.dim_real(), x.len())?;
    check_dim(action.dim_real(), z.len())?;
    let mut grouped: BTreeMap<i64, Complex64> = BTreeMap::new();
    for (j, &k) in action.weights().iter().enumerate() {
        let xj = Complex64::new(x[2 * j], x[2 * j + 1]);
        let zj = Complex64::new(z[2 * j], z[2 * j + 1]);
        *grouped.entry(k).or_default() += xj.conj() * zj;
    }
    TrigPolynomial::new(grouped.into_iter().collect())
}

/// Grid stage only: best sample index and value on the `n`-point grid.
pub fn grid_maximum(poly: &TrigPolynomial, n: usize) -> (usize, f64) {
    let samples = poly.sample_grid(n);
    samples
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn golden_max(poly: &TrigPolynomial, mut a: f64, mut b: f64, iters: usize) -> (f64, f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (poly.eval(c), poly.eval(d));
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = poly.eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = poly.eval(d);
        }
    }
    let (t, v) = if fc >= fd { (c, fc) } else { (d, fd) };
    (t, v, b - a)
}

/// Safeguarded Newton/bisection for the zero of `f′` in `[lo, hi]`, given
/// `f′(lo) ≥ 0 ≥ f′(hi)`.
fn stationary_point(poly: &TrigPolynomial, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let mut t = 0.5 * (lo + hi);
    for _ in 0..iters {
        let g = poly.derivative(t);
        if g == 0.0 {
            return t;
        }
        if g > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= 4.0 * f64::EPSILON * (1.0 + t.abs()) {
            break;
        }
        let h = poly.second_derivative(t);
        let newton = if h < 0.0 { t - g / h } else { f64::NAN };
        t = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    t
}

fn bracketed(poly: &TrigPolynomial, lo: f64, hi: f64) -> bool {
    poly.derivative(lo) >= 0.0 && poly.derivative(hi) <= 0.0
}

fn refine_peak(poly: &TrigPolynomial, center: f64, h: f64, start_value: f64, config: &CircleSolverConfig) -> Peak {
    let (lo, hi) = (center - h, center + h);
    let (mut theta, mut value, mut width) = (center, start_value, 2.0 * h);
    match config.refine_method {
        RefineMethod::Golden => {
            if config.refine_iters > 0 {
                let (t, v, w) = golden_max(poly, lo, hi, config.refine_iters);
                if v >= value {
                    (theta, value) = (t, v);
                }
                width = w;
            }
        }
        RefineMethod::Newton => {
            if bracketed(poly, lo, hi) {
                let t = stationary_point(poly, lo, hi, config.refine_iters);
                let v = poly.eval(t);
                if v >= value {
                    (theta, value) = (t, v);
                }
            } else if config.refine_iters > 0 {
                let (t, v, w) = golden_max(poly, lo, hi, config.refine_iters);
                if v >= value {
                    (theta, value) = (t, v);
                }
                width = w;
            }
        }
    }
    if config.polish_iters > 0 {
        let (plo, phi) = (theta - width, theta + width);
        let bracket = if bracketed(poly, plo, phi) {
            Some((plo, phi))
        } else if bracketed(poly, lo, hi) {
            Some((lo, hi))
        } else {
            None
        };
        if let Some((a, b)) = bracket {
            let t = stationary_point(poly, a, b, config.polish_iters);
            let v = poly.eval(t);
            // Near a flat peak values tie at rounding level; the stationary
            // point locates the argmax far better than value comparisons can.
            let slack = 8.0 * f64::EPSILON * poly.terms().iter().map(|c| c.1.norm()).sum::<f64>();
            if v >= value - slack {
                theta = t;
                value = value.max(v);
            }
        }
    }
    Peak { theta: wrap_angle(theta), value }
}

/// Clusters refined peaks within `cluster_tol` of the best value; peaks whose
/// angles are within `merge_radius` of each other count once.
pub fn argmax_witnesses(peaks: &[Peak], cluster_tol: f64, merge_radius: f64) -> MaxFilterResult {
    let best = peaks.iter().map(|p| p.value).fold(f64::NEG_INFINITY, f64::max);
    let mut near: Vec<Peak> = peaks.iter().copied().filter(|p| p.value >= best - cluster_tol).collect();
    near.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    let mut clusters: Vec<Vec<Peak>> = Vec::new();
    for p in near {
        match clusters.last_mut() {
            Some(c) if circular_gap(c.last().unwrap().theta, p.theta) <= merge_radius => c.push(p),
            _ => clusters.push(vec![p]),
        }
    }
    if clusters.len() > 1 {
        let first = clusters[0][0].theta;
        let last = clusters.last().unwrap().last().unwrap().theta;
        if circular_gap(first, last) <= merge_radius {
            let tail = clusters.pop().unwrap();
            clusters[0].extend(tail);
        }
    }
    let witnesses: Vec<Witness> = clusters
        .iter()
        .map(|c| {
            let rep = c.iter().fold(c[0], |a, &b| if b.value > a.value { b } else { a });
            Witness::Angle(rep.theta)
        })
        .collect();
    let mut witnesses = witnesses;
    witnesses.sort_by(|a, b| match (a, b) {
        (Witness::Angle(x), Witness::Angle(y)) => x.total_cmp(y),
        _ => std::cmp::Ordering::Equal,
    });
    MaxFilterResult { value: best, multiplicity: witnesses.len(), witnesses, flat: false }
}

/// Maximizes a trigonometric polynomial over `[−π, π)`.
pub fn maximize(poly: &TrigPolynomial, config: &CircleSolverConfig) -> Result<MaxFilterResult> {
    config.validate()?;
    let n = config.grid_size(poly.max_frequency());
    if poly.is_flat() {
        return Ok(MaxFilterResult { value: poly.constant(), witnesses: Vec::new(), multiplicity: n, flat: true });
    }
    let samples = poly.sample_grid(n);
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("trigonometric polynomial samples".into()));
    }
    let h = TAU / n as f64;
    let best_sample = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // A peak can sit at most h/2 from a sample, so its sample loses at most C h²/8.
    let margin = 2.0 * poly.curvature_bound() * h * h / 8.0 + 1e-12 * (1.0 + best_sample.abs());
    let peaks: Vec<Peak> = (0..n)
        .filter(|&i| {
            let v = samples[i];
            v >= best_sample - margin && v >= samples[(i + n - 1) % n] && v >= samples[(i + 1) % n]
        })
        .map(|i| refine_peak(poly, TAU * i as f64 / n as f64, h, samples[i], config))
        .collect();
    let best = peaks.iter().map(|p| p.value).fold(f64::NEG_INFINITY, f64::max);
    let tol = config.cluster_tol_rel * (1.0 + best.abs());
    Ok(argmax_witnesses(&peaks, tol, h))
}

pub fn max_filter_circle(
    action: &WeightedCircleAction,
    x: &[f64],
    z: &[f64],
    config: &CircleSolverConfig,
) -> Result<MaxFilterResult> {
    let poly = alignment_polynomial(action, x, z)?;
    maximize(&poly, config)
}

/// Exact maximum over all group elements. `multiplicity` counts distinct
/// maximizing points `Qz`; `witnesses` lists every maximizing element.
pub fn max_filter_finite(action: &FiniteGroupAction, x: &[f64], z: &[f64]) -> Result<MaxFilterResult> {
    max_filter_finite_tol(action, x, z, CircleSolverConfig::default().cluster_tol_rel)
}

pub fn max_filter_finite_tol(action: &FiniteGroupAction, x: &[f64], z: &[f64], cluster_tol_rel: f64) -> Result<MaxFilterResult> {
    check_dim(action.dim(), x.len())?;
    check_dim(action.dim(), z.len())?;
    let images: Vec<Vec<f64>> = (0..action.order()).map(|i| action.apply(i, z)).collect();
    let values: Vec<f64> = images.iter().map(|q| linalg::dot(x, q)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("finite max filter".into()));
    }
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = cluster_tol_rel * (1.0 + best.abs());
    let winners: Vec<usize> = (0..values.len()).filter(|&i| values[i] >= best - tol).collect();
    let point_tol = 1e-9 * (1.0 + linalg::norm(z));
    let mut distinct: Vec<&Vec<f64>> = Vec::new();
    for &i in &winners {
        if !distinct.iter().any(|q| linalg::dist(q, &images[i]) <= point_tol) {
            distinct.push(&images[i]);
        }
    }
    let flat = action.order() > 1 && winners.len() == action.order();
    Ok(MaxFilterResult {
        value: best,
        multiplicity: distinct.len(),
        witnesses: winners.into_iter().map(Witness::Element).collect(),
        flat,
    })
}

pub fn max_filter(action: &GroupAction, x: &[f64], z: &[f64], config: &CircleSolverConfig) -> Result<MaxFilterResult> {
    match action {
        GroupAction::Circle(c) => max_filter_circle(c, x, z, config),
        GroupAction::Finite(f) => max_filter_finite_tol(f, x, z, config.cluster_tol_rel),
    }
}

/// Quotient distance `d([x],[z])`.
///
/// Equal to `sqrt(max(0, ‖x‖² + ‖z‖² − 2⟨⟨[x],[z]⟩⟩))`; evaluated as
/// `‖x − g* z‖` at the best witness `g*` to avoid cancellation for nearby
/// orbits, falling back to the clamped identity when no witness exists.
pub fn quotient_distance(action: &GroupAction, x: &[f64], z: &[f64], config: &CircleSolverConfig) -> Result<f64> {
    let d = match action {
        GroupAction::Finite(f) => {
            check_dim(f.dim(), x.len())?;
            check_dim(f.dim(), z.len())?;
            (0..f.order()).map(|i| linalg::dist(x, &f.apply(i, z))).fold(f64::INFINITY, f64::min)
        }
        GroupAction::Circle(c) => {
            let res = max_filter_circle(c, x, z, config)?;
            let direct = res.angles().iter().map(|&t| linalg::dist(x, &c.apply(t, z))).fold(f64::INFINITY, f64::min);
            if direct.is_finite() {
                direct
            } else {
                polarization_distance(linalg::dot(x, x), linalg::dot(z, z), res.value)
            }
        }
    };
    if !d.is_finite() {
        return Err(Error::NonFinite("quotient distance".into()));
    }
    Ok(d)
}

/// `sqrt(max(0, ‖x‖² + ‖z‖² − 2v))`.
pub fn polarization_distance(x_norm_sq: f64, z_norm_sq: f64, max_filter_value: f64) -> f64 {
    (x_norm_sq + z_norm_sq - 2.0 * max_filter_value).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn circle(w: &[i64]) -> WeightedCircleAction {
        WeightedCircleAction::new(w.to_vec()).unwrap()
    }

    fn figure3_pair(k: f64) -> (WeightedCircleAction, Vec<f64>, Vec<f64>) {
        (circle(&[1, 2]), vec![1.0, 0.0, 1.0, 0.0], vec![k, 0.0, -1.0, 0.0])
    }

    #[test]
    fn alignment_polynomial_examples() {
        let p = alignment_polynomial(&circle(&[1, 1]), &[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.terms(), &[(1, c(0.0, 1.0))]);
        let (a, x, z) = figure3_pair(4.0);
        let p = alignment_polynomial(&a, &x, &z).unwrap();
        assert_eq!(p.terms(), &[(1, c(4.0, 0.0)), (2, c(-1.0, 0.0))]);
        let p = alignment_polynomial(&a, &[0.0; 4], &z).unwrap();
        assert!(p.terms().iter().all(|t| t.1 == c(0.0, 0.0)));
        assert!(matches!(alignment_polynomial(&a, &[0.0; 3], &z), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn alignment_polynomial_matches_inner_product() {
        let a = circle(&[2, -1, 2, 0]);
        let x = [0.3, -1.2, 0.5, 0.7, -0.4, 1.1, 2.0, -0.2];
        let z = [1.3, 0.2, -0.5, 0.1, 0.9, -1.0, 0.4, 0.6];
        let p = alignment_polynomial(&a, &x, &z).unwrap();
        for t in [-3.0, -1.0, 0.2, 1.7, 3.1] {
            assert!(close(p.eval(t), linalg::dot(&x, &a.apply(t, &z)), 1e-13));
        }
    }

    #[test]
    fn fft_grid_matches_direct_evaluation() {
        let p = TrigPolynomial::new(vec![(-3, c(0.2, 1.0)), (0, c(0.5, 0.0)), (5, c(-1.0, 0.3)), (12, c(0.1, 0.1))]).unwrap();
        for n in [8, 9, 24, 40] {
            let s = p.sample_grid(n);
            for (t, v) in s.iter().enumerate() {
                assert!(close(*v, p.eval(TAU * t as f64 / n as f64), 1e-13), "n={n} t={t}");
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = TrigPolynomial::new(vec![(1, c(4.0, 0.3)), (2, c(-1.0, 0.5)), (-3, c(0.2, 0.2))]).unwrap();
        let h = 1e-5;
        for t in [-2.0, 0.1, 1.3] {
            assert!(close(p.derivative(t), (p.eval(t + h) - p.eval(t - h)) / (2.0 * h), 1e-8));
            assert!(close(p.second_derivative(t), (p.derivative(t + h) - p.derivative(t - h)) / (2.0 * h), 1e-7));
        }
    }

    #[test]
    fn case3_value_is_modulus() {
        let r = max_filter_circle(&circle(&[1, 1]), &[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0], &Default::default()).unwrap();
        assert!(close(r.value, 1.0, 1e-12));
    }

    #[test]
    fn figure3_unique_peak() {
        let (a, x, z) = figure3_pair(4.0);
        let r = max_filter_circle(&a, &x, &z, &Default::default()).unwrap();
        assert!(close(r.value, 3.0, 1e-12));
        assert_eq!(r.multiplicity, 1);
        assert!(r.angles()[0].abs() < 1e-6);
    }

    #[test]
    fn figure3_two_peaks() {
        let (a, x, z) = figure3_pair(2.0);
        let r = max_filter_circle(&a, &x, &z, &Default::default()).unwrap();
        assert!(close(r.value, 1.5, 1e-12));
        assert_eq!(r.multiplicity, 2);
        let t = r.angles();
        assert!(close(t[0], -PI / 3.0, 1e-9) && close(t[1], PI / 3.0, 1e-9));
    }

    #[test]
    fn case4_sequence_splits_the_peak() {
        let (a, x, z) = figure3_pair(4.0 - 1.0 / 8.0);
        let r = max_filter_circle(&a, &x, &z, &Default::default()).unwrap();
        let expect = (31.0_f64 / 32.0).acos();
        assert_eq!(r.multiplicity, 2);
        assert!(close(r.angles()[1], expect, 1e-8));
        assert!(close(r.angles()[0], -expect, 1e-8));
    }

    #[test]
    fn orthogonal_orbits_are_flat() {
        let r = max_filter_circle(&circle(&[1, 1]), &[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0], &Default::default()).unwrap();
        assert!(r.flat);
        assert_eq!(r.value, 0.0);
        assert!(r.multiplicity > 1);
    }

    #[test]
    fn zero_template_gives_zero() {
        let r = max_filter_circle(&circle(&[1, 3]), &[1.0, 2.0, -1.0, 0.5], &[0.0; 4], &Default::default()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn newton_mode_agrees_with_golden() {
        let (a, x, z) = figure3_pair(3.5);
        let cfg = CircleSolverConfig { refine_method: RefineMethod::Newton, ..Default::default() };
        let r = max_filter_circle(&a, &x, &z, &cfg).unwrap();
        assert!(close(r.value, 3.5 * 3.5 / 8.0 + 1.0, 1e-12));
        assert_eq!(r.multiplicity, 2);
    }

    #[test]
    fn finite_examples() {
        let sign = FiniteGroupAction::sign(2).unwrap();
        let r = max_filter_finite(&sign, &[1.0, 0.0], &[-2.0, 0.0]).unwrap();
        assert_eq!(r.value, 2.0);
        assert_eq!(r.witnesses, vec![Witness::Element(1)]);

        let triv = FiniteGroupAction::trivial(2).unwrap();
        assert_eq!(max_filter_finite(&triv, &[1.0, 1.0], &[1.0, -1.0]).unwrap().value, 0.0);

        let rot = FiniteGroupAction::cyclic_rotations(4).unwrap();
        let r = max_filter_finite(&rot, &[1.0, 0.0], &[0.0, 3.0]).unwrap();
        assert!(close(r.value, 3.0, 1e-12));
        // element 3 rotates by 3π/2 = −π/2
        assert_eq!(r.witnesses, vec![Witness::Element(3)]);
    }

    #[test]
    fn distance_examples() {
        let cfg = CircleSolverConfig::default();
        let a: GroupAction = circle(&[1, 1]).into();
        assert!(quotient_distance(&a, &[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0], &cfg).unwrap() < 1e-12);
        let x = [0.3, 1.0, -2.0, 0.5];
        assert_eq!(quotient_distance(&a, &x, &x, &cfg).unwrap(), 0.0);
        let (f3, x, z) = figure3_pair(4.0);
        let d = quotient_distance(&f3.into(), &x, &z, &cfg).unwrap();
        assert!(close(d, 13f64.sqrt(), 1e-12));
    }

    #[test]
    fn distance_matches_dense_minimization() {
        let (a, x, z) = figure3_pair(4.0);
        let n = 200_000;
        let dense = (0..n).map(|t| linalg::dist(&x, &a.apply(TAU * t as f64 / n as f64, &z))).fold(f64::INFINITY, f64::min);
        let d = quotient_distance(&a.into(), &x, &z, &Default::default()).unwrap();
        assert!(d <= dense + 1e-12 && dense - d < 1e-8);
    }

    #[test]
    fn argmax_clustering_merges_wraparound() {
        let peaks = [
            Peak { theta: -PI + 1e-3, value: 1.0 },
            Peak { theta: PI - 1e-3, value: 1.0 },
            Peak { theta: 0.5, value: 1.0 - 1e-9 },
            Peak { theta: 1.5, value: 0.5 },
        ];
        let r = argmax_witnesses(&peaks, 1e-6, 0.01);
        assert_eq!(r.multiplicity, 2);
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn wrap_angle_range() {
        for t in [-10.0, -PI, 0.0, PI, 7.0, 3.0 * PI] {
            let w = wrap_angle(t);
            assert!((-PI..PI).contains(&w));
            assert!(close((t - w).rem_euclid(TAU).min(TAU - (t - w).rem_euclid(TAU)), 0.0, 1e-12));
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = CircleSolverConfig { oversample: 0, ..Default::default() };
        let (a, x, z) = figure3_pair(4.0);
        assert!(matches!(max_filter_circle(&a, &x, &z, &cfg), Err(Error::InvalidConfig(_))));
    }
}
