//! Group actions and the invariants the stability theory consumes.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, gcd};
use crate::rng;

/// Default relative tolerance for deciding that a coordinate is zero.
pub const DEFAULT_ZERO_TOL_REL: f64 = 1e-9;

pub fn default_zero_tol(x: &[f64]) -> f64 {
    DEFAULT_ZERO_TOL_REL * linalg::norm(x)
}

/// Order of a stabilizer subgroup `G_x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilizerOrder {
    Finite(u64),
    /// The whole circle fixes the point.
    Infinite,
}

/// `θ ↦ diag{e^{i k_j θ}}` acting on `ℂ^d ≅ ℝ^{2d}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedCircleAction {
    weights: Vec<i64>,
}

impl WeightedCircleAction {
    pub fn new(weights: Vec<i64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::TrivialAction("circle action needs at least one coordinate".into()));
        }
        if weights.iter().all(|&k| k == 0) {
            return Err(Error::TrivialAction("all circle weights are zero".into()));
        }
        Ok(WeightedCircleAction { weights })
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn dim_complex(&self) -> usize {
        self.weights.len()
    }

    pub fn dim_real(&self) -> usize {
        2 * self.weights.len()
    }

    /// `g_0 = gcd{|k_j| : k_j ≠ 0}`, the order of the kernel of `θ ↦ g_θ`.
    pub fn kernel_order(&self) -> u64 {
        self.weights.iter().fold(0, |g, &k| gcd(g, k.unsigned_abs()))
    }

    pub fn max_frequency(&self) -> u64 {
        self.weights.iter().map(|k| k.unsigned_abs()).max().unwrap_or(0)
    }

    /// Applies `g_θ` to the interleaved vector `x`.
    pub fn apply(&self, theta: f64, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for (j, &k) in self.weights.iter().enumerate() {
            let (s, c) = (k as f64 * theta).sin_cos();
            let (re, im) = (x[2 * j], x[2 * j + 1]);
            out[2 * j] = c * re - s * im;
            out[2 * j + 1] = s * re + c * im;
        }
        out
    }

    /// The real `2d × 2d` matrix of `g_θ`.
    pub fn matrix(&self, theta: f64) -> DMatrix<f64> {
        let n = self.dim_real();
        let mut m = DMatrix::zeros(n, n);
        for (j, &k) in self.weights.iter().enumerate() {
            let (s, c) = (k as f64 * theta).sin_cos();
            m[(2 * j, 2 * j)] = c;
            m[(2 * j, 2 * j + 1)] = -s;
            m[(2 * j + 1, 2 * j)] = s;
            m[(2 * j + 1, 2 * j + 1)] = c;
        }
        m
    }

    /// The finite subgroup `{g_θ : θ = 2πt/n}` as explicit matrices.
    pub fn cyclic_subgroup(&self, n: usize) -> Result<FiniteGroupAction> {
        if n == 0 {
            return Err(Error::InvalidConfig("cyclic subgroup of order 0".into()));
        }
        let mats = (0..n).map(|t| self.matrix(2.0 * PI * t as f64 / n as f64)).collect();
        FiniteGroupAction::new(mats)
    }

    /// Infinitesimal generator applied to `x`: `d/dθ g_θ x` at `θ = 0`.
    pub fn tangent(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for (j, &k) in self.weights.iter().enumerate() {
            let k = k as f64;
            out[2 * j] = -k * x[2 * j + 1];
            out[2 * j + 1] = k * x[2 * j];
        }
        out
    }

    fn modulus(x: &[f64], j: usize) -> f64 {
        x[2 * j].hypot(x[2 * j + 1])
    }

    /// `|G_x| = g_x / g_0` with `g_x = gcd{|k_j| : |x_j| > zero_tol, k_j ≠ 0}`.
    pub fn stabilizer_order(&self, x: &[f64], zero_tol: f64) -> Result<StabilizerOrder> {
        check_dim(self.dim_real(), x.len())?;
        let g_x = self
            .weights
            .iter()
            .enumerate()
            .filter(|&(j, &k)| k != 0 && Self::modulus(x, j) > zero_tol)
            .fold(0, |g, (_, &k)| gcd(g, k.unsigned_abs()));
        if g_x == 0 {
            return Ok(StabilizerOrder::Infinite);
        }
        Ok(StabilizerOrder::Finite(g_x / self.kernel_order()))
    }

    /// Regular Voronoi complexity `χ(G) = max_j |k_j| / g_0`.
    pub fn chi(&self) -> u64 {
        self.max_frequency() / self.kernel_order()
    }

    /// `2d' − 1` where `d'` counts the nonzero weights.
    pub fn cohomogeneity(&self) -> usize {
        let nontrivial = self.weights.iter().filter(|&&k| k != 0).count();
        2 * nontrivial - 1
    }

    /// Whether the orbit of `x` is one-dimensional (the maximum).
    pub fn is_regular(&self, x: &[f64], zero_tol: f64) -> Result<bool> {
        check_dim(self.dim_real(), x.len())?;
        Ok(self
            .weights
            .iter()
            .enumerate()
            .any(|(j, &k)| k != 0 && Self::modulus(x, j) > zero_tol))
    }

    /// Splits `V` into the fixed subspace `F` (zero weights) and `F^⊥`.
    pub fn fixed_split(&self) -> FixedSplit {
        let (fixed, moving): (Vec<usize>, Vec<usize>) = (0..self.weights.len()).partition(|&j| self.weights[j] == 0);
        let reduced = WeightedCircleAction {
            weights: moving.iter().map(|&j| self.weights[j]).collect(),
        };
        FixedSplit { dim_complex: self.weights.len(), fixed, moving, reduced }
    }
}

/// Orthogonal decomposition `V = F ⊕ F^⊥` for a circle action.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedSplit {
    dim_complex: usize,
    fixed: Vec<usize>,
    moving: Vec<usize>,
    reduced: WeightedCircleAction,
}

impl FixedSplit {
    /// Complex coordinate indices spanning `F`.
    pub fn fixed_coords(&self) -> &[usize] {
        &self.fixed
    }

    pub fn moving_coords(&self) -> &[usize] {
        &self.moving
    }

    /// The action restricted to `F^⊥` (only nonzero weights).
    pub fn reduced(&self) -> &WeightedCircleAction {
        &self.reduced
    }

    /// Real dimension of `F`.
    pub fn fixed_dim(&self) -> usize {
        2 * self.fixed.len()
    }

    fn projector(&self, coords: &[usize]) -> DMatrix<f64> {
        let n = 2 * self.dim_complex;
        let mut p = DMatrix::zeros(n, n);
        for &j in coords {
            p[(2 * j, 2 * j)] = 1.0;
            p[(2 * j + 1, 2 * j + 1)] = 1.0;
        }
        p
    }

    pub fn fixed_projector(&self) -> DMatrix<f64> {
        self.projector(&self.fixed)
    }

    pub fn moving_projector(&self) -> DMatrix<f64> {
        self.projector(&self.moving)
    }

    fn gather(coords: &[usize], x: &[f64]) -> Vec<f64> {
        coords.iter().flat_map(|&j| [x[2 * j], x[2 * j + 1]]).collect()
    }

    /// `P_F x` in the coordinates of `F`.
    pub fn project_fixed(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(2 * self.dim_complex, x.len())?;
        Ok(Self::gather(&self.fixed, x))
    }

    /// `P_V x` in the coordinates of the reduced action.
    pub fn project_moving(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(2 * self.dim_complex, x.len())?;
        Ok(Self::gather(&self.moving, x))
    }
}

/// An explicit finite group of orthogonal `d × d` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroupAction {
    dim: usize,
    elements: Vec<DMatrix<f64>>,
}

const GROUP_TOL: f64 = 1e-9;

fn find_element(elements: &[DMatrix<f64>], m: &DMatrix<f64>) -> Option<usize> {
    elements.iter().position(|e| e.iter().zip(m.iter()).all(|(a, b)| (a - b).abs() <= GROUP_TOL))
}

impl FiniteGroupAction {
    pub fn new(elements: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = elements.first().ok_or_else(|| Error::InvalidGroup("no group elements".into()))?;
        let dim = first.nrows();
        if dim == 0 {
            return Err(Error::InvalidGroup("zero-dimensional matrices".into()));
        }
        let identity = DMatrix::<f64>::identity(dim, dim);
        for (i, q) in elements.iter().enumerate() {
            if q.nrows() != dim || q.ncols() != dim {
                return Err(Error::InvalidGroup(format!("element {i} is not {dim}x{dim}")));
            }
            if !q.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidGroup(format!("element {i} has non-finite entries")));
            }
            let defect = (q.transpose() * q - &identity).amax();
            if defect > GROUP_TOL {
                return Err(Error::InvalidGroup(format!("element {i} is not orthogonal (defect {defect:.3e})")));
            }
        }
        if find_element(&elements, &identity).is_none() {
            return Err(Error::InvalidGroup("identity is missing".into()));
        }
        for (i, a) in elements.iter().enumerate() {
            if find_element(&elements, &a.transpose()).is_none() {
                return Err(Error::InvalidGroup(format!("inverse of element {i} is missing")));
            }
            for (j, b) in elements.iter().enumerate() {
                if find_element(&elements, &(a * b)).is_none() {
                    return Err(Error::InvalidGroup(format!("product of elements {i} and {j} is missing")));
                }
            }
        }
        Ok(FiniteGroupAction { dim, elements })
    }

    /// Builds from row-major nested vectors, as stored in action files.
    pub fn from_rows(matrices: &[Vec<Vec<f64>>]) -> Result<Self> {
        let mut mats = Vec::with_capacity(matrices.len());
        for (i, rows) in matrices.iter().enumerate() {
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidGroup(format!("element {i} is not square")));
            }
            mats.push(DMatrix::from_fn(n, n, |r, c| rows[r][c]));
        }
        Self::new(mats)
    }

    pub fn to_rows(&self) -> Vec<Vec<Vec<f64>>> {
        self.elements
            .iter()
            .map(|m| (0..self.dim).map(|r| (0..self.dim).map(|c| m[(r, c)]).collect()).collect())
            .collect()
    }

    /// `{I}` on `ℝ^dim`.
    pub fn trivial(dim: usize) -> Result<Self> {
        Self::new(vec![DMatrix::identity(dim, dim)])
    }

    /// `{±I}` on `ℝ^dim`.
    pub fn sign(dim: usize) -> Result<Self> {
        let id = DMatrix::<f64>::identity(dim, dim);
        Self::new(vec![id.clone(), -id])
    }

    /// Planar rotations by multiples of `2π/order`.
    pub fn cyclic_rotations(order: usize) -> Result<Self> {
        let mats = (0..order)
            .map(|t| {
                let (s, c) = (2.0 * PI * t as f64 / order as f64).sin_cos();
                DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
            })
            .collect();
        Self::new(mats)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[DMatrix<f64>] {
        &self.elements
    }

    pub fn apply(&self, index: usize, x: &[f64]) -> Vec<f64> {
        let q = &self.elements[index];
        (0..self.dim).map(|r| (0..self.dim).map(|c| q[(r, c)] * x[c]).sum()).collect()
    }

    /// Indices of elements `Q` with `‖Qx − x‖ ≤ tol`.
    pub fn stabilizer(&self, x: &[f64], tol: f64) -> Result<Vec<usize>> {
        check_dim(self.dim, x.len())?;
        Ok((0..self.elements.len()).filter(|&i| linalg::dist(&self.apply(i, x), x) <= tol).collect())
    }

    /// `χ(G)` from stabilizers of an enumerated candidate set: the origin, one
    /// generic Gaussian point, and every coordinate-subset indicator (all
    /// subsets for `d ≤ 12`, singletons beyond).
    pub fn chi(&self) -> u64 {
        let d = self.dim;
        let mut points: Vec<Vec<f64>> = vec![vec![0.0; d]];
        points.push(rng::gaussian_vec(&mut rng::substream(0, "chi-generic"), d, 1.0));
        if d <= 12 {
            for mask in 1u32..(1 << d) {
                points.push((0..d).map(|j| if mask >> j & 1 == 1 { 1.0 } else { 0.0 }).collect());
            }
        } else {
            for j in 0..d {
                let mut e = vec![0.0; d];
                e[j] = 1.0;
                points.push(e);
            }
        }
        let stabs: Vec<Vec<usize>> = points
            .iter()
            .map(|p| {
                let tol = GROUP_TOL * (1.0 + linalg::norm(p));
                self.stabilizer(p, tol).expect("dimension matches by construction")
            })
            .collect();
        let mut best = 1;
        for big in &stabs {
            for small in &stabs {
                if small.len() <= big.len() && small.iter().all(|i| big.binary_search(i).is_ok()) {
                    best = best.max((big.len() / small.len()) as u64);
                }
            }
        }
        best
    }
}

/// Serialized form of an action: `{"kind":"circle","weights":[..]}` or
/// `{"kind":"finite","matrices":[[[..]]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ActionSpec {
    Circle { weights: Vec<i64> },
    Finite { matrices: Vec<Vec<Vec<f64>>> },
}

/// One of the two supported action families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ActionSpec", into = "ActionSpec")]
pub enum GroupAction {
    Circle(WeightedCircleAction),
    Finite(FiniteGroupAction),
}

impl TryFrom<ActionSpec> for GroupAction {
    type Error = Error;
    fn try_from(spec: ActionSpec) -> Result<Self> {
        match spec {
            ActionSpec::Circle { weights } => Ok(GroupAction::Circle(WeightedCircleAction::new(weights)?)),
            ActionSpec::Finite { matrices } => Ok(GroupAction::Finite(FiniteGroupAction::from_rows(&matrices)?)),
        }
    }
}

impl From<GroupAction> for ActionSpec {
    fn from(a: GroupAction) -> Self {
        match a {
            GroupAction::Circle(c) => ActionSpec::Circle { weights: c.weights },
            GroupAction::Finite(f) => ActionSpec::Finite { matrices: f.to_rows() },
        }
    }
}

impl From<WeightedCircleAction> for GroupAction {
    fn from(a: WeightedCircleAction) -> Self {
        GroupAction::Circle(a)
    }
}

impl From<FiniteGroupAction> for GroupAction {
    fn from(a: FiniteGroupAction) -> Self {
        GroupAction::Finite(a)
    }
}

/// A concrete group element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupElement {
    Angle(f64),
    Index(usize),
}

impl GroupAction {
    pub fn circle(weights: Vec<i64>) -> Result<Self> {
        WeightedCircleAction::new(weights).map(GroupAction::Circle)
    }

    pub fn dim_real(&self) -> usize {
        match self {
            GroupAction::Circle(c) => c.dim_real(),
            GroupAction::Finite(f) => f.dim(),
        }
    }

    pub fn as_circle(&self) -> Option<&WeightedCircleAction> {
        match self {
            GroupAction::Circle(c) => Some(c),
            GroupAction::Finite(_) => None,
        }
    }

    pub fn act(&self, g: GroupElement, x: &[f64]) -> Vec<f64> {
        match (self, g) {
            (GroupAction::Circle(c), GroupElement::Angle(t)) => c.apply(t, x),
            (GroupAction::Finite(f), GroupElement::Index(i)) => f.apply(i, x),
            (GroupAction::Circle(_), GroupElement::Index(_)) | (GroupAction::Finite(_), GroupElement::Angle(_)) => {
                panic!("group element does not belong to this action family")
            }
        }
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        match self {
            GroupAction::Circle(_) => GroupElement::Angle(rng.random_range(-PI..PI)),
            GroupAction::Finite(f) => GroupElement::Index(rng.random_range(0..f.order())),
        }
    }

    /// Spanning vectors of the orbit tangent space at `x`.
    pub fn tangent_vectors(&self, x: &[f64]) -> Vec<Vec<f64>> {
        match self {
            GroupAction::Circle(c) => vec![c.tangent(x)],
            GroupAction::Finite(_) => Vec::new(),
        }
    }

    pub fn chi(&self) -> u64 {
        match self {
            GroupAction::Circle(c) => c.chi(),
            GroupAction::Finite(f) => f.chi(),
        }
    }

    pub fn cohomogeneity(&self) -> usize {
        match self {
            GroupAction::Circle(c) => c.cohomogeneity(),
            GroupAction::Finite(f) => f.dim(),
        }
    }
}
