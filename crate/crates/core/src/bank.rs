//! Max filter banks `Φ([x]) = {⟨⟨[x],[z_i]⟩⟩}_{i=1}^n`.

use serde::{Deserialize, Serialize};

use crate::embedding::Embedding;
use crate::error::{check_dim, Error, Result};
use crate::group::{FixedSplit, GroupAction, WeightedCircleAction};
use crate::linalg;
use crate::maxfilter::{max_filter, CircleSolverConfig};
use crate::point::OrbitPoint;
use crate::rng;

/// Template counts implied by `χ(G)` and the cohomogeneity `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateCount {
    pub chi: u64,
    pub cohomogeneity: usize,
    /// Smallest `n` with `n > 2·χ·(c − 1)`: generic banks are bilipschitz.
    pub n_bilip: usize,
    /// `2c`: generic banks are injective.
    pub n_inj: usize,
}

pub fn recommended_template_count(action: &GroupAction) -> TemplateCount {
    let chi = action.chi();
    let c = action.cohomogeneity();
    TemplateCount {
        chi,
        cohomogeneity: c,
        n_bilip: 2 * chi as usize * c.saturating_sub(1) + 1,
        n_inj: 2 * c,
    }
}

/// `n` i.i.d. standard Gaussian templates on the real form of `V`.
pub fn generate_templates(action: &GroupAction, n: usize, seed: u64) -> Result<Vec<OrbitPoint>> {
    if n == 0 {
        return Err(Error::InvalidConfig("template count must be positive".into()));
    }
    let dim = action.dim_real();
    let mut stream = rng::substream(seed, rng::TEMPLATES);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let z = rng::gaussian_vec(&mut stream, dim, 1.0);
        if linalg::norm(&z) > 0.0 {
            out.push(OrbitPoint::new(z));
        }
    }
    Ok(out)
}

/// On-disk form of a bank.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct BankFile {
    action: GroupAction,
    templates: Vec<OrbitPoint>,
    #[serde(default)]
    config: CircleSolverConfig,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BankFile", into = "BankFile")]
pub struct MaxFilterBank {
    action: GroupAction,
    templates: Vec<OrbitPoint>,
    config: CircleSolverConfig,
    seed: Option<u64>,
    template_frobenius: f64,
}

impl TryFrom<BankFile> for MaxFilterBank {
    type Error = Error;
    fn try_from(f: BankFile) -> Result<Self> {
        let mut bank = MaxFilterBank::new(f.action, f.templates, f.config)?;
        bank.seed = f.seed;
        Ok(bank)
    }
}

impl From<MaxFilterBank> for BankFile {
    fn from(b: MaxFilterBank) -> Self {
        BankFile { action: b.action, templates: b.templates, config: b.config, seed: b.seed }
    }
}

impl MaxFilterBank {
    pub fn new(action: GroupAction, templates: Vec<OrbitPoint>, config: CircleSolverConfig) -> Result<Self> {
        if templates.is_empty() {
            return Err(Error::InvalidConfig("a bank needs at least one template".into()));
        }
        config.validate()?;
        for z in &templates {
            check_dim(action.dim_real(), z.len())?;
            if !z.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite("template coordinates".into()));
            }
        }
        let template_frobenius = templates.iter().map(|z| linalg::dot(z, z)).sum::<f64>().sqrt();
        Ok(MaxFilterBank { action, templates, config, seed: None, template_frobenius })
    }

    /// Gaussian templates; `n` defaults to the bilipschitz count.
    pub fn generate(action: GroupAction, n: Option<usize>, seed: u64, config: CircleSolverConfig) -> Result<Self> {
        let n = n.unwrap_or_else(|| recommended_template_count(&action).n_bilip);
        let templates = generate_templates(&action, n, seed)?;
        let mut bank = Self::new(action, templates, config)?;
        bank.seed = Some(seed);
        Ok(bank)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn action(&self) -> &GroupAction {
        &self.action
    }

    pub fn templates(&self) -> &[OrbitPoint] {
        &self.templates
    }

    pub fn config(&self) -> &CircleSolverConfig {
        &self.config
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    /// `‖{z_i}‖_F`, the bank's Lipschitz constant.
    pub fn template_frobenius(&self) -> f64 {
        self.template_frobenius
    }

    pub fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.action.dim_real(), x.len())?;
        self.templates
            .iter()
            .map(|z| max_filter(&self.action, x, z, &self.config).map(|r| r.value))
            .collect()
    }
}

impl Embedding for MaxFilterBank {
    fn input_dim(&self) -> usize {
        self.action.dim_real()
    }

    fn output_dim(&self) -> usize {
        self.templates.len()
    }

    fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        MaxFilterBank::embed(self, x)
    }
}

/// `Ψ([x]) = (α·P_F x, β·Φ([P_V x]))` for a circle action with fixed subspace `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitBank {
    split: FixedSplit,
    reduced: MaxFilterBank,
    alpha: f64,
    beta: f64,
}

impl SplitBank {
    /// `reduced` must act on `F^⊥`, i.e. carry `split.reduced()` as its action.
    pub fn new(split: FixedSplit, reduced: MaxFilterBank, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= beta && beta.is_finite()) {
            return Err(Error::InvalidConfig(format!("split scales need 0 < alpha <= beta, got ({alpha}, {beta})")));
        }
        if reduced.action().as_circle() != Some(split.reduced()) {
            return Err(Error::InvalidConfig("reduced bank does not act on the moving subspace".into()));
        }
        Ok(SplitBank { split, reduced, alpha, beta })
    }

    /// Builds the reduced bank from full-space templates by projecting them onto `F^⊥`.
    pub fn from_full_templates(
        action: &WeightedCircleAction,
        templates: &[OrbitPoint],
        config: CircleSolverConfig,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        let split = action.fixed_split();
        let reduced_templates = templates
            .iter()
            .map(|z| split.project_moving(z).map(OrbitPoint::new))
            .collect::<Result<Vec<_>>>()?;
        let reduced = MaxFilterBank::new(split.reduced().clone().into(), reduced_templates, config)?;
        Self::new(split, reduced, alpha, beta)
    }

    pub fn split(&self) -> &FixedSplit {
        &self.split
    }

    pub fn reduced_bank(&self) -> &MaxFilterBank {
        &self.reduced
    }

    pub fn split_embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        let fixed = self.split.project_fixed(x)?;
        let moving = self.split.project_moving(x)?;
        let mut out: Vec<f64> = fixed.into_iter().map(|v| self.alpha * v).collect();
        out.extend(self.reduced.embed(&moving)?.into_iter().map(|v| self.beta * v));
        Ok(out)
    }
}

impl Embedding for SplitBank {
    fn input_dim(&self) -> usize {
        2 * (self.split.fixed_coords().len() + self.split.moving_coords().len())
    }

    fn output_dim(&self) -> usize {
        self.split.fixed_dim() + self.reduced.len()
    }

    fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.split_embed(x)
    }
}
