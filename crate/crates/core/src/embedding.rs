use crate::error::{check_dim, Result};
use crate::exec::{self, Execution};

/// A map `V → ℝ^n`, usually invariant under some group action.
pub trait Embedding: Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn embed(&self, x: &[f64]) -> Result<Vec<f64>>;
}

/// Embeds every point, in order, optionally in parallel.
pub fn embed_batch<E, P>(embedding: &E, points: &[P], exec: Execution) -> Result<Vec<Vec<f64>>>
where
    E: Embedding + ?Sized,
    P: AsRef<[f64]> + Sync,
{
    exec::try_map_indexed(exec, points.len(), |i| embedding.embed(points[i].as_ref()))
}

/// Wraps a closure as an [`Embedding`].
pub struct FnEmbedding<F> {
    input_dim: usize,
    output_dim: usize,
    f: F,
}

impl<F> FnEmbedding<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    pub fn new(input_dim: usize, output_dim: usize, f: F) -> Self {
        FnEmbedding { input_dim, output_dim, f }
    }
}

impl<F> Embedding for FnEmbedding<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.input_dim, x.len())?;
        let y = (self.f)(x);
        check_dim(self.output_dim, y.len())?;
        Ok(y)
    }
}
