//! Small dense helpers on `&[f64]`.

use nalgebra::DMatrix;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn axpy(alpha: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| alpha * a + b).collect()
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

/// Orthonormal basis (as columns) of the orthogonal complement of
/// `span(vectors)` in `ℝ^dim`. Vectors with norm below `tol` relative to the
/// largest input are treated as zero.
pub fn orthogonal_complement(vectors: &[Vec<f64>], dim: usize, tol: f64) -> DMatrix<f64> {
    // Gram-Schmidt the spanning set, then extend with the standard basis.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let scale = vectors.iter().map(|v| norm(v)).fold(0.0, f64::max).max(1.0);
    let push = |basis: &mut Vec<Vec<f64>>, v: &[f64], thresh: f64| -> bool {
        let mut w = v.to_vec();
        for _ in 0..2 {
            for b in basis.iter() {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let n = norm(&w);
        if n > thresh {
            basis.push(w.into_iter().map(|x| x / n).collect());
            true
        } else {
            false
        }
    };
    for v in vectors {
        push(&mut basis, v, tol * scale);
    }
    let span_dim = basis.len();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        push(&mut basis, &e, 1e-8);
    }
    let cols: Vec<_> = basis[span_dim..].iter().map(|c| nalgebra::DVector::from_column_slice(c)).collect();
    if cols.is_empty() {
        DMatrix::zeros(dim, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_is_orthonormal_and_orthogonal() {
        let v = vec![vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0, 0.0]];
        let c = orthogonal_complement(&v, 4, 1e-10);
        assert_eq!(c.ncols(), 2);
        let g = c.transpose() * &c;
        assert!((g - DMatrix::identity(2, 2)).amax() < 1e-12);
        for vi in &v {
            let p = c.transpose() * nalgebra::DVector::from_column_slice(vi);
            assert!(p.amax() < 1e-12);
        }
    }

    #[test]
    fn gcd_lcm() {
        assert_eq!(gcd(12, 18), 6);
        assert_eq!(gcd(0, 5), 5);
        assert_eq!(lcm(4, 6), 12);
    }
}
