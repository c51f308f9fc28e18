use crate::error::Result;
use crate::learners::{Dataset, LearnerPool};
use crate::linalg::{sym_eig, Matrix, SymMatrix};
use crate::weights::WeightVector;

use super::transform_predictions;

const MAX_ITERATIONS: usize = 500;
const RESIDUAL_TOL: f64 = 1e-10;

/// Euclidean projection onto the probability simplex (sort-and-threshold).
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (i + 1) as f64;
        if u - candidate > 0.0 {
            shift = candidate;
        }
    }
    v.iter().map(|x| (x - shift).max(0.0)).collect()
}

/// Outcome of [`simplex_least_squares`].
#[derive(Debug, Clone)]
pub struct SimplexSolve {
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Minimizes `½ wᵀQw − bᵀw` over the simplex by projected gradient with
/// step `1/λ_max(Q)`, starting from uniform weights.
///
/// Stops after 500 steps or once a step moves `w` by at most 1e-10.
pub fn simplex_least_squares(q: &SymMatrix, b: &[f64]) -> Result<SimplexSolve> {
    let m = q.dim();
    let mut w = vec![1.0 / m as f64; m];
    let lipschitz = sym_eig(q)?.eigenvalues[0];
    if m == 1 || lipschitz <= 0.0 {
        return Ok(SimplexSolve {
            weights: w,
            iterations: 0,
            residual: 0.0,
        });
    }
    let step = 1.0 / lipschitz;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        let grad = q.matvec(&w);
        let trial: Vec<f64> = w
            .iter()
            .zip(grad.iter().zip(b))
            .map(|(wi, (gi, bi))| wi - step * (gi - bi))
            .collect();
        let next = project_to_simplex(&trial);
        residual = next
            .iter()
            .zip(&w)
            .map(|(a, c)| (a - c).powi(2))
            .sum::<f64>()
            .sqrt();
        w = next;
        iterations += 1;
        if residual <= RESIDUAL_TOL {
            break;
        }
    }
    Ok(SimplexSolve {
        weights: w,
        iterations,
        residual,
    })
}

/// Simplex weights minimizing the training squared error of the
/// transformed learners `h̃ = mixing · h`.
pub fn optimized_rb_weights(
    pool: &LearnerPool,
    mixing: &Matrix,
    data: &Dataset,
) -> Result<WeightVector> {
    let transformed = transform_predictions(mixing, &pool.predictions(data.xs()));
    let m = transformed.len();
    let n = data.len() as f64;
    let mut q = Matrix::zeros(m, m);
    for a in 0..m {
        for c in 0..=a {
            let s = transformed[a]
                .iter()
                .zip(&transformed[c])
                .map(|(x, y)| x * y)
                .sum::<f64>()
                / n;
            q[(a, c)] = s;
            q[(c, a)] = s;
        }
    }
    let b: Vec<f64> = transformed
        .iter()
        .map(|row| row.iter().zip(data.ys()).map(|(h, y)| h * y).sum::<f64>() / n)
        .collect();
    let solve = simplex_least_squares(&SymMatrix::new(q)?, &b)?;
    normalized(solve.weights)
}

/// Removes rounding drift so the vector passes [`WeightVector::new`].
fn normalized(w: Vec<f64>) -> Result<WeightVector> {
    let total: f64 = w.iter().sum();
    WeightVector::new(w.into_iter().map(|v| v / total).collect())
}
