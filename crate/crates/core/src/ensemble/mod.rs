//! Aggregation of a learner pool.
//!
//! The Fibonacci ensemble with Rao–Blackwell orthogonalization is
//!
//! 1. fit the pool,
//! 2. form the empirical Gram matrix `G_{mm'} = (1/n) Σ_i h_m(x_i) h_m'(x_i)`,
//! 3. whiten the learners, `h̃ = G^{-1/2} h`,
//! 4. combine `f̂(x) = Σ_m α_m h̃_m(x)` with Fibonacci weights `α`.
//!
//! [`gram`], [`orthogonalize`] and [`aggregate`] implement steps 2–4; the
//! weights come from [`crate::weights`] or from [`optimized_rb_weights`].

mod flow;
mod optimize;
mod recursion;
mod risk;

pub use flow::{recursive_flow, FlowConfig, FlowPredictor, LearnerSpec};
pub use optimize::{optimized_rb_weights, project_to_simplex, simplex_least_squares, SimplexSolve};
pub use recursion::{RecursionOperator, StabilityReport};
pub use risk::{
    constrained_risk_minimizer, oracle_rb_weights, risk_orthonormal, variance_of_weighted,
};

use crate::error::{domain, Result};
use crate::learners::{LearnerPool, Predict};
use crate::linalg::{inv_sqrt_from_eig, sym_eig, Matrix, SymMatrix};
use crate::weights::WeightVector;

/// Empirical inner products of learner predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub g: SymMatrix,
    pub n_samples: usize,
}

impl GramMatrix {
    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    /// `1e-8·λ_max`, the default floor for whitening.
    pub fn default_eig_floor(&self) -> Result<f64> {
        let top = sym_eig(&self.g)?.eigenvalues[0];
        Ok((1e-8 * top).max(f64::MIN_POSITIVE))
    }
}

/// Gram matrix of prediction rows (`preds[m][i] = h_m(x_i)`).
pub fn gram_from_predictions(preds: &[Vec<f64>]) -> Result<GramMatrix> {
    let m = preds.len();
    if m == 0 {
        return Err(domain("Gram matrix of an empty pool"));
    }
    let n = preds[0].len();
    if n == 0 {
        return Err(domain("Gram matrix needs at least one evaluation point"));
    }
    if preds.iter().any(|p| p.len() != n) {
        return Err(domain("prediction rows have different lengths"));
    }
    let mut g = Matrix::zeros(m, m);
    for a in 0..m {
        for b in 0..=a {
            let s = preds[a]
                .iter()
                .zip(&preds[b])
                .map(|(x, y)| x * y)
                .sum::<f64>()
                / n as f64;
            g[(a, b)] = s;
            g[(b, a)] = s;
        }
    }
    Ok(GramMatrix {
        g: SymMatrix::new(g)?,
        n_samples: n,
    })
}

/// Gram matrix of `pool` evaluated at `xs`.
pub fn gram(pool: &LearnerPool, xs: &[f64]) -> Result<GramMatrix> {
    if xs.is_empty() {
        return Err(domain("Gram matrix needs at least one evaluation point"));
    }
    gram_from_predictions(&pool.predictions(xs))
}

/// The whitening map `W = G^{-1/2}` with eigenvalues floored at `eig_floor`.
///
/// Rows of `W·H` are empirically orthonormal when `λ_min(G) ≥ eig_floor`.
pub fn orthogonalize(g: &GramMatrix, eig_floor: f64) -> Result<Matrix> {
    if !(eig_floor > 0.0 && eig_floor.is_finite()) {
        return Err(domain(format!(
            "eigenvalue floor must be positive, got {eig_floor}"
        )));
    }
    let eig = sym_eig(&g.g)?;
    Ok(inv_sqrt_from_eig(&eig, g.g.max_abs(), eig_floor)?.into_matrix())
}

/// [`orthogonalize`] with the floor `1e-8·λ_max`.
pub fn orthogonalize_default(g: &GramMatrix) -> Result<Matrix> {
    let eig = sym_eig(&g.g)?;
    let floor = (1e-8 * eig.eigenvalues[0]).max(f64::MIN_POSITIVE);
    Ok(inv_sqrt_from_eig(&eig, g.g.max_abs(), floor)?.into_matrix())
}

/// `mixing · preds`: row `m` is the transformed learner `h̃_m`.
pub fn transform_predictions(mixing: &Matrix, preds: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = preds.first().map_or(0, Vec::len);
    (0..mixing.rows())
        .map(|m| {
            let mut row = vec![0.0; n];
            for (k, p) in preds.iter().enumerate() {
                let a = mixing[(m, k)];
                for (r, v) in row.iter_mut().zip(p) {
                    *r += a * v;
                }
            }
            row
        })
        .collect()
}

/// A weighted, optionally whitened, combination of a pool.
#[derive(Debug, Clone)]
pub struct EnsemblePredictor<'a> {
    pub pool: &'a LearnerPool,
    pub weights: WeightVector,
    pub mixing: Option<Matrix>,
    /// `mixingᵀ w`: the coefficient of each raw learner.
    effective: Vec<f64>,
}

impl EnsemblePredictor<'_> {
    /// Coefficients on the raw pool members.
    pub fn effective_coefficients(&self) -> &[f64] {
        &self.effective
    }
}

impl Predict for EnsemblePredictor<'_> {
    fn predict_one(&self, x: f64) -> f64 {
        self.pool
            .members
            .iter()
            .zip(&self.effective)
            .filter(|(_, c)| **c != 0.0)
            .map(|(l, c)| c * l.predict_one(x))
            .sum()
    }

    fn predict(&self, xs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; xs.len()];
        for (l, c) in self.pool.members.iter().zip(&self.effective) {
            if *c == 0.0 {
                continue;
            }
            for (o, p) in out.iter_mut().zip(l.predict(xs)) {
                *o += c * p;
            }
        }
        out
    }
}

/// `f̂(x) = Σ_m w_m (W h(x))_m`, or `Σ_m w_m h_m(x)` without mixing.
pub fn aggregate<'a>(
    pool: &'a LearnerPool,
    weights: WeightVector,
    mixing: Option<Matrix>,
) -> Result<EnsemblePredictor<'a>> {
    let m = pool.len();
    if weights.len() != m {
        return Err(domain(format!(
            "{} weights for a pool of {m}",
            weights.len()
        )));
    }
    let effective = match &mixing {
        Some(w) => {
            if w.rows() != m || w.cols() != m {
                return Err(domain(format!(
                    "mixing matrix is {}x{}, pool has {m} members",
                    w.rows(),
                    w.cols()
                )));
            }
            w.tr_matvec(&weights)
        }
        None => weights.to_vec(),
    };
    Ok(EnsemblePredictor {
        pool,
        weights,
        mixing,
        effective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{Family, Learner, PolyLearner};

    /// Learner `a + b·x` (identity standardization).
    fn line(a: f64, b: f64) -> Learner {
        Learner::Poly(PolyLearner::from_coefficients(vec![a, b], 0.0, 1.0))
    }

    fn pool(members: Vec<Learner>) -> LearnerPool {
        LearnerPool {
            family: Family::Poly,
            members,
        }
    }

    #[test]
    fn gram_examples() {
        // predictions [1, 1] and [1, -1] at x = -1, 1
        let p = pool(vec![line(1.0, 0.0), line(0.0, -1.0)]);
        let g = gram(&p, &[-1.0, 1.0]).unwrap();
        assert_eq!(g.g.matrix(), &Matrix::identity(2));
        assert_eq!(g.n_samples, 2);

        let single = pool(vec![line(2.0, 0.0)]);
        assert_eq!(gram(&single, &[0.0, 1.0]).unwrap().g[(0, 0)], 4.0);

        let dup = pool(vec![line(1.0, 2.0), line(1.0, 2.0)]);
        let g = gram(&dup, &[0.0, 0.5, 1.0]).unwrap();
        let v = g.g[(0, 0)];
        assert!([g.g[(0, 1)], g.g[(1, 0)], g.g[(1, 1)]]
            .iter()
            .all(|x| *x == v));
        assert!(gram(&dup, &[]).is_err());
    }

    #[test]
    fn orthogonalize_examples() {
        let id = GramMatrix {
            g: SymMatrix::new(Matrix::identity(2)).unwrap(),
            n_samples: 2,
        };
        assert!(
            orthogonalize(&id, 1e-12)
                .unwrap()
                .sub(&Matrix::identity(2))
                .max_abs()
                < 1e-15
        );

        // learners 2 and 3·x on x = ±1 have Gram diag(4, 9)
        let p = pool(vec![line(2.0, 0.0), line(0.0, 3.0)]);
        let xs = [-1.0, 1.0];
        let g = gram(&p, &xs).unwrap();
        let w = orthogonalize(&g, 1e-12).unwrap();
        assert!(w.sub(&Matrix::from_diag(&[0.5, 1.0 / 3.0])).max_abs() < 1e-15);
        let t = transform_predictions(&w, &p.predictions(&xs));
        let gt = gram_from_predictions(&t).unwrap();
        assert!(gt.g.sub(&Matrix::identity(2)).max_abs() < 1e-14);
    }

    #[test]
    fn orthogonalize_correlated_pair() {
        // two-point predictions with Gram [[2, 1], [1, 2]]
        let s = (1.5f64).sqrt();
        let h1 = vec![s + 0.5f64.sqrt(), s - 0.5f64.sqrt()];
        let h2 = vec![s - 0.5f64.sqrt(), s + 0.5f64.sqrt()];
        let preds = vec![h1, h2];
        let g = gram_from_predictions(&preds).unwrap();
        assert!(
            g.g.sub(&Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]))
                .max_abs()
                < 1e-14
        );
        let w = orthogonalize(&g, 1e-12).unwrap();
        assert!((w[(0, 0)] - 0.78868).abs() < 1e-5 && (w[(0, 1)] + 0.21132).abs() < 1e-5);
        let gt = gram_from_predictions(&transform_predictions(&w, &preds)).unwrap();
        assert!(gt.g.sub(&Matrix::identity(2)).max_abs() < 1e-8);
    }

    #[test]
    fn duplicated_learners_whiten_without_error() {
        let p = pool(vec![line(1.0, 2.0), line(1.0, 2.0), line(0.0, 1.0)]);
        let g = gram(&p, &[0.0, 0.3, 0.6, 1.0]).unwrap();
        let w = orthogonalize_default(&g).unwrap();
        assert!(w.as_slice().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn orthogonalize_rejects_indefinite() {
        let bad = GramMatrix {
            g: SymMatrix::new(Matrix::from_rows(&[vec![1.0, 3.0], vec![3.0, 1.0]])).unwrap(),
            n_samples: 2,
        };
        assert!(matches!(
            orthogonalize(&bad, 1e-12),
            Err(crate::Error::Domain(_))
        ));
    }

    #[test]
    fn aggregate_examples() {
        let xs = [0.0, 0.4, 1.0];
        let single = pool(vec![line(0.3, 1.7)]);
        let e = aggregate(&single, WeightVector::uniform(1), None).unwrap();
        assert_eq!(e.predict(&xs), single.members[0].predict(&xs));

        let consts = pool(vec![line(0.0, 0.0), line(2.0, 0.0)]);
        let e = aggregate(&consts, WeightVector::uniform(2), None).unwrap();
        assert_eq!(e.predict(&xs), vec![1.0; 3]);

        let three = pool(vec![line(1.0, 0.0), line(0.0, 1.0), line(-2.0, 5.0)]);
        let e = aggregate(&three, WeightVector::one_hot(3, 2), None).unwrap();
        assert_eq!(e.predict(&xs), three.members[2].predict(&xs));

        assert!(aggregate(&three, WeightVector::uniform(2), None).is_err());
        assert!(aggregate(&three, WeightVector::uniform(3), Some(Matrix::identity(2))).is_err());
    }

    #[test]
    fn mixing_is_applied_before_weighting() {
        let p = pool(vec![line(1.0, 0.0), line(0.0, 1.0)]);
        let mix = Matrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 3.0]]);
        let w = WeightVector::new(vec![0.25, 0.75]).unwrap();
        let e = aggregate(&p, w, Some(mix.clone())).unwrap();
        let x = 0.8;
        let h = [1.0, x];
        let th = mix.matvec(&h);
        let expected = 0.25 * th[0] + 0.75 * th[1];
        assert!((e.predict_one(x) - expected).abs() < 1e-15);
    }
}
