//! The second-order recursive ensemble flow.
//!
//! Starting from two predictors `F₁, F₂`, each stage fits a weak learner
//! `h_{m−1}` to the residuals of `F_{m−1}` and sets
//! `F_m = β F_{m−1} + γ F_{m−2} + h_{m−1}`. With `(β, γ) = (1, 0)` this is
//! plain stagewise boosting.
//!
//! Every `F_m` is a linear combination of the basis `(F₁, F₂, h₂, …, h_{M−1})`;
//! the coefficient vectors obey the same recurrence,
//! `c⁽ᵐ⁾ = β c⁽ᵐ⁻¹⁾ + γ c⁽ᵐ⁻²⁾ + e_{m−1}`.

use crate::error::{domain, Result};
use crate::learners::{fit_poly, fit_rff, Dataset, Learner, PolyLearner, Predict};
use crate::rng::Stream;

use super::RecursionOperator;

/// How to fit one learner inside the flow.
#[derive(Debug, Clone, PartialEq)]
pub enum LearnerSpec {
    Poly {
        degree: usize,
        lambda: f64,
    },
    Rff {
        features: usize,
        bandwidth: f64,
        lambda: f64,
    },
    /// Always returns the zero model. Isolates the homogeneous recursion.
    Null,
}

impl LearnerSpec {
    pub fn fit(&self, data: &Dataset, rng: &mut Stream) -> Result<Learner> {
        match *self {
            LearnerSpec::Poly { degree, lambda } => {
                fit_poly(data, degree, lambda).map(Learner::from)
            }
            LearnerSpec::Rff {
                features,
                bandwidth,
                lambda,
            } => fit_rff(data, features, bandwidth, lambda, rng).map(Learner::from),
            LearnerSpec::Null => Ok(Learner::Poly(PolyLearner::zero())),
        }
    }
}

/// Learner choices for [`recursive_flow`]. `F₁` is always the intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    /// Fits `F₂`.
    pub second: LearnerSpec,
    /// Fits each residual learner `h₂, …, h_{M−1}`.
    pub weak: LearnerSpec,
}

/// A fitted flow: its basis learners and per-stage coefficients.
#[derive(Debug, Clone)]
pub struct FlowPredictor {
    /// `F₁, F₂, h₂, …, h_{M−1}`.
    pub basis: Vec<Learner>,
    pub beta: f64,
    pub gamma: f64,
    /// `coeffs[m − 1]` expresses `F_m` over `basis`; every vector has length `M`.
    pub coeffs: Vec<Vec<f64>>,
}

impl FlowPredictor {
    pub fn stages(&self) -> usize {
        self.coeffs.len()
    }

    /// Evaluates stage `m` (1-based).
    pub fn predict_stage(&self, m: usize, xs: &[f64]) -> Vec<f64> {
        let c = &self.coeffs[m - 1];
        let mut out = vec![0.0; xs.len()];
        for (l, cj) in self.basis.iter().zip(c) {
            if *cj == 0.0 {
                continue;
            }
            for (o, p) in out.iter_mut().zip(l.predict(xs)) {
                *o += cj * p;
            }
        }
        out
    }

    /// Euclidean norm of stage `m`'s coefficients on `(F₁, F₂)`: the
    /// homogeneous part of the trajectory.
    pub fn initial_mode_norm(&self, m: usize) -> f64 {
        let c = &self.coeffs[m - 1];
        c[0].hypot(c[1])
    }
}

impl Predict for FlowPredictor {
    fn predict_one(&self, x: f64) -> f64 {
        let c = self
            .coeffs
            .last()
            .expect("a flow has at least three stages");
        self.basis
            .iter()
            .zip(c)
            .filter(|(_, cj)| **cj != 0.0)
            .map(|(l, cj)| cj * l.predict_one(x))
            .sum()
    }

    fn predict(&self, xs: &[f64]) -> Vec<f64> {
        self.predict_stage(self.coeffs.len(), xs)
    }
}

/// Runs the flow for `m` stages on `data` and returns the full trajectory.
pub fn recursive_flow(
    data: &Dataset,
    op: RecursionOperator,
    m: usize,
    cfg: &FlowConfig,
    rng: &mut Stream,
) -> Result<FlowPredictor> {
    if m < 3 {
        return Err(domain(format!("the flow needs at least 3 stages, got {m}")));
    }
    let RecursionOperator { beta, gamma } = op;
    let mean = data.ys().iter().sum::<f64>() / data.len() as f64;
    let first = Learner::Poly(PolyLearner::from_coefficients(vec![mean], 0.0, 1.0));
    let second = cfg.second.fit(data, &mut rng.split())?;

    let mut prev2 = first.predict(data.xs());
    let mut prev1 = second.predict(data.xs());
    let mut basis = Vec::with_capacity(m);
    basis.push(first);
    basis.push(second);

    let unit = |j: usize| {
        let mut e = vec![0.0; m];
        e[j] = 1.0;
        e
    };
    let mut coeffs = vec![unit(0), unit(1)];

    for stage in 3..=m {
        let residual: Vec<f64> = data.ys().iter().zip(&prev1).map(|(y, f)| y - f).collect();
        let h = cfg
            .weak
            .fit(&data.with_targets(residual)?, &mut rng.split())?;
        let h_train = h.predict(data.xs());
        basis.push(h);

        let next: Vec<f64> = prev1
            .iter()
            .zip(&prev2)
            .zip(&h_train)
            .map(|((f1, f2), hv)| beta * f1 + gamma * f2 + hv)
            .collect();
        prev2 = std::mem::replace(&mut prev1, next);

        let (c1, c2) = (&coeffs[stage - 2], &coeffs[stage - 3]);
        let mut c: Vec<f64> = c1
            .iter()
            .zip(c2)
            .map(|(a, b)| beta * a + gamma * b)
            .collect();
        c[stage - 1] += 1.0;
        coeffs.push(c);
    }

    Ok(FlowPredictor {
        basis,
        beta,
        gamma,
        coeffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_data() -> Dataset {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 / 19.0).collect();
        let ys = xs.iter().map(|x| 1.0 + 2.0 * x).collect();
        Dataset::new(xs, ys).unwrap()
    }

    #[test]
    fn fibonacci_coefficients_with_null_learners() {
        let cfg = FlowConfig {
            second: LearnerSpec::Poly {
                degree: 1,
                lambda: 0.0,
            },
            weak: LearnerSpec::Null,
        };
        let flow = recursive_flow(
            &line_data(),
            RecursionOperator::new(1.0, 1.0),
            5,
            &cfg,
            &mut Stream::new(0),
        )
        .unwrap();
        assert_eq!(&flow.coeffs[4][..2], &[2.0, 3.0]);
        assert_eq!(&flow.coeffs[3][..2], &[1.0, 2.0]);
        assert_eq!(flow.basis.len(), 5);
    }

    #[test]
    fn first_order_is_boosting() {
        let data = line_data();
        let cfg = FlowConfig {
            second: LearnerSpec::Poly {
                degree: 0,
                lambda: 0.0,
            },
            weak: LearnerSpec::Poly {
                degree: 1,
                lambda: 1.0,
            },
        };
        let flow = recursive_flow(
            &data,
            RecursionOperator::new(1.0, 0.0),
            6,
            &cfg,
            &mut Stream::new(1),
        )
        .unwrap();
        // F_m = F_{m−1} + h_{m−1}
        for m in 3..=6 {
            let diff: Vec<f64> = flow
                .predict_stage(m, data.xs())
                .iter()
                .zip(flow.predict_stage(m - 1, data.xs()))
                .map(|(a, b)| a - b)
                .collect();
            let h = flow.basis[m - 1].predict(data.xs());
            assert!(diff.iter().zip(&h).all(|(a, b)| (a - b).abs() < 1e-12));
        }
        // ridge-shrunk boosting still makes progress on the line
        let err = |m: usize| -> f64 {
            flow.predict_stage(m, data.xs())
                .iter()
                .zip(data.ys())
                .map(|(a, b)| (a - b).powi(2))
                .sum()
        };
        assert!(err(6) < err(2));
    }

    #[test]
    fn zero_fixed_point() {
        let data = Dataset::new(vec![0.0, 0.5, 1.0], vec![0.0; 3]).unwrap();
        let cfg = FlowConfig {
            second: LearnerSpec::Poly {
                degree: 1,
                lambda: 0.0,
            },
            weak: LearnerSpec::Poly {
                degree: 2,
                lambda: 1e-3,
            },
        };
        let flow = recursive_flow(
            &data,
            RecursionOperator::new(0.7, 0.2),
            8,
            &cfg,
            &mut Stream::new(2),
        )
        .unwrap();
        assert!(flow.predict(&[0.0, 0.3, 1.7]).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn coefficient_recurrence_holds() {
        let data = line_data();
        let cfg = FlowConfig {
            second: LearnerSpec::Poly {
                degree: 1,
                lambda: 1e-2,
            },
            weak: LearnerSpec::Rff {
                features: 10,
                bandwidth: 0.3,
                lambda: 1e-2,
            },
        };
        let (beta, gamma) = (0.6, 0.3);
        let flow = recursive_flow(
            &data,
            RecursionOperator::new(beta, gamma),
            10,
            &cfg,
            &mut Stream::new(5),
        )
        .unwrap();
        for m in 3..=10 {
            for j in 0..10 {
                let e = if j == m - 1 { 1.0 } else { 0.0 };
                let want = beta * flow.coeffs[m - 2][j] + gamma * flow.coeffs[m - 3][j] + e;
                assert!((flow.coeffs[m - 1][j] - want).abs() <= 1e-12);
            }
        }
        // function-space trajectory agrees with the coefficient form
        let xs = [0.1, 0.55, 0.9];
        let f = |m: usize| flow.predict_stage(m, &xs);
        for m in 3..=10 {
            let h = flow.basis[m - 1].predict(&xs);
            let (f1, f2, fm) = (f(m - 1), f(m - 2), f(m));
            for i in 0..3 {
                assert!((fm[i] - (beta * f1[i] + gamma * f2[i] + h[i])).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn too_few_stages() {
        let cfg = FlowConfig {
            second: LearnerSpec::Null,
            weak: LearnerSpec::Null,
        };
        assert!(recursive_flow(
            &line_data(),
            RecursionOperator::new(1.0, 1.0),
            2,
            &cfg,
            &mut Stream::new(0)
        )
        .is_err());
    }
}
