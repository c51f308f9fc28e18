//! Base regressors: random-Fourier-feature ridge and polynomial ridge.
//!
//! Both are linear models over a fixed feature map, fitted by ridge
//! regression. Pools of them are ordered by increasing complexity: RFF
//! members from coarse to fine lengthscale, polynomials by degree.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::linalg::{dot, ridge_solve, Matrix};
use crate::rng::Stream;

/// Paired inputs and targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Dataset {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(domain(format!(
                "{} inputs but {} targets",
                xs.len(),
                ys.len()
            )));
        }
        if xs.is_empty() {
            return Err(domain("dataset must be nonempty"));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(domain("dataset has non-finite values"));
        }
        Ok(Self { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Same inputs, new targets.
    pub fn with_targets(&self, ys: Vec<f64>) -> Result<Self> {
        Self::new(self.xs.clone(), ys)
    }
}

/// Anything that can be evaluated pointwise.
pub trait Predict {
    fn predict_one(&self, x: f64) -> f64;

    fn predict(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.predict_one(x)).collect()
    }
}

/// Ridge regression over random Fourier features
/// `z_d(x) = √(2/D) cos(ω_d x + b_d)`, `ω_d ~ N(0, 1/ℓ²)`, `b_d ~ U[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RffLearner {
    pub frequencies: Vec<f64>,
    pub phases: Vec<f64>,
    pub scale: f64,
    pub coefficients: Vec<f64>,
    pub bandwidth: f64,
    pub ridge_lambda: f64,
}

impl RffLearner {
    fn features_into(&self, x: f64, out: &mut [f64]) {
        for ((o, w), b) in out.iter_mut().zip(&self.frequencies).zip(&self.phases) {
            *o = self.scale * (w * x + b).cos();
        }
    }

    fn design(&self, xs: &[f64]) -> Matrix {
        let d = self.frequencies.len();
        let mut data = vec![0.0; xs.len() * d];
        for (row, &x) in data.chunks_mut(d).zip(xs) {
            self.features_into(x, row);
        }
        Matrix::from_row_major(xs.len(), d, data)
    }
}

impl Predict for RffLearner {
    fn predict_one(&self, x: f64) -> f64 {
        self.frequencies
            .iter()
            .zip(&self.phases)
            .zip(&self.coefficients)
            .map(|((w, b), c)| c * (w * x + b).cos())
            .sum::<f64>()
            * self.scale
    }
}

/// Fits an RFF ridge regressor with `features` random features.
pub fn fit_rff(
    data: &Dataset,
    features: usize,
    bandwidth: f64,
    lambda: f64,
    rng: &mut Stream,
) -> Result<RffLearner> {
    if features == 0 {
        return Err(domain("RFF learner needs at least one feature"));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(domain(format!(
            "bandwidth must be positive, got {bandwidth}"
        )));
    }
    let mut frequencies = Vec::with_capacity(features);
    let mut phases = Vec::with_capacity(features);
    for _ in 0..features {
        frequencies.push(rng.normal() / bandwidth);
        phases.push(rng.uniform_in(0.0, 2.0 * PI));
    }
    let mut learner = RffLearner {
        frequencies,
        phases,
        scale: (2.0 / features as f64).sqrt(),
        coefficients: Vec::new(),
        bandwidth,
        ridge_lambda: lambda,
    };
    let x = learner.design(data.xs());
    learner.coefficients = ridge_solve(&x, data.ys(), lambda)?;
    Ok(learner)
}

/// Ridge regression over `[1, u, …, u^p]`, `u = (x - center) / halfwidth`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyLearner {
    pub degree: usize,
    pub x_center: f64,
    pub x_halfwidth: f64,
    pub coefficients: Vec<f64>,
    pub ridge_lambda: f64,
}

impl PolyLearner {
    /// A polynomial with given coefficients in the standardized variable.
    pub fn from_coefficients(coefficients: Vec<f64>, x_center: f64, x_halfwidth: f64) -> Self {
        assert!(
            !coefficients.is_empty(),
            "a polynomial needs at least one coefficient"
        );
        Self {
            degree: coefficients.len() - 1,
            x_center,
            x_halfwidth,
            coefficients,
            ridge_lambda: 0.0,
        }
    }

    /// The constant-zero model.
    pub fn zero() -> Self {
        Self::from_coefficients(vec![0.0], 0.0, 1.0)
    }
}

impl Predict for PolyLearner {
    fn predict_one(&self, x: f64) -> f64 {
        let u = (x - self.x_center) / self.x_halfwidth;
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * u + c)
    }
}

/// Largest supported polynomial degree.
pub const MAX_DEGREE: usize = 30;

/// Fits a polynomial ridge regressor on inputs standardized to `[-1, 1]`.
pub fn fit_poly(data: &Dataset, degree: usize, lambda: f64) -> Result<PolyLearner> {
    if degree > MAX_DEGREE {
        return Err(domain(format!("degree {degree} exceeds {MAX_DEGREE}")));
    }
    let (lo, hi) = data
        .xs()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return Err(domain(
            "all training inputs coincide; polynomial is undetermined",
        ));
    }
    let center = 0.5 * (lo + hi);
    let halfwidth = 0.5 * (hi - lo);
    let p = degree + 1;
    let mut design = Vec::with_capacity(data.len() * p);
    for &x in data.xs() {
        let u = (x - center) / halfwidth;
        let mut power = 1.0;
        for _ in 0..p {
            design.push(power);
            power *= u;
        }
    }
    let design = Matrix::from_row_major(data.len(), p, design);
    let coefficients = ridge_solve(&design, data.ys(), lambda)?;
    Ok(PolyLearner {
        degree,
        x_center: center,
        x_halfwidth: halfwidth,
        coefficients,
        ridge_lambda: lambda,
    })
}

/// A fitted base learner of either family.
#[derive(Debug, Clone, PartialEq)]
pub enum Learner {
    Rff(RffLearner),
    Poly(PolyLearner),
}

impl Predict for Learner {
    fn predict_one(&self, x: f64) -> f64 {
        match self {
            Learner::Rff(l) => l.predict_one(x),
            Learner::Poly(l) => l.predict_one(x),
        }
    }

    fn predict(&self, xs: &[f64]) -> Vec<f64> {
        match self {
            Learner::Rff(l) => {
                let mut z = vec![0.0; l.frequencies.len()];
                xs.iter()
                    .map(|&x| {
                        l.features_into(x, &mut z);
                        dot(&z, &l.coefficients)
                    })
                    .collect()
            }
            Learner::Poly(l) => l.predict(xs),
        }
    }
}

impl From<RffLearner> for Learner {
    fn from(l: RffLearner) -> Self {
        Learner::Rff(l)
    }
}

impl From<PolyLearner> for Learner {
    fn from(l: PolyLearner) -> Self {
        Learner::Poly(l)
    }
}

/// Base-learner family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Rff,
    Poly,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Rff => "rff",
            Family::Poly => "poly",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rff" => Ok(Family::Rff),
            "poly" | "polynomial" => Ok(Family::Poly),
            other => Err(Error::Config(format!("unknown learner family `{other}`"))),
        }
    }
}

/// Knobs for [`build_pool`]. Bandwidths are absolute lengthscales.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolConfig {
    pub rff_features: usize,
    pub bandwidth_min: f64,
    pub bandwidth_max: f64,
    pub ridge_lambda: f64,
    pub max_degree: usize,
}

impl Default for PoolConfig {
    fn default() -> Self {
        Self {
            rff_features: 100,
            bandwidth_min: 0.05,
            bandwidth_max: 0.8,
            ridge_lambda: 1e-2,
            max_degree: MAX_DEGREE,
        }
    }
}

impl PoolConfig {
    /// `m` bandwidths log-evenly spaced over `[min, max]`, coarse first.
    pub fn bandwidth_grid(&self, m: usize) -> Result<Vec<f64>> {
        let (lo, hi) = (self.bandwidth_min, self.bandwidth_max);
        if !(lo > 0.0 && hi.is_finite() && hi > lo) {
            return Err(domain(format!(
                "bandwidth bounds must satisfy 0 < min < max, got [{lo}, {hi}]"
            )));
        }
        if m == 1 {
            return Ok(vec![hi]);
        }
        let (llo, lhi) = (lo.ln(), hi.ln());
        Ok((0..m)
            .map(|j| (lhi - (lhi - llo) * j as f64 / (m - 1) as f64).exp())
            .collect())
    }
}

/// An ordered pool of fitted learners from one family.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerPool {
    pub family: Family,
    pub members: Vec<Learner>,
}

impl LearnerPool {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Row `m` holds member `m` evaluated at `xs`.
    pub fn predictions(&self, xs: &[f64]) -> Vec<Vec<f64>> {
        self.members.iter().map(|l| l.predict(xs)).collect()
    }
}

/// Fits `m` learners of `family` on `data`, ordered by complexity.
///
/// RFF members take the bandwidth grid from coarse to fine, each with its
/// own child stream of `rng`. Polynomial members have degrees `1..=m`.
pub fn build_pool(
    data: &Dataset,
    family: Family,
    m: usize,
    cfg: &PoolConfig,
    rng: &mut Stream,
) -> Result<LearnerPool> {
    if m < 2 {
        return Err(domain(format!("a pool needs at least 2 members, got {m}")));
    }
    let members = match family {
        Family::Rff => {
            if cfg.rff_features == 0 {
                return Err(domain("rff_features must be positive"));
            }
            let grid = cfg.bandwidth_grid(m)?;
            let mut streams: Vec<Stream> = (0..m).map(|_| rng.split()).collect();
            grid.iter()
                .zip(streams.iter_mut())
                .map(|(&bw, s)| {
                    fit_rff(data, cfg.rff_features, bw, cfg.ridge_lambda, s).map(Learner::from)
                })
                .collect::<Result<Vec<_>>>()?
        }
        Family::Poly => {
            if m > cfg.max_degree {
                return Err(domain(format!(
                    "polynomial ladder needs degree {m} but max_degree is {}",
                    cfg.max_degree
                )));
            }
            (1..=m)
                .map(|deg| fit_poly(data, deg, cfg.ridge_lambda).map(Learner::from))
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(LearnerPool { family, members })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_data(n: usize, f: impl Fn(f64) -> f64) -> Dataset {
        let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let ys = xs.iter().map(|&x| f(x)).collect();
        Dataset::new(xs, ys).unwrap()
    }

    fn mse(l: &impl Predict, d: &Dataset) -> f64 {
        let p = l.predict(d.xs());
        p.iter()
            .zip(d.ys())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / d.len() as f64
    }

    #[test]
    fn dataset_validation() {
        assert!(Dataset::new(vec![1.0], vec![]).is_err());
        assert!(Dataset::new(vec![], vec![]).is_err());
        assert!(Dataset::new(vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn rff_zero_target() {
        let d = grid_data(50, |_| 0.0);
        let l = fit_rff(&d, 20, 0.3, 1e-2, &mut Stream::new(3)).unwrap();
        assert!(l.coefficients.iter().all(|c| c.abs() <= 1e-10));
    }

    #[test]
    fn rff_is_deterministic() {
        let d = grid_data(40, |x| x * x);
        let a = fit_rff(&d, 30, 0.2, 1e-2, &mut Stream::new(42)).unwrap();
        let b = fit_rff(&d, 30, 0.2, 1e-2, &mut Stream::new(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rff_zero_model_predicts_zero() {
        let d = grid_data(10, |x| x);
        let mut l = fit_rff(&d, 5, 0.3, 1e-2, &mut Stream::new(1)).unwrap();
        l.coefficients = vec![0.0; 5];
        assert!(Learner::Rff(l)
            .predict(&[0.1, 0.7, 3.0])
            .iter()
            .all(|v| *v == 0.0));
    }

    #[test]
    fn poly_linear_fit() {
        let d = grid_data(20, |x| 2.0 * x + 1.0);
        let l = fit_poly(&d, 1, 0.0).unwrap();
        assert!((l.predict_one(0.5) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn poly_intercept_is_mean() {
        let d = Dataset::new(vec![0.0, 1.0, 2.0], vec![1.0, 5.0, 3.0]).unwrap();
        let l = fit_poly(&d, 0, 0.0).unwrap();
        for x in [-4.0, 0.3, 9.0] {
            assert!((l.predict_one(x) - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn poly_degenerate_interval() {
        let d = Dataset::new(vec![0.5, 0.5], vec![1.0, 2.0]).unwrap();
        assert!(matches!(fit_poly(&d, 1, 0.0), Err(Error::Domain(_))));
        assert!(fit_poly(&grid_data(5, |x| x), 31, 0.0).is_err());
    }

    #[test]
    fn predict_edge_cases() {
        let c = PolyLearner::from_coefficients(vec![1.0, 0.0, 0.0], 0.0, 1.0);
        assert_eq!(c.predict(&[-3.0, 0.0, 8.0]), vec![1.0, 1.0, 1.0]);
        assert!(Learner::Poly(c).predict(&[]).is_empty());
    }

    #[test]
    fn pool_ladders() {
        let d = grid_data(60, |x| (6.0 * x).sin());
        let pool = build_pool(
            &d,
            Family::Poly,
            5,
            &PoolConfig::default(),
            &mut Stream::new(0),
        )
        .unwrap();
        let degrees: Vec<usize> = pool
            .members
            .iter()
            .map(|l| match l {
                Learner::Poly(p) => p.degree,
                Learner::Rff(_) => unreachable!(),
            })
            .collect();
        assert_eq!(degrees, vec![1, 2, 3, 4, 5]);

        let cfg = PoolConfig {
            rff_features: 10,
            ..PoolConfig::default()
        };
        let grid = cfg.bandwidth_grid(4).unwrap();
        assert!((grid[0] - 0.8).abs() < 1e-15 && (grid[3] - 0.05).abs() < 1e-15);
        assert!(grid.windows(2).all(|w| w[0] > w[1]));
        let ratios: Vec<f64> = grid.windows(2).map(|w| w[0] / w[1]).collect();
        let step = 16f64.cbrt();
        assert!(ratios.iter().all(|r| (r - step).abs() < 1e-12));

        let a = build_pool(&d, Family::Rff, 4, &cfg, &mut Stream::new(9)).unwrap();
        let b = build_pool(&d, Family::Rff, 4, &cfg, &mut Stream::new(9)).unwrap();
        assert_eq!(a, b);
        let bws: Vec<f64> = a
            .members
            .iter()
            .map(|l| match l {
                Learner::Rff(r) => r.bandwidth,
                Learner::Poly(_) => unreachable!(),
            })
            .collect();
        assert_eq!(bws, grid);
    }

    #[test]
    fn pool_rejects_bad_config() {
        let d = grid_data(20, |x| x);
        let mut rng = Stream::new(0);
        assert!(build_pool(&d, Family::Poly, 1, &PoolConfig::default(), &mut rng).is_err());
        let bad = PoolConfig {
            bandwidth_min: 0.9,
            ..PoolConfig::default()
        };
        assert!(build_pool(&d, Family::Rff, 3, &bad, &mut rng).is_err());
        let capped = PoolConfig {
            max_degree: 3,
            ..PoolConfig::default()
        };
        assert!(build_pool(&d, Family::Poly, 4, &capped, &mut rng).is_err());
    }

    #[test]
    fn sin_fits() {
        let d = grid_data(200, |x| (2.0 * PI * x).sin());
        let p = fit_poly(&d, 9, 1e-8).unwrap();
        assert!(mse(&p, &d) <= 1e-4, "poly mse {}", mse(&p, &d));
        let r = fit_rff(&d, 100, 0.2, 1e-6, &mut Stream::new(42)).unwrap();
        assert!(mse(&Learner::Rff(r), &d) <= 1e-3);
    }
}
