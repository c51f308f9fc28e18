//! Synthetic regression experiments and their Monte Carlo harness.
//!
//! One replication draws a noisy training sample and a noisy test sample
//! from a target function, fits a pool of base learners, aggregates the
//! pool with every requested method, and scores each aggregate by test
//! MSE and by integrated squared error against the noise-free target.
//! Replication `r` of an experiment seeded with `s` uses a stream derived
//! from `(s, r)` alone, so replications can run in any order or in
//! parallel and still give identical results.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::ensemble::{
    aggregate, gram, optimized_rb_weights, orthogonalize_default, recursive_flow, FlowConfig,
    LearnerSpec, RecursionOperator,
};
use crate::error::{domain, Error, Result};
use crate::learners::{
    build_pool, fit_poly, fit_rff, Dataset, Family, Learner, LearnerPool, PoolConfig, Predict,
};
use crate::rng::Stream;
use crate::weights::{weights_from_law, WeightLaw, WeightVector};

/// Which target function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetKind {
    /// `sin(2πx)` on `[0, 1]`.
    Sin,
    /// `sin(x)/x` on `[−3, 3]`, equal to 1 at 0.
    Sinc,
}

/// A target function together with its sampling interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSpec {
    pub kind: TargetKind,
    pub lo: f64,
    pub hi: f64,
}

impl TargetSpec {
    pub fn sin() -> Self {
        Self {
            kind: TargetKind::Sin,
            lo: 0.0,
            hi: 1.0,
        }
    }

    pub fn sinc() -> Self {
        Self {
            kind: TargetKind::Sinc,
            lo: -3.0,
            hi: 3.0,
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            TargetKind::Sin => "sin",
            TargetKind::Sinc => "sinc",
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            TargetKind::Sin => (2.0 * std::f64::consts::PI * x).sin(),
            TargetKind::Sinc => {
                if x == 0.0 {
                    1.0
                } else {
                    x.sin() / x
                }
            }
        }
    }

    /// `grid_points` evenly spaced points covering `[lo, hi]`.
    pub fn grid(&self, grid_points: usize) -> Vec<f64> {
        let step = self.width() / (grid_points - 1) as f64;
        (0..grid_points)
            .map(|i| {
                if i + 1 == grid_points {
                    self.hi
                } else {
                    self.lo + step * i as f64
                }
            })
            .collect()
    }
}

impl FromStr for TargetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sin" => Ok(Self::sin()),
            "sinc" => Ok(Self::sinc()),
            other => Err(Error::Config(format!("unknown target `{other}`"))),
        }
    }
}

pub fn eval_target(spec: &TargetSpec, xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| spec.eval(x)).collect()
}

/// Inputs uniform on the target interval, targets `f(x) + N(0, σ²)`.
///
/// Each point consumes one uniform draw for `x`, then two for the noise
/// when `noise_sd > 0`.
pub fn gen_data(spec: &TargetSpec, n: usize, noise_sd: f64, rng: &mut Stream) -> Result<Dataset> {
    if n == 0 {
        return Err(domain("sample size must be positive"));
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(domain(format!(
            "noise_sd must be nonnegative, got {noise_sd}"
        )));
    }
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x = rng.uniform_in(spec.lo, spec.hi);
        let noise = if noise_sd > 0.0 {
            noise_sd * rng.normal()
        } else {
            0.0
        };
        xs.push(x);
        ys.push(spec.eval(x) + noise);
    }
    Dataset::new(xs, ys)
}

/// `(1/n) Σ (ŷ_i − y_i)²`.
pub fn test_mse(pred: &impl Predict, test: &Dataset) -> Result<f64> {
    if test.is_empty() {
        return Err(domain("empty test set"));
    }
    let p = pred.predict(test.xs());
    Ok(p.iter()
        .zip(test.ys())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / test.len() as f64)
}

/// `∫ (f̂ − f)²` over the target interval by the trapezoid rule.
pub fn ise(pred: &impl Predict, spec: &TargetSpec, grid_points: usize) -> Result<f64> {
    if grid_points < 2 {
        return Err(domain("ISE grid needs at least 2 points"));
    }
    let xs = spec.grid(grid_points);
    let err: Vec<f64> = pred
        .predict(&xs)
        .iter()
        .zip(&xs)
        .map(|(p, &x)| (p - spec.eval(x)).powi(2))
        .collect();
    Ok(trapezoid(&err, spec.width() / (grid_points - 1) as f64))
}

fn trapezoid(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    let inner: f64 = values[1..n - 1].iter().sum();
    step * (inner + 0.5 * (values[0] + values[n - 1]))
}

/// An aggregation method compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Uniform,
    Fibonacci,
    /// Gram whitening followed by simplex-optimal weights.
    OrthogonalRb,
    /// The second-order recursive flow.
    Flow,
    /// Raw aggregation under an arbitrary weight law.
    Law(WeightLaw),
}

impl Method {
    /// Row label in result tables.
    pub fn label(&self) -> String {
        match self {
            Method::Uniform => "Uniform".into(),
            Method::Fibonacci => "Fibonacci".into(),
            Method::OrthogonalRb => "Orthogonal RB".into(),
            Method::Flow => "Flow".into(),
            Method::Law(law) => format!("Law {law}"),
        }
    }

    /// Column name in curve tables.
    pub fn column(&self) -> String {
        match self {
            Method::Uniform => "uniform".into(),
            Method::Fibonacci => "fibonacci".into(),
            Method::OrthogonalRb => "orthogonal_rb".into(),
            Method::Flow => "flow".into(),
            Method::Law(law) => {
                let raw: String = law
                    .to_string()
                    .chars()
                    .map(|c| {
                        if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                            c
                        } else {
                            '_'
                        }
                    })
                    .collect();
                format!("law_{}", raw.trim_end_matches('_'))
            }
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Uniform => f.write_str("uniform"),
            Method::Fibonacci => f.write_str("fibonacci"),
            Method::OrthogonalRb => f.write_str("orthogonal_rb"),
            Method::Flow => f.write_str("flow"),
            Method::Law(law) => write!(f, "{law}"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(Method::Uniform),
            "fibonacci" | "fib" => Ok(Method::Fibonacci),
            "orthogonal_rb" | "orthogonal-rb" | "rb" => Ok(Method::OrthogonalRb),
            "flow" => Ok(Method::Flow),
            other => other
                .parse::<WeightLaw>()
                .map(Method::Law)
                .map_err(|e| Error::Config(format!("unknown method `{other}`: {e}"))),
        }
    }
}

/// Splits a method list on commas outside parentheses.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let mut items = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in list.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                items.push(&list[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    items.push(&list[start..]);
    let methods = items
        .into_iter()
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Method>>>()?;
    if methods.is_empty() {
        return Err(Error::Config("methods list is empty".into()));
    }
    Ok(methods)
}

/// Everything that defines one Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub target: TargetSpec,
    pub family: Family,
    pub m_learners: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub noise_sd: f64,
    pub replications: usize,
    pub seed: u64,
    pub grid_points: usize,
    pub methods: Vec<Method>,
    pub ridge_lambda: f64,
    pub rff_features: usize,
    /// Shortest RFF lengthscale as a fraction of the interval width.
    pub bandwidth_min: f64,
    /// Longest RFF lengthscale as a fraction of the interval width.
    pub bandwidth_max: f64,
    pub max_degree: usize,
    pub beta: f64,
    pub gamma: f64,
}

impl ExperimentConfig {
    /// Defaults: M = 10, n_train = 200, n_test = 1000, σ = 0.3, 50
    /// replications, a 2001-point ISE grid, D = 100 features, λ = 1e-2.
    pub fn new(target: TargetSpec, family: Family) -> Self {
        Self {
            target,
            family,
            m_learners: 10,
            n_train: 200,
            n_test: 1000,
            noise_sd: 0.3,
            replications: 50,
            seed: 42,
            grid_points: 2001,
            methods: vec![Method::Uniform, Method::Fibonacci, Method::OrthogonalRb],
            ridge_lambda: 1e-2,
            rff_features: 100,
            bandwidth_min: 0.05,
            bandwidth_max: 0.8,
            max_degree: crate::learners::MAX_DEGREE,
            beta: 0.5,
            gamma: 0.3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, why: String| Err(Error::Config(format!("{key}: {why}")));
        if self.replications == 0 {
            return bad("reps", "must be at least 1".into());
        }
        if self.grid_points < 2 {
            return bad("grid_points", "must be at least 2".into());
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return bad(
                "noise_sd",
                format!("must be nonnegative, got {}", self.noise_sd),
            );
        }
        if self.m_learners == 0 {
            return bad("m_learners", "must be at least 1".into());
        }
        if self.n_train < 2 {
            return bad("n_train", "must be at least 2".into());
        }
        if self.n_test == 0 {
            return bad("n_test", "must be at least 1".into());
        }
        if !(self.ridge_lambda >= 0.0 && self.ridge_lambda.is_finite()) {
            return bad(
                "ridge_lambda",
                format!("must be nonnegative, got {}", self.ridge_lambda),
            );
        }
        if self.rff_features == 0 {
            return bad("rff_features", "must be at least 1".into());
        }
        if !(self.bandwidth_min > 0.0
            && self.bandwidth_max > self.bandwidth_min
            && self.bandwidth_max.is_finite())
        {
            return bad(
                "bandwidth_min",
                format!(
                    "need 0 < bandwidth_min < bandwidth_max, got {} and {}",
                    self.bandwidth_min, self.bandwidth_max
                ),
            );
        }
        if self.max_degree > crate::learners::MAX_DEGREE {
            return bad(
                "max_degree",
                format!("must not exceed {}", crate::learners::MAX_DEGREE),
            );
        }
        if self.family == Family::Poly && self.m_learners > self.max_degree {
            return bad(
                "m_learners",
                format!(
                    "polynomial ladder 1..={} exceeds max_degree {}",
                    self.m_learners, self.max_degree
                ),
            );
        }
        if self.methods.is_empty() {
            return bad("methods", "list is empty".into());
        }
        if self.methods.contains(&Method::Flow) && self.m_learners < 3 {
            return bad(
                "m_learners",
                "the flow method needs at least 3 stages".into(),
            );
        }
        if !(self.beta.is_finite() && self.gamma.is_finite()) {
            return bad("beta", "beta and gamma must be finite".into());
        }
        Ok(())
    }

    /// Pool knobs with bandwidths scaled to the target interval.
    pub fn pool_config(&self) -> PoolConfig {
        let w = self.target.width();
        PoolConfig {
            rff_features: self.rff_features,
            bandwidth_min: self.bandwidth_min * w,
            bandwidth_max: self.bandwidth_max * w,
            ridge_lambda: self.ridge_lambda,
            max_degree: self.max_degree,
        }
    }

    /// `F₂` is the simplest pool member; residual learners are degree 3
    /// or sit at the middle of the bandwidth grid.
    pub fn flow_config(&self) -> FlowConfig {
        let w = self.target.width();
        let lambda = self.ridge_lambda;
        match self.family {
            Family::Poly => FlowConfig {
                second: LearnerSpec::Poly { degree: 1, lambda },
                weak: LearnerSpec::Poly { degree: 3, lambda },
            },
            Family::Rff => FlowConfig {
                second: LearnerSpec::Rff {
                    features: self.rff_features,
                    bandwidth: self.bandwidth_max * w,
                    lambda,
                },
                weak: LearnerSpec::Rff {
                    features: self.rff_features,
                    bandwidth: (self.bandwidth_min * self.bandwidth_max).sqrt() * w,
                    lambda,
                },
            },
        }
    }

    pub fn experiment_name(&self) -> &'static str {
        self.target.name()
    }
}

/// Scores of one method in one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodScore {
    pub test_mse: f64,
    pub ise: f64,
}

/// All method scores of one replication, in `cfg.methods` order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRecord {
    pub rep: usize,
    pub scores: Vec<MethodScore>,
}

/// Mean and sample standard deviation of each metric for one method.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    pub mean_test_mse: f64,
    pub sd_test_mse: f64,
    pub mean_ise: f64,
    pub sd_ise: f64,
}

/// Outcome of [`run_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub replications: usize,
    pub methods: Vec<MethodSummary>,
}

impl ExperimentResult {
    pub fn summary(&self, method: &Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| &m.method == method)
    }
}

struct Replication {
    train: Dataset,
    test: Dataset,
    pool: LearnerPool,
    flow_rng: Stream,
}

fn single_member(train: &Dataset, cfg: &ExperimentConfig, rng: &mut Stream) -> Result<Learner> {
    let pc = cfg.pool_config();
    match cfg.family {
        Family::Poly => fit_poly(train, 1, pc.ridge_lambda).map(Learner::from),
        Family::Rff => fit_rff(
            train,
            pc.rff_features,
            pc.bandwidth_max,
            pc.ridge_lambda,
            &mut rng.split(),
        )
        .map(Learner::from),
    }
}

fn prepare(cfg: &ExperimentConfig, rep: usize) -> Result<Replication> {
    let mut rng = Stream::for_replication(cfg.seed, rep as u64);
    let train = gen_data(&cfg.target, cfg.n_train, cfg.noise_sd, &mut rng.split())?;
    let test = gen_data(&cfg.target, cfg.n_test, cfg.noise_sd, &mut rng.split())?;
    let mut pool_rng = rng.split();
    let flow_rng = rng.split();
    let pool = if cfg.m_learners == 1 {
        LearnerPool {
            family: cfg.family,
            members: vec![single_member(&train, cfg, &mut pool_rng)?],
        }
    } else {
        build_pool(
            &train,
            cfg.family,
            cfg.m_learners,
            &cfg.pool_config(),
            &mut pool_rng,
        )?
    };
    Ok(Replication {
        train,
        test,
        pool,
        flow_rng,
    })
}

/// Evaluates every method of `cfg` on one replication and hands each
/// fitted predictor to `visit`.
fn for_each_method(
    cfg: &ExperimentConfig,
    rep: &Replication,
    mut visit: impl FnMut(&Method, &dyn Fn(&[f64]) -> Vec<f64>) -> Result<()>,
) -> Result<()> {
    let m = rep.pool.len();
    let mut whitening = None;
    for method in &cfg.methods {
        match method {
            Method::Uniform => {
                let e = aggregate(&rep.pool, WeightVector::uniform(m), None)?;
                visit(method, &|xs| e.predict(xs))?;
            }
            Method::Fibonacci => {
                let e = aggregate(&rep.pool, weights_from_law(&WeightLaw::Fibonacci, m)?, None)?;
                visit(method, &|xs| e.predict(xs))?;
            }
            Method::Law(law) => {
                let e = aggregate(&rep.pool, weights_from_law(law, m)?, None)?;
                visit(method, &|xs| e.predict(xs))?;
            }
            Method::OrthogonalRb => {
                if whitening.is_none() {
                    let g = gram(&rep.pool, rep.train.xs())?;
                    whitening = Some(orthogonalize_default(&g)?);
                }
                let mixing = whitening.clone().expect("whitening computed above");
                let w = optimized_rb_weights(&rep.pool, &mixing, &rep.train)?;
                let e = aggregate(&rep.pool, w, Some(mixing))?;
                visit(method, &|xs| e.predict(xs))?;
            }
            Method::Flow => {
                let op = RecursionOperator::new(cfg.beta, cfg.gamma);
                let flow = recursive_flow(
                    &rep.train,
                    op,
                    cfg.m_learners,
                    &cfg.flow_config(),
                    &mut rep.flow_rng.clone(),
                )?;
                visit(method, &|xs| flow.predict(xs))?;
            }
        }
    }
    Ok(())
}

struct Closure<'a>(&'a dyn Fn(&[f64]) -> Vec<f64>);

impl Predict for Closure<'_> {
    fn predict_one(&self, x: f64) -> f64 {
        (self.0)(&[x])[0]
    }

    fn predict(&self, xs: &[f64]) -> Vec<f64> {
        (self.0)(xs)
    }
}

/// Scores every method on replication `rep`.
pub fn run_replication(cfg: &ExperimentConfig, rep: usize) -> Result<ReplicationRecord> {
    cfg.validate()?;
    if rep >= cfg.replications {
        return Err(domain(format!(
            "replication {rep} out of range 0..{}",
            cfg.replications
        )));
    }
    let r = prepare(cfg, rep)?;
    let mut scores = Vec::with_capacity(cfg.methods.len());
    for_each_method(cfg, &r, |_, predict| {
        let p = Closure(predict);
        scores.push(MethodScore {
            test_mse: test_mse(&p, &r.test)?,
            ise: ise(&p, &cfg.target, cfg.grid_points)?,
        });
        Ok(())
    })?;
    Ok(ReplicationRecord { rep, scores })
}

fn mean_sd(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Folds replication records into per-method summaries.
///
/// Records are ordered by replication index first, so the result does not
/// depend on the order they were produced in.
pub fn summarize(
    cfg: &ExperimentConfig,
    mut records: Vec<ReplicationRecord>,
) -> Result<ExperimentResult> {
    if records.is_empty() {
        return Err(domain("no replications to summarize"));
    }
    records.sort_by_key(|r| r.rep);
    let methods = cfg
        .methods
        .iter()
        .enumerate()
        .map(|(k, method)| {
            let (mean_test_mse, sd_test_mse) =
                mean_sd(records.iter().map(move |r| r.scores[k].test_mse));
            let (mean_ise, sd_ise) = mean_sd(records.iter().map(move |r| r.scores[k].ise));
            MethodSummary {
                method: *method,
                mean_test_mse,
                sd_test_mse,
                mean_ise,
                sd_ise,
            }
        })
        .collect();
    Ok(ExperimentResult {
        config: cfg.clone(),
        replications: records.len(),
        methods,
    })
}

/// Runs all replications sequentially and summarizes them.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment_with_threads(cfg, 1)
}

/// Like [`run_experiment`], fanning replications out over `threads` workers.
pub fn run_experiment_with_threads(
    cfg: &ExperimentConfig,
    threads: usize,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    let reps: Vec<usize> = (0..cfg.replications).collect();
    let records = if threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("threads: {e}")))?;
        pool.install(|| {
            reps.par_iter()
                .map(|&r| run_replication(cfg, r))
                .collect::<Result<Vec<_>>>()
        })?
    } else {
        reps.iter()
            .map(|&r| run_replication(cfg, r))
            .collect::<Result<Vec<_>>>()?
    };
    summarize(cfg, records)
}

/// Plot-ready fits of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct Curves {
    pub x: Vec<f64>,
    pub f_true: Vec<f64>,
    /// `(column name, fitted values on x)` per method.
    pub fits: Vec<(String, Vec<f64>)>,
    /// The replication's noisy training sample.
    pub points: Dataset,
}

impl Curves {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["x".to_string(), "f_true".to_string()];
        h.extend(self.fits.iter().map(|(name, _)| name.clone()));
        h
    }
}

/// Fits of every method on the ISE grid, plus the training points.
pub fn emit_curves(cfg: &ExperimentConfig, rep: usize) -> Result<Curves> {
    cfg.validate()?;
    if rep >= cfg.replications {
        return Err(domain(format!(
            "replication {rep} out of range 0..{}",
            cfg.replications
        )));
    }
    let r = prepare(cfg, rep)?;
    let x = cfg.target.grid(cfg.grid_points);
    let f_true = eval_target(&cfg.target, &x);
    let mut fits = Vec::new();
    for_each_method(cfg, &r, |method, predict| {
        fits.push((method.column(), predict(&x)));
        Ok(())
    })?;
    Ok(Curves {
        x,
        f_true,
        fits,
        points: r.train,
    })
}
