//! Index weight laws and their diagnostics.
//!
//! A weight law is a nonnegative function `p(m)` on learner indices
//! `m = 1..M`; normalizing it gives a [`WeightVector`]. The Fibonacci law
//! `p(m) = F_m` is the canonical second-order member of the family.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{domain, Error, Result};

/// Golden ratio `(1 + √5) / 2`.
pub const PHI: f64 = 1.618_033_988_749_895;

/// Largest `M` whose Fibonacci number is finite in double precision.
pub const MAX_FIBONACCI_INDEX: usize = 1476;

/// A named distribution family generating index weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightLaw {
    Uniform,
    Fibonacci,
    /// `p(m) = r^m`.
    Geometric {
        ratio: f64,
    },
    /// `p(m) = exp(-(m - μ)² / 2σ²)`.
    Gaussian {
        center: f64,
        width: f64,
    },
    /// `p(m) = 1 / (1 + exp(-a (m - b)))`.
    Logistic {
        slope: f64,
        center: f64,
    },
    /// `p(m) = m^(k-1) exp(-m / θ)`.
    Gamma {
        shape: f64,
        scale: f64,
    },
    /// `p(m) = u^(α-1) (1-u)^(β-1)` with `u = m / (M + 1)`.
    Beta {
        alpha: f64,
        beta: f64,
    },
    /// `p(m) = m^(-α)`.
    Pareto {
        exponent: f64,
    },
    /// Log-normal density evaluated at `m`.
    LogNormal {
        log_center: f64,
        log_width: f64,
    },
}

impl WeightLaw {
    /// Checks the parameter constraints of the family.
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(domain(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        }
        fn finite(name: &str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(domain(format!("{name} must be finite, got {v}")))
            }
        }
        match *self {
            WeightLaw::Uniform | WeightLaw::Fibonacci => Ok(()),
            WeightLaw::Geometric { ratio } => positive("ratio", ratio),
            WeightLaw::Gaussian { center, width } => {
                finite("mu", center)?;
                positive("sigma", width)
            }
            WeightLaw::Logistic { slope, center } => {
                finite("a", slope)?;
                finite("b", center)
            }
            WeightLaw::Gamma { shape, scale } => {
                positive("k", shape)?;
                positive("theta", scale)
            }
            WeightLaw::Beta { alpha, beta } => {
                positive("alpha", alpha)?;
                positive("beta", beta)
            }
            WeightLaw::Pareto { exponent } => positive("alpha", exponent),
            WeightLaw::LogNormal {
                log_center,
                log_width,
            } => {
                finite("mu", log_center)?;
                positive("sigma", log_width)
            }
        }
    }

    /// Unnormalized mass `p(m)` for index `m` (1-based) in a pool of `M`.
    pub fn mass(&self, m: usize, pool_size: usize) -> f64 {
        let x = m as f64;
        match *self {
            WeightLaw::Uniform => 1.0,
            WeightLaw::Fibonacci => fibonacci_number(m),
            WeightLaw::Geometric { ratio } => ratio.powi(m as i32),
            WeightLaw::Gaussian { center, width } => {
                (-(x - center).powi(2) / (2.0 * width * width)).exp()
            }
            WeightLaw::Logistic { slope, center } => 1.0 / (1.0 + (-slope * (x - center)).exp()),
            WeightLaw::Gamma { shape, scale } => x.powf(shape - 1.0) * (-x / scale).exp(),
            WeightLaw::Beta { alpha, beta } => {
                let u = x / (pool_size as f64 + 1.0);
                u.powf(alpha - 1.0) * (1.0 - u).powf(beta - 1.0)
            }
            WeightLaw::Pareto { exponent } => x.powf(-exponent),
            WeightLaw::LogNormal {
                log_center,
                log_width,
            } => {
                let z = (x.ln() - log_center) / log_width;
                (-0.5 * z * z).exp() / (x * log_width * (2.0 * PI).sqrt())
            }
        }
    }

    /// Short lowercase family name, as accepted by the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            WeightLaw::Uniform => "uniform",
            WeightLaw::Fibonacci => "fibonacci",
            WeightLaw::Geometric { .. } => "geometric",
            WeightLaw::Gaussian { .. } => "gaussian",
            WeightLaw::Logistic { .. } => "logistic",
            WeightLaw::Gamma { .. } => "gamma",
            WeightLaw::Beta { .. } => "beta",
            WeightLaw::Pareto { .. } => "pareto",
            WeightLaw::LogNormal { .. } => "lognormal",
        }
    }
}

impl fmt::Display for WeightLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            WeightLaw::Uniform | WeightLaw::Fibonacci => write!(f, "{}", self.name()),
            WeightLaw::Geometric { ratio } => write!(f, "geometric(r={ratio})"),
            WeightLaw::Gaussian { center, width } => {
                write!(f, "gaussian(mu={center};sigma={width})")
            }
            WeightLaw::Logistic { slope, center } => write!(f, "logistic(a={slope};b={center})"),
            WeightLaw::Gamma { shape, scale } => write!(f, "gamma(k={shape};theta={scale})"),
            WeightLaw::Beta { alpha, beta } => write!(f, "beta(alpha={alpha};beta={beta})"),
            WeightLaw::Pareto { exponent } => write!(f, "pareto(alpha={exponent})"),
            WeightLaw::LogNormal {
                log_center,
                log_width,
            } => {
                write!(f, "lognormal(mu={log_center};sigma={log_width})")
            }
        }
    }
}

impl WeightLaw {
    /// Builds a law from its family name and a parameter lookup.
    ///
    /// Parameter names: `r` (geometric); `mu`, `sigma` (gaussian, lognormal);
    /// `a`, `b` (logistic); `k`, `theta` (gamma); `alpha`, `beta` (beta);
    /// `alpha` (pareto).
    pub fn from_params(name: &str, param: impl Fn(&str) -> Option<f64>) -> Result<Self> {
        let need = |key: &str| {
            param(key).ok_or_else(|| domain(format!("law `{name}` needs parameter `{key}`")))
        };
        let law = match name.trim().to_ascii_lowercase().as_str() {
            "uniform" => WeightLaw::Uniform,
            "fibonacci" | "fib" => WeightLaw::Fibonacci,
            "geometric" => WeightLaw::Geometric { ratio: need("r")? },
            "gaussian" => WeightLaw::Gaussian {
                center: need("mu")?,
                width: need("sigma")?,
            },
            "logistic" => WeightLaw::Logistic {
                slope: need("a")?,
                center: need("b")?,
            },
            "gamma" => WeightLaw::Gamma {
                shape: need("k")?,
                scale: need("theta")?,
            },
            "beta" => WeightLaw::Beta {
                alpha: need("alpha")?,
                beta: need("beta")?,
            },
            "pareto" => WeightLaw::Pareto {
                exponent: need("alpha")?,
            },
            "lognormal" => WeightLaw::LogNormal {
                log_center: need("mu")?,
                log_width: need("sigma")?,
            },
            other => return Err(domain(format!("unknown weight law `{other}`"))),
        };
        law.validate()?;
        Ok(law)
    }
}

/// Parses the [`Display`](fmt::Display) form, e.g. `gaussian(mu=5;sigma=2)`.
impl std::str::FromStr for WeightLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.split_once('(') {
            Some((name, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| domain(format!("unbalanced parentheses in `{s}`")))?;
                (name, inner)
            }
            None => (s, ""),
        };
        let mut params = Vec::new();
        for item in args.split(';').map(str::trim).filter(|i| !i.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| domain(format!("expected key=value, got `{item}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| domain(format!("parameter `{}` is not a number", k.trim())))?;
            params.push((k.trim().to_ascii_lowercase(), v));
        }
        WeightLaw::from_params(name, |key| {
            params.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
        })
    }
}

/// Normalized nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Wraps `w` after checking it is a probability vector (sum within 1e-12).
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(domain("weight vector must be nonempty"));
        }
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(domain("weights must be finite and nonnegative"));
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(domain(format!("weights sum to {total}, not 1")));
        }
        Ok(Self(w))
    }

    pub fn uniform(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    pub fn one_hot(m: usize, k: usize) -> Self {
        let mut w = vec![0.0; m];
        w[k] = 1.0;
        Self(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for WeightVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

fn fibonacci_number(m: usize) -> f64 {
    let (mut a, mut b) = (0.0f64, 1.0f64);
    for _ in 1..m {
        let next = a + b;
        a = b;
        b = next;
    }
    if m == 0 {
        0.0
    } else {
        b
    }
}

/// `F_1, …, F_M` by the recurrence in double precision.
///
/// Values are exact integers up to `M = 78`.
pub fn fibonacci_sequence(m: usize) -> Result<Vec<f64>> {
    if m == 0 || m > MAX_FIBONACCI_INDEX {
        return Err(domain(format!(
            "Fibonacci length must be in 1..={MAX_FIBONACCI_INDEX}, got {m}"
        )));
    }
    let mut seq = Vec::with_capacity(m);
    seq.push(1.0);
    if m > 1 {
        seq.push(1.0);
    }
    for i in 2..m {
        seq.push(seq[i - 1] + seq[i - 2]);
    }
    Ok(seq)
}

/// Normalizes `law` over the indices `1..=M`.
pub fn weights_from_law(law: &WeightLaw, m: usize) -> Result<WeightVector> {
    if m == 0 {
        return Err(domain("pool size must be at least 1"));
    }
    law.validate()?;
    let mass: Vec<f64> = match law {
        WeightLaw::Fibonacci => fibonacci_sequence(m)?,
        _ => (1..=m).map(|i| law.mass(i, m)).collect(),
    };
    if let Some(bad) = mass.iter().position(|p| !p.is_finite() || *p < 0.0) {
        return Err(domain(format!(
            "{law} gives non-finite or negative mass {} at m = {}",
            mass[bad],
            bad + 1
        )));
    }
    let total: f64 = mass.iter().sum();
    if !total.is_finite() {
        return Err(domain(format!("{law} total mass overflows at M = {m}")));
    }
    if total <= 0.0 {
        return Err(Error::Normalization(format!(
            "{law} puts zero mass on 1..={m}"
        )));
    }
    Ok(WeightVector(mass.into_iter().map(|p| p / total).collect()))
}

/// Fibonacci weight `α_{M-k}` of the `k`-th learner from the end.
///
/// Equals `F_{M-k} / (F_{M+2} - 1)` and tends to `φ^-(k+2)` as `M` grows.
pub fn tail_weight(m: usize, k: usize) -> Result<f64> {
    if k >= m {
        return Err(domain(format!("tail offset k = {k} must be below M = {m}")));
    }
    let w = weights_from_law(&WeightLaw::Fibonacci, m)?;
    Ok(w[m - k - 1])
}

/// `Σ w_m²`, the variance factor of an orthogonalized ensemble with unit
/// learner variances.
pub fn sum_squared_weights(w: &WeightVector) -> f64 {
    w.iter().map(|v| v * v).sum()
}

/// Magnitudes `|ŵ(k)|` of the length-M DFT of the weights, by direct
/// summation.
pub fn weight_spectrum(w: &WeightVector) -> Vec<f64> {
    let n = w.len();
    (0..n)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (j, wj) in w.iter().enumerate() {
                // reduce the phase index first so large M keeps full precision
                let angle = -2.0 * PI * ((k * j) % n) as f64 / n as f64;
                re += wj * angle.cos();
                im += wj * angle.sin();
            }
            re.hypot(im)
        })
        .collect()
}
