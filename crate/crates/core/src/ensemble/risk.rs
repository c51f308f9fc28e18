//! Closed-form risk quantities for weighted orthonormal ensembles.

use crate::error::{domain, Result};
use crate::linalg::Matrix;
use crate::weights::WeightVector;

/// Inverse-variance weights `w_m = τ_m⁻² / Σ_j τ_j⁻²`.
pub fn oracle_rb_weights(tau_sq: &[f64]) -> Result<WeightVector> {
    if tau_sq.is_empty() {
        return Err(domain("need at least one variance"));
    }
    if let Some(bad) = tau_sq.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(domain(format!("variances must be positive, got {bad}")));
    }
    let inv: Vec<f64> = tau_sq.iter().map(|t| 1.0 / t).collect();
    let total: f64 = inv.iter().sum();
    WeightVector::new(inv.into_iter().map(|v| v / total).collect())
}

/// `R(w) = Σ_m (w_m − 1)² θ_m² + w_m² τ_m² / n`.
pub fn risk_orthonormal(w: &[f64], theta: &[f64], tau_sq: &[f64], n: usize) -> Result<f64> {
    if w.len() != theta.len() || w.len() != tau_sq.len() {
        return Err(domain(format!(
            "length mismatch: {} weights, {} coefficients, {} variances",
            w.len(),
            theta.len(),
            tau_sq.len()
        )));
    }
    if n == 0 {
        return Err(domain("sample size must be positive"));
    }
    let n = n as f64;
    Ok(w.iter()
        .zip(theta)
        .zip(tau_sq)
        .map(|((wm, th), t)| (wm - 1.0).powi(2) * th * th + wm * wm * t / n)
        .sum())
}

/// The exact minimizer of [`risk_orthonormal`] over the probability simplex.
///
/// Stationarity gives `w_m = max(0, (ν + θ_m²) / (θ_m² + τ_m²/n))` for the
/// multiplier `ν` that makes the weights sum to one. With `θ ≡ 0` this is
/// the inverse-variance rule of [`oracle_rb_weights`].
pub fn constrained_risk_minimizer(theta: &[f64], tau_sq: &[f64], n: usize) -> Result<WeightVector> {
    if theta.len() != tau_sq.len() || theta.is_empty() {
        return Err(domain(
            "need equally many coefficients and variances, at least one",
        ));
    }
    if n == 0 || tau_sq.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(domain("variances and sample size must be positive"));
    }
    let th2: Vec<f64> = theta.iter().map(|t| t * t).collect();
    let curv: Vec<f64> = th2
        .iter()
        .zip(tau_sq)
        .map(|(a, t)| a + t / n as f64)
        .collect();
    let weights_at = |nu: f64| -> Vec<f64> {
        th2.iter()
            .zip(&curv)
            .map(|(a, c)| ((nu + a) / c).max(0.0))
            .collect()
    };

    let mut lo = -th2.iter().cloned().fold(0.0, f64::max);
    let mut hi = curv.iter().cloned().fold(0.0, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if weights_at(mid).iter().sum::<f64>() < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // polish: solve the stationarity equation exactly on the active set
    let nu = 0.5 * (lo + hi);
    let active: Vec<usize> = (0..th2.len()).filter(|&i| nu + th2[i] > 0.0).collect();
    let inv_sum: f64 = active.iter().map(|&i| 1.0 / curv[i]).sum();
    let ratio_sum: f64 = active.iter().map(|&i| th2[i] / curv[i]).sum();
    let nu_exact = (1.0 - ratio_sum) / inv_sum;
    let w = weights_at(nu_exact);
    let total: f64 = w.iter().sum();
    WeightVector::new(w.into_iter().map(|v| v / total).collect())
}

/// `Var(Σ w_m h_m) = Σ w_m² σ_m² + 2 Σ_{m<m'} w_m w_m' ρ_mm' σ_m σ_m'`.
pub fn variance_of_weighted(w: &[f64], sigma: &[f64], rho: &Matrix) -> Result<f64> {
    let m = w.len();
    if sigma.len() != m || rho.rows() != m || rho.cols() != m {
        return Err(domain(
            "weights, deviations and correlation matrix disagree in size",
        ));
    }
    for i in 0..m {
        if (rho[(i, i)] - 1.0).abs() > 1e-12 {
            return Err(domain(format!(
                "correlation diagonal at {i} is {}",
                rho[(i, i)]
            )));
        }
        for j in 0..i {
            let r = rho[(i, j)];
            if (r - rho[(j, i)]).abs() > 1e-12 || !(-1.0..=1.0).contains(&r) {
                return Err(domain(format!("invalid correlation at ({i}, {j})")));
            }
        }
    }
    let mut v: f64 = w.iter().zip(sigma).map(|(a, s)| a * a * s * s).sum();
    for i in 0..m {
        for j in i + 1..m {
            v += 2.0 * w[i] * w[j] * rho[(i, j)] * sigma[i] * sigma[j];
        }
    }
    Ok(v.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_examples() {
        assert_eq!(
            oracle_rb_weights(&[1.0, 4.0]).unwrap().as_slice(),
            &[0.8, 0.2]
        );
        let eq = oracle_rb_weights(&[2.5, 2.5, 2.5]).unwrap();
        assert!(eq.iter().all(|w| (w - 1.0 / 3.0).abs() < 1e-15));
        let w = oracle_rb_weights(&[1.0, 2.0, 4.0]).unwrap();
        for (a, b) in w.iter().zip([4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(oracle_rb_weights(&[1.0, 0.0]).is_err());
        assert!(oracle_rb_weights(&[]).is_err());
    }

    #[test]
    fn risk_examples() {
        assert_eq!(risk_orthonormal(&[1.0], &[1.0], &[1.0], 1).unwrap(), 1.0);
        assert_eq!(
            risk_orthonormal(&[1.0, 0.0], &[1.0, 0.5], &[1.0, 1.0], 4).unwrap(),
            0.5
        );
        let m = 5;
        let r =
            risk_orthonormal(&vec![1.0 / m as f64; m], &vec![0.0; m], &vec![1.0; m], 1).unwrap();
        assert!((r - 1.0 / m as f64).abs() < 1e-15);
        assert!(risk_orthonormal(&[1.0], &[1.0, 2.0], &[1.0], 1).is_err());
    }

    #[test]
    fn minimizer_reduces_to_inverse_variance() {
        let tau = [1.0, 2.0, 4.0];
        let w = constrained_risk_minimizer(&[0.0; 3], &tau, 10).unwrap();
        let o = oracle_rb_weights(&tau).unwrap();
        for (a, b) in w.iter().zip(o.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn minimizer_handles_inactive_coordinates() {
        // two strong members already overshoot the budget at ν = 0, so the
        // signal-free member drops out
        let w = constrained_risk_minimizer(&[3.0, 3.0, 0.0], &[0.1, 0.1, 1.0], 1).unwrap();
        assert_eq!(w[2], 0.0);
        assert!((w[0] - 0.5).abs() < 1e-15 && (w[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn variance_examples() {
        let rho = |r: f64| Matrix::from_rows(&[vec![1.0, r], vec![r, 1.0]]);
        let w = [0.5, 0.5];
        assert!((variance_of_weighted(&w, &[1.0, 1.0], &rho(0.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!((variance_of_weighted(&w, &[1.0, 1.0], &rho(1.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!(
            variance_of_weighted(&w, &[1.0, 1.0], &rho(-1.0))
                .unwrap()
                .abs()
                < 1e-15
        );
        assert!(variance_of_weighted(&w, &[1.0, 1.0], &rho(1.5)).is_err());
        let bad_diag = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]);
        assert!(variance_of_weighted(&w, &[1.0, 1.0], &bad_diag).is_err());
    }
}
