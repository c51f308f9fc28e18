//! Spectrum of the second-order update `F_m = β F_{m−1} + γ F_{m−2} + ΔF`.

use num_complex::Complex64;

/// Homogeneous part of the second-order flow, `T = [[β, γ], [1, 0]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecursionOperator {
    pub beta: f64,
    pub gamma: f64,
}

/// Both stability verdicts for an operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub roots: (Complex64, Complex64),
    pub spectral_radius: f64,
    /// `ρ(T) < 1`; this is the verdict that governs boundedness.
    pub stable: bool,
    /// The parabola test `β² + 4γ < 4`. Not equivalent to `stable`.
    pub inequality_holds: bool,
}

impl RecursionOperator {
    pub fn new(beta: f64, gamma: f64) -> Self {
        Self { beta, gamma }
    }

    /// Roots `λ± = (β ± √(β² + 4γ)) / 2` of `λ² − βλ − γ`.
    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        let disc = Complex64::new(self.beta * self.beta + 4.0 * self.gamma, 0.0).sqrt();
        let b = Complex64::new(self.beta, 0.0);
        ((b + disc) * 0.5, (b - disc) * 0.5)
    }

    /// `max(|λ+|, |λ−|)`.
    pub fn spectral_radius(&self) -> f64 {
        let (a, b) = self.eigenvalues();
        a.norm().max(b.norm())
    }

    pub fn is_stable(&self) -> StabilityReport {
        let roots = self.eigenvalues();
        let spectral_radius = roots.0.norm().max(roots.1.norm());
        StabilityReport {
            roots,
            spectral_radius,
            stable: spectral_radius < 1.0,
            inequality_holds: self.beta * self.beta + 4.0 * self.gamma < 4.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::PHI;

    #[test]
    fn golden_roots() {
        let (p, m) = RecursionOperator::new(1.0, 1.0).eigenvalues();
        assert!((p.re - PHI).abs() < 1e-15 && p.im == 0.0);
        assert!((m.re - (1.0 - PHI)).abs() < 1e-15);
        assert!((p.re - 1.618_034).abs() < 1e-6 && (m.re + 0.618_034).abs() < 1e-6);
    }

    #[test]
    fn complex_pair() {
        let (p, m) = RecursionOperator::new(0.0, -0.25).eigenvalues();
        assert!(p.re.abs() < 1e-15 && (p.im.abs() - 0.5).abs() < 1e-15);
        assert!((p - m.conj()).norm() < 1e-15);
    }

    #[test]
    fn degenerate_zero() {
        let (p, m) = RecursionOperator::new(0.0, 0.0).eigenvalues();
        assert_eq!((p.norm(), m.norm()), (0.0, 0.0));
        let r = RecursionOperator::new(0.0, 0.0).is_stable();
        assert!(r.stable && r.spectral_radius == 0.0);
    }

    #[test]
    fn vieta() {
        for &(b, g) in &[
            (1.0, 1.0),
            (0.3, -0.8),
            (-1.2, 0.4),
            (1.9, 0.05),
            (0.0, 2.0),
        ] {
            let (p, m) = RecursionOperator::new(b, g).eigenvalues();
            assert!(((p + m).re - b).abs() < 1e-12 && (p + m).im.abs() < 1e-12);
            assert!(((p * m).re + g).abs() < 1e-12 && (p * m).im.abs() < 1e-12);
        }
    }

    #[test]
    fn verdicts() {
        // roots 1 and -0.5: on the boundary, so not stable
        let r = RecursionOperator::new(0.5, 0.5).is_stable();
        assert!((r.spectral_radius - 1.0).abs() < 1e-15);
        assert!(!r.stable);

        let r = RecursionOperator::new(1.0, 1.0).is_stable();
        assert!(!r.stable && (r.spectral_radius - PHI).abs() < 1e-15);

        // the parabola test accepts this operator but λ+ ≈ 1.926
        let r = RecursionOperator::new(1.9, 0.05).is_stable();
        assert!(r.inequality_holds && !r.stable);
        assert!((r.spectral_radius - 1.925_961_06).abs() < 1e-6);
    }
}
