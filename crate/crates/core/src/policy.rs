/// Tolerances shared by every numerical decision in the crate.
///
/// The defaults are the values the classification criteria were calibrated
/// against; override individual fields for experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericPolicy {
    /// `‖M − M*‖_F` bound for Hermiticity checks.
    pub hermitian_tol: f64,
    /// Lowest admissible eigenvalue of a density operator.
    pub psd_tol: f64,
    /// `|Tr ρ − 1|` bound.
    pub trace_tol: f64,
    /// Frobenius bound on the coin normalization residual.
    pub coin_tol: f64,
    /// Relative eigenvalue threshold (times the spectral norm) used for rank and support decisions.
    pub rank_rel_tol: f64,
    /// Absolute threshold for a positive-definiteness test.
    pub faithful_tol: f64,
    /// Radius of the eigenvalue-1 cluster of a channel.
    pub fixed_cluster_tol: f64,
    /// Bound on `‖Φ(τ) − τ‖_F` for an accepted invariant state.
    pub invariant_residual_tol: f64,
    /// `|m| ≤ drift_zero_tol` declares zero drift.
    pub drift_zero_tol: f64,
    /// Residual bound for common-eigenvector and orthogonality tests.
    pub eigenvector_tol: f64,
    /// Eigenvalue moduli `≥ 1 − trivial_modulus_tol` mark a trivial coin.
    pub trivial_modulus_tol: f64,
    /// Stopping tolerance of the dual power iteration for absorption operators.
    pub absorption_tol: f64,
    /// Iteration cap of the dual power iteration (counted in single channel applications).
    pub absorption_max_iter: usize,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self {
            hermitian_tol: 1e-10,
            psd_tol: 1e-10,
            trace_tol: 1e-10,
            coin_tol: 1e-9,
            rank_rel_tol: 1e-10,
            faithful_tol: 1e-10,
            fixed_cluster_tol: 1e-8,
            invariant_residual_tol: 1e-10,
            drift_zero_tol: 1e-9,
            eigenvector_tol: 1e-8,
            trivial_modulus_tol: 1e-12,
            absorption_tol: 1e-10,
            absorption_max_iter: 1_000_000,
        }
    }
}
