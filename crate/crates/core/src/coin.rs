//! Coins of homogeneous open quantum walks and their validation.

use crate::error::{OqwError, Result};
use crate::linalg::{self, c, r, ComplexMatrix};
use crate::policy::NumericPolicy;

/// Lattice displacement attached to each jump operator of a 2D coin:
/// `D1` right, `D2` up, `D3` left, `D4` down.
pub const DIRECTIONS_2D: [[i64; 2]; 4] = [[1, 0], [0, 1], [-1, 0], [0, -1]];

/// Coin `(L, B, R)` of a walk on ℤ. `L` moves left, `B` stays, `R` moves right.
#[derive(Debug, Clone, PartialEq)]
pub struct Coin1D {
    pub left: ComplexMatrix,
    pub stay: ComplexMatrix,
    pub right: ComplexMatrix,
    /// `true` iff `B ≠ 0`.
    pub lazy: bool,
}

impl Coin1D {
    /// A lazy coin; `B = 0` is recorded as non-lazy.
    pub fn new(left: ComplexMatrix, stay: ComplexMatrix, right: ComplexMatrix) -> Result<Self> {
        linalg::common_dim("coin (L, B, R)", [&left, &stay, &right])?;
        let lazy = stay.iter().any(|z| *z != linalg::C64::default());
        Ok(Self {
            left,
            stay,
            right,
            lazy,
        })
    }

    /// A non-lazy coin `(L, R)`.
    pub fn non_lazy(left: ComplexMatrix, right: ComplexMatrix) -> Result<Self> {
        let d = linalg::common_dim("coin (L, R)", [&left, &right])?;
        Ok(Self {
            left,
            stay: linalg::zeros(d),
            right,
            lazy: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.left.nrows()
    }

    /// Kraus family of the auxiliary channel; `B` is omitted for non-lazy coins.
    pub fn kraus(&self) -> Vec<ComplexMatrix> {
        if self.lazy {
            vec![self.left.clone(), self.stay.clone(), self.right.clone()]
        } else {
            vec![self.left.clone(), self.right.clone()]
        }
    }

    pub fn normalization_residual(&self) -> f64 {
        let d = self.dim();
        let sum = self.left.adjoint() * &self.left
            + self.stay.adjoint() * &self.stay
            + self.right.adjoint() * &self.right;
        (sum - linalg::identity(d)).norm()
    }
}

/// Coin `(D1, D2, D3, D4)` of a discrete-time walk on ℤ².
#[derive(Debug, Clone, PartialEq)]
pub struct Coin2D {
    pub ops: [ComplexMatrix; 4],
}

impl Coin2D {
    pub fn new(ops: [ComplexMatrix; 4]) -> Result<Self> {
        linalg::common_dim("coin (D1..D4)", ops.iter())?;
        Ok(Self { ops })
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    pub fn kraus(&self) -> Vec<ComplexMatrix> {
        self.ops.to_vec()
    }

    pub fn normalization_residual(&self) -> f64 {
        let d = self.dim();
        let sum = self
            .ops
            .iter()
            .fold(linalg::zeros(d), |acc, op| acc + op.adjoint() * op);
        (sum - linalg::identity(d)).norm()
    }
}

/// Coin `(A1..A4, H)` of a continuous-time walk on ℤ², with the derived
/// effective generator `G = −iH − ½ Σ Aₖ* Aₖ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinCT {
    pub jumps: [ComplexMatrix; 4],
    pub hamiltonian: ComplexMatrix,
    effective: ComplexMatrix,
}

impl CoinCT {
    pub fn new(jumps: [ComplexMatrix; 4], hamiltonian: ComplexMatrix) -> Result<Self> {
        linalg::common_dim("coin (A1..A4, H)", jumps.iter().chain(std::iter::once(&hamiltonian)))?;
        let d = hamiltonian.nrows();
        let dissipation = jumps
            .iter()
            .fold(linalg::zeros(d), |acc, a| acc + a.adjoint() * a);
        let effective = &hamiltonian * c(0.0, -1.0) - dissipation * r(0.5);
        Ok(Self {
            jumps,
            hamiltonian,
            effective,
        })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    /// `G = −iH − ½ Σ Aₖ* Aₖ`.
    pub fn effective_generator(&self) -> &ComplexMatrix {
        &self.effective
    }
}

/// Any of the three coin families.
#[derive(Debug, Clone, PartialEq)]
pub enum Coin {
    OneD(Coin1D),
    TwoD(Coin2D),
    Continuous(CoinCT),
}

impl Coin {
    pub fn dim(&self) -> usize {
        match self {
            Coin::OneD(c) => c.dim(),
            Coin::TwoD(c) => c.dim(),
            Coin::Continuous(c) => c.dim(),
        }
    }
}

impl From<Coin1D> for Coin {
    fn from(c: Coin1D) -> Self {
        Coin::OneD(c)
    }
}

impl From<Coin2D> for Coin {
    fn from(c: Coin2D) -> Self {
        Coin::TwoD(c)
    }
}

impl From<CoinCT> for Coin {
    fn from(c: CoinCT) -> Self {
        Coin::Continuous(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub ok: bool,
    /// Frobenius norm of the normalization residual (of `H − H*` for continuous-time coins).
    pub deficiency: f64,
    pub messages: Vec<String>,
}

/// Checks the coin invariants at `policy.coin_tol`.
///
/// Dimension mismatches are caught when the coin is constructed, so this
/// only reports numeric validity.
pub fn validate_coin(coin: &Coin, policy: &NumericPolicy) -> ValidationReport {
    let mut messages = Vec::new();
    let (deficiency, label) = match coin {
        Coin::OneD(c) => (c.normalization_residual(), "‖L*L + B*B + R*R − I‖_F"),
        Coin::TwoD(c) => (c.normalization_residual(), "‖Σ Dⱼ*Dⱼ − I‖_F"),
        Coin::Continuous(c) => (linalg::hermitian_deviation(&c.hamiltonian), "‖H − H*‖_F"),
    };
    let ok = deficiency <= policy.coin_tol;
    messages.push(format!(
        "{label} = {deficiency:.3e} ({})",
        if ok { "ok" } else { "violated" }
    ));
    ValidationReport {
        ok,
        deficiency,
        messages,
    }
}

/// Fails with [`OqwError::InvalidCoin`] unless the coin passes [`validate_coin`].
pub fn ensure_valid(coin: &Coin, policy: &NumericPolicy) -> Result<()> {
    let report = validate_coin(coin, policy);
    if report.ok {
        Ok(())
    } else {
        Err(OqwError::InvalidCoin {
            deficiency: report.deficiency,
            reason: report.messages.join("; "),
        })
    }
}

/// `Σₖ Kₖ ρ Kₖ*`.
pub fn apply_channel(kraus: &[ComplexMatrix], rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = linalg::common_dim("Kraus family", kraus.iter().chain(std::iter::once(rho)))?;
    Ok(kraus
        .iter()
        .fold(linalg::zeros(d), |acc, k| acc + linalg::conjugate(k, rho)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry;

    fn policy() -> NumericPolicy {
        NumericPolicy::default()
    }

    #[test]
    fn hadamard_like_coin_is_valid() {
        let h = linalg::identity(2) * r(std::f64::consts::FRAC_1_SQRT_2);
        let coin = Coin1D::non_lazy(h.clone(), h).unwrap();
        let rep = validate_coin(&coin.into(), &policy());
        assert!(rep.ok);
        assert!(rep.deficiency < 1e-15);
    }

    #[test]
    fn unnormalized_coin_reports_sqrt2() {
        let coin = Coin1D::non_lazy(linalg::identity(2), linalg::identity(2)).unwrap();
        let rep = validate_coin(&coin.into(), &policy());
        assert!(!rep.ok);
        assert!((rep.deficiency - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn example_one_coin_satisfies_normalization() {
        // B*B = (b + m²) I for this family, so L*L + B*B + R*R = (n² + b + m²) I = I.
        let coin = registry::ex5_1a_coin(0.6, 0.6);
        let b = 0.28;
        let bb = coin.stay.adjoint() * &coin.stay;
        assert!((bb - linalg::identity(2) * r(b + 0.36)).norm() < 1e-15);
        assert!(validate_coin(&coin.into(), &policy()).ok);
    }

    #[test]
    fn structural_errors_are_distinct() {
        let err = Coin1D::new(linalg::identity(2), linalg::zeros(3), linalg::identity(2)).unwrap_err();
        assert!(matches!(err, OqwError::DimensionMismatch { .. }));
        let err = Coin2D::new([
            linalg::identity(2),
            linalg::identity(2),
            linalg::identity(2),
            linalg::identity(1),
        ])
        .unwrap_err();
        assert!(matches!(err, OqwError::DimensionMismatch { .. }));
    }

    #[test]
    fn ct_coin_effective_generator() {
        let half = linalg::identity(1) * r(0.5);
        let coin = CoinCT::new(
            [half.clone(), half.clone(), half.clone(), half],
            linalg::zeros(1),
        )
        .unwrap();
        assert!((coin.effective_generator()[(0, 0)] - r(-0.5)).norm() < 1e-15);
        assert!(validate_coin(&coin.into(), &policy()).ok);
    }

    #[test]
    fn non_hermitian_hamiltonian_rejected() {
        let h = linalg::from_rows(2, &[r(0.0), r(1.0), r(0.0), r(0.0)]);
        let coin = CoinCT::new(
            [linalg::zeros(2), linalg::zeros(2), linalg::zeros(2), linalg::zeros(2)],
            h,
        )
        .unwrap();
        let rep = validate_coin(&coin.into(), &policy());
        assert!(!rep.ok);
        assert!((rep.deficiency - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn identity_channel_and_example_fixed_points() {
        let rho = linalg::from_rows(2, &[r(0.3), c(0.1, 0.2), c(0.1, -0.2), r(0.7)]);
        let out = apply_channel(&[linalg::identity(2)], &rho).unwrap();
        assert_eq!(out, rho);

        let coin = registry::ex5_1a_coin(0.6, 0.6);
        let half = linalg::identity(2) / r(2.0);
        let out = apply_channel(&coin.kraus(), &half).unwrap();
        assert!((out - &half).norm() < 1e-15);

        let coin = registry::ex5_2_coin();
        let rho_inf = registry::ex5_2_invariant_state();
        let out = apply_channel(&coin.kraus(), &rho_inf).unwrap();
        assert!((out - &rho_inf).norm() < 1e-14);
    }

    #[test]
    fn apply_channel_dimension_mismatch() {
        assert!(apply_channel(&[linalg::identity(2)], &linalg::identity(3)).is_err());
    }
}
