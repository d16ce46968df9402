use nalgebra::DVector;

use super::{aggregate, Criterion, Drift, EnclosureVerdict, StateClass, Verdict, VerdictKind};
use crate::coin::{self, Coin1D};
use crate::density::DensityOperator;
use crate::error::{OqwError, Result};
use crate::linalg::{self, ComplexMatrix, C64};
use crate::policy::NumericPolicy;
use crate::spectral::{self, Superoperator};

/// `m = Tr(RτR*) − Tr(LτL*)`.
pub fn drift_1d(coin: &Coin1D, tau: &DensityOperator) -> Result<f64> {
    linalg::common_dim("coin and density", [&coin.left, tau.matrix()])?;
    let t = tau.matrix();
    Ok(linalg::trace_re(&linalg::conjugate(&coin.right, t)) - linalg::trace_re(&linalg::conjugate(&coin.left, t)))
}

fn left_weight(coin: &Coin1D, tau: &DensityOperator) -> f64 {
    linalg::trace_re(&linalg::conjugate(&coin.left, tau.matrix()))
}

/// Rejects coins where one of `L, B, R` has an eigenvalue on the unit circle;
/// the criteria exclude those walks explicitly.
pub fn check_nontrivial(coin: &Coin1D, policy: &NumericPolicy) -> Result<()> {
    for op in [&coin.left, &coin.stay, &coin.right] {
        let modulus = linalg::eigenvalues(op)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if modulus >= 1.0 - policy.trivial_modulus_tol {
            return Err(OqwError::TrivialCoin { modulus });
        }
    }
    Ok(())
}

fn prepare(coin: &Coin1D, policy: &NumericPolicy) -> Result<Superoperator> {
    coin::ensure_valid(&coin.clone().into(), policy)?;
    check_nontrivial(coin, policy)?;
    spectral::superoperator(&coin.kraus())
}

fn drift_record(label: usize, projector: ComplexMatrix, drift: f64, recurrent: bool) -> EnclosureVerdict {
    EnclosureVerdict {
        label,
        rank: linalg::projector_rank(&projector),
        projector,
        drift: Drift::Scalar(drift),
        recurrent,
    }
}

/// Criterion for coins whose auxiliary channel has a unique invariant state:
/// recurrent iff the drift at that state vanishes.
pub fn classify_ergodic_1d(coin: &Coin1D, policy: &NumericPolicy) -> Result<Verdict> {
    let channel = prepare(coin, policy)?;
    if !spectral::is_ergodic(&channel, policy) {
        return Err(OqwError::NotErgodic);
    }
    let tau = spectral::invariant_state_maximal(&channel, policy)?;
    let m = drift_1d(coin, &tau)?;
    let recurrent = m.abs() <= policy.drift_zero_tol;
    let d = coin.dim();
    let support = crate::density::support_projector(tau.matrix(), policy)?;
    let (kind, transient_projector) = if recurrent {
        (VerdictKind::Recurrent, linalg::zeros(d))
    } else {
        (VerdictKind::Transient, linalg::identity(d))
    };
    let recurrent_projector = if recurrent { support.clone() } else { linalg::zeros(d) };
    Ok(Verdict {
        kind,
        criterion: Criterion::ErgodicDrift,
        transient_projector,
        recurrent_projector,
        enclosures: vec![drift_record(1, support, m, recurrent)],
        channel,
    })
}

/// Unit eigenvectors of a 2×2 matrix; one vector when the matrix is defective.
fn eigenvectors_2x2(m: &ComplexMatrix, tol: f64) -> Vec<DVector<C64>> {
    let (_, v) = linalg::eigen_decomposition(m);
    let first = v.column(0).into_owned();
    let second = v.column(1).into_owned();
    if first.dotc(&second).norm() > 1.0 - tol {
        vec![first]
    } else {
        vec![first, second]
    }
}

fn is_eigenvector(op: &ComplexMatrix, v: &DVector<C64>, tol: f64) -> bool {
    let image = op * v;
    let lambda = v.dotc(&image);
    (image - v * lambda).norm() <= tol
}

fn is_scalar_matrix(m: &ComplexMatrix, tol: f64) -> bool {
    let d = m.nrows();
    let mean = m.trace() / linalg::r(d as f64);
    (m - linalg::identity(d) * mean).norm() <= tol
}

/// Common eigenvectors of `L, B, R` for a 2-dimensional coin.
fn common_eigenvectors(coin: &Coin1D, tol: f64) -> Vec<DVector<C64>> {
    let ops = [&coin.left, &coin.right, &coin.stay];
    // Eigenvectors of L, unless L is scalar; then the first non-scalar operator decides.
    let candidates = match ops.iter().find(|op| !is_scalar_matrix(op, tol)) {
        Some(op) => eigenvectors_2x2(op, tol),
        None => {
            let id = linalg::identity(2);
            vec![id.column(0).into_owned(), id.column(1).into_owned()]
        }
    };
    candidates
        .into_iter()
        .filter(|v| ops.iter().all(|op| is_eigenvector(op, v, tol)))
        .collect()
}

/// Dimension-two criterion.
///
/// With at most one common eigenvector of `L, B, R` the auxiliary map is
/// ergodic and the drift criterion applies. With two (orthogonal) common
/// eigenvectors `u₁, u₂` the walk restricted to each is classical, and
/// `|lⱼ| = |rⱼ|` decides recurrence on `uⱼ`.
pub fn classify_dim2_lazy(coin: &Coin1D, policy: &NumericPolicy) -> Result<Verdict> {
    if coin.dim() != 2 {
        return Err(OqwError::DimensionMismatch {
            what: "dimension-two criterion".into(),
            expected: 2,
            found: coin.dim(),
        });
    }
    let channel = prepare(coin, policy)?;
    let tol = policy.eigenvector_tol;
    let common = common_eigenvectors(coin, tol);
    if common.len() < 2 {
        return classify_ergodic_1d(coin, policy);
    }
    let overlap = common[0].dotc(&common[1]).norm();
    if overlap > tol {
        return Err(OqwError::CoinDefect(format!(
            "common eigenvectors are not orthogonal (overlap {overlap:.3e})"
        )));
    }
    let mut enclosures = Vec::with_capacity(2);
    for (j, u) in common.iter().enumerate() {
        let l = u.dotc(&(&coin.left * u)).norm();
        let r = u.dotc(&(&coin.right * u)).norm();
        let m = r * r - l * l;
        let recurrent = m.abs() <= policy.drift_zero_tol;
        enclosures.push(drift_record(j + 1, u * u.adjoint(), m, recurrent));
    }
    aggregate(channel, enclosures, Criterion::CommonEigenvectors2, policy)
}

/// Generalized criterion for non-lazy coins of any dimension, built on the
/// minimal-enclosure decomposition of the auxiliary channel: an enclosure is
/// recurrent iff `Tr(Lτ_αL*) = ½`.
pub fn classify_general_1d(coin: &Coin1D, policy: &NumericPolicy) -> Result<Verdict> {
    let channel = prepare(coin, policy)?;
    if coin.lazy && !spectral::is_ergodic(&channel, policy) {
        return Err(OqwError::CriterionUnavailable(
            "the generalized criterion covers non-lazy coins only (B ≠ 0 and the auxiliary map is not ergodic)".into(),
        ));
    }
    let decomposition = spectral::decompose(&channel, policy)?;
    let mut enclosures = Vec::with_capacity(decomposition.enclosures.len());
    for e in decomposition.enclosures {
        let m = drift_1d(coin, &e.invariant_state)?;
        let recurrent = if coin.lazy {
            m.abs() <= policy.drift_zero_tol
        } else {
            (left_weight(coin, &e.invariant_state) - 0.5).abs() <= policy.drift_zero_tol
        };
        enclosures.push(drift_record(e.label, e.projector, m, recurrent));
    }
    aggregate(channel, enclosures, Criterion::GeneralizedEnclosures, policy)
}

/// Dispatches to the most specific applicable criterion: ergodic, then
/// dimension two, then the generalized non-lazy criterion.
pub fn classify_1d(coin: &Coin1D, policy: &NumericPolicy) -> Result<Verdict> {
    let channel = prepare(coin, policy)?;
    if spectral::is_ergodic(&channel, policy) {
        classify_ergodic_1d(coin, policy)
    } else if coin.dim() == 2 {
        classify_dim2_lazy(coin, policy)
    } else if !coin.lazy {
        classify_general_1d(coin, policy)
    } else {
        Err(OqwError::CriterionUnavailable(format!(
            "lazy coin of dimension {} with a non-ergodic auxiliary map",
            coin.dim()
        )))
    }
}

/// ρ-recurrence of the walk started at a site with internal state `ρ`.
pub fn classify_state_1d(coin: &Coin1D, rho: &DensityOperator, policy: &NumericPolicy) -> Result<StateClass> {
    linalg::common_dim("coin and density", [&coin.left, rho.matrix()])?;
    let verdict = classify_1d(coin, policy)?;
    verdict.classify_state(rho, policy)
}
