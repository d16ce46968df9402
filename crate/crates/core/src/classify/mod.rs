//! Recurrence classification of homogeneous open quantum walks.
//!
//! Every classifier produces a [`Verdict`]: a transient-subspace projector
//! `P_T` with the rule "the walk is ρ-transient iff `supp ρ ⊆ ran P_T`",
//! together with the per-enclosure drift table it was derived from.

mod one_d;
mod two_d;

pub use one_d::{
    check_nontrivial, classify_1d, classify_dim2_lazy, classify_ergodic_1d, classify_general_1d,
    classify_state_1d, drift_1d,
};
pub use two_d::{classify_2d_ct, classify_2d_discrete, drift_2d, jump_chain_lift, DirectionalCoin, DriftVector};

use crate::coin::Coin;
use crate::density::DensityOperator;
use crate::error::Result;
use crate::linalg::{self, ComplexMatrix};
use crate::policy::NumericPolicy;
use crate::spectral::{self, Superoperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VerdictKind {
    Recurrent,
    Transient,
    /// Recurrent for some densities, transient for the rest.
    Split,
}

impl VerdictKind {
    pub fn name(self) -> &'static str {
        match self {
            VerdictKind::Recurrent => "Recurrent",
            VerdictKind::Transient => "Transient",
            VerdictKind::Split => "Split",
        }
    }
}

impl std::fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which criterion produced the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    /// Unique invariant state, zero-drift test.
    ErgodicDrift,
    /// Dimension two, two common orthogonal eigenvectors of `L, B, R`.
    CommonEigenvectors2,
    /// Minimal-enclosure decomposition of a non-lazy 1D coin.
    GeneralizedEnclosures,
    /// Minimal-enclosure decomposition of a discrete 2D coin.
    Discrete2D,
    /// Minimal-enclosure decomposition of a continuous-time 2D coin.
    ContinuousTime2D,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::ErgodicDrift => "ergodic-drift",
            Criterion::CommonEigenvectors2 => "dim2-common-eigenvectors",
            Criterion::GeneralizedEnclosures => "generalized-enclosures",
            Criterion::Discrete2D => "discrete-2d-enclosures",
            Criterion::ContinuousTime2D => "continuous-2d-enclosures",
        }
    }
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drift {
    Scalar(f64),
    Vector(DriftVector),
}

impl Drift {
    pub fn magnitude(&self) -> f64 {
        match self {
            Drift::Scalar(m) => m.abs(),
            Drift::Vector(v) => v.norm(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnclosureVerdict {
    pub label: usize,
    pub rank: usize,
    pub projector: ComplexMatrix,
    pub drift: Drift,
    pub recurrent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateClass {
    Recurrent,
    Transient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub criterion: Criterion,
    pub transient_projector: ComplexMatrix,
    /// Sum of the projectors of the recurrent enclosures.
    pub recurrent_projector: ComplexMatrix,
    pub enclosures: Vec<EnclosureVerdict>,
    /// Channel used for reachability queries (the auxiliary map, or `exp(𝕃)`).
    pub channel: Superoperator,
}

impl Verdict {
    pub fn dim(&self) -> usize {
        self.transient_projector.nrows()
    }

    pub fn transient_rank(&self) -> usize {
        linalg::projector_rank(&self.transient_projector)
    }

    /// Orthonormal basis of `ran P_T`.
    pub fn transient_basis(&self) -> ComplexMatrix {
        linalg::basis_of_projector(&self.transient_projector)
    }

    /// Projector semantics: transient iff `supp ρ ⊆ ran P_T`.
    pub fn is_transient_for(&self, rho: &DensityOperator, policy: &NumericPolicy) -> bool {
        linalg::weight_outside(rho.matrix(), &self.transient_projector) <= policy.eigenvector_tol
    }

    /// Per-density classification through reachable supports: a density is
    /// recurrent iff the subspace its iterates explore meets a recurrent
    /// enclosure.
    pub fn classify_state(&self, rho: &DensityOperator, policy: &NumericPolicy) -> Result<StateClass> {
        match self.kind {
            VerdictKind::Recurrent => Ok(StateClass::Recurrent),
            VerdictKind::Transient => Ok(StateClass::Transient),
            VerdictKind::Split => {
                let reach = spectral::reachable_support(&self.channel, rho, policy)?;
                let overlap = linalg::trace_re(&(&reach * &self.recurrent_projector));
                Ok(if overlap > policy.eigenvector_tol {
                    StateClass::Recurrent
                } else {
                    StateClass::Transient
                })
            }
        }
    }
}

/// Classifies any coin with the criterion matching its family.
pub fn classify_coin(coin: &Coin, policy: &NumericPolicy) -> Result<Verdict> {
    match coin {
        Coin::OneD(c) => classify_1d(c, policy),
        Coin::TwoD(c) => classify_2d_discrete(c, policy),
        Coin::Continuous(c) => classify_2d_ct(c, policy),
    }
}

/// Assembles a verdict from per-enclosure recurrence flags.
///
/// `P_T` is the subspace whose states never reach a recurrent enclosure.
/// When the transient part `X` of the decomposition feeds a recurrent
/// enclosure this is `Σ_{transient α} P_α`; otherwise the non-reaching part
/// of `X` is added to it.
pub(crate) fn aggregate(
    channel: Superoperator,
    enclosures: Vec<EnclosureVerdict>,
    criterion: Criterion,
    policy: &NumericPolicy,
) -> Result<Verdict> {
    let d = channel.dim();
    let recurrent_projector = enclosures
        .iter()
        .filter(|e| e.recurrent)
        .fold(linalg::zeros(d), |acc, e| acc + &e.projector);
    let transient_projector = spectral::never_reaching_subspace(&channel, &recurrent_projector, policy)?;
    let rank = linalg::projector_rank(&transient_projector);
    let kind = if rank == 0 {
        VerdictKind::Recurrent
    } else if rank == d {
        VerdictKind::Transient
    } else {
        VerdictKind::Split
    };
    Ok(Verdict {
        kind,
        criterion,
        transient_projector,
        recurrent_projector,
        enclosures,
        channel,
    })
}
