use super::{aggregate, Criterion, Drift, EnclosureVerdict, Verdict};
use crate::coin::{self, Coin2D, CoinCT};
use crate::density::DensityOperator;
use crate::error::Result;
use crate::linalg::{self, ComplexMatrix};
use crate::policy::NumericPolicy;
use crate::spectral::{self, Superoperator};

/// Expected displacement per step (per unit time for continuous-time coins).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftVector {
    pub m1: f64,
    pub m2: f64,
}

impl DriftVector {
    pub fn norm(&self) -> f64 {
        self.m1.hypot(self.m2)
    }
}

/// Coins whose four operators are attached to the lattice directions right, up, left, down.
pub trait DirectionalCoin {
    fn directional_ops(&self) -> &[ComplexMatrix; 4];
}

impl DirectionalCoin for Coin2D {
    fn directional_ops(&self) -> &[ComplexMatrix; 4] {
        &self.ops
    }
}

impl DirectionalCoin for CoinCT {
    fn directional_ops(&self) -> &[ComplexMatrix; 4] {
        &self.jumps
    }
}

/// `m₁ = Tr(X₁τX₁*) − Tr(X₃τX₃*)`, `m₂ = Tr(X₂τX₂*) − Tr(X₄τX₄*)`.
pub fn drift_2d<C: DirectionalCoin>(coin: &C, tau: &DensityOperator) -> Result<DriftVector> {
    let ops = coin.directional_ops();
    linalg::common_dim("coin and density", [&ops[0], tau.matrix()])?;
    let w: Vec<f64> = ops
        .iter()
        .map(|x| linalg::trace_re(&linalg::conjugate(x, tau.matrix())))
        .collect();
    Ok(DriftVector {
        m1: w[0] - w[2],
        m2: w[1] - w[3],
    })
}

fn classify_with<C: DirectionalCoin>(
    coin: &C,
    channel: Superoperator,
    criterion: Criterion,
    policy: &NumericPolicy,
) -> Result<Verdict> {
    let decomposition = spectral::decompose(&channel, policy)?;
    let mut enclosures = Vec::with_capacity(decomposition.enclosures.len());
    for e in decomposition.enclosures {
        let m = drift_2d(coin, &e.invariant_state)?;
        enclosures.push(EnclosureVerdict {
            label: e.label,
            rank: e.rank(),
            projector: e.projector,
            drift: Drift::Vector(m),
            recurrent: m.norm() <= policy.drift_zero_tol,
        });
    }
    aggregate(channel, enclosures, criterion, policy)
}

/// Enclosure-wise zero-drift criterion for a discrete coin on ℤ².
pub fn classify_2d_discrete(coin: &Coin2D, policy: &NumericPolicy) -> Result<Verdict> {
    coin::ensure_valid(&coin.clone().into(), policy)?;
    let channel = spectral::superoperator(&coin.kraus())?;
    classify_with(coin, channel, Criterion::Discrete2D, policy)
}

/// Enclosure-wise zero-drift criterion for a continuous-time coin on ℤ²,
/// using the time-one map `exp(𝕃)` of the auxiliary generator.
pub fn classify_2d_ct(coin: &CoinCT, policy: &NumericPolicy) -> Result<Verdict> {
    coin::ensure_valid(&coin.clone().into(), policy)?;
    let channel = spectral::lindblad_superoperator(coin).exp();
    classify_with(coin, channel, Criterion::ContinuousTime2D, policy)
}

/// Continuous-time coin whose jump chain is the given discrete walk: `Aⱼ = Dⱼ`, `H = 0`.
pub fn jump_chain_lift(coin: &Coin2D, policy: &NumericPolicy) -> Result<CoinCT> {
    coin::ensure_valid(&coin.clone().into(), policy)?;
    CoinCT::new(coin.ops.clone(), linalg::zeros(coin.dim()))
}
