use rand::Rng;

use super::{map_indexed, trajectory_rng, Execution, Trajectory};
use crate::coin::{Coin, DIRECTIONS_2D};
use crate::density::DensityOperator;
use crate::error::{OqwError, Result};
use crate::linalg::{self, r, ComplexMatrix};

/// Branch mass below which a step is treated as a coin defect.
const MIN_BRANCH_MASS: f64 = 1e-14;

/// Step operators with their displacements.
pub(crate) type Moves = Vec<(ComplexMatrix, [i64; 2])>;

/// Lattice dimension and the `(operator, displacement)` pairs of a discrete coin.
pub(crate) fn moves(coin: &Coin) -> Result<(usize, Moves)> {
    match coin {
        Coin::OneD(c) => {
            let mut ops = vec![(c.left.clone(), [-1, 0])];
            if c.lazy {
                ops.push((c.stay.clone(), [0, 0]));
            }
            ops.push((c.right.clone(), [1, 0]));
            Ok((1, ops))
        }
        Coin::TwoD(c) => Ok((2, c.ops.iter().cloned().zip(DIRECTIONS_2D).collect())),
        Coin::Continuous(_) => Err(OqwError::InvalidArgument(
            "continuous-time coins have no discrete step; use the continuous-time sampler".into(),
        )),
    }
}

/// Samples index `j` with probability `weights[j] / Σ weights`.
pub(crate) fn sample_index<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (j, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return j;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// One quantum trajectory of `n_steps` steps from the origin.
///
/// Each step picks the branch `K` with probability `Tr(KρK*)` and replaces
/// the internal state by `KρK*/Tr(KρK*)`.
pub fn simulate_discrete(
    coin: &Coin,
    rho0: &DensityOperator,
    n_steps: usize,
    seed: u64,
    stream: u64,
    record_states: bool,
) -> Result<Trajectory> {
    let (lattice_dim, ops) = moves(coin)?;
    linalg::common_dim("coin and density", [&ops[0].0, rho0.matrix()])?;
    let effects: Vec<ComplexMatrix> = ops.iter().map(|(k, _)| k.adjoint() * k).collect();
    let mut rng = trajectory_rng(seed, stream);
    let mut rho = rho0.matrix().clone();
    let mut pos = [0i64, 0];
    let mut positions = Vec::with_capacity(n_steps + 1);
    positions.push(pos);
    let mut states = record_states.then(|| vec![rho0.clone()]);
    let mut weights = vec![0.0; ops.len()];

    for step in 0..n_steps {
        for (w, e) in weights.iter_mut().zip(&effects) {
            *w = e.dot(&rho.transpose()).re.max(0.0);
        }
        let total: f64 = weights.iter().sum();
        if total < MIN_BRANCH_MASS {
            return Err(OqwError::CoinDefect(format!(
                "total branch mass {total:.3e} vanishes at step {step}"
            )));
        }
        let j = sample_index(&mut rng, &weights);
        let (k, shift) = &ops[j];
        let next = linalg::conjugate(k, &rho);
        let p = linalg::trace_re(&next);
        if p < MIN_BRANCH_MASS {
            return Err(OqwError::CoinDefect(format!("sampled branch has mass {p:.3e}")));
        }
        rho = linalg::hermitize(&(next / r(p)));
        pos = [pos[0] + shift[0], pos[1] + shift[1]];
        positions.push(pos);
        if let Some(s) = states.as_mut() {
            s.push(DensityOperator::from_normalized_unchecked(rho.clone()));
        }
    }
    Ok(Trajectory {
        seed,
        stream,
        lattice_dim,
        positions,
        jump_times: None,
        states,
        horizon: n_steps as f64,
    })
}

/// `count` independent trajectories; trajectory `k` uses stream `k`.
pub fn simulate_discrete_ensemble(
    coin: &Coin,
    rho0: &DensityOperator,
    n_steps: usize,
    count: usize,
    seed: u64,
    execution: Execution,
) -> Result<Vec<Trajectory>> {
    moves(coin)?;
    map_indexed(count, execution, |k| {
        simulate_discrete(coin, rho0, n_steps, seed, k as u64, false)
    })
    .into_iter()
    .collect()
}
