use rand::Rng;

use super::discrete::sample_index;
use super::{map_indexed, trajectory_rng, Execution, Trajectory};
use crate::coin::{self, CoinCT, DIRECTIONS_2D};
use crate::density::DensityOperator;
use crate::error::{OqwError, Result};
use crate::expm::expm;
use crate::linalg::{self, r, ComplexMatrix, C64};
use crate::policy::NumericPolicy;

/// Eigenvector condition number above which propagation falls back to `expm`.
const MAX_EIGENVECTOR_CONDITION: f64 = 1e8;
/// Largest real part tolerated in the spectrum of `G`.
const MAX_SPECTRAL_ABSCISSA: f64 = 1e-12;
/// Resolution of the waiting-time bisection.
const TIME_RESOLUTION: f64 = 1e-12;
/// Waiting times beyond this are treated as "no further jump".
const MAX_BRACKET: f64 = 1e12;

#[derive(Debug, Clone)]
enum Propagator {
    /// `G = V diag(λ) V⁻¹`.
    Diagonal {
        values: Vec<C64>,
        v: ComplexMatrix,
        v_inv: ComplexMatrix,
        gram: ComplexMatrix,
    },
    Expm,
}

/// Evolution `σ(s) = e^{Gs} ρ e^{G*s}` between jumps and inversion of its
/// survival function `Tr σ(s)`.
#[derive(Debug, Clone)]
pub struct WaitingTimeSampler {
    g: ComplexMatrix,
    propagator: Propagator,
}

impl WaitingTimeSampler {
    pub fn new(g: &ComplexMatrix) -> Result<Self> {
        linalg::square_dim(g)?;
        let (values, v) = linalg::eigen_decomposition(g);
        let abscissa = values.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        if abscissa > MAX_SPECTRAL_ABSCISSA {
            return Err(OqwError::CoinDefect(format!(
                "effective generator has spectral abscissa {abscissa:.3e} > 0; survival would not decrease"
            )));
        }
        let cond = linalg::condition_number(&v);
        let propagator = match v.clone().try_inverse() {
            Some(v_inv) if cond.is_finite() && cond <= MAX_EIGENVECTOR_CONDITION => Propagator::Diagonal {
                values,
                gram: v.adjoint() * &v,
                v,
                v_inv,
            },
            _ => Propagator::Expm,
        };
        Ok(Self {
            g: g.clone(),
            propagator,
        })
    }

    /// Whether the eigendecomposition path is in use.
    pub fn is_diagonal(&self) -> bool {
        matches!(self.propagator, Propagator::Diagonal { .. })
    }

    /// `e^{Gs} ρ e^{G*s}`.
    pub fn propagate(&self, rho: &ComplexMatrix, s: f64) -> ComplexMatrix {
        match &self.propagator {
            Propagator::Diagonal { values, v, v_inv, .. } => {
                let e = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                    values.len(),
                    values.iter().map(|l| (l * r(s)).exp()),
                ));
                let u = v * e * v_inv;
                linalg::conjugate(&u, rho)
            }
            Propagator::Expm => linalg::conjugate(&expm(&(&self.g * r(s))), rho),
        }
    }

    fn survival(&self, rho: &ComplexMatrix) -> impl Fn(f64) -> f64 + '_ {
        let coefficients = match &self.propagator {
            Propagator::Diagonal { values, v_inv, gram, .. } => {
                let m = v_inv * rho * v_inv.adjoint();
                let d = values.len();
                let mut terms = Vec::with_capacity(d * d);
                for i in 0..d {
                    for j in 0..d {
                        terms.push((values[i] + values[j].conj(), m[(i, j)] * gram[(j, i)]));
                    }
                }
                Some(terms)
            }
            Propagator::Expm => None,
        };
        let rho = rho.clone();
        move |s| match &coefficients {
            Some(terms) => terms.iter().map(|(rate, w)| (w * (rate * r(s)).exp()).re).sum(),
            None => linalg::trace_re(&self.propagate(&rho, s)),
        }
    }

    /// Survival probability `Tr σ(s)` for a normalized `ρ`.
    pub fn survival_at(&self, rho: &ComplexMatrix, s: f64) -> f64 {
        self.survival(rho)(s)
    }

    /// First `s ≤ horizon` with `Tr σ(s) = u`, or `None` when `Tr σ(horizon) > u`.
    /// An infinite horizon is bracketed by doubling.
    pub fn sample(&self, rho: &ComplexMatrix, u: f64, horizon: f64) -> Option<f64> {
        let f = self.survival(rho);
        let mut hi = horizon;
        if horizon.is_infinite() {
            hi = 1.0;
            while f(hi) > u {
                hi *= 2.0;
                if hi > MAX_BRACKET {
                    return None;
                }
            }
        } else if f(horizon) > u {
            return None;
        }
        let mut lo = 0.0;
        while hi - lo > TIME_RESOLUTION {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) > u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(hi)
    }
}

#[allow(clippy::too_many_arguments)]
fn run_ct(
    coin: &CoinCT,
    sampler: &WaitingTimeSampler,
    rho0: &DensityOperator,
    t_max: f64,
    max_jumps: Option<usize>,
    seed: u64,
    stream: u64,
    record_states: bool,
) -> Result<Trajectory> {
    let mut rng = trajectory_rng(seed, stream);
    let mut rho = rho0.matrix().clone();
    let mut t = 0.0;
    let mut pos = [0i64, 0];
    let mut positions = vec![pos];
    let mut times = vec![0.0];
    let mut states = record_states.then(|| vec![rho0.clone()]);
    let mut weights = [0.0; 4];

    while max_jumps.is_none_or(|n| positions.len() <= n) {
        let u = 1.0 - rng.random::<f64>();
        let Some(wait) = sampler.sample(&rho, u, t_max - t) else {
            break;
        };
        t += wait;
        let sigma = sampler.propagate(&rho, wait);
        let mass = linalg::trace_re(&sigma);
        for (w, a) in weights.iter_mut().zip(&coin.jumps) {
            *w = linalg::trace_re(&linalg::conjugate(a, &sigma)).max(0.0);
        }
        let total: f64 = weights.iter().sum();
        if !(total > 1e-14 * mass.max(f64::MIN_POSITIVE)) {
            return Err(OqwError::CoinDefect(format!(
                "jump rates vanish at t = {t:.6} although survival decreased"
            )));
        }
        let j = sample_index(&mut rng, &weights);
        let next = linalg::conjugate(&coin.jumps[j], &sigma);
        rho = linalg::hermitize(&(next / r(weights[j])));
        pos = [pos[0] + DIRECTIONS_2D[j][0], pos[1] + DIRECTIONS_2D[j][1]];
        positions.push(pos);
        times.push(t);
        if let Some(s) = states.as_mut() {
            s.push(DensityOperator::from_normalized_unchecked(rho.clone()));
        }
    }
    Ok(Trajectory {
        seed,
        stream,
        lattice_dim: 2,
        positions,
        jump_times: Some(times),
        states,
        horizon: if max_jumps.is_some() { t } else { t_max },
    })
}

fn prepare(coin: &CoinCT, rho0: &DensityOperator, t_max: f64) -> Result<WaitingTimeSampler> {
    coin::ensure_valid(&coin.clone().into(), &NumericPolicy::default())?;
    linalg::common_dim("coin and density", [&coin.hamiltonian, rho0.matrix()])?;
    if !(t_max > 0.0) {
        return Err(OqwError::InvalidArgument(format!("time horizon must be positive, got {t_max}")));
    }
    WaitingTimeSampler::new(coin.effective_generator())
}

/// One continuous-time trajectory on `[0, t_max]` with exactly sampled jump times.
pub fn simulate_ct(
    coin: &CoinCT,
    rho0: &DensityOperator,
    t_max: f64,
    seed: u64,
    stream: u64,
    record_states: bool,
) -> Result<Trajectory> {
    if !t_max.is_finite() {
        return Err(OqwError::InvalidArgument(format!("time horizon must be finite, got {t_max}")));
    }
    let sampler = prepare(coin, rho0, t_max)?;
    run_ct(coin, &sampler, rho0, t_max, None, seed, stream, record_states)
}

/// A continuous-time trajectory stopped at its `n_jumps`-th jump (or earlier
/// if jumps stop); `horizon` is the time of the last recorded jump.
pub fn simulate_ct_jumps(
    coin: &CoinCT,
    rho0: &DensityOperator,
    n_jumps: usize,
    seed: u64,
    stream: u64,
    record_states: bool,
) -> Result<Trajectory> {
    let sampler = prepare(coin, rho0, f64::INFINITY)?;
    run_ct(coin, &sampler, rho0, f64::INFINITY, Some(n_jumps), seed, stream, record_states)
}

/// `count` independent continuous-time trajectories; trajectory `k` uses stream `k`.
pub fn simulate_ct_ensemble(
    coin: &CoinCT,
    rho0: &DensityOperator,
    t_max: f64,
    count: usize,
    seed: u64,
    execution: Execution,
) -> Result<Vec<Trajectory>> {
    if !t_max.is_finite() {
        return Err(OqwError::InvalidArgument(format!("time horizon must be finite, got {t_max}")));
    }
    let sampler = prepare(coin, rho0, t_max)?;
    map_indexed(count, execution, |k| {
        run_ct(coin, &sampler, rho0, t_max, None, seed, k as u64, false)
    })
    .into_iter()
    .collect()
}

/// `count` trajectories each stopped at the `n_jumps`-th jump; trajectory `k` uses stream `k`.
pub fn simulate_ct_jumps_ensemble(
    coin: &CoinCT,
    rho0: &DensityOperator,
    n_jumps: usize,
    count: usize,
    seed: u64,
    execution: Execution,
) -> Result<Vec<Trajectory>> {
    let sampler = prepare(coin, rho0, f64::INFINITY)?;
    map_indexed(count, execution, |k| {
        run_ct(coin, &sampler, rho0, f64::INFINITY, Some(n_jumps), seed, k as u64, false)
    })
    .into_iter()
    .collect()
}
