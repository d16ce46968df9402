use super::{discrete::moves, Execution};
use crate::coin::{Coin, CoinCT, DIRECTIONS_2D};
use crate::density::DensityOperator;
use crate::error::{OqwError, Result};
use crate::linalg::{self, ComplexMatrix, C64};

/// Largest number of exact steps accepted per lattice dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeBudget {
    pub max_steps_1d: usize,
    pub max_steps_2d: usize,
}

impl Default for LatticeBudget {
    fn default() -> Self {
        Self {
            max_steps_1d: 20_000,
            max_steps_2d: 600,
        }
    }
}

impl LatticeBudget {
    fn check(&self, lattice_dim: usize, steps: usize) -> Result<()> {
        let limit = if lattice_dim == 1 { self.max_steps_1d } else { self.max_steps_2d };
        if steps > limit {
            return Err(OqwError::BudgetExceeded {
                requested: steps,
                limit,
            });
        }
        Ok(())
    }
}

/// Site blocks `ρₙ(s)` of `Φⁿ(ρ₀ ⊗ |0⟩⟨0|)`, stored densely on the square
/// (or segment) of half-width `radius` around the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    lattice_dim: usize,
    d: usize,
    radius: usize,
    steps: usize,
    data: Vec<C64>,
}

impl LatticeState {
    fn new(lattice_dim: usize, d: usize, radius: usize) -> Self {
        let width = 2 * radius + 1;
        let rows = if lattice_dim == 1 { 1 } else { width };
        Self {
            lattice_dim,
            d,
            radius,
            steps: 0,
            data: vec![C64::default(); width * rows * d * d],
        }
    }

    fn width(&self) -> usize {
        2 * self.radius + 1
    }

    fn offset(&self, site: [i64; 2]) -> Option<usize> {
        let r = self.radius as i64;
        if site[0].abs() > r || site[1].abs() > r || (self.lattice_dim == 1 && site[1] != 0) {
            return None;
        }
        let row = if self.lattice_dim == 1 { 0 } else { (site[1] + r) as usize };
        Some((row * self.width() + (site[0] + r) as usize) * self.d * self.d)
    }

    pub fn lattice_dim(&self) -> usize {
        self.lattice_dim
    }

    /// Number of steps taken from the point start.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `ρₙ(site)`; zero outside the stored window.
    pub fn block(&self, site: [i64; 2]) -> ComplexMatrix {
        let d = self.d;
        match self.offset(site) {
            Some(o) => ComplexMatrix::from_row_slice(d, d, &self.data[o..o + d * d]),
            None => linalg::zeros(d),
        }
    }

    /// `pₙ(site) = Tr ρₙ(site)`.
    pub fn mass(&self, site: [i64; 2]) -> f64 {
        match self.offset(site) {
            Some(o) => trace(&self.data[o..o + self.d * self.d], self.d),
            None => 0.0,
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.data.chunks(self.d * self.d).map(|b| trace(b, self.d)).sum()
    }

    /// Sites within distance `steps` of the origin with their masses, row by row.
    pub fn distribution(&self) -> Vec<([i64; 2], f64)> {
        let n = self.steps as i64;
        let ys: Vec<i64> = if self.lattice_dim == 1 { vec![0] } else { (-n..=n).collect() };
        let mut out = Vec::new();
        for y in ys {
            let span = n - y.abs();
            for x in -span..=span {
                out.push(([x, y], self.mass([x, y])));
            }
        }
        out
    }
}

fn row_major(m: &ComplexMatrix) -> Vec<C64> {
    m.transpose().as_slice().to_vec()
}

fn trace(block: &[C64], d: usize) -> f64 {
    (0..d).map(|i| block[i * d + i].re).sum()
}

/// Per-direction site map on row-major blocks.
enum SiteMap {
    /// `X ↦ K X K*` with `K` row-major.
    Kraus(Vec<C64>),
    /// Row-major `d²×d²` matrix acting on the row-major vectorized block.
    Channel(Vec<C64>),
}

struct Move {
    map: SiteMap,
    shift: [i64; 2],
}

/// `out += M x` for a row-major `n×n` matrix.
fn matvec_acc(m: &[C64], x: &[C64], out: &mut [C64]) {
    let n = x.len();
    for (p, o) in out.iter_mut().enumerate() {
        let row = &m[p * n..(p + 1) * n];
        *o += row.iter().zip(x).map(|(a, b)| a * b).sum::<C64>();
    }
}

/// `out += K X K*` on row-major `d×d` slices.
fn conjugate_acc(k: &[C64], x: &[C64], out: &mut [C64], tmp: &mut [C64], d: usize) {
    for i in 0..d {
        for l in 0..d {
            let mut acc = C64::default();
            for m in 0..d {
                acc += k[i * d + m] * x[m * d + l];
            }
            tmp[i * d + l] = acc;
        }
    }
    for i in 0..d {
        for j in 0..d {
            let mut acc = C64::default();
            for l in 0..d {
                acc += tmp[i * d + l] * k[j * d + l].conj();
            }
            out[i * d + j] += acc;
        }
    }
}

/// Step-by-step exact evolution from a point start at the origin.
pub struct LatticeEvolution {
    moves: Vec<Move>,
    current: LatticeState,
    next: LatticeState,
    max_steps: usize,
}

impl LatticeEvolution {
    /// Allocates a window for up to `max_steps` steps.
    pub fn new(coin: &Coin, rho0: &DensityOperator, max_steps: usize, budget: &LatticeBudget) -> Result<Self> {
        let (lattice_dim, ops) = moves(coin)?;
        linalg::common_dim("coin and density", [&ops[0].0, rho0.matrix()])?;
        let moves = ops
            .into_iter()
            .map(|(k, shift)| Move {
                map: SiteMap::Kraus(row_major(&k)),
                shift,
            })
            .collect();
        Self::with_moves(lattice_dim, coin.dim(), moves, rho0, max_steps, budget)
    }

    /// Evolution of the position at jump times of a continuous-time walk:
    /// each jump in direction `j` maps the block by `X ↦ Aⱼ (∫₀^∞ e^{Gs} X e^{G*s} ds) Aⱼ*`.
    pub fn jump_chain(coin: &CoinCT, rho0: &DensityOperator, max_jumps: usize, budget: &LatticeBudget) -> Result<Self> {
        let d = coin.dim();
        linalg::common_dim("coin and density", [&coin.hamiltonian, rho0.matrix()])?;
        let g = coin.effective_generator();
        let id = linalg::identity(d);
        let lyapunov = g.kronecker(&id) + id.kronecker(&g.map(|z| z.conj()));
        let solve = lyapunov
            .try_inverse()
            .filter(|_| {
                linalg::eigenvalues(g)
                    .iter()
                    .all(|l| l.re < -1e-12)
            })
            .ok_or_else(|| OqwError::CoinDefect("waiting times are not almost surely finite".into()))?;
        let moves = coin
            .jumps
            .iter()
            .zip(DIRECTIONS_2D)
            .map(|(a, shift)| {
                let channel = -(a.kronecker(&a.map(|z| z.conj())) * &solve);
                Move {
                    map: SiteMap::Channel(row_major(&channel)),
                    shift,
                }
            })
            .collect();
        Self::with_moves(2, d, moves, rho0, max_jumps, budget)
    }

    fn with_moves(
        lattice_dim: usize,
        d: usize,
        moves: Vec<Move>,
        rho0: &DensityOperator,
        max_steps: usize,
        budget: &LatticeBudget,
    ) -> Result<Self> {
        budget.check(lattice_dim, max_steps)?;
        let mut current = LatticeState::new(lattice_dim, d, max_steps);
        let o = current.offset([0, 0]).expect("origin is stored");
        current.data[o..o + d * d].copy_from_slice(rho0.matrix().transpose().as_slice());
        let next = current.clone();
        Ok(Self {
            moves,
            current,
            next,
            max_steps,
        })
    }

    pub fn state(&self) -> &LatticeState {
        &self.current
    }

    pub fn into_state(self) -> LatticeState {
        self.current
    }

    /// Advances one step; sites farther than the new step count are left untouched.
    pub fn step(&mut self, execution: Execution) -> Result<()> {
        let n = self.current.steps;
        if n >= self.max_steps {
            return Err(OqwError::BudgetExceeded {
                requested: n + 1,
                limit: self.max_steps,
            });
        }
        let d = self.current.d;
        let radius = self.current.radius as i64;
        let width = self.current.width();
        let lattice_dim = self.current.lattice_dim;
        let row_len = width * d * d;
        let src = &self.current;
        let moves = &self.moves;
        let reach = n as i64 + 1;

        let fill_row = |row: usize, out: &mut [C64]| {
            let y = if lattice_dim == 1 { 0 } else { row as i64 - radius };
            let span = reach - y.abs();
            if span < 0 {
                return;
            }
            let mut tmp = vec![C64::default(); d * d];
            for x in -span..=span {
                let o = ((x + radius) as usize) * d * d;
                let block = &mut out[o..o + d * d];
                block.fill(C64::default());
                for mv in moves {
                    let from = [x - mv.shift[0], y - mv.shift[1]];
                    if from[0].abs() + from[1].abs() > n as i64 {
                        continue;
                    }
                    if let Some(so) = src.offset(from) {
                        let x = &src.data[so..so + d * d];
                        match &mv.map {
                            SiteMap::Kraus(k) => conjugate_acc(k, x, block, &mut tmp, d),
                            SiteMap::Channel(m) => matvec_acc(m, x, block),
                        }
                    }
                }
            }
        };

        let rows = &mut self.next.data;
        match execution {
            #[cfg(feature = "parallel")]
            Execution::Parallel if lattice_dim == 2 => {
                use rayon::prelude::*;
                rows.par_chunks_mut(row_len)
                    .enumerate()
                    .for_each(|(row, out)| fill_row(row, out));
            }
            _ => rows
                .chunks_mut(row_len)
                .enumerate()
                .for_each(|(row, out)| fill_row(row, out)),
        }
        self.next.steps = n + 1;
        std::mem::swap(&mut self.current, &mut self.next);
        Ok(())
    }
}

/// Exact `n`-step site distribution from the origin with internal state `ρ₀`.
pub fn exact_distribution(
    coin: &Coin,
    rho0: &DensityOperator,
    n: usize,
    budget: &LatticeBudget,
    execution: Execution,
) -> Result<LatticeState> {
    let mut evo = LatticeEvolution::new(coin, rho0, n, budget)?;
    for _ in 0..n {
        evo.step(execution)?;
    }
    Ok(evo.into_state())
}

/// Exact site distribution of a continuous-time walk after its `n`-th jump.
pub fn exact_jump_distribution(
    coin: &CoinCT,
    rho0: &DensityOperator,
    n: usize,
    budget: &LatticeBudget,
    execution: Execution,
) -> Result<LatticeState> {
    let mut evo = LatticeEvolution::jump_chain(coin, rho0, n, budget)?;
    for _ in 0..n {
        evo.step(execution)?;
    }
    Ok(evo.into_state())
}

/// Partial sums `S(k) = Σ_{n≤k} p₀₀(n)` of the return mass, `k = 0..=n_max`.
pub fn return_mass_partial_sum(
    coin: &Coin,
    rho0: &DensityOperator,
    n_max: usize,
    budget: &LatticeBudget,
    execution: Execution,
) -> Result<Vec<f64>> {
    let mut evo = LatticeEvolution::new(coin, rho0, n_max, budget)?;
    let mut sums = Vec::with_capacity(n_max + 1);
    let mut s = evo.state().mass([0, 0]);
    sums.push(s);
    for _ in 0..n_max {
        evo.step(execution)?;
        s += evo.state().mass([0, 0]);
        sums.push(s);
    }
    Ok(sums)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::{Coin1D, Coin2D};
    use crate::linalg::r;
    use crate::registry;

    fn symmetric_1d(d: usize) -> Coin {
        let h = linalg::identity(d) * r(std::f64::consts::FRAC_1_SQRT_2);
        Coin1D::non_lazy(h.clone(), h).unwrap().into()
    }

    #[test]
    fn zero_steps_keeps_initial_block() {
        let rho = DensityOperator::maximally_mixed(2);
        let st = exact_distribution(&symmetric_1d(2), &rho, 0, &LatticeBudget::default(), Execution::Sequential)
            .unwrap();
        assert!((st.block([0, 0]) - rho.matrix()).norm() < 1e-15);
        assert!((st.total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn one_symmetric_step() {
        let rho = DensityOperator::maximally_mixed(2);
        let st = exact_distribution(&symmetric_1d(2), &rho, 1, &LatticeBudget::default(), Execution::Sequential)
            .unwrap();
        assert!((st.mass([-1, 0]) - 0.5).abs() < 1e-15);
        assert!((st.mass([1, 0]) - 0.5).abs() < 1e-15);
        assert!(st.mass([0, 0]).abs() < 1e-15);
    }

    #[test]
    fn two_steps_match_word_sum() {
        let coin = registry::ex5_4_coin();
        let sigma = DensityOperator::new(
            (linalg::basis_projector(4, 1) + linalg::basis_projector(4, 2)) / r(2.0),
            &Default::default(),
        )
        .unwrap();
        let st = exact_distribution(&coin.clone().into(), &sigma, 2, &LatticeBudget::default(), Execution::Sequential)
            .unwrap();
        let mut brute = 0.0;
        for (a, b) in [(&coin.left, &coin.right), (&coin.right, &coin.left)] {
            let k = b * a;
            brute += linalg::trace_re(&linalg::conjugate(&k, sigma.matrix()));
        }
        assert!((st.mass([0, 0]) - brute).abs() < 1e-12);
    }

    #[test]
    fn classical_symmetric_walk_partial_sums() {
        let coin: Coin = Coin1D::non_lazy(linalg::identity(1) * r(0.5f64.sqrt()), linalg::identity(1) * r(0.5f64.sqrt()))
            .unwrap()
            .into();
        let sums = return_mass_partial_sum(
            &coin,
            &DensityOperator::maximally_mixed(1),
            100,
            &LatticeBudget::default(),
            Execution::Sequential,
        )
        .unwrap();
        let mut term = 1.0;
        let mut classical = 1.0;
        for k in 1..=50 {
            term *= (2 * k - 1) as f64 / (2 * k) as f64;
            classical += term;
        }
        assert!((sums[100] - classical).abs() < 1e-12);
        assert_eq!(sums[0], 1.0);
        assert!(sums.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn mass_is_conserved_in_two_dimensions() {
        let coin: Coin = registry::ex7_2_coin().into();
        let st = exact_distribution(
            &coin,
            &DensityOperator::maximally_mixed(3),
            30,
            &LatticeBudget::default(),
            Execution::default(),
        )
        .unwrap();
        assert!((st.total_mass() - 1.0).abs() < 1e-9);
        let listed: f64 = st.distribution().iter().map(|(_, p)| p).sum();
        assert!((listed - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let coin: Coin = registry::ex7_2_coin().into();
        let rho = DensityOperator::maximally_mixed(3);
        let b = LatticeBudget::default();
        let a = exact_distribution(&coin, &rho, 12, &b, Execution::Sequential).unwrap();
        let p = exact_distribution(&coin, &rho, 12, &b, Execution::Parallel).unwrap();
        assert_eq!(a, p);
    }

    #[test]
    fn budget_is_enforced() {
        let half = linalg::identity(1) * r(0.5);
        let coin: Coin = Coin2D::new([half.clone(), half.clone(), half.clone(), half]).unwrap().into();
        let err = exact_distribution(
            &coin,
            &DensityOperator::maximally_mixed(1),
            601,
            &LatticeBudget::default(),
            Execution::Sequential,
        )
        .unwrap_err();
        assert_eq!(err, OqwError::BudgetExceeded { requested: 601, limit: 600 });
        assert!(matches!(
            return_mass_partial_sum(&symmetric_1d(1), &DensityOperator::maximally_mixed(1), 20_001, &LatticeBudget::default(), Execution::Sequential),
            Err(OqwError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn jump_chain_of_a_lift_is_the_discrete_walk() {
        let discrete = registry::ex7_2_coin();
        let lift = crate::classify::jump_chain_lift(&discrete, &Default::default()).unwrap();
        let rho = DensityOperator::basis_state(3, 0);
        let b = LatticeBudget::default();
        let a = exact_distribution(&discrete.into(), &rho, 15, &b, Execution::Sequential).unwrap();
        let j = exact_jump_distribution(&lift, &rho, 15, &b, Execution::Sequential).unwrap();
        for (site, p) in a.distribution() {
            assert!((p - j.mass(site)).abs() < 1e-12, "{site:?}");
        }
    }

    #[test]
    fn jump_chain_conserves_mass() {
        for coin in [registry::ex7_1_coin(C64::default()), registry::ex7_3_coin(true)] {
            let st = exact_jump_distribution(
                &coin,
                &DensityOperator::maximally_mixed(coin.dim()),
                20,
                &LatticeBudget::default(),
                Execution::default(),
            )
            .unwrap();
            assert!((st.total_mass() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn transient_tail_converges() {
        let sums = return_mass_partial_sum(
            &registry::ex5_5_coin().into(),
            &DensityOperator::maximally_mixed(3),
            2000,
            &LatticeBudget::default(),
            Execution::Sequential,
        )
        .unwrap();
        assert!(sums[2000] - sums[1000] < 0.01);
    }
}
