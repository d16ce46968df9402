//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use oqw_cli::spec_file::CoinSpecFile;
use oqw_core::classify::{classify_2d_ct, classify_2d_discrete, drift_1d, drift_2d, jump_chain_lift};
use oqw_core::coin::validate_coin;
use oqw_core::linalg::{self, ComplexMatrix, C64};
use oqw_core::registry;
use oqw_core::simulate::{
    exact_distribution, exact_jump_distribution, return_mass_partial_sum, simulate_ct_ensemble,
    simulate_ct_jumps_ensemble, simulate_discrete_ensemble, total_variation, trajectory_rng, Execution,
    LatticeBudget, Trajectory,
};
use oqw_core::spectral::{self, ChannelDecomposition, Superoperator};
use oqw_core::{Coin, Coin1D, Coin2D, CoinCT, DensityOperator, NumericPolicy};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// Every fixture that loads and passes validation, by file stem.
fn valid_fixtures() -> Vec<(String, Coin)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixtures_dir())
        .expect("fixtures directory")
        .map(|e| e.expect("directory entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let policy = NumericPolicy::default();
    paths
        .into_iter()
        .filter_map(|p| {
            let coin = CoinSpecFile::load(&p).ok()?.to_coin().ok()?;
            validate_coin(&coin, &policy)
                .ok
                .then(|| (p.file_stem().unwrap().to_string_lossy().into_owned(), coin))
        })
        .collect()
}

fn oqw(args: &[&str], threads: &str) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_oqw"))
        .args(args)
        .env("OQW_NUM_THREADS", threads)
        .output()
        .expect("oqw runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn block_sum(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (m, n) = (a.nrows(), b.nrows());
    let mut out = linalg::zeros(m + n);
    out.view_mut((0, 0), (m, m)).copy_from(a);
    out.view_mut((m, m), (n, n)).copy_from(b);
    out
}

/// Random coins of one kind with `d ≤ 4`; every third one is a direct sum of two blocks.
fn random_coins(kind: usize, count: usize, seed: u64) -> Vec<Coin> {
    (0..count)
        .map(|k| {
            let mut rng: ChaCha8Rng = trajectory_rng(seed, k as u64);
            let d = 1 + k % 4;
            let split = k % 3 == 0 && d >= 2;
            let (d1, d2) = if split { (d / 2, d - d / 2) } else { (d, 0) };
            let lazy = k % 2 == 0;
            let one = |rng: &mut ChaCha8Rng, d: usize| -> Coin {
                match kind {
                    0 => registry::random_coin_1d(rng, d, lazy).into(),
                    1 => registry::random_coin_2d(rng, d).into(),
                    _ => registry::random_coin_ct(rng, d).into(),
                }
            };
            let a = one(&mut rng, d1);
            if !split {
                return a;
            }
            let b = one(&mut rng, d2);
            match (a, b) {
                (Coin::OneD(a), Coin::OneD(b)) => Coin1D::new(
                    block_sum(&a.left, &b.left),
                    block_sum(&a.stay, &b.stay),
                    block_sum(&a.right, &b.right),
                )
                .unwrap()
                .into(),
                (Coin::TwoD(a), Coin::TwoD(b)) => {
                    Coin2D::new(std::array::from_fn(|j| block_sum(&a.ops[j], &b.ops[j]))).unwrap().into()
                }
                (Coin::Continuous(a), Coin::Continuous(b)) => CoinCT::new(
                    std::array::from_fn(|j| block_sum(&a.jumps[j], &b.jumps[j])),
                    block_sum(&a.hamiltonian, &b.hamiltonian),
                )
                .unwrap()
                .into(),
                _ => unreachable!(),
            }
        })
        .collect()
}

fn all_test_coins() -> Vec<(String, Coin)> {
    let mut coins = valid_fixtures();
    for (kind, name) in ["oqw1d", "oqw2d", "ctoqw2d"].into_iter().enumerate() {
        for (k, coin) in random_coins(kind, 100, 2024 + kind as u64).into_iter().enumerate() {
            coins.push((format!("random {name} #{k}"), coin));
        }
    }
    coins
}

/// The channel whose fixed points are reported, the decomposition, and the
/// residual map (`Φ − id` in discrete time, `𝕃` in continuous time).
fn analyse(coin: &Coin, policy: &NumericPolicy) -> (Superoperator, ChannelDecomposition, Superoperator, f64) {
    match coin {
        Coin::OneD(c) => {
            let s = spectral::superoperator(&c.kraus()).unwrap();
            (s.clone(), spectral::decompose(&s, policy).unwrap(), s, 1e-10)
        }
        Coin::TwoD(c) => {
            let s = spectral::superoperator(&c.kraus()).unwrap();
            (s.clone(), spectral::decompose(&s, policy).unwrap(), s, 1e-10)
        }
        Coin::Continuous(c) => {
            let l = spectral::lindblad_superoperator(c);
            (l.exp(), spectral::decompose_ct(c, policy).unwrap(), l, 1e-9)
        }
    }
}

fn residual(coin: &Coin, map: &Superoperator, tau: &ComplexMatrix) -> f64 {
    match coin {
        Coin::Continuous(_) => map.apply(tau).norm(),
        _ => (map.apply(tau) - tau).norm(),
    }
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let (code, stdout) = oqw(&["reproduce", "all"], "1");
    let elapsed = start.elapsed();
    let summary = stdout.lines().last().unwrap_or("").to_string();
    ensure(
        code == 0 && summary == "10/10 PASS" && elapsed < Duration::from_secs(10),
        format!("{summary}, exit {code}, {:.2} s", elapsed.as_secs_f64()),
    )
}

fn criterion_2() -> Check {
    let policy = NumericPolicy::default();
    let coins = all_test_coins();
    let mut worst = (0.0f64, String::new());
    let mut failures = Vec::new();
    for (name, coin) in &coins {
        let (channel, dec, map, tol) = analyse(coin, &policy);
        let mut states: Vec<ComplexMatrix> = dec.enclosures.iter().map(|e| e.invariant_state.matrix().clone()).collect();
        states.push(spectral::invariant_state_maximal(&channel, &policy).unwrap().matrix().clone());
        for tau in &states {
            let res = residual(coin, &map, tau);
            if res > worst.0 {
                worst = (res, name.clone());
            }
            if res > tol {
                failures.push(format!("{name}: {res:.2e}"));
            }
        }
    }
    ensure(
        failures.is_empty(),
        format!(
            "{} coins, worst residual {:.2e} ({}){}",
            coins.len(),
            worst.0,
            worst.1,
            if failures.is_empty() { String::new() } else { format!("; over tolerance: {}", failures.join(", ")) }
        ),
    )
}

fn criterion_3() -> Check {
    let policy = NumericPolicy::default();
    let coins = all_test_coins();
    let mut worst_sum = 0.0f64;
    let mut worst_leak = 0.0f64;
    let mut enclosures = 0;
    let mut failures = Vec::new();
    for (k, (name, coin)) in coins.iter().enumerate() {
        let (channel, dec, _, _) = analyse(coin, &policy);
        let d = coin.dim();
        let total = dec
            .enclosures
            .iter()
            .fold(dec.transient_projector.clone(), |acc, e| acc + &e.projector);
        let gap = (total - linalg::identity(d)).norm();
        worst_sum = worst_sum.max(gap);
        if gap > 1e-9 {
            failures.push(format!("{name}: partition defect {gap:.2e}"));
        }
        let mut rng: ChaCha8Rng = trajectory_rng(99, k as u64);
        for e in &dec.enclosures {
            enclosures += 1;
            let local = registry::random_density(&mut rng, e.rank());
            let rho = &e.basis * local.matrix() * e.basis.adjoint();
            let mut state = rho;
            for _ in 0..3 {
                state = channel.apply(&state);
                let leak = linalg::weight_outside(&state, &e.projector).abs();
                worst_leak = worst_leak.max(leak);
                if leak > 1e-9 {
                    failures.push(format!("{name}: enclosure {} leaks {leak:.2e}", e.label));
                    break;
                }
            }
        }
    }
    ensure(
        failures.is_empty(),
        format!(
            "{} coins, {enclosures} enclosures, partition defect ≤ {worst_sum:.2e}, leakage ≤ {worst_leak:.2e}{}",
            coins.len(),
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join(", ")) }
        ),
    )
}

fn criterion_4() -> Check {
    let policy = NumericPolicy::default();
    let mut errors = Vec::new();

    let ex7_2 = registry::ex7_2_coin();
    let dec = spectral::decompose(&spectral::superoperator(&ex7_2.kraus()).unwrap(), &policy).unwrap();
    let mut drifts: Vec<[f64; 2]> = dec
        .enclosures
        .iter()
        .map(|e| {
            let v = drift_2d(&ex7_2, &e.invariant_state).unwrap();
            [v.m1, v.m2]
        })
        .collect();
    drifts.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let expected = [[-0.1, -0.5], [0.1, 0.5]];
    let mut worst = 0.0f64;
    if drifts.len() != expected.len() {
        errors.push(format!("ex7_2 has {} enclosures", drifts.len()));
    } else {
        for (m, e) in drifts.iter().zip(expected) {
            worst = worst.max((m[0] - e[0]).abs()).max((m[1] - e[1]).abs());
        }
    }

    let ex5_2 = registry::ex5_2_coin();
    let tau = DensityOperator::new(registry::ex5_2_invariant_state(), &policy).unwrap();
    let s = spectral::superoperator(&ex5_2.kraus()).unwrap();
    let computed = spectral::invariant_state_maximal(&s, &policy).unwrap();
    worst = worst.max((computed.matrix() - tau.matrix()).norm());
    for k in [&ex5_2.left, &ex5_2.right] {
        worst = worst.max((linalg::trace_re(&linalg::conjugate(k, computed.matrix())) - 0.5).abs());
    }

    let ex5_4 = registry::ex5_4_coin();
    let dec = spectral::decompose(&spectral::superoperator(&ex5_4.kraus()).unwrap(), &policy).unwrap();
    let mut traces: Vec<f64> = dec
        .enclosures
        .iter()
        .map(|e| linalg::trace_re(&linalg::conjugate(&ex5_4.left, e.invariant_state.matrix())))
        .collect();
    traces.sort_by(f64::total_cmp);
    traces.dedup_by(|a, b| (*a - *b).abs() < 1e-10);
    if traces.len() != 2 {
        errors.push(format!("ex5_4 enclosure traces {traces:?}"));
    } else {
        worst = worst.max((traces[0] - 0.5).abs()).max((traces[1] - 2.0 / 3.0).abs());
    }
    let m = drift_1d(&ex5_4, &DensityOperator::basis_state(4, 3)).unwrap();
    worst = worst.max((m + 1.0 / 3.0).abs());

    ensure(
        errors.is_empty() && worst <= 1e-10,
        format!("max deviation {worst:.2e}{}", if errors.is_empty() { String::new() } else { format!("; {}", errors.join(", ")) }),
    )
}

fn criterion_5() -> Check {
    let budget = LatticeBudget::default();
    let exec = Execution::default();

    let start = Instant::now();
    let s = return_mass_partial_sum(&registry::ex5_6_coin().into(), &DensityOperator::maximally_mixed(4), 4000, &budget, exec)
        .unwrap();
    let t6 = start.elapsed();
    let ratio = s[4000] / s[1000];

    let start = Instant::now();
    let s = return_mass_partial_sum(&registry::ex5_5_coin().into(), &DensityOperator::maximally_mixed(3), 4000, &budget, exec)
        .unwrap();
    let t5 = start.elapsed();
    let diff = s[4000] - s[1000];

    let limit = Duration::from_secs(60);
    ensure(
        (1.6..=2.4).contains(&ratio) && diff < 0.01 && t6 < limit && t5 < limit,
        format!(
            "recurrent S(4000)/S(1000) = {ratio:.4} ({:.1} s), transient S(4000)-S(1000) = {diff:.3e} ({:.1} s)",
            t6.as_secs_f64(),
            t5.as_secs_f64()
        ),
    )
}

fn criterion_6() -> Check {
    let coin: Coin = registry::ex5_4_coin().into();
    let rho = DensityOperator::basis_state(4, 3);
    let m = drift_1d(&registry::ex5_4_coin(), &rho).unwrap();
    let start = Instant::now();
    let runs = simulate_discrete_ensemble(&coin, &rho, 10_000, 200, 11, Execution::default()).unwrap();
    let elapsed = start.elapsed();
    let speeds: Vec<f64> = runs.iter().map(|t| t.final_position()[0] as f64 / 10_000.0).collect();
    let mean = speeds.iter().sum::<f64>() / speeds.len() as f64;
    let spread = speeds.iter().map(|v| (v - m).abs()).fold(0.0, f64::max);
    ensure(
        (mean - m).abs() <= 0.05 && elapsed < Duration::from_secs(30),
        format!(
            "m = {m:.6}, mean X_n/n = {mean:.5}, largest single-run deviation {spread:.4}, {:.1} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_7() -> Check {
    let coin = registry::ex7_1_coin(C64::default());
    let start = Instant::now();
    let runs = simulate_ct_ensemble(&coin, &DensityOperator::maximally_mixed(coin.dim()), 200.0, 500, 3, Execution::default())
        .unwrap();
    let elapsed = start.elapsed();
    let mean = |axis: usize| runs.iter().map(|t: &Trajectory| t.final_position()[axis] as f64).sum::<f64>() / (200.0 * runs.len() as f64);
    let (m1, m2) = (mean(0), mean(1));
    let ratio = m1 / m2;
    ensure(
        (ratio / 4.0 - 1.0).abs() <= 0.1 && elapsed < Duration::from_secs(60),
        format!("drift ({m1:.4}, {m2:.4}), ratio {ratio:.3}, {:.1} s", elapsed.as_secs_f64()),
    )
}

fn criterion_8() -> Check {
    let policy = NumericPolicy::default();
    let mut coins = vec![("ex7_2".to_string(), registry::ex7_2_coin())];
    for k in 0..25u64 {
        let mut rng: ChaCha8Rng = trajectory_rng(808, k);
        let d = 1 + (k as usize % 3);
        let coin = if k % 5 == 4 && d >= 2 {
            let a = registry::random_coin_2d(&mut rng, 1);
            let b = registry::random_coin_2d(&mut rng, d - 1);
            Coin2D::new(std::array::from_fn(|j| block_sum(&a.ops[j], &b.ops[j]))).unwrap()
        } else {
            registry::random_coin_2d(&mut rng, d)
        };
        coins.push((format!("random #{k}"), coin));
    }
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for (name, coin) in &coins {
        let discrete = classify_2d_discrete(coin, &policy).unwrap();
        let lifted = classify_2d_ct(&jump_chain_lift(coin, &policy).unwrap(), &policy).unwrap();
        let gap = linalg::projector_gap(&discrete.transient_projector, &lifted.transient_projector);
        worst = worst.max(gap);
        if discrete.kind != lifted.kind || gap > 1e-8 {
            failures.push(format!("{name}: {} vs {}, gap {gap:.2e}", discrete.kind, lifted.kind));
        }
    }
    ensure(
        failures.is_empty(),
        format!(
            "{} coins, kinds agree, largest projector gap {worst:.2e}{}",
            coins.len(),
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join(", ")) }
        ),
    )
}

fn criterion_9() -> Check {
    const STEPS: usize = 20;
    const RUNS: usize = 10_000;
    let budget = LatticeBudget::default();
    let exec = Execution::default();
    let mut lines = Vec::new();
    let mut all_ok = true;
    for (name, coin) in valid_fixtures() {
        let rho = DensityOperator::maximally_mixed(coin.dim());
        let (runs, exact) = match &coin {
            Coin::Continuous(ct) => (
                simulate_ct_jumps_ensemble(ct, &rho, STEPS, RUNS, 9, exec).unwrap(),
                exact_jump_distribution(ct, &rho, STEPS, &budget, exec).unwrap(),
            ),
            _ => (
                simulate_discrete_ensemble(&coin, &rho, STEPS, RUNS, 9, exec).unwrap(),
                exact_distribution(&coin, &rho, STEPS, &budget, exec).unwrap(),
            ),
        };
        let mut histogram = BTreeMap::new();
        for t in &runs {
            *histogram.entry(t.final_position()).or_insert(0usize) += 1;
        }
        let tv = total_variation(&histogram, &exact);
        // Mean TV of an exact sampler: ½ Σ E|p̂ − p| ≈ ½ Σ √(2p(1−p)/(πN)).
        let floor: f64 = exact
            .distribution()
            .iter()
            .map(|(_, p)| (2.0 * p * (1.0 - p) / (std::f64::consts::PI * RUNS as f64)).max(0.0).sqrt())
            .sum::<f64>()
            / 2.0;
        let ok = tv <= 0.02;
        all_ok &= ok;
        lines.push(format!("{name} {tv:.4} (floor {floor:.4}){}", if ok { "" } else { " over" }));
    }
    ensure(all_ok, format!("TV at n=20, 10^4 runs: {}", lines.join(", ")))
}

fn criterion_10() -> Check {
    let dir = std::env::temp_dir().join(format!("oqw-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let fx = |name: &str| fixtures_dir().join(format!("{name}.json")).to_string_lossy().into_owned();
    let mut compared = 0;
    let mut mismatches = Vec::new();
    let jobs: Vec<(&str, Vec<String>)> = vec![
        ("classify-1d", vec!["classify".into(), fx("ex5_4"), "--json".into()]),
        ("classify-2d", vec!["classify".into(), fx("ex7_2"), "--json".into()]),
        ("classify-ct", vec!["classify".into(), fx("ex7_3_H2"), "--json".into()]),
        ("mc-1d", vec!["simulate".into(), fx("ex5_4"), "--steps".into(), "200".into(), "--trajectories".into(), "300".into(), "--seed".into(), "7".into()]),
        ("mc-2d", vec!["simulate".into(), fx("ex7_2"), "--steps".into(), "100".into(), "--trajectories".into(), "300".into(), "--seed".into(), "7".into()]),
        ("mc-ct", vec!["simulate".into(), fx("ex7_1_h0"), "--tmax".into(), "20".into(), "--trajectories".into(), "200".into(), "--seed".into(), "7".into()]),
        ("exact-2d", vec!["simulate".into(), fx("ex7_2"), "--exact".into(), "--steps".into(), "60".into()]),
    ];
    for (label, args) in &jobs {
        let mut outputs = Vec::new();
        for (run, threads) in ["1", "1", "2"].iter().enumerate() {
            let csv = dir.join(format!("{label}-{run}.csv"));
            let mut full: Vec<&str> = args.iter().map(String::as_str).collect();
            let csv_arg = csv.to_string_lossy().into_owned();
            if full[0] == "simulate" {
                full.push("--csv");
                full.push(&csv_arg);
            }
            let (code, stdout) = oqw(&full, threads);
            let file = std::fs::read(&csv).unwrap_or_default();
            outputs.push((code, stdout, file));
        }
        compared += 1;
        if outputs.windows(2).any(|w| w[0] != w[1]) || outputs[0].0 != 0 {
            mismatches.push(*label);
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    ensure(
        mismatches.is_empty(),
        format!(
            "{compared} commands x (2 runs at 1 thread, 1 run at 2 threads) byte-identical{}",
            if mismatches.is_empty() { String::new() } else { format!("; differing: {}", mismatches.join(", ")) }
        ),
    )
}

fn main() {
    let criteria: [(u32, fn() -> Check); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, check) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("criterion {id}: PASS  {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id}: FAIL  {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
