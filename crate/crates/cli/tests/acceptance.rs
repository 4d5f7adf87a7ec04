//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with a
//! non-zero status if any criterion fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use seco_core::ndarray::Array2;
use seco_core::validation::{default_bounds_grid, default_coherence_grids, thin};
use seco_core::{
    ari, axiom_suite, bounds_experiment, caice, coherence_levelsets, ext_coeff_eks,
    ext_coeff_madogram, parse_grid, rank_matrix, sample_ai_blocks, sample_nested_logistic,
    seco_matrix, seco_nested_logistic, seco_pair, seco_partition, select_tau, Dataset, Family,
    GroupLayout, NestedModelSpec, Partition, PartitionMeta, SecoMatrix, DEFAULT_SEED,
    DEFAULT_TAU_GRID,
};
use support::{fixtures, oracle};

type Criterion = fn() -> Outcome;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

/// Nested logistic SECO at (0.95; 0.4, 0.6), evaluated to 50 digits.
#[allow(clippy::excessive_precision)]
const NESTED_LOGISTIC_SECO: f64 = 0.096_232_745_868_884_596_955_723_84;

fn closed_form_recovery() -> Outcome {
    let closed = seco_nested_logistic(0.95, 0.4, 0.6).unwrap();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let start = Instant::now();
    let estimate = pool.install(|| {
        let spec = NestedModelSpec::logistic(0.95, vec![0.4, 0.6], vec![2, 2]).unwrap();
        let data = sample_nested_logistic(20_000, &spec, DEFAULT_SEED).unwrap();
        seco_pair(&rank_matrix(&data), data.layout(), 0, 1, 200).unwrap()
    });
    let elapsed = start.elapsed();
    let error = (estimate - NESTED_LOGISTIC_SECO).abs();
    outcome(
        error <= 0.1 && (closed - NESTED_LOGISTIC_SECO).abs() < 1e-15 && elapsed.as_secs_f64() <= 10.0,
        format!(
            "estimate {estimate:.4} vs {NESTED_LOGISTIC_SECO:.6} (error {error:.4}), closed form off by {:.1e}, {} on 1 thread",
            (closed - NESTED_LOGISTIC_SECO).abs(),
            secs(elapsed)
        ),
    )
}

fn random_layout(q: usize, rng: &mut ChaCha8Rng) -> GroupLayout {
    let mut columns: Vec<usize> = (0..q).collect();
    columns.shuffle(rng);
    let d = rng.random_range(1..=q);
    let mut groups = vec![Vec::new(); d];
    for (i, c) in columns.into_iter().enumerate() {
        // the first d columns seed one group each
        let g = if i < d { i } else { rng.random_range(0..d) };
        groups[g].push(c);
    }
    GroupLayout::new(groups, q).unwrap()
}

/// Uniforms from a random logistic model, plain uniforms, or heavily tied integers.
fn random_values(n: usize, q: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    match rng.random_range(0..3) {
        0 => {
            let alpha = rng.random_range(0.05..=1.0);
            let spec = NestedModelSpec::logistic(alpha, vec![alpha], vec![q]).unwrap();
            sample_nested_logistic(n, &spec, rng.random())
                .unwrap()
                .into_parts()
                .0
        }
        1 => Array2::from_shape_simple_fn((n, q), || rng.random::<f64>()),
        _ => {
            let levels = rng.random_range(2..20);
            Array2::from_shape_simple_fn((n, q), || rng.random_range(0..levels) as f64)
        }
    }
}

fn bound_violations(seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(10..=500);
    let q = rng.random_range(2..=20);
    let k = rng.random_range(1..=n);
    let m = rng.random_range(1..=n / 2);
    let layout = random_layout(q, &mut rng);
    let data = Dataset::new(random_values(n, q, &mut rng), layout.clone()).unwrap();
    let r = rank_matrix(&data);
    let mut violations = 0;
    let all: Vec<usize> = (0..q).collect();
    let mut thetas = Vec::new();
    for cols in layout.groups().iter().chain([&all]) {
        let t = ext_coeff_eks(&r, cols, k).unwrap();
        violations += usize::from(!(1.0..=n as f64 / k as f64).contains(&t));
        thetas.push(t);
        let mad = ext_coeff_madogram(&data, cols, m).unwrap();
        let bound = mad.blocks() as f64 / (mad.blocks() as f64 + 1.0) - 0.5;
        violations += usize::from(!mad.within_bound() || mad.value() > bound + 1e-15);
        violations += usize::from(mad.ext_coeff() > n as f64 / m as f64);
    }
    let d = layout.d();
    for a in 0..d {
        for b in 0..d {
            if a != b {
                let s = seco_pair(&r, &layout, a, b, k).unwrap();
                violations += usize::from(!(s >= 0.0 && s <= thetas[a].min(thetas[b])));
            }
        }
    }
    let labels: Vec<usize> = (0..d).map(|_| rng.random_range(0..d)).collect();
    for p in [
        Partition::singletons(d, PartitionMeta::default()),
        Partition::from_labels(&labels, PartitionMeta::default()).unwrap(),
    ] {
        violations += usize::from(seco_partition(&r, &layout, &p, k).unwrap() < 0.0);
    }
    violations
}

fn deterministic_bounds() -> Outcome {
    let datasets = 1200;
    let violations: usize = (0..datasets as u64)
        .into_par_iter()
        .map(|s| bound_violations(1000 + s))
        .sum();
    outcome(
        violations == 0,
        format!("{violations} violations over {datasets} random datasets"),
    )
}

fn saturation() -> Outcome {
    let start = Instant::now();
    let table = bounds_experiment(&default_bounds_grid(), 1.25, 50, 50, DEFAULT_SEED).unwrap();
    let elapsed = start.elapsed();
    let misses: Vec<usize> = table
        .rows
        .iter()
        .filter(|r| r.theta_eks != r.n as f64 / 50.0 || r.theta_mad != r.n as f64 / 50.0)
        .map(|r| r.n)
        .collect();
    outcome(
        misses.is_empty() && table.rows.len() == 19 && elapsed.as_secs_f64() <= 60.0,
        format!(
            "{} sample sizes, not saturated at {misses:?}, {}",
            table.rows.len(),
            secs(elapsed)
        ),
    )
}

fn planted_recovery() -> Outcome {
    let block = NestedModelSpec::logistic(0.7, vec![0.3; 4], vec![2; 4]).unwrap();
    let blocks = vec![block; 5];
    let grid = parse_grid(DEFAULT_TAU_GRID).unwrap();
    let results: Vec<(bool, f64)> = (0..100u64)
        .into_par_iter()
        .map(|rep| {
            let (data, truth) = sample_ai_blocks(5000, &blocks, DEFAULT_SEED + rep).unwrap();
            let r = rank_matrix(&data);
            let m = seco_matrix(&r, data.layout(), 70).unwrap();
            let curve = select_tau(&r, data.layout(), m.entries(), &grid, 30).unwrap();
            let p = caice(m.entries(), curve.best_tau).unwrap();
            (ari(&p, &truth).unwrap() == 1.0, curve.best_tau)
        })
        .collect();
    let recovered = results.iter().filter(|r| r.0).count();
    let taus: Vec<f64> = results.iter().map(|r| r.1).collect();
    let (lo, hi) = taus
        .iter()
        .fold((f64::MAX, f64::MIN), |(l, h), &t| (l.min(t), h.max(t)));
    outcome(
        recovered >= 95,
        format!("ARI = 1 in {recovered}/100 replicates, selected tau in [{lo}, {hi}]"),
    )
}

fn same_bits(a: &SecoMatrix, b: &SecoMatrix) -> bool {
    a.entries()
        .iter()
        .zip(b.entries())
        .all(|(x, y)| x.to_bits() == y.to_bits())
        && a.thetas()
            .iter()
            .zip(b.thetas())
            .all(|(x, y)| x.to_bits() == y.to_bits())
}

fn invariance_failures(seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(20..=300);
    let q = rng.random_range(2..=12);
    let k = rng.random_range(1..=n);
    let layout = random_layout(q, &mut rng);
    let d = layout.d();
    let values = random_values(n, q, &mut rng);
    let data = Dataset::new(values.clone(), layout.clone()).unwrap();
    let r = rank_matrix(&data);
    let base = seco_matrix(&r, &layout, k).unwrap();
    let singletons = Partition::singletons(d, PartitionMeta::default());
    let base_total = seco_partition(&r, &layout, &singletons, k).unwrap();
    let mut failures = 0;

    // a random strictly increasing transform per column
    let slope = rng.random_range(0.1..10.0);
    let shift = rng.random_range(-5.0..5.0);
    let kinds: Vec<usize> = (0..q).map(|_| rng.random_range(0..3)).collect();
    let moved = Array2::from_shape_fn((n, q), |(i, c)| {
        let x = values[[i, c]];
        match kinds[c] {
            0 => slope * x + shift,
            1 => x.exp(),
            _ => x * x * x,
        }
    });
    let moved = Dataset::new(moved, layout.clone()).unwrap();
    let rm = rank_matrix(&moved);
    failures += usize::from(!same_bits(&seco_matrix(&rm, &layout, k).unwrap(), &base));
    failures += usize::from(
        seco_partition(&rm, &layout, &singletons, k)
            .unwrap()
            .to_bits()
            != base_total.to_bits(),
    );

    // group order
    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(&mut rng);
    let permuted =
        GroupLayout::new(perm.iter().map(|&g| layout.group(g).to_vec()).collect(), q).unwrap();
    let pm = seco_matrix(&r, &permuted, k).unwrap();
    let relabeled = (0..d).all(|a| {
        pm.thetas()[a].to_bits() == base.thetas()[perm[a]].to_bits()
            && (0..d).all(|b| pm.get(a, b).to_bits() == base.get(perm[a], perm[b]).to_bits())
    });
    failures += usize::from(!relabeled);
    failures += usize::from(
        seco_partition(&r, &permuted, &singletons, k)
            .unwrap()
            .to_bits()
            != base_total.to_bits(),
    );

    // physical column order of the data, with the layout following the columns
    let mut cols: Vec<usize> = (0..q).collect();
    cols.shuffle(&mut rng);
    let mut position = vec![0; q];
    for (new, &old) in cols.iter().enumerate() {
        position[old] = new;
    }
    let shuffled_values = Array2::from_shape_fn((n, q), |(i, c)| values[[i, cols[c]]]);
    let shuffled_layout = GroupLayout::new(
        layout
            .groups()
            .iter()
            .map(|g| {
                let mut g: Vec<usize> = g.iter().map(|&c| position[c]).collect();
                g.shuffle(&mut rng);
                g
            })
            .collect(),
        q,
    )
    .unwrap();
    let shuffled = Dataset::new(shuffled_values, shuffled_layout.clone()).unwrap();
    let rs = rank_matrix(&shuffled);
    failures += usize::from(!same_bits(
        &seco_matrix(&rs, &shuffled_layout, k).unwrap(),
        &base,
    ));

    failures += usize::from(!axiom_suite(&r, &layout, k, seed).unwrap().all_passed());
    failures
}

fn exact_invariances() -> Outcome {
    let failures: usize = (0..100u64)
        .into_par_iter()
        .map(|s| invariance_failures(5000 + s))
        .sum();
    outcome(
        failures == 0,
        format!("{failures} failures over 100 datasets"),
    )
}

fn coherence() -> Outcome {
    let (mothers, children) = default_coherence_grids(Family::Logistic);
    let logistic = coherence_levelsets(Family::Logistic, &mothers, &children).unwrap();
    let (mothers_hr, children_hr) = default_coherence_grids(Family::HuslerReiss);
    let thinned = thin(&children_hr, 10);
    let hr = coherence_levelsets(Family::HuslerReiss, &mothers_hr, &thinned).unwrap();
    let evaluations =
        mothers.len() * children.len().pow(2) + mothers_hr.len() * thinned.len().pow(2);
    outcome(
        logistic.all_passed() && hr.all_passed() && children.len() == 90 && thinned.len() == 60,
        format!(
            "{evaluations} evaluations; logistic: {}; Hüsler-Reiss: {}",
            logistic.checks[0].detail, hr.checks[0].detail
        ),
    )
}

fn ari_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = 0;
    let mut undefined = 0;
    for _ in 0..200 {
        let d = rng.random_range(2..=10);
        let l1: Vec<usize> = (0..d).map(|_| rng.random_range(0..d)).collect();
        let l2: Vec<usize> = (0..d).map(|_| rng.random_range(0..d)).collect();
        let p1 = Partition::from_labels(&l1, PartitionMeta::default()).unwrap();
        let p2 = Partition::from_labels(&l2, PartitionMeta::default()).unwrap();
        let brute = oracle::ari_pairs(&l1, &l2);
        match ari(&p1, &p2) {
            Ok(v) => mismatches += usize::from((v - brute).abs() > 1e-12),
            Err(_) => {
                undefined += 1;
                mismatches += usize::from(brute.is_finite());
            }
        }
        if let Ok(v) = ari(&p1, &p1) {
            mismatches += usize::from(v != 1.0);
        }
    }
    let a = Partition::new(vec![vec![0, 1], vec![2, 3]], 4, PartitionMeta::default()).unwrap();
    let b = Partition::new(vec![vec![0, 2], vec![1, 3]], 4, PartitionMeta::default()).unwrap();
    let example = ari(&a, &b).unwrap();
    outcome(
        mismatches == 0 && example == -0.5,
        format!("{mismatches} mismatches over 200 pairs ({undefined} undefined), hand example {example}"),
    )
}

fn brute_force_oracle() -> Outcome {
    let mut fixtures_checked = 0;
    let mut comparisons = 0;
    let mut first_error = None;
    let mut all = Vec::new();
    for (n, q) in [(2, 1), (2, 2), (3, 2), (4, 2), (2, 3), (3, 3), (2, 4)] {
        all.extend(fixtures::all_rank_datasets(n, q));
    }
    all.extend(fixtures::random_small_datasets(2000, 99));
    for rows in &all {
        fixtures_checked += 1;
        match fixtures::compare_all(rows) {
            Ok(c) => comparisons += c,
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    outcome(
        first_error.is_none(),
        match first_error {
            None => format!("{fixtures_checked} fixtures, {comparisons} exact comparisons"),
            Some(e) => e,
        },
    )
}

fn run_seco(dir: &Path, threads: usize, out: &str) -> Duration {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_seco"))
        .current_dir(dir)
        .args([
            "seco",
            "--data",
            "data.csv",
            "--layout",
            "layout.json",
            "--k",
            "100",
            "--out",
            out,
        ])
        .args(["--threads", &threads.to_string()])
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    start.elapsed()
}

fn write_fixture(dir: &Path, groups: usize, n: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let children: Vec<f64> = (0..groups).map(|_| rng.random_range(0.2..0.8)).collect();
    let spec = NestedModelSpec::logistic(0.8, children, vec![2; groups]).unwrap();
    let data = sample_nested_logistic(n, &spec, seed).unwrap();
    data.write_csv(dir.join("data.csv")).unwrap();
    data.layout().write_json(dir.join("layout.json")).unwrap();
}

fn parallel_determinism() -> Outcome {
    let small = tempfile::TempDir::new().unwrap();
    write_fixture(small.path(), 200, 2000, DEFAULT_SEED);
    run_seco(small.path(), 1, "t1");
    run_seco(small.path(), 8, "t8");
    let same = |name: &str| {
        std::fs::read(small.path().join("t1").join(name)).unwrap()
            == std::fs::read(small.path().join("t8").join(name)).unwrap()
    };
    let identical = same("seco.csv") && same("seco.json");

    let large = tempfile::TempDir::new().unwrap();
    write_fixture(large.path(), 1000, 5000, DEFAULT_SEED + 1);
    let elapsed = run_seco(large.path(), 8, "big");
    let rows = std::fs::read_to_string(large.path().join("big/seco.csv"))
        .unwrap()
        .lines()
        .count();
    outcome(
        identical && rows == 1000 && elapsed.as_secs_f64() <= 120.0,
        format!(
            "1 vs 8 threads byte-identical: {identical}; d=1000, n=5000 matrix in {} with 8 workers on {} core(s)",
            secs(elapsed),
            std::thread::available_parallelism().map_or(1, |n| n.get())
        ),
    )
}

fn main() {
    let criteria: [(&str, Criterion); 9] = [
        ("closed-form SECO recovery", closed_form_recovery),
        ("deterministic estimator bounds", deterministic_bounds),
        ("high-dimension saturation", saturation),
        ("planted partition recovery", planted_recovery),
        ("exact invariances", exact_invariances),
        ("coherence level sets", coherence),
        ("ARI oracle equivalence", ari_equivalence),
        ("brute-force estimator oracle", brute_force_oracle),
        ("determinism and parallel equivalence", parallel_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let status = if result.passed { "PASS" } else { "FAIL" };
        failed += usize::from(!result.passed);
        println!(
            "criterion {} {status} {name}: {} [{}]",
            i + 1,
            result.detail,
            secs(start.elapsed())
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
