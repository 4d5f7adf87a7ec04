//! Small fixtures and a full comparison of every tail estimator against the
//! brute-force oracle.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seco_core::ndarray::Array2;
use seco_core::{
    block_maxima, ext_coeff_eks, ext_coeff_madogram, ext_corr, madogram, rank_matrix, seco_matrix,
    seco_pair, seco_partition, Dataset, GroupLayout, Partition, PartitionMeta,
};

use super::oracle;

fn permutations(n: usize) -> Vec<Vec<f64>> {
    fn go(prefix: &mut Vec<f64>, left: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if left.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..left.len() {
            let v = left.remove(i);
            prefix.push(v);
            go(prefix, left, out);
            prefix.pop();
            left.insert(i, v);
        }
    }
    let mut out = Vec::new();
    go(
        &mut Vec::new(),
        &mut (1..=n).map(|v| v as f64).collect(),
        &mut out,
    );
    out
}

/// Every dataset whose columns are permutations of `1..=n`, as row lists.
pub fn all_rank_datasets(n: usize, q: usize) -> Vec<Vec<Vec<f64>>> {
    let perms = permutations(n);
    let mut out = vec![vec![]];
    for _ in 0..q {
        out = out
            .into_iter()
            .flat_map(|cols: Vec<Vec<f64>>| {
                perms.iter().map(move |p| {
                    let mut c = cols.clone();
                    c.push(p.clone());
                    c
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|cols| {
            (0..n)
                .map(|i| cols.iter().map(|c| c[i]).collect())
                .collect()
        })
        .collect()
}

/// Random datasets with `n ≤ 8`, `q ≤ 4` and values from a small set, so that
/// ties are frequent.
pub fn random_small_datasets(count: usize, seed: u64) -> Vec<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(2..=8);
            let q = rng.random_range(1..=4);
            let levels = rng.random_range(2..=10);
            (0..n)
                .map(|_| {
                    (0..q)
                        .map(|_| rng.random_range(0..levels) as f64 - 3.5)
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Compares ext_coeff_eks, ext_corr, seco_pair, seco_matrix, seco_partition and
/// the madogram against the oracle for every layout, every `k`, every column
/// subset, every partition of the groups and every admissible block length.
/// Returns the number of exact comparisons made.
pub fn compare_all(rows: &[Vec<f64>]) -> Result<usize, String> {
    let n = rows.len();
    let q = rows[0].len();
    let values = Array2::from_shape_fn((n, q), |(i, c)| rows[i][c]);
    let mut checks = 0;
    let mut expect = |what: String, got: f64, want: f64| {
        checks += 1;
        if got.to_bits() == want.to_bits() {
            Ok(())
        } else {
            Err(format!("{what}: got {got}, oracle {want} on {rows:?}"))
        }
    };
    let subsets: Vec<Vec<usize>> = (1..1u32 << q)
        .map(|mask| (0..q).filter(|c| mask >> c & 1 == 1).collect())
        .collect();

    for labels in oracle::set_partitions(q) {
        let groups = oracle::clusters_of(&labels);
        let d = groups.len();
        let layout = GroupLayout::new(groups.clone(), q).map_err(|e| e.to_string())?;
        let data = Dataset::new(values.clone(), layout.clone()).map_err(|e| e.to_string())?;
        let r = rank_matrix(&data);
        for k in 1..=n {
            let kk = k as u128;
            if groups.len() == 1 {
                // layout-free estimators only once per k
                for cols in &subsets {
                    let want = oracle::ratio(oracle::exceedance_count(rows, cols, k), kk);
                    expect(
                        format!("eks {cols:?} k={k}"),
                        ext_coeff_eks(&r, cols, k).unwrap(),
                        want,
                    )?;
                }
                for a in 0..q {
                    for b in 0..q {
                        if a != b {
                            let want = oracle::ratio(oracle::joint_count(rows, a, b, k), kk);
                            expect(
                                format!("chi ({a},{b}) k={k}"),
                                ext_corr(&r, a, b, k).unwrap(),
                                want,
                            )?;
                        }
                    }
                }
            }
            let m = seco_matrix(&r, &layout, k).unwrap();
            for a in 0..d {
                let ca = oracle::exceedance_count(rows, &groups[a], k);
                expect(
                    format!("theta {a} k={k}"),
                    m.thetas()[a],
                    oracle::ratio(ca, kk),
                )?;
                for b in 0..d {
                    if a == b {
                        expect(format!("diag {a}"), m.get(a, a), 1.0)?;
                        continue;
                    }
                    let cb = oracle::exceedance_count(rows, &groups[b], k);
                    let s = oracle::seco_count(rows, &[groups[a].clone(), groups[b].clone()], k);
                    expect(
                        format!("seco_pair ({a},{b}) k={k}"),
                        seco_pair(&r, &layout, a, b, k).unwrap(),
                        oracle::ratio(s, kk),
                    )?;
                    expect(
                        format!("matrix ({a},{b}) k={k}"),
                        m.get(a, b),
                        oracle::ratio(s, ca.min(cb)),
                    )?;
                }
            }
            for plabels in oracle::set_partitions(d) {
                let clusters = oracle::clusters_of(&plabels);
                let sets: Vec<Vec<usize>> = clusters
                    .iter()
                    .map(|c| c.iter().flat_map(|&g| groups[g].clone()).collect())
                    .collect();
                let p = Partition::new(clusters, d, PartitionMeta::default()).unwrap();
                expect(
                    format!("seco_partition {plabels:?} k={k}"),
                    seco_partition(&r, &layout, &p, k).unwrap(),
                    oracle::ratio(oracle::seco_count(rows, &sets, k), kk),
                )?;
            }
        }
    }

    let single = Dataset::new(values, GroupLayout::singletons(q)).map_err(|e| e.to_string())?;
    for m in (1..=n).filter(|m| n / m >= 2) {
        let maxima = oracle::block_maxima(rows, m);
        let rb = rank_matrix(&block_maxima(&single, m).unwrap());
        for cols in &subsets {
            let (num, den) = oracle::madogram(&maxima, cols);
            let mad = ext_coeff_madogram(&single, cols, m).unwrap();
            expect(
                format!("madogram {cols:?} m={m}"),
                mad.value(),
                oracle::ratio(num, den),
            )?;
            expect(
                format!("madogram ranks {cols:?} m={m}"),
                madogram(&rb, cols).unwrap().value(),
                oracle::ratio(num, den),
            )?;
            expect(
                format!("theta_mad {cols:?} m={m}"),
                mad.ext_coeff(),
                oracle::madogram_coefficient(num, den),
            )?;
        }
    }
    Ok(checks)
}
