//! Brute-force reference implementations. Everything here works on raw values
//! and exact integer counts, without sharing code with the library.

#![allow(dead_code)]

pub fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Value of the exact fraction `num/den`, correctly rounded.
pub fn ratio(num: u128, den: u128) -> f64 {
    let g = gcd(num, den).max(1);
    (num / g) as f64 / (den / g) as f64
}

/// Rank of every entry of `col`: entries strictly below, plus equal entries at
/// or before the same row.
pub fn ranks(col: &[f64]) -> Vec<usize> {
    (0..col.len())
        .map(|i| {
            (0..col.len())
                .filter(|&j| col[j] < col[i] || (col[j] == col[i] && j <= i))
                .count()
        })
        .collect()
}

pub fn column(rows: &[Vec<f64>], c: usize) -> Vec<f64> {
    rows.iter().map(|r| r[c]).collect()
}

/// Rows in which at least one of `cols` has rank above `n + 0.5 − k`.
pub fn exceedances(rows: &[Vec<f64>], cols: &[usize], k: usize) -> Vec<bool> {
    let n = rows.len();
    let threshold = n as f64 + 0.5 - k as f64;
    let rank_cols: Vec<Vec<usize>> = cols.iter().map(|&c| ranks(&column(rows, c))).collect();
    (0..n)
        .map(|i| rank_cols.iter().any(|r| r[i] as f64 > threshold))
        .collect()
}

pub fn exceedance_count(rows: &[Vec<f64>], cols: &[usize], k: usize) -> u128 {
    exceedances(rows, cols, k).iter().filter(|&&e| e).count() as u128
}

/// Joint exceedances of two columns.
pub fn joint_count(rows: &[Vec<f64>], a: usize, b: usize, k: usize) -> u128 {
    let ea = exceedances(rows, &[a], k);
    let eb = exceedances(rows, &[b], k);
    ea.iter().zip(&eb).filter(|(x, y)| **x && **y).count() as u128
}

/// Numerator over `k` of the SECO of a collection of column sets.
pub fn seco_count(rows: &[Vec<f64>], sets: &[Vec<usize>], k: usize) -> u128 {
    let all: Vec<usize> = sets.iter().flatten().copied().collect();
    let sum: u128 = sets.iter().map(|s| exceedance_count(rows, s, k)).sum();
    sum - exceedance_count(rows, &all, k)
}

/// Block maxima over consecutive blocks of length `m`, dropping a partial block.
pub fn block_maxima(rows: &[Vec<f64>], m: usize) -> Vec<Vec<f64>> {
    rows.chunks_exact(m)
        .map(|block| {
            (0..block[0].len())
                .map(|c| block.iter().map(|r| r[c]).fold(f64::NEG_INFINITY, f64::max))
                .collect()
        })
        .collect()
}

/// Madogram of `cols` as an exact fraction `(num, den)`, computed on the ranks
/// of `rows` (already block maxima).
pub fn madogram(rows: &[Vec<f64>], cols: &[usize]) -> (u128, u128) {
    let k = rows.len() as u128;
    let p = cols.len() as u128;
    let rank_cols: Vec<Vec<usize>> = cols.iter().map(|&c| ranks(&column(rows, c))).collect();
    let mut num = 0u128;
    for i in 0..rows.len() {
        let max = rank_cols.iter().map(|r| r[i]).max().unwrap() as u128;
        let sum: u128 = rank_cols.iter().map(|r| r[i] as u128).sum();
        num += p * max - sum;
    }
    (num, k * p * (k + 1))
}

/// Extremal coefficient `(1/2 + ν)/(1/2 − ν)` for `ν = num/den`.
pub fn madogram_coefficient(num: u128, den: u128) -> f64 {
    ratio(den + 2 * num, den - 2 * num)
}

/// All set partitions of `0..n` as label vectors (restricted growth strings).
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for l in 0..=next {
            prefix.push(l);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, &mut out);
    out
}

pub fn clusters_of(labels: &[usize]) -> Vec<Vec<usize>> {
    let count = labels.iter().max().map_or(0, |m| m + 1);
    (0..count)
        .map(|l| (0..labels.len()).filter(|&i| labels[i] == l).collect())
        .collect()
}

/// ARI from counting agreements over all unordered pairs of elements.
pub fn ari_pairs(l1: &[usize], l2: &[usize]) -> f64 {
    let (mut a, mut b, mut c, mut d) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..l1.len() {
        for j in i + 1..l1.len() {
            match (l1[i] == l1[j], l2[i] == l2[j]) {
                (true, true) => a += 1.0,
                (true, false) => b += 1.0,
                (false, true) => c += 1.0,
                (false, false) => d += 1.0,
            }
        }
    }
    2.0 * (a * d - b * c) / ((a + b) * (b + d) + (a + c) * (c + d))
}
