//! Test-only oracles, written without reference to the library's own
//! algorithms.
#![allow(dead_code)]

use std::path::PathBuf;

use gurevich_lab::cli::{parse_config, ExperimentConfig};
use gurevich_lab::{Element, Group, GroupKind, Sft, SkewSystem};
use num_bigint::BigUint;
use rand::Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
enum G {
    Vec(Vec<i64>),
    Free(Vec<i32>),
    Heis([i64; 3]),
    Fin(usize),
}

fn lift(e: &Element) -> G {
    match e {
        Element::Lattice(v) => G::Vec(v.to_vec()),
        Element::Free(w) => G::Free(w.to_vec()),
        Element::Heisenberg(h) => G::Heis(*h),
        Element::Finite(i) => G::Fin(*i),
    }
}

fn mul(group: &Group, a: &G, b: &G) -> G {
    match (a, b) {
        (G::Vec(x), G::Vec(y)) => G::Vec(x.iter().zip(y).map(|(p, q)| p + q).collect()),
        (G::Free(x), G::Free(y)) => {
            let mut w = x.clone();
            for &l in y {
                if w.last() == Some(&-l) {
                    w.pop();
                } else {
                    w.push(l);
                }
            }
            G::Free(w)
        }
        (G::Heis([a1, b1, c1]), G::Heis([a2, b2, c2])) => G::Heis([a1 + a2, b1 + b2, c1 + c2 + a1 * b2]),
        (G::Fin(x), G::Fin(y)) => match group.kind() {
            GroupKind::Finite { table, .. } => G::Fin(table[*x][*y]),
            _ => unreachable!(),
        },
        _ => panic!("mixed kinds"),
    }
}

fn is_identity(group: &Group, g: &G) -> bool {
    match g {
        G::Vec(v) => v.iter().all(|&x| x == 0),
        G::Free(w) => w.is_empty(),
        G::Heis(h) => *h == [0, 0, 0],
        G::Fin(i) => match group.kind() {
            GroupKind::Finite { identity, .. } => i == identity,
            _ => unreachable!(),
        },
    }
}

/// Based loops of length `n` with trivial holonomy, by exhaustive search
/// over all `k^n` words.
pub fn brute_count(skew: &SkewSystem, n: usize) -> u64 {
    let sft = skew.base();
    let k = sft.alphabet_size();
    let m = sft.matrix();
    let group = skew.group();
    let mut word = vec![0usize; n];
    let mut total = 0;
    loop {
        let ok = (0..n).all(|t| m[word[t]][word[(t + 1) % n]] == 1);
        if ok {
            let mut h = lift(skew.label(word[0], word[1 % n]));
            for t in 1..n {
                h = mul(group, &h, &lift(skew.label(word[t], word[(t + 1) % n])));
            }
            if is_identity(group, &h) {
                total += 1;
            }
        }
        let mut pos = 0;
        loop {
            if pos == n {
                return total;
            }
            word[pos] += 1;
            if word[pos] < k {
                break;
            }
            word[pos] = 0;
            pos += 1;
        }
    }
}

/// Closed walks of length `n` at the root of the `degree`-regular tree.
pub fn tree_closed_walks(degree: usize, n: usize) -> BigUint {
    let mut at = vec![BigUint::from(1u8)];
    for _ in 0..n {
        let mut next = vec![BigUint::default(); at.len() + 1];
        for (d, c) in at.iter().enumerate() {
            if c == &BigUint::default() {
                continue;
            }
            if d == 0 {
                next[1] += c * BigUint::from(degree);
            } else {
                next[d - 1] += c;
                next[d + 1] += c * BigUint::from(degree - 1);
            }
        }
        at = next;
    }
    at[0].clone()
}

/// `ln` of the spectral radius of a nonnegative primitive matrix, by
/// repeated normalized squaring: `ln ||A^(2^j)|| / 2^j`.
pub fn log_spectral_radius(a: &[Vec<f64>]) -> f64 {
    let k = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut log_scale = 0.0;
    let mut power = 1.0;
    for _ in 0..60 {
        let norm: f64 = m.iter().flatten().sum();
        log_scale += norm.ln() / power;
        for row in m.iter_mut() {
            for x in row.iter_mut() {
                *x /= norm;
            }
        }
        let mut sq = vec![vec![0.0; k]; k];
        for i in 0..k {
            for l in 0..k {
                if m[i][l] == 0.0 {
                    continue;
                }
                for j in 0..k {
                    sq[i][j] += m[i][l] * m[l][j];
                }
            }
        }
        m = sq;
        power *= 2.0;
    }
    log_scale
}

pub fn weighted_matrix(sft: &Sft, f: impl Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
    let m = sft.matrix();
    (0..m.len())
        .map(|i| {
            (0..m.len())
                .map(|j| if m[i][j] == 1 { f(i, j).exp() } else { 0.0 })
                .collect()
        })
        .collect()
}

/// A random irreducible aperiodic 0/1 matrix.
pub fn random_mixing(rng: &mut impl Rng, max_k: usize) -> Sft {
    loop {
        let k = rng.gen_range(2..=max_k);
        let m: Vec<Vec<u8>> = (0..k)
            .map(|_| (0..k).map(|_| u8::from(rng.gen_bool(0.5))).collect())
            .collect();
        if let Ok(sft) = Sft::new(k, &m) {
            if sft.require_mixing().is_ok() {
                return sft;
            }
        }
    }
}

pub fn examples_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples")
}

pub fn load(name: &str) -> ExperimentConfig {
    let path = examples_dir().join(format!("{name}.cfg"));
    parse_config(&std::fs::read_to_string(&path).expect("shipped config")).expect("valid config")
}

pub fn shipped() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(examples_dir())
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension()? == "cfg").then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    names
}

/// Total variation between the average edge distribution of trivial
/// loops of length `n` in the `(+1, +1, -1)` extension of the full
/// 3-shift and the Bernoulli(1/4, 1/4, 1/2) edge measure.
pub fn z_example_tv(n: usize) -> f64 {
    let psi = [1i64, 1, -1];
    let p = [0.25, 0.25, 0.5];
    let mut hist = [[0u64; 3]; 3];
    let mut loops = 0u64;
    let mut word = vec![0usize; n];
    loop {
        if word.iter().map(|&s| psi[s]).sum::<i64>() == 0 {
            loops += 1;
            for t in 0..n {
                hist[word[t]][word[(t + 1) % n]] += 1;
            }
        }
        let mut pos = 0;
        loop {
            if pos == n {
                let mut tv = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        tv += (hist[i][j] as f64 / (loops * n as u64) as f64 - p[i] * p[j]).abs();
                    }
                }
                return tv / 2.0;
            }
            word[pos] += 1;
            if word[pos] < 3 {
                break;
            }
            word[pos] = 0;
            pos += 1;
        }
    }
}

/// Peak resident set size of this process in MiB, where available.
pub fn peak_rss_mib() -> Option<f64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: f64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb / 1024.0)
}
