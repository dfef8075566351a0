//! Level-by-level dynamic programming over `(vertex, group element, ...)`
//! states. Each level is stored with its keys sorted, so every fold is
//! performed in a fixed order no matter how many threads do the work.

use std::collections::HashMap;
use std::hash::Hash;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::linalg::kahan_sum;

/// Sources per parallel work unit. Fixed, so that partial sums are grouped
/// identically for every thread count.
const CHUNK: usize = 2048;

/// Values carried by the DP: exact counts or floating-point weights.
pub(crate) trait Weight: Clone + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_u64(c: u64) -> Self;
    fn is_zero(&self) -> bool;
    /// `false` on overflow.
    fn add_to(&mut self, other: &Self) -> bool;
    fn times(&self, other: &Self) -> Option<Self>;
    fn sum_all(items: Vec<Self>) -> Option<Self> {
        let mut acc = Self::zero();
        for x in &items {
            if !acc.add_to(x) {
                return None;
            }
        }
        Some(acc)
    }
}

impl Weight for u128 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn from_u64(c: u64) -> Self {
        c as u128
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn add_to(&mut self, other: &Self) -> bool {
        match self.checked_add(*other) {
            Some(v) => {
                *self = v;
                true
            }
            None => false,
        }
    }
    fn times(&self, other: &Self) -> Option<Self> {
        self.checked_mul(*other)
    }
}

impl Weight for BigUint {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_u64(c: u64) -> Self {
        BigUint::from(c)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_to(&mut self, other: &Self) -> bool {
        *self += other;
        true
    }
    fn times(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }
}

impl Weight for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_u64(c: u64) -> Self {
        c as f64
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add_to(&mut self, other: &Self) -> bool {
        *self += other;
        true
    }
    fn times(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }
    fn sum_all(items: Vec<Self>) -> Option<Self> {
        Some(kahan_sum(items))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum DpFail {
    Overflow,
    TooLarge,
}

/// One DP level: sorted keys, each carrying `width` values (one per
/// starting vertex or other seed).
#[derive(Debug, Clone)]
pub(crate) struct Level<K, W> {
    pub keys: Vec<K>,
    pub values: Vec<W>,
    pub width: usize,
}

impl<K: Ord + Clone, W: Weight> Level<K, W> {
    pub fn from_unsorted(keys: Vec<K>, values: Vec<W>, width: usize) -> Self {
        let mut order: Vec<usize> = (0..keys.len()).collect();
        order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
        let mut sorted_keys = Vec::with_capacity(keys.len());
        let mut sorted_values = Vec::with_capacity(values.len());
        for &idx in &order {
            sorted_keys.push(keys[idx].clone());
            sorted_values.extend_from_slice(&values[idx * width..(idx + 1) * width]);
        }
        Level {
            keys: sorted_keys,
            values: sorted_values,
            width,
        }
    }

    pub fn row(&self, idx: usize) -> &[W] {
        &self.values[idx * self.width..(idx + 1) * self.width]
    }

    pub fn find(&self, key: &K) -> Option<usize> {
        self.keys.binary_search(key).ok()
    }
}

/// Pushes every state one step forward. `succ` lists the successor keys
/// of a key together with the multiplicative edge weight.
type Rows<K, W> = (Vec<K>, Vec<W>);

pub(crate) fn advance<K, W, F>(prev: &Level<K, W>, succ: F, cap: usize) -> Result<Level<K, W>, DpFail>
where
    K: Ord + Hash + Clone + Send + Sync,
    W: Weight,
    F: Fn(&K, &mut Vec<(K, W)>) + Sync,
{
    let width = prev.width;
    let partials: Vec<Result<Rows<K, W>, DpFail>> = prev
        .keys
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, keys)| {
            let base = c * CHUNK;
            let mut index: HashMap<K, usize> = HashMap::new();
            let mut out_keys: Vec<K> = Vec::new();
            let mut out_vals: Vec<W> = Vec::new();
            let mut buf: Vec<(K, W)> = Vec::new();
            for (off, key) in keys.iter().enumerate() {
                let src = prev.row(base + off);
                if src.iter().all(|v| v.is_zero()) {
                    continue;
                }
                buf.clear();
                succ(key, &mut buf);
                for (next, w) in buf.drain(..) {
                    let slot = match index.get(&next) {
                        Some(&s) => s,
                        None => {
                            let s = out_keys.len();
                            index.insert(next.clone(), s);
                            out_keys.push(next);
                            out_vals.extend(std::iter::repeat_n(W::zero(), width));
                            s
                        }
                    };
                    for (s, v) in src.iter().enumerate() {
                        if v.is_zero() {
                            continue;
                        }
                        let t = v.times(&w).ok_or(DpFail::Overflow)?;
                        if !out_vals[slot * width + s].add_to(&t) {
                            return Err(DpFail::Overflow);
                        }
                    }
                }
            }
            Ok((out_keys, out_vals))
        })
        .collect();

    let mut index: HashMap<K, usize> = HashMap::new();
    let mut keys: Vec<K> = Vec::new();
    let mut values: Vec<W> = Vec::new();
    for part in partials {
        let (pk, pv) = part?;
        for (local, key) in pk.into_iter().enumerate() {
            let slot = match index.get(&key) {
                Some(&s) => s,
                None => {
                    let s = keys.len();
                    index.insert(key.clone(), s);
                    keys.push(key);
                    values.extend(std::iter::repeat_n(W::zero(), width));
                    s
                }
            };
            for s in 0..width {
                if !values[slot * width + s].add_to(&pv[local * width + s]) {
                    return Err(DpFail::Overflow);
                }
            }
        }
        if keys.len() > cap {
            return Err(DpFail::TooLarge);
        }
    }
    Ok(Level::from_unsorted(keys, values, width))
}

/// `Σ_{idx} term(idx)` over a level, chunked like [`advance`] and folded
/// in chunk order.
pub(crate) fn fold_level<K, W, F>(level: &Level<K, W>, term: F) -> Result<W, DpFail>
where
    K: Sync,
    W: Weight,
    F: Fn(usize) -> Option<W> + Sync,
{
    let chunks: Vec<Option<W>> = (0..level.keys.len().div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(level.keys.len());
            let mut terms = Vec::with_capacity(hi - lo);
            for idx in lo..hi {
                terms.push(term(idx)?);
            }
            W::sum_all(terms)
        })
        .collect();
    let chunks: Option<Vec<W>> = chunks.into_iter().collect();
    W::sum_all(chunks.ok_or(DpFail::Overflow)?).ok_or(DpFail::Overflow)
}
