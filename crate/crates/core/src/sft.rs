//! Subshifts of finite type on a finite alphabet.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, gcd};

/// A one-sided subshift of finite type given by a 0/1 transition matrix.
///
/// Every symbol has at least one successor and one predecessor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sft {
    k: usize,
    allowed: Vec<bool>,
}

/// Outcome of [`Sft::irreducibility`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Irreducibility {
    pub irreducible: bool,
    /// gcd of cycle lengths; 1 when not irreducible.
    pub period: usize,
}

/// A based periodic point `x_0 x_1 ... x_{n-1}` (repeated forever).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Loop {
    pub vertices: Vec<usize>,
}

impl Loop {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edges `(x_t, x_{t+1 mod n})` in order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |t| (self.vertices[t], self.vertices[(t + 1) % n]))
    }

    /// Smallest `d` with `x_{t+d} = x_t` for all `t`.
    pub fn minimal_period(&self) -> usize {
        let n = self.vertices.len();
        (1..=n)
            .find(|&d| n.is_multiple_of(d) && (0..n).all(|t| self.vertices[t] == self.vertices[(t + d) % n]))
            .unwrap_or(n)
    }
}

impl Sft {
    /// Validates a square 0/1 matrix.
    pub fn new(alphabet_size: usize, transitions: &[Vec<u8>]) -> Result<Self> {
        if alphabet_size == 0 {
            return Err(Error::EmptyAlphabet);
        }
        if transitions.len() != alphabet_size {
            return Err(Error::NonSquare {
                rows: transitions.len(),
                row: transitions.len().min(alphabet_size),
                len: alphabet_size,
            });
        }
        let mut allowed = Vec::with_capacity(alphabet_size * alphabet_size);
        for (i, row) in transitions.iter().enumerate() {
            if row.len() != alphabet_size {
                return Err(Error::NonSquare {
                    rows: alphabet_size,
                    row: i,
                    len: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => allowed.push(false),
                    1 => allowed.push(true),
                    value => return Err(Error::InvalidEntry { i, j, value }),
                }
            }
        }
        Self::from_mask(alphabet_size, allowed)
    }

    /// Builds the shift from a list of allowed `(i, j)` transitions.
    pub fn from_edges(alphabet_size: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if alphabet_size == 0 {
            return Err(Error::EmptyAlphabet);
        }
        let mut allowed = vec![false; alphabet_size * alphabet_size];
        for &(i, j) in edges {
            if i >= alphabet_size || j >= alphabet_size {
                return Err(Error::EdgeOutOfRange { i, j, k: alphabet_size });
            }
            allowed[i * alphabet_size + j] = true;
        }
        Self::from_mask(alphabet_size, allowed)
    }

    /// The full shift on `k` symbols.
    pub fn full(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptyAlphabet);
        }
        Self::from_mask(k, vec![true; k * k])
    }

    fn from_mask(k: usize, allowed: Vec<bool>) -> Result<Self> {
        for s in 0..k {
            if !(0..k).any(|j| allowed[s * k + j]) {
                return Err(Error::EmptyRowOrColumn {
                    symbol: s,
                    side: "successor",
                });
            }
            if !(0..k).any(|i| allowed[i * k + s]) {
                return Err(Error::EmptyRowOrColumn {
                    symbol: s,
                    side: "predecessor",
                });
            }
        }
        Ok(Sft { k, allowed })
    }

    pub fn alphabet_size(&self) -> usize {
        self.k
    }

    pub fn allows(&self, i: usize, j: usize) -> bool {
        i < self.k && j < self.k && self.allowed[i * self.k + j]
    }

    /// Allowed transitions in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let k = self.k;
        (0..k * k)
            .filter(|&e| self.allowed[e])
            .map(|e| (e / k, e % k))
            .collect()
    }

    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.k).filter(move |&j| self.allowed[i * self.k + j])
    }

    pub fn is_full(&self) -> bool {
        self.allowed.iter().all(|&a| a)
    }

    /// The 0/1 matrix as rows.
    pub fn matrix(&self) -> Vec<Vec<u8>> {
        (0..self.k)
            .map(|i| (0..self.k).map(|j| self.allowed[i * self.k + j] as u8).collect())
            .collect()
    }

    /// Strong connectivity and the gcd of cycle lengths.
    pub fn irreducibility(&self) -> Irreducibility {
        let k = self.k;
        let reach = |forward: bool| {
            let mut seen = vec![false; k];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for w in 0..k {
                    let edge = if forward {
                        self.allowed[v * k + w]
                    } else {
                        self.allowed[w * k + v]
                    };
                    if edge && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        if !(reach(true) && reach(false)) {
            return Irreducibility {
                irreducible: false,
                period: 1,
            };
        }
        // BFS levels; the period is the gcd of level(i) + 1 - level(j) over edges.
        let mut level = vec![usize::MAX; k];
        level[0] = 0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for w in self.successors(v) {
                if level[w] == usize::MAX {
                    level[w] = level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        let mut period = 0usize;
        for (i, j) in self.edges() {
            let diff = (level[i] as i64 + 1 - level[j] as i64).unsigned_abs() as usize;
            period = gcd(period, diff);
        }
        Irreducibility {
            irreducible: true,
            period: period.max(1),
        }
    }

    /// Fails unless the shift is irreducible and aperiodic.
    pub fn require_mixing(&self) -> Result<()> {
        let irr = self.irreducibility();
        if !irr.irreducible {
            return Err(Error::NotIrreducible);
        }
        if irr.period != 1 {
            return Err(Error::NotAperiodic { period: irr.period });
        }
        Ok(())
    }

    /// `trace(A^n)`, the number of points with `σ^n x = x`, in `u64`.
    pub fn count_periodic(&self, n: usize) -> Result<u64> {
        if n == 0 {
            return Err(Error::InvalidArgument("period must be at least 1".into()));
        }
        let k = self.k;
        let base: Vec<u64> = self.allowed.iter().map(|&a| a as u64).collect();
        let mut power = base.clone();
        for _ in 1..n {
            let mut next = vec![0u64; k * k];
            for i in 0..k {
                for l in 0..k {
                    let a = power[i * k + l];
                    if a == 0 {
                        continue;
                    }
                    for j in 0..k {
                        if base[l * k + j] != 0 {
                            let cell = &mut next[i * k + j];
                            *cell = cell.checked_add(a).ok_or(Error::Overflow)?;
                        }
                    }
                }
            }
            power = next;
        }
        (0..k).try_fold(0u64, |acc, i| acc.checked_add(power[i * k + i]).ok_or(Error::Overflow))
    }

    /// `trace(A^n)` as a big integer.
    pub fn count_periodic_big(&self, n: usize) -> Result<BigUint> {
        if n == 0 {
            return Err(Error::InvalidArgument("period must be at least 1".into()));
        }
        let k = self.k;
        let mut power: Vec<BigUint> = self
            .allowed
            .iter()
            .map(|&a| if a { BigUint::one() } else { BigUint::zero() })
            .collect();
        for _ in 1..n {
            let mut next = vec![BigUint::zero(); k * k];
            for i in 0..k {
                for l in 0..k {
                    if power[i * k + l].is_zero() {
                        continue;
                    }
                    for j in self.successors(l) {
                        let add = power[i * k + l].clone();
                        next[i * k + j] += add;
                    }
                }
            }
            power = next;
        }
        Ok((0..k).map(|i| power[i * k + i].clone()).sum())
    }

    /// Every periodic point of period `n` as a based sequence, in
    /// lexicographic order.
    pub fn enumerate_loops(&self, n: usize) -> LoopIter<'_> {
        LoopIter::new(self, n)
    }

    /// `log` of the Perron root of the transition matrix.
    pub fn topological_entropy(&self) -> Result<f64> {
        self.require_mixing()?;
        let entries: Vec<(usize, usize, f64)> = self.edges().into_iter().map(|(i, j)| (i, j, 0.0)).collect();
        Ok(linalg::perron_log(self.k, &entries)?.log_lambda)
    }

    /// Relabels symbols: new symbol `perm[i]` plays the role of old `i`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let k = self.k;
        if perm.len() != k {
            return Err(Error::InvalidArgument("permutation length".into()));
        }
        let edges: Vec<(usize, usize)> = self.edges().into_iter().map(|(i, j)| (perm[i], perm[j])).collect();
        Sft::from_edges(k, &edges)
    }
}

/// Backtracking iterator behind [`Sft::enumerate_loops`].
pub struct LoopIter<'a> {
    sft: &'a Sft,
    n: usize,
    stack: Vec<usize>,
    started: bool,
    done: bool,
}

impl<'a> LoopIter<'a> {
    fn new(sft: &'a Sft, n: usize) -> Self {
        LoopIter {
            sft,
            n,
            stack: Vec::with_capacity(n),
            started: false,
            done: n == 0,
        }
    }

    /// Advances `stack` to the next allowed prefix of full length, trying
    /// symbols `>= from` at the current depth.
    fn fill(&mut self, mut from: usize) -> bool {
        let k = self.sft.alphabet_size();
        loop {
            let depth = self.stack.len();
            let next = (from..k).find(|&s| depth == 0 || self.sft.allows(self.stack[depth - 1], s));
            match next {
                Some(s) => {
                    self.stack.push(s);
                    if self.stack.len() == self.n {
                        if self.sft.allows(s, self.stack[0]) {
                            return true;
                        }
                        // closing edge missing: try the next symbol here
                        self.stack.pop();
                        from = s + 1;
                    } else {
                        from = 0;
                    }
                }
                None => match self.stack.pop() {
                    Some(prev) => from = prev + 1,
                    None => return false,
                },
            }
        }
    }
}

impl Iterator for LoopIter<'_> {
    type Item = Loop;

    fn next(&mut self) -> Option<Loop> {
        if self.done {
            return None;
        }
        let found = if !self.started {
            self.started = true;
            self.fill(0)
        } else {
            let last = self.stack.pop().expect("full stack after a yielded loop");
            self.fill(last + 1)
        };
        if found {
            Some(Loop {
                vertices: self.stack.clone(),
            })
        } else {
            self.done = true;
            None
        }
    }
}
