//! Pressure, equilibrium states and the decreasing-pressure root equation
//! for potentials that depend on two coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, kahan_sum};
use crate::sft::Sft;

/// A real weight `f(i, j)` per transition. Entries at forbidden
/// transitions are stored as zero and never read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgePotential {
    k: usize,
    values: Vec<f64>,
}

impl EdgePotential {
    pub fn constant(sft: &Sft, c: f64) -> Self {
        Self::from_fn(sft, |_, _| c)
    }

    pub fn zero(sft: &Sft) -> Self {
        Self::constant(sft, 0.0)
    }

    pub fn from_fn(sft: &Sft, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let k = sft.alphabet_size();
        let mut values = vec![0.0; k * k];
        for (i, j) in sft.edges() {
            values[i * k + j] = f(i, j);
        }
        EdgePotential { k, values }
    }

    /// `f(i, j) = g(i)`, a potential of the first coordinate.
    pub fn from_vertex(sft: &Sft, g: &[f64]) -> Result<Self> {
        if g.len() != sft.alphabet_size() {
            return Err(Error::PotentialMismatch {
                expected: sft.alphabet_size(),
                found: g.len(),
            });
        }
        Ok(Self::from_fn(sft, |i, _| g[i]))
    }

    /// `(i, j, value)` triples; missing allowed transitions take `default`.
    pub fn from_triples(sft: &Sft, triples: &[(usize, usize, f64)], default: f64) -> Result<Self> {
        let mut p = Self::constant(sft, default);
        for &(i, j, v) in triples {
            if !sft.allows(i, j) {
                return Err(Error::ExtraLabel { i, j });
            }
            p.values[i * p.k + j] = v;
        }
        Ok(p)
    }

    pub fn alphabet_size(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.k + j]
    }

    pub fn check(&self, sft: &Sft) -> Result<()> {
        if self.k != sft.alphabet_size() {
            return Err(Error::PotentialMismatch {
                expected: sft.alphabet_size(),
                found: self.k,
            });
        }
        Ok(())
    }

    pub fn map(&self, sft: &Sft, mut f: impl FnMut(usize, usize, f64) -> f64) -> Self {
        Self::from_fn(sft, |i, j| f(i, j, self.get(i, j)))
    }

    /// `a·self + b·other` on the allowed transitions.
    pub fn combine(&self, sft: &Sft, a: f64, other: &EdgePotential, b: f64) -> Self {
        Self::from_fn(sft, |i, j| a * self.get(i, j) + b * other.get(i, j))
    }

    pub fn min_on(&self, sft: &Sft) -> f64 {
        sft.edges()
            .into_iter()
            .map(|(i, j)| self.get(i, j))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_on(&self, sft: &Sft) -> f64 {
        sft.edges()
            .into_iter()
            .map(|(i, j)| self.get(i, j))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs_on(&self, sft: &Sft) -> f64 {
        sft.edges()
            .into_iter()
            .map(|(i, j)| self.get(i, j).abs())
            .fold(0.0, f64::max)
    }
}

/// A stationary Markov measure on the shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovMeasure {
    /// Invariant probability vector `p` with `p P = p`.
    pub stationary: Vec<f64>,
    /// Row-stochastic kernel, row-major `k × k`.
    pub kernel: Vec<f64>,
}

impl MarkovMeasure {
    pub fn alphabet_size(&self) -> usize {
        self.stationary.len()
    }

    pub fn transition(&self, i: usize, j: usize) -> f64 {
        self.kernel[i * self.alphabet_size() + j]
    }

    /// `p_i P(i, j)`, the measure of the cylinder `[i j]`.
    pub fn edge_mass(&self, i: usize, j: usize) -> f64 {
        self.stationary[i] * self.transition(i, j)
    }

    /// Bernoulli measure with the given symbol weights on the full shift.
    pub fn bernoulli(weights: &[f64]) -> Self {
        let k = weights.len();
        let mut kernel = Vec::with_capacity(k * k);
        for _ in 0..k {
            kernel.extend_from_slice(weights);
        }
        MarkovMeasure {
            stationary: weights.to_vec(),
            kernel,
        }
    }

    /// Largest violation of `p P = p`, `sum p = 1` and row stochasticity.
    pub fn invariance_defect(&self) -> f64 {
        let k = self.alphabet_size();
        let mut worst = (self.stationary.iter().sum::<f64>() - 1.0).abs();
        for j in 0..k {
            let pj: f64 = (0..k).map(|i| self.edge_mass(i, j)).sum();
            worst = worst.max((pj - self.stationary[j]).abs());
        }
        for i in 0..k {
            let row: f64 = (0..k).map(|j| self.transition(i, j)).sum();
            worst = worst.max((row - 1.0).abs());
        }
        worst
    }
}

fn log_entries(sft: &Sft, f: &EdgePotential) -> Vec<(usize, usize, f64)> {
    sft.edges().into_iter().map(|(i, j)| (i, j, f.get(i, j))).collect()
}

/// `log` of the Perron root of `M(i, j) = A(i, j) e^{f(i, j)}`.
pub fn pressure(sft: &Sft, f: &EdgePotential) -> Result<f64> {
    sft.require_mixing()?;
    f.check(sft)?;
    Ok(linalg::perron_log(sft.alphabet_size(), &log_entries(sft, f))?.log_lambda)
}

/// The equilibrium state of `f`, a Markov measure built from the Perron
/// eigendata of `M`: `P(i, j) = M(i, j) v_j / (λ v_i)`, `p_i = u_i v_i`.
pub fn equilibrium_measure(sft: &Sft, f: &EdgePotential) -> Result<MarkovMeasure> {
    sft.require_mixing()?;
    f.check(sft)?;
    let k = sft.alphabet_size();
    let perron = linalg::perron_log(k, &log_entries(sft, f))?;
    let lambda_log = perron.log_lambda;
    let v = &perron.right;
    let mut kernel = vec![0.0; k * k];
    for i in 0..k {
        let mut row = Vec::new();
        for j in sft.successors(i) {
            let w = (f.get(i, j) - lambda_log).exp() * v[j] / v[i];
            row.push((j, w));
        }
        let total = kahan_sum(row.iter().map(|r| r.1));
        for (j, w) in row {
            kernel[i * k + j] = w / total;
        }
    }
    let raw: Vec<f64> = perron.left.iter().zip(v).map(|(u, v)| u * v).collect();
    let total = kahan_sum(raw.iter().cloned());
    let stationary = raw.into_iter().map(|x| x / total).collect();
    Ok(MarkovMeasure { stationary, kernel })
}

/// `-Σ p_i P(i, j) log P(i, j)`.
pub fn measure_entropy(mm: &MarkovMeasure) -> f64 {
    let k = mm.alphabet_size();
    -kahan_sum((0..k * k).map(|e| {
        let (i, j) = (e / k, e % k);
        let pij = mm.transition(i, j);
        if pij > 0.0 {
            mm.stationary[i] * pij * pij.ln()
        } else {
            0.0
        }
    }))
}

/// `Σ p_i P(i, j) g(i, j)`.
pub fn integrate_edge(mm: &MarkovMeasure, g: &EdgePotential) -> f64 {
    let k = mm.alphabet_size();
    kahan_sum((0..k * k).map(|e| {
        let (i, j) = (e / k, e % k);
        let mass = mm.edge_mass(i, j);
        if mass != 0.0 {
            mass * g.get(i, j)
        } else {
            0.0
        }
    }))
}

/// Componentwise integral of a vector-valued edge function
/// `g(i, j) ∈ R^d`.
pub fn integrate_edge_vec(mm: &MarkovMeasure, dim: usize, g: impl Fn(usize, usize) -> Vec<f64>) -> Vec<f64> {
    let k = mm.alphabet_size();
    let mut terms = vec![Vec::new(); dim];
    for i in 0..k {
        for j in 0..k {
            let mass = mm.edge_mass(i, j);
            if mass == 0.0 {
                continue;
            }
            let v = g(i, j);
            for (d, t) in terms.iter_mut().enumerate() {
                t.push(mass * v[d]);
            }
        }
    }
    terms.into_iter().map(kahan_sum).collect()
}

const ROOT_TOL: f64 = 1e-10;

/// The unique `s` with `P(-s·r + f) = 0`, by bisection (absolute
/// tolerance `1e-10`). `s ↦ P(-s r + f)` is strictly decreasing when
/// `min r > 0`.
pub fn pressure_root(sft: &Sft, roof: &EdgePotential, offset: Option<&EdgePotential>) -> Result<f64> {
    let zero = EdgePotential::zero(sft);
    let f = offset.unwrap_or(&zero);
    let h = sft.topological_entropy()?;
    decreasing_root(sft, roof, f, h, |g| pressure(sft, g))
}

/// Bisection for `s ↦ value(-s r + f)` where `value` is a pressure-like
/// functional that is strictly decreasing in `s`.
pub(crate) fn decreasing_root(
    sft: &Sft,
    roof: &EdgePotential,
    f: &EdgePotential,
    entropy: f64,
    mut value: impl FnMut(&EdgePotential) -> Result<f64>,
) -> Result<f64> {
    roof.check(sft)?;
    f.check(sft)?;
    let min_r = roof.min_on(sft);
    if !(min_r > 0.0) {
        return Err(Error::NonPositiveRoof { min: min_r });
    }
    let bound = (f.max_abs_on(sft) + entropy) / min_r + 1.0;
    let mut at = |s: f64| value(&f.combine(sft, 1.0, roof, -s));
    let (mut lo, mut hi) = (-bound, bound);
    let (v_lo, v_hi) = (at(lo)?, at(hi)?);
    if !(v_lo > 0.0 && v_hi < 0.0) {
        return Err(Error::BracketFailure { lo, hi });
    }
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if at(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
