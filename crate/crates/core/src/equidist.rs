//! Edge statistics of trivial-holonomy periodic orbits: their averaged
//! empirical measure against the equilibrium state at `ξ`, and the
//! exponential decay of deviation frequencies for one observable.

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::abelian::{minimize_beta, AbelianData};
use crate::error::{Error, Result};
use crate::extension::{advance, ln_big, trivial_counts, DpFail, Level, SkewSystem};
use crate::groups::{Element, DEFAULT_BALL_CAP};
use crate::linalg::{gcd, kahan_sum};
use crate::sft::Loop;
use crate::thermo::{equilibrium_measure, integrate_edge, EdgePotential, MarkovMeasure};

/// Grid on which observable values are snapped in [`ld_ratio`].
pub const LD_GRID: f64 = 1e-3;

const XI_TOL: f64 = 1e-10;

/// A probability vector on transitions, row-major `k × k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalEdgeMeasure {
    pub k: usize,
    pub weights: Vec<f64>,
}

impl EmpiricalEdgeMeasure {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.k + j]
    }

    /// Edge marginal `p_i P(i, j)` of a Markov measure.
    pub fn from_markov(mm: &MarkovMeasure) -> Self {
        let k = mm.alphabet_size();
        let weights = (0..k * k).map(|e| mm.edge_mass(e / k, e % k)).collect();
        EmpiricalEdgeMeasure { k, weights }
    }

    /// Half the `ℓ¹` distance.
    pub fn total_variation(&self, other: &EmpiricalEdgeMeasure) -> f64 {
        0.5 * kahan_sum(self.weights.iter().zip(&other.weights).map(|(a, b)| (a - b).abs()))
    }
}

/// Edge-visit frequencies along a loop, on the alphabet `0..=max vertex`.
pub fn orbit_empirical(lp: &Loop) -> EmpiricalEdgeMeasure {
    let k = lp.vertices.iter().max().map_or(0, |m| m + 1);
    let n = lp.len() as f64;
    let mut weights = vec![0.0; k * k];
    for (i, j) in lp.edges() {
        weights[i * k + j] += 1.0 / n;
    }
    EmpiricalEdgeMeasure { k, weights }
}

fn no_orbits(skew: &SkewSystem, n: usize) -> Error {
    let horizon = n.max(4 * skew.base().alphabet_size()).max(12);
    let modulus = trivial_counts(skew, horizon, DEFAULT_BALL_CAP)
        .map(|c| {
            c.counts
                .iter()
                .enumerate()
                .filter(|(_, z)| !z.is_zero())
                .fold(0, |g, (i, _)| gcd(g, i + 1))
        })
        .unwrap_or(0);
    Error::NoOrbits {
        n,
        residue: if modulus == 0 { n } else { n % modulus },
        modulus,
    }
}

fn dp_error(e: DpFail, radius: usize) -> Error {
    match e {
        DpFail::Overflow => Error::Overflow,
        DpFail::TooLarge => Error::BallTooLarge {
            cap: DEFAULT_BALL_CAP,
            radius,
        },
    }
}

/// Exact edge counts `W(a, b) = #{trivial loops of length n with x_0 = a,
/// x_1 = b}` and their total `Z_n`. By rotation invariance `W / Z_n` is
/// the average over trivial loops of their empirical edge measures.
pub fn trivial_edge_counts(skew: &SkewSystem, n: usize) -> Result<(Vec<BigUint>, BigUint)> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let sft = skew.base();
    let k = sft.alphabet_size();
    // paths b -> a of length n - 1, keyed by (a, holonomy)
    let mut level: Level<(u32, Element), BigUint> = skew.seed();
    for m in 1..n {
        level = skew
            .advance_level(&level, None, DEFAULT_BALL_CAP)
            .map_err(|e| dp_error(e, m))?;
    }
    let mut w = vec![BigUint::zero(); k * k];
    for (a, b) in sft.edges() {
        let back = skew.group().inv(skew.label(a, b));
        if let Some(idx) = level.find(&(a as u32, back)) {
            w[a * k + b] = level.row(idx)[b].clone();
        }
    }
    let total = w.iter().sum();
    Ok((w, total))
}

/// Averaged empirical edge measure of the trivial-holonomy loops of
/// length `n`.
pub fn averaged_empirical(skew: &SkewSystem, n: usize) -> Result<EmpiricalEdgeMeasure> {
    let (w, total) = trivial_edge_counts(skew, n)?;
    if total.is_zero() {
        return Err(no_orbits(skew, n));
    }
    let lt = ln_big(&total);
    let weights = w
        .iter()
        .map(|c| if c.is_zero() { 0.0 } else { (ln_big(c) - lt).exp() })
        .collect();
    Ok(EmpiricalEdgeMeasure {
        k: skew.base().alphabet_size(),
        weights,
    })
}

/// `μ_ξ`, the equilibrium state of `f + ⟨ξ, ψ^ab⟩` at the minimizer of `β`.
pub fn tilted_equilibrium(data: &AbelianData) -> Result<(Vec<f64>, MarkovMeasure)> {
    let cp = minimize_beta(data, XI_TOL)?;
    let mm = equilibrium_measure(data.skew().base(), &data.tilted(&cp.xi)?)?;
    Ok((cp.xi, mm))
}

/// Total variation between the averaged empirical measure of trivial
/// loops of length `n` and the edge marginal of `μ_ξ`.
pub fn equidistribution_distance(skew: &SkewSystem, n: usize, data: &AbelianData) -> Result<f64> {
    let avg = averaged_empirical(skew, n)?;
    let (_, mm) = tilted_equilibrium(data)?;
    Ok(avg.total_variation(&EmpiricalEdgeMeasure::from_markov(&mm)))
}

/// `(1/n) log` of the fraction of trivial loops of length `n` whose
/// average of `F` differs from `∫ F dμ_ξ` by at least `delta`;
/// `-inf` when no loop deviates. `F` is snapped to [`LD_GRID`].
pub fn ld_ratio(
    skew: &SkewSystem,
    n: usize,
    data: &AbelianData,
    observable: &EdgePotential,
    delta: f64,
) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let sft = skew.base();
    observable.check(sft)?;
    let (_, mm) = tilted_equilibrium(data)?;
    let mean = integrate_edge(&mm, observable);
    let k = sft.alphabet_size();
    let mut quant = vec![0i64; k * k];
    for (i, j) in sft.edges() {
        quant[i * k + j] = (observable.get(i, j) / LD_GRID).round() as i64;
    }
    let group = skew.group();
    let id = group.identity();
    let keys: Vec<(u32, Element, i64)> = (0..k as u32).map(|s| (s, id.clone(), 0)).collect();
    let mut values = vec![BigUint::zero(); k * k];
    for s in 0..k {
        values[s * k + s] = BigUint::from(1u8);
    }
    let mut level = Level::from_unsorted(keys, values, k);
    for m in 1..=n {
        level = advance(
            &level,
            |key: &(u32, Element, i64), buf: &mut Vec<((u32, Element, i64), BigUint)>| {
                let (v, g, q) = key;
                let v = *v as usize;
                for w in sft.successors(v) {
                    buf.push((
                        (w as u32, group.mul(g, skew.label(v, w)), q + quant[v * k + w]),
                        BigUint::from(1u8),
                    ));
                }
            },
            DEFAULT_BALL_CAP,
        )
        .map_err(|e| dp_error(e, m))?;
    }
    let mut total = BigUint::zero();
    let mut deviating = BigUint::zero();
    for (idx, (v, g, q)) in level.keys.iter().enumerate() {
        if *g != id {
            continue;
        }
        let c = &level.row(idx)[*v as usize];
        if c.is_zero() {
            continue;
        }
        total += c;
        let avg = *q as f64 * LD_GRID / n as f64;
        if (avg - mean).abs() >= delta - 1e-12 {
            deviating += c;
        }
    }
    if total.is_zero() {
        return Err(no_orbits(skew, n));
    }
    if deviating.is_zero() {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(((ln_big(&deviating) - ln_big(&total)) / n as f64).min(0.0))
}
