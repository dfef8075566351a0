//! Skew-product extensions `T_ψ(x, g) = (σx, g·ψ(x_0, x_1))` of a
//! subshift of finite type by a finitely generated group, with exact
//! counting of the periodic points whose holonomy is trivial.
//!
//! Counting runs a DP over `(vertex, element)` states with one value per
//! starting vertex. Two half-length levels are glued at the midpoint:
//! a loop of length `a + b` based at `i` splits into a path `i → j` of
//! length `a` with holonomy `g` and a path `j → i` of length `b` with
//! holonomy `g⁻¹`. Every length-`m` product lies in the radius-`m` ball,
//! so the truncation is lossless.

mod dp;
mod growth;
mod transfer;
mod transitivity;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::{Element, Group, GroupKind, LatticeVector, DEFAULT_BALL_CAP};
use crate::sft::Sft;
use crate::thermo::EdgePotential;

pub(crate) use dp::{advance, fold_level, DpFail, Level, Weight};
pub(crate) use growth::ln_big;
pub use growth::{
    estimate_from_counts, estimate_gurevich, estimate_gurevich_with, fit_growth, CountMethod, CountOptions,
    CountSequence, GrowthEstimate,
};
pub use transfer::truncated_transfer_spr;
pub use transitivity::{check_transitivity, holonomy_cone_witness, Transitivity, Witness};

/// A group extension of an SFT with one label per allowed transition.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewSystem {
    base: Sft,
    group: Group,
    labels: Vec<Option<Element>>,
    ab_labels: Vec<LatticeVector>,
    ab_rank: usize,
}

/// Validates `labels` against the allowed transitions of `sft`.
pub fn make_skew(sft: Sft, group: Group, labels: Vec<(usize, usize, Element)>) -> Result<SkewSystem> {
    SkewSystem::new(sft, group, labels)
}

impl SkewSystem {
    pub fn new(sft: Sft, group: Group, labels: Vec<(usize, usize, Element)>) -> Result<Self> {
        let k = sft.alphabet_size();
        let mut table: Vec<Option<Element>> = vec![None; k * k];
        for (i, j, g) in labels {
            if !sft.allows(i, j) {
                return Err(Error::ExtraLabel { i, j });
            }
            if !group.contains(&g) {
                return Err(Error::KindMismatch);
            }
            table[i * k + j] = Some(g);
        }
        for (i, j) in sft.edges() {
            if table[i * k + j].is_none() {
                return Err(Error::MissingLabel { i, j });
            }
        }
        let ab = group.abelianization();
        let ab_labels = table
            .iter()
            .map(|l| {
                l.as_ref()
                    .map(|g| ab.apply(g))
                    .unwrap_or_else(|| smallvec::smallvec![0; ab.rank])
            })
            .collect();
        Ok(SkewSystem {
            base: sft,
            group,
            labels: table,
            ab_labels,
            ab_rank: ab.rank,
        })
    }

    /// Labels depending on the first symbol only: `ψ(i, j) = per_symbol[i]`.
    pub fn by_source(sft: Sft, group: Group, per_symbol: &[Element]) -> Result<Self> {
        if per_symbol.len() != sft.alphabet_size() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} symbols",
                per_symbol.len(),
                sft.alphabet_size()
            )));
        }
        let labels = sft
            .edges()
            .into_iter()
            .map(|(i, j)| (i, j, per_symbol[i].clone()))
            .collect();
        Self::new(sft, group, labels)
    }

    pub fn base(&self) -> &Sft {
        &self.base
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    /// Label of an allowed transition.
    pub fn label(&self, i: usize, j: usize) -> &Element {
        self.labels[i * self.base.alphabet_size() + j]
            .as_ref()
            .expect("label requested on a forbidden transition")
    }

    /// `ψ^ab(i, j) ∈ Z^a`.
    pub fn ab_label(&self, i: usize, j: usize) -> &LatticeVector {
        &self.ab_labels[i * self.base.alphabet_size() + j]
    }

    pub fn ab_rank(&self) -> usize {
        self.ab_rank
    }

    /// The induced `Z^a`-extension `T_{ψ^ab}`.
    pub fn abelianized(&self) -> SkewSystem {
        let labels = self
            .base
            .edges()
            .into_iter()
            .map(|(i, j)| (i, j, Element::Lattice(self.ab_label(i, j).clone())))
            .collect();
        SkewSystem::new(self.base.clone(), self.group.abelian_group(), labels)
            .expect("abelianized labels are valid by construction")
    }

    /// `ψ^n` along a loop, left to right.
    pub fn holonomy(&self, vertices: &[usize]) -> Element {
        let n = vertices.len();
        let mut acc = self.group.identity();
        for t in 0..n {
            acc = self.group.mul(&acc, self.label(vertices[t], vertices[(t + 1) % n]));
        }
        acc
    }

    /// Level-zero DP states: `(s, e)` carrying the unit vector at `s`.
    pub(crate) fn seed<W: Weight>(&self) -> Level<(u32, Element), W> {
        let k = self.base.alphabet_size();
        let e = self.group.identity();
        let keys = (0..k as u32).map(|s| (s, e.clone())).collect();
        let mut values = vec![W::zero(); k * k];
        for s in 0..k {
            values[s * k + s] = W::one();
        }
        Level::from_unsorted(keys, values, k)
    }

    /// One DP step; `edge_weights` is the row-major table of multipliers
    /// (all ones when absent).
    pub(crate) fn advance_level<W: Weight>(
        &self,
        level: &Level<(u32, Element), W>,
        edge_weights: Option<&[W]>,
        cap: usize,
    ) -> std::result::Result<Level<(u32, Element), W>, DpFail> {
        let k = self.base.alphabet_size();
        advance(
            level,
            |key: &(u32, Element), out: &mut Vec<((u32, Element), W)>| {
                let (j, g) = key;
                let j = *j as usize;
                for next in self.base.successors(j) {
                    let w = edge_weights.map_or_else(W::one, |t| t[j * k + next].clone());
                    out.push(((next as u32, self.group.mul(g, self.label(j, next))), w));
                }
            },
            cap,
        )
    }
}

/// `e^{f(i, j)}` per transition, row-major.
pub(crate) fn exp_table(sft: &Sft, f: &EdgePotential) -> Vec<f64> {
    let k = sft.alphabet_size();
    let mut t = vec![0.0; k * k];
    for (i, j) in sft.edges() {
        t[i * k + j] = f.get(i, j).exp();
    }
    t
}

/// Per-`n` trivial-holonomy counts `Z_1, ..., Z_{n_max}` with the number
/// of distinct group elements in the DP frontier used for each `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrivialCounts<T> {
    pub counts: Vec<T>,
    pub frontier: Vec<usize>,
    /// Milliseconds since the start when each count was ready.
    #[serde(skip)]
    pub elapsed_ms: Vec<f64>,
}

fn distinct_elements<W>(level: &Level<(u32, Element), W>) -> usize {
    let mut elems: Vec<&Element> = level.keys.iter().map(|k| &k.1).collect();
    elems.sort();
    elems.dedup();
    elems.len()
}

fn glue<W: Weight>(
    skew: &SkewSystem,
    long: &Level<(u32, Element), W>,
    short: &Level<(u32, Element), W>,
) -> std::result::Result<W, DpFail> {
    let k = skew.base.alphabet_size();
    fold_level(long, |idx| {
        let (j, g) = &long.keys[idx];
        let ginv = skew.group.inv(g);
        let row = long.row(idx);
        let mut terms = Vec::new();
        for (i, v) in row.iter().enumerate().take(k) {
            if v.is_zero() {
                continue;
            }
            if let Some(back) = short.find(&(i as u32, ginv.clone())) {
                let w = &short.row(back)[*j as usize];
                if !w.is_zero() {
                    terms.push(v.times(w)?);
                }
            }
        }
        W::sum_all(terms)
    })
}

fn counts_generic<W: Weight>(
    skew: &SkewSystem,
    n_max: usize,
    weight: Option<&[W]>,
    cap: usize,
) -> std::result::Result<TrivialCounts<W>, (DpFail, usize)> {
    let start = std::time::Instant::now();
    let mut counts = Vec::with_capacity(n_max);
    let mut frontier = Vec::with_capacity(n_max);
    let mut elapsed_ms = Vec::with_capacity(n_max);
    let mut prev: Level<(u32, Element), W> = skew.seed();
    for m in 1..=n_max.div_ceil(2) {
        let cur = skew.advance_level(&prev, weight, cap).map_err(|e| (e, m))?;
        let size = distinct_elements(&cur);
        if 2 * m - 1 <= n_max {
            counts.push(glue(skew, &cur, &prev).map_err(|e| (e, m))?);
            frontier.push(size);
            elapsed_ms.push(start.elapsed().as_secs_f64() * 1e3);
        }
        if 2 * m <= n_max {
            counts.push(glue(skew, &cur, &cur).map_err(|e| (e, m))?);
            frontier.push(size);
            elapsed_ms.push(start.elapsed().as_secs_f64() * 1e3);
        }
        prev = cur;
    }
    Ok(TrivialCounts {
        counts,
        frontier,
        elapsed_ms,
    })
}

/// Exact `Z_n = #{x : σ^n x = x, ψ^n(x) = e}` for `n = 1..=n_max`.
pub fn trivial_counts(skew: &SkewSystem, n_max: usize, cap: usize) -> Result<TrivialCounts<BigUint>> {
    match counts_generic::<u128>(skew, n_max, None, cap) {
        Ok(c) => Ok(TrivialCounts {
            counts: c.counts.into_iter().map(BigUint::from).collect(),
            frontier: c.frontier,
            elapsed_ms: c.elapsed_ms,
        }),
        Err((DpFail::Overflow, _)) => {
            counts_generic::<BigUint>(skew, n_max, None, cap).map_err(|(_, m)| Error::BallTooLarge { cap, radius: m })
        }
        Err((DpFail::TooLarge, m)) => Err(Error::BallTooLarge { cap, radius: m }),
    }
}

/// `Σ_{σ^n x = x, ψ^n(x) = e} e^{f^n(x)}` for `n = 1..=n_max`.
pub fn weighted_trivial_counts(
    skew: &SkewSystem,
    n_max: usize,
    f: &EdgePotential,
    cap: usize,
) -> Result<TrivialCounts<f64>> {
    f.check(&skew.base)?;
    counts_generic::<f64>(skew, n_max, Some(&exp_table(&skew.base, f)), cap).map_err(|(e, m)| match e {
        DpFail::Overflow => Error::Overflow,
        DpFail::TooLarge => Error::BallTooLarge { cap, radius: m },
    })
}

pub fn count_trivial(skew: &SkewSystem, n: usize) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    Ok(trivial_counts(skew, n, DEFAULT_BALL_CAP)?.counts.pop().expect("n >= 1"))
}

pub fn count_trivial_weighted(skew: &SkewSystem, n: usize, f: &EdgePotential) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    Ok(weighted_trivial_counts(skew, n, f, DEFAULT_BALL_CAP)?
        .counts
        .pop()
        .expect("n >= 1"))
}

/// Whether the radial free-group specialization applies: `Free(k)` over
/// the full `2k`-shift, each label a single basis letter or its inverse,
/// depending only on the source (or only on the target) symbol and
/// hitting every letter once.
pub fn radial_shape(skew: &SkewSystem) -> Result<usize> {
    let rank = match skew.group.kind() {
        GroupKind::Free { rank } => *rank,
        _ => return Err(Error::UnsupportedShape("group is not free".into())),
    };
    let k = skew.base.alphabet_size();
    if k != 2 * rank || !skew.base.is_full() {
        return Err(Error::UnsupportedShape(format!(
            "base must be the full {}-shift",
            2 * rank
        )));
    }
    let letter = |g: &Element| match g {
        Element::Free(w) if w.len() == 1 => Some(w[0]),
        _ => None,
    };
    let symbol_labels = |by_source: bool| -> Option<Vec<i32>> {
        let mut per = Vec::with_capacity(k);
        for s in 0..k {
            let first = letter(if by_source { skew.label(s, 0) } else { skew.label(0, s) })?;
            for t in 0..k {
                let g = if by_source { skew.label(s, t) } else { skew.label(t, s) };
                if letter(g)? != first {
                    return None;
                }
            }
            per.push(first);
        }
        let mut sorted = per.clone();
        sorted.sort();
        sorted.dedup();
        (sorted.len() == k).then_some(per)
    };
    if symbol_labels(true).is_some() || symbol_labels(false).is_some() {
        Ok(rank)
    } else {
        Err(Error::UnsupportedShape(
            "labels must be distinct single letters determined by one coordinate".into(),
        ))
    }
}

fn radial_generic<W: Weight>(rank: usize, n_max: usize) -> Option<Vec<W>> {
    let up_from_zero = W::from_u64(2 * rank as u64);
    let up = W::from_u64(2 * rank as u64 - 1);
    let mut dist: Vec<W> = vec![W::zero(); n_max + 2];
    dist[0] = W::one();
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut next = vec![W::zero(); n_max + 2];
        for d in 0..=n.min(n_max) {
            if dist[d].is_zero() {
                continue;
            }
            if d == 0 {
                let t = dist[0].times(&up_from_zero)?;
                if !next[1].add_to(&t) {
                    return None;
                }
            } else {
                let t = dist[d].times(&up)?;
                if d + 1 < next.len() && !next[d + 1].add_to(&t) {
                    return None;
                }
                let down = dist[d].clone();
                if !next[d - 1].add_to(&down) {
                    return None;
                }
            }
        }
        dist = next;
        out.push(dist[0].clone());
    }
    Some(out)
}

/// `Z_1..Z_{n_max}` by the birth–death walk on distance from the identity
/// in the `2k`-regular tree.
pub fn radial_counts(skew: &SkewSystem, n_max: usize) -> Result<Vec<BigUint>> {
    let rank = radial_shape(skew)?;
    if rank == 0 {
        return Err(Error::UnsupportedShape("free group of rank 0".into()));
    }
    match radial_generic::<u128>(rank, n_max) {
        Some(v) => Ok(v.into_iter().map(BigUint::from).collect()),
        None => Ok(radial_generic::<BigUint>(rank, n_max).expect("big integers do not overflow")),
    }
}

pub fn count_trivial_radial_free(skew: &SkewSystem, n: usize) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    Ok(radial_counts(skew, n)?.pop().expect("n >= 1"))
}
