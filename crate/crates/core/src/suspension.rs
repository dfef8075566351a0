//! Suspension flows over SFTs with a locally constant roof `r(x_0, x_1)`.
//!
//! A based loop of length `n` is a periodic flow orbit of period
//! `r^n(x)`. Prime orbits are counted by Möbius inversion of based-loop
//! counts graded by roof length, which is exact for torsion-free groups
//! and for the unfiltered base. Finite groups and roofs without a common
//! unit fall back to explicit loop enumeration.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{ToPrimitive, Zero};

use crate::abelian::{minimize_beta, AbelianData};
use crate::error::{Error, Result};
use crate::extension::{
    advance, fit_growth, ln_big, radial_counts, radial_shape, trivial_counts, CountMethod, CountSequence, DpFail,
    GrowthEstimate, Level, SkewSystem,
};
use crate::groups::{Element, Group, GroupKind, DEFAULT_BALL_CAP};
use crate::linalg::{kahan_sum, mobius};
use crate::sft::Sft;
use crate::thermo::{decreasing_root, pressure_root, EdgePotential};

const ROOF_EPS: f64 = 1e-9;
const MAX_UNITS_PER_EDGE: u64 = 1000;
const INNER_TOL: f64 = 1e-10;

/// The flow under `roof` over `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct Suspension {
    base: Sft,
    roof: EdgePotential,
}

impl Suspension {
    pub fn new(base: Sft, roof: EdgePotential) -> Result<Self> {
        roof.check(&base)?;
        let min = roof.min_on(&base);
        if !(min > 0.0) {
            return Err(Error::NonPositiveRoof { min });
        }
        Ok(Suspension { base, roof })
    }

    pub fn constant(base: Sft, c: f64) -> Result<Self> {
        let roof = EdgePotential::constant(&base, c);
        Self::new(base, roof)
    }

    pub fn base(&self) -> &Sft {
        &self.base
    }

    pub fn roof(&self) -> &EdgePotential {
        &self.roof
    }
}

/// Limits for orbit counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowOptions {
    /// Largest loop length `n` that may be examined.
    pub max_depth: usize,
    pub ball_cap: usize,
    /// Largest number of based loops the enumeration fallback may visit.
    pub enumeration_cap: u64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            max_depth: 256,
            ball_cap: DEFAULT_BALL_CAP,
            enumeration_cap: 20_000_000,
        }
    }
}

/// Prime orbits sharing a length, roof length and holonomy order.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeClass {
    pub length: usize,
    pub period: f64,
    /// Order of the holonomy, `None` when infinite.
    pub order: Option<usize>,
    pub count: BigUint,
}

/// One row of the flow-count table.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowCountRow {
    pub t: f64,
    /// Prime orbits of the base flow with period `<= t`.
    pub count_all: BigUint,
    /// Trivial-holonomy orbits with period `<= t`, iterates included.
    pub count_trivial_class: BigUint,
    /// Trivial-holonomy prime orbits with period `<= t`.
    pub prime_count: BigUint,
}

enum RoofShape {
    Constant(f64),
    Units { unit: f64, table: Vec<u64> },
    General,
}

fn roof_shape(susp: &Suspension) -> RoofShape {
    let sft = &susp.base;
    let k = sft.alphabet_size();
    let (lo, hi) = (susp.roof.min_on(sft), susp.roof.max_on(sft));
    if hi - lo <= 1e-12 * hi {
        return RoofShape::Constant(lo);
    }
    for q in 1..=12u64 {
        let unit = lo / q as f64;
        let mut table = vec![0u64; k * k];
        let ok = sft.edges().into_iter().all(|(i, j)| {
            let x = susp.roof.get(i, j) / unit;
            let r = x.round();
            table[i * k + j] = r as u64;
            (x - r).abs() < 1e-9 && r as u64 <= MAX_UNITS_PER_EDGE
        });
        if ok {
            return RoofShape::Units { unit, table };
        }
    }
    RoofShape::General
}

fn trivial_skew(sft: &Sft) -> SkewSystem {
    let e = Group::trivial().identity();
    SkewSystem::by_source(sft.clone(), Group::trivial(), &vec![e; sft.alphabet_size()])
        .expect("identity labels are valid")
}

/// Based trivial-holonomy loops of each length `1..=n_max`, graded by
/// total roof units.
fn graded_counts(skew: &SkewSystem, table: &[u64], n_max: usize, cap: usize) -> Result<Vec<BTreeMap<u64, BigUint>>> {
    let sft = skew.base();
    let k = sft.alphabet_size();
    let group = skew.group();
    let id = group.identity();
    let keys: Vec<(u32, Element, u64)> = (0..k as u32).map(|s| (s, id.clone(), 0)).collect();
    let mut values = vec![BigUint::zero(); k * k];
    for s in 0..k {
        values[s * k + s] = BigUint::from(1u8);
    }
    let mut level = Level::from_unsorted(keys, values, k);
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        level = advance(
            &level,
            |key: &(u32, Element, u64), buf: &mut Vec<((u32, Element, u64), BigUint)>| {
                let (v, g, u) = key;
                let v = *v as usize;
                for w in sft.successors(v) {
                    buf.push((
                        (w as u32, group.mul(g, skew.label(v, w)), u + table[v * k + w]),
                        BigUint::from(1u8),
                    ));
                }
            },
            cap,
        )
        .map_err(|e| match e {
            DpFail::Overflow => Error::Overflow,
            DpFail::TooLarge => Error::BallTooLarge { cap, radius: n },
        })?;
        let mut hist: BTreeMap<u64, BigUint> = BTreeMap::new();
        for (idx, (v, g, u)) in level.keys.iter().enumerate() {
            if *g == id {
                let c = &level.row(idx)[*v as usize];
                if !c.is_zero() {
                    *hist.entry(*u).or_default() += c;
                }
            }
        }
        out.push(hist);
    }
    Ok(out)
}

/// Prime classes from based counts `hist[e-1][units]` by Möbius inversion.
fn mobius_primes(hist: &[BTreeMap<u64, BigUint>], unit: f64) -> Vec<PrimeClass> {
    let mut out = Vec::new();
    for d in 1..=hist.len() {
        for &units in hist[d - 1].keys() {
            let mut acc = BigInt::zero();
            for e in (1..=d).filter(|e| d % e == 0) {
                let mu = mobius(d / e);
                if mu == 0 || !(units as usize * e).is_multiple_of(d) {
                    continue;
                }
                let sub = units * e as u64 / d as u64;
                if let Some(c) = hist[e - 1].get(&sub) {
                    let c = BigInt::from_biguint(Sign::Plus, c.clone());
                    if mu > 0 {
                        acc += c;
                    } else {
                        acc -= c;
                    }
                }
            }
            let (sign, mag) = (acc / BigInt::from(d)).into_parts();
            if sign == Sign::Plus {
                out.push(PrimeClass {
                    length: d,
                    period: units as f64 * unit,
                    order: Some(1),
                    count: mag,
                });
            }
        }
    }
    out
}

fn element_order(group: &Group, g: &Element) -> Option<usize> {
    let id = group.identity();
    if *g == id {
        return Some(1);
    }
    match group.kind() {
        GroupKind::Finite { table, .. } => {
            let mut acc = g.clone();
            for m in 2..=table.len() {
                acc = group.mul(&acc, g);
                if acc == id {
                    return Some(m);
                }
            }
            None
        }
        _ => None,
    }
}

fn enumerate_primes(
    susp: &Suspension,
    skew: Option<&SkewSystem>,
    n_max: usize,
    options: &FlowOptions,
) -> Result<Vec<PrimeClass>> {
    let sft = &susp.base;
    let mut visited: u64 = 0;
    for n in 1..=n_max {
        visited = visited.saturating_add(sft.count_periodic_big(n)?.to_u64().unwrap_or(u64::MAX));
        if visited > options.enumeration_cap {
            return Err(Error::DepthTooLarge {
                depth: n_max,
                cap: n - 1,
            });
        }
    }
    let mut classes: BTreeMap<(usize, u64, Option<usize>), BigUint> = BTreeMap::new();
    for n in 1..=n_max {
        for lp in sft.enumerate_loops(n) {
            if lp.minimal_period() != n {
                continue;
            }
            let v = &lp.vertices;
            if (1..n).any(|r| v[r..].iter().chain(&v[..r]).lt(v.iter())) {
                continue;
            }
            let period = kahan_sum(lp.edges().map(|(i, j)| susp.roof.get(i, j)));
            let order = match skew {
                Some(s) => element_order(s.group(), &s.holonomy(v)),
                None => Some(1),
            };
            *classes.entry((n, period.to_bits(), order)).or_default() += 1u8;
        }
    }
    Ok(classes
        .into_iter()
        .map(|((length, bits, order), count)| PrimeClass {
            length,
            period: f64::from_bits(bits),
            order,
            count,
        })
        .collect())
}

/// Prime orbits of period `<= t_max`, each tagged with the order of its
/// holonomy (all `Some(1)` when `filter` is absent).
pub fn prime_spectrum(
    susp: &Suspension,
    filter: Option<&SkewSystem>,
    t_max: f64,
    options: &FlowOptions,
) -> Result<Vec<PrimeClass>> {
    if !(t_max > 0.0) {
        return Err(Error::InvalidArgument("T must be positive".into()));
    }
    if let Some(s) = filter {
        if s.base() != &susp.base {
            return Err(Error::InvalidArgument("class filter lives on a different base".into()));
        }
    }
    let min_r = susp.roof.min_on(&susp.base);
    let n_max = ((t_max + ROOF_EPS) / min_r).floor() as usize;
    if n_max > options.max_depth {
        return Err(Error::DepthTooLarge {
            depth: n_max,
            cap: options.max_depth,
        });
    }
    if n_max == 0 {
        return Ok(Vec::new());
    }
    let torsion = filter.is_some_and(|s| matches!(s.group().kind(), GroupKind::Finite { .. }));
    let spectrum = match roof_shape(susp) {
        _ if torsion => enumerate_primes(susp, filter, n_max, options)?,
        RoofShape::General => enumerate_primes(susp, filter, n_max, options)?,
        RoofShape::Constant(c) => {
            let counts: Vec<BigUint> = match filter {
                None => (1..=n_max)
                    .map(|n| susp.base.count_periodic_big(n))
                    .collect::<Result<_>>()?,
                Some(s) if radial_shape(s).is_ok() => radial_counts(s, n_max)?,
                Some(s) => trivial_counts(s, n_max, options.ball_cap)?.counts,
            };
            let hist: Vec<BTreeMap<u64, BigUint>> = counts
                .into_iter()
                .enumerate()
                .map(|(i, z)| {
                    let mut m = BTreeMap::new();
                    if !z.is_zero() {
                        m.insert(i as u64 + 1, z);
                    }
                    m
                })
                .collect();
            mobius_primes(&hist, c)
        }
        RoofShape::Units { unit, table } => {
            let trivial;
            let skew = match filter {
                Some(s) => s,
                None => {
                    trivial = trivial_skew(&susp.base);
                    &trivial
                }
            };
            mobius_primes(&graded_counts(skew, &table, n_max, options.ball_cap)?, unit)
        }
    };
    Ok(spectrum.into_iter().filter(|c| c.period <= t_max + ROOF_EPS).collect())
}

fn prime_total(spectrum: &[PrimeClass], t: f64) -> BigUint {
    spectrum
        .iter()
        .filter(|c| c.order == Some(1) && c.period <= t + ROOF_EPS)
        .map(|c| c.count.clone())
        .sum()
}

fn with_iterates(spectrum: &[PrimeClass], t: f64) -> BigUint {
    spectrum
        .iter()
        .filter_map(|c| {
            let o = c.order?;
            let reps = ((t + ROOF_EPS) / (o as f64 * c.period)).floor() as u64;
            Some(&c.count * BigUint::from(reps))
        })
        .sum()
}

/// Number of prime periodic orbits with period `<= t`, restricted to
/// trivial holonomy when `class_filter` is given.
pub fn count_flow_orbits(susp: &Suspension, t: f64, class_filter: Option<&SkewSystem>) -> Result<BigUint> {
    let spectrum = prime_spectrum(susp, class_filter, t, &FlowOptions::default())?;
    Ok(prime_total(&spectrum, t))
}

/// The flow-count table at each `t` in `ts`.
pub fn flow_orbit_table(
    susp: &Suspension,
    class_filter: Option<&SkewSystem>,
    ts: &[f64],
    options: &FlowOptions,
) -> Result<Vec<FlowCountRow>> {
    let t_max = ts.iter().cloned().fold(0.0, f64::max);
    let base = prime_spectrum(susp, None, t_max, options)?;
    let filtered = match class_filter {
        Some(s) => prime_spectrum(susp, Some(s), t_max, options)?,
        None => base.clone(),
    };
    Ok(ts
        .iter()
        .map(|&t| FlowCountRow {
            t,
            count_all: prime_total(&base, t),
            count_trivial_class: with_iterates(&filtered, t),
            prime_count: prime_total(&filtered, t),
        })
        .collect())
}

/// The unique zero of `s ↦ P(−s r)`.
pub fn flow_entropy(susp: &Suspension) -> Result<f64> {
    pressure_root(&susp.base, &susp.roof, None)
}

/// The unique zero of `s ↦ min_w P(−s r + f + ⟨w, ψ^ab⟩)`.
pub fn cover_entropy_abelian(susp: &Suspension, data: &AbelianData) -> Result<f64> {
    let sft = &susp.base;
    if data.skew().base() != sft {
        return Err(Error::InvalidArgument("abelian data lives on a different base".into()));
    }
    let zero = EdgePotential::zero(sft);
    let f = data.potential().cloned().unwrap_or(zero);
    let h = sft.topological_entropy()?;
    decreasing_root(sft, &susp.roof, &f, h, |g| {
        Ok(minimize_beta(&data.with_potential(Some(g.clone())), INNER_TOL)?.value)
    })
}

/// Growth fit of trivial-class prime orbit counts on the grid
/// `T = 1, ..., t_max`, over the upper half of the grid like
/// [`crate::estimate_gurevich`].
pub fn cover_entropy_counting(susp: &Suspension, skew: &SkewSystem, t_max: usize) -> Result<GrowthEstimate> {
    cover_entropy_counting_with(susp, skew, t_max, &FlowOptions::default())
}

pub fn cover_entropy_counting_with(
    susp: &Suspension,
    skew: &SkewSystem,
    t_max: usize,
    options: &FlowOptions,
) -> Result<GrowthEstimate> {
    if t_max < 3 {
        return Err(Error::InvalidArgument("T_max must be at least 3".into()));
    }
    let spectrum = prime_spectrum(susp, Some(skew), t_max as f64, options)?;
    let totals: Vec<BigUint> = (1..=t_max).map(|t| prime_total(&spectrum, t as f64)).collect();
    // The cumulative count is a staircase; fit it at the grid points
    // where it steps up, as the per-n fit skips structural zeros.
    let lo = (t_max / 2).max(1);
    let points: Vec<(f64, f64)> = (lo..=t_max)
        .filter(|&t| !totals[t - 1].is_zero() && (t == 1 || totals[t - 1] > totals[t - 2]))
        .map(|t| (t as f64, ln_big(&totals[t - 1])))
        .collect();
    if points.is_empty() {
        return Err(Error::AllZeroCounts { lo, hi: t_max });
    }
    let (rate, poly_exponent, intercept, residual) = fit_growth(&points)?;
    let (n_range, points, counts) = ((lo, t_max), points.len(), CountSequence::Exact(totals));
    let method = if radial_shape(skew).is_ok() {
        CountMethod::Radial
    } else {
        CountMethod::BallDp
    };
    Ok(GrowthEstimate {
        rate,
        poly_exponent,
        intercept,
        n_range,
        residual,
        points,
        method,
        counts,
        frontier: Vec::new(),
        elapsed_ms: Vec::new(),
    })
}
