//! Fitting `Z_n ≈ C e^{rate·n} n^{-κ}` to trivial-holonomy counts.

use std::time::Instant;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};

use super::{radial_counts, radial_shape, trivial_counts, weighted_trivial_counts, SkewSystem};
use crate::error::{Error, Result};
use crate::groups::DEFAULT_BALL_CAP;
use crate::linalg::least_squares;
use crate::thermo::EdgePotential;

/// How the counts behind an estimate are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMethod {
    /// Radial DP when the free-group shape applies and no potential is
    /// given, ball DP otherwise.
    Auto,
    BallDp,
    Radial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountOptions {
    pub method: CountMethod,
    pub cap: usize,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            method: CountMethod::Auto,
            cap: DEFAULT_BALL_CAP,
        }
    }
}

/// Raw counts `Z_1, ..., Z_{n_max}`.
#[derive(Debug, Clone, PartialEq)]
pub enum CountSequence {
    Exact(Vec<BigUint>),
    Weighted(Vec<f64>),
}

impl CountSequence {
    pub fn len(&self) -> usize {
        match self {
            CountSequence::Exact(v) => v.len(),
            CountSequence::Weighted(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `ln Z_n`, `None` when `Z_n = 0`.
    pub fn ln(&self, n: usize) -> Option<f64> {
        match self {
            CountSequence::Exact(v) => {
                let z = &v[n - 1];
                (!z.is_zero()).then(|| ln_big(z))
            }
            CountSequence::Weighted(v) => (v[n - 1] > 0.0).then(|| v[n - 1].ln()),
        }
    }

    /// Decimal rendering of `Z_n`.
    pub fn render(&self, n: usize) -> String {
        match self {
            CountSequence::Exact(v) => v[n - 1].to_string(),
            CountSequence::Weighted(v) => format!("{:.12e}", v[n - 1]),
        }
    }
}

impl Serialize for CountSequence {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rendered: Vec<String> = (1..=self.len()).map(|n| self.render(n)).collect();
        rendered.serialize(s)
    }
}

/// Natural log of a big integer without overflowing `f64`.
pub(crate) fn ln_big(z: &BigUint) -> f64 {
    let bits = z.bits();
    if bits <= 1000 {
        return z.to_f64().expect("finite for < 1000 bits").ln();
    }
    let shift = bits - 64;
    let top = (z >> shift).to_f64().expect("64-bit prefix");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthEstimate {
    /// Fitted exponential rate.
    pub rate: f64,
    /// Fitted `κ` in `n^{-κ}`.
    pub poly_exponent: f64,
    pub intercept: f64,
    /// Fitting window, inclusive.
    pub n_range: (usize, usize),
    /// RMS residual of `ln Z_n` over the window.
    pub residual: f64,
    pub points: usize,
    pub method: CountMethod,
    pub counts: CountSequence,
    /// Distinct group elements in the DP frontier per `n` (empty for the
    /// radial method).
    pub frontier: Vec<usize>,
    /// Milliseconds since the start of counting when each `Z_n` was ready.
    #[serde(skip)]
    pub elapsed_ms: Vec<f64>,
}

/// Least squares for `y = rate·x − κ ln x + c`; returns `(rate, κ, c, rms)`.
pub fn fit_growth(points: &[(f64, f64)]) -> Result<(f64, f64, f64, f64)> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints {
            found: points.len(),
            needed: 3,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let cols = vec![xs.clone(), xs.iter().map(|x| x.ln()).collect(), vec![1.0; xs.len()]];
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (coef, rms) = least_squares(&cols, &ys).ok_or(Error::TooFewPoints {
        found: points.len(),
        needed: 3,
    })?;
    Ok((coef[0], -coef[1], coef[2], rms))
}

/// Upper half `[n_max/2, n_max]` of the nonzero terms, fitted.
#[allow(clippy::type_complexity)]
pub(crate) fn fit_window(counts: &CountSequence, n_max: usize) -> Result<(f64, f64, f64, f64, (usize, usize), usize)> {
    if (1..=n_max).all(|n| counts.ln(n).is_none()) {
        return Err(Error::AllZeroCounts { lo: 1, hi: n_max });
    }
    let lo = (n_max / 2).max(1);
    let points: Vec<(f64, f64)> = (lo..=n_max)
        .filter_map(|n| counts.ln(n).map(|y| (n as f64, y)))
        .collect();
    let (rate, kappa, c, rms) = fit_growth(&points)?;
    Ok((rate, kappa, c, rms, (lo, n_max), points.len()))
}

/// Estimates the Gurevič entropy (or pressure, when `f` is given) of the
/// extension from exact counts up to `n_max`.
pub fn estimate_gurevich(skew: &SkewSystem, n_max: usize, f: Option<&EdgePotential>) -> Result<GrowthEstimate> {
    estimate_gurevich_with(skew, n_max, f, CountOptions::default())
}

pub fn estimate_gurevich_with(
    skew: &SkewSystem,
    n_max: usize,
    f: Option<&EdgePotential>,
    options: CountOptions,
) -> Result<GrowthEstimate> {
    if n_max < 3 {
        return Err(Error::InvalidArgument("n_max must be at least 3".into()));
    }
    let method = match options.method {
        CountMethod::Auto if f.is_none() && radial_shape(skew).is_ok() => CountMethod::Radial,
        CountMethod::Auto => CountMethod::BallDp,
        m => m,
    };
    let start = Instant::now();
    let (counts, frontier, elapsed_ms) = match (method, f) {
        (CountMethod::Radial, None) => {
            let c = radial_counts(skew, n_max)?;
            let t = start.elapsed().as_secs_f64() * 1e3;
            (CountSequence::Exact(c), Vec::new(), vec![t; n_max])
        }
        (CountMethod::Radial, Some(_)) => {
            return Err(Error::UnsupportedShape("radial counting is unweighted".into()));
        }
        (_, None) => {
            let c = trivial_counts(skew, n_max, options.cap)?;
            (CountSequence::Exact(c.counts), c.frontier, c.elapsed_ms)
        }
        (_, Some(f)) => {
            let c = weighted_trivial_counts(skew, n_max, f, options.cap)?;
            (CountSequence::Weighted(c.counts), c.frontier, c.elapsed_ms)
        }
    };
    let mut est = estimate_from_counts(counts, frontier, method)?;
    est.elapsed_ms = elapsed_ms;
    Ok(est)
}

/// Fits precomputed counts `Z_1..Z_{n_max}`.
pub fn estimate_from_counts(
    counts: CountSequence,
    frontier: Vec<usize>,
    method: CountMethod,
) -> Result<GrowthEstimate> {
    let n_max = counts.len();
    if n_max < 3 {
        return Err(Error::InvalidArgument("n_max must be at least 3".into()));
    }
    let (rate, poly_exponent, intercept, residual, n_range, points) = fit_window(&counts, n_max)?;
    Ok(GrowthEstimate {
        rate,
        poly_exponent,
        intercept,
        n_range,
        residual,
        points,
        method,
        counts,
        frontier,
        elapsed_ms: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::tests::{f2_walk, z_example};
    use crate::groups::Group;
    use crate::sft::Sft;

    #[test]
    fn ln_big_matches_f64() {
        let z = BigUint::from(3u8).pow(40);
        assert!((ln_big(&z) - 40.0 * 3f64.ln()).abs() < 1e-12);
        let huge = BigUint::from(2u8).pow(5000);
        assert!((ln_big(&huge) - 5000.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn z_example_rate() {
        let est = estimate_gurevich(&z_example(), 48, None).unwrap();
        assert!((est.rate - 1.5 * 2f64.ln()).abs() < 0.02, "{est:?}");
        assert!((est.poly_exponent - 0.5).abs() < 0.1);
        assert_eq!(est.method, CountMethod::BallDp);
    }

    #[test]
    fn free_rate_uses_radial() {
        let est = estimate_gurevich(&f2_walk(), 60, None).unwrap();
        assert_eq!(est.method, CountMethod::Radial);
        assert!((est.rate - (2.0 * 3f64.sqrt()).ln()).abs() < 0.03);
    }

    #[test]
    fn trivial_group_rate() {
        let g = Group::trivial();
        let skew = SkewSystem::by_source(Sft::full(3).unwrap(), g.clone(), &vec![g.identity(); 3]).unwrap();
        let est = estimate_gurevich(&skew, 20, None).unwrap();
        assert!((est.rate - 3f64.ln()).abs() < 1e-9);
        assert!(est.poly_exponent.abs() < 1e-6);
    }

    #[test]
    fn all_zero_counts() {
        let z = Group::lattice(1);
        let one = z.generators()[0].clone();
        let skew = SkewSystem::by_source(Sft::full(2).unwrap(), z, &[one.clone(), one]).unwrap();
        assert!(matches!(
            estimate_gurevich(&skew, 10, None),
            Err(Error::AllZeroCounts { .. })
        ));
    }
}
