//! The abelianized pressure function `β(w) = P(f + ⟨w, ψ^ab⟩)`, its
//! gradient (the winding cycle of the tilted equilibrium state) and its
//! minimum `h(Y) = β(ξ)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::{holonomy_cone_witness, CountSequence, SkewSystem};
use crate::linalg::{least_squares, solve};
use crate::thermo::{equilibrium_measure, integrate_edge_vec, pressure, EdgePotential, MarkovMeasure};

const HESSIAN_STEP: f64 = 1e-5;
const MAX_ITERATIONS: usize = 500;
const DIVERGENCE_RADIUS: f64 = 50.0;
const DIVERGENCE_WINDOW: usize = 50;
const ARMIJO: f64 = 1e-4;
const MIN_TAIL: usize = 8;

/// A `Z^a`-extension together with an optional base potential.
#[derive(Debug, Clone, PartialEq)]
pub struct AbelianData {
    skew_ab: SkewSystem,
    rank: usize,
    f: Option<EdgePotential>,
}

impl AbelianData {
    /// Abelianizes `skew` (a no-op for lattice groups).
    pub fn new(skew: &SkewSystem, f: Option<EdgePotential>) -> Result<Self> {
        if let Some(f) = &f {
            f.check(skew.base())?;
        }
        let skew_ab = skew.abelianized();
        let rank = skew_ab.ab_rank();
        Ok(AbelianData { skew_ab, rank, f })
    }

    pub fn skew(&self) -> &SkewSystem {
        &self.skew_ab
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn potential(&self) -> Option<&EdgePotential> {
        self.f.as_ref()
    }

    /// Same system with the base potential replaced.
    pub fn with_potential(&self, f: Option<EdgePotential>) -> Self {
        AbelianData {
            skew_ab: self.skew_ab.clone(),
            rank: self.rank,
            f,
        }
    }

    /// `f + ⟨w, ψ^ab⟩` as an edge potential.
    pub fn tilted(&self, w: &[f64]) -> Result<EdgePotential> {
        if w.len() != self.rank {
            return Err(Error::InvalidArgument(format!(
                "w has dimension {}, rank is {}",
                w.len(),
                self.rank
            )));
        }
        let sft = self.skew_ab.base();
        Ok(EdgePotential::from_fn(sft, |i, j| {
            let base = self.f.as_ref().map_or(0.0, |f| f.get(i, j));
            let psi = self.skew_ab.ab_label(i, j);
            base + w.iter().zip(psi.iter()).map(|(a, &b)| a * b as f64).sum::<f64>()
        }))
    }

    fn psi(&self, i: usize, j: usize) -> Vec<f64> {
        self.skew_ab.ab_label(i, j).iter().map(|&x| x as f64).collect()
    }
}

/// Minimizer of `β`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub xi: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
}

pub fn beta(data: &AbelianData, w: &[f64]) -> Result<f64> {
    pressure(data.skew_ab.base(), &data.tilted(w)?)
}

pub fn grad_beta(data: &AbelianData, w: &[f64]) -> Result<Vec<f64>> {
    let mm = equilibrium_measure(data.skew_ab.base(), &data.tilted(w)?)?;
    Ok(winding_cycle(&mm, data))
}

/// `∫ ψ^ab dμ`.
pub fn winding_cycle(mm: &MarkovMeasure, data: &AbelianData) -> Vec<f64> {
    integrate_edge_vec(mm, data.rank, |i, j| data.psi(i, j))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn hessian(data: &AbelianData, w: &[f64]) -> Result<Vec<f64>> {
    let a = w.len();
    let mut h = vec![0.0; a * a];
    for c in 0..a {
        let mut plus = w.to_vec();
        let mut minus = w.to_vec();
        plus[c] += HESSIAN_STEP;
        minus[c] -= HESSIAN_STEP;
        let (gp, gm) = (grad_beta(data, &plus)?, grad_beta(data, &minus)?);
        for r in 0..a {
            h[r * a + c] = (gp[r] - gm[r]) / (2.0 * HESSIAN_STEP);
        }
    }
    for r in 0..a {
        for c in r + 1..a {
            let s = 0.5 * (h[r * a + c] + h[c * a + r]);
            h[r * a + c] = s;
            h[c * a + r] = s;
        }
    }
    Ok(h)
}

/// Damped Newton with an Armijo gradient fallback. Fails with `NotFull`
/// when the holonomy cone lies in a closed half-space (the infimum is
/// then approached only at infinity) or when the iterates run off.
pub fn minimize_beta(data: &AbelianData, tol: f64) -> Result<CriticalPoint> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    if let Some(normal) = holonomy_cone_witness(&data.skew_ab) {
        return Err(Error::NotFull(format!(
            "all loop holonomies h satisfy <{normal:?}, h> >= 0"
        )));
    }
    let a = data.rank;
    let mut w = vec![0.0; a];
    let mut value = beta(data, &w)?;
    let mut grad = grad_beta(data, &w)?;
    let mut history: Vec<f64> = Vec::new();
    for it in 0..MAX_ITERATIONS {
        let gn = norm(&grad);
        if gn < tol {
            return Ok(CriticalPoint {
                xi: w,
                value,
                gradient_norm: gn,
                iterations: it,
            });
        }
        history.push(gn);
        if norm(&w) > DIVERGENCE_RADIUS && history.len() > DIVERGENCE_WINDOW {
            let before = history[history.len() - 1 - DIVERGENCE_WINDOW];
            if gn > before / 10.0 {
                return Err(Error::NotFull(format!("iterates diverge (|w| = {:.3})", norm(&w))));
            }
        }
        let newton = solve(hessian(data, &w)?, grad.iter().map(|g| -g).collect())
            .filter(|d| d.iter().zip(&grad).map(|(x, g)| x * g).sum::<f64>() < 0.0);
        let dir = newton.unwrap_or_else(|| grad.iter().map(|g| -g).collect());
        let slope: f64 = dir.iter().zip(&grad).map(|(x, g)| x * g).sum();
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = w.iter().zip(&dir).map(|(x, d)| x + t * d).collect();
            let v = beta(data, &trial)?;
            if v <= value + ARMIJO * t * slope {
                accepted = Some((trial, v, None));
                break;
            }
            // Near the minimum the decrease drops below rounding; accept a
            // step that still shrinks the gradient.
            if v <= value + 1e-14 * value.abs().max(1.0) {
                let g = grad_beta(data, &trial)?;
                if norm(&g) < gn {
                    accepted = Some((trial, v, Some(g)));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((next, v, g)) = accepted else {
            return Err(Error::MinimizationFailed {
                gradient_norm: gn,
                iterations: it,
            });
        };
        w = next;
        value = v;
        grad = match g {
            Some(g) => g,
            None => grad_beta(data, &w)?,
        };
    }
    Err(Error::MinimizationFailed {
        gradient_norm: norm(&grad),
        iterations: MAX_ITERATIONS,
    })
}

/// Fits `ln Z_n − n·rate_hint ≈ −κ ln n + c` over the nonzero terms in
/// `[n_max/2, n_max]` (or the last eight nonzero terms, if the window
/// holds fewer) and returns `κ`.
pub fn fit_lattice_correction(counts: &CountSequence, rate_hint: f64) -> Result<f64> {
    let n_max = counts.len();
    let nonzero: Vec<(f64, f64)> = (1..=n_max)
        .filter_map(|n| counts.ln(n).map(|y| (n as f64, y - n as f64 * rate_hint)))
        .collect();
    if nonzero.len() < MIN_TAIL {
        return Err(Error::TooFewPoints {
            found: nonzero.len(),
            needed: MIN_TAIL,
        });
    }
    let lo = (n_max / 2) as f64;
    let mut tail: Vec<(f64, f64)> = nonzero.iter().copied().filter(|p| p.0 >= lo).collect();
    if tail.len() < MIN_TAIL {
        tail = nonzero[nonzero.len() - MIN_TAIL..].to_vec();
    }
    let cols = vec![tail.iter().map(|p| p.0.ln()).collect(), vec![1.0; tail.len()]];
    let ys: Vec<f64> = tail.iter().map(|p| p.1).collect();
    let (coef, _) = least_squares(&cols, &ys).ok_or(Error::TooFewPoints {
        found: tail.len(),
        needed: MIN_TAIL,
    })?;
    Ok(-coef[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::{trivial_counts, Witness};
    use crate::groups::{Element, Group, DEFAULT_BALL_CAP};
    use crate::sft::Sft;
    use crate::thermo::MarkovMeasure;
    use smallvec::smallvec;

    fn z_example() -> AbelianData {
        let plus = Element::Lattice(smallvec![1]);
        let minus = Element::Lattice(smallvec![-1]);
        let skew =
            SkewSystem::by_source(Sft::full(3).unwrap(), Group::lattice(1), &[plus.clone(), plus, minus]).unwrap();
        AbelianData::new(&skew, None).unwrap()
    }

    fn lattice2() -> AbelianData {
        let labels = [[1, 0], [-1, 0], [0, 1], [0, -1]].map(|v| Element::Lattice(smallvec![v[0], v[1]]));
        let skew = SkewSystem::by_source(Sft::full(4).unwrap(), Group::lattice(2), &labels).unwrap();
        AbelianData::new(&skew, None).unwrap()
    }

    #[test]
    fn beta_closed_form() {
        let d = z_example();
        let w = -0.5 * 2f64.ln();
        assert!((beta(&d, &[w]).unwrap() - 1.5 * 2f64.ln()).abs() < 1e-12);
        assert!((beta(&lattice2(), &[0.0, 0.0]).unwrap() - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let d = z_example();
        assert!((grad_beta(&d, &[0.0]).unwrap()[0] - 1.0 / 3.0).abs() < 1e-12);
        for w in [-0.7, -0.2, 0.4] {
            let h = 1e-5;
            let fd = (beta(&d, &[w + h]).unwrap() - beta(&d, &[w - h]).unwrap()) / (2.0 * h);
            assert!((grad_beta(&d, &[w]).unwrap()[0] - fd).abs() < 1e-6);
        }
    }

    #[test]
    fn minimum_of_z_example() {
        let cp = minimize_beta(&z_example(), 1e-9).unwrap();
        assert!((cp.xi[0] + 0.5 * 2f64.ln()).abs() < 1e-6);
        assert!((cp.value - 1.5 * 2f64.ln()).abs() < 1e-9);
        let cp = minimize_beta(&lattice2(), 1e-9).unwrap();
        assert!(cp.xi.iter().all(|x| x.abs() < 1e-9));
        assert!((cp.value - 4f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn half_line_is_not_full() {
        let one = Element::Lattice(smallvec![1]);
        let skew = SkewSystem::by_source(Sft::full(2).unwrap(), Group::lattice(1), &[one.clone(), one]).unwrap();
        let d = AbelianData::new(&skew, None).unwrap();
        assert!(matches!(minimize_beta(&d, 1e-9), Err(Error::NotFull(_))));
        assert!(matches!(
            crate::extension::check_transitivity(&skew, 2).unwrap(),
            crate::extension::Transitivity::Intransitive(Witness::HalfSpace { .. })
        ));
    }

    #[test]
    fn winding_cycles() {
        let uniform = MarkovMeasure::bernoulli(&[1.0 / 3.0; 3]);
        assert!((winding_cycle(&uniform, &z_example())[0] - 1.0 / 3.0).abs() < 1e-15);
        let uniform4 = MarkovMeasure::bernoulli(&[0.25; 4]);
        assert!(winding_cycle(&uniform4, &lattice2()).iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn lattice_exponents() {
        let d = z_example();
        let c = trivial_counts(d.skew(), 60, DEFAULT_BALL_CAP).unwrap();
        let k = fit_lattice_correction(&CountSequence::Exact(c.counts), 1.5 * 2f64.ln()).unwrap();
        assert!((k - 0.5).abs() < 0.15, "{k}");
        let c = trivial_counts(lattice2().skew(), 40, DEFAULT_BALL_CAP).unwrap();
        let k = fit_lattice_correction(&CountSequence::Exact(c.counts), 4f64.ln()).unwrap();
        assert!((k - 1.0).abs() < 0.2, "{k}");
        let short = CountSequence::Exact(vec![1u8.into(); 5]);
        assert!(matches!(
            fit_lattice_correction(&short, 0.0),
            Err(Error::TooFewPoints { .. })
        ));
    }
}
