//! Randomized consistency checks on small systems, reproducible from a seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smallvec::smallvec;

use crate::error::Result;
use crate::extension::{count_trivial, SkewSystem};
use crate::groups::{Element, Group};
use crate::sft::Sft;
use crate::thermo::{equilibrium_measure, integrate_edge, measure_entropy, pressure, EdgePotential};

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn random_mixing(rng: &mut ChaCha8Rng) -> Sft {
    loop {
        let k = rng.gen_range(2..=4);
        let m: Vec<Vec<u8>> = (0..k)
            .map(|_| (0..k).map(|_| u8::from(rng.gen_bool(0.6))).collect())
            .collect();
        if let Ok(sft) = Sft::new(k, &m) {
            if sft.require_mixing().is_ok() {
                return sft;
            }
        }
    }
}

fn check(name: &str, passed: bool, detail: String) -> SelftestCheck {
    SelftestCheck {
        name: name.into(),
        passed,
        detail,
    }
}

/// Runs `rounds` random instances of each check.
pub fn selftest(seed: u64, rounds: usize) -> Result<Vec<SelftestCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for round in 0..rounds {
        let sft = random_mixing(&mut rng);
        let f = EdgePotential::from_fn(&sft, |_, _| rng.gen_range(-1.0..1.0));

        let p = pressure(&sft, &f)?;
        let mm = equilibrium_measure(&sft, &f)?;
        let defect = (p - measure_entropy(&mm) - integrate_edge(&mm, &f)).abs();
        out.push(check(
            "variational-principle",
            defect < 1e-9,
            format!("round {round}: defect {defect:e}"),
        ));

        let inv = mm.invariance_defect();
        out.push(check(
            "stationarity",
            inv < 1e-10,
            format!("round {round}: defect {inv:e}"),
        ));

        let c = rng.gen_range(-2.0..2.0);
        let shifted = pressure(&sft, &f.map(&sft, |_, _, v| v + c))?;
        let err = (shifted - p - c).abs();
        out.push(check(
            "constant-shift",
            err < 1e-9,
            format!("round {round}: error {err:e}"),
        ));

        let ids: Vec<_> = sft
            .edges()
            .into_iter()
            .map(|(i, j)| (i, j, Group::trivial().identity()))
            .collect();
        let trivial = SkewSystem::new(sft.clone(), Group::trivial(), ids)?;
        let n = rng.gen_range(1..=10);
        let a = count_trivial(&trivial, n)?;
        let b = sft.count_periodic_big(n)?;
        out.push(check(
            "trivial-group-counts",
            a == b,
            format!("round {round}: n = {n}, {a} vs {b}"),
        ));

        let labels: Vec<_> = sft
            .edges()
            .into_iter()
            .map(|(i, j)| (i, j, Element::Lattice(smallvec![rng.gen_range(-1..=1)])))
            .collect();
        let skew = SkewSystem::new(sft.clone(), Group::lattice(1), labels)?;
        let n = rng.gen_range(1..=8);
        let dp = count_trivial(&skew, n)?;
        let brute = sft
            .enumerate_loops(n)
            .filter(|lp| skew.holonomy(&lp.vertices) == skew.group().identity())
            .count();
        out.push(check(
            "lattice-counts-brute-force",
            dp == brute.into(),
            format!("round {round}: n = {n}, {dp} vs {brute}"),
        ));
    }
    Ok(out)
}
