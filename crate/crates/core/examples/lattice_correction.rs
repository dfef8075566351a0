//! Polynomial correction n^{-a/2} in the trivial-holonomy counts of
//! Z^a-extensions, for a = 1 and a = 2.

use gurevich_lab::abelian::{fit_lattice_correction, minimize_beta, AbelianData};
use gurevich_lab::{trivial_counts, CountSequence, Group, Letter, Sft, SkewSystem};

fn kappa(k: usize, rank: usize, words: &[&str], n_max: usize) -> gurevich_lab::Result<(f64, f64)> {
    let g = Group::lattice(rank);
    let labels = words
        .iter()
        .map(|w| g.evaluate_word(&Letter::parse_word(w)?))
        .collect::<gurevich_lab::Result<Vec<_>>>()?;
    let skew = SkewSystem::by_source(Sft::full(k)?, g, &labels)?;
    let cp = minimize_beta(&AbelianData::new(&skew, None)?, 1e-12)?;
    let counts = trivial_counts(&skew, n_max, usize::MAX)?;
    Ok((
        cp.value,
        fit_lattice_correction(&CountSequence::Exact(counts.counts), cp.value)?,
    ))
}

fn main() -> gurevich_lab::Result<()> {
    let (h1, k1) = kappa(3, 1, &["a", "a", "A"], 60)?;
    println!("a = 1: h = {h1:.9}, kappa = {k1:.4} (target 0.5)");
    let (h2, k2) = kappa(4, 2, &["a", "A", "b", "B"], 60)?;
    println!("a = 2: h = {h2:.9}, kappa = {k2:.4} (target 1.0)");
    Ok(())
}
