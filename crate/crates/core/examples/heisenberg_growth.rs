//! Trivial-holonomy growth of the Heisenberg extension of the full
//! 4-shift, compared with the abelianized value `log 4`.

use gurevich_lab::abelian::{minimize_beta, AbelianData};
use gurevich_lab::{estimate_gurevich, Group, Letter, Sft, SkewSystem};

fn main() -> gurevich_lab::Result<()> {
    let n_max: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(32);
    let h = Group::heisenberg();
    let labels = ["a", "A", "b", "B"]
        .iter()
        .map(|w| h.evaluate_word(&Letter::parse_word(w)?))
        .collect::<gurevich_lab::Result<Vec<_>>>()?;
    let skew = SkewSystem::by_source(Sft::full(4)?, h, &labels)?;
    let start = std::time::Instant::now();
    let est = estimate_gurevich(&skew, n_max, None)?;
    let ab = minimize_beta(&AbelianData::new(&skew, None)?, 1e-9)?;
    println!("n_max          {n_max}");
    println!("rate           {:.6}", est.rate);
    println!("kappa          {:.4}", est.poly_exponent);
    println!("abelian value  {:.6}", ab.value);
    println!("frontier       {}", est.frontier.last().copied().unwrap_or(0));
    println!("elapsed        {:.1?}", start.elapsed());
    Ok(())
}
