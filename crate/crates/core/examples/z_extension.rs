//! The Z-extension of the full 3-shift with psi = +1, +1, -1: the
//! counting estimate of the Gurevich entropy against the minimum of the
//! abelian pressure function, both below log 3.

use gurevich_lab::abelian::{minimize_beta, AbelianData};
use gurevich_lab::{estimate_gurevich, Element, Group, Sft, SkewSystem};
use smallvec::smallvec;

fn main() -> gurevich_lab::Result<()> {
    let n_max: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(48);
    let per_symbol = [
        Element::Lattice(smallvec![1]),
        Element::Lattice(smallvec![1]),
        Element::Lattice(smallvec![-1]),
    ];
    let skew = SkewSystem::by_source(Sft::full(3)?, Group::lattice(1), &per_symbol)?;
    let est = estimate_gurevich(&skew, n_max, None)?;
    let cp = minimize_beta(&AbelianData::new(&skew, None)?, 1e-12)?;
    println!(
        "counting estimate  {:.6} (kappa {:.3}, n in {:?})",
        est.rate, est.poly_exponent, est.n_range
    );
    println!("abelian minimum    {:.12} at xi = {:.9}", cp.value, cp.xi[0]);
    println!("(3/2) ln 2         {:.12}", 1.5 * std::f64::consts::LN_2);
    println!("ln 3               {:.12}", 3f64.ln());
    Ok(())
}
