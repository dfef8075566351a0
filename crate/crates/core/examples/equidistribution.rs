//! Trivial-holonomy loops of the Z-extension equidistribute to the
//! tilted equilibrium state; deviations of a symbol frequency are rare.

use gurevich_lab::abelian::AbelianData;
use gurevich_lab::equidist::{equidistribution_distance, ld_ratio, tilted_equilibrium};
use gurevich_lab::{EdgePotential, Group, Letter, Sft, SkewSystem};

fn main() -> gurevich_lab::Result<()> {
    let z = Group::lattice(1);
    let labels = ["a", "a", "A"]
        .iter()
        .map(|w| z.evaluate_word(&Letter::parse_word(w)?))
        .collect::<gurevich_lab::Result<Vec<_>>>()?;
    let skew = SkewSystem::by_source(Sft::full(3)?, z, &labels)?;
    let data = AbelianData::new(&skew, None)?;
    let (xi, mm) = tilted_equilibrium(&data)?;
    println!("xi = {:.9}, stationary = {:?}", xi[0], mm.stationary);
    let freq0 = EdgePotential::from_vertex(skew.base(), &[1.0, 0.0, 0.0])?;
    for n in [6, 12, 24] {
        let tv = equidistribution_distance(&skew, n, &data)?;
        let ld = ld_ratio(&skew, n, &data, &freq0, 0.05)?;
        println!("n = {n:>2}  TV = {tv:.6}  ld = {ld:.6}");
    }
    Ok(())
}
