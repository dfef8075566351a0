//! Pressure and equilibrium state of a potential on the golden mean shift.

use gurevich_lab::thermo::{equilibrium_measure, integrate_edge, measure_entropy, pressure};
use gurevich_lab::{EdgePotential, Sft};

fn main() -> gurevich_lab::Result<()> {
    let sft = Sft::new(2, &[vec![1, 1], vec![1, 0]])?;
    println!("h_top = {:.12}", sft.topological_entropy()?);
    let f = EdgePotential::from_vertex(&sft, &[0.5, -0.25])?;
    let p = pressure(&sft, &f)?;
    let mm = equilibrium_measure(&sft, &f)?;
    let h = measure_entropy(&mm);
    let int = integrate_edge(&mm, &f);
    println!("P(f) = {p:.12}");
    println!("h(mu) + int f = {:.12}", h + int);
    println!("stationary = {:?}", mm.stationary);
    for (i, j) in sft.edges() {
        println!("  P({i} -> {j}) = {:.6}", mm.transition(i, j));
    }
    Ok(())
}
