//! Periodic orbits of a suspension flow over the golden mean shift and of
//! the flow lifted to a Z-cover of the full 3-shift.

use gurevich_lab::abelian::AbelianData;
use gurevich_lab::suspension::{
    cover_entropy_abelian, cover_entropy_counting, flow_entropy, flow_orbit_table, FlowOptions, Suspension,
};
use gurevich_lab::{EdgePotential, Group, Letter, Sft, SkewSystem};

fn main() -> gurevich_lab::Result<()> {
    let gm = Sft::new(2, &[vec![1, 1], vec![1, 0]])?;
    let roof = EdgePotential::from_fn(&gm, |i, j| if (i, j) == (1, 0) { 2.0 } else { 1.0 });
    let susp = Suspension::new(gm, roof)?;
    println!("golden mean flow entropy {:.9}", flow_entropy(&susp)?);
    let ts: Vec<f64> = (1..=12).map(f64::from).collect();
    for row in flow_orbit_table(&susp, None, &ts, &FlowOptions::default())? {
        println!("  T = {:>2}  prime orbits {}", row.t, row.count_all);
    }

    let z = Group::lattice(1);
    let labels = ["a", "a", "A"]
        .iter()
        .map(|w| z.evaluate_word(&Letter::parse_word(w)?))
        .collect::<gurevich_lab::Result<Vec<_>>>()?;
    let skew = SkewSystem::by_source(Sft::full(3)?, z, &labels)?;
    let base = Suspension::constant(Sft::full(3)?, 1.0)?;
    let data = AbelianData::new(&skew, None)?;
    println!(
        "Z-cover entropy, root equation {:.9}",
        cover_entropy_abelian(&base, &data)?
    );
    println!(
        "Z-cover entropy, counting      {:.4}",
        cover_entropy_counting(&base, &skew, 40)?.rate
    );
    Ok(())
}
