//! Non-amenable gap: the free group on two generators over the full
//! 4-shift. Trivial-holonomy loops are closed walks in the 4-regular
//! tree, whose growth is log(2 sqrt 3), strictly below log 4.

use gurevich_lab::extension::count_trivial_radial_free;
use gurevich_lab::{
    estimate_gurevich_with, truncated_transfer_spr, CountMethod, CountOptions, Group, Letter, Sft, SkewSystem,
};

fn main() -> gurevich_lab::Result<()> {
    let f2 = Group::free(2);
    let labels = ["a", "A", "b", "B"]
        .iter()
        .map(|w| f2.evaluate_word(&Letter::parse_word(w)?))
        .collect::<gurevich_lab::Result<Vec<_>>>()?;
    let skew = SkewSystem::by_source(Sft::full(4)?, f2, &labels)?;

    for n in [2, 4, 6, 8, 10] {
        println!("Z_{n:<2} = {}", count_trivial_radial_free(&skew, n)?);
    }
    let options = CountOptions {
        method: CountMethod::Radial,
        ..CountOptions::default()
    };
    let est = estimate_gurevich_with(&skew, 60, None, options)?;
    println!(
        "rate {:.6}  vs  log(2 sqrt 3) = {:.6}",
        est.rate,
        (2.0 * 3f64.sqrt()).ln()
    );

    for r in [2, 4, 6, 8] {
        let v = truncated_transfer_spr(&skew, None, r, 1_000_000)?;
        println!("truncated transfer R = {r}: {v:.6}");
    }
    println!("log 4 = {:.6}", 4f64.ln());
    Ok(())
}
