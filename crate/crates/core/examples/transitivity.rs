//! Deciding whether a skew product is transitive, with certificates.

use gurevich_lab::{check_transitivity, Group, Letter, Sft, SkewSystem};

fn skew(k: usize, group: Group, words: &[&str]) -> gurevich_lab::Result<SkewSystem> {
    let labels = words
        .iter()
        .map(|w| group.evaluate_word(&Letter::parse_word(w)?))
        .collect::<gurevich_lab::Result<Vec<_>>>()?;
    SkewSystem::by_source(Sft::full(k)?, group, &labels)
}

fn main() -> gurevich_lab::Result<()> {
    let cases = [
        ("Z, +1 +1 -1", skew(3, Group::lattice(1), &["a", "a", "A"])?),
        ("Z, +1 +1", skew(2, Group::lattice(1), &["a", "a"])?),
        ("Z, +2 -2", skew(2, Group::lattice(1), &["aa", "AA"])?),
        ("Z^2, a b", skew(2, Group::lattice(2), &["a", "b"])?),
        ("F_2, a A b B", skew(4, Group::free(2), &["a", "A", "b", "B"])?),
        ("F_2, a b", skew(2, Group::free(2), &["a", "b"])?),
    ];
    for (name, s) in &cases {
        println!("{name:<14} {:?}", check_transitivity(s, 6)?);
    }
    Ok(())
}
