//! Truncations of the transfer operator of a skew product to finite
//! balls in the group.

use std::collections::HashMap;

use super::SkewSystem;
use crate::error::Result;
use crate::groups::Element;
use crate::linalg::perron_log;
use crate::thermo::EdgePotential;

/// `log` spectral radius of the `e^f`-weighted adjacency restricted to
/// states `(v, g)` with `g ∈ ball(radius)`. Transitions leaving the ball
/// are deleted, so the value is nondecreasing in `radius`.
pub fn truncated_transfer_spr(skew: &SkewSystem, f: Option<&EdgePotential>, radius: usize, cap: usize) -> Result<f64> {
    let sft = skew.base();
    let zero;
    let f = match f {
        Some(f) => f,
        None => {
            zero = EdgePotential::zero(sft);
            &zero
        }
    };
    f.check(sft)?;
    let k = sft.alphabet_size();
    let ball = skew.group().ball(radius, cap)?;
    let index: HashMap<&Element, usize> = ball.iter().enumerate().map(|(i, g)| (g, i)).collect();
    let edges = sft.edges();
    let mut triples = Vec::with_capacity(ball.len() * edges.len());
    for (gi, g) in ball.iter().enumerate() {
        for &(i, j) in &edges {
            let h = skew.group().mul(g, skew.label(i, j));
            if let Some(&hi) = index.get(&h) {
                triples.push((gi * k + i, hi * k + j, f.get(i, j)));
            }
        }
    }
    Ok(perron_log(ball.len() * k, &triples)?.log_lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::tests::{f2_walk, z_example};
    use crate::groups::{Group, DEFAULT_BALL_CAP};
    use crate::sft::Sft;
    use crate::thermo::pressure;

    #[test]
    fn trivial_group_is_pressure() {
        let sft = Sft::new(3, &[vec![1, 1, 0], vec![1, 0, 1], vec![1, 1, 1]]).unwrap();
        let skew = SkewSystem::by_source(sft.clone(), Group::trivial(), &vec![Group::trivial().identity(); 3]).unwrap();
        let f = EdgePotential::from_fn(&sft, |i, j| 0.1 * i as f64 - 0.3 * j as f64);
        let t = truncated_transfer_spr(&skew, Some(&f), 3, DEFAULT_BALL_CAP).unwrap();
        assert_eq!(t.to_bits(), pressure(&sft, &f).unwrap().to_bits());
    }

    #[test]
    fn monotone_and_bounded() {
        let skew = z_example();
        let mut last = f64::NEG_INFINITY;
        for r in [4, 8, 16] {
            let v = truncated_transfer_spr(&skew, None, r, DEFAULT_BALL_CAP).unwrap();
            assert!(v >= last - 1e-12);
            assert!(v <= 3f64.ln() + 1e-9);
            last = v;
        }
    }

    #[test]
    fn free_group_gap() {
        let v = truncated_transfer_spr(&f2_walk(), None, 6, DEFAULT_BALL_CAP).unwrap();
        assert!(v < 4f64.ln() - 0.05);
    }
}
