mod common;

use gurevich_lab::abelian::{beta, grad_beta, minimize_beta, winding_cycle, AbelianData};
use gurevich_lab::equidist::{averaged_empirical, ld_ratio, orbit_empirical};
use gurevich_lab::suspension::{count_flow_orbits, cover_entropy_abelian, flow_entropy, Suspension};
use gurevich_lab::thermo::{equilibrium_measure, pressure, pressure_root};
use gurevich_lab::{
    count_trivial, estimate_gurevich, truncated_transfer_spr, EdgePotential, Element, Group, Letter, Sft, SkewSystem,
};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mixing(seed: u64, max_k: usize) -> Sft {
    common::random_mixing(&mut ChaCha8Rng::seed_from_u64(seed), max_k)
}

fn potential(sft: &Sft, values: &[f64]) -> EdgePotential {
    let k = sft.alphabet_size();
    EdgePotential::from_fn(sft, |i, j| values[(i * k + j) % values.len()])
}

fn s3() -> Group {
    // Permutations of {0,1,2} in lexicographic order; entry [a][b] is a∘b.
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let idx = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
    let table = (0..6)
        .map(|a| (0..6).map(|b| idx([0, 1, 2].map(|x| perms[a][perms[b][x]]))).collect())
        .collect();
    Group::finite(table, 0).unwrap()
}

fn groups() -> Vec<Group> {
    vec![
        Group::lattice(2),
        Group::free(2),
        Group::heisenberg(),
        s3(),
        Group::cyclic(5).unwrap(),
    ]
}

fn word(group: &Group, raw: &[(u8, bool)]) -> Vec<Letter> {
    let g = group.generators().len().max(1);
    raw.iter().map(|&(x, inv)| Letter::new(x as usize % g, inv)).collect()
}

fn element(group: &Group, raw: &[(u8, bool)]) -> Element {
    group.evaluate_word(&word(group, raw)).unwrap()
}

fn raw_word() -> impl Strategy<Value = Vec<(u8, bool)>> {
    prop::collection::vec((any::<u8>(), any::<bool>()), 0..8)
}

fn skew_from_words(sft: Sft, group: Group, words: &[&str]) -> SkewSystem {
    let labels: Vec<Element> = words
        .iter()
        .map(|w| group.evaluate_word(&Letter::parse_word(w).unwrap()).unwrap())
        .collect();
    SkewSystem::by_source(sft, group, &labels).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn periodic_counts_match_enumeration(seed in any::<u64>(), n in 1usize..=9) {
        let sft = mixing(seed, 5);
        prop_assert_eq!(sft.count_periodic(n).unwrap(), sft.enumerate_loops(n).count() as u64);
    }

    #[test]
    fn entropy_is_permutation_invariant(seed in any::<u64>(), rot in 0usize..6) {
        let sft = mixing(seed, 6);
        let k = sft.alphabet_size();
        let perm: Vec<usize> = (0..k).map(|i| (i + rot) % k).rev().collect();
        let h = sft.topological_entropy().unwrap();
        prop_assert!((sft.permuted(&perm).unwrap().topological_entropy().unwrap() - h).abs() < 1e-10);
    }

    #[test]
    fn pressure_laws(seed in any::<u64>(), vals in prop::collection::vec(-2.0f64..2.0, 36),
                     bump in prop::collection::vec(0.0f64..1.0, 36), u in prop::collection::vec(-3.0f64..3.0, 6),
                     c in -5.0f64..5.0) {
        let sft = mixing(seed, 6);
        let f = potential(&sft, &vals);
        let p = pressure(&sft, &f).unwrap();
        let k = sft.alphabet_size();
        let g = EdgePotential::from_fn(&sft, |i, j| f.get(i, j) + bump[i * k + j]);
        prop_assert!(pressure(&sft, &g).unwrap() >= p - 1e-12);
        let shifted = EdgePotential::from_fn(&sft, |i, j| f.get(i, j) + c);
        prop_assert!((pressure(&sft, &shifted).unwrap() - p - c).abs() < 1e-10);
        let cob = EdgePotential::from_fn(&sft, |i, j| f.get(i, j) + u[j] - u[i]);
        prop_assert!((pressure(&sft, &cob).unwrap() - p).abs() < 1e-9);
    }

    #[test]
    fn pressure_root_is_a_zero(seed in any::<u64>(), roof in prop::collection::vec(0.2f64..3.0, 36),
                               vals in prop::collection::vec(-1.0f64..1.0, 36)) {
        let sft = mixing(seed, 5);
        let r = potential(&sft, &roof);
        let f = potential(&sft, &vals);
        let s = pressure_root(&sft, &r, Some(&f)).map_err(|e| TestCaseError::fail(format!("{e:?}")))?;
        let g = EdgePotential::from_fn(&sft, |i, j| f.get(i, j) - s * r.get(i, j));
        prop_assert!(pressure(&sft, &g).unwrap().abs() < 1e-8);
    }

    #[test]
    fn group_axioms(a in raw_word(), b in raw_word(), c in raw_word()) {
        for g in groups() {
            let (x, y, z) = (element(&g, &a), element(&g, &b), element(&g, &c));
            let e = g.identity();
            prop_assert_eq!(
                g.multiply(&g.multiply(&x, &y).unwrap(), &z).unwrap(),
                g.multiply(&x, &g.multiply(&y, &z).unwrap()).unwrap()
            );
            prop_assert_eq!(g.multiply(&x, &e).unwrap(), x.clone());
            prop_assert_eq!(g.multiply(&e, &x).unwrap(), x.clone());
            prop_assert_eq!(g.multiply(&x, &g.inverse(&x).unwrap()).unwrap(), e);
            let ab = g.abelianization();
            let xy = g.multiply(&x, &y).unwrap();
            let sum: Vec<i64> = ab.apply(&x).iter().zip(ab.apply(&y).iter()).map(|(p, q)| p + q).collect();
            prop_assert_eq!(ab.apply(&xy).to_vec(), sum);
        }
    }

    #[test]
    fn free_reduction_is_confluent(raw in raw_word(), at in any::<usize>()) {
        let g = Group::free(2);
        let mut w = word(&g, &raw);
        let full = g.evaluate_word(&w).unwrap();
        let pos = at % (w.len() + 1);
        let l = Letter::new(at % 2, at % 3 == 0);
        w.insert(pos, Letter::new(l.generator, !l.inverse));
        w.insert(pos, l);
        prop_assert_eq!(g.evaluate_word(&w).unwrap(), full);
    }

    #[test]
    fn abelian_domination(seed in any::<u64>(), n in 1usize..=8) {
        let sft = mixing(seed, 4);
        let words: Vec<&str> = ["a", "B", "A", "b"].iter().cycle().take(sft.alphabet_size()).copied().collect();
        let skew = skew_from_words(sft, Group::free(2), &words);
        prop_assert!(count_trivial(&skew, n).unwrap() <= count_trivial(&skew.abelianized(), n).unwrap());
    }

    #[test]
    fn beta_is_convex_and_differentiable(w1 in prop::collection::vec(-1.0f64..1.0, 2),
                                         w2 in prop::collection::vec(-1.0f64..1.0, 2), t in 0.01f64..0.99) {
        let skew = skew_from_words(Sft::full(4).unwrap(), Group::lattice(2), &["a", "aB", "A", "b"]);
        let data = AbelianData::new(&skew, None).unwrap();
        let mix: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        let (b1, b2) = (beta(&data, &w1).unwrap(), beta(&data, &w2).unwrap());
        prop_assert!(beta(&data, &mix).unwrap() <= t * b1 + (1.0 - t) * b2 + 1e-9);
        let grad = grad_beta(&data, &w1).unwrap();
        let h = 1e-6;
        for i in 0..2 {
            let mut up = w1.clone();
            let mut dn = w1.clone();
            up[i] += h;
            dn[i] -= h;
            let fd = (beta(&data, &up).unwrap() - beta(&data, &dn).unwrap()) / (2.0 * h);
            prop_assert!((grad[i] - fd).abs() < 1e-6, "{} vs {}", grad[i], fd);
        }
    }

    #[test]
    fn flow_scaling_and_counting(seed in any::<u64>()) {
        let sft = mixing(seed, 4);
        let h = sft.topological_entropy().unwrap();
        for c in [1.0, 2.0, 3.0] {
            let s = Suspension::constant(sft.clone(), c).unwrap();
            prop_assert!((flow_entropy(&s).unwrap() - h / c).abs() < 1e-9);
        }
        let s = Suspension::constant(sft.clone(), 1.0).unwrap();
        let words: Vec<&str> = ["a", "A"].iter().cycle().take(sft.alphabet_size()).copied().collect();
        let skew = skew_from_words(sft.clone(), Group::lattice(1), &words);
        let mut last = BigUint::default();
        for t in 1..=9 {
            let all = count_flow_orbits(&s, t as f64, None).unwrap();
            let filtered = count_flow_orbits(&s, t as f64, Some(&skew)).unwrap();
            prop_assert!(all >= last);
            prop_assert!(filtered <= all);
            last = all;
        }
        if let Ok(v) = cover_entropy_abelian(&s, &AbelianData::new(&skew, None).unwrap()) {
            prop_assert!(v <= flow_entropy(&s).unwrap() + 1e-8);
        }
    }
}

#[test]
fn mobius_identity_for_unit_roof() {
    for seed in 0..5 {
        let sft = mixing(seed, 5);
        let s = Suspension::constant(sft.clone(), 1.0).unwrap();
        let primes: Vec<BigUint> = (0..=10)
            .map(|n| {
                if n == 0 {
                    BigUint::default()
                } else {
                    count_flow_orbits(&s, n as f64, None).unwrap()
                }
            })
            .collect();
        for n in 1..=10usize {
            let total: BigUint = (1..=n)
                .filter(|d| n % d == 0)
                .map(|d| BigUint::from(d) * (&primes[d] - &primes[d - 1]))
                .sum();
            assert_eq!(total, sft.count_periodic_big(n).unwrap(), "seed {seed} n {n}");
        }
    }
}

#[test]
fn transfer_bounds() {
    let f2 = skew_from_words(Sft::full(4).unwrap(), Group::free(2), &["a", "A", "b", "B"]);
    let p = 4f64.ln();
    let mut last = f64::NEG_INFINITY;
    for r in 1..=6 {
        let v = truncated_transfer_spr(&f2, None, r, 1_000_000).unwrap();
        assert!(v >= last && v <= p + 1e-9);
        let n = 2 * r;
        let lower = (count_trivial(&f2, n).unwrap().to_string().parse::<f64>().unwrap()).ln() / n as f64;
        // The truncated operator contains every loop of length 2R, so this
        // holds up to the Perron eigenvector normalization.
        assert!(v >= lower - (8.0f64).ln() / n as f64, "R = {r}: {v} vs {lower}");
        last = v;
    }
}

#[test]
fn gurevich_rate_below_base_pressure() {
    for name in ["paper_z", "lattice2_symmetric", "f2_gurevich"] {
        let skew = common::load(name).build().unwrap().skew;
        let est = estimate_gurevich(&skew, 30, None).unwrap();
        let p = skew.base().topological_entropy().unwrap();
        assert!(est.rate <= p + 0.02, "{name}: {} vs {p}", est.rate);
    }
}

#[test]
fn duality_and_winding_corollary() {
    for (name, base_equal) in [("paper_z", false), ("lattice2_symmetric", true)] {
        let b = common::load(name).build().unwrap();
        let data = AbelianData::new(&b.skew, None).unwrap();
        let cp = minimize_beta(&data, 1e-12).unwrap();
        let est = estimate_gurevich(&b.skew.abelianized(), 40, None).unwrap();
        assert!((cp.value - est.rate).abs() < 0.02, "{name}");
        let h = b.sft.topological_entropy().unwrap();
        let mm = equilibrium_measure(&b.sft, &EdgePotential::zero(&b.sft)).unwrap();
        let wc = winding_cycle(&mm, &data);
        assert_eq!((cp.value - h).abs() < 1e-9, base_equal, "{name}");
        assert_eq!(wc.iter().all(|x| x.abs() < 1e-9), base_equal, "{name}");
    }
}

#[test]
fn equidistribution_properties() {
    let b = common::load("z_ld").build().unwrap();
    let data = AbelianData::new(&b.skew, None).unwrap();
    let obs = b.observable.unwrap();
    let mut prev = f64::INFINITY;
    let target = {
        let (_, mm) = gurevich_lab::equidist::tilted_equilibrium(&data).unwrap();
        gurevich_lab::equidist::EmpiricalEdgeMeasure::from_markov(&mm)
    };
    for n in (12..=30).step_by(2) {
        let tv = averaged_empirical(&b.skew, n).unwrap().total_variation(&target);
        assert!(tv <= prev + 0.02, "n = {n}");
        prev = tv;
        assert!(ld_ratio(&b.skew, n, &data, &obs, 0.05).unwrap() <= 0.0);
    }
    assert_eq!(ld_ratio(&b.skew, 4, &data, &obs, 0.9).unwrap(), f64::NEG_INFINITY);

    let n = 6;
    let avg = averaged_empirical(&b.skew, n).unwrap();
    let loops: Vec<_> = b
        .sft
        .enumerate_loops(n)
        .filter(|lp| b.skew.holonomy(&lp.vertices) == b.skew.group().identity())
        .collect();
    for i in 0..3 {
        for j in 0..3 {
            let mean = loops.iter().map(|lp| orbit_empirical(lp).get(i, j)).sum::<f64>() / loops.len() as f64;
            assert!((avg.get(i, j) - mean).abs() < 1e-12);
        }
    }
}
