//! Transitivity of skew products.
//!
//! For `Z^a` the test is exact: the loop holonomies must generate the
//! lattice and must not lie in a closed half-space. Finite groups are
//! decided by exhaustive search. For other infinite groups the search is
//! confined to a ball and may end in `Unknown`.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;

use super::SkewSystem;
use crate::error::{Error, Result};
use crate::groups::{Element, GroupKind, DEFAULT_BALL_CAP};

const MAX_SIMPLE_CYCLES: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Witness {
    /// Every loop holonomy `h` satisfies `<normal, h> >= 0`.
    HalfSpace { normal: Vec<i64> },
    /// Loop holonomies span a proper sublattice (`index` is `None` when
    /// the rank is deficient).
    NotGenerating { index: Option<u64> },
    /// A state never reached from `(0, e)`.
    Unreached { vertex: usize, element: Element },
    /// The abelianized extension is already intransitive.
    AbelianFactor(Box<Witness>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Transitivity {
    Transitive,
    Intransitive(Witness),
    Unknown { depth: usize },
}

/// Decides (or semi-decides, for infinite non-abelian groups) whether
/// `T_ψ` is transitive. `depth` bounds the ball searched in the latter case.
pub fn check_transitivity(skew: &SkewSystem, depth: usize) -> Result<Transitivity> {
    if !skew.base().irreducibility().irreducible {
        return Err(Error::NotIrreducible);
    }
    match skew.group().kind() {
        GroupKind::Lattice { .. } => Ok(lattice_transitivity(skew)),
        GroupKind::Finite { table, .. } => {
            let n = table.len();
            let all: Vec<Element> = (0..n).map(Element::Finite).collect();
            Ok(match first_unreached(skew, &all, None) {
                None => Transitivity::Transitive,
                Some((vertex, element)) => Transitivity::Intransitive(Witness::Unreached { vertex, element }),
            })
        }
        GroupKind::Free { .. } | GroupKind::Heisenberg => {
            if let Transitivity::Intransitive(w) = lattice_transitivity(&skew.abelianized()) {
                return Ok(Transitivity::Intransitive(Witness::AbelianFactor(Box::new(w))));
            }
            let ball = skew.group().ball(depth, DEFAULT_BALL_CAP)?;
            let inner = skew.group().ball(depth / 2, DEFAULT_BALL_CAP)?;
            let allowed: HashSet<Element> = ball.into_iter().collect();
            Ok(match first_unreached(skew, &inner, Some(&allowed)) {
                None => Transitivity::Transitive,
                Some(_) => Transitivity::Unknown { depth },
            })
        }
    }
}

/// BFS from `(0, e)`, optionally confined to `allowed`; returns a state
/// `(v, g)` with `g ∈ targets` that was not reached.
fn first_unreached(
    skew: &SkewSystem,
    targets: &[Element],
    allowed: Option<&HashSet<Element>>,
) -> Option<(usize, Element)> {
    let group = skew.group();
    let start = (0usize, group.identity());
    let mut seen: HashSet<(usize, Element)> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some((v, g)) = queue.pop_front() {
        for w in skew.base().successors(v) {
            let h = group.mul(&g, skew.label(v, w));
            if allowed.is_some_and(|a| !a.contains(&h)) {
                continue;
            }
            let state = (w, h);
            if seen.insert(state.clone()) {
                queue.push_back(state);
            }
        }
    }
    let k = skew.base().alphabet_size();
    for g in targets {
        for v in 0..k {
            if !seen.contains(&(v, g.clone())) {
                return Some((v, g.clone()));
            }
        }
    }
    None
}

fn lattice_transitivity(skew: &SkewSystem) -> Transitivity {
    let rank = skew.ab_rank();
    if rank == 0 {
        return Transitivity::Transitive;
    }
    let fundamental = fundamental_holonomies(skew);
    match lattice_index(&fundamental, rank) {
        Some(1) => {}
        index => return Transitivity::Intransitive(Witness::NotGenerating { index }),
    }
    match holonomy_cone_witness(skew) {
        Some(normal) => Transitivity::Intransitive(Witness::HalfSpace { normal }),
        None => Transitivity::Transitive,
    }
}

/// Holonomies of the fundamental cycles of a spanning tree of the
/// underlying undirected graph; they generate the group of closed-walk
/// holonomies of a strongly connected graph.
fn fundamental_holonomies(skew: &SkewSystem) -> Vec<Vec<i64>> {
    let sft = skew.base();
    let k = sft.alphabet_size();
    let rank = skew.ab_rank();
    let mut potential: Vec<Option<Vec<i64>>> = vec![None; k];
    potential[0] = Some(vec![0; rank]);
    let mut tree: HashSet<(usize, usize)> = HashSet::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        let pu = potential[u].clone().expect("visited");
        for v in 0..k {
            if potential[v].is_some() {
                continue;
            }
            if sft.allows(u, v) {
                potential[v] = Some(pu.iter().zip(skew.ab_label(u, v)).map(|(a, b)| a + b).collect());
                tree.insert((u, v));
            } else if sft.allows(v, u) {
                potential[v] = Some(pu.iter().zip(skew.ab_label(v, u)).map(|(a, b)| a - b).collect());
                tree.insert((v, u));
            } else {
                continue;
            }
            queue.push_back(v);
        }
    }
    let mut out = Vec::new();
    for (u, v) in sft.edges() {
        if tree.contains(&(u, v)) {
            continue;
        }
        let (pu, pv) = (
            potential[u].as_ref().expect("connected"),
            potential[v].as_ref().expect("connected"),
        );
        let h: Vec<i64> = (0..rank).map(|d| pu[d] + skew.ab_label(u, v)[d] - pv[d]).collect();
        if h.iter().any(|&x| x != 0) {
            out.push(h);
        }
    }
    out
}

/// Index of the sublattice spanned by `vectors` in `Z^rank`, or `None`
/// when the rank is deficient. Integer row reduction by Euclid.
fn lattice_index(vectors: &[Vec<i64>], rank: usize) -> Option<u64> {
    let mut rows: Vec<Vec<i128>> = vectors.iter().map(|v| v.iter().map(|&x| x as i128).collect()).collect();
    let mut index: u128 = 1;
    for (top, col) in (0..rank).enumerate() {
        loop {
            let pivot = (top..rows.len())
                .filter(|&r| rows[r][col] != 0)
                .min_by_key(|&r| rows[r][col].abs());
            let p = pivot?;
            rows.swap(top, p);
            let mut done = true;
            for r in top + 1..rows.len() {
                if rows[r][col] != 0 {
                    let q = rows[r][col] / rows[top][col];
                    for c in col..rank {
                        rows[r][c] -= q * rows[top][c];
                    }
                    if rows[r][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        index = index.saturating_mul(rows[top][col].unsigned_abs());
    }
    Some(index.min(u64::MAX as u128) as u64)
}

/// Holonomies of all simple cycles (each once, based at its least vertex).
fn simple_cycle_holonomies(skew: &SkewSystem) -> Vec<Vec<i64>> {
    let sft = skew.base();
    let k = sft.alphabet_size();
    let rank = skew.ab_rank();
    let mut out: HashSet<Vec<i64>> = HashSet::new();
    let mut count = 0usize;
    for start in 0..k {
        // DFS over vertices > start
        let mut path = vec![start];
        let mut on_path = vec![false; k];
        on_path[start] = true;
        let mut hol = vec![vec![0i64; rank]];
        let mut iters: Vec<usize> = vec![0];
        while let Some(&v) = path.last() {
            let next = iters.last_mut().expect("aligned with path");
            if *next >= k {
                path.pop();
                iters.pop();
                hol.pop();
                on_path[v] = false;
                if path.is_empty() {
                    break;
                }
                continue;
            }
            let w = *next;
            *next += 1;
            if !sft.allows(v, w) {
                continue;
            }
            let step: Vec<i64> = hol
                .last()
                .expect("aligned")
                .iter()
                .zip(skew.ab_label(v, w))
                .map(|(a, b)| a + b)
                .collect();
            if w == start {
                count += 1;
                out.insert(step);
            } else if w > start && !on_path[w] {
                on_path[w] = true;
                path.push(w);
                iters.push(0);
                hol.push(step);
            }
            if count > MAX_SIMPLE_CYCLES {
                break;
            }
        }
        on_path[start] = false;
    }
    let mut v: Vec<Vec<i64>> = out.into_iter().collect();
    v.sort();
    v
}

/// A nonzero `normal` with `<normal, h> >= 0` for every loop holonomy `h`
/// of the abelianized system, or `None` when no closed half-space contains
/// them (the holonomy cone is all of `R^a`).
pub fn holonomy_cone_witness(skew: &SkewSystem) -> Option<Vec<i64>> {
    let rank = skew.ab_rank();
    if rank == 0 {
        return None;
    }
    let hs = simple_cycle_holonomies(skew);
    let mut nonzero: Vec<Vec<i64>> = hs.into_iter().filter(|h| h.iter().any(|&x| x != 0)).collect();
    nonzero.dedup();
    // A spanning deficit gives a normal orthogonal to everything.
    let candidates = normal_candidates(&nonzero, rank);
    for n in candidates {
        let dots: Vec<i128> = nonzero
            .iter()
            .map(|h| h.iter().zip(&n).map(|(a, b)| *a as i128 * *b as i128).sum())
            .collect();
        if dots.iter().all(|&d| d >= 0) {
            return Some(n);
        }
        if dots.iter().all(|&d| d <= 0) {
            return Some(n.iter().map(|x| -x).collect());
        }
    }
    None
}

/// Normals of hyperplanes through `rank - 1` of the vectors (extreme rays
/// of the dual cone), plus coordinate normals when the vectors do not span.
fn normal_candidates(vectors: &[Vec<i64>], rank: usize) -> Vec<Vec<i64>> {
    if rank == 1 {
        return vec![vec![1]];
    }
    let mut out: Vec<Vec<i64>> = Vec::new();
    let mut seen: HashMap<Vec<i64>, ()> = HashMap::new();
    let mut push = |n: Vec<i64>, out: &mut Vec<Vec<i64>>| {
        if n.iter().any(|&x| x != 0) && seen.insert(n.clone(), ()).is_none() {
            out.push(n);
        }
    };
    if lattice_index(vectors, rank).is_none() {
        // Rank deficient: take a null vector of the span by completing
        // with unit vectors.
        for d in 0..rank {
            let mut aug: Vec<Vec<i64>> = vectors.to_vec();
            let mut unit = vec![0; rank];
            unit[d] = 1;
            aug.push(unit);
            for combo in combinations(aug.len(), rank - 1) {
                let rows: Vec<&Vec<i64>> = combo.iter().map(|&i| &aug[i]).collect();
                push(cofactor_normal(&rows, rank), &mut out);
            }
        }
        return out;
    }
    for combo in combinations(vectors.len(), rank - 1) {
        let rows: Vec<&Vec<i64>> = combo.iter().map(|&i| &vectors[i]).collect();
        push(cofactor_normal(&rows, rank), &mut out);
    }
    out
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    rec(0, n, r, &mut cur, &mut out);
    out
}

/// Generalized cross product of `rank - 1` integer vectors in `Z^rank`.
fn cofactor_normal(rows: &[&Vec<i64>], rank: usize) -> Vec<i64> {
    (0..rank)
        .map(|skip| {
            let minor: Vec<Vec<i128>> = rows
                .iter()
                .map(|r| (0..rank).filter(|&c| c != skip).map(|c| r[c] as i128).collect())
                .collect();
            let sign = if skip % 2 == 0 { 1 } else { -1 };
            (sign * det(minor)) as i64
        })
        .collect()
}

fn det(m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|c| {
            let sub: Vec<Vec<i128>> = m[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &x)| x).collect())
                .collect();
            let sign = if c % 2 == 0 { 1 } else { -1 };
            sign * m[0][c] * det(sub)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::tests::{f2_walk, z_example};
    use crate::groups::{Group, Letter};
    use crate::sft::Sft;
    use smallvec::smallvec;

    #[test]
    fn z_example_is_transitive() {
        assert_eq!(check_transitivity(&z_example(), 4).unwrap(), Transitivity::Transitive);
    }

    #[test]
    fn half_line_is_intransitive() {
        let z = Group::lattice(1);
        let one = Element::Lattice(smallvec![1]);
        let skew = SkewSystem::by_source(Sft::full(2).unwrap(), z, &[one.clone(), one]).unwrap();
        assert_eq!(
            check_transitivity(&skew, 4).unwrap(),
            Transitivity::Intransitive(Witness::HalfSpace { normal: vec![1] })
        );
    }

    #[test]
    fn even_sublattice_is_not_generating() {
        let z = Group::lattice(1);
        let two = Element::Lattice(smallvec![2]);
        let minus = Element::Lattice(smallvec![-2]);
        let skew = SkewSystem::by_source(Sft::full(2).unwrap(), z, &[two, minus]).unwrap();
        assert_eq!(
            check_transitivity(&skew, 4).unwrap(),
            Transitivity::Intransitive(Witness::NotGenerating { index: Some(2) })
        );
    }

    #[test]
    fn planar_half_plane() {
        // labels e1, -e1, e2: all holonomies have nonnegative second coordinate
        let z2 = Group::lattice(2);
        let labels = vec![
            Element::Lattice(smallvec![1, 0]),
            Element::Lattice(smallvec![-1, 0]),
            Element::Lattice(smallvec![0, 1]),
        ];
        let skew = SkewSystem::by_source(Sft::full(3).unwrap(), z2, &labels).unwrap();
        assert_eq!(
            check_transitivity(&skew, 4).unwrap(),
            Transitivity::Intransitive(Witness::HalfSpace { normal: vec![0, 1] })
        );
    }

    #[test]
    fn free_walk_transitive_at_depth_six() {
        assert_eq!(check_transitivity(&f2_walk(), 6).unwrap(), Transitivity::Transitive);
    }

    #[test]
    fn free_positive_letters_fail_in_abelian_factor() {
        let f2 = Group::free(2);
        let a = f2.evaluate_word(&Letter::parse_word("a").unwrap()).unwrap();
        let b = f2.evaluate_word(&Letter::parse_word("b").unwrap()).unwrap();
        let skew = SkewSystem::by_source(Sft::full(2).unwrap(), f2, &[a, b]).unwrap();
        assert!(matches!(
            check_transitivity(&skew, 4).unwrap(),
            Transitivity::Intransitive(Witness::AbelianFactor(_))
        ));
    }

    #[test]
    fn finite_groups_exact() {
        let c2 = Group::cyclic(2).unwrap();
        let g = Element::Finite(1);
        let e = Element::Finite(0);
        let skew = SkewSystem::by_source(Sft::full(2).unwrap(), c2.clone(), &[g.clone(), e.clone()]).unwrap();
        assert_eq!(check_transitivity(&skew, 0).unwrap(), Transitivity::Transitive);
        // on the 2-cycle the holonomy of every loop is even
        let flip = Sft::new(2, &[vec![0, 1], vec![1, 0]]).unwrap();
        let skew = SkewSystem::by_source(flip, c2, &[g.clone(), g]).unwrap();
        assert!(matches!(
            check_transitivity(&skew, 0).unwrap(),
            Transitivity::Intransitive(Witness::Unreached { .. })
        ));
    }

    #[test]
    fn index_computation() {
        assert_eq!(lattice_index(&[vec![2, 0], vec![0, 3]], 2), Some(6));
        assert_eq!(lattice_index(&[vec![2, 1], vec![1, 1]], 2), Some(1));
        assert_eq!(lattice_index(&[vec![1, 1], vec![2, 2]], 2), None);
    }
}
