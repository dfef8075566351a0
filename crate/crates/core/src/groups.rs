//! Finitely generated coefficient groups for skew products.
//!
//! Four concrete kinds are supported: the lattice `Z^a`, finite groups
//! given by a multiplication table, free groups `F_k` and the discrete
//! Heisenberg group of upper unitriangular integer matrices.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Default cap on the number of elements of a ball or DP frontier.
pub const DEFAULT_BALL_CAP: usize = 100_000_000;

pub type LatticeVector = SmallVec<[i64; 4]>;

/// A group element. Equality is group equality: free words are always
/// stored reduced.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    Lattice(LatticeVector),
    Finite(usize),
    /// Reduced word; letter `+(g+1)` is basis generator `g`, `-(g+1)` its inverse.
    Free(SmallVec<[i32; 8]>),
    /// `(a, b, c)` with `(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')`.
    Heisenberg([i64; 3]),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupKind {
    Lattice { rank: usize },
    Finite { table: Vec<Vec<usize>>, identity: usize },
    Free { rank: usize },
    Heisenberg,
}

/// One letter of a word in the distinguished generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Letter { generator, inverse }
    }

    /// Parses the compact notation used in configs: `a b c ...` name
    /// generators 0, 1, 2, ...; upper case is the inverse. A blank string
    /// or `"1"` is the empty word.
    pub fn parse_word(word: &str) -> Result<Vec<Letter>> {
        let trimmed = word.trim();
        if trimmed.is_empty() || trimmed == "1" {
            return Ok(Vec::new());
        }
        trimmed
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| {
                if c.is_ascii_lowercase() {
                    Ok(Letter::new((c as u8 - b'a') as usize, false))
                } else if c.is_ascii_uppercase() {
                    Ok(Letter::new((c as u8 - b'A') as usize, true))
                } else {
                    Err(Error::Parse(format!("bad letter {c:?} in word {word:?}")))
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    kind: GroupKind,
    generators: Vec<Element>,
    finite_inverse: Vec<usize>,
}

/// The homomorphism `G → Z^a` onto the free part of the abelianization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Abelianization {
    pub rank: usize,
}

impl Group {
    /// `Z^a` with the standard basis as generators.
    pub fn lattice(rank: usize) -> Self {
        let generators = (0..rank)
            .map(|i| {
                let mut v: LatticeVector = SmallVec::from_elem(0, rank);
                v[i] = 1;
                Element::Lattice(v)
            })
            .collect();
        Group {
            kind: GroupKind::Lattice { rank },
            generators,
            finite_inverse: Vec::new(),
        }
    }

    /// The trivial group, represented as `Z^0`.
    pub fn trivial() -> Self {
        Self::lattice(0)
    }

    pub fn free(rank: usize) -> Self {
        let generators = (0..rank)
            .map(|i| Element::Free(SmallVec::from_slice(&[i as i32 + 1])))
            .collect();
        Group {
            kind: GroupKind::Free { rank },
            generators,
            finite_inverse: Vec::new(),
        }
    }

    /// Generated by `x = (1,0,0)` and `y = (0,1,0)`.
    pub fn heisenberg() -> Self {
        Group {
            kind: GroupKind::Heisenberg,
            generators: vec![Element::Heisenberg([1, 0, 0]), Element::Heisenberg([0, 1, 0])],
            finite_inverse: Vec::new(),
        }
    }

    /// A finite group from its multiplication table, fully validated.
    /// Every non-identity element is a generator unless replaced with
    /// [`Group::with_generators`].
    pub fn finite(table: Vec<Vec<usize>>, identity: usize) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty table".into()));
        }
        if identity >= n {
            return Err(Error::InvalidGroup("identity index out of range".into()));
        }
        for row in &table {
            if row.len() != n || row.iter().any(|&x| x >= n) {
                return Err(Error::InvalidGroup("table is not a closed n×n table".into()));
            }
        }
        for a in 0..n {
            if table[identity][a] != a || table[a][identity] != a {
                return Err(Error::InvalidGroup(format!("{identity} is not a two-sided identity")));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidGroup(format!("not associative at ({a}, {b}, {c})")));
                    }
                }
            }
        }
        let mut finite_inverse = Vec::with_capacity(n);
        for a in 0..n {
            let inv = (0..n)
                .find(|&b| table[a][b] == identity && table[b][a] == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("element {a} has no inverse")))?;
            finite_inverse.push(inv);
        }
        let generators = (0..n).filter(|&a| a != identity).map(Element::Finite).collect();
        Ok(Group {
            kind: GroupKind::Finite { table, identity },
            generators,
            finite_inverse,
        })
    }

    /// The cyclic group of order `n`.
    pub fn cyclic(n: usize) -> Result<Self> {
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::finite(table, 0)?.with_generators(vec![Element::Finite(1 % n)])
    }

    /// Replaces the distinguished generators used for words and balls.
    pub fn with_generators(mut self, generators: Vec<Element>) -> Result<Self> {
        for g in &generators {
            if !self.contains(g) {
                return Err(Error::KindMismatch);
            }
        }
        self.generators = generators;
        Ok(self)
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    /// Amenability as a label of the kind (never computed).
    pub fn is_amenable(&self) -> bool {
        match self.kind {
            GroupKind::Free { rank } => rank <= 1,
            _ => true,
        }
    }

    pub fn is_torsion_free(&self) -> bool {
        match &self.kind {
            GroupKind::Finite { table, .. } => table.len() == 1,
            _ => true,
        }
    }

    /// Whether `g` is a well-formed element of this group.
    pub fn contains(&self, g: &Element) -> bool {
        match (&self.kind, g) {
            (GroupKind::Lattice { rank }, Element::Lattice(v)) => v.len() == *rank,
            (GroupKind::Finite { table, .. }, Element::Finite(i)) => *i < table.len(),
            (GroupKind::Free { rank }, Element::Free(w)) => {
                w.iter().all(|&l| l != 0 && l.unsigned_abs() as usize <= *rank) && w.windows(2).all(|p| p[0] != -p[1])
            }
            (GroupKind::Heisenberg, Element::Heisenberg(_)) => true,
            _ => false,
        }
    }

    pub fn identity(&self) -> Element {
        match &self.kind {
            GroupKind::Lattice { rank } => Element::Lattice(SmallVec::from_elem(0, *rank)),
            GroupKind::Finite { identity, .. } => Element::Finite(*identity),
            GroupKind::Free { .. } => Element::Free(SmallVec::new()),
            GroupKind::Heisenberg => Element::Heisenberg([0, 0, 0]),
        }
    }

    pub fn multiply(&self, g: &Element, h: &Element) -> Result<Element> {
        if !self.contains(g) || !self.contains(h) {
            return Err(Error::KindMismatch);
        }
        Ok(self.mul(g, h))
    }

    pub fn inverse(&self, g: &Element) -> Result<Element> {
        if !self.contains(g) {
            return Err(Error::KindMismatch);
        }
        Ok(self.inv(g))
    }

    /// Product of elements already known to belong to the group.
    pub(crate) fn mul(&self, g: &Element, h: &Element) -> Element {
        match (g, h) {
            (Element::Lattice(a), Element::Lattice(b)) => {
                Element::Lattice(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (Element::Finite(a), Element::Finite(b)) => match &self.kind {
                GroupKind::Finite { table, .. } => Element::Finite(table[*a][*b]),
                _ => unreachable!("finite element in a non-finite group"),
            },
            (Element::Free(a), Element::Free(b)) => {
                let mut out = a.clone();
                for &l in b {
                    if out.last() == Some(&-l) {
                        out.pop();
                    } else {
                        out.push(l);
                    }
                }
                Element::Free(out)
            }
            (Element::Heisenberg([a, b, c]), Element::Heisenberg([a2, b2, c2])) => {
                Element::Heisenberg([a + a2, b + b2, c + c2 + a * b2])
            }
            _ => unreachable!("mixed element kinds"),
        }
    }

    pub(crate) fn inv(&self, g: &Element) -> Element {
        match g {
            Element::Lattice(a) => Element::Lattice(a.iter().map(|x| -x).collect()),
            Element::Finite(a) => Element::Finite(self.finite_inverse[*a]),
            Element::Free(w) => Element::Free(w.iter().rev().map(|l| -l).collect()),
            Element::Heisenberg([a, b, c]) => Element::Heisenberg([-a, -b, a * b - c]),
        }
    }

    pub fn letter(&self, letter: Letter) -> Result<Element> {
        let g = self.generators.get(letter.generator).ok_or(Error::IndexOutOfRange {
            index: letter.generator,
            len: self.generators.len(),
        })?;
        Ok(if letter.inverse { self.inv(g) } else { g.clone() })
    }

    /// Left-to-right product of (inverse) generators.
    pub fn evaluate_word(&self, word: &[Letter]) -> Result<Element> {
        let mut acc = self.identity();
        for &l in word {
            acc = self.mul(&acc, &self.letter(l)?);
        }
        Ok(acc)
    }

    pub fn abelianization(&self) -> Abelianization {
        let rank = match &self.kind {
            GroupKind::Lattice { rank } | GroupKind::Free { rank } => *rank,
            GroupKind::Heisenberg => 2,
            GroupKind::Finite { .. } => 0,
        };
        Abelianization { rank }
    }

    /// `Z^a` with generators the nonzero images of this group's generators.
    pub fn abelian_group(&self) -> Group {
        let ab = self.abelianization();
        let mut gens: Vec<Element> = Vec::new();
        for g in &self.generators {
            let v = Element::Lattice(ab.apply(g));
            if ab.apply(g).iter().any(|&x| x != 0) && !gens.contains(&v) {
                gens.push(v);
            }
        }
        Group::lattice(ab.rank)
            .with_generators(gens)
            .expect("abelian images lie in the lattice")
    }

    /// All elements that are products of at most `radius` generators or
    /// their inverses, sphere by sphere, each sphere sorted.
    pub fn ball(&self, radius: usize, cap: usize) -> Result<Vec<Element>> {
        let mut steps: Vec<Element> = Vec::new();
        for g in &self.generators {
            for s in [g.clone(), self.inv(g)] {
                if !steps.contains(&s) {
                    steps.push(s);
                }
            }
        }
        let mut seen: HashSet<Element> = HashSet::new();
        let e = self.identity();
        seen.insert(e.clone());
        let mut out = vec![e.clone()];
        let mut sphere = vec![e];
        for r in 1..=radius {
            let mut next = Vec::new();
            for g in &sphere {
                for s in &steps {
                    let h = self.mul(g, s);
                    if seen.insert(h.clone()) {
                        next.push(h);
                    }
                }
            }
            if seen.len() > cap {
                return Err(Error::BallTooLarge { cap, radius: r });
            }
            next.sort();
            out.extend(next.iter().cloned());
            sphere = next;
            if sphere.is_empty() {
                break;
            }
        }
        Ok(out)
    }
}

impl Abelianization {
    /// Image in `Z^a`; torsion is dropped.
    pub fn apply(&self, g: &Element) -> LatticeVector {
        match g {
            Element::Lattice(v) => v.clone(),
            Element::Finite(_) => SmallVec::new(),
            Element::Free(w) => {
                let mut v: LatticeVector = SmallVec::from_elem(0, self.rank);
                for &l in w {
                    v[l.unsigned_abs() as usize - 1] += l.signum() as i64;
                }
                v
            }
            Element::Heisenberg([a, b, _]) => SmallVec::from_slice(&[*a, *b]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(v: &[i64]) -> Element {
        Element::Lattice(SmallVec::from_slice(v))
    }

    #[test]
    fn products() {
        let z2 = Group::lattice(2);
        assert_eq!(z2.multiply(&lat(&[1, 0]), &lat(&[0, 1])).unwrap(), lat(&[1, 1]));
        let f2 = Group::free(2);
        let x = f2.letter(Letter::new(0, false)).unwrap();
        let xi = f2.inverse(&x).unwrap();
        assert_eq!(f2.multiply(&x, &xi).unwrap(), f2.identity());
        let h = Group::heisenberg();
        assert_eq!(
            h.multiply(&Element::Heisenberg([1, 0, 0]), &Element::Heisenberg([0, 1, 0]))
                .unwrap(),
            Element::Heisenberg([1, 1, 1])
        );
        assert!(matches!(h.multiply(&x, &x), Err(Error::KindMismatch)));
    }

    #[test]
    fn inverses() {
        assert_eq!(Group::lattice(1).inverse(&lat(&[3])).unwrap(), lat(&[-3]));
        let h = Group::heisenberg();
        assert_eq!(
            h.inverse(&Element::Heisenberg([1, 1, 1])).unwrap(),
            Element::Heisenberg([-1, -1, 0])
        );
        let c2 = Group::cyclic(2).unwrap();
        assert_eq!(c2.inverse(&Element::Finite(1)).unwrap(), Element::Finite(1));
    }

    #[test]
    fn commutator_words() {
        let word = Letter::parse_word("abAB").unwrap();
        let f2 = Group::free(2);
        match f2.evaluate_word(&word).unwrap() {
            Element::Free(w) => assert_eq!(w.len(), 4),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(Group::lattice(2).evaluate_word(&word).unwrap(), lat(&[0, 0]));
        assert_eq!(
            Group::heisenberg().evaluate_word(&word).unwrap(),
            Element::Heisenberg([0, 0, 1])
        );
        assert!(matches!(
            Group::lattice(1).evaluate_word(&word),
            Err(Error::IndexOutOfRange { index: 1, len: 1 })
        ));
    }

    #[test]
    fn abelianization_images() {
        let f2 = Group::free(2);
        let ab = f2.abelianization();
        let comm = f2.evaluate_word(&Letter::parse_word("abAB").unwrap()).unwrap();
        assert_eq!(ab.apply(&comm).as_slice(), &[0, 0]);
        let xxy = f2.evaluate_word(&Letter::parse_word("aab").unwrap()).unwrap();
        assert_eq!(ab.apply(&xxy).as_slice(), &[2, 1]);
        let h = Group::heisenberg();
        assert_eq!(
            h.abelianization().apply(&Element::Heisenberg([3, -2, 7])).as_slice(),
            &[3, -2]
        );
        let c3 = Group::cyclic(3).unwrap();
        assert_eq!(c3.abelianization().rank, 0);
        assert!(c3.abelianization().apply(&Element::Finite(2)).is_empty());
    }

    #[test]
    fn balls() {
        let z = Group::lattice(1);
        let b = z.ball(2, DEFAULT_BALL_CAP).unwrap();
        assert_eq!(b, vec![lat(&[0]), lat(&[-1]), lat(&[1]), lat(&[-2]), lat(&[2])]);
        assert_eq!(Group::free(2).ball(2, DEFAULT_BALL_CAP).unwrap().len(), 17);
        assert!(matches!(
            Group::free(2).ball(10, 1000),
            Err(Error::BallTooLarge { cap: 1000, .. })
        ));
        assert_eq!(Group::trivial().ball(5, 10).unwrap().len(), 1);
    }

    #[test]
    fn heisenberg_ball_matches_word_enumeration() {
        let h = Group::heisenberg();
        let letters: Vec<Letter> = (0..2)
            .flat_map(|g| [Letter::new(g, false), Letter::new(g, true)])
            .collect();
        let mut brute: HashSet<Element> = HashSet::new();
        brute.insert(h.identity());
        for len in 1..=2u32 {
            for code in 0..4usize.pow(len) {
                let word: Vec<Letter> = (0..len).map(|t| letters[(code / 4usize.pow(t)) % 4]).collect();
                brute.insert(h.evaluate_word(&word).unwrap());
            }
        }
        let ball: HashSet<Element> = h.ball(2, DEFAULT_BALL_CAP).unwrap().into_iter().collect();
        assert_eq!(ball, brute);
    }

    #[test]
    fn finite_table_validation() {
        assert!(Group::finite(vec![vec![0, 1], vec![1, 1]], 0).is_err());
        assert!(Group::finite(vec![vec![0, 1], vec![1, 0]], 1).is_err());
        assert!(Group::cyclic(4).is_ok());
    }
}
