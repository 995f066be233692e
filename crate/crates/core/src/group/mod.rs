//! Exact arithmetic in four families of finitely generated groups.
//!
//! Every element is kept in a normal form that is unique per element, so
//! equality, hashing and ordering never need to solve a word problem.
//! [`Group::ball`] enumerates Cayley balls with a deterministic ordering
//! (BFS level first, then the derived order on normal forms), which makes
//! every truncated matrix built on top of a ball reproducible bit for bit.

mod ball;
mod counting;
mod element;
mod spec;

use std::collections::HashSet;
use std::fmt;

use smallvec::SmallVec;

pub use ball::{Ball, DEFAULT_BALL_CAP};
pub use element::{GroupElement, Letter, Syllable};
pub use spec::{FactorSpec, GroupSpec};

use crate::error::{Error, Result};
use element::push_letter;

/// A finite group given by its multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    identity: usize,
    table: Vec<u16>,
    inverses: Vec<u16>,
}

impl FiniteGroup {
    /// Validates a row-major table: closure, identity, inverses and
    /// associativity are all checked.
    pub fn from_table(rows: &[Vec<usize>], identity: usize) -> Result<FiniteGroup> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::InvalidTable("factor must be nontrivial".into()));
        }
        if n > u16::MAX as usize {
            return Err(Error::InvalidTable(format!("order {n} too large")));
        }
        if identity >= n {
            return Err(Error::InvalidTable(format!("identity {identity} out of range")));
        }
        let mut table = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidTable(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            for &v in row {
                if v >= n {
                    return Err(Error::InvalidTable(format!("entry {v} in row {i} out of range")));
                }
                table.push(v as u16);
            }
        }
        let at = |a: usize, b: usize| table[a * n + b] as usize;
        for a in 0..n {
            if at(identity, a) != a || at(a, identity) != a {
                return Err(Error::InvalidTable(format!("{identity} is not a two-sided identity (fails at {a})")));
            }
        }
        let mut inverses = vec![0u16; n];
        for a in 0..n {
            let inv = (0..n).find(|&b| at(a, b) == identity && at(b, a) == identity);
            match inv {
                Some(b) => inverses[a] = b as u16,
                None => return Err(Error::InvalidTable(format!("element {a} has no inverse"))),
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if at(at(a, b), c) != at(a, at(b, c)) {
                        return Err(Error::InvalidTable(format!("not associative at ({a},{b},{c})")));
                    }
                }
            }
        }
        Ok(FiniteGroup { order: n, identity, table, inverses })
    }

    /// The cyclic group `Z_n` with identity `0`.
    pub fn cyclic(n: usize) -> Result<FiniteGroup> {
        let rows: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        FiniteGroup::from_table(&rows, 0)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b] as usize
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a] as usize
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        (0..self.order)
            .map(|a| (0..self.order).map(|b| self.mul(a, b)).collect())
            .collect()
    }

    fn non_identity(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.order).filter(move |&a| a != self.identity)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    FreeAbelian { rank: usize },
    Free { rank: usize },
    FreeProduct { factors: Vec<FiniteGroup> },
    Heisenberg,
}

/// A finitely generated group together with its canonical symmetric
/// generating set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    family: Family,
    generators: Vec<GroupElement>,
}

impl Group {
    pub fn free_abelian(rank: usize) -> Result<Group> {
        if rank == 0 {
            return Err(Error::InvalidGroup("free abelian rank must be positive".into()));
        }
        let mut generators = Vec::with_capacity(2 * rank);
        for i in 0..rank {
            for sign in [1, -1] {
                let mut v = vec![0i64; rank];
                v[i] = sign;
                generators.push(GroupElement::abelian(&v));
            }
        }
        Ok(Group::with_generators(Family::FreeAbelian { rank }, generators))
    }

    pub fn free(rank: usize) -> Result<Group> {
        if rank < 2 {
            return Err(Error::InvalidGroup("free group rank must be at least 2".into()));
        }
        if rank >= i8::MAX as usize {
            return Err(Error::InvalidGroup(format!("free group rank {rank} too large")));
        }
        let generators = (0..rank)
            .flat_map(|i| [false, true].map(|inv| {
                let mut w = SmallVec::new();
                w.push(Letter::new(i, inv));
                GroupElement::Free(w)
            }))
            .collect();
        Ok(Group::with_generators(Family::Free { rank }, generators))
    }

    /// Free product of finite groups, generated by all non-identity elements
    /// of all factors (so word length is the number of syllables).
    pub fn free_product(factors: Vec<FiniteGroup>) -> Result<Group> {
        if factors.len() < 2 {
            return Err(Error::InvalidGroup("a free product needs at least two factors".into()));
        }
        if factors.len() > u8::MAX as usize {
            return Err(Error::InvalidGroup("too many free factors".into()));
        }
        let mut generators = Vec::new();
        for (fi, f) in factors.iter().enumerate() {
            for a in f.non_identity() {
                let mut w = SmallVec::new();
                w.push(Syllable { factor: fi as u8, element: a as u16 });
                generators.push(GroupElement::FreeProduct(w));
            }
        }
        Ok(Group::with_generators(Family::FreeProduct { factors }, generators))
    }

    /// The discrete Heisenberg group with generators `x = (1,0,0)`,
    /// `y = (0,1,0)` and their inverses.
    pub fn heisenberg() -> Group {
        let generators = vec![
            GroupElement::heisenberg(1, 0, 0),
            GroupElement::heisenberg(-1, 0, 0),
            GroupElement::heisenberg(0, 1, 0),
            GroupElement::heisenberg(0, -1, 0),
        ];
        Group::with_generators(Family::Heisenberg, generators)
    }

    fn with_generators(family: Family, mut generators: Vec<GroupElement>) -> Group {
        generators.sort();
        Group { family, generators }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    /// Short human-readable name, e.g. `F_2` or `Z^3`.
    pub fn name(&self) -> String {
        match &self.family {
            Family::FreeAbelian { rank: 1 } => "Z".into(),
            Family::FreeAbelian { rank } => format!("Z^{rank}"),
            Family::Free { rank } => format!("F_{rank}"),
            Family::FreeProduct { factors } => factors
                .iter()
                .map(|f| format!("G{}", f.order()))
                .collect::<Vec<_>>()
                .join("*"),
            Family::Heisenberg => "H_3(Z)".into(),
        }
    }

    /// Whether the group is amenable. Among the supported families only the
    /// nonabelian free groups and the free products other than `Z_2 * Z_2`
    /// are not.
    pub fn is_amenable(&self) -> bool {
        match &self.family {
            Family::FreeAbelian { .. } | Family::Heisenberg => true,
            Family::Free { .. } => false,
            Family::FreeProduct { factors } => factors.len() == 2 && factors.iter().all(|f| f.order() == 2),
        }
    }

    pub fn identity(&self) -> GroupElement {
        match &self.family {
            Family::FreeAbelian { rank } => GroupElement::Abelian(SmallVec::from_elem(0, *rank)),
            Family::Free { .. } => GroupElement::Free(SmallVec::new()),
            Family::FreeProduct { .. } => GroupElement::FreeProduct(SmallVec::new()),
            Family::Heisenberg => GroupElement::Heisenberg([0, 0, 0]),
        }
    }

    /// Whether `g` is a well-formed normal form of this group.
    pub fn contains(&self, g: &GroupElement) -> bool {
        match (&self.family, g) {
            (Family::FreeAbelian { rank }, GroupElement::Abelian(v)) => v.len() == *rank,
            (Family::Free { rank }, GroupElement::Free(w)) => {
                w.iter().all(|l| l.generator() < *rank)
                    && w.windows(2).all(|p| p[0] != p[1].inverse())
            }
            (Family::FreeProduct { factors }, GroupElement::FreeProduct(w)) => {
                w.iter().all(|s| {
                    let fi = s.factor as usize;
                    fi < factors.len()
                        && (s.element as usize) < factors[fi].order()
                        && s.element as usize != factors[fi].identity()
                }) && w.windows(2).all(|p| p[0].factor != p[1].factor)
            }
            (Family::Heisenberg, GroupElement::Heisenberg(_)) => true,
            _ => false,
        }
    }

    pub fn check(&self, g: &GroupElement) -> Result<()> {
        if self.contains(g) {
            Ok(())
        } else {
            Err(Error::ForeignElement { element: g.to_string(), group: self.name() })
        }
    }

    /// Checked product; rejects operands that are not normal forms of this
    /// group.
    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul(a, b))
    }

    pub fn invert(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        Ok(self.inv(a))
    }

    /// Unchecked product of two elements already known to belong to the
    /// group.
    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        match (&self.family, a, b) {
            (Family::FreeAbelian { .. }, GroupElement::Abelian(x), GroupElement::Abelian(y)) => {
                GroupElement::Abelian(x.iter().zip(y).map(|(p, q)| p + q).collect())
            }
            (Family::Free { .. }, GroupElement::Free(x), GroupElement::Free(y)) => {
                let mut w = x.clone();
                for &l in y {
                    push_letter(&mut w, l);
                }
                GroupElement::Free(w)
            }
            (Family::FreeProduct { factors }, GroupElement::FreeProduct(x), GroupElement::FreeProduct(y)) => {
                let mut w = x.clone();
                for &s in y {
                    match w.last_mut() {
                        Some(last) if last.factor == s.factor => {
                            let f = &factors[s.factor as usize];
                            let p = f.mul(last.element as usize, s.element as usize);
                            if p == f.identity() {
                                w.pop();
                            } else {
                                last.element = p as u16;
                            }
                        }
                        _ => w.push(s),
                    }
                }
                GroupElement::FreeProduct(w)
            }
            (Family::Heisenberg, GroupElement::Heisenberg([a1, b1, c1]), GroupElement::Heisenberg([a2, b2, c2])) => {
                GroupElement::Heisenberg([a1 + a2, b1 + b2, c1 + c2 + a1 * b2])
            }
            _ => panic!("mul: elements {a} and {b} do not belong to {}", self.name()),
        }
    }

    pub fn inv(&self, a: &GroupElement) -> GroupElement {
        match (&self.family, a) {
            (_, GroupElement::Abelian(x)) => GroupElement::Abelian(x.iter().map(|v| -v).collect()),
            (_, GroupElement::Free(w)) => GroupElement::Free(w.iter().rev().map(|l| l.inverse()).collect()),
            (Family::FreeProduct { factors }, GroupElement::FreeProduct(w)) => GroupElement::FreeProduct(
                w.iter()
                    .rev()
                    .map(|s| Syllable {
                        factor: s.factor,
                        element: factors[s.factor as usize].inv(s.element as usize) as u16,
                    })
                    .collect(),
            ),
            (_, GroupElement::Heisenberg([a, b, c])) => GroupElement::Heisenberg([-a, -b, -c + a * b]),
            _ => panic!("inv: element {a} does not belong to {}", self.name()),
        }
    }

    pub fn is_identity(&self, g: &GroupElement) -> bool {
        match g {
            GroupElement::Abelian(v) => v.iter().all(|&x| x == 0),
            GroupElement::Free(w) => w.is_empty(),
            GroupElement::FreeProduct(w) => w.is_empty(),
            GroupElement::Heisenberg(t) => *t == [0, 0, 0],
        }
    }

    /// Word length with respect to the canonical generating set.
    ///
    /// Closed forms for the abelian, free and free-product families; for the
    /// Heisenberg group the length is the BFS depth at which `g` appears.
    pub fn word_length(&self, g: &GroupElement) -> Result<usize> {
        self.check(g)?;
        Ok(match g {
            GroupElement::Abelian(v) => v.iter().map(|x| x.unsigned_abs() as usize).sum(),
            GroupElement::Free(w) => w.len(),
            GroupElement::FreeProduct(w) => w.len(),
            GroupElement::Heisenberg(_) => self.bfs_depth(g, DEFAULT_BALL_CAP)?,
        })
    }

    fn bfs_depth(&self, target: &GroupElement, cap: usize) -> Result<usize> {
        let mut seen: HashSet<GroupElement> = HashSet::new();
        let mut frontier = vec![self.identity()];
        seen.insert(self.identity());
        let mut depth = 0;
        loop {
            if frontier.contains(target) {
                return Ok(depth);
            }
            let mut next = Vec::new();
            for g in &frontier {
                for s in &self.generators {
                    let p = self.mul(g, s);
                    if seen.insert(p.clone()) {
                        next.push(p);
                    }
                }
            }
            depth += 1;
            if seen.len() > cap {
                return Err(Error::BallTooLarge { radius: depth, size: seen.len() as u128, cap });
            }
            frontier = next;
        }
    }

    /// The closed ball `{g : |g|_S <= radius}` with the default cap.
    pub fn ball(&self, radius: usize) -> Result<Ball> {
        Ball::enumerate(self, radius, DEFAULT_BALL_CAP)
    }

    pub fn ball_with_cap(&self, radius: usize, cap: usize) -> Result<Ball> {
        Ball::enumerate(self, radius, cap)
    }

    /// Sphere sizes `|S_0|, ..., |S_{r_max}|` by ball enumeration.
    pub fn sphere_sizes(&self, r_max: usize) -> Result<Vec<usize>> {
        Ok(self.ball(r_max)?.sphere_sizes())
    }

    /// Sphere sizes by counting normal forms, without enumerating the ball.
    /// `None` for the Heisenberg group, which has no counting formula here.
    pub fn sphere_counts(&self, r_max: usize) -> Option<Result<Vec<u128>>> {
        counting::sphere_counts(&self.family, r_max)
    }

    /// The largest `n <= max` with `|B_n| <= cap` (at least 0).
    pub fn largest_ball_radius(&self, cap: usize, max: usize) -> usize {
        let cap = cap.max(1);
        let mut best = 0;
        match self.sphere_counts(max) {
            Some(counts) => {
                let counts = counts.or_else(|_| {
                    // counts overflow u128 somewhere below max: the ball is far past any cap there
                    let (mut lo, mut hi) = (0, max);
                    while lo + 1 < hi {
                        let mid = (lo + hi) / 2;
                        if matches!(self.sphere_counts(mid), Some(Ok(_))) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    self.sphere_counts(lo).expect("counted family")
                });
                let mut total: u128 = 0;
                for (n, c) in counts.unwrap_or_default().into_iter().enumerate() {
                    total = total.saturating_add(c);
                    if total > cap as u128 {
                        break;
                    }
                    best = n;
                }
            }
            None => {
                for n in 1..=max {
                    if self.ball_with_cap(n, cap).is_err() {
                        break;
                    }
                    best = n;
                }
            }
        }
        best
    }

    /// Parses a normal form from its JSON representation and validates it.
    pub fn element_from_json(&self, v: &serde_json::Value) -> Result<GroupElement> {
        let bad = || Error::MalformedNormalForm(v.to_string());
        let ints = |v: &serde_json::Value| -> Result<Vec<i64>> {
            v.as_array()
                .ok_or_else(bad)?
                .iter()
                .map(|x| x.as_i64().ok_or_else(bad))
                .collect()
        };
        let g = match &self.family {
            Family::FreeAbelian { .. } => GroupElement::abelian(&ints(v)?),
            Family::Free { .. } => {
                let letters = ints(v)?;
                let g = GroupElement::free_word(&letters).ok_or_else(bad)?;
                match &g {
                    GroupElement::Free(w) if w.len() == letters.len() => g,
                    _ => return Err(Error::MalformedNormalForm(format!("{v} is not reduced"))),
                }
            }
            Family::FreeProduct { .. } => {
                let mut w = SmallVec::new();
                for pair in v.as_array().ok_or_else(bad)? {
                    let p = ints(pair)?;
                    if p.len() != 2 || p[0] < 0 || p[1] < 0 || p[0] > u8::MAX as i64 || p[1] > u16::MAX as i64 {
                        return Err(bad());
                    }
                    w.push(Syllable { factor: p[0] as u8, element: p[1] as u16 });
                }
                GroupElement::FreeProduct(w)
            }
            Family::Heisenberg => {
                let t = ints(v)?;
                if t.len() != 3 {
                    return Err(bad());
                }
                GroupElement::heisenberg(t[0], t[1], t[2])
            }
        };
        self.check(&g)?;
        Ok(g)
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(letters: &[i64]) -> GroupElement {
        GroupElement::free_word(letters).unwrap()
    }

    #[test]
    fn largest_ball_radius_by_cap() {
        let f2 = Group::free(2).unwrap();
        // |B_n| = 1, 5, 17, 53, 161
        assert_eq!(f2.largest_ball_radius(53, 10), 3);
        assert_eq!(f2.largest_ball_radius(160, 10), 3);
        assert_eq!(f2.largest_ball_radius(1000, 2), 2);
        assert_eq!(f2.largest_ball_radius(0, 10), 0);
        assert_eq!(Group::free(100).unwrap().largest_ball_radius(10_000, 40), 1);
        assert_eq!(Group::heisenberg().largest_ball_radius(5, 4), 1);
    }

    #[test]
    fn free_product_reduction_example() {
        let g = Group::free(2).unwrap();
        // (a b)(b^-1 a) = a a
        assert_eq!(g.multiply(&f(&[1, 2]), &f(&[-2, 1])).unwrap(), f(&[1, 1]));
    }

    #[test]
    fn abelian_addition_example() {
        let g = Group::free_abelian(2).unwrap();
        let p = g.multiply(&GroupElement::abelian(&[1, 2]), &GroupElement::abelian(&[3, -2])).unwrap();
        assert_eq!(p, GroupElement::abelian(&[4, 0]));
    }

    #[test]
    fn heisenberg_commutator_example() {
        let g = Group::heisenberg();
        let p = g.multiply(&GroupElement::heisenberg(1, 0, 0), &GroupElement::heisenberg(0, 1, 0)).unwrap();
        assert_eq!(p, GroupElement::heisenberg(1, 1, 1));
        let q = g.mul(&GroupElement::heisenberg(0, 1, 0), &GroupElement::heisenberg(1, 0, 0));
        assert_eq!(q, GroupElement::heisenberg(1, 1, 0));
    }

    #[test]
    fn mixed_descriptor_rejected() {
        let f2 = Group::free(2).unwrap();
        let z2 = Group::free_abelian(2).unwrap();
        assert!(matches!(
            f2.multiply(&f(&[1]), &GroupElement::abelian(&[1, 0])),
            Err(Error::ForeignElement { .. })
        ));
        assert!(z2.invert(&GroupElement::abelian(&[1, 0, 0])).is_err());
        // a letter of F_3 is foreign to F_2
        assert!(f2.invert(&f(&[3])).is_err());
    }

    #[test]
    fn free_product_reduction() {
        let g = Group::free_product(vec![FiniteGroup::cyclic(2).unwrap(), FiniteGroup::cyclic(3).unwrap()]).unwrap();
        let s = GroupElement::FreeProduct(SmallVec::from_slice(&[Syllable { factor: 0, element: 1 }]));
        let t = GroupElement::FreeProduct(SmallVec::from_slice(&[Syllable { factor: 1, element: 1 }]));
        let sts = g.mul(&g.mul(&s, &t), &s);
        assert_eq!(g.word_length(&sts).unwrap(), 3);
        // s t s * s t^-1 s = s (t t^-1) s ... collapses completely
        let back = g.mul(&sts, &g.inv(&sts));
        assert!(g.is_identity(&back));
        // t * t = t^2, still one syllable
        let tt = g.mul(&t, &t);
        assert_eq!(g.word_length(&tt).unwrap(), 1);
        assert!(g.is_identity(&g.mul(&tt, &t)));
    }

    #[test]
    fn table_validation() {
        assert!(FiniteGroup::from_table(&[vec![0]], 0).is_err());
        // not associative: a Latin square that is not a group
        let bad = vec![vec![0, 1, 2, 3, 4], vec![1, 0, 3, 4, 2], vec![2, 4, 0, 1, 3], vec![3, 2, 4, 0, 1], vec![4, 3, 1, 2, 0]];
        assert!(matches!(FiniteGroup::from_table(&bad, 0), Err(Error::InvalidTable(_))));
        assert!(FiniteGroup::from_table(&[vec![0, 1], vec![1, 1]], 0).is_err());
        assert!(FiniteGroup::from_table(&[vec![0, 1], vec![1, 0]], 5).is_err());
        let z4 = FiniteGroup::cyclic(4).unwrap();
        assert_eq!(z4.inv(1), 3);
        assert_eq!(FiniteGroup::from_table(&z4.rows(), 0).unwrap(), z4);
    }

    #[test]
    fn generators_are_symmetric() {
        let groups = [
            Group::free_abelian(3).unwrap(),
            Group::free(3).unwrap(),
            Group::heisenberg(),
            Group::free_product(vec![FiniteGroup::cyclic(3).unwrap(), FiniteGroup::cyclic(4).unwrap()]).unwrap(),
        ];
        for g in &groups {
            for s in g.generators() {
                assert!(g.generators().contains(&g.inv(s)), "{} not symmetric at {s}", g.name());
            }
        }
    }

    #[test]
    fn heisenberg_word_length_by_bfs() {
        let g = Group::heisenberg();
        assert_eq!(g.word_length(&GroupElement::heisenberg(0, 0, 0)).unwrap(), 0);
        assert_eq!(g.word_length(&GroupElement::heisenberg(1, 1, 1)).unwrap(), 2);
        // the commutator [x, y] = (0, 0, 1) needs four letters
        assert_eq!(g.word_length(&GroupElement::heisenberg(0, 0, 1)).unwrap(), 4);
    }

    #[test]
    fn json_normal_forms() {
        let f2 = Group::free(2).unwrap();
        let g = f(&[1, -2]);
        assert_eq!(f2.element_from_json(&g.to_json()).unwrap(), g);
        assert!(f2.element_from_json(&serde_json::json!([1, -1])).is_err());
        let h = Group::heisenberg();
        assert!(h.element_from_json(&serde_json::json!([1, 2])).is_err());
        let fp = Group::free_product(vec![FiniteGroup::cyclic(2).unwrap(), FiniteGroup::cyclic(3).unwrap()]).unwrap();
        assert!(fp.element_from_json(&serde_json::json!([[0, 1], [0, 1]])).is_err());
        assert!(fp.element_from_json(&serde_json::json!([[0, 1], [1, 2]])).is_ok());
    }
}
