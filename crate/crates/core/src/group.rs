//! Finite groups given by explicit multiplication tables.
//!
//! Elements are indices `0..order`; each carries a display name. Isotropy
//! groups, automorphism groups and Picard groups are all returned in this
//! form so that they can be compared with [`FiniteGroup::isomorphism`].

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("empty element list")]
    Empty,
    #[error("duplicate element name `{0}`")]
    DuplicateName(String),
    #[error("table has wrong shape: expected {expected}x{expected}")]
    Shape { expected: usize },
    #[error("table entry out of range at ({0}, {1})")]
    OutOfRange(usize, usize),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("associativity fails on ({0}, {1}, {2})")]
    NotAssociative(String, String, String),
    #[error("no two-sided identity")]
    NoIdentity,
    #[error("element `{0}` has no inverse")]
    NoInverse(String),
}

/// A finite group with a total composition table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    names: Vec<String>,
    table: Vec<usize>,
    identity: usize,
    inverse: Vec<usize>,
}

/// Wire form: element names plus a table of names, `table[i][j] = e_i * e_j`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct GroupTable {
    pub elements: Vec<String>,
    pub table: Vec<Vec<String>>,
}

impl FiniteGroup {
    /// Builds a group from an index table, checking every axiom.
    pub fn from_table(names: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        let n = names.len();
        if n == 0 {
            return Err(GroupError::Empty);
        }
        let mut seen = BTreeSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(GroupError::DuplicateName(name.clone()));
            }
        }
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(GroupError::Shape { expected: n });
        }
        for (i, row) in table.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v >= n {
                    return Err(GroupError::OutOfRange(i, j));
                }
            }
        }
        let flat: Vec<usize> = table.into_iter().flatten().collect();
        let mul = |a: usize, b: usize| flat[a * n + b];
        for a in 0..n {
            for b in 0..n {
                let ab = mul(a, b);
                for c in 0..n {
                    if mul(ab, c) != mul(a, mul(b, c)) {
                        return Err(GroupError::NotAssociative(
                            names[a].clone(),
                            names[b].clone(),
                            names[c].clone(),
                        ));
                    }
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| mul(e, a) == a && mul(a, e) == a))
            .ok_or(GroupError::NoIdentity)?;
        let mut inverse = Vec::with_capacity(n);
        for (a, name) in names.iter().enumerate() {
            let b = (0..n)
                .find(|&b| mul(a, b) == identity && mul(b, a) == identity)
                .ok_or_else(|| GroupError::NoInverse(name.clone()))?;
            inverse.push(b);
        }
        Ok(Self {
            names,
            table: flat,
            identity,
            inverse,
        })
    }

    /// Builds a group from a closure over indices `0..n`.
    pub fn from_fn(
        names: Vec<String>,
        mul: impl Fn(usize, usize) -> usize,
    ) -> Result<Self, GroupError> {
        let n = names.len();
        let table = (0..n).map(|a| (0..n).map(|b| mul(a, b)).collect()).collect();
        Self::from_table(names, table)
    }

    pub fn from_wire(wire: &GroupTable) -> Result<Self, GroupError> {
        let index: HashMap<&str, usize> = wire
            .elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.as_str(), i))
            .collect();
        let mut table = Vec::with_capacity(wire.table.len());
        for row in &wire.table {
            let mut out = Vec::with_capacity(row.len());
            for entry in row {
                let idx = index
                    .get(entry.as_str())
                    .copied()
                    .ok_or_else(|| GroupError::UnknownElement(entry.clone()))?;
                out.push(idx);
            }
            table.push(out);
        }
        Self::from_table(wire.elements.clone(), table)
    }

    pub fn to_wire(&self) -> GroupTable {
        GroupTable {
            elements: self.names.clone(),
            table: (0..self.order())
                .map(|a| {
                    (0..self.order())
                        .map(|b| self.names[self.mul(a, b)].clone())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    /// Cyclic group of order `n`, elements named `"0".."n-1"`.
    pub fn cyclic(n: usize) -> Self {
        assert!(n > 0, "cyclic group of order 0");
        let names = (0..n).map(|i| i.to_string()).collect();
        Self::from_fn(names, |a, b| (a + b) % n).expect("cyclic group axioms")
    }

    /// Symmetric group on `n` letters; elements are permutations written as
    /// one-line images, e.g. `"021"`, ordered lexicographically.
    pub fn symmetric(n: usize) -> Self {
        let perms = permutations(n);
        let index: HashMap<Vec<usize>, usize> =
            perms.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let names = perms
            .iter()
            .map(|p| p.iter().map(|i| i.to_string()).collect::<String>())
            .collect();
        Self::from_fn(names, |a, b| {
            // (a*b)(i) = a(b(i))
            let p: Vec<usize> = perms[b].iter().map(|&i| perms[a][i]).collect();
            index[&p]
        })
        .expect("symmetric group axioms")
    }

    /// Dihedral group of order `2n` (symmetries of the `n`-gon).
    pub fn dihedral(n: usize) -> Self {
        assert!(n > 0);
        // element (f, r) = s^f r^r with s r s = r^{-1}
        let names = (0..2 * n)
            .map(|i| {
                let (f, r) = (i / n, i % n);
                if f == 0 {
                    format!("r{r}")
                } else {
                    format!("s{r}")
                }
            })
            .collect();
        Self::from_fn(names, |a, b| {
            let (fa, ra) = (a / n, a % n);
            let (fb, rb) = (b / n, b % n);
            let r = if fb == 0 { (ra + rb) % n } else { (n + rb - ra) % n };
            ((fa ^ fb) * n) + r
        })
        .expect("dihedral group axioms")
    }

    /// Quaternion group of order 8.
    pub fn quaternion() -> Self {
        // basis units 1,i,j,k with sign; index = 4*sign + unit
        const UNIT: [[(bool, usize); 4]; 4] = [
            [(false, 0), (false, 1), (false, 2), (false, 3)],
            [(false, 1), (true, 0), (false, 3), (true, 2)],
            [(false, 2), (true, 3), (true, 0), (false, 1)],
            [(false, 3), (false, 2), (true, 1), (true, 0)],
        ];
        let labels = ["1", "i", "j", "k"];
        let names = (0..8)
            .map(|x| {
                let sign = if x >= 4 { "-" } else { "+" };
                format!("{sign}{}", labels[x % 4])
            })
            .collect();
        Self::from_fn(names, |a, b| {
            let (sa, ua) = (a >= 4, a % 4);
            let (sb, ub) = (b >= 4, b % 4);
            let (s, u) = UNIT[ua][ub];
            let neg = sa ^ sb ^ s;
            u + if neg { 4 } else { 0 }
        })
        .expect("quaternion group axioms")
    }

    pub fn direct_product(a: &FiniteGroup, b: &FiniteGroup) -> Self {
        let nb = b.order();
        let names = (0..a.order() * nb)
            .map(|i| format!("({},{})", a.names[i / nb], b.names[i % nb]))
            .collect();
        Self::from_fn(names, |x, y| {
            a.mul(x / nb, y / nb) * nb + b.mul(x % nb, y % nb)
        })
        .expect("product of groups is a group")
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, a: usize) -> &str {
        &self.names[a]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order() + b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut k = 1;
        let mut x = a;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn center(&self) -> Vec<usize> {
        let n = self.order();
        (0..n)
            .filter(|&z| (0..n).all(|a| self.mul(z, a) == self.mul(a, z)))
            .collect()
    }

    /// Closure of `gens` under multiplication, sorted.
    pub fn generated_by(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order()];
        let mut queue = VecDeque::from([self.identity]);
        seen[self.identity] = true;
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        (0..self.order()).filter(|&i| seen[i]).collect()
    }

    /// A small generating set, chosen greedily by descending element order
    /// and then index, so that it is deterministic.
    pub fn generators(&self) -> Vec<usize> {
        let mut candidates: Vec<usize> = (0..self.order()).collect();
        candidates.sort_by_key(|&a| (std::cmp::Reverse(self.element_order(a)), a));
        let mut gens = Vec::new();
        let mut span = vec![self.identity];
        for a in candidates {
            if span.len() == self.order() {
                break;
            }
            if span.binary_search(&a).is_err() {
                gens.push(a);
                span = self.generated_by(&gens);
            }
        }
        gens
    }

    pub fn is_subgroup(&self, elems: &[usize]) -> bool {
        let set: BTreeSet<usize> = elems.iter().copied().collect();
        set.contains(&self.identity)
            && set.iter().all(|&a| set.contains(&self.inv(a)))
            && set
                .iter()
                .all(|&a| set.iter().all(|&b| set.contains(&self.mul(a, b))))
    }

    pub fn is_normal_subgroup(&self, elems: &[usize]) -> bool {
        let set: BTreeSet<usize> = elems.iter().copied().collect();
        self.is_subgroup(elems)
            && (0..self.order()).all(|g| {
                set.iter()
                    .all(|&h| set.contains(&self.mul(self.mul(g, h), self.inv(g))))
            })
    }

    /// The subgroup on `elems` (which must be closed) as a group in its own
    /// right; element `i` of the result is `elems[i]`.
    pub fn subgroup(&self, elems: &[usize]) -> Result<Self, GroupError> {
        let pos: HashMap<usize, usize> = elems.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let names = elems.iter().map(|&e| self.names[e].clone()).collect();
        let mut table = Vec::with_capacity(elems.len());
        for &a in elems {
            let mut row = Vec::with_capacity(elems.len());
            for &b in elems {
                let p = pos
                    .get(&self.mul(a, b))
                    .copied()
                    .ok_or_else(|| GroupError::UnknownElement(self.names[self.mul(a, b)].clone()))?;
                row.push(p);
            }
            table.push(row);
        }
        Self::from_table(names, table)
    }

    /// Quotient by a normal subgroup. Returns the quotient group and, for
    /// each coset, its representative (smallest index). Coset `i` of the
    /// result corresponds to `reps[i]`; the identity coset comes first.
    pub fn quotient(&self, normal: &[usize]) -> Result<(Self, Vec<usize>), GroupError> {
        let n = self.order();
        let mut coset_of = vec![usize::MAX; n];
        let mut reps = Vec::new();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&a| (a != self.identity, a));
        for a in order {
            if coset_of[a] != usize::MAX {
                continue;
            }
            let c = reps.len();
            reps.push(a);
            for &h in normal {
                coset_of[self.mul(a, h)] = c;
            }
        }
        let names = reps.iter().map(|&r| format!("[{}]", self.names[r])).collect();
        let q = Self::from_fn(names, |x, y| coset_of[self.mul(reps[x], reps[y])])?;
        Ok((q, reps))
    }

    /// Checks that `map` (indexed by elements of `self`) is a homomorphism
    /// into `other`.
    pub fn is_homomorphism(&self, other: &FiniteGroup, map: &[usize]) -> bool {
        let n = self.order();
        map.len() == n
            && (0..n).all(|a| {
                (0..n).all(|b| map[self.mul(a, b)] == other.mul(map[a], map[b]))
            })
    }

    /// Extends an assignment on `gens` to a homomorphism into `other`, if one
    /// exists. Generic over whether the images generate all of `other`.
    pub fn extend_homomorphism(
        &self,
        other: &FiniteGroup,
        gens: &[usize],
        images: &[usize],
    ) -> Option<Vec<usize>> {
        let mut map = vec![usize::MAX; self.order()];
        map[self.identity] = other.identity;
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for (&g, &img) in gens.iter().zip(images) {
                let y = self.mul(x, g);
                let fy = other.mul(map[x], img);
                if map[y] == usize::MAX {
                    map[y] = fy;
                    queue.push_back(y);
                } else if map[y] != fy {
                    return None;
                }
            }
        }
        if map.contains(&usize::MAX) {
            return None;
        }
        self.is_homomorphism(other, &map).then_some(map)
    }

    /// All homomorphisms `self -> other` (optionally only injective ones),
    /// found by assigning images to a fixed generating set.
    pub fn homomorphisms(&self, other: &FiniteGroup, injective_only: bool) -> Vec<Vec<usize>> {
        let gens = self.generators();
        let candidates: Vec<Vec<usize>> = gens
            .iter()
            .map(|&g| {
                let og = self.element_order(g);
                (0..other.order())
                    .filter(|&h| {
                        let oh = other.element_order(h);
                        if injective_only {
                            oh == og
                        } else {
                            og.is_multiple_of(oh)
                        }
                    })
                    .collect()
            })
            .collect();
        let mut out = Vec::new();
        let mut images = vec![0; gens.len()];
        self.homs_rec(other, &gens, &candidates, 0, &mut images, injective_only, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn homs_rec(
        &self,
        other: &FiniteGroup,
        gens: &[usize],
        candidates: &[Vec<usize>],
        depth: usize,
        images: &mut Vec<usize>,
        injective_only: bool,
        out: &mut Vec<Vec<usize>>,
    ) {
        if depth == gens.len() {
            if let Some(map) = self.extend_homomorphism(other, gens, images) {
                if !injective_only || is_injective(&map, other.order()) {
                    out.push(map);
                }
            }
            return;
        }
        for &c in &candidates[depth] {
            images[depth] = c;
            self.homs_rec(other, gens, candidates, depth + 1, images, injective_only, out);
        }
    }

    /// A group isomorphism `self -> other`, or `None`.
    pub fn isomorphism(&self, other: &FiniteGroup) -> Option<Vec<usize>> {
        if self.order() != other.order() || self.order_profile() != other.order_profile() {
            return None;
        }
        let gens = self.generators();
        let candidates: Vec<Vec<usize>> = gens
            .iter()
            .map(|&g| {
                let og = self.element_order(g);
                (0..other.order())
                    .filter(|&h| other.element_order(h) == og)
                    .collect()
            })
            .collect();
        let mut images = vec![0; gens.len()];
        self.iso_rec(other, &gens, &candidates, 0, &mut images)
    }

    fn iso_rec(
        &self,
        other: &FiniteGroup,
        gens: &[usize],
        candidates: &[Vec<usize>],
        depth: usize,
        images: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        if depth == gens.len() {
            let map = self.extend_homomorphism(other, gens, images)?;
            return is_injective(&map, other.order()).then_some(map);
        }
        for &c in &candidates[depth] {
            images[depth] = c;
            if let Some(m) = self.iso_rec(other, gens, candidates, depth + 1, images) {
                return Some(m);
            }
        }
        None
    }

    pub fn is_isomorphic(&self, other: &FiniteGroup) -> bool {
        self.isomorphism(other).is_some()
    }

    /// Sorted multiset of element orders; an isomorphism invariant.
    pub fn order_profile(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.order()).map(|a| self.element_order(a)).collect();
        v.sort_unstable();
        v
    }

    /// All automorphisms, identity first, the rest in lexicographic order.
    pub fn automorphisms(&self) -> Vec<Vec<usize>> {
        let mut autos = self.homomorphisms(self, true);
        autos.sort_by_key(|m| (m.iter().enumerate().any(|(i, &v)| i != v), m.clone()));
        autos
    }

    /// Conjugation `x -> g x g^{-1}`.
    pub fn conjugation(&self, g: usize) -> Vec<usize> {
        let gi = self.inv(g);
        (0..self.order())
            .map(|x| self.mul(self.mul(g, x), gi))
            .collect()
    }
}

/// Builds the group of permutations `maps` under composition
/// (`mul(a, b) = a after b`). The identity should be in `maps`.
pub fn permutation_group(
    names: Vec<String>,
    maps: &[Vec<usize>],
) -> Result<FiniteGroup, GroupError> {
    let index: HashMap<&[usize], usize> = maps
        .iter()
        .enumerate()
        .map(|(i, m)| (m.as_slice(), i))
        .collect();
    let n = maps.len();
    let mut table = Vec::with_capacity(n);
    for a in maps {
        let mut row = Vec::with_capacity(n);
        for b in maps {
            let c: Vec<usize> = b.iter().map(|&x| a[x]).collect();
            match index.get(c.as_slice()) {
                Some(&k) => row.push(k),
                None => return Err(GroupError::UnknownElement(format!("{c:?}"))),
            }
        }
        table.push(row);
    }
    FiniteGroup::from_table(names, table)
}

fn is_injective(map: &[usize], codomain: usize) -> bool {
    let mut seen = vec![false; codomain];
    map.iter().all(|&v| !std::mem::replace(&mut seen[v], true))
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn rec(n: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                current.push(i);
                rec(n, current, used, out);
                current.pop();
                used[i] = false;
            }
        }
    }
    rec(n, &mut current, &mut used, &mut out);
    out
}
