//! Finite groups with densely indexed elements.
//!
//! Two families are supported: symmetric groups `S_n` (elements ranked by
//! their Lehmer code, so the identity is index 0) and finite abelian
//! products `Z_{N1} x ... x Z_{Nm}` (elements indexed row-major over their
//! component digits, first component most significant).
//!
//! Permutation composition follows `(g·h)(i) = g(h(i))`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest `n` for which `S_n` can be built.
pub const MAX_SYMMETRIC_DEGREE: usize = 8;
/// Largest supported abelian group order.
pub const MAX_ABELIAN_ORDER: usize = 4096;
/// Groups up to this order get a precomputed multiplication table.
const TABLE_ORDER_LIMIT: usize = 720;

/// A permutation of `{0, .., n-1}` in one-line notation.
///
/// The textual form is 1-based, e.g. `(2,3,1)` maps 1→2, 2→3, 3→1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n).collect())
    }

    /// Builds a permutation from 0-based images.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            if x >= n || seen[x] {
                return Err(Error::domain(format!("{images:?} is not a permutation")));
            }
            seen[x] = true;
        }
        Ok(Perm(images))
    }

    /// Builds a permutation from 1-based one-line notation.
    pub fn from_one_line(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return Err(Error::domain("one-line notation is 1-based"));
        }
        Self::from_images(images.iter().map(|&x| x - 1).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    /// 0-based images.
    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn one_line(&self) -> Vec<usize> {
        self.0.iter().map(|&x| x + 1).collect()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    /// `self ∘ other`, i.e. `other` is applied first.
    pub fn compose(&self, other: &Perm) -> Perm {
        assert_eq!(self.degree(), other.degree(), "degree mismatch");
        Perm(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x] = i;
        }
        Perm(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// Lexicographic rank among all permutations of the same degree.
    pub fn lehmer_rank(&self) -> usize {
        let n = self.0.len();
        let mut rank = 0;
        for i in 0..n {
            let smaller = self.0[i + 1..].iter().filter(|&&x| x < self.0[i]).count();
            rank = rank * (n - i) + smaller;
        }
        rank
    }

    /// Inverse of [`Perm::lehmer_rank`].
    pub fn lehmer_unrank(n: usize, mut rank: usize) -> Perm {
        let mut digits = vec![0; n];
        for i in (0..n).rev() {
            let base = n - i;
            digits[i] = rank % base;
            rank /= base;
        }
        let mut pool: Vec<usize> = (0..n).collect();
        Perm(digits.into_iter().map(|d| pool.remove(d)).collect())
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.one_line().iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Which group a [`Group`] is.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroupDescriptor {
    Symmetric(usize),
    Abelian(Vec<usize>),
}

impl GroupDescriptor {
    pub fn order(&self) -> usize {
        match self {
            GroupDescriptor::Symmetric(n) => (1..=*n).product(),
            GroupDescriptor::Abelian(moduli) => moduli.iter().product(),
        }
    }
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupDescriptor::Symmetric(n) => write!(f, "S{n}"),
            GroupDescriptor::Abelian(moduli) => {
                let parts: Vec<String> = moduli.iter().map(|m| format!("Z{m}")).collect();
                write!(f, "{}", parts.join("x"))
            }
        }
    }
}

impl FromStr for GroupDescriptor {
    type Err = Error;

    /// Parses `S5`, `Z4`, `Z2xZ2xZ3` (case-insensitive).
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let bad = || Error::parse(format!("invalid group descriptor {s:?}"));
        if let Some(rest) = t.strip_prefix('s') {
            let n: usize = rest.parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(bad());
            }
            return Ok(GroupDescriptor::Symmetric(n));
        }
        let mut moduli = Vec::new();
        for part in t.split('x') {
            let m: usize = part
                .strip_prefix('z')
                .ok_or_else(bad)?
                .parse()
                .map_err(|_| bad())?;
            if m == 0 {
                return Err(bad());
            }
            moduli.push(m);
        }
        Ok(GroupDescriptor::Abelian(moduli))
    }
}

#[derive(Debug)]
struct GroupInner {
    descriptor: GroupDescriptor,
    order: usize,
    perms: Vec<Perm>,
    table: Option<Vec<u32>>,
    inverses: Vec<u32>,
}

/// An immutable finite group. Cloning is cheap.
#[derive(Clone, Debug)]
pub struct Group(Arc<GroupInner>);

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        self.0.descriptor == other.0.descriptor
    }
}

impl Eq for Group {}

impl Group {
    pub fn new(descriptor: GroupDescriptor) -> Result<Self> {
        match &descriptor {
            GroupDescriptor::Symmetric(n) => {
                if *n == 0 {
                    return Err(Error::domain("S_0 is not supported"));
                }
                if *n > MAX_SYMMETRIC_DEGREE {
                    return Err(Error::capacity(format!(
                        "S{n} exceeds the supported degree {MAX_SYMMETRIC_DEGREE}"
                    )));
                }
            }
            GroupDescriptor::Abelian(moduli) => {
                if moduli.is_empty() || moduli.contains(&0) {
                    return Err(Error::domain("abelian moduli must be positive"));
                }
                let order = moduli.iter().try_fold(1usize, |acc, &m| acc.checked_mul(m));
                if order.is_none_or(|o| o > MAX_ABELIAN_ORDER) {
                    return Err(Error::capacity(format!(
                        "{descriptor} exceeds the supported order {MAX_ABELIAN_ORDER}"
                    )));
                }
            }
        }
        let order = descriptor.order();
        let perms = match &descriptor {
            GroupDescriptor::Symmetric(n) => (0..order).map(|r| Perm::lehmer_unrank(*n, r)).collect(),
            GroupDescriptor::Abelian(_) => Vec::new(),
        };
        let mut inner = GroupInner {
            descriptor,
            order,
            perms,
            table: None,
            inverses: Vec::new(),
        };
        inner.inverses = (0..order).map(|g| inner.inv_slow(g) as u32).collect();
        if order <= TABLE_ORDER_LIMIT {
            let mut table = Vec::with_capacity(order * order);
            for g in 0..order {
                for h in 0..order {
                    table.push(inner.mul_slow(g, h) as u32);
                }
            }
            inner.table = Some(table);
        }
        Ok(Group(Arc::new(inner)))
    }

    pub fn symmetric(n: usize) -> Result<Self> {
        Self::new(GroupDescriptor::Symmetric(n))
    }

    pub fn abelian(moduli: &[usize]) -> Result<Self> {
        Self::new(GroupDescriptor::Abelian(moduli.to_vec()))
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::new(s.parse()?)
    }

    pub fn descriptor(&self) -> &GroupDescriptor {
        &self.0.descriptor
    }

    pub fn order(&self) -> usize {
        self.0.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn is_abelian(&self) -> bool {
        match &self.0.descriptor {
            GroupDescriptor::Abelian(_) => true,
            GroupDescriptor::Symmetric(n) => *n <= 2,
        }
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.0.order
    }

    fn check(&self, g: usize) -> Result<()> {
        if g >= self.0.order {
            return Err(Error::domain(format!(
                "element index {g} out of range for {} (order {})",
                self.0.descriptor, self.0.order
            )));
        }
        Ok(())
    }

    /// Checked product `g·h`.
    pub fn compose(&self, g: usize, h: usize) -> Result<usize> {
        self.check(g)?;
        self.check(h)?;
        Ok(self.mul(g, h))
    }

    /// Checked inverse.
    pub fn inverse(&self, g: usize) -> Result<usize> {
        self.check(g)?;
        Ok(self.inv(g))
    }

    /// Unchecked product; panics on out-of-range indices.
    #[inline]
    pub fn mul(&self, g: usize, h: usize) -> usize {
        match &self.0.table {
            Some(t) => t[g * self.0.order + h] as usize,
            None => self.0.mul_slow(g, h),
        }
    }

    #[inline]
    pub fn inv(&self, g: usize) -> usize {
        self.0.inverses[g] as usize
    }

    /// `g^e` for `e ∈ {-1, 0, 1}`.
    pub fn pow_sign(&self, g: usize, e: i8) -> usize {
        match e {
            0 => self.identity(),
            1 => g,
            -1 => self.inv(g),
            _ => panic!("exponent {e} outside {{-1,0,1}}"),
        }
    }

    /// The permutation with index `g` (symmetric groups only).
    pub fn perm(&self, g: usize) -> Option<&Perm> {
        self.0.perms.get(g)
    }

    /// Index of a permutation in this symmetric group.
    pub fn index_of_perm(&self, p: &Perm) -> Result<usize> {
        match self.0.descriptor {
            GroupDescriptor::Symmetric(n) if p.degree() == n => Ok(p.lehmer_rank()),
            _ => Err(Error::domain(format!("{p} is not an element of {}", self.0.descriptor))),
        }
    }

    /// Component digits of an abelian element.
    pub fn digits(&self, g: usize) -> Option<Vec<usize>> {
        match &self.0.descriptor {
            GroupDescriptor::Abelian(moduli) => Some(decode_digits(moduli, g)),
            GroupDescriptor::Symmetric(_) => None,
        }
    }

    /// Index of an abelian element given its digits (reduced mod each modulus).
    pub fn index_of_digits(&self, digits: &[usize]) -> Result<usize> {
        match &self.0.descriptor {
            GroupDescriptor::Abelian(moduli) if moduli.len() == digits.len() => {
                Ok(encode_digits(moduli, digits))
            }
            _ => Err(Error::domain(format!(
                "{digits:?} is not an element of {}",
                self.0.descriptor
            ))),
        }
    }
}

impl GroupInner {
    fn mul_slow(&self, g: usize, h: usize) -> usize {
        assert!(g < self.order && h < self.order, "element index out of range");
        match &self.descriptor {
            GroupDescriptor::Symmetric(_) => self.perms[g].compose(&self.perms[h]).lehmer_rank(),
            GroupDescriptor::Abelian(moduli) => {
                let (mut a, mut b) = (g, h);
                let mut out = 0;
                let mut place = 1;
                for &m in moduli.iter().rev() {
                    out += ((a % m + b % m) % m) * place;
                    place *= m;
                    a /= m;
                    b /= m;
                }
                out
            }
        }
    }

    fn inv_slow(&self, g: usize) -> usize {
        match &self.descriptor {
            GroupDescriptor::Symmetric(_) => self.perms[g].inverse().lehmer_rank(),
            GroupDescriptor::Abelian(moduli) => {
                let d: Vec<usize> = decode_digits(moduli, g)
                    .iter()
                    .zip(moduli)
                    .map(|(&x, &m)| (m - x) % m)
                    .collect();
                encode_digits(moduli, &d)
            }
        }
    }
}

pub(crate) fn decode_digits(moduli: &[usize], mut g: usize) -> Vec<usize> {
    let mut d = vec![0; moduli.len()];
    for (slot, &m) in d.iter_mut().zip(moduli).rev() {
        *slot = g % m;
        g /= m;
    }
    d
}

pub(crate) fn encode_digits(moduli: &[usize], digits: &[usize]) -> usize {
    digits
        .iter()
        .zip(moduli)
        .fold(0, |acc, (&d, &m)| acc * m + d % m)
}

/// All partitions of `n`, largest parts first, in descending lexicographic order.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=rest.min(max)).rev() {
            prefix.push(part);
            go(rest - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// Largest order of an abelian subgroup of `S_n` generated by disjoint
/// cycles: the maximum over partitions of `n` of the product of the parts.
pub fn largest_abelian_order(n: usize) -> Result<u128> {
    if n < 1 {
        return Err(Error::domain("largest_abelian_order needs n >= 1"));
    }
    let mut best = vec![1u128; n + 1];
    for m in 1..=n {
        best[m] = (1..=m).map(|first| first as u128 * best[m - first]).max().unwrap_or(1);
    }
    Ok(best[n])
}

/// An injective homomorphism `H → G` together with a left transversal.
#[derive(Clone, Debug)]
pub struct SubgroupEmbedding {
    pub parent: Group,
    pub subgroup: Group,
    /// `injection[h]` is the index in `parent` of the image of `h`.
    pub injection: Vec<usize>,
    /// One representative per left coset `t·ι(H)`, in increasing index order.
    pub transversal: Vec<usize>,
}

impl SubgroupEmbedding {
    /// Validates `injection` exhaustively and computes the transversal.
    pub fn new(parent: Group, subgroup: Group, injection: Vec<usize>) -> Result<Self> {
        if injection.len() != subgroup.order() {
            return Err(Error::domain("injection length differs from subgroup order"));
        }
        let mut hit = vec![false; parent.order()];
        for &g in &injection {
            parent.check(g)?;
            if std::mem::replace(&mut hit[g], true) {
                return Err(Error::domain("embedding is not injective"));
            }
        }
        for a in subgroup.elements() {
            for b in subgroup.elements() {
                if injection[subgroup.mul(a, b)] != parent.mul(injection[a], injection[b]) {
                    return Err(Error::domain(format!(
                        "embedding is not a homomorphism at ({a}, {b})"
                    )));
                }
            }
        }
        let mut covered = vec![false; parent.order()];
        let mut transversal = Vec::new();
        for t in parent.elements() {
            if covered[t] {
                continue;
            }
            transversal.push(t);
            for &h in &injection {
                covered[parent.mul(t, h)] = true;
            }
        }
        Ok(SubgroupEmbedding {
            parent,
            subgroup,
            injection,
            transversal,
        })
    }

    pub fn index(&self) -> usize {
        self.transversal.len()
    }

    /// Writes `g = t·ι(h)`, returning (position of `t` in the transversal, `h`).
    pub fn factor(&self, g: usize) -> (usize, usize) {
        for (c, &t) in self.transversal.iter().enumerate() {
            let rest = self.parent.mul(self.parent.inv(t), g);
            if let Some(h) = self.injection.iter().position(|&x| x == rest) {
                return (c, h);
            }
        }
        unreachable!("transversal covers the parent group")
    }
}

/// The abelian subgroup `∏ Z_{part}` of `S_n` generated by disjoint cycles on
/// consecutive blocks of points, one block per part of `cycle_type`.
pub fn abelian_subgroup_of_symmetric(n: usize, cycle_type: &[usize]) -> Result<SubgroupEmbedding> {
    if cycle_type.contains(&0) || cycle_type.iter().sum::<usize>() != n {
        return Err(Error::domain(format!("{cycle_type:?} is not a partition of {n}")));
    }
    let parent = Group::symmetric(n)?;
    let mut moduli: Vec<usize> = cycle_type.iter().copied().filter(|&p| p > 1).collect();
    if moduli.is_empty() {
        moduli.push(1);
    }
    let subgroup = Group::abelian(&moduli)?;
    // starting point of each nontrivial block
    let mut offsets = Vec::new();
    let mut start = 0;
    for &p in cycle_type {
        if p > 1 {
            offsets.push(start);
        }
        start += p;
    }
    let injection = subgroup
        .elements()
        .map(|h| {
            let digits = subgroup.digits(h).expect("abelian");
            let mut images: Vec<usize> = (0..n).collect();
            for ((&e, &m), &o) in digits.iter().zip(&moduli).zip(&offsets) {
                if m == 1 {
                    continue;
                }
                for j in 0..m {
                    images[o + j] = o + (j + e) % m;
                }
            }
            Perm(images).lehmer_rank()
        })
        .collect();
    SubgroupEmbedding::new(parent, subgroup, injection)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_largest(n: usize) -> u128 {
        partitions(n)
            .iter()
            .map(|p| p.iter().map(|&x| x as u128).product())
            .max()
            .unwrap()
    }

    #[test]
    fn compose_matches_convention() {
        let s3 = Group::symmetric(3).unwrap();
        let g = s3.index_of_perm(&Perm::from_one_line(&[2, 1, 3]).unwrap()).unwrap();
        let h = s3.index_of_perm(&Perm::from_one_line(&[1, 3, 2]).unwrap()).unwrap();
        let gh = s3.compose(g, h).unwrap();
        assert_eq!(s3.perm(gh).unwrap().one_line(), vec![2, 3, 1]);
        assert_eq!(s3.compose(g, s3.identity()).unwrap(), g);
    }

    #[test]
    fn s4_associative_exhaustive() {
        let g = Group::symmetric(4).unwrap();
        for a in g.elements() {
            for b in g.elements() {
                for c in g.elements() {
                    assert_eq!(g.mul(g.mul(a, b), c), g.mul(a, g.mul(b, c)));
                }
            }
        }
    }

    #[test]
    fn inverses() {
        let z4 = Group::abelian(&[4]).unwrap();
        assert_eq!(z4.inverse(1).unwrap(), 3);
        assert_eq!(z4.inverse(0).unwrap(), 0);
        let s3 = Group::symmetric(3).unwrap();
        let g = s3.index_of_perm(&Perm::from_one_line(&[2, 3, 1]).unwrap()).unwrap();
        // oracle: search for the element that composes to the identity
        let found = s3.elements().find(|&h| s3.mul(g, h) == 0).unwrap();
        assert_eq!(s3.inverse(g).unwrap(), found);
        assert_eq!(s3.perm(found).unwrap().one_line(), vec![3, 1, 2]);
    }

    #[test]
    fn out_of_range_is_domain_error() {
        let g = Group::abelian(&[3]).unwrap();
        assert!(matches!(g.compose(3, 0), Err(Error::Domain(_))));
        assert!(matches!(g.inverse(7), Err(Error::Domain(_))));
    }

    #[test]
    fn group_axioms_small_groups() {
        for d in ["S1", "S2", "S3", "S4", "S5", "Z1", "Z6", "Z2xZ4", "Z2xZ2xZ3", "Z3xZ5"] {
            let g = Group::parse(d).unwrap();
            for a in g.elements() {
                assert_eq!(g.mul(a, 0), a);
                assert_eq!(g.mul(0, a), a);
                assert_eq!(g.mul(a, g.inv(a)), 0);
                assert_eq!(g.mul(g.inv(a), a), 0);
            }
        }
        let s6 = Group::symmetric(6).unwrap();
        for a in s6.elements().step_by(7) {
            for b in s6.elements().step_by(11) {
                for c in s6.elements().step_by(13) {
                    assert_eq!(s6.mul(s6.mul(a, b), c), s6.mul(a, s6.mul(b, c)));
                }
            }
        }
    }

    #[test]
    fn untabled_group_agrees_with_perm_arithmetic() {
        let s7 = Group::symmetric(7).unwrap();
        let a = 1234;
        let b = 4321;
        let expected = s7.perm(a).unwrap().compose(s7.perm(b).unwrap());
        assert_eq!(s7.perm(s7.mul(a, b)).unwrap(), &expected);
        assert_eq!(s7.mul(a, s7.inv(a)), 0);
    }

    #[test]
    fn descriptor_parsing() {
        assert_eq!("s5".parse::<GroupDescriptor>().unwrap(), GroupDescriptor::Symmetric(5));
        assert_eq!(
            "z2XZ2xz3".parse::<GroupDescriptor>().unwrap(),
            GroupDescriptor::Abelian(vec![2, 2, 3])
        );
        assert_eq!(GroupDescriptor::Abelian(vec![2, 4]).to_string(), "Z2xZ4");
        for bad in ["", "S", "Z", "Zx2", "Q8", "S0", "Z0", "Z2x"] {
            assert!(bad.parse::<GroupDescriptor>().is_err(), "{bad}");
        }
        assert!(matches!(Group::parse("S9"), Err(Error::Capacity(_))));
        assert!(matches!(Group::parse("Z4097"), Err(Error::Capacity(_))));
    }

    #[test]
    fn lehmer_round_trip() {
        for n in 1..=6 {
            let total: usize = (1..=n).product();
            for r in 0..total {
                assert_eq!(Perm::lehmer_unrank(n, r).lehmer_rank(), r);
            }
        }
        assert!(Perm::lehmer_unrank(5, 0).is_identity());
    }

    #[test]
    fn abelian_subgroups_of_symmetric() {
        let z3 = abelian_subgroup_of_symmetric(3, &[3]).unwrap();
        assert_eq!(z3.subgroup.order(), 3);
        assert_eq!(z3.parent.perm(z3.injection[1]).unwrap().one_line(), vec![2, 3, 1]);
        assert_eq!(z3.index(), 2);

        let v4 = abelian_subgroup_of_symmetric(4, &[2, 2]).unwrap();
        assert_eq!(v4.subgroup.order(), 4);
        assert_eq!(v4.index(), 6);

        let z33 = abelian_subgroup_of_symmetric(6, &[3, 3]).unwrap();
        assert_eq!(z33.subgroup.order(), 9);
        // closure under the parent product
        let image: std::collections::HashSet<usize> = z33.injection.iter().copied().collect();
        for &a in &image {
            for &b in &image {
                assert!(image.contains(&z33.parent.mul(a, b)));
            }
        }

        assert!(abelian_subgroup_of_symmetric(4, &[2, 1]).is_err());
        assert!(abelian_subgroup_of_symmetric(3, &[3, 0]).is_err());
    }

    #[test]
    fn transversal_factorisation_is_unique() {
        let emb = abelian_subgroup_of_symmetric(4, &[2, 2]).unwrap();
        let mut seen = std::collections::HashSet::new();
        for &t in &emb.transversal {
            for &h in &emb.injection {
                assert!(seen.insert(emb.parent.mul(t, h)));
            }
        }
        assert_eq!(seen.len(), 24);
        for g in emb.parent.elements() {
            let (c, h) = emb.factor(g);
            assert_eq!(emb.parent.mul(emb.transversal[c], emb.injection[h]), g);
        }
    }

    #[test]
    fn largest_abelian_orders() {
        assert_eq!(largest_abelian_order(1).unwrap(), 1);
        assert_eq!(largest_abelian_order(6).unwrap(), 9);
        assert_eq!(largest_abelian_order(10).unwrap(), 36);
        assert_eq!(partitions(6).len(), 11);
        for n in 1..=12 {
            assert_eq!(largest_abelian_order(n).unwrap(), brute_largest(n), "n={n}");
        }
        for m in 1..=4u32 {
            assert_eq!(largest_abelian_order(3 * m as usize).unwrap(), 3u128.pow(m));
        }
        assert!(largest_abelian_order(0).is_err());
    }

    #[test]
    fn largest_matches_embedded_subgroups() {
        for n in 1..=8 {
            let best = partitions(n)
                .iter()
                .map(|p| abelian_subgroup_of_symmetric(n, p).unwrap().subgroup.order())
                .max()
                .unwrap();
            assert_eq!(best as u128, largest_abelian_order(n).unwrap());
        }
    }

    #[test]
    fn partitions_are_descending_lex() {
        assert_eq!(
            partitions(4),
            vec![vec![4], vec![3, 1], vec![2, 2], vec![2, 1, 1], vec![1, 1, 1, 1]]
        );
    }
}
