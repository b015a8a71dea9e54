//! Finite role-set algebra.
//!
//! Roles are the integers `0..n` of a fixed [`Universe`]. A [`RoleSet`] is a
//! bit vector over that universe; endomorphisms act on roles and are used
//! through their preimages. Ultrafilters and filters on a finite universe are
//! always principal, so they are represented by a witness role and a core set
//! respectively.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Largest supported universe.
pub const MAX_ROLES: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RoleError {
    #[error("universe size must be in 1..={MAX_ROLES}, got {0}")]
    InvalidUniverse(usize),
    #[error("role {role} is out of range for a universe of size {size}")]
    RoleOutOfRange { role: usize, size: usize },
    #[error("universe mismatch: expected size {expected}, found {found}")]
    UniverseMismatch { expected: usize, found: usize },
}

/// The underlying set of roles `{0, .., n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Universe {
    size: u8,
}

impl Universe {
    pub fn new(size: usize) -> Result<Self, RoleError> {
        if size == 0 || size > MAX_ROLES {
            return Err(RoleError::InvalidUniverse(size));
        }
        Ok(Universe { size: size as u8 })
    }

    pub fn size(self) -> usize {
        self.size as usize
    }

    pub fn full(self) -> RoleSet {
        RoleSet { bits: mask(self.size()), size: self.size }
    }

    pub fn empty(self) -> RoleSet {
        RoleSet { bits: 0, size: self.size }
    }

    pub fn set<I: IntoIterator<Item = usize>>(self, roles: I) -> Result<RoleSet, RoleError> {
        let mut bits = 0u32;
        for r in roles {
            self.check_role(r)?;
            bits |= 1 << r;
        }
        Ok(RoleSet { bits, size: self.size })
    }

    pub fn singleton(self, role: usize) -> Result<RoleSet, RoleError> {
        self.set([role])
    }

    /// Every subset, in increasing bit-pattern order.
    pub fn subsets(self) -> impl Iterator<Item = RoleSet> {
        let size = self.size;
        (0..=mask(self.size())).map(move |bits| RoleSet { bits, size })
    }

    pub fn identity(self) -> Endomorphism {
        Endomorphism { image: (0..self.size).collect() }
    }

    pub fn endomorphism(self, image: Vec<usize>) -> Result<Endomorphism, RoleError> {
        if image.len() != self.size() {
            return Err(RoleError::UniverseMismatch { expected: self.size(), found: image.len() });
        }
        for &r in &image {
            self.check_role(r)?;
        }
        Ok(Endomorphism { image: image.into_iter().map(|r| r as u8).collect() })
    }

    /// `r ↦ r + 1 mod n`. For `n = 2` this is the swap.
    pub fn rotation(self) -> Endomorphism {
        let n = self.size;
        Endomorphism { image: (0..n).map(|r| (r + 1) % n).collect() }
    }

    pub fn constant(self, role: usize) -> Result<Endomorphism, RoleError> {
        self.check_role(role)?;
        Ok(Endomorphism { image: vec![role as u8; self.size()].into() })
    }

    /// All `n^n` endomorphisms in lexicographic order of their image arrays.
    pub fn all_endomorphisms(self) -> Vec<Endomorphism> {
        let n = self.size();
        let total = n.pow(n as u32);
        (0..total)
            .map(|mut code| {
                let mut image = vec![0u8; n];
                for slot in image.iter_mut().rev() {
                    *slot = (code % n) as u8;
                    code /= n;
                }
                Endomorphism { image: image.into() }
            })
            .collect()
    }

    pub fn ultrafilter(self, witness: usize) -> Result<Ultrafilter, RoleError> {
        self.check_role(witness)?;
        Ok(Ultrafilter { witness: witness as u8 })
    }

    pub fn ultrafilters(self) -> impl Iterator<Item = Ultrafilter> {
        (0..self.size).map(|witness| Ultrafilter { witness })
    }

    /// The filter `{R̄∅}`; restricting by it recovers the unrestricted calculus
    /// up to the single-full-set proviso.
    pub fn trivial_filter(self) -> PrincipalFilter {
        PrincipalFilter { core: self.full() }
    }

    pub fn check_set(self, set: RoleSet) -> Result<(), RoleError> {
        if set.size != self.size {
            return Err(RoleError::UniverseMismatch { expected: self.size(), found: set.size() });
        }
        Ok(())
    }

    pub fn check_endomorphism(self, f: &Endomorphism) -> Result<(), RoleError> {
        if f.image.len() != self.size() {
            return Err(RoleError::UniverseMismatch { expected: self.size(), found: f.image.len() });
        }
        Ok(())
    }

    pub fn check_ultrafilter(self, u: Ultrafilter) -> Result<(), RoleError> {
        self.check_role(u.witness())
    }

    fn check_role(self, role: usize) -> Result<(), RoleError> {
        if role >= self.size() {
            return Err(RoleError::RoleOutOfRange { role, size: self.size() });
        }
        Ok(())
    }
}

fn mask(size: usize) -> u32 {
    if size == 32 {
        u32::MAX
    } else {
        (1u32 << size) - 1
    }
}

/// A subset of the universe, stored as a bit vector tagged with its universe
/// size.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RoleSet {
    bits: u32,
    size: u8,
}

impl RoleSet {
    pub fn universe(self) -> Universe {
        Universe { size: self.size }
    }

    pub fn size(self) -> usize {
        self.size as usize
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn contains(self, role: usize) -> bool {
        role < self.size() && self.bits & (1 << role) != 0
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn is_full(self) -> bool {
        self.bits == mask(self.size())
    }

    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn roles(self) -> impl Iterator<Item = usize> {
        (0..self.size()).filter(move |&r| self.contains(r))
    }

    pub fn complement(self) -> RoleSet {
        RoleSet { bits: !self.bits & mask(self.size()), size: self.size }
    }

    pub fn union(self, other: RoleSet) -> Result<RoleSet, RoleError> {
        self.same_universe(other)?;
        Ok(RoleSet { bits: self.bits | other.bits, size: self.size })
    }

    pub fn intersection(self, other: RoleSet) -> Result<RoleSet, RoleError> {
        self.same_universe(other)?;
        Ok(RoleSet { bits: self.bits & other.bits, size: self.size })
    }

    pub fn difference(self, other: RoleSet) -> Result<RoleSet, RoleError> {
        self.same_universe(other)?;
        Ok(RoleSet { bits: self.bits & !other.bits, size: self.size })
    }

    pub fn is_subset(self, other: RoleSet) -> bool {
        self.size == other.size && self.bits & !other.bits == 0
    }

    pub fn is_disjoint(self, other: RoleSet) -> bool {
        self.bits & other.bits == 0
    }

    fn same_universe(self, other: RoleSet) -> Result<(), RoleError> {
        if self.size != other.size {
            return Err(RoleError::UniverseMismatch {
                expected: self.size(),
                found: other.size(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for RoleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RoleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, r) in self.roles().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str("]")
    }
}

/// True iff `parts` are pairwise disjoint and their union is `target`.
/// Empty parts are legal summands.
pub fn is_partition(parts: &[RoleSet], target: RoleSet) -> bool {
    let mut acc = 0u32;
    for p in parts {
        if p.size != target.size || acc & p.bits != 0 {
            return false;
        }
        acc |= p.bits;
    }
    acc == target.bits
}

/// A total map from roles to roles.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Endomorphism {
    image: Arc<[u8]>,
}

impl Endomorphism {
    pub fn size(&self) -> usize {
        self.image.len()
    }

    pub fn apply(&self, role: usize) -> usize {
        self.image[role] as usize
    }

    pub fn image(&self) -> impl Iterator<Item = usize> + '_ {
        self.image.iter().map(|&r| r as usize)
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &r)| i == r as usize)
    }

    /// `{ r | f(r) ∈ set }`.
    pub fn preimage(&self, set: RoleSet) -> Result<RoleSet, RoleError> {
        if set.size() != self.size() {
            return Err(RoleError::UniverseMismatch { expected: self.size(), found: set.size() });
        }
        let mut bits = 0u32;
        for (r, &img) in self.image.iter().enumerate() {
            if set.contains(img as usize) {
                bits |= 1 << r;
            }
        }
        Ok(RoleSet { bits, size: set.size })
    }
}

impl fmt::Debug for Endomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Endomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, r) in self.image.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str("]")
    }
}

/// The principal ultrafilter `{ R | witness ∈ R }`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ultrafilter {
    witness: u8,
}

impl Ultrafilter {
    pub fn witness(self) -> usize {
        self.witness as usize
    }

    pub fn contains(self, set: RoleSet) -> bool {
        set.contains(self.witness())
    }
}

impl fmt::Display for Ultrafilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(uf {})", self.witness)
    }
}

/// A filter on a finite universe, given by its core: `R ∈ F` iff `core ⊆ R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrincipalFilter {
    core: RoleSet,
}

impl PrincipalFilter {
    pub fn new(core: RoleSet) -> Self {
        PrincipalFilter { core }
    }

    pub fn core(self) -> RoleSet {
        self.core
    }

    pub fn contains(self, set: RoleSet) -> bool {
        self.core.is_subset(set)
    }
}

impl fmt::Display for PrincipalFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(filter {})", self.core)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(n: usize) -> Universe {
        Universe::new(n).unwrap()
    }

    #[test]
    fn complement_examples() {
        assert_eq!(u(3).set([0, 2]).unwrap().complement(), u(3).set([1]).unwrap());
        assert_eq!(u(3).empty().complement(), u(3).full());
        assert_eq!(u(2).full().complement(), u(2).empty());
    }

    #[test]
    fn universe_bounds() {
        assert!(Universe::new(0).is_err());
        assert!(Universe::new(33).is_err());
        assert!(u(32).full().is_full());
        assert_eq!(u(32).full().len(), 32);
    }

    #[test]
    fn partition_examples() {
        let n = u(3);
        let s = |r: &[usize]| n.set(r.iter().copied()).unwrap();
        assert!(is_partition(&[s(&[0]), s(&[1]), s(&[2])], n.full()));
        assert!(!is_partition(&[s(&[0, 1]), s(&[1, 2])], n.full()));
        let m = u(2);
        assert!(is_partition(&[m.empty(), m.full()], m.full()));
        assert!(!is_partition(&[], m.full()));
        assert!(is_partition(&[], m.empty()));
    }

    #[test]
    fn preimage_examples() {
        let n = u(3);
        let f = n.endomorphism(vec![1, 1, 0]).unwrap();
        assert_eq!(f.preimage(n.set([1]).unwrap()).unwrap(), n.set([0, 1]).unwrap());
        let m = u(2);
        let zero = m.set([0]).unwrap();
        assert_eq!(m.identity().preimage(zero).unwrap(), zero);
        assert_eq!(m.rotation().preimage(zero).unwrap(), m.set([1]).unwrap());
        assert!(f.preimage(zero).is_err());
    }

    #[test]
    fn ultrafilter_examples() {
        let n = u(3);
        let u0 = n.ultrafilter(0).unwrap();
        assert!(u0.contains(n.set([0, 2]).unwrap()));
        assert!(!u0.contains(n.empty()));
        let r = n.set([1, 2]).unwrap();
        assert!(!u0.contains(r));
        assert!(u0.contains(r.complement()));
    }

    #[test]
    fn filter_examples() {
        let n = u(2);
        let f = PrincipalFilter::new(n.set([0]).unwrap());
        assert!(f.contains(n.full()));
        assert!(!f.contains(n.set([1]).unwrap()));
        let t = n.trivial_filter();
        assert!(t.contains(n.full()));
        assert!(!t.contains(n.set([0]).unwrap()));
    }

    #[test]
    fn exhaustive_algebra_laws() {
        for size in 1..=4 {
            let n = u(size);
            let endos = n.all_endomorphisms();
            assert_eq!(endos.len(), size.pow(size as u32));
            for r in n.subsets() {
                assert_eq!(r.complement().complement(), r);
                for uf in n.ultrafilters() {
                    assert!(uf.contains(r) ^ uf.contains(r.complement()));
                }
                for f in &endos {
                    for s in n.subsets() {
                        let pi = f.preimage(r.intersection(s).unwrap()).unwrap();
                        let pu = f.preimage(r.union(s).unwrap()).unwrap();
                        let (fr, fs) = (f.preimage(r).unwrap(), f.preimage(s).unwrap());
                        assert_eq!(pi, fr.intersection(fs).unwrap());
                        assert_eq!(pu, fr.union(fs).unwrap());
                    }
                }
            }
            for f in &endos {
                assert_eq!(f.preimage(n.full()).unwrap(), n.full());
                assert_eq!(f.preimage(n.empty()).unwrap(), n.empty());
            }
            for core in n.subsets() {
                let filt = PrincipalFilter::new(core);
                assert!(filt.contains(n.full()));
                for a in n.subsets() {
                    for b in n.subsets() {
                        if filt.contains(a) && a.is_subset(b) {
                            assert!(filt.contains(b));
                        }
                        if filt.contains(a) && filt.contains(b) {
                            assert!(filt.contains(a.intersection(b).unwrap()));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn display_forms() {
        let n = u(3);
        assert_eq!(n.set([0, 2]).unwrap().to_string(), "[0,2]");
        assert_eq!(n.empty().to_string(), "[]");
        assert_eq!(n.endomorphism(vec![1, 1, 0]).unwrap().to_string(), "[1,1,0]");
        assert_eq!(n.ultrafilter(2).unwrap().to_string(), "(uf 2)");
        assert_eq!(PrincipalFilter::new(n.set([0]).unwrap()).to_string(), "(filter [0])");
    }
}
