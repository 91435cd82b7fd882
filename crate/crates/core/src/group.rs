//! Arithmetic in the finite coefficient group `C_k^m`.
//!
//! Elements are exponent vectors over `Z/k`, written additively. The
//! generator `σ_j` is the `j`-th unit vector (types are 1-based
//! throughout the crate), `d_i = σ_1^i ⋯ σ_m^i` is the constant vector `i`.
//! Linear characters are stored by their dual vector; a character value is
//! the exponent of a fixed primitive `k`-th root of unity, so comparisons
//! are exact residue comparisons.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Mul, Neg};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("invalid group parameters: m = {m}, k = {k} (need m >= 3, k >= 2)")]
    InvalidParams { m: usize, k: u32 },
    #[error("parameter mismatch: (m = {0}, k = {1}) vs (m = {2}, k = {3})")]
    Mismatch(usize, u32, usize, u32),
    #[error("type index {j} out of range 1..={m}")]
    TypeOutOfRange { j: usize, m: usize },
}

/// Number of generators and modulus of `C_k^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct GroupParams {
    m: usize,
    k: u32,
    #[serde(skip)]
    prime: bool,
}

impl<'de> Deserialize<'de> for GroupParams {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            m: usize,
            k: u32,
        }
        let raw = Raw::deserialize(de)?;
        GroupParams::new(raw.m, raw.k).map_err(serde::de::Error::custom)
    }
}

impl GroupParams {
    pub fn new(m: usize, k: u32) -> Result<Self, GroupError> {
        if m < 3 || k < 2 {
            return Err(GroupError::InvalidParams { m, k });
        }
        Ok(GroupParams {
            m,
            k,
            prime: is_prime(k),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn k_is_prime(&self) -> bool {
        self.prime
    }

    /// Whether `(m, k)` satisfies `m >= 4` and `k` prime.
    pub fn meets_theorem_hypotheses(&self) -> bool {
        self.m >= 4 && self.prime
    }

    /// `k^m`, or `None` on overflow.
    pub fn order(&self) -> Option<u64> {
        (self.k as u64).checked_pow(self.m as u32)
    }

    /// Reduce an integer to a residue in `[0, k)`.
    pub fn residue(&self, n: i64) -> u32 {
        n.rem_euclid(self.k as i64) as u32
    }

    /// Heights not divisible by `k` carry branching vertices.
    pub fn is_branching(&self, height: i64) -> bool {
        self.residue(height) != 0
    }

    pub fn check_type(&self, j: usize) -> Result<(), GroupError> {
        if (1..=self.m).contains(&j) {
            Ok(())
        } else {
            Err(GroupError::TypeOutOfRange { j, m: self.m })
        }
    }

    /// Cyclic successor/predecessor on `1..=m`.
    pub fn cyc(&self, j: usize, offset: i64) -> usize {
        ((j as i64 - 1 + offset).rem_euclid(self.m as i64) + 1) as usize
    }

    pub fn identity(&self) -> Elem {
        Elem {
            exps: vec![0; self.m],
            k: self.k,
        }
    }

    pub fn elem(&self, exps: &[i64]) -> Result<Elem, GroupError> {
        if exps.len() != self.m {
            return Err(GroupError::Mismatch(exps.len(), self.k, self.m, self.k));
        }
        Ok(Elem {
            exps: exps.iter().map(|&e| self.residue(e)).collect(),
            k: self.k,
        })
    }

    /// The generator `σ_j`.
    pub fn sigma(&self, j: usize) -> Elem {
        let mut e = self.identity();
        e.exps[j - 1] = 1;
        e
    }

    /// `d_i = σ_1^i ⋯ σ_m^i`.
    pub fn diagonal(&self, i: i64) -> Elem {
        let r = self.residue(i);
        Elem {
            exps: vec![r; self.m],
            k: self.k,
        }
    }

    /// `σ_1 ⋯ σ_j`; the empty product for `j = 0`.
    pub fn prefix(&self, j: usize) -> Elem {
        let mut e = self.identity();
        for x in e.exps.iter_mut().take(j) {
            *x = 1;
        }
        e
    }

    /// `σ_1^2 ⋯ σ_{j-1}^2 σ_j`, the bottom-vertex coefficient of a type `j` square.
    pub fn beta(&self, j: usize) -> Elem {
        &self.prefix(j) * &self.prefix(j.saturating_sub(1))
    }

    /// `σ_1^{i+1} ⋯ σ_j^{i+1}`.
    pub fn gamma(&self, i: i64, j: usize) -> Elem {
        self.prefix(j).pow(i + 1)
    }

    /// All `k^m` elements in lexicographic order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        let total = self.order().expect("group order overflow");
        (0..total).map(move |mut idx| {
            let mut exps = vec![0u32; self.m];
            for slot in exps.iter_mut().rev() {
                *slot = (idx % self.k as u64) as u32;
                idx /= self.k as u64;
            }
            Elem { exps, k: self.k }
        })
    }

    /// All `k^m` characters in lexicographic order of their dual vectors.
    pub fn characters(&self) -> impl Iterator<Item = Character> + '_ {
        self.elements().map(|e| Character { dual: e })
    }

    /// The character `𝔇(j)`: `μ` on `σ_j`, `1` on the other generators.
    pub fn basis_character(&self, j: usize) -> Character {
        Character {
            dual: self.sigma(j),
        }
    }

    /// Generator of the stabiliser of the height-`i` base vertex.
    pub fn vertex_stabilizer(&self, i: i64) -> Subgroup {
        Subgroup::cyclic(&self.diagonal(i))
    }

    /// `⟨σ_{j-1} σ_j⟩` with cyclic indexing.
    pub fn edge_type_stabilizer(&self, j: usize) -> Result<Subgroup, GroupError> {
        self.check_type(j)?;
        let gen = &self.sigma(self.cyc(j, -1)) * &self.sigma(j);
        Ok(Subgroup::cyclic(&gen))
    }

    /// Coset `(σ_1 ⋯ σ_j)^{a-b} · ⟨σ_{j-1} σ_j⟩` of type-`j` coefficients at
    /// height `b` parallel to the identity edge at height `a`.
    pub fn climb_coset(&self, j: usize, a: i64, b: i64) -> Result<Coset, GroupError> {
        let sub = self.edge_type_stabilizer(j)?;
        Ok(Coset::new(self.prefix(j).pow(a - b), sub))
    }
}

impl fmt::Display for GroupParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(m={}, k={})", self.m, self.k)
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Element of `C_k^m` as an exponent vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem {
    exps: Vec<u32>,
    k: u32,
}

impl Elem {
    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn m(&self) -> usize {
        self.exps.len()
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn is_identity(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    fn check(&self, other: &Elem) -> Result<(), GroupError> {
        if self.k != other.k || self.m() != other.m() {
            Err(GroupError::Mismatch(self.m(), self.k, other.m(), other.k))
        } else {
            Ok(())
        }
    }

    pub fn checked_mul(&self, other: &Elem) -> Result<Elem, GroupError> {
        self.check(other)?;
        Ok(Elem {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| (a + b) % self.k)
                .collect(),
            k: self.k,
        })
    }

    pub fn pow(&self, n: i64) -> Elem {
        let r = n.rem_euclid(self.k as i64) as u64;
        Elem {
            exps: self
                .exps
                .iter()
                .map(|&a| ((a as u64 * r) % self.k as u64) as u32)
                .collect(),
            k: self.k,
        }
    }

    pub fn inverse(&self) -> Elem {
        self.pow(-1)
    }

    /// Order of the element: `k / gcd(k, e_1, …, e_m)`.
    pub fn order(&self) -> u64 {
        let g = self
            .exps
            .iter()
            .fold(self.k, |acc, &e| num_integer::gcd(acc, e));
        (self.k / g) as u64
    }
}

impl Mul for &Elem {
    type Output = Elem;

    /// Panics if the operands come from different groups; see [`Elem::checked_mul`].
    fn mul(self, rhs: &Elem) -> Elem {
        self.checked_mul(rhs)
            .expect("elements from different groups")
    }
}

impl Neg for &Elem {
    type Output = Elem;

    fn neg(self) -> Elem {
        self.inverse()
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.exps.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for Elem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.exps.serialize(s)
    }
}

/// Cyclic subgroup with its full element set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    generator: Elem,
    elements: BTreeSet<Elem>,
}

impl Subgroup {
    /// All powers of `gen`.
    pub fn cyclic(gen: &Elem) -> Subgroup {
        let mut elements = BTreeSet::new();
        let mut cur = gen.pow(0);
        loop {
            if !elements.insert(cur.clone()) {
                break;
            }
            cur = &cur * gen;
        }
        Subgroup {
            generator: gen.clone(),
            elements,
        }
    }

    pub fn generator(&self) -> &Elem {
        &self.generator
    }

    pub fn elements(&self) -> &BTreeSet<Elem> {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, g: &Elem) -> bool {
        self.elements.contains(g)
    }
}

/// Left coset `rep · sub`, with `rep` normalised to the lexicographically
/// smallest member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coset {
    rep: Elem,
    sub: Subgroup,
}

impl Coset {
    pub fn new(rep: Elem, sub: Subgroup) -> Coset {
        let rep = sub
            .elements
            .iter()
            .map(|s| &rep * s)
            .min()
            .expect("subgroups contain the identity");
        Coset { rep, sub }
    }

    pub fn rep(&self) -> &Elem {
        &self.rep
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.sub
    }

    pub fn translate(&self, g: &Elem) -> Coset {
        Coset::new(&self.rep * g, self.sub.clone())
    }

    pub fn contains(&self, g: &Elem) -> bool {
        self.sub.contains(&(g * &self.rep.inverse()))
    }

    pub fn elements(&self) -> BTreeSet<Elem> {
        self.sub.elements.iter().map(|s| &self.rep * s).collect()
    }
}

/// Exhaustive intersection of two cosets.
pub fn coset_intersection(c1: &Coset, c2: &Coset) -> Result<BTreeSet<Elem>, GroupError> {
    c1.rep.check(&c2.rep)?;
    Ok(c1
        .elements()
        .into_iter()
        .filter(|g| c2.contains(g))
        .collect())
}

/// Linear character given by its dual exponent vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Character {
    dual: Elem,
}

impl Character {
    pub fn from_dual(dual: Elem) -> Character {
        Character { dual }
    }

    pub fn dual(&self) -> &Elem {
        &self.dual
    }

    /// Exponent of `μ` taken by the character on `g`.
    pub fn eval(&self, g: &Elem) -> Result<u32, GroupError> {
        self.dual.check(g)?;
        Ok(self.eval_unchecked(g))
    }

    pub(crate) fn eval_unchecked(&self, g: &Elem) -> u32 {
        let k = self.dual.k as u64;
        (self
            .dual
            .exps
            .iter()
            .zip(&g.exps)
            .map(|(&a, &b)| a as u64 * b as u64)
            .sum::<u64>()
            % k) as u32
    }

    /// Pointwise product.
    pub fn product(&self, other: &Character) -> Character {
        Character {
            dual: &self.dual * &other.dual,
        }
    }

    pub fn inverse(&self) -> Character {
        Character {
            dual: self.dual.inverse(),
        }
    }

    pub fn is_trivial_on(&self, sub: &Subgroup) -> bool {
        self.eval_unchecked(&sub.generator) == 0
    }

    /// Constant on both cosets with distinct values.
    pub fn separates(&self, c1: &Coset, c2: &Coset) -> bool {
        self.is_trivial_on(&c1.sub)
            && self.is_trivial_on(&c2.sub)
            && self.eval_unchecked(&c1.rep) != self.eval_unchecked(&c2.rep)
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "χ{}", self.dual)
    }
}

/// First character in lexicographic dual order that takes different
/// constant values on the two cosets.
pub fn find_separating_character(
    params: &GroupParams,
    c1: &Coset,
    c2: &Coset,
) -> Result<Option<Character>, GroupError> {
    c1.rep.check(&c2.rep)?;
    params.identity().check(&c1.rep)?;
    Ok(params.characters().find(|chi| chi.separates(c1, c2)))
}
