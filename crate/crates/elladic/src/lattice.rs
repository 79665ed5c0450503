//! The divisor module `D(K)` on the primes above ℓ, its scalar product,
//! finite-group actions, the split partition coming from an imaginary
//! quadratic subfield and the relative pairing with values in `D(k)`.
//!
//! Divisor coefficients are exact integers throughout: every divisor in
//! the pipeline is the divisor of a field element or an integer word over
//! declared generators, so the pairing, the group equivariance and the
//! partial-pairing symmetry are all checked exactly, with no precision
//! involved.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::field::{EmbeddingSet, FieldElement};
use crate::padic::Valuation;
use crate::poly::Polynomial;
use crate::{Error, Result};

/// A finite group acting on the embedding indices.
///
/// Permutations are the primary data (`σ_i ∘ g = σ_{π_g(i)}`); optional
/// automorphism polynomials tie them to the Hensel roots and are validated
/// in [`crate::field::validate_group_against_roots`]. In the completely
/// split Galois case the action on the primes is simply transitive, so the
/// permutations are faithful and the multiplication table can be derived
/// from composition.
#[derive(Clone, Debug)]
pub struct GroupData {
    perms: BTreeMap<String, Vec<usize>>,
    h_subset: Option<BTreeSet<String>>,
    tau: Option<String>,
    dihedral: bool,
    polys: BTreeMap<String, Polynomial>,
}

impl GroupData {
    pub fn new(
        perms: BTreeMap<String, Vec<usize>>,
        h_subset: Option<BTreeSet<String>>,
        tau: Option<String>,
        dihedral: bool,
        polys: BTreeMap<String, Polynomial>,
    ) -> Self {
        Self { perms, h_subset, tau, dihedral, polys }
    }

    pub fn order(&self) -> usize {
        self.perms.len()
    }

    /// Labels in deterministic (sorted) order.
    pub fn labels(&self) -> impl Iterator<Item = &String> {
        self.perms.keys()
    }

    pub fn has_label(&self, label: &str) -> bool {
        self.perms.contains_key(label)
    }

    pub fn permutation(&self, label: &str) -> Result<&Vec<usize>> {
        self.perms
            .get(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn automorphism_poly(&self, label: &str) -> Option<&Polynomial> {
        self.polys.get(label)
    }

    pub fn tau(&self) -> Option<&String> {
        self.tau.as_ref()
    }

    pub fn h_labels(&self) -> Option<Vec<String>> {
        self.h_subset
            .as_ref()
            .map(|h| h.iter().cloned().collect())
    }

    pub fn is_dihedral_declared(&self) -> bool {
        self.dihedral
    }

    pub fn identity_label(&self) -> Result<&String> {
        let n = self.degree()?;
        let id: Vec<usize> = (0..n).collect();
        self.perms
            .iter()
            .find(|(_, p)| **p == id)
            .map(|(l, _)| l)
            .ok_or_else(|| Error::Validation("no identity element among the permutations".into()))
    }

    fn degree(&self) -> Result<usize> {
        self.perms
            .values()
            .next()
            .map(|p| p.len())
            .ok_or_else(|| Error::Validation("empty group".into()))
    }

    fn label_of_perm(&self, p: &[usize]) -> Option<&String> {
        self.perms.iter().find(|(_, q)| q.as_slice() == p).map(|(l, _)| l)
    }

    /// Group multiplication derived from the action:
    /// `act(a, act(b, x)) = act(a·b, x)`.
    pub fn mult(&self, a: &str, b: &str) -> Result<String> {
        let pa = self.permutation(a)?;
        let pb = self.permutation(b)?;
        let comp = compose(pb, pa);
        self.label_of_perm(&comp)
            .cloned()
            .ok_or_else(|| Error::Validation(format!("product {a}·{b} leaves the group")))
    }

    pub fn inverse(&self, a: &str) -> Result<String> {
        let pa = self.permutation(a)?;
        let inv = invert(pa);
        self.label_of_perm(&inv)
            .cloned()
            .ok_or_else(|| Error::Validation(format!("inverse of {a} leaves the group")))
    }

    /// Coset test: an element is in `H` or in `τH`.
    pub fn in_h(&self, label: &str) -> Result<bool> {
        let h = self
            .h_subset
            .as_ref()
            .ok_or_else(|| Error::Validation("no H subset declared".into()))?;
        if !self.has_label(label) {
            return Err(Error::UnknownLabel(label.to_string()));
        }
        Ok(h.contains(label))
    }

    /// Verify the group axioms on the permutations and the declared
    /// structure (τ an involution outside H, H a subgroup of index two,
    /// the dihedral relation when claimed).
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.perms.is_empty() {
            return Err(Error::Validation("empty group block".into()));
        }
        let mut seen = BTreeSet::new();
        for (label, p) in &self.perms {
            if p.len() != n {
                return Err(Error::Validation(format!(
                    "permutation `{label}` has length {} but there are {n} embeddings",
                    p.len()
                )));
            }
            let mut sorted = p.clone();
            sorted.sort_unstable();
            if sorted != (0..n).collect::<Vec<_>>() {
                return Err(Error::Validation(format!("`{label}` is not a permutation")));
            }
            if !seen.insert(p.clone()) {
                return Err(Error::Validation(format!(
                    "`{label}` duplicates another permutation; the action must be faithful"
                )));
            }
        }
        self.identity_label()?;
        for a in self.perms.keys() {
            if self.label_of_perm(&invert(self.permutation(a)?)).is_none() {
                return Err(Error::Validation(format!("inverse of `{a}` missing")));
            }
            for b in self.perms.keys() {
                self.mult(a, b)?;
            }
        }
        if let Some(tau) = &self.tau {
            let pt = self.permutation(tau)?;
            if compose(pt, pt) != (0..n).collect::<Vec<_>>() {
                return Err(Error::Validation(format!("tau = `{tau}` is not an involution")));
            }
        }
        if let Some(h) = &self.h_subset {
            let tau = self.tau.as_ref().ok_or_else(|| {
                Error::Validation("an H subset needs a declared tau".into())
            })?;
            if h.contains(tau) {
                return Err(Error::Validation("tau must lie outside H".into()));
            }
            if 2 * h.len() != self.order() {
                return Err(Error::Validation(format!(
                    "|H| = {} must be half of |G| = {}",
                    h.len(),
                    self.order()
                )));
            }
            for a in h {
                if !self.has_label(a) {
                    return Err(Error::UnknownLabel(a.clone()));
                }
                for b in h {
                    if !h.contains(&self.mult(a, b)?) {
                        return Err(Error::Validation(format!(
                            "H is not closed: {a}·{b} escapes"
                        )));
                    }
                }
            }
            if self.dihedral {
                // τ h τ = h^{-1} for every h in H, stated on the permutations
                let pt = self.permutation(tau)?;
                for a in h {
                    let pa = self.permutation(a)?;
                    let lhs = compose(&compose(pt, pa), pt);
                    if lhs != invert(pa) {
                        return Err(Error::Validation(format!(
                            "dihedral flag set but τ·{a}·τ ≠ {a}^-1"
                        )));
                    }
                }
            }
        } else if self.dihedral {
            return Err(Error::Validation("dihedral flag requires an H subset".into()));
        }
        Ok(())
    }
}

/// `(p ∘ q)(i) = p[q[i]]` — apply `q` first.
fn compose(p: &[usize], q: &[usize]) -> Vec<usize> {
    q.iter().map(|&i| p[i]).collect()
}

fn invert(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &j) in p.iter().enumerate() {
        inv[j] = i;
    }
    inv
}

/// An element of `D(K)`: integer coefficients indexed like the embeddings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divisor {
    coeffs: Vec<BigInt>,
}

impl Divisor {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        Self { coeffs }
    }

    pub fn zero(n: usize) -> Self {
        Self { coeffs: vec![BigInt::zero(); n] }
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); n];
        coeffs[i] = BigInt::from(1);
        Self { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::IndexMismatch(self.len(), other.len()));
        }
        Ok(Self::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Support: indices with nonzero coefficient.
    pub fn support(&self) -> Vec<usize> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, _)| i)
            .collect()
    }
}

/// The divisor of a field element: coefficient `i` is the ℓ-adic valuation
/// of `σ_i(a)`. The element must be an S-unit for this to be its full
/// divisor; that is the caller's responsibility via generator declaration.
pub fn divisor_of_element(a: &FieldElement, embeddings: &EmbeddingSet) -> Result<Divisor> {
    let mut coeffs = Vec::with_capacity(embeddings.len());
    for i in 0..embeddings.len() {
        match embeddings.embed(a, i)?.valuation() {
            Valuation::Finite(v) => coeffs.push(BigInt::from(v)),
            Valuation::ExactZero => return Err(Error::ZeroAtPrecision),
            Valuation::Bottom(_) => {
                return Err(Error::InsufficientPrecision(format!(
                    "σ_{i}(a) vanishes at the working precision; its valuation is unreadable"
                )))
            }
        }
    }
    Ok(Divisor::new(coeffs))
}

/// The divisor of an integer word over generators with known divisors.
pub fn divisor_of_word(exponents: &[BigInt], generator_divisors: &[Divisor]) -> Result<Divisor> {
    if exponents.len() != generator_divisors.len() {
        return Err(Error::LengthMismatch(exponents.len(), generator_divisors.len()));
    }
    let n = generator_divisors
        .first()
        .map(|d| d.len())
        .ok_or_else(|| Error::Validation("empty generator list".into()))?;
    let mut acc = Divisor::zero(n);
    for (e, d) in exponents.iter().zip(generator_divisors) {
        acc = acc.add(&d.scale(e))?;
    }
    Ok(acc)
}

/// The scalar product `⟨x, y⟩ = Σ_i x_i y_i` on `D(K)`.
pub fn pair(x: &Divisor, y: &Divisor) -> Result<BigInt> {
    if x.len() != y.len() {
        return Err(Error::IndexMismatch(x.len(), y.len()));
    }
    Ok(x.coeffs
        .iter()
        .zip(&y.coeffs)
        .map(|(a, b)| a * b)
        .sum())
}

/// Group action on divisors: `act(g, x)_i = x_{π_g(i)}`.
pub fn act(group: &GroupData, label: &str, x: &Divisor) -> Result<Divisor> {
    let p = group.permutation(label)?;
    if p.len() != x.len() {
        return Err(Error::IndexMismatch(p.len(), x.len()));
    }
    Ok(Divisor::new(p.iter().map(|&i| x.coeffs[i].clone()).collect()))
}

/// `S = S_1 ∪ S_2`, the primes over the two primes of the imaginary
/// quadratic subfield. `part2 = τ(part1)` and both parts are H-stable.
#[derive(Clone, Debug)]
pub struct SplitPartition {
    part1: Vec<usize>,
    part2: Vec<usize>,
    mask1: Vec<bool>,
}

impl SplitPartition {
    pub fn new(n: usize, part1: Vec<usize>, part2: Vec<usize>) -> Result<Self> {
        let mut all: Vec<usize> = part1.iter().chain(&part2).copied().collect();
        all.sort_unstable();
        if all != (0..n).collect::<Vec<_>>() {
            return Err(Error::Validation(
                "partition parts must disjointly cover all embedding indices".into(),
            ));
        }
        let mut mask1 = vec![false; n];
        for &i in &part1 {
            mask1[i] = true;
        }
        let mut part1 = part1;
        let mut part2 = part2;
        part1.sort_unstable();
        part2.sort_unstable();
        Ok(Self { part1, part2, mask1 })
    }

    /// Derive the partition from the H-orbit of a seed index; the τ-image
    /// of the orbit is the second part.
    pub fn derive(group: &GroupData, seed: usize) -> Result<Self> {
        let n = group.degree()?;
        let h = group
            .h_labels()
            .ok_or_else(|| Error::Validation("no H subset declared".into()))?;
        let tau = group
            .tau()
            .ok_or_else(|| Error::Validation("no tau declared".into()))?;
        let mut part1 = BTreeSet::new();
        for label in &h {
            let p = group.permutation(label)?;
            // index j maps under act to carry the coefficient at π(j); the
            // H-orbit of the seed prime is the set of preimages/images of
            // the seed under the H-permutations
            part1.insert(p[seed]);
            part1.insert(invert(p)[seed]);
        }
        // close under H
        loop {
            let mut grew = false;
            for label in &h {
                let p = group.permutation(label)?;
                for &i in part1.clone().iter() {
                    if part1.insert(p[i]) {
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        let pt = group.permutation(tau)?;
        let part2: Vec<usize> = part1.iter().map(|&i| pt[i]).collect();
        let part = Self::new(n, part1.into_iter().collect(), part2)?;
        part.validate(group)?;
        Ok(part)
    }

    pub fn part1(&self) -> &[usize] {
        &self.part1
    }

    pub fn part2(&self) -> &[usize] {
        &self.part2
    }

    pub fn validate(&self, group: &GroupData) -> Result<()> {
        let h = group
            .h_labels()
            .ok_or_else(|| Error::Validation("no H subset declared".into()))?;
        let tau = group
            .tau()
            .ok_or_else(|| Error::Validation("no tau declared".into()))?;
        for label in &h {
            let p = group.permutation(label)?;
            for &i in &self.part1 {
                if !self.mask1[p[i]] {
                    return Err(Error::Validation(format!(
                        "part1 is not stable under H element `{label}`"
                    )));
                }
            }
        }
        let pt = group.permutation(tau)?;
        for &i in &self.part1 {
            if self.mask1[pt[i]] {
                return Err(Error::Validation("tau must swap the two parts".into()));
            }
        }
        Ok(())
    }
}

/// The two partial pairings `⟨x,y⟩_{K,1}` and `⟨x,y⟩_{K,2}`; their sum is
/// the full pairing.
pub fn pair_parts(x: &Divisor, y: &Divisor, p: &SplitPartition) -> Result<(BigInt, BigInt)> {
    if x.len() != y.len() || x.len() != p.mask1.len() {
        return Err(Error::IndexMismatch(x.len(), y.len()));
    }
    let mut s1 = BigInt::zero();
    let mut s2 = BigInt::zero();
    for i in 0..x.len() {
        let t = &x.coeffs[i] * &y.coeffs[i];
        if p.mask1[i] {
            s1 += t;
        } else {
            s2 += t;
        }
    }
    Ok((s1, s2))
}

/// A formal combination `a·𝔭_1 + b·𝔭_2` in `D(k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelativeDivisor {
    pub p1: BigInt,
    pub p2: BigInt,
}

impl RelativeDivisor {
    pub fn is_tau_fixed(&self) -> bool {
        self.p1 == self.p2
    }
}

/// The relative pairing `⟨x,y⟩_{K/k} = ⟨x,y⟩_1·𝔭_1 + ⟨x,y⟩_2·𝔭_2`.
pub fn relative_pair(x: &Divisor, y: &Divisor, p: &SplitPartition) -> Result<RelativeDivisor> {
    let (p1, p2) = pair_parts(x, y, p)?;
    Ok(RelativeDivisor { p1, p2 })
}

/// G acts on `D(k)` by restriction: H fixes both primes, the τ-coset
/// swaps them.
pub fn act_relative(
    group: &GroupData,
    label: &str,
    x: &RelativeDivisor,
) -> Result<RelativeDivisor> {
    Ok(if group.in_h(label)? {
        x.clone()
    } else {
        RelativeDivisor { p1: x.p2.clone(), p2: x.p1.clone() }
    })
}

/// A synthetic two-level prime tree modelling an extension `L/K` in which
/// ℓ splits completely: each prime of `K` has `[L:K]` primes of `L` above
/// it. Carries the divisor extension map and the norm map.
#[derive(Clone, Debug)]
pub struct ExtensionMap {
    /// `blocks[i]` = indices of the L-primes above the i-th K-prime.
    blocks: Vec<Vec<usize>>,
    upper_size: usize,
}

impl ExtensionMap {
    /// A regular tree: `k_primes` primes below, `rel_degree` primes above
    /// each, numbered consecutively.
    pub fn regular(k_primes: usize, rel_degree: usize) -> Self {
        let blocks = (0..k_primes)
            .map(|i| (i * rel_degree..(i + 1) * rel_degree).collect())
            .collect();
        Self { blocks, upper_size: k_primes * rel_degree }
    }

    pub fn relative_degree(&self) -> usize {
        self.blocks.first().map_or(0, Vec::len)
    }

    /// `i_{L/K}`: each prime of K extends to the sum of the primes above it.
    pub fn extend(&self, x: &Divisor) -> Result<Divisor> {
        if x.len() != self.blocks.len() {
            return Err(Error::IndexMismatch(x.len(), self.blocks.len()));
        }
        let mut out = vec![BigInt::zero(); self.upper_size];
        for (i, block) in self.blocks.iter().enumerate() {
            for &j in block {
                out[j] = x.coeffs[i].clone();
            }
        }
        Ok(Divisor::new(out))
    }

    /// `N_{L/K}`: each prime of L maps to the prime of K below it.
    pub fn norm(&self, z: &Divisor) -> Result<Divisor> {
        if z.len() != self.upper_size {
            return Err(Error::IndexMismatch(z.len(), self.upper_size));
        }
        let coeffs = self
            .blocks
            .iter()
            .map(|block| block.iter().map(|&j| z.coeffs[j].clone()).sum())
            .collect();
        Ok(Divisor::new(coeffs))
    }
}
