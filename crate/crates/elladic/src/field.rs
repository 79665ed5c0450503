//! Number fields presented by a monic integer polynomial, detection of
//! completely split primes, Hensel-lifted embeddings into `Q_ℓ`, log
//! vectors and the trace form.
//!
//! When ℓ splits completely every completion is `Q_ℓ`, so the `n`
//! embeddings are exactly the `n` roots of the defining polynomial in
//! `Z_ℓ`. Embeddings are ordered by the residue of the root modulo ℓ;
//! that order does not depend on the precision, so divisor indices and
//! declared Galois permutations stay stable when the precision is refined.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::padic::{modinv, PadicNumber, PrecisionContext};
use crate::poly::Polynomial;
use crate::{par, Error, Result};

/// An element of the number field `Q[x]/(f)`: an integer-coefficient
/// numerator of degree below `deg f` over a positive integer denominator,
/// with no common content.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldElement {
    numerator: Polynomial,
    denominator: BigUint,
}

impl FieldElement {
    pub fn new(numerator: Polynomial, denominator: BigUint) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::Validation("zero denominator".into()));
        }
        let mut el = Self { numerator, denominator };
        el.reduce();
        Ok(el)
    }

    pub fn from_integer_poly(coeffs: &[i64]) -> Self {
        Self { numerator: Polynomial::from_i64(coeffs), denominator: BigUint::one() }
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.numerator
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denominator
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    fn reduce(&mut self) {
        if self.numerator.is_zero() {
            self.denominator = BigUint::one();
            return;
        }
        let g = self
            .numerator
            .content()
            .gcd(&BigInt::from(self.denominator.clone()));
        if g > BigInt::one() {
            let coeffs = self
                .numerator
                .coeffs()
                .iter()
                .map(|c| c / &g)
                .collect::<Vec<_>>();
            self.numerator = Polynomial::new(coeffs);
            self.denominator = &self.denominator / g.magnitude();
        }
    }

    /// Apply a field automorphism given as a polynomial `u` with
    /// `x ↦ u(x)`, reducing modulo the monic defining polynomial.
    pub fn apply_automorphism(&self, u: &Polynomial, f: &Polynomial) -> Self {
        Self {
            numerator: self.numerator.compose_mod(u, f),
            denominator: self.denominator.clone(),
        }
    }

    /// Product of two elements modulo `f` (denominators multiply).
    pub fn mul_mod(&self, other: &Self, f: &Polynomial) -> Self {
        let mut el = Self {
            numerator: self.numerator.mul(&other.numerator).rem_monic(f),
            denominator: &self.denominator * &other.denominator,
        };
        el.reduce();
        el
    }
}

/// Galois-action data for the embeddings; permutations are validated to
/// form a group, and the optional automorphism polynomials tie them to the
/// Hensel roots.
pub use crate::lattice::GroupData;

/// The special S-unit `α` with divisor supported at a single prime,
/// `(α) = 𝔩^h`, plus the position of each Galois conjugate `σ(α)` in the
/// declared S-unit generator list.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlphaData {
    pub element_index: usize,
    pub h: u32,
    /// group label → index into the s_units list holding σ(α)
    pub orbit: BTreeMap<String, usize>,
}

/// A number field together with its declared generators, Galois data and
/// known multiplicative relations.
#[derive(Clone, Debug)]
pub struct NumberFieldSpec {
    pub name: String,
    pub poly: Polynomial,
    pub r1: u32,
    pub r2: u32,
    pub torsion_order: u32,
    pub units: Vec<FieldElement>,
    pub s_units: Vec<FieldElement>,
    pub group: Option<GroupData>,
    /// Exponent rows over [ℓ, s_units..., units...] that multiply to a
    /// root of unity.
    pub relations: Vec<Vec<BigInt>>,
    pub alpha: Option<AlphaData>,
}

impl NumberFieldSpec {
    pub fn degree(&self) -> usize {
        self.poly.degree()
    }

    /// Structural validation, independent of any prime.
    pub fn validate(&self) -> Result<()> {
        if !self.poly.is_monic() || self.poly.degree() == 0 {
            return Err(Error::Validation(format!(
                "{}: defining polynomial must be monic of positive degree",
                self.name
            )));
        }
        let n = self.degree();
        if self.r1 as usize + 2 * self.r2 as usize != n {
            return Err(Error::Validation(format!(
                "{}: r1 + 2·r2 = {} does not equal the degree {}",
                self.name,
                self.r1 as usize + 2 * self.r2 as usize,
                n
            )));
        }
        if self.torsion_order == 0 {
            return Err(Error::Validation(format!("{}: torsion_order must be ≥ 1", self.name)));
        }
        for (what, els) in [("unit", &self.units), ("s_unit", &self.s_units)] {
            for (i, el) in els.iter().enumerate() {
                if el.is_zero() {
                    return Err(Error::Validation(format!(
                        "{}: {what} generator {i} is zero",
                        self.name
                    )));
                }
                if el.numerator.degree() >= n {
                    return Err(Error::Validation(format!(
                        "{}: {what} generator {i} has degree ≥ {n}",
                        self.name
                    )));
                }
            }
        }
        if let Some(g) = &self.group {
            g.validate(n)?;
        }
        let width = 1 + self.s_units.len() + self.units.len();
        for (i, row) in self.relations.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Validation(format!(
                    "{}: relation row {i} has length {} instead of {width}",
                    self.name,
                    row.len()
                )));
            }
        }
        if let Some(a) = &self.alpha {
            if a.element_index >= self.s_units.len() {
                return Err(Error::Validation(format!(
                    "{}: alpha element index {} out of range",
                    self.name, a.element_index
                )));
            }
            let g = self.group.as_ref().ok_or_else(|| {
                Error::Validation(format!("{}: alpha block requires a group block", self.name))
            })?;
            for (label, idx) in &a.orbit {
                if !g.has_label(label) {
                    return Err(Error::UnknownLabel(label.clone()));
                }
                if *idx >= self.s_units.len() {
                    return Err(Error::Validation(format!(
                        "{}: alpha orbit index {idx} out of range",
                        self.name
                    )));
                }
            }
            if a.orbit.len() != g.order() {
                return Err(Error::Validation(format!(
                    "{}: alpha orbit must name all {} group elements",
                    self.name,
                    g.order()
                )));
            }
        }
        Ok(())
    }
}

/// True iff `f` factors into `deg f` distinct linear factors modulo ℓ.
///
/// Decided from `deg gcd(x^ℓ - x, f)` over `F_ℓ`; an ℓ dividing `disc f`
/// is reported as ramified-or-undecidable.
pub fn splits_completely(f: &Polynomial, ell: u64) -> Result<bool> {
    if !f.is_monic() || f.degree() == 0 {
        return Err(Error::Validation("polynomial must be monic of positive degree".into()));
    }
    let fm = f.reduce_mod(ell);
    if fm.degree() != f.degree() {
        // cannot happen for monic f, ℓ ∤ leading coefficient
        return Err(Error::RamifiedOrUndecidable);
    }
    if f.degree() == 1 {
        return Ok(true);
    }
    let dm = f.derivative().reduce_mod(ell);
    if fm.gcd(&dm).degree() >= 1 {
        return Err(Error::RamifiedOrUndecidable);
    }
    let x = crate::poly::PolyMod::new(vec![0, 1], ell);
    let g = fm.gcd(&fm.pow_x_mod(ell).sub(&x));
    Ok(g.degree() == f.degree())
}

/// The `n` embeddings `σ_i : K → Q_ℓ`, realised as the Hensel lifts of the
/// roots of the defining polynomial, ordered by the root's residue mod ℓ.
#[derive(Clone, Debug)]
pub struct EmbeddingSet {
    ctx: PrecisionContext,
    poly: Polynomial,
    /// Root residues modulo `ℓ^N`, one per embedding.
    residues: Vec<BigUint>,
}

impl EmbeddingSet {
    pub fn context(&self) -> PrecisionContext {
        self.ctx
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn defining_poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn root_residue(&self, i: usize) -> &BigUint {
        &self.residues[i]
    }

    pub fn root(&self, i: usize) -> PadicNumber {
        PadicNumber::from_residue(
            self.ctx,
            &BigInt::from(self.residues[i].clone()),
            self.ctx.precision() as i64,
            0,
        )
    }

    pub fn roots(&self) -> Vec<PadicNumber> {
        (0..self.len()).map(|i| self.root(i)).collect()
    }

    /// Evaluate the embedding `σ_i` at a field element.
    ///
    /// The numerator is evaluated by exact Horner modulo `ℓ^N` (polynomial
    /// evaluation at integer points is 1-Lipschitz ℓ-adically, so the
    /// result is honest to the full `N` digits); denominators divide
    /// afterwards, tracking a negative valuation when ℓ divides them.
    pub fn embed(&self, a: &FieldElement, i: usize) -> Result<PadicNumber> {
        if a.is_zero() {
            return Err(Error::ZeroAtPrecision);
        }
        let m = self.ctx.modulus();
        let num_res = a.numerator.eval_mod(&self.residues[i], &m);
        let num = PadicNumber::from_residue(
            self.ctx,
            &BigInt::from(num_res),
            self.ctx.precision() as i64,
            0,
        );
        let den = PadicNumber::from_integer(self.ctx, BigInt::from(a.denominator.clone()));
        num.try_div(&den)
    }

    /// All `n` embedding values of one element.
    pub fn embed_all(&self, a: &FieldElement) -> Result<Vec<PadicNumber>> {
        (0..self.len()).map(|i| self.embed(a, i)).collect()
    }
}

/// Hensel-lift the roots of `f` modulo ℓ to absolute precision `ℓ^N`.
pub fn hensel_embeddings(f: &Polynomial, ctx: PrecisionContext) -> Result<EmbeddingSet> {
    let ell = ctx.ell();
    if !splits_completely(f, ell)? {
        return Err(Error::NotCompletelySplit(ell));
    }
    if ell > (1 << 26) {
        return Err(Error::Unsupported(
            "root extraction scans the residues and is limited to ℓ < 2^26".into(),
        ));
    }
    let fm = f.reduce_mod(ell);
    let simple_roots: Vec<u64> = (0..ell).filter(|&r| fm.eval(r) == 0).collect();
    debug_assert_eq!(simple_roots.len(), f.degree());

    let fp = f.derivative();
    let lifted: Vec<BigUint> = par::map_slice(&simple_roots, |&r0| {
        lift_root(f, &fp, ell, r0, ctx.precision())
    });
    // simple_roots is ascending, which is exactly the order by residue mod ℓ
    Ok(EmbeddingSet { ctx, poly: f.clone(), residues: lifted })
}

/// Newton iteration with doubled precision per step; the root stays
/// congruent to `r0` modulo ℓ throughout.
fn lift_root(f: &Polynomial, fp: &Polynomial, ell: u64, r0: u64, precision: u32) -> BigUint {
    let mut r = BigUint::from(r0);
    let mut k = 1u32;
    while k < precision {
        k = (2 * k).min(precision);
        let m = BigUint::from(ell).pow(k);
        let fv = f.eval_mod(&r, &m);
        let dv = fp.eval_mod(&r, &m);
        let dinv = modinv(&dv, &m).expect("simple root: f'(r) is a unit");
        let delta = fv * dinv % &m;
        r = ((BigInt::from(r) - BigInt::from(delta)).mod_floor(&BigInt::from(m.clone())))
            .magnitude()
            .clone();
    }
    r
}

/// The vector `(log σ_1(a), …, log σ_n(a))` of Eq-style log coordinates.
pub fn log_vector(a: &FieldElement, embeddings: &EmbeddingSet) -> Result<Vec<PadicNumber>> {
    if a.is_zero() {
        return Err(Error::ZeroAtPrecision);
    }
    let values = embeddings.embed_all(a)?;
    let logs: Vec<Result<PadicNumber>> = par::map_slice(&values, |v| v.iwasawa_log());
    logs.into_iter().collect()
}

/// `Sp_{K/Q}(a·b)` on log vectors: in the completely split case the trace
/// of a product is the coordinate-wise sum `Σ_i a_i b_i`.
pub fn trace_pair(a: &[PadicNumber], b: &[PadicNumber]) -> Result<PadicNumber> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let ctx = a
        .first()
        .map(|x| x.context())
        .ok_or_else(|| Error::Validation("empty vectors".into()))?;
    let mut acc = PadicNumber::zero(ctx);
    for (x, y) in a.iter().zip(b) {
        acc = acc.try_add(&x.try_mul(y)?)?;
    }
    Ok(acc)
}

/// Check the declared permutations against the Hensel roots: for each group
/// element with an automorphism polynomial `u`, `u(root_i) = root_{π(i)}`.
pub fn validate_group_against_roots(group: &GroupData, embeddings: &EmbeddingSet) -> Result<()> {
    let m = embeddings.ctx.modulus();
    for label in group.labels() {
        let Some(u) = group.automorphism_poly(label) else {
            continue;
        };
        let perm = group.permutation(label)?;
        for i in 0..embeddings.len() {
            let mapped = u.eval_mod(embeddings.root_residue(i), &m);
            let expect = embeddings.root_residue(perm[i]);
            if &mapped != expect {
                return Err(Error::Validation(format!(
                    "automorphism poly of `{label}` sends root {i} to {mapped}, \
                     but the permutation points at root {} = {expect}",
                    perm[i]
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::Valuation;

    fn ctx(ell: u64, n: u32) -> PrecisionContext {
        PrecisionContext::new(ell, n, 2.min(n - 1)).unwrap()
    }

    #[test]
    fn splitting_detection() {
        let f = Polynomial::from_i64(&[1, 0, 1]); // x^2 + 1
        assert!(splits_completely(&f, 5).unwrap());
        assert!(!splits_completely(&f, 7).unwrap());
        // ℓ = 2 ramifies in Q(i)
        assert!(matches!(
            splits_completely(&f, 2),
            Err(Error::RamifiedOrUndecidable)
        ));
        let linear = Polynomial::from_i64(&[-1, 1]);
        assert!(splits_completely(&linear, 3).unwrap());
        assert!(splits_completely(&linear, 97).unwrap());
    }

    #[test]
    fn hensel_roots_frozen_and_refinement() {
        let f = Polynomial::from_i64(&[1, 0, 1]);
        let e3 = hensel_embeddings(&f, ctx(5, 3)).unwrap();
        // oracle: one-digit-at-a-time lift of 2 gives 57, of 3 gives 68
        assert_eq!(e3.root_residue(0), &BigUint::from(57u32));
        assert_eq!(e3.root_residue(1), &BigUint::from(68u32));
        // 57^2 ≡ -1 (mod 125)
        assert_eq!(
            (BigUint::from(57u32) * BigUint::from(57u32) + BigUint::one())
                % BigUint::from(125u32),
            BigUint::zero()
        );

        // refinement: N = 5 roots reduce to the N = 3 roots, component-wise
        let e5 = hensel_embeddings(&f, ctx(5, 5)).unwrap();
        for i in 0..2 {
            assert_eq!(
                e5.root_residue(i) % BigUint::from(125u32),
                e3.root_residue(i).clone()
            );
            assert_eq!(
                f.eval_mod(e5.root_residue(i), &BigUint::from(3125u32)),
                BigUint::zero()
            );
        }
    }

    #[test]
    fn degree_one_embedding_is_the_constant() {
        let f = Polynomial::from_i64(&[-9, 1]); // x - 9
        let e = hensel_embeddings(&f, ctx(5, 4)).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e.root_residue(0), &BigUint::from(9u32));
    }

    #[test]
    fn embed_values_and_homomorphism() {
        let f = Polynomial::from_i64(&[1, 0, 1]);
        let e = hensel_embeddings(&f, ctx(5, 3)).unwrap();
        let one = FieldElement::from_integer_poly(&[1]);
        for i in 0..2 {
            assert_eq!(e.embed(&one, i).unwrap().residue(3), Some(BigUint::one()));
        }
        // 2 + i at the root ≡ 2 has valuation 0; at the root ≡ 3 valuation 1
        let a = FieldElement::from_integer_poly(&[2, 1]);
        assert_eq!(e.embed(&a, 0).unwrap().valuation(), Valuation::Finite(0));
        assert_eq!(e.embed(&a, 1).unwrap().valuation(), Valuation::Finite(1));

        // embed(a·b) = embed(a)·embed(b)
        let b = FieldElement::from_integer_poly(&[1, 2]);
        let ab = a.mul_mod(&b, &f);
        for i in 0..2 {
            let lhs = e.embed(&ab, i).unwrap();
            let rhs = e.embed(&a, i).unwrap().try_mul(&e.embed(&b, i).unwrap()).unwrap();
            assert_eq!(lhs.residue(3), rhs.residue(3));
        }
    }

    #[test]
    fn log_vector_kernel_and_norm_relation() {
        let f = Polynomial::from_i64(&[1, 0, 1]);
        let c = ctx(5, 8);
        let e = hensel_embeddings(&f, c).unwrap();
        // the rational prime ℓ as a field element: zero vector, exactly
        let ell = FieldElement::from_integer_poly(&[5]);
        for l in log_vector(&ell, &e).unwrap() {
            assert!(l.is_exact_zero());
        }
        // a root of unity (i itself, since i^4 = 1): zero vector
        let i_el = FieldElement::from_integer_poly(&[0, 1]);
        for l in log_vector(&i_el, &e).unwrap() {
            assert!(l.is_zero_at_precision());
        }
        // 2 + i: components sum to zero at precision (norm relation)
        let a = FieldElement::from_integer_poly(&[2, 1]);
        let lv = log_vector(&a, &e).unwrap();
        let sum = lv[0].try_add(&lv[1]).unwrap();
        if let Valuation::Finite(v) = sum.valuation() { assert!(v >= 6) }
    }

    #[test]
    fn trace_pair_basics() {
        let c = ctx(7, 5);
        let zero = vec![PadicNumber::zero(c), PadicNumber::zero(c)];
        let v = vec![
            PadicNumber::from_integer(c, 3),
            PadicNumber::from_integer(c, 4),
        ];
        assert!(trace_pair(&v, &zero).unwrap().is_exact_zero());
        let e0 = vec![PadicNumber::one(c), PadicNumber::zero(c)];
        let e1 = vec![PadicNumber::zero(c), PadicNumber::one(c)];
        assert_eq!(
            trace_pair(&e0, &e0).unwrap().residue(5),
            Some(BigUint::one())
        );
        assert!(trace_pair(&e0, &e1).unwrap().is_zero_at_precision());
        assert!(trace_pair(&e0, &v[..1]).is_err());
    }

    #[test]
    fn trace_pair_fundamental_unit_oracle() {
        // ε = 1+√2 in Q(√2), ℓ = 7: Sp(log ε · log ε) ≠ 0 and matches the
        // component-wise series evaluation.
        let f = Polynomial::from_i64(&[-2, 0, 1]);
        let c = ctx(7, 8);
        let e = hensel_embeddings(&f, c).unwrap();
        let eps = FieldElement::from_integer_poly(&[1, 1]);
        let lv = log_vector(&eps, &e).unwrap();
        let sp = trace_pair(&lv, &lv).unwrap();
        // brute-force: same sum assembled by hand
        let by_hand = lv[0]
            .try_mul(&lv[0])
            .unwrap()
            .try_add(&lv[1].try_mul(&lv[1]).unwrap())
            .unwrap();
        assert_eq!(sp.residue(8), by_hand.residue(8));
        match sp.valuation() {
            Valuation::Finite(v) => assert!((2..6).contains(&v), "v = {v}"),
            other => panic!("expected a finite nonzero trace pairing, got {other:?}"),
        }
    }
}
