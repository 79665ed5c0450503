//! Integer polynomials in one variable (ascending coefficient order) and
//! the mod-ℓ polynomial arithmetic used for splitting detection.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::padic::{mul_mod_u64, pow_mod_u64};

/// A polynomial with integer coefficients, `coeffs[i]` the coefficient of
/// `x^i`. The zero polynomial is the empty vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial(Vec<BigInt>);

impl Polynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self(coeffs)
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn x() -> Self {
        Self::from_i64(&[0, 1])
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn is_monic(&self) -> bool {
        self.0.last().is_some_and(|c| c.is_one())
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.0.get(i).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        Self::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::new(self.0.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::new(vec![]);
        }
        let mut out = vec![BigInt::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Remainder modulo a monic polynomial.
    pub fn rem_monic(&self, m: &Self) -> Self {
        assert!(m.is_monic());
        let d = m.degree();
        let mut r = self.0.clone();
        while r.len() > d {
            let lead = r.pop().unwrap();
            if lead.is_zero() {
                continue;
            }
            let k = r.len() - d;
            for (i, c) in m.0.iter().take(d).enumerate() {
                r[k + i] -= &lead * c;
            }
        }
        Self::new(r)
    }

    /// Substitute `g` for the variable, reducing modulo the monic `m`.
    pub fn compose_mod(&self, g: &Self, m: &Self) -> Self {
        let mut acc = Self::new(vec![]);
        for c in self.0.iter().rev() {
            acc = acc.mul(g).add(&Self::constant(c.clone())).rem_monic(m);
        }
        acc
    }

    /// Evaluate at a big integer.
    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Evaluate modulo `m ≥ 1`, result in `[0, m)`.
    pub fn eval_mod(&self, x: &BigUint, m: &BigUint) -> BigUint {
        let mm = BigInt::from(m.clone());
        let xx = BigInt::from(x.clone());
        let mut acc = BigInt::zero();
        for c in self.0.iter().rev() {
            acc = (acc * &xx + c).mod_floor(&mm);
        }
        acc.magnitude().clone()
    }

    /// Reduce the coefficients modulo a u64 prime.
    pub fn reduce_mod(&self, ell: u64) -> PolyMod {
        let ell_big = BigInt::from(ell);
        let coeffs = self
            .0
            .iter()
            .map(|c| {
                let r = c.mod_floor(&ell_big);
                r.magnitude().iter_u64_digits().next().unwrap_or(0)
            })
            .collect();
        PolyMod::new(coeffs, ell)
    }

    /// Content of the coefficient vector (gcd, non-negative).
    pub fn content(&self) -> BigInt {
        self.0
            .iter()
            .fold(BigInt::zero(), |acc, c| acc.gcd(c))
            .abs()
    }
}

/// Dense polynomial over `F_ℓ` for a u64 prime ℓ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMod {
    coeffs: Vec<u64>,
    ell: u64,
}

impl PolyMod {
    pub fn new(mut coeffs: Vec<u64>, ell: u64) -> Self {
        for c in &mut coeffs {
            *c %= ell;
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { coeffs, ell }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: u64) -> u64 {
        let mut acc = 0u64;
        for &c in self.coeffs.iter().rev() {
            acc = (mul_mod_u64(acc, x, self.ell) + c) % self.ell;
        }
        acc
    }

    fn monic(&self) -> Self {
        match self.coeffs.last() {
            None => self.clone(),
            Some(&lead) => {
                let inv = pow_mod_u64(lead, self.ell - 2, self.ell);
                Self::new(
                    self.coeffs
                        .iter()
                        .map(|&c| mul_mod_u64(c, inv, self.ell))
                        .collect(),
                    self.ell,
                )
            }
        }
    }

    pub fn rem(&self, m: &Self) -> Self {
        let m = m.monic();
        let d = m.coeffs.len() - 1;
        let mut r = self.coeffs.clone();
        while r.len() > d {
            let lead = r.pop().unwrap();
            if lead == 0 {
                continue;
            }
            let k = r.len() - d;
            for i in 0..d {
                let sub = mul_mod_u64(lead, m.coeffs[i], self.ell);
                r[k + i] = (r[k + i] + self.ell - sub) % self.ell;
            }
        }
        Self::new(r, self.ell)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::new(vec![], self.ell);
        }
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + mul_mod_u64(a, b, self.ell)) % self.ell;
            }
        }
        Self::new(out, self.ell)
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = std::mem::replace(&mut b, r);
        }
        a.monic()
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &Vec<u64>, i: usize| v.get(i).copied().unwrap_or(0);
        Self::new(
            (0..n)
                .map(|i| (get(&self.coeffs, i) + self.ell - get(&other.coeffs, i)) % self.ell)
                .collect(),
            self.ell,
        )
    }

    /// `x^e mod self`.
    pub fn pow_x_mod(&self, e: u64) -> Self {
        let ell = self.ell;
        let mut acc = Self::new(vec![1], ell);
        let mut base = Self::new(vec![0, 1], ell).rem(self);
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(self);
            }
            base = base.mul(&base).rem(self);
            e >>= 1;
        }
        acc
    }
}
