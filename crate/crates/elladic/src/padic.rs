//! Fixed-precision arithmetic in `Z_ℓ` and `Q_ℓ`.
//!
//! Numbers are kept in the relative-precision model: a nonzero value is
//! `unit · ℓ^val` with the unit known modulo `ℓ^rel` for some `rel ≤ N`,
//! i.e. the value is known modulo `ℓ^(val+rel)`. Valuations of products are
//! therefore exact. A value that cannot be distinguished from 0 at the
//! available precision is *bottom*: we record only the exponent up to which
//! it is known to vanish, and it is never silently coerced to an exact zero.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

use crate::{Error, Result};

/// The prime ℓ, the absolute precision exponent `N` and the guard-digit
/// count used when series are evaluated and verdicts are issued.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionContext {
    ell: u64,
    precision: u32,
    slack: u32,
}

impl PrecisionContext {
    /// A context for the prime `ell` at absolute precision `ℓ^precision`.
    ///
    /// `ell` is checked by a deterministic Miller–Rabin test and `slack`
    /// must be smaller than `precision`.
    pub fn new(ell: u64, precision: u32, slack: u32) -> Result<Self> {
        if !is_prime_u64(ell) {
            return Err(Error::NotPrime(ell));
        }
        if precision == 0 {
            return Err(Error::InvalidContext("precision must be positive".into()));
        }
        if slack >= precision {
            return Err(Error::InvalidContext(format!(
                "slack {slack} must be smaller than precision {precision}"
            )));
        }
        if ell == 2 && precision < 3 {
            return Err(Error::InvalidContext(
                "ℓ = 2 needs precision ≥ 3 to separate the torsion part ±1".into(),
            ));
        }
        Ok(Self { ell, precision, slack })
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn slack(&self) -> u32 {
        self.slack
    }

    /// `ℓ^k`.
    pub fn pow(&self, k: u32) -> BigUint {
        BigUint::from(self.ell).pow(k)
    }

    /// `ℓ^N`, the modulus of the context.
    pub fn modulus(&self) -> BigUint {
        self.pow(self.precision)
    }

    /// Same prime and slack, different absolute precision.
    pub fn with_precision(&self, precision: u32) -> Result<Self> {
        Self::new(self.ell, precision, self.slack.min(precision.saturating_sub(1)))
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self != other {
            return Err(Error::ContextMismatch(
                format!("{self:?}"),
                format!("{other:?}"),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
enum Repr {
    /// Exactly zero (from an exact construction; survives arithmetic with
    /// exact values only).
    Zero,
    /// `unit · ℓ^val`, unit coprime to ℓ and reduced modulo `ℓ^rel`.
    Unit { val: i64, unit: BigUint, rel: u32 },
    /// Indistinguishable from 0: known only to vanish modulo `ℓ^abs`.
    Bottom { abs: i64 },
}

/// What is known about the ℓ-adic valuation of a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valuation {
    Finite(i64),
    /// The value is exactly zero.
    ExactZero,
    /// Zero at precision: the valuation is at least the recorded exponent.
    Bottom(i64),
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            _ => None,
        }
    }
}

/// An element of `Q_ℓ` known to finite precision.
#[derive(Clone, Debug)]
pub struct PadicNumber {
    ctx: PrecisionContext,
    repr: Repr,
}

impl PadicNumber {
    pub fn context(&self) -> PrecisionContext {
        self.ctx
    }

    /// Exact zero.
    pub fn zero(ctx: PrecisionContext) -> Self {
        Self { ctx, repr: Repr::Zero }
    }

    pub fn one(ctx: PrecisionContext) -> Self {
        Self::from_integer(ctx, 1)
    }

    /// Zero-at-precision with the stated absolute precision exponent.
    pub fn bottom(ctx: PrecisionContext, abs: i64) -> Self {
        Self { ctx, repr: Repr::Bottom { abs } }
    }

    /// Construct from an exact integer; the unit is known to the full `N`
    /// relative digits of the context.
    pub fn from_integer<I: Into<BigInt>>(ctx: PrecisionContext, value: I) -> Self {
        let value: BigInt = value.into();
        if value.is_zero() {
            return Self::zero(ctx);
        }
        let (val, mag) = split_valuation(ctx.ell, value.magnitude().clone());
        let rel = ctx.precision;
        let modulus = ctx.pow(rel);
        let mut unit = mag % &modulus;
        if value.is_negative() {
            unit = &modulus - unit;
        }
        Self { ctx, repr: Repr::Unit { val, unit, rel } }
    }

    /// Construct from an exact rational `num/den`, `den ≠ 0`.
    pub fn from_ratio<I: Into<BigInt>, J: Into<BigInt>>(
        ctx: PrecisionContext,
        num: I,
        den: J,
    ) -> Result<Self> {
        let n = Self::from_integer(ctx, num);
        let d = Self::from_integer(ctx, den);
        n.try_div(&d)
    }

    /// Construct from a residue known modulo `ℓ^abs` (absolute precision),
    /// representing `residue · ℓ^shift`.
    pub fn from_residue(
        ctx: PrecisionContext,
        residue: &BigInt,
        abs: i64,
        shift: i64,
    ) -> Self {
        if abs <= 0 {
            return Self::bottom(ctx, abs + shift);
        }
        let modulus = ctx.pow(abs as u32);
        let mut mag = residue.mod_floor(&BigInt::from(modulus.clone()));
        debug_assert!(!mag.is_negative());
        let mag = std::mem::take(&mut mag).magnitude().clone();
        if mag.is_zero() {
            return Self::bottom(ctx, abs + shift);
        }
        let (v, unit_mag) = split_valuation(ctx.ell, mag);
        let rel = ((abs - v) as u32).min(ctx.precision);
        let unit = unit_mag % ctx.pow(rel);
        debug_assert!(!unit.is_zero());
        Self { ctx, repr: Repr::Unit { val: v + shift, unit, rel } }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero)
    }

    pub fn is_zero_at_precision(&self) -> bool {
        matches!(self.repr, Repr::Zero | Repr::Bottom { .. })
    }

    pub fn valuation(&self) -> Valuation {
        match &self.repr {
            Repr::Zero => Valuation::ExactZero,
            Repr::Unit { val, .. } => Valuation::Finite(*val),
            Repr::Bottom { abs } => Valuation::Bottom(*abs),
        }
    }

    /// Exponent up to which the value is known (`val + rel`), or `None`
    /// for an exact zero.
    pub fn abs_precision(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Unit { val, rel, .. } => Some(val + *rel as i64),
            Repr::Bottom { abs } => Some(*abs),
        }
    }

    /// Relative digits known for a finite value.
    pub fn rel_precision(&self) -> Option<u32> {
        match &self.repr {
            Repr::Unit { rel, .. } => Some(*rel),
            _ => None,
        }
    }

    /// The unit residue in `[0, ℓ^N)`, reduced modulo the known digits.
    pub fn unit_residue(&self) -> Option<BigUint> {
        match &self.repr {
            Repr::Unit { unit, .. } => Some(unit.clone()),
            _ => None,
        }
    }

    /// The value modulo `ℓ^digits`, when the value is an ℓ-adic integer
    /// known at least that far. Exact zeros and bottoms of sufficient
    /// precision yield 0.
    pub fn residue(&self, digits: u32) -> Option<BigUint> {
        match &self.repr {
            Repr::Zero => Some(BigUint::zero()),
            Repr::Bottom { abs } => (*abs >= digits as i64).then(BigUint::zero),
            Repr::Unit { val, unit, rel } => {
                if *val < 0 || val + (*rel as i64) < digits as i64 {
                    return None;
                }
                if *val >= digits as i64 {
                    return Some(BigUint::zero());
                }
                let m = self.ctx.pow(digits);
                Some(unit * self.ctx.pow(*val as u32) % m)
            }
        }
    }

    /// Base-ℓ digits (little-endian) of `residue(count)`.
    pub fn digits(&self, count: u32) -> Option<Vec<u64>> {
        let mut r = self.residue(count)?;
        let ell = BigUint::from(self.ctx.ell);
        let mut out = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let (q, d) = r.div_rem(&ell);
            out.push(d.to_u64().unwrap());
            r = q;
        }
        Some(out)
    }

    /// Reinterpret at a coarser context, truncating the known digits.
    pub fn reduce_to(&self, ctx: PrecisionContext) -> Result<Self> {
        if ctx.ell != self.ctx.ell {
            return Err(Error::ContextMismatch(
                format!("{:?}", self.ctx),
                format!("{ctx:?}"),
            ));
        }
        Ok(match &self.repr {
            Repr::Zero => Self::zero(ctx),
            Repr::Bottom { abs } => Self::bottom(ctx, *abs),
            Repr::Unit { val, unit, rel } => {
                let rel = (*rel).min(ctx.precision);
                let unit = unit % ctx.pow(rel);
                Self { ctx, repr: Repr::Unit { val: *val, unit, rel } }
            }
        })
    }

    /// Agreement modulo `ℓ^digits` for ℓ-adic integers.
    pub fn agrees_mod(&self, other: &Self, digits: u32) -> bool {
        match (self.residue(digits), other.residue(digits)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.ctx.check_same(&other.ctx)?;
        let ctx = self.ctx;
        Ok(match (&self.repr, &other.repr) {
            (Repr::Zero, _) => other.clone(),
            (_, Repr::Zero) => self.clone(),
            (Repr::Bottom { abs: p }, Repr::Bottom { abs: q }) => {
                Self::bottom(ctx, (*p).min(*q))
            }
            (Repr::Unit { val, unit, rel }, Repr::Bottom { abs })
            | (Repr::Bottom { abs }, Repr::Unit { val, unit, rel }) => {
                let m = (val + *rel as i64).min(*abs);
                if *val >= m {
                    Self::bottom(ctx, m)
                } else {
                    let rel = (m - val) as u32;
                    Self {
                        ctx,
                        repr: Repr::Unit { val: *val, unit: unit % ctx.pow(rel), rel },
                    }
                }
            }
            (
                Repr::Unit { val: v1, unit: u1, rel: r1 },
                Repr::Unit { val: v2, unit: u2, rel: r2 },
            ) => {
                let m = (v1 + *r1 as i64).min(v2 + *r2 as i64);
                let v0 = (*v1).min(*v2);
                if m <= v0 {
                    return Ok(Self::bottom(ctx, m));
                }
                let digits = (m - v0) as u32;
                let modulus = BigInt::from(ctx.pow(digits));
                let lift = |val: i64, unit: &BigUint| -> BigInt {
                    BigInt::from(unit * ctx.pow((val - v0) as u32))
                };
                let sum = (lift(*v1, u1) + lift(*v2, u2)).mod_floor(&modulus);
                Self::from_residue(ctx, &sum, m - v0, v0)
            }
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let ctx = self.ctx;
        match &self.repr {
            Repr::Zero | Repr::Bottom { .. } => self.clone(),
            Repr::Unit { val, unit, rel } => {
                let unit = ctx.pow(*rel) - unit;
                Self { ctx, repr: Repr::Unit { val: *val, unit, rel: *rel } }
            }
        }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.ctx.check_same(&other.ctx)?;
        let ctx = self.ctx;
        Ok(match (&self.repr, &other.repr) {
            (Repr::Zero, _) | (_, Repr::Zero) => Self::zero(ctx),
            (Repr::Bottom { abs: p }, Repr::Bottom { abs: q }) => {
                Self::bottom(ctx, p.saturating_add(*q))
            }
            (Repr::Bottom { abs }, Repr::Unit { val, .. })
            | (Repr::Unit { val, .. }, Repr::Bottom { abs }) => {
                Self::bottom(ctx, abs.saturating_add(*val))
            }
            (
                Repr::Unit { val: v1, unit: u1, rel: r1 },
                Repr::Unit { val: v2, unit: u2, rel: r2 },
            ) => {
                let rel = (*r1).min(*r2);
                let unit = u1 * u2 % ctx.pow(rel);
                Self { ctx, repr: Repr::Unit { val: v1 + v2, unit, rel } }
            }
        })
    }

    /// Multiplicative inverse; the valuation negates exactly.
    pub fn inverse(&self) -> Result<Self> {
        match &self.repr {
            Repr::Zero | Repr::Bottom { .. } => Err(Error::InverseOfZero),
            Repr::Unit { val, unit, rel } => {
                let m = self.ctx.pow(*rel);
                let inv = modinv(unit, &m).expect("unit is coprime to the modulus");
                Ok(Self {
                    ctx: self.ctx,
                    repr: Repr::Unit { val: -val, unit: inv, rel: *rel },
                })
            }
        }
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.try_mul(&other.inverse()?)
    }

    /// Integer power; `pow(0) = 1`.
    pub fn pow_i64(&self, e: i64) -> Result<Self> {
        if e == 0 {
            return Ok(Self::one(self.ctx));
        }
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut acc = Self::one(self.ctx);
        let mut b = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.try_mul(&b)?;
            }
            b = b.try_mul(&b.clone())?;
            k >>= 1;
        }
        Ok(acc)
    }

    /// Scale by `ℓ^k` (exact on the valuation).
    pub fn shift(&self, k: i64) -> Self {
        let ctx = self.ctx;
        match &self.repr {
            Repr::Zero => self.clone(),
            Repr::Bottom { abs } => Self::bottom(ctx, abs.saturating_add(k)),
            Repr::Unit { val, unit, rel } => Self {
                ctx,
                repr: Repr::Unit { val: val + k, unit: unit.clone(), rel: *rel },
            },
        }
    }

    /// The Teichmüller representative: the unique `(ℓ-1)`-th root of unity
    /// congruent to the unit modulo ℓ, lifted to the full context
    /// precision. For ℓ = 2 the torsion part ±1 (read modulo 4) is
    /// returned.
    pub fn teichmuller(&self) -> Result<Self> {
        let ctx = self.ctx;
        let (unit, rel) = match &self.repr {
            Repr::Unit { val: 0, unit, rel } => (unit, *rel),
            _ => return Err(Error::NotAUnit(self.valuation().finite())),
        };
        if ctx.ell == 2 {
            if rel < 2 {
                return Err(Error::InsufficientPrecision(
                    "need two digits to read the torsion part at ℓ = 2".into(),
                ));
            }
            let four = BigUint::from(4u32);
            return Ok(if unit % four == BigUint::one() {
                Self::one(ctx)
            } else {
                Self::from_integer(ctx, -1)
            });
        }
        let w = teichmuller_lift(ctx.ell, unit % ctx.ell, ctx.precision);
        Ok(Self { ctx, repr: Repr::Unit { val: 0, unit: w, rel: ctx.precision } })
    }

    /// The Iwasawa logarithm: `log(ℓ) = 0`, `log(ζ) = 0` for roots of
    /// unity, and on principal units the alternating series. The output is
    /// correct modulo `ℓ^P` with `P = min(rel, N)`; the series is pushed
    /// `slack` digits further so division by the series index never eats
    /// into the claimed digits.
    pub fn iwasawa_log(&self) -> Result<Self> {
        let ctx = self.ctx;
        let (unit, rel) = match &self.repr {
            Repr::Unit { unit, rel, .. } => (unit.clone(), *rel),
            _ => return Err(Error::ZeroAtPrecision),
        };
        let claim = rel.min(ctx.precision);
        let target = claim + ctx.slack;

        // Split off the torsion part; the principal-unit part is u·ω^{-1}.
        let min_tval: u32 = if ctx.ell == 2 { 2 } else { 1 };
        let series_len = {
            // smallest T with k·v(t) - floor(log_ℓ k) ≥ target for all k ≥ T
            let mut t = 1u32;
            while (t as i64) * (min_tval as i64) - ilog_floor(ctx.ell, t as u64) < target as i64 {
                t += 1;
            }
            t
        };
        let guard = ilog_floor(ctx.ell, series_len as u64) as u32 + 1;
        let work = target + guard;
        let modulus = ctx.pow(work);

        let u = &unit % &modulus;
        let omega = if ctx.ell == 2 {
            if u.clone() % BigUint::from(4u32) == BigUint::one() {
                BigUint::one()
            } else {
                &modulus - BigUint::one()
            }
        } else {
            teichmuller_lift(ctx.ell, &u % ctx.ell, work)
        };
        let omega_inv = modinv(&omega, &modulus).expect("root of unity is a unit");
        let u1 = u * omega_inv % &modulus;
        if &u1 % ctx.pow(rel) == BigUint::one() {
            // The stored digits are exactly those of ℓ^val times a root of
            // unity, so the canonical reading of the input has log 0.
            return Ok(Self::zero(ctx));
        }

        let t = BigInt::from(u1) - BigInt::one();
        let t = t.mod_floor(&BigInt::from(modulus.clone())).magnitude().clone();
        let target_mod = ctx.pow(target);
        let mut sum = BigInt::zero();
        let mut t_pow = BigUint::one();
        for k in 1..=series_len as u64 {
            t_pow = t_pow * &t % &modulus;
            let vk = val_u64(ctx.ell, k);
            let k_unit = k / ctx.ell.pow(vk).max(1);
            // t^k is divisible by ℓ^{v(k)} because v(t^k) ≥ k ≥ v(k).
            let reduced = &t_pow / ctx.pow(vk);
            let inv = modinv(&BigUint::from(k_unit), &target_mod).expect("k' coprime to ℓ");
            let term = BigInt::from(reduced * inv % &target_mod);
            if k % 2 == 1 {
                sum += term;
            } else {
                sum -= term;
            }
        }
        Ok(Self::from_residue(ctx, &sum, target as i64, 0).reduce_claim(claim))
    }

    /// Cap the absolute precision claim at `ℓ^abs`.
    fn reduce_claim(self, abs: u32) -> Self {
        let ctx = self.ctx;
        match self.repr {
            Repr::Zero => self,
            Repr::Bottom { abs: a } => Self::bottom(ctx, a.min(abs as i64)),
            Repr::Unit { val, unit, rel } => {
                if val >= abs as i64 {
                    return Self::bottom(ctx, abs as i64);
                }
                let rel = rel.min((abs as i64 - val) as u32);
                let unit = unit % ctx.pow(rel);
                Self { ctx, repr: Repr::Unit { val, unit, rel } }
            }
        }
    }
}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ell = self.ctx.ell;
        match &self.repr {
            Repr::Zero => write!(f, "0"),
            Repr::Bottom { abs } => write!(f, "O({ell}^{abs})"),
            Repr::Unit { val, unit, rel } => {
                if *val >= 0 {
                    if let Some(r) = self.residue(self.ctx.precision.min((*val as u32) + rel)) {
                        return write!(f, "{r} + O({ell}^{})", val + *rel as i64);
                    }
                }
                write!(f, "{unit}·{ell}^{val} + O({ell}^{})", val + *rel as i64)
            }
        }
    }
}

/// Valuation of a nonzero big integer magnitude and its unit part.
fn split_valuation(ell: u64, mut mag: BigUint) -> (i64, BigUint) {
    debug_assert!(!mag.is_zero());
    let ell = BigUint::from(ell);
    let mut v = 0i64;
    loop {
        let (q, r) = mag.div_rem(&ell);
        if r.is_zero() {
            v += 1;
            mag = q;
        } else {
            return (v, mag);
        }
    }
}

fn val_u64(ell: u64, mut k: u64) -> u32 {
    let mut v = 0;
    while k.is_multiple_of(ell) {
        v += 1;
        k /= ell;
    }
    v
}

/// `floor(log_ell(k))` for `k ≥ 1`.
fn ilog_floor(ell: u64, k: u64) -> i64 {
    let mut p = ell;
    let mut e = 0i64;
    while p <= k {
        e += 1;
        match p.checked_mul(ell) {
            Some(next) => p = next,
            None => break,
        }
    }
    e
}

/// Newton lift of the (ℓ-1)-th root of unity congruent to `a0` mod ℓ.
fn teichmuller_lift(ell: u64, a0: BigUint, precision: u32) -> BigUint {
    debug_assert!(ell > 2);
    let e = BigUint::from(ell - 1);
    let e_minus_2 = BigUint::from(ell - 2);
    let mut w = a0;
    let mut k = 1u32;
    while k < precision {
        k = (2 * k).min(precision);
        let m = BigUint::from(ell).pow(k);
        // w ← w - (w^{ℓ-1} - 1) / ((ℓ-1) w^{ℓ-2})
        let num = (w.modpow(&e, &m) + &m - BigUint::one()) % &m;
        let den = BigUint::from(ell - 1) * w.modpow(&e_minus_2, &m) % &m;
        let den_inv = modinv(&den, &m).expect("derivative is a unit");
        w = ((BigInt::from(w) - BigInt::from(num * den_inv))
            .mod_floor(&BigInt::from(m.clone())))
        .magnitude()
        .clone();
    }
    w
}

/// Modular inverse via extended Euclid; `None` when not coprime.
pub fn modinv(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let (mut r0, mut r1) = (BigInt::from(m.clone()), BigInt::from(a % m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let t2 = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t2);
    }
    if !r0.is_one() {
        return None;
    }
    Some(t0.mod_floor(&BigInt::from(m.clone())).magnitude().clone())
}

/// Deterministic Miller–Rabin for u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u64(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod_u64(acc, b, m);
        }
        b = mul_mod_u64(b, b, m);
        e >>= 1;
    }
    acc
}
