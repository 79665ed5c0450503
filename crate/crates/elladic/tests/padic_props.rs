//! Property tests for the arithmetic kernel: the fixed-precision values
//! must agree with exact rational arithmetic on every digit they claim.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

use elladic::padic::{modinv, PadicNumber, PrecisionContext, Valuation};

/// Exact reduction of a rational with ℓ-free denominator modulo ℓ^k.
fn rational_mod(x: &BigRational, ell: u64, k: u32) -> Option<BigUint> {
    let m = BigInt::from(ell).pow(k);
    let num = x.numer().mod_floor(&m).magnitude().clone();
    let den = x.denom().mod_floor(&m).magnitude().clone();
    let inv = modinv(&den, m.magnitude())?;
    Some(num * inv % m.magnitude())
}

fn padic_of_rational(ctx: PrecisionContext, x: &BigRational) -> PadicNumber {
    PadicNumber::from_ratio(ctx, x.numer().clone(), x.denom().clone()).unwrap()
}

/// Check the claimed digits of `value` against the exact rational `x`.
fn agrees_with_exact(value: &PadicNumber, x: &BigRational, ell: u64) -> bool {
    if x.is_zero() {
        return value.is_zero_at_precision();
    }
    // strip the ℓ-valuation so both sides are ℓ-adic integers
    let v = match value.valuation() {
        Valuation::Finite(v) => v,
        // a bottom must at least be consistent with the exact valuation
        Valuation::Bottom(abs) => {
            let exact_val = rat_val(x, ell);
            return exact_val >= abs;
        }
        Valuation::ExactZero => return x.is_zero(),
    };
    if v != rat_val(x, ell) {
        return false;
    }
    let shifted = if v >= 0 {
        x / BigRational::from(BigInt::from(ell).pow(v as u32))
    } else {
        x * BigRational::from(BigInt::from(ell).pow((-v) as u32))
    };
    let rel = value.rel_precision().unwrap();
    let expect = rational_mod(&shifted, ell, rel).expect("unit denominator");
    value.unit_residue().map(|u| u % BigUint::from(ell).pow(rel)) == Some(expect)
}

fn rat_val(x: &BigRational, ell: u64) -> i64 {
    let count = |mut n: BigInt| {
        let ell = BigInt::from(ell);
        let mut v = 0i64;
        while !n.is_zero() && (&n % &ell).is_zero() {
            n /= &ell;
            v += 1;
        }
        v
    };
    count(x.numer().clone()) - count(x.denom().clone())
}

fn small_rational() -> impl Strategy<Value = BigRational> {
    (-2000i64..2000, 1i64..300).prop_map(|(n, d)| {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn add_mul_match_exact_rationals(a in small_rational(), b in small_rational(), ell_ix in 0usize..3) {
        let ell = [5u64, 7, 13][ell_ix];
        if a.denom().mod_floor(&BigInt::from(ell)).is_zero()
            || b.denom().mod_floor(&BigInt::from(ell)).is_zero() {
            return Ok(());
        }
        let ctx = PrecisionContext::new(ell, 8, 2).unwrap();
        let pa = padic_of_rational(ctx, &a);
        let pb = padic_of_rational(ctx, &b);
        prop_assert!(agrees_with_exact(&pa.try_add(&pb).unwrap(), &(&a + &b), ell));
        prop_assert!(agrees_with_exact(&pa.try_mul(&pb).unwrap(), &(&a * &b), ell));
        prop_assert!(agrees_with_exact(&pa.try_sub(&pb).unwrap(), &(&a - &b), ell));
        if !b.is_zero() {
            prop_assert!(agrees_with_exact(&pa.try_div(&pb).unwrap(), &(&a / &b), ell));
        }
    }

    #[test]
    fn valuations_are_exact_on_products(a in 1i64..100_000, b in 1i64..100_000) {
        let ctx = PrecisionContext::new(5, 10, 2).unwrap();
        let pa = PadicNumber::from_integer(ctx, a);
        let pb = PadicNumber::from_integer(ctx, b);
        let va = pa.valuation().finite().unwrap();
        let vb = pb.valuation().finite().unwrap();
        let prod = pa.try_mul(&pb).unwrap();
        prop_assert_eq!(prod.valuation().finite().unwrap(), va + vb);
        let inv = pa.inverse().unwrap();
        prop_assert_eq!(inv.valuation().finite().unwrap(), -va);
    }

    #[test]
    fn log_homomorphism_at_precision(a in 1i64..4000, b in 1i64..4000) {
        let ell = 7u64;
        if a % ell as i64 == 0 || b % ell as i64 == 0 {
            return Ok(());
        }
        let ctx = PrecisionContext::new(ell, 9, 2).unwrap();
        let pa = PadicNumber::from_integer(ctx, a);
        let pb = PadicNumber::from_integer(ctx, b);
        let lhs = pa.try_mul(&pb).unwrap().iwasawa_log().unwrap();
        let rhs = pa.iwasawa_log().unwrap().try_add(&pb.iwasawa_log().unwrap()).unwrap();
        let diff = lhs.try_sub(&rhs).unwrap();
        if let Valuation::Finite(v) = diff.valuation() { prop_assert!(v >= 7, "valuation {}", v) }
    }

    #[test]
    fn refinement_reproduces_coarser_ops(a in small_rational(), shift in 0u32..3) {
        let ell = 5u64;
        if a.denom().mod_floor(&BigInt::from(ell)).is_zero() || a.is_zero() {
            return Ok(());
        }
        let fine = PrecisionContext::new(ell, 10, 2).unwrap();
        let coarse = PrecisionContext::new(ell, 10 - shift - 2, 2).unwrap();
        let xf = padic_of_rational(fine, &a);
        let xc = padic_of_rational(coarse, &a);
        let digits = coarse.precision().min(4);
        // inverse and log computed at the fine precision reduce to the
        // coarse results on every digit the coarse context claims
        let inv_f = xf.inverse().unwrap().reduce_to(coarse).unwrap();
        let inv_c = xc.inverse().unwrap();
        if rat_val(&a, ell) == 0 {
            prop_assert_eq!(inv_f.residue(digits), inv_c.residue(digits));
            let lf = xf.iwasawa_log().unwrap().reduce_to(coarse).unwrap();
            let lc = xc.iwasawa_log().unwrap();
            prop_assert_eq!(lf.residue(digits), lc.residue(digits));
        }
    }

    #[test]
    fn teichmuller_is_torsion_and_idempotent(a in 1i64..10_000, ell_ix in 0usize..3) {
        let ell = [5u64, 7, 13][ell_ix];
        if a % ell as i64 == 0 {
            return Ok(());
        }
        let ctx = PrecisionContext::new(ell, 8, 2).unwrap();
        let w = PadicNumber::from_integer(ctx, a).teichmuller().unwrap();
        // ω^(ℓ-1) = 1 on all claimed digits
        let pow = w.pow_i64(ell as i64 - 1).unwrap();
        prop_assert_eq!(pow.residue(8), PadicNumber::one(ctx).residue(8));
        // idempotence and kernel of the logarithm
        let ww = w.teichmuller().unwrap();
        prop_assert_eq!(ww.residue(8), w.residue(8));
        prop_assert!(w.iwasawa_log().unwrap().is_exact_zero());
    }
}
