//! The three regulator determinants and the Dedekind-determinant
//! cross-check, with a precision-aware verdict scheme.
//!
//! A verdict of `nonzero` is a certificate: the determinant's valuation
//! sits strictly below what the run can still certify after elimination
//! losses. `zero_at_precision` is *not* a claim that the regulator
//! vanishes, only that this run cannot separate it from zero.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::field::{log_vector, trace_pair, EmbeddingSet, FieldElement};
use crate::lattice::{pair, GroupData};
use crate::linalg::{integer_det, padic_det, IntMatrix, PadicMatrix};
use crate::norms::Us2Basis;
use crate::padic::{PadicNumber, PrecisionContext, Valuation};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegulatorKind {
    Classical,
    Relative,
    New,
}

impl fmt::Display for RegulatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegulatorKind::Classical => write!(f, "classical"),
            RegulatorKind::Relative => write!(f, "relative"),
            RegulatorKind::New => write!(f, "new"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Nonzero,
    ZeroAtPrecision,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Nonzero => write!(f, "nonzero"),
            Verdict::ZeroAtPrecision => write!(f, "zero_at_precision"),
        }
    }
}

/// The determinant value, exact when the Gram matrix was exact.
#[derive(Clone, Debug)]
pub enum DetValue {
    Exact(BigInt),
    Padic(PadicNumber),
    /// Withheld: the input basis failed a precondition (see diagnostic).
    Missing,
}

/// The regulator is only defined up to unit squares, so reports publish
/// the valuation plus the square class of the unit part read modulo
/// `ℓ^min(N,3)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UnitClass {
    OddPrime { square: bool },
    /// ℓ = 2: residue of the unit modulo 8.
    Mod8 { residue: u8 },
}

impl fmt::Display for UnitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitClass::OddPrime { square: true } => write!(f, "square"),
            UnitClass::OddPrime { square: false } => write!(f, "nonsquare"),
            UnitClass::Mod8 { residue } => write!(f, "{residue} mod 8"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RegulatorReport {
    pub kind: RegulatorKind,
    pub det: DetValue,
    pub valuation: Option<i64>,
    pub verdict: Verdict,
    pub basis_used: String,
    pub precision_loss: u32,
    pub unit_class: Option<UnitClass>,
    pub diagnostic: Option<String>,
}

fn legendre(a: &BigUint, ell: u64) -> bool {
    // a^((ℓ-1)/2) mod ℓ == 1
    let m = BigUint::from(ell);
    let e = BigUint::from((ell - 1) / 2);
    (a % &m).modpow(&e, &m).is_one()
}

fn unit_class_of(unit: &BigUint, ctx: PrecisionContext) -> UnitClass {
    if ctx.ell() == 2 {
        let r = (unit % BigUint::from(8u32)).to_u8().unwrap_or(1);
        UnitClass::Mod8 { residue: r }
    } else {
        UnitClass::OddPrime { square: legendre(unit, ctx.ell()) }
    }
}

fn report_from_padic(
    kind: RegulatorKind,
    det: PadicNumber,
    loss: u32,
    basis_used: String,
    ctx: PrecisionContext,
) -> RegulatorReport {
    let threshold = (ctx.precision() - ctx.slack()) as i64 - loss as i64;
    let (valuation, verdict, unit_class) = match det.valuation() {
        Valuation::Finite(v) => {
            let verdict = if v < threshold { Verdict::Nonzero } else { Verdict::ZeroAtPrecision };
            let class = det.unit_residue().map(|u| unit_class_of(&u, ctx));
            (Some(v), verdict, class)
        }
        _ => (None, Verdict::ZeroAtPrecision, None),
    };
    RegulatorReport {
        kind,
        det: DetValue::Padic(det),
        valuation,
        verdict,
        basis_used,
        precision_loss: loss,
        unit_class,
        diagnostic: None,
    }
}

fn report_from_exact(
    kind: RegulatorKind,
    det: BigInt,
    basis_used: String,
    ctx: PrecisionContext,
) -> RegulatorReport {
    let threshold = (ctx.precision() - ctx.slack()) as i64;
    if det.is_zero() {
        return RegulatorReport {
            kind,
            det: DetValue::Exact(det),
            valuation: None,
            verdict: Verdict::ZeroAtPrecision,
            basis_used,
            precision_loss: 0,
            unit_class: None,
            diagnostic: Some("determinant is exactly zero on this basis".into()),
        };
    }
    let ell = BigInt::from(ctx.ell());
    let mut v = 0i64;
    let mut u = det.clone();
    while (&u % &ell).is_zero() {
        u /= &ell;
        v += 1;
    }
    let unit = u
        .mod_floor_ref(&BigInt::from(ctx.pow(ctx.precision().min(3))))
        .magnitude()
        .clone();
    RegulatorReport {
        kind,
        det: DetValue::Exact(det),
        valuation: Some(v),
        verdict: if v < threshold { Verdict::Nonzero } else { Verdict::ZeroAtPrecision },
        basis_used,
        precision_loss: 0,
        unit_class: Some(unit_class_of(&unit, ctx)),
        diagnostic: None,
    }
}

trait ModFloorRef {
    fn mod_floor_ref(&self, m: &BigInt) -> BigInt;
}

impl ModFloorRef for BigInt {
    fn mod_floor_ref(&self, m: &BigInt) -> BigInt {
        num_integer::Integer::mod_floor(self, m)
    }
}

/// The Gram matrix of trace pairings of log vectors.
fn gram_of_logs(logs: &[Vec<PadicNumber>], ctx: PrecisionContext) -> Result<PadicMatrix> {
    let m = logs.len();
    let mut gram = vec![vec![PadicNumber::zero(ctx); m]; m];
    for i in 0..m {
        for j in i..m {
            let v = trace_pair(&logs[i], &logs[j])?;
            gram[i][j] = v.clone();
            gram[j][i] = v;
        }
    }
    Ok(gram)
}

/// `R_ℓ(K)`: determinant of the `(r+1) × (r+1)` Gram matrix of
/// `Sp(log ε_i · log ε_j)` with `ε_0 = 1 + ℓ` (5 when ℓ = 2) prepended.
pub fn classical_regulator(
    units: &[FieldElement],
    embeddings: &EmbeddingSet,
    ctx: PrecisionContext,
) -> Result<RegulatorReport> {
    let eps0: i64 = if ctx.ell() == 2 { 5 } else { 1 + ctx.ell() as i64 };
    let log_eps0 = PadicNumber::from_integer(ctx, eps0).iwasawa_log()?;
    let n = embeddings.len();
    let mut logs = Vec::with_capacity(units.len() + 1);
    logs.push(vec![log_eps0; n]);
    for u in units {
        logs.push(log_vector(u, embeddings)?);
    }
    let gram = gram_of_logs(&logs, ctx)?;
    let (det, loss) = padic_det(&gram, ctx)?;
    Ok(report_from_padic(
        RegulatorKind::Classical,
        det,
        loss,
        format!("ε0 = {eps0} plus {} declared fundamental units", units.len()),
        ctx,
    ))
}

/// `R_ℓ(K/k)`: the `t × t` Gram determinant over relative units. Each
/// input must satisfy `N_{K/k}(u) ∈ μ(k)` at precision, checked through
/// the declared H-action on the embeddings.
pub fn relative_regulator(
    units: &[FieldElement],
    group: &GroupData,
    embeddings: &EmbeddingSet,
    ctx: PrecisionContext,
) -> Result<RegulatorReport> {
    let h_labels = group
        .h_labels()
        .ok_or_else(|| Error::Validation("relative regulator needs a declared H".into()))?;
    let mut logs = Vec::with_capacity(units.len());
    for (k, u) in units.iter().enumerate() {
        let lv = log_vector(u, embeddings)?;
        if !is_relative_unit(&lv, group, &h_labels, ctx)? {
            return Err(Error::Validation(format!(
                "unit {k} fails the relative-unit check: N_K/k does not land in μ(k) at precision"
            )));
        }
        logs.push(lv);
    }
    if logs.is_empty() {
        // empty determinant is 1 by convention
        return Ok(report_from_padic(
            RegulatorKind::Relative,
            PadicNumber::one(ctx),
            0,
            "empty relative-unit system".into(),
            ctx,
        ));
    }
    let gram = gram_of_logs(&logs, ctx)?;
    let (det, loss) = padic_det(&gram, ctx)?;
    Ok(report_from_padic(
        RegulatorKind::Relative,
        det,
        loss,
        format!("{} relative units (H-norm checked at precision)", logs.len()),
        ctx,
    ))
}

/// `Σ_h logvec(u)[π_h(i)]` must vanish at precision for every embedding.
pub fn is_relative_unit(
    log_vec: &[PadicNumber],
    group: &GroupData,
    h_labels: &[String],
    ctx: PrecisionContext,
) -> Result<bool> {
    let threshold = (ctx.precision() - ctx.slack()) as i64;
    for i in 0..log_vec.len() {
        let mut acc = PadicNumber::zero(ctx);
        for h in h_labels {
            let p = group.permutation(h)?;
            acc = acc.try_add(&log_vec[p[i]])?;
        }
        if let Valuation::Finite(v) = acc.valuation() {
            if v < threshold {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `𝕽_ℓ(K)`: the determinant of the divisor Gram matrix over a
/// `U_{S,2}` basis. Exact integer arithmetic end to end, so the verdict
/// carries no elimination loss.
pub fn new_regulator(
    us2: &Us2Basis,
    expected_rank: usize,
    ctx: PrecisionContext,
) -> Result<RegulatorReport> {
    let basis_used = format!(
        "U_{{S,2}} surrogate basis of rank {} (kernel rank {}, {} relations quotiented)",
        us2.rank, us2.kernel_rank, us2.relation_rank
    );
    if us2.rank != expected_rank {
        return Ok(RegulatorReport {
            kind: RegulatorKind::New,
            det: DetValue::Missing,
            valuation: None,
            verdict: Verdict::ZeroAtPrecision,
            basis_used,
            precision_loss: 0,
            unit_class: None,
            diagnostic: Some(format!(
                "rank mismatch: U_{{S,2}} basis has rank {} but r1+r2 = {expected_rank}; \
                 no determinant computed",
                us2.rank
            )),
        });
    }
    let t = us2.divisors.len();
    let mut gram: IntMatrix = vec![vec![BigInt::zero(); t]; t];
    for i in 0..t {
        for j in i..t {
            let v = pair(&us2.divisors[i], &us2.divisors[j])?;
            gram[i][j] = v.clone();
            gram[j][i] = v;
        }
    }
    let det = integer_det(&gram);
    Ok(report_from_exact(RegulatorKind::New, det, basis_used, ctx))
}

/// Both sides of the Dedekind determinant identity
/// `det(X_{σ_j σ_i^{-1}}) = Π_χ Σ_σ χ̄(σ)·X_σ` for an abelian group with
/// exponent dividing ℓ-1, returning the valuation of their difference.
pub fn dedekind_check(
    xs: &BTreeMap<String, PadicNumber>,
    group: &GroupData,
    ctx: PrecisionContext,
) -> Result<DedekindReport> {
    let labels: Vec<String> = group.labels().cloned().collect();
    let n = labels.len();
    for l in &labels {
        if !xs.contains_key(l) {
            return Err(Error::Validation(format!("missing X value for `{l}`")));
        }
    }
    // left side: the determinant of the group matrix
    let mut matrix = vec![vec![PadicNumber::zero(ctx); n]; n];
    for (i, gi) in labels.iter().enumerate() {
        let gi_inv = group.inverse(gi)?;
        for (j, gj) in labels.iter().enumerate() {
            let idx = group.mult(gj, &gi_inv)?;
            matrix[i][j] = xs[&idx].clone();
        }
    }
    let (det, loss) = padic_det(&matrix, ctx)?;

    // right side: the product over characters
    let characters = abelian_characters(group, ctx)?;
    let mut product = PadicNumber::one(ctx);
    for chi in &characters {
        let mut sum = PadicNumber::zero(ctx);
        for g in &labels {
            // χ̄(g) = χ(g^{-1})
            let conj = &chi[&group.inverse(g)?];
            sum = sum.try_add(&conj.try_mul(&xs[g])?)?;
        }
        product = product.try_mul(&sum)?;
    }

    let residual = det.try_sub(&product)?;
    Ok(DedekindReport {
        det,
        character_product: product,
        residual_valuation: residual.valuation(),
        precision_loss: loss,
    })
}

#[derive(Clone, Debug)]
pub struct DedekindReport {
    pub det: PadicNumber,
    pub character_product: PadicNumber,
    pub residual_valuation: Valuation,
    pub precision_loss: u32,
}

/// All `|G|` characters of an abelian group with values in the
/// Teichmüller roots of unity inside `Z_ℓ`.
pub fn abelian_characters(
    group: &GroupData,
    ctx: PrecisionContext,
) -> Result<Vec<BTreeMap<String, PadicNumber>>> {
    let labels: Vec<String> = group.labels().cloned().collect();
    let n = labels.len();
    let identity = group.identity_label()?.clone();
    // abelian check
    for a in &labels {
        for b in &labels {
            if group.mult(a, b)? != group.mult(b, a)? {
                return Err(Error::Validation(format!(
                    "character construction needs an abelian group; {a}·{b} ≠ {b}·{a}"
                )));
            }
        }
    }
    let order_of = |g: &String| -> Result<u64> {
        let mut x = g.clone();
        let mut k = 1u64;
        while x != identity {
            x = group.mult(&x, g)?;
            k += 1;
        }
        Ok(k)
    };
    let orders: BTreeMap<String, u64> = labels
        .iter()
        .map(|l| Ok((l.clone(), order_of(l)?)))
        .collect::<Result<_>>()?;
    let exponent = orders.values().fold(1u64, |acc, &d| num_integer::lcm(acc, d));
    let ell = ctx.ell();
    if exponent == 0 || !(ell - 1).is_multiple_of(exponent) {
        return Err(Error::UnsupportedCharacters(exponent, ell - 1));
    }

    // ζ_exponent inside Z_ℓ via the Teichmüller lift of a generator of F_ℓ^×
    let zeta = primitive_root_of_unity(exponent, ctx)?;
    let mut zeta_pow = Vec::with_capacity(exponent as usize);
    let mut acc = PadicNumber::one(ctx);
    for _ in 0..exponent {
        zeta_pow.push(acc.clone());
        acc = acc.try_mul(&zeta)?;
    }

    // greedy generating sequence
    let mut generated: Vec<String> = vec![identity.clone()];
    let mut generators: Vec<String> = Vec::new();
    while generated.len() < n {
        let g = labels
            .iter()
            .find(|l| !generated.contains(l))
            .expect("group not exhausted")
            .clone();
        generators.push(g.clone());
        let mut grew = true;
        while grew {
            grew = false;
            for a in generated.clone() {
                let x = group.mult(&a, &g)?;
                if !generated.contains(&x) {
                    generated.push(x);
                    grew = true;
                }
            }
            // also close under previously generated elements
            for a in generated.clone() {
                for b in generated.clone() {
                    let x = group.mult(&a, &b)?;
                    if !generated.contains(&x) {
                        generated.push(x);
                        grew = true;
                    }
                }
            }
        }
    }

    // enumerate exponent assignments on the generators, keep consistent homs
    let mut out: Vec<BTreeMap<String, usize>> = Vec::new();
    let gen_orders: Vec<u64> = generators
        .iter()
        .map(|g| orders[g])
        .collect();
    let mut assignment = vec![0u64; generators.len()];
    loop {
        if let Some(chi) = try_extend_character(
            group,
            &labels,
            &identity,
            &generators,
            &assignment,
            exponent,
        )? {
            if !out.contains(&chi) {
                out.push(chi);
            }
        }
        // odometer over Π d_i assignments
        let mut pos = 0;
        loop {
            if pos == generators.len() {
                let chars = out
                    .into_iter()
                    .map(|chi| {
                        chi.into_iter()
                            .map(|(l, e)| (l, zeta_pow[e % exponent as usize].clone()))
                            .collect()
                    })
                    .collect::<Vec<_>>();
                if chars.len() != n {
                    return Err(Error::Validation(format!(
                        "character search found {} homomorphisms, expected {n}",
                        chars.len()
                    )));
                }
                return Ok(chars);
            }
            assignment[pos] += exponent / gen_orders[pos];
            if assignment[pos] >= exponent {
                assignment[pos] = 0;
                pos += 1;
            } else {
                break;
            }
        }
    }
}

/// Extend `χ(g_i) = ζ^{a_i}` to the whole group; `None` when inconsistent.
fn try_extend_character(
    group: &GroupData,
    labels: &[String],
    identity: &String,
    generators: &[String],
    assignment: &[u64],
    exponent: u64,
) -> Result<Option<BTreeMap<String, usize>>> {
    let mut chi: BTreeMap<String, usize> = BTreeMap::new();
    chi.insert(identity.clone(), 0);
    let mut grew = true;
    while grew {
        grew = false;
        for (g, &a) in generators.iter().zip(assignment) {
            for (x, &e) in chi.clone().iter() {
                let xg = group.mult(x, g)?;
                let val = ((e as u64 + a) % exponent) as usize;
                match chi.get(&xg) {
                    None => {
                        chi.insert(xg, val);
                        grew = true;
                    }
                    Some(&old) if old != val => return Ok(None),
                    _ => {}
                }
            }
        }
    }
    if chi.len() != labels.len() {
        return Ok(None);
    }
    // full homomorphism check
    for a in labels {
        for b in labels {
            let ab = group.mult(a, b)?;
            if (chi[a] as u64 + chi[b] as u64) % exponent != chi[&ab] as u64 {
                return Ok(None);
            }
        }
    }
    Ok(Some(chi))
}

/// A primitive `m`-th root of unity in `Z_ℓ` (requires `m | ℓ-1`).
pub fn primitive_root_of_unity(m: u64, ctx: PrecisionContext) -> Result<PadicNumber> {
    let ell = ctx.ell();
    if m == 1 {
        return Ok(PadicNumber::one(ctx));
    }
    if !(ell - 1).is_multiple_of(m) {
        return Err(Error::UnsupportedCharacters(m, ell - 1));
    }
    // smallest generator of F_ℓ^×
    let g0 = (2..ell)
        .find(|&g| {
            let mut seen_order = 1u64;
            let mut x = g;
            while x != 1 {
                x = crate::padic::mul_mod_u64(x, g, ell);
                seen_order += 1;
            }
            seen_order == ell - 1
        })
        .ok_or_else(|| Error::Validation("no primitive root found".into()))?;
    let base = crate::padic::pow_mod_u64(g0, (ell - 1) / m, ell);
    PadicNumber::from_integer(ctx, base as i64).teichmuller()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::hensel_embeddings;
    use crate::poly::Polynomial;
    use num_bigint::BigInt;
    use std::collections::BTreeSet;

    fn ctx(ell: u64, n: u32) -> PrecisionContext {
        PrecisionContext::new(ell, n, 2).unwrap()
    }

    fn cyclic_group(n: usize) -> GroupData {
        // Z/n acting on itself by translation
        let mut perms = std::collections::BTreeMap::new();
        for b in 0..n {
            perms.insert(
                format!("g{b}"),
                (0..n).map(|a| (a + b) % n).collect::<Vec<_>>(),
            );
        }
        GroupData::new(perms, None, None, false, std::collections::BTreeMap::new())
    }

    #[test]
    fn classical_regulator_over_q() {
        // K = Q: 1×1 matrix (log ε0)^2, valuation 2
        let f = Polynomial::from_i64(&[-1, 1]);
        let c = ctx(5, 10);
        let e = hensel_embeddings(&f, c).unwrap();
        let report = classical_regulator(&[], &e, c).unwrap();
        assert_eq!(report.valuation, Some(2));
        assert_eq!(report.verdict, Verdict::Nonzero);
        // oracle: Sp(log 6 · log 6) = (log 6)^2, and log 6 ≡ 555 mod 5^4
        if let DetValue::Padic(d) = &report.det {
            let l6 = PadicNumber::from_integer(c, 6).iwasawa_log().unwrap();
            let sq = l6.try_mul(&l6).unwrap();
            assert_eq!(d.residue(8), sq.residue(8));
        } else {
            panic!("expected a p-adic determinant");
        }
    }

    #[test]
    fn classical_regulator_duplicate_rows_is_singular() {
        let f = Polynomial::from_i64(&[-2, 0, 1]);
        let c = ctx(7, 10);
        let e = hensel_embeddings(&f, c).unwrap();
        let eps = FieldElement::from_integer_poly(&[1, 1]);
        let report = classical_regulator(&[eps.clone(), eps], &e, c).unwrap();
        assert_eq!(report.verdict, Verdict::ZeroAtPrecision);
    }

    #[test]
    fn classical_regulator_real_quadratic_nonzero() {
        let f = Polynomial::from_i64(&[-2, 0, 1]);
        let c = ctx(7, 12);
        let e = hensel_embeddings(&f, c).unwrap();
        let eps = FieldElement::from_integer_poly(&[1, 1]);
        let report = classical_regulator(&[eps], &e, c).unwrap();
        assert_eq!(report.verdict, Verdict::Nonzero);
        // 2×2 determinant against the hand-assembled Gram
        let lv0 = vec![
            PadicNumber::from_integer(c, 8).iwasawa_log().unwrap(),
            PadicNumber::from_integer(c, 8).iwasawa_log().unwrap(),
        ];
        let lv1 = log_vector(&FieldElement::from_integer_poly(&[1, 1]), &e).unwrap();
        let g00 = trace_pair(&lv0, &lv0).unwrap();
        let g01 = trace_pair(&lv0, &lv1).unwrap();
        let g11 = trace_pair(&lv1, &lv1).unwrap();
        let expect = g00
            .try_mul(&g11)
            .unwrap()
            .try_sub(&g01.try_mul(&g01).unwrap())
            .unwrap();
        if let DetValue::Padic(d) = &report.det {
            let digits = 8;
            assert_eq!(d.residue(digits), expect.residue(digits));
        }
    }

    #[test]
    fn empty_relative_regulator_is_one() {
        let f = Polynomial::from_i64(&[1, 0, 1]);
        let c = ctx(5, 10);
        let e = hensel_embeddings(&f, c).unwrap();
        let mut perms = std::collections::BTreeMap::new();
        perms.insert("e".to_string(), vec![0, 1]);
        perms.insert("s".to_string(), vec![1, 0]);
        let group = GroupData::new(
            perms,
            Some(BTreeSet::from(["e".to_string()])),
            Some("s".to_string()),
            true,
            std::collections::BTreeMap::new(),
        );
        group.validate(2).unwrap();
        let report = relative_regulator(&[], &group, &e, c).unwrap();
        assert_eq!(report.verdict, Verdict::Nonzero);
        assert_eq!(report.valuation, Some(0));
    }

    #[test]
    fn duplicate_relative_units_are_singular() {
        // Q(ζ8) over Q(i): include u and h(u) = g5(u); with the H-norm
        // relation they span a rank-1 space, so the 2×2 Gram collapses
        let (ell, file) = crate::cli::bundled_field("zeta8").unwrap();
        let spec = file.to_spec().unwrap();
        let c = PrecisionContext::new(ell, 12, 2).unwrap();
        let field = crate::norms::BoundField::bind(spec, c).unwrap();
        let group = field.spec.group.clone().unwrap();
        let u = field.spec.units[0].clone();
        let hu = u.apply_automorphism(
            group.automorphism_poly("g5").unwrap(),
            &field.spec.poly,
        );
        let report = relative_regulator(&[u, hu], &group, &field.embeddings, c).unwrap();
        assert_eq!(report.verdict, Verdict::ZeroAtPrecision);
    }

    #[test]
    fn dedekind_identity_z2_symbolic() {
        // G = Z/2: det [[X1, X2],[X2, X1]] = (X1+X2)(X1-X2)
        let c = ctx(7, 12);
        let g = cyclic_group(2);
        let mut xs = BTreeMap::new();
        xs.insert("g0".to_string(), PadicNumber::from_integer(c, 31));
        xs.insert("g1".to_string(), PadicNumber::from_integer(c, 17));
        let report = dedekind_check(&xs, &g, c).unwrap();
        // exact for integers: residual indistinguishable from zero
        if let Valuation::Finite(v) = report.residual_valuation { assert!(v >= 10) }
        // and the determinant is the symbolic value 31^2 - 17^2 = 672
        assert_eq!(
            report.det.residue(6),
            PadicNumber::from_integer(c, 672).residue(6)
        );
    }

    #[test]
    fn dedekind_identity_z3_circulant() {
        // ℓ = 7 ≡ 1 mod 3: random circulant factorization holds mod 7^N
        let c = ctx(7, 12);
        let g = cyclic_group(3);
        for seed in 1..6i64 {
            let mut xs = BTreeMap::new();
            xs.insert("g0".to_string(), PadicNumber::from_integer(c, 3 * seed + 1));
            xs.insert("g1".to_string(), PadicNumber::from_integer(c, seed * seed + 2));
            xs.insert("g2".to_string(), PadicNumber::from_integer(c, 7 - seed));
            let report = dedekind_check(&xs, &g, c).unwrap();
            if let Valuation::Finite(v) = report.residual_valuation { assert!(v >= 10, "seed {seed}: v = {v}") }
        }
    }

    #[test]
    fn dedekind_rejects_unsupported_exponent() {
        // Z/3 needs 3 | ℓ-1; ℓ = 5 fails
        let c = ctx(5, 10);
        let g = cyclic_group(3);
        let mut xs = BTreeMap::new();
        for l in ["g0", "g1", "g2"] {
            xs.insert(l.to_string(), PadicNumber::one(c));
        }
        assert!(matches!(
            dedekind_check(&xs, &g, c),
            Err(Error::UnsupportedCharacters(3, 4))
        ));
    }

    #[test]
    fn characters_are_orthogonal() {
        let c = ctx(7, 10);
        for n in [2usize, 3, 6] {
            let g = cyclic_group(n);
            let chars = abelian_characters(&g, c).unwrap();
            assert_eq!(chars.len(), n);
            // column orthogonality: Σ_g χ(g)·χ'(g^{-1}) = n·δ
            for (i, chi) in chars.iter().enumerate() {
                for (j, chj) in chars.iter().enumerate() {
                    let mut acc = PadicNumber::zero(c);
                    for l in g.labels() {
                        let inv = g.inverse(l).unwrap();
                        acc = acc.try_add(&chi[l].try_mul(&chj[&inv]).unwrap()).unwrap();
                    }
                    if i == j {
                        assert_eq!(
                            acc.residue(8),
                            PadicNumber::from_integer(c, n as i64).residue(8)
                        );
                    } else {
                        assert!(acc.is_zero_at_precision() || acc.residue(8) == Some(BigUint::zero()));
                    }
                }
            }
        }
    }

    #[test]
    fn new_regulator_qi_frozen_instance() {
        use crate::norms::BoundField;
        let spec = crate::field::NumberFieldSpec {
            name: "qi".into(),
            poly: Polynomial::from_i64(&[1, 0, 1]),
            r1: 0,
            r2: 1,
            torsion_order: 4,
            units: vec![],
            s_units: vec![
                FieldElement::from_integer_poly(&[2, 1]),
                FieldElement::from_integer_poly(&[2, -1]),
            ],
            group: None,
            relations: vec![],
            alpha: None,
        };
        let c = ctx(5, 12);
        let field = BoundField::bind(spec, c).unwrap();
        let us2 = field.us2().unwrap();
        let report = new_regulator(&us2, 1, c).unwrap();
        assert_eq!(report.verdict, Verdict::Nonzero);
        assert_eq!(report.valuation, Some(0));
        // Gram entry ⟨di(ℓ), di(ℓ)⟩ = n = 2 exactly
        match &report.det {
            DetValue::Exact(d) => assert_eq!(d.magnitude(), BigInt::from(2).magnitude()),
            _ => panic!("expected exact determinant"),
        }
        // rank mismatch path: no determinant
        let bad = new_regulator(&us2, 5, c).unwrap();
        assert!(matches!(bad.det, DetValue::Missing));
        assert!(bad.diagnostic.is_some());
    }

    #[test]
    fn new_regulator_unimodular_invariance() {
        use crate::lattice::divisor_of_word;
        use crate::norms::{BoundField, SUnitWord, Us2Basis};
        use rand::{Rng, SeedableRng};
        let spec = crate::field::NumberFieldSpec {
            name: "qsqrt2".into(),
            poly: Polynomial::from_i64(&[-2, 0, 1]),
            r1: 2,
            r2: 0,
            torsion_order: 2,
            units: vec![FieldElement::from_integer_poly(&[1, 1])],
            s_units: vec![
                FieldElement::from_integer_poly(&[3, 1]),
                FieldElement::from_integer_poly(&[3, -1]),
            ],
            group: None,
            relations: vec![],
            alpha: None,
        };
        let c = ctx(7, 12);
        let field = BoundField::bind(spec, c).unwrap();
        let us2 = field.us2().unwrap();
        let base = new_regulator(&us2, 2, c).unwrap();
        let base_val = base.valuation.unwrap();
        let divisors = field.generator_divisors().unwrap();

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            // random unimodular transform of the basis words
            let t = us2.words.len();
            let mut words: Vec<Vec<BigInt>> =
                us2.words.iter().map(|w| w.exponents.clone()).collect();
            for _ in 0..6 {
                let i = rng.gen_range(0..t);
                let mut j = rng.gen_range(0..t);
                while j == i {
                    j = rng.gen_range(0..t);
                }
                let coef = BigInt::from(rng.gen_range(-3i64..=3));
                let src = words[j].clone();
                for (a, b) in words[i].iter_mut().zip(src) {
                    *a += &coef * b;
                }
                if rng.gen_bool(0.3) {
                    words.swap(i, j);
                }
            }
            let transformed = Us2Basis {
                words: words.iter().map(|w| SUnitWord::new(w.clone())).collect(),
                relations: us2.relations.clone(),
                divisors: words
                    .iter()
                    .map(|w| divisor_of_word(w, &divisors).unwrap())
                    .collect(),
                kernel_rank: us2.kernel_rank,
                relation_rank: us2.relation_rank,
                rank: us2.rank,
                modulus_exponent: us2.modulus_exponent,
            };
            let report = new_regulator(&transformed, 2, c).unwrap();
            assert_eq!(report.valuation, Some(base_val));
            assert_eq!(report.verdict, Verdict::Nonzero);
        }
    }
}
