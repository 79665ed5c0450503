//! Exact integer lattice algebra (Hermite/Smith normal forms, kernels
//! modulo a prime power) and precision-aware linear algebra over
//! [`PadicNumber`] matrices.
//!
//! Everything here works on matrices small enough that asymptotics are
//! irrelevant; determinism is what matters, so pivots are always chosen by
//! (magnitude, lowest index) and the transforms are tracked exactly.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use crate::padic::{PadicNumber, PrecisionContext, Valuation};
use crate::{Error, Result};

pub type IntMatrix = Vec<Vec<BigInt>>;

pub fn identity(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

fn rounded_quotient(a: &BigInt, b: &BigInt) -> BigInt {
    // quotient minimizing |a - qb|
    let (q, r) = num_integer::Integer::div_mod_floor(a, b);
    if BigUint::from(2u32) * r.magnitude() > b.magnitude().clone() {
        q + BigInt::one()
    } else {
        q
    }
}

/// Basis of the lattice `{x ∈ Z^k : x·A ≡ 0 (mod q)}` for an integer
/// matrix `A` with `k` rows. The lattice always has full rank `k` (it
/// contains `q·Z^k`).
pub fn kernel_mod(a: &IntMatrix, q: &BigUint) -> IntMatrix {
    let k = a.len();
    let n = a.first().map_or(0, Vec::len);
    let q = BigInt::from(q.clone());
    // rows of [A | I_k] over [q·I_n | 0]; row-reduce the first n columns
    let mut t: IntMatrix = Vec::with_capacity(k + n);
    for (i, row) in a.iter().enumerate() {
        let mut r = row.clone();
        r.extend((0..k).map(|j| if j == i { BigInt::one() } else { BigInt::zero() }));
        t.push(r);
    }
    for j in 0..n {
        let mut r = vec![BigInt::zero(); n + k];
        r[j] = q.clone();
        t.push(r);
    }

    let mut pivot_row = 0usize;
    for col in 0..n {
        loop {
            let candidate = (pivot_row..t.len())
                .filter(|&r| !t[r][col].is_zero())
                .min_by_key(|&r| (t[r][col].magnitude().clone(), r));
            let Some(piv) = candidate else { break };
            t.swap(pivot_row, piv);
            let mut any_left = false;
            for r in pivot_row + 1..t.len() {
                if t[r][col].is_zero() {
                    continue;
                }
                let qq = rounded_quotient(&t[r][col], &t[pivot_row][col]);
                if !qq.is_zero() {
                    for c in 0..n + k {
                        let sub = &qq * &t[pivot_row][c];
                        t[r][c] -= sub;
                    }
                }
                if !t[r][col].is_zero() {
                    any_left = true;
                }
            }
            if !any_left {
                pivot_row += 1;
                break;
            }
        }
    }
    t[pivot_row..]
        .iter()
        .map(|row| row[n..].to_vec())
        .collect()
}

/// Smith normal form `U·M·V = D` with the transforms tracked.
///
/// Returns `(u, d, v_inv)` where `d` is the list of diagonal entries
/// (non-negative, each dividing the next, zeros trailing) and `v_inv` is
/// `V^{-1}`. The row space of `M` is `⊕ d_i · r_i` for the rows `r_i` of
/// `V^{-1}`.
pub fn smith_normal_form(m: &IntMatrix) -> (IntMatrix, Vec<BigInt>, IntMatrix) {
    let a = m.len();
    let b = m.first().map_or(0, Vec::len);
    let mut w = m.clone();
    let mut u = identity(a);
    let mut v_inv = identity(b);

    let row_sub = |w: &mut IntMatrix, u: &mut IntMatrix, dst: usize, src: usize, c: &BigInt| {
        for x in 0..w[dst].len() {
            let s = c * &w[src][x];
            w[dst][x] -= s;
        }
        for x in 0..u[dst].len() {
            let s = c * &u[src][x];
            u[dst][x] -= s;
        }
    };
    // column op  col_dst -= c·col_src  ⇒  v_inv.row_src += c·v_inv.row_dst
    let col_sub =
        |w: &mut IntMatrix, v_inv: &mut IntMatrix, dst: usize, src: usize, c: &BigInt| {
            for row in w.iter_mut() {
                let s = c * &row[src];
                row[dst] -= s;
            }
            for x in 0..v_inv[src].len() {
                let s = c * &v_inv[dst][x];
                v_inv[src][x] += s;
            }
        };

    let rank_bound = a.min(b);
    let mut t = 0usize;
    while t < rank_bound {
        let pivot = (t..a)
            .flat_map(|i| (t..b).map(move |j| (i, j)))
            .filter(|&(i, j)| !w[i][j].is_zero())
            .min_by_key(|&(i, j)| (w[i][j].magnitude().clone(), i, j));
        let Some((pi, pj)) = pivot else {
            break;
        };
        if pi != t {
            w.swap(pi, t);
            u.swap(pi, t);
        }
        if pj != t {
            for row in w.iter_mut() {
                row.swap(pj, t);
            }
            v_inv.swap(pj, t);
        }
        loop {
            // clear below
            let mut dirty = false;
            for i in t + 1..a {
                if !w[i][t].is_zero() {
                    let q = rounded_quotient(&w[i][t].clone(), &w[t][t].clone());
                    row_sub(&mut w, &mut u, i, t, &q);
                    if !w[i][t].is_zero() {
                        dirty = true;
                    }
                }
            }
            // clear right
            for j in t + 1..b {
                if !w[t][j].is_zero() {
                    let q = rounded_quotient(&w[t][j].clone(), &w[t][t].clone());
                    col_sub(&mut w, &mut v_inv, j, t, &q);
                    if !w[t][j].is_zero() {
                        dirty = true;
                    }
                }
            }
            if dirty {
                // a smaller entry appeared in the cross; re-pivot on it
                let (pi, pj) = (t..a)
                    .flat_map(|i| (t..b).map(move |j| (i, j)))
                    .filter(|&(i, j)| !w[i][j].is_zero())
                    .min_by_key(|&(i, j)| (w[i][j].magnitude().clone(), i, j))
                    .expect("cross is dirty, some entry is nonzero");
                if pi != t {
                    w.swap(pi, t);
                    u.swap(pi, t);
                }
                if pj != t {
                    for row in w.iter_mut() {
                        row.swap(pj, t);
                    }
                    v_inv.swap(pj, t);
                }
                continue;
            }
            // divisibility fix-up: every remaining entry must be divisible
            // by the pivot
            let offender = (t + 1..a)
                .flat_map(|i| (t + 1..b).map(move |j| (i, j)))
                .find(|&(i, j)| !(&w[i][j] % &w[t][t]).is_zero());
            match offender {
                None => break,
                Some((i, _)) => {
                    let minus_one = -BigInt::one();
                    row_sub(&mut w, &mut u, t, i, &minus_one);
                }
            }
        }
        if w[t][t].is_negative() {
            for x in 0..b {
                w[t][x] = -w[t][x].clone();
            }
            for x in 0..a {
                u[t][x] = -u[t][x].clone();
            }
        }
        t += 1;
    }
    let d = (0..rank_bound)
        .map(|i| w[i][i].clone())
        .collect();
    (u, d, v_inv)
}

/// Rank of an integer matrix over `Q`.
pub fn integer_rank(m: &IntMatrix) -> usize {
    let (_, d, _) = smith_normal_form(m);
    d.iter().filter(|x| !x.is_zero()).count()
}

/// Row-style Hermite normal form as a canonical basis of the row lattice
/// (zero rows dropped); lattices are equal iff their HNFs are equal.
pub fn hnf_rows(m: &IntMatrix) -> IntMatrix {
    if m.is_empty() {
        return vec![];
    }
    let cols = m[0].len();
    let mut w = m.clone();
    let mut pivot_row = 0usize;
    for col in 0..cols {
        loop {
            let candidate = (pivot_row..w.len())
                .filter(|&r| !w[r][col].is_zero())
                .min_by_key(|&r| (w[r][col].magnitude().clone(), r));
            let Some(piv) = candidate else { break };
            w.swap(pivot_row, piv);
            let mut any_left = false;
            for r in pivot_row + 1..w.len() {
                if w[r][col].is_zero() {
                    continue;
                }
                let q = rounded_quotient(&w[r][col].clone(), &w[pivot_row][col].clone());
                for c in 0..cols {
                    let s = &q * &w[pivot_row][c];
                    w[r][c] -= s;
                }
                if !w[r][col].is_zero() {
                    any_left = true;
                }
            }
            if !any_left {
                // normalize pivot sign and reduce the rows above
                if w[pivot_row][col].is_negative() {
                    for c in 0..cols {
                        w[pivot_row][c] = -w[pivot_row][c].clone();
                    }
                }
                for r in 0..pivot_row {
                    let q = num_integer::Integer::div_floor(&w[r][col], &w[pivot_row][col]);
                    if !q.is_zero() {
                        for c in 0..cols {
                            let s = &q * &w[pivot_row][c];
                            w[r][c] -= s;
                        }
                    }
                }
                pivot_row += 1;
                break;
            }
        }
    }
    w.truncate(pivot_row);
    w
}

/// Exact determinant of a square integer matrix (Bareiss).
pub fn integer_det(m: &IntMatrix) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut w = m.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for t in 0..n - 1 {
        if w[t][t].is_zero() {
            let Some(piv) = (t + 1..n).find(|&r| !w[r][t].is_zero()) else {
                return BigInt::zero();
            };
            w.swap(t, piv);
            sign = -sign;
        }
        for i in t + 1..n {
            for j in t + 1..n {
                let num = &w[i][j] * &w[t][t] - &w[i][t] * &w[t][j];
                w[i][j] = &num / &prev;
            }
            w[i][t] = BigInt::zero();
        }
        prev = w[t][t].clone();
    }
    sign * w[n - 1][n - 1].clone()
}

pub type PadicMatrix = Vec<Vec<PadicNumber>>;

fn val_key(x: &PadicNumber) -> i64 {
    match x.valuation() {
        Valuation::Finite(v) => v,
        _ => i64::MAX,
    }
}

/// Determinant of a matrix over `Q_ℓ` with tracked precision.
///
/// Small matrices (n ≤ 4) expand by Leibniz, which never divides and so
/// never loses relative digits; larger ones use Gaussian elimination with
/// minimal-valuation pivoting. Returns the determinant and the number of
/// relative digits lost against the context's `N`.
pub fn padic_det(m: &PadicMatrix, ctx: PrecisionContext) -> Result<(PadicNumber, u32)> {
    let n = m.len();
    for row in m {
        if row.len() != n {
            return Err(Error::LengthMismatch(row.len(), n));
        }
    }
    if n == 0 {
        return Ok((PadicNumber::one(ctx), 0));
    }
    let det = if n <= 4 {
        leibniz_det(m, ctx)?
    } else {
        elimination_det(m, ctx)?
    };
    let loss = match det.rel_precision() {
        Some(rel) => ctx.precision() - rel,
        None => 0,
    };
    Ok((det, loss))
}

fn leibniz_det(m: &PadicMatrix, ctx: PrecisionContext) -> Result<PadicNumber> {
    let n = m.len();
    let mut acc = PadicNumber::zero(ctx);
    let mut perm: Vec<usize> = (0..n).collect();
    // iterate permutations in lexicographic order with parity tracking
    loop {
        let mut term = PadicNumber::one(ctx);
        for (i, &j) in perm.iter().enumerate() {
            term = term.try_mul(&m[i][j])?;
        }
        if permutation_parity(&perm) {
            acc = acc.try_sub(&term)?;
        } else {
            acc = acc.try_add(&term)?;
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(acc)
}

fn permutation_parity(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    let mut odd = false;
    for i in 0..p.len() {
        if seen[i] {
            continue;
        }
        let mut j = i;
        let mut len = 0;
        while !seen[j] {
            seen[j] = true;
            j = p[j];
            len += 1;
        }
        if len % 2 == 0 {
            odd = !odd;
        }
    }
    odd
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn elimination_det(m: &PadicMatrix, ctx: PrecisionContext) -> Result<PadicNumber> {
    let n = m.len();
    let mut w = m.to_vec();
    let mut det = PadicNumber::one(ctx);
    for t in 0..n {
        let piv = (t..n)
            .min_by_key(|&r| (val_key(&w[r][t]), r))
            .expect("nonempty column");
        if w[piv][t].is_zero_at_precision() {
            // the whole column is indistinguishable from zero
            return det.try_mul(&w[piv][t]);
        }
        w.swap(t, piv);
        if piv != t {
            det = det.neg();
        }
        det = det.try_mul(&w[t][t])?;
        let pivot_inv = w[t][t].inverse()?;
        for r in t + 1..n {
            if w[r][t].is_zero_at_precision() {
                continue;
            }
            let factor = w[r][t].try_mul(&pivot_inv)?;
            for c in t..n {
                let sub = factor.try_mul(&w[t][c])?;
                w[r][c] = w[r][c].try_sub(&sub)?;
            }
        }
    }
    Ok(det)
}

/// Solve the consistent overdetermined system `A·x = b` over `Q_ℓ`
/// (rows ≥ cols, rank = cols at precision) by elimination with
/// minimal-valuation pivoting.
///
/// A pivotless column means the rank condition fails; a residual row that
/// is distinguishable from zero (valuation below `N - slack`) means the
/// system is inconsistent at precision.
pub fn padic_solve(
    a: &PadicMatrix,
    b: &[PadicNumber],
    ctx: PrecisionContext,
) -> Result<Vec<PadicNumber>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    if rows != b.len() {
        return Err(Error::LengthMismatch(rows, b.len()));
    }
    if rows < cols {
        return Err(Error::SingularAtPrecision(format!(
            "{rows} equations for {cols} unknowns"
        )));
    }
    let mut w: PadicMatrix = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    let mut pivots = Vec::with_capacity(cols);
    for t in 0..cols {
        let piv = (pivots.len()..rows)
            .min_by_key(|&r| (val_key(&w[r][t]), r))
            .expect("rows remain");
        if w[piv][t].is_zero_at_precision() {
            return Err(Error::SingularAtPrecision(format!(
                "column {t} has no pivot at precision"
            )));
        }
        let dst = pivots.len();
        w.swap(dst, piv);
        let pivot_inv = w[dst][t].inverse()?;
        for r in 0..rows {
            if r == dst || w[r][t].is_zero_at_precision() {
                continue;
            }
            let factor = w[r][t].try_mul(&pivot_inv)?;
            for c in t..=cols {
                let sub = factor.try_mul(&w[dst][c])?;
                w[r][c] = w[r][c].try_sub(&sub)?;
            }
        }
        pivots.push((dst, t));
    }
    // residual rows must be indistinguishable from zero
    let threshold = (ctx.precision() - ctx.slack()) as i64;
    for r in cols..rows {
        if let Valuation::Finite(v) = w[r][cols].valuation() {
            if v < threshold {
                return Err(Error::SingularAtPrecision(format!(
                    "inconsistent: residual of valuation {v} < {threshold}"
                )));
            }
        }
    }
    let mut x = vec![PadicNumber::zero(ctx); cols];
    for &(r, c) in &pivots {
        x[c] = w[r][cols].try_div(&w[r][c])?;
    }
    Ok(x)
}

/// Ranks of a p-adic matrix read through the modulus `ℓ^M`: the number of
/// elementary divisors of the integer lift stacked over `ℓ^M·I` whose
/// ℓ-valuation is below `M`.
pub fn rank_at_modulus(rows: &PadicMatrix, ctx: PrecisionContext, modulus_exp: u32) -> Result<usize> {
    let lifted = lift_matrix(rows, modulus_exp)?;
    let n = lifted.first().map_or(0, Vec::len);
    if n == 0 {
        return Ok(0);
    }
    let q = BigInt::from(ctx.pow(modulus_exp));
    let mut stacked = lifted;
    for j in 0..n {
        let mut row = vec![BigInt::zero(); n];
        row[j] = q.clone();
        stacked.push(row);
    }
    let (_, d, _) = smith_normal_form(&stacked);
    let ell = BigInt::from(ctx.ell());
    let mut rank = 0;
    for di in &d {
        if di.is_zero() {
            continue;
        }
        let mut v = 0u32;
        let mut x = di.clone();
        while (&x % &ell).is_zero() && v < modulus_exp {
            x /= &ell;
            v += 1;
        }
        if v < modulus_exp {
            rank += 1;
        }
    }
    Ok(rank)
}

/// Integer lift of a p-adic matrix modulo `ℓ^M`; entries must be ℓ-adic
/// integers known at least that far.
pub fn lift_matrix(rows: &PadicMatrix, modulus_exp: u32) -> Result<IntMatrix> {
    rows.iter()
        .map(|row| {
            row.iter()
                .map(|x| {
                    x.residue(modulus_exp)
                        .map(BigInt::from)
                        .ok_or_else(|| {
                            Error::InsufficientPrecision(format!(
                                "entry known only to {:?} digits, need {modulus_exp}",
                                x.abs_precision()
                            ))
                        })
                })
                .collect()
        })
        .collect()
}
