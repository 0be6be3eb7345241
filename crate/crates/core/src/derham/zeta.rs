//! Independent oracles for the de Rham machinery: exact point counts over
//! small extension fields, the L-polynomial they determine through Newton's
//! identities and the functional equation, a floating-point Weil bound check
//! on its roots, and the Cartier (Hasse-Witt) matrix read off from f^((p-1)/2).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{DerhamError, HyperellipticCurve};
use crate::padic::PadicContext;

/// #X(F_{p^k}) including the single point at infinity, by enumeration.
pub fn count_points(curve: &HyperellipticCurve, k: usize) -> Result<u64, DerhamError> {
    let p = curve.p();
    let ctx = PadicContext::new(p, k, 1)?;
    let q: u64 = p.pow(k as u32);
    let f_res: Vec<_> = curve
        .f_int()
        .iter()
        .map(|c| {
            let r = c.mod_floor(&BigInt::from(p));
            ctx.from_bigint(&r)
        })
        .collect();
    let one = ctx.one();
    let half = (q - 1) / 2;
    let mut total = 1u64;
    for idx in 0..q {
        // Digits of idx in base p are the coordinates of a field element.
        let mut digits = Vec::with_capacity(k);
        let mut t = idx;
        for _ in 0..k {
            digits.push((t % p).into());
            t /= p;
        }
        let x = ctx.from_coeffs(digits, 1);
        let mut z = ctx.zero_at(1);
        for c in f_res.iter().rev() {
            z = z.mul(&x).add(c);
        }
        if z.is_zero() {
            total += 1;
        } else if z.pow(half) == one {
            total += 2;
        }
    }
    Ok(total)
}

/// Coefficients of L(T) = prod (1 - alpha_i T), low-to-high, length 2g+1.
///
/// Counts over F_{p^k} for k = 1..g give the power sums of the alpha_i;
/// Newton's identities recover e_1..e_g and the functional equation
/// c_{2g-j} = p^{g-j} c_j supplies the top half.
pub fn zeta_numerator_bruteforce(curve: &HyperellipticCurve) -> Vec<BigInt> {
    let p = BigInt::from(curve.p());
    let g = curve.genus() as usize;
    let mut s = vec![BigInt::zero()];
    for k in 1..=g {
        let n_k = count_points(curve, k).expect("context for the counting field");
        s.push(p.pow(k as u32) + 1 - BigInt::from(n_k));
    }
    let mut e = vec![BigInt::from(1)];
    for j in 1..=g {
        let mut acc = BigInt::zero();
        for i in 1..=j {
            let term = &e[j - i] * &s[i];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        let (q, r) = acc.div_rem(&BigInt::from(j as i64));
        assert!(r.is_zero(), "Newton identity must divide exactly");
        e.push(q);
    }
    let mut c = vec![BigInt::zero(); 2 * g + 1];
    for j in 0..=g {
        c[j] = if j % 2 == 1 { -e[j].clone() } else { e[j].clone() };
    }
    for j in 0..g {
        c[2 * g - j] = p.pow((g - j) as u32) * &c[j];
    }
    c
}

/// All roots of L(T) have absolute value p^(-1/2), checked numerically with
/// Durand-Kerner iteration; `tol` is the allowed relative deviation.
pub fn weil_roots_check(l_coeffs: &[BigInt], p: u64, tol: f64) -> bool {
    let deg = l_coeffs.len() - 1;
    if deg == 0 {
        return true;
    }
    let lead = bigint_to_f64(&l_coeffs[deg]);
    if lead == 0.0 {
        return false;
    }
    let monic: Vec<(f64, f64)> =
        l_coeffs.iter().map(|c| (bigint_to_f64(c) / lead, 0.0)).collect();
    let eval = |z: (f64, f64)| -> (f64, f64) {
        let mut acc = (0.0, 0.0);
        for c in monic.iter().rev() {
            acc = cadd(cmul(acc, z), *c);
        }
        acc
    };
    let mut roots: Vec<(f64, f64)> = (0..deg)
        .map(|i| cpow((0.4, 0.9), i as u32 + 1))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let mut denom = (1.0, 0.0);
            for j in 0..deg {
                if i != j {
                    denom = cmul(denom, csub(roots[i], roots[j]));
                }
            }
            let step = cdiv(eval(roots[i]), denom);
            moved = moved.max(cabs(step));
            roots[i] = csub(roots[i], step);
        }
        if moved < 1e-13 {
            break;
        }
    }
    let target = (p as f64).sqrt().recip();
    roots.iter().all(|&r| (cabs(r) / target - 1.0).abs() < tol)
}

fn bigint_to_f64(v: &BigInt) -> f64 {
    let s = v.abs().to_string().parse::<f64>().unwrap_or(f64::INFINITY);
    if v.is_negative() {
        -s
    } else {
        s
    }
}

fn cadd(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 + b.0, a.1 + b.1)
}

fn csub(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 - b.0, a.1 - b.1)
}

fn cmul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn cdiv(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let n = b.0 * b.0 + b.1 * b.1;
    ((a.0 * b.0 + a.1 * b.1) / n, (a.1 * b.0 - a.0 * b.1) / n)
}

fn cabs(a: (f64, f64)) -> f64 {
    a.0.hypot(a.1)
}

fn cpow(a: (f64, f64), e: u32) -> (f64, f64) {
    let mut acc = (1.0, 0.0);
    for _ in 0..e {
        acc = cmul(acc, a);
    }
    acc
}

/// Matrix of the Cartier operator on H^0(Omega): column i holds the
/// coefficients of C(x^i dx/y) in the basis x^m dx/y, read from f^((p-1)/2)
/// over the residue field. Entry (m, i) is the x^(pm+p-1-i) coefficient.
pub fn cartier_matrix(curve: &HyperellipticCurve) -> Vec<Vec<u64>> {
    let p = curve.p();
    let g = curve.genus() as usize;
    let h = curve.f_bar().pow((p - 1) / 2);
    let mut mat = vec![vec![0u64; g]; g];
    for (m, row) in mat.iter_mut().enumerate() {
        for (i, entry) in row.iter_mut().enumerate() {
            let e = p as usize * m + p as usize - 1 - i;
            *entry = h.coeff(e);
        }
    }
    mat
}
