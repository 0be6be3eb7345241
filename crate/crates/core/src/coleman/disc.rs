//! Honest T-series expansion of the abelian integral on a residue disc.
//!
//! On the disc above a finite non-Weierstrass point z0 = (x0, y0) with local
//! parameter T = x - x0, the integral of omega is assembled level by level:
//! nu_i denotes V^(n_i) omega divided by p^(n_i - i), and with the disc
//! Frobenius lift T -> T^p the primitive of nu_i equals the primitive of
//! nu_{i+1} composed with T^(p^(n_{i+1} - n_i)), divided by p, plus an
//! integral function g_i vanishing at 0. The code computes every level's
//! primitive directly from the class representative, forms each g_i, and
//! certifies its integrality coefficient by coefficient; a single scale or
//! twist error anywhere in the Frobenius data would surface here as a
//! negative-valuation coefficient.

use super::{sequence_with_primitives, ColemanError, K0Convention};
use crate::derham::{CohomologyClass, CurvePointBar, FrobeniusData};
use crate::padic::{PadicNumber, ScaledPadic, ScaledValuation};
use crate::series::{newton_polygon, NewtonPolygon, PadicSeries};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// The computed expansion S(T) = sum a_m T^m of int omega from z0, together
/// with the sequence data and certificates behind it.
#[derive(Clone, Debug)]
pub struct DiscExpansion {
    coeffs: Vec<ScaledPadic>,
    /// The dT-coefficient series of omega itself at the center (length
    /// terms - 1): the termwise derivative target.
    omega_series: Vec<PadicNumber>,
    n_list: Vec<u64>,
    k_list: Vec<u64>,
    /// Levels 0..depth carried correction functions g_i.
    depth: usize,
    x0: PadicNumber,
    y0: PadicNumber,
    p: u64,
}

impl DiscExpansion {
    /// Coefficients a_0 ..= a_(terms-1); a_0 = 0.
    pub fn coefficients(&self) -> &[ScaledPadic] {
        &self.coeffs
    }

    pub fn omega_series(&self) -> &[PadicNumber] {
        &self.omega_series
    }

    pub fn n_list(&self) -> &[u64] {
        &self.n_list
    }

    pub fn k_list(&self) -> &[u64] {
        &self.k_list
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn center(&self) -> (&PadicNumber, &PadicNumber) {
        (&self.x0, &self.y0)
    }

    /// The valuation profile of the truncated series. The caller supplies the
    /// tail bound asserted for the dropped coefficients, if any. The constant
    /// term is exactly zero by the normalization S(0) = 0, not merely zero at
    /// working precision, so it is marked as such.
    pub fn series(&self, tail_bound: Option<BigRational>) -> PadicSeries {
        let mut s = PadicSeries::from_scaled(&self.coeffs, tail_bound);
        s.set_exact_zero(0);
        s
    }

    pub fn polygon(
        &self,
        tail_bound: Option<BigRational>,
    ) -> Result<NewtonPolygon, ColemanError> {
        Ok(newton_polygon(&self.series(tail_bound))?)
    }

    /// Check the support law on every determinate coefficient: val(a_m) <= -i
    /// forces m to be a multiple of p^(n_i) at least k_i p^(n_i).
    pub fn check_support_law(&self) -> Result<(), ColemanError> {
        for (m, c) in self.coeffs.iter().enumerate() {
            let ScaledValuation::Known(v) = c.valuation() else { continue };
            if v >= 0 {
                continue;
            }
            for i in 1..self.n_list.len() {
                if (i as i64) > -v {
                    break;
                }
                let pw = self.p.pow(u32::try_from(self.n_list[i]).unwrap()) as usize;
                if m % pw != 0 || (m / pw) < self.k_list[i] as usize {
                    return Err(ColemanError::IntegralityViolated(format!(
                        "coefficient {m} has valuation {v} but is not in p^{}*Z_(>={})",
                        self.n_list[i], self.k_list[i]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Truncated product of coefficient vectors over the curve context.
fn mul_trunc(a: &[PadicNumber], b: &[PadicNumber], len: usize) -> Vec<PadicNumber> {
    let ctx = a[0].context();
    let mut out = vec![ctx.zero(); len.min(a.len() + b.len() - 1)];
    for (i, x) in a.iter().enumerate() {
        if i >= len || x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if i + j >= len {
                break;
            }
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

/// Coefficients of (1 + u(T))^(-1/2) mod T^len for u with u(0) = 0:
/// sum_j (-1)^j binom(2j, j) 4^(-j) u^j.
fn inv_sqrt_series(u: &[PadicNumber], len: usize) -> Vec<PadicNumber> {
    let ctx = u[0].context();
    let inv4 = ctx.from_u64(4).invert().expect("4 is a unit for odd p");
    let mut out = vec![ctx.zero(); len];
    out[0] = ctx.one();
    let mut u_pow = vec![ctx.one()]; // u^j, truncated
    let mut central = BigUint::one(); // binom(2j, j)
    let mut scale = ctx.one(); // (-1)^j 4^(-j)
    for j in 1..len {
        u_pow = mul_trunc(&u_pow, u, len);
        // binom(2j, j) = binom(2j-2, j-1) * 2(2j-1)/j, an exact division.
        let num = &central * BigUint::from(2 * (2 * j as u64 - 1));
        assert!((&num % BigUint::from(j as u64)).is_zero(), "central binomial recurrence");
        central = num / BigUint::from(j as u64);
        scale = scale.mul(&inv4).neg();
        if u_pow.iter().all(|c| c.is_zero()) {
            break;
        }
        let coeff = ctx.from_biguint(central.clone()).mul(&scale);
        for (t, c) in u_pow.iter().enumerate() {
            if t < len {
                out[t] = out[t].add(&c.mul(&coeff));
            }
        }
    }
    out
}

/// The dT-coefficient series of the 1-form with the class's coordinates,
/// sum c_j x^j dx/y, expanded at x = x0 + T, truncated to `len` terms.
fn expand_form(
    class: &CohomologyClass,
    x0: &PadicNumber,
    inv_y: &[PadicNumber],
    len: usize,
) -> Vec<PadicNumber> {
    let ctx = x0.context();
    // P(T) = sum c_j (x0 + T)^j via iterated multiplication by (x0 + T).
    let mut acc = vec![ctx.zero(); len];
    let mut pow = vec![ctx.one()];
    for (j, c) in class.coords().iter().enumerate() {
        if j > 0 {
            pow = mul_trunc(&pow, &[x0.clone(), ctx.one()], len);
        }
        if c.is_zero() {
            continue;
        }
        for (t, q) in pow.iter().enumerate() {
            if t < len {
                acc[t] = acc[t].add(&q.mul(c));
            }
        }
    }
    mul_trunc(&acc, inv_y, len)
}

/// Termwise primitive: w(T) dT integrates to sum w_(m-1)/m T^m.
fn primitive(w: &[PadicNumber], len: usize) -> Vec<ScaledPadic> {
    let ctx = w[0].context();
    let mut out = vec![ScaledPadic::zero(ctx); len];
    for m in 1..len {
        if m - 1 < w.len() {
            out[m] = ScaledPadic::from_padic(w[m - 1].clone()).div_u64(m as u64);
        }
    }
    out
}

/// Expand int omega to `terms` coefficients on the disc above zbar.
///
/// zbar must be finite non-Weierstrass with coordinates in the prime field;
/// omega must be holomorphic and primitive. The depth of the level recursion
/// is chosen so that all dropped corrections start at or beyond T^terms.
pub fn disc_expansion(
    frob: &FrobeniusData,
    zbar: &CurvePointBar,
    omega: &CohomologyClass,
    terms: usize,
) -> Result<DiscExpansion, ColemanError> {
    assert!(terms >= 2, "at least two coefficients are needed");
    let curve = frob.curve();
    let ctx = curve.context();
    let p = curve.p();
    let CurvePointBar::FiniteNonWeierstrass { a, b } = zbar else {
        return Err(ColemanError::UnsupportedDisc(
            "expansion needs a finite non-Weierstrass center".into(),
        ));
    };
    if a.context().f() != 1 {
        return Err(ColemanError::UnsupportedDisc(
            "expansion centers must have prime-field coordinates".into(),
        ));
    }

    // Integral lift of the center: x0 the plain digit lift, y0 the Hensel
    // square root of f(x0) over the residue b.
    let x0 = ctx.from_biguint(a.coeffs()[0].clone());
    let fx0 = {
        let mut acc = ctx.zero();
        for c in curve.f_padic().iter().rev() {
            acc = acc.mul(&x0).add(c);
        }
        acc
    };
    let mut y0 = ctx.from_biguint(b.coeffs()[0].clone());
    let inv2 = ctx.from_u64(2).invert()?;
    for _ in 0..64 {
        if y0.mul(&y0) == fx0 {
            break;
        }
        y0 = y0.add(&fx0.mul(&y0.invert()?)).mul(&inv2);
    }
    assert_eq!(y0.mul(&y0), fx0, "Hensel iteration for y0 did not converge");

    // Grow the sequence until the next level's corrections are all dropped.
    let mut len = 2;
    let (seq, prims) = loop {
        let (seq, prims) =
            sequence_with_primitives(frob, omega, zbar, len, K0Convention::UniformPlusOne)?;
        let reach = p.checked_pow(u32::try_from(*seq.n_list().last().unwrap()).unwrap());
        if reach.is_some_and(|r| r as usize >= terms) {
            break (seq, prims);
        }
        len += 1;
    };
    let n_list = seq.n_list().to_vec();
    let k_list = seq.k_list().to_vec();
    let depth = n_list.len() - 1;

    // 1/y(T) = y0^(-1) (1 + u)^(-1/2) with u = (f(x0+T) - f(x0))/f(x0).
    let f_shift = {
        // f(x0 + T) by Horner in (x0 + T).
        let mut acc = vec![ctx.zero()];
        for c in curve.f_padic().iter().rev() {
            acc = mul_trunc(&acc, &[x0.clone(), ctx.one()], terms);
            if acc.is_empty() {
                acc = vec![ctx.zero()];
            }
            acc[0] = acc[0].add(c);
        }
        acc
    };
    let inv_fx0 = fx0.invert()?;
    let mut u = vec![ctx.zero(); terms.min(f_shift.len())];
    for (t, c) in f_shift.iter().enumerate().skip(1) {
        if t < u.len() {
            u[t] = c.mul(&inv_fx0);
        }
    }
    let inv_y0 = y0.invert()?;
    let mut inv_y = inv_sqrt_series(&u, terms);
    for c in &mut inv_y {
        *c = c.mul(&inv_y0);
    }

    // Level lengths: index m at level i lands at final index m p^(n_i).
    let level_len = |i: usize| -> usize {
        let pw = p.pow(u32::try_from(n_list[i]).unwrap()) as usize;
        (terms - 1) / pw + 1
    };

    // Top level: only the constant 0 survives truncation.
    let mut s_cur: Vec<ScaledPadic> = {
        let l = level_len(depth);
        let w = expand_form(&prims[depth], &x0, &inv_y, l.max(2) - 1);
        primitive(&w, l)
    };
    let mut omega_series: Vec<PadicNumber> = Vec::new();

    for i in (0..depth).rev() {
        let l_i = level_len(i);
        let stride = p.pow(u32::try_from(n_list[i + 1] - n_list[i]).unwrap()) as usize;
        let mut comp = vec![ScaledPadic::zero(ctx); l_i];
        for (m, v) in s_cur.iter().enumerate() {
            let t = m * stride;
            if t < l_i {
                comp[t] = v.div_p_pow(1);
            }
        }
        let w = expand_form(&prims[i], &x0, &inv_y, l_i - 1);
        if i == 0 {
            omega_series = w.clone();
        }
        let w_hat = primitive(&w, l_i);
        let mut next = Vec::with_capacity(l_i);
        for m in 0..l_i {
            let gm = w_hat[m].sub(&comp[m]);
            match gm.valuation() {
                ScaledValuation::Known(v) if v < 0 => {
                    return Err(ColemanError::IntegralityViolated(format!(
                        "g_{i} coefficient {m} has valuation {v}"
                    )));
                }
                ScaledValuation::AtLeast(bound) if bound < 0 => {
                    return Err(ColemanError::PrecisionExhausted(format!(
                        "g_{i} coefficient {m} only bounded below by {bound}"
                    )));
                }
                _ => {}
            }
            next.push(gm.add(&comp[m]));
        }
        s_cur = next;
    }
    assert!(
        s_cur[0].is_zero_at_precision(),
        "the integral is normalized to vanish at the center"
    );

    Ok(DiscExpansion {
        coeffs: s_cur,
        omega_series,
        n_list,
        k_list,
        depth,
        x0,
        y0,
        p,
    })
}
