//! Odd-degree hyperelliptic curves with good reduction: the Frobenius and
//! Verschiebung structure on H^1_dR, class valuations, reduction of classes to
//! differentials mod p, orders of vanishing, and a brute-force zeta oracle.
//!
//! The integral lattice is taken to be the span of the basis x^i dx/y,
//! 0 <= i < 2g. That identification is validated at runtime (integrality of F,
//! the shape of V, and the zeta consistency check) and a curve failing it is
//! rejected rather than silently processed.

mod kedlaya;
mod zeta;

pub use kedlaya::{frobenius_matrix, FrobeniusData};
pub use zeta::{cartier_matrix, count_points, weil_roots_check, zeta_numerator_bruteforce};

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fp::FpPoly;
use crate::padic::{PadicContext, PadicError, PadicNumber, Valuation};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DerhamError {
    #[error("p = 2 is outside the odd-degree hyperelliptic setup")]
    EvenPrime,
    #[error("genus must be at least 2, got {0}")]
    GenusTooSmall(u64),
    #[error("f must be monic of degree 2g+1")]
    BadModel,
    #[error("bad reduction: f mod p is not squarefree")]
    BadReduction,
    #[error("the class is indistinguishable from zero at working precision")]
    AtPrecisionZero,
    #[error("class/p^val does not lie in H^0(Omega) + p H^1")]
    NotInHolomorphicPlusP,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("basis lattice mismatch: {0}")]
    LatticeMismatch(String),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

/// JSON exchange format for a curve, shared with the command-line interface.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveSpec {
    pub p: u64,
    pub genus: u64,
    /// Coefficients of f, low to high; length 2g+2, monic.
    pub f_coeffs: Vec<i64>,
    pub precision: usize,
}

struct CurveInner {
    ctx: PadicContext,
    g: u64,
    /// Exact integer coefficients of the monic degree-2g+1 model.
    f_int: Vec<BigInt>,
    /// f as truncated p-adics in ctx.
    f_padic: Vec<PadicNumber>,
    /// f mod p.
    f_bar: FpPoly,
    p_ge_2g: bool,
    p_gt_2g_minus_2: bool,
}

/// y^2 = f(x), f monic of odd degree 2g+1 over Z_p, with good reduction at
/// the odd prime p. Cheap to clone.
#[derive(Clone)]
pub struct HyperellipticCurve(Arc<CurveInner>);

impl fmt::Debug for HyperellipticCurve {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            fmt,
            "HyperellipticCurve(p={}, g={}, N={})",
            self.p(),
            self.genus(),
            self.precision()
        )
    }
}

impl PartialEq for HyperellipticCurve {
    fn eq(&self, other: &Self) -> bool {
        self.p() == other.p()
            && self.precision() == other.precision()
            && self.0.f_int == other.0.f_int
    }
}
impl Eq for HyperellipticCurve {}

impl HyperellipticCurve {
    pub fn new(p: u64, f_coeffs: Vec<BigInt>, precision: usize) -> Result<Self, DerhamError> {
        if p == 2 {
            return Err(DerhamError::EvenPrime);
        }
        let deg = f_coeffs.len().saturating_sub(1);
        if deg < 5 || deg % 2 == 0 || !f_coeffs[deg].is_one() {
            if deg >= 3 && deg % 2 == 1 && f_coeffs[deg].is_one() {
                return Err(DerhamError::GenusTooSmall((deg as u64 - 1) / 2));
            }
            return Err(DerhamError::BadModel);
        }
        let g = (deg as u64 - 1) / 2;
        let ctx = PadicContext::new(p, 1, precision)?;
        let f_bar = FpPoly::new(
            p,
            f_coeffs
                .iter()
                .map(|c| u64::try_from(c.mod_floor(&BigInt::from(p))).unwrap())
                .collect(),
        );
        // Good reduction for a monic odd model means f stays squarefree mod p.
        let d = f_bar.derivative();
        if f_bar.deg() != Some(deg) || f_bar.gcd(&d).deg() != Some(0) {
            return Err(DerhamError::BadReduction);
        }
        let f_padic = f_coeffs.iter().map(|c| ctx.from_bigint(c)).collect();
        Ok(HyperellipticCurve(Arc::new(CurveInner {
            ctx,
            g,
            f_int: f_coeffs,
            f_padic,
            f_bar,
            p_ge_2g: p >= 2 * g,
            p_gt_2g_minus_2: p > 2 * g - 2,
        })))
    }

    pub fn from_spec(spec: &CurveSpec) -> Result<Self, DerhamError> {
        let coeffs: Vec<BigInt> = spec.f_coeffs.iter().map(|&c| BigInt::from(c)).collect();
        let curve = Self::new(spec.p, coeffs, spec.precision)?;
        if curve.genus() != spec.genus {
            return Err(DerhamError::BadModel);
        }
        Ok(curve)
    }

    pub fn to_spec(&self) -> CurveSpec {
        CurveSpec {
            p: self.p(),
            genus: self.genus(),
            f_coeffs: self
                .0
                .f_int
                .iter()
                .map(|c| i64::try_from(c).expect("curve coefficients fit i64"))
                .collect(),
            precision: self.precision(),
        }
    }

    pub fn p(&self) -> u64 {
        self.0.ctx.p()
    }

    pub fn genus(&self) -> u64 {
        self.0.g
    }

    pub fn precision(&self) -> usize {
        self.0.ctx.n()
    }

    pub fn context(&self) -> &PadicContext {
        &self.0.ctx
    }

    pub fn f_int(&self) -> &[BigInt] {
        &self.0.f_int
    }

    pub fn f_padic(&self) -> &[PadicNumber] {
        &self.0.f_padic
    }

    pub fn f_bar(&self) -> &FpPoly {
        &self.0.f_bar
    }

    /// Whether p >= 2g (hypothesis of the slope and unramifiedness statements).
    pub fn p_ge_2g(&self) -> bool {
        self.0.p_ge_2g
    }

    /// Whether p > 2g-2 (used in the candidate-slope uniqueness argument).
    pub fn p_gt_2g_minus_2(&self) -> bool {
        self.0.p_gt_2g_minus_2
    }

    /// Dimension 2g of H^1_dR in the basis x^i dx/y.
    pub fn h1_dim(&self) -> usize {
        2 * self.0.g as usize
    }

    pub fn basis_class(&self, i: usize, ctx: &PadicContext) -> CohomologyClass {
        assert!(i < self.h1_dim());
        let mut coords = vec![ctx.zero(); self.h1_dim()];
        coords[i] = ctx.one();
        CohomologyClass { curve: self.clone(), coords }
    }
}

/// Element of H^1_dR in the basis x^i dx/y, i < 2g. Coordinates may live in an
/// unramified extension of the curve's base context (same p); the holomorphic
/// subspace is the span of i < g.
#[derive(Clone, PartialEq, Eq)]
pub struct CohomologyClass {
    curve: HyperellipticCurve,
    coords: Vec<PadicNumber>,
}

impl fmt::Debug for CohomologyClass {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fmt, "Class{:?}", self.coords)
    }
}

impl CohomologyClass {
    pub fn new(curve: &HyperellipticCurve, coords: Vec<PadicNumber>) -> Self {
        assert_eq!(coords.len(), curve.h1_dim());
        assert!(!coords.is_empty());
        let p = coords[0].context().p();
        assert_eq!(p, curve.p(), "coordinate context must share the curve's p");
        CohomologyClass { curve: curve.clone(), coords }
    }

    pub fn curve(&self) -> &HyperellipticCurve {
        &self.curve
    }

    pub fn coords(&self) -> &[PadicNumber] {
        &self.coords
    }

    pub fn coords_context(&self) -> &PadicContext {
        self.coords[0].context()
    }

    pub fn add(&self, other: &CohomologyClass) -> CohomologyClass {
        let coords =
            self.coords.iter().zip(&other.coords).map(|(a, b)| a.add(b)).collect();
        CohomologyClass { curve: self.curve.clone(), coords }
    }

    pub fn sub(&self, other: &CohomologyClass) -> CohomologyClass {
        let coords =
            self.coords.iter().zip(&other.coords).map(|(a, b)| a.sub(b)).collect();
        CohomologyClass { curve: self.curve.clone(), coords }
    }

    pub fn scale(&self, c: &PadicNumber) -> CohomologyClass {
        let coords = self.coords.iter().map(|a| a.mul(c)).collect();
        CohomologyClass { curve: self.curve.clone(), coords }
    }

    pub fn mul_by_p_pow(&self, k: usize) -> CohomologyClass {
        let coords = self.coords.iter().map(|a| a.mul_by_p_pow(k)).collect();
        CohomologyClass { curve: self.curve.clone(), coords }
    }

    pub fn div_exact_p_pow(&self, k: usize) -> Result<CohomologyClass, DerhamError> {
        let coords: Result<Vec<_>, _> =
            self.coords.iter().map(|a| a.div_exact_p_pow(k)).collect();
        Ok(CohomologyClass { curve: self.curve.clone(), coords: coords? })
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// Coordinate-wise sigma^k twist (for semilinear maps over extensions).
    pub fn frobenius_pow(&self, k: i64) -> CohomologyClass {
        let coords = self.coords.iter().map(|c| c.frobenius_pow(k)).collect();
        CohomologyClass { curve: self.curve.clone(), coords }
    }

    /// The largest n with class in p^n * (basis lattice): the minimum of the
    /// coordinate valuations.
    pub fn valuation(&self) -> Result<u64, DerhamError> {
        let mut best: Option<u64> = None;
        for c in &self.coords {
            if let Valuation::Finite(v) = c.valuation() {
                best = Some(best.map_or(v, |b| b.min(v)));
            }
        }
        best.ok_or(DerhamError::AtPrecisionZero)
    }

    /// Divide by p^valuation and reduce mod p: the primitive part must land in
    /// H^0(Omega) + p H^1, and the result is its nonzero holomorphic image.
    pub fn reduce_bar(&self) -> Result<DifferentialModP, DerhamError> {
        let val = self.valuation()?;
        let prim = self.div_exact_p_pow(val as usize)?;
        let g = self.curve.genus() as usize;
        for c in &prim.coords[g..] {
            match c.valuation() {
                Valuation::Finite(0) => return Err(DerhamError::NotInHolomorphicPlusP),
                _ => {}
            }
        }
        let mut coeffs: Vec<PadicNumber> =
            prim.coords[..g].iter().map(|c| c.residue()).collect();
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            // All low coordinates divisible by p too would contradict the
            // maximality of the valuation.
            return Err(DerhamError::NotInHolomorphicPlusP);
        }
        Ok(DifferentialModP { coeffs })
    }
}

/// A nonzero global differential h(x) dx/y on the reduced curve, deg h <= g-1,
/// with coefficients in the residue field or an unramified extension of it
/// (precision-1 elements).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferentialModP {
    /// Coefficients of h, low to high, trailing zeros trimmed; nonempty.
    coeffs: Vec<PadicNumber>,
}

impl DifferentialModP {
    pub fn new(coeffs: Vec<PadicNumber>) -> Self {
        let mut coeffs: Vec<PadicNumber> = coeffs.iter().map(|c| c.residue()).collect();
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        assert!(!coeffs.is_empty(), "differential must be nonzero");
        DifferentialModP { coeffs }
    }

    pub fn from_fp_poly(ctx: &PadicContext, h: &FpPoly) -> Self {
        assert_eq!(ctx.p(), h.p);
        let coeffs = h.coeffs.iter().map(|&c| ctx.from_u64(c).reduce_precision(1)).collect();
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[PadicNumber] {
        &self.coeffs
    }

    pub fn degree(&self) -> u64 {
        self.coeffs.len() as u64 - 1
    }

    /// Prime-field view, when every coefficient already lies in F_p.
    pub fn as_fp_poly(&self) -> Option<FpPoly> {
        let p = self.coeffs[0].context().p();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            if c.coeffs().iter().skip(1).any(|d| !d.is_zero()) {
                return None;
            }
            out.push(u64::try_from(&c.coeffs()[0] % BigUint::from(p)).unwrap());
        }
        Some(FpPoly::new(p, out))
    }
}

/// A geometric point of the reduced curve, with coordinates in F_{p^d}
/// realized inside a degree-d unramified context at precision 1.
#[derive(Clone, Debug)]
pub enum CurvePointBar {
    /// (a, b) with b^2 = f(a), b != 0.
    FiniteNonWeierstrass { a: PadicNumber, b: PadicNumber },
    /// (a, 0) with f(a) = 0.
    Weierstrass { a: PadicNumber },
    Infinity,
}

impl CurvePointBar {
    /// Checks the defining equation against the curve.
    pub fn validate(&self, curve: &HyperellipticCurve) -> bool {
        match self {
            CurvePointBar::Infinity => true,
            CurvePointBar::Weierstrass { a } => eval_fbar(curve, a).is_zero(),
            CurvePointBar::FiniteNonWeierstrass { a, b } => {
                !b.is_zero() && b.mul(b) == eval_fbar(curve, a)
            }
        }
    }
}

/// Evaluate f mod p at a residue-field element (possibly in an extension).
pub fn eval_fbar(curve: &HyperellipticCurve, a: &PadicNumber) -> PadicNumber {
    let ctx = a.context();
    let mut acc = ctx.zero_at(1);
    for c in curve.f_bar().coeffs.iter().rev() {
        acc = acc.mul(a).add(&ctx.from_u64(*c).reduce_precision(1));
    }
    acc
}

/// Evaluate an F_p polynomial at a residue-field element.
pub fn eval_fp_poly(poly: &FpPoly, a: &PadicNumber) -> PadicNumber {
    let ctx = a.context();
    let mut acc = ctx.zero_at(1);
    for c in poly.coeffs.iter().rev() {
        acc = acc.mul(a).add(&ctx.from_u64(*c).reduce_precision(1));
    }
    acc
}

/// Lift a prime-field element into a larger residue context with the same p.
pub(crate) fn embed_residue(x: &PadicNumber, ctx: &PadicContext) -> PadicNumber {
    assert_eq!(x.context().p(), ctx.p());
    assert_eq!(x.context().f(), 1, "only prime-field elements embed canonically");
    ctx.from_biguint(x.coeffs()[0].clone()).reduce_precision(1)
}

/// Multiplicity of (x - a) in h, with a possibly in an extension field:
/// repeated synthetic division while the remainder vanishes.
fn multiplicity_at(h: &DifferentialModP, a: &PadicNumber) -> u64 {
    let ctx = a.context();
    let mut coeffs: Vec<PadicNumber> = h
        .coeffs
        .iter()
        .map(|c| {
            if c.context() == ctx {
                c.clone()
            } else {
                embed_residue(c, ctx)
            }
        })
        .collect();
    let mut mult = 0u64;
    loop {
        if coeffs.len() <= 1 {
            if coeffs.first().is_some_and(|c| c.is_zero()) {
                // Zero polynomial: callers guarantee h != 0.
                unreachable!("multiplicity of the zero polynomial");
            }
            return mult;
        }
        // Synthetic division by (x - a): quotient in place, remainder last.
        let mut q = vec![ctx.zero_at(1); coeffs.len() - 1];
        let mut carry = ctx.zero_at(1);
        for i in (0..coeffs.len()).rev() {
            let cur = coeffs[i].add(&carry);
            if i == 0 {
                if !cur.is_zero() {
                    return mult;
                }
            } else {
                q[i - 1] = cur.clone();
                carry = cur.mul(a);
            }
        }
        mult += 1;
        coeffs = q;
    }
}

/// Order of vanishing of h dx/y at a point of the reduced curve.
///
/// At a finite non-Weierstrass point x - a is a local parameter and dx/y is a
/// unit multiple of d(x-a). At a Weierstrass point y is the parameter and
/// x - a = y^2/unit has order 2. At infinity x = t^-2, y = t^-(2g+1) * unit
/// gives ord(x^j dx/y) = 2g - 2 - 2j.
pub fn ord_at_point(omega: &DifferentialModP, point: &CurvePointBar, g: u64) -> u64 {
    match point {
        CurvePointBar::FiniteNonWeierstrass { a, .. } => multiplicity_at(omega, a),
        CurvePointBar::Weierstrass { a } => 2 * multiplicity_at(omega, a),
        CurvePointBar::Infinity => 2 * g - 2 - 2 * omega.degree(),
    }
}

/// Digit string for an element of Z_q at precision n: most significant first,
/// alphabet 0-9 then 'a' for ten (p <= 11). Extension elements render one
/// digit string per coordinate on the field generator, joined by '|'.
pub fn to_digit_string(x: &PadicNumber) -> String {
    let p = x.context().p();
    assert!(p <= 11, "digit alphabet covers p <= 11");
    let pb = BigUint::from(p);
    let render = |coeff: &BigUint| {
        let mut v = coeff.clone();
        let mut digits = Vec::with_capacity(x.precision());
        for _ in 0..x.precision() {
            let (q, r) = v.div_rem(&pb);
            let d = u64::try_from(r).unwrap();
            digits.push(if d == 10 { 'a' } else { char::from_digit(d as u32, 10).unwrap() });
            v = q;
        }
        digits.iter().rev().collect::<String>()
    };
    x.coeffs().iter().map(render).collect::<Vec<_>>().join("|")
}

/// Parse a digit string back into Z_p at precision = string length.
pub fn from_digit_string(ctx: &PadicContext, s: &str) -> Option<PadicNumber> {
    let p = ctx.p();
    let mut v = BigUint::zero();
    let mut len = 0usize;
    for ch in s.chars() {
        let d = match ch {
            '0'..='9' => ch as u64 - '0' as u64,
            'a' => 10,
            _ => return None,
        };
        if d >= p {
            return None;
        }
        v = v * BigUint::from(p) + BigUint::from(d);
        len += 1;
    }
    if len == 0 || len > ctx.n() {
        return None;
    }
    Some(ctx.from_biguint(v).reduce_precision(len))
}
