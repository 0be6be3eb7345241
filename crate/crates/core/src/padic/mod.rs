//! Arithmetic in unramified extensions Z_q, q = p^f, truncated at absolute
//! precision p^N.
//!
//! Elements are polynomials of degree < f over Z/p^N in a fixed root of the
//! stored defining polynomial. Precision is explicit: a number carries its own
//! absolute precision N' <= N, mixed-precision operations take the minimum, and
//! division by p is a separate operation that lowers precision rather than a
//! hidden rescale.

mod conway;

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::fp::{self, FpPoly};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PadicError {
    #[error("p = {0} is not prime")]
    NotPrime(u64),
    #[error("no defining polynomial stored for p = {p}, residue degree {f}")]
    UnsupportedField { p: u64, f: usize },
    #[error("defining polynomial is not irreducible modulo p")]
    ReduciblePolynomial,
    #[error("defining polynomial must be monic of degree f")]
    BadDefiningPolynomial,
    #[error("precision must be at least 1")]
    ZeroPrecision,
    #[error("cannot invert an element of positive valuation")]
    NonUnit,
    #[error("insufficient precision: need {need} digits, have {have}")]
    InsufficientPrecision { need: usize, have: usize },
    #[error("division by p^{0} is not exact")]
    DivisionNotExact(usize),
}

struct ContextInner {
    p: u64,
    f: usize,
    n: usize,
    p_big: BigUint,
    /// p^0 .. p^n.
    pow: Vec<BigUint>,
    /// Monic, length f+1, coefficients reduced mod p^n.
    defining: Vec<BigUint>,
    /// Image of the defining root under the Frobenius lift, as an f x f matrix
    /// acting on coefficient vectors; computed on first use. sigma[k] is the
    /// coefficient vector of sigma(root^k).
    sigma: OnceLock<Vec<Vec<BigUint>>>,
    sigma_inv: OnceLock<Vec<Vec<BigUint>>>,
}

/// Shared handle to a fixed (p, f, N). Cheap to clone.
#[derive(Clone)]
pub struct PadicContext(Arc<ContextInner>);

impl fmt::Debug for PadicContext {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fmt, "PadicContext(p={}, f={}, N={})", self.p(), self.f(), self.n())
    }
}

impl PartialEq for PadicContext {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.p() == other.p() && self.f() == other.f() && self.n() == other.n()
                && self.0.defining == other.0.defining)
    }
}
impl Eq for PadicContext {}

impl PadicContext {
    /// Context with the stored defining polynomial. f = 1 accepts any prime;
    /// f in 2..=4 requires p <= 11 (the table range).
    pub fn new(p: u64, f: usize, n: usize) -> Result<PadicContext, PadicError> {
        if !fp::is_prime(p) {
            return Err(PadicError::NotPrime(p));
        }
        if f == 1 {
            let defining = conway::defining_poly(p, 1).unwrap_or_else(|| vec![0, 1]);
            return Self::build(p, f, n, defining);
        }
        let defining =
            conway::defining_poly(p, f).ok_or(PadicError::UnsupportedField { p, f })?;
        Self::build(p, f, n, defining)
    }

    /// Context with a caller-supplied monic defining polynomial (low-to-high,
    /// length f+1), verified irreducible mod p.
    pub fn with_defining_poly(
        p: u64,
        f: usize,
        n: usize,
        defining: Vec<u64>,
    ) -> Result<PadicContext, PadicError> {
        if !fp::is_prime(p) {
            return Err(PadicError::NotPrime(p));
        }
        Self::build(p, f, n, defining)
    }

    fn build(p: u64, f: usize, n: usize, defining: Vec<u64>) -> Result<PadicContext, PadicError> {
        if n == 0 {
            return Err(PadicError::ZeroPrecision);
        }
        if f == 0 || defining.len() != f + 1 || defining[f] % p != 1 {
            return Err(PadicError::BadDefiningPolynomial);
        }
        if f > 1 {
            let fpoly = FpPoly::new(p, defining.clone());
            if fpoly.deg() != Some(f) {
                return Err(PadicError::BadDefiningPolynomial);
            }
            if !fpoly.is_irreducible() {
                return Err(PadicError::ReduciblePolynomial);
            }
        }
        let p_big = BigUint::from(p);
        let mut pow = Vec::with_capacity(n + 1);
        pow.push(BigUint::one());
        for i in 1..=n {
            let next = &pow[i - 1] * &p_big;
            pow.push(next);
        }
        let modulus = pow[n].clone();
        let defining: Vec<BigUint> =
            defining.into_iter().map(|c| BigUint::from(c) % &modulus).collect();
        Ok(PadicContext(Arc::new(ContextInner {
            p,
            f,
            n,
            p_big,
            pow,
            defining,
            sigma: OnceLock::new(),
            sigma_inv: OnceLock::new(),
        })))
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    pub fn f(&self) -> usize {
        self.0.f
    }

    /// Maximum absolute precision of the context.
    pub fn n(&self) -> usize {
        self.0.n
    }

    /// Residue field size q = p^f.
    pub fn q(&self) -> u64 {
        self.0.p.pow(self.0.f as u32)
    }

    pub fn p_pow(&self, k: usize) -> &BigUint {
        &self.0.pow[k]
    }

    pub fn defining_poly(&self) -> &[BigUint] {
        &self.0.defining
    }

    pub fn zero(&self) -> PadicNumber {
        self.zero_at(self.0.n)
    }

    pub fn zero_at(&self, prec: usize) -> PadicNumber {
        assert!(prec >= 1 && prec <= self.0.n);
        PadicNumber {
            ctx: self.clone(),
            prec,
            coeffs: vec![BigUint::zero(); self.0.f],
        }
    }

    pub fn one(&self) -> PadicNumber {
        self.from_u64(1)
    }

    pub fn from_u64(&self, v: u64) -> PadicNumber {
        self.from_biguint(BigUint::from(v))
    }

    pub fn from_biguint(&self, v: BigUint) -> PadicNumber {
        let mut out = self.zero();
        out.coeffs[0] = v % self.p_pow(out.prec);
        out
    }

    pub fn from_i64(&self, v: i64) -> PadicNumber {
        if v >= 0 {
            self.from_u64(v as u64)
        } else {
            self.from_u64(v.unsigned_abs()).neg()
        }
    }

    pub fn from_bigint(&self, v: &num_bigint::BigInt) -> PadicNumber {
        use num_bigint::Sign;
        let mag = self.from_biguint(v.magnitude().clone());
        if v.sign() == Sign::Minus {
            mag.neg()
        } else {
            mag
        }
    }

    /// Element from coefficient digits (low-to-high in the root), at precision prec.
    pub fn from_coeffs(&self, coeffs: Vec<BigUint>, prec: usize) -> PadicNumber {
        assert!(coeffs.len() <= self.0.f);
        assert!(prec >= 1 && prec <= self.0.n);
        let mut c = coeffs;
        c.resize(self.0.f, BigUint::zero());
        let m = self.p_pow(prec);
        for v in c.iter_mut() {
            *v = &*v % m;
        }
        PadicNumber { ctx: self.clone(), prec, coeffs: c }
    }

    /// The image of the defining root, x^k |-> sigma(root)^k coefficient matrix.
    fn sigma_matrix(&self) -> &Vec<Vec<BigUint>> {
        self.0.sigma.get_or_init(|| {
            let f = self.0.f;
            if f == 1 {
                return vec![vec![BigUint::one()]];
            }
            // Newton-lift the root of the defining polynomial congruent to root^p.
            let root = self.from_coeffs(vec![BigUint::zero(), BigUint::one()], self.0.n);
            let mut s = root.pow(self.0.p as u64);
            // defining'(s) is a unit because the reduction is separable.
            for _ in 0..=self.0.n {
                let val = self.eval_defining(&s);
                if val.is_zero() {
                    break;
                }
                let der = self.eval_defining_derivative(&s);
                let corr = val.mul(&der.invert().expect("separable defining polynomial"));
                s = s.sub(&corr);
            }
            assert!(self.eval_defining(&s).is_zero(), "Frobenius root lift did not converge");
            let mut cols = Vec::with_capacity(f);
            let mut acc = self.one();
            for _ in 0..f {
                cols.push(acc.coeffs.clone());
                acc = acc.mul(&s);
            }
            cols
        })
    }

    fn sigma_inv_matrix(&self) -> &Vec<Vec<BigUint>> {
        self.0.sigma_inv.get_or_init(|| {
            // sigma has order f; the inverse is sigma^(f-1).
            let f = self.0.f;
            let mut cols: Vec<Vec<BigUint>> = (0..f)
                .map(|k| {
                    let mut e = vec![BigUint::zero(); f];
                    e[k] = BigUint::one();
                    e
                })
                .collect();
            for _ in 0..f - 1 {
                cols = cols
                    .into_iter()
                    .map(|c| self.apply_matrix(self.sigma_matrix(), &c, self.0.n))
                    .collect();
            }
            cols
        })
    }

    fn apply_matrix(&self, cols: &[Vec<BigUint>], v: &[BigUint], prec: usize) -> Vec<BigUint> {
        let f = self.0.f;
        let m = self.p_pow(prec);
        let mut out = vec![BigUint::zero(); f];
        for (k, col) in cols.iter().enumerate() {
            if v[k].is_zero() {
                continue;
            }
            for (i, entry) in col.iter().enumerate() {
                out[i] = (&out[i] + entry * &v[k]) % m;
            }
        }
        out
    }

    fn eval_defining(&self, x: &PadicNumber) -> PadicNumber {
        let mut acc = self.zero_at(x.prec);
        for c in self.0.defining.iter().rev() {
            acc = acc.mul(x).add(&self.from_biguint(c.clone()).reduce_precision(x.prec));
        }
        acc
    }

    fn eval_defining_derivative(&self, x: &PadicNumber) -> PadicNumber {
        let mut acc = self.zero_at(x.prec);
        for (i, c) in self.0.defining.iter().enumerate().rev() {
            if i == 0 {
                continue;
            }
            let term = self.from_biguint(c.clone() * BigUint::from(i)).reduce_precision(x.prec);
            acc = acc.mul(x).add(&term);
        }
        acc
    }

    /// Teichmueller lift of the residue of t: the unique root of unity (or zero)
    /// congruent to t mod p, computed by iterating x -> x^q to its fixed point.
    pub fn teichmuller(&self, t: &PadicNumber) -> PadicNumber {
        assert!(t.ctx == *self, "context mismatch");
        let q = self.q();
        let mut w = t.reduce_precision(1).lift_to(self.0.n);
        for _ in 0..=self.0.n + 1 {
            let next = w.pow(q);
            if next == w {
                return w;
            }
            w = next;
        }
        panic!("Teichmueller iteration did not stabilize");
    }
}

/// Element of Z_q known modulo p^prec.
#[derive(Clone)]
pub struct PadicNumber {
    ctx: PadicContext,
    prec: usize,
    /// Length f, entries in [0, p^prec).
    coeffs: Vec<BigUint>,
}

/// Valuation of a truncated element: exact if a nonzero digit appears below
/// the precision, otherwise only the lower bound prec is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valuation {
    Finite(u64),
    /// Indistinguishable from zero at the element's precision.
    AtPrecisionZero,
}

impl Valuation {
    pub fn finite(self) -> Option<u64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::AtPrecisionZero => None,
        }
    }
}

fn val_of_biguint(v: &BigUint, p: &BigUint, cap: usize) -> usize {
    if v.is_zero() {
        return cap;
    }
    let mut v = v.clone();
    let mut out = 0usize;
    while out < cap {
        let (q, r) = v.div_rem(p);
        if !r.is_zero() {
            break;
        }
        v = q;
        out += 1;
    }
    out
}

impl PadicNumber {
    pub fn context(&self) -> &PadicContext {
        &self.ctx
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    /// True when every digit below the precision vanishes.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn valuation(&self) -> Valuation {
        let v = self
            .coeffs
            .iter()
            .map(|c| val_of_biguint(c, &self.ctx.0.p_big, self.prec))
            .min()
            .unwrap();
        if v >= self.prec {
            Valuation::AtPrecisionZero
        } else {
            Valuation::Finite(v as u64)
        }
    }

    fn assert_same_ctx(&self, other: &PadicNumber) {
        assert!(self.ctx == other.ctx, "p-adic context mismatch");
    }

    /// Lower the absolute precision to prec.
    pub fn reduce_precision(&self, prec: usize) -> PadicNumber {
        assert!(prec >= 1 && prec <= self.prec, "reduce_precision must not raise precision");
        if prec == self.prec {
            return self.clone();
        }
        let m = self.ctx.p_pow(prec);
        PadicNumber {
            ctx: self.ctx.clone(),
            prec,
            coeffs: self.coeffs.iter().map(|c| c % m).collect(),
        }
    }

    /// Reinterpret the stored representative at a higher claimed precision.
    /// Only correct for values known exactly (lifts of residues, integers);
    /// kept crate-private so ordinary code cannot manufacture precision.
    pub(crate) fn lift_to(&self, prec: usize) -> PadicNumber {
        assert!(prec >= self.prec && prec <= self.ctx.0.n);
        PadicNumber { ctx: self.ctx.clone(), prec, coeffs: self.coeffs.clone() }
    }

    pub fn add(&self, other: &PadicNumber) -> PadicNumber {
        self.assert_same_ctx(other);
        let prec = self.prec.min(other.prec);
        let m = self.ctx.p_pow(prec);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a + b) % m)
            .collect();
        PadicNumber { ctx: self.ctx.clone(), prec, coeffs }
    }

    pub fn neg(&self) -> PadicNumber {
        let m = self.ctx.p_pow(self.prec);
        let coeffs = self
            .coeffs
            .iter()
            .map(|a| if a.is_zero() { BigUint::zero() } else { m - a })
            .collect();
        PadicNumber { ctx: self.ctx.clone(), prec: self.prec, coeffs }
    }

    pub fn sub(&self, other: &PadicNumber) -> PadicNumber {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &PadicNumber) -> PadicNumber {
        self.assert_same_ctx(other);
        let prec = self.prec.min(other.prec);
        let f = self.ctx.0.f;
        let m = self.ctx.p_pow(prec);
        if f == 1 {
            let c = (&self.coeffs[0] * &other.coeffs[0]) % m;
            return PadicNumber { ctx: self.ctx.clone(), prec, coeffs: vec![c] };
        }
        let mut wide = vec![BigUint::zero(); 2 * f - 1];
        for i in 0..f {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..f {
                if other.coeffs[j].is_zero() {
                    continue;
                }
                wide[i + j] = (&wide[i + j] + &self.coeffs[i] * &other.coeffs[j]) % m;
            }
        }
        // Reduce modulo the monic defining polynomial.
        let def = &self.ctx.0.defining;
        for i in (f..wide.len()).rev() {
            if wide[i].is_zero() {
                continue;
            }
            let c = wide[i].clone();
            wide[i] = BigUint::zero();
            for k in 0..f {
                if def[k].is_zero() {
                    continue;
                }
                let sub = (&c * &def[k]) % m;
                let cur = &wide[i - f + k] % m;
                wide[i - f + k] = if cur >= sub { cur - sub } else { cur + m - sub };
            }
        }
        wide.truncate(f);
        PadicNumber { ctx: self.ctx.clone(), prec, coeffs: wide }
    }

    pub fn pow(&self, e: u64) -> PadicNumber {
        let mut acc = self.ctx.one().reduce_precision(self.prec);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse of a unit, by Newton lifting the residue-field inverse.
    pub fn invert(&self) -> Result<PadicNumber, PadicError> {
        match self.valuation() {
            Valuation::Finite(0) => {}
            _ => return Err(PadicError::NonUnit),
        }
        let ctx = &self.ctx;
        let p = ctx.p();
        // Residue-field inverse via extended Euclid on polynomials over F_p.
        let a_bar = FpPoly::new(
            p,
            self.coeffs.iter().map(|c| (c % &ctx.0.p_big).try_into().unwrap_or(0u64)).collect(),
        );
        let z0 = if ctx.f() == 1 {
            ctx.from_u64(fp::inv_mod(a_bar.coeff(0), p)).reduce_precision(self.prec)
        } else {
            let def_bar = FpPoly::new(
                p,
                ctx.0.defining.iter().map(|c| (c % &ctx.0.p_big).try_into().unwrap_or(0u64)).collect(),
            );
            let (g, _, v) = def_bar.egcd(&a_bar);
            assert_eq!(g.deg(), Some(0), "unit has invertible residue");
            let mut coeffs = vec![BigUint::zero(); ctx.f()];
            for (i, c) in v.coeffs.iter().enumerate() {
                if i < ctx.f() {
                    coeffs[i] = BigUint::from(*c);
                }
            }
            ctx.from_coeffs(coeffs, 1).lift_to(self.prec)
        };
        // z -> z(2 - x z) doubles the number of correct digits.
        let two = ctx.from_u64(2).reduce_precision(self.prec);
        let mut z = z0;
        let mut correct = 1usize;
        while correct < self.prec {
            z = z.mul(&two.sub(&self.mul(&z)));
            correct *= 2;
        }
        debug_assert!(self.mul(&z).is_one());
        Ok(z)
    }

    pub fn is_one(&self) -> bool {
        *self == self.ctx.one().reduce_precision(self.prec)
    }

    /// Multiply by p^k; the claimed precision rises by k, capped at the context N.
    pub fn mul_by_p_pow(&self, k: usize) -> PadicNumber {
        let prec = (self.prec + k).min(self.ctx.0.n);
        if k >= prec {
            return self.ctx.zero_at(prec);
        }
        let m = self.ctx.p_pow(prec);
        let scale = self.ctx.p_pow(k);
        let coeffs = self.coeffs.iter().map(|c| (c * scale) % m).collect();
        PadicNumber { ctx: self.ctx.clone(), prec, coeffs }
    }

    /// Exact division by p^k. Errors if any digit below k is nonzero, or if no
    /// precision would remain. The result's precision drops by k.
    pub fn div_exact_p_pow(&self, k: usize) -> Result<PadicNumber, PadicError> {
        if k == 0 {
            return Ok(self.clone());
        }
        if self.prec <= k {
            return Err(PadicError::InsufficientPrecision { need: k + 1, have: self.prec });
        }
        let scale = self.ctx.p_pow(k);
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let (q, r) = c.div_rem(scale);
            if !r.is_zero() {
                return Err(PadicError::DivisionNotExact(k));
            }
            coeffs.push(q);
        }
        Ok(PadicNumber { ctx: self.ctx.clone(), prec: self.prec - k, coeffs })
    }

    /// The residue-field image (precision 1).
    pub fn residue(&self) -> PadicNumber {
        self.reduce_precision(1)
    }

    /// Arithmetic Frobenius sigma, the unique automorphism with
    /// sigma(x) = x^p mod p. Identity when f = 1.
    pub fn frobenius(&self) -> PadicNumber {
        if self.ctx.f() == 1 {
            return self.clone();
        }
        let cols = self.ctx.sigma_matrix();
        let coeffs = self.ctx.apply_matrix(cols, &self.coeffs, self.prec);
        PadicNumber { ctx: self.ctx.clone(), prec: self.prec, coeffs }
    }

    pub fn frobenius_inv(&self) -> PadicNumber {
        if self.ctx.f() == 1 {
            return self.clone();
        }
        let cols = self.ctx.sigma_inv_matrix();
        let coeffs = self.ctx.apply_matrix(cols, &self.coeffs, self.prec);
        PadicNumber { ctx: self.ctx.clone(), prec: self.prec, coeffs }
    }

    /// sigma^k for any integer k (negative k through the inverse).
    pub fn frobenius_pow(&self, k: i64) -> PadicNumber {
        let f = self.ctx.f() as i64;
        let k = k.rem_euclid(f);
        let mut out = self.clone();
        for _ in 0..k {
            out = out.frobenius();
        }
        out
    }
}

impl PartialEq for PadicNumber {
    fn eq(&self, other: &Self) -> bool {
        self.ctx == other.ctx && self.prec == other.prec && self.coeffs == other.coeffs
    }
}
impl Eq for PadicNumber {}

impl fmt::Debug for PadicNumber {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fmt, "[")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(fmt, ", ")?;
            }
            write!(fmt, "{c}")?;
        }
        write!(fmt, "] mod {}^{}", self.ctx.p(), self.prec)
    }
}

/// Known or lower-bounded valuation of a scaled element of Q_q.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScaledValuation {
    Known(i64),
    AtLeast(i64),
}

impl ScaledValuation {
    pub fn known(self) -> Option<i64> {
        match self {
            ScaledValuation::Known(v) => Some(v),
            ScaledValuation::AtLeast(_) => None,
        }
    }
}

/// Element of Q_q represented as p^shift * unit: unramified numbers with
/// possibly negative valuation and explicit absolute precision shift + prec(unit).
#[derive(Clone, PartialEq, Eq)]
pub struct ScaledPadic {
    pub shift: i64,
    pub unit: PadicNumber,
}

impl fmt::Debug for ScaledPadic {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fmt, "p^{} * {:?}", self.shift, self.unit)
    }
}

impl ScaledPadic {
    pub fn from_padic(x: PadicNumber) -> ScaledPadic {
        ScaledPadic { shift: 0, unit: x }
    }

    pub fn zero(ctx: &PadicContext) -> ScaledPadic {
        ScaledPadic { shift: 0, unit: ctx.zero() }
    }

    pub fn context(&self) -> &PadicContext {
        self.unit.context()
    }

    /// Absolute precision: the value is known modulo p^(this).
    pub fn abs_precision(&self) -> i64 {
        self.shift + self.unit.precision() as i64
    }

    pub fn valuation(&self) -> ScaledValuation {
        match self.unit.valuation() {
            Valuation::Finite(v) => ScaledValuation::Known(self.shift + v as i64),
            Valuation::AtPrecisionZero => ScaledValuation::AtLeast(self.abs_precision()),
        }
    }

    pub fn is_zero_at_precision(&self) -> bool {
        self.unit.is_zero()
    }

    /// Rewrite with the given (lower) shift, multiplying the unit by the
    /// difference. The absolute precision is unchanged up to the context cap.
    fn align_down(&self, shift: i64) -> ScaledPadic {
        assert!(shift <= self.shift);
        let k = (self.shift - shift) as usize;
        ScaledPadic { shift, unit: self.unit.mul_by_p_pow(k) }
    }

    pub fn add(&self, other: &ScaledPadic) -> ScaledPadic {
        let shift = self.shift.min(other.shift);
        let a = self.align_down(shift);
        let b = other.align_down(shift);
        ScaledPadic { shift, unit: a.unit.add(&b.unit) }
    }

    pub fn neg(&self) -> ScaledPadic {
        ScaledPadic { shift: self.shift, unit: self.unit.neg() }
    }

    pub fn sub(&self, other: &ScaledPadic) -> ScaledPadic {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &ScaledPadic) -> ScaledPadic {
        ScaledPadic { shift: self.shift + other.shift, unit: self.unit.mul(&other.unit) }
    }

    pub fn mul_padic(&self, other: &PadicNumber) -> ScaledPadic {
        ScaledPadic { shift: self.shift, unit: self.unit.mul(other) }
    }

    /// Division by p^k: a pure shift, no digits are touched.
    pub fn div_p_pow(&self, k: i64) -> ScaledPadic {
        ScaledPadic { shift: self.shift - k, unit: self.unit.clone() }
    }

    pub fn mul_p_pow(&self, k: i64) -> ScaledPadic {
        ScaledPadic { shift: self.shift + k, unit: self.unit.clone() }
    }

    /// Divide by an arbitrary nonzero scalar m = p^v * (unit part).
    pub fn div_u64(&self, m: u64) -> ScaledPadic {
        let p = self.context().p();
        let mut v = 0i64;
        let mut m = m;
        while m % p == 0 {
            m /= p;
            v += 1;
        }
        let inv = self
            .context()
            .from_u64(m)
            .reduce_precision(self.unit.precision())
            .invert()
            .expect("unit part");
        ScaledPadic { shift: self.shift - v, unit: self.unit.mul(&inv) }
    }

    pub fn frobenius_pow(&self, k: i64) -> ScaledPadic {
        ScaledPadic { shift: self.shift, unit: self.unit.frobenius_pow(k) }
    }

    /// If the value is p-integral as far as can be seen, return it as a plain
    /// number (precision = absolute precision, capped by the context).
    pub fn to_padic(&self) -> Result<PadicNumber, PadicError> {
        if self.shift >= 0 {
            let out = self.unit.mul_by_p_pow(self.shift as usize);
            return Ok(out);
        }
        let k = (-self.shift) as usize;
        self.unit.div_exact_p_pow(k)
    }
}
