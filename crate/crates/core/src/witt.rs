//! Length-2 Witt vectors, p-derivations, and prolongation of polynomial maps.
//!
//! Everything here is exact integer algebra: Witt coordinates are held either
//! as truncated p-adics or as multivariate polynomials over Z, and the division
//! by p inside the p-derivation is performed as an exact division whose failure
//! indicates a bug rather than a rounding choice.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::padic::{PadicContext, PadicError, PadicNumber};

/// The addition carry polynomial C_p(X, Y) = (X^p + Y^p - (X+Y)^p) / p,
/// an integer polynomial by the binomial theorem.
pub fn carry_polynomial(p: u64) -> IntPolynomial {
    let x = IntPolynomial::var(0, 2);
    let y = IntPolynomial::var(1, 2);
    let lhs = x.pow(p as u32).add(&y.pow(p as u32)).sub(&x.add(&y).pow(p as u32));
    lhs.div_exact_int(&BigInt::from(p)).expect("binomial coefficients C(p,k) are divisible by p")
}

/// A length-2 Witt vector (a0, a1) over Z_q.
#[derive(Clone, PartialEq, Eq)]
pub struct WittVector {
    pub a0: PadicNumber,
    pub a1: PadicNumber,
}

impl fmt::Debug for WittVector {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fmt, "W({:?}, {:?})", self.a0, self.a1)
    }
}

impl WittVector {
    pub fn new(a0: PadicNumber, a1: PadicNumber) -> WittVector {
        assert!(a0.context() == a1.context(), "Witt coordinates share a context");
        WittVector { a0, a1 }
    }

    fn ctx(&self) -> &PadicContext {
        self.a0.context()
    }

    /// Ghost coordinates (w0, w1) = (a0, a0^p + p a1).
    pub fn ghost(&self) -> (PadicNumber, PadicNumber) {
        let p = self.ctx().p();
        let w0 = self.a0.clone();
        let w1 = self.a0.pow(p).add(&self.a1.mul_by_p_pow(1).reduce_precision(self.a1.precision()));
        (w0, w1)
    }

    /// Witt sum: (a0 + b0, a1 + b1 + C_p(a0, b0)).
    pub fn add(&self, other: &WittVector) -> WittVector {
        let p = self.ctx().p();
        let carry = carry_polynomial(p).eval_padic(&[self.a0.clone(), other.a0.clone()]);
        WittVector {
            a0: self.a0.add(&other.a0),
            a1: self.a1.add(&other.a1).add(&carry),
        }
    }

    /// Witt product: (a0 b0, a0^p b1 + b0^p a1 + p a1 b1).
    pub fn mul(&self, other: &WittVector) -> WittVector {
        let p = self.ctx().p();
        let t1 = self.a0.pow(p).mul(&other.a1);
        let t2 = other.a0.pow(p).mul(&self.a1);
        let t3 = self.a1.mul(&other.a1);
        let t3 = t3.mul_by_p_pow(1).reduce_precision(t3.precision());
        WittVector {
            a0: self.a0.mul(&other.a0),
            a1: t1.add(&t2).add(&t3),
        }
    }
}

/// The p-derivation delta(x) = (sigma(x) - x^p) / p on Z_q, defined at one
/// precision less than its input.
pub fn p_derivation(x: &PadicNumber) -> Result<PadicNumber, PadicError> {
    let p = x.context().p();
    let num = x.frobenius().sub(&x.pow(p));
    // sigma(x) = x^p mod p, so the division is always exact.
    match num.div_exact_p_pow(1) {
        Ok(v) => Ok(v),
        Err(PadicError::InsufficientPrecision { need, have }) => {
            Err(PadicError::InsufficientPrecision { need, have })
        }
        Err(e) => panic!("p-derivation numerator not divisible by p: {e}"),
    }
}

/// The lift of Frobenius phi(x) = x^p + p delta(x) = sigma(x), recomposed from
/// the p-derivation rather than read off sigma, so tests can compare the two.
pub fn frobenius_from_derivation(x: &PadicNumber) -> Result<PadicNumber, PadicError> {
    let p = x.context().p();
    let d = p_derivation(x)?;
    Ok(x.pow(p).reduce_precision(d.precision()).add(&d.mul_by_p_pow(1)))
}

/// Multivariate polynomial over Z in a fixed number of variables, used for
/// prolongation arithmetic where divisions by p must be watched exactly.
#[derive(Clone, PartialEq, Eq)]
pub struct IntPolynomial {
    pub nvars: usize,
    /// exponent vector (length nvars) -> nonzero coefficient.
    pub terms: BTreeMap<Vec<u32>, BigInt>,
}

impl fmt::Debug for IntPolynomial {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(fmt, "0");
        }
        let mut first = true;
        for (exp, c) in &self.terms {
            if !first {
                write!(fmt, " + ")?;
            }
            first = false;
            write!(fmt, "{c}")?;
            for (i, &e) in exp.iter().enumerate() {
                if e > 0 {
                    write!(fmt, "*x{i}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

impl IntPolynomial {
    pub fn zero(nvars: usize) -> IntPolynomial {
        IntPolynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: BigInt) -> IntPolynomial {
        let mut out = Self::zero(nvars);
        if !c.is_zero() {
            out.terms.insert(vec![0; nvars], c);
        }
        out
    }

    pub fn var(i: usize, nvars: usize) -> IntPolynomial {
        assert!(i < nvars);
        let mut exp = vec![0u32; nvars];
        exp[i] = 1;
        let mut out = Self::zero(nvars);
        out.terms.insert(exp, BigInt::one());
        out
    }

    pub fn monomial(nvars: usize, exp: Vec<u32>, c: BigInt) -> IntPolynomial {
        assert_eq!(exp.len(), nvars);
        let mut out = Self::zero(nvars);
        if !c.is_zero() {
            out.terms.insert(exp, c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(&mut self, exp: Vec<u32>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &IntPolynomial) -> IntPolynomial {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (exp, c) in &other.terms {
            out.insert(exp.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> IntPolynomial {
        IntPolynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &IntPolynomial) -> IntPolynomial {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &IntPolynomial) -> IntPolynomial {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exp: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.insert(exp, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigInt) -> IntPolynomial {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        IntPolynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> IntPolynomial {
        let mut acc = Self::constant(self.nvars, BigInt::one());
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

    /// Exact division by an integer; None if any coefficient is not divisible.
    pub fn div_exact_int(&self, d: &BigInt) -> Option<IntPolynomial> {
        assert!(!d.is_zero());
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let (q, r) = c.div_rem(d);
            if !r.is_zero() {
                return None;
            }
            terms.insert(e.clone(), q);
        }
        Some(IntPolynomial { nvars: self.nvars, terms })
    }

    /// Substitute polynomials (in a possibly different variable set) for the variables.
    pub fn compose(&self, images: &[IntPolynomial]) -> IntPolynomial {
        assert_eq!(images.len(), self.nvars);
        let out_vars = images.first().map_or(0, |q| q.nvars);
        for q in images {
            assert_eq!(q.nvars, out_vars);
        }
        let mut out = IntPolynomial::zero(out_vars);
        for (exp, c) in &self.terms {
            let mut term = IntPolynomial::constant(out_vars, c.clone());
            for (i, &e) in exp.iter().enumerate() {
                if e > 0 {
                    term = term.mul(&images[i].pow(e));
                }
            }
            out = out.add(&term);
        }
        out
    }

    pub fn eval_bigint(&self, point: &[BigInt]) -> BigInt {
        assert_eq!(point.len(), self.nvars);
        let mut acc = BigInt::zero();
        for (exp, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in exp.iter().enumerate() {
                for _ in 0..e {
                    t *= &point[i];
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_padic(&self, point: &[PadicNumber]) -> PadicNumber {
        assert_eq!(point.len(), self.nvars);
        assert!(!point.is_empty());
        let ctx = point[0].context().clone();
        let prec = point.iter().map(|x| x.precision()).min().unwrap();
        let mut acc = ctx.zero_at(prec);
        for (exp, c) in &self.terms {
            let mut t = ctx.from_bigint(c).reduce_precision(prec);
            for (i, &e) in exp.iter().enumerate() {
                if e > 0 {
                    t = t.mul(&point[i].pow(e as u64));
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    /// Total degree; None for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Coefficient-wise reduction modulo m (into [0, m)).
    pub fn reduce_mod(&self, m: &BigInt) -> IntPolynomial {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            out.insert(e.clone(), c.mod_floor(m));
        }
        out
    }
}

/// The first prolongation of f in variables x_1..x_n: the unique polynomial
/// delta f in (x, x') with f(x^p + p x') = f(x)^p + p (delta f)(x, x').
///
/// Variables are doubled: the output lives in 2n variables, the first n being
/// x and the last n the jet coordinates x'.
pub fn prolong(f: &IntPolynomial, p: u64) -> IntPolynomial {
    let n = f.nvars;
    let images: Vec<IntPolynomial> = (0..n)
        .map(|i| {
            let x = IntPolynomial::var(i, 2 * n);
            let xp = IntPolynomial::var(n + i, 2 * n);
            x.pow(p as u32).add(&xp.scale(&BigInt::from(p)))
        })
        .collect();
    let widened = f.compose(&(0..n).map(|i| IntPolynomial::var(i, 2 * n)).collect::<Vec<_>>());
    let num = f.compose(&images).sub(&widened.pow(p as u32));
    num.div_exact_int(&BigInt::from(p))
        .expect("f(x^p + p x') - f(x)^p is divisible by p")
}

/// Apply the jet map nabla to an integer point: (x mod p, delta(x) mod p),
/// with delta computed on the Witt side. Returns the pair of residues.
pub fn nabla_residues(point: &[BigInt], p: u64) -> (Vec<BigInt>, Vec<BigInt>) {
    let pb = BigInt::from(p);
    let p2 = &pb * &pb;
    let mut r0 = Vec::with_capacity(point.len());
    let mut r1 = Vec::with_capacity(point.len());
    for x in point {
        r0.push(x.mod_floor(&pb));
        // delta(x) = (x - x^p)/p for x in Z (sigma is the identity on Z_p).
        let num = (x - x.modpow(&pb, &p2)).mod_floor(&p2);
        let d = &num / &pb;
        r1.push(d.mod_floor(&pb));
    }
    (r0, r1)
}
