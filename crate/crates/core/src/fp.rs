//! Dense univariate polynomials over the prime field F_p, p small.
//!
//! Coefficients are u64 residues. This is support machinery for defining-polynomial
//! checks, Cartier matrices, and mod-p zero accounting; p never exceeds a machine
//! word here and degrees stay in the dozens.

/// x^e mod p by square-and-multiply.
pub fn pow_mod(x: u64, e: u64, p: u64) -> u64 {
    let mut base = x % p;
    let mut acc = 1u64 % p;
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

/// Inverse of a nonzero residue, via Fermat.
pub fn inv_mod(x: u64, p: u64) -> u64 {
    debug_assert!(x % p != 0);
    pow_mod(x, p - 2, p)
}

/// Polynomial over F_p, little-endian coefficients, trailing zeros trimmed.
/// The zero polynomial has an empty coefficient vector.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FpPoly {
    pub p: u64,
    pub coeffs: Vec<u64>,
}

impl FpPoly {
    pub fn new(p: u64, mut coeffs: Vec<u64>) -> Self {
        for c in coeffs.iter_mut() {
            *c %= p;
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        FpPoly { p, coeffs }
    }

    pub fn zero(p: u64) -> Self {
        FpPoly { p, coeffs: vec![] }
    }

    pub fn one(p: u64) -> Self {
        FpPoly::new(p, vec![1])
    }

    pub fn x(p: u64) -> Self {
        FpPoly::new(p, vec![0, 1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// None for the zero polynomial.
    pub fn deg(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn leading(&self) -> u64 {
        *self.coeffs.last().expect("leading coefficient of zero polynomial")
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn add(&self, other: &FpPoly) -> FpPoly {
        let p = self.p;
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0u64; n];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (self.coeff(i) + other.coeff(i)) % p;
        }
        FpPoly::new(p, out)
    }

    pub fn sub(&self, other: &FpPoly) -> FpPoly {
        let p = self.p;
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0u64; n];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (self.coeff(i) + p - other.coeff(i)) % p;
        }
        FpPoly::new(p, out)
    }

    pub fn mul(&self, other: &FpPoly) -> FpPoly {
        if self.is_zero() || other.is_zero() {
            return FpPoly::zero(self.p);
        }
        let p = self.p;
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + a * b) % p;
            }
        }
        FpPoly::new(p, out)
    }

    pub fn scale(&self, c: u64) -> FpPoly {
        let p = self.p;
        FpPoly::new(p, self.coeffs.iter().map(|&a| a * (c % p) % p).collect())
    }

    /// Euclidean division; the divisor's leading coefficient must be nonzero mod p.
    pub fn divrem(&self, divisor: &FpPoly) -> (FpPoly, FpPoly) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let p = self.p;
        let d = divisor.deg().unwrap();
        let lead_inv = inv_mod(divisor.leading(), p);
        let mut rem = self.coeffs.clone();
        if rem.len() <= d {
            return (FpPoly::zero(p), self.clone());
        }
        let mut quot = vec![0u64; rem.len() - d];
        for i in (d..rem.len()).rev() {
            let c = rem[i] % p;
            if c == 0 {
                continue;
            }
            let q = c * lead_inv % p;
            quot[i - d] = q;
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                rem[i - d + j] = (rem[i - d + j] + p - q * dc % p) % p;
            }
        }
        (FpPoly::new(p, quot), FpPoly::new(p, rem))
    }

    pub fn rem(&self, divisor: &FpPoly) -> FpPoly {
        self.divrem(divisor).1
    }

    pub fn divides(&self, other: &FpPoly) -> bool {
        other.divrem(self).1.is_zero()
    }

    pub fn monic(&self) -> FpPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(inv_mod(self.leading(), self.p))
    }

    pub fn gcd(&self, other: &FpPoly) -> FpPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Extended gcd: returns (g, u, v) monic-normalized with u*self + v*other = g.
    pub fn egcd(&self, other: &FpPoly) -> (FpPoly, FpPoly, FpPoly) {
        let p = self.p;
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut u0, mut u1) = (FpPoly::one(p), FpPoly::zero(p));
        let (mut v0, mut v1) = (FpPoly::zero(p), FpPoly::one(p));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            let u = u0.sub(&q.mul(&u1));
            let v = v0.sub(&q.mul(&v1));
            r0 = r1;
            r1 = r;
            u0 = u1;
            u1 = u;
            v0 = v1;
            v1 = v;
        }
        if r0.is_zero() {
            return (r0, u0, v0);
        }
        let c = inv_mod(r0.leading(), p);
        (r0.scale(c), u0.scale(c), v0.scale(c))
    }

    pub fn eval(&self, x: u64) -> u64 {
        let p = self.p;
        let mut acc = 0u64;
        for &c in self.coeffs.iter().rev() {
            acc = (acc * (x % p) + c) % p;
        }
        acc
    }

    pub fn derivative(&self) -> FpPoly {
        let p = self.p;
        if self.coeffs.len() <= 1 {
            return FpPoly::zero(p);
        }
        let out: Vec<u64> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| (i as u64 % p) * c % p)
            .collect();
        FpPoly::new(p, out)
    }

    pub fn pow(&self, e: u64) -> FpPoly {
        let mut acc = FpPoly::one(self.p);
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

    /// self^e modulo m.
    pub fn pow_mod_poly(&self, e: u64, m: &FpPoly) -> FpPoly {
        let mut acc = FpPoly::one(self.p);
        let mut base = self.rem(m);
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(m);
            }
            base = base.mul(&base).rem(m);
            e >>= 1;
        }
        acc
    }

    /// Irreducibility over F_p: x^(p^deg) = x mod self, and gcd(x^(p^d) - x, self) = 1
    /// for every proper divisor d of the degree.
    pub fn is_irreducible(&self) -> bool {
        let p = self.p;
        let d = match self.deg() {
            Some(0) | None => return false,
            Some(1) => return true,
            Some(d) => d,
        };
        let x = FpPoly::x(p);
        // x^(p^k) mod self, iterated k times.
        let frob = |k: usize| -> FpPoly {
            let mut t = x.clone();
            for _ in 0..k {
                t = t.pow_mod_poly(p, self);
            }
            t
        };
        if frob(d).sub(&x).rem(self) != FpPoly::zero(p) {
            return false;
        }
        for e in 1..d {
            if d % e == 0 {
                let g = frob(e).sub(&x).gcd(self);
                if g.deg() != Some(0) {
                    return false;
                }
            }
        }
        true
    }

    /// Full factorization into monic irreducibles with multiplicity, by trial
    /// division over monic polynomials of ascending degree. Fine for the small
    /// p and degrees in scope.
    pub fn factor(&self) -> Vec<(FpPoly, u32)> {
        assert!(!self.is_zero(), "cannot factor the zero polynomial");
        let p = self.p;
        let mut rem = self.monic();
        let mut out: Vec<(FpPoly, u32)> = vec![];
        let mut d = 1usize;
        while rem.deg().unwrap() > 0 {
            if d * 2 > rem.deg().unwrap() {
                out.push((rem.clone(), 1));
                break;
            }
            for cand in monic_polys(p, d) {
                if !cand.is_irreducible() {
                    continue;
                }
                let mut mult = 0u32;
                loop {
                    let (q, r) = rem.divrem(&cand);
                    if r.is_zero() {
                        mult += 1;
                        rem = q;
                    } else {
                        break;
                    }
                }
                if mult > 0 {
                    out.push((cand, mult));
                }
            }
            d += 1;
        }
        out
    }
}

/// All monic polynomials of exact degree d over F_p, in lexicographic
/// coefficient order (deterministic).
pub fn monic_polys(p: u64, d: usize) -> Vec<FpPoly> {
    let total = (p as u128).pow(d as u32);
    let mut out = Vec::with_capacity(total as usize);
    for idx in 0..total {
        let mut coeffs = Vec::with_capacity(d + 1);
        let mut t = idx;
        for _ in 0..d {
            coeffs.push((t % p as u128) as u64);
            t /= p as u128;
        }
        coeffs.push(1);
        out.push(FpPoly { p, coeffs });
    }
    out
}

/// Deterministic primality by trial division; inputs here are machine-word sized.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn egcd_bezout() {
        let p = 7;
        let a = FpPoly::new(p, vec![1, 0, 1, 1]); // x^3 + x^2 + 1
        let b = FpPoly::new(p, vec![3, 1]); // x + 3
        let (g, u, v) = a.egcd(&b);
        let lhs = u.mul(&a).add(&v.mul(&b));
        assert_eq!(lhs, g);
    }

    #[test]
    fn factor_recovers_product() {
        let p = 5;
        let a = FpPoly::new(p, vec![1, 1]); // x + 1
        let b = FpPoly::new(p, vec![2, 0, 1]); // x^2 + 2 (irreducible mod 5: -2 is not a QR)
        let prod = a.pow(3).mul(&b);
        let factors = prod.factor();
        let mut rebuilt = FpPoly::one(p);
        for (q, m) in &factors {
            assert!(q.is_irreducible());
            rebuilt = rebuilt.mul(&q.pow(*m as u64));
        }
        assert_eq!(rebuilt, prod.monic());
        assert_eq!(factors.len(), 2);
    }

    #[test]
    fn irreducibility_matches_root_search_for_quadratics() {
        for p in [3u64, 5, 7, 11] {
            for poly in monic_polys(p, 2) {
                let has_root = (0..p).any(|x| poly.eval(x) == 0);
                assert_eq!(poly.is_irreducible(), !has_root, "p={p} poly={poly:?}");
            }
        }
    }

    #[test]
    fn primality_small() {
        let primes: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]);
    }
}
