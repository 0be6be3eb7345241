//! Candidate slopes and integral valuations from the (n, k) sequences.
//!
//! The Newton polygon of the integral has its vertices among the points
//! (k_i p^(n_i), -i); everything here is derived from the lower convex hull
//! of those points. Queries are answered only when the relevant part of the
//! hull is certified stable: entries beyond the computed depth can only
//! appear at abscissa >= p^(n_last + d) with height -(last + d), and the
//! bracketing logic checks explicitly that no such point can disturb the
//! vertex or segment it used.

use super::{ColemanError, ColemanSequence, K0Convention};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn rat_inv(d: u64) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(d))
}

/// The decomposition 1/lambda = k p^b - l p^a with a < b and k, l <= 2g-1.
///
/// The cap is the Riemann-Roch bound on the k-sequence; since p >= 2g it
/// keeps k and l below p, which is what makes the l >= 1 representation
/// unique: a is the p-adic valuation of 1/lambda, l is determined mod p, and
/// k p^(b-a) is what remains. The vertex shape l = 0 (1/lambda = k p^b) is
/// returned only when no l >= 1 representation exists; for p <= 4g-2 both
/// shapes can represent the same value and the l >= 1 one is taken as
/// canonical.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlopeForm {
    pub k: u64,
    pub ell: u64,
    pub b: u64,
    pub a: u64,
}

fn u64_valuation(mut v: u64, p: u64) -> u64 {
    let mut out = 0;
    while v % p == 0 {
        v /= p;
        out += 1;
    }
    out
}

impl SlopeForm {
    /// The slope this form represents.
    pub fn lambda(&self, p: u64) -> BigRational {
        let d = BigInt::from(p).pow(u32::try_from(self.b).unwrap()) * BigInt::from(self.k)
            - BigInt::from(p).pow(u32::try_from(self.a).unwrap()) * BigInt::from(self.ell);
        BigRational::new(BigInt::one(), d)
    }

    /// Decompose lambda, if it has the admissible shape for genus g.
    pub fn of(lambda: &BigRational, p: u64, g: u64) -> Option<SlopeForm> {
        if lambda.numer() != &BigInt::one() {
            return None;
        }
        let d = u64::try_from(lambda.denom()).ok()?;
        if d < 2 {
            return None;
        }
        let cap = 2 * g - 1;
        let a = u64_valuation(d, p);
        let d1 = d / p.pow(u32::try_from(a).unwrap());
        // General shape: l is the negative of d1 mod p.
        let ell = (p - d1 % p) % p;
        if ell >= 1 && ell <= cap {
            let e = d1 + ell;
            let ba = u64_valuation(e, p);
            let k = e / p.pow(u32::try_from(ba).unwrap());
            if ba >= 1 && k <= cap {
                let form = SlopeForm { k, ell, b: a + ba, a };
                debug_assert_eq!(form.lambda(p), rat_inv(d));
                return Some(form);
            }
        }
        // Vertex shape k p^b with no subtraction.
        if d1 <= cap && a >= 1 {
            return Some(SlopeForm { k: d1, ell: 0, b: a, a: 0 });
        }
        None
    }
}

/// The catalogue 1/(k_{i+1} p^(n_{i+1}) - k_i p^(n_i)) of slope candidates
/// between consecutive entries, restricted to (0, 1/(2g-2)), deduplicated,
/// in decreasing order. One entry of the sequence yields no candidates.
pub fn candidate_slopes(seq: &ColemanSequence) -> Vec<BigRational> {
    let threshold = rat_inv(2 * seq.genus() - 2);
    let a = seq.abscissas();
    let mut out: Vec<BigRational> = Vec::new();
    for w in a.windows(2) {
        if w[1] > w[0] {
            let s = rat_inv(w[1] - w[0]);
            if s < threshold && !out.contains(&s) {
                out.push(s);
            }
        }
    }
    out.sort();
    out.reverse();
    out
}

/// Where a prescribed slope lambda sits relative to the polygon.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IntegralValuation {
    /// lambda is a slope of a certified segment, endpoints by sequence index:
    /// the integral has roots of valuation exactly lambda, and val F(z) is
    /// not determined by lambda alone.
    IsASlope { left: usize, right: usize },
    /// The polygon brackets lambda at vertex i: val F(z) = lambda k_i p^(n_i) - i
    /// for every z in the disc with val T(z) = lambda.
    Exact { value: BigRational, vertex: usize },
}

/// Valuation of the integral at any point of the disc with val T(z) = lambda.
///
/// Requires 0 < lambda < 1/(2g-2): below that threshold the polygon over the
/// computed vertices is the true one (coefficients before the first abscissa
/// all have positive valuation and steeper slopes). Errors with
/// RangeNotCertified when the computed depth cannot pin the bracket down.
pub fn integral_valuation(
    seq: &ColemanSequence,
    lambda: &BigRational,
) -> Result<IntegralValuation, ColemanError> {
    let threshold = rat_inv(2 * seq.genus() - 2);
    if *lambda <= BigRational::zero() || *lambda >= threshold {
        return Err(ColemanError::LambdaOutOfRange(format!(
            "need 0 < lambda < {threshold}, got {lambda}"
        )));
    }
    bracket_on_hull(seq, lambda, false)
}

struct HullPoint {
    x: i128,
    y: i128,
    idx: usize,
}

fn cross(o: &HullPoint, a: &HullPoint, b: &HullPoint) -> i128 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn hull_slope(a: &HullPoint, b: &HullPoint) -> BigRational {
    // Positive drop-per-run of a descending segment.
    BigRational::new(BigInt::from(a.y - b.y), BigInt::from(b.x - a.x))
}

/// Bracket lambda on the lower hull of (k_i p^(n_i), -i).
///
/// With full_range the caller asserts the series has no support below the
/// first abscissa (k_0 = 1), which extends validity to all of (0, 1).
pub(crate) fn bracket_on_hull(
    seq: &ColemanSequence,
    lambda: &BigRational,
    full_range: bool,
) -> Result<IntegralValuation, ColemanError> {
    if seq.convention() != K0Convention::UniformPlusOne {
        return Err(ColemanError::Hypothesis(
            "polygon vertices need the uniform k convention".into(),
        ));
    }
    if full_range && seq.k_list()[0] != 1 {
        return Err(ColemanError::LambdaOutOfRange(
            "full-range bracketing needs a differential nonvanishing at zbar".into(),
        ));
    }
    if *lambda <= BigRational::zero() || *lambda >= BigRational::one() {
        return Err(ColemanError::LambdaOutOfRange(format!("need 0 < lambda < 1, got {lambda}")));
    }
    let abscissas = seq.abscissas();
    for w in abscissas.windows(2) {
        if w[1] <= w[0] {
            return Err(ColemanError::Hypothesis(
                "abscissas must strictly increase (p >= 2g)".into(),
            ));
        }
    }

    let mut hull: Vec<HullPoint> = Vec::new();
    for (idx, &a) in abscissas.iter().enumerate() {
        let pt = HullPoint { x: i128::from(a), y: -(idx as i128), idx };
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], &pt) <= 0 {
            hull.pop();
        }
        hull.push(pt);
    }

    // Segment slopes are strictly decreasing along the hull.
    let slopes: Vec<BigRational> =
        hull.windows(2).map(|w| hull_slope(&w[0], &w[1])).collect();

    for (j, s) in slopes.iter().enumerate() {
        if s == lambda {
            certify_prefix(seq, &hull, j, lambda)?;
            return Ok(IntegralValuation::IsASlope {
                left: hull[j].idx,
                right: hull[j + 1].idx,
            });
        }
    }
    let v = slopes.iter().position(|s| s < lambda).unwrap_or(slopes.len());
    certify_prefix(seq, &hull, v, lambda)?;
    let a_v = BigRational::from_integer(BigInt::from(hull[v].x));
    let value = lambda * a_v - rat(hull[v].idx as i64);
    Ok(IntegralValuation::Exact { value, vertex: hull[v].idx })
}

/// Certify that no sequence entry beyond the computed depth can disturb the
/// hull at or before vertex `upto`, for queries at slope lambda.
///
/// Future entries lie at abscissa >= p^(n_last + d) with height -(last + d).
/// If every slope from a retained vertex to any such point stays strictly
/// below lambda, the pop cascade of the monotone chain can never reach the
/// vertices in question (reaching one would need a slope above lambda, since
/// every retained incoming slope exceeds lambda) and no new segment at slope
/// >= lambda can appear to their right.
fn certify_prefix(
    seq: &ColemanSequence,
    hull: &[HullPoint],
    upto: usize,
    lambda: &BigRational,
) -> Result<(), ColemanError> {
    let p = seq.p();
    let n_last = *seq.n_list().last().unwrap();
    let last_idx = (seq.len() - 1) as i128;
    for v in &hull[..=upto] {
        let c = last_idx - (-v.y); // future height drop offset relative to v
        // Exact check for the first 64 future entries.
        let mut pw = BigInt::from(p).pow(u32::try_from(n_last).unwrap());
        let pbig = BigInt::from(p);
        for d in 1..=64i128 {
            pw *= &pbig;
            let den = &pw - BigInt::from(v.x);
            if den <= BigInt::zero() {
                return Err(ColemanError::RangeNotCertified(
                    "future abscissas not yet beyond the query vertex".into(),
                ));
            }
            let bound = BigRational::new(BigInt::from(c + d), den);
            if bound >= *lambda {
                return Err(ColemanError::RangeNotCertified(format!(
                    "entry {} of the sequence could reach slope {} >= {}",
                    last_idx + d,
                    bound,
                    lambda
                )));
            }
        }
        // Tail d > 64: the vertex abscissa is at most (2g-1) p^(n_last), and
        // p^2 >= 4g-2, so p^(n_last+d) - v.x >= p^(n_last+d)/2 for d >= 2 and
        // 2(c+d)/p^(n_last+d) is non-increasing in d (ratio <= 2/p < 1).
        let tail =
            BigRational::new(BigInt::from(2 * (c + 65)), &pw * &pbig);
        if tail >= *lambda {
            return Err(ColemanError::RangeNotCertified(
                "tail bound for deep entries not below lambda".into(),
            ));
        }
    }
    Ok(())
}
