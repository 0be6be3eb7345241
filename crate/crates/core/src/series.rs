//! One-variable series over the p-adics: coefficient-valuation profiles, lower
//! convex hulls, and certified slope data.
//!
//! A coefficient that is indistinguishable from zero at working precision only
//! bounds its valuation from below. The polygon is therefore built twice: once
//! from the known points and once pessimistically with every bound treated as
//! attained. The common prefix of the two hulls is the certified region; every
//! query answered from outside it reports UncertifiedRegion instead of
//! guessing.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::padic::{PadicNumber, ScaledPadic, ScaledValuation, Valuation};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeriesError {
    #[error("every coefficient is indistinguishable from zero")]
    AllCoefficientsIndistinguishableFromZero,
    #[error("query touches the polygon outside its certified region")]
    UncertifiedRegion,
    #[error("slope query requires a positive lambda")]
    NonPositiveSlope,
}

/// What is known about the valuation of one coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoeffValuation {
    /// Exactly zero: contributes no point to the polygon.
    Zero,
    Known(BigRational),
    /// Indistinguishable from zero at working precision: valuation >= bound.
    AtLeast(BigRational),
}

/// Valuation profile of sum a_n T^n, n < M, together with a lower bound for
/// all coefficients from M on (None means the series is a polynomial).
#[derive(Clone, Debug)]
pub struct PadicSeries {
    profile: Vec<CoeffValuation>,
    tail_bound: Option<BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Exact p-adic valuation of a nonzero integer.
pub fn bigint_valuation(v: &BigInt, p: u64) -> Option<u64> {
    if v.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v = v.abs();
    let mut out = 0u64;
    while (&v % &p).is_zero() {
        v /= &p;
        out += 1;
    }
    Some(out)
}

impl PadicSeries {
    pub fn from_valuations(profile: Vec<CoeffValuation>, tail_bound: Option<BigRational>) -> Self {
        PadicSeries { profile, tail_bound }
    }

    /// Polynomial with exact integer coefficients.
    pub fn from_bigints(coeffs: &[BigInt], p: u64) -> Self {
        let profile = coeffs
            .iter()
            .map(|c| match bigint_valuation(c, p) {
                None => CoeffValuation::Zero,
                Some(v) => CoeffValuation::Known(rat(v as i64)),
            })
            .collect();
        PadicSeries { profile, tail_bound: None }
    }

    /// Truncated p-adic coefficients: precision-zero entries become bounds.
    pub fn from_padics(coeffs: &[PadicNumber], tail_bound: Option<BigRational>) -> Self {
        let profile = coeffs
            .iter()
            .map(|c| match c.valuation() {
                Valuation::Finite(v) => CoeffValuation::Known(rat(v as i64)),
                Valuation::AtPrecisionZero => CoeffValuation::AtLeast(rat(c.precision() as i64)),
            })
            .collect();
        PadicSeries { profile, tail_bound }
    }

    pub fn from_scaled(coeffs: &[ScaledPadic], tail_bound: Option<BigRational>) -> Self {
        let profile = coeffs
            .iter()
            .map(|c| match c.valuation() {
                ScaledValuation::Known(v) => CoeffValuation::Known(rat(v)),
                ScaledValuation::AtLeast(b) => CoeffValuation::AtLeast(rat(b)),
            })
            .collect();
        PadicSeries { profile, tail_bound }
    }

    pub fn truncation_order(&self) -> usize {
        self.profile.len()
    }

    pub fn profile(&self) -> &[CoeffValuation] {
        &self.profile
    }

    /// Upgrade one entry to an exact zero, for coefficients known to vanish
    /// identically rather than merely to working precision.
    pub fn set_exact_zero(&mut self, index: usize) {
        self.profile[index] = CoeffValuation::Zero;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct HullPoint {
    n: u64,
    m: BigRational,
    known: bool,
}

fn slope(a: &HullPoint, b: &HullPoint) -> BigRational {
    (&b.m - &a.m) / BigRational::from_integer(BigInt::from(b.n - a.n))
}

/// Lower hull via monotone chain; collinear interior points are dropped so
/// segment slopes are strictly increasing.
fn lower_hull(points: &[HullPoint]) -> Vec<HullPoint> {
    let mut hull: Vec<HullPoint> = Vec::new();
    for pt in points {
        while hull.len() >= 2 {
            let a = &hull[hull.len() - 2];
            let b = &hull[hull.len() - 1];
            if slope(a, b) >= slope(b, pt) {
                hull.pop();
            } else {
                break;
            }
        }
        // A later point directly below an earlier one at the same abscissa
        // cannot occur (one coefficient per n), so abscissas are distinct.
        hull.push(pt.clone());
    }
    hull
}

/// Lower convex hull of the valuation profile, with its certified prefix.
#[derive(Clone, Debug)]
pub struct NewtonPolygon {
    /// Pessimistic hull: bounds treated as attained. Increasing abscissas,
    /// strictly increasing segment slopes.
    vertices: Vec<HullPoint>,
    /// Number of leading vertices shared with the known-points-only hull;
    /// the polygon is certified exactly on these.
    certified: usize,
    /// The input points, for the TSV emitter.
    points: Vec<HullPoint>,
}

/// Result of a valuation query at val(z) = lambda.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValueValuation {
    Exact(BigRational),
    /// lambda is a slope: the polygon does not determine val(F(z)).
    IsASlope,
}

pub fn newton_polygon(s: &PadicSeries) -> Result<NewtonPolygon, SeriesError> {
    let mut points: Vec<HullPoint> = Vec::new();
    for (n, c) in s.profile.iter().enumerate() {
        match c {
            CoeffValuation::Zero => {}
            CoeffValuation::Known(m) => {
                points.push(HullPoint { n: n as u64, m: m.clone(), known: true })
            }
            CoeffValuation::AtLeast(b) => {
                points.push(HullPoint { n: n as u64, m: b.clone(), known: false })
            }
        }
    }
    if let Some(b) = &s.tail_bound {
        // One pessimistic point at the truncation order dominates the whole
        // tail: points further right at the same height constrain the hull
        // strictly less on the certified side.
        points.push(HullPoint { n: s.profile.len() as u64, m: b.clone(), known: false });
    }
    if !points.iter().any(|pt| pt.known) {
        return Err(SeriesError::AllCoefficientsIndistinguishableFromZero);
    }
    let known: Vec<HullPoint> = points.iter().filter(|pt| pt.known).cloned().collect();
    let hull_known = lower_hull(&known);
    let hull_pess = lower_hull(&points);
    let mut certified = 0;
    while certified < hull_pess.len()
        && certified < hull_known.len()
        && hull_pess[certified].n == hull_known[certified].n
        && hull_pess[certified].m == hull_known[certified].m
    {
        certified += 1;
    }
    let poly = NewtonPolygon { vertices: hull_pess, certified, points };
    debug_assert!(poly.check_invariants());
    Ok(poly)
}

impl NewtonPolygon {
    /// Vertices (n, val) of the pessimistic hull.
    pub fn vertices(&self) -> Vec<(u64, BigRational)> {
        self.vertices.iter().map(|v| (v.n, v.m.clone())).collect()
    }

    /// The certified initial vertices: exact, unaffected by any coefficient
    /// whose valuation is only bounded.
    pub fn certified_vertices(&self) -> Vec<(u64, BigRational)> {
        self.vertices[..self.certified].iter().map(|v| (v.n, v.m.clone())).collect()
    }

    pub fn is_fully_certified(&self) -> bool {
        self.certified == self.vertices.len()
    }

    /// All segment slopes with horizontal lengths, left to right.
    pub fn slopes(&self) -> Vec<(BigRational, u64)> {
        self.vertices
            .windows(2)
            .map(|w| (slope(&w[0], &w[1]), w[1].n - w[0].n))
            .collect()
    }

    fn check_invariants(&self) -> bool {
        for w in self.vertices.windows(2) {
            if w[0].n >= w[1].n {
                return false;
            }
        }
        let s = self.slopes();
        for w in s.windows(2) {
            if w[0].0 >= w[1].0 {
                return false;
            }
        }
        // Every input point lies on or above the hull.
        self.points.iter().all(|pt| self.height_at(pt.n).map_or(true, |h| pt.m >= h))
    }

    /// Height of the hull at abscissa n, None outside its span.
    fn height_at(&self, n: u64) -> Option<BigRational> {
        let first = self.vertices.first()?;
        let last = self.vertices.last()?;
        if n < first.n || n > last.n {
            return None;
        }
        for w in self.vertices.windows(2) {
            if n >= w[0].n && n <= w[1].n {
                let s = slope(&w[0], &w[1]);
                return Some(&w[0].m + s * rat(n as i64 - w[0].n as i64));
            }
        }
        Some(self.vertices.last().unwrap().m.clone())
    }

    /// The descending segments as (lambda = -slope > 0, horizontal length),
    /// in increasing lambda. These are exactly the valuations (with
    /// multiplicity) of the small roots in the certified region.
    pub fn negative_slopes(&self) -> Result<Vec<(BigRational, u64)>, SeriesError> {
        let zero = BigRational::zero();
        let mut out = Vec::new();
        for (i, w) in self.vertices.windows(2).enumerate() {
            let s = slope(&w[0], &w[1]);
            if s < zero {
                // Both endpoints must be certified: i+1 is the right endpoint.
                if i + 1 >= self.certified {
                    return Err(SeriesError::UncertifiedRegion);
                }
                out.push((-s, w[1].n - w[0].n));
            }
        }
        out.reverse();
        Ok(out)
    }

    /// Valuation of F(z) for val(z) = lambda > 0, by ultrametric dominance:
    /// the bracketing vertex (n, m) gives lambda*n + m, unless lambda is a
    /// slope, in which case the polygon alone does not decide.
    pub fn value_valuation(&self, lambda: &BigRational) -> Result<ValueValuation, SeriesError> {
        if *lambda <= BigRational::zero() {
            return Err(SeriesError::NonPositiveSlope);
        }
        let neg = -lambda.clone();
        let slopes: Vec<BigRational> =
            self.vertices.windows(2).map(|w| slope(&w[0], &w[1])).collect();
        // Find the segment index whose slope equals -lambda, or the vertex
        // bracketed strictly between adjacent slopes.
        for (i, s) in slopes.iter().enumerate() {
            if *s == neg {
                // Certified only when both endpoints of the segment are.
                if i + 1 < self.certified {
                    return Ok(ValueValuation::IsASlope);
                }
                return Err(SeriesError::UncertifiedRegion);
            }
        }
        let idx = slopes.iter().position(|s| *s > neg).unwrap_or(slopes.len());
        // Vertex idx has incoming slope < -lambda (or none) and outgoing
        // slope > -lambda (or none): the strict minimizer of m + lambda n.
        if idx >= self.certified {
            return Err(SeriesError::UncertifiedRegion);
        }
        let v = &self.vertices[idx];
        Ok(ValueValuation::Exact(&v.m + lambda * rat(v.n as i64)))
    }

    /// Rows (n, valuation, on_hull) for external plotting. Bounded valuations
    /// are prefixed with ">=".
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("n\tvaluation\ton_hull\n");
        for pt in &self.points {
            let on_hull = self.height_at(pt.n).is_some_and(|h| h == pt.m);
            let val = if pt.known { format!("{}", pt.m) } else { format!(">={}", pt.m) };
            let _ = writeln!(out, "{}\t{}\t{}", pt.n, val, on_hull);
        }
        out
    }
}
