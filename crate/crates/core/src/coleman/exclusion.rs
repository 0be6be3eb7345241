//! The exclusion test for ramified disc-parameter valuations.
//!
//! Fix a residue point zbar and a rational lambda in (0, 1). If some point z
//! of the disc with val T(z) = lambda had unramified (integer-valuation or
//! zero) values for every abelian integral, then for each holomorphic omega
//! the polygon of int omega either brackets lambda at a vertex, forcing
//! val F(z) = lambda k_i p^(n_i) - i to be an integer, or has lambda as an
//! actual slope. A certified non-integer bracket for a single differential
//! therefore excludes lambda outright. When every basis differential is
//! individually compatible, they are all forced to share one (n, k), and a
//! combination omega1 - alpha p^c omega2 with matched leading terms at zbar
//! breaks that pattern: either its reduction vanishes deeper than k - 1 or
//! its V^n valuation rises, and rerunning the single-differential test on
//! the combination produces the missing non-integer bracket.

use super::slopes::{bracket_on_hull, IntegralValuation};
use super::{sequence_with_primitives, ColemanError, ColemanSequence, K0Convention};
use crate::derham::{
    embed_residue, to_digit_string, CohomologyClass, CurvePointBar, DifferentialModP,
    FrobeniusData,
};
use crate::padic::{PadicContext, PadicNumber};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExclusionBranch {
    /// A differential nonvanishing at zbar pins val F(z) = lambda directly.
    NonVanishingDifferential { basis_index: usize },
    /// A basis differential whose polygon brackets lambda off the integers.
    BasisDifferential { basis_index: usize },
    /// A constructed combination breaking the forced common (n, k) pattern.
    Combination { description: String },
}

/// Everything needed to re-check an exclusion by hand: the witness
/// differential, the bracketing vertex of its polygon, and the non-integer
/// valuation the integral would have to take.
#[derive(Clone, Debug, PartialEq)]
pub struct ExclusionCertificate {
    pub branch: ExclusionBranch,
    pub valuation: BigRational,
    /// (n_i, k_i, i) at the bracketing vertex of the witness polygon.
    pub vertex: (u64, u64, usize),
    /// Digit strings of the witness differential's holomorphic coordinates.
    pub differential: Vec<String>,
}

/// Honest failure data: what the test could not refute.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NotExcludedWitness {
    /// The (n, k) every tested differential was compatible with, if shared.
    pub common: Option<(u64, u64)>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Excluded(ExclusionCertificate),
    NotExcluded(NotExcludedWitness),
}

/// Outcome of the single-differential test at lambda.
enum Outcome {
    Fails { value: BigRational, vertex: usize },
    VertexCompat { vertex: usize },
    SlopeCompat { right: usize },
}

struct Analysis {
    seq: ColemanSequence,
    prims: Vec<CohomologyClass>,
    outcome: Outcome,
}

impl Analysis {
    /// The (n, k) pair a compatible differential witnesses, with its index.
    fn witness(&self) -> Option<(u64, u64, usize)> {
        let at = |i: usize| (self.seq.n_list()[i], self.seq.k_list()[i], i);
        match self.outcome {
            Outcome::Fails { .. } => None,
            Outcome::VertexCompat { vertex } => Some(at(vertex)),
            Outcome::SlopeCompat { right } => Some(at(right)),
        }
    }
}

/// Embed a residue point into the analysis context (same p, same residue
/// degree, full working precision).
fn embed_point(zbar: &CurvePointBar, ctx: &PadicContext) -> CurvePointBar {
    let lift = |x: &PadicNumber| ctx.from_coeffs(x.coeffs().to_vec(), 1);
    match zbar {
        CurvePointBar::Infinity => CurvePointBar::Infinity,
        CurvePointBar::Weierstrass { a } => CurvePointBar::Weierstrass { a: lift(a) },
        CurvePointBar::FiniteNonWeierstrass { a, b } => {
            CurvePointBar::FiniteNonWeierstrass { a: lift(a), b: lift(b) }
        }
    }
}

fn point_residue_degree(zbar: &CurvePointBar) -> usize {
    match zbar {
        CurvePointBar::Infinity => 1,
        CurvePointBar::Weierstrass { a } => a.context().f(),
        CurvePointBar::FiniteNonWeierstrass { a, .. } => a.context().f(),
    }
}

/// The leading coefficient of h dx/y at the point, in the local parameter:
/// the first nonzero repeated-synthetic-division value at a finite point,
/// the top coefficient of h at infinity.
fn leading_coeff_at(h: &DifferentialModP, point: &CurvePointBar, ctx: &PadicContext) -> PadicNumber {
    let embed = |c: &PadicNumber| {
        if c.context() == ctx {
            c.clone()
        } else {
            embed_residue(c, ctx)
        }
    };
    let a = match point {
        CurvePointBar::Infinity => return embed(h.coeffs().last().unwrap()),
        CurvePointBar::Weierstrass { a } => a,
        CurvePointBar::FiniteNonWeierstrass { a, .. } => a,
    };
    let mut coeffs: Vec<PadicNumber> = h.coeffs().iter().map(embed).collect();
    loop {
        // Synthetic division by (x - a): value in the last slot, quotient before.
        let mut q = vec![ctx.zero_at(1); coeffs.len().saturating_sub(1)];
        let mut carry = ctx.zero_at(1);
        let mut value = ctx.zero_at(1);
        for i in (0..coeffs.len()).rev() {
            let cur = coeffs[i].add(&carry);
            if i == 0 {
                value = cur;
            } else {
                q[i - 1] = cur.clone();
                carry = cur.mul(a);
            }
        }
        if !value.is_zero() || q.is_empty() {
            return value;
        }
        coeffs = q;
    }
}

/// Deepen the sequence until the bracket at lambda is certified, the depth
/// cap is hit, or precision runs out.
fn analyze(
    frob: &FrobeniusData,
    omega: &CohomologyClass,
    zbar: &CurvePointBar,
    lambda: &BigRational,
    full_range: bool,
    max_len: usize,
) -> Result<Analysis, ColemanError> {
    let mut len = 2.min(max_len).max(1);
    loop {
        let (seq, prims) =
            sequence_with_primitives(frob, omega, zbar, len, K0Convention::UniformPlusOne)?;
        match bracket_on_hull(&seq, lambda, full_range) {
            Ok(IntegralValuation::Exact { value, vertex }) => {
                let outcome = if value.is_integer() {
                    Outcome::VertexCompat { vertex }
                } else {
                    Outcome::Fails { value, vertex }
                };
                return Ok(Analysis { seq, prims, outcome });
            }
            Ok(IntegralValuation::IsASlope { right, .. }) => {
                return Ok(Analysis { seq, prims, outcome: Outcome::SlopeCompat { right } });
            }
            Err(ColemanError::RangeNotCertified(why)) => {
                if len >= max_len {
                    return Err(ColemanError::RangeNotCertified(why));
                }
                len += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

fn holomorphic_digits(class: &CohomologyClass) -> Vec<String> {
    let g = class.curve().genus() as usize;
    class.coords()[..g].iter().map(to_digit_string).collect()
}

fn certificate(
    branch: ExclusionBranch,
    analysis: &Analysis,
    class: &CohomologyClass,
) -> ExclusionCertificate {
    let (value, vertex) = match &analysis.outcome {
        Outcome::Fails { value, vertex } => (value.clone(), *vertex),
        _ => unreachable!("certificates are only built from failing brackets"),
    };
    ExclusionCertificate {
        branch,
        valuation: value,
        vertex: (analysis.seq.n_list()[vertex], analysis.seq.k_list()[vertex], vertex),
        differential: holomorphic_digits(class),
    }
}

/// Decide whether points with val T(z) = lambda can have unramified integral
/// values on the disc above zbar, by certified polygon brackets.
///
/// `max_len` caps the sequence depth used per differential. Excluded comes
/// with a re-checkable certificate; NotExcluded reports what every tested
/// differential was compatible with.
pub fn unramified_test(
    frob: &FrobeniusData,
    zbar: &CurvePointBar,
    lambda: &BigRational,
    max_len: usize,
) -> Result<Verdict, ColemanError> {
    let curve = frob.curve();
    let g = curve.genus();
    if curve.p() < 2 * g {
        return Err(ColemanError::Hypothesis(format!(
            "need p >= 2g, got p = {} and g = {g}",
            curve.p()
        )));
    }
    if !zbar.validate(curve) {
        return Err(ColemanError::InvalidResiduePoint);
    }
    if *lambda <= BigRational::zero() || *lambda > BigRational::one() {
        return Err(ColemanError::LambdaOutOfRange(format!(
            "need 0 < lambda <= 1, got {lambda}"
        )));
    }
    if lambda.is_integer() {
        return Ok(Verdict::NotExcluded(NotExcludedWitness {
            common: None,
            note: "lambda = 1 is an unramified-compatible valuation".into(),
        }));
    }

    // Analysis context: the point's residue degree at the curve's precision.
    let fdeg = point_residue_degree(zbar);
    let actx = if fdeg == 1 {
        curve.context().clone()
    } else {
        PadicContext::new(curve.p(), fdeg, curve.precision())?
    };
    let point = embed_point(zbar, &actx);

    let basis: Vec<CohomologyClass> =
        (0..g as usize).map(|i| curve.basis_class(i, &actx)).collect();
    let orders: Vec<u64> = basis
        .iter()
        .map(|w| {
            let bar = w.reduce_bar().expect("basis classes are primitive");
            crate::derham::ord_at_point(&bar, &point, g)
        })
        .collect();

    let threshold = BigRational::new(BigInt::one(), BigInt::from(2 * g - 2));
    if *lambda >= threshold {
        // Some basis differential has ord 0 at any point (x^0 at finite
        // points, x^(g-1) at infinity); its polygon starts at (1, 0) with all
        // further slopes below 1/(p-1) < 1/(2g-2), so the bracket is the
        // first vertex and the integral valuation is lambda itself.
        let i0 = orders
            .iter()
            .position(|&o| o == 0)
            .expect("some basis differential is nonvanishing at every point");
        let analysis = analyze(frob, &basis[i0], &point, lambda, true, max_len)?;
        match &analysis.outcome {
            Outcome::Fails { .. } => {
                return Ok(Verdict::Excluded(certificate(
                    ExclusionBranch::NonVanishingDifferential { basis_index: i0 },
                    &analysis,
                    &basis[i0],
                )));
            }
            _ => unreachable!("above-threshold lambda always brackets at the first vertex"),
        }
    }

    // Below the threshold: test each basis differential on its own.
    let mut pool: Vec<(CohomologyClass, Analysis, String)> = Vec::new();
    for (i, omega) in basis.iter().enumerate() {
        let analysis = analyze(frob, omega, &point, lambda, orders[i] == 0, max_len)?;
        if let Outcome::Fails { .. } = analysis.outcome {
            return Ok(Verdict::Excluded(certificate(
                ExclusionBranch::BasisDifferential { basis_index: i },
                &analysis,
                omega,
            )));
        }
        pool.push((omega.clone(), analysis, format!("basis {i}")));
    }

    // Every basis differential is compatible. Break the forced common (n, k)
    // by combinations with matched leading terms, retesting each one.
    for _round in 0..(4 * g + 8) {
        let mut pair: Option<(usize, usize)> = None;
        'outer: for i in 0..pool.len() {
            for j in i + 1..pool.len() {
                let (wi, wj) = (pool[i].1.witness(), pool[j].1.witness());
                if let (Some(a), Some(b)) = (wi, wj) {
                    if (a.0, a.1) == (b.0, b.1) {
                        pair = Some((i, j));
                        break 'outer;
                    }
                }
            }
        }
        let Some((i, j)) = pair else { break };
        let (n, k, _) = pool[i].1.witness().unwrap();
        // Order so the first entry has the not-smaller V^n valuation.
        let d_i = pool[i].1.seq.val_trace()[n as usize];
        let d_j = pool[j].1.seq.val_trace()[n as usize];
        let (hi, lo) = if d_i >= d_j { (i, j) } else { (j, i) };
        let (d_hi, d_lo) = (d_i.max(d_j), d_i.min(d_j));

        // Matched leading terms of the reduced primitives at the witness step.
        let prim_of = |e: &(CohomologyClass, Analysis, String)| {
            let idx = e.1.seq.n_list().iter().position(|&m| m == n).unwrap();
            e.1.prims[idx].clone()
        };
        let h_hi = prim_of(&pool[hi]).reduce_bar()?;
        let h_lo = prim_of(&pool[lo]).reduce_bar()?;
        debug_assert_eq!(crate::derham::ord_at_point(&h_hi, &point, g), k - 1);
        debug_assert_eq!(crate::derham::ord_at_point(&h_lo, &point, g), k - 1);
        let lead_hi = leading_coeff_at(&h_hi, &point, &actx);
        let lead_lo = leading_coeff_at(&h_lo, &point, &actx);
        let alpha_bar = lead_hi.mul(&lead_lo.invert()?);
        // V^n picks up a sigma^(-n) twist on the scalar; pre-twist so the
        // reductions cancel after the tower.
        let alpha = actx.teichmuller(&alpha_bar).frobenius_pow(n as i64);
        let eta_raw = pool[hi]
            .0
            .sub(&pool[lo].0.scale(&alpha).mul_by_p_pow((d_hi - d_lo) as usize));
        let eta = match eta_raw.valuation() {
            Ok(0) => eta_raw,
            Ok(v) => eta_raw.div_exact_p_pow(v as usize)?,
            Err(_) => {
                return Err(ColemanError::PrecisionExhausted(
                    "combination vanished at working precision".into(),
                ))
            }
        };
        let label = format!(
            "({}) - {} * p^{} * ({})",
            pool[hi].2,
            to_digit_string(&alpha_bar),
            d_hi - d_lo,
            pool[lo].2
        );
        let analysis = analyze(frob, &eta, &point, lambda, false, max_len)?;
        if let Outcome::Fails { .. } = analysis.outcome {
            return Ok(Verdict::Excluded(certificate(
                ExclusionBranch::Combination { description: label },
                &analysis,
                &eta,
            )));
        }
        pool[hi] = (eta, analysis, label);
    }

    let witnesses: Vec<Option<(u64, u64, usize)>> =
        pool.iter().map(|e| e.1.witness()).collect();
    let common = match witnesses.split_first() {
        Some((Some(first), rest))
            if rest.iter().all(|w| w.map(|x| (x.0, x.1)) == Some((first.0, first.1))) =>
        {
            Some((first.0, first.1))
        }
        _ => None,
    };
    let note = format!(
        "no certified non-integer bracket found among {} differentials",
        pool.len()
    );
    Ok(Verdict::NotExcluded(NotExcludedWitness { common, note }))
}
