//! Slope analysis of abelian integrals on residue discs.
//!
//! For a holomorphic differential omega on a good-reduction hyperelliptic
//! curve and a point zbar of the reduced curve, the locally analytic primitive
//! F(T) = int omega on the residue disc above zbar has a Newton polygon that
//! is controlled by two integer sequences: the positions n_i where applying
//! Verschiebung to the class [omega] fails to raise its lattice valuation,
//! and the vanishing orders k_i (plus one) of the reduced iterates at zbar.
//! The polygon has vertices (k_i p^(n_i), -i), so the valuations of the roots
//! of F, and hence the possible valuations val T(z) at points where all
//! integrals take unramified values, can be read off exactly.
//!
//! This module computes the sequences from a certified Frobenius matrix,
//! derives candidate slopes and integral valuations with explicit
//! certification of the polygon region used, runs the exclusion test for a
//! prescribed ramified valuation lambda, and expands the integral as an
//! honest T-series on a disc to cross-check every claim termwise.

mod disc;
mod exclusion;
mod slopes;
#[cfg(test)]
mod tests;

pub use disc::{disc_expansion, DiscExpansion};
pub use exclusion::{
    unramified_test, ExclusionBranch, ExclusionCertificate, NotExcludedWitness, Verdict,
};
pub use slopes::{candidate_slopes, integral_valuation, IntegralValuation, SlopeForm};

use crate::derham::{
    ord_at_point, CohomologyClass, CurvePointBar, DerhamError, FrobeniusData,
};
use crate::padic::PadicError;
use crate::series::SeriesError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ColemanError {
    #[error("the differential is not holomorphic (coordinates beyond x^(g-1) dx/y)")]
    NotHolomorphic,
    #[error("the differential is divisible by p; divide out its valuation first")]
    NotPrimitive,
    #[error("the residue point does not lie on the reduced curve")]
    InvalidResiduePoint,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("polygon region not certified at this depth: {0}")]
    RangeNotCertified(String),
    #[error("lambda outside the admissible range: {0}")]
    LambdaOutOfRange(String),
    #[error("unsupported residue disc: {0}")]
    UnsupportedDisc(String),
    #[error("integrality certificate failed: {0}")]
    IntegralityViolated(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error(transparent)]
    Derham(#[from] DerhamError),
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Convention for the first entry of the k-sequence.
///
/// The polygon vertex abscissas are k_i p^(n_i) with k_i = ord + 1 uniformly;
/// `Literal` instead reports k_0 as the bare vanishing order, which matches
/// the classical definition of the first term but breaks the uniform vertex
/// formula at i = 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum K0Convention {
    UniformPlusOne,
    Literal,
}

/// The pair of sequences attached to (omega, zbar), together with the
/// valuation trace of the Verschiebung tower that produced them.
#[derive(Clone, Debug)]
pub struct ColemanSequence {
    zbar: CurvePointBar,
    n_list: Vec<u64>,
    k_list: Vec<u64>,
    /// val(V^m [omega]) for m = 0 ..= last n.
    val_trace: Vec<u64>,
    p: u64,
    genus: u64,
    certified_precision: usize,
    convention: K0Convention,
}

impl ColemanSequence {
    /// Compute the first `len` entries (i = 0 .. len) of both sequences.
    pub fn compute(
        frob: &FrobeniusData,
        omega: &CohomologyClass,
        zbar: &CurvePointBar,
        len: usize,
        convention: K0Convention,
    ) -> Result<ColemanSequence, ColemanError> {
        sequence_with_primitives(frob, omega, zbar, len, convention).map(|(s, _)| s)
    }

    pub fn n_list(&self) -> &[u64] {
        &self.n_list
    }

    pub fn k_list(&self) -> &[u64] {
        &self.k_list
    }

    pub fn val_trace(&self) -> &[u64] {
        &self.val_trace
    }

    pub fn len(&self) -> usize {
        self.n_list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n_list.is_empty()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn genus(&self) -> u64 {
        self.genus
    }

    pub fn zbar(&self) -> &CurvePointBar {
        &self.zbar
    }

    pub fn certified_precision(&self) -> usize {
        self.certified_precision
    }

    pub fn convention(&self) -> K0Convention {
        self.convention
    }

    /// Polygon vertex abscissas k_i p^(n_i).
    pub fn abscissas(&self) -> Vec<u64> {
        self.n_list
            .iter()
            .zip(&self.k_list)
            .map(|(&n, &k)| {
                let pw = self.p.checked_pow(u32::try_from(n).unwrap()).expect("abscissa overflow");
                pw.checked_mul(k).expect("abscissa overflow")
            })
            .collect()
    }
}

fn min_precision(class: &CohomologyClass) -> usize {
    class.coords().iter().map(|c| c.precision()).min().unwrap_or(0)
}

fn k_entry(
    prim: &CohomologyClass,
    zbar: &CurvePointBar,
    index: usize,
    convention: K0Convention,
    g: u64,
) -> Result<u64, ColemanError> {
    let bar = prim.reduce_bar()?;
    let ord = ord_at_point(&bar, zbar, g);
    // A nonzero holomorphic differential vanishes to order at most 2g-2.
    assert!(ord <= 2 * g - 2, "vanishing order beyond the holomorphic budget");
    Ok(match convention {
        K0Convention::Literal if index == 0 => ord,
        _ => ord + 1,
    })
}

/// Run the Verschiebung tower, recording both sequences and the primitive
/// class (V^(n_i) omega divided by p^(n_i - i)) at every flat step.
pub(crate) fn sequence_with_primitives(
    frob: &FrobeniusData,
    omega: &CohomologyClass,
    zbar: &CurvePointBar,
    len: usize,
    convention: K0Convention,
) -> Result<(ColemanSequence, Vec<CohomologyClass>), ColemanError> {
    assert!(len >= 1, "at least the i = 0 entry must be requested");
    let curve = frob.curve();
    let g = curve.genus();
    if !zbar.validate(curve) {
        return Err(ColemanError::InvalidResiduePoint);
    }
    for c in &omega.coords()[g as usize..] {
        if !c.is_zero() {
            return Err(ColemanError::NotHolomorphic);
        }
    }
    match omega.valuation() {
        Ok(0) => {}
        Ok(_) => return Err(ColemanError::NotPrimitive),
        Err(_) => {
            return Err(ColemanError::PrecisionExhausted(
                "differential indistinguishable from zero".into(),
            ))
        }
    }

    let mut n_list = vec![0u64];
    let mut k_list = vec![k_entry(omega, zbar, 0, convention, g)?];
    let mut val_trace = vec![0u64];
    let mut primitives = vec![omega.clone()];
    let mut cur = omega.clone();
    let mut total_val = 0u64;
    let mut m = 0u64;

    while n_list.len() < len {
        m += 1;
        // Two digits of headroom: the next step must decide valuation 0
        // versus 1 and still leave a nonzero residue for reduce_bar.
        if min_precision(&cur) <= 1 {
            return Err(ColemanError::PrecisionExhausted(format!(
                "V tower ran out of digits at step {m}"
            )));
        }
        let nxt = frob.verschiebung_apply(&cur);
        match nxt.valuation() {
            Err(_) => {
                return Err(ColemanError::PrecisionExhausted(format!(
                    "V^{m} image indistinguishable from zero"
                )))
            }
            Ok(0) => {
                cur = nxt;
                n_list.push(m);
                val_trace.push(total_val);
                k_list.push(k_entry(&cur, zbar, n_list.len() - 1, convention, g)?);
                primitives.push(cur.clone());
            }
            Ok(_) => {
                let div = cur_jump(&nxt)?;
                cur = div;
                total_val += 1;
                val_trace.push(total_val);
            }
        }
    }

    let seq = ColemanSequence {
        zbar: zbar.clone(),
        n_list,
        k_list,
        val_trace,
        p: curve.p(),
        genus: g,
        certified_precision: min_precision(&cur),
        convention,
    };
    Ok((seq, primitives))
}

/// Divide a jumped V image by p and confirm the jump was by exactly one:
/// FV = p forces val V(eta) <= val(eta) + 1.
fn cur_jump(nxt: &CohomologyClass) -> Result<CohomologyClass, ColemanError> {
    let div = nxt.div_exact_p_pow(1)?;
    assert_eq!(
        div.valuation().ok(),
        Some(0),
        "Verschiebung raised the class valuation by more than one"
    );
    Ok(div)
}

/// The n-sequence and the full valuation trace of V^m [omega].
pub fn n_sequence(
    frob: &FrobeniusData,
    omega: &CohomologyClass,
    len: usize,
) -> Result<(Vec<u64>, Vec<u64>), ColemanError> {
    // The point enters only through the k-sequence; any valid point works.
    let seq = ColemanSequence::compute(
        frob,
        omega,
        &CurvePointBar::Infinity,
        len,
        K0Convention::UniformPlusOne,
    )?;
    Ok((seq.n_list, seq.val_trace))
}

/// The k-sequence at zbar, one entry per flat of the valuation trace.
pub fn k_sequence(
    frob: &FrobeniusData,
    omega: &CohomologyClass,
    zbar: &CurvePointBar,
    len: usize,
    convention: K0Convention,
) -> Result<Vec<u64>, ColemanError> {
    let seq = ColemanSequence::compute(frob, omega, zbar, len, convention)?;
    Ok(seq.k_list)
}
