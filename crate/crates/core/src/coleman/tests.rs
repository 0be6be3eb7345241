//! The sequence laws are pinned on every stored curve, the bracket and
//! certification arithmetic on enumerated and synthetic shapes, and the disc
//! expansions against the independent tower data they must reproduce.

use super::slopes::bracket_on_hull;
use super::*;
use crate::derham::{
    cartier_matrix, eval_fbar, frobenius_matrix, CohomologyClass, CurvePointBar, FrobeniusData,
    HyperellipticCurve,
};
use crate::fixtures;
use crate::padic::{PadicContext, PadicNumber, ScaledPadic, ScaledValuation};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;
use std::collections::HashMap;
use std::sync::Mutex;

const ALL: [&str; 8] = [
    "g2_p5_a", "g2_p5_b", "g2_p5_c", "g2_p7_a", "g2_p7_b", "g2_p7_c", "g3_p7_a", "g3_p7_b",
];
const ORDINARY: [&str; 3] = ["g2_p5_c", "g2_p7_c", "g3_p7_b"];

fn fix(name: &str) -> HyperellipticCurve {
    fixtures::load(name).expect("fixture loads")
}

fn frob(name: &str) -> FrobeniusData {
    static CACHE: Mutex<Option<HashMap<String, FrobeniusData>>> = Mutex::new(None);
    let mut guard = CACHE.lock().unwrap();
    let map = guard.get_or_insert_with(HashMap::new);
    map.entry(name.to_string())
        .or_insert_with(|| frobenius_matrix(&fix(name), None).expect("Frobenius matrix computes"))
        .clone()
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn basis(fd: &FrobeniusData, i: usize) -> CohomologyClass {
    let c = fd.curve();
    c.basis_class(i, c.context())
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

fn det_mod_p(mut m: Vec<Vec<u64>>, p: u64) -> u64 {
    let n = m.len();
    let mut det = 1;
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| m[r][col] % p != 0) else { return 0 };
        if piv != col {
            m.swap(piv, col);
            det = (p - det) % p;
        }
        det = det * (m[col][col] % p) % p;
        let inv = pow_mod(m[col][col], p - 2, p);
        for r in col + 1..n {
            let f = m[r][col] % p * inv % p;
            for c in col..n {
                let s = f * m[col][c] % p;
                m[r][c] = (m[r][c] % p + p - s) % p;
            }
        }
    }
    det
}

fn prime_field_points(curve: &HyperellipticCurve) -> Vec<CurvePointBar> {
    let ctx1 = PadicContext::new(curve.p(), 1, 1).unwrap();
    let mut pts = vec![CurvePointBar::Infinity];
    for a0 in 0..curve.p() {
        let a = ctx1.from_u64(a0);
        let fa = eval_fbar(curve, &a);
        if fa.is_zero() {
            pts.push(CurvePointBar::Weierstrass { a });
            continue;
        }
        for b0 in 1..curve.p() {
            let b = ctx1.from_u64(b0);
            if b.mul(&b).sub(&fa).is_zero() {
                pts.push(CurvePointBar::FiniteNonWeierstrass { a: a.clone(), b });
            }
        }
    }
    pts
}

fn finite_points(curve: &HyperellipticCurve) -> Vec<CurvePointBar> {
    prime_field_points(curve)
        .into_iter()
        .filter(|z| matches!(z, CurvePointBar::FiniteNonWeierstrass { .. }))
        .collect()
}

/// A finite point where every holomorphic basis class has k identically one
/// out to the given depth, together with the omega_0 sequence there.
fn all_ones_point(fd: &FrobeniusData, len: usize) -> Option<(CurvePointBar, ColemanSequence)> {
    let g = fd.curve().genus() as usize;
    for z in finite_points(fd.curve()) {
        let mut first = None;
        let mut good = true;
        for i in 0..g {
            let seq = ColemanSequence::compute(
                fd,
                &basis(fd, i),
                &z,
                len,
                K0Convention::UniformPlusOne,
            )
            .expect("sequence computes");
            if seq.k_list().iter().any(|&k| k != 1) {
                good = false;
                break;
            }
            if i == 0 {
                first = Some(seq);
            }
        }
        if good {
            return Some((z, first.unwrap()));
        }
    }
    None
}

#[test]
fn sequence_laws_on_stored_curves() {
    for name in ALL {
        let fd = frob(name);
        let g = fd.curve().genus();
        assert!(fd.curve().p() >= 2 * g, "{name}: p >= 2g");
        for i in 0..g as usize {
            let omega = basis(&fd, i);
            let seq = ColemanSequence::compute(
                &fd,
                &omega,
                &CurvePointBar::Infinity,
                5,
                K0Convention::UniformPlusOne,
            )
            .unwrap_or_else(|e| panic!("{name} omega_{i}: {e}"));
            let n = seq.n_list();
            let k = seq.k_list();
            let v = seq.val_trace();
            assert_eq!(n.len(), 5, "{name} omega_{i}");
            assert_eq!(n[0], 0, "{name} omega_{i}");
            for w in n.windows(2) {
                assert!(w[0] < w[1], "{name} omega_{i}: n strictly increases");
            }
            for &ki in k {
                assert!((1..=2 * g - 1).contains(&ki), "{name} omega_{i}: k = {ki}");
            }
            for w in seq.abscissas().windows(2) {
                assert!(w[0] < w[1], "{name} omega_{i}: abscissas strictly increase");
            }
            assert_eq!(v.len(), *n.last().unwrap() as usize + 1, "{name} omega_{i}");
            assert_eq!(v[0], 0, "{name} omega_{i}: primitive input");
            for w in v.windows(2) {
                assert!(
                    w[1] == w[0] || w[1] == w[0] + 1,
                    "{name} omega_{i}: valuation steps by 0 or 1"
                );
            }
            // val(V^m omega) = m - #(flats i >= 1 with n_i <= m)
            for (m, &vm) in v.iter().enumerate() {
                let flats = n.iter().skip(1).filter(|&&ni| ni <= m as u64).count() as u64;
                assert_eq!(vm, m as u64 - flats, "{name} omega_{i} at step {m}");
            }
            assert!(seq.certified_precision() > 0, "{name} omega_{i}");
        }
    }
}

#[test]
fn ordinary_curves_have_consecutive_n() {
    // Ordinarity read off the mod-p Cartier matrix, independently of the tower.
    let mut ordinary = Vec::new();
    for name in ALL {
        let c = fix(name);
        if det_mod_p(cartier_matrix(&c), c.p()) != 0 {
            ordinary.push(name);
        }
    }
    assert_eq!(ordinary, ORDINARY.to_vec());
    for name in ORDINARY {
        let fd = frob(name);
        for i in 0..fd.curve().genus() as usize {
            let (n, v) = n_sequence(&fd, &basis(&fd, i), 5).unwrap();
            assert_eq!(n, vec![0, 1, 2, 3, 4], "{name} omega_{i}");
            assert_eq!(v, vec![0; 5], "{name} omega_{i}");
        }
    }
}

#[test]
fn n_sequence_is_point_free() {
    let fd = frob("g2_p5_a");
    let omega = basis(&fd, 0);
    let (n_ref, v_ref) = n_sequence(&fd, &omega, 4).unwrap();
    for z in prime_field_points(fd.curve()).into_iter().take(4) {
        let seq =
            ColemanSequence::compute(&fd, &omega, &z, 4, K0Convention::UniformPlusOne).unwrap();
        assert_eq!(seq.n_list(), &n_ref[..]);
        assert_eq!(seq.val_trace(), &v_ref[..]);
    }
}

#[test]
fn k_convention_and_order_bounds() {
    let fd = frob("g2_p5_c");
    let omega0 = basis(&fd, 0);
    let z = finite_points(fd.curve()).into_iter().next().unwrap();
    let uni = k_sequence(&fd, &omega0, &z, 3, K0Convention::UniformPlusOne).unwrap();
    let lit = k_sequence(&fd, &omega0, &z, 3, K0Convention::Literal).unwrap();
    // dx/y vanishes nowhere on the finite locus.
    assert_eq!(uni[0], 1);
    assert_eq!(lit[0], 0);
    assert_eq!(uni[1..], lit[1..]);
    // At infinity dx/y has a zero of order 2g-2, the maximum: k_0 = 2g-1.
    let inf =
        k_sequence(&fd, &omega0, &CurvePointBar::Infinity, 1, K0Convention::UniformPlusOne)
            .unwrap();
    assert_eq!(inf[0], 3);
}

#[test]
fn candidate_slopes_recover_vertex_pairs() {
    // Ordinary all-ones point: abscissas p^i, slopes 1/(p^(i+1) - p^i).
    let fd = frob("g2_p5_c");
    let (_, seq) = all_ones_point(&fd, 4).expect("a point with k = 1 throughout");
    assert_eq!(seq.abscissas(), vec![1, 5, 25, 125]);
    assert_eq!(candidate_slopes(&seq), vec![rat(1, 4), rat(1, 20), rat(1, 100)]);

    // Every candidate of every stored sequence decomposes as 1/(k p^b - l p^a)
    // with the originating vertex pair as the canonical representative.
    for name in ALL {
        let fd = frob(name);
        let g = fd.curve().genus();
        let p = fd.curve().p();
        for i in 0..g as usize {
            let omega = basis(&fd, i);
            for z in prime_field_points(fd.curve()).into_iter().take(3) {
                let seq =
                    ColemanSequence::compute(&fd, &omega, &z, 4, K0Convention::UniformPlusOne)
                        .unwrap();
                let threshold = rat(1, 2 * g as i64 - 2);
                for w in 0..seq.len() - 1 {
                    let d = seq.abscissas()[w + 1] - seq.abscissas()[w];
                    let lam = rat(1, d as i64);
                    if lam >= threshold {
                        continue;
                    }
                    let form = SlopeForm::of(&lam, p, g)
                        .unwrap_or_else(|| panic!("{name}: no form for 1/{d}"));
                    assert_eq!(
                        (form.k, form.ell, form.b, form.a),
                        (
                            seq.k_list()[w + 1],
                            seq.k_list()[w],
                            seq.n_list()[w + 1],
                            seq.n_list()[w]
                        ),
                        "{name}: 1/{d}"
                    );
                }
                for lam in candidate_slopes(&seq) {
                    assert!(SlopeForm::of(&lam, p, g).is_some(), "{name}: {lam}");
                }
            }
        }
    }

    // A single entry yields no candidates.
    let short =
        ColemanSequence::compute(&fd, &basis(&fd, 0), &CurvePointBar::Infinity, 1, K0Convention::UniformPlusOne)
            .unwrap();
    assert!(candidate_slopes(&short).is_empty());
}

#[test]
fn slope_form_enumeration() {
    // General shape, exhaustively for g = 2, p = 5: distinct tuples hit
    // distinct denominators and of() recovers each one.
    let mut seen = HashMap::new();
    for k in 1u64..=3 {
        for ell in 1u64..=3 {
            for a in 0u64..4 {
                for b in (a + 1)..=4 {
                    let d = k * 5u64.pow(b as u32) - ell * 5u64.pow(a as u32);
                    let lam = rat(1, d as i64);
                    let form = SlopeForm::of(&lam, 5, 2)
                        .unwrap_or_else(|| panic!("no form for 1/{d}"));
                    assert_eq!((form.k, form.ell, form.b, form.a), (k, ell, b, a), "1/{d}");
                    assert_eq!(form.lambda(5), lam);
                    assert!(seen.insert(d, (k, ell, b, a)).is_none(), "duplicate D = {d}");
                }
            }
        }
    }

    // Pure vertex reciprocals: the subtraction-free shape is the fallback,
    // except where the general shape also reaches the value (k >= p - 2g + 1,
    // possible since p <= 4g - 2 here) and is preferred as canonical.
    let f5 = SlopeForm::of(&rat(1, 5), 5, 2).unwrap();
    assert_eq!((f5.k, f5.ell, f5.b, f5.a), (1, 0, 1, 0));
    let f10 = SlopeForm::of(&rat(1, 10), 5, 2).unwrap();
    assert_eq!((f10.k, f10.ell, f10.b, f10.a), (1, 3, 2, 1));
    assert_eq!(f10.lambda(5), rat(1, 10));
    let f75 = SlopeForm::of(&rat(1, 75), 5, 2).unwrap();
    assert_eq!((f75.k, f75.ell, f75.b, f75.a), (1, 2, 3, 2));

    // Mixed checks: 1/4 = 1/(5 - 1), 1/3 = 1/(5 - 2), 1/14 = 1/(3*5 - 1).
    let f4 = SlopeForm::of(&rat(1, 4), 5, 2).unwrap();
    assert_eq!((f4.k, f4.ell, f4.b, f4.a), (1, 1, 1, 0));
    let f3 = SlopeForm::of(&rat(1, 3), 5, 2).unwrap();
    assert_eq!((f3.k, f3.ell, f3.b, f3.a), (1, 2, 1, 0));
    let f14 = SlopeForm::of(&rat(1, 14), 5, 2).unwrap();
    assert_eq!((f14.k, f14.ell, f14.b, f14.a), (3, 1, 1, 0));

    // No representation: 1/6 would need l = 4 > 2g - 1; non-reciprocals and
    // integers never qualify.
    assert!(SlopeForm::of(&rat(1, 6), 5, 2).is_none());
    assert!(SlopeForm::of(&rat(2, 5), 5, 2).is_none());
    assert!(SlopeForm::of(&rat(1, 1), 5, 2).is_none());

    // Genus 3 at p = 7: 1/21 has both shapes (21 = 3*7 = 49 - 4*7); the
    // general one is canonical.
    let f21 = SlopeForm::of(&rat(1, 21), 7, 3).unwrap();
    assert_eq!((f21.k, f21.ell, f21.b, f21.a), (1, 4, 2, 1));
    assert_eq!(f21.lambda(7), rat(1, 21));
}

fn synthetic(p: u64, genus: u64, n_list: Vec<u64>, k_list: Vec<u64>) -> ColemanSequence {
    let val_trace = vec![0; *n_list.last().unwrap() as usize + 1];
    ColemanSequence {
        zbar: CurvePointBar::Infinity,
        n_list,
        k_list,
        val_trace,
        p,
        genus,
        certified_precision: 10,
        convention: K0Convention::UniformPlusOne,
    }
}

#[test]
fn integral_valuation_on_computed_sequence() {
    let fd = frob("g2_p5_c");
    let (z, seq) = all_ones_point(&fd, 4).expect("a point with k = 1 throughout");
    assert!(matches!(z, CurvePointBar::FiniteNonWeierstrass { .. }));

    // Vertex brackets 1/(k p^n): value 1 - i.
    match integral_valuation(&seq, &rat(1, 5)).unwrap() {
        IntegralValuation::Exact { value, vertex } => {
            assert_eq!(value, rat(0, 1));
            assert_eq!(vertex, 1);
        }
        other => panic!("1/5: {other:?}"),
    }
    match integral_valuation(&seq, &rat(1, 25)).unwrap() {
        IntegralValuation::Exact { value, vertex } => {
            assert_eq!(value, rat(-1, 1));
            assert_eq!(vertex, 2);
        }
        other => panic!("1/25: {other:?}"),
    }
    // Bracket at the first vertex: the value is lambda itself.
    match integral_valuation(&seq, &rat(1, 3)).unwrap() {
        IntegralValuation::Exact { value, vertex } => {
            assert_eq!(value, rat(1, 3));
            assert_eq!(vertex, 0);
        }
        other => panic!("1/3: {other:?}"),
    }
    // Between segment slopes: 1/20 < 9/40 < 1/4 brackets at vertex 1.
    match integral_valuation(&seq, &rat(9, 40)).unwrap() {
        IntegralValuation::Exact { value, vertex } => {
            assert_eq!(value, rat(1, 8));
            assert_eq!(vertex, 1);
        }
        other => panic!("9/40: {other:?}"),
    }
    // Between 1/20 and 1/100: brackets at vertex 2.
    match integral_valuation(&seq, &rat(1, 30)).unwrap() {
        IntegralValuation::Exact { value, vertex } => {
            assert_eq!(value, rat(-7, 6));
            assert_eq!(vertex, 2);
        }
        other => panic!("1/30: {other:?}"),
    }

    // Slopes themselves leave the value undetermined.
    assert_eq!(
        integral_valuation(&seq, &rat(1, 4)).unwrap(),
        IntegralValuation::IsASlope { left: 0, right: 1 }
    );
    assert_eq!(
        integral_valuation(&seq, &rat(1, 20)).unwrap(),
        IntegralValuation::IsASlope { left: 1, right: 2 }
    );

    // Range guardrails: the threshold 1/(2g-2) and nonpositive slopes.
    assert!(matches!(
        integral_valuation(&seq, &rat(1, 2)),
        Err(ColemanError::LambdaOutOfRange(_))
    ));
    assert!(matches!(
        integral_valuation(&seq, &rat(3, 5)),
        Err(ColemanError::LambdaOutOfRange(_))
    ));
    assert!(matches!(
        integral_valuation(&seq, &rat(0, 1)),
        Err(ColemanError::LambdaOutOfRange(_))
    ));
    assert!(matches!(
        integral_valuation(&seq, &rat(-1, 3)),
        Err(ColemanError::LambdaOutOfRange(_))
    ));

    // A shallow sequence cannot certify a deep bracket.
    let shallow =
        ColemanSequence::compute(&fd, &basis(&fd, 0), &z, 2, K0Convention::UniformPlusOne)
            .unwrap();
    assert!(matches!(
        integral_valuation(&shallow, &rat(1, 30)),
        Err(ColemanError::RangeNotCertified(_))
    ));
    assert!(matches!(
        integral_valuation(&seq, &rat(1, 1_000_000)),
        Err(ColemanError::RangeNotCertified(_))
    ));
}

#[test]
fn bracket_survives_hull_drops() {
    // (3, 0), (15, -1), (25, -2): the middle point lies above the hull of its
    // neighbors, so the polygon is (3, 0) -> (25, -2) with slope 1/11.
    let seq = synthetic(5, 2, vec![0, 1, 2], vec![3, 3, 1]);
    assert_eq!(
        bracket_on_hull(&seq, &rat(1, 11), false).unwrap(),
        IntegralValuation::IsASlope { left: 0, right: 2 }
    );
    match bracket_on_hull(&seq, &rat(1, 5), false).unwrap() {
        IntegralValuation::Exact { value, vertex } => {
            assert_eq!(value, rat(3, 5));
            assert_eq!(vertex, 0);
        }
        other => panic!("1/5: {other:?}"),
    }
    match bracket_on_hull(&seq, &rat(1, 12), false).unwrap() {
        IntegralValuation::Exact { value, vertex } => {
            assert_eq!(value, rat(1, 12));
            assert_eq!(vertex, 2);
        }
        other => panic!("1/12: {other:?}"),
    }

    // Certification against unseen deeper entries: at depth two the next
    // entry could still put a milder slope under 1/30, so the bracket is
    // refused; nothing deeper can reach 1/10.
    let seq = synthetic(5, 2, vec![0, 1], vec![1, 1]);
    assert!(matches!(
        bracket_on_hull(&seq, &rat(1, 30), false),
        Err(ColemanError::RangeNotCertified(_))
    ));
    match bracket_on_hull(&seq, &rat(1, 10), false).unwrap() {
        IntegralValuation::Exact { value, vertex } => {
            assert_eq!(value, rat(-1, 2));
            assert_eq!(vertex, 1);
        }
        other => panic!("1/10: {other:?}"),
    }
}

#[test]
fn exclusion_above_threshold_and_basis_branches() {
    let fd = frob("g2_p5_c");
    let z = finite_points(fd.curve()).into_iter().next().unwrap();

    // lambda = 1 is unramified-compatible: honestly not excluded.
    match unramified_test(&fd, &z, &rat(1, 1), 8).unwrap() {
        Verdict::NotExcluded(w) => assert!(!w.note.is_empty()),
        v => panic!("lambda = 1: {v:?}"),
    }

    // At or above 1/(2g-2) a nonvanishing differential pins the valuation.
    for lam in [rat(1, 2), rat(3, 4), rat(7, 10)] {
        match unramified_test(&fd, &z, &lam, 8).unwrap() {
            Verdict::Excluded(cert) => {
                assert!(matches!(
                    cert.branch,
                    ExclusionBranch::NonVanishingDifferential { .. }
                ));
                assert_eq!(cert.valuation, lam);
                assert!(!cert.valuation.is_integer());
            }
            v => panic!("{lam}: {v:?}"),
        }
    }

    // Below the threshold a basis differential with a non-integer bracket
    // fails first: at this point omega_0 has k_0 = 1, so the bracket value at
    // lambda = 1/3 is 1/3 itself.
    match unramified_test(&fd, &z, &rat(1, 3), 8).unwrap() {
        Verdict::Excluded(cert) => {
            assert_eq!(cert.valuation, rat(1, 3));
            assert_eq!(cert.vertex, (0, 1, 0));
            assert!(!cert.differential.is_empty());
        }
        v => panic!("1/3: {v:?}"),
    }

    // Weierstrass and infinity discs run through the same machinery.
    for z in prime_field_points(fd.curve()) {
        if matches!(z, CurvePointBar::FiniteNonWeierstrass { .. }) {
            continue;
        }
        for lam in [rat(1, 3), rat(2, 3)] {
            match unramified_test(&fd, &z, &lam, 8).unwrap() {
                Verdict::Excluded(_) => {}
                v => panic!("{z:?} {lam}: {v:?}"),
            }
        }
    }
}

#[test]
fn exclusion_combination_branch_fires() {
    // At an all-ones point both basis polygons have 1/(p-1) and 1/(p^2-p) as
    // certified slopes, so single differentials cannot refute those lambdas;
    // the matched-leading-term combination must.
    let mut fired = false;
    for name in ["g2_p5_c", "g2_p7_c"] {
        let fd = frob(name);
        let p = fd.curve().p() as i64;
        let Some((z, _)) = all_ones_point(&fd, 3) else { continue };
        for lam in [rat(1, p - 1), rat(1, p * p - p)] {
            match unramified_test(&fd, &z, &lam, 8).unwrap() {
                Verdict::Excluded(cert) => {
                    if let ExclusionBranch::Combination { description } = &cert.branch {
                        assert!(!description.is_empty());
                        fired = true;
                    }
                }
                v => panic!("{name} {lam}: {v:?}"),
            }
        }
    }
    assert!(fired, "no combination certificate was ever needed");
}

#[test]
fn exclusion_sweep_denominators_up_to_twenty() {
    let fd = frob("g2_p5_c");
    let z = finite_points(fd.curve()).into_iter().next().unwrap();
    let mut tested = 0;
    for d in 2i64..=20 {
        for c in 1..d {
            let lam = rat(c, d);
            if lam.denom() != &BigInt::from(d) {
                continue; // not in lowest terms
            }
            match unramified_test(&fd, &z, &lam, 8).unwrap() {
                Verdict::Excluded(cert) => assert!(!cert.valuation.is_integer()),
                Verdict::NotExcluded(w) => {
                    panic!("{lam} not excluded: {}", w.note)
                }
            }
            tested += 1;
        }
    }
    assert_eq!(tested, 127);
}

#[test]
fn exclusion_at_a_quadratic_point() {
    let fd = frob("g2_p5_a");
    let curve = fd.curve();
    let p = curve.p();
    let ctx2 = PadicContext::new(p, 2, 1).unwrap();
    let elems: Vec<PadicNumber> = (0..p * p)
        .map(|i| ctx2.from_coeffs(vec![BigUint::from(i % p), BigUint::from(i / p)], 1))
        .collect();
    let mut found = None;
    'search: for a in &elems {
        if a.coeffs()[1].is_zero() {
            continue; // want a genuinely quadratic x-coordinate
        }
        let fa = eval_fbar(curve, a);
        if fa.is_zero() {
            continue;
        }
        for b in &elems {
            if !b.is_zero() && b.mul(b).sub(&fa).is_zero() {
                found = Some(CurvePointBar::FiniteNonWeierstrass { a: a.clone(), b: b.clone() });
                break 'search;
            }
        }
    }
    let z = found.expect("a quadratic residue point exists");
    assert!(z.validate(curve));

    let ks = k_sequence(&fd, &basis(&fd, 0), &z, 2, K0Convention::UniformPlusOne).unwrap();
    assert!(ks.iter().all(|&k| (1..=3).contains(&k)));

    for lam in [rat(2, 7), rat(3, 5)] {
        match unramified_test(&fd, &z, &lam, 8).unwrap() {
            Verdict::Excluded(cert) => assert!(!cert.valuation.is_integer()),
            v => panic!("{lam}: {v:?}"),
        }
    }
}

#[test]
fn sequence_input_guards() {
    let fd = frob("g2_p5_c");
    let curve = fd.curve();
    let z = finite_points(curve).into_iter().next().unwrap();

    let imprimitive = basis(&fd, 0).mul_by_p_pow(1);
    assert!(matches!(
        ColemanSequence::compute(&fd, &imprimitive, &z, 2, K0Convention::UniformPlusOne),
        Err(ColemanError::NotPrimitive)
    ));

    let ctx = curve.context();
    let mut coords = vec![ctx.zero(); 2 * curve.genus() as usize];
    coords[curve.genus() as usize] = ctx.one();
    let nonholomorphic = CohomologyClass::new(curve, coords);
    assert!(matches!(
        ColemanSequence::compute(&fd, &nonholomorphic, &z, 2, K0Convention::UniformPlusOne),
        Err(ColemanError::NotHolomorphic)
    ));

    // x = 0 is not on this curve with y = 0 unless f(0) = 0.
    let ctx1 = PadicContext::new(curve.p(), 1, 1).unwrap();
    let bogus = CurvePointBar::FiniteNonWeierstrass { a: ctx1.from_u64(0), b: ctx1.from_u64(0) };
    assert!(!bogus.validate(curve));
    assert!(matches!(
        ColemanSequence::compute(&fd, &basis(&fd, 0), &bogus, 2, K0Convention::UniformPlusOne),
        Err(ColemanError::InvalidResiduePoint)
    ));

    assert!(matches!(
        unramified_test(&fd, &z, &rat(5, 4), 8),
        Err(ColemanError::LambdaOutOfRange(_))
    ));
    assert!(matches!(
        unramified_test(&fd, &z, &rat(0, 1), 8),
        Err(ColemanError::LambdaOutOfRange(_))
    ));
}

fn horner(coeffs: &[PadicNumber], x: &PadicNumber) -> PadicNumber {
    let mut acc = x.context().zero();
    for c in coeffs.iter().rev() {
        acc = acc.mul(x).add(c);
    }
    acc
}

#[test]
fn disc_expansion_is_a_termwise_primitive() {
    for name in ["g2_p5_c", "g2_p5_a", "g3_p7_b"] {
        let fd = frob(name);
        let curve = fd.curve();
        let ctx = curve.context();
        // A center over x = 0 makes the leading coefficient of x^i dx/2y an
        // exact zero that the computation can only bound, so the polygon there
        // honestly starts with a pessimistic point. Use a nonzero x-residue.
        let z = finite_points(curve)
            .into_iter()
            .find(|z| match z {
                CurvePointBar::FiniteNonWeierstrass { a, .. } => !a.is_zero(),
                _ => false,
            })
            .unwrap();
        for i in 0..curve.genus() as usize {
            let omega = basis(&fd, i);
            let d = disc_expansion(&fd, &z, &omega, 40)
                .unwrap_or_else(|e| panic!("{name} omega_{i}: {e}"));

            // dS/dT must equal the direct local expansion of omega, termwise.
            let coeffs = d.coefficients();
            let w = d.omega_series();
            assert!(coeffs[0].is_zero_at_precision(), "{name}: S(0) = 0");
            assert_eq!(coeffs.len(), 40);
            assert_eq!(w.len(), 39);
            for m in 1..40 {
                let lhs = coeffs[m].mul_padic(&ctx.from_u64(m as u64));
                let diff = lhs.sub(&ScaledPadic::from_padic(w[m - 1].clone()));
                assert!(
                    diff.is_zero_at_precision(),
                    "{name} omega_{i}: coefficient {m}"
                );
            }

            // The constant term of the omega expansion is h(x0)/y0.
            let (x0, y0) = d.center();
            let h = horner(&omega.coords()[..curve.genus() as usize], x0);
            assert!(h.mul(&y0.invert().unwrap()).sub(&w[0]).is_zero(), "{name} omega_{i}");

            // y0 is the Hensel square root of f(x0).
            assert!(y0.mul(y0).sub(&horner(curve.f_padic(), x0)).is_zero(), "{name}");

            // Integrality pattern of the denominators.
            d.check_support_law().unwrap_or_else(|e| panic!("{name} omega_{i}: {e}"));

            // The polygon of the truncation starts with the tower vertices
            // (k_j p^(n_j), -j) that fall inside the window.
            let seq = ColemanSequence::compute(&fd, &omega, &z, d.n_list().len(), K0Convention::UniformPlusOne)
                .unwrap();
            assert_eq!(seq.n_list(), d.n_list(), "{name} omega_{i}");
            assert_eq!(seq.k_list(), d.k_list(), "{name} omega_{i}");
            let predicted: Vec<(u64, BigRational)> = seq
                .abscissas()
                .iter()
                .enumerate()
                .filter(|(_, &a)| a < 40)
                .map(|(j, &a)| (a, rat(-(j as i64), 1)))
                .collect();
            let poly = d.polygon(None).unwrap();
            let verts = poly.vertices();
            assert!(verts.len() >= predicted.len(), "{name} omega_{i}");
            assert_eq!(verts[..predicted.len()], predicted[..], "{name} omega_{i}");

            // The two bracket routes agree on the shared window.
            let g = fd.curve().genus() as i64;
            for lam in [rat(1, 4 * g - 3), rat(2, 8 * g - 1)] {
                let from_seq = integral_valuation(&seq, &lam);
                let from_poly = poly.value_valuation(&lam).unwrap();
                match (from_seq, from_poly) {
                    (
                        Ok(IntegralValuation::Exact { value, .. }),
                        crate::series::ValueValuation::Exact(v),
                    ) => assert_eq!(value, v, "{name} omega_{i} {lam}"),
                    (Ok(IntegralValuation::IsASlope { .. }), crate::series::ValueValuation::IsASlope) => {}
                    (sq, pl) => panic!("{name} omega_{i} {lam}: {sq:?} vs {pl:?}"),
                }
            }
        }
    }
}

#[test]
fn disc_expansion_below_p_needs_no_corrections() {
    let fd = frob("g2_p5_c");
    let curve = fd.curve();
    let ctx = curve.context();
    let z = finite_points(curve).into_iter().next().unwrap();
    let omega = basis(&fd, 0);
    let d = disc_expansion(&fd, &z, &omega, 4).unwrap();
    // All denominators m < p are units: the coefficients are integral.
    for (m, c) in d.coefficients().iter().enumerate().skip(1) {
        match c.valuation() {
            ScaledValuation::Known(v) => assert!(v >= 0, "coefficient {m}"),
            ScaledValuation::AtLeast(v) => assert!(v >= 0, "coefficient {m}"),
        }
        let lhs = c.mul_padic(&ctx.from_u64(m as u64));
        let diff = lhs.sub(&ScaledPadic::from_padic(d.omega_series()[m - 1].clone()));
        assert!(diff.is_zero_at_precision(), "coefficient {m}");
    }
}

#[test]
fn disc_expansion_center_guards() {
    let fd = frob("g2_p5_c");
    let omega = basis(&fd, 0);
    assert!(matches!(
        disc_expansion(&fd, &CurvePointBar::Infinity, &omega, 8),
        Err(ColemanError::UnsupportedDisc(_))
    ));
    if let Some(w) = prime_field_points(fd.curve())
        .into_iter()
        .find(|z| matches!(z, CurvePointBar::Weierstrass { .. }))
    {
        assert!(matches!(
            disc_expansion(&fd, &w, &omega, 8),
            Err(ColemanError::UnsupportedDisc(_))
        ));
    }
}
