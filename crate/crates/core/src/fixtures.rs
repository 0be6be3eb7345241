//! Bundled example curves with good reduction at their prime, used by the
//! test suite and the command-line examples. Each JSON file matches the
//! `CurveSpec` exchange format.

use crate::derham::{CurveSpec, DerhamError, HyperellipticCurve};

/// Name and raw JSON of every bundled curve.
pub const CURVES: &[(&str, &str)] = &[
    ("g2_p5_a", include_str!("../fixtures/curves/g2_p5_a.json")),
    ("g2_p5_b", include_str!("../fixtures/curves/g2_p5_b.json")),
    ("g2_p5_c", include_str!("../fixtures/curves/g2_p5_c.json")),
    ("g2_p7_a", include_str!("../fixtures/curves/g2_p7_a.json")),
    ("g2_p7_b", include_str!("../fixtures/curves/g2_p7_b.json")),
    ("g2_p7_c", include_str!("../fixtures/curves/g2_p7_c.json")),
    ("g3_p7_a", include_str!("../fixtures/curves/g3_p7_a.json")),
    ("g3_p7_b", include_str!("../fixtures/curves/g3_p7_b.json")),
];

pub fn load(name: &str) -> Result<HyperellipticCurve, DerhamError> {
    let (_, json) = CURVES
        .iter()
        .find(|(n, _)| *n == name)
        .unwrap_or_else(|| panic!("no bundled curve named {name}"));
    let spec: CurveSpec = serde_json::from_str(json).expect("bundled fixture parses");
    HyperellipticCurve::from_spec(&spec)
}

pub fn load_all() -> Vec<(String, HyperellipticCurve)> {
    CURVES
        .iter()
        .map(|(name, _)| {
            (name.to_string(), load(name).expect("bundled fixture has good reduction"))
        })
        .collect()
}
