//! Fixed defining polynomials for the unramified extensions in scope.
//!
//! One monic polynomial per (p, f) with p <= 11 and f <= 4, irreducible mod p,
//! coefficients low-to-high. Shipping a fixed table (rather than searching at
//! runtime) keeps element representations reproducible across runs and machines.

/// Look up the stored defining polynomial for Q_{p^f}. None if out of table range.
pub fn defining_poly(p: u64, f: usize) -> Option<Vec<u64>> {
    let table: &[u64] = match (p, f) {
        (2, 1) => &[1, 1],
        (2, 2) => &[1, 1, 1],
        (2, 3) => &[1, 1, 0, 1],
        (2, 4) => &[1, 1, 0, 0, 1],
        (3, 1) => &[1, 1],
        (3, 2) => &[2, 2, 1],
        (3, 3) => &[1, 2, 0, 1],
        (3, 4) => &[2, 0, 0, 2, 1],
        (5, 1) => &[3, 1],
        (5, 2) => &[2, 4, 1],
        (5, 3) => &[3, 3, 0, 1],
        (5, 4) => &[2, 4, 4, 0, 1],
        (7, 1) => &[4, 1],
        (7, 2) => &[3, 6, 1],
        (7, 3) => &[4, 0, 6, 1],
        (7, 4) => &[3, 4, 5, 0, 1],
        (11, 1) => &[9, 1],
        (11, 2) => &[2, 7, 1],
        (11, 3) => &[9, 2, 0, 1],
        (11, 4) => &[2, 10, 8, 0, 1],
        _ => return None,
    };
    Some(table.to_vec())
}
