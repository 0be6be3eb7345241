//! Exact p-adic machinery for studying rational points on odd hyperelliptic curves:
//! unramified p-adic arithmetic, p-derivations and length-2 Witt vectors, Newton
//! polygons with certified regions, Frobenius and Verschiebung on de Rham cohomology,
//! Verschiebung-iteration slope analysis on residue discs, and explicit point-count
//! bound formulas.
//!
//! All arithmetic is exact: big integers modulo p^N with explicit precision
//! bookkeeping, and exact rationals for polygon data. Nothing here uses floats
//! except the numeric sanity check on Weil numbers.

pub mod bounds;
pub mod coleman;
pub mod derham;
pub mod fixtures;
pub mod fp;
pub mod padic;
pub mod series;
pub mod witt;
