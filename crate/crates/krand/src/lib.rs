//! A desk-scale laboratory for exact time-bounded description complexity.
//!
//! The core is a fixed toy universal machine (KVM-1) small enough that the
//! minimal description length of every short string can be computed by
//! exhaustive program enumeration. On top of the resulting tables the crate
//! builds the incompressible-string census, a Nisan-Wigderson style
//! pseudorandom generator driven by the census bits, a truth-table-reduction
//! derandomization harness, advice-replacement simulations, and
//! instance-checker experiments.

pub mod advice;
pub mod bits;
pub mod census;
pub mod checker;
pub mod derand;
pub mod kvm;
pub mod nwprg;
pub mod rng;

pub use bits::Bitstring;
