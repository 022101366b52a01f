//! Exact computation of trace invariants in bicategories with shadows:
//! group rings and semiconjugacy classes, Hattori-Stallings traces of
//! twisted matrices and chain maps, and the classical fixed point
//! invariants (Lefschetz number, Reidemeister trace, Nielsen number) of
//! cellular self-maps of low-dimensional CW complexes.

pub mod group;
pub mod ring;
pub mod snf;
