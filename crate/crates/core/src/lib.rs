//! Majorants with controlled Hilbert transforms: exact piecewise-polynomial
//! calculus, the modified Hilbert transform, dyadic majorant construction,
//! admissibility certificates and the explicit counterexample families.

pub mod admissibility;
pub mod cli;
pub mod funcmodel;
pub mod hilbert;
pub mod logscalar;
pub mod nazarov;
pub mod poly;
pub mod quad;
pub mod zoo;
