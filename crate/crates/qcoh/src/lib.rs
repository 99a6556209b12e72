//! Exact and arbitrary-precision computations for toric orbifolds:
//! combinatorics of stacky fans, inertia-sector cohomology with exact
//! localization, Gamma-class integral structures, mirror hypergeometric
//! series, the P^1 tt* metric expansion, and integral periods.

pub mod exact;
pub mod toric;
pub mod cohomology;
pub mod classes;
pub mod mirror;
pub mod ttstar;
pub mod periods;
