//! Closed-form error analysis: fading-averaged pairwise error probabilities,
//! union bounds on the BER and diversity orders, plus an adaptive-quadrature
//! oracle for the closed forms.

mod bounds;
mod diversity;
mod integrals;

pub use bounds::{
    ber_bound_ncc, ber_bound_parc, pattern_prob_parc, upep_ncc, upep_parc, BerBoundResult,
};
pub use diversity::{asymptotic_diversity, instantaneous_diversity, WeightPattern};
pub use integrals::{
    i0, i1, i2, integrate, max_exponential_mgf, mgf_quadrature_oracle, q_function, MgfFactor,
    SelectedFactor, ORACLE_REL_TOL,
};
