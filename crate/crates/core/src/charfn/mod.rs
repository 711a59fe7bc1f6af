//! Characteristic function of the random model: the single-prime factor
//! J(u, v, w), its coefficient tables, and the product Φ̂_rand(u, v).

pub mod coeffs;
pub mod j;
pub mod phi;

pub use coeffs::{b_from_a, b_series, composition_sums, CoefficientTable, Series};
pub use j::{j_fast, j_quadrature, j_series, j_trapezoid, SeriesValue};
pub use phi::{
    aggregated_b, j0_surrogate, phi_hat_expansion, phi_hat_rand, write_phi_grid_csv, ExpansionCoefficients,
    PhiHatModel, PhiHatValue, EXPANSION_RADIUS_SQ,
};
