//! Laplace-transform algebra: separable time profiles, the Caputo-derivative
//! transform rule, and Gaver-Stehfest numerical inversion.

pub mod gamma;
pub mod profile;
pub mod stehfest;

pub use gamma::gamma;
pub use profile::{caputo_laplace, TimeProfile};
pub use stehfest::{stehfest_coefficients, StehfestRule};
