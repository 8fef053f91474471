//! Polynomial differential forms, smooth test forms and simplex quadrature.

pub mod form;
pub mod poly;
pub mod quadrature;
pub mod random;
pub mod smooth;

pub use form::{indices, merge_sign, subsets, Form, Subset};
pub use poly::{monomials, Exps, Poly, MAX_VARS};
pub use smooth::SmoothForm;
