//! The twisted group algebra on finitely supported coefficients, and
//! operator-norm estimates through Cayley-ball truncation.

mod cocycle;
mod element;
mod norm;
mod operator;

pub use cocycle::Cocycle;
pub use element::FourierElement;
pub use norm::{norm_estimate, norm_estimate_on, norm_profile, partial_sum_norm, NormReport, PowerOptions, RadiusNorm};
pub use operator::{compression_matrix, GramCompression, TruncatedOperator};
