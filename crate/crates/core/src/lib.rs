/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod error;
pub mod fourier;
pub mod group;
pub mod growth;
pub mod heat;
pub mod lengths;
pub mod linalg;
pub mod sample;

pub use error::{Error, Result};
pub use fourier::{Cocycle, FourierElement, PowerOptions};
pub use group::{Ball, FiniteGroup, Group, GroupElement, GroupSpec};
pub use lengths::{Length, LengthSpec};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/groups.md")]
    mod groups {}
    #[doc = include_str!("../../../book/src/lengths.md")]
    mod lengths {}
    #[doc = include_str!("../../../book/src/fourier.md")]
    mod fourier {}
    #[doc = include_str!("../../../book/src/heat.md")]
    mod heat {}
    #[doc = include_str!("../../../book/src/content.md")]
    mod content {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
