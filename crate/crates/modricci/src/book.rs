//! Book chapters compiled as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/models.md")]
pub mod models {}
#[doc = include_str!("../../../book/src/certificates.md")]
pub mod certificates {}
#[doc = include_str!("../../../book/src/radial.md")]
pub mod radial {}
#[doc = include_str!("../../../book/src/functional.md")]
pub mod functional {}
#[doc = include_str!("../../../book/src/pde.md")]
pub mod pde {}
#[doc = include_str!("../../../book/src/convergence.md")]
pub mod convergence {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
