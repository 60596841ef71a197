//! Numerical certificates for comparison geometry on manifolds with
//! `Ric + 1/2 L_V g >= -lambda g` and `|V| <= K / d(., O)^alpha`.
//!
//! Every check evaluates both sides of an inequality on explicit model
//! manifolds and returns a [`Certificate`] with per-sample margins.
//!
//! ```
//! use modricci::models::{build_model, catalog_entry};
//! use modricci::curvature::verify_lower_bound;
//!
//! let model = build_model(&catalog_entry("hyperbolic").unwrap()).unwrap();
//! let cert = verify_lower_bound(&model, &[vec![0.3, 0.0, 0.0]]).unwrap();
//! assert!(cert.pass);
//! assert!(cert.min_margin.abs() < 1e-10);
//! ```

pub mod certificate;
pub mod cli;
pub mod constants;
pub mod convergence;
pub mod curvature;
pub mod error;
pub mod functional;
pub mod geometry;
pub mod models;
pub mod numerics;
pub mod pde;
pub mod radial;

mod book;

pub use certificate::Certificate;
pub use error::{Error, Result};
