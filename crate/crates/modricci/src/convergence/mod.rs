//! Segment inequality, excess and harmonic replacement, splitting maps,
//! finite metric spaces and cone rigidity.

mod ball;
pub mod cone;
pub mod excess;
pub mod metric;
pub mod segment;
pub mod splitting;

pub use cone::cone_rigidity_suite;
pub use excess::{excess_suite, harmonic_approximation, HarmonicDisk, HarmonicMeasures};
pub use metric::{
    cone_distance, cone_space, gh_distance, gh_upper_exhaustive, gh_upper_search, sample_space, FiniteMetricSpace, GhBounds,
    Region,
};
pub use segment::{segment_inequality_mc, RadialRegion, SegmentReport};
pub use splitting::{splitting_report, SplittingReport};
