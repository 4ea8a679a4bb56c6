//! Shape complementarity analysis for arbitrary 2D/3D solids.
//!
//! Pipeline: boundary solids -> complex skeletal-density affinity fields ->
//! cross-correlation scores over relative rigid poses -> FFT translation
//! sweeps and gradient-based pose refinement.

pub mod affinity;
pub mod correlation;
pub mod geometry;
pub mod math;
pub mod search;
pub mod shapes;

pub use num_complex::Complex64;
