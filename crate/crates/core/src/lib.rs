//! Information-theoretic complexity of continuous-time linear stochastic
//! systems, and source codes built from emulating systems.
//!
//! The crate is organised bottom-up:
//!
//! - [`matrix`]: dense kernel (exponential, symmetric eigen, Lyapunov, LU, Cholesky)
//! - [`rdf`]: Gaussian rate distortion by reverse water-filling
//! - [`system`]: linear Itô systems, increment Gramians and exact sample paths
//! - [`complexity`]: rate curves, the stable-system ceiling and sampling-rate planning
//! - [`emulation`]: emulating systems, one-hot and simplex codecs, multinomial emulation
//! - [`cli`]: JSON run configs, demo presets and the command implementations
//!
//! Runnable walkthroughs live under `examples/`.

pub mod cli;
pub mod complexity;
pub mod dataset;
pub mod emulation;
pub mod error;
pub mod lp;
pub mod matrix;
pub mod rdf;
pub mod rng;
pub mod stats;
pub mod system;

pub use complexity::{
    complexity, complexity_ceiling, min_sampling_rate, rate_curve, ComplexityQuery, RateCurve,
    SamplingRequirement,
};
pub use dataset::TrajectoryDataset;
pub use emulation::{
    emulate, endpoint_map, integer_quantize, onehot_compress, simplex_compress, simplex_decompress,
    ActivationSchedule, IntegerCode, SimplexCode, SourceFamily, VectorField,
};
pub use error::{Error, Result};
pub use matrix::{logdet_psd, lu_solve, lyapunov_solve, mat_exp, sym_eig, Matrix, SymmetricEigen};
pub use rdf::{rdf, rdf_logdet_fastpath, GaussianSource, RdfResult};
pub use system::{IncrementDistribution, LinearSystemModel};
