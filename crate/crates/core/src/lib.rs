//! Envelope functionals, dominated convergence and minimax convexification
//! for functions sampled on a grid in `[0, 1]`.

pub mod convexify;
pub mod corpus;
pub mod domain;
pub mod dominated;
pub mod error;
pub mod functionals;

pub use convexify::{
    build_convexification, solve_minimax, solve_minimax_oracle, solve_minimax_with,
    verify_convexification, Backend, ConvexificationStep, ConvexifyOptions, DualCertificate,
    MinimaxSolution, SimplexWeights,
};
pub use corpus::CorpusId;
pub use domain::{FunctionSequence, Grid, SampledFunction};
pub use dominated::{dini_certify, lemma2_run, theorem1_report, DiniVerdict};
pub use error::{Error, Result};
pub use functionals::{envelope, greatest_lipschitz_minorant, PositiveFunctional, SignedFunctional};
