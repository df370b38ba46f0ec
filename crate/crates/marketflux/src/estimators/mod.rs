//! Recovery of tail exponents, dispersion scaling, multifractal spectra, volatility
//! distributions and conditional statistics from simulated or ingested series.

pub mod closure;
pub mod conditional;
pub mod feedback;
pub mod fit;
pub mod scaling;
pub mod tail;
pub mod volatility;

pub use closure::{volume_closure, VolumeClosure};
pub use conditional::{conditional_bivariate_stats, conditional_stats_from_pairs, ConditionalRow, ConditionalTable};
pub use feedback::{alpha_persistence, local_feedback_index, regime_labels, windowed_alpha, FeedbackPoint, Persistence};
pub use scaling::{
    aggregate, dispersion_scaling, dispersion_scaling_pooled, generalized_hurst, structure_functions,
    structure_functions_pooled, DispersionFit, DispersionPoint, StructureFit,
};
pub use tail::{hill_tail, TailFit};
pub use volatility::{
    generalized_volatility, universal_volatility_pdf, volatility_distribution, FiniteVolatility,
    VolatilityDistFit, VolatilityDistribution,
};
