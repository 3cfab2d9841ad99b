//! Outage analysis of an underlay cognitive dual-hop decode-and-forward relay
//! link with TAS/MRC or TAS/SC at each hop and impaired transceivers.
//!
//! * [`analytic`]: closed-form hop CDFs and end-to-end outage, plus a
//!   quadrature oracle of the defining integral.
//! * [`asymptotic`]: high-power/high-gain approximations, diversity and array order.
//! * [`montecarlo`]: an independent channel simulator.
//! * [`specfun`]: gamma-family special functions.

pub mod analytic;
pub mod asymptotic;
mod dd;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod specfun;

pub use analytic::{
    e2e_outage, e2e_outage_robust, gain_cdf_direct, hop_sndr_cdf, hop_sndr_cdf_quadrature,
    hop_sndr_cdf_robust, single_antenna_outage, HopCdf, Method, SeriesExpansion, SeriesTerm,
};
pub use asymptotic::{AsymptoticRegime, ConstantVariant};
pub use dd::DoubleDouble;
pub use error::{OutageError, Result};
pub use model::{
    db_to_linear, linear_to_db, DiversityScheme, HopConfig, SystemConfig, ValidationReport,
};
pub use montecarlo::{estimate_outage, OutageEstimate};
