//! Model-free variable screening with Spearman-type rank utilities.
//!
//! * [`rank`]: indicator-count ranks, empirical distribution functions and
//!   the closed-form Spearman coefficient.
//! * [`survival`]: Kaplan–Meier curves, the IPCW event-time distribution and
//!   the conditional-expectation imputation for censored responses.
//! * [`screening`]: per-feature utilities (complete, censored, Pearson
//!   baseline), `d_n` selection, minimum model size and active-set gap.
//! * [`simgen`]: simulation designs and the built-in scenario catalog.
//! * [`bench`]: replication harness and result export.
//!
//! The numeric routines are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the element type to `f64`.

pub mod bench;
pub mod error;
pub mod rank;
pub mod scalar;
pub mod screening;
pub mod simgen;
pub mod survival;

pub use error::{Error, Result};
pub use rank::{ecdf, ranks_indicator, spearman_rho, RankVector};
pub use scalar::Scalar;
pub use screening::{
    active_gap, minimum_model_size, model_size, pearson_sis_scores, select_top, srcs_cen_scores, srcs_scores,
    Method,
};
pub use survival::{impute_distribution, km_censoring_survival, km_event_distribution, km_event_survival};

pub type StepFunction = rank::StepFunction<f64>;
pub type DataMatrix = screening::DataMatrix<f64>;
pub type ScreeningScores = screening::ScreeningScores<f64>;
pub type ActiveSetDiagnostic = screening::ActiveSetDiagnostic<f64>;
pub type SurvivalResponse = survival::SurvivalResponse<f64>;
pub type KaplanMeierCurve = survival::KaplanMeierCurve<f64>;
pub type EventDistribution = survival::EventDistribution<f64>;
pub type ImputedDistribution = survival::ImputedDistribution<f64>;

pub type DataMatrixF32 = screening::DataMatrix<f32>;
pub type ScreeningScoresF32 = screening::ScreeningScores<f32>;
pub type SurvivalResponseF32 = survival::SurvivalResponse<f32>;
