//! Manufactured solutions, error norms and convergence studies.

pub mod beta;
pub mod cases;
pub mod norms;
pub mod study;

pub use beta::beta_limit_difference;
pub use cases::{manufactured, ManufacturedCase, CASE_IDS};
pub use norms::{error_h1_broken, error_l2, facet_jumps, jump_norm, ERROR_QUADRATURE_DEGREE};
pub use study::{exponent_sweep, fit_rate, log_log_slope, write_csv, write_svg, ErrorKind, StudyRecord, SweepConfig, SweepRow};
