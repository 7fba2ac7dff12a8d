//! Cybersickness assessment toolkit.
//!
//! Scoring for the CSQ-VR, SSQ, VRSQ and MSSQ questionnaires, adaptive span
//! and reaction-time task engines, and the validation pipeline built on top:
//! internal consistency, convergent validity, two-SD decline detection, ROC
//! cut-off selection, ordered-quantile normalisation and a random-intercept
//! mixed model for pupil size. A seeded cohort simulator supplies ground truth
//! and an event-sourced session layer drives live administration.

pub mod analysis;
pub mod domain;
pub mod io;
pub mod psychometrics;
pub mod scoring;
pub mod session;
pub mod simulate;
pub mod stats;
pub mod tasks;

pub use domain::*;
