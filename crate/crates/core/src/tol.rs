//! Numerical slack shared by every check.
//!
//! All bounds are inequalities, so a single absolute slack keeps verdicts
//! deterministic. `COARSESCOPE_TOL` overrides the default at process start.

use std::sync::OnceLock;

pub const DEFAULT_TAU: f64 = 1e-9;
pub const TOL_ENV: &str = "COARSESCOPE_TOL";

static TAU: OnceLock<f64> = OnceLock::new();

/// The active slack τ.
pub fn tau() -> f64 {
    *TAU.get_or_init(|| {
        std::env::var(TOL_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|t| t.is_finite() && *t >= 0.0)
            .unwrap_or(DEFAULT_TAU)
    })
}
