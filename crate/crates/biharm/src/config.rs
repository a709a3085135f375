//! Run configuration shared by the CLI and the verification drivers.

use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub seed: u64,
    /// Finite-difference step for metric/Christoffel derivatives.
    pub fd_step: f64,
    pub geodesic_count: usize,
    pub geodesic_length: f64,
    pub geodesic_step: f64,
    pub pointwise_samples: usize,
    /// Per-check tolerance overrides, keyed by check name.
    pub tol: BTreeMap<String, f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            fd_step: 1e-4,
            geodesic_count: 16,
            geodesic_length: 3.0,
            geodesic_step: 5e-3,
            pointwise_samples: 12,
            tol: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if self.fd_step <= 0.0 || self.geodesic_step <= 0.0 || self.geodesic_length <= 0.0 {
            return Err(crate::GeomError::Parameter(
                "steps and lengths must be positive".into(),
            ));
        }
        if self.tol.values().any(|&t| t <= 0.0) {
            return Err(crate::GeomError::Parameter(
                "tolerances must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Tolerance for a named check, falling back to the built-in default.
    pub fn tolerance(&self, check: &str, default: f64) -> f64 {
        self.tol.get(check).copied().unwrap_or(default)
    }
}
