//! Numerical machinery for totally biharmonic hypersurfaces.
//!
//! The crate models two families of ambient spaces -- space forms `N^n(rho)`
//! and 3-dimensional Bianchi-Cartan-Vranceanu spaces `N(a,b)` -- and provides
//! the curve- and hypersurface-level checks needed to verify, numerically,
//! which catalog surfaces are totally biharmonic (every intrinsic geodesic is
//! a biharmonic curve of the ambient space).

pub mod catalog;
pub mod config;
pub mod curves;
pub mod error;
pub mod fd;
pub mod helices;
pub mod hypersurfaces;
pub mod report;
pub mod spaces;

pub use config::RunConfig;
pub use error::{GeomError, Result};
