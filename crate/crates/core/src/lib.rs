//! Betti numbers and Poincaré polynomials of planar and spatial polygon
//! spaces, computed exactly by short-subset enumeration, and Monte Carlo
//! diagnostics of their behaviour for random side lengths.
//!
//! ```
//! use polybetti::{exact, LengthVector};
//!
//! let pentagon = LengthVector::equilateral(5).unwrap();
//! assert_eq!(exact::planar_betti(&pentagon).unwrap().values, vec![1, 8, 1]);
//! assert_eq!(exact::spatial_betti(&pentagon).unwrap().values, vec![1, 5, 1]);
//! ```

pub mod asymptotics;
pub mod error;
pub mod exact;
pub mod model;
pub mod oracle;
pub mod poly;
pub mod quadrature;
pub mod stats;
pub mod stochastic;

pub use error::{Error, Result};
pub use model::{total_betti, Arithmetic, BettiProfile, Kind, LengthVector, SubsetProfile};
pub use poly::PoincarePolynomial;
pub use stochastic::{LengthLaw, McEstimate, MonteCarlo, RandomModel};
