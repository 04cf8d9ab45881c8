//! Inter-RIS signal-focusing codebooks for cooperative reconfigurable
//! intelligent surfaces.
//!
//! Two designs are provided for the codeword that steers the BS signal
//! arriving at one RIS towards another RIS:
//!
//! * a closed-form linear phase gradient focused on the LoS pair
//!   ([`ris::linear_codeword`]), and
//! * a max-min design over all (incident, reflected) multipath pairs, solved
//!   by semidefinite relaxation and leading-eigenvector restoration
//!   ([`sdr::opt_codeword`]).
//!
//! [`scenario`] rebuilds multi-RIS deployments with seeded NLoS rays and
//! [`eval`] produces gain maps, leakage reports and averages.

pub mod codebook;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod io;
pub mod ris;
pub mod scenario;
pub mod sdr;

pub use codebook::{build_codebook, Codebook, CodebookFile, Method};
pub use error::{Error, Result};
pub use geometry::{AngleDirection, ArrayGeometry, CVector, DirectionCosines, Wave};
pub use io::Provenance;
pub use ris::{PhaseVector, RayPair};
pub use scenario::{reference_scenario, Scenario};
pub use sdr::{SdrSolution, DEFAULT_TOL};
