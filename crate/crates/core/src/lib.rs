//! Solver and benchmark harness for the capacitated arc routing problem with
//! time-dependent service costs.
//!
//! Stage one evolves routing plans with a knowledge-guided memetic search
//! ([`memetic::kgma_run`]); stage two picks per-route departure times
//! ([`departure::stage2`]). Everything is generic over the scalar type
//! ([`Scalar`]); the aliases below fix it to `f64` or `f32`.

pub mod departure;
pub mod error;
pub mod evaluation;
pub mod harness;
pub mod init;
pub mod instance;
pub mod localsearch;
pub mod memetic;
pub mod oracle;
pub mod scalar;

#[cfg(test)]
pub(crate) mod testutil;

pub use scalar::Scalar;

pub type Instance64 = instance::Instance<f64>;
pub type Instance32 = instance::Instance<f32>;
pub type Solution64 = evaluation::Solution<f64>;
pub type Solution32 = evaluation::Solution<f32>;
pub type ShortestPaths64 = instance::ShortestPathMatrix<f64>;
pub type ShortestPaths32 = instance::ShortestPathMatrix<f32>;
pub type MemeticParams64 = memetic::MemeticParams<f64>;
pub type MemeticParams32 = memetic::MemeticParams<f32>;

