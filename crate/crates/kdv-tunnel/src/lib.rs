//! Soliton transmission through the evolving mean field of a rectangular
//! well in the Korteweg-de Vries equation `u_t + 6 u u_x + u_xxx = 0`.
//!
//! The analytic side predicts the shock / plateau / fan geometry of the bare
//! well ([`meanfield`]), the Whitham characteristic speeds behind it
//! ([`whitham`], built on [`elliptic`]), and whether a trial soliton tunnels
//! or is trapped ([`soliton`]). The numerical side ([`sim`], [`tracker`])
//! integrates the full equation and measures the same quantities, and
//! [`harness`] compares the two.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

pub mod elliptic;
pub mod error;
pub mod harness;
pub mod meanfield;
pub mod quadrature;
pub mod scalar;
pub mod selftest;
pub mod sim;
pub mod soliton;
pub mod tracker;
pub mod whitham;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Well = meanfield::WellSpec<f64>;
pub type Boundaries = meanfield::RegionBoundaries<f64>;
pub type Genus1 = whitham::Genus1State<f64>;
pub type Genus2 = whitham::Genus2State<f64>;
pub type Cnoidal = whitham::CnoidalWave<f64>;
pub type Soliton = soliton::SolitonState<f64>;
pub type Plan = soliton::TrajectoryPlan<f64>;
pub type Field = sim::WaveField<f64>;
pub type SimGrid = sim::Grid<f64>;
pub type Config = sim::SolverConfig<f64>;
pub type Track = tracker::TrackPoint<f64>;
pub type Edges = tracker::EdgeSet<f64>;
