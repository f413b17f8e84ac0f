//! Collision-free inspection path planning for a three-UAV triangular
//! formation.
//!
//! The planner evolves an angle-encoded particle swarm over candidate
//! formation-centroid paths, detects narrow passages between obstacle
//! pairs, inserts reconfiguration maneuvers (alignment, rotation, shrink)
//! at the resulting intermediate waypoints, and emits timestamped position
//! and ground-speed command sets for each UAV.

pub mod cost;
pub mod formation;
pub mod iwp;
pub mod pipeline;
mod polyline;
pub mod scenario;
pub mod theta_pso;
pub mod trajectory;

pub use polyline::Polyline3;
