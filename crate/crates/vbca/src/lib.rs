//! VBCA: virtual-forces clustering for aerial drone swarms.
//!
//! A single central drone anchors the network while peripheral drones settle
//! around it under two local forces: linear attraction toward the hub and a
//! per-axis inverse-distance repulsion among neighbors. The steady states
//! reproduce the classic electron-pair geometries (linear, trigonal planar,
//! tetrahedral, ...), which maximize union-of-spheres volume coverage while
//! every drone keeps the hub in transmission range.
//!
//! Modules:
//! - [`swarm`]: domain types, parameter validation, seeded initialization
//! - [`forces`]: the force engine and synchronous update loop
//! - [`topology`]: connectivity, steady-state detection, per-step metrics
//! - [`coverage`]: union-of-spheres volume estimation
//! - [`vsepr`]: reference geometries and swarm classification
//! - [`harness`]: scenario runner, sweeps, and file rendering

pub mod coverage;
pub mod error;
pub mod forces;
pub mod harness;
pub mod swarm;
pub mod topology;
pub mod vec3;
pub mod vsepr;

pub use error::{Error, Result};
pub use swarm::{DroneRole, DroneState, SwarmParams, SwarmState};
pub use vec3::{Axis, Vec3};
