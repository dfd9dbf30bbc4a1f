//! Planar geometry, the Compute-phase protocol, and distance-graph analysis
//! for near-gathering swarms of oblivious robots with limited visibility.
//!
//! Everything in this crate is pure and allocation-light; it builds without
//! `std` so the protocol kernel can be embedded in constrained targets. The
//! simulator, file formats, and CLI live in the companion `neargather-sim`
//! crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod geometry;
pub mod protocol;

pub use geometry::{ComputeRegions, GeometryError, Point2, RegionId};
pub use protocol::{
    AxisMode, ComputeOutcome, ProtocolError, ProtocolParams, Snapshot, TieBreak,
};
