//! Core algorithms for an FDD multi-user MIMO downlink laboratory.
//!
//! Everything in this crate is deterministic, pure computation over dense
//! matrices: complex linear algebra, a reverse-mode autodiff tape, seeded
//! channel generation, classical precoder baselines (ZF/RZF/WMMSE), the
//! conventional limited-feedback chain (orthogonal pilots, LMMSE, Lloyd
//! codebooks), the learned pilot/quantizer/precoder networks, and their
//! training loops.
//!
//! The crate is `no_std`-compatible (`alloc` required); file formats, CSV
//! emission, timing, and the command-line harness live in the companion
//! `mumimo-lab` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod autodiff;
pub mod channels;
pub mod feedback;
pub mod matrix;
pub mod network;
pub mod pipeline;
pub mod precoding;
pub mod rng;
pub mod training;

pub use matrix::{ComplexMatrix, LinalgError, RealMatrix};
