//! Numerical laboratory for surfaces with negative extrinsic curvature in
//! pinched 3-manifolds, seen through their third fundamental form.
//!
//! The crate is organised bottom-up:
//!
//! - [`ambient`]: 3-metrics on a chart box, Christoffel symbols, Riemann
//!   tensor, sectional curvature and its extremes.
//! - [`immersion`]: surface patches, fundamental forms, shape operator,
//!   Gauss and Codazzi residuals.
//! - [`connection`]: the dual connection `B⁻¹∇B`, its torsion and curvature,
//!   the pinching constants and the hypothesis verdicts.
//! - [`asymptotics`]: asymptotic frame, rate formulas, asymptotic traces and
//!   the coordinate-net expansion check.
//! - [`curves`]: geodesics, parallel transport, geodesic curvature,
//!   Jacobi-type fields, Gauss–Bonnet and the deformation-rate formula.
//! - [`odelab`]: the scalar ODE constructions and the 2×2 spiral spectrum.
//! - [`gallery`]: ready-made metrics, patches and connections with closed
//!   form reference fields, plus the virtual third form construction.
//! - [`cli`]: the command-line front end used by the `efimov-lab` binary.
//!
//! Runnable walkthroughs live in `examples/`; start with
//! `cargo run --example hypothesis_verdicts`.

// `!(x > 0.0)` is the NaN-rejecting form; tensor loops index by design.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod ambient;
pub mod asymptotics;
pub mod cli;
pub mod connection;
pub mod curves;
pub mod error;
pub mod expr;
pub mod gallery;
pub mod immersion;
pub mod jet;
pub mod odelab;
pub mod report;

pub use error::{Error, Result};
