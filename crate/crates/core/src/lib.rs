//! Canonical heights and local escape-rate functions for polynomial maps over ℚ.
//!
//! The crate is split into layers:
//!
//! * [`arith`]: exact rationals, places of ℚ, absolute values, Weil heights.
//! * [`poly`]: exact and complex polynomials, the critical-point normal form,
//!   bad reduction and escape radii.
//! * [`heights`]: certified local Green's functions, critical escape rates and
//!   canonical heights computed by two independent methods.
//! * [`roots`]: complex root finding for fixed points and pre-images.
//! * [`harness`]: numerical checks of the explicit inequalities behind the
//!   lower bound on canonical heights, plus the experiments.

pub mod arith;
pub mod error;
pub mod harness;
pub mod heights;
pub mod poly;
pub mod roots;

pub use arith::{LogCombination, Place, Rational};
pub use error::{Error, Result};
pub use heights::{BoundedValue, OrbitRecord, OrbitStatus};
pub use poly::{NormalForm, PolyC, PolyQ};
pub use roots::RootSet;
