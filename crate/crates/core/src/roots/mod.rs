//! Complex root finding: all roots of a polynomial, fixed points, pre-images
//! under iterates, and the pre-image proximity statistic.

mod aberth;
mod preimages;

pub use aberth::{all_roots, RootSet, DEFAULT_ROOT_TOL};
pub use preimages::{
    fixed_points, fixed_points_q, periodic_points, preimages, proximity_statistic, Proximity, PROXIMITY_FLOOR,
};
