//! Certified local Green's functions, critical escape rates and canonical
//! heights.

mod arch;
mod bounded;
pub(crate) mod bounds;
mod canonical;
mod caps;
mod padic;
mod record;

pub use arch::{green_arch, green_arch_c, green_arch_with};
pub use bounded::BoundedValue;
pub use bounds::height_defect_bound;
pub use canonical::{
    canonical_height_local_breakdown, canonical_height_local_method, canonical_height_naive_method, critical_escape,
    critical_escape_padic, critical_escape_padic_with, critical_escape_with, is_preperiodic, relevant_primes,
    LocalContribution, LocalHeight, Preperiodicity, PREPERIODIC_STEP_CAP,
};
pub use caps::IterationCaps;
pub use padic::{green_nonarch, green_nonarch_default, green_nonarch_exact, PadicEnclosure};
pub use record::{OrbitPoint, OrbitRecord, OrbitStatus};
