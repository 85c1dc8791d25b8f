//! Combinatorial structures on `[n]`: split/matching pairs `(σ, S)` and the
//! events `I_ν`, `J_ν`; robust families of such pairs; quasirandomness of
//! switching sets; T-sets and well-spread families.

mod events;
mod quasirandom;
mod tsets;

pub use events::{event_i, event_j, generate_robust_family, robust_nu, RobustFamily, SplitMatchPair};
pub use quasirandom::{
    check_q_doubleprime, check_q_h, check_q_hr, check_q_prime, eta_for_q, CheckReport, QhrReport, QuasirandomParams,
    DEFAULT_CHECK_BUDGET, MAX_WITNESSES,
};
pub use tsets::{
    build_t_sets, check_restriction_degeneracy, check_well_spread, DegeneracyParams, DegeneracyReport, TSets, WellSpreadReport,
};
