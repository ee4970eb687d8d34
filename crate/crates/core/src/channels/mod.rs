//! Kraus-operator channel algebra and the named channels.

pub mod helper;
mod kraus;
pub mod named;

pub use helper::{
    controlled_weyl_isometry, helper_apply, helper_apply_ensemble, helper_map, helper_map_pure, swap_isometry, Flag,
    HelperIsometry,
};
pub use kraus::{
    apply, apply_on_subsystems, apply_with, complementary, compose, flagged_mixture, make_channel, tensor,
    FlaggedBranch, KrausChannel,
};
pub use named::{
    constant, dephasing, erasure, identity, random_channel, rocket_conditional, rocket_sampled, rocket_unitaries,
    DEFAULT_ROCKET_SAMPLES,
};
