//! Real-arithmetic encoding of monitoring problems.

mod encode;
mod layout;
mod term;

pub use encode::{
    encode_instant, quantifier_polarity, shake_delta, shake_eps, time_bindings, transform_act, transform_car_word,
    transform_d_act, transform_delay, transform_globally, transform_globally_robust, transform_init, transform_word,
    Logic, Mode, MonitorEncoding, Polarity, Query, SpatialContext, SpatialVars, NO_LANE,
};
pub use layout::{CarLayout, DataVars, PerturbedVars, VarLayout};
pub use term::{Rcf, Term};
