//! Benchmark laboratory: test functions with ground truth and the
//! experimental protocol around them.

mod functions;
mod protocol;

pub use functions::Benchmark;
pub use protocol::{
    aggregate, latin_hypercube, place_initial_box, place_initial_box_excluding_argmax, run_repetitions,
    AggregatePoint, ExperimentSettings, Placement, INITIAL_BOX_FRACTION,
};
