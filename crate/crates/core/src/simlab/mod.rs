// SPDX-License-Identifier: MIT OR Apache-2.0

//! Simulation scenarios, benchmark metrics and the sparse detection
//! boundary.

mod bench;
mod scenario;
mod sparse;

pub use bench::{run_benchmark, run_replicates, DetectionMetrics, MethodConfig, ReplicateOutcome};
pub use scenario::{
    example1_spec, interval_hit, make_example1, MeanSegment, ScenarioSpec, Simulated,
    EXAMPLE1_INTERVALS, EXAMPLE1_LEN, EXAMPLE1_SIGMA,
};
pub use sparse::{
    affected_count, detection_boundary, make_sparse_panel, sparse_scenario, SparseScenario,
};
