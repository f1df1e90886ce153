//! Fixtures shared by the benchmarks under `benches/`.

use warpflow_core::flow::FlowSetup;
use warpflow_core::{FlowConfig, GraphState, GridMode, InitialData};

/// A perturbed sphere on the given grid, ready to step.
pub fn fixture(mode: GridMode, resolution: usize, k: usize, m: f64) -> (FlowSetup, GraphState) {
    let config = FlowConfig::new(2, m, k, mode, resolution, InitialData::CosBump { rho0: 3.0, eps: 0.3 }, 1.0);
    let setup = FlowSetup::new(&config).expect("valid benchmark config");
    let state = config.init.sample(&setup.grid);
    (setup, state)
}
