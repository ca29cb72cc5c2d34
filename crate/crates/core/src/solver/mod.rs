mod interface;
mod pcg;

pub use interface::{bddc_solve, reduce_to_interface, InterfaceProblem};
pub use pcg::{lanczos_condition_estimate, pcg, pcg_observed, IterationRecord, PcgConfig, PcgReport, Stopping};
