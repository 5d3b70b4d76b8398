#![no_std]
// `Float` supplies the math methods here; when std is in the build graph the
// inherent ones win and the import looks unused.
#![allow(unused_imports)]
// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod design;
pub mod dist;
pub mod error;
pub mod monitor;
pub mod perf;
pub mod rulechain;
pub mod simulate;

pub use error::{Error, Result};
pub use design::{design_limits, DesignSpec, DesignedChart, Side};
pub use dist::ChartParams;
pub use monitor::{gamma_hat, run_signal, PhaseIISubgroup, RunDetector, SignalReport};
pub use rulechain::{build_chain, moments, RuleChain, RunLengthMoments, RunRule};
pub use simulate::{mc_moments, McEstimate, SimConfig};
