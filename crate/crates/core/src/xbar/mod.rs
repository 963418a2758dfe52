//! Behavioral model of a multi-level-cell RRAM crossbar.
//!
//! Cells hold conductances in `[0, g_max]`. Signed weights use differential
//! pairs; hypervector storage packs `n` bipolar components per cell. Reads see
//! Gaussian relaxation noise whose spread depends on the number of levels per
//! cell and the time since programming.

mod array;
mod config;
pub mod emulate;
mod encode;
pub mod measure;
pub mod storage;
mod tile;

pub use array::{CrossbarArray, MvmReadout};
pub use config::{NoiseModel, RramConfig, TimeBucket};
pub use emulate::{crossbar_dot, CrossbarEncoder, CrossbarSearch};
pub use encode::{encode_elementwise, ElementwiseOutput, EncodeMode, IdRow};
pub use measure::{measure_ber, measure_mvm_nmse, BerReport, NmseReport};
pub use storage::{read_hypervector, store_hypervector};
pub use tile::{
    adc_code, adc_voltage, decode_voltage, digitize, line_voltage, map_differential, perturb, CrossbarTile, SenseOutput, TileMode,
};
