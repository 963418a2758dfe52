//! Hypervector families and ID-level encoding.

mod encoder;
mod family;
mod hypervector;
pub mod kernels;
pub mod store;

pub use encoder::{quantize_intensity, sign_quantize, Encoder};
#[allow(unused_imports)]
pub(crate) use family::fill_id_row;
pub use family::{gen_id_family, gen_level_family, EncoderConfig, IdFamily, LevelFamily, MultiBitHypervector};
pub use hypervector::Hypervector;
