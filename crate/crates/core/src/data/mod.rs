//! Image loading, labeled datasets and the synthetic rotated-object generator.

mod dataset;
mod image;
mod synth;

pub use self::dataset::{load_dataset, natural_cmp, parse_coil_name, trailing_number, LabeledDataset};
pub use self::image::{load_image, save_pgm, GrayImage};
pub(crate) use self::image::write_pgm_bytes;
pub use self::synth::{synth_rotated_set, BACKGROUND};
