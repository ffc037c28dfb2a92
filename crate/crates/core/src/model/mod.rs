//! Channel data model: parameters, molecules, pools and sample sets, plus the
//! sampling-with-replacement channel itself.

mod channel;
pub mod file;
mod molecule;
mod params;

pub(crate) use channel::sample_indexed as channel_sample_indexed;
pub use channel::{draw_indices, empirical_erasure_probability, erasure_fraction, sample_with_replacement};
pub use molecule::{Draw, Molecule, MoleculePool, SampleSet};
pub use params::{derive_params, round_half_up, ChannelParams};
