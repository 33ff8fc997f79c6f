//! Random generation of Bienaymé trees: unconditioned, conditioned on size or
//! on type counts, with prescribed degrees, decorations and spine trees.

pub mod batch;
pub mod blob;
pub mod compiled;
pub mod cycle;
pub mod decoration;
pub mod exact;
pub mod rejection;
pub mod rng;
pub mod spine;
pub mod unconditioned;

pub use batch::{
    read_batch_trees, read_manifest, replay, run_batch, write_batch, BatchRequest, BatchResult,
    Manifest, Method, Outcome, MANIFEST_FILE, TREES_FILE,
};
pub use blob::{simulate_blob, Blob, BlobClass, BlobTable, SizeBiasedBlobSampler};
pub use compiled::CompiledFamily;
pub use cycle::{rotation_index, sample_degree_sequence_tree, valid_rotations};
pub use decoration::{sample_decoration, sample_decoration_compiled};
pub use exact::{sample_conditioned_exact, BlobMethod, ExactOptions, ExactParts, ExactSampler};
pub use rejection::{
    sample_by_type, sample_by_type_counted, sample_conditioned_rejection,
    sample_conditioned_rejection_counted,
};
pub use rng::{RngStream, SampleBudget};
pub use spine::{sample_spine_tree, SpineSampler};
pub use unconditioned::sample_unconditioned;
