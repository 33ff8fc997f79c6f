//! Plane and multitype trees, their encodings, and the blob operations.

pub mod codec;
pub mod enumerate;
pub mod lca;
pub mod multitype;
pub mod ops;
pub mod plane;

pub use lca::LcaIndex;
pub use multitype::{
    degree_sequence, outdegree_counts, DegreeSequence, FlatTree, MarkedFlatTree, MultitypeTree,
};
pub use ops::{blobs, blow_up, flatten, flatten_tree, reduce, Blobs, Decoration};
pub use plane::{PlaneTree, NO_PARENT};
