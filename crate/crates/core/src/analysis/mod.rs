//! Feasibility lattices and statistical checks on sampled batches.

pub mod contour;
pub mod csv_out;
pub mod excursion;
pub mod feasible;
pub mod report;
pub mod stats;
pub mod summary;
pub mod tail;

pub use contour::{
    crt_height_gof, original_contour_scale, reduced_contour_scale, rescaled_contour, sup_distance,
    HeightGof, CONTOUR_GRID, MIN_GOF_REPLICATES,
};
pub use csv_out::{write_contour_csv, write_reports_csv, write_tail_csv};
pub use excursion::{dyck_discrepancy, dyck_heights, excursion_max_cdf, excursion_max_mean};
pub use feasible::{feasible_sizes, is_feasible, FeasibleSizes};
pub use report::{
    common_size, concentration_report, largest_blob_and_outdegree, BlobTargets,
    ConcentrationConfig, StatReport,
};
pub use summary::TreeSummary;
pub use tail::{default_grid, heights_within_size, tail_curve, TailConfig, TailCurve};
