//! Patch-based imaging: image planes and PNM I/O, patch grids, quality
//! metrics, trajectories, stopping rules and the reconstruction pipeline.

mod image;
mod metrics;
mod patches;
mod pipeline;
mod stop;
mod synthetic;
mod trajectory;

pub use image::ImagePlane;
pub use metrics::{format_db, mse, psnr, ssim, SSIM_WINDOW};
pub use patches::{assemble_patches, extract_patches, PatchGrid};
pub use pipeline::{
    observed_scene, reconstruct_batch, reconstruct_online, BatchConfig, BatchOutcome, NoiseInjection,
    OnlineConfig, OnlineOutcome, Snapshot,
};
pub use synthetic::{synthetic_scene, SceneKind};
pub use stop::{should_stop, StopMode, StopRule};
pub use trajectory::{MetricsTrajectory, TrajectoryRecord, TRAJECTORY_CSV_HEADER};
