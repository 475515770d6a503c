use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "orls", version, about = "Online reweighted least squares reconstruction for simulated compressive cameras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a random binary mask file.
    Masks(MasksArgs),
    /// Render a synthetic 8-bit test scene.
    Scene(SceneArgs),
    /// Online ORLS reconstruction with a metrics trajectory.
    Reconstruct(ReconstructArgs),
    /// Batch IRLS reconstruction over every mask.
    Batch(BatchArgs),
    /// Print `psnr_db,ssim` of a test image against a reference.
    Metrics(MetricsArgs),
}

#[derive(Args, Debug)]
pub struct MasksArgs {
    #[arg(long)]
    pub side: usize,
    #[arg(long)]
    pub count: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SceneKindArg {
    Shapes,
    Waves,
    Texture,
}

#[derive(Args, Debug)]
pub struct SceneArgs {
    #[arg(long, value_enum, default_value = "shapes")]
    pub kind: SceneKindArg,
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long, default_value_t = 64)]
    pub height: usize,
    /// Write a three-channel PPM instead of a PGM.
    #[arg(long)]
    pub color: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NoiseAt {
    /// Corrupt scene pixels before measurement.
    Scene,
    /// Corrupt each scalar measurement.
    Measurement,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CgStartArg {
    Previous,
    Zero,
}

/// Flags shared by the online and batch solvers. Every flag is optional so a
/// `--manifest` can supply it; explicit flags win.
#[derive(Args, Debug, Default)]
pub struct AcquisitionArgs {
    /// PGM/PPM scene (the clean reference).
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Mask file; its side sets the patch size.
    #[arg(long)]
    pub masks: Option<PathBuf>,
    /// Regularization weight [default: 1 noiseless, 40 noisy].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Weight stabilizer [default: 1e-6].
    #[arg(long)]
    pub delta: Option<f64>,
    /// Gaussian noise standard deviation in intensity units.
    #[arg(long, conflicts_with = "scene_psnr")]
    pub sigma: Option<f64>,
    /// Pick sigma so the noisy scene has this PSNR in dB.
    #[arg(long)]
    pub scene_psnr: Option<f64>,
    /// [default: 0]
    #[arg(long)]
    pub noise_seed: Option<u64>,
    /// [default: scene]
    #[arg(long, value_enum)]
    pub noise_at: Option<NoiseAt>,
    /// Trim the scene to a multiple of the patch size instead of failing.
    #[arg(long)]
    pub crop: bool,
    /// Patch workers; 0 uses all cores [default: 1].
    #[arg(long)]
    pub threads: Option<usize>,
    /// Re-run from a previous manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub common: AcquisitionArgs,
    /// CG relative residual tolerance [default: 1e-5].
    #[arg(long)]
    pub cg_eps: Option<f64>,
    /// CG iteration cap per step [default: 4n].
    #[arg(long)]
    pub cg_max_iter: Option<usize>,
    /// CG initial guess [default: previous].
    #[arg(long, value_enum)]
    pub cg_start: Option<CgStartArg>,
    /// `fixed:N`, `plateau:THRESHOLD:PATIENCE` or `psnr:DB` [default: plateau:0.0001:3].
    #[arg(long)]
    pub stop: Option<String>,
    /// Evaluate metrics every N measurements [default: 1].
    #[arg(long)]
    pub eval_stride: Option<usize>,
    /// Comma-separated percentages of n to save [default: 25,75,100].
    #[arg(long)]
    pub snapshots: Option<String>,
}

#[derive(Args, Debug)]
pub struct BatchArgs {
    #[command(flatten)]
    pub common: AcquisitionArgs,
    /// Outer reweighting iterations [default: 30].
    #[arg(long)]
    pub outer: Option<usize>,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
}
