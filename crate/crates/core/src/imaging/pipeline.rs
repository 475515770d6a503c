//! Patch-parallel reconstruction of a simulated focal-plane-array
//! acquisition, online (ORLS) or batch (IRLS).
//!
//! Every `(channel, patch)` pair is an independent work unit with its own
//! solver state. Units advance in chunks between evaluation points; at each
//! evaluation the estimates are assembled into an image and scored against
//! the clean scene. Aggregation runs in unit order with integer CG counts,
//! so results do not depend on the worker count.

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::dictionary::{sensing_vector, Dictionary};
use crate::error::{Error, Result};
use crate::linalg::DenseVector;
use crate::scalar::Real;
use crate::sensing::{add_scene_noise, measure_keyed, noise_key, MaskSet, NoiseModel};
use crate::solvers::{irls_batch, MeasurementEvent, OrlsParams, OrlsState, DEFAULT_IRLS_OUTER};

use super::image::ImagePlane;
use super::metrics::{psnr, ssim};
use super::patches::{assemble_patches, extract_patches, PatchGrid};
use super::stop::{should_stop, StopRule};
use super::trajectory::{MetricsTrajectory, TrajectoryRecord};

/// Where simulated noise enters the acquisition.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum NoiseInjection {
    #[default]
    None,
    /// Corrupt the scene pixels before they are measured.
    Scene(NoiseModel),
    /// Corrupt each scalar measurement.
    Measurement(NoiseModel),
}

impl NoiseInjection {
    fn measurement_noise(&self) -> NoiseModel {
        match self {
            NoiseInjection::Measurement(n) => *n,
            _ => NoiseModel::noiseless(),
        }
    }
}

/// Scene as the sensor sees it: with scene noise applied, unclamped.
pub fn observed_scene(scene: &ImagePlane, noise: &NoiseInjection) -> Result<ImagePlane> {
    match noise {
        NoiseInjection::Scene(model) if !model.is_noiseless() => {
            scene.with_samples(add_scene_noise(scene.samples(), model))
        }
        _ => Ok(scene.clone()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnlineConfig<T> {
    pub params: OrlsParams<T>,
    pub stop: StopRule,
    pub eval_stride: usize,
    pub noise: NoiseInjection,
    /// Worker threads; 0 uses rayon's default.
    pub threads: usize,
    /// Percentages of `n` measurements at which to keep a reconstruction.
    pub snapshot_pcts: Vec<f64>,
}

impl<T: Real> OnlineConfig<T> {
    pub fn new(params: OrlsParams<T>) -> Self {
        Self {
            params,
            stop: StopRule::default(),
            eval_stride: 1,
            noise: NoiseInjection::None,
            threads: 1,
            snapshot_pcts: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub pct: f64,
    pub t: usize,
    pub image: ImagePlane,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnlineOutcome {
    /// Reconstruction at the stopping point, clamped to `[0, peak]`.
    pub image: ImagePlane,
    /// The scene actually measured (noisy when scene noise is injected).
    pub observed: ImagePlane,
    pub trajectory: MetricsTrajectory,
    pub snapshots: Vec<Snapshot>,
    /// CG iterations summed over all work units, one entry per time step.
    pub cg_per_step: Vec<usize>,
    pub measurements_used: usize,
    pub work_units: usize,
    pub nonconverged_steps: usize,
}

impl OnlineOutcome {
    /// Per-unit mean CG iterations for each time step.
    pub fn cg_mean_per_step(&self) -> Vec<f64> {
        self.cg_per_step
            .iter()
            .map(|&c| c as f64 / self.work_units as f64)
            .collect()
    }

    /// `t,cg_iters_total,cg_iters_mean` for every time step.
    pub fn cg_profile_csv(&self) -> String {
        let mut out = String::from("t,cg_iters_total,cg_iters_mean\n");
        for (i, (&total, mean)) in self.cg_per_step.iter().zip(self.cg_mean_per_step()).enumerate() {
            out.push_str(&format!("{},{},{}\n", i + 1, total, mean));
        }
        out
    }
}

struct WorkUnit<T> {
    key: usize,
    pixels: DenseVector<T>,
    state: OrlsState<T>,
    chunk_iterations: Vec<usize>,
    chunk_nonconverged: usize,
}

fn check_geometry<T: Real>(
    scene: &ImagePlane,
    grid: &PatchGrid,
    dictionary: &Dictionary<T>,
    masks: &MaskSet,
) -> Result<()> {
    if grid.width() != scene.width() || grid.height() != scene.height() {
        return Err(Error::Geometry(format!(
            "grid covers {}x{} but scene is {}x{}",
            grid.width(),
            grid.height(),
            scene.width(),
            scene.height()
        )));
    }
    if dictionary.side() != grid.patch_side() || masks.side() != grid.patch_side() {
        return Err(Error::Geometry(format!(
            "patch side {} disagrees with dictionary side {} or mask side {}",
            grid.patch_side(),
            dictionary.side(),
            masks.side()
        )));
    }
    Ok(())
}

fn build_pool(threads: usize) -> Result<Option<ThreadPool>> {
    if threads == 1 {
        return Ok(None);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map(Some)
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))
}

/// Runs `f` on every item, in parallel when a pool is given. The first error
/// in item order is returned.
fn for_each_unit<U: Send>(pool: Option<&ThreadPool>, items: &mut [U], f: impl Fn(&mut U) -> Result<()> + Sync) -> Result<()> {
    let results: Vec<Result<()>> = match pool {
        None => items.iter_mut().map(&f).collect(),
        Some(pool) => pool.install(|| items.par_iter_mut().map(&f).collect()),
    };
    results.into_iter().collect()
}

fn sensing_vectors<T: Real>(masks: &MaskSet, dictionary: &Dictionary<T>) -> Result<Vec<DenseVector<T>>> {
    masks
        .masks()
        .iter()
        .map(|m| sensing_vector(&m.to_vector(), dictionary))
        .collect()
}

fn assemble_image<T: Real>(
    estimates: impl Iterator<Item = DenseVector<T>>,
    grid: &PatchGrid,
    dictionary: &Dictionary<T>,
    like: &ImagePlane,
) -> Result<ImagePlane> {
    let pixels = estimates.map(|x| dictionary.synthesize(&x)).collect::<Result<Vec<_>>>()?;
    let planes = pixels
        .chunks(grid.len())
        .map(|chunk| assemble_patches(chunk, grid, like.peak()))
        .collect::<Result<Vec<_>>>()?;
    ImagePlane::from_channels(like.width(), like.height(), like.peak(), &planes)
}

fn work_units<T: Real>(
    observed: &ImagePlane,
    grid: &PatchGrid,
    params: &OrlsParams<T>,
) -> Result<Vec<(usize, DenseVector<T>)>> {
    let mut units = Vec::with_capacity(grid.len() * observed.channels());
    for c in 0..observed.channels() {
        for (p, z) in extract_patches::<T>(observed, grid, c)?.into_iter().enumerate() {
            units.push((c * grid.len() + p, z));
        }
    }
    params.validate()?;
    Ok(units)
}

/// Online reconstruction: per-patch ORLS over the shared mask sequence.
pub fn reconstruct_online<T: Real>(
    scene: &ImagePlane,
    grid: &PatchGrid,
    dictionary: &Dictionary<T>,
    masks: &MaskSet,
    config: &OnlineConfig<T>,
) -> Result<OnlineOutcome> {
    check_geometry(scene, grid, dictionary, masks)?;
    if config.eval_stride == 0 {
        return Err(Error::InvalidParameter("eval stride must be at least 1".into()));
    }

    let params = config.params;
    let dim = dictionary.order();
    let observed = observed_scene(scene, &config.noise)?;
    // ChaCha-backed noise is only drawn when sigma > 0, so the noiseless
    // path stays exact.
    let meas_noise = config.noise.measurement_noise();
    let sensing = sensing_vectors(masks, dictionary)?;

    let mut units = work_units(&observed, grid, &params)?
        .into_iter()
        .map(|(key, pixels)| {
            Ok(WorkUnit {
                key,
                pixels,
                state: OrlsState::new(dim, &params)?,
                chunk_iterations: Vec::new(),
                chunk_nonconverged: 0,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let last_t = match config.stop.fixed_target() {
        Some(target) => target.clamp(1, masks.len()),
        None => masks.len(),
    };
    let mut snapshot_ts: Vec<(f64, usize)> = config
        .snapshot_pcts
        .iter()
        .filter_map(|&pct| {
            let t = (pct / 100.0 * dim as f64).ceil().max(1.0) as usize;
            (t <= last_t).then_some((pct, t))
        })
        .collect();
    snapshot_ts.sort_by_key(|&(_, t)| t);
    let is_eval_point = |t: usize| {
        t % config.eval_stride == 0 || t == last_t || snapshot_ts.iter().any(|&(_, st)| st == t)
    };

    let pool = build_pool(config.threads)?;
    let mut trajectory = MetricsTrajectory::new();
    let mut snapshots = Vec::new();
    let mut cg_per_step = Vec::with_capacity(last_t);
    let mut changes = Vec::new();
    let mut previous: Option<Vec<DenseVector<T>>> = None;
    let mut nonconverged_steps = 0;
    let mut image = observed.clone();
    let mut done = 0;

    while done < last_t {
        let from = done + 1;
        let to = (from..=last_t).find(|&t| is_eval_point(t)).unwrap_or(last_t);

        for_each_unit(pool.as_ref(), &mut units, |u| {
            u.chunk_iterations.clear();
            u.chunk_nonconverged = 0;
            for t in from..=to {
                let mask = masks.at(t).expect("t within mask count");
                let y = measure_keyed(&u.pixels, mask, &meas_noise, noise_key(u.key, t))?;
                let ev = MeasurementEvent::new(sensing[t - 1].clone(), y, t)?;
                let outcome = u.state.step(&ev, &params)?;
                u.chunk_iterations.push(outcome.iterations);
                if !outcome.converged {
                    u.chunk_nonconverged += 1;
                }
            }
            Ok(())
        })?;

        for step in 0..=(to - from) {
            cg_per_step.push(units.iter().map(|u| u.chunk_iterations[step]).sum());
        }
        nonconverged_steps += units.iter().map(|u| u.chunk_nonconverged).sum::<usize>();
        done = to;

        let current: Vec<DenseVector<T>> = units.iter().map(|u| u.state.estimate().clone()).collect();
        changes.push(relative_change(previous.as_deref(), &current));
        image = assemble_image(current.iter().cloned(), grid, dictionary, scene)?;
        trajectory.push(TrajectoryRecord {
            t: done,
            psnr_db: psnr(scene, &image)?,
            ssim: ssim(scene, &image)?,
            cg_iters_total: *cg_per_step.last().expect("at least one step"),
        })?;
        for &(pct, t) in snapshot_ts.iter().filter(|&&(_, t)| t == done) {
            snapshots.push(Snapshot {
                pct,
                t,
                image: image.clone(),
            });
        }
        previous = Some(current);

        if should_stop(&config.stop, &trajectory, &changes) {
            break;
        }
    }

    Ok(OnlineOutcome {
        image,
        observed,
        trajectory,
        snapshots,
        cg_per_step,
        measurements_used: done,
        work_units: units.len(),
        nonconverged_steps,
    })
}

/// `‖x - prev‖ / ‖prev‖` over all units, accumulated in unit order.
fn relative_change<T: Real>(previous: Option<&[DenseVector<T>]>, current: &[DenseVector<T>]) -> f64 {
    let mut diff = 0.0;
    let mut base = 0.0;
    for (k, x) in current.iter().enumerate() {
        for (i, &v) in x.iter().enumerate() {
            let v = v.to_f64_lossy();
            let p = previous.map_or(0.0, |prev| prev[k][i].to_f64_lossy());
            diff += (v - p) * (v - p);
            base += p * p;
        }
    }
    if base == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (diff / base).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchConfig<T> {
    pub params: OrlsParams<T>,
    pub n_outer: usize,
    pub noise: NoiseInjection,
    pub threads: usize,
}

impl<T: Real> BatchConfig<T> {
    pub fn new(params: OrlsParams<T>) -> Self {
        Self {
            params,
            n_outer: DEFAULT_IRLS_OUTER,
            noise: NoiseInjection::None,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome {
    pub image: ImagePlane,
    pub observed: ImagePlane,
    pub psnr_db: f64,
    pub ssim: f64,
}

/// Batch IRLS per patch over every mask, on the same acquisition as
/// [`reconstruct_online`].
pub fn reconstruct_batch<T: Real>(
    scene: &ImagePlane,
    grid: &PatchGrid,
    dictionary: &Dictionary<T>,
    masks: &MaskSet,
    config: &BatchConfig<T>,
) -> Result<BatchOutcome> {
    check_geometry(scene, grid, dictionary, masks)?;
    let dim = dictionary.order();
    let observed = observed_scene(scene, &config.noise)?;
    let meas_noise = config.noise.measurement_noise();
    let sensing = sensing_vectors(masks, dictionary)?;

    let mut units: Vec<(usize, DenseVector<T>, Option<DenseVector<T>>)> = work_units(&observed, grid, &config.params)?
        .into_iter()
        .map(|(key, z)| (key, z, None))
        .collect();

    let pool = build_pool(config.threads)?;
    for_each_unit(pool.as_ref(), &mut units, |(key, z, out)| {
        let y = masks
            .masks()
            .iter()
            .enumerate()
            .map(|(i, m)| measure_keyed(z, m, &meas_noise, noise_key(*key, i + 1)))
            .collect::<Result<Vec<T>>>()?;
        *out = Some(irls_batch(&sensing, &y, dim, &config.params, config.n_outer)?);
        Ok(())
    })?;

    let image = assemble_image(
        units.into_iter().map(|(_, _, x)| x.expect("every unit solved")),
        grid,
        dictionary,
        scene,
    )?;
    Ok(BatchOutcome {
        psnr_db: psnr(scene, &image)?,
        ssim: ssim(scene, &image)?,
        image,
        observed,
    })
}
