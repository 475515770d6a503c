use std::fs;
use std::path::{Path, PathBuf};

use orls::imaging::{
    format_db, psnr, reconstruct_batch, reconstruct_online, ssim, synthetic_scene, BatchConfig, ImagePlane,
    NoiseInjection, OnlineConfig, PatchGrid, SceneKind, StopMode, StopRule,
};
use orls::sensing::{NoiseModel, RNG_CONTRACT_VERSION};
use orls::solvers::{CgStart, OrlsParams, DEFAULT_CG_EPS, DEFAULT_DELTA, DEFAULT_IRLS_OUTER, LAMBDA_NOISELESS, LAMBDA_NOISY};
use orls::{dct2d_dictionary, Dictionary, MaskSet};

use crate::args::{
    AcquisitionArgs, BatchArgs, CgStartArg, MasksArgs, MetricsArgs, NoiseAt, ReconstructArgs, SceneArgs, SceneKindArg,
};
use crate::error::{CliError, CliResult};
use crate::manifest::Manifest;

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const CG_PROFILE_FILE: &str = "cg_profile.csv";
const DEFAULT_SNAPSHOTS: [f64; 3] = [25.0, 75.0, 100.0];

pub fn cmd_masks(args: &MasksArgs) -> CliResult<()> {
    if args.count == 0 {
        return Err(CliError::usage("--count must be at least 1"));
    }
    if args.side == 0 {
        return Err(CliError::usage("--side must be at least 1"));
    }
    let set = MaskSet::generate(args.side, args.count, args.seed)?;
    set.save(&args.out)
        .map_err(|e| CliError::from(e).context(&format!("writing {}", args.out.display())))
}

pub fn cmd_scene(args: &SceneArgs) -> CliResult<()> {
    let kind = match args.kind {
        SceneKindArg::Shapes => SceneKind::Shapes,
        SceneKindArg::Waves => SceneKind::Waves,
        SceneKindArg::Texture => SceneKind::Texture,
    };
    let scene = synthetic_scene(kind, args.width, args.height, args.color).map_err(usage_on_geometry)?;
    scene
        .save_pnm(&args.out)
        .map_err(|e| CliError::from(e).context(&format!("writing {}", args.out.display())))
}

pub fn cmd_metrics(args: &MetricsArgs) -> CliResult<String> {
    let reference = load_image(&args.reference)?;
    let test = load_image(&args.test)?;
    let p = psnr(&reference, &test)?;
    let s = ssim(&reference, &test)?;
    Ok(format!("{},{:?}", format_db(p), s))
}

pub fn cmd_reconstruct(args: &ReconstructArgs) -> CliResult<String> {
    let manifest = load_manifest(args.common.manifest.as_deref(), "reconstruct")?;
    let m = manifest.as_ref();
    let acq = Acquisition::resolve(&args.common, m)?;

    let cg_eps = pick(args.cg_eps, m, "cg_eps")?.unwrap_or(DEFAULT_CG_EPS);
    let cg_max_iter = match args.cg_max_iter {
        Some(v) => Some(v),
        None => match m.and_then(|m| m.get("cg_max_iter")) {
            None | Some("auto") => None,
            Some(_) => m.unwrap().parse("cg_max_iter")?,
        },
    };
    let cg_start = match args.cg_start {
        Some(CgStartArg::Previous) => CgStart::Previous,
        Some(CgStartArg::Zero) => CgStart::Zero,
        None => match m.and_then(|m| m.get("cg_start")) {
            None | Some("previous") => CgStart::Previous,
            Some("zero") => CgStart::Zero,
            Some(other) => return Err(CliError::data(format!("manifest: bad cg_start {other:?}"))),
        },
    };
    let stop_text = pick_string(args.stop.as_deref(), m, "stop");
    let stop = match stop_text {
        Some(s) => parse_stop(&s)?,
        None => StopRule::default(),
    };
    let eval_stride = pick(args.eval_stride, m, "eval_stride")?.unwrap_or(1);
    if eval_stride == 0 {
        return Err(CliError::usage("--eval-stride must be at least 1"));
    }
    let snapshots = match pick_string(args.snapshots.as_deref(), m, "snapshots") {
        Some(s) => parse_snapshots(&s)?,
        None => DEFAULT_SNAPSHOTS.to_vec(),
    };

    let mut params = OrlsParams::new(acq.lambda)
        .with_delta(acq.delta)
        .with_cg_eps(cg_eps)
        .with_cg_start(cg_start);
    if let Some(cap) = cg_max_iter {
        params = params.with_cg_max_iter(cap);
    }
    params.validate()?;

    let inputs = acq.load()?;
    let mut config = OnlineConfig::new(params);
    config.stop = stop;
    config.eval_stride = eval_stride;
    config.noise = acq.injection(&inputs.scene)?;
    config.threads = acq.threads;
    config.snapshot_pcts = snapshots.clone();

    let outcome = reconstruct_online(&inputs.scene, &inputs.grid, &inputs.dictionary, &inputs.masks, &config)?;
    if outcome.nonconverged_steps > 0 {
        eprintln!(
            "warning: {} of {} CG solves stopped at the iteration cap without reaching eps={}",
            outcome.nonconverged_steps,
            outcome.measurements_used * outcome.work_units,
            cg_eps
        );
    }

    let out_dir = acq.prepare_out_dir()?;
    let ext = extension(&inputs.scene);
    let dim = inputs.dictionary.order();
    let recon_name = format!("reconstruction.{ext}");
    write_image(&outcome.image, &out_dir.join(&recon_name))?;
    if acq.scene_noise() {
        write_image(&outcome.observed, &out_dir.join(format!("observed.{ext}")))?;
    }
    write_text(&out_dir.join(TRAJECTORY_FILE), &outcome.trajectory.to_csv(dim))?;
    write_text(&out_dir.join(CG_PROFILE_FILE), &outcome.cg_profile_csv())?;
    let mut snapshot_names = Vec::new();
    for snap in &outcome.snapshots {
        let name = snapshot_name(snap.pct, ext);
        write_image(&snap.image, &out_dir.join(&name))?;
        snapshot_names.push(name);
    }

    let mut manifest = acq.manifest("reconstruct", &inputs, &out_dir);
    manifest.set("cg_eps", cg_eps);
    manifest.set("cg_max_iter", cg_max_iter.map_or("auto".to_string(), |v| v.to_string()));
    manifest.set("cg_start", if cg_start == CgStart::Zero { "zero" } else { "previous" });
    manifest.set("stop", format_stop(&stop));
    manifest.set("eval_stride", eval_stride);
    manifest.set("snapshots", snapshots.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(","));
    manifest.set("output_image", &recon_name);
    manifest.set("output_trajectory", TRAJECTORY_FILE);
    manifest.set("output_cg_profile", CG_PROFILE_FILE);
    manifest.set("output_snapshots", snapshot_names.join(","));
    manifest.set("measurements_used", outcome.measurements_used);
    manifest.save(&out_dir.join(MANIFEST_FILE))?;

    let last = outcome.trajectory.last().expect("at least one evaluation");
    Ok(format!(
        "measurements={} psnr_db={} ssim={} cg_iters={}",
        outcome.measurements_used,
        format_db(last.psnr_db),
        last.ssim,
        outcome.cg_per_step.iter().sum::<usize>()
    ))
}

pub fn cmd_batch(args: &BatchArgs) -> CliResult<String> {
    let manifest = load_manifest(args.common.manifest.as_deref(), "batch")?;
    let m = manifest.as_ref();
    let acq = Acquisition::resolve(&args.common, m)?;
    let outer = pick(args.outer, m, "outer")?.unwrap_or(DEFAULT_IRLS_OUTER);
    if outer == 0 {
        return Err(CliError::usage("--outer must be at least 1"));
    }
    let params = OrlsParams::new(acq.lambda).with_delta(acq.delta);
    params.validate()?;

    let inputs = acq.load()?;
    let mut config = BatchConfig::new(params);
    config.n_outer = outer;
    config.noise = acq.injection(&inputs.scene)?;
    config.threads = acq.threads;
    let outcome = reconstruct_batch(&inputs.scene, &inputs.grid, &inputs.dictionary, &inputs.masks, &config)?;

    let out_dir = acq.prepare_out_dir()?;
    let ext = extension(&inputs.scene);
    let recon_name = format!("reconstruction.{ext}");
    write_image(&outcome.image, &out_dir.join(&recon_name))?;
    if acq.scene_noise() {
        write_image(&outcome.observed, &out_dir.join(format!("observed.{ext}")))?;
    }
    let mut manifest = acq.manifest("batch", &inputs, &out_dir);
    manifest.set("outer", outer);
    manifest.set("output_image", &recon_name);
    manifest.save(&out_dir.join(MANIFEST_FILE))?;

    Ok(format!(
        "measurements={} psnr_db={} ssim={}",
        inputs.masks.len(),
        format_db(outcome.psnr_db),
        outcome.ssim
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum NoiseSetting {
    None,
    Sigma(f64),
    ScenePsnr(f64),
}

impl NoiseSetting {
    fn to_manifest(self) -> String {
        match self {
            NoiseSetting::None => "none".into(),
            NoiseSetting::Sigma(s) => format!("sigma:{s}"),
            NoiseSetting::ScenePsnr(db) => format!("scene_psnr:{db}"),
        }
    }

    fn from_manifest(text: &str) -> CliResult<Self> {
        let bad = || CliError::data(format!("manifest: bad noise {text:?}"));
        match text.split_once(':') {
            None if text == "none" => Ok(NoiseSetting::None),
            Some(("sigma", v)) => v.parse().map(NoiseSetting::Sigma).map_err(|_| bad()),
            Some(("scene_psnr", v)) => v.parse().map(NoiseSetting::ScenePsnr).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }

    fn is_noisy(self) -> bool {
        match self {
            NoiseSetting::None => false,
            NoiseSetting::Sigma(s) => s > 0.0,
            NoiseSetting::ScenePsnr(_) => true,
        }
    }
}

/// Settings shared by the online and batch commands after merging flags,
/// manifest and defaults.
struct Acquisition {
    scene: PathBuf,
    masks: PathBuf,
    expected_mask_seed: Option<u64>,
    lambda: f64,
    delta: f64,
    noise: NoiseSetting,
    noise_seed: u64,
    noise_at: NoiseAt,
    crop: bool,
    threads: usize,
    out_dir: PathBuf,
}

struct Inputs {
    scene: ImagePlane,
    masks: MaskSet,
    grid: PatchGrid,
    dictionary: Dictionary<f64>,
}

impl Acquisition {
    fn resolve(args: &AcquisitionArgs, m: Option<&Manifest>) -> CliResult<Self> {
        let scene = args
            .scene
            .clone()
            .or_else(|| m.and_then(|m| m.get("scene")).map(PathBuf::from))
            .ok_or_else(|| CliError::usage("--scene is required"))?;
        let masks = args
            .masks
            .clone()
            .or_else(|| m.and_then(|m| m.get("masks")).map(PathBuf::from))
            .ok_or_else(|| CliError::usage("--masks is required"))?;
        let expected_mask_seed = if args.masks.is_none() {
            m.map(|m| m.parse::<u64>("mask_seed")).transpose()?.flatten()
        } else {
            None
        };
        let out_dir = args
            .out_dir
            .clone()
            .or_else(|| m.and_then(|m| m.get("out_dir")).map(PathBuf::from))
            .ok_or_else(|| CliError::usage("--out-dir is required"))?;

        let noise = match (args.sigma, args.scene_psnr) {
            (Some(s), _) => NoiseSetting::Sigma(s),
            (None, Some(db)) => NoiseSetting::ScenePsnr(db),
            (None, None) => match m.and_then(|m| m.get("noise")) {
                Some(text) => NoiseSetting::from_manifest(text)?,
                None => NoiseSetting::None,
            },
        };
        if let NoiseSetting::Sigma(s) = noise {
            if !(s >= 0.0) || !s.is_finite() {
                return Err(CliError::usage(format!("--sigma must be a non-negative number, got {s}")));
            }
        }
        let noise_at = match args.noise_at {
            Some(at) => at,
            None => match m.and_then(|m| m.get("noise_at")) {
                None | Some("scene") => NoiseAt::Scene,
                Some("measurement") => NoiseAt::Measurement,
                Some(other) => return Err(CliError::data(format!("manifest: bad noise_at {other:?}"))),
            },
        };
        let default_lambda = if noise.is_noisy() { LAMBDA_NOISY } else { LAMBDA_NOISELESS };
        let crop = args.crop || m.map(|m| m.parse::<bool>("crop")).transpose()?.flatten().unwrap_or(false);

        Ok(Self {
            scene,
            masks,
            expected_mask_seed,
            lambda: pick(args.lambda, m, "lambda")?.unwrap_or(default_lambda),
            delta: pick(args.delta, m, "delta")?.unwrap_or(DEFAULT_DELTA),
            noise,
            noise_seed: pick(args.noise_seed, m, "noise_seed")?.unwrap_or(0),
            noise_at,
            crop,
            threads: pick(args.threads, m, "threads")?.unwrap_or(1),
            out_dir,
        })
    }

    fn load(&self) -> CliResult<Inputs> {
        let masks = MaskSet::load(&self.masks)
            .map_err(|e| CliError::from(e).context(&format!("reading masks {}", self.masks.display())))?;
        if let Some(seed) = self.expected_mask_seed {
            if seed != masks.seed() {
                return Err(CliError::data(format!(
                    "mask file {} has seed {} but the manifest recorded {seed}",
                    self.masks.display(),
                    masks.seed()
                )));
            }
        }
        let mut scene = load_image(&self.scene)?;
        let side = masks.side();
        if self.crop {
            scene = scene.crop_to_multiple(side)?;
        }
        let grid = PatchGrid::for_image(&scene, side).map_err(|e| {
            CliError::data(format!(
                "{e}; scene is {}x{}, patch side {side} (pass --crop to trim)",
                scene.width(),
                scene.height()
            ))
        })?;
        Ok(Inputs {
            scene,
            masks,
            grid,
            dictionary: dct2d_dictionary(side),
        })
    }

    fn noise_model(&self, scene: &ImagePlane) -> CliResult<Option<NoiseModel>> {
        Ok(match self.noise {
            NoiseSetting::None => None,
            NoiseSetting::Sigma(s) => Some(NoiseModel::new(s, self.noise_seed)?),
            NoiseSetting::ScenePsnr(db) => Some(NoiseModel::for_scene_psnr(db, scene.peak(), self.noise_seed)?),
        })
    }

    fn injection(&self, scene: &ImagePlane) -> CliResult<NoiseInjection> {
        Ok(match (self.noise_model(scene)?, self.noise_at) {
            (None, _) => NoiseInjection::None,
            (Some(n), NoiseAt::Scene) => NoiseInjection::Scene(n),
            (Some(n), NoiseAt::Measurement) => NoiseInjection::Measurement(n),
        })
    }

    fn scene_noise(&self) -> bool {
        self.noise.is_noisy() && self.noise_at == NoiseAt::Scene
    }

    fn prepare_out_dir(&self) -> CliResult<PathBuf> {
        fs::create_dir_all(&self.out_dir)
            .map_err(|e| CliError::data(format!("cannot create {}: {e}", self.out_dir.display())))?;
        Ok(absolute(&self.out_dir))
    }

    fn manifest(&self, command: &str, inputs: &Inputs, out_dir: &Path) -> Manifest {
        let mut m = Manifest::new();
        m.set("command", command);
        m.set("tool_version", orls::VERSION);
        m.set("rng_contract", RNG_CONTRACT_VERSION);
        m.set("scene", absolute(&self.scene).display());
        m.set("scene_width", inputs.scene.width());
        m.set("scene_height", inputs.scene.height());
        m.set("scene_channels", inputs.scene.channels());
        m.set("crop", self.crop);
        m.set("masks", absolute(&self.masks).display());
        m.set("mask_seed", inputs.masks.seed());
        m.set("mask_count", inputs.masks.len());
        m.set("patch_side", inputs.masks.side());
        m.set("lambda", self.lambda);
        m.set("delta", self.delta);
        m.set("noise", self.noise.to_manifest());
        let sigma = self
            .noise_model(&inputs.scene)
            .ok()
            .flatten()
            .map_or(0.0, |n| n.sigma);
        m.set("noise_sigma", sigma);
        m.set("noise_seed", self.noise_seed);
        m.set("noise_at", if self.noise_at == NoiseAt::Scene { "scene" } else { "measurement" });
        m.set("threads", self.threads);
        m.set("out_dir", out_dir.display());
        m
    }
}

fn load_manifest(path: Option<&Path>, command: &str) -> CliResult<Option<Manifest>> {
    let Some(path) = path else { return Ok(None) };
    let m = Manifest::load(path)?;
    match m.get("command") {
        Some(c) if c == command => Ok(Some(m)),
        Some(c) => Err(CliError::data(format!(
            "manifest {} was written by `{c}`, not `{command}`",
            path.display()
        ))),
        None => Err(CliError::data(format!("manifest {} has no command key", path.display()))),
    }
}

fn pick<T: std::str::FromStr>(flag: Option<T>, m: Option<&Manifest>, key: &str) -> CliResult<Option<T>> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => m.map_or(Ok(None), |m| m.parse(key)),
    }
}

fn pick_string(flag: Option<&str>, m: Option<&Manifest>, key: &str) -> Option<String> {
    flag.map(str::to_string).or_else(|| m.and_then(|m| m.get(key)).map(str::to_string))
}

/// `fixed:N`, `plateau:THRESHOLD:PATIENCE` or `psnr:DB`.
pub fn parse_stop(text: &str) -> CliResult<StopRule> {
    let bad = || CliError::usage(format!("bad --stop {text:?}; expected fixed:N, plateau:THRESHOLD:PATIENCE or psnr:DB"));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        ["fixed", n] => {
            let n: usize = n.parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(bad());
            }
            Ok(StopRule::fixed_count(n))
        }
        ["plateau", thr, pat] => {
            let thr: f64 = thr.parse().map_err(|_| bad())?;
            let pat: usize = pat.parse().map_err(|_| bad())?;
            if !(thr >= 0.0) || pat == 0 {
                return Err(bad());
            }
            Ok(StopRule::plateau(thr, pat))
        }
        ["psnr", db] => Ok(StopRule::psnr_at_least(db.parse().map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

pub fn format_stop(rule: &StopRule) -> String {
    match rule.mode {
        StopMode::FixedCount => format!("fixed:{}", rule.fixed_target().unwrap_or(0)),
        StopMode::EstimatePlateau => format!("plateau:{}:{}", rule.threshold, rule.patience),
        StopMode::MetricThreshold => format!("psnr:{}", rule.threshold),
    }
}

fn parse_snapshots(text: &str) -> CliResult<Vec<f64>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|p| {
            let v: f64 = p
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("bad snapshot percentage {p:?}")))?;
            if v > 0.0 && v <= 100.0 {
                Ok(v)
            } else {
                Err(CliError::usage(format!("snapshot percentage {v} outside (0, 100]")))
            }
        })
        .collect()
}

fn snapshot_name(pct: f64, ext: &str) -> String {
    if pct.fract() == 0.0 {
        format!("snapshot_{:03}.{ext}", pct as u64)
    } else {
        format!("snapshot_{}.{ext}", pct.to_string().replace('.', "_"))
    }
}

fn extension(img: &ImagePlane) -> &'static str {
    if img.channels() == 1 {
        "pgm"
    } else {
        "ppm"
    }
}

fn load_image(path: &Path) -> CliResult<ImagePlane> {
    ImagePlane::load_pnm(path).map_err(|e| CliError::from(e).context(&format!("reading {}", path.display())))
}

fn write_image(img: &ImagePlane, path: &Path) -> CliResult<()> {
    img.save_pnm(path)
        .map_err(|e| CliError::from(e).context(&format!("writing {}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

fn absolute(path: &Path) -> PathBuf {
    fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf())
}

fn usage_on_geometry(err: orls::Error) -> CliError {
    match err {
        orls::Error::Geometry(m) => CliError::Usage(m),
        other => other.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stop_rule_text_round_trip() {
        for text in ["fixed:16", "plateau:0.0001:3", "psnr:35.5"] {
            assert_eq!(format_stop(&parse_stop(text).unwrap()), text);
        }
        for bad in ["fixed:0", "fixed", "plateau:1e-4", "plateau:x:3", "psnr:", "until:done"] {
            assert_eq!(parse_stop(bad).unwrap_err().exit_code(), 1, "{bad}");
        }
    }

    #[test]
    fn snapshot_list() {
        assert_eq!(parse_snapshots("25, 75,100").unwrap(), vec![25.0, 75.0, 100.0]);
        assert!(parse_snapshots("").unwrap().is_empty());
        assert!(parse_snapshots("0").is_err());
        assert!(parse_snapshots("101").is_err());
        assert_eq!(snapshot_name(25.0, "pgm"), "snapshot_025.pgm");
        assert_eq!(snapshot_name(12.5, "ppm"), "snapshot_12_5.ppm");
    }

    #[test]
    fn noise_setting_text() {
        for n in [NoiseSetting::None, NoiseSetting::Sigma(2.5), NoiseSetting::ScenePsnr(22.1)] {
            assert_eq!(NoiseSetting::from_manifest(&n.to_manifest()).unwrap(), n);
        }
        assert!(NoiseSetting::from_manifest("loud").is_err());
    }
}
