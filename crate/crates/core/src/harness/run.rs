//! Command orchestration and the run manifest.

use super::config::{Scene, SceneConfig};
use super::io::{fmt_f64, table_to_csv, write_farfield, write_grid};
use super::noise::inject_noise;
use crate::elastic::FarFieldPattern;
use crate::error::{Error, Result};
use crate::factorization::{
    classical_indicator, data_vector, indicator_i, lsm_spectral, picard_sum, IndicatorGrid,
};
use crate::ffop::{assemble_f, conjugate_spectrum_translate, eigensystem, SpectrumCache, NORMALITY_LIMIT};
use crate::field::Point;
use crate::forward::{
    default_truncation, disk_series_solve, farfield_uniform, mfs_solve, nodal_scan, Obstacle, ScatterSolution,
};
use crate::reflection::{verify_reflection, ReflectionCheck};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

/// Normalized level above which a local maximum of `I` counts as ridge.
pub const RIDGE_FRACTION: f64 = 0.5;
/// Level-set fraction of the full-aperture indicator compared with the obstacle.
pub const LEVEL_SET_FRACTION: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Forward,
    Spectrum,
    FmClassic,
    FmSingle,
    ReflectCheck,
    NodalScan,
    LsmCompare,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Forward,
        Command::Spectrum,
        Command::FmClassic,
        Command::FmSingle,
        Command::ReflectCheck,
        Command::NodalScan,
        Command::LsmCompare,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Forward => "forward",
            Command::Spectrum => "spectrum",
            Command::FmClassic => "fm-classic",
            Command::FmSingle => "fm-single",
            Command::ReflectCheck => "reflect-check",
            Command::NodalScan => "nodal-scan",
            Command::LsmCompare => "lsm-compare",
        }
    }

    pub fn needs_config(&self) -> bool {
        *self != Command::ReflectCheck
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown command `{s}`")))
    }
}

/// Command-line overrides applied on top of the config before validation.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub noise: Option<f64>,
    pub truncation_rho: Option<f64>,
    pub grid_n: Option<usize>,
    pub n_theta: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut SceneConfig) {
        if let Some(s) = self.seed {
            cfg.noise.seed = s;
        }
        if let Some(n) = self.noise {
            cfg.noise.level = n;
        }
        if let Some(r) = self.truncation_rho {
            cfg.solver.truncation_rho = Some(r);
            cfg.solver.retained_modes = None;
        }
        if let Some(n) = self.grid_n {
            cfg.solver.grid_n = n;
        }
        if let Some(n) = self.n_theta {
            cfg.solver.n_theta = n;
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    pub cache_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Below,
    Above,
    AtMost,
}

#[derive(Clone, Debug, Serialize)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub passed: bool,
}

impl Gate {
    pub fn new(name: &str, value: f64, comparison: Comparison, threshold: f64) -> Self {
        let passed = match comparison {
            Comparison::Below => value < threshold,
            Comparison::Above => value > threshold,
            Comparison::AtMost => value <= threshold,
        };
        Gate { name: name.to_string(), value, comparison, threshold, passed }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Stage {
    pub name: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CacheStats {
    pub dir: Option<PathBuf>,
    pub hits: usize,
    pub misses: usize,
}

/// Where the inversion input came from and what it was checked against.
#[derive(Clone, Debug, Default, Serialize)]
pub struct DataProvenance {
    pub data: String,
    pub inversion: String,
    pub validation: String,
    /// `true` only if the data and the inversion operator share a solver.
    pub inverse_crime: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: Command,
    pub code_version: String,
    pub config: Option<SceneConfig>,
    pub seeds: BTreeMap<String, u64>,
    pub threads: Option<usize>,
    pub cache: CacheStats,
    pub stages: Vec<Stage>,
    /// Output file name to SHA-256 hex digest.
    pub outputs: BTreeMap<String, String>,
    pub provenance: Option<DataProvenance>,
    pub metrics: BTreeMap<String, f64>,
    pub gates: Vec<Gate>,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }
}

struct Ctx {
    out: PathBuf,
    manifest: RunManifest,
    clock: Instant,
}

impl Ctx {
    fn stage(&mut self, name: &str) {
        let now = Instant::now();
        self.manifest.stages.push(Stage { name: name.into(), seconds: (now - self.clock).as_secs_f64() });
        self.clock = now;
    }

    fn metric(&mut self, name: &str, v: f64) {
        self.manifest.metrics.insert(name.into(), v);
    }

    fn gate(&mut self, name: &str, value: f64, c: Comparison, threshold: f64) {
        self.metric(name, value);
        self.manifest.gates.push(Gate::new(name, value, c, threshold));
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.out.join(name), bytes)?;
        self.record(name)
    }

    fn record(&mut self, name: &str) -> Result<()> {
        let digest = Sha256::digest(fs::read(self.out.join(name))?);
        self.manifest.outputs.insert(name.into(), digest.iter().map(|b| format!("{b:02x}")).collect());
        Ok(())
    }
}

/// Forward solution of the scene's incident wave: disk series for disks, MFS otherwise.
pub fn solve_scene(scene: &Scene) -> Result<ScatterSolution> {
    let med = &scene.medium;
    match &scene.obstacle {
        Obstacle::Disk(d) => {
            let n = scene.config.solver.series_terms.unwrap_or_else(|| default_truncation(d.radius, med));
            disk_series_solve(d, &scene.incident, med, n)
        }
        ob @ Obstacle::Polygon(_) => mfs_solve(ob, &scene.incident, med, scene.mfs_params()),
    }
}

fn solver_name(ob: &Obstacle) -> &'static str {
    match ob {
        Obstacle::Disk(_) => "disk series (Bessel/Hankel modal solution)",
        Obstacle::Polygon(_) => "method of fundamental solutions (Kupradze point sources)",
    }
}

/// Measured data of the scene: the solved far field with the configured noise.
fn measured(ctx: &mut Ctx, scene: &Scene) -> Result<(ScatterSolution, FarFieldPattern)> {
    let sol = solve_scene(scene)?;
    ctx.manifest.warnings.extend(sol.warnings.iter().cloned());
    ctx.metric("boundary_residual", sol.boundary_residual);
    let clean = farfield_uniform(&sol, scene.config.measurement.m);
    let noisy = inject_noise(&clean, scene.config.noise.level, scene.config.noise.seed);
    ctx.metric("noise_level", scene.config.noise.level);
    ctx.metric("relative_perturbation", noisy.relative_perturbation);
    ctx.stage("forward");
    Ok((sol, noisy.pattern))
}

/// Vertices of the convex hull, counterclockwise.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut p = points.to_vec();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: Point, a: Point, b: Point| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<Point> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

/// Distance in cells from each convex-hull corner to the ridge of `grid`.
pub fn corner_ridge_distances(grid: &IndicatorGrid, obstacle: &Obstacle) -> Vec<f64> {
    let Obstacle::Polygon(p) = obstacle else { return Vec::new() };
    let ridge = grid.ridge(RIDGE_FRACTION);
    convex_hull(&p.vertices).into_iter().map(|c| grid.distance_in_cells(c, &ridge)).collect()
}

/// Runs `cmd`; returns the manifest, also written to `<out>/manifest.json`.
pub fn run(cmd: Command, config: Option<&SceneConfig>, overrides: &Overrides, opts: &RunOptions) -> Result<RunManifest> {
    let scene = match config {
        Some(c) => {
            let mut c = c.clone();
            overrides.apply(&mut c);
            Some(c.validate()?)
        }
        None if cmd.needs_config() => return Err(Error::config("--config", format!("`{}` needs a scene config", cmd.name()))),
        None => None,
    };
    if let Some(n) = opts.threads {
        if n == 0 {
            return Err(Error::config("--threads", "must be at least 1"));
        }
    }
    fs::create_dir_all(&opts.out)?;
    let cache = SpectrumCache::from_env(opts.cache_dir.as_deref())?;
    let mut ctx = Ctx {
        out: opts.out.clone(),
        manifest: RunManifest {
            command: cmd,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            config: scene.as_ref().map(|s| s.config.clone()),
            seeds: BTreeMap::new(),
            threads: opts.threads,
            cache: CacheStats::default(),
            stages: Vec::new(),
            outputs: BTreeMap::new(),
            provenance: None,
            metrics: BTreeMap::new(),
            gates: Vec::new(),
            warnings: Vec::new(),
        },
        clock: Instant::now(),
    };
    let body = |ctx: &mut Ctx| match cmd {
        Command::ReflectCheck => reflect_check(ctx, overrides.seed.or(scene.as_ref().map(|s| s.config.noise.seed)).unwrap_or(7), scene.as_ref()),
        _ => {
            let scene = scene.as_ref().expect("config checked above");
            ctx.manifest.seeds.insert("noise".into(), scene.config.noise.seed);
            match cmd {
                Command::Forward => forward(ctx, scene),
                Command::Spectrum => spectrum(ctx, scene, &cache),
                Command::FmClassic => fm_classic(ctx, scene),
                Command::FmSingle => fm_single(ctx, scene, &cache),
                Command::NodalScan => nodal(ctx, scene),
                Command::LsmCompare => lsm_compare(ctx, scene, &cache),
                Command::ReflectCheck => unreachable!(),
            }
        }
    };
    match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidInput(e.to_string()))?
            .install(|| body(&mut ctx))?,
        None => body(&mut ctx)?,
    }
    ctx.manifest.cache = CacheStats { dir: cache.dir().map(Path::to_path_buf), hits: cache.hits(), misses: cache.misses() };
    let text = serde_json::to_string_pretty(&ctx.manifest)? + "\n";
    fs::write(ctx.out.join("manifest.json"), text)?;
    Ok(ctx.manifest)
}

fn forward(ctx: &mut Ctx, scene: &Scene) -> Result<()> {
    let (sol, data) = measured(ctx, scene)?;
    write_farfield(&data, &ctx.out.join("farfield.csv"))?;
    ctx.record("farfield.csv")?;
    let limit = match scene.obstacle {
        Obstacle::Disk(_) => 1e-10,
        Obstacle::Polygon(_) => 1e-4,
    };
    ctx.gate("boundary_residual", sol.boundary_residual, Comparison::Below, limit);
    ctx.manifest.provenance = Some(DataProvenance {
        data: solver_name(&scene.obstacle).into(),
        inversion: "none".into(),
        validation: "boundary residual at validation points between collocation nodes".into(),
        inverse_crime: false,
    });
    ctx.stage("write");
    Ok(())
}

fn spectrum(ctx: &mut Ctx, scene: &Scene, cache: &SpectrumCache) -> Result<()> {
    let m = scene.config.measurement.m;
    let op = assemble_f(&scene.obstacle, &scene.medium, m)?;
    ctx.stage("assemble");
    let limit = match scene.obstacle {
        Obstacle::Disk(_) => 1e-8,
        Obstacle::Polygon(_) => NORMALITY_LIMIT,
    };
    ctx.gate("normality_defect", op.normality_defect, Comparison::Below, limit);
    if op.normality_defect < NORMALITY_LIMIT {
        let es = eigensystem(&op)?;
        let rows: Vec<Vec<String>> = es
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| vec![k.to_string(), fmt_f64(v.re), fmt_f64(v.im), fmt_f64(v.norm())])
            .collect();
        ctx.write("eigenvalues.csv", table_to_csv(&["index", "re", "im", "abs"], &rows).as_bytes())?;
        ctx.stage("eigensystem");
    }
    let geom = scene.geometry();
    let (mut perturbed, mut failed) = (0usize, 0usize);
    for h in geom.h_grid() {
        match cache.get(h, &scene.medium, m) {
            Ok(rs) => perturbed += usize::from(rs.perturbed()),
            Err(Error::NearSingularMode { .. }) => failed += 1,
            Err(e) => return Err(e),
        }
    }
    ctx.metric("sampling_radii", geom.h_grid().len() as f64);
    ctx.metric("perturbed_radii", perturbed as f64);
    ctx.metric("near_singular_radii", failed as f64);
    ctx.manifest.provenance = Some(DataProvenance {
        data: solver_name(&scene.obstacle).into(),
        inversion: "numeric Schur decomposition of the assembled operator; modal spectra of sampling disks".into(),
        validation: "normality defect".into(),
        inverse_crime: false,
    });
    ctx.stage("cache");
    Ok(())
}

fn fm_classic(ctx: &mut Ctx, scene: &Scene) -> Result<()> {
    if scene.config.noise.level > 0.0 {
        ctx.manifest.warnings.push("noise is applied to single-wave data only; fm-classic uses exact operator data".into());
    }
    let op = assemble_f(&scene.obstacle, &scene.medium, scene.config.measurement.m)?;
    ctx.metric("normality_defect", op.normality_defect);
    let es = eigensystem(&op)?;
    ctx.stage("eigensystem");
    let s = &scene.config.solver;
    let p = [s.polarization.cos(), s.polarization.sin()];
    let grid = classical_indicator(&es, &scene.grid(), p, &scene.medium, &scene.picard())?;
    ctx.stage("indicator");
    write_grid(&grid, &ctx.out.join("indicator"))?;
    for f in ["indicator.csv", "indicator.pgm", "indicator.json"] {
        ctx.record(f)?;
    }
    ctx.gate("contrast", grid.contrast(&scene.obstacle), Comparison::Above, 10.0);
    ctx.gate("level_set_mismatch", grid.level_set_mismatch(&scene.obstacle, LEVEL_SET_FRACTION), Comparison::Below, 0.25);
    ctx.manifest.provenance = Some(DataProvenance {
        data: format!("{} for all 2M incident waves", solver_name(&scene.obstacle)),
        inversion: "numeric Schur decomposition of the data operator; analytic point-source far fields".into(),
        validation: "true obstacle geometry".into(),
        inverse_crime: false,
    });
    ctx.stage("write");
    Ok(())
}

fn fm_single(ctx: &mut Ctx, scene: &Scene, cache: &SpectrumCache) -> Result<()> {
    let geom = scene.geometry();
    geom.check_contains(&scene.obstacle)?;
    let (_, data) = measured(ctx, scene)?;
    write_farfield(&data, &ctx.out.join("farfield.csv"))?;
    ctx.record("farfield.csv")?;
    let rep = indicator_i(&data, &scene.grid(), &geom, &scene.medium, &scene.picard(), cache)?;
    ctx.stage("indicator");
    write_grid(&rep.grid, &ctx.out.join("indicator"))?;
    for f in ["indicator.csv", "indicator.pgm", "indicator.json"] {
        ctx.record(f)?;
    }
    ctx.metric("perturbed_radii", rep.perturbed_radii as f64);
    ctx.metric("failed_samples", rep.failed_samples as f64);
    let contrast = rep.grid.contrast(&scene.obstacle);
    match &scene.obstacle {
        Obstacle::Disk(_) => {
            let threshold = if scene.config.noise.level > 0.0 { 2.0 } else { 5.0 };
            ctx.gate("contrast", contrast, Comparison::Above, threshold);
        }
        Obstacle::Polygon(_) => {
            ctx.metric("contrast", contrast);
            let d = corner_ridge_distances(&rep.grid, &scene.obstacle);
            for (k, v) in d.iter().enumerate() {
                ctx.metric(&format!("corner_{k}_ridge_cells"), *v);
            }
            ctx.gate("max_corner_ridge_cells", d.iter().copied().fold(0.0, f64::max), Comparison::AtMost, 2.0);
        }
    }
    ctx.manifest.seeds.insert("noise".into(), scene.config.noise.seed);
    ctx.manifest.provenance = Some(DataProvenance {
        data: solver_name(&scene.obstacle).into(),
        inversion: "modal spectra of origin-centred sampling disks, translated to the sampling circle".into(),
        validation: "true obstacle geometry".into(),
        inverse_crime: false,
    });
    ctx.stage("write");
    Ok(())
}

fn nodal(ctx: &mut Ctx, scene: &Scene) -> Result<()> {
    let sol = solve_scene(scene)?;
    ctx.manifest.warnings.extend(sol.warnings.iter().cloned());
    ctx.metric("boundary_residual", sol.boundary_residual);
    ctx.stage("forward");
    let rep = nodal_scan(&sol, &scene.nodal_grid(), scene.config.solver.nodal_tol, None);
    ctx.stage("scan");
    let rows: Vec<Vec<String>> = rep.points.iter().map(|(p, v)| vec![fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(*v)]).collect();
    ctx.write("nodal.csv", table_to_csv(&["x", "y", "abs_u"], &rows).as_bytes())?;
    ctx.write("nodal_report.json", (serde_json::to_string_pretty(&rep)? + "\n").as_bytes())?;
    ctx.metric("scanned", rep.scanned as f64);
    ctx.metric("nodal_points", rep.points.len() as f64);
    ctx.metric("segments", rep.segments.len() as f64);
    ctx.gate("violations", rep.violations().len() as f64, Comparison::AtMost, 0.0);
    ctx.stage("write");
    Ok(())
}

fn reflect_check(ctx: &mut Ctx, seed: u64, scene: Option<&Scene>) -> Result<()> {
    ctx.manifest.seeds.insert("probes".into(), seed);
    let navier = scene.map(|s| s.config.solver.reflection_probes).unwrap_or(20);
    let mut reports = Vec::new();
    for (check, n, tol) in [(ReflectionCheck::Lame, 50, 1e-8), (ReflectionCheck::Navier, navier, 5e-4), (ReflectionCheck::HelmholtzBc, 30, 1e-8)] {
        let r = verify_reflection(check, n, seed);
        let name = serde_json::to_value(check)?.as_str().unwrap_or("check").to_string();
        ctx.gate(&format!("{name}_max_error"), r.max_error, Comparison::Below, tol);
        ctx.stage(&name);
        reports.push(r);
    }
    ctx.write("reflection.json", (serde_json::to_string_pretty(&reports)? + "\n").as_bytes())?;
    Ok(())
}

fn lsm_compare(ctx: &mut Ctx, scene: &Scene, cache: &SpectrumCache) -> Result<()> {
    let geom = scene.geometry();
    geom.check_contains(&scene.obstacle)?;
    let (_, data) = measured(ctx, scene)?;
    let psi = data_vector(&data, &scene.medium);
    let cfg = scene.picard();
    let alpha = scene.config.solver.lsm_alpha;
    let thetas = if scene.config.solver.lsm_thetas.is_empty() { vec![0.0] } else { scene.config.solver.lsm_thetas.clone() };
    let nan = fmt_f64(f64::NAN);
    let mut rows = Vec::new();
    let (mut ls, mut lg) = (Vec::new(), Vec::new());
    for &theta in &thetas {
        for h in geom.h_grid() {
            let rs = match cache.get(h, &scene.medium, data.len()) {
                Ok(rs) => rs,
                Err(Error::NearSingularMode { .. }) => {
                    rows.push(vec![fmt_f64(theta), fmt_f64(h), nan.clone(), nan.clone(), nan.clone(), nan.clone(), nan.clone()]);
                    continue;
                }
                Err(e) => return Err(e),
            };
            let es = conjugate_spectrum_translate(&rs.spectrum, geom.center(theta))?;
            let s = picard_sum(&es, &psi, &cfg)?;
            let g = lsm_spectral(&es, &psi, alpha)?;
            if s.s > 0.0 && s.s.is_finite() && g.norm > 0.0 {
                ls.push(s.s.ln());
                lg.push(g.norm.ln());
            }
            rows.push(vec![
                fmt_f64(theta),
                fmt_f64(h),
                fmt_f64(rs.h_used),
                fmt_f64(s.s),
                fmt_f64(s.w),
                fmt_f64(g.norm),
                fmt_f64(g.residual),
            ]);
        }
    }
    ctx.stage("curves");
    let header = ["theta", "h", "h_used", "picard_s", "w", "lsm_norm", "lsm_residual"];
    ctx.write("lsm_curves.csv", table_to_csv(&header, &rows).as_bytes())?;
    ctx.metric("log_correlation", correlation(&ls, &lg));
    ctx.manifest.provenance = Some(DataProvenance {
        data: solver_name(&scene.obstacle).into(),
        inversion: "modal spectra of sampling disks (Picard sum and Tikhonov)".into(),
        validation: "none (qualitative comparison)".into(),
        inverse_crime: false,
    });
    ctx.stage("write");
    Ok(())
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}
