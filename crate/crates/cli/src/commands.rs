use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use viscompm::calibrate::{calibrate, ParamVector};
use viscompm::dump::{read_trajectory, write_frame, FrameDump};
use viscompm::mpm::{simulate_with, FrameDiagnostics};
use viscompm::par::Exec;
use viscompm::render::{spacetime_slice, Axis, View};
use viscompm::scene::{internal_fill, load_particles, write_csv, FillSpec, Scene};
use viscompm::Vec3;

use crate::config::{Overrides, RunConfig};

pub const MANIFEST: &str = "manifest.json";
pub const DIAGNOSTICS: &str = "diagnostics.csv";
pub const THETA_BEST: &str = "theta_best.json";
pub const LOSS_HISTORY: &str = "loss_history.csv";

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn simulate(config_path: &Path, overrides: &Overrides) -> Result<()> {
    let cfg = RunConfig::load(config_path, overrides)?;
    let scene = Scene::build(&cfg.scene, &cfg.sim).context("cannot build scene")?;
    let dir = &cfg.output_dir;
    create_dir(dir)?;
    write_json(&dir.join(MANIFEST), &cfg)?;
    log::info!("{} particles, {} frames -> {}", scene.particles.len(), cfg.frames, dir.display());

    let frame_dt = cfg.sim.frame_dt();
    let mut write_err = None;
    let out = simulate_with(&scene, &cfg.sim, cfg.frames, Exec::default(), |frame, particles| {
        if write_err.is_some() {
            return;
        }
        let positions: Vec<Vec3> = particles.iter().map(|p| p.x).collect();
        if let Err(e) = write_frame(dir, &FrameDump::from_positions(frame, frame_dt, &positions)) {
            write_err = Some(e);
        }
    });
    if let Some(e) = write_err {
        return Err(e.into());
    }
    let out = out.context("simulation aborted")?;
    if cfg.frames > 0 {
        write_diagnostics(&dir.join(DIAGNOSTICS), &out.diagnostics)?;
    }
    println!("wrote {} frames to {}", out.trajectory.len(), dir.display());
    Ok(())
}

fn write_diagnostics(path: &Path, rows: &[FrameDiagnostics]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ThetaBest<'a> {
    theta: &'a ParamVector,
    loss: f64,
    initial_loss: f64,
    evaluations: usize,
}

pub fn calibrate_cmd(
    config_path: &Path,
    reference: Option<&Path>,
    budget: Option<usize>,
    overrides: &Overrides,
) -> Result<()> {
    let cfg = RunConfig::load(config_path, overrides)?;
    let Some(spec) = &cfg.calibration else {
        bail!("{}: no `calibration` section", config_path.display());
    };
    let ref_dir = match (reference, &spec.reference_dir) {
        (Some(r), _) => r.to_path_buf(),
        (None, Some(r)) => r.clone(),
        (None, None) => bail!("no reference directory: pass --reference or set `calibration.reference_dir`"),
    };
    let traj = read_trajectory(&ref_dir).with_context(|| format!("bad reference in {}", ref_dir.display()))?;
    if traj.len() != cfg.frames + 1 {
        log::warn!("reference has {} frames, config asks for {}; using the reference", traj.len() - 1, cfg.frames);
    }
    let scene = Scene::build(&cfg.scene, &cfg.sim).context("cannot build scene")?;
    let budget = budget.unwrap_or(spec.budget);
    let result = calibrate(&scene, &cfg.sim, &traj, &spec.theta0, budget)
        .with_context(|| format!("calibration against {} failed", ref_dir.display()))?;

    let dir = &cfg.output_dir;
    create_dir(dir)?;
    write_json(
        &dir.join(THETA_BEST),
        &ThetaBest {
            theta: &result.theta,
            loss: result.loss,
            initial_loss: result.initial_loss,
            evaluations: result.history.len(),
        },
    )?;
    let path = dir.join(LOSS_HISTORY);
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut header = vec!["evaluation".to_string(), "loss".into(), "best".into()];
    header.extend(spec.theta0.entries.iter().map(|e| match e.material {
        Some(m) => format!("{}[{m}]", e.name.as_str()),
        None => e.name.as_str().to_string(),
    }));
    w.write_record(&header)?;
    for rec in &result.history {
        let mut row = vec![rec.evaluation.to_string(), rec.loss.to_string(), rec.best.to_string()];
        row.extend(rec.values.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;

    println!(
        "loss {:.6e} -> {:.6e} after {} simulations; wrote {}",
        result.initial_loss,
        result.loss,
        result.history.len(),
        dir.join(THETA_BEST).display()
    );
    for e in &result.theta.entries {
        println!("  {} = {}", e.name.as_str(), e.value);
    }
    Ok(())
}

pub fn fill(input: &Path, output: &Path, spec: &FillSpec) -> Result<()> {
    let points = load_particles(input)?;
    let out = internal_fill(&points, spec)?;
    write_csv(output, &out.points)?;
    println!(
        "{} input points, {} interior voxels, {} seeded; wrote {}",
        points.len(),
        out.interior_voxels,
        out.seeded,
        output.display()
    );
    Ok(())
}

pub struct SliceArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    pub axis: Axis,
    pub width: usize,
    pub height: usize,
    pub row: Option<usize>,
    pub splat3: bool,
    pub config: Option<PathBuf>,
}

/// Box around every position in every frame, padded so no axis is flat.
fn bounds(frames: &[Vec<Vec3>]) -> (Vec3, Vec3) {
    let (mut lo, mut hi) = (Vec3::splat(f64::INFINITY), Vec3::splat(f64::NEG_INFINITY));
    for p in frames.iter().flatten() {
        lo = lo.min(*p);
        hi = hi.max(*p);
    }
    let pad = (hi - lo).max_abs().max(1e-3) * 0.05;
    (lo - Vec3::splat(pad), hi + Vec3::splat(pad))
}

pub fn slice(args: &SliceArgs) -> Result<()> {
    let traj = read_trajectory(&args.input)?;
    let (min, max) = match &args.config {
        Some(c) => (Vec3::ZERO, RunConfig::load(c, &Overrides::default())?.sim.domain_max()),
        None => bounds(&traj.frames),
    };
    let view = View { splat3: args.splat3, ..View::new(args.axis, args.width, args.height, min, max) };
    view.validate()?;
    let row = args.row.unwrap_or(args.height / 2);
    let image = spacetime_slice(&traj.frames, &view, row)?;
    image.write_pgm(&args.output)?;
    println!("{}×{} slice of row {row} written to {}", image.width, image.height, args.output.display());
    Ok(())
}

pub fn inspect(dir: &Path) -> Result<()> {
    let manifest = dir.join(MANIFEST);
    let text = fs::read_to_string(&manifest).with_context(|| format!("cannot read {}", manifest.display()))?;
    let cfg = crate::config::parse(&text).with_context(|| format!("invalid manifest {}", manifest.display()))?;
    println!("{}", serde_json::to_string_pretty(&cfg)?);

    let frames = (0..).take_while(|&i| dir.join(viscompm::dump::frame_file_name(i)).exists()).count();
    println!("frame dumps: {frames}");
    let diag = dir.join(DIAGNOSTICS);
    if !diag.exists() {
        println!("no {DIAGNOSTICS}");
        return Ok(());
    }
    let mut rdr = csv::Reader::from_path(&diag).with_context(|| format!("cannot read {}", diag.display()))?;
    let rows = rdr.deserialize().collect::<Result<Vec<FrameDiagnostics>, _>>()?;
    let (Some(first), Some(last)) = (rows.first(), rows.last()) else {
        println!("{DIAGNOSTICS} is empty");
        return Ok(());
    };
    let peak_speed = rows.iter().map(|r| r.max_speed).fold(0.0, f64::max);
    let position_clamps: usize = rows.iter().map(|r| r.position_clamps).sum();
    let return_clamps: usize = rows.iter().map(|r| r.return_map_clamps).sum();
    println!("frames {}..={} over {:.4} s", first.frame, last.frame, last.time - first.time);
    println!("total energy {:.6e} -> {:.6e} J", first.total, last.total);
    println!("kinetic energy {:.6e} -> {:.6e} J", first.kinetic, last.kinetic);
    println!("peak particle speed {peak_speed:.4} m/s");
    println!("position clamps {position_clamps}, return-map clamps {return_clamps}");
    Ok(())
}
