//! Command-line front end for the shape complementarity engine.

mod config;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use config::{load_config, normalize, RunConfig, ShapeConfig};
use shapecomp_core::affinity::{
    affinity_field, dsl_field, write_field_binary, write_field_csv, AffinityField, GridSpec,
    KernelParams,
};
use shapecomp_core::correlation::{
    sample_rotations_2d, sample_rotations_3d, translation_landscape, Pose, Rotation,
};
use shapecomp_core::geometry::{load_boundary, BoundarySolid};
use shapecomp_core::math::Quat;
use shapecomp_core::search::{
    multistart_search, parameter_sweep, pose_rmse, simulate_dynamics, DynamicsConfig,
    RefineConfig, SearchConfig, SweepAxis,
};
use shapecomp_core::shapes::{
    circle, example_pair, icosphere, pocket_block_mesh, pocket_peg_mesh, ExamplePair,
};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "shapecomp", about = "Shape complementarity analysis")]
struct Cli {
    /// Configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker thread count (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluates both affinity fields and writes binary + CSV outputs.
    Affinity {
        /// Field model: `sdf` or `dsl` (overrides the config).
        #[arg(long)]
        baseline: Option<String>,
    },
    /// Cross-correlation translation landscape for each sampled rotation.
    Landscape,
    /// Multi-start conjugate-gradient pose search.
    Search {
        /// `correct` or `cross` (overrides the config).
        #[arg(long)]
        pairing: Option<String>,
    },
    /// Damped rigid-body relaxation from the configured start pose.
    Simulate,
    /// Kernel parameter sweep with short re-refinement per value.
    Sweep,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("initializing the thread pool")?;
    }
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default_pair(),
    };
    if let Some(seed) = cli.seed {
        cfg.search.seed = seed;
    }
    fs::create_dir_all(&cli.out)
        .with_context(|| format!("creating output directory {}", cli.out.display()))?;

    match &cli.command {
        Command::Affinity { baseline } => {
            if let Some(b) = baseline {
                match b.as_str() {
                    "sdf" | "dsl" => cfg.grid.baseline = b.clone(),
                    other => bail!("unknown baseline `{other}`"),
                }
            }
            cmd_affinity(&cfg, &cli.out)
        }
        Command::Landscape => cmd_landscape(&cfg, &cli.out),
        Command::Search { pairing } => {
            if let Some(p) = pairing {
                match p.as_str() {
                    "correct" | "cross" => cfg.search.pairing = p.clone(),
                    other => bail!("unknown pairing `{other}`"),
                }
            }
            cmd_search(&cfg, &cli.out)
        }
        Command::Simulate => cmd_simulate(&cfg, &cli.out),
        Command::Sweep => cmd_sweep(&cfg, &cli.out),
    }
}

fn build_shape(sc: &ShapeConfig) -> Result<BoundarySolid> {
    match sc.kind.as_str() {
        "file" => {
            if sc.path.is_empty() {
                bail!("shape kind `file` needs a `path`");
            }
            Ok(load_boundary(Path::new(&sc.path), sc.boundary_format()?, sc.h_max)?)
        }
        "builtin" => build_builtin(&sc.name, sc.h_max),
        other => bail!("unknown shape kind `{other}`"),
    }
}

fn build_builtin(name: &str, h_max: f64) -> Result<BoundarySolid> {
    if let Some(rest) = name.strip_prefix("example") {
        let (idx, part) = rest
            .split_once('.')
            .with_context(|| format!("builtin `{name}`: expected exampleN.socket|peg"))?;
        let which = idx
            .parse::<usize>()
            .ok()
            .and_then(ExamplePair::from_index)
            .with_context(|| format!("builtin `{name}`: unknown example index"))?;
        let (socket, peg) = example_pair(which, h_max)?;
        return match part {
            "socket" => Ok(socket),
            "peg" => Ok(peg),
            other => bail!("builtin `{name}`: unknown part `{other}`"),
        };
    }
    match name {
        "circle" => Ok(circle(1.0, h_max)?),
        "sphere" => {
            // Pick the subdivision level that meets h_max on the unit sphere.
            let mut level = 0;
            let mut h = 1.2;
            while h > h_max && level < 6 {
                level += 1;
                h *= 0.5;
            }
            Ok(icosphere(1.0, level)?)
        }
        "pocket.block" => {
            let (v, t) = pocket_block_mesh(1.2, 1.0, 0.6, 0.5, 0.4, 0.5);
            Ok(BoundarySolid::from_triangles_3d(v, t, h_max)?)
        }
        "pocket.peg" => {
            let (v, t) = pocket_peg_mesh(0.6, 0.5, 0.4, 0.5, 1.1);
            Ok(BoundarySolid::from_triangles_3d(v, t, h_max)?)
        }
        other => bail!("unknown builtin shape `{other}`"),
    }
}

fn build_field(
    solid: &BoundarySolid,
    cfg: &RunConfig,
    shape_id: &str,
) -> Result<AffinityField> {
    let (lo, hi) = solid.bounding_box();
    let grid = GridSpec::covering(lo, hi, cfg.grid.spacing, cfg.grid.margin, solid.dimension());
    let mut field = match cfg.grid.baseline.as_str() {
        "dsl" => dsl_field(solid, &grid, &cfg.kernel, cfg.grid.budget)?,
        _ => affinity_field(solid, &grid, &cfg.kernel, cfg.grid.budget)?,
    };
    field.shape_id = shape_id.to_string();
    Ok(field)
}

fn shape_label(sc: &ShapeConfig) -> String {
    if sc.kind == "builtin" {
        sc.name.clone()
    } else {
        sc.path.clone()
    }
}

fn build_pair(cfg: &RunConfig) -> Result<(BoundarySolid, BoundarySolid)> {
    Ok((build_shape(&cfg.shape1)?, build_shape(&cfg.shape2)?))
}

fn cmd_affinity(cfg: &RunConfig, out: &Path) -> Result<()> {
    let (s1, s2) = build_pair(cfg)?;
    for (tag, solid, sc) in [("shape1", &s1, &cfg.shape1), ("shape2", &s2, &cfg.shape2)] {
        let t0 = std::time::Instant::now();
        let field = build_field(solid, cfg, &shape_label(sc))?;
        let dt = t0.elapsed();
        let bin = out.join(format!("field_{tag}.sdf"));
        let csv = out.join(format!("field_{tag}.csv"));
        write_field_binary(&bin, &field)?;
        write_field_csv(&csv, &field)?;
        println!(
            "{tag}: {} ({}D), {} nodes, max |rho| = {:.6e}, {:.2}s -> {}",
            field.shape_id,
            field.dimension(),
            field.grid().node_count(),
            field.max_abs(),
            dt.as_secs_f64(),
            bin.display()
        );
    }
    Ok(())
}

fn rotations_for(cfg: &RunConfig, dim: u8) -> Vec<Rotation> {
    if dim == 2 {
        sample_rotations_2d(
            cfg.search.rotations,
            (-cfg.search.range_rotation, cfg.search.range_rotation),
        )
    } else {
        sample_rotations_3d(cfg.search.rotations)
    }
}

fn rotation_columns(r: &Rotation) -> String {
    match r {
        Rotation::Planar(t) => format!("{t:e}"),
        Rotation::Spatial(q) => format!("{:e},{:e},{:e},{:e}", q.w, q.x, q.y, q.z),
    }
}

fn cmd_landscape(cfg: &RunConfig, out: &Path) -> Result<()> {
    let (s1, s2) = build_pair(cfg)?;
    let f1 = build_field(&s1, cfg, &shape_label(&cfg.shape1))?;
    let f2 = build_field(&s2, cfg, &shape_label(&cfg.shape2))?;
    let rotations = rotations_for(cfg, f1.dimension());
    let mut top: Vec<(f64, Pose)> = Vec::new();
    for (k, rot) in rotations.iter().enumerate() {
        let l = translation_landscape(&f1, &f2, rot, cfg.grid.budget)?;
        let path = out.join(format!("landscape_rot{k}.csv"));
        let mut w = std::io::BufWriter::new(fs::File::create(&path)?);
        if l.dimension() == 2 {
            writeln!(w, "tx,ty,re,im")?;
        } else {
            writeln!(w, "tx,ty,tz,re,im")?;
        }
        for i in 0..l.scores.len() {
            let t = l.translation(i);
            let z = l.scores[i];
            if l.dimension() == 2 {
                writeln!(w, "{:e},{:e},{:e},{:e}", t[0], t[1], z.re, z.im)?;
            } else {
                writeln!(w, "{:e},{:e},{:e},{:e},{:e}", t[0], t[1], t[2], z.re, z.im)?;
            }
        }
        let max_abs = l.scores.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let support = l.support_count(1e-9 * max_abs);
        for (_, pose, score) in l.top_k(5) {
            top.push((score, pose));
        }
        println!(
            "rotation {k}: {} nodes, support {} (|f| > 1e-9 max), max Re = {:.6e} -> {}",
            l.scores.len(),
            support,
            l.scores[l.argmax()].re,
            path.display()
        );
    }
    top.sort_by(|a, b| b.0.total_cmp(&a.0));
    let path = out.join("top_poses.csv");
    let mut w = std::io::BufWriter::new(fs::File::create(&path)?);
    if f1.dimension() == 2 {
        writeln!(w, "score,tx,ty,theta")?;
    } else {
        writeln!(w, "score,tx,ty,tz,qw,qx,qy,qz")?;
    }
    for (score, pose) in top.iter().take(20) {
        let t = pose.translation;
        if f1.dimension() == 2 {
            writeln!(w, "{:e},{:e},{:e},{}", score, t[0], t[1], rotation_columns(&pose.rotation))?;
        } else {
            writeln!(
                w,
                "{:e},{:e},{:e},{:e},{}",
                score,
                t[0],
                t[1],
                t[2],
                rotation_columns(&pose.rotation)
            )?;
        }
    }
    println!("top poses -> {}", path.display());
    Ok(())
}

fn search_config(cfg: &RunConfig) -> SearchConfig {
    let r = cfg.search.range_translation;
    SearchConfig {
        n_starts: cfg.search.starts,
        seed: cfg.search.seed,
        translation_range: [(-r, r), (-r, r), (-r, r)],
        rotation_range: (-cfg.search.range_rotation, cfg.search.range_rotation),
        refine: RefineConfig {
            iterations: cfg.search.iterations,
            delta_translation: cfg.search.delta_translation,
            delta_rotation: cfg.search.delta_rotation,
            ..RefineConfig::default()
        },
        top_fraction: cfg.search.top_fraction,
    }
}

fn run_one_search(
    cfg: &RunConfig,
    s1: &BoundarySolid,
    s2: &BoundarySolid,
    label1: &str,
    label2: &str,
    out: &Path,
    tag: &str,
) -> Result<f64> {
    let f1 = build_field(s1, cfg, label1)?;
    let f2 = build_field(s2, cfg, label2)?;
    let scfg = search_config(cfg);
    let outcomes = multistart_search(&f1, &f2, &scfg);
    let reference = Pose::identity(f1.dimension());
    let (t_rmse, r_rmse) = pose_rmse(&outcomes, &reference, scfg.top_fraction);

    let csv = out.join(format!("results{tag}.csv"));
    let mut w = std::io::BufWriter::new(fs::File::create(&csv)?);
    if f1.dimension() == 2 {
        writeln!(w, "rank,score,tx,ty,theta,start_tx,start_ty,start_theta,iterations")?;
    } else {
        writeln!(w, "rank,score,tx,ty,tz,qw,qx,qy,qz,iterations")?;
    }
    for (rank, o) in outcomes.iter().enumerate() {
        let p = &o.result.pose;
        if f1.dimension() == 2 {
            writeln!(
                w,
                "{},{:e},{:e},{:e},{},{:e},{:e},{},{}",
                rank,
                o.result.score,
                p.translation[0],
                p.translation[1],
                rotation_columns(&p.rotation),
                o.start.translation[0],
                o.start.translation[1],
                rotation_columns(&o.start.rotation),
                o.result.iterations
            )?;
        } else {
            writeln!(
                w,
                "{},{:e},{:e},{:e},{:e},{},{}",
                rank,
                o.result.score,
                p.translation[0],
                p.translation[1],
                p.translation[2],
                rotation_columns(&p.rotation),
                o.result.iterations
            )?;
        }
    }

    let report = out.join(format!("report{tag}.txt"));
    let mut w = std::io::BufWriter::new(fs::File::create(&report)?);
    writeln!(w, "pair: {label1} vs {label2}")?;
    writeln!(w, "seed: {}", cfg.search.seed)?;
    writeln!(w, "starts: {}  iterations: {}", cfg.search.starts, cfg.search.iterations)?;
    writeln!(w, "best score: {:e}", outcomes[0].result.score)?;
    writeln!(
        w,
        "top-{:.0}% RMSE: translation {:e}, rotation {:e} rad",
        100.0 * scfg.top_fraction,
        t_rmse,
        r_rmse
    )?;
    writeln!(w)?;
    writeln!(w, "{:>4} {:>14} {:>22}", "rank", "score", "pose")?;
    for (rank, o) in outcomes.iter().enumerate() {
        let p = &o.result.pose;
        writeln!(
            w,
            "{:>4} {:>14.6e} t=({:.4},{:.4},{:.4}) r={}",
            rank,
            o.result.score,
            p.translation[0],
            p.translation[1],
            p.translation[2],
            rotation_columns(&p.rotation)
        )?;
    }
    println!(
        "{label1} vs {label2}: best {:.6e}, RMSE t {:.3e} / r {:.3e} -> {}",
        outcomes[0].result.score,
        t_rmse,
        r_rmse,
        report.display()
    );
    Ok(outcomes[0].result.score)
}

fn cmd_search(cfg: &RunConfig, out: &Path) -> Result<()> {
    fs::write(out.join("run_config.txt"), normalize(cfg))?;
    let l1 = shape_label(&cfg.shape1);
    let l2 = shape_label(&cfg.shape2);
    if cfg.search.pairing == "cross" {
        // Fixed socket against every builtin example peg.
        let s1 = build_shape(&cfg.shape1)?;
        let mut table = Vec::new();
        for idx in 1..=3 {
            let name = format!("example{idx}.peg");
            let s2 = build_builtin(&name, cfg.shape2.h_max)?;
            let best = run_one_search(cfg, &s1, &s2, &l1, &name, out, &format!("_peg{idx}"))?;
            table.push((name, best));
        }
        let path = out.join("cross_pairing.csv");
        let mut w = std::io::BufWriter::new(fs::File::create(&path)?);
        writeln!(w, "peg,best_score")?;
        for (name, best) in &table {
            writeln!(w, "{name},{best:e}")?;
        }
        println!("cross-pairing table -> {}", path.display());
    } else {
        let (s1, s2) = build_pair(cfg)?;
        run_one_search(cfg, &s1, &s2, &l1, &l2, out, "")?;
    }
    Ok(())
}

fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<()> {
    let (s1, s2) = build_pair(cfg)?;
    let f1 = build_field(&s1, cfg, &shape_label(&cfg.shape1))?;
    let f2 = build_field(&s2, cfg, &shape_label(&cfg.shape2))?;
    let dim = f1.dimension();
    let start = if dim == 2 {
        Pose::planar(cfg.sim.start_x, cfg.sim.start_y, cfg.sim.start_theta)
    } else {
        Pose {
            rotation: Rotation::Spatial(Quat::from_axis_angle(
                [0.0, 0.0, 1.0],
                cfg.sim.start_theta,
            )),
            translation: [cfg.sim.start_x, cfg.sim.start_y, cfg.sim.start_z],
        }
    };
    let dcfg = DynamicsConfig {
        dt: cfg.sim.dt,
        steps: cfg.sim.steps,
        mass: cfg.sim.mass,
        inertia: cfg.sim.inertia,
        damping: cfg.sim.damping,
        delta_translation: cfg.search.delta_translation,
        delta_rotation: cfg.search.delta_rotation,
    };
    let traj = simulate_dynamics(&f1, &f2, start, &dcfg);
    let path = out.join("trajectory.csv");
    let mut w = std::io::BufWriter::new(fs::File::create(&path)?);
    if dim == 2 {
        writeln!(w, "t,tx,ty,theta,score,energy")?;
    } else {
        writeln!(w, "t,tx,ty,tz,qw,qx,qy,qz,score,energy")?;
    }
    for s in &traj.samples {
        let p = &s.pose;
        if dim == 2 {
            writeln!(
                w,
                "{:e},{:e},{:e},{},{:e},{:e}",
                s.time,
                p.translation[0],
                p.translation[1],
                rotation_columns(&p.rotation),
                s.score,
                -s.score
            )?;
        } else {
            writeln!(
                w,
                "{:e},{:e},{:e},{:e},{},{:e},{:e}",
                s.time,
                p.translation[0],
                p.translation[1],
                p.translation[2],
                rotation_columns(&p.rotation),
                s.score,
                -s.score
            )?;
        }
    }
    let first = &traj.samples[0];
    let last = traj.last();
    println!(
        "simulate: {} steps, score {:.6e} -> {:.6e}{} -> {}",
        traj.samples.len() - 1,
        first.score,
        last.score,
        if traj.aborted { " (aborted)" } else { "" },
        path.display()
    );
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<()> {
    let (s1, s2) = build_pair(cfg)?;
    let axis = match cfg.search.sweep_axis.as_str() {
        "sigma" => SweepAxis::Sigma,
        _ => SweepAxis::Penalty,
    };
    let reference = Pose::identity(s1.dimension());
    let build = |params: &KernelParams| {
        let mut c = cfg.clone();
        c.kernel = *params;
        let f1 = build_field(&s1, &c, "shape1").expect("field build");
        let f2 = build_field(&s2, &c, "shape2").expect("field build");
        (f1, f2)
    };
    let points = parameter_sweep(
        build,
        &cfg.kernel,
        axis,
        &cfg.search.sweep_values,
        &reference,
        cfg.search.sweep_iterations,
    );
    let path = out.join("sweep.csv");
    let mut w = std::io::BufWriter::new(fs::File::create(&path)?);
    writeln!(w, "value,sigma,lambda1,lambda2,score,translation_error,rotation_error")?;
    for p in &points {
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            p.value,
            p.params.sigma,
            p.params.lambda1,
            p.params.lambda2,
            p.score,
            p.translation_error,
            p.rotation_error
        )?;
    }
    for p in &points {
        println!(
            "{} = {}: score {:.6e}, err t {:.3e} / r {:.3e}",
            cfg.search.sweep_axis, p.value, p.score, p.translation_error, p.rotation_error
        );
    }
    println!("sweep table -> {}", path.display());
    Ok(())
}
