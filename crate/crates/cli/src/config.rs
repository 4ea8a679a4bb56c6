//! Line-oriented `key = value` run configuration with fixed sections.

use anyhow::{bail, Context, Result};
use shapecomp_core::affinity::KernelParams;
use shapecomp_core::geometry::BoundaryFormat;
use std::fmt::Write as _;
use std::path::Path;

/// Where a shape comes from: a generator name or a mesh/polygon file.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeConfig {
    /// `builtin` or `file`.
    pub kind: String,
    /// Generator name for builtins (e.g. `example1.socket`, `sphere`,
    /// `pocket.block`, `pocket.peg`).
    pub name: String,
    /// Input path for `kind = file`.
    pub path: String,
    /// `poly2d` or `off3d`, used for `kind = file`.
    pub format: String,
    /// Boundary refinement limit (max element diameter).
    pub h_max: f64,
}

impl Default for ShapeConfig {
    fn default() -> ShapeConfig {
        ShapeConfig {
            kind: "builtin".into(),
            name: "example1.socket".into(),
            path: String::new(),
            format: "poly2d".into(),
            h_max: 0.05,
        }
    }
}

impl ShapeConfig {
    pub fn boundary_format(&self) -> Result<BoundaryFormat> {
        match self.format.as_str() {
            "poly2d" => Ok(BoundaryFormat::Poly2d),
            "off3d" => Ok(BoundaryFormat::Off3d),
            other => bail!("unknown shape format `{other}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub spacing: f64,
    /// Extra margin added around the shape bounding box.
    pub margin: f64,
    /// Maximum number of field / correlation lattice nodes.
    pub budget: usize,
    /// `sdf` or `dsl`.
    pub baseline: String,
}

impl Default for GridConfig {
    fn default() -> GridConfig {
        GridConfig {
            spacing: 0.05,
            margin: 1.0,
            budget: 1 << 26,
            baseline: "sdf".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSection {
    pub starts: usize,
    pub iterations: usize,
    pub seed: u64,
    pub delta_translation: f64,
    pub delta_rotation: f64,
    /// Half-width of the uniform translation start box.
    pub range_translation: f64,
    /// Half-width of the uniform rotation start interval (radians).
    pub range_rotation: f64,
    pub top_fraction: f64,
    /// Rotation samples for the landscape sweep.
    pub rotations: usize,
    /// `correct` or `cross`.
    pub pairing: String,
    /// `penalty` or `sigma`.
    pub sweep_axis: String,
    /// Comma-separated sweep values.
    pub sweep_values: Vec<f64>,
    /// CG iterations per sweep point.
    pub sweep_iterations: usize,
}

impl Default for SearchSection {
    fn default() -> SearchSection {
        SearchSection {
            starts: 25,
            iterations: 100,
            seed: 0,
            delta_translation: 0.01,
            delta_rotation: 0.01,
            range_translation: 2.5,
            range_rotation: std::f64::consts::FRAC_PI_4,
            top_fraction: 0.2,
            rotations: 9,
            pairing: "correct".into(),
            sweep_axis: "penalty".into(),
            sweep_values: vec![3.0, 5.0, 10.0],
            sweep_iterations: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub steps: usize,
    pub dt: f64,
    pub mass: f64,
    pub inertia: f64,
    pub damping: f64,
    /// Starting pose offset of the moving shape.
    pub start_x: f64,
    pub start_y: f64,
    pub start_z: f64,
    pub start_theta: f64,
}

impl Default for SimConfig {
    fn default() -> SimConfig {
        SimConfig {
            steps: 1000,
            dt: 0.01,
            mass: 1.0,
            inertia: 1.0,
            damping: 2.0,
            start_x: 0.5,
            start_y: 0.5,
            start_z: 0.0,
            start_theta: 0.2,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub shape1: ShapeConfig,
    pub shape2: ShapeConfig,
    pub kernel: KernelParams,
    pub grid: GridConfig,
    pub search: SearchSection,
    pub sim: SimConfig,
}

impl RunConfig {
    /// §-style defaults with the peg of the same example as the moving shape.
    pub fn default_pair() -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.shape2.name = "example1.peg".into();
        cfg
    }
}

fn parse_f64(v: &str, key: &str) -> Result<f64> {
    v.parse::<f64>()
        .with_context(|| format!("key `{key}`: expected a number, got `{v}`"))
}

fn parse_usize(v: &str, key: &str) -> Result<usize> {
    v.parse::<usize>()
        .with_context(|| format!("key `{key}`: expected an integer, got `{v}`"))
}

/// Parses configuration text. Unknown sections or keys are errors.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default_pair();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                bail!("line {}: malformed section header `{line}`", lineno + 1);
            }
            section = line[1..line.len() - 1].trim().to_string();
            match section.as_str() {
                "shape1" | "shape2" | "kernel" | "grid" | "search" | "sim" => {}
                other => bail!("line {}: unknown section `[{other}]`", lineno + 1),
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {}: expected `key = value`, got `{line}`", lineno + 1);
        };
        let key = key.trim();
        let v = value.trim();
        let qkey = format!("{section}.{key}");
        match section.as_str() {
            "shape1" | "shape2" => {
                let s = if section == "shape1" {
                    &mut cfg.shape1
                } else {
                    &mut cfg.shape2
                };
                match key {
                    "kind" => match v {
                        "builtin" | "file" => s.kind = v.into(),
                        other => bail!("key `{qkey}`: unknown kind `{other}`"),
                    },
                    "name" => s.name = v.into(),
                    "path" => s.path = v.into(),
                    "format" => match v {
                        "poly2d" | "off3d" => s.format = v.into(),
                        other => bail!("key `{qkey}`: unknown format `{other}`"),
                    },
                    "h_max" => s.h_max = parse_f64(v, &qkey)?,
                    _ => bail!("unknown key `{qkey}`"),
                }
            }
            "kernel" => match key {
                "sigma" => cfg.kernel.sigma = parse_f64(v, &qkey)?,
                "lambda1" => cfg.kernel.lambda1 = parse_f64(v, &qkey)?,
                "lambda2" => cfg.kernel.lambda2 = parse_f64(v, &qkey)?,
                "eps" => cfg.kernel.eps = parse_f64(v, &qkey)?,
                "probe_radius" => cfg.kernel.probe_radius = parse_f64(v, &qkey)?,
                _ => bail!("unknown key `{qkey}`"),
            },
            "grid" => match key {
                "spacing" => cfg.grid.spacing = parse_f64(v, &qkey)?,
                "margin" => cfg.grid.margin = parse_f64(v, &qkey)?,
                "budget" => cfg.grid.budget = parse_usize(v, &qkey)?,
                "baseline" => match v {
                    "sdf" | "dsl" => cfg.grid.baseline = v.into(),
                    other => bail!("key `{qkey}`: unknown baseline `{other}`"),
                },
                _ => bail!("unknown key `{qkey}`"),
            },
            "search" => match key {
                "starts" => cfg.search.starts = parse_usize(v, &qkey)?,
                "iterations" => cfg.search.iterations = parse_usize(v, &qkey)?,
                "seed" => {
                    cfg.search.seed = v
                        .parse::<u64>()
                        .with_context(|| format!("key `{qkey}`: expected u64, got `{v}`"))?
                }
                "delta_translation" => cfg.search.delta_translation = parse_f64(v, &qkey)?,
                "delta_rotation" => cfg.search.delta_rotation = parse_f64(v, &qkey)?,
                "range_translation" => cfg.search.range_translation = parse_f64(v, &qkey)?,
                "range_rotation" => cfg.search.range_rotation = parse_f64(v, &qkey)?,
                "top_fraction" => cfg.search.top_fraction = parse_f64(v, &qkey)?,
                "rotations" => cfg.search.rotations = parse_usize(v, &qkey)?,
                "pairing" => match v {
                    "correct" | "cross" => cfg.search.pairing = v.into(),
                    other => bail!("key `{qkey}`: unknown pairing `{other}`"),
                },
                "sweep_axis" => match v {
                    "penalty" | "sigma" => cfg.search.sweep_axis = v.into(),
                    other => bail!("key `{qkey}`: unknown sweep axis `{other}`"),
                },
                "sweep_values" => {
                    let vals: Result<Vec<f64>> = v
                        .split(',')
                        .map(|s| parse_f64(s.trim(), &qkey))
                        .collect();
                    let vals = vals?;
                    if vals.is_empty() {
                        bail!("key `{qkey}`: needs at least one value");
                    }
                    cfg.search.sweep_values = vals;
                }
                "sweep_iterations" => cfg.search.sweep_iterations = parse_usize(v, &qkey)?,
                _ => bail!("unknown key `{qkey}`"),
            },
            "sim" => match key {
                "steps" => cfg.sim.steps = parse_usize(v, &qkey)?,
                "dt" => cfg.sim.dt = parse_f64(v, &qkey)?,
                "mass" => cfg.sim.mass = parse_f64(v, &qkey)?,
                "inertia" => cfg.sim.inertia = parse_f64(v, &qkey)?,
                "damping" => cfg.sim.damping = parse_f64(v, &qkey)?,
                "start_x" => cfg.sim.start_x = parse_f64(v, &qkey)?,
                "start_y" => cfg.sim.start_y = parse_f64(v, &qkey)?,
                "start_z" => cfg.sim.start_z = parse_f64(v, &qkey)?,
                "start_theta" => cfg.sim.start_theta = parse_f64(v, &qkey)?,
                _ => bail!("unknown key `{qkey}`"),
            },
            "" => bail!("line {}: key `{key}` appears before any section", lineno + 1),
            _ => unreachable!(),
        }
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse_config(&text).with_context(|| format!("parsing config {}", path.display()))
}

fn fmt_num(x: f64) -> String {
    // Full-precision but stable: shortest representation that round-trips.
    format!("{x}")
}

/// Canonical text form. `parse_config(normalize(c))` yields `c` and
/// `normalize` is idempotent.
pub fn normalize(cfg: &RunConfig) -> String {
    let mut s = String::new();
    for (title, sc) in [("shape1", &cfg.shape1), ("shape2", &cfg.shape2)] {
        let _ = writeln!(s, "[{title}]");
        let _ = writeln!(s, "kind = {}", sc.kind);
        let _ = writeln!(s, "name = {}", sc.name);
        let _ = writeln!(s, "path = {}", sc.path);
        let _ = writeln!(s, "format = {}", sc.format);
        let _ = writeln!(s, "h_max = {}", fmt_num(sc.h_max));
        let _ = writeln!(s);
    }
    let k = &cfg.kernel;
    let _ = writeln!(s, "[kernel]");
    let _ = writeln!(s, "sigma = {}", fmt_num(k.sigma));
    let _ = writeln!(s, "lambda1 = {}", fmt_num(k.lambda1));
    let _ = writeln!(s, "lambda2 = {}", fmt_num(k.lambda2));
    let _ = writeln!(s, "eps = {}", fmt_num(k.eps));
    let _ = writeln!(s, "probe_radius = {}", fmt_num(k.probe_radius));
    let _ = writeln!(s);
    let g = &cfg.grid;
    let _ = writeln!(s, "[grid]");
    let _ = writeln!(s, "spacing = {}", fmt_num(g.spacing));
    let _ = writeln!(s, "margin = {}", fmt_num(g.margin));
    let _ = writeln!(s, "budget = {}", g.budget);
    let _ = writeln!(s, "baseline = {}", g.baseline);
    let _ = writeln!(s);
    let sr = &cfg.search;
    let _ = writeln!(s, "[search]");
    let _ = writeln!(s, "starts = {}", sr.starts);
    let _ = writeln!(s, "iterations = {}", sr.iterations);
    let _ = writeln!(s, "seed = {}", sr.seed);
    let _ = writeln!(s, "delta_translation = {}", fmt_num(sr.delta_translation));
    let _ = writeln!(s, "delta_rotation = {}", fmt_num(sr.delta_rotation));
    let _ = writeln!(s, "range_translation = {}", fmt_num(sr.range_translation));
    let _ = writeln!(s, "range_rotation = {}", fmt_num(sr.range_rotation));
    let _ = writeln!(s, "top_fraction = {}", fmt_num(sr.top_fraction));
    let _ = writeln!(s, "rotations = {}", sr.rotations);
    let _ = writeln!(s, "pairing = {}", sr.pairing);
    let _ = writeln!(s, "sweep_axis = {}", sr.sweep_axis);
    let _ = writeln!(
        s,
        "sweep_values = {}",
        sr.sweep_values
            .iter()
            .map(|v| fmt_num(*v))
            .collect::<Vec<_>>()
            .join(",")
    );
    let _ = writeln!(s, "sweep_iterations = {}", sr.sweep_iterations);
    let _ = writeln!(s);
    let m = &cfg.sim;
    let _ = writeln!(s, "[sim]");
    let _ = writeln!(s, "steps = {}", m.steps);
    let _ = writeln!(s, "dt = {}", fmt_num(m.dt));
    let _ = writeln!(s, "mass = {}", fmt_num(m.mass));
    let _ = writeln!(s, "inertia = {}", fmt_num(m.inertia));
    let _ = writeln!(s, "damping = {}", fmt_num(m.damping));
    let _ = writeln!(s, "start_x = {}", fmt_num(m.start_x));
    let _ = writeln!(s, "start_y = {}", fmt_num(m.start_y));
    let _ = writeln!(s, "start_z = {}", fmt_num(m.start_z));
    let _ = writeln!(s, "start_theta = {}", fmt_num(m.start_theta));
    s
}
