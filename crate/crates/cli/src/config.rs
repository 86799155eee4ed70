//! Run configuration: JSON config file with flat keys, every key overridable
//! by the CLI flag of the same name.

use std::path::PathBuf;

use clap::Parser;
use serde::Deserialize;
use torcyl_core::optimizer::OptimizerConfig;
use torcyl_core::Mode;

#[derive(Debug, Parser)]
#[command(
    name = "torcyl",
    about = "Torsion functions and volume-constrained shape optimization in a cylinder"
)]
pub struct Cli {
    /// JSON config file; CLI flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Command: solve | symmetrize | optimize | sweep | verify | enumerate.
    #[arg(long)]
    pub cmd: Option<String>,

    /// Cross-section width.
    #[arg(long)]
    pub a: Option<f64>,

    /// Axial half-length of the truncation.
    #[arg(long = "L")]
    pub length: Option<f64>,

    /// Grid resolution in cells per unit length.
    #[arg(long)]
    pub res: Option<usize>,

    /// full | half.
    #[arg(long)]
    pub mode: Option<String>,

    /// Target volume.
    #[arg(long)]
    pub c: Option<f64>,

    /// Volume range LO:HI:STEP for sweeps.
    #[arg(long = "c-range")]
    pub c_range: Option<String>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long = "max-iters")]
    pub max_iters: Option<usize>,

    /// Steiner-symmetrize the evolving mask every k iterations (0 disables).
    #[arg(long = "sym-every")]
    pub sym_every: Option<usize>,

    /// on | off.
    #[arg(long)]
    pub vtk: Option<String>,

    /// Optimizer strategy: levelset | cellswap | brute.
    #[arg(long)]
    pub method: Option<String>,

    /// Initial / solved shape: rect | halfdisk | blob | disk.
    #[arg(long)]
    pub shape: Option<String>,

    #[arg(long = "solver-tol")]
    pub solver_tol: Option<f64>,

    #[arg(long = "volume-tol")]
    pub volume_tol: Option<f64>,

    #[arg(long)]
    pub cfl: Option<f64>,

    /// Initial level-set perturbation amplitude, in cells.
    #[arg(long)]
    pub perturb: Option<f64>,

    /// Cell count for the enumerate command.
    #[arg(long)]
    pub k: Option<usize>,

    /// Enumeration cap for the brute-force strategy.
    #[arg(long)]
    pub cap: Option<u128>,
}

/// Flat JSON mirror of the CLI flags (snake_case keys).
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub cmd: Option<String>,
    pub a: Option<f64>,
    #[serde(rename = "L")]
    pub length: Option<f64>,
    pub res: Option<usize>,
    pub mode: Option<String>,
    pub c: Option<f64>,
    pub c_range: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub max_iters: Option<usize>,
    pub sym_every: Option<usize>,
    pub vtk: Option<String>,
    pub method: Option<String>,
    pub shape: Option<String>,
    pub solver_tol: Option<f64>,
    pub volume_tol: Option<f64>,
    pub cfl: Option<f64>,
    pub perturb: Option<f64>,
    pub k: Option<usize>,
    pub cap: Option<u128>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub cmd: String,
    pub a: f64,
    pub length: f64,
    pub res: usize,
    pub mode: Mode,
    pub c: f64,
    pub c_range: Option<(f64, f64, f64)>,
    pub seed: u64,
    pub out: PathBuf,
    pub vtk: bool,
    pub method: String,
    pub shape: String,
    pub k: Option<usize>,
    /// Residual for plain solves (tighter than the optimizer default).
    pub solve_tol: f64,
    pub optimizer: OptimizerConfig,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid config: {}", self.0)
    }
}

fn parse_mode(s: &str) -> Result<Mode, ConfigError> {
    match s {
        "full" => Ok(Mode::Full),
        "half" => Ok(Mode::Half),
        other => Err(ConfigError(format!("mode must be full or half, got '{other}'"))),
    }
}

fn parse_on_off(s: &str) -> Result<bool, ConfigError> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        other => Err(ConfigError(format!("vtk must be on or off, got '{other}'"))),
    }
}

fn parse_range(s: &str) -> Result<(f64, f64, f64), ConfigError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(ConfigError(format!("c-range must be LO:HI:STEP, got '{s}'")));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| ConfigError(format!("c-range parse: {e}")))?;
    if !(nums[0] > 0.0 && nums[0] < nums[1] && nums[2] > 0.0) {
        return Err(ConfigError(format!(
            "c-range needs 0 < start < end and a positive step, got '{s}'"
        )));
    }
    Ok((nums[0], nums[1], nums[2]))
}

impl RunConfig {
    /// Merge CLI flags over the config file over the defaults.
    pub fn resolve(cli: &Cli) -> Result<RunConfig, ConfigError> {
        let file: FileConfig = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| ConfigError(format!("config JSON: {e}")))?
            }
            None => FileConfig::default(),
        };
        let cmd = cli
            .cmd
            .clone()
            .or(file.cmd)
            .ok_or_else(|| ConfigError("missing --cmd".into()))?;
        let a = cli.a.or(file.a).unwrap_or(1.0);
        let length = cli.length.or(file.length).unwrap_or(2.0);
        let res = cli.res.or(file.res).unwrap_or(128);
        let mode = parse_mode(cli.mode.as_deref().or(file.mode.as_deref()).unwrap_or("full"))?;
        let c = cli.c.or(file.c).unwrap_or(0.5);
        let c_range = match cli.c_range.as_deref().or(file.c_range.as_deref()) {
            Some(s) => Some(parse_range(s)?),
            None => None,
        };
        let seed = cli.seed.or(file.seed).unwrap_or(0);
        let out = cli.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("out"));
        let vtk = parse_on_off(cli.vtk.as_deref().or(file.vtk.as_deref()).unwrap_or("off"))?;
        let method = cli
            .method
            .clone()
            .or(file.method)
            .unwrap_or_else(|| "levelset".into());
        let shape = cli.shape.clone().or(file.shape).unwrap_or_else(|| "rect".into());
        if !(a > 0.0 && length > 0.0 && c > 0.0) {
            return Err(ConfigError("a, L and c must be positive".into()));
        }
        let defaults = OptimizerConfig::default();
        let optimizer = OptimizerConfig {
            cfl: cli.cfl.or(file.cfl).unwrap_or(defaults.cfl),
            max_iters: cli.max_iters.or(file.max_iters).unwrap_or(defaults.max_iters),
            volume_tol: cli.volume_tol.or(file.volume_tol).unwrap_or(defaults.volume_tol),
            symmetrize_every: cli.sym_every.or(file.sym_every).unwrap_or(defaults.symmetrize_every),
            solver_tol: cli.solver_tol.or(file.solver_tol).unwrap_or(defaults.solver_tol),
            seed,
            perturb_amplitude: cli.perturb.or(file.perturb).unwrap_or(defaults.perturb_amplitude),
            enum_cap: cli.cap.or(file.cap).unwrap_or(defaults.enum_cap),
            ..defaults
        };
        optimizer
            .validate()
            .map_err(|e| ConfigError(e.to_string()))?;
        Ok(RunConfig {
            cmd,
            a,
            length,
            res,
            mode,
            c,
            c_range,
            seed,
            out,
            vtk,
            method,
            shape,
            k: cli.k.or(file.k),
            solve_tol: cli.solver_tol.or(file.solver_tol).unwrap_or(1e-10),
            optimizer,
        })
    }

    /// The c values of a sweep (inclusive of the endpoint within half a step).
    pub fn sweep_volumes(&self) -> Vec<f64> {
        match self.c_range {
            None => vec![self.c],
            Some((lo, hi, step)) => {
                let mut out = Vec::new();
                let mut v = lo;
                while v <= hi + 0.5 * step {
                    out.push(v);
                    v += step;
                }
                out
            }
        }
    }
}
