//! Command-line front end.
//!
//! Every job option can be given as a flag or in a `key = value` file
//! passed with `--config` (keys are the flag names without dashes, e.g.
//! `kappa`, `h-amb`, `target-tau`); flags override the file.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use nalgebra::Matrix3;

use crate::ambient::{AmbientPoint, ModelSpace, H_FIRST};
use crate::compatibility::{default_tol, verify};
use crate::correspondence::{constant_mean_curvature, sister, twin, Phase};
use crate::error::{Error, Result};
use crate::immersion::{
    adapted_frame, catalog::NAMES, fundamental_data_with, CatalogSurface, ExtractOptions,
    NormalRoute, QuadrupleField, Rect, SurfacePatch, DEFAULT_GRID,
};
use crate::io::{
    fmt_num, obj_to_string, patch_from_str, quadruple_from_str, quadruple_to_string, read_file,
    write_file,
};
use crate::reconstruction::{corner_holonomy, initial_frame, reconstruct, Reconstruction};

/// Exit status of a job that ran and passed.
pub const EXIT_PASS: i32 = 0;
/// Exit status of a usage, input, or domain error.
pub const EXIT_ERROR: i32 = 1;
/// Exit status of a verification that ran and failed.
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "homsurf", version, about = "Surfaces in homogeneous 3-manifolds E(kappa, tau)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Catalog of explicit surfaces.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Check the compatibility equations; exit 0 on PASS, 2 on FAIL.
    Verify(JobArgs),
    /// Sister data in another model with the same kappa - 4 tau^2.
    Sister(JobArgs),
    /// Twin data (mean curvature -H) in the same model.
    Twin(JobArgs),
    /// Integrate the immersion determined by the data and write a mesh.
    Reconstruct(JobArgs),
    /// Write the sampled patch as a Wavefront mesh.
    Export(JobArgs),
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    /// List catalog surfaces with their model and default rectangle.
    List,
}

#[derive(Debug, Default, Clone, Args)]
pub struct JobArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    /// Catalog surface name.
    #[arg(long)]
    pub catalog: Option<String>,
    /// Mean curvature parameter of `tube` and `sphere`; the twin's source H.
    #[arg(long = "H", allow_hyphen_values = true)]
    pub h: Option<f64>,
    /// Grid size as NxM.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub u0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub u1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub v0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub v1: Option<f64>,
    /// Step of the coordinate Christoffel stencil.
    #[arg(long = "h-amb")]
    pub h_amb: Option<f64>,
    /// Compatibility tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Main output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Quadruple file used as the surface source.
    #[arg(long)]
    pub quadruple: Option<PathBuf>,
    /// Sampled-patch file used as the surface source.
    #[arg(long)]
    pub patch: Option<PathBuf>,
    /// Also integrate the transformed data and write a mesh.
    #[arg(long)]
    pub reconstruct: bool,
    /// Mesh file written by `--reconstruct`.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Sign of the target mean curvature (+1 or -1).
    #[arg(long = "h2-sign", allow_hyphen_values = true)]
    pub h2_sign: Option<f64>,
    #[arg(long = "target-kappa", allow_hyphen_values = true)]
    pub target_kappa: Option<f64>,
    #[arg(long = "target-tau", allow_hyphen_values = true)]
    pub target_tau: Option<f64>,
    /// `frame` or `coordinate`.
    #[arg(long = "normal-route")]
    pub normal_route: Option<String>,
    /// `key = value` file with defaults for the options above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Where the surface data come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Catalog(CatalogSurface),
    Quadruple(PathBuf),
    Patch(PathBuf),
}

/// Fully resolved job options.
#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub source: Source,
    pub kappa: Option<f64>,
    pub tau: Option<f64>,
    pub h: Option<f64>,
    pub grid: (usize, usize),
    pub u0: Option<f64>,
    pub u1: Option<f64>,
    pub v0: Option<f64>,
    pub v1: Option<f64>,
    pub h_amb: f64,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub reconstruct: bool,
    pub mesh: Option<PathBuf>,
    pub h2_sign: f64,
    pub target_kappa: Option<f64>,
    pub target_tau: Option<f64>,
    pub normal_route: NormalRoute,
}

/// Parses `NxM`.
pub fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidParameter(format!("grid must look like 81x81, got '{s}'"));
    let (a, b) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

/// Reads `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<HashMap<String, String>> {
    let mut out = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or(Error::Parse { line: n + 1, msg: "expected 'key = value'".into() })?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

const CONFIG_KEYS: [&str; 21] = [
    "kappa", "tau", "catalog", "H", "grid", "u0", "u1", "v0", "v1", "h-amb", "tol", "out",
    "quadruple", "patch", "reconstruct", "mesh", "h2-sign", "target-kappa", "target-tau",
    "normal-route", "config",
];

impl JobConfig {
    pub fn resolve(args: &JobArgs) -> Result<JobConfig> {
        let file = match &args.config {
            Some(p) => parse_config(&read_file(p)?)?,
            None => HashMap::new(),
        };
        if let Some(k) = file.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
            return Err(Error::InvalidParameter(format!("unknown config key '{k}'")));
        }
        fn pick<T: FromStr + Clone>(flag: &Option<T>, file: &HashMap<String, String>, key: &str) -> Result<Option<T>> {
            if let Some(v) = flag {
                return Ok(Some(v.clone()));
            }
            match file.get(key) {
                Some(s) => s
                    .parse()
                    .map(Some)
                    .map_err(|_| Error::InvalidParameter(format!("bad value '{s}' for '{key}'"))),
                None => Ok(None),
            }
        }
        let catalog: Option<String> = pick(&args.catalog, &file, "catalog")?;
        let quadruple: Option<PathBuf> = pick(&args.quadruple, &file, "quadruple")?;
        let patch: Option<PathBuf> = pick(&args.patch, &file, "patch")?;
        let h: Option<f64> = pick(&args.h, &file, "H")?;
        let source = match (catalog, quadruple, patch) {
            (Some(c), None, None) => Source::Catalog(CatalogSurface::from_name(&c, h)?),
            (None, Some(q), None) => Source::Quadruple(q),
            (None, None, Some(p)) => Source::Patch(p),
            _ => {
                return Err(Error::InvalidParameter(
                    "give exactly one of --catalog, --quadruple, --patch".into(),
                ))
            }
        };
        let grid = match pick(&args.grid, &file, "grid")? {
            Some(s) => parse_grid(&s)?,
            None => (DEFAULT_GRID, DEFAULT_GRID),
        };
        let reconstruct = args.reconstruct
            || match file.get("reconstruct").map(String::as_str) {
                None | Some("false") => false,
                Some("true") => true,
                Some(s) => return Err(Error::InvalidParameter(format!("bad value '{s}' for 'reconstruct'"))),
            };
        let h2_sign = pick(&args.h2_sign, &file, "h2-sign")?.unwrap_or(1.0);
        if h2_sign != 1.0 && h2_sign != -1.0 {
            return Err(Error::InvalidParameter(format!("h2-sign must be +1 or -1, got {h2_sign}")));
        }
        let normal_route = match pick::<String>(&args.normal_route, &file, "normal-route")?.as_deref() {
            None | Some("frame") => NormalRoute::Frame,
            Some("coordinate") => NormalRoute::Coordinate,
            Some(s) => return Err(Error::InvalidParameter(format!("unknown normal route '{s}'"))),
        };
        Ok(JobConfig {
            source,
            kappa: pick(&args.kappa, &file, "kappa")?,
            tau: pick(&args.tau, &file, "tau")?,
            h,
            grid,
            u0: pick(&args.u0, &file, "u0")?,
            u1: pick(&args.u1, &file, "u1")?,
            v0: pick(&args.v0, &file, "v0")?,
            v1: pick(&args.v1, &file, "v1")?,
            h_amb: pick(&args.h_amb, &file, "h-amb")?.unwrap_or(H_FIRST),
            tol: pick(&args.tol, &file, "tol")?,
            out: pick(&args.out, &file, "out")?,
            reconstruct,
            mesh: pick(&args.mesh, &file, "mesh")?,
            h2_sign,
            target_kappa: pick(&args.target_kappa, &file, "target-kappa")?,
            target_tau: pick(&args.target_tau, &file, "target-tau")?,
            normal_route,
        })
    }

    /// The model of the source with `--kappa`/`--tau` applied on top.
    fn model_over(&self, base: ModelSpace) -> Result<ModelSpace> {
        ModelSpace::new(self.kappa.unwrap_or(base.kappa()), self.tau.unwrap_or(base.tau()))
    }

    fn target_model(&self) -> Result<ModelSpace> {
        match (self.target_kappa, self.target_tau) {
            (Some(k), Some(t)) => ModelSpace::new(k, t),
            _ => Err(Error::InvalidParameter("sister needs --target-kappa and --target-tau".into())),
        }
    }

    fn rect(&self, base: Rect) -> Rect {
        Rect::new(
            self.u0.unwrap_or(base.u0),
            self.u1.unwrap_or(base.u1),
            self.v0.unwrap_or(base.v0),
            self.v1.unwrap_or(base.v1),
        )
    }

    fn extract_options(&self) -> ExtractOptions {
        ExtractOptions { h_amb: self.h_amb, route: self.normal_route, ..ExtractOptions::default() }
    }
}

/// Surface data loaded from the job's source.
pub struct Loaded {
    pub q: QuadrupleField,
    /// The patch itself when the source has one.
    pub patch: Option<SurfacePatch>,
}

pub fn load(cfg: &JobConfig) -> Result<Loaded> {
    match &cfg.source {
        Source::Catalog(s) => {
            let patch = SurfacePatch::catalog(*s).with_rect(cfg.rect(s.default_rect()));
            let grid = patch.grid(cfg.grid.0, cfg.grid.1)?;
            let q = fundamental_data_with(&patch, &grid, &cfg.extract_options())?;
            Ok(Loaded { q, patch: Some(patch) })
        }
        Source::Quadruple(p) => Ok(Loaded { q: quadruple_from_str(&read_file(p)?)?, patch: None }),
        Source::Patch(p) => {
            let (q, patch) = patch_from_str(&read_file(p)?)?;
            Ok(Loaded { q, patch: Some(patch) })
        }
    }
}

/// Output of one job: text for stdout and the exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    fn pass(stdout: String) -> Self {
        Outcome { stdout, code: EXIT_PASS }
    }
}

fn phase_line(p: &Phase) -> String {
    format!(
        "phase theta={} tau1={} H1={} tau2={} H2={}\n",
        fmt_num(p.theta),
        fmt_num(p.tau1),
        fmt_num(p.h1),
        fmt_num(p.tau2),
        fmt_num(p.h2)
    )
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut String) -> Result<()> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            stdout.push_str(text);
            Ok(())
        }
    }
}

fn integrate_from_data(q: &QuadrupleField, m: &ModelSpace) -> Result<Reconstruction> {
    let p = &q.points[0];
    let a0 = initial_frame(&p.t, p.nu)?;
    reconstruct(q, m, &a0, &AmbientPoint::new(0.0, 0.0, 0.0))
}

fn mesh_path(cfg: &JobConfig, fallback: &str) -> PathBuf {
    cfg.mesh.clone().unwrap_or_else(|| match &cfg.out {
        Some(p) => p.with_extension("obj"),
        None => PathBuf::from(fallback),
    })
}

fn write_reconstruction(cfg: &JobConfig, q: &QuadrupleField, m: &ModelSpace, fallback: &str, stdout: &mut String) -> Result<()> {
    let r = integrate_from_data(q, m)?;
    let path = mesh_path(cfg, fallback);
    write_file(&path, &obj_to_string(&r.grid, &r.points()))?;
    let _ = writeln!(stdout, "mesh {} drift={}", path.display(), fmt_num(r.max_drift));
    Ok(())
}

pub fn cmd_catalog_list() -> Outcome {
    let mut s = String::new();
    for name in NAMES {
        let c = CatalogSurface::from_name(name, None).expect("catalog name");
        let m = c.model();
        let r = c.default_rect();
        let _ = writeln!(
            s,
            "{name} kappa={} tau={} u=[{}, {}] v=[{}, {}]",
            fmt_num(m.kappa()),
            fmt_num(m.tau()),
            fmt_num(r.u0),
            fmt_num(r.u1),
            fmt_num(r.v0),
            fmt_num(r.v1)
        );
    }
    Outcome::pass(s)
}

pub fn cmd_verify(cfg: &JobConfig) -> Result<Outcome> {
    let loaded = load(cfg)?;
    let m = cfg.model_over(loaded.q.model)?;
    let tol = cfg.tol.unwrap_or_else(|| default_tol(&loaded.q.grid));
    let report = verify(&loaded.q, &m, tol)?;
    let text = report.to_string();
    let mut stdout = String::new();
    if let Some(p) = &cfg.out {
        write_file(p, &text)?;
    }
    stdout.push_str(&text);
    Ok(Outcome { stdout, code: if report.passed() { EXIT_PASS } else { EXIT_FAIL } })
}

pub fn cmd_sister(cfg: &JobConfig) -> Result<Outcome> {
    let loaded = load(cfg)?;
    let m1 = cfg.model_over(loaded.q.model)?;
    let m2 = cfg.target_model()?;
    let (q2, phase) = sister(&loaded.q, &m1, &m2, cfg.h2_sign)?;
    let mut stdout = phase_line(&phase);
    if let Some(p) = &cfg.out {
        write_file(p, &quadruple_to_string(&q2))?;
    }
    if cfg.reconstruct {
        write_reconstruction(cfg, &q2, &m2, "sister.obj", &mut stdout)?;
    }
    Ok(Outcome::pass(stdout))
}

pub fn cmd_twin(cfg: &JobConfig) -> Result<Outcome> {
    let loaded = load(cfg)?;
    let m = cfg.model_over(loaded.q.model)?;
    let h = match cfg.h {
        Some(h) => h,
        None => constant_mean_curvature(&loaded.q)?,
    };
    let (q2, phase) = twin(&loaded.q, &m, h)?;
    let mut stdout = phase_line(&phase);
    if let Some(p) = &cfg.out {
        write_file(p, &quadruple_to_string(&q2))?;
    }
    if cfg.reconstruct {
        write_reconstruction(cfg, &q2, &m, "twin.obj", &mut stdout)?;
    }
    Ok(Outcome::pass(stdout))
}

/// Integrates the data. A catalog source starts from its own point and
/// frame at the first node, so the mesh reproduces the parametrization;
/// file sources start at the chart origin.
pub fn cmd_reconstruct(cfg: &JobConfig) -> Result<Outcome> {
    let loaded = load(cfg)?;
    let q = &loaded.q;
    let m = cfg.model_over(q.model)?;
    let (a0, x0): (Matrix3<f64>, AmbientPoint) = match (&cfg.source, &loaded.patch) {
        (Source::Catalog(_), Some(patch)) => {
            let (u, v) = (q.grid.u(0), q.grid.v(0));
            (adapted_frame(patch, u, v)?, patch.points(&q.grid)[0])
        }
        _ => (initial_frame(&q.points[0].t, q.points[0].nu)?, AmbientPoint::new(0.0, 0.0, 0.0)),
    };
    let r = reconstruct(q, &m, &a0, &x0)?;
    let hol = corner_holonomy(q, &m, &a0, &x0)?;
    let mesh = obj_to_string(&r.grid, &r.points());
    let mut stdout = String::new();
    match &cfg.out {
        Some(p) => {
            write_file(p, &mesh)?;
            let _ = writeln!(
                stdout,
                "reconstructed {}x{} drift={} holonomy={}",
                r.grid.nu,
                r.grid.nv,
                fmt_num(r.max_drift),
                fmt_num(hol)
            );
        }
        None => stdout.push_str(&mesh),
    }
    Ok(Outcome::pass(stdout))
}

pub fn cmd_export(cfg: &JobConfig) -> Result<Outcome> {
    let loaded = load(cfg)?;
    let patch = loaded
        .patch
        .ok_or_else(|| Error::InvalidParameter("export needs --catalog or --patch".into()))?;
    let mesh = obj_to_string(&loaded.q.grid, &patch.points(&loaded.q.grid));
    let mut stdout = String::new();
    emit(&cfg.out, &mesh, &mut stdout)?;
    Ok(Outcome::pass(stdout))
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Catalog { action: CatalogAction::List } => Ok(cmd_catalog_list()),
        Command::Verify(a) => cmd_verify(&JobConfig::resolve(a)?),
        Command::Sister(a) => cmd_sister(&JobConfig::resolve(a)?),
        Command::Twin(a) => cmd_twin(&JobConfig::resolve(a)?),
        Command::Reconstruct(a) => cmd_reconstruct(&JobConfig::resolve(a)?),
        Command::Export(a) => cmd_export(&JobConfig::resolve(a)?),
    }
}

/// Runs a parsed command line, printing to stdout/stderr, and returns the
/// exit status.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(o) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(o.stdout.as_bytes());
            o.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

/// Convenience for tests: parse `argv` (without the program name) and
/// execute.
pub fn execute_args<I, S>(argv: I) -> Result<Outcome>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = std::iter::once(std::ffi::OsString::from("homsurf")).chain(argv.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(args).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    execute(&cli)
}
