//! Command-line driver: single solves, convergence studies and space
//! diagnostics.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;

use crate::error::{Result, VemError};
use crate::mesh::{self, Mesh, MeshFamily};
use crate::polycalc::basis_count;
use crate::projectors::ElementOperators;
use crate::solver::{run_manufactured, ErrorReport, ManufacturedSolution, SolutionKind};
use crate::space::{enumerate_extended, enumerate_local, extended_local_dim, local_dim, ElementContext, SpaceParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// CSV header of solve and convergence output.
pub const CSV_HEADER: [&str; 7] = ["h", "N_dof", "energy_err", "h_p1_seminorm_err", "l2_err", "assemble_s", "solve_s"];

#[derive(Debug, Parser)]
#[command(name = "polyvem", version, about = "Conforming virtual elements for (-Delta)^p1 u = f")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one manufactured problem and report its errors.
    Solve(RunArgs),
    /// Solve on a sequence of refined meshes and fit the energy-error rate.
    Convergence(RunArgs),
    /// Print degree-of-freedom counts and local consistency checks.
    SpaceCheck(RunArgs),
}

#[derive(Debug, Args, Clone)]
pub struct RunArgs {
    /// Operator order.
    #[arg(long)]
    pub p1: usize,
    /// Regularity index.
    #[arg(long)]
    pub p2: usize,
    /// Polynomial accuracy.
    #[arg(short = 'r', long = "degree")]
    pub r: usize,
    /// Mesh file, or `square:L`, `perturbed:L`, `hex:L`.
    #[arg(long, default_value = "square:0")]
    pub mesh: String,
    /// `bubble`, `sin` or `poly-patch`.
    #[arg(long, default_value = "sin")]
    pub solution: String,
    /// CSV output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Refinement levels `A..B` (inclusive) for convergence studies.
    #[arg(long)]
    pub levels: Option<String>,
    /// Seed of randomly perturbed meshes.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use the enhanced space even where it is optional.
    #[arg(long)]
    pub enhanced: bool,
}

/// Where the mesh comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum MeshSource {
    File(PathBuf),
    Generated { family: MeshFamily, level: Option<u32> },
}

impl MeshSource {
    pub fn parse(source: &str) -> Result<Self> {
        let (name, level) = match source.split_once(':') {
            Some((n, l)) => (n, Some(l)),
            None => (source, None),
        };
        match name.parse::<MeshFamily>() {
            Ok(family) => {
                let level = level
                    .map(|l| l.parse::<u32>().map_err(|_| VemError::InvalidMesh(format!("bad refinement level `{l}`"))))
                    .transpose()?;
                Ok(MeshSource::Generated { family, level })
            }
            Err(_) if Path::new(source).exists() => Ok(MeshSource::File(PathBuf::from(source))),
            Err(e) => Err(e),
        }
    }

    pub fn load(&self, level: Option<u32>, seed: u64) -> Result<Mesh> {
        match self {
            MeshSource::File(path) => mesh::load(&std::fs::read_to_string(path)?),
            MeshSource::Generated { family, level: own } => {
                let l = level.or(*own).ok_or_else(|| VemError::InvalidMesh("mesh family needs a level".into()))?;
                mesh::generate(*family, l, seed)
            }
        }
    }
}

/// Validated configuration of one run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub params: SpaceParams,
    pub mesh: MeshSource,
    pub solution: SolutionKind,
    pub out: Option<PathBuf>,
    pub levels: Option<(u32, u32)>,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_args(args: &RunArgs) -> Result<Self> {
        let mut params = SpaceParams::new(args.p1, args.p2, args.r)?;
        if args.enhanced {
            params = params.with_enhanced(true)?;
        }
        let levels = args.levels.as_deref().map(parse_levels).transpose()?;
        Ok(RunConfig {
            params,
            mesh: MeshSource::parse(&args.mesh)?,
            solution: args.solution.parse()?,
            out: args.out.clone(),
            levels,
            seed: args.seed,
        })
    }

    fn manufactured(&self) -> ManufacturedSolution {
        ManufacturedSolution::new(self.solution, self.params.p1, self.params.r)
    }
}

/// `A..B` or `A..=B`, both inclusive.
pub fn parse_levels(s: &str) -> Result<(u32, u32)> {
    let bad = || VemError::InvalidParams(format!("levels must look like `2..5`, got `{s}`"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let (a, b) = (a.trim().parse::<u32>().map_err(|_| bad())?, b.trim().parse::<u32>().map_err(|_| bad())?);
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

/// Formats one CSV row; floats use the shortest round-trip representation
/// so identical runs produce identical bytes.
pub fn csv_row(r: &ErrorReport) -> [String; 7] {
    [
        format!("{}", r.h),
        r.n_dof.to_string(),
        format!("{}", r.energy_err),
        format!("{}", r.h_p1_seminorm_err),
        format!("{}", r.l2_err),
        format!("{}", r.assemble_s),
        format!("{}", r.solve_s),
    ]
}

/// Writes the CSV atomically: a sibling temporary file renamed into place.
pub fn write_csv(path: &Path, reports: &[ErrorReport]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    {
        let mut w = csv::Writer::from_path(&tmp)?;
        w.write_record(CSV_HEADER)?;
        for r in reports {
            w.write_record(csv_row(r))?;
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Least-squares slope of `log err` against `log h`.
pub fn fitted_rate(hs: &[f64], errs: &[f64]) -> f64 {
    let x: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn cmd_solve(cfg: &RunConfig, out: &mut dyn Write) -> Result<ErrorReport> {
    let mesh = cfg.mesh.load(None, cfg.seed)?;
    let (report, _) = run_manufactured(&mesh, &cfg.params, &cfg.manufactured())?;
    writeln!(out, "space {} load {:?}, {} cells", cfg.params, cfg.params.load_case(), mesh.num_cells())?;
    writeln!(out, "h               {:.6e}", report.h)?;
    writeln!(out, "N_dof           {}", report.n_dof)?;
    writeln!(out, "energy error    {:.6e}  (relative {:.3e})", report.energy_err, report.energy_err / report.energy_norm)?;
    writeln!(out, "H^p1 seminorm   {:.6e}", report.h_p1_seminorm_err)?;
    writeln!(out, "L2 error        {:.6e}", report.l2_err)?;
    writeln!(out, "solve residual  {:.3e}", report.relative_residual)?;
    if let Some(path) = &cfg.out {
        write_csv(path, std::slice::from_ref(&report))?;
    }
    Ok(report)
}

/// Convergence table and fitted energy-error rate.
pub fn cmd_convergence(cfg: &RunConfig, out: &mut dyn Write) -> Result<(Vec<ErrorReport>, f64)> {
    let (a, b) = cfg
        .levels
        .ok_or_else(|| VemError::InvalidParams("convergence needs --levels A..B".into()))?;
    if b < a + 2 {
        return Err(VemError::InvalidParams("convergence needs at least 3 levels".into()));
    }
    if matches!(cfg.mesh, MeshSource::File(_)) {
        return Err(VemError::InvalidParams("convergence needs a generated mesh family".into()));
    }
    let u = cfg.manufactured();
    let mut reports = Vec::new();
    writeln!(out, "space {} solution {}", cfg.params, u.name())?;
    writeln!(out, "{:>5} {:>12} {:>8} {:>12} {:>12} {:>12} {:>6}", "level", "h", "N_dof", "energy", "H^p1", "L2", "rate")?;
    for level in a..=b {
        let mesh = cfg.mesh.load(Some(level), cfg.seed)?;
        let (report, _) = run_manufactured(&mesh, &cfg.params, &u)?;
        let rate = reports
            .last()
            .map(|p: &ErrorReport| format!("{:.2}", (p.energy_err / report.energy_err).ln() / (p.h / report.h).ln()))
            .unwrap_or_default();
        writeln!(
            out,
            "{:>5} {:>12.4e} {:>8} {:>12.4e} {:>12.4e} {:>12.4e} {:>6}",
            level, report.h, report.n_dof, report.energy_err, report.h_p1_seminorm_err, report.l2_err, rate
        )?;
        reports.push(report);
    }
    let hs: Vec<f64> = reports.iter().map(|r| r.h).collect();
    let es: Vec<f64> = reports.iter().map(|r| r.energy_err).collect();
    let slope = fitted_rate(&hs, &es);
    writeln!(out, "fitted energy rate {:.3} (expected {})", slope, cfg.params.expected_rate())?;
    if let Some(path) = &cfg.out {
        write_csv(path, &reports)?;
    }
    Ok((reports, slope))
}

/// Local diagnostics of the space on every cell of the mesh. Returns
/// whether all checks passed.
pub fn cmd_space_check(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool> {
    let mesh = cfg.mesh.load(None, cfg.seed)?;
    let p = &cfg.params;
    writeln!(out, "space {} ({} cells)", p, mesh.num_cells())?;
    writeln!(out, "vertex DOFs per vertex   {}", p.vertex_dofs())?;
    writeln!(out, "edge DOFs per edge       {}", p.edge_dofs())?;
    writeln!(out, "cell moments             {}", p.cell_dofs())?;
    if p.enhanced {
        writeln!(out, "extra enhanced moments   {}", p.extra_cell_dofs())?;
    }
    writeln!(out, "{:>3} {:>6} {:>8}", "j", "alpha", "moments")?;
    for j in 0..p.p2 {
        writeln!(out, "{:>3} {:>6} {:>8}", j, p.alpha(j)?, p.edge_moment_count(j))?;
    }

    let nr = basis_count(p.r as i64);
    let mut ok = true;
    let (mut worst_dim, mut worst_rank, mut worst_pres) = (true, f64::INFINITY, 0.0f64);
    for c in 0..mesh.num_cells() {
        let nv = mesh.cell(c).num_vertices();
        let layout = enumerate_local(p, &mesh, c);
        worst_dim &= layout.len() == local_dim(p, nv);
        if p.enhanced {
            worst_dim &= enumerate_extended(p, &mesh, c).len() == extended_local_dim(p, nv);
        }
        let ctx = ElementContext::new(&mesh, p, c)?;
        let ops = ElementOperators::new(&ctx)?;
        let sv = ops.d.clone().singular_values();
        worst_rank = worst_rank.min(sv.min() / sv.max());
        let defect = &ops.pi_star * &ops.d - DMatrix::<f64>::identity(nr, nr);
        worst_pres = worst_pres.max(defect.amax());
    }
    let report = |ok: bool| if ok { "ok" } else { "FAILED" };
    writeln!(out, "local DOFs on first cell  {}", enumerate_local(p, &mesh, 0).len())?;
    writeln!(out, "dimension formula        {}", report(worst_dim))?;
    writeln!(out, "D-matrix conditioning    min sv / max sv = {:.3e} ({})", worst_rank, report(worst_rank > 1e-8))?;
    writeln!(out, "projector preservation   max defect = {:.3e} ({})", worst_pres, report(worst_pres <= 1e-9))?;
    ok &= worst_dim && worst_rank > 1e-8 && worst_pres <= 1e-9;
    writeln!(out, "{}", if ok { "all checks passed" } else { "some checks FAILED" })?;
    Ok(ok)
}

/// Parses arguments, runs the subcommand, and returns the process exit
/// code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let (Command::Solve(args) | Command::Convergence(args) | Command::SpaceCheck(args)) = &cli.command;
    let cfg = match RunConfig::from_args(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let result = match cli.command {
        Command::Solve(_) => cmd_solve(&cfg, out).map(|_| true),
        Command::Convergence(_) => cmd_convergence(&cfg, out).map(|_| true),
        Command::SpaceCheck(_) => cmd_space_check(&cfg, out),
    };
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_NUMERICAL,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_config() {
                EXIT_CONFIG
            } else {
                EXIT_NUMERICAL
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_ranges() {
        assert_eq!(parse_levels("2..5").unwrap(), (2, 5));
        assert_eq!(parse_levels("1..=3").unwrap(), (1, 3));
        assert!(parse_levels("5..2").is_err());
        assert!(parse_levels("x").is_err());
    }

    #[test]
    fn mesh_sources() {
        assert_eq!(
            MeshSource::parse("hex:2").unwrap(),
            MeshSource::Generated { family: MeshFamily::HexDominant, level: Some(2) }
        );
        assert_eq!(
            MeshSource::parse("square").unwrap(),
            MeshSource::Generated { family: MeshFamily::SquareGrid, level: None }
        );
        assert!(MeshSource::parse("square:x").is_err());
        assert!(MeshSource::parse("/no/such/file").is_err());
    }

    #[test]
    fn rate_of_exact_power_law() {
        let hs = [0.5, 0.25, 0.125, 0.0625];
        let es: Vec<f64> = hs.iter().map(|h: &f64| 3.0 * h.powi(2)).collect();
        assert!((fitted_rate(&hs, &es) - 2.0).abs() < 1e-12);
    }

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with_args(std::iter::once("polyvem").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn invalid_degree_is_a_config_error() {
        let (code, _, err) = run(&["solve", "--p1", "2", "--p2", "2", "-r", "1", "--mesh", "square:1"]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("invalid space parameters"));
        let (code, _, _) = run(&["solve", "--p1", "1", "--p2", "1", "-r", "1", "--solution", "cosine"]);
        assert_eq!(code, EXIT_CONFIG);
    }

    #[test]
    fn space_check_reports() {
        let (code, out, _) = run(&["space-check", "--p1", "3", "--p2", "3", "-r", "3"]);
        assert_eq!(code, EXIT_OK, "{out}");
        // trace degrees 5, 3, 1
        assert!(out.contains("  0      5"));
        assert!(out.contains("  1      3"));
        assert!(out.contains("  2      1"));
        let (_, out, _) = run(&["space-check", "--p1", "2", "--p2", "2", "-r", "4"]);
        assert!(out.contains("local DOFs on first cell  25"), "{out}");
        let (code, out, _) = run(&["space-check", "--p1", "1", "--p2", "1", "-r", "1"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("all checks passed"));
    }
}
