//! Command-line entry point: flag and config resolution, subcommand
//! dispatch, CSV/JSON artifact emission, and exit-code mapping.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::assembly::RhsSpec;
use crate::config::{parse_domain_arg, RunConfig};
use crate::error::{Error, Result};
use crate::experiments::{convergence_study, singular_probe, unisolvence_study};
use crate::expr::parse_expression;
use crate::geometry::Point2;
use crate::kernel::TpsKernel;
use crate::sampling::{SeededGenerator, GENERATOR_NAME};
use crate::solver::{sample_collocation_set, solve_poisson_with_densities, ManufacturedCase};

#[derive(Parser, Debug)]
#[command(
    name = "kansa",
    version,
    about = "Meshfree Poisson collocation with thin-plate splines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the Poisson problem on randomly placed collocation points
    Solve(CommonArgs),
    /// Random-growth invertibility study of the collocation matrix
    Unisolvence(CommonArgs),
    /// Determinants of deliberately singular two-center configurations
    Probe(CommonArgs),
    /// Manufactured-solution errors over an increasing ladder of sizes
    Convergence(CommonArgs),
    /// Draw one batch of collocation points and export it
    Sample(CommonArgs),
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Solve(a)
            | Command::Unisolvence(a)
            | Command::Probe(a)
            | Command::Convergence(a)
            | Command::Sample(a) => a,
        }
    }
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// JSON config file; explicit flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// master seed for all pseudo-random draws
    #[arg(long)]
    seed: Option<u64>,
    /// thin-plate spline order (phi(r) = r^(2 nu) ln r); solves need >= 2
    #[arg(long)]
    nu: Option<u32>,
    /// interior point count
    #[arg(long)]
    n: Option<usize>,
    /// boundary point count
    #[arg(long)]
    m: Option<usize>,
    /// trial count (unisolvence) or seeds per ladder rung (convergence)
    #[arg(long)]
    trials: Option<u64>,
    /// output directory for CSV and JSON artifacts
    #[arg(long)]
    out: Option<PathBuf>,
    /// built-in domain (disk, ellipse:a:b, star3) or a JSON coefficient file
    #[arg(long)]
    domain: Option<String>,
}

impl CommonArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(domain) = &self.domain {
            config.domain = parse_domain_arg(domain)?;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(nu) = self.nu {
            config.nu = nu;
        }
        if let Some(n) = self.n {
            config.n = n;
        }
        if let Some(m) = self.m {
            config.m = m;
        }
        if let Some(trials) = self.trials {
            config.trials = trials;
        }
        if let Some(out) = &self.out {
            config.out = out.clone();
        }
        config.validate()?;
        Ok(config)
    }
}

/// Parses argv, runs the subcommand and returns the process exit code:
/// 0 success, 1 config error, 2 numerically singular system (solve),
/// 3 internal error.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NumericallySingular { .. } => 2,
        Error::Config(_)
        | Error::ExprSyntax { .. }
        | Error::UnknownIdentifier { .. }
        | Error::EvalDomain(_)
        | Error::InvalidNu(_)
        | Error::UnsupportedKernel(_)
        | Error::IrregularCurve { .. }
        | Error::SelfIntersectingCurve { .. }
        | Error::DensityBound { .. }
        | Error::NegativeDensity { .. } => 1,
        _ => 3,
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    let config = cli.command.args().resolve()?;
    std::fs::create_dir_all(&config.out)?;
    write_artifact(
        &config.out.join("effective_config.json"),
        config.to_effective_json()?.as_bytes(),
    )?;
    match &cli.command {
        Command::Solve(_) => cmd_solve(&config),
        Command::Unisolvence(_) => cmd_unisolvence(&config),
        Command::Probe(_) => cmd_probe(&config),
        Command::Convergence(_) => cmd_convergence(&config),
        Command::Sample(_) => cmd_sample(&config),
    }
}

fn write_artifact(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes)?;
    Ok(())
}

fn csv_buffer(command: &str) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    writeln!(buf, "# kansa {} {command}", env!("CARGO_PKG_VERSION"))?;
    Ok(buf)
}

fn manufactured_case(config: &RunConfig) -> Result<ManufacturedCase> {
    match config.case.as_deref() {
        Some(name) => ManufacturedCase::from_name(name),
        None => Ok(ManufacturedCase::Quadratic),
    }
}

/// Builds the right-hand side: user expressions when `f` is given
/// (`g` required alongside), the manufactured case otherwise.
fn rhs_from_config(config: &RunConfig) -> Result<RhsSpec> {
    let Some(f_text) = &config.f else {
        return Ok(manufactured_case(config)?.rhs_spec());
    };
    let Some(g_text) = &config.g else {
        return Err(Error::Config(
            "a source expression f needs a boundary datum expression g".into(),
        ));
    };
    let f_ast = parse_expression(f_text)?;
    let g_ast = parse_expression(g_text)?;
    let f = {
        let ast = f_ast.clone();
        move |p: Point2| ast.eval(p.x, p.y, 0.0).unwrap_or(f64::NAN)
    };
    let g = {
        let ast = g_ast.clone();
        move |p: Point2| ast.eval(p.x, p.y, 0.0).unwrap_or(f64::NAN)
    };
    Ok(RhsSpec::new(
        f_text.clone(),
        Arc::new(f),
        g_text.clone(),
        Arc::new(g),
    ))
}

fn cmd_solve(config: &RunConfig) -> Result<()> {
    let domain = config.domain.build()?;
    let kernel = TpsKernel::new(config.nu)?;
    let rhs = rhs_from_config(config)?;
    let interior_density = config.interior_density.build_interior()?;
    let boundary_density = config.boundary_density.build_boundary(domain.boundary())?;
    let solution = solve_poisson_with_densities(
        &domain,
        &kernel,
        config.n,
        config.m,
        &rhs,
        &interior_density,
        &boundary_density,
        config.seed,
    )?;
    let mut buf = csv_buffer("solve")?;
    solution.write_csv(&mut buf)?;
    let path = config.out.join("solution.csv");
    write_artifact(&path, &buf)?;
    let diag = solution.diagnostics();
    println!(
        "solve: domain={} nu={} n={} m={} seed={} log|det|={:.6e} ratio={:.6e} residual={:.6e} -> {}",
        config.domain.label(),
        config.nu,
        config.n,
        config.m,
        config.seed,
        diag.det.log_abs,
        diag.sigma.ratio(),
        diag.residual_inf,
        path.display()
    );
    Ok(())
}

fn cmd_unisolvence(config: &RunConfig) -> Result<()> {
    let domain = config.domain.build()?;
    let kernel = TpsKernel::new(config.nu)?;
    let policy = config.growth.growth_policy(config.n, config.m)?;
    let interior_density = config.interior_density.build_interior()?;
    let boundary_density = config.boundary_density.build_boundary(domain.boundary())?;
    let report = unisolvence_study(
        &domain,
        &kernel,
        &policy,
        &interior_density,
        &boundary_density,
        config.trials,
        config.seed,
    )?;

    let mut records = csv_buffer("unisolvence")?;
    report.write_records_csv(&mut records)?;
    write_artifact(&config.out.join("unisolvence_records.csv"), &records)?;
    let mut aggregate = csv_buffer("unisolvence")?;
    report.write_aggregate_csv(&mut aggregate)?;
    write_artifact(&config.out.join("unisolvence_aggregate.csv"), &aggregate)?;

    let min_ratio = report
        .aggregates
        .iter()
        .map(|a| a.min_ratio)
        .fold(f64::INFINITY, f64::min);
    println!(
        "unisolvence: domain={} nu={} N={} trials={} policy={} records={} flagged={} min_ratio={:.6e} -> {}",
        config.domain.label(),
        config.nu,
        policy.target_total(),
        config.trials,
        report.policy_name,
        report.record_count(),
        report.flagged_total,
        min_ratio,
        config.out.display()
    );
    Ok(())
}

fn cmd_probe(config: &RunConfig) -> Result<()> {
    let kernel = TpsKernel::new(config.nu)?;
    let report = singular_probe(&kernel)?;
    let mut buf = csv_buffer("probe")?;
    report.write_csv(&mut buf)?;
    let path = config.out.join("probe.csv");
    write_artifact(&path, &buf)?;

    let interior = report
        .case("interior-pair", 0.0)
        .expect("probe always contains the exact interior pair");
    let mixed = report
        .case("mixed-pair", 0.0)
        .expect("probe always contains the exact mixed pair");
    let control = report
        .cases
        .iter()
        .find(|c| c.label == "interior-control")
        .expect("probe always contains the control pair");
    println!(
        "probe: nu={} critical_radius={:.16e} |det|_interior={:.6e} |det|_mixed={:.6e} \
         singular_bound={:.6e} control_det={:.6e} -> {}",
        report.nu,
        report.critical_radius,
        interior.det_value.abs(),
        mixed.det_value.abs(),
        1e-12 * report.entry_scale * report.entry_scale,
        control.det_value,
        path.display()
    );
    Ok(())
}

fn cmd_convergence(config: &RunConfig) -> Result<()> {
    let domain = config.domain.build()?;
    let kernel = TpsKernel::new(config.nu)?;
    let case = manufactured_case(config)?;
    let report = convergence_study(
        &domain,
        &kernel,
        case,
        &config.ladder,
        config.interior_fraction,
        config.trials,
        config.seed,
        config.grid_resolution,
    )?;
    let mut buf = csv_buffer("convergence")?;
    report.write_csv(&mut buf)?;
    let path = config.out.join("convergence.csv");
    write_artifact(&path, &buf)?;

    let medians: Vec<String> = report
        .medians
        .iter()
        .map(|(n, err)| format!("{n}:{err:.3e}"))
        .collect();
    println!(
        "convergence: domain={} case={} nu={} ladder={:?} seeds_per_rung={} flagged={} median_max_err=[{}] -> {}",
        config.domain.label(),
        case.name(),
        config.nu,
        config.ladder,
        config.trials,
        report.flagged_count,
        medians.join(" "),
        path.display()
    );
    Ok(())
}

fn cmd_sample(config: &RunConfig) -> Result<()> {
    let domain = config.domain.build()?;
    let interior_density = config.interior_density.build_interior()?;
    let boundary_density = config.boundary_density.build_boundary(domain.boundary())?;
    interior_density.certify(&domain)?;
    boundary_density.certify()?;
    let mut gen = SeededGenerator::new(config.seed);
    let set = sample_collocation_set(
        &domain,
        config.n,
        config.m,
        &interior_density,
        &boundary_density,
        &mut gen,
    )?;

    let mut buf = csv_buffer("sample")?;
    writeln!(
        buf,
        "# generator={GENERATOR_NAME} seed={} domain={} interior_density={} boundary_density={}",
        config.seed,
        config.domain.label(),
        interior_density.name(),
        boundary_density.name()
    )?;
    writeln!(buf, "kind,x,y,t")?;
    for p in set.interior() {
        writeln!(buf, "interior,{:.16e},{:.16e},", p.x, p.y)?;
    }
    for (q, t) in set.boundary_points().iter().zip(set.boundary_t()) {
        writeln!(buf, "boundary,{:.16e},{:.16e},{:.16e}", q.x, q.y, t)?;
    }
    let path = config.out.join("samples.csv");
    write_artifact(&path, &buf)?;
    println!(
        "sample: domain={} n={} m={} seed={} -> {}",
        config.domain.label(),
        config.n,
        config.m,
        config.seed,
        path.display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args_from(argv: &[&str]) -> CommonArgs {
        let cli = Cli::try_parse_from(argv).unwrap();
        let Command::Solve(args) = cli.command else {
            panic!("test argv must use solve");
        };
        args
    }

    #[test]
    fn flags_override_config_fields() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, r#"{"nu": 3, "n": 10, "seed": 9}"#).unwrap();
        let args = args_from(&[
            "kansa",
            "solve",
            "--config",
            path.to_str().unwrap(),
            "--seed",
            "42",
            "--domain",
            "ellipse:2:1",
        ]);
        let config = args.resolve().unwrap();
        assert_eq!(config.nu, 3);
        assert_eq!(config.n, 10);
        assert_eq!(config.seed, 42);
        assert_eq!(config.domain.label(), "ellipse:2:1");
    }

    #[test]
    fn resolve_rejects_invalid_ranges() {
        let args = args_from(&["kansa", "solve", "--n", "1", "--m", "0"]);
        assert!(matches!(args.resolve(), Err(Error::Config(_))));
        let args = args_from(&["kansa", "solve", "--domain", "hexagon"]);
        assert!(matches!(args.resolve(), Err(Error::Config(_))));
    }

    #[test]
    fn exit_codes_by_error_class() {
        assert_eq!(exit_code(&Error::Config("x".into())), 1);
        assert_eq!(exit_code(&Error::UnsupportedKernel(1)), 1);
        assert_eq!(
            exit_code(&Error::NumericallySingular {
                det_sign: 0,
                log_abs_det: f64::NEG_INFINITY,
                sigma_min: 0.0,
                sigma_max: 1.0,
                ratio: 0.0,
            }),
            2
        );
        assert_eq!(exit_code(&Error::EmptyGrid), 3);
    }

    #[test]
    fn rhs_needs_both_expressions() {
        let mut config = RunConfig::default();
        config.f = Some("4".into());
        assert!(matches!(rhs_from_config(&config), Err(Error::Config(_))));
        config.g = Some("x^2+y^2".into());
        let rhs = rhs_from_config(&config).unwrap();
        assert_eq!(rhs.f(Point2::new(0.3, 0.1)), 4.0);
        assert_eq!(rhs.g(Point2::new(1.0, 2.0)), 5.0);
    }

    #[test]
    fn default_case_is_quadratic() {
        let config = RunConfig::default();
        assert_eq!(
            manufactured_case(&config).unwrap().name(),
            ManufacturedCase::Quadratic.name()
        );
        let mut named = RunConfig::default();
        named.case = Some("harmonic-exp".into());
        assert_eq!(manufactured_case(&named).unwrap().name(), "harmonic-exp");
        named.case = Some("unknown".into());
        assert!(manufactured_case(&named).is_err());
    }
}
