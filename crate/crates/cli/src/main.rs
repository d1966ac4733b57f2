use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use torus_euler::eigenstate::{circular_distance, orbit_invariant, EigenstateCoeffs};
use torus_euler::equimeasurable::{max_orbits, orbit_census};
use torus_euler::euler::{
    admissibility_check, random_band_limited, run, stability_experiment, AdmissibilityThresholds,
    Diagnostics, Target,
};
use torus_euler::lattice::{classify_eigenspace, shortest_vectors, LatticeBasis, Vec2};
use torus_euler::manifest::ExperimentManifest;
use torus_euler::snapshot;
use torus_euler::verify::run_battery;
use torus_euler::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "torus-euler",
    version,
    about = "First eigenstates and 2D Euler flow on flat tori"
)]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dual basis, shortest dual vectors, first eigenvalue and eigenspace dimension.
    LatticeInfo(LatticeArgs),
    /// First-eigenspace modes, optionally with the orbit invariant of a state.
    Eigenspace(EigenspaceArgs),
    /// Candidate translational orbits sharing the moments of a reference state.
    Census(CensusArgs),
    /// Integrate the Euler equation from a reference state or snapshot.
    Simulate(SimulateArgs),
    /// Perturb a reference eigenstate and track its orbit distance.
    Stability(StabilityArgs),
    /// Run the built-in verification battery.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct LatticeArgs {
    /// Lattice preset: square, hexagonal or rectangular:<h>.
    #[arg(long, conflicts_with = "basis")]
    preset: Option<String>,
    /// Explicit basis xi1 xi2 eta1 eta2.
    #[arg(long, num_args = 4, value_names = ["XI1", "XI2", "ETA1", "ETA2"], allow_negative_numbers = true)]
    basis: Option<Vec<f64>>,
}

impl LatticeArgs {
    fn given(&self) -> bool {
        self.preset.is_some() || self.basis.is_some()
    }

    fn resolve(&self) -> anyhow::Result<LatticeBasis> {
        Ok(match (&self.preset, &self.basis) {
            (Some(p), _) => LatticeBasis::preset(p)?,
            (None, Some(b)) => LatticeBasis::new(Vec2::new(b[0], b[1]), Vec2::new(b[2], b[3]))?,
            (None, None) => bail!(Error::InvalidConfig("pass --preset or --basis".into())),
        })
    }
}

#[derive(Args, Debug)]
struct EigenspaceArgs {
    #[command(flatten)]
    lattice: LatticeArgs,
    /// State as "A1 alpha1 [A2 alpha2 [A3 alpha3]]".
    #[arg(long)]
    coeffs: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Default)]
enum Format {
    #[default]
    Text,
    Records,
}

#[derive(Args, Debug)]
struct CensusArgs {
    #[command(flatten)]
    lattice: LatticeArgs,
    /// Reference state as "A1 alpha1 [A2 alpha2 [A3 alpha3]]".
    #[arg(long)]
    coeffs: Option<String>,
    /// Experiment manifest supplying lattice and reference.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

/// Options shared by the time-integrating subcommands; each overrides the
/// manifest value when given.
#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    lattice: LatticeArgs,
    /// TOML experiment manifest; flags given explicitly override it.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Reference state as "A1 alpha1 [A2 alpha2 [A3 alpha3]]".
    #[arg(long)]
    coeffs: Option<String>,
    /// Grid points per direction.
    #[arg(long)]
    n: Option<usize>,
    /// Time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Final time.
    #[arg(long)]
    t_end: Option<f64>,
    /// Steps between diagnostic rows.
    #[arg(long)]
    diag_stride: Option<usize>,
    /// Lebesgue exponent of the orbit distance.
    #[arg(long)]
    p_norm: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Start from a TORF snapshot instead of the reference state.
    #[arg(long)]
    init: Option<PathBuf>,
    /// Perturbation size added to the initial state.
    #[arg(long)]
    eps: Option<f64>,
    /// Perturbation seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Steps between TORF snapshots; 0 disables them.
    #[arg(long)]
    snapshot_stride: Option<usize>,
}

#[derive(Args, Debug)]
struct StabilityArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Perturbation sizes (repeatable).
    #[arg(long = "eps")]
    eps: Vec<f64>,
    /// Perturbation seeds (repeatable).
    #[arg(long = "seed")]
    seed: Vec<u64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 2024)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_CONFIG);
    }
    let result = match cli.command {
        Command::LatticeInfo(a) => cmd_lattice_info(&a),
        Command::Eigenspace(a) => cmd_eigenspace(&a),
        Command::Census(a) => cmd_census(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Stability(a) => cmd_stability(&a),
        Command::Verify(a) => return cmd_verify(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("TORUS_EULER_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .with_context(|| format!("TORUS_EULER_THREADS = '{v}'"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<io::Error>()
            .is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
    })
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(
            Error::NumericalBlowup { .. }
            | Error::InternalInvariant(_)
            | Error::InconsistentMoments(_)
            | Error::DegenerateLeadingCoefficient,
        ) => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

fn cmd_lattice_info(args: &LatticeArgs) -> anyhow::Result<()> {
    let basis = args.resolve()?;
    let dual = basis.dual();
    let s = shortest_vectors(&basis)?;
    let info = classify_eigenspace(&basis)?;
    let mut out = io::stdout().lock();
    writeln!(out, "basis      xi = {}  eta = {}", basis.xi(), basis.eta())?;
    writeln!(out, "area       {:.15}", basis.area())?;
    writeln!(
        out,
        "dual       xi* = {}  eta* = {}",
        dual.xi_star, dual.eta_star
    )?;
    writeln!(out, "rho        {:.15}", s.rho)?;
    writeln!(out, "lambda1    {:.15}", info.lambda1)?;
    writeln!(out, "dim        {}", info.dim())?;
    writeln!(out, "shortest   {} vectors", s.vectors.len())?;
    for v in &s.vectors {
        writeln!(out, "  ({:>2}, {:>2})  k = {}", v.m, v.n, v.k)?;
    }
    Ok(())
}

fn cmd_eigenspace(args: &EigenspaceArgs) -> anyhow::Result<()> {
    let info = classify_eigenspace(&args.lattice.resolve()?)?;
    let mut out = io::stdout().lock();
    writeln!(out, "dim {}  lambda1 {:.15}", info.dim(), info.lambda1)?;
    for (i, k) in info.modes.iter().enumerate() {
        writeln!(out, "mode {}  ({}, {})  k = {}", i + 1, k.m, k.n, k.k)?;
    }
    if let Some(text) = &args.coeffs {
        let c = EigenstateCoeffs::parse(info, text)?;
        let inv = orbit_invariant(&c);
        writeln!(out, "state      {}", c.to_record())?;
        writeln!(out, "l2_norm    {:.15}", c.l2_norm_sq().sqrt())?;
        match inv.phase {
            Some(z) => writeln!(out, "invariant  {:.15} {:+.15}i", z.re, z.im)?,
            None => writeln!(out, "invariant  none")?,
        }
    }
    Ok(())
}

fn load_manifest(path: Option<&Path>, lattice: &LatticeArgs) -> anyhow::Result<ExperimentManifest> {
    let mut m = match path {
        Some(p) => ExperimentManifest::load(p)?,
        None => ExperimentManifest::default(),
    };
    if let Some(p) = &lattice.preset {
        m.lattice.preset = Some(p.clone());
        m.lattice.basis = None;
    } else if let Some(b) = &lattice.basis {
        m.lattice.basis = Some([b[0], b[1], b[2], b[3]]);
        m.lattice.preset = None;
    } else if path.is_none() && !lattice.given() {
        bail!(Error::InvalidConfig(
            "pass --preset, --basis or --manifest".into()
        ));
    }
    Ok(m)
}

/// Reference state: explicit coefficients, else the manifest's, else unit
/// amplitudes with zero phases.
fn reference(m: &ExperimentManifest, coeffs: Option<&String>) -> anyhow::Result<EigenstateCoeffs> {
    if let Some(text) = coeffs {
        return Ok(EigenstateCoeffs::parse(
            classify_eigenspace(&m.basis()?)?,
            text,
        )?);
    }
    if let Some(c) = m.reference()? {
        return Ok(c);
    }
    let info = classify_eigenspace(&m.basis()?)?;
    let pairs = info.pairs();
    Ok(EigenstateCoeffs::new(
        info,
        vec![1.0; pairs],
        vec![0.0; pairs],
    )?)
}

fn cmd_census(args: &CensusArgs) -> anyhow::Result<()> {
    let m = load_manifest(args.manifest.as_deref(), &args.lattice)?;
    if args.coeffs.is_none() && m.experiment.coeffs.is_none() {
        bail!(Error::InvalidConfig(
            "census needs --coeffs or a manifest reference".into()
        ));
    }
    let reference = reference(&m, args.coeffs.as_ref())?;
    let census = orbit_census(&reference)?;
    let mut out = io::stdout().lock();
    match args.format {
        Format::Text => {
            writeln!(out, "reference  {}", reference.to_record())?;
            writeln!(
                out,
                "orbits     {} (bound {})",
                census.count,
                max_orbits(census.dim)
            )?;
            if let Some(ok) = census.sup_norm_consistent {
                writeln!(
                    out,
                    "sup-norm   {}",
                    if ok { "consistent" } else { "INCONSISTENT" }
                )?;
            }
            for (i, (r, same)) in census
                .representatives
                .iter()
                .zip(&census.matches_reference)
                .enumerate()
            {
                writeln!(
                    out,
                    "#{:<2} amps [{}]  phases [{}]  invariant {}  reference {}",
                    i + 1,
                    join(r.amps()),
                    join(r.phases()),
                    fmt_invariant(r),
                    if *same { "yes" } else { "no" }
                )?;
            }
        }
        Format::Records => {
            for (i, (r, same)) in census
                .representatives
                .iter()
                .zip(&census.matches_reference)
                .enumerate()
            {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    i + 1,
                    r.to_record(),
                    fmt_invariant(r),
                    u8::from(*same)
                )?;
            }
        }
    }
    Ok(())
}

fn join(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.9}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn fmt_invariant(c: &EigenstateCoeffs) -> String {
    match orbit_invariant(c).phase {
        Some(z) => format!("{:.9}{:+.9}i", z.re, z.im),
        None => "none".to_string(),
    }
}

fn apply_run_overrides(m: &mut ExperimentManifest, a: &RunArgs) {
    if let Some(n) = a.n {
        m.grid.n1 = n;
        m.grid.n2 = n;
    }
    if let Some(v) = a.dt {
        m.solver.dt = v;
    }
    if let Some(v) = a.t_end {
        m.solver.t_end = v;
    }
    if let Some(v) = a.diag_stride {
        m.solver.diag_stride = v;
    }
    if let Some(v) = a.p_norm {
        m.experiment.p_norm = v;
    }
    if let Some(v) = &a.out {
        m.experiment.output_dir = v.clone();
    }
    if let Some(c) = &a.coeffs {
        m.experiment.coeffs = Some(c.clone());
    }
}

fn header_lines(m: &ExperimentManifest, extra: &[String]) -> anyhow::Result<Vec<String>> {
    let basis = m.basis()?;
    let mut lines = vec![
        format!("lattice = {} {}", basis.xi(), basis.eta()),
        format!("grid = {}x{}", m.grid.n1, m.grid.n2),
        format!("dt = {}", m.solver.dt),
        format!("t_end = {}", m.solver.t_end),
        format!("p_norm = {}", m.experiment.p_norm),
    ];
    lines.extend_from_slice(extra);
    Ok(lines)
}

fn write_csv(path: &Path, diag: &Diagnostics, header: &[String]) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    diag.write_csv(BufWriter::new(file), header)?;
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> anyhow::Result<()> {
    let mut m = load_manifest(args.run.manifest.as_deref(), &args.run.lattice)?;
    apply_run_overrides(&mut m, &args.run);
    if let Some(s) = args.snapshot_stride {
        m.solver.snapshot_stride = s;
    }
    m.validate()?;
    let mut cfg = m.solver_config()?;
    let grid = cfg.grid.clone();
    let target = reference(&m, None)?;
    let mut omega0 = match &args.init {
        Some(path) => {
            let field = snapshot::load(path)?;
            if field.grid() != &grid {
                bail!(Error::ShapeMismatch(format!(
                    "{} does not match the configured grid",
                    path.display()
                )));
            }
            field.analyze()
        }
        None => target.to_spectral(&grid)?,
    };
    let eps = args.eps.unwrap_or(0.0);
    let seed = args
        .seed
        .or(m.experiment.seeds.first().copied())
        .unwrap_or(1);
    if eps > 0.0 {
        let g = random_band_limited(
            &grid,
            3.0 * grid.eigenspace().rho,
            m.experiment.p_norm,
            seed,
        )?;
        omega0 = omega0.axpy(eps, &g)?;
    }
    cfg.snapshot_stride = m.solver.snapshot_stride;
    let dir = m.prepare_output_dir()?;
    let out = run(
        &cfg,
        &omega0,
        Some(&Target {
            coeffs: target.clone(),
            p_norm: m.experiment.p_norm,
        }),
    )?;
    let header = header_lines(
        &m,
        &[
            format!("seed = {seed}"),
            format!("eps = {eps}"),
            format!("reference = {}", target.to_record()),
        ],
    )?;
    write_csv(&dir.join("diagnostics.csv"), &out.diagnostics, &header)?;
    for (i, (_, field)) in out.snapshots.iter().enumerate() {
        snapshot::save(dir.join(format!("snapshot_{i:05}.torf")), field)?;
    }
    let rep = admissibility_check(&out.diagnostics, &AdmissibilityThresholds::default())?;
    let mut stdout = io::stdout().lock();
    writeln!(
        stdout,
        "seed {seed}  steps {}  t_end {}",
        cfg.steps(),
        out.final_state.t
    )?;
    writeln!(stdout, "energy drift {:.3e}", rep.energy_drift)?;
    for (m, d) in (2..=6).zip(rep.casimir_drifts) {
        writeln!(stdout, "casimir{m} drift {d:.3e}")?;
    }
    writeln!(
        stdout,
        "admissibility {}",
        if rep.pass { "PASS" } else { "FAIL" }
    )?;
    writeln!(
        stdout,
        "wrote {} and {} snapshots",
        dir.join("diagnostics.csv").display(),
        out.snapshots.len()
    )?;
    Ok(())
}

fn cmd_stability(args: &StabilityArgs) -> anyhow::Result<()> {
    let mut m = load_manifest(args.run.manifest.as_deref(), &args.run.lattice)?;
    apply_run_overrides(&mut m, &args.run);
    if !args.eps.is_empty() {
        m.experiment.epsilons = args.eps.clone();
    }
    if !args.seed.is_empty() {
        m.experiment.seeds = args.seed.clone();
    }
    m.validate()?;
    let cfg = m.solver_config()?;
    let reference = reference(&m, None)?;
    let dir = m.prepare_output_dir()?;
    let jobs: Vec<(f64, u64)> = m
        .experiment
        .epsilons
        .iter()
        .flat_map(|&e| m.experiment.seeds.iter().map(move |&s| (e, s)))
        .collect();
    let p_norm = m.experiment.p_norm;
    let results: Vec<anyhow::Result<String>> = jobs
        .par_iter()
        .map(|&(eps, seed)| {
            let diag = stability_experiment(&reference, eps, seed, p_norm, &cfg)?;
            let name = format!("stability_eps{eps}_seed{seed}.csv");
            let header = header_lines(
                &m,
                &[format!("seed = {seed}"), format!("eps = {eps}"), format!("reference = {}", reference.to_record())],
            )?;
            write_csv(&dir.join(&name), &diag, &header)?;
            let d0 = diag.rows[0].orbit_dist.unwrap_or(f64::NAN);
            let dmax = diag.orbit_distances().into_iter().fold(0.0f64, f64::max);
            let theta_drift = match diag.rows[0].theta {
                Some(t0) => {
                    diag.rows.iter().filter_map(|r| r.theta).map(|t| circular_distance(t, t0)).fold(0.0f64, f64::max)
                }
                None => f64::NAN,
            };
            Ok(format!(
                "eps {eps:e}  seed {seed}  D0 {d0:.6e}  Dmax {dmax:.6e}  amplification {:.6}  theta_drift {theta_drift:.3e}  {name}",
                diag.amplification().unwrap_or(f64::NAN)
            ))
        })
        .collect();
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "reference {}", reference.to_record())?;
    for r in results {
        writeln!(stdout, "{}", r?)?;
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> ExitCode {
    let report = run_battery(args.seed);
    println!("seed {}", report.seed);
    for c in &report.checks {
        println!(
            "{:<4} {:<30} {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    println!(
        "{} checks, {} failed",
        report.checks.len(),
        report.failures()
    );
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY)
    }
}
