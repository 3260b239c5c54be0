use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use ghzlab_core::format::table_num;
use ghzlab_core::landscape::{self, AngleGrid, ExportFormat};
use ghzlab_core::lhv::{
    self, bell_system, derive_pair_product, ghz_system, parity_multiply_check,
    single_spin_constraint, solve_signs, system_slots, HardyLhvInstance, Particle,
};
use ghzlab_core::selftest::run_self_test;
use ghzlab_core::sgsim;
use ghzlab_core::stabilizer::{
    self, hardy_table, relations_table, uw_commutator_norm, write_relations_csv, HardyContext,
    RelationReport,
};
use ghzlab_core::states::{GoldsteinParams, HardyParticle};
use ghzlab_core::STATE_TOL;

#[derive(Parser, Debug)]
#[command(name = "ghzlab", version, about = "Stabilizer, hidden-variable and Bell-landscape checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the four GHZ eigenrelations.
    GhzVerify(VerifyArgs),
    /// Check the xx and yy eigenrelations of |Phi->.
    BellVerify(VerifyArgs),
    /// Check -i sigma_x sigma_y = diag(1, -1).
    Sigmaxy(CsvArg),
    /// Goldstein joint-probability table and LHV feasibility.
    Hardy(HardyArgs),
    /// Enumerate real element-of-reality assignments.
    Lhv(SystemArgs),
    /// Solve the correlated model m_x m_y = s i for sign assignments.
    Corrmodel(CorrArgs),
    /// Scan f(b, c) over the angle torus.
    Bellscan(ScanArgs),
    /// Sequential Stern-Gerlach Monte Carlo.
    Sg(SgArgs),
    /// Run the invariant suite of every engine.
    SelfTest,
}

#[derive(Args, Debug)]
struct CsvArg {
    /// Write machine-readable output here.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Eigen-residual tolerance.
    #[arg(long, default_value_t = STATE_TOL)]
    tol: f64,
    #[command(flatten)]
    out: CsvArg,
}

#[derive(Args, Debug)]
struct HardyArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    b: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    c: f64,
    /// Probabilities below this count as zero events.
    #[arg(long, default_value_t = STATE_TOL)]
    tol: f64,
    #[command(flatten)]
    out: CsvArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ParitySystem {
    /// All four GHZ relations.
    Ghz,
    /// GHZ without the xxx relation.
    Ghz3,
    /// The two |Phi-> relations.
    Bell,
}

#[derive(Args, Debug)]
struct SystemArgs {
    #[arg(value_enum)]
    system: ParitySystem,
    #[command(flatten)]
    out: CsvArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CorrSystem {
    Ghz,
    Bell,
    Single,
}

#[derive(Args, Debug)]
struct CorrArgs {
    #[arg(value_enum)]
    system: CorrSystem,
    #[command(flatten)]
    out: CsvArg,
}

#[derive(Args, Debug)]
struct ScanArgs {
    /// Cells per axis.
    #[arg(long, default_value_t = 400)]
    grid: usize,
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pgm: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SgArgs {
    #[arg(long, default_value_t = 100_000)]
    shots: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[command(flatten)]
    out: CsvArg,
}

/// Raised for parameter problems found before any engine runs.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn validate(command: &Command) -> anyhow::Result<()> {
    let tol_ok = |t: f64| t.is_finite() && t > 0.0;
    match command {
        Command::GhzVerify(v) | Command::BellVerify(v) if !tol_ok(v.tol) => {
            Err(usage(format!("--tol must be positive, got {}", v.tol)))
        }
        Command::Hardy(h) => {
            if !tol_ok(h.tol) {
                return Err(usage(format!("--tol must be positive, got {}", h.tol)));
            }
            if ![h.a, h.b, h.c].iter().all(|v| v.is_finite()) {
                return Err(usage("--a/--b/--c must be finite"));
            }
            if h.a == 0.0 && (h.b == 0.0 || h.c == 0.0) {
                return Err(usage("a = 0 together with b = 0 or c = 0 leaves a beta vector undefined"));
            }
            Ok(())
        }
        Command::Bellscan(s) if s.grid < landscape::MIN_RESOLUTION => Err(usage(format!(
            "--grid must be at least {}, got {}",
            landscape::MIN_RESOLUTION,
            s.grid
        ))),
        Command::Sg(s) if s.shots == 0 => Err(usage("--shots must be at least 1")),
        Command::Sg(s) if s.workers == 0 => Err(usage("--workers must be at least 1")),
        _ => Ok(()),
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn pass_word(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn emit_relations(out: &mut impl Write, reports: &[RelationReport], csv: &Option<PathBuf>) -> anyhow::Result<bool> {
    write!(out, "{}", relations_table(reports))?;
    if let Some(path) = csv {
        write_relations_csv(reports, create(path)?)?;
    }
    let pass = stabilizer::all_pass(reports);
    writeln!(out, "{} / {} relations hold", reports.iter().filter(|r| r.pass).count(), reports.len())?;
    Ok(pass)
}

fn run_hardy(out: &mut impl Write, args: &HardyArgs) -> anyhow::Result<bool> {
    let p = GoldsteinParams::real(args.a, args.b, args.c)?;
    let table = hardy_table(&p)?;
    writeln!(
        out,
        "a = {}, b = {}, c = {} (normalized), abc = {}",
        table_num(p.a.re),
        table_num(p.b.re),
        table_num(p.c.re),
        table_num(p.abc().re)
    )?;
    write!(out, "{}", table.render())?;
    let zeros = [
        ("Pr(U1=1,U2=1)", table.prob(HardyContext::U1U2, 1, 1)),
        ("Pr(W1=0,U2=0)", table.prob(HardyContext::W1U2, 0, 0)),
        ("Pr(U1=0,W2=0)", table.prob(HardyContext::U1W2, 0, 0)),
    ];
    let mut pass = true;
    for (label, v) in zeros {
        let ok = v.abs() <= args.tol;
        pass &= ok;
        writeln!(out, "{label} = {}  {}", table_num(v), pass_word(ok))?;
    }
    writeln!(out, "Pr(W1=0,W2=0) = {}", table_num(table.prob(HardyContext::W1W2, 0, 0)))?;
    for particle in [HardyParticle::First, HardyParticle::Second] {
        let n = uw_commutator_norm(&p, particle)?;
        writeln!(out, "|[U{0},W{0}]| = {1}", particle.number(), table_num(n))?;
    }
    let report = lhv::hardy_lhv_feasible(&HardyLhvInstance::from_table(&table, args.tol));
    match report.uncovered_witness {
        Some((w, prob)) => writeln!(
            out,
            "LHV infeasible: {} surviving assignments, none reproduces {w} (probability {})",
            report.survivors.len(),
            table_num(prob)
        )?,
        None => writeln!(out, "LHV feasible: {} surviving assignments cover every positive event", report.survivors.len())?,
    }
    if let Some(path) = &args.out.csv {
        table.write_csv(create(path)?)?;
    }
    Ok(pass)
}

fn run_lhv(out: &mut impl Write, args: &SystemArgs) -> anyhow::Result<bool> {
    let system = match args.system {
        ParitySystem::Ghz => ghz_system(),
        ParitySystem::Ghz3 => ghz_system()[..3].to_vec(),
        ParitySystem::Bell => bell_system(),
    };
    for c in &system {
        writeln!(out, "  {c}")?;
    }
    let slots = system_slots(&system);
    let found = lhv::enumerate_parity(&system, &slots)?;
    let product = parity_multiply_check(&system);
    if !found.is_empty() {
        write!(out, "{}", lhv::assignments_table(&slots, &found))?;
    }
    let verdict = if product.contradiction {
        "contradiction certified"
    } else if found.is_empty() {
        "unsatisfiable"
    } else {
        "no contradiction"
    };
    writeln!(out, "{} / {} assignments satisfy; {verdict}", found.len(), 1u64 << slots.len())?;
    if let Some(path) = &args.out.csv {
        lhv::write_assignments_csv(&slots, &found, create(path)?)?;
    }
    // The side-by-side product and the enumeration must agree.
    Ok(!product.contradiction || found.is_empty())
}

fn run_corrmodel(out: &mut impl Write, args: &CorrArgs) -> anyhow::Result<bool> {
    let (constraint, particles) = match args.system {
        CorrSystem::Ghz => (derive_pair_product(&ghz_system())?, vec![Particle::A, Particle::B, Particle::C]),
        CorrSystem::Bell => (derive_pair_product(&bell_system())?, vec![Particle::A, Particle::B]),
        CorrSystem::Single => (single_spin_constraint(), vec![Particle::A]),
    };
    writeln!(out, "identity: {constraint}")?;
    let total = 1usize << particles.len();
    let mut rows = Vec::with_capacity(total);
    for bits in 0..total {
        let signs: Vec<_> = (0..particles.len())
            .map(|k| ghzlab_core::Sign::from_bit(bits >> (particles.len() - 1 - k) & 1 == 1))
            .collect();
        let model = lhv::CorrelatedModel::from_signs(&signs);
        let ev = lhv::evaluate_pair(&constraint, &model)?;
        rows.push(vec![model.sign_string(), lhv::fmt_complex(ev.value), ev.matches.to_string()]);
    }
    write!(out, "{}", ghzlab_core::format::render_table(&["signs", "value", "matches"], &rows))?;
    let solutions = solve_signs(std::slice::from_ref(&constraint), &particles)?;
    writeln!(out, "{} / {total} sign vectors satisfy", solutions.len())?;
    if let Some(path) = &args.out.csv {
        lhv::write_signs_csv(&particles, &solutions, create(path)?)?;
    }
    Ok(!solutions.is_empty())
}

fn run_bellscan(out: &mut impl Write, args: &ScanArgs) -> anyhow::Result<bool> {
    let grid = AngleGrid::new(args.grid)?;
    let scan = landscape::scan(grid)?;
    let peak = landscape::max_violation(grid)?;
    let rows: Vec<Vec<String>> = scan
        .regions
        .iter()
        .enumerate()
        .map(|(k, r)| {
            vec![
                (k + 1).to_string(),
                r.members.len().to_string(),
                table_num(r.refined.alpha),
                table_num(r.refined.beta),
                table_num(r.peak.f),
                table_num(r.refined.f),
            ]
        })
        .collect();
    write!(
        out,
        "{}",
        ghzlab_core::format::render_table(&["region", "cells", "alpha", "beta", "grid f", "refined f"], &rows)
    )?;
    let commuting = scan.violating_cells().filter(|c| c.comm_norm == 0.0).count();
    writeln!(out, "{} violation regions, max f = {:.6}", scan.regions.len(), peak.f)?;
    writeln!(out, "violating cells with commuting directions: {commuting}")?;
    if let Some(path) = &args.csv {
        landscape::export(&scan, path, ExportFormat::Csv).with_context(|| format!("cannot write {}", path.display()))?;
    }
    if let Some(path) = &args.pgm {
        landscape::export(&scan, path, ExportFormat::Pgm).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(commuting == 0)
}

fn run_sg(out: &mut impl Write, args: &SgArgs) -> anyhow::Result<bool> {
    let stats = sgsim::run_sequence_sharded(args.shots, args.seed, args.workers)?;
    write!(out, "{}", stats.to_key_value())?;
    // Binomial error bars at the predicted p = 1/2.
    let y_bound = 3.0 * 0.5 / (stats.shots as f64).sqrt();
    let a_bound = 3.0 * 0.5 / (stats.y_up.max(1) as f64).sqrt();
    let pass = stats.y_up > 0
        && (stats.freq_y_up() - 0.5).abs() < y_bound
        && (stats.freq_a() - 0.5).abs() < a_bound;
    writeln!(out, "frequencies within 3 sigma of 1/2: {}", pass_word(pass))?;
    if let Some(path) = &args.out.csv {
        stats.write_csv(create(path)?)?;
    }
    Ok(pass)
}

fn run(command: &Command) -> anyhow::Result<bool> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let pass = match command {
        Command::GhzVerify(v) => emit_relations(&mut out, &stabilizer::verify_ghz_relations_with_tol(v.tol), &v.out.csv)?,
        Command::BellVerify(v) => emit_relations(&mut out, &stabilizer::verify_bell_relations_with_tol(v.tol), &v.out.csv)?,
        Command::Sigmaxy(o) => {
            let r = stabilizer::verify_sigma_xy_observable();
            writeln!(out, "-i sx sy =")?;
            for row in 0..2 {
                let entries: Vec<String> = (0..2).map(|c| lhv::fmt_complex(r.matrix.get(row, c))).collect();
                writeln!(out, "  [{}]", entries.join(", "))?;
            }
            writeln!(out, "eigenvalues: {}", r.eigenvalues.iter().map(|e| table_num(*e)).collect::<Vec<_>>().join(", "))?;
            emit_relations(&mut out, &[r.to_relation()], &o.csv)?
        }
        Command::Hardy(h) => run_hardy(&mut out, h)?,
        Command::Lhv(s) => run_lhv(&mut out, s)?,
        Command::Corrmodel(c) => run_corrmodel(&mut out, c)?,
        Command::Bellscan(s) => run_bellscan(&mut out, s)?,
        Command::Sg(s) => run_sg(&mut out, s)?,
        Command::SelfTest => {
            let report = run_self_test();
            write!(out, "{}", report.render())?;
            let passed = report.checks.iter().filter(|c| c.pass).count();
            writeln!(out, "{passed} / {} checks pass", report.checks.len())?;
            report.all_pass()
        }
    };
    out.flush()?;
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = validate(&cli.command) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
