use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symlab::{emit_reports, exit_status, Format};
use symlab_core::catalog::{self, get_model, BianchiModel, BianchiType, ModelParams, ALL_TYPES};
use symlab_core::dynamics::{conserved_drift, integrate, random_initial_state, Bindings, ModelInstance, PhaseState};
use symlab_core::geometry::structure_constants_from_frame;
use symlab_core::report::{run_verification, Report};
use symlab_core::solver::{build_field_system, solve_and_constrain};

#[derive(Parser)]
#[command(name = "symlab", version, about = "Homogeneous spacetimes with admissible electromagnetic fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Text,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Text => Format::Text,
            OutFormat::Json => Format::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run every check on one group, all nine, or a manifest.
    Verify {
        /// Group I..IX (or 1..9), or `all`.
        #[arg(long, required_unless_present = "manifest")]
        group: Option<String>,
        /// Verify the model described by a manifest file instead.
        #[arg(long, conflicts_with = "group")]
        manifest: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        format: OutFormat,
        /// Attach the solver family (groups I..VII) to the report.
        #[arg(long)]
        with_solver: bool,
    },
    /// Solve the field system of a solvable group (I..VII).
    Solve {
        #[arg(long)]
        group: String,
        /// Also print the linear system.
        #[arg(long)]
        system: bool,
    },
    /// Integrate a charged test particle and write the trajectory as CSV.
    Simulate {
        #[arg(long)]
        group: String,
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// TOML file with a `[bindings]` section.
        #[arg(long)]
        bindings: Option<PathBuf>,
        /// Seed for the random initial state.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Initial state `u0,u1,u2,u3,p0,p1,p2,p3`.
        #[arg(long, allow_hyphen_values = true)]
        state: Option<String>,
        /// CSV output path (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the manifest of a built-in model.
    Export {
        #[arg(long)]
        group: String,
        /// Include the standard dynamics bindings.
        #[arg(long)]
        bindings: bool,
    },
    /// List the documented misprints of a group (or `all`) and re-check them.
    Errata {
        #[arg(long)]
        group: String,
    },
}

fn parse_group(s: &str) -> Result<BianchiType, String> {
    s.parse().map_err(|_| format!("unknown group {s:?}; expected I..IX or 1..9"))
}

fn groups(s: &str) -> Result<Vec<BianchiType>, String> {
    if s.eq_ignore_ascii_case("all") {
        Ok(ALL_TYPES.to_vec())
    } else {
        Ok(vec![parse_group(s)?])
    }
}

fn model(tag: BianchiType) -> Result<BianchiModel, String> {
    get_model(tag, &ModelParams::default()).map_err(|e| e.to_string())
}

fn solver_text(tag: BianchiType) -> String {
    match solve_and_constrain(tag, &ModelParams::default()) {
        Ok(f) => f.to_string(),
        Err(e) => format!("not available: {e}"),
    }
}

fn timed(m: &BianchiModel, samples: usize, seed: u64, with_solver: bool) -> Report {
    let t = Instant::now();
    let mut r = run_verification(m, samples, seed);
    if with_solver {
        r.solver = Some(solver_text(m.tag));
    }
    r.timing_ms = Some(t.elapsed().as_secs_f64() * 1e3);
    r
}

fn verify(
    group: Option<String>,
    manifest: Option<PathBuf>,
    samples: usize,
    seed: u64,
    format: OutFormat,
    with_solver: bool,
) -> Result<i32, String> {
    let reports = if let Some(path) = manifest {
        let m = symlab::load(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut r = timed(&m.model, samples, seed, with_solver);
        r.model = m.name;
        vec![r]
    } else {
        let tags = groups(group.as_deref().unwrap_or("all"))?;
        let models = tags.iter().map(|t| model(*t)).collect::<Result<Vec<_>, _>>()?;
        std::thread::scope(|s| {
            let handles: Vec<_> = models.iter().map(|m| s.spawn(move || timed(m, samples, seed, with_solver))).collect();
            handles.into_iter().map(|h| h.join().expect("verification thread panicked")).collect::<Vec<_>>()
        })
    };
    print!("{}", emit_reports(&reports, format.into()));
    Ok(exit_status(&reports))
}

fn solve(group: &str, system: bool) -> Result<i32, String> {
    let tag = parse_group(group)?;
    if !tag.is_solvable() {
        return Err(format!("group {tag} has no Abelian subgroup spanned by the first two generators; the solver covers I..VII"));
    }
    let params = ModelParams::default();
    if system {
        let frame = catalog::frame(tag, &params).map_err(|e| e.to_string())?;
        let c = structure_constants_from_frame(&frame).map_err(|e| e.to_string())?;
        let sys = build_field_system(&c, &frame).map_err(|e| e.to_string())?;
        println!("field system for G3({tag}):\n{sys}");
    }
    let fam = solve_and_constrain(tag, &params).map_err(|e| e.to_string())?;
    println!("solution family for G3({tag}):\n{fam}");
    Ok(0)
}

fn parse_state(s: &str) -> Result<PhaseState, String> {
    let v: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    if v.len() != 8 {
        return Err(format!("--state needs 8 numbers, got {}", v.len()));
    }
    Ok(PhaseState { u: [v[0], v[1], v[2], v[3]], p: [v[4], v[5], v[6], v[7]] })
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    group: &str,
    tau: f64,
    tol: f64,
    bindings: Option<PathBuf>,
    seed: u64,
    state: Option<String>,
    out: Option<PathBuf>,
) -> Result<i32, String> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(String::from("--tol must be positive"));
    }
    let tag = parse_group(group)?;
    let b = match bindings {
        Some(p) => symlab::load_bindings(&p).map_err(|e| format!("{}: {e}", p.display()))?,
        None => Bindings::standard(),
    };
    let inst = ModelInstance::new(model(tag)?, b).map_err(|e| e.to_string())?;
    let s0 = match state {
        Some(s) => parse_state(&s)?,
        None => random_initial_state(tag, &mut ChaCha8Rng::seed_from_u64(seed)),
    };
    let traj = integrate(&inst, s0, (0.0, tau), tol).map_err(|e| format!("integration stopped: {e}"))?;
    match out {
        Some(p) => {
            let f = std::fs::File::create(&p).map_err(|e| format!("{}: {e}", p.display()))?;
            symlab::trajectory::write_csv(f, &traj, &inst).map_err(|e| e.to_string())?;
        }
        None => {
            let mut buf = Vec::new();
            symlab::trajectory::write_csv(&mut buf, &traj, &inst).map_err(|e| e.to_string())?;
            match std::io::stdout().lock().write_all(&buf) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.to_string()),
                _ => {}
            }
        }
    }
    let d = conserved_drift(&traj, &inst).map_err(|e| e.to_string())?;
    eprintln!(
        "G3({tag}): {} steps ({} rejected); drift H {:.3e}, Y1 {:.3e}, Y2 {:.3e}, Y3 {:.3e}",
        traj.accepted, traj.rejected, d.h, d.y[0], d.y[1], d.y[2]
    );
    Ok(0)
}

fn errata(group: &str) -> Result<i32, String> {
    let mut status = 0;
    let mut out = std::io::stdout().lock();
    for tag in groups(group)? {
        let m = model(tag)?;
        if m.errata.is_empty() {
            let _ = writeln!(out, "G3({tag}): no errata");
            continue;
        }
        let _ = writeln!(out, "G3({tag}): {} errata", m.errata.len());
        for n in &m.errata {
            let ok = n.reproduce(&m).map(|c| c.printed_fails && c.consistent_passes).unwrap_or(false);
            if !ok {
                status = 1;
            }
            let _ = writeln!(out, "  - {} [{}]", n.location, if ok { "reproduced" } else { "NOT reproduced" });
            let _ = writeln!(out, "      printed:    {}", n.printed_form);
            let _ = writeln!(out, "      consistent: {}", n.consistent_form);
            let _ = writeln!(out, "      evidence:   {}", n.evidence);
        }
    }
    Ok(status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify { group, manifest, samples, seed, format, with_solver } => {
            verify(group, manifest, samples, seed, format, with_solver)
        }
        Command::Solve { group, system } => solve(&group, system),
        Command::Simulate { group, tau, tol, bindings, seed, state, out } => simulate(&group, tau, tol, bindings, seed, state, out),
        Command::Export { group, bindings } => parse_group(&group).and_then(model).map(|m| {
            let b = bindings.then(Bindings::standard);
            print!("{}", symlab::export(&m, b.as_ref()));
            0
        }),
        Command::Errata { group } => errata(&group),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
