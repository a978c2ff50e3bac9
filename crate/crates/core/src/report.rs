//! Structured verification of a model: every symbolic and numeric
//! condition, in a fixed order, with errata reproduction.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::BianchiModel;
use crate::emfield::{
    admissibility_residual, algebraic_constraint_residual, bianchi_residual, compatibility_residual, field_from_potential, gamma_of,
    KgfProbe,
};
use crate::expr::{Assignment, Expr, ExprError, FuncSymbol, ANGLE};
use crate::geometry::{jacobi_residual, killing_residual, lie_bracket, structure_constants_from_frame, VectorField};

/// Numeric tolerance for Killing and algebraic checks when evaluated numerically.
pub const TOL_ALGEBRAIC: f64 = 1e-9;
/// Numeric tolerance for the wave-operator conditions and dynamics drift.
pub const TOL_NUMERIC: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Symbolic,
    Numeric,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Symbolic => "symbolic",
            Mode::Numeric => "numeric",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Residual {
    Zero,
    /// First nonzero residual component, with its position.
    Nonzero {
        at: String,
        expr: String,
    },
    /// Largest absolute residual over `points` samples.
    MaxAbs {
        value: f64,
        points: usize,
        worst: Option<[f64; 4]>,
    },
    /// The check could not be evaluated.
    Error(String),
}

impl fmt::Display for Residual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Residual::Zero => f.write_str("zero"),
            Residual::Nonzero { at, expr } => write!(f, "{at} = {expr}"),
            Residual::MaxAbs { value, points, worst } => {
                write!(f, "max |r| = {value:.3e} over {points} points")?;
                if let Some(w) = worst {
                    write!(f, " (worst at u = [{:.4}, {:.4}, {:.4}, {:.4}])", w[0], w[1], w[2], w[3])?;
                }
                Ok(())
            }
            Residual::Error(e) => write!(f, "error: {e}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckEntry {
    pub name: String,
    pub mode: Mode,
    pub residual: Residual,
    pub tolerance: Option<f64>,
    pub verdict: Verdict,
}

impl CheckEntry {
    fn symbolic(name: String, residual: Residual) -> Self {
        let verdict = if residual == Residual::Zero { Verdict::Pass } else { Verdict::Fail };
        CheckEntry { name, mode: Mode::Symbolic, residual, tolerance: None, verdict }
    }

    fn numeric(name: String, residual: Residual, tol: f64) -> Self {
        let verdict = match residual {
            Residual::MaxAbs { value, .. } if value < tol => Verdict::Pass,
            _ => Verdict::Fail,
        };
        CheckEntry { name, mode: Mode::Numeric, residual, tolerance: Some(tol), verdict }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrataEntry {
    pub location: String,
    pub printed_form: String,
    pub consistent_form: String,
    pub evidence: String,
    pub printed_fails: bool,
    pub consistent_passes: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub model: String,
    pub samples: usize,
    pub seed: u64,
    pub checks: Vec<CheckEntry>,
    pub errata: Vec<ErrataEntry>,
    pub solver: Option<String>,
    /// Wall-clock milliseconds, filled in by callers that have a clock.
    pub timing_ms: Option<f64>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == Verdict::Pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.checks.iter().filter(|c| c.verdict == Verdict::Fail)
    }
}

/// First nonzero entry among labelled residuals.
fn first_nonzero<'a>(items: impl IntoIterator<Item = (String, &'a Expr)>) -> Residual {
    for (at, e) in items {
        match e.is_zero() {
            Ok(true) => {}
            Ok(false) => return Residual::Nonzero { at, expr: e.to_string() },
            Err(err) => return Residual::Error(format!("{at}: {err}")),
        }
    }
    Residual::Zero
}

fn grid<'a, const N: usize, const M: usize>(prefix: &str, r: &'a [[Expr; M]; N]) -> Vec<(String, &'a Expr)> {
    let mut out = Vec::new();
    for (i, row) in r.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            out.push((format!("{prefix}[{i}][{j}]"), e));
        }
    }
    out
}

fn closure(m: &BianchiModel) -> Residual {
    let derived = match structure_constants_from_frame(&m.frame) {
        Ok(c) => c,
        Err(e) => return Residual::Error(format!("{e}")),
    };
    let mut diffs = Vec::new();
    for a in 0..3 {
        for b in 0..3 {
            for g in 0..3 {
                diffs.push((format!("C^{}_{}{} (derived - declared)", g + 1, a + 1, b + 1), &derived.c[a][b][g] - &m.constants.c[a][b][g]));
            }
        }
    }
    let r = first_nonzero(diffs.iter().map(|(s, e)| (s.clone(), e)));
    if r != Residual::Zero {
        return r;
    }
    for a in 0..3 {
        for b in (a + 1)..3 {
            let mut rhs = VectorField::default();
            for g in 0..3 {
                rhs = rhs.add(&m.frame[g].scale(&m.constants.c[a][b][g]));
            }
            let d = lie_bracket(&m.frame[a], &m.frame[b]).sub(&rhs);
            let r = first_nonzero(d.c.iter().enumerate().map(|(i, e)| (format!("[xi{}, xi{}] - C xi, component {i}", a + 1, b + 1), e)));
            if r != Residual::Zero {
                return r;
            }
        }
    }
    Residual::Zero
}

fn jacobi(m: &BianchiModel) -> Residual {
    let j = jacobi_residual(&m.constants);
    match j.nonzero().first() {
        None => Residual::Zero,
        Some((a, b, c, d, e)) => Residual::Nonzero { at: format!("J[{a}][{b}][{c}] component {d}"), expr: e.to_string() },
    }
}

/// Names of the free functions of `u0` appearing in the model.
fn function_names(m: &BianchiModel) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut add = |e: &Expr| {
        for f in e.funcs() {
            out.insert(f.name.clone());
        }
    };
    for row in &m.metric.g {
        row.iter().for_each(&mut add);
    }
    m.potential.a.iter().for_each(&mut add);
    for x in &m.frame {
        x.c.iter().for_each(&mut add);
    }
    out
}

/// Random point with a diagonally dominant (hence nonsingular) `a_{αβ}`.
fn random_point(rng: &mut ChaCha8Rng, names: &BTreeSet<String>, angle: f64) -> Assignment {
    let mut p = Assignment::at(core::array::from_fn(|_| rng.gen_range(0.2..1.2))).with_param(ANGLE, angle);
    for n in names {
        let metric_entry = n.len() == 3 && n.starts_with('a') && n[1..].bytes().all(|b| (b'1'..=b'3').contains(&b));
        let v0 = if metric_entry && n.as_bytes()[1] == n.as_bytes()[2] {
            -rng.gen_range(0.8..1.6)
        } else if metric_entry {
            rng.gen_range(-0.2..0.2)
        } else {
            rng.gen_range(-2.0..2.0)
        };
        p.funcs.insert(FuncSymbol::new(n, 0), v0);
        for k in 1..=3 {
            p.funcs.insert(FuncSymbol::new(n, k), rng.gen_range(-1.0..1.0));
        }
    }
    p
}

fn kgf(m: &BianchiModel, s: usize, samples: usize, rng: &mut ChaCha8Rng) -> Residual {
    let names = function_names(m);
    let angle = rng.gen_range(0.2..2.9);
    let params = Assignment::default().with_param(ANGLE, angle);
    let probe = match KgfProbe::new(&m.metric, &m.potential, &m.frame[s], &params) {
        Ok(p) => p,
        Err(e) => return Residual::Error(format!("{e}")),
    };
    let mut worst = 0.0;
    let mut at = None;
    for _ in 0..samples {
        let p = random_point(rng, &names, angle);
        match probe.exact_at(&p) {
            Ok((r1, r2)) => {
                let r = r1.abs().max(r2.abs());
                if !r.is_finite() || r > worst || at.is_none() {
                    if !r.is_finite() {
                        return Residual::MaxAbs { value: f64::INFINITY, points: samples, worst: Some(p.coords) };
                    }
                    worst = r;
                    at = Some(p.coords);
                }
            }
            Err(e) => return Residual::Error(format!("at u = {:?}: {e}", p.coords)),
        }
    }
    Residual::MaxAbs { value: worst, points: samples, worst: at }
}

/// Runs every check on `model` in the fixed order: closure and Jacobi,
/// Killing, F = dA, Bianchi, admissibility, algebraic constraints,
/// compatibility, wave-operator conditions (numeric), gamma reduction.
pub fn run_verification(model: &BianchiModel, samples: usize, seed: u64) -> Report {
    let m = model;
    let mut checks = Vec::new();
    checks.push(CheckEntry::symbolic(String::from("frame closure"), closure(m)));
    checks.push(CheckEntry::symbolic(String::from("Jacobi identity"), jacobi(m)));
    for (s, x) in m.frame.iter().enumerate() {
        let r = killing_residual(&m.metric, x);
        checks.push(CheckEntry::symbolic(format!("Killing equations, generator {}", s + 1), first_nonzero(grid("L_xi g", &r))));
    }
    let da = field_from_potential(&m.potential).sub(&m.field);
    checks.push(CheckEntry::symbolic(String::from("field equals dA"), first_nonzero(grid("F - dA", &da.f))));
    let b = bianchi_residual(&m.field);
    let mut bl = Vec::new();
    for (i, plane) in b.iter().enumerate() {
        for (j, row) in plane.iter().enumerate() {
            for (k, e) in row.iter().enumerate() {
                bl.push((format!("B[{i}][{j}][{k}]"), e));
            }
        }
    }
    checks.push(CheckEntry::symbolic(String::from("Bianchi identity"), first_nonzero(bl)));
    for (s, x) in m.frame.iter().enumerate() {
        let r = admissibility_residual(&m.potential, &m.field, x);
        let items = r.iter().enumerate().map(|(i, e)| (format!("R_{i}"), e));
        checks.push(CheckEntry::symbolic(format!("admissibility, generator {}", s + 1), first_nonzero(items)));
    }
    let alg = algebraic_constraint_residual(&m.potential, &m.frame, &m.constants);
    checks.push(CheckEntry::symbolic(String::from("algebraic constraints"), first_nonzero(grid("xi_a(xi_b.A) - C xi.A", &alg))));
    for (s, x) in m.frame.iter().enumerate() {
        let r = compatibility_residual(&m.field, x);
        checks.push(CheckEntry::symbolic(format!("compatibility, generator {}", s + 1), first_nonzero(grid("L_xi F", &r))));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..3 {
        let r = kgf(m, s, samples, &mut rng);
        checks.push(CheckEntry::numeric(format!("wave-operator conditions, generator {}", s + 1), r, TOL_NUMERIC));
    }
    for (s, x) in m.frame.iter().enumerate() {
        let integral = &m.integrals[s];
        let dg = &integral.gamma - &gamma_of(x, &m.potential);
        let xs = integral.xi.sub(x);
        let mut items: Vec<(String, &Expr)> =
            xs.c.iter().enumerate().map(|(i, e)| (format!("integral xi - generator, component {i}"), e)).collect();
        items.push((String::from("gamma + xi.A"), &dg));
        checks.push(CheckEntry::symbolic(format!("gamma reduction, generator {}", s + 1), first_nonzero(items)));
    }
    let errata = m
        .errata
        .iter()
        .map(|n| {
            let (pf, cp) = match n.reproduce(m) {
                Ok(c) => (c.printed_fails, c.consistent_passes),
                Err(_) => (false, false),
            };
            ErrataEntry {
                location: n.location.to_string(),
                printed_form: n.printed_form.to_string(),
                consistent_form: n.consistent_form.to_string(),
                evidence: n.evidence.to_string(),
                printed_fails: pf,
                consistent_passes: cp,
            }
        })
        .collect();
    Report { model: m.name(), samples, seed, checks, errata, solver: None, timing_ms: None }
}

impl From<ExprError> for Residual {
    fn from(e: ExprError) -> Self {
        Residual::Error(format!("{e}"))
    }
}
