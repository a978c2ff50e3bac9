//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symlab::{emit_reports, exit_status, Format};
use symlab_core::catalog::{get_model, BianchiModel, BianchiType, ErrataProbe, ModelParams, ALL_TYPES};
use symlab_core::dynamics::{conserved_drift, integrate, random_initial_state, Bindings, ModelInstance};
use symlab_core::emfield::{
    admissibility_residual, algebraic_constraint_residual, bianchi_residual, compatibility_residual, field_from_potential, rank3_is_zero,
};
use symlab_core::expr::{canonicalize, parse, random_assignment, Assignment, Expr};
use symlab_core::geometry::{jacobi_residual, killing_residual, lie_bracket, structure_constants_from_frame, StructureConstants};
use symlab_core::report::{run_verification, Residual};
use symlab_core::solver::{reconstruct_potential, solve_and_constrain, witness};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn zero(e: &Expr) -> bool {
    e.is_zero().unwrap_or(false)
}

fn models() -> Vec<BianchiModel> {
    ALL_TYPES.iter().map(|t| get_model(*t, &ModelParams::default()).unwrap()).collect()
}

fn algebra() -> Outcome {
    let mut brackets = 0;
    for m in models() {
        let c = structure_constants_from_frame(&m.frame).map_err(|e| format!("{}: {e}", m.tag))?;
        ensure(jacobi_residual(&c).is_zero(), || format!("{}: Jacobi residual nonzero", m.tag))?;
        for a in 0..3 {
            for b in 0..3 {
                let mut rhs = lie_bracket(&m.frame[a], &m.frame[b]);
                for g in 0..3 {
                    rhs = rhs.sub(&m.frame[g].scale(c.get(a + 1, b + 1, g + 1)));
                }
                ensure(rhs.is_zero().unwrap_or(false), || format!("{}: [xi{}, xi{}] != C xi", m.tag, a + 1, b + 1))?;
                brackets += 1;
            }
        }
    }
    Ok(format!("9 models, {brackets} brackets"))
}

fn constants_of(probe: &ErrataProbe, m: &BianchiModel) -> Option<StructureConstants> {
    match probe {
        ErrataProbe::Constants(entries) => {
            let e: Vec<_> = entries.iter().map(|(a, b, g, v)| (*a, *b, *g, m.params.parse(v).unwrap())).collect();
            Some(StructureConstants::from_entries(&e))
        }
        _ => None,
    }
}

fn errata() -> Outcome {
    let viii = get_model(BianchiType::VIII, &ModelParams::default()).unwrap();
    let vii = get_model(BianchiType::VII, &ModelParams::default()).unwrap();
    ensure(jacobi_residual(&viii.constants).is_zero(), || String::from("VIII frame-derived constants fail Jacobi"))?;
    let printed_viii: Vec<_> = viii.errata.iter().filter_map(|n| constants_of(&n.probe, &viii).map(|c| (n, c))).collect();
    ensure(!printed_viii.is_empty(), || String::from("VIII lists no printed structure constants"))?;
    for (n, c) in &printed_viii {
        ensure(!jacobi_residual(c).is_zero(), || format!("VIII printed constants pass Jacobi: {}", n.printed_form))?;
    }
    let derived = structure_constants_from_frame(&vii.frame).unwrap();
    let printed_vii: Vec<_> = vii.errata.iter().filter_map(|n| constants_of(&n.probe, &vii).map(|c| (n, c))).collect();
    ensure(!printed_vii.is_empty(), || String::from("VII lists no printed structure-constant line"))?;
    for (n, c) in &printed_vii {
        let differs = (0..3).any(|a| (0..3).any(|b| (0..3).any(|g| !zero(&(&c.c[a][b][g] - &derived.c[a][b][g])))));
        ensure(differs, || format!("VII printed line agrees with the frame: {}", n.printed_form))?;
    }
    ensure(derived == vii.constants, || String::from("VII catalog constants differ from the frame brackets"))?;
    let reports = vec![run_verification(&vii, 5, 0), run_verification(&viii, 5, 0)];
    let json: serde_json::Value = serde_json::from_str(&emit_reports(&reports, Format::Json)).unwrap();
    for (r, (n, _)) in json["reports"].as_array().unwrap().iter().zip([&printed_vii[0], &printed_viii[0]]) {
        let listed = r["errata"].as_array().unwrap().iter().any(|e| e["location"] == n.location.as_str() && e["printed_fails"] == true);
        ensure(listed, || format!("{} missing from verify output", n.location))?;
    }
    ensure(exit_status(&reports) == 0, || String::from("errata-only reports do not exit 0"))?;
    Ok(format!("{} VIII and {} VII printed constant sets rejected", printed_viii.len(), printed_vii.len()))
}

fn killing() -> Outcome {
    let mut n = 0;
    for m in models() {
        ensure(m.coframe.is_some(), || format!("{}: no invariant coframe", m.tag))?;
        for (s, x) in m.frame.iter().enumerate() {
            for row in killing_residual(&m.metric, x) {
                for e in row {
                    ensure(zero(&e), || format!("{}: generator {} leaves {e}", m.tag, s + 1))?;
                    n += 1;
                }
            }
        }
    }
    Ok(format!("{n} residual components exactly zero"))
}

fn admissibility() -> Outcome {
    let mut n = 0;
    for m in models() {
        let da = field_from_potential(&m.potential).sub(&m.field);
        ensure(da.is_zero().unwrap(), || format!("{}: F != dA", m.tag))?;
        ensure(rank3_is_zero(&bianchi_residual(&m.field)).unwrap(), || format!("{}: Bianchi identity", m.tag))?;
        for row in algebraic_constraint_residual(&m.potential, &m.frame, &m.constants) {
            for e in row {
                ensure(zero(&e), || format!("{}: algebraic constraint leaves {e}", m.tag))?;
            }
        }
        for (s, x) in m.frame.iter().enumerate() {
            for e in admissibility_residual(&m.potential, &m.field, x) {
                ensure(zero(&e), || format!("{}: admissibility, generator {}: {e}", m.tag, s + 1))?;
            }
            for row in compatibility_residual(&m.field, x) {
                for e in row {
                    ensure(zero(&e), || format!("{}: compatibility, generator {}: {e}", m.tag, s + 1))?;
                }
            }
            // gamma + xi^b A_b, contracted here by hand
            let integral = &m.integrals[s];
            ensure(integral.xi.sub(x).is_zero().unwrap(), || format!("{}: integral {} has the wrong generator", m.tag, s + 1))?;
            let mut sum = integral.gamma.clone();
            for b in 0..4 {
                sum = sum.add(&x.c[b].mul(&m.potential.a[b]));
            }
            ensure(zero(&sum), || format!("{}: gamma reduction, generator {}: {sum}", m.tag, s + 1))?;
            n += 1;
        }
    }
    Ok(format!("{n} model-generator pairs"))
}

fn kgf() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for m in models() {
        let r = run_verification(&m, 100, 11);
        for c in r.checks.iter().filter(|c| c.name.starts_with("wave-operator")) {
            match &c.residual {
                Residual::MaxAbs { value, points: p, .. } => {
                    ensure(*value < 1e-8, || format!("{}: {} residual {value:e}", m.tag, c.name))?;
                    worst = worst.max(*value);
                    points += p;
                }
                other => return Err(format!("{}: {} gave {other:?}", m.tag, c.name)),
            }
        }
    }
    Ok(format!("{points} point evaluations, max residual {worst:.2e}"))
}

fn solver() -> Outcome {
    for tag in ALL_TYPES.into_iter().filter(|t| t.is_solvable()) {
        let m = get_model(tag, &ModelParams::default()).unwrap();
        let fam = solve_and_constrain(tag, &m.params).map_err(|e| format!("{tag}: {e}"))?;
        ensure(fam.free_functions.len() == 3 && fam.free_constants.is_empty(), || format!("{tag}: residual freedom {fam}"))?;
        let (funcs, consts) = witness(&fam, &m.field).map_err(|e| format!("{tag}: no witness: {e}"))?;
        let inst = fam.instantiate(&funcs, &consts).unwrap();
        ensure(inst.sub(&m.field).is_zero().unwrap(), || format!("{tag}: witnessed family differs from catalog field"))?;
        let a = reconstruct_potential(&fam.field).map_err(|e| format!("{tag}: {e}"))?;
        ensure(field_from_potential(&a).sub(&fam.field).is_zero().unwrap(), || format!("{tag}: reconstruction is not exact"))?;
    }
    Ok(String::from("types I..VII reproduced with 3 free functions each"))
}

fn dynamics() -> Outcome {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for tag in ALL_TYPES {
        let inst = ModelInstance::new(get_model(tag, &ModelParams::default()).unwrap(), Bindings::standard()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024 + tag.index() as u64);
        let mut ok = 0;
        for k in 0..5 {
            let s0 = random_initial_state(tag, &mut rng);
            match integrate(&inst, s0, (0.0, 10.0), 1e-10).and_then(|t| conserved_drift(&t, &inst).map(|d| (t, d))) {
                Ok((_, d)) if d.max() < 1e-8 => {
                    ok += 1;
                    worst = worst.max(d.max());
                }
                Ok((t, d)) => failures.push(format!("{tag}#{k}: drift {:.1e} at tau {:.2}", d.max(), t.samples.last().unwrap().0)),
                Err(e) => failures.push(format!("{tag}#{k}: {e}")),
            }
        }
        println!("    G3({tag}): {ok}/5 states within 1e-8 over [0, 10]");
    }
    // test power: a potential outside the admissible class breaks Y3
    let m = get_model(BianchiType::V, &ModelParams::default()).unwrap();
    let mut a = m.potential.clone();
    a.a[2] = a.a[2].add(&parse("u1").unwrap());
    let pert = ModelInstance::with_potential(m, a, Bindings::standard()).unwrap();
    let s0 = random_initial_state(BianchiType::V, &mut ChaCha8Rng::seed_from_u64(1));
    let d = integrate(&pert, s0, (0.0, 2.0), 1e-10).and_then(|t| conserved_drift(&t, &pert)).map_err(|e| e.to_string())?;
    let power = d.y.iter().cloned().fold(0.0, f64::max);
    println!("    perturbed G3(V): max Y drift {power:.2e}, H drift {:.2e}", d.h);
    ensure(power > 1e-3, || format!("perturbation not detected: Y drift {power:e}"))?;
    if failures.is_empty() {
        Ok(format!("45 runs, max drift {worst:.2e}; perturbation drift {power:.2e}"))
    } else {
        Err(format!("{} of 45 runs out of tolerance; first: {}", failures.len(), failures[0]))
    }
}

const LEAVES: [&str; 14] = [
    "u0",
    "u1",
    "u2",
    "u3",
    "alpha0",
    "beta0'",
    "gamma0",
    "k",
    "3",
    "exp(u3)",
    "exp(u2 - 2*u1)",
    "sin(2*u3 + 1)",
    "cos(u1 - u2)",
    "sin(u3*sin(alpha))",
];

fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return LEAVES[rng.gen_range(0..LEAVES.len())].to_string();
    }
    let a = random_expr(rng, depth - 1);
    match rng.gen_range(0..6) {
        0 => format!("({a}) + ({})", random_expr(rng, depth - 1)),
        1 => format!("({a}) - ({})", random_expr(rng, depth - 1)),
        2 => format!("({a})*({})", random_expr(rng, depth - 1)),
        3 => format!("({a})^2"),
        4 => format!("({a})/(2 + cos(u2))"),
        _ => format!("({a})/(u1^2 + 1)"),
    }
}

fn bind(e: &Expr) -> Expr {
    let mut out = e.clone();
    for (name, f) in [("alpha0", "sin(u0) + u0"), ("beta0", "exp(u0)*cos(u0)"), ("gamma0", "u0^3 - 1")] {
        out = out.substitute_func(name, &parse(f).unwrap()).unwrap();
    }
    out
}

fn points(rng: &mut ChaCha8Rng, e: &Expr, n: usize) -> Vec<Assignment> {
    (0..n).map(|_| random_assignment(rng, &e.funcs(), &e.params())).collect()
}

fn expressions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut zeros = 0;
    for n in 0..50 {
        let s = random_expr(&mut rng, 4);
        let e = parse(&s).map_err(|err| format!("{s}: {err}"))?;
        let c = canonicalize(&e);
        ensure(canonicalize(&c) == c, || format!("not idempotent: {s}"))?;
        ensure(parse(&c.to_string()).ok().as_ref() == Some(&c), || format!("print/parse round trip: {s}"))?;
        let b = bind(&e);
        for a in points(&mut rng, &b, 10) {
            for i in 0..4 {
                let d = bind(&e.diff(i)).evaluate(&a).unwrap();
                let (mut ap, mut am) = (a.clone(), a.clone());
                ap.coords[i] += h;
                am.coords[i] -= h;
                let fd = (b.evaluate(&ap).unwrap() - b.evaluate(&am).unwrap()) / (2.0 * h);
                let rel = (d - fd).abs() / d.abs().max(1.0);
                worst = worst.max(rel);
                ensure(rel < 1e-6, || format!("expression {n} {s}: d/du{i} {d} vs {fd}"))?;
            }
        }
        for i in 0..4 {
            for j in (i + 1)..4 {
                ensure(zero(&(&e.diff(i).diff(j) - &e.diff(j).diff(i))), || format!("partials {i},{j} do not commute: {s}"))?;
            }
        }
        // true identities must be recognised, and nothing nonzero may be
        let one = Expr::int(1);
        let ident = &(&e.add(&one).mul(&e.add(&one)) - &e.mul(&e)) - &e.add(&e).add(&one);
        ensure(zero(&ident), || format!("missed identity for {s}"))?;
        let pythagoras = parse("sin(u1 - u2)^2 + cos(u1 - u2)^2 - 1").unwrap();
        for cand in [ident, e.mul(&pythagoras), e.clone(), &e - &e.diff(3)] {
            if zero(&cand) {
                zeros += 1;
                let bc = bind(&cand);
                for a in points(&mut rng, &b, 10) {
                    let v = bc.evaluate(&a).unwrap();
                    ensure(v.abs() < 1e-9 * (1.0 + b.evaluate(&a).unwrap().powi(2)), || format!("is_zero accepted {cand}, value {v:e}"))?;
                }
            }
        }
    }
    Ok(format!("50 expressions x 10 points, worst derivative error {worst:.1e}, {zeros} zero claims sampled"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 algebra suite", algebra, Duration::from_secs(5)),
        ("2 errata detection", errata, Duration::from_secs(1)),
        ("3 Killing suite", killing, Duration::from_secs(10)),
        ("4 admissibility suite", admissibility, Duration::from_secs(10)),
        ("5 wave-operator suite", kgf, Duration::from_secs(10)),
        ("6 solver reproduction", solver, Duration::from_secs(10)),
        ("7 dynamics suite", dynamics, Duration::from_secs(60)),
        ("8 expression engine", expressions, Duration::from_secs(5)),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let t = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let dt = t.elapsed();
        let out = match out {
            Ok(d) if dt > limit => Err(format!("{d}; took {:.2} s, limit {} s", dt.as_secs_f64(), limit.as_secs())),
            o => o,
        };
        match out {
            Ok(d) => println!("PASS  criterion {name} ({:.2} s): {d}", dt.as_secs_f64()),
            Err(d) => {
                failed += 1;
                println!("FAIL  criterion {name} ({:.2} s): {d}", dt.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
