//! Charged test particles: Hamilton's equations for
//! `H = g^{ij}(p_i + A_i)(p_j + A_j)` integrated with an adaptive
//! Dormand–Prince 5(4) pair, and drift of `H` and `Y_α = ξ_α^i p_i`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use nalgebra::{Matrix4, Vector4};
use rand::Rng;

use crate::catalog::{BianchiModel, BianchiType};
use crate::emfield::Potential;
use crate::expr::{parse, Assignment, Compiled, Expr, ExprError, ANGLE};
use crate::geometry::Metric;

#[derive(Clone, Debug, PartialEq)]
pub enum DynamicsError {
    Singular { tau: f64, reason: String },
    StepUnderflow { tau: f64, step: f64 },
    TooManySteps { tau: f64, steps: usize },
    Unbound(String),
    Expr(ExprError),
}

impl From<ExprError> for DynamicsError {
    fn from(e: ExprError) -> Self {
        DynamicsError::Expr(e)
    }
}

impl fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynamicsError::Singular { tau, reason } => write!(f, "singularity at tau = {tau}: {reason}"),
            DynamicsError::StepUnderflow { tau, step } => write!(f, "step underflow at tau = {tau} (h = {step:e})"),
            DynamicsError::TooManySteps { tau, steps } => write!(f, "step budget of {steps} exhausted at tau = {tau}"),
            DynamicsError::Unbound(s) => write!(f, "unbound symbol after binding: {s}"),
            DynamicsError::Expr(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for DynamicsError {}

/// Concrete choices for the free functions of `u0` and the sign `e`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bindings {
    /// Function name (e.g. `alpha0`, `a11`) to an expression in `u0`.
    pub funcs: BTreeMap<String, Expr>,
    /// Numeric value of the group VII angle.
    pub angle: f64,
    pub e: i8,
}

impl Bindings {
    /// `α0 = sin u0`, `β0 = cos u0`, `γ0 = u0`, `a = -δ`, `e = +1`.
    pub fn standard() -> Self {
        let mut funcs = BTreeMap::new();
        for (n, s) in [("alpha0", "sin(u0)"), ("beta0", "cos(u0)"), ("gamma0", "u0")] {
            funcs.insert(n.to_string(), parse(s).unwrap());
        }
        for i in 1..=3 {
            for j in i..=3 {
                let v = if i == j { Expr::int(-1) } else { Expr::zero() };
                funcs.insert(format!("a{i}{j}"), v);
            }
        }
        Bindings { funcs, angle: 1.0, e: 1 }
    }
}

/// A model with every free function bound, compiled for evaluation.
#[derive(Clone, Debug)]
pub struct ModelInstance {
    pub model: BianchiModel,
    pub bindings: Bindings,
    pub metric: Metric,
    pub potential: Potential,
    g: Vec<Option<Compiled>>,
    dg: Vec<Option<Compiled>>,
    a: Vec<Option<Compiled>>,
    da: Vec<Option<Compiled>>,
    xi: Vec<Option<Compiled>>,
}

fn compile(e: &Expr, params: &Assignment) -> Result<Option<Compiled>, DynamicsError> {
    if e.is_symbolic_zero() {
        return Ok(None);
    }
    let c = e.compile(params)?;
    if let Some(f) = c.funcs().first() {
        return Err(DynamicsError::Unbound(f.name.clone()));
    }
    Ok(Some(c))
}

fn bind(e: &Expr, b: &Bindings) -> Result<Expr, ExprError> {
    let mut out = e.clone();
    for f in e.funcs() {
        if let Some(v) = b.funcs.get(&f.name) {
            out = out.substitute_func(&f.name, v)?;
        }
    }
    Ok(out)
}

impl ModelInstance {
    pub fn new(model: BianchiModel, bindings: Bindings) -> Result<Self, DynamicsError> {
        Self::with_potential(model.clone(), model.potential.clone(), bindings)
    }

    /// Instance whose particle sees `potential` instead of the model's own
    /// (used to probe non-admissible fields).
    pub fn with_potential(model: BianchiModel, potential: Potential, bindings: Bindings) -> Result<Self, DynamicsError> {
        let params = Assignment::default().with_param(ANGLE, bindings.angle);
        let mut metric = model.metric.clone();
        metric.g[0][0] = Expr::int(bindings.e as i128);
        metric.e = bindings.e;
        for row in metric.g.iter_mut() {
            for x in row.iter_mut() {
                *x = bind(x, &bindings)?;
            }
        }
        let potential = potential.map(|e| bind(e, &bindings))?;
        let mut g = Vec::with_capacity(16);
        let mut dg = Vec::with_capacity(64);
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    if k == 0 {
                        g.push(compile(&metric.g[i][j], &params)?);
                    }
                    dg.push(compile(&metric.g[i][j].diff(k), &params)?);
                }
            }
        }
        let mut a = Vec::with_capacity(4);
        let mut da = Vec::with_capacity(16);
        for j in 0..4 {
            a.push(compile(&potential.a[j], &params)?);
            for i in 0..4 {
                da.push(compile(&potential.a[j].diff(i), &params)?);
            }
        }
        let mut xi = Vec::with_capacity(12);
        for x in &model.frame {
            for c in &x.c {
                xi.push(compile(c, &params)?);
            }
        }
        Ok(ModelInstance { model, bindings, metric, potential, g, dg, a, da, xi })
    }

    pub fn tag(&self) -> BianchiType {
        self.model.tag
    }
}

fn ev(c: &Option<Compiled>, u: &[f64; 4]) -> Result<f64, ExprError> {
    match c {
        None => Ok(0.0),
        Some(c) => Ok(c.eval(u, &[])?.re),
    }
}

/// Coordinates `u^i` and canonical momenta `p_i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseState {
    pub u: [f64; 4],
    pub p: [f64; 4],
}

impl PhaseState {
    fn to_vec(self) -> [f64; 8] {
        let mut y = [0.0; 8];
        y[..4].copy_from_slice(&self.u);
        y[4..].copy_from_slice(&self.p);
        y
    }

    fn from_vec(y: &[f64; 8]) -> Self {
        PhaseState { u: [y[0], y[1], y[2], y[3]], p: [y[4], y[5], y[6], y[7]] }
    }

    /// Kinetic momenta `P_i = p_i + A_i`.
    pub fn kinetic(&self, inst: &ModelInstance) -> Result<[f64; 4], DynamicsError> {
        let mut out = self.p;
        for (j, o) in out.iter_mut().enumerate() {
            *o += ev(&inst.a[j], &self.u)?;
        }
        Ok(out)
    }
}

struct Local {
    ginv: Matrix4<f64>,
    pk: Vector4<f64>,
}

fn local(inst: &ModelInstance, s: &PhaseState, tau: f64) -> Result<Local, DynamicsError> {
    let mut g = Matrix4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            g[(i, j)] = ev(&inst.g[4 * i + j], &s.u)?;
        }
    }
    let ginv = g.try_inverse().ok_or_else(|| DynamicsError::Singular { tau, reason: String::from("metric not invertible") })?;
    let pk = Vector4::from(s.kinetic(inst)?);
    Ok(Local { ginv, pk })
}

fn singular(tau: f64) -> impl Fn(ExprError) -> DynamicsError {
    move |e| DynamicsError::Singular { tau, reason: format!("{e}") }
}

pub fn hamiltonian_at(inst: &ModelInstance, s: &PhaseState) -> Result<f64, DynamicsError> {
    let l = local(inst, s, 0.0)?;
    Ok(l.pk.dot(&(l.ginv * l.pk)))
}

/// `Y_α = ξ_α^i p_i`.
pub fn integrals_at(inst: &ModelInstance, s: &PhaseState) -> Result<[f64; 3], DynamicsError> {
    let mut y = [0.0; 3];
    for (a, v) in y.iter_mut().enumerate() {
        for i in 0..4 {
            *v += ev(&inst.xi[4 * a + i], &s.u)? * s.p[i];
        }
    }
    Ok(y)
}

/// Right-hand side of Hamilton's equations.
fn rhs(inst: &ModelInstance, tau: f64, y: &[f64; 8]) -> Result<[f64; 8], DynamicsError> {
    let s = PhaseState::from_vec(y);
    let l = local(inst, &s, tau).map_err(|e| match e {
        DynamicsError::Expr(x) => singular(tau)(x),
        e => e,
    })?;
    let up = l.ginv * l.pk;
    let mut out = [0.0; 8];
    for i in 0..4 {
        out[i] = 2.0 * up[i];
    }
    for i in 0..4 {
        let mut dg = Matrix4::zeros();
        for r in 0..4 {
            for c in 0..4 {
                dg[(r, c)] = ev(&inst.dg[16 * i + 4 * r + c], &s.u).map_err(singular(tau))?;
            }
        }
        // ∂_i g^{-1} = -g^{-1} (∂_i g) g^{-1}, so ∂_i(g^{jk}) P_j P_k = -(g^{-1}P)ᵀ ∂_i g (g^{-1}P).
        let metric_term = -up.dot(&(dg * up));
        let mut field_term = 0.0;
        for j in 0..4 {
            field_term += ev(&inst.da[4 * j + i], &s.u).map_err(singular(tau))? * up[j];
        }
        out[4 + i] = -(metric_term + 2.0 * field_term);
    }
    if out.iter().any(|x| !x.is_finite()) {
        return Err(DynamicsError::Singular { tau, reason: String::from("non-finite derivative") });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// `(τ, state)` at every accepted step, `τ` strictly monotone.
    pub samples: Vec<(f64, PhaseState)>,
    pub accepted: usize,
    pub rejected: usize,
    pub min_step: f64,
    pub max_step: f64,
}

impl Trajectory {
    pub fn last(&self) -> &PhaseState {
        &self.samples.last().unwrap().1
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

pub const MAX_STEPS: usize = 50_000;

/// States with a component beyond this magnitude count as escaped to the
/// edge of the coordinate chart.
pub const ESCAPE: f64 = 1e8;

/// Adaptive integration from `tau_span.0` to `tau_span.1` (either
/// direction). Each accepted step has estimated local error at most
/// `tol · max(1, |y|)` componentwise.
pub fn integrate(inst: &ModelInstance, s0: PhaseState, tau_span: (f64, f64), tol: f64) -> Result<Trajectory, DynamicsError> {
    let (t0, t1) = tau_span;
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = s0.to_vec();
    let mut h = dir * (tol.powf(0.2) * 0.1).min((t1 - t0).abs().max(1e-300));
    let mut traj = Trajectory { samples: alloc::vec![(t0, s0)], accepted: 0, rejected: 0, min_step: f64::INFINITY, max_step: 0.0 };
    let mut k = [[0.0; 8]; 7];
    k[0] = rhs(inst, t, &y)?;
    while (t1 - t) * dir > 0.0 {
        if traj.accepted + traj.rejected >= MAX_STEPS {
            return Err(DynamicsError::TooManySteps { tau: t, steps: MAX_STEPS });
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        if h.abs() < 1e-13 * t.abs().max(1.0) && (t1 - t).abs() > 1e-13 * t.abs().max(1.0) {
            return Err(DynamicsError::StepUnderflow { tau: t, step: h });
        }
        let mut ok = true;
        for s in 1..7 {
            let mut ys = y;
            for (i, v) in ys.iter_mut().enumerate() {
                for (j, kj) in k.iter().enumerate().take(s) {
                    *v += h * A[s][j] * kj[i];
                }
            }
            match rhs(inst, t + C[s] * h, &ys) {
                Ok(v) => k[s] = v,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        let mut err = f64::INFINITY;
        let mut y5 = y;
        if ok {
            err = 0.0;
            for i in 0..8 {
                let mut d5 = 0.0;
                let mut d4 = 0.0;
                for s in 0..7 {
                    d5 += B5[s] * k[s][i];
                    d4 += B4[s] * k[s][i];
                }
                y5[i] = y[i] + h * d5;
                let sc = tol * 1f64.max(y[i].abs()).max(y5[i].abs());
                err = err.max((h * (d5 - d4)).abs() / sc);
            }
            if !err.is_finite() || y5.iter().any(|v| !v.is_finite()) {
                err = f64::INFINITY;
            }
        }
        if err <= 1.0 {
            if y5.iter().any(|v| v.abs() > ESCAPE) {
                return Err(DynamicsError::Singular { tau: t, reason: format!("state left |y| <= {ESCAPE:e}") });
            }
            t += h;
            y = y5;
            k[0] = k[6];
            traj.accepted += 1;
            traj.min_step = traj.min_step.min(h.abs());
            traj.max_step = traj.max_step.max(h.abs());
            traj.samples.push((t, PhaseState::from_vec(&y)));
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            traj.rejected += 1;
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.25 };
            h *= fac;
            if h.abs() < 1e-14 * t.abs().max(1.0) {
                if !ok {
                    // Re-evaluate to surface the underlying error.
                    rhs(inst, t + h, &y)?;
                }
                return Err(DynamicsError::StepUnderflow { tau: t, step: h });
            }
        }
    }
    Ok(traj)
}

/// Maximal relative drift `|Q(τ) - Q(0)| / max(1, |Q(0)|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Drift {
    pub h: f64,
    pub y: [f64; 3],
}

impl Drift {
    pub fn max(&self) -> f64 {
        self.y.iter().fold(self.h, |m, v| m.max(*v))
    }
}

pub fn conserved_drift(traj: &Trajectory, inst: &ModelInstance) -> Result<Drift, DynamicsError> {
    let s0 = &traj.samples[0].1;
    let h0 = hamiltonian_at(inst, s0)?;
    let y0 = integrals_at(inst, s0)?;
    let rel = |q: f64, q0: f64| (q - q0).abs() / q0.abs().max(1.0);
    let mut d = Drift { h: 0.0, y: [0.0; 3] };
    for (_, s) in &traj.samples {
        d.h = d.h.max(rel(hamiltonian_at(inst, s)?, h0));
        let y = integrals_at(inst, s)?;
        for a in 0..3 {
            d.y[a] = d.y[a].max(rel(y[a], y0[a]));
        }
    }
    Ok(d)
}

/// Initial state with coordinates near the origin and `|p| ≤ 1`; group IX
/// starts near `u1 = π/2`, away from the poles of its generators.
pub fn random_initial_state(tag: BianchiType, rng: &mut impl Rng) -> PhaseState {
    let mut u = [0.0; 4];
    for x in u.iter_mut() {
        *x = rng.gen_range(-0.5..0.5);
    }
    if tag == BianchiType::IX {
        u[1] = core::f64::consts::FRAC_PI_2 + rng.gen_range(-0.2..0.2);
    }
    let mut p = [0.0; 4];
    loop {
        for x in p.iter_mut() {
            *x = rng.gen_range(-1.0..1.0);
        }
        if p.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            break;
        }
    }
    PhaseState { u, p }
}

/// One row per sample: `τ, u0..u3, p0..p3, H, Y1..Y3`.
pub fn trajectory_rows(traj: &Trajectory, inst: &ModelInstance) -> Result<Vec<[f64; 13]>, DynamicsError> {
    let mut out = Vec::with_capacity(traj.samples.len());
    for (t, s) in &traj.samples {
        let h = hamiltonian_at(inst, s)?;
        let y = integrals_at(inst, s)?;
        let mut r = [0.0; 13];
        r[0] = *t;
        r[1..5].copy_from_slice(&s.u);
        r[5..9].copy_from_slice(&s.p);
        r[9] = h;
        r[10..13].copy_from_slice(&y);
        out.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{get_model, ModelParams};

    fn inst(tag: BianchiType) -> ModelInstance {
        ModelInstance::new(get_model(tag, &ModelParams::default()).unwrap(), Bindings::standard()).unwrap()
    }

    #[test]
    fn type_i_hamiltonian_signs() {
        let mut b = Bindings::standard();
        for n in ["alpha0", "beta0", "gamma0"] {
            b.funcs.insert(n.to_string(), Expr::zero());
        }
        let m = ModelInstance::new(get_model(BianchiType::I, &ModelParams::default()).unwrap(), b).unwrap();
        let s = PhaseState { u: [0.0; 4], p: [1.0, 0.0, 0.0, 0.0] };
        assert_eq!(hamiltonian_at(&m, &s).unwrap(), 1.0);
        let s = PhaseState { u: [0.0; 4], p: [0.0, 1.0, 0.0, 0.0] };
        assert_eq!(hamiltonian_at(&m, &s).unwrap(), -1.0);
    }

    #[test]
    fn type_v_potential_enters() {
        let mut b = Bindings::standard();
        b.funcs.insert("alpha0".into(), parse("cos(u0)").unwrap());
        let m = ModelInstance::new(get_model(BianchiType::V, &ModelParams::default()).unwrap(), b).unwrap();
        let s = PhaseState { u: [0.0; 4], p: [0.0; 4] };
        assert_eq!(s.kinetic(&m).unwrap()[1], 1.0);
        // g^{11} = -1 at u3 = 0 with a = -δ, plus beta0(0) = 1 in A2.
        assert!((hamiltonian_at(&m, &s).unwrap() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn free_motion_keeps_momenta() {
        let mut b = Bindings::standard();
        for n in ["alpha0", "beta0", "gamma0"] {
            b.funcs.insert(n.to_string(), Expr::zero());
        }
        let m = ModelInstance::new(get_model(BianchiType::I, &ModelParams::default()).unwrap(), b).unwrap();
        let s0 = PhaseState { u: [0.0; 4], p: [0.3, 0.2, -0.1, 0.4] };
        let tr = integrate(&m, s0, (0.0, 3.0), 1e-10).unwrap();
        let end = tr.last();
        assert_eq!(end.p, s0.p);
        assert!((end.u[1] - (-2.0 * 0.2 * 3.0)).abs() < 1e-12);
    }

    #[test]
    fn type_v_at_rest_conserves_over_ten() {
        let m = inst(BianchiType::V);
        let s0 = PhaseState { u: [0.0; 4], p: [0.0; 4] };
        let tr = integrate(&m, s0, (0.0, 10.0), 1e-10).unwrap();
        let d = conserved_drift(&tr, &m).unwrap();
        assert!(d.max() < 1e-8, "{d:?}");
        // P2 = beta0(0) = 1 drives u2 at rate 2 g^{22} P2 = -2.
        assert!((tr.last().u[2] + 20.0).abs() < 1e-8);
    }

    #[test]
    fn type_v_generic_state_conserves() {
        let m = inst(BianchiType::V);
        let s0 = PhaseState { u: [0.1, 0.2, -0.3, 0.1], p: [0.5, 0.1, -0.2, 0.3] };
        let tr = integrate(&m, s0, (0.0, 2.0), 1e-10).unwrap();
        let d = conserved_drift(&tr, &m).unwrap();
        assert!(d.max() < 1e-8, "{d:?}");
    }

    #[test]
    fn uniform_electric_field_escapes() {
        // F03 = 1 accelerates u0 like exp(2 tau); the chart is left well before tau = 10.
        let m = inst(BianchiType::V);
        let s0 = PhaseState { u: [0.1, 0.2, -0.3, 0.1], p: [0.5, 0.1, -0.2, 0.3] };
        assert!(integrate(&m, s0, (0.0, 10.0), 1e-10).is_err());
    }

    #[test]
    fn type_ix_from_equator_completes() {
        let m = inst(BianchiType::IX);
        let s0 = PhaseState { u: [0.0, core::f64::consts::FRAC_PI_2, 0.0, 0.0], p: [0.0; 4] };
        let tr = integrate(&m, s0, (0.0, 5.0), 1e-10).unwrap();
        assert!(conserved_drift(&tr, &m).unwrap().max() < 1e-8);
    }

    #[test]
    fn backward_integration_retraces() {
        let m = inst(BianchiType::V);
        let s0 = PhaseState { u: [0.1, 0.2, -0.3, 0.1], p: [0.5, 0.1, -0.2, 0.3] };
        let fwd = integrate(&m, s0, (0.0, 2.0), 1e-12).unwrap();
        let back = integrate(&m, *fwd.last(), (2.0, 0.0), 1e-12).unwrap();
        assert!(back.samples.windows(2).all(|w| w[1].0 < w[0].0));
        let end = back.last();
        for i in 0..4 {
            assert!((end.u[i] - s0.u[i]).abs() < 1e-6 && (end.p[i] - s0.p[i]).abs() < 1e-6, "{end:?}");
        }
    }

    #[test]
    fn non_admissible_perturbation_breaks_y3() {
        let m = get_model(BianchiType::V, &ModelParams::default()).unwrap();
        let mut a = m.potential.clone();
        a.a[2] = a.a[2].add(&parse("u1").unwrap());
        let pert = ModelInstance::with_potential(m, a, Bindings::standard()).unwrap();
        let s0 = PhaseState { u: [0.1, 0.2, -0.3, 0.1], p: [0.5, 0.1, -0.2, 0.3] };
        let tr = integrate(&pert, s0, (0.0, 2.0), 1e-10).unwrap();
        let d = conserved_drift(&tr, &pert).unwrap();
        assert!(d.y[2] > 1e-3, "{d:?}");
        assert!(d.h < 1e-8, "{d:?}");
    }
}
