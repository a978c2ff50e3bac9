//! Vector fields, Lie algebra data, invariant coframes and metrics.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::Matrix4;

use crate::expr::{parse, Assignment, Compiled, Expr, ExprError};
use crate::linalg::{self, LinalgError, Mat};

#[derive(Clone, Debug, PartialEq)]
pub enum GeometryError {
    /// A bracket has a component outside the span of the frame.
    NonClosure {
        a: usize,
        b: usize,
        residual: String,
    },
    /// Bracket coefficients depend on the coordinates.
    NonConstant {
        a: usize,
        b: usize,
        coeff: String,
    },
    /// Frame components are linearly dependent.
    Degenerate,
    /// No path-ordered exponential produced invariant forms.
    CoframeFailed(String),
    SingularMetric,
    Expr(ExprError),
}

impl From<ExprError> for GeometryError {
    fn from(e: ExprError) -> Self {
        GeometryError::Expr(e)
    }
}

impl From<LinalgError> for GeometryError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::Singular => GeometryError::Degenerate,
            LinalgError::Expr(e) => GeometryError::Expr(e),
            e => GeometryError::CoframeFailed(format!("{e}")),
        }
    }
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::NonClosure { a, b, residual } => {
                write!(f, "[xi{a}, xi{b}] leaves the span of the frame (residual {residual})")
            }
            GeometryError::NonConstant { a, b, coeff } => {
                write!(f, "[xi{a}, xi{b}] has non-constant coefficient {coeff}")
            }
            GeometryError::Degenerate => write!(f, "frame is degenerate"),
            GeometryError::CoframeFailed(s) => write!(f, "no invariant coframe: {s}"),
            GeometryError::SingularMetric => write!(f, "metric is singular at the point"),
            GeometryError::Expr(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for GeometryError {}

/// Contravariant vector field `ξ^i ∂_i`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct VectorField {
    pub c: [Expr; 4],
}

impl VectorField {
    pub fn new(c: [Expr; 4]) -> Self {
        VectorField { c }
    }

    /// Field with `ξ^0 = 0` and spatial components in the grammar.
    pub fn parse(spatial: [&str; 3]) -> Result<Self, ExprError> {
        Ok(VectorField { c: [Expr::zero(), parse(spatial[0])?, parse(spatial[1])?, parse(spatial[2])?] })
    }

    pub fn coord(i: usize) -> Self {
        let mut v = VectorField::default();
        v.c[i] = Expr::one();
        v
    }

    /// Directional derivative `ξ(f)`.
    pub fn apply(&self, f: &Expr) -> Expr {
        let mut s = Expr::zero();
        for (j, x) in self.c.iter().enumerate() {
            if !x.is_symbolic_zero() {
                s = s + x * &f.diff(j);
            }
        }
        s
    }

    pub fn add(&self, o: &VectorField) -> VectorField {
        VectorField { c: core::array::from_fn(|i| &self.c[i] + &o.c[i]) }
    }

    pub fn sub(&self, o: &VectorField) -> VectorField {
        VectorField { c: core::array::from_fn(|i| &self.c[i] - &o.c[i]) }
    }

    pub fn scale(&self, s: &Expr) -> VectorField {
        VectorField { c: core::array::from_fn(|i| &self.c[i] * s) }
    }

    pub fn is_zero(&self) -> Result<bool, ExprError> {
        for x in &self.c {
            if !x.is_zero()? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn substitute_func(&self, name: &str, v: &Expr) -> Result<VectorField, ExprError> {
        let mut out = self.clone();
        for x in out.c.iter_mut() {
            *x = x.substitute_func(name, v)?;
        }
        Ok(out)
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}, {}]", self.c[0], self.c[1], self.c[2], self.c[3])
    }
}

/// `[X, Y]^i = X^j ∂_j Y^i - Y^j ∂_j X^i`.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> VectorField {
    VectorField { c: core::array::from_fn(|i| x.apply(&y.c[i]) - y.apply(&x.c[i])) }
}

/// `C^γ_{αβ}` stored as `c[α][β][γ]` with zero-based group indices.
///
/// Entries are coordinate-free expressions: usually rationals, but the
/// group VII constant `2·cos(alpha)` is symbolic.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct StructureConstants {
    pub c: [[[Expr; 3]; 3]; 3],
}

impl StructureConstants {
    pub fn zero() -> Self {
        StructureConstants::default()
    }

    /// From one-based `(α, β, γ, value)` entries for `α < β`; the
    /// antisymmetric partner is filled in.
    pub fn from_entries(entries: &[(usize, usize, usize, Expr)]) -> Self {
        let mut s = StructureConstants::zero();
        for (a, b, g, v) in entries {
            s.c[a - 1][b - 1][g - 1] = v.clone();
            s.c[b - 1][a - 1][g - 1] = v.neg();
        }
        s
    }

    /// `C^γ_{αβ}` with one-based indices.
    pub fn get(&self, a: usize, b: usize, g: usize) -> &Expr {
        &self.c[a - 1][b - 1][g - 1]
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..3).all(|a| (0..3).all(|b| (0..3).all(|g| (&self.c[a][b][g] + &self.c[b][a][g]).is_symbolic_zero())))
    }

    /// Nonzero entries `(α, β, γ, value)` with `α < β`, one-based.
    pub fn nonzero(&self) -> Vec<(usize, usize, usize, Expr)> {
        let mut out = Vec::new();
        for a in 0..3 {
            for b in (a + 1)..3 {
                for g in 0..3 {
                    if !self.c[a][b][g].is_symbolic_zero() {
                        out.push((a + 1, b + 1, g + 1, self.c[a][b][g].clone()));
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for StructureConstants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nz = self.nonzero();
        if nz.is_empty() {
            return write!(f, "all zero");
        }
        for (i, (a, b, g, v)) in nz.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "C^{g}_{a}{b} = {v}")?;
        }
        Ok(())
    }
}

/// Spatial component matrix `X[i][α] = ξ_α^{i+1}`.
fn frame_matrix(fields: &[VectorField; 3]) -> Mat {
    (0..3).map(|i| (0..3).map(|a| fields[a].c[i + 1].clone()).collect()).collect()
}

/// Solves `[ξ_α, ξ_β] = C^γ_{αβ} ξ_γ` for constant `C`.
pub fn structure_constants_from_frame(fields: &[VectorField; 3]) -> Result<StructureConstants, GeometryError> {
    let x = frame_matrix(fields);
    if linalg::det(&x).is_zero()? {
        if frame_rank(fields)? < 2 {
            return Err(GeometryError::Degenerate);
        }
        return constants_by_fit(fields);
    }
    let mut out = StructureConstants::zero();
    for a in 0..3 {
        for b in (a + 1)..3 {
            let br = lie_bracket(&fields[a], &fields[b]);
            let rhs: Vec<Expr> = (1..4).map(|i| br.c[i].clone()).collect();
            let sol = linalg::cramer(&x, &rhs)?;
            for (g, cg) in sol.iter().enumerate() {
                for i in 0..4 {
                    if !cg.diff(i).is_zero()? {
                        return Err(GeometryError::NonConstant { a: a + 1, b: b + 1, coeff: format!("{cg}") });
                    }
                }
                if !cg.is_polynomial() {
                    return Err(GeometryError::NonConstant { a: a + 1, b: b + 1, coeff: format!("{cg}") });
                }
                out.c[a][b][g] = cg.clone();
                out.c[b][a][g] = cg.neg();
            }
            let mut span = VectorField::default();
            for (g, cg) in sol.iter().enumerate() {
                span = span.add(&fields[g].scale(cg));
            }
            let r = br.sub(&span);
            if !r.is_zero()? {
                return Err(GeometryError::NonClosure { a: a + 1, b: b + 1, residual: format!("{r}") });
            }
        }
    }
    Ok(out)
}

/// Generic pointwise rank of the spatial components of the frame.
pub fn frame_rank(fields: &[VectorField; 3]) -> Result<usize, ExprError> {
    let x = frame_matrix(fields);
    if !linalg::det(&x).is_zero()? {
        return Ok(3);
    }
    for (r0, r1) in [(0, 1), (0, 2), (1, 2)] {
        for (c0, c1) in [(0, 1), (0, 2), (1, 2)] {
            let m = &(&x[r0][c0] * &x[r1][c1]) - &(&x[r0][c1] * &x[r1][c0]);
            if !m.is_zero()? {
                return Ok(2);
            }
        }
    }
    for row in &x {
        for e in row {
            if !e.is_zero()? {
                return Ok(1);
            }
        }
    }
    Ok(0)
}

/// Nearest fraction with denominator at most 1000, if within 1e-9.
fn nearby_rational(v: f64) -> Option<crate::expr::Rational> {
    for d in 1..=1000i128 {
        let n = libm::round(v * d as f64);
        if (n / d as f64 - v).abs() < 1e-9 {
            return Some(crate::expr::Rational::new(n as i128, d));
        }
    }
    None
}

/// Constant bracket coefficients for a pointwise-degenerate frame: a
/// least-squares fit over sample points, rounded to nearby rationals and
/// confirmed symbolically.
fn constants_by_fit(fields: &[VectorField; 3]) -> Result<StructureConstants, GeometryError> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let mut funcs = alloc::collections::BTreeSet::new();
    let mut params = alloc::collections::BTreeSet::new();
    for x in fields {
        for e in &x.c {
            funcs.extend(e.funcs());
            params.extend(e.params());
        }
    }
    let points: Vec<Assignment> = (0..8).map(|_| crate::expr::random_assignment(&mut rng, &funcs, &params)).collect();
    let mut out = StructureConstants::zero();
    for a in 0..3 {
        for b in (a + 1)..3 {
            let br = lie_bracket(&fields[a], &fields[b]);
            let mut ata = nalgebra::Matrix3::<f64>::zeros();
            let mut atb = nalgebra::Vector3::<f64>::zeros();
            for p in &points {
                for i in 0..4 {
                    let row = nalgebra::Vector3::new(fields[0].c[i].evaluate(p)?, fields[1].c[i].evaluate(p)?, fields[2].c[i].evaluate(p)?);
                    let rhs = br.c[i].evaluate(p)?;
                    ata += row * row.transpose();
                    atb += row * rhs;
                }
            }
            let sol = ata.try_inverse().ok_or(GeometryError::Degenerate)? * atb;
            let mut span = VectorField::default();
            for g in 0..3 {
                let c = nearby_rational(sol[g]).ok_or_else(|| GeometryError::NonConstant {
                    a: a + 1,
                    b: b + 1,
                    coeff: format!("{:.6}", sol[g]),
                })?;
                let cg = Expr::rational(c);
                span = span.add(&fields[g].scale(&cg));
                out.c[a][b][g] = cg.clone();
                out.c[b][a][g] = cg.neg();
            }
            let r = br.sub(&span);
            if !r.is_zero()? {
                return Err(GeometryError::NonClosure { a: a + 1, b: b + 1, residual: format!("{r}") });
            }
        }
    }
    Ok(out)
}

/// `J[α][β][γ][σ] = C^τ_{αβ}C^σ_{γτ} + C^τ_{βγ}C^σ_{ατ} + C^τ_{γα}C^σ_{βτ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiResidual {
    pub r: [[[[Expr; 3]; 3]; 3]; 3],
}

impl JacobiResidual {
    pub fn is_zero(&self) -> bool {
        self.r.iter().flatten().flatten().flatten().all(Expr::is_symbolic_zero)
    }

    /// Nonzero entries, one-based `(α, β, γ, σ, value)`.
    pub fn nonzero(&self) -> Vec<(usize, usize, usize, usize, Expr)> {
        let mut out = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                for g in 0..3 {
                    for s in 0..3 {
                        if !self.r[a][b][g][s].is_symbolic_zero() {
                            out.push((a + 1, b + 1, g + 1, s + 1, self.r[a][b][g][s].clone()));
                        }
                    }
                }
            }
        }
        out
    }
}

pub fn jacobi_residual(c: &StructureConstants) -> JacobiResidual {
    let k = &c.c;
    let r = core::array::from_fn(|a| {
        core::array::from_fn(|b| {
            core::array::from_fn(|g| {
                core::array::from_fn(|s| {
                    let mut acc = Expr::zero();
                    for t in 0..3 {
                        acc = acc + &k[a][b][t] * &k[g][t][s] + &k[b][g][t] * &k[a][t][s] + &k[g][a][t] * &k[b][t][s];
                    }
                    acc
                })
            })
        })
    });
    JacobiResidual { r }
}

/// Symmetric metric `g_ij` with signature constant `e` in `g_00`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Metric {
    pub g: [[Expr; 4]; 4],
    pub e: i8,
}

impl Metric {
    pub fn is_symmetric(&self) -> bool {
        (0..4).all(|i| (0..4).all(|j| self.g[i][j] == self.g[j][i]))
    }

    pub fn substitute_func(&self, name: &str, v: &Expr) -> Result<Metric, ExprError> {
        let mut out = self.clone();
        for row in out.g.iter_mut() {
            for x in row.iter_mut() {
                *x = x.substitute_func(name, v)?;
            }
        }
        Ok(out)
    }

    pub fn det(&self) -> Expr {
        linalg::det(&self.g.iter().map(|r| r.to_vec()).collect())
    }
}

/// `(L_X g)_ij = X^k ∂_k g_ij + g_kj ∂_i X^k + g_ik ∂_j X^k`.
pub fn killing_residual(g: &Metric, x: &VectorField) -> [[Expr; 4]; 4] {
    let dx: [[Expr; 4]; 4] = core::array::from_fn(|i| core::array::from_fn(|k| x.c[k].diff(i)));
    core::array::from_fn(|i| {
        core::array::from_fn(|j| {
            let mut s = x.apply(&g.g[i][j]);
            for k in 0..4 {
                if !dx[i][k].is_symbolic_zero() {
                    s = s + &g.g[k][j] * &dx[i][k];
                }
                if !dx[j][k].is_symbolic_zero() {
                    s = s + &g.g[i][k] * &dx[j][k];
                }
            }
            s
        })
    })
}

/// Invariant one-forms: `sigma[α][i]` is `σ^{α+1}_{i+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coframe {
    pub sigma: [[Expr; 3]; 3],
}

impl Coframe {
    /// `L_X σ^α` as a covector with components `i = 0..3`.
    pub fn lie_derivative(&self, alpha: usize, x: &VectorField) -> [Expr; 4] {
        let s: [Expr; 4] = core::array::from_fn(|i| if i == 0 { Expr::zero() } else { self.sigma[alpha][i - 1].clone() });
        core::array::from_fn(|i| {
            let mut acc = x.apply(&s[i]);
            for j in 0..4 {
                if !s[j].is_symbolic_zero() {
                    acc = acc + &s[j] * &x.c[j].diff(i);
                }
            }
            acc
        })
    }

    pub fn is_invariant(&self, fields: &[VectorField; 3]) -> Result<bool, ExprError> {
        for f in fields {
            for a in 0..3 {
                for c in self.lie_derivative(a, f) {
                    if !c.is_zero()? {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

const LEG_ORDERS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// One leg of the path-ordered solution: `exp(u_x · m)` where `m` must not
/// depend on `u_x`.
fn leg(m: &Mat, x: usize) -> Result<Mat, GeometryError> {
    if m.iter().flatten().any(|e| e.depends_on(x)) {
        return Err(GeometryError::CoframeFailed(format!("leg matrix depends on u{x}")));
    }
    let l = linalg::eigenvalues(m, &linalg::default_candidates(m))?;
    Ok(linalg::expm(m, x, &l)?)
}

fn restrict(m: &Mat, coords: &[usize]) -> Result<Mat, ExprError> {
    linalg::map(m, |e| {
        let mut e = e.clone();
        for &c in coords {
            e = e.restrict_coord_zero(c)?;
        }
        Ok(e)
    })
}

/// Left-invariant-style coframe `σ = F·ω` with `ω` dual to the frame and
/// `F` solving `∂_x F = F·M_x`, `F(0) = I`, integrated along coordinate
/// legs from the origin.
pub fn invariant_coframe(fields: &[VectorField; 3]) -> Result<Coframe, GeometryError> {
    let c = structure_constants_from_frame(fields)?;
    let w = linalg::inverse(&frame_matrix(fields))?;
    // M_x[γ][δ] = Σ_β C^γ_{βδ} W[β][x]
    let mx: Vec<Mat> = (0..3)
        .map(|x| {
            (0..3)
                .map(|g| {
                    (0..3)
                        .map(|d| {
                            let mut s = Expr::zero();
                            for b in 0..3 {
                                if !c.c[b][d][g].is_symbolic_zero() {
                                    s = s + &c.c[b][d][g] * &w[b][x];
                                }
                            }
                            s
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut last = String::from("no leg order tried");
    for [a, b, cc] in LEG_ORDERS {
        let attempt = || -> Result<Coframe, GeometryError> {
            let ea = leg(&restrict(&mx[a], &[b + 1, cc + 1])?, a + 1)?;
            let eb = leg(&restrict(&mx[b], &[cc + 1])?, b + 1)?;
            let ec = leg(&mx[cc], cc + 1)?;
            let f = linalg::mul(&linalg::mul(&ea, &eb), &ec);
            let s = linalg::mul(&f, &w);
            let cf = Coframe { sigma: core::array::from_fn(|i| core::array::from_fn(|j| s[i][j].clone())) };
            if cf.is_invariant(fields)? {
                Ok(cf)
            } else {
                Err(GeometryError::CoframeFailed(String::from("forms not invariant")))
            }
        };
        match attempt() {
            Ok(cf) => return Ok(cf),
            Err(e) => last = format!("{e}"),
        }
    }
    Err(GeometryError::CoframeFailed(last))
}

/// `a_{αβ}(u0)` as abstract functions `a11, a12, ...` (symmetric).
pub fn abstract_spatial_metric() -> [[Expr; 3]; 3] {
    core::array::from_fn(|i| {
        core::array::from_fn(|j| {
            let (p, q) = if i <= j { (i, j) } else { (j, i) };
            Expr::func(&format!("a{}{}", p + 1, q + 1), 0)
        })
    })
}

/// `g_αβ = a_στ σ^σ_α σ^τ_β`, `g_00 = e`, `g_0α = 0`.
pub fn metric_from_coframe(cf: &Coframe, a: &[[Expr; 3]; 3], e: i8) -> Metric {
    let mut g: [[Expr; 4]; 4] = Default::default();
    g[0][0] = Expr::int(e as i128);
    for al in 0..3 {
        for be in al..3 {
            let mut s = Expr::zero();
            for si in 0..3 {
                for ta in 0..3 {
                    if a[si][ta].is_symbolic_zero() {
                        continue;
                    }
                    let t = &cf.sigma[si][al] * &cf.sigma[ta][be];
                    if !t.is_symbolic_zero() {
                        s = s + &a[si][ta] * &t;
                    }
                }
            }
            g[al + 1][be + 1] = s.clone();
            g[be + 1][al + 1] = s;
        }
    }
    Metric { g, e }
}

/// Numeric metric data at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSample {
    pub point: Assignment,
    pub g: Matrix4<f64>,
    pub ginv: Matrix4<f64>,
    /// `∂_i χ = ½ ∂_i ln|det g|`.
    pub chi_grad: [f64; 4],
    /// `∂_k g` for `k = 0..3`.
    pub dg: [Matrix4<f64>; 4],
}

/// Metric with its components, derivatives and determinant compiled for
/// repeated sampling under fixed parameter values.
#[derive(Clone, Debug)]
pub struct MetricField {
    g: Vec<Compiled>,
    dg: Vec<Compiled>,
    det: Compiled,
    ddet: Vec<Compiled>,
}

impl MetricField {
    pub fn new(m: &Metric, params: &Assignment) -> Result<Self, ExprError> {
        let mut g = Vec::with_capacity(16);
        let mut dg = Vec::with_capacity(64);
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    if k == 0 {
                        g.push(m.g[i][j].compile(params)?);
                    }
                    dg.push(m.g[i][j].diff(k).compile(params)?);
                }
            }
        }
        let d = m.det();
        let ddet = (0..4).map(|k| d.diff(k).compile(params)).collect::<Result<Vec<_>, _>>()?;
        Ok(MetricField { g, dg, det: d.compile(params)?, ddet })
    }

    pub fn sample(&self, point: &Assignment) -> Result<MetricSample, GeometryError> {
        let ev = |c: &Compiled| -> Result<f64, ExprError> { Ok(c.eval_at(point)?.re) };
        let mut g = Matrix4::zeros();
        let mut dg = [Matrix4::zeros(); 4];
        for i in 0..4 {
            for j in 0..4 {
                g[(i, j)] = ev(&self.g[4 * i + j])?;
                for (k, d) in dg.iter_mut().enumerate() {
                    d[(i, j)] = ev(&self.dg[16 * k + 4 * i + j])?;
                }
            }
        }
        let ginv = g.try_inverse().ok_or(GeometryError::SingularMetric)?;
        let det = ev(&self.det)?;
        if det == 0.0 {
            return Err(GeometryError::SingularMetric);
        }
        let mut chi_grad = [0.0; 4];
        for (k, c) in chi_grad.iter_mut().enumerate() {
            *c = 0.5 * ev(&self.ddet[k])? / det;
        }
        Ok(MetricSample { point: point.clone(), g, ginv, chi_grad, dg })
    }
}

/// One-off sample; use [`MetricField`] in loops.
pub fn metric_sample(g: &Metric, point: &Assignment) -> Result<MetricSample, GeometryError> {
    MetricField::new(g, point)?.sample(point)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vf(s: [&str; 3]) -> VectorField {
        VectorField::parse(s).unwrap()
    }

    #[test]
    fn rank_two_frame_fits_constants() {
        let f = [VectorField::coord(1), VectorField::coord(2), VectorField::parse(["u1", "0", "0"]).unwrap()];
        assert_eq!(frame_rank(&f).unwrap(), 2);
        let c = structure_constants_from_frame(&f).unwrap();
        assert_eq!(c.c[0][2][0], Expr::int(1));
        assert_eq!(c.c[2][0][0], Expr::int(-1));
        assert!(c.c[0][1].iter().all(|e| e.is_symbolic_zero()));
    }

    #[test]
    fn rank_one_frame_is_rejected() {
        let f = [VectorField::coord(1), VectorField::parse(["u2", "0", "0"]).unwrap(), VectorField::parse(["u2^2", "0", "0"]).unwrap()];
        assert_eq!(frame_rank(&f).unwrap(), 1);
        assert_eq!(structure_constants_from_frame(&f), Err(GeometryError::Degenerate));
    }

    #[test]
    fn commuting_translations() {
        assert!(lie_bracket(&VectorField::coord(1), &VectorField::coord(2)).is_zero().unwrap());
    }

    #[test]
    fn group_two_bracket() {
        let x2 = vf(["0", "1", "0"]);
        let x3 = vf(["u2", "0", "-1"]);
        assert_eq!(lie_bracket(&x2, &x3), VectorField::coord(1));
    }

    #[test]
    fn degenerate_frame_is_rejected() {
        let f = [vf(["1", "0", "0"]), vf(["u2", "0", "0"]), vf(["u2^2", "0", "0"])];
        assert_eq!(structure_constants_from_frame(&f), Err(GeometryError::Degenerate));
    }

    #[test]
    fn translation_frame_coframe() {
        let f = [VectorField::coord(1), VectorField::coord(2), VectorField::coord(3)];
        let cf = invariant_coframe(&f).unwrap();
        let id: [[Expr; 3]; 3] = core::array::from_fn(|i| core::array::from_fn(|j| Expr::int((i == j) as i128)));
        assert_eq!(cf.sigma, id);
    }

    #[test]
    fn minkowski_like_sample() {
        let a: [[Expr; 3]; 3] = core::array::from_fn(|i| core::array::from_fn(|j| Expr::int(-((i == j) as i128))));
        let cf = Coframe { sigma: core::array::from_fn(|i| core::array::from_fn(|j| Expr::int((i == j) as i128))) };
        let m = metric_from_coframe(&cf, &a, 1);
        let s = metric_sample(&m, &Assignment::at([0.3, 0.1, -0.2, 0.5])).unwrap();
        assert_eq!(s.ginv, Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, -1.0, -1.0, -1.0)));
        assert_eq!(s.chi_grad, [0.0; 4]);
    }
}
