//! Potentials, field tensors and the residuals of the admissibility,
//! compatibility and wave-operator conditions.

use alloc::vec::Vec;
use core::fmt;

use nalgebra::{Matrix4, Vector4};

use crate::expr::{parse, Assignment, Compiled, Expr, ExprError};
use crate::geometry::{GeometryError, Metric, MetricField, StructureConstants, VectorField};

/// Covector `A_i`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Potential {
    pub a: [Expr; 4],
}

impl Potential {
    pub fn new(a: [Expr; 4]) -> Self {
        Potential { a }
    }

    pub fn parse(a: [&str; 4]) -> Result<Self, ExprError> {
        Ok(Potential { a: [parse(a[0])?, parse(a[1])?, parse(a[2])?, parse(a[3])?] })
    }

    pub fn add(&self, o: &Potential) -> Potential {
        Potential { a: core::array::from_fn(|i| &self.a[i] + &o.a[i]) }
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Result<Expr, ExprError>) -> Result<Potential, ExprError> {
        Ok(Potential { a: [f(&self.a[0])?, f(&self.a[1])?, f(&self.a[2])?, f(&self.a[3])?] })
    }

    pub fn substitute_func(&self, name: &str, v: &Expr) -> Result<Potential, ExprError> {
        self.map(|e| e.substitute_func(name, v))
    }

    pub fn is_zero(&self) -> Result<bool, ExprError> {
        for x in &self.a {
            if !x.is_zero()? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}, {}]", self.a[0], self.a[1], self.a[2], self.a[3])
    }
}

/// Antisymmetric `F_ij`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FieldTensor {
    pub f: [[Expr; 4]; 4],
}

impl FieldTensor {
    /// Builds the tensor from its six upper entries `F01, F02, F03, F12, F13, F23`.
    pub fn from_upper(u: [Expr; 6]) -> Self {
        let mut f: [[Expr; 4]; 4] = Default::default();
        for (k, (i, j)) in UPPER.iter().enumerate() {
            f[*j][*i] = -&u[k];
            f[*i][*j] = u[k].clone();
        }
        FieldTensor { f }
    }

    pub fn parse_upper(u: [&str; 6]) -> Result<Self, ExprError> {
        let mut e: [Expr; 6] = Default::default();
        for (x, s) in e.iter_mut().zip(u) {
            *x = parse(s)?;
        }
        Ok(Self::from_upper(e))
    }

    pub fn upper(&self) -> [Expr; 6] {
        core::array::from_fn(|k| self.f[UPPER[k].0][UPPER[k].1].clone())
    }

    pub fn is_antisymmetric(&self) -> Result<bool, ExprError> {
        for i in 0..4 {
            for j in i..4 {
                if !(&self.f[i][j] + &self.f[j][i]).is_zero()? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn sub(&self, o: &FieldTensor) -> FieldTensor {
        FieldTensor { f: core::array::from_fn(|i| core::array::from_fn(|j| &self.f[i][j] - &o.f[i][j])) }
    }

    pub fn is_zero(&self) -> Result<bool, ExprError> {
        for row in &self.f {
            for x in row {
                if !x.is_zero()? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Result<Expr, ExprError>) -> Result<FieldTensor, ExprError> {
        let mut out = self.clone();
        for row in out.f.iter_mut() {
            for x in row.iter_mut() {
                *x = f(x)?;
            }
        }
        Ok(out)
    }
}

/// Index pairs of the six independent components, in storage order.
pub const UPPER: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

impl fmt::Display for FieldTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (i, j)) in UPPER.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "F{i}{j} = {}", self.f[*i][*j])?;
        }
        Ok(())
    }
}

/// A generator with its `γ` correction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetryIntegral {
    pub xi: VectorField,
    pub gamma: Expr,
}

/// `F_ij = ∂_i A_j - ∂_j A_i`.
pub fn field_from_potential(a: &Potential) -> FieldTensor {
    let d: [[Expr; 4]; 4] = core::array::from_fn(|i| core::array::from_fn(|j| a.a[j].diff(i)));
    FieldTensor { f: core::array::from_fn(|i| core::array::from_fn(|j| &d[i][j] - &d[j][i])) }
}

pub type Rank3 = [[[Expr; 4]; 4]; 4];

/// `B_ijk = ∂_i F_jk + ∂_j F_ki + ∂_k F_ij`.
pub fn bianchi_residual(f: &FieldTensor) -> Rank3 {
    core::array::from_fn(|i| core::array::from_fn(|j| core::array::from_fn(|k| f.f[j][k].diff(i) + f.f[k][i].diff(j) + f.f[i][j].diff(k))))
}

pub fn rank3_is_zero(r: &Rank3) -> Result<bool, ExprError> {
    for i in 0..4 {
        for j in (i + 1)..4 {
            for k in (j + 1)..4 {
                if !r[i][j][k].is_zero()? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn contract(x: &VectorField, a: &Potential) -> Expr {
    let mut s = Expr::zero();
    for j in 0..4 {
        if !x.c[j].is_symbolic_zero() && !a.a[j].is_symbolic_zero() {
            s = s + &x.c[j] * &a.a[j];
        }
    }
    s
}

/// `R_i = ∂_i(ξ^j A_j) - ξ^j F_ij`.
pub fn admissibility_residual(a: &Potential, f: &FieldTensor, x: &VectorField) -> [Expr; 4] {
    let xa = contract(x, a);
    core::array::from_fn(|i| {
        let mut r = xa.diff(i);
        for j in 0..4 {
            if !x.c[j].is_symbolic_zero() {
                r = r - &x.c[j] * &f.f[i][j];
            }
        }
        r
    })
}

/// `(L_ξ F)_ij = ξ^k ∂_k F_ij + F_kj ∂_i ξ^k + F_ik ∂_j ξ^k`.
pub fn compatibility_residual(f: &FieldTensor, x: &VectorField) -> [[Expr; 4]; 4] {
    let dx: [[Expr; 4]; 4] = core::array::from_fn(|i| core::array::from_fn(|k| x.c[k].diff(i)));
    core::array::from_fn(|i| {
        core::array::from_fn(|j| {
            let mut r = x.apply(&f.f[i][j]);
            for k in 0..4 {
                if !dx[i][k].is_symbolic_zero() {
                    r = r + &f.f[k][j] * &dx[i][k];
                }
                if !dx[j][k].is_symbolic_zero() {
                    r = r + &f.f[i][k] * &dx[j][k];
                }
            }
            r
        })
    })
}

/// `γ = -ξ^β A_β`.
pub fn gamma_of(x: &VectorField, a: &Potential) -> Expr {
    -contract(x, a)
}

/// `ξ_α(ξ_β·A) - C^γ_{αβ} ξ_γ·A`, zero-based `[α][β]`.
pub fn algebraic_constraint_residual(a: &Potential, fields: &[VectorField; 3], c: &StructureConstants) -> [[Expr; 3]; 3] {
    let xa: [Expr; 3] = core::array::from_fn(|b| contract(&fields[b], a));
    core::array::from_fn(|al| {
        core::array::from_fn(|be| {
            let mut r = fields[al].apply(&xa[be]);
            for g in 0..3 {
                if !c.c[al][be][g].is_symbolic_zero() {
                    r = r - &c.c[al][be][g] * &xa[g];
                }
            }
            r
        })
    })
}

/// Step of the central differences in [`kgf_extra_residual_at`].
pub const KGF_STEP: f64 = 1e-5;

/// Compiled data for repeated evaluation of the wave-operator conditions
/// `ξ^k ∂_k(A_l A^l)` and `ξ^k ∂_k(∂_l A^l + A^l χ_{,l})`.
#[derive(Clone, Debug)]
pub struct KgfProbe {
    metric: MetricField,
    a: Vec<Compiled>,
    da: Vec<Compiled>,
    x: Vec<Compiled>,
    /// `∂_k ∂_l g_{ij}` at `64k + 16l + 4i + j`, `None` when identically zero.
    d2g: Vec<Option<Compiled>>,
    /// `∂_k ∂_l A_m` at `16m + 4k + l`.
    d2a: Vec<Option<Compiled>>,
}

fn compile_nonzero(e: &Expr, params: &Assignment) -> Result<Option<Compiled>, ExprError> {
    if e.is_symbolic_zero() {
        Ok(None)
    } else {
        e.compile(params).map(Some)
    }
}

fn eval_opt(c: &Option<Compiled>, p: &Assignment) -> Result<f64, ExprError> {
    match c {
        None => Ok(0.0),
        Some(c) => Ok(c.eval_at(p)?.re),
    }
}

impl KgfProbe {
    /// `params` supplies parameter values; function values come per point.
    pub fn new(g: &Metric, a: &Potential, x: &VectorField, params: &Assignment) -> Result<Self, GeometryError> {
        let mut ca = Vec::with_capacity(4);
        let mut cda = Vec::with_capacity(16);
        for m in 0..4 {
            ca.push(a.a[m].compile(params)?);
            for l in 0..4 {
                cda.push(a.a[m].diff(l).compile(params)?);
            }
        }
        let cx = x.c.iter().map(|e| e.compile(params)).collect::<Result<Vec<_>, _>>()?;
        let mut d2g = Vec::with_capacity(256);
        for k in 0..4 {
            for l in 0..4 {
                for i in 0..4 {
                    for j in 0..4 {
                        d2g.push(compile_nonzero(&g.g[i][j].diff(k).diff(l), params)?);
                    }
                }
            }
        }
        let mut d2a = Vec::with_capacity(64);
        for m in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    d2a.push(compile_nonzero(&a.a[m].diff(k).diff(l), params)?);
                }
            }
        }
        Ok(KgfProbe { metric: MetricField::new(g, params)?, a: ca, da: cda, x: cx, d2g, d2a })
    }

    /// `(A_l A^l, ∂_l A^l + A^l χ_{,l})` at a point.
    fn scalars(&self, p: &Assignment) -> Result<(f64, f64), GeometryError> {
        let s = self.metric.sample(p)?;
        let mut a = Vector4::zeros();
        for m in 0..4 {
            a[m] = self.a[m].eval_at(p)?.re;
        }
        let mut da = Matrix4::zeros();
        for m in 0..4 {
            for l in 0..4 {
                da[(l, m)] = self.da[4 * m + l].eval_at(p)?.re;
            }
        }
        let up = s.ginv * a;
        let norm = a.dot(&up);
        let mut div = 0.0;
        for l in 0..4 {
            // ∂_l g^{-1} = -g^{-1} (∂_l g) g^{-1}
            let dginv = -(s.ginv * s.dg[l] * s.ginv);
            let dup = dginv * a + s.ginv * da.row(l).transpose();
            div += dup[l] + up[l] * s.chi_grad[l];
        }
        Ok((norm, div))
    }

    /// Same residuals with the directional derivative taken analytically
    /// from compiled second derivatives of `g` and `A`; free of the
    /// stencil's roundoff.
    pub fn exact_at(&self, p: &Assignment) -> Result<(f64, f64), GeometryError> {
        let s = self.metric.sample(p)?;
        let gi = s.ginv;
        let mut a = Vector4::zeros();
        let mut da = [Vector4::zeros(); 4];
        let mut d2a = [[Vector4::zeros(); 4]; 4];
        for m in 0..4 {
            a[m] = self.a[m].eval_at(p)?.re;
            for k in 0..4 {
                da[k][m] = self.da[4 * m + k].eval_at(p)?.re;
                for l in 0..4 {
                    d2a[k][l][m] = eval_opt(&self.d2a[16 * m + 4 * k + l], p)?;
                }
            }
        }
        let mut d2g = [[Matrix4::zeros(); 4]; 4];
        for (k, dk) in d2g.iter_mut().enumerate() {
            for (l, dkl) in dk.iter_mut().enumerate() {
                for i in 0..4 {
                    for j in 0..4 {
                        dkl[(i, j)] = eval_opt(&self.d2g[64 * k + 16 * l + 4 * i + j], p)?;
                    }
                }
            }
        }
        let dg = &s.dg;
        let dgi: [Matrix4<f64>; 4] = core::array::from_fn(|k| -(gi * dg[k] * gi));
        let up = gi * a;
        let dup: [Vector4<f64>; 4] = core::array::from_fn(|k| dgi[k] * a + gi * da[k]);
        let chi: [f64; 4] = core::array::from_fn(|l| 0.5 * (gi * dg[l]).trace());
        let mut r = (0.0, 0.0);
        for k in 0..4 {
            let xk = self.x[k].eval_at(p)?.re;
            if xk == 0.0 {
                continue;
            }
            let d_norm = 2.0 * da[k].dot(&up) + a.dot(&(dgi[k] * a));
            let mut d_div = 0.0;
            for l in 0..4 {
                // ∂_k ∂_l A^u with A^u = g^{-1} A
                let d2gi = -(dgi[k] * dg[l] * gi + gi * d2g[k][l] * gi + gi * dg[l] * dgi[k]);
                let d2up = d2gi * a + dgi[l] * da[k] + dgi[k] * da[l] + gi * d2a[k][l];
                let dchi = 0.5 * (dgi[k] * dg[l] + gi * d2g[k][l]).trace();
                d_div += d2up[l] + dup[k][l] * chi[l] + up[l] * dchi;
            }
            r.0 += xk * d_norm;
            r.1 += xk * d_div;
        }
        Ok(r)
    }

    pub fn at(&self, p: &Assignment) -> Result<(f64, f64), GeometryError> {
        let h = KGF_STEP;
        let mut r = (0.0, 0.0);
        for k in 0..4 {
            let xk = self.x[k].eval_at(p)?.re;
            if xk == 0.0 {
                continue;
            }
            if k == 0 {
                return Err(GeometryError::Expr(ExprError::Undefined(
                    "generator with a u0 component: function values cannot be shifted".into(),
                )));
            }
            // Fourth-order central stencil in steps of h.
            let mut d = (0.0, 0.0);
            for (off, w) in [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)] {
                let mut q = p.clone();
                q.coords[k] += off * h;
                let (s, t) = self.scalars(&q)?;
                d.0 += w * s;
                d.1 += w * t;
            }
            r.0 += xk * d.0 / (12.0 * h);
            r.1 += xk * d.1 / (12.0 * h);
        }
        Ok(r)
    }
}

/// Numeric residuals of the two wave-operator conditions at `point`.
pub fn kgf_extra_residual_at(g: &Metric, a: &Potential, x: &VectorField, point: &Assignment) -> Result<(f64, f64), GeometryError> {
    KgfProbe::new(g, a, x, point)?.at(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{abstract_spatial_metric, invariant_coframe, metric_from_coframe};

    fn all_zero<const N: usize>(v: &[Expr; N]) -> bool {
        v.iter().all(|e| e.is_zero().unwrap())
    }

    fn type_v() -> ([VectorField; 3], Potential) {
        let frame = [VectorField::coord(1), VectorField::coord(2), VectorField::parse(["u1", "u2", "-1"]).unwrap()];
        let a = Potential::parse(["0", "alpha0*exp(u3)", "beta0*exp(u3)", "gamma0"]).unwrap();
        (frame, a)
    }

    #[test]
    fn type_v_field_table() {
        let (_, a) = type_v();
        let f = field_from_potential(&a);
        let want =
            FieldTensor::parse_upper(["alpha0'*exp(u3)", "beta0'*exp(u3)", "gamma0'", "0", "-alpha0*exp(u3)", "-beta0*exp(u3)"]).unwrap();
        assert!(f.sub(&want).is_zero().unwrap());
        assert!(f.is_antisymmetric().unwrap());
        assert!(rank3_is_zero(&bianchi_residual(&f)).unwrap());
    }

    #[test]
    fn type_v_admissible() {
        let (frame, a) = type_v();
        let f = field_from_potential(&a);
        for x in &frame {
            assert!(all_zero(&admissibility_residual(&a, &f, x)));
            assert!(compatibility_residual(&f, x).iter().all(all_zero));
            assert!((gamma_of(x, &a) + contract(x, &a)).is_zero().unwrap());
        }
        let c = crate::geometry::structure_constants_from_frame(&frame).unwrap();
        assert!(algebraic_constraint_residual(&a, &frame, &c).iter().all(all_zero));
    }

    #[test]
    fn bianchi_detects_nonclosed() {
        let mut f = FieldTensor::default();
        f.f[1][2] = parse("u3").unwrap();
        f.f[2][1] = parse("-u3").unwrap();
        assert_eq!(bianchi_residual(&f)[1][2][3], Expr::one());
    }

    #[test]
    fn perturbed_potential_fails() {
        let (frame, mut a) = type_v();
        a.a[2] = &a.a[2] + &parse("u1").unwrap();
        let f = field_from_potential(&a);
        assert!(!all_zero(&admissibility_residual(&a, &f, &frame[2])));
    }

    #[test]
    fn kgf_residuals() {
        let (frame, a) = type_v();
        let cf = invariant_coframe(&frame).unwrap();
        let g = metric_from_coframe(&cf, &abstract_spatial_metric(), 1);
        let p = Assignment::at([0.3, 0.2, -0.4, 0.5])
            .with_func("a11", 0, -1.0)
            .with_func("a22", 0, -1.3)
            .with_func("a33", 0, -0.8)
            .with_func("a12", 0, 0.1)
            .with_func("a13", 0, 0.05)
            .with_func("a23", 0, -0.2)
            .with_func("a11", 1, 0.3)
            .with_func("a22", 1, 0.1)
            .with_func("a33", 1, -0.4)
            .with_func("a12", 1, 0.2)
            .with_func("a13", 1, 0.0)
            .with_func("a23", 1, 0.7)
            .with_func("alpha0", 0, 0.4)
            .with_func("beta0", 0, -0.6)
            .with_func("gamma0", 0, 1.1)
            .with_func("alpha0", 1, 0.9)
            .with_func("beta0", 1, 0.2)
            .with_func("gamma0", 1, -0.3)
            .with_func("alpha0", 2, 0.0)
            .with_func("beta0", 2, 0.0)
            .with_func("gamma0", 2, 0.0);
        let mut p = p;
        for (i, n) in ["a11", "a22", "a33", "a12", "a13", "a23"].into_iter().enumerate() {
            p = p.with_func(n, 2, 0.1 * i as f64 - 0.2);
        }
        for x in &frame {
            let probe = KgfProbe::new(&g, &a, x, &p).unwrap();
            let (e1, e2) = probe.exact_at(&p).unwrap();
            assert!(e1.abs() < 1e-10 && e2.abs() < 1e-10, "{e1} {e2}");
            let (r1, r2) = kgf_extra_residual_at(&g, &a, x, &p).unwrap();
            assert!(r1.abs() < 1e-8 && r2.abs() < 1e-8, "{r1} {r2}");
        }
        let (r1, r2) = kgf_extra_residual_at(&g, &Potential::default(), &frame[2], &p).unwrap();
        assert_eq!((r1, r2), (0.0, 0.0));
        let mut bad = a.clone();
        bad.a[2] = &bad.a[2] + &parse("u1").unwrap();
        let (r1, r2) = kgf_extra_residual_at(&g, &bad, &frame[2], &p).unwrap();
        assert!(r1.abs() > 1e-3, "{r1}");
        let (e1, e2) = KgfProbe::new(&g, &bad, &frame[2], &p).unwrap().exact_at(&p).unwrap();
        assert!((e1 - r1).abs() < 1e-7 * r1.abs().max(1.0) && (e2 - r2).abs() < 1e-7 * r2.abs().max(1.0), "{e1} {r1} {e2} {r2}");
        assert!(e2.abs() > 1e-3, "{e2}");
    }
}
