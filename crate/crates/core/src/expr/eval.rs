use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::error::ExprError;
use super::frac::Expr;
use super::monomial::{FuncSymbol, LinearForm, ParamPoly, ANGLE, COS_ANGLE, SIN_ANGLE};
use super::poly::Poly;

/// Numeric values for coordinates, parameters and function indeterminates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Assignment {
    pub coords: [f64; 4],
    pub params: BTreeMap<String, f64>,
    pub funcs: BTreeMap<FuncSymbol, f64>,
}

impl Assignment {
    pub fn at(coords: [f64; 4]) -> Self {
        Assignment { coords, ..Default::default() }
    }

    pub fn with_param(mut self, name: &str, v: f64) -> Self {
        self.params.insert(String::from(name), v);
        self
    }

    pub fn with_func(mut self, name: &str, order: u32, v: f64) -> Self {
        self.funcs.insert(FuncSymbol::new(name, order), v);
        self
    }

    /// Parameter value; `sin(alpha)` and `cos(alpha)` follow from `alpha`
    /// unless bound explicitly.
    pub fn param(&self, name: &str) -> Option<f64> {
        if let Some(v) = self.params.get(name) {
            return Some(*v);
        }
        let a = *self.params.get(ANGLE)?;
        match name {
            SIN_ANGLE => Some(libm::sin(a)),
            COS_ANGLE => Some(libm::cos(a)),
            _ => None,
        }
    }
}

fn ipow(x: f64, n: i32) -> f64 {
    let mut r = 1.0;
    for _ in 0..n.unsigned_abs() {
        r *= x;
    }
    if n < 0 {
        1.0 / r
    } else {
        r
    }
}

fn cipow(x: Complex64, n: i32) -> Complex64 {
    let mut r = Complex64::new(1.0, 0.0);
    for _ in 0..n.unsigned_abs() {
        r *= x;
    }
    if n < 0 {
        r.inv()
    } else {
        r
    }
}

#[derive(Clone, Debug)]
struct CTerm {
    c: Complex64,
    coords: [i32; 4],
    funcs: Vec<(usize, i32)>,
    lam: [Complex64; 4],
}

impl CTerm {
    fn eval(&self, u: &[f64; 4], f: &[f64]) -> Complex64 {
        let mut v = self.c;
        let mut arg = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            if self.coords[i] != 0 {
                v *= ipow(u[i], self.coords[i]);
            }
            arg += self.lam[i] * u[i];
        }
        for (j, p) in &self.funcs {
            v *= ipow(f[*j], *p);
        }
        if arg.re != 0.0 || arg.im != 0.0 {
            v *= arg.exp();
        }
        v
    }
}

/// Expression with parameters bound, ready for repeated evaluation at
/// varying coordinates and function values.
#[derive(Clone, Debug)]
pub struct Compiled {
    num: Vec<CTerm>,
    den: Vec<(Vec<CTerm>, u32)>,
    funcs: Vec<FuncSymbol>,
}

fn eval_pp(p: &ParamPoly, params: &dyn Fn(&str) -> Option<f64>) -> Result<Complex64, ExprError> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (m, c) in &p.terms {
        let mut v = c.to_complex();
        for (name, e) in m {
            let x = params(name).ok_or_else(|| ExprError::Unbound(name.clone()))?;
            v *= ipow(x, *e);
        }
        acc += v;
    }
    Ok(acc)
}

fn eval_lf(l: &LinearForm, params: &dyn Fn(&str) -> Option<f64>) -> Result<([Complex64; 4], Complex64), ExprError> {
    let mut lam = [Complex64::new(0.0, 0.0); 4];
    for (i, x) in lam.iter_mut().enumerate() {
        *x = eval_pp(&l.coord[i], params)?;
    }
    Ok((lam, eval_pp(&l.constant, params)?))
}

impl Compiled {
    pub fn new(e: &Expr, params: &dyn Fn(&str) -> Option<f64>) -> Result<Compiled, ExprError> {
        let funcs: Vec<FuncSymbol> = e.funcs().into_iter().collect();
        let index: BTreeMap<&FuncSymbol, usize> = funcs.iter().enumerate().map(|(i, f)| (f, i)).collect();
        let terms = |p: &Poly| -> Result<Vec<CTerm>, ExprError> {
            let mut out = Vec::with_capacity(p.len());
            for (k, c) in &p.terms {
                let mut v = c.to_complex();
                for (name, e) in &k.params {
                    let x = params(name).ok_or_else(|| ExprError::Unbound(name.clone()))?;
                    v *= ipow(x, *e);
                }
                let (lam, c0) = eval_lf(&k.exp, params)?;
                if c0.re != 0.0 || c0.im != 0.0 {
                    v *= c0.exp();
                }
                out.push(CTerm { c: v, coords: k.coords, funcs: k.funcs.iter().map(|(f, p)| (index[f], *p)).collect(), lam });
            }
            Ok(out)
        };
        let num = terms(e.num())?;
        let mut den = Vec::new();
        for (d, m) in e.den() {
            den.push((terms(d)?, *m));
        }
        Ok(Compiled { num, den, funcs })
    }

    /// Function indeterminates in the order expected by [`Compiled::eval`].
    pub fn funcs(&self) -> &[FuncSymbol] {
        &self.funcs
    }

    /// Value, and the sum of absolute values of the numerator terms over
    /// the denominator magnitude (a scale for relative zero tests).
    pub fn eval_scaled(&self, u: &[f64; 4], f: &[f64]) -> Result<(Complex64, f64), ExprError> {
        let mut v = Complex64::new(0.0, 0.0);
        let mut s = 0.0;
        for t in &self.num {
            let x = t.eval(u, f);
            v += x;
            s += x.norm();
        }
        for (d, m) in &self.den {
            let mut dv = Complex64::new(0.0, 0.0);
            for t in d {
                dv += t.eval(u, f);
            }
            if dv.norm() == 0.0 {
                return Err(ExprError::DivisionByZero);
            }
            let dm = cipow(dv, *m as i32);
            v /= dm;
            s /= dm.norm();
        }
        Ok((v, s))
    }

    pub fn eval(&self, u: &[f64; 4], f: &[f64]) -> Result<Complex64, ExprError> {
        Ok(self.eval_scaled(u, f)?.0)
    }

    /// Smallest relative denominator magnitude at the point; guards samples
    /// near poles.
    pub fn den_margin(&self, u: &[f64; 4], f: &[f64]) -> f64 {
        let mut margin = f64::INFINITY;
        for (d, _) in &self.den {
            let mut dv = Complex64::new(0.0, 0.0);
            let mut ds = 0.0;
            for t in d {
                let x = t.eval(u, f);
                dv += x;
                ds += x.norm();
            }
            if ds > 0.0 {
                margin = margin.min(dv.norm() / ds);
            }
        }
        margin
    }

    /// Evaluates with function values taken from an assignment.
    pub fn eval_at(&self, a: &Assignment) -> Result<Complex64, ExprError> {
        let f = self.func_values(a)?;
        self.eval(&a.coords, &f)
    }

    pub fn func_values(&self, a: &Assignment) -> Result<Vec<f64>, ExprError> {
        self.funcs.iter().map(|s| a.funcs.get(s).copied().ok_or_else(|| ExprError::Unbound(func_label(s)))).collect()
    }
}

fn func_label(s: &FuncSymbol) -> String {
    let mut n = s.name.clone();
    for _ in 0..s.order {
        n.push('\'');
    }
    n
}

/// Random point for numeric cross-checks: coordinates in [-1, 1], function
/// values in [-2, 2], parameters in [0.5, 2], angle in [0.2, 2.9].
pub fn random_assignment(rng: &mut impl Rng, funcs: &BTreeSet<FuncSymbol>, params: &BTreeSet<String>) -> Assignment {
    let mut a = Assignment::at(core::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
    for f in funcs {
        a.funcs.insert(f.clone(), rng.gen_range(-2.0..2.0));
    }
    for p in params {
        if p == SIN_ANGLE || p == COS_ANGLE || p == ANGLE {
            if !a.params.contains_key(ANGLE) {
                a.params.insert(String::from(ANGLE), rng.gen_range(0.2..2.9));
            }
        } else {
            a.params.insert(p.clone(), rng.gen_range(0.5..2.0));
        }
    }
    a
}

const CROSS_CHECK_POINTS: usize = 8;
const NUMERIC_ZERO_REL: f64 = 1e-9;

impl Expr {
    pub fn evaluate_complex(&self, a: &Assignment) -> Result<Complex64, ExprError> {
        Compiled::new(self, &|n| a.param(n))?.eval_at(a)
    }

    /// Real value at the assignment.
    pub fn evaluate(&self, a: &Assignment) -> Result<f64, ExprError> {
        Ok(self.evaluate_complex(a)?.re)
    }

    pub fn compile(&self, a: &Assignment) -> Result<Compiled, ExprError> {
        Compiled::new(self, &|n| a.param(n))
    }

    /// Zero test on the canonical form, cross-checked numerically: a nonzero
    /// canonical form must be visibly nonzero at one of several random
    /// points.
    pub fn is_zero(&self) -> Result<bool, ExprError> {
        if self.is_symbolic_zero() {
            return Ok(true);
        }
        let funcs = self.funcs();
        let params = self.params();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
        let mut tried = 0;
        for _ in 0..(CROSS_CHECK_POINTS * 16) {
            let a = random_assignment(&mut rng, &funcs, &params);
            let c = self.compile(&a)?;
            let f = c.func_values(&a)?;
            if c.den_margin(&a.coords, &f) < 1e-6 {
                continue;
            }
            let (v, s) = c.eval_scaled(&a.coords, &f)?;
            if v.norm() > NUMERIC_ZERO_REL * s {
                return Ok(false);
            }
            tried += 1;
            if tried >= CROSS_CHECK_POINTS {
                break;
            }
        }
        Err(ExprError::Inconsistent(self.to_string()))
    }
}
