use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use super::coeff::{rat, Coeff, Rational};
use super::error::ExprError;
use super::monomial::{FuncSymbol, Key, LinearForm, ParamMono, ParamPoly, ANGLE, COS_ANGLE, SIN_ANGLE};
use super::poly::Poly;

/// Canonical expression: a polynomial numerator over a product of
/// normalized polynomial factors.
///
/// The numerator is empty iff the expression is zero. Denominator factors
/// that divide the numerator exactly are always cancelled.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Expr {
    num: Poly,
    den: BTreeMap<Poly, u32>,
}

fn den_product(den: &BTreeMap<Poly, u32>) -> Poly {
    let mut p = Poly::one();
    for (f, e) in den {
        p = p.mul(&f.pow(*e));
    }
    p
}

fn cofactor(full: &BTreeMap<Poly, u32>, part: &BTreeMap<Poly, u32>) -> Poly {
    let mut p = Poly::one();
    for (f, e) in full {
        let have = part.get(f).copied().unwrap_or(0);
        p = p.mul(&f.pow(e - have));
    }
    p
}

/// `exp(l)` as a polynomial; integer multiples of `i·alpha` in the constant
/// part are expanded through `cos(alpha) + i·sin(alpha)`.
pub(crate) fn exp_poly(l: &LinearForm) -> Poly {
    let mut l = l.clone();
    let mut alpha = ParamMono::new();
    alpha.insert(String::from(ANGLE), 1);
    let mut factor = Poly::one();
    if let Some(m) = l.constant.terms.get(&alpha).copied() {
        if m.re == rat(0) && m.im.is_integer() {
            let j = i32::try_from(*m.im.numer()).unwrap_or(0);
            if j != 0 {
                l.constant.terms.remove(&alpha);
                let unit = ParamPoly::param(COS_ANGLE).add(&ParamPoly::param(SIN_ANGLE).scale(Coeff::i()));
                let u = if j > 0 { unit } else { unit.conj() };
                factor = Poly::from_param_poly(&u.pow(j.abs()).unwrap());
            }
        }
    }
    Poly::term(Key::exp(l), Coeff::one()).mul(&factor)
}

fn factorial(n: i32) -> i128 {
    (1..=n as i128).product()
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn one() -> Self {
        Expr::from_poly(Poly::one())
    }

    pub fn int(n: i128) -> Self {
        Expr::from_coeff(Coeff::int(n))
    }

    pub fn rational(r: Rational) -> Self {
        Expr::from_coeff(Coeff::real(r))
    }

    pub fn from_coeff(c: Coeff) -> Self {
        Expr::from_poly(Poly::constant(c))
    }

    pub fn from_poly(num: Poly) -> Self {
        Expr { num, den: BTreeMap::new() }
    }

    pub fn from_param_poly(p: &ParamPoly) -> Self {
        Expr::from_poly(Poly::from_param_poly(p))
    }

    pub fn param(name: &str) -> Self {
        Expr::from_poly(Poly::term(Key::param(name, 1), Coeff::one()))
    }

    pub fn coord(i: usize) -> Self {
        Expr::from_poly(Poly::term(Key::coord(i, 1), Coeff::one()))
    }

    pub fn func(name: &str, order: u32) -> Self {
        Expr::from_poly(Poly::term(Key::func(FuncSymbol::new(name, order), 1), Coeff::one()))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &BTreeMap<Poly, u32> {
        &self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty()
    }

    /// Syntactic zero test on the canonical form. See also [`Expr::is_zero`].
    pub fn is_symbolic_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_constant(&self) -> Option<Coeff> {
        if self.den.is_empty() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn as_param_poly(&self) -> Option<ParamPoly> {
        if self.den.is_empty() {
            self.num.as_param_poly()
        } else {
            None
        }
    }

    /// Builds `num / Π den` and cancels every factor that divides exactly.
    fn build(mut num: Poly, mut den: BTreeMap<Poly, u32>) -> Expr {
        if num.is_zero() {
            return Expr::zero();
        }
        for (f, e) in den.iter_mut() {
            while *e > 0 {
                match num.try_div(f) {
                    Some(q) => {
                        num = q;
                        *e -= 1;
                    }
                    None => break,
                }
            }
        }
        den.retain(|_, e| *e > 0);
        Expr { num, den }
    }

    /// Re-runs cancellation; a no-op on values built through the API.
    pub fn canonical(&self) -> Expr {
        Expr::build(self.num.clone(), self.den.clone())
    }

    pub fn add(&self, o: &Expr) -> Expr {
        if self.den.is_empty() && o.den.is_empty() {
            return Expr::from_poly(self.num.add(&o.num));
        }
        if self.den == o.den {
            return Expr::build(self.num.add(&o.num), self.den.clone());
        }
        let mut den = self.den.clone();
        for (f, e) in &o.den {
            let v = den.entry(f.clone()).or_insert(0);
            *v = (*v).max(*e);
        }
        let a = self.num.mul(&cofactor(&den, &self.den));
        let b = o.num.mul(&cofactor(&den, &o.den));
        Expr::build(a.add(&b), den)
    }

    pub fn neg(&self) -> Expr {
        Expr { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &Expr) -> Expr {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: Coeff) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn mul(&self, o: &Expr) -> Expr {
        if self.den.is_empty() && o.den.is_empty() {
            return Expr::from_poly(self.num.mul(&o.num));
        }
        let mut den = self.den.clone();
        for (f, e) in &o.den {
            *den.entry(f.clone()).or_insert(0) += e;
        }
        Expr::build(self.num.mul(&o.num), den)
    }

    pub fn inv(&self) -> Result<Expr, ExprError> {
        if self.num.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        let mut num = den_product(&self.den);
        let mut den = BTreeMap::new();
        if let Some((k, c)) = self.num.single() {
            num = num.mul_term(&k.inv(), c.inv().ok_or(ExprError::DivisionByZero)?);
        } else {
            let (s, f) = self.num.normalize_factor();
            num = num.scale(s.inv().ok_or(ExprError::DivisionByZero)?);
            den.insert(f, 1);
        }
        Ok(Expr::build(num, den))
    }

    pub fn div(&self, o: &Expr) -> Result<Expr, ExprError> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, n: i32) -> Result<Expr, ExprError> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let n = n.unsigned_abs();
        Ok(Expr { num: base.num.pow(n), den: base.den.iter().map(|(f, e)| (f.clone(), e * n)).filter(|(_, e)| *e > 0).collect() })
    }

    pub fn conj(&self) -> Expr {
        Expr { num: self.num.conj(), den: self.den.iter().map(|(f, e)| (f.conj(), *e)).collect() }
    }

    pub fn is_real(&self) -> bool {
        self.num.conj() == self.num && self.den.keys().all(|f| f.conj() == *f)
    }

    /// Exact partial derivative with respect to `u_i`.
    pub fn diff(&self, i: usize) -> Expr {
        if self.den.is_empty() {
            return Expr::from_poly(self.num.diff(i));
        }
        let active: Vec<(&Poly, u32, Poly)> = self
            .den
            .iter()
            .filter_map(|(f, e)| {
                let d = f.diff(i);
                (!d.is_zero()).then_some((f, *e, d))
            })
            .collect();
        if active.is_empty() {
            return Expr::build(self.num.diff(i), self.den.clone());
        }
        let mut prod = Poly::one();
        for (f, _, _) in &active {
            prod = prod.mul(f);
        }
        let mut num = self.num.diff(i).mul(&prod);
        for (j, (_, e, d)) in active.iter().enumerate() {
            let mut t = d.scale(Coeff::int(*e as i128));
            for (l, (f, _, _)) in active.iter().enumerate() {
                if l != j {
                    t = t.mul(f);
                }
            }
            num = num.sub(&self.num.mul(&t));
        }
        let mut den = self.den.clone();
        for (f, _, _) in &active {
            *den.get_mut(*f).unwrap() += 1;
        }
        Expr::build(num, den)
    }

    pub fn depends_on(&self, i: usize) -> bool {
        self.num.depends_on(i) || self.den.keys().any(|f| f.depends_on(i))
    }

    pub fn funcs(&self) -> BTreeSet<FuncSymbol> {
        let mut s = self.num.funcs();
        for f in self.den.keys() {
            s.extend(f.funcs());
        }
        s
    }

    /// Names of all parameters, including those inside exponential arguments.
    pub fn params(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        for p in core::iter::once(&self.num).chain(self.den.keys()) {
            for k in p.terms.keys() {
                s.extend(k.params.keys().cloned());
                for pp in k.exp.coord.iter().chain(core::iter::once(&k.exp.constant)) {
                    for m in pp.terms.keys() {
                        s.extend(m.keys().cloned());
                    }
                }
            }
        }
        s
    }

    /// The expression as a linear form in the coordinates, if it is one.
    pub fn linear_form(&self) -> Option<LinearForm> {
        if !self.den.is_empty() {
            return None;
        }
        let mut lf = LinearForm::zero();
        for (k, c) in &self.num.terms {
            if !k.funcs.is_empty() || !k.exp.is_zero() {
                return None;
            }
            let mut single = ParamPoly::zero();
            single.add_term(k.params.clone(), *c);
            let nz: Vec<usize> = (0..4).filter(|&i| k.coords[i] != 0).collect();
            match nz.as_slice() {
                [] => lf.constant = lf.constant.add(&single),
                [i] if k.coords[*i] == 1 => lf.coord[*i] = lf.coord[*i].add(&single),
                _ => return None,
            }
        }
        Some(lf)
    }

    fn linear_arg(arg: &Expr) -> Result<LinearForm, ExprError> {
        arg.linear_form().ok_or_else(|| ExprError::NonLinearArgument(arg.to_string()))
    }

    pub fn exp_form(l: &LinearForm) -> Expr {
        Expr::from_poly(exp_poly(l))
    }

    pub fn exp(arg: &Expr) -> Result<Expr, ExprError> {
        Ok(Expr::from_poly(exp_poly(&Expr::linear_arg(arg)?)))
    }

    pub fn sin(arg: &Expr) -> Result<Expr, ExprError> {
        let l = Expr::linear_arg(arg)?;
        let p = exp_poly(&l.scale(Coeff::i())).sub(&exp_poly(&l.scale(-Coeff::i())));
        Ok(Expr::from_poly(p.scale(Coeff::new(rat(0), Rational::new(-1, 2)))))
    }

    pub fn cos(arg: &Expr) -> Result<Expr, ExprError> {
        let l = Expr::linear_arg(arg)?;
        let p = exp_poly(&l.scale(Coeff::i())).add(&exp_poly(&l.scale(-Coeff::i())));
        Ok(Expr::from_poly(p.scale(Coeff::real(Rational::new(1, 2)))))
    }

    /// Rebuilds the expression term by term through `f`.
    fn map_terms(&self, f: &dyn Fn(&Key, &Coeff) -> Result<Expr, ExprError>) -> Result<Expr, ExprError> {
        let map_poly = |p: &Poly| -> Result<Expr, ExprError> {
            let mut acc = Expr::zero();
            for (k, c) in &p.terms {
                acc = acc.add(&f(k, c)?);
            }
            Ok(acc)
        };
        let mut out = map_poly(&self.num)?;
        for (d, e) in &self.den {
            let v = map_poly(d)?;
            if v.is_symbolic_zero() {
                return Err(ExprError::DivisionByZero);
            }
            out = out.div(&v.pow(*e as i32)?)?;
        }
        Ok(out)
    }

    /// Replaces every derivative order `m` of function `name` by the `m`-th
    /// `u0`-derivative of `value`.
    pub fn substitute_func(&self, name: &str, value: &Expr) -> Result<Expr, ExprError> {
        let max_order = self.funcs().iter().filter(|f| f.name == name).map(|f| f.order).max();
        let Some(max_order) = max_order else {
            return Ok(self.clone());
        };
        let mut derivs = Vec::with_capacity(max_order as usize + 1);
        derivs.push(value.clone());
        for m in 0..max_order as usize {
            let d = derivs[m].diff(0);
            derivs.push(d);
        }
        self.map_terms(&|k, c| {
            let mut rest = k.clone();
            let mut out = Expr::one();
            for (f, p) in &k.funcs {
                if f.name == name {
                    rest.funcs.remove(f);
                    out = out.mul(&derivs[f.order as usize].pow(*p)?);
                }
            }
            Ok(out.mul(&Expr::from_poly(Poly::term(rest, *c))))
        })
    }

    /// Replaces parameter `name` (also inside exponential arguments).
    pub fn substitute_param(&self, name: &str, value: &ParamPoly) -> Result<Expr, ExprError> {
        let bad = || ExprError::Undefined(alloc::format!("{name} has no inverse"));
        self.map_terms(&|k, c| {
            let mut rest = k.clone();
            let mut out = Poly::constant(*c);
            if let Some(p) = rest.params.remove(name) {
                out = out.mul(&Poly::from_param_poly(&value.pow(p).ok_or_else(bad)?));
            }
            let mut lf = LinearForm::zero();
            for i in 0..4 {
                lf.coord[i] = k.exp.coord[i].substitute(name, value).ok_or_else(bad)?;
            }
            lf.constant = k.exp.constant.substitute(name, value).ok_or_else(bad)?;
            rest.exp = LinearForm::zero();
            Ok(Expr::from_poly(out.mul_term(&rest, Coeff::one()).mul(&exp_poly(&lf))))
        })
    }

    /// Sets `u_i = 0`.
    pub fn restrict_coord_zero(&self, i: usize) -> Result<Expr, ExprError> {
        self.map_terms(&|k, c| {
            if k.coords[i] > 0 {
                return Ok(Expr::zero());
            }
            if k.coords[i] < 0 {
                return Err(ExprError::Undefined(alloc::format!("negative power of u{i} at u{i} = 0")));
            }
            if i == 0 && !k.funcs.is_empty() {
                return Err(ExprError::Undefined(String::from("abstract function at u0 = 0")));
            }
            let mut kk = k.clone();
            kk.exp.coord[i] = ParamPoly::zero();
            Ok(Expr::from_poly(Poly::term(kk, *c)))
        })
    }

    /// `∫_0^{u_i}` of the expression in `u_i`, other coordinates held fixed.
    pub fn integrate_coord(&self, i: usize) -> Result<Expr, ExprError> {
        if self.den.keys().any(|f| f.depends_on(i)) {
            return Err(ExprError::NotIntegrable(String::from("denominator depends on the variable")));
        }
        let mut out = Poly::zero();
        for (k, c) in &self.num.terms {
            if i == 0 && !k.funcs.is_empty() {
                return Err(ExprError::NotIntegrable(String::from("abstract function of u0")));
            }
            let m = k.coords[i];
            if m < 0 {
                return Err(ExprError::NotIntegrable(alloc::format!("negative power of u{i}")));
            }
            let mu = &k.exp.coord[i];
            let mut rest = k.clone();
            rest.coords[i] = 0;
            if mu.is_zero() {
                out.add_term(rest.mul(&Key::coord(i, m + 1)), c.scale(&Rational::new(1, (m + 1) as i128)));
                continue;
            }
            let mu_inv =
                mu.inv_general().ok_or_else(|| ExprError::NotIntegrable(String::from("exponent coefficient is not invertible")))?;
            let mu_inv = Poly::from_param_poly(&mu_inv);
            let base = rest.clone();
            rest.exp.coord[i] = ParamPoly::zero();
            let mut inv_pow = Poly::one();
            for j in 0..=m {
                inv_pow = inv_pow.mul(&mu_inv);
                let sign = if j % 2 == 0 { 1 } else { -1 };
                let coef = sign * factorial(m) / factorial(m - j);
                let t = Poly::term(base.mul(&Key::coord(i, m - j)), c.scale(&rat(coef)));
                out.add_assign(&t.mul(&inv_pow));
            }
            let sign = if m % 2 == 0 { 1 } else { -1 };
            let t = Poly::term(rest, c.scale(&rat(-sign * factorial(m))));
            out.add_assign(&t.mul(&inv_pow));
        }
        Ok(Expr::build(out, self.den.clone()))
    }

    /// A `u0`-antiderivative: derivative orders of abstract functions are
    /// lowered, function-free terms are integrated from `u0 = 0`.
    pub fn antiderivative_u0(&self) -> Result<Expr, ExprError> {
        if self.den.keys().any(|f| f.depends_on(0)) {
            return Err(ExprError::NotIntegrable(String::from("denominator depends on u0")));
        }
        let mut lowered = Poly::zero();
        let mut plain = Poly::zero();
        for (k, c) in &self.num.terms {
            if k.funcs.is_empty() {
                plain.add_term(k.clone(), *c);
                continue;
            }
            let ok = k.funcs.len() == 1 && k.coords[0] == 0 && k.exp.coord[0].is_zero();
            let (f, p) = k.funcs.iter().next().unwrap();
            if !ok || *p != 1 || f.order == 0 {
                return Err(ExprError::NotIntegrable(String::from("term is not a derivative in u0")));
            }
            let mut kk = k.clone();
            kk.funcs.clear();
            kk.funcs.insert(FuncSymbol::new(&f.name, f.order - 1), 1);
            lowered.add_term(kk, *c);
        }
        let rest = Expr { num: plain, den: self.den.clone() }.integrate_coord(0)?;
        Ok(Expr::build(lowered, self.den.clone()).add(&rest))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, o: &Expr) -> Expr {
                Expr::$m(self, o)
            }
        }
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                Expr::$m(&self, &o)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, o: &Expr) -> Expr {
                Expr::$m(&self, o)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                Expr::$m(self, &o)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n as i128)
    }
}
