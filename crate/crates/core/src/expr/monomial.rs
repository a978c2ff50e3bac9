//! Basis monomials of the canonical form.
//!
//! A monomial is a product of parameter powers, coordinate powers, powers of
//! abstract `u0`-functions and one exponential of a linear form in the
//! coordinates. Negative exponents are allowed everywhere, so every monomial
//! is a unit and exact division by a monomial never fails.

use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use alloc::string::String;
use core::cmp::Ordering;

use super::coeff::{Coeff, Rational};

/// Name of the group-VII angle parameter as written in the grammar.
pub const ANGLE: &str = "alpha";
/// Internal parameter standing for `sin(alpha)`.
pub const SIN_ANGLE: &str = "sin(alpha)";
/// Internal parameter standing for `cos(alpha)`.
pub const COS_ANGLE: &str = "cos(alpha)";

/// Arbitrary function of `u0`, possibly differentiated.
///
/// Distinct `(name, order)` pairs are independent indeterminates.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct FuncSymbol {
    pub name: String,
    pub order: u32,
}

impl FuncSymbol {
    pub fn new(name: &str, order: u32) -> Self {
        FuncSymbol { name: String::from(name), order }
    }

    pub fn derivative(&self) -> Self {
        FuncSymbol { name: self.name.clone(), order: self.order + 1 }
    }
}

pub type ParamMono = BTreeMap<String, i32>;

fn mono_mul(a: &ParamMono, b: &ParamMono) -> ParamMono {
    let mut out = a.clone();
    for (k, e) in b {
        let v = out.entry(k.clone()).or_insert(0);
        *v += e;
        if *v == 0 {
            out.remove(k);
        }
    }
    out
}

fn mono_inv(a: &ParamMono) -> ParamMono {
    a.iter().map(|(k, e)| (k.clone(), -e)).collect()
}

/// Applies `cos(alpha)^2 = 1 - sin(alpha)^2` once, if it applies.
fn split_cos_square(m: &ParamMono) -> Option<(ParamMono, ParamMono)> {
    let c = *m.get(COS_ANGLE)?;
    if c < 2 {
        return None;
    }
    let mut base = m.clone();
    if c == 2 {
        base.remove(COS_ANGLE);
    } else {
        base.insert(String::from(COS_ANGLE), c - 2);
    }
    let mut with_sin = base.clone();
    let s = with_sin.entry(String::from(SIN_ANGLE)).or_insert(0);
    *s += 2;
    if *s == 0 {
        with_sin.remove(SIN_ANGLE);
    }
    Some((base, with_sin))
}

/// Polynomial (Laurent) in the named parameters with Gaussian rational
/// coefficients. Used for coefficients inside exponential arguments.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct ParamPoly {
    pub terms: BTreeMap<ParamMono, Coeff>,
}

impl ParamPoly {
    pub fn zero() -> Self {
        ParamPoly::default()
    }

    pub fn constant(c: Coeff) -> Self {
        let mut p = ParamPoly::zero();
        p.add_term(ParamMono::new(), c);
        p
    }

    pub fn param(name: &str) -> Self {
        let mut m = ParamMono::new();
        m.insert(String::from(name), 1);
        let mut p = ParamPoly::zero();
        p.add_term(m, Coeff::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value if this is a parameter-free constant.
    pub fn as_constant(&self) -> Option<Coeff> {
        match self.terms.len() {
            0 => Some(Coeff::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                if m.is_empty() {
                    Some(*c)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: ParamMono, c: Coeff) {
        if c.is_zero() {
            return;
        }
        if let Some((base, with_sin)) = split_cos_square(&m) {
            self.add_term(base, c);
            self.add_term(with_sin, -c);
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, o: &ParamPoly) -> ParamPoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }

    pub fn neg(&self) -> ParamPoly {
        ParamPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -*c)).collect() }
    }

    pub fn sub(&self, o: &ParamPoly) -> ParamPoly {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: Coeff) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), *v * c);
        }
        out
    }

    pub fn mul(&self, o: &ParamPoly) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.add_term(mono_mul(ma, mb), *ca * *cb);
            }
        }
        out
    }

    /// Inverse of a single-term polynomial.
    pub fn inv(&self) -> Option<ParamPoly> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next().unwrap();
        let mut out = ParamPoly::zero();
        out.terms.insert(mono_inv(m), c.inv()?);
        Some(out)
    }

    pub fn conj(&self) -> ParamPoly {
        ParamPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c.conj())).collect() }
    }

    /// Inverse, allowing multi-term values whose norm `p·conj(p)` reduces to
    /// a single term (e.g. `-cos(alpha) + i·sin(alpha)`).
    pub fn inv_general(&self) -> Option<ParamPoly> {
        if let Some(i) = self.inv() {
            return Some(i);
        }
        let c = self.conj();
        let norm = self.mul(&c).inv()?;
        Some(c.mul(&norm))
    }

    pub fn pow(&self, n: i32) -> Option<ParamPoly> {
        let base = if n < 0 { self.inv_general()? } else { self.clone() };
        let mut out = ParamPoly::constant(Coeff::one());
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        Some(out)
    }

    /// Replaces parameter `name` by `value`; `None` if a negative power
    /// meets a non-invertible value.
    pub fn substitute(&self, name: &str, value: &ParamPoly) -> Option<ParamPoly> {
        let mut out = ParamPoly::zero();
        for (m, c) in &self.terms {
            match m.get(name) {
                None => out.add_term(m.clone(), *c),
                Some(&p) => {
                    let mut rest = m.clone();
                    rest.remove(name);
                    let mut t = ParamPoly::zero();
                    t.add_term(rest, *c);
                    out = out.add(&t.mul(&value.pow(p)?));
                }
            }
        }
        Some(out)
    }

    /// Real and imaginary parts (parameters are real).
    pub fn split(&self) -> (ParamPoly, ParamPoly) {
        let mut re = ParamPoly::zero();
        let mut im = ParamPoly::zero();
        for (m, c) in &self.terms {
            re.add_term(m.clone(), Coeff::real(c.re));
            im.add_term(m.clone(), Coeff::real(c.im));
        }
        (re, im)
    }

    /// Sign of the coefficient at the greatest monomial.
    pub fn sign(&self) -> Ordering {
        match self.terms.iter().next_back() {
            None => Ordering::Equal,
            Some((_, c)) => c.sign(),
        }
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.terms.keys().any(|m| m.contains_key(name))
    }
}

/// Linear form `Σ coord[i]·u_i + constant` used as an exponential argument.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct LinearForm {
    pub coord: [ParamPoly; 4],
    pub constant: ParamPoly,
}

impl LinearForm {
    pub fn zero() -> Self {
        LinearForm::default()
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.coord.iter().all(ParamPoly::is_zero)
    }

    pub fn add(&self, o: &LinearForm) -> LinearForm {
        LinearForm { coord: core::array::from_fn(|i| self.coord[i].add(&o.coord[i])), constant: self.constant.add(&o.constant) }
    }

    pub fn neg(&self) -> LinearForm {
        LinearForm { coord: core::array::from_fn(|i| self.coord[i].neg()), constant: self.constant.neg() }
    }

    pub fn scale(&self, c: Coeff) -> LinearForm {
        LinearForm { coord: core::array::from_fn(|i| self.coord[i].scale(c)), constant: self.constant.scale(c) }
    }

    pub fn map(&self, f: impl Fn(&ParamPoly) -> ParamPoly) -> LinearForm {
        LinearForm { coord: core::array::from_fn(|i| f(&self.coord[i])), constant: f(&self.constant) }
    }

    pub fn conj(&self) -> LinearForm {
        self.map(ParamPoly::conj)
    }

    pub fn sign(&self) -> Ordering {
        for c in &self.coord {
            let s = c.sign();
            if s != Ordering::Equal {
                return s;
            }
        }
        self.constant.sign()
    }
}

/// One coordinate of a monomial viewed as an exponent vector.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Component {
    Param(String),
    Coord(usize),
    Func(FuncSymbol),
    /// Exponential argument: slot (`0..4` coordinates, `4` constant),
    /// parameter monomial, imaginary part flag.
    Exp(usize, ParamMono, bool),
}

/// Basis monomial. The derived `Ord` fixes term order in printing; the group
/// order used for exact division is [`Key::group_sign`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Key {
    pub params: ParamMono,
    pub coords: [i32; 4],
    pub funcs: BTreeMap<FuncSymbol, i32>,
    pub exp: LinearForm,
}

impl Key {
    pub fn one() -> Self {
        Key::default()
    }

    pub fn is_one(&self) -> bool {
        self.params.is_empty() && self.coords == [0; 4] && self.funcs.is_empty() && self.exp.is_zero()
    }

    pub fn coord(i: usize, p: i32) -> Self {
        let mut k = Key::one();
        k.coords[i] = p;
        k
    }

    pub fn param(name: &str, p: i32) -> Self {
        let mut k = Key::one();
        k.params.insert(String::from(name), p);
        k
    }

    pub fn func(f: FuncSymbol, p: i32) -> Self {
        let mut k = Key::one();
        k.funcs.insert(f, p);
        k
    }

    pub fn exp(l: LinearForm) -> Self {
        Key { exp: l, ..Key::one() }
    }

    pub fn with_params(params: ParamMono) -> Self {
        Key { params, ..Key::one() }
    }

    pub fn mul(&self, o: &Key) -> Key {
        let mut funcs = self.funcs.clone();
        for (f, e) in &o.funcs {
            let v = funcs.entry(f.clone()).or_insert(0);
            *v += e;
            if *v == 0 {
                funcs.remove(f);
            }
        }
        Key {
            params: mono_mul(&self.params, &o.params),
            coords: core::array::from_fn(|i| self.coords[i] + o.coords[i]),
            funcs,
            exp: self.exp.add(&o.exp),
        }
    }

    pub fn inv(&self) -> Key {
        Key {
            params: mono_inv(&self.params),
            coords: core::array::from_fn(|i| -self.coords[i]),
            funcs: self.funcs.iter().map(|(f, e)| (f.clone(), -e)).collect(),
            exp: self.exp.neg(),
        }
    }

    /// Splits off `cos(alpha)^2` if present (see [`split_cos_square`]).
    pub(crate) fn split_cos_square(&self) -> Option<(Key, Key)> {
        let (a, b) = split_cos_square(&self.params)?;
        Some((Key { params: a, ..self.clone() }, Key { params: b, ..self.clone() }))
    }

    /// Sign of this monomial, viewed as a vector of exponents, in a fixed
    /// lexicographic group order. `a < b` iff `(a / b).group_sign()` is `Less`.
    pub fn group_sign(&self) -> Ordering {
        for e in self.params.values() {
            if *e != 0 {
                return e.cmp(&0);
            }
        }
        for e in &self.coords {
            if *e != 0 {
                return e.cmp(&0);
            }
        }
        for e in self.funcs.values() {
            if *e != 0 {
                return e.cmp(&0);
            }
        }
        self.exp.sign()
    }

    pub fn group_cmp(&self, o: &Key) -> Ordering {
        self.mul(&o.inv()).group_sign()
    }

    /// Sparse exponent vector, skipping `sin(alpha)`/`cos(alpha)` powers.
    pub fn components(&self) -> BTreeMap<Component, Rational> {
        let mut out = BTreeMap::new();
        for (p, e) in &self.params {
            if p != SIN_ANGLE && p != COS_ANGLE && *e != 0 {
                out.insert(Component::Param(p.clone()), Rational::from_integer(*e as i128));
            }
        }
        for (i, e) in self.coords.iter().enumerate() {
            if *e != 0 {
                out.insert(Component::Coord(i), Rational::from_integer(*e as i128));
            }
        }
        for (f, e) in &self.funcs {
            out.insert(Component::Func(f.clone()), Rational::from_integer(*e as i128));
        }
        for (slot, pp) in self.exp.coord.iter().chain(core::iter::once(&self.exp.constant)).enumerate() {
            for (m, c) in &pp.terms {
                if c.re != Rational::from_integer(0) {
                    out.insert(Component::Exp(slot, m.clone(), false), c.re);
                }
                if c.im != Rational::from_integer(0) {
                    out.insert(Component::Exp(slot, m.clone(), true), c.im);
                }
            }
        }
        out
    }

    pub fn is_constant(&self) -> bool {
        self.coords == [0; 4] && self.funcs.is_empty() && self.exp.coord.iter().all(ParamPoly::is_zero)
    }

    /// True if the monomial depends on coordinate `i` (functions count for `u0`).
    pub fn depends_on(&self, i: usize) -> bool {
        self.coords[i] != 0 || !self.exp.coord[i].is_zero() || (i == 0 && !self.funcs.is_empty())
    }
}

/// Rational exponent helper used by the parser and integrators.
pub fn rational_to_i32(r: &Rational) -> Option<i32> {
    if *r.denom() != 1 {
        return None;
    }
    i32::try_from(*r.numer()).ok()
}
