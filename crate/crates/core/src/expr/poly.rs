use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use core::cmp::Ordering;

use alloc::vec::Vec;
use num_traits::Zero;

use super::coeff::{rat, Coeff, Rational};
use super::monomial::{Component, FuncSymbol, Key, LinearForm, ParamPoly};

/// Finite sum of coefficient × [`Key`] terms; the numerator type of
/// [`Expr`](super::Expr).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Poly {
    pub terms: BTreeMap<Key, Coeff>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::term(Key::one(), Coeff::one())
    }

    pub fn constant(c: Coeff) -> Self {
        Poly::term(Key::one(), c)
    }

    pub fn term(k: Key, c: Coeff) -> Self {
        let mut p = Poly::zero();
        p.add_term(k, c);
        p
    }

    pub fn from_param_poly(pp: &ParamPoly) -> Self {
        let mut p = Poly::zero();
        for (m, c) in &pp.terms {
            p.add_term(Key::with_params(m.clone()), *c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn single(&self) -> Option<(&Key, &Coeff)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn add_term(&mut self, k: Key, c: Coeff) {
        if c.is_zero() {
            return;
        }
        if let Some((a, b)) = k.split_cos_square() {
            self.add_term(a, c);
            self.add_term(b, -c);
            return;
        }
        match self.terms.entry(k) {
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

    pub fn add_assign(&mut self, o: &Poly) {
        for (k, c) in &o.terms {
            self.add_term(k.clone(), *c);
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_assign(o);
        out
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(k, c)| (k.clone(), -*c)).collect() }
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(k.clone(), -*c);
        }
        out
    }

    pub fn scale(&self, c: Coeff) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        let mut out = Poly::zero();
        for (k, v) in &self.terms {
            out.add_term(k.clone(), *v * c);
        }
        out
    }

    pub fn mul_term(&self, k: &Key, c: Coeff) -> Poly {
        let mut out = Poly::zero();
        for (kk, v) in &self.terms {
            out.add_term(kk.mul(k), *v * c);
        }
        out
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &o.terms {
                out.add_term(ka.mul(kb), *ca * *cb);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn conj(&self) -> Poly {
        let mut out = Poly::zero();
        for (k, c) in &self.terms {
            out.add_term(Key { exp: k.exp.conj(), ..k.clone() }, c.conj());
        }
        out
    }

    /// Exact partial derivative with respect to coordinate `i`.
    ///
    /// Abstract functions depend on `u0` only; `∂0` raises their order.
    pub fn diff(&self, i: usize) -> Poly {
        let mut out = Poly::zero();
        for (k, c) in &self.terms {
            let p = k.coords[i];
            if p != 0 {
                let mut kk = k.clone();
                kk.coords[i] -= 1;
                out.add_term(kk, c.scale(&rat(p as i128)));
            }
            let lam = &k.exp.coord[i];
            for (m, d) in &lam.terms {
                out.add_term(k.mul(&Key::with_params(m.clone())), *c * *d);
            }
            if i == 0 {
                for (f, p) in &k.funcs {
                    let step = Key::func(f.clone(), -1).mul(&Key::func(f.derivative(), 1));
                    out.add_term(k.mul(&step), c.scale(&rat(*p as i128)));
                }
            }
        }
        out
    }

    pub fn depends_on(&self, i: usize) -> bool {
        self.terms.keys().any(|k| k.depends_on(i))
    }

    /// True when no term carries coordinates, functions or exponentials of
    /// coordinates.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Key::is_constant)
    }

    /// Coordinate-free, function-free, exponential-free content as a
    /// parameter polynomial.
    pub fn as_param_poly(&self) -> Option<ParamPoly> {
        let mut out = ParamPoly::zero();
        for (k, c) in &self.terms {
            if !(k.coords == [0; 4] && k.funcs.is_empty() && k.exp.is_zero()) {
                return None;
            }
            out.add_term(k.params.clone(), *c);
        }
        Some(out)
    }

    pub fn as_constant(&self) -> Option<Coeff> {
        self.as_param_poly()?.as_constant()
    }

    /// Greatest term under the group order of [`Key::group_cmp`].
    pub fn leading(&self) -> Option<(&Key, &Coeff)> {
        let mut it = self.terms.iter();
        let mut best = it.next()?;
        for t in it {
            if t.0.group_cmp(best.0) == Ordering::Greater {
                best = t;
            }
        }
        Some(best)
    }

    /// Per-component exponent range over the terms; components tied by the
    /// `cos(alpha)` reduction are left out.
    fn exponent_box(&self) -> BTreeMap<Component, (Rational, Rational)> {
        let all: Vec<BTreeMap<Component, Rational>> = self.terms.keys().map(Key::components).collect();
        let mut out: BTreeMap<Component, (Rational, Rational)> = BTreeMap::new();
        for c in all.iter().flat_map(|m| m.keys()) {
            out.entry(c.clone()).or_insert((Rational::zero(), Rational::zero()));
        }
        for (c, (lo, hi)) in out.iter_mut() {
            let mut first = true;
            for m in &all {
                let v = m.get(c).copied().unwrap_or_else(Rational::zero);
                if first || v < *lo {
                    *lo = v;
                }
                if first || v > *hi {
                    *hi = v;
                }
                first = false;
            }
        }
        out
    }

    /// Least term under the group order.
    pub fn trailing(&self) -> Option<(&Key, &Coeff)> {
        let mut it = self.terms.iter();
        let mut best = it.next()?;
        for t in it {
            if t.0.group_cmp(best.0) == Ordering::Less {
                best = t;
            }
        }
        Some(best)
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide.
    ///
    /// Division by leading terms under a group order; if the divisor
    /// divides, the loop reproduces the quotient term by term. A step budget
    /// stops the non-dividing case.
    pub fn try_div(&self, d: &Poly) -> Option<Poly> {
        if let Some((k, c)) = d.single() {
            return Some(self.mul_term(&k.inv(), c.inv()?));
        }
        let (lk, lc) = d.leading()?;
        let (lk, lc_inv) = (lk.clone(), lc.inv()?);
        // The support of an exact quotient lies in the box
        // [min(self) - min(d), max(self) - max(d)] along every exponent
        // component.
        let (sb, db) = (self.exponent_box(), d.exponent_box());
        let mut bounds = BTreeMap::new();
        for c in sb.keys().chain(db.keys()) {
            let z = (Rational::zero(), Rational::zero());
            let (a, b) = (sb.get(c).unwrap_or(&z), db.get(c).unwrap_or(&z));
            bounds.insert(c.clone(), (a.0 - b.0, a.1 - b.1));
        }
        let mut rem = self.clone();
        let mut q = Poly::zero();
        let budget = 256 + 8 * (self.len() + d.len());
        for _ in 0..budget {
            let Some((rk, rc)) = rem.leading() else {
                return Some(q);
            };
            let tk = rk.mul(&lk.inv());
            let comps = tk.components();
            for (c, (lo, hi)) in &bounds {
                let v = comps.get(c).copied().unwrap_or_else(Rational::zero);
                if v < *lo || v > *hi {
                    return None;
                }
            }
            if comps.keys().any(|c| !bounds.contains_key(c)) {
                return None;
            }
            let tc = *rc * lc_inv;
            q.add_term(tk.clone(), tc);
            rem = rem.sub(&d.mul_term(&tk, tc));
        }
        if rem.is_zero() {
            Some(q)
        } else {
            None
        }
    }

    /// Splits `self = s · n` with `s` a real rational and `n` having a
    /// leading coefficient whose first nonzero component is `1`. Real
    /// polynomials stay real.
    pub fn normalize_factor(&self) -> (Coeff, Poly) {
        let Some((_, c)) = self.terms.iter().next_back() else {
            return (Coeff::one(), Poly::zero());
        };
        let s = if c.re != rat(0) { c.re } else { c.im };
        let sc = Coeff::real(s);
        (sc, self.scale(sc.inv().unwrap()))
    }

    /// Set of abstract-function names appearing in the polynomial.
    pub fn func_names(&self) -> alloc::collections::BTreeSet<alloc::string::String> {
        self.terms.keys().flat_map(|k| k.funcs.keys().map(|f| f.name.clone())).collect()
    }

    pub fn funcs(&self) -> alloc::collections::BTreeSet<FuncSymbol> {
        self.terms.keys().flat_map(|k| k.funcs.keys().cloned()).collect()
    }

    pub fn exponent_forms(&self) -> alloc::collections::BTreeSet<LinearForm> {
        self.terms.keys().map(|k| k.exp.clone()).collect()
    }
}
