//! Printing in the input grammar. Conjugate exponential pairs are written
//! back as real `cos`/`sin` factors, so `parse(print(e)) == e`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use super::coeff::{Coeff, Rational};
use super::frac::Expr;
use super::monomial::{Key, LinearForm, ParamMono, ParamPoly};
use super::poly::Poly;
use num_traits::{One, Signed, Zero};

fn pow_suffix(e: i32) -> String {
    match e {
        1 => String::new(),
        e if e < 0 => format!("^({e})"),
        e => format!("^{e}"),
    }
}

fn param_factors(m: &ParamMono, out: &mut Vec<String>) {
    for (name, e) in m {
        out.push(format!("{name}{}", pow_suffix(*e)));
    }
}

/// Joins signed terms into `a + b - c`.
fn join(terms: &[(Rational, Vec<String>)]) -> String {
    let mut s = String::new();
    for (i, (r, f)) in terms.iter().enumerate() {
        let neg = r.is_negative();
        let mag = r.abs();
        let body = if f.is_empty() {
            format!("{mag}")
        } else if mag.is_one() {
            f.join("*")
        } else {
            format!("{mag}*{}", f.join("*"))
        };
        match (i, neg) {
            (0, true) => s.push('-'),
            (0, false) => {}
            (_, true) => s.push_str(" - "),
            (_, false) => s.push_str(" + "),
        }
        s.push_str(&body);
    }
    s
}

fn linear_terms(l: &LinearForm) -> Vec<(Rational, Vec<String>)> {
    let mut terms = Vec::new();
    for (i, pp) in l.coord.iter().enumerate() {
        for (m, c) in &pp.terms {
            let mut f = Vec::new();
            param_factors(m, &mut f);
            f.push(format!("u{i}"));
            terms.push((c.re, f));
        }
    }
    for (m, c) in &l.constant.terms {
        let mut f = Vec::new();
        param_factors(m, &mut f);
        terms.push((c.re, f));
    }
    terms
}

pub(crate) fn fmt_linear(l: &LinearForm) -> String {
    let t = linear_terms(l);
    if t.is_empty() {
        String::from("0")
    } else {
        join(&t)
    }
}

fn split_form(l: &LinearForm) -> (LinearForm, LinearForm) {
    let parts: Vec<(ParamPoly, ParamPoly)> = l.coord.iter().map(ParamPoly::split).collect();
    let (cr, ci) = l.constant.split();
    let re = LinearForm { coord: core::array::from_fn(|i| parts[i].0.clone()), constant: cr };
    let im = LinearForm { coord: core::array::from_fn(|i| parts[i].1.clone()), constant: ci };
    (re, im)
}

/// Non-exponential factors of a key, followed by `exp(re)`.
fn base_factors(k: &Key, re: &LinearForm) -> Vec<String> {
    let mut f = Vec::new();
    param_factors(&k.params, &mut f);
    for (i, p) in k.coords.iter().enumerate() {
        if *p != 0 {
            f.push(format!("u{i}{}", pow_suffix(*p)));
        }
    }
    for (s, p) in &k.funcs {
        let primes: String = core::iter::repeat_n('\'', s.order as usize).collect();
        f.push(format!("{}{primes}{}", s.name, pow_suffix(*p)));
    }
    if !re.is_zero() {
        f.push(format!("exp({})", fmt_linear(re)));
    }
    f
}

fn complex_factor(c: &Coeff) -> String {
    format!("({} + {}*I)", c.re, c.im)
}

pub(crate) fn fmt_poly(p: &Poly) -> String {
    if p.is_zero() {
        return String::from("0");
    }
    let mut done: BTreeSet<&Key> = BTreeSet::new();
    let mut terms: Vec<(Rational, Vec<String>)> = Vec::new();
    for (k, c) in &p.terms {
        if done.contains(k) {
            continue;
        }
        let (re, im) = split_form(&k.exp);
        if im.is_zero() {
            let mut f = base_factors(k, &re);
            if c.is_real() {
                terms.push((c.re, f));
            } else {
                f.insert(0, complex_factor(c));
                terms.push((Rational::one(), f));
            }
            continue;
        }
        let partner = Key { exp: k.exp.conj(), ..k.clone() };
        let pc = p.terms.get(&partner).copied();
        if pc == Some(c.conj()) {
            done.insert(p.terms.get_key_value(&partner).unwrap().0);
            // Orient so the trig argument has positive leading sign.
            let (c, im) = if im.sign() == Ordering::Less { (c.conj(), im.neg()) } else { (*c, im) };
            let arg = fmt_linear(&im);
            let two = Rational::from_integer(2);
            if !c.re.is_zero() {
                let mut f = base_factors(k, &re);
                f.push(format!("cos({arg})"));
                terms.push((two * c.re, f));
            }
            if !c.im.is_zero() {
                let mut f = base_factors(k, &re);
                f.push(format!("sin({arg})"));
                terms.push((-two * c.im, f));
            }
        } else {
            let arg = fmt_linear(&im);
            let mut f = base_factors(k, &re);
            f.insert(0, complex_factor(c));
            f.push(format!("(cos({arg}) + I*sin({arg}))"));
            terms.push((Rational::one(), f));
        }
    }
    join(&terms)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den().is_empty() {
            return f.write_str(&fmt_poly(self.num()));
        }
        write!(f, "({})", fmt_poly(self.num()))?;
        for (d, e) in self.den() {
            for _ in 0..*e {
                write!(f, "/({})", fmt_poly(d))?;
            }
        }
        Ok(())
    }
}
