//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := ("-" | "+") unary | power
//! power  := atom ("^" unary)?
//! atom   := number | coord | param | func "'"* | ("exp"|"sin"|"cos") "(" expr ")" | "(" expr ")"
//! ```

use alloc::format;
use alloc::string::{String, ToString};

use super::coeff::{Coeff, Rational};
use super::error::ExprError;
use super::frac::Expr;
use super::monomial::{rational_to_i32, ANGLE};

/// Named constant parameters accepted besides the `t<letter><digits>` family.
pub const NAMED_PARAMS: [&str; 5] = ["k", "n", "eps", "q", ANGLE];

pub enum IdentKind {
    Coord(usize),
    Param,
    Func,
}

fn is_tilde_param(s: &str) -> bool {
    let b = s.as_bytes();
    b.len() >= 2 && b[0] == b't' && b[1].is_ascii_lowercase() && b[2..].iter().all(u8::is_ascii_digit)
}

fn is_func_name(s: &str) -> bool {
    let letters = s.bytes().take_while(u8::is_ascii_lowercase).count();
    letters > 0 && letters < s.len() && s.bytes().skip(letters).all(|c| c.is_ascii_digit())
}

/// Classifies an identifier, or `None` if it is not part of the vocabulary.
pub fn classify(name: &str) -> Option<IdentKind> {
    if let Some(d) = name.strip_prefix('u') {
        if !d.is_empty() && d.bytes().all(|c| c.is_ascii_digit()) {
            return match d {
                "0" => Some(IdentKind::Coord(0)),
                "1" => Some(IdentKind::Coord(1)),
                "2" => Some(IdentKind::Coord(2)),
                "3" => Some(IdentKind::Coord(3)),
                _ => None,
            };
        }
    }
    if NAMED_PARAMS.contains(&name) || is_tilde_param(name) {
        return Some(IdentKind::Param);
    }
    if is_func_name(name) {
        return Some(IdentKind::Func);
    }
    None
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: &str) -> Result<T, ExprError> {
        Err(ExprError::Syntax { pos: self.pos, msg: String::from(msg) })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(&format!("expected `{}`", c as char))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.unary()?);
            } else if self.peek() == Some(b'/') {
                let at = self.pos;
                self.pos += 1;
                let d = self.unary()?;
                acc = acc.div(&d).map_err(|e| match e {
                    ExprError::DivisionByZero => ExprError::Syntax { pos: at, msg: String::from("division by zero") },
                    e => e,
                })?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat(b'-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let at = self.pos;
        let e = self.unary()?;
        let n = e
            .as_constant()
            .filter(Coeff::is_real)
            .and_then(|c| rational_to_i32(&c.re))
            .ok_or(ExprError::Syntax { pos: at, msg: String::from("exponent must be an integer constant") })?;
        base.pow(n).map_err(|_| ExprError::Syntax { pos: at, msg: String::from("zero to a negative power") })
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        let mut digits = String::new();
        let mut frac_len = 0u32;
        let mut seen_dot = false;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_digit() {
                digits.push(c as char);
                if seen_dot {
                    frac_len += 1;
                }
            } else if c == b'.' && !seen_dot {
                seen_dot = true;
            } else {
                break;
            }
            self.pos += 1;
        }
        if digits.is_empty() {
            self.pos = start;
            return self.err("malformed number");
        }
        let too_long = ExprError::Syntax { pos: start, msg: String::from("numeric literal too long") };
        let n: i128 = digits.parse().map_err(|_| too_long.clone())?;
        let d = 10i128.checked_pow(frac_len).ok_or(too_long)?;
        Ok(Expr::rational(Rational::new(n, d)))
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).to_string()
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let Some(c) = self.peek() else {
            return self.err("unexpected end of input");
        };
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if !c.is_ascii_alphabetic() {
            return self.err(&format!("unexpected character `{}`", c as char));
        }
        let start = self.pos;
        let name = self.ident();
        let wrap = |r: Result<Expr, ExprError>| {
            r.map_err(|e| match e {
                ExprError::NonLinearArgument(s) => ExprError::Syntax { pos: start, msg: format!("argument of {name} is not linear: {s}") },
                e => e,
            })
        };
        match name.as_str() {
            "exp" | "sin" | "cos" => {
                self.expect(b'(')?;
                let arg = self.expr()?;
                self.expect(b')')?;
                return wrap(match name.as_str() {
                    "exp" => Expr::exp(&arg),
                    "sin" => Expr::sin(&arg),
                    _ => Expr::cos(&arg),
                });
            }
            "I" => return Ok(Expr::from_coeff(Coeff::i())),
            _ => {}
        }
        match classify(&name) {
            Some(IdentKind::Coord(i)) => Ok(Expr::coord(i)),
            Some(IdentKind::Param) => Ok(Expr::param(&name)),
            Some(IdentKind::Func) => {
                let mut order = 0;
                while self.eat(b'\'') {
                    order += 1;
                }
                Ok(Expr::func(&name, order))
            }
            None => Err(ExprError::UnknownIdentifier { pos: start, name }),
        }
    }
}

/// Parses and canonicalizes an expression.
pub fn parse(text: &str) -> Result<Expr, ExprError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_unary_minus() {
        assert_eq!(parse("-u1^2").unwrap(), Expr::coord(1).pow(2).unwrap().neg());
        assert_eq!(parse("2*3+4").unwrap(), Expr::int(10));
        assert_eq!(parse("2^-1").unwrap(), Expr::rational(Rational::new(1, 2)));
        assert_eq!(parse("1.25").unwrap(), Expr::rational(Rational::new(5, 4)));
    }

    #[test]
    fn derivative_marks() {
        assert_eq!(parse("beta0''").unwrap(), Expr::func("beta0", 2));
        assert!(matches!(parse("u1'"), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn reports_errors() {
        assert!(matches!(parse("u4"), Err(ExprError::UnknownIdentifier { .. })));
        assert!(matches!(parse("foo + 1"), Err(ExprError::UnknownIdentifier { pos: 0, .. })));
        assert!(matches!(parse("u1 +"), Err(ExprError::Syntax { pos: 4, .. })));
        assert!(matches!(parse("exp(u1*u2)"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("u1^u2"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("(u1"), Err(ExprError::Syntax { .. })));
    }
}
