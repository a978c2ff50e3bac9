//! Computer-algebra kernel for the closed expression class used throughout:
//! polynomials in coordinates and parameters, times exponentials of linear
//! forms (sin/cos are stored as complex exponentials), times arbitrary
//! functions of `u0`, over polynomial denominators.

mod coeff;
mod error;
mod eval;
mod frac;
mod monomial;
mod parse;
mod poly;
mod print;

pub use coeff::{rat, rat_to_f64, Coeff, Rational};
pub use error::ExprError;
pub use eval::{random_assignment, Assignment, Compiled};
pub use frac::Expr;
pub use monomial::{Component, FuncSymbol, Key, LinearForm, ParamMono, ParamPoly, ANGLE, COS_ANGLE, SIN_ANGLE};
pub use parse::{classify, parse, IdentKind, NAMED_PARAMS};
pub use poly::Poly;

/// Normal form of `e`. Values of [`Expr`] are kept canonical by every
/// operation, so this re-runs cancellation only.
pub fn canonicalize(e: &Expr) -> Expr {
    e.canonical()
}

pub fn differentiate(e: &Expr, i: usize) -> Expr {
    e.diff(i)
}

pub fn is_zero(e: &Expr) -> Result<bool, ExprError> {
    e.is_zero()
}

pub fn evaluate(e: &Expr, a: &Assignment) -> Result<f64, ExprError> {
    e.evaluate(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn parse_examples() {
        let e = p("u1 + 2*u2");
        assert_eq!(e.num().len(), 2);
        assert_eq!(e, Expr::coord(1) + Expr::coord(2).scale(Coeff::int(2)));
        assert_eq!(p("alpha0 * exp(u3)"), Expr::func("alpha0", 0) * Expr::exp(&Expr::coord(3)).unwrap());
        let f02 = p("beta0' * exp(2*u3)");
        assert_eq!(f02.funcs().into_iter().collect::<alloc::vec::Vec<_>>(), [FuncSymbol::new("beta0", 1)]);
        assert_eq!(f02, p("beta0'") * p("exp(u3)^2"));
    }

    #[test]
    fn differentiate_examples() {
        assert_eq!(differentiate(&p("exp(2*u3)"), 3), p("2*exp(2*u3)"));
        assert_eq!(differentiate(&p("alpha0*u3"), 0), p("alpha0'*u3"));
        let f23 = p("-2*beta0*exp(2*u3)");
        assert_eq!(differentiate(&p("beta0*exp(2*u3)"), 3), f23.neg());
        assert!(differentiate(&p("alpha0''"), 2).is_symbolic_zero());
    }

    #[test]
    fn canonicalize_examples() {
        assert_eq!(p("exp(u3)*exp(u3)"), p("exp(2*u3)"));
        assert_eq!(p("sin(u3)^2 + cos(u3)^2"), Expr::one());
        assert_eq!(p("(u1 + u2)*u1 - u1^2"), p("u1*u2"));
        assert_eq!(canonicalize(&p("sin(2*u1)")), p("2*sin(u1)*cos(u1)"));
        assert_eq!(p("sin(alpha)^2 + cos(alpha)^2"), Expr::one());
    }

    #[test]
    fn is_zero_examples() {
        assert!(is_zero(&p("exp(u3)*exp(u3) - exp(2*u3)")).unwrap());
        assert!(is_zero(&p("sin(u3)^2 + cos(u3)^2 - 1")).unwrap());
        assert!(!is_zero(&p("alpha0*exp(u3) - alpha0")).unwrap());
    }

    #[test]
    fn rational_functions_cancel() {
        let e = p("(u1^2 - u2^2)/(u1 - u2)");
        assert_eq!(e, p("u1 + u2"));
        let s = p("sin(u1)");
        let q = p("sin(2*u1)").div(&s).unwrap();
        assert_eq!(q, p("2*cos(u1)"));
        let d = p("1/sin(u1)").diff(1);
        assert_eq!(d, p("-cos(u1)/sin(u1)/sin(u1)"));
    }

    #[test]
    fn integration_in_a_coordinate() {
        let e = p("u3*exp(2*u3)").integrate_coord(3).unwrap();
        assert_eq!(e.diff(3), p("u3*exp(2*u3)"));
        assert!(e.restrict_coord_zero(3).unwrap().is_symbolic_zero());
        let v = p("exp(-u3*cos(alpha))*sin(u3*sin(alpha))");
        let iv = v.integrate_coord(3).unwrap();
        assert_eq!(iv.diff(3), v);
        assert_eq!(p("alpha0''*u3 + u0").antiderivative_u0().unwrap(), p("alpha0'*u3 + 1/2*u0^2"));
    }

    #[test]
    fn substitution() {
        let e = p("alpha0' * u1 + alpha0^2");
        let s = e.substitute_func("alpha0", &p("sin(u0)")).unwrap();
        assert_eq!(s, p("cos(u0)*u1 + sin(u0)^2"));
        let v = p("exp(k*u3)*k").substitute_param("k", &ParamPoly::constant(Coeff::int(2))).unwrap();
        assert_eq!(v, p("2*exp(2*u3)"));
    }
}
