//! Small dense matrices over [`Expr`]: determinants, Cramer solves,
//! characteristic polynomials and exact matrix exponentials.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::{Coeff, Expr, ExprError, LinearForm, ParamPoly, COS_ANGLE, SIN_ANGLE};

pub type Mat = Vec<Vec<Expr>>;

#[derive(Clone, Debug, PartialEq)]
pub enum LinalgError {
    Singular,
    /// Characteristic polynomial roots outside the candidate set.
    EigenvaluesNotFound,
    /// An eigenvalue depends on coordinates, so `exp(t·λ)` leaves the class.
    NonConstantEigenvalue,
    Expr(ExprError),
}

impl From<ExprError> for LinalgError {
    fn from(e: ExprError) -> Self {
        LinalgError::Expr(e)
    }
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::Singular => write!(f, "singular matrix"),
            LinalgError::EigenvaluesNotFound => write!(f, "eigenvalues not among candidates"),
            LinalgError::NonConstantEigenvalue => write!(f, "eigenvalue depends on coordinates"),
            LinalgError::Expr(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for LinalgError {}

pub fn identity(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect()).collect()
}

pub fn zeros(n: usize) -> Mat {
    vec![vec![Expr::zero(); n]; n]
}

pub fn mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut s = Expr::zero();
                    for l in 0..k {
                        if !a[i][l].is_symbolic_zero() && !b[l][j].is_symbolic_zero() {
                            s = s + &a[i][l] * &b[l][j];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn mul_vec(a: &Mat, v: &[Expr]) -> Vec<Expr> {
    a.iter()
        .map(|row| {
            let mut s = Expr::zero();
            for (x, y) in row.iter().zip(v) {
                if !x.is_symbolic_zero() && !y.is_symbolic_zero() {
                    s = s + x * y;
                }
            }
            s
        })
        .collect()
}

pub fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect()).collect()
}

pub fn scale(a: &Mat, c: &Expr) -> Mat {
    a.iter().map(|r| r.iter().map(|x| x * c).collect()).collect()
}

pub fn transpose(a: &Mat) -> Mat {
    let n = a.len();
    let m = a[0].len();
    (0..m).map(|j| (0..n).map(|i| a[i][j].clone()).collect()).collect()
}

/// `a - λ·I`.
pub fn shift(a: &Mat, lambda: &Expr) -> Mat {
    let mut out = a.clone();
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = &row[i] - lambda;
    }
    out
}

pub fn trace(a: &Mat) -> Expr {
    let mut s = Expr::zero();
    for (i, row) in a.iter().enumerate() {
        s = s + &row[i];
    }
    s
}

pub fn map(a: &Mat, f: impl Fn(&Expr) -> Result<Expr, ExprError>) -> Result<Mat, ExprError> {
    a.iter().map(|r| r.iter().map(&f).collect()).collect()
}

/// Determinant by cofactor expansion along the sparsest row.
pub fn det(a: &Mat) -> Expr {
    let n = a.len();
    match n {
        0 => return Expr::one(),
        1 => return a[0][0].clone(),
        2 => return &a[0][0] * &a[1][1] - &a[0][1] * &a[1][0],
        _ => {}
    }
    let row = (0..n).max_by_key(|&i| a[i].iter().filter(|x| x.is_symbolic_zero()).count()).unwrap_or(0);
    let mut s = Expr::zero();
    for j in 0..n {
        if a[row][j].is_symbolic_zero() {
            continue;
        }
        let minor: Mat = (0..n).filter(|&i| i != row).map(|i| (0..n).filter(|&l| l != j).map(|l| a[i][l].clone()).collect()).collect();
        let t = &a[row][j] * &det(&minor);
        s = if (row + j) % 2 == 0 { s + t } else { s - t };
    }
    s
}

/// Solves `a·x = b` by Cramer's rule.
pub fn cramer(a: &Mat, b: &[Expr]) -> Result<Vec<Expr>, LinalgError> {
    let d = det(a);
    if d.is_zero()? {
        return Err(LinalgError::Singular);
    }
    let n = a.len();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut aj = a.clone();
        for i in 0..n {
            aj[i][j] = b[i].clone();
        }
        out.push(det(&aj).div(&d)?);
    }
    Ok(out)
}

/// Inverse through the adjugate.
pub fn inverse(a: &Mat) -> Result<Mat, LinalgError> {
    let n = a.len();
    let d = det(a);
    if d.is_zero()? {
        return Err(LinalgError::Singular);
    }
    let dinv = d.inv()?;
    let mut out = zeros(n);
    for i in 0..n {
        for j in 0..n {
            let minor: Mat = (0..n).filter(|&r| r != j).map(|r| (0..n).filter(|&c| c != i).map(|c| a[r][c].clone()).collect()).collect();
            let cof = det(&minor) * &dinv;
            out[i][j] = if (i + j) % 2 == 0 { cof } else { -cof };
        }
    }
    Ok(out)
}

/// Coefficients `c[0..=n]` of `det(λI - a) = Σ c[k] λ^k` (Faddeev–LeVerrier).
pub fn char_poly(a: &Mat) -> Vec<Expr> {
    let n = a.len();
    let mut c = vec![Expr::zero(); n + 1];
    c[n] = Expr::one();
    let mut m = zeros(n);
    for k in 1..=n {
        let mk = add(&m, &scale(&identity(n), &c[n - k + 1]));
        m = mul(a, &mk);
        let t = trace(&m);
        c[n - k] = t.scale(Coeff::real(crate::expr::Rational::new(-1, k as i128)));
    }
    c
}

fn poly_eval(c: &[Expr], x: &Expr) -> Expr {
    let mut acc = Expr::zero();
    for coef in c.iter().rev() {
        acc = acc * x + coef;
    }
    acc
}

fn poly_deriv(c: &[Expr]) -> Vec<Expr> {
    c.iter().enumerate().skip(1).map(|(k, x)| x.scale(Coeff::int(k as i128))).collect()
}

/// Default eigenvalue candidates: small integers, small imaginary units,
/// `±cos(alpha) ± i·sin(alpha)`, and the diagonal entries.
pub fn default_candidates(a: &Mat) -> Vec<Expr> {
    let mut out: Vec<Expr> = (-6..=6).map(Expr::int).collect();
    for k in [1, 2] {
        out.push(Expr::from_coeff(Coeff::i().scale(&crate::expr::rat(k))));
        out.push(Expr::from_coeff(-Coeff::i().scale(&crate::expr::rat(k))));
    }
    let (s, c) = (Expr::param(SIN_ANGLE), Expr::param(COS_ANGLE));
    let is = s.scale(Coeff::i());
    for sign_c in [1, -1] {
        for sign_s in [1, -1] {
            out.push(c.scale(Coeff::int(sign_c)) + is.scale(Coeff::int(sign_s)));
        }
    }
    for (i, row) in a.iter().enumerate() {
        if !row[i].depends_on(0) && !row[i].depends_on(1) && !row[i].depends_on(2) && !row[i].depends_on(3) {
            out.push(row[i].clone());
        }
    }
    out
}

/// Eigenvalues with multiplicity, drawn from `candidates`.
pub fn eigenvalues(a: &Mat, candidates: &[Expr]) -> Result<Vec<Expr>, LinalgError> {
    let n = a.len();
    let p = char_poly(a);
    let mut found: Vec<Expr> = Vec::new();
    let mut seen: Vec<Expr> = Vec::new();
    for cand in candidates {
        if seen.contains(cand) {
            continue;
        }
        seen.push(cand.clone());
        let mut d = p.clone();
        while !d.is_empty() && found.len() < n && poly_eval(&d, cand).is_zero()? {
            found.push(cand.clone());
            d = poly_deriv(&d);
        }
        if found.len() == n {
            return Ok(found);
        }
    }
    Err(LinalgError::EigenvaluesNotFound)
}

/// `exp(u_t · a)` for a matrix `a` that does not depend on `u_t`, by
/// Putzer's method with the given eigenvalues.
pub fn expm(a: &Mat, t: usize, lambdas: &[Expr]) -> Result<Mat, LinalgError> {
    let n = a.len();
    let mut rates: Vec<ParamPoly> = Vec::with_capacity(n);
    for l in lambdas {
        rates.push(l.as_param_poly().ok_or(LinalgError::NonConstantEigenvalue)?);
    }
    let exp_t = |rate: &ParamPoly| {
        let mut lf = LinearForm::zero();
        lf.coord[t] = rate.clone();
        Expr::exp_form(&lf)
    };
    let mut r: Vec<Expr> = Vec::with_capacity(n);
    r.push(exp_t(&rates[0]));
    for k in 1..n {
        let integrand = &exp_t(&rates[k].neg()) * &r[k - 1];
        r.push(exp_t(&rates[k]) * integrand.integrate_coord(t)?);
    }
    let mut p = identity(n);
    let mut out = scale(&p, &r[0]);
    for k in 1..n {
        p = mul(&p, &shift(a, &lambdas[k - 1]));
        out = add(&out, &scale(&p, &r[k]));
    }
    Ok(out)
}
