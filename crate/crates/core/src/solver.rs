//! Linear system `L_ξ F = 0` plus the Bianchi identity, its closed-form
//! solution for the solvable types, and potential reconstruction.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::catalog::{self, BianchiType, CatalogError, ModelParams};
use crate::emfield::{algebraic_constraint_residual, bianchi_residual, rank3_is_zero, FieldTensor, Potential, UPPER};
use crate::expr::{Coeff, Expr, ExprError, FuncSymbol, Key, LinearForm, ParamPoly, Poly, Rational};
use crate::geometry::{structure_constants_from_frame, GeometryError, StructureConstants, VectorField};
use crate::linalg::{self, LinalgError, Mat};

#[derive(Clone, Debug, PartialEq)]
pub enum SolverError {
    NonClosing(String),
    Unsupported(BianchiType),
    NoOdeForm(String),
    Stuck(String),
    NotClosed,
    NoWitness(String),
    Linalg(LinalgError),
    Expr(ExprError),
    Catalog(CatalogError),
}

impl From<ExprError> for SolverError {
    fn from(e: ExprError) -> Self {
        SolverError::Expr(e)
    }
}

impl From<LinalgError> for SolverError {
    fn from(e: LinalgError) -> Self {
        SolverError::Linalg(e)
    }
}

impl From<CatalogError> for SolverError {
    fn from(e: CatalogError) -> Self {
        SolverError::Catalog(e)
    }
}

impl From<GeometryError> for SolverError {
    fn from(e: GeometryError) -> Self {
        SolverError::NonClosing(format!("{e}"))
    }
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::NonClosing(m) => write!(f, "frame does not close: {m}"),
            SolverError::Unsupported(t) => write!(f, "type {t} is not solvable by the generic solver"),
            SolverError::NoOdeForm(m) => write!(f, "system is not a constant-coefficient ODE in u3: {m}"),
            SolverError::Stuck(m) => write!(f, "cannot eliminate remaining relations: {m}"),
            SolverError::NotClosed => write!(f, "field tensor violates the Bianchi identity"),
            SolverError::NoWitness(m) => write!(f, "no witness assignment: {m}"),
            SolverError::Linalg(e) => write!(f, "{e}"),
            SolverError::Expr(e) => write!(f, "{e}"),
            SolverError::Catalog(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SolverError {}

pub const UNKNOWNS: [&str; 6] = ["F01", "F02", "F03", "F12", "F13", "F23"];

/// Position of `F_ij` among the unknowns and the sign relating them.
fn slot(i: usize, j: usize) -> Option<(usize, i128)> {
    if i == j {
        return None;
    }
    let (a, b, s) = if i < j { (i, j, 1) } else { (j, i, -1) };
    UPPER.iter().position(|p| *p == (a, b)).map(|u| (u, s))
}

/// `coeff · ∂_deriv F_unknown` (no derivative when `deriv` is `None`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinTerm {
    pub coeff: Expr,
    pub unknown: usize,
    pub deriv: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldEquation {
    pub label: String,
    pub terms: Vec<LinTerm>,
}

impl FieldEquation {
    fn new(label: String) -> Self {
        FieldEquation { label, terms: Vec::new() }
    }

    fn push(&mut self, coeff: Expr, i: usize, j: usize, deriv: Option<usize>) {
        if coeff.is_symbolic_zero() {
            return;
        }
        if let Some((u, s)) = slot(i, j) {
            self.terms.push(LinTerm { coeff: coeff.scale(Coeff::int(s)), unknown: u, deriv });
        }
    }

    /// Merges like terms and drops derivatives along `vanishing`.
    fn simplify(&mut self, vanishing: &[usize]) {
        let mut merged: BTreeMap<(usize, Option<usize>), Expr> = BTreeMap::new();
        for t in self.terms.drain(..) {
            if matches!(t.deriv, Some(d) if vanishing.contains(&d)) {
                continue;
            }
            let e = merged.entry((t.unknown, t.deriv)).or_insert_with(Expr::zero);
            *e = &*e + &t.coeff;
        }
        self.terms = merged
            .into_iter()
            .filter(|(_, c)| !c.is_symbolic_zero())
            .map(|((unknown, deriv), coeff)| LinTerm { coeff, unknown, deriv })
            .collect();
    }

    /// Value of the left-hand side for concrete components.
    pub fn residual(&self, f: &[Expr; 6]) -> Expr {
        let mut s = Expr::zero();
        for t in &self.terms {
            let v = match t.deriv {
                Some(d) => f[t.unknown].diff(d),
                None => f[t.unknown].clone(),
            };
            s = s + &t.coeff * &v;
        }
        s
    }
}

impl fmt::Display for FieldEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.label)?;
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            let d = t.deriv.map(|d| format!(",{d}")).unwrap_or_default();
            if t.coeff == Expr::one() {
                write!(f, "{}{d}", UNKNOWNS[t.unknown])?;
            } else {
                write!(f, "({})*{}{d}", t.coeff, UNKNOWNS[t.unknown])?;
            }
        }
        f.write_str(" = 0")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldSystem {
    pub equations: Vec<FieldEquation>,
    /// Directions `d` with `∂_d F_ij = 0` for every component.
    pub known_vanishing: Vec<usize>,
}

impl FieldSystem {
    pub fn residuals(&self, f: &FieldTensor) -> Vec<Expr> {
        let u = f.upper();
        self.equations.iter().map(|e| e.residual(&u)).collect()
    }
}

/// `L_{ξ_σ} F = 0` for each generator plus the Bianchi identity, with
/// derivatives along translation generators removed.
pub fn build_field_system(c: &StructureConstants, frame: &[VectorField; 3]) -> Result<FieldSystem, SolverError> {
    let derived = structure_constants_from_frame(frame)?;
    for a in 0..3 {
        for b in 0..3 {
            for g in 0..3 {
                if !(&derived.c[a][b][g] - &c.c[a][b][g]).is_zero()? {
                    return Err(SolverError::NonClosing(format!(
                        "bracket of generators {} and {} disagrees with the given constants",
                        a + 1,
                        b + 1
                    )));
                }
            }
        }
    }
    let mut vanishing = Vec::new();
    for x in frame {
        for d in 0..4 {
            if *x == VectorField::coord(d) {
                vanishing.push(d);
            }
        }
    }
    let mut eqs = Vec::new();
    for (s, x) in frame.iter().enumerate() {
        if vanishing.iter().any(|d| *x == VectorField::coord(*d)) {
            continue;
        }
        let dx: [[Expr; 4]; 4] = core::array::from_fn(|i| core::array::from_fn(|k| x.c[k].diff(i)));
        for (i, j) in UPPER {
            let mut e = FieldEquation::new(format!("L{}{i}{j}", s + 1));
            for k in 0..4 {
                e.push(x.c[k].clone(), i, j, Some(k));
                e.push(dx[i][k].clone(), k, j, None);
                e.push(dx[j][k].clone(), i, k, None);
            }
            eqs.push(e);
        }
    }
    for i in 0..4 {
        for j in (i + 1)..4 {
            for k in (j + 1)..4 {
                let mut e = FieldEquation::new(format!("B{i}{j}{k}"));
                e.push(Expr::one(), j, k, Some(i));
                e.push(Expr::one(), k, i, Some(j));
                e.push(Expr::one(), i, j, Some(k));
                eqs.push(e);
            }
        }
    }
    for e in eqs.iter_mut() {
        e.simplify(&vanishing);
    }
    eqs.retain(|e| !e.terms.is_empty());
    Ok(FieldSystem { equations: eqs, known_vanishing: vanishing })
}

/// Field family with free functions of `u0` and free constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionFamily {
    pub field: FieldTensor,
    pub potential: Option<Potential>,
    pub free_functions: Vec<String>,
    pub free_constants: Vec<String>,
}

impl SolutionFamily {
    fn refresh(&mut self) {
        let mut funcs = BTreeSet::new();
        let mut consts = BTreeSet::new();
        for e in self.field.upper() {
            funcs.extend(e.funcs().into_iter().map(|f| f.name));
            consts.extend(e.params().into_iter().filter(|p| is_family_constant(p)));
        }
        self.free_functions = funcs.into_iter().collect();
        self.free_constants = consts.into_iter().collect();
    }

    /// Substitutes free functions and constants.
    pub fn instantiate(&self, funcs: &[(String, Expr)], consts: &[(String, Rational)]) -> Result<FieldTensor, ExprError> {
        self.field.map(|e| {
            let mut out = e.clone();
            for (n, v) in funcs {
                out = out.substitute_func(n, v)?;
            }
            for (n, v) in consts {
                out = out.substitute_param(n, &ParamPoly::constant(Coeff::real(*v)))?;
            }
            Ok(out)
        })
    }
}

impl fmt::Display for SolutionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.field)?;
        if let Some(a) = &self.potential {
            write!(f, "; A = {a}")?;
        }
        write!(f, "; functions [{}]; constants [{}]", self.free_functions.join(", "), self.free_constants.join(", "))
    }
}

fn family_func(u: usize) -> String {
    format!("c{}", u + 1)
}

fn family_constant(k: usize) -> String {
    format!("tc{k}")
}

fn is_family_constant(p: &str) -> bool {
    p.strip_prefix("tc").is_some_and(|r| !r.is_empty() && r.bytes().all(|b| b.is_ascii_digit()))
}

/// Splits an expression that must vanish identically into relations among
/// the family functions: the coefficients of independent coordinate and
/// exponential monomials, as real and imaginary parts.
fn relations(e: &Expr) -> Vec<Expr> {
    let mut groups: BTreeMap<([i32; 4], LinearForm), Poly> = BTreeMap::new();
    for (k, c) in &e.num().terms {
        let mut rest = k.clone();
        rest.coords = [0; 4];
        rest.exp = LinearForm::zero();
        groups.entry((k.coords, k.exp.clone())).or_insert_with(Poly::zero).add_term(rest, *c);
    }
    let half = Coeff::real(Rational::new(1, 2));
    let mut out = Vec::new();
    for p in groups.into_values() {
        let r = Expr::from_poly(p);
        let re = (&r + &r.conj()).scale(half);
        let im = (&r - &r.conj()).scale(Coeff::new(Rational::new(0, 1), Rational::new(-1, 2)));
        for x in [re, im] {
            if !x.is_symbolic_zero() {
                out.push(x);
            }
        }
    }
    out
}

/// Coefficient of the plain (order 0) occurrence of `name`, if it occurs
/// only that way, linearly.
fn plain_coefficient(r: &Expr, name: &str) -> Option<Expr> {
    let mut coef = Poly::zero();
    for (k, c) in &r.num().terms {
        for (f, p) in &k.funcs {
            if f.name != name {
                continue;
            }
            if f.order != 0 || *p != 1 {
                return None;
            }
            let mut rest = k.clone();
            rest.funcs.remove(f);
            coef.add_term(rest, *c);
        }
    }
    if coef.is_zero() || coef.terms.keys().any(|k| !k.funcs.is_empty()) {
        None
    } else {
        Some(Expr::from_poly(coef))
    }
}

struct Elimination {
    field: [Expr; 6],
    relations: Vec<Expr>,
    next_constant: usize,
}

impl Elimination {
    fn substitute(&mut self, name: &str, v: &Expr) -> Result<(), ExprError> {
        for f in self.field.iter_mut() {
            *f = f.substitute_func(name, v)?;
        }
        for r in self.relations.iter_mut() {
            *r = r.substitute_func(name, v)?;
        }
        Ok(())
    }

    fn prune(&mut self) -> Result<(), ExprError> {
        let mut kept = Vec::new();
        for r in self.relations.drain(..) {
            if !r.is_zero()? {
                kept.push(r);
            }
        }
        self.relations = kept;
        Ok(())
    }

    fn step(&mut self) -> Result<bool, SolverError> {
        self.prune()?;
        if self.relations.is_empty() {
            return Ok(false);
        }
        // Solve for a function that occurs undifferentiated; fewest terms first.
        let mut order: Vec<usize> = (0..self.relations.len()).collect();
        order.sort_by_key(|&i| self.relations[i].num().len());
        for &i in &order {
            let r = self.relations[i].clone();
            for f in r.funcs() {
                if let Some(p) = plain_coefficient(&r, &f.name) {
                    let own = Expr::func(&f.name, 0) * &p;
                    let v = (&own - &r).div(&p)?;
                    self.relations.remove(i);
                    self.substitute(&f.name, &v)?;
                    return Ok(true);
                }
            }
        }
        // Otherwise integrate a relation in u0 and add a constant.
        for &i in &order {
            if let Ok(a) = self.relations[i].antiderivative_u0() {
                let t = Expr::param(&family_constant(self.next_constant));
                self.next_constant += 1;
                self.relations[i] = a + t;
                return Ok(true);
            }
        }
        Err(SolverError::Stuck(format!("{}", self.relations[order[0]])))
    }
}

/// Constant matrix `K` with `∂3 F = K F`, read off the system.
fn ode_matrix(sys: &FieldSystem) -> Result<Mat, SolverError> {
    let mut k = linalg::zeros(6);
    let mut have = [false; 6];
    // Lie-derivative rows first; Bianchi rows only fill gaps.
    let mut eqs: Vec<&FieldEquation> = sys.equations.iter().filter(|e| e.label.starts_with('L')).collect();
    eqs.extend(sys.equations.iter().filter(|e| e.label.starts_with('B')));
    for e in eqs {
        let derivs: Vec<&LinTerm> = e.terms.iter().filter(|t| t.deriv.is_some()).collect();
        if derivs.len() != 1 || derivs[0].deriv != Some(3) || have[derivs[0].unknown] {
            continue;
        }
        if e.terms.iter().any(|t| (0..4).any(|i| t.coeff.depends_on(i))) {
            continue;
        }
        let u = derivs[0].unknown;
        let lead = derivs[0].coeff.clone();
        for t in e.terms.iter().filter(|t| t.deriv.is_none()) {
            k[u][t.unknown] = (&k[u][t.unknown] - &t.coeff.div(&lead)?).canonical();
        }
        have[u] = true;
    }
    if let Some(u) = have.iter().position(|h| !h) {
        return Err(SolverError::NoOdeForm(format!("no u3 equation for {}", UNKNOWNS[u])));
    }
    Ok(k)
}

/// General solution of the system of a solvable built-in type: the
/// exponential of the u3 system applied to six functions of `u0`, reduced
/// by the remaining (mixed Bianchi) relations.
pub fn solve_solvable(tag: BianchiType, params: &ModelParams) -> Result<SolutionFamily, SolverError> {
    if !tag.is_solvable() {
        return Err(SolverError::Unsupported(tag));
    }
    let frame = catalog::frame(tag, params)?;
    let c = structure_constants_from_frame(&frame)?;
    let sys = build_field_system(&c, &frame)?;
    solve_system(&sys)
}

/// Solves a system whose generators include `∂1` and `∂2` translations.
pub fn solve_system(sys: &FieldSystem) -> Result<SolutionFamily, SolverError> {
    if !(sys.known_vanishing.contains(&1) && sys.known_vanishing.contains(&2)) {
        return Err(SolverError::NoOdeForm(String::from("u1 and u2 must be ignorable")));
    }
    let k = ode_matrix(sys)?;
    let lambdas = linalg::eigenvalues(&k, &linalg::default_candidates(&k))?;
    let e = linalg::expm(&k, 3, &lambdas)?;
    let init: Vec<Expr> = (0..6).map(|u| Expr::func(&family_func(u), 0)).collect();
    let f = linalg::mul_vec(&e, &init);
    let mut el = Elimination { field: core::array::from_fn(|u| f[u].clone()), relations: Vec::new(), next_constant: 1 };
    for eq in &sys.equations {
        el.relations.extend(relations(&eq.residual(&el.field)));
    }
    let mut guard = 0;
    while el.step()? {
        guard += 1;
        if guard > 64 {
            return Err(SolverError::Stuck(String::from("too many elimination steps")));
        }
    }
    // Free functions entering the u0 components undifferentiated are
    // relabeled as derivatives, so that potentials stay in the class.
    for u in 0..6 {
        let name = family_func(u);
        let plain = el.field[..3].iter().any(|x| x.funcs().contains(&FuncSymbol::new(&name, 0)));
        if plain {
            el.substitute(&name, &Expr::func(&name, 1))?;
        }
    }
    let mut fam = SolutionFamily {
        field: FieldTensor::from_upper(el.field),
        potential: None,
        free_functions: Vec::new(),
        free_constants: Vec::new(),
    };
    fam.refresh();
    Ok(fam)
}

/// Potential with `A_0 = 0` and `dA = F`, integrating along coordinate
/// legs from the origin (`A_3` then carries only the `u0` part).
pub fn reconstruct_potential(f: &FieldTensor) -> Result<Potential, SolverError> {
    if !rank3_is_zero(&bianchi_residual(f))? {
        return Err(SolverError::NotClosed);
    }
    // u0 part: ∂0 P_j = F_0j.
    let p: [Expr; 4] = [Expr::zero(), f.f[0][1].antiderivative_u0()?, f.f[0][2].antiderivative_u0()?, f.f[0][3].antiderivative_u0()?];
    let g = |i: usize, j: usize| -> Expr { &f.f[i][j] - &(p[j].diff(i) - p[i].diff(j)) };
    // Spatial part with a_3 = 0.
    let a1 = g(3, 1).integrate_coord(3)?;
    let a2 = g(3, 2).integrate_coord(3)? + g(1, 2).restrict_coord_zero(3)?.integrate_coord(1)?;
    Ok(Potential::new([Expr::zero(), &p[1] + &a1, &p[2] + &a2, p[3].clone()]))
}

/// Zeroes free constants that violate the algebraic constraints, in both
/// the field family and the potential.
pub fn apply_algebraic_constraints(
    fam: &SolutionFamily,
    frame: &[VectorField; 3],
    c: &StructureConstants,
    a: &Potential,
) -> Result<SolutionFamily, SolverError> {
    let mut field = fam.field.clone();
    let mut pot = a.clone();
    for _ in 0..8 {
        let res = algebraic_constraint_residual(&pot, frame, c);
        let mut offending = BTreeSet::new();
        for row in &res {
            for r in row {
                if !r.is_zero()? {
                    offending.extend(r.params().into_iter().filter(|p| is_family_constant(p)));
                }
            }
        }
        if offending.is_empty() {
            let all_zero = res.iter().flatten().try_fold(true, |acc, r| r.is_zero().map(|z| acc && z))?;
            if !all_zero {
                return Err(SolverError::Stuck(String::from("algebraic constraints fail without free constants")));
            }
            let mut out = SolutionFamily { field, potential: Some(pot), free_functions: Vec::new(), free_constants: Vec::new() };
            out.refresh();
            return Ok(out);
        }
        for name in offending {
            let zero = ParamPoly::zero();
            field = field.map(|e| e.substitute_param(&name, &zero))?;
            pot = pot.map(|e| e.substitute_param(&name, &zero))?;
        }
    }
    Err(SolverError::Stuck(String::from("constraint elimination did not settle")))
}

/// Solve, reconstruct the potential, and apply the algebraic constraints.
pub fn solve_and_constrain(tag: BianchiType, params: &ModelParams) -> Result<SolutionFamily, SolverError> {
    let fam = solve_solvable(tag, params)?;
    let frame = catalog::frame(tag, params)?;
    let c = structure_constants_from_frame(&frame)?;
    let a = reconstruct_potential(&fam.field)?;
    apply_algebraic_constraints(&fam, &frame, &c, &a)
}

/// Free-function and free-constant values that pick one member of a family.
pub type Witness = (Vec<(String, Expr)>, Vec<(String, Rational)>);

/// Assignment of the family's free functions reproducing `target`: each
/// free function is read off the component where it appears alone at
/// `u3 = 0`, and constants are set to zero.
pub fn witness(fam: &SolutionFamily, target: &FieldTensor) -> Result<Witness, SolverError> {
    let at0: Vec<Expr> = fam.field.upper().iter().map(|e| e.restrict_coord_zero(3)).collect::<Result<_, _>>()?;
    let tgt: Vec<Expr> = target.upper().iter().map(|e| e.restrict_coord_zero(3)).collect::<Result<_, _>>()?;
    let mut funcs = Vec::new();
    for name in &fam.free_functions {
        let mut found = None;
        for (u, e) in at0.iter().enumerate() {
            if let Some(order) = lone_function(e, name) {
                let mut v = tgt[u].clone();
                for _ in 0..order {
                    v = v.antiderivative_u0()?;
                }
                found = Some(v);
                break;
            }
        }
        let v = found.ok_or_else(|| SolverError::NoWitness(format!("{name} does not appear alone at u3 = 0")))?;
        funcs.push((name.clone(), v));
    }
    let consts = fam.free_constants.iter().map(|n| (n.clone(), Rational::new(0, 1))).collect();
    Ok((funcs, consts))
}

/// `Some(m)` when `e` is exactly the m-th derivative of `name`.
fn lone_function(e: &Expr, name: &str) -> Option<u32> {
    let (k, c) = e.num().single()?;
    if !e.den().is_empty() || *c != Coeff::one() || k.funcs.len() != 1 {
        return None;
    }
    let (f, p) = k.funcs.iter().next()?;
    let bare = Key { funcs: BTreeMap::new(), ..k.clone() };
    (f.name == name && *p == 1 && bare == Key::one()).then_some(f.order)
}

impl fmt::Display for FieldSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.known_vanishing.is_empty() {
            let d: Vec<String> = self.known_vanishing.iter().map(|d| d.to_string()).collect();
            writeln!(f, "vanishing derivatives along u{}", d.join(", u"))?;
        }
        for e in &self.equations {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}
