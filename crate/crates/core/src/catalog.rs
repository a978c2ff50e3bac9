//! The nine built-in Bianchi models and the errata ledger comparing printed
//! formulas against the forms that pass the residual checks.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_traits::{One, Signed, Zero};

use crate::emfield::{
    admissibility_residual, bianchi_residual, compatibility_residual, field_from_potential, gamma_of, rank3_is_zero, FieldTensor,
    Potential, SymmetryIntegral,
};
use crate::expr::{parse, rat, Coeff, Expr, ExprError, ParamPoly, Rational, COS_ANGLE, SIN_ANGLE};
use crate::geometry::{
    abstract_spatial_metric, invariant_coframe, jacobi_residual, killing_residual, metric_from_coframe, structure_constants_from_frame,
    Coframe, GeometryError, Metric, StructureConstants, VectorField,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BianchiType {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
    IX,
}

pub const ALL_TYPES: [BianchiType; 9] = [
    BianchiType::I,
    BianchiType::II,
    BianchiType::III,
    BianchiType::IV,
    BianchiType::V,
    BianchiType::VI,
    BianchiType::VII,
    BianchiType::VIII,
    BianchiType::IX,
];

impl BianchiType {
    pub fn roman(self) -> &'static str {
        match self {
            BianchiType::I => "I",
            BianchiType::II => "II",
            BianchiType::III => "III",
            BianchiType::IV => "IV",
            BianchiType::V => "V",
            BianchiType::VI => "VI",
            BianchiType::VII => "VII",
            BianchiType::VIII => "VIII",
            BianchiType::IX => "IX",
        }
    }

    /// Position in `I..IX`, zero-based.
    pub fn index(self) -> usize {
        ALL_TYPES.iter().position(|t| *t == self).unwrap()
    }

    pub fn is_solvable(self) -> bool {
        self.index() < 7
    }

    /// `(k, n, ε)` of the shared template `ξ3 = (k u1 + ε u2)∂1 + n u2 ∂2 - ∂3`.
    pub fn template(self, q: Rational) -> Option<(Rational, Rational, Rational)> {
        let (z, o) = (Rational::zero(), Rational::one());
        Some(match self {
            BianchiType::I => (z, z, z),
            BianchiType::II => (z, z, o),
            BianchiType::III => (o, z, z),
            BianchiType::IV => (o, o, o),
            BianchiType::V => (o, o, z),
            BianchiType::VI => (o, q, z),
            _ => return None,
        })
    }
}

impl fmt::Display for BianchiType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.roman())
    }
}

impl FromStr for BianchiType {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_uppercase();
        ALL_TYPES
            .iter()
            .copied()
            .find(|x| x.roman() == t || (x.index() + 1).to_string() == t)
            .ok_or_else(|| CatalogError::InvalidTag(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CatalogError {
    InvalidTag(String),
    ParamOutOfRange(String),
    Geometry(GeometryError),
    Expr(ExprError),
}

impl From<GeometryError> for CatalogError {
    fn from(e: GeometryError) -> Self {
        CatalogError::Geometry(e)
    }
}

impl From<ExprError> for CatalogError {
    fn from(e: ExprError) -> Self {
        CatalogError::Expr(e)
    }
}

impl fmt::Display for CatalogError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogError::InvalidTag(t) => write!(f, "unknown group type '{t}'"),
            CatalogError::ParamOutOfRange(m) => write!(f, "parameter out of range: {m}"),
            CatalogError::Geometry(e) => write!(f, "{e}"),
            CatalogError::Expr(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for CatalogError {}

/// The group VII angle: kept symbolic, or fixed by an exact rational point
/// on the unit circle.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum Angle {
    #[default]
    Symbolic,
    Exact {
        cos: Rational,
        sin: Rational,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelParams {
    /// Group VI exponent, `q ∉ {0, 1}`.
    pub q: Rational,
    pub angle: Angle,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { q: rat(2), angle: Angle::Symbolic }
    }
}

impl ModelParams {
    pub fn validate(&self, tag: BianchiType) -> Result<(), CatalogError> {
        if tag == BianchiType::VI && (self.q.is_zero() || self.q.is_one()) {
            return Err(CatalogError::ParamOutOfRange(format!("q = {} must differ from 0 and 1", self.q)));
        }
        if let (BianchiType::VII, Angle::Exact { cos, sin }) = (tag, &self.angle) {
            if cos * cos + sin * sin != Rational::one() || !sin.is_positive() {
                return Err(CatalogError::ParamOutOfRange(format!(
                    "(cos, sin) = ({cos}, {sin}) is not a point of the open upper unit half-circle"
                )));
            }
        }
        Ok(())
    }

    /// Replaces `cos(alpha)`, `sin(alpha)` by exact values when fixed.
    pub fn specialize(&self, e: &Expr) -> Result<Expr, ExprError> {
        match &self.angle {
            Angle::Symbolic => Ok(e.clone()),
            Angle::Exact { cos, sin } => e
                .substitute_param(COS_ANGLE, &ParamPoly::constant(Coeff::real(*cos)))?
                .substitute_param(SIN_ANGLE, &ParamPoly::constant(Coeff::real(*sin))),
        }
    }

    pub fn parse(&self, s: &str) -> Result<Expr, ExprError> {
        self.specialize(&parse(s)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelDescriptor {
    pub tag: BianchiType,
    pub solvable: bool,
    /// Whether the algebra has the Abelian subalgebra spanned by `∂1, ∂2`.
    pub abelian_subgroup: bool,
    pub constants: &'static str,
}

pub fn list_models() -> Vec<ModelDescriptor> {
    ALL_TYPES
        .iter()
        .map(|&tag| ModelDescriptor {
            tag,
            solvable: tag.is_solvable(),
            abelian_subgroup: tag.is_solvable(),
            constants: match tag {
                BianchiType::I => "all zero",
                BianchiType::II => "C^1_23 = 1",
                BianchiType::III => "C^1_13 = 1",
                BianchiType::IV => "C^1_13 = 1, C^1_23 = 1, C^2_23 = 1",
                BianchiType::V => "C^1_13 = 1, C^2_23 = 1",
                BianchiType::VI => "C^1_13 = 1, C^2_23 = q",
                BianchiType::VII => "C^2_13 = 1, C^1_23 = -1, C^2_23 = 2cos(alpha)",
                BianchiType::VIII => "C^1_12 = 1, C^2_13 = 2, C^3_23 = 1",
                BianchiType::IX => "C^3_12 = 1, C^2_13 = -1, C^1_23 = 1",
            },
        })
        .collect()
}

/// How a printed form is shown to fail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ErrataProbe {
    /// Printed constants `(α, β, γ, C^γ_αβ)`, one-based; fail Jacobi or
    /// disagree with the frame brackets.
    Constants(Vec<(usize, usize, usize, String)>),
    /// Printed potential components `(i, A_i)`; fail admissibility.
    Potential(Vec<(usize, String)>),
    /// Printed field components `(i, j, F_ij)`; fail compatibility,
    /// the Bianchi identity, or `F = dA` with the catalog potential.
    Field(Vec<(usize, usize, String)>),
    /// Printed metric components `(i, j, g_ij)`; fail the Killing equations
    /// or make the metric degenerate.
    Metric(Vec<(usize, usize, String)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrataNote {
    pub location: String,
    pub printed_form: String,
    pub consistent_form: String,
    pub evidence: String,
    pub probe: ErrataProbe,
}

/// Outcome of re-running an erratum's evidence check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ErrataCheck {
    pub printed_fails: bool,
    pub consistent_passes: bool,
}

fn constants_ok(c: &StructureConstants, derived: &StructureConstants) -> Result<bool, ExprError> {
    if !jacobi_residual(c).is_zero() {
        return Ok(false);
    }
    for a in 0..3 {
        for b in 0..3 {
            for g in 0..3 {
                if !(&c.c[a][b][g] - &derived.c[a][b][g]).is_zero()? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn potential_ok(a: &Potential, frame: &[VectorField; 3]) -> Result<bool, ExprError> {
    let f = field_from_potential(a);
    for x in frame {
        for r in admissibility_residual(a, &f, x) {
            if !r.is_zero()? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn field_ok(f: &FieldTensor, a: &Potential, frame: &[VectorField; 3]) -> Result<bool, ExprError> {
    if !rank3_is_zero(&bianchi_residual(f))? || !f.sub(&field_from_potential(a)).is_zero()? {
        return Ok(false);
    }
    for x in frame {
        for row in compatibility_residual(f, x) {
            for r in row {
                if !r.is_zero()? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn metric_ok(g: &Metric, frame: &[VectorField; 3]) -> Result<bool, ExprError> {
    if g.det().is_zero()? {
        return Ok(false);
    }
    for x in frame {
        for row in killing_residual(g, x) {
            for r in row {
                if !r.is_zero()? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

impl ErrataNote {
    pub fn reproduce(&self, m: &BianchiModel) -> Result<ErrataCheck, CatalogError> {
        let p = |s: &str| m.params.parse(s);
        Ok(match &self.probe {
            ErrataProbe::Constants(entries) => {
                let mut e = Vec::with_capacity(entries.len());
                for (a, b, g, v) in entries {
                    e.push((*a, *b, *g, p(v)?));
                }
                let printed = StructureConstants::from_entries(&e);
                ErrataCheck {
                    printed_fails: !constants_ok(&printed, &m.constants)?,
                    consistent_passes: constants_ok(&m.constants, &structure_constants_from_frame(&m.frame)?)?,
                }
            }
            ErrataProbe::Potential(entries) => {
                let mut a = m.potential.clone();
                for (i, v) in entries {
                    a.a[*i] = p(v)?;
                }
                ErrataCheck { printed_fails: !potential_ok(&a, &m.frame)?, consistent_passes: potential_ok(&m.potential, &m.frame)? }
            }
            ErrataProbe::Field(entries) => {
                let mut f = m.field.clone();
                for (i, j, v) in entries {
                    let e = p(v)?;
                    f.f[*j][*i] = -&e;
                    f.f[*i][*j] = e;
                }
                ErrataCheck {
                    printed_fails: !field_ok(&f, &m.potential, &m.frame)?,
                    consistent_passes: field_ok(&m.field, &m.potential, &m.frame)?,
                }
            }
            ErrataProbe::Metric(entries) => {
                let mut g = m.metric.clone();
                for (i, j, v) in entries {
                    let e = p(v)?;
                    g.g[*j][*i] = e.clone();
                    g.g[*i][*j] = e;
                }
                ErrataCheck { printed_fails: !metric_ok(&g, &m.frame)?, consistent_passes: metric_ok(&m.metric, &m.frame)? }
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BianchiModel {
    pub tag: BianchiType,
    pub params: ModelParams,
    pub frame: [VectorField; 3],
    pub constants: StructureConstants,
    /// Invariant one-forms; absent for frames of pointwise rank 2.
    pub coframe: Option<Coframe>,
    pub metric: Metric,
    pub potential: Potential,
    pub field: FieldTensor,
    pub integrals: [SymmetryIntegral; 3],
    pub errata: Vec<ErrataNote>,
}

impl BianchiModel {
    /// Assembles a model from a frame and a potential; everything else is
    /// derived. `e` is the sign of `g_00`.
    pub fn assemble(
        tag: BianchiType,
        params: ModelParams,
        frame: [VectorField; 3],
        potential: Potential,
        e: i8,
    ) -> Result<BianchiModel, CatalogError> {
        let cf = invariant_coframe(&frame)?;
        let metric = metric_from_coframe(&cf, &abstract_spatial_metric(), e);
        Self::assemble_with_metric(tag, params, frame, Some(cf), metric, potential)
    }

    /// Like [`BianchiModel::assemble`] but with a given metric.
    pub fn assemble_with_metric(
        tag: BianchiType,
        params: ModelParams,
        frame: [VectorField; 3],
        coframe: Option<Coframe>,
        metric: Metric,
        potential: Potential,
    ) -> Result<BianchiModel, CatalogError> {
        let constants = structure_constants_from_frame(&frame)?;
        let field = field_from_potential(&potential);
        let integrals = core::array::from_fn(|a| SymmetryIntegral { xi: frame[a].clone(), gamma: gamma_of(&frame[a], &potential) });
        Ok(BianchiModel { tag, params, frame, constants, coframe, metric, potential, field, integrals, errata: Vec::new() })
    }

    pub fn name(&self) -> String {
        format!("G3({})", self.tag)
    }
}

fn frame_strings(tag: BianchiType, q: Rational) -> [[String; 3]; 3] {
    let s = |a: &str, b: &str, c: &str| [a.to_string(), b.to_string(), c.to_string()];
    let (d1, d2) = (s("1", "0", "0"), s("0", "1", "0"));
    match tag {
        BianchiType::VII => [d1, d2, s("-u2", "2*u2*cos(alpha) + u1", "1")],
        BianchiType::VIII => [d2, s("0", "u2", "1"), s("exp(u3)", "u2^2", "2*u2")],
        BianchiType::IX => {
            [d2, s("cos(u2)", "-cos(u1)*sin(u2)/sin(u1)", "sin(u2)/sin(u1)"), s("-sin(u2)", "-cos(u1)*cos(u2)/sin(u1)", "cos(u2)/sin(u1)")]
        }
        _ => {
            let (k, n, eps) = tag.template(q).unwrap();
            [d1, d2, [format!("({k})*u1 + ({eps})*u2"), format!("({n})*u2"), String::from("-1")]]
        }
    }
}

fn potential_strings(tag: BianchiType, q: Rational) -> [String; 3] {
    let s = |a: &str, b: &str, c: &str| [a.to_string(), b.to_string(), c.to_string()];
    match tag {
        BianchiType::I => s("alpha0", "beta0", "gamma0"),
        BianchiType::II => s("alpha0", "alpha0*u3 + beta0", "gamma0"),
        BianchiType::III => s("alpha0*exp(u3)", "beta0", "gamma0"),
        BianchiType::IV => s("alpha0*exp(u3)", "(alpha0*u3 + beta0)*exp(u3)", "gamma0"),
        BianchiType::V => s("alpha0*exp(u3)", "beta0*exp(u3)", "gamma0"),
        BianchiType::VI => [String::from("alpha0*exp(u3)"), format!("beta0*exp(({q})*u3)"), String::from("gamma0")],
        BianchiType::VII => s(
            "(alpha0*sin(alpha + u3*sin(alpha)) + beta0*cos(alpha + u3*sin(alpha)))*exp(-u3*cos(alpha))",
            "(alpha0*sin(u3*sin(alpha)) + beta0*cos(u3*sin(alpha)))*exp(-u3*cos(alpha))",
            "gamma0",
        ),
        BianchiType::VIII => s("alpha0", "(alpha0*u1^2 + 2*beta0*u1 + gamma0)*exp(-u3)", "-(alpha0*u1 + beta0)"),
        BianchiType::IX => s("alpha0*cos(u3) - beta0*sin(u3)", "(alpha0*sin(u3) + beta0*cos(u3))*sin(u1) + gamma0*cos(u1)", "gamma0"),
    }
}

/// Generators of a built-in type.
pub fn frame(tag: BianchiType, params: &ModelParams) -> Result<[VectorField; 3], CatalogError> {
    params.validate(tag)?;
    let fs = frame_strings(tag, params.q);
    let mut frame: [VectorField; 3] = Default::default();
    for (x, s) in frame.iter_mut().zip(&fs) {
        *x = VectorField::new([Expr::zero(), params.parse(&s[0])?, params.parse(&s[1])?, params.parse(&s[2])?]);
    }
    Ok(frame)
}

/// Built-in model with its errata notes.
pub fn get_model(tag: BianchiType, params: &ModelParams) -> Result<BianchiModel, CatalogError> {
    let frame = frame(tag, params)?;
    let ps = potential_strings(tag, params.q);
    let potential = Potential::new([Expr::zero(), params.parse(&ps[0])?, params.parse(&ps[1])?, params.parse(&ps[2])?]);
    let mut m = BianchiModel::assemble(tag, params.clone(), frame, potential, 1)?;
    m.errata = printed_vs_consistent_for(&m);
    Ok(m)
}

/// Errata notes for a built-in type under default parameters.
pub fn printed_vs_consistent(tag: BianchiType) -> Result<Vec<ErrataNote>, CatalogError> {
    Ok(get_model(tag, &ModelParams::default())?.errata)
}

fn note(location: &str, printed: String, consistent: String, evidence: &str, probe: ErrataProbe) -> ErrataNote {
    ErrataNote { location: location.to_string(), printed_form: printed, consistent_form: consistent, evidence: evidence.to_string(), probe }
}

fn printed_vs_consistent_for(m: &BianchiModel) -> Vec<ErrataNote> {
    use BianchiType::*;
    let mut out = Vec::new();
    let tag = m.tag;
    if matches!(tag, II | III | IV | V | VI | VII) {
        let g33 = format!("{}", &m.metric.g[3][3] + &Expr::one());
        out.push(note(
            "appendix metric, time term",
            String::from("... + e*du3^2"),
            String::from("... + e*du0^2"),
            "metric determinant vanishes on the printed form (no du0 term)",
            ErrataProbe::Metric(vec![(0, 0, String::from("0")), (3, 3, g33)]),
        ));
    }
    match tag {
        V | VI => {
            let printed = if tag == V { String::from("a23*u3*exp(u3)") } else { format!("a23*u3*exp(({})*u3)", m.params.q) };
            out.push(note(
                "appendix metric, du2 du3 coefficient",
                format!("g23 = {printed}"),
                format!("g23 = {}", m.metric.g[2][3]),
                "killing_residual for the third generator is nonzero on the printed form",
                ErrataProbe::Metric(vec![(2, 3, printed)]),
            ));
        }
        VII => {
            out.push(note(
                "structure-constant table, group VII line",
                String::from("C^a_13 = delta^a_1, C^a_23 = 2 cos(alpha) delta^a_2"),
                String::from("C^2_13 = 1, C^1_23 = -1, C^2_23 = 2 cos(alpha)"),
                "structure_constants_from_frame on the group VII generators disagrees with the printed line",
                ErrataProbe::Constants(vec![(1, 3, 1, String::from("1")), (2, 3, 2, String::from("2*cos(alpha)"))]),
            ));
            let a1 = "(alpha0*sin(alpha + u3*sin(alpha)) + beta0*cos(alpha + u3*cos(alpha)))*exp(-u3*cos(alpha))";
            let a2 = "(alpha0*sin(u3*sin(alpha)) + beta0*cos(u3*cos(alpha)))*exp(-u3*cos(alpha))";
            out.push(note(
                "group VII potential, trig arguments",
                format!("A1 = {a1}, A2 = {a2}"),
                format!("A1 = {}, A2 = {}", m.potential.a[1], m.potential.a[2]),
                "admissibility_residual for the third generator is nonzero on the printed form",
                ErrataProbe::Potential(vec![(1, String::from(a1)), (2, String::from(a2))]),
            ));
            out.push(note(
                "group VII field tensor, F03",
                String::from("F03 = gamma0"),
                format!("F03 = {}", m.field.f[0][3]),
                "field_from_potential of the catalog potential differs from the printed entry",
                ErrataProbe::Field(vec![(0, 3, String::from("gamma0"))]),
            ));
        }
        VIII => out.push(note(
            "structure constants of group VIII",
            String::from("C^a_23 = -delta^a_3"),
            String::from("C^a_23 = +delta^a_3"),
            "jacobi_residual of the printed constants is nonzero; the frame brackets give +1",
            ErrataProbe::Constants(vec![(1, 2, 1, String::from("1")), (1, 3, 2, String::from("2")), (2, 3, 3, String::from("-1"))]),
        )),
        IX => {
            let printed = ["gamma0 + alpha0*cos(u3) - beta0*sin(u3)", "(alpha0*sin(u3) + beta0*cos(u3))*sin(u1)", "0"];
            out.push(note(
                "group IX potential",
                format!("A1 = {}, A2 = {}, A3 = {}", printed[0], printed[1], printed[2]),
                format!("A1 = {}, A2 = {}, A3 = {}", m.potential.a[1], m.potential.a[2], m.potential.a[3]),
                "admissibility_residual for the second and third generators is nonzero on the printed form",
                ErrataProbe::Potential(printed.iter().enumerate().map(|(i, s)| (i + 1, String::from(*s))).collect()),
            ));
            let f01 = "gamma0' + alpha0'*cos(u3) - beta0'*sin(u3)";
            out.push(note(
                "group IX field tensor, F01 and F03",
                format!("F01 = {f01}, F03 = 0"),
                format!("F01 = {}, F03 = {}", m.field.f[0][1], m.field.f[0][3]),
                "compatibility_residual for the second generator is nonzero on the printed table",
                ErrataProbe::Field(vec![(0, 1, String::from(f01)), (0, 3, String::from("0"))]),
            ));
        }
        _ => {}
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_parse() {
        assert_eq!("vii".parse::<BianchiType>().unwrap(), BianchiType::VII);
        assert_eq!("9".parse::<BianchiType>().unwrap(), BianchiType::IX);
        assert!("X".parse::<BianchiType>().is_err());
    }

    #[test]
    fn nine_descriptors() {
        let l = list_models();
        assert_eq!(l.len(), 9);
        assert_eq!(l.iter().filter(|d| d.solvable).count(), 7);
        assert!(!l[7].abelian_subgroup && !l[8].abelian_subgroup);
    }

    #[test]
    fn bad_params_rejected() {
        let p = ModelParams { q: rat(1), ..Default::default() };
        assert!(matches!(get_model(BianchiType::VI, &p), Err(CatalogError::ParamOutOfRange(_))));
        let p = ModelParams { angle: Angle::Exact { cos: rat(1), sin: rat(1) }, ..Default::default() };
        assert!(get_model(BianchiType::VII, &p).is_err());
    }

    #[test]
    fn type_vi_potential() {
        let m = get_model(BianchiType::VI, &ModelParams::default()).unwrap();
        assert_eq!(m.potential, Potential::parse(["0", "alpha0*exp(u3)", "beta0*exp(2*u3)", "gamma0"]).unwrap());
    }
}
