use alloc::string::String;
use core::fmt;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ExprError {
    Syntax {
        pos: usize,
        msg: String,
    },
    UnknownIdentifier {
        pos: usize,
        name: String,
    },
    /// exp/sin/cos applied to something outside the linear class.
    NonLinearArgument(String),
    DivisionByZero,
    Unbound(String),
    /// Symbolic and numeric zero verdicts disagree.
    Inconsistent(String),
    NotIntegrable(String),
    Undefined(String),
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprError::Syntax { pos, msg } => write!(f, "syntax error at {pos}: {msg}"),
            ExprError::UnknownIdentifier { pos, name } => {
                write!(f, "unknown identifier `{name}` at {pos}")
            }
            ExprError::NonLinearArgument(s) => write!(f, "argument is not linear in the coordinates: {s}"),
            ExprError::DivisionByZero => write!(f, "division by zero"),
            ExprError::Unbound(s) => write!(f, "unbound symbol `{s}`"),
            ExprError::Inconsistent(s) => write!(f, "symbolic/numeric zero test disagree: {s}"),
            ExprError::NotIntegrable(s) => write!(f, "cannot integrate: {s}"),
            ExprError::Undefined(s) => write!(f, "undefined value: {s}"),
        }
    }
}

impl core::error::Error for ExprError {}
