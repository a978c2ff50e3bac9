use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number used for every coefficient in canonical form.
pub type Rational = Ratio<i128>;

pub fn rat(n: i128) -> Rational {
    Rational::from_integer(n)
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Gaussian rational `re + i·im`.
///
/// Trigonometric factors are stored as complex exponentials, so canonical
/// coefficients live in Q(i). Expressions produced from the real grammar
/// always come in conjugate pairs and print back as real sin/cos.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Coeff {
    pub re: Rational,
    pub im: Rational,
}

impl Coeff {
    pub const fn new(re: Rational, im: Rational) -> Self {
        Coeff { re, im }
    }

    pub fn real(re: Rational) -> Self {
        Coeff { re, im: Rational::zero() }
    }

    pub fn int(n: i128) -> Self {
        Coeff::real(rat(n))
    }

    pub fn zero() -> Self {
        Coeff::int(0)
    }

    pub fn one() -> Self {
        Coeff::int(1)
    }

    pub fn i() -> Self {
        Coeff { re: Rational::zero(), im: Rational::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Coeff { re: self.re, im: -self.im }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Coeff { re: self.re * r, im: self.im * r }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.re * self.re + self.im * self.im;
        Some(Coeff { re: self.re / n, im: -self.im / n })
    }

    /// Sign in the lexicographic (re, im) group order.
    pub fn sign(&self) -> Ordering {
        match self.re.cmp(&Rational::zero()) {
            Ordering::Equal => self.im.cmp(&Rational::zero()),
            o => o,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }

    pub fn abs_hint(&self) -> f64 {
        rat_to_f64(&self.re.abs()) + rat_to_f64(&self.im.abs())
    }
}

impl Add for Coeff {
    type Output = Coeff;
    fn add(self, o: Coeff) -> Coeff {
        Coeff { re: self.re + o.re, im: self.im + o.im }
    }
}

impl AddAssign for Coeff {
    fn add_assign(&mut self, o: Coeff) {
        self.re += o.re;
        self.im += o.im;
    }
}

impl Sub for Coeff {
    type Output = Coeff;
    fn sub(self, o: Coeff) -> Coeff {
        Coeff { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Mul for Coeff {
    type Output = Coeff;
    fn mul(self, o: Coeff) -> Coeff {
        Coeff { re: self.re * o.re - self.im * o.im, im: self.re * o.im + self.im * o.re }
    }
}

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff { re: -self.re, im: -self.im }
    }
}

impl From<Rational> for Coeff {
    fn from(r: Rational) -> Self {
        Coeff::real(r)
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else {
            write!(f, "({}+{}i)", self.re, self.im)
        }
    }
}
