use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Mul;

use nalgebra::Complex;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::stencil::{Offset, ScalarStencil, Units, VecStencilRow};

pub type Rational = BigRational;

/// Exact conversion of a finite float.
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or(Error::NonRational(x))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Terminating decimal expansion of `r` when its denominator has no prime
/// factors besides 2 and 5, otherwise `"p/q"`.
pub fn rational_to_exact_string(r: &Rational) -> String {
    let (n, d) = (r.numer(), r.denom());
    let (two, five, ten) = (BigInt::from(2), BigInt::from(5), BigInt::from(10));
    let mut rest = d.clone();
    let mut digits = 0usize;
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&rest % &two).is_zero() {
        rest /= &two;
        twos += 1;
    }
    while (&rest % &five).is_zero() {
        rest /= &five;
        fives += 1;
    }
    if !rest.is_one() {
        return format!("{n}/{d}");
    }
    digits += twos.max(fives);
    let scaled = n * ten.pow(digits as u32) / d;
    let neg = scaled.is_negative();
    let mut s = format!("{}", scaled.abs());
    if digits > 0 {
        while s.len() <= digits {
            s.insert(0, '0');
        }
        s.insert(s.len() - digits, '.');
    }
    if neg {
        s.insert(0, '-');
    }
    s
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Laurent polynomial in `t_x, t_y` with rational coefficients, times the
/// formal monomial `dx^a dy^b` recorded in `units`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LaurentPoly {
    terms: BTreeMap<(i32, i32), Rational>,
    units: Units,
}

impl LaurentPoly {
    pub fn zero(units: Units) -> Self {
        Self { terms: BTreeMap::new(), units }
    }

    pub fn one() -> Self {
        Self::monomial(0, 0, Rational::one())
    }

    /// `coeff * t_x^a t_y^b`, unitless.
    pub fn monomial(a: i32, b: i32, coeff: Rational) -> Self {
        let mut p = Self::zero(Units::NONE);
        p.add_term((a, b), coeff);
        p
    }

    pub fn from_terms<I>(terms: I, units: Units) -> Self
    where
        I: IntoIterator<Item = ((i32, i32), Rational)>,
    {
        let mut p = Self::zero(units);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: (i32, i32), c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    /// Symbol of a scalar stencil; every coefficient must be a finite float.
    pub fn from_stencil(st: &ScalarStencil) -> Result<Self> {
        let mut p = Self::zero(st.units());
        for (o, c) in st.entries() {
            p.add_term((o.sx, o.sy), rational_from_f64(c)?);
        }
        Ok(p)
    }

    /// Inverse of [`LaurentPoly::from_stencil`]; exact for dyadic coefficients.
    pub fn to_stencil(&self) -> ScalarStencil {
        ScalarStencil::from_entries(
            self.terms.iter().map(|((a, b), c)| (Offset::new(*a, *b), rational_to_f64(c))),
            self.units,
        )
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn with_units(mut self, units: Units) -> Self {
        self.units = units;
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = ((i32, i32), &Rational)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn coeff(&self, a: i32, b: i32) -> Rational {
        self.terms.get(&(a, b)).cloned().unwrap_or_else(Rational::zero)
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

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.units != other.units {
            return Err(Error::UnitMismatch);
        }
        let mut p = self.clone();
        for (e, c) in &other.terms {
            p.add_term(*e, c.clone());
        }
        Ok(p)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, s: &Rational) -> Self {
        let mut p = Self::zero(self.units);
        for (e, c) in &self.terms {
            p.add_term(*e, c * s);
        }
        p
    }

    /// Multiplication by `t_x^a t_y^b`.
    pub fn shift(&self, a: i32, b: i32) -> Self {
        Self {
            terms: self.terms.iter().map(|((x, y), c)| ((x + a, y + b), c.clone())).collect(),
            units: self.units,
        }
    }

    /// Smallest exponent of each variable (zero for the zero polynomial).
    pub fn min_exponents(&self) -> (i32, i32) {
        let a = self.terms.keys().map(|e| e.0).min().unwrap_or(0);
        let b = self.terms.keys().map(|e| e.1).min().unwrap_or(0);
        (a, b)
    }

    /// `R` with `q * R == self` exactly, or `None` when `q` does not divide.
    pub fn divide_exact(&self, q: &LaurentPoly) -> Result<Option<LaurentPoly>> {
        if q.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let units = Units::new(self.units.dx - q.units.dx, self.units.dy - q.units.dy);
        if self.is_zero() {
            return Ok(Some(Self::zero(units)));
        }
        // Strip monomial factors so both are polynomials not divisible by
        // t_x or t_y; a Laurent quotient exists iff the polynomial one does.
        let (pa, pb) = self.min_exponents();
        let (qa, qb) = q.min_exponents();
        let mut rem = self.shift(-pa, -pb);
        let div = q.shift(-qa, -qb);
        let (&lead, lead_c) = div.terms.iter().next_back().expect("nonzero");
        let mut quot = Self::zero(Units::NONE);
        while let Some((&e, c)) = rem.terms.iter().next_back() {
            if e.0 < lead.0 || e.1 < lead.1 {
                return Ok(None);
            }
            let f = c / lead_c;
            let (da, db) = (e.0 - lead.0, e.1 - lead.1);
            rem = rem.try_sub(&div.shift(da, db).scale(&f).with_units(rem.units))?;
            quot.add_term((da, db), f);
        }
        Ok(Some(quot.shift(pa - qa, pb - qb).with_units(units)))
    }

    /// Numeric value at `t_x = exp(i thx)`, `t_y = exp(i thy)`.
    pub fn eval(&self, thx: f64, thy: f64, dx: f64, dy: f64) -> Complex<f64> {
        let f = self.units.factor(dx, dy);
        let mut s = Complex::new(0.0, 0.0);
        for ((a, b), c) in &self.terms {
            let ph = *a as f64 * thx + *b as f64 * thy;
            let m = rational_to_f64(c) * f;
            s += Complex::new(m * ph.cos(), m * ph.sin());
        }
        s
    }

    /// Value at real arguments, used for divisibility sanity checks.
    pub fn eval_real(&self, tx: &Rational, ty: &Rational) -> Rational {
        let mut s = Rational::zero();
        for ((a, b), c) in &self.terms {
            s += c * pow(tx, *a) * pow(ty, *b);
        }
        s
    }
}

fn pow(x: &Rational, e: i32) -> Rational {
    let mut r = Rational::one();
    for _ in 0..e.unsigned_abs() {
        r *= x;
    }
    if e < 0 {
        r.recip()
    } else {
        r
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, o: &LaurentPoly) -> LaurentPoly {
        let mut p = LaurentPoly::zero(self.units + o.units);
        for ((a, b), c) in &self.terms {
            for ((x, y), d) in &o.terms {
                p.add_term((a + x, b + y), c * d);
            }
        }
        p
    }
}

fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn fmt_power(name: &str, e: i32) -> String {
    match e {
        0 => String::new(),
        1 => format!("*{name}"),
        _ => format!("*{name}^{e}"),
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut parts: Vec<String> = Vec::new();
        for (i, ((a, b), c)) in self.terms.iter().rev().enumerate() {
            let sign = if c.is_negative() { "- " } else if i > 0 { "+ " } else { "" };
            parts.push(format!(
                "{sign}{}{}{}",
                fmt_rational(&c.abs()),
                fmt_power("tx", *a),
                fmt_power("ty", *b)
            ));
        }
        write!(f, "({})", parts.join(" "))?;
        if self.units != Units::NONE {
            write!(f, "{}{}", fmt_power("dx", self.units.dx), fmt_power("dy", self.units.dy))?;
        }
        Ok(())
    }
}

/// Symbol `(P_u, P_v)` of a row operator on `(u, v)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LaurentRow {
    pub u: LaurentPoly,
    pub v: LaurentPoly,
}

impl LaurentRow {
    pub fn new(u: LaurentPoly, v: LaurentPoly) -> Self {
        Self { u, v }
    }

    pub fn from_row(row: &VecStencilRow) -> Result<Self> {
        Ok(Self::new(LaurentPoly::from_stencil(&row.u)?, LaurentPoly::from_stencil(&row.v)?))
    }

    pub fn to_row(&self) -> VecStencilRow {
        VecStencilRow::new(self.u.to_stencil(), self.v.to_stencil())
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self::new(self.u.scale(s), self.v.scale(s))
    }

    pub fn mul_poly(&self, p: &LaurentPoly) -> Self {
        Self::new(&self.u * p, &self.v * p)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        Ok(Self::new(self.u.try_sub(&other.u)?, self.v.try_sub(&other.v)?))
    }

    pub fn eval(&self, thx: f64, thy: f64, dx: f64, dy: f64) -> [Complex<f64>; 2] {
        [self.u.eval(thx, thy, dx, dy), self.v.eval(thx, thy, dx, dy)]
    }
}

impl fmt::Display for LaurentRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u: {}, v: {}", self.u, self.v)
    }
}
