//! Taylor expansion of row symbols.
//!
//! Substituting `t_x = exp(dx d/dx)`, `t_y = exp(dy d/dy)` turns the monomial
//! `c t_x^a t_y^b dx^p dy^q` into
//! `c sum_{m,n} a^m b^n / (m! n!) dx^(m+p) dy^(n+q) d^m/dx^m d^n/dy^n`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::poly::{LaurentPoly, LaurentRow, Rational};
use crate::grid::Component;

/// One term `coeff * dx^px dy^py * d^m/dx^m d^n/dy^n (component)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaylorKey {
    /// Total power of the spacing, `px + py`; sorts terms by order.
    pub order: i32,
    pub px: i32,
    pub py: i32,
    pub component: u8,
    pub m: u32,
    pub n: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TaylorSeries {
    pub terms: BTreeMap<TaylorKey, Rational>,
}

impl TaylorSeries {
    pub fn coeff(&self, component: Component, m: u32, n: u32, px: i32, py: i32) -> Rational {
        let key = TaylorKey { order: px + py, px, py, component: component.index() as u8, m, n };
        self.terms.get(&key).cloned().unwrap_or_else(Rational::zero)
    }

    /// Terms of total spacing power `order`, with `dy = dx`:
    /// `(component, m, n) -> coefficient`.
    pub fn isotropic(&self, order: i32) -> BTreeMap<(Component, u32, u32), Rational> {
        let mut out: BTreeMap<(Component, u32, u32), Rational> = BTreeMap::new();
        for (k, c) in self.terms.iter().filter(|(k, _)| k.order == order) {
            let comp = if k.component == 0 { Component::U } else { Component::V };
            *out.entry((comp, k.m, k.n)).or_insert_with(Rational::zero) += c;
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    pub fn lowest_order(&self) -> Option<i32> {
        self.terms.keys().next().map(|k| k.order)
    }
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

fn ipow(x: i32, e: u32) -> BigInt {
    BigInt::from(x).pow(e)
}

/// Coefficient of `d^m/dx^m d^n/dy^n` in `p`, ignoring units.
pub fn moment(p: &LaurentPoly, m: u32, n: u32) -> Rational {
    let mut s = Rational::zero();
    for ((a, b), c) in p.terms() {
        s += c * Rational::from_integer(ipow(a, m) * ipow(b, n));
    }
    s / Rational::from_integer(factorial(m) * factorial(n))
}

fn expand_into(out: &mut TaylorSeries, p: &LaurentPoly, component: u8, order: i32) {
    if p.is_zero() {
        return;
    }
    let u = p.units();
    let max_deriv = order - u.dx - u.dy;
    for total in 0..=max_deriv.max(-1) {
        for m in 0..=total as u32 {
            let n = total as u32 - m;
            let c = moment(p, m, n);
            if c.is_zero() {
                continue;
            }
            let (px, py) = (m as i32 + u.dx, n as i32 + u.dy);
            out.terms.insert(TaylorKey { order: px + py, px, py, component, m, n }, c);
        }
    }
}

/// Expansion of `row` through total spacing power `order` (at most 8).
pub fn taylor_expand(row: &LaurentRow, order: i32) -> TaylorSeries {
    let order = order.min(8);
    let mut out = TaylorSeries::default();
    expand_into(&mut out, &row.u, 0, order);
    expand_into(&mut out, &row.v, 1, order);
    out
}

fn fmt_d(m: u32, n: u32) -> String {
    let mut s = String::new();
    if m > 0 {
        s += &if m == 1 { String::from("dx") } else { format!("dx^{m}") };
    }
    if n > 0 {
        s += &if n == 1 { String::from("dy") } else { format!("dy^{n}") };
    }
    s
}

impl fmt::Display for TaylorSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (k, c) in &self.terms {
            let comp = if k.component == 0 { "u" } else { "v" };
            let sign = if c.is_negative() { "-" } else { "+" };
            parts.push(format!(
                "{sign} {} Dx^{} Dy^{} d[{}]{comp}",
                c.abs(),
                k.px,
                k.py,
                fmt_d(k.m, k.n)
            ));
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", parts.join(" "))
    }
}
