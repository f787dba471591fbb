//! Canonical text form. Printing a canonical expression and reparsing it
//! yields the same canonical expression.

use std::fmt::Write;

use num::rational::BigRational;
use num::{One, Signed};

use crate::atom::{Atom, Monomial};
use crate::expr::Expr;
use crate::poly::Poly;

pub fn atom_str(a: &Atom) -> String {
    match a {
        Atom::X => "x".to_string(),
        Atom::Jet { var, order } => match order {
            0 => var.to_string(),
            1..=9 => format!("{var}{order}"),
            _ => format!("{var}_{order}"),
        },
        Atom::Param(p) => p.to_string(),
        Atom::Func { name, arg } => format!("{name}({arg})"),
        Atom::Surd(s) => s.to_string(),
        Atom::Hole => "@".to_string(),
    }
}

fn monomial_str(m: &Monomial) -> String {
    let mut out = String::new();
    for (i, (a, e)) in m.0.iter().enumerate() {
        if i > 0 {
            out.push('*');
        }
        out.push_str(&atom_str(a));
        if *e > 1 {
            let _ = write!(out, "^{e}");
        }
    }
    out
}

fn rational_str(q: &BigRational) -> String {
    if q.denom().is_one() {
        format!("{}", q.numer())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn poly_str(p: &Poly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    // Leading term first reads better; terms are stored ascending.
    for (i, (m, c)) in p.terms().iter().rev().enumerate() {
        let neg = c.is_negative();
        let abs = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else if neg {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        if m.is_one() {
            out.push_str(&rational_str(&abs));
        } else if abs.is_one() {
            out.push_str(&monomial_str(m));
        } else {
            let _ = write!(out, "{}*{}", rational_str(&abs), monomial_str(m));
        }
    }
    out
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den().is_one() {
            return write!(f, "{}", poly_str(self.num()));
        }
        write!(f, "({})/({})", poly_str(self.num()), poly_str(self.den()))
    }
}
