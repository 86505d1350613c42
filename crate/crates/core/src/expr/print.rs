//! Printing in the parser's grammar; `parse(&e.to_string())` rebuilds `e`.

use std::fmt::{self, Write};

use num_traits::{One, Signed};

use super::atom::Atom;
use super::poly::{Monomial, Poly, Rational, Var};
use super::Expr;

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Sym(s) => write!(f, "{s}"),
            Var::Atom(a) => write!(f, "{a}"),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exponent() {
            Some(s) => write!(f, "{}({}, {})", self.head().name(), self.arg(), s),
            None => write!(f, "{}({})", self.head().name(), self.arg()),
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        for (i, (v, e)) in self.factors().iter().enumerate() {
            if i > 0 {
                f.write_char('*')?;
            }
            write!(f, "{v}")?;
            if *e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, m: &Monomial, c: &Rational, first: bool) -> fmt::Result {
    let neg = c.is_negative();
    match (first, neg) {
        (true, true) => f.write_char('-')?,
        (false, true) => f.write_str(" - ")?,
        (false, false) => f.write_str(" + ")?,
        (true, false) => {}
    }
    let a = c.abs();
    if m.is_one() {
        return write!(f, "{a}");
    }
    if !a.is_one() {
        write!(f, "{a}*")?;
    }
    write!(f, "{m}")
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms().iter().enumerate() {
            write_term(f, m, c, i == 0)?;
        }
        Ok(())
    }
}

fn write_factor(f: &mut fmt::Formatter<'_>, p: &Poly, mult: u32) -> fmt::Result {
    if p.len() == 1 {
        write!(f, "{p}")?;
    } else {
        write!(f, "({p})")?;
    }
    if mult > 1 {
        write!(f, "^{mult}")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", self.num);
        }
        if self.num.len() == 1 {
            write!(f, "{}", self.num)?;
        } else {
            write!(f, "({})", self.num)?;
        }
        f.write_char('/')?;
        let wrap = self.den.len() > 1;
        if wrap {
            f.write_char('(')?;
        }
        for (i, (p, m)) in self.den.iter().enumerate() {
            if i > 0 {
                f.write_char('*')?;
            }
            write_factor(f, p, *m)?;
        }
        if wrap {
            f.write_char(')')?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse;

    #[test]
    fn prints_leading_term_first() {
        assert_eq!(parse("c + a*u").unwrap().to_string(), "a*u + c");
        assert_eq!(parse("-3/2*u^2*a + v").unwrap().to_string(), "-3/2*a*u^2 + v");
    }

    #[test]
    fn prints_factored_denominators() {
        let e = parse("u/((a+b)^2*c)").unwrap();
        assert_eq!(e.to_string(), "u/(c*(a + b)^2)");
        assert_eq!(parse("u/a^2").unwrap().to_string(), "u/a^2");
    }

    #[test]
    fn round_trips() {
        for s in [
            "ln(a*u + c)*(a*u + c)/a + a/(2*c)*(v^2 - sigma*v_x^2)",
            "c1*exp(b*u/c) - c2*(b*u + 2*c)",
            "c1*pow(a*u + c, b/a) + c2*(b^2*u + (2*b - a)*c)",
            "-u_txx/(eps - 1)^3",
            "0",
        ] {
            let e = parse(s).unwrap();
            let printed = e.to_string();
            assert_eq!(parse(&printed).unwrap(), e, "{printed}");
        }
    }
}
