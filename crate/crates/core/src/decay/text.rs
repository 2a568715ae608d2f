//! Text forms of decay and exponent expressions.
//!
//! ```text
//! expr := const(c) | powerlaw(a) | logpow(p) | explogpow(p) | invloglog
//!       | steptower | steptower(L) | theta(k)
//!       | bluhmB | bluhmB(geom(r)) | bluhmB(c1, c2, ...)
//!       | pow(expr, n) | prod(expr, expr, ...) | abscos(w, expr) | tauexp(tau)
//! tau  := const(c) | abscos(w) | scale(c, tau) | add(tau, tau)
//! ```

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::{BluhmSchedule, DecayError, DecayExpr, TauExpr, DEFAULT_TOWER_LEVELS};

/// Shortest decimal that parses back to the same double; integers lose the `.0`.
struct Num(f64);

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = format!("{:?}", self.0);
        f.write_str(s.strip_suffix(".0").unwrap_or(&s))
    }
}

impl fmt::Display for TauExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauExpr::Const(c) => write!(f, "const({})", Num(*c)),
            TauExpr::AbsCos(w) => write!(f, "abscos({})", Num(*w)),
            TauExpr::Scale(c, t) => write!(f, "scale({},{})", Num(*c), t),
            TauExpr::Add(a, b) => write!(f, "add({a},{b})"),
        }
    }
}

impl fmt::Display for DecayExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecayExpr::Const(c) => write!(f, "const({})", Num(*c)),
            DecayExpr::PowerLaw(a) => write!(f, "powerlaw({})", Num(*a)),
            DecayExpr::LogPower(p) => write!(f, "logpow({})", Num(*p)),
            DecayExpr::ExpLogPower(p) => write!(f, "explogpow({})", Num(*p)),
            DecayExpr::InverseLogLogExponent => f.write_str("invloglog"),
            DecayExpr::StepTower { levels } if *levels == DEFAULT_TOWER_LEVELS => {
                f.write_str("steptower")
            }
            DecayExpr::StepTower { levels } => write!(f, "steptower({levels})"),
            DecayExpr::ThetaK(k) => write!(f, "theta({k})"),
            DecayExpr::BluhmB(s) if *s == BluhmSchedule::default() => f.write_str("bluhmB"),
            DecayExpr::BluhmB(BluhmSchedule::Geometric { ratio }) => {
                write!(f, "bluhmB(geom({}))", Num(*ratio))
            }
            DecayExpr::BluhmB(BluhmSchedule::Finite(c)) => {
                f.write_str("bluhmB(")?;
                for (i, x) in c.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}", Num(*x))?;
                }
                f.write_str(")")
            }
            DecayExpr::Power(e, n) => write!(f, "pow({e},{n})"),
            DecayExpr::Product(cs) => {
                f.write_str("prod(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
            DecayExpr::AbsCosTimes(w, e) => write!(f, "abscos({},{})", Num(*w), e),
            DecayExpr::TauExponent(t) => write!(f, "tauexp({t})"),
            DecayExpr::Custom(c) => write!(f, "custom({})", c.name),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, DecayError> {
        Err(DecayError::Parse {
            position: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), DecayError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn ident(&mut self) -> Result<&'a str, DecayError> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !c.is_ascii_alphanumeric() && c != '_')
            .unwrap_or(rest.len());
        if len == 0 || !rest.as_bytes()[0].is_ascii_alphabetic() {
            return self.err("expected a name");
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn number(&mut self) -> Result<f64, DecayError> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-')))
            .unwrap_or(rest.len());
        match rest[..len].parse::<f64>() {
            Ok(v) if v.is_finite() => {
                self.pos += len;
                Ok(v)
            }
            _ => self.err("expected a finite number"),
        }
    }

    fn integer(&mut self) -> Result<u32, DecayError> {
        let v = self.number()?;
        if v >= 0.0 && v == libm::floor(v) && v <= u32::MAX as f64 {
            Ok(v as u32)
        } else {
            self.err("expected a nonnegative integer")
        }
    }

    fn nonneg(&mut self, what: &str) -> Result<f64, DecayError> {
        let start = self.pos;
        let v = self.number()?;
        if v < 0.0 {
            self.pos = start;
            return self.err(format!("{what} must be nonnegative"));
        }
        Ok(v)
    }

    fn positive(&mut self, what: &str) -> Result<f64, DecayError> {
        let start = self.pos;
        let v = self.number()?;
        if v <= 0.0 {
            self.pos = start;
            return self.err(format!("{what} must be positive"));
        }
        Ok(v)
    }

    fn finish(&mut self) -> Result<(), DecayError> {
        if self.peek().is_some() {
            self.err("trailing input")
        } else {
            Ok(())
        }
    }

    fn expr(&mut self) -> Result<DecayExpr, DecayError> {
        let start = self.pos;
        let name = self.ident()?;
        let e = match name {
            "const" => self.call(|p| Ok(DecayExpr::Const(p.nonneg("constant")?)))?,
            "powerlaw" => self.call(|p| Ok(DecayExpr::PowerLaw(p.positive("exponent")?)))?,
            "logpow" => self.call(|p| Ok(DecayExpr::LogPower(p.positive("exponent")?)))?,
            "explogpow" => self.call(|p| Ok(DecayExpr::ExpLogPower(p.positive("exponent")?)))?,
            "invloglog" => DecayExpr::InverseLogLogExponent,
            "steptower" => {
                if self.peek() == Some('(') {
                    self.call(|p| {
                        let levels = p.integer()?;
                        if levels == 0 {
                            return p.err("tower needs at least one level");
                        }
                        Ok(DecayExpr::StepTower { levels })
                    })?
                } else {
                    DecayExpr::step_tower()
                }
            }
            "theta" => self.call(|p| {
                let k = p.integer()?;
                if k == 0 {
                    return p.err("theta index starts at 1");
                }
                Ok(DecayExpr::ThetaK(k))
            })?,
            "bluhmB" => {
                if self.peek() == Some('(') {
                    self.call(Parser::schedule)?
                } else {
                    DecayExpr::bluhm_default()
                }
            }
            "pow" => self.call(|p| {
                let e = p.expr()?;
                p.expect(',')?;
                let n = p.integer()?;
                if n == 0 {
                    return p.err("power must be at least 1");
                }
                Ok(DecayExpr::Power(Box::new(e), n))
            })?,
            "prod" => self.call(|p| {
                let mut cs = alloc::vec![p.expr()?];
                while p.eat(',') {
                    cs.push(p.expr()?);
                }
                Ok(DecayExpr::Product(cs))
            })?,
            "abscos" => self.call(|p| {
                let w = p.number()?;
                p.expect(',')?;
                Ok(DecayExpr::AbsCosTimes(w, Box::new(p.expr()?)))
            })?,
            "tauexp" => self.call(|p| Ok(DecayExpr::TauExponent(p.tau()?)))?,
            other => {
                self.pos = start;
                return self.err(format!("unknown expression '{other}'"));
            }
        };
        Ok(e)
    }

    fn schedule(&mut self) -> Result<DecayExpr, DecayError> {
        if self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            let start = self.pos;
            let name = self.ident()?;
            if name != "geom" {
                self.pos = start;
                return self.err("expected geom(r) or a coefficient list");
            }
            return self.call(|p| {
                let r = p.positive("ratio")?;
                if r >= 1.0 {
                    return p.err("ratio must be below 1");
                }
                Ok(DecayExpr::BluhmB(BluhmSchedule::Geometric { ratio: r }))
            });
        }
        let mut c: Vec<f64> = alloc::vec![self.nonneg("coefficient")?];
        while self.eat(',') {
            c.push(self.nonneg("coefficient")?);
        }
        if c.iter().all(|&x| x == 0.0) {
            return self.err("schedule has no positive coefficient");
        }
        Ok(DecayExpr::BluhmB(BluhmSchedule::Finite(c)))
    }

    fn call<T>(
        &mut self,
        body: impl FnOnce(&mut Self) -> Result<T, DecayError>,
    ) -> Result<T, DecayError> {
        self.expect('(')?;
        let v = body(self)?;
        self.expect(')')?;
        Ok(v)
    }

    fn tau(&mut self) -> Result<TauExpr, DecayError> {
        let start = self.pos;
        let name = self.ident()?;
        match name {
            "const" => self.call(|p| Ok(TauExpr::Const(p.nonneg("exponent")?))),
            "abscos" => self.call(|p| Ok(TauExpr::AbsCos(p.number()?))),
            "scale" => self.call(|p| {
                let c = p.nonneg("scale")?;
                p.expect(',')?;
                Ok(TauExpr::Scale(c, Box::new(p.tau()?)))
            }),
            "add" => self.call(|p| {
                let a = p.tau()?;
                p.expect(',')?;
                Ok(TauExpr::Add(Box::new(a), Box::new(p.tau()?)))
            }),
            other => {
                self.pos = start;
                self.err(format!("unknown exponent expression '{other}'"))
            }
        }
    }
}

impl FromStr for DecayExpr {
    type Err = DecayError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser::new(s);
        let e = p.expr()?;
        p.finish()?;
        Ok(e)
    }
}

impl FromStr for TauExpr {
    type Err = DecayError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_tau(s)
    }
}

pub fn parse_tau(s: &str) -> Result<TauExpr, DecayError> {
    let mut p = Parser::new(s);
    let t = p.tau()?;
    p.finish()?;
    Ok(t)
}

/// Split a comma separated list of expressions at top-level commas.
pub fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_owned());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_owned());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn parses_the_cli_forms() {
        for s in [
            "powerlaw(0.5)",
            "logpow(1)",
            "explogpow(0.5)",
            "invloglog",
            "steptower",
            "steptower(3)",
            "theta(2)",
            "bluhmB",
            "bluhmB(geom(0.5))",
            "bluhmB(1,0,0.25)",
            "pow(logpow(1),3)",
            "prod(powerlaw(0.5),const(1))",
            "abscos(2,logpow(1))",
            "tauexp(abscos(1))",
            "tauexp(add(scale(0.5,abscos(1)),const(0.1)))",
        ] {
            let e: DecayExpr = s.parse().unwrap();
            assert_eq!(e.to_string(), s);
        }
    }

    #[test]
    fn whitespace_and_errors() {
        let e: DecayExpr = " prod( logpow(1) , theta(1) ) ".parse().unwrap();
        assert_eq!(e.to_string(), "prod(logpow(1),theta(1))");
        for bad in [
            "",
            "logpow",
            "logpow(-1)",
            "pow(logpow(1),0)",
            "theta(0)",
            "foo(1)",
            "logpow(1) x",
            "const(-2)",
        ] {
            assert!(bad.parse::<DecayExpr>().is_err(), "{bad}");
        }
        match "prod(logpow(1),wat)".parse::<DecayExpr>() {
            Err(DecayError::Parse { position, .. }) => assert_eq!(position, 15),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn top_level_split() {
        assert_eq!(
            split_top_level("powerlaw(0.5),const(1)"),
            ["powerlaw(0.5)", "const(1)"]
        );
        assert_eq!(split_top_level("prod(a,b), c"), ["prod(a,b)", "c"]);
    }
}
