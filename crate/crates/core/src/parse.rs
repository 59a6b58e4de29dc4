//! Text front end for maps and domains.
//!
//! Maps are rational expressions in `x`: `+ - * / ^`, parentheses, integer
//! literals and implicit multiplication (`2x^3`, `3(x+1)`). Domains combine
//! `Zp` and `B(c, t)` with `+` (union) and `-` (difference); `Qp` selects
//! the whole field.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::domain::CompactDomain;
use crate::error::{Error, Result};
use crate::padic::{Polynomial, Prime, RationalMap};

/// Largest accepted exponent in `x^k`.
pub const MAX_EXPONENT: u32 = 256;

/// Largest degree a power may produce.
pub const MAX_DEGREE: i64 = 1024;

/// Largest accepted |t| in `B(c, t)`; set differences cost work per level.
pub const MAX_LEVEL: i64 = 512;

const MAX_NESTING: usize = 64;

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        offset,
        message: message.into(),
    }
}

struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            src: text.as_bytes(),
            pos: 0,
            depth: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    /// Byte offset of the next token.
    fn offset(&mut self) -> usize {
        self.skip_ws();
        self.pos
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected '{}'", c as char)))
        }
    }

    fn unexpected(&mut self, wanted: &str) -> Error {
        let at = self.pos;
        match self.peek() {
            None => syntax(at, format!("{wanted}, found end of input")),
            Some(c) if c.is_ascii_graphic() => {
                syntax(self.pos, format!("{wanted}, found '{}'", c as char))
            }
            Some(_) => syntax(
                self.pos,
                format!("{wanted}, found byte 0x{:02x}", self.src[self.pos]),
            ),
        }
    }

    fn finish(&mut self) -> Result<()> {
        if self.peek().is_some() {
            Err(self.unexpected("expected end of input"))
        } else {
            Ok(())
        }
    }

    fn digits(&mut self) -> Option<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        (self.pos > start).then(|| {
            (
                start,
                std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits"),
            )
        })
    }

    fn integer(&mut self) -> Result<BigInt> {
        let neg = self.eat(b'-');
        match self.digits() {
            Some((_, d)) => {
                let n: BigInt = d.parse().expect("ascii digits");
                Ok(if neg { -n } else { n })
            }
            None => Err(self.unexpected("expected an integer")),
        }
    }

    fn small_integer(&mut self) -> Result<i64> {
        let at = self.offset();
        let n = self.integer()?;
        i64::try_from(n).map_err(|_| syntax(at, "integer out of range"))
    }

    fn keyword(&mut self, word: &str) -> bool {
        self.skip_ws();
        let end = self.pos + word.len();
        let matches = self.src.get(self.pos..end) == Some(word.as_bytes())
            && !self.src.get(end).is_some_and(u8::is_ascii_alphanumeric);
        if matches {
            self.pos = end;
        }
        matches
    }

    fn nest(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(syntax(self.pos, "expression nested too deeply"));
        }
        Ok(())
    }
}

/// A rational function `num / den` while parsing.
#[derive(Clone)]
struct Frac {
    num: Polynomial,
    den: Polynomial,
}

impl Frac {
    fn poly(p: Polynomial) -> Self {
        Frac {
            num: p,
            den: Polynomial::from_ints(&[1]),
        }
    }

    fn reduced(num: Polynomial, den: Polynomial) -> Self {
        if num.is_zero() {
            return Frac::poly(num);
        }
        let g = Polynomial::gcd(&num, &den);
        Frac {
            num: num.div_rem(&g).0,
            den: den.div_rem(&g).0,
        }
    }

    fn add(&self, o: &Frac) -> Frac {
        Frac::reduced(
            &(&self.num * &o.den) + &(&o.num * &self.den),
            &self.den * &o.den,
        )
    }

    fn neg(&self) -> Frac {
        Frac {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    fn mul(&self, o: &Frac) -> Frac {
        Frac::reduced(&self.num * &o.num, &self.den * &o.den)
    }

    fn div(&self, o: &Frac, offset: usize) -> Result<Frac> {
        if o.num.is_zero() {
            return Err(Error::ZeroDenominator {
                offset: Some(offset),
            });
        }
        Ok(Frac::reduced(&self.num * &o.den, &self.den * &o.num))
    }

    fn degree(&self) -> i64 {
        self.num.degree().max(self.den.degree())
    }

    /// Numerator and denominator stay coprime under powers.
    fn pow(&self, k: u32) -> Frac {
        let power = |base: &Polynomial| {
            let mut acc = Polynomial::from_ints(&[1]);
            for _ in 0..k {
                acc = &acc * base;
            }
            acc
        };
        Frac {
            num: power(&self.num),
            den: power(&self.den),
        }
    }
}

fn expr(c: &mut Cursor) -> Result<Frac> {
    c.nest()?;
    let mut acc = term(c)?;
    loop {
        if c.eat(b'+') {
            acc = acc.add(&term(c)?);
        } else if c.eat(b'-') {
            acc = acc.add(&term(c)?.neg());
        } else {
            break;
        }
    }
    c.depth -= 1;
    Ok(acc)
}

fn starts_primary(c: &mut Cursor) -> bool {
    matches!(c.peek(), Some(b'0'..=b'9' | b'x' | b'('))
}

fn term(c: &mut Cursor) -> Result<Frac> {
    let mut acc = unary(c)?;
    loop {
        if c.eat(b'*') {
            acc = acc.mul(&unary(c)?);
        } else if c.peek() == Some(b'/') {
            c.pos += 1;
            let at = c.offset();
            let rhs = unary(c)?;
            acc = acc.div(&rhs, at)?;
        } else if starts_primary(c) {
            acc = acc.mul(&power(c)?);
        } else {
            break;
        }
    }
    Ok(acc)
}

fn unary(c: &mut Cursor) -> Result<Frac> {
    if c.eat(b'-') {
        c.nest()?;
        let v = unary(c)?.neg();
        c.depth -= 1;
        Ok(v)
    } else if c.eat(b'+') {
        c.nest()?;
        let v = unary(c)?;
        c.depth -= 1;
        Ok(v)
    } else {
        power(c)
    }
}

fn power(c: &mut Cursor) -> Result<Frac> {
    let base = primary(c)?;
    if !c.eat(b'^') {
        return Ok(base);
    }
    let at = c.offset();
    let Some((_, d)) = c.digits() else {
        return Err(c.unexpected("expected a non-negative integer exponent"));
    };
    match d.parse::<u32>() {
        Ok(k) if k <= MAX_EXPONENT && base.degree() * i64::from(k) <= MAX_DEGREE => Ok(base.pow(k)),
        Ok(k) if k <= MAX_EXPONENT => Err(syntax(at, format!("degree above {MAX_DEGREE}"))),
        _ => Err(syntax(at, format!("exponent above {MAX_EXPONENT}"))),
    }
}

fn primary(c: &mut Cursor) -> Result<Frac> {
    match c.peek() {
        Some(b'x') => {
            c.pos += 1;
            Ok(Frac::poly(Polynomial::x()))
        }
        Some(b'(') => {
            c.pos += 1;
            let v = expr(c)?;
            c.expect(b')')?;
            Ok(v)
        }
        Some(b'0'..=b'9') => {
            let (_, d) = c.digits().expect("peeked a digit");
            let n: BigInt = d.parse().expect("ascii digits");
            Ok(Frac::poly(Polynomial::constant(BigRational::from_integer(
                n,
            ))))
        }
        _ => Err(c.unexpected("expected a number, 'x' or '('")),
    }
}

/// Parses a rational expression in `x` into a normalized map.
pub fn parse_map(text: &str, prime: Prime) -> Result<RationalMap> {
    let mut c = Cursor::new(text);
    let f = expr(&mut c)?;
    c.finish()?;
    RationalMap::new(prime, &f.num, &f.den)
}

/// Parses a polynomial in `x`; a non-constant denominator is rejected.
pub fn parse_polynomial(text: &str) -> Result<Polynomial> {
    let mut c = Cursor::new(text);
    let f = expr(&mut c)?;
    c.finish()?;
    if f.den.degree() != 0 {
        return Err(syntax(
            0,
            "expected a polynomial, found a rational function",
        ));
    }
    Ok(f.num.scale(&(BigRational::one() / f.den.coeff(0))))
}

/// Parses `n` or `n/d` with an optional leading minus.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let mut c = Cursor::new(text);
    let v = rational(&mut c)?;
    c.finish()?;
    Ok(v)
}

fn rational(c: &mut Cursor) -> Result<BigRational> {
    let num = c.integer()?;
    if !c.eat(b'/') {
        return Ok(BigRational::from_integer(num));
    }
    let at = c.offset();
    let den = c.integer()?;
    if den.is_zero() {
        return Err(Error::ZeroDenominator { offset: Some(at) });
    }
    Ok(BigRational::new(num, den))
}

/// A parsed `--domain` argument.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DomainSpec {
    Compact(CompactDomain),
    /// `Qp`: the whole field.
    Global,
}

/// Parses the domain grammar; empty results are rejected.
pub fn parse_domain(text: &str, prime: Prime) -> Result<DomainSpec> {
    let mut c = Cursor::new(text);
    if c.keyword("Qp") {
        c.finish()?;
        return Ok(DomainSpec::Global);
    }
    let d = domain_expr(&mut c, prime)?;
    c.finish()?;
    if d.is_empty() {
        return Err(Error::EmptyDomain);
    }
    Ok(DomainSpec::Compact(d))
}

/// Like [`parse_domain`] but rejects `Qp`.
pub fn parse_compact_domain(text: &str, prime: Prime) -> Result<CompactDomain> {
    match parse_domain(text, prime)? {
        DomainSpec::Compact(d) => Ok(d),
        DomainSpec::Global => Err(syntax(0, "expected a compact domain, found Qp")),
    }
}

fn domain_expr(c: &mut Cursor, prime: Prime) -> Result<CompactDomain> {
    c.nest()?;
    let mut acc = domain_term(c, prime)?;
    loop {
        if c.eat(b'+') {
            acc = acc.union(&domain_term(c, prime)?);
        } else if c.eat(b'-') {
            acc = acc.difference(&domain_term(c, prime)?);
        } else {
            break;
        }
    }
    c.depth -= 1;
    Ok(acc)
}

fn domain_term(c: &mut Cursor, prime: Prime) -> Result<CompactDomain> {
    if c.keyword("Zp") {
        return Ok(CompactDomain::integers(prime));
    }
    if c.keyword("B") {
        c.expect(b'(')?;
        let center = rational(c)?;
        c.expect(b',')?;
        let at = c.offset();
        let level = c.small_integer()?;
        if level.abs() > MAX_LEVEL {
            return Err(syntax(
                at,
                format!("ball level outside -{MAX_LEVEL}..={MAX_LEVEL}"),
            ));
        }
        c.expect(b')')?;
        return Ok(CompactDomain::ball(prime, &center, level));
    }
    if c.eat(b'(') {
        let d = domain_expr(c, prime)?;
        c.expect(b')')?;
        return Ok(d);
    }
    Err(c.unexpected("expected 'Zp', 'B(c, t)' or '('"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    #[test]
    fn maps_from_text() {
        let f = parse_map("(x^2 - 1)/x", p(7)).unwrap();
        assert_eq!(f.num(), &Polynomial::from_ints(&[-1, 0, 1]));
        assert_eq!(f.den(), &Polynomial::from_ints(&[0, 1]));

        let f = parse_map("(2x^3 + x^2 + x)/(x^2 + 1)", p(3)).unwrap();
        assert_eq!(f.num(), &Polynomial::from_ints(&[0, 1, 1, 2]));
        assert_eq!(f.den(), &Polynomial::from_ints(&[1, 0, 1]));

        let g = parse_map("x^2/3 - 1/27 x^0 * (1)", p(3)).unwrap();
        assert_eq!(g.num(), &Polynomial::from_ints(&[-1, 0, 9]));

        // common factors cancel
        let h = parse_map("(x^2 - 1)/(x - 1)", p(5)).unwrap();
        assert_eq!(h.num(), &Polynomial::from_ints(&[1, 1]));
        assert_eq!(h, parse_map(" x+1 ", p(5)).unwrap());
        assert_eq!(
            parse_map("-x^2", p(5)).unwrap().num(),
            &Polynomial::from_ints(&[0, 0, -1])
        );
        assert_eq!(
            parse_map("(x+1)(x-1)", p(5)).unwrap().num(),
            &Polynomial::from_ints(&[-1, 0, 1])
        );
    }

    #[test]
    fn map_errors_carry_offsets() {
        assert_eq!(
            parse_map("x + 1/0", p(5)),
            Err(Error::ZeroDenominator { offset: Some(6) })
        );
        assert_eq!(
            parse_map("1/(x - x)", p(5)),
            Err(Error::ZeroDenominator { offset: Some(2) })
        );
        assert!(matches!(
            parse_map("x +", p(5)),
            Err(Error::Syntax { offset: 3, .. })
        ));
        assert!(matches!(
            parse_map("x ^ y", p(5)),
            Err(Error::Syntax { offset: 4, .. })
        ));
        assert!(matches!(
            parse_map("x^1000", p(5)),
            Err(Error::Syntax { offset: 2, .. })
        ));
        assert!(matches!(
            parse_map("((x+1)^20)^200", p(5)),
            Err(Error::Syntax { offset: 11, .. })
        ));
        assert!(matches!(
            parse_map("(x", p(5)),
            Err(Error::Syntax { offset: 2, .. })
        ));
        assert!(matches!(
            parse_map("", p(5)),
            Err(Error::Syntax { offset: 0, .. })
        ));
        assert!(matches!(
            parse_map("x é", p(5)),
            Err(Error::Syntax { offset: 2, .. })
        ));
    }

    #[test]
    fn deep_nesting_is_rejected() {
        let text = "(".repeat(10_000) + "x" + &")".repeat(10_000);
        assert!(matches!(parse_map(&text, p(5)), Err(Error::Syntax { .. })));
        let text = "-".repeat(10_000) + "x";
        assert!(matches!(parse_map(&text, p(5)), Err(Error::Syntax { .. })));
    }

    #[test]
    fn domains_from_text() {
        let d = parse_compact_domain("B(2,-1) + B(5,-1)", p(7)).unwrap();
        assert_eq!(d.decompose(-2).unwrap().len(), 14);

        let d = parse_compact_domain("Zp - B(4,-2) - B(5,-2)", p(3)).unwrap();
        let keys: Vec<String> = d
            .decompose(-2)
            .unwrap()
            .iter()
            .map(|b| b.key().to_string())
            .collect();
        assert_eq!(keys, ["0", "1", "2", "3", "6", "7", "8"]);

        assert_eq!(parse_domain(" Qp ", p(3)), Ok(DomainSpec::Global));
        assert_eq!(parse_domain("Zp - Zp", p(3)), Err(Error::EmptyDomain));
        assert_eq!(
            parse_compact_domain("Zp - (B(0,-1) + B(1,-1)) + B(1/3, 0)", p(3)).unwrap(),
            CompactDomain::ball(p(3), &BigRational::from_integer(2.into()), -1).union(
                &CompactDomain::ball(p(3), &BigRational::new(1.into(), 3.into()), 0)
            )
        );
        assert!(matches!(
            parse_domain("B(1,)", p(3)),
            Err(Error::Syntax { offset: 4, .. })
        ));
        assert!(matches!(
            parse_domain("Zpx", p(3)),
            Err(Error::Syntax { offset: 0, .. })
        ));
        assert_eq!(
            parse_domain("B(1/0, 2)", p(3)),
            Err(Error::ZeroDenominator { offset: Some(4) })
        );
        assert!(matches!(
            parse_domain("Zp - B(0, -100000)", p(3)),
            Err(Error::Syntax { offset: 10, .. })
        ));
    }

    #[test]
    fn rationals() {
        assert_eq!(
            parse_rational("-3/6").unwrap(),
            BigRational::new((-1).into(), 2.into())
        );
        assert!(parse_rational("3/").is_err());
    }
}
