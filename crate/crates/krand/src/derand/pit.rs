//! Polynomial identity testing over small prime fields: the demo
//! bounded-error algorithm for the derandomization harness.
//!
//! Instances are pairs of arithmetic expressions (constants, variables, `+`,
//! `*`, `^` with small exponents) over GF(p). The randomized test evaluates
//! both sides at a random point; the symbolic normal form provides
//! randomness-free ground truth.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::bits::Bitstring;

#[derive(Debug, Error)]
pub enum PitError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("expression degree {deg} exceeds the Schwartz-Zippel bound (p-1)/3 = {bound}")]
    DegreeTooHigh { deg: u64, bound: u64 },
    #[error("instance line must contain exactly one \" == \" separator")]
    BadSeparator,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(u64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn eval(&self, point: &[u64], p: u64) -> u64 {
        match self {
            Expr::Const(c) => c % p,
            Expr::Var(i) => point[*i] % p,
            Expr::Add(a, b) => (a.eval(point, p) + b.eval(point, p)) % p,
            Expr::Mul(a, b) => a.eval(point, p) * b.eval(point, p) % p,
            Expr::Pow(a, e) => pow_mod(a.eval(point, p), *e as u64, p),
        }
    }
}

pub fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Multivariate polynomial in normal form: exponent vector -> coefficient
/// mod p, zero coefficients dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    pub num_vars: usize,
    pub terms: BTreeMap<Vec<u32>, u64>,
}

impl Poly {
    fn zero(num_vars: usize) -> Self {
        Poly {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    fn constant(num_vars: usize, c: u64, p: u64) -> Self {
        let mut poly = Poly::zero(num_vars);
        if !c.is_multiple_of(p) {
            poly.terms.insert(vec![0; num_vars], c % p);
        }
        poly
    }

    fn var(num_vars: usize, i: usize) -> Self {
        let mut exps = vec![0; num_vars];
        exps[i] = 1;
        let mut poly = Poly::zero(num_vars);
        poly.terms.insert(exps, 1);
        poly
    }

    fn add(&self, other: &Poly, p: u64) -> Poly {
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            let v = out.terms.entry(e.clone()).or_insert(0);
            *v = (*v + c) % p;
            if *v == 0 {
                out.terms.remove(e);
            }
        }
        out
    }

    fn mul(&self, other: &Poly, p: u64) -> Poly {
        let mut out = Poly::zero(self.num_vars);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let v = out.terms.entry(e.clone()).or_insert(0);
                *v = (*v + ca * cb) % p;
                if *v == 0 {
                    out.terms.remove(&e);
                }
            }
        }
        out
    }

    fn pow(&self, e: u32, p: u64) -> Poly {
        let mut acc = Poly::constant(self.num_vars, 1, p);
        for _ in 0..e {
            acc = acc.mul(self, p);
        }
        acc
    }

    pub fn from_expr(expr: &Expr, num_vars: usize, p: u64) -> Poly {
        match expr {
            Expr::Const(c) => Poly::constant(num_vars, *c, p),
            Expr::Var(i) => Poly::var(num_vars, *i),
            Expr::Add(a, b) => {
                Poly::from_expr(a, num_vars, p).add(&Poly::from_expr(b, num_vars, p), p)
            }
            Expr::Mul(a, b) => {
                Poly::from_expr(a, num_vars, p).mul(&Poly::from_expr(b, num_vars, p), p)
            }
            Expr::Pow(a, e) => Poly::from_expr(a, num_vars, p).pow(*e, p),
        }
    }

    pub fn total_degree(&self) -> u64 {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as u64).sum())
            .max()
            .unwrap_or(0)
    }
}

/// A parsed identity-testing instance over GF(p).
#[derive(Debug, Clone)]
pub struct PitInstance {
    pub lhs: Expr,
    pub rhs: Expr,
    pub prime: u64,
    pub num_vars: usize,
    pub var_names: Vec<String>,
    /// Original source line, kept for reports.
    pub source: String,
}

impl PitInstance {
    /// Parse `lhs == rhs` with infix syntax, `^` for powers, explicit `*`.
    /// Variable indices follow the alphabetical order of the names appearing
    /// in the line.
    pub fn parse_line(line: &str, prime: u64) -> Result<PitInstance, PitError> {
        if !is_prime(prime) {
            return Err(PitError::NotPrime(prime));
        }
        let parts: Vec<&str> = line.split(" == ").collect();
        if parts.len() != 2 {
            return Err(PitError::BadSeparator);
        }
        let mut names = collect_names(parts[0])?;
        names.extend(collect_names(parts[1])?);
        names.sort();
        names.dedup();
        let lhs = parse_expr(parts[0], &names)?;
        let rhs = parse_expr(parts[1], &names)?;
        let inst = PitInstance {
            lhs,
            rhs,
            prime,
            num_vars: names.len(),
            var_names: names,
            source: line.trim().to_string(),
        };
        inst.check_degree()?;
        Ok(inst)
    }

    fn check_degree(&self) -> Result<(), PitError> {
        let bound = (self.prime - 1) / 3;
        for side in [&self.lhs, &self.rhs] {
            let deg = Poly::from_expr(side, self.num_vars, self.prime).total_degree();
            if deg > bound {
                return Err(PitError::DegreeTooHigh { deg, bound });
            }
        }
        Ok(())
    }

    /// Bits consumed per evaluation: one `ceil(log2 p)` block per variable.
    pub fn rand_len(&self) -> usize {
        self.num_vars * bits_per_element(self.prime)
    }

    /// Ground truth by symbolic normal form comparison.
    pub fn is_identity(&self) -> bool {
        Poly::from_expr(&self.lhs, self.num_vars, self.prime)
            == Poly::from_expr(&self.rhs, self.num_vars, self.prime)
    }

    /// Decode the random bits into a point, one block per variable in index
    /// order, each block reduced mod p (rejection-free).
    pub fn decode_point(&self, random: &Bitstring) -> Vec<u64> {
        let b = bits_per_element(self.prime);
        assert!(random.len() >= self.rand_len());
        (0..self.num_vars)
            .map(|i| {
                let mut v = 0u64;
                for j in 0..b {
                    v = (v << 1) | random.get(i * b + j) as u64;
                }
                v % self.prime
            })
            .collect()
    }

    /// The Schwartz-Zippel trial: accept iff both sides agree at the decoded
    /// point.
    pub fn eval_trial(&self, random: &Bitstring) -> bool {
        let point = self.decode_point(random);
        self.lhs.eval(&point, self.prime) == self.rhs.eval(&point, self.prime)
    }
}

impl fmt::Display for PitInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.source)
    }
}

pub fn bits_per_element(p: u64) -> usize {
    64 - (p - 1).leading_zeros() as usize
}

/// Parse a whole instance file: one instance per line; blank lines and lines
/// starting with `#` are skipped.
pub fn parse_instances(text: &str, prime: u64) -> Result<Vec<PitInstance>, PitError> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| PitInstance::parse_line(l, prime))
        .collect()
}

fn collect_names(src: &str) -> Result<Vec<String>, PitError> {
    let mut names = Vec::new();
    for tok in tokenize(src)? {
        if let Token::Ident(n) = tok {
            names.push(n);
        }
    }
    Ok(names)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(u64),
    Ident(String),
    Plus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Token>, PitError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ' ' | '\t' => {
                chars.next();
            }
            '+' => {
                chars.next();
                out.push(Token::Plus);
            }
            '*' => {
                chars.next();
                out.push(Token::Star);
            }
            '^' => {
                chars.next();
                out.push(Token::Caret);
            }
            '(' => {
                chars.next();
                out.push(Token::LParen);
            }
            ')' => {
                chars.next();
                out.push(Token::RParen);
            }
            '0'..='9' => {
                let mut n = 0u64;
                while let Some(d) = chars.peek().and_then(|c| c.to_digit(10)) {
                    n = n
                        .checked_mul(10)
                        .and_then(|n| n.checked_add(d as u64))
                        .ok_or_else(|| PitError::Parse("number overflow".into()))?;
                    chars.next();
                }
                out.push(Token::Num(n));
            }
            'a'..='z' => {
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_lowercase() || c.is_ascii_digit() {
                        name.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Token::Ident(name));
            }
            other => return Err(PitError::Parse(format!("unexpected character {other:?}"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    names: &'a [String],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    // expr := term (+ term)*
    fn expr(&mut self) -> Result<Expr, PitError> {
        let mut acc = self.term()?;
        while self.peek() == Some(&Token::Plus) {
            self.next();
            acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
        }
        Ok(acc)
    }

    // term := factor (* factor)*
    fn term(&mut self) -> Result<Expr, PitError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Token::Star) {
            self.next();
            acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
        }
        Ok(acc)
    }

    // factor := atom (^ number)?
    fn factor(&mut self) -> Result<Expr, PitError> {
        let atom = self.atom()?;
        if self.peek() == Some(&Token::Caret) {
            self.next();
            match self.next() {
                Some(Token::Num(e)) => {
                    let e = u32::try_from(e)
                        .map_err(|_| PitError::Parse("exponent too large".into()))?;
                    Ok(Expr::Pow(Box::new(atom), e))
                }
                other => Err(PitError::Parse(format!(
                    "expected an exponent after ^, got {other:?}"
                ))),
            }
        } else {
            Ok(atom)
        }
    }

    fn atom(&mut self) -> Result<Expr, PitError> {
        match self.next() {
            Some(Token::Num(n)) => Ok(Expr::Const(n)),
            Some(Token::Ident(name)) => {
                let idx = self
                    .names
                    .iter()
                    .position(|n| *n == name)
                    .expect("names were collected from the same source");
                Ok(Expr::Var(idx))
            }
            Some(Token::LParen) => {
                let e = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(e),
                    other => Err(PitError::Parse(format!("expected ), got {other:?}"))),
                }
            }
            other => Err(PitError::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

fn parse_expr(src: &str, names: &[String]) -> Result<Expr, PitError> {
    let mut p = Parser {
        tokens: tokenize(src)?,
        pos: 0,
        names,
    };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(PitError::Parse("trailing tokens".into()));
    }
    Ok(e)
}
