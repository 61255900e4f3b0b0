//! Plane-curve germs given by Puiseux data.
//!
//! A branch is stored as a primitive integer-exponent parametrization
//! `γ(w) = (w^n, Σ a_i w^i)` with Gaussian-rational coefficients, exponents
//! `i ≥ n` strictly increasing and `gcd(n, {i}) = 1`. A curve is a reduced
//! multiset of branches. Sheets are the `n` determinations
//! `y_k(x) = Σ a_i ζ_n^{ki} x^{i/n}` of a branch.
//!
//! The text format (one branch per line, `#` comments) is described in the
//! crate README; both series lines `y = x^(3/2) + x^(13/6)` and
//! parametrized lines `param (w^6, w^9 + w^13)` are accepted.

use crate::error::{CurveError, ParseError};
use crate::scalar::{rat_u, GaussianRational, Rational, RootOfUnityTag, TaggedScalar};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

/// One branch of a plane curve germ, transverse to the y-axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    n: u64,
    terms: Vec<(u64, GaussianRational)>,
}

impl Branch {
    /// Build from parametrization data `(w^n, Σ a_i w^i)`, normalizing:
    /// like terms combined, zero coefficients dropped, exponents sorted,
    /// and the pair reduced to primitive form when `gcd(n, {i}) > 1`.
    pub fn new(n: u64, terms: Vec<(u64, GaussianRational)>) -> Result<Branch, CurveError> {
        if n == 0 {
            return Err(CurveError::Invalid("branch multiplicity must be positive".into()));
        }
        let mut merged: Vec<(u64, GaussianRational)> = Vec::new();
        let mut sorted = terms;
        sorted.sort_by_key(|(i, _)| *i);
        for (i, c) in sorted {
            match merged.last_mut() {
                Some((j, acc)) if *j == i => *acc = acc.add(&c),
                _ => merged.push((i, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        if let Some((i, _)) = merged.iter().find(|(i, _)| *i < n) {
            return Err(CurveError::TangentToYAxis(format!(
                "exponent {}/{} is below 1",
                i, n
            )));
        }
        // primitivity reduction
        let mut d = n;
        for (i, _) in &merged {
            d = d.gcd(i);
        }
        let (n, merged) = if d > 1 {
            (n / d, merged.into_iter().map(|(i, c)| (i / d, c)).collect())
        } else {
            (n, merged)
        };
        Ok(Branch { n, terms: merged })
    }

    /// The branch `y = 0`.
    pub fn zero() -> Branch {
        Branch { n: 1, terms: Vec::new() }
    }

    /// Multiplicity of the branch.
    pub fn multiplicity(&self) -> u64 {
        self.n
    }

    /// Parametrization terms `(i, a_i)`, strictly increasing in `i`.
    pub fn terms(&self) -> &[(u64, GaussianRational)] {
        &self.terms
    }

    pub fn coeff(&self, i: u64) -> Option<&GaussianRational> {
        self.terms.iter().find(|(j, _)| *j == i).map(|(_, c)| c)
    }

    /// Support `A = {i : a_i ≠ 0}`.
    pub fn support(&self) -> Vec<u64> {
        self.terms.iter().map(|(i, _)| *i).collect()
    }

    /// Tangent slope: the coefficient of `w^n`, i.e. of `x` (zero if absent,
    /// meaning the branch is tangent to the x-axis).
    pub fn tangent_slope(&self) -> GaussianRational {
        self.coeff(self.n).cloned().unwrap_or_else(GaussianRational::zero)
    }

    /// Essential integer exponents: the `i ∈ A\{n}` at which the running gcd
    /// over `{n} ∪ A` strictly drops.
    pub fn essential_exponents(&self) -> Vec<u64> {
        let mut support: Vec<u64> = self.support();
        if !support.contains(&self.n) {
            support.push(self.n);
        }
        support.sort_unstable();
        let mut out = Vec::new();
        let mut g = 0u64;
        for i in support {
            let next = g.gcd(&i);
            if g != 0 && next < g && i != self.n {
                out.push(i);
            }
            g = next;
        }
        out
    }

    /// Characteristic exponents `i/n` for essential `i`, reduced, increasing.
    pub fn characteristic_exponents(&self) -> Vec<Rational> {
        self.essential_exponents()
            .into_iter()
            .map(|i| rat_u(i, self.n))
            .collect()
    }

    /// Series of sheet `k` as `(x-exponent, tagged coefficient)` pairs,
    /// increasing in exponent: the coefficient of `x^{i/n}` is `a_i ζ_n^{ki}`.
    pub fn sheet_terms(&self, k: u64) -> Vec<(Rational, TaggedScalar)> {
        self.terms
            .iter()
            .map(|(i, a)| {
                let residue = ((k as u128 * *i as u128) % self.n as u128) as u64;
                (
                    rat_u(*i, self.n),
                    TaggedScalar::term(a.clone(), RootOfUnityTag::new(self.n, residue as i64)),
                )
            })
            .collect()
    }

    /// Apply the shear `(x, y) ↦ (x, y + λx)`: adds `λ` to the slope.
    pub fn sheared(&self, lambda: &GaussianRational) -> Branch {
        let mut terms = self.terms.clone();
        match terms.iter_mut().find(|(i, _)| *i == self.n) {
            Some((_, c)) => *c = c.add(lambda),
            None => {
                terms.push((self.n, lambda.clone()));
                terms.sort_by_key(|(i, _)| *i);
            }
        }
        let mut b = Branch { n: self.n, terms };
        b.terms.retain(|(_, c)| !c.is_zero());
        b
    }

    /// Keep only terms with x-exponent `i/n ≤ bound`.
    pub fn truncated(&self, bound: &Rational) -> Branch {
        let kept: Vec<_> = self
            .terms
            .iter()
            .filter(|(i, _)| &rat_u(*i, self.n) <= bound)
            .cloned()
            .collect();
        // truncation may lose primitivity; Branch::new would re-reduce and
        // change the sheet count, which is not wanted here
        Branch { n: self.n, terms: kept }
    }
}

/// Two branches define the same germ iff they have the same multiplicity and
/// one is a conjugate twist of the other: `a'_i = a_i ζ_n^{ki}` for some `k`.
pub fn branches_equal(a: &Branch, b: &Branch) -> bool {
    if a.n != b.n || a.support() != b.support() {
        return false;
    }
    'twist: for k in 0..a.n {
        for ((i, ca), (_, cb)) in a.terms.iter().zip(b.terms.iter()) {
            let residue = ((k as u128 * *i as u128) % a.n as u128) as u64;
            let twisted = TaggedScalar::term(ca.clone(), RootOfUnityTag::new(a.n, residue as i64));
            if !crate::scalar::tagged_equal(&twisted, &TaggedScalar::from_gaussian(cb.clone())) {
                continue 'twist;
            }
        }
        return true;
    }
    false
}

/// A reduced plane curve germ: a nonempty list of pairwise distinct branches.
#[derive(Debug, Clone)]
pub struct Curve {
    branches: Vec<Branch>,
}

impl Curve {
    pub fn new(branches: Vec<Branch>) -> Result<Curve, CurveError> {
        if branches.is_empty() {
            return Err(CurveError::Invalid("curve needs at least one branch".into()));
        }
        for i in 0..branches.len() {
            for j in (i + 1)..branches.len() {
                if branches_equal(&branches[i], &branches[j]) {
                    return Err(CurveError::NonReduced(format!(
                        "branches {} and {} coincide",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Curve { branches })
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Multiplicity μ of the curve: total sheet count.
    pub fn multiplicity(&self) -> u64 {
        self.branches.iter().map(|b| b.n).sum()
    }

    /// All sheets in (branch index, k) lexicographic order.
    pub fn sheets(&self) -> Vec<Sheet> {
        let mut out = Vec::new();
        for (bi, b) in self.branches.iter().enumerate() {
            for k in 0..b.n {
                out.push(Sheet { branch: bi, k });
            }
        }
        out
    }

    pub fn sheet_terms(&self, s: &Sheet) -> Vec<(Rational, TaggedScalar)> {
        self.branches[s.branch].sheet_terms(s.k)
    }

    /// Exponent above which truncating branch `b` does not change the
    /// carrousel tree: the max of its characteristic exponents and of its
    /// coincidence exponents with the other branches (1 when there is
    /// nothing to keep).
    pub fn truncation_exponent(&self, b: usize) -> Rational {
        let mut best = Rational::one();
        for e in self.branches[b].characteristic_exponents() {
            if e > best {
                best = e;
            }
        }
        for other in 0..self.branches.len() {
            if other != b {
                let c = crate::contact::coincidence_exponent(self, b, other);
                if c > best {
                    best = c;
                }
            }
        }
        best
    }

    /// The whole curve truncated branchwise at the truncation exponents.
    pub fn truncated(&self) -> Curve {
        let branches = (0..self.branches.len())
            .map(|b| self.branches[b].truncated(&self.truncation_exponent(b)))
            .collect();
        Curve { branches }
    }

    /// Shear `(x, y) ↦ (x, y + λx)` applied to every branch.
    pub fn sheared(&self, lambda: &GaussianRational) -> Curve {
        Curve {
            branches: self.branches.iter().map(|b| b.sheared(lambda)).collect(),
        }
    }
}

/// One determination of a branch: `y_k(x) = Σ a_i ζ_n^{ki} x^{i/n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Sheet {
    pub branch: usize,
    pub k: u64,
}

// ---------------------------------------------------------------------------
// parsing

/// Raw per-line parse result, before normalization.
pub(crate) enum RawBranch {
    Series(Vec<(Rational, GaussianRational)>),
    Param { n: u64, polys: Vec<Vec<(u64, GaussianRational)>> },
}

pub(crate) struct Scanner {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Scanner {
    pub(crate) fn new(line_text: &str, line_no: usize) -> Self {
        Scanner { chars: line_text.chars().collect(), pos: 0, line: line_no }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError { line: self.line, col: self.pos + 1, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        self.skip_ws();
        let c = self.chars.get(self.pos).copied();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        match self.bump() {
            Some(got) if got == c => Ok(()),
            Some(got) => Err(self.err(format!("expected '{}', found '{}'", c, got))),
            None => Err(self.err(format!("expected '{}', found end of line", c))),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        let rest: String = self.chars[self.pos..].iter().collect();
        if rest.starts_with(kw) {
            self.pos += kw.chars().count();
            true
        } else {
            false
        }
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn parse_uint(&mut self) -> Result<u64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<u64>().map_err(|_| self.err("number out of range"))
    }

    /// `int [ "/" nat ]`, sign already consumed by the caller when present.
    fn parse_rational(&mut self) -> Result<Rational, ParseError> {
        let neg = self.eat('-');
        let num = self.parse_uint()?;
        let den = if self.eat('/') { self.parse_uint()? } else { 1 };
        if den == 0 {
            return Err(self.err("zero denominator"));
        }
        let mut r = rat_u(num, den);
        if neg {
            r = -r;
        }
        Ok(r)
    }

    /// Coefficient: `rational`, `[rational] i`, `(re ± im i)`, `(rational)`
    /// optionally followed by `i` (e.g. `(1/2)i`).
    fn parse_coeff(&mut self) -> Result<GaussianRational, ParseError> {
        if self.eat('(') {
            let first = self.parse_rational()?;
            let v = if self.eat('i') {
                self.expect(')')?;
                GaussianRational::new(Rational::zero(), first)
            } else if self.peek() == Some('+') || self.peek() == Some('-') {
                let neg = self.bump() == Some('-');
                let mag = if matches!(self.peek(), Some('i')) {
                    Rational::one()
                } else {
                    self.parse_rational()?
                };
                self.expect('i')?;
                self.expect(')')?;
                let im = if neg { -mag } else { mag };
                GaussianRational::new(first, im)
            } else {
                self.expect(')')?;
                GaussianRational::new(first, Rational::zero())
            };
            if self.eat('i') {
                return Ok(v.mul(&GaussianRational::i()));
            }
            return Ok(v);
        }
        if self.eat('i') {
            return Ok(GaussianRational::i());
        }
        let r = self.parse_rational()?;
        if self.eat('i') {
            Ok(GaussianRational::new(Rational::zero(), r))
        } else {
            Ok(GaussianRational::new(r, Rational::zero()))
        }
    }

    /// One series term over `x`; returns `(exponent, coefficient)`, where a
    /// bare constant reads as exponent 0 (rejected later by normalization).
    fn parse_series_term(&mut self) -> Result<(Rational, GaussianRational), ParseError> {
        let coeff = if self.peek() == Some('x') {
            GaussianRational::one()
        } else {
            let c = self.parse_coeff()?;
            self.eat('*');
            c
        };
        if self.eat('x') {
            if self.eat('^') {
                let exp = if self.eat('(') {
                    let r = self.parse_rational()?;
                    self.expect(')')?;
                    r
                } else {
                    self.parse_rational()?
                };
                Ok((exp, coeff))
            } else {
                Ok((Rational::one(), coeff))
            }
        } else {
            Ok((Rational::zero(), coeff))
        }
    }

    fn parse_series(&mut self) -> Result<Vec<(Rational, GaussianRational)>, ParseError> {
        let mut terms = Vec::new();
        let mut neg = self.eat('-');
        if !neg {
            self.eat('+');
        }
        loop {
            let (e, mut c) = self.parse_series_term()?;
            if neg {
                c = c.neg();
            }
            terms.push((e, c));
            match self.peek() {
                Some('+') => {
                    self.bump();
                    neg = false;
                }
                Some('-') => {
                    self.bump();
                    neg = true;
                }
                None => break,
                Some(other) => return Err(self.err(format!("unexpected '{}'", other))),
            }
        }
        Ok(terms)
    }

    /// Polynomial in `w` with natural exponents, e.g. `w^9 + 2*w^13`, or the
    /// literal `0`.
    fn parse_poly(&mut self) -> Result<Vec<(u64, GaussianRational)>, ParseError> {
        let mut terms = Vec::new();
        let mut neg = self.eat('-');
        if !neg {
            self.eat('+');
        }
        loop {
            let coeff = if self.peek() == Some('w') {
                GaussianRational::one()
            } else {
                let c = self.parse_coeff()?;
                self.eat('*');
                c
            };
            let exp = if self.eat('w') {
                if self.eat('^') {
                    self.parse_uint()?
                } else {
                    1
                }
            } else {
                // a bare constant is only meaningful as the zero polynomial
                if coeff.is_zero() {
                    0
                } else {
                    return Err(self.err("constant term in parametrization coordinate"));
                }
            };
            let c = if neg { coeff.neg() } else { coeff };
            if !c.is_zero() {
                terms.push((exp, c));
            }
            match self.peek() {
                Some('+') => {
                    self.bump();
                    neg = false;
                }
                Some('-') => {
                    self.bump();
                    neg = true;
                }
                _ => break,
            }
        }
        Ok(terms)
    }

    pub(crate) fn parse_branch_line(&mut self) -> Result<RawBranch, ParseError> {
        if self.eat_keyword("param") {
            self.expect('(')?;
            self.expect('w')?;
            self.expect('^')?;
            let n = self.parse_uint()?;
            if n == 0 {
                return Err(self.err("multiplicity must be positive"));
            }
            let mut polys = Vec::new();
            while self.eat(',') {
                polys.push(self.parse_poly()?);
            }
            self.expect(')')?;
            if !self.at_end() {
                return Err(self.err("trailing input after parametrization"));
            }
            if polys.is_empty() {
                return Err(self.err("parametrization needs at least one coordinate"));
            }
            Ok(RawBranch::Param { n, polys })
        } else if self.eat('y') {
            self.expect('=')?;
            let terms = self.parse_series()?;
            if !self.at_end() {
                return Err(self.err("trailing input after series"));
            }
            Ok(RawBranch::Series(terms))
        } else {
            Err(self.err("expected 'y = ...' or 'param (...)'"))
        }
    }
}

/// Normalize a raw series into a primitive branch. Exponents must be ≥ 1
/// after dropping zero coefficients; `y = 0` yields the zero branch.
pub(crate) fn normalize_series(
    terms: Vec<(Rational, GaussianRational)>,
) -> Result<Branch, CurveError> {
    // combine like exponents first so cancelling inputs are fine
    let mut combined: Vec<(Rational, GaussianRational)> = Vec::new();
    let mut sorted = terms;
    sorted.sort_by(|(a, _), (b, _)| a.cmp(b));
    for (e, c) in sorted {
        match combined.last_mut() {
            Some((f, acc)) if *f == e => *acc = acc.add(&c),
            _ => combined.push((e, c)),
        }
    }
    combined.retain(|(_, c)| !c.is_zero());
    if combined.is_empty() {
        return Ok(Branch::zero());
    }
    for (e, _) in &combined {
        if e < &Rational::one() {
            return Err(CurveError::TangentToYAxis(format!(
                "series exponent {} is below 1",
                crate::scalar::fmt_rat(e)
            )));
        }
    }
    let mut n = BigInt::one();
    for (e, _) in &combined {
        n = n.lcm(e.denom());
    }
    let n_u = n
        .to_u64()
        .ok_or_else(|| CurveError::Invalid("common denominator out of range".into()))?;
    let terms = combined
        .into_iter()
        .map(|(e, c)| {
            let i = (e * Rational::from_integer(n.clone())).to_integer();
            (i.to_u64().expect("positive exponent"), c)
        })
        .collect();
    Branch::new(n_u, terms)
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(idx) => &line[..idx],
        None => line,
    }
}

/// Parse a plane curve in the branch-per-line text format and normalize it.
///
/// Errors are position-annotated syntax errors, "tangent to y-axis" for
/// exponents below 1, and "non-reduced curve" when two lines define the same
/// branch. `param` lines with two or more coordinates belong to space
/// curves and are rejected here.
pub fn parse_curve(text: &str) -> Result<Curve, CurveError> {
    let mut branches = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = strip_comment(raw_line);
        if line.trim().is_empty() {
            continue;
        }
        let mut sc = Scanner::new(line, idx + 1);
        match sc.parse_branch_line()? {
            RawBranch::Series(terms) => branches.push(normalize_series(terms)?),
            RawBranch::Param { n, polys } => {
                if polys.len() > 1 {
                    return Err(CurveError::Invalid(format!(
                        "line {}: space-curve parametrization ({} coordinates) in a plane-curve context",
                        idx + 1,
                        polys.len() + 1
                    )));
                }
                branches.push(Branch::new(n, polys.into_iter().next().unwrap())?);
            }
        }
    }
    Curve::new(branches)
}

// ---------------------------------------------------------------------------
// rendering (inverse of the parser on normalized curves)

fn fmt_exponent(e: &Rational) -> String {
    if e.is_one() {
        "x".to_string()
    } else {
        format!("x^({})", crate::scalar::fmt_rat(e))
    }
}

fn fmt_coeff_prefix(c: &GaussianRational) -> String {
    if *c == GaussianRational::one() {
        String::new()
    } else {
        format!("{}*", c)
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "y = 0");
        }
        let mut out = String::from("y = ");
        for (idx, (i, c)) in self.terms.iter().enumerate() {
            let e = rat_u(*i, self.n);
            // fold a real negative leading coefficient into a minus sign
            let (sign, c_abs) = if c.im.is_zero() && c.re.is_negative() {
                ("-", c.neg())
            } else {
                ("+", c.clone())
            };
            if idx == 0 {
                if sign == "-" {
                    out.push('-');
                }
            } else {
                out.push_str(if sign == "-" { " - " } else { " + " });
            }
            out.push_str(&fmt_coeff_prefix(&c_abs));
            out.push_str(&fmt_exponent(&e));
        }
        write!(f, "{}", out)
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, b) in self.branches.iter().enumerate() {
            if idx > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", b)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn g_int(n: i64) -> GaussianRational {
        GaussianRational::from_int(n)
    }

    /// The running two-branch example `y = x^{3/2} + x^{13/6}, y = x^{7/3}`.
    pub(crate) fn example_curve() -> Curve {
        parse_curve("y = x^(3/2) + x^(13/6)\ny = x^(7/3)").unwrap()
    }

    #[test]
    fn parse_example_curve() {
        let c = example_curve();
        assert_eq!(c.branches().len(), 2);
        let b1 = &c.branches()[0];
        assert_eq!(b1.multiplicity(), 6);
        assert_eq!(b1.terms(), &[(9, g_int(1)), (13, g_int(1))]);
        let b2 = &c.branches()[1];
        assert_eq!(b2.multiplicity(), 3);
        assert_eq!(b2.terms(), &[(7, g_int(1))]);
    }

    #[test]
    fn parse_simple_line() {
        let c = parse_curve("y = 2*x").unwrap();
        let b = &c.branches()[0];
        assert_eq!(b.multiplicity(), 1);
        assert_eq!(b.terms(), &[(1, g_int(2))]);
        // same without the star
        let c2 = parse_curve("y = 2x").unwrap();
        assert_eq!(c2.branches()[0], *b);
    }

    #[test]
    fn reject_tangent_to_y_axis() {
        match parse_curve("y = x^(1/2)") {
            Err(CurveError::TangentToYAxis(_)) => {}
            other => panic!("expected tangency error, got {:?}", other),
        }
    }

    #[test]
    fn normalize_param_primitivity() {
        // (w^4, w^6) reduces by d = 2 to (w^2, w^3)
        let b = Branch::new(4, vec![(6, g_int(1))]).unwrap();
        assert_eq!(b.multiplicity(), 2);
        assert_eq!(b.terms(), &[(3, g_int(1))]);
    }

    #[test]
    fn normalize_mixed_series() {
        // y = 2x + (1/2)i x^(5/2) → n = 2, terms {(2, 2), (5, i/2)}
        let c = parse_curve("y = 2x + (1/2)i x^(5/2)").unwrap();
        let b = &c.branches()[0];
        assert_eq!(b.multiplicity(), 2);
        assert_eq!(b.terms().len(), 2);
        assert_eq!(b.terms()[0], (2, g_int(2)));
        assert_eq!(
            b.terms()[1],
            (5, GaussianRational::new(Rational::zero(), rat(1, 2)))
        );
    }

    #[test]
    fn zero_branch() {
        let c = parse_curve("y = 0").unwrap();
        assert_eq!(c.branches()[0], Branch::zero());
        assert_eq!(c.branches()[0].to_string(), "y = 0");
    }

    #[test]
    fn essential_exponent_examples() {
        // (n=6, A={9,13}): gcd chain 6 → 3 → 1, both drops essential
        let b = Branch::new(6, vec![(9, g_int(1)), (13, g_int(1))]).unwrap();
        assert_eq!(b.essential_exponents(), vec![9, 13]);
        assert_eq!(
            b.characteristic_exponents(),
            vec![rat(3, 2), rat(13, 6)]
        );

        // (n=2, A={3,4}): only 3 is essential
        let b = Branch::new(2, vec![(3, g_int(1)), (4, g_int(5))]).unwrap();
        assert_eq!(b.essential_exponents(), vec![3]);

        // n=1: never any essential exponent
        let b = Branch::new(1, vec![(2, g_int(1)), (7, g_int(3))]).unwrap();
        assert!(b.essential_exponents().is_empty());

        // smooth branch y = 2x
        let b = Branch::new(1, vec![(1, g_int(2))]).unwrap();
        assert!(b.characteristic_exponents().is_empty());
    }

    #[test]
    fn sheet_counts() {
        assert_eq!(example_curve().sheets().len(), 9);
        assert_eq!(parse_curve("y = 2x").unwrap().sheets().len(), 1);
        assert_eq!(parse_curve("y = x^(3/2)").unwrap().sheets().len(), 2);
    }

    #[test]
    fn non_reduced_detection() {
        // conjugate parametrizations define the same branch
        let a = Branch::new(2, vec![(3, g_int(1))]).unwrap();
        let b = Branch::new(2, vec![(3, g_int(-1))]).unwrap();
        assert!(branches_equal(&a, &b));
        match Curve::new(vec![a, b]) {
            Err(CurveError::NonReduced(_)) => {}
            other => panic!("expected non-reduced error, got {:?}", other),
        }
        // the same series twice
        match parse_curve("y = x^2\ny = x^2") {
            Err(CurveError::NonReduced(_)) => {}
            other => panic!("expected non-reduced error, got {:?}", other),
        }
    }

    #[test]
    fn truncation_examples() {
        let c = example_curve();
        assert_eq!(c.truncation_exponent(0), rat(13, 6));
        assert_eq!(c.truncation_exponent(1), rat(7, 3));
        let cusp = parse_curve("y = x^(3/2)").unwrap();
        assert_eq!(cusp.truncation_exponent(0), rat(3, 2));
        let line = parse_curve("y = 2x").unwrap();
        assert_eq!(line.truncation_exponent(0), rat(1, 1));
    }

    #[test]
    fn render_parse_roundtrip() {
        for text in [
            "y = x^(3/2) + x^(13/6)\ny = x^(7/3)",
            "y = 2x + (1/2)i x^(5/2)",
            "y = -x^(7/3)",
            "y = 0\ny = x^(2)",
            "y = (3-2i)*x + x^(4/3)",
        ] {
            let c = parse_curve(text).unwrap();
            let rendered = c.to_string();
            let reparsed = parse_curve(&rendered).unwrap();
            assert_eq!(c.branches(), reparsed.branches(), "roundtrip of {:?}", rendered);
        }
    }

    #[test]
    fn parse_error_positions() {
        match parse_curve("y = x^") {
            Err(CurveError::Parse(e)) => assert_eq!(e.line, 1),
            other => panic!("expected parse error, got {:?}", other),
        }
        match parse_curve("y = x\nz = 1") {
            Err(CurveError::Parse(e)) => assert_eq!(e.line, 2),
            other => panic!("expected parse error, got {:?}", other),
        }
    }

    #[test]
    fn shear_adds_to_slope() {
        let c = parse_curve("y = x^(3/2)").unwrap();
        let s = c.sheared(&g_int(1));
        assert_eq!(s.branches()[0].terms(), &[(2, g_int(1)), (3, g_int(1))]);
        assert_eq!(s.branches()[0].tangent_slope(), g_int(1));
    }
}
