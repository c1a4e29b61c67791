//! Supercommutative polynomials in the matrix-entry symbols X_{ij} and X*_{ij}.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::grassmann::{Coefficient, Conjugation, GrassmannElement};
use crate::groups::{GroupKind, GroupSpec};
use crate::supermatrix::{MatrixError, SuperMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error("symbol {0} is not in the alphabet")]
    AlphabetMismatch(String),
    #[error("polynomials over different alphabets")]
    DifferentAlphabets,
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// X_{row,col} (or X*_{row,col} when `adjoint`), zero-based indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    pub adjoint: bool,
    pub row: usize,
    pub col: usize,
}

impl Symbol {
    pub fn entry(row: usize, col: usize) -> Self {
        Self { adjoint: false, row, col }
    }

    pub fn adjoint_entry(row: usize, col: usize) -> Self {
        Self { adjoint: true, row, col }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = if self.adjoint { "Xs" } else { "X" };
        write!(f, "{name}[{},{}]", self.row + 1, self.col + 1)
    }
}

/// Symbols available for a supermatrix with even size `even_dim` and odd size `odd_dim`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    pub even_dim: usize,
    pub odd_dim: usize,
    pub adjoint: bool,
}

impl Alphabet {
    pub fn for_spec(spec: &GroupSpec) -> Self {
        Self {
            even_dim: spec.even_dim,
            odd_dim: spec.odd_dim,
            adjoint: !matches!(spec.kind, GroupKind::Orthosymplectic { .. }),
        }
    }

    pub fn size(&self) -> usize {
        self.even_dim + self.odd_dim
    }

    /// [row] + [col] mod 2.
    pub fn is_odd(&self, symbol: &Symbol) -> bool {
        (symbol.row >= self.even_dim) ^ (symbol.col >= self.even_dim)
    }

    pub fn contains(&self, symbol: &Symbol) -> bool {
        symbol.row < self.size() && symbol.col < self.size() && (self.adjoint || !symbol.adjoint)
    }

    /// All symbols, in canonical order.
    pub fn symbols(&self) -> Vec<Symbol> {
        let size = self.size();
        let kinds: &[bool] = if self.adjoint { &[false, true] } else { &[false] };
        kinds
            .iter()
            .flat_map(|&adjoint| (0..size).flat_map(move |row| (0..size).map(move |col| Symbol { adjoint, row, col })))
            .collect()
    }
}

/// Sorted symbol powers; odd symbols carry exponent 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(Symbol, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Self(Vec::new())
    }

    pub fn powers(&self) -> &[(Symbol, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    /// The monomial as a symbol sequence, each symbol repeated by its exponent.
    pub fn sequence(&self) -> Vec<Symbol> {
        self.0.iter().flat_map(|&(s, e)| std::iter::repeat_n(s, e as usize)).collect()
    }

    pub fn exponent(&self, symbol: &Symbol) -> u32 {
        self.0.iter().find(|(s, _)| s == symbol).map_or(0, |(_, e)| *e)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, (symbol, exponent)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            write!(f, "{symbol}")?;
            if *exponent > 1 {
                write!(f, "^{exponent}")?;
            }
        }
        Ok(())
    }
}

/// Sorts a symbol sequence with Koszul signs. Returns `None` when an odd
/// symbol repeats, otherwise `(negative, canonical monomial)`.
pub fn normalize(alphabet: &Alphabet, sequence: &[Symbol]) -> Option<(bool, Monomial)> {
    let mut items = sequence.to_vec();
    let mut negative = false;
    for i in 1..items.len() {
        let mut j = i;
        while j > 0 && items[j - 1] > items[j] {
            if alphabet.is_odd(&items[j - 1]) && alphabet.is_odd(&items[j]) {
                negative = !negative;
            }
            items.swap(j - 1, j);
            j -= 1;
        }
    }
    let mut powers: Vec<(Symbol, u32)> = Vec::new();
    for symbol in items {
        match powers.last_mut() {
            Some((last, exponent)) if *last == symbol => {
                if alphabet.is_odd(&symbol) {
                    return None;
                }
                *exponent += 1;
            }
            _ => powers.push((symbol, 1)),
        }
    }
    Some((negative, Monomial(powers)))
}

/// Element of the free supercommutative algebra on an alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperPolynomial<C> {
    alphabet: Alphabet,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coefficient> SuperPolynomial<C> {
    pub fn zero(alphabet: Alphabet) -> Self {
        Self { alphabet, terms: BTreeMap::new() }
    }

    pub fn constant(alphabet: Alphabet, value: C) -> Self {
        let mut out = Self::zero(alphabet);
        out.add_term(Monomial::one(), value);
        out
    }

    pub fn one(alphabet: Alphabet) -> Self {
        Self::constant(alphabet, C::one())
    }

    pub fn symbol(alphabet: Alphabet, symbol: Symbol) -> Result<Self, SymbolError> {
        Self::from_sequence(alphabet, &[symbol], C::one())
    }

    /// `value` times the ordered product of `sequence`.
    pub fn from_sequence(alphabet: Alphabet, sequence: &[Symbol], value: C) -> Result<Self, SymbolError> {
        if let Some(bad) = sequence.iter().find(|s| !alphabet.contains(s)) {
            return Err(SymbolError::AlphabetMismatch(bad.to_string()));
        }
        let mut out = Self::zero(alphabet);
        if let Some((negative, monomial)) = normalize(&alphabet, sequence) {
            out.add_term(monomial, if negative { -value } else { value });
        }
        Ok(out)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn coefficient(&self, monomial: &Monomial) -> C {
        self.terms.get(monomial).cloned().unwrap_or_else(C::zero)
    }

    fn add_term(&mut self, monomial: Monomial, value: C) {
        if value.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&monomial) {
            Some(existing) => existing + value,
            None => value,
        };
        if !sum.is_zero() {
            self.terms.insert(monomial, sum);
        }
    }

    fn same_alphabet(&self, other: &Self) -> Result<(), SymbolError> {
        if self.alphabet == other.alphabet {
            Ok(())
        } else {
            Err(SymbolError::DifferentAlphabets)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, SymbolError> {
        self.same_alphabet(other)?;
        let mut out = self.clone();
        for (monomial, value) in &other.terms {
            out.add_term(monomial.clone(), value.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, SymbolError> {
        self.try_add(&other.scale(&-C::one()))
    }

    pub fn scale(&self, factor: &C) -> Self {
        let mut out = Self::zero(self.alphabet);
        for (monomial, value) in &self.terms {
            out.add_term(monomial.clone(), value.clone() * factor.clone());
        }
        out
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, SymbolError> {
        self.same_alphabet(other)?;
        let mut out = Self::zero(self.alphabet);
        for (left, a) in &self.terms {
            for (right, b) in &other.terms {
                let mut sequence = left.sequence();
                sequence.extend(right.sequence());
                if let Some((negative, monomial)) = normalize(&self.alphabet, &sequence) {
                    let value = a.clone() * b.clone();
                    out.add_term(monomial, if negative { -value } else { value });
                }
            }
        }
        Ok(out)
    }

    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> SuperPolynomial<D> {
        let mut out = SuperPolynomial::zero(self.alphabet);
        for (monomial, value) in &self.terms {
            out.add_term(monomial.clone(), f(value));
        }
        out
    }

    /// Parity of each term: `Some(odd)` if homogeneous.
    pub fn parity(&self) -> Option<bool> {
        let mut parities =
            self.terms.keys().map(|m| m.powers().iter().filter(|(s, _)| self.alphabet.is_odd(s)).count() % 2 == 1);
        let first = parities.next().unwrap_or(false);
        parities.all(|p| p == first).then_some(first)
    }

    /// f(X, X*) with X* the superadjoint of `matrix` under `convention`.
    pub fn evaluate(
        &self,
        matrix: &SuperMatrix<C>,
        convention: &Conjugation,
    ) -> Result<GrassmannElement<C>, SymbolError> {
        Evaluator::new(&self.alphabet, matrix, convention)?.evaluate(self)
    }
}

impl<C: Coefficient> fmt::Display for SuperPolynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (monomial, value)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            let text = value.render();
            match (text.as_str(), monomial.degree()) {
                (_, 0) => write!(f, "{text}")?,
                ("1", _) => write!(f, "{monomial}")?,
                _ if text.contains(['+', 'i']) || text[1..].contains('-') => write!(f, "({text})*{monomial}")?,
                _ => write!(f, "{text}*{monomial}")?,
            }
        }
        Ok(())
    }
}

/// Cached entries of X and X* for evaluating many polynomials at one point.
pub struct Evaluator<C> {
    alphabet: Alphabet,
    entries: SuperMatrix<C>,
    adjoint: Option<SuperMatrix<C>>,
}

impl<C: Coefficient> Evaluator<C> {
    pub fn new(alphabet: &Alphabet, matrix: &SuperMatrix<C>, convention: &Conjugation) -> Result<Self, SymbolError> {
        if matrix.even_dim() != alphabet.even_dim || matrix.odd_dim() != alphabet.odd_dim {
            return Err(SymbolError::AlphabetMismatch(format!(
                "matrix of size {}|{}",
                matrix.even_dim(),
                matrix.odd_dim()
            )));
        }
        let adjoint = if alphabet.adjoint { Some(matrix.superadjoint(convention)?) } else { None };
        Ok(Self { alphabet: *alphabet, entries: matrix.clone(), adjoint })
    }

    pub fn num_generators(&self) -> usize {
        self.entries.num_generators()
    }

    pub fn value(&self, symbol: &Symbol) -> &GrassmannElement<C> {
        match (symbol.adjoint, &self.adjoint) {
            (true, Some(adjoint)) => adjoint.get(symbol.row, symbol.col),
            _ => self.entries.get(symbol.row, symbol.col),
        }
    }

    pub fn monomial(&self, monomial: &Monomial) -> GrassmannElement<C> {
        let mut out = GrassmannElement::one(self.num_generators());
        for (symbol, exponent) in monomial.powers() {
            let value = self.value(symbol);
            for _ in 0..*exponent {
                out = &out * value;
            }
        }
        out
    }

    pub fn evaluate(&self, polynomial: &SuperPolynomial<C>) -> Result<GrassmannElement<C>, SymbolError> {
        if polynomial.alphabet != self.alphabet {
            return Err(SymbolError::DifferentAlphabets);
        }
        let mut out = GrassmannElement::zero(self.num_generators());
        for (monomial, value) in polynomial.terms() {
            out = &out + &self.monomial(monomial).scale(value);
        }
        Ok(out)
    }
}

struct Parser<'a> {
    text: &'a str,
    position: usize,
}

impl<'a> Parser<'a> {
    fn error<T>(&self, message: impl Into<String>) -> Result<T, SymbolError> {
        Err(SymbolError::Parse { position: self.position, message: message.into() })
    }

    fn skip_space(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.position += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.position..].chars().next()
    }

    fn eat(&mut self, expected: char) -> bool {
        self.skip_space();
        if self.peek() == Some(expected) {
            self.position += expected.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, expected: char) -> Result<(), SymbolError> {
        if self.eat(expected) {
            Ok(())
        } else {
            self.error(format!("expected '{expected}'"))
        }
    }

    fn number(&mut self) -> Result<i64, SymbolError> {
        self.skip_space();
        let start = self.position;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.position += 1;
        }
        if start == self.position {
            return self.error("expected a number");
        }
        self.text[start..self.position].parse().or_else(|_| self.error("number too large"))
    }

    fn symbol(&mut self) -> Result<Symbol, SymbolError> {
        self.skip_space();
        let rest = &self.text[self.position..];
        let adjoint = if rest.starts_with("Xs") {
            self.position += 2;
            true
        } else if rest.starts_with('X') {
            self.position += 1;
            false
        } else {
            return self.error("expected X[i,j] or Xs[i,j]");
        };
        self.expect('[')?;
        let row = self.number()?;
        self.expect(',')?;
        let col = self.number()?;
        self.expect(']')?;
        if row < 1 || col < 1 {
            return self.error("indices are 1-based");
        }
        Ok(Symbol { adjoint, row: row as usize - 1, col: col as usize - 1 })
    }

    /// factor := number ('/' number)? | symbol ('^' number)?
    fn factor(&mut self, sequence: &mut Vec<Symbol>, scale: &mut (i64, i64)) -> Result<(), SymbolError> {
        self.skip_space();
        if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            let num = self.number()?;
            let den = if self.eat('/') { self.number()? } else { 1 };
            if den == 0 {
                return self.error("zero denominator");
            }
            scale.0 = scale.0.checked_mul(num).map_or_else(|| self.error("coefficient overflow"), Ok)?;
            scale.1 = scale.1.checked_mul(den).map_or_else(|| self.error("coefficient overflow"), Ok)?;
            return Ok(());
        }
        let symbol = self.symbol()?;
        let exponent = if self.eat('^') { self.number()? } else { 1 };
        for _ in 0..exponent {
            sequence.push(symbol);
        }
        Ok(())
    }
}

/// Parses `X[1,1]^2 * Xs[2,1] - 1/2 * X[1,2]`; factors multiply left to right,
/// which fixes the sign of odd products.
pub fn parse_polynomial<C: Coefficient>(alphabet: Alphabet, text: &str) -> Result<SuperPolynomial<C>, SymbolError> {
    let mut parser = Parser { text, position: 0 };
    let mut out = SuperPolynomial::zero(alphabet);
    let mut first = true;
    loop {
        parser.skip_space();
        if parser.position == text.len() {
            if first {
                return parser.error("empty expression");
            }
            return Ok(out);
        }
        let negative = if parser.eat('-') {
            true
        } else if parser.eat('+') || first {
            false
        } else {
            return parser.error("expected '+' or '-'");
        };
        first = false;
        let mut sequence = Vec::new();
        let mut scale = (if negative { -1 } else { 1 }, 1);
        parser.factor(&mut sequence, &mut scale)?;
        while parser.eat('*') {
            parser.factor(&mut sequence, &mut scale)?;
        }
        let term = SuperPolynomial::from_sequence(alphabet, &sequence, C::from_ratio(scale.0, scale.1))?;
        out = out.try_add(&term)?;
    }
}
