//! The Lie superalgebras osp(m|2n) and u(p|q): exact actions on the matrix-entry
//! symbols, bracket and Jacobi checks, and the coordinate realizations of the
//! invariant derivations on O(m)×Sp(2n) and U(p)×U(q) charts.

use num_complex::{Complex, Complex64};
use thiserror::Error;

use crate::charts::{chart_ab, osp_generator, unitary_generators, ChartError, SuperPoint};
use crate::grassmann::{Coefficient, Conjugation, FloatElement, GrassmannError};
use crate::groups::{GroupKind, GroupSpec};
use crate::matrix::Matrix;
use crate::supermatrix::{scalar_det_inverse, symplectic_form, theta_hat, GMatrix, MatrixError};
use crate::symbols::{Alphabet, SuperPolynomial, Symbol, SymbolError};

/// Gaussian integers: every structure constant in the standard bases is one.
pub type GaussInt = Complex<i64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("{0} has no superalgebra action here")]
    Unsupported(String),
    #[error("basis element {0} does not belong to {1}")]
    NotInAlgebra(String, String),
    #[error(transparent)]
    Symbols(#[from] SymbolError),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
}

/// A basis derivation. Indices are zero-based.
#[derive(Clone, Debug, PartialEq)]
pub enum BasisElement {
    /// K_{αβ} of osp(m|2n), defined for every index pair by its action on X.
    K(usize, usize),
    /// Y_{ij} of u(p|q), i < q, j < p.
    Y(usize, usize),
    /// Ȳ_{ij} of u(p|q).
    YBar(usize, usize),
    /// D̃ for a homogeneous complex (p+q)×(p+q) matrix D.
    Matrix(Matrix<GaussInt>),
}

impl std::fmt::Display for BasisElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::K(a, b) => write!(f, "K[{},{}]", a + 1, b + 1),
            Self::Y(i, j) => write!(f, "Y[{},{}]", i + 1, j + 1),
            Self::YBar(i, j) => write!(f, "Ybar[{},{}]", i + 1, j + 1),
            Self::Matrix(m) => {
                let nonzero: Vec<String> = (0..m.rows())
                    .flat_map(|r| (0..m.cols()).map(move |c| (r, c)))
                    .filter(|&(r, c)| *m.get(r, c) != GaussInt::new(0, 0))
                    .map(|(r, c)| format!("{}E[{},{}]", m.get(r, c), r + 1, c + 1))
                    .collect();
                write!(f, "D({})", nonzero.join("+"))
            }
        }
    }
}

fn unit(size: usize, row: usize, col: usize, value: GaussInt) -> Matrix<GaussInt> {
    Matrix::from_fn(size, size, |r, c| if (r, c) == (row, col) { value } else { GaussInt::new(0, 0) })
}

impl BasisElement {
    /// S_{kl}: the matrix unit E_{kl} in the u(p) block.
    pub fn s(p: usize, q: usize, k: usize, l: usize) -> Self {
        Self::Matrix(unit(p + q, k, l, GaussInt::new(1, 0)))
    }

    /// T_{st}: the matrix unit E_{s+p,t+p} in the u(q) block.
    pub fn t(p: usize, q: usize, s: usize, t: usize) -> Self {
        Self::Matrix(unit(p + q, s + p, t + p, GaussInt::new(1, 0)))
    }

    /// The matrix of this element in the defining representation.
    pub fn defining_matrix(&self, spec: &GroupSpec) -> Result<Matrix<GaussInt>, AlgebraError> {
        let size = spec.size();
        match (self, spec.kind) {
            (Self::K(i, j), GroupKind::Orthosymplectic { .. }) => {
                check_indices(self, spec, *i < size && *j < size)?;
                let g = &spec.metric.g;
                let sign = if parity(spec, *i) && parity(spec, *j) { -1 } else { 1 };
                Ok(Matrix::from_fn(size, size, |gamma, alpha| {
                    let mut v = 0;
                    if gamma == *i {
                        v += g.get(alpha, *j);
                    }
                    if gamma == *j {
                        v -= sign * g.get(alpha, *i);
                    }
                    GaussInt::new(v, 0)
                }))
            }
            (Self::Y(i, j), GroupKind::Unitary { p, q }) => {
                check_indices(self, spec, *i < q && *j < p)?;
                Ok(unit(size, *j, i + p, GaussInt::new(1, 0)))
            }
            (Self::YBar(i, j), GroupKind::Unitary { p, q }) => {
                check_indices(self, spec, *i < q && *j < p)?;
                Ok(unit(size, i + p, *j, GaussInt::new(0, -1)))
            }
            (Self::Matrix(m), GroupKind::Unitary { .. }) => {
                check_indices(self, spec, m.rows() == size && m.cols() == size)?;
                Ok(m.clone())
            }
            _ => Err(AlgebraError::NotInAlgebra(self.to_string(), spec.label())),
        }
    }

    pub fn is_odd(&self, spec: &GroupSpec) -> Result<bool, AlgebraError> {
        match self {
            Self::K(i, j) => Ok(parity(spec, *i) ^ parity(spec, *j)),
            Self::Y(..) | Self::YBar(..) => Ok(true),
            Self::Matrix(m) => matrix_parity(spec, m)
                .ok_or_else(|| AlgebraError::NotInAlgebra(format!("inhomogeneous {self}"), spec.label())),
        }
    }
}

fn check_indices(b: &BasisElement, spec: &GroupSpec, ok: bool) -> Result<(), AlgebraError> {
    if ok {
        Ok(())
    } else {
        Err(AlgebraError::NotInAlgebra(b.to_string(), spec.label()))
    }
}

fn parity(spec: &GroupSpec, index: usize) -> bool {
    index >= spec.even_dim
}

fn sign(negative: bool) -> i64 {
    if negative {
        -1
    } else {
        1
    }
}

/// Parity of a homogeneous matrix; `Some(false)` for zero.
fn matrix_parity(spec: &GroupSpec, m: &Matrix<GaussInt>) -> Option<bool> {
    let mut found: Option<bool> = None;
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            if *m.get(r, c) != GaussInt::new(0, 0) {
                let odd = parity(spec, r) ^ parity(spec, c);
                if found.is_some_and(|f| f != odd) {
                    return None;
                }
                found = Some(odd);
            }
        }
    }
    Some(found.unwrap_or(false))
}

/// The standard basis: K_{ij} (i ≤ j, nonzero) for osp; S, T, Y, Ȳ for u.
pub fn basis(spec: &GroupSpec) -> Result<Vec<BasisElement>, AlgebraError> {
    match spec.kind {
        GroupKind::Orthosymplectic { .. } => {
            let size = spec.size();
            Ok((0..size)
                .flat_map(|i| (i..size).map(move |j| (i, j)))
                .filter(|&(i, j)| i != j || parity(spec, i))
                .map(|(i, j)| BasisElement::K(i, j))
                .collect())
        }
        GroupKind::Unitary { p, q } => {
            let mut out = Vec::new();
            for k in 0..p {
                for l in 0..p {
                    out.push(BasisElement::s(p, q, k, l));
                }
            }
            for s in 0..q {
                for t in 0..q {
                    out.push(BasisElement::t(p, q, s, t));
                }
            }
            out.extend(odd_basis(spec)?);
            Ok(out)
        }
        GroupKind::UnitaryOrthosymplectic { .. } => Err(AlgebraError::Unsupported(spec.label())),
    }
}

/// Odd basis elements: K_{i,j+m} for osp, Y_{ij} and Ȳ_{ij} for u.
pub fn odd_basis(spec: &GroupSpec) -> Result<Vec<BasisElement>, AlgebraError> {
    match spec.kind {
        GroupKind::Orthosymplectic { m, n } => {
            Ok((0..m).flat_map(|i| (0..2 * n).map(move |j| BasisElement::K(i, j + m))).collect())
        }
        GroupKind::Unitary { p, q } => Ok((0..q)
            .flat_map(|i| (0..p).flat_map(move |j| [BasisElement::Y(i, j), BasisElement::YBar(i, j)]))
            .collect()),
        GroupKind::UnitaryOrthosymplectic { .. } => Err(AlgebraError::Unsupported(spec.label())),
    }
}

/// A derivation restricted to the span of the symbols: column c holds the
/// image of symbol c.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    alphabet: Alphabet,
    odd: bool,
    table: Vec<GaussInt>,
}

fn symbol_index(alphabet: &Alphabet, s: &Symbol) -> usize {
    let size = alphabet.size();
    usize::from(s.adjoint) * size * size + s.row * size + s.col
}

impl Action {
    fn zero(alphabet: Alphabet, odd: bool) -> Self {
        let n = alphabet_len(&alphabet);
        Self { alphabet, odd, table: vec![GaussInt::new(0, 0); n * n] }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn is_odd(&self) -> bool {
        self.odd
    }

    fn len(&self) -> usize {
        alphabet_len(&self.alphabet)
    }

    fn add_entry(&mut self, image: &Symbol, of: &Symbol, value: GaussInt) {
        let n = self.len();
        let (r, c) = (symbol_index(&self.alphabet, image), symbol_index(&self.alphabet, of));
        self.table[r * n + c] += value;
    }

    /// D(s) as a list of (symbol, coefficient).
    pub fn image(&self, s: &Symbol) -> Vec<(Symbol, GaussInt)> {
        let n = self.len();
        let c = symbol_index(&self.alphabet, s);
        self.alphabet
            .symbols()
            .into_iter()
            .enumerate()
            .filter_map(|(r, sym)| {
                let v = self.table[r * n + c];
                (v != GaussInt::new(0, 0)).then_some((sym, v))
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.table.iter().all(|v| *v == GaussInt::new(0, 0))
    }

    /// self ∘ other on the symbol span.
    pub fn compose(&self, other: &Self) -> Self {
        let n = self.len();
        let mut out = Self::zero(self.alphabet, self.odd ^ other.odd);
        for r in 0..n {
            for k in 0..n {
                let a = self.table[r * n + k];
                if a == GaussInt::new(0, 0) {
                    continue;
                }
                for c in 0..n {
                    out.table[r * n + c] += a * other.table[k * n + c];
                }
            }
        }
        out
    }

    /// Supercommutator [self, other] = self∘other − (−1)^{|self||other|} other∘self.
    pub fn bracket(&self, other: &Self) -> Self {
        let ab = self.compose(other);
        let ba = other.compose(self);
        let s = if self.odd && other.odd { -1 } else { 1 };
        self.combine(&ab, &ba, GaussInt::new(-s, 0))
    }

    fn combine(&self, a: &Self, b: &Self, factor: GaussInt) -> Self {
        Self {
            alphabet: self.alphabet,
            odd: a.odd,
            table: a.table.iter().zip(&b.table).map(|(x, y)| x + factor * y).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(self, other, GaussInt::new(1, 0))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(self, other, GaussInt::new(-1, 0))
    }

    pub fn scale(&self, factor: GaussInt) -> Self {
        Self { alphabet: self.alphabet, odd: self.odd, table: self.table.iter().map(|v| v * factor).collect() }
    }

    /// Extends the action to polynomials by the graded Leibniz rule.
    pub fn apply<C: Coefficient>(&self, f: &SuperPolynomial<C>) -> Result<SuperPolynomial<C>, AlgebraError> {
        if *f.alphabet() != self.alphabet {
            return Err(SymbolError::AlphabetMismatch(format!(
                "derivation on {:?}, polynomial on {:?}",
                self.alphabet,
                f.alphabet()
            ))
            .into());
        }
        let alphabet = self.alphabet;
        let mut out = SuperPolynomial::zero(alphabet);
        for (monomial, coefficient) in f.terms() {
            let sequence = monomial.sequence();
            let mut odd_before = false;
            for (r, s) in sequence.iter().enumerate() {
                let image = self.image_polynomial::<C>(s)?;
                if !image.is_zero() {
                    let prefix = SuperPolynomial::from_sequence(alphabet, &sequence[..r], C::one())?;
                    let suffix = SuperPolynomial::from_sequence(alphabet, &sequence[r + 1..], C::one())?;
                    let mut term = prefix.try_mul(&image)?.try_mul(&suffix)?.scale(coefficient);
                    if self.odd && odd_before {
                        term = term.scale(&-C::one());
                    }
                    out = out.try_add(&term)?;
                }
                odd_before ^= alphabet.is_odd(s);
            }
        }
        Ok(out)
    }

    fn image_polynomial<C: Coefficient>(&self, s: &Symbol) -> Result<SuperPolynomial<C>, AlgebraError> {
        let mut out = SuperPolynomial::zero(self.alphabet);
        for (sym, v) in self.image(s) {
            out = out.try_add(&SuperPolynomial::from_sequence(self.alphabet, &[sym], lift(v))?)?;
        }
        Ok(out)
    }
}

fn alphabet_len(alphabet: &Alphabet) -> usize {
    let size = alphabet.size();
    size * size * if alphabet.adjoint { 2 } else { 1 }
}

/// A Gaussian integer in any coefficient ring.
pub fn lift<C: Coefficient>(z: GaussInt) -> C {
    C::from_i64(z.re) + C::imag_unit() * C::from_i64(z.im)
}

/// K_{αβ}(X_{γδ}) = (−1)^{(1+[δ])([α]+[β])}(g_{γβ}X_{αδ} − (−1)^{[α][β]}g_{γα}X_{βδ}).
fn konx(spec: &GroupSpec, alpha: usize, beta: usize) -> Action {
    let alphabet = Alphabet::for_spec(spec);
    let size = spec.size();
    let g = &spec.metric.g;
    let (pa, pb) = (parity(spec, alpha), parity(spec, beta));
    let mut out = Action::zero(alphabet, pa ^ pb);
    for gamma in 0..size {
        for delta in 0..size {
            let outer = sign((!parity(spec, delta)) && (pa ^ pb));
            let target = Symbol::entry(gamma, delta);
            let first = g.get(gamma, beta) * outer;
            if first != 0 {
                out.add_entry(&Symbol::entry(alpha, delta), &target, GaussInt::new(first, 0));
            }
            let second = -g.get(gamma, alpha) * sign(pa && pb) * outer;
            if second != 0 {
                out.add_entry(&Symbol::entry(beta, delta), &target, GaussInt::new(second, 0));
            }
        }
    }
    out
}

/// X-part of D̃(X_{αβ}) = Σ_γ (−1)^{[β]([α]+[γ])} D_{γα} X_{γβ}.
fn signed_matrix_images(spec: &GroupSpec, d: &Matrix<GaussInt>, alpha: usize, beta: usize) -> Vec<(Symbol, GaussInt)> {
    (0..spec.size())
        .filter(|&gamma| *d.get(gamma, alpha) != GaussInt::new(0, 0))
        .map(|gamma| {
            let s = sign(parity(spec, beta) && (parity(spec, alpha) ^ parity(spec, gamma)));
            (Symbol::entry(gamma, beta), d.get(gamma, alpha) * s)
        })
        .collect()
}

/// X-part of Y_{ij} and Ȳ_{ij}, read off directly from their defining formulas.
fn odd_unitary_images(spec: &GroupSpec, element: &BasisElement, alpha: usize, beta: usize) -> Vec<(Symbol, GaussInt)> {
    let p = spec.even_dim;
    let s = sign(parity(spec, beta));
    match *element {
        BasisElement::Y(i, j) if alpha == i + p => vec![(Symbol::entry(j, beta), GaussInt::new(s, 0))],
        BasisElement::YBar(i, j) if alpha == j => vec![(Symbol::entry(i + p, beta), GaussInt::new(0, -s))],
        _ => Vec::new(),
    }
}

/// σ(D) = [[−a†, −i c†], [−i b†, −d†]]: the real structure whose fixed points are u(p|q).
pub fn real_structure(p: usize, d: &Matrix<GaussInt>) -> Matrix<GaussInt> {
    let size = d.rows();
    Matrix::from_fn(size, size, |r, c| {
        let v = d.get(c, r).conj();
        if (r < p) == (c < p) {
            -v
        } else {
            GaussInt::new(0, -1) * v
        }
    })
}

fn adjoint_factor(p: usize, row: usize, col: usize) -> GaussInt {
    if (row < p) == (col < p) {
        GaussInt::new(1, 0)
    } else {
        GaussInt::new(0, 1)
    }
}

/// Builds an action for u(p|q) from its X-part and the X-part of its
/// conjugate partner conj∘D∘conj; X*_{γδ} = c_{γδ}·conj(X_{δγ}).
fn unitary_action(
    spec: &GroupSpec,
    odd: bool,
    images: impl Fn(usize, usize) -> Vec<(Symbol, GaussInt)>,
    partner: impl Fn(usize, usize) -> Vec<(Symbol, GaussInt)>,
) -> Action {
    let alphabet = Alphabet::for_spec(spec);
    let p = spec.even_dim;
    let size = spec.size();
    let mut out = Action::zero(alphabet, odd);
    for a in 0..size {
        for b in 0..size {
            for (sym, v) in images(a, b) {
                out.add_entry(&sym, &Symbol::entry(a, b), v);
            }
            let factor = adjoint_factor(p, a, b);
            for (sym, v) in partner(b, a) {
                // conj(X_{εa}) = X*_{aε} / c_{aε}, and 1/c = conj(c) for c ∈ {1, i}.
                let (eps, col) = (sym.row, sym.col);
                debug_assert_eq!(col, a);
                let coefficient = factor * v.conj() * adjoint_factor(p, a, eps).conj();
                out.add_entry(&Symbol::adjoint_entry(a, eps), &Symbol::adjoint_entry(a, b), coefficient);
            }
        }
    }
    out
}

/// The exact action of a basis element on every symbol of the spec's alphabet.
pub fn structure_action(spec: &GroupSpec, element: &BasisElement) -> Result<Action, AlgebraError> {
    let d = element.defining_matrix(spec)?;
    let odd = element.is_odd(spec)?;
    match (element, spec.kind) {
        (BasisElement::K(a, b), GroupKind::Orthosymplectic { .. }) => Ok(konx(spec, *a, *b)),
        (BasisElement::Y(i, j), GroupKind::Unitary { .. }) => {
            let partner = BasisElement::YBar(*i, *j);
            Ok(unitary_action(
                spec,
                odd,
                |a, b| odd_unitary_images(spec, element, a, b),
                |a, b| odd_unitary_images(spec, &partner, a, b),
            ))
        }
        (BasisElement::YBar(i, j), GroupKind::Unitary { .. }) => {
            let partner = BasisElement::Y(*i, *j);
            Ok(unitary_action(
                spec,
                odd,
                |a, b| odd_unitary_images(spec, element, a, b),
                |a, b| odd_unitary_images(spec, &partner, a, b),
            ))
        }
        (BasisElement::Matrix(_), GroupKind::Unitary { .. }) => Ok(matrix_action(spec, &d)?),
        _ => Err(AlgebraError::NotInAlgebra(element.to_string(), spec.label())),
    }
}

/// The signed matrix action D̃ of a homogeneous defining-representation matrix.
pub fn matrix_action(spec: &GroupSpec, d: &Matrix<GaussInt>) -> Result<Action, AlgebraError> {
    let odd = matrix_parity(spec, d)
        .ok_or_else(|| AlgebraError::NotInAlgebra("inhomogeneous matrix".into(), spec.label()))?;
    match spec.kind {
        GroupKind::Orthosymplectic { .. } => {
            let alphabet = Alphabet::for_spec(spec);
            let mut out = Action::zero(alphabet, odd);
            for a in 0..spec.size() {
                for b in 0..spec.size() {
                    for (sym, v) in signed_matrix_images(spec, d, a, b) {
                        out.add_entry(&sym, &Symbol::entry(a, b), v);
                    }
                }
            }
            Ok(out)
        }
        GroupKind::Unitary { p, .. } => {
            let sigma = real_structure(p, d);
            Ok(unitary_action(
                spec,
                odd,
                |a, b| signed_matrix_images(spec, d, a, b),
                |a, b| signed_matrix_images(spec, &sigma, a, b),
            ))
        }
        GroupKind::UnitaryOrthosymplectic { .. } => Err(AlgebraError::Unsupported(spec.label())),
    }
}

/// D(f) for a basis element D, by the graded Leibniz rule.
pub fn act_on_polynomial<C: Coefficient>(
    spec: &GroupSpec,
    element: &BasisElement,
    f: &SuperPolynomial<C>,
) -> Result<SuperPolynomial<C>, AlgebraError> {
    structure_action(spec, element)?.apply(f)
}

/// Matrix supercommutator [D₁, D₂] = D₁D₂ − (−1)^{|D₁||D₂|} D₂D₁.
pub fn matrix_bracket(spec: &GroupSpec, d1: &Matrix<GaussInt>, d2: &Matrix<GaussInt>) -> Matrix<GaussInt> {
    let size = d1.rows();
    let prod = |a: &Matrix<GaussInt>, b: &Matrix<GaussInt>| {
        Matrix::from_fn(size, size, |r, c| (0..size).map(|k| a.get(r, k) * b.get(k, c)).sum::<GaussInt>())
    };
    let both_odd = matrix_parity(spec, d1) == Some(true) && matrix_parity(spec, d2) == Some(true);
    let (ab, ba) = (prod(d1, d2), prod(d2, d1));
    Matrix::from_fn(size, size, |r, c| if both_odd { ab.get(r, c) + ba.get(r, c) } else { ab.get(r, c) - ba.get(r, c) })
}

/// Outcome of an exhaustive structural check.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AlgebraReport {
    pub checked: usize,
    pub mismatches: Vec<String>,
}

impl AlgebraReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.mismatches.push(what());
        }
    }
}

/// Right side of the standard osp relations, as an action.
fn stanosp_rhs(spec: &GroupSpec, i: usize, j: usize, k: usize, l: usize) -> Action {
    let g = |a: usize, b: usize| *spec.metric.g.get(a, b);
    let pr = |a: usize| parity(spec, a);
    let terms = [
        (g(k, j), (i, l)),
        (g(l, i) * sign(pr(i) && (pr(j) ^ pr(k))), (j, k)),
        (-g(l, j) * sign(pr(k) && pr(l)), (i, k)),
        (-g(k, i) * sign(pr(i) && pr(j)), (j, l)),
    ];
    let mut out = Action::zero(Alphabet::for_spec(spec), pr(i) ^ pr(j) ^ pr(k) ^ pr(l));
    for (coefficient, (a, b)) in terms {
        if coefficient != 0 {
            out = out.add(&konx(spec, a, b).scale(GaussInt::new(coefficient, 0)));
        }
    }
    out
}

/// Supercommutators of the basis actions against the standard osp relations
/// (osp) or against D̃ of the matrix supercommutator (u).
pub fn verify_bracket(spec: &GroupSpec) -> Result<AlgebraReport, AlgebraError> {
    let elements = basis(spec)?;
    let actions: Vec<Action> = elements.iter().map(|e| structure_action(spec, e)).collect::<Result<_, _>>()?;
    let mut report = AlgebraReport::default();
    for (a, (ea, da)) in elements.iter().zip(&actions).enumerate() {
        for (eb, db) in elements.iter().zip(&actions).skip(a) {
            let lhs = da.bracket(db);
            let rhs = match (ea, eb) {
                (BasisElement::K(i, j), BasisElement::K(k, l)) => stanosp_rhs(spec, *i, *j, *k, *l),
                _ => {
                    let m = matrix_bracket(spec, &ea.defining_matrix(spec)?, &eb.defining_matrix(spec)?);
                    matrix_action(spec, &m)?
                }
            };
            report.record(lhs.table == rhs.table, || format!("[{ea}, {eb}]"));
        }
    }
    Ok(report)
}

/// Compares each basis action with the signed matrix action of its
/// defining-representation matrix. For osp the two differ by (−1)^{|D|}.
pub fn verify_matrix_consistency(spec: &GroupSpec) -> Result<AlgebraReport, AlgebraError> {
    let mut report = AlgebraReport::default();
    for element in basis(spec)? {
        let action = structure_action(spec, &element)?;
        let mut expected = matrix_action(spec, &element.defining_matrix(spec)?)?;
        if matches!(spec.kind, GroupKind::Orthosymplectic { .. }) && action.is_odd() {
            expected = expected.scale(GaussInt::new(-1, 0));
        }
        report.record(action == expected, || element.to_string());
    }
    Ok(report)
}

/// Checks K_{αβ} = −(−1)^{[α][β]} K_{βα} on the symbols for every index pair.
pub fn verify_antisymmetry(spec: &GroupSpec) -> Result<AlgebraReport, AlgebraError> {
    if !matches!(spec.kind, GroupKind::Orthosymplectic { .. }) {
        return Err(AlgebraError::Unsupported(spec.label()));
    }
    let mut report = AlgebraReport::default();
    let size = spec.size();
    for a in 0..size {
        for b in 0..size {
            let s = sign(parity(spec, a) && parity(spec, b));
            let lhs = konx(spec, a, b);
            let rhs = konx(spec, b, a).scale(GaussInt::new(-s, 0));
            report.record(lhs == rhs, || format!("K[{},{}]", a + 1, b + 1));
        }
    }
    Ok(report)
}

/// Super Jacobi identity [A,[B,C]] = [[A,B],C] + (−1)^{|A||B|}[B,[A,C]] over
/// all ordered basis triples.
pub fn verify_jacobi(spec: &GroupSpec) -> Result<AlgebraReport, AlgebraError> {
    let elements = basis(spec)?;
    let actions: Vec<Action> = elements.iter().map(|e| structure_action(spec, e)).collect::<Result<_, _>>()?;
    let mut report = AlgebraReport::default();
    for (ea, a) in elements.iter().zip(&actions) {
        for (eb, b) in elements.iter().zip(&actions) {
            let ab = a.bracket(b);
            let s = GaussInt::new(sign(a.is_odd() && b.is_odd()), 0);
            for (ec, c) in elements.iter().zip(&actions) {
                let lhs = a.bracket(&b.bracket(c));
                let rhs = ab.bracket(c).add(&b.bracket(&a.bracket(c)).scale(s));
                report.record(lhs.table == rhs.table, || format!("({ea}, {eb}, {ec})"));
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Coordinate realizations.

/// A derivation written as D = Σ_v D(v)∂_v over the chart coordinates:
/// values on the x and y entries and on the real odd generators.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateDerivation {
    pub x: GMatrix<Complex64>,
    pub y: GMatrix<Complex64>,
    /// D(ξ_g) for generator g = 1..N (index g−1).
    pub odd: Vec<FloatElement>,
}

impl CoordinateDerivation {
    /// D applied to a function of the odd generators only.
    pub fn on_odd(&self, f: &FloatElement) -> Result<FloatElement, AlgebraError> {
        let mut out = FloatElement::zero(f.num_generators());
        for (g, coefficient) in self.odd.iter().enumerate() {
            if !coefficient.is_zero() {
                out = &out + &(coefficient * &f.partial(g + 1)?);
            }
        }
        Ok(out)
    }

    fn on_odd_matrix(&self, m: &GMatrix<Complex64>) -> Result<GMatrix<Complex64>, AlgebraError> {
        let mut entries = Vec::with_capacity(m.rows() * m.cols());
        for e in m.entries() {
            entries.push(self.on_odd(e)?);
        }
        Ok(Matrix::from_fn(m.rows(), m.cols(), |r, c| entries[r * m.cols() + c].clone()))
    }
}

/// The chart data at a point: x, y, odd coordinates, A, B and their inverses.
struct Frame {
    generators: usize,
    x: GMatrix<Complex64>,
    y: GMatrix<Complex64>,
    odd: GMatrix<Complex64>,
    a: GMatrix<Complex64>,
    b: GMatrix<Complex64>,
    a_inv: GMatrix<Complex64>,
    b_inv: GMatrix<Complex64>,
    x_inv: GMatrix<Complex64>,
    /// θ̂ (osp) or iψ† (u): X_{I,II} = x·middle·y.
    middle: GMatrix<Complex64>,
}

impl Frame {
    fn new(spec: &GroupSpec, point: &SuperPoint<Complex64>) -> Result<Self, AlgebraError> {
        let generators = point.num_generators();
        let (a, b) = chart_ab(spec, &point.odd)?;
        let (_, x_inv) = scalar_det_inverse(&point.x.body())
            .ok_or_else(|| ChartError::Dimensions("singular classical part".into()))?;
        let middle = match spec.kind {
            GroupKind::Unitary { .. } => {
                point.odd.dagger(&Conjugation::RealGenerators)?.scale(&Complex64::new(0.0, 1.0))
            }
            _ => theta_hat(&point.odd),
        };
        Ok(Self {
            generators,
            x: point.x.clone(),
            y: point.y.clone(),
            odd: point.odd.clone(),
            a_inv: a.inverse_unipotent()?,
            b_inv: b.inverse_unipotent()?,
            a,
            b,
            x_inv: GMatrix::from_scalars(&x_inv, generators),
            middle,
        })
    }

    /// D(X_{γδ}) for every entry, by the chain rule through xA, x·middle·y, odd, By.
    fn apply(&self, d: &CoordinateDerivation) -> Result<GMatrix<Complex64>, AlgebraError> {
        let da = d.on_odd_matrix(&self.a)?;
        let db = d.on_odd_matrix(&self.b)?;
        let dmiddle = d.on_odd_matrix(&self.middle)?;
        let dodd = d.on_odd_matrix(&self.odd)?;
        let top_left = d.x.matmul(&self.a).add(&self.x.matmul(&da));
        let middle_y = self.middle.matmul(&self.y);
        let x_middle = self.x.matmul(&self.middle);
        let (rows, cols) = (x_middle.rows(), self.y.cols());
        let y_part = Matrix::from_fn(rows, cols, |r, c| {
            let mut acc = FloatElement::zero(self.generators);
            for k in 0..self.y.rows() {
                acc = &acc + &(d.y.get(k, c) * x_middle.get(r, k));
            }
            acc
        });
        let top_right = d.x.matmul(&middle_y).add(&self.x.matmul(&dmiddle).matmul(&self.y)).add(&y_part);
        let by_part = Matrix::from_fn(self.b.rows(), cols, |r, c| {
            let mut acc = FloatElement::zero(self.generators);
            for s in 0..self.y.rows() {
                acc = &acc + &(d.y.get(s, c) * self.b.get(r, s));
            }
            acc
        });
        let bottom_right = db.matmul(&self.y).add(&by_part);
        Ok(Matrix::from_blocks(&top_left, &top_right, &dodd, &bottom_right))
    }
}

fn element_sum(generators: usize, items: impl IntoIterator<Item = FloatElement>) -> FloatElement {
    items.into_iter().fold(FloatElement::zero(generators), |acc, e| &acc + &e)
}

fn j_int(n: usize) -> Matrix<i64> {
    symplectic_form(n)
}

/// D(X_{γδ}) for every entry of the chart embedding at `point`.
pub fn apply_derivation(
    spec: &GroupSpec,
    point: &SuperPoint<Complex64>,
    d: &CoordinateDerivation,
) -> Result<GMatrix<Complex64>, AlgebraError> {
    Frame::new(spec, point)?.apply(d)
}

/// The derivation K_{αβ} of osp(m|2n) in chart coordinates at `point`.
pub fn osp_coordinate_derivation(
    spec: &GroupSpec,
    point: &SuperPoint<Complex64>,
    alpha: usize,
    beta: usize,
    reading: Reading,
) -> Result<CoordinateDerivation, AlgebraError> {
    let GroupKind::Orthosymplectic { m, n } = spec.kind else {
        return Err(AlgebraError::Unsupported(spec.label()));
    };
    let frame = Frame::new(spec, point)?;
    osp_derivation(&frame, m, n, alpha, beta, reading)
}

fn osp_derivation(
    f: &Frame,
    m: usize,
    n: usize,
    alpha: usize,
    beta: usize,
    reading: Reading,
) -> Result<CoordinateDerivation, AlgebraError> {
    let flip = if reading == Reading::Consistent { -1.0 } else { 1.0 };
    let gens = f.generators;
    let j = j_int(n);
    let jf = |a: usize, b: usize| Complex64::new(*j.get(a, b) as f64, 0.0);
    let zero = || FloatElement::zero(gens);
    let mut d = CoordinateDerivation {
        x: GMatrix::zeros(m, m, gens),
        y: GMatrix::zeros(2 * n, 2 * n, gens),
        odd: vec![zero(); gens],
    };
    let theta = &f.odd;
    let bad = || AlgebraError::NotInAlgebra(format!("K[{},{}]", alpha + 1, beta + 1), format!("osp({m}|{})", 2 * n));
    if alpha > beta || beta >= m + 2 * n || (alpha == beta && alpha < m) {
        return Err(bad());
    }
    if beta < m {
        // L_{ij}(x_{kl}) = δ_{jk}x_{il} − δ_{ik}x_{jl}.
        let (i, jj) = (alpha, beta);
        d.x = Matrix::from_fn(m, m, |k, l| {
            let mut v = zero();
            if jj == k {
                v = &v + f.x.get(i, l);
            }
            if i == k {
                v = &v - f.x.get(jj, l);
            }
            v
        });
        return Ok(d);
    }
    if alpha >= m {
        let (i, jj) = (alpha - m, beta - m);
        // L_{i+m,j+m}(y_{kl}) = J_{kj}y_{il} + J_{ki}y_{jl}.
        d.y = Matrix::from_fn(2 * n, 2 * n, |k, l| &f.y.get(i, l).scale(&jf(k, jj)) + &f.y.get(jj, l).scale(&jf(k, i)));
        for p in 0..2 * n {
            for l in 0..m {
                d.odd[osp_generator(m, p, l) - 1] = (&theta.get(i, l).scale(&jf(jj, p))
                    + &theta.get(jj, l).scale(&jf(i, p)))
                    .scale(&Complex64::new(flip, 0.0));
            }
        }
        return Ok(d);
    }
    let (i, jj) = (alpha, beta - m);
    let xa = f.x.matmul(&f.a);
    let xa_inv = f.x.matmul(&f.a_inv);
    let xhat = f.x.matmul(&f.middle);
    let jg = GMatrix::from_scalars(&j.map(|&v| Complex64::new(v as f64, 0.0)), gens);
    let jb_inv = jg.matmul(&f.b_inv);
    let jb_inv_j = jb_inv.matmul(&jg);
    let half = Complex64::new(0.5, 0.0);
    let partial = |e: &FloatElement, p: usize, t: usize| e.partial(osp_generator(m, p, t));

    // Σ (xA)_{it} J_{jp} ∂_{θ_{pt}}
    for p in 0..2 * n {
        for t in 0..m {
            d.odd[osp_generator(m, p, t) - 1] = xa.get(i, t).scale(&jf(jj, p));
        }
    }
    // ½ Σ_t (xA⁻¹θᵀ)_{tj} L_{ti}  −  ½ Σ_{u,r} c_{ur} L_{ur}
    let w = xa_inv.matmul(&theta.transpose());
    let mut coefficient = Matrix::from_fn(m, m, |_, _| zero());
    for t in 0..m {
        coefficient.set(t, i, &coefficient.get(t, i).clone() + &w.get(t, jj).scale(&half));
    }
    for u in 0..m {
        for r in 0..m {
            let mut c = zero();
            for s in 0..m {
                for t in 0..m {
                    for p in 0..2 * n {
                        if *j.get(jj, p) == 0 {
                            continue;
                        }
                        let term =
                            &(&(xa.get(i, t) * xa_inv.get(u, s)) * &partial(xa.get(r, s), p, t)?).scale(&jf(jj, p));
                        c = &c + term;
                    }
                }
            }
            coefficient.set(u, r, &coefficient.get(u, r).clone() - &c.scale(&half));
        }
    }
    // Σ_{u,r} coefficient_{ur} L_{ur}(x_{kl}), L_{ur}(x_{kl}) = δ_{rk}x_{ul} − δ_{uk}x_{rl}.
    d.x = Matrix::from_fn(m, m, |k, l| {
        element_sum(
            gens,
            (0..m).flat_map(|u| {
                let coefficient = &coefficient;
                let x = &f.x;
                (0..m).filter_map(move |r| {
                    let c = coefficient.get(u, r);
                    let mut v = FloatElement::zero(gens);
                    if r == k {
                        v = &v + &(c * x.get(u, l));
                    }
                    if u == k {
                        v = &v - &(c * x.get(r, l));
                    }
                    (!v.is_zero()).then_some(v)
                })
            }),
        )
    });
    // d_{st} = ±½[(JB⁻¹J)_{tj}(xθ̂)_{is} − Σ (xA)_{ir}(JB⁻¹)_{tu}J_{jp}∂_{θ_{pr}}B_{us}]
    let mut dst = Matrix::from_fn(2 * n, 2 * n, |_, _| zero());
    for s in 0..2 * n {
        for t in 0..2 * n {
            let mut v = jb_inv_j.get(t, jj) * xhat.get(i, s);
            for u in 0..2 * n {
                for p in 0..2 * n {
                    if *j.get(jj, p) == 0 {
                        continue;
                    }
                    for r in 0..m {
                        let term =
                            (&(xa.get(i, r) * jb_inv.get(t, u)) * &partial(f.b.get(u, s), p, r)?).scale(&jf(jj, p));
                        v = &v - &term;
                    }
                }
            }
            dst.set(s, t, v.scale(&(half * flip)));
        }
    }
    // Σ d_{st} L_{s+m,t+m}(y_{kl}), L_{s+m,t+m}(y_{kl}) = J_{kt}y_{sl} + J_{ks}y_{tl}.
    d.y = Matrix::from_fn(2 * n, 2 * n, |k, l| {
        element_sum(
            gens,
            (0..2 * n).flat_map(|s| {
                let (dst, y, jf) = (&dst, &f.y, &jf);
                (0..2 * n).map(move |t| {
                    let c = dst.get(s, t);
                    &(c * y.get(s, l)).scale(&jf(k, t)) + &(c * y.get(t, l)).scale(&jf(k, s))
                })
            }),
        )
    });
    Ok(d)
}

/// Comparison of a realized derivation with the exact symbol action.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizationReport {
    pub element: String,
    /// max |realized − expected| over the X entries.
    pub x_residual: f64,
    /// Extra named residuals (ψ̄ images, θ̂θ invariance, divergence form).
    pub extra: Vec<(&'static str, f64)>,
}

impl RealizationReport {
    pub fn max(&self) -> f64 {
        self.extra.iter().map(|(_, r)| *r).fold(self.x_residual, f64::max)
    }
}

/// The symbol action evaluated at the point: Σ_r coefficient · X_r.
fn expected_images(action: &Action, spec: &GroupSpec, x: &GMatrix<Complex64>) -> GMatrix<Complex64> {
    let size = spec.size();
    Matrix::from_fn(size, size, |a, b| {
        element_sum(
            x.num_generators(),
            action
                .image(&Symbol::entry(a, b))
                .into_iter()
                .map(|(s, v)| x.get(s.row, s.col).scale(&Complex64::new(v.re as f64, v.im as f64))),
        )
    })
}

fn embedded(f: &Frame) -> GMatrix<Complex64> {
    let top_left = f.x.matmul(&f.a);
    let top_right = f.x.matmul(&f.middle).matmul(&f.y);
    Matrix::from_blocks(&top_left, &top_right, &f.odd, &f.b.matmul(&f.y))
}

/// Realizes every osp basis element at `point` and compares with the symbol
/// action; even elements are also checked to annihilate θ̂θ.
pub fn coordinate_realization_osp(
    spec: &GroupSpec,
    point: &SuperPoint<Complex64>,
    reading: Reading,
) -> Result<Vec<RealizationReport>, AlgebraError> {
    let GroupKind::Orthosymplectic { m, n } = spec.kind else {
        return Err(AlgebraError::Unsupported(spec.label()));
    };
    let frame = Frame::new(spec, point)?;
    let x = embedded(&frame);
    let invariant = theta_hat(&frame.odd).matmul(&frame.odd);
    let mut out = Vec::new();
    for element in basis(spec)? {
        let BasisElement::K(alpha, beta) = element else { unreachable!() };
        let d = osp_derivation(&frame, m, n, alpha, beta, reading)?;
        let realized = frame.apply(&d)?;
        let expected = expected_images(&konx(spec, alpha, beta), spec, &x);
        let mut extra = Vec::new();
        if !element.is_odd(spec)? {
            extra.push(("theta-hat-theta", d.on_odd_matrix(&invariant)?.max_norm()));
        }
        out.push(RealizationReport {
            element: element.to_string(),
            x_residual: realized.sub(&expected).max_norm(),
            extra,
        });
    }
    Ok(out)
}

/// Sign and index conventions for the coordinate realizations.
///
/// `Alternate` takes the θ-term of K_{i+m,j+m} as
/// (θ_{il}J_{jp} + θ_{jl}J_{ip})∂_{θ_{pl}}, the y-coefficients d_{st} of K_{i,j+m}
/// with a leading +½, and S_{kl}(x_{ab}) = δ_{la}x_{kb}. `Consistent` flips the
/// first two signs and uses S_{kl}(x_{ab}) = δ_{ka}x_{lb}, the reading under which
/// the realizations agree with the symbol actions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reading {
    Alternate,
    Consistent,
}

/// f^{kl} and g^{st} of Y_{ij} at the frame.
struct YCoefficients {
    f: GMatrix<Complex64>,
    g: GMatrix<Complex64>,
}

fn d_psi(e: &FloatElement, p: usize, row: usize, col: usize) -> Result<FloatElement, AlgebraError> {
    let (re, im) = unitary_generators(p, row, col);
    let half = Complex64::new(0.5, 0.0);
    let a = e.partial(re)?;
    let b = e.partial(im)?.scale(&Complex64::new(0.0, 1.0));
    Ok((&a - &b).scale(&half))
}

fn y_coefficients(f: &Frame, p: usize, q: usize, i: usize, j: usize) -> Result<YCoefficients, AlgebraError> {
    let gens = f.generators;
    let xa = f.x.matmul(&f.a);
    let ainv_xinv = f.a_inv.matmul(&f.x_inv);
    let mut fm = Matrix::from_fn(p, p, |_, _| FloatElement::zero(gens));
    for a in 0..p {
        let dxa = f.x.matmul(&f.a.map(|e| d_psi(e, p, i, a).expect("generator in range")));
        for k in 0..p {
            for l in 0..p {
                let mut v = fm.get(k, l).clone();
                for b in 0..p {
                    v = &v - &(&(xa.get(j, a) * dxa.get(k, b)) * ainv_xinv.get(b, l));
                }
                fm.set(k, l, v);
            }
        }
    }
    let x_psi_dag = f.x.matmul(&f.odd.dagger(&Conjugation::RealGenerators)?);
    let minus_i = Complex64::new(0.0, -1.0);
    let mut gm = Matrix::from_fn(q, q, |s, t| (f.b_inv.get(s, i) * x_psi_dag.get(j, t)).scale(&minus_i));
    for a in 0..p {
        let db = f.b.map(|e| d_psi(e, p, i, a).expect("generator in range"));
        for s in 0..q {
            for t in 0..q {
                let mut v = gm.get(s, t).clone();
                for r in 0..q {
                    v = &v - &(&(xa.get(j, a) * db.get(r, t)) * f.b_inv.get(s, r));
                }
                gm.set(s, t, v);
            }
        }
    }
    Ok(YCoefficients { f: fm, g: gm })
}

fn conj_matrix(m: &GMatrix<Complex64>) -> Result<GMatrix<Complex64>, AlgebraError> {
    let entries: Vec<FloatElement> =
        m.entries().iter().map(|e| e.conjugate(&Conjugation::RealGenerators)).collect::<Result<_, _>>()?;
    Ok(Matrix::from_fn(m.rows(), m.cols(), |r, c| entries[r * m.cols() + c].clone()))
}

/// Y_{ij} (or Ȳ_{ij} when `bar`) of u(p|q) in chart coordinates, following the
/// expansion Σ(xA)_{jk}∂_{ψ_{ik}} + Σ f^{kl}S_{kl} + Σ g^{st}T_{st}; Ȳ is its
/// complex conjugate.
pub fn unitary_coordinate_derivation(
    spec: &GroupSpec,
    point: &SuperPoint<Complex64>,
    i: usize,
    j: usize,
    bar: bool,
    reading: Reading,
) -> Result<CoordinateDerivation, AlgebraError> {
    let GroupKind::Unitary { p, q } = spec.kind else {
        return Err(AlgebraError::Unsupported(spec.label()));
    };
    if i >= q || j >= p {
        return Err(AlgebraError::NotInAlgebra(format!("Y[{},{}]", i + 1, j + 1), spec.label()));
    }
    let frame = Frame::new(spec, point)?;
    unitary_derivation(&frame, p, q, i, j, bar, reading)
}

fn unitary_derivation(
    f: &Frame,
    p: usize,
    q: usize,
    i: usize,
    j: usize,
    bar: bool,
    reading: Reading,
) -> Result<CoordinateDerivation, AlgebraError> {
    let gens = f.generators;
    let YCoefficients { f: fm, g: gm } = y_coefficients(f, p, q, i, j)?;
    let (fm, gm) = match reading {
        Reading::Consistent => (fm, gm),
        Reading::Alternate => (fm.transpose(), gm.transpose()),
    };
    let xa = f.x.matmul(&f.a);
    // Y(ψ_{sk}) = δ_{is}(xA)_{jk}, Y(ψ̄) = 0; Ȳ(ψ) = 0, Ȳ(ψ̄_{sk}) = δ_{is} conj((xA)_{jk}).
    let mut odd = vec![FloatElement::zero(gens); gens];
    let half = Complex64::new(0.5, 0.0);
    let (dx, dy) = if bar {
        // Y(x̄) = −Fᵀx̄, so Ȳ(x) = conj(Y(x̄)) = −conj(F)ᵀ x.
        (conj_matrix(&fm)?.transpose().neg().matmul(&f.x), conj_matrix(&gm)?.transpose().neg().matmul(&f.y))
    } else {
        (fm.matmul(&f.x), gm.matmul(&f.y))
    };
    for k in 0..p {
        let (re, im) = unitary_generators(p, i, k);
        if bar {
            let v = xa.get(j, k).conjugate(&Conjugation::RealGenerators)?;
            odd[re - 1] = v.scale(&half);
            odd[im - 1] = v.scale(&Complex64::new(0.0, 0.5));
        } else {
            let v = xa.get(j, k);
            odd[re - 1] = v.scale(&half);
            odd[im - 1] = v.scale(&Complex64::new(0.0, -0.5));
        }
    }
    Ok(CoordinateDerivation { x: dx, y: dy, odd })
}

/// Σ_t ∂_{ψ_{it}}(xA)_{jt} + Σ_{kl} S_{kl}(f^{kl}) + Σ_{st} T_{st}(g^{st}): the
/// difference between the two orderings of Y_{ij}, as a multiplication operator.
fn divergence(f: &Frame, p: usize, i: usize, j: usize, reading: Reading) -> Result<FloatElement, AlgebraError> {
    let gens = f.generators;
    let mut out = FloatElement::zero(gens);
    for t in 0..p {
        out = &out + &d_psi(f.x.matmul(&f.a).get(j, t), p, i, t)?;
    }
    // f^{kl} = −Σ (x₁A)_{ja}(x₂∂_{ia}A)_{kb}(A⁻¹x₃⁻¹)_{bl}; S_{kl} moves x ↦ E x and x⁻¹ ↦ −x⁻¹E,
    // E = E_{kl} (Left) or E_{lk} (Transposed). g does not involve y, so T(g) = 0.
    let da: Vec<GMatrix<Complex64>> =
        (0..p).map(|a| f.a.map(|e| d_psi(e, p, i, a).expect("generator in range"))).collect();
    let f_value = |x1: &GMatrix<Complex64>, x2: &GMatrix<Complex64>, xinv: &GMatrix<Complex64>, k: usize, l: usize| {
        let xa = x1.matmul(&f.a);
        let tail = f.a_inv.matmul(xinv);
        let mut v = FloatElement::zero(gens);
        for (a, da) in da.iter().enumerate() {
            let xda = x2.matmul(da);
            for b in 0..p {
                v = &v - &(&(xa.get(j, a) * xda.get(k, b)) * tail.get(b, l));
            }
        }
        v
    };
    for k in 0..p {
        for l in 0..p {
            let (r, c) = match reading {
                Reading::Consistent => (k, l),
                Reading::Alternate => (l, k),
            };
            let e = GMatrix::from_scalars(
                &Matrix::from_fn(p, p, |a, b| {
                    if (a, b) == (r, c) {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                }),
                gens,
            );
            let ex = e.matmul(&f.x);
            let xinv_e = f.x_inv.matmul(&e).neg();
            let (fk, fl) = match reading {
                Reading::Consistent => (k, l),
                Reading::Alternate => (l, k),
            };
            out = &out + &f_value(&ex, &f.x, &f.x_inv, fk, fl);
            out = &out + &f_value(&f.x, &ex, &f.x_inv, fk, fl);
            out = &out + &f_value(&f.x, &f.x, &xinv_e, fk, fl);
        }
    }
    Ok(out)
}

/// Realizes Y_{ij} and Ȳ_{ij} for every index pair at `point` and compares with
/// the symbol action; also reports the ψ̄ images and the divergence-form residual.
pub fn coordinate_realization_u(
    spec: &GroupSpec,
    point: &SuperPoint<Complex64>,
    reading: Reading,
) -> Result<Vec<RealizationReport>, AlgebraError> {
    let GroupKind::Unitary { p, q } = spec.kind else {
        return Err(AlgebraError::Unsupported(spec.label()));
    };
    let frame = Frame::new(spec, point)?;
    let x = embedded(&frame);
    let psi_bar = conj_matrix(&frame.odd)?;
    let xa_bar = conj_matrix(&frame.x.matmul(&frame.a))?;
    let mut out = Vec::new();
    for i in 0..q {
        for j in 0..p {
            for bar in [false, true] {
                let element = if bar { BasisElement::YBar(i, j) } else { BasisElement::Y(i, j) };
                let d = unitary_derivation(&frame, p, q, i, j, bar, reading)?;
                let realized = frame.apply(&d)?;
                let expected = expected_images(&structure_action(spec, &element)?, spec, &x);
                let image_bar = d.on_odd_matrix(&psi_bar)?;
                let expected_bar = Matrix::from_fn(q, p, |s, k| {
                    if bar && s == i {
                        xa_bar.get(j, k).clone()
                    } else {
                        FloatElement::zero(frame.generators)
                    }
                });
                let mut extra = vec![("psi-bar", image_bar.sub(&expected_bar).max_norm())];
                if !bar {
                    extra.push(("divergence-form", divergence(&frame, p, i, j, reading)?.max_norm()));
                }
                out.push(RealizationReport {
                    element: element.to_string(),
                    x_residual: realized.sub(&expected).max_norm(),
                    extra,
                });
            }
        }
    }
    Ok(out)
}

/// Real odd combinations Y+Ȳ and i(Y−Ȳ) as symbol actions.
pub fn real_odd_pair(spec: &GroupSpec, i: usize, j: usize) -> Result<[Action; 2], AlgebraError> {
    let y = structure_action(spec, &BasisElement::Y(i, j))?;
    let ybar = structure_action(spec, &BasisElement::YBar(i, j))?;
    Ok([y.add(&ybar), y.sub(&ybar).scale(GaussInt::new(0, 1))])
}
