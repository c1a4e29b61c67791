//! Matrices over Grassmann algebras: super block structure, supertranspose,
//! superadjoint, even determinants and matrix nilpotent series.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, RwLock};

use serde_json::{json, Value};
use thiserror::Error;

use crate::grassmann::{Coefficient, Conjugation, Gauss, GrassmannElement, GrassmannError};
use crate::matrix::Matrix;

/// Matrix with Grassmann-valued entries over a shared Λ_N.
pub type GMatrix<C> = Matrix<GrassmannElement<C>>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("dimension mismatch: {0}")]
    Dimensions(String),
    #[error("entry ({row}, {col}) has the wrong parity")]
    Parity { row: usize, col: usize },
    #[error("matrix body is not the identity")]
    BodyNotIdentity,
    #[error("matrix body is singular")]
    SingularBody,
    #[error("entries must be even")]
    NotEven,
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
    #[error("malformed JSON: {0}")]
    Json(String),
}

impl<C: Coefficient> GMatrix<C> {
    pub fn zeros(rows: usize, cols: usize, generators: usize) -> Self {
        Matrix::filled(rows, cols, GrassmannElement::zero(generators))
    }

    pub fn identity(size: usize, generators: usize) -> Self {
        Matrix::from_fn(size, size, |i, j| {
            if i == j {
                GrassmannElement::one(generators)
            } else {
                GrassmannElement::zero(generators)
            }
        })
    }

    /// Constant matrix lifted into Λ_N.
    pub fn from_scalars(values: &Matrix<C>, generators: usize) -> Self {
        values.map(|v| GrassmannElement::scalar(generators, v.clone()))
    }

    pub fn num_generators(&self) -> usize {
        self.entries().first().map_or(0, GrassmannElement::num_generators)
    }

    pub fn try_matmul(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.cols() != other.rows() {
            return Err(MatrixError::Dimensions(format!(
                "{}x{} times {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        let generators = self.num_generators().max(other.num_generators());
        let mut out = Self::zeros(self.rows(), other.cols(), generators);
        for i in 0..self.rows() {
            for j in 0..other.cols() {
                let mut acc = GrassmannElement::zero(generators);
                for k in 0..self.cols() {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = acc.try_add(&a.try_mul(b)?)?;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        self.try_matmul(other).expect("incompatible matrices")
    }

    fn zip(&self, other: &Self, subtract: bool) -> Result<Self, MatrixError> {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return Err(MatrixError::Dimensions("elementwise shapes differ".into()));
        }
        let mut out = self.clone();
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let v = if subtract {
                    self.get(i, j).try_sub(other.get(i, j))?
                } else {
                    self.get(i, j).try_add(other.get(i, j))?
                };
                out.set(i, j, v);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, false).expect("incompatible matrices")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, true).expect("incompatible matrices")
    }

    pub fn scale(&self, factor: &C) -> Self {
        self.map(|e| e.scale(factor))
    }

    pub fn neg(&self) -> Self {
        self.map(|e| -e)
    }

    /// Entrywise conjugate transpose.
    pub fn dagger(&self, convention: &Conjugation) -> Result<Self, MatrixError> {
        let mut out = Self::zeros(self.cols(), self.rows(), self.num_generators());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.set(j, i, self.get(i, j).conjugate(convention)?);
            }
        }
        Ok(out)
    }

    pub fn body(&self) -> Matrix<C> {
        self.map(GrassmannElement::body)
    }

    pub fn max_norm(&self) -> f64 {
        self.entries().iter().map(GrassmannElement::max_norm).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> GrassmannElement<C> {
        let mut acc = GrassmannElement::zero(self.num_generators());
        for i in 0..self.rows().min(self.cols()) {
            acc = &acc + self.get(i, i);
        }
        acc
    }

    pub fn relabel(&self, generators: usize, offset: usize) -> Result<Self, MatrixError> {
        let mut out = Self::zeros(self.rows(), self.cols(), generators);
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.set(i, j, self.get(i, j).relabel(generators, offset)?);
            }
        }
        Ok(out)
    }

    fn soul_of_identity_shift(&self) -> Result<Self, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::Dimensions("square matrix required".into()));
        }
        let generators = self.num_generators();
        let id = Self::identity(self.rows(), generators);
        if self.body() != id.body() {
            return Err(MatrixError::BodyNotIdentity);
        }
        if self.entries().iter().any(|e| !e.is_even()) {
            return Err(MatrixError::NotEven);
        }
        Ok(self.sub(&id))
    }

    /// Σ_k c_k Z^k where `self = I + Z`, c_0 = 1 and c_k = c_{k-1}·step(k).
    fn identity_series(&self, step: impl Fn(usize) -> C, constant: bool) -> Result<Self, MatrixError> {
        let z = self.soul_of_identity_shift()?;
        let generators = self.num_generators();
        let size = self.rows();
        let mut term = Self::identity(size, generators);
        let mut out = if constant { term.clone() } else { Self::zeros(size, size, generators) };
        let mut k = 1;
        loop {
            term = term.matmul(&z).scale(&step(k));
            if term.entries().iter().all(GrassmannElement::is_zero) {
                break;
            }
            out = out.add(&term);
            k += 1;
        }
        Ok(out)
    }

    /// √(I + Z) = Σ C(½, k) Z^k for nilpotent Z.
    pub fn sqrt_block(&self) -> Result<Self, MatrixError> {
        self.identity_series(|k| C::from_ratio(3 - 2 * k as i64, 2 * k as i64), true)
    }

    /// (I + Z)^{-1} = Σ (−Z)^k for nilpotent Z.
    pub fn inverse_unipotent(&self) -> Result<Self, MatrixError> {
        self.identity_series(|_| -C::one(), true)
    }

    /// log(I + Z) = Σ (−1)^{k+1} Z^k / k for nilpotent Z.
    pub fn log_unipotent(&self) -> Result<Self, MatrixError> {
        let z = self.soul_of_identity_shift()?;
        let generators = self.num_generators();
        let size = self.rows();
        let mut power = Self::identity(size, generators);
        let mut out = Self::zeros(size, size, generators);
        let mut k = 1i64;
        loop {
            power = power.matmul(&z);
            if power.entries().iter().all(GrassmannElement::is_zero) {
                break;
            }
            out = out.add(&power.scale(&C::from_ratio(if k % 2 == 1 { 1 } else { -1 }, k)));
            k += 1;
        }
        Ok(out)
    }

    /// Determinant of a matrix with even entries via det(M₀)·exp(tr log(M₀⁻¹M)).
    pub fn det_even(&self) -> Result<GrassmannElement<C>, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::Dimensions("square matrix required".into()));
        }
        if self.entries().iter().any(|e| !e.is_even()) {
            return Err(MatrixError::NotEven);
        }
        let generators = self.num_generators();
        let body = self.body();
        let (det_body, inverse_body) = scalar_det_inverse(&body).ok_or(MatrixError::SingularBody)?;
        let unipotent = Self::from_scalars(&inverse_body, generators).matmul(self);
        let log = unipotent.log_unipotent()?;
        let exp_trace = log.trace().exp()?;
        Ok(exp_trace.scale(&det_body))
    }
}

/// Determinant and inverse of a scalar matrix by Gauss–Jordan elimination.
pub fn scalar_det_inverse<C: Coefficient>(m: &Matrix<C>) -> Option<(C, Matrix<C>)> {
    let size = m.rows();
    if !m.is_square() {
        return None;
    }
    let mut a = m.clone();
    let mut inv = Matrix::from_fn(size, size, |i, j| if i == j { C::one() } else { C::zero() });
    let mut det = C::one();
    for col in 0..size {
        let pivot = (col..size).filter(|&r| !a.get(r, col).is_zero()).max_by(|&r, &s| {
            a.get(r, col).magnitude().partial_cmp(&a.get(s, col).magnitude()).unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if pivot != col {
            for j in 0..size {
                let t = a.get(col, j).clone();
                a.set(col, j, a.get(pivot, j).clone());
                a.set(pivot, j, t);
                let t = inv.get(col, j).clone();
                inv.set(col, j, inv.get(pivot, j).clone());
                inv.set(pivot, j, t);
            }
            det = -det;
        }
        let p = a.get(col, col).clone();
        det = det * p.clone();
        let p_inv = p.inv()?;
        for j in 0..size {
            a.set(col, j, a.get(col, j).clone() * p_inv.clone());
            inv.set(col, j, inv.get(col, j).clone() * p_inv.clone());
        }
        for r in 0..size {
            if r == col || a.get(r, col).is_zero() {
                continue;
            }
            let factor = a.get(r, col).clone();
            for j in 0..size {
                a.set(r, j, a.get(r, j).clone() - factor.clone() * a.get(col, j).clone());
                inv.set(r, j, inv.get(r, j).clone() - factor.clone() * inv.get(col, j).clone());
            }
        }
    }
    Some((det, inv))
}

/// Square Grassmann matrix with even size `k` and odd size `l`; index `j`
/// (zero-based) has parity `[j] = 0` for `j < k` and `1` otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperMatrix<C> {
    even: usize,
    odd: usize,
    entries: GMatrix<C>,
}

impl<C: Coefficient> SuperMatrix<C> {
    pub fn new(even: usize, odd: usize, entries: GMatrix<C>) -> Result<Self, MatrixError> {
        let size = even + odd;
        if entries.rows() != size || entries.cols() != size {
            return Err(MatrixError::Dimensions(format!(
                "expected {size}x{size}, got {}x{}",
                entries.rows(),
                entries.cols()
            )));
        }
        let out = Self { even, odd, entries };
        out.check_parity()?;
        Ok(out)
    }

    pub fn from_blocks(
        top_left: &GMatrix<C>,
        top_right: &GMatrix<C>,
        bottom_left: &GMatrix<C>,
        bottom_right: &GMatrix<C>,
    ) -> Result<Self, MatrixError> {
        Self::new(
            top_left.rows(),
            bottom_right.rows(),
            Matrix::from_blocks(top_left, top_right, bottom_left, bottom_right),
        )
    }

    pub fn identity(even: usize, odd: usize, generators: usize) -> Self {
        Self { even, odd, entries: GMatrix::identity(even + odd, generators) }
    }

    pub fn even_dim(&self) -> usize {
        self.even
    }

    pub fn odd_dim(&self) -> usize {
        self.odd
    }

    pub fn num_generators(&self) -> usize {
        self.entries.num_generators()
    }

    pub fn entries(&self) -> &GMatrix<C> {
        &self.entries
    }

    /// Entry `(a, b)`, zero-based.
    pub fn get(&self, a: usize, b: usize) -> &GrassmannElement<C> {
        self.entries.get(a, b)
    }

    pub fn index_parity(&self, index: usize) -> bool {
        index >= self.even
    }

    pub fn check_parity(&self) -> Result<(), MatrixError> {
        for a in 0..self.even + self.odd {
            for b in 0..self.even + self.odd {
                let e = self.entries.get(a, b);
                let odd = self.index_parity(a) ^ self.index_parity(b);
                if !e.is_zero() && (if odd { !e.is_odd() } else { !e.is_even() }) {
                    return Err(MatrixError::Parity { row: a, col: b });
                }
            }
        }
        Ok(())
    }

    pub fn top_left(&self) -> GMatrix<C> {
        self.entries.block(0, 0, self.even, self.even)
    }

    pub fn top_right(&self) -> GMatrix<C> {
        self.entries.block(0, self.even, self.even, self.odd)
    }

    pub fn bottom_left(&self) -> GMatrix<C> {
        self.entries.block(self.even, 0, self.odd, self.even)
    }

    pub fn bottom_right(&self) -> GMatrix<C> {
        self.entries.block(self.even, self.even, self.odd, self.odd)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.even != other.even || self.odd != other.odd {
            return Err(MatrixError::Dimensions("block structures differ".into()));
        }
        Ok(Self { even: self.even, odd: self.odd, entries: self.entries.try_matmul(&other.entries)? })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, MatrixError> {
        Ok(Self { even: self.even, odd: self.odd, entries: self.entries.zip(&other.entries, true)? })
    }

    /// (Xᵀ)_{ki} = (−1)^{[i]([i]+[k])} X_{ik}.
    pub fn supertranspose(&self) -> Self {
        let size = self.even + self.odd;
        let entries = Matrix::from_fn(size, size, |k, i| {
            let pi = self.index_parity(i);
            let pk = self.index_parity(k);
            let e = self.entries.get(i, k);
            if pi && (pi ^ pk) {
                -e
            } else {
                e.clone()
            }
        });
        Self { even: self.even, odd: self.odd, entries }
    }

    /// X* = [[X_{I,I}†, i X_{II,I}†], [i X_{I,II}†, X_{II,II}†]].
    pub fn superadjoint(&self, convention: &Conjugation) -> Result<Self, MatrixError> {
        let i = C::imag_unit();
        Self::from_blocks(
            &self.top_left().dagger(convention)?,
            &self.bottom_left().dagger(convention)?.scale(&i),
            &self.top_right().dagger(convention)?.scale(&i),
            &self.bottom_right().dagger(convention)?,
        )
    }

    pub fn max_norm(&self) -> f64 {
        self.entries.max_norm()
    }

    /// `{k, l, N, entries}` with row-major Grassmann entries.
    pub fn to_json(&self) -> Value {
        json!({
            "k": self.even,
            "l": self.odd,
            "N": self.num_generators(),
            "entries": self.entries.entries().iter().map(GrassmannElement::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(value: &Value) -> Result<Self, MatrixError> {
        let bad = |what: &str| MatrixError::Json(what.to_string());
        let even = value.get("k").and_then(Value::as_u64).ok_or_else(|| bad("k"))? as usize;
        let odd = value.get("l").and_then(Value::as_u64).ok_or_else(|| bad("l"))? as usize;
        let generators = value.get("N").and_then(Value::as_u64).ok_or_else(|| bad("N"))? as usize;
        let items = value.get("entries").and_then(Value::as_array).ok_or_else(|| bad("entries"))?;
        let size = even + odd;
        if items.len() != size * size {
            return Err(bad("entry count"));
        }
        let parsed = items.iter().map(GrassmannElement::from_json).collect::<Result<Vec<_>, _>>()?;
        if parsed.iter().any(|e| e.num_generators() != generators) {
            return Err(bad("entry N differs from matrix N"));
        }
        let entries = Matrix::from_fn(size, size, |i, j| parsed[i * size + j].clone());
        Self::new(even, odd, entries)
    }
}

/// Orthosymplectic and unitary metric data.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricData {
    /// g = diag(I_m, J), present for orthosymplectic specs.
    pub g: Matrix<i64>,
    /// J = [[0, I_n], [−I_n, 0]].
    pub j: Matrix<i64>,
    /// h = diag(I_p, i·I_q), present for unitary specs.
    pub h: Matrix<Gauss>,
}

/// The 2n×2n symplectic form.
pub fn symplectic_form(n: usize) -> Matrix<i64> {
    Matrix::from_fn(2 * n, 2 * n, |a, b| {
        if b == a + n {
            1
        } else if a == b + n {
            -1
        } else {
            0
        }
    })
}

impl MetricData {
    pub fn orthosymplectic(m: usize, n: usize) -> Self {
        let j = symplectic_form(n);
        let g = Matrix::from_fn(m + 2 * n, m + 2 * n, |a, b| {
            if a < m || b < m {
                i64::from(a == b)
            } else {
                *j.get(a - m, b - m)
            }
        });
        Self { g, j, h: Matrix::filled(0, 0, Gauss::zero()) }
    }

    pub fn unitary(p: usize, q: usize) -> Self {
        let h = Matrix::from_fn(p + q, p + q, |a, b| {
            if a != b {
                Gauss::zero()
            } else if a < p {
                Gauss::one()
            } else {
                Gauss::imag_unit()
            }
        });
        Self { g: Matrix::filled(0, 0, 0), j: Matrix::filled(0, 0, 0), h }
    }
}

/// Integer matrix lifted into Λ_N.
pub fn lift_integer<C: Coefficient>(m: &Matrix<i64>, generators: usize) -> GMatrix<C> {
    m.map(|&v| GrassmannElement::scalar(generators, C::from_i64(v)))
}

/// θ̂ = θᵀJ for a 2n×m odd matrix θ.
pub fn theta_hat<C: Coefficient>(theta: &GMatrix<C>) -> GMatrix<C> {
    let n2 = theta.rows();
    let j = lift_integer(&symplectic_form(n2 / 2), theta.num_generators());
    theta.transpose().matmul(&j)
}

/// A = √(I_m − θ̂θ) and B = √(I_{2n} − θθ̂).
#[derive(Clone, Debug, PartialEq)]
pub struct AbPair<C> {
    pub a: GMatrix<C>,
    pub b: GMatrix<C>,
}

pub fn orthosymplectic_ab<C: Coefficient>(theta: &GMatrix<C>) -> Result<AbPair<C>, MatrixError> {
    let generators = theta.num_generators();
    let hat = theta_hat(theta);
    let a2 = GMatrix::identity(theta.cols(), generators).sub(&hat.matmul(theta));
    let b2 = GMatrix::identity(theta.rows(), generators).sub(&theta.matmul(&hat));
    Ok(AbPair { a: a2.sqrt_block()?, b: b2.sqrt_block()? })
}

/// Residuals of BᵀJ − JB and θ̂B − Aθ̂.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbReport {
    pub transpose_residual: f64,
    pub intertwining_residual: f64,
}

pub fn check_properties_ab<C: Coefficient>(theta: &GMatrix<C>) -> Result<AbReport, MatrixError> {
    let generators = theta.num_generators();
    let AbPair { a, b } = orthosymplectic_ab(theta)?;
    let j = lift_integer::<C>(&symplectic_form(theta.rows() / 2), generators);
    let hat = theta_hat(theta);
    Ok(AbReport {
        transpose_residual: b.transpose().matmul(&j).sub(&j.matmul(&b)).max_norm(),
        intertwining_residual: hat.matmul(&b).sub(&a.matmul(&hat)).max_norm(),
    })
}

type Bucket<C> = Vec<(GMatrix<C>, Arc<AbPair<C>>)>;

/// Thread-safe memo of A and B keyed by the θ matrix.
pub struct AbCache<C> {
    slots: RwLock<HashMap<u64, Bucket<C>>>,
}

impl<C: Coefficient> Default for AbCache<C> {
    fn default() -> Self {
        Self { slots: RwLock::new(HashMap::new()) }
    }
}

impl<C: Coefficient> AbCache<C> {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(theta: &GMatrix<C>) -> u64 {
        let mut hasher = DefaultHasher::new();
        theta.rows().hash(&mut hasher);
        theta.cols().hash(&mut hasher);
        for e in theta.entries() {
            e.to_json().to_string().hash(&mut hasher);
        }
        hasher.finish()
    }

    pub fn get_or_compute(&self, theta: &GMatrix<C>) -> Result<Arc<AbPair<C>>, MatrixError> {
        let key = Self::key(theta);
        if let Some(bucket) = self.slots.read().expect("cache poisoned").get(&key) {
            if let Some((_, pair)) = bucket.iter().find(|(t, _)| t == theta) {
                return Ok(Arc::clone(pair));
            }
        }
        let pair = Arc::new(orthosymplectic_ab(theta)?);
        let mut slots = self.slots.write().expect("cache poisoned");
        let bucket = slots.entry(key).or_default();
        if let Some((_, existing)) = bucket.iter().find(|(t, _)| t == theta) {
            return Ok(Arc::clone(existing));
        }
        bucket.push((theta.clone(), Arc::clone(&pair)));
        Ok(pair)
    }

    pub fn len(&self) -> usize {
        self.slots.read().expect("cache poisoned").values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
