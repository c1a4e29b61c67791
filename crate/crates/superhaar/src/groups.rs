//! Supergroup specifications and Haar sampling of their underlying classical groups.

use std::fmt;

use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::grassmann::{Coefficient, Conjugation, Gauss};
use crate::matrix::Matrix;
use crate::supermatrix::{symplectic_form, MetricData};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("dimensions must be positive, got {0}")]
    ZeroDimension(String),
    #[error("{0} requires all classical factors to be U(1)")]
    NotTorus(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupKind {
    /// OSp(m|2n): classical part O(m) × Sp(2n).
    Orthosymplectic { m: usize, n: usize },
    /// U(p|q): classical part U(p) × U(q).
    Unitary { p: usize, q: usize },
    /// UOSp(m|2n): classical part O(m) × USp(2n).
    UnitaryOrthosymplectic { m: usize, n: usize },
}

/// Which supergroup, with its metric data and Grassmann generator count.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupSpec {
    pub kind: GroupKind,
    pub even_dim: usize,
    pub odd_dim: usize,
    pub generators: usize,
    pub metric: MetricData,
    pub conjugation: Option<Conjugation>,
}

fn positive(name: &str, pairs: &[(&str, usize)]) -> Result<(), GroupError> {
    for (label, value) in pairs {
        if *value == 0 {
            return Err(GroupError::ZeroDimension(format!("{name}: {label} = 0")));
        }
    }
    Ok(())
}

impl GroupSpec {
    pub fn osp(m: usize, n: usize) -> Result<Self, GroupError> {
        positive("osp", &[("m", m), ("n", n)])?;
        Ok(Self {
            kind: GroupKind::Orthosymplectic { m, n },
            even_dim: m,
            odd_dim: 2 * n,
            generators: 2 * m * n,
            metric: MetricData::orthosymplectic(m, n),
            conjugation: None,
        })
    }

    pub fn unitary(p: usize, q: usize) -> Result<Self, GroupError> {
        positive("u", &[("p", p), ("q", q)])?;
        Ok(Self {
            kind: GroupKind::Unitary { p, q },
            even_dim: p,
            odd_dim: q,
            generators: 2 * p * q,
            metric: MetricData::unitary(p, q),
            conjugation: Some(Conjugation::RealGenerators),
        })
    }

    pub fn uosp(m: usize, n: usize) -> Result<Self, GroupError> {
        positive("uosp", &[("m", m), ("n", n)])?;
        Ok(Self {
            kind: GroupKind::UnitaryOrthosymplectic { m, n },
            even_dim: m,
            odd_dim: 2 * n,
            generators: 2 * m * n,
            metric: MetricData::orthosymplectic(m, n),
            conjugation: Some(Conjugation::adjacent_pairs(2 * m * n)),
        })
    }

    pub fn size(&self) -> usize {
        self.even_dim + self.odd_dim
    }

    /// Dimension of the odd part of the Lie superalgebra over ℝ.
    pub fn odd_algebra_dim(&self) -> usize {
        self.generators
    }

    pub fn is_torus(&self) -> bool {
        matches!(self.kind, GroupKind::Unitary { p: 1, q: 1 })
    }

    /// Order of left derivatives in the Berezin integral, leftmost first.
    pub fn berezin_order(&self) -> Vec<usize> {
        match self.kind {
            GroupKind::Unitary { .. } => (1..=self.generators).collect(),
            _ => (1..=self.generators).rev().collect(),
        }
    }

    /// Compact label such as `osp:m=2,n=1`.
    pub fn label(&self) -> String {
        match self.kind {
            GroupKind::Orthosymplectic { m, n } => format!("osp:m={m},n={n}"),
            GroupKind::Unitary { p, q } => format!("u:p={p},q={q}"),
            GroupKind::UnitaryOrthosymplectic { m, n } => format!("uosp:m={m},n={n}"),
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GroupKind::Orthosymplectic { m, n } => write!(f, "OSp({m}|{})", 2 * n),
            GroupKind::Unitary { p, q } => write!(f, "U({p}|{q})"),
            GroupKind::UnitaryOrthosymplectic { m, n } => write!(f, "UOSp({m}|{})", 2 * n),
        }
    }
}

/// A point of the classical group: `x` in O(m) or U(p); `y` in USp(2n) or U(q).
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalPoint<C> {
    pub x: Matrix<C>,
    pub y: Matrix<C>,
}

impl<C: Coefficient> ClassicalPoint<C> {
    pub fn identity(spec: &GroupSpec) -> Self {
        let id = |k: usize| Matrix::from_fn(k, k, |i, j| if i == j { C::one() } else { C::zero() });
        Self { x: id(spec.even_dim), y: id(spec.odd_dim) }
    }
}

/// Exact torus point for U(1|1): `x` and `y` are the phase variables 0 and 1.
pub fn torus_point() -> ClassicalPoint<crate::grassmann::PhasePoly> {
    use crate::grassmann::PhasePoly;
    ClassicalPoint { x: Matrix::filled(1, 1, PhasePoly::phase(0, 1)), y: Matrix::filled(1, 1, PhasePoly::phase(1, 1)) }
}

/// How the classical Haar integral is carried out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HaarStrategy {
    ExactPhase,
    MonteCarlo { samples: usize, seed: u64 },
}

/// Deterministic generator for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(normal(rng), normal(rng)) * std::f64::consts::FRAC_1_SQRT_2
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn axpy(target: &mut [Complex64], factor: Complex64, v: &[Complex64]) {
    for (t, x) in target.iter_mut().zip(v) {
        *t -= factor * x;
    }
}

fn normalize(v: &mut [Complex64]) {
    let norm = inner(v, v).re.sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
}

/// Columns of the Q factor of `columns` (R with positive real diagonal),
/// by twice-iterated modified Gram–Schmidt.
fn orthonormalize(columns: Vec<Vec<Complex64>>) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(columns.len());
    for mut v in columns {
        for _ in 0..2 {
            for u in &basis {
                let c = inner(u, &v);
                axpy(&mut v, c, u);
            }
        }
        normalize(&mut v);
        basis.push(v);
    }
    basis
}

/// σ(v) = −J v̄, the quaternionic partner of a column of a USp(2n) matrix.
fn quaternionic_partner(v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len() / 2;
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * n];
    for a in 0..n {
        out[a] = -v[a + n].conj();
        out[a + n] = v[a].conj();
    }
    out
}

fn from_columns(columns: &[Vec<Complex64>]) -> Matrix<Complex64> {
    let rows = columns.first().map_or(0, Vec::len);
    Matrix::from_fn(rows, columns.len(), |i, j| columns[j][i])
}

/// Haar-random orthogonal matrix (both components of O(m)).
pub fn sample_orthogonal(size: usize, rng: &mut impl Rng) -> Matrix<Complex64> {
    let columns = (0..size).map(|_| (0..size).map(|_| Complex64::new(normal(rng), 0.0)).collect()).collect();
    from_columns(&orthonormalize(columns))
}

/// Haar-random unitary matrix.
pub fn sample_unitary(size: usize, rng: &mut impl Rng) -> Matrix<Complex64> {
    let columns = (0..size).map(|_| (0..size).map(|_| complex_normal(rng)).collect()).collect();
    from_columns(&orthonormalize(columns))
}

/// Haar-random element of USp(2n) = {z : z†z = I, zᵀJz = J}.
pub fn sample_compact_symplectic(n: usize, rng: &mut impl Rng) -> Matrix<Complex64> {
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(2 * n);
    let mut firsts: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut v: Vec<Complex64> = (0..2 * n).map(|_| complex_normal(rng)).collect();
        for _ in 0..2 {
            for u in &basis {
                let c = inner(u, &v);
                axpy(&mut v, c, u);
            }
        }
        normalize(&mut v);
        let partner = quaternionic_partner(&v);
        basis.push(v.clone());
        basis.push(partner);
        firsts.push(v);
    }
    let partners: Vec<Vec<Complex64>> = firsts.iter().map(|v| quaternionic_partner(v)).collect();
    let columns: Vec<Vec<Complex64>> = firsts.into_iter().chain(partners).collect();
    from_columns(&columns)
}

/// Haar sample of the classical group underlying `spec`.
pub fn sample(spec: &GroupSpec, rng: &mut impl Rng) -> ClassicalPoint<Complex64> {
    match spec.kind {
        GroupKind::Orthosymplectic { m, n } | GroupKind::UnitaryOrthosymplectic { m, n } => {
            ClassicalPoint { x: sample_orthogonal(m, rng), y: sample_compact_symplectic(n, rng) }
        }
        GroupKind::Unitary { p, q } => ClassicalPoint { x: sample_unitary(p, rng), y: sample_unitary(q, rng) },
    }
}

const TRIPLES: [(i64, i64, i64); 5] = [(3, 4, 5), (5, 12, 13), (8, 15, 17), (7, 24, 25), (20, 21, 29)];

fn exact_matmul<C: Coefficient>(a: &Matrix<C>, b: &Matrix<C>) -> Matrix<C> {
    Matrix::from_fn(a.rows(), b.cols(), |i, j| {
        (0..a.cols()).fold(C::zero(), |acc, k| acc + a.get(i, k).clone() * b.get(k, j).clone())
    })
}

fn exact_identity(size: usize) -> Matrix<Gauss> {
    Matrix::from_fn(size, size, |i, j| if i == j { Gauss::one() } else { Gauss::zero() })
}

/// Rotation by a random Pythagorean angle in the coordinate plane (a, b).
fn exact_rotation(size: usize, a: usize, b: usize, rng: &mut impl Rng) -> Matrix<Gauss> {
    let (leg1, leg2, hyp) = TRIPLES[rng.random_range(0..TRIPLES.len())];
    let sign = if rng.random::<bool>() { 1 } else { -1 };
    let mut out = exact_identity(size);
    out.set(a, a, Gauss::ratio(leg1, hyp));
    out.set(b, b, Gauss::ratio(leg1, hyp));
    out.set(a, b, Gauss::ratio(-sign * leg2, hyp));
    out.set(b, a, Gauss::ratio(sign * leg2, hyp));
    out
}

fn quarter_phase(rng: &mut impl Rng) -> Gauss {
    match rng.random_range(0..4) {
        0 => Gauss::one(),
        1 => Gauss::imag_unit(),
        2 => -Gauss::one(),
        _ => -Gauss::imag_unit(),
    }
}

fn exact_orthogonal(size: usize, rng: &mut impl Rng) -> Matrix<Gauss> {
    let mut out = exact_identity(size);
    for a in 0..size {
        if rng.random::<bool>() {
            out.set(a, a, -Gauss::one());
        }
    }
    for _ in 0..2 {
        for a in 1..size {
            out = exact_matmul(&out, &exact_rotation(size, a - 1, a, rng));
        }
    }
    out
}

fn exact_unitary(size: usize, rng: &mut impl Rng) -> Matrix<Gauss> {
    let rotation = exact_orthogonal(size, rng);
    let mut phases = Matrix::filled(size, size, Gauss::zero());
    for a in 0..size {
        phases.set(a, a, quarter_phase(rng));
    }
    exact_matmul(&exact_matmul(&rotation, &phases), &exact_orthogonal(size, rng))
}

fn exact_compact_symplectic(n: usize, rng: &mut impl Rng) -> Matrix<Gauss> {
    let u = exact_unitary(n, rng);
    let mut out = Matrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => u.get(i, j).clone(),
        (false, false) => u.get(i - n, j - n).conj(),
        _ => Gauss::zero(),
    });
    for a in 0..n {
        out = exact_matmul(&out, &exact_rotation(2 * n, a, a + n, rng));
        let mut phase = exact_identity(2 * n);
        let z = quarter_phase(rng);
        phase.set(a + n, a + n, z.conj());
        phase.set(a, a, z);
        out = exact_matmul(&phase, &out);
    }
    out
}

/// A random classical point with Gaussian-rational entries lying exactly in the
/// group (products of Pythagorean rotations and quarter-turn phases).
pub fn exact_sample(spec: &GroupSpec, rng: &mut impl Rng) -> ClassicalPoint<Gauss> {
    match spec.kind {
        GroupKind::Orthosymplectic { m, n } | GroupKind::UnitaryOrthosymplectic { m, n } => {
            ClassicalPoint { x: exact_orthogonal(m, rng), y: exact_compact_symplectic(n, rng) }
        }
        GroupKind::Unitary { p, q } => ClassicalPoint { x: exact_unitary(p, rng), y: exact_unitary(q, rng) },
    }
}

/// Exact residual check of the classical constraints (all must vanish).
pub fn exact_classical_ok(spec: &GroupSpec, point: &ClassicalPoint<Gauss>) -> bool {
    let adjoint = |a: &Matrix<Gauss>| Matrix::from_fn(a.cols(), a.rows(), |i, j| a.get(j, i).conj());
    let unitary = |a: &Matrix<Gauss>| exact_matmul(&adjoint(a), a) == exact_identity(a.rows());
    let mut ok = unitary(&point.x) && unitary(&point.y);
    if let GroupKind::Orthosymplectic { n, .. } | GroupKind::UnitaryOrthosymplectic { n, .. } = spec.kind {
        let j = symplectic_form(n).map(|&v| Gauss::from_i64(v));
        ok &= exact_matmul(&exact_matmul(&point.y.transpose(), &j), &point.y) == j;
        ok &= point.x.entries().iter().all(|v| v.im.is_zero());
    }
    ok
}

fn numeric_matmul(a: &Matrix<Complex64>, b: &Matrix<Complex64>) -> Matrix<Complex64> {
    Matrix::from_fn(a.rows(), b.cols(), |i, j| (0..a.cols()).map(|k| a.get(i, k) * b.get(k, j)).sum())
}

fn dagger(a: &Matrix<Complex64>) -> Matrix<Complex64> {
    Matrix::from_fn(a.cols(), a.rows(), |i, j| a.get(j, i).conj())
}

fn distance(a: &Matrix<Complex64>, b: &Matrix<Complex64>) -> f64 {
    a.entries().iter().zip(b.entries()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn identity(size: usize) -> Matrix<Complex64> {
    Matrix::from_fn(size, size, |i, j| Complex64::new(f64::from(u8::from(i == j)), 0.0))
}

fn integer_matrix(m: &Matrix<i64>) -> Matrix<Complex64> {
    m.map(|&v| Complex64::new(v as f64, 0.0))
}

/// Residuals of the classical constraints: (‖x†x − I‖, ‖y†y − I‖, ‖yᵀJy − J‖ or 0).
pub fn classical_residuals(spec: &GroupSpec, point: &ClassicalPoint<Complex64>) -> [f64; 3] {
    let x_res = distance(&numeric_matmul(&dagger(&point.x), &point.x), &identity(point.x.rows()));
    let y_res = distance(&numeric_matmul(&dagger(&point.y), &point.y), &identity(point.y.rows()));
    let mut extra = 0.0;
    if let GroupKind::Orthosymplectic { n, .. } | GroupKind::UnitaryOrthosymplectic { n, .. } = spec.kind {
        let j = integer_matrix(&symplectic_form(n));
        extra = distance(&numeric_matmul(&numeric_matmul(&point.y.transpose(), &j), &point.y), &j);
        let imaginary = point.x.entries().iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        extra = extra.max(imaginary);
    }
    [x_res, y_res, extra]
}

/// ∫_{U(1)^k} Π x_t^{k_t} x̄_t^{l_t} = Π δ_{k_t l_t}.
pub fn exact_u1_moment(spec: &GroupSpec, exponents: &[(u32, u32)]) -> Result<Gauss, GroupError> {
    if !spec.is_torus() {
        return Err(GroupError::NotTorus(spec.to_string()));
    }
    Ok(if exponents.iter().all(|(k, l)| k == l) { Gauss::one() } else { Gauss::zero() })
}

/// Whether a numeric supermatrix lies in the Lie superalgebra of `spec`.
pub fn check_membership_algebra(spec: &GroupSpec, y: &Matrix<Complex64>, tolerance: f64) -> bool {
    let k = spec.even_dim;
    let l = spec.odd_dim;
    if y.rows() != k + l || y.cols() != k + l {
        return false;
    }
    let a = y.block(0, 0, k, k);
    let c = y.block(0, k, k, l);
    let lower = y.block(k, 0, l, k);
    let b = y.block(k, k, l, l);
    match spec.kind {
        GroupKind::Orthosymplectic { n, .. } | GroupKind::UnitaryOrthosymplectic { n, .. } => {
            let j = integer_matrix(&symplectic_form(n));
            let a_ok = distance(&a.transpose(), &a.map(|v| -v)) <= tolerance;
            let b_ok = distance(&b.transpose(), &numeric_matmul(&numeric_matmul(&j, &b), &j)) <= tolerance;
            let c_ok = distance(&lower, &numeric_matmul(&j, &c.transpose())) <= tolerance;
            a_ok && b_ok && c_ok
        }
        GroupKind::Unitary { .. } => {
            let i = Complex64::new(0.0, 1.0);
            let a_ok = distance(&dagger(&a), &a.map(|v| -v)) <= tolerance;
            let b_ok = distance(&dagger(&b), &b.map(|v| -v)) <= tolerance;
            let c_ok = distance(&lower, &dagger(&c).map(|v| -i * v)) <= tolerance;
            a_ok && b_ok && c_ok
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_counts() {
        assert_eq!(GroupSpec::osp(3, 2).unwrap().generators, 12);
        assert_eq!(GroupSpec::unitary(2, 1).unwrap().generators, 4);
        assert_eq!(GroupSpec::uosp(2, 1).unwrap().generators, 4);
        assert!(GroupSpec::osp(0, 1).is_err());
    }

    #[test]
    fn per_sample_streams_are_reproducible() {
        let spec = GroupSpec::unitary(2, 1).unwrap();
        let a = sample(&spec, &mut sample_rng(9, 4));
        let b = sample(&spec, &mut sample_rng(9, 4));
        let c = sample(&spec, &mut sample_rng(9, 5));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn exact_samples_lie_in_the_group() {
        for spec in [GroupSpec::osp(3, 2).unwrap(), GroupSpec::unitary(2, 3).unwrap(), GroupSpec::uosp(2, 2).unwrap()] {
            for index in 0..10 {
                let point = exact_sample(&spec, &mut sample_rng(3, index));
                assert!(exact_classical_ok(&spec, &point), "{spec}");
            }
        }
    }
}
