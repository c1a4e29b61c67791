//! Coordinate embeddings X(x, y, θ), their inverses, defining relations,
//! antipode, group law and left translation.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::grassmann::{Blade, Coefficient, Conjugation, GrassmannElement};
use crate::groups::{ClassicalPoint, GroupKind, GroupSpec};
use crate::matrix::Matrix;
use crate::supermatrix::{
    lift_integer, orthosymplectic_ab, symplectic_form, theta_hat, GMatrix, MatrixError, SuperMatrix,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChartError {
    #[error("point does not match {0}")]
    Dimensions(String),
    #[error("defining relations violated (residual {0:e})")]
    RelationsViolated(f64),
    #[error("classical part of the decomposition is not in the group (residual {0:e})")]
    NotClassical(f64),
    #[error("re-embedding differs from the input (residual {0:e})")]
    Mismatch(f64),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// A point of the supermanifold: even coordinates `x`, `y` (possibly with
/// nilpotent parts) and the odd coordinate matrix (θ: 2n×m or ψ: q×p).
#[derive(Clone, Debug, PartialEq)]
pub struct SuperPoint<C> {
    pub x: GMatrix<C>,
    pub y: GMatrix<C>,
    pub odd: GMatrix<C>,
}

/// Index (1-based) of θ_{row,col} (zero-based arguments) for OSp with `m` columns.
pub fn osp_generator(m: usize, row: usize, col: usize) -> usize {
    row * m + col + 1
}

/// Indices (1-based) of ψ¹_{row,col} and ψ²_{row,col} for U(p|q).
pub fn unitary_generators(p: usize, row: usize, col: usize) -> (usize, usize) {
    let t = row * p + col;
    (2 * t + 1, 2 * t + 2)
}

/// Indices (1-based) of α_{row,col} and ᾱ_{row,col} for UOSp with `m` columns.
pub fn uosp_generators(m: usize, row: usize, col: usize) -> (usize, usize) {
    let t = row * m + col;
    (2 * t + 1, 2 * t + 2)
}

fn gen<C: Coefficient>(generators: usize, index: usize) -> GrassmannElement<C> {
    GrassmannElement::generator(generators, index).expect("generator index in range")
}

/// The universal odd coordinate matrix of `spec`, realized in Λ_{total} with
/// generator labels shifted by `offset`.
pub fn odd_coordinates<C: Coefficient>(spec: &GroupSpec, total: usize, offset: usize) -> GMatrix<C> {
    assert!(offset + spec.generators <= total, "doubled algebra too small");
    let g = |index: usize| gen::<C>(total, index + offset);
    match spec.kind {
        GroupKind::Orthosymplectic { m, n } => Matrix::from_fn(2 * n, m, |row, col| g(osp_generator(m, row, col))),
        GroupKind::Unitary { p, q } => Matrix::from_fn(q, p, |row, col| {
            let (re, im) = unitary_generators(p, row, col);
            &g(re) + &g(im).scale(&C::imag_unit())
        }),
        GroupKind::UnitaryOrthosymplectic { m, n } => Matrix::from_fn(2 * n, m, |row, col| {
            if row < n {
                g(uosp_generators(m, row, col).0)
            } else {
                -&g(uosp_generators(m, row - n, col).1)
            }
        }),
    }
}

/// Conjugation convention on a (possibly doubled) algebra for `spec`.
pub fn conjugation_for(spec: &GroupSpec, total: usize) -> Conjugation {
    match spec.kind {
        GroupKind::UnitaryOrthosymplectic { .. } => Conjugation::adjacent_pairs(total),
        _ => Conjugation::RealGenerators,
    }
}

impl<C: Coefficient> SuperPoint<C> {
    /// Lifts a classical point and attaches the universal odd coordinates.
    pub fn universal(spec: &GroupSpec, classical: &ClassicalPoint<C>) -> Self {
        Self::universal_in(spec, classical, spec.generators, 0)
    }

    pub fn universal_in(spec: &GroupSpec, classical: &ClassicalPoint<C>, total: usize, offset: usize) -> Self {
        Self {
            x: GMatrix::from_scalars(&classical.x, total),
            y: GMatrix::from_scalars(&classical.y, total),
            odd: odd_coordinates(spec, total, offset),
        }
    }

    pub fn num_generators(&self) -> usize {
        self.odd.num_generators()
    }
}

fn check_dims<C: Coefficient>(spec: &GroupSpec, p: &SuperPoint<C>) -> Result<(), ChartError> {
    let (x_size, y_size, odd_shape) = match spec.kind {
        GroupKind::Orthosymplectic { m, n } | GroupKind::UnitaryOrthosymplectic { m, n } => (m, 2 * n, (2 * n, m)),
        GroupKind::Unitary { p, q } => (p, q, (q, p)),
    };
    let ok = p.x.rows() == x_size
        && p.x.cols() == x_size
        && p.y.rows() == y_size
        && p.y.cols() == y_size
        && (p.odd.rows(), p.odd.cols()) == odd_shape;
    if ok {
        Ok(())
    } else {
        Err(ChartError::Dimensions(spec.to_string()))
    }
}

fn j_matrix<C: Coefficient>(spec: &GroupSpec, generators: usize) -> GMatrix<C> {
    lift_integer(&symplectic_form(spec.odd_dim / 2), generators)
}

/// A = √(I_p − iψ†ψ), B = √(I_q − iψψ†).
pub fn unitary_ab<C: Coefficient>(psi: &GMatrix<C>) -> Result<(GMatrix<C>, GMatrix<C>), MatrixError> {
    let generators = psi.num_generators();
    let i = C::imag_unit();
    let dag = psi.dagger(&Conjugation::RealGenerators)?;
    let a2 = GMatrix::identity(psi.cols(), generators).sub(&dag.matmul(psi).scale(&i));
    let b2 = GMatrix::identity(psi.rows(), generators).sub(&psi.matmul(&dag).scale(&i));
    Ok((a2.sqrt_block()?, b2.sqrt_block()?))
}

/// A and B of the chart at odd coordinates `odd`.
pub fn chart_ab<C: Coefficient>(spec: &GroupSpec, odd: &GMatrix<C>) -> Result<(GMatrix<C>, GMatrix<C>), MatrixError> {
    match spec.kind {
        GroupKind::Unitary { .. } => unitary_ab(odd),
        _ => {
            let pair = orthosymplectic_ab(odd)?;
            Ok((pair.a, pair.b))
        }
    }
}

/// The off-diagonal block X_{I,II} = xθ̂y (orthosymplectic) or i·xψ†y (unitary).
fn upper_right<C: Coefficient>(spec: &GroupSpec, p: &SuperPoint<C>) -> Result<GMatrix<C>, MatrixError> {
    Ok(match spec.kind {
        GroupKind::Unitary { .. } => {
            p.x.matmul(&p.odd.dagger(&Conjugation::RealGenerators)?).matmul(&p.y).scale(&C::imag_unit())
        }
        _ => p.x.matmul(&theta_hat(&p.odd)).matmul(&p.y),
    })
}

/// X(x, y, θ) for the chart of `spec`.
pub fn embed<C: Coefficient>(spec: &GroupSpec, p: &SuperPoint<C>) -> Result<SuperMatrix<C>, ChartError> {
    check_dims(spec, p)?;
    let (a, b) = chart_ab(spec, &p.odd)?;
    Ok(SuperMatrix::from_blocks(&p.x.matmul(&a), &upper_right(spec, p)?, &p.odd, &b.matmul(&p.y))?)
}

/// Named residual norms of an identity check.
#[derive(Clone, Debug, PartialEq)]
pub struct Residuals {
    pub entries: Vec<(&'static str, f64)>,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.entries.iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }
}

fn identity_like<C: Coefficient>(size: usize, generators: usize, factor: C) -> GMatrix<C> {
    GMatrix::identity(size, generators).scale(&factor)
}

/// Residuals of the three block relations (and, for UOSp, of the unitarity relation).
pub fn check_defining_relations<C: Coefficient>(spec: &GroupSpec, x: &SuperMatrix<C>) -> Result<Residuals, ChartError> {
    let generators = x.num_generators();
    let (tl, tr, bl, br) = (x.top_left(), x.top_right(), x.bottom_left(), x.bottom_right());
    let k = spec.even_dim;
    let l = spec.odd_dim;
    let mut entries = Vec::new();
    match spec.kind {
        GroupKind::Unitary { .. } => {
            let conj = Conjugation::RealGenerators;
            let i = C::imag_unit();
            let (tl_d, tr_d, bl_d, br_d) = (tl.dagger(&conj)?, tr.dagger(&conj)?, bl.dagger(&conj)?, br.dagger(&conj)?);
            let r1 = tl_d.matmul(&tl).add(&bl_d.matmul(&bl).scale(&i)).sub(&GMatrix::identity(k, generators));
            let r2 = tl_d.matmul(&tr).neg().add(&bl_d.matmul(&br).scale(&i));
            let r3 = tr_d.matmul(&tr).neg().add(&br_d.matmul(&br).scale(&i)).sub(&identity_like(l, generators, i));
            entries.push(("even-even", r1.max_norm()));
            entries.push(("even-odd", r2.max_norm()));
            entries.push(("odd-odd", r3.max_norm()));
        }
        _ => {
            let j = j_matrix::<C>(spec, generators);
            let r1 = tl
                .transpose()
                .matmul(&tl)
                .add(&bl.transpose().matmul(&j).matmul(&bl))
                .sub(&GMatrix::identity(k, generators));
            let r2 = tl.transpose().matmul(&tr).neg().add(&bl.transpose().matmul(&j).matmul(&br));
            let r3 = tr.transpose().matmul(&tr).neg().add(&br.transpose().matmul(&j).matmul(&br)).sub(&j);
            entries.push(("even-even", r1.max_norm()));
            entries.push(("even-odd", r2.max_norm()));
            entries.push(("odd-odd", r3.max_norm()));
            if let GroupKind::UnitaryOrthosymplectic { .. } = spec.kind {
                let conj = conjugation_for(spec, generators);
                let left =
                    Matrix::from_blocks(&tl.dagger(&conj)?, &bl.dagger(&conj)?, &tr.dagger(&conj)?, &br.dagger(&conj)?);
                let right = Matrix::from_blocks(&tl, &tr.neg(), &bl, &br);
                let r4 = left.matmul(&right).sub(&GMatrix::identity(k + l, generators));
                entries.push(("unitarity", r4.max_norm()));
            }
        }
    }
    Ok(Residuals { entries })
}

/// Product realizing μ♯: Z_ij = Σ_k (−1)^{([i]+[k])([k]+[j])} X_ik Y_kj.
pub fn group_product<C: Coefficient>(
    left: &SuperMatrix<C>,
    right: &SuperMatrix<C>,
) -> Result<SuperMatrix<C>, ChartError> {
    let k = left.even_dim();
    let size = k + left.odd_dim();
    if right.even_dim() != k || right.odd_dim() != left.odd_dim() {
        return Err(ChartError::Dimensions("block structures differ".into()));
    }
    let generators = left.num_generators().max(right.num_generators());
    let parity = |i: usize| i >= k;
    let mut out = GMatrix::zeros(size, size, generators);
    for i in 0..size {
        for j in 0..size {
            let mut acc = GrassmannElement::zero(generators);
            for t in 0..size {
                let term = left.get(i, t).try_mul(right.get(t, j)).map_err(MatrixError::from)?;
                if (parity(i) ^ parity(t)) && (parity(t) ^ parity(j)) {
                    acc = &acc - &term;
                } else {
                    acc = &acc + &term;
                }
            }
            out.set(i, j, acc);
        }
    }
    Ok(SuperMatrix::new(k, left.odd_dim(), out)?)
}

/// The antipode ν applied to the matrix elements.
pub fn antipode<C: Coefficient>(spec: &GroupSpec, x: &SuperMatrix<C>) -> Result<SuperMatrix<C>, ChartError> {
    let generators = x.num_generators();
    let (tl, tr, bl, br) = (x.top_left(), x.top_right(), x.bottom_left(), x.bottom_right());
    let blocks = match spec.kind {
        GroupKind::Unitary { .. } => {
            let conj = Conjugation::RealGenerators;
            let minus_i = -C::imag_unit();
            (tl.dagger(&conj)?, bl.dagger(&conj)?.scale(&minus_i), tr.dagger(&conj)?.scale(&minus_i), br.dagger(&conj)?)
        }
        _ => {
            let j = j_matrix::<C>(spec, generators);
            (
                tl.transpose(),
                bl.transpose().matmul(&j).neg(),
                j.matmul(&tr.transpose()).neg(),
                j.matmul(&br.transpose()).matmul(&j).neg(),
            )
        }
    };
    Ok(SuperMatrix::from_blocks(&blocks.0, &blocks.1, &blocks.2, &blocks.3)?)
}

/// Residuals of ν(X)·X − I and X·ν(X) − I under the group product.
pub fn check_antipode<C: Coefficient>(spec: &GroupSpec, x: &SuperMatrix<C>) -> Result<Residuals, ChartError> {
    let nu = antipode(spec, x)?;
    let id = SuperMatrix::identity(x.even_dim(), x.odd_dim(), x.num_generators());
    let left = group_product(&nu, x)?.sub(&id)?.max_norm();
    let right = group_product(x, &nu)?.sub(&id)?.max_norm();
    let involution = antipode(spec, &nu)?.sub(x)?.max_norm();
    Ok(Residuals { entries: vec![("nu(X)X-I", left), ("X nu(X)-I", right), ("nu(nu(X))-X", involution)] })
}

fn classical_residual<C: Coefficient>(spec: &GroupSpec, body: &Matrix<C>, odd_block: bool) -> f64 {
    let size = body.rows();
    let conj_t = Matrix::from_fn(size, size, |i, j| body.get(j, i).conj());
    let mut residual: f64 = 0.0;
    for i in 0..size {
        for j in 0..size {
            let mut acc = C::zero();
            for t in 0..size {
                acc = acc + conj_t.get(i, t).clone() * body.get(t, j).clone();
            }
            if i == j {
                acc = acc - C::one();
            }
            residual = residual.max(acc.magnitude());
        }
    }
    let orthosymplectic = !matches!(spec.kind, GroupKind::Unitary { .. });
    if orthosymplectic && !odd_block {
        for v in body.entries() {
            residual = residual.max((v.clone() - v.conj()).magnitude());
        }
    }
    residual
}

/// Inverse chart: θ = X_{II,I}, x = X_{I,I}A⁻¹, y = B⁻¹X_{II,II}.
pub fn decompose<C: Coefficient>(
    spec: &GroupSpec,
    x: &SuperMatrix<C>,
    tolerance: f64,
) -> Result<SuperPoint<C>, ChartError> {
    if x.even_dim() != spec.even_dim || x.odd_dim() != spec.odd_dim {
        return Err(ChartError::Dimensions(spec.to_string()));
    }
    let relations = check_defining_relations(spec, x)?.max();
    if relations > tolerance {
        return Err(ChartError::RelationsViolated(relations));
    }
    let odd = x.bottom_left();
    let (a, b) = chart_ab(spec, &odd)?;
    let point = SuperPoint {
        x: x.top_left().matmul(&a.inverse_unipotent()?),
        y: b.inverse_unipotent()?.matmul(&x.bottom_right()),
        odd,
    };
    let classical =
        classical_residual(spec, &point.x.body(), false).max(classical_residual(spec, &point.y.body(), true));
    if classical > tolerance {
        return Err(ChartError::NotClassical(classical));
    }
    let mismatch = embed(spec, &point)?.sub(x)?.max_norm();
    if mismatch > tolerance {
        return Err(ChartError::Mismatch(mismatch));
    }
    Ok(point)
}

/// Left co-action of the classical group: (g_x x, g_y y, g_y θ).
pub fn left_translate<C: Coefficient>(g: &ClassicalPoint<C>, p: &SuperPoint<C>) -> SuperPoint<C> {
    let generators = p.num_generators();
    let gx = GMatrix::from_scalars(&g.x, generators);
    let gy = GMatrix::from_scalars(&g.y, generators);
    SuperPoint { x: gx.matmul(&p.x), y: gy.matmul(&p.y), odd: gy.matmul(&p.odd) }
}

/// Block-diagonal supermatrix diag(g_x, g_y).
pub fn classical_matrix<C: Coefficient>(g: &ClassicalPoint<C>, generators: usize) -> SuperMatrix<C> {
    let gx = GMatrix::from_scalars(&g.x, generators);
    let gy = GMatrix::from_scalars(&g.y, generators);
    SuperMatrix::from_blocks(
        &gx,
        &GMatrix::zeros(gx.rows(), gy.rows(), generators),
        &GMatrix::zeros(gy.rows(), gx.rows(), generators),
        &gy,
    )
    .expect("block-diagonal matrices are parity consistent")
}

/// Residual of conj(θ) = −Jθ under the second-kind convention.
pub fn uosp_reality_residual<C: Coefficient>(spec: &GroupSpec, theta: &GMatrix<C>) -> Result<f64, ChartError> {
    let generators = theta.num_generators();
    let conj = conjugation_for(spec, generators);
    let conjugated = theta.map(|e| e.conjugate(&conj).expect("paired generators"));
    let j = j_matrix::<C>(spec, generators);
    Ok(conjugated.add(&j.matmul(theta)).max_norm())
}

/// Invariant θ̂θ of the orthosymplectic chart.
pub fn theta_hat_theta<C: Coefficient>(theta: &GMatrix<C>) -> GMatrix<C> {
    theta_hat(theta).matmul(theta)
}

fn random_odd(generators: &[usize], total: usize, complex: bool, rng: &mut impl Rng) -> GrassmannElement<Complex64> {
    let mut draw = || {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = if complex { rng.sample(StandardNormal) } else { 0.0 };
        Complex64::new(re, im) * 0.5
    };
    let mut terms: Vec<(Blade, Complex64)> = Vec::new();
    for (a, &first) in generators.iter().enumerate() {
        terms.push((1 << (first - 1), draw()));
        for (b, &second) in generators.iter().enumerate().skip(a + 1) {
            for &third in &generators[b + 1..] {
                let blade: Blade = (1 << (first - 1)) | (1 << (second - 1)) | (1 << (third - 1));
                terms.push((blade, draw() * 0.5));
            }
        }
    }
    GrassmannElement::from_terms(total, terms).expect("blades within range")
}

/// A point over Λ_K whose odd coordinates are random odd elements (linear plus
/// cubic parts) rather than independent generators. For UOSp, `depth` counts
/// conjugate pairs and the algebra has 2·depth generators.
pub fn random_point(
    spec: &GroupSpec,
    classical: &ClassicalPoint<Complex64>,
    depth: usize,
    rng: &mut impl Rng,
) -> SuperPoint<Complex64> {
    let (total, odd) = match spec.kind {
        GroupKind::Orthosymplectic { m, n } => {
            let gens: Vec<usize> = (1..=depth).collect();
            (depth, Matrix::from_fn(2 * n, m, |_, _| random_odd(&gens, depth, false, rng)))
        }
        GroupKind::Unitary { p, q } => {
            let gens: Vec<usize> = (1..=depth).collect();
            (depth, Matrix::from_fn(q, p, |_, _| random_odd(&gens, depth, true, rng)))
        }
        GroupKind::UnitaryOrthosymplectic { m, n } => {
            let total = 2 * depth;
            let holomorphic: Vec<usize> = (0..depth).map(|t| 2 * t + 1).collect();
            let conj = Conjugation::adjacent_pairs(total);
            let alpha = Matrix::from_fn(n, m, |_, _| random_odd(&holomorphic, total, true, rng));
            let theta = Matrix::from_fn(2 * n, m, |row, col| {
                if row < n {
                    alpha.get(row, col).clone()
                } else {
                    -&alpha.get(row - n, col).conjugate(&conj).expect("paired generators")
                }
            });
            (total, theta)
        }
    };
    SuperPoint { x: GMatrix::from_scalars(&classical.x, total), y: GMatrix::from_scalars(&classical.y, total), odd }
}

/// Largest Λ_{2N} in which two universal points are multiplied directly.
pub const DOUBLED_LIMIT: usize = 8;

/// Residuals of the defining relations and of the antipode at the universal
/// point over Haar sample `index` of the run seeded with `seed`.
pub fn sampled_structure_residuals(spec: &GroupSpec, seed: u64, index: u64) -> Result<Residuals, ChartError> {
    let g = crate::groups::sample(spec, &mut crate::groups::sample_rng(seed, index));
    let x = embed(spec, &SuperPoint::universal(spec, &g))?;
    let mut entries = check_defining_relations(spec, &x)?.entries;
    entries.extend(check_antipode(spec, &x)?.entries);
    Ok(Residuals { entries })
}

/// ‖embed(decompose(X₁·X₂)) − X₁·X₂‖ for the pair of random points number
/// `index`. While 2N ≤ [`DOUBLED_LIMIT`] the points are universal in disjoint
/// halves of Λ_{2N}; beyond that they are random points over a shared Λ_6
/// (Λ_8 for UOSp).
pub fn sampled_closure_residual(spec: &GroupSpec, seed: u64, index: u64, tolerance: f64) -> Result<f64, ChartError> {
    let mut rng = crate::groups::sample_rng(seed, index);
    let g = crate::groups::sample(spec, &mut rng);
    let h = crate::groups::sample(spec, &mut rng);
    let (p1, p2) = if 2 * spec.generators <= DOUBLED_LIMIT {
        let total = 2 * spec.generators;
        (SuperPoint::universal_in(spec, &g, total, 0), SuperPoint::universal_in(spec, &h, total, spec.generators))
    } else {
        let depth = if matches!(spec.kind, GroupKind::UnitaryOrthosymplectic { .. }) { 4 } else { 6 };
        (random_point(spec, &g, depth, &mut rng), random_point(spec, &h, depth, &mut rng))
    };
    let product = group_product(&embed(spec, &p1)?, &embed(spec, &p2)?)?;
    let point = decompose(spec, &product, tolerance)?;
    Ok(embed(spec, &point)?.sub(&product)?.max_norm())
}
