//! Berezin densities, the invariant integral on OSp(m|2n), U(p|q) and
//! UOSp(m|2n), and the checks that pin the densities down.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde_json::{json, Value};
use thiserror::Error;

use crate::charts::{conjugation_for, embed, osp_generator, ChartError, SuperPoint};
use crate::grassmann::{
    merge_sign_negative, Blade, Coefficient, Gauss, GrassmannElement, GrassmannError, PhasePoly, Series,
};
use crate::groups::{
    exact_sample, sample, sample_rng, torus_point, ClassicalPoint, GroupKind, GroupSpec, HaarStrategy,
};
use crate::superalgebra::{act_on_polynomial, odd_basis, AlgebraError};
use crate::supermatrix::{symplectic_form, theta_hat, GMatrix, MatrixError};
use crate::symbols::{Alphabet, Evaluator, Monomial, SuperPolynomial, Symbol, SymbolError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error("polynomial is not over the alphabet of {0}")]
    Alphabet(String),
    #[error("exact-phase integration needs a U(1) torus, got {0}")]
    NotTorus(String),
    #[error("{0} depends on the classical point and no samples were requested")]
    NoSamples(String),
    #[error("{0} is only defined for OSp(m|2n)")]
    OrthosymplecticOnly(String),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
    #[error(transparent)]
    Symbols(#[from] SymbolError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

type Result<T> = std::result::Result<T, IntegrationError>;

/// Grassmann weight multiplying f(X) under the Berezin integral.
#[derive(Clone, Debug, PartialEq)]
pub struct Density<C> {
    pub spec: GroupSpec,
    pub value: GrassmannElement<C>,
}

/// det(I − θ̂θ) for an orthosymplectic odd matrix.
pub fn det_i_minus_hat<C: Coefficient>(odd: &GMatrix<C>) -> Result<GrassmannElement<C>> {
    let generators = odd.num_generators();
    let m = GMatrix::identity(odd.cols(), generators).sub(&theta_hat(odd).matmul(odd));
    Ok(m.det_even()?)
}

/// The invariant density at the odd coordinates `odd`: det(I − θ̂θ)^{−1/2} for
/// OSp and UOSp (where θ̂θ = θ†θ), and 1 for U(p|q).
pub fn density<C: Coefficient>(spec: &GroupSpec, odd: &GMatrix<C>) -> Result<Density<C>> {
    let value = match spec.kind {
        GroupKind::Unitary { .. } => GrassmannElement::one(odd.num_generators()),
        _ => det_i_minus_hat(odd)?.nilpotent_series(Series::Sqrt)?.nilpotent_series(Series::Inverse)?,
    };
    Ok(Density { spec: spec.clone(), value })
}

/// Constant in front of the Berezin integral. For OSp and UOSp it makes
/// ∫_B Π_k (θ_kᵀJθ_k)ⁿ/n! = 1 (θ_k the columns); U(p|q) is left raw.
pub fn normalization<C: Coefficient>(spec: &GroupSpec) -> Result<C> {
    let (m, n) = match spec.kind {
        GroupKind::Unitary { .. } => return Ok(C::one()),
        GroupKind::Orthosymplectic { m, n } | GroupKind::UnitaryOrthosymplectic { m, n } => (m, n),
    };
    let generators = spec.generators;
    let odd: GMatrix<C> = crate::charts::odd_coordinates(spec, generators, 0);
    let j = symplectic_form(n);
    let mut product = GrassmannElement::one(generators);
    for col in 0..m {
        let mut form = GrassmannElement::zero(generators);
        for a in 0..2 * n {
            for b in 0..2 * n {
                let entry = j.get(a, b);
                if *entry != 0 {
                    let term = odd.get(a, col) * odd.get(b, col);
                    form = &form + &term.scale(&C::from_i64(*entry));
                }
            }
        }
        let factorial: i64 = (1..=n as i64).product();
        product = &product * &form.pow(n as u32).scale(&C::from_ratio(1, factorial));
    }
    let raw = product.berezin(&spec.berezin_order())?;
    raw.inv().ok_or(IntegrationError::Grassmann(GrassmannError::NonInvertibleBody))
}

/// g ↦ c·∫_B w·g for a fixed even weight w, stored as a dual vector on blades.
struct Functional<C> {
    dual: HashMap<Blade, C>,
}

impl<C: Coefficient> Functional<C> {
    fn new(spec: &GroupSpec, weight: &GrassmannElement<C>, scale: &C) -> Result<Self> {
        let generators = weight.num_generators();
        let top: Blade = if generators == 64 { Blade::MAX } else { (1 << generators) - 1 };
        let top_sign = GrassmannElement::monomial(generators, top, C::one()).berezin(&spec.berezin_order())?;
        let factor = top_sign * scale.clone();
        let mut dual = HashMap::new();
        for (blade, value) in weight.terms() {
            let partner = top ^ blade;
            let signed = if merge_sign_negative(*blade, partner) { -value.clone() } else { value.clone() };
            dual.insert(partner, signed * factor.clone());
        }
        Ok(Self { dual })
    }

    fn for_spec(spec: &GroupSpec) -> Result<Self> {
        let odd: GMatrix<C> = crate::charts::odd_coordinates(spec, spec.generators, 0);
        Self::new(spec, &density(spec, &odd)?.value, &normalization(spec)?)
    }

    fn apply(&self, g: &GrassmannElement<C>) -> C {
        g.terms()
            .iter()
            .filter_map(|(blade, value)| self.dual.get(blade).map(|d| value.clone() * d.clone()))
            .fold(C::zero(), |acc, v| acc + v)
    }
}

/// Distinct monomials of a family of polynomials, with each polynomial
/// written as a sparse row over them.
struct Batch {
    monomials: Vec<Monomial>,
    rows: Vec<Vec<(usize, Gauss)>>,
}

impl Batch {
    fn new(polys: &[&SuperPolynomial<Gauss>]) -> Self {
        let mut index: BTreeMap<Monomial, usize> = BTreeMap::new();
        let mut monomials = Vec::new();
        let rows = polys
            .iter()
            .map(|f| {
                f.terms()
                    .map(|(monomial, value)| {
                        let slot = *index.entry(monomial.clone()).or_insert_with(|| {
                            monomials.push(monomial.clone());
                            monomials.len() - 1
                        });
                        (slot, value.clone())
                    })
                    .collect()
            })
            .collect();
        Self { monomials, rows }
    }

    fn combine<C: Coefficient>(&self, values: &[C], lift: impl Fn(&Gauss) -> C) -> Vec<C> {
        self.rows
            .iter()
            .map(|row| row.iter().fold(C::zero(), |acc, (slot, c)| acc + lift(c) * values[*slot].clone()))
            .collect()
    }
}

fn monomial_values<C: Coefficient>(
    spec: &GroupSpec,
    classical: &ClassicalPoint<C>,
    monomials: &[Monomial],
    functional: &Functional<C>,
) -> Result<Vec<C>> {
    let point = SuperPoint::universal(spec, classical);
    let matrix = embed(spec, &point)?;
    let evaluator = Evaluator::new(&Alphabet::for_spec(spec), &matrix, &conjugation_for(spec, spec.generators))?;
    Ok(monomials.iter().map(|m| functional.apply(&evaluator.monomial(m))).collect())
}

/// The normalized Berezin integral of density·f(X) over the odd fiber at a
/// fixed classical point.
pub fn fiber_integral<C: Coefficient>(
    spec: &GroupSpec,
    classical: &ClassicalPoint<C>,
    f: &SuperPolynomial<C>,
) -> Result<C> {
    check_alphabet(spec, f.alphabet())?;
    let point = SuperPoint::universal(spec, classical);
    let matrix = embed(spec, &point)?;
    let value = f.evaluate(&matrix, &conjugation_for(spec, spec.generators))?;
    let weight = density(spec, &point.odd)?.value;
    Ok((&weight * &value).berezin(&spec.berezin_order())? * normalization(spec)?)
}

fn check_alphabet(spec: &GroupSpec, alphabet: &Alphabet) -> Result<()> {
    if *alphabet == Alphabet::for_spec(spec) {
        Ok(())
    } else {
        Err(IntegrationError::Alphabet(spec.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    ExactPhase,
    ExactBerezinOnly,
    MonteCarlo,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::ExactPhase => "exact-phase",
            Mode::ExactBerezinOnly => "exact-berezin-only",
            Mode::MonteCarlo => "monte-carlo",
        }
    }

    pub fn is_exact(self) -> bool {
        self != Mode::MonteCarlo
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Estimate {
    Exact(Gauss),
    Numeric(Complex64),
}

impl Estimate {
    pub fn to_complex(&self) -> Complex64 {
        match self {
            Estimate::Exact(value) => value.to_c64(),
            Estimate::Numeric(value) => *value,
        }
    }

    pub fn exact(&self) -> Option<&Gauss> {
        match self {
            Estimate::Exact(value) => Some(value),
            Estimate::Numeric(_) => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Estimate::Exact(value) => json!({ "re": value.re.to_string(), "im": value.im.to_string() }),
            Estimate::Numeric(value) => json!({ "re": value.re, "im": value.im }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegralResult {
    pub estimate: Estimate,
    /// Zero exactly when the mode is exact.
    pub stderr: f64,
    pub samples: usize,
    pub mode: Mode,
}

impl IntegralResult {
    fn exact(value: Gauss, mode: Mode) -> Self {
        Self { estimate: Estimate::Exact(value), stderr: 0.0, samples: 0, mode }
    }

    /// |estimate| ≤ k·stderr, with a 1e−10 floor for float round-off.
    pub fn consistent_with_zero(&self, k: f64) -> bool {
        match &self.estimate {
            Estimate::Exact(value) => value.is_zero(),
            Estimate::Numeric(value) => value.norm() <= k * self.stderr + 1e-10,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "estimate": self.estimate.to_json(),
            "stderr": self.stderr,
            "samples": self.samples,
            "mode": self.mode.name(),
        })
    }
}

/// Whether Monte-Carlo chunks run on the rayon pool. Without the `parallel`
/// feature both settings run sequentially.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Parallelism {
    #[default]
    Rayon,
    Sequential,
}

const CHUNK: usize = 512;

/// Fixed seed for the exact points used to detect classical independence.
const PROBE_SEED: u64 = 0x5eed_cafe;
const PROBE_POINTS: u64 = 3;

fn map_indices<T: Send>(count: usize, parallelism: Parallelism, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    if parallelism == Parallelism::Rayon {
        use rayon::prelude::*;
        return (0..count).into_par_iter().map(f).collect();
    }
    let _ = parallelism;
    (0..count).map(f).collect()
}

/// Pairwise (cascade) sum; the tree shape depends only on the length.
pub fn pairwise_sum<T: Copy + std::ops::Add<Output = T>>(values: &[T], zero: T) -> T {
    match values.len() {
        0 => zero,
        1 => values[0],
        len => {
            let (left, right) = values.split_at(len / 2);
            pairwise_sum(left, zero) + pairwise_sum(right, zero)
        }
    }
}

/// Per-polynomial (Σz, Σ|z|²) over one chunk of samples.
fn chunk_moments(
    spec: &GroupSpec,
    batch: &Batch,
    functional: &Functional<Complex64>,
    seed: u64,
    range: std::ops::Range<usize>,
) -> Result<Vec<(Complex64, f64)>> {
    let mut per_poly: Vec<Vec<Complex64>> = vec![Vec::with_capacity(range.len()); batch.rows.len()];
    for index in range {
        let classical = sample(spec, &mut sample_rng(seed, index as u64));
        let values = monomial_values(spec, &classical, &batch.monomials, functional)?;
        for (slot, value) in batch.combine(&values, Gauss::to_c64).into_iter().enumerate() {
            per_poly[slot].push(value);
        }
    }
    Ok(per_poly
        .iter()
        .map(|zs| {
            let squares: Vec<f64> = zs.iter().map(|z| z.norm_sqr()).collect();
            (pairwise_sum(zs, Complex64::new(0.0, 0.0)), pairwise_sum(&squares, 0.0))
        })
        .collect())
}

fn monte_carlo(
    spec: &GroupSpec,
    batch: &Batch,
    samples: usize,
    seed: u64,
    parallelism: Parallelism,
) -> Result<Vec<IntegralResult>> {
    let functional = Functional::<Complex64>::for_spec(spec)?;
    let chunks = samples.div_ceil(CHUNK);
    let moments: Vec<Vec<(Complex64, f64)>> = map_indices(chunks, parallelism, |c| {
        chunk_moments(spec, batch, &functional, seed, c * CHUNK..((c + 1) * CHUNK).min(samples))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let count = samples as f64;
    Ok((0..batch.rows.len())
        .map(|slot| {
            let sums: Vec<Complex64> = moments.iter().map(|m| m[slot].0).collect();
            let squares: Vec<f64> = moments.iter().map(|m| m[slot].1).collect();
            let mean = pairwise_sum(&sums, Complex64::new(0.0, 0.0)) / count;
            let second = pairwise_sum(&squares, 0.0);
            let variance =
                if samples > 1 { ((second - count * mean.norm_sqr()) / (count - 1.0)).max(0.0) } else { 0.0 };
            IntegralResult {
                estimate: Estimate::Numeric(mean),
                stderr: (variance / count).sqrt(),
                samples,
                mode: Mode::MonteCarlo,
            }
        })
        .collect())
}

fn exact_phase(spec: &GroupSpec, batch: &Batch) -> Result<Vec<IntegralResult>> {
    if !spec.is_torus() {
        return Err(IntegrationError::NotTorus(spec.to_string()));
    }
    let functional = Functional::<PhasePoly>::for_spec(spec)?;
    let values = monomial_values(spec, &torus_point(), &batch.monomials, &functional)?;
    let constants: Vec<Gauss> = values.iter().map(PhasePoly::constant_term).collect();
    Ok(batch
        .combine(&constants, Gauss::clone)
        .into_iter()
        .map(|v| IntegralResult::exact(v, Mode::ExactPhase))
        .collect())
}

/// Fiber integrals at the identity and a few exact random group points; a
/// polynomial whose values all agree is taken to be classical-independent.
fn detect_classical_independence(spec: &GroupSpec, batch: &Batch) -> Result<Vec<Option<Gauss>>> {
    let functional = Functional::<Gauss>::for_spec(spec)?;
    let mut points = vec![ClassicalPoint::identity(spec)];
    points.extend((0..PROBE_POINTS).map(|k| exact_sample(spec, &mut sample_rng(PROBE_SEED, k))));
    let mut per_point = Vec::new();
    for point in &points {
        let values = monomial_values(spec, point, &batch.monomials, &functional)?;
        per_point.push(batch.combine(&values, Gauss::clone));
    }
    Ok((0..batch.rows.len())
        .map(|slot| {
            let first = &per_point[0][slot];
            per_point.iter().all(|values| &values[slot] == first).then(|| first.clone())
        })
        .collect())
}

/// ∫_G f for every f in `polys`. Monte-Carlo runs share their samples (common
/// random numbers), so linear combinations are integrated consistently.
pub fn integrate_many(
    spec: &GroupSpec,
    polys: &[SuperPolynomial<Gauss>],
    strategy: HaarStrategy,
    parallelism: Parallelism,
) -> Result<Vec<IntegralResult>> {
    for f in polys {
        check_alphabet(spec, f.alphabet())?;
    }
    let all: Vec<&SuperPolynomial<Gauss>> = polys.iter().collect();
    match strategy {
        HaarStrategy::ExactPhase => exact_phase(spec, &Batch::new(&all)),
        HaarStrategy::MonteCarlo { samples, seed } => {
            let detected = detect_classical_independence(spec, &Batch::new(&all))?;
            let pending: Vec<usize> = (0..polys.len()).filter(|&k| detected[k].is_none()).collect();
            let mut sampled = Vec::new();
            if !pending.is_empty() {
                if samples == 0 {
                    return Err(IntegrationError::NoSamples(polys[pending[0]].to_string()));
                }
                let rest: Vec<&SuperPolynomial<Gauss>> = pending.iter().map(|&k| &polys[k]).collect();
                sampled = monte_carlo(spec, &Batch::new(&rest), samples, seed, parallelism)?;
            }
            let mut sampled = sampled.into_iter();
            Ok(detected
                .into_iter()
                .map(|value| match value {
                    Some(v) => IntegralResult::exact(v, Mode::ExactBerezinOnly),
                    None => sampled.next().expect("one result per pending polynomial"),
                })
                .collect())
        }
    }
}

/// ∫_G f(X) = ∫_{G₀} dν(U) ∫_B density · f(X(U, θ)).
pub fn integrate(spec: &GroupSpec, f: &SuperPolynomial<Gauss>, strategy: HaarStrategy) -> Result<IntegralResult> {
    Ok(integrate_many(spec, std::slice::from_ref(f), strategy, Parallelism::default())?.remove(0))
}

/// One named identity check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    /// The identity being tested, written out.
    pub identity: &'static str,
    pub case: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(identity: &'static str, case: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { identity, case: case.into(), passed, detail: detail.into() }
    }

    pub fn to_json(&self) -> Value {
        json!({ "identity": self.identity, "case": self.case, "passed": self.passed, "detail": self.detail })
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

pub const DET_DERIVATIVE: &str = "∂_{θ_ij} det(I−θ̂θ) = 2((I−θ̂θ)⁻¹θ̂)_{ji} det(I−θ̂θ)";
pub const DENSITY_EQUATION: &str = "Σ_t A²_{lt} ∂_{θ_jt} f = −θ̂_{lj} f";
pub const DENSITY_UNIQUE: &str = "Σ_t A²_{lt} ∂_{θ_jt} f = −θ̂_{lj} f has a one-dimensional solution space";
pub const DENSITY_N1: &str = "det(I−θ̂θ)^{−1/2} = 1 + ½ tr θ̂θ = 1 + Σ_j θ_1j θ_2j when n = 1";
pub const DENSITY_M1: &str = "det(I−θ̂θ)^{−1/2} = (1 − θᵀJθ)^{−1/2} when m = 1";

/// Which function is fed to the density equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityVariant {
    Correct,
    /// det(I − θ̂θ)^{+1/2}: a negative control that must fail.
    Corrupted,
}

fn orthosymplectic_dims(spec: &GroupSpec) -> Result<(usize, usize)> {
    match spec.kind {
        GroupKind::Orthosymplectic { m, n } => Ok((m, n)),
        _ => Err(IntegrationError::OrthosymplecticOnly(spec.to_string())),
    }
}

type PairResiduals = Vec<((usize, usize), GrassmannElement<Gauss>)>;

/// The operator f ↦ Σ_t A²_{lt} ∂_{θ_jt} f + θ̂_{lj} f for every (l, j).
fn density_operator(
    m: usize,
    n: usize,
    a2: &GMatrix<Gauss>,
    hat: &GMatrix<Gauss>,
    f: &GrassmannElement<Gauss>,
) -> Result<PairResiduals> {
    let mut out = Vec::new();
    for l in 0..m {
        for j in 0..2 * n {
            let mut lhs = hat.get(l, j) * f;
            for t in 0..m {
                lhs = &lhs + &(a2.get(l, t) * &f.partial(osp_generator(m, j, t))?);
            }
            out.push(((l, j), lhs));
        }
    }
    Ok(out)
}

/// Checks the determinant derivative identity and the density equation
/// exactly for every index pair, the closed forms for n = 1 and m = 1, and
/// (for up to four generators) that the density equation has a
/// one-dimensional solution space.
pub fn verify_density_pde(spec: &GroupSpec, variant: DensityVariant) -> Result<Vec<Check>> {
    let (m, n) = orthosymplectic_dims(spec)?;
    let generators = spec.generators;
    let theta: GMatrix<Gauss> = crate::charts::odd_coordinates(spec, generators, 0);
    let hat = theta_hat(&theta);
    let a2 = GMatrix::identity(m, generators).sub(&hat.matmul(&theta));
    let det = a2.det_even()?;
    let inverse = a2.inverse_unipotent()?;
    let inverse_hat = inverse.matmul(&hat);
    let two = Gauss::from_i64(2);
    let label = spec.label();
    let mut checks = Vec::new();

    let mut failures = Vec::new();
    for i in 0..2 * n {
        for j in 0..m {
            let lhs = det.partial(osp_generator(m, i, j))?;
            let rhs = (inverse_hat.get(j, i) * &det).scale(&two);
            if lhs != rhs {
                failures.push(format!("(i,j)=({},{})", i + 1, j + 1));
            }
        }
    }
    checks.push(Check::new(DET_DERIVATIVE, &label, failures.is_empty(), summary(2 * n * m, &failures)));

    let root = det.nilpotent_series(Series::Sqrt)?;
    let f = match variant {
        DensityVariant::Correct => root.nilpotent_series(Series::Inverse)?,
        DensityVariant::Corrupted => root,
    };
    let failures: Vec<String> = density_operator(m, n, &a2, &hat, &f)?
        .into_iter()
        .filter(|(_, residual)| !residual.is_zero())
        .map(|((l, j), _)| format!("(l,j)=({},{})", l + 1, j + 1))
        .collect();
    checks.push(Check::new(DENSITY_EQUATION, &label, failures.is_empty(), summary(2 * n * m, &failures)));

    let reference = density(spec, &theta)?.value;
    if n == 1 {
        let mut closed = GrassmannElement::one(generators);
        for j in 0..m {
            closed = &closed + &(theta.get(0, j) * theta.get(1, j));
        }
        let trace = &GrassmannElement::one(generators) + &hat.matmul(&theta).trace().scale(&Gauss::ratio(1, 2));
        let passed = closed == reference && trace == reference;
        checks.push(Check::new(DENSITY_N1, &label, passed, if passed { "exact" } else { "closed form differs" }));
    }
    if m == 1 {
        let mut square = GrassmannElement::zero(generators);
        let j = symplectic_form(n);
        for a in 0..2 * n {
            for b in 0..2 * n {
                if *j.get(a, b) != 0 {
                    square = &square + &(theta.get(a, 0) * theta.get(b, 0)).scale(&Gauss::from_i64(*j.get(a, b)));
                }
            }
        }
        let closed = (&GrassmannElement::one(generators) - &square).sqrt()?.inverse()?;
        let passed = closed == reference;
        checks.push(Check::new(DENSITY_M1, &label, passed, if passed { "exact" } else { "closed form differs" }));
    }
    if generators <= 4 {
        let nullity = density_equation_nullity(m, n, &a2, &hat, generators)?;
        checks.push(Check::new(DENSITY_UNIQUE, &label, nullity == 1, format!("nullity {nullity}")));
    }
    Ok(checks)
}

fn summary(total: usize, failures: &[String]) -> String {
    if failures.is_empty() {
        format!("{total} index pairs, exact")
    } else {
        format!("{} of {total} index pairs fail: {}", failures.len(), failures.join(" "))
    }
}

/// Dimension of the solution space of the density equation on all of Λ_N.
fn density_equation_nullity(
    m: usize,
    n: usize,
    a2: &GMatrix<Gauss>,
    hat: &GMatrix<Gauss>,
    generators: usize,
) -> Result<usize> {
    let blades: Blade = 1 << generators;
    let mut columns = Vec::new();
    for blade in 0..blades {
        let basis = GrassmannElement::monomial(generators, blade, Gauss::one());
        let images = density_operator(m, n, a2, hat, &basis)?;
        let column: Vec<Gauss> =
            images.iter().flat_map(|(_, image)| (0..blades).map(move |b| image.coefficient(b))).collect();
        columns.push(column);
    }
    let rows = columns[0].len();
    let matrix: Vec<Vec<Gauss>> = (0..rows).map(|r| columns.iter().map(|c| c[r].clone()).collect()).collect();
    Ok(blades as usize - exact_rank(matrix))
}

/// Rank over the Gaussian rationals by row reduction.
pub fn exact_rank(mut rows: Vec<Vec<Gauss>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inverse = rows[rank][col].inv().expect("nonzero pivot");
        let pivot_row: Vec<Gauss> = rows[rank].iter().map(|v| v.clone() * inverse.clone()).collect();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let factor = row[col].clone();
                for (entry, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                    *entry = entry.clone() - factor.clone() * p.clone();
                }
            }
        }
        rows[rank] = pivot_row;
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Exponents of X₁₁, X₁₂, X₂₁, X₂₂ (α) and X*₁₁, X*₁₂, X*₂₁, X*₂₂ (β).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct U11Exponents {
    pub alpha: [u32; 4],
    pub beta: [u32; 4],
}

const U11_ENTRIES: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

impl U11Exponents {
    /// X₁₁^{α₁₁}X₁₂^{α₁₂}X₂₁^{α₂₁}X₂₂^{α₂₂}X*₁₁^{β₁₁}X*₁₂^{β₁₂}X*₂₁^{β₂₁}X*₂₂^{β₂₂}, in that order.
    pub fn monomial(&self) -> Result<SuperPolynomial<Gauss>> {
        let alphabet = Alphabet::for_spec(&GroupSpec::unitary(1, 1).expect("U(1|1)"));
        let mut sequence = Vec::new();
        for (adjoint, exponents) in [(false, self.alpha), (true, self.beta)] {
            for (&(row, col), &e) in U11_ENTRIES.iter().zip(&exponents) {
                sequence.extend(std::iter::repeat_n(Symbol { adjoint, row, col }, e as usize));
            }
        }
        Ok(SuperPolynomial::from_sequence(alphabet, &sequence, Gauss::one())?)
    }

    /// Reads the exponents off a monomial in canonical order.
    pub fn of(monomial: &Monomial) -> Self {
        let pick = |adjoint| U11_ENTRIES.map(|(row, col)| monomial.exponent(&Symbol { adjoint, row, col }));
        Self { alpha: pick(false), beta: pick(true) }
    }
}

/// The closed formula for ∫_{U(1|1)} of the monomial with these exponents.
pub fn u11_closed_formula(e: &U11Exponents) -> Gauss {
    let [a11, a12, a21, a22] = e.alpha.map(i64::from);
    let [b11, b12, b21, b22] = e.beta.map(i64::from);
    let mut value = 0;
    if a12 + a21 + b12 + b21 == 0 && a11 == b11 && a22 == b22 {
        value += 2 * (a11 - a22);
    }
    if a12 + b12 == 1 && a21 + b21 == 1 && a11 + a12 == b11 + b21 && a12 + a22 == b21 + b22 {
        value += if a21 * b12 % 2 == 1 { -2 } else { 2 };
    }
    Gauss::from_i64(value)
}

#[derive(Clone, Debug, PartialEq)]
pub struct U11Cell {
    pub exponents: U11Exponents,
    pub computed: Gauss,
    pub formula: Gauss,
    pub matches: bool,
}

/// Every monomial with even exponents in 0..=max_exp and odd exponents in
/// {0, 1}, integrated in exact-phase mode and set against the closed formula.
pub fn u11_table(max_exp: u32) -> Result<Vec<U11Cell>> {
    let spec = GroupSpec::unitary(1, 1).expect("U(1|1)");
    let ranges = [max_exp, 1, 1, max_exp];
    let mut tuples: Vec<[u32; 4]> = vec![[0; 4]];
    for (slot, &top) in ranges.iter().enumerate() {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                (0..=top).map(move |v| {
                    let mut next = t;
                    next[slot] = v;
                    next
                })
            })
            .collect();
    }
    let exponents: Vec<U11Exponents> =
        tuples.iter().flat_map(|&alpha| tuples.iter().map(move |&beta| U11Exponents { alpha, beta })).collect();
    let polys = exponents.iter().map(U11Exponents::monomial).collect::<Result<Vec<_>>>()?;
    let results = integrate_many(&spec, &polys, HaarStrategy::ExactPhase, Parallelism::default())?;
    Ok(exponents
        .into_iter()
        .zip(results)
        .map(|(exponents, result)| {
            let computed = result.estimate.exact().cloned().expect("exact-phase result");
            let formula = u11_closed_formula(&exponents);
            let matches = computed == formula;
            U11Cell { exponents, computed, formula, matches }
        })
        .collect())
}

pub fn u11_table_json(cells: &[U11Cell]) -> Value {
    let rows: Vec<Value> = cells
        .iter()
        .map(|c| {
            json!({
                "alpha": c.exponents.alpha,
                "beta": c.exponents.beta,
                "computed": Estimate::Exact(c.computed.clone()).to_json(),
                "formula": Estimate::Exact(c.formula.clone()).to_json(),
                "matches": c.matches,
            })
        })
        .collect();
    json!({ "cells": rows, "mismatches": cells.iter().filter(|c| !c.matches).count() })
}

/// f(g·X): X ↦ diag(g_x, g_y)·X and X* ↦ X*·diag(g_x, g_y)†.
pub fn translate_polynomial(
    spec: &GroupSpec,
    f: &SuperPolynomial<Gauss>,
    g: &ClassicalPoint<Gauss>,
) -> Result<SuperPolynomial<Gauss>> {
    let alphabet = Alphabet::for_spec(spec);
    check_alphabet(spec, f.alphabet())?;
    let even = spec.even_dim;
    let size = alphabet.size();
    let block = |row: usize, col: usize| -> Gauss {
        match (row < even, col < even) {
            (true, true) => g.x.get(row, col).clone(),
            (false, false) => g.y.get(row - even, col - even).clone(),
            _ => Gauss::zero(),
        }
    };
    let image = |s: &Symbol| -> Result<SuperPolynomial<Gauss>> {
        let mut out = SuperPolynomial::zero(alphabet);
        for k in 0..size {
            let (coefficient, symbol) = if s.adjoint {
                (block(s.col, k).conj(), Symbol::adjoint_entry(s.row, k))
            } else {
                (block(s.row, k), Symbol::entry(k, s.col))
            };
            if !coefficient.is_zero() {
                out = out.try_add(&SuperPolynomial::symbol(alphabet, symbol)?.scale(&coefficient))?;
            }
        }
        Ok(out)
    };
    let mut out = SuperPolynomial::zero(alphabet);
    for (monomial, value) in f.terms() {
        let mut term = SuperPolynomial::constant(alphabet, value.clone());
        for s in monomial.sequence() {
            term = term.try_mul(&image(&s)?)?;
        }
        out = out.try_add(&term)?;
    }
    Ok(out)
}

/// One deviation that an invariant integral must send to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Deviation {
    pub part: &'static str,
    pub polynomial: usize,
    pub label: String,
    pub result: IntegralResult,
    pub passed: bool,
}

pub const GROUP_PART: &str = "∫ f∘L_g = ∫ f for classical g";
pub const ALGEBRA_PART: &str = "∫ D(f) = 0 for odd invariant derivations D";

/// Invariance of the integral: ∫(f − f∘L_g) = 0 for `translations` exact
/// random classical g, and ∫D(f) = 0 for every odd basis derivation D. Exact
/// modes must give exactly 0; Monte-Carlo must stay within 3σ. The algebra
/// part is skipped where no superalgebra action is implemented (UOSp).
pub fn verify_invariance(
    spec: &GroupSpec,
    polys: &[SuperPolynomial<Gauss>],
    strategy: HaarStrategy,
    translations: usize,
    parallelism: Parallelism,
) -> Result<Vec<Deviation>> {
    let seed = match strategy {
        HaarStrategy::MonteCarlo { seed, .. } => seed,
        HaarStrategy::ExactPhase => 0,
    };
    let elements = match odd_basis(spec) {
        Ok(elements) => elements,
        Err(AlgebraError::Unsupported(_)) => Vec::new(),
        Err(e) => return Err(e.into()),
    };
    let mut targets = Vec::new();
    let mut labels = Vec::new();
    for (k, f) in polys.iter().enumerate() {
        for t in 0..translations {
            let g = exact_sample(spec, &mut sample_rng(seed ^ 0x9e37_79b9, t as u64));
            targets.push(f.try_sub(&translate_polynomial(spec, f, &g)?)?);
            labels.push((GROUP_PART, k, format!("g#{t}")));
        }
        for element in &elements {
            targets.push(act_on_polynomial(spec, element, f)?);
            labels.push((ALGEBRA_PART, k, element.to_string()));
        }
    }
    let results = integrate_many(spec, &targets, strategy, parallelism)?;
    Ok(labels
        .into_iter()
        .zip(results)
        .map(|((part, polynomial, label), result)| {
            let passed = result.consistent_with_zero(3.0);
            Deviation { part, polynomial, label, result, passed }
        })
        .collect())
}

/// All monomials of total degree ≤ `degree` in the alphabet of `spec`.
pub fn monomial_basis(spec: &GroupSpec, degree: u32) -> Vec<SuperPolynomial<Gauss>> {
    let alphabet = Alphabet::for_spec(spec);
    let symbols = alphabet.symbols();
    let mut seen = BTreeMap::new();
    let mut frontier = vec![SuperPolynomial::one(alphabet)];
    seen.insert(Monomial::one(), SuperPolynomial::one(alphabet));
    for _ in 0..degree {
        let mut next = Vec::new();
        for f in &frontier {
            for s in &symbols {
                let product = f
                    .try_mul(&SuperPolynomial::symbol(alphabet, *s).expect("symbol of alphabet"))
                    .expect("same alphabet");
                let Some(monomial) = product.terms().next().map(|(m, _)| m.clone()) else {
                    continue;
                };
                if let std::collections::btree_map::Entry::Vacant(slot) = seen.entry(monomial) {
                    let unit =
                        SuperPolynomial::from_sequence(alphabet, &slot.key().sequence(), Gauss::one()).expect("valid");
                    next.push(slot.insert(unit).clone());
                }
            }
        }
        frontier = next;
    }
    let mut basis: Vec<(Monomial, SuperPolynomial<Gauss>)> = seen.into_iter().collect();
    basis.sort_by(|a, b| a.0.degree().cmp(&b.0.degree()).then_with(|| a.0.cmp(&b.0)));
    basis.into_iter().map(|(_, f)| f).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gram {
    pub basis: Vec<SuperPolynomial<Gauss>>,
    pub results: Vec<Vec<IntegralResult>>,
    /// Exact rank when every entry is exact.
    pub rank: Option<usize>,
}

/// (f_a, f_b) = ∫ f_a f_b over the monomials of degree ≤ `degree`.
pub fn gram_matrix(spec: &GroupSpec, degree: u32, strategy: HaarStrategy) -> Result<Gram> {
    let basis = monomial_basis(spec, degree);
    let products: Vec<SuperPolynomial<Gauss>> =
        basis.iter().flat_map(|a| basis.iter().map(move |b| a.try_mul(b))).collect::<std::result::Result<_, _>>()?;
    let flat = integrate_many(spec, &products, strategy, Parallelism::default())?;
    let results: Vec<Vec<IntegralResult>> = flat.chunks(basis.len()).map(<[IntegralResult]>::to_vec).collect();
    let exact: Option<Vec<Vec<Gauss>>> =
        results.iter().map(|row| row.iter().map(|r| r.estimate.exact().cloned()).collect()).collect();
    Ok(Gram { basis, results, rank: exact.map(exact_rank) })
}

/// The same Gram matrix built from the U(1|1) closed formula alone.
pub fn u11_formula_gram(degree: u32) -> Result<Vec<Vec<Gauss>>> {
    let spec = GroupSpec::unitary(1, 1).expect("U(1|1)");
    let basis = monomial_basis(&spec, degree);
    basis
        .iter()
        .map(|a| {
            basis
                .iter()
                .map(|b| {
                    let product = a.try_mul(b)?;
                    Ok(product
                        .terms()
                        .fold(Gauss::zero(), |acc, (m, c)| acc + c.clone() * u11_closed_formula(&U11Exponents::of(m))))
                })
                .collect()
        })
        .collect()
}

/// A random polynomial with `terms` terms of degree ≤ `max_degree` and small
/// Gaussian-integer coefficients.
pub fn random_polynomial(
    spec: &GroupSpec,
    max_degree: u32,
    terms: usize,
    rng: &mut impl rand::Rng,
) -> SuperPolynomial<Gauss> {
    let alphabet = Alphabet::for_spec(spec);
    let symbols = alphabet.symbols();
    let mut out = SuperPolynomial::zero(alphabet);
    for _ in 0..terms {
        let degree = rng.random_range(0..=max_degree) as usize;
        let sequence: Vec<Symbol> = (0..degree).map(|_| symbols[rng.random_range(0..symbols.len())]).collect();
        let mut re = rng.random_range(-3..=3);
        if re == 0 {
            re = 1;
        }
        let im = if alphabet.adjoint { rng.random_range(-1..=1) } else { 0 };
        let value = Gauss::from_i64(re) + Gauss::imag_unit() * Gauss::from_i64(im);
        let term = SuperPolynomial::from_sequence(alphabet, &sequence, value).expect("symbols of the alphabet");
        out = out.try_add(&term).expect("same alphabet");
    }
    out
}
