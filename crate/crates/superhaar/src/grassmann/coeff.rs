//! Scalar rings for Grassmann coefficients.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

/// A commutative scalar ring with complex conjugation.
///
/// Partial operations (`inv`, `sqrt`, `ln`, `exp`) return `None` when the
/// result is not representable in the ring.
pub trait Coefficient:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn imag_unit() -> Self;
    fn conj(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    /// Principal square root; `None` for negative reals or non-representable roots.
    fn sqrt(&self) -> Option<Self>;
    fn ln(&self) -> Option<Self>;
    fn exp(&self) -> Option<Self>;
    /// Size used for residual reporting (exact zero iff `is_zero`).
    fn magnitude(&self) -> f64;
    /// Numeric value, when the element is a plain number.
    fn to_complex(&self) -> Option<Complex64>;
    fn to_json(&self) -> Value;
    fn from_json(value: &Value) -> Option<Self>;

    fn from_i64(value: i64) -> Self {
        Self::from_ratio(value, 1)
    }

    /// True when the value is a negative real number.
    fn is_negative_real(&self) -> bool {
        false
    }

    /// Short human-readable form.
    fn render(&self) -> String {
        format!("{self:?}")
    }
}

/// Exact Gaussian rational `re + i·im`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gauss {
    pub re: BigRational,
    pub im: BigRational,
}

impl std::fmt::Display for Gauss {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) if self.im.is_negative() => write!(f, "{}-{}i", self.re, -&self.im),
            (false, false) => write!(f, "{}+{}i", self.re, self.im),
        }
    }
}

impl Gauss {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        Self { re, im: BigRational::zero() }
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::real(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
}

fn exact_sqrt_int(value: &BigInt) -> Option<BigInt> {
    if value.is_negative() {
        return None;
    }
    let root = value.sqrt();
    (&root * &root == *value).then_some(root)
}

fn rational_to_json(value: &BigRational) -> Value {
    fn int(v: &BigInt) -> Value {
        match v.to_i64() {
            Some(small) => json!(small),
            None => json!(v.to_string()),
        }
    }
    json!({ "num": int(value.numer()), "den": int(value.denom()) })
}

fn rational_from_json(value: &Value) -> Option<BigRational> {
    fn int(v: &Value) -> Option<BigInt> {
        match v {
            Value::Number(n) => n.as_i64().map(BigInt::from),
            Value::String(s) => s.parse().ok(),
            _ => None,
        }
    }
    let num = int(value.get("num")?)?;
    let den = int(value.get("den")?)?;
    if den.is_zero() {
        return None;
    }
    Some(BigRational::new(num, den))
}

impl Add for Gauss {
    type Output = Gauss;
    fn add(self, rhs: Gauss) -> Gauss {
        Gauss::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Sub for Gauss {
    type Output = Gauss;
    fn sub(self, rhs: Gauss) -> Gauss {
        Gauss::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Mul for Gauss {
    type Output = Gauss;
    fn mul(self, rhs: Gauss) -> Gauss {
        if self.im.is_zero() && rhs.im.is_zero() {
            return Gauss::real(self.re * rhs.re);
        }
        let re = &self.re * &rhs.re - &self.im * &rhs.im;
        let im = &self.re * &rhs.im + &self.im * &rhs.re;
        Gauss::new(re, im)
    }
}

impl Neg for Gauss {
    type Output = Gauss;
    fn neg(self) -> Gauss {
        Gauss::new(-self.re, -self.im)
    }
}

impl Coefficient for Gauss {
    fn zero() -> Self {
        Gauss::real(BigRational::zero())
    }

    fn one() -> Self {
        Gauss::real(BigRational::one())
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Gauss::ratio(num, den)
    }

    fn imag_unit() -> Self {
        Gauss::new(BigRational::zero(), BigRational::one())
    }

    fn conj(&self) -> Self {
        Gauss::new(self.re.clone(), -self.im.clone())
    }

    fn inv(&self) -> Option<Self> {
        let norm = &self.re * &self.re + &self.im * &self.im;
        if norm.is_zero() {
            return None;
        }
        Some(Gauss::new(&self.re / &norm, -&self.im / &norm))
    }

    fn sqrt(&self) -> Option<Self> {
        if !self.im.is_zero() || self.re.is_negative() {
            return None;
        }
        let num = exact_sqrt_int(self.re.numer())?;
        let den = exact_sqrt_int(self.re.denom())?;
        Some(Gauss::real(BigRational::new(num, den)))
    }

    fn ln(&self) -> Option<Self> {
        (*self == Self::one()).then(Self::zero)
    }

    fn exp(&self) -> Option<Self> {
        self.is_zero().then(Self::one)
    }

    fn magnitude(&self) -> f64 {
        self.re.abs().to_f64().unwrap_or(f64::INFINITY) + self.im.abs().to_f64().unwrap_or(f64::INFINITY)
    }

    fn to_complex(&self) -> Option<Complex64> {
        Some(self.to_c64())
    }

    fn to_json(&self) -> Value {
        json!({ "re": rational_to_json(&self.re), "im": rational_to_json(&self.im) })
    }

    fn from_json(value: &Value) -> Option<Self> {
        Some(Gauss::new(rational_from_json(value.get("re")?)?, rational_from_json(value.get("im")?)?))
    }

    fn is_negative_real(&self) -> bool {
        self.im.is_zero() && self.re.is_negative()
    }

    fn render(&self) -> String {
        self.to_string()
    }
}

impl Coefficient for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }

    fn imag_unit() -> Self {
        Complex64::new(0.0, 1.0)
    }

    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn inv(&self) -> Option<Self> {
        (!Coefficient::is_zero(self)).then(|| Complex64::inv(self))
    }

    fn sqrt(&self) -> Option<Self> {
        (!self.is_negative_real()).then(|| Complex64::sqrt(*self))
    }

    fn ln(&self) -> Option<Self> {
        (!Coefficient::is_zero(self)).then(|| Complex64::ln(*self))
    }

    fn exp(&self) -> Option<Self> {
        Some(Complex64::exp(*self))
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn to_complex(&self) -> Option<Complex64> {
        Some(*self)
    }

    fn to_json(&self) -> Value {
        json!({ "re": self.re, "im": self.im })
    }

    fn from_json(value: &Value) -> Option<Self> {
        Some(Complex64::new(value.get("re")?.as_f64()?, value.get("im")?.as_f64()?))
    }

    fn is_negative_real(&self) -> bool {
        self.im == 0.0 && self.re < 0.0
    }

    fn render(&self) -> String {
        self.to_string()
    }
}

/// Exact Laurent polynomial in commuting unit-modulus phases `x_0, x_1, …`
/// with Gaussian-rational coefficients. Conjugation inverts every phase.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PhasePoly {
    terms: BTreeMap<Vec<i32>, Gauss>,
}

fn trim(mut exponents: Vec<i32>) -> Vec<i32> {
    while exponents.last() == Some(&0) {
        exponents.pop();
    }
    exponents
}

impl PhasePoly {
    pub fn constant(value: Gauss) -> Self {
        let mut terms = BTreeMap::new();
        if !value.is_zero() {
            terms.insert(Vec::new(), value);
        }
        Self { terms }
    }

    /// The monomial `x_index^power`.
    pub fn phase(index: usize, power: i32) -> Self {
        let mut exponents = vec![0; index + 1];
        exponents[index] = power;
        let mut terms = BTreeMap::new();
        terms.insert(trim(exponents), Gauss::one());
        Self { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[i32], &Gauss)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    /// Haar integral over the torus: the coefficient of the constant monomial.
    pub fn constant_term(&self) -> Gauss {
        self.terms.get(&Vec::new()).cloned().unwrap_or_else(Gauss::zero)
    }

    fn as_constant(&self) -> Option<Gauss> {
        match self.terms.len() {
            0 => Some(Gauss::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    fn accumulate(terms: &mut BTreeMap<Vec<i32>, Gauss>, key: Vec<i32>, value: Gauss) {
        use std::collections::btree_map::Entry;
        match terms.entry(key) {
            Entry::Vacant(slot) => {
                if !value.is_zero() {
                    slot.insert(value);
                }
            }
            Entry::Occupied(mut slot) => {
                let sum = slot.get().clone() + value;
                if sum.is_zero() {
                    slot.remove();
                } else {
                    *slot.get_mut() = sum;
                }
            }
        }
    }
}

impl Add for PhasePoly {
    type Output = PhasePoly;
    fn add(mut self, rhs: PhasePoly) -> PhasePoly {
        for (key, value) in rhs.terms {
            Self::accumulate(&mut self.terms, key, value);
        }
        self
    }
}

impl Sub for PhasePoly {
    type Output = PhasePoly;
    fn sub(self, rhs: PhasePoly) -> PhasePoly {
        self + (-rhs)
    }
}

impl Neg for PhasePoly {
    type Output = PhasePoly;
    fn neg(self) -> PhasePoly {
        PhasePoly { terms: self.terms.into_iter().map(|(k, v)| (k, -v)).collect() }
    }
}

impl Mul for PhasePoly {
    type Output = PhasePoly;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: PhasePoly) -> PhasePoly {
        let mut terms = BTreeMap::new();
        for (ka, va) in &self.terms {
            for (kb, vb) in &rhs.terms {
                let len = ka.len().max(kb.len());
                let key: Vec<i32> =
                    (0..len).map(|i| ka.get(i).copied().unwrap_or(0) + kb.get(i).copied().unwrap_or(0)).collect();
                Self::accumulate(&mut terms, trim(key), va.clone() * vb.clone());
            }
        }
        PhasePoly { terms }
    }
}

impl Coefficient for PhasePoly {
    fn zero() -> Self {
        Self::default()
    }

    fn one() -> Self {
        Self::constant(Gauss::one())
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::constant(Gauss::ratio(num, den))
    }

    fn imag_unit() -> Self {
        Self::constant(Gauss::imag_unit())
    }

    fn conj(&self) -> Self {
        PhasePoly { terms: self.terms.iter().map(|(k, v)| (k.iter().map(|e| -e).collect(), v.conj())).collect() }
    }

    fn inv(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let (key, value) = self.terms.iter().next()?;
        let mut terms = BTreeMap::new();
        terms.insert(key.iter().map(|e| -e).collect(), value.inv()?);
        Some(PhasePoly { terms })
    }

    fn sqrt(&self) -> Option<Self> {
        self.as_constant()?.sqrt().map(Self::constant)
    }

    fn ln(&self) -> Option<Self> {
        self.as_constant()?.ln().map(Self::constant)
    }

    fn exp(&self) -> Option<Self> {
        self.as_constant()?.exp().map(Self::constant)
    }

    fn magnitude(&self) -> f64 {
        self.terms.values().map(Gauss::magnitude).sum()
    }

    fn to_complex(&self) -> Option<Complex64> {
        self.as_constant().map(|c| c.to_c64())
    }

    fn to_json(&self) -> Value {
        Value::Array(self.terms.iter().map(|(k, v)| json!({ "phase": k, "coeff": v.to_json() })).collect())
    }

    fn from_json(value: &Value) -> Option<Self> {
        let mut terms = BTreeMap::new();
        for item in value.as_array()? {
            let key: Vec<i32> =
                item.get("phase")?.as_array()?.iter().map(|e| e.as_i64().map(|v| v as i32)).collect::<Option<_>>()?;
            Self::accumulate(&mut terms, trim(key), Gauss::from_json(item.get("coeff")?)?);
        }
        Some(PhasePoly { terms })
    }

    fn is_negative_real(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_negative_real())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_field_ops() {
        let a = Gauss::new(BigRational::from_integer(3.into()), BigRational::from_integer(4.into()));
        let inv = a.inv().unwrap();
        assert_eq!(a.clone() * inv, Gauss::one());
        assert_eq!(a.conj().im, BigRational::from_integer((-4).into()));
        assert_eq!(a.magnitude(), 7.0);
    }

    #[test]
    fn gauss_exact_sqrt() {
        assert_eq!(Gauss::ratio(9, 4).sqrt(), Some(Gauss::ratio(3, 2)));
        assert_eq!(Gauss::ratio(2, 1).sqrt(), None);
        assert_eq!(Gauss::ratio(-1, 1).sqrt(), None);
    }

    #[test]
    fn gauss_json_round_trip() {
        let big = BigRational::new("123456789012345678901234567890".parse().unwrap(), BigInt::from(7));
        let a = Gauss::new(big, BigRational::new((-1).into(), 3.into()));
        assert_eq!(Gauss::from_json(&a.to_json()), Some(a));
    }

    #[test]
    fn phase_haar_moments() {
        let x = PhasePoly::phase(0, 1);
        let xbar = x.conj();
        let cube = x.clone() * x.clone() * x.clone();
        let cube_bar = cube.conj();
        assert_eq!((cube * cube_bar).constant_term(), Gauss::one());
        assert_eq!((x.clone() * x * xbar).constant_term(), Gauss::zero());
    }

    #[test]
    fn phase_inverse_is_conjugate() {
        let y = PhasePoly::phase(1, 2);
        assert_eq!(y.inv().unwrap(), y.conj());
        let sum = PhasePoly::phase(0, 1) + PhasePoly::one();
        assert_eq!(sum.inv(), None);
    }

    #[test]
    fn complex_sqrt_rejects_negative_axis() {
        assert!(Coefficient::sqrt(&Complex64::new(-1.0, 0.0)).is_none());
        let r = Coefficient::sqrt(&Complex64::new(0.0, 2.0)).unwrap();
        assert!((r * r - Complex64::new(0.0, 2.0)).norm() < 1e-15);
    }
}
