use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use super::coeff::Coefficient;
use super::GrassmannError;

/// Subset of generators as a bitmask: generator `i` (1-based) is bit `i - 1`.
pub type Blade = u64;

/// Largest number of generators a blade bitmask can hold.
pub const MAX_GENERATORS: usize = 64;

/// Largest algebra for which dense 2^N tables are allowed.
pub const MAX_DENSE_GENERATORS: usize = 24;

const DENSE_PRODUCT_LIMIT: usize = 12;

/// Grade of a homogeneous element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

impl Parity {
    pub fn from_bit(odd: bool) -> Self {
        if odd {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

/// True when multiplying blades `a` then `b` needs an odd number of
/// transpositions to reach increasing generator order.
#[inline]
pub fn merge_sign_negative(a: Blade, b: Blade) -> bool {
    let mut count = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        count += (a >> j >> 1).count_ones();
        rest &= rest - 1;
    }
    count & 1 == 1
}

/// Element of Λ_N ⊗ C stored as a sorted list of non-zero blade terms.
#[derive(Clone, Debug, PartialEq)]
pub struct GrassmannElement<C> {
    generators: usize,
    terms: Vec<(Blade, C)>,
}

impl<C: Coefficient> GrassmannElement<C> {
    pub fn zero(generators: usize) -> Self {
        assert!(generators <= MAX_GENERATORS, "at most {MAX_GENERATORS} generators");
        Self { generators, terms: Vec::new() }
    }

    pub fn one(generators: usize) -> Self {
        Self::scalar(generators, C::one())
    }

    pub fn scalar(generators: usize, value: C) -> Self {
        Self::monomial(generators, 0, value)
    }

    /// `value · θ_blade` with the blade's generators in increasing order.
    pub fn monomial(generators: usize, blade: Blade, value: C) -> Self {
        let mut out = Self::zero(generators);
        if !value.is_zero() {
            out.terms.push((blade, value));
        }
        out
    }

    /// θ_i for `1 ≤ i ≤ N`.
    pub fn generator(generators: usize, index: usize) -> Result<Self, GrassmannError> {
        check_index(generators, index)?;
        Ok(Self::monomial(generators, 1 << (index - 1), C::one()))
    }

    /// Builds an element from arbitrary (possibly repeated or zero) terms.
    pub fn from_terms(generators: usize, terms: impl IntoIterator<Item = (Blade, C)>) -> Result<Self, GrassmannError> {
        let mask = full_mask(generators);
        let mut acc: BTreeMap<Blade, C> = BTreeMap::new();
        for (blade, value) in terms {
            if blade & !mask != 0 {
                return Err(GrassmannError::BladeOutOfRange { blade, generators });
            }
            accumulate(&mut acc, blade, value);
        }
        Ok(Self { generators, terms: acc.into_iter().collect() })
    }

    pub fn num_generators(&self) -> usize {
        self.generators
    }

    pub fn terms(&self) -> &[(Blade, C)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, blade: Blade) -> C {
        self.terms
            .binary_search_by_key(&blade, |(b, _)| *b)
            .map(|pos| self.terms[pos].1.clone())
            .unwrap_or_else(|_| C::zero())
    }

    /// Coefficient of the empty blade.
    pub fn body(&self) -> C {
        self.coefficient(0)
    }

    /// The nilpotent part `f − body(f)`.
    pub fn soul(&self) -> Self {
        Self { generators: self.generators, terms: self.terms.iter().filter(|(b, _)| *b != 0).cloned().collect() }
    }

    pub fn parity(&self) -> Parity {
        let mut even = false;
        let mut odd = false;
        for (blade, _) in &self.terms {
            if blade.count_ones() % 2 == 0 {
                even = true;
            } else {
                odd = true;
            }
        }
        match (even, odd) {
            (_, false) => Parity::Even,
            (false, true) => Parity::Odd,
            (true, true) => Parity::Mixed,
        }
    }

    pub fn is_even(&self) -> bool {
        self.parity() == Parity::Even
    }

    pub fn is_odd(&self) -> bool {
        self.is_zero() || self.parity() == Parity::Odd
    }

    /// The part of `self` of parity `odd`.
    pub fn graded_part(&self, odd: bool) -> Self {
        Self {
            generators: self.generators,
            terms: self.terms.iter().filter(|(b, _)| (b.count_ones() % 2 == 1) == odd).cloned().collect(),
        }
    }

    pub fn scale(&self, factor: &C) -> Self {
        if factor.is_zero() {
            return Self::zero(self.generators);
        }
        let terms = self
            .terms
            .iter()
            .filter_map(|(b, v)| {
                let w = v.clone() * factor.clone();
                (!w.is_zero()).then_some((*b, w))
            })
            .collect();
        Self { generators: self.generators, terms }
    }

    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> GrassmannElement<D> {
        GrassmannElement {
            generators: self.generators,
            terms: self
                .terms
                .iter()
                .filter_map(|(b, v)| {
                    let w = f(v);
                    (!w.is_zero()).then_some((*b, w))
                })
                .collect(),
        }
    }

    /// Largest coefficient magnitude, used as a residual norm.
    pub fn max_norm(&self) -> f64 {
        self.terms.iter().map(|(_, v)| v.magnitude()).fold(0.0, f64::max)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, GrassmannError> {
        check_same(self, other)?;
        Ok(self.combine(other, false))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, GrassmannError> {
        check_same(self, other)?;
        Ok(self.combine(other, true))
    }

    fn combine(&self, other: &Self, subtract: bool) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let take_left = j >= other.terms.len() || (i < self.terms.len() && self.terms[i].0 < other.terms[j].0);
            let take_right = i >= self.terms.len() || (j < other.terms.len() && other.terms[j].0 < self.terms[i].0);
            if take_left {
                terms.push(self.terms[i].clone());
                i += 1;
            } else if take_right {
                let (b, v) = &other.terms[j];
                terms.push((*b, if subtract { -v.clone() } else { v.clone() }));
                j += 1;
            } else {
                let (b, v) = &self.terms[i];
                let w = &other.terms[j].1;
                let sum = if subtract { v.clone() - w.clone() } else { v.clone() + w.clone() };
                if !sum.is_zero() {
                    terms.push((*b, sum));
                }
                i += 1;
                j += 1;
            }
        }
        Self { generators: self.generators, terms }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, GrassmannError> {
        check_same(self, other)?;
        Ok(self.product(other))
    }

    fn product(&self, other: &Self) -> Self {
        let generators = self.generators;
        if self.terms.is_empty() || other.terms.is_empty() {
            return Self::zero(generators);
        }
        if generators <= DENSE_PRODUCT_LIMIT {
            let size = 1usize << generators;
            let mut table: Vec<Option<C>> = vec![None; size];
            for (ba, va) in &self.terms {
                for (bb, vb) in &other.terms {
                    if ba & bb != 0 {
                        continue;
                    }
                    let mut w = va.clone() * vb.clone();
                    if merge_sign_negative(*ba, *bb) {
                        w = -w;
                    }
                    let slot = &mut table[(ba | bb) as usize];
                    *slot = Some(match slot.take() {
                        Some(prev) => prev + w,
                        None => w,
                    });
                }
            }
            let terms = table
                .into_iter()
                .enumerate()
                .filter_map(|(b, v)| v.filter(|v| !v.is_zero()).map(|v| (b as Blade, v)))
                .collect();
            return Self { generators, terms };
        }
        let mut acc: BTreeMap<Blade, C> = BTreeMap::new();
        for (ba, va) in &self.terms {
            for (bb, vb) in &other.terms {
                if ba & bb != 0 {
                    continue;
                }
                let mut w = va.clone() * vb.clone();
                if merge_sign_negative(*ba, *bb) {
                    w = -w;
                }
                accumulate(&mut acc, ba | bb, w);
            }
        }
        Self { generators, terms: acc.into_iter().collect() }
    }

    /// Supercommutator `[a, b] = ab − (−1)^{|a||b|} ba` for homogeneous inputs.
    pub fn supercommutator(&self, other: &Self) -> Result<Self, GrassmannError> {
        let sign_odd = self.parity() == Parity::Odd && other.parity() == Parity::Odd;
        let ab = self.try_mul(other)?;
        let ba = other.product(self);
        Ok(if sign_odd { ab.combine(&ba, false) } else { ab.combine(&ba, true) })
    }

    /// Left derivative ∂/∂θ_i.
    pub fn partial(&self, index: usize) -> Result<Self, GrassmannError> {
        check_index(self.generators, index)?;
        let bit: Blade = 1 << (index - 1);
        let below = bit - 1;
        let mut terms: Vec<(Blade, C)> = self
            .terms
            .iter()
            .filter(|(b, _)| b & bit != 0)
            .map(|(b, v)| {
                let value = if (b & below).count_ones() % 2 == 1 { -v.clone() } else { v.clone() };
                (b & !bit, value)
            })
            .collect();
        terms.sort_by_key(|(b, _)| *b);
        Ok(Self { generators: self.generators, terms })
    }

    /// Composed left derivatives `∂_{order[0]} ∂_{order[1]} ⋯ ∂_{order[N-1]}`,
    /// so `order[N-1]` acts first.
    pub fn berezin(&self, order: &[usize]) -> Result<C, GrassmannError> {
        check_permutation(self.generators, order)?;
        let top = full_mask(self.generators);
        let value = self.coefficient(top);
        if value.is_zero() {
            return Ok(value);
        }
        let mut blade = top;
        let mut negative = false;
        for &index in order.iter().rev() {
            let bit: Blade = 1 << (index - 1);
            if (blade & (bit - 1)).count_ones() % 2 == 1 {
                negative = !negative;
            }
            blade &= !bit;
        }
        Ok(if negative { -value } else { value })
    }

    /// Reinterprets `self` inside Λ_{generators} with generator `i` mapped to `i + offset`.
    pub fn relabel(&self, generators: usize, offset: usize) -> Result<Self, GrassmannError> {
        if self.generators + offset > generators || generators > MAX_GENERATORS {
            return Err(GrassmannError::MismatchedGenerators { left: self.generators + offset, right: generators });
        }
        Ok(Self { generators, terms: self.terms.iter().map(|(b, v)| (b << offset, v.clone())).collect() })
    }

    /// Dense coefficient table indexed by blade.
    pub fn to_dense(&self) -> Result<Vec<C>, GrassmannError> {
        if self.generators > MAX_DENSE_GENERATORS {
            return Err(GrassmannError::DenseTooLarge(self.generators));
        }
        let mut table = vec![C::zero(); 1 << self.generators];
        for (b, v) in &self.terms {
            table[*b as usize] = v.clone();
        }
        Ok(table)
    }

    pub fn from_dense(generators: usize, table: &[C]) -> Result<Self, GrassmannError> {
        if generators > MAX_DENSE_GENERATORS {
            return Err(GrassmannError::DenseTooLarge(generators));
        }
        if table.len() != 1 << generators {
            return Err(GrassmannError::DenseLength { expected: 1 << generators, got: table.len() });
        }
        Ok(Self {
            generators,
            terms: table
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(b, v)| (b as Blade, v.clone()))
                .collect(),
        })
    }
}

pub(crate) fn full_mask(generators: usize) -> Blade {
    if generators >= 64 {
        Blade::MAX
    } else {
        (1 << generators) - 1
    }
}

pub(crate) fn accumulate<C: Coefficient>(acc: &mut BTreeMap<Blade, C>, blade: Blade, value: C) {
    use std::collections::btree_map::Entry;
    match acc.entry(blade) {
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

fn check_index(generators: usize, index: usize) -> Result<(), GrassmannError> {
    if index == 0 || index > generators {
        Err(GrassmannError::IndexOutOfRange { index, generators })
    } else {
        Ok(())
    }
}

fn check_same<C>(a: &GrassmannElement<C>, b: &GrassmannElement<C>) -> Result<(), GrassmannError> {
    if a.generators != b.generators {
        Err(GrassmannError::MismatchedGenerators { left: a.generators, right: b.generators })
    } else {
        Ok(())
    }
}

fn check_permutation(generators: usize, order: &[usize]) -> Result<(), GrassmannError> {
    let mut seen = vec![false; generators];
    if order.len() != generators {
        return Err(GrassmannError::NotAPermutation);
    }
    for &i in order {
        if i == 0 || i > generators || seen[i - 1] {
            return Err(GrassmannError::NotAPermutation);
        }
        seen[i - 1] = true;
    }
    Ok(())
}

impl<C: Coefficient> Add for &GrassmannElement<C> {
    type Output = GrassmannElement<C>;
    fn add(self, rhs: Self) -> GrassmannElement<C> {
        self.try_add(rhs).expect("Grassmann algebras differ")
    }
}

impl<C: Coefficient> Sub for &GrassmannElement<C> {
    type Output = GrassmannElement<C>;
    fn sub(self, rhs: Self) -> GrassmannElement<C> {
        self.try_sub(rhs).expect("Grassmann algebras differ")
    }
}

impl<C: Coefficient> Mul for &GrassmannElement<C> {
    type Output = GrassmannElement<C>;
    fn mul(self, rhs: Self) -> GrassmannElement<C> {
        self.try_mul(rhs).expect("Grassmann algebras differ")
    }
}

impl<C: Coefficient> Neg for &GrassmannElement<C> {
    type Output = GrassmannElement<C>;
    fn neg(self) -> GrassmannElement<C> {
        GrassmannElement {
            generators: self.generators,
            terms: self.terms.iter().map(|(b, v)| (*b, -v.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $method:ident),*) => {$(
        impl<C: Coefficient> $tr for GrassmannElement<C> {
            type Output = GrassmannElement<C>;
            fn $method(self, rhs: Self) -> GrassmannElement<C> {
                (&self).$method(&rhs)
            }
        }
    )*};
}

forward_owned!(Add add, Sub sub, Mul mul);

impl<C: Coefficient> Neg for GrassmannElement<C> {
    type Output = GrassmannElement<C>;
    fn neg(self) -> GrassmannElement<C> {
        -&self
    }
}
