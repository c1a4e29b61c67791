use super::coeff::Coefficient;
use super::element::{merge_sign_negative, Blade, GrassmannElement};
use super::GrassmannError;

/// How complex conjugation acts on generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Conjugation {
    /// Generators are real; only coefficients are conjugated.
    RealGenerators,
    /// Generators come in pairs `(a, b)` with `conj(θ_a) = θ_b`, `conj(θ_b) = −θ_a`.
    SecondKind(Vec<(usize, usize)>),
}

impl Conjugation {
    /// Pairs generators `(1,2), (3,4), …`.
    pub fn adjacent_pairs(generators: usize) -> Self {
        Conjugation::SecondKind((0..generators / 2).map(|k| (2 * k + 1, 2 * k + 2)).collect())
    }
}

/// Per-generator image under second-kind conjugation: partner index and sign.
fn partner_table(generators: usize, pairs: &[(usize, usize)]) -> Result<Vec<(usize, bool)>, GrassmannError> {
    let mut table: Vec<Option<(usize, bool)>> = vec![None; generators];
    for &(a, b) in pairs {
        if a == 0 || b == 0 || a > generators || b > generators || a == b {
            return Err(GrassmannError::UnpairedConjugation(a.max(b)));
        }
        if table[a - 1].is_some() || table[b - 1].is_some() {
            return Err(GrassmannError::UnpairedConjugation(a));
        }
        table[a - 1] = Some((b - 1, false));
        table[b - 1] = Some((a - 1, true));
    }
    table.into_iter().enumerate().map(|(k, entry)| entry.ok_or(GrassmannError::UnpairedConjugation(k + 1))).collect()
}

impl<C: Coefficient> GrassmannElement<C> {
    pub fn conjugate(&self, convention: &Conjugation) -> Result<Self, GrassmannError> {
        match convention {
            Conjugation::RealGenerators => Ok(self.map_coefficients(C::conj)),
            Conjugation::SecondKind(pairs) => {
                let table = partner_table(self.num_generators(), pairs)?;
                let terms = self.terms().iter().map(|(blade, value)| {
                    let mut image: Blade = 0;
                    let mut negative = false;
                    let mut rest = *blade;
                    while rest != 0 {
                        let k = rest.trailing_zeros() as usize;
                        rest &= rest - 1;
                        let (partner, sign) = table[k];
                        let bit: Blade = 1 << partner;
                        negative ^= sign ^ merge_sign_negative(image, bit);
                        image |= bit;
                    }
                    let v = value.conj();
                    (image, if negative { -v } else { v })
                });
                GrassmannElement::from_terms(self.num_generators(), terms.collect::<Vec<_>>())
            }
        }
    }
}
