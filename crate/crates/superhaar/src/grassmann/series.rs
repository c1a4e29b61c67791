use super::coeff::Coefficient;
use super::element::GrassmannElement;
use super::GrassmannError;

/// Power series evaluable on even Grassmann elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Series {
    Sqrt,
    Inverse,
    Log,
    Exp,
}

impl<C: Coefficient> GrassmannElement<C> {
    /// Evaluates `series` at `self` by splitting `self = b(1 + n/b)` with `n`
    /// nilpotent; the Taylor sum terminates once the powers of `n` vanish.
    pub fn nilpotent_series(&self, series: Series) -> Result<Self, GrassmannError> {
        if !self.is_even() {
            return Err(GrassmannError::NotEven);
        }
        let generators = self.num_generators();
        let body = self.body();
        let soul = self.soul();

        if series == Series::Exp {
            let scale = body.exp().ok_or(GrassmannError::NonRepresentable("exp of body"))?;
            let sum = power_sum(&soul, |k| C::from_ratio(1, k as i64), true);
            return Ok(sum.scale(&scale));
        }

        let inverse_body = body.inv().ok_or(GrassmannError::NonInvertibleBody)?;
        let ratio = soul.scale(&inverse_body);
        match series {
            Series::Inverse => {
                let sum = power_sum(&ratio, |_| -C::one(), true);
                Ok(sum.scale(&inverse_body))
            }
            Series::Sqrt => {
                if body.is_negative_real() {
                    return Err(GrassmannError::NegativeBody);
                }
                let root = body.sqrt().ok_or(GrassmannError::NonRepresentable("sqrt of body"))?;
                // C(1/2, k) / C(1/2, k-1) = (3 - 2k) / (2k)
                let sum = power_sum(&ratio, |k| C::from_ratio(3 - 2 * k as i64, 2 * k as i64), true);
                Ok(sum.scale(&root))
            }
            Series::Log => {
                let log_body = body.ln().ok_or(GrassmannError::NonRepresentable("log of body"))?;
                let mut out = GrassmannElement::scalar(generators, log_body);
                let mut power = GrassmannElement::one(generators);
                let mut k = 1i64;
                loop {
                    power = &power * &ratio;
                    if power.is_zero() {
                        break;
                    }
                    let weight = C::from_ratio(if k % 2 == 1 { 1 } else { -1 }, k);
                    out = &out + &power.scale(&weight);
                    k += 1;
                }
                Ok(out)
            }
            Series::Exp => unreachable!(),
        }
    }

    pub fn sqrt(&self) -> Result<Self, GrassmannError> {
        self.nilpotent_series(Series::Sqrt)
    }

    pub fn inverse(&self) -> Result<Self, GrassmannError> {
        self.nilpotent_series(Series::Inverse)
    }

    pub fn log(&self) -> Result<Self, GrassmannError> {
        self.nilpotent_series(Series::Log)
    }

    pub fn exp(&self) -> Result<Self, GrassmannError> {
        self.nilpotent_series(Series::Exp)
    }

    /// Integer power by repeated multiplication.
    pub fn pow(&self, exponent: u32) -> Self {
        let mut out = GrassmannElement::one(self.num_generators());
        for _ in 0..exponent {
            out = &out * self;
        }
        out
    }
}

/// Σ_k c_k u^k where c_0 = 1 and c_k = c_{k-1} · step(k).
fn power_sum<C: Coefficient>(
    nilpotent: &GrassmannElement<C>,
    step: impl Fn(usize) -> C,
    include_constant: bool,
) -> GrassmannElement<C> {
    let generators = nilpotent.num_generators();
    let mut term = GrassmannElement::one(generators);
    let mut out = if include_constant { term.clone() } else { GrassmannElement::zero(generators) };
    let mut k = 1;
    loop {
        term = (&term * nilpotent).scale(&step(k));
        if term.is_zero() {
            break;
        }
        out = &out + &term;
        k += 1;
    }
    out
}
