use serde_json::{json, Value};

use super::coeff::Coefficient;
use super::element::{Blade, GrassmannElement};
use super::GrassmannError;

impl<C: Coefficient> GrassmannElement<C> {
    /// `{N, terms: [{blade: [indices], ...coefficient}]}` with 1-based indices.
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms()
            .iter()
            .map(|(blade, value)| {
                let indices: Vec<usize> = (0..64).filter(|k| blade >> k & 1 == 1).map(|k| k + 1).collect();
                let mut entry = json!({ "blade": indices });
                match value.to_json() {
                    Value::Object(fields) => {
                        for (key, field) in fields {
                            entry[key] = field;
                        }
                    }
                    other => entry["coeff"] = other,
                }
                entry
            })
            .collect();
        json!({ "N": self.num_generators(), "terms": terms })
    }

    pub fn from_json(value: &Value) -> Result<Self, GrassmannError> {
        let bad = |what: &str| GrassmannError::Json(what.to_string());
        let generators = value.get("N").and_then(Value::as_u64).ok_or_else(|| bad("missing N"))?;
        let items = value.get("terms").and_then(Value::as_array).ok_or_else(|| bad("missing terms"))?;
        let mut terms = Vec::with_capacity(items.len());
        for item in items {
            let indices = item.get("blade").and_then(Value::as_array).ok_or_else(|| bad("missing blade"))?;
            let mut blade: Blade = 0;
            let mut last = 0u64;
            for index in indices {
                let i = index.as_u64().ok_or_else(|| bad("blade index"))?;
                if i <= last || i > generators {
                    return Err(bad("blade indices must increase within 1..=N"));
                }
                last = i;
                blade |= 1 << (i - 1);
            }
            let coefficient = match item.get("coeff") {
                Some(inner) => C::from_json(inner),
                None => C::from_json(item),
            }
            .ok_or_else(|| bad("coefficient"))?;
            terms.push((blade, coefficient));
        }
        GrassmannElement::from_terms(generators as usize, terms)
    }
}
