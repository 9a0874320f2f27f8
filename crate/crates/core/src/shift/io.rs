use serde::Deserialize;
use serde_json::Value;

use super::weight::{Domain, WeightSeq};
use crate::constructions::{s5, s6};
use crate::intset::Window;
use crate::{Error, Result, Scalar};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DenseFile {
    domain: Domain,
    window: Window,
    logw: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantFile {
    #[allow(dead_code)]
    generator: String,
    domain: Domain,
    window: Window,
}

/// Reads a weight file:
///
/// - `{"domain": "unilateral"|"bilateral", "window": [lo, hi], "logw": [...]}`
///   with `ln w_n` for `n = lo+1, …, hi`;
/// - `{"generator": "constant:2", "domain": …, "window": …}`;
/// - `{"generator": "s5", …}` / `{"generator": "s6", …}`, rebuilt
///   deterministically from their parameters.
pub fn weight_from_json<F: Scalar>(v: &Value) -> Result<WeightSeq<F>> {
    let Some(gen) = v.get("generator") else {
        let d: DenseFile = serde_json::from_value(v.clone())?;
        return WeightSeq::from_log_weights(d.domain, d.window, d.logw.into_iter().map(F::of).collect());
    };
    let name = gen.as_str().ok_or_else(|| Error::Argument("generator must be a string".into()))?;
    if let Some(w) = name.strip_prefix("constant:") {
        let c: ConstantFile = serde_json::from_value(v.clone())?;
        let w: f64 = w.parse().map_err(|_| Error::Argument(format!("bad constant weight {w:?}")))?;
        return WeightSeq::constant(c.domain, c.window, F::of(w));
    }
    match name {
        "s5" => s5::weight_from_generator(v),
        "s6" => s6::weight_from_generator(v),
        other => Err(Error::Argument(format!("unknown weight generator {other:?}"))),
    }
}
