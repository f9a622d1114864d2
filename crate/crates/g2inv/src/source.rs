//! A metric as given in a document: plain component expressions, or a
//! base metric carried through a coordinate transform.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::metric::{G2Metric, PointJets, Rect};
use crate::transform::{pushforward_jets, PseudoTransform};

#[derive(Clone, Debug)]
pub enum MetricSource {
    Plain(G2Metric),
    /// Evaluated at `φ(t)` for base-chart points `t`.
    Transformed {
        name: String,
        base: G2Metric,
        transform: PseudoTransform,
    },
}

/// Jets at one sample, with the chart point they belong to.
#[derive(Clone, Debug)]
pub struct Sample {
    /// Point in the base chart (equal to `jets.point` for plain metrics).
    pub base_point: (f64, f64),
    pub jets: PointJets,
}

impl MetricSource {
    pub fn name(&self) -> &str {
        match self {
            MetricSource::Plain(m) => &m.name,
            MetricSource::Transformed { name, .. } => name,
        }
    }

    /// Sampling rectangle, in base-chart coordinates for transformed metrics.
    pub fn domain(&self) -> Option<Rect> {
        match self {
            MetricSource::Plain(m) => m.domain,
            MetricSource::Transformed { base, .. } => base.domain,
        }
    }

    pub fn sample(&self, base_point: (f64, f64), order: usize) -> Result<Sample> {
        let jets = match self {
            MetricSource::Plain(m) => m.point_jets(base_point, order)?,
            MetricSource::Transformed { base, transform, .. } => {
                pushforward_jets(&base.point_jets(base_point, order)?, transform)?
            }
        };
        Ok(Sample { base_point, jets })
    }

    /// Jets at a point of this metric's own chart. Transformed metrics are
    /// only available at images of base points.
    pub fn point_jets(&self, point: (f64, f64), order: usize) -> Result<PointJets> {
        match self {
            MetricSource::Plain(m) => m.point_jets(point, order),
            MetricSource::Transformed { .. } => {
                Err(Error::Invalid("transformed metrics are sampled at images of base points; use a grid".into()))
            }
        }
    }

    pub fn from_json(doc: &Value) -> Result<MetricSource> {
        let obj = doc.as_object().ok_or_else(|| Error::Json("metric must be an object".into()))?;
        if obj.contains_key("transform") || obj.contains_key("base") {
            for k in obj.keys() {
                if !["name", "base", "transform"].contains(&k.as_str()) {
                    return Err(Error::UnknownKey(k.clone()));
                }
            }
            let base = obj.get("base").ok_or_else(|| Error::MissingComponent("base".into()))?;
            let tr = obj.get("transform").ok_or_else(|| Error::MissingComponent("transform".into()))?;
            let base = G2Metric::from_json(base)?;
            let name = match obj.get("name") {
                Some(Value::String(s)) => s.clone(),
                Some(_) => return Err(Error::Json("'name' must be a string".into())),
                None => format!("{}_transformed", base.name),
            };
            Ok(MetricSource::Transformed { name, base, transform: PseudoTransform::from_json(tr)? })
        } else {
            Ok(MetricSource::Plain(G2Metric::from_json(doc)?))
        }
    }

    pub fn from_json_str(text: &str) -> Result<MetricSource> {
        MetricSource::from_json(&serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Value {
        match self {
            MetricSource::Plain(m) => m.to_json(),
            MetricSource::Transformed { name, base, transform } => {
                json!({ "name": name, "base": base.to_json(), "transform": transform.to_json() })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::catalog_default;

    #[test]
    fn transformed_round_trip() {
        let base = catalog_default("vdb").unwrap();
        let transform =
            PseudoTransform::parse(["t1 + 0.1*t2^2", "t2"], ["sin(t1)", "0"], [[2.0, 1.0], [0.0, 1.0]]).unwrap();
        let s = MetricSource::Transformed { name: "vdb_t".into(), base, transform };
        let back = MetricSource::from_json(&s.to_json()).unwrap();
        assert_eq!(back.to_json(), s.to_json());
        assert_eq!(back.name(), "vdb_t");
        let smp = back.sample((0.5, 1.0), 1).unwrap();
        assert!((smp.jets.point.0 - 0.6).abs() < 1e-12);
    }

    #[test]
    fn mixed_keys_rejected() {
        let doc = json!({"base": {}, "transform": {}, "form": "bfh"});
        assert!(matches!(MetricSource::from_json(&doc), Err(Error::UnknownKey(_))));
    }
}
