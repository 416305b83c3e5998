use serde::{Deserialize, Serialize};

use crate::algebra::{ConstraintSystem, Poly, PolynomialConstraint, Rational, Relation};
use crate::error::ParseError;

use super::{EqualityTerm, InequalityTerm, SosCertificate, SquareSum};

#[derive(Serialize, Deserialize)]
struct Doc {
    system: serde_json::Value,
    #[serde(default)]
    equality: Vec<EqJson>,
    #[serde(default)]
    inequality: Vec<IneqJson>,
    #[serde(default)]
    free: SquaresJson,
    target: String,
    /// Relation of the target; `ge0` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rel: Option<Relation>,
}

#[derive(Serialize, Deserialize)]
struct EqJson {
    g: String,
    f: usize,
}

#[derive(Serialize, Deserialize)]
struct IneqJson {
    q: Vec<String>,
    /// Square weights; all 1 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w: Option<Vec<String>>,
    h: usize,
}

#[derive(Serialize, Deserialize, Default)]
struct SquaresJson {
    q: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w: Option<Vec<String>>,
}

fn squares_to_json(s: &SquareSum) -> (Vec<String>, Option<Vec<String>>) {
    let q = s.q.iter().map(Poly::to_string).collect();
    let unit = s.w.iter().all(|w| *w == Rational::from_integer(1.into()));
    let w = (!unit).then(|| s.w.iter().map(Rational::to_string).collect());
    (q, w)
}

fn squares_from_json(q: &[String], w: Option<&Vec<String>>) -> Result<SquareSum, ParseError> {
    let q = q.iter().map(|s| s.parse()).collect::<Result<Vec<Poly>, _>>()?;
    match w {
        None => Ok(SquareSum::of(q)),
        Some(w) => {
            let w = w
                .iter()
                .map(|s| s.parse::<Rational>().map_err(|_| ParseError::new(format!("bad weight `{s}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            if w.len() != q.len() {
                return Err(ParseError::new(format!("{} generators but {} weights", q.len(), w.len())));
            }
            Ok(SquareSum { q, w })
        }
    }
}

/// Serializes a certificate together with the system it refers to.
pub fn certificate_to_json(sys: &ConstraintSystem, cert: &SosCertificate) -> String {
    let (fq, fw) = squares_to_json(&cert.free);
    let doc = Doc {
        system: sys.to_json_value(),
        equality: cert
            .equality
            .iter()
            .map(|t| EqJson { g: t.g.to_string(), f: t.f })
            .collect(),
        inequality: cert
            .inequality
            .iter()
            .map(|t| {
                let (q, w) = squares_to_json(&t.u);
                IneqJson { q, w, h: t.h }
            })
            .collect(),
        free: SquaresJson { q: fq, w: fw },
        target: cert.target.poly.to_string(),
        rel: (cert.target.relation == Relation::EqZero).then_some(Relation::EqZero),
    };
    serde_json::to_string_pretty(&doc).expect("certificate serializes")
}

pub fn certificate_from_json(text: &str) -> Result<(ConstraintSystem, SosCertificate), ParseError> {
    let doc: Doc = serde_json::from_str(text)?;
    let sys = ConstraintSystem::from_json_value(doc.system)?;
    let target = PolynomialConstraint {
        poly: doc.target.parse()?,
        relation: doc.rel.unwrap_or(Relation::GeqZero),
    };
    let mut cert = SosCertificate::new(target);
    for e in doc.equality {
        cert.equality.push(EqualityTerm { g: e.g.parse()?, f: e.f });
    }
    for t in doc.inequality {
        cert.inequality.push(InequalityTerm { u: squares_from_json(&t.q, t.w.as_ref())?, h: t.h });
    }
    cert.free = squares_from_json(&doc.free.q, doc.free.w.as_ref())?;
    Ok((sys, cert))
}
