//! Serialization: the JSON-lines distribution format and report JSON.
//!
//! Distribution files carry one metadata line, then one line per support
//! point, sorted by value, with probabilities as exact "numerator/denominator"
//! strings. Parsers reject files whose probabilities do not sum to exactly 1
//! (delegated to the `ExactDist` constructor).

use std::io::{BufRead, Write};

use num_bigint::BigInt;
use serde_json::{json, Value as Json};

use crate::audit::{AuditReport, AuditVerdict, BiasedVerdict};
use crate::construction::ConstructionCertificate;
use crate::error::{Error, Result};
use crate::exactdist::{ExactDist, Kind, Value};
use crate::rational::{format_rational, parse_rational};
use crate::solver::ValueReport;
use crate::subsets::IncreasingTuple;
use crate::tower::Tower;

fn kind_meta(kind: &Kind) -> (&'static str, usize) {
    match kind {
        Kind::Scalar => ("scalar", 1),
        Kind::Tuple(n) => ("tuple", *n),
        Kind::Flagged(inner) => {
            let (_, arity) = kind_meta(inner);
            ("flagged", arity)
        }
    }
}

fn value_json(v: &Value) -> Json {
    match v {
        Value::Int(x) => json!(x.to_string()),
        Value::Tuple(t) => json!(t.iter().map(|x| x.to_string()).collect::<Vec<_>>()),
        Value::Flagged(inner, _) => value_json(inner),
    }
}

/// Write a distribution in the JSON-lines format.
pub fn write_dist(w: &mut impl Write, d: &ExactDist) -> Result<()> {
    let (kind, arity) = kind_meta(d.kind());
    writeln!(w, "{}", json!({"kind": kind, "arity": arity}))?;
    for (v, p) in d.iter() {
        let mut line = json!({"value": value_json(v), "p": format_rational(p)});
        if let Value::Flagged(_, flag) = v {
            line["flag"] = json!(u8::from(*flag));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

fn parse_bigint(j: &Json) -> Result<BigInt> {
    j.as_str()
        .ok_or_else(|| Error::Parse("values must be decimal strings".into()))?
        .parse()
        .map_err(|_| Error::Parse(format!("bad integer {j}")))
}

/// Read a distribution from the JSON-lines format; validates kind uniformity
/// and exact unit mass.
pub fn read_dist(r: impl BufRead) -> Result<ExactDist> {
    let mut lines = r.lines();
    let meta_line = lines
        .next()
        .ok_or_else(|| Error::Parse("empty distribution file".into()))??;
    let meta: Json = serde_json::from_str(&meta_line)
        .map_err(|e| Error::Parse(format!("bad metadata line: {e}")))?;
    let kind = meta["kind"]
        .as_str()
        .ok_or_else(|| Error::Parse("metadata missing kind".into()))?
        .to_string();
    let arity = meta["arity"]
        .as_u64()
        .ok_or_else(|| Error::Parse("metadata missing arity".into()))? as usize;

    let mut entries = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Json = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("bad entry line: {e}")))?;
        let p = parse_rational(
            rec["p"]
                .as_str()
                .ok_or_else(|| Error::Parse("entry missing p".into()))?,
        )?;
        let base = match kind.as_str() {
            "scalar" => Value::Int(parse_bigint(&rec["value"])?),
            "tuple" | "flagged" => {
                // flagged values keep their inner shape: a lone string is a
                // scalar inner, an array is a tuple inner
                if kind == "flagged" && rec["value"].is_string() {
                    Value::Int(parse_bigint(&rec["value"])?)
                } else {
                    let arr = rec["value"]
                        .as_array()
                        .ok_or_else(|| Error::Parse("tuple value must be an array".into()))?;
                    if arr.len() != arity {
                        return Err(Error::Parse(format!(
                            "entry arity {} does not match metadata {arity}",
                            arr.len()
                        )));
                    }
                    Value::Tuple(arr.iter().map(parse_bigint).collect::<Result<_>>()?)
                }
            }
            other => return Err(Error::Parse(format!("unknown kind {other:?}"))),
        };
        let v = if kind == "flagged" {
            let flag = rec["flag"]
                .as_u64()
                .ok_or_else(|| Error::Parse("flagged entry missing flag".into()))?;
            if flag > 1 {
                return Err(Error::Parse("flag must be 0 or 1".into()));
            }
            Value::Flagged(Box::new(base), flag == 1)
        } else {
            base
        };
        entries.push((v, p));
    }
    ExactDist::from_entries(entries)
}

/// One sampled tuple as a JSON line.
pub fn sample_json(t: &IncreasingTuple, seed: u64, index: u64) -> Json {
    json!({
        "tuple": t.values().iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "seed": seed,
        "index": index,
    })
}

/// A tuple too large to write: only exponents and the latent keys' shape.
pub fn symbolic_sample_json(h: &crate::construction::HugeTuple, seed: u64, index: u64) -> Json {
    json!({
        "symbolic": {
            "arity": h.arity(),
            "y1_exponent": h.y1_draw.exponent().to_string(),
            "y1_minus": h.y1_minus.to_string(),
            "gap_exponents": h
                .gap_draws
                .iter()
                .map(|d| d.exponent().to_string())
                .collect::<Vec<_>>(),
        },
        "seed": seed,
        "index": index,
    })
}

pub fn certificate_json(c: &ConstructionCertificate) -> Json {
    json!({
        "n": c.n,
        "eps": format_rational(&c.eps),
        "log2_eps": -(c.t as i64),
        "bound": c.bound.describe(),
        "spacing_threshold": format_rational(&c.spacing_threshold),
        "spacing_prob_bound": format_rational(&c.spacing_prob_bound),
        "neighbor_bound": format_rational(&c.neighbor_bound),
    })
}

fn tower_json(t: &Tower) -> Json {
    json!({
        "tower_height": t.height,
        "top_exponent": format_rational(&t.top),
    })
}

pub fn value_report_json(r: &ValueReport) -> Json {
    json!({
        "game": r.game,
        "n": r.n,
        "horizon": r.horizon,
        "value": r.value,
        "lower": format_rational(&r.lower),
        "upper": format_rational(&r.upper),
        "duality_gap": r.duality_gap,
        "iterations": r.iterations,
        "converged": r.converged,
        "dealer": r.dealer.dist.iter().map(|(v, p)| {
            json!({
                "tuple": v.as_tuple().expect("tuple").iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                "weight": format_rational(p),
            })
        }).collect::<Vec<_>>(),
    })
}

pub fn audit_report_json(r: &AuditReport) -> Json {
    let verdict = match r.verdict {
        AuditVerdict::Consistent => "consistent",
        AuditVerdict::Violation => "violation",
        AuditVerdict::NotApplicable => "not-applicable",
    };
    let mut out = json!({
        "n": r.n,
        "eps_star": format_rational(&r.eps_star),
        "witness": [r.witness.0, r.witness.1],
        "max_value": r.max_value.to_string(),
        "applicable": r.applicable,
        "verdict": verdict,
    });
    if let Some(bound) = &r.bound {
        out["bound"] = tower_json(bound);
    }
    if let Some((p, v)) = &r.case_probability {
        out["case_probability"] = json!(format_rational(p));
        out["case_verdict"] = json!(match v {
            BiasedVerdict::Consistent => "consistent",
            BiasedVerdict::Violation => "violation",
            BiasedVerdict::Informational => "informational",
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactdist::{coupling_flag, uniform};
    use crate::rational::rat;

    fn round_trip(d: &ExactDist) -> ExactDist {
        let mut buf = Vec::new();
        write_dist(&mut buf, d).unwrap();
        read_dist(&buf[..]).unwrap()
    }

    #[test]
    fn scalar_round_trip() {
        let d = uniform(1, 4);
        assert_eq!(round_trip(&d), d);
    }

    #[test]
    fn tuple_round_trip() {
        let d = crate::construction::build_n2(&rat(1, 3)).unwrap();
        assert_eq!(round_trip(&d), d);
    }

    #[test]
    fn flagged_round_trip() {
        let d = coupling_flag(&uniform(1, 2), &uniform(1, 4)).unwrap();
        assert_eq!(round_trip(&d), d);
    }

    #[test]
    fn rejects_bad_mass() {
        let text = "{\"kind\":\"scalar\",\"arity\":1}\n{\"value\":\"1\",\"p\":\"1/2\"}\n";
        assert!(read_dist(text.as_bytes()).is_err());
    }

    #[test]
    fn rejects_malformed() {
        assert!(read_dist("".as_bytes()).is_err());
        assert!(read_dist("{\"kind\":\"mystery\",\"arity\":1}\n".as_bytes()).is_err());
    }
}
