//! Externally sourced facts about curves (analytic rank, Sha), kept as data.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::curve::WeierstrassModel;
use crate::error::{Error, Result};
use crate::euler::ShaOrder;

const BUNDLED: &str = include_str!("../data/reference.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReferenceRecord {
    pub curve: WeierstrassModel,
    pub p: u64,
    pub analytic_rank: u32,
    pub sha_p_order: ShaOrder,
    pub lambda_base: Option<u64>,
    pub mu_base: Option<u64>,
    pub source_note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReferenceDataset {
    pub records: Vec<ReferenceRecord>,
}

impl ReferenceDataset {
    /// The dataset shipped with the crate.
    pub fn bundled() -> Self {
        parse_reference(BUNDLED).expect("bundled reference data is valid")
    }

    /// The record for this curve and prime, matched on minimal models.
    pub fn lookup(&self, model: &WeierstrassModel, p: u64) -> Option<&ReferenceRecord> {
        let target = model.minimal_model().0;
        self.records.iter().find(|r| r.p == p && r.curve.minimal_model().0 == target)
    }
}

pub fn ingest_reference(path: &Path) -> Result<ReferenceDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_reference(&text)
}

fn schema(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Schema { field: field.into(), reason: reason.into() }
}

pub fn parse_reference(text: &str) -> Result<ReferenceDataset> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    match root.get("schema").and_then(Value::as_u64) {
        Some(1) => {}
        _ => return Err(schema("schema", "expected version 1")),
    }
    let records = root.get("records").and_then(Value::as_array).ok_or_else(|| schema("records", "expected an array"))?;
    let mut out = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        out.push(parse_record(rec, i)?);
    }
    Ok(ReferenceDataset { records: out })
}

fn parse_record(rec: &Value, i: usize) -> Result<ReferenceRecord> {
    let name = |f: &str| format!("records[{i}].{f}");
    let curve_text = rec.get("curve").and_then(Value::as_str).ok_or_else(|| schema(name("curve"), "expected a string"))?;
    let curve: WeierstrassModel = curve_text.parse().map_err(|e: Error| schema(name("curve"), e.to_string()))?;
    let p = rec.get("p").and_then(Value::as_u64).ok_or_else(|| schema(name("p"), "expected an odd prime"))?;
    if p < 3 || !crate::arith::is_prime(p) {
        return Err(schema(name("p"), "expected an odd prime"));
    }
    let analytic_rank = rec
        .get("analytic_rank")
        .and_then(Value::as_u64)
        .and_then(|r| u32::try_from(r).ok())
        .ok_or_else(|| schema(name("analytic_rank"), "expected a nonnegative integer"))?;
    let sha_p_order = match rec.get("sha_p_order") {
        Some(Value::String(s)) if s == "unknown" => ShaOrder::Unknown,
        Some(Value::Number(n)) => {
            let n = n.as_u64().ok_or_else(|| schema(name("sha_p_order"), "expected a positive integer"))?;
            ShaOrder::known(n, p).map_err(|_| schema(name("sha_p_order"), format!("{n} is not a power of {p}")))?
        }
        _ => return Err(schema(name("sha_p_order"), "expected a power of p or \"unknown\"")),
    };
    let optional = |f: &str| -> Result<Option<u64>> {
        match rec.get(f) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => v.as_u64().map(Some).ok_or_else(|| schema(name(f), "expected a nonnegative integer")),
        }
    };
    let lambda_base = optional("lambda_base")?;
    let mu_base = optional("mu_base")?;
    let source_note =
        rec.get("source_note").and_then(Value::as_str).ok_or_else(|| schema(name("source_note"), "expected a string"))?;
    Ok(ReferenceRecord { curve, p, analytic_rank, sha_p_order, lambda_base, mu_base, source_note: source_note.to_string() })
}
