//! JSON schemas for the batch front end: curve and family characteristic
//! tables, branch parametrizations, request envelopes, and the report
//! builders the front end prints.
//!
//! Numeric fields that may exceed machine integers travel as JSON numbers
//! of arbitrary precision and convert to exact integers; any fractional or
//! exponent form is rejected.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigInt, BigRational, Zero};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::branch::{BranchSeries, ChartKind, LiftReport};
use crate::contact::{
    ContactModule, CurveCharacteristics, FactorTag, FamilyCharacteristics, ProtoContactResult,
};
use crate::error::{ContactError, IoError};
use crate::tower::PairingMatrix;

impl From<serde_json::Error> for IoError {
    fn from(err: serde_json::Error) -> Self {
        let message = err.to_string();
        let message = match message.find(" at line ") {
            Some(pos) => message[..pos].to_string(),
            None => message,
        };
        IoError::Json {
            line: err.line(),
            column: err.column(),
            message,
        }
    }
}

/// Converts an arbitrary-precision JSON number to an exact integer.
pub fn number_to_bigint(n: &serde_json::Number, field: &str) -> Result<BigInt, IoError> {
    let text = n.to_string();
    text.parse::<BigInt>().map_err(|_| IoError::NotAnInteger {
        field: field.to_string(),
        text,
    })
}

/// Builds a JSON value holding an exact integer of any size.
pub fn bigint_value(n: &BigInt) -> Value {
    serde_json::from_str(&n.to_string()).expect("integer literal parses as JSON")
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFlags {
    #[serde(default)]
    pub profound: bool,
    #[serde(default)]
    pub flat: bool,
}

/// Characteristics of one plane curve as supplied on the wire.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveInput {
    pub degree: u64,
    #[serde(default)]
    pub class: Option<u64>,
    #[serde(default)]
    pub kappa: BTreeMap<String, u64>,
    #[serde(default)]
    pub flags: Option<CurveFlags>,
}

impl CurveInput {
    /// Validates the record for use at the given contact order. The class
    /// number may be omitted only at order 1, where no direction condition
    /// ever reads it.
    pub fn to_characteristics(
        &self,
        index: usize,
        order: u32,
    ) -> Result<CurveCharacteristics, IoError> {
        let class_number = match self.class {
            Some(c) => c,
            None if order >= 2 => {
                return Err(ContactError::MissingClassNumber { index, order }.into());
            }
            None => 0,
        };
        let mut cusps = BTreeMap::new();
        for (key, &count) in &self.kappa {
            let j = key.parse::<u32>().ok().filter(|&j| j >= 2).ok_or_else(|| {
                IoError::NotAnInteger {
                    field: format!("cusp order (at least 2) in curve {index}"),
                    text: key.clone(),
                }
            })?;
            if count > 0 {
                cusps.insert(j, count);
            }
        }
        let flags = self.flags.clone().unwrap_or_default();
        Ok(CurveCharacteristics {
            degree: self.degree,
            class_number,
            cusps,
            has_profound_cusp: flags.profound,
            has_flat_cusp: flags.flat,
        })
    }
}

/// Characteristic numbers of a family of plane curves.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyInput {
    pub s: u32,
    pub member_degree: u64,
    #[serde(default)]
    pub values: BTreeMap<String, serde_json::Number>,
}

impl FamilyInput {
    pub fn to_characteristics(&self) -> Result<FamilyCharacteristics, IoError> {
        let mut values = BTreeMap::new();
        for (key, number) in &self.values {
            let value = number_to_bigint(number, &format!("family value {key}"))?;
            values.insert(key.clone(), value);
        }
        Ok(FamilyCharacteristics::new(
            self.s,
            self.member_degree,
            values,
        )?)
    }
}

/// A branch parametrization: coordinate series as (exponent, numerator,
/// denominator) triples, exact below the truncation order.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchInput {
    pub x: Vec<(u32, serde_json::Number, serde_json::Number)>,
    pub y: Vec<(u32, serde_json::Number, serde_json::Number)>,
    pub truncation: u32,
}

fn decode_terms(
    rows: &[(u32, serde_json::Number, serde_json::Number)],
    coordinate: &'static str,
) -> Result<Vec<(u32, BigRational)>, IoError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(rows.len());
    for (exponent, num, den) in rows {
        if !seen.insert(*exponent) {
            return Err(IoError::DuplicateExponent {
                coordinate,
                exponent: *exponent,
            });
        }
        let field = format!("{coordinate} coefficient at exponent {exponent}");
        let n = number_to_bigint(num, &field)?;
        let d = number_to_bigint(den, &field)?;
        if d.is_zero() {
            return Err(IoError::ZeroDenominator {
                coordinate,
                exponent: *exponent,
            });
        }
        out.push((*exponent, BigRational::new(n, d)));
    }
    Ok(out)
}

impl BranchInput {
    pub fn to_series(&self) -> Result<BranchSeries, IoError> {
        let x = decode_terms(&self.x, "x")?;
        let y = decode_terms(&self.y, "y")?;
        Ok(BranchSeries::new(x, y, self.truncation)?)
    }
}

/// Input of the module subcommand: one curve and the module index n.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleRequest {
    pub curve: CurveInput,
    pub order: u32,
}

/// Input of the contact subcommand.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactRequest {
    pub curves: Vec<CurveInput>,
    pub orders: Vec<u32>,
    pub family: FamilyInput,
}

/// Input of the formula subcommand: curve labels only.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormulaRequest {
    pub curves: Vec<String>,
    pub orders: Vec<u32>,
}

/// Input of the lift subcommand in whole-curve form.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveLiftRequest {
    pub degree: u64,
    #[serde(default)]
    pub class: Option<u64>,
    pub branches: Vec<BranchInput>,
}

/// The lift subcommand accepts either a bare branch or a whole curve.
#[derive(Debug, Clone)]
pub enum LiftRequest {
    Branch(BranchInput),
    Curve(CurveLiftRequest),
}

impl LiftRequest {
    /// Dispatches on the presence of a `branches` field, then parses the
    /// matching schema so that error positions refer to the original text.
    pub fn parse(text: &str) -> Result<Self, IoError> {
        let probe: Value = serde_json::from_str(text)?;
        if probe.get("branches").is_some() {
            Ok(LiftRequest::Curve(serde_json::from_str(text)?))
        } else {
            Ok(LiftRequest::Branch(serde_json::from_str(text)?))
        }
    }
}

/// Short label of a lift chart, as printed in reports.
pub fn chart_kind_label(kind: &ChartKind) -> String {
    match kind {
        ChartKind::Primary => "primary".to_string(),
        ChartKind::PrimaryReversed => "primary-reversed".to_string(),
        ChartKind::Secondary { entered_at } => format!("secondary@{entered_at}"),
        ChartKind::OffAtlas { entered_at } => {
            let levels: Vec<String> = entered_at.iter().map(u32::to_string).collect();
            format!("off-atlas@{}", levels.join(","))
        }
    }
}

/// Serializes a lift report with its audit trace.
pub fn lift_report_json(report: &LiftReport) -> Value {
    let kappa: serde_json::Map<String, Value> = report
        .kappa
        .iter()
        .map(|(j, c)| (j.to_string(), json!(c)))
        .collect();
    json!({
        "kappa": kappa,
        "infinity_hits": report.infinity_hits.iter().collect::<Vec<_>>(),
        "profound": report.profound,
        "flat": report.flat,
        "smooth": report.smooth,
        "trace": report.trace.iter().map(|t| json!({
            "level": t.level,
            "chart": chart_kind_label(&t.chart),
            "valuation": t.valuation,
            "hit_multiplicity": t.hit_multiplicity,
        })).collect::<Vec<_>>(),
    })
}

/// Serializes curve characteristics in the curve input schema.
pub fn curve_characteristics_json(curve: &CurveCharacteristics) -> Value {
    let kappa: serde_json::Map<String, Value> = curve
        .cusps
        .iter()
        .map(|(j, c)| (j.to_string(), json!(c)))
        .collect();
    json!({
        "degree": curve.degree,
        "class": curve.class_number,
        "kappa": kappa,
        "flags": {
            "profound": curve.has_profound_cusp,
            "flat": curve.has_flat_cusp,
        },
    })
}

/// Serializes a contact module as its canonical term table.
pub fn module_json(module: &ContactModule) -> Value {
    let mut terms = serde_json::Map::new();
    for (kind, coeff) in module.terms() {
        let tag = FactorTag {
            weight: module.weight,
            kind,
        };
        terms.insert(tag.code(), bigint_value(&coeff));
    }
    json!({ "weight": module.weight, "terms": terms })
}

/// Serializes a proto-contact evaluation with its expansion and warnings.
pub fn contact_result_json(result: &ProtoContactResult) -> Value {
    json!({
        "total": bigint_value(&result.total),
        "expansion": result.expansion.iter().map(|(monomial, coeff, value)| json!({
            "key": monomial.canonical_key(),
            "coefficient": bigint_value(coeff),
            "value": bigint_value(value),
        })).collect::<Vec<_>>(),
        "warnings": result.hypothesis_warnings,
    })
}

/// Serializes a pairing table as labeled integer rows.
pub fn pairing_matrix_json(matrix: &PairingMatrix) -> Value {
    json!({
        "level": matrix.level,
        "rows": matrix.row_labels,
        "columns": matrix.column_labels,
        "entries": matrix.entries.iter().map(|row| {
            row.iter().map(bigint_value).collect::<Vec<_>>()
        }).collect::<Vec<_>>(),
    })
}
