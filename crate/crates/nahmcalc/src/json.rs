//! JSON input and report output.
//!
//! Rationals are strings (`"1/3"`, `"-2"`, `"0.25"`); JSON numbers are read
//! exactly from their decimal text. Complex values are `[re, im]` or a bare real.
//! Floating values are written as numbers with 17 significant digits.

use std::path::Path;

use serde_json::{json, Map, Number, Value};

use crate::assumptions::AssumptionReport;
use crate::error::{Error, Result};
use crate::lattice::{ExtensionTag, LatticeSpec, MinimalExtensionSpec, PointId};
use crate::puiseux::{BasePoint, LaurentSeries, LocalHiggsField, PuiseuxBranch};
use crate::scalar::{parse_q, q_to_string, ComplexScalar, GaussQ, Q};
use crate::singularity_data::{
    ConnectionData, GradedResiduePiece, IrregularGroup, IrregularPoint, JordanBlock, LogPoint,
    Side, ValidationReport,
};
use crate::stationary_phase::{
    ConsistencyEntry, DefectEntry, DolbeaultTransform, GradedMatchReport, GrrReport, PardegReport,
    TransformedData, WeightTransformRecord,
};
use crate::weyl::{ConnectionMatrix, Laurent, SubmoduleWitness};

pub const SCHEMA_VERSION: u64 = 1;

fn err(path: &str, msg: impl Into<String>) -> Error {
    Error::parse(path, msg)
}

pub fn parse_rational(v: &Value, path: &str) -> Result<Q> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return Err(err(path, "expected a rational string or number")),
    };
    parse_q(&text).ok_or_else(|| err(path, format!("cannot parse '{text}' as a rational")))
}

pub fn parse_complex(v: &Value, path: &str) -> Result<ComplexScalar> {
    match v {
        Value::Array(parts) if parts.len() == 2 => Ok(ComplexScalar::Exact(GaussQ::new(
            parse_rational(&parts[0], &format!("{path}[0]"))?,
            parse_rational(&parts[1], &format!("{path}[1]"))?,
        ))),
        Value::Array(_) => Err(err(path, "complex value must be [re, im]")),
        other => Ok(ComplexScalar::real(parse_rational(other, path)?)),
    }
}

fn float_value(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let text = format!("{x:.16e}");
    serde_json::from_str::<Number>(&text)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

pub fn rational_json(x: &Q) -> Value {
    Value::String(q_to_string(x))
}

pub fn complex_json(c: &ComplexScalar) -> Value {
    match c {
        ComplexScalar::Exact(g) => json!([q_to_string(&g.re), q_to_string(&g.im)]),
        ComplexScalar::Float(f) => json!([float_value(f.re), float_value(f.im)]),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| err(path, format!("missing field '{key}'")))
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| err(path, "expected an object"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| err(path, "expected an array"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| err(path, "expected a non-negative integer"))
}

fn as_i64(v: &Value, path: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| err(path, "expected an integer"))
}

fn parse_pieces(v: &Value, path: &str) -> Result<Vec<GradedResiduePiece>> {
    as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let pp = format!("{path}[{j}]");
            let o = as_object(p, &pp)?;
            let weight = parse_rational(field(o, "weight", &pp)?, &format!("{pp}.weight"))?;
            let blocks = as_array(field(o, "blocks", &pp)?, &format!("{pp}.blocks"))?
                .iter()
                .enumerate()
                .map(|(m, b)| {
                    let bp = format!("{pp}.blocks[{m}]");
                    let bo = as_object(b, &bp)?;
                    Ok(JordanBlock::new(
                        parse_complex(field(bo, "eigenvalue", &bp)?, &format!("{bp}.eigenvalue"))?,
                        as_usize(field(bo, "size", &bp)?, &format!("{bp}.size"))?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(GradedResiduePiece::new(weight, blocks))
        })
        .collect()
}

pub fn data_from_json(v: &Value) -> Result<ConnectionData> {
    let o = as_object(v, "$")?;
    if let Some(ver) = o.get("schema_version") {
        if ver.as_u64() != Some(SCHEMA_VERSION) {
            return Err(err("schema_version", format!("unsupported version {ver}")));
        }
    }
    let side = match o.get("side").and_then(Value::as_str).unwrap_or("de_rham") {
        "de_rham" => Side::DeRham,
        "dolbeault" => Side::Dolbeault,
        other => return Err(err("side", format!("unknown side '{other}'"))),
    };
    let rank = as_usize(field(o, "rank", "$")?, "rank")?;
    let degree = as_i64(field(o, "degree", "$")?, "degree")?;
    let log_points = match o.get("log_points") {
        None => Vec::new(),
        Some(lp) => as_array(lp, "log_points")?
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let path = format!("log_points[{i}]");
                let po = as_object(p, &path)?;
                Ok(LogPoint {
                    position: parse_complex(
                        field(po, "position", &path)?,
                        &format!("{path}.position"),
                    )?,
                    pieces: parse_pieces(field(po, "pieces", &path)?, &format!("{path}.pieces"))?,
                })
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let groups = match o.get("infinity") {
        None => Vec::new(),
        Some(inf) => {
            let io = as_object(inf, "infinity")?;
            as_array(field(io, "groups", "infinity")?, "infinity.groups")?
                .iter()
                .enumerate()
                .map(|(g, grp)| {
                    let path = format!("infinity.groups[{g}]");
                    let go = as_object(grp, &path)?;
                    Ok(IrregularGroup {
                        leading: parse_complex(
                            field(go, "leading", &path)?,
                            &format!("{path}.leading"),
                        )?,
                        pieces: parse_pieces(
                            field(go, "pieces", &path)?,
                            &format!("{path}.pieces"),
                        )?,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(ConnectionData {
        side,
        rank,
        degree,
        log_points,
        infinity: IrregularPoint { groups },
    })
}

fn pieces_json(pieces: &[GradedResiduePiece]) -> Value {
    Value::Array(
        pieces
            .iter()
            .map(|p| {
                json!({
                    "weight": rational_json(&p.weight),
                    "blocks": p.blocks.iter().map(|b| json!({
                        "eigenvalue": complex_json(&b.eigenvalue),
                        "size": b.size,
                    })).collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

pub fn data_to_json(d: &ConnectionData) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "side": d.side.tag(),
        "rank": d.rank,
        "degree": d.degree,
        "log_points": d.log_points.iter().map(|p| json!({
            "position": complex_json(&p.position),
            "pieces": pieces_json(&p.pieces),
        })).collect::<Vec<_>>(),
        "infinity": {
            "groups": d.infinity.groups.iter().map(|g| json!({
                "leading": complex_json(&g.leading),
                "pieces": pieces_json(&g.pieces),
            })).collect::<Vec<_>>(),
        },
    })
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| err(&path.display().to_string(), e.to_string()))
}

pub fn parse_json_text(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| err("$", e.to_string()))
}

pub fn load_data(path: &Path) -> Result<ConnectionData> {
    data_from_json(&parse_json_text(&read_text(path)?)?)
}

pub fn validation_json(r: &ValidationReport) -> Value {
    json!({
        "valid": r.is_valid(),
        "violations": r.violations.iter().map(|v| json!({"path": v.path, "message": v.message})).collect::<Vec<_>>(),
    })
}

pub fn assumptions_json(r: &AssumptionReport) -> Value {
    json!({
        "passes": r.passes(),
        "genericity_asserted": r.genericity_asserted,
        "checks": r.checks.iter().map(|c| json!({
            "name": c.name, "path": c.path, "pass": c.pass, "message": c.message,
        })).collect::<Vec<_>>(),
    })
}

fn record_json(r: &WeightTransformRecord) -> Value {
    json!({
        "source": r.source,
        "target": r.target,
        "class": r.class.tag(),
        "input_weight": rational_json(&r.input_weight),
        "dim": r.dim,
        "raw": rational_json(&r.raw),
        "normalized": rational_json(&r.normalized),
        "shift": r.shift.to_string(),
        "in_transform": r.in_transform,
    })
}

pub fn dolbeault_transform_json(t: &DolbeaultTransform) -> Value {
    json!({
        "rank": t.rank,
        "f": t.f,
        "degree": t.degree,
        "normalized_degree": t.normalized_degree,
        "include_infinity_modification": t.include_infinity_modification,
        "parabolic_degree": rational_json(&crate::stationary_phase::transformed_parabolic_degree(t)),
        "records": t.records.iter().map(record_json).collect::<Vec<_>>(),
    })
}

fn consistency_json(c: &ConsistencyEntry) -> Value {
    json!({
        "path": c.path,
        "table_weight": rational_json(&c.table_weight),
        "rule_weight": rational_json(&c.rule_weight),
        "agree": c.agree,
    })
}

pub fn transformed_json(t: &TransformedData) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "transformed": data_to_json(&t.datum),
        "rank": t.rank,
        "degree": t.degree,
        "degenerate": t.degenerate,
        "guaranteed": t.guaranteed,
        "assumptions": assumptions_json(&t.assumptions),
        "dropped_blocks": t.dropped.iter().map(|d| json!({
            "path": d.path,
            "weight": rational_json(&d.weight),
            "eigenvalue": complex_json(&d.block.eigenvalue),
            "size": d.block.size,
        })).collect::<Vec<_>>(),
        "dolbeault": t.dolbeault.as_ref().map(dolbeault_transform_json),
        "consistency": t.consistency.iter().map(consistency_json).collect::<Vec<_>>(),
        "warnings": t.warnings,
    })
}

pub fn defects_json(defects: &[DefectEntry]) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "involutive": defects.is_empty(),
        "defects": defects.iter().map(|d| json!({
            "path": d.path, "expected": d.expected, "actual": d.actual,
        })).collect::<Vec<_>>(),
    })
}

pub fn graded_match_json(r: &GradedMatchReport) -> Value {
    json!({
        "ok": r.ok(),
        "entries": r.entries.iter().map(|e| json!({
            "path": e.path,
            "weight": rational_json(&e.weight),
            "expected_dim": e.expected_dim,
            "actual_dim": e.actual_dim,
            "ok": e.ok,
            "note": e.note,
        })).collect::<Vec<_>>(),
        "exceptions": r.exceptions,
    })
}

pub fn grr_json(r: &GrrReport) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "passes": r.passes(),
        "r_hat": r.r_hat,
        "g": r.g,
        "f": r.f,
        "f_finite_only": r.f_finite_only,
        "infinity_twists": r.infinity_twists,
        "degree": r.degree,
        "degree_finite_only": r.degree_finite_only,
        "checks": r.checks.iter().map(|c| json!({"name": c.name, "pass": c.pass, "detail": c.detail})).collect::<Vec<_>>(),
    })
}

pub fn pardeg_json(r: &PardegReport) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "input_parabolic_degree": rational_json(&r.input),
        "dolbeault_degree": r.dolbeault_degree,
        "transformed_parabolic_degree": rational_json(&r.transformed),
        "transformed_parabolic_degree_with_infinity_modification":
            rational_json(&r.transformed_with_infinity_modification),
        "rank_matches_de_rham": r.rank_matches_de_rham,
    })
}

fn point_label(p: PointId) -> String {
    p.label()
}

pub fn lattice_spec_json(name: &str, spec: &LatticeSpec, degree_e: i64) -> Value {
    json!({
        "name": name,
        "points": spec.points.iter().map(|p| json!({
            "point": point_label(p.point),
            "twists": p.twists,
        })).collect::<Vec<_>>(),
        "finite_twist_sum": spec.finite_twist_sum(),
        "infinity_twist_sum": spec.infinity_twist_sum(),
        "degree": crate::lattice::sheaf_degree(spec, degree_e, true),
        "degree_finite_only": crate::lattice::sheaf_degree(spec, degree_e, false),
    })
}

fn tag_json(t: &ExtensionTag) -> Value {
    match t {
        ExtensionTag::Meromorphic => json!("mer"),
        ExtensionTag::Lattice(n) => json!(n),
    }
}

pub fn minimal_extension_json(m: &MinimalExtensionSpec) -> Value {
    json!(m
        .points
        .iter()
        .map(|p| json!({
            "point": point_label(p.point),
            "blocks": p.blocks.iter().map(|b| b.iter().map(tag_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        }))
        .collect::<Vec<_>>())
}

fn parse_laurent_gauss(v: &Value, path: &str) -> Result<Laurent> {
    let mut out = Laurent::new();
    for (k, c) in as_object(v, path)? {
        let e: i64 = k
            .trim()
            .parse()
            .map_err(|_| err(path, format!("bad exponent '{k}'")))?;
        let c = parse_complex(c, &format!("{path}.{k}"))?;
        let ComplexScalar::Exact(g) = c else {
            unreachable!()
        };
        out.insert(e, g);
    }
    Ok(out)
}

fn parse_tag(v: &Value, path: &str) -> Result<ExtensionTag> {
    match v {
        Value::String(s) if s == "mer" => Ok(ExtensionTag::Meromorphic),
        Value::Number(_) => Ok(ExtensionTag::Lattice(as_i64(v, path)?)),
        _ => Err(err(path, "expected \"mer\" or an integer twist")),
    }
}

/// Input of the sub-D-module search.
pub struct LatticeSearchInput {
    pub connection: ConnectionMatrix,
    pub candidate: Vec<ExtensionTag>,
    pub subranks: Vec<usize>,
}

pub fn lattice_search_input(v: &Value) -> Result<LatticeSearchInput> {
    let o = as_object(v, "$")?;
    let connection = ConnectionMatrix {
        entries: as_array(field(o, "connection", "$")?, "connection")?
            .iter()
            .enumerate()
            .map(|(i, row)| {
                as_array(row, &format!("connection[{i}]"))?
                    .iter()
                    .enumerate()
                    .map(|(j, e)| parse_laurent_gauss(e, &format!("connection[{i}][{j}]")))
                    .collect()
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let candidate = as_array(field(o, "candidate", "$")?, "candidate")?
        .iter()
        .enumerate()
        .map(|(k, t)| parse_tag(t, &format!("candidate[{k}]")))
        .collect::<Result<Vec<_>>>()?;
    let subranks = match o.get("subranks") {
        None => Vec::new(),
        Some(s) => as_array(s, "subranks")?
            .iter()
            .enumerate()
            .map(|(k, x)| as_usize(x, &format!("subranks[{k}]")))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(LatticeSearchInput {
        connection,
        candidate,
        subranks,
    })
}

fn laurent_json(l: &Laurent) -> Value {
    let mut m = Map::new();
    for (e, c) in l {
        m.insert(
            e.to_string(),
            complex_json(&ComplexScalar::Exact(c.clone())),
        );
    }
    Value::Object(m)
}

pub fn witnesses_json(ws: &[SubmoduleWitness]) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "minimal": ws.is_empty(),
        "found": ws.iter().map(|w| json!({
            "localized": w.localized,
            "det_valuation": w.det_valuation,
            "sections": w.sections.iter().map(|s| s.iter().map(laurent_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

fn parse_laurent_series(v: &Value, path: &str) -> Result<LaurentSeries> {
    let mut out = LaurentSeries::new();
    for (k, c) in as_object(v, path)? {
        let e: i64 = k
            .trim()
            .parse()
            .map_err(|_| err(path, format!("bad exponent '{k}'")))?;
        out.insert(e, parse_complex(c, &format!("{path}.{k}"))?);
    }
    Ok(out)
}

/// Higgs field input: either explicit `entries` or a `jordan` model
/// `{ "lambda": .., "size": .., "a": .. }`.
pub fn higgs_field_from_json(v: &Value, default_truncation: i64) -> Result<LocalHiggsField> {
    let o = as_object(v, "$")?;
    let truncation = match o.get("truncation") {
        Some(t) => as_i64(t, "truncation")?,
        None => default_truncation,
    };
    if let Some(j) = o.get("jordan") {
        let jo = as_object(j, "jordan")?;
        let lambda = parse_complex(field(jo, "lambda", "jordan")?, "jordan.lambda")?;
        let size = as_usize(field(jo, "size", "jordan")?, "jordan.size")?;
        let a = parse_complex(field(jo, "a", "jordan")?, "jordan.a")?;
        if size == 0 {
            return Err(err("jordan.size", "size must be positive"));
        }
        return LocalHiggsField::jordan_model(lambda, size, a, truncation);
    }
    let entries = as_array(field(o, "entries", "$")?, "entries")?
        .iter()
        .enumerate()
        .map(|(i, row)| {
            as_array(row, &format!("entries[{i}]"))?
                .iter()
                .enumerate()
                .map(|(j, e)| parse_laurent_series(e, &format!("entries[{i}][{j}]")))
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    let at_infinity = o
        .get("at_infinity")
        .and_then(Value::as_bool)
        .unwrap_or(false);
    LocalHiggsField::new(entries, truncation, at_infinity)
}

pub fn branch_json(b: &PuiseuxBranch) -> Value {
    json!({
        "base": match &b.base {
            BasePoint::Finite(c) => json!({"finite": complex_json(c)}),
            BasePoint::Infinity => json!("infinity"),
        },
        "ramification": b.ramification,
        "class": b.class,
        "terms": b.terms.iter().map(|(e, c)| json!({
            "exponent": rational_json(e),
            "coefficient": complex_json(c),
        })).collect::<Vec<_>>(),
    })
}

/// Pretty JSON with a trailing newline. Keys are sorted.
pub fn report_render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_else(|_| "null".into());
    s.push('\n');
    s
}
