//! Text formats: the JSON graph schema, Graphviz DOT, and target matrices.
//!
//! JSON ids are one-based: inputs are `1..=k`, internal vertices follow in
//! order, output rows start at 1. A row fixed at zero is written with
//! `sign: 0` and `src: 0`.

use serde::{Deserialize, Serialize};

use crate::dag::{ComputationDag, OutputAssignment, Term};
use crate::error::{LccError, Result};
use crate::matrix::TargetMatrix;
use crate::shift::{ExponentRange, ShiftCoefficient};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonTerm {
    src: i64,
    sign: i64,
    exp: i64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonVertex {
    id: i64,
    terms: Vec<JsonTerm>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonOutput {
    row: i64,
    src: i64,
    sign: i64,
    exp: i64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonDag {
    k: i64,
    vertices: Vec<JsonVertex>,
    outputs: Vec<JsonOutput>,
}

fn json_term(t: &Term) -> JsonTerm {
    JsonTerm {
        src: t.src as i64 + 1,
        sign: t.coeff.sign() as i64,
        exp: t.coeff.exponent() as i64,
    }
}

/// Pretty-printed JSON; unassigned outputs are left out.
pub fn dag_to_json(dag: &ComputationDag) -> String {
    let doc = JsonDag {
        k: dag.num_inputs() as i64,
        vertices: (dag.num_inputs()..dag.len())
            .map(|id| JsonVertex {
                id: id as i64 + 1,
                terms: dag.terms(id).iter().map(json_term).collect(),
            })
            .collect(),
        outputs: dag
            .outputs()
            .iter()
            .enumerate()
            .filter_map(|(row, o)| {
                let row = row as i64 + 1;
                o.map(|o| match o {
                    OutputAssignment::Zero => JsonOutput {
                        row,
                        src: 0,
                        sign: 0,
                        exp: 0,
                    },
                    OutputAssignment::Select(t) => {
                        let j = json_term(&t);
                        JsonOutput {
                            row,
                            src: j.src,
                            sign: j.sign,
                            exp: j.exp,
                        }
                    }
                })
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("plain structs serialise")
}

fn json_error(e: serde_json::Error) -> LccError {
    let location = format!("line {} column {}", e.line(), e.column());
    let text = e.to_string();
    let message = text.strip_suffix(&format!(" at {location}")).unwrap_or(&text);
    LccError::schema(location, message)
}

pub fn dag_from_json(text: &str) -> Result<ComputationDag> {
    dag_from_json_in(text, ExponentRange::DEFAULT)
}

fn coefficient(sign: i64, exp: i64, range: ExponentRange, loc: &str) -> Result<ShiftCoefficient> {
    let negative = match sign {
        1 => false,
        -1 => true,
        other => return Err(LccError::schema(loc, format!("sign must be 1 or -1, got {other}"))),
    };
    let exp = i32::try_from(exp)
        .ok()
        .filter(|e| range.contains(*e))
        .ok_or_else(|| {
            LccError::schema(
                loc,
                format!("exponent {exp} outside [{}, {}]", range.min(), range.max()),
            )
        })?;
    ShiftCoefficient::new_in(negative, exp, range)
}

/// Parses and re-validates a graph. Every error names the offending element.
pub fn dag_from_json_in(text: &str, range: ExponentRange) -> Result<ComputationDag> {
    let doc: JsonDag = serde_json::from_str(text).map_err(json_error)?;
    if doc.k < 1 {
        return Err(LccError::schema("k", format!("must be at least 1, got {}", doc.k)));
    }
    let k = doc.k as usize;
    let mut dag = ComputationDag::unit_codebook(k)?;
    for (i, v) in doc.vertices.iter().enumerate() {
        let loc = format!("vertices[{i}]");
        let expected = (k + i + 1) as i64;
        if v.id != expected {
            return Err(LccError::schema(
                &loc,
                format!("id {} out of sequence, expected {expected}", v.id),
            ));
        }
        if v.terms.is_empty() {
            return Err(LccError::schema(&loc, "a vertex needs at least one term"));
        }
        let mut terms = Vec::with_capacity(v.terms.len());
        for (j, t) in v.terms.iter().enumerate() {
            let tloc = format!("{loc}.terms[{j}]");
            if t.src < 1 || t.src >= v.id {
                return Err(LccError::schema(
                    &tloc,
                    format!("source {} must lie in [1, {}]", t.src, v.id - 1),
                ));
            }
            terms.push(Term::new(t.src as usize - 1, coefficient(t.sign, t.exp, range, &tloc)?));
        }
        dag.push_vertex(terms)?;
    }
    let rows = doc.outputs.iter().map(|o| o.row).max().unwrap_or(0).max(0) as usize;
    dag.set_num_outputs(rows);
    let mut seen = vec![false; rows];
    for (i, o) in doc.outputs.iter().enumerate() {
        let loc = format!("outputs[{i}]");
        if o.row < 1 {
            return Err(LccError::schema(&loc, format!("row {} must be at least 1", o.row)));
        }
        let row = o.row as usize - 1;
        if std::mem::replace(&mut seen[row], true) {
            return Err(LccError::schema(&loc, format!("row {} assigned twice", o.row)));
        }
        let assignment = if o.sign == 0 {
            if o.src != 0 {
                return Err(LccError::schema(&loc, "a zero output must have src 0"));
            }
            OutputAssignment::Zero
        } else {
            if o.src < 1 || o.src as usize > dag.len() {
                return Err(LccError::schema(
                    &loc,
                    format!("source {} must lie in [1, {}]", o.src, dag.len()),
                ));
            }
            OutputAssignment::Select(Term::new(o.src as usize - 1, coefficient(o.sign, o.exp, range, &loc)?))
        };
        dag.set_output(row, assignment)?;
    }
    dag.validate()?;
    Ok(dag)
}

/// Graphviz digraph. Node ids match the JSON ids; outputs are `y<row>`.
pub fn dag_to_dot(dag: &ComputationDag) -> String {
    let mut s = String::from("digraph lcc {\n  rankdir=LR;\n");
    for id in 0..dag.num_inputs() {
        s += &format!("  v{0} [label=\"x{0}\", class=\"input\", shape=box];\n", id + 1);
    }
    for id in dag.num_inputs()..dag.len() {
        s += &format!("  v{0} [label=\"v{0}\", class=\"internal\", shape=circle];\n", id + 1);
    }
    for (row, o) in dag.outputs().iter().enumerate() {
        let label = match o {
            Some(OutputAssignment::Zero) => format!("y{} = 0", row + 1),
            _ => format!("y{}", row + 1),
        };
        s += &format!("  y{} [label=\"{label}\", class=\"output\", shape=doublecircle];\n", row + 1);
    }
    for (id, t) in dag.arcs() {
        s += &format!("  v{} -> v{} [label=\"{}\"];\n", t.src + 1, id + 1, t.coeff);
    }
    for (row, o) in dag.outputs().iter().enumerate() {
        if let Some(OutputAssignment::Select(t)) = o {
            s += &format!("  v{} -> y{} [label=\"{}\"];\n", t.src + 1, row + 1, t.coeff);
        }
    }
    s.push_str("}\n");
    s
}

/// A matrix as a JSON array of rows, or as text with one row per line and
/// entries separated by commas or whitespace (`#` starts a comment).
pub fn parse_matrix(text: &str) -> Result<TargetMatrix> {
    let trimmed = text.trim_start();
    let rows: Vec<Vec<f64>> = if trimmed.starts_with('[') {
        serde_json::from_str(trimmed).map_err(json_error)?
    } else {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| LccError::schema(format!("line {}", i + 1), format!("bad number '{s}'")))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        rows
    };
    if let Some(i) = rows.iter().position(|r| r.len() != rows[0].len()) {
        return Err(LccError::schema(
            format!("row {}", i + 1),
            format!("has {} entries, expected {}", rows[i].len(), rows[0].len()),
        ));
    }
    TargetMatrix::from_rows(&rows)
}
