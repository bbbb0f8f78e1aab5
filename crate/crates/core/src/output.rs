//! JSON and CSV serialization for the CLI.
//!
//! Numbers are written with 17 significant digits (`{:.16e}`), which
//! round-trips f64 exactly; output is deterministic byte-for-byte for
//! identical inputs. The JSON schema for matrix documents is
//! `{"params": {...}, "matrix": [[...]], "meta": {...}}`; CSV carries the
//! same values row-major with the params and meta in `#`-prefixed header
//! comments.

use std::fmt::Write as _;

/// 17 significant digits: exact f64 round-trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Ordered metadata values.
#[derive(Clone, Debug)]
pub enum MetaValue {
    Num(f64),
    Int(u64),
    Str(&'static str),
    Null,
}

impl MetaValue {
    fn json(&self) -> String {
        match self {
            MetaValue::Num(x) => fmt_f64(*x),
            MetaValue::Int(i) => i.to_string(),
            MetaValue::Str(s) => format!("\"{s}\""),
            MetaValue::Null => "null".to_string(),
        }
    }

    fn plain(&self) -> String {
        match self {
            MetaValue::Num(x) => fmt_f64(*x),
            MetaValue::Int(i) => i.to_string(),
            MetaValue::Str(s) => s.to_string(),
            MetaValue::Null => "none".to_string(),
        }
    }
}

/// Parameter block as serialized (p and alpha already converted to f64).
#[derive(Clone, Copy, Debug)]
pub struct ParamsInfo {
    pub n: u32,
    pub p: f64,
    pub time_level: usize,
    pub alpha: f64,
}

impl ParamsInfo {
    fn json(&self) -> String {
        format!(
            "{{\"n\": {}, \"p\": {}, \"N\": {}, \"alpha\": {}}}",
            self.n,
            fmt_f64(self.p),
            self.time_level,
            fmt_f64(self.alpha)
        )
    }

    fn csv_comments(&self) -> String {
        format!(
            "# n: {}\n# p: {}\n# N: {}\n# alpha: {}\n",
            self.n,
            fmt_f64(self.p),
            self.time_level,
            fmt_f64(self.alpha)
        )
    }
}

fn json_row(row: &[f64]) -> String {
    let cells: Vec<String> = row.iter().map(|x| fmt_f64(*x)).collect();
    format!("[{}]", cells.join(", "))
}

fn meta_json(meta: &[(&str, MetaValue)]) -> String {
    let fields: Vec<String> = meta
        .iter()
        .map(|(k, v)| format!("\"{k}\": {}", v.json()))
        .collect();
    format!("{{{}}}", fields.join(", "))
}

/// `{"params": ..., "matrix": row-major array of arrays, "meta": ...}`.
pub fn matrix_json(params: &ParamsInfo, rows: &[Vec<f64>], meta: &[(&str, MetaValue)]) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"params\": {},", params.json());
    out.push_str("  \"matrix\": [\n");
    for (i, row) in rows.iter().enumerate() {
        let sep = if i + 1 == rows.len() { "" } else { "," };
        let _ = writeln!(out, "    {}{}", json_row(row), sep);
    }
    out.push_str("  ],\n");
    let _ = writeln!(out, "  \"meta\": {}", meta_json(meta));
    out.push_str("}\n");
    out
}

/// Plain row-major values; params and metadata as `#` header comments.
pub fn matrix_csv(params: &ParamsInfo, rows: &[Vec<f64>], meta: &[(&str, MetaValue)]) -> String {
    let mut out = params.csv_comments();
    for (k, v) in meta {
        let _ = writeln!(out, "# {}: {}", k, v.plain());
    }
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| fmt_f64(*x)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// JSON document with named vector fields plus an optional matrix, for the
/// eigen and commutant commands.
pub fn report_json(
    params: &ParamsInfo,
    vectors: &[(&str, Vec<f64>)],
    matrix: Option<(&str, &[Vec<f64>])>,
    meta: &[(&str, MetaValue)],
) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"params\": {},", params.json());
    for (name, vals) in vectors {
        let cells: Vec<String> = vals.iter().map(|x| fmt_f64(*x)).collect();
        let _ = writeln!(out, "  \"{}\": [{}],", name, cells.join(", "));
    }
    if let Some((name, rows)) = matrix {
        let _ = writeln!(out, "  \"{}\": [", name);
        for (i, row) in rows.iter().enumerate() {
            let sep = if i + 1 == rows.len() { "" } else { "," };
            let _ = writeln!(out, "    {}{}", json_row(row), sep);
        }
        out.push_str("  ],\n");
    }
    let _ = writeln!(out, "  \"meta\": {}", meta_json(meta));
    out.push_str("}\n");
    out
}

/// CSV analogue of [`report_json`]: vectors become `# name: v1,v2,...`
/// comments and the matrix (when present) forms the data body.
pub fn report_csv(
    params: &ParamsInfo,
    vectors: &[(&str, Vec<f64>)],
    matrix: Option<(&str, &[Vec<f64>])>,
    meta: &[(&str, MetaValue)],
) -> String {
    let mut out = params.csv_comments();
    for (k, v) in meta {
        let _ = writeln!(out, "# {}: {}", k, v.plain());
    }
    for (name, vals) in vectors {
        let cells: Vec<String> = vals.iter().map(|x| fmt_f64(*x)).collect();
        let _ = writeln!(out, "# {}: {}", name, cells.join(","));
    }
    if let Some((_, rows)) = matrix {
        for row in rows {
            let cells: Vec<String> = row.iter().map(|x| fmt_f64(*x)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
    }
    out
}
