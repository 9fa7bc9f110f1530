//! Text formats: weighted edge lists, Matrix Market coordinate files,
//! DIMACS CNF, the JSON result record, and the run-length sign encoding
//! used inside it. Parsers report 1-based line numbers in every error.

use crate::cost_matrix::CostMatrix;
use crate::error::Error;
use crate::problems::{MaxCutInstance, MaxSatInstance};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::InvalidArgument(format!(
                "unknown output format {other:?}, expected json or csv"
            ))),
        }
    }
}

/// Parses a weighted edge list:
///
/// ```text
/// # comment
/// <n> <m>
/// <i> <j> [weight]      (1-indexed, weight defaults to 1)
/// ```
///
/// Self-loops are dropped; the second return value counts them. Duplicate
/// pairs are merged by summing.
pub fn parse_edge_list(text: &str) -> Result<(MaxCutInstance, usize), Error> {
    let mut n = 0usize;
    let mut declared_edges = 0usize;
    let mut header_seen = false;
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut self_loops = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if !header_seen {
            if tokens.len() != 2 {
                return Err(Error::parse(
                    line_no,
                    format!("header must be `<n> <m>`, got {} tokens", tokens.len()),
                ));
            }
            n = parse_usize(tokens[0], line_no, "vertex count")?;
            declared_edges = parse_usize(tokens[1], line_no, "edge count")?;
            if n == 0 {
                return Err(Error::parse(line_no, "vertex count must be positive"));
            }
            header_seen = true;
            continue;
        }
        if tokens.len() != 2 && tokens.len() != 3 {
            return Err(Error::parse(
                line_no,
                format!("edge line must be `<i> <j> [weight]`, got {} tokens", tokens.len()),
            ));
        }
        if edges.len() + self_loops == declared_edges {
            return Err(Error::parse(
                line_no,
                format!("more edge lines than the declared {declared_edges}"),
            ));
        }
        let i = parse_usize(tokens[0], line_no, "vertex index")?;
        let j = parse_usize(tokens[1], line_no, "vertex index")?;
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Error::parse(
                line_no,
                format!("vertex index out of range 1..={n}"),
            ));
        }
        let w = if tokens.len() == 3 {
            parse_f64(tokens[2], line_no, "edge weight")?
        } else {
            1.0
        };
        if i == j {
            self_loops += 1;
            continue;
        }
        edges.push((i - 1, j - 1, w));
    }
    if !header_seen {
        return Err(Error::parse(1, "missing `<n> <m>` header"));
    }
    if edges.len() + self_loops != declared_edges {
        return Err(Error::parse(
            text.lines().count().max(1),
            format!(
                "declared {declared_edges} edges but found {}",
                edges.len() + self_loops
            ),
        ));
    }
    Ok((MaxCutInstance::new(n, &edges)?, self_loops))
}

pub fn edge_list_to_string(inst: &MaxCutInstance) -> String {
    let mut out = format!("{} {}\n", inst.n(), inst.edges().len());
    for &(i, j, w) in inst.edges() {
        out.push_str(&format!("{} {} {}\n", i + 1, j + 1, w));
    }
    out
}

/// Parses a Matrix Market coordinate file into a size and 0-indexed
/// triplets. Only square `coordinate real`/`integer` matrices with
/// `general` or `symmetric` qualifiers are accepted; a `symmetric` file has
/// its off-diagonal entries mirrored.
pub fn parse_matrix_market(text: &str) -> Result<(usize, Vec<(usize, usize, f64)>), Error> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(Error::parse(
            1,
            "header must be `%%MatrixMarket matrix coordinate <field> <symmetry>`",
        ));
    }
    if tokens[1] != "matrix" {
        return Err(Error::parse(1, format!("unsupported object {:?}", tokens[1])));
    }
    if tokens[2] != "coordinate" {
        return Err(Error::parse(
            1,
            format!("unsupported format {:?}, only coordinate", tokens[2]),
        ));
    }
    match tokens[3].as_str() {
        "real" | "integer" => {}
        other => {
            return Err(Error::parse(
                1,
                format!("unsupported field {other:?}, only real or integer"),
            ))
        }
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => {
            return Err(Error::parse(
                1,
                format!("unsupported symmetry {other:?}, only general or symmetric"),
            ))
        }
    };

    let mut size: Option<usize> = None;
    let mut declared_nnz = 0usize;
    let mut raw_entries = 0usize;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if size.is_none() {
            if tokens.len() != 3 {
                return Err(Error::parse(line_no, "size line must be `<rows> <cols> <nnz>`"));
            }
            let rows = parse_usize(tokens[0], line_no, "row count")?;
            let cols = parse_usize(tokens[1], line_no, "column count")?;
            declared_nnz = parse_usize(tokens[2], line_no, "entry count")?;
            if rows != cols {
                return Err(Error::parse(
                    line_no,
                    format!("matrix must be square, got {rows} x {cols}"),
                ));
            }
            if rows == 0 {
                return Err(Error::parse(line_no, "matrix must have at least one row"));
            }
            size = Some(rows);
            continue;
        }
        let n = size.unwrap();
        if tokens.len() != 3 {
            return Err(Error::parse(line_no, "entry must be `<i> <j> <value>`"));
        }
        if raw_entries == declared_nnz {
            return Err(Error::parse(
                line_no,
                format!("more entries than the declared {declared_nnz}"),
            ));
        }
        let i = parse_usize(tokens[0], line_no, "row index")?;
        let j = parse_usize(tokens[1], line_no, "column index")?;
        let v = parse_f64(tokens[2], line_no, "entry value")?;
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Error::parse(line_no, format!("index out of range 1..={n}")));
        }
        raw_entries += 1;
        triplets.push((i - 1, j - 1, v));
        if symmetric && i != j {
            triplets.push((j - 1, i - 1, v));
        }
    }
    let n = size.ok_or_else(|| Error::parse(text.lines().count().max(1), "missing size line"))?;
    if raw_entries != declared_nnz {
        return Err(Error::parse(
            text.lines().count().max(1),
            format!("declared {declared_nnz} entries but found {raw_entries}"),
        ));
    }
    Ok((n, triplets))
}

pub fn parse_matrix_market_to_cost(text: &str) -> Result<CostMatrix, Error> {
    let (n, triplets) = parse_matrix_market(text)?;
    CostMatrix::from_triplets(n, &triplets)
}

/// Writes every stored entry (both triangles) as a `general` file.
pub fn matrix_market_to_string(c: &CostMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
    out.push_str(&format!("{} {} {}\n", c.n(), c.n(), c.nnz()));
    for i in 0..c.n() {
        for (j, w) in c.row(i) {
            out.push_str(&format!("{} {} {}\n", i + 1, j + 1, w));
        }
    }
    out
}

/// Parses DIMACS CNF. Clauses are 0-terminated literal runs and may span
/// lines; the declared clause count is enforced. Duplicate literals are
/// dropped and clauses holding a variable in both polarities are kept but
/// flagged tautological. A line consisting of `%` ends the input.
pub fn parse_cnf(text: &str) -> Result<MaxSatInstance, Error> {
    let mut num_vars: Option<usize> = None;
    let mut declared_clauses = 0usize;
    let mut clauses: Vec<Vec<(usize, i8)>> = Vec::new();
    let mut current: Vec<(usize, i8)> = Vec::new();
    let mut last_line = 1usize;

    'outer: for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line == "%" {
            break;
        }
        if line.starts_with('p') {
            if num_vars.is_some() {
                return Err(Error::parse(line_no, "duplicate problem line"));
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 4 || tokens[0] != "p" || tokens[1] != "cnf" {
                return Err(Error::parse(line_no, "problem line must be `p cnf <vars> <clauses>`"));
            }
            num_vars = Some(parse_usize(tokens[2], line_no, "variable count")?);
            declared_clauses = parse_usize(tokens[3], line_no, "clause count")?;
            continue;
        }
        let nv = num_vars
            .ok_or_else(|| Error::parse(line_no, "clause before `p cnf` problem line"))?;
        for token in line.split_whitespace() {
            let lit: i64 = token.parse().map_err(|_| {
                Error::parse(line_no, format!("literal {token:?} is not an integer"))
            })?;
            if lit == 0 {
                if current.is_empty() {
                    return Err(Error::parse(
                        line_no,
                        format!("clause {} is empty", clauses.len() + 1),
                    ));
                }
                clauses.push(std::mem::take(&mut current));
                if clauses.len() == declared_clauses {
                    break 'outer;
                }
                continue;
            }
            let var = lit.unsigned_abs() as usize;
            if var > nv {
                return Err(Error::parse(
                    line_no,
                    format!("variable {var} exceeds the declared {nv}"),
                ));
            }
            current.push((var - 1, if lit > 0 { 1 } else { -1 }));
        }
    }
    let num_vars = num_vars.ok_or_else(|| Error::parse(last_line, "missing `p cnf` problem line"))?;
    if !current.is_empty() {
        return Err(Error::parse(last_line, "unterminated clause at end of input"));
    }
    if clauses.len() != declared_clauses {
        return Err(Error::parse(
            last_line,
            format!("declared {declared_clauses} clauses but found {}", clauses.len()),
        ));
    }
    MaxSatInstance::new(num_vars, &clauses)
}

pub fn cnf_to_string(inst: &MaxSatInstance) -> String {
    let mut out = format!("p cnf {} {}\n", inst.num_vars(), inst.num_clauses());
    for clause in inst.clauses() {
        for &(var, sign) in clause.literals() {
            let lit = (var + 1) as i64 * i64::from(sign);
            out.push_str(&format!("{lit} "));
        }
        out.push_str("0\n");
    }
    out
}

/// Run-length encoding of a sign vector: `+3-2` means three +1 entries
/// followed by two -1 entries. The empty vector encodes to the empty
/// string.
pub fn encode_signs(x: &[i8]) -> String {
    let mut out = String::new();
    let mut idx = 0;
    while idx < x.len() {
        let sign = x[idx];
        let mut run = 1usize;
        while idx + run < x.len() && x[idx + run] == sign {
            run += 1;
        }
        out.push(if sign < 0 { '-' } else { '+' });
        out.push_str(&run.to_string());
        idx += run;
    }
    out
}

pub fn decode_signs(s: &str) -> Result<Vec<i8>, Error> {
    let mut out = Vec::new();
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        let sign: i8 = match c {
            '+' => 1,
            '-' => -1,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "sign encoding expects + or -, got {other:?}"
                )))
            }
        };
        let mut digits = String::new();
        while let Some(&d) = chars.peek() {
            if d.is_ascii_digit() {
                digits.push(d);
                chars.next();
            } else {
                break;
            }
        }
        let run: usize = digits
            .parse()
            .map_err(|_| Error::InvalidArgument("sign encoding needs a count after each sign".into()))?;
        if run == 0 {
            return Err(Error::InvalidArgument("sign encoding counts must be positive".into()));
        }
        out.extend(std::iter::repeat(sign).take(run));
    }
    Ok(out)
}

/// Summary of one solver run in problem units, serialized as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub problem: String,
    pub n: usize,
    pub k: usize,
    pub beta: f64,
    pub rule: String,
    pub sweeps: usize,
    pub f: f64,
    pub bound_or_value: f64,
    /// Run-length encoded signs, or null when no discrete solution applies.
    pub assignment: Option<String>,
    pub trace_ref: Option<String>,
}

pub fn write_result(record: &ResultRecord) -> String {
    serde_json::to_string_pretty(record).expect("record serializes")
}

pub fn read_result(text: &str) -> Result<ResultRecord, Error> {
    serde_json::from_str(text)
        .map_err(|e| Error::parse(e.line().max(1), format!("result record: {e}")))
}

fn parse_usize(token: &str, line: usize, what: &str) -> Result<usize, Error> {
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("{what} {token:?} is not a non-negative integer")))
}

fn parse_f64(token: &str, line: usize, what: &str) -> Result<f64, Error> {
    let v: f64 = token
        .parse()
        .map_err(|_| Error::parse(line, format!("{what} {token:?} is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("{what} must be finite")));
    }
    Ok(v)
}
