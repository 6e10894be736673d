use std::collections::BTreeSet;

use serde::Serialize;
use serde_json::Value;

use super::SparsityPattern;
use crate::error::{Error, Result};

/// On-disk pattern encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternFormat {
    /// Header `n m`, then `n` rows of `n + m` tokens from `{0, *}`; `#` starts a comment line.
    Grid,
    /// `{"n": .., "m": .., "stars": [[i, j], ...]}` with 1-based indices.
    Json,
}

pub fn parse_pattern(text: &str, format: PatternFormat) -> Result<SparsityPattern> {
    match format {
        PatternFormat::Grid => parse_grid(text),
        PatternFormat::Json => parse_json(text),
    }
}

pub fn serialize_pattern(pattern: &SparsityPattern, format: PatternFormat) -> String {
    match format {
        PatternFormat::Grid => serialize_grid(pattern),
        PatternFormat::Json => serialize_json(pattern),
    }
}

fn grid_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Grid {
        line,
        column,
        message: message.into(),
    }
}

fn parse_grid(text: &str) -> Result<SparsityPattern> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(idx, l)| (idx + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| grid_err(1, 1, "missing header `n m`"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(grid_err(
            header_line,
            1,
            format!("header must be `n m`, found {} fields", fields.len()),
        ));
    }
    let parse_dim = |s: &str, col: usize, name: &str| -> Result<usize> {
        s.parse::<usize>().map_err(|_| {
            grid_err(
                header_line,
                col,
                format!("{name} is not a non-negative integer: `{s}`"),
            )
        })
    };
    let n = parse_dim(fields[0], 1, "n")?;
    let m = parse_dim(fields[1], 2, "m")?;
    if n == 0 {
        return Err(grid_err(header_line, 1, "n must be at least 1"));
    }
    let width = n
        .checked_add(m)
        .ok_or_else(|| grid_err(header_line, 2, "n + m overflows"))?;

    let mut stars = BTreeSet::new();
    let mut last_line = header_line;
    for row in 0..n {
        let (line_no, line) = lines.next().ok_or_else(|| {
            grid_err(
                last_line + 1,
                1,
                format!("expected {n} pattern rows, found {row}"),
            )
        })?;
        last_line = line_no;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != width {
            return Err(grid_err(
                line_no,
                tokens.len().min(width) + 1,
                format!("expected {width} tokens, found {}", tokens.len()),
            ));
        }
        for (col, tok) in tokens.iter().enumerate() {
            match *tok {
                "0" => {}
                "*" => {
                    stars.insert((row, col));
                }
                other => {
                    return Err(grid_err(
                        line_no,
                        col + 1,
                        format!("unknown token `{other}` (expected `0` or `*`)"),
                    ))
                }
            }
        }
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(grid_err(
            line_no,
            1,
            format!("expected {n} pattern rows, found more"),
        ));
    }
    SparsityPattern::new(n, m, stars)
}

fn serialize_grid(p: &SparsityPattern) -> String {
    let mut out = format!("{} {}\n", p.n, p.m);
    for i in 0..p.n {
        let row: Vec<&str> = (0..p.n + p.m)
            .map(|j| if p.is_star(i, j) { "*" } else { "0" })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

fn json_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Json {
        path: path.into(),
        message: message.into(),
    }
}

fn parse_json(text: &str) -> Result<SparsityPattern> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        json_err(
            "$",
            format!(
                "invalid JSON at line {}, column {}: {e}",
                e.line(),
                e.column()
            ),
        )
    })?;
    let obj = root
        .as_object()
        .ok_or_else(|| json_err("$", "expected an object"))?;
    let uint = |key: &str| -> Result<usize> {
        let v = obj
            .get(key)
            .ok_or_else(|| json_err(format!("$.{key}"), "missing field"))?;
        v.as_u64()
            .and_then(|x| usize::try_from(x).ok())
            .ok_or_else(|| json_err(format!("$.{key}"), "expected a non-negative integer"))
    };
    let n = uint("n")?;
    let m = uint("m")?;
    if n == 0 {
        return Err(json_err("$.n", "n must be at least 1"));
    }
    let stars_v = obj
        .get("stars")
        .ok_or_else(|| json_err("$.stars", "missing field"))?
        .as_array()
        .ok_or_else(|| json_err("$.stars", "expected an array"))?;
    let mut stars = BTreeSet::new();
    for (idx, entry) in stars_v.iter().enumerate() {
        let path = format!("$.stars[{idx}]");
        let pair = entry
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| json_err(&path, "expected a pair [i, j]"))?;
        let mut ij = [0usize; 2];
        for (k, (slot, limit)) in ij.iter_mut().zip([n, n + m]).enumerate() {
            let v = pair[k]
                .as_u64()
                .and_then(|x| usize::try_from(x).ok())
                .ok_or_else(|| json_err(format!("{path}[{k}]"), "expected a positive integer"))?;
            if v == 0 || v > limit {
                return Err(json_err(
                    format!("{path}[{k}]"),
                    format!("index {v} out of range 1..={limit}"),
                ));
            }
            *slot = v - 1;
        }
        if !stars.insert((ij[0], ij[1])) {
            return Err(json_err(
                &path,
                format!("duplicate star [{}, {}]", ij[0] + 1, ij[1] + 1),
            ));
        }
    }
    SparsityPattern::new(n, m, stars)
}

#[derive(Serialize)]
struct PatternJson {
    n: usize,
    m: usize,
    stars: Vec<[usize; 2]>,
}

fn serialize_json(p: &SparsityPattern) -> String {
    let doc = PatternJson {
        n: p.n,
        m: p.m,
        stars: p.stars.iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
    };
    let mut s = serde_json::to_string(&doc).expect("pattern JSON serialization cannot fail");
    s.push('\n');
    s
}
