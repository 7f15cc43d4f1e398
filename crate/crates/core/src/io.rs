//! Chain and edge-list file parsing and writing.
//!
//! Chain text format: first line `n=<int>`, then `row col value` triplets in
//! any order; `#` starts a comment; missing entries are zero. Files ending in
//! `.csv` are instead read as a dense n x n comma-separated matrix.

use crate::chain::Chain;
use crate::error::{Error, Result};
use std::fs;
use std::path::Path;

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parse the triplet format from text. Line numbers in errors are 1-based.
pub fn parse_chain_text(text: &str, renormalize: bool) -> Result<Chain> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, strip_comment(l).trim()));
    let (lineno, header) = lines
        .by_ref()
        .find(|(_, l)| !l.is_empty())
        .ok_or_else(|| parse_err(1, "empty file"))?;
    let n: usize = header
        .strip_prefix("n=")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| parse_err(lineno, format!("expected `n=<int>` header, got `{header}`")))?;
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (lineno, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let mut field = |name: &str| {
            parts
                .next()
                .ok_or_else(|| parse_err(lineno, format!("missing {name} in `{line}`")))
        };
        let row: usize = field("row")?
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad row index in `{line}`")))?;
        let col: usize = field("col")?
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad column index in `{line}`")))?;
        let value: f64 = field("value")?
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad value in `{line}`")))?;
        if parts.next().is_some() {
            return Err(parse_err(lineno, format!("trailing fields in `{line}`")));
        }
        if row >= n || col >= n {
            return Err(parse_err(lineno, format!("index out of range for n={n} in `{line}`")));
        }
        if rows[row].iter().any(|&(j, _)| j == col) {
            return Err(parse_err(lineno, format!("duplicate entry ({row}, {col})")));
        }
        rows[row].push((col, value));
    }
    Chain::from_sparse_rows(n, rows, renormalize)
}

/// Parse a dense CSV matrix: n rows of n comma-separated values.
pub fn parse_chain_csv(text: &str, renormalize: bool) -> Result<Chain> {
    let mut raw = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = strip_comment(line).trim();
        if line.is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse()
                    .map_err(|_| parse_err(i + 1, format!("bad value `{}`", f.trim())))
            })
            .collect::<Result<_>>()?;
        raw.push(row);
    }
    Chain::from_dense(&raw, renormalize)
}

/// Read a chain file; `.csv` extension selects the dense format.
pub fn read_chain(path: &Path, renormalize: bool) -> Result<Chain> {
    let text = fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        parse_chain_csv(&text, renormalize)
    } else {
        parse_chain_text(&text, renormalize)
    }
}

/// Serialize a chain in the triplet format. Values use the shortest
/// round-tripping decimal form, so write -> read is exact.
pub fn chain_to_text(chain: &Chain) -> String {
    let mut out = format!("n={}\n", chain.n());
    for x in 0..chain.n() {
        for &(y, v) in chain.row(x) {
            out.push_str(&format!("{x} {y} {v}\n"));
        }
    }
    out
}

pub fn write_chain(path: &Path, chain: &Chain) -> Result<()> {
    fs::write(path, chain_to_text(chain))?;
    Ok(())
}

/// Parse an edge list: lines `u v`, 0-indexed, undirected. Duplicate and
/// self-loop rejection happens downstream with these same line numbers.
pub fn parse_edge_list(text: &str) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = strip_comment(line).trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_err(i + 1, format!("expected `u v`, got `{line}`")));
        }
        let u: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(i + 1, format!("bad vertex `{}`", fields[0])))?;
        let v: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(i + 1, format!("bad vertex `{}`", fields[1])))?;
        edges.push((u, v));
    }
    Ok(edges)
}

pub fn read_edge_list(path: &Path) -> Result<Vec<(usize, usize)>> {
    parse_edge_list(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplet_round_trip() {
        let text = "# lazy two-state\nn=2\n0 0 0.5\n0 1 0.5\n1 0 0.5\n1 1 0.5\n";
        let chain = parse_chain_text(text, false).unwrap();
        assert_eq!(chain.n(), 2);
        assert_eq!(chain.entry(0, 1), 0.5);
        let back = parse_chain_text(&chain_to_text(&chain), false).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(chain.entry(x, y), back.entry(x, y));
            }
        }
    }

    #[test]
    fn irrational_entries_round_trip_exactly() {
        let chain = crate::families::random_symmetric_chain(9, 0.4, 3).unwrap();
        let back = parse_chain_text(&chain_to_text(&chain), false).unwrap();
        for x in 0..9 {
            for y in 0..9 {
                assert_eq!(chain.entry(x, y), back.entry(x, y), "({x},{y})");
            }
        }
    }

    #[test]
    fn missing_entries_are_zero() {
        let text = "n=3\n0 1 1\n1 0 0.5\n1 2 0.5\n2 1 1\n";
        let chain = parse_chain_text(text, false).unwrap();
        assert_eq!(chain.entry(0, 0), 0.0);
        assert_eq!(chain.entry(0, 2), 0.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let dup = "n=2\n0 0 0.5\n0 1 0.5\n0 1 0.0\n1 0 0.5\n1 1 0.5\n";
        match parse_chain_text(dup, false) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 4);
                assert!(msg.contains("duplicate"));
            }
            other => panic!("expected duplicate-entry error, got {other:?}"),
        }
        match parse_chain_text("n=2\n0 zero 0.5\n", false) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_chain_text("m=2\n", false) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected header error, got {other:?}"),
        }
    }

    #[test]
    fn csv_dense_format() {
        let text = "0.5, 0.5\n0.5, 0.5\n";
        let chain = parse_chain_csv(text, false).unwrap();
        assert_eq!(chain.n(), 2);
        assert_eq!(chain.entry(1, 0), 0.5);
        assert!(parse_chain_csv("0.5, x\n0.5, 0.5\n", false).is_err());
    }

    #[test]
    fn file_extension_selects_format() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("k.csv");
        fs::write(&csv, "0,1\n1,0\n").unwrap();
        let chain = read_chain(&csv, false).unwrap();
        assert_eq!(chain.entry(0, 1), 1.0);
        let txt = dir.path().join("k.chain");
        write_chain(&txt, &chain).unwrap();
        let back = read_chain(&txt, false).unwrap();
        assert_eq!(back.entry(1, 0), 1.0);
    }

    #[test]
    fn edge_list_parse() {
        let edges = parse_edge_list("0 1\n1 2  # path\n\n").unwrap();
        assert_eq!(edges, vec![(0, 1), (1, 2)]);
        match parse_edge_list("0 1\n1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
