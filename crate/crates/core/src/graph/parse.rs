use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::Graph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// `u v` per line, 0-based, `#` comments, optional `# N=<int>` header.
    EdgeList,
    /// `p edge N M` followed by `e u v`, 1-based.
    Dimacs,
    /// Matrix Market coordinate format, 1-based; values are ignored.
    MatrixMarket,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "edgelist" | "el" => Ok(Format::EdgeList),
            "dimacs" => Ok(Format::Dimacs),
            "matrixmarket" | "mtx" => Ok(Format::MatrixMarket),
            other => Err(Error::Config(format!("unknown graph format `{other}`"))),
        }
    }
}

/// A parsed graph with counts of the entries that were dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedGraph {
    pub graph: Graph,
    pub self_loops: usize,
    pub duplicates: usize,
}

pub fn parse_graph(path: impl AsRef<Path>, format: Format) -> Result<ParsedGraph> {
    let text = fs::read_to_string(path)?;
    parse_str(&text, format)
}

pub fn parse_str(text: &str, format: Format) -> Result<ParsedGraph> {
    let parsed = match format {
        Format::EdgeList => parse_edge_list(text),
        Format::Dimacs => parse_dimacs(text),
        Format::MatrixMarket => parse_matrix_market(text),
    }?;
    if parsed.self_loops > 0 {
        log::warn!("dropped {} self-loops", parsed.self_loops);
    }
    Ok(parsed)
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn number<T: FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| {
        parse_err(
            line,
            format!("expected a non-negative integer, found `{tok}`"),
        )
    })
}

/// Collects raw 0-based pairs and builds the graph.
struct Collector {
    pairs: Vec<(u64, u64)>,
}

impl Collector {
    fn finish(self, num_nodes: usize) -> Result<ParsedGraph> {
        if num_nodes > u32::MAX as usize {
            return Err(Error::Validation(format!("{num_nodes} nodes is too many")));
        }
        let mut graph = Graph::new(num_nodes);
        let (mut self_loops, mut duplicates) = (0, 0);
        for (u, v) in self.pairs {
            if u.max(v) >= num_nodes as u64 {
                return Err(Error::Validation(format!(
                    "edge ({u}, {v}) has an endpoint outside 0..{num_nodes}"
                )));
            }
            if u == v {
                self_loops += 1;
            } else if !graph.add_edge(u as u32, v as u32)? {
                duplicates += 1;
            }
        }
        Ok(ParsedGraph {
            graph,
            self_loops,
            duplicates,
        })
    }
}

fn parse_edge_list(text: &str) -> Result<ParsedGraph> {
    let mut declared: Option<usize> = None;
    let mut c = Collector { pairs: Vec::new() };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if let Some(comment) = s.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("N=") {
                declared = Some(number(v.trim(), line)?);
            }
            continue;
        }
        if s.is_empty() {
            continue;
        }
        let toks: Vec<&str> = s.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(parse_err(line, format!("expected `u v`, found `{s}`")));
        }
        c.pairs
            .push((number(toks[0], line)?, number(toks[1], line)?));
    }
    let n = match declared {
        Some(n) => n,
        None => c
            .pairs
            .iter()
            .map(|&(u, v)| u.max(v) as usize + 1)
            .max()
            .unwrap_or(0),
    };
    c.finish(n)
}

fn parse_dimacs(text: &str) -> Result<ParsedGraph> {
    let mut header: Option<usize> = None;
    let mut c = Collector { pairs: Vec::new() };
    let mut declared_edges = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        match toks.first().copied() {
            None | Some("c") => {}
            Some("p") => {
                if header.is_some() {
                    return Err(parse_err(line, "second problem line"));
                }
                if toks.len() != 4 || !matches!(toks[1], "edge" | "col") {
                    return Err(parse_err(line, "expected `p edge N M`"));
                }
                header = Some(number(toks[2], line)?);
                declared_edges = number(toks[3], line)?;
            }
            Some("e") => {
                let n = header.ok_or_else(|| parse_err(line, "edge before problem line"))?;
                if toks.len() != 3 {
                    return Err(parse_err(line, "expected `e u v`"));
                }
                let u: u64 = number(toks[1], line)?;
                let v: u64 = number(toks[2], line)?;
                if u == 0 || v == 0 {
                    return Err(parse_err(line, "node numbers are 1-based"));
                }
                if u.max(v) > n as u64 {
                    return Err(Error::Validation(format!(
                        "line {line}: endpoint {} exceeds N = {n}",
                        u.max(v)
                    )));
                }
                c.pairs.push((u - 1, v - 1));
            }
            Some(other) => {
                return Err(parse_err(line, format!("unknown line type `{other}`")));
            }
        }
    }
    let n = header.ok_or_else(|| parse_err(text.lines().count(), "missing problem line"))?;
    if c.pairs.len() != declared_edges {
        log::warn!(
            "problem line declares {declared_edges} edges, file has {}",
            c.pairs.len()
        );
    }
    c.finish(n)
}

fn parse_matrix_market(text: &str) -> Result<ParsedGraph> {
    let mut lines = text.lines().enumerate();
    let banner = lines
        .next()
        .map(|(_, l)| l.to_ascii_lowercase())
        .unwrap_or_default();
    let words: Vec<&str> = banner.split_whitespace().collect();
    if words.len() < 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(parse_err(1, "missing `%%MatrixMarket matrix` banner"));
    }
    if words[2] != "coordinate" {
        return Err(parse_err(1, "only coordinate matrices describe graphs"));
    }
    let mut size: Option<(usize, usize)> = None;
    let mut expected = 0usize;
    let mut c = Collector { pairs: Vec::new() };
    let mut last_line = 1;
    for (i, raw) in lines {
        let line = i + 1;
        last_line = line;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = s.split_whitespace().collect();
        match size {
            None => {
                if toks.len() != 3 {
                    return Err(parse_err(line, "expected `rows cols entries`"));
                }
                size = Some((number(toks[0], line)?, number(toks[1], line)?));
                expected = number(toks[2], line)?;
            }
            Some((rows, cols)) => {
                if toks.len() < 2 {
                    return Err(parse_err(line, "expected `i j [value]`"));
                }
                let i: u64 = number(toks[0], line)?;
                let j: u64 = number(toks[1], line)?;
                if i == 0 || j == 0 || i > rows as u64 || j > cols as u64 {
                    return Err(parse_err(line, format!("entry ({i}, {j}) out of range")));
                }
                c.pairs.push((i - 1, j - 1));
            }
        }
    }
    let (rows, cols) = size.ok_or_else(|| parse_err(last_line, "missing size line"))?;
    if c.pairs.len() != expected {
        return Err(parse_err(
            last_line,
            format!(
                "size line declares {expected} entries, found {}",
                c.pairs.len()
            ),
        ));
    }
    if rows != cols {
        log::warn!(
            "non-square {rows}x{cols} matrix read as a graph on {} nodes",
            rows.max(cols)
        );
    }
    c.finish(rows.max(cols))
}
