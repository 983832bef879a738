//! Plain-text topology files.
//!
//! ```text
//! # comment
//! n 6 period 4 D 4
//! graph 1
//! edge 1 2      # j -> i, players numbered from 1
//! graph 2
//! ...
//! ```
//!
//! Graphs must appear in order `1..=period`. Self-loops are implicit and
//! may be omitted.

use std::fmt::Write;

use dpnash_core::graph::{Digraph, GraphSchedule};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// A topology as written on disk, players numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyFile {
    pub n: usize,
    pub d_window: usize,
    /// One edge list per phase, edges as `(from, to)`.
    pub graphs: Vec<Vec<(usize, usize)>>,
}

impl TopologyFile {
    pub fn period(&self) -> usize {
        self.graphs.len()
    }

    pub fn to_schedule(&self) -> Result<GraphSchedule> {
        let graphs = self
            .graphs
            .iter()
            .map(|edges| {
                let mut zero_based = Vec::with_capacity(edges.len());
                for &(j, i) in edges {
                    if j == 0 || i == 0 {
                        return Err(HarnessError::Invalid(format!(
                            "edge ({j}, {i}): players are numbered from 1"
                        )));
                    }
                    zero_based.push((j - 1, i - 1));
                }
                Ok(Digraph::new(self.n, zero_based)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GraphSchedule::new(graphs, self.d_window)?)
    }

    pub fn from_schedule(s: &GraphSchedule) -> Self {
        Self {
            n: s.node_count(),
            d_window: s.d_window(),
            graphs: s
                .graphs()
                .iter()
                .map(|g| g.edges().map(|(j, i)| (j + 1, i + 1)).collect())
                .collect(),
        }
    }
}

pub fn parse_topology(text: &str, origin: &str) -> Result<TopologyFile> {
    let err = |line: usize, message: String| HarnessError::Parse {
        origin: origin.to_string(),
        line,
        column: 0,
        message,
    };
    let mut header: Option<(usize, usize, usize)> = None;
    let mut graphs: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let number = |tok: &str, what: &str| {
            tok.parse::<usize>().map_err(|_| {
                err(
                    line,
                    format!("{what}: expected a non-negative integer, got `{tok}`"),
                )
            })
        };
        match tokens[0] {
            "n" => {
                if header.is_some() {
                    return Err(err(line, "duplicate header".into()));
                }
                if tokens.len() != 6 || tokens[2] != "period" || tokens[4] != "D" {
                    return Err(err(
                        line,
                        "header must read `n <count> period <p> D <d>`".into(),
                    ));
                }
                let n = number(tokens[1], "n")?;
                let period = number(tokens[3], "period")?;
                let d = number(tokens[5], "D")?;
                if n == 0 || period == 0 || d == 0 {
                    return Err(err(line, "n, period and D must be positive".into()));
                }
                header = Some((n, period, d));
            }
            "graph" => {
                let (_, period, _) =
                    header.ok_or_else(|| err(line, "`graph` before header".into()))?;
                if tokens.len() != 2 {
                    return Err(err(line, "expected `graph <k>`".into()));
                }
                let k = number(tokens[1], "graph index")?;
                if k != graphs.len() + 1 {
                    return Err(err(
                        line,
                        format!("expected graph {}, got {k}", graphs.len() + 1),
                    ));
                }
                if k > period {
                    return Err(err(line, format!("graph {k} exceeds period {period}")));
                }
                graphs.push(Vec::new());
            }
            "edge" => {
                let (n, _, _) = header.ok_or_else(|| err(line, "`edge` before header".into()))?;
                let current = graphs
                    .last_mut()
                    .ok_or_else(|| err(line, "`edge` before the first `graph`".into()))?;
                if tokens.len() != 3 {
                    return Err(err(line, "expected `edge <from> <to>`".into()));
                }
                let j = number(tokens[1], "from")?;
                let i = number(tokens[2], "to")?;
                for v in [j, i] {
                    if v == 0 || v > n {
                        return Err(err(line, format!("endpoint {v} outside 1..={n}")));
                    }
                }
                current.push((j, i));
            }
            other => return Err(err(line, format!("unknown directive `{other}`"))),
        }
    }

    let (n, period, d_window) =
        header.ok_or_else(|| err(last_line.max(1), "missing header".into()))?;
    if graphs.len() != period {
        return Err(err(
            last_line.max(1),
            format!("period is {period} but {} graphs were given", graphs.len()),
        ));
    }
    Ok(TopologyFile {
        n,
        d_window,
        graphs,
    })
}

pub fn write_topology(t: &TopologyFile) -> String {
    let mut out = String::new();
    writeln!(out, "n {} period {} D {}", t.n, t.period(), t.d_window).unwrap();
    for (k, edges) in t.graphs.iter().enumerate() {
        writeln!(out, "graph {}", k + 1).unwrap();
        for (j, i) in edges {
            writeln!(out, "edge {j} {i}").unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_writes_back() {
        let text =
            "# two nodes\nn 2 period 2 D 2\ngraph 1\nedge 1 2 # forward\ngraph 2\nedge 2 1\n";
        let t = parse_topology(text, "t").unwrap();
        assert_eq!(t.graphs, vec![vec![(1, 2)], vec![(2, 1)]]);
        assert_eq!(parse_topology(&write_topology(&t), "t").unwrap(), t);
        let s = t.to_schedule().unwrap();
        assert_eq!(TopologyFile::from_schedule(&s), t);
    }

    #[test]
    fn reports_line_numbers() {
        let cases = [
            ("n 2 period 1 D 1\ngraph 1\nedge 1 3\n", 3),
            ("graph 1\n", 1),
            ("n 2 period 1 D 1\n\nedge 1 2\n", 3),
            ("n 2 period 2 D 1\ngraph 2\n", 2),
            ("n 2 period 2 D 1\ngraph 1\n", 2),
            ("n 2 period x D 1\n", 1),
            ("n 2 period 1 D 1\nnode 1\n", 2),
        ];
        for (text, want) in cases {
            match parse_topology(text, "f") {
                Err(HarnessError::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }
}
