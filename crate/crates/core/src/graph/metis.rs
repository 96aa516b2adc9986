//! METIS / Chaco graph file format.
//!
//! Header `n m [fmt]`; `fmt` is `0` (unweighted), `1` (edge weights),
//! `10` (node weights) or `11` (both). Node `i` is described on the `i`-th
//! non-comment line after the header; neighbor ids are 1-based. Lines that
//! start with `%` are comments.

use std::path::Path;

use super::{merge_parallel, Graph, GraphError, NodeId, Weight};

fn parse_err(line: usize, message: impl Into<String>) -> GraphError {
    GraphError::Parse {
        line,
        message: message.into(),
    }
}

pub fn load_metis(path: impl AsRef<Path>) -> Result<Graph, GraphError> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| GraphError::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_metis(&text)
}

/// Parses METIS text. Zero node weights are normalized to one.
pub fn parse_metis(text: &str) -> Result<Graph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim_start().starts_with('%'));

    let (header_line, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| parse_err(1, "missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 2 {
        return Err(parse_err(header_line, "header must contain n and m"));
    }
    let n: usize = fields[0]
        .parse()
        .map_err(|_| parse_err(header_line, format!("invalid node count `{}`", fields[0])))?;
    let m: usize = fields[1]
        .parse()
        .map_err(|_| parse_err(header_line, format!("invalid edge count `{}`", fields[1])))?;
    let (has_node_weights, has_edge_weights) = match fields.get(2).copied() {
        None | Some("0") | Some("00") | Some("000") => (false, false),
        Some("1") | Some("01") | Some("001") => (false, true),
        Some("10") | Some("010") => (true, false),
        Some("11") | Some("011") => (true, true),
        Some(other) => {
            return Err(parse_err(header_line, format!("unsupported fmt `{other}`")));
        }
    };
    if let Some(ncon) = fields.get(3) {
        if *ncon != "1" {
            return Err(parse_err(header_line, "multi-constraint graphs are not supported"));
        }
    }

    let mut vwgt = vec![1 as Weight; n];
    let mut lists: Vec<Vec<(NodeId, Weight)>> = vec![Vec::new(); n];
    let mut line_of = vec![0usize; n];
    let mut entries = 0usize;
    let mut node = 0usize;
    for (line_no, line) in lines {
        if node == n {
            if line.trim().is_empty() {
                continue;
            }
            return Err(parse_err(line_no, format!("more than {n} node lines")));
        }
        line_of[node] = line_no;
        let mut tokens = line.split_whitespace();
        let mut next_number = |what: &str| -> Result<Option<i64>, GraphError> {
            match tokens.next() {
                None => Ok(None),
                Some(t) => t
                    .parse::<i64>()
                    .map(Some)
                    .map_err(|_| parse_err(line_no, format!("invalid {what} `{t}`"))),
            }
        };
        if has_node_weights {
            let w = next_number("node weight")?
                .ok_or_else(|| parse_err(line_no, "missing node weight"))?;
            if w < 0 {
                return Err(parse_err(line_no, format!("negative node weight {w}")));
            }
            vwgt[node] = w.max(1);
        }
        while let Some(target) = next_number("neighbor")? {
            if target < 1 || target as usize > n {
                return Err(parse_err(
                    line_no,
                    format!("neighbor {target} out of range 1..={n}"),
                ));
            }
            let target = target as usize - 1;
            if target == node {
                return Err(parse_err(line_no, format!("self-loop on node {}", node + 1)));
            }
            let w = if has_edge_weights {
                next_number("edge weight")?
                    .ok_or_else(|| parse_err(line_no, "missing edge weight"))?
            } else {
                1
            };
            if w <= 0 {
                return Err(parse_err(line_no, format!("non-positive edge weight {w}")));
            }
            lists[node].push((target, w));
            entries += 1;
        }
        node += 1;
    }
    let eof_line = text.lines().count() + 1;
    for v in node..n {
        line_of[v] = eof_line;
    }

    for list in &mut lists {
        merge_parallel(list);
    }
    for u in 0..n {
        for &(v, w) in &lists[u] {
            match lists[v].binary_search_by_key(&u, |&(x, _)| x) {
                Ok(pos) if lists[v][pos].1 == w => {}
                Ok(pos) => {
                    return Err(parse_err(
                        line_of[v],
                        format!(
                            "edge {{{}, {}}} has weight {w} at node {} but {} at node {}",
                            u + 1,
                            v + 1,
                            u + 1,
                            lists[v][pos].1,
                            v + 1
                        ),
                    ));
                }
                Err(_) => {
                    return Err(parse_err(
                        line_of[v],
                        format!(
                            "neighbor list of node {} missing edge back to {}",
                            v + 1,
                            u + 1
                        ),
                    ));
                }
            }
        }
    }
    if entries != 2 * m {
        return Err(parse_err(
            header_line,
            format!("header declares {m} edges but {} adjacency entries were found", entries),
        ));
    }
    Ok(Graph::from_sorted_lists(vwgt, lists))
}

/// Serializes a graph in METIS format, emitting weights only when needed.
pub fn write_metis(g: &Graph) -> String {
    let node_weighted = g.node_weights().iter().any(|&w| w != 1);
    let edge_weighted = g.edges().any(|(_, _, w)| w != 1);
    let fmt = match (node_weighted, edge_weighted) {
        (false, false) => "",
        (false, true) => " 1",
        (true, false) => " 10",
        (true, true) => " 11",
    };
    let mut out = format!("{} {}{}\n", g.n(), g.m(), fmt);
    for v in g.nodes() {
        let mut fields: Vec<String> = Vec::new();
        if node_weighted {
            fields.push(g.node_weight(v).to_string());
        }
        for (u, w) in g.neighbors(v) {
            fields.push((u + 1).to_string());
            if edge_weighted {
                fields.push(w.to_string());
            }
        }
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_without_weights() {
        let g = parse_metis("4 3\n2\n1 3\n2 4\n3\n").unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.m(), 3);
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(edges, vec![(0, 1, 1), (1, 2, 1), (2, 3, 1)]);
    }

    #[test]
    fn triangle_with_edge_weights() {
        let g = parse_metis("3 3 1\n2 5 3 1\n1 5 3 2\n1 1 2 2\n").unwrap();
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(edges, vec![(0, 1, 5), (0, 2, 1), (1, 2, 2)]);
    }

    #[test]
    fn asymmetric_input_names_the_line() {
        let err = parse_metis("2 1\n2\n").unwrap_err();
        match err {
            GraphError::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("node 2 missing edge back to 1"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_self_loops_and_bad_weights() {
        assert!(matches!(
            parse_metis("2 1\n1\n\n"),
            Err(GraphError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_metis("2 1 1\n2 0\n1 0\n"),
            Err(GraphError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_metis("2 1\n3\n1\n"),
            Err(GraphError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_metis("2 1 1\n2 3\n1 4\n"),
            Err(GraphError::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn comments_node_weights_and_isolated_nodes() {
        let g = parse_metis("% comment\n3 1 10\n2 2\n0 1\n5\n").unwrap();
        assert_eq!(g.node_weights(), &[2, 1, 5]);
        assert_eq!(g.degree(2), 0);
    }

    #[test]
    fn edge_count_mismatch() {
        assert!(parse_metis("3 3\n2\n1 3\n2\n").is_err());
    }

    #[test]
    fn write_then_parse() {
        let g = Graph::from_edges(vec![1, 2, 1], [(0, 1, 3), (1, 2, 1)]).unwrap();
        assert_eq!(parse_metis(&write_metis(&g)).unwrap(), g);
    }
}
