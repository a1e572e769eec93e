//! Undirected graphs with a deterministic edge order.
//!
//! Nodes are 0-based indices internally; the text format is 1-based. Edges
//! are normalized to (low, high) and kept sorted lexicographically, which
//! fixes the row order of every matrix derived from the graph.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("edge ({0}, {1}) out of range for {2} nodes")]
    EdgeOutOfRange(usize, usize, usize),
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge index {0} out of range for {1} edges")]
    EdgeIndexOutOfRange(usize, usize),
    #[error("edge list parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl UndirectedGraph {
    /// Build a graph from 0-based node pairs. Pairs are normalized to
    /// (low, high) and sorted; self-loops and duplicates are rejected.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut norm = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(GraphError::EdgeOutOfRange(a, b, n));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        for w in norm.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
            }
        }
        Ok(UndirectedGraph { n, edges: norm })
    }

    /// Path graph 1-2-...-n.
    pub fn path(n: usize) -> Self {
        let edges = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        UndirectedGraph::new(n.max(1), edges).expect("path edges are valid")
    }

    /// 2D grid with `rows x cols` nodes. Node (i, j) (1-based) maps to
    /// index (j-1)*rows + (i-1): columns are stacked on top of one another.
    pub fn grid(rows: usize, cols: usize) -> Self {
        let idx = |i: usize, j: usize| j * rows + i; // 0-based
        let mut edges = Vec::new();
        for j in 0..cols {
            for i in 0..rows {
                if i + 1 < rows {
                    edges.push((idx(i, j), idx(i + 1, j)));
                }
                if j + 1 < cols {
                    edges.push((idx(i, j), idx(i, j + 1)));
                }
            }
        }
        UndirectedGraph::new(rows * cols, edges).expect("grid edges are valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges (p).
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0usize; self.n];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// True when the edge set is exactly {(i, i+1)}: the fused-lasso case.
    pub fn is_path(&self) -> bool {
        self.edges.len() == self.n - 1
            && self.edges.iter().enumerate().all(|(i, &e)| e == (i, i + 1))
    }

    /// Connected components of the graph with the listed edges removed.
    /// Components are sorted internally and by smallest member.
    pub fn connected_components(
        &self,
        excluded_edges: &[usize],
    ) -> Result<Vec<Vec<usize>>, GraphError> {
        for &e in excluded_edges {
            if e >= self.edges.len() {
                return Err(GraphError::EdgeIndexOutOfRange(e, self.edges.len()));
            }
        }
        let mut skip = vec![false; self.edges.len()];
        for &e in excluded_edges {
            skip[e] = true;
        }
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            if skip[k] {
                continue;
            }
            let ra = find(&mut parent, a);
            let rb = find(&mut parent, b);
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut root_to_group = vec![usize::MAX; self.n];
        for v in 0..self.n {
            let r = find(&mut parent, v);
            if root_to_group[r] == usize::MAX {
                root_to_group[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[root_to_group[r]].push(v);
        }
        Ok(groups)
    }

    pub fn component_count(&self) -> usize {
        self.connected_components(&[]).unwrap().len()
    }

    /// Parse the edge-list text format: first line `n <count>`, then one
    /// 1-based `i j` pair per line; `#` starts a comment.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut n: Option<usize> = None;
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if n.is_none() {
                if toks.len() != 2 || toks[0] != "n" {
                    return Err(GraphError::Parse {
                        line: lineno + 1,
                        msg: "expected header `n <count>`".into(),
                    });
                }
                n = Some(toks[1].parse().map_err(|_| GraphError::Parse {
                    line: lineno + 1,
                    msg: format!("bad node count `{}`", toks[1]),
                })?);
                continue;
            }
            if toks.len() != 2 {
                return Err(GraphError::Parse {
                    line: lineno + 1,
                    msg: "expected `i j`".into(),
                });
            }
            let parse = |t: &str| -> Result<usize, GraphError> {
                let v: usize = t.parse().map_err(|_| GraphError::Parse {
                    line: lineno + 1,
                    msg: format!("bad node index `{t}`"),
                })?;
                if v == 0 {
                    return Err(GraphError::Parse {
                        line: lineno + 1,
                        msg: "node indices are 1-based".into(),
                    });
                }
                Ok(v - 1)
            };
            edges.push((parse(toks[0])?, parse(toks[1])?));
        }
        let n = n.ok_or(GraphError::Parse {
            line: 0,
            msg: "missing `n <count>` header".into(),
        })?;
        UndirectedGraph::new(n, edges)
    }

    /// Render the edge-list text format (1-based).
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for &(a, b) in &self.edges {
            out.push_str(&format!("{} {}\n", a + 1, b + 1));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_structure() {
        let g = UndirectedGraph::path(4);
        assert_eq!(g.edges(), &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(g.max_degree(), 2);
        assert!(g.is_path());
    }

    #[test]
    fn grid_indexing_column_major() {
        let g = UndirectedGraph::grid(3, 2);
        // node (i=2, j=1) 1-based -> 0-based index 1; (i=1, j=2) -> 3
        assert_eq!(g.n(), 6);
        assert_eq!(g.edge_count(), 3 * 1 + 2 * 2); // 3 horizontal + 4 vertical
        assert!(g.edges().contains(&(0, 3)));
        assert!(g.edges().contains(&(0, 1)));
        let mut sorted = g.edges().to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, g.edges());
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(
            UndirectedGraph::new(3, vec![(0, 0)]),
            Err(GraphError::SelfLoop(0))
        ));
        assert!(matches!(
            UndirectedGraph::new(3, vec![(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        ));
        assert!(matches!(
            UndirectedGraph::new(3, vec![(0, 5)]),
            Err(GraphError::EdgeOutOfRange(0, 5, 3))
        ));
        assert!(matches!(UndirectedGraph::new(0, vec![]), Err(GraphError::Empty)));
    }

    #[test]
    fn components_path_cut() {
        let g = UndirectedGraph::path(4);
        // removing edge (2,3)1-based = index 1 leaves {0,1},{2,3}
        let c = g.connected_components(&[1]).unwrap();
        assert_eq!(c, vec![vec![0, 1], vec![2, 3]]);
        let whole = g.connected_components(&[]).unwrap();
        assert_eq!(whole.len(), 1);
    }

    #[test]
    fn components_triangle_all_cut() {
        let g = UndirectedGraph::new(3, vec![(0, 1), (0, 2), (1, 2)]).unwrap();
        let c = g.connected_components(&[0, 1, 2]).unwrap();
        assert_eq!(c.len(), 3);
        assert!(g.connected_components(&[7]).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = UndirectedGraph::new(5, vec![(0, 1), (2, 4), (1, 3)]).unwrap();
        let text = g.to_edge_list();
        let g2 = UndirectedGraph::parse_edge_list(&text).unwrap();
        assert_eq!(g, g2);
    }

    #[test]
    fn edge_list_comments_and_errors() {
        let ok = "# a comment\nn 3\n1 2 # trailing\n2 3\n";
        let g = UndirectedGraph::parse_edge_list(ok).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert!(UndirectedGraph::parse_edge_list("1 2\n").is_err());
        assert!(UndirectedGraph::parse_edge_list("n 3\n0 2\n").is_err());
        assert!(UndirectedGraph::parse_edge_list("n 3\n1 x\n").is_err());
    }

    #[test]
    fn single_node_no_edges() {
        let g = UndirectedGraph::new(1, vec![]).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.max_degree(), 0);
        assert_eq!(g.component_count(), 1);
    }
}
