//! Graph difference operators of arbitrary order.
//!
//! The order-(k+1) operator is built by the recursion that alternates the
//! incidence matrix F and its transpose: odd k gives L^((k+1)/2) (n rows),
//! even k gives F L^(k/2) (p rows). Operators are stored sparse in CSR and
//! fall back to dense storage below 64 columns or past 25% fill, since
//! repeated Laplacian products densify quickly with k.

use crate::graph::UndirectedGraph;
use crate::sparse::CsrMatrix;
use ndarray::{Array1, Array2};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("vector length {0} does not match operator columns {1}")]
    DimensionMismatch(usize, usize),
    #[error("threshold must be nonnegative, got {0}")]
    NegativeThreshold(f64),
}

/// Operator storage: CSR when sparse enough, dense otherwise.
#[derive(Debug, Clone)]
pub enum OpMat {
    Dense(Array2<f64>),
    Sparse(CsrMatrix),
}

const DENSE_COL_CUTOFF: usize = 64;
const FILL_CUTOFF: f64 = 0.25;

impl OpMat {
    /// Apply the storage policy to a CSR result.
    pub fn from_csr(m: CsrMatrix) -> Self {
        if m.ncols() < DENSE_COL_CUTOFF || m.fill_ratio() > FILL_CUTOFF {
            OpMat::Dense(m.to_dense())
        } else {
            OpMat::Sparse(m)
        }
    }

    pub fn nrows(&self) -> usize {
        match self {
            OpMat::Dense(a) => a.nrows(),
            OpMat::Sparse(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            OpMat::Dense(a) => a.ncols(),
            OpMat::Sparse(m) => m.ncols(),
        }
    }

    pub fn matvec(&self, x: &Array1<f64>) -> Array1<f64> {
        match self {
            OpMat::Dense(a) => a.dot(x),
            OpMat::Sparse(m) => m.matvec(x),
        }
    }

    pub fn matvec_t(&self, x: &Array1<f64>) -> Array1<f64> {
        match self {
            OpMat::Dense(a) => a.t().dot(x),
            OpMat::Sparse(m) => m.matvec_t(x),
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        match self {
            OpMat::Dense(a) => a.clone(),
            OpMat::Sparse(m) => m.to_dense(),
        }
    }

    pub fn to_csr(&self) -> CsrMatrix {
        match self {
            OpMat::Dense(a) => CsrMatrix::from_dense(a),
            OpMat::Sparse(m) => m.clone(),
        }
    }

    pub fn nnz(&self) -> usize {
        match self {
            OpMat::Dense(a) => a.iter().filter(|v| **v != 0.0).count(),
            OpMat::Sparse(m) => m.nnz(),
        }
    }

    fn matmul(&self, other: &OpMat) -> OpMat {
        match (self, other) {
            (OpMat::Sparse(a), OpMat::Sparse(b)) => OpMat::from_csr(a.matmul(b)),
            (OpMat::Dense(a), OpMat::Dense(b)) => OpMat::Dense(a.dot(b)),
            (OpMat::Dense(a), OpMat::Sparse(b)) => {
                let (n, _) = a.dim();
                let mut out = Array2::zeros((n, b.ncols()));
                for i in 0..n {
                    for j in 0..a.ncols() {
                        let aij = a[[i, j]];
                        if aij == 0.0 {
                            continue;
                        }
                        let (cols, vals) = b.row(j);
                        for (c, v) in cols.iter().zip(vals.iter()) {
                            out[[i, *c]] += aij * v;
                        }
                    }
                }
                OpMat::Dense(out)
            }
            (OpMat::Sparse(a), OpMat::Dense(b)) => OpMat::Dense(a.to_dense().dot(b)),
        }
    }
}

/// Order-(k+1) graph difference operator.
#[derive(Debug, Clone)]
pub struct DiffOperator {
    k: usize,
    m: usize,
    n: usize,
    matrix: OpMat,
}

impl DiffOperator {
    /// Wrap a univariate difference matrix so the comparator penalties can
    /// share the structure-count machinery.
    pub(crate) fn from_univariate(matrix: CsrMatrix, k: usize, n: usize) -> Self {
        let m = matrix.nrows();
        DiffOperator {
            k,
            m,
            n,
            matrix: OpMat::from_csr(matrix),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Row count: n for odd k, p for even k.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &OpMat {
        &self.matrix
    }

    pub fn apply(&self, beta: &Array1<f64>) -> Result<Array1<f64>, OperatorError> {
        if beta.len() != self.n {
            return Err(OperatorError::DimensionMismatch(beta.len(), self.n));
        }
        Ok(self.matrix.matvec(beta))
    }
}

/// Oriented incidence matrix F: row k for edge (i, j) with i < j carries
/// -1 at column i and +1 at column j.
pub fn build_incidence(graph: &UndirectedGraph) -> CsrMatrix {
    let triplets = graph
        .edges()
        .iter()
        .enumerate()
        .flat_map(|(k, &(i, j))| [(k, i, -1.0), (k, j, 1.0)])
        .collect();
    CsrMatrix::from_triplets(graph.edge_count(), graph.n(), triplets)
}

/// Graph Laplacian L = F^T F.
pub fn build_laplacian(graph: &UndirectedGraph) -> CsrMatrix {
    let f = build_incidence(graph);
    f.transpose().matmul(&f)
}

/// Build the order-(k+1) difference operator by the F / F^T recursion.
pub fn build_diff_operator(graph: &UndirectedGraph, k: usize) -> DiffOperator {
    let f = OpMat::from_csr(build_incidence(graph));
    let n = graph.n();
    if k == 0 {
        return DiffOperator {
            k,
            m: graph.edge_count(),
            n,
            matrix: f,
        };
    }
    let lap = OpMat::from_csr(build_laplacian(graph));
    // odd k: L^((k+1)/2); even k: F L^(k/2)
    let power = if k % 2 == 1 { (k + 1) / 2 } else { k / 2 };
    let mut acc = lap.clone();
    for _ in 1..power {
        acc = acc.matmul(&lap);
    }
    let matrix = if k % 2 == 1 { acc } else { f.matmul(&acc) };
    let m = if k % 2 == 1 { n } else { graph.edge_count() };
    debug_assert_eq!(matrix.nrows(), m);
    DiffOperator { k, m, n, matrix }
}

/// Univariate difference operator of the given order: (n-order) x n with
/// alternating binomial coefficient rows.
pub fn univariate_diff(n: usize, order: usize) -> CsrMatrix {
    assert!(order >= 1);
    let mut acc = first_difference(n);
    for step in 1..order {
        acc = first_difference(n - step).matmul(&acc);
    }
    acc
}

fn first_difference(n: usize) -> CsrMatrix {
    let rows = n.saturating_sub(1);
    let triplets = (0..rows)
        .flat_map(|i| [(i, i, -1.0), (i, i + 1, 1.0)])
        .collect();
    CsrMatrix::from_triplets(rows, n, triplets)
}

/// Thresholded l0 counts (s1, s2) of the operator image and of beta itself.
pub fn structure_counts(
    beta: &Array1<f64>,
    op: &DiffOperator,
    threshold: f64,
) -> Result<(usize, usize), OperatorError> {
    if threshold < 0.0 {
        return Err(OperatorError::NegativeThreshold(threshold));
    }
    let image = op.apply(beta)?;
    let s1 = image.iter().filter(|v| v.abs() > threshold).count();
    let s2 = beta.iter().filter(|v| v.abs() > threshold).count();
    Ok((s1, s2))
}

/// MatrixMarket coordinate export (1-based indices).
pub fn write_matrix_market<W: Write>(w: &mut W, m: &OpMat) -> std::io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    let csr = m.to_csr();
    writeln!(w, "{} {} {}", csr.nrows(), csr.ncols(), csr.nnz())?;
    for (i, j, v) in csr.iter_entries() {
        writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn incidence_path4() {
        let g = UndirectedGraph::path(4);
        let f = build_incidence(&g).to_dense();
        let expect = array![
            [-1.0, 1.0, 0.0, 0.0],
            [0.0, -1.0, 1.0, 0.0],
            [0.0, 0.0, -1.0, 1.0]
        ];
        assert_eq!(f, expect);
    }

    #[test]
    fn incidence_triangle() {
        let g = UndirectedGraph::new(3, vec![(0, 1), (0, 2), (1, 2)]).unwrap();
        let f = build_incidence(&g).to_dense();
        let expect = array![[-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0], [0.0, -1.0, 1.0]];
        assert_eq!(f, expect);
    }

    #[test]
    fn incidence_empty_edges() {
        let g = UndirectedGraph::new(1, vec![]).unwrap();
        let f = build_incidence(&g);
        assert_eq!(f.nrows(), 0);
        assert_eq!(f.ncols(), 1);
    }

    #[test]
    fn laplacian_path3_and_triangle() {
        let g = UndirectedGraph::path(3);
        let l = build_laplacian(&g).to_dense();
        assert_eq!(l, array![[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]]);
        let t = UndirectedGraph::new(3, vec![(0, 1), (0, 2), (1, 2)]).unwrap();
        let lt = build_laplacian(&t).to_dense();
        assert_eq!(lt, array![[2.0, -1.0, -1.0], [-1.0, 2.0, -1.0], [-1.0, -1.0, 2.0]]);
    }

    #[test]
    fn diff_operator_dimensions() {
        let path = UndirectedGraph::path(250);
        let d0 = build_diff_operator(&path, 0);
        assert_eq!((d0.m(), d0.n()), (249, 250));
        let d1 = build_diff_operator(&path, 1);
        assert_eq!((d1.m(), d1.n()), (250, 250));
        let grid = UndirectedGraph::grid(25, 25);
        let d2 = build_diff_operator(&grid, 2);
        assert_eq!((d2.m(), d2.n()), (1200, 625));
    }

    #[test]
    fn odd_k_is_laplacian_power() {
        let g = UndirectedGraph::path(6);
        let l = build_laplacian(&g).to_dense();
        let d3 = build_diff_operator(&g, 3);
        let l2 = l.dot(&l);
        let diff = &d3.matrix().to_dense() - &l2;
        assert!(diff.iter().all(|v| v.abs() == 0.0));
    }

    #[test]
    fn even_k_recursion_consistency() {
        // F L^(k/2) computed directly equals the recursive product
        for n in [5usize, 9, 14] {
            let g = UndirectedGraph::path(n);
            let f = build_incidence(&g).to_dense();
            let l = build_laplacian(&g).to_dense();
            for k in [2usize, 4] {
                let direct = {
                    let mut acc = l.clone();
                    for _ in 1..k / 2 {
                        acc = acc.dot(&l);
                    }
                    f.dot(&acc)
                };
                let rec = build_diff_operator(&g, k).matrix().to_dense();
                let diff = &direct - &rec;
                assert!(diff.iter().all(|v| v.abs() == 0.0));
            }
        }
    }

    #[test]
    fn constants_annihilated() {
        let g = UndirectedGraph::grid(4, 5);
        for k in 0..4 {
            let d = build_diff_operator(&g, k);
            let ones = Array1::from_elem(g.n(), 1.0);
            let img = d.apply(&ones).unwrap();
            assert!(img.iter().all(|v| v.abs() < 1e-12), "k={k}");
        }
    }

    #[test]
    fn structure_count_examples() {
        let g = UndirectedGraph::path(5);
        let d = build_diff_operator(&g, 0);
        let beta = array![0.0, 1.0, 1.0, 0.0, 2.0];
        let (s1, s2) = structure_counts(&beta, &d, 1e-8).unwrap();
        assert_eq!((s1, s2), (3, 3));
        let zero = Array1::zeros(5);
        assert_eq!(structure_counts(&zero, &d, 1e-8).unwrap(), (0, 0));
        assert!(structure_counts(&beta, &d, -1.0).is_err());
        let bad = Array1::zeros(4);
        assert!(structure_counts(&bad, &d, 1e-8).is_err());
    }

    #[test]
    fn univariate_rows() {
        let d2 = univariate_diff(5, 2).to_dense();
        assert_eq!(d2.nrows(), 3);
        assert_eq!(d2.row(0).to_owned(), array![1.0, -2.0, 1.0, 0.0, 0.0]);
        let d3 = univariate_diff(6, 3).to_dense();
        assert_eq!(d3.row(0).to_owned(), array![-1.0, 3.0, -3.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn matrix_market_format() {
        let g = UndirectedGraph::path(3);
        let d = build_diff_operator(&g, 0);
        let mut buf = Vec::new();
        write_matrix_market(&mut buf, d.matrix()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "%%MatrixMarket matrix coordinate real general"
        );
        assert_eq!(lines.next().unwrap(), "2 3 4");
    }

    #[test]
    fn storage_policy() {
        // small graphs go dense, large sparse graphs stay CSR
        let small = build_diff_operator(&UndirectedGraph::path(10), 0);
        assert!(matches!(small.matrix(), OpMat::Dense(_)));
        let large = build_diff_operator(&UndirectedGraph::path(250), 1);
        assert!(matches!(large.matrix(), OpMat::Sparse(_)));
    }
}
