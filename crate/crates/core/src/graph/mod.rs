//! KNN graphs and the Markov diffusion operator on them.

mod knn;

pub use knn::NeighborTable;

use nalgebra::DMatrix;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

/// Symmetrized unit-weight KNN graph with its random-walk transition matrix
/// `P = D^-1 W` and stationary distribution `pi_i = deg_i / sum(deg)`.
///
/// `W_ij = 1` iff `j` is among the `N` nearest neighbors of `i` or vice
/// versa. No self-loops.
#[derive(Debug, Clone)]
pub struct MarkovGraph {
    n_neighbors: usize,
    offsets: Vec<usize>,
    adjacency: Vec<usize>,
    degree: Vec<f64>,
    pi: Vec<f64>,
    component: Vec<usize>,
    n_components: usize,
}

impl MarkovGraph {
    pub fn build(cloud: &PointCloud, n_neighbors: usize) -> Result<Self> {
        let table = NeighborTable::build(cloud, n_neighbors)?;
        Ok(Self::from_neighbors(&table, n_neighbors))
    }

    /// Builds the graph from the first `n_neighbors` columns of a (possibly
    /// wider) neighbor table.
    pub fn from_neighbors(table: &NeighborTable, n_neighbors: usize) -> Self {
        assert!(n_neighbors >= 1 && n_neighbors <= table.k());
        let n = table.len();
        let mut lists: Vec<Vec<usize>> = vec![Vec::with_capacity(n_neighbors); n];
        for i in 0..n {
            for &j in table.neighbors(i, n_neighbors) {
                lists[i].push(j);
                lists[j].push(i);
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut adjacency = Vec::new();
        offsets.push(0);
        for list in &mut lists {
            list.sort_unstable();
            list.dedup();
            adjacency.extend_from_slice(list);
            offsets.push(adjacency.len());
        }
        Self::from_csr(offsets, adjacency, n_neighbors)
    }

    /// Builds a graph from undirected edges (both directions implied).
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut lists: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::input(format!("bad edge ({a}, {b})")));
            }
            lists[a].push(b);
            lists[b].push(a);
        }
        let mut offsets = vec![0];
        let mut adjacency = Vec::new();
        for list in &mut lists {
            if list.is_empty() {
                return Err(Error::input("isolated vertex"));
            }
            list.sort_unstable();
            list.dedup();
            adjacency.extend_from_slice(list);
            offsets.push(adjacency.len());
        }
        Ok(Self::from_csr(offsets, adjacency, 0))
    }

    fn from_csr(offsets: Vec<usize>, adjacency: Vec<usize>, n_neighbors: usize) -> Self {
        let n = offsets.len() - 1;
        let degree: Vec<f64> = (0..n).map(|i| (offsets[i + 1] - offsets[i]) as f64).collect();
        let volume: f64 = degree.iter().sum();
        let pi = degree.iter().map(|d| d / volume).collect();

        let mut component = vec![usize::MAX; n];
        let mut n_components = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if component[start] != usize::MAX {
                continue;
            }
            component[start] = n_components;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &w in &adjacency[offsets[v]..offsets[v + 1]] {
                    if component[w] == usize::MAX {
                        component[w] = n_components;
                        stack.push(w);
                    }
                }
            }
            n_components += 1;
        }

        Self {
            n_neighbors,
            offsets,
            adjacency,
            degree,
            pi,
            component,
            n_components,
        }
    }

    pub fn len(&self) -> usize {
        self.degree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree.is_empty()
    }

    pub fn n_neighbors(&self) -> usize {
        self.n_neighbors
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.adjacency.len() / 2
    }

    pub fn degree(&self) -> &[f64] {
        &self.degree
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn is_connected(&self) -> bool {
        self.n_components == 1
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    /// Component id of every vertex, numbered by lowest member index.
    pub fn components(&self) -> &[usize] {
        &self.component
    }

    /// `y = P x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let s: f64 = self.neighbors(i).iter().map(|&j| x[j]).sum();
            *yi = s / self.degree[i];
        }
    }

    /// `y = x P` (row vector times P).
    pub fn apply_left(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (i, &xi) in x.iter().enumerate() {
            let share = xi / self.degree[i];
            for &j in self.neighbors(i) {
                y[j] += share;
            }
        }
    }

    /// `y = S x` with `S = D^-1/2 W D^-1/2`, the symmetric conjugate of P.
    pub fn apply_symmetric(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let s: f64 = self
                .neighbors(i)
                .iter()
                .map(|&j| x[j] / self.degree[j].sqrt())
                .sum();
            *yi = s / self.degree[i].sqrt();
        }
    }

    pub fn dense_transition(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut p = DMatrix::zeros(n, n);
        for i in 0..n {
            for &j in self.neighbors(i) {
                p[(i, j)] = 1.0 / self.degree[i];
            }
        }
        p
    }

    pub(crate) fn dense_symmetric(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut s = DMatrix::zeros(n, n);
        for i in 0..n {
            for &j in self.neighbors(i) {
                s[(i, j)] = 1.0 / (self.degree[i] * self.degree[j]).sqrt();
            }
        }
        s
    }

    /// Subgraph induced on `members` (sorted global indices), reindexed.
    pub(crate) fn subgraph(&self, members: &[usize]) -> MarkovGraph {
        let mut local = vec![usize::MAX; self.len()];
        for (k, &g) in members.iter().enumerate() {
            local[g] = k;
        }
        let mut offsets = vec![0];
        let mut adjacency = Vec::new();
        for &g in members {
            adjacency.extend(self.neighbors(g).iter().map(|&j| local[j]));
            offsets.push(adjacency.len());
        }
        Self::from_csr(offsets, adjacency, self.n_neighbors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_collinear_points() {
        let c = PointCloud::from_rows(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let g = MarkovGraph::build(&c, 1).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.degree(), &[1.0, 2.0, 1.0]);
        assert_eq!(g.pi(), &[0.25, 0.5, 0.25]);
        assert!(g.is_connected());
    }

    #[test]
    fn full_neighborhood_is_complete_graph() {
        let c = PointCloud::from_rows(&[vec![0.0], vec![1.0], vec![3.0], vec![7.0]]).unwrap();
        let g = MarkovGraph::build(&c, 3).unwrap();
        let p = g.dense_transition();
        for i in 0..4 {
            assert_eq!(p[(i, i)], 0.0);
            for j in 0..4 {
                if i != j {
                    assert_eq!(p[(i, j)], 1.0 / 3.0);
                }
            }
            assert_eq!(g.pi()[i], 0.25);
        }
    }

    #[test]
    fn detects_components() {
        let g = MarkovGraph::from_edges(5, &[(0, 1), (2, 3), (3, 4)]).unwrap();
        assert_eq!(g.n_components(), 2);
        assert_eq!(g.components(), &[0, 0, 1, 1, 1]);
        let sub = g.subgraph(&[2, 3, 4]);
        assert_eq!(sub.degree(), &[1.0, 2.0, 1.0]);
    }

    #[test]
    fn symmetric_operator_matches_dense() {
        let g = MarkovGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 2)]).unwrap();
        let x = [1.0, -2.0, 0.5, 3.0];
        let mut y = [0.0; 4];
        g.apply_symmetric(&x, &mut y);
        let dense = g.dense_symmetric() * nalgebra::DVector::from_row_slice(&x);
        for i in 0..4 {
            assert!((y[i] - dense[i]).abs() < 1e-14);
        }
    }
}
