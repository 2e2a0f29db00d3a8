use serde::Serialize;

use crate::model::CompositeModel;
use crate::qwalk::SparseAbs;
use crate::{Error, Result};

/// An explicit partition of the edges of the graph of `Ĥ` into forests.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForestCertificate {
    pub forests: usize,
    pub vertices: usize,
    pub edges: usize,
    /// Forest index of each edge, in the order of `edge_list`.
    pub assignment: Vec<usize>,
    pub edge_list: Vec<(usize, usize)>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Greedy decomposition: each edge goes to the first forest in which its
/// endpoints are still disconnected.
pub fn forest_decomposition(vertices: usize, edges: &[(usize, usize)]) -> ForestCertificate {
    let mut forests: Vec<UnionFind> = Vec::new();
    let mut assignment = Vec::with_capacity(edges.len());
    for &(a, b) in edges {
        let slot = forests.iter_mut().position(|f| f.find(a) != f.find(b));
        let k = slot.unwrap_or_else(|| {
            forests.push(UnionFind::new(vertices));
            forests.len() - 1
        });
        forests[k].union(a, b);
        assignment.push(k);
    }
    ForestCertificate {
        forests: forests.len().max(1),
        vertices,
        edges: edges.len(),
        assignment,
        edge_list: edges.to_vec(),
    }
}

impl ForestCertificate {
    /// Re-checks the certificate: every edge assigned to a valid forest and
    /// every forest acyclic.
    pub fn validate(&self) -> Result<()> {
        if self.assignment.len() != self.edge_list.len() {
            return Err(Error::DimensionMismatch {
                what: "forest assignment",
                expected: self.edge_list.len(),
                got: self.assignment.len(),
            });
        }
        let mut check: Vec<UnionFind> = (0..self.forests).map(|_| UnionFind::new(self.vertices)).collect();
        for (&(a, b), &k) in self.edge_list.iter().zip(&self.assignment) {
            if k >= self.forests || a >= self.vertices || b >= self.vertices {
                return Err(Error::invalid("forest certificate", format!("edge ({a},{b}) is out of range")));
            }
            if !check[k].union(a, b) {
                return Err(Error::invalid(
                    "forest certificate",
                    format!("forest {k} contains a cycle through ({a},{b})"),
                ));
            }
        }
        Ok(())
    }
}

/// Certified upper bound on the arboricity of the graph of `Ĥ`.
pub fn arboricity_bound(model: &CompositeModel) -> Result<ForestCertificate> {
    let graph = SparseAbs::from_model(model);
    let cert = forest_decomposition(graph.dim(), &graph.edges());
    cert.validate()?;
    Ok(cert)
}
