//! k-d tree over diffusion coordinates answering "nearest point whose rank
//! is at most `r`".
//!
//! Every node stores the smallest rank in its subtree, so subtrees holding
//! only lower-valued points are skipped. Distances use the same summation
//! as a brute-force scan, and box bounds never exceed the true distance, so
//! results (including `(distance, index)` tie-breaks) match a linear scan
//! exactly.

use crate::diffusion::DiffusionEmbedding;

const LEAF_SIZE: usize = 12;

struct Node {
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
    min_rank: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

pub(crate) struct RankTree<'a> {
    emb: &'a DiffusionEmbedding,
    rank: &'a [usize],
    points: Vec<usize>,
    nodes: Vec<Node>,
}

impl<'a> RankTree<'a> {
    pub(crate) fn new(emb: &'a DiffusionEmbedding, rank: &'a [usize]) -> Self {
        let mut tree = Self {
            emb,
            rank,
            points: (0..emb.len()).collect(),
            nodes: Vec::new(),
        };
        if !tree.points.is_empty() {
            tree.build(0, tree.points.len());
        }
        tree
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let dim = self.emb.ell();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        let mut min_rank = usize::MAX;
        for &p in &self.points[start..end] {
            for (k, &v) in self.emb.row(p).iter().enumerate() {
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
            min_rank = min_rank.min(self.rank[p]);
        }
        let id = self.nodes.len();
        let split_dim = (0..dim)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap_or(0);
        let spread = hi[split_dim] - lo[split_dim];
        self.nodes.push(Node {
            start,
            end,
            children: None,
            min_rank,
            lo,
            hi,
        });
        if end - start > LEAF_SIZE && spread > 0.0 {
            let mid = start + (end - start) / 2;
            let emb = self.emb;
            self.points[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                emb.row(a)[split_dim]
                    .total_cmp(&emb.row(b)[split_dim])
                    .then(a.cmp(&b))
            });
            let left = self.build(start, mid);
            let right = self.build(mid, end);
            self.nodes[id].children = Some((left, right));
        }
        id
    }

    fn lower_bound(&self, node: &Node, q: &[f64]) -> f64 {
        q.iter()
            .zip(node.lo.iter().zip(&node.hi))
            .map(|(&x, (&l, &h))| {
                let d = if x < l {
                    l - x
                } else if x > h {
                    x - h
                } else {
                    0.0
                };
                d * d
            })
            .sum()
    }

    /// Nearest point `y != exclude` with `rank[y] <= max_rank`, as
    /// `(squared distance, index)`, minimizing lexicographically.
    pub(crate) fn nearest(&self, query: usize, max_rank: usize, exclude: usize) -> Option<(f64, usize)> {
        let q = self.emb.row(query);
        let mut best: Option<(f64, usize)> = None;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if node.min_rank > max_rank {
                continue;
            }
            if let Some((bd, _)) = best {
                if self.lower_bound(node, q) > bd {
                    continue;
                }
            }
            match node.children {
                None => {
                    for &p in &self.points[node.start..node.end] {
                        if p == exclude || self.rank[p] > max_rank {
                            continue;
                        }
                        let d = self.emb.sq_distance(query, p);
                        let better = match best {
                            None => true,
                            Some((bd, bi)) => d < bd || (d == bd && p < bi),
                        };
                        if better {
                            best = Some((d, p));
                        }
                    }
                }
                Some((l, r)) => {
                    let (dl, dr) = (
                        self.lower_bound(&self.nodes[l], q),
                        self.lower_bound(&self.nodes[r], q),
                    );
                    // Visit the closer child first (pushed last).
                    if dl <= dr {
                        stack.push(r);
                        stack.push(l);
                    } else {
                        stack.push(l);
                        stack.push(r);
                    }
                }
            }
        }
        best
    }
}
