//! Contention graph over the current hops of active flows.
//!
//! Each vertex is a flow's current hop. Two hops contend when their links
//! share a node, or when the larger of the two cross-interference powers
//! exceeds the threshold sigma.

use std::collections::{BTreeMap, BTreeSet};

use crate::channel::{DirectedLink, LinkBudget, LinkModel};
use crate::error::{Error, Result};
use crate::model::FlowId;

/// Undirected graph with flow ids as vertices.
#[derive(Debug, Clone, Default)]
pub struct ContentionGraph {
    adj: BTreeMap<FlowId, BTreeSet<FlowId>>,
}

impl ContentionGraph {
    pub fn from_edges(
        vertices: impl IntoIterator<Item = FlowId>,
        edges: &[(FlowId, FlowId)],
    ) -> Self {
        let mut adj: BTreeMap<FlowId, BTreeSet<FlowId>> =
            vertices.into_iter().map(|v| (v, BTreeSet::new())).collect();
        for &(a, b) in edges {
            if a == b {
                continue;
            }
            adj.get_mut(&a).expect("edge endpoint missing").insert(b);
            adj.get_mut(&b).expect("edge endpoint missing").insert(a);
        }
        ContentionGraph { adj }
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn contains(&self, v: FlowId) -> bool {
        self.adj.contains_key(&v)
    }

    pub fn vertices(&self) -> impl Iterator<Item = FlowId> + '_ {
        self.adj.keys().copied()
    }

    pub fn degree(&self, v: FlowId) -> Option<usize> {
        self.adj.get(&v).map(|n| n.len())
    }

    pub fn neighbors(&self, v: FlowId) -> Option<&BTreeSet<FlowId>> {
        self.adj.get(&v)
    }

    /// Every edge once, endpoints ordered.
    pub fn edges(&self) -> Vec<(FlowId, FlowId)> {
        let mut out = Vec::new();
        for (&v, ns) in &self.adj {
            for &n in ns.iter().filter(|&&n| n > v) {
                out.push((v, n));
            }
        }
        out
    }

    pub fn remove_vertex(&mut self, v: FlowId) -> Result<()> {
        let neighbors = self.adj.remove(&v).ok_or(Error::MissingVertex(v))?;
        for n in neighbors {
            if let Some(set) = self.adj.get_mut(&n) {
                set.remove(&v);
            }
        }
        Ok(())
    }

    /// Remove `v` and all its neighbors; remaining degrees shrink
    /// accordingly. Returns the removed vertices.
    pub fn remove_closed_neighborhood(&mut self, v: FlowId) -> Result<Vec<FlowId>> {
        let neighbors: Vec<FlowId> = self
            .adj
            .get(&v)
            .ok_or(Error::MissingVertex(v))?
            .iter()
            .copied()
            .collect();
        let mut removed = vec![v];
        self.remove_vertex(v)?;
        for n in neighbors {
            self.remove_vertex(n)?;
            removed.push(n);
        }
        Ok(removed)
    }
}

/// Contention test between two links: shared node, or cross interference
/// above `sigma` in either direction.
pub fn in_contention(
    model: &LinkModel<'_>,
    a: DirectedLink,
    b: DirectedLink,
    sigma: f64,
) -> Result<bool> {
    if a.shares_node(&b) {
        return Ok(true);
    }
    let ab = model.interference_power(a, b)?;
    let ba = model.interference_power(b, a)?;
    Ok(ab.max(ba) > sigma)
}

/// Build the graph over `hops`, one `(flow, hop index)` vertex per entry,
/// using the precomputed link budget.
pub fn build_graph(budget: &LinkBudget, hops: &[(FlowId, usize)], sigma: f64) -> ContentionGraph {
    let mut graph = ContentionGraph::from_edges(hops.iter().map(|&(f, _)| f), &[]);
    for (i, &a) in hops.iter().enumerate() {
        for &b in hops.iter().skip(i + 1) {
            let contend = budget.links_share_node(a, b)
                || budget
                    .interference_between(a, b)
                    .max(budget.interference_between(b, a))
                    > sigma;
            if contend {
                graph.adj.get_mut(&a.0).unwrap().insert(b.0);
                graph.adj.get_mut(&b.0).unwrap().insert(a.0);
            }
        }
    }
    graph
}
