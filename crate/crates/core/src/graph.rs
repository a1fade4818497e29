//! Connected components of sampled networks and of their believer subnetworks.

use serde::{Deserialize, Serialize};

use crate::model::ReceiverType;
use crate::netgen::NetworkInstance;

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[x as usize] != root {
            let next = self.parent[x as usize];
            self.parent[x as usize] = root;
            x = next;
        }
        root
    }

    fn union(&mut self, a: u32, b: u32) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
    }
}

/// Component labels ranked by size (descending), ties to the smallest member id.
/// Label 0 is the largest component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentDecomposition {
    /// Per node; `None` for nodes outside the decomposed subgraph.
    pub component_id: Vec<Option<u32>>,
    pub sizes: Vec<usize>,
}

impl ComponentDecomposition {
    pub fn giant_size(&self) -> usize {
        self.sizes.first().copied().unwrap_or(0)
    }

    pub fn in_giant(&self, i: usize) -> bool {
        self.component_id[i] == Some(0)
    }

    pub fn component_size(&self, i: usize) -> Option<usize> {
        self.component_id[i].map(|c| self.sizes[c as usize])
    }
}

fn decompose(net: &NetworkInstance, include: impl Fn(usize) -> bool) -> ComponentDecomposition {
    let n = net.n();
    let mut uf = UnionFind::new(n);
    for u in 0..n {
        if !include(u) {
            continue;
        }
        for &v in net.neighbors(u) {
            if (v as usize) > u && include(v as usize) {
                uf.union(u as u32, v);
            }
        }
    }
    // Scanning ids upward makes the first member seen the smallest one.
    let mut root_slot = vec![u32::MAX; n];
    let mut comps: Vec<(usize, u32)> = Vec::new();
    let mut root_of = vec![u32::MAX; n];
    for i in 0..n {
        if !include(i) {
            continue;
        }
        let r = uf.find(i as u32);
        root_of[i] = r;
        if root_slot[r as usize] == u32::MAX {
            root_slot[r as usize] = comps.len() as u32;
            comps.push((uf.size[r as usize] as usize, i as u32));
        }
    }
    let mut order: Vec<usize> = (0..comps.len()).collect();
    order.sort_by(|&a, &b| comps[b].0.cmp(&comps[a].0).then(comps[a].1.cmp(&comps[b].1)));
    let mut rank = vec![0u32; comps.len()];
    for (r, &slot) in order.iter().enumerate() {
        rank[slot] = r as u32;
    }
    let component_id = (0..n)
        .map(|i| {
            (root_of[i] != u32::MAX).then(|| rank[root_slot[root_of[i] as usize] as usize])
        })
        .collect();
    ComponentDecomposition {
        component_id,
        sizes: order.iter().map(|&s| comps[s].0).collect(),
    }
}

pub fn components(net: &NetworkInstance) -> ComponentDecomposition {
    decompose(net, |_| true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BelieverDecomposition {
    /// Components of the subgraph induced by believers.
    pub components: ComponentDecomposition,
    /// Nodes (either type) with at least one neighbour in the believer giant.
    pub giant_neighbor: Vec<bool>,
}

impl BelieverDecomposition {
    pub fn giant_size(&self) -> usize {
        self.components.giant_size()
    }

    pub fn in_giant(&self, i: usize) -> bool {
        self.components.in_giant(i)
    }
}

pub fn believer_components(net: &NetworkInstance) -> BelieverDecomposition {
    let components = decompose(net, |i| net.node_type[i] == ReceiverType::H);
    let giant_neighbor = (0..net.n())
        .map(|i| {
            net.neighbors(i)
                .iter()
                .any(|&j| components.in_giant(j as usize))
        })
        .collect();
    BelieverDecomposition {
        components,
        giant_neighbor,
    }
}
