//! Per-node partitions of outgoing arcs.

use std::collections::BTreeMap;
use std::fmt::Write;

use thiserror::Error;

use crate::instance::{ArcId, Instance, NodeId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("instance carries no hub/region labels")]
    NoRegions,
    #[error("parts at node {0} do not cover its outgoing arcs exactly")]
    NotAPartition(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PartitionKind {
    #[default]
    Finest,
    HubSpoke,
    Trivial,
    Singleton,
}

impl PartitionKind {
    pub fn name(self) -> &'static str {
        match self {
            PartitionKind::Finest => "finest",
            PartitionKind::HubSpoke => "hubspoke",
            PartitionKind::Trivial => "trivial",
            PartitionKind::Singleton => "singleton",
        }
    }

    pub fn parse(s: &str) -> Option<PartitionKind> {
        match s {
            "finest" => Some(PartitionKind::Finest),
            "hubspoke" | "hub-spoke" => Some(PartitionKind::HubSpoke),
            "trivial" => Some(PartitionKind::Trivial),
            "singleton" => Some(PartitionKind::Singleton),
            _ => None,
        }
    }
}

/// `parts[v]` lists the parts at `v`, each sorted, ordered by smallest arc.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArcPartition {
    parts: Vec<Vec<Vec<ArcId>>>,
    part_of: Vec<usize>,
    /// Nodes without incoming arcs that were exempted from merging.
    relaxed: Vec<bool>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut x = x;
        while self.0[x] != r {
            let next = self.0[x];
            self.0[x] = r;
            x = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

impl ArcPartition {
    /// Builds a partition from explicit parts, normalising their order.
    pub fn from_parts(inst: &Instance, mut parts: Vec<Vec<Vec<ArcId>>>) -> Result<ArcPartition, PartitionError> {
        let out = inst.out_arcs();
        let mut part_of = vec![usize::MAX; inst.arcs.len()];
        for (v, node_parts) in parts.iter_mut().enumerate() {
            node_parts.retain(|p| !p.is_empty());
            for p in node_parts.iter_mut() {
                p.sort_unstable();
            }
            node_parts.sort();
            let mut seen: Vec<ArcId> = node_parts.iter().flatten().copied().collect();
            seen.sort_unstable();
            if seen != out[v] {
                return Err(PartitionError::NotAPartition(v));
            }
            for (i, p) in node_parts.iter().enumerate() {
                for &a in p {
                    part_of[a] = i;
                }
            }
        }
        Ok(ArcPartition {
            parts,
            part_of,
            relaxed: vec![false; inst.nodes],
        })
    }

    /// Coarsest merge forced by the commodities: starting from singletons,
    /// all arcs a commodity may use out of a node end up in one part. With
    /// `relax_sourceless`, nodes without incoming arcs are left as singletons.
    pub fn finest(inst: &Instance, relax_sourceless: bool) -> ArcPartition {
        let mut uf = UnionFind((0..inst.arcs.len()).collect());
        let inc = inst.in_arcs();
        let exempt: Vec<bool> = (0..inst.nodes).map(|v| relax_sourceless && inc[v].is_empty()).collect();
        for k in 0..inst.commodities.len() {
            let mut first: BTreeMap<NodeId, ArcId> = BTreeMap::new();
            for a in inst.commodity_arcs(k) {
                let v = inst.arcs[a].tail;
                if exempt[v] {
                    continue;
                }
                match first.get(&v) {
                    Some(&b) => uf.union(a, b),
                    None => {
                        first.insert(v, a);
                    }
                }
            }
        }
        let mut parts = vec![Vec::new(); inst.nodes];
        for (v, arcs) in inst.out_arcs().into_iter().enumerate() {
            let mut groups: BTreeMap<usize, Vec<ArcId>> = BTreeMap::new();
            for a in arcs {
                groups.entry(uf.find(a)).or_default().push(a);
            }
            parts[v] = groups.into_values().collect();
        }
        let mut p = ArcPartition::from_parts(inst, parts).expect("union-find groups partition each node");
        p.relaxed = exempt;
        p
    }

    /// Regional and national outgoing arcs split at hubs; one part elsewhere.
    pub fn hub_spoke(inst: &Instance) -> Result<ArcPartition, PartitionError> {
        let regions = inst.regions.as_ref().ok_or(PartitionError::NoRegions)?;
        let mut parts = vec![Vec::new(); inst.nodes];
        for (v, arcs) in inst.out_arcs().into_iter().enumerate() {
            if regions.is_hub(v) {
                let (national, regional): (Vec<ArcId>, Vec<ArcId>) =
                    arcs.into_iter().partition(|&a| regions.is_national(&inst.arcs[a]));
                parts[v] = vec![regional, national];
            } else {
                parts[v] = vec![arcs];
            }
        }
        ArcPartition::from_parts(inst, parts)
    }

    pub fn trivial(inst: &Instance) -> ArcPartition {
        let parts = inst.out_arcs().into_iter().map(|arcs| vec![arcs]).collect();
        ArcPartition::from_parts(inst, parts).expect("whole stars partition")
    }

    pub fn singleton(inst: &Instance) -> ArcPartition {
        let parts = inst
            .out_arcs()
            .into_iter()
            .map(|arcs| arcs.into_iter().map(|a| vec![a]).collect())
            .collect();
        ArcPartition::from_parts(inst, parts).expect("singletons partition")
    }

    pub fn build(inst: &Instance, kind: PartitionKind, relax_sourceless: bool) -> Result<ArcPartition, PartitionError> {
        Ok(match kind {
            PartitionKind::Finest => ArcPartition::finest(inst, relax_sourceless),
            PartitionKind::HubSpoke => ArcPartition::hub_spoke(inst)?,
            PartitionKind::Trivial => ArcPartition::trivial(inst),
            PartitionKind::Singleton => ArcPartition::singleton(inst),
        })
    }

    pub fn parts(&self, v: NodeId) -> &[Vec<ArcId>] {
        &self.parts[v]
    }

    pub fn num_parts(&self, v: NodeId) -> usize {
        self.parts[v].len()
    }

    /// Index of the part at the arc's tail that contains `a`.
    pub fn part_of(&self, a: ArcId) -> usize {
        self.part_of[a]
    }

    pub fn is_relaxed(&self, v: NodeId) -> bool {
        self.relaxed[v]
    }

    /// Every commodity's usable outgoing arcs at every node lie in one part.
    /// Relaxed nodes are exempt.
    pub fn is_valid(&self, inst: &Instance) -> bool {
        self.violations(inst).is_empty()
    }

    /// `(commodity, node)` pairs whose outgoing arcs span several parts.
    pub fn violations(&self, inst: &Instance) -> Vec<(usize, NodeId)> {
        let mut out = Vec::new();
        for k in 0..inst.commodities.len() {
            let mut part_at: BTreeMap<NodeId, usize> = BTreeMap::new();
            let mut bad = std::collections::BTreeSet::new();
            for a in inst.commodity_arcs(k) {
                let v = inst.arcs[a].tail;
                if self.relaxed[v] {
                    continue;
                }
                let p = self.part_of[a];
                if *part_at.entry(v).or_insert(p) != p {
                    bad.insert(v);
                }
            }
            out.extend(bad.into_iter().map(|v| (k, v)));
        }
        out
    }

    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (v, parts) in self.parts.iter().enumerate() {
            let sets: Vec<String> = parts
                .iter()
                .map(|p| format!("{{{}}}", p.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")))
                .collect();
            let _ = writeln!(out, "node {v}: {}", sets.join(" "));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::{arc, commodity};
    use crate::instance::Regions;

    fn inst(nodes: usize, arcs: Vec<(usize, usize)>) -> Instance {
        Instance {
            nodes,
            arcs: arcs.into_iter().map(|(t, h)| arc(t, h, 1)).collect(),
            commodities: vec![],
            horizon: 10,
            regions: None,
            critical_times: None,
        }
    }

    #[test]
    fn single_paths_give_singletons() {
        // a=0 b=1 c=2 d=3; b -> c and b -> d used by different commodities
        let mut i = inst(4, vec![(0, 1), (1, 2), (1, 3)]);
        let mut k0 = commodity(0, 0, 2, 0, 10);
        k0.subgraph = Some(vec![0, 1]);
        let mut k1 = commodity(1, 0, 3, 0, 10);
        k1.subgraph = Some(vec![0, 2]);
        i.commodities = vec![k0, k1];
        let p = ArcPartition::finest(&i, false);
        assert_eq!(p.parts(1), &[vec![1], vec![2]]);
        assert!(p.is_valid(&i));
    }

    #[test]
    fn full_subgraph_forces_trivial() {
        let mut i = inst(3, vec![(0, 1), (0, 2), (1, 2), (2, 0)]);
        i.commodities = vec![commodity(0, 0, 2, 0, 10)];
        assert_eq!(ArcPartition::finest(&i, false), ArcPartition::trivial(&i));
    }

    #[test]
    fn overlapping_commodities_merge_transitively() {
        // b=0 with arcs bc, bd, be
        let mut i = inst(4, vec![(0, 1), (0, 2), (0, 3)]);
        let mut k0 = commodity(0, 0, 1, 0, 10);
        k0.subgraph = Some(vec![0, 1]);
        let mut k1 = commodity(1, 0, 3, 0, 10);
        k1.subgraph = Some(vec![1, 2]);
        i.commodities = vec![k0, k1];
        assert_eq!(ArcPartition::finest(&i, false).parts(0), &[vec![0, 1, 2]]);
    }

    #[test]
    fn finest_cannot_be_split() {
        let mut i = inst(4, vec![(0, 1), (0, 2), (0, 3)]);
        let mut k0 = commodity(0, 0, 1, 0, 10);
        k0.subgraph = Some(vec![0, 1]);
        i.commodities = vec![k0];
        let p = ArcPartition::finest(&i, false);
        assert_eq!(p.parts(0), &[vec![0, 1], vec![2]]);
        let split = ArcPartition::from_parts(&i, vec![vec![vec![0], vec![1], vec![2]], vec![], vec![], vec![]]).unwrap();
        assert!(!split.is_valid(&i));
    }

    #[test]
    fn relaxed_sources_stay_split() {
        let mut i = inst(3, vec![(0, 1), (0, 2), (1, 2)]);
        i.commodities = vec![commodity(0, 0, 2, 0, 10)];
        let p = ArcPartition::finest(&i, true);
        assert_eq!(p.num_parts(0), 2);
        assert!(p.is_relaxed(0));
        assert!(p.is_valid(&i));
        assert!(!ArcPartition::finest(&i, false).is_relaxed(0));
    }

    #[test]
    fn hub_parts_split_regional_and_national() {
        // hubs 0 and 1; node 2 in region 0, node 3 in region 1
        let mut i = inst(5, vec![(0, 2), (0, 4), (0, 1), (1, 0), (2, 0), (1, 3)]);
        i.regions = Some(Regions {
            hubs: vec![0, 1],
            region: vec![0, 1, 0, 1, 0],
        });
        let p = ArcPartition::hub_spoke(&i).unwrap();
        assert_eq!(p.parts(0), &[vec![0, 1], vec![2]]);
        assert_eq!(p.parts(2), &[vec![4]]);
        assert_eq!(ArcPartition::hub_spoke(&inst(2, vec![(0, 1)])), Err(PartitionError::NoRegions));
    }

    #[test]
    fn dump_lists_parts() {
        let i = inst(3, vec![(0, 1), (0, 2)]);
        assert_eq!(ArcPartition::singleton(&i).dump(), "node 0: {0} {1}\nnode 1: \nnode 2: \n");
    }
}
