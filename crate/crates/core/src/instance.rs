//! Flat network, commodities, validation and per-commodity preprocessing.

use std::collections::{BTreeSet, BinaryHeap, VecDeque};
use std::cmp::Reverse;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type NodeId = usize;
pub type ArcId = usize;
pub type Time = u32;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("commodity {0} has no feasible path in its subgraph")]
    InfeasibleCommodity(usize),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("generator gave up: {0}")]
    Generation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

mod decimal {
    //! Costs travel as decimal strings so files round-trip bit for bit.
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let s = String::deserialize(d)?;
        s.trim().parse().map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub tail: NodeId,
    pub head: NodeId,
    pub transit: Time,
    #[serde(with = "decimal")]
    pub fixed_cost: f64,
    pub capacity: u32,
    /// Cost per unit of flow; the same for every commodity.
    #[serde(with = "decimal")]
    pub var_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Commodity {
    pub id: usize,
    pub origin: NodeId,
    pub dest: NodeId,
    #[serde(with = "decimal")]
    pub demand: f64,
    pub release: Time,
    pub deadline: Time,
    /// Arcs the commodity may use; `None` means the whole network.
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "subgraph_arcs")]
    pub subgraph: Option<Vec<ArcId>>,
}

/// Hub-and-spoke structure: `region[v]` is the hub node whose region holds `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regions {
    pub hubs: Vec<NodeId>,
    pub region: Vec<NodeId>,
}

impl Regions {
    pub fn is_hub(&self, v: NodeId) -> bool {
        self.region[v] == v
    }

    /// National arcs join two hubs of different regions.
    pub fn is_national(&self, arc: &Arc) -> bool {
        self.region[arc.tail] != self.region[arc.head]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub nodes: usize,
    pub arcs: Vec<Arc>,
    pub commodities: Vec<Commodity>,
    pub horizon: Time,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regions: Option<Regions>,
    /// Per-node critical times, present after the critical-time transform.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical_times: Option<Vec<Vec<Time>>>,
}

impl Instance {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialises") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Instance, InstanceError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
        Instance::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), InstanceError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn out_arcs(&self) -> Vec<Vec<ArcId>> {
        let mut out = vec![Vec::new(); self.nodes];
        for (a, arc) in self.arcs.iter().enumerate() {
            out[arc.tail].push(a);
        }
        out
    }

    pub fn in_arcs(&self) -> Vec<Vec<ArcId>> {
        let mut inc = vec![Vec::new(); self.nodes];
        for (a, arc) in self.arcs.iter().enumerate() {
            inc[arc.head].push(a);
        }
        inc
    }

    /// Arc set of commodity `k`'s designated network.
    pub fn commodity_arcs(&self, k: usize) -> Vec<ArcId> {
        match &self.commodities[k].subgraph {
            Some(arcs) => arcs.clone(),
            None => (0..self.arcs.len()).collect(),
        }
    }

    /// Node set of commodity `k`'s designated network: endpoints of its arcs.
    pub fn commodity_nodes(&self, k: usize) -> BTreeSet<NodeId> {
        let mut nodes = BTreeSet::new();
        for a in self.commodity_arcs(k) {
            nodes.insert(self.arcs[a].tail);
            nodes.insert(self.arcs[a].head);
        }
        nodes
    }

    /// Shortest transit from `from` to `to` using only `arcs`.
    pub fn shortest_transit(&self, arcs: &[ArcId], from: NodeId, to: NodeId) -> Option<Time> {
        let dist = self.transit_distances(arcs, from, false);
        dist[to]
    }

    /// Dijkstra over `arcs` by transit time, forward from `root` or, with
    /// `reverse`, backward into `root`.
    pub fn transit_distances(&self, arcs: &[ArcId], root: NodeId, reverse: bool) -> Vec<Option<Time>> {
        let mut adj = vec![Vec::new(); self.nodes];
        for &a in arcs {
            let arc = &self.arcs[a];
            if reverse {
                adj[arc.head].push((arc.tail, arc.transit));
            } else {
                adj[arc.tail].push((arc.head, arc.transit));
            }
        }
        let mut dist: Vec<Option<Time>> = vec![None; self.nodes];
        let mut heap = BinaryHeap::new();
        dist[root] = Some(0);
        heap.push(Reverse((0, root)));
        while let Some(Reverse((d, v))) = heap.pop() {
            if dist[v].is_some_and(|best| d > best) {
                continue;
            }
            for &(w, t) in &adj[v] {
                let nd = d + t;
                if dist[w].is_none_or(|best| nd < best) {
                    dist[w] = Some(nd);
                    heap.push(Reverse((nd, w)));
                }
            }
        }
        dist
    }

    pub fn total_demand(&self) -> f64 {
        self.commodities.iter().map(|c| c.demand).sum()
    }

    /// Cost ratio `|K| sum f / (Q sum_k sum_a c)`.
    pub fn cost_ratio(&self) -> f64 {
        let k = self.commodities.len() as f64;
        let sum_f: f64 = self.arcs.iter().map(|a| a.fixed_cost).sum();
        let sum_c: f64 = self.arcs.iter().map(|a| a.var_cost).sum();
        k * sum_f / (self.total_demand() * k * sum_c)
    }

    /// Capacity ratio `|A| Q / sum u`.
    pub fn capacity_ratio(&self) -> f64 {
        let sum_u: f64 = self.arcs.iter().map(|a| a.capacity as f64).sum();
        self.arcs.len() as f64 * self.total_demand() / sum_u
    }

    /// Every violated invariant, each naming the offending entity.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut pairs = BTreeSet::new();
        for (a, arc) in self.arcs.iter().enumerate() {
            if arc.tail >= self.nodes || arc.head >= self.nodes {
                out.push(format!("arc {a} references an unknown node"));
                continue;
            }
            if arc.tail == arc.head {
                out.push(format!("arc {a} is a self-loop"));
            }
            if !pairs.insert((arc.tail, arc.head)) {
                out.push(format!("arc {a} duplicates ({}, {})", arc.tail, arc.head));
            }
            if arc.transit < 1 {
                out.push(format!("arc {a} has transit time below 1"));
            }
            if arc.capacity < 1 {
                out.push(format!("arc {a} has capacity below 1"));
            }
            if !(arc.fixed_cost > 0.0) {
                out.push(format!("arc {a} has non-positive fixed cost"));
            }
            if !(arc.var_cost >= 0.0) {
                out.push(format!("arc {a} has negative variable cost"));
            }
        }
        if !out.is_empty() {
            return out;
        }
        let max_deadline = self.commodities.iter().map(|c| c.deadline).max();
        if let Some(t) = max_deadline {
            if t != self.horizon {
                out.push(format!("horizon {} differs from the latest deadline {t}", self.horizon));
            }
        }
        if let Some(r) = self.commodities.iter().map(|c| c.release).min() {
            if r != 0 {
                out.push(format!("earliest release is {r}, not 0"));
            }
        }
        for (k, c) in self.commodities.iter().enumerate() {
            if c.id != k {
                out.push(format!("commodity at position {k} has id {}", c.id));
            }
            if c.origin >= self.nodes || c.dest >= self.nodes {
                out.push(format!("commodity {k} references an unknown node"));
                continue;
            }
            if c.origin == c.dest {
                out.push(format!("commodity {k} has identical origin and destination"));
            }
            if !(c.demand > 0.0) {
                out.push(format!("commodity {k} has non-positive demand"));
            }
            if c.release >= c.deadline {
                out.push(format!("r_k < l_k fails for {k}"));
            }
            if c.deadline > self.horizon {
                out.push(format!("commodity {k} deadline exceeds the horizon"));
            }
            let arcs = self.commodity_arcs(k);
            if arcs.iter().any(|&a| a >= self.arcs.len()) {
                out.push(format!("commodity {k} subgraph references an unknown arc"));
                continue;
            }
            let nodes = self.commodity_nodes(k);
            if !nodes.contains(&c.origin) || !nodes.contains(&c.dest) {
                out.push(format!("commodity {k} origin or destination is not in its subgraph"));
            }
            match self.shortest_transit(&arcs, c.origin, c.dest) {
                Some(d) if c.release + d <= c.deadline => {}
                _ => out.push(format!("no feasible path for commodity {k}")),
            }
        }
        out
    }

    /// Reduced arc set of commodity `k`: drops arcs leaving the destination,
    /// arcs whose head cannot reach the destination and arcs whose tail is
    /// unreachable from the origin.
    pub fn preprocess_subgraph(&self, k: usize) -> Result<Vec<ArcId>, InstanceError> {
        let c = &self.commodities[k];
        let arcs: Vec<ArcId> = self
            .commodity_arcs(k)
            .into_iter()
            .filter(|&a| self.arcs[a].tail != c.dest)
            .collect();
        let from_origin = self.reachable(&arcs, c.origin, false);
        let to_dest = self.reachable(&arcs, c.dest, true);
        let kept: Vec<ArcId> = arcs
            .into_iter()
            .filter(|&a| from_origin[self.arcs[a].tail] && to_dest[self.arcs[a].head])
            .collect();
        match self.shortest_transit(&kept, c.origin, c.dest) {
            Some(d) if c.release + d <= c.deadline => Ok(kept),
            _ => Err(InstanceError::InfeasibleCommodity(k)),
        }
    }

    /// Copy of the instance with every subgraph replaced by its reduction.
    pub fn preprocessed(&self) -> Result<Instance, InstanceError> {
        let mut out = self.clone();
        for k in 0..self.commodities.len() {
            let mut arcs = self.preprocess_subgraph(k)?;
            arcs.sort_unstable();
            out.commodities[k].subgraph = Some(arcs);
        }
        Ok(out)
    }

    fn reachable(&self, arcs: &[ArcId], root: NodeId, reverse: bool) -> Vec<bool> {
        let mut adj = vec![Vec::new(); self.nodes];
        for &a in arcs {
            let arc = &self.arcs[a];
            if reverse {
                adj[arc.head].push(arc.tail);
            } else {
                adj[arc.tail].push(arc.head);
            }
        }
        let mut seen = vec![false; self.nodes];
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }
}
