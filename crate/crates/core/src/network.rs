//! Superport networks, circuits, and their file formats.
//!
//! Internally vertices are `0..n` in canonical order: boundary vertices first,
//! grouped by superport in the order the superports are listed, ascending by
//! original label inside a superport (so the root, the largest member, comes
//! last), then interior vertices ascending by original label. Every file,
//! report, and CLI output uses 1-based labels.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::Range;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{format_rational, rational_serde, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("malformed input at {path}: {message}")]
    Parse { path: String, message: String },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("loop edge at vertex {0}")]
    LoopEdge(u64),
    #[error("multiple edges between {0} and {1}")]
    MultiEdge(u64, u64),
    #[error("edge {0}-{1} has non-positive conductance")]
    NonPositiveConductance(u64, u64),
    #[error("vertex {0} belongs to more than one superport")]
    OverlappingSuperports(u64),
    #[error("superport #{0} is empty")]
    EmptySuperport(usize),
    #[error("at least one superport is required")]
    NoSuperports,
    #[error("vertex labels must be positive")]
    ZeroLabel,
    #[error("declared {declared} vertices but found {found} distinct labels")]
    VertexCountMismatch { declared: usize, found: usize },
    #[error("bad voltage differences: {0}")]
    Deltas(String),
}

/// An edge `u < v` with its conductance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub conductance: Rational,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// A connected, simple, positively weighted graph with canonically numbered
/// superports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperportNetwork {
    n: usize,
    edges: Vec<Edge>,
    superports: Vec<Range<usize>>,
    superport_of: Vec<Option<usize>>,
}

impl SuperportNetwork {
    /// Builds a network that is already in canonical form: superport `k`
    /// occupies the next `sizes[k]` vertices. Edges are given 0-based.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, Rational)>,
        sizes: &[usize],
    ) -> Result<Self, NetworkError> {
        if sizes.is_empty() {
            return Err(NetworkError::NoSuperports);
        }
        if let Some(k) = sizes.iter().position(|&s| s == 0) {
            return Err(NetworkError::EmptySuperport(k));
        }
        let m: usize = sizes.iter().sum();
        if m > n {
            return Err(NetworkError::VertexCountMismatch {
                declared: n,
                found: m,
            });
        }
        let mut superports = Vec::with_capacity(sizes.len());
        let mut start = 0;
        for &s in sizes {
            superports.push(start..start + s);
            start += s;
        }
        let mut list = Vec::new();
        let mut seen = BTreeSet::new();
        for (a, b, c) in edges {
            let label = |x: usize| x as u64 + 1;
            if a == b {
                return Err(NetworkError::LoopEdge(label(a)));
            }
            if a >= n || b >= n {
                return Err(NetworkError::VertexCountMismatch {
                    declared: n,
                    found: a.max(b) + 1,
                });
            }
            if !c.is_positive() {
                return Err(NetworkError::NonPositiveConductance(label(a), label(b)));
            }
            let (u, v) = (a.min(b), a.max(b));
            if !seen.insert((u, v)) {
                return Err(NetworkError::MultiEdge(label(u), label(v)));
            }
            list.push(Edge {
                u,
                v,
                conductance: c,
            });
        }
        list.sort_by_key(|e| (e.u, e.v));
        let mut superport_of = vec![None; n];
        for (k, r) in superports.iter().enumerate() {
            for v in r.clone() {
                superport_of[v] = Some(k);
            }
        }
        let net = SuperportNetwork {
            n,
            edges: list,
            superports,
            superport_of,
        };
        if !net.is_connected() {
            return Err(NetworkError::Disconnected);
        }
        Ok(net)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of boundary vertices.
    pub fn m(&self) -> usize {
        self.superports.last().map_or(0, |r| r.end)
    }

    /// Number of superports.
    pub fn p(&self) -> usize {
        self.superports.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn superports(&self) -> &[Range<usize>] {
        &self.superports
    }

    pub fn superport_sizes(&self) -> Vec<usize> {
        self.superports.iter().map(|r| r.len()).collect()
    }

    pub fn superport_of(&self, v: usize) -> Option<usize> {
        self.superport_of[v]
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        v < self.m()
    }

    /// Root of the superport containing `v`; `None` for interior vertices.
    pub fn root(&self, v: usize) -> Option<usize> {
        self.superport_of[v].map(|k| self.superports[k].end - 1)
    }

    pub fn is_root(&self, v: usize) -> bool {
        self.root(v) == Some(v)
    }

    pub fn roots(&self) -> Vec<usize> {
        self.superports.iter().map(|r| r.end - 1).collect()
    }

    /// Non-root boundary vertices in increasing order.
    pub fn non_roots(&self) -> Vec<usize> {
        (0..self.m()).filter(|&v| !self.is_root(v)).collect()
    }

    pub fn interior(&self) -> Range<usize> {
        self.m()..self.n
    }

    pub fn conductance(&self, a: usize, b: usize) -> Option<&Rational> {
        let (u, v) = (a.min(b), a.max(b));
        self.edges
            .binary_search_by_key(&(u, v), |e| (e.u, e.v))
            .ok()
            .map(|i| &self.edges[i].conductance)
    }

    /// Same graph, conductances, and boundary with every superport merged
    /// into one: the associated electrical network.
    pub fn unify_superports(&self) -> SuperportNetwork {
        let mut out = self.clone();
        let m = self.m();
        out.superports = vec![0..m];
        for v in 0..m {
            out.superport_of[v] = Some(0);
        }
        out
    }

    /// Replaces the superport partition of the boundary prefix. The sizes must
    /// sum to at most `n`.
    pub fn with_superport_sizes(&self, sizes: &[usize]) -> Result<SuperportNetwork, NetworkError> {
        SuperportNetwork::new(
            self.n,
            self.edges.iter().map(|e| (e.u, e.v, e.conductance.clone())),
            sizes,
        )
    }

    fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == self.n
    }

    /// Canonical file form of this network.
    pub fn to_file(&self) -> NetworkFile {
        NetworkFile {
            vertices: self.n,
            edges: self
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    u: e.u as u64 + 1,
                    v: e.v as u64 + 1,
                    c: e.conductance.clone(),
                })
                .collect(),
            superports: self
                .superports
                .iter()
                .map(|r| r.clone().map(|v| v as u64 + 1).collect())
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        to_pretty_json(&self.to_file())
    }

    /// Parses, validates, and canonicalizes a network file.
    pub fn from_json(text: &str, merge_parallel: bool) -> Result<(Self, Relabeling), NetworkError> {
        let file: NetworkFile = parse_json(text)?;
        file.canonicalize(merge_parallel)
    }
}

/// Old-label to canonical-vertex correspondence produced by canonicalization.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relabeling {
    /// `(original label, canonical 1-based label)` sorted by original label.
    pub mapping: Vec<(u64, usize)>,
}

impl Relabeling {
    /// Canonical 0-based vertex of an original label.
    pub fn to_canonical(&self, original: u64) -> Option<usize> {
        self.mapping
            .binary_search_by_key(&original, |&(o, _)| o)
            .ok()
            .map(|i| self.mapping[i].1 - 1)
    }

    pub fn to_original(&self, vertex: usize) -> Option<u64> {
        self.mapping
            .iter()
            .find(|&&(_, c)| c == vertex + 1)
            .map(|&(o, _)| o)
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().all(|&(o, c)| o == c as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub u: u64,
    pub v: u64,
    #[serde(with = "rational_serde")]
    pub c: Rational,
}

/// `{ "vertices": n, "edges": [{"u", "v", "c"}], "superports": [[...]] }`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub vertices: usize,
    pub edges: Vec<EdgeRecord>,
    pub superports: Vec<Vec<u64>>,
}

impl NetworkFile {
    /// Validates the description and relabels it canonically.
    pub fn canonicalize(
        &self,
        merge_parallel: bool,
    ) -> Result<(SuperportNetwork, Relabeling), NetworkError> {
        if self.superports.is_empty() {
            return Err(NetworkError::NoSuperports);
        }
        let mut labels = BTreeSet::new();
        let mut owner: HashMap<u64, usize> = HashMap::new();
        for (k, sp) in self.superports.iter().enumerate() {
            if sp.is_empty() {
                return Err(NetworkError::EmptySuperport(k));
            }
            for &x in sp {
                if x == 0 {
                    return Err(NetworkError::ZeroLabel);
                }
                if owner.insert(x, k).is_some() {
                    return Err(NetworkError::OverlappingSuperports(x));
                }
                labels.insert(x);
            }
        }
        let mut weights: BTreeMap<(u64, u64), Rational> = BTreeMap::new();
        for e in &self.edges {
            if e.u == 0 || e.v == 0 {
                return Err(NetworkError::ZeroLabel);
            }
            if e.u == e.v {
                return Err(NetworkError::LoopEdge(e.u));
            }
            if !e.c.is_positive() {
                return Err(NetworkError::NonPositiveConductance(e.u, e.v));
            }
            labels.insert(e.u);
            labels.insert(e.v);
            let key = (e.u.min(e.v), e.u.max(e.v));
            match weights.get_mut(&key) {
                Some(w) if merge_parallel => *w += &e.c,
                Some(_) => return Err(NetworkError::MultiEdge(key.0, key.1)),
                None => {
                    weights.insert(key, e.c.clone());
                }
            }
        }
        if labels.len() != self.vertices {
            return Err(NetworkError::VertexCountMismatch {
                declared: self.vertices,
                found: labels.len(),
            });
        }

        let mut order: Vec<u64> = Vec::with_capacity(labels.len());
        for sp in &self.superports {
            let mut members = sp.clone();
            members.sort_unstable();
            order.extend(members);
        }
        order.extend(labels.iter().filter(|x| !owner.contains_key(x)));
        let index: HashMap<u64, usize> = order.iter().enumerate().map(|(i, &x)| (x, i)).collect();

        let sizes: Vec<usize> = self.superports.iter().map(Vec::len).collect();
        let net = SuperportNetwork::new(
            order.len(),
            weights
                .into_iter()
                .map(|((a, b), c)| (index[&a], index[&b], c)),
            &sizes,
        )?;
        let mut mapping: Vec<(u64, usize)> = index.into_iter().map(|(o, c)| (o, c + 1)).collect();
        mapping.sort_unstable();
        Ok((net, Relabeling { mapping }))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaRecord {
    pub vertex: u64,
    #[serde(with = "rational_serde")]
    pub du: Rational,
}

/// A network file plus `"deltas": [{"vertex": k, "du": "p/q"}]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    pub vertices: usize,
    pub edges: Vec<EdgeRecord>,
    pub superports: Vec<Vec<u64>>,
    pub deltas: Vec<DeltaRecord>,
}

/// A network with a prescribed voltage difference `U_k - U_root(k)` for every
/// non-root boundary vertex `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    network: SuperportNetwork,
    /// Aligned with `network.non_roots()`.
    deltas: Vec<Rational>,
}

impl Circuit {
    pub fn new(network: SuperportNetwork, deltas: Vec<Rational>) -> Result<Self, NetworkError> {
        let expected = network.m() - network.p();
        if deltas.len() != expected {
            return Err(NetworkError::Deltas(format!(
                "expected {expected} voltage differences, got {}",
                deltas.len()
            )));
        }
        Ok(Circuit { network, deltas })
    }

    /// From a map keyed by canonical 0-based non-root vertex.
    pub fn from_map(
        network: SuperportNetwork,
        map: &BTreeMap<usize, Rational>,
    ) -> Result<Self, NetworkError> {
        let non_roots = network.non_roots();
        if let Some(v) = map.keys().find(|v| !non_roots.contains(v)) {
            return Err(NetworkError::Deltas(format!(
                "vertex {} is not a non-root boundary vertex",
                v + 1
            )));
        }
        let deltas = non_roots
            .iter()
            .map(|v| {
                map.get(v).cloned().ok_or_else(|| {
                    NetworkError::Deltas(format!("missing difference for vertex {}", v + 1))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Circuit::new(network, deltas)
    }

    /// Unit difference at non-root `i`, zero elsewhere.
    pub fn unit(network: SuperportNetwork, i: usize) -> Result<Self, NetworkError> {
        let non_roots = network.non_roots();
        let pos = non_roots.iter().position(|&v| v == i).ok_or_else(|| {
            NetworkError::Deltas(format!(
                "vertex {} is not a non-root boundary vertex",
                i + 1
            ))
        })?;
        let mut deltas = vec![Rational::zero(); non_roots.len()];
        deltas[pos] = Rational::from_integer(1.into());
        Circuit::new(network, deltas)
    }

    pub fn network(&self) -> &SuperportNetwork {
        &self.network
    }

    pub fn deltas(&self) -> &[Rational] {
        &self.deltas
    }

    /// `U_k - U_root(k)` for a non-root `k`, zero for roots.
    pub fn delta_of(&self, v: usize) -> Rational {
        self.network
            .non_roots()
            .iter()
            .position(|&x| x == v)
            .map(|i| self.deltas[i].clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn to_file(&self) -> CircuitFile {
        let net = self.network.to_file();
        CircuitFile {
            vertices: net.vertices,
            edges: net.edges,
            superports: net.superports,
            deltas: self
                .network
                .non_roots()
                .iter()
                .zip(&self.deltas)
                .map(|(&v, du)| DeltaRecord {
                    vertex: v as u64 + 1,
                    du: du.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        to_pretty_json(&self.to_file())
    }

    pub fn from_json(text: &str, merge_parallel: bool) -> Result<(Self, Relabeling), NetworkError> {
        let file: CircuitFile = parse_json(text)?;
        let (network, relabel) = NetworkFile {
            vertices: file.vertices,
            edges: file.edges,
            superports: file.superports,
        }
        .canonicalize(merge_parallel)?;
        let mut map = BTreeMap::new();
        for d in &file.deltas {
            let v = relabel
                .to_canonical(d.vertex)
                .ok_or_else(|| NetworkError::Deltas(format!("unknown vertex {}", d.vertex)))?;
            if map.insert(v, d.du.clone()).is_some() {
                return Err(NetworkError::Deltas(format!(
                    "vertex {} listed twice",
                    d.vertex
                )));
            }
        }
        Ok((Circuit::from_map(network, &map)?, relabel))
    }
}

/// Voltages and currents of a solved circuit, normalized to `U_m = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub voltages: Vec<Rational>,
    /// `currents[k][l] = I_kl`, antisymmetric.
    pub currents: Vec<Vec<Rational>>,
    /// `I_k = sum_l I_kl` for boundary `k`.
    pub incoming: Vec<Rational>,
}

#[derive(Serialize)]
struct SolutionRepr {
    voltages: Vec<String>,
    currents: Vec<CurrentRecord>,
    incoming: Vec<String>,
}

#[derive(Serialize)]
struct CurrentRecord {
    from: usize,
    to: usize,
    current: String,
}

impl Solution {
    /// JSON with one current record per edge, oriented `u -> v` with `u < v`.
    pub fn to_json(&self, net: &SuperportNetwork) -> serde_json::Value {
        serde_json::to_value(SolutionRepr {
            voltages: self.voltages.iter().map(format_rational).collect(),
            currents: net
                .edges()
                .iter()
                .map(|e| CurrentRecord {
                    from: e.u + 1,
                    to: e.v + 1,
                    current: format_rational(&self.currents[e.u][e.v]),
                })
                .collect(),
            incoming: self.incoming.iter().map(format_rational).collect(),
        })
        .expect("solution serializes")
    }
}

/// A multigraph on equivalence classes of vertices. Classes are numbered by
/// increasing smallest member; every network edge maps to exactly one
/// quotient edge (possibly a loop).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientGraph {
    pub class_of: Vec<usize>,
    pub classes: Vec<Vec<usize>>,
    pub edges: Vec<QuotientEdge>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuotientEdge {
    pub a: usize,
    pub b: usize,
    /// Index into the network's edge list.
    pub origin: usize,
}

impl QuotientGraph {
    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    fn from_class_lists(net: &SuperportNetwork, mut classes: Vec<Vec<usize>>) -> Self {
        for c in &mut classes {
            c.sort_unstable();
        }
        classes.sort_by_key(|c| c[0]);
        let mut class_of = vec![0; net.n()];
        for (id, c) in classes.iter().enumerate() {
            for &v in c {
                class_of[v] = id;
            }
        }
        let edges = net
            .edges()
            .iter()
            .enumerate()
            .map(|(origin, e)| QuotientEdge {
                a: class_of[e.u],
                b: class_of[e.v],
                origin,
            })
            .collect();
        QuotientGraph {
            class_of,
            classes,
            edges,
        }
    }
}

/// Quotient by the `X`-equivalence: boundary vertices outside `X` are
/// identified with the rest of their superport; interior vertices and members
/// of `X` stay single. `X = {}` gives the plain superport equivalence.
pub fn x_equivalence_quotient(net: &SuperportNetwork, x: &[usize]) -> QuotientGraph {
    let in_x = |v: usize| x.contains(&v);
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for r in net.superports() {
        let glued: Vec<usize> = r.clone().filter(|&v| !in_x(v)).collect();
        if !glued.is_empty() {
            classes.push(glued);
        }
        classes.extend(r.clone().filter(|&v| in_x(v)).map(|v| vec![v]));
    }
    classes.extend(net.interior().map(|v| vec![v]));
    QuotientGraph::from_class_lists(net, classes)
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, NetworkError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|err| NetworkError::Parse {
        path: err.path().to_string(),
        message: err.inner().to_string(),
    })
}

/// Pretty JSON with two-space indent and a trailing newline.
pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{int, ratio};

    fn w_file() -> NetworkFile {
        NetworkFile {
            vertices: 5,
            edges: vec![
                EdgeRecord {
                    u: 1,
                    v: 5,
                    c: int(2),
                },
                EdgeRecord {
                    u: 2,
                    v: 5,
                    c: int(3),
                },
                EdgeRecord {
                    u: 2,
                    v: 4,
                    c: int(5),
                },
                EdgeRecord {
                    u: 3,
                    v: 4,
                    c: int(7),
                },
            ],
            superports: vec![vec![1, 2, 3], vec![4, 5]],
        }
    }

    #[test]
    fn canonical_w_network_keeps_labels() {
        let (net, map) = w_file().canonicalize(false).unwrap();
        assert!(map.is_identity());
        assert_eq!((net.n(), net.m(), net.p()), (5, 5, 2));
        assert_eq!(net.roots(), vec![2, 4]);
        assert_eq!(net.non_roots(), vec![0, 1, 3]);
        assert_eq!(net.conductance(4, 0), Some(&int(2)));
    }

    #[test]
    fn superport_order_drives_relabeling() {
        let mut file = w_file();
        file.superports = vec![vec![4, 5], vec![1, 2, 3]];
        let (net, map) = file.canonicalize(false).unwrap();
        assert_eq!(map.mapping, vec![(1, 3), (2, 4), (3, 5), (4, 1), (5, 2)]);
        assert_eq!(net.superport_sizes(), vec![2, 3]);
        // edge 1-5 becomes 3-2
        assert_eq!(net.conductance(2, 1), Some(&int(2)));
    }

    #[test]
    fn canonicalization_is_idempotent() {
        let mut file = w_file();
        file.superports = vec![vec![5, 4], vec![3, 1, 2]];
        let (net, _) = file.canonicalize(false).unwrap();
        let (again, map) = net.to_file().canonicalize(false).unwrap();
        assert!(map.is_identity());
        assert_eq!(again, net);
    }

    #[test]
    fn interior_vertices_follow_boundary() {
        let file = NetworkFile {
            vertices: 4,
            edges: vec![
                EdgeRecord {
                    u: 10,
                    v: 3,
                    c: int(1),
                },
                EdgeRecord {
                    u: 3,
                    v: 7,
                    c: int(1),
                },
                EdgeRecord {
                    u: 7,
                    v: 20,
                    c: int(1),
                },
            ],
            superports: vec![vec![20, 10]],
        };
        let (net, map) = file.canonicalize(false).unwrap();
        assert_eq!(map.mapping, vec![(3, 3), (7, 4), (10, 1), (20, 2)]);
        assert_eq!(net.interior(), 2..4);
        assert_eq!(map.to_canonical(7), Some(3));
        assert_eq!(map.to_original(1), Some(20));
    }

    #[test]
    fn validation_errors() {
        let mut zero = w_file();
        zero.edges[0].c = int(0);
        assert_eq!(
            zero.canonicalize(false),
            Err(NetworkError::NonPositiveConductance(1, 5))
        );

        let mut overlap = w_file();
        overlap.superports = vec![vec![1, 2], vec![2, 3]];
        assert_eq!(
            overlap.canonicalize(false),
            Err(NetworkError::OverlappingSuperports(2))
        );

        let mut empty = w_file();
        empty.superports.push(vec![]);
        assert_eq!(
            empty.canonicalize(false),
            Err(NetworkError::EmptySuperport(2))
        );

        let mut looped = w_file();
        looped.edges.push(EdgeRecord {
            u: 3,
            v: 3,
            c: int(1),
        });
        assert_eq!(looped.canonicalize(false), Err(NetworkError::LoopEdge(3)));

        let mut split = w_file();
        split.edges.remove(1);
        assert_eq!(split.canonicalize(false), Err(NetworkError::Disconnected));

        let mut none = w_file();
        none.superports.clear();
        assert_eq!(none.canonicalize(false), Err(NetworkError::NoSuperports));
    }

    #[test]
    fn parallel_edges_rejected_or_merged() {
        let mut file = w_file();
        file.edges.push(EdgeRecord {
            u: 5,
            v: 1,
            c: ratio(1, 2),
        });
        assert_eq!(file.canonicalize(false), Err(NetworkError::MultiEdge(1, 5)));
        let (net, _) = file.canonicalize(true).unwrap();
        assert_eq!(net.conductance(0, 4), Some(&ratio(5, 2)));
    }

    #[test]
    fn unify_keeps_graph_and_boundary() {
        let (net, _) = w_file().canonicalize(false).unwrap();
        let unified = net.unify_superports();
        assert_eq!(unified.p(), 1);
        assert_eq!(unified.m(), net.m());
        assert_eq!(unified.edges(), net.edges());
        assert_eq!(unified.unify_superports(), unified);
    }

    #[test]
    fn quotient_class_counts() {
        // square with superports {1,2}, {3,4}
        let net = SuperportNetwork::new(
            4,
            [
                (0, 2, int(1)),
                (0, 1, int(1)),
                (1, 3, int(1)),
                (2, 3, int(1)),
            ],
            &[2, 2],
        )
        .unwrap();
        let q = x_equivalence_quotient(&net, &[]);
        assert_eq!(q.classes, vec![vec![0, 1], vec![2, 3]]);
        let q = x_equivalence_quotient(&net, &[0]);
        assert_eq!(q.classes, vec![vec![0], vec![1], vec![2, 3]]);
        let q = x_equivalence_quotient(&net, &[0, 1, 2, 3]);
        assert_eq!(q.num_classes(), 4);
        // loop edges appear as loops
        assert!(q.edges.iter().all(|e| e.a != e.b));
        let q = x_equivalence_quotient(&net, &[]);
        assert_eq!(q.edges.iter().filter(|e| e.a == e.b).count(), 2);
    }

    #[test]
    fn parse_reports_field_path() {
        let text =
            r#"{"vertices": 2, "edges": [{"u": 1, "v": 2, "c": "x"}], "superports": [[1, 2]]}"#;
        match SuperportNetwork::from_json(text, false) {
            Err(NetworkError::Parse { path, .. }) => assert_eq!(path, "edges[0].c"),
            other => panic!("unexpected {other:?}"),
        }
        let text =
            r#"{"vertices": 2, "edges": [{"u": 1, "v": 2, "c": "3/2"}], "superports": [[1, 2]]}"#;
        let (net, _) = SuperportNetwork::from_json(text, false).unwrap();
        assert_eq!(net.edges()[0].conductance, ratio(3, 2));
    }

    #[test]
    fn circuit_requires_one_delta_per_non_root() {
        let (net, _) = w_file().canonicalize(false).unwrap();
        assert!(Circuit::new(net.clone(), vec![int(1)]).is_err());
        let mut map = BTreeMap::new();
        map.insert(2, int(1));
        assert!(Circuit::from_map(net.clone(), &map).is_err());
        let c = Circuit::unit(net, 1).unwrap();
        assert_eq!(c.deltas(), &[int(0), int(1), int(0)]);
        assert_eq!(c.delta_of(1), int(1));
        assert_eq!(c.delta_of(2), int(0));
    }
}
