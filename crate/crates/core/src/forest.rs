//! Spanning forests and the combinatorial structures built on them: validity,
//! signs, grouped weights, XYZW partitions, the main cycle, and the
//! sign-reversing involution.

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg::Rational;
use crate::network::{x_equivalence_quotient, QuotientGraph, SuperportNetwork};

pub const DEFAULT_CAP: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ForestError {
    #[error("network has {edges} edges, above the enumeration cap of {cap}")]
    CapExceeded { edges: usize, cap: usize },
    #[error("edge set contains a cycle")]
    NotAForest,
    #[error("edge index {0} out of range")]
    BadEdge(usize),
    #[error("forest is valid, the involution is undefined")]
    ForestIsValid,
    #[error("forest has no cycle in the quotient")]
    NoCycle,
    #[error("partition violates the cycle lemma: {0}")]
    CycleLemma(String),
}

/// How enumeration work is scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// An acyclic edge subset together with the components it induces on all
/// vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Forest {
    edges: Vec<usize>,
    /// Smallest vertex of each vertex's component.
    component: Vec<usize>,
    components: usize,
}

impl Forest {
    pub fn new(net: &SuperportNetwork, mut edges: Vec<usize>) -> Result<Self, ForestError> {
        edges.sort_unstable();
        edges.dedup();
        let mut uf = UnionFind::new(net.n());
        for &e in &edges {
            let edge = net.edges().get(e).ok_or(ForestError::BadEdge(e))?;
            if !uf.union(edge.u, edge.v) {
                return Err(ForestError::NotAForest);
            }
        }
        Ok(Forest::from_union_find(edges, &mut uf))
    }

    fn from_union_find(edges: Vec<usize>, uf: &mut UnionFind) -> Self {
        let n = uf.parent.len();
        let mut smallest = vec![usize::MAX; n];
        let mut component = vec![0; n];
        for v in 0..n {
            let r = uf.find(v);
            if smallest[r] == usize::MAX {
                smallest[r] = v;
            }
            component[v] = smallest[r];
        }
        let components = n - edges.len();
        Forest {
            edges,
            component,
            components,
        }
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn num_components(&self) -> usize {
        self.components
    }

    /// Representative (smallest vertex) of the component containing `v`.
    pub fn component_of(&self, v: usize) -> usize {
        self.component[v]
    }

    pub fn same_component(&self, a: usize, b: usize) -> bool {
        self.component[a] == self.component[b]
    }

    /// Components as sorted vertex lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (v, &c) in self.component.iter().enumerate() {
            if c == v {
                out.push(vec![v]);
            } else {
                let slot = out
                    .iter_mut()
                    .find(|g| g[0] == c)
                    .expect("representative seen first");
                slot.push(v);
            }
        }
        out
    }

    /// Product of edge conductances; 1 for the empty forest.
    pub fn weight(&self, net: &SuperportNetwork) -> Rational {
        self.edges
            .iter()
            .fold(Rational::one(), |acc, &e| acc * &net.edges()[e].conductance)
    }
}

impl fmt::Display for Forest {
    /// 1-based edge indices, space separated; `-` for the empty forest.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.edges.is_empty() {
            return write!(f, "-");
        }
        let parts: Vec<String> = self.edges.iter().map(|e| (e + 1).to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Union-find with union by size and an undo log, no path compression.
#[derive(Clone, Debug)]
struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    log: Vec<(usize, usize)>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
            log: Vec::new(),
        }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.log.push((ra, rb));
        true
    }

    fn undo(&mut self) {
        let (ra, rb) = self.log.pop().expect("undo without union");
        self.parent[rb] = rb;
        self.size[ra] -= self.size[rb];
    }
}

/// Enumerates every acyclic edge subset exactly once, in lexicographic order
/// of the sorted edge-index lists.
#[derive(Clone, Copy, Debug)]
pub struct ForestEnumerator<'a> {
    net: &'a SuperportNetwork,
    cap: usize,
    execution: Execution,
}

impl<'a> ForestEnumerator<'a> {
    pub fn new(net: &'a SuperportNetwork) -> Self {
        ForestEnumerator {
            net,
            cap: DEFAULT_CAP,
            execution: Execution::default(),
        }
    }

    pub fn cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    fn check_cap(&self) -> Result<(), ForestError> {
        let edges = self.net.edges().len();
        if edges > self.cap {
            Err(ForestError::CapExceeded {
                edges,
                cap: self.cap,
            })
        } else {
            Ok(())
        }
    }

    /// Visits forests sequentially in lexicographic order.
    pub fn for_each(&self, mut visit: impl FnMut(&Forest)) -> Result<(), ForestError> {
        self.check_cap()?;
        let mut uf = UnionFind::new(self.net.n());
        let mut chosen = Vec::new();
        visit(&Forest::from_union_find(Vec::new(), &mut uf));
        for first in 0..self.net.edges().len() {
            self.subtree(first, &mut uf, &mut chosen, &mut visit);
        }
        Ok(())
    }

    /// Forests whose smallest edge is `first`, in lexicographic order.
    fn subtree(
        &self,
        first: usize,
        uf: &mut UnionFind,
        chosen: &mut Vec<usize>,
        visit: &mut impl FnMut(&Forest),
    ) {
        let e = &self.net.edges()[first];
        if !uf.union(e.u, e.v) {
            return;
        }
        chosen.push(first);
        visit(&Forest::from_union_find(chosen.clone(), uf));
        for next in first + 1..self.net.edges().len() {
            self.subtree(next, uf, chosen, visit);
        }
        chosen.pop();
        uf.undo();
    }

    /// Maps every forest and folds the results with an associative,
    /// commutative `reduce`. Parallel execution splits the work by smallest
    /// edge index.
    pub fn map_reduce<T, M, R>(
        &self,
        identity: impl Fn() -> T + Sync + Send,
        map: M,
        reduce: R,
    ) -> Result<T, ForestError>
    where
        T: Send,
        M: Fn(&Forest) -> T + Sync + Send,
        R: Fn(T, T) -> T + Sync + Send,
    {
        self.check_cap()?;
        let task = |first: Option<usize>| {
            let mut acc = identity();
            let mut uf = UnionFind::new(self.net.n());
            let mut fold = |f: &Forest| {
                let value = map(f);
                let prev = std::mem::replace(&mut acc, identity());
                acc = reduce(prev, value);
            };
            match first {
                None => fold(&Forest::from_union_find(Vec::new(), &mut uf)),
                Some(e) => self.subtree(e, &mut uf, &mut Vec::new(), &mut fold),
            }
            acc
        };
        let tasks: Vec<Option<usize>> = std::iter::once(None)
            .chain((0..self.net.edges().len()).map(Some))
            .collect();
        match self.execution {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                Ok(tasks.into_par_iter().map(task).reduce(&identity, &reduce))
            }
            _ => Ok(tasks.into_iter().map(task).fold(identity(), &reduce)),
        }
    }

    /// All forests passing `keep`, in lexicographic order.
    pub fn collect_filtered(
        &self,
        keep: impl Fn(&Forest) -> bool + Sync + Send,
    ) -> Result<Vec<Forest>, ForestError> {
        self.map_reduce(
            Vec::new,
            |f| if keep(f) { vec![f.clone()] } else { Vec::new() },
            |mut a, mut b| {
                a.append(&mut b);
                a
            },
        )
    }

    pub fn collect(&self) -> Result<Vec<Forest>, ForestError> {
        self.collect_filtered(|_| true)
    }

    pub fn count(&self, keep: impl Fn(&Forest) -> bool + Sync + Send) -> Result<u64, ForestError> {
        self.map_reduce(|| 0u64, |f| u64::from(keep(f)), |a, b| a + b)
    }

    /// `sum f(F)` over all forests.
    pub fn sum(
        &self,
        f: impl Fn(&Forest) -> Rational + Sync + Send,
    ) -> Result<Rational, ForestError> {
        self.map_reduce(Rational::zero, f, |a, b| a + b)
    }

    /// `sum w(F)` over forests passing `keep`.
    pub fn weight_sum(
        &self,
        keep: impl Fn(&Forest) -> bool + Sync + Send,
    ) -> Result<Rational, ForestError> {
        let net = self.net;
        self.sum(|f| {
            if keep(f) {
                f.weight(net)
            } else {
                Rational::zero()
            }
        })
    }
}

/// True when the image of the forest in `q` is a spanning tree: connected,
/// and no edge closes a cycle or becomes a loop.
pub fn image_is_spanning_tree(net: &SuperportNetwork, q: &QuotientGraph, forest: &Forest) -> bool {
    if forest.edges().len() + 1 != q.num_classes() {
        return false;
    }
    let mut uf = UnionFind::new(q.num_classes());
    forest.edges().iter().all(|&e| {
        let edge = &net.edges()[e];
        uf.union(q.class_of[edge.u], q.class_of[edge.v])
    })
}

/// Component label of every class of `q` under the forest's image.
pub fn image_components(net: &SuperportNetwork, q: &QuotientGraph, forest: &Forest) -> Vec<usize> {
    let mut uf = UnionFind::new(q.num_classes());
    for &e in forest.edges() {
        let edge = &net.edges()[e];
        uf.union(q.class_of[edge.u], q.class_of[edge.v]);
    }
    (0..q.num_classes()).map(|c| uf.find(c)).collect()
}

/// Oriented forest edges along the path from class `from` to class `to` in
/// the forest's image, assumed acyclic.
pub fn image_path(
    net: &SuperportNetwork,
    q: &QuotientGraph,
    forest: &Forest,
    from: usize,
    to: usize,
) -> Option<Vec<CycleStep>> {
    let mut adj: Vec<Vec<CycleStep>> = vec![Vec::new(); q.num_classes()];
    for &e in forest.edges() {
        let edge = &net.edges()[e];
        adj[q.class_of[edge.u]].push(CycleStep {
            edge: e,
            tail: edge.u,
            head: edge.v,
        });
        adj[q.class_of[edge.v]].push(CycleStep {
            edge: e,
            tail: edge.v,
            head: edge.u,
        });
    }
    let mut via: Vec<Option<CycleStep>> = vec![None; q.num_classes()];
    let mut seen = vec![false; q.num_classes()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(c) = stack.pop() {
        for step in &adj[c] {
            let d = q.class_of[step.head];
            if !seen[d] {
                seen[d] = true;
                via[d] = Some(*step);
                stack.push(d);
            }
        }
    }
    if !seen[to] {
        return None;
    }
    let mut path = Vec::new();
    let mut c = to;
    while c != from {
        let step = via[c].expect("reached");
        path.push(step);
        c = q.class_of[step.tail];
    }
    path.reverse();
    Some(path)
}

/// The forest becomes a spanning tree once each superport is collapsed.
pub fn is_valid(net: &SuperportNetwork, forest: &Forest) -> bool {
    image_is_spanning_tree(net, &x_equivalence_quotient(net, &[]), forest)
}

/// The forest becomes a spanning tree in the quotient by the
/// `{i}`-equivalence.
pub fn is_relatively_valid(net: &SuperportNetwork, forest: &Forest, i: usize) -> bool {
    image_is_spanning_tree(net, &x_equivalence_quotient(net, &[i]), forest)
}

/// `+1` if `i = j` or `[i]`, `[j]` lie in different components of the image
/// in the `{i,j}`-quotient, `-1` otherwise.
pub fn forest_sign(net: &SuperportNetwork, forest: &Forest, i: usize, j: usize) -> i32 {
    if i == j {
        return 1;
    }
    forest_sign_in(net, &x_equivalence_quotient(net, &[i, j]), forest, i, j)
}

/// [`forest_sign`] with the `{i,j}`-quotient supplied by the caller.
pub fn forest_sign_in(
    net: &SuperportNetwork,
    q: &QuotientGraph,
    forest: &Forest,
    i: usize,
    j: usize,
) -> i32 {
    if i == j {
        return 1;
    }
    let mut uf = UnionFind::new(q.num_classes());
    for &e in forest.edges() {
        let edge = &net.edges()[e];
        uf.union(q.class_of[edge.u], q.class_of[edge.v]);
    }
    if uf.find(q.class_of[i]) == uf.find(q.class_of[j]) {
        -1
    } else {
        1
    }
}

/// The forest has exactly `groups.len()` components and group `t` lies
/// inside component `t`, distinct groups in distinct components.
pub fn respects_grouping(forest: &Forest, groups: &[Vec<usize>]) -> bool {
    if groups.is_empty() || forest.num_components() != groups.len() {
        return false;
    }
    let mut reps = Vec::with_capacity(groups.len());
    for g in groups {
        let Some(&first) = g.first() else {
            return false;
        };
        let rep = forest.component_of(first);
        if g.iter().any(|&v| forest.component_of(v) != rep) || reps.contains(&rep) {
            return false;
        }
        reps.push(rep);
    }
    true
}

/// `w(x_11 ... | ... | x_k1 ...)`; zero when there are no groups.
pub fn grouped_weight(
    net: &SuperportNetwork,
    groups: &[Vec<usize>],
    cap: usize,
) -> Result<Rational, ForestError> {
    if groups.is_empty() {
        return Ok(Rational::zero());
    }
    ForestEnumerator::new(net)
        .cap(cap)
        .weight_sum(|f| respects_grouping(f, groups))
}

/// A partition of the boundary into four sets, each sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct XyzwPartition {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub z: Vec<usize>,
    pub w: Vec<usize>,
}

impl XyzwPartition {
    fn normalize(mut self) -> Self {
        for s in [&mut self.x, &mut self.y, &mut self.z, &mut self.w] {
            s.sort_unstable();
        }
        self
    }

    fn color(&self, v: usize) -> Option<char> {
        [
            ('X', &self.x),
            ('Y', &self.y),
            ('Z', &self.z),
            ('W', &self.w),
        ]
        .into_iter()
        .find(|(_, s)| s.contains(&v))
        .map(|(c, _)| c)
    }
}

impl fmt::Display for XyzwPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |s: &[usize]| {
            s.iter()
                .map(|v| (v + 1).to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(
            f,
            "X={{{}}} Y={{{}}} Z={{{}}} W={{{}}}",
            show(&self.x),
            show(&self.y),
            show(&self.z),
            show(&self.w)
        )
    }
}

/// Direct check of conditions (1)-(3) for a forest and a partition.
pub fn satisfies_conditions(net: &SuperportNetwork, forest: &Forest, part: &XyzwPartition) -> bool {
    let m = net.m();
    let mut seen = vec![0u8; m];
    for v in part.x.iter().chain(&part.y).chain(&part.z).chain(&part.w) {
        if *v >= m {
            return false;
        }
        seen[*v] += 1;
    }
    if seen.iter().any(|&c| c != 1) {
        return false;
    }
    let count =
        |set: &[usize], pred: &dyn Fn(usize) -> bool| set.iter().filter(|&&v| pred(v)).count();
    let p = net.p();
    let last = net.superports()[p - 1].clone();
    if !last.clone().all(|v| part.w.contains(&v)) {
        return false;
    }
    for r in &net.superports()[..p - 1] {
        let inside = |v: usize| r.contains(&v);
        let (x, y, z) = (
            count(&part.x, &inside),
            count(&part.y, &inside),
            count(&part.z, &inside),
        );
        if !(x == y && x + z == 1) {
            return false;
        }
    }
    for rep in (0..net.n()).filter(|&v| forest.component_of(v) == v) {
        let inside = |v: usize| forest.component_of(v) == rep;
        let (x, y, w) = (
            count(&part.x, &inside),
            count(&part.y, &inside),
            count(&part.w, &inside),
        );
        if !(x == y && x + w == 1) {
            return false;
        }
    }
    true
}

/// All partitions satisfying (1)-(3) for the forest, built superport by
/// superport with per-component pruning.
pub fn partitions_for_forest(net: &SuperportNetwork, forest: &Forest) -> Vec<XyzwPartition> {
    let (m, p) = (net.m(), net.p());
    if forest.num_components() != m - p + 1 {
        return Vec::new();
    }
    // Per component representative: counts of X, Y, W.
    let mut counts = vec![[0u8; 3]; net.n()];
    let mut part = XyzwPartition::default();
    for v in net.superports()[p - 1].clone() {
        let c = &mut counts[forest.component_of(v)];
        c[2] += 1;
        if c[2] > 1 {
            return Vec::new();
        }
        part.w.push(v);
    }
    let mut out = Vec::new();
    extend_partitions(net, forest, 0, &mut counts, &mut part, &mut out);
    out
}

fn extend_partitions(
    net: &SuperportNetwork,
    forest: &Forest,
    k: usize,
    counts: &mut [[u8; 3]],
    part: &mut XyzwPartition,
    out: &mut Vec<XyzwPartition>,
) {
    let ok =
        |c: &[u8; 3]| c[0] <= 1 && c[1] <= 1 && c[2] <= 1 && !(c[2] == 1 && (c[0] > 0 || c[1] > 0));
    if k + 1 == net.p() {
        let complete = (0..net.n())
            .filter(|&v| forest.component_of(v) == v)
            .all(|r| matches!(counts[r], [1, 1, 0] | [0, 0, 1]));
        if complete {
            out.push(part.clone().normalize());
        }
        return;
    }
    let sp: Vec<usize> = net.superports()[k].clone().collect();
    // Choice: one Z vertex, or an (x, y) pair; everything else goes to W.
    let mut choices: Vec<(Option<usize>, Option<usize>, Option<usize>)> = Vec::new();
    for &z in &sp {
        choices.push((None, None, Some(z)));
    }
    for &x in &sp {
        for &y in &sp {
            if x != y {
                choices.push((Some(x), Some(y), None));
            }
        }
    }
    for (x, y, z) in choices {
        let mut touched: Vec<(usize, usize)> = Vec::new();
        let mut feasible = true;
        let (lx, ly, lz, lw) = (part.x.len(), part.y.len(), part.z.len(), part.w.len());
        for &v in &sp {
            let slot = if Some(v) == x {
                part.x.push(v);
                Some(0)
            } else if Some(v) == y {
                part.y.push(v);
                Some(1)
            } else if Some(v) == z {
                part.z.push(v);
                None
            } else {
                part.w.push(v);
                Some(2)
            };
            if let Some(s) = slot {
                let rep = forest.component_of(v);
                counts[rep][s] += 1;
                touched.push((rep, s));
                if !ok(&counts[rep]) {
                    feasible = false;
                }
            }
        }
        if feasible {
            extend_partitions(net, forest, k + 1, counts, part, out);
        }
        for (rep, s) in touched {
            counts[rep][s] -= 1;
        }
        part.x.truncate(lx);
        part.y.truncate(ly);
        part.z.truncate(lz);
        part.w.truncate(lw);
    }
}

/// Valid index pairs `(I, J)`: one row and one column index from each of
/// the first `p - 1` superports, in increasing order.
pub fn valid_index_sets(net: &SuperportNetwork) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = vec![(Vec::new(), Vec::new())];
    for r in &net.superports()[..net.p() - 1] {
        let mut next = Vec::new();
        for (i, j) in &out {
            for a in r.clone() {
                for b in r.clone() {
                    let (mut i2, mut j2): (Vec<usize>, Vec<usize>) = (i.clone(), j.clone());
                    i2.push(a);
                    j2.push(b);
                    next.push((i2, j2));
                }
            }
        }
        out = next;
    }
    out
}

/// Partitions of the valid minors `C_I^J` that the forest contributes to,
/// found by scanning every valid `(I, J)`.
pub fn partitions_by_minor_scan(net: &SuperportNetwork, forest: &Forest) -> Vec<XyzwPartition> {
    let mut out: Vec<XyzwPartition> = valid_index_sets(net)
        .into_iter()
        .map(|(i, j)| {
            let z: Vec<usize> = i.iter().copied().filter(|v| j.contains(v)).collect();
            XyzwPartition {
                x: i.iter().copied().filter(|v| !z.contains(v)).collect(),
                y: j.iter().copied().filter(|v| !z.contains(v)).collect(),
                w: (0..net.m())
                    .filter(|v| !i.contains(v) && !j.contains(v))
                    .collect(),
                z,
            }
            .normalize()
        })
        .filter(|part| satisfies_conditions(net, forest, part))
        .collect();
    out.sort();
    out
}

/// Sign of a permutation given as a map on `0..len`.
pub fn permutation_sign(perm: &[usize]) -> i32 {
    let mut seen = vec![false; perm.len()];
    let mut sign = 1;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = perm[x];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// `(-1)^|X| sgn(sigma . tau)`, where `sigma` pairs each `x` with the `Y`
/// vertex of its component and `tau` pairs each `y` with the `X` vertex of
/// its superport.
pub fn partition_sign(net: &SuperportNetwork, forest: &Forest, part: &XyzwPartition) -> i32 {
    let sigma = |x: usize| {
        *part
            .y
            .iter()
            .find(|&&y| forest.same_component(x, y))
            .expect("condition (3) pairs X with Y")
    };
    let tau = |y: usize| {
        *part
            .x
            .iter()
            .find(|&&x| net.superport_of(x) == net.superport_of(y))
            .expect("condition (2) pairs Y with X")
    };
    let perm: Vec<usize> = part
        .y
        .iter()
        .map(|&y| {
            let image = sigma(tau(y));
            part.y.iter().position(|&v| v == image).expect("image in Y")
        })
        .collect();
    let parity = if part.x.len() % 2 == 0 { 1 } else { -1 };
    parity * permutation_sign(&perm)
}

/// An oriented edge of a quotient cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CycleStep {
    pub edge: usize,
    pub tail: usize,
    pub head: usize,
}

/// The canonical cycle of a non-valid forest in the superport quotient, and
/// its split into forest paths `u_k ... v_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MainCycle {
    /// Quotient classes visited, starting from the smallest.
    pub classes: Vec<usize>,
    pub steps: Vec<CycleStep>,
    /// `(u_k, v_k)` in cycle order.
    pub paths: Vec<(usize, usize)>,
}

impl MainCycle {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn u(&self) -> Vec<usize> {
        self.paths.iter().map(|p| p.0).collect()
    }

    pub fn v(&self) -> Vec<usize> {
        self.paths.iter().map(|p| p.1).collect()
    }
}

type CycleKey = (Vec<usize>, Vec<usize>, usize);

/// Every simple oriented cycle of the forest's image in the superport
/// quotient, loops included, as (classes, steps).
pub fn quotient_cycles(
    net: &SuperportNetwork,
    forest: &Forest,
) -> Vec<(Vec<usize>, Vec<CycleStep>)> {
    let q = x_equivalence_quotient(net, &[]);
    let arcs: Vec<(usize, usize, CycleStep)> = forest
        .edges()
        .iter()
        .flat_map(|&e| {
            let edge = &net.edges()[e];
            [(edge.u, edge.v), (edge.v, edge.u)].map(|(t, h)| {
                (
                    q.class_of[t],
                    q.class_of[h],
                    CycleStep {
                        edge: e,
                        tail: t,
                        head: h,
                    },
                )
            })
        })
        .collect();
    let mut out = Vec::new();
    for s in 0..q.num_classes() {
        for &(a, b, step) in &arcs {
            if a == s && b == s {
                out.push((vec![s], vec![step]));
            }
        }
        let mut classes = vec![s];
        let mut steps = Vec::new();
        walk_cycles(s, &arcs, &mut classes, &mut steps, &mut out);
    }
    out
}

fn walk_cycles(
    s: usize,
    arcs: &[(usize, usize, CycleStep)],
    classes: &mut Vec<usize>,
    steps: &mut Vec<CycleStep>,
    out: &mut Vec<(Vec<usize>, Vec<CycleStep>)>,
) {
    let here = *classes.last().expect("nonempty");
    for &(a, b, step) in arcs {
        if a != here || a == b || steps.iter().any(|st| st.edge == step.edge) {
            continue;
        }
        if b == s {
            if !steps.is_empty() {
                let mut full = steps.clone();
                full.push(step);
                out.push((classes.clone(), full));
            }
        } else if b > s && !classes.contains(&b) {
            classes.push(b);
            steps.push(step);
            walk_cycles(s, arcs, classes, steps, out);
            steps.pop();
            classes.pop();
        }
    }
}

/// The lexicographically smallest oriented cycle, compared by class string,
/// then by edge-index string, then by the first tail vertex. `None` when the
/// image has no cycle (in particular for valid forests).
pub fn main_cycle(net: &SuperportNetwork, forest: &Forest) -> Option<MainCycle> {
    let key = |c: &(Vec<usize>, Vec<CycleStep>)| -> CycleKey {
        (
            c.0.clone(),
            c.1.iter().map(|s| s.edge).collect(),
            c.1[0].tail,
        )
    };
    let (classes, steps) = quotient_cycles(net, forest).into_iter().min_by_key(key)?;
    let paths = split_paths(&steps);
    Some(MainCycle {
        classes,
        steps,
        paths,
    })
}

/// Splits an oriented cycle into maximal forest paths `(u_k, v_k)`: a path
/// ends wherever the cycle leaves a superport by a different vertex than
/// the one it entered by.
pub fn split_paths(steps: &[CycleStep]) -> Vec<(usize, usize)> {
    let len = steps.len();
    let breaks: Vec<usize> = (0..len)
        .filter(|&t| steps[t].head != steps[(t + 1) % len].tail)
        .collect();
    let first = breaks.first().map_or(0, |&b| (b + 1) % len);
    let mut paths = Vec::new();
    let mut start = steps[first].tail;
    for t in 0..len {
        let idx = (first + t) % len;
        if breaks.contains(&idx) {
            paths.push((start, steps[idx].head));
            start = steps[(idx + 1) % len].tail;
        }
    }
    paths
}

/// Whether the `(u_k, v_k)` of a cycle satisfy (XY) or (ZW), in the given
/// orientation or reversed.
pub fn cycle_condition_holds(paths: &[(usize, usize)], part: &XyzwPartition) -> bool {
    let fits = |a: &[usize], b: &[usize], s: &[usize], t: &[usize]| {
        a.iter().all(|x| s.contains(x)) && b.iter().all(|x| t.contains(x))
    };
    let u: Vec<usize> = paths.iter().map(|p| p.0).collect();
    let v: Vec<usize> = paths.iter().map(|p| p.1).collect();
    let holds = [(&u, &v), (&v, &u)]
        .into_iter()
        .any(|(a, b)| fits(a, b, &part.x, &part.y) || fits(a, b, &part.z, &part.w));
    holds
}

/// Moves `U, V` of the main cycle between `(X, Y)` and `(Z, W)`, reversing
/// the cycle when the stored orientation does not fit.
pub fn involution_f(
    net: &SuperportNetwork,
    forest: &Forest,
    part: &XyzwPartition,
) -> Result<XyzwPartition, ForestError> {
    if is_valid(net, forest) {
        return Err(ForestError::ForestIsValid);
    }
    let cycle = main_cycle(net, forest).ok_or(ForestError::NoCycle)?;
    let (u, v) = (cycle.u(), cycle.v());
    let within = |a: &[usize], s: &[usize]| a.iter().all(|x| s.contains(x));
    let remove = |s: &[usize], a: &[usize]| {
        s.iter()
            .copied()
            .filter(|x| !a.contains(x))
            .collect::<Vec<_>>()
    };
    let add = |s: &[usize], a: &[usize]| s.iter().chain(a).copied().collect::<Vec<_>>();
    for (u, v) in [(&u, &v), (&v, &u)] {
        if within(u, &part.x) && within(v, &part.y) {
            return Ok(XyzwPartition {
                x: remove(&part.x, u),
                y: remove(&part.y, v),
                z: add(&part.z, u),
                w: add(&part.w, v),
            }
            .normalize());
        }
        if within(u, &part.z) && within(v, &part.w) {
            return Ok(XyzwPartition {
                x: add(&part.x, u),
                y: add(&part.y, v),
                z: remove(&part.z, u),
                w: remove(&part.w, v),
            }
            .normalize());
        }
    }
    let colors: Vec<String> = cycle
        .paths
        .iter()
        .map(|&(a, b)| {
            format!(
                "{}{}..{}{}",
                a + 1,
                part.color(a).unwrap_or('?'),
                b + 1,
                part.color(b).unwrap_or('?')
            )
        })
        .collect();
    Err(ForestError::CycleLemma(colors.join(" ")))
}

/// All forests with their weights, enumerated once and reused.
#[derive(Clone, Debug)]
pub struct ForestTable {
    pub forests: Vec<Forest>,
    pub weights: Vec<Rational>,
}

impl ForestTable {
    pub fn build(
        net: &SuperportNetwork,
        cap: usize,
        execution: Execution,
    ) -> Result<Self, ForestError> {
        let forests = ForestEnumerator::new(net)
            .cap(cap)
            .execution(execution)
            .collect()?;
        let weights = forests.iter().map(|f| f.weight(net)).collect();
        Ok(ForestTable { forests, weights })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Forest, &Rational)> {
        self.forests.iter().zip(&self.weights)
    }

    pub fn weight_sum(&self, keep: impl Fn(&Forest) -> bool) -> Rational {
        self.iter()
            .filter(|(f, _)| keep(f))
            .fold(Rational::zero(), |acc, (_, w)| acc + w)
    }

    pub fn grouped_weight(&self, groups: &[Vec<usize>]) -> Rational {
        if groups.is_empty() {
            return Rational::zero();
        }
        self.weight_sum(|f| respects_grouping(f, groups))
    }
}
