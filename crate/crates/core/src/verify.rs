//! Both sides of every matrix-tree identity, computed independently and
//! compared exactly.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::forest::{
    cycle_condition_holds, forest_sign_in, image_components, image_is_spanning_tree, image_path,
    involution_f, is_valid, partition_sign, partitions_for_forest, permutation_sign,
    quotient_cycles, satisfies_conditions, split_paths, valid_index_sets, Execution,
    ForestEnumerator, ForestError, ForestTable, DEFAULT_CAP,
};
use crate::linalg::{format_rational, int, Matrix, Rational};
use crate::network::{
    x_equivalence_quotient, Circuit, NetworkError, NetworkFile, Solution, SuperportNetwork,
};
use crate::random::{random_circuit, random_network, random_xyz, rng, NetworkShape};
use crate::solver::{
    c2l, check_axioms, electrical_response, energy_sides, extended_response, gluing_comparison,
    response_from_k, solution_from_voltages, solve, superport_response, SolverError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("the statement needs at least one non-root boundary vertex (m > p)")]
    NeedsNonRoot,
    #[error("the statement needs at least two boundary vertices")]
    NeedsTwoBoundary,
    #[error("bad vertex sets: {0}")]
    BadSets(String),
    #[error("unknown theorem {0:?}")]
    UnknownTheorem(String),
}

impl From<crate::linalg::LinalgError> for VerifyError {
    fn from(e: crate::linalg::LinalgError) -> Self {
        VerifyError::Solver(e.into())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// Outcome of one theorem check. On failure `lhs` and `rhs` are the first
/// mismatching pair and `witness` carries everything needed to reproduce it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub theorem: String,
    pub status: Status,
    pub lhs: String,
    pub rhs: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.status {
            Status::Pass => write!(f, "{}: pass ({} = {})", self.theorem, self.lhs, self.rhs),
            Status::Fail => {
                write!(f, "{}: FAIL ({} != {})", self.theorem, self.lhs, self.rhs)?;
                if let Some(w) = &self.witness {
                    write!(f, "\n  witness: {w}")?;
                }
                Ok(())
            }
        }
    }
}

/// One compared quantity.
struct Item {
    what: String,
    lhs: String,
    rhs: String,
    ok: bool,
    extra: Value,
}

impl Item {
    fn eq(what: impl Into<String>, lhs: &Rational, rhs: &Rational) -> Self {
        Item {
            what: what.into(),
            lhs: format_rational(lhs),
            rhs: format_rational(rhs),
            ok: lhs == rhs,
            extra: Value::Null,
        }
    }

    fn flag(what: impl Into<String>, ok: bool, extra: Value) -> Self {
        Item {
            what: what.into(),
            lhs: ok.to_string(),
            rhs: "true".into(),
            ok,
            extra,
        }
    }
}

fn report(theorem: &str, net: Option<&SuperportNetwork>, items: Vec<Item>) -> Report {
    match items.iter().position(|i| !i.ok) {
        Some(k) => {
            let item = &items[k];
            let mut witness = json!({
                "check": item.what,
                "lhs": item.lhs,
                "rhs": item.rhs,
            });
            if let Some(net) = net {
                witness["network"] =
                    serde_json::to_value(net.to_file()).expect("network serializes");
            }
            if !item.extra.is_null() {
                witness["detail"] = item.extra.clone();
            }
            Report {
                theorem: theorem.into(),
                status: Status::Fail,
                lhs: item.lhs.clone(),
                rhs: item.rhs.clone(),
                witness: Some(witness),
            }
        }
        None => {
            let (lhs, rhs) = items
                .first()
                .map_or(("0 checks".to_string(), "0 checks".to_string()), |i| {
                    (i.lhs.clone(), i.rhs.clone())
                });
            Report {
                theorem: theorem.into(),
                status: Status::Pass,
                lhs,
                rhs,
                witness: None,
            }
        }
    }
}

fn labels(vs: &[usize]) -> Vec<usize> {
    vs.iter().map(|v| v + 1).collect()
}

/// Per-forest bookkeeping of the cancellation argument.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CancellationStats {
    /// Forests with `m - p + 1` components.
    pub forests_examined: usize,
    pub valid_forests: usize,
    pub nonvalid_forests: usize,
    pub partitions: usize,
    pub involution_checks: usize,
    /// `sum sgn(G, X, Y, Z, W) w(G)` over all forests and partitions.
    pub signed_total: Rational,
    pub failures: Vec<Value>,
}

/// Checks on one network sharing a single forest enumeration.
pub struct Verifier<'a> {
    net: &'a SuperportNetwork,
    table: ForestTable,
    tree_sum: Rational,
    valid_sum: Rational,
    electrical_valid_sum: Rational,
}

impl<'a> Verifier<'a> {
    pub fn new(
        net: &'a SuperportNetwork,
        cap: usize,
        execution: Execution,
    ) -> Result<Self, VerifyError> {
        let table = ForestTable::build(net, cap, execution)?;
        let tree_sum = table.weight_sum(|f| f.num_components() == 1);
        let valid_sum = table.weight_sum(|f| is_valid(net, f));
        let unified = net.unify_superports();
        let electrical_valid_sum = table.weight_sum(|f| is_valid(&unified, f));
        Ok(Verifier {
            net,
            table,
            tree_sum,
            valid_sum,
            electrical_valid_sum,
        })
    }

    pub fn network(&self) -> &SuperportNetwork {
        self.net
    }

    pub fn table(&self) -> &ForestTable {
        &self.table
    }

    /// `sum_T w(T)` over spanning trees.
    pub fn tree_sum(&self) -> &Rational {
        &self.tree_sum
    }

    /// `sum_F w(F)` over valid forests of the superport network.
    pub fn valid_sum(&self) -> &Rational {
        &self.valid_sum
    }

    /// `sum_H w(H)` over valid forests of the unified electrical network.
    pub fn electrical_valid_sum(&self) -> &Rational {
        &self.electrical_valid_sum
    }

    fn require_non_root(&self) -> Result<(), VerifyError> {
        if self.net.m() > self.net.p() {
            Ok(())
        } else {
            Err(VerifyError::NeedsNonRoot)
        }
    }

    /// `det C~ = sum_T / sum_H` and `C_i^j = -w(ij | others) / sum_H` for
    /// the unified network.
    pub fn kirchhoff(&self) -> Result<Report, VerifyError> {
        let net = self.net;
        let m = net.m();
        if m < 2 {
            return Err(VerifyError::NeedsTwoBoundary);
        }
        let c = electrical_response(net)?;
        let head: Vec<usize> = (0..m - 1).collect();
        let det = c.submatrix(&head, &head).det()?;
        let mut items = vec![Item::eq(
            "det C~ against trees over valid forests",
            &det,
            &(&self.tree_sum / &self.electrical_valid_sum),
        )];

        // w(ij | k | ...) for every pair in one pass: forests with m - 1
        // components, each holding boundary vertices, exactly one pair shared.
        let mut pair = vec![vec![Rational::zero(); m]; m];
        for (f, w) in self.table.iter() {
            if f.num_components() != m - 1 {
                continue;
            }
            let mut reps: Vec<usize> = (0..m).map(|v| f.component_of(v)).collect();
            let by_vertex = reps.clone();
            reps.sort_unstable();
            reps.dedup();
            if reps.len() != m - 1 {
                continue;
            }
            let (i, j) = (0..m)
                .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
                .find(|&(i, j)| by_vertex[i] == by_vertex[j])
                .expect("one shared component");
            pair[i][j] += w;
        }
        for i in 0..m {
            for j in i + 1..m {
                let rhs = -(&pair[i][j] / &self.electrical_valid_sum);
                items.push(Item::eq(
                    format!("C[{}][{}]", i + 1, j + 1),
                    &c[(i, j)],
                    &rhs,
                ));
                items.push(Item::eq(
                    format!("C[{}][{}]", j + 1, i + 1),
                    &c[(j, i)],
                    &rhs,
                ));
            }
        }
        Ok(report("kirchhoff", Some(net), items))
    }

    /// `det C_{X,Z}^{Y,Z}` against the grove sum; `sign_factor = false` drops
    /// the `(-1)^|X|` factor.
    pub fn kw_minor(
        &self,
        x: &[usize],
        y: &[usize],
        z: &[usize],
        sign_factor: bool,
    ) -> Result<Report, VerifyError> {
        let net = self.net;
        let m = net.m();
        let mut all: Vec<usize> = x.iter().chain(y).chain(z).copied().collect();
        all.sort_unstable();
        let distinct = all.windows(2).all(|w| w[0] != w[1]);
        if x.len() != y.len() || !distinct || all.iter().any(|&v| v >= m) {
            return Err(VerifyError::BadSets(format!(
                "X={:?} Y={:?} Z={:?}",
                labels(x),
                labels(y),
                labels(z)
            )));
        }
        let (mut x, mut y, mut z) = (x.to_vec(), y.to_vec(), z.to_vec());
        x.sort_unstable();
        y.sort_unstable();
        z.sort_unstable();
        let w: Vec<usize> = (0..m).filter(|v| !all.contains(v)).collect();

        let c = electrical_response(net)?;
        let rows: Vec<usize> = x.iter().chain(&z).copied().collect();
        let cols: Vec<usize> = y.iter().chain(&z).copied().collect();
        let lhs = c.submatrix(&rows, &cols).det()?;

        let mut sum = Rational::zero();
        for perm in permutations(x.len()) {
            let mut groups: Vec<Vec<usize>> = x
                .iter()
                .zip(&perm)
                .map(|(&xi, &p)| vec![xi, y[p]])
                .collect();
            groups.extend(w.iter().map(|&v| vec![v]));
            let gw = self.table.grouped_weight(&groups);
            if permutation_sign(&perm) < 0 {
                sum -= gw;
            } else {
                sum += gw;
            }
        }
        if sign_factor && x.len() % 2 == 1 {
            sum = -sum;
        }
        let rhs = sum / &self.electrical_valid_sum;
        let mut item = Item::eq("det C_{X,Z}^{Y,Z} against grove sum", &lhs, &rhs);
        item.extra =
            json!({"X": labels(&x), "Y": labels(&y), "Z": labels(&z), "sign_factor": sign_factor});
        Ok(report("kenyon-wilson", Some(net), vec![item]))
    }

    /// Every entry of `L` against its signed relatively-valid forest ratio.
    pub fn l_entries(&self) -> Result<Report, VerifyError> {
        self.require_non_root()?;
        let net = self.net;
        let l = superport_response(net)?;
        let nr = net.non_roots();
        let k = nr.len();
        let single: Vec<_> = nr
            .iter()
            .map(|&i| x_equivalence_quotient(net, &[i]))
            .collect();
        let pairs: Vec<Vec<_>> = nr
            .iter()
            .map(|&i| {
                nr.iter()
                    .map(|&j| x_equivalence_quotient(net, &[i, j]))
                    .collect()
            })
            .collect();
        let size = net.n() - net.m() + net.p();
        let mut numer = vec![vec![Rational::zero(); k]; k];
        for (f, w) in self.table.iter() {
            if f.edges().len() != size {
                continue;
            }
            let rel: Vec<bool> = single
                .iter()
                .map(|q| image_is_spanning_tree(net, q, f))
                .collect();
            for a in 0..k {
                for b in 0..k {
                    if rel[a] && rel[b] {
                        if forest_sign_in(net, &pairs[a][b], f, nr[a], nr[b]) < 0 {
                            numer[a][b] -= w;
                        } else {
                            numer[a][b] += w;
                        }
                    }
                }
            }
        }
        let mut items = Vec::new();
        for a in 0..k {
            for b in 0..k {
                let rhs = &numer[a][b] / &self.valid_sum;
                items.push(Item::eq(
                    format!("L[{}][{}]", nr[a] + 1, nr[b] + 1),
                    &l[(a, b)],
                    &rhs,
                ));
            }
        }
        Ok(report("l-entries", Some(net), items))
    }

    /// `det L = sum_T / sum_F`.
    pub fn det_l(&self) -> Result<Report, VerifyError> {
        self.require_non_root()?;
        let det = superport_response(self.net)?.det()?;
        let rhs = &self.tree_sum / &self.valid_sum;
        Ok(report(
            "det-l",
            Some(self.net),
            vec![Item::eq(
                "det L against trees over valid forests",
                &det,
                &rhs,
            )],
        ))
    }

    /// `det L = det C~ / sum det C_I^J` over valid index sets, plus the
    /// partition form of the minor sum.
    pub fn valid_minor_sum(&self) -> Result<Report, VerifyError> {
        self.require_non_root()?;
        let net = self.net;
        let m = net.m();
        let c = electrical_response(net)?;
        let head: Vec<usize> = (0..m - 1).collect();
        let det_ct = c.submatrix(&head, &head).det()?;
        let det_l = superport_response(net)?.det()?;
        let minor_sum = valid_index_sets(net)
            .iter()
            .map(|(i, j)| c.submatrix(i, j).det())
            .try_fold(Rational::zero(), |acc, d| d.map(|d| acc + d))?;
        let stats = self.cancellation()?;
        let items = vec![
            Item::eq(
                "sum of valid minors against det C~ / det L",
                &minor_sum,
                &(&det_ct / &det_l),
            ),
            Item::eq(
                "sum of valid minors against signed partitions over valid electrical forests",
                &minor_sum,
                &(&stats.signed_total / &self.electrical_valid_sum),
            ),
        ];
        Ok(report("valid-minor-sum", Some(net), items))
    }

    /// Walks every forest with `m - p + 1` components through the partition
    /// lemma, the cycle lemma and the involution.
    pub fn cancellation(&self) -> Result<CancellationStats, VerifyError> {
        let net = self.net;
        let mut stats = CancellationStats::default();
        let target = net.m() - net.p() + 1;
        for (f, w) in self.table.iter() {
            if f.num_components() != target {
                continue;
            }
            stats.forests_examined += 1;
            let parts = partitions_for_forest(net, f);
            stats.partitions += parts.len();
            let signs: Vec<i32> = parts.iter().map(|p| partition_sign(net, f, p)).collect();
            let total: i32 = signs.iter().sum();
            stats.signed_total += w * int(total as i64);
            let fail = |what: &str, extra: Value| json!({"forest": labels_edges(net, f.edges()), "problem": what, "detail": extra});
            if is_valid(net, f) {
                stats.valid_forests += 1;
                if parts.len() != 1 || signs[0] != 1 {
                    stats.failures.push(fail(
                        "valid forest without a unique positive partition",
                        json!(parts.len()),
                    ));
                }
                continue;
            }
            stats.nonvalid_forests += 1;
            if total != 0 {
                stats
                    .failures
                    .push(fail("signed partition count is not zero", json!(total)));
            }
            let cycles = quotient_cycles(net, f);
            for (part, &sign) in parts.iter().zip(&signs) {
                for (_, steps) in &cycles {
                    if !cycle_condition_holds(&split_paths(steps), part) {
                        stats
                            .failures
                            .push(fail("cycle lemma", json!(part.to_string())));
                    }
                }
                stats.involution_checks += 1;
                let image = match involution_f(net, f, part) {
                    Ok(image) => image,
                    Err(e) => {
                        stats
                            .failures
                            .push(fail("involution undefined", json!(e.to_string())));
                        continue;
                    }
                };
                let back = involution_f(net, f, &image).ok();
                let ok = satisfies_conditions(net, f, &image)
                    && &image != part
                    && back.as_ref() == Some(part)
                    && partition_sign(net, f, &image) == -sign;
                if !ok {
                    stats.failures.push(fail(
                        "involution",
                        json!({"partition": part.to_string(), "image": image.to_string()}),
                    ));
                }
            }
        }
        Ok(stats)
    }

    /// Signed sum over forests and partitions against `sum_F w(F)`, with the
    /// per-forest cancellation checks.
    pub fn signed_sum(&self) -> Result<Report, VerifyError> {
        let stats = self.cancellation()?;
        let mut items = vec![Item::eq(
            "signed partition sum against valid forests",
            &stats.signed_total,
            &self.valid_sum,
        )];
        if let Some(first) = stats.failures.first() {
            items.push(Item::flag("per-forest cancellation", false, first.clone()));
        }
        Ok(report("signed-sum", Some(self.net), items))
    }

    /// Voltages and currents from the valid and relatively valid forest
    /// formulas, normalized to `U_m = 0`.
    pub fn combinatorial_solution(&self, circuit: &Circuit) -> Result<Solution, VerifyError> {
        self.require_non_root()?;
        let net = self.net;
        let n = net.n();
        let mut u = vec![Rational::zero(); n];
        let mut i_num = vec![vec![Rational::zero(); n]; n];
        let valid: Vec<(&crate::forest::Forest, &Rational)> = self
            .table
            .iter()
            .filter(|(f, _)| is_valid(net, f))
            .collect();
        let size = n - net.m() + net.p();
        for (i, du) in net.non_roots().into_iter().zip(circuit.deltas()) {
            if du.is_zero() {
                continue;
            }
            let q = x_equivalence_quotient(net, &[i]);
            let (ci, cr) = (q.class_of[i], q.class_of[net.root(i).expect("boundary")]);
            for (f, w) in &valid {
                let comps = image_components(net, &q, f);
                let dw = du * *w;
                for k in 0..n {
                    if comps[q.class_of[k]] == comps[ci] {
                        u[k] += &dw;
                    }
                }
            }
            for (f, w) in self.table.iter() {
                if f.edges().len() != size || !image_is_spanning_tree(net, &q, f) {
                    continue;
                }
                let dw = du * w;
                for step in image_path(net, &q, f, ci, cr).expect("spanning tree") {
                    i_num[step.tail][step.head] += &dw;
                    i_num[step.head][step.tail] -= &dw;
                }
            }
        }
        let ground = u[net.m() - 1].clone();
        let voltages: Vec<Rational> = u
            .into_iter()
            .map(|x| (x - &ground) / &self.valid_sum)
            .collect();
        let mut sol = solution_from_voltages(net, voltages);
        sol.currents = i_num
            .into_iter()
            .map(|row| row.into_iter().map(|x| x / &self.valid_sum).collect())
            .collect();
        sol.incoming = (0..net.m())
            .map(|k| {
                sol.currents[k]
                    .iter()
                    .fold(Rational::zero(), |acc, x| acc + x)
            })
            .collect();
        Ok(sol)
    }

    /// Solver output against the axioms, energy conservation, `L * deltas`,
    /// and the forest formulas.
    pub fn solution(&self, circuit: &Circuit) -> Result<Report, VerifyError> {
        self.require_non_root()?;
        let net = self.net;
        let sol = solve(circuit)?;
        let axioms = check_axioms(circuit, &sol);
        let mut items = vec![Item::flag(
            "axioms (C)(I)(P)(B)",
            axioms.is_ok(),
            json!(axioms.err()),
        )];
        let (lhs, rhs) = energy_sides(net, &sol);
        items.push(Item::eq("energy conservation", &lhs, &rhs));
        let l = superport_response(net)?;
        let predicted = l.mul_vec(circuit.deltas())?;
        for (k, v) in net.non_roots().into_iter().enumerate() {
            items.push(Item::eq(
                format!("I_{} against L * deltas", v + 1),
                &sol.incoming[v],
                &predicted[k],
            ));
        }
        let comb = self.combinatorial_solution(circuit)?;
        for v in 0..net.n() {
            items.push(Item::eq(
                format!("U_{} against forest formula", v + 1),
                &sol.voltages[v],
                &comb.voltages[v],
            ));
        }
        for e in net.edges() {
            items.push(Item::eq(
                format!("I_{}{} against forest formula", e.u + 1, e.v + 1),
                &sol.currents[e.u][e.v],
                &comb.currents[e.u][e.v],
            ));
        }
        let deltas: Vec<String> = circuit.deltas().iter().map(format_rational).collect();
        for item in &mut items {
            item.extra = json!({"deltas": deltas});
        }
        Ok(report("solution", Some(net), items))
    }

    /// The unit circuit at `i` and its `{i}`-quotient agree.
    pub fn gluing(&self, i: usize) -> Result<Report, VerifyError> {
        self.require_non_root()?;
        let net = self.net;
        if !net.non_roots().contains(&i) {
            return Err(VerifyError::BadSets(format!(
                "{} is not a non-root boundary vertex",
                i + 1
            )));
        }
        let cmp = gluing_comparison(net, i)?;
        let mut items = Vec::new();
        for (k, (a, b)) in cmp.currents.iter().enumerate() {
            items.push(Item::eq(format!("current on quotient edge {k}"), a, b));
        }
        for (v, off) in cmp.voltage_offsets.iter().enumerate() {
            items.push(Item::eq(
                format!("voltage offset at {}", v + 1),
                off,
                &cmp.voltage_offsets[0],
            ));
        }
        for c in &cmp.loop_currents {
            items.push(Item::eq("current on a glued edge", c, &Rational::zero()));
        }
        for item in &mut items {
            item.extra = json!({"i": i + 1});
        }
        Ok(report("gluing", Some(net), items))
    }

    /// Gluing for every non-root vertex.
    pub fn gluing_all(&self) -> Result<Report, VerifyError> {
        self.require_non_root()?;
        for i in self.net.non_roots() {
            let r = self.gluing(i)?;
            if !r.passed() {
                return Ok(r);
            }
        }
        Ok(report(
            "gluing",
            Some(self.net),
            vec![Item::flag("all non-root vertices", true, Value::Null)],
        ))
    }

    /// Kirchhoff-matrix route, symmetry, and the extended response.
    pub fn routes(&self) -> Result<Report, VerifyError> {
        self.require_non_root()?;
        let net = self.net;
        let l = superport_response(net)?;
        let via_k = response_from_k(net)?;
        let ext = extended_response(net)?;
        let nr = net.non_roots();
        let mut items = vec![
            Item::flag("L from K equals L from C", via_k == l, matrix_json(&via_k)),
            Item::flag("L symmetric", l.is_symmetric(), matrix_json(&l)),
            Item::flag(
                "extended response symmetric",
                ext.is_symmetric(),
                matrix_json(&ext),
            ),
            Item::flag(
                "extended response restricts to L",
                ext.submatrix(&nr, &nr).to_rows() == l.to_rows(),
                matrix_json(&ext),
            ),
        ];
        for (s, r) in net.superports().iter().enumerate() {
            let ok = (0..net.m()).all(|j| {
                r.clone()
                    .fold(Rational::zero(), |acc, i| acc + &ext[(i, j)])
                    .is_zero()
            });
            items.push(Item::flag(
                format!("extended columns sum to 0 on superport {}", s + 1),
                ok,
                Value::Null,
            ));
        }
        Ok(report("routes", Some(net), items))
    }

    /// Turning each size-1 superport into an interior vertex leaves `L`
    /// unchanged. `None` when there is nothing to drop.
    pub fn singleton_drop(&self) -> Result<Option<Report>, VerifyError> {
        self.require_non_root()?;
        let net = self.net;
        if net.p() < 2 || net.superports().iter().all(|r| r.len() != 1) {
            return Ok(None);
        }
        let l = superport_response(net)?;
        let nr = net.non_roots();
        let mut items = Vec::new();
        for (s, r) in net.superports().iter().enumerate() {
            if r.len() != 1 {
                continue;
            }
            let mut file: NetworkFile = net.to_file();
            file.superports.remove(s);
            let (dropped, map) = file.canonicalize(false)?;
            let l2 = superport_response(&dropped)?;
            let mut same = l2.rows() == l.rows();
            for (a, &i) in nr.iter().enumerate() {
                for (b, &j) in nr.iter().enumerate() {
                    let i2 = map.to_canonical(i as u64 + 1).expect("vertex kept");
                    let j2 = map.to_canonical(j as u64 + 1).expect("vertex kept");
                    same &= l2.at(i2, j2).ok() == Some(&l[(a, b)]);
                }
            }
            items.push(Item::flag(
                format!("drop superport {}", s + 1),
                same,
                json!({"before": matrix_json(&l), "after": matrix_json(&l2)}),
            ));
        }
        Ok(Some(report("singleton-drop", Some(net), items)))
    }
}

fn matrix_json(m: &Matrix) -> Value {
    serde_json::to_value(m).expect("matrix serializes")
}

fn labels_edges(net: &SuperportNetwork, edges: &[usize]) -> Vec<[usize; 2]> {
    edges
        .iter()
        .map(|&e| [net.edges()[e].u + 1, net.edges()[e].v + 1])
        .collect()
}

/// All permutations of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for v in 0..k {
            if !prefix.contains(&v) {
                prefix.push(v);
                go(prefix, k, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), k, &mut out);
    out
}

/// The checks selectable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Theorem {
    Kirchhoff,
    KenyonWilson,
    Entries,
    DetL,
    MinorSum,
    SignedSum,
    Gluing,
    Solution,
    Routes,
    SingletonDrop,
}

impl Theorem {
    pub const ALL: [Theorem; 10] = [
        Theorem::Kirchhoff,
        Theorem::KenyonWilson,
        Theorem::Entries,
        Theorem::DetL,
        Theorem::MinorSum,
        Theorem::SignedSum,
        Theorem::Gluing,
        Theorem::Solution,
        Theorem::Routes,
        Theorem::SingletonDrop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::Kirchhoff => "kirchhoff",
            Theorem::KenyonWilson => "kw",
            Theorem::Entries => "entries",
            Theorem::DetL => "detl",
            Theorem::MinorSum => "minorsum",
            Theorem::SignedSum => "signedsum",
            Theorem::Gluing => "gluing",
            Theorem::Solution => "solution",
            Theorem::Routes => "routes",
            Theorem::SingletonDrop => "singleton",
        }
    }

    /// Whether the statement needs `m > p`.
    pub fn needs_non_root(self) -> bool {
        !matches!(
            self,
            Theorem::Kirchhoff | Theorem::KenyonWilson | Theorem::SignedSum
        )
    }
}

impl FromStr for Theorem {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| VerifyError::UnknownTheorem(s.to_string()))
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Runs the selected checks on one network. Randomized inputs (Kenyon-Wilson
/// partitions, circuit differences) come from `rng`.
pub fn run_theorems(
    verifier: &Verifier<'_>,
    theorems: &[Theorem],
    rng: &mut impl Rng,
    kw_samples: usize,
) -> Result<Vec<Report>, VerifyError> {
    let net = verifier.network();
    let mut out = Vec::new();
    for &t in theorems {
        if t.needs_non_root() && net.m() <= net.p() {
            continue;
        }
        match t {
            Theorem::Kirchhoff => out.push(verifier.kirchhoff()?),
            Theorem::KenyonWilson => {
                for _ in 0..kw_samples {
                    let (x, y, z) = random_xyz(rng, net.m(), 2);
                    out.push(verifier.kw_minor(&x, &y, &z, true)?);
                }
            }
            Theorem::Entries => out.push(verifier.l_entries()?),
            Theorem::DetL => out.push(verifier.det_l()?),
            Theorem::MinorSum => out.push(verifier.valid_minor_sum()?),
            Theorem::SignedSum => out.push(verifier.signed_sum()?),
            Theorem::Gluing => out.push(verifier.gluing_all()?),
            Theorem::Solution => out.push(verifier.solution(&random_circuit(rng, net, 10))?),
            Theorem::Routes => out.push(verifier.routes()?),
            Theorem::SingletonDrop => out.extend(verifier.singleton_drop()?),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct CampaignOptions {
    pub seed: u64,
    pub count: usize,
    pub shape: NetworkShape,
    pub cap: usize,
    pub execution: Execution,
    pub theorems: Vec<Theorem>,
    pub kw_samples: usize,
}

impl Default for CampaignOptions {
    fn default() -> Self {
        CampaignOptions {
            seed: 0,
            count: 200,
            shape: NetworkShape::default(),
            cap: DEFAULT_CAP,
            execution: Execution::default(),
            theorems: Theorem::ALL.to_vec(),
            kw_samples: 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NetworkOutcome {
    pub index: usize,
    pub seed: u64,
    pub network: SuperportNetwork,
    pub reports: Vec<Report>,
    pub cancellation: Option<CancellationStats>,
}

impl NetworkOutcome {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(Report::passed)
            && self
                .cancellation
                .as_ref()
                .is_none_or(|c| c.failures.is_empty())
    }
}

/// Random networks checked independently; results come back in generation
/// order regardless of scheduling.
pub fn run_campaign(opts: &CampaignOptions) -> Result<Vec<NetworkOutcome>, VerifyError> {
    let mut master = rng(opts.seed);
    let jobs: Vec<(usize, u64, SuperportNetwork)> = (0..opts.count)
        .map(|index| {
            let seed: u64 = master.gen();
            let net = random_network(&mut rng(seed), &opts.shape);
            (index, seed, net)
        })
        .collect();
    let run = |(index, seed, network): (usize, u64, SuperportNetwork)| -> Result<NetworkOutcome, VerifyError> {
        let verifier = Verifier::new(&network, opts.cap, Execution::Sequential)?;
        let mut local = rng(seed ^ 0x9e37_79b9_7f4a_7c15);
        let reports = run_theorems(&verifier, &opts.theorems, &mut local, opts.kw_samples)?;
        let cancellation = if opts.theorems.contains(&Theorem::SignedSum) {
            Some(verifier.cancellation()?)
        } else {
            None
        };
        drop(verifier);
        Ok(NetworkOutcome {
            index,
            seed,
            network,
            reports,
            cancellation,
        })
    };
    match opts.execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            jobs.into_par_iter().map(run).collect()
        }
        _ => jobs.into_iter().map(run).collect(),
    }
}

/// Default-cap wrappers over [`Verifier`].
pub fn verify_kirchhoff(net: &SuperportNetwork) -> Result<Report, VerifyError> {
    Verifier::new(net, DEFAULT_CAP, Execution::default())?.kirchhoff()
}

pub fn verify_kw_minor(
    net: &SuperportNetwork,
    x: &[usize],
    y: &[usize],
    z: &[usize],
) -> Result<Report, VerifyError> {
    Verifier::new(net, DEFAULT_CAP, Execution::default())?.kw_minor(x, y, z, true)
}

pub fn verify_l_entries(net: &SuperportNetwork) -> Result<Report, VerifyError> {
    Verifier::new(net, DEFAULT_CAP, Execution::default())?.l_entries()
}

pub fn verify_det_l(net: &SuperportNetwork) -> Result<Report, VerifyError> {
    Verifier::new(net, DEFAULT_CAP, Execution::default())?.det_l()
}

pub fn verify_valid_minor_sum(net: &SuperportNetwork) -> Result<Report, VerifyError> {
    Verifier::new(net, DEFAULT_CAP, Execution::default())?.valid_minor_sum()
}

pub fn verify_signed_sum(net: &SuperportNetwork) -> Result<Report, VerifyError> {
    Verifier::new(net, DEFAULT_CAP, Execution::default())?.signed_sum()
}

pub fn verify_gluing(net: &SuperportNetwork, i: usize) -> Result<Report, VerifyError> {
    Verifier::new(net, DEFAULT_CAP, Execution::default())?.gluing(i)
}

pub fn combinatorial_solution(circuit: &Circuit) -> Result<Solution, VerifyError> {
    Verifier::new(circuit.network(), DEFAULT_CAP, Execution::default())?
        .combinatorial_solution(circuit)
}

/// The complete graph on `n` vertices with unit conductances and the given
/// superport sizes (summing to at most `n`).
pub fn complete_graph(n: usize, sizes: &[usize]) -> Result<SuperportNetwork, VerifyError> {
    let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v, Rational::one())));
    Ok(SuperportNetwork::new(n, edges, sizes)?)
}

/// Brute-force count against a closed form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountReport {
    pub counts: Vec<u64>,
    pub formula: String,
    pub report: Report,
}

/// Spanning trees of `K_m` against `m^(m-2)`.
pub fn cayley(m: usize, cap: usize, execution: Execution) -> Result<CountReport, VerifyError> {
    if m == 0 {
        return Err(VerifyError::BadSets("m must be positive".into()));
    }
    let net = complete_graph(m, &[m])?;
    let count = ForestEnumerator::new(&net)
        .cap(cap)
        .execution(execution)
        .count(|f| f.num_components() == 1)?;
    let formula = power(m as i64, m as i64 - 2);
    Ok(CountReport {
        counts: vec![count],
        formula: format_rational(&formula),
        report: report(
            "cayley",
            None,
            vec![Item::eq(
                format!("trees of K_{m}"),
                &int(count as i64),
                &formula,
            )],
        ),
    })
}

/// One block of the generalized count: a part of `size` vertices and a
/// spanning tree on it (local 0-based edges).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreePart {
    pub size: usize,
    pub edges: Vec<(usize, usize)>,
}

impl TreePart {
    /// A path through the part's vertices.
    pub fn path(size: usize) -> Self {
        TreePart {
            size,
            edges: (1..size).map(|k| (k - 1, k)).collect(),
        }
    }
}

/// Trees on the disjoint union of the parts that contain every part's tree,
/// counted two ways, against `n^(r-2) * prod |A_i|`.
pub fn generalized_cayley(
    parts: &[TreePart],
    cap: usize,
    execution: Execution,
) -> Result<CountReport, VerifyError> {
    if parts.is_empty() || parts.iter().any(|p| p.size == 0) {
        return Err(VerifyError::BadSets("parts must be nonempty".into()));
    }
    let sizes: Vec<usize> = parts.iter().map(|p| p.size).collect();
    let n: usize = sizes.iter().sum();
    let net = complete_graph(n, &sizes)?;
    let mut required = Vec::new();
    let mut offset = 0;
    for p in parts {
        if p.edges.len() + 1 != p.size {
            return Err(VerifyError::BadSets(format!(
                "a part of size {} needs {} tree edges",
                p.size,
                p.size - 1
            )));
        }
        for &(a, b) in &p.edges {
            if a >= p.size || b >= p.size || a == b {
                return Err(VerifyError::BadSets(format!(
                    "bad tree edge {}-{}",
                    a + 1,
                    b + 1
                )));
            }
            let (u, v) = (offset + a.min(b), offset + a.max(b));
            let idx = net
                .edges()
                .iter()
                .position(|e| (e.u, e.v) == (u, v))
                .expect("complete graph has every edge");
            required.push(idx);
        }
        offset += p.size;
    }
    crate::forest::Forest::new(&net, required.clone())
        .map_err(|_| VerifyError::BadSets("part edges must form trees".into()))?;

    let enumerator = ForestEnumerator::new(&net).cap(cap).execution(execution);
    let valid = enumerator.count(|f| is_valid(&net, f))?;
    let containing = enumerator
        .count(|f| f.num_components() == 1 && required.iter().all(|e| f.edges().contains(e)))?;
    let product: i64 = sizes.iter().map(|&s| s as i64).product();
    let formula = power(n as i64, parts.len() as i64 - 2) * int(product);
    let items = vec![
        Item::eq(
            "valid forests of the superport complete graph",
            &int(valid as i64),
            &formula,
        ),
        Item::eq(
            "trees containing the part trees",
            &int(containing as i64),
            &formula,
        ),
    ];
    Ok(CountReport {
        counts: vec![valid, containing],
        formula: format_rational(&formula),
        report: report("generalized-cayley", None, items),
    })
}

fn power(base: i64, exp: i64) -> Rational {
    let b = int(base);
    if exp >= 0 {
        (0..exp).fold(Rational::one(), |acc, _| acc * &b)
    } else {
        (0..-exp).fold(Rational::one(), |acc, _| acc / &b)
    }
}

/// The box network, its H replacement, and both responses. All inputs and
/// outputs are resistances; edges carry their reciprocals as conductances.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxH {
    /// `A, B, C, D, E`.
    pub h_values: [Rational; 5],
    pub box_response: Matrix,
    pub h_response: Matrix,
    pub report: Report,
}

pub fn box_network(
    a: &Rational,
    b: &Rational,
    c: &Rational,
    d: &Rational,
) -> Result<SuperportNetwork, VerifyError> {
    Ok(SuperportNetwork::new(
        4,
        [
            (0, 2, a.recip()),
            (0, 1, b.recip()),
            (1, 3, c.recip()),
            (2, 3, d.recip()),
        ],
        &[2, 2],
    )?)
}

pub fn h_network(values: &[Rational; 5]) -> Result<SuperportNetwork, VerifyError> {
    let [a, b, c, d, e] = values;
    Ok(SuperportNetwork::new(
        6,
        [
            (0, 4, a.recip()),
            (1, 5, b.recip()),
            (2, 4, c.recip()),
            (3, 5, d.recip()),
            (4, 5, e.recip()),
        ],
        &[2, 2],
    )?)
}

pub fn box_h(a: &Rational, b: &Rational, c: &Rational, d: &Rational) -> Result<BoxH, VerifyError> {
    use num_traits::Signed;
    if [a, b, c, d].iter().any(|x| !x.is_positive()) {
        return Err(VerifyError::BadSets("box values must be positive".into()));
    }
    let s = a + b + c + d;
    let h_values = [a * b / &s, b * c / &s, a * d / &s, c * d / &s, b * d / &s];
    let box_response = c2l(&electrical_response(&box_network(a, b, c, d)?)?, &[2, 2])?;
    let h_response = superport_response(&h_network(&h_values)?)?;
    let item = Item::flag(
        "box and H responses",
        box_response == h_response,
        json!({"box": matrix_json(&box_response), "h": matrix_json(&h_response)}),
    );
    Ok(BoxH {
        h_values,
        report: report("box-h", None, vec![item]),
        box_response,
        h_response,
    })
}
