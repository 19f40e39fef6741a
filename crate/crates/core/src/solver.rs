//! Kirchhoff and response matrices, the C-to-L algorithm, and exact circuit
//! solves.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg::{LinalgError, Matrix, Rational};
use crate::network::{x_equivalence_quotient, Circuit, NetworkError, Solution, SuperportNetwork};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("matrix at step {0} is singular; input is not a network response")]
    SingularIntermediate(u8),
    #[error("every boundary vertex is a root, the response is empty")]
    NoNonRootVertices,
}

/// Weighted Laplacian, labelled by vertex.
pub fn kirchhoff_matrix(net: &SuperportNetwork) -> Matrix {
    let n = net.n();
    let mut k = Matrix::zeros(n, n);
    for e in net.edges() {
        let c = &e.conductance;
        k[(e.u, e.v)] -= c;
        k[(e.v, e.u)] -= c;
        k[(e.u, e.u)] += c;
        k[(e.v, e.v)] += c;
    }
    k.with_labels((0..n).collect(), (0..n).collect())
        .expect("labels match")
}

/// Response of the unified electrical network: the Schur complement of `K`
/// onto the boundary.
pub fn electrical_response(net: &SuperportNetwork) -> Result<Matrix, SolverError> {
    let keep: Vec<usize> = (0..net.m()).collect();
    Ok(kirchhoff_matrix(net).schur_complement(&keep)?)
}

/// The five-step conversion from an electrical response `C` to the superport
/// response `L`. `sizes` splits the rows of `c`, in order, into superports;
/// the last row of each superport is its root. Row labels of `c` (or
/// positions, when unlabelled) are carried through to the result.
pub fn c2l(c: &Matrix, sizes: &[usize]) -> Result<Matrix, SolverError> {
    let m = c.rows();
    if !c.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m,
            cols: c.cols(),
        }
        .into());
    }
    if sizes.iter().sum::<usize>() != m || sizes.contains(&0) {
        return Err(LinalgError::DimensionMismatch(format!(
            "superport sizes {sizes:?} for a {m}x{m} matrix"
        ))
        .into());
    }
    if m == sizes.len() {
        return Err(SolverError::NoNonRootVertices);
    }
    let labels: Vec<usize> = c
        .row_labels()
        .map_or_else(|| (0..m).collect(), <[usize]>::to_vec);
    let c = c.clone().with_labels(labels.clone(), labels.clone())?;

    let mut root = vec![0; m];
    let mut start = 0;
    for &s in sizes {
        for k in start..start + s {
            root[k] = labels[start + s - 1];
        }
        start += s;
    }
    let last = labels[m - 1];
    let is_root = |pos: usize| root[pos] == labels[pos];

    // Step 1.
    let head: Vec<usize> = (0..m - 1).collect();
    let mut f = c
        .submatrix(&head, &head)
        .inverse()
        .map_err(|_| SolverError::SingularIntermediate(1))?;

    // Steps 2 and 3.
    for pos in 0..m - 1 {
        if is_root(pos) || root[pos] == last {
            continue;
        }
        let (k, r) = (f.col_of(labels[pos])?, f.col_of(root[pos])?);
        for i in 0..f.rows() {
            let v = f[(i, r)].clone();
            f[(i, k)] -= v;
        }
    }
    for pos in 0..m - 1 {
        if is_root(pos) || root[pos] == last {
            continue;
        }
        let (k, r) = (f.row_of(labels[pos])?, f.row_of(root[pos])?);
        for j in 0..f.cols() {
            let v = f[(r, j)].clone();
            f[(k, j)] -= v;
        }
    }

    // Step 4.
    let rows: Vec<usize> = (0..m - 1)
        .filter(|&pos| !is_root(pos))
        .map(|pos| f.row_of(labels[pos]))
        .collect::<Result<_, _>>()?;
    let cols: Vec<usize> = (0..m - 1)
        .filter(|&pos| !is_root(pos))
        .map(|pos| f.col_of(labels[pos]))
        .collect::<Result<_, _>>()?;
    let h = f.submatrix(&rows, &cols);

    // Step 5.
    h.inverse()
        .map_err(|_| SolverError::SingularIntermediate(5))
}

/// `L` of the network via the Kirchhoff matrix: interior vertices become
/// singleton superports after the last one, so step 4 discards them too.
pub fn response_from_k(net: &SuperportNetwork) -> Result<Matrix, SolverError> {
    let mut sizes = net.superport_sizes();
    sizes.extend(net.interior().map(|_| 1));
    c2l(&kirchhoff_matrix(net), &sizes)
}

/// `L` via the electrical response.
pub fn superport_response(net: &SuperportNetwork) -> Result<Matrix, SolverError> {
    c2l(&electrical_response(net)?, &net.superport_sizes())
}

/// The unique solution with `U_m = 0`. Unknowns are the voltages of every
/// vertex other than `m`; equations are (I) at interior vertices, (P) for the
/// first `p - 1` superports and (B) at non-root vertices.
pub fn solve(circuit: &Circuit) -> Result<Solution, SolverError> {
    let net = circuit.network();
    let n = net.n();
    let ground = net.m() - 1;
    let unknown = |v: usize| {
        if v < ground {
            Some(v)
        } else if v > ground {
            Some(v - 1)
        } else {
            None
        }
    };
    let size = n - 1;
    let mut a = Matrix::zeros(size, size);
    let mut b = vec![Rational::zero(); size];
    let mut row = 0;

    // Row of (K U)_v added into equation `row`.
    let add_kirchhoff_row = |a: &mut Matrix, row: usize, v: usize| {
        for e in net.edges().iter().filter(|e| e.u == v || e.v == v) {
            let w = e.other(v);
            if let Some(j) = unknown(v) {
                a[(row, j)] += &e.conductance;
            }
            if let Some(j) = unknown(w) {
                a[(row, j)] -= &e.conductance;
            }
        }
    };

    for v in net.interior() {
        add_kirchhoff_row(&mut a, row, v);
        row += 1;
    }
    for r in &net.superports()[..net.p() - 1] {
        for v in r.clone() {
            add_kirchhoff_row(&mut a, row, v);
        }
        row += 1;
    }
    for (v, du) in net.non_roots().into_iter().zip(circuit.deltas()) {
        let r = net.root(v).expect("boundary vertex");
        if let Some(j) = unknown(v) {
            a[(row, j)] += Rational::one();
        }
        if let Some(j) = unknown(r) {
            a[(row, j)] -= Rational::one();
        }
        b[row] = du.clone();
        row += 1;
    }
    debug_assert_eq!(row, size);

    let x = a.solve(&b)?;
    let voltages: Vec<Rational> = (0..n)
        .map(|v| unknown(v).map_or_else(Rational::zero, |j| x[j].clone()))
        .collect();
    Ok(solution_from_voltages(net, voltages))
}

/// Currents from axiom (C) and incoming boundary currents.
pub fn solution_from_voltages(net: &SuperportNetwork, voltages: Vec<Rational>) -> Solution {
    let n = net.n();
    let mut currents = vec![vec![Rational::zero(); n]; n];
    for e in net.edges() {
        let i = &e.conductance * (&voltages[e.u] - &voltages[e.v]);
        currents[e.v][e.u] = -i.clone();
        currents[e.u][e.v] = i;
    }
    let incoming = (0..net.m())
        .map(|k| currents[k].iter().fold(Rational::zero(), |acc, x| acc + x))
        .collect();
    Solution {
        voltages,
        currents,
        incoming,
    }
}

/// `m x m` matrix whose column `j` holds the incoming boundary currents when
/// the superport of `j` carries voltage 1 at `j` and 0 at its other vertices,
/// every other superport being internally equipotential.
pub fn extended_response(net: &SuperportNetwork) -> Result<Matrix, SolverError> {
    let m = net.m();
    let non_roots = net.non_roots();
    let mut out = Matrix::zeros(m, m);
    for j in 0..m {
        let sp = net.superports()[net.superport_of(j).expect("boundary")].clone();
        let root = sp.end - 1;
        let deltas = non_roots
            .iter()
            .map(|&k| {
                if j != root && k == j {
                    Rational::one()
                } else if j == root && sp.contains(&k) {
                    -Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        let sol = solve(&Circuit::new(net.clone(), deltas)?)?;
        for i in 0..m {
            out[(i, j)] = sol.incoming[i].clone();
        }
    }
    Ok(out.with_labels((0..m).collect(), (0..m).collect())?)
}

/// `sum_{k<l} (U_k - U_l) I_kl = sum_{u <= m} U_u I_u`, exactly.
pub fn energy_identity_holds(net: &SuperportNetwork, sol: &Solution) -> bool {
    let (lhs, rhs) = energy_sides(net, sol);
    lhs == rhs
}

pub fn energy_sides(net: &SuperportNetwork, sol: &Solution) -> (Rational, Rational) {
    let n = net.n();
    let mut lhs = Rational::zero();
    for k in 0..n {
        for l in k + 1..n {
            lhs += (&sol.voltages[k] - &sol.voltages[l]) * &sol.currents[k][l];
        }
    }
    let rhs = (0..net.m()).fold(Rational::zero(), |acc, u| {
        acc + &sol.voltages[u] * &sol.incoming[u]
    });
    (lhs, rhs)
}

/// Which axiom a solution breaks, if any.
pub fn check_axioms(circuit: &Circuit, sol: &Solution) -> Result<(), String> {
    let net = circuit.network();
    let n = net.n();
    for k in 0..n {
        for l in 0..n {
            let expected = net.conductance(k, l).map_or_else(Rational::zero, |c| {
                c * (&sol.voltages[k] - &sol.voltages[l])
            });
            if sol.currents[k][l] != expected {
                return Err(format!("(C) fails on {}-{}", k + 1, l + 1));
            }
        }
    }
    let out_of = |v: usize| {
        sol.currents[v]
            .iter()
            .fold(Rational::zero(), |acc, x| acc + x)
    };
    for v in net.interior() {
        if !out_of(v).is_zero() {
            return Err(format!("(I) fails at {}", v + 1));
        }
    }
    for (i, r) in net.superports().iter().enumerate() {
        let total = r.clone().fold(Rational::zero(), |acc, v| acc + out_of(v));
        if !total.is_zero() {
            return Err(format!("(P) fails on superport {}", i + 1));
        }
    }
    for (v, du) in net.non_roots().into_iter().zip(circuit.deltas()) {
        let r = net.root(v).expect("boundary vertex");
        if &(&sol.voltages[v] - &sol.voltages[r]) != du {
            return Err(format!("(B) fails at {}", v + 1));
        }
    }
    if !sol.voltages[net.m() - 1].is_zero() {
        return Err("voltage at the grounded root is not 0".into());
    }
    Ok(())
}

/// Voltages of an electrical network on `nodes` vertices with the listed
/// vertices held at fixed voltages; every other vertex obeys (I). Parallel
/// edges are allowed, loops are ignored.
pub fn solve_dirichlet(
    nodes: usize,
    edges: &[(usize, usize, Rational)],
    fixed: &[(usize, Rational)],
) -> Result<Vec<Rational>, SolverError> {
    let free: Vec<usize> = (0..nodes)
        .filter(|v| !fixed.iter().any(|(f, _)| f == v))
        .collect();
    let pos = |v: usize| free.iter().position(|&x| x == v);
    let fixed_value = |v: usize| fixed.iter().find(|(f, _)| *f == v).map(|(_, x)| x.clone());
    let mut a = Matrix::zeros(free.len(), free.len());
    let mut b = vec![Rational::zero(); free.len()];
    for (x, y, c) in edges.iter().filter(|(x, y, _)| x != y) {
        for (s, t) in [(*x, *y), (*y, *x)] {
            if let Some(i) = pos(s) {
                a[(i, i)] += c;
                match pos(t) {
                    Some(j) => a[(i, j)] -= c,
                    None => b[i] += c * fixed_value(t).expect("fixed"),
                }
            }
        }
    }
    let x = a.solve(&b)?;
    Ok((0..nodes)
        .map(|v| fixed_value(v).unwrap_or_else(|| x[pos(v).expect("free")].clone()))
        .collect())
}

/// Result of comparing a unit superport circuit with its quotient electrical
/// circuit under the `{i}`-equivalence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluingComparison {
    /// Per quotient edge: summed current of the original edges and the
    /// quotient current, oriented from the smaller class to the larger.
    pub currents: Vec<(Rational, Rational)>,
    /// Original voltage minus quotient voltage, per vertex.
    pub voltage_offsets: Vec<Rational>,
    /// Currents of original edges that became loops.
    pub loop_currents: Vec<Rational>,
}

impl GluingComparison {
    pub fn holds(&self) -> bool {
        self.currents.iter().all(|(a, b)| a == b)
            && self.voltage_offsets.windows(2).all(|w| w[0] == w[1])
            && self.loop_currents.iter().all(Zero::is_zero)
    }
}

/// Solves the unit circuit at non-root `i` directly and through the
/// `{i}`-quotient with `U[i] = 1`, `U[root(i)] = 0`.
pub fn gluing_comparison(
    net: &SuperportNetwork,
    i: usize,
) -> Result<GluingComparison, SolverError> {
    let sol = solve(&Circuit::unit(net.clone(), i)?)?;
    let q = x_equivalence_quotient(net, &[i]);
    let mut merged: std::collections::BTreeMap<(usize, usize), (Rational, Rational)> =
        Default::default();
    let mut loop_currents = Vec::new();
    for qe in &q.edges {
        let e = &net.edges()[qe.origin];
        if qe.a == qe.b {
            loop_currents.push(sol.currents[e.u][e.v].clone());
            continue;
        }
        let (key, current) = if qe.a < qe.b {
            ((qe.a, qe.b), sol.currents[e.u][e.v].clone())
        } else {
            ((qe.b, qe.a), sol.currents[e.v][e.u].clone())
        };
        let slot = merged
            .entry(key)
            .or_insert_with(|| (Rational::zero(), Rational::zero()));
        slot.0 += &e.conductance;
        slot.1 += current;
    }
    let edges: Vec<(usize, usize, Rational)> = merged
        .iter()
        .map(|(&(a, b), (c, _))| (a, b, c.clone()))
        .collect();
    let root = net.root(i).expect("boundary vertex");
    let fixed = [
        (q.class_of[i], Rational::one()),
        (q.class_of[root], Rational::zero()),
    ];
    let u = solve_dirichlet(q.num_classes(), &edges, &fixed)?;
    let currents = merged
        .iter()
        .map(|(&(a, b), (c, original))| (original.clone(), c * (&u[a] - &u[b])))
        .collect();
    let voltage_offsets = (0..net.n())
        .map(|v| &sol.voltages[v] - &u[q.class_of[v]])
        .collect();
    Ok(GluingComparison {
        currents,
        voltage_offsets,
        loop_currents,
    })
}

/// `K`, `C`, `L` and optionally the extended response of one network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResponseMatrices {
    pub k: Matrix,
    pub c: Matrix,
    pub l: Matrix,
    pub l_ext: Option<Matrix>,
}

impl ResponseMatrices {
    pub fn compute(net: &SuperportNetwork, extended: bool) -> Result<Self, SolverError> {
        let k = kirchhoff_matrix(net);
        let c = electrical_response(net)?;
        let l = c2l(&c, &net.superport_sizes())?;
        let l_ext = if extended {
            Some(extended_response(net)?)
        } else {
            None
        };
        Ok(ResponseMatrices { k, c, l, l_ext })
    }
}
