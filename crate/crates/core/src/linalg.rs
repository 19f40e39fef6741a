//! Exact rational scalars and small dense matrices.
//!
//! Every quantity in the crate (conductances, voltages, currents, matrix
//! entries) is a [`Rational`]. Matrices are dense, row-major, and may carry
//! vertex labels on their rows and columns so that algorithms which remove
//! rows and columns can keep addressing them by vertex rather than position.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Arbitrary-precision fraction, always reduced with a positive denominator.
pub type Rational = BigRational;

/// `numer / denom` as a [`Rational`]. Panics if `denom == 0`.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Formats as `"p/q"`, or `"p"` for integers.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

/// Parses `"p/q"` or `"p"` (surrounding whitespace allowed).
pub fn parse_rational(text: &str) -> Result<Rational, LinalgError> {
    text.trim()
        .parse::<Rational>()
        .map_err(|_| LinalgError::BadRational(text.to_string()))
}

/// Serde adapter writing a [`Rational`] as a string. Deserialization also
/// accepts bare JSON integers.
pub mod rational_serde {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Int(i64),
        }
        match Repr::deserialize(d)? {
            Repr::Text(text) => parse_rational(&text).map_err(serde::de::Error::custom),
            Repr::Int(value) => Ok(int(value)),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular")]
    Singular,
    #[error("block to be eliminated is singular")]
    SingularBlock,
    #[error("invalid rational literal {0:?}")]
    BadRational(String),
    #[error("label {0} not present on matrix")]
    MissingLabel(usize),
}

/// Dense row-major rational matrix with optional row and column labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
    row_labels: Option<Vec<usize>>,
    col_labels: Option<Vec<usize>>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
            row_labels: None,
            col_labels: None,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Matrix {
            rows,
            cols,
            entries,
            row_labels: None,
            col_labels: None,
        }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, LinalgError> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(LinalgError::DimensionMismatch("ragged rows".into()));
        }
        Ok(Matrix {
            rows: n_rows,
            cols: n_cols,
            entries: rows.into_iter().flatten().collect(),
            row_labels: None,
            col_labels: None,
        })
    }

    /// Integer matrix, mostly for tests.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| int(x)).collect())
                .collect(),
        )
        .expect("rectangular input")
    }

    /// Attaches labels; both must be distinct and match the dimensions.
    pub fn with_labels(mut self, rows: Vec<usize>, cols: Vec<usize>) -> Result<Self, LinalgError> {
        if rows.len() != self.rows || cols.len() != self.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "labels {}x{} for matrix {}x{}",
                rows.len(),
                cols.len(),
                self.rows,
                self.cols
            )));
        }
        if !all_distinct(&rows) || !all_distinct(&cols) {
            return Err(LinalgError::DimensionMismatch("duplicate labels".into()));
        }
        self.row_labels = Some(rows);
        self.col_labels = Some(cols);
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row_labels(&self) -> Option<&[usize]> {
        self.row_labels.as_deref()
    }

    pub fn col_labels(&self) -> Option<&[usize]> {
        self.col_labels.as_deref()
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Position of the row carrying `label`.
    pub fn row_of(&self, label: usize) -> Result<usize, LinalgError> {
        self.row_labels
            .as_ref()
            .and_then(|ls| ls.iter().position(|&l| l == label))
            .ok_or(LinalgError::MissingLabel(label))
    }

    /// Position of the column carrying `label`.
    pub fn col_of(&self, label: usize) -> Result<usize, LinalgError> {
        self.col_labels
            .as_ref()
            .and_then(|ls| ls.iter().position(|&l| l == label))
            .ok_or(LinalgError::MissingLabel(label))
    }

    /// Entry addressed by row and column label.
    pub fn at(&self, row_label: usize, col_label: usize) -> Result<&Rational, LinalgError> {
        Ok(&self[(self.row_of(row_label)?, self.col_of(col_label)?)])
    }

    /// Submatrix on the given row and column positions, in the order given.
    /// Labels follow the selected rows and columns.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let mut out = Matrix::from_fn(rows.len(), cols.len(), |i, j| {
            self[(rows[i], cols[j])].clone()
        });
        out.row_labels = self
            .row_labels
            .as_ref()
            .map(|ls| rows.iter().map(|&r| ls[r]).collect());
        out.col_labels = self
            .col_labels
            .as_ref()
            .map(|ls| cols.iter().map(|&c| ls[c]).collect());
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone());
        out.row_labels = self.col_labels.clone();
        out.col_labels = self.row_labels.clone();
        out
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = Rational::zero();
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if !a.is_zero() {
                    acc += a * &other[(k, j)];
                }
            }
            acc
        });
        out.row_labels = self.row_labels.clone();
        out.col_labels = other.col_labels.clone();
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>, LinalgError> {
        if self.cols != v.len() {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
            && self.row_labels == self.col_labels
    }

    /// Determinant by Gaussian elimination. The 0x0 determinant is 1.
    pub fn det(&self) -> Result<Rational, LinalgError> {
        self.require_square()?;
        let n = self.rows;
        let mut a = self.to_rows();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
                return Ok(Rational::zero());
            };
            if pivot != col {
                a.swap(pivot, col);
                det = -det;
            }
            let p = a[col][col].clone();
            det *= &p;
            for r in col + 1..n {
                if a[r][col].is_zero() {
                    continue;
                }
                let factor = &a[r][col] / &p;
                for c in col..n {
                    let delta = &factor * &a[col][c];
                    a[r][c] -= delta;
                }
            }
        }
        Ok(det)
    }

    /// Exact inverse by Gauss-Jordan elimination. Row labels of the result are
    /// the column labels of the input and vice versa.
    pub fn inverse(&self) -> Result<Matrix, LinalgError> {
        self.require_square()?;
        let n = self.rows;
        let mut a = self.to_rows();
        let mut inv = Matrix::identity(n).to_rows();
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a[r][col].is_zero())
                .ok_or(LinalgError::Singular)?;
            a.swap(pivot, col);
            inv.swap(pivot, col);
            let p = a[col][col].recip();
            for c in 0..n {
                a[col][c] *= &p;
                inv[col][c] *= &p;
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let factor = a[r][col].clone();
                for c in 0..n {
                    let da = &factor * &a[col][c];
                    a[r][c] -= da;
                    let di = &factor * &inv[col][c];
                    inv[r][c] -= di;
                }
            }
        }
        let mut out = Matrix::from_rows(inv)?;
        out.row_labels = self.col_labels.clone();
        out.col_labels = self.row_labels.clone();
        Ok(out)
    }

    /// Solves `self * x = b` for square nonsingular `self`.
    pub fn solve(&self, b: &[Rational]) -> Result<Vec<Rational>, LinalgError> {
        self.require_square()?;
        let n = self.rows;
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch(format!(
                "system of size {n} with right side of length {}",
                b.len()
            )));
        }
        let mut a = self.to_rows();
        let mut rhs = b.to_vec();
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a[r][col].is_zero())
                .ok_or(LinalgError::Singular)?;
            a.swap(pivot, col);
            rhs.swap(pivot, col);
            for r in col + 1..n {
                if a[r][col].is_zero() {
                    continue;
                }
                let factor = &a[r][col] / &a[col][col];
                for c in col..n {
                    let delta = &factor * &a[col][c];
                    a[r][c] -= delta;
                }
                let delta = &factor * &rhs[col];
                rhs[r] -= delta;
            }
        }
        let mut x = vec![Rational::zero(); n];
        for r in (0..n).rev() {
            let mut acc = rhs[r].clone();
            for c in r + 1..n {
                acc -= &a[r][c] * &x[c];
            }
            x[r] = acc / &a[r][r];
        }
        Ok(x)
    }

    /// `M_AA - M_AB * M_BB^{-1} * M_BA` where `A = keep` (positions, in the
    /// given order) and `B` is the complement in increasing order.
    pub fn schur_complement(&self, keep: &[usize]) -> Result<Matrix, LinalgError> {
        self.require_square()?;
        if keep.iter().any(|&k| k >= self.rows) || !all_distinct(keep) {
            return Err(LinalgError::DimensionMismatch("bad index set".into()));
        }
        let rest: Vec<usize> = (0..self.rows).filter(|i| !keep.contains(i)).collect();
        let aa = self.submatrix(keep, keep);
        if rest.is_empty() {
            return Ok(aa);
        }
        let ab = self.submatrix(keep, &rest);
        let ba = self.submatrix(&rest, keep);
        let bb_inv = self
            .submatrix(&rest, &rest)
            .inverse()
            .map_err(|_| LinalgError::SingularBlock)?;
        let correction = ab.mul(&bb_inv)?.mul(&ba)?;
        let mut out = aa;
        for (x, y) in out.entries.iter_mut().zip(correction.entries) {
            *x -= y;
        }
        Ok(out)
    }

    fn require_square(&self) -> Result<(), LinalgError> {
        if self.is_square() {
            Ok(())
        } else {
            Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }
}

fn all_distinct(xs: &[usize]) -> bool {
    let mut sorted = xs.to_vec();
    sorted.sort_unstable();
    sorted.windows(2).all(|w| w[0] != w[1])
}

impl Index<(usize, usize)> for Matrix {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i},{j}) out of range"
        );
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i},{j}) out of range"
        );
        &mut self.entries[i * self.cols + j]
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<Vec<String>> = self
            .to_rows()
            .iter()
            .map(|r| r.iter().map(format_rational).collect())
            .collect();
        let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
        let label_width = self
            .row_labels
            .as_ref()
            .map(|ls| {
                ls.iter()
                    .map(|l| (l + 1).to_string().len())
                    .max()
                    .unwrap_or(0)
            })
            .unwrap_or(0);
        if let Some(cols) = &self.col_labels {
            write!(f, "{:label_width$}  ", "")?;
            for c in cols {
                write!(f, " {:>width$}", c + 1)?;
            }
            writeln!(f)?;
        }
        for (i, row) in cells.iter().enumerate() {
            if let Some(rows) = &self.row_labels {
                write!(f, "{:>label_width$} |", rows[i] + 1)?;
            }
            for cell in row {
                write!(f, " {cell:>width$}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// On-disk form: labels are written 1-based, entries as rational strings.
#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rows: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cols: Option<Vec<usize>>,
    entries: Vec<Vec<String>>,
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixRepr {
            rows: self
                .row_labels
                .as_ref()
                .map(|ls| ls.iter().map(|l| l + 1).collect()),
            cols: self
                .col_labels
                .as_ref()
                .map(|ls| ls.iter().map(|l| l + 1).collect()),
            entries: self
                .to_rows()
                .iter()
                .map(|r| r.iter().map(format_rational).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = MatrixRepr::deserialize(d)?;
        let rows = repr
            .entries
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| parse_rational(x))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        let mut m = Matrix::from_rows(rows).map_err(D::Error::custom)?;
        match (repr.rows, repr.cols) {
            (Some(r), Some(c)) => {
                let shift = |ls: Vec<usize>| -> Result<Vec<usize>, D::Error> {
                    ls.into_iter()
                        .map(|l| {
                            l.checked_sub(1)
                                .ok_or_else(|| D::Error::custom("labels are 1-based"))
                        })
                        .collect()
                };
                m = m
                    .with_labels(shift(r)?, shift(c)?)
                    .map_err(D::Error::custom)?;
            }
            (None, None) => {}
            _ => {
                return Err(D::Error::custom(
                    "row and column labels must both be present",
                ))
            }
        }
        Ok(m)
    }
}

/// Sign `(-1)^k`.
pub fn sign_power(k: usize) -> i32 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Multiplies by `+1` or `-1`.
pub fn signed(value: Rational, sign: i32) -> Rational {
    if sign < 0 {
        -value
    } else {
        value
    }
}

/// True when the value is strictly positive.
pub fn is_positive(value: &Rational) -> bool {
    value.is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_determinant_is_one() {
        assert_eq!(Matrix::zeros(0, 0).det().unwrap(), int(1));
    }

    #[test]
    fn det_of_small_laplacian_block() {
        // [[a+b, -b], [-b, b+c]] at a = b = c = 1
        let m = Matrix::from_i64(&[&[2, -1], &[-1, 2]]);
        assert_eq!(m.det().unwrap(), int(3));
    }

    #[test]
    fn det_of_reduced_four_cycle_matches_tree_polynomial() {
        let (a, b, c, d) = (ratio(2, 3), int(5), ratio(1, 7), int(3));
        let z = Rational::zero();
        let full = Matrix::from_rows(vec![
            vec![&a + &b, -b.clone(), -a.clone(), z.clone()],
            vec![-b.clone(), &b + &c, z.clone(), -c.clone()],
            vec![-a.clone(), z.clone(), &a + &d, -d.clone()],
            vec![z.clone(), -c.clone(), -d.clone(), &c + &d],
        ])
        .unwrap();
        let reduced = full.submatrix(&[0, 1, 2], &[0, 1, 2]);
        let expected = &a * &b * &c + &a * &b * &d + &a * &c * &d + &b * &c * &d;
        assert_eq!(reduced.det().unwrap(), expected);
    }

    #[test]
    fn det_rejects_rectangular() {
        assert_eq!(
            Matrix::zeros(2, 3).det(),
            Err(LinalgError::NotSquare { rows: 2, cols: 3 })
        );
    }

    #[test]
    fn inverse_of_identity_and_scalar() {
        assert_eq!(Matrix::identity(3).inverse().unwrap(), Matrix::identity(3));
        let m = Matrix::from_rows(vec![vec![ratio(-3, 4)]]).unwrap();
        assert_eq!(m.inverse().unwrap()[(0, 0)], ratio(-4, 3));
    }

    #[test]
    fn inverse_of_singular_fails() {
        let m = Matrix::from_i64(&[&[1, 2], &[2, 4]]);
        assert_eq!(m.inverse(), Err(LinalgError::Singular));
    }

    #[test]
    fn inverse_of_w_network_step_one() {
        let (a, b, c, d) = (int(2), int(3), int(5), int(7));
        let z = Rational::zero();
        let m = Matrix::from_rows(vec![
            vec![a.clone(), z.clone(), z.clone(), z.clone()],
            vec![z.clone(), &b + &c, z.clone(), -c.clone()],
            vec![z.clone(), z.clone(), d.clone(), -d.clone()],
            vec![z.clone(), -c.clone(), -d.clone(), &c + &d],
        ])
        .unwrap();
        let inv = m.inverse().unwrap();
        let one = Rational::one();
        let ib = &one / &b;
        let expected = Matrix::from_rows(vec![
            vec![&one / &a, z.clone(), z.clone(), z.clone()],
            vec![z.clone(), ib.clone(), ib.clone(), ib.clone()],
            vec![
                z.clone(),
                ib.clone(),
                (&b * &c + &b * &d + &c * &d) / (&b * &c * &d),
                (&b + &c) / (&b * &c),
            ],
            vec![z.clone(), ib, (&b + &c) / (&b * &c), (&b + &c) / (&b * &c)],
        ])
        .unwrap();
        assert_eq!(inv, expected);
    }

    #[test]
    fn schur_complement_eliminates_series_vertex() {
        // path 1 - 3 - 2 with unit conductances; keep {1, 2}
        let k = Matrix::from_i64(&[&[1, 0, -1], &[0, 1, -1], &[-1, -1, 2]]);
        let s = k.schur_complement(&[0, 1]).unwrap();
        let expected = Matrix::from_rows(vec![
            vec![ratio(1, 2), ratio(-1, 2)],
            vec![ratio(-1, 2), ratio(1, 2)],
        ])
        .unwrap();
        assert_eq!(s, expected);
    }

    #[test]
    fn schur_complement_keep_all_is_identity_map() {
        let m = Matrix::from_i64(&[&[4, 1], &[1, 3]]);
        assert_eq!(m.schur_complement(&[0, 1]).unwrap(), m);
    }

    #[test]
    fn schur_complement_singular_block() {
        let m = Matrix::from_i64(&[&[1, 1], &[1, 0]]);
        assert_eq!(m.schur_complement(&[0]), Err(LinalgError::SingularBlock));
    }

    #[test]
    fn solve_matches_inverse() {
        let m = Matrix::from_i64(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let b = vec![int(1), ratio(1, 2), int(-2)];
        let x = m.solve(&b).unwrap();
        assert_eq!(m.mul_vec(&x).unwrap(), b);
        assert_eq!(m.inverse().unwrap().mul_vec(&b).unwrap(), x);
    }

    #[test]
    fn rational_text_round_trip() {
        assert_eq!(parse_rational("3/2").unwrap(), ratio(3, 2));
        assert_eq!(parse_rational("-6/4").unwrap(), ratio(-3, 2));
        assert_eq!(format_rational(&ratio(6, 3)), "2");
        assert_eq!(format_rational(&ratio(-1, 3)), "-1/3");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn labelled_matrix_json_round_trip() {
        let m = Matrix::from_rows(vec![vec![ratio(1, 2), int(-1)], vec![int(0), ratio(7, 3)]])
            .unwrap()
            .with_labels(vec![0, 2], vec![0, 2])
            .unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(
            text,
            r#"{"rows":[1,3],"cols":[1,3],"entries":[["1/2","-1"],["0","7/3"]]}"#
        );
        let back: Matrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }
}
