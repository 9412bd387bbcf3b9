use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_integer::Integer;

use super::Frac;
use crate::error::{Error, Result};

/// Exact rational column vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct QVector {
    coords: Vec<Frac>,
}

impl QVector {
    pub fn new(coords: Vec<Frac>) -> QVector {
        QVector { coords }
    }

    pub fn zeros(dim: usize) -> QVector {
        QVector {
            coords: vec![Frac::ZERO; dim],
        }
    }

    pub fn from_ints(v: &[i64]) -> QVector {
        QVector::new(v.iter().map(|&x| Frac::from_int(x)).collect())
    }

    /// `(p₀/q₀, p₁/q₁, …)` from numerator/denominator pairs.
    pub fn from_pairs(v: &[(i64, i64)]) -> QVector {
        QVector::new(v.iter().map(|&(p, q)| Frac::new(p, q)).collect())
    }

    pub fn unit(dim: usize, i: usize) -> QVector {
        let mut v = QVector::zeros(dim);
        v.coords[i] = Frac::ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Frac] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<Frac> {
        self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn dot(&self, other: &QVector) -> Frac {
        assert_eq!(self.dim(), other.dim(), "dot: dimension mismatch");
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| a * b)
            .sum()
    }

    pub fn scale(&self, c: Frac) -> QVector {
        QVector::new(self.coords.iter().map(|&x| x * c).collect())
    }

    /// Least common multiple of the coordinate denominators.
    pub fn common_denominator(&self) -> i64 {
        self.coords.iter().fold(1i64, |acc, c| acc.lcm(&c.denom()))
    }

    /// Coordinates as `"p/q"` strings.
    pub fn to_strings(&self) -> Vec<String> {
        self.coords.iter().map(|c| c.to_string()).collect()
    }
}

impl Index<usize> for QVector {
    type Output = Frac;
    fn index(&self, i: usize) -> &Frac {
        &self.coords[i]
    }
}

impl IndexMut<usize> for QVector {
    fn index_mut(&mut self, i: usize) -> &mut Frac {
        &mut self.coords[i]
    }
}

impl Add for &QVector {
    type Output = QVector;
    fn add(self, rhs: &QVector) -> QVector {
        assert_eq!(self.dim(), rhs.dim(), "add: dimension mismatch");
        QVector::new(
            self.coords
                .iter()
                .zip(&rhs.coords)
                .map(|(&a, &b)| a + b)
                .collect(),
        )
    }
}

impl Sub for &QVector {
    type Output = QVector;
    fn sub(self, rhs: &QVector) -> QVector {
        assert_eq!(self.dim(), rhs.dim(), "sub: dimension mismatch");
        QVector::new(
            self.coords
                .iter()
                .zip(&rhs.coords)
                .map(|(&a, &b)| a - b)
                .collect(),
        )
    }
}

impl Neg for &QVector {
    type Output = QVector;
    fn neg(self) -> QVector {
        QVector::new(self.coords.iter().map(|&a| -a).collect())
    }
}

impl fmt::Debug for QVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.coords).finish()
    }
}

impl fmt::Display for QVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Exact rational matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Frac>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> QMatrix {
        QMatrix {
            rows,
            cols,
            entries: vec![Frac::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> QMatrix {
        let mut m = QMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Frac::ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Frac>]) -> QMatrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        QMatrix {
            rows: r,
            cols: c,
            entries: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_int_rows(rows: &[Vec<i64>]) -> QMatrix {
        let rows: Vec<Vec<Frac>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Frac::from_int(x)).collect())
            .collect();
        QMatrix::from_rows(&rows)
    }

    /// Integer rows divided by a common denominator.
    pub fn from_scaled_int_rows(rows: &[Vec<i64>], den: i64) -> QMatrix {
        let d = Frac::from_int(den);
        let rows: Vec<Vec<Frac>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Frac::from_int(x) / d).collect())
            .collect();
        QMatrix::from_rows(&rows)
    }

    /// The matrix whose rows are the given vectors.
    pub fn from_row_vectors(vs: &[QVector]) -> QMatrix {
        let rows: Vec<Vec<Frac>> = vs.iter().map(|v| v.coords().to_vec()).collect();
        QMatrix::from_rows(&rows)
    }

    pub fn diagonal(d: &[Frac]) -> QMatrix {
        let mut m = QMatrix::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    /// Permutation matrix sending basis vector `e_j` to `e_{perm[j]}`.
    pub fn permutation(perm: &[usize]) -> QMatrix {
        let n = perm.len();
        let mut m = QMatrix::zeros(n, n);
        for (j, &i) in perm.iter().enumerate() {
            m[(i, j)] = Frac::ONE;
        }
        m
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

    pub fn entries(&self) -> &[Frac] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> QVector {
        QVector::new(self.entries[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn col(&self, j: usize) -> QVector {
        QVector::new((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn row_vectors(&self) -> Vec<QVector> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn transpose(&self) -> QMatrix {
        let mut t = QMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| self[(i, j)] == if i == j { Frac::ONE } else { Frac::ZERO })
            })
    }

    pub fn mul_vec(&self, v: &QVector) -> QVector {
        assert_eq!(self.cols, v.dim(), "mul_vec: dimension mismatch");
        QVector::new(
            (0..self.rows)
                .map(|i| {
                    let row = &self.entries[i * self.cols..(i + 1) * self.cols];
                    row.iter()
                        .zip(v.coords())
                        .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                        .map(|(&a, &b)| a * b)
                        .sum()
                })
                .collect(),
        )
    }

    pub fn scale(&self, c: Frac) -> QMatrix {
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&x| x * c).collect(),
        }
    }

    /// Least common multiple of all entry denominators.
    pub fn common_denominator(&self) -> i64 {
        self.entries.iter().fold(1i64, |acc, c| acc.lcm(&c.denom()))
    }

    /// Entries multiplied by `s`, as integers; `None` if some entry of
    /// `s·self` is not integral.
    pub fn scaled_integers(&self, s: i64) -> Option<Vec<i64>> {
        let s = Frac::from_int(s);
        self.entries
            .iter()
            .map(|&x| {
                let y = x * s;
                y.is_integer().then(|| y.numer())
            })
            .collect()
    }

    /// Reduced row echelon form, together with the pivot columns.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                m[(r, j)] *= inv;
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)];
                    for j in c..m.cols {
                        let delta = f * m[(r, j)];
                        m[(i, j)] -= delta;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{x : self·x = 0}`, one vector per free column.
    pub fn nullspace(&self) -> Vec<QVector> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = QVector::zeros(self.cols);
                v[f] = Frac::ONE;
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = -r[(i, f)];
                }
                v
            })
            .collect()
    }

    pub fn inverse(&self) -> Result<QMatrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: self.cols,
            });
        }
        let n = self.rows;
        let mut aug = QMatrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)];
            }
            aug[(i, n + i)] = Frac::ONE;
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::Singular);
        }
        let mut inv = QMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = r[(i, n + j)];
            }
        }
        Ok(inv)
    }

    pub fn determinant(&self) -> Frac {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let mut m = self.clone();
        let n = m.rows;
        let mut det = Frac::ONE;
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m[(i, c)].is_zero()) else {
                return Frac::ZERO;
            };
            if p != c {
                m.swap_rows(c, p);
                det = -det;
            }
            let pivot = m[(c, c)];
            det *= pivot;
            for i in c + 1..n {
                if !m[(i, c)].is_zero() {
                    let f = m[(i, c)] / pivot;
                    for j in c..n {
                        let delta = f * m[(c, j)];
                        m[(i, j)] -= delta;
                    }
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.entries.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Frac;
    fn index(&self, (i, j): (usize, usize)) -> &Frac {
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Frac {
        &mut self.entries[i * self.cols + j]
    }
}

impl Mul for &QMatrix {
    type Output = QMatrix;
    fn mul(self, rhs: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, rhs.rows, "mul: dimension mismatch");
        let mut out = QMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }
}

impl Add for &QMatrix {
    type Output = QMatrix;
    fn add(self, rhs: &QMatrix) -> QMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "add: shape mismatch"
        );
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &QMatrix {
    type Output = QMatrix;
    fn sub(self, rhs: &QMatrix) -> QMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "sub: shape mismatch"
        );
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<Frac>> = (0..self.rows)
            .map(|i| self.entries[i * self.cols..(i + 1) * self.cols].to_vec())
            .collect();
        f.debug_list().entries(&rows).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_matrix(n: usize) -> impl Strategy<Value = QMatrix> {
        proptest::collection::vec((-4i64..5, 1i64..4), n * n).prop_map(move |v| {
            let rows: Vec<Vec<Frac>> = v
                .chunks(n)
                .map(|c| c.iter().map(|&(p, q)| Frac::new(p, q)).collect())
                .collect();
            QMatrix::from_rows(&rows)
        })
    }

    #[test]
    fn permutation_matrix_moves_basis_vectors() {
        let p = QMatrix::permutation(&[1, 2, 0]);
        assert_eq!(p.mul_vec(&QVector::unit(3, 0)), QVector::unit(3, 1));
        assert_eq!(p.mul_vec(&QVector::unit(3, 2)), QVector::unit(3, 0));
    }

    #[test]
    fn rank_and_nullspace() {
        let m = QMatrix::from_int_rows(&[vec![1, 1, 1]]);
        assert_eq!(m.rank(), 1);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(m.mul_vec(v).is_zero());
        }
    }

    #[test]
    fn singular_inverse_fails() {
        let m = QMatrix::from_int_rows(&[vec![1, 2], vec![2, 4]]);
        assert_eq!(m.inverse(), Err(Error::Singular));
        assert_eq!(m.determinant(), Frac::ZERO);
    }

    #[test]
    fn half_integer_matrix_inverse() {
        let a = QMatrix::from_scaled_int_rows(
            &[
                vec![1, 1, 1, -1],
                vec![1, 1, -1, 1],
                vec![1, -1, 1, 1],
                vec![-1, 1, 1, 1],
            ],
            2,
        );
        assert!((&a * &a).is_identity());
        assert_eq!(a.inverse().unwrap(), a);
        assert_eq!(a.scaled_integers(2).unwrap()[0], 1);
        assert!(a.scaled_integers(1).is_none());
    }

    proptest! {
        #[test]
        fn inverse_is_two_sided(m in small_matrix(3)) {
            if let Ok(inv) = m.inverse() {
                prop_assert!((&m * &inv).is_identity());
                prop_assert!((&inv * &m).is_identity());
                prop_assert_eq!(m.determinant() * inv.determinant(), Frac::ONE);
            } else {
                prop_assert_eq!(m.determinant(), Frac::ZERO);
            }
        }

        #[test]
        fn rank_nullity(m in small_matrix(3)) {
            prop_assert_eq!(m.rank() + m.nullspace().len(), 3);
        }
    }
}
