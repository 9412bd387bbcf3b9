use num_integer::Integer;

use super::{Frac, QMatrix, QVector};
use crate::error::{Error, Result};

fn ck(x: Option<i64>) -> i64 {
    x.expect("integer overflow in Hermite normal form")
}

/// Row-style Hermite normal form `U·A = H` of an integer matrix.
///
/// `H` is in row echelon form: its first `rank` rows are nonzero with
/// strictly increasing pivot columns, positive pivots, and entries above each
/// pivot reduced into `[0, pivot)`. `U` is unimodular, so its rows
/// `rank..` form a basis of the integer left kernel `{u : u·A = 0}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hnf {
    pub h: Vec<Vec<i64>>,
    pub u: Vec<Vec<i64>>,
    pub pivots: Vec<usize>,
}

impl Hnf {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Integer basis of `{u ∈ ℤ^rows : u·A = 0}`.
    pub fn left_kernel(&self) -> Vec<Vec<i64>> {
        self.u[self.rank()..].to_vec()
    }
}

fn axpy_row(rows: &mut [Vec<i64>], dst: usize, src: usize, q: i64) {
    // rows[dst] -= q * rows[src]
    if q == 0 {
        return;
    }
    for j in 0..rows[dst].len() {
        let delta = ck(q.checked_mul(rows[src][j]));
        rows[dst][j] = ck(rows[dst][j].checked_sub(delta));
    }
}

pub fn hermite_normal_form(a: &[Vec<i64>]) -> Hnf {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut h: Vec<Vec<i64>> = a.to_vec();
    let mut u: Vec<Vec<i64>> = (0..m)
        .map(|i| (0..m).map(|j| i64::from(i == j)).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        loop {
            // Bring the smallest nonzero |entry| of column c (rows r..) to row r.
            let best = (r..m)
                .filter(|&i| h[i][c] != 0)
                .min_by_key(|&i| (h[i][c].unsigned_abs(), i));
            let Some(p) = best else { break };
            h.swap(r, p);
            u.swap(r, p);
            let mut done = true;
            for i in r + 1..m {
                if h[i][c] != 0 {
                    let q = Integer::div_floor(&h[i][c], &h[r][c]);
                    axpy_row(&mut h, i, r, q);
                    axpy_row(&mut u, i, r, q);
                    if h[i][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if h[r][c] == 0 {
            continue;
        }
        if h[r][c] < 0 {
            for x in h[r].iter_mut().chain(u[r].iter_mut()) {
                *x = ck(x.checked_neg());
            }
        }
        for i in 0..r {
            let q = Integer::div_floor(&h[i][c], &h[r][c]);
            axpy_row(&mut h, i, r, q);
            axpy_row(&mut u, i, r, q);
        }
        pivots.push(c);
        r += 1;
    }
    Hnf { h, u, pivots }
}

/// Full-rank lattice `{Σ cᵢ gᵢ : cᵢ ∈ ℤ}` in its rational span, given by
/// independent generator rows. The ambient dimension may exceed the rank
/// (lattices inside a hyperplane).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    generators: QMatrix,
    den: i64,
    hnf: Hnf,
}

impl Lattice {
    pub fn new(generators: Vec<QVector>) -> Result<Lattice> {
        let dim = generators.first().map_or(0, |g| g.dim());
        if let Some(g) = generators.iter().find(|g| g.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: g.dim(),
            });
        }
        Lattice::from_matrix(QMatrix::from_row_vectors(&generators))
    }

    /// Generators are the rows of `g`.
    pub fn from_matrix(g: QMatrix) -> Result<Lattice> {
        let den = g.common_denominator();
        let ints = g
            .scaled_integers(den)
            .expect("common denominator clears entries");
        let rows: Vec<Vec<i64>> = ints.chunks(g.cols().max(1)).map(|c| c.to_vec()).collect();
        let rows = if g.cols() == 0 {
            vec![Vec::new(); g.rows()]
        } else {
            rows
        };
        let hnf = hermite_normal_form(&rows);
        if hnf.rank() != g.rows() {
            return Err(Error::DependentGenerators);
        }
        Ok(Lattice {
            generators: g,
            den,
            hnf,
        })
    }

    /// `ℤⁿ`.
    pub fn standard(n: usize) -> Lattice {
        Lattice::from_matrix(QMatrix::identity(n)).expect("identity is independent")
    }

    pub fn generators(&self) -> &QMatrix {
        &self.generators
    }

    pub fn generator_vectors(&self) -> Vec<QVector> {
        self.generators.row_vectors()
    }

    pub fn ambient_dim(&self) -> usize {
        self.generators.cols()
    }

    pub fn rank(&self) -> usize {
        self.generators.rows()
    }

    /// The lattice `c·L`.
    pub fn scaled(&self, c: Frac) -> Result<Lattice> {
        Lattice::from_matrix(self.generators.scale(c))
    }

    fn check_dim(&self, v: &QVector) -> Result<()> {
        if v.dim() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                got: v.dim(),
            });
        }
        Ok(())
    }

    /// Rational coefficients of `v` in the generator basis, `None` when `v`
    /// is outside the rational span.
    pub fn coefficients(&self, v: &QVector) -> Result<Option<Vec<Frac>>> {
        self.check_dim(v)?;
        let d = Frac::from_int(self.den);
        let target: Vec<Frac> = v.coords().iter().map(|&x| x * d).collect();
        let h = &self.hnf.h;
        let r = self.rank();
        // Forward substitution on pivot columns: c'·H = d·v.
        let mut cp = vec![Frac::ZERO; r];
        for (i, &p) in self.hnf.pivots.iter().enumerate() {
            let mut acc = target[p];
            for (j, &cj) in cp.iter().enumerate().take(i) {
                acc -= cj * Frac::from_int(h[j][p]);
            }
            cp[i] = acc / Frac::from_int(h[i][p]);
        }
        for (col, &t) in target.iter().enumerate() {
            let got: Frac = (0..r).map(|i| cp[i] * Frac::from_int(h[i][col])).sum();
            if got != t {
                return Ok(None);
            }
        }
        let c = (0..r)
            .map(|k| {
                (0..r)
                    .map(|i| cp[i] * Frac::from_int(self.hnf.u[i][k]))
                    .sum()
            })
            .collect();
        Ok(Some(c))
    }

    /// Integer coefficients of `v`, `None` if `v ∉ L`.
    pub fn solve(&self, v: &QVector) -> Result<Option<Vec<i64>>> {
        Ok(self.coefficients(v)?.and_then(|c| {
            c.iter()
                .map(|x| x.is_integer().then(|| x.numer()))
                .collect()
        }))
    }

    pub fn contains(&self, v: &QVector) -> Result<bool> {
        Ok(self.solve(v)?.is_some())
    }

    /// The representative of `v + L` in the half-open parallelepiped
    /// `{Σ cᵢ gᵢ : 0 ≤ cᵢ < 1}`.
    pub fn canonical_rep(&self, v: &QVector) -> Result<QVector> {
        let c = self.coefficients(v)?.ok_or(Error::NotInSpan)?;
        Ok(self.combine(&c.iter().map(|x| x.fract()).collect::<Vec<_>>()))
    }

    /// `Σ cᵢ gᵢ`.
    pub fn combine(&self, c: &[Frac]) -> QVector {
        assert_eq!(c.len(), self.rank(), "combine: coefficient count");
        let mut out = QVector::zeros(self.ambient_dim());
        for (i, &ci) in c.iter().enumerate() {
            if ci.is_zero() {
                continue;
            }
            for j in 0..self.ambient_dim() {
                out[j] += ci * self.generators[(i, j)];
            }
        }
        out
    }

    /// True if every generator of `self` lies in `other`.
    pub fn is_sublattice_of(&self, other: &Lattice) -> Result<bool> {
        for g in self.generator_vectors() {
            if !other.contains(&g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// True if `w` maps the lattice onto itself.
    pub fn is_invariant_under(&self, w: &QMatrix) -> Result<bool> {
        for g in self.generator_vectors() {
            if !self.contains(&w.mul_vec(&g))? {
                return Ok(false);
            }
        }
        let inv = w.inverse()?;
        for g in self.generator_vectors() {
            if !self.contains(&inv.mul_vec(&g))? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub fn lattice_contains(l: &Lattice, v: &QVector) -> Result<bool> {
    l.contains(v)
}

pub fn canonical_rep(l: &Lattice, v: &QVector) -> Result<QVector> {
    l.canonical_rep(v)
}

/// Integer coefficients expressing `v` in the lattice spanned by the rows of
/// `basis`, or `None` when `v` is not in that lattice.
pub fn solve_integral(basis: &QMatrix, v: &QVector) -> Result<Option<Vec<i64>>> {
    Lattice::from_matrix(basis.clone())?.solve(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(n: usize) -> Lattice {
        let mut gens = Vec::new();
        for i in 0..n - 1 {
            let mut v = vec![0; n];
            v[i] = 1;
            v[i + 1] = -1;
            gens.push(QVector::from_ints(&v));
        }
        let mut v = vec![0; n];
        v[n - 2] = 1;
        v[n - 1] = 1;
        gens.push(QVector::from_ints(&v));
        Lattice::new(gens).unwrap()
    }

    fn d2() -> Lattice {
        Lattice::new(vec![
            QVector::from_ints(&[1, 1]),
            QVector::from_ints(&[1, -1]),
        ])
        .unwrap()
    }

    #[test]
    fn hnf_shape() {
        let hnf = hermite_normal_form(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        let a = [vec![2i64, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]];
        for (u_row, h_row) in hnf.u.iter().zip(&hnf.h) {
            for (j, &h) in h_row.iter().enumerate() {
                let s: i64 = (0..3).map(|k| u_row[k] * a[k][j]).sum();
                assert_eq!(s, h);
            }
        }
        assert_eq!(hnf.h, vec![vec![2, 4, 4], vec![0, 6, 0], vec![0, 0, 12]]);
    }

    #[test]
    fn left_kernel_of_sum_functional() {
        let hnf = hermite_normal_form(&[vec![1], vec![1], vec![1]]);
        let k = hnf.left_kernel();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert_eq!(v.iter().sum::<i64>(), 0);
        }
    }

    #[test]
    fn membership_examples() {
        let z2 = Lattice::standard(2);
        assert!(z2.contains(&QVector::from_ints(&[3, -2])).unwrap());
        assert!(!d2().contains(&QVector::from_ints(&[1, 0])).unwrap());
        assert!(d2().contains(&QVector::from_ints(&[2, 0])).unwrap());
        assert!(matches!(
            d2().contains(&QVector::from_ints(&[1, 0, 0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn canonical_rep_examples() {
        let z1 = Lattice::standard(1);
        assert_eq!(
            z1.canonical_rep(&QVector::from_pairs(&[(7, 3)])).unwrap(),
            QVector::from_pairs(&[(1, 3)])
        );
        // (3/2, 1/2) = 1·(1,1) + ½·(1,−1), so the representative is ½·(1,−1).
        let v = QVector::from_pairs(&[(3, 2), (1, 2)]);
        let rep = d2().canonical_rep(&v).unwrap();
        assert_eq!(rep, QVector::from_pairs(&[(1, 2), (-1, 2)]));
        assert!(d2().contains(&(&v - &rep)).unwrap());
        // (1/2, 1/2) differs from v by (−1, 0), which is not in D₂.
        let other = QVector::from_pairs(&[(1, 2), (1, 2)]);
        assert!(!d2().contains(&(&v - &other)).unwrap());
        assert!(d2()
            .canonical_rep(&QVector::from_ints(&[3, 1]))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn solve_integral_examples() {
        let id = QMatrix::identity(3);
        assert_eq!(
            solve_integral(&id, &QVector::from_ints(&[4, -1, 2])).unwrap(),
            Some(vec![4, -1, 2])
        );
        let d4 = d(4);
        let v = QVector::from_ints(&[1, 1, 0, 0]);
        let c = d4.solve(&v).unwrap().expect("(1,1,0,0) is in D4");
        let back = d4.combine(&c.iter().map(|&x| Frac::from_int(x)).collect::<Vec<_>>());
        assert_eq!(back, v);
        assert_eq!(d4.solve(&QVector::from_ints(&[1, 0, 0, 0])).unwrap(), None);
    }

    #[test]
    fn hyperplane_lattice() {
        // A₂ root lattice inside the sum-zero plane of ℚ³.
        let a2 = Lattice::new(vec![
            QVector::from_ints(&[1, -1, 0]),
            QVector::from_ints(&[0, 1, -1]),
        ])
        .unwrap();
        assert!(a2.contains(&QVector::from_ints(&[2, -1, -1])).unwrap());
        assert!(!a2.contains(&QVector::from_ints(&[1, 0, 0])).unwrap());
        assert_eq!(
            a2.coefficients(&QVector::from_ints(&[1, 0, 0])).unwrap(),
            None
        );
        assert_eq!(
            a2.canonical_rep(&QVector::from_ints(&[1, 0, 0])),
            Err(Error::NotInSpan)
        );
    }

    #[test]
    fn dependent_generators_rejected() {
        let r = Lattice::new(vec![
            QVector::from_ints(&[1, 1]),
            QVector::from_ints(&[2, 2]),
        ]);
        assert_eq!(r, Err(Error::DependentGenerators));
    }

    fn rational_vec(n: usize) -> impl Strategy<Value = QVector> {
        proptest::collection::vec((-50i64..50, 1i64..13), n).prop_map(|v| QVector::from_pairs(&v))
    }

    proptest! {
        #[test]
        fn canonical_rep_is_a_retraction(v in rational_vec(4)) {
            let l = d(4);
            let r1 = l.canonical_rep(&v).unwrap();
            prop_assert_eq!(l.canonical_rep(&r1).unwrap(), r1.clone());
            prop_assert!(l.contains(&(&v - &r1)).unwrap());
        }

        #[test]
        fn canonical_rep_separates_cosets(v in rational_vec(3), w in rational_vec(3)) {
            let l = d(3);
            let same = l.canonical_rep(&v).unwrap() == l.canonical_rep(&w).unwrap();
            prop_assert_eq!(same, l.contains(&(&v - &w)).unwrap());
        }

        #[test]
        fn integer_combinations_are_members(c in proptest::collection::vec(-20i64..20, 4)) {
            let l = d(4);
            let v = l.combine(&c.iter().map(|&x| Frac::from_int(x)).collect::<Vec<_>>());
            prop_assert_eq!(l.solve(&v).unwrap(), Some(c));
        }
    }
}
