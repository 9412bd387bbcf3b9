//! Split octonions over ℚ and the infinitesimal triality check.
//!
//! Coordinates are taken in the basis `v1..v8` of the multiplication table
//! below. Linear maps are 8×8 [`QMatrix`] values acting on those coordinate
//! columns. The Cartan elements are diagonal in the reordered basis
//! `e1..e8`, see [`E_TO_V`].

use std::ops::{Add, Mul, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::{triality_a, triality_b};
use crate::exactlin::{Frac, QMatrix, QVector};

/// `TABLE[i][j] = ±(k+1)` encodes `v_{i+1}·v_{j+1} = ±v_{k+1}`; 0 is zero.
const TABLE: [[i8; 8]; 8] = [
    [1, 2, 3, 0, 5, 0, 0, 0],
    [0, 0, 4, 0, -6, 0, -1, 2],
    [0, -4, 0, 0, 7, -1, 0, 3],
    [4, 0, 0, 0, -8, -2, 3, 0],
    [0, 6, -7, -1, 0, 0, 0, 5],
    [6, 0, -8, 2, 0, 0, -5, 0],
    [7, -8, 0, -3, 0, 5, 0, 0],
    [0, 0, 0, 4, 0, 6, 7, 8],
];

/// `e_{k+1} = v_{E_TO_V[k]+1}`: `e1..e4 = v1..v4`, `e5..e8 = v8, v7, v6, v5`.
pub const E_TO_V: [usize; 8] = [0, 1, 2, 3, 7, 6, 5, 4];

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Debug)]
pub struct Octonion {
    pub coords: [Frac; 8],
}

impl Octonion {
    pub fn zero() -> Octonion {
        Octonion::default()
    }

    /// `v_{i+1}`.
    pub fn basis(i: usize) -> Octonion {
        let mut o = Octonion::zero();
        o.coords[i] = Frac::ONE;
        o
    }

    /// `e_{k+1}`.
    pub fn e(k: usize) -> Octonion {
        Octonion::basis(E_TO_V[k])
    }

    pub fn from_vector(v: &QVector) -> Octonion {
        assert_eq!(v.dim(), 8, "octonions have 8 coordinates");
        let mut o = Octonion::zero();
        o.coords.copy_from_slice(v.coords());
        o
    }

    pub fn to_vector(&self) -> QVector {
        QVector::new(self.coords.to_vec())
    }

    pub fn scale(&self, c: Frac) -> Octonion {
        let mut o = *self;
        o.coords.iter_mut().for_each(|x| *x *= c);
        o
    }

    /// Swaps the coefficients of `v1` and `v8` and negates the rest.
    pub fn conjugate(&self) -> Octonion {
        let mut o = -*self;
        o.coords[0] = self.coords[7];
        o.coords[7] = self.coords[0];
        o
    }
}

impl Add for Octonion {
    type Output = Octonion;
    fn add(mut self, rhs: Octonion) -> Octonion {
        for (a, b) in self.coords.iter_mut().zip(rhs.coords) {
            *a += b;
        }
        self
    }
}

impl Sub for Octonion {
    type Output = Octonion;
    fn sub(self, rhs: Octonion) -> Octonion {
        self + (-rhs)
    }
}

impl Neg for Octonion {
    type Output = Octonion;
    fn neg(self) -> Octonion {
        self.scale(Frac::from_int(-1))
    }
}

impl Mul for Octonion {
    type Output = Octonion;
    fn mul(self, rhs: Octonion) -> Octonion {
        multiply(&self, &rhs)
    }
}

/// Bilinear extension of the table.
pub fn multiply(x: &Octonion, y: &Octonion) -> Octonion {
    let mut out = Octonion::zero();
    for (i, &xi) in x.coords.iter().enumerate() {
        if xi.is_zero() {
            continue;
        }
        for (j, &yj) in y.coords.iter().enumerate() {
            let code = TABLE[i][j];
            if code == 0 || yj.is_zero() {
                continue;
            }
            let k = code.unsigned_abs() as usize - 1;
            let term = xi * yj;
            if code > 0 {
                out.coords[k] += term;
            } else {
                out.coords[k] -= term;
            }
        }
    }
    out
}

/// The polar form of the norm: `⟨v_i, v_j⟩ = 1` when `i + j = 9`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilinearForm {
    pub matrix: QMatrix,
}

impl Default for BilinearForm {
    fn default() -> Self {
        let mut m = QMatrix::zeros(8, 8);
        for i in 0..8 {
            m[(i, 7 - i)] = Frac::ONE;
        }
        BilinearForm { matrix: m }
    }
}

impl BilinearForm {
    pub fn pair(&self, x: &Octonion, y: &Octonion) -> Frac {
        let my = self.matrix.mul_vec(&y.to_vector());
        x.to_vector().dot(&my)
    }

    pub fn is_symmetric(&self) -> bool {
        self.matrix.transpose() == self.matrix
    }

    /// `⟨m x, y⟩ + ⟨x, m y⟩ = 0` for all `x, y`.
    pub fn is_skew(&self, m: &QMatrix) -> bool {
        let g = &self.matrix;
        (&(&m.transpose() * g) + &(g * m))
            .entries()
            .iter()
            .all(|x| x.is_zero())
    }
}

/// Applies a linear map to an octonion.
pub fn apply(m: &QMatrix, x: &Octonion) -> Octonion {
    Octonion::from_vector(&m.mul_vec(&x.to_vector()))
}

/// The matrix of `x ↦ f(x)`, column by column.
fn matrix_of(f: impl Fn(&Octonion) -> Octonion) -> QMatrix {
    let cols: Vec<QVector> = (0..8).map(|j| f(&Octonion::basis(j)).to_vector()).collect();
    QMatrix::from_row_vectors(&cols).transpose()
}

pub fn left_multiplication(a: &Octonion) -> QMatrix {
    matrix_of(|x| multiply(a, x))
}

pub fn right_multiplication(a: &Octonion) -> QMatrix {
    matrix_of(|x| multiply(x, a))
}

/// `x ↦ ⟨x,a⟩b − ⟨x,b⟩a`.
pub fn t_ab(a: &Octonion, b: &Octonion) -> QMatrix {
    let form = BilinearForm::default();
    matrix_of(|x| b.scale(form.pair(x, a)) - a.scale(form.pair(x, b)))
}

/// The partner of `t_ab` acting on the left factor:
/// `½(l_b l_ā − l_a l_b̄)`.
pub fn left_partner(a: &Octonion, b: &Octonion) -> QMatrix {
    let (la, lb) = (left_multiplication(a), left_multiplication(b));
    let (la_bar, lb_bar) = (
        left_multiplication(&a.conjugate()),
        left_multiplication(&b.conjugate()),
    );
    (&(&lb * &la_bar) - &(&la * &lb_bar)).scale(Frac::new(1, 2))
}

/// The partner acting on the right factor: `½(r_b r_ā − r_a r_b̄)`.
pub fn right_partner(a: &Octonion, b: &Octonion) -> QMatrix {
    let (ra, rb) = (right_multiplication(a), right_multiplication(b));
    let (ra_bar, rb_bar) = (
        right_multiplication(&a.conjugate()),
        right_multiplication(&b.conjugate()),
    );
    (&(&rb * &ra_bar) - &(&ra * &rb_bar)).scale(Frac::new(1, 2))
}

/// `diag(p1..p4, −p1..−p4)` in the `e` basis, as a matrix on `v`
/// coordinates.
pub fn cartan_element(p: &[Frac; 4]) -> QMatrix {
    let mut m = QMatrix::zeros(8, 8);
    for k in 0..4 {
        let (i, j) = (E_TO_V[k], E_TO_V[k + 4]);
        m[(i, i)] = p[k];
        m[(j, j)] = -p[k];
    }
    m
}

/// Negates the first parameter.
pub fn hat(p: &[Frac; 4]) -> [Frac; 4] {
    [-p[0], p[1], p[2], p[3]]
}

/// The pairs `x_i = p_i(e_i + e_{4+i})`, `y_i = (e_i − e_{4+i})/2` whose
/// `t_{x_i,y_i}` sum to the Cartan element of `p`.
pub fn cartan_generators(p: &[Frac; 4]) -> Vec<(Octonion, Octonion)> {
    let half = Frac::new(1, 2);
    (0..4)
        .map(|i| {
            let x = (Octonion::e(i) + Octonion::e(i + 4)).scale(p[i]);
            let y = (Octonion::e(i) - Octonion::e(i + 4)).scale(half);
            (x, y)
        })
        .collect()
}

fn params_image(m: &QMatrix, p: &[Frac; 4]) -> [Frac; 4] {
    let v = m.mul_vec(&QVector::new(p.to_vec()));
    [v[0], v[1], v[2], v[3]]
}

/// A related triple of Cartan elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleMaps {
    pub t1: QMatrix,
    pub t2: QMatrix,
    pub t3: QMatrix,
}

impl TripleMaps {
    /// `t1` from the parameters, `t2` and `t3` from their images under the
    /// two triality matrices of the F4 model.
    pub fn from_params(p: &[Frac; 4]) -> TripleMaps {
        TripleMaps {
            t1: cartan_element(p),
            t2: cartan_element(&params_image(&triality_a(), p)),
            t3: cartan_element(&params_image(&triality_b(), p)),
        }
    }

    /// Sums the triples attached to each `t_{x_i,y_i}`; uses the table only.
    pub fn from_generators(p: &[Frac; 4]) -> TripleMaps {
        let zero = QMatrix::zeros(8, 8);
        let mut out = TripleMaps {
            t1: zero.clone(),
            t2: zero.clone(),
            t3: zero,
        };
        for (x, y) in cartan_generators(p) {
            out.t1 = &out.t1 + &t_ab(&x, &y);
            out.t2 = &out.t2 + &left_partner(&x, &y);
            out.t3 = &out.t3 + &right_partner(&x, &y);
        }
        out
    }

    pub fn add(&self, other: &TripleMaps) -> TripleMaps {
        TripleMaps {
            t1: &self.t1 + &other.t1,
            t2: &self.t2 + &other.t2,
            t3: &self.t3 + &other.t3,
        }
    }

    /// First basis pair `(i, j)` where `t1(v_i v_j) ≠ t2(v_i) v_j + v_i t3(v_j)`.
    pub fn first_failure(&self) -> Option<(usize, usize)> {
        (0..8)
            .flat_map(|i| (0..8).map(move |j| (i, j)))
            .find(|&(i, j)| {
                let (x, y) = (Octonion::basis(i), Octonion::basis(j));
                let lhs = apply(&self.t1, &(x * y));
                let rhs = apply(&self.t2, &x) * y + x * apply(&self.t3, &y);
                lhs != rhs
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DerivationCheck {
    pub passed: bool,
    /// 0-based indices into `v1..v8`.
    pub failing_pair: Option<(usize, usize)>,
}

/// Builds the triple for `p` and tests the derivation identity on all 64
/// basis pairs.
pub fn check_derivation(p: &[Frac; 4]) -> DerivationCheck {
    let failing_pair = TripleMaps::from_params(p).first_failure();
    DerivationCheck {
        passed: failing_pair.is_none(),
        failing_pair,
    }
}

/// Seeded random parameter vectors with small numerators and denominators.
pub fn sample_params(seed: u64, count: usize) -> Vec<[Frac; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| std::array::from_fn(|_| Frac::new(rng.gen_range(-20..=20), rng.gen_range(1..=12))))
        .collect()
}
