//! Stabilizers of torus and Cartan points, exhaustive classification of
//! isotropy subgroups over rational grids, and lattice-refinement probes.
//!
//! The exact path ([`stabilizer`]) works directly with rationals. The grid
//! scan behind [`classify`] switches to integer coordinates: in torus mode a
//! point is written in the lattice basis, so the lattice becomes `ℤ^r`, each
//! Weyl element becomes an integer matrix, and grid points become integer
//! vectors modulo a common modulus `N`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactlin::{hermite_normal_form, Frac, Lattice, QMatrix, QVector};
use crate::weyl::{
    are_conjugate, are_simultaneously_conjugate, reflection_closure, subgroup_from_ids,
    Fingerprint, Subgroup, WeylGroup,
};

/// Default denominator schedule.
pub const DEFAULT_SCHEDULE: [u64; 4] = [4, 8, 12, 24];

/// Default bound on the number of grid points scanned at one level.
pub const DEFAULT_GRID_LIMIT: u128 = 100_000_000;

/// Exact stabilizer scans fan out to rayon above this group order.
const PARALLEL_STABILIZER_THRESHOLD: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Action on a maximal torus: points modulo a lattice.
    Torus,
    /// Linear action on a Cartan subalgebra.
    Linear,
}

/// A Weyl group acting on a rational parameter space, optionally cut down to
/// the hyperplane `f·v = 0`, and in torus mode taken modulo a lattice.
#[derive(Debug, Clone)]
pub struct ActionSpace {
    group: Arc<WeylGroup>,
    mode: Mode,
    lattice: Option<Lattice>,
    constraint: Option<QVector>,
    reflection_check: bool,
}

impl ActionSpace {
    pub fn new(
        group: Arc<WeylGroup>,
        mode: Mode,
        lattice: Option<Lattice>,
        constraint: Option<QVector>,
    ) -> Result<ActionSpace> {
        let dim = group.dim();
        if let Some(f) = &constraint {
            if f.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: f.dim(),
                });
            }
            for &g in group.generator_ids() {
                // w preserves {f·v = 0} iff wᵀf is a multiple of f.
                let image = group.element(g).transpose().mul_vec(f);
                let pair = QMatrix::from_row_vectors(&[f.clone(), image]);
                if pair.rank() != 1 {
                    return Err(Error::ConstraintViolation);
                }
            }
        }
        let rank = dim - usize::from(constraint.is_some());
        match (mode, &lattice) {
            (Mode::Torus, None) => return Err(Error::MissingLattice),
            (_, Some(l)) => {
                if l.ambient_dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: l.ambient_dim(),
                    });
                }
                if l.rank() != rank {
                    return Err(Error::DimensionMismatch {
                        expected: rank,
                        got: l.rank(),
                    });
                }
                if let Some(f) = &constraint {
                    if l.generator_vectors().iter().any(|g| !f.dot(g).is_zero()) {
                        return Err(Error::ConstraintViolation);
                    }
                }
                for &g in group.generator_ids() {
                    if !l.is_invariant_under(group.element(g))? {
                        return Err(Error::LatticeNotInvariant);
                    }
                }
            }
            (Mode::Linear, None) => {}
        }
        Ok(ActionSpace {
            group,
            mode,
            lattice: if mode == Mode::Torus { lattice } else { None },
            constraint,
            reflection_check: true,
        })
    }

    /// Enables or disables the check that every isotropy subgroup found by
    /// [`classify`] is generated by reflections. It holds for coroot lattices
    /// and linear actions; coarser lattices violate it by design.
    pub fn with_reflection_check(mut self, on: bool) -> ActionSpace {
        self.reflection_check = on;
        self
    }

    pub fn group(&self) -> &Arc<WeylGroup> {
        &self.group
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn lattice(&self) -> Option<&Lattice> {
        self.lattice.as_ref()
    }

    pub fn constraint(&self) -> Option<&QVector> {
        self.constraint.as_ref()
    }

    pub fn reflection_check(&self) -> bool {
        self.reflection_check
    }

    pub fn ambient_dim(&self) -> usize {
        self.group.dim()
    }

    /// Dimension of the (constrained) parameter space.
    pub fn rank(&self) -> usize {
        self.ambient_dim() - usize::from(self.constraint.is_some())
    }

    /// Checks dimension and hyperplane constraint of a point.
    pub fn check_point(&self, p: &QVector) -> Result<()> {
        if p.dim() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                got: p.dim(),
            });
        }
        if let Some(f) = &self.constraint {
            if !f.dot(p).is_zero() {
                return Err(Error::ConstraintViolation);
            }
        }
        Ok(())
    }

    /// Whether `w·p` and `p` define the same point of the space.
    fn fixes(&self, w: &QMatrix, p: &QVector) -> Result<bool> {
        let image = w.mul_vec(p);
        match &self.lattice {
            None => Ok(image == *p),
            Some(l) => l.contains(&(&image - p)),
        }
    }
}

/// `{w : w·p = p}` (linear) or `{w : w·p − p ∈ L}` (torus), computed exactly.
pub fn stabilizer(space: &ActionSpace, point: &QVector) -> Result<Subgroup> {
    space.check_point(point)?;
    let group = &space.group;
    let n = group.order() as u32;
    let test = |w: u32| {
        space
            .fixes(group.element(w), point)
            .map(|ok| ok.then_some(w))
    };
    let ids: Vec<u32> = if group.order() < PARALLEL_STABILIZER_THRESHOLD {
        (0..n).map(test).collect::<Result<Vec<_>>>()?
    } else {
        (0..n)
            .into_par_iter()
            .map(test)
            .collect::<Result<Vec<_>>>()?
    }
    .into_iter()
    .flatten()
    .collect();
    subgroup_from_ids(group, &ids)
}

/// Dimension of the common fixed subspace of `H` inside the constrained
/// parameter space.
pub fn fixed_space_dimension(space: &ActionSpace, h: &Subgroup) -> usize {
    let group = &space.group;
    let dim = group.dim();
    let id = QMatrix::identity(dim);
    let mut rows: Vec<QVector> = Vec::new();
    for &g in h.generators() {
        rows.extend((group.element(g) - &id).row_vectors());
    }
    if let Some(f) = &space.constraint {
        rows.push(f.clone());
    }
    if rows.is_empty() {
        return dim;
    }
    dim - QMatrix::from_row_vectors(&rows).rank()
}

/// One conjugacy class of isotropy subgroups.
#[derive(Debug, Clone)]
pub struct OrbitTypeClass {
    pub representative: Subgroup,
    pub fixed_dim: usize,
    /// A grid point whose stabilizer is `representative`.
    pub witness: QVector,
    /// The grid level at which the class first appeared.
    pub first_denominator: u64,
    pub descriptor: Option<String>,
}

impl OrbitTypeClass {
    pub fn fingerprint(&self) -> &Fingerprint {
        self.representative.fingerprint()
    }

    pub fn order(&self) -> usize {
        self.representative.order()
    }

    /// Trivial stabilizer.
    pub fn strongly_regular(&self) -> bool {
        self.representative.is_trivial()
    }
}

#[derive(Debug, Clone)]
pub struct ClassificationReport {
    /// Pairwise non-conjugate classes, sorted by order (descending), then
    /// fingerprint digest, then witness.
    pub classes: Vec<OrbitTypeClass>,
    pub denominators_used: Vec<u64>,
    /// Grid points scanned at each level.
    pub grid_sizes: Vec<u128>,
    /// Classes first found at each level.
    pub new_per_level: Vec<usize>,
    /// The last level found nothing new.
    pub stable: bool,
    pub formula_value: Option<u128>,
    pub agrees_with_formula: Option<bool>,
}

impl ClassificationReport {
    pub fn count(&self) -> usize {
        self.classes.len()
    }

    pub fn set_formula(&mut self, value: u128) {
        self.formula_value = Some(value);
        self.agrees_with_formula = Some(value == self.classes.len() as u128);
    }

    /// Class orders, sorted descending.
    pub fn order_multiset(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.classes.iter().map(|c| c.order()).collect();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassifyOptions {
    pub grid_limit: u128,
    /// Points per parallel work item.
    pub chunk_size: u64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            grid_limit: DEFAULT_GRID_LIMIT,
            chunk_size: 4096,
        }
    }
}

/// A schedule must be non-empty, strictly increasing, and every entry must
/// divide the last one, so each level's grid is contained in the final grid.
pub fn validate_schedule(schedule: &[u64]) -> Result<()> {
    let Some(&last) = schedule.last() else {
        return Err(Error::InvalidSchedule("empty".into()));
    };
    if schedule.contains(&0) {
        return Err(Error::InvalidSchedule(
            "denominators must be positive".into(),
        ));
    }
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSchedule(
            "denominators must be strictly increasing".into(),
        ));
    }
    if let Some(d) = schedule.iter().find(|&&d| last % d != 0) {
        return Err(Error::InvalidSchedule(format!(
            "{d} does not divide {last}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Integer engines

/// Torus action in lattice coordinates: `x = Gᵀc`, `c = K·x`, and each `w`
/// becomes the integer matrix `C_w = K·w·Gᵀ`.
struct TorusEngine {
    r: usize,
    n_elems: usize,
    gt: QMatrix,
    k: QMatrix,
    cw: Vec<i64>,
    /// Integer basis of `ℤ^m ∩ V` as columns in ambient coordinates.
    int_basis: Vec<QVector>,
    gen_ids: Vec<u32>,
    /// Optional second lattice test: `Q·δ ≡ 0 (mod N·q)`.
    coarse: Option<(Vec<i64>, i64)>,
}

/// One level of the torus grid: the points of `(1/N)·Z` modulo `ℤ^r`, where
/// `Z` has upper-triangular basis `h`.
struct TorusGrid {
    modulus: i64,
    h: Vec<Vec<i64>>,
    radix: Vec<i64>,
    count: u128,
}

fn integer_kernel_basis(space: &ActionSpace) -> Vec<QVector> {
    let m = space.ambient_dim();
    match space.constraint() {
        None => (0..m).map(|i| QVector::unit(m, i)).collect(),
        Some(f) => {
            let den = f.common_denominator();
            let col: Vec<Vec<i64>> = f
                .coords()
                .iter()
                .map(|&x| vec![(x * Frac::from_int(den)).numer()])
                .collect();
            hermite_normal_form(&col)
                .left_kernel()
                .into_iter()
                .map(|u| QVector::from_ints(&u))
                .collect()
        }
    }
}

impl TorusEngine {
    fn new(space: &ActionSpace, lattice: &Lattice) -> Result<TorusEngine> {
        let group = space.group();
        let g = lattice.generators();
        let r = g.rows();
        let gt = g.transpose();
        let (_, pivots) = g.rref();
        let mut gp = QMatrix::zeros(r, r);
        for (j, &p) in pivots.iter().enumerate() {
            for i in 0..r {
                gp[(j, i)] = g[(i, p)];
            }
        }
        let gp_inv = gp.inverse()?;
        let mut k = QMatrix::zeros(r, g.cols());
        for i in 0..r {
            for (j, &p) in pivots.iter().enumerate() {
                k[(i, p)] = gp_inv[(i, j)];
            }
        }
        let mut cw = Vec::with_capacity(group.order() * r * r);
        for w in group.elements() {
            let c = &(&k * w) * &gt;
            cw.extend(c.scaled_integers(1).ok_or(Error::LatticeNotInvariant)?);
        }
        Ok(TorusEngine {
            r,
            n_elems: group.order(),
            gt,
            k,
            cw,
            int_basis: integer_kernel_basis(space),
            gen_ids: group.generator_ids().to_vec(),
            coarse: None,
        })
    }

    /// Adds a coarser lattice test. `coarse` must contain the engine lattice.
    fn with_coarse(mut self, coarse: &Lattice) -> Result<TorusEngine> {
        // Coarse basis in fine lattice coordinates, then its inverse.
        let cols: Vec<QVector> = coarse
            .generator_vectors()
            .iter()
            .map(|v| self.k.mul_vec(v))
            .collect();
        let b = QMatrix::from_row_vectors(&cols).transpose();
        let binv = b.inverse()?;
        let q = binv.common_denominator();
        let qm = binv.scaled_integers(q).expect("common denominator");
        self.coarse = Some((qm, q));
        Ok(self)
    }

    fn c(&self, w: usize) -> &[i64] {
        &self.cw[w * self.r * self.r..(w + 1) * self.r * self.r]
    }

    fn grid(&self, d: u64) -> Result<TorusGrid> {
        let r = self.r;
        let dd = Frac::from_int(d as i64);
        let mut gens: Vec<QVector> = self
            .int_basis
            .iter()
            .map(|b| self.k.mul_vec(b).scale(dd.recip()))
            .collect();
        gens.extend((0..r).map(|i| QVector::unit(r, i)));
        let n0 = gens
            .iter()
            .fold(1i64, |acc, v| num_integer::lcm(acc, v.common_denominator()));
        let scale = Frac::from_int(n0);
        let mut rows: Vec<Vec<i64>> = gens
            .iter()
            .map(|v| v.coords().iter().map(|&x| (x * scale).numer()).collect())
            .collect();
        // Saturate under the group so the grid is W-stable.
        let mut h = hermite_normal_form(&rows).h[..r].to_vec();
        loop {
            rows = h.clone();
            for &g in &self.gen_ids {
                let c = self.c(g as usize);
                for v in &h {
                    rows.push(
                        (0..r)
                            .map(|i| (0..r).map(|j| c[i * r + j] * v[j]).sum())
                            .collect(),
                    );
                }
            }
            let next = hermite_normal_form(&rows).h[..r].to_vec();
            if next == h {
                break;
            }
            h = next;
        }
        let radix: Vec<i64> = (0..r).map(|i| n0 / h[i][i]).collect();
        let count = radix.iter().map(|&x| x as u128).product();
        Ok(TorusGrid {
            modulus: n0,
            h,
            radix,
            count,
        })
    }

    fn point(&self, grid: &TorusGrid, mut idx: u64, a: &mut [i64]) {
        let r = self.r;
        a.iter_mut().for_each(|x| *x = 0);
        for i in (0..r).rev() {
            let k = (idx % grid.radix[i] as u64) as i64;
            idx /= grid.radix[i] as u64;
            for (x, h) in a.iter_mut().zip(&grid.h[i]) {
                *x += k * h;
            }
        }
        for x in a.iter_mut() {
            *x = x.rem_euclid(grid.modulus);
        }
    }

    /// Lexicographically minimal among its images under the group.
    fn is_canonical(&self, a: &[i64], n: i64) -> bool {
        let r = self.r;
        for w in 1..self.n_elems {
            let c = self.c(w);
            for i in 0..r {
                let row = &c[i * r..(i + 1) * r];
                let b = row
                    .iter()
                    .zip(a)
                    .map(|(x, y)| x * y)
                    .sum::<i64>()
                    .rem_euclid(n);
                if b < a[i] {
                    return false;
                }
                if b > a[i] {
                    break;
                }
            }
        }
        true
    }

    fn fixes(&self, w: usize, a: &[i64], n: i64, delta: &mut [i64]) -> bool {
        let r = self.r;
        let c = self.c(w);
        for i in 0..r {
            let row = &c[i * r..(i + 1) * r];
            delta[i] = row.iter().zip(a).map(|(x, y)| x * y).sum::<i64>() - a[i];
            if delta[i] % n != 0 && self.coarse.is_none() {
                return false;
            }
        }
        match &self.coarse {
            None => true,
            Some((q, qd)) => {
                let m = n * qd;
                (0..r).all(|i| {
                    let s: i64 = (0..r).map(|j| q[i * r + j] * delta[j]).sum();
                    s % m == 0
                })
            }
        }
    }

    fn stabilizer_ids(&self, a: &[i64], n: i64) -> Vec<u32> {
        let mut delta = vec![0i64; self.r];
        (0..self.n_elems)
            .filter(|&w| self.fixes(w, a, n, &mut delta))
            .map(|w| w as u32)
            .collect()
    }

    fn witness(&self, a: &[i64], n: i64) -> QVector {
        let c = QVector::new(a.iter().map(|&x| Frac::new(x, n)).collect());
        self.gt.mul_vec(&c)
    }
}

/// Linear action on integer points `p ∈ [−D, D]^m` of the constrained space;
/// `s·w` is integral for every `w`.
struct LinearEngine {
    m: usize,
    n_elems: usize,
    s: i64,
    sw: Vec<i64>,
    /// `(index of solved coordinate, integer functional)` for hyperplanes.
    solve: Option<(usize, Vec<i64>)>,
}

struct LinearGrid {
    bound: i64,
    free: usize,
    count: u128,
}

impl LinearEngine {
    fn new(space: &ActionSpace) -> LinearEngine {
        let group = space.group();
        let m = group.dim();
        let mut sw = Vec::with_capacity(group.order() * m * m);
        for w in 0..group.order() as u32 {
            sw.extend_from_slice(group.scaled_element(w));
        }
        let solve = space.constraint().map(|f| {
            let den = f.common_denominator();
            let ints: Vec<i64> = f
                .coords()
                .iter()
                .map(|&x| (x * Frac::from_int(den)).numer())
                .collect();
            let j = ints
                .iter()
                .rposition(|&x| x != 0)
                .expect("nonzero functional");
            (j, ints)
        });
        LinearEngine {
            m,
            n_elems: group.order(),
            s: group.scale(),
            sw,
            solve,
        }
    }

    fn grid(&self, d: u64) -> LinearGrid {
        let free = self.m - usize::from(self.solve.is_some());
        let side = 2 * d as u128 + 1;
        LinearGrid {
            bound: d as i64,
            free,
            count: side.pow(free as u32),
        }
    }

    fn point(&self, grid: &LinearGrid, mut idx: u64, p: &mut [i64]) -> bool {
        let side = 2 * grid.bound as u64 + 1;
        let solved = self.solve.as_ref().map(|(j, _)| *j);
        for i in (0..self.m).rev() {
            if Some(i) == solved {
                continue;
            }
            p[i] = (idx % side) as i64 - grid.bound;
            idx /= side;
        }
        if let Some((j, f)) = &self.solve {
            let rest: i64 = (0..self.m).filter(|&i| i != *j).map(|i| f[i] * p[i]).sum();
            if rest % f[*j] != 0 {
                return false;
            }
            p[*j] = -rest / f[*j];
            if p[*j].abs() > grid.bound {
                return false;
            }
        }
        debug_assert_eq!(grid.free, self.m - usize::from(solved.is_some()));
        true
    }

    fn w(&self, w: usize) -> &[i64] {
        &self.sw[w * self.m * self.m..(w + 1) * self.m * self.m]
    }

    /// Lexicographically minimal among its images that are grid points.
    fn is_canonical(&self, p: &[i64], bound: i64) -> bool {
        let m = self.m;
        'elems: for w in 1..self.n_elems {
            let sw = self.w(w);
            let mut smaller = false;
            for i in 0..m {
                let raw: i64 = sw[i * m..(i + 1) * m]
                    .iter()
                    .zip(p)
                    .map(|(x, y)| x * y)
                    .sum();
                if raw % self.s != 0 {
                    continue 'elems;
                }
                let b = raw / self.s;
                if b.abs() > bound {
                    continue 'elems;
                }
                if !smaller {
                    if b > p[i] {
                        continue 'elems;
                    }
                    if b < p[i] {
                        smaller = true;
                    }
                }
            }
            if smaller {
                return false;
            }
        }
        true
    }

    fn stabilizer_ids(&self, p: &[i64]) -> Vec<u32> {
        let m = self.m;
        (0..self.n_elems)
            .filter(|&w| {
                let sw = self.w(w);
                (0..m).all(|i| {
                    sw[i * m..(i + 1) * m]
                        .iter()
                        .zip(p)
                        .map(|(x, y)| x * y)
                        .sum::<i64>()
                        == self.s * p[i]
                })
            })
            .map(|w| w as u32)
            .collect()
    }

    fn witness(&self, p: &[i64], bound: i64) -> QVector {
        QVector::new(p.iter().map(|&x| Frac::new(x, bound)).collect())
    }
}

enum Engine {
    Torus(TorusEngine),
    Linear(LinearEngine),
}

enum Grid {
    Torus(TorusGrid),
    Linear(LinearGrid),
}

impl Grid {
    fn count(&self) -> u128 {
        match self {
            Grid::Torus(g) => g.count,
            Grid::Linear(g) => g.count,
        }
    }
}

impl Engine {
    fn new(space: &ActionSpace) -> Result<Engine> {
        Ok(match space.lattice() {
            Some(l) => Engine::Torus(TorusEngine::new(space, l)?),
            None => Engine::Linear(LinearEngine::new(space)),
        })
    }

    fn dim(&self) -> usize {
        match self {
            Engine::Torus(e) => e.r,
            Engine::Linear(e) => e.m,
        }
    }

    fn grid(&self, d: u64) -> Result<Grid> {
        Ok(match self {
            Engine::Torus(e) => Grid::Torus(e.grid(d)?),
            Engine::Linear(e) => Grid::Linear(e.grid(d)),
        })
    }

    /// Decodes grid point `idx` into `buf`; false if `idx` is not a point.
    fn point(&self, grid: &Grid, idx: u64, buf: &mut [i64]) -> bool {
        match (self, grid) {
            (Engine::Torus(e), Grid::Torus(g)) => {
                e.point(g, idx, buf);
                true
            }
            (Engine::Linear(e), Grid::Linear(g)) => e.point(g, idx, buf),
            _ => unreachable!("engine and grid kinds match"),
        }
    }

    fn is_canonical(&self, grid: &Grid, p: &[i64]) -> bool {
        match (self, grid) {
            (Engine::Torus(e), Grid::Torus(g)) => e.is_canonical(p, g.modulus),
            (Engine::Linear(e), Grid::Linear(g)) => e.is_canonical(p, g.bound),
            _ => unreachable!("engine and grid kinds match"),
        }
    }

    fn stabilizer_ids(&self, grid: &Grid, p: &[i64]) -> Vec<u32> {
        match (self, grid) {
            (Engine::Torus(e), Grid::Torus(g)) => e.stabilizer_ids(p, g.modulus),
            (Engine::Linear(e), Grid::Linear(_)) => e.stabilizer_ids(p),
            _ => unreachable!("engine and grid kinds match"),
        }
    }

    fn witness(&self, grid: &Grid, p: &[i64]) -> QVector {
        match (self, grid) {
            (Engine::Torus(e), Grid::Torus(g)) => e.witness(p, g.modulus),
            (Engine::Linear(e), Grid::Linear(g)) => e.witness(p, g.bound),
            _ => unreachable!("engine and grid kinds match"),
        }
    }
}

/// Scans one grid level and returns each distinct stabilizer (as sorted ids)
/// with the smallest grid index realizing it, ordered by that index.
fn scan_level(engine: &Engine, grid: &Grid, opts: &ClassifyOptions) -> Vec<(u64, Vec<u32>)> {
    let count = grid.count() as u64;
    let chunk = opts.chunk_size.max(1);
    let chunks = count.div_ceil(chunk);
    let dim = engine.dim();
    let partial: Vec<FxHashMap<Vec<u32>, u64>> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut local: FxHashMap<Vec<u32>, u64> = FxHashMap::default();
            let mut buf = vec![0i64; dim];
            for idx in ci * chunk..((ci + 1) * chunk).min(count) {
                if !engine.point(grid, idx, &mut buf) || !engine.is_canonical(grid, &buf) {
                    continue;
                }
                local
                    .entry(engine.stabilizer_ids(grid, &buf))
                    .or_insert(idx);
            }
            local
        })
        .collect();
    let mut merged: FxHashMap<Vec<u32>, u64> = FxHashMap::default();
    for part in partial {
        for (k, idx) in part {
            merged
                .entry(k)
                .and_modify(|e| *e = (*e).min(idx))
                .or_insert(idx);
        }
    }
    let mut out: Vec<(u64, Vec<u32>)> = merged.into_iter().map(|(k, i)| (i, k)).collect();
    out.sort_unstable();
    out
}

/// Incrementally builds a list of pairwise non-conjugate subgroups.
struct ClassSet<'g> {
    group: &'g WeylGroup,
    known: FxHashMap<Vec<u32>, usize>,
    buckets: FxHashMap<Fingerprint, Vec<usize>>,
    reps: Vec<Subgroup>,
}

impl<'g> ClassSet<'g> {
    fn new(group: &'g WeylGroup) -> ClassSet<'g> {
        ClassSet {
            group,
            known: FxHashMap::default(),
            buckets: FxHashMap::default(),
            reps: Vec::new(),
        }
    }

    /// Returns the class index and whether it is new.
    fn insert(&mut self, members: Vec<u32>) -> Result<(usize, bool)> {
        if let Some(&c) = self.known.get(&members) {
            return Ok((c, false));
        }
        let sub = subgroup_from_ids(self.group, &members)?;
        let bucket = self.buckets.entry(sub.fingerprint().clone()).or_default();
        for &c in bucket.iter() {
            if are_conjugate(self.group, &self.reps[c], &sub)?.is_some() {
                self.known.insert(members, c);
                return Ok((c, false));
            }
        }
        let c = self.reps.len();
        bucket.push(c);
        self.reps.push(sub);
        self.known.insert(members, c);
        Ok((c, true))
    }
}

fn check_grid_size(grid: &Grid, opts: &ClassifyOptions) -> Result<()> {
    if grid.count() > opts.grid_limit {
        return Err(Error::GridTooLarge {
            size: grid.count(),
            limit: opts.grid_limit,
        });
    }
    Ok(())
}

pub fn classify(space: &ActionSpace, schedule: &[u64]) -> Result<ClassificationReport> {
    classify_with(space, schedule, &ClassifyOptions::default())
}

/// Enumerates the grid at each level of `schedule`, keeping only
/// lexicographically minimal orbit representatives, and collects the
/// stabilizers up to conjugacy.
pub fn classify_with(
    space: &ActionSpace,
    schedule: &[u64],
    opts: &ClassifyOptions,
) -> Result<ClassificationReport> {
    validate_schedule(schedule)?;
    let engine = Engine::new(space)?;
    let grids: Vec<Grid> = schedule
        .iter()
        .map(|&d| engine.grid(d))
        .collect::<Result<_>>()?;
    for g in &grids {
        check_grid_size(g, opts)?;
    }
    let group = space.group().as_ref();
    let mut set = ClassSet::new(group);
    let mut witnesses: Vec<(QVector, u64)> = Vec::new();
    let mut new_per_level = Vec::new();
    let mut buf = vec![0i64; engine.dim()];
    for (grid, &d) in grids.iter().zip(schedule) {
        let mut fresh = 0;
        for (idx, members) in scan_level(&engine, grid, opts) {
            let (_, is_new) = set.insert(members)?;
            if is_new {
                engine.point(grid, idx, &mut buf);
                witnesses.push((engine.witness(grid, &buf), d));
                fresh += 1;
            }
        }
        new_per_level.push(fresh);
    }
    let mut classes = Vec::with_capacity(set.reps.len());
    for (rep, (witness, first_denominator)) in set.reps.into_iter().zip(witnesses) {
        if space.reflection_check() {
            let rc = reflection_closure(group, &rep)?;
            if rc != rep {
                return Err(Error::ReflectionClosureViolated {
                    witness: witness.to_string(),
                    order: rep.order(),
                    closure_order: rc.order(),
                });
            }
        }
        classes.push(OrbitTypeClass {
            fixed_dim: fixed_space_dimension(space, &rep),
            representative: rep,
            witness,
            first_denominator,
            descriptor: None,
        });
    }
    sort_classes(&mut classes);
    Ok(ClassificationReport {
        classes,
        denominators_used: schedule.to_vec(),
        grid_sizes: grids.iter().map(|g| g.count()).collect(),
        stable: schedule.len() >= 2 && new_per_level.last() == Some(&0),
        new_per_level,
        formula_value: None,
        agrees_with_formula: None,
    })
}

fn sort_classes(classes: &mut [OrbitTypeClass]) {
    classes.sort_by_cached_key(|c| {
        (
            std::cmp::Reverse(c.order()),
            c.fingerprint().digest(),
            c.witness.clone(),
        )
    });
}

/// A grid point whose stabilizer grows when the lattice is coarsened.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JumpPoint {
    pub point: QVector,
    pub fine_order: usize,
    pub coarse_order: usize,
    pub denominator: u64,
}

#[derive(Debug, Clone)]
pub struct LatticeJumpReport {
    /// Distinct jump points (modulo the fine lattice), sorted.
    pub jumps: Vec<JumpPoint>,
    /// Isotropy classes for the fine lattice.
    pub fine_count: usize,
    /// Isotropy classes for the coarse lattice.
    pub coarse_count: usize,
    /// Classes of pairs (coarse stabilizer, fine stabilizer) under
    /// simultaneous conjugation. A fine stabilizer is the Weyl group of the
    /// identity component of the centralizer in the coarse quotient, so this
    /// counts centralizer types of the quotient group.
    pub pair_count: usize,
}

/// Compares stabilizers for a lattice `fine` (the lattice of `fine_space`)
/// and a coarser W-invariant lattice containing it, over the fine grid.
pub fn compare_lattices(
    fine_space: &ActionSpace,
    coarse: &Lattice,
    schedule: &[u64],
) -> Result<LatticeJumpReport> {
    compare_lattices_with(fine_space, coarse, schedule, &ClassifyOptions::default())
}

pub fn compare_lattices_with(
    fine_space: &ActionSpace,
    coarse: &Lattice,
    schedule: &[u64],
    opts: &ClassifyOptions,
) -> Result<LatticeJumpReport> {
    validate_schedule(schedule)?;
    let fine = fine_space.lattice().ok_or(Error::MissingLattice)?;
    if coarse.ambient_dim() != fine.ambient_dim() || coarse.rank() != fine.rank() {
        return Err(Error::DimensionMismatch {
            expected: fine.rank(),
            got: coarse.rank(),
        });
    }
    if !fine.is_sublattice_of(coarse)? {
        return Err(Error::LatticesNotNested);
    }
    let coarse_space = ActionSpace::new(
        fine_space.group().clone(),
        Mode::Torus,
        Some(coarse.clone()),
        fine_space.constraint().cloned(),
    )?
    .with_reflection_check(false);

    let group = fine_space.group().as_ref();
    let engine = TorusEngine::new(fine_space, fine)?.with_coarse(coarse)?;
    let plain = TorusEngine::new(fine_space, fine)?;
    let mut jumps: BTreeMap<Vec<Frac>, JumpPoint> = BTreeMap::new();
    let mut pairs: FxHashMap<(Vec<u32>, Vec<u32>), ()> = FxHashMap::default();
    let mut pair_order: Vec<(Vec<u32>, Vec<u32>)> = Vec::new();
    for &d in schedule {
        let grid = engine.grid(d)?;
        if grid.count > opts.grid_limit {
            return Err(Error::GridTooLarge {
                size: grid.count,
                limit: opts.grid_limit,
            });
        }
        let n = grid.modulus;
        let mut a = vec![0i64; engine.r];
        for idx in 0..grid.count as u64 {
            engine.point(&grid, idx, &mut a);
            let fine_ids = plain.stabilizer_ids(&a, n);
            let coarse_ids = engine.stabilizer_ids(&a, n);
            debug_assert!(fine_ids.iter().all(|x| coarse_ids.binary_search(x).is_ok()));
            if coarse_ids.len() > fine_ids.len() {
                let key: Vec<Frac> = a.iter().map(|&x| Frac::new(x, n)).collect();
                jumps.entry(key).or_insert_with(|| JumpPoint {
                    point: engine.witness(&a, n),
                    fine_order: fine_ids.len(),
                    coarse_order: coarse_ids.len(),
                    denominator: d,
                });
            }
            let key = (coarse_ids, fine_ids);
            if pairs.insert(key.clone(), ()).is_none() {
                pair_order.push(key);
            }
        }
    }
    let mut pair_reps: Vec<(Subgroup, Subgroup)> = Vec::new();
    for (c, f) in pair_order {
        let hc = subgroup_from_ids(group, &c)?;
        let hf = subgroup_from_ids(group, &f)?;
        let mut seen = false;
        for (rc, rf) in &pair_reps {
            if are_simultaneously_conjugate(group, (rc, rf), (&hc, &hf))?.is_some() {
                seen = true;
                break;
            }
        }
        if !seen {
            pair_reps.push((hc, hf));
        }
    }
    let fine_count = classify_with(fine_space, schedule, opts)?.count();
    let coarse_count = classify_with(&coarse_space, schedule, opts)?.count();
    Ok(LatticeJumpReport {
        jumps: jumps.into_values().collect(),
        fine_count,
        coarse_count,
        pair_count: pair_reps.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::{close_generators, conjugate_subgroup, signed_permutation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(p: i64, d: i64) -> Frac {
        Frac::new(p, d)
    }

    fn a_space(n: usize, mode: Mode) -> ActionSpace {
        let m = n + 1;
        let gens: Vec<QMatrix> = (0..n)
            .map(|i| {
                let mut p: Vec<usize> = (0..m).collect();
                p.swap(i, i + 1);
                QMatrix::permutation(&p)
            })
            .collect();
        let lattice = Lattice::new(
            (0..n)
                .map(|i| {
                    let mut v = vec![0; m];
                    v[i] = 1;
                    v[i + 1] = -1;
                    QVector::from_ints(&v)
                })
                .collect(),
        )
        .unwrap();
        ActionSpace::new(
            Arc::new(close_generators(&gens).unwrap()),
            mode,
            Some(lattice),
            Some(QVector::from_ints(&vec![1; m])),
        )
        .unwrap()
    }

    fn b2_space(mode: Mode) -> ActionSpace {
        let g = close_generators(&[
            QMatrix::permutation(&[1, 0]),
            signed_permutation(&[0, 1], &[-1, 1]),
        ])
        .unwrap();
        let d2 = Lattice::new(vec![
            QVector::from_ints(&[1, -1]),
            QVector::from_ints(&[1, 1]),
        ])
        .unwrap();
        ActionSpace::new(Arc::new(g), mode, Some(d2), None).unwrap()
    }

    #[test]
    fn stabilizer_examples() {
        let a2 = a_space(2, Mode::Torus);
        assert_eq!(stabilizer(&a2, &QVector::zeros(3)).unwrap().order(), 6);
        let p = QVector::new(vec![q(1, 7), q(2, 7), q(-3, 7)]);
        assert!(stabilizer(&a2, &p).unwrap().is_trivial());
        let b2 = b2_space(Mode::Torus);
        let h = stabilizer(&b2, &QVector::new(vec![q(1, 2), q(1, 2)])).unwrap();
        assert_eq!(h.order(), 4);
        let g = b2.group();
        for m in [
            QMatrix::identity(2),
            QMatrix::permutation(&[1, 0]),
            QMatrix::identity(2).scale(Frac::from_int(-1)),
            signed_permutation(&[1, 0], &[-1, -1]),
        ] {
            assert!(h.contains(g.find(&m).unwrap()));
        }
    }

    #[test]
    fn constraint_violation_is_rejected() {
        let a2 = a_space(2, Mode::Linear);
        assert_eq!(
            stabilizer(&a2, &QVector::from_ints(&[1, 0, 0])).unwrap_err(),
            Error::ConstraintViolation
        );
    }

    #[test]
    fn fixed_dimension_examples() {
        let b2 = b2_space(Mode::Linear);
        let g = b2.group();
        assert_eq!(fixed_space_dimension(&b2, &g.trivial()), 2);
        assert_eq!(fixed_space_dimension(&b2, &g.whole()), 0);
        let swap = g.find(&QMatrix::permutation(&[1, 0])).unwrap();
        assert_eq!(
            fixed_space_dimension(&b2, &g.subgroup_generated_by(&[swap])),
            1
        );
        let a3 = a_space(3, Mode::Linear);
        assert_eq!(fixed_space_dimension(&a3, &a3.group().trivial()), 3);
    }

    #[test]
    fn schedule_validation() {
        assert!(validate_schedule(&[4, 8, 12, 24]).is_ok());
        assert!(validate_schedule(&[]).is_err());
        assert!(validate_schedule(&[8, 4]).is_err());
        assert!(validate_schedule(&[4, 4]).is_err());
        assert!(validate_schedule(&[5, 12]).is_err());
        assert!(validate_schedule(&[0, 4]).is_err());
    }

    #[test]
    fn a1_torus_two_classes() {
        let r = classify(&a_space(1, Mode::Torus), &[2, 4]).unwrap();
        assert_eq!(r.count(), 2);
        assert_eq!(r.order_multiset(), vec![2, 1]);
        // Denominator 2 only sees points fixed by the whole group.
        assert_eq!(r.new_per_level, vec![1, 1]);
        assert!(!r.stable);
        assert!(
            classify(&a_space(1, Mode::Torus), &[2, 4, 8])
                .unwrap()
                .stable
        );
    }

    #[test]
    fn b2_linear_and_torus_counts() {
        // Linear: 0, two kinds of reflection lines, generic.
        assert_eq!(
            classify(&b2_space(Mode::Linear), &[2, 4]).unwrap().count(),
            4
        );
        // Torus with D₂: whole group at 0 and (1,0); the rest as in the
        // pseudo-Levi list of B₂.
        let r = classify(&b2_space(Mode::Torus), &DEFAULT_SCHEDULE).unwrap();
        assert_eq!(r.count(), 5);
        assert!(r.stable);
    }

    #[test]
    fn grid_limit_is_enforced() {
        let opts = ClassifyOptions {
            grid_limit: 10,
            ..ClassifyOptions::default()
        };
        let err = classify_with(&a_space(2, Mode::Torus), &[4, 8], &opts).unwrap_err();
        assert!(err.is_resource_bound());
    }

    #[test]
    fn witnesses_reproduce_representatives() {
        for space in [
            a_space(3, Mode::Torus),
            a_space(3, Mode::Linear),
            b2_space(Mode::Torus),
        ] {
            let r = classify(&space, &[4, 8]).unwrap();
            for c in &r.classes {
                let s = stabilizer(&space, &c.witness).unwrap();
                assert_eq!(s, c.representative);
            }
        }
    }

    #[test]
    fn torus_grid_is_complete_modulo_lattice() {
        // Every rational point with denominator 4 is equivalent mod D₂ to
        // exactly one grid point.
        let b2 = b2_space(Mode::Torus);
        let l = b2.lattice().unwrap();
        let e = TorusEngine::new(&b2, l).unwrap();
        let grid = e.grid(4).unwrap();
        let mut reps = std::collections::BTreeSet::new();
        let mut a = vec![0; 2];
        for idx in 0..grid.count as u64 {
            e.point(&grid, idx, &mut a);
            reps.insert(l.canonical_rep(&e.witness(&a, grid.modulus)).unwrap());
        }
        assert_eq!(reps.len() as u128, grid.count);
        // ℚ²/(¼ℤ)² has 4² classes mod ℤ², and [ℤ² : D₂] = 2.
        assert_eq!(grid.count, 32);
    }

    #[test]
    fn equivariance_and_scale_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for space in [
            a_space(2, Mode::Torus),
            b2_space(Mode::Torus),
            b2_space(Mode::Linear),
        ] {
            let g = space.group().clone();
            for _ in 0..100 {
                let mut p = QVector::new(
                    (0..space.ambient_dim())
                        .map(|_| Frac::new(rng.gen_range(-6..=6), rng.gen_range(1..=4)))
                        .collect(),
                );
                if space.constraint().is_some() {
                    let mean: Frac =
                        p.coords().iter().copied().sum::<Frac>() / Frac::from_int(p.dim() as i64);
                    p = QVector::new(p.coords().iter().map(|&x| x - mean).collect());
                }
                let w = rng.gen_range(0..g.order() as u32);
                let s = stabilizer(&space, &p).unwrap();
                let sw = stabilizer(&space, &g.element(w).mul_vec(&p)).unwrap();
                assert_eq!(sw, conjugate_subgroup(&g, &s, w).unwrap());
                if space.mode() == Mode::Linear {
                    let c = Frac::new(rng.gen_range(1..9), rng.gen_range(1..9));
                    assert_eq!(stabilizer(&space, &p.scale(-c)).unwrap(), s);
                }
            }
        }
    }

    #[test]
    fn compare_identical_lattices_has_no_jumps() {
        let b2 = b2_space(Mode::Torus);
        let r = compare_lattices(&b2, b2.lattice().unwrap(), &[2, 4]).unwrap();
        assert!(r.jumps.is_empty());
        assert_eq!(r.fine_count, r.coarse_count);
    }

    #[test]
    fn psl2_probe() {
        let a1 = a_space(1, Mode::Torus);
        let coarse = a1.lattice().unwrap().scaled(q(1, 2)).unwrap();
        let r = compare_lattices(&a1, &coarse, &[4, 8]).unwrap();
        let target = QVector::new(vec![q(1, 4), q(-1, 4)]);
        assert!(r
            .jumps
            .iter()
            .any(|j| j.point == target && j.fine_order == 1 && j.coarse_order == 2));
        assert_eq!(r.fine_count, 2);
        assert_eq!(r.pair_count, 3);
        // Identity fine ⊆ coarse fails the other way round.
        assert_eq!(
            compare_lattices(
                &ActionSpace::new(
                    a1.group().clone(),
                    Mode::Torus,
                    Some(coarse),
                    a1.constraint().cloned()
                )
                .unwrap(),
                a1.lattice().unwrap(),
                &[4]
            )
            .unwrap_err(),
            Error::LatticesNotNested
        );
    }

    #[test]
    fn torus_space_requires_lattice() {
        let g = Arc::new(close_generators(&[QMatrix::permutation(&[1, 0])]).unwrap());
        assert_eq!(
            ActionSpace::new(g, Mode::Torus, None, None).unwrap_err(),
            Error::MissingLattice
        );
    }

    #[test]
    fn non_invariant_lattice_rejected() {
        let g = Arc::new(close_generators(&[QMatrix::permutation(&[1, 0])]).unwrap());
        let l = Lattice::new(vec![
            QVector::from_ints(&[1, 0]),
            QVector::from_ints(&[0, 2]),
        ])
        .unwrap();
        assert_eq!(
            ActionSpace::new(g, Mode::Torus, Some(l), None).unwrap_err(),
            Error::LatticeNotInvariant
        );
    }
}
