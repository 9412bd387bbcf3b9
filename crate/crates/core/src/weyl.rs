//! Finite matrix groups: closure from generators, element conjugacy classes,
//! subgroups, and subgroup conjugacy.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exactlin::{Frac, QMatrix, QVector};

/// Default bound on the number of elements produced by closure.
pub const DEFAULT_GROUP_LIMIT: usize = 1_000_000;

/// Groups up to this order get a full multiplication table.
const MULT_TABLE_LIMIT: usize = 2048;

/// Conjugacy scans over groups smaller than this stay on one thread.
const PARALLEL_SCAN_THRESHOLD: usize = 4096;

static NEXT_TOKEN: AtomicU64 = AtomicU64::new(1);

/// A finite group of rational matrices, fully enumerated. Element 0 is the
/// identity.
#[derive(Debug)]
pub struct WeylGroup {
    token: u64,
    dim: usize,
    elements: Vec<QMatrix>,
    generator_ids: Vec<u32>,
    scale: i64,
    scaled: Vec<Box<[i64]>>,
    lookup: FxHashMap<Box<[i64]>, u32>,
    inverse: Vec<u32>,
    mult: Option<Vec<u32>>,
    class_label: Vec<u32>,
    class_sizes: Vec<usize>,
    is_reflection: Vec<bool>,
    reflection_ids: Vec<u32>,
}

/// Closure of `gens` with the default size bound.
pub fn close_generators(gens: &[QMatrix]) -> Result<WeylGroup> {
    WeylGroup::close(gens, DEFAULT_GROUP_LIMIT)
}

impl WeylGroup {
    /// Breadth-first closure. Each layer of new elements is sorted before ids
    /// are assigned, so the numbering depends only on the generator list.
    pub fn close(gens: &[QMatrix], limit: usize) -> Result<WeylGroup> {
        let dim = gens.first().map_or(0, |g| g.rows());
        for g in gens {
            if !g.is_square() || g.rows() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: g.rows(),
                });
            }
            if g.determinant().is_zero() {
                return Err(Error::Singular);
            }
        }
        let id = QMatrix::identity(dim);
        let mut index: FxHashMap<QMatrix, u32> = FxHashMap::default();
        let mut elements = vec![id.clone()];
        index.insert(id, 0);
        let mut frontier = vec![0u32];
        while !frontier.is_empty() {
            let mut layer = BTreeSet::new();
            for &x in &frontier {
                for g in gens {
                    let y = g * &elements[x as usize];
                    if !index.contains_key(&y) {
                        layer.insert(y);
                    }
                }
            }
            frontier.clear();
            for y in layer {
                if elements.len() >= limit {
                    return Err(Error::GroupTooLarge { limit });
                }
                let id = elements.len() as u32;
                index.insert(y.clone(), id);
                elements.push(y);
                frontier.push(id);
            }
        }
        let generator_ids = gens.iter().map(|g| index[g]).collect();
        Ok(WeylGroup::from_elements(dim, elements, generator_ids))
    }

    fn from_elements(dim: usize, elements: Vec<QMatrix>, generator_ids: Vec<u32>) -> WeylGroup {
        let n = elements.len();
        let scale = elements
            .iter()
            .fold(1i64, |acc, m| num_integer::lcm(acc, m.common_denominator()));
        let scaled: Vec<Box<[i64]>> = elements
            .iter()
            .map(|m| {
                m.scaled_integers(scale)
                    .expect("scale clears denominators")
                    .into_boxed_slice()
            })
            .collect();
        let lookup: FxHashMap<Box<[i64]>, u32> = scaled
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i as u32))
            .collect();
        let mut group = WeylGroup {
            token: NEXT_TOKEN.fetch_add(1, Ordering::Relaxed),
            dim,
            elements,
            generator_ids,
            scale,
            scaled,
            lookup,
            inverse: Vec::new(),
            mult: None,
            class_label: Vec::new(),
            class_sizes: Vec::new(),
            is_reflection: Vec::new(),
            reflection_ids: Vec::new(),
        };
        group.inverse = (0..n as u32)
            .into_par_iter()
            .map(|i| {
                let m = &group.elements[i as usize];
                let t = m.transpose();
                match group.find(&t) {
                    Some(j) if group.product_slow(i, j) == 0 => j,
                    _ => group
                        .find(&m.inverse().expect("group elements are invertible"))
                        .expect("closed group contains inverses"),
                }
            })
            .collect();
        if n <= MULT_TABLE_LIMIT {
            let table: Vec<u32> = (0..n * n)
                .into_par_iter()
                .map(|k| group.product_slow((k / n) as u32, (k % n) as u32))
                .collect();
            group.mult = Some(table);
        }
        group.compute_classes();
        group.mark_reflections(&QMatrix::identity(dim));
        group
    }

    fn compute_classes(&mut self) {
        let n = self.order();
        let mut label = vec![u32::MAX; n];
        let mut sizes = Vec::new();
        let gens: Vec<u32> = if self.generator_ids.is_empty() {
            vec![0]
        } else {
            self.generator_ids.clone()
        };
        for start in 0..n {
            if label[start] != u32::MAX {
                continue;
            }
            let c = sizes.len() as u32;
            label[start] = c;
            let mut queue = vec![start as u32];
            let mut size = 0;
            while let Some(x) = queue.pop() {
                size += 1;
                for &g in &gens {
                    let y = self.conjugate(g, x);
                    if label[y as usize] == u32::MAX {
                        label[y as usize] = c;
                        queue.push(y);
                    }
                }
            }
            sizes.push(size);
        }
        self.class_label = label;
        self.class_sizes = sizes;
    }

    fn product_slow(&self, a: u32, b: u32) -> u32 {
        let mut buf = vec![0i64; self.dim * self.dim];
        self.scaled_product_into(a, b, &mut buf);
        *self
            .lookup
            .get(&buf[..])
            .expect("group is closed under products")
    }

    fn scaled_product_into(&self, a: u32, b: u32, out: &mut [i64]) {
        let n = self.dim;
        let (x, y) = (&self.scaled[a as usize], &self.scaled[b as usize]);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0i64;
                for k in 0..n {
                    acc += x[i * n + k] * y[k * n + j];
                }
                out[i * n + j] = acc / self.scale;
            }
        }
    }

    /// `w` is a reflection when `(w − I)` has rank 1 on the column span of
    /// `basis`.
    fn mark_reflections(&mut self, basis: &QMatrix) {
        let id = QMatrix::identity(self.dim);
        self.is_reflection = self
            .elements
            .par_iter()
            .map(|m| (&(m - &id) * basis).rank() == 1)
            .collect();
        self.reflection_ids = (0..self.order() as u32)
            .filter(|&i| self.is_reflection[i as usize])
            .collect();
    }

    /// Recomputes which elements are reflections, judging each by its action
    /// on the hyperplane `f·v = 0` instead of the whole space. Needed when
    /// the group acts on a hyperplane by matrices that are not the identity
    /// on its complement.
    pub fn with_reflections_on_hyperplane(mut self, f: &QVector) -> Result<WeylGroup> {
        if f.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: f.dim(),
            });
        }
        let basis = QMatrix::from_row_vectors(
            &QMatrix::from_row_vectors(std::slice::from_ref(f)).nullspace(),
        );
        self.mark_reflections(&basis.transpose());
        Ok(self)
    }

    /// Unique identifier of this group instance, used to check that
    /// subgroups share a parent.
    pub fn token(&self) -> u64 {
        self.token
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, i: u32) -> &QMatrix {
        &self.elements[i as usize]
    }

    pub fn elements(&self) -> &[QMatrix] {
        &self.elements
    }

    pub fn generator_ids(&self) -> &[u32] {
        &self.generator_ids
    }

    /// Common denominator `s` of all entries; `s·w` is integral for every `w`.
    pub fn scale(&self) -> i64 {
        self.scale
    }

    /// `s·w` as a row-major integer array.
    pub fn scaled_element(&self, i: u32) -> &[i64] {
        &self.scaled[i as usize]
    }

    /// Id of `m` if it is an element of the group.
    pub fn find(&self, m: &QMatrix) -> Option<u32> {
        if m.rows() != self.dim || m.cols() != self.dim {
            return None;
        }
        let key = m.scaled_integers(self.scale)?;
        self.lookup.get(&key[..]).copied()
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        match &self.mult {
            Some(t) => t[a as usize * self.order() + b as usize],
            None => self.product_slow(a, b),
        }
    }

    pub fn inverse(&self, a: u32) -> u32 {
        self.inverse[a as usize]
    }

    /// `g·x·g⁻¹`.
    pub fn conjugate(&self, g: u32, x: u32) -> u32 {
        self.mul(self.mul(g, x), self.inverse(g))
    }

    pub fn class_label(&self, i: u32) -> u32 {
        self.class_label[i as usize]
    }

    pub fn num_classes(&self) -> usize {
        self.class_sizes.len()
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    pub fn is_reflection(&self, i: u32) -> bool {
        self.is_reflection[i as usize]
    }

    pub fn reflection_ids(&self) -> &[u32] {
        &self.reflection_ids
    }

    /// The subgroup consisting of every element.
    pub fn whole(&self) -> Subgroup {
        let members: Vec<u32> = (0..self.order() as u32).collect();
        let generators = self
            .generator_ids
            .iter()
            .copied()
            .filter(|&g| g != 0)
            .collect();
        Subgroup::build(self, members, generators)
    }

    pub fn trivial(&self) -> Subgroup {
        Subgroup::build(self, vec![0], Vec::new())
    }

    /// Elements of `⟨gens⟩`, sorted. When `within` is given, fails as soon
    /// as the closure leaves that set.
    fn generate(&self, gens: &[u32], within: Option<&[bool]>) -> Result<Vec<u32>> {
        let mut seen = vec![false; self.order()];
        seen[0] = true;
        let mut out = vec![0u32];
        let mut i = 0;
        while i < out.len() {
            let x = out[i];
            i += 1;
            for &t in gens {
                let y = self.mul(x, t);
                if !seen[y as usize] {
                    if let Some(w) = within {
                        if !w[y as usize] {
                            return Err(Error::NotClosed);
                        }
                    }
                    seen[y as usize] = true;
                    out.push(y);
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// The subgroup generated by the given elements.
    pub fn subgroup_generated_by(&self, gens: &[u32]) -> Subgroup {
        let gens: Vec<u32> = gens.iter().copied().filter(|&g| g != 0).collect();
        let members = self.generate(&gens, None).expect("unrestricted closure");
        let generators = minimal_generators(self, &members).expect("generated set is a subgroup");
        Subgroup::build(self, members, generators)
    }
}

/// Greedy generating set for a candidate subgroup. Fails if `members` is not
/// closed under multiplication.
fn minimal_generators(group: &WeylGroup, members: &[u32]) -> Result<Vec<u32>> {
    let mut within = vec![false; group.order()];
    for &m in members {
        within[m as usize] = true;
    }
    let mut in_closure = vec![false; group.order()];
    in_closure[0] = true;
    let mut closure = vec![0u32];
    let mut gens: Vec<u32> = Vec::new();
    for &s in members {
        if in_closure[s as usize] {
            continue;
        }
        gens.push(s);
        // Every old element must be multiplied by the new generator and every
        // new element by all generators.
        let mut i = 0;
        while i < closure.len() {
            let x = closure[i];
            i += 1;
            for &t in &gens {
                let y = group.mul(x, t);
                if !in_closure[y as usize] {
                    if !within[y as usize] {
                        return Err(Error::NotClosed);
                    }
                    in_closure[y as usize] = true;
                    closure.push(y);
                }
            }
        }
    }
    Ok(gens)
}

/// Conjugation-invariant summary of a subgroup: its order and the multiset of
/// element conjugacy classes it meets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fingerprint {
    pub order: usize,
    /// `(class label, count)` pairs sorted by label.
    pub class_counts: Vec<(u32, u32)>,
}

impl Fingerprint {
    /// Hex SHA-256 of a canonical serialization.
    pub fn digest(&self) -> String {
        let mut s = format!("order={};", self.order);
        for (c, k) in &self.class_counts {
            let _ = write!(s, "{c}:{k},");
        }
        let hash = Sha256::digest(s.as_bytes());
        hash.iter().fold(String::with_capacity(64), |mut acc, b| {
            let _ = write!(acc, "{b:02x}");
            acc
        })
    }
}

/// A subgroup of a [`WeylGroup`], stored as a sorted list of element ids.
#[derive(Debug, Clone)]
pub struct Subgroup {
    parent: u64,
    members: Vec<u32>,
    generators: Vec<u32>,
    fingerprint: Fingerprint,
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Subgroup) -> bool {
        self.parent == other.parent && self.members == other.members
    }
}

impl Eq for Subgroup {}

impl Subgroup {
    fn build(group: &WeylGroup, members: Vec<u32>, generators: Vec<u32>) -> Subgroup {
        let mut counts: FxHashMap<u32, u32> = FxHashMap::default();
        for &m in &members {
            *counts.entry(group.class_label(m)).or_default() += 1;
        }
        let mut class_counts: Vec<(u32, u32)> = counts.into_iter().collect();
        class_counts.sort_unstable();
        Subgroup {
            parent: group.token(),
            fingerprint: Fingerprint {
                order: members.len(),
                class_counts,
            },
            members,
            generators,
        }
    }

    pub fn parent_token(&self) -> u64 {
        self.parent
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    /// Sorted element ids.
    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn contains(&self, id: u32) -> bool {
        self.members.binary_search(&id).is_ok()
    }

    /// A generating set (greedy, not necessarily minimal in size).
    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    pub fn fingerprint(&self) -> &Fingerprint {
        &self.fingerprint
    }

    pub fn is_trivial(&self) -> bool {
        self.members.len() == 1
    }
}

/// Wraps a set of element ids as a subgroup after checking closure.
pub fn subgroup_from_ids(group: &WeylGroup, ids: &[u32]) -> Result<Subgroup> {
    let mut members: Vec<u32> = ids.to_vec();
    members.sort_unstable();
    members.dedup();
    if members.first() != Some(&0) {
        return Err(Error::NotClosed);
    }
    if let Some(&bad) = members.last() {
        if bad as usize >= group.order() {
            return Err(Error::NotClosed);
        }
    }
    let generators = minimal_generators(group, &members)?;
    Ok(Subgroup::build(group, members, generators))
}

fn check_parent(group: &WeylGroup, h: &Subgroup) -> Result<()> {
    if h.parent != group.token() {
        return Err(Error::ParentMismatch);
    }
    Ok(())
}

/// `g·H·g⁻¹`.
pub fn conjugate_subgroup(group: &WeylGroup, h: &Subgroup, g: u32) -> Result<Subgroup> {
    check_parent(group, h)?;
    let mut members: Vec<u32> = h.members.iter().map(|&x| group.conjugate(g, x)).collect();
    members.sort_unstable();
    let generators = h
        .generators
        .iter()
        .map(|&x| group.conjugate(g, x))
        .collect();
    Ok(Subgroup {
        parent: h.parent,
        members,
        generators,
        fingerprint: h.fingerprint.clone(),
    })
}

/// Decides whether `g·H1·g⁻¹ = H2` for some `g`; returns the smallest such
/// `g` by element id.
pub fn are_conjugate(group: &WeylGroup, h1: &Subgroup, h2: &Subgroup) -> Result<Option<u32>> {
    check_parent(group, h1)?;
    check_parent(group, h2)?;
    if h1.fingerprint != h2.fingerprint {
        return Ok(None);
    }
    if h1.members == h2.members {
        return Ok(Some(0));
    }
    let mut target = vec![false; group.order()];
    for &m in &h2.members {
        target[m as usize] = true;
    }
    // Equal orders, so mapping generators into H2 forces equality.
    let maps_into = |g: u32| {
        h1.generators
            .iter()
            .all(|&t| target[group.conjugate(g, t) as usize])
    };
    let n = group.order() as u32;
    let witness = if group.order() < PARALLEL_SCAN_THRESHOLD {
        (0..n).find(|&g| maps_into(g))
    } else {
        (0..n).into_par_iter().find_first(|&g| maps_into(g))
    };
    Ok(witness)
}

/// Decides whether one `g` conjugates `H1` onto `H2` and `K1` onto `K2` at
/// the same time; returns the smallest such `g`.
pub fn are_simultaneously_conjugate(
    group: &WeylGroup,
    (h1, k1): (&Subgroup, &Subgroup),
    (h2, k2): (&Subgroup, &Subgroup),
) -> Result<Option<u32>> {
    for h in [h1, k1, h2, k2] {
        check_parent(group, h)?;
    }
    if h1.fingerprint != h2.fingerprint || k1.fingerprint != k2.fingerprint {
        return Ok(None);
    }
    let mut in_h2 = vec![false; group.order()];
    let mut in_k2 = vec![false; group.order()];
    for &m in &h2.members {
        in_h2[m as usize] = true;
    }
    for &m in &k2.members {
        in_k2[m as usize] = true;
    }
    let ok = |g: u32| {
        h1.generators
            .iter()
            .all(|&t| in_h2[group.conjugate(g, t) as usize])
            && k1
                .generators
                .iter()
                .all(|&t| in_k2[group.conjugate(g, t) as usize])
    };
    let n = group.order() as u32;
    Ok(if group.order() < PARALLEL_SCAN_THRESHOLD {
        (0..n).find(|&g| ok(g))
    } else {
        (0..n).into_par_iter().find_first(|&g| ok(g))
    })
}

/// The subgroup generated by the reflections lying in `H`.
pub fn reflection_closure(group: &WeylGroup, h: &Subgroup) -> Result<Subgroup> {
    check_parent(group, h)?;
    let refl: Vec<u32> = h
        .members
        .iter()
        .copied()
        .filter(|&x| group.is_reflection(x))
        .collect();
    Ok(group.subgroup_generated_by(&refl))
}

/// Signed permutation matrix: `e_j ↦ signs[j]·e_{perm[j]}`.
pub fn signed_permutation(perm: &[usize], signs: &[i64]) -> QMatrix {
    let n = perm.len();
    let mut m = QMatrix::zeros(n, n);
    for (j, (&i, &s)) in perm.iter().zip(signs).enumerate() {
        m[(i, j)] = Frac::from_int(s);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn transposition(n: usize, i: usize) -> QMatrix {
        let mut p: Vec<usize> = (0..n).collect();
        p.swap(i, i + 1);
        QMatrix::permutation(&p)
    }

    fn b2() -> WeylGroup {
        close_generators(&[transposition(2, 0), signed_permutation(&[0, 1], &[-1, 1])]).unwrap()
    }

    fn symmetric(n: usize) -> WeylGroup {
        let gens: Vec<QMatrix> = (0..n - 1).map(|i| transposition(n, i)).collect();
        close_generators(&gens).unwrap()
    }

    #[test]
    fn trivial_group() {
        let g = close_generators(&[QMatrix::identity(3)]).unwrap();
        assert_eq!(g.order(), 1);
        assert!(g.element(0).is_identity());
    }

    #[test]
    fn b2_order_classes_reflections() {
        let g = b2();
        assert_eq!(g.order(), 8);
        assert!(g.element(0).is_identity());
        // Dihedral group of order 8: 5 classes, 4 reflections.
        assert_eq!(g.num_classes(), 5);
        assert_eq!(g.reflection_ids().len(), 4);
        for i in 0..8 {
            assert_eq!(g.mul(i, g.inverse(i)), 0);
        }
    }

    #[test]
    fn symmetric_group_orders() {
        assert_eq!(symmetric(4).order(), 24);
        assert_eq!(symmetric(5).order(), 120);
        assert_eq!(symmetric(5).num_classes(), 7);
    }

    #[test]
    fn closure_bound_is_enforced() {
        let gens: Vec<QMatrix> = (0..4).map(|i| transposition(5, i)).collect();
        assert_eq!(
            WeylGroup::close(&gens, 50).unwrap_err(),
            Error::GroupTooLarge { limit: 50 }
        );
    }

    #[test]
    fn infinite_generator_hits_bound() {
        let shear = QMatrix::from_int_rows(&[vec![1, 1], vec![0, 1]]);
        assert!(WeylGroup::close(&[shear], 100)
            .unwrap_err()
            .is_resource_bound());
    }

    #[test]
    fn subgroup_validation() {
        let g = b2();
        let triv = subgroup_from_ids(&g, &[0]).unwrap();
        assert_eq!(triv.fingerprint().order, 1);
        assert_eq!(triv.fingerprint().class_counts, vec![(g.class_label(0), 1)]);
        let all: Vec<u32> = (0..8).collect();
        assert_eq!(subgroup_from_ids(&g, &all).unwrap(), g.whole());
        let r = g.reflection_ids()[0];
        let s = g.reflection_ids()[1];
        assert_eq!(subgroup_from_ids(&g, &[0, r, s]), Err(Error::NotClosed));
        assert_eq!(subgroup_from_ids(&g, &[r]), Err(Error::NotClosed));
    }

    #[test]
    fn b2_short_and_long_reflections_not_conjugate() {
        let g = b2();
        let flip = g.find(&signed_permutation(&[0, 1], &[-1, 1])).unwrap();
        let swap = g.find(&transposition(2, 0)).unwrap();
        let h1 = g.subgroup_generated_by(&[flip]);
        let h2 = g.subgroup_generated_by(&[swap]);
        assert_ne!(h1.fingerprint(), h2.fingerprint());
        assert_eq!(are_conjugate(&g, &h1, &h2).unwrap(), None);
        assert_eq!(are_conjugate(&g, &h1, &h1).unwrap(), Some(0));
        let flip2 = g.find(&signed_permutation(&[0, 1], &[1, -1])).unwrap();
        let h3 = g.subgroup_generated_by(&[flip2]);
        let w = are_conjugate(&g, &h1, &h3)
            .unwrap()
            .expect("conjugate by the swap");
        assert_eq!(conjugate_subgroup(&g, &h1, w).unwrap(), h3);
    }

    #[test]
    fn reflection_closure_examples() {
        let g = b2();
        assert_eq!(reflection_closure(&g, &g.trivial()).unwrap(), g.trivial());
        assert_eq!(reflection_closure(&g, &g.whole()).unwrap(), g.whole());
        let minus = g
            .find(&QMatrix::identity(2).scale(Frac::from_int(-1)))
            .unwrap();
        assert!(!g.is_reflection(minus));
        let h = g.subgroup_generated_by(&[minus]);
        assert_eq!(h.order(), 2);
        assert_eq!(reflection_closure(&g, &h).unwrap(), g.trivial());
    }

    #[test]
    fn parent_mismatch_is_an_error() {
        let g = b2();
        let other = b2();
        assert_eq!(
            are_conjugate(&g, &g.whole(), &other.whole()),
            Err(Error::ParentMismatch)
        );
    }

    #[test]
    fn class_labels_are_conjugation_invariant() {
        let g = symmetric(5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let x = rng.gen_range(0..g.order() as u32);
            let h = rng.gen_range(0..g.order() as u32);
            assert_eq!(g.class_label(x), g.class_label(g.conjugate(h, x)));
        }
        assert_eq!(g.class_sizes().iter().sum::<usize>(), 120);
    }

    #[test]
    fn fingerprint_and_conjugacy_axioms_on_random_subgroups() {
        let g = symmetric(4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let subs: Vec<Subgroup> = (0..30)
            .map(|_| {
                let k = rng.gen_range(0..3);
                let gens: Vec<u32> = (0..k).map(|_| rng.gen_range(0..24)).collect();
                g.subgroup_generated_by(&gens)
            })
            .collect();
        for h in &subs {
            let x = rng.gen_range(0..24);
            let c = conjugate_subgroup(&g, h, x).unwrap();
            assert_eq!(c.fingerprint(), h.fingerprint());
            let w = are_conjugate(&g, h, &c).unwrap().unwrap();
            assert_eq!(conjugate_subgroup(&g, h, w).unwrap(), c);
        }
        for a in &subs {
            for b in &subs {
                let ab = are_conjugate(&g, a, b).unwrap().is_some();
                let ba = are_conjugate(&g, b, a).unwrap().is_some();
                assert_eq!(ab, ba);
                if ab {
                    for c in &subs {
                        if are_conjugate(&g, b, c).unwrap().is_some() {
                            assert!(are_conjugate(&g, a, c).unwrap().is_some());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn digest_is_stable_hex() {
        let g = b2();
        let d = g.whole().fingerprint().digest();
        assert_eq!(d.len(), 64);
        assert_eq!(d, g.whole().fingerprint().digest());
        assert_ne!(d, g.trivial().fingerprint().digest());
    }
}
