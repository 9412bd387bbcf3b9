//! Per-type models: Weyl generators, parameter spaces, coroot lattices,
//! closed-form genus formulas and stabilizer descriptor strings.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactlin::{Frac, Lattice, QMatrix, QVector};
use crate::orbits::{stabilizer, ActionSpace, ClassificationReport, Mode};
use crate::partitions::{enumerate_partitions, partition_count};
use crate::weyl::{are_conjugate, close_generators, signed_permutation, Subgroup, WeylGroup};

/// Label used for classes no stratum matched.
pub const UNLISTED: &str = "unlisted";

/// Denominator of the generic block values used in stratum witnesses.
const GENERIC_DEN: i64 = 257;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    G2,
    F4,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::A,
        Family::B,
        Family::C,
        Family::D,
        Family::G2,
        Family::F4,
    ];

    /// Inclusive range of supported ranks.
    pub fn rank_bounds(self) -> (usize, usize) {
        match self {
            Family::A => (1, 7),
            Family::B | Family::C => (1, 6),
            Family::D => (2, 6),
            Family::G2 => (2, 2),
            Family::F4 => (4, 4),
        }
    }

    pub fn is_exceptional(self) -> bool {
        matches!(self, Family::G2 | Family::F4)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
            Family::G2 => "G2",
            Family::F4 => "F4",
        })
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Family> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Family::A),
            "B" => Ok(Family::B),
            "C" => Ok(Family::C),
            "D" => Ok(Family::D),
            "G2" | "G" => Ok(Family::G2),
            "F4" | "F" => Ok(Family::F4),
            _ => Err(Error::Parse(format!("unknown type {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupType {
    pub family: Family,
    pub rank: usize,
}

impl GroupType {
    pub fn new(family: Family, rank: usize) -> Result<GroupType> {
        let (lo, hi) = family.rank_bounds();
        if rank < lo || rank > hi {
            return Err(Error::UnsupportedType {
                family: family.to_string(),
                rank,
                reason: format!("supported ranks are {lo}..={hi}"),
            });
        }
        Ok(GroupType { family, rank })
    }

    /// `G2` or `F4` at their only rank.
    pub fn exceptional(family: Family) -> Result<GroupType> {
        GroupType::new(family, family.rank_bounds().0)
    }

    /// `A3`, `G2`, ...
    pub fn name(&self) -> String {
        match self.family {
            Family::G2 | Family::F4 => self.family.to_string(),
            f => format!("{f}{}", self.rank),
        }
    }

    /// Dimension of the ambient coordinate space.
    pub fn ambient_dim(&self) -> usize {
        match self.family {
            Family::A => self.rank + 1,
            Family::G2 => 3,
            _ => self.rank,
        }
    }

    pub fn weyl_order(&self) -> u128 {
        let n = self.rank as u128;
        let fact = |k: u128| (1..=k).product::<u128>();
        match self.family {
            Family::A => fact(n + 1),
            Family::B | Family::C => (1u128 << n) * fact(n),
            Family::D => (1u128 << (n - 1)) * fact(n),
            Family::G2 => 12,
            Family::F4 => 1152,
        }
    }

    /// Notes on ranks where the type coincides with another or degenerates.
    pub fn warnings(&self) -> Vec<String> {
        let msg = match (self.family, self.rank) {
            (Family::B, 1) => {
                "B1 coincides with A1; the B formula counts strata that collapse at this rank"
            }
            (Family::C, 1) => "C1 coincides with A1",
            (Family::B, 2) | (Family::C, 2) => {
                "B2 and C2 are isomorphic; their formulas differ and the computed counts arbitrate"
            }
            (Family::D, 2) => "D2 is not simple (A1 x A1)",
            (Family::D, 3) => {
                "D3 coincides with A3; the D formula counts strata that collapse at this rank"
            }
            _ => return Vec::new(),
        };
        vec![msg.to_string()]
    }
}

impl fmt::Display for GroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Accepts `A3`, `b2`, `G2`, `F4`.
impl FromStr for GroupType {
    type Err = Error;
    fn from_str(s: &str) -> Result<GroupType> {
        let s = s.trim();
        if let Ok(f) = s.parse::<Family>() {
            if f.is_exceptional() {
                return GroupType::exceptional(f);
            }
        }
        let bad = || Error::Parse(format!("not a group type: {s:?}"));
        let (head, tail) = s.split_at(s.char_indices().nth(1).map_or(s.len(), |(i, _)| i));
        let family: Family = head.parse().map_err(|_| bad())?;
        let rank: usize = tail.parse().map_err(|_| bad())?;
        GroupType::new(family, rank)
    }
}

/// Generators, hyperplane and coroot lattice for one type.
#[derive(Debug, Clone)]
pub struct TypeModel {
    pub group_type: GroupType,
    pub weyl_generators: Vec<QMatrix>,
    /// Normal vector of the hyperplane the parameters live in, if any.
    pub constraint: Option<QVector>,
    pub lattice: Lattice,
}

fn transposition(n: usize, i: usize) -> QMatrix {
    let mut p: Vec<usize> = (0..n).collect();
    p.swap(i, i + 1);
    QMatrix::permutation(&p)
}

fn first_sign_flip(n: usize) -> QMatrix {
    let mut signs = vec![1; n];
    signs[0] = -1;
    signature(n, &signs)
}

fn signature(n: usize, signs: &[i64]) -> QMatrix {
    let perm: Vec<usize> = (0..n).collect();
    signed_permutation(&perm, signs)
}

/// `e_i − e_{i+1}` for `i < n−1`, plus `2e_{n−1}`: the lattice of integer
/// vectors with even coordinate sum.
fn d_lattice(n: usize) -> Lattice {
    let mut gens = Vec::with_capacity(n);
    for i in 0..n - 1 {
        let mut v = vec![0i64; n];
        v[i] = 1;
        v[i + 1] = -1;
        gens.push(QVector::from_ints(&v));
    }
    let mut last = vec![0i64; n];
    last[n - 1] = 2;
    gens.push(QVector::from_ints(&last));
    Lattice::new(gens).expect("independent generators")
}

/// Root lattice of `A_{m-1}` inside the sum-zero hyperplane of `ℚ^m`.
fn root_lattice_a(m: usize) -> Lattice {
    let gens = (0..m - 1)
        .map(|i| {
            let mut v = vec![0i64; m];
            v[i] = 1;
            v[i + 1] = -1;
            QVector::from_ints(&v)
        })
        .collect();
    Lattice::new(gens).expect("independent generators")
}

fn symmetric_generators(n: usize) -> Vec<QMatrix> {
    (0..n - 1).map(|i| transposition(n, i)).collect()
}

/// W(D_n) generators: adjacent transpositions and `(x1, x2) ↦ (−x2, −x1)`.
fn d_generators(n: usize) -> Vec<QMatrix> {
    let mut gens = symmetric_generators(n);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.swap(0, 1);
    let mut signs = vec![1; n];
    signs[0] = -1;
    signs[1] = -1;
    gens.push(signed_permutation(&perm, &signs));
    gens
}

/// The map `t₁ ↦ t₂` on torus parameters.
pub fn triality_a() -> QMatrix {
    QMatrix::from_scaled_int_rows(
        &[
            vec![1, 1, 1, -1],
            vec![1, 1, -1, 1],
            vec![1, -1, 1, 1],
            vec![-1, 1, 1, 1],
        ],
        2,
    )
}

/// The map `t₁ ↦ t₃` on torus parameters.
pub fn triality_b() -> QMatrix {
    QMatrix::from_scaled_int_rows(
        &[
            vec![1, -1, -1, 1],
            vec![-1, 1, -1, 1],
            vec![-1, -1, 1, 1],
            vec![1, 1, 1, 1],
        ],
        2,
    )
}

pub fn model(t: GroupType) -> TypeModel {
    let n = t.rank;
    let (weyl_generators, constraint, lattice) = match t.family {
        Family::A => (
            symmetric_generators(n + 1),
            Some(QVector::from_ints(&vec![1; n + 1])),
            root_lattice_a(n + 1),
        ),
        Family::B | Family::C => {
            let mut gens = symmetric_generators(n);
            gens.push(first_sign_flip(n));
            let lattice = if t.family == Family::B {
                d_lattice(n)
            } else {
                Lattice::standard(n)
            };
            (gens, None, lattice)
        }
        Family::D => (d_generators(n), None, d_lattice(n)),
        Family::G2 => {
            let mut gens = symmetric_generators(3);
            gens.push(QMatrix::identity(3).scale(Frac::from_int(-1)));
            (
                gens,
                Some(QVector::from_ints(&[1, 1, 1])),
                root_lattice_a(3),
            )
        }
        Family::F4 => {
            let mut gens = d_generators(4);
            gens.push(first_sign_flip(4));
            gens.push(triality_a());
            (gens, None, d_lattice(4))
        }
    };
    TypeModel {
        group_type: t,
        weyl_generators,
        constraint,
        lattice,
    }
}

fn group_cache() -> &'static Mutex<HashMap<GroupType, Arc<WeylGroup>>> {
    static CACHE: OnceLock<Mutex<HashMap<GroupType, Arc<WeylGroup>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// The closed Weyl group of a type, checked against its known order. Groups
/// are cached, so repeated calls share one parent and subgroups from
/// different calls stay comparable.
pub fn weyl_group(t: GroupType) -> Result<Arc<WeylGroup>> {
    if let Some(g) = group_cache().lock().unwrap().get(&t) {
        return Ok(Arc::clone(g));
    }
    let m = model(t);
    let mut group = close_generators(&m.weyl_generators)?;
    if let Some(f) = &m.constraint {
        group = group.with_reflections_on_hyperplane(f)?;
    }
    if group.order() as u128 != t.weyl_order() {
        return Err(Error::ModelCheck(format!(
            "{t}: closure has order {}, expected {}",
            group.order(),
            t.weyl_order()
        )));
    }
    if t.family == Family::F4 && group.find(&triality_b()).is_none() {
        return Err(Error::ModelCheck("F4: t3-map is not in the closure".into()));
    }
    let group = Arc::new(group);
    let mut cache = group_cache().lock().unwrap();
    Ok(Arc::clone(cache.entry(t).or_insert(group)))
}

/// The action space of a type: torus mode carries the coroot lattice,
/// linear mode carries none.
pub fn build(t: GroupType, mode: Mode) -> Result<ActionSpace> {
    let group = weyl_group(t)?;
    let m = model(t);
    let lattice = (mode == Mode::Torus).then_some(m.lattice);
    ActionSpace::new(group, mode, lattice, m.constraint)
}

/// How the triality maps sit in `W(F4)` modulo `W(D4)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialityQuotient {
    /// Order of the image of `⟨A, B⟩` in `W(F4)/W(D4)`.
    pub order: usize,
    /// The image is non-abelian.
    pub non_abelian: bool,
    /// `d·A·d ≡ B` modulo `W(D4)`, with `d = diag(−1,1,1,1)`: conjugating by
    /// the hat map turns the `t₂`-map into the `t₃`-map.
    pub hat_swaps: bool,
}

pub fn f4_triality_quotient() -> Result<TrialityQuotient> {
    let w = weyl_group(GroupType::exceptional(Family::F4)?)?;
    let id = |m: &QMatrix| {
        w.find(m)
            .ok_or(Error::ModelCheck("F4: matrix outside W".into()))
    };
    let d4_gens = d_generators(4).iter().map(id).collect::<Result<Vec<_>>>()?;
    let d4 = w.subgroup_generated_by(&d4_gens);
    let (a, b) = (id(&triality_a())?, id(&triality_b())?);
    let d = id(&first_sign_flip(4))?;
    let same_coset = |x: u32, y: u32| d4.contains(w.mul(x, w.inverse(y)));
    let mut gens = d4_gens;
    gens.extend([a, b]);
    let h = w.subgroup_generated_by(&gens);
    Ok(TrialityQuotient {
        order: h.order() / d4.order(),
        non_abelian: !same_coset(w.mul(a, b), w.mul(b, a)),
        hat_swaps: same_coset(w.conjugate(d, a), b),
    })
}

/// Closed-form genus number (torus mode) or orbit-type count (linear mode).
pub fn formula_genus(t: GroupType, mode: Mode) -> u128 {
    let n = t.rank;
    let p = |k: usize| partition_count(k);
    let even_extra = if n.is_multiple_of(2) { p(n / 2) } else { 0 };
    match (t.family, mode) {
        (Family::A, _) => p(n + 1),
        (Family::B, Mode::Torus) => (0..=n).map(|i| (i as u128 + 1) * p(n - i)).sum(),
        (Family::C, Mode::Torus) => (0..=n).map(|i| (i as u128 / 2 + 1) * p(n - i)).sum(),
        (Family::D, Mode::Torus) => {
            (0..=n)
                .map(|i| (i as u128 / 2 + 1) * p(n - i))
                .sum::<u128>()
                + even_extra
        }
        (Family::B | Family::C, Mode::Linear) => (0..=n).map(|i| p(n - i)).sum(),
        (Family::D, Mode::Linear) => (0..=n).map(|i| p(n - i)).sum::<u128>() + even_extra,
        (Family::G2, Mode::Torus) => 6,
        (Family::G2, Mode::Linear) => 4,
        (Family::F4, Mode::Torus) => 17,
        (Family::F4, Mode::Linear) => 12,
    }
}

/// The formula as text, for reports.
pub fn formula_text(t: GroupType, mode: Mode) -> &'static str {
    match (t.family, mode) {
        (Family::A, _) => "p(n+1)",
        (Family::B, Mode::Torus) => "sum_{i=0}^n (i+1) p(n-i)",
        (Family::C, Mode::Torus) => "sum_{i=0}^n (floor(i/2)+1) p(n-i)",
        (Family::D, Mode::Torus) => "sum_{i=0}^n (floor(i/2)+1) p(n-i) [+ p(n/2) for even n]",
        (Family::B | Family::C, Mode::Linear) => "sum_{i=0}^n p(n-i)",
        (Family::D, Mode::Linear) => "sum_{i=0}^n p(n-i) [+ p(n/2) for even n]",
        (Family::G2, Mode::Torus) => "6",
        (Family::G2, Mode::Linear) => "4",
        (Family::F4, Mode::Torus) => "17",
        (Family::F4, Mode::Linear) => "12",
    }
}

/// Structured description of a stratum of points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum StratumDescriptor {
    /// Type A: block sizes of equal coordinates.
    Partition(Vec<usize>),
    /// Types B, C, D: `zero` coordinates at 0, `half` coordinates at 1/2
    /// (`None` in linear mode), remaining coordinates in equal blocks.
    Classical {
        zero: usize,
        half: Option<usize>,
        blocks: Vec<usize>,
    },
    /// Type D_{2k} with no zero coordinate: a partition of `k`, the first
    /// part carrying the sign-twisted block.
    Exotic { parts: Vec<usize> },
    /// A named case of G2 or F4.
    Case { label: String, structure: String },
}

fn sorted_desc(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

fn signed_block(size: usize, exponent: isize) -> String {
    format!("((Z/2)^{} ⋊ S_{size})", exponent.max(0))
}

fn symmetric_factors(blocks: &[usize]) -> impl Iterator<Item = String> + '_ {
    blocks.iter().map(|b| format!("S_{b}"))
}

pub fn render_descriptor(t: GroupType, stratum: &StratumDescriptor) -> Result<String> {
    let bad = |why: &str| Err(Error::InconsistentStratum(format!("{t}: {why}")));
    let n = t.rank;
    match stratum {
        StratumDescriptor::Partition(parts) => {
            if t.family != Family::A {
                return bad("partition strata belong to type A");
            }
            if parts.contains(&0) || parts.iter().sum::<usize>() != n + 1 {
                return bad("parts must be positive and sum to n+1");
            }
            let s: Vec<String> = symmetric_factors(&sorted_desc(parts)).collect();
            Ok(s.join(" × "))
        }
        StratumDescriptor::Classical { zero, half, blocks } => {
            if !matches!(t.family, Family::B | Family::C | Family::D) {
                return bad("classical strata belong to types B, C, D");
            }
            if blocks.contains(&0) || zero + half.unwrap_or(0) + blocks.iter().sum::<usize>() != n {
                return bad("block sizes must be positive and sum to n");
            }
            let (a, e) = (*zero, *zero as isize);
            let mut factors = Vec::new();
            match (t.family, half) {
                (Family::B, Some(b)) => {
                    factors.push(signed_block(a, e));
                    factors.push(signed_block(*b, *b as isize - 1));
                }
                (Family::C, Some(b)) => {
                    factors.push(signed_block(a, e));
                    factors.push(signed_block(*b, *b as isize));
                }
                (Family::D, Some(b)) => {
                    factors.push(signed_block(a, e - 1));
                    factors.push(signed_block(*b, *b as isize - 1));
                }
                (Family::C, None) => factors.push(signed_block(a, e)),
                (_, None) => factors.push(signed_block(a, e - 1)),
                _ => unreachable!(),
            }
            factors.extend(symmetric_factors(&sorted_desc(blocks)));
            Ok(factors.join(" × "))
        }
        StratumDescriptor::Exotic { parts } => {
            if t.family != Family::D || !n.is_multiple_of(2) {
                return bad("exotic strata exist only in type D of even rank");
            }
            if parts.is_empty() || parts.contains(&0) || parts.iter().sum::<usize>() != n / 2 {
                return bad("exotic parts must be positive and sum to n/2");
            }
            let mut s = format!("H_{{{}}}", 2 * parts[0]);
            for p in &parts[1..] {
                s.push_str(&format!(" · S_{}", 2 * p));
            }
            Ok(s)
        }
        StratumDescriptor::Case { label, structure } => {
            if !t.family.is_exceptional() {
                return bad("named cases belong to G2 and F4");
            }
            if label.is_empty() || structure.is_empty() {
                return bad("empty case label");
            }
            Ok(format!("{label} {structure}"))
        }
    }
}

/// A stratum together with a point lying in it.
#[derive(Debug, Clone)]
pub struct Stratum {
    pub descriptor: StratumDescriptor,
    pub witness: QVector,
}

fn generic(j: usize) -> Frac {
    Frac::new(j as i64, GENERIC_DEN)
}

fn frac_point(v: &[(i64, i64)]) -> QVector {
    QVector::from_pairs(v)
}

/// Concatenates blocks of generic values `1/257, 2/257, ...`.
fn block_values(blocks: &[usize], out: &mut Vec<Frac>) {
    for (j, &b) in blocks.iter().enumerate() {
        out.extend(std::iter::repeat_n(generic(j + 1), b));
    }
}

fn case(label: &str, structure: &str, point: QVector) -> Stratum {
    Stratum {
        descriptor: StratumDescriptor::Case {
            label: label.into(),
            structure: structure.into(),
        },
        witness: point,
    }
}

/// Every stratum the descriptor grammar knows for a type and mode, with a
/// witness point each, in matching priority order.
pub fn strata(t: GroupType, mode: Mode) -> Vec<Stratum> {
    let n = t.rank;
    let mut out = Vec::new();
    match t.family {
        Family::A => {
            for parts in enumerate_partitions(n + 1) {
                let mut v = Vec::new();
                block_values(&parts, &mut v);
                let mean = v.iter().copied().sum::<Frac>() / Frac::from_int(v.len() as i64);
                let v = v.into_iter().map(|x| x - mean).collect();
                out.push(Stratum {
                    descriptor: StratumDescriptor::Partition(parts),
                    witness: QVector::new(v),
                });
            }
        }
        Family::B | Family::C | Family::D => {
            let halves = |rest: usize| -> Vec<Option<usize>> {
                match mode {
                    Mode::Torus => (0..=rest).map(Some).collect(),
                    Mode::Linear => vec![None],
                }
            };
            for zero in (0..=n).rev() {
                for half in halves(n - zero) {
                    let rest = n - zero - half.unwrap_or(0);
                    for blocks in enumerate_partitions(rest) {
                        let mut v = vec![Frac::ZERO; zero];
                        v.extend(std::iter::repeat_n(Frac::new(1, 2), half.unwrap_or(0)));
                        block_values(&blocks, &mut v);
                        out.push(Stratum {
                            descriptor: StratumDescriptor::Classical { zero, half, blocks },
                            witness: QVector::new(v),
                        });
                    }
                }
            }
            if t.family == Family::D && n.is_multiple_of(2) {
                for parts in enumerate_partitions(n / 2) {
                    let doubled: Vec<usize> = parts.iter().map(|p| 2 * p).collect();
                    let mut v = Vec::new();
                    block_values(&doubled, &mut v);
                    v[doubled[0] - 1] = -v[doubled[0] - 1];
                    out.push(Stratum {
                        descriptor: StratumDescriptor::Exotic { parts },
                        witness: QVector::new(v),
                    });
                }
            }
        }
        Family::G2 => out = g2_strata(mode),
        Family::F4 => out = f4_strata(mode),
    }
    out
}

fn g2_strata(mode: Mode) -> Vec<Stratum> {
    let g = GENERIC_DEN;
    match mode {
        Mode::Torus => vec![
            case("(b)", "S_3 ⋊ S_2", frac_point(&[(0, 1), (0, 1), (0, 1)])),
            case("(c)", "S_3", frac_point(&[(1, 3), (1, 3), (-2, 3)])),
            case("(e)", "S_2 ⋊ S_2", frac_point(&[(1, 2), (1, 2), (-1, 1)])),
            case("(d)", "S_2", frac_point(&[(1, g), (1, g), (-2, g)])),
            case("(f)", "Z/2", frac_point(&[(0, 1), (1, g), (-1, g)])),
            case("(a)", "{1}", frac_point(&[(1, g), (3, g), (-4, g)])),
        ],
        Mode::Linear => vec![
            case("(a)", "S_3 ⋊ S_2", frac_point(&[(0, 1), (0, 1), (0, 1)])),
            case("(b)", "S_2", frac_point(&[(1, g), (1, g), (-2, g)])),
            case("(d)", "Z/2", frac_point(&[(0, 1), (1, g), (-1, g)])),
            case("(c)", "{1}", frac_point(&[(1, g), (3, g), (-4, g)])),
        ],
    }
}

fn f4_strata(mode: Mode) -> Vec<Stratum> {
    let g = GENERIC_DEN;
    // No signed sum of these vanishes unless a case forces it.
    let (x, y, z, w) = ((2, g), (7, g), (19, g), (53, g));
    let h = (1, 2);
    let o = (0, 1);
    let twice = (4, g);
    let sum_xy = (9, g);
    let p = |v: [(i64, i64); 4]| frac_point(&v);
    match mode {
        Mode::Torus => vec![
            case("1(a)", "W(F_4)", p([o, o, o, o])),
            case("1(b)", "((Z/2)^3 ⋊ S_4) ⋊ {1,τ_3}", p([h, h, h, h])),
            case("1(c)", "((Z/2)^2 ⋊ S_3) ⋊ {1,τ_1}", p([o, o, o, h])),
            case("1(d)", "(Z/2)^2 ⋊ S_3", p([h, h, h, o])),
            case("1(e)", "(((Z/2 ⋊ S_2) × Z/2) ⋊ S_2) ⋊ S_3", p([o, o, h, h])),
            case("1(f)", "((Z/2)^2 ⋊ S_3) ⋊ {1,τ_1}", p([o, o, o, x])),
            case("1(g)", "(Z/2)^2 ⋊ S_3", p([h, h, h, x])),
            case("1(h)", "((Z/2 ⋊ S_2) × S_2) ⋊ S_3", p([o, o, x, x])),
            case("1(i)", "((Z/2 ⋊ S_2) × S_2) ⋊ {1,τ_1}", p([h, h, x, x])),
            case("1(j)", "S_3 ⋊ {1,τ_1}", p([o, x, x, x])),
            case("1(k)", "S_3", p([h, x, x, x])),
            case("1(l)", "(Z/2 ⋊ S_2) ⋊ {1,τ_1}", p([o, o, x, y])),
            case("1(m)", "Z/2 ⋊ S_2", p([h, h, x, y])),
            case("1(n)", "S_2 ⋊ {1,τ_1}", p([o, x, x, y])),
            case("1(n')", "S_2 ⋊ S_3", p([o, x, x, twice])),
            case("1(o)", "S_2", p([h, x, x, y])),
            case("1(p)", "{1,τ_1}", p([o, x, y, z])),
            case("1(p')", "S_3", p([o, x, y, sum_xy])),
            case("2(a)", "S_4 ⋊ {1,τ_3}", p([x, x, x, x])),
            case("2(b)", "(Z/2 ⋊ S_2) ⋊ {1,τ_1}", p([x, x, y, y])),
            case("2(c)", "S_2", p([x, x, y, z])),
            case("2", "{1}", p([x, y, z, w])),
        ],
        Mode::Linear => vec![
            case("(1)", "W(F_4)", p([o, o, o, o])),
            case("(2)", "((Z/2)^2 ⋊ S_3) ⋊ {1,τ_1}", p([o, o, o, x])),
            case("(3)", "((Z/2 ⋊ S_2) × S_2) ⋊ S_3", p([o, o, x, x])),
            case("(4)", "(Z/2 ⋊ S_2) ⋊ {1,τ_1}", p([o, o, x, y])),
            case("(5)", "S_3 ⋊ {1,τ_1}", p([o, x, x, x])),
            case("(6)", "S_2 ⋊ {1,τ_1}", p([o, x, x, y])),
            case("(6')", "S_2 ⋊ S_3", p([o, x, x, twice])),
            case("(7)", "{1,τ_1}", p([o, x, y, z])),
            case("(7')", "{1} ⋊ S_3", p([o, x, y, sum_xy])),
            case("(8)", "S_2", p([x, x, y, z])),
            case("(9)", "S_3", p([x, x, x, y])),
            case("(10)", "{1}", p([x, y, z, w])),
        ],
    }
}

fn find_class(group: &WeylGroup, report: &ClassificationReport, h: &Subgroup) -> Option<usize> {
    report.classes.iter().position(|c| {
        c.fingerprint() == h.fingerprint()
            && matches!(are_conjugate(group, &c.representative, h), Ok(Some(_)))
    })
}

/// Labels each class with the first stratum whose witness has a conjugate
/// stabilizer; classes no stratum reaches are labelled [`UNLISTED`].
pub fn attach_descriptors(
    mut report: ClassificationReport,
    space: &ActionSpace,
    t: GroupType,
) -> ClassificationReport {
    let group = space.group();
    for s in strata(t, space.mode()) {
        let Ok(h) = stabilizer(space, &s.witness) else {
            continue;
        };
        let Some(i) = find_class(group, &report, &h) else {
            continue;
        };
        if report.classes[i].descriptor.is_none() {
            if let Ok(text) = render_descriptor(t, &s.descriptor) {
                report.classes[i].descriptor = Some(text);
            }
        }
    }
    for c in &mut report.classes {
        c.descriptor.get_or_insert_with(|| UNLISTED.to_string());
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbits::{classify, DEFAULT_SCHEDULE};

    fn ty(f: Family, n: usize) -> GroupType {
        GroupType::new(f, n).unwrap()
    }

    fn all_types() -> Vec<GroupType> {
        Family::ALL
            .iter()
            .flat_map(|&f| {
                let (lo, hi) = f.rank_bounds();
                (lo..=hi.min(5)).map(move |n| ty(f, n))
            })
            .collect()
    }

    #[test]
    fn closure_orders_match_known_values() {
        for t in all_types() {
            let w = weyl_group(t).unwrap();
            assert_eq!(w.order() as u128, t.weyl_order(), "{t}");
        }
        assert_eq!(ty(Family::A, 2).weyl_order(), 6);
        assert_eq!(ty(Family::D, 4).weyl_order(), 192);
    }

    #[test]
    fn a2_space_is_the_trace_zero_plane() {
        let s = build(ty(Family::A, 2), Mode::Torus).unwrap();
        assert_eq!(s.ambient_dim(), 3);
        assert_eq!(s.rank(), 2);
        assert_eq!(s.group().order(), 6);
    }

    #[test]
    fn f4_contains_both_triality_maps() {
        let w = weyl_group(GroupType::exceptional(Family::F4).unwrap()).unwrap();
        assert_eq!(w.order(), 1152);
        assert!(w.find(&triality_a()).is_some());
        assert!(w.find(&triality_b()).is_some());
    }

    #[test]
    fn f4_outer_quotient_is_s3() {
        let q = f4_triality_quotient().unwrap();
        assert_eq!(q.order, 6);
        assert!(q.non_abelian);
        assert!(q.hat_swaps);
    }

    #[test]
    fn b3_lattice_is_even_sum() {
        let s = build(ty(Family::B, 3), Mode::Torus).unwrap();
        let l = s.lattice().unwrap();
        assert!(!l.contains(&QVector::from_ints(&[1, 0, 0])).unwrap());
        assert!(l.contains(&QVector::from_ints(&[1, 1, 0])).unwrap());
        let c = build(ty(Family::C, 3), Mode::Torus).unwrap();
        assert!(c
            .lattice()
            .unwrap()
            .contains(&QVector::from_ints(&[1, 0, 0]))
            .unwrap());
    }

    #[test]
    fn lattices_are_invariant_under_every_element() {
        for t in all_types().into_iter().filter(|t| t.weyl_order() <= 4000) {
            let m = model(t);
            let w = weyl_group(t).unwrap();
            for e in w.elements() {
                assert!(m.lattice.is_invariant_under(e).unwrap(), "{t}");
            }
        }
    }

    #[test]
    fn linear_spaces_have_no_lattice() {
        let s = build(ty(Family::C, 2), Mode::Linear).unwrap();
        assert!(s.lattice().is_none());
    }

    #[test]
    fn unsupported_ranks_are_rejected() {
        assert!(GroupType::new(Family::A, 0).is_err());
        assert!(GroupType::new(Family::A, 8).is_err());
        assert!(GroupType::new(Family::D, 1).is_err());
        assert!(GroupType::new(Family::G2, 3).is_err());
    }

    #[test]
    fn parses_type_names() {
        assert_eq!("A3".parse::<GroupType>().unwrap(), ty(Family::A, 3));
        assert_eq!("g2".parse::<GroupType>().unwrap(), ty(Family::G2, 2));
        assert_eq!("F4".parse::<GroupType>().unwrap(), ty(Family::F4, 4));
        assert!("E6".parse::<GroupType>().is_err());
        assert!("B9".parse::<GroupType>().is_err());
        assert_eq!(ty(Family::D, 4).to_string(), "D4");
    }

    #[test]
    fn formula_examples() {
        assert_eq!(formula_genus(ty(Family::A, 3), Mode::Torus), 5);
        assert_eq!(formula_genus(ty(Family::B, 3), Mode::Torus), 14);
        assert_eq!(formula_genus(ty(Family::D, 4), Mode::Torus), 19);
        assert_eq!(formula_genus(ty(Family::F4, 4), Mode::Torus), 17);
        assert_eq!(formula_genus(ty(Family::G2, 2), Mode::Linear), 4);
        assert_eq!(formula_genus(ty(Family::B, 2), Mode::Torus), 7);
        assert_eq!(formula_genus(ty(Family::C, 2), Mode::Torus), 5);
        assert_eq!(formula_genus(ty(Family::B, 3), Mode::Linear), 7);
    }

    #[test]
    fn type_a_formula_is_partition_count() {
        for n in 1..=7 {
            for mode in [Mode::Torus, Mode::Linear] {
                assert_eq!(
                    formula_genus(ty(Family::A, n), mode),
                    partition_count(n + 1)
                );
            }
        }
    }

    // The classical sums count the strata the descriptor grammar enumerates:
    // B counts ordered (zero, half) splits, C and D unordered ones.
    #[test]
    fn classical_formulas_count_strata() {
        for n in 2..=6 {
            let b = strata(ty(Family::B, n), Mode::Torus).len() as u128;
            assert_eq!(formula_genus(ty(Family::B, n), Mode::Torus), b);
            let unordered: u128 = (0..=n)
                .flat_map(|z| (0..=n - z).map(move |h| (z, h)))
                .filter(|(z, h)| z >= h)
                .map(|(z, h)| enumerate_partitions(n - z - h).len() as u128)
                .sum();
            assert_eq!(formula_genus(ty(Family::C, n), Mode::Torus), unordered);
            let exotic = if n % 2 == 0 {
                enumerate_partitions(n / 2).len() as u128
            } else {
                0
            };
            assert_eq!(
                formula_genus(ty(Family::D, n), Mode::Torus),
                unordered + exotic
            );
            for f in [Family::B, Family::C, Family::D] {
                let t = ty(f, n);
                assert_eq!(
                    formula_genus(t, Mode::Linear),
                    strata(t, Mode::Linear).len() as u128
                );
            }
        }
    }

    #[test]
    fn render_examples() {
        let a = render_descriptor(
            ty(Family::A, 3),
            &StratumDescriptor::Partition(vec![2, 1, 1]),
        );
        assert_eq!(a.unwrap(), "S_2 × S_1 × S_1");
        let b = StratumDescriptor::Classical {
            zero: 1,
            half: Some(1),
            blocks: vec![1],
        };
        assert_eq!(
            render_descriptor(ty(Family::B, 3), &b).unwrap(),
            "((Z/2)^1 ⋊ S_1) × ((Z/2)^0 ⋊ S_1) × S_1"
        );
        let h = StratumDescriptor::Exotic { parts: vec![2] };
        assert_eq!(render_descriptor(ty(Family::D, 4), &h).unwrap(), "H_{4}");
        let h2 = StratumDescriptor::Exotic { parts: vec![1, 1] };
        assert_eq!(
            render_descriptor(ty(Family::D, 4), &h2).unwrap(),
            "H_{2} · S_2"
        );
        let lin = StratumDescriptor::Classical {
            zero: 2,
            half: None,
            blocks: vec![1],
        };
        assert_eq!(
            render_descriptor(ty(Family::C, 3), &lin).unwrap(),
            "((Z/2)^2 ⋊ S_2) × S_1"
        );
    }

    #[test]
    fn inconsistent_strata_are_rejected() {
        let h = StratumDescriptor::Exotic { parts: vec![2] };
        assert!(render_descriptor(ty(Family::D, 5), &h).is_err());
        assert!(render_descriptor(ty(Family::B, 4), &h).is_err());
        let p = StratumDescriptor::Partition(vec![2, 2]);
        assert!(render_descriptor(ty(Family::A, 2), &p).is_err());
        assert!(render_descriptor(ty(Family::B, 3), &p).is_err());
        let c = StratumDescriptor::Classical {
            zero: 1,
            half: Some(1),
            blocks: vec![0, 1],
        };
        assert!(render_descriptor(ty(Family::C, 2), &c).is_err());
    }

    #[test]
    fn witnesses_lie_in_their_spaces() {
        for t in all_types() {
            for mode in [Mode::Torus, Mode::Linear] {
                let space = build(t, mode).unwrap();
                for s in strata(t, mode) {
                    space.check_point(&s.witness).unwrap();
                    render_descriptor(t, &s.descriptor).unwrap();
                }
            }
        }
    }

    #[test]
    fn a2_classes_all_matched() {
        let t = ty(Family::A, 2);
        let space = build(t, Mode::Torus).unwrap();
        let r = attach_descriptors(classify(&space, &DEFAULT_SCHEDULE).unwrap(), &space, t);
        assert_eq!(r.count(), 3);
        let mut labels: Vec<String> = r
            .classes
            .iter()
            .map(|c| c.descriptor.clone().unwrap())
            .collect();
        labels.sort();
        assert_eq!(labels, ["S_1 × S_1 × S_1", "S_2 × S_1", "S_3"]);
    }

    #[test]
    fn g2_torus_cases_cover_every_class() {
        let t = ty(Family::G2, 2);
        let space = build(t, Mode::Torus).unwrap();
        let r = attach_descriptors(classify(&space, &DEFAULT_SCHEDULE).unwrap(), &space, t);
        assert_eq!(r.count(), 6);
        assert!(r
            .classes
            .iter()
            .all(|c| c.descriptor.as_deref() != Some(UNLISTED)));
    }

    #[test]
    fn d4_has_one_exotic_label() {
        let t = ty(Family::D, 4);
        let space = build(t, Mode::Torus).unwrap();
        let r = attach_descriptors(classify(&space, &DEFAULT_SCHEDULE).unwrap(), &space, t);
        let exotic = r
            .classes
            .iter()
            .filter(|c| {
                c.descriptor
                    .as_deref()
                    .is_some_and(|d| d.starts_with("H_{4}"))
            })
            .count();
        assert_eq!(exotic, 1);
    }
}
