//! The acceptance suite: numbered criteria, each returning a pass flag and a
//! deterministic detail line.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{self, Family, GroupType};
use crate::error::{Error, Result};
use crate::exactlin::{Frac, QVector};
use crate::octonion::{self, TripleMaps};
use crate::orbits::{
    classify, stabilizer, ActionSpace, ClassificationReport, Mode, DEFAULT_SCHEDULE,
};
use crate::partitions::{enumerate_partitions, partition_count};
use crate::report::{
    genus_report, genus_table, lattice_comparison, mode_name, RunOptions, SCHEMA_VERSION,
};
use crate::weyl::{are_conjugate, conjugate_subgroup, reflection_closure, Subgroup};

pub const CRITERIA: [(u32, &str); 11] = [
    (1, "partition oracle"),
    (2, "Weyl group orders from closure"),
    (3, "type A genus numbers"),
    (4, "exceptional counts"),
    (5, "exotic D4 class"),
    (6, "isomorphism consistency"),
    (7, "algebra-mode B and C counts"),
    (8, "property suite"),
    (9, "octonion certification"),
    (10, "lattice-jump probe"),
    (11, "thread-count determinism"),
];

pub const PROPERTY_SAMPLES: usize = 1000;
pub const OCTONION_SAMPLES: usize = 20;
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub schema_version: u32,
    pub seed: u64,
    pub passed: usize,
    pub total: usize,
    pub criteria: Vec<CriterionResult>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "| # | Criterion | Result | Detail |");
        let _ = writeln!(s, "|---|---|---|---|");
        for c in &self.criteria {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} |",
                c.id,
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.detail.replace('|', "\\|")
            );
        }
        let _ = writeln!(s, "\n{}/{} criteria pass", self.passed, self.total);
        s
    }
}

/// Runs one criterion. Errors are reported as a failure with the message.
pub fn run_criterion(id: u32, seed: u64) -> CriterionResult {
    let name = CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .map_or("unknown criterion", |(_, n)| n)
        .to_string();
    let outcome = match id {
        1 => partition_oracle(),
        2 => closure_orders(),
        3 => type_a_genus(),
        4 => exceptional_counts(),
        5 => exotic_d4(),
        6 => isomorphism_consistency(),
        7 => algebra_classical(),
        8 => property_suite(seed, PROPERTY_SAMPLES),
        9 => octonion_certification(seed),
        10 => lattice_jump_probe(),
        11 => determinism(seed),
        _ => Err(Error::Parse(format!("no criterion {id}"))),
    };
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionResult {
        id,
        name,
        passed,
        detail,
    }
}

pub fn run_all(seed: u64) -> SelftestReport {
    let criteria: Vec<CriterionResult> = CRITERIA
        .iter()
        .map(|&(id, _)| run_criterion(id, seed))
        .collect();
    SelftestReport {
        schema_version: SCHEMA_VERSION,
        seed,
        passed: criteria.iter().filter(|c| c.passed).count(),
        total: criteria.len(),
        criteria,
    }
}

type Outcome = Result<(bool, String)>;

fn ty(family: Family, rank: usize) -> GroupType {
    GroupType::new(family, rank).expect("rank within bounds")
}

fn brute(t: GroupType, mode: Mode) -> Result<ClassificationReport> {
    classify(&catalog::build(t, mode)?, &DEFAULT_SCHEDULE)
}

/// Partitions of `n` with parts at most `k`, by direct recursion.
fn partitions_bounded(n: usize, k: usize) -> u128 {
    if n == 0 {
        return 1;
    }
    (1..=k.min(n))
        .map(|part| partitions_bounded(n - part, part))
        .sum()
}

fn partition_oracle() -> Outcome {
    let mut bad = Vec::new();
    for n in 0..=20 {
        if partition_count(n) != partitions_bounded(n, n) {
            bad.push(format!("count({n})"));
        }
    }
    for n in 0..=15 {
        let parts = enumerate_partitions(n);
        let well_formed = parts.iter().all(|p| {
            p.iter().sum::<usize>() == n && p.windows(2).all(|w| w[0] >= w[1]) && !p.contains(&0)
        });
        let mut dedup = parts.clone();
        dedup.sort();
        dedup.dedup();
        if parts.len() as u128 != partitions_bounded(n, n)
            || !well_formed
            || dedup.len() != parts.len()
        {
            bad.push(format!("enumerate({n})"));
        }
    }
    Ok(if bad.is_empty() {
        (
            true,
            format!(
                "p(20) = {}; n <= 20 counts and n <= 15 enumerations agree",
                partition_count(20)
            ),
        )
    } else {
        (false, format!("mismatches: {}", bad.join(", ")))
    })
}

fn factorial(n: u128) -> u128 {
    (1..=n).product()
}

fn closure_orders() -> Outcome {
    let mut cases: Vec<(GroupType, u128)> = Vec::new();
    for n in 1..=5u128 {
        cases.push((ty(Family::A, n as usize), factorial(n + 1)));
        cases.push((ty(Family::B, n as usize), (1 << n) * factorial(n)));
        cases.push((ty(Family::C, n as usize), (1 << n) * factorial(n)));
        if n >= 2 {
            cases.push((ty(Family::D, n as usize), (1 << (n - 1)) * factorial(n)));
        }
    }
    cases.push((GroupType::exceptional(Family::G2)?, 12));
    cases.push((GroupType::exceptional(Family::F4)?, 1152));
    let mut bad = Vec::new();
    for (t, expected) in &cases {
        let got = catalog::weyl_group(*t)?.order() as u128;
        if got != *expected {
            bad.push(format!("{} = {got} (expected {expected})", t.name()));
        }
    }
    Ok(if bad.is_empty() {
        (true, format!("{} closures match", cases.len()))
    } else {
        (false, bad.join("; "))
    })
}

fn type_a_genus() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, expected) in [(1, 2), (2, 3), (3, 5), (4, 7)] {
        let t = ty(Family::A, n);
        let count = brute(t, Mode::Torus)?.count();
        let formula = catalog::formula_genus(t, Mode::Torus);
        ok &= count == expected && formula == expected as u128;
        parts.push(format!("A{n}: {count} (formula {formula})"));
    }
    Ok((ok, parts.join(", ")))
}

fn exceptional_counts() -> Outcome {
    let g2 = GroupType::exceptional(Family::G2)?;
    let f4 = GroupType::exceptional(Family::F4)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (t, mode, expected) in [
        (g2, Mode::Torus, 6),
        (g2, Mode::Linear, 4),
        (f4, Mode::Linear, 12),
        (f4, Mode::Torus, 17),
    ] {
        let r = brute(t, mode)?;
        ok &= r.count() == expected && r.stable;
        parts.push(format!(
            "{} {}: {} (expected {expected}{})",
            t.name(),
            mode_name(mode),
            r.count(),
            if r.stable { "" } else { ", not stable" }
        ));
    }
    Ok((ok, parts.join(", ")))
}

fn generic(n: usize) -> Vec<Frac> {
    vec![Frac::new(1, 257); n]
}

fn exotic_d4() -> Outcome {
    let d4 = ty(Family::D, 4);
    let torus = catalog::build(d4, Mode::Torus)?;
    let linear = catalog::build(d4, Mode::Linear)?;
    let group = torus.group().clone();
    let standard = stabilizer(&torus, &QVector::new(generic(4)))?;

    let mut exotic_torus = Vec::new();
    for c in brute(d4, Mode::Torus)?.classes {
        if c.order() == 24
            && are_conjugate(&group, &c.representative, &standard)?.is_none()
            && reflection_closure(&group, &c.representative)? == c.representative
        {
            exotic_torus.push(format!("({})", c.witness.to_strings().join(", ")));
        }
    }

    let mut twisted = generic(4);
    twisted[3] = -twisted[3];
    let h4 = stabilizer(&linear, &QVector::new(twisted))?;
    let standard_linear = stabilizer(&linear, &QVector::new(generic(4)))?;
    let h4_is_exotic = h4.order() == 24 && are_conjugate(&group, &h4, &standard_linear)?.is_none();
    let mut linear_has_h4 = false;
    for c in brute(d4, Mode::Linear)?.classes {
        if are_conjugate(&group, &c.representative, &h4)?.is_some() {
            linear_has_h4 = true;
        }
    }

    let ok = exotic_torus.len() == 1 && h4_is_exotic && linear_has_h4;
    Ok((
        ok,
        format!(
            "group mode: {} order-24 reflection classes not conjugate to S4 (expected 1) at {}; algebra mode H4 class present: {}",
            exotic_torus.len(),
            exotic_torus.join(" "),
            h4_is_exotic && linear_has_h4
        ),
    ))
}

fn isomorphism_consistency() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for mode in [Mode::Torus, Mode::Linear] {
        let table = genus_table(mode, 3, &RunOptions::default())?;
        for (a, b) in [
            (ty(Family::B, 2), ty(Family::C, 2)),
            (ty(Family::D, 3), ty(Family::A, 3)),
        ] {
            let (ra, rb) = (brute(a, mode)?, brute(b, mode)?);
            let same = ra.count() == rb.count() && ra.order_multiset() == rb.order_multiset();
            let mut flags = true;
            for t in [a, b] {
                let row = table
                    .row(&t.name())
                    .ok_or_else(|| Error::Parse(format!("no row {}", t.name())))?;
                let (f, c) = (row.formula, row.brute);
                flags &= f.is_some() && c.is_some() && row.agree == Some(f == c);
            }
            ok &= same && flags;
            parts.push(format!(
                "{} {}={} {}={}{}",
                mode_name(mode),
                a.name(),
                ra.count(),
                b.name(),
                rb.count(),
                if flags { "" } else { " (table flag wrong)" }
            ));
        }
        let flagged: Vec<&str> = table
            .rows
            .iter()
            .filter(|r| r.agree == Some(false))
            .map(|r| r.name.as_str())
            .collect();
        if !flagged.is_empty() {
            parts.push(format!(
                "{} discrepancies flagged: {}",
                mode_name(mode),
                flagged.join(" ")
            ));
        }
    }
    Ok((ok, parts.join("; ")))
}

fn algebra_classical() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, expected) in [(2usize, 4usize), (3, 7)] {
        let sum: u128 = (0..=n).map(|i| partition_count(n - i)).sum();
        ok &= sum == expected as u128;
        for f in [Family::B, Family::C] {
            let count = brute(ty(f, n), Mode::Linear)?.count();
            ok &= count == expected;
            parts.push(format!("{f}{n}: {count}"));
        }
    }
    Ok((ok, parts.join(", ")))
}

/// Types of rank at most 3 exercised by the property suite.
pub fn property_types() -> Vec<GroupType> {
    let mut v = vec![
        ty(Family::A, 1),
        ty(Family::A, 2),
        ty(Family::A, 3),
        ty(Family::B, 2),
        ty(Family::B, 3),
        ty(Family::C, 2),
        ty(Family::C, 3),
        ty(Family::D, 3),
    ];
    v.extend(GroupType::exceptional(Family::G2));
    v
}

/// A point of the space with small denominators, so stabilizers are often
/// non-trivial.
fn random_point(rng: &mut ChaCha8Rng, space: &ActionSpace) -> QVector {
    const DENS: [i64; 6] = [1, 2, 3, 4, 6, 12];
    let n = space.ambient_dim();
    let mut coords: Vec<Frac> = (0..n)
        .map(|_| Frac::new(rng.gen_range(-3..=3), DENS[rng.gen_range(0..DENS.len())]))
        .collect();
    if let Some(f) = space.constraint() {
        // Constraints are sum-zero hyperplanes.
        let rest: Frac = coords[..n - 1].iter().fold(Frac::from(0), |a, &b| a + b);
        debug_assert!(f.coords().iter().all(|&c| c == Frac::from(1)));
        coords[n - 1] = -rest;
    }
    QVector::new(coords)
}

#[derive(Default)]
struct Tally {
    checks: u64,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok && self.failures.len() < 5 {
            self.failures.push(what());
        }
    }
}

fn conj_class_axioms(
    tally: &mut Tally,
    group: &crate::weyl::WeylGroup,
    name: &str,
    h: [&Subgroup; 3],
) -> Result<()> {
    let rel = |a: &Subgroup, b: &Subgroup| -> Result<bool> {
        match are_conjugate(group, a, b)? {
            Some(g) => Ok(conjugate_subgroup(group, a, g)? == *b),
            None => Ok(false),
        }
    };
    for x in h {
        tally.check(rel(x, x)?, || format!("{name}: conjugacy not reflexive"));
    }
    for i in 0..3 {
        for j in 0..3 {
            let (ij, ji) = (rel(h[i], h[j])?, rel(h[j], h[i])?);
            tally.check(ij == ji, || format!("{name}: conjugacy not symmetric"));
            for k in 0..3 {
                if ij && rel(h[j], h[k])? {
                    tally.check(rel(h[i], h[k])?, || {
                        format!("{name}: conjugacy not transitive")
                    });
                }
            }
        }
    }
    Ok(())
}

/// Equivariance (both modes), linear scale invariance, conjugacy axioms on
/// `samples` random points per type, then reflection closure of every class.
pub fn property_suite(seed: u64, samples: usize) -> Outcome {
    let mut tally = Tally::default();
    let mut classes = 0usize;
    for (index, t) in property_types().into_iter().enumerate() {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(index as u64));
        let name = t.name();
        let torus = catalog::build(t, Mode::Torus)?;
        let linear = catalog::build(t, Mode::Linear)?;
        let group = torus.group().clone();
        let order = group.order() as u32;
        for _ in 0..samples {
            let theta = random_point(&mut rng, &torus);
            let w = rng.gen_range(0..order);
            let g = rng.gen_range(0..order);
            let image = group.element(w).mul_vec(&theta);
            let mut stabs = Vec::new();
            for space in [&torus, &linear] {
                let h = stabilizer(space, &theta)?;
                let moved = stabilizer(space, &image)?;
                let expected = conjugate_subgroup(&group, &h, w)?;
                tally.check(moved == expected, || {
                    format!(
                        "{name} {}: equivariance at {theta}",
                        mode_name(space.mode())
                    )
                });
                stabs.push(h);
            }
            let c = loop {
                let c = Frac::new(rng.gen_range(-9..=9), rng.gen_range(1..=9));
                if !c.is_zero() {
                    break c;
                }
            };
            let scaled = stabilizer(&linear, &theta.scale(c))?;
            tally.check(scaled == stabs[1], || {
                format!("{name}: scale invariance at {theta} by {c}")
            });

            let other = stabilizer(&torus, &random_point(&mut rng, &torus))?;
            let conj = conjugate_subgroup(&group, &stabs[0], g)?;
            conj_class_axioms(&mut tally, &group, &name, [&stabs[0], &conj, &other])?;
        }
        for space in [&torus, &linear] {
            for c in classify(space, &DEFAULT_SCHEDULE)?.classes {
                classes += 1;
                let closure = reflection_closure(&group, &c.representative)?;
                tally.check(closure == c.representative, || {
                    format!(
                        "{name} {}: class at {} not reflection-generated",
                        mode_name(space.mode()),
                        c.witness
                    )
                });
            }
        }
    }
    let ok = tally.failures.is_empty();
    let detail = if ok {
        format!(
            "{} types x {samples} samples, {classes} classes, {} checks, 0 failures",
            property_types().len(),
            tally.checks
        )
    } else {
        format!("failures: {}", tally.failures.join("; "))
    };
    Ok((ok, detail))
}

fn octonion_certification(seed: u64) -> Outcome {
    let params = octonion::sample_params(seed, OCTONION_SAMPLES);
    let mut passed = 0;
    let mut assembled = 0;
    for p in &params {
        if octonion::check_derivation(p).passed {
            passed += 1;
        }
        let from_generators = TripleMaps::from_generators(p);
        if from_generators == TripleMaps::from_params(p)
            && from_generators.t1 == octonion::cartan_element(p)
            && from_generators.first_failure().is_none()
        {
            assembled += 1;
        }
    }
    let n = params.len();
    Ok((
        passed == n && assembled == n,
        format!("derivation {passed}/{n} pass; generator assembly {assembled}/{n} exact"),
    ))
}

fn lattice_jump_probe() -> Outcome {
    let a1 = ty(Family::A, 1);
    let opts = RunOptions::default();
    let halved = lattice_comparison(a1, 2, &opts)?;
    let hit = halved
        .jumps
        .iter()
        .find(|j| j.point == ["1/4", "-1/4"] && j.coarse_order > j.fine_order);
    let same = lattice_comparison(a1, 1, &opts)?;
    Ok((
        hit.is_some() && same.jumps.is_empty(),
        format!(
            "coarse = 1/2 fine: {} jump(s){}; coarse = fine: {} jump(s)",
            halved.jumps.len(),
            if hit.is_some() {
                ", including (1/4, -1/4)"
            } else {
                ", (1/4, -1/4) missing"
            },
            same.jumps.len()
        ),
    ))
}

/// JSON of a fixed workload, so thread counts can be compared.
pub fn determinism_workload(seed: u64) -> Result<String> {
    let opts = RunOptions::default();
    let mut out = String::new();
    for (t, mode) in [
        ("A3", Mode::Torus),
        ("D4", Mode::Torus),
        ("G2", Mode::Torus),
        ("F4", Mode::Linear),
    ] {
        out.push_str(&genus_report(t.parse()?, mode, &opts)?.to_json());
    }
    let (ok, detail) = property_suite(seed, 50)?;
    let _ = writeln!(out, "{ok} {detail}");
    Ok(out)
}

fn determinism(seed: u64) -> Outcome {
    let threads = std::thread::available_parallelism()
        .map_or(2, |n| n.get())
        .max(2);
    let mut outputs = Vec::new();
    for n in [1, threads] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Parse(e.to_string()))?;
        outputs.push(pool.install(|| determinism_workload(seed))?);
    }
    Ok((
        outputs[0] == outputs[1],
        format!(
            "1 thread vs several: outputs {}",
            if outputs[0] == outputs[1] {
                "identical"
            } else {
                "differ"
            }
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_partition_oracle() {
        assert_eq!(partitions_bounded(5, 5), 7);
        assert_eq!(partitions_bounded(5, 2), 3);
        assert_eq!(partitions_bounded(0, 0), 1);
    }

    #[test]
    fn cheap_criteria_pass() {
        for id in [1, 2, 3, 7, 9, 10] {
            let r = run_criterion(id, DEFAULT_SEED);
            assert!(r.passed, "criterion {id}: {}", r.detail);
        }
    }

    #[test]
    fn small_property_suite() {
        let (ok, detail) = property_suite(3, 20).unwrap();
        assert!(ok, "{detail}");
    }

    #[test]
    fn unknown_criterion_fails() {
        let r = run_criterion(99, 0);
        assert!(!r.passed);
    }

    #[test]
    fn markdown_matrix() {
        let report = SelftestReport {
            schema_version: SCHEMA_VERSION,
            seed: 1,
            passed: 1,
            total: 1,
            criteria: vec![run_criterion(1, 1)],
        };
        let md = report.to_markdown();
        assert!(md.contains("| 1 | partition oracle | PASS |"));
        assert!(md.contains("1/1 criteria pass"));
    }
}
