//! Serializable reports: single-type genus reports, summary tables, class
//! listings and lattice comparisons, as JSON or Markdown.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::catalog::{self, Family, GroupType};
use crate::error::{Error, Result};
use crate::exactlin::{Frac, QVector};
use crate::octonion;
use crate::orbits::{
    classify_with, compare_lattices_with, ClassifyOptions, Mode, DEFAULT_SCHEDULE,
};

pub const SCHEMA_VERSION: u32 = 1;

/// `group` for the torus action, `algebra` for the Cartan subalgebra.
pub fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Torus => "group",
        Mode::Linear => "algebra",
    }
}

pub fn parse_mode(s: &str) -> Result<Mode> {
    match s {
        "group" | "torus" => Ok(Mode::Torus),
        "algebra" | "linear" => Ok(Mode::Linear),
        _ => Err(Error::Parse(format!("unknown mode {s:?}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    Formula,
    Brute,
    #[default]
    Both,
}

impl Method {
    fn formula(self) -> bool {
        self != Method::Brute
    }

    fn brute(self) -> bool {
        self != Method::Formula
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Method> {
        match s {
            "formula" => Ok(Method::Formula),
            "brute" => Ok(Method::Brute),
            "both" => Ok(Method::Both),
            _ => Err(Error::Parse(format!("unknown method {s:?}"))),
        }
    }
}

/// Parses `4,8,12,24`.
pub fn parse_schedule(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad denominator {x:?}")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    pub method: Method,
    pub schedule: Vec<u64>,
    pub classify: ClassifyOptions,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            method: Method::Both,
            schedule: DEFAULT_SCHEDULE.to_vec(),
            classify: ClassifyOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruteSummary {
    pub count: u64,
    pub denominators: Vec<u64>,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub order: u64,
    pub fixed_dim: u64,
    pub witness: Vec<String>,
    pub descriptor: Option<String>,
    pub strongly_regular: bool,
    /// SHA-256 of the order and class-size profile.
    pub fingerprint: String,
}

impl ClassEntry {
    /// Matched to a sign-twisted type D stratum.
    pub fn is_exotic(&self) -> bool {
        self.descriptor
            .as_deref()
            .is_some_and(|d| d.starts_with("H_"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenusReport {
    pub schema_version: u32,
    #[serde(rename = "type")]
    pub family: String,
    pub rank: u64,
    pub mode: String,
    pub formula: Option<u64>,
    pub brute: Option<BruteSummary>,
    pub classes: Vec<ClassEntry>,
    pub discrepancy: bool,
    pub warnings: Vec<String>,
}

pub fn genus_report(t: GroupType, mode: Mode, opts: &RunOptions) -> Result<GenusReport> {
    let formula = opts
        .method
        .formula()
        .then(|| catalog::formula_genus(t, mode) as u64);
    let mut warnings = t.warnings();
    let (brute, classes) = if opts.method.brute() {
        let space = catalog::build(t, mode)?;
        let report = classify_with(&space, &opts.schedule, &opts.classify)?;
        let report = catalog::attach_descriptors(report, &space, t);
        if !report.stable {
            warnings.push(format!(
                "brute-force count not stable: the last denominator ({}) found new classes",
                opts.schedule.last().copied().unwrap_or_default()
            ));
        }
        let mut classes: Vec<ClassEntry> = report
            .classes
            .iter()
            .map(|c| ClassEntry {
                order: c.order() as u64,
                fixed_dim: c.fixed_dim as u64,
                witness: c.witness.to_strings(),
                descriptor: c.descriptor.clone(),
                strongly_regular: c.strongly_regular(),
                fingerprint: c.fingerprint().digest(),
            })
            .collect();
        classes.sort_by(|a, b| {
            b.order
                .cmp(&a.order)
                .then_with(|| a.fingerprint.cmp(&b.fingerprint))
        });
        let summary = BruteSummary {
            count: report.count() as u64,
            denominators: report.denominators_used.clone(),
            stable: report.stable,
        };
        (Some(summary), classes)
    } else {
        (None, Vec::new())
    };
    let discrepancy = matches!((&formula, &brute), (Some(f), Some(b)) if *f != b.count);
    if discrepancy {
        warnings.push("closed-form value differs from the brute-force count".into());
    }
    Ok(GenusReport {
        schema_version: SCHEMA_VERSION,
        family: t.family.to_string(),
        rank: t.rank as u64,
        mode: mode_name(mode).into(),
        formula,
        brute,
        classes,
        discrepancy,
        warnings,
    })
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), T::to_string)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

impl GenusReport {
    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn from_json(s: &str) -> Result<GenusReport> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn type_name(&self) -> String {
        match self.family.parse::<Family>() {
            Ok(f) if f.is_exceptional() => self.family.clone(),
            _ => format!("{}{}", self.family, self.rank),
        }
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "## {} ({})\n", self.type_name(), self.mode);
        let _ = writeln!(s, "| Formula | Brute force | Stable | Discrepancy |");
        let _ = writeln!(s, "|---|---|---|---|");
        let (count, stable) = match &self.brute {
            Some(b) => (b.count.to_string(), b.stable.to_string()),
            None => ("-".into(), "-".into()),
        };
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} |",
            opt(&self.formula),
            count,
            stable,
            if self.discrepancy { "yes" } else { "no" }
        );
        if let Some(b) = &self.brute {
            let dens: Vec<String> = b.denominators.iter().map(u64::to_string).collect();
            let _ = writeln!(s, "\nDenominators: {}", dens.join(", "));
        }
        if !self.classes.is_empty() {
            s.push('\n');
            s.push_str(&self.classes_markdown());
        }
        for w in &self.warnings {
            let _ = writeln!(s, "\n> warning: {w}");
        }
        s
    }

    /// The class listing as a Markdown table.
    pub fn classes_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "| Order | Fixed dim | Witness | Stabilizer | Notes |");
        let _ = writeln!(s, "|---|---|---|---|---|");
        for c in &self.classes {
            let mut notes = Vec::new();
            if c.strongly_regular {
                notes.push("strongly regular");
            }
            if c.is_exotic() {
                notes.push("exotic");
            }
            let _ = writeln!(
                s,
                "| {} | {} | ({}) | {} | {} |",
                c.order,
                c.fixed_dim,
                c.witness.join(", "),
                c.descriptor.as_deref().unwrap_or("-"),
                notes.join(", ")
            );
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    #[serde(rename = "type")]
    pub name: String,
    pub weyl_order: u64,
    pub formula: Option<u64>,
    pub brute: Option<u64>,
    /// `None` unless both values were computed.
    pub agree: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenusTable {
    pub schema_version: u32,
    pub mode: String,
    pub max_rank: u64,
    pub rows: Vec<TableRow>,
}

/// Types listed in a table up to `max_rank`: `A1..`, `B2..`, `C2..`, `D3..`,
/// then `G2` and `F4` when the rank allows.
pub fn table_types(max_rank: usize) -> Vec<GroupType> {
    let mut out = Vec::new();
    for (family, start) in [
        (Family::A, 1),
        (Family::B, 2),
        (Family::C, 2),
        (Family::D, 3),
    ] {
        let hi = family.rank_bounds().1.min(max_rank);
        out.extend((start..=hi).filter_map(|n| GroupType::new(family, n).ok()));
    }
    for f in [Family::G2, Family::F4] {
        if max_rank >= f.rank_bounds().0 {
            out.extend(GroupType::exceptional(f));
        }
    }
    out
}

pub fn genus_table(mode: Mode, max_rank: usize, opts: &RunOptions) -> Result<GenusTable> {
    if max_rank == 0 {
        return Err(Error::Parse("max rank must be positive".into()));
    }
    let rows = table_types(max_rank)
        .into_iter()
        .map(|t| {
            let r = genus_report(t, mode, opts)?;
            let brute = r.brute.as_ref().map(|b| b.count);
            Ok(TableRow {
                name: t.name(),
                weyl_order: t.weyl_order() as u64,
                formula: r.formula,
                brute,
                agree: r.formula.zip(brute).map(|(f, b)| f == b),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GenusTable {
        schema_version: SCHEMA_VERSION,
        mode: mode_name(mode).into(),
        max_rank: max_rank as u64,
        rows,
    })
}

impl GenusTable {
    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn to_markdown(&self) -> String {
        let (head, value) = if self.mode == "group" {
            ("Group", "Genus number")
        } else {
            ("Lie algebra", "Number of orbit types")
        };
        let mut s = String::new();
        let _ = writeln!(
            s,
            "| {head} | Weyl group order | {value} (formula) | {value} (brute force) | Agree |"
        );
        let _ = writeln!(s, "|---|---|---|---|---|");
        for r in &self.rows {
            let agree = match r.agree {
                Some(true) => "yes",
                Some(false) => "**NO**",
                None => "-",
            };
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {} |",
                r.name,
                r.weyl_order,
                opt(&r.formula),
                opt(&r.brute),
                agree
            );
        }
        s
    }

    pub fn row(&self, name: &str) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JumpEntry {
    pub point: Vec<String>,
    pub fine_order: u64,
    pub coarse_order: u64,
    pub denominator: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeComparison {
    pub schema_version: u32,
    #[serde(rename = "type")]
    pub family: String,
    pub rank: u64,
    pub coarse_index: u64,
    pub fine_count: u64,
    pub coarse_count: u64,
    pub pair_count: u64,
    /// Jump points up to the Weyl action modulo the fine lattice.
    pub jump_strata: u64,
    pub jumps: Vec<JumpEntry>,
}

/// Compares the coroot lattice `L` with `(1/k)·L`.
pub fn lattice_comparison(
    t: GroupType,
    coarse_index: u64,
    opts: &RunOptions,
) -> Result<LatticeComparison> {
    if coarse_index == 0 {
        return Err(Error::Parse("coarse index must be positive".into()));
    }
    let space = catalog::build(t, Mode::Torus)?;
    let fine = space.lattice().ok_or(Error::MissingLattice)?;
    let coarse = fine.scaled(Frac::new(1, coarse_index as i64))?;
    let r = compare_lattices_with(&space, &coarse, &opts.schedule, &opts.classify)?;
    let group = space.group();
    let mut reps: Vec<&QVector> = Vec::new();
    for j in &r.jumps {
        let mut seen = false;
        for q in &reps {
            for w in group.elements() {
                if fine.contains(&(&w.mul_vec(&j.point) - q))? {
                    seen = true;
                    break;
                }
            }
        }
        if !seen {
            reps.push(&j.point);
        }
    }
    Ok(LatticeComparison {
        schema_version: SCHEMA_VERSION,
        family: t.family.to_string(),
        rank: t.rank as u64,
        coarse_index,
        fine_count: r.fine_count as u64,
        coarse_count: r.coarse_count as u64,
        pair_count: r.pair_count as u64,
        jump_strata: reps.len() as u64,
        jumps: r
            .jumps
            .iter()
            .map(|j| JumpEntry {
                point: j.point.to_strings(),
                fine_order: j.fine_order as u64,
                coarse_order: j.coarse_order as u64,
                denominator: j.denominator,
            })
            .collect(),
    })
}

impl LatticeComparison {
    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "Lattice L vs (1/{})·L: {} jump point(s) in {} stratum(s); classes fine {} / coarse {}; centralizer pairs {}\n",
            self.coarse_index,
            self.jumps.len(),
            self.jump_strata,
            self.fine_count,
            self.coarse_count,
            self.pair_count
        );
        let _ = writeln!(s, "| Point | Fine order | Coarse order | Denominator |");
        let _ = writeln!(s, "|---|---|---|---|");
        for j in &self.jumps {
            let _ = writeln!(
                s,
                "| ({}) | {} | {} | {} |",
                j.point.join(", "),
                j.fine_order,
                j.coarse_order,
                j.denominator
            );
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationFailure {
    pub params: Vec<String>,
    /// 1-based basis indices `(i, j)` of `v_i`, `v_j`.
    pub pair: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OctonionCheck {
    pub schema_version: u32,
    pub seed: u64,
    pub samples: u64,
    pub passed: u64,
    pub failures: Vec<DerivationFailure>,
}

/// Tests the derivation identity for `samples` seeded parameter vectors.
pub fn octonion_check(samples: usize, seed: u64) -> OctonionCheck {
    let mut passed = 0;
    let mut failures = Vec::new();
    for p in octonion::sample_params(seed, samples) {
        let check = octonion::check_derivation(&p);
        match check.failing_pair {
            None => passed += 1,
            Some((i, j)) => failures.push(DerivationFailure {
                params: p.iter().map(Frac::to_string).collect(),
                pair: (i + 1, j + 1),
            }),
        }
    }
    OctonionCheck {
        schema_version: SCHEMA_VERSION,
        seed,
        samples: samples as u64,
        passed,
        failures,
    }
}

impl OctonionCheck {
    pub fn all_passed(&self) -> bool {
        self.passed == self.samples
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn summary(&self) -> String {
        let mut s = format!("{}/{} pass\n", self.passed, self.samples);
        for f in &self.failures {
            let _ = writeln!(
                s,
                "fail at p = ({}): pair (v{}, v{})",
                f.params.join(", "),
                f.pair.0,
                f.pair.1
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(s: &str) -> GroupType {
        s.parse().unwrap()
    }

    #[test]
    fn g2_group_report() {
        let r = genus_report(ty("G2"), Mode::Torus, &RunOptions::default()).unwrap();
        assert_eq!(r.formula, Some(6));
        assert_eq!(r.brute.as_ref().unwrap().count, 6);
        assert!(!r.discrepancy);
        assert_eq!(r.classes.len(), 6);
        assert_eq!(r.family, "G2");
        assert_eq!(r.mode, "group");
    }

    #[test]
    fn discrepancy_is_formula_versus_count() {
        let r = genus_report(ty("B2"), Mode::Torus, &RunOptions::default()).unwrap();
        assert_eq!(r.formula, Some(7));
        assert_eq!(r.brute.as_ref().unwrap().count, 5);
        assert!(r.discrepancy);
        let formula_only = RunOptions {
            method: Method::Formula,
            ..RunOptions::default()
        };
        let r = genus_report(ty("B2"), Mode::Torus, &formula_only).unwrap();
        assert!(r.brute.is_none() && !r.discrepancy && r.classes.is_empty());
    }

    #[test]
    fn classes_sorted_by_order_then_digest() {
        let r = genus_report(ty("C3"), Mode::Torus, &RunOptions::default()).unwrap();
        for w in r.classes.windows(2) {
            assert!(
                w[0].order > w[1].order
                    || (w[0].order == w[1].order && w[0].fingerprint <= w[1].fingerprint)
            );
        }
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let r = genus_report(ty("A2"), Mode::Linear, &RunOptions::default()).unwrap();
        let json = r.to_json();
        let back = GenusReport::from_json(&json).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), json);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(
            v["brute"]["denominators"],
            serde_json::json!([4, 8, 12, 24])
        );
        assert_eq!(v["classes"][0]["witness"][0], "0/1");
    }

    #[test]
    fn table_rows_and_flags() {
        let t = genus_table(Mode::Torus, 2, &RunOptions::default()).unwrap();
        let names: Vec<&str> = t.rows.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["A1", "A2", "B2", "C2", "G2"]);
        assert_eq!(t.row("B2").unwrap().brute, t.row("C2").unwrap().brute);
        assert_eq!(t.row("B2").unwrap().agree, Some(false));
        assert_eq!(t.row("G2").unwrap().weyl_order, 12);
        assert!(t.to_markdown().contains("| B2 | 8 | 7 | 5 | **NO** |"));
    }

    #[test]
    fn table_type_list() {
        let names: Vec<String> = table_types(4).iter().map(|t| t.name()).collect();
        assert_eq!(
            names,
            ["A1", "A2", "A3", "A4", "B2", "B3", "B4", "C2", "C3", "C4", "D3", "D4", "G2", "F4"]
        );
    }

    #[test]
    fn psl2_comparison() {
        let c = lattice_comparison(ty("A1"), 2, &RunOptions::default()).unwrap();
        assert!(c.jumps.iter().any(|j| j.point == ["1/4", "-1/4"]));
        assert_eq!(c.jump_strata, 1);
        let same = lattice_comparison(ty("A1"), 1, &RunOptions::default()).unwrap();
        assert!(same.jumps.is_empty());
        assert_eq!(same.jump_strata, 0);
    }

    #[test]
    fn octonion_summary() {
        let c = octonion_check(20, 7);
        assert_eq!(c.summary(), "20/20 pass\n");
        assert_eq!(octonion_check(20, 7), c);
    }

    #[test]
    fn parsers() {
        assert_eq!(parse_mode("algebra").unwrap(), Mode::Linear);
        assert!(parse_mode("ring").is_err());
        assert_eq!(parse_schedule("4, 8,24").unwrap(), vec![4, 8, 24]);
        assert!(parse_schedule("4,x").is_err());
        assert_eq!("brute".parse::<Method>().unwrap(), Method::Brute);
    }
}
