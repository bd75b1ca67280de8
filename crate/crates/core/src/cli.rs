//! Configuration, per-system default budgets and the command implementations
//! behind the `flowsep` binary. Argument parsing lives in the binary; every
//! function here takes an already merged [`RunConfig`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::checker::{
    bi_verdict, combine_bi, fix_status, homeo_verdict, lattice_contradictions, strong_verdict,
    verdict, Budget, PairSource, PropertyRef, Verdict, PRESET_NAMES,
};
use crate::error::{arg, Error, Result};
use crate::space::Point;
use crate::systems::{
    catalog, default_speed_family, lookup, speed_factors, FlowSystem, Homeo, System, CATALOG_NAMES,
};
use crate::witness::{self, Replay};

/// Exit code of a report with contradictions or pattern mismatches.
pub const EXIT_REPORT_FAILED: i32 = 4;

/// One run's settings. Every field is optional; absent fields fall back to
/// the system's default budget.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: Option<String>,
    pub preset: Option<String>,
    pub delta: Option<f64>,
    pub eps: Option<f64>,
    pub horizon: Option<f64>,
    pub dt: Option<f64>,
    pub grid: Option<usize>,
    pub seed: Option<u64>,
    pub knots: Option<usize>,
    pub amplitude: Option<f64>,
    /// Number of random reparametrizations.
    pub family: Option<usize>,
    /// Same-orbit window (orbit-search bound for homeomorphisms).
    pub window: Option<f64>,
    pub speed_family: Option<Vec<String>>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// `self` with every field set in `over` replaced.
    pub fn overlay(self, over: RunConfig) -> RunConfig {
        RunConfig {
            system: over.system.or(self.system),
            preset: over.preset.or(self.preset),
            delta: over.delta.or(self.delta),
            eps: over.eps.or(self.eps),
            horizon: over.horizon.or(self.horizon),
            dt: over.dt.or(self.dt),
            grid: over.grid.or(self.grid),
            seed: over.seed.or(self.seed),
            knots: over.knots.or(self.knots),
            amplitude: over.amplitude.or(self.amplitude),
            family: over.family.or(self.family),
            window: over.window.or(self.window),
            speed_family: over.speed_family.or(self.speed_family),
            out: over.out.or(self.out),
        }
    }

    /// The default budget of `system` with this config's fields applied.
    pub fn budget_for(&self, system: &str) -> Result<Budget> {
        let mut b = default_budget(system)?;
        if let Some(v) = self.delta {
            b.delta = v;
        }
        if self.eps.is_some() {
            b.eps = self.eps;
        }
        if let Some(v) = self.horizon {
            b.horizon = v;
        }
        if let Some(v) = self.dt {
            b.dt = v;
        }
        if let Some(v) = self.grid {
            b.grid = v;
        }
        if let Some(v) = self.seed {
            b.seed = v;
        }
        if let Some(v) = self.knots {
            b.knots = v;
        }
        if let Some(v) = self.amplitude {
            b.amplitude = v;
        }
        if let Some(v) = self.family {
            b.family = v;
        }
        if self.window.is_some() {
            b.window = self.window;
        }
        Ok(b)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}

/// Budget used for `system` when nothing is configured.
///
/// For homeomorphisms `horizon` is the iterate window N, `window` the
/// orbit-search bound and `grid` the grid resolution (or the number of
/// seeded pairs on the shift).
pub fn default_budget(system: &str) -> Result<Budget> {
    let base = Budget::default();
    Ok(match system {
        "annulus-phi" => Budget {
            delta: 0.01,
            eps: Some(0.1),
            horizon: 20.0,
            dt: 0.002,
            grid: 6,
            amplitude: 0.5,
            ..base
        },
        "annulus-psi" => Budget {
            delta: 0.05,
            eps: Some(0.1),
            horizon: 20.0,
            dt: 0.005,
            grid: 6,
            amplitude: 0.5,
            ..base
        },
        "torus-irrational" => Budget {
            delta: 0.05,
            eps: Some(0.1),
            horizon: 20.0,
            dt: 0.005,
            grid: 6,
            amplitude: 0.5,
            ..base
        },
        "torus-fake-saddle" => Budget {
            delta: 0.005,
            eps: Some(0.2),
            horizon: 20.0,
            dt: 0.001,
            grid: 4,
            family: 2,
            amplitude: 0.5,
            ..base
        },
        "sus-shift" => Budget {
            delta: 0.1,
            eps: Some(0.3),
            horizon: 40.0,
            dt: 0.01,
            grid: 8,
            amplitude: 0.25,
            family: 4,
            ..base
        },
        "sus-ext-plane" => Budget {
            delta: 0.2,
            eps: Some(0.3),
            horizon: 40.0,
            dt: 0.01,
            grid: 6,
            amplitude: 0.25,
            family: 4,
            ..base
        },
        "shift-map" => Budget {
            delta: 0.5,
            horizon: 20.0,
            grid: 10_000,
            window: Some(11.0),
            ..base
        },
        "ext-plane-map" => Budget {
            delta: 0.5,
            horizon: 62.0,
            grid: 12,
            window: Some(25.0),
            ..base
        },
        other => return Err(Error::UnknownSystem(other.to_string())),
    })
}

/// Table of [`default_budget`] for every catalog entry, for `--help`.
pub fn defaults_help() -> String {
    let mut out = String::from(
        "Default budgets (δ, ε, T, Δt, grid, amplitude, family); shared: knots 6, seed 0, η 1e-4:\n",
    );
    for name in CATALOG_NAMES {
        let b = default_budget(name).expect("catalog names have budgets");
        let eps = b.eps.map_or("-".to_string(), |e| e.to_string());
        writeln!(
            out,
            "  {name:<18} {} {eps} {} {} {} {} {}",
            b.delta, b.horizon, b.dt, b.grid, b.amplitude, b.family
        )
        .unwrap();
    }
    out
}

/// Known classifications that a report is expected to reproduce, as
/// `(property, holds)`.
pub fn expected_pattern(system: &str) -> &'static [(&'static str, bool)] {
    match system {
        "annulus-phi" => &[
            ("kinematic", true),
            ("KH-kinematic", true),
            ("KH-expansive", true),
            ("separating", true),
            ("strong-separating", false),
            ("strong-kinematic", false),
            ("strong-KH-kinematic", false),
            ("strong-KH-expansive", false),
        ],
        "annulus-psi" => &[
            ("separating", false),
            ("kinematic", false),
            ("bi-expansive", false),
        ],
        "torus-fake-saddle" => &[
            ("kinematic", true),
            ("separating", true),
            ("KH-kinematic", false),
            ("KH-expansive", false),
            ("C-separating", false),
            ("strong-kinematic", true),
        ],
        "sus-shift" => &[
            ("C-expansive", true),
            ("kinematic", true),
            ("KH-kinematic", true),
        ],
        "sus-ext-plane" => &[
            ("C-separating", true),
            ("KH-expansive", true),
            ("strong-KH-expansive", true),
            ("separating", true),
            ("strong-separating", true),
            ("kinematic", false),
            ("KH-kinematic", false),
            ("strong-KH-kinematic", false),
            ("C-expansive", false),
        ],
        "shift-map" => &[("homeo-expansive", true), ("homeo-separating", true)],
        "ext-plane-map" => &[("homeo-expansive", false), ("homeo-separating", true)],
        _ => &[],
    }
}

/// Properties evaluated for each system in a report.
pub fn report_properties(system: &System) -> Vec<String> {
    match system {
        System::Homeo(_) => vec!["homeo-expansive".into(), "homeo-separating".into()],
        System::Flow(_) => {
            let mut v: Vec<String> = PRESET_NAMES.iter().map(|s| s.to_string()).collect();
            for p in ["separating", "kinematic", "KH-expansive", "KH-kinematic"] {
                v.push(format!("strong-{p}"));
            }
            v.push("bi-expansive".into());
            v
        }
    }
}

/// `catalog [filter]`: one block per system whose name contains `filter`.
pub fn catalog_listing(filter: &str) -> String {
    let mut out = String::new();
    for s in catalog().iter().filter(|s| s.name().contains(filter)) {
        let kind = match s {
            System::Flow(_) => "flow",
            System::Homeo(_) => "homeomorphism",
        };
        writeln!(out, "{:<18} {:<14} {}", s.name(), kind, s.space_name()).unwrap();
        writeln!(out, "{:<18} {}", "", s.notes()).unwrap();
    }
    out
}

fn homeo_source(h: &Homeo, b: &Budget) -> PairSource {
    if h.space().name().starts_with("shift") {
        PairSource::Random {
            count: b.grid,
            seed: b.seed,
        }
    } else {
        PairSource::Grid(b.grid)
    }
}

/// Resolves a property name against a system.
pub fn resolve_property(system: &System, name: &str) -> Result<PropertyRef> {
    match system {
        System::Flow(_) => PropertyRef::parse(name),
        System::Homeo(_) => PropertyRef::parse_homeo(name),
    }
}

/// Evaluates one (system, property) cell.
pub fn evaluate(
    system: &System,
    prop: &PropertyRef,
    budget: &Budget,
    speeds: Option<&[String]>,
) -> Result<Verdict> {
    match (system, prop) {
        (System::Flow(f), PropertyRef::Plain(p)) => verdict(f, p, budget),
        (System::Flow(f), PropertyRef::Strong(p)) => {
            budget.validate(Some(p))?;
            let factors = flow_speeds(f, speeds)?;
            strong_verdict(f, p, budget, &factors)
        }
        (System::Flow(f), PropertyRef::Bi) => {
            let (a, b) = bi_verdict(f, budget)?;
            Ok(combine_bi(a, b))
        }
        (System::Homeo(h), PropertyRef::Homeo(kind)) => {
            let n = budget.horizon.round() as i64;
            let bound = budget.window.unwrap_or(0.0).round() as i64;
            Ok(homeo_verdict(h, *kind, budget.delta, n, homeo_source(h, budget), bound)?.verdict)
        }
        _ => arg(format!(
            "`{}` does not apply to `{}`",
            prop.name(),
            system.name()
        )),
    }
}

fn flow_speeds(
    f: &FlowSystem,
    speeds: Option<&[String]>,
) -> Result<Vec<crate::systems::SpeedFactor>> {
    match speeds {
        Some(names) => speed_factors(f, names),
        None => speed_factors(f, &default_speed_family(f)),
    }
}

fn witness_file_name(w: &crate::checker::Witness) -> String {
    format!("{}.{}.witness", w.system, w.property)
}

/// Result of `classify`.
#[derive(Debug)]
pub struct Classification {
    pub verdict: Verdict,
    pub witness_path: Option<PathBuf>,
}

/// `classify`: one verdict; a violation is written to a witness file in the
/// output directory.
pub fn classify(cfg: &RunConfig) -> Result<Classification> {
    let v = verdict_for(cfg)?;
    let witness_path = match v.witness() {
        Some(w) => {
            let dir = cfg.out_dir();
            std::fs::create_dir_all(&dir)?;
            let path = dir.join(witness_file_name(w));
            witness::write_file(w, &path)?;
            Some(path)
        }
        None => None,
    };
    Ok(Classification {
        verdict: v,
        witness_path,
    })
}

/// The verdict of `cfg.preset` on `cfg.system`, without touching the disk.
pub fn verdict_for(cfg: &RunConfig) -> Result<Verdict> {
    let name = cfg
        .system
        .as_deref()
        .ok_or_else(|| Error::Argument("--system is required".into()))?;
    let preset = cfg
        .preset
        .as_deref()
        .ok_or_else(|| Error::Argument("--preset is required".into()))?;
    let system = lookup(name)?;
    let prop = resolve_property(&system, preset)?;
    let budget = cfg.budget_for(name)?;
    if let System::Flow(_) = system {
        budget.validate(None)?;
        if prop.needs_eps() && budget.eps.is_none() {
            return arg(format!("property `{}` needs eps", prop.name()));
        }
    }
    evaluate(&system, &prop, &budget, cfg.speed_family.as_deref())
}

/// `witness-replay`: the replay of a witness file.
pub fn replay_file(path: &Path) -> Result<Replay> {
    witness::replay(&witness::read_file(path)?)
}

/// One line of the machine-readable report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "kebab-case")]
#[allow(clippy::large_enum_variant)]
pub enum Record {
    Cell {
        system: String,
        property: String,
        verdict: Verdict,
        budget: Budget,
        /// Witness file, relative to the report directory.
        witness: Option<String>,
        /// Known classification, when there is one.
        expected: Option<bool>,
    },
    FixedSet {
        system: String,
        points: Vec<Point>,
        exact: bool,
        open: bool,
    },
    Contradiction {
        system: String,
        detail: String,
    },
    Mismatch {
        system: String,
        property: String,
        expected: bool,
        found: String,
    },
}

/// A full report: the records plus wall-clock seconds per cell, which only
/// appear in the human-readable table.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub records: Vec<Record>,
    pub seconds: BTreeMap<(String, String), f64>,
}

impl Report {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn parse_jsonl(text: &str) -> Result<Vec<Record>> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| Ok(serde_json::from_str(l)?))
            .collect()
    }

    pub fn contradictions(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r, Record::Contradiction { .. }))
            .count()
    }

    pub fn mismatches(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r, Record::Mismatch { .. }))
            .count()
    }

    pub fn exit_code(&self) -> i32 {
        if self.contradictions() + self.mismatches() > 0 {
            EXIT_REPORT_FAILED
        } else {
            0
        }
    }

    /// Fixed-width UTF-8 table: ✓ consistent, ✗ violated, ? inconclusive.
    pub fn table(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:<18} {:<24} {:<7} {:<9} {:>9}",
            "system", "property", "verdict", "expected", "seconds"
        )
        .unwrap();
        writeln!(out, "{}", "─".repeat(71)).unwrap();
        for r in &self.records {
            match r {
                Record::Cell {
                    system,
                    property,
                    verdict,
                    expected,
                    ..
                } => {
                    let mark = match verdict {
                        Verdict::ConsistentUpTo { .. } => "✓",
                        Verdict::Violated { .. } => "✗",
                        Verdict::Inconclusive { .. } => "?",
                    };
                    let exp = match expected {
                        Some(true) => "✓",
                        Some(false) => "✗",
                        None => "",
                    };
                    let secs = self
                        .seconds
                        .get(&(system.clone(), property.clone()))
                        .copied()
                        .unwrap_or(0.0);
                    writeln!(
                        out,
                        "{system:<18} {property:<24} {mark:<7} {exp:<9} {secs:>9.2}"
                    )
                    .unwrap();
                }
                Record::FixedSet {
                    system,
                    points,
                    exact,
                    open,
                } => {
                    let pts: Vec<String> = points.iter().map(|p| p.to_string()).collect();
                    writeln!(
                        out,
                        "{system:<18} fix = {{{}}} ({}, {})",
                        pts.join(", "),
                        if *exact { "exact" } else { "detected" },
                        if *open { "open" } else { "not open" }
                    )
                    .unwrap();
                }
                Record::Contradiction { system, detail } => {
                    writeln!(out, "{system:<18} CONTRADICTION: {detail}").unwrap();
                }
                Record::Mismatch {
                    system,
                    property,
                    expected,
                    found,
                } => {
                    writeln!(
                        out,
                        "{system:<18} MISMATCH: {property} expected {}, found {found}",
                        if *expected { "consistent" } else { "violated" }
                    )
                    .unwrap();
                }
            }
        }
        writeln!(
            out,
            "\n{} contradictions, {} pattern mismatches",
            self.contradictions(),
            self.mismatches()
        )
        .unwrap();
        out
    }
}

/// Runs the catalog × property matrix (or one system when `cfg.system` is
/// set) and cross-checks each system. Witness files are written under
/// `witness_dir` when given.
pub fn run_report(cfg: &RunConfig, witness_dir: Option<&Path>) -> Result<Report> {
    let names: Vec<&str> = match cfg.system.as_deref() {
        Some(s) => {
            lookup(s)?;
            vec![s]
        }
        None => CATALOG_NAMES.to_vec(),
    };
    let mut records = Vec::new();
    let mut seconds = BTreeMap::new();
    for name in names {
        let system = lookup(name)?;
        let budget = cfg.budget_for(name)?;
        let props: Vec<String> = match cfg.preset.as_deref() {
            Some(p) => vec![p.to_string()],
            None => report_properties(&system),
        };
        let expected: BTreeMap<&str, bool> = expected_pattern(name).iter().copied().collect();
        let mut cells = BTreeMap::new();
        for pname in &props {
            let prop = resolve_property(&system, pname)?;
            let start = Instant::now();
            let v = evaluate(&system, &prop, &budget, cfg.speed_family.as_deref())?;
            seconds.insert(
                (name.to_string(), pname.clone()),
                start.elapsed().as_secs_f64(),
            );
            let witness = match (v.witness(), witness_dir) {
                (Some(w), Some(dir)) => {
                    std::fs::create_dir_all(dir)?;
                    let file = witness_file_name(w);
                    witness::write_file(w, &dir.join(&file))?;
                    Some(format!("witnesses/{file}"))
                }
                _ => None,
            };
            let exp = expected.get(pname.as_str()).copied();
            if let Some(e) = exp {
                let ok = if e {
                    v.is_consistent()
                } else {
                    v.is_violated()
                };
                if !ok {
                    records.push(Record::Mismatch {
                        system: name.to_string(),
                        property: pname.clone(),
                        expected: e,
                        found: v.tag().to_string(),
                    });
                }
            }
            records.push(Record::Cell {
                system: name.to_string(),
                property: pname.clone(),
                verdict: v.clone(),
                budget: budget.clone(),
                witness,
                expected: exp,
            });
            cells.insert(pname.clone(), v);
        }
        let fix_open = match &system {
            System::Flow(f) => {
                let (points, exact, open) = fix_status(f, &budget)?;
                records.push(Record::FixedSet {
                    system: name.to_string(),
                    points,
                    exact,
                    open,
                });
                exact.then_some(open)
            }
            System::Homeo(_) => None,
        };
        for detail in lattice_contradictions(&cells, fix_open) {
            records.push(Record::Contradiction {
                system: name.to_string(),
                detail,
            });
        }
    }
    Ok(Report { records, seconds })
}

/// `report`: runs the matrix and writes `report.jsonl`, `report.txt` and
/// the witness files into the output directory. The JSON-lines file is
/// re-parsed and compared with the in-memory report before returning.
pub fn cmd_report(cfg: &RunConfig) -> Result<Report> {
    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir)?;
    let report = run_report(cfg, Some(&dir.join("witnesses")))?;
    let jsonl = report.to_jsonl();
    std::fs::write(dir.join("report.jsonl"), &jsonl)?;
    std::fs::write(dir.join("report.txt"), report.table())?;
    if Report::parse_jsonl(&jsonl)? != report.records {
        return Err(Error::Argument(
            "report.jsonl does not parse back to the report".into(),
        ));
    }
    Ok(report)
}
