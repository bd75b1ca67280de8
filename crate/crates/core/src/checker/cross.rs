//! Strong and bi- variants, and consistency of verdicts against the
//! implication lattice between properties.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::space::{isolated_check, Point};
use crate::systems::{inverse_flow, time_change, FlowSystem, SpeedFactor};

use super::orbit::fixed_points;
use super::sweep::verdict;
use super::{Budget, PropertyDescriptor, Verdict, PRESET_NAMES};

/// Pairs `(a, b)` where a violation of `b` at some budget forces a violation
/// of `a` at the same budget, given how the sweep enumerates pairs and
/// reparametrizations. `a` consistent with `b` violated is a contradiction.
const IMPLIED: &[(&str, &str)] = &[
    ("KH-kinematic", "kinematic"),
    ("KH-kinematic", "KH-expansive"),
    ("KH-expansive", "separating"),
    ("kinematic", "separating"),
    ("C-expansive", "kinematic"),
    ("C-expansive", "C-separating"),
    ("C-separating", "separating"),
    ("K-expansive", "kinematic"),
    ("geometric-separating", "separating"),
    ("surjective-KH", "kinematic"),
    ("positive-kinematic", "kinematic"),
    ("KH-positive-kinematic", "positive-kinematic"),
    ("bi-expansive", "KH-positive-kinematic"),
];

/// Properties whose consistency is incompatible with a fixed set that is not
/// open.
const NEEDS_OPEN_FIX: &[&str] = &["KH-kinematic", "KH-expansive"];

/// Result of [`cross_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct CrossReport {
    /// Verdict per preset name.
    pub verdicts: BTreeMap<String, Verdict>,
    /// Fixed points, from the flow's hint or detected on the grid.
    pub fixed: Vec<Point>,
    /// True when the fixed set came from the flow's own description.
    pub fix_exact: bool,
    pub fix_open: bool,
    pub contradictions: Vec<String>,
}

/// Checks a table of verdicts (keyed by property name, `strong-` variants
/// included) against the lattice. `fix_open` is `Some` only when the fixed
/// set is exactly known.
pub fn lattice_contradictions(
    cells: &BTreeMap<String, Verdict>,
    fix_open: Option<bool>,
) -> Vec<String> {
    let mut out = Vec::new();
    let mut check = |a: &str, b: &str| {
        if let (Some(va), Some(vb)) = (cells.get(a), cells.get(b)) {
            if va.is_consistent() && vb.is_violated() {
                out.push(format!("{a} consistent but {b} violated"));
            }
        }
    };
    for (a, b) in IMPLIED {
        check(a, b);
    }
    for name in cells.keys() {
        if let Some(plain) = name.strip_prefix("strong-") {
            check(name, plain);
        }
    }
    if fix_open == Some(false) {
        for name in NEEDS_OPEN_FIX {
            if cells.get(*name).is_some_and(Verdict::is_consistent) {
                out.push(format!("{name} consistent but the fixed set is not open"));
            }
        }
    }
    out
}

/// The fixed set of `f` and whether it is open, at the budget's resolution.
pub fn fix_status(f: &FlowSystem, budget: &Budget) -> Result<(Vec<Point>, bool, bool)> {
    let (fixed, exact) = match f.fixed_hint() {
        Some(hint) => (hint.to_vec(), true),
        None => (fixed_points(f, budget)?, false),
    };
    let space = f.space();
    let res = (4 * budget.grid).max(100);
    let report = isolated_check(space, &fixed, res, 0.05 * space.diameter())?;
    Ok((fixed, exact, report.open))
}

/// Runs every plain preset at `budget` and checks the results against the
/// lattice and the fixed set.
pub fn cross_check(f: &FlowSystem, budget: &Budget) -> Result<CrossReport> {
    let mut verdicts = BTreeMap::new();
    for name in PRESET_NAMES {
        let prop = PropertyDescriptor::preset(name)?;
        verdicts.insert(name.to_string(), verdict(f, &prop, budget)?);
    }
    let (fixed, fix_exact, fix_open) = fix_status(f, budget)?;
    let contradictions = lattice_contradictions(&verdicts, fix_exact.then_some(fix_open));
    Ok(CrossReport {
        verdicts,
        fixed,
        fix_exact,
        fix_open,
        contradictions,
    })
}

/// `prop` for every time change of `f` by the given speed factors.
///
/// The first violating factor wins; its witness names `f` as the system and
/// records the factor.
pub fn strong_verdict(
    f: &FlowSystem,
    prop: &PropertyDescriptor,
    budget: &Budget,
    speeds: &[SpeedFactor],
) -> Result<Verdict> {
    if speeds.is_empty() {
        return crate::error::arg("strong variants need at least one speed factor");
    }
    let mut pairs = 0;
    let mut undecided = Vec::new();
    for v in speeds {
        let g = time_change(f, v, budget.step)?;
        match verdict(&g, prop, budget)? {
            Verdict::Violated { mut witness } => {
                witness.system = f.name().to_string();
                witness.property = format!("strong-{}", prop.name);
                witness.speed = Some(v.name().to_string());
                return Ok(Verdict::Violated { witness });
            }
            Verdict::ConsistentUpTo { pairs: p, .. } => pairs += p,
            Verdict::Inconclusive { reason } => undecided.push(format!("{}: {reason}", v.name())),
        }
    }
    if !undecided.is_empty() {
        return Ok(Verdict::Inconclusive {
            reason: undecided.join("; "),
        });
    }
    Ok(Verdict::ConsistentUpTo {
        budget: budget.clone(),
        pairs,
    })
}

/// KH-positive-kinematic for `f` and for its inverse.
pub fn bi_verdict(f: &FlowSystem, budget: &Budget) -> Result<(Verdict, Verdict)> {
    let prop = PropertyDescriptor::preset("KH-positive-kinematic")?;
    let forward = verdict(f, &prop, budget)?;
    let g = inverse_flow(f);
    let backward = match verdict(&g, &prop, budget)? {
        Verdict::Violated { mut witness } => {
            witness.system = f.name().to_string();
            witness.inverse = true;
            Verdict::Violated { witness }
        }
        other => other,
    };
    Ok((forward, backward))
}

/// Folds the two directions of [`bi_verdict`] into one verdict.
pub fn combine_bi(forward: Verdict, backward: Verdict) -> Verdict {
    match (forward, backward) {
        (v @ Verdict::Violated { .. }, _) | (_, v @ Verdict::Violated { .. }) => v,
        (v @ Verdict::Inconclusive { .. }, _) | (_, v @ Verdict::Inconclusive { .. }) => v,
        (
            Verdict::ConsistentUpTo { budget, pairs: a },
            Verdict::ConsistentUpTo { pairs: b, .. },
        ) => Verdict::ConsistentUpTo {
            budget,
            pairs: a + b,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consistent() -> Verdict {
        Verdict::ConsistentUpTo {
            budget: Budget::default(),
            pairs: 1,
        }
    }

    fn inconclusive() -> Verdict {
        Verdict::Inconclusive {
            reason: String::new(),
        }
    }

    #[test]
    fn lattice_flags_forbidden_combinations() {
        let w = crate::systems::annulus_psi();
        let b = Budget {
            delta: 0.3,
            horizon: 20.0,
            dt: 0.02,
            grid: 6,
            near: false,
            ..Budget::default()
        };
        let sep = verdict(&w, &PropertyDescriptor::preset("separating").unwrap(), &b).unwrap();
        assert!(sep.is_violated());
        let mut cells = BTreeMap::new();
        cells.insert("separating".to_string(), sep.clone());
        cells.insert("KH-expansive".to_string(), consistent());
        assert_eq!(lattice_contradictions(&cells, None).len(), 1);
        cells.insert("KH-expansive".to_string(), sep.clone());
        assert!(lattice_contradictions(&cells, None).is_empty());
        cells.insert("strong-separating".to_string(), consistent());
        assert_eq!(lattice_contradictions(&cells, None).len(), 1);
        cells.clear();
        cells.insert("KH-kinematic".to_string(), consistent());
        assert!(lattice_contradictions(&cells, Some(true)).is_empty());
        assert_eq!(lattice_contradictions(&cells, Some(false)).len(), 1);
        cells.insert("KH-kinematic".to_string(), inconclusive());
        assert!(lattice_contradictions(&cells, Some(false)).is_empty());
    }

    #[test]
    fn unit_speed_matches_plain_verdict() {
        let f = crate::systems::annulus_psi();
        let b = Budget {
            delta: 0.3,
            horizon: 20.0,
            dt: 0.02,
            grid: 6,
            ..Budget::default()
        };
        let prop = PropertyDescriptor::preset("separating").unwrap();
        let plain = verdict(&f, &prop, &b).unwrap();
        let strong = strong_verdict(&f, &prop, &b, &[SpeedFactor::constant(1.0).unwrap()]).unwrap();
        let (p, s) = (plain.witness().unwrap(), strong.witness().unwrap());
        assert_eq!((&p.x, &p.y, p.sup), (&s.x, &s.y, s.sup));
        assert_eq!(s.speed.as_deref(), Some("unit"));
        assert!(strong_verdict(&f, &prop, &b, &[]).is_err());
    }

    #[test]
    fn psi_fails_both_directions() {
        let f = crate::systems::annulus_psi();
        let b = Budget {
            delta: 0.3,
            eps: Some(0.1),
            horizon: 20.0,
            dt: 0.02,
            grid: 6,
            family: 2,
            ..Budget::default()
        };
        let (fw, bw) = bi_verdict(&f, &b).unwrap();
        assert!(fw.is_violated() && bw.is_violated());
        assert!(bw.witness().unwrap().inverse);
        assert_eq!(bw.witness().unwrap().system, "annulus-psi");
    }
}
