//! Witness files: a plain-text, line-oriented rendering of [`Witness`] and
//! the replay that re-derives a violation from it.
//!
//! ```text
//! flowsep-witness v1
//! system: annulus-psi
//! property: separating
//! speed: -
//! inverse: false
//! x: annulus(1,0)
//! y: annulus(1.2,0)
//! reparam: identity | 1 | 1 | 0:0
//! budget: {"delta":0.3,...}
//! sup: 0.19999999999999996
//! margin: 0.05
//! conclusion: no τ in [-12.566, 12.566] ...
//! ```
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! parsed witness is bit-identical to the one that was written.

use std::fmt::Write as _;
use std::path::Path;

use crate::checker::{
    closeness_sup, conclusion_holds, homeo_replay_parts, Budget, PropertyDescriptor, Witness,
};
use crate::error::{Error, Result};
use crate::reparam::Reparam;
use crate::space::Point;
use crate::systems::{inverse_flow, lookup, time_change, FlowSystem, SpeedFactor, System};

const HEADER: &str = "flowsep-witness v1";

pub fn to_text(w: &Witness) -> String {
    let mut s = String::new();
    let budget = serde_json::to_string(&w.budget).expect("budgets serialize");
    writeln!(s, "{HEADER}").unwrap();
    writeln!(s, "system: {}", w.system).unwrap();
    writeln!(s, "property: {}", w.property).unwrap();
    writeln!(s, "speed: {}", w.speed.as_deref().unwrap_or("-")).unwrap();
    writeln!(s, "inverse: {}", w.inverse).unwrap();
    writeln!(s, "x: {}", w.x.encode()).unwrap();
    writeln!(s, "y: {}", w.y.encode()).unwrap();
    writeln!(s, "reparam: {}", w.reparam.to_knot_list()).unwrap();
    writeln!(s, "budget: {budget}").unwrap();
    writeln!(s, "sup: {:?}", w.sup).unwrap();
    writeln!(s, "margin: {:?}", w.margin).unwrap();
    writeln!(s, "conclusion: {}", w.conclusion.replace('\n', " ")).unwrap();
    s
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Witness(msg.into())
}

pub fn from_text(text: &str) -> Result<Witness> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if lines.next().map(str::trim) != Some(HEADER) {
        return Err(bad(format!("missing `{HEADER}` header")));
    }
    let mut fields = std::collections::HashMap::new();
    for line in lines {
        let (k, v) = line
            .split_once(':')
            .ok_or_else(|| bad(format!("expected `key: value`, got `{line}`")))?;
        if fields
            .insert(k.trim().to_string(), v.trim().to_string())
            .is_some()
        {
            return Err(bad(format!("duplicate field `{}`", k.trim())));
        }
    }
    let mut take = |k: &str| {
        fields
            .remove(k)
            .ok_or_else(|| bad(format!("missing field `{k}`")))
    };
    let num = |k: &str, v: String| -> Result<f64> {
        v.parse()
            .map_err(|_| bad(format!("field `{k}` is not a number: `{v}`")))
    };
    let system = take("system")?;
    let property = take("property")?;
    let speed = match take("speed")?.as_str() {
        "-" => None,
        s => Some(s.to_string()),
    };
    let inverse = match take("inverse")?.as_str() {
        "true" => true,
        "false" => false,
        other => return Err(bad(format!("inverse must be true or false, got `{other}`"))),
    };
    let x = Point::parse(&take("x")?)?;
    let y = Point::parse(&take("y")?)?;
    let reparam = Reparam::from_knot_list(&take("reparam")?)?;
    let budget: Budget = serde_json::from_str(&take("budget")?)?;
    let sup = num("sup", take("sup")?)?;
    let margin = num("margin", take("margin")?)?;
    let conclusion = take("conclusion")?;
    if let Some(k) = fields.keys().next() {
        return Err(bad(format!("unknown field `{k}`")));
    }
    Ok(Witness {
        system,
        property,
        speed,
        inverse,
        x,
        y,
        reparam,
        budget,
        sup,
        margin,
        conclusion,
    })
}

pub fn write_file(w: &Witness, path: &Path) -> Result<()> {
    std::fs::write(path, to_text(w))?;
    Ok(())
}

pub fn read_file(path: &Path) -> Result<Witness> {
    from_text(&std::fs::read_to_string(path)?)
}

/// Outcome of replaying a witness.
#[derive(Clone, Debug, PartialEq)]
pub struct Replay {
    pub sup: f64,
    pub margin: f64,
    pub conclusion_holds: bool,
    /// Empty when the witness is confirmed.
    pub drift: Vec<String>,
}

impl Replay {
    pub fn confirmed(&self) -> bool {
        self.drift.is_empty()
    }
}

/// The flow a witness was found on: catalog entry, optionally reversed and
/// time-changed.
pub fn witness_flow(w: &Witness) -> Result<FlowSystem> {
    let System::Flow(mut f) = lookup(&w.system)? else {
        return Err(bad(format!("`{}` is not a flow", w.system)));
    };
    if w.inverse {
        f = inverse_flow(&f);
    }
    if let Some(name) = &w.speed {
        let v = SpeedFactor::by_name(name, f.roof())?;
        f = time_change(&f, &v, w.budget.step)?;
    }
    Ok(f)
}

/// Recomputes the closeness supremum, margin and conclusion of `w` from its
/// own budget and reports every discrepancy.
pub fn replay(w: &Witness) -> Result<Replay> {
    let delta = w.budget.delta;
    let (sup, margin, holds) = match lookup(&w.system)? {
        System::Homeo(h) => {
            let (sup, holds) = homeo_replay_parts(&h, w)?;
            (sup, 0.0, holds)
        }
        System::Flow(_) => {
            let f = witness_flow(w)?;
            let name = w.property.strip_prefix("strong-").unwrap_or(&w.property);
            let prop = PropertyDescriptor::preset(name)?;
            w.budget.validate(Some(&prop))?;
            let sup = closeness_sup(&f, &prop, &w.budget, &w.x, &w.y, &w.reparam)?;
            let margin = f.speed_bound() * (1.0 + w.reparam.max_abs_slope()) * w.budget.dt / 2.0;
            let (holds, _) = conclusion_holds(&f, &prop, &w.budget, &w.x, &w.y)?;
            (sup, margin, holds || w.x == w.y)
        }
    };
    let mut drift = Vec::new();
    if sup.to_bits() != w.sup.to_bits() {
        drift.push(format!("recorded sup {:?}, recomputed {:?}", w.sup, sup));
    }
    if margin.to_bits() != w.margin.to_bits() {
        drift.push(format!(
            "recorded margin {:?}, recomputed {:?}",
            w.margin, margin
        ));
    }
    if !(sup + margin < delta) {
        drift.push(format!(
            "sup + margin = {:?} is not below δ = {delta}",
            sup + margin
        ));
    }
    if holds {
        drift.push("the conclusion holds for this pair".to_string());
    }
    Ok(Replay {
        sup,
        margin,
        conclusion_holds: holds,
        drift,
    })
}
