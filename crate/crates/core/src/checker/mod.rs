//! The verdict engine.
//!
//! Every expansivity or separation notion handled here has the shape
//!
//! > for all x, y and some (or every) admissible reparametrization s,
//! > if the closeness quantity stays below δ on the time domain,
//! > then a conclusion about x and y holds.
//!
//! A [`PropertyDescriptor`] fixes the four choices (reparametrization class,
//! time domain, closeness quantity, conclusion). The universal quantifiers can
//! only be sampled, so a run ends in a [`Verdict`]: a replayable violation, a
//! budget-relative "nothing found", or an explanation of why the budget cannot
//! decide anything.

mod cross;
mod homeo;
mod orbit;
mod sweep;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::reparam::{Reparam, ReparamClass};
use crate::space::Point;

pub use cross::{
    bi_verdict, combine_bi, cross_check, fix_status, lattice_contradictions, strong_verdict,
    CrossReport,
};
pub(crate) use homeo::replay_parts as homeo_replay_parts;
pub use homeo::{homeo_verdict, HomeoKind, HomeoOutcome, PairSource};
pub use orbit::{d_phi, equilm_xi, fixed_points, min_period, orbit_roots, same_orbit};
pub use sweep::{closeness_sup, conclusion_holds, verdict, ClosenessTrace};

/// Time set on which closeness is required.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeDomain {
    Full,
    Positive,
}

/// The quantity that must stay below δ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Closeness {
    /// `d(φ_t x, φ_{s(t)} y)`.
    Single,
    /// `max{d(φ_t x, φ_{s(t)} x), d(φ_t x, φ_{s(t)} y)}`.
    KhPair,
}

/// What δ-closeness must force.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conclusion {
    /// `y = φ_τ(x)` for some `τ`.
    SameOrbit,
    /// `y = φ_τ(x)` for some `|τ| < ε`.
    Local,
    /// `d_φ(x, y) < ε`.
    Dphi,
}

/// One expansivity or separation notion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyDescriptor {
    pub name: String,
    pub class: ReparamClass,
    pub domain: TimeDomain,
    pub closeness: Closeness,
    pub conclusion: Conclusion,
}

/// Names of the plain presets, in report order.
pub const PRESET_NAMES: &[&str] = &[
    "separating",
    "kinematic",
    "C-expansive",
    "K-expansive",
    "geometric",
    "C-separating",
    "geometric-separating",
    "KH-expansive",
    "KH-kinematic",
    "KH-positive-kinematic",
    "positive-kinematic",
    "surjective-KH",
];

impl PropertyDescriptor {
    pub fn new(
        name: impl Into<String>,
        class: ReparamClass,
        domain: TimeDomain,
        closeness: Closeness,
        conclusion: Conclusion,
    ) -> Self {
        PropertyDescriptor {
            name: name.into(),
            class,
            domain,
            closeness,
            conclusion,
        }
    }

    /// A named preset. `K*` is accepted for `geometric`.
    pub fn preset(name: &str) -> Result<Self> {
        use Closeness::*;
        use Conclusion::*;
        use ReparamClass as R;
        use TimeDomain::*;
        let (class, domain, closeness, conclusion) = match name {
            "separating" => (R::Identity, Full, Single, SameOrbit),
            "kinematic" => (R::Identity, Full, Single, Local),
            "C-expansive" => (R::C, Full, Single, Local),
            "K-expansive" => (R::K, Full, Single, Local),
            "geometric" | "K*" => (R::K, Full, Single, Dphi),
            "C-separating" => (R::C, Full, Single, SameOrbit),
            "geometric-separating" => (R::K, Full, Single, SameOrbit),
            "KH-expansive" => (R::C, Full, KhPair, SameOrbit),
            "KH-kinematic" => (R::C, Full, KhPair, Local),
            "KH-positive-kinematic" => (R::C, Positive, KhPair, Local),
            "positive-kinematic" => (R::Identity, Positive, Single, Local),
            "surjective-KH" => (R::SurjectiveC, Full, KhPair, Local),
            other => return Err(Error::UnknownPreset(other.to_string())),
        };
        let name = if name == "K*" { "geometric" } else { name };
        Ok(PropertyDescriptor::new(
            name, class, domain, closeness, conclusion,
        ))
    }

    pub fn presets() -> Vec<Self> {
        PRESET_NAMES
            .iter()
            .map(|n| Self::preset(n).expect("listed presets resolve"))
            .collect()
    }

    pub fn needs_eps(&self) -> bool {
        matches!(self.conclusion, Conclusion::Local | Conclusion::Dphi)
    }
}

/// A property as named on the command line: a plain preset, its strong
/// variant (every time change), or bi-expansivity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PropertyRef {
    Plain(PropertyDescriptor),
    Strong(PropertyDescriptor),
    /// KH-positive-kinematic for the flow and for its inverse.
    Bi,
    /// A homeomorphism property.
    Homeo(HomeoKind),
}

impl PropertyRef {
    pub fn parse(name: &str) -> Result<Self> {
        if name == "bi-expansive" {
            return Ok(PropertyRef::Bi);
        }
        match name.strip_prefix("strong-") {
            Some(inner) => Ok(PropertyRef::Strong(PropertyDescriptor::preset(inner)?)),
            None => Ok(PropertyRef::Plain(PropertyDescriptor::preset(name)?)),
        }
    }

    /// Resolves a name against a homeomorphism: only `expansive` and
    /// `separating` apply.
    pub fn parse_homeo(name: &str) -> Result<Self> {
        HomeoKind::parse(name)
            .map(PropertyRef::Homeo)
            .ok_or_else(|| Error::UnknownPreset(name.to_string()))
    }

    pub fn name(&self) -> String {
        match self {
            PropertyRef::Plain(p) => p.name.clone(),
            PropertyRef::Strong(p) => format!("strong-{}", p.name),
            PropertyRef::Bi => "bi-expansive".into(),
            PropertyRef::Homeo(k) => k.name().into(),
        }
    }

    pub fn needs_eps(&self) -> bool {
        match self {
            PropertyRef::Plain(p) | PropertyRef::Strong(p) => p.needs_eps(),
            PropertyRef::Bi => true,
            PropertyRef::Homeo(_) => false,
        }
    }
}

/// Search effort and tolerances for one verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budget {
    /// Closeness threshold δ.
    pub delta: f64,
    /// Orbit-shift or `d_φ` bound ε, required by local and `d_φ` conclusions.
    pub eps: Option<f64>,
    /// Horizon T: times range over `[-T, T]` (or `[0, T]`).
    pub horizon: f64,
    /// Time step Δt of the closeness grid.
    pub dt: f64,
    /// Grid resolution handed to the space.
    pub grid: usize,
    /// Also pair each grid point with neighbours closer than the grid spacing.
    pub near: bool,
    /// Knots of random reparametrizations.
    pub knots: usize,
    /// Largest deviation `|s(t) - t|` of sampled reparametrizations.
    pub amplitude: f64,
    /// Number of random reparametrizations.
    pub family: usize,
    pub seed: u64,
    /// Same-orbit search window W; the flow's own hint when absent.
    pub window: Option<f64>,
    /// Same-orbit matching tolerance η.
    pub eta: f64,
    /// Probe horizon for fixed-point detection.
    pub probe: f64,
    /// Integrator step for time changes.
    pub step: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            delta: 0.1,
            eps: None,
            horizon: 20.0,
            dt: 0.01,
            grid: 20,
            near: true,
            knots: 6,
            amplitude: 1.0,
            family: 8,
            seed: 0,
            window: None,
            eta: 1e-4,
            probe: 1.0,
            step: 0.01,
        }
    }
}

impl Budget {
    /// Checks the budget on its own and against a property.
    pub fn validate(&self, prop: Option<&PropertyDescriptor>) -> Result<()> {
        let positive = [
            ("delta", self.delta),
            ("horizon", self.horizon),
            ("dt", self.dt),
            ("eta", self.eta),
            ("probe", self.probe),
            ("step", self.step),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return arg(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if let Some(e) = self.eps {
            if !(e > 0.0) || !e.is_finite() {
                return arg(format!("eps must be positive and finite, got {e}"));
            }
        }
        if let Some(w) = self.window {
            if !(w > 0.0) || !w.is_finite() {
                return arg(format!("window must be positive and finite, got {w}"));
            }
        }
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return arg("amplitude must be non-negative");
        }
        if self.dt > self.horizon / 100.0 {
            return arg(format!(
                "dt = {} exceeds horizon / 100 = {}",
                self.dt,
                self.horizon / 100.0
            ));
        }
        if self.grid == 0 {
            return arg("grid resolution must be at least 1");
        }
        if self.knots < 2 {
            return arg("reparametrizations need at least 2 knots");
        }
        if let Some(p) = prop {
            if p.needs_eps() && self.eps.is_none() {
                return arg(format!("property `{}` needs eps", p.name));
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> i64 {
        (self.horizon / self.dt).round() as i64
    }
}

/// A concrete certificate that a property fails.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// Catalog name of the system the property was checked on.
    pub system: String,
    /// Property name, including `strong-` for strong variants.
    pub property: String,
    /// Speed factor of the offending time change, if any.
    pub speed: Option<String>,
    /// True when found on the inverse flow.
    pub inverse: bool,
    pub x: Point,
    pub y: Point,
    #[serde(with = "reparam_text")]
    pub reparam: Reparam,
    pub budget: Budget,
    /// Grid supremum of the closeness quantity (or of `d(σⁿx, σⁿy)`).
    pub sup: f64,
    /// Lipschitz allowance added to `sup` before comparing with δ.
    pub margin: f64,
    /// Human-readable description of the failed conclusion.
    pub conclusion: String,
}

mod reparam_text {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::reparam::Reparam;

    pub fn serialize<S: Serializer>(r: &Reparam, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_knot_list())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Reparam, D::Error> {
        let s = String::deserialize(d)?;
        Reparam::from_knot_list(&s).map_err(serde::de::Error::custom)
    }
}

/// Outcome of a semidecision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Violated { witness: Box<Witness> },
    ConsistentUpTo { budget: Budget, pairs: u64 },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn violated(w: Witness) -> Self {
        Verdict::Violated {
            witness: Box::new(w),
        }
    }

    pub fn is_violated(&self) -> bool {
        matches!(self, Verdict::Violated { .. })
    }

    pub fn is_consistent(&self) -> bool {
        matches!(self, Verdict::ConsistentUpTo { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Violated { witness } => Some(witness),
            _ => None,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Verdict::Violated { .. } => "violated",
            Verdict::ConsistentUpTo { .. } => "consistent",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }

    /// Process exit code: 0 consistent, 2 violated, 3 inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::ConsistentUpTo { .. } => 0,
            Verdict::Violated { .. } => 2,
            Verdict::Inconclusive { .. } => 3,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Violated { witness: w } => write!(
                f,
                "VIOLATED: x = {}, y = {}, s = {}, sup = {:.6} (+{:.2e}) < δ = {}; {}",
                w.x,
                w.y,
                w.reparam.label(),
                w.sup,
                w.margin,
                w.budget.delta,
                w.conclusion
            ),
            Verdict::ConsistentUpTo { budget, pairs } => write!(
                f,
                "CONSISTENT up to budget: {pairs} pairs, δ = {}, T = {}, Δt = {}",
                budget.delta, budget.horizon, budget.dt
            ),
            Verdict::Inconclusive { reason } => write!(f, "INCONCLUSIVE: {reason}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_table() {
        let p = PropertyDescriptor::preset("KH-kinematic").unwrap();
        assert_eq!(
            (p.class, p.domain, p.closeness, p.conclusion),
            (
                ReparamClass::C,
                TimeDomain::Full,
                Closeness::KhPair,
                Conclusion::Local
            )
        );
        let g = PropertyDescriptor::preset("K*").unwrap();
        assert_eq!(g.name, "geometric");
        assert_eq!(g.conclusion, Conclusion::Dphi);
        assert_eq!(PropertyDescriptor::presets().len(), 12);
        assert!(matches!(
            PropertyDescriptor::preset("bogus"),
            Err(Error::UnknownPreset(_))
        ));
    }

    #[test]
    fn property_refs() {
        assert!(matches!(
            PropertyRef::parse("strong-kinematic"),
            Ok(PropertyRef::Strong(_))
        ));
        assert_eq!(PropertyRef::parse("bi-expansive").unwrap(), PropertyRef::Bi);
        assert_eq!(
            PropertyRef::parse("strong-KH-expansive").unwrap().name(),
            "strong-KH-expansive"
        );
        assert!(PropertyRef::parse("strong-bogus").is_err());
    }

    #[test]
    fn budget_validation() {
        let kin = PropertyDescriptor::preset("kinematic").unwrap();
        let mut b = Budget::default();
        assert!(b.validate(None).is_ok());
        assert!(b.validate(Some(&kin)).is_err());
        b.eps = Some(0.1);
        assert!(b.validate(Some(&kin)).is_ok());
        b.dt = 1.0;
        assert!(b.validate(None).is_err());
        let b = Budget {
            delta: 0.0,
            ..Budget::default()
        };
        assert!(b.validate(None).is_err());
    }

    #[test]
    fn budget_json_round_trip() {
        let b = Budget {
            eps: Some(0.3),
            dt: 0.1 + 0.2,
            horizon: 1e3 / 3.0,
            ..Budget::default()
        };
        let s = serde_json::to_string(&b).unwrap();
        assert_eq!(serde_json::from_str::<Budget>(&s).unwrap(), b);
    }
}
