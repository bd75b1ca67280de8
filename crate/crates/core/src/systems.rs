//! Flows and homeomorphisms of the catalog, plus inverse flows and time changes.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{arg, Error, Result};
use crate::space::{AnnulusSpace, ExtPoint, Point, SpaceDescriptor};
use crate::suspension::{self, RoofFunction};

/// Golden ratio, the slope of both torus flows.
pub const GOLDEN: f64 = 1.618_033_988_749_895;

/// The evaluation rule of a flow.
pub trait FlowRule: Send + Sync {
    fn evolve(&self, t: f64, x: &Point) -> Result<Point>;

    /// True when `evolve` is closed-form, so evaluating at a large time costs
    /// the same as at a small one.
    fn exact(&self) -> bool {
        true
    }
}

type PeriodRule = Arc<dyn Fn(&Point) -> Option<f64> + Send + Sync>;

/// A named continuous flow `φ: R × X -> X`.
#[derive(Clone)]
pub struct FlowSystem {
    name: String,
    space: SpaceDescriptor,
    rule: Arc<dyn FlowRule>,
    reversed: bool,
    fixed_hint: Option<Vec<Point>>,
    period: Option<PeriodRule>,
    notes: String,
    window: Option<f64>,
    speed_hint: Option<f64>,
    speed: Arc<OnceLock<f64>>,
    roof: Option<f64>,
}

impl fmt::Debug for FlowSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlowSystem")
            .field("name", &self.name)
            .field("space", &self.space.name())
            .field("reversed", &self.reversed)
            .finish_non_exhaustive()
    }
}

impl FlowSystem {
    pub fn new(name: impl Into<String>, space: SpaceDescriptor, rule: Arc<dyn FlowRule>) -> Self {
        FlowSystem {
            name: name.into(),
            space,
            rule,
            reversed: false,
            fixed_hint: None,
            period: None,
            notes: String::new(),
            window: None,
            speed_hint: None,
            speed: Arc::new(OnceLock::new()),
            roof: None,
        }
    }

    /// Declares the exact fixed-point set.
    pub fn with_fixed_hint(mut self, fixed: Vec<Point>) -> Self {
        self.fixed_hint = Some(fixed);
        self
    }

    /// Declares the period of the orbit through each point (`None` when not
    /// periodic).
    pub fn with_period(mut self, rule: PeriodRule) -> Self {
        self.period = Some(rule);
        self
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }

    /// Preferred same-orbit search window.
    pub fn with_window(mut self, w: f64) -> Self {
        self.window = Some(w);
        self
    }

    /// Known bound on `d(φ_t x, φ_u x) / |t - u|`.
    pub fn with_speed(mut self, v: f64) -> Self {
        self.speed_hint = Some(v);
        self.speed = Arc::new(OnceLock::new());
        self
    }

    /// Marks the flow as a suspension with constant roof `c`.
    pub fn with_roof(mut self, c: f64) -> Self {
        self.roof = Some(c);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn notes(&self) -> &str {
        &self.notes
    }

    pub fn roof(&self) -> Option<f64> {
        self.roof
    }

    pub fn fixed_hint(&self) -> Option<&[Point]> {
        self.fixed_hint.as_deref()
    }

    pub fn period_of(&self, x: &Point) -> Option<f64> {
        self.period.as_ref().and_then(|p| p(x))
    }

    pub fn window_hint(&self) -> Option<f64> {
        self.window
    }

    pub fn is_exact(&self) -> bool {
        self.rule.exact()
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    pub fn evolve(&self, t: f64, x: &Point) -> Result<Point> {
        if !t.is_finite() {
            return arg(format!("flow time must be finite, got {t}"));
        }
        self.rule.evolve(if self.reversed { -t } else { t }, x)
    }

    /// Lipschitz bound of `t -> φ_t(x)`, from the declared hint or estimated
    /// on a coarse grid with a safety factor.
    pub fn speed_bound(&self) -> f64 {
        if let Some(v) = self.speed_hint {
            return v;
        }
        *self.speed.get_or_init(|| {
            let h = 1e-3;
            let est = self
                .space
                .grid(12)
                .iter()
                .filter_map(|x| {
                    let y = self.evolve(h, x).ok()?;
                    self.space.distance(x, &y).ok()
                })
                .fold(0.0, f64::max)
                / h;
            (1.25 * est).max(1e-9)
        })
    }
}

/// `φ^{-1}_t = φ_{-t}`. Inverting twice returns a flow equal to the original.
pub fn inverse_flow(f: &FlowSystem) -> FlowSystem {
    let mut g = f.clone();
    g.reversed = !f.reversed;
    g.name = match f
        .name
        .strip_prefix("inverse(")
        .and_then(|s| s.strip_suffix(')'))
    {
        Some(inner) if f.reversed => inner.to_string(),
        _ => format!("inverse({})", f.name),
    };
    g
}

type PointMap = Arc<dyn Fn(&Point) -> Result<Point> + Send + Sync>;

/// The rule of a homeomorphism.
pub trait HomeoRule: Send + Sync {
    fn forward(&self, x: &Point) -> Result<Point>;
    fn inverse(&self, x: &Point) -> Result<Point>;

    /// `σ^n(x)`; override when a closed form exists.
    fn power(&self, n: i64, x: &Point) -> Result<Point> {
        let mut y = x.clone();
        for _ in 0..n.unsigned_abs() {
            y = if n > 0 {
                self.forward(&y)?
            } else {
                self.inverse(&y)?
            };
        }
        Ok(y)
    }
}

/// A named homeomorphism `σ: X -> X`.
#[derive(Clone)]
pub struct Homeo {
    name: String,
    space: SpaceDescriptor,
    rule: Arc<dyn HomeoRule>,
    notes: String,
}

impl fmt::Debug for Homeo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Homeo")
            .field("name", &self.name)
            .field("space", &self.space.name())
            .finish_non_exhaustive()
    }
}

impl Homeo {
    pub fn new(name: impl Into<String>, space: SpaceDescriptor, rule: Arc<dyn HomeoRule>) -> Self {
        Homeo {
            name: name.into(),
            space,
            rule,
            notes: String::new(),
        }
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn notes(&self) -> &str {
        &self.notes
    }

    pub fn forward(&self, x: &Point) -> Result<Point> {
        self.rule.forward(x)
    }

    pub fn inverse(&self, x: &Point) -> Result<Point> {
        self.rule.inverse(x)
    }

    pub fn iterate(&self, n: i64, x: &Point) -> Result<Point> {
        self.rule.power(n, x)
    }
}

/// A homeomorphism given by two closures.
pub struct ClosureHomeo {
    pub forward: PointMap,
    pub inverse: PointMap,
}

impl HomeoRule for ClosureHomeo {
    fn forward(&self, x: &Point) -> Result<Point> {
        (self.forward)(x)
    }

    fn inverse(&self, x: &Point) -> Result<Point> {
        (self.inverse)(x)
    }
}

fn wrong(space: &str, x: &Point) -> Error {
    Error::VariantMismatch {
        space: space.into(),
        found: x.kind().into(),
    }
}

/// Rotation of the annulus; `unit_speed` selects linear speed 1 (angle
/// `t/|x|`) rather than angular speed 1 (angle `t`).
struct AnnulusRotation {
    unit_speed: bool,
}

impl FlowRule for AnnulusRotation {
    fn evolve(&self, t: f64, x: &Point) -> Result<Point> {
        let Point::Annulus { x1, x2 } = *x else {
            return Err(wrong("annulus", x));
        };
        let r = x1.hypot(x2);
        let angle = if self.unit_speed { t / r } else { t };
        let (s, c) = angle.sin_cos();
        Ok(Point::Annulus {
            x1: x1 * c - x2 * s,
            x2: x1 * s + x2 * c,
        })
    }
}

struct LinearTorus;

impl FlowRule for LinearTorus {
    fn evolve(&self, t: f64, x: &Point) -> Result<Point> {
        let Point::Torus { u, v } = *x else {
            return Err(wrong("torus", x));
        };
        Ok(Point::torus(u + t, v + GOLDEN * t))
    }
}

/// `dx/dt = f(x) (1, GOLDEN)` with `f` a Gaussian well vanishing only at the
/// centre, integrated by classical RK4.
pub struct BumpTorus {
    pub center: (f64, f64),
    pub width: f64,
    pub step: f64,
}

impl BumpTorus {
    fn rate(&self, u: f64, v: f64) -> f64 {
        let du = wrap_signed(u - self.center.0);
        let dv = wrap_signed(v - self.center.1);
        1.0 - (-(du * du + dv * dv) / (self.width * self.width)).exp()
    }
}

fn wrap_signed(a: f64) -> f64 {
    a - a.round()
}

impl FlowRule for BumpTorus {
    fn evolve(&self, t: f64, x: &Point) -> Result<Point> {
        let Point::Torus { u, v } = *x else {
            return Err(wrong("torus", x));
        };
        if t == 0.0 {
            return Ok(x.clone());
        }
        let n = (t.abs() / self.step).ceil().max(1.0) as usize;
        let h = t / n as f64;
        // the field is parallel to (1, GOLDEN), so one scalar ODE along the
        // line suffices: (u, v) = (u0 + a, v0 + GOLDEN a), da/dt = f
        let f = |a: f64| self.rate(u + a, v + GOLDEN * a);
        let mut a = 0.0;
        for _ in 0..n {
            let k1 = f(a);
            let k2 = f(a + 0.5 * h * k1);
            let k3 = f(a + 0.5 * h * k2);
            let k4 = f(a + h * k3);
            a += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        Ok(Point::torus(u + a, v + GOLDEN * a))
    }

    fn exact(&self) -> bool {
        false
    }
}

/// A positive speed factor `v` defining the time change
/// `dα/dt = v(φ_α(x))`.
#[derive(Clone)]
pub struct SpeedFactor {
    name: String,
    rule: Arc<dyn Fn(&Point) -> f64 + Send + Sync>,
    pub v_min: f64,
    pub v_max: f64,
    constant: Option<f64>,
}

impl fmt::Debug for SpeedFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpeedFactor")
            .field("name", &self.name)
            .field("v_min", &self.v_min)
            .field("v_max", &self.v_max)
            .finish_non_exhaustive()
    }
}

impl SpeedFactor {
    pub fn new(
        name: impl Into<String>,
        v_min: f64,
        v_max: f64,
        rule: Arc<dyn Fn(&Point) -> f64 + Send + Sync>,
    ) -> Result<Self> {
        if !(v_min > 0.0) || !(v_max >= v_min) || !v_max.is_finite() {
            return arg("speed factor bounds must satisfy 0 < v_min <= v_max < inf");
        }
        Ok(SpeedFactor {
            name: name.into(),
            rule,
            v_min,
            v_max,
            constant: None,
        })
    }

    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return arg("constant speed must be positive and finite");
        }
        let name = if c == 1.0 {
            "unit".to_string()
        } else {
            format!("const({c})")
        };
        Ok(SpeedFactor {
            name,
            rule: Arc::new(move |_| c),
            v_min: c,
            v_max: c,
            constant: Some(c),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: &Point) -> f64 {
        (self.rule)(x)
    }

    pub fn is_unit(&self) -> bool {
        self.constant == Some(1.0)
    }

    /// Looks up a named factor: `unit`, `double`, `half`, `radius` (annulus
    /// only), `wave` (torus or annulus) or `height-wave` (suspensions with
    /// roof `c`, continuous across the roof).
    pub fn by_name(name: &str, roof: Option<f64>) -> Result<Self> {
        match name {
            "unit" => SpeedFactor::constant(1.0),
            "double" => SpeedFactor::constant(2.0).map(|s| s.renamed("double")),
            "half" => SpeedFactor::constant(0.5).map(|s| s.renamed("half")),
            "radius" => SpeedFactor::new(
                "radius",
                AnnulusSpace::INNER,
                AnnulusSpace::OUTER,
                Arc::new(|x| match x {
                    Point::Annulus { x1, x2 } => x1.hypot(*x2),
                    _ => 1.0,
                }),
            ),
            "wave" => SpeedFactor::new(
                "wave",
                0.5,
                1.5,
                Arc::new(|x| match x {
                    Point::Torus { u, .. } => 1.0 + 0.5 * (TAU * u).sin(),
                    Point::Annulus { x1, x2 } => 1.0 + 0.5 * x2.atan2(*x1).sin(),
                    _ => 1.0,
                }),
            ),
            "height-wave" => {
                let c = roof.unwrap_or(1.0);
                SpeedFactor::new(
                    "height-wave",
                    0.5,
                    1.5,
                    Arc::new(move |x| match x.as_suspension() {
                        Some((_, h)) => 1.0 + 0.5 * (TAU * h / c).sin(),
                        None => 1.0,
                    }),
                )
            }
            other => Err(Error::UnknownSpeed(other.to_string())),
        }
    }

    fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }
}

struct TimeChanged {
    base: FlowSystem,
    speed: SpeedFactor,
    step: f64,
}

impl FlowRule for TimeChanged {
    fn evolve(&self, t: f64, x: &Point) -> Result<Point> {
        if let Some(c) = self.speed.constant {
            return self.base.evolve(c * t, x);
        }
        if t == 0.0 {
            return Ok(x.clone());
        }
        let n = (t.abs() / self.step).ceil().max(1.0) as usize;
        let h = t / n as f64;
        let v = |p: &Point| self.speed.eval(p);
        let mut y = x.clone();
        for _ in 0..n {
            // RK4 for α' = v(φ_α(x)), carrying y = φ_α(x) along so each stage
            // only evolves the base flow by a short time
            let k1 = v(&y);
            let k2 = v(&self.base.evolve(0.5 * h * k1, &y)?);
            let k3 = v(&self.base.evolve(0.5 * h * k2, &y)?);
            let k4 = v(&self.base.evolve(h * k3, &y)?);
            let da = h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            y = self.base.evolve(da, &y)?;
        }
        Ok(y)
    }

    fn exact(&self) -> bool {
        self.speed.constant.is_some() && self.base.is_exact()
    }
}

/// The time change of `f` by `v`, integrated with fixed step `step`.
pub fn time_change(f: &FlowSystem, v: &SpeedFactor, step: f64) -> Result<FlowSystem> {
    if !(step > 0.0) || !step.is_finite() {
        return arg(format!("integrator step must be positive, got {step}"));
    }
    let name = format!("{}~{}", f.name(), v.name());
    let rule = TimeChanged {
        base: f.clone(),
        speed: v.clone(),
        step,
    };
    let mut g = FlowSystem::new(name, f.space().clone(), Arc::new(rule))
        .with_notes(format!("time change of {} by {}", f.name(), v.name()))
        .with_speed(f.speed_bound() * v.v_max);
    if let Some(fixed) = f.fixed_hint() {
        g = g.with_fixed_hint(fixed.to_vec());
    }
    if let Some(w) = f.window_hint() {
        g = g.with_window(w / v.v_min);
    }
    if let Some(c) = f.roof() {
        g = g.with_roof(c);
    }
    if let Some(c) = v.constant {
        if let Some(p) = f.period.clone() {
            g = g.with_period(Arc::new(move |x| p(x).map(|t| t / c)));
        }
    }
    Ok(g)
}

/// The shift `(σx)_n = x_{n+1}`, exact on windowed sequences.
pub struct ShiftRule;

impl HomeoRule for ShiftRule {
    fn forward(&self, x: &Point) -> Result<Point> {
        self.power(1, x)
    }

    fn inverse(&self, x: &Point) -> Result<Point> {
        self.power(-1, x)
    }

    fn power(&self, n: i64, x: &Point) -> Result<Point> {
        match x {
            Point::BiSeq(s) => Ok(Point::BiSeq(s.shifted(n).normalized())),
            other => Err(wrong("shift", other)),
        }
    }
}

/// The map on `{∞} ∪ {(p,0)} ∪ {(p, ±1/q) : |p| <= q}` that moves each level
/// right by one and jumps from `(q, ±1/q)` to `(-q, ∓1/q)`.
pub struct ExtPlaneRule;

impl ExtPlaneRule {
    /// Position on the cycle of length `2(2q+1)` through level `q`.
    fn cycle_pos(p: i64, q: i64) -> i64 {
        let big = q.abs();
        if q > 0 {
            p + big
        } else {
            2 * big + 1 + p + big
        }
    }

    fn from_cycle_pos(pos: i64, big: i64) -> ExtPoint {
        let len = 2 * big + 1;
        let pos = pos.rem_euclid(2 * len);
        if pos < len {
            ExtPoint::new(pos - big, big)
        } else {
            ExtPoint::new(pos - len - big, -big)
        }
    }
}

impl HomeoRule for ExtPlaneRule {
    fn forward(&self, x: &Point) -> Result<Point> {
        self.power(1, x)
    }

    fn inverse(&self, x: &Point) -> Result<Point> {
        self.power(-1, x)
    }

    fn power(&self, n: i64, x: &Point) -> Result<Point> {
        match x {
            Point::ExtPlane(ExtPoint::Infinity) => Ok(x.clone()),
            Point::ExtPlane(ExtPoint::Finite { p, q: 0 }) => Ok(Point::ext(p + n, 0)),
            Point::ExtPlane(ExtPoint::Finite { p, q }) => {
                if p.abs() > q.abs() {
                    return arg(format!("({p}, 1/{q}) lies outside the space"));
                }
                let pos = Self::cycle_pos(*p, *q) + n;
                Ok(Point::ExtPlane(Self::from_cycle_pos(pos, q.abs())))
            }
            other => Err(wrong("ext-plane", other)),
        }
    }
}

/// Default half-width of catalog sequences.
pub const SHIFT_HALF_WIDTH: u32 = 5;

pub fn shift_map(half_width: u32) -> Homeo {
    Homeo::new(
        "shift-map",
        SpaceDescriptor::shift(half_width),
        Arc::new(ShiftRule),
    )
    .with_notes("expansive; distinct sequences separate to distance >= 1")
}

pub fn ext_plane_map() -> Homeo {
    Homeo::new(
        "ext-plane-map",
        SpaceDescriptor::ext_plane(),
        Arc::new(ExtPlaneRule),
    )
    .with_notes("separating, not expansive: (0,1/q) and (0,-1/q) stay close and share an orbit")
}

pub fn annulus_phi() -> FlowSystem {
    FlowSystem::new(
        "annulus-phi",
        SpaceDescriptor::annulus(),
        Arc::new(AnnulusRotation { unit_speed: true }),
    )
    .with_fixed_hint(Vec::new())
    .with_period(Arc::new(|x| match x {
        Point::Annulus { x1, x2 } => Some(TAU * x1.hypot(*x2)),
        _ => None,
    }))
    .with_window(4.0 * PI)
    .with_speed(1.0)
    .with_notes("kinematic and KH-kinematic, not strong kinematic; the radius time change gives annulus-psi")
}

pub fn annulus_psi() -> FlowSystem {
    FlowSystem::new(
        "annulus-psi",
        SpaceDescriptor::annulus(),
        Arc::new(AnnulusRotation { unit_speed: false }),
    )
    .with_fixed_hint(Vec::new())
    .with_period(Arc::new(|_| Some(TAU)))
    .with_window(2.0 * PI)
    .with_speed(AnnulusSpace::OUTER)
    .with_notes("not separating: equal-phase circles keep their distance")
}

pub fn torus_irrational() -> FlowSystem {
    FlowSystem::new(
        "torus-irrational",
        SpaceDescriptor::torus(),
        Arc::new(LinearTorus),
    )
    .with_fixed_hint(Vec::new())
    .with_period(Arc::new(|_| None))
    .with_window(20.0)
    .with_speed((1.0 + GOLDEN * GOLDEN).sqrt())
    .with_notes("linear flow of slope (1, golden ratio); no fixed or periodic points")
}

/// The zero of the fake-saddle well.
pub const SADDLE_POINT: (f64, f64) = (0.5, 0.5);

pub fn torus_fake_saddle() -> FlowSystem {
    let rule = BumpTorus {
        center: SADDLE_POINT,
        width: 0.1,
        step: 1e-3,
    };
    FlowSystem::new(
        "torus-fake-saddle",
        SpaceDescriptor::torus(),
        Arc::new(rule),
    )
    .with_fixed_hint(vec![Point::torus(SADDLE_POINT.0, SADDLE_POINT.1)])
    .with_period(Arc::new(|_| None))
    .with_window(20.0)
    .with_speed((1.0 + GOLDEN * GOLDEN).sqrt())
    .with_notes("fix = {p} not open; kinematic but not KH-kinematic")
}

/// Names of every catalog entry, in listing order.
pub const CATALOG_NAMES: &[&str] = &[
    "annulus-phi",
    "annulus-psi",
    "torus-irrational",
    "torus-fake-saddle",
    "shift-map",
    "ext-plane-map",
    "sus-shift",
    "sus-ext-plane",
];

/// A catalog entry: a flow or a homeomorphism.
#[derive(Clone, Debug)]
pub enum System {
    Flow(FlowSystem),
    Homeo(Homeo),
}

impl System {
    pub fn name(&self) -> &str {
        match self {
            System::Flow(f) => f.name(),
            System::Homeo(h) => h.name(),
        }
    }

    pub fn notes(&self) -> &str {
        match self {
            System::Flow(f) => f.notes(),
            System::Homeo(h) => h.notes(),
        }
    }

    pub fn space_name(&self) -> String {
        match self {
            System::Flow(f) => f.space().name(),
            System::Homeo(h) => h.space().name(),
        }
    }
}

pub fn lookup(name: &str) -> Result<System> {
    Ok(match name {
        "annulus-phi" => System::Flow(annulus_phi()),
        "annulus-psi" => System::Flow(annulus_psi()),
        "torus-irrational" => System::Flow(torus_irrational()),
        "torus-fake-saddle" => System::Flow(torus_fake_saddle()),
        "shift-map" => System::Homeo(shift_map(SHIFT_HALF_WIDTH)),
        "ext-plane-map" => System::Homeo(ext_plane_map()),
        "sus-shift" => System::Flow(
            suspension::build(&shift_map(SHIFT_HALF_WIDTH), RoofFunction::constant(1.0)?)?
                .flow
                .with_notes("suspension of the shift under roof 1: expansive base, so kinematic and C-expansive"),
        ),
        "sus-ext-plane" => System::Flow(
            suspension::build(&ext_plane_map(), RoofFunction::constant(1.0)?)?
                .flow
                .with_window(60.0)
                .with_notes("strong KH-expansive and C-separating, not kinematic"),
        ),
        other => return Err(Error::UnknownSystem(other.to_string())),
    })
}

pub fn lookup_flow(name: &str) -> Result<FlowSystem> {
    match lookup(name)? {
        System::Flow(f) => Ok(f),
        System::Homeo(_) => arg(format!("`{name}` is a homeomorphism, not a flow")),
    }
}

pub fn lookup_homeo(name: &str) -> Result<Homeo> {
    match lookup(name)? {
        System::Homeo(h) => Ok(h),
        System::Flow(_) => arg(format!("`{name}` is a flow, not a homeomorphism")),
    }
}

pub fn catalog() -> Vec<System> {
    CATALOG_NAMES
        .iter()
        .map(|n| lookup(n).expect("catalog names resolve"))
        .collect()
}

/// Names of the speed factors tried by default for strong variants.
pub fn default_speed_family(f: &FlowSystem) -> Vec<&'static str> {
    match f.space().name().as_str() {
        "annulus" => vec!["unit", "radius", "wave"],
        "torus" => vec!["unit", "double", "wave"],
        _ => vec!["unit", "double", "height-wave"],
    }
}

/// Resolves speed factor names for a flow, picking up the roof height of
/// suspensions.
pub fn speed_factors(f: &FlowSystem, names: &[impl AsRef<str>]) -> Result<Vec<SpeedFactor>> {
    let roof = f.roof();
    let mut seen = HashMap::new();
    names
        .iter()
        .filter(|n| seen.insert(n.as_ref().to_string(), ()).is_none())
        .map(|n| SpeedFactor::by_name(n.as_ref(), roof))
        .collect()
}

/// Position of `x` along the trajectory `t -> φ_t(x0)`, evaluated lazily.
///
/// Closed-form flows are evaluated directly. Integrated flows cache points
/// on a uniform lattice of spacing `dt` and finish each query with one short
/// evolve, so a sweep over a time grid costs `O(range / step)` rather than
/// `O(range² / step)`.
pub struct Trajectory<'a> {
    flow: &'a FlowSystem,
    origin: Point,
    dt: f64,
    forward: Vec<Point>,
    backward: Vec<Point>,
}

impl<'a> Trajectory<'a> {
    pub fn new(flow: &'a FlowSystem, origin: Point, dt: f64) -> Self {
        Trajectory {
            flow,
            forward: vec![origin.clone()],
            backward: vec![origin.clone()],
            origin,
            dt,
        }
    }

    pub fn origin(&self) -> &Point {
        &self.origin
    }

    pub fn at(&mut self, t: f64) -> Result<Point> {
        if self.flow.is_exact() {
            return self.flow.evolve(t, &self.origin);
        }
        let k = (t / self.dt).round();
        let idx = k.abs() as usize;
        let (cache, sign) = if k >= 0.0 {
            (&mut self.forward, 1.0)
        } else {
            (&mut self.backward, -1.0)
        };
        while cache.len() <= idx {
            let last = cache.last().unwrap();
            let next = self.flow.evolve(sign * self.dt, last)?;
            cache.push(next);
        }
        let rest = t - k * self.dt;
        if rest == 0.0 {
            Ok(cache[idx].clone())
        } else {
            self.flow.evolve(rest, &cache[idx])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(space: &SpaceDescriptor, a: &Point, b: &Point, tol: f64) -> bool {
        space.distance(a, b).unwrap() < tol
    }

    #[test]
    fn annulus_examples() {
        let phi = annulus_phi();
        let y = phi.evolve(PI / 2.0, &Point::annulus(1.0, 0.0)).unwrap();
        assert!(close(phi.space(), &y, &Point::annulus(0.0, 1.0), 1e-12));
        let psi = annulus_psi();
        let y = psi.evolve(PI, &Point::annulus(2.0, 0.0)).unwrap();
        assert!(close(psi.space(), &y, &Point::annulus(-2.0, 0.0), 1e-12));
        let inv = inverse_flow(&phi);
        let y = inv.evolve(PI / 2.0, &Point::annulus(1.0, 0.0)).unwrap();
        assert!(close(phi.space(), &y, &Point::annulus(0.0, -1.0), 1e-12));
    }

    #[test]
    fn evolve_rejects_non_finite_time() {
        assert!(annulus_phi()
            .evolve(f64::NAN, &Point::annulus(1.0, 0.0))
            .is_err());
        assert!(annulus_phi().evolve(1.0, &Point::torus(0.1, 0.1)).is_err());
    }

    #[test]
    fn fake_saddle_fixes_p() {
        let f = torus_fake_saddle();
        let p = Point::torus(SADDLE_POINT.0, SADDLE_POINT.1);
        for t in [-3.0, 0.5, 7.0] {
            assert_eq!(f.evolve(t, &p).unwrap(), p);
        }
        assert_eq!(f.fixed_hint().unwrap(), &[p]);
    }

    #[test]
    fn period_hints_match_evolution() {
        let phi = annulus_phi();
        for r in [1.0, 1.37, 2.0] {
            let x = Point::annulus_polar(r, 0.3);
            let back = phi.evolve(phi.period_of(&x).unwrap(), &x).unwrap();
            assert!(close(phi.space(), &x, &back, 1e-9));
        }
        let psi = annulus_psi();
        assert_eq!(psi.period_of(&Point::annulus(1.5, 0.0)), Some(TAU));
    }

    #[test]
    fn flow_axioms_on_catalog() {
        let ts = [-1.3, -0.2, 0.0, 0.45, 2.1];
        for f in [
            annulus_phi(),
            annulus_psi(),
            torus_irrational(),
            torus_fake_saddle(),
        ] {
            for x in f.space().grid(4) {
                assert_eq!(
                    f.space().distance(&f.evolve(0.0, &x).unwrap(), &x).unwrap(),
                    0.0
                );
                for &t in &ts {
                    for &u in &ts {
                        let a = f.evolve(t + u, &x).unwrap();
                        let b = f.evolve(t, &f.evolve(u, &x).unwrap()).unwrap();
                        let d = f.space().distance(&a, &b).unwrap();
                        assert!(d < 1e-7, "{} residual {d}", f.name());
                    }
                }
            }
        }
    }

    #[test]
    fn irrational_flow_moves_every_point() {
        let f = torus_irrational();
        let min = f
            .space()
            .grid(10)
            .iter()
            .map(|x| f.space().distance(&f.evolve(1.0, x).unwrap(), x).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(min > 0.0);
    }

    #[test]
    fn inverse_is_an_involution() {
        let f = torus_fake_saddle();
        let g = inverse_flow(&inverse_flow(&f));
        assert_eq!(g.name(), f.name());
        assert!(!g.is_reversed());
        let x = Point::torus(0.2, 0.7);
        assert_eq!(g.evolve(1.7, &x).unwrap(), f.evolve(1.7, &x).unwrap());
        let inv = inverse_flow(&f);
        assert_eq!(inv.fixed_hint(), f.fixed_hint());
    }

    #[test]
    fn radius_time_change_reproduces_psi() {
        let phi = annulus_phi();
        let v = SpeedFactor::by_name("radius", None).unwrap();
        let changed = time_change(&phi, &v, 1e-2).unwrap();
        let psi = annulus_psi();
        let x = Point::annulus(2.0, 0.0);
        for t in [1.0, PI, 10.0] {
            let a = changed.evolve(t, &x).unwrap();
            let b = psi.evolve(t, &x).unwrap();
            assert!(close(psi.space(), &a, &b, 1e-5));
        }
    }

    #[test]
    fn unit_time_change_is_identity() {
        let f = torus_fake_saddle();
        let g = time_change(&f, &SpeedFactor::constant(1.0).unwrap(), 0.01).unwrap();
        let x = Point::torus(0.3, 0.1);
        assert_eq!(g.evolve(2.0, &x).unwrap(), f.evolve(2.0, &x).unwrap());
    }

    #[test]
    fn doubled_speed_halves_parameter() {
        let f = torus_fake_saddle();
        let g = time_change(&f, &SpeedFactor::by_name("double", None).unwrap(), 0.01).unwrap();
        let x = Point::torus(0.41, 0.45);
        let a = g.evolve(0.8, &x).unwrap();
        let b = f.evolve(1.6, &x).unwrap();
        assert!(close(f.space(), &a, &b, 1e-9));
    }

    #[test]
    fn wave_time_change_stays_on_orbit() {
        let f = torus_irrational();
        let g = time_change(&f, &SpeedFactor::by_name("wave", None).unwrap(), 1e-3).unwrap();
        let x = Point::torus(0.1, 0.2);
        // on the linear flow the orbit is {x + a(1, GOLDEN)}: the projected
        // parameter must reproduce the point
        for t in [0.3, 1.0, 2.5] {
            let Point::Torus { u, v } = g.evolve(t, &x).unwrap() else {
                unreachable!()
            };
            let a = (u - 0.1).rem_euclid(1.0);
            let candidates = (0..4).map(|k| a + k as f64);
            let best = candidates
                .map(|a| {
                    f.space()
                        .distance(&f.evolve(a, &x).unwrap(), &Point::torus(u, v))
                        .unwrap()
                })
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-9, "{best}");
        }
    }

    #[test]
    fn time_change_rejects_bad_step() {
        let v = SpeedFactor::constant(1.0).unwrap();
        assert!(time_change(&annulus_phi(), &v, 0.0).is_err());
        assert!(time_change(&annulus_phi(), &v, -1.0).is_err());
    }

    #[test]
    fn shift_iterates() {
        let h = shift_map(5);
        let bits: Vec<u8> = (-5i64..=5).map(|k| k.rem_euclid(2) as u8).collect();
        let x = Point::BiSeq(
            crate::space::BiSeq::from_bits(&bits, crate::space::Extension::Periodic).unwrap(),
        );
        let y = h.iterate(1, &x).unwrap();
        let (Point::BiSeq(a), Point::BiSeq(b)) = (&x, &y) else {
            unreachable!()
        };
        for n in -6..6 {
            assert_eq!(b.bit(n), a.bit(n + 1));
        }
        assert_eq!(h.iterate(0, &x).unwrap(), x);
        assert_eq!(h.inverse(&h.forward(&x).unwrap()).unwrap(), x);
    }

    #[test]
    fn ext_plane_map_matches_definition() {
        let h = ext_plane_map();
        assert_eq!(h.forward(&Point::ext(2, 5)).unwrap(), Point::ext(3, 5));
        assert_eq!(h.forward(&Point::ext(5, 5)).unwrap(), Point::ext(-5, -5));
        assert_eq!(h.forward(&Point::ext(5, -5)).unwrap(), Point::ext(-5, 5));
        assert_eq!(h.forward(&Point::ext(-5, -5)).unwrap(), Point::ext(-4, -5));
        assert_eq!(h.forward(&Point::ext(7, 0)).unwrap(), Point::ext(8, 0));
        let inf = Point::ExtPlane(ExtPoint::Infinity);
        assert_eq!(h.forward(&inf).unwrap(), inf);
        for q in 1..9 {
            assert_eq!(
                h.iterate(2 * q + 1, &Point::ext(0, q)).unwrap(),
                Point::ext(0, -q)
            );
        }
        for x in h.space().grid(6) {
            assert_eq!(h.inverse(&h.forward(&x).unwrap()).unwrap(), x);
            // closed-form powers agree with step-by-step iteration
            let mut y = x.clone();
            for _ in 0..17 {
                y = h.forward(&y).unwrap();
            }
            assert_eq!(h.iterate(17, &x).unwrap(), y);
        }
        assert!(h.forward(&Point::ext(4, 2)).is_err());
    }

    #[test]
    fn catalog_lookup() {
        assert_eq!(catalog().len(), CATALOG_NAMES.len());
        assert!(matches!(
            lookup("nonexistent"),
            Err(Error::UnknownSystem(_))
        ));
        assert!(lookup_flow("shift-map").is_err());
    }

    #[test]
    fn trajectory_matches_direct_evolution() {
        let f = torus_fake_saddle();
        let x = Point::torus(0.37, 0.52);
        let mut traj = Trajectory::new(&f, x.clone(), 0.01);
        for t in [0.0, 0.013, -0.5, 1.234, 3.0, -2.2] {
            let a = traj.at(t).unwrap();
            let b = f.evolve(t, &x).unwrap();
            assert!(close(f.space(), &a, &b, 1e-9), "t = {t}");
        }
    }
}
