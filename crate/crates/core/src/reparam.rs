//! Piecewise-linear reparametrizations `s: R -> R` with `s(0) = 0`.
//!
//! Every continuous reparametrization can be approximated by a piecewise-linear
//! one, so the existential quantifier over a class of reparametrizations is
//! searched over deterministic finite families built here.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};

/// Which reparametrizations a property quantifies over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReparamClass {
    /// Only `s(t) = t`.
    Identity,
    /// Continuous with `s(0) = 0`.
    C,
    /// Increasing homeomorphisms with `s(0) = 0`.
    K,
    /// Members of `C` whose range is all of `R`.
    SurjectiveC,
}

impl ReparamClass {
    pub fn name(self) -> &'static str {
        match self {
            ReparamClass::Identity => "identity",
            ReparamClass::C => "C",
            ReparamClass::K => "K",
            ReparamClass::SurjectiveC => "surjective-C",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(ReparamClass::Identity),
            "C" | "c" => Ok(ReparamClass::C),
            "K" | "k" => Ok(ReparamClass::K),
            "surjective-C" | "surjective-c" | "surjective" => Ok(ReparamClass::SurjectiveC),
            other => arg(format!("unknown reparametrization class `{other}`")),
        }
    }
}

/// Membership of a reparametrization in the three classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classes {
    pub c: bool,
    pub k: bool,
    pub surjective: bool,
}

impl Classes {
    pub fn contains(&self, class: ReparamClass, is_identity: bool) -> bool {
        match class {
            ReparamClass::Identity => is_identity,
            ReparamClass::C => self.c,
            ReparamClass::K => self.k,
            ReparamClass::SurjectiveC => self.c && self.surjective,
        }
    }
}

/// A piecewise-linear function through `(knots[i], values[i])`, extended
/// linearly beyond the outer knots.
#[derive(Clone, Debug, PartialEq)]
pub struct Reparam {
    label: String,
    knots: Vec<f64>,
    values: Vec<f64>,
    left_slope: f64,
    right_slope: f64,
}

impl Reparam {
    pub fn new(
        label: impl Into<String>,
        knots: Vec<f64>,
        values: Vec<f64>,
        left_slope: f64,
        right_slope: f64,
    ) -> Result<Self> {
        if knots.is_empty() || knots.len() != values.len() {
            return arg("reparam needs matching, non-empty knot and value lists");
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite())
            || !left_slope.is_finite()
            || !right_slope.is_finite()
        {
            return arg("reparam knots, values and slopes must be finite");
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return arg("reparam knots must be strictly increasing");
        }
        match knots.iter().position(|&t| t == 0.0) {
            Some(i) if values[i] == 0.0 => {}
            Some(_) => return arg("reparam must satisfy s(0) = 0"),
            None => return arg("reparam knots must contain 0"),
        }
        Ok(Reparam {
            label: label.into(),
            knots,
            values,
            left_slope,
            right_slope,
        })
    }

    pub fn identity() -> Self {
        Reparam {
            label: "identity".into(),
            knots: vec![0.0],
            values: vec![0.0],
            left_slope: 1.0,
            right_slope: 1.0,
        }
    }

    /// `s(t) = 0` for all `t`.
    pub fn zero() -> Self {
        Reparam {
            label: "zero".into(),
            knots: vec![0.0],
            values: vec![0.0],
            left_slope: 0.0,
            right_slope: 0.0,
        }
    }

    /// `s(t) = lambda * t`.
    pub fn dilation(lambda: f64) -> Self {
        Reparam {
            label: format!("dilation({lambda})"),
            knots: vec![0.0],
            values: vec![0.0],
            left_slope: lambda,
            right_slope: lambda,
        }
    }

    /// Equal to `t - tau` for `|t| >= width`, linear on `[-width, 0]` and `[0, width]`.
    pub fn shift_like(tau: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return arg("shift width must be positive");
        }
        Reparam::new(
            format!("shift({tau})"),
            vec![-width, 0.0, width],
            vec![-width - tau, 0.0, width - tau],
            1.0,
            1.0,
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> (f64, f64) {
        (self.left_slope, self.right_slope)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.knots.len();
        let first = self.knots[0];
        let last = self.knots[n - 1];
        if t <= first {
            return self.values[0] + self.left_slope * (t - first);
        }
        if t >= last {
            return self.values[n - 1] + self.right_slope * (t - last);
        }
        // first < t < last, so the partition point is in 1..n
        let i = self.knots.partition_point(|&k| k <= t);
        let (t0, t1) = (self.knots[i - 1], self.knots[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    fn segment_slopes(&self) -> impl Iterator<Item = f64> + '_ {
        self.knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(k, v)| (v[1] - v[0]) / (k[1] - k[0]))
    }

    /// Largest absolute slope, a Lipschitz constant for `eval`.
    pub fn max_abs_slope(&self) -> f64 {
        self.segment_slopes()
            .chain([self.left_slope, self.right_slope])
            .fold(0.0, |m, s| m.max(s.abs()))
    }

    pub fn is_identity(&self) -> bool {
        self.left_slope == 1.0
            && self.right_slope == 1.0
            && self.knots.iter().zip(&self.values).all(|(t, v)| t == v)
    }

    pub fn classify(&self) -> Classes {
        let k = self.left_slope > 0.0
            && self.right_slope > 0.0
            && self.segment_slopes().all(|s| s > 0.0);
        // the range is unbounded in both directions exactly when the two
        // linear tails head to opposite infinities
        let surjective = self.left_slope != 0.0
            && self.right_slope != 0.0
            && self.left_slope.signum() == self.right_slope.signum();
        Classes {
            c: true,
            k,
            surjective,
        }
    }

    /// `sup_{|t| <= horizon} |s(t) - t|`; attained at a knot or an endpoint.
    pub fn max_deviation(&self, horizon: f64) -> f64 {
        let dev = |t: f64| (self.eval(t) - t).abs();
        self.knots
            .iter()
            .filter(|t| t.abs() <= horizon)
            .map(|&t| dev(t))
            .chain([dev(-horizon), dev(horizon)])
            .fold(0.0, f64::max)
    }

    /// Smallest and largest value of `s` over `[lo, hi]`.
    pub fn range_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        self.knots
            .iter()
            .filter(|t| **t >= lo && **t <= hi)
            .map(|&t| self.eval(t))
            .chain([self.eval(lo), self.eval(hi)])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                (a.min(v), b.max(v))
            })
    }

    /// Plain-text knot list: `label | left | right | t:v t:v ...`.
    pub fn to_knot_list(&self) -> String {
        let pairs: Vec<String> = self
            .knots
            .iter()
            .zip(&self.values)
            .map(|(t, v)| format!("{t:?}:{v:?}"))
            .collect();
        format!(
            "{} | {:?} | {:?} | {}",
            self.label,
            self.left_slope,
            self.right_slope,
            pairs.join(" ")
        )
    }

    pub fn from_knot_list(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad knot list `{s}`"));
        let parts: Vec<&str> = s.split('|').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(bad());
        }
        let num = |x: &str| x.parse::<f64>().map_err(|_| bad());
        let mut knots = Vec::new();
        let mut values = Vec::new();
        for pair in parts[3].split_whitespace() {
            let (t, v) = pair.split_once(':').ok_or_else(bad)?;
            knots.push(num(t)?);
            values.push(num(v)?);
        }
        Reparam::new(parts[0], knots, values, num(parts[1])?, num(parts[2])?)
    }
}

impl fmt::Display for Reparam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_knot_list())
    }
}

/// Parameters for [`sample_family`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilySpec {
    pub class: ReparamClass,
    pub horizon: f64,
    pub knots: usize,
    pub amplitude: f64,
    pub members: usize,
    pub seed: u64,
}

/// Deterministic family of reparametrizations of the requested class.
///
/// Order: identity, then `s = 0` (class C only), shift-like members
/// `t - tau` with `|tau| in {a, a/2}`, dilations `1 +- a/T`, then `members`
/// seeded random piecewise-linear members with amplitudes `a*j/members`.
/// With `a = 0` the family is just the identity.
pub fn sample_family(spec: &FamilySpec) -> Result<Vec<Reparam>> {
    let FamilySpec {
        class,
        horizon,
        knots,
        amplitude: a,
        members,
        seed,
    } = *spec;
    if knots < 2 {
        return arg("reparam family needs at least 2 knots");
    }
    if !(a >= 0.0) || !a.is_finite() {
        return arg("reparam amplitude must be a finite non-negative number");
    }
    if !(horizon > 0.0) {
        return arg("reparam horizon must be positive");
    }
    let mut family = vec![Reparam::identity()];
    if class == ReparamClass::Identity || a == 0.0 {
        return Ok(family);
    }
    if class == ReparamClass::C {
        family.push(Reparam::zero());
    }
    for tau in [a, -a, a / 2.0, -a / 2.0] {
        family.push(Reparam::shift_like(tau, 2.0 * tau.abs())?);
    }
    if a < horizon {
        family.push(Reparam::dilation(1.0 + a / horizon));
        family.push(Reparam::dilation(1.0 - a / horizon));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid: Vec<f64> = (0..knots)
        .map(|i| -horizon + 2.0 * horizon * i as f64 / (knots - 1) as f64)
        .collect();
    if !grid.contains(&0.0) {
        grid.push(0.0);
        grid.sort_by(f64::total_cmp);
    }
    let zero_at = grid.iter().position(|&t| t == 0.0).unwrap();
    for j in 1..=members {
        let amp = a * j as f64 / members as f64;
        let mut values: Vec<f64> = grid
            .iter()
            .map(|&t| t + amp * rng.gen_range(-1.0..=1.0))
            .collect();
        values[zero_at] = 0.0;
        let clamped = class == ReparamClass::C && j % 2 == 0;
        if class == ReparamClass::K {
            make_increasing(&grid, &mut values, zero_at);
        }
        let tail = if clamped { 0.0 } else { 1.0 };
        family.push(Reparam::new(
            format!("random#{j}"),
            grid.clone(),
            values,
            tail,
            tail,
        )?);
    }
    debug_assert!(family
        .iter()
        .all(|s| s.classify().contains(class, s.is_identity())));
    Ok(family)
}

/// Forces strictly increasing values while keeping `values[zero_at] = 0`.
/// If every input value lies within `amp` of `t`, so does every output.
fn make_increasing(knots: &[f64], values: &mut [f64], zero_at: usize) {
    const MIN_SLOPE: f64 = 0.05;
    for i in zero_at + 1..values.len() {
        let floor = values[i - 1] + MIN_SLOPE * (knots[i] - knots[i - 1]);
        values[i] = values[i].max(floor);
    }
    for i in (0..zero_at).rev() {
        let ceil = values[i + 1] - MIN_SLOPE * (knots[i + 1] - knots[i]);
        values[i] = values[i].min(ceil);
    }
}
