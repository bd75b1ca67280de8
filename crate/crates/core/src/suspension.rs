//! Suspension flows `X(σ, f)` over a homeomorphism under a roof function.
//!
//! # Metric
//!
//! Lift points to `X × R`, where the integer action `g(x, t) = (σx, t - c)`
//! (roof `c`) realises the identification `(x, c) ~ (σx, 0)`. On the lift use
//!
//! ```text
//! m((x,t),(y,u)) = a|t-u| + γ Σ_n [ K |β_n(t) - β_n(u)| + min(β_n(t), β_n(u)) d(σⁿx, σⁿy) ]
//! ```
//!
//! with tents `β_n(t) = max(0, 1 - |t - nc|/c)`, `K = D/2` (`D` the base
//! diameter), `a = 1/2` and `γ = c/(2D)`. Shifting `n` shows `m` is invariant
//! under `g`, and `K >= D/2` makes each summand a metric term, so
//! `ρ(P, Q) = min_k m(P, g^k Q)` is a metric on the quotient. At a common
//! height `h` it reduces to `γ[(1 - h/c) d(x,y) + (h/c) d(σx,σy)]`, the usual
//! horizontal interpolation, and vertical displacement by `Δ` costs at most
//! `|Δ|`.
//!
//! Non-constant roofs are handled by rescaling each fibre to unit height.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::checker::{Budget, Verdict, Witness};
use crate::error::{arg, Error, Result};
use crate::reparam::Reparam;
use crate::space::{Metric, Point, SpaceDescriptor};
use crate::systems::{FlowRule, FlowSystem, Homeo};

/// A continuous roof `f: X -> (0, ∞)`.
#[derive(Clone)]
pub struct RoofFunction {
    rule: Arc<dyn Fn(&Point) -> f64 + Send + Sync>,
    constant: Option<f64>,
    f_min: f64,
}

impl fmt::Debug for RoofFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RoofFunction")
            .field("constant", &self.constant)
            .field("f_min", &self.f_min)
            .finish_non_exhaustive()
    }
}

impl RoofFunction {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return arg(format!("roof must be positive, got {c}"));
        }
        Ok(RoofFunction {
            rule: Arc::new(move |_| c),
            constant: Some(c),
            f_min: c,
        })
    }

    /// A general roof with a declared lower bound.
    pub fn new(f_min: f64, rule: Arc<dyn Fn(&Point) -> f64 + Send + Sync>) -> Result<Self> {
        if !(f_min > 0.0) || !f_min.is_finite() {
            return arg(format!("roof lower bound must be positive, got {f_min}"));
        }
        Ok(RoofFunction {
            rule,
            constant: None,
            f_min,
        })
    }

    pub fn eval(&self, x: &Point) -> f64 {
        self.constant.unwrap_or_else(|| (self.rule)(x))
    }

    pub fn f_min(&self) -> f64 {
        self.f_min
    }

    pub fn constant_value(&self) -> Option<f64> {
        self.constant
    }
}

/// The space `X(σ, f)`.
#[derive(Clone)]
pub struct SuspensionSpace {
    base: Homeo,
    roof: RoofFunction,
    /// Heights per fibre in generated grids.
    pub heights: usize,
}

impl fmt::Debug for SuspensionSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SuspensionSpace")
            .field("base", &self.base.name())
            .field("roof", &self.roof)
            .field("heights", &self.heights)
            .finish()
    }
}

const VERTICAL_WEIGHT: f64 = 0.5;

impl SuspensionSpace {
    pub fn base(&self) -> &Homeo {
        &self.base
    }

    pub fn roof(&self) -> &RoofFunction {
        &self.roof
    }

    fn split<'p>(&self, p: &'p Point) -> Result<(&'p Point, f64)> {
        p.as_suspension().ok_or_else(|| Error::VariantMismatch {
            space: self.name(),
            found: p.kind().to_string(),
        })
    }

    /// The representative of `(x, s)` with `0 <= s < f(x)`.
    pub fn canonical(&self, x: &Point, s: f64) -> Result<Point> {
        if !s.is_finite() {
            return arg(format!("suspension height must be finite, got {s}"));
        }
        let mut x = x.clone();
        let mut h = s;
        if let Some(c) = self.roof.constant {
            let k = (h / c).floor();
            if k != 0.0 {
                x = self.base.iterate(k as i64, &x)?;
                h -= k * c;
            }
            // rounding can leave h a hair outside [0, c)
            if h >= c {
                x = self.base.forward(&x)?;
                h -= c;
            }
            if h < 0.0 {
                x = self.base.inverse(&x)?;
                h += c;
                if h >= c {
                    h = 0.0;
                }
            }
        } else {
            loop {
                let top = self.roof.eval(&x);
                if h >= top {
                    h -= top;
                    x = self.base.forward(&x)?;
                } else if h < 0.0 {
                    x = self.base.inverse(&x)?;
                    h += self.roof.eval(&x);
                } else {
                    break;
                }
            }
        }
        Ok(Point::suspension(x, h))
    }

    /// Normalised lift coordinates: roof height `c` and height in `[0, c)`.
    fn lift(&self, p: &Point) -> Result<(Point, f64, f64)> {
        let (x, s) = self.split(p)?;
        match self.roof.constant {
            Some(c) => Ok((x.clone(), s, c)),
            None => Ok((x.clone(), s / self.roof.eval(x), 1.0)),
        }
    }

    fn tent(n: i64, t: f64, c: f64) -> f64 {
        (1.0 - (t - n as f64 * c).abs() / c).max(0.0)
    }

    /// The invariant lift metric between `(x, t)` and `(y, u)`.
    fn lift_metric(&self, x: &Point, t: f64, y: &Point, u: f64, c: f64) -> Result<f64> {
        let bd = self.base.space().diameter();
        let (k_gap, gamma) = (bd / 2.0, c / (2.0 * bd));
        let lo = (t.min(u) / c).floor() as i64 - 1;
        let hi = (t.max(u) / c).ceil() as i64 + 1;
        let mut sum = 0.0;
        for n in lo..=hi {
            let (bt, bu) = (Self::tent(n, t, c), Self::tent(n, u, c));
            if bt == 0.0 && bu == 0.0 {
                continue;
            }
            sum += k_gap * (bt - bu).abs();
            let w = bt.min(bu);
            if w > 0.0 {
                let xn = self.base.iterate(n, x)?;
                let yn = self.base.iterate(n, y)?;
                sum += w * self.base.space().distance(&xn, &yn)?;
            }
        }
        Ok(VERTICAL_WEIGHT * (t - u).abs() + gamma * sum)
    }

    /// Distance between two canonical suspension points.
    pub fn sus_distance(&self, p: &Point, q: &Point) -> Result<f64> {
        let (x, t, c) = self.lift(p)?;
        let (y, u, _) = self.lift(q)?;
        // translate q by g^k for k outward from the nearest level; the
        // vertical term alone bounds every further k from below
        let k0 = ((u - t) / c).round() as i64;
        let mut best = f64::INFINITY;
        for step in 0.. {
            let mut any = false;
            for k in if step == 0 {
                vec![k0]
            } else {
                vec![k0 + step, k0 - step]
            } {
                let shifted_u = u - k as f64 * c;
                if VERTICAL_WEIGHT * (t - shifted_u).abs() >= best {
                    continue;
                }
                any = true;
                let yk = self.base.iterate(k, &y)?;
                best = best.min(self.lift_metric(&x, t, &yk, shifted_u, c)?);
            }
            if !any && step > 0 {
                break;
            }
        }
        Ok(best)
    }
}

impl Metric for SuspensionSpace {
    fn name(&self) -> String {
        format!("suspension({})", self.base.space().name())
    }

    fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.sus_distance(p, q)
    }

    /// Upper bound `c`: after the best lift the vertical term is at most
    /// `c/4` and the fibre terms at most `3c/4`.
    fn diameter(&self) -> f64 {
        let c = self.roof.constant.unwrap_or(1.0);
        VERTICAL_WEIGHT * c + c / 2.0
    }

    fn grid(&self, resolution: usize) -> Vec<Point> {
        let hs = self.heights.max(1);
        self.base
            .space()
            .grid(resolution)
            .into_iter()
            .flat_map(|x| {
                let top = self.roof.eval(&x);
                (0..hs).map(move |j| Point::suspension(x.clone(), top * j as f64 / hs as f64))
            })
            .collect()
    }

    fn near(&self, p: &Point, radius: f64) -> Vec<Point> {
        let Some((x, h)) = p.as_suspension() else {
            return Vec::new();
        };
        self.base
            .space()
            .near(x, radius)
            .into_iter()
            .map(|y| Point::suspension(y, h))
            .collect()
    }

    fn sample(&self, rng: &mut dyn RngCore, count: usize) -> Vec<Point> {
        self.base
            .space()
            .sample(rng, count)
            .into_iter()
            .map(|x| {
                let h = rng.gen::<f64>() * self.roof.eval(&x);
                Point::suspension(x, h)
            })
            .collect()
    }

    fn contains(&self, p: &Point) -> bool {
        match p.as_suspension() {
            Some((x, h)) => self.base.space().contains(x) && h >= 0.0 && h < self.roof.eval(x),
            None => false,
        }
    }
}

struct SuspensionRule {
    space: SuspensionSpace,
}

impl FlowRule for SuspensionRule {
    fn evolve(&self, t: f64, p: &Point) -> Result<Point> {
        let (x, s) = self.space.split(p)?;
        self.space.canonical(x, s + t)
    }
}

/// A suspension space together with its vertical flow.
#[derive(Clone, Debug)]
pub struct Suspension {
    pub space: SuspensionSpace,
    pub flow: FlowSystem,
}

/// Heights per fibre in suspension grids built by [`build`].
pub const DEFAULT_HEIGHTS: usize = 4;

/// The suspension of `sigma` under `roof`, named `sus-<base>` with the
/// trailing `-map` dropped.
pub fn build(sigma: &Homeo, roof: RoofFunction) -> Result<Suspension> {
    let space = SuspensionSpace {
        base: sigma.clone(),
        roof,
        heights: DEFAULT_HEIGHTS,
    };
    let base_name = sigma.name().strip_suffix("-map").unwrap_or(sigma.name());
    let descriptor = SpaceDescriptor::new(space.clone());
    let flow = FlowSystem::new(
        format!("sus-{base_name}"),
        descriptor,
        Arc::new(SuspensionRule {
            space: space.clone(),
        }),
    )
    .with_fixed_hint(Vec::new())
    .with_speed(1.0);
    let flow = match space.roof.constant {
        Some(c) => flow.with_roof(c),
        None => flow,
    };
    Ok(Suspension { space, flow })
}

/// Checks that no grid point returns to itself at the probe times
/// `0.1·f_min, ..., 0.9·f_min`.
pub fn no_fixed_points_check(s: &Suspension, budget: &Budget) -> Result<Verdict> {
    let f_min = s.space.roof.f_min();
    let grid = s.space.grid(budget.grid);
    let mut worst: Option<(f64, Point, f64)> = None;
    for p in &grid {
        for k in 1..=9 {
            let t = 0.1 * k as f64 * f_min;
            let q = s.flow.evolve(t, p)?;
            let d = s.space.sus_distance(p, &q)?;
            if worst.as_ref().is_none_or(|w| d < w.0) {
                worst = Some((d, p.clone(), t));
            }
        }
    }
    match worst {
        Some((d, p, t)) if d <= 0.0 => {
            let y = s.flow.evolve(t, &p)?;
            Ok(Verdict::violated(Witness {
                system: s.flow.name().to_string(),
                property: "no-fixed-points".into(),
                speed: None,
                inverse: false,
                x: p,
                y,
                reparam: Reparam::identity(),
                budget: budget.clone(),
                sup: d,
                margin: 0.0,
                conclusion: format!("d(φ_t x, x) = 0 at t = {t}"),
            }))
        }
        _ => Ok(Verdict::ConsistentUpTo {
            budget: budget.clone(),
            pairs: grid.len() as u64,
        }),
    }
}
