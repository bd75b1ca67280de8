//! Expansivity and separation for homeomorphisms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{arg, Result};
use crate::reparam::Reparam;
use crate::space::Point;
use crate::systems::Homeo;

use super::sweep::map_rows;
use super::{Budget, Verdict, Witness};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HomeoKind {
    /// δ-close orbits force `x = y`.
    Expansive,
    /// δ-close orbits force `x = σ^k(y)` for some `k`.
    Separating,
}

impl HomeoKind {
    /// Accepts `expansive`/`separating`, with or without a `homeo-` prefix.
    pub fn parse(name: &str) -> Option<Self> {
        match name.strip_prefix("homeo-").unwrap_or(name) {
            "expansive" => Some(HomeoKind::Expansive),
            "separating" => Some(HomeoKind::Separating),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HomeoKind::Expansive => "homeo-expansive",
            HomeoKind::Separating => "homeo-separating",
        }
    }
}

/// Where the candidate pairs come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairSource {
    /// Unordered pairs of distinct points of `space.grid(resolution)`.
    Grid(usize),
    /// `count` seeded pairs; every other pair takes `y` among the near
    /// neighbours of `x` when the space provides any.
    Random { count: usize, seed: u64 },
}

/// A homeomorphism verdict together with the close pairs that the
/// separating conclusion resolved, as `(x, y, k)` with `x = σ^k(y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomeoOutcome {
    pub verdict: Verdict,
    pub resolved: Vec<(Point, Point, i64)>,
}

/// `max_{|n| <= window} d(σⁿx, σⁿy)`, stopping once it reaches `stop`.
fn orbit_sup(h: &Homeo, x: &Point, y: &Point, window: i64, stop: f64) -> Result<f64> {
    let space = h.space();
    let mut sup = space.distance(x, y)?;
    for n in 1..=window {
        for m in [n, -n] {
            if sup >= stop {
                return Ok(sup);
            }
            sup = sup.max(space.distance(&h.iterate(m, x)?, &h.iterate(m, y)?)?);
        }
    }
    Ok(sup)
}

/// Smallest `|k| <= bound`, positive first, with `σ^k(y) = x`.
fn orbit_index(h: &Homeo, x: &Point, y: &Point, bound: i64) -> Result<Option<i64>> {
    for k in 1..=bound {
        for m in [k, -k] {
            if h.iterate(m, y)? == *x {
                return Ok(Some(m));
            }
        }
    }
    Ok(None)
}

fn pairs_from(h: &Homeo, source: PairSource, delta: f64) -> Vec<Vec<(Point, Point)>> {
    let space = h.space();
    match source {
        PairSource::Grid(res) => {
            let grid = space.grid(res);
            (0..grid.len())
                .map(|i| {
                    grid[i + 1..]
                        .iter()
                        .map(|y| (grid[i].clone(), y.clone()))
                        .collect()
                })
                .collect()
        }
        PairSource::Random { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pairs = Vec::with_capacity(count);
            for i in 0..count {
                let x = space.sample(&mut rng, 1).remove(0);
                let near = if i % 2 == 1 {
                    space.near(&x, delta / 2.0)
                } else {
                    Vec::new()
                };
                let y = if near.is_empty() {
                    space.sample(&mut rng, 1).remove(0)
                } else {
                    near[rng.gen_range(0..near.len())].clone()
                };
                pairs.push((x, y));
            }
            pairs.chunks(64).map(|c| c.to_vec()).collect()
        }
    }
}

/// Semidecides expansivity or separation of `h` at `delta`.
///
/// A pair is δ-close when `d(σⁿx, σⁿy) < δ` for all `|n| <= window`. The
/// separating conclusion searches `x = σ^k(y)` for `|k| <= orbit_bound`.
pub fn homeo_verdict(
    h: &Homeo,
    kind: HomeoKind,
    delta: f64,
    window: i64,
    source: PairSource,
    orbit_bound: i64,
) -> Result<HomeoOutcome> {
    if window < 1 {
        return arg(format!("window N must be at least 1, got {window}"));
    }
    if !(delta > 0.0) {
        return arg(format!("delta must be positive, got {delta}"));
    }
    let rows = pairs_from(h, source, delta);
    let budget = Budget {
        delta,
        horizon: window as f64,
        dt: 1.0,
        grid: match source {
            PairSource::Grid(r) => r,
            PairSource::Random { count, .. } => count,
        },
        near: matches!(source, PairSource::Random { .. }),
        family: 0,
        seed: match source {
            PairSource::Grid(_) => 0,
            PairSource::Random { seed, .. } => seed,
        },
        window: Some(orbit_bound as f64),
        ..Budget::default()
    };

    type Row = Result<(Option<Witness>, Vec<(Point, Point, i64)>)>;
    let run_row = |r: usize| -> Row {
        let mut resolved = Vec::new();
        for (x, y) in &rows[r] {
            if x == y {
                continue;
            }
            let sup = orbit_sup(h, x, y, window, delta)?;
            if sup >= delta {
                continue;
            }
            let conclusion = match kind {
                HomeoKind::Expansive => "x ≠ y".to_string(),
                HomeoKind::Separating => match orbit_index(h, x, y, orbit_bound)? {
                    Some(k) => {
                        resolved.push((x.clone(), y.clone(), k));
                        continue;
                    }
                    None => format!("no |k| <= {orbit_bound} with σ^k(y) = x"),
                },
            };
            let w = Witness {
                system: h.name().to_string(),
                property: kind.name().to_string(),
                speed: None,
                inverse: false,
                x: x.clone(),
                y: y.clone(),
                reparam: Reparam::identity(),
                budget: budget.clone(),
                sup,
                margin: 0.0,
                conclusion,
            };
            return Ok((Some(w), resolved));
        }
        Ok((None, resolved))
    };

    let mut resolved = Vec::new();
    let mut pairs = 0u64;
    for (r, out) in map_rows(0..rows.len(), run_row).into_iter().enumerate() {
        let (w, res) = out?;
        resolved.extend(res);
        pairs += rows[r].len() as u64;
        if let Some(w) = w {
            return Ok(HomeoOutcome {
                verdict: Verdict::violated(w),
                resolved,
            });
        }
    }
    Ok(HomeoOutcome {
        verdict: Verdict::ConsistentUpTo { budget, pairs },
        resolved,
    })
}

/// Recomputes the orbit supremum and conclusion of a homeomorphism witness.
pub(crate) fn replay_parts(h: &Homeo, w: &Witness) -> Result<(f64, bool)> {
    let kind = HomeoKind::parse(&w.property)
        .ok_or_else(|| crate::Error::Witness(format!("unknown property `{}`", w.property)))?;
    let window = w.budget.horizon.round() as i64;
    let bound = w.budget.window.unwrap_or(0.0).round() as i64;
    let sup = orbit_sup(h, &w.x, &w.y, window, f64::INFINITY)?;
    let holds = match kind {
        HomeoKind::Expansive => w.x == w.y,
        HomeoKind::Separating => w.x == w.y || orbit_index(h, &w.x, &w.y, bound)?.is_some(),
    };
    Ok((sup, holds))
}
