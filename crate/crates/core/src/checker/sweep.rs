//! The pair × reparametrization × time sweep behind [`verdict`].

use crate::error::Result;
use crate::reparam::{sample_family, FamilySpec, Reparam};
use crate::space::Point;
use crate::systems::{FlowSystem, Trajectory};

use super::orbit::{d_phi, same_orbit};
use super::{Budget, Closeness, Conclusion, PropertyDescriptor, TimeDomain, Verdict, Witness};

/// Rows of the pair table handled between two early-exit checks.
const CHUNK_ROWS: usize = 32;

/// Coarse pass spacing in time units; pairs that separate usually do so on
/// this sub-grid, long before the fine pass.
const COARSE_SPACING: f64 = 0.5;

/// Result of evaluating the closeness quantity on the time grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosenessTrace {
    /// Largest value seen.
    pub sup: f64,
    /// True when some value reached the threshold (evaluation stopped there).
    pub exceeded: bool,
}

struct Walkers<'a> {
    f: &'a FlowSystem,
    closeness: Closeness,
    x: Trajectory<'a>,
    y: Trajectory<'a>,
}

impl<'a> Walkers<'a> {
    fn new(f: &'a FlowSystem, closeness: Closeness, x: &Point, y: &Point, dt: f64) -> Self {
        Walkers {
            f,
            closeness,
            x: Trajectory::new(f, x.clone(), dt),
            y: Trajectory::new(f, y.clone(), dt),
        }
    }

    fn value(&mut self, t: f64, s: &Reparam) -> Result<f64> {
        let st = s.eval(t);
        let space = self.f.space();
        let a = self.x.at(t)?;
        let far = space.distance(&a, &self.y.at(st)?)?;
        Ok(match self.closeness {
            Closeness::Single => far,
            Closeness::KhPair => far.max(space.distance(&a, &self.x.at(st)?)?),
        })
    }
}

/// Time indices in evaluation order: a coarse sub-grid first, then the rest,
/// each in order `0, +1, -1, +2, ...` of magnitude.
fn time_order(budget: &Budget, domain: TimeDomain) -> (Vec<i64>, usize) {
    let m = budget.steps();
    let stride = ((COARSE_SPACING / budget.dt).round() as i64).max(1);
    let signs: &[i64] = match domain {
        TimeDomain::Full => &[1, -1],
        TimeDomain::Positive => &[1],
    };
    let mut coarse = vec![0];
    let mut fine = Vec::new();
    for k in 1..=m {
        for &sgn in signs {
            if k % stride == 0 {
                coarse.push(sgn * k);
            } else {
                fine.push(sgn * k);
            }
        }
    }
    let split = coarse.len();
    coarse.extend(fine);
    (coarse, split)
}

fn scan(
    w: &mut Walkers<'_>,
    s: &Reparam,
    indices: &[i64],
    dt: f64,
    threshold: f64,
    sup: &mut f64,
) -> Result<bool> {
    for &i in indices {
        let v = w.value(i as f64 * dt, s)?;
        *sup = sup.max(v);
        if v >= threshold {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Grid supremum of the closeness quantity over the whole time domain.
pub fn closeness_sup(
    f: &FlowSystem,
    prop: &PropertyDescriptor,
    budget: &Budget,
    x: &Point,
    y: &Point,
    s: &Reparam,
) -> Result<f64> {
    let (order, _) = time_order(budget, prop.domain);
    let mut w = Walkers::new(f, prop.closeness, x, y, budget.dt);
    let mut sup: f64 = 0.0;
    scan(&mut w, s, &order, budget.dt, f64::INFINITY, &mut sup)?;
    Ok(sup)
}

/// Tests the conclusion of `prop` for the pair; the string describes the
/// outcome.
pub fn conclusion_holds(
    f: &FlowSystem,
    prop: &PropertyDescriptor,
    budget: &Budget,
    x: &Point,
    y: &Point,
) -> Result<(bool, String)> {
    let eps = budget.eps.unwrap_or(0.0);
    Ok(match prop.conclusion {
        Conclusion::SameOrbit => {
            let w = budget.window.or(f.window_hint()).unwrap_or(budget.horizon);
            match same_orbit(f, x, y, w, budget.eta, budget.dt)? {
                Some(tau) => (true, format!("y = φ_τ(x) with τ = {tau:.6}")),
                None => (
                    false,
                    format!("no τ in [-{w}, {w}] with d(φ_τ x, y) < η = {}", budget.eta),
                ),
            }
        }
        Conclusion::Local => match same_orbit(f, x, y, eps, budget.eta, budget.dt)? {
            Some(tau) if tau.abs() < eps => (true, format!("y = φ_τ(x) with τ = {tau:.6}")),
            _ => (
                false,
                format!(
                    "no τ in (-{eps}, {eps}) with d(φ_τ x, y) < η = {}",
                    budget.eta
                ),
            ),
        },
        Conclusion::Dphi => {
            let d = d_phi(f, x, y, budget)?;
            (d < eps, format!("d_φ(x, y) = {d:.6} against ε = {eps}"))
        }
    })
}

pub(super) struct Sweep<'a> {
    f: &'a FlowSystem,
    prop: &'a PropertyDescriptor,
    budget: &'a Budget,
    family: Vec<(Reparam, f64)>,
    order: Vec<i64>,
    split: usize,
}

impl<'a> Sweep<'a> {
    /// Returns `None` when the time grid is too coarse for δ.
    pub(super) fn new(
        f: &'a FlowSystem,
        prop: &'a PropertyDescriptor,
        budget: &'a Budget,
    ) -> Result<std::result::Result<Self, String>> {
        budget.validate(Some(prop))?;
        let speed = f.speed_bound();
        let identity_margin = speed * budget.dt;
        if identity_margin >= budget.delta {
            return Ok(Err(format!(
                "time step {} with speed bound {speed:.4} gives a Lipschitz margin {identity_margin:.4} >= δ = {}",
                budget.dt, budget.delta
            )));
        }
        let spec = FamilySpec {
            class: prop.class,
            horizon: budget.horizon,
            knots: budget.knots,
            amplitude: budget.amplitude,
            members: budget.family,
            seed: budget.seed,
        };
        let family = sample_family(&spec)?
            .into_iter()
            .filter(|s| prop.domain == TimeDomain::Full || s.range_on(0.0, budget.horizon).0 >= 0.0)
            .map(|s| {
                let margin = speed * (1.0 + s.max_abs_slope()) * budget.dt / 2.0;
                (s, margin)
            })
            .collect();
        let (order, split) = time_order(budget, prop.domain);
        Ok(Ok(Sweep {
            f,
            prop,
            budget,
            family,
            order,
            split,
        }))
    }

    /// First violating reparametrization for the pair, if any.
    fn examine(&self, x: &Point, y: &Point) -> Result<Option<Witness>> {
        let budget = self.budget;
        let d0 = self.f.space().distance(x, y)?;
        if d0 == 0.0 || x == y {
            return Ok(None);
        }
        let mut walkers = Walkers::new(self.f, self.prop.closeness, x, y, budget.dt);
        let mut conclusion: Option<(bool, String)> = None;
        let (coarse, fine) = self.order.split_at(self.split);
        for (s, margin) in &self.family {
            let threshold = budget.delta - margin;
            if d0 >= threshold {
                continue;
            }
            let mut sup: f64 = 0.0;
            if scan(&mut walkers, s, coarse, budget.dt, threshold, &mut sup)? {
                continue;
            }
            if conclusion.is_none() {
                conclusion = Some(conclusion_holds(self.f, self.prop, budget, x, y)?);
            }
            if conclusion.as_ref().is_some_and(|c| c.0) {
                return Ok(None);
            }
            if scan(&mut walkers, s, fine, budget.dt, threshold, &mut sup)? {
                continue;
            }
            let detail = conclusion.take().map(|c| c.1).unwrap_or_default();
            return Ok(Some(Witness {
                system: self.f.name().to_string(),
                property: self.prop.name.clone(),
                speed: None,
                inverse: false,
                x: x.clone(),
                y: y.clone(),
                reparam: s.clone(),
                budget: budget.clone(),
                sup,
                margin: *margin,
                conclusion: detail,
            }));
        }
        Ok(None)
    }
}

/// Runs `f(i)` for each row index, in parallel when enabled, keeping results
/// in index order.
pub(super) fn map_rows<R: Send>(
    rows: std::ops::Range<usize>,
    f: impl Fn(usize) -> R + Sync + Send,
) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        rows.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        rows.map(f).collect()
    }
}

/// Semidecides `prop` for `f` within `budget`.
///
/// Pairs are the unordered (or, when the property is not symmetric, ordered)
/// pairs of distinct grid points, followed by each grid point against its
/// near neighbours. For every pair the reparametrizations are tried in family
/// order; a pair counts as δ-close when the grid supremum plus the Lipschitz
/// margin stays below δ. The first violation in (pair, reparametrization)
/// order is returned, independent of thread count.
pub fn verdict(f: &FlowSystem, prop: &PropertyDescriptor, budget: &Budget) -> Result<Verdict> {
    let sweep = match Sweep::new(f, prop, budget)? {
        Ok(s) => s,
        Err(reason) => return Ok(Verdict::Inconclusive { reason }),
    };
    let space = f.space();
    let grid = space.grid(budget.grid);
    let symmetric =
        prop.class == crate::reparam::ReparamClass::Identity && prop.closeness == Closeness::Single;
    let near_radius = 0.5 * (budget.delta - f.speed_bound() * budget.dt);
    let near: Vec<Vec<Point>> = if budget.near {
        grid.iter().map(|x| space.near(x, near_radius)).collect()
    } else {
        vec![Vec::new(); grid.len()]
    };

    let n = grid.len();
    // rows 0..n pair grid[i] with later (or all other) grid points,
    // rows n..2n pair grid[i - n] with its near neighbours
    let row_pairs = |row: usize| -> u64 {
        if row < n {
            if symmetric {
                (n - row - 1) as u64
            } else {
                (n - 1) as u64
            }
        } else {
            let k = near[row - n].len() as u64;
            if symmetric {
                k
            } else {
                2 * k
            }
        }
    };
    let run_row = |row: usize| -> Result<Option<Witness>> {
        if row < n {
            let x = &grid[row];
            let start = if symmetric { row + 1 } else { 0 };
            for (j, y) in grid.iter().enumerate().skip(start) {
                if j == row {
                    continue;
                }
                if let Some(w) = sweep.examine(x, y)? {
                    return Ok(Some(w));
                }
            }
        } else {
            let x = &grid[row - n];
            for y in &near[row - n] {
                if let Some(w) = sweep.examine(x, y)? {
                    return Ok(Some(w));
                }
                if !symmetric {
                    if let Some(w) = sweep.examine(y, x)? {
                        return Ok(Some(w));
                    }
                }
            }
        }
        Ok(None)
    };

    let total_rows = 2 * n;
    let mut pairs = 0u64;
    let mut start = 0;
    while start < total_rows {
        let end = (start + CHUNK_ROWS).min(total_rows);
        let results = map_rows(start..end, run_row);
        for (offset, r) in results.into_iter().enumerate() {
            pairs += row_pairs(start + offset);
            if let Some(w) = r? {
                return Ok(Verdict::violated(w));
            }
        }
        start = end;
    }
    Ok(Verdict::ConsistentUpTo {
        budget: budget.clone(),
        pairs,
    })
}
