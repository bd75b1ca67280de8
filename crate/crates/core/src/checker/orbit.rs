//! Orbit-level numerics: orbit membership, `d_φ`, fixed points, the
//! equilibrium gap ξ and return times.

use crate::error::Result;
use crate::space::Point;
use crate::systems::{FlowSystem, Trajectory};

use super::Budget;

/// Minimises `g` on `[a, b]` by golden-section search down to width `tol`.
fn golden_min(
    mut a: f64,
    mut b: f64,
    tol: f64,
    g: &mut impl FnMut(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    const R: f64 = 0.618_033_988_749_895;
    let mut c = b - R * (b - a);
    let mut d = a + R * (b - a);
    let (mut gc, mut gd) = (g(c)?, g(d)?);
    while b - a > tol {
        if gc <= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - R * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + R * (b - a);
            gd = g(d)?;
        }
    }
    Ok(if gc <= gd { (c, gc) } else { (d, gd) })
}

fn refine_tol(f: &FlowSystem, h: f64, eta: f64) -> f64 {
    (h / 100.0).min(eta / (4.0 * f.speed_bound()))
}

/// Smallest-`|τ|` time in `[-window, window]` with `d(φ_τ x, y) < eta`,
/// scanning with step `h` and refining each candidate by golden section.
pub fn same_orbit(
    f: &FlowSystem,
    x: &Point,
    y: &Point,
    window: f64,
    eta: f64,
    h: f64,
) -> Result<Option<f64>> {
    let space = f.space();
    if space.distance(x, y)? < eta {
        return Ok(Some(0.0));
    }
    let slack = eta + f.speed_bound() * h / 2.0;
    let tol = refine_tol(f, h, eta);
    let mut traj = Trajectory::new(f, x.clone(), h);
    let steps = (window / h).floor() as i64;
    for k in 1..=steps {
        for tau in [k as f64 * h, -(k as f64) * h] {
            let p = traj.at(tau)?;
            if space.distance(&p, y)? < slack {
                let mut g = |t: f64| -> Result<f64> { space.distance(&traj.at(t)?, y) };
                let (lo, hi) = ((tau - h).max(-window), (tau + h).min(window));
                let (t, gt) = golden_min(lo, hi, tol, &mut g)?;
                if gt < eta {
                    return Ok(Some(t));
                }
            }
        }
    }
    Ok(None)
}

/// Every `τ` in `[-window, window]` with `d(φ_τ x, y) < eta`, increasing,
/// one per root.
pub fn orbit_roots(
    f: &FlowSystem,
    x: &Point,
    y: &Point,
    window: f64,
    eta: f64,
    h: f64,
) -> Result<Vec<f64>> {
    let space = f.space();
    let slack = eta + f.speed_bound() * h / 2.0;
    let tol = refine_tol(f, h, eta);
    let mut traj = Trajectory::new(f, x.clone(), h);
    let steps = (window / h).floor() as i64;
    let mut roots: Vec<f64> = Vec::new();
    for k in -steps..=steps {
        let tau = k as f64 * h;
        if space.distance(&traj.at(tau)?, y)? >= slack {
            continue;
        }
        let mut g = |t: f64| -> Result<f64> { space.distance(&traj.at(t)?, y) };
        let (lo, hi) = ((tau - h).max(-window), (tau + h).min(window));
        let (t, gt) = golden_min(lo, hi, tol, &mut g)?;
        if gt < eta && roots.last().is_none_or(|&r| t - r > h) {
            roots.push(t);
        }
    }
    Ok(roots)
}

fn window_of(f: &FlowSystem, budget: &Budget) -> f64 {
    budget.window.or(f.window_hint()).unwrap_or(budget.horizon)
}

/// Diameter of `{φ_t(x) : a <= t <= b}` sampled at no more than 400 steps.
fn segment_diameter(f: &FlowSystem, x: &Point, a: f64, b: f64, dt: f64) -> Result<f64> {
    let n = ((b - a) / dt).ceil().clamp(1.0, 400.0) as usize;
    let pts = (0..=n)
        .map(|i| f.evolve(a + (b - a) * i as f64 / n as f64, x))
        .collect::<Result<Vec<_>>>()?;
    let mut diam: f64 = 0.0;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            diam = diam.max(f.space().distance(p, q)?);
        }
    }
    Ok(diam)
}

/// Orbit pseudo-distance: the smallest diameter of an orbit segment through
/// both points, or the diameter of the space when no common orbit is found
/// within the search window.
pub fn d_phi(f: &FlowSystem, x: &Point, y: &Point, budget: &Budget) -> Result<f64> {
    if f.space().distance(x, y)? == 0.0 {
        return Ok(0.0);
    }
    let w = window_of(f, budget);
    let roots = orbit_roots(f, x, y, w, budget.eta, budget.dt)?;
    if roots.is_empty() {
        return Ok(f.space().diameter());
    }
    let mut best = f.space().diameter();
    for tau in roots {
        let (a, b) = if tau < 0.0 { (tau, 0.0) } else { (0.0, tau) };
        best = best.min(segment_diameter(f, x, a, b, budget.dt)?);
    }
    Ok(best)
}

/// Largest displacement `d(φ_t x, x)` over probe times `dt, 2dt, ..., probe`,
/// stopping early once it reaches `stop`.
fn probe_displacement(f: &FlowSystem, x: &Point, budget: &Budget, stop: f64) -> Result<f64> {
    let mut traj = Trajectory::new(f, x.clone(), budget.dt);
    let n = (budget.probe / budget.dt).round().max(1.0) as i64;
    let mut worst: f64 = 0.0;
    for k in 1..=n {
        worst = worst.max(f.space().distance(&traj.at(k as f64 * budget.dt)?, x)?);
        if worst >= stop {
            break;
        }
    }
    Ok(worst)
}

/// Grid points that move less than η over the probe times, grouped into
/// clusters of radius `0.05 · diam`; one representative per cluster.
pub fn fixed_points(f: &FlowSystem, budget: &Budget) -> Result<Vec<Point>> {
    let space = f.space();
    let radius = 0.05 * space.diameter();
    let mut reps: Vec<Point> = Vec::new();
    for x in space.grid(budget.grid) {
        if probe_displacement(f, &x, budget, budget.eta)? >= budget.eta {
            continue;
        }
        let mut joined = false;
        for r in &reps {
            if space.distance(r, &x)? < radius {
                joined = true;
                break;
            }
        }
        if !joined {
            reps.push(x);
        }
    }
    Ok(reps)
}

fn is_fixed(f: &FlowSystem, x: &Point, budget: &Budget) -> Result<bool> {
    if let Some(hint) = f.fixed_hint() {
        for p in hint {
            if f.space().distance(p, x)? < 1e-12 {
                return Ok(true);
            }
        }
        return Ok(false);
    }
    Ok(probe_displacement(f, x, budget, budget.eta)? < budget.eta)
}

/// Empirical `ξ = inf d(φ_T x, x)` over the non-fixed members of `points`;
/// `None` when every point is fixed.
pub fn equilm_xi(f: &FlowSystem, t: f64, points: &[Point], budget: &Budget) -> Result<Option<f64>> {
    let mut xi: Option<f64> = None;
    for x in points {
        if is_fixed(f, x, budget)? {
            continue;
        }
        let d = f.space().distance(&f.evolve(t, x)?, x)?;
        xi = Some(xi.map_or(d, |v| v.min(d)));
    }
    Ok(xi)
}

/// Smallest return time over the non-fixed grid points, scanning
/// `(0, horizon]`; `None` when no grid point returns within the horizon.
pub fn min_period(f: &FlowSystem, budget: &Budget) -> Result<Option<f64>> {
    let space = f.space();
    let h = budget.dt;
    let slack = budget.eta + f.speed_bound() * h / 2.0;
    let leave = 4.0 * slack;
    let tol = refine_tol(f, h, budget.eta);
    let mut best: Option<f64> = None;
    for x in space.grid(budget.grid) {
        if is_fixed(f, &x, budget)? {
            continue;
        }
        let limit = best.unwrap_or(budget.horizon);
        let mut traj = Trajectory::new(f, x.clone(), h);
        let mut left = false;
        let steps = (limit / h).floor() as i64;
        for k in 1..=steps {
            let t = k as f64 * h;
            let d = space.distance(&traj.at(t)?, &x)?;
            if !left {
                left = d > leave;
                continue;
            }
            if d < slack {
                let mut g = |s: f64| -> Result<f64> { space.distance(&traj.at(s)?, &x) };
                let (s, gs) = golden_min(t - h, t + h, tol, &mut g)?;
                if gs < budget.eta {
                    best = Some(best.map_or(s, |b: f64| b.min(s)));
                    break;
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{PI, TAU};

    use super::*;
    use crate::systems::{annulus_phi, annulus_psi, torus_fake_saddle, torus_irrational};

    fn budget() -> Budget {
        Budget {
            dt: 0.005,
            horizon: 10.0,
            grid: 6,
            ..Budget::default()
        }
    }

    #[test]
    fn same_orbit_examples() {
        let f = annulus_phi();
        let x = Point::annulus(1.0, 0.0);
        assert_eq!(same_orbit(&f, &x, &x, 1.0, 1e-4, 0.01).unwrap(), Some(0.0));
        let y = f.evolve(0.3, &x).unwrap();
        let tau = same_orbit(&f, &x, &y, 4.0 * PI, 1e-4, 0.01)
            .unwrap()
            .unwrap();
        assert!((tau - 0.3).abs() < 1e-4, "{tau}");
        let z = Point::annulus(2.0, 0.0);
        assert_eq!(same_orbit(&f, &x, &z, 4.0 * PI, 1e-4, 0.01).unwrap(), None);
        let back = f.evolve(-1.1, &x).unwrap();
        let tau = same_orbit(&f, &x, &back, 4.0 * PI, 1e-4, 0.01)
            .unwrap()
            .unwrap();
        assert!((tau + 1.1).abs() < 1e-4);
    }

    #[test]
    fn roots_include_every_period() {
        let f = annulus_psi();
        let x = Point::annulus(1.5, 0.0);
        let y = f.evolve(1.0, &x).unwrap();
        let roots = orbit_roots(&f, &x, &y, 8.0, 1e-4, 0.01).unwrap();
        assert_eq!(roots.len(), 3);
        for (r, expected) in roots.iter().zip([1.0 - TAU, 1.0, 1.0 + TAU]) {
            assert!((r - expected).abs() < 1e-4);
        }
    }

    #[test]
    fn d_phi_examples() {
        let f = annulus_phi();
        let b = Budget {
            dt: 0.001,
            ..budget()
        };
        let x = Point::annulus(1.0, 0.0);
        assert_eq!(d_phi(&f, &x, &x, &b).unwrap(), 0.0);
        assert_eq!(d_phi(&f, &x, &Point::annulus(1.5, 0.0), &b).unwrap(), 4.0);
        let y = f.evolve(0.2, &x).unwrap();
        let d = d_phi(&f, &x, &y, &b).unwrap();
        assert!((d - 2.0 * (0.1f64).sin()).abs() < 1e-3, "{d}");
    }

    #[test]
    fn fixed_point_examples() {
        assert!(fixed_points(&annulus_phi(), &budget()).unwrap().is_empty());
        let b = Budget {
            grid: 10,
            ..budget()
        };
        let fix = fixed_points(&torus_fake_saddle(), &b).unwrap();
        assert_eq!(fix, vec![Point::torus(0.5, 0.5)]);
    }

    #[test]
    fn xi_on_annulus() {
        let f = annulus_phi();
        let pts = f.space().grid(11);
        let xi = equilm_xi(&f, 0.1, &pts, &budget()).unwrap().unwrap();
        // chord of an arc of length 0.1 is shortest on the inner circle
        assert!((xi - 2.0 * (0.05f64).sin()).abs() < 1e-12);
        let fixed_only = [Point::torus(0.5, 0.5)];
        assert_eq!(
            equilm_xi(&torus_fake_saddle(), 1.0, &fixed_only, &budget()).unwrap(),
            None
        );
    }

    #[test]
    fn min_period_examples() {
        let b = Budget {
            horizon: 8.0,
            dt: 0.01,
            grid: 3,
            ..Budget::default()
        };
        let p = min_period(&annulus_phi(), &b).unwrap().unwrap();
        assert!((p - TAU).abs() < 1e-3, "{p}");
        let p = min_period(&annulus_psi(), &b).unwrap().unwrap();
        assert!((p - TAU).abs() < 1e-3, "{p}");
        assert_eq!(min_period(&torus_irrational(), &b).unwrap(), None);
    }
}
