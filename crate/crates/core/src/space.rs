//! Compact metric spaces: points, distances, diameters, deterministic grids.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the extended plane `R^2 ∪ {∞}` restricted to the lattice-like
/// set used by the discrete catalog map: `(p, 0)` or `(p, ±1/|q|)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExtPoint {
    Infinity,
    /// `(p, 1/q)` for `q > 0`, `(p, -1/|q|)` for `q < 0`, `(p, 0)` for `q = 0`.
    Finite {
        p: i64,
        q: i64,
    },
}

impl ExtPoint {
    pub fn new(p: i64, q: i64) -> Self {
        ExtPoint::Finite { p, q }
    }

    /// Planar coordinates, or `None` at infinity.
    pub fn coords(&self) -> Option<(f64, f64)> {
        match *self {
            ExtPoint::Infinity => None,
            ExtPoint::Finite { p, q } => {
                let r = if q == 0 { 0.0 } else { 1.0 / q as f64 };
                Some((p as f64, r))
            }
        }
    }
}

/// How a bi-infinite sequence continues outside its stored window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Extension {
    /// The window repeats with period equal to its length.
    Periodic,
    /// The outermost bits repeat forever on each side.
    Constant,
}

/// A bi-infinite 0/1 sequence `x`, stored as a window `w_0 .. w_{L-1}` with
/// `L = 2N + 1`, an extension rule and an index offset:
/// `x_n = b(n + offset)` where `b(m) = w_{m+N}` for `|m| <= N`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BiSeq {
    pub word: u64,
    pub len: u32,
    pub offset: i64,
    pub ext: Extension,
}

/// Terms beyond this index contribute less than `2^-59` to a distance.
const SEQ_TAIL: i64 = 60;

impl BiSeq {
    pub fn new(word: u64, half_width: u32, ext: Extension) -> Result<Self> {
        let len = 2 * half_width + 1;
        if len > 63 {
            return Err(Error::Argument(format!(
                "sequence window 2N+1 = {len} exceeds 63 bits"
            )));
        }
        Ok(BiSeq {
            word: word & ((1u64 << len) - 1),
            len,
            offset: 0,
            ext,
        })
    }

    pub fn half_width(&self) -> i64 {
        (self.len as i64 - 1) / 2
    }

    /// Builds the sequence whose central window is `bits[0..]` read as
    /// `x_{-N}, ..., x_N`.
    pub fn from_bits(bits: &[u8], ext: Extension) -> Result<Self> {
        if bits.len().is_multiple_of(2) || bits.len() > 63 {
            return Err(Error::Argument(format!(
                "window length {} must be odd and at most 63",
                bits.len()
            )));
        }
        let word = bits
            .iter()
            .enumerate()
            .fold(0u64, |w, (i, &b)| w | (u64::from(b & 1) << i));
        BiSeq::new(word, (bits.len() as u32 - 1) / 2, ext)
    }

    fn window_bit(&self, i: i64) -> u8 {
        ((self.word >> i) & 1) as u8
    }

    /// The `n`-th term of the sequence.
    pub fn bit(&self, n: i64) -> u8 {
        let len = self.len as i64;
        let i = n + self.offset + self.half_width();
        match self.ext {
            Extension::Periodic => self.window_bit(i.rem_euclid(len)),
            Extension::Constant => self.window_bit(i.clamp(0, len - 1)),
        }
    }

    /// `σ^k`: the sequence `n -> x_{n+k}`.
    pub fn shifted(&self, k: i64) -> Self {
        BiSeq {
            offset: self.offset + k,
            ..*self
        }
    }

    /// Same sequence, but with the window re-centred so that `offset` lies in
    /// `[0, len)` for periodic sequences.
    pub fn normalized(&self) -> Self {
        match self.ext {
            Extension::Periodic => BiSeq {
                offset: self.offset.rem_euclid(self.len as i64),
                ..*self
            },
            Extension::Constant => *self,
        }
    }

    fn tail_period(&self) -> i64 {
        match self.ext {
            Extension::Periodic => self.len as i64,
            Extension::Constant => 1,
        }
    }

    /// Indices `n` whose value is read from inside the stored window.
    fn window_range(&self) -> (i64, i64) {
        let lo = -self.offset - self.half_width();
        (lo, lo + self.len as i64 - 1)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl PartialEq for BiSeq {
    fn eq(&self, other: &Self) -> bool {
        // Outside both windows each sequence repeats with its tail period, so
        // agreement on the union of windows padded by lcm(periods) suffices.
        let (p, q) = (self.tail_period(), other.tail_period());
        let lcm = p / gcd(p, q) * q;
        let (a0, a1) = self.window_range();
        let (b0, b1) = other.window_range();
        (a0.min(b0) - lcm..=a1.max(b1) + lcm).all(|n| self.bit(n) == other.bit(n))
    }
}

impl fmt::Display for BiSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.half_width();
        let bits: String = (-n..=n)
            .map(|k| if self.bit(k) == 1 { '1' } else { '0' })
            .collect();
        let ext = match self.ext {
            Extension::Periodic => "per",
            Extension::Constant => "const",
        };
        write!(f, "{bits}/{ext}")
    }
}

/// A point of any space in the catalog.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Point {
    Torus { u: f64, v: f64 },
    Annulus { x1: f64, x2: f64 },
    ExtPlane(ExtPoint),
    BiSeq(BiSeq),
    Suspension { base: Box<Point>, height: f64 },
}

impl Point {
    pub fn torus(u: f64, v: f64) -> Self {
        Point::Torus {
            u: u.rem_euclid(1.0),
            v: v.rem_euclid(1.0),
        }
    }

    pub fn annulus(x1: f64, x2: f64) -> Self {
        Point::Annulus { x1, x2 }
    }

    pub fn annulus_polar(radius: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Point::Annulus {
            x1: radius * c,
            x2: radius * s,
        }
    }

    pub fn ext(p: i64, q: i64) -> Self {
        Point::ExtPlane(ExtPoint::new(p, q))
    }

    pub fn suspension(base: Point, height: f64) -> Self {
        Point::Suspension {
            base: Box::new(base),
            height,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Point::Torus { .. } => "torus",
            Point::Annulus { .. } => "annulus",
            Point::ExtPlane(_) => "ext-plane",
            Point::BiSeq(_) => "bi-sequence",
            Point::Suspension { .. } => "suspension",
        }
    }

    /// Base point and height of a suspension point.
    pub fn as_suspension(&self) -> Option<(&Point, f64)> {
        match self {
            Point::Suspension { base, height } => Some((base, *height)),
            _ => None,
        }
    }

    /// Compact text form, parsed back by [`Point::parse`].
    pub fn encode(&self) -> String {
        match self {
            Point::Torus { u, v } => format!("torus({u:?},{v:?})"),
            Point::Annulus { x1, x2 } => format!("annulus({x1:?},{x2:?})"),
            Point::ExtPlane(ExtPoint::Infinity) => "ext(inf)".into(),
            Point::ExtPlane(ExtPoint::Finite { p, q }) => format!("ext({p},{q})"),
            Point::BiSeq(s) => format!(
                "seq({},{},{},{})",
                s.word,
                s.len,
                s.offset,
                match s.ext {
                    Extension::Periodic => "per",
                    Extension::Constant => "const",
                }
            ),
            Point::Suspension { base, height } => format!("sus({};{height:?})", base.encode()),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Parse(s.to_string());
        let s = s.trim();
        let open = s.find('(').ok_or_else(bad)?;
        if !s.ends_with(')') {
            return Err(bad());
        }
        let (head, body) = (&s[..open], &s[open + 1..s.len() - 1]);
        let floats = |body: &str| -> Result<Vec<f64>> {
            body.split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
                .collect()
        };
        match head {
            "torus" | "annulus" => {
                let v = floats(body)?;
                if v.len() != 2 {
                    return Err(bad());
                }
                Ok(if head == "torus" {
                    Point::Torus { u: v[0], v: v[1] }
                } else {
                    Point::Annulus { x1: v[0], x2: v[1] }
                })
            }
            "ext" if body == "inf" => Ok(Point::ExtPlane(ExtPoint::Infinity)),
            "ext" => {
                let (p, q) = body.split_once(',').ok_or_else(bad)?;
                Ok(Point::ext(
                    p.trim().parse().map_err(|_| bad())?,
                    q.trim().parse().map_err(|_| bad())?,
                ))
            }
            "seq" => {
                let parts: Vec<&str> = body.split(',').map(str::trim).collect();
                if parts.len() != 4 {
                    return Err(bad());
                }
                let len: u32 = parts[1].parse().map_err(|_| bad())?;
                if len.is_multiple_of(2) || len > 63 {
                    return Err(bad());
                }
                let mut seq = BiSeq::new(
                    parts[0].parse().map_err(|_| bad())?,
                    (len - 1) / 2,
                    match parts[3] {
                        "per" => Extension::Periodic,
                        "const" => Extension::Constant,
                        _ => return Err(bad()),
                    },
                )?;
                seq.offset = parts[2].parse().map_err(|_| bad())?;
                Ok(Point::BiSeq(seq))
            }
            "sus" => {
                let (base, h) = body.rsplit_once(';').ok_or_else(bad)?;
                Ok(Point::suspension(
                    Point::parse(base)?,
                    h.trim().parse().map_err(|_| bad())?,
                ))
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Torus { u, v } => write!(f, "({u:.6}, {v:.6})"),
            Point::Annulus { x1, x2 } => write!(f, "({x1:.6}, {x2:.6})"),
            Point::ExtPlane(ExtPoint::Infinity) => f.write_str("∞"),
            Point::ExtPlane(ExtPoint::Finite { p, q: 0 }) => write!(f, "({p}, 0)"),
            Point::ExtPlane(ExtPoint::Finite { p, q }) if *q > 0 => write!(f, "({p}, 1/{q})"),
            Point::ExtPlane(ExtPoint::Finite { p, q }) => write!(f, "({p}, -1/{})", -q),
            Point::BiSeq(s) => write!(f, "{s}"),
            Point::Suspension { base, height } => write!(f, "[{base} @ {height:.6}]"),
        }
    }
}

/// A compact metric space with deterministic sampling.
pub trait Metric: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    /// Distance between two points of this space.
    fn distance(&self, p: &Point, q: &Point) -> Result<f64>;

    fn diameter(&self) -> f64;

    /// Deterministic finite sample whose size grows with `resolution`.
    fn grid(&self, resolution: usize) -> Vec<Point>;

    /// A few points at distance about `radius` from `p`, used to probe pairs
    /// closer than any grid spacing. Empty when the space has no such notion.
    fn near(&self, _p: &Point, _radius: f64) -> Vec<Point> {
        Vec::new()
    }

    /// `count` random points.
    fn sample(&self, rng: &mut dyn RngCore, count: usize) -> Vec<Point>;

    fn contains(&self, p: &Point) -> bool;
}

/// A named, shareable handle to a metric space.
#[derive(Clone, Debug)]
pub struct SpaceDescriptor {
    metric: Arc<dyn Metric>,
}

impl SpaceDescriptor {
    pub fn new(metric: impl Metric + 'static) -> Self {
        SpaceDescriptor {
            metric: Arc::new(metric),
        }
    }

    pub fn from_arc(metric: Arc<dyn Metric>) -> Self {
        SpaceDescriptor { metric }
    }

    pub fn torus() -> Self {
        Self::new(TorusSpace)
    }

    pub fn annulus() -> Self {
        Self::new(AnnulusSpace)
    }

    pub fn ext_plane() -> Self {
        Self::new(ExtPlaneSpace)
    }

    pub fn shift(half_width: u32) -> Self {
        Self::new(ShiftSpace { half_width })
    }

    pub fn name(&self) -> String {
        self.metric.name()
    }

    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.metric.distance(p, q)
    }

    pub fn diameter(&self) -> f64 {
        self.metric.diameter()
    }

    pub fn grid(&self, resolution: usize) -> Vec<Point> {
        self.metric.grid(resolution)
    }

    pub fn near(&self, p: &Point, radius: f64) -> Vec<Point> {
        self.metric.near(p, radius)
    }

    pub fn sample(&self, rng: &mut dyn RngCore, count: usize) -> Vec<Point> {
        self.metric.sample(rng, count)
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.metric.contains(p)
    }

    pub fn metric(&self) -> &Arc<dyn Metric> {
        &self.metric
    }
}

fn mismatch(space: &dyn Metric, p: &Point) -> Error {
    Error::VariantMismatch {
        space: space.name(),
        found: p.kind().to_string(),
    }
}

/// The flat torus `R^2 / Z^2`.
#[derive(Clone, Copy, Debug, Default)]
pub struct TorusSpace;

fn wrap_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

impl Metric for TorusSpace {
    fn name(&self) -> String {
        "torus".into()
    }

    fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        match (p, q) {
            (Point::Torus { u: a, v: b }, Point::Torus { u: c, v: d }) => {
                Ok(wrap_gap(*a, *c).hypot(wrap_gap(*b, *d)))
            }
            (Point::Torus { .. }, other) | (other, _) => Err(mismatch(self, other)),
        }
    }

    fn diameter(&self) -> f64 {
        std::f64::consts::FRAC_1_SQRT_2
    }

    fn grid(&self, n: usize) -> Vec<Point> {
        let n = n.max(1);
        let step = 1.0 / n as f64;
        (0..n)
            .flat_map(|i| {
                (0..n).map(move |j| Point::Torus {
                    u: i as f64 * step,
                    v: j as f64 * step,
                })
            })
            .collect()
    }

    fn near(&self, p: &Point, r: f64) -> Vec<Point> {
        match p {
            Point::Torus { u, v } => vec![
                Point::torus(u + r, *v),
                Point::torus(u - r, *v),
                Point::torus(*u, v + r),
                Point::torus(*u, v - r),
            ],
            _ => Vec::new(),
        }
    }

    fn sample(&self, rng: &mut dyn RngCore, count: usize) -> Vec<Point> {
        (0..count)
            .map(|_| Point::Torus {
                u: rng.gen(),
                v: rng.gen(),
            })
            .collect()
    }

    fn contains(&self, p: &Point) -> bool {
        matches!(p, Point::Torus { u, v } if (0.0..1.0).contains(u) && (0.0..1.0).contains(v))
    }
}

/// The closed annulus `1 <= |x| <= 2` with the Euclidean metric.
#[derive(Clone, Copy, Debug, Default)]
pub struct AnnulusSpace;

impl AnnulusSpace {
    pub const INNER: f64 = 1.0;
    pub const OUTER: f64 = 2.0;
}

impl Metric for AnnulusSpace {
    fn name(&self) -> String {
        "annulus".into()
    }

    fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        match (p, q) {
            (Point::Annulus { x1: a, x2: b }, Point::Annulus { x1: c, x2: d }) => {
                Ok((a - c).hypot(b - d))
            }
            (Point::Annulus { .. }, other) | (other, _) => Err(mismatch(self, other)),
        }
    }

    fn diameter(&self) -> f64 {
        2.0 * Self::OUTER
    }

    /// `n` radii evenly spaced over `[1, 2]` times `max(8, n)` angles,
    /// radius-major.
    fn grid(&self, n: usize) -> Vec<Point> {
        let n = n.max(2);
        let m = n.max(8);
        let span = Self::OUTER - Self::INNER;
        (0..n)
            .flat_map(|i| {
                let r = Self::INNER + span * i as f64 / (n - 1) as f64;
                (0..m).map(move |j| {
                    Point::annulus_polar(r, std::f64::consts::TAU * j as f64 / m as f64)
                })
            })
            .collect()
    }

    fn near(&self, p: &Point, r: f64) -> Vec<Point> {
        let Point::Annulus { x1, x2 } = *p else {
            return Vec::new();
        };
        let rho = x1.hypot(x2);
        let theta = x2.atan2(x1);
        let mut out = Vec::with_capacity(4);
        for dr in [r, -r] {
            let rr = rho + dr;
            if (Self::INNER..=Self::OUTER).contains(&rr) {
                out.push(Point::annulus_polar(rr, theta));
            }
        }
        // a tangential step whose chord is exactly r
        let dtheta = 2.0 * (r / (2.0 * rho)).min(1.0).asin();
        out.push(Point::annulus_polar(rho, theta + dtheta));
        out.push(Point::annulus_polar(rho, theta - dtheta));
        out
    }

    fn sample(&self, rng: &mut dyn RngCore, count: usize) -> Vec<Point> {
        (0..count)
            .map(|_| {
                let r = rng.gen_range(Self::INNER..=Self::OUTER);
                Point::annulus_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
            })
            .collect()
    }

    fn contains(&self, p: &Point) -> bool {
        matches!(p, Point::Annulus { x1, x2 }
            if (Self::INNER - 1e-12..=Self::OUTER + 1e-12).contains(&x1.hypot(*x2)))
    }
}

/// `{∞} ∪ {(p, 0)} ∪ {(p, ±1/q) : |p| <= q}` on the sphere, with the chordal
/// metric `2|u - v| / sqrt((1 + |u|²)(1 + |v|²))`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExtPlaneSpace;

/// Chordal distance between two points of the extended plane.
pub fn chordal(a: &ExtPoint, b: &ExtPoint) -> f64 {
    match (a.coords(), b.coords()) {
        (None, None) => 0.0,
        (Some((x, y)), None) | (None, Some((x, y))) => 2.0 / (1.0 + x * x + y * y).sqrt(),
        (Some((x, y)), Some((z, w))) => {
            let num = 2.0 * (x - z).hypot(y - w);
            num / ((1.0 + x * x + y * y) * (1.0 + z * z + w * w)).sqrt()
        }
    }
}

/// `0, 1, -1, 2, -2, ...` restricted to `|p| <= bound`.
fn center_out(bound: i64) -> impl Iterator<Item = i64> {
    std::iter::once(0).chain((1..=bound).flat_map(|p| [p, -p]))
}

impl Metric for ExtPlaneSpace {
    fn name(&self) -> String {
        "ext-plane".into()
    }

    fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        match (p, q) {
            (Point::ExtPlane(a), Point::ExtPlane(b)) => Ok(chordal(a, b)),
            (Point::ExtPlane(_), other) | (other, _) => Err(mismatch(self, other)),
        }
    }

    fn diameter(&self) -> f64 {
        2.0
    }

    /// `∞`, the axis points `|p| <= n`, then every `(p, ±1/q)` with
    /// `q <= n`, in that order.
    fn grid(&self, n: usize) -> Vec<Point> {
        let n = n.max(1) as i64;
        let mut out = vec![Point::ExtPlane(ExtPoint::Infinity)];
        out.extend(center_out(n).map(|p| Point::ext(p, 0)));
        for q in 1..=n {
            for p in center_out(q) {
                out.push(Point::ext(p, q));
                out.push(Point::ext(p, -q));
            }
        }
        out
    }

    fn sample(&self, rng: &mut dyn RngCore, count: usize) -> Vec<Point> {
        (0..count)
            .map(|_| {
                let q: i64 = rng.gen_range(1..=64);
                let p = rng.gen_range(-q..=q);
                match rng.gen_range(0..8) {
                    0 => Point::ext(rng.gen_range(-64..=64), 0),
                    1..=3 => Point::ext(p, -q),
                    _ => Point::ext(p, q),
                }
            })
            .collect()
    }

    fn contains(&self, p: &Point) -> bool {
        match p {
            Point::ExtPlane(ExtPoint::Infinity) => true,
            Point::ExtPlane(ExtPoint::Finite { p, q }) => *q == 0 || p.abs() <= q.abs(),
            _ => false,
        }
    }
}

/// Bi-infinite binary sequences with `d(x, y) = Σ_n |x_n - y_n| 2^{-|n|}`.
#[derive(Clone, Copy, Debug)]
pub struct ShiftSpace {
    /// Window half-width `N` of generated points.
    pub half_width: u32,
}

impl Default for ShiftSpace {
    fn default() -> Self {
        ShiftSpace { half_width: 5 }
    }
}

pub fn seq_distance(a: &BiSeq, b: &BiSeq) -> f64 {
    (-SEQ_TAIL..=SEQ_TAIL)
        .filter(|&n| a.bit(n) != b.bit(n))
        .map(|n| (-(n.abs() as f64)).exp2())
        .sum()
}

impl Metric for ShiftSpace {
    fn name(&self) -> String {
        format!("shift(N={})", self.half_width)
    }

    fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        match (p, q) {
            (Point::BiSeq(a), Point::BiSeq(b)) => Ok(seq_distance(a, b)),
            (Point::BiSeq(_), other) | (other, _) => Err(mismatch(self, other)),
        }
    }

    fn diameter(&self) -> f64 {
        3.0
    }

    /// Periodic sequences with words `i * stride mod 2^L`, `stride` odd, so
    /// that small resolutions still spread over the whole word space.
    fn grid(&self, n: usize) -> Vec<Point> {
        let len = 2 * self.half_width + 1;
        let modulus = 1u128 << len;
        let n = (n.max(1) as u128).min(modulus);
        let stride = (modulus / n) | 1;
        (0..n)
            .map(|i| {
                let word = ((i * stride) % modulus) as u64;
                Point::BiSeq(BiSeq::new(word, self.half_width, Extension::Periodic).unwrap())
            })
            .collect()
    }

    /// Single-bit flips of the stored word that land within `r`.
    fn near(&self, p: &Point, r: f64) -> Vec<Point> {
        let Point::BiSeq(s) = p else {
            return Vec::new();
        };
        (0..s.len)
            .map(|bit| BiSeq {
                word: s.word ^ (1 << bit),
                ..*s
            })
            .filter(|t| seq_distance(s, t) <= r)
            .map(Point::BiSeq)
            .collect()
    }

    fn sample(&self, rng: &mut dyn RngCore, count: usize) -> Vec<Point> {
        (0..count)
            .map(|_| {
                Point::BiSeq(
                    BiSeq::new(rng.next_u64(), self.half_width, Extension::Periodic).unwrap(),
                )
            })
            .collect()
    }

    fn contains(&self, p: &Point) -> bool {
        matches!(p, Point::BiSeq(s) if s.len % 2 == 1 && s.len <= 63)
    }
}

/// Per-point result of [`isolated_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct IsolationReport {
    pub isolated: Vec<bool>,
    /// Distance from each point to its nearest distinct grid point.
    pub nearest: Vec<f64>,
    /// True when every point is isolated, i.e. the finite set is open at this
    /// resolution.
    pub open: bool,
}

/// Flags a member of `set` as isolated when no grid point other than itself
/// lies within `radius`. An empty set is open.
pub fn isolated_check(
    space: &SpaceDescriptor,
    set: &[Point],
    resolution: usize,
    radius: f64,
) -> Result<IsolationReport> {
    let grid = space.grid(resolution);
    let mut isolated = Vec::with_capacity(set.len());
    let mut nearest = Vec::with_capacity(set.len());
    for a in set {
        let mut best = f64::INFINITY;
        for g in &grid {
            let d = space.distance(a, g)?;
            if d > 0.0 {
                best = best.min(d);
            }
        }
        isolated.push(best >= radius);
        nearest.push(best);
    }
    let open = isolated.iter().all(|&b| b);
    Ok(IsolationReport {
        isolated,
        nearest,
        open,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zeros() -> Point {
        Point::BiSeq(BiSeq::new(0, 5, Extension::Periodic).unwrap())
    }

    fn ones() -> Point {
        Point::BiSeq(BiSeq::new(u64::MAX, 5, Extension::Periodic).unwrap())
    }

    #[test]
    fn distance_examples() {
        let a = SpaceDescriptor::annulus();
        assert_eq!(
            a.distance(&Point::annulus(1.0, 0.0), &Point::annulus(2.0, 0.0))
                .unwrap(),
            1.0
        );

        let s = SpaceDescriptor::shift(5);
        let d = s.distance(&zeros(), &ones()).unwrap();
        assert!((d - 3.0).abs() < 1e-12, "{d}");

        // 2|u-v| / sqrt((1+|u|^2)(1+|v|^2)) at u = (0, 1/5), v = (0, -1/5)
        let e = SpaceDescriptor::ext_plane();
        let d = e.distance(&Point::ext(0, 5), &Point::ext(0, -5)).unwrap();
        let oracle = 2.0 * 0.4 / (1.0 + 0.04);
        assert!((d - oracle).abs() < 1e-12);
        assert!((d - 0.769_230_769).abs() < 1e-8);
    }

    #[test]
    fn distance_rejects_foreign_points() {
        let t = SpaceDescriptor::torus();
        let err = t.distance(&Point::torus(0.0, 0.0), &Point::annulus(1.0, 0.0));
        assert!(matches!(err, Err(Error::VariantMismatch { .. })));
    }

    #[test]
    fn diameters() {
        assert_eq!(SpaceDescriptor::annulus().diameter(), 4.0);
        let t = SpaceDescriptor::torus();
        assert!((t.diameter() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let far = t
            .distance(&Point::torus(0.0, 0.0), &Point::torus(0.5, 0.5))
            .unwrap();
        assert!((far - t.diameter()).abs() < 1e-15);
        assert_eq!(SpaceDescriptor::shift(5).diameter(), 3.0);
        assert_eq!(SpaceDescriptor::ext_plane().diameter(), 2.0);
    }

    #[test]
    fn diameter_dominates_grid_distances() {
        for space in [
            SpaceDescriptor::torus(),
            SpaceDescriptor::annulus(),
            SpaceDescriptor::ext_plane(),
            SpaceDescriptor::shift(4),
        ] {
            for res in [3, 8, 17] {
                let g = space.grid(res);
                for a in &g {
                    assert!(space.contains(a));
                    for b in &g {
                        assert!(space.distance(a, b).unwrap() <= space.diameter() + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn torus_wraps() {
        let t = SpaceDescriptor::torus();
        let d = t
            .distance(&Point::torus(0.95, 0.0), &Point::torus(0.05, 0.0))
            .unwrap();
        assert!((d - 0.1).abs() < 1e-12);
    }

    #[test]
    fn sequence_shift_and_equality() {
        // x_k = k mod 2
        let bits: Vec<u8> = (-5i64..=5).map(|k| k.rem_euclid(2) as u8).collect();
        let x = BiSeq::from_bits(&bits, Extension::Constant).unwrap();
        let y = x.shifted(1);
        for n in -4..=4 {
            assert_eq!(y.bit(n), x.bit(n + 1));
        }
        assert_ne!(x, y);
        assert_eq!(x.shifted(1).shifted(-1), x);

        let p = BiSeq::from_bits(&[0, 1, 0], Extension::Periodic).unwrap();
        assert_eq!(p.shifted(3), p);
        assert_eq!(p.shifted(3).normalized().offset, 0);
        // the same periodic sequence stored with a longer window
        let q = BiSeq::from_bits(&[0, 1, 0, 0, 1, 0, 0, 1, 0], Extension::Periodic).unwrap();
        assert_eq!(p.shifted(-3), q.shifted(-3));
    }

    #[test]
    fn isolated_examples() {
        let e = SpaceDescriptor::ext_plane();
        let inf = [Point::ExtPlane(ExtPoint::Infinity)];
        let r = isolated_check(&e, &inf, 100, 0.1).unwrap();
        assert!(!r.open && !r.isolated[0]);

        let a = [Point::ext(3, 3)];
        let r = isolated_check(&e, &a, 10, f64::INFINITY).unwrap();
        let gap = r.nearest[0];
        assert!(gap > 0.0);
        let r = isolated_check(&e, &a, 10, gap * 0.5).unwrap();
        assert!(r.open && r.isolated[0]);

        let r = isolated_check(&e, &[], 10, 0.1).unwrap();
        assert!(r.open);
    }

    #[test]
    fn near_points_sit_at_radius() {
        let a = SpaceDescriptor::annulus();
        let p = Point::annulus_polar(1.5, 0.7);
        for q in a.near(&p, 0.01) {
            assert!((a.distance(&p, &q).unwrap() - 0.01).abs() < 1e-12);
        }
        let t = SpaceDescriptor::torus();
        let p = Point::torus(0.999, 0.3);
        for q in t.near(&p, 0.004) {
            assert!((t.distance(&p, &q).unwrap() - 0.004).abs() < 1e-12);
        }
    }

    #[test]
    fn point_text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let shift = SpaceDescriptor::shift(7);
        let mut pts = shift.sample(&mut rng, 3);
        pts.push(Point::torus(0.25, 0.125));
        pts.push(Point::annulus(1.1, -0.3));
        pts.push(Point::ext(-2, 7));
        pts.push(Point::ExtPlane(ExtPoint::Infinity));
        pts.push(Point::suspension(Point::ext(0, -3), 0.25));
        for p in pts {
            assert_eq!(Point::parse(&p.encode()).unwrap(), p);
        }
        assert!(Point::parse("torus(1)").is_err());
        assert!(Point::parse("blob(1,2)").is_err());
    }
}
