//! Argument-principle zero counting, zero localization and counting functions.

use crate::error::{Error, Result};
use crate::funcrep::{HoloMap, Target};
use num_complex::Complex64 as C;
use std::f64::consts::TAU;

/// Largest winding number allowed in a box handed to Newton refinement.
pub const M_MAX: i64 = 4;
const RETRIES: usize = 5;
const RETRY_STEP: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroRecord {
    pub location: C,
    pub multiplicity: u32,
    /// No other zero lies within this distance of `location`.
    pub certified_radius: f64,
    /// Set when the record stands for an unresolved cluster.
    pub degraded: bool,
}

/// Zeros located once in |z| < radius, reusable at every smaller radius.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSet {
    pub radius: f64,
    pub zeros: Vec<ZeroRecord>,
}

impl ZeroSet {
    /// Σ_{|zⱼ|<r} min(mⱼ, cap)·log(r/|zⱼ|).
    pub fn counting(&self, r: f64, truncation: Option<u32>) -> f64 {
        self.zeros
            .iter()
            .filter(|z| z.location.norm() < r)
            .map(|z| {
                let m = truncation.map_or(z.multiplicity, |k| z.multiplicity.min(k));
                m as f64 * (r / z.location.norm()).ln()
            })
            .sum()
    }

    /// Number of zeros with |z| < r, with multiplicity.
    pub fn count_within(&self, r: f64) -> u32 {
        self.zeros.iter().filter(|z| z.location.norm() < r).map(|z| z.multiplicity).sum()
    }

    /// Angles of zeros with modulus in [0.98r, 1.02r]; singular points of
    /// log|g| on the circle of radius r.
    pub fn hints_near(&self, r: f64) -> Vec<f64> {
        self.zeros
            .iter()
            .filter(|z| {
                let m = z.location.norm();
                m >= 0.98 * r && m <= 1.02 * r
            })
            .map(|z| z.location.arg())
            .collect()
    }
}

/// A value with the argument of g(z), rescaled by a positive factor when
/// the body allows it.
fn direction(g: &HoloMap, z: C) -> Result<C> {
    match g.body() {
        crate::funcrep::Body::ExpPoly { f, .. } => {
            let s = f.log_scale(z).max(0.0);
            Ok(crate::funcrep::eval_exppoly(f, z, s))
        }
        _ => g.eval(z),
    }
}

/// Total change of arg g along the closed path s ↦ path(s), s ∈ [0, 1],
/// divided by 2π.
fn winding_along(g: &HoloMap, path: &dyn Fn(f64) -> C, initial: usize, radius: f64) -> Result<i64> {
    let n = initial.max(8);
    let mut total = 0.0;
    let eval = |s: f64| -> Result<C> {
        let v = direction(g, path(s))?;
        if !(v.norm() > 1e-290) || !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::ZeroOnCircle { radius });
        }
        Ok(v)
    };
    let mut stack: Vec<(f64, f64, C, C)> = Vec::new();
    let mut prev_s = 0.0;
    let mut prev_v = eval(0.0)?;
    let first = prev_v;
    for i in 1..=n {
        let s = i as f64 / n as f64;
        let v = if i == n { first } else { eval(s)? };
        stack.push((prev_s, s, prev_v, v));
        prev_s = s;
        prev_v = v;
    }
    stack.reverse();
    let mut steps = 0usize;
    while let Some((s0, s1, v0, v1)) = stack.pop() {
        steps += 1;
        if steps > 4_000_000 || s1 - s0 < 1e-13 {
            return Err(Error::ZeroOnCircle { radius });
        }
        let sm = 0.5 * (s0 + s1);
        let vm = eval(sm)?;
        let m0 = v0.norm().min(v1.norm()).min(vm.norm());
        let ok = (v1 - v0).norm() <= 0.5 * m0 && (vm - 0.5 * (v0 + v1)).norm() <= 0.25 * m0;
        if ok {
            total += (v1 / v0).arg();
        } else {
            // process the left half first
            stack.push((sm, s1, vm, v1));
            stack.push((s0, sm, v0, vm));
        }
    }
    Ok((total / TAU).round() as i64)
}

fn circle_path(centre: C, t: f64) -> impl Fn(f64) -> C {
    move |s| centre + C::from_polar(t, TAU * s)
}

fn initial_segments(g: &HoloMap, t: f64) -> usize {
    g.panels(t) * 4
}

/// Zeros of g in |z − centre| < t with multiplicity, by the argument principle.
fn winding_of(g: &HoloMap, centre: C, t: f64) -> Result<i64> {
    let p = circle_path(centre, t);
    winding_along(g, &p, initial_segments(g, centre.norm() + t), t)
}

/// Number of solutions of f = a in |z| < t (poles for a = ∞).
pub fn winding_count(f: &HoloMap, t: f64, a: &Target) -> Result<i64> {
    if !(t > 0.0) || t >= f.disc().radius() {
        return Err(Error::DomainViolation { z: C::new(t, 0.0), radius: f.disc().radius() });
    }
    let g = f.preimage_rep(a);
    winding_of(&g, C::new(0.0, 0.0), t)
}

/// Runs `op` at t, t(1+1e−6), t(1−1e−6), … until it succeeds.
pub fn with_retries<T>(t: f64, mut op: impl FnMut(f64) -> Result<T>) -> Result<T> {
    let mut last = None;
    for k in 0..RETRIES {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let tt = if k == 0 { t } else { t * (1.0 + sign * RETRY_STEP * ((k + 1) / 2) as f64) };
        match op(tt) {
            Ok(v) => return Ok(v),
            Err(e @ (Error::ZeroOnCircle { .. } | Error::SingularAverage { .. })) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Annular sector {ρ₀ ≤ |z| ≤ ρ₁, θ₀ ≤ arg z ≤ θ₁}.
#[derive(Clone, Copy, Debug)]
struct Sector {
    r0: f64,
    r1: f64,
    a0: f64,
    a1: f64,
}

impl Sector {
    fn size(&self) -> f64 {
        (self.r1 - self.r0).max(self.r1 * (self.a1 - self.a0))
    }

    fn contains(&self, z: C) -> bool {
        let r = z.norm();
        let mut a = z.arg();
        while a < self.a0 {
            a += TAU;
        }
        r >= self.r0 && r <= self.r1 && a <= self.a1
    }

    fn centre(&self) -> C {
        C::from_polar(0.5 * (self.r0 + self.r1), 0.5 * (self.a0 + self.a1))
    }

    /// Boundary, counter-clockwise: out along θ₀, the outer arc, in along
    /// θ₁, the inner arc backwards.
    fn path(self) -> impl Fn(f64) -> C {
        let Sector { r0, r1, a0, a1 } = self;
        let (lr, la) = (r1 - r0, a1 - a0);
        let (inner, outer) = (r0 * la, r1 * la);
        let total = 2.0 * lr + inner + outer;
        let cuts = [lr / total, (lr + outer) / total, (2.0 * lr + outer) / total];
        move |s| {
            if s < cuts[0] {
                C::from_polar(r0 + lr * s / cuts[0], a0)
            } else if s < cuts[1] {
                C::from_polar(r1, a0 + la * (s - cuts[0]) / (cuts[1] - cuts[0]))
            } else if s < cuts[2] {
                C::from_polar(r1 - lr * (s - cuts[1]) / (cuts[2] - cuts[1]), a1)
            } else {
                C::from_polar(r0, a1 - la * (s - cuts[2]) / (1.0 - cuts[2]))
            }
        }
    }
}

/// Below this size a box around a multiple zero is inside its rounding halo.
fn size_is_noise(size: f64, t: f64) -> bool {
    size < 1e-4 * t.max(1.0)
}

struct Locator<'a> {
    g: &'a HoloMap,
    dg: HoloMap,
    t: f64,
    min_size: f64,
    out: Vec<ZeroRecord>,
}

impl<'a> Locator<'a> {
    fn sector_winding(&self, s: Sector) -> Result<i64> {
        let n = (initial_segments(self.g, s.r1) as f64 * (s.size() / self.t).min(1.0)).ceil() as usize;
        winding_along(self.g, &s.path(), n.max(16), s.size())
    }

    /// Damped Newton for a zero of multiplicity m started at `start`.
    fn newton(&self, start: C, m: i64, reach: f64) -> Option<C> {
        let mut z = start;
        for _ in 0..200 {
            let v = self.g.eval(z).ok()?;
            if v.norm() == 0.0 {
                return Some(z);
            }
            let d = self.dg.eval(z).ok()?;
            if d.norm() == 0.0 {
                return None;
            }
            let mut step = v / d * m as f64;
            if step.norm() > 0.5 * reach {
                step *= 0.5 * reach / step.norm();
            }
            z -= step;
            if (z - start).norm() > 2.0 * reach || !self.g.disc().contains(z) {
                return None;
            }
            if step.norm() <= 1e-15 * (1.0 + z.norm()) {
                return Some(z);
            }
        }
        Some(z)
    }

    /// Accepts z as a zero of multiplicity m if some small circle around it
    /// winds exactly m times; the certified radius grows while that holds.
    /// Multiple zeros are only found to about ε^{1/m}, so the first circle
    /// that sees anything must already see all m.
    fn certify(&self, z: C, m: i64, size: f64) -> Option<ZeroRecord> {
        let tiny = 10.0 * (1e-9 * self.t).max(1e-12 * (1.0 + z.norm()));
        let room = (self.g.disc().radius() - z.norm()).min(2.0 * size);
        let mut rad = tiny;
        loop {
            if rad >= room {
                return None;
            }
            match winding_of(self.g, z, rad) {
                Ok(w) if w == m => break,
                // nothing yet, or the circle grazes the noisy core of a cluster
                Ok(0) | Err(_) => rad *= 4.0,
                _ => return None,
            }
        }
        // distinct zeros seen together from farther than the rounding halo
        // of an m-fold zero must be separated by subdivision instead
        let halo = 10.0 * 1e-15f64.powf(1.0 / m as f64) * self.t.max(1.0);
        if m > 1 && rad > halo.max(tiny) {
            return None;
        }
        let degraded = false;
        let mut next = rad * 4.0;
        while next < room {
            match winding_of(self.g, z, next) {
                Ok(w) if w == m => {
                    rad = next;
                    next *= 4.0;
                }
                _ => break,
            }
        }
        Some(ZeroRecord { location: z, multiplicity: m as u32, certified_radius: rad, degraded })
    }

    fn process(&mut self, s: Sector, count: i64, depth: u32) -> Result<()> {
        if count == 0 {
            return Ok(());
        }
        let size = s.size();
        if size < self.min_size || depth > 80 {
            self.out.push(ZeroRecord { location: s.centre(), multiplicity: count as u32, certified_radius: 0.0, degraded: true });
            return Ok(());
        }
        if count <= M_MAX {
            if let Some(z) = self.newton(s.centre(), count, size) {
                if s.contains(z) {
                    if let Some(rec) = self.certify(z, count, size) {
                        self.out.push(rec);
                        return Ok(());
                    }
                }
            }
        }
        self.split(s, count, depth)
    }

    fn split(&mut self, s: Sector, count: i64, depth: u32) -> Result<()> {
        // split along the longer side only, off-centre to dodge symmetric zeros
        let radial = s.r1 - s.r0 >= s.r1 * (s.a1 - s.a0);
        for frac in [0.500_713_1, 0.471_3, 0.531_7, 0.447_9] {
            let parts = if radial {
                let m = s.r0 + frac * (s.r1 - s.r0);
                [Sector { r1: m, ..s }, Sector { r0: m, ..s }]
            } else {
                let m = s.a0 + frac * (s.a1 - s.a0);
                [Sector { a1: m, ..s }, Sector { a0: m, ..s }]
            };
            let counts: Result<Vec<i64>> = parts.iter().map(|p| self.sector_winding(*p)).collect();
            if let Ok(cs) = counts {
                if cs.iter().sum::<i64>() == count && cs.iter().all(|&c| c >= 0) {
                    for (p, c) in parts.into_iter().zip(cs) {
                        self.process(p, c, depth + 1)?;
                    }
                    return Ok(());
                }
            }
        }
        if size_is_noise(s.size(), self.t) {
            self.out.push(ZeroRecord { location: s.centre(), multiplicity: count as u32, certified_radius: 0.0, degraded: true });
            return Ok(());
        }
        Err(Error::ZeroOnCircle { radius: s.r1 })
    }
}

/// Zeros of f − a (poles for a = ∞) in |z| < t, sorted by (|z|, arg z).
pub fn locate_zeros(f: &HoloMap, t: f64, a: &Target) -> Result<ZeroSet> {
    let g = f.preimage_rep(a);
    locate_zeros_of(&g, t)
}

/// Zeros of a holomorphic g in |z| < t.
pub fn locate_zeros_of(g: &HoloMap, t: f64) -> Result<ZeroSet> {
    if !(t > 0.0) || t >= g.disc().radius() {
        return Err(Error::DomainViolation { z: C::new(t, 0.0), radius: g.disc().radius() });
    }
    if let Some(e) = g.as_exp_poly() {
        if e.is_zero() {
            return Err(Error::Degenerate("function vanishes identically".into()));
        }
    }
    let total = winding_of(g, C::new(0.0, 0.0), t)?;
    let mut zeros = Vec::new();
    if total > 0 {
        let dg = g.derivative(1)?;
        let mut loc = Locator { g, dg, t, min_size: 1e-9 * t, out: Vec::new() };
        // a small disc around the origin, then sectors of the annulus
        let mut inner = None;
        for k in [1e-3, 1.37e-3, 0.71e-3, 2.3e-3] {
            if let Ok(c) = winding_of(g, C::new(0.0, 0.0), k * t) {
                inner = Some((k * t, c));
                break;
            }
        }
        let (r_in, c_in) = inner.ok_or(Error::ZeroOnCircle { radius: 1e-3 * t })?;
        if c_in > 0 {
            let rec = loc
                .newton(C::new(0.0, 0.0), c_in, r_in)
                .filter(|z| z.norm() < r_in)
                .and_then(|z| loc.certify(z, c_in, r_in))
                .unwrap_or(ZeroRecord { location: C::new(0.0, 0.0), multiplicity: c_in as u32, certified_radius: 0.0, degraded: true });
            loc.out.push(rec);
        }
        if total > c_in {
            let a0 = 0.123_456_7;
            let quarters: Vec<Sector> =
                (0..4).map(|j| Sector { r0: r_in, r1: t, a0: a0 + j as f64 * TAU / 4.0, a1: a0 + (j + 1) as f64 * TAU / 4.0 }).collect();
            let mut counts = Vec::new();
            for q in &quarters {
                counts.push(loc.sector_winding(*q)?);
            }
            if counts.iter().sum::<i64>() != total - c_in {
                return Err(Error::ZeroOnCircle { radius: t });
            }
            for (q, c) in quarters.into_iter().zip(counts) {
                loc.process(q, c, 0)?;
            }
        }
        zeros = loc.out;
        let found: i64 = zeros.iter().map(|z| z.multiplicity as i64).sum();
        if found != total {
            return Err(Error::ZeroOnCircle { radius: t });
        }
    }
    zeros.sort_by(|a, b| {
        (a.location.norm(), a.location.arg())
            .partial_cmp(&(b.location.norm(), b.location.arg()))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(ZeroSet { radius: t, zeros })
}

/// Locates at t with the retry policy for zeros on the circle.
pub fn locate_with_retries(g: &HoloMap, t: f64) -> Result<ZeroSet> {
    with_retries(t, |tt| locate_zeros_of(g, tt.min(t * (1.0 + 1e-5)))).map(|mut s| {
        s.radius = s.radius.min(t);
        s
    })
}

fn hits_origin(g: &HoloMap) -> Result<bool> {
    let v = g.eval(C::new(0.0, 0.0))?;
    Ok(v.norm() == 0.0)
}

/// N_f(r, a) = Σ_{|zⱼ|<r} min(mⱼ, truncation)·log(r/|zⱼ|).
pub fn counting_function(f: &HoloMap, r: f64, a: &Target, truncation: Option<u32>) -> Result<f64> {
    let g = f.preimage_rep(a);
    if hits_origin(&g)? {
        return Err(Error::OriginHitsTarget);
    }
    Ok(locate_with_retries(&g, r)?.counting(r, truncation))
}

/// Counting function of the ramification divisor: zeros of the Wronskian of
/// the reduced representation.
pub fn ramification_counting(f: &HoloMap, r: f64) -> Result<f64> {
    let w = f.wronskian_rep();
    if let Some(e) = w.as_exp_poly() {
        if e.is_zero() {
            return Err(Error::Degenerate("Wronskian vanishes identically".into()));
        }
    }
    if hits_origin(&w)? {
        return Err(Error::OriginHitsTarget);
    }
    Ok(locate_with_retries(&w, r)?.counting(r, None))
}
