//! Circle averages, radial integrals and the calculus-lemma checker.
//!
//! All one-dimensional integrals go through a global adaptive Gauss–Kronrod
//! (7, 15) scheme. Panels that end at a declared singular point are mapped by
//! x = a + (b − a)u², which turns a logarithmic endpoint singularity into a
//! bounded integrand.

use crate::error::{Error, Result};
use num_complex::Complex64 as C;
use std::collections::BinaryHeap;
use std::f64::consts::TAU;

pub const TOL_SMOOTH: f64 = 1e-8;
pub const TOL_LOG: f64 = 1e-5;
const MAX_DEPTH: u32 = 24;
const MAX_PANELS: usize = 200_000;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Where a panel's integrable singularity sits, if anywhere.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Edge {
    None,
    Left,
    Right,
}

#[derive(Clone, Copy, Debug)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    edge: Edge,
    depth: u32,
    value: [f64; N],
    error: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<const N: usize, F>(f: &F, a: f64, b: f64, edge: Edge, depth: u32) -> Result<Panel<N>>
where
    F: Fn(f64) -> Result<[f64; N]>,
{
    let half = 0.5 * (b - a);
    let centre = 0.5 * (a + b);
    // u ∈ [0,1] ↦ x; weight dx/du
    let eval = |t: f64| -> Result<[f64; N]> {
        let (x, jac) = match edge {
            Edge::None => (centre + half * t, 1.0),
            Edge::Left => {
                let u = 0.5 * (t + 1.0);
                (a + (b - a) * u * u, 2.0 * u)
            }
            Edge::Right => {
                let u = 0.5 * (t + 1.0);
                (b - (b - a) * u * u, 2.0 * u)
            }
        };
        let mut v = f(x)?;
        for c in v.iter_mut() {
            if !c.is_finite() {
                return Err(Error::SingularAverage { radius: f64::NAN });
            }
            *c *= jac;
        }
        Ok(v)
    };
    let fc = eval(0.0)?;
    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    let mut absk = 0.0;
    for c in 0..N {
        kron[c] = WGK[7] * fc[c];
        gauss[c] = WG[3] * fc[c];
    }
    absk += WGK[7] * fc.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut samples = Vec::with_capacity(15);
    samples.push((fc, WGK[7]));
    for j in 0..7 {
        let x = XGK[j];
        let f1 = eval(-x)?;
        let f2 = eval(x)?;
        for c in 0..N {
            kron[c] += WGK[j] * (f1[c] + f2[c]);
            if j % 2 == 1 {
                gauss[c] += WG[j / 2] * (f1[c] + f2[c]);
            }
        }
        absk += WGK[j] * (f1.iter().chain(f2.iter()).map(|v| v.abs()).fold(0.0, f64::max));
        samples.push((f1, WGK[j]));
        samples.push((f2, WGK[j]));
    }
    // x-scale: the map from t ∈ [−1,1] has dx/dt = half in every case
    let scale = half.abs();
    let mut error: f64 = 0.0;
    for c in 0..N {
        let mean = kron[c] * 0.5;
        let resasc: f64 = samples.iter().map(|(v, w)| w * (v[c] - mean).abs()).sum::<f64>() * scale;
        let mut e = ((kron[c] - gauss[c]) * scale).abs();
        if resasc != 0.0 && e != 0.0 {
            e = resasc * (200.0 * e / resasc).powf(1.5).min(1.0);
        }
        let floor = 50.0 * f64::EPSILON * absk * scale;
        if e < floor {
            e = floor;
        }
        error = error.max(e);
    }
    let mut value = [0.0; N];
    for c in 0..N {
        value[c] = kron[c] * scale;
    }
    Ok(Panel { a, b, edge, depth, value, error })
}

/// ∫ₐᵇ f for vector-valued integrands sharing one set of evaluations.
///
/// `singular` lists interior or endpoint abscissae where f may have an
/// integrable logarithmic singularity; `panels` is the initial uniform split.
pub fn integrate_n<const N: usize, F>(f: F, a: f64, b: f64, tol: f64, singular: &[f64], panels: usize) -> Result<[f64; N]>
where
    F: Fn(f64) -> Result<[f64; N]>,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if a == b {
        return Ok([0.0; N]);
    }
    let mut cuts: Vec<f64> = singular.iter().copied().filter(|&s| s > a && s < b).collect();
    let is_singular = |x: f64| singular.iter().any(|&s| (s - x).abs() <= 1e-15 * (1.0 + x.abs()));
    let n = panels.max(1);
    cuts.extend((1..n).map(|i| a + (b - a) * i as f64 / n as f64));
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (b - a).abs());
    let mut heap = BinaryHeap::new();
    for w in cuts.windows(2) {
        let edge = if is_singular(w[0]) {
            Edge::Left
        } else if is_singular(w[1]) {
            Edge::Right
        } else {
            Edge::None
        };
        heap.push(gk15(&f, w[0], w[1], edge, 0)?);
    }
    let total = |h: &BinaryHeap<Panel<N>>| -> ([f64; N], f64) {
        let mut v = [0.0; N];
        let mut e = 0.0;
        for p in h.iter() {
            for c in 0..N {
                v[c] += p.value[c];
            }
            e += p.error;
        }
        (v, e)
    };
    let mut err: f64 = heap.iter().map(|p| p.error).sum();
    // rounding floor relative to the size of the integral
    let floor = |h: &BinaryHeap<Panel<N>>| 1e-14 * h.iter().map(|p| p.value.iter().map(|v| v.abs()).fold(0.0, f64::max)).sum::<f64>();
    let tol = tol.max(floor(&heap));
    while err > tol {
        let worst = heap.pop().expect("nonempty");
        if worst.depth >= MAX_DEPTH || heap.len() > MAX_PANELS {
            heap.push(worst);
            let (_, e) = total(&heap);
            return Err(Error::NoConvergence { estimate: e, tol });
        }
        let m = 0.5 * (worst.a + worst.b);
        let (el, er) = match worst.edge {
            Edge::Left => (Edge::Left, Edge::None),
            Edge::Right => (Edge::None, Edge::Right),
            Edge::None => (Edge::None, Edge::None),
        };
        let l = gk15(&f, worst.a, m, el, worst.depth + 1)?;
        let r = gk15(&f, m, worst.b, er, worst.depth + 1)?;
        err += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
        if err <= tol {
            // re-sum to avoid drift in the running total
            err = total(&heap).1;
        }
    }
    Ok(total(&heap).0)
}

pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64, singular: &[f64], panels: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    Ok(integrate_n(|x| Ok([f(x)?]), a, b, tol, singular, panels)?[0])
}

/// A real function of the angle θ with declared singular angles.
pub struct CircleIntegrand<'a> {
    f: Box<dyn Fn(f64) -> Result<f64> + Sync + 'a>,
    hints: Vec<f64>,
    panels: usize,
    radius: f64,
}

impl<'a> CircleIntegrand<'a> {
    pub fn new(f: impl Fn(f64) -> Result<f64> + Sync + 'a) -> Self {
        CircleIntegrand { f: Box::new(f), hints: Vec::new(), panels: 16, radius: f64::NAN }
    }

    /// Angles (any real value; reduced mod 2π) where g may blow up logarithmically.
    pub fn with_hints(mut self, hints: impl IntoIterator<Item = f64>) -> Self {
        self.hints.extend(hints.into_iter().map(|t| t.rem_euclid(TAU)));
        self
    }

    pub fn with_panels(mut self, panels: usize) -> Self {
        self.panels = panels.max(1);
        self
    }

    /// Radius reported in errors.
    pub fn on_radius(mut self, r: f64) -> Self {
        self.radius = r;
        self
    }
}

/// (1/2π)∫₀^{2π} g(θ)dθ with absolute error at most `tol`.
pub fn circle_average(g: &CircleIntegrand<'_>, tol: f64) -> Result<f64> {
    // start the period at a point away from every hint so that hints are
    // interior cut points or endpoints handled symmetrically
    let mut hints = g.hints.clone();
    for h in hints.iter_mut() {
        if *h < 1e-14 || TAU - *h < 1e-14 {
            *h = 0.0;
        }
    }
    let mut singular = hints.clone();
    if hints.iter().any(|&h| h == 0.0) {
        singular.push(TAU);
    }
    let v = integrate(|t| (g.f)(t), 0.0, TAU, tol * TAU, &singular, g.panels).map_err(|e| match e {
        Error::SingularAverage { .. } => Error::SingularAverage { radius: g.radius },
        other => other,
    })?;
    Ok(v / TAU)
}

/// Sample radii with trapezoid weights.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    radii: Vec<f64>,
    weights: Vec<f64>,
    spacing: Spacing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spacing {
    /// geometric in r, for R = ∞
    GeometricR,
    /// geometric in 1 − r, for R = 1
    GeometricBoundary,
    Custom,
}

impl RadialGrid {
    pub fn new(radii: Vec<f64>, spacing: Spacing) -> Result<Self> {
        if radii.is_empty() || radii[0] <= 0.0 || radii.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("grid radii must be positive and strictly increasing".into()));
        }
        let n = radii.len();
        let weights = (0..n)
            .map(|i| {
                let lo = if i == 0 { radii[0] } else { radii[i - 1] };
                let hi = if i + 1 == n { radii[n - 1] } else { radii[i + 1] };
                let w = 0.5 * (hi - lo);
                if n == 1 {
                    radii[0]
                } else {
                    w
                }
            })
            .collect();
        Ok(RadialGrid { radii, weights, spacing })
    }

    /// n points geometric in r from r0 to r1.
    pub fn geometric(r0: f64, r1: f64, n: usize) -> Result<Self> {
        if !(r0 > 0.0 && r1 > r0 && n >= 2) {
            return Err(Error::InvalidArgument("geometric grid needs 0 < r0 < r1 and n ≥ 2".into()));
        }
        let q = (r1 / r0).ln() / (n - 1) as f64;
        let mut radii: Vec<f64> = (0..n).map(|i| r0 * (q * i as f64).exp()).collect();
        radii[n - 1] = r1;
        RadialGrid::new(radii, Spacing::GeometricR)
    }

    /// n points with 1 − r geometric from 1 − r0 down to 1 − r1.
    pub fn geometric_to_boundary(r0: f64, r1: f64, n: usize) -> Result<Self> {
        if !(0.0 < r0 && r0 < r1 && r1 < 1.0 && n >= 2) {
            return Err(Error::InvalidArgument("boundary grid needs 0 < r0 < r1 < 1 and n ≥ 2".into()));
        }
        let (d0, d1) = (1.0 - r0, 1.0 - r1);
        let q = (d1 / d0).ln() / (n - 1) as f64;
        let mut radii: Vec<f64> = (0..n).map(|i| 1.0 - d0 * (q * i as f64).exp()).collect();
        radii[n - 1] = r1;
        RadialGrid::new(radii, Spacing::GeometricBoundary)
    }

    /// The default 48-point grid: 1..50 for R = ∞, 0.5..0.9995 for R = 1.
    pub fn standard(radius: f64) -> Result<Self> {
        if radius.is_infinite() {
            RadialGrid::geometric(1.0, 50.0, 48)
        } else if radius == 1.0 {
            RadialGrid::geometric_to_boundary(0.5, 0.9995, 48)
        } else {
            let mut g = RadialGrid::geometric_to_boundary(0.5, 0.9995, 48)?;
            g.radii.iter_mut().for_each(|r| *r *= radius);
            g.weights.iter_mut().for_each(|w| *w *= radius);
            Ok(g)
        }
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// The first third of the grid, used for fitting constants.
    pub fn fit_len(&self) -> usize {
        (self.radii.len() / 3).max(1)
    }
}

/// Density times 2s, circle-averaged, as a function of s.
fn radial_profile<'a, D>(density: &'a D, panels: usize, tol: f64) -> impl Fn(f64) -> Result<f64> + 'a
where
    D: Fn(C) -> Result<f64> + Sync,
{
    move |s: f64| {
        // large densities near a boundary cannot meet a tiny absolute tolerance
        let size = density(C::new(s, 0.0)).ok().filter(|v| v.is_finite()).map_or(0.0, f64::abs);
        let g = CircleIntegrand::new(|t| density(C::from_polar(s, t))).with_panels(panels).on_radius(s);
        circle_average(&g, tol.max(1e-11 * size))
    }
}

/// T(r) = ∫₀^r dt/t ∫_{|z|<t} ρ (√−1/2π)dz∧dz̄, evaluated in the integrated
/// form 2∫₀^r s·log(r/s)·ρ̄(s) ds with ρ̄ the circle average of ρ.
pub fn height_double_integral<D>(density: D, r: f64, tol: f64) -> Result<f64>
where
    D: Fn(C) -> Result<f64> + Sync,
{
    height_with_panels(&density, r, tol, 16, &[])
}

/// As [`height_double_integral`] with an angular panel count and radii
/// where ρ̄ may be log-singular.
pub fn height_with_panels<D>(density: &D, r: f64, tol: f64, panels: usize, radial_hints: &[f64]) -> Result<f64>
where
    D: Fn(C) -> Result<f64> + Sync,
{
    if !(r > 0.0) {
        return Ok(0.0);
    }
    let inner_tol = (tol / (r * r).max(1.0)).max(1e-13);
    let prof = radial_profile(density, panels, inner_tol);
    integrate(|s| Ok(2.0 * s * (r / s).ln() * prof(s)?), 0.0, r, tol, radial_hints, 4)
}

/// T at every radius of an increasing list, sharing the radial integrals
/// between neighbouring radii: T(r) = 2·log r·A(r) − 2·B(r) with
/// A = ∫ sρ̄ and B = ∫ s·log s·ρ̄.
pub fn height_on_radii<D>(density: &D, radii: &[f64], tol: f64, panels: &dyn Fn(f64) -> usize, radial_hints: &[f64]) -> Result<Vec<f64>>
where
    D: Fn(C) -> Result<f64> + Sync,
{
    let mut a_acc = 0.0;
    let mut b_acc = 0.0;
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(radii.len());
    let n = radii.len().max(1) as f64;
    for &r in radii {
        let p = panels(r);
        let inner_tol = (tol / (r * r).max(1.0) / n).max(1e-13);
        let prof = radial_profile(density, p, inner_tol);
        let scale = 1.0 + r.ln().abs();
        let [da, db] = integrate_n(
            |s| {
                let v = prof(s)?;
                Ok([s * v, if s > 0.0 { s * s.ln() * v } else { 0.0 }])
            },
            prev,
            r,
            tol / (2.0 * n * scale),
            radial_hints,
            4,
        )?;
        a_acc += da;
        b_acc += db;
        out.push(2.0 * r.ln() * a_acc - 2.0 * b_acc);
        prev = r;
    }
    Ok(out)
}

/// ∫₀^r mass(t)dt/t − ½(circavg g(re^{iθ}) − g(0)); `mass(t)` is the
/// dd^c-mass of g on |z| < t, `breaks` are radii where it jumps and `hints`
/// angles where g is singular on the circle.
pub fn green_jensen_residual<G, M>(g: G, mass: M, r: f64, breaks: &[f64], hints: &[f64]) -> Result<f64>
where
    G: Fn(C) -> f64 + Sync,
    M: Fn(f64) -> f64,
{
    let lhs = integrate(|t| Ok(mass(t) / t), 0.0, r, 1e-10, breaks, 4)?;
    let avg = circle_average(
        &CircleIntegrand::new(|t| Ok(g(C::from_polar(r, t)))).with_hints(hints.iter().copied()).with_panels(16).on_radius(r),
        TOL_LOG * 1e-3,
    )?;
    Ok(lhs - 0.5 * (avg - g(C::new(0.0, 0.0))))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LemmaForm {
    /// h′ ≤ h^{1+δ}γ
    FirstOrder,
    /// (1/r)(r h′)′ ≤ r^δ γ^{2+δ} h^{(1+δ)²}
    SecondOrder,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaCheck {
    pub violations: Vec<f64>,
    /// Σ γ(rᵢ)Δrᵢ over flagged radii.
    pub measure: f64,
}

fn centred_diff(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                (y[1] - y[0]) / (x[1] - x[0])
            } else if i + 1 == n {
                (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2])
            } else {
                // three-point stencil on a nonuniform grid
                let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
                (h0 * h0 * y[i + 1] - h1 * h1 * y[i - 1] + (h1 * h1 - h0 * h0) * y[i]) / (h0 * h1 * (h0 + h1))
            }
        })
        .collect()
}

/// Flags radii where the calculus-lemma inequality fails and returns the
/// γ-weighted measure of the flagged set. Endpoints are excluded.
pub fn calculus_lemma_check<H, G>(h: H, gamma: G, delta: f64, grid: &RadialGrid, form: LemmaForm) -> Result<LemmaCheck>
where
    H: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::PreconditionViolation(format!("delta must lie in (0,1), got {delta}")));
    }
    let r = grid.radii();
    if r.len() < 5 {
        return Err(Error::GridTooCoarse("need at least five radii".into()));
    }
    let hv: Vec<f64> = r.iter().map(|&x| h(x)).collect();
    let dh = centred_diff(r, &hv);
    let slack = 1e-9;
    let (lhs, skip): (Vec<f64>, usize) = match form {
        LemmaForm::FirstOrder => {
            if hv.windows(2).any(|w| w[1] < w[0] - slack * w[0].abs().max(1.0)) {
                return Err(Error::GridTooCoarse("h is not nondecreasing on the grid".into()));
            }
            (dh, 1)
        }
        LemmaForm::SecondOrder => {
            let rh: Vec<f64> = r.iter().zip(&dh).map(|(x, d)| x * d).collect();
            if rh[1..rh.len() - 1].windows(2).any(|w| w[1] < w[0] - slack * w[0].abs().max(1.0)) {
                return Err(Error::GridTooCoarse("r·h′ is not nondecreasing on the grid".into()));
            }
            let d2 = centred_diff(r, &rh);
            (r.iter().zip(d2).map(|(x, d)| d / x).collect(), 2)
        }
    };
    let mut violations = Vec::new();
    let mut measure = 0.0;
    for i in skip..r.len() - skip {
        let x = r[i];
        let g = gamma(x);
        let bound = match form {
            LemmaForm::FirstOrder => hv[i].max(0.0).powf(1.0 + delta) * g,
            LemmaForm::SecondOrder => x.powf(delta) * g.powf(2.0 + delta) * hv[i].max(0.0).powf((1.0 + delta).powi(2)),
        };
        if lhs[i] > bound {
            violations.push(x);
            measure += g * grid.weights()[i];
        }
    }
    Ok(LemmaCheck { violations, measure })
}

/// Mean of θ ↦ log|e^{iθ}·r − a| by Jensen: log max(r, |a|).
pub fn jensen_log_mean(r: f64, a: C) -> f64 {
    r.max(a.norm()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn circle_average_examples() {
        let c = CircleIntegrand::new(|_| Ok(3.7));
        assert!((circle_average(&c, TOL_SMOOTH).unwrap() - 3.7).abs() < 1e-12);
        let g = CircleIntegrand::new(|t| Ok((C::from_polar(1.0, t) - 2.0).norm().ln()));
        assert!((circle_average(&g, TOL_SMOOTH).unwrap() - 2f64.ln()).abs() < 1e-8);
        let e = std::f64::consts::E;
        let g = CircleIntegrand::new(|t| Ok((C::from_polar(e, t)).norm().ln()));
        assert!((circle_average(&g, TOL_SMOOTH).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_singularity_on_the_circle() {
        // log|e^{iθ} − 1| has mean 0 and a singularity at θ = 0
        let g = CircleIntegrand::new(|t| Ok((C::from_polar(1.0, t) - 1.0).norm().ln())).with_hints([0.0]);
        assert!(circle_average(&g, TOL_LOG).unwrap().abs() < 1e-5);
        let a = C::from_polar(1.0, 2.0);
        let g = CircleIntegrand::new(|t| Ok((C::from_polar(1.0, t) - a).norm().ln())).with_hints([2.0]);
        assert!(circle_average(&g, TOL_LOG).unwrap().abs() < 1e-5);
    }

    #[test]
    fn non_finite_values_are_reported() {
        let g = CircleIntegrand::new(|t| Ok(if t > 1.0 && t < 1.2 { f64::NAN } else { 0.0 })).on_radius(2.0);
        assert!(matches!(circle_average(&g, 1e-8), Err(Error::SingularAverage { radius }) if radius == 2.0));
    }

    #[test]
    fn undeclared_pole_does_not_converge() {
        let r = integrate(|x| Ok(1.0 / (x - 0.3).abs()), 0.0, 1.0, 1e-8, &[], 1);
        assert!(matches!(r, Err(Error::NoConvergence { .. }) | Err(Error::SingularAverage { .. })));
    }

    #[test]
    fn height_examples() {
        let fs = |z: C| Ok(1.0 / (1.0 + z.norm_sqr()).powi(2));
        let t = height_double_integral(fs, 1.0, 1e-9).unwrap();
        assert!((t - 0.5 * 2f64.ln()).abs() < 1e-8);
        assert_eq!(height_double_integral(|_| Ok(0.0), 2.0, 1e-9).unwrap(), 0.0);
        let poincare = |z: C| Ok(2.0 / (1.0 - z.norm_sqr()).powi(2));
        let t = height_double_integral(poincare, 0.5, 1e-9).unwrap();
        assert!((t - (4.0f64 / 3.0).ln()).abs() < 1e-8);
    }

    #[test]
    fn height_on_radii_matches_single_radius() {
        let fs = |z: C| Ok(1.0 / (1.0 + z.norm_sqr()).powi(2));
        let radii = [0.5, 1.0, 3.0, 10.0];
        let t = height_on_radii(&fs, &radii, 1e-8, &|_| 16, &[]).unwrap();
        for (r, v) in radii.iter().zip(t) {
            assert!((v - 0.5 * (1.0 + r * r).ln()).abs() < 1e-7, "{r}: {v}");
        }
    }

    #[test]
    fn green_jensen_examples() {
        let g = |z: C| z.re;
        assert!(green_jensen_residual(g, |_| 0.0, 1.7, &[], &[]).unwrap().abs() < 1e-8);
        let g = |z: C| z.norm_sqr();
        assert!(green_jensen_residual(g, |t| t * t, 1.3, &[], &[]).unwrap().abs() < 1e-8);
        let a = C::new(0.3, 0.4);
        let g = move |z: C| (z - a).norm().ln();
        let res = green_jensen_residual(g, |t| if t > 0.5 { 0.5 } else { 0.0 }, 2.0, &[0.5], &[]).unwrap();
        assert!(res.abs() < 1e-8);
    }

    #[test]
    fn calculus_lemma_examples() {
        let grid = RadialGrid::geometric_to_boundary(0.01, 0.9999, 200).unwrap();
        let c = calculus_lemma_check(|r| (1.0 / (1.0 - r)).ln(), |r| 1.0 / (1.0 - r), 0.5, &grid, LemmaForm::FirstOrder).unwrap();
        assert!(c.measure < 10.0);
        let grid = RadialGrid::geometric(0.01, 100.0, 200).unwrap();
        let c = calculus_lemma_check(|r| r, |_| 1.0, 0.5, &grid, LemmaForm::FirstOrder).unwrap();
        assert!(c.violations.iter().all(|&r| r > 0.0 && r < 1.0));
        assert!(c.measure <= 1.0);
        let c = calculus_lemma_check(|_| 2.0, |_| 1.0, 0.5, &grid, LemmaForm::FirstOrder).unwrap();
        assert!(c.violations.is_empty());
    }

    #[test]
    fn calculus_lemma_rejects_decreasing_h() {
        let grid = RadialGrid::geometric(0.1, 10.0, 20).unwrap();
        let r = calculus_lemma_check(|r| -r, |_| 1.0, 0.5, &grid, LemmaForm::FirstOrder);
        assert!(matches!(r, Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn standard_grids() {
        let g = RadialGrid::standard(f64::INFINITY).unwrap();
        assert_eq!(g.len(), 48);
        assert!((g.radii()[0] - 1.0).abs() < 1e-15 && g.radii()[47] == 50.0);
        let g = RadialGrid::standard(1.0).unwrap();
        assert!((g.radii()[0] - 0.5).abs() < 1e-15 && g.radii()[47] == 0.9995);
        assert!(g.weights().iter().all(|&w| w > 0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn rotation_invariance(phi in 0.0f64..TAU, re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let a = C::new(re, im);
            let tol = 1e-8;
            let g = |shift: f64| {
                let h = CircleIntegrand::new(move |t| Ok((C::from_polar(1.5, t + shift) - a).norm().ln() + (2.0 * t + shift).cos()))
                    .with_hints([a.arg() - shift]);
                circle_average(&h, tol).unwrap()
            };
            prop_assert!((g(0.0) - g(phi)).abs() <= 2.0 * tol + 1e-9);
            prop_assert!((g(0.0) - jensen_log_mean(1.5, a)).abs() <= 1e-6);
        }

        #[test]
        fn height_is_monotone_and_log_convex(seed in 0u64..1000) {
            let c = 0.5 + (seed as f64) / 1000.0;
            let d = move |z: C| Ok(c / (1.0 + (z - 0.3).norm_sqr()).powi(2) + 0.1 * z.re.cos().abs());
            let radii: Vec<f64> = (0..8).map(|i| 0.3 * 1.5f64.powi(i)).collect();
            let t = height_on_radii(&d, &radii, 1e-8, &|_| 16, &[]).unwrap();
            for w in t.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-8);
            }
            for i in 1..t.len() - 1 {
                // equal spacing in log r
                prop_assert!(t[i + 1] - 2.0 * t[i] + t[i - 1] >= -1e-7);
            }
        }
    }
}
